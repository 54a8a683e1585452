//! Mixed-integer genetic search.
//!
//! [`optimize_single`] is a generational GA with elitism;
//! [`optimize_multi`] is NSGA-II (rank + crowding survival) with an external
//! non-dominated archive whose hypervolume is tracked per generation.
//!
//! All randomness comes from one seeded ChaCha stream consumed on the
//! calling thread. Fitness evaluation fans out over rayon and never touches
//! the stream, so results are identical for any worker count.

mod ga;
mod genome;
mod hypervolume;
mod nsga2;
mod sort;

use serde::{Deserialize, Serialize};

use crate::cost::ObjectiveVector;

pub use ga::{optimize_single, optimize_single_with_repair, SingleGenerationStats, SingleResult};
pub use genome::{
    polynomial_mutation, sbx_crossover, Genome, SearchSpace, ALPHA_AMP, B_BETA_MARGIN,
};
pub use hypervolume::hypervolume;
pub use nsga2::{optimize_multi, optimize_multi_with_repair, MultiGenerationStats, MultiResult};
pub use sort::{crowding_distance, dominates, dominates_values, non_dominated_sort};

fn sample_repaired<R: rand::Rng + ?Sized>(space: &SearchSpace, repair: &impl Fn(&mut Genome), rng: &mut R) -> Genome {
    let mut g = space.sample(rng);
    repair(&mut g);
    g
}

/// Hyperparameters of both searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    /// Probability that a selected pair is recombined.
    pub crossover_prob: f64,
    /// SBX distribution index.
    pub eta_c: f64,
    /// Polynomial mutation distribution index.
    pub eta_m: f64,
    /// Per-gene mutation probability; `None` means `1 / genes`.
    pub mutation_rate: Option<f64>,
    pub tournament: usize,
    /// Individuals copied unchanged into the next generation (single
    /// objective only).
    pub elitism: usize,
    /// Pulse searches only: snap each new genome onto the target geometric
    /// phase before it is evaluated.
    pub phase_repair: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 200,
            crossover_prob: 0.9,
            eta_c: 15.0,
            eta_m: 20.0,
            mutation_rate: None,
            tournament: 2,
            elitism: 1,
            phase_repair: true,
        }
    }
}

impl GaConfig {
    /// Defaults for multiobjective runs (300 generations).
    pub fn multi() -> Self {
        Self { generations: 300, ..Self::default() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidParams(m.to_string()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad("crossover_prob outside [0, 1]");
        }
        if !(self.eta_c >= 0.0 && self.eta_m >= 0.0) {
            return bad("distribution indices must be non-negative");
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return bad("mutation_rate outside [0, 1]");
            }
        }
        if self.tournament == 0 {
            return bad("tournament size must be positive");
        }
        if self.elitism >= self.population {
            return bad("elitism must be smaller than the population");
        }
        Ok(())
    }
}

/// A member of a non-dominated set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub genome: Genome,
    pub objectives: ObjectiveVector,
    pub rank: usize,
    /// Infinite for boundary points; written as `"inf"` in files.
    #[serde(with = "crate::io::float_text")]
    pub crowding: f64,
}

/// Mutually non-dominated points (rank 0).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParetoFront {
    pub points: Vec<ParetoPoint>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Objective values, one row per point.
    pub fn objective_rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.objectives.values.clone()).collect()
    }

    /// True if no point dominates another (brute force).
    pub fn is_mutually_non_dominated(&self) -> bool {
        let rows = self.objective_rows();
        rows.iter()
            .enumerate()
            .all(|(i, a)| rows.iter().enumerate().all(|(j, b)| i == j || !dominates_values(a, b)))
    }
}
