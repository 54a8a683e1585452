use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GaConfig, Genome, SearchSpace};
use crate::error::Result;

/// Evaluates `genomes`, reusing cached values by quantized genome. Fresh
/// evaluations run in parallel; output order follows `genomes`.
pub(super) fn evaluate_cached<T, F>(
    genomes: &[Genome],
    cache: &mut HashMap<Vec<i64>, T>,
    evaluations: &mut usize,
    f: &F,
) -> Vec<T>
where
    T: Clone + Send,
    F: Fn(&Genome) -> T + Sync,
{
    let mut fresh: Vec<(Vec<i64>, &Genome)> = Vec::new();
    for g in genomes {
        let key = g.key();
        if !cache.contains_key(&key) && !fresh.iter().any(|(k, _)| *k == key) {
            fresh.push((key, g));
        }
    }
    let values: Vec<T> = fresh.par_iter().map(|(_, g)| f(g)).collect();
    *evaluations += values.len();
    for ((key, _), v) in fresh.into_iter().zip(values) {
        cache.insert(key, v);
    }
    genomes.iter().map(|g| cache[&g.key()].clone()).collect()
}

pub(super) fn mutation_rate(config: &GaConfig, space: &SearchSpace) -> f64 {
    config.mutation_rate.unwrap_or(1.0 / space.genes().max(1) as f64)
}

/// Per-generation record of a single-objective run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleGenerationStats {
    pub generation: usize,
    pub best: f64,
    /// Mean over finite values.
    pub mean: f64,
    /// Cumulative objective evaluations (cache misses).
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleResult {
    pub best: Genome,
    pub best_value: f64,
    pub history: Vec<SingleGenerationStats>,
}

fn stats(generation: usize, values: &[f64], evaluations: usize) -> SingleGenerationStats {
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mean = if finite.is_empty() { f64::INFINITY } else { finite.iter().sum::<f64>() / finite.len() as f64 };
    SingleGenerationStats { generation, best, mean, evaluations }
}

fn tournament<R: Rng>(values: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..values.len());
    for _ in 1..size {
        let c = rng.random_range(0..values.len());
        if values[c] < values[best] {
            best = c;
        }
    }
    best
}

/// Generational GA minimizing `objective`. Non-finite values count as
/// `+inf`. Deterministic for a given seed.
pub fn optimize_single<F>(space: &SearchSpace, objective: F, config: &GaConfig, seed: u64) -> Result<SingleResult>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    optimize_single_with_repair(space, objective, |_| {}, config, seed)
}

/// [`optimize_single`] with `repair` applied to every sampled or bred genome
/// before evaluation. `repair` must keep the genome inside `space`.
pub fn optimize_single_with_repair<F, R>(
    space: &SearchSpace,
    objective: F,
    repair: R,
    config: &GaConfig,
    seed: u64,
) -> Result<SingleResult>
where
    F: Fn(&Genome) -> f64 + Sync,
    R: Fn(&mut Genome),
{
    config.validate()?;
    let f = |g: &Genome| {
        let v = objective(g);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rate = mutation_rate(config, space);
    let n = config.population;
    let mut cache = HashMap::new();
    let mut evaluations = 0;

    let mut pop: Vec<Genome> = (0..n).map(|_| super::sample_repaired(space, &repair, &mut rng)).collect();
    let mut values = evaluate_cached(&pop, &mut cache, &mut evaluations, &f);
    let mut history = vec![stats(0, &values, evaluations)];

    for generation in 1..=config.generations {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut next: Vec<Genome> = order[..config.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut children = Vec::with_capacity(n);
        while next.len() + children.len() < n {
            let a = &pop[tournament(&values, config.tournament, &mut rng)];
            let b = &pop[tournament(&values, config.tournament, &mut rng)];
            let (mut c1, mut c2) = if rng.random::<f64>() < config.crossover_prob {
                space.crossover(a, b, config.eta_c, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            space.mutate(&mut c1, rate, config.eta_m, &mut rng);
            space.mutate(&mut c2, rate, config.eta_m, &mut rng);
            repair(&mut c1);
            repair(&mut c2);
            children.push(c1);
            if next.len() + children.len() < n {
                children.push(c2);
            }
        }
        next.extend(children);
        pop = next;
        values = evaluate_cached(&pop, &mut cache, &mut evaluations, &f);
        history.push(stats(generation, &values, evaluations));
    }

    let best = (0..n).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap_or(0);
    Ok(SingleResult { best: pop[best].clone(), best_value: values[best], history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_space() -> SearchSpace {
        SearchSpace::new(vec![(-5.0, 5.0); 3], vec![(1, 5); 2]).unwrap()
    }

    fn sphere(g: &Genome) -> f64 {
        g.real.iter().map(|x| x * x).sum::<f64>() + g.int.iter().map(|&k| ((k - 3) * (k - 3)) as f64).sum::<f64>()
    }

    #[test]
    fn sphere_converges() {
        let r = optimize_single(&sphere_space(), sphere, &GaConfig::default(), 11).unwrap();
        assert!(r.best_value < 1e-4, "{}", r.best_value);
        assert_eq!(r.history.len(), 201);
    }

    #[test]
    fn elitism_makes_best_monotone() {
        let cfg = GaConfig { generations: 40, ..GaConfig::default() };
        let r = optimize_single(&sphere_space(), sphere, &cfg, 5).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
    }

    #[test]
    fn same_seed_same_history() {
        let cfg = GaConfig { generations: 30, ..GaConfig::default() };
        let a = optimize_single(&sphere_space(), sphere, &cfg, 99).unwrap();
        let b = optimize_single(&sphere_space(), sphere, &cfg, 99).unwrap();
        assert_eq!(a, b);
        let c = optimize_single(&sphere_space(), sphere, &cfg, 100).unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn non_finite_objective_is_infinite() {
        let cfg = GaConfig { generations: 3, population: 10, ..GaConfig::default() };
        let r = optimize_single(&sphere_space(), |g| if g.real[0] > 0.0 { f64::NAN } else { sphere(g) }, &cfg, 1).unwrap();
        assert!(r.best_value.is_finite());
        assert!(r.best.real[0] <= 0.0);
    }

    #[test]
    fn cache_skips_duplicates() {
        let mut cache = HashMap::new();
        let mut evals = 0;
        let g = Genome { real: vec![1.0], int: vec![] };
        let out = evaluate_cached(&[g.clone(), g.clone(), g], &mut cache, &mut evals, &|g: &Genome| g.real[0]);
        assert_eq!(out, vec![1.0; 3]);
        assert_eq!(evals, 1);
    }
}
