use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::ga::{evaluate_cached, mutation_rate};
use super::{crowding_distance, dominates_values, hypervolume, non_dominated_sort};
use super::{GaConfig, Genome, ParetoFront, ParetoPoint, SearchSpace};
use crate::cost::ObjectiveVector;
use crate::error::{Error, Result};

/// Per-generation record of a multiobjective run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGenerationStats {
    pub generation: usize,
    /// Best value of each objective in the population.
    pub best: Vec<f64>,
    /// Hypervolume of the external archive.
    pub hypervolume: f64,
    pub archive_size: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiResult {
    pub front: ParetoFront,
    pub history: Vec<MultiGenerationStats>,
    /// Hypervolume reference: componentwise maximum of generation 0.
    pub reference: Vec<f64>,
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_and_crowd(values: &[Vec<f64>]) -> Result<(Vec<Vec<usize>>, Ranked)> {
    let fronts = non_dominated_sort(values)?;
    let mut rank = vec![0; values.len()];
    let mut crowding = vec![0.0; values.len()];
    for (k, front) in fronts.iter().enumerate() {
        let rows: Vec<Vec<f64>> = front.iter().map(|&i| values[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&rows)) {
            rank[i] = k;
            crowding[i] = d;
        }
    }
    Ok((fronts, Ranked { rank, crowding }))
}

fn better(r: &Ranked, a: usize, b: usize) -> bool {
    r.rank[a] < r.rank[b] || (r.rank[a] == r.rank[b] && r.crowding[a] > r.crowding[b])
}

fn binary_tournament<R: Rng>(r: &Ranked, size: usize, rng: &mut R) -> usize {
    let n = r.rank.len();
    let mut best = rng.random_range(0..n);
    for _ in 1..size {
        let c = rng.random_range(0..n);
        if better(r, c, best) {
            best = c;
        }
    }
    best
}

/// Non-dominated archive; a point enters unless an archived point dominates
/// or equals it, and evicts the points it dominates.
fn archive_insert(archive: &mut Vec<(Genome, Vec<f64>)>, g: &Genome, v: &[f64]) {
    if v.iter().any(|x| !x.is_finite()) {
        return;
    }
    if archive.iter().any(|(_, a)| a.as_slice() == v || dominates_values(a, v)) {
        return;
    }
    archive.retain(|(_, a)| !dominates_values(v, a));
    archive.push((g.clone(), v.to_vec()));
}

fn best_each(values: &[Vec<f64>], m: usize) -> Vec<f64> {
    (0..m).map(|k| values.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect()
}

/// NSGA-II over `space` minimizing the vector returned by `objectives`
/// (2 or 3 components named by `names`). Any non-finite component makes
/// the whole vector `+inf`.
pub fn optimize_multi<F>(
    space: &SearchSpace,
    names: &[String],
    objectives: F,
    config: &GaConfig,
    seed: u64,
) -> Result<MultiResult>
where
    F: Fn(&Genome) -> Vec<f64> + Sync,
{
    optimize_multi_with_repair(space, names, objectives, |_| {}, config, seed)
}

/// [`optimize_multi`] with `repair` applied to every sampled or bred genome
/// before evaluation. `repair` must keep the genome inside `space`.
pub fn optimize_multi_with_repair<F, R>(
    space: &SearchSpace,
    names: &[String],
    objectives: F,
    repair: R,
    config: &GaConfig,
    seed: u64,
) -> Result<MultiResult>
where
    F: Fn(&Genome) -> Vec<f64> + Sync,
    R: Fn(&mut Genome),
{
    config.validate()?;
    let m = names.len();
    if !(2..=3).contains(&m) {
        return Err(Error::ObjectiveMismatch(format!("{m} objectives; expected 2 or 3")));
    }
    let f = |g: &Genome| {
        let v = objectives(g);
        if v.len() == m && v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else if v.len() == m {
            Ok(vec![f64::INFINITY; m])
        } else {
            Err(v.len())
        }
    };
    let check = |vals: Vec<std::result::Result<Vec<f64>, usize>>| -> Result<Vec<Vec<f64>>> {
        vals.into_iter()
            .map(|v| v.map_err(|len| Error::ObjectiveMismatch(format!("objective returned {len} values, expected {m}"))))
            .collect()
    };

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rate = mutation_rate(config, space);
    let n = config.population;
    let mut cache = HashMap::new();
    let mut evaluations = 0;

    let mut pop: Vec<Genome> = (0..n).map(|_| super::sample_repaired(space, &repair, &mut rng)).collect();
    let mut values = check(evaluate_cached(&pop, &mut cache, &mut evaluations, &f))?;
    let (_, mut ranked) = rank_and_crowd(&values)?;

    let reference: Vec<f64> = (0..m)
        .map(|k| values.iter().map(|v| v[k]).filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut archive = Vec::new();
    for (g, v) in pop.iter().zip(&values) {
        archive_insert(&mut archive, g, v);
    }
    let record = |generation: usize, values: &[Vec<f64>], archive: &[(Genome, Vec<f64>)], evaluations: usize| -> Result<MultiGenerationStats> {
        let pts: Vec<Vec<f64>> = archive.iter().map(|(_, v)| v.clone()).collect();
        let hv = if reference.iter().all(|r| r.is_finite()) { hypervolume(&pts, &reference)? } else { 0.0 };
        Ok(MultiGenerationStats {
            generation,
            best: best_each(values, m),
            hypervolume: hv,
            archive_size: archive.len(),
            evaluations,
        })
    };
    let mut history = vec![record(0, &values, &archive, evaluations)?];

    for generation in 1..=config.generations {
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let a = &pop[binary_tournament(&ranked, config.tournament, &mut rng)];
            let b = &pop[binary_tournament(&ranked, config.tournament, &mut rng)];
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
            if children.len() < n {
                children.push(c2);
            }
        }
        let child_values = check(evaluate_cached(&children, &mut cache, &mut evaluations, &f))?;
        for (g, v) in children.iter().zip(&child_values) {
            archive_insert(&mut archive, g, v);
        }

        let union: Vec<Genome> = pop.drain(..).chain(children).collect();
        let union_values: Vec<Vec<f64>> = values.drain(..).chain(child_values).collect();
        let (fronts, union_ranked) = rank_and_crowd(&union_values)?;
        let mut chosen = Vec::with_capacity(n);
        for front in &fronts {
            if chosen.len() + front.len() <= n {
                chosen.extend_from_slice(front);
            } else {
                let mut rest = front.clone();
                rest.sort_by(|&a, &b| union_ranked.crowding[b].total_cmp(&union_ranked.crowding[a]).then(a.cmp(&b)));
                chosen.extend_from_slice(&rest[..n - chosen.len()]);
            }
            if chosen.len() == n {
                break;
            }
        }
        pop = chosen.iter().map(|&i| union[i].clone()).collect();
        values = chosen.iter().map(|&i| union_values[i].clone()).collect();
        ranked = Ranked {
            rank: chosen.iter().map(|&i| union_ranked.rank[i]).collect(),
            crowding: chosen.iter().map(|&i| union_ranked.crowding[i]).collect(),
        };
        history.push(record(generation, &values, &archive, evaluations)?);
    }

    // final rank-0 set of the population, one entry per distinct genome
    let (fronts, _) = rank_and_crowd(&values)?;
    let mut seen = HashSet::new();
    let mut members: Vec<usize> = fronts
        .first()
        .map(|f| f.iter().copied().filter(|&i| values[i].iter().all(|x| x.is_finite()) && seen.insert(pop[i].key())).collect())
        .unwrap_or_default();
    members.sort_by(|&a, &b| values[a][0].total_cmp(&values[b][0]).then(a.cmp(&b)));
    let rows: Vec<Vec<f64>> = members.iter().map(|&i| values[i].clone()).collect();
    let crowd = crowding_distance(&rows);
    let points = members
        .iter()
        .zip(crowd)
        .map(|(&i, crowding)| {
            Ok(ParetoPoint {
                genome: pop[i].clone(),
                objectives: ObjectiveVector::new(names.to_vec(), values[i].clone())?,
                rank: 0,
                crowding,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiResult { front: ParetoFront { points }, history, reference })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("f{i}")).collect()
    }

    fn schaffer(g: &Genome) -> Vec<f64> {
        let x = g.real[0];
        vec![x * x, (x - 2.0) * (x - 2.0)]
    }

    fn line_space() -> SearchSpace {
        SearchSpace::new(vec![(-5.0, 5.0)], vec![]).unwrap()
    }

    #[test]
    fn convex_front_is_recovered() {
        let cfg = GaConfig { generations: 100, ..GaConfig::multi() };
        let r = optimize_multi(&line_space(), &names(2), schaffer, &cfg, 4).unwrap();
        assert!(r.front.len() > 50);
        assert!(r.front.is_mutually_non_dominated());
        for p in &r.front.points {
            let (f1, f2) = (p.objectives.values[0], p.objectives.values[1]);
            // analytic set x in [0, 2]: f2 = (sqrt(f1) - 2)^2
            assert!((f2 - (f1.sqrt() - 2.0).powi(2)).abs() < 1e-2);
            assert!((-1e-2..=2.0 + 1e-2).contains(&p.genome.real[0]));
        }
        for w in r.history.windows(2) {
            assert!(w[1].hypervolume >= w[0].hypervolume);
        }
    }

    #[test]
    fn three_objectives_and_determinism() {
        let space = SearchSpace::new(vec![(0.0, 1.0); 3], vec![(1, 3)]).unwrap();
        let obj = |g: &Genome| {
            let s = g.real.iter().sum::<f64>() + g.int[0] as f64;
            vec![g.real[0] + 0.1 * s, g.real[1] + 0.1 * s, 1.0 - g.real[0] - g.real[1] + 0.1 * s]
        };
        let cfg = GaConfig { generations: 25, population: 40, ..GaConfig::multi() };
        let a = optimize_multi(&space, &names(3), obj, &cfg, 8).unwrap();
        let b = optimize_multi(&space, &names(3), obj, &cfg, 8).unwrap();
        assert_eq!(a, b);
        assert!(a.front.is_mutually_non_dominated());
        assert!(a.front.len() <= 40);
        for w in a.history.windows(2) {
            assert!(w[1].hypervolume >= w[0].hypervolume);
        }
    }

    #[test]
    fn rejects_bad_objective_count() {
        let cfg = GaConfig { generations: 1, population: 4, ..GaConfig::multi() };
        assert!(optimize_multi(&line_space(), &names(1), |g| vec![g.real[0]], &cfg, 0).is_err());
        assert!(optimize_multi(&line_space(), &names(2), |g| vec![g.real[0]], &cfg, 0).is_err());
    }

    #[test]
    fn archive_keeps_only_non_dominated() {
        let g = Genome { real: vec![], int: vec![] };
        let mut a = Vec::new();
        archive_insert(&mut a, &g, &[2.0, 2.0]);
        archive_insert(&mut a, &g, &[1.0, 3.0]);
        archive_insert(&mut a, &g, &[1.0, 1.0]);
        archive_insert(&mut a, &g, &[1.0, 1.0]);
        archive_insert(&mut a, &g, &[f64::INFINITY, 0.0]);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].1, vec![1.0, 1.0]);
    }
}
