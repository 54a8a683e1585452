use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{PulseParams, AMPLITUDE_BOUND, INTEGER_RANGE};

/// Bound on the amplitude genes.
pub const ALPHA_AMP: f64 = AMPLITUDE_BOUND;
/// Distance kept from the open ends of `b_beta in (0, 1)`.
pub const B_BETA_MARGIN: f64 = 1e-6;

/// Mixed genome: continuous genes and integer genes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub real: Vec<f64>,
    pub int: Vec<i64>,
}

impl Genome {
    pub fn len(&self) -> usize {
        self.real.len() + self.int.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cache key: continuous genes on a 1e-12 lattice.
    pub fn key(&self) -> Vec<i64> {
        self.real
            .iter()
            .map(|x| (x * 1e12).round() as i64)
            .chain(self.int.iter().copied())
            .collect()
    }

    /// Pulse genome layout: real `(a_alpha, a_beta, b_beta)`, integer
    /// `(b_alpha, c_alpha, c_beta)`.
    pub fn to_params(&self, tau: f64) -> Result<PulseParams> {
        if self.real.len() != 3 || self.int.len() != 3 {
            return Err(Error::InvalidParams(format!(
                "pulse genome needs 3 + 3 genes, got {} + {}",
                self.real.len(),
                self.int.len()
            )));
        }
        let int = |k: usize| u32::try_from(self.int[k]).map_err(|_| Error::InvalidParams("negative integer gene".into()));
        Ok(PulseParams {
            a_alpha: self.real[0],
            b_alpha: int(0)?,
            c_alpha: int(1)?,
            a_beta: self.real[1],
            b_beta: self.real[2],
            c_beta: int(2)?,
            tau,
        })
    }

    pub fn from_params(p: &PulseParams) -> Self {
        Self {
            real: vec![p.a_alpha, p.a_beta, p.b_beta],
            int: vec![p.b_alpha as i64, p.c_alpha as i64, p.c_beta as i64],
        }
    }
}

/// Box bounds of a genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub real: Vec<(f64, f64)>,
    pub int: Vec<(i64, i64)>,
}

impl SearchSpace {
    pub fn new(real: Vec<(f64, f64)>, int: Vec<(i64, i64)>) -> Result<Self> {
        for &(lo, hi) in &real {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParams(format!("bad real bound ({lo}, {hi})")));
            }
        }
        for &(lo, hi) in &int {
            if lo > hi {
                return Err(Error::InvalidParams(format!("bad integer bound ({lo}, {hi})")));
            }
        }
        Ok(Self { real, int })
    }

    /// Space of pulse parameters.
    pub fn pulse() -> Self {
        let (lo, hi) = INTEGER_RANGE;
        let ib = (lo as i64, hi as i64);
        Self {
            real: vec![
                (-ALPHA_AMP, ALPHA_AMP),
                (-ALPHA_AMP, ALPHA_AMP),
                (B_BETA_MARGIN, 1.0 - B_BETA_MARGIN),
            ],
            int: vec![ib, ib, ib],
        }
    }

    pub fn genes(&self) -> usize {
        self.real.len() + self.int.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        Genome {
            real: self.real.iter().map(|&(lo, hi)| if lo < hi { rng.random_range(lo..=hi) } else { lo }).collect(),
            int: self.int.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect(),
        }
    }

    pub fn contains(&self, g: &Genome) -> bool {
        g.real.len() == self.real.len()
            && g.int.len() == self.int.len()
            && g.real.iter().zip(&self.real).all(|(x, &(lo, hi))| x.is_finite() && *x >= lo && *x <= hi)
            && g.int.iter().zip(&self.int).all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    /// Recombines two parents: bounded SBX on continuous genes (each gene
    /// with probability 1/2), uniform swap on integer genes.
    pub fn crossover<R: Rng + ?Sized>(&self, a: &Genome, b: &Genome, eta_c: f64, rng: &mut R) -> (Genome, Genome) {
        let mut c1 = a.clone();
        let mut c2 = b.clone();
        for (k, &(lo, hi)) in self.real.iter().enumerate() {
            if rng.random::<f64>() <= 0.5 {
                let (x, y) = sbx_crossover(a.real[k], b.real[k], lo, hi, eta_c, rng);
                c1.real[k] = x;
                c2.real[k] = y;
            }
        }
        for k in 0..self.int.len() {
            if rng.random::<f64>() < 0.5 {
                std::mem::swap(&mut c1.int[k], &mut c2.int[k]);
            }
        }
        (c1, c2)
    }

    /// Polynomial mutation on continuous genes, uniform reset on integer
    /// genes, each gene with probability `rate`.
    pub fn mutate<R: Rng + ?Sized>(&self, g: &mut Genome, rate: f64, eta_m: f64, rng: &mut R) {
        for (k, &(lo, hi)) in self.real.iter().enumerate() {
            if rng.random::<f64>() < rate {
                g.real[k] = polynomial_mutation(g.real[k], lo, hi, eta_m, rng);
            }
        }
        for (k, &(lo, hi)) in self.int.iter().enumerate() {
            if rng.random::<f64>() < rate {
                g.int[k] = rng.random_range(lo..=hi);
            }
        }
    }
}

/// Bounded simulated binary crossover of one gene.
pub fn sbx_crossover<R: Rng + ?Sized>(x1: f64, x2: f64, lo: f64, hi: f64, eta: f64, rng: &mut R) -> (f64, f64) {
    if (x1 - x2).abs() < 1e-14 || hi <= lo {
        return (x1, x2);
    }
    let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let u: f64 = rng.random();
    let spread = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
        }
    };
    let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
    let c1 = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
    let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
    let c2 = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
    let c1 = c1.clamp(lo, hi);
    let c2 = c2.clamp(lo, hi);
    if rng.random::<f64>() < 0.5 {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

/// Bounded polynomial mutation of one gene.
pub fn polynomial_mutation<R: Rng + ?Sized>(x: f64, lo: f64, hi: f64, eta: f64, rng: &mut R) -> f64 {
    if hi <= lo {
        return lo;
    }
    let span = hi - lo;
    let d1 = (x - lo) / span;
    let d2 = (hi - x) / span;
    let u: f64 = rng.random();
    let p = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(p) - 1.0
    } else {
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(p)
    };
    (x + dq * span).clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseKind;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_round_trip() {
        let p = PulseKind::Adr.params();
        assert_eq!(Genome::from_params(&p).to_params(1.0).unwrap(), p);
        assert!(SearchSpace::pulse().contains(&Genome::from_params(&p)));
    }

    #[test]
    fn key_quantizes() {
        let a = Genome { real: vec![0.1], int: vec![2] };
        let b = Genome { real: vec![0.1 + 1e-14], int: vec![2] };
        let c = Genome { real: vec![0.1 + 1e-11], int: vec![2] };
        assert_eq!(a.key(), b.key());
        assert_ne!(a.key(), c.key());
    }

    #[test]
    fn variation_preserves_bounds_10k() {
        let space = SearchSpace::pulse();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut a = space.sample(&mut rng);
        let mut b = space.sample(&mut rng);
        for _ in 0..10_000 {
            let (mut c1, mut c2) = space.crossover(&a, &b, 15.0, &mut rng);
            space.mutate(&mut c1, 0.5, 20.0, &mut rng);
            space.mutate(&mut c2, 0.5, 20.0, &mut rng);
            assert!(space.contains(&c1) && space.contains(&c2), "{c1:?} {c2:?}");
            a = c1;
            b = if rng.random::<f64>() < 0.1 { space.sample(&mut rng) } else { c2 };
        }
    }

    #[test]
    fn sbx_children_average_to_parents_mean() {
        // without clamping, SBX children are symmetric about the parents' mean
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (c1, c2) = sbx_crossover(-0.5, 0.5, -1e9, 1e9, 15.0, &mut rng);
            assert!((c1 + c2).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn mutation_stays_in_bounds(x in -30.0f64..30.0, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = polynomial_mutation(x, -30.0, 30.0, 20.0, &mut rng);
            prop_assert!((-30.0..=30.0).contains(&y));
        }

        #[test]
        fn sbx_stays_in_bounds(x in 0.0f64..1.0, y in 0.0f64..1.0, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b) = sbx_crossover(x, y, 0.0, 1.0, 15.0, &mut rng);
            prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        }
    }
}
