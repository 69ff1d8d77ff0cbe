//! Seeded random machines for auditing the cycle bookkeeping.

use qotto_core::cycle::{self, AuditReport, CycleResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A finite-level machine with positive, increasing energies at both strokes.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMachine {
    pub e_hot: Vec<f64>,
    pub e_cold: Vec<f64>,
    pub t_hot: f64,
    pub t_cold: f64,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub machine: RandomMachine,
    pub result: CycleResult,
    pub audit: AuditReport,
}

fn ladder<R: Rng>(rng: &mut R, n: usize, ground: f64, spacing: f64) -> Vec<f64> {
    let mut e = ground;
    (0..n)
        .map(|k| {
            if k > 0 {
                e += spacing * rng.random_range(0.05..2.0);
            }
            e
        })
        .collect()
}

/// Half the samples have independent hot and cold ladders; the rest have a
/// cold ladder obtained by compressing the hot one with per-level jitter.
pub fn random_machine<R: Rng>(rng: &mut R) -> RandomMachine {
    let n = rng.random_range(2..=24);
    let spacing = 10f64.powf(rng.random_range(-1.0..1.0));
    let ground = spacing * rng.random_range(0.01..2.0);
    let e_hot = ladder(rng, n, ground, spacing);
    let e_cold = if rng.random_bool(0.5) {
        let c = rng.random_range(0.1..1.5);
        let mut e: Vec<f64> = e_hot.iter().map(|x| x * c * rng.random_range(0.8..1.25)).collect();
        e.sort_by(f64::total_cmp);
        e
    } else {
        let s = spacing * rng.random_range(0.1..1.5);
        let ground = s * rng.random_range(0.01..2.0);
        ladder(rng, n, ground, s)
    };
    let t_cold = spacing * 10f64.powf(rng.random_range(-1.5..1.0));
    let t_hot = t_cold * rng.random_range(1.05..20.0);
    RandomMachine {
        e_hot,
        e_cold,
        t_hot,
        t_cold,
    }
}

/// `samples` machines drawn from a ChaCha8 stream seeded with `seed`.
pub fn random_suite(seed: u64, samples: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let machine = random_machine(&mut rng);
            let result = cycle::run_otto_levels(&machine.e_hot, &machine.e_cold, machine.t_hot, machine.t_cold)
                .expect("generated machines are valid");
            let audit = cycle::carnot_audit(&result, machine.t_hot, machine.t_cold);
            Sample { machine, result, audit }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let a = random_suite(7, 20);
        let b = random_suite(7, 20);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.machine, y.machine);
            assert_eq!(x.result, y.result);
        }
        assert_ne!(random_suite(8, 1)[0].machine, a[0].machine);
    }

    #[test]
    fn machines_are_well_formed() {
        for s in random_suite(1, 200) {
            let m = &s.machine;
            assert_eq!(m.e_hot.len(), m.e_cold.len());
            assert!(m.e_hot.windows(2).all(|w| w[0] <= w[1]));
            assert!(m.e_cold.windows(2).all(|w| w[0] <= w[1]));
            assert!(m.e_cold[0] > 0.0 && m.t_hot > m.t_cold);
        }
    }
}
