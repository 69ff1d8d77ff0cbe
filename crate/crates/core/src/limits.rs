//! The classical limit by scaling.
//!
//! Multiplying both potentials and both temperatures by ξ² and dividing the
//! resulting energies by ξ² is the same as running the machine with an
//! effective Planck constant ħ/ξ. Letting ξ grow walks the machine to its
//! classical limit.

use alloc::vec::Vec;

use crate::cycle::{CycleResult, LevelContribution, Machine, Mode};
use crate::error::{require_positive, Error, Result};
use crate::potentials::PotentialSpec;
use crate::spectrum::{self, DvrSettings};

/// How a scaled cycle is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingPath {
    /// Potentials and temperatures multiplied by ξ², energies divided back.
    Potential,
    /// ħ replaced by ħ/ξ.
    ReducedHbar,
}

/// Default schedule 1, 2, 4, ..., 128.
pub fn default_schedule() -> Vec<f64> {
    (0..8).map(|k| (1u32 << k) as f64).collect()
}

/// Default relative tolerance on consecutive W/ξ² values.
pub const DEFAULT_REL_TOL: f64 = 1e-3;

/// One cycle at scale ξ, reported in the units of the unscaled machine.
pub fn scaled_cycle(
    machine: &Machine,
    t_hot: f64,
    t_cold: f64,
    xi: f64,
    path: ScalingPath,
    settings: &DvrSettings,
) -> Result<CycleResult> {
    require_positive("xi", xi)?;
    if xi < 1.0 {
        return Err(Error::invalid("xi", "must be >= 1"));
    }
    match path {
        ScalingPath::ReducedHbar => {
            let m = Machine::new(machine.hot.with_reduced_hbar(xi)?, machine.cold.with_reduced_hbar(xi)?);
            m.run(t_hot, t_cold, settings)
        }
        ScalingPath::Potential => {
            let m = Machine::new(machine.hot.scale(xi)?, machine.cold.scale(xi)?);
            let xi2 = xi * xi;
            let r = m.run(xi2 * t_hot, xi2 * t_cold, settings)?;
            Ok(unscale(r, xi2, t_hot, t_cold))
        }
    }
}

fn unscale(r: CycleResult, xi2: f64, t_hot: f64, t_cold: f64) -> CycleResult {
    CycleResult {
        work: r.work / xi2,
        heat_hot: r.heat_hot / xi2,
        heat_cold: r.heat_cold / xi2,
        per_level: r
            .per_level
            .iter()
            .map(|l| LevelContribution {
                energy_hot: l.energy_hot / xi2,
                energy_cold: l.energy_cold / xi2,
                work: l.work / xi2,
                heat_hot: l.heat_hot / xi2,
                heat_cold: l.heat_cold / xi2,
                ..*l
            })
            .collect(),
        t_hot,
        t_cold,
        ..r
    }
}

/// Cycles along a ξ schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub xi_values: Vec<f64>,
    /// W/ξ², i.e. W at ħ_eff = ħ/ξ.
    pub work_per_xi2: Vec<f64>,
    pub eta: Vec<Option<f64>>,
    pub modes: Vec<Mode>,
    /// Levels carried by each cycle.
    pub levels: Vec<usize>,
    pub results: Vec<CycleResult>,
    pub rel_tol: f64,
    /// Relative change between the last two entries.
    pub last_change: f64,
    pub converged: bool,
    /// Last W/ξ² when converged.
    pub classical_work: Option<f64>,
}

impl ScalingSeries {
    /// Assembles a series from cycles computed in schedule order.
    pub fn from_results(xi_values: Vec<f64>, results: Vec<CycleResult>, rel_tol: f64) -> Result<Self> {
        check_schedule(&xi_values)?;
        if results.len() != xi_values.len() {
            return Err(Error::invalid("results", "one cycle per schedule entry"));
        }
        let work: Vec<f64> = results.iter().map(|r| r.work).collect();
        let last_change = match work.len() {
            0 | 1 => f64::INFINITY,
            n => {
                let (a, b) = (work[n - 2], work[n - 1]);
                if a == b {
                    0.0
                } else {
                    (b - a).abs() / b.abs().max(a.abs())
                }
            }
        };
        let converged = last_change < rel_tol;
        Ok(ScalingSeries {
            eta: results.iter().map(|r| r.eta_engine).collect(),
            modes: results.iter().map(|r| r.mode).collect(),
            levels: results.iter().map(|r| r.per_level.len()).collect(),
            classical_work: converged.then(|| work[work.len() - 1]),
            work_per_xi2: work,
            xi_values,
            results,
            rel_tol,
            last_change,
            converged,
        })
    }
}

fn check_schedule(xi: &[f64]) -> Result<()> {
    if xi.is_empty() {
        return Err(Error::invalid("xi_schedule", "empty"));
    }
    if xi.iter().any(|x| !x.is_finite() || *x < 1.0) || xi.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("xi_schedule", "must be strictly increasing values >= 1"));
    }
    Ok(())
}

/// Runs [`scaled_cycle`] along `schedule`. A series that has not settled by
/// its last entry is returned with `converged = false` and the last relative
/// change, rather than as an error.
pub fn classical_limit_series(
    machine: &Machine,
    t_hot: f64,
    t_cold: f64,
    schedule: &[f64],
    rel_tol: f64,
    path: ScalingPath,
    settings: &DvrSettings,
) -> Result<ScalingSeries> {
    check_schedule(schedule)?;
    require_positive("rel_tol", rel_tol)?;
    let results = schedule
        .iter()
        .map(|&xi| scaled_cycle(machine, t_hot, t_cold, xi, path, settings))
        .collect::<Result<Vec<_>>>()?;
    ScalingSeries::from_results(schedule.to_vec(), results, rel_tol)
}

/// Largest relative difference between the two sides of
/// `E_n(ħ/ξ, V) = E_n(ħ, ξ²V)/ξ²` over the first `n_levels` levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCheck {
    pub xi: f64,
    pub max_rel_diff: f64,
    pub passed: bool,
}

pub const SCALING_REL_TOL: f64 = 1e-8;

pub fn verify_scaling_relation(
    potential: &PotentialSpec,
    xi_list: &[f64],
    n_levels: usize,
    settings: &DvrSettings,
) -> Result<Vec<ScalingCheck>> {
    xi_list
        .iter()
        .map(|&xi| {
            require_positive("xi", xi)?;
            let reduced = spectrum::solve(&potential.with_reduced_hbar(xi)?, n_levels, settings)?;
            let scaled = spectrum::solve(&potential.scale(xi)?, n_levels, settings)?;
            let xi2 = xi * xi;
            let scale = reduced.energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            let max_rel_diff = reduced
                .energies
                .iter()
                .zip(&scaled.energies)
                .map(|(a, b)| (a - b / xi2).abs() / a.abs().max(1e-300 * scale))
                .fold(0.0, f64::max);
            Ok(ScalingCheck {
                xi,
                max_rel_diff,
                passed: max_rel_diff <= SCALING_REL_TOL,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::run_otto;
    use crate::units::UnitSystem;

    const NAT: UnitSystem = UnitSystem::NATURAL;

    fn wells(r: f64, g: f64) -> Machine {
        Machine::new(
            PotentialSpec::square_well(2.0, NAT).unwrap(),
            PotentialSpec::delta_well(2.0 * r, g, NAT).unwrap(),
        )
    }

    #[test]
    fn unit_scale_is_plain_cycle() {
        let m = wells(1.5, 0.7);
        let s = DvrSettings::default();
        let direct = m.run(6.0, 0.5, &s).unwrap();
        for path in [ScalingPath::Potential, ScalingPath::ReducedHbar] {
            let r = scaled_cycle(&m, 6.0, 0.5, 1.0, path, &s).unwrap();
            assert_eq!(r.work, direct.work);
            assert_eq!(r.mode, direct.mode);
        }
    }

    #[test]
    fn paths_agree() {
        let s = DvrSettings::default();
        let m = wells(1.0, 2.0);
        for &xi in &[2.0, 5.0, 16.0] {
            let a = scaled_cycle(&m, 9.6, 0.8, xi, ScalingPath::Potential, &s).unwrap();
            let b = scaled_cycle(&m, 9.6, 0.8, xi, ScalingPath::ReducedHbar, &s).unwrap();
            for (x, y) in [(a.work, b.work), (a.heat_hot, b.heat_hot), (a.heat_cold, b.heat_cold)] {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()), "xi={xi}: {x} vs {y}");
            }
        }
        let h = Machine::new(
            PotentialSpec::harmonic(2.0, NAT).unwrap(),
            PotentialSpec::harmonic(1.0, NAT).unwrap(),
        );
        let a = scaled_cycle(&h, 4.0, 1.0, 3.0, ScalingPath::Potential, &s).unwrap();
        let b = scaled_cycle(&h, 4.0, 1.0, 3.0, ScalingPath::ReducedHbar, &s).unwrap();
        assert!((a.work - b.work).abs() <= 1e-9 * a.work.abs());
        assert!((a.eta_engine.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn delta_engine_fades_to_broken() {
        let s = DvrSettings::default();
        let m = wells(1.0, 2.0);
        let series = classical_limit_series(
            &m,
            9.6,
            0.8,
            &[1.0, 4.0, 16.0, 64.0],
            DEFAULT_REL_TOL,
            ScalingPath::ReducedHbar,
            &s,
        )
        .unwrap();
        assert_eq!(series.modes[0], Mode::Engine);
        assert_eq!(series.modes[3], Mode::Broken);
        // The barrier's effect dies off like 1/ξ; the work approaches zero from above.
        let w = &series.work_per_xi2;
        assert!(w[3] > 0.0 && w[3] < 0.1 * w[0].abs());
        let ratio = w[3] / w[2];
        assert!(ratio > 0.2 && ratio < 0.35, "{ratio}");
        assert!(series.levels.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn identical_potentials_converge_trivially() {
        let p = PotentialSpec::square_well(2.0, NAT).unwrap();
        let m = Machine::new(p, p);
        let series = classical_limit_series(
            &m,
            2.0,
            1.0,
            &[1.0, 2.0, 4.0],
            DEFAULT_REL_TOL,
            ScalingPath::Potential,
            &DvrSettings::default(),
        )
        .unwrap();
        assert!(series.work_per_xi2.iter().all(|&w| w == 0.0));
        assert!(series.converged);
        assert_eq!(series.classical_work, Some(0.0));
    }

    #[test]
    fn schedule_validation() {
        let m = wells(1.0, 0.0);
        let s = DvrSettings::default();
        for bad in [&[][..], &[2.0, 1.0][..], &[0.5, 1.0][..]] {
            let e = classical_limit_series(&m, 2.0, 1.0, bad, 1e-3, ScalingPath::Potential, &s).unwrap_err();
            assert!(e.is_validation());
        }
    }

    #[test]
    fn scaling_relation_closed_forms() {
        let s = DvrSettings::default();
        for p in [
            PotentialSpec::harmonic(1.3, NAT).unwrap(),
            PotentialSpec::square_well(2.0, NAT).unwrap(),
            PotentialSpec::delta_well(2.0, 1.5, NAT).unwrap(),
            PotentialSpec::delta_well(2.0, -3.0, NAT).unwrap(),
        ] {
            for c in verify_scaling_relation(&p, &[2.0, 10.0, 100.0], 10, &s).unwrap() {
                assert!(c.passed, "{p:?} xi={} diff={}", c.xi, c.max_rel_diff);
            }
        }
    }

    #[test]
    fn scaled_cycle_matches_hand_scaled_spectra() {
        // ξ²-scaled square wells: energies scale by ξ², so W/ξ² at ξ²T equals W at T.
        let h = crate::spectrum::solve_square_well(2.0, 300, NAT).unwrap();
        let c = crate::spectrum::solve_square_well(4.0, 300, NAT).unwrap();
        let base = run_otto(&h, &c, 12.0, 1.0).unwrap();
        let m = Machine::new(
            PotentialSpec::square_well(2.0, NAT).unwrap(),
            PotentialSpec::square_well(4.0, NAT).unwrap(),
        );
        let r = scaled_cycle(&m, 12.0, 1.0, 3.0, ScalingPath::Potential, &DvrSettings::default()).unwrap();
        // Square wells do not change under potential scaling: this is the plain cycle.
        assert!((r.work * 9.0 - run_otto(&h, &c, 108.0, 9.0).unwrap().work).abs() < 1e-9 * r.work.abs() * 9.0);
        assert!(base.work < 0.0);
    }
}
