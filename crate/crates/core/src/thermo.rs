//! Canonical ensembles over spectra and the classical phase-space oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{require_positive, Error, Result};
use crate::math;
use crate::potentials::{PotentialSpec, PotentialValue, Shape};
use crate::quad::{self, QuadSettings};
use crate::spectrum::Spectrum;

/// Safety factor multiplying the Boltzmann weight of the first dropped level.
pub const TAIL_SAFETY: f64 = 100.0;
/// Bound on the probability mass left out by truncation.
pub const TAIL_BOUND: f64 = 1e-10;

/// Boltzmann populations of a spectrum at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub spectrum: Spectrum,
    pub temperature: f64,
    /// One entry per retained level.
    pub populations: Vec<f64>,
    /// `sum exp(-(E_n - E_1)/T)` over the retained levels.
    pub z: f64,
    pub n_kept: usize,
    /// `TAIL_SAFETY * exp(-(E_{n_kept+1} - E_1)/T)`.
    pub tail_bound: f64,
}

/// Number of levels to keep at temperature `t`: the smallest count whose
/// first dropped level meets the tail bound.
pub fn levels_needed(energies: &[f64], t: f64) -> Result<(usize, f64)> {
    let e1 = energies[0];
    for (k, &e) in energies.iter().enumerate().skip(1) {
        let tail = TAIL_SAFETY * math::exp(-(e - e1) / t);
        if tail < TAIL_BOUND {
            return Ok((k, tail));
        }
    }
    // Extrapolate the level count from the mean spacing for the error report.
    let n = energies.len();
    let spread = (energies[n - 1] - e1).max(f64::MIN_POSITIVE);
    let needed = (n as f64 * (t * math::ln(TAIL_SAFETY / TAIL_BOUND) / spread)).max(n as f64 + 1.0);
    Err(Error::Truncation {
        available: n,
        needed: math::ceil(needed) as usize,
        temperature: t,
    })
}

/// Boltzmann populations `P_n ∝ exp(-(E_n - E_1)/T)` over the levels needed
/// for the tail bound.
pub fn thermalize(spectrum: &Spectrum, temperature: f64) -> Result<ThermalEnsemble> {
    require_positive("temperature", temperature)?;
    if spectrum.is_empty() {
        return Err(Error::invalid("spectrum", "empty"));
    }
    let (n_kept, tail_bound) = levels_needed(&spectrum.energies, temperature)?;
    Ok(populate(spectrum, temperature, n_kept, tail_bound))
}

/// Populations over exactly the first `n` levels, for evaluations that must
/// share a level count across two spectra. `n` must not be below the count
/// [`thermalize`] would keep.
pub fn thermalize_with(spectrum: &Spectrum, temperature: f64, n: usize) -> Result<ThermalEnsemble> {
    let base = thermalize(spectrum, temperature)?;
    if n < base.n_kept || n > spectrum.len() {
        return Err(Error::invalid("n", "outside [n_kept, spectrum length]"));
    }
    let tail = if n < spectrum.len() {
        TAIL_SAFETY * math::exp(-(spectrum.energies[n] - spectrum.energies[0]) / temperature)
    } else {
        base.tail_bound
    };
    Ok(populate(spectrum, temperature, n, tail))
}

fn populate(spectrum: &Spectrum, t: f64, n: usize, tail_bound: f64) -> ThermalEnsemble {
    let e1 = spectrum.energies[0];
    let weights: Vec<f64> = spectrum.energies[..n].iter().map(|e| math::exp(-(e - e1) / t)).collect();
    let z: f64 = weights.iter().sum();
    ThermalEnsemble {
        spectrum: spectrum.clone(),
        temperature: t,
        populations: weights.iter().map(|w| w / z).collect(),
        z,
        n_kept: n,
        tail_bound,
    }
}

impl ThermalEnsemble {
    pub fn energies(&self) -> &[f64] {
        &self.spectrum.energies[..self.n_kept]
    }

    /// `sum P_n E_n` with absolute energies.
    pub fn mean_energy(&self) -> f64 {
        let e1 = self.spectrum.energies[0];
        e1 + self.energies().iter().zip(&self.populations).map(|(e, p)| p * (e - e1)).sum::<f64>()
    }

    /// Energy variance over `T^2`.
    pub fn heat_capacity(&self) -> f64 {
        let e1 = self.spectrum.energies[0];
        let mean = self.mean_energy() - e1;
        let var: f64 = self
            .energies()
            .iter()
            .zip(&self.populations)
            .map(|(e, p)| {
                let d = e - e1 - mean;
                p * d * d
            })
            .sum();
        var / (self.temperature * self.temperature)
    }
}

pub fn mean_energy(ens: &ThermalEnsemble) -> f64 {
    ens.mean_energy()
}

/// `C_v = (<E^2> - <E>^2) / T^2` of `spectrum` at `temperature`.
pub fn heat_capacity(spectrum: &Spectrum, temperature: f64) -> Result<f64> {
    Ok(thermalize(spectrum, temperature)?.heat_capacity())
}

/// Classical equilibrium energy `T/2 + <V>`, with `<V>` the Boltzmann average
/// of the potential over the confining region. A δ barrier has zero measure
/// and does not contribute.
pub fn classical_mean_energy(potential: &PotentialSpec, temperature: f64) -> Result<f64> {
    require_positive("temperature", temperature)?;
    let v_min = potential.minimum();
    // Integration range: the walls, or where V - V_min exceeds 60 T.
    let half = match potential.wall_half_width() {
        Some(h) => h,
        None => potential
            .outer_crossing(v_min + 60.0 * temperature)
            .ok_or_else(|| Error::invalid("potential", "not confining"))?,
    };
    let v = |x: f64| -> f64 {
        match potential.evaluate(x) {
            Ok(PotentialValue::Finite(v)) => v,
            // The δ site itself: the continuous part of the potential is zero there.
            Err(_) if matches!(potential.shape, Shape::SquareWellDelta { .. }) => 0.0,
            _ => f64::INFINITY,
        }
    };
    let weight = |x: f64| {
        let dv = v(x) - v_min;
        if dv.is_finite() {
            math::exp(-dv / temperature)
        } else {
            0.0
        }
    };
    let mut breaks = vec![-half];
    breaks.extend(potential.kinks().into_iter().filter(|&x| x > -half && x < half));
    breaks.push(half);
    let settings = QuadSettings::default();
    let z = quad::integrate(weight, &breaks, settings)?.value;
    let num = quad::integrate(|x| (v(x) - v_min) * weight(x), &breaks, QuadSettings {
        abs_tol: 1e-14 * z * temperature,
        ..settings
    })?
    .value;
    Ok(0.5 * temperature + v_min + num / z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{solve_harmonic, solve_square_well, Parity, Solver};
    use crate::units::UnitSystem;
    use core::f64::consts::LN_2;
    use proptest::prelude::*;

    const NAT: UnitSystem = UnitSystem::NATURAL;

    fn two_level(gap: f64) -> Spectrum {
        // Third level far away so that truncation keeps exactly two.
        let mut s = solve_harmonic(1.0, 3, NAT).unwrap();
        s.energies = vec![0.0, gap, 1e6];
        s.parities = vec![Parity::Even, Parity::Odd, Parity::Even];
        s.solver = Solver::Analytic;
        s
    }

    #[test]
    fn zero_temperature_limit() {
        let s = solve_square_well(2.0, 4, NAT).unwrap();
        let gap = s.gap().unwrap();
        let e = thermalize(&s, gap / 1000.0).unwrap();
        assert!((e.populations[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_populations_and_mean() {
        let s = two_level(1.0);
        let e = thermalize(&s, 1.0 / LN_2).unwrap();
        assert_eq!(e.n_kept, 2);
        assert!((e.populations[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.populations[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.mean_energy() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn schottky_anomaly() {
        let s = two_level(1.0);
        let c = heat_capacity(&s, 1.0).unwrap();
        let e = core::f64::consts::E;
        assert!((c - e / ((1.0 + e) * (1.0 + e))).abs() < 1e-14);
    }

    #[test]
    fn harmonic_mean_energy() {
        let s = solve_harmonic(1.0, 60, NAT).unwrap();
        let e = thermalize(&s, 1.0).unwrap();
        let want = 0.5 + 1.0 / (core::f64::consts::E - 1.0);
        assert!((e.mean_energy() - want).abs() < 1e-10);
        assert!((want - 1.081_977).abs() < 1e-6);
        // Equipartition at high temperature.
        let s = solve_harmonic(1.0, 4000, NAT).unwrap();
        assert!((heat_capacity(&s, 100.0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn truncation_error_reports_need() {
        let s = solve_square_well(2.0, 3, NAT).unwrap();
        match thermalize(&s, 100.0) {
            Err(Error::Truncation { available, needed, .. }) => {
                assert_eq!(available, 3);
                assert!(needed > 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn square_well_two_level_regime() {
        // Third-level weight at 1e-10 sets the temperature; only two levels carry more.
        let s = solve_square_well(2.0, 10, NAT).unwrap();
        let t = (s.energies[2] - s.energies[0]) / math::ln(1e10);
        let e = thermalize(&s, t).unwrap();
        assert!(e.populations[2] < 1.01e-10);
        assert!(t < s.gap().unwrap());
    }

    #[test]
    fn classical_square_well_is_equipartition() {
        let p = PotentialSpec::square_well(2.0, NAT).unwrap();
        assert!((classical_mean_energy(&p, 0.7).unwrap() - 0.35).abs() < 1e-14);
        let d = PotentialSpec::delta_well(2.0, 5.0, NAT).unwrap();
        assert!((classical_mean_energy(&d, 0.7).unwrap() - 0.35).abs() < 1e-14);
    }

    #[test]
    fn classical_finite_barrier() {
        let (l, t) = (2.0, 1.0);
        let (v0, eps) = (10.0 * t, l / 100.0);
        let p = PotentialSpec::finite_barrier(l, v0, eps, NAT).unwrap();
        let got = classical_mean_energy(&p, t).unwrap();
        let boltz = math::exp(-v0 / t);
        let f = eps / l;
        let exact = 0.5 * t + v0 * f * boltz / ((1.0 - f) + f * boltz);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
        let approx = 0.5 * t + v0 * f * boltz;
        assert!((got - approx).abs() / got < 5e-4);
        // Shrinking the barrier at fixed area: energy tends to T/2.
        let g = 0.5;
        let thin = PotentialSpec::finite_barrier(l, g / 1e-6, 1e-6, NAT).unwrap();
        assert!((classical_mean_energy(&thin, t).unwrap() - 0.5 * t).abs() < 1e-5);
    }

    #[test]
    fn classical_harmonic_equipartition() {
        let p = PotentialSpec::harmonic(2.0, NAT).unwrap();
        assert!((classical_mean_energy(&p, 0.3).unwrap() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn classical_ion_trap_low_temperature() {
        let p = PotentialSpec::ion_trap(1.0, 1.7, 1.0, NAT).unwrap();
        let t = 1e-5;
        let e = classical_mean_energy(&p, t).unwrap();
        // Harmonic about the minimum: T/2 + T/2 above V_min.
        assert!((e - p.minimum() - t).abs() < 1e-3 * t);
    }

    #[test]
    fn heat_capacity_matches_finite_difference() {
        let s = solve_square_well(2.0, 200, NAT).unwrap();
        for &t in &[0.5, 3.0, 20.0] {
            let h = t * 1e-4;
            let up = thermalize(&s, t + h).unwrap().mean_energy();
            let down = thermalize(&s, t - h).unwrap().mean_energy();
            let fd = (up - down) / (2.0 * h);
            let c = heat_capacity(&s, t).unwrap();
            assert!((fd - c).abs() < 1e-6 * c, "T={t}: {fd} vs {c}");
        }
    }

    proptest! {
        #[test]
        fn populations_are_normalized_and_ordered(t in 0.05f64..30.0) {
            let s = solve_square_well(1.3, 400, NAT).unwrap();
            let e = thermalize(&s, t).unwrap();
            let sum: f64 = e.populations.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(e.populations.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(e.tail_bound < TAIL_BOUND);
        }

        #[test]
        fn mean_energy_grows_with_temperature(t in 0.05f64..20.0, dt in 1e-3f64..5.0) {
            let s = solve_harmonic(0.7, 1500, NAT).unwrap();
            let a = thermalize(&s, t).unwrap().mean_energy();
            let b = thermalize(&s, t + dt).unwrap().mean_energy();
            prop_assert!(b >= a);
        }
    }
}
