//! Eigenenergies of one-dimensional potentials.
//!
//! Square wells and harmonic traps use closed forms, the δ-barrier well solves
//! its parity-resolved transcendental condition, and every other shape goes
//! through a sinc discrete variable representation on a finite interval with
//! hard walls at its ends (Colbert–Miller). Grids are refined until the
//! requested levels settle.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{require_positive, Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::math;
use crate::potentials::{PotentialSpec, PotentialValue, Shape};
use crate::quad::{self, QuadSettings};
use crate::units::UnitSystem;

/// Parity of an eigenfunction under `x -> -x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Which method produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Analytic,
    Transcendental,
    Dvr,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Analytic => "analytic",
            Solver::Transcendental => "transcendental",
            Solver::Dvr => "dvr",
        }
    }
}

/// Ordered eigenenergies and how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub parities: Vec<Parity>,
    pub solver: Solver,
    /// Solver accuracy bound on every returned energy.
    pub est_error: f64,
    pub units: UnitSystem,
    pub source: PotentialSpec,
    /// Grid interval and interior point count of a DVR solve.
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn ground(&self) -> f64 {
        self.energies[0]
    }

    /// `E_2 - E_1`, if there are two levels.
    pub fn gap(&self) -> Option<f64> {
        (self.energies.len() >= 2).then(|| self.energies[1] - self.energies[0])
    }

    /// The lowest `n` levels.
    pub fn truncated(&self, n: usize) -> Spectrum {
        let n = n.min(self.len());
        Spectrum {
            energies: self.energies[..n].to_vec(),
            parities: self.parities[..n].to_vec(),
            ..self.clone()
        }
    }
}

/// Accuracy targets and budgets for grid solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvrSettings {
    /// Levels are accepted once a grid refinement moves none of them by more
    /// than `rel_tol` times the energy scale of the requested window.
    pub rel_tol: f64,
    /// Largest interior point count tried before giving up.
    pub max_points: usize,
    /// Required WKB decay exponent between the top level's outer turning
    /// point and each soft domain boundary.
    pub boundary_decay: f64,
    /// Domain boundaries must also sit `thermal_margin * T` above the top level.
    pub thermal_margin: f64,
}

impl Default for DvrSettings {
    fn default() -> Self {
        DvrSettings {
            rel_tol: 1e-9,
            max_points: 1 << 15,
            boundary_decay: 18.0,
            thermal_margin: 25.0,
        }
    }
}

fn require_levels(n_levels: usize) -> Result<()> {
    if n_levels == 0 {
        Err(Error::invalid("n_levels", "must be >= 1"))
    } else {
        Ok(())
    }
}

fn alternating(n: usize) -> Vec<Parity> {
    (0..n).map(|k| if k % 2 == 0 { Parity::Even } else { Parity::Odd }).collect()
}

/// Infinite square well of width `length`: `E_n = n^2 pi^2 hbar^2 / (2 m L^2)`.
pub fn solve_square_well(length: f64, n_levels: usize, units: UnitSystem) -> Result<Spectrum> {
    require_levels(n_levels)?;
    let source = PotentialSpec::square_well(length, units)?;
    let e1 = units.kinetic_prefactor() * PI * PI / (length * length);
    let energies: Vec<f64> = (1..=n_levels).map(|n| (n * n) as f64 * e1).collect();
    Ok(Spectrum {
        est_error: 4.0 * f64::EPSILON * energies[n_levels - 1],
        parities: alternating(n_levels),
        energies,
        solver: Solver::Analytic,
        units,
        source,
        grid: None,
    })
}

/// Harmonic oscillator: `E_k = hbar omega (k + 1/2)`.
pub fn solve_harmonic(omega: f64, n_levels: usize, units: UnitSystem) -> Result<Spectrum> {
    require_levels(n_levels)?;
    let source = PotentialSpec::harmonic(omega, units)?;
    let quantum = units.hbar * omega;
    let energies: Vec<f64> = (0..n_levels).map(|k| quantum * (k as f64 + 0.5)).collect();
    Ok(Spectrum {
        est_error: 4.0 * f64::EPSILON * energies[n_levels - 1],
        parities: alternating(n_levels),
        energies,
        solver: Solver::Analytic,
        units,
        source,
        grid: None,
    })
}

const ROOT_REL_TOL: f64 = 1e-13;

/// Bisection on a bracket whose endpoints have opposite signs, then two
/// Newton steps that are kept only if they stay inside the final bracket.
fn bracketed_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (a, b) = (lo, hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::RootFinder {
            lo: a,
            hi: b,
            residual: f_lo.abs().min(f_hi.abs()),
            reason: "no sign change in bracket",
        });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..2000 {
        if hi - lo <= ROOT_REL_TOL * hi.abs().max(lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = df(z);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = z - f(z) / d;
        if next >= lo && next <= hi {
            z = next;
        }
    }
    let scale = 1.0 + z.abs();
    if !(z.is_finite() && f(z).abs() <= 1e-6 * scale * (1.0 + f_lo.abs().max(f_hi.abs()))) {
        return Err(Error::RootFinder {
            lo: a,
            hi: b,
            residual: f(z).abs(),
            reason: "bisection stalled",
        });
    }
    Ok(z)
}

/// Infinite square well of width `length` with a central barrier `strength * delta(x)`.
///
/// Odd levels do not feel the barrier and keep their bare values. Even levels
/// solve `gamma sin z + z cos z = 0` with `z = k L / 2` and
/// `gamma = m g L / (2 hbar^2)`; for `gamma < -1` the lowest even state is
/// bound, `w + gamma tanh w = 0` with `E = -2 hbar^2 w^2 / (m L^2)`.
pub fn solve_delta_well(length: f64, strength: f64, n_levels: usize, units: UnitSystem) -> Result<Spectrum> {
    require_levels(n_levels)?;
    let source = PotentialSpec::delta_well(length, strength, units)?;
    let gamma = units.mass * strength * length / (2.0 * units.hbar * units.hbar);
    // E = scale * z^2.
    let scale = 2.0 * units.hbar * units.hbar / (units.mass * length * length);
    let n_even = n_levels.div_ceil(2);
    let n_odd = n_levels / 2;

    let f = |z: f64| gamma * math::sin(z) + z * math::cos(z);
    let df = |z: f64| (gamma + 1.0) * math::cos(z) - z * math::sin(z);
    let mut even = Vec::with_capacity(n_even);
    for j in 0..n_even {
        let jf = j as f64;
        let energy = if gamma == 0.0 {
            let z = (jf + 0.5) * PI;
            scale * z * z
        } else if gamma > 0.0 {
            let z = bracketed_root(f, df, (jf + 0.5) * PI, (jf + 1.0) * PI)?;
            scale * z * z
        } else if j > 0 {
            let z = bracketed_root(f, df, jf * PI, (jf + 0.5) * PI)?;
            scale * z * z
        } else if gamma > -1.0 {
            // z = 0 is a trivial root of the even condition; stay above it.
            let z = bracketed_root(f, df, f64::MIN_POSITIVE, 0.5 * PI)?;
            scale * z * z
        } else if gamma == -1.0 {
            0.0
        } else {
            let h = |w: f64| w + gamma * math::tanh(w);
            let dh = |w: f64| {
                let t = math::tanh(w);
                1.0 + gamma * (1.0 - t * t)
            };
            let w = bracketed_root(h, dh, f64::MIN_POSITIVE, -gamma)?;
            -scale * w * w
        };
        even.push(energy);
    }
    let mut energies = Vec::with_capacity(n_levels);
    let mut parities = Vec::with_capacity(n_levels);
    for k in 0..n_levels {
        if k % 2 == 0 {
            energies.push(even[k / 2]);
            parities.push(Parity::Even);
        } else {
            let z = ((k / 2 + 1) as f64) * PI;
            energies.push(scale * z * z);
            parities.push(Parity::Odd);
        }
    }
    debug_assert_eq!(energies.len(), n_even + n_odd);
    let top = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(Spectrum {
        energies,
        parities,
        solver: if gamma == 0.0 { Solver::Analytic } else { Solver::Transcendental },
        est_error: 4.0 * ROOT_REL_TOL * top,
        units,
        source,
        grid: None,
    })
}

// ---------------------------------------------------------------------------
// Sinc DVR

/// Samples the potential on the interior points of a grid, walls becoming `None`.
fn sample(potential: &PotentialSpec, x_min: f64, x_max: f64, n_intervals: usize) -> Result<Vec<f64>> {
    let h = (x_max - x_min) / n_intervals as f64;
    (1..n_intervals)
        .map(|i| {
            let x = x_min + h * i as f64;
            match potential.evaluate(x)? {
                PotentialValue::Finite(v) => Ok(v),
                PotentialValue::Wall => Err(Error::invalid(
                    "domain",
                    alloc::format!("grid point x = {x} lies beyond a hard wall"),
                )),
            }
        })
        .collect()
}

/// `1 / sin^2(pi k / (2N))` for `k = 0..2N` (entry 0 unused).
fn inverse_sin2(n_intervals: usize) -> Vec<f64> {
    let two_n = 2 * n_intervals;
    (0..two_n)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                let s = math::sin(PI * k as f64 / two_n as f64);
                1.0 / (s * s)
            }
        })
        .collect()
}

/// Kinetic matrix element between interior points `i` and `j` (1-based).
#[inline]
fn kinetic(c: f64, n_intervals: usize, inv: &[f64], i: usize, j: usize) -> f64 {
    if i == j {
        let nn = n_intervals as f64;
        c * ((2.0 * nn * nn + 1.0) / 3.0 - inv[2 * i])
    } else {
        let d = i.abs_diff(j);
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        c * sign * (inv[d] - inv[i + j])
    }
}

/// Eigenvalues of one grid, split into parity blocks when the domain is symmetric.
fn dvr_eigenvalues(
    potential: &PotentialSpec,
    x_min: f64,
    x_max: f64,
    n_points: usize,
    symmetric: bool,
) -> Result<Vec<(f64, Parity)>> {
    let n = n_points + 1;
    let v = sample(potential, x_min, x_max, n)?;
    let len = x_max - x_min;
    let c = potential.units.kinetic_prefactor() * PI * PI / (len * len) / 2.0;
    let inv = inverse_sin2(n);
    let h = |i: usize, j: usize| kinetic(c, n, &inv, i, j) + if i == j { v[i - 1] } else { 0.0 };

    if !symmetric {
        let mut m = SymmetricMatrix::zeros(n_points);
        for i in 1..=n_points {
            for j in 1..=i {
                m.set(i - 1, j - 1, h(i, j));
            }
        }
        return Ok(m.eigenvalues().into_iter().map(|e| (e, Parity::None)).collect());
    }

    // Mirror pairs (i, N - i) for i < N/2, plus the centre point when N is even.
    let pairs = (n - 1) / 2;
    let centre = (n % 2 == 0).then_some(n / 2);
    let even_dim = pairs + centre.is_some() as usize;
    let mut even = SymmetricMatrix::zeros(even_dim);
    let mut odd = SymmetricMatrix::zeros(pairs);
    for i in 1..=pairs {
        for j in 1..=i {
            let direct = h(i, j);
            let mirror = h(i, n - j);
            even.set(i - 1, j - 1, direct + mirror);
            odd.set(i - 1, j - 1, direct - mirror);
        }
    }
    if let Some(ci) = centre {
        for j in 1..=pairs {
            even.set(pairs, j - 1, core::f64::consts::SQRT_2 * h(ci, j));
        }
        even.set(pairs, pairs, h(ci, ci));
    }
    let mut levels: Vec<(f64, Parity)> = even.eigenvalues().into_iter().map(|e| (e, Parity::Even)).collect();
    levels.extend(odd.eigenvalues().into_iter().map(|e| (e, Parity::Odd)));
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(levels)
}

/// WKB decay exponent `int sqrt(2m(V - E))/hbar dx` from the outer turning
/// point of `energy` to the boundary `x_b` (searched on the side of `x_b`).
fn boundary_decay(potential: &PotentialSpec, energy: f64, x_b: f64, toward: f64) -> Result<f64> {
    let v = |x: f64| match potential.evaluate(x) {
        Ok(PotentialValue::Finite(v)) => v,
        _ => f64::INFINITY,
    };
    if v(x_b) <= energy {
        return Ok(0.0);
    }
    // Walk inward from the boundary until the level is classically allowed.
    let steps = 400;
    let dx = (toward - x_b) / steps as f64;
    let mut inside = None;
    for k in 1..=steps {
        let x = x_b + dx * k as f64;
        if v(x) <= energy {
            inside = Some(x);
            break;
        }
    }
    let Some(mut a) = inside else {
        // Forbidden over the whole half-domain; integrate all of it.
        return integrate_decay(potential, energy, toward, x_b);
    };
    let mut b = a - dx;
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if v(mid) <= energy {
            a = mid;
        } else {
            b = mid;
        }
    }
    integrate_decay(potential, energy, a, x_b)
}

fn integrate_decay(potential: &PotentialSpec, energy: f64, from: f64, to: f64) -> Result<f64> {
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let k = 2.0 * potential.units.mass;
    let hbar = potential.units.hbar;
    let f = |x: f64| match potential.evaluate(x) {
        Ok(PotentialValue::Finite(v)) if v > energy => math::sqrt(k * (v - energy)) / hbar,
        _ => 0.0,
    };
    let mut breaks = vec![lo];
    breaks.extend(potential.kinks().into_iter().filter(|&x| x > lo && x < hi));
    breaks.push(hi);
    let settings = QuadSettings {
        rel_tol: 1e-6,
        abs_tol: 1e-9,
        max_intervals: 4000,
    };
    Ok(quad::integrate(f, &breaks, settings)?.value)
}

/// Domain clipped to the hard walls of the potential, with a flag per side
/// telling whether that side is a wall (exact) or a soft cut.
fn effective_domain(potential: &PotentialSpec, x_min: f64, x_max: f64) -> (f64, f64, bool, bool) {
    match potential.wall_half_width() {
        Some(h) => {
            let lo = x_min.max(-h);
            let hi = x_max.min(h);
            (lo, hi, lo == -h, hi == h)
        }
        None => (x_min, x_max, false, false),
    }
}

/// Next interior point count. For a potential that is smooth inside the
/// domain convergence is exponential in the grid spacing once the top level is
/// resolved, so a quarter more intervals suffices for the change between
/// consecutive grids to bound the error of the finer one. Interior kinks only
/// give algebraic convergence and get a doubled grid.
fn refine(points: usize, smooth: bool) -> usize {
    if smooth {
        (5 * (points + 1)).div_ceil(4) - 1
    } else {
        2 * (points + 1) - 1
    }
}

/// Sinc-DVR solve on `[x_min, x_max]` starting from `n_points` interior points
/// and refining the grid by a quarter until the lowest `n_levels` converge.
///
/// Hard walls of the potential clip the domain. Soft boundaries must lie far
/// enough in the classically forbidden region of the highest level, otherwise
/// [`Error::DomainTooSmall`] is returned.
pub fn solve_dvr(
    potential: &PotentialSpec,
    domain: (f64, f64),
    n_points: usize,
    n_levels: usize,
    settings: &DvrSettings,
) -> Result<Spectrum> {
    require_levels(n_levels)?;
    let (x_min, x_max) = domain;
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(Error::invalid("domain", "need finite x_min < x_max"));
    }
    if let Shape::SquareWellDelta { .. } = potential.shape {
        return Err(Error::invalid(
            "potential",
            "a delta barrier cannot be represented on a grid; use solve_delta_well",
        ));
    }
    if n_points < 4 * n_levels {
        return Err(Error::invalid("n_points", "must be >= 4 * n_levels"));
    }
    require_positive("rel_tol", settings.rel_tol)?;
    if n_points > settings.max_points {
        return Err(Error::Accuracy {
            change: f64::INFINITY,
            points: n_points,
            limit: settings.max_points,
        });
    }
    let (lo, hi, wall_lo, wall_hi) = effective_domain(potential, x_min, x_max);
    if lo >= hi {
        return Err(Error::invalid("domain", "does not overlap the well"));
    }
    let symmetric = (lo + hi).abs() <= 1e-12 * (hi - lo);
    let smooth = potential.kinks().iter().all(|&k| k <= lo || k >= hi);

    let mut points = n_points;
    let mut previous: Option<Vec<(f64, Parity)>> = None;
    loop {
        let mut levels = dvr_eigenvalues(potential, lo, hi, points, symmetric)?;
        if levels.len() < n_levels {
            return Err(Error::invalid("n_points", "grid has fewer points than requested levels"));
        }
        levels.truncate(n_levels);
        if let Some(prev) = &previous {
            let e1 = levels[0].0;
            let top = levels[n_levels - 1].0;
            let window = levels.iter().fold(top - e1, |m, l| m.max(l.0.abs()));
            let change = levels
                .iter()
                .zip(prev)
                .fold(0.0f64, |m, (a, b)| m.max((a.0 - b.0).abs()));
            if change <= settings.rel_tol * window {
                for (side, is_wall, toward) in [(lo, wall_lo, hi), (hi, wall_hi, lo)] {
                    if is_wall {
                        continue;
                    }
                    let decay = boundary_decay(potential, top, side, toward)?;
                    if decay < settings.boundary_decay {
                        return Err(Error::DomainTooSmall {
                            x_min: lo,
                            x_max: hi,
                            level: n_levels,
                            decay,
                            required: settings.boundary_decay,
                        });
                    }
                }
                return Ok(Spectrum {
                    energies: levels.iter().map(|l| l.0).collect(),
                    parities: levels.iter().map(|l| l.1).collect(),
                    solver: Solver::Dvr,
                    est_error: change,
                    units: potential.units,
                    source: *potential,
                    grid: Some(Grid {
                        x_min: lo,
                        x_max: hi,
                        points,
                    }),
                });
            }
            if refine(points, smooth) > settings.max_points {
                return Err(Error::Accuracy {
                    change: change / window,
                    points,
                    limit: settings.max_points,
                });
            }
        }
        previous = Some(levels);
        points = refine(points, smooth);
        if points > settings.max_points {
            return Err(Error::Accuracy {
                change: f64::INFINITY,
                points,
                limit: settings.max_points,
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Automatic drivers

/// Semiclassical level count below `energy`: `S(E)/(pi hbar) + 1/2`.
fn wkb_count(potential: &PotentialSpec, energy: f64, half_width: f64) -> Result<f64> {
    let k = 2.0 * potential.units.mass;
    let f = |x: f64| match potential.evaluate(x) {
        Ok(PotentialValue::Finite(v)) if v < energy => math::sqrt(k * (energy - v)),
        _ => 0.0,
    };
    let mut breaks = vec![0.0];
    breaks.extend(potential.kinks().into_iter().filter(|&x| x > 0.0 && x < half_width));
    breaks.push(half_width);
    let settings = QuadSettings {
        rel_tol: 1e-6,
        abs_tol: 1e-12,
        max_intervals: 4000,
    };
    let action = 2.0 * quad::integrate(f, &breaks, settings)?.value;
    Ok(action / (PI * potential.units.hbar) + 0.5)
}

/// Half-width beyond which `V >= energy`, for wall-free shapes.
fn turning_half_width(potential: &PotentialSpec, energy: f64) -> Result<f64> {
    match potential.wall_half_width() {
        Some(h) => Ok(h),
        None => potential
            .outer_crossing(energy)
            .ok_or_else(|| Error::invalid("potential", "not confining at this energy")),
    }
}

/// Energy below which about `n` levels lie, by inverting the WKB count.
fn wkb_energy(potential: &PotentialSpec, n: f64) -> Result<f64> {
    let v_min = potential.minimum();
    let mut lo = v_min;
    let mut step = match potential.shape {
        Shape::Harmonic { omega } | Shape::IonTrap { omega, .. } => potential.units.hbar * omega,
        _ => {
            let h = potential.wall_half_width().unwrap_or(1.0);
            potential.units.kinetic_prefactor() * PI * PI / (4.0 * h * h)
        }
    };
    let count = |e: f64| -> Result<f64> { wkb_count(potential, e, turning_half_width(potential, e)?) };
    let mut hi = v_min + step;
    while count(hi)? < n {
        lo = hi;
        step *= 2.0;
        hi = v_min + step;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if count(mid)? < n {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 * (hi - v_min) {
            break;
        }
    }
    Ok(hi)
}

/// Chooses a symmetric domain and a starting grid for the lowest `n_levels`
/// levels, then runs [`solve_dvr`], widening the domain if the solve reports
/// the boundaries too close.
fn auto_dvr(
    potential: &PotentialSpec,
    n_levels: usize,
    temperature: f64,
    settings: &DvrSettings,
) -> Result<Spectrum> {
    let margin = settings.thermal_margin * temperature;
    // Aim a little above the count so the top requested level is covered.
    let mut e_top = wkb_energy(potential, n_levels as f64 + 1.0)?;
    for _ in 0..8 {
        let edge = e_top + margin;
        let mut half = turning_half_width(potential, edge)?;
        if potential.wall_half_width().is_none() {
            let target = 1.15 * settings.boundary_decay;
            while boundary_decay(potential, e_top, half, 0.0)? < target {
                half *= 1.1;
            }
        }
        let p_max = math::sqrt(2.0 * potential.units.mass * (edge - potential.minimum()).max(0.0));
        let nyquist = math::ceil(1.5 * 2.0 * half * p_max / (PI * potential.units.hbar)) as usize;
        let start = nyquist.max(4 * n_levels).max(16);
        match solve_dvr(potential, (-half, half), start, n_levels, settings) {
            Ok(s) => return Ok(s),
            Err(Error::DomainTooSmall { .. }) => {
                // The estimate of the top level was low; retry above it.
                e_top = potential.minimum() + 1.5 * (e_top - potential.minimum());
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::invalid("domain", "automatic domain selection did not settle"))
}

/// Lowest `n_levels` levels of any potential with the preferred solver for its
/// shape (closed form, transcendental, or DVR on an automatically sized domain).
pub fn solve(potential: &PotentialSpec, n_levels: usize, settings: &DvrSettings) -> Result<Spectrum> {
    solve_with_margin(potential, n_levels, 0.0, settings)
}

fn solve_with_margin(
    potential: &PotentialSpec,
    n_levels: usize,
    temperature: f64,
    settings: &DvrSettings,
) -> Result<Spectrum> {
    let units = potential.units;
    match potential.shape {
        Shape::SquareWell { length } => solve_square_well(length, n_levels, units),
        Shape::SquareWellDelta { length, strength } => solve_delta_well(length, strength, n_levels, units),
        Shape::Harmonic { omega } => solve_harmonic(omega, n_levels, units),
        Shape::SquareWellFiniteBarrier { length, .. } => {
            let half = 0.5 * length;
            let p_max = {
                let e = wkb_energy(potential, n_levels as f64 + 1.0)?;
                math::sqrt(2.0 * units.mass * e.max(0.0))
            };
            let start = (math::ceil(1.5 * length * p_max / (PI * units.hbar)) as usize).max(4 * n_levels);
            solve_dvr(potential, (-half, half), start, n_levels, settings)
        }
        // Without the lattice the trap is exactly harmonic.
        Shape::IonTrap { omega, kappa: 0.0, .. } => {
            let mut s = solve_harmonic(omega, n_levels, units)?;
            s.source = *potential;
            Ok(s)
        }
        Shape::IonTrap { .. } => auto_dvr(potential, n_levels, temperature, settings),
    }
}

/// `E - E_1` beyond which a level no longer needs to be carried at temperature
/// `T`: `100 exp(-(E - E_1)/T) < 1e-10`.
pub fn thermal_cutoff(temperature: f64) -> f64 {
    temperature * math::ln(1e12)
}

/// Number of levels that must be solved for so the first dropped level of
/// `spectrum` lies beyond the thermal cutoff, or `None` if it already does.
pub(crate) fn missing_levels(spectrum: &Spectrum, temperature: f64) -> Option<usize> {
    let cut = thermal_cutoff(temperature);
    let e1 = spectrum.ground();
    if spectrum.energies.iter().any(|&e| e - e1 > cut) {
        None
    } else {
        Some(spectrum.len())
    }
}

/// Spectrum with at least `min_levels` levels and enough levels above them to
/// make the thermal tail at `temperature` negligible (see [`thermal_cutoff`]).
pub fn solve_thermal(
    potential: &PotentialSpec,
    temperature: f64,
    min_levels: usize,
    settings: &DvrSettings,
) -> Result<Spectrum> {
    require_positive("temperature", temperature)?;
    let min_levels = min_levels.max(2);
    // First guess from the semiclassical count at the cutoff energy.
    let e1 = wkb_energy(potential, 1.0)?;
    let guess = {
        let target = e1 + thermal_cutoff(temperature);
        let half = match potential.shape {
            Shape::SquareWellDelta { .. } => potential.wall_half_width().unwrap_or(1.0),
            _ => turning_half_width(potential, target)?,
        };
        math::ceil(wkb_count(potential, target, half)?) as usize + 2
    };
    let mut n = guess.max(min_levels);
    for _ in 0..40 {
        let spectrum = solve_with_margin(potential, n, temperature, settings)?;
        match missing_levels(&spectrum, temperature) {
            None => return Ok(spectrum),
            Some(have) => n = have + have / 4 + 2,
        }
    }
    Err(Error::Truncation {
        available: n,
        needed: n + 1,
        temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NAT: UnitSystem = UnitSystem::NATURAL;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn square_well_closed_form() {
        let s = solve_square_well(2.0, 2, NAT).unwrap();
        assert!((s.energies[0] - PI * PI / 8.0).abs() < 1e-15);
        assert!((s.energies[1] - PI * PI / 2.0).abs() < 1e-14);
        assert!((s.gap().unwrap() - 3.0 * PI * PI / 8.0).abs() < 1e-14);
        assert_eq!(s.parities, vec![Parity::Even, Parity::Odd]);
        let half = solve_square_well(1.0, 2, NAT).unwrap();
        for (a, b) in half.energies.iter().zip(&s.energies) {
            assert!(rel(*a, 4.0 * b) < 1e-15);
        }
    }

    #[test]
    fn lattice_free_trap_is_harmonic() {
        let p = PotentialSpec::ion_trap(1.0, 0.0, 20.0, NAT).unwrap();
        let s = solve(&p, 4, &DvrSettings::default()).unwrap();
        assert_eq!(s.energies, vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(s.source, p);
        let dvr = auto_dvr(&p, 4, 0.0, &DvrSettings::default()).unwrap();
        for (a, b) in dvr.energies.iter().zip(&s.energies) {
            assert!(rel(*a, *b) < 1e-8);
        }
    }

    #[test]
    fn harmonic_closed_form() {
        let s = solve_harmonic(1.0, 3, NAT).unwrap();
        assert_eq!(s.energies, vec![0.5, 1.5, 2.5]);
        let q = solve_harmonic(3.0, 3, NAT).unwrap();
        for (a, b) in q.energies.iter().zip(&s.energies) {
            assert!(rel(*a, 3.0 * b) < 1e-15);
        }
    }

    #[test]
    fn rejects_zero_levels() {
        assert!(solve_square_well(1.0, 0, NAT).is_err());
        assert!(solve_delta_well(1.0, 1.0, 0, NAT).is_err());
    }

    #[test]
    fn delta_well_without_barrier_is_bare() {
        let d = solve_delta_well(2.0, 0.0, 9, NAT).unwrap();
        let b = solve_square_well(2.0, 9, NAT).unwrap();
        for (x, y) in d.energies.iter().zip(&b.energies) {
            assert!(rel(*x, *y) < 1e-14);
        }
    }

    #[test]
    fn delta_well_strong_barrier_pairs_levels() {
        let d = solve_delta_well(2.0, 1e6, 6, NAT).unwrap();
        for k in 0..3 {
            assert!(rel(d.energies[2 * k], d.energies[2 * k + 1]) < 1e-5);
        }
        assert!(d.energies[0] < d.energies[1]);
    }

    /// The even condition written as tan(z) = -z/gamma, checked directly.
    #[test]
    fn delta_well_roots_satisfy_tangent_form() {
        for &g in &[0.3, 1.0, 7.0, -0.5, -0.99] {
            let d = solve_delta_well(2.0, g, 7, NAT).unwrap();
            let gamma = g; // m g L / (2 hbar^2) with L = 2
            for k in (0..7).step_by(2) {
                let z = math::sqrt(d.energies[k] / 0.5);
                assert!(z > 0.1, "g={g} k={k}: trivial root");
                let resid = math::sin(z) / math::cos(z) + z / gamma;
                assert!(resid.abs() < 1e-8 * (1.0 + z / gamma.abs()), "g={g} k={k} resid={resid}");
            }
        }
    }

    #[test]
    fn delta_well_bound_state() {
        // gamma = -2: w + gamma tanh w = 0 gives w ~ 1.915008.
        let d = solve_delta_well(2.0, -2.0, 3, NAT).unwrap();
        let w = math::sqrt(-d.energies[0] / 0.5);
        assert!((w - 2.0 * math::tanh(w)).abs() < 1e-12);
        assert!(d.energies[0] < 0.0 && d.energies[1] > 0.0);
        let edge = solve_delta_well(2.0, -1.0, 1, NAT).unwrap();
        assert_eq!(edge.energies[0], 0.0);
    }

    #[test]
    fn dvr_square_well_matches_closed_form() {
        let p = PotentialSpec::square_well(2.0, NAT).unwrap();
        let s = solve_dvr(&p, (-1.0, 1.0), 40, 8, &DvrSettings::default()).unwrap();
        let exact = solve_square_well(2.0, 8, NAT).unwrap();
        for (a, b) in s.energies.iter().zip(&exact.energies) {
            assert!((a - b).abs() <= s.est_error.max(1e-11 * b), "{a} vs {b}");
        }
        assert_eq!(s.parities[..4], [Parity::Even, Parity::Odd, Parity::Even, Parity::Odd]);
    }

    #[test]
    fn dvr_harmonic_ground_state() {
        let p = PotentialSpec::harmonic(1.0, NAT).unwrap();
        let s = solve_dvr(&p, (-10.0, 10.0), 200, 10, &DvrSettings::default()).unwrap();
        assert!((s.energies[0] - 0.5).abs() < 1e-8);
        for (k, e) in s.energies.iter().enumerate() {
            assert!(rel(*e, k as f64 + 0.5) < 1e-8, "{k}: {e}");
        }
    }

    #[test]
    fn dvr_asymmetric_domain_has_no_parity() {
        let p = PotentialSpec::harmonic(1.0, NAT).unwrap();
        let s = solve_dvr(&p, (-10.0, 11.0), 200, 4, &DvrSettings::default()).unwrap();
        assert!(s.parities.iter().all(|&q| q == Parity::None));
        assert!((s.energies[3] - 3.5).abs() < 1e-8);
    }

    #[test]
    fn dvr_reports_small_domain() {
        let p = PotentialSpec::harmonic(1.0, NAT).unwrap();
        let err = solve_dvr(&p, (-3.0, 3.0), 80, 10, &DvrSettings::default()).unwrap_err();
        assert!(matches!(err, Error::DomainTooSmall { .. }), "{err:?}");
    }

    #[test]
    fn dvr_refuses_delta() {
        let p = PotentialSpec::delta_well(2.0, 1.0, NAT).unwrap();
        assert!(solve_dvr(&p, (-1.0, 1.0), 40, 2, &DvrSettings::default()).is_err());
    }

    #[test]
    fn ion_trap_double_well_has_tunnelling_doublet() {
        // m omega^2 a^2 = 400: the central barrier is high compared with hbar omega.
        let p = PotentialSpec::ion_trap(1.0, 1.7, 20.0, NAT).unwrap();
        let s = solve(&p, 4, &DvrSettings::default()).unwrap();
        let split = s.energies[1] - s.energies[0];
        let next = s.energies[2] - s.energies[1];
        assert!(split < 0.2 * next, "split {split}, next {next}");
        let barrier_top = p.evaluate(0.0).unwrap().finite().unwrap();
        assert!(s.energies[1] < barrier_top);
        assert_eq!(s.parities[0], Parity::Even);
        assert_eq!(s.parities[1], Parity::Odd);
    }

    #[test]
    fn thermal_solve_covers_tail() {
        let p = PotentialSpec::harmonic(1.0, NAT).unwrap();
        let s = solve_thermal(&p, 2.0, 1, &DvrSettings::default()).unwrap();
        let top = s.energies[s.len() - 1] - s.energies[0];
        assert!(top > thermal_cutoff(2.0));
        let w = PotentialSpec::square_well(2.0, NAT).unwrap();
        let s = solve_thermal(&w, 50.0, 1, &DvrSettings::default()).unwrap();
        assert!(s.energies[s.len() - 1] - s.energies[0] > thermal_cutoff(50.0));
    }
}
