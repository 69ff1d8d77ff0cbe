//! The four-stroke Otto cycle between a hot and a cold potential.
//!
//! Sign convention: positive work or heat is energy flowing into the working
//! medium. Levels of the two spectra are paired by sorted index, since the
//! adiabatic strokes preserve populations level by level.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{require_positive, Error, Result};
use crate::math;
use crate::potentials::{PotentialSpec, Shape};
use crate::quad::{self, QuadSettings};
use crate::spectrum::{self, DvrSettings, Spectrum};
use crate::thermo::{self, levels_needed};

/// Relative tolerance separating zero from nonzero energy flows.
pub const MODE_TOL: f64 = 1e-12;

/// Operating mode from the signs of W, Q_h and Q_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Work out, heat in from the hot bath.
    Engine,
    /// Work in, heat out of the cold bath.
    Refrigerator,
    /// Heat leaks hot to cold and no work is extracted.
    Broken,
    /// Work in, heat dumped into both baths.
    Dissipator,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Engine => "Engine",
            Mode::Refrigerator => "Refrigerator",
            Mode::Broken => "Broken",
            Mode::Dissipator => "Dissipator",
        }
    }
}

/// Classifies a cycle. Values within `MODE_TOL` of the largest magnitude count
/// as zero, and such boundary cases fall to the non-engine side.
pub fn classify(work: f64, heat_hot: f64, heat_cold: f64) -> Mode {
    let tol = MODE_TOL * work.abs().max(heat_hot.abs()).max(heat_cold.abs());
    if work < -tol && heat_hot > tol {
        Mode::Engine
    } else if work > tol && heat_cold > tol {
        Mode::Refrigerator
    } else if work > tol && heat_hot < -tol && heat_cold < -tol {
        Mode::Dissipator
    } else {
        Mode::Broken
    }
}

/// Contribution of one level pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelContribution {
    /// 1-based level index.
    pub n: usize,
    pub energy_hot: f64,
    pub energy_cold: f64,
    pub population_hot: f64,
    pub population_cold: f64,
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
}

/// Energy flows of one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleResult {
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub eta_engine: Option<f64>,
    pub eta_refrigerator: Option<f64>,
    pub mode: Mode,
    pub per_level: Vec<LevelContribution>,
    /// `-Q_h/T_h - Q_c/T_c`.
    pub entropy_production: f64,
    pub t_hot: f64,
    pub t_cold: f64,
}

impl CycleResult {
    fn from_totals(work: f64, heat_hot: f64, heat_cold: f64, t_hot: f64, t_cold: f64) -> Self {
        let mode = classify(work, heat_hot, heat_cold);
        CycleResult {
            work,
            heat_hot,
            heat_cold,
            eta_engine: (mode == Mode::Engine).then(|| -work / heat_hot),
            eta_refrigerator: (mode == Mode::Refrigerator).then(|| heat_cold / work),
            mode,
            per_level: Vec::new(),
            entropy_production: -heat_hot / t_hot - heat_cold / t_cold,
            t_hot,
            t_cold,
        }
    }

    pub fn eta_carnot(&self) -> f64 {
        1.0 - self.t_cold / self.t_hot
    }

    /// Largest of |W|, |Q_h|, |Q_c|.
    pub fn scale(&self) -> f64 {
        self.work.abs().max(self.heat_hot.abs()).max(self.heat_cold.abs())
    }

    /// `|W + Q_h + Q_c|`.
    pub fn energy_residual(&self) -> f64 {
        (self.work + self.heat_hot + self.heat_cold).abs()
    }

    /// The efficiency matching the mode, if any.
    pub fn efficiency(&self) -> Option<f64> {
        self.eta_engine.or(self.eta_refrigerator)
    }

    /// Engine efficiency over Carnot, or refrigerator COP over the Carnot COP.
    pub fn eta_over_carnot(&self) -> Option<f64> {
        match self.mode {
            Mode::Engine => self.eta_engine.map(|e| e / self.eta_carnot()),
            Mode::Refrigerator => self
                .eta_refrigerator
                .map(|c| c / (self.t_cold / (self.t_hot - self.t_cold))),
            _ => None,
        }
    }
}

fn check_temperatures(t_hot: f64, t_cold: f64) -> Result<()> {
    require_positive("t_hot", t_hot)?;
    require_positive("t_cold", t_cold)?;
    if t_hot <= t_cold {
        return Err(Error::invalid("t_hot", alloc::format!("must exceed t_cold ({t_hot} <= {t_cold})")));
    }
    Ok(())
}

/// Otto cycle from two spectra. Both must carry enough levels for the thermal
/// tail at their bath, and the cycle uses the larger of the two counts.
pub fn run_otto(spec_h: &Spectrum, spec_c: &Spectrum, t_hot: f64, t_cold: f64) -> Result<CycleResult> {
    check_temperatures(t_hot, t_cold)?;
    if spec_h.is_empty() || spec_c.is_empty() {
        return Err(Error::invalid("spectrum", "empty"));
    }
    let (n_h, _) = levels_needed(&spec_h.energies, t_hot)?;
    let (n_c, _) = levels_needed(&spec_c.energies, t_cold)?;
    let n = n_h.max(n_c);
    let short = spec_h.len().min(spec_c.len());
    if short < n {
        return Err(Error::Truncation {
            available: short,
            needed: n,
            temperature: if spec_h.len() < n { t_hot } else { t_cold },
        });
    }
    let hot = thermo::thermalize_with(spec_h, t_hot, n)?;
    let cold = thermo::thermalize_with(spec_c, t_cold, n)?;
    Ok(cycle_from_levels(
        &spec_h.energies[..n],
        &spec_c.energies[..n],
        &hot.populations,
        &cold.populations,
        t_hot,
        t_cold,
    ))
}

/// Otto cycle over explicit level lists without truncation, e.g. for model spectra.
pub fn run_otto_levels(e_hot: &[f64], e_cold: &[f64], t_hot: f64, t_cold: f64) -> Result<CycleResult> {
    check_temperatures(t_hot, t_cold)?;
    if e_hot.is_empty() || e_hot.len() != e_cold.len() {
        return Err(Error::invalid("levels", "need equal, nonzero level counts"));
    }
    let pops = |e: &[f64], t: f64| -> Vec<f64> {
        let e1 = e.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = e.iter().map(|x| math::exp(-(x - e1) / t)).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    };
    let p_h = pops(e_hot, t_hot);
    let p_c = pops(e_cold, t_cold);
    Ok(cycle_from_levels(e_hot, e_cold, &p_h, &p_c, t_hot, t_cold))
}

fn cycle_from_levels(e_h: &[f64], e_c: &[f64], p_h: &[f64], p_c: &[f64], t_hot: f64, t_cold: f64) -> CycleResult {
    // Totals use energies relative to the first level of each spectrum; the
    // offsets multiply sum(P_h - P_c) = 0 and only add rounding noise.
    let (o_h, o_c) = (e_h[0], e_c[0]);
    let (mut q_h, mut q_c, mut w) = (0.0f64, 0.0f64, 0.0f64);
    let mut per_level = Vec::with_capacity(e_h.len());
    for k in 0..e_h.len() {
        let dp = p_h[k] - p_c[k];
        let (rh, rc) = (e_h[k] - o_h, e_c[k] - o_c);
        q_h += rh * dp;
        q_c -= rc * dp;
        w += (rc - rh) * dp;
        per_level.push(LevelContribution {
            n: k + 1,
            energy_hot: e_h[k],
            energy_cold: e_c[k],
            population_hot: p_h[k],
            population_cold: p_c[k],
            work: (e_c[k] - e_h[k]) * dp,
            heat_hot: e_h[k] * dp,
            heat_cold: -e_c[k] * dp,
        });
    }
    let mut result = CycleResult::from_totals(w, q_h, q_c, t_hot, t_cold);
    result.per_level = per_level;
    result
}

/// Two-level reading of a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsSummary {
    pub delta_hot: f64,
    pub delta_cold: f64,
    /// Gap of the bare cold well, when the cold potential is a (δ-)well.
    pub delta_cold_box: Option<f64>,
    /// `delta_cold - delta_cold_box`.
    pub gap_shift: Option<f64>,
    /// `T_h/T_c >= Δ_h/Δ_c > 1`.
    pub extraction_condition_met: bool,
    /// `1 - Δ_c/Δ_h`.
    pub eta_tls: f64,
    /// Third-level populations at the hot and cold baths.
    pub third_level_population: (f64, f64),
    /// Both third-level populations below 1e-3.
    pub two_level_regime: bool,
    /// Relative residual of `Δ_c/Δ_h = (1/r^2) / (1 - gap_shift/Δ_c)` for a
    /// bare hot well and a (δ-)well on the cold side.
    pub gap_identity_residual: Option<f64>,
}

fn well_length(p: &PotentialSpec) -> Option<f64> {
    match p.shape {
        Shape::SquareWell { length } | Shape::SquareWellDelta { length, .. } => Some(length),
        _ => None,
    }
}

/// Gap `3 pi^2 hbar^2 / (2 m L^2)` between the two lowest levels of a bare well.
pub fn box_gap(length: f64, hbar: f64, mass: f64) -> f64 {
    3.0 * PI * PI * hbar * hbar / (2.0 * mass * length * length)
}

pub fn tls_summary(spec_h: &Spectrum, spec_c: &Spectrum, t_hot: f64, t_cold: f64, r: f64) -> Result<TlsSummary> {
    check_temperatures(t_hot, t_cold)?;
    require_positive("r", r)?;
    let (Some(delta_hot), Some(delta_cold)) = (spec_h.gap(), spec_c.gap()) else {
        return Err(Error::invalid("spectrum", "need at least two levels"));
    };
    let third = |s: &Spectrum, t: f64| -> f64 {
        if s.len() < 3 {
            return 0.0;
        }
        let e1 = s.energies[0];
        let w: Vec<f64> = s.energies.iter().map(|e| math::exp(-(e - e1) / t)).collect();
        w[2] / w.iter().sum::<f64>()
    };
    let p3 = (third(spec_h, t_hot), third(spec_c, t_cold));
    let ratio = delta_hot / delta_cold;
    let delta_cold_box = well_length(&spec_c.source).map(|l| box_gap(l, spec_c.units.hbar, spec_c.units.mass));
    let gap_shift = delta_cold_box.map(|b| delta_cold - b);
    let gap_identity_residual = match (spec_h.source.shape, gap_shift) {
        (Shape::SquareWell { .. }, Some(shift)) => {
            let lhs = delta_cold / delta_hot;
            let rhs = (1.0 / (r * r)) / (1.0 - shift / delta_cold);
            Some(((lhs - rhs) / lhs).abs())
        }
        _ => None,
    };
    Ok(TlsSummary {
        delta_hot,
        delta_cold,
        delta_cold_box,
        gap_shift,
        extraction_condition_met: ratio > 1.0 && t_hot / t_cold >= ratio,
        eta_tls: 1.0 - delta_cold / delta_hot,
        third_level_population: p3,
        two_level_regime: p3.0 < 1e-3 && p3.1 < 1e-3,
        gap_identity_residual,
    })
}

/// Classical Otto cycle of an ideal gas with compression ratio `r` and heat
/// capacity ratio `gamma`, per particle with `C_v = 1/(gamma - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalOtto {
    pub result: CycleResult,
    /// `(T_h/T_c)^(1/(gamma-1))`, above which the machine refrigerates.
    pub r_carnot: f64,
    pub eta_carnot: f64,
}

pub fn classical_otto(r: f64, gamma: f64, t_hot: f64, t_cold: f64) -> Result<ClassicalOtto> {
    require_positive("r", r)?;
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(Error::invalid("gamma", "must be finite and > 1"));
    }
    check_temperatures(t_hot, t_cold)?;
    let cv = 1.0 / (gamma - 1.0);
    let q = math::powf(r, gamma - 1.0);
    let mut span = t_hot - q * t_cold;
    if span.abs() <= 1e-12 * t_hot {
        span = 0.0;
    }
    let heat_hot = cv * span;
    let heat_cold = -heat_hot / q;
    let work = if q == 1.0 { 0.0 } else { -(heat_hot + heat_cold) };
    Ok(ClassicalOtto {
        result: CycleResult::from_totals(work, heat_hot, heat_cold, t_hot, t_cold),
        r_carnot: math::powf(t_hot / t_cold, 1.0 / (gamma - 1.0)),
        eta_carnot: 1.0 - t_cold / t_hot,
    })
}

/// Work and heats of a homogeneously scaled machine (`E_h = q E_c`) from the
/// heat capacity of the hot spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousWork {
    /// `int_{q T_c}^{T_h} C_v dT`.
    pub integral: f64,
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
}

pub fn homogeneous_work_oracle(spec_h: &Spectrum, q: f64, t_hot: f64, t_cold: f64) -> Result<HomogeneousWork> {
    require_positive("q", q)?;
    check_temperatures(t_hot, t_cold)?;
    let (lo, hi) = (q * t_cold, t_hot);
    // Fails early if the spectrum is too short at the hotter end.
    thermo::thermalize(spec_h, lo.max(hi))?;
    let (a, b, sign) = if lo <= hi { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
    let cv = |t: f64| thermo::heat_capacity(spec_h, t).unwrap_or(f64::NAN);
    let integral = if a == b {
        0.0
    } else {
        let settings = QuadSettings {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 4000,
        };
        sign * quad::integrate(cv, &[a, b], settings)?.value
    };
    Ok(HomogeneousWork {
        integral,
        work: (1.0 - q) / q * integral,
        heat_hot: integral,
        heat_cold: -integral / q,
    })
}

/// Whether a failed audit check is a theorem violation or a finding about the
/// level-by-level decomposition of the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    /// Energy conservation, the second law, or the Carnot bound on the cycle.
    Hard,
    /// Per-level statements, which need not hold level by level.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditFinding {
    pub check: &'static str,
    pub kind: AuditKind,
    /// 1-based level index for per-level checks.
    pub level: Option<usize>,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub findings: Vec<AuditFinding>,
    /// Levels with `W_n < 0` that were examined.
    pub work_extracting_levels: usize,
}

impl AuditReport {
    pub fn hard_violations(&self) -> usize {
        self.findings.iter().filter(|f| f.kind == AuditKind::Hard).count()
    }

    pub fn level_findings(&self) -> usize {
        self.findings.iter().filter(|f| f.kind == AuditKind::Level).count()
    }

    /// No hard violations.
    pub fn passed(&self) -> bool {
        self.hard_violations() == 0
    }

    /// No findings of any kind.
    pub fn clean(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks a cycle against the bounds it must satisfy:
///
/// * `energy_conservation`: `|W + Q_h + Q_c| <= 1e-12 max(|W|, |Q_h|, |Q_c|)`;
/// * `entropy_production`: `-Q_h/T_h - Q_c/T_c >= -1e-12`;
/// * `engine_carnot`: in engine mode, `eta <= 1 - T_c/T_h + 1e-12`;
/// * `level_temperature_order`, `level_carnot`: every level with `W_n < 0`
///   has `E_hn/T_h < E_cn/T_c` and `1 - E_cn/E_hn <= 1 - T_c/T_h`;
/// * `multilevel_vs_best_level`: the engine efficiency does not exceed the
///   best single-level efficiency among those levels.
///
/// The last three are reported with [`AuditKind::Level`].
pub fn carnot_audit(result: &CycleResult, t_hot: f64, t_cold: f64) -> AuditReport {
    let mut report = AuditReport::default();
    let eta_carnot = 1.0 - t_cold / t_hot;
    let mut push = |check, kind, level, value, limit| {
        report.findings.push(AuditFinding {
            check,
            kind,
            level,
            value,
            limit,
        })
    };
    let balance_limit = 1e-12 * result.scale();
    if result.energy_residual() > balance_limit {
        push("energy_conservation", AuditKind::Hard, None, result.energy_residual(), balance_limit);
    }
    let sigma = -result.heat_hot / t_hot - result.heat_cold / t_cold;
    if sigma < -1e-12 {
        push("entropy_production", AuditKind::Hard, None, sigma, -1e-12);
    }
    if let Some(eta) = result.eta_engine {
        if eta > eta_carnot + 1e-12 {
            push("engine_carnot", AuditKind::Hard, None, eta, eta_carnot);
        }
    }
    let mut best_level = f64::NEG_INFINITY;
    let mut extracting = 0;
    for l in &result.per_level {
        if l.work >= 0.0 {
            continue;
        }
        extracting += 1;
        let (bh, bc) = (l.energy_hot / t_hot, l.energy_cold / t_cold);
        if bh >= bc * (1.0 + 1e-12 * bc.signum()) {
            push("level_temperature_order", AuditKind::Level, Some(l.n), bh, bc);
        }
        if l.energy_hot != 0.0 {
            let eta_n = 1.0 - l.energy_cold / l.energy_hot;
            best_level = best_level.max(eta_n);
            if eta_n > eta_carnot + 1e-12 {
                push("level_carnot", AuditKind::Level, Some(l.n), eta_n, eta_carnot);
            }
        }
    }
    if let Some(eta) = result.eta_engine {
        if extracting > 0 && eta > best_level + 1e-12 {
            push("multilevel_vs_best_level", AuditKind::Level, None, eta, best_level);
        }
    }
    report.work_extracting_levels = extracting;
    report
}

/// A pair of potentials run as an Otto machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Machine {
    pub hot: PotentialSpec,
    pub cold: PotentialSpec,
}

impl Machine {
    pub fn new(hot: PotentialSpec, cold: PotentialSpec) -> Self {
        Machine { hot, cold }
    }

    /// Both spectra, solved to the same level count, covering the thermal
    /// tails at their bath temperatures.
    pub fn spectra(&self, t_hot: f64, t_cold: f64, settings: &DvrSettings) -> Result<(Spectrum, Spectrum)> {
        check_temperatures(t_hot, t_cold)?;
        let mut h = spectrum::solve_thermal(&self.hot, t_hot, 2, settings)?;
        let mut c = spectrum::solve_thermal(&self.cold, t_cold, 2, settings)?;
        if h.len() < c.len() {
            h = spectrum::solve_thermal(&self.hot, t_hot, c.len(), settings)?;
        } else if c.len() < h.len() {
            c = spectrum::solve_thermal(&self.cold, t_cold, h.len(), settings)?;
        }
        let n = h.len().min(c.len());
        Ok((h.truncated(n), c.truncated(n)))
    }

    pub fn run(&self, t_hot: f64, t_cold: f64, settings: &DvrSettings) -> Result<CycleResult> {
        let (h, c) = self.spectra(t_hot, t_cold, settings)?;
        run_otto(&h, &c, t_hot, t_cold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{solve_delta_well, solve_harmonic, solve_square_well};
    use crate::units::UnitSystem;
    use proptest::prelude::*;

    const NAT: UnitSystem = UnitSystem::NATURAL;

    /// Direct transcription of the heat and work sums with absolute energies.
    fn naive(e_h: &[f64], e_c: &[f64], t_h: f64, t_c: f64) -> (f64, f64, f64) {
        let z_h: f64 = e_h.iter().map(|e| math::exp(-e / t_h)).sum();
        let z_c: f64 = e_c.iter().map(|e| math::exp(-e / t_c)).sum();
        let (mut qh, mut qc, mut w) = (0.0, 0.0, 0.0);
        for k in 0..e_h.len() {
            let ph = math::exp(-e_h[k] / t_h) / z_h;
            let pc = math::exp(-e_c[k] / t_c) / z_c;
            qh += e_h[k] * (ph - pc);
            qc += e_c[k] * (pc - ph);
            w += (e_c[k] - e_h[k]) * (ph - pc);
        }
        (w, qh, qc)
    }

    #[test]
    fn identical_spectra_do_no_work() {
        let s = solve_square_well(2.0, 80, NAT).unwrap();
        let r = run_otto(&s, &s, 3.0, 1.0).unwrap();
        assert_eq!(r.work, 0.0);
        assert!((r.heat_hot + r.heat_cold).abs() < 1e-15);
        assert!(r.heat_hot > 0.0);
        assert_eq!(r.mode, Mode::Broken);
    }

    #[test]
    fn harmonic_engine_efficiency_is_one_minus_inverse_q() {
        let c = solve_harmonic(1.0, 200, NAT).unwrap();
        let h = solve_harmonic(2.0, 200, NAT).unwrap();
        let r = run_otto(&h, &c, 4.0, 1.0).unwrap();
        assert_eq!(r.mode, Mode::Engine);
        assert!((r.eta_engine.unwrap() - 0.5).abs() < 1e-12);
        // The oracle sums all 200 levels; the cycle drops a tail below 1e-10.
        let (w, qh, qc) = naive(&h.energies, &c.energies, 4.0, 1.0);
        assert!((r.work - w).abs() < 1e-9 && (r.heat_hot - qh).abs() < 1e-9 && (r.heat_cold - qc).abs() < 1e-9);
    }

    #[test]
    fn fixed_volume_delta_engine() {
        let h = solve_square_well(2.0, 60, NAT).unwrap();
        let c = solve_delta_well(2.0, 2.0, 60, NAT).unwrap();
        let r = run_otto(&h, &c, 9.6, 0.8).unwrap();
        assert_eq!(r.mode, Mode::Engine, "{r:?}");
        assert!(r.work < 0.0);
        let (w, ..) = naive(&h.energies, &c.energies, 9.6, 0.8);
        assert!((r.work - w).abs() < 1e-9);
        assert!(carnot_audit(&r, 9.6, 0.8).passed());
    }

    #[test]
    fn short_spectrum_is_a_truncation_error() {
        let h = solve_square_well(2.0, 3, NAT).unwrap();
        let c = solve_square_well(4.0, 60, NAT).unwrap();
        assert!(matches!(run_otto(&h, &c, 50.0, 1.0), Err(Error::Truncation { .. })));
        assert!(matches!(run_otto(&c, &c, 1.0, 1.0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn classification_covers_all_sign_patterns() {
        assert_eq!(classify(-1.0, 3.0, -2.0), Mode::Engine);
        assert_eq!(classify(1.0, -3.0, 2.0), Mode::Refrigerator);
        assert_eq!(classify(1.0, 1.0, -2.0), Mode::Broken);
        assert_eq!(classify(3.0, -1.0, -2.0), Mode::Dissipator);
        assert_eq!(classify(0.0, 1.0, -1.0), Mode::Broken);
        assert_eq!(classify(-1e-14, 1.0, -1.0), Mode::Broken);
    }

    #[test]
    fn classical_otto_examples() {
        let b = classical_otto(1.0, 3.0, 12.0, 1.0).unwrap();
        assert_eq!(b.result.mode, Mode::Broken);
        assert_eq!(b.result.work, 0.0);
        let e = classical_otto(2.0, 3.0, 12.0, 1.0).unwrap();
        assert_eq!(e.result.mode, Mode::Engine);
        assert!((e.result.eta_engine.unwrap() - 0.75).abs() < 1e-15);
        assert!((e.result.eta_over_carnot().unwrap() - 0.75 / (11.0 / 12.0)).abs() < 1e-15);
        let f = classical_otto(4.0, 3.0, 12.0, 1.0).unwrap();
        assert_eq!(f.result.mode, Mode::Refrigerator);
        assert!((f.r_carnot - math::sqrt(12.0)).abs() < 1e-15);
        let at = classical_otto(f.r_carnot, 3.0, 12.0, 1.0).unwrap();
        assert_eq!(at.result.mode, Mode::Broken);
        assert_eq!(classical_otto(0.5, 3.0, 12.0, 1.0).unwrap().result.mode, Mode::Broken);
    }

    #[test]
    fn tls_examples() {
        let h = solve_square_well(2.0, 4, NAT).unwrap();
        let s = tls_summary(&h, &h, 2.0, 1.0, 1.0).unwrap();
        assert!(!s.extraction_condition_met);
        assert_eq!(s.gap_shift, Some(0.0));
        // Δ_h = 2Δ_c from a well sqrt(2) longer on the cold side.
        let c = solve_square_well(2.0 * math::sqrt(2.0), 4, NAT).unwrap();
        let s = tls_summary(&h, &c, 4.0, 1.0, math::sqrt(2.0)).unwrap();
        assert!(s.extraction_condition_met);
        assert!((s.eta_tls - 0.5).abs() < 1e-14);
        assert!(s.gap_identity_residual.unwrap() < 1e-14);
    }

    #[test]
    fn tls_gap_shift_sign_follows_barrier() {
        let h = solve_square_well(2.0, 4, NAT).unwrap();
        for &g in &[-3.0, -0.4, 0.4, 3.0] {
            let c = solve_delta_well(3.0, g, 4, NAT).unwrap();
            let s = tls_summary(&h, &c, 12.0, 1.0, 1.5).unwrap();
            let shift = s.gap_shift.unwrap();
            assert_eq!(shift < 0.0, g > 0.0, "g = {g}");
            assert!(s.gap_identity_residual.unwrap() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_oracle_matches_cycle_for_harmonic() {
        let q = 2.0;
        let c = solve_harmonic(1.0, 400, NAT).unwrap();
        let h = solve_harmonic(q, 400, NAT).unwrap();
        for &(t_h, t_c) in &[(4.0, 1.0), (3.0, 0.5), (10.0, 2.0)] {
            let r = run_otto(&h, &c, t_h, t_c).unwrap();
            let o = homogeneous_work_oracle(&h, q, t_h, t_c).unwrap();
            assert!((r.work - o.work).abs() < 1e-9 * r.work.abs(), "{} vs {}", r.work, o.work);
            assert!((r.heat_hot - o.heat_hot).abs() < 1e-9 * r.heat_hot.abs());
        }
        let o = homogeneous_work_oracle(&h, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(o.work, 0.0);
    }

    #[test]
    fn homogeneous_oracle_matches_cycle_for_wells() {
        let r = 2.0;
        let h = solve_square_well(2.0, 400, NAT).unwrap();
        let c = solve_square_well(2.0 * r, 400, NAT).unwrap();
        let res = run_otto(&h, &c, 12.0, 1.0).unwrap();
        let o = homogeneous_work_oracle(&h, r * r, 12.0, 1.0).unwrap();
        assert!((res.work - o.work).abs() < 1e-9 * res.work.abs());
        assert!((res.eta_engine.unwrap() - 0.75).abs() < 1e-12);
    }

    /// A five-level engine that respects every hard bound while one of its
    /// work-extracting levels beats the Carnot efficiency on its own.
    #[test]
    fn per_level_bound_is_not_a_theorem() {
        let e_h = [5.0230, 5.8982, 8.6158, 9.2168, 9.3506];
        let e_c = [0.3762, 1.0244, 4.3263, 5.2392, 8.5601];
        let (t_h, t_c) = (0.59629, 0.11827);
        let r = run_otto_levels(&e_h, &e_c, t_h, t_c).unwrap();
        assert_eq!(r.mode, Mode::Engine);
        let report = carnot_audit(&r, t_h, t_c);
        assert!(report.passed());
        assert!(report
            .findings
            .iter()
            .any(|f| f.check == "level_carnot" && f.level == Some(2)));
        assert!(r.eta_engine.unwrap() < r.eta_carnot());
    }

    #[test]
    fn entropy_production_is_symmetric_divergence() {
        let e_h = [0.0, 1.0, 2.5, 4.0];
        let e_c = [0.0, 0.3, 1.1, 1.6];
        let (t_h, t_c) = (2.0, 0.7);
        let r = run_otto_levels(&e_h, &e_c, t_h, t_c).unwrap();
        let d: f64 = r
            .per_level
            .iter()
            .map(|l| (l.population_hot - l.population_cold) * math::ln(l.population_hot / l.population_cold))
            .sum();
        assert!((r.entropy_production - d).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn balance_and_second_law(
            mut e_h in proptest::collection::vec(0.0f64..10.0, 5),
            mut e_c in proptest::collection::vec(0.0f64..10.0, 5),
            t_c in 0.1f64..5.0,
            ratio in 1.01f64..20.0,
        ) {
            e_h.sort_by(f64::total_cmp);
            e_c.sort_by(f64::total_cmp);
            let t_h = t_c * ratio;
            let r = run_otto_levels(&e_h, &e_c, t_h, t_c).unwrap();
            prop_assert!(r.energy_residual() <= 1e-12 * r.scale());
            prop_assert!(r.entropy_production >= -1e-12);
            let (w, qh, qc) = naive(&e_h, &e_c, t_h, t_c);
            let tol = 1e-12 * (1.0 + qh.abs().max(qc.abs()));
            prop_assert!((r.work - w).abs() < tol && (r.heat_hot - qh).abs() < tol && (r.heat_cold - qc).abs() < tol);
            let levels_w: f64 = r.per_level.iter().map(|l| l.work).sum();
            prop_assert!((levels_w - r.work).abs() < 1e-12 * 10.0);
            prop_assert!(carnot_audit(&r, t_h, t_c).passed());
        }
    }
}
