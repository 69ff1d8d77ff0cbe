//! Parameter sweeps and barrier-strength optimization.
//!
//! Two machine families are covered. The δ-well family has a bare hot well of
//! length 2 and a cold well of length `2r` with a central δ barrier, in units
//! where `2 hbar^2/(m L_h) = 1`. Barrier strengths are given in units of
//! `g_cri = 2 hbar^2/(m L_c)`. The ion-trap family deforms a Paul trap plus
//! optical lattice from flat-bottomed (hot) to double-welled (cold).
//!
//! Sweeps are laid out row-major, first axis slowest. Each sweep is split into
//! a list of grid points, a per-point evaluation and a table assembly step, so
//! callers can evaluate the points in any order or in parallel.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cycle::{self, carnot_audit, CycleResult, Machine, Mode};
use crate::error::{require_positive, Error, Result};
use crate::limits::{self, ScalingPath, ScalingSeries};
use crate::math;
use crate::potentials::PotentialSpec;
use crate::spectrum::{self, DvrSettings};
use crate::units::{self, UnitSystem};

/// A named parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: &'static str,
    pub values: Vec<f64>,
}

/// Summary of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub work: f64,
    pub heat_hot: f64,
    pub heat_cold: f64,
    pub mode: Option<Mode>,
    pub eta: Option<f64>,
    pub cop: Option<f64>,
    pub eta_over_carnot: Option<f64>,
    pub t_hot: f64,
    pub t_cold: f64,
    /// No hard audit violations.
    pub audit_passed: bool,
    /// Per-level audit findings (see [`cycle::carnot_audit`]).
    pub level_findings: usize,
    /// Convergence of the ξ-series behind a classical-limit cell.
    pub converged: Option<bool>,
    pub error: Option<String>,
}

impl Cell {
    pub fn from_result(r: &CycleResult) -> Self {
        let audit = carnot_audit(r, r.t_hot, r.t_cold);
        Cell {
            work: r.work,
            heat_hot: r.heat_hot,
            heat_cold: r.heat_cold,
            mode: Some(r.mode),
            eta: r.eta_engine,
            cop: r.eta_refrigerator,
            eta_over_carnot: r.eta_over_carnot(),
            t_hot: r.t_hot,
            t_cold: r.t_cold,
            audit_passed: audit.passed(),
            level_findings: audit.level_findings(),
            converged: None,
            error: None,
        }
    }

    pub fn failed(err: &Error, t_hot: f64, t_cold: f64) -> Self {
        Cell {
            work: f64::NAN,
            heat_hot: f64::NAN,
            heat_cold: f64::NAN,
            mode: None,
            eta: None,
            cop: None,
            eta_over_carnot: None,
            t_hot,
            t_cold,
            audit_passed: false,
            level_findings: 0,
            converged: None,
            error: Some(err.to_string()),
        }
    }
}

/// Grid of cells over one or two axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axes: Vec<Axis>,
    /// Row-major over `axes`, first axis slowest.
    pub cells: Vec<Cell>,
    /// Resolved configuration as key/value text.
    pub metadata: Vec<(String, String)>,
}

impl SweepTable {
    pub fn new(axes: Vec<Axis>, cells: Vec<Cell>, metadata: Vec<(String, String)>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::invalid("axes", "need one or two axes"));
        }
        let expected: usize = axes.iter().map(|a| a.values.len()).product();
        if expected != cells.len() {
            return Err(Error::invalid("cells", "count does not match the axes"));
        }
        Ok(SweepTable { axes, cells, metadata })
    }

    /// Axis values of cell `index`.
    pub fn coordinates(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut out = Vec::with_capacity(self.axes.len());
        for (k, axis) in self.axes.iter().enumerate() {
            let stride: usize = self.axes[k + 1..].iter().map(|a| a.values.len()).product();
            out.push(axis.values[rest / stride]);
            rest %= stride;
        }
        out
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        let cols = self.axes.get(1).map_or(1, |a| a.values.len());
        &self.cells[i * cols + j]
    }
}

/// Cross product of two grids, row-major.
pub fn grid_points(first: &[f64], second: &[f64]) -> Vec<(f64, f64)> {
    first.iter().flat_map(|&a| second.iter().map(move |&b| (a, b))).collect()
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "must be a nonempty list of finite values"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// δ-well machines

/// Length of the hot well in the δ-well family.
pub const HOT_LENGTH: f64 = units::FIG2_HOT_LENGTH;

/// Hot bare well of length 2 and cold δ-well of length `2r`, barrier strength
/// `g` in units of `g_cri = 2 hbar^2/(m L_c)`.
pub fn delta_machine(r: f64, g_over_gcri: f64) -> Result<Machine> {
    require_positive("r", r)?;
    let nat = UnitSystem::NATURAL;
    let l_c = HOT_LENGTH * r;
    let g = g_over_gcri * units::critical_barrier_strength(&nat, l_c);
    Ok(Machine::new(
        PotentialSpec::square_well(HOT_LENGTH, nat)?,
        PotentialSpec::delta_well(l_c, g, nat)?,
    ))
}

/// How the bath temperatures of the δ-well family are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TcPolicy {
    /// A fixed cold temperature.
    Fixed(f64),
    /// `T_c` as a fraction of the bare cold-well gap `3 pi^2 hbar^2/(2 m L_c^2)`.
    BoxGapFraction(f64),
    /// `T_h` as a fraction of the hot-well gap, `T_c = T_h / ratio`.
    HotGapFraction(f64),
}

impl Default for TcPolicy {
    fn default() -> Self {
        TcPolicy::HotGapFraction(0.2)
    }
}

impl TcPolicy {
    /// `(T_h, T_c)` for compression ratio `r`.
    pub fn temperatures(&self, t_ratio: f64, r: f64) -> Result<(f64, f64)> {
        require_positive("t_ratio", t_ratio)?;
        if t_ratio <= 1.0 {
            return Err(Error::invalid("t_ratio", "must be > 1"));
        }
        let gap = |l: f64| cycle::box_gap(l, 1.0, 1.0);
        let (t_h, t_c) = match *self {
            TcPolicy::Fixed(t_c) => (t_ratio * t_c, t_c),
            TcPolicy::BoxGapFraction(f) => {
                let t_c = f * gap(HOT_LENGTH * r);
                (t_ratio * t_c, t_c)
            }
            TcPolicy::HotGapFraction(f) => {
                let t_h = f * gap(HOT_LENGTH);
                (t_h, t_h / t_ratio)
            }
        };
        require_positive("t_cold", t_c)?;
        Ok((t_h, t_c))
    }

    pub fn describe(&self) -> String {
        match self {
            TcPolicy::Fixed(t) => format!("fixed:{t:e}"),
            TcPolicy::BoxGapFraction(f) => format!("box_gap_fraction:{f:e}"),
            TcPolicy::HotGapFraction(f) => format!("hot_gap_fraction:{f:e}"),
        }
    }
}

/// Inputs of the compression-ratio × barrier-strength sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSweep {
    pub r_grid: Vec<f64>,
    /// Barrier strengths in units of `g_cri`.
    pub g_grid: Vec<f64>,
    pub t_ratio: f64,
    pub gamma: f64,
    pub tc_policy: TcPolicy,
}

impl Default for DeltaSweep {
    fn default() -> Self {
        DeltaSweep {
            r_grid: Vec::new(),
            g_grid: Vec::new(),
            t_ratio: 12.0,
            gamma: 3.0,
            tc_policy: TcPolicy::default(),
        }
    }
}

impl DeltaSweep {
    pub fn validate(&self) -> Result<()> {
        check_grid("r_grid", &self.r_grid)?;
        check_grid("g_grid", &self.g_grid)?;
        for &r in &self.r_grid {
            require_positive("r_grid", r)?;
            self.tc_policy.temperatures(self.t_ratio, r)?;
        }
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::invalid("gamma", "must be finite and > 1"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        grid_points(&self.r_grid, &self.g_grid)
    }

    /// Classical and quantum cells at `(r, g)`.
    pub fn evaluate(&self, r: f64, g: f64, settings: &DvrSettings) -> Result<(Cell, Cell)> {
        let (t_h, t_c) = self.tc_policy.temperatures(self.t_ratio, r)?;
        let classical = cycle::classical_otto(r, self.gamma, t_h, t_c)?;
        let quantum = delta_machine(r, g)?.run(t_h, t_c, settings)?;
        Ok((Cell::from_result(&classical.result), Cell::from_result(&quantum)))
    }

    pub fn assemble(&self, cells: Vec<(Cell, Cell)>) -> Result<(SweepTable, SweepTable)> {
        let axes = || {
            alloc::vec![
                Axis {
                    name: "r",
                    values: self.r_grid.clone(),
                },
                Axis {
                    name: "g_over_gcri",
                    values: self.g_grid.clone(),
                },
            ]
        };
        let meta = |kind: &str| {
            alloc::vec![
                ("table".to_string(), kind.to_string()),
                ("t_ratio".to_string(), format!("{:e}", self.t_ratio)),
                ("gamma".to_string(), format!("{:e}", self.gamma)),
                ("tc_policy".to_string(), self.tc_policy.describe()),
                ("hot_length".to_string(), format!("{HOT_LENGTH:e}")),
                ("units".to_string(), "natural (hbar = m = k_B = 1)".to_string()),
            ]
        };
        let (classical, quantum): (Vec<Cell>, Vec<Cell>) = cells.into_iter().unzip();
        Ok((
            SweepTable::new(axes(), classical, meta("classical"))?,
            SweepTable::new(axes(), quantum, meta("quantum"))?,
        ))
    }
}

/// Classical and quantum tables over `r_grid × g_grid`, evaluated in order.
pub fn sweep_fig2(sweep: &DeltaSweep, settings: &DvrSettings) -> Result<(SweepTable, SweepTable)> {
    sweep.validate()?;
    let cells = sweep
        .points()
        .into_iter()
        .map(|(r, g)| sweep.evaluate(r, g, settings))
        .collect::<Result<Vec<_>>>()?;
    sweep.assemble(cells)
}

// ---------------------------------------------------------------------------
// Optimization over the barrier strength

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Engine efficiency, subject to |W| >= W_floor.
    MaxEfficiency,
    /// Extracted work -W in engine mode.
    MaxExtractedWork,
    /// Heat drawn from the cold bath in refrigerator mode.
    MaxCooling,
    /// Refrigerator COP, subject to W >= W_floor.
    MaxRefrigerationEfficiency,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::MaxEfficiency => "max_efficiency",
            Objective::MaxExtractedWork => "max_extracted_work",
            Objective::MaxCooling => "max_cooling",
            Objective::MaxRefrigerationEfficiency => "max_refrigeration_efficiency",
        }
    }

    /// Objective value, or `None` where the point is infeasible.
    pub fn value(&self, r: &CycleResult, w_floor: f64) -> Option<f64> {
        match (self, r.mode) {
            (Objective::MaxEfficiency, Mode::Engine) if -r.work >= w_floor => r.eta_engine,
            (Objective::MaxExtractedWork, Mode::Engine) => Some(-r.work),
            (Objective::MaxCooling, Mode::Refrigerator) => Some(r.heat_cold),
            (Objective::MaxRefrigerationEfficiency, Mode::Refrigerator) if r.work >= w_floor => r.eta_refrigerator,
            _ => None,
        }
    }
}

/// Feasibility floor on |W| for the efficiency objectives, relative to `T_h`.
pub const W_FLOOR_FRACTION: f64 = 1e-6;
/// Points of the initial scan.
pub const SCAN_POINTS: usize = 64;
/// Relative width at which the golden-section refinement stops.
pub const G_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Best barrier strength, in units of `g_cri`.
    pub argmax: f64,
    pub objective_value: f64,
    pub objective_kind: Objective,
    pub w_floor: f64,
    pub result: CycleResult,
    /// Every evaluated `(g, value)`, in evaluation order.
    pub trace: Vec<(f64, Option<f64>)>,
}

/// Maximizes `objective` over `g` in `g_bounds` (units of `g_cri`) for the
/// δ-well machine with compression ratio `r`: a 64-point scan, then golden
/// section around the best scan point down to a relative width of 1e-6.
pub fn optimize_g(
    r: f64,
    t_hot: f64,
    t_cold: f64,
    objective: Objective,
    g_bounds: (f64, f64),
    settings: &DvrSettings,
) -> Result<OptimizationResult> {
    let (lo, hi) = g_bounds;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("g_bounds", "need finite lo < hi"));
    }
    require_positive("r", r)?;
    let w_floor = W_FLOOR_FRACTION * t_hot;
    let hot_machine = delta_machine(r, 0.0)?;
    let (hot, _) = hot_machine.spectra(t_hot, t_cold, settings)?;
    let mut trace: Vec<(f64, Option<f64>)> = Vec::new();
    let mut eval = |g: f64| -> Result<(f64, Option<f64>, CycleResult)> {
        let m = delta_machine(r, g)?;
        let cold = spectrum::solve_thermal(&m.cold, t_cold, hot.len(), settings)?;
        let n = hot.len().min(cold.len());
        let res = cycle::run_otto(&hot.truncated(n), &cold.truncated(n), t_hot, t_cold)?;
        let v = objective.value(&res, w_floor);
        trace.push((g, v));
        Ok((g, v, res))
    };

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut best: Option<(usize, f64, f64, CycleResult)> = None;
    for k in 0..SCAN_POINTS {
        let g = if k == SCAN_POINTS - 1 { hi } else { lo + step * k as f64 };
        let (g, v, res) = eval(g)?;
        if let Some(v) = v {
            if best.as_ref().map_or(true, |b| v > b.2) {
                best = Some((k, g, v, res));
            }
        }
    }
    let Some((k, mut g_best, mut v_best, mut r_best)) = best else {
        return Err(Error::Infeasible {
            reason: format!(
                "no {} point among {SCAN_POINTS} samples of g/g_cri in [{lo}, {hi}] at r = {r}",
                objective.name()
            ),
        });
    };

    // Golden section on the bracket around the best scan point.
    let inv_phi = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut a = lo + step * k.saturating_sub(1) as f64;
    let mut b = (lo + step * (k + 1) as f64).min(hi);
    let score = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (_, v1, r1) = eval(x1)?;
    let (_, v2, r2) = eval(x2)?;
    let (mut f1, mut f2) = (score(v1), score(v2));
    let (mut res1, mut res2) = (r1, r2);
    let width = |a: f64, b: f64| (b - a).abs() <= G_REL_TOL * a.abs().max(b.abs()).max(1.0);
    while !width(a, b) {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            res2 = res1.clone();
            x1 = b - inv_phi * (b - a);
            let (_, v, r) = eval(x1)?;
            f1 = score(v);
            res1 = r;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            res1 = res2.clone();
            x2 = a + inv_phi * (b - a);
            let (_, v, r) = eval(x2)?;
            f2 = score(v);
            res2 = r;
        }
    }
    for (x, f, res) in [(x1, f1, res1), (x2, f2, res2)] {
        if f > v_best {
            g_best = x;
            v_best = f;
            r_best = res;
        }
    }
    Ok(OptimizationResult {
        argmax: g_best,
        objective_value: v_best,
        objective_kind: objective,
        w_floor,
        result: r_best,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Ion-trap machines

/// Frequency that converts the cold mean occupation into a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaRef {
    /// `(E_2 - E_1)/hbar` of the cold potential.
    ColdGap,
    /// Local lattice-site frequency `omega_c sqrt(kappa_c)`.
    LatticeSite,
    /// Trap frequency `omega_c`.
    Trap,
}

impl OmegaRef {
    pub fn name(&self) -> &'static str {
        match self {
            OmegaRef::ColdGap => "cold_gap",
            OmegaRef::LatticeSite => "lattice_site",
            OmegaRef::Trap => "trap",
        }
    }
}

/// Inputs of the κ_c × (ω_h/ω_c) ion-trap sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct IonTrapSweep {
    pub kappa_c_grid: Vec<f64>,
    /// `omega_h / omega_c`.
    pub omega_ratio_grid: Vec<f64>,
    pub kappa_h: f64,
    pub omega_h: f64,
    pub t_ratio: f64,
    pub nbar_c: f64,
    pub lattice: f64,
    pub units: UnitSystem,
    pub omega_ref: OmegaRef,
    pub xi_schedule: Vec<f64>,
    pub rel_tol: f64,
}

impl Default for IonTrapSweep {
    fn default() -> Self {
        IonTrapSweep {
            kappa_c_grid: Vec::new(),
            omega_ratio_grid: Vec::new(),
            kappa_h: 1.0,
            omega_h: 1e6,
            t_ratio: 41.6,
            nbar_c: 0.033,
            lattice: units::si::DEFAULT_LATTICE_PERIOD,
            units: UnitSystem::ytterbium_ion(),
            omega_ref: OmegaRef::ColdGap,
            xi_schedule: limits::default_schedule(),
            rel_tol: limits::DEFAULT_REL_TOL,
        }
    }
}

/// Temperature of a harmonic mode of frequency `omega` with mean occupation `nbar`.
pub fn temperature_from_occupation(hbar: f64, omega: f64, nbar: f64) -> Result<f64> {
    require_positive("nbar", nbar)?;
    require_positive("omega_ref", omega)?;
    Ok(hbar * omega / math::ln_1p(1.0 / nbar))
}

impl IonTrapSweep {
    pub fn validate(&self) -> Result<()> {
        check_grid("kappa_c_grid", &self.kappa_c_grid)?;
        check_grid("omega_ratio_grid", &self.omega_ratio_grid)?;
        for &k in &self.kappa_c_grid {
            if k < 0.0 {
                return Err(Error::invalid("kappa_c_grid", "must be >= 0"));
            }
        }
        for &w in &self.omega_ratio_grid {
            require_positive("omega_ratio_grid", w)?;
        }
        require_positive("omega_h", self.omega_h)?;
        require_positive("nbar_c", self.nbar_c)?;
        require_positive("lattice", self.lattice)?;
        require_positive("rel_tol", self.rel_tol)?;
        if !(self.t_ratio > 1.0 && self.t_ratio.is_finite()) {
            return Err(Error::invalid("t_ratio", "must be finite and > 1"));
        }
        self.units.validate()?;
        PotentialSpec::ion_trap(self.omega_h, self.kappa_h, self.lattice, self.units)?;
        ScalingSeries::from_results(self.xi_schedule.clone(), Vec::new(), self.rel_tol)
            .map(|_| ())
            .or_else(|e| match e {
                Error::InvalidParameter { name: "results", .. } => Ok(()),
                e => Err(e),
            })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        grid_points(&self.kappa_c_grid, &self.omega_ratio_grid)
    }

    pub fn machine(&self, kappa_c: f64, omega_ratio: f64) -> Result<Machine> {
        Ok(Machine::new(
            PotentialSpec::ion_trap(self.omega_h, self.kappa_h, self.lattice, self.units)?,
            PotentialSpec::ion_trap(self.omega_h / omega_ratio, kappa_c, self.lattice, self.units)?,
        ))
    }

    /// `(T_h, T_c)` of a cell.
    pub fn temperatures(&self, machine: &Machine, settings: &DvrSettings) -> Result<(f64, f64)> {
        let cold = machine.cold;
        let crate::potentials::Shape::IonTrap { omega, kappa, .. } = cold.shape else {
            return Err(Error::invalid("machine", "cold potential is not an ion trap"));
        };
        let omega_ref = match self.omega_ref {
            OmegaRef::Trap => omega,
            OmegaRef::LatticeSite => omega * math::sqrt(kappa),
            OmegaRef::ColdGap => {
                let s = spectrum::solve(&cold, 2, settings)?;
                s.gap().unwrap_or(0.0) / cold.units.hbar
            }
        };
        let t_c = temperature_from_occupation(cold.units.hbar, omega_ref, self.nbar_c)?;
        Ok((self.t_ratio * t_c, t_c))
    }

    /// Quantum cell and the ξ-series behind the classical cell.
    pub fn evaluate(&self, kappa_c: f64, omega_ratio: f64, settings: &DvrSettings) -> Result<(Cell, ScalingSeries)> {
        let machine = self.machine(kappa_c, omega_ratio)?;
        let (t_h, t_c) = self.temperatures(&machine, settings)?;
        let series = limits::classical_limit_series(
            &machine,
            t_h,
            t_c,
            &self.xi_schedule,
            self.rel_tol,
            ScalingPath::ReducedHbar,
            settings,
        )?;
        let quantum = if self.xi_schedule[0] == 1.0 {
            series.results[0].clone()
        } else {
            machine.run(t_h, t_c, settings)?
        };
        Ok((Cell::from_result(&quantum), series))
    }

    /// Cells for one point; failures become error cells.
    pub fn evaluate_cells(&self, kappa_c: f64, omega_ratio: f64, settings: &DvrSettings) -> (Cell, Cell) {
        match self.evaluate(kappa_c, omega_ratio, settings) {
            Ok((quantum, series)) => {
                let last = series.results.last().expect("nonempty schedule");
                let mut classical = Cell::from_result(last);
                classical.converged = Some(series.converged);
                (classical, quantum)
            }
            Err(e) => (Cell::failed(&e, f64::NAN, f64::NAN), Cell::failed(&e, f64::NAN, f64::NAN)),
        }
    }

    pub fn assemble(&self, cells: Vec<(Cell, Cell)>) -> Result<(SweepTable, SweepTable)> {
        let axes = || {
            alloc::vec![
                Axis {
                    name: "kappa_c",
                    values: self.kappa_c_grid.clone(),
                },
                Axis {
                    name: "omega_h_over_omega_c",
                    values: self.omega_ratio_grid.clone(),
                },
            ]
        };
        let xi: Vec<String> = self.xi_schedule.iter().map(|x| format!("{x:e}")).collect();
        let meta = |kind: &str| {
            alloc::vec![
                ("table".to_string(), kind.to_string()),
                ("kappa_h".to_string(), format!("{:e}", self.kappa_h)),
                ("omega_h".to_string(), format!("{:e}", self.omega_h)),
                ("t_ratio".to_string(), format!("{:e}", self.t_ratio)),
                ("nbar_c".to_string(), format!("{:e}", self.nbar_c)),
                ("lattice".to_string(), format!("{:e}", self.lattice)),
                ("hbar".to_string(), format!("{:e}", self.units.hbar)),
                ("mass".to_string(), format!("{:e}", self.units.mass)),
                ("omega_ref".to_string(), self.omega_ref.name().to_string()),
                ("xi_schedule".to_string(), xi.join(",")),
                ("rel_tol".to_string(), format!("{:e}", self.rel_tol)),
            ]
        };
        let (classical, quantum): (Vec<Cell>, Vec<Cell>) = cells.into_iter().unzip();
        Ok((
            SweepTable::new(axes(), classical, meta("classical"))?,
            SweepTable::new(axes(), quantum, meta("quantum"))?,
        ))
    }
}

/// Classical and quantum tables over the ion-trap grid, evaluated in order.
/// A failing cell is recorded in the table rather than aborting the sweep.
pub fn sweep_fig3(sweep: &IonTrapSweep, settings: &DvrSettings) -> Result<(SweepTable, SweepTable)> {
    sweep.validate()?;
    let cells = sweep
        .points()
        .into_iter()
        .map(|(k, w)| sweep.evaluate_cells(k, w, settings))
        .collect();
    sweep.assemble(cells)
}
