//! Command dispatch: configuration → validated job → tables and metadata.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use qotto_core::cycle::{self, AuditKind, AuditReport, CycleResult, Machine};
use qotto_core::explore::{self, Cell, DeltaSweep, IonTrapSweep, Objective, OmegaRef, SweepTable, TcPolicy};
use qotto_core::limits::{self, ScalingPath, ScalingSeries};
use qotto_core::spectrum::{self, DvrSettings, Spectrum};
use qotto_core::units::{self, UnitSystem};
use qotto_core::{Error, Parity, PotentialSpec};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{config_error, Config, ConfigError};
use crate::suite;
use crate::table::{Field, Table};

/// Why a run stopped, mapped onto the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad configuration or parameters (exit 1).
    Validation(String),
    /// A solver or accuracy failure (exit 2).
    Solver(String),
    /// Outputs were written but failed the audit under `--strict-audit` (exit 3).
    Audit(String),
    /// Output could not be written (exit 2).
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Solver(_) | Failure::Io(_) => 2,
            Failure::Audit(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid configuration: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Audit(m) => write!(f, "audit violation: {m}"),
            Failure::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub strict_audit: bool,
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub violations: Vec<String>,
}

pub const COMMANDS: [&str; 8] = [
    "spectrum",
    "cycle",
    "tls",
    "classical-limit",
    "sweep-fig2",
    "sweep-fig3",
    "optimize-g",
    "audit",
];

// Tolerances of the emission-time re-check, matching the cycle audit.
const BALANCE_TOL: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-12;

/// Parses `text`, validates it, runs the command and writes its outputs to `out_dir`.
pub fn run(text: &str, out_dir: &Path, opts: Options) -> Result<Outcome, Failure> {
    let cfg: Config = text.parse()?;
    let job = plan(&cfg)?;
    let unused = cfg.unused();
    if !unused.is_empty() {
        return Err(Failure::Validation(format!(
            "unknown key(s) for command `{}`: {}",
            job.name(),
            unused.join(", ")
        )));
    }
    let mut out = job.execute()?;
    check_emitted(&mut out);

    let mut meta = Map::new();
    meta.insert("command".into(), json!(job.name()));
    meta.insert("version".into(), json!(qotto_core::VERSION));
    meta.insert("config".into(), json!(cfg.resolved()));
    meta.insert("notices".into(), json!(cfg.notices()));
    if let Some(s) = job.settings() {
        meta.insert(
            "solver".into(),
            json!({
                "rel_tol": s.rel_tol,
                "max_points": s.max_points,
                "boundary_decay": s.boundary_decay,
                "thermal_margin": s.thermal_margin,
                "mode_tolerance": cycle::MODE_TOL,
                "tail_bound": qotto_core::thermo::TAIL_BOUND,
            }),
        );
    }
    meta.insert(
        "audit".into(),
        json!({
            "hard_violations": out.violations.len(),
            "violations": out.violations,
            "level_findings": out.level_findings,
            "emission_checks": {"energy_balance_rel_tol": BALANCE_TOL, "entropy_production_tol": ENTROPY_TOL},
        }),
    );
    meta.insert("results".into(), Value::Object(out.results));
    meta.insert(
        "outputs".into(),
        json!(out.tables.iter().map(|(n, _)| format!("{n}.csv")).collect::<Vec<_>>()),
    );

    fs::create_dir_all(out_dir).map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    for (name, table) in &out.tables {
        let path = out_dir.join(format!("{name}.csv"));
        fs::write(&path, table.to_csv()).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        files.push(path);
    }
    let meta_path = out_dir.join(format!("{}.meta.json", job.file_stem()));
    let mut text = serde_json::to_string_pretty(&Value::Object(meta)).expect("metadata serializes");
    text.push('\n');
    fs::write(&meta_path, text).map_err(|e| Failure::Io(format!("{}: {e}", meta_path.display())))?;
    files.push(meta_path);

    for v in &out.violations {
        log::warn!("audit: {v}");
    }
    if opts.strict_audit && !out.violations.is_empty() {
        return Err(Failure::Audit(format!(
            "{} violation(s), first: {}",
            out.violations.len(),
            out.violations[0]
        )));
    }
    Ok(Outcome {
        files,
        violations: out.violations,
    })
}

#[derive(Default)]
struct Output {
    tables: Vec<(String, Table)>,
    results: Map<String, Value>,
    violations: Vec<String>,
    level_findings: Vec<Value>,
}

impl Output {
    fn audit(&mut self, label: &str, report: &AuditReport) {
        for f in &report.findings {
            let entry = json!({
                "row": label,
                "check": f.check,
                "level": f.level,
                "value": f.value,
                "limit": f.limit,
            });
            match f.kind {
                AuditKind::Hard => self.violations.push(format!(
                    "{label}: {} (value {:e}, limit {:e})",
                    f.check, f.value, f.limit
                )),
                AuditKind::Level => self.level_findings.push(entry),
            }
        }
    }
}

/// Re-derives energy balance and entropy production from every emitted row
/// that carries `W`, `Q_h`, `Q_c`, `T_h` and `T_c` columns.
fn check_emitted(out: &mut Output) {
    let mut found = Vec::new();
    for (name, table) in &out.tables {
        let col = |c: &str| table.columns.iter().position(|x| *x == c);
        let (Some(w), Some(qh), Some(qc), Some(th), Some(tc)) = (col("W"), col("Q_h"), col("Q_c"), col("T_h"), col("T_c"))
        else {
            continue;
        };
        let num = |f: &Field| match f {
            Field::Float(v) => Some(*v),
            Field::MaybeFloat(v) => *v,
            _ => None,
        };
        for (i, row) in table.rows.iter().enumerate() {
            let (Some(w), Some(qh), Some(qc), Some(th), Some(tc)) =
                (num(&row[w]), num(&row[qh]), num(&row[qc]), num(&row[th]), num(&row[tc]))
            else {
                continue;
            };
            if [w, qh, qc, th, tc].iter().any(|v| v.is_nan()) {
                continue;
            }
            let scale = w.abs().max(qh.abs()).max(qc.abs());
            let residual = (w + qh + qc).abs();
            if residual > BALANCE_TOL * scale {
                found.push(format!("{name}.csv row {}: energy balance residual {residual:e}", i + 1));
            }
            let sigma = -qh / th - qc / tc;
            if sigma < -ENTROPY_TOL {
                found.push(format!("{name}.csv row {}: entropy production {sigma:e} < 0", i + 1));
            }
        }
    }
    out.violations.extend(found);
}

// ---------------------------------------------------------------------------
// Configuration → jobs

enum Job {
    Spectrum {
        potential: PotentialSpec,
        n_levels: Option<usize>,
        temperature: Option<f64>,
        settings: DvrSettings,
    },
    Cycle {
        machine: Machine,
        t_hot: f64,
        t_cold: f64,
        settings: DvrSettings,
    },
    Tls {
        machine: Machine,
        t_hot: f64,
        t_cold: f64,
        r: f64,
        settings: DvrSettings,
    },
    ClassicalLimit {
        machine: Machine,
        t_hot: f64,
        t_cold: f64,
        schedule: Vec<f64>,
        rel_tol: f64,
        path: ScalingPath,
        settings: DvrSettings,
    },
    Fig2 {
        sweep: DeltaSweep,
        settings: DvrSettings,
    },
    Fig3 {
        sweep: IonTrapSweep,
        settings: DvrSettings,
    },
    OptimizeG {
        r: f64,
        t_hot: f64,
        t_cold: f64,
        objective: Objective,
        bounds: (f64, f64),
        settings: DvrSettings,
    },
    Audit {
        seed: u64,
        samples: usize,
    },
}

fn plan(cfg: &Config) -> Result<Job, Failure> {
    let command = cfg.string("command")?;
    let job = match command.as_str() {
        "spectrum" => {
            let units = unit_system(cfg)?;
            let potential = potential(cfg, "potential", units)?;
            let temperature = cfg.f64_opt("spectrum.temperature")?;
            let n_levels = if temperature.is_some() && !cfg.has("spectrum.n_levels") {
                cfg.usize_or("spectrum.n_levels", 2)?;
                None
            } else {
                Some(cfg.usize_or("spectrum.n_levels", 10)?)
            };
            if let Some(t) = temperature {
                positive(t, "spectrum.temperature")?;
            }
            if n_levels == Some(0) {
                return Err(config_error("spectrum.n_levels", "must be >= 1").into());
            }
            Job::Spectrum {
                potential,
                n_levels,
                temperature,
                settings: solver_settings(cfg)?,
            }
        }
        "cycle" | "tls" | "classical-limit" => {
            let units = unit_system(cfg)?;
            let hot = potential(cfg, "potential_h", units)?;
            let cold = potential(cfg, "potential_c", units)?;
            let machine = Machine::new(hot, cold);
            let (t_hot, t_cold) = temperatures(cfg)?;
            let settings = solver_settings(cfg)?;
            match command.as_str() {
                "cycle" => Job::Cycle {
                    machine,
                    t_hot,
                    t_cold,
                    settings,
                },
                "tls" => {
                    let lengths = (well_length(&hot), well_length(&cold));
                    let r = match (cfg.f64_opt("tls.r")?, lengths) {
                        (Some(r), _) => r,
                        (None, (Some(lh), Some(lc))) => {
                            let r = lc / lh;
                            cfg.notice(format!("tls.r not set; using L_c/L_h = {r:e}"));
                            r
                        }
                        _ => return Err(config_error("tls.r", "required unless both potentials are wells").into()),
                    };
                    positive(r, "tls.r")?;
                    Job::Tls {
                        machine,
                        t_hot,
                        t_cold,
                        r,
                        settings,
                    }
                }
                _ => {
                    let schedule = cfg.grid_or("series.xi", &limits::default_schedule())?;
                    let rel_tol = cfg.f64_or("series.rel_tol", limits::DEFAULT_REL_TOL)?;
                    let path = match cfg.string_or("series.path", "reduced_hbar").as_str() {
                        "reduced_hbar" => ScalingPath::ReducedHbar,
                        "potential" => ScalingPath::Potential,
                        other => {
                            return Err(config_error(
                                "series.path",
                                format!("expected reduced_hbar or potential, got `{other}`"),
                            )
                            .into())
                        }
                    };
                    check_schedule(&schedule)?;
                    positive(rel_tol, "series.rel_tol")?;
                    Job::ClassicalLimit {
                        machine,
                        t_hot,
                        t_cold,
                        schedule,
                        rel_tol,
                        path,
                        settings,
                    }
                }
            }
        }
        "sweep-fig2" => {
            let sweep = DeltaSweep {
                r_grid: cfg.grid("sweep.r")?,
                g_grid: cfg.grid("sweep.g")?,
                t_ratio: cfg.f64_or("sweep.t_ratio", 12.0)?,
                gamma: cfg.f64_or("sweep.gamma", 3.0)?,
                tc_policy: tc_policy(cfg, "sweep")?,
            };
            sweep.validate()?;
            Job::Fig2 {
                sweep,
                settings: solver_settings(cfg)?,
            }
        }
        "sweep-fig3" => {
            let mass = cfg.f64_or("sweep.mass", units::si::YB174_ION_MASS)?;
            let omega_ref = match cfg.has("sweep.omega_ref") {
                true => cfg.string("sweep.omega_ref")?,
                false => {
                    cfg.notice("sweep.omega_ref not set; using the default cold_gap".to_string());
                    cfg.string_or("sweep.omega_ref", "cold_gap")
                }
            };
            let omega_ref = match omega_ref.as_str() {
                "cold_gap" => OmegaRef::ColdGap,
                "lattice_site" => OmegaRef::LatticeSite,
                "trap" => OmegaRef::Trap,
                other => {
                    return Err(config_error(
                        "sweep.omega_ref",
                        format!("expected cold_gap, lattice_site or trap, got `{other}`"),
                    )
                    .into())
                }
            };
            let d = IonTrapSweep::default();
            let sweep = IonTrapSweep {
                kappa_c_grid: cfg.grid("sweep.kappa_c")?,
                omega_ratio_grid: cfg.grid("sweep.omega_ratio")?,
                kappa_h: cfg.f64_or("sweep.kappa_h", d.kappa_h)?,
                omega_h: cfg.f64_or("sweep.omega_h", d.omega_h)?,
                t_ratio: cfg.f64_or("sweep.t_ratio", d.t_ratio)?,
                nbar_c: cfg.f64_or("sweep.nbar_c", d.nbar_c)?,
                lattice: cfg.f64_or_notice("sweep.lattice", d.lattice, "lattice period a (m)")?,
                units: UnitSystem::si(mass)?,
                omega_ref,
                xi_schedule: cfg.grid_or("sweep.xi", &d.xi_schedule)?,
                rel_tol: cfg.f64_or("sweep.rel_tol", d.rel_tol)?,
            };
            sweep.validate()?;
            Job::Fig3 {
                sweep,
                settings: solver_settings(cfg)?,
            }
        }
        "optimize-g" => {
            let r = cfg.f64("optimize.r")?;
            positive(r, "optimize.r")?;
            let (t_hot, t_cold) = if cfg.has("temperature.t_hot") || cfg.has("temperature.t_cold") {
                temperatures(cfg)?
            } else {
                let ratio = cfg.f64_or("optimize.t_ratio", 12.0)?;
                tc_policy(cfg, "optimize")?.temperatures(ratio, r)?
            };
            let objective = match cfg.string_or("optimize.objective", "max_efficiency").as_str() {
                "max_efficiency" => Objective::MaxEfficiency,
                "max_extracted_work" => Objective::MaxExtractedWork,
                "max_cooling" => Objective::MaxCooling,
                "max_refrigeration_efficiency" => Objective::MaxRefrigerationEfficiency,
                other => {
                    return Err(config_error("optimize.objective", format!("unknown objective `{other}`")).into())
                }
            };
            let bounds = (cfg.f64_or("optimize.g_min", -5.0)?, cfg.f64_or("optimize.g_max", 20.0)?);
            if bounds.0 >= bounds.1 {
                return Err(config_error("optimize.g_min", "must be below optimize.g_max").into());
            }
            Job::OptimizeG {
                r,
                t_hot,
                t_cold,
                objective,
                bounds,
                settings: solver_settings(cfg)?,
            }
        }
        "audit" => {
            let seed = cfg.u64_or("audit.seed", 1)?;
            let samples = cfg.usize_or("audit.samples", 1000)?;
            if samples == 0 {
                return Err(config_error("audit.samples", "must be >= 1").into());
            }
            Job::Audit { seed, samples }
        }
        other => {
            return Err(config_error(
                "command",
                format!("unknown command `{other}` (expected one of {})", COMMANDS.join(", ")),
            )
            .into())
        }
    };
    Ok(job)
}

fn positive(v: f64, key: &str) -> Result<(), ConfigError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(config_error(key, format!("must be > 0, got {v}")))
    }
}

fn check_schedule(xi: &[f64]) -> Result<(), ConfigError> {
    if xi.iter().any(|x| *x < 1.0) || xi.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_error("series.xi", "must be strictly increasing values >= 1"));
    }
    Ok(())
}

fn unit_system(cfg: &Config) -> Result<UnitSystem, Failure> {
    let system = cfg.string("units.system")?;
    let u = match system.as_str() {
        "natural" => UnitSystem::new(cfg.f64_or("units.hbar", 1.0)?, cfg.f64_or("units.mass", 1.0)?)?,
        "si" => UnitSystem::si(cfg.f64("units.mass")?)?,
        "ytterbium" => UnitSystem::ytterbium_ion(),
        other => {
            return Err(config_error(
                "units.system",
                format!("expected natural, si or ytterbium, got `{other}`"),
            )
            .into())
        }
    };
    Ok(u)
}

fn potential(cfg: &Config, prefix: &str, units: UnitSystem) -> Result<PotentialSpec, Failure> {
    let key = |k: &str| format!("{prefix}.{k}");
    let shape = cfg.string(&key("shape"))?;
    let spec = match shape.as_str() {
        "square_well" => PotentialSpec::square_well(cfg.f64(&key("length"))?, units),
        "delta_well" => PotentialSpec::delta_well(cfg.f64(&key("length"))?, cfg.f64(&key("strength"))?, units),
        "finite_barrier" => PotentialSpec::finite_barrier(
            cfg.f64(&key("length"))?,
            cfg.f64(&key("height"))?,
            cfg.f64(&key("width"))?,
            units,
        ),
        "harmonic" => PotentialSpec::harmonic(cfg.f64(&key("omega"))?, units),
        "ion_trap" => {
            let lattice = if units == UnitSystem::NATURAL || cfg.has(&key("lattice")) {
                cfg.f64(&key("lattice"))?
            } else {
                cfg.f64_or_notice(&key("lattice"), units::si::DEFAULT_LATTICE_PERIOD, "lattice period a (m)")?
            };
            PotentialSpec::ion_trap(cfg.f64(&key("omega"))?, cfg.f64(&key("kappa"))?, lattice, units)
        }
        other => {
            return Err(config_error(
                &key("shape"),
                format!("expected square_well, delta_well, finite_barrier, harmonic or ion_trap, got `{other}`"),
            )
            .into())
        }
    };
    spec.map_err(|e| Failure::Validation(format!("`{prefix}`: {e}")))
}

fn well_length(p: &PotentialSpec) -> Option<f64> {
    match p.shape {
        qotto_core::Shape::SquareWell { length } | qotto_core::Shape::SquareWellDelta { length, .. } => Some(length),
        _ => None,
    }
}

fn temperatures(cfg: &Config) -> Result<(f64, f64), Failure> {
    let t_hot = cfg.f64("temperature.t_hot")?;
    let t_cold = cfg.f64("temperature.t_cold")?;
    positive(t_cold, "temperature.t_cold")?;
    if t_hot <= t_cold {
        return Err(config_error(
            "temperature.t_hot",
            format!("T_h must exceed T_c (T_h = {t_hot}, T_c = {t_cold})"),
        )
        .into());
    }
    Ok((t_hot, t_cold))
}

fn tc_policy(cfg: &Config, section: &str) -> Result<TcPolicy, Failure> {
    let pk = format!("{section}.tc_policy");
    let vk = format!("{section}.tc_value");
    let policy = match cfg.string_or(&pk, "hot_gap_fraction").as_str() {
        "hot_gap_fraction" => TcPolicy::HotGapFraction(cfg.f64_or(&vk, 0.2)?),
        "box_gap_fraction" => TcPolicy::BoxGapFraction(cfg.f64_or(&vk, 0.2)?),
        "fixed" => TcPolicy::Fixed(cfg.f64(&vk)?),
        other => {
            return Err(config_error(
                &pk,
                format!("expected hot_gap_fraction, box_gap_fraction or fixed, got `{other}`"),
            )
            .into())
        }
    };
    Ok(policy)
}

fn solver_settings(cfg: &Config) -> Result<DvrSettings, Failure> {
    let d = DvrSettings::default();
    let s = DvrSettings {
        rel_tol: cfg.f64_or("solver.rel_tol", d.rel_tol)?,
        max_points: cfg.usize_or("solver.max_points", d.max_points)?,
        boundary_decay: cfg.f64_or("solver.boundary_decay", d.boundary_decay)?,
        thermal_margin: cfg.f64_or("solver.thermal_margin", d.thermal_margin)?,
    };
    positive(s.rel_tol, "solver.rel_tol")?;
    positive(s.boundary_decay, "solver.boundary_decay")?;
    if s.thermal_margin < 0.0 {
        return Err(config_error("solver.thermal_margin", "must be >= 0").into());
    }
    if s.max_points < 16 {
        return Err(config_error("solver.max_points", "must be >= 16").into());
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Execution

const CYCLE_COLUMNS: [&str; 12] = [
    "W",
    "Q_h",
    "Q_c",
    "mode",
    "eta",
    "cop",
    "eta_over_carnot",
    "eta_carnot",
    "entropy_production",
    "T_h",
    "T_c",
    "n_levels",
];

fn cycle_fields(r: &CycleResult) -> Vec<Field> {
    vec![
        r.work.into(),
        r.heat_hot.into(),
        r.heat_cold.into(),
        r.mode.name().into(),
        r.eta_engine.into(),
        r.eta_refrigerator.into(),
        r.eta_over_carnot().into(),
        r.eta_carnot().into(),
        r.entropy_production.into(),
        r.t_hot.into(),
        r.t_cold.into(),
        r.per_level.len().into(),
    ]
}

fn level_table(r: &CycleResult) -> Table {
    let mut t = Table::new(&["n", "E_h", "E_c", "P_h", "P_c", "W_n", "Q_h_n", "Q_c_n"]);
    for l in &r.per_level {
        t.push(vec![
            l.n.into(),
            l.energy_hot.into(),
            l.energy_cold.into(),
            l.population_hot.into(),
            l.population_cold.into(),
            l.work.into(),
            l.heat_hot.into(),
            l.heat_cold.into(),
        ]);
    }
    t
}

const CELL_COLUMNS: [&str; 14] = [
    "W",
    "Q_h",
    "Q_c",
    "mode",
    "eta",
    "cop",
    "eta_over_carnot",
    "T_h",
    "T_c",
    "entropy_production",
    "audit_passed",
    "level_findings",
    "converged",
    "error",
];

fn sweep_table(t: &SweepTable) -> Table {
    let mut columns: Vec<&'static str> = t.axes.iter().map(|a| a.name).collect();
    columns.extend(CELL_COLUMNS);
    let mut out = Table::new(&columns);
    for (i, c) in t.cells.iter().enumerate() {
        let mut row: Vec<Field> = t.coordinates(i).into_iter().map(Field::from).collect();
        row.extend(cell_fields(c));
        out.push(row);
    }
    out
}

fn cell_fields(c: &Cell) -> Vec<Field> {
    let sigma = -c.heat_hot / c.t_hot - c.heat_cold / c.t_cold;
    vec![
        c.work.into(),
        c.heat_hot.into(),
        c.heat_cold.into(),
        c.mode.map(|m| m.name()).unwrap_or("").into(),
        c.eta.into(),
        c.cop.into(),
        c.eta_over_carnot.into(),
        c.t_hot.into(),
        c.t_cold.into(),
        sigma.into(),
        c.audit_passed.into(),
        c.level_findings.into(),
        c.converged.map(|b| b.to_string()).unwrap_or_default().into(),
        c.error.clone().unwrap_or_default().into(),
    ]
}

fn sweep_results(name: &str, t: &SweepTable, out: &mut Output) {
    let mut modes = Map::new();
    for c in &t.cells {
        let k = c.mode.map(|m| m.name()).unwrap_or("Error").to_string();
        let n = modes.get(&k).and_then(Value::as_u64).unwrap_or(0) + 1;
        modes.insert(k, json!(n));
    }
    let failed = t.cells.iter().filter(|c| c.error.is_some()).count();
    let unaudited = t.cells.iter().filter(|c| c.error.is_none() && !c.audit_passed).count();
    out.results.insert(
        name.to_string(),
        json!({
            "metadata": t.metadata.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "mode_counts": modes,
            "failed_cells": failed,
        }),
    );
    if unaudited > 0 {
        out.violations.push(format!("{name}: {unaudited} cell(s) failed the cycle audit"));
    }
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
        Parity::None => "none",
    }
}

fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(&["n", "energy", "parity"]);
    for (k, (e, p)) in s.energies.iter().zip(&s.parities).enumerate() {
        t.push(vec![(k + 1).into(), (*e).into(), parity_name(*p).into()]);
    }
    t
}

fn spectrum_json(s: &Spectrum) -> Value {
    json!({
        "solver": s.solver.name(),
        "levels": s.len(),
        "est_error": s.est_error,
        "grid": s.grid.map(|g| json!({"x_min": g.x_min, "x_max": g.x_max, "points": g.points})),
    })
}

impl Job {
    fn name(&self) -> &'static str {
        match self {
            Job::Spectrum { .. } => "spectrum",
            Job::Cycle { .. } => "cycle",
            Job::Tls { .. } => "tls",
            Job::ClassicalLimit { .. } => "classical-limit",
            Job::Fig2 { .. } => "sweep-fig2",
            Job::Fig3 { .. } => "sweep-fig3",
            Job::OptimizeG { .. } => "optimize-g",
            Job::Audit { .. } => "audit",
        }
    }

    fn file_stem(&self) -> String {
        self.name().replace('-', "_")
    }

    fn settings(&self) -> Option<DvrSettings> {
        match self {
            Job::Spectrum { settings, .. }
            | Job::Cycle { settings, .. }
            | Job::Tls { settings, .. }
            | Job::ClassicalLimit { settings, .. }
            | Job::Fig2 { settings, .. }
            | Job::Fig3 { settings, .. }
            | Job::OptimizeG { settings, .. } => Some(*settings),
            Job::Audit { .. } => None,
        }
    }

    fn execute(&self) -> Result<Output, Failure> {
        let stem = self.file_stem();
        let mut out = Output::default();
        match self {
            Job::Spectrum {
                potential,
                n_levels,
                temperature,
                settings,
            } => {
                let s = match (n_levels, temperature) {
                    (_, Some(t)) => spectrum::solve_thermal(potential, *t, n_levels.unwrap_or(2), settings)?,
                    (Some(n), None) => spectrum::solve(potential, *n, settings)?,
                    (None, None) => unreachable!("planned with a level count or a temperature"),
                };
                out.results.insert("spectrum".into(), spectrum_json(&s));
                out.tables.push((stem, spectrum_table(&s)));
            }
            Job::Cycle {
                machine,
                t_hot,
                t_cold,
                settings,
            } => {
                let (h, c) = machine.spectra(*t_hot, *t_cold, settings)?;
                let r = cycle::run_otto(&h, &c, *t_hot, *t_cold)?;
                let mut t = Table::new(&CYCLE_COLUMNS);
                t.push(cycle_fields(&r));
                out.audit("cycle", &cycle::carnot_audit(&r, *t_hot, *t_cold));
                out.results.insert("hot_spectrum".into(), spectrum_json(&h));
                out.results.insert("cold_spectrum".into(), spectrum_json(&c));
                out.tables.push((stem.clone(), t));
                out.tables.push((format!("{stem}_levels"), level_table(&r)));
            }
            Job::Tls {
                machine,
                t_hot,
                t_cold,
                r,
                settings,
            } => {
                let (h, c) = machine.spectra(*t_hot, *t_cold, settings)?;
                let res = cycle::run_otto(&h, &c, *t_hot, *t_cold)?;
                let s = cycle::tls_summary(&h, &c, *t_hot, *t_cold, *r)?;
                let mut t = Table::new(&[
                    "r",
                    "delta_hot",
                    "delta_cold",
                    "delta_cold_box",
                    "gap_shift",
                    "eta_tls",
                    "eta",
                    "extraction_condition_met",
                    "p3_hot",
                    "p3_cold",
                    "two_level_regime",
                    "gap_identity_residual",
                    "W",
                    "Q_h",
                    "Q_c",
                    "mode",
                    "T_h",
                    "T_c",
                ]);
                t.push(vec![
                    (*r).into(),
                    s.delta_hot.into(),
                    s.delta_cold.into(),
                    s.delta_cold_box.into(),
                    s.gap_shift.into(),
                    s.eta_tls.into(),
                    res.eta_engine.into(),
                    s.extraction_condition_met.into(),
                    s.third_level_population.0.into(),
                    s.third_level_population.1.into(),
                    s.two_level_regime.into(),
                    s.gap_identity_residual.into(),
                    res.work.into(),
                    res.heat_hot.into(),
                    res.heat_cold.into(),
                    res.mode.name().into(),
                    res.t_hot.into(),
                    res.t_cold.into(),
                ]);
                if !s.two_level_regime {
                    log::warn!(
                        "third-level populations {:e} (hot), {:e} (cold) exceed 1e-3; the two-level reading is approximate",
                        s.third_level_population.0,
                        s.third_level_population.1
                    );
                }
                out.audit("tls", &cycle::carnot_audit(&res, *t_hot, *t_cold));
                out.tables.push((stem, t));
            }
            Job::ClassicalLimit {
                machine,
                t_hot,
                t_cold,
                schedule,
                rel_tol,
                path,
                settings,
            } => {
                let results = schedule
                    .par_iter()
                    .map(|&xi| limits::scaled_cycle(machine, *t_hot, *t_cold, xi, *path, settings))
                    .collect::<Result<Vec<_>, _>>()?;
                let series = ScalingSeries::from_results(schedule.clone(), results, *rel_tol)?;
                out.tables.push((stem, series_table(&series)));
                for (xi, r) in series.xi_values.iter().zip(&series.results) {
                    out.audit(&format!("xi = {xi}"), &cycle::carnot_audit(r, *t_hot, *t_cold));
                }
                out.results.insert("series".into(), series_json(&series));
                if !series.converged {
                    log::warn!(
                        "ξ-series not converged: last relative change {:e} >= {:e}",
                        series.last_change,
                        series.rel_tol
                    );
                }
            }
            Job::Fig2 { sweep, settings } => {
                let cells = sweep
                    .points()
                    .par_iter()
                    .map(|&(r, g)| sweep.evaluate(r, g, settings))
                    .collect::<Result<Vec<_>, _>>()?;
                let (classical, quantum) = sweep.assemble(cells)?;
                sweep_results("classical", &classical, &mut out);
                sweep_results("quantum", &quantum, &mut out);
                out.tables.push((format!("{stem}_classical"), sweep_table(&classical)));
                out.tables.push((format!("{stem}_quantum"), sweep_table(&quantum)));
            }
            Job::Fig3 { sweep, settings } => {
                let (classical, quantum, series) = run_fig3(sweep, settings)?;
                sweep_results("classical", &classical, &mut out);
                sweep_results("quantum", &quantum, &mut out);
                out.tables.push((format!("{stem}_classical"), sweep_table(&classical)));
                out.tables.push((format!("{stem}_quantum"), sweep_table(&quantum)));
                out.tables.push((format!("{stem}_series"), series));
            }
            Job::OptimizeG {
                r,
                t_hot,
                t_cold,
                objective,
                bounds,
                settings,
            } => {
                let o = explore::optimize_g(*r, *t_hot, *t_cold, *objective, *bounds, settings)?;
                let mut columns = vec!["r", "g_star", "objective"];
                columns.extend(CYCLE_COLUMNS);
                let mut t = Table::new(&columns);
                let mut row = vec![(*r).into(), o.argmax.into(), o.objective_value.into()];
                row.extend(cycle_fields(&o.result));
                t.push(row);
                let mut trace = Table::new(&["g", "objective", "feasible"]);
                for (g, v) in &o.trace {
                    trace.push(vec![(*g).into(), (*v).into(), v.is_some().into()]);
                }
                let constrained = matches!(
                    objective,
                    Objective::MaxEfficiency | Objective::MaxRefrigerationEfficiency
                );
                out.results.insert(
                    "optimization".into(),
                    json!({
                        "objective": o.objective_kind.name(),
                        "g_star": o.argmax,
                        "objective_value": o.objective_value,
                        "w_floor": o.w_floor,
                        "w_floor_constraint_active": constrained,
                        "g_units": "g_cri = 2 hbar^2 / (m L_c)",
                        "evaluations": o.trace.len(),
                    }),
                );
                out.audit("optimum", &cycle::carnot_audit(&o.result, *t_hot, *t_cold));
                out.tables.push((stem.clone(), t));
                out.tables.push((format!("{stem}_trace"), trace));
            }
            Job::Audit { seed, samples } => {
                let suite = suite::random_suite(*seed, *samples);
                let mut t = Table::new(&[
                    "sample",
                    "n_levels",
                    "T_h",
                    "T_c",
                    "W",
                    "Q_h",
                    "Q_c",
                    "mode",
                    "eta",
                    "eta_carnot",
                    "entropy_production",
                    "hard_violations",
                    "level_findings",
                    "work_extracting_levels",
                ]);
                let mut level_checks = Map::new();
                for (i, s) in suite.iter().enumerate() {
                    let r = &s.result;
                    t.push(vec![
                        (i + 1).into(),
                        s.machine.e_hot.len().into(),
                        r.t_hot.into(),
                        r.t_cold.into(),
                        r.work.into(),
                        r.heat_hot.into(),
                        r.heat_cold.into(),
                        r.mode.name().into(),
                        r.eta_engine.into(),
                        r.eta_carnot().into(),
                        r.entropy_production.into(),
                        s.audit.hard_violations().into(),
                        s.audit.level_findings().into(),
                        s.audit.work_extracting_levels.into(),
                    ]);
                    for f in &s.audit.findings {
                        let n = level_checks.get(f.check).and_then(Value::as_u64).unwrap_or(0) + 1;
                        level_checks.insert(f.check.to_string(), json!(n));
                    }
                    out.audit(&format!("sample {}", i + 1), &s.audit);
                }
                out.results.insert(
                    "suite".into(),
                    json!({
                        "seed": seed,
                        "samples": samples,
                        "generator": "ChaCha8",
                        "engines": suite.iter().filter(|s| s.result.mode == qotto_core::Mode::Engine).count(),
                        "findings_by_check": level_checks,
                    }),
                );
                out.tables.push((stem, t));
            }
        }
        Ok(out)
    }
}

fn series_table(s: &ScalingSeries) -> Table {
    let mut columns = vec!["xi", "inv_xi", "W_over_xi2"];
    columns.extend(CYCLE_COLUMNS);
    let mut t = Table::new(&columns);
    for (xi, r) in s.xi_values.iter().zip(&s.results) {
        let mut row = vec![(*xi).into(), (1.0 / xi).into(), r.work.into()];
        row.extend(cycle_fields(r));
        t.push(row);
    }
    t
}

fn series_json(s: &ScalingSeries) -> Value {
    json!({
        "converged": s.converged,
        "last_change": s.last_change,
        "rel_tol": s.rel_tol,
        "classical_work": s.classical_work,
    })
}

/// The ion-trap sweep with every (cell, ξ) cycle evaluated as its own task.
fn run_fig3(sweep: &IonTrapSweep, settings: &DvrSettings) -> Result<(SweepTable, SweepTable, Table), Failure> {
    let points = sweep.points();
    let prepared: Vec<Result<(Machine, f64, f64), Error>> = points
        .par_iter()
        .map(|&(k, w)| {
            let m = sweep.machine(k, w)?;
            let (t_h, t_c) = sweep.temperatures(&m, settings)?;
            Ok((m, t_h, t_c))
        })
        .collect();
    let tasks: Vec<(usize, f64)> = (0..points.len())
        .filter(|&i| prepared[i].is_ok())
        .flat_map(|i| sweep.xi_schedule.iter().map(move |&xi| (i, xi)))
        .collect();
    let mut done: Vec<Result<CycleResult, Error>> = tasks
        .par_iter()
        .map(|&(i, xi)| {
            let (m, t_h, t_c) = prepared[i].as_ref().expect("filtered");
            limits::scaled_cycle(m, *t_h, *t_c, xi, ScalingPath::ReducedHbar, settings)
        })
        .collect();
    done.reverse();

    let mut series_rows = Table::new(&["kappa_c", "omega_h_over_omega_c", "xi", "inv_xi", "W_over_xi2", "mode", "n_levels"]);
    let mut cells = Vec::with_capacity(points.len());
    for (i, &(k, w)) in points.iter().enumerate() {
        let (t_h, t_c) = match &prepared[i] {
            Ok((_, t_h, t_c)) => (*t_h, *t_c),
            Err(e) => {
                cells.push((Cell::failed(e, f64::NAN, f64::NAN), Cell::failed(e, f64::NAN, f64::NAN)));
                continue;
            }
        };
        let mine: Vec<Result<CycleResult, Error>> = sweep.xi_schedule.iter().map(|_| done.pop().expect("one per task")).collect();
        let results: Result<Vec<CycleResult>, Error> = mine.into_iter().collect();
        let series = results.and_then(|r| ScalingSeries::from_results(sweep.xi_schedule.clone(), r, sweep.rel_tol));
        match series {
            Ok(s) => {
                for (xi, r) in s.xi_values.iter().zip(&s.results) {
                    series_rows.push(vec![
                        k.into(),
                        w.into(),
                        (*xi).into(),
                        (1.0 / xi).into(),
                        r.work.into(),
                        r.mode.name().into(),
                        r.per_level.len().into(),
                    ]);
                }
                let quantum = if s.xi_values[0] == 1.0 {
                    Cell::from_result(&s.results[0])
                } else {
                    let m = prepared[i].as_ref().expect("ok").0;
                    match m.run(t_h, t_c, settings) {
                        Ok(r) => Cell::from_result(&r),
                        Err(e) => Cell::failed(&e, t_h, t_c),
                    }
                };
                let mut classical = Cell::from_result(s.results.last().expect("nonempty schedule"));
                classical.converged = Some(s.converged);
                cells.push((classical, quantum));
            }
            Err(e) => {
                log::warn!("cell kappa_c = {k}, omega_h/omega_c = {w}: {e}");
                cells.push((Cell::failed(&e, t_h, t_c), Cell::failed(&e, t_h, t_c)));
            }
        }
    }
    let (c, q) = sweep.assemble(cells)?;
    Ok((c, q, series_rows))
}
