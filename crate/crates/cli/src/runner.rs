//! Executes scenarios and the verification suite, writing every artifact
//! atomically into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use phasewig_core::io::{self, Sidecar};
use phasewig_core::numgrid::{PhaseGrid, RealField};
use phasewig_core::schrod::{equivalence_sweep, solve_config};
use phasewig_core::states::Wavefunction;
use phasewig_core::wigner::{
    covariant_wigner, negativity_report, wigner_direct, wigner_tegmen, WignerField,
};
use phasewig_core::Error;

use crate::checks::{self, Check, SuiteConfig};
use crate::scenario::{Format, Scenario, TaskKind};
use crate::summary::{GridInfo, Status, Summary};

/// Default number of eigenpairs for `spectrum` and `equivalence-sweep`.
pub const DEFAULT_LEVELS: usize = 5;
/// Largest phase-space residual accepted by `equivalence-sweep`.
pub const SWEEP_GATE: f64 = 1e-5;

/// Exit status for a core error: malformed input is a validation failure,
/// everything the numerics detect is a gate failure.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::InvalidSpec(_)
        | Error::ShapeMismatch(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::Precondition(_)
        | Error::DegreeOverflow { .. }
        | Error::NonConfining(_)
        | Error::Format(_)
        | Error::Io(_) => Status::ValidationFailure,
        Error::BoundaryLeakage { .. }
        | Error::Domain { .. }
        | Error::Realness(_)
        | Error::NotClosed(_)
        | Error::PathOutOfDomain { .. }
        | Error::NonPeriodicGradient(_) => Status::NumericalGateFailure,
    }
}

pub struct Outcome {
    pub summary: Summary,
    /// Where `summary.json` was written; `None` when the scenario never
    /// loaded far enough to name a directory.
    pub out_dir: Option<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        self.summary.exit_code
    }
}

struct Ctx<'a> {
    dir: &'a Path,
    summary: &'a mut Summary,
}

impl Ctx<'_> {
    fn record(&mut self, name: &str) {
        self.summary.files.push(name.to_string());
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> phasewig_core::Result<()> {
        io::write_atomic(&self.dir.join(name), bytes)?;
        self.record(name);
        Ok(())
    }
}

pub fn run_scenario(path: &Path) -> Outcome {
    let start = Instant::now();
    let scenario = match Scenario::load(path) {
        Ok(s) => s,
        Err(e) => {
            let mut summary = Summary::new("unknown");
            summary.set_status(Status::ValidationFailure, Some(e.0));
            return Outcome { summary, out_dir: None };
        }
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let dir = scenario.output_dir(base);
    let mut summary = Summary::new(scenario.task.kind.name());
    summary.scenario = Some(path.display().to_string());
    let result = execute(&scenario, base, &dir, &mut summary);
    finish(&mut summary, result, start);
    if let Err(e) = summary.write(&dir) {
        summary.set_status(Status::ValidationFailure, Some(format!("writing summary: {e}")));
    }
    Outcome { summary, out_dir: Some(dir) }
}

/// Runs the verification suite and writes `checks.csv` and `summary.json`.
pub fn run_verify(cfg: &SuiteConfig, dir: &Path) -> Outcome {
    let start = Instant::now();
    let mut summary = Summary::new(TaskKind::Verify.name());
    let result = verify_into(cfg, &mut Ctx { dir, summary: &mut summary });
    finish(&mut summary, result, start);
    if let Err(e) = summary.write(dir) {
        summary.set_status(Status::ValidationFailure, Some(format!("writing summary: {e}")));
    }
    Outcome { summary, out_dir: Some(dir.to_path_buf()) }
}

fn finish(summary: &mut Summary, result: phasewig_core::Result<()>, start: Instant) {
    match result {
        Ok(()) => {
            let failed = summary.checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                summary.set_status(Status::NumericalGateFailure, Some(format!("{failed} check(s) failed")));
            }
        }
        Err(e) => summary.set_status(status_of(&e), Some(e.to_string())),
    }
    summary.wall_time_s = start.elapsed().as_secs_f64();
}

fn execute(s: &Scenario, base: &Path, dir: &Path, summary: &mut Summary) -> phasewig_core::Result<()> {
    let grid = s.phase_grid().map_err(|e| Error::InvalidSpec(e.0))?;
    summary.grid = Some(GridInfo::from(&grid));
    let mut ctx = Ctx { dir, summary };
    match s.task.kind {
        TaskKind::WignerDirect | TaskKind::WignerTegmen | TaskKind::WignerCovariant => wigner_task(s, base, &grid, &mut ctx),
        TaskKind::Spectrum => spectrum_task(s, &grid, &mut ctx),
        TaskKind::EquivalenceSweep => sweep_task(s, &grid, &mut ctx),
        TaskKind::Verify => {
            let cfg = SuiteConfig {
                seed: s.task.seed.unwrap_or(checks::DEFAULT_SEED),
                grid_n: s.grid.q_n,
                broken_connection: s.task.broken_connection.unwrap_or(false),
            };
            verify_into(&cfg, &mut ctx)
        }
    }
}

fn wigner_task(s: &Scenario, base: &Path, grid: &PhaseGrid, ctx: &mut Ctx) -> phasewig_core::Result<()> {
    let state = s.state.as_ref().expect("validated");
    ctx.summary.provenance.state = Some(state.label());
    let psi = state.wavefunction(grid, base)?;
    let (w, f_text) = match s.task.kind {
        TaskKind::WignerDirect => (wigner_direct(&psi, grid)?, None),
        TaskKind::WignerTegmen => {
            let fs = state.factor_state(grid.hbar)?.expect("validated");
            (wigner_tegmen(&fs, grid)?, None)
        }
        _ => {
            let f = s.generating_function().expect("validated");
            let convention = s.task.convention.unwrap_or_default();
            let w = covariant_wigner(&psi, &f, grid, convention.into())?;
            (w, Some(f.text().to_string()))
        }
    };
    ctx.summary.provenance.route = Some(w.route.name().to_string());
    ctx.summary.provenance.generating_function = f_text.clone();
    if s.task.kind != TaskKind::WignerDirect {
        let reference = wigner_direct(&psi, grid)?;
        ctx.summary.diagnostics.insert("max_abs_diff_vs_direct".into(), w.max_abs_diff(&reference)?);
    }
    wigner_diagnostics(&w, &psi, ctx);
    write_plane(s, "W", &w.values, "wigner", w.route.name(), f_text, state.level(), ctx)
}

fn wigner_diagnostics(w: &WignerField, psi: &Wavefunction, ctx: &mut Ctx) {
    let r = negativity_report(w);
    let d = &mut ctx.summary.diagnostics;
    d.insert("normalization".into(), w.total());
    d.insert("imag_max".into(), w.imag_max);
    d.insert("input_leakage".into(), w.leakage);
    d.insert("input_norm".into(), psi.norm());
    d.insert("min".into(), r.min);
    d.insert("min_q".into(), r.at.0);
    d.insert("min_p".into(), r.at.1);
    d.insert("max".into(), w.values.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)));
    d.insert("negative_fraction".into(), r.negative_fraction);
}

#[allow(clippy::too_many_arguments)]
fn write_plane(
    s: &Scenario,
    stem: &str,
    field: &RealField,
    quantity: &str,
    source: &str,
    generating: Option<String>,
    level: Option<usize>,
    ctx: &mut Ctx,
) -> phasewig_core::Result<()> {
    if s.wants(Format::Csv) {
        ctx.write_bytes(&format!("{stem}.csv"), io::csv_string(field).as_bytes())?;
    }
    if s.wants(Format::Bin) {
        ctx.write_bytes(&format!("{stem}.bin"), &io::binary_bytes(field))?;
    }
    if s.wants(Format::Pgm) {
        let (bytes, range) = io::pgm_bytes(field)?;
        ctx.write_bytes(&format!("{stem}.pgm"), &bytes)?;
        ctx.summary.heatmaps.pgm = Some(range);
    }
    if s.wants(Format::Ppm) {
        let (bytes, range) = io::ppm_bytes(field)?;
        ctx.write_bytes(&format!("{stem}.ppm"), &bytes)?;
        ctx.summary.heatmaps.ppm = Some(range);
    }
    let mut sidecar = Sidecar::new(field, quantity, source);
    sidecar.generating_function = generating;
    sidecar.level = level;
    let name = format!("{stem}.json");
    sidecar.write(&ctx.dir.join(&name))?;
    ctx.record(&name);
    Ok(())
}

fn spectrum_task(s: &Scenario, grid: &PhaseGrid, ctx: &mut Ctx) -> phasewig_core::Result<()> {
    let (v, mass) = s.potential().expect("validated");
    ctx.summary.provenance.potential = Some(v.coeffs().to_vec());
    let levels = s.task.levels.unwrap_or(DEFAULT_LEVELS);
    let pairs = solve_config(&v, mass, grid, levels)?;
    let mut csv = String::from("level,energy,residual\n");
    for (n, p) in pairs.iter().enumerate() {
        csv.push_str(&format!("{n},{:e},{:e}\n", p.energy, p.residual));
        ctx.summary.diagnostics.insert(format!("energy_{n:02}"), p.energy);
        ctx.summary.diagnostics.insert(format!("residual_{n:02}"), p.residual);
        if s.wants(Format::Bin) {
            let stem = format!("psi_{n:02}");
            ctx.write_bytes(&format!("{stem}.bin"), &io::binary_bytes(p.state.field()))?;
            let mut sidecar = Sidecar::new(p.state.field(), "eigenstate", "spectrum");
            sidecar.level = Some(n);
            sidecar.write(&ctx.dir.join(format!("{stem}.json")))?;
            ctx.record(&format!("{stem}.json"));
        }
    }
    ctx.write_bytes("spectrum.csv", csv.as_bytes())
}

fn sweep_task(s: &Scenario, grid: &PhaseGrid, ctx: &mut Ctx) -> phasewig_core::Result<()> {
    let (v, mass) = s.potential().expect("validated");
    ctx.summary.provenance.potential = Some(v.coeffs().to_vec());
    let fs = s
        .task
        .generating_list
        .iter()
        .map(|t| phasewig_core::symcalc::GeneratingFunction::parse(t))
        .collect::<phasewig_core::Result<Vec<_>>>()?;
    let levels = s.task.levels.unwrap_or(DEFAULT_LEVELS);
    let report = equivalence_sweep(&v, mass, grid, &fs, levels)?;
    ctx.write_bytes("sweep.csv", report.to_csv().as_bytes())?;
    let d = &mut ctx.summary.diagnostics;
    d.insert("max_phase_residual".into(), report.max_phase_residual());
    d.insert("max_integrability".into(), report.cells.iter().map(|c| c.integrability).fold(0.0, f64::max));
    d.insert("max_commutator".into(), report.cells.iter().map(|c| c.commutator).fold(0.0, f64::max));
    for c in &report.cells {
        let value = if c.error.is_some() { f64::NAN } else { c.phase_residual };
        ctx.summary.checks.push(Check {
            name: format!("phase-space residual, f = {}, n = {}", c.generating, c.level),
            criterion: None,
            value,
            threshold: SWEEP_GATE,
            relation: checks::Relation::Below,
            pass: value < SWEEP_GATE,
        });
    }
    Ok(())
}

fn verify_into(cfg: &SuiteConfig, ctx: &mut Ctx) -> phasewig_core::Result<()> {
    let grid = cfg.grid()?;
    ctx.summary.grid = Some(GridInfo::from(&grid));
    ctx.summary.seed = Some(cfg.seed);
    if cfg.broken_connection {
        ctx.summary.provenance.generating_function = Some("broken connection A_q = p, A_p = q".into());
    }
    let list = checks::run_suite(cfg);
    let mut csv = String::from("criterion,name,value,threshold,relation,pass\n");
    for c in &list {
        let crit = c.criterion.map(|k| k.to_string()).unwrap_or_default();
        let rel = serde_json::to_value(c.relation).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        csv.push_str(&format!("{crit},\"{}\",{:e},{:e},{rel},{}\n", c.name, c.value, c.threshold, c.pass));
    }
    ctx.write_bytes("checks.csv", csv.as_bytes())?;
    ctx.summary.checks = list;
    Ok(())
}
