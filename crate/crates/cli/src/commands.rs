//! The pipeline commands. Each one writes its files under the output prefix
//! first and then reports the failure, if any, that sets the exit status.

use std::path::Path;

use ricci_core::exprfn::EvalError;
use ricci_core::hypersurface::{gauss_curvatures, GraphEmbedding, HypersurfaceError};
use ricci_core::numerics::uniform_grid;
use ricci_core::potential::{
    check_global, fold_curve, phase_portrait, saddle_report, solve_separatrix, GlobalReport,
    HaltReason, IntegrationOptions, PotentialError, SaddleReport, SurfaceF,
};
use ricci_core::reconstruct::{self, verify_ricci, ReconstructError, SolveError, SolveOptions, VERIFY_FLOOR};
use ricci_core::rotsym::{definiteness_check, MetricProfile, RotSymError, RotSymTensor, Verdict};
use thiserror::Error;

use crate::config::{ConfigError, ProblemConfig};
use crate::output::{with_suffix, Columns, OutputError, Report, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Analyze,
    Verify,
    Hypersurface,
    Portrait,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Analyze => "analyze",
            Command::Verify => "verify",
            Command::Hypersurface => "hypersurface",
            Command::Portrait => "portrait",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    /// The tensor fails the definiteness gate.
    #[error("{0}")]
    Validation(Verdict),
    #[error("{0}")]
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Output(_) => 1,
            RunError::Validation(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }

    /// Short tag printed in front of the reason.
    pub fn category(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Output(_) => "io",
            RunError::Validation(_) => "validation",
            RunError::Numerical(_) => "numerical",
        }
    }
}

macro_rules! numerical_from {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Numerical(e.to_string())
            }
        }
    )*};
}

numerical_from!(EvalError, RotSymError, PotentialError, ReconstructError, HypersurfaceError);

impl From<SolveError> for RunError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Validation(v) => RunError::Validation(v),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

/// Intervals of the definiteness scan.
const SCAN_INTERVALS: usize = 1000;

pub fn run(command: Command, cfg: &ProblemConfig, prefix: &Path) -> Result<(), RunError> {
    match command {
        Command::Solve => solve(cfg, prefix),
        Command::Analyze => analyze(cfg, prefix),
        Command::Verify => verify(cfg, prefix),
        Command::Hypersurface => hypersurface(cfg, prefix),
        Command::Portrait => portrait(cfg, prefix),
    }
}

fn tensor(cfg: &ProblemConfig) -> Result<RotSymTensor, RunError> {
    let (phi, psi) = cfg.require_phi_psi()?;
    let t_max = cfg.require_t_max()?;
    Ok(RotSymTensor::from_exprs(cfg.n, phi, psi, t_max)?)
}

fn validated(tensor: &RotSymTensor) -> Result<Verdict, RunError> {
    let verdict = definiteness_check(tensor, SCAN_INTERVALS)?;
    if verdict.is_definite() {
        Ok(verdict)
    } else {
        Err(RunError::Validation(verdict))
    }
}

fn problem_lines(report: &mut Report, command: Command, cfg: &ProblemConfig, tensor: &RotSymTensor) {
    report.line("command", command.name());
    report.line("n", cfg.n);
    if let (Some(phi), Some(psi)) = (&cfg.phi, &cfg.psi) {
        report.line("phi", phi);
        report.line("psi", psi);
    }
    report.number("t_max", tensor.t_max);
    report.number("step", cfg.step);
}

fn saddle_lines(report: &mut Report, rep: &SaddleReport) {
    report.line("classification", format!("{:?}", rep.classification));
    report.number("lambda1", rep.lambda1);
    report.number("lambda2", rep.lambda2);
    report.number("w2", rep.w2);
    report.number("w2_other", rep.w2_other);
    report.number("w3", rep.series.w3);
    report.line("separatrix_is_stable", rep.separatrix_is_stable);
    report.number("fold_leading", rep.fold_leading);
    report.number("fold_leading_alt", rep.fold_leading_alt);
}

fn global_lines(report: &mut Report, g: &GlobalReport) {
    report.number("regularity_margin", g.regularity_margin);
    report.number("regularity_argmin", g.regularity_argmin);
    report.number("fold_margin", g.fold_margin);
    report.number("fold_argmin", g.fold_argmin);
    match g.fold_distance {
        Some(d) => report.number("fold_distance", d),
        None => report.line("fold_distance", "none"),
    }
    report.line("global_verdict", &g.verdict);
}

/// Writes the report with its final `status` line and turns a failure
/// reason into the matching error.
fn finish(mut report: Report, prefix: &Path, suffix: &str, failure: Option<String>) -> Result<(), RunError> {
    report.line("status", failure.as_deref().unwrap_or("ok"));
    report.write(&with_suffix(prefix, suffix))?;
    match failure {
        Some(reason) => Err(RunError::Numerical(reason)),
        None => Ok(()),
    }
}

fn solve(cfg: &ProblemConfig, prefix: &Path) -> Result<(), RunError> {
    let tensor = tensor(cfg)?;
    let opts = SolveOptions {
        step: cfg.step,
        delta: cfg.delta,
        t_lo: None,
        grid_size: SCAN_INTERVALS,
    };
    let sol = reconstruct::solve(&tensor, &opts)?;
    let surface = SurfaceF::from_tensor(&tensor);
    let drift = sol.curve.max_constraint(&surface)?;
    let rec = &sol.reconstruction;
    let prof = &rec.profile;
    let fwd = prof.forward_tensor()?;

    let mut table = Table::new(&["t", "w", "p", "r", "rp", "f", "fp", "res_rr", "res_tt"]);
    for (i, &t) in prof.grid.iter().enumerate() {
        let res_rr = fwd.phi[i] - tensor.phi.value(t)?;
        let res_tt = t * t * (fwd.psi[i] - tensor.psi.value(t)?);
        table.push(&[t, rec.w[i], rec.p[i], prof.r[i], prof.rp[i], prof.f[i], prof.fp[i], res_rr, res_tt]);
    }
    table.write(&with_suffix(prefix, "_solution.csv"))?;

    let mut report = Report::default();
    problem_lines(&mut report, Command::Solve, cfg, &tensor);
    report.line("verdict", &sol.verdict);
    match &sol.saddle {
        Some(rep) => saddle_lines(&mut report, rep),
        None => report.line("saddle", "none (quadrature branch)"),
    }
    report.line("halt", &sol.curve.halt);
    report.line("samples", prof.grid.len());
    report.number("constraint_max", drift);
    report.number("residual_r", rec.residual_r);
    report.number("residual_f", rec.residual_f);
    report.number("ricci_residual_rr", rec.ricci_residuals.radial);
    report.number("ricci_residual_tt", rec.ricci_residuals.tangential);
    report.number("verify_lo", rec.t_lo);
    report.number("verify_hi", *prof.grid.last().unwrap());
    if let Some(g) = &sol.global {
        global_lines(&mut report, g);
    }

    let failure = if sol.curve.halt != HaltReason::ReachedEnd {
        Some(sol.curve.halt.to_string())
    } else if drift > cfg.constraint_tol {
        Some(format!("constraint drift {drift:e} exceeds {:e}", cfg.constraint_tol))
    } else if rec.ricci_residuals.max() > cfg.residual_tol {
        Some(format!(
            "ricci residual {:e} exceeds {:e}",
            rec.ricci_residuals.max(),
            cfg.residual_tol
        ))
    } else {
        None
    };
    finish(report, prefix, "_report.txt", failure)
}

fn analyze(cfg: &ProblemConfig, prefix: &Path) -> Result<(), RunError> {
    let tensor = tensor(cfg)?;
    let verdict = validated(&tensor)?;
    let mut report = Report::default();
    problem_lines(&mut report, Command::Analyze, cfg, &tensor);
    report.line("verdict", verdict);
    if cfg.n == 2 {
        report.line("saddle", "none (quadrature branch)");
        return finish(report, prefix, "_analysis.txt", None);
    }
    let surface = SurfaceF::from_tensor(&tensor);
    let delta = cfg.delta_for(tensor.t_max);
    let (rep, curve) = solve_separatrix(&surface, delta, &IntegrationOptions::new(cfg.step, tensor.t_max))?;
    let global = check_global(&surface, &curve)?;

    let mut table = Table::new(&["t", "w_lower", "w_upper"]);
    for t in uniform_grid(0.0, tensor.t_max, cfg.step) {
        match fold_curve(&surface, t)?.as_slice() {
            [w] => table.push(&[t, *w, *w]),
            [lo, hi] => table.push(&[t, *lo, *hi]),
            _ => {}
        }
    }
    table.write(&with_suffix(prefix, "_fold.csv"))?;

    saddle_lines(&mut report, &rep);
    report.line("halt", &curve.halt);
    global_lines(&mut report, &global);
    finish(report, prefix, "_analysis.txt", None)
}

fn portrait(cfg: &ProblemConfig, prefix: &Path) -> Result<(), RunError> {
    let tensor = tensor(cfg)?;
    if cfg.n < 3 {
        return Err(ConfigError::Invalid("portrait needs n >= 3".into()).into());
    }
    validated(&tensor)?;
    let surface = SurfaceF::from_tensor(&tensor);
    let rep = saddle_report(&surface)?;
    let delta = cfg.delta_for(tensor.t_max);
    let portrait = phase_portrait(&surface, &rep, delta, cfg.step, tensor.t_max)?;

    let mut table = Table::new(&["branch", "t", "w", "p", "F"]);
    for b in &portrait.branches {
        for row in &b.rows {
            table.push_labeled(b.label, row);
        }
    }
    for (label, branch) in [("fold-lower", &portrait.fold_lower), ("fold-upper", &portrait.fold_upper)] {
        for &[t, w] in branch.iter() {
            let f = surface.eval(t, w, 0.0)?.f;
            table.push_labeled(label, &[t, w, 0.0, f]);
        }
    }
    table.write(&with_suffix(prefix, "_portrait.csv"))?;

    let mut report = Report::default();
    problem_lines(&mut report, Command::Portrait, cfg, &tensor);
    saddle_lines(&mut report, &rep);
    for b in &portrait.branches {
        report.line(&format!("halt_{}", b.label), &b.halt);
    }
    finish(report, prefix, "_portrait.txt", None)
}

fn hypersurface(cfg: &ProblemConfig, prefix: &Path) -> Result<(), RunError> {
    let h = cfg.h.clone().ok_or(ConfigError::Missing("h"))?;
    let r_max = cfg.r_max.ok_or(ConfigError::Missing("r_max"))?;
    let emb = GraphEmbedding::new(cfg.n, h, r_max)?;
    let mut table = Table::new(&["r", "f", "Ric_rr", "Ric_tt_unit", "h1", "h2", "scalar"]);
    let last = (cfg.samples - 1) as f64;
    for i in 0..cfg.samples {
        let r = r_max * i as f64 / last;
        let metric = emb.induced_metric(r)?;
        let ric = emb.ricci_graph(r)?;
        let pc = emb.principal_curvatures(r)?;
        let scalar = gauss_curvatures(&emb.principal_vector(r)?).scalar;
        table.push(&[r, metric.f_val, ric.ric_rr, ric.ric_tt_unit, pc.h1, pc.h2, scalar]);
    }
    table.write(&with_suffix(prefix, "_hypersurface.csv"))
        .map_err(RunError::from)
}

fn verify(cfg: &ProblemConfig, prefix: &Path) -> Result<(), RunError> {
    let path = cfg.profile.as_ref().ok_or(ConfigError::Missing("profile"))?;
    let (phi, psi) = cfg.require_phi_psi()?;
    let cols = Columns::read(path)?;
    let grid = cols.get("t")?;
    let profile = MetricProfile::new(cfg.n, grid, cols.get("f")?, cols.get("r")?, cols.get("rp")?, cols.get("fp")?)?;
    profile.check_invariants(1e-9)?;
    let t_hi = *profile.grid.last().unwrap();
    let t_max = cfg.t_max.unwrap_or(t_hi).min(t_hi);
    let tensor = RotSymTensor::from_exprs(cfg.n, phi, psi, t_max)?;
    let t_lo = VERIFY_FLOOR * t_max;
    let residuals = verify_ricci(&profile, &tensor, t_lo, t_max)?;
    let fwd = profile.forward_tensor()?;

    let mut table = Table::new(&["t", "phi_hat", "psi_hat", "res_rr", "res_tt"]);
    for (i, &t) in fwd.grid.iter().enumerate() {
        if t > t_max {
            break;
        }
        let res_rr = fwd.phi[i] - tensor.phi.value(t)?;
        let res_tt = t * t * (fwd.psi[i] - tensor.psi.value(t)?);
        table.push(&[t, fwd.phi[i], fwd.psi[i], res_rr, res_tt]);
    }
    table.write(&with_suffix(prefix, "_verify.csv"))?;

    let mut report = Report::default();
    problem_lines(&mut report, Command::Verify, cfg, &tensor);
    report.line("profile", path.display());
    report.number("verify_lo", t_lo);
    report.number("verify_hi", t_max);
    report.number("ricci_residual_rr", residuals.radial);
    report.number("ricci_residual_tt", residuals.tangential);
    let failure = (residuals.max() > cfg.residual_tol)
        .then(|| format!("ricci residual {:e} exceeds {:e}", residuals.max(), cfg.residual_tol));
    finish(report, prefix, "_verify.txt", failure)
}
