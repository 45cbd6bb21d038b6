use std::path::{Path, PathBuf};

use layeredbvp::expansion::{assemble, expand, select_M, Decomposition, ExpansionTable, ORDER};
use layeredbvp::output::{csv_line, fmt17};
use layeredbvp::problem::{classify_regime, validate_assumptions};
use layeredbvp::refsolve::{build_graded_mesh, build_layer_mesh, reference_solution, solve_bvp};
use layeredbvp::verify::{
    check_endpoint_values, check_growth_stability, check_layer_envelopes, check_mu_bounds, check_remainder,
    check_residual_bounds, check_smooth_growth, check_sup_and_derivative, sample_grid, scan_csv, scan_point, scan_points,
    Abscissa, BoundCheck, ScanPoint, ScanSettings, SCAN_HEADER,
};
use layeredbvp::{EnergyNorm, Regime, RegimeKind, TwoParamProblem};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::{AutoTag, MeshKind, RegimeChoice, RunConfig};
use crate::exit::{Failure, OK, VERIFY_FAILED};

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub regime: Option<RegimeChoice>,
    pub delta: Option<f64>,
    pub m_max: Option<usize>,
    pub degree: Option<usize>,
    pub energy_norm: Option<EnergyNorm>,
}

/// Config plus overrides, resolved once.
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub norm: EnergyNorm,
}

impl Context {
    pub fn new(mut cfg: RunConfig, o: Overrides) -> Result<Self, Failure> {
        if let Some(r) = o.regime {
            cfg.regime = Some(r);
        }
        if let Some(d) = o.delta {
            if !(d > 0.0) {
                return Err(Failure::config("--delta must be positive"));
            }
            cfg.expand.delta = d;
        }
        if let Some(m) = o.m_max {
            cfg.expand.m_max = m;
        }
        if let Some(p) = o.degree {
            if p == 0 {
                return Err(Failure::config("--degree must be positive"));
            }
            cfg.solve.degree = p;
            cfg.verify.degree = p;
        }
        let out = o.out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
        if !out.is_dir() {
            return Err(Failure::config(format!("output directory {} does not exist", out.display())));
        }
        Ok(Self {
            cfg,
            out,
            jobs: o.jobs,
            norm: o.energy_norm.unwrap_or_default(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::io(&path.display().to_string(), e))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn settings(&self) -> ScanSettings {
        let v = &self.cfg.verify;
        ScanSettings {
            delta: self.cfg.expand.delta,
            m_max: self.cfg.expand.m_max,
            degree: v.degree,
            order: ORDER,
            derivative_constant: v.derivative_constant,
            smooth_n_max: v.smooth_n_max,
            require_resolved: true,
        }
    }

    /// Engine for `(eps1, eps2)`: the forced one, or the classification.
    fn engine(&self, eps1: f64, eps2: f64) -> (RegimeKind, Regime) {
        let classified = classify_regime(eps1, eps2, self.cfg.thresholds);
        let kind = match self.cfg.regime {
            Some(RegimeChoice::Engine(i)) => RegimeKind::from_index(i).unwrap_or(classified.kind),
            Some(RegimeChoice::Named(AutoTag::Auto)) | None => classified.kind,
        };
        (kind, classified)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.jobs {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Failure::config(format!("worker pool: {e}")))
    }
}

fn problem_engine(ctx: &Context) -> RegimeKind {
    let p = &ctx.cfg.problem;
    let (kind, classified) = ctx.engine(p.eps1, p.eps2);
    if kind != classified.kind {
        warn!(
            "regime override: engine {} on a problem classified as regime {} (eps1/eps2^2 = {:e})",
            kind.index(),
            classified.kind.index(),
            classified.ratio
        );
    }
    if classified.convection_diffusion {
        info!("eps2 = {} is of order one: convection-diffusion limit", p.eps2);
    }
    kind
}

pub fn cmd_solve(ctx: &Context) -> Result<u8, Failure> {
    let p = &ctx.cfg.problem;
    validate_assumptions(p, 65)?;
    let sc = &ctx.cfg.solve;
    let mesh = match sc.mesh {
        MeshKind::Graded => build_graded_mesh(p, 0),
        MeshKind::ThreeElement => build_layer_mesh(p, sc.degree, sc.kappa),
    };
    let sol = solve_bvp(p, &mesh, sc.degree)?;
    ctx.write("solution.csv", &sol.sample_csv(&sample_grid()))?;
    ctx.write("solution.json", &sol.to_json()?)?;
    Ok(OK)
}

fn term_table(p: &TwoParamProblem, table: &ExpansionTable) -> String {
    let grid = sample_grid();
    let kind = table.regime;
    let (wl, wr) = kind.layer_widths(p.eps1, p.eps2);
    let mut out = csv_line(&["part", "i", "j", "weight", "sup"]);
    out.push('\n');
    for (i, j) in table.indices() {
        let w = layeredbvp::expansion::term_weight(kind, p.eps1, p.eps2, i, j);
        let smooth = grid.iter().map(|&x| table.smooth[i][j].eval(x).abs()).fold(0.0, f64::max);
        let left = grid.iter().map(|&x| table.left[i][j].eval(x / wl).abs()).fold(0.0, f64::max);
        let right = grid.iter().map(|&x| table.right[i][j].eval((1.0 - x) / wr).abs()).fold(0.0, f64::max);
        for (part, sup) in [("smooth", smooth), ("left", left), ("right", right)] {
            let cells = [part.to_string(), i.to_string(), j.to_string(), fmt17(w), fmt17(sup)];
            out.push_str(&csv_line(&cells));
            out.push('\n');
        }
    }
    out
}

fn decomposition(ctx: &Context, p: &TwoParamProblem, kind: RegimeKind) -> Result<(ExpansionTable, Decomposition), Failure> {
    let ec = &ctx.cfg.expand;
    let bound = select_M(p, kind, ec.delta, ec.m_max);
    let m = match ec.m {
        Some(m) if m > bound => {
            warn!("M = {m} exceeds the validity bound {bound} (delta = {}, M_max = {}); clamped", ec.delta, ec.m_max);
            bound
        }
        Some(m) => m,
        None => bound,
    };
    let table = expand(p, kind, m, ORDER)?;
    let dec = assemble(p, &table)?;
    Ok((table, dec))
}

pub fn cmd_expand(ctx: &Context) -> Result<u8, Failure> {
    let p = &ctx.cfg.problem;
    validate_assumptions(p, 65)?;
    let kind = problem_engine(ctx);
    let (table, dec) = decomposition(ctx, p, kind)?;
    ctx.write("decomposition.json", &dec.to_json()?)?;
    ctx.write("terms.csv", &term_table(p, &table))?;
    Ok(OK)
}

fn scan_rows(
    ctx: &Context,
    template: &TwoParamProblem,
    points: &[(f64, f64)],
    forced: Option<RegimeKind>,
    strict: bool,
) -> Result<Vec<Result<ScanPoint, String>>, Failure> {
    let settings = ScanSettings {
        require_resolved: strict,
        ..ctx.settings()
    };
    let pool = ctx.pool()?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(e1, e2)| {
                let kind = forced.unwrap_or_else(|| ctx.engine(e1, e2).0);
                scan_point(template, e1, e2, kind, &settings).map(|(s, _)| s).map_err(|e| e.to_string())
            })
            .collect()
    }))
}

pub fn cmd_verify(ctx: &Context) -> Result<u8, Failure> {
    let p = &ctx.cfg.problem;
    let vc = &ctx.cfg.verify;
    validate_assumptions(p, 65)?;
    let kind = problem_engine(ctx);
    let wants = |name: &str| vc.checks.iter().any(|c| c == name);
    let mut checks: Vec<BoundCheck> = Vec::new();

    if wants("sup_and_derivative") {
        let reference = reference_solution(p, vc.degree)?;
        checks.push(check_sup_and_derivative(p, &reference.solution, vc.derivative_constant));
    }
    if wants("smooth_growth") || wants("layer_envelopes") {
        let (_, dec) = decomposition(ctx, p, kind)?;
        if wants("smooth_growth") {
            checks.push(check_smooth_growth(&dec, vc.smooth_n_max));
        }
        if wants("layer_envelopes") {
            checks.push(check_layer_envelopes(&dec, vc.layer_n_max, vc.layer_rate_margin)?);
        }
    }
    if wants("mu_bounds") {
        checks.push(check_mu_bounds(p, vc.mu_constant));
    }
    let scan_checks = ["remainder", "residual", "smooth_growth_stability", "endpoint_values"];
    if scan_checks.iter().any(|c| wants(c)) {
        let rows = scan_rows(ctx, p, &scan_points(kind), Some(kind), true)?;
        let points = rows.into_iter().collect::<Result<Vec<_>, _>>().map_err(|e| Failure {
            code: crate::exit::SOLVER,
            message: format!("verification scan: {e}"),
        })?;
        ctx.write("verify_scan.csv", &scan_csv(&points))?;
        if wants("remainder") {
            checks.push(check_remainder(&points, Abscissa::for_regime(kind), ctx.norm, vc.remainder_r2)?);
        }
        if wants("residual") {
            checks.push(check_residual_bounds(&points));
        }
        if wants("smooth_growth_stability") {
            checks.push(check_growth_stability(&points, vc.stability_tolerance));
        }
        if wants("endpoint_values") {
            checks.push(check_endpoint_values(p, &points, vc.endpoint_constant, vc.endpoint_left_factor));
        }
    }

    for c in &checks {
        ctx.write(&format!("check_{}.csv", c.name), &c.to_csv())?;
        if !c.pass {
            warn!("check {} failed", c.name);
        }
    }
    let all = checks.iter().all(|c| c.pass);
    let summary = serde_json::json!({
        "pass": all,
        "regime": kind.index(),
        "energy_norm": ctx.norm,
        "checks": checks.iter().map(BoundCheck::summary).collect::<Vec<_>>(),
    });
    ctx.write("summary.json", &(serde_json::to_string_pretty(&summary).map_err(layeredbvp::Error::from)? + "\n"))?;
    Ok(if all { OK } else { VERIFY_FAILED })
}

fn failed_row(e1: f64, e2: f64, kind: u8, msg: &str) -> String {
    let mut cells = vec![fmt17(e1), fmt17(e2), kind.to_string()];
    cells.extend(std::iter::repeat_n("nan".to_string(), SCAN_HEADER.len() - 3));
    cells.push(msg.replace([',', '\n'], ";"));
    csv_line(&cells)
}

pub fn cmd_scan(ctx: &Context) -> Result<u8, Failure> {
    let Some(sc) = &ctx.cfg.scan else {
        return Err(Failure::config("scan command needs a \"scan\" section"));
    };
    let points = sc.points()?;
    for &(e1, e2) in &points {
        if !(e1 > 0.0 && e1 <= 1.0 && e2 > 0.0 && e2 <= 1.0) {
            return Err(Failure::config(format!("scan point ({e1}, {e2}) outside (0, 1]^2")));
        }
    }
    let template = &ctx.cfg.problem;
    validate_assumptions(template, 65)?;
    let rows = scan_rows(ctx, template, &points, None, false)?;
    let mut header: Vec<&str> = SCAN_HEADER.to_vec();
    header.push("status");
    let mut out = csv_line(&header);
    out.push('\n');
    let mut failures = 0;
    for (&(e1, e2), row) in points.iter().zip(&rows) {
        match row {
            Ok(s) => {
                out.push_str(&s.csv_row());
                out.push_str(if s.resolved { ",ok" } else { ",unresolved" });
            }
            Err(msg) => {
                failures += 1;
                warn!("scan point ({e1:e}, {e2:e}): {msg}");
                out.push_str(&failed_row(e1, e2, ctx.engine(e1, e2).0.index(), msg));
            }
        }
        out.push('\n');
    }
    ctx.write("scan.csv", &out)?;
    info!("scan: {} points, {failures} failed", points.len());
    Ok(OK)
}

/// Reads the config, applies overrides and checks the output directory.
pub fn load(config: &Path, o: Overrides) -> Result<Context, Failure> {
    Context::new(RunConfig::load(config)?, o)
}
