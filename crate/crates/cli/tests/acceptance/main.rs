//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod oracle;

use std::process::Command;

use layeredbvp::expansion::{expand, ExpansionTable, ORDER};
use layeredbvp::refsolve::{build_graded_mesh, build_layer_mesh, solve_bvp};
use layeredbvp::verify::{
    check_endpoint_values, check_growth_stability, check_mu_bounds, check_remainder, sample_grid, scan_point, scan_points,
    Abscissa, ScanPoint, ScanSettings,
};
use layeredbvp::{CoeffFn, EnergyNorm, PolyExp, RegimeKind, TwoParamProblem};
use oracle::{exact_constant, indices, layer_equation, Data, End, Engine, Oracle};

const KINDS: [RegimeKind; 3] = [
    RegimeKind::ConvectionReactionDiffusion,
    RegimeKind::Intermediate,
    RegimeKind::ReactionDiffusion,
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn engine_of(k: RegimeKind) -> Engine {
    match k {
        RegimeKind::ConvectionReactionDiffusion => Engine::One,
        RegimeKind::Intermediate => Engine::Two,
        RegimeKind::ReactionDiffusion => Engine::Three,
    }
}

fn catalogue(eps1: f64, eps2: f64) -> TwoParamProblem {
    TwoParamProblem::new(eps1, eps2, CoeffFn::constant(1.0), CoeffFn::affine(1.0, 0.5), CoeffFn::exp(1.0, 1.0)).unwrap()
}

fn linear_c(eps1: f64, eps2: f64, c0: f64, c1: f64) -> TwoParamProblem {
    TwoParamProblem::new(eps1, eps2, CoeffFn::constant(1.0), CoeffFn::affine(c0, c1), CoeffFn::constant(1.0)).unwrap()
}

fn criterion_1() -> Outcome {
    let eps = [1.0, 1e-2, 1e-4];
    let grid = sample_grid();
    let (mut worst, mut worst_three) = (0.0f64, 0.0f64);
    for &e1 in &eps {
        for &e2 in &eps {
            let p = TwoParamProblem::constant(e1, e2).unwrap();
            let err = |mesh| -> f64 {
                let sol = solve_bvp(&p, &mesh, 12).unwrap();
                grid.iter().map(|&x| (sol.value_and_derivative(x).0 - exact_constant(e1, e2, x).0).abs()).fold(0.0, f64::max)
            };
            worst = worst.max(err(build_graded_mesh(&p, 0)));
            worst_three = worst_three.max(err(build_layer_mesh(&p, 12, 2.5)));
        }
    }
    outcome(
        worst <= 1e-8,
        format!("degree 12, graded layer mesh: worst max error {worst:.2e} (tol 1e-8); three-element mesh for reference {worst_three:.2e}"),
    )
}

/// Relative discrepancy of `engine` against `oracle` over sample points.
fn rel_gap(engine: impl Fn(f64) -> f64, oracle: impl Fn(f64) -> f64, pts: &[f64]) -> f64 {
    let scale = pts.iter().map(|&t| oracle(t).abs()).fold(0.0, f64::max);
    let diff = pts.iter().map(|&t| (engine(t) - oracle(t)).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        if diff <= 1e-14 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    }
}

fn criterion_2() -> Outcome {
    const XS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    const ZS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
    let mut worst = 0.0f64;
    let mut where_ = String::new();
    for k in KINDS {
        let (e1, e2) = match k {
            RegimeKind::ConvectionReactionDiffusion => (1e-4, 0.1),
            RegimeKind::Intermediate => (1e-2, 0.1),
            RegimeKind::ReactionDiffusion => (1e-2, 1e-3),
        };
        let p = linear_c(e1, e2, 1.0, 0.5);
        let e = engine_of(k);
        let orc = Oracle::new(e, Data { c0: 1.0, c1: 0.5, r: p.ratio() }, 4);
        let table = expand(&p, k, 4, ORDER).unwrap();
        for (i, j) in indices(e, 4) {
            let gaps = [
                rel_gap(|x| table.smooth[i][j].eval(x), |x| orc.smooth_at((i, j), x), &XS),
                rel_gap(|z| table.left[i][j].eval(z), |z| orc.left[&(i, j)].eval(z), &ZS),
                rel_gap(|z| table.right[i][j].eval(z), |z| orc.right[&(i, j)].eval(z), &ZS),
            ];
            for (g, part) in gaps.iter().zip(["smooth", "left", "right"]) {
                if *g > worst {
                    worst = *g;
                    where_ = format!("regime {} {part} ({i},{j})", k.index());
                }
            }
        }
    }
    outcome(worst <= 1e-9, format!("power-matching oracle, i+j <= 4, all regimes: worst relative gap {worst:.2e} at {where_} (tol 1e-9)"))
}

/// Residual of one engine layer term in its defining equation.
fn layer_residual(k: RegimeKind, end: End, d: Data, grid: &[Vec<PolyExp>], ij: (usize, usize), z: f64) -> f64 {
    let ((a2, a1, a0), _, sources) = layer_equation(engine_of(k), end, d);
    let v = &grid[ij.0][ij.1];
    let mut r = a2 * v.eval_derivative(z, 2) + a1 * v.eval_derivative(z, 1) + a0 * v.eval(z);
    for s in sources {
        if ij.0 < s.di || ij.1 < s.dj {
            continue;
        }
        let Some(w) = grid.get(ij.0 - s.di).and_then(|row| row.get(ij.1 - s.dj)) else { continue };
        r -= s.coef * z.powi(s.zpow as i32) * w.eval_derivative(z, s.deriv);
    }
    r
}

fn criterion_3() -> Outcome {
    let zs: Vec<f64> = (0..30).map(|k| 0.25 * k as f64).collect();
    let (mut worst_res, mut worst_bc) = (0.0f64, 0.0f64);
    let mut degree_ok = true;
    let mut count = 0usize;
    for (c0, c1) in [(1.0, 0.5), (1.0, 0.0), (2.0, -0.5)] {
        for k in KINDS {
            let (e1, e2) = match k {
                RegimeKind::ConvectionReactionDiffusion => (1e-4, 0.1),
                RegimeKind::Intermediate => (1e-2, 0.1),
                RegimeKind::ReactionDiffusion => (1e-2, 1e-3),
            };
            let p = linear_c(e1, e2, c0, c1);
            let d = Data { c0, c1, r: p.ratio() };
            let m = 6;
            let table: ExpansionTable = expand(&p, k, m, ORDER).unwrap();
            for (i, j) in indices(engine_of(k), m) {
                for (end, grid, x_end) in [(End::Left, &table.left, 0.0), (End::Right, &table.right, 1.0)] {
                    count += 1;
                    for &z in &zs {
                        worst_res = worst_res.max(layer_residual(k, end, d, grid, (i, j), z).abs());
                    }
                    let bc = grid[i][j].eval(0.0) + table.smooth[i][j].eval(x_end);
                    worst_bc = worst_bc.max(bc.abs());
                }
                if k == RegimeKind::ConvectionReactionDiffusion && c1 != 0.0 && table.left[i][j].degree() != Some(2 * i + j) {
                    degree_ok = false;
                }
            }
        }
    }
    outcome(
        worst_res <= 1e-10 && worst_bc <= 1e-12 && degree_ok,
        format!(
            "{count} layer terms: worst ODE residual {worst_res:.2e} (tol 1e-10), worst boundary mismatch {worst_bc:.2e} (tol 1e-12), regime-1 left degree 2i+j {}",
            if degree_ok { "holds" } else { "VIOLATED" }
        ),
    )
}

struct Scans {
    /// Per regime: catalogue rows, constant-data rows.
    rows: Vec<(RegimeKind, Result<Vec<ScanPoint>, String>, Result<Vec<ScanPoint>, String>)>,
}

fn run_scan(template: &TwoParamProblem, k: RegimeKind) -> Result<Vec<ScanPoint>, String> {
    let s = ScanSettings::default();
    scan_points(k)
        .into_iter()
        .map(|(e1, e2)| scan_point(template, e1, e2, k, &s).map(|(p, _)| p).map_err(|e| format!("({e1:e}, {e2:e}): {e}")))
        .collect()
}

fn scans() -> Scans {
    let cat = catalogue(0.1, 0.1);
    let con = TwoParamProblem::constant(0.1, 0.1).unwrap();
    Scans {
        rows: KINDS.iter().map(|&k| (k, run_scan(&cat, k), run_scan(&con, k))).collect(),
    }
}

fn criterion_4(s: &Scans) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, cat, con) in &s.rows {
        for (label, rows, gated) in [("catalogue", cat, true), ("constant", con, false)] {
            let r = rows
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|pts| check_remainder(pts, Abscissa::for_regime(*k), EnergyNorm::Default, 0.98).map_err(|e| e.to_string()));
            match r {
                Ok(c) => {
                    let f = c.fit.unwrap();
                    if gated && !c.pass {
                        pass = false;
                    }
                    parts.push(format!("r{} {label}: slope {:.3} R2 {:.4}", k.index(), f.slope, f.r_squared));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("r{} {label}: {e}", k.index()));
                }
            }
        }
    }
    outcome(pass, format!("log remainder fits (need slope < 0, R2 >= 0.98): {}", parts.join("; ")))
}

fn criterion_5(s: &Scans) -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (_, cat, con) in &s.rows {
        for pts in [cat, con].into_iter().flatten() {
            for p in pts {
                worst = worst.max(p.du_ratio);
                n += 1;
            }
        }
    }
    outcome(n == 30 && worst <= 10.0, format!("{n}/30 scan points, worst |u'|/max(1/eps1, 1/eps2) = {worst:.3} (tol 10)"))
}

fn criterion_6(s: &Scans) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, cat, _) in &s.rows {
        match cat {
            Ok(pts) => {
                let c = check_growth_stability(pts, 0.25);
                let spread = c.rate.unwrap_or(f64::INFINITY);
                let ks: Vec<String> = pts.iter().map(|p| format!("{:.3}", p.smooth_k)).collect();
                pass &= c.pass;
                parts.push(format!("r{} K = [{}] spread {:.1}%", k.index(), ks.join(", "), 100.0 * spread));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("r{}: {e}", k.index()));
            }
        }
    }
    outcome(pass, format!("smooth-part growth base, catalogue data, n <= 12 (tol 25%): {}", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let axis: Vec<f64> = (0..7).map(|k| 10f64.powi(k - 6)).collect();
    let (mut failed, mut misrouted) = (Vec::new(), 0);
    let mut printed_row_failures = 0;
    for &e1 in &axis {
        for &e2 in &axis {
            let p = TwoParamProblem::constant(e1, e2).unwrap();
            let c = check_mu_bounds(&p, 4.0);
            let conditional = &c.samples.last().unwrap().label;
            let expect = if e2 * e2 >= e1 { "(eps2^2 >= eps1)" } else { "(eps2^2 < eps1)" };
            if !conditional.ends_with(expect) {
                misrouted += 1;
            }
            for s in c.samples.iter().filter(|s| !s.holds()) {
                failed.push(format!("{} at ({e1:e}, {e2:e}) ratio {:.2}", s.label, s.ratio()));
            }
            printed_row_failures += c.informational.iter().filter(|s| !s.holds()).count();
        }
    }
    outcome(
        failed.is_empty() && misrouted == 0,
        format!(
            "49 points, C = 4: {} failing rows, {misrouted} misrouted conditional rows{}; max(1/mu0, eps1 mu1) <~ eps1 + sqrt(eps2) as printed fails at {printed_row_failures} points (reported only, gated form uses eps2 + sqrt(eps1))",
            failed.len(),
            if failed.is_empty() { String::new() } else { format!(" [{}]", failed.join("; ")) }
        ),
    )
}

fn criterion_8(s: &Scans) -> Outcome {
    let Some((_, _, Ok(pts))) = s.rows.iter().find(|(k, _, _)| *k == RegimeKind::ConvectionReactionDiffusion) else {
        return outcome(false, "regime-1 constant-data scan unavailable");
    };
    let con = TwoParamProblem::constant(0.1, 0.1).unwrap();
    let sharp = check_endpoint_values(&con, pts, 3.0, 1.0);
    let relaxed = check_endpoint_values(&con, pts, 3.0, 0.9);
    let worst = |label: &str, c: &layeredbvp::verify::BoundCheck| {
        c.samples.iter().filter(|s| s.label == label).map(|s| s.ratio()).fold(0.0, f64::max)
    };
    outcome(
        sharp.pass,
        format!(
            "max |r(0)|/e^(-b(1) eps2/eps1) = {:.3e}, max |r(1)|/e^(-(c(0)/b(0))/eps2) = {:.3} (tol 3); left end with decay factor 0.9 in the exponent: {:.3e} ({})",
            worst("|r(0)|", &sharp),
            worst("|r(1)|", &sharp),
            worst("|r(0)|", &relaxed),
            if relaxed.pass { "within 3" } else { "exceeds 3" }
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.json");
    std::fs::write(
        &cfg,
        r#"{
  "problem": {"eps1": 1e-3, "eps2": 0.1,
              "b": {"kind": "constant", "value": 1},
              "c": {"kind": "affine", "offset": 1, "slope": 0.5},
              "f": {"kind": "exp", "amplitude": 1, "rate": 1}},
  "scan": {"eps1": {"log10_from": -4, "log10_to": -1, "count": 3},
           "eps2": {"log10_from": -2, "log10_to": -0.5, "count": 3}}
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for (run, jobs) in [("a", "4"), ("b", "4"), ("c", "1")] {
        let out = dir.path().join(run);
        std::fs::create_dir(&out).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_layeredbvp"))
            .args(["scan", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .env("LAYEREDBVP_LOG", "error")
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("scan run {run} exited with {status}"));
        }
        outputs.push(std::fs::read(out.join("scan.csv")).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!("three scan runs (jobs 4, 4, 1) on a 3x3 grid: {} bytes each, identical: {same}", outputs[0].len()),
    )
}

fn main() {
    let scans = scans();
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(&scans),
        criterion_5(&scans),
        criterion_6(&scans),
        criterion_7(),
        criterion_8(&scans),
        criterion_9(),
    ];
    let mut failures = 0;
    for (n, r) in results.iter().enumerate() {
        println!("criterion {}: {}  {}", n + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
        failures += usize::from(!r.pass);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failures, results.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
