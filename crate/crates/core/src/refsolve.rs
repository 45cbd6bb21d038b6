//! Galerkin reference solver with hierarchic integrated-Legendre elements on
//! layer-adapted meshes.

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{csv_line, fmt17};
use crate::problem::{classify_regime, compute_mu, energy_norm, EnergyNorm, TwoParamProblem, DEFAULT_THRESHOLDS};
use crate::quadrature::{gauss_rule, legendre_values, QuadSpec};

pub const DEFAULT_KAPPA: f64 = 2.5;
/// Degree of the reference ("exact") solve.
pub const REFERENCE_DEGREE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    breakpoints: Vec<f64>,
}

impl Mesh {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMesh("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidMesh("mesh must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidMesh("breakpoints not strictly increasing".into()));
        }
        Ok(Self { breakpoints })
    }

    pub fn uniform(elements: usize) -> Self {
        let n = elements.max(1);
        let mut bp: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        bp[n] = 1.0;
        Self { breakpoints: bp }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Element containing `x` (the left one at interior breakpoints).
    pub fn locate(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b < x);
        k.saturating_sub(1).min(self.elements() - 1)
    }

    /// Sorted union of breakpoints.
    pub fn union(&self, other: &Mesh) -> Mesh {
        let mut bp: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        Mesh { breakpoints: bp }
    }
}

fn from_points(mut pts: Vec<f64>) -> Mesh {
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    Mesh { breakpoints: pts }
}

/// Three-element spectral boundary-layer mesh
/// `{0, min(kappa p w_left, 1/3), 1 - min(kappa p w_right, 1/3), 1}`
/// with the regime's layer widths.
pub fn build_layer_mesh(p: &TwoParamProblem, degree: usize, kappa: f64) -> Mesh {
    let regime = classify_regime(p.eps1, p.eps2, DEFAULT_THRESHOLDS);
    let (wl, wr) = regime.kind.layer_widths(p.eps1, p.eps2);
    let pk = kappa * degree.max(1) as f64;
    let third = 1.0 / 3.0;
    from_points(vec![(pk * wl).min(third), 1.0 - (pk * wr).min(third)])
}

/// Geometric points `w, 2w, 4w, ...` below 1/3 measured from an endpoint.
fn geometric_from_end(w: f64) -> Vec<f64> {
    let third = 1.0 / 3.0;
    let mut d = Vec::new();
    let mut x = w;
    while x < third {
        d.push(x);
        x *= 2.0;
    }
    // no sliver element next to 1/3
    if d.last().is_some_and(|&last| last > third / 1.5) {
        d.pop();
    }
    d
}

/// Geometrically graded mesh: elements of size `w, w, 2w, 4w, ...` out to 1/3
/// from each endpoint, where `w` is the local layer width `1/mu` divided by
/// `2^extra_levels`.
pub fn build_graded_mesh(p: &TwoParamProblem, extra_levels: u32) -> Mesh {
    let mu = compute_mu(p);
    let shrink = 0.5f64.powi(extra_levels as i32);
    let mut pts = vec![1.0 / 3.0, 2.0 / 3.0];
    pts.extend(geometric_from_end(shrink / mu.mu0));
    pts.extend(geometric_from_end(shrink / mu.mu1).into_iter().map(|d| 1.0 - d));
    from_points(pts)
}

/// Integrated-Legendre shape functions and derivatives on `[-1, 1]`.
pub fn shape_functions(degree: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let leg = legendre_values(degree.max(1), xi);
    let mut v = vec![0.5 * (1.0 - xi), 0.5 * (1.0 + xi)];
    let mut d = vec![-0.5, 0.5];
    for k in 2..=degree {
        let kf = k as f64;
        v.push((leg[k] - leg[k - 2]) / (2.0 * (2.0 * kf - 1.0)).sqrt());
        d.push(((2.0 * kf - 1.0) / 2.0).sqrt() * leg[k - 1]);
    }
    (v, d)
}

fn dof_count(elements: usize, degree: usize) -> usize {
    (elements - 1) + elements * (degree - 1)
}

/// Global index of local function `k` on element `e` (`None` on the boundary).
fn global_dof(elements: usize, degree: usize, e: usize, k: usize) -> Option<usize> {
    match k {
        0 => (e > 0).then(|| e - 1),
        1 => (e + 1 < elements).then_some(e),
        _ => Some(elements - 1 + e * (degree - 1) + (k - 2)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemSolution {
    pub mesh: Mesh,
    pub degree: usize,
    pub coeffs: Vec<f64>,
    pub problem: TwoParamProblem,
}

type ElementSystem = (DMatrix<f64>, DVector<f64>);

fn assemble(p: &TwoParamProblem, mesh: &Mesh, degree: usize, qpoints: usize) -> ElementSystem {
    let ne = mesh.elements();
    let n = dof_count(ne, degree);
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut f = DVector::<f64>::zeros(n);
    let (nodes, weights) = gauss_rule(qpoints);
    let shapes: Vec<_> = nodes.iter().map(|&xi| shape_functions(degree, xi)).collect();
    for e in 0..ne {
        let (xa, xb) = (mesh.breakpoints[e], mesh.breakpoints[e + 1]);
        let half = 0.5 * (xb - xa);
        let jac = 1.0 / half;
        let dofs: Vec<Option<usize>> = (0..=degree).map(|k| global_dof(ne, degree, e, k)).collect();
        for (q, (xi, w)) in nodes.iter().zip(&weights).enumerate() {
            let x = xa + half * (xi + 1.0);
            let (bq, cq, fq) = (p.b.value(x), p.c.value(x), p.f.value(x));
            let (v, d) = &shapes[q];
            let wq = w * half;
            for (i, gi) in dofs.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                f[gi] += wq * fq * v[i];
                for (j, gj) in dofs.iter().enumerate() {
                    let Some(gj) = *gj else { continue };
                    let dj = d[j] * jac;
                    a[(gi, gj)] += wq * (p.eps1 * dj * d[i] * jac + p.eps2 * bq * dj * v[i] + cq * v[j] * v[i]);
                }
            }
        }
    }
    (a, f)
}

/// Galerkin solution of degree `degree` with homogeneous Dirichlet conditions.
pub fn solve_bvp(p: &TwoParamProblem, mesh: &Mesh, degree: usize) -> Result<FemSolution> {
    if degree < 1 || degree + 12 > 64 {
        return Err(Error::InvalidMesh(format!("degree {degree} outside 1..=52")));
    }
    let ne = mesh.elements();
    if degree == 1 && ne == 1 {
        // no interior unknowns at all
        return Ok(FemSolution {
            mesh: mesh.clone(),
            degree,
            coeffs: Vec::new(),
            problem: p.clone(),
        });
    }
    let (a, f) = assemble(p, mesh, degree, degree + 6);
    let (_, f_fine) = assemble(p, mesh, degree, degree + 12);
    let (fc, ff) = (f.norm(), f_fine.norm());
    if (&f - &f_fine).norm() > 1e-8 * ff + 1e-14 {
        return Err(Error::QuadratureUnderResolved { coarse: fc, fine: ff });
    }
    let lu = a.clone().lu();
    let x = lu.solve(&f).ok_or(Error::SingularSystem(0.0))?;
    let res = (&a * &x - &f).norm();
    let scale = a.norm() * x.norm() + f.norm();
    if !(res <= 1e-10 * scale) {
        return Err(Error::SingularSystem(res / scale.max(f64::MIN_POSITIVE)));
    }
    debug!("solved {} unknowns on {} elements, degree {degree}", x.len(), ne);
    Ok(FemSolution {
        mesh: mesh.clone(),
        degree,
        coeffs: x.iter().copied().collect(),
        problem: p.clone(),
    })
}

impl FemSolution {
    fn local(&self, e: usize, k: usize) -> f64 {
        global_dof(self.mesh.elements(), self.degree, e, k).map_or(0.0, |g| self.coeffs[g])
    }

    /// Value (`deriv = 0`) or first derivative (`deriv = 1`) at `x`.
    pub fn eval(&self, x: f64, deriv: usize) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let (v, d) = self.eval_both_in(self.mesh.locate(x), x);
        Ok(if deriv == 0 { v } else { d })
    }

    /// `(u(x), u'(x))` from element `e`.
    fn eval_both_in(&self, e: usize, x: f64) -> (f64, f64) {
        let (xa, xb) = (self.mesh.breakpoints[e], self.mesh.breakpoints[e + 1]);
        let half = 0.5 * (xb - xa);
        let xi = ((x - xa) / half - 1.0).clamp(-1.0, 1.0);
        let (v, d) = shape_functions(self.degree, xi);
        let mut u = 0.0;
        let mut du = 0.0;
        for k in 0..=self.degree {
            let c = self.local(e, k);
            u += c * v[k];
            du += c * d[k];
        }
        (u, du / half)
    }

    /// `(u(x), u'(x))`; panics outside `[0, 1]`.
    pub fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        self.eval_both_in(self.mesh.locate(x.clamp(0.0, 1.0)), x.clamp(0.0, 1.0))
    }

    /// Values from either side of interior breakpoint `k`.
    pub fn one_sided(&self, k: usize) -> (f64, f64) {
        let x = self.mesh.breakpoints[k];
        (self.eval_both_in(k - 1, x).0, self.eval_both_in(k, x).0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV `x,u,du` on the given points.
    pub fn sample_csv(&self, xs: &[f64]) -> String {
        let mut s = String::from("x,u,du\n");
        for &x in xs {
            let (u, du) = self.value_and_derivative(x);
            s.push_str(&csv_line(&[fmt17(x), fmt17(u), fmt17(du)]));
            s.push('\n');
        }
        s
    }
}

/// Quadrature adapted to two meshes and the integrand degree.
pub fn difference_quadrature(a: &Mesh, b: &Mesh, points: usize) -> QuadSpec {
    QuadSpec::new(a.union(b).breakpoints().to_vec(), points.min(62))
}

/// High-degree solve on a finer graded mesh plus its self-convergence gap.
#[derive(Debug, Clone)]
pub struct Reference {
    pub solution: FemSolution,
    /// Energy-norm distance to the solve two degrees lower on the same mesh.
    pub gap: f64,
}

pub fn reference_solution(p: &TwoParamProblem, degree: usize) -> Result<Reference> {
    let fine = solve_bvp(p, &build_graded_mesh(p, 1), degree)?;
    let coarse = solve_bvp(p, &fine.mesh, degree.saturating_sub(2).max(1))?;
    let quad = difference_quadrature(&fine.mesh, &coarse.mesh, degree + 4);
    let gap = energy_norm(
        |x| {
            let (a, da) = fine.value_and_derivative(x);
            let (b, db) = coarse.value_and_derivative(x);
            (a - b, da - db)
        },
        p,
        &quad,
        EnergyNorm::Default,
    )?;
    Ok(Reference { solution: fine, gap })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub energy_error: f64,
    pub energy_error_paper: f64,
    pub max_error: f64,
}

/// Errors of solves on `mesh` against a degree `max + 4` solve on the
/// graded mesh with one extra refinement level.
pub fn convergence_study(p: &TwoParamProblem, mesh: &Mesh, degrees: &[usize], grid: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let top = degrees.iter().copied().max().unwrap_or(1) + 4;
    let reference = solve_bvp(p, &build_graded_mesh(p, 1), top)?;
    degrees
        .iter()
        .map(|&deg| {
            let sol = solve_bvp(p, mesh, deg)?;
            let quad = difference_quadrature(&sol.mesh, &reference.mesh, top + 4);
            let diff = |x: f64| {
                let (a, da) = sol.value_and_derivative(x);
                let (b, db) = reference.value_and_derivative(x);
                (a - b, da - db)
            };
            let max_error = grid.iter().map(|&x| diff(x).0.abs()).fold(0.0, f64::max);
            Ok(ConvergenceRow {
                degree: deg,
                energy_error: energy_norm(diff, p, &quad, EnergyNorm::Default)?,
                energy_error_paper: energy_norm(diff, p, &quad, EnergyNorm::Paper)?,
                max_error,
            })
        })
        .collect()
}
