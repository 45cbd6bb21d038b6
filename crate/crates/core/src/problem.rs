//! The two-parameter boundary value problem
//! `-eps1 u'' + eps2 b u' + c u = f` on `(0, 1)`, `u(0) = u(1) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{QuadSpec, UNDER_RESOLVED_REL};
use crate::series::{CoeffFn, TaylorProvider};
use crate::stats::linear_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoParamProblem {
    pub eps1: f64,
    pub eps2: f64,
    pub b: CoeffFn,
    pub c: CoeffFn,
    pub f: CoeffFn,
}

impl TwoParamProblem {
    pub fn new(eps1: f64, eps2: f64, b: CoeffFn, c: CoeffFn, f: CoeffFn) -> Result<Self> {
        let p = Self { eps1, eps2, b, c, f };
        p.check()?;
        Ok(p)
    }

    /// `b = c = f = 1`.
    pub fn constant(eps1: f64, eps2: f64) -> Result<Self> {
        let one = CoeffFn::constant(1.0);
        Self::new(eps1, eps2, one.clone(), one.clone(), one)
    }

    /// Structural validation: parameter ranges and coefficient specs.
    pub fn check(&self) -> Result<()> {
        for (name, e) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidProblem(format!("{name} = {e} is not in (0, 1]")));
            }
        }
        self.b.validate()?;
        self.c.validate()?;
        self.f.validate()
    }

    pub fn ratio(&self) -> f64 {
        self.eps1 / (self.eps2 * self.eps2)
    }

    /// `L w = -eps1 w'' + eps2 b w' + c w` from pointwise values.
    pub fn apply(&self, x: f64, w: f64, dw: f64, d2w: f64) -> f64 {
        -self.eps1 * d2w + self.eps2 * self.b.value(x) * dw + self.c.value(x) * w
    }

    pub fn with_f_scaled(&self, k: f64) -> Self {
        let mut p = self.clone();
        p.f = CoeffFn::Product {
            factors: vec![CoeffFn::constant(k), self.f.clone()],
        };
        p
    }
}

/// Infima of the structural assumptions plus fitted analyticity rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub satisfied: bool,
    pub fitted_gamma_b: f64,
    pub fitted_gamma_c: f64,
    pub fitted_gamma_f: f64,
}

/// Minimum of `g` on `[0, 1]`: uniform grid then three zoomed re-samplings.
fn infimum(g: impl Fn(f64) -> f64, n: usize) -> (f64, f64) {
    let n = n.max(2);
    let mut best = (0.0, g(0.0));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _round in 0..4 {
        let h = (hi - lo) / (n - 1) as f64;
        for k in 0..n {
            let x = lo + h * k as f64;
            let v = g(x);
            if v < best.1 {
                best = (x, v);
            }
        }
        lo = (best.0 - h).max(0.0);
        hi = (best.0 + h).min(1.0);
    }
    best
}

/// Fitted `gamma` in `|g^(n)|/n! ~ gamma^n` from Taylor coefficients up to order 10.
fn fitted_gamma(g: &CoeffFn, grid: usize) -> Result<f64> {
    const ORDER: usize = 10;
    let mut sup = [0.0f64; ORDER + 1];
    for k in 0..grid {
        let x = k as f64 / (grid - 1) as f64;
        let t = g.taylor(x, ORDER)?;
        for (s, a) in sup.iter_mut().zip(t.coeffs()) {
            *s = s.max(a.abs());
        }
    }
    let (ns, logs): (Vec<f64>, Vec<f64>) = sup
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 1e-300)
        .map(|(n, a)| (n as f64, a.ln()))
        .unzip();
    if ns.len() < 3 {
        return Ok(0.0);
    }
    Ok(linear_fit(&ns, &logs)?.slope.exp())
}

/// Estimate the infima `beta = inf b`, `gamma = inf c`, `rho = inf (c - eps2 b'/2)`.
pub fn assess_assumptions(p: &TwoParamProblem, grid_points: usize) -> Result<(AssumptionReport, Option<Error>)> {
    let db = |x: f64| p.b.derivative(x, 1).unwrap_or(f64::NAN);
    let (xb, beta) = infimum(|x| p.b.value(x), grid_points);
    let (xc, gamma) = infimum(|x| p.c.value(x), grid_points);
    let (xr, rho) = infimum(|x| p.c.value(x) - 0.5 * p.eps2 * db(x), grid_points);
    let violation = [("b >= beta > 0", xb, beta), ("c >= gamma > 0", xc, gamma), ("c - (eps2/2) b' >= rho > 0", xr, rho)]
        .into_iter()
        .find(|(_, _, v)| !(*v > 0.0))
        .map(|(which, x, value)| Error::AssumptionViolated {
            which: format!("(data) {which}"),
            x,
            value,
        });
    let fit_grid = grid_points.clamp(2, 11);
    let report = AssumptionReport {
        beta,
        gamma,
        rho,
        satisfied: violation.is_none(),
        fitted_gamma_b: fitted_gamma(&p.b, fit_grid)?,
        fitted_gamma_c: fitted_gamma(&p.c, fit_grid)?,
        fitted_gamma_f: fitted_gamma(&p.f, fit_grid)?,
    };
    Ok((report, violation))
}

/// Like [`assess_assumptions`] but fails with `AssumptionViolated`.
pub fn validate_assumptions(p: &TwoParamProblem, grid_points: usize) -> Result<AssumptionReport> {
    if grid_points < 2 {
        return Err(Error::InvalidProblem("assumption grid needs at least 2 points".into()));
    }
    let (report, violation) = assess_assumptions(p, grid_points)?;
    match violation {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuPair {
    pub mu0: f64,
    pub mu1: f64,
    pub argmin0: f64,
    pub argmin1: f64,
}

/// Positive roots of `eps1 l^2 -/+ eps2 b l - c = 0` in cancellation-free form.
pub fn local_rates(eps1: f64, eps2: f64, b: f64, c: f64) -> (f64, f64) {
    let s = (eps2 * eps2 * b * b + 4.0 * eps1 * c).sqrt();
    if b >= 0.0 {
        let big = (eps2 * b + s) / (2.0 * eps1);
        (2.0 * c / (eps2 * b + s), big)
    } else {
        let small = (-eps2 * b + s) / (2.0 * eps1);
        (small, 2.0 * c / (-eps2 * b + s))
    }
}

fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while b - a > 1e-10 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
    }
    0.5 * (a + b)
}

fn grid_then_golden(g: impl Fn(f64) -> f64) -> (f64, f64) {
    const N: usize = 1025;
    let h = 1.0 / (N - 1) as f64;
    let (mut xb, mut vb) = (0.0, g(0.0));
    for k in 1..N {
        let x = k as f64 * h;
        let v = g(x);
        if v < vb {
            xb = x;
            vb = v;
        }
    }
    let x = golden_min(&g, (xb - h).max(0.0), (xb + h).min(1.0));
    let v = g(x);
    if v < vb {
        (x, v)
    } else {
        (xb, vb)
    }
}

/// `mu0 = min_x lambda0(x)`, `mu1 = min_x lambda1(x)` of the frozen-coefficient roots.
pub fn compute_mu(p: &TwoParamProblem) -> MuPair {
    let rates = |x: f64| local_rates(p.eps1, p.eps2, p.b.value(x), p.c.value(x));
    let (argmin0, mu0) = grid_then_golden(|x| rates(x).0);
    let (argmin1, mu1) = grid_then_golden(|x| rates(x).1);
    MuPair {
        mu0,
        mu1,
        argmin0,
        argmin1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// `eps1 << eps2^2 << 1`
    ConvectionReactionDiffusion,
    /// `eps1 ~ eps2^2`
    Intermediate,
    /// `eps2^2 << eps1 << 1`
    ReactionDiffusion,
}

impl RegimeKind {
    pub fn index(self) -> u8 {
        match self {
            RegimeKind::ConvectionReactionDiffusion => 1,
            RegimeKind::Intermediate => 2,
            RegimeKind::ReactionDiffusion => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(RegimeKind::ConvectionReactionDiffusion),
            2 => Some(RegimeKind::Intermediate),
            3 => Some(RegimeKind::ReactionDiffusion),
            _ => None,
        }
    }

    /// `(left, right)` layer widths.
    pub fn layer_widths(self, eps1: f64, eps2: f64) -> (f64, f64) {
        match self {
            RegimeKind::ConvectionReactionDiffusion => (eps2, eps1 / eps2),
            RegimeKind::Intermediate => (eps2, eps2),
            RegimeKind::ReactionDiffusion => (eps1.sqrt(), eps1.sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// `eps1 / eps2^2`
    pub ratio: f64,
    /// Reported in addition when `eps2` is of order one.
    pub convection_diffusion: bool,
}

pub const DEFAULT_THRESHOLDS: (f64, f64) = (0.1, 10.0);

pub fn classify_regime(eps1: f64, eps2: f64, thresholds: (f64, f64)) -> Regime {
    let ratio = eps1 / (eps2 * eps2);
    let (low, high) = thresholds;
    let kind = if ratio <= low {
        RegimeKind::ConvectionReactionDiffusion
    } else if ratio < high {
        RegimeKind::Intermediate
    } else {
        RegimeKind::ReactionDiffusion
    };
    Regime {
        kind,
        ratio,
        convection_diffusion: eps2 >= 0.9,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyNorm {
    /// `eps1 |w|_1^2 + ||w||_0^2`
    #[default]
    Default,
    /// `eps1 ||w'||_0^2 + ||w||_1^2`
    Paper,
}

/// Energy norm of `w`, given as `x -> (w(x), w'(x))`.
pub fn energy_norm(
    w: impl Fn(f64) -> (f64, f64),
    p: &TwoParamProblem,
    quad: &QuadSpec,
    variant: EnergyNorm,
) -> Result<f64> {
    let eps1 = p.eps1;
    let weight = match variant {
        EnergyNorm::Default => eps1,
        EnergyNorm::Paper => eps1 + 1.0,
    };
    let g = |x: f64| {
        let (v, dv) = w(x);
        weight * dv * dv + v * v
    };
    let coarse = quad.integrate(g).max(0.0).sqrt();
    let fine = quad.refined().integrate(g).max(0.0).sqrt();
    // differences of O(1) functions carry ~1e-16 pointwise noise, so the
    // two levels cannot agree better than that in absolute terms
    if (coarse - fine).abs() > UNDER_RESOLVED_REL * fine + NORM_ROUNDOFF_FLOOR {
        return Err(Error::QuadratureUnderResolved { coarse, fine });
    }
    Ok(fine)
}

/// Absolute disagreement allowed between the two quadrature levels of a norm.
pub const NORM_ROUNDOFF_FLOOR: f64 = 1e-14;
