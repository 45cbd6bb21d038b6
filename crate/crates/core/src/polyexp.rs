//! Exact algebra of polynomial-times-exponential functions
//! `z -> sum_k p_k(z) exp(-rate_k z)` and exact solvers for constant
//! coefficient layer equations driven by such right-hand sides.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt17;

/// Rates closer than this (relative to `max(1, rate)`) are the same rate.
pub const RATE_MERGE_TOL: f64 = 1e-12;

/// Relative residual accepted by the post-solve self-check.
const SELF_CHECK_TOL: f64 = 1e-9;

const SELF_CHECK_POINTS: [f64; 10] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 20.0, 30.0];

fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() < RATE_MERGE_TOL * b.abs().max(1.0)
}

/// One `poly(z) * exp(-rate * z)` term, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyExpTerm {
    pub poly: Vec<f64>,
    pub rate: f64,
}

impl PolyExpTerm {
    fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    fn eval(&self, z: f64) -> f64 {
        poly_eval(&self.poly, z) * (-self.rate * z).exp()
    }

    fn abs_eval(&self, z: f64) -> f64 {
        let az = z.abs();
        self.poly.iter().rev().fold(0.0, |acc, c| acc * az + c.abs()) * (-self.rate * z).exp()
    }

    fn derive(&self) -> Self {
        // (p e^{-l z})' = (p' - l p) e^{-l z}
        let mut out: Vec<f64> = self.poly.iter().map(|c| -self.rate * c).collect();
        for (k, c) in self.poly.iter().enumerate().skip(1) {
            out[k - 1] += k as f64 * c;
        }
        Self {
            poly: out,
            rate: self.rate,
        }
    }
}

fn poly_eval(p: &[f64], z: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

fn add_into(dst: &mut Vec<f64>, src: &[f64], scale: f64) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0.0);
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}

fn trim(p: &mut Vec<f64>) {
    while p.last() == Some(&0.0) {
        p.pop();
    }
}

/// A finite sum of polynomial times decaying exponential.
///
/// Terms are kept sorted by rate with near-equal rates merged and exactly
/// zero polynomials dropped, so the empty sum is the zero function.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolyExp {
    terms: Vec<PolyExpTerm>,
}

impl PolyExp {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(terms: Vec<PolyExpTerm>) -> Result<Self> {
        for t in &terms {
            if !t.rate.is_finite() || t.poly.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("polyexp term".into()));
            }
        }
        let mut v = Self::zero();
        for t in terms {
            v.push_term(&t.poly, t.rate, 1.0);
        }
        Ok(v)
    }

    /// `coeff * z^power * exp(-rate z)`
    pub fn monomial(coeff: f64, power: usize, rate: f64) -> Self {
        let mut poly = vec![0.0; power + 1];
        poly[power] = coeff;
        let mut v = Self::zero();
        v.push_term(&poly, rate, 1.0);
        v
    }

    pub fn exp(coeff: f64, rate: f64) -> Self {
        Self::monomial(coeff, 0, rate)
    }

    pub fn terms(&self) -> &[PolyExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// All rates strictly positive.
    pub fn is_decaying(&self) -> bool {
        self.terms.iter().all(|t| t.rate > 0.0)
    }

    /// Largest polynomial degree over all terms (`None` for the zero function).
    pub fn degree(&self) -> Option<usize> {
        self.terms.iter().map(PolyExpTerm::degree).max()
    }

    /// Slowest decay rate present.
    pub fn dominant_rate(&self) -> Option<f64> {
        self.terms.first().map(|t| t.rate)
    }

    fn push_term(&mut self, poly: &[f64], rate: f64, scale: f64) {
        if poly.iter().all(|&c| c == 0.0) || scale == 0.0 {
            return;
        }
        match self.terms.iter().position(|t| same_rate(t.rate, rate)) {
            Some(i) => {
                add_into(&mut self.terms[i].poly, poly, scale);
                trim(&mut self.terms[i].poly);
                if self.terms[i].poly.is_empty() {
                    self.terms.remove(i);
                }
            }
            None => {
                let mut p: Vec<f64> = poly.iter().map(|c| c * scale).collect();
                trim(&mut p);
                let at = self.terms.partition_point(|t| t.rate < rate);
                self.terms.insert(at, PolyExpTerm { poly: p, rate });
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, -1.0)
    }

    /// `self + k * other`
    pub fn add_scaled(&self, other: &Self, k: f64) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push_term(&t.poly, t.rate, k);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::zero().add_scaled(self, k)
    }

    /// Multiply by the polynomial `q(z)` (ascending coefficients).
    pub fn mul_poly(&self, q: &[f64]) -> Self {
        let mut out = Self::zero();
        for t in &self.terms {
            let mut prod = vec![0.0; t.poly.len() + q.len().saturating_sub(1)];
            for (i, a) in t.poly.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    prod[i + j] += a * b;
                }
            }
            out.push_term(&prod, t.rate, 1.0);
        }
        out
    }

    /// Multiply by `coeff * z^k` (an exact coefficient shift).
    pub fn mul_monomial(&self, coeff: f64, k: usize) -> Self {
        let mut q = vec![0.0; k + 1];
        q[k] = coeff;
        self.mul_poly(&q)
    }

    pub fn derive(&self) -> Self {
        let mut out = Self::zero();
        for t in &self.terms {
            let d = t.derive();
            out.push_term(&d.poly, d.rate, 1.0);
        }
        out
    }

    pub fn derive_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.derive())
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    /// `n`-th derivative at `z`.
    pub fn eval_derivative(&self, z: f64, n: usize) -> f64 {
        if n == 0 {
            return self.eval(z);
        }
        self.terms
            .iter()
            .map(|t| {
                let mut d = t.clone();
                for _ in 0..n {
                    d = d.derive();
                }
                d.eval(z)
            })
            .sum()
    }

    /// `sum |coeff| |z|^k exp(-rate z)`: a magnitude scale for residual checks.
    pub fn abs_eval(&self, z: f64) -> f64 {
        self.terms.iter().map(|t| t.abs_eval(z)).sum()
    }

    /// Rigorous upper bound on `sup_{z >= z0} |v(z)|`.
    ///
    /// Each term is bounded by `sum |c_k| z_end^k exp(-rate z0)` with
    /// `z_end = z0 + (deg + 10) / rate`; past `z_end` every monomial is
    /// already decreasing.
    pub fn sup_tail(&self, z0: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                if t.rate <= 0.0 {
                    return f64::INFINITY;
                }
                let z_end = z0.max(0.0) + (t.degree() as f64 + 10.0) / t.rate;
                let bound: f64 = t.poly.iter().rev().fold(0.0, |acc, c| acc * z_end + c.abs());
                bound * (-t.rate * z0).exp()
            })
            .sum()
    }
}

impl fmt::Display for PolyExp {
    /// `(c0 + c1 z + c2 z^2)·exp(-λ z) + ...` with 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            for (k, c) in t.poly.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                match k {
                    0 => write!(f, "{}", fmt17(*c))?,
                    1 => write!(f, "{} z", fmt17(*c))?,
                    _ => write!(f, "{} z^{k}", fmt17(*c))?,
                }
            }
            write!(f, ")·exp(-{} z)", fmt17(t.rate))?;
        }
        Ok(())
    }
}

pub fn polyexp_derive(v: &PolyExp) -> PolyExp {
    v.derive()
}

pub fn polyexp_eval(v: &PolyExp, z: f64) -> f64 {
    v.eval(z)
}

pub fn polyexp_sup_tail(v: &PolyExp, z0: f64) -> f64 {
    v.sup_tail(z0)
}

/// Constant-coefficient operator `a2 w'' + a1 w' + a0 w` on the half line.
///
/// Solutions are sought among decaying functions, so exactly one root of the
/// characteristic polynomial `a2 l^2 - a1 l + a0` (for `w = exp(-l z)`) may
/// be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerOde {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl LayerOde {
    pub fn new(a2: f64, a1: f64, a0: f64) -> Self {
        Self { a2, a1, a0 }
    }

    /// `P(l) = a2 l^2 - a1 l + a0`, the symbol on `exp(-l z)`.
    pub fn symbol(&self, rate: f64) -> f64 {
        self.a2 * rate * rate - self.a1 * rate + self.a0
    }

    /// The unique positive root of the symbol.
    pub fn decay_rate(&self) -> Result<f64> {
        let roots: Vec<f64> = if self.a2 == 0.0 {
            if self.a1 == 0.0 {
                return Err(Error::LayerOperator("is purely algebraic".into()));
            }
            vec![self.a0 / self.a1]
        } else {
            let disc = self.a1 * self.a1 - 4.0 * self.a2 * self.a0;
            if disc <= 0.0 {
                return Err(Error::LayerOperator(format!(
                    "has no pair of distinct real modes (discriminant {disc:e})"
                )));
            }
            let sq = disc.sqrt();
            // cancellation-free pair: roots q/a2 and a0/q
            let sign = if self.a1 >= 0.0 { 1.0 } else { -1.0 };
            let q = 0.5 * (self.a1 + sign * sq);
            vec![q / self.a2, self.a0 / q]
        };
        let positive: Vec<f64> = roots.iter().copied().filter(|&r| r > 0.0).collect();
        match positive.as_slice() {
            [r] => Ok(*r),
            [] => Err(Error::LayerOperator("has no decaying mode".into())),
            _ => Err(Error::LayerOperator(
                "has two decaying modes; one boundary condition cannot fix the solution".into(),
            )),
        }
    }

    pub fn apply(&self, v: &PolyExp) -> PolyExp {
        let d1 = v.derive();
        let d2 = d1.derive();
        v.scale(self.a0)
            .add_scaled(&d1, self.a1)
            .add_scaled(&d2, self.a2)
    }

    /// The decaying solution with `w(0) = alpha`.
    pub fn solve(&self, rhs: &PolyExp, alpha: f64) -> Result<PolyExp> {
        let rate0 = self.decay_rate()?;
        let mut out = PolyExp::zero();
        for t in rhs.terms() {
            if t.rate == 0.0 && self.a2 != 0.0 {
                return Err(Error::NoDecayingSolution);
            }
            if t.rate <= 0.0 {
                return Err(Error::NonDecayingInput(t.rate));
            }
            if same_rate(t.rate, rate0) {
                let q = self.resonant_particular(&t.poly, rate0)?;
                out.push_term(&q, rate0, 1.0);
            } else {
                let q = self.particular(&t.poly, t.rate);
                out.push_term(&q, t.rate, 1.0);
            }
        }
        let homogeneous = alpha - out.eval(0.0);
        out.push_term(&[homogeneous], rate0, 1.0);
        self.self_check(&out, rhs, alpha)?;
        Ok(out)
    }

    /// Polynomial `q` with `L[q e^{-l z}] = p e^{-l z}` when `P(l) != 0`.
    ///
    /// Substituting gives `a2 q'' + (a1 - 2 a2 l) q' + P(l) q = p`, solved
    /// from the top coefficient down.
    fn particular(&self, p: &[f64], rate: f64) -> Vec<f64> {
        let b = self.a1 - 2.0 * self.a2 * rate;
        let c = self.symbol(rate);
        let n = p.len();
        let mut q = vec![0.0; n + 2];
        for k in (0..n).rev() {
            let kf = k as f64;
            q[k] = (p[k] - b * (kf + 1.0) * q[k + 1] - self.a2 * (kf + 2.0) * (kf + 1.0) * q[k + 2]) / c;
        }
        q.truncate(n);
        q
    }

    /// Resonant case `P(l) = 0`: solve for `s = q'` and integrate, raising the degree by one.
    fn resonant_particular(&self, p: &[f64], rate: f64) -> Result<Vec<f64>> {
        let b = self.a1 - 2.0 * self.a2 * rate;
        if b == 0.0 {
            return Err(Error::LayerOperator("has a double root".into()));
        }
        let n = p.len();
        let mut s = vec![0.0; n + 1];
        for k in (0..n).rev() {
            s[k] = (p[k] - self.a2 * (k as f64 + 1.0) * s[k + 1]) / b;
        }
        let mut q = vec![0.0; n + 1];
        for k in 0..n {
            q[k + 1] = s[k] / (k as f64 + 1.0);
        }
        Ok(q)
    }

    fn self_check(&self, v: &PolyExp, rhs: &PolyExp, alpha: f64) -> Result<()> {
        let d1 = v.derive();
        let d2 = d1.derive();
        let residual = self.apply(v).sub(rhs);
        // Measured against the largest magnitude over the sample, since low
        // coefficients can be pure cancellation noise.
        let scale = SELF_CHECK_POINTS
            .iter()
            .map(|&z| {
                self.a2.abs() * d2.abs_eval(z)
                    + self.a1.abs() * d1.abs_eval(z)
                    + self.a0.abs() * v.abs_eval(z)
                    + rhs.abs_eval(z)
            })
            .fold(0.0, f64::max);
        for &z in &SELF_CHECK_POINTS {
            let r = residual.eval(z);
            if r.abs() > SELF_CHECK_TOL * scale + f64::MIN_POSITIVE {
                return Err(Error::SelfCheckFailed(format!(
                    "layer ODE residual {r:e} at z = {z} (scale {scale:e})"
                )));
            }
        }
        let v0 = v.eval(0.0);
        if (v0 - alpha).abs() > 1e-12 * (1.0 + alpha.abs() + v.abs_eval(0.0)) {
            return Err(Error::SelfCheckFailed(format!(
                "boundary value {v0:e} differs from {alpha:e}"
            )));
        }
        Ok(())
    }
}

/// Decaying `v` with `b0 v' + c0 v = rhs`, `v(0) = alpha`.
pub fn solve_first_order(b0: f64, c0: f64, rhs: &PolyExp, alpha: f64) -> Result<PolyExp> {
    if b0 == 0.0 || c0 / b0 <= 0.0 {
        return Err(Error::LayerOperator(format!(
            "b0 v' + c0 v with c0/b0 = {} does not decay",
            c0 / b0
        )));
    }
    LayerOde::new(0.0, b0, c0).solve(rhs, alpha)
}

/// Decaying `w` with `w'' + b0 w' = rhs`, `w(0) = alpha`.
pub fn solve_second_order_layer(b0: f64, rhs: &PolyExp, alpha: f64) -> Result<PolyExp> {
    if b0 <= 0.0 {
        return Err(Error::LayerOperator(format!(
            "w'' + b0 w' with b0 = {b0} does not decay"
        )));
    }
    LayerOde::new(1.0, b0, 0.0).solve(rhs, alpha)
}
