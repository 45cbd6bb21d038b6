//! Truncated power series about a real center.
//!
//! A [`PowerSeries`] of order `N` stores `a_0 .. a_N` with
//! `a_k = g^(k)(center) / k!`. Arithmetic truncates to the smaller order of
//! the operands, so every coefficient of a result is exact up to rounding.

mod catalogue;

pub use catalogue::CoeffFn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order for data and smooth expansion terms.
pub const DEFAULT_ORDER: usize = 40;

/// Constant terms below this magnitude are rejected as divisors.
const DIVISOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    center: f64,
    coeffs: Vec<f64>,
}

/// Binary operation selector for [`series_combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl PowerSeries {
    pub fn new(center: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::OrderExhausted("empty coefficient vector".into()));
        }
        if !center.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("power series".into()));
        }
        Ok(Self { center, coeffs })
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { center, coeffs }
    }

    pub fn zero(center: f64, order: usize) -> Self {
        Self::constant(center, 0.0, order)
    }

    /// The series of `x` itself about `center`.
    pub fn identity(center: f64, order: usize) -> Self {
        let mut s = Self::constant(center, center, order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order()) + 1;
        Self {
            center: self.center,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            center: self.center,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    fn check_center(&self, other: &Self) -> Result<()> {
        if self.center != other.center {
            return Err(Error::CenterMismatch(self.center, other.center));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_center(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|k| f(self.coeffs[k], other.coeffs[k])).collect();
        Ok(Self {
            center: self.center,
            coeffs,
        })
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|m| self.coeffs[m] * other.coeffs[k - m]).sum())
            .collect();
        Ok(Self {
            center: self.center,
            coeffs,
        })
    }

    /// Truncated quotient by forward substitution.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let b0 = other.coeffs[0];
        if b0.abs() < DIVISOR_FLOOR {
            return Err(Error::DivisionByZeroConstantTerm(b0));
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut q: Vec<f64> = Vec::with_capacity(n);
        for k in 0..n {
            let acc: f64 = (1..=k).map(|m| other.coeffs[m] * q[k - m]).sum();
            q.push((self.coeffs[k] - acc) / b0);
        }
        Ok(Self {
            center: self.center,
            coeffs: q,
        })
    }

    pub fn derive(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::OrderExhausted(
                "cannot differentiate an order-0 series".into(),
            ));
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| (k + 1) as f64 * c)
            .collect();
        Ok(Self {
            center: self.center,
            coeffs,
        })
    }

    /// `n`-fold derivative.
    pub fn derive_n(&self, n: usize) -> Result<Self> {
        if n > self.order() {
            return Err(Error::OrderExhausted(format!(
                "derivative {n} of an order-{} series",
                self.order()
            )));
        }
        let mut s = self.clone();
        for _ in 0..n {
            s = s.derive()?;
        }
        Ok(s)
    }

    /// Horner evaluation of `sum a_k (x - center)^k`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value of the `n`-th derivative at `x` (zero beyond the stored order).
    pub fn eval_derivative(&self, x: f64, n: usize) -> f64 {
        if n > self.order() {
            return 0.0;
        }
        let t = x - self.center;
        let mut acc = 0.0;
        for k in (n..self.coeffs.len()).rev() {
            acc = acc * t + self.coeffs[k] * falling_factorial(k, n);
        }
        acc
    }

    /// Exact binomial re-expansion about `x0`, keeping `order + 1` terms.
    pub fn recenter(&self, x0: f64, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::InsufficientOrder {
                requested: order,
                available: self.order(),
            });
        }
        let h = x0 - self.center;
        // Repeated synthetic division by (t - h): the k-th remainder is b_k.
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(order + 1);
        for m in 0..=order {
            for k in (m + 1..n).rev() {
                work[k - 1] += h * work[k];
            }
            out.push(work[m]);
        }
        Ok(Self {
            center: x0,
            coeffs: out,
        })
    }
}

fn falling_factorial(k: usize, n: usize) -> f64 {
    ((k - n + 1)..=k).fold(1.0, |acc, m| acc * m as f64)
}

/// Exact arithmetic on two series sharing a center.
pub fn series_combine(a: &PowerSeries, b: &PowerSeries, op: SeriesOp) -> Result<PowerSeries> {
    match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Sub => a.sub(b),
        SeriesOp::Mul => a.mul(b),
        SeriesOp::Div => a.div(b),
    }
}

pub fn series_derive(a: &PowerSeries) -> Result<PowerSeries> {
    a.derive()
}

pub fn series_eval(a: &PowerSeries, x: f64) -> f64 {
    a.eval(x)
}

/// Anything able to report Taylor coefficients `g^(k)(x0)/k!`.
pub trait TaylorProvider {
    fn taylor(&self, x0: f64, order: usize) -> Result<PowerSeries>;
}

impl TaylorProvider for PowerSeries {
    fn taylor(&self, x0: f64, order: usize) -> Result<PowerSeries> {
        self.recenter(x0, order)
    }
}

pub fn taylor_at<G: TaylorProvider + ?Sized>(g: &G, x0: f64, order: usize) -> Result<PowerSeries> {
    g.taylor(x0, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn s(coeffs: &[f64]) -> PowerSeries {
        PowerSeries::new(0.0, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn add_cancels() {
        let r = series_combine(&s(&[1.0, 1.0]), &s(&[1.0, -1.0]), SeriesOp::Add).unwrap();
        assert_eq!(r.coeffs(), &[2.0, 0.0]);
    }

    #[test]
    fn difference_of_squares() {
        let r = series_combine(&s(&[1.0, 1.0, 0.0]), &s(&[1.0, -1.0, 0.0]), SeriesOp::Mul).unwrap();
        assert_eq!(r.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn geometric_quotient() {
        let n = 12;
        let one = PowerSeries::constant(0.0, 1.0, n);
        let mut den = vec![0.0; n + 1];
        den[0] = 1.0;
        den[1] = -1.0;
        let r = one.div(&s(&den)).unwrap();
        assert!(r.coeffs().iter().all(|&c| c == 1.0));
        assert_eq!(r.order(), n);
    }

    #[test]
    fn division_guards_constant_term() {
        let err = s(&[1.0, 1.0]).div(&s(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DivisionByZeroConstantTerm(_)));
    }

    #[test]
    fn centers_must_match() {
        let a = PowerSeries::constant(0.0, 1.0, 2);
        let b = PowerSeries::constant(0.5, 1.0, 2);
        assert!(matches!(a.add(&b), Err(Error::CenterMismatch(..))));
    }

    #[test]
    fn derive_examples() {
        assert_eq!(s(&[0.0, 0.0, 1.0]).derive().unwrap().coeffs(), &[0.0, 2.0]);
        assert!(PowerSeries::constant(0.0, 3.0, 3).derive().unwrap().is_zero());
        // term-by-term oracle: d/dx sum x^k = sum k x^(k-1)
        let oracle: Vec<f64> = (1..4).map(|k| k as f64).collect();
        assert_eq!(s(&[1.0, 1.0, 1.0, 1.0]).derive().unwrap().coeffs(), oracle.as_slice());
        assert!(matches!(s(&[1.0]).derive(), Err(Error::OrderExhausted(_))));
    }

    #[test]
    fn eval_examples() {
        let a = PowerSeries::new(0.3, vec![1.0, 1.0, 0.5]).unwrap();
        assert_eq!(a.eval(0.3), 1.0);
        let b = PowerSeries::new(0.25, vec![0.0, 1.0]).unwrap();
        assert_eq!(b.eval(2.25), 2.0);
        // oracle: the correctly rounded constant e
        let mut coeffs = vec![1.0; 21];
        for k in 1..=20 {
            coeffs[k] = coeffs[k - 1] / k as f64;
        }
        let e = PowerSeries::new(0.0, coeffs).unwrap().eval(1.0);
        assert!((e - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn taylor_of_reciprocal_at_one() {
        let g = CoeffFn::Rational {
            numerator: vec![1.0],
            denominator: vec![1.0, 1.0],
        };
        let t = taylor_at(&g, 1.0, 2).unwrap();
        assert_relative_eq!(t.coeffs()[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(t.coeffs()[1], -0.25, max_relative = 1e-15);
        assert_relative_eq!(t.coeffs()[2], 0.125, max_relative = 1e-15);
    }

    #[test]
    fn taylor_examples() {
        let e = taylor_at(&CoeffFn::Exp { amplitude: 1.0, rate: 1.0 }, 0.0, 2).unwrap();
        assert_eq!(e.coeffs(), &[1.0, 1.0, 0.5]);
        let c = taylor_at(&CoeffFn::Constant { value: 3.0 }, 0.7, 4).unwrap();
        assert_eq!(c.coeffs(), &[3.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn recenter_needs_order() {
        let a = s(&[1.0, 2.0]);
        assert!(matches!(
            a.recenter(0.5, 3),
            Err(Error::InsufficientOrder { requested: 3, available: 1 })
        ));
    }

    #[test]
    fn derivative_evaluation_matches_repeated_derive() {
        let a = PowerSeries::new(0.5, (0..10).map(|k| 1.0 / (k as f64 + 1.0)).collect()).unwrap();
        for n in 0..6 {
            let d = a.derive_n(n).unwrap();
            assert_relative_eq!(a.eval_derivative(0.8, n), d.eval(0.8), max_relative = 1e-13);
        }
    }

    fn arb_series(order: usize) -> impl Strategy<Value = PowerSeries> {
        proptest::collection::vec(-2.0f64..2.0, order + 1)
            .prop_map(|c| PowerSeries::new(0.0, c).unwrap())
    }

    fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| {
            let scale = x.abs().max(y.abs()).max(1.0);
            (x - y).abs() <= rel * scale
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(8), b in arb_series(8), c in arb_series(8)) {
            let l = a.add(&b).unwrap().add(&c).unwrap();
            let r = a.add(&b.add(&c).unwrap()).unwrap();
            prop_assert!(close(l.coeffs(), r.coeffs(), 1e-13));
            let l = a.mul(&b.add(&c).unwrap()).unwrap();
            let r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert!(close(l.coeffs(), r.coeffs(), 1e-13));
        }

        #[test]
        fn div_mul_round_trip(a in arb_series(10), b in arb_series(10), b0 in 0.5f64..2.0) {
            // keep the divisor well conditioned so the quotient stays bounded
            let mut bc: Vec<f64> = b.coeffs().iter().map(|c| c * 0.2 * b0).collect();
            bc[0] = b0;
            let b = PowerSeries::new(0.0, bc).unwrap();
            let back = a.div(&b).unwrap().mul(&b).unwrap();
            prop_assert!(close(back.coeffs(), a.coeffs(), 1e-12));
        }

        #[test]
        fn derivative_matches_finite_difference(a in arb_series(6), x in -0.3f64..0.3) {
            let h = 1e-5;
            let fd = (a.eval(x + h) - a.eval(x - h)) / (2.0 * h);
            let exact = a.derive().unwrap().eval(x);
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
        }

        #[test]
        fn recentring_round_trip(a in arb_series(12), shift in -0.5f64..0.5) {
            let there = taylor_at(&a, shift, 12).unwrap();
            let back = taylor_at(&there, 0.0, 12).unwrap();
            prop_assert!(close(back.coeffs(), a.coeffs(), 1e-12));
        }
    }
}
