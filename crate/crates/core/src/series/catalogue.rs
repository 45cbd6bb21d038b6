use serde::{Deserialize, Serialize};

use super::{PowerSeries, TaylorProvider};
use crate::error::{Error, Result};

/// Built-in analytic coefficient functions with exact derivative rules.
///
/// Serialized as `{"kind": ..., <parameters>}`; polynomial coefficients are
/// listed in ascending powers of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoeffFn {
    Constant {
        value: f64,
    },
    Affine {
        offset: f64,
        slope: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `amplitude * exp(rate * x)`
    Exp {
        amplitude: f64,
        rate: f64,
    },
    /// `amplitude * sin(frequency * x + phase)`
    Sin {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude * cos(frequency * x + phase)`
    Cos {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `numerator(x) / denominator(x)`; the denominator must not vanish on [0, 1].
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
    Sum {
        terms: Vec<CoeffFn>,
    },
    Product {
        factors: Vec<CoeffFn>,
    },
}

impl CoeffFn {
    pub fn constant(value: f64) -> Self {
        CoeffFn::Constant { value }
    }

    pub fn affine(offset: f64, slope: f64) -> Self {
        CoeffFn::Affine { offset, slope }
    }

    pub fn exp(amplitude: f64, rate: f64) -> Self {
        CoeffFn::Exp { amplitude, rate }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            CoeffFn::Constant { value } => *value,
            CoeffFn::Affine { offset, slope } => offset + slope * x,
            CoeffFn::Polynomial { coeffs } => horner(coeffs, x),
            CoeffFn::Exp { amplitude, rate } => amplitude * (rate * x).exp(),
            CoeffFn::Sin {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * x + phase).sin(),
            CoeffFn::Cos {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * x + phase).cos(),
            CoeffFn::Rational {
                numerator,
                denominator,
            } => horner(numerator, x) / horner(denominator, x),
            CoeffFn::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
            CoeffFn::Product { factors } => factors.iter().map(|t| t.value(x)).product(),
        }
    }

    /// `n`-th derivative at `x`.
    pub fn derivative(&self, x: f64, n: usize) -> Result<f64> {
        let t = self.taylor(x, n)?;
        Ok(t.coeffs()[n] * factorial(n))
    }

    /// Structural checks that do not depend on sampling.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidProblem(format!("coefficient {what}")));
        match self {
            CoeffFn::Polynomial { coeffs } if coeffs.is_empty() => bad("polynomial has no coefficients"),
            CoeffFn::Rational { numerator, denominator }
                if numerator.is_empty() || denominator.is_empty() =>
            {
                bad("rational has an empty polynomial")
            }
            CoeffFn::Sum { terms } if terms.is_empty() => bad("sum has no terms"),
            CoeffFn::Product { factors } if factors.is_empty() => bad("product has no factors"),
            CoeffFn::Sum { terms } => terms.iter().try_for_each(|t| t.validate()),
            CoeffFn::Product { factors } => factors.iter().try_for_each(|t| t.validate()),
            _ => Ok(()),
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn polynomial_taylor(coeffs: &[f64], x0: f64, order: usize) -> Result<PowerSeries> {
    let mut padded = coeffs.to_vec();
    if padded.len() < order + 1 {
        padded.resize(order + 1, 0.0);
    }
    PowerSeries::new(0.0, padded)?.recenter(x0, order)
}

/// Taylor coefficients of `amplitude * sin(w x + phase)` about `x0`.
fn sinusoid_taylor(amplitude: f64, w: f64, shift: f64, x0: f64, order: usize) -> Vec<f64> {
    let arg = w * x0 + shift;
    let (s, c) = arg.sin_cos();
    let cycle = [s, c, -s, -c];
    let mut scale = amplitude;
    (0..=order)
        .map(|n| {
            if n > 0 {
                scale *= w / n as f64;
            }
            scale * cycle[n % 4]
        })
        .collect()
}

impl TaylorProvider for CoeffFn {
    fn taylor(&self, x0: f64, order: usize) -> Result<PowerSeries> {
        match self {
            CoeffFn::Constant { value } => Ok(PowerSeries::constant(x0, *value, order)),
            CoeffFn::Affine { offset, slope } => polynomial_taylor(&[*offset, *slope], x0, order),
            CoeffFn::Polynomial { coeffs } => polynomial_taylor(coeffs, x0, order),
            CoeffFn::Exp { amplitude, rate } => {
                let mut term = amplitude * (rate * x0).exp();
                let coeffs = (0..=order)
                    .map(|n| {
                        if n > 0 {
                            term *= rate / n as f64;
                        }
                        term
                    })
                    .collect();
                PowerSeries::new(x0, coeffs)
            }
            CoeffFn::Sin {
                amplitude,
                frequency,
                phase,
            } => PowerSeries::new(x0, sinusoid_taylor(*amplitude, *frequency, *phase, x0, order)),
            CoeffFn::Cos {
                amplitude,
                frequency,
                phase,
            } => PowerSeries::new(
                x0,
                sinusoid_taylor(
                    *amplitude,
                    *frequency,
                    phase + std::f64::consts::FRAC_PI_2,
                    x0,
                    order,
                ),
            ),
            CoeffFn::Rational {
                numerator,
                denominator,
            } => {
                let n = polynomial_taylor(numerator, x0, order)?;
                let d = polynomial_taylor(denominator, x0, order)?;
                n.div(&d)
            }
            CoeffFn::Sum { terms } => {
                let mut acc = PowerSeries::zero(x0, order);
                for t in terms {
                    acc = acc.add(&t.taylor(x0, order)?)?;
                }
                Ok(acc)
            }
            CoeffFn::Product { factors } => {
                let mut acc = PowerSeries::constant(x0, 1.0, order);
                for t in factors {
                    acc = acc.mul(&t.taylor(x0, order)?)?;
                }
                Ok(acc)
            }
        }
    }
}
