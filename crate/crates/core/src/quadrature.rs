//! Gauss-Legendre rules and composite integration.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Panics unless `1 <= n <= 64`.
pub fn gauss_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!((1..=64).contains(&n), "gauss_rule supports 1..=64 points, got {n}");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Legendre values `P_0..=P_n` at `x`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 2..=n {
        let kf = k as f64;
        p.push(((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf);
    }
    p
}

/// Composite Gauss rule: `points` nodes on every interval between breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadSpec {
    pub breakpoints: Vec<f64>,
    pub points: usize,
}

impl QuadSpec {
    pub fn new(breakpoints: Vec<f64>, points: usize) -> Self {
        Self { breakpoints, points }
    }

    /// Same breakpoints with every interval halved and two extra points per interval.
    pub fn refined(&self) -> Self {
        let mut bp = Vec::with_capacity(2 * self.breakpoints.len());
        for w in self.breakpoints.windows(2) {
            bp.push(w[0]);
            bp.push(0.5 * (w[0] + w[1]));
        }
        if let Some(&last) = self.breakpoints.last() {
            bp.push(last);
        }
        Self {
            breakpoints: bp,
            points: (self.points + 2).min(64),
        }
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let (nodes, weights) = gauss_rule(self.points);
        let mut total = 0.0;
        for w in self.breakpoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut s = 0.0;
            for (xi, wi) in nodes.iter().zip(&weights) {
                s += wi * g(mid + half * xi);
            }
            total += half * s;
        }
        total
    }

    /// Integrate at this level and the refined level; error if they disagree.
    pub fn integrate_checked(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let coarse = self.integrate(&g);
        let fine = self.refined().integrate(&g);
        if (coarse - fine).abs() > UNDER_RESOLVED_REL * fine.abs() + UNDER_RESOLVED_ABS {
            return Err(Error::QuadratureUnderResolved { coarse, fine });
        }
        Ok(fine)
    }
}

/// Two quadrature levels must agree to this relative tolerance...
pub const UNDER_RESOLVED_REL: f64 = 1e-8;
/// ...plus this absolute floor, so integrands that vanish do not trip the check.
pub const UNDER_RESOLVED_ABS: f64 = 1e-28;
