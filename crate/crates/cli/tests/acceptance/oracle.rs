//! Reference computations written independently of the library engines.
//!
//! Data are restricted to `b = 1`, `c = c0 + c1 x`, `f = 1`, where every
//! smooth term is a finite Laurent sum in `t = c(x)` and every layer term is
//! a single polynomial times one exponential.

use std::collections::HashMap;

/// Closed-form solution of `-e1 u'' + e2 u' + u = 1`, `u(0) = u(1) = 0`.
pub fn exact_constant(e1: f64, e2: f64, x: f64) -> (f64, f64) {
    let s = (e2 * e2 + 4.0 * e1).sqrt();
    let r1 = -2.0 / (e2 + s);
    let r2 = (e2 + s) / (2.0 * e1);
    // u = 1 + A e^{r1 x} + B e^{r2 (x - 1)}
    let (p, q) = (r1.exp(), (-r2).exp());
    let det = 1.0 - p * q;
    let a = (-1.0 + q) / det;
    let b = (-1.0 + p) / det;
    let ea = (r1 * x).exp();
    let eb = (r2 * (x - 1.0)).exp();
    (1.0 + a * ea + b * eb, a * r1 * ea + b * r2 * eb)
}

/// `sum_k a_k t^{-k}` with `t = c0 + c1 x`.
#[derive(Clone, Debug, Default)]
pub struct Laurent(pub Vec<f64>);

impl Laurent {
    fn add_scaled(&mut self, o: &Laurent, k: f64) {
        if self.0.len() < o.0.len() {
            self.0.resize(o.0.len(), 0.0);
        }
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a += k * b;
        }
    }

    fn dx(&self, c1: f64) -> Laurent {
        let mut out = vec![0.0; self.0.len() + 1];
        for (k, a) in self.0.iter().enumerate() {
            out[k + 1] -= k as f64 * c1 * a;
        }
        Laurent(out)
    }

    fn over_t(&self) -> Laurent {
        let mut out = vec![0.0];
        out.extend(&self.0);
        Laurent(out)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, a| acc / t + a)
    }
}

/// `poly(z) exp(-rate z)`.
#[derive(Clone, Debug)]
pub struct Pe {
    pub poly: Vec<f64>,
    pub rate: f64,
}

impl Pe {
    fn zero(rate: f64) -> Self {
        Pe { poly: vec![], rate }
    }

    fn d(&self) -> Pe {
        let n = self.poly.len();
        let mut out = vec![0.0; n];
        for (k, c) in self.poly.iter().enumerate() {
            out[k] -= self.rate * c;
            if k > 0 {
                out[k - 1] += k as f64 * c;
            }
        }
        Pe { poly: out, rate: self.rate }
    }

    fn dn(&self, n: usize) -> Pe {
        (0..n).fold(self.clone(), |v, _| v.d())
    }

    fn times_z(&self) -> Pe {
        let mut out = vec![0.0];
        out.extend(&self.poly);
        Pe { poly: out, rate: self.rate }
    }

    fn add_scaled(&mut self, o: &Pe, k: f64) {
        assert!((self.rate - o.rate).abs() < 1e-12, "oracle mixes rates");
        if self.poly.len() < o.poly.len() {
            self.poly.resize(o.poly.len(), 0.0);
        }
        for (a, b) in self.poly.iter_mut().zip(&o.poly) {
            *a += k * b;
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, c| acc * z + c) * (-self.rate * z).exp()
    }
}

fn poly_d(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Decaying solution of `a2 v'' + a1 v' + a0 v = q e^{-rate z}`, `v(0) = alpha`,
/// for `rate` a root of the symbol.
fn solve_layer(op: (f64, f64, f64), rate: f64, q: &[f64], alpha: f64) -> Pe {
    let (a2, a1, _) = op;
    let k = a1 - 2.0 * rate * a2;
    // a2 P'' + k P' = q; V = P' = sum_n (-a2/k)^n q^(n) / k
    let mut v = vec![0.0; q.len()];
    let mut term = q.to_vec();
    let mut factor = 1.0 / k;
    while !term.is_empty() {
        for (a, b) in v.iter_mut().zip(&term) {
            *a += factor * b;
        }
        term = poly_d(&term);
        factor *= -a2 / k;
    }
    let mut p = vec![alpha];
    p.extend(v.iter().enumerate().map(|(n, c)| c / (n + 1) as f64));
    Pe { poly: p, rate }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    One,
    Two,
    Three,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

/// Source term `coef * z^zpow * D^deriv v_{i - di, j - dj}`.
#[derive(Clone, Copy, Debug)]
pub struct Src {
    pub coef: f64,
    pub deriv: usize,
    pub zpow: usize,
    pub di: usize,
    pub dj: usize,
}

const fn src(coef: f64, deriv: usize, zpow: usize, di: usize, dj: usize) -> Src {
    Src { coef, deriv, zpow, di, dj }
}

/// Data `c = c0 + c1 x` (with `b = f = 1`) and, for the intermediate engine, `r = eps1/eps2^2`.
#[derive(Clone, Copy, Debug)]
pub struct Data {
    pub c0: f64,
    pub c1: f64,
    pub r: f64,
}

/// Leading operator `(a2, a1, a0)`, decay rate and shifted sources of each layer.
pub fn layer_equation(e: Engine, end: End, d: Data) -> ((f64, f64, f64), f64, Vec<Src>) {
    let (c0, c1, r) = (d.c0, d.c1, d.r);
    let cr = c0 + c1;
    match (e, end) {
        (Engine::One, End::Left) => ((0.0, 1.0, c0), c0, vec![src(1.0, 2, 0, 0, 1), src(-c1, 0, 1, 1, 0)]),
        (Engine::One, End::Right) => ((-1.0, -1.0, 0.0), 1.0, vec![src(-cr, 0, 0, 0, 1), src(c1, 0, 1, 1, 2)]),
        (Engine::Two, End::Left) => {
            let l = (-1.0 + (1.0 + 4.0 * r * c0).sqrt()) / (2.0 * r);
            ((-r, 1.0, c0), l, vec![src(-c1, 0, 1, 1, 0)])
        }
        (Engine::Two, End::Right) => {
            let l = (1.0 + (1.0 + 4.0 * r * cr).sqrt()) / (2.0 * r);
            ((-r, -1.0, cr), l, vec![src(c1, 0, 1, 1, 0)])
        }
        (Engine::Three, End::Left) => ((-1.0, 0.0, c0), c0.sqrt(), vec![src(-1.0, 1, 0, 0, 1), src(-c1, 0, 1, 1, 0)]),
        (Engine::Three, End::Right) => ((-1.0, 0.0, cr), cr.sqrt(), vec![src(1.0, 1, 0, 0, 1), src(c1, 0, 1, 1, 0)]),
    }
}

fn smooth_sources(e: Engine, r: f64) -> Vec<Src> {
    match e {
        Engine::One => vec![src(-1.0, 1, 0, 1, 0), src(1.0, 2, 0, 2, 1)],
        Engine::Two => vec![src(-1.0, 1, 0, 1, 0), src(r, 2, 0, 2, 0)],
        Engine::Three => vec![src(1.0, 2, 0, 2, 0), src(-1.0, 1, 0, 1, 1)],
    }
}

/// Index pairs with `i + j <= n`, ascending in `i + j`; the intermediate engine has `j = 0` only.
pub fn indices(e: Engine, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for s in 0..=n {
        for i in (0..=s).rev() {
            let j = s - i;
            if e == Engine::Two && j > 0 {
                continue;
            }
            out.push((i, j));
        }
    }
    out
}

/// Terms of the ansatz found by matching powers, one index pair at a time.
pub struct Oracle {
    pub data: Data,
    pub smooth: HashMap<(usize, usize), Laurent>,
    pub left: HashMap<(usize, usize), Pe>,
    pub right: HashMap<(usize, usize), Pe>,
}

impl Oracle {
    pub fn new(e: Engine, data: Data, n: usize) -> Self {
        let idx = indices(e, n);
        let mut smooth: HashMap<(usize, usize), Laurent> = HashMap::new();
        for &(i, j) in &idx {
            let mut rhs = Laurent(if (i, j) == (0, 0) { vec![1.0] } else { vec![] });
            for s in smooth_sources(e, data.r) {
                if i < s.di || j < s.dj {
                    continue;
                }
                if let Some(v) = smooth.get(&(i - s.di, j - s.dj)) {
                    let mut dv = v.clone();
                    for _ in 0..s.deriv {
                        dv = dv.dx(data.c1);
                    }
                    rhs.add_scaled(&dv, s.coef);
                }
            }
            smooth.insert((i, j), rhs.over_t());
        }
        let mut sides = Vec::new();
        for end in [End::Left, End::Right] {
            let (op, rate, sources) = layer_equation(e, end, data);
            let t_end = match end {
                End::Left => data.c0,
                End::Right => data.c0 + data.c1,
            };
            let mut terms: HashMap<(usize, usize), Pe> = HashMap::new();
            for &(i, j) in &idx {
                let mut rhs = Pe::zero(rate);
                for s in &sources {
                    if i < s.di || j < s.dj {
                        continue;
                    }
                    if let Some(v) = terms.get(&(i - s.di, j - s.dj)) {
                        let mut w = v.dn(s.deriv);
                        for _ in 0..s.zpow {
                            w = w.times_z();
                        }
                        rhs.add_scaled(&w, s.coef);
                    }
                }
                let alpha = -smooth[&(i, j)].eval(t_end);
                terms.insert((i, j), solve_layer(op, rate, &rhs.poly, alpha));
            }
            sides.push(terms);
        }
        let right = sides.pop().unwrap();
        let left = sides.pop().unwrap();
        Oracle { data, smooth, left, right }
    }

    pub fn smooth_at(&self, ij: (usize, usize), x: f64) -> f64 {
        self.smooth[&ij].eval(self.data.c0 + self.data.c1 * x)
    }
}
