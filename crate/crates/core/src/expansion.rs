//! Asymptotic expansions `u ~ sum alpha^i beta^j (u_ij + left_ij + right_ij)`
//! for the three regimes, built by matching powers of two small parameters.
//!
//! | regime | alpha       | beta            | left variable   | right variable        |
//! |--------|-------------|-----------------|-----------------|-----------------------|
//! | 1      | eps2        | eps1 / eps2^2   | x / eps2        | (1 - x) eps2 / eps1   |
//! | 2      | eps2        | (unused)        | x / eps2        | (1 - x) / eps2        |
//! | 3      | sqrt(eps1)  | eps2/sqrt(eps1) | x / sqrt(eps1)  | (1 - x) / sqrt(eps1)  |
//!
//! In regime 2 the ratio `r = eps1 / eps2^2` is kept as a fixed constant of the
//! operator, so the expansion is in the single parameter `eps2`.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyexp::{LayerOde, PolyExp};
use crate::problem::{RegimeKind, TwoParamProblem};
use crate::series::{PowerSeries, TaylorProvider, DEFAULT_ORDER};

/// Number of expansion centers on `[0, 1]` for the smooth terms.
pub const DEFAULT_CENTERS: usize = 17;

/// A smooth function on `[0, 1]` stored as Taylor series at equispaced centers.
///
/// Evaluation uses the nearest center, so every series is only ever summed
/// within half a center spacing of its expansion point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothTerm {
    pieces: Vec<PowerSeries>,
}

pub fn smooth_centers(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

impl SmoothTerm {
    pub fn pieces(&self) -> &[PowerSeries] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(PowerSeries::is_zero)
    }

    /// The series whose center is nearest to `x`.
    pub fn at(&self, x: f64) -> &PowerSeries {
        let n = self.pieces.len();
        let k = (x.clamp(0.0, 1.0) * (n - 1) as f64).round() as usize;
        &self.pieces[k.min(n - 1)]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.at(x).eval(x)
    }

    pub fn eval_derivative(&self, x: f64, n: usize) -> f64 {
        self.at(x).eval_derivative(x, n)
    }

    /// Smallest series order over all centers.
    pub fn order(&self) -> usize {
        self.pieces.iter().map(PowerSeries::order).min().unwrap_or(0)
    }

    fn zero_like(centers: &[f64], order: usize) -> Self {
        Self {
            pieces: centers.iter().map(|&c| PowerSeries::zero(c, order)).collect(),
        }
    }

    fn add_scaled(&self, other: &Self, k: f64) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| a.add(&b.scale(k)))
            .collect::<Result<_>>()?;
        Ok(Self { pieces })
    }
}

/// Coefficient of one operator term.
#[derive(Debug, Clone, Copy)]
enum Coef {
    Const(f64),
    B(f64),
    C(f64),
}

/// `coef * D^deriv u_{(i,j) - shift}`; for variable coefficients the `k`-th
/// Taylor term additionally shifts by `k * step`.
#[derive(Debug, Clone, Copy)]
struct OpTerm {
    coef: Coef,
    deriv: usize,
    shift: (usize, usize),
    step: (usize, usize),
}

const fn term(coef: Coef, deriv: usize, shift: (usize, usize), step: (usize, usize)) -> OpTerm {
    OpTerm {
        coef,
        deriv,
        shift,
        step,
    }
}

/// Smooth-part operator: coefficient of `alpha^i beta^j` in `L u`.
fn smooth_operator(kind: RegimeKind, ratio: f64) -> Vec<OpTerm> {
    use Coef::*;
    match kind {
        RegimeKind::ConvectionReactionDiffusion => vec![
            term(Const(-1.0), 2, (2, 1), (0, 0)),
            term(B(1.0), 1, (1, 0), (0, 0)),
            term(C(1.0), 0, (0, 0), (0, 0)),
        ],
        RegimeKind::Intermediate => vec![
            term(Const(-ratio), 2, (2, 0), (0, 0)),
            term(B(1.0), 1, (1, 0), (0, 0)),
            term(C(1.0), 0, (0, 0), (0, 0)),
        ],
        RegimeKind::ReactionDiffusion => vec![
            term(Const(-1.0), 2, (2, 0), (0, 0)),
            term(B(1.0), 1, (1, 1), (0, 0)),
            term(C(1.0), 0, (0, 0), (0, 0)),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn endpoint(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }

    /// Sign of the stretched variable relative to `x`.
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Layer operator in the stretched variable, with data frozen as Taylor
/// polynomials about the endpoint (`x = endpoint + sign * scale * z`).
fn layer_operator(kind: RegimeKind, side: Side, ratio: f64) -> Vec<OpTerm> {
    use Coef::*;
    match (kind, side) {
        // -beta L'' + b(alpha X) L' + c(alpha X) L
        (RegimeKind::ConvectionReactionDiffusion, Side::Left) => vec![
            term(Const(-1.0), 2, (0, 1), (0, 0)),
            term(B(1.0), 1, (0, 0), (1, 0)),
            term(C(1.0), 0, (0, 0), (1, 0)),
        ],
        // after multiplying by -beta: R'' + b(1 - alpha beta Z) R' - beta c R
        (RegimeKind::ConvectionReactionDiffusion, Side::Right) => vec![
            term(Const(1.0), 2, (0, 0), (0, 0)),
            term(B(1.0), 1, (0, 0), (1, 1)),
            term(C(-1.0), 0, (0, 1), (1, 1)),
        ],
        (RegimeKind::Intermediate, Side::Left) => vec![
            term(Const(-ratio), 2, (0, 0), (0, 0)),
            term(B(1.0), 1, (0, 0), (1, 0)),
            term(C(1.0), 0, (0, 0), (1, 0)),
        ],
        (RegimeKind::Intermediate, Side::Right) => vec![
            term(Const(-ratio), 2, (0, 0), (0, 0)),
            term(B(-1.0), 1, (0, 0), (1, 0)),
            term(C(1.0), 0, (0, 0), (1, 0)),
        ],
        (RegimeKind::ReactionDiffusion, Side::Left) => vec![
            term(Const(-1.0), 2, (0, 0), (0, 0)),
            term(B(1.0), 1, (0, 1), (1, 0)),
            term(C(1.0), 0, (0, 0), (1, 0)),
        ],
        (RegimeKind::ReactionDiffusion, Side::Right) => vec![
            term(Const(-1.0), 2, (0, 0), (0, 0)),
            term(B(-1.0), 1, (0, 1), (1, 0)),
            term(C(1.0), 0, (0, 0), (1, 0)),
        ],
    }
}

/// Index grid `(i, j)` with `i <= m`, `j <= jmax`, in an order where every
/// entry follows all entries of smaller `i + j`.
fn index_order(m: usize, jmax: usize) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = (0..=m).flat_map(|i| (0..=jmax).map(move |j| (i, j))).collect();
    v.sort_by_key(|&(i, j)| (i + j, i));
    v
}

fn jmax_for(kind: RegimeKind, m: usize) -> usize {
    match kind {
        RegimeKind::Intermediate => 0,
        _ => m,
    }
}

fn lower(idx: (usize, usize), by: (usize, usize)) -> Option<(usize, usize)> {
    Some((idx.0.checked_sub(by.0)?, idx.1.checked_sub(by.1)?))
}

/// Grid of smooth terms, `grid[i][j]`.
pub type SmoothGrid = Vec<Vec<SmoothTerm>>;
/// Grid of layer terms in the stretched variable, `grid[i][j]`.
pub type LayerGrid = Vec<Vec<PolyExp>>;

fn smooth_terms(p: &TwoParamProblem, kind: RegimeKind, m: usize, order: usize, centers: usize) -> Result<SmoothGrid> {
    if order < 2 * m + 2 {
        return Err(Error::OrderExhausted(format!(
            "series order {order} leaves no headroom for M = {m}"
        )));
    }
    let jmax = jmax_for(kind, m);
    let ops = smooth_operator(kind, p.ratio());
    let xs = smooth_centers(centers);
    let mut grid: SmoothGrid = vec![vec![SmoothTerm::zero_like(&xs, order); jmax + 1]; m + 1];
    let data: Vec<(PowerSeries, PowerSeries, PowerSeries)> = xs
        .iter()
        .map(|&x0| Ok((p.b.taylor(x0, order)?, p.c.taylor(x0, order)?, p.f.taylor(x0, order)?)))
        .collect::<Result<_>>()?;
    for (i, j) in index_order(m, jmax) {
        let mut pieces = Vec::with_capacity(xs.len());
        for (k, (b, c, f)) in data.iter().enumerate() {
            let mut acc = if (i, j) == (0, 0) {
                f.clone()
            } else {
                PowerSeries::zero(xs[k], order)
            };
            for t in &ops {
                if t.shift == (0, 0) {
                    continue;
                }
                let Some(src) = lower((i, j), t.shift) else { continue };
                let u = &grid[src.0][src.1].pieces[k];
                if u.is_zero() {
                    continue;
                }
                let du = u.derive_n(t.deriv)?;
                let contrib = match t.coef {
                    Coef::Const(a) => du.scale(a),
                    Coef::B(a) => b.mul(&du)?.scale(a),
                    Coef::C(a) => c.mul(&du)?.scale(a),
                };
                acc = acc.sub(&contrib)?;
            }
            pieces.push(acc.div(c)?);
        }
        grid[i][j] = SmoothTerm { pieces };
    }
    Ok(grid)
}

/// Constant-coefficient part (no index shift, Taylor order 0) of a layer operator.
fn leading_ode(ops: &[OpTerm], coef0: impl Fn(Coef) -> f64) -> LayerOde {
    let (mut a2, mut a1, mut a0) = (0.0, 0.0, 0.0);
    for t in ops.iter().filter(|t| t.shift == (0, 0)) {
        let v = coef0(t.coef);
        match t.deriv {
            0 => a0 += v,
            1 => a1 += v,
            _ => a2 += v,
        }
    }
    LayerOde::new(a2, a1, a0)
}

/// Decay rate of the leading-order layer at one endpoint, in its stretched variable.
pub fn leading_rate(p: &TwoParamProblem, kind: RegimeKind, side: Side) -> Result<f64> {
    let x = side.endpoint();
    let (b0, c0) = (p.b.value(x), p.c.value(x));
    let ode = leading_ode(&layer_operator(kind, side, p.ratio()), |c| match c {
        Coef::Const(a) => a,
        Coef::B(a) => a * b0,
        Coef::C(a) => a * c0,
    });
    ode.decay_rate()
}

fn layer_terms(p: &TwoParamProblem, kind: RegimeKind, side: Side, m: usize, smooth: &SmoothGrid) -> Result<LayerGrid> {
    let jmax = jmax_for(kind, m);
    let ops = layer_operator(kind, side, p.ratio());
    let x_end = side.endpoint();
    let sigma = side.sign();
    let bk = p.b.taylor(x_end, m + 1)?;
    let ck = p.c.taylor(x_end, m + 1)?;
    let coef_k = |c: Coef, k: usize| -> f64 {
        let s = sigma.powi(k as i32);
        match c {
            Coef::Const(a) => {
                if k == 0 {
                    a
                } else {
                    0.0
                }
            }
            Coef::B(a) => a * bk.coeffs()[k] * s,
            Coef::C(a) => a * ck.coeffs()[k] * s,
        }
    };
    let ode = leading_ode(&ops, |c| coef_k(c, 0));
    let mut grid: LayerGrid = vec![vec![PolyExp::zero(); jmax + 1]; m + 1];
    for (i, j) in index_order(m, jmax) {
        let mut rhs = PolyExp::zero();
        for t in &ops {
            for k in 0..=m {
                if t.shift == (0, 0) && k == 0 {
                    continue;
                }
                if k > 0 && t.step == (0, 0) {
                    break;
                }
                let by = (t.shift.0 + k * t.step.0, t.shift.1 + k * t.step.1);
                let Some(src) = lower((i, j), by) else { break };
                let v = &grid[src.0][src.1];
                let a = coef_k(t.coef, k);
                if v.is_zero() || a == 0.0 {
                    continue;
                }
                rhs = rhs.add(&v.derive_n(t.deriv).mul_monomial(-a, k));
            }
        }
        let alpha = -smooth[i][j].eval(x_end);
        grid[i][j] = ode.solve(&rhs, alpha).map_err(|e| {
            Error::LayerOperator(format!("{side:?} layer ({i},{j}) of regime {}: {e}", kind.index()))
        })?;
    }
    Ok(grid)
}

/// Smooth terms `u_ij`, `i, j <= m`, of the regime-1 expansion.
pub fn smooth_terms_regime1(p: &TwoParamProblem, m: usize, order: usize) -> Result<SmoothGrid> {
    smooth_terms(p, RegimeKind::ConvectionReactionDiffusion, m, order, DEFAULT_CENTERS)
}

/// Left (`x / eps2`) and right (`(1 - x) eps2 / eps1`) layer terms of regime 1.
pub fn layer_terms_regime1(p: &TwoParamProblem, m: usize, smooth: &SmoothGrid) -> Result<(LayerGrid, LayerGrid)> {
    let kind = RegimeKind::ConvectionReactionDiffusion;
    Ok((layer_terms(p, kind, Side::Left, m, smooth)?, layer_terms(p, kind, Side::Right, m, smooth)?))
}

/// All terms of one regime's expansion up to index `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTable {
    pub regime: RegimeKind,
    pub m: usize,
    /// `eps1 / eps2^2` the operators were built with.
    pub ratio: f64,
    pub smooth: SmoothGrid,
    pub left: LayerGrid,
    pub right: LayerGrid,
}

impl ExpansionTable {
    /// Every stored `(i, j)`; regime 2 has `j = 0` only.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        index_order(self.m, jmax_for(self.regime, self.m))
    }
}

pub fn expand(p: &TwoParamProblem, kind: RegimeKind, m: usize, order: usize) -> Result<ExpansionTable> {
    let smooth = smooth_terms(p, kind, m, order, DEFAULT_CENTERS)?;
    let left = layer_terms(p, kind, Side::Left, m, &smooth)?;
    let right = layer_terms(p, kind, Side::Right, m, &smooth)?;
    debug!("expanded regime {} to M = {m}", kind.index());
    Ok(ExpansionTable {
        regime: kind,
        m,
        ratio: p.ratio(),
        smooth,
        left,
        right,
    })
}

pub fn expand_regime1(p: &TwoParamProblem, m: usize, order: usize) -> Result<ExpansionTable> {
    expand(p, RegimeKind::ConvectionReactionDiffusion, m, order)
}

pub fn expand_regime2(p: &TwoParamProblem, m: usize, order: usize) -> Result<ExpansionTable> {
    expand(p, RegimeKind::Intermediate, m, order)
}

pub fn expand_regime3(p: &TwoParamProblem, m: usize, order: usize) -> Result<ExpansionTable> {
    expand(p, RegimeKind::ReactionDiffusion, m, order)
}

/// Upper index bound from the floor rule of each regime.
#[allow(non_snake_case)]
pub fn select_M(p: &TwoParamProblem, kind: RegimeKind, delta: f64, m_max: usize) -> usize {
    let raw = match kind {
        RegimeKind::ConvectionReactionDiffusion => {
            if p.eps1 >= p.eps2 * p.eps2 {
                warn!(
                    "eps1 = {} >= eps2^2 = {}: regime-1 expansion degenerate, using M = 0",
                    p.eps1,
                    p.eps2 * p.eps2
                );
                return 0;
            }
            delta * p.eps2 * p.eps2 / p.eps1
        }
        RegimeKind::Intermediate => delta / p.eps2,
        RegimeKind::ReactionDiffusion => delta / p.eps1.sqrt(),
    };
    // guard against 4.999999 from rounding in the ratio
    let m = (raw * (1.0 + 4.0 * f64::EPSILON)).floor();
    if m >= m_max as f64 {
        m_max
    } else {
        m as usize
    }
}

/// Small parameters `(alpha, beta)` of a regime.
pub fn expansion_parameters(kind: RegimeKind, eps1: f64, eps2: f64) -> (f64, f64) {
    match kind {
        RegimeKind::ConvectionReactionDiffusion => (eps2, eps1 / (eps2 * eps2)),
        RegimeKind::Intermediate => (eps2, 0.0),
        RegimeKind::ReactionDiffusion => (eps1.sqrt(), eps2 / eps1.sqrt()),
    }
}

/// Weight `alpha^i beta^j` of term `(i, j)`.
pub fn term_weight(kind: RegimeKind, eps1: f64, eps2: f64, i: usize, j: usize) -> f64 {
    let (a, b) = expansion_parameters(kind, eps1, eps2);
    a.powi(i as i32) * if j == 0 { 1.0 } else { b.powi(j as i32) }
}

/// A boundary-layer function kept in its stretched variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub side: Side,
    /// Physical width: the stretched variable is `dist(x, endpoint) / scale`.
    pub scale: f64,
    pub profile: PolyExp,
}

impl Layer {
    pub fn stretched(&self, x: f64) -> f64 {
        match self.side {
            Side::Left => x / self.scale,
            Side::Right => (1.0 - x) / self.scale,
        }
    }

    /// `n`-th derivative in the physical variable.
    pub fn eval_derivative(&self, x: f64, n: usize) -> f64 {
        let z = self.stretched(x);
        let chain = (self.side.sign() / self.scale).powi(n as i32);
        chain * self.profile.eval_derivative(z, n)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.profile.eval(self.stretched(x))
    }
}

/// `u_M + left + right` with all pieces weighted and summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub problem: TwoParamProblem,
    pub regime: RegimeKind,
    pub m: usize,
    pub smooth: SmoothTerm,
    pub left: Layer,
    pub right: Layer,
}

impl Decomposition {
    pub fn widths(&self) -> (f64, f64) {
        (self.left.scale, self.right.scale)
    }

    pub fn eval_derivative(&self, x: f64, n: usize) -> f64 {
        self.smooth.eval_derivative(x, n) + self.left.eval_derivative(x, n) + self.right.eval_derivative(x, n)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivative(x, 0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn assemble(p: &TwoParamProblem, table: &ExpansionTable) -> Result<Decomposition> {
    let kind = table.regime;
    let xs: Vec<f64> = table.smooth[0][0].pieces.iter().map(PowerSeries::center).collect();
    let order = table.smooth.iter().flatten().map(SmoothTerm::order).min().unwrap_or(0);
    let mut smooth = SmoothTerm::zero_like(&xs, order);
    let (mut left, mut right) = (PolyExp::zero(), PolyExp::zero());
    for (i, j) in table.indices() {
        let w = term_weight(kind, p.eps1, p.eps2, i, j);
        if w == 0.0 {
            continue;
        }
        if !table.smooth[i][j].is_zero() {
            smooth = smooth.add_scaled(&table.smooth[i][j], w)?;
        }
        left = left.add_scaled(&table.left[i][j], w);
        right = right.add_scaled(&table.right[i][j], w);
    }
    let (wl, wr) = kind.layer_widths(p.eps1, p.eps2);
    Ok(Decomposition {
        problem: p.clone(),
        regime: kind,
        m: table.m,
        smooth,
        left: Layer {
            side: Side::Left,
            scale: wl,
            profile: left,
        },
        right: Layer {
            side: Side::Right,
            scale: wr,
            profile: right,
        },
    })
}

/// `L(u_M + layers) - f` at each point.
pub fn residual_operator(dec: &Decomposition, xs: &[f64]) -> Result<Vec<f64>> {
    if dec.smooth.order() < 2 {
        return Err(Error::OrderExhausted("smooth part needs two derivatives".into()));
    }
    let p = &dec.problem;
    Ok(xs
        .iter()
        .map(|&x| {
            let (u, du, d2u) = (dec.eval_derivative(x, 0), dec.eval_derivative(x, 1), dec.eval_derivative(x, 2));
            p.apply(x, u, du, d2u) - p.f.value(x)
        })
        .collect())
}

/// Default series order used by the engines.
pub const ORDER: usize = DEFAULT_ORDER;
