use approx::assert_relative_eq;
use layeredbvp::expansion::{assemble, expand, residual_operator, select_M, ORDER};
use layeredbvp::problem::classify_regime;
use layeredbvp::verify::sample_grid;
use layeredbvp::{CoeffFn, RegimeKind, TwoParamProblem};

fn catalogue(eps1: f64, eps2: f64) -> TwoParamProblem {
    TwoParamProblem::new(eps1, eps2, CoeffFn::constant(1.0), CoeffFn::affine(1.0, 0.5), CoeffFn::exp(1.0, 1.0)).unwrap()
}

#[test]
fn regimes_follow_ratio() {
    assert_eq!(classify_regime(1e-4, 0.1, (0.1, 10.0)).kind, RegimeKind::ConvectionReactionDiffusion);
    assert_eq!(classify_regime(1e-2, 0.1, (0.1, 10.0)).kind, RegimeKind::Intermediate);
    assert_eq!(classify_regime(1e-2, 1e-3, (0.1, 10.0)).kind, RegimeKind::ReactionDiffusion);
}

#[test]
fn decomposition_meets_boundary_conditions_up_to_layer_tails() {
    for (e1, e2, kind) in [
        (1e-6, 0.02, RegimeKind::ConvectionReactionDiffusion),
        (1e-4, 0.02, RegimeKind::Intermediate),
        (1e-3, 1e-4, RegimeKind::ReactionDiffusion),
    ] {
        let p = catalogue(e1, e2);
        let m = select_M(&p, kind, 0.5, 12);
        let dec = assemble(&p, &expand(&p, kind, m, ORDER).unwrap()).unwrap();
        assert!(dec.eval(0.0).abs() < 1e-10, "{kind:?} u(0) = {}", dec.eval(0.0));
        assert!(dec.eval(1.0).abs() < 1e-10, "{kind:?} u(1) = {}", dec.eval(1.0));
    }
}

#[test]
fn residual_shrinks_with_order() {
    let p = catalogue(1e-5, 0.05);
    let kind = RegimeKind::ConvectionReactionDiffusion;
    let xs = sample_grid();
    let sup = |m| {
        let dec = assemble(&p, &expand(&p, kind, m, ORDER).unwrap()).unwrap();
        residual_operator(&dec, &xs).unwrap().iter().fold(0.0f64, |a, r| a.max(r.abs()))
    };
    let (r1, r3) = (sup(1), sup(3));
    assert!(r3 < r1 * 1e-2, "residual {r1:e} -> {r3:e}");
}

#[test]
fn decomposition_json_round_trips() {
    let p = catalogue(1e-4, 0.1);
    let dec = assemble(&p, &expand(&p, RegimeKind::ConvectionReactionDiffusion, 3, ORDER).unwrap()).unwrap();
    let back = layeredbvp::expansion::Decomposition::from_json(&dec.to_json().unwrap()).unwrap();
    for x in [0.0, 0.01, 0.3, 0.99, 1.0] {
        assert_relative_eq!(dec.eval(x), back.eval(x), max_relative = 1e-15);
    }
}
