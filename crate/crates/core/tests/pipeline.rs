use varlp::conditions::{check_finite_measure, check_lerner, ess_range};
use varlp::experiments::{estimate_constants, falsify, ConstantsOptions, FalsifyOptions, FalsifyOutcome};
use varlp::maximal::{Identity, Maximal};
use varlp::modular::{unit_ball_check, DEFAULT_RTOL};
use varlp::{luxemburg_norm, maximal_fast, modular, parse, ExponentField, GridDomain, GridFunction, Verdict};

fn exponent(src: &str, dom: &GridDomain) -> ExponentField {
    ExponentField::sample(&parse(src).unwrap(), dom).unwrap()
}

fn function(src: &str, dom: &GridDomain) -> GridFunction {
    GridFunction::sample(&parse(src).unwrap(), dom).unwrap()
}

#[test]
fn square_with_separated_exponents() {
    let dom = GridDomain::square_box([-1.0, -1.0], [1.0, 1.0], 0.125).unwrap();
    let p = exponent("1.5 + 0.25*exp(-(x1^2 + x2^2))", &dom);
    let q = exponent("2 + 0.5*abs(x2)", &dom);
    let f = function("if(x1^2 + x2^2 <= 0.25, 3, 0)", &dom);

    let (p_lo, p_hi) = ess_range(&p, &dom).unwrap();
    assert!(p_lo > 1.5 && p_hi <= 1.75);
    assert_eq!(check_finite_measure(&p, &q, &dom).unwrap().verdict, Verdict::Holds);
    assert_eq!(check_lerner(&p, &dom).unwrap().verdict, Verdict::Fails);

    let mf = maximal_fast(&f).mf;
    assert!(modular(&mf, &p, &dom).unwrap().value >= modular(&f, &p, &dom).unwrap().value);
    let norm = luxemburg_norm(&f, &p, &dom, DEFAULT_RTOL).unwrap();
    let unit = f.scale(1.0 / norm).unwrap();
    assert_eq!(unit_ball_check(&unit, &p, &dom, DEFAULT_RTOL).unwrap(), (true, true));

    assert!(matches!(
        falsify(&p, &q, &dom, &FalsifyOptions::default()).unwrap(),
        FalsifyOutcome::NoViolation
    ));
    let opts = ConstantsOptions {
        calibration: 30,
        holdout: 20,
        ..Default::default()
    };
    let rep = estimate_constants(&p, &q, &dom, &Maximal, &opts).unwrap();
    assert!(rep.all_pass() && rep.decompositions_exact());
    rep.ensure_validated().unwrap();
}

#[test]
fn identity_needs_no_safety_margin() {
    let dom = GridDomain::interval(0.0, 2.0, 0.05).unwrap();
    let p = exponent("2", &dom);
    let q = exponent("2 + x", &dom);
    let rep = estimate_constants(&p, &q, &dom, &Identity, &ConstantsOptions::default()).unwrap();
    assert!(rep.all_pass());
    assert!(rep.c_hat <= 1.0 + 1e-12);
}

#[test]
fn overlapping_exponents_are_falsified_in_two_dimensions() {
    let dom = GridDomain::square_box([0.0, 0.0], [1.0, 1.0], 0.0625).unwrap();
    let p = exponent("if(x1 > 0.5, 3, 2)", &dom);
    let out = falsify(&p, &p, &dom, &FalsifyOptions::default()).unwrap();
    let w = out.witness().expect("a violating cube exists");
    w.verify().unwrap();
    assert!(w.cube.q_minus < w.alpha && w.beta < w.cube.p_plus);
    assert_eq!(out.exit_code(), if w.final_ratio() > 1e3 { 1 } else { 2 });
}
