//! Defect exponent `1/r = 1/p − 1/q` on `D = {p < q}` and the integral
//! `∫_D λ^{−r(x)} dx` that decides the embedding `L^q ⊂ L^p`.

use super::report::{tail_increments, DELTA_GROW, DELTA_STAB};
use super::{same_support, ConditionError, ConditionReport, Verdict};
use crate::grid::{ExponentField, GridDomain, GridFunction, Schedule};
use crate::EPS_TIE;

/// λ values tried by [`check_embedding`].
pub const EMBEDDING_LAMBDAS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, PartialEq)]
pub struct DefectField {
    /// `r = pq/(q − p)` on `d`, zero elsewhere.
    pub r: GridFunction,
    /// Cells with `q − p > EPS_TIE`.
    pub d: GridDomain,
}

pub fn defect_exponent(p: &ExponentField, q: &ExponentField) -> Result<DefectField, ConditionError> {
    same_support(p, q)?;
    let dom = p.domain();
    let d = dom.restrict(|i| q.get(i) - p.get(i) > EPS_TIE);
    let r = GridFunction::from_fn(dom, |i, _| {
        if d.contains(i) {
            let (a, b) = (p.get(i), q.get(i));
            a * b / (b - a)
        } else {
            0.0
        }
    })?;
    Ok(DefectField { r, d })
}

/// Partial integrals `∫_{D ∩ B(0,R_k)} λ^{−r}` with a convergence verdict.
pub fn defect_integral_estimate(
    rf: &DefectField,
    lambda: f64,
    schedule: &Schedule,
) -> Result<ConditionReport, ConditionError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(ConditionError::BadLambda(lambda));
    }
    let mut rep = ConditionReport::new("defect_integral", Verdict::Inconclusive);
    rep.parameters.lambda = Some(lambda);
    rep.parameters.radii = schedule.radii().to_vec();
    if rf.d.is_empty() {
        rep.verdict = Verdict::Holds;
        rep.push(None, "integral", 0.0);
        rep.notes.push("D is empty".into());
        return Ok(rep);
    }
    let m = schedule.len();
    if m < 3 {
        return Err(ConditionError::ShortSchedule(m));
    }
    let ln_lambda = lambda.ln();
    let partial = schedule.partial_integrals(&rf.d, |i| (-rf.r.get(i) * ln_lambda).exp())?;
    for (k, v) in partial.iter().enumerate() {
        rep.push(Some(schedule.radii()[k]), "integral", *v);
    }
    let total = partial[m - 1];
    let inc = tail_increments(&partial, 4);
    let last = *inc.last().expect("at least two increments");
    let non_increasing = inc.windows(2).all(|w| w[1] <= w[0]);
    let non_decreasing = inc.windows(2).all(|w| w[1] >= w[0]);
    rep.verdict = if non_increasing && last < DELTA_STAB * (1.0 + total) {
        Verdict::Holds
    } else if non_decreasing && inc.iter().all(|&d| d > DELTA_GROW) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    rep.notes.push(match rep.verdict {
        Verdict::Holds => "partial integrals converge (verdict holds = convergent)".into(),
        Verdict::Fails => "partial integrals diverge (verdict fails = divergent)".into(),
        Verdict::Inconclusive => "increments neither settle nor grow".into(),
    });
    Ok(rep)
}

/// `L^q ⊂ L^p` iff `p ≤ q` everywhere and the defect integral converges for
/// some λ in [`EMBEDDING_LAMBDAS`].
pub fn check_embedding(
    p: &ExponentField,
    q: &ExponentField,
    schedule: &Schedule,
) -> Result<ConditionReport, ConditionError> {
    same_support(p, q)?;
    let base = schedule.base();
    let mut rep = ConditionReport::new("embedding", Verdict::Inconclusive);
    rep.parameters.radii = schedule.radii().to_vec();
    let worst = base
        .cells()
        .map(|i| p.get(i) - q.get(i))
        .fold(f64::NEG_INFINITY, f64::max);
    rep.push(None, "max(p - q)", worst);
    if worst > EPS_TIE {
        rep.verdict = Verdict::Fails;
        rep.notes.push("p exceeds q on some cell".into());
        return Ok(rep);
    }
    let rf = defect_exponent(p, q)?;
    let mut all_divergent = true;
    for lambda in EMBEDDING_LAMBDAS {
        let sub = defect_integral_estimate(&rf, lambda, schedule)?;
        let value = sub.last("integral").unwrap_or(0.0);
        rep.push(None, format!("integral(lambda={lambda})"), value);
        rep.notes.push(format!("lambda = {lambda}: {}", describe(sub.verdict)));
        match sub.verdict {
            Verdict::Holds => {
                rep.verdict = Verdict::Holds;
                rep.parameters.lambda = Some(lambda);
                return Ok(rep);
            }
            Verdict::Inconclusive => all_divergent = false,
            Verdict::Fails => {}
        }
    }
    rep.verdict = if all_divergent {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(rep)
}

fn describe(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "convergent",
        Verdict::Fails => "divergent",
        Verdict::Inconclusive => "inconclusive",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn field(src: &str, s: &Schedule) -> ExponentField {
        ExponentField::sample(&parse(src).unwrap(), s.base()).unwrap()
    }

    fn quartic() -> (Schedule, ExponentField, ExponentField) {
        let s = Schedule::for_box(&[2.0], &[f64::INFINITY], 0.05, Schedule::geometric_radii(4.0, 13)).unwrap();
        let p = field("1/(1/2 - 1/x^2)", &s);
        let q = field("1/(1/2 - 1/x^2 - 1/x^4)", &s);
        (s, p, q)
    }

    #[test]
    fn quartic_defect_exponent() {
        let (_, p, q) = quartic();
        let rf = defect_exponent(&p, &q).unwrap();
        for i in rf.d.cells().take(1000) {
            let x = rf.d.center(i)[0];
            let rel = (rf.r.get(i) - x.powi(4)).abs() / x.powi(4);
            assert!(rel < 1e-7, "x = {x}, r = {}", rf.r.get(i));
        }
    }

    #[test]
    fn identity_within_scaled_tolerance() {
        let (_, p, q) = quartic();
        let rf = defect_exponent(&p, &q).unwrap();
        for i in rf.d.cells() {
            let (a, b) = (p.get(i), q.get(i));
            let lhs = 1.0 / rf.r.get(i);
            assert!((lhs - (1.0 / a - 1.0 / b)).abs() <= 1e-12 / a);
        }
    }

    #[test]
    fn quartic_integral_converges() {
        let (s, p, q) = quartic();
        let rf = defect_exponent(&p, &q).unwrap();
        for lambda in [1.5, 2.0, 4.0] {
            let r = defect_integral_estimate(&rf, lambda, &s).unwrap();
            assert_eq!(r.verdict, Verdict::Holds);
        }
        assert_eq!(check_embedding(&p, &q, &s).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn equal_exponents_have_empty_defect_set() {
        let (s, p, _) = quartic();
        let rf = defect_exponent(&p, &p).unwrap();
        assert!(rf.d.is_empty());
        let r = defect_integral_estimate(&rf, 2.0, &s).unwrap();
        assert_eq!((r.verdict, r.last("integral")), (Verdict::Holds, Some(0.0)));
        assert_eq!(check_embedding(&p, &p, &s).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn unit_defect_on_finite_set() {
        let s = Schedule::for_box(&[0.0], &[f64::INFINITY], 0.25, vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        let d = s.base().restrict(|i| s.base().center(i)[0] < 2.0);
        let r = GridFunction::from_fn(s.base(), |i, _| if d.contains(i) { 1.0 } else { 0.0 }).unwrap();
        let rep = defect_integral_estimate(&DefectField { r, d }, 2.0, &s).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.last("integral"), Some(1.0));
    }

    #[test]
    fn crossing_exponents_block_embedding() {
        let (s, p, q) = quartic();
        assert_eq!(check_embedding(&q, &p, &s).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn lambda_must_exceed_one() {
        let (s, p, q) = quartic();
        let rf = defect_exponent(&p, &q).unwrap();
        assert!(defect_integral_estimate(&rf, 1.0, &s).is_err());
    }
}
