//! Verdict engines for the exponent conditions behind the modular
//! inequality `∫ Mf^{p(x)} ≤ c₁ ∫ |f|^{q(x)} + c₂`.
//!
//! Statements about sets of infinite measure are decided on a truncation
//! schedule: a quantity "stabilizes" when its increments over the last
//! three truncations stay below [`DELTA_STAB`], and "grows" when they stay
//! above [`DELTA_GROW`] without decreasing. Anything else is reported as
//! [`Verdict::Inconclusive`].

mod defect;
mod omega;
mod report;
mod touching;

use thiserror::Error;

use crate::grid::{ExponentField, GridDomain, GridError};
use crate::EPS_TIE;

pub use defect::{check_embedding, defect_exponent, defect_integral_estimate, DefectField, EMBEDDING_LAMBDAS};
pub use omega::{construct_omega, omega_with_kappa, OmegaCertificate, KAPPA_OFFSETS};
pub use report::{
    grows, stabilizes, tail_increments, ConditionReport, Evidence, Parameters, Verdict, DELTA_GROW, DELTA_STAB,
};
pub use touching::{check_touching, touching_sets};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("region is empty")]
    EmptyRegion,
    #[error("truncation schedule needs at least 3 radii, got {0}")]
    ShortSchedule(usize),
    #[error("lambda must exceed 1, got {0}")]
    BadLambda(f64),
    #[error("no admissible kappa among {candidates:?}: {{q > kappa}} does not stabilize")]
    NoAdmissibleKappa { candidates: Vec<f64> },
    #[error("exponents live on different grids")]
    MismatchedExponents,
}

/// `(p₋, p₊)` over the masked cells of `region`.
pub fn ess_range(p: &ExponentField, region: &GridDomain) -> Result<(f64, f64), ConditionError> {
    p.check_region(region)?;
    p.range_over(region).ok_or(ConditionError::EmptyRegion)
}

fn same_support(p: &ExponentField, q: &ExponentField) -> Result<(), ConditionError> {
    if p.domain() != q.domain() {
        return Err(ConditionError::MismatchedExponents);
    }
    Ok(())
}

/// Bounded Ω: the inequality holds iff `p₊(Ω) ≤ q₋(Ω)`.
pub fn check_finite_measure(
    p: &ExponentField,
    q: &ExponentField,
    dom: &GridDomain,
) -> Result<ConditionReport, ConditionError> {
    same_support(p, q)?;
    let (_, p_plus) = ess_range(p, dom)?;
    let (q_minus, _) = ess_range(q, dom)?;
    let verdict = if p_plus <= q_minus + EPS_TIE {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let mut rep = ConditionReport::new("finite_measure", verdict);
    rep.push(None, "p_plus", p_plus);
    rep.push(None, "q_minus", q_minus);
    rep.push(None, "measure", dom.measure());
    Ok(rep)
}

/// `q = p`: the inequality holds iff `p` is a constant greater than 1.
pub fn check_lerner(p: &ExponentField, dom: &GridDomain) -> Result<ConditionReport, ConditionError> {
    let (p_minus, p_plus) = ess_range(p, dom)?;
    let verdict = if p_plus - p_minus <= EPS_TIE && p_minus > 1.0 + EPS_TIE {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let mut rep = ConditionReport::new("constant_exponent", verdict);
    rep.push(None, "p_minus", p_minus);
    rep.push(None, "p_plus", p_plus);
    Ok(rep)
}
