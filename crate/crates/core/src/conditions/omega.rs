//! Explicit weight `ω` certifying the modular inequality on sets of infinite
//! measure:
//!
//! ```text
//! ω = λ^{−r/p}   on D \ E,      ω = 1   on D ∩ E,      E = {q > κ}
//! ```
//!
//! where `κ` is chosen so that `E` has finite measure. Then `0 < ω ≤ 1`,
//! both `ω^{−|p₊−p|}` and `ω^{−|q−p₊|}` are at most `λ^q ≤ λ^κ`, and
//! `ρ_{p,D}(ω) = ∫_{D∖E} λ^{−r} + |E|`.
//!
//! `ω` can underflow for large `r`, so positivity and the sup-norm bounds
//! are checked on `log ω`.

use serde::Serialize;

use super::report::stabilizes;
use super::touching::truncated_ranges;
use super::{defect_exponent, same_support, ConditionError};
use crate::grid::{ExponentField, GridDomain, GridFunction, Schedule};

/// Offsets above `p₊(Ω)` tried for `κ`, smallest first.
pub const KAPPA_OFFSETS: [f64; 3] = [0.25, 0.5, 1.0];

/// Relative slack used when comparing logarithms of the sup-norms with `κ log λ`.
const LOG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct OmegaCertificate {
    pub lambda: f64,
    pub kappa: f64,
    pub p_plus: f64,
    /// `{q > κ}` has stabilizing measure on the schedule.
    pub admissible: bool,
    /// `|E ∩ B(0, R_k)|` per truncation.
    pub e_measures: Vec<f64>,
    /// `log ‖ω^{−|p₊−p|}‖_∞` and `log ‖ω^{−|q−p₊|}‖_∞` over `D`.
    pub log_sup_p: f64,
    pub log_sup_q: f64,
    /// `ρ_{p,D ∩ B(0,R_k)}(ω)` per truncation.
    pub modular: Vec<f64>,
    pub radii: Vec<f64>,
    #[serde(skip)]
    pub omega: GridFunction,
    /// `log ω` per grid cell (0 outside `D`).
    #[serde(skip)]
    pub log_omega: Vec<f64>,
    #[serde(skip)]
    pub d: GridDomain,
    #[serde(skip)]
    pub e: GridDomain,
}

impl OmegaCertificate {
    fn log_bound(&self) -> f64 {
        self.kappa * self.lambda.ln()
    }

    fn within(value: f64, bound: f64) -> bool {
        value <= bound + LOG_SLACK * bound.abs().max(1.0)
    }

    /// `0 < ω ≤ 1` on every cell of `D`.
    pub fn omega_in_unit_interval(&self) -> bool {
        self.d.cells().all(|i| {
            let l = self.log_omega[i];
            l.is_finite() && l <= 0.0
        })
    }

    /// Each sup-norm is at most `λ^κ`.
    pub fn sup_norms_bounded(&self) -> bool {
        let b = self.log_bound();
        Self::within(self.log_sup_p, b) && Self::within(self.log_sup_q, b)
    }

    /// The product of the sup-norms is at most `λ^{2κ}`.
    pub fn product_bounded(&self) -> bool {
        Self::within(self.log_sup_p + self.log_sup_q, 2.0 * self.log_bound())
    }

    pub fn sup_p(&self) -> f64 {
        self.log_sup_p.exp()
    }

    pub fn sup_q(&self) -> f64 {
        self.log_sup_q.exp()
    }

    /// Final increment of the partial modulars relative to their value.
    pub fn final_relative_increment(&self) -> f64 {
        let n = self.modular.len();
        if n < 2 {
            return f64::INFINITY;
        }
        let (a, b) = (self.modular[n - 2], self.modular[n - 1]);
        if b == 0.0 {
            0.0
        } else {
            (b - a).abs() / b.abs()
        }
    }

    pub fn modular_stabilizes(&self, rel: f64) -> bool {
        self.final_relative_increment() < rel
    }
}

/// Builds the certificate with the smallest admissible `κ` among
/// `p₊(Ω) + offset`.
pub fn construct_omega(
    p: &ExponentField,
    q: &ExponentField,
    lambda: f64,
    schedule: &Schedule,
    offsets: &[f64],
) -> Result<OmegaCertificate, ConditionError> {
    let p_plus = omega_p_plus(p, schedule)?;
    let mut kappas: Vec<f64> = offsets.iter().map(|o| p_plus + o).collect();
    kappas.sort_by(f64::total_cmp);
    for &kappa in &kappas {
        let cert = omega_with_kappa(p, q, lambda, kappa, schedule)?;
        if cert.admissible {
            return Ok(cert);
        }
    }
    Err(ConditionError::NoAdmissibleKappa { candidates: kappas })
}

fn omega_p_plus(p: &ExponentField, schedule: &Schedule) -> Result<f64, ConditionError> {
    p.check_region(schedule.base())?;
    let ranges = truncated_ranges(p, schedule.base(), schedule);
    ranges
        .last()
        .copied()
        .flatten()
        .map(|(_, hi)| hi)
        .ok_or(ConditionError::EmptyRegion)
}

/// Certificate for a fixed `κ`; `admissible` records whether `{q > κ}`
/// stabilized.
pub fn omega_with_kappa(
    p: &ExponentField,
    q: &ExponentField,
    lambda: f64,
    kappa: f64,
    schedule: &Schedule,
) -> Result<OmegaCertificate, ConditionError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(ConditionError::BadLambda(lambda));
    }
    same_support(p, q)?;
    let p_plus = omega_p_plus(p, schedule)?;
    let base = schedule.base();
    let reach = schedule.last();
    let rf = defect_exponent(p, q)?;
    let d = rf.d.restrict(|i| reach.contains(i));
    let e = reach.restrict(|i| q.get(i) > kappa);
    let e_measures = schedule.partial_measures(&e)?;
    let ln_lambda = lambda.ln();

    let mut log_omega = vec![0.0; base.grid().len()];
    // Sup-norms over an empty D are 0; otherwise they are at least 1.
    let empty_sup = if d.is_empty() { f64::NEG_INFINITY } else { 0.0 };
    let (mut log_sup_p, mut log_sup_q) = (empty_sup, empty_sup);
    for i in d.cells() {
        if e.contains(i) {
            continue;
        }
        let (pi, qi) = (p.get(i), q.get(i));
        let l = -rf.r.get(i) / pi * ln_lambda;
        log_omega[i] = l;
        log_sup_p = log_sup_p.max(-l * (p_plus - pi).abs());
        log_sup_q = log_sup_q.max(-l * (qi - p_plus).abs());
    }
    let omega = GridFunction::from_fn(base, |i, _| if d.contains(i) { log_omega[i].exp() } else { 0.0 })?;
    let modular = schedule.partial_integrals(&d, |i| {
        if e.contains(i) {
            1.0
        } else {
            (-rf.r.get(i) * ln_lambda).exp()
        }
    })?;
    Ok(OmegaCertificate {
        lambda,
        kappa,
        p_plus,
        admissible: stabilizes(&e_measures),
        e_measures,
        log_sup_p,
        log_sup_q,
        modular,
        radii: schedule.radii().to_vec(),
        omega,
        log_omega,
        d,
        e,
    })
}
