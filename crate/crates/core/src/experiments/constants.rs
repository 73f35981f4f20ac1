//! Empirical constants for the modular inequality.
//!
//! The operator constant `Ĉ` is the largest ratio `ρ_{p₊}(Tf)/ρ_{p₊}(f)`
//! over a calibration family, and `c = 2Ĉ` stands in for the unknown norm
//! of `T` on `L^{p₊}`.
//!
//! Bounded Ω, with `I(E) = ∫_E (Tf)^p` and `F(E) = ∫_E |f|^{p₊}`: on
//! `{Tf ≤ 1}` the integrand is at most 1, on `{Tf > 1}` it is at most
//! `(Tf)^{p₊}`, and on `{|f| > 1}` we have `|f|^{p₊} ≤ |f|^q`. Hence
//!
//! ```text
//! c₁ = c,      c₂ = (c + 1)|Ω|.
//! ```
//!
//! Unbounded Ω, with a weight ω from the conditions module, `D = {p < q}`,
//! `S_p = ‖ω^{−|p₊−p|}‖_∞` and `S_q = ‖ω^{−|q−p₊|}‖_∞`:
//!
//! ```text
//! c₁ = c(1 + S_p)(1 + S_q),      c₂ = c(1 + S_p)ρ_{p,D}(ω) + ρ_{p,D}(ω).
//! ```
//!
//! Both are then checked on a holdout family.

use serde::Serialize;

use super::family::StepFamily;
use super::ExperimentError;
use crate::conditions::{
    check_embedding, check_finite_measure, check_touching, construct_omega, ess_range, Verdict, KAPPA_OFFSETS,
};
use crate::exact::ExactSum;
use crate::grid::{ExponentField, GridDomain, GridFunction, Schedule};
use crate::maximal::Operator;
use crate::modular::{modular, power_term};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsOptions {
    pub seed: u64,
    pub calibration: usize,
    pub holdout: usize,
    pub safety: f64,
    /// λ for the weight on unbounded domains.
    pub lambda: f64,
    pub divisions: Option<usize>,
}

impl Default for ConstantsOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            calibration: 100,
            holdout: 50,
            safety: 2.0,
            lambda: 2.0,
            divisions: None,
        }
    }
}

impl ConstantsOptions {
    fn family(&self, count: usize, stream: u64) -> StepFamily {
        let mut fam = StepFamily::new(self.seed, count).stream(stream);
        fam.divisions = self.divisions;
        fam
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Bounded,
    Unbounded,
}

/// `total = inside + outside` for one integrand, with the split summed
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Split {
    pub total: f64,
    pub inside: f64,
    pub outside: f64,
    /// The exact accumulators satisfy `inside + outside = total`.
    pub exact: bool,
}

fn split(region: &GridDomain, inside: impl Fn(usize) -> bool, term: impl Fn(usize) -> f64) -> Split {
    let (mut all, mut a, mut b) = (ExactSum::new(), ExactSum::new(), ExactSum::new());
    for i in region.cells() {
        let t = term(i);
        all.add(t);
        if inside(i) {
            a.add(t);
        } else {
            b.add(t);
        }
    }
    let mut sum = a.clone();
    sum.add_sum(&b);
    let cell = region.grid().cell_measure();
    Split {
        total: all.value() * cell,
        inside: a.value() * cell,
        outside: b.value() * cell,
        exact: sum == all,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberCheck {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `I` split along `D₁(Tf) = {Tf > 1}` (bounded) or `D` (unbounded).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_split: Option<Split>,
    /// `F` split along `D₁(f) = {|f| > 1}` (bounded) or `D` (unbounded).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_split: Option<Split>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub operator: String,
    pub regime: Regime,
    pub p_plus: f64,
    /// Empirical `max ρ_{p₊}(Tf)/ρ_{p₊}(f)` (or `C*` for the log check).
    pub c_hat: f64,
    pub safety: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_modular: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_integral: Option<f64>,
    /// `max |ρ₂(Tf) − ρ₂(f)| / ρ₂(f)` over the holdout family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plancherel_max_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_holder: Option<super::LogHolderDiagnostic>,
    pub calibration_size: usize,
    pub members: Vec<MemberCheck>,
    pub violations: usize,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.violations == 0
    }

    /// Every decomposition identity held exactly.
    pub fn decompositions_exact(&self) -> bool {
        self.members
            .iter()
            .flat_map(|m| [m.i_split, m.f_split])
            .flatten()
            .all(|s| s.exact)
    }

    /// Errors when a holdout member violated the inequality.
    pub fn ensure_validated(&self) -> Result<(), ExperimentError> {
        if self.violations > 0 {
            return Err(ExperimentError::HoldoutViolation {
                violations: self.violations,
                total: self.members.len(),
            });
        }
        Ok(())
    }
}

/// `max ρ_{p₊}(Tf)/ρ_{p₊}(f)` over `family`.
fn operator_constant(
    op: &dyn Operator,
    family: &[GridFunction],
    p_plus: f64,
    region: &GridDomain,
) -> Result<f64, ExperimentError> {
    let pc = ExponentField::constant(family[0].domain(), p_plus)?;
    let mut best = 0.0f64;
    for f in family {
        let rf = modular(f, &pc, region)?.value;
        if rf == 0.0 {
            continue;
        }
        let tf = op.apply(f)?;
        best = best.max(modular(&tf, &pc, region)?.value / rf);
    }
    Ok(best)
}

fn refuse(condition: &str, verdict: Verdict) -> ExperimentError {
    ExperimentError::Refused(format!(
        "{condition} is {verdict}; constants exist only when the conditions hold (run `falsify` for a counterexample)"
    ))
}

/// Bounded Ω: needs `p₊(Ω) ≤ q₋(Ω)`.
pub fn estimate_constants(
    p: &ExponentField,
    q: &ExponentField,
    dom: &GridDomain,
    op: &dyn Operator,
    opts: &ConstantsOptions,
) -> Result<InequalityReport, ExperimentError> {
    let gate = check_finite_measure(p, q, dom)?;
    if gate.verdict != Verdict::Holds {
        return Err(refuse("finite_measure", gate.verdict));
    }
    let (_, p_plus) = ess_range(p, dom)?;
    let calibration = opts.family(opts.calibration, 0).generate(dom)?;
    let holdout = opts.family(opts.holdout, 1).generate(dom)?;
    let c_hat = operator_constant(op, &calibration, p_plus, dom)?;
    let c = opts.safety * c_hat;
    let measure = dom.measure();
    let (c1, c2) = (c, (c + 1.0) * measure);

    let mut members = Vec::with_capacity(holdout.len());
    for (index, f) in holdout.iter().enumerate() {
        let tf = op.apply(f)?;
        let lhs = modular(&tf, p, dom)?.value;
        let rhs = c1 * modular(f, q, dom)?.value + c2;
        let i_split = split(
            dom,
            |i| tf.get(i) > 1.0,
            |i| power_term(tf.get(i), p.get(i)).unwrap_or(f64::INFINITY),
        );
        let f_split = split(
            dom,
            |i| f.get(i).abs() > 1.0,
            |i| power_term(f.get(i), p_plus).unwrap_or(f64::INFINITY),
        );
        members.push(MemberCheck {
            index,
            lhs,
            rhs,
            pass: lhs <= rhs,
            i_split: Some(i_split),
            f_split: Some(f_split),
        });
    }
    Ok(finish(
        InequalityReport {
            operator: op.name().into(),
            regime: Regime::Bounded,
            p_plus,
            c_hat,
            safety: opts.safety,
            c1,
            c2,
            measure: Some(measure),
            omega_modular: None,
            sup_p: None,
            sup_q: None,
            tail_integral: None,
            plancherel_max_rel_error: None,
            log_holder: None,
            calibration_size: calibration.len(),
            members,
            violations: 0,
            notes: Vec::new(),
        },
        opts,
    ))
}

fn finish(mut rep: InequalityReport, opts: &ConstantsOptions) -> InequalityReport {
    rep.violations = rep.members.iter().filter(|m| !m.pass).count();
    if rep.violations > 0 {
        rep.notes.push(format!(
            "{} of {} holdout functions violate the inequality: the calibration family ({} functions) underestimates the operator constant; enlarge it",
            rep.violations,
            rep.members.len(),
            opts.calibration
        ));
    }
    rep
}

/// Unbounded Ω on a truncation schedule: needs touching at infinity and a
/// convergent defect integral, and builds the weight ω.
pub fn estimate_constants_unbounded(
    p: &ExponentField,
    q: &ExponentField,
    schedule: &Schedule,
    op: &dyn Operator,
    opts: &ConstantsOptions,
    epsilons: &[f64],
) -> Result<InequalityReport, ExperimentError> {
    let touching = check_touching(p, q, schedule, epsilons)?;
    if touching.verdict != Verdict::Holds {
        return Err(refuse("touching_at_infinity", touching.verdict));
    }
    let embedding = check_embedding(p, q, schedule)?;
    if embedding.verdict != Verdict::Holds {
        return Err(refuse("embedding", embedding.verdict));
    }
    let cert = construct_omega(p, q, opts.lambda, schedule, &KAPPA_OFFSETS)?;
    let reach = schedule.last();
    let (_, p_plus) = ess_range(p, &reach)?;
    let calibration = opts.family(opts.calibration, 0).generate(&reach)?;
    let holdout = opts.family(opts.holdout, 1).generate(&reach)?;
    let c_hat = operator_constant(op, &calibration, p_plus, &reach)?;
    let c = opts.safety * c_hat;
    let (sp, sq) = (cert.sup_p(), cert.sup_q());
    let rho_omega = *cert.modular.last().expect("non-empty schedule");
    let c1 = c * (1.0 + sp) * (1.0 + sq);
    let c2 = c * (1.0 + sp) * rho_omega + rho_omega;

    let mut members = Vec::with_capacity(holdout.len());
    for (index, f) in holdout.iter().enumerate() {
        let tf = op.apply(f)?;
        let lhs = modular(&tf, p, &reach)?.value;
        let rhs = c1 * modular(f, q, &reach)?.value + c2;
        let in_d = |i| cert.d.contains(i);
        let i_split = split(&reach, in_d, |i| {
            power_term(tf.get(i), p.get(i)).unwrap_or(f64::INFINITY)
        });
        let f_split = split(&reach, in_d, |i| power_term(f.get(i), p_plus).unwrap_or(f64::INFINITY));
        members.push(MemberCheck {
            index,
            lhs,
            rhs,
            pass: lhs <= rhs,
            i_split: Some(i_split),
            f_split: Some(f_split),
        });
    }
    let mut rep = InequalityReport {
        operator: op.name().into(),
        regime: Regime::Unbounded,
        p_plus,
        c_hat,
        safety: opts.safety,
        c1,
        c2,
        measure: None,
        omega_modular: Some(rho_omega),
        sup_p: Some(sp),
        sup_q: Some(sq),
        tail_integral: None,
        plancherel_max_rel_error: None,
        log_holder: None,
        calibration_size: calibration.len(),
        members,
        violations: 0,
        notes: vec![format!("kappa = {}, lambda = {}", cert.kappa, cert.lambda)],
    };
    if !cert.modular_stabilizes(1e-6) {
        rep.notes.push("partial modulars of omega have not stabilized".into());
    }
    Ok(finish(rep, opts))
}
