//! Touching at infinity, decided through exceptional sublevel sets.
//!
//! `p` and `q` touch at infinity when every set of infinite measure `E`
//! has `p₊(E) = p₊(Ω) = q₋(Ω) = q₋(E)`. This is equivalent to
//!
//! > `s := p₊(Ω) = q₋(Ω)` and, for every `ε > 0`, both `{p ≤ s − ε}` and
//! > `{q ≥ s + ε}` have finite measure.
//!
//! (⇐) An infinite-measure `E` meets `{p > s − ε}` and `{q < s + ε}` in
//! positive measure for every `ε`, so `p₊(E) ≥ s ≥ q₋(E)`; the reverse
//! inequalities hold because `E ⊆ Ω`. (⇒) If either exceptional set had
//! infinite measure it would itself be an `E` with `p₊(E) ≤ s − ε` or
//! `q₋(E) ≥ s + ε`.
//!
//! On a schedule the limit `s` is unknown, so both truncated values
//! `p₊(Ω_m)` and `q₋(Ω_m)` are tried as candidates.

use super::report::{grows, stabilizes};
use super::{same_support, ConditionError, ConditionReport, Verdict};
use crate::grid::{ExponentField, GridDomain, Schedule};
use crate::EPS_TIE;

/// `(min, max)` of `p` over each truncation of `region` (`None` while empty).
pub(crate) fn truncated_ranges(p: &ExponentField, region: &GridDomain, schedule: &Schedule) -> Vec<Option<(f64, f64)>> {
    let mut per_bucket: Vec<Option<(f64, f64)>> = vec![None; schedule.len()];
    for i in region.cells() {
        if let Some(k) = schedule.first_truncation(i) {
            let v = p.get(i);
            per_bucket[k] = Some(match per_bucket[k] {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        }
    }
    let mut acc: Option<(f64, f64)> = None;
    per_bucket
        .into_iter()
        .map(|b| {
            acc = match (acc, b) {
                (None, b) => b,
                (a, None) => a,
                (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.max(h2))),
            };
            acc
        })
        .collect()
}

/// The two exceptional sets `{p ≤ s − ε}` and `{q ≥ s + ε}` inside `region`.
pub fn touching_sets(
    p: &ExponentField,
    q: &ExponentField,
    region: &GridDomain,
    s: f64,
    eps: f64,
) -> (GridDomain, GridDomain) {
    let low = region.restrict(|i| p.get(i) <= s - eps + EPS_TIE);
    let high = region.restrict(|i| q.get(i) >= s + eps - EPS_TIE);
    (low, high)
}

pub fn check_touching(
    p: &ExponentField,
    q: &ExponentField,
    schedule: &Schedule,
    epsilons: &[f64],
) -> Result<ConditionReport, ConditionError> {
    let m = schedule.len();
    if m < 3 {
        return Err(ConditionError::ShortSchedule(m));
    }
    same_support(p, q)?;
    let base = schedule.base();
    p.check_region(base)?;

    let p_ranges = truncated_ranges(p, base, schedule);
    let q_ranges = truncated_ranges(q, base, schedule);
    let mut rep = ConditionReport::new("touching_at_infinity", Verdict::Inconclusive);
    rep.parameters.epsilons = epsilons.to_vec();
    rep.parameters.radii = schedule.radii().to_vec();

    let (Some((_, p_plus)), Some((q_minus, _))) = (p_ranges[m - 1], q_ranges[m - 1]) else {
        return Err(ConditionError::EmptyRegion);
    };
    let mut candidates = vec![p_plus];
    if (q_minus - p_plus).abs() > EPS_TIE {
        candidates.push(q_minus);
    }
    for (c, s) in candidates.iter().enumerate() {
        rep.notes.push(format!("candidate s{c} = {s}"));
    }

    // Measures of the exceptional sets on every truncation.
    let mut series: Vec<Vec<(String, Vec<f64>)>> = Vec::new();
    for (c, &s) in candidates.iter().enumerate() {
        let mut per_candidate = Vec::new();
        for &eps in epsilons {
            let (low, high) = touching_sets(p, q, base, s, eps);
            per_candidate.push((format!("|{{p <= s{c} - {eps}}}|"), schedule.partial_measures(&low)?));
            per_candidate.push((format!("|{{q >= s{c} + {eps}}}|"), schedule.partial_measures(&high)?));
        }
        series.push(per_candidate);
    }

    let mut gaps = Vec::with_capacity(m);
    for k in 0..m {
        let r = Some(schedule.radii()[k]);
        if let (Some((_, pp)), Some((qm, _))) = (p_ranges[k], q_ranges[k]) {
            rep.push(r, "p_plus", pp);
            rep.push(r, "q_minus", qm);
            rep.push(r, "gap", qm - pp);
            gaps.push(qm - pp);
        }
        for per_candidate in &series {
            for (name, values) in per_candidate {
                rep.push(r, name.as_str(), values[k]);
            }
        }
    }

    if let Some(g) = gaps.iter().find(|&&g| g < -EPS_TIE) {
        rep.verdict = Verdict::Fails;
        rep.notes.push(format!(
            "p_plus exceeds q_minus by {} on a truncation, so p_plus(Omega) > q_minus(Omega)",
            -g
        ));
        return Ok(rep);
    }
    let last_gap = *gaps.last().expect("final truncation is non-empty");
    if gaps.len() >= 3 && stabilizes(&gaps) && last_gap > super::DELTA_GROW {
        rep.verdict = Verdict::Fails;
        rep.notes
            .push(format!("gap q_minus - p_plus stabilizes at {last_gap} > 0"));
        return Ok(rep);
    }

    let mut any_stable = false;
    let mut all_growing = true;
    for (c, per_candidate) in series.iter().enumerate() {
        let stable = per_candidate.iter().all(|(_, v)| stabilizes(v));
        let growing = per_candidate.iter().any(|(_, v)| grows(v));
        if stable {
            rep.notes.push(format!("all exceptional sets for s{c} stabilize"));
        }
        if growing {
            rep.notes
                .push(format!("an exceptional set for s{c} grows without bound"));
        }
        any_stable |= stable;
        all_growing &= growing;
    }
    rep.verdict = if any_stable {
        Verdict::Holds
    } else if all_growing {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    rep.notes
        .push("finiteness of the exceptional sets is judged by stabilization on the schedule".into());
    Ok(rep)
}
