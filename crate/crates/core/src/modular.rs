//! Modular `ρ_p(f) = ∫ |f|^{p(x)} dx` and the Luxemburg norm
//! `‖f‖_p = inf{λ > 0 : ρ_p(f/λ) ≤ 1}`.

use serde::Serialize;
use thiserror::Error;

use crate::exact::ExactSum;
use crate::grid::{ExponentField, GridDomain, GridError, GridFunction, Schedule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModularError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("relative tolerance must lie in (0, 1e-2], got {0}")]
    BadTolerance(f64),
    #[error("Luxemburg bisection did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("could not bracket the Luxemburg norm (modular stuck at {0})")]
    NoBracket(f64),
}

pub const DEFAULT_RTOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 200;
const MAX_BRACKET_STEPS: usize = 4200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModularValue {
    /// `+∞` when `overflow` is set.
    pub value: f64,
    pub overflow: bool,
    /// Measure of the integration region.
    pub measure: f64,
    pub h: f64,
}

/// `|v|^p`, going through logarithms when the direct power would overflow.
/// Returns `None` when the result is not representable.
pub fn power_term(v: f64, p: f64) -> Option<f64> {
    let a = v.abs();
    if a == 0.0 {
        return Some(0.0);
    }
    let log = p * a.ln();
    if a > 1e100 || log > 700.0 {
        let t = log.exp();
        return t.is_finite().then_some(t);
    }
    Some(a.powf(p))
}

fn check_inputs(f: &GridFunction, p: &ExponentField, dom: &GridDomain) -> Result<(), GridError> {
    if !f.domain().same_grid(dom) {
        return Err(GridError::MismatchedGrid);
    }
    p.check_region(dom)
}

/// `ρ_{p(·),dom}(f) = h^dim · Σ_{i ∈ dom} |f_i|^{p_i}`.
pub fn modular(f: &GridFunction, p: &ExponentField, dom: &GridDomain) -> Result<ModularValue, ModularError> {
    check_inputs(f, p, dom)?;
    Ok(modular_scaled(f, p, dom, 1.0))
}

/// `ρ(f / λ)` without re-validating the inputs.
fn modular_scaled(f: &GridFunction, p: &ExponentField, dom: &GridDomain, lambda: f64) -> ModularValue {
    let mut acc = ExactSum::new();
    let mut overflow = false;
    for i in dom.cells() {
        match power_term(f.get(i) / lambda, p.get(i)) {
            Some(t) => acc.add(t),
            None => {
                overflow = true;
                break;
            }
        }
    }
    let value = if overflow {
        f64::INFINITY
    } else {
        acc.value() * dom.grid().cell_measure()
    };
    ModularValue {
        value: if value.is_finite() { value } else { f64::INFINITY },
        overflow: overflow || !value.is_finite(),
        measure: dom.measure(),
        h: dom.h(),
    }
}

/// Partial modulars over `region ∩ B(0, R_k)` for every radius of the schedule.
pub fn modular_partials(
    f: &GridFunction,
    p: &ExponentField,
    region: &GridDomain,
    schedule: &Schedule,
) -> Result<Vec<f64>, ModularError> {
    check_inputs(f, p, region)?;
    let mut overflow = false;
    let mut sums = schedule.partial_integrals(region, |i| match power_term(f.get(i), p.get(i)) {
        Some(t) => t,
        None => {
            overflow = true;
            0.0
        }
    })?;
    if overflow {
        sums.iter_mut().for_each(|s| *s = f64::INFINITY);
    }
    Ok(sums)
}

/// Bracket `[lo, hi]` with `ρ(f/lo) > 1 ≥ ρ(f/hi)` and `(hi - lo)/hi ≤ rtol`.
/// Returns `None` when `f` vanishes on `dom`.
pub fn luxemburg_bracket(
    f: &GridFunction,
    p: &ExponentField,
    dom: &GridDomain,
    rtol: f64,
) -> Result<Option<(f64, f64)>, ModularError> {
    if !(rtol > 0.0 && rtol <= 1e-2) {
        return Err(ModularError::BadTolerance(rtol));
    }
    check_inputs(f, p, dom)?;
    let max_abs = dom.cells().fold(0.0f64, |m, i| m.max(f.get(i).abs()));
    if max_abs == 0.0 {
        return Ok(None);
    }
    let (p_lo, _) = p.range_over(dom).expect("non-zero f implies a non-empty domain");
    let within = |lambda: f64| modular_scaled(f, p, dom, lambda).value <= 1.0;

    let start = max_abs * dom.measure().powf(1.0 / p_lo);
    let (mut lo, mut hi);
    if within(start) {
        hi = start;
        lo = start / 2.0;
        let mut steps = 0;
        while within(lo) {
            hi = lo;
            lo /= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo == 0.0 {
                return Err(ModularError::NoBracket(lo));
            }
        }
    } else {
        lo = start;
        hi = start * 2.0;
        let mut steps = 0;
        while !within(hi) {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(ModularError::NoBracket(hi));
            }
        }
    }
    let mut n = 0;
    while (hi - lo) / hi > rtol {
        if n == MAX_BISECTIONS {
            return Err(ModularError::NoConvergence(n));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if within(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        n += 1;
    }
    Ok(Some((lo, hi)))
}

/// Luxemburg norm to relative tolerance `rtol`, reported as the upper end
/// of the final bracket (so `ρ(f/‖f‖) ≤ 1` always holds).
pub fn luxemburg_norm(f: &GridFunction, p: &ExponentField, dom: &GridDomain, rtol: f64) -> Result<f64, ModularError> {
    Ok(luxemburg_bracket(f, p, dom, rtol)?.map_or(0.0, |(_, hi)| hi))
}

/// `(ρ(f) ≤ 1, ‖f‖ ≤ 1)`. The norm side accepts an upper bracket end up to
/// `1 + rtol`, since the bracket of a function with `ρ(f) = 1` straddles 1.
pub fn unit_ball_check(
    f: &GridFunction,
    p: &ExponentField,
    dom: &GridDomain,
    rtol: f64,
) -> Result<(bool, bool), ModularError> {
    let rho = modular(f, p, dom)?;
    let norm = luxemburg_norm(f, p, dom, rtol)?;
    Ok((rho.value <= 1.0, norm <= 1.0 + rtol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn sampled(src: &str, dom: &GridDomain) -> GridFunction {
        GridFunction::sample(&parse(src).unwrap(), dom).unwrap()
    }

    #[test]
    fn unit_function_gives_measure() {
        let dom = GridDomain::interval(0.0, 5.0, 0.25).unwrap();
        let f = GridFunction::constant(&dom, 1.0).unwrap();
        let p = ExponentField::sample(&parse("1 + x^2").unwrap(), &dom).unwrap();
        assert_eq!(modular(&f, &p, &dom).unwrap().value, 5.0);
    }

    #[test]
    fn step_blowup_modular_is_exact() {
        let dom = GridDomain::interval(0.0, 3.0, 0.01).unwrap();
        let p = ExponentField::sample(&parse("2 + chi(2, 3)").unwrap(), &dom).unwrap();
        for k in [9.0, 27.0, 81.0] {
            let f = sampled(&format!("{k}*chi(0, 1)"), &dom);
            assert_eq!(modular(&f, &p, &dom).unwrap().value, k * k);
        }
    }
    #[test]
    fn two_cell_hand_sum() {
        let dom = GridDomain::interval(0.0, 2.0, 1.0).unwrap();
        let f = GridFunction::new(&dom, vec![1.0, 2.0]).unwrap();
        let p = ExponentField::new(GridFunction::new(&dom, vec![1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(modular(&f, &p, &dom).unwrap().value, 9.0);
    }

    #[test]
    fn overflow_saturates() {
        let dom = GridDomain::interval(0.0, 2.0, 1.0).unwrap();
        let f = GridFunction::new(&dom, vec![1e200, 1.0]).unwrap();
        let p = ExponentField::constant(&dom, 2.0).unwrap();
        let m = modular(&f, &p, &dom).unwrap();
        assert!(m.overflow);
        assert_eq!(m.value, f64::INFINITY);
        let p1 = ExponentField::constant(&dom, 1.0).unwrap();
        assert!(!modular(&f, &p1, &dom).unwrap().overflow);
    }

    #[test]
    fn norm_of_scaled_indicator() {
        let dom = GridDomain::interval(0.0, 2.0, 0.1).unwrap();
        let f = sampled("2*chi(0, 1)", &dom);
        let p = ExponentField::constant(&dom, 2.0).unwrap();
        let n = luxemburg_norm(&f, &p, &dom, DEFAULT_RTOL).unwrap();
        assert!((n - 2.0).abs() <= 2.0 * DEFAULT_RTOL);
        assert!(n >= 2.0);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let dom = GridDomain::interval(0.0, 1.0, 0.1).unwrap();
        let f = GridFunction::constant(&dom, 0.0).unwrap();
        let p = ExponentField::constant(&dom, 3.0).unwrap();
        assert_eq!(luxemburg_norm(&f, &p, &dom, DEFAULT_RTOL).unwrap(), 0.0);
    }

    #[test]
    fn tolerance_is_validated() {
        let dom = GridDomain::interval(0.0, 1.0, 0.1).unwrap();
        let f = GridFunction::constant(&dom, 1.0).unwrap();
        let p = ExponentField::constant(&dom, 3.0).unwrap();
        assert!(luxemburg_norm(&f, &p, &dom, 0.0).is_err());
        assert!(luxemburg_norm(&f, &p, &dom, 0.1).is_err());
    }

    #[test]
    fn unit_ball_examples() {
        let dom = GridDomain::interval(0.0, 2.0, 0.5).unwrap();
        let p = ExponentField::constant(&dom, 2.0).unwrap();
        let boundary = sampled("chi(0, 1)", &dom);
        assert_eq!(
            unit_ball_check(&boundary, &p, &dom, DEFAULT_RTOL).unwrap(),
            (true, true)
        );
        let outside = sampled("2*chi(0, 1)", &dom);
        assert_eq!(
            unit_ball_check(&outside, &p, &dom, DEFAULT_RTOL).unwrap(),
            (false, false)
        );
    }

    #[test]
    fn partials_follow_schedule() {
        let s = Schedule::for_box(&[0.0], &[f64::INFINITY], 0.5, vec![1.0, 2.0, 4.0]).unwrap();
        let f = GridFunction::constant(s.base(), 2.0).unwrap();
        let p = ExponentField::constant(s.base(), 2.0).unwrap();
        assert_eq!(modular_partials(&f, &p, s.base(), &s).unwrap(), vec![4.0, 8.0, 16.0]);
    }
}
