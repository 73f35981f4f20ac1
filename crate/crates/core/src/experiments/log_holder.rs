//! Sampled log-Hölder constants of an exponent:
//!
//! ```text
//! C₀ = max_{|x−y|<1/2} |p(x) − p(y)| · (−log|x − y|)
//! C_∞ = max_x |p(x) − p_∞| · log(e + |x|)
//! ```
//!
//! Both are maxima over cell centers, hence lower bounds of the true
//! constants.

use serde::Serialize;

use super::ExperimentError;
use crate::expr::Expr;
use crate::grid::{ExponentField, GridDomain};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHolderDiagnostic {
    pub h: f64,
    pub c0: f64,
    pub c_inf: f64,
    /// Exponent at the cell farthest from the origin.
    pub p_inf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_pair: Option<[Vec<f64>; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
}

pub fn log_holder_diagnostic(p: &ExponentField, dom: &GridDomain) -> LogHolderDiagnostic {
    let grid = dom.grid();
    let dim = grid.dim();
    let h = grid.h();
    let point = |i: usize| grid.center(i)[..dim].to_vec();

    let far = dom
        .cells()
        .fold(None, |acc: Option<(usize, f64)>, i| {
            let r = grid.center_norm(i);
            match acc {
                Some((_, best)) if best >= r => acc,
                _ => Some((i, r)),
            }
        })
        .map(|(i, _)| i);
    let p_inf = far.map_or(f64::NAN, |i| p.get(i));

    // Cell offsets closer than 1/2, one of each ± pair.
    let reach = (0.5 / h).ceil() as i64;
    let mut offsets = Vec::new();
    let dy_range = if dim == 1 { 0..=0 } else { 0..=reach };
    for dy in dy_range {
        for dx in -reach..=reach {
            if dy == 0 && dx <= 0 {
                continue;
            }
            let d = h * ((dx * dx + dy * dy) as f64).sqrt();
            if d < 0.5 {
                offsets.push((dx, dy, -d.ln()));
            }
        }
    }

    let counts = grid.counts();
    let (nx, ny) = (counts[0] as i64, if dim == 1 { 1 } else { counts[1] as i64 });
    let (mut c0, mut pair) = (0.0f64, None);
    let (mut c_inf, mut worst_point) = (0.0f64, None);
    for i in dom.cells() {
        let (ix, iy) = grid.coords(i);
        let pi = p.get(i);
        let t = (pi - p_inf).abs() * (std::f64::consts::E + grid.center_norm(i)).ln();
        if t > c_inf {
            c_inf = t;
            worst_point = Some(point(i));
        }
        for &(dx, dy, weight) in &offsets {
            let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
            if !(0..nx).contains(&jx) || !(0..ny).contains(&jy) {
                continue;
            }
            let j = grid.index(jx as usize, jy as usize);
            if !dom.contains(j) {
                continue;
            }
            let t = (pi - p.get(j)).abs() * weight;
            if t > c0 {
                c0 = t;
                pair = Some([point(i), point(j)]);
            }
        }
    }
    LogHolderDiagnostic {
        h,
        c0,
        c_inf,
        p_inf,
        worst_pair: pair,
        worst_point,
    }
}

/// The diagnostic of `expr` on the box `[lo, hi]` at each step size.
pub fn log_holder_refinement(
    expr: &Expr,
    lo: &[f64],
    hi: &[f64],
    steps: &[f64],
) -> Result<Vec<LogHolderDiagnostic>, ExperimentError> {
    steps
        .iter()
        .map(|&h| {
            let dom = GridDomain::from_bounds(lo, hi, h)?;
            let p = ExponentField::sample(expr, &dom)?;
            Ok(log_holder_diagnostic(&p, &dom))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn constants_vanish_for_constant_exponent() {
        let dom = GridDomain::square_box([-1.0, -1.0], [1.0, 1.0], 0.1).unwrap();
        let p = ExponentField::constant(&dom, 3.0).unwrap();
        let d = log_holder_diagnostic(&p, &dom);
        assert_eq!((d.c0, d.c_inf, d.p_inf), (0.0, 0.0, 3.0));
        assert!(d.worst_pair.is_none());
    }

    #[test]
    fn jump_blows_up_under_refinement() {
        let e = parse("2 + chi(0, 2)").unwrap();
        let seq = log_holder_refinement(&e, &[-1.0], &[1.0], &[0.1, 0.01, 0.001]).unwrap();
        for w in seq.windows(2) {
            assert!(w[1].c0 > w[0].c0 + 2.0);
        }
        // The worst pair straddles the jump at distance h.
        let last = &seq[2];
        assert!((last.c0 + (0.001f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn smooth_exponent_is_stable() {
        let e = parse("2 - (1 + x^2)^-1").unwrap();
        let seq = log_holder_refinement(&e, &[-10.0], &[10.0], &[0.05, 0.025]).unwrap();
        let (a, b) = (&seq[0], &seq[1]);
        assert!((a.c0 - b.c0).abs() <= 0.05 * a.c0.max(b.c0));
        assert!((a.c_inf - b.c_inf).abs() <= 0.05 * a.c_inf.max(b.c_inf));
        assert!(a.c0 < 1.0 && a.c_inf < 2.0);
    }
}
