//! Counterexample search for the modular inequality.
//!
//! If some cube `Q` has `p₊(Q) > q₋(Q)`, pick `q₋(Q) < α < β < p₊(Q)`,
//! `E_α = {q ≤ α} ∩ Q` and `E_β = {p ≥ β} ∩ Q`. For `f = λχ_{E_α}` and
//! `λ > |Q|/|E_α|`,
//!
//! ```text
//! ρ_p(Mf) ≥ |E_β| (λ|E_α|/|Q|)^β,      c₁ρ_q(f) + c₂ ≤ c₁|E_α|λ^α + c₂,
//! ```
//!
//! so the ratio grows like `λ^{β−α}`. On sets of infinite measure where
//! `p` and `q` do not touch, [`falsify_tail`] spreads a fixed `q`-modular
//! over ever larger pieces of `{q > p₊}` instead.

use serde::Serialize;

use super::ExperimentError;
use crate::conditions::{ess_range, grows};
use crate::grid::{ExponentField, GridDomain, GridFunction, Schedule};
use crate::maximal::maximal_fast;
use crate::modular::modular;
use crate::EPS_TIE;

/// Relative slack when re-verifying the two displays.
const VERIFY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalsifyOptions {
    /// Largest exponent `j` in `λ = 2^j`.
    pub budget: u32,
    /// Stop once `LHS > threshold · RHS`.
    pub threshold: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for FalsifyOptions {
    fn default() -> Self {
        Self {
            budget: 20,
            threshold: 1e3,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// Grid-aligned cube: `len` cells per side starting at cell `start` (`[x, y]`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cube {
    pub start: [i64; 2],
    pub len: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub measure: f64,
    pub p_plus: f64,
    pub q_minus: f64,
}

impl Cube {
    fn contains(&self, grid: &crate::grid::Grid, idx: usize) -> bool {
        let (ix, iy) = grid.coords(idx);
        let k = self.len as i64;
        let inside = |i: usize, s: i64| (s..s + k).contains(&(i as i64));
        inside(ix, self.start[0]) && (grid.dim() == 1 || inside(iy, self.start[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub cube: Cube,
    pub alpha: f64,
    pub beta: f64,
    pub e_alpha_measure: f64,
    pub e_beta_measure: f64,
    /// Cells of `E_α` and `E_β` (grid indices).
    pub e_alpha: Vec<usize>,
    pub e_beta: Vec<usize>,
    pub c1: f64,
    pub c2: f64,
    pub threshold: f64,
    /// `|Q| / |E_α|`; both displays apply beyond it.
    pub lambda_star: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    /// The ratio increases strictly at every step beyond `lambda_star`.
    pub monotone_after_threshold: bool,
    #[serde(skip)]
    pub(crate) grid: Option<crate::grid::Grid>,
}

impl Witness {
    pub fn final_ratio(&self) -> f64 {
        self.trajectory.last().map_or(0.0, |t| t.ratio)
    }

    /// Re-checks the witness from its own fields: the ordering of the
    /// thresholds, that both sets lie in the cube, and both displays at
    /// every `λ > |Q|/|E_α|`.
    pub fn verify(&self) -> Result<(), String> {
        let q = &self.cube;
        if !(q.q_minus < self.alpha && self.alpha < self.beta && self.beta < q.p_plus) {
            return Err(format!(
                "thresholds out of order: {} < {} < {} < {}",
                q.q_minus, self.alpha, self.beta, q.p_plus
            ));
        }
        if self.e_alpha_measure <= 0.0 || self.e_beta_measure <= 0.0 {
            return Err("empty E_alpha or E_beta".into());
        }
        if let Some(grid) = &self.grid {
            let cell = grid.cell_measure();
            for (name, set, m) in [
                ("E_alpha", &self.e_alpha, self.e_alpha_measure),
                ("E_beta", &self.e_beta, self.e_beta_measure),
            ] {
                if set.iter().any(|&i| !q.contains(grid, i)) {
                    return Err(format!("{name} leaves the cube"));
                }
                if (set.len() as f64 * cell - m).abs() > VERIFY_SLACK * m {
                    return Err(format!("{name} measure does not match its cells"));
                }
            }
        }
        let star = q.measure / self.e_alpha_measure;
        for t in self.trajectory.iter().filter(|t| t.lambda > star) {
            let lower = self.e_beta_measure * (t.lambda * self.e_alpha_measure / q.measure).powf(self.beta);
            if t.lhs < lower * (1.0 - VERIFY_SLACK) {
                return Err(format!("lambda = {}: LHS {} below {}", t.lambda, t.lhs, lower));
            }
            let upper = self.c1 * self.e_alpha_measure * t.lambda.powf(self.alpha) + self.c2;
            if t.rhs > upper * (1.0 + VERIFY_SLACK) {
                return Err(format!("lambda = {}: RHS {} above {}", t.lambda, t.rhs, upper));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FalsifyOutcome {
    /// The ratio crossed the threshold.
    Falsified(Witness),
    /// Every cube has `p₊(Q) ≤ q₋(Q)`.
    NoViolation,
    /// A violating cube exists but the budget ran out below the threshold.
    Exhausted(Witness),
}

impl FalsifyOutcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            FalsifyOutcome::Falsified(w) | FalsifyOutcome::Exhausted(w) => Some(w),
            FalsifyOutcome::NoViolation => None,
        }
    }

    /// 1 falsified, 0 no violation, 2 exhausted.
    pub fn exit_code(&self) -> i32 {
        match self {
            FalsifyOutcome::Falsified(_) => 1,
            FalsifyOutcome::NoViolation => 0,
            FalsifyOutcome::Exhausted(_) => 2,
        }
    }
}

/// Calls `visit(start, cells, pmax, qmin)` for every cube of side `k` cells that
/// meets the domain. 1D cubes stay inside the grid; 2D squares may hang off
/// it, matching the windows of the maximal operator.
fn for_each_cube(
    p: &ExponentField,
    q: &ExponentField,
    dom: &GridDomain,
    k: usize,
    mut visit: impl FnMut([i64; 2], usize, f64, f64),
) {
    let grid = dom.grid();
    let counts = grid.counts();
    let nx = counts[0];
    let masked = |i: usize| dom.contains(i);
    if grid.dim() == 1 {
        for sx in 0..=nx.saturating_sub(k) {
            let (mut pmax, mut qmin, mut cells) = (f64::NEG_INFINITY, f64::INFINITY, 0);
            for i in (sx..sx + k).filter(|&i| masked(i)) {
                pmax = pmax.max(p.get(i));
                qmin = qmin.min(q.get(i));
                cells += 1;
            }
            if cells > 0 {
                visit([sx as i64, 0], cells, pmax, qmin);
            }
        }
        return;
    }
    let ny = counts[1];
    let side = nx.max(ny) as i64;
    let (ki, nxi, nyi) = (k as i64, nx as i64, ny as i64);
    let xs: Vec<i64> = (1 - side..nxi).filter(|&s| s + ki > 0).collect();
    // Row extrema of every x-window of length k.
    let mut row_p = vec![f64::NEG_INFINITY; ny * xs.len()];
    let mut row_q = vec![f64::INFINITY; ny * xs.len()];
    let mut row_n = vec![0usize; ny * xs.len()];
    for y in 0..ny {
        for (j, &sx) in xs.iter().enumerate() {
            for x in sx.max(0)..(sx + ki).min(nxi) {
                let i = grid.index(x as usize, y);
                if masked(i) {
                    let r = y * xs.len() + j;
                    row_p[r] = row_p[r].max(p.get(i));
                    row_q[r] = row_q[r].min(q.get(i));
                    row_n[r] += 1;
                }
            }
        }
    }
    for sy in (1 - side..nyi).filter(|&s| s + ki > 0) {
        for (j, &sx) in xs.iter().enumerate() {
            let (mut pmax, mut qmin, mut cells) = (f64::NEG_INFINITY, f64::INFINITY, 0);
            for y in sy.max(0)..(sy + ki).min(nyi) {
                let r = y as usize * xs.len() + j;
                pmax = pmax.max(row_p[r]);
                qmin = qmin.min(row_q[r]);
                cells += row_n[r];
            }
            if cells > 0 {
                visit([sx, sy], cells, pmax, qmin);
            }
        }
    }
}

fn max_side(dom: &GridDomain) -> usize {
    let c = dom.grid().counts();
    if dom.dim() == 1 {
        c[0]
    } else {
        c[0].max(c[1])
    }
}

fn make_cube(dom: &GridDomain, start: [i64; 2], len: usize, p_plus: f64, q_minus: f64) -> Cube {
    let grid = dom.grid();
    let h = grid.h();
    let dim = grid.dim();
    let lo: Vec<f64> = (0..dim).map(|a| grid.origin()[a] + start[a] as f64 * h).collect();
    let hi = lo.iter().map(|l| l + len as f64 * h).collect();
    Cube {
        start,
        len,
        lo,
        hi,
        measure: (len as f64 * h).powi(dim as i32),
        p_plus,
        q_minus,
    }
}

/// Largest cube with `p₊(Q) > q₋(Q)`; among equal sizes the one covering
/// the most domain cells, then the smallest start `(y, x)`.
pub fn find_violating_cube(p: &ExponentField, q: &ExponentField, dom: &GridDomain) -> Option<Cube> {
    // A cube covering the whole domain violates whenever any cube does.
    let (_, p_plus) = p.range_over(dom)?;
    let (q_minus, _) = q.range_over(dom)?;
    if p_plus <= q_minus + EPS_TIE {
        return None;
    }
    for k in (1..=max_side(dom)).rev() {
        let mut best: Option<(usize, Cube)> = None;
        for_each_cube(p, q, dom, k, |start, cells, pmax, qmin| {
            if pmax <= qmin + EPS_TIE {
                return;
            }
            let better = match &best {
                None => true,
                Some((n, b)) => cells > *n || (cells == *n && (start[1], start[0]) < (b.start[1], b.start[0])),
            };
            if better {
                best = Some((cells, make_cube(dom, start, k, pmax, qmin)));
            }
        });
        if let Some((_, cube)) = best {
            return Some(cube);
        }
    }
    None
}

/// Exhaustive check over every cube, without the whole-domain shortcut.
pub fn any_cube_violates(p: &ExponentField, q: &ExponentField, dom: &GridDomain) -> bool {
    let mut found = false;
    for k in 1..=max_side(dom) {
        for_each_cube(p, q, dom, k, |_, _, pmax, qmin| found |= pmax > qmin + EPS_TIE);
    }
    found
}

pub fn falsify(
    p: &ExponentField,
    q: &ExponentField,
    dom: &GridDomain,
    opts: &FalsifyOptions,
) -> Result<FalsifyOutcome, ExperimentError> {
    if p.domain() != q.domain() {
        return Err(crate::conditions::ConditionError::MismatchedExponents.into());
    }
    p.check_region(dom)?;
    if dom.is_empty() {
        return Err(crate::conditions::ConditionError::EmptyRegion.into());
    }
    let Some(cube) = find_violating_cube(p, q, dom) else {
        return Ok(FalsifyOutcome::NoViolation);
    };
    let grid = dom.grid().clone();
    let alpha = cube.q_minus + (cube.p_plus - cube.q_minus) / 3.0;
    let beta = cube.q_minus + 2.0 * (cube.p_plus - cube.q_minus) / 3.0;
    let in_cube: Vec<usize> = dom.cells().filter(|&i| cube.contains(&grid, i)).collect();
    let e_alpha: Vec<usize> = in_cube.iter().copied().filter(|&i| q.get(i) <= alpha).collect();
    let e_beta: Vec<usize> = in_cube.iter().copied().filter(|&i| p.get(i) >= beta).collect();
    let cell = grid.cell_measure();
    let (e_alpha_measure, e_beta_measure) = (e_alpha.len() as f64 * cell, e_beta.len() as f64 * cell);

    let chi = GridFunction::from_fn(dom, |i, _| if e_alpha.binary_search(&i).is_ok() { 1.0 } else { 0.0 })?;
    // Powers of two scale the averages exactly, so M(λχ) = λ·Mχ.
    let m_chi = maximal_fast(&chi).mf;
    let mut trajectory = Vec::new();
    let mut crossed = false;
    for j in 1..=opts.budget {
        let lambda = 2f64.powi(j as i32);
        let lhs = modular(&m_chi.scale(lambda)?, p, dom)?.value;
        let rhs = opts.c1 * modular(&chi.scale(lambda)?, q, dom)?.value + opts.c2;
        let ratio = lhs / rhs;
        trajectory.push(TrajectoryPoint {
            lambda,
            lhs,
            rhs,
            ratio,
        });
        if ratio > opts.threshold {
            crossed = true;
            break;
        }
    }
    let lambda_star = cube.measure / e_alpha_measure;
    let beyond: Vec<f64> = trajectory
        .iter()
        .filter(|t| t.lambda > lambda_star)
        .map(|t| t.ratio)
        .collect();
    let witness = Witness {
        cube,
        alpha,
        beta,
        e_alpha_measure,
        e_beta_measure,
        e_alpha,
        e_beta,
        c1: opts.c1,
        c2: opts.c2,
        threshold: opts.threshold,
        lambda_star,
        monotone_after_threshold: beyond.windows(2).all(|w| w[1] > w[0]),
        trajectory,
        grid: Some(grid),
    };
    Ok(if crossed {
        FalsifyOutcome::Falsified(witness)
    } else {
        FalsifyOutcome::Exhausted(witness)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub radius: f64,
    pub e_measure: f64,
    pub height: f64,
    /// `ρ_p(f_k) ≤ ρ_p(Mf_k)`.
    pub lhs_lower: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailWitness {
    /// Level `s = p₊(Ω_m)`; the set used is `E = {q > s}`.
    pub level: f64,
    pub q_minus_e: f64,
    pub p_plus_e: f64,
    pub c1: f64,
    pub c2: f64,
    pub points: Vec<TailPoint>,
    /// The lower bounds for the left-hand side grow on the schedule while
    /// the right-hand side stays bounded.
    pub falsified: bool,
}

/// `f_k = |E_k|^{−1/q₋(E)} χ_{E_k}` with `E_k = {q > p₊} ∩ B(0, R_k)` keeps
/// `ρ_q(f_k) ≤ 1` once `|E_k| ≥ 1`, while `ρ_p(f_k) ≥ |E_k|^{1 − p₊(E)/q₋(E)}`.
/// Returns `None` when `{q > p₊}` is empty.
pub fn falsify_tail(
    p: &ExponentField,
    q: &ExponentField,
    schedule: &Schedule,
    opts: &FalsifyOptions,
) -> Result<Option<TailWitness>, ExperimentError> {
    let reach = schedule.last();
    let (_, level) = ess_range(p, &reach)?;
    let e = reach.restrict(|i| q.get(i) > level + EPS_TIE);
    let Some((q_minus_e, _)) = q.range_over(&e) else {
        return Ok(None);
    };
    let (_, p_plus_e) = p.range_over(&e).expect("E is not empty");
    let mut points = Vec::with_capacity(schedule.len());
    for k in 0..schedule.len() {
        let ek = e.restrict(|i| schedule.first_truncation(i).is_some_and(|f| f <= k));
        let m = ek.measure();
        if m == 0.0 {
            continue;
        }
        let height = m.powf(-1.0 / q_minus_e);
        let f = GridFunction::from_fn(schedule.base(), |i, _| if ek.contains(i) { height } else { 0.0 })?;
        let lhs_lower = modular(&f, p, &reach)?.value;
        let rhs = opts.c1 * modular(&f, q, &reach)?.value + opts.c2;
        points.push(TailPoint {
            radius: schedule.radii()[k],
            e_measure: m,
            height,
            lhs_lower,
            rhs,
        });
    }
    let lhs: Vec<f64> = points.iter().map(|t| t.lhs_lower).collect();
    let rhs_bound = (opts.c1 + opts.c2) * (1.0 + 1e-12);
    let bounded = points.iter().filter(|t| t.e_measure >= 1.0).all(|t| t.rhs <= rhs_bound);
    let falsified = points.len() >= 3 && grows(&lhs) && bounded;
    Ok(Some(TailWitness {
        level,
        q_minus_e,
        p_plus_e,
        c1: opts.c1,
        c2: opts.c2,
        points,
        falsified,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn field(src: &str, dom: &GridDomain) -> ExponentField {
        ExponentField::sample(&parse(src).unwrap(), dom).unwrap()
    }

    #[test]
    fn example_step_exponent_is_falsified() {
        let dom = GridDomain::interval(0.0, 3.0, 0.01).unwrap();
        let p = field("2 + chi(2, 3)", &dom);
        let out = falsify(&p, &p, &dom, &FalsifyOptions::default()).unwrap();
        let FalsifyOutcome::Falsified(w) = out else {
            panic!("expected a witness, got {out:?}");
        };
        assert_eq!((w.cube.start, w.cube.len), ([0, 0], 300));
        assert_eq!((w.cube.q_minus, w.cube.p_plus), (2.0, 3.0));
        assert!((w.e_alpha_measure - 2.0).abs() < 1e-12);
        assert!((w.e_beta_measure - 1.0).abs() < 1e-12);
        assert!(w.final_ratio() > 1e3);
        assert!(w.trajectory.last().unwrap().lambda <= 2f64.powi(20));
        assert!(w.monotone_after_threshold);
        w.verify().unwrap();
    }

    #[test]
    fn constant_exponents_have_no_violation() {
        let dom = GridDomain::interval(0.0, 1.0, 0.01).unwrap();
        let p = field("2", &dom);
        let out = falsify(&p, &p, &dom, &FalsifyOptions::default()).unwrap();
        assert!(matches!(out, FalsifyOutcome::NoViolation));
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn small_budget_is_exhausted() {
        let dom = GridDomain::interval(0.0, 3.0, 0.01).unwrap();
        let p = field("2 + chi(2, 3)", &dom);
        let opts = FalsifyOptions {
            budget: 3,
            ..Default::default()
        };
        let out = falsify(&p, &p, &dom, &opts).unwrap();
        assert!(matches!(out, FalsifyOutcome::Exhausted(_)));
        assert_eq!(out.exit_code(), 2);
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let dom = GridDomain::interval(0.0, 3.0, 0.01).unwrap();
        let p = field("2 + chi(2, 3)", &dom);
        let out = falsify(&p, &p, &dom, &FalsifyOptions::default()).unwrap();
        let mut w = out.witness().unwrap().clone();
        w.trajectory.last_mut().unwrap().lhs = 1.0;
        assert!(w.verify().is_err());
        let mut w = out.witness().unwrap().clone();
        w.alpha = w.beta + 0.1;
        assert!(w.verify().is_err());
    }

    #[test]
    fn square_falsifier_on_a_strip() {
        let dom = GridDomain::square_box([0.0, 0.0], [4.0, 2.0], 0.25).unwrap();
        let p = field("2 + chi(3, 4)", &dom);
        let q = field("2", &dom);
        let out = falsify(&p, &q, &dom, &FalsifyOptions::default()).unwrap();
        let w = out.witness().unwrap();
        assert_eq!(w.cube.len, 16);
        w.verify().unwrap();
        assert!(matches!(out, FalsifyOutcome::Falsified(_)));
    }

    #[test]
    fn exhaustive_matches_global() {
        let dom = GridDomain::interval(0.0, 1.0, 0.125).unwrap();
        let p = field("2 + chi(0.5, 0.75)", &dom);
        assert!(any_cube_violates(&p, &p, &dom));
        let q = field("3", &dom);
        assert!(!any_cube_violates(&p, &q, &dom));
        assert!(find_violating_cube(&p, &q, &dom).is_none());
    }

    #[test]
    fn tail_falsifier_on_split_exponent() {
        let s = Schedule::for_box(&[0.0], &[f64::INFINITY], 0.25, Schedule::geometric_radii(4.0, 13)).unwrap();
        let p = field("2", s.base());
        let q = field("if(x > 1, 3, 2)", s.base());
        let w = falsify_tail(&p, &q, &s, &FalsifyOptions::default()).unwrap().unwrap();
        assert_eq!((w.level, w.q_minus_e), (2.0, 3.0));
        assert!(w.falsified);
        for t in &w.points {
            assert!((t.lhs_lower - t.e_measure.powf(1.0 / 3.0)).abs() < 1e-9 * t.lhs_lower);
        }
        let none = falsify_tail(&p, &p, &s, &FalsifyOptions::default()).unwrap();
        assert!(none.is_none());
    }
}
