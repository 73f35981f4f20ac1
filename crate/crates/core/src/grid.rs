//! Uniform-grid domains and the functions sampled on them.
//!
//! A [`GridDomain`] is a 1D or 2D array of square cells of side `h` plus a
//! mask saying which cells belong to Ω. Functions are sampled at cell
//! centers and every integral is a midpoint sum `h^dim · Σ value`. Cells
//! are indexed row-major with the first axis fastest: `idx = iy * nx + ix`.
//!
//! Essential infima and suprema are plain minima and maxima over masked-in
//! cells; on a grid there are no null sets to discard.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::ExactSum;
use crate::expr::{EvalError, Expr};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid parameters must be finite")]
    NonFinite,
    #[error("cell side h must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("interval [{lo}, {hi}] is empty or reversed")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("interval of length {len} holds zero cells of side {h}")]
    ZeroCells { len: f64, h: f64 },
    #[error("grid has too many cells ({0})")]
    TooLarge(usize),
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("functions and domain live on different grids")]
    MismatchedGrid,
    #[error("domain is not contained in the support of the field")]
    NotContained,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite value {value} at cell centered at {center:?}")]
    NonFiniteSample { center: Vec<f64>, value: f64 },
    #[error("exponent value {value} < 1 at cell centered at {center:?}")]
    NotAnExponent { center: Vec<f64>, value: f64 },
    #[error("evaluation failed at cell centered at {center:?}: {source}")]
    Eval { center: Vec<f64>, source: EvalError },
    #[error("truncation radii must be positive and strictly increasing")]
    BadSchedule,
    #[error("malformed domain record: {0}")]
    Record(String),
}

/// Grid geometry without a mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    origin: [f64; 2],
    h: f64,
    counts: [usize; 2],
}

const MAX_CELLS: usize = 1 << 26;

fn cells_along(lo: f64, hi: f64, h: f64) -> Result<usize, GridError> {
    if !(lo.is_finite() && hi.is_finite() && h.is_finite()) {
        return Err(GridError::NonFinite);
    }
    if h <= 0.0 {
        return Err(GridError::NonPositiveStep(h));
    }
    if lo >= hi {
        return Err(GridError::EmptyInterval { lo, hi });
    }
    let n = ((hi - lo) / h).round();
    if n < 1.0 {
        return Err(GridError::ZeroCells { len: hi - lo, h });
    }
    if n > MAX_CELLS as f64 {
        return Err(GridError::TooLarge(n as usize));
    }
    Ok(n as usize)
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    /// Total number of cells, masked or not.
    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of a single cell, `h^dim`.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.counts[0], idx / self.counts[0])
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.counts[0] + ix
    }

    /// Center of cell `idx`; the second component is 0 in 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(idx);
        let x = self.origin[0] + (ix as f64 + 0.5) * self.h;
        let y = if self.dim == 2 {
            self.origin[1] + (iy as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [x, y]
    }

    /// Euclidean norm of the center of cell `idx`.
    pub fn center_norm(&self, idx: usize) -> f64 {
        let c = self.center(idx);
        c[0].hypot(c[1])
    }
}

/// A grid plus the set of cells that make up Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    grid: Grid,
    mask: Vec<bool>,
}

impl GridDomain {
    /// 1D domain covering `[a, b]` with `round((b - a) / h)` cells, all masked in.
    pub fn interval(a: f64, b: f64, h: f64) -> Result<Self, GridError> {
        let n = cells_along(a, b, h)?;
        Ok(Self::full(Grid {
            dim: 1,
            origin: [a, 0.0],
            h,
            counts: [n, 1],
        }))
    }

    /// 2D analogue of [`GridDomain::interval`].
    pub fn square_box(lo: [f64; 2], hi: [f64; 2], h: f64) -> Result<Self, GridError> {
        let nx = cells_along(lo[0], hi[0], h)?;
        let ny = cells_along(lo[1], hi[1], h)?;
        if nx.saturating_mul(ny) > MAX_CELLS {
            return Err(GridError::TooLarge(nx.saturating_mul(ny)));
        }
        Ok(Self::full(Grid {
            dim: 2,
            origin: lo,
            h,
            counts: [nx, ny],
        }))
    }

    /// Box in 1 or 2 dimensions from per-axis bounds.
    pub fn from_bounds(lo: &[f64], hi: &[f64], h: f64) -> Result<Self, GridError> {
        match (lo, hi) {
            ([a], [b]) => Self::interval(*a, *b, h),
            ([a0, a1], [b0, b1]) => Self::square_box([*a0, *a1], [*b0, *b1], h),
            _ => Err(GridError::BadDimension(lo.len().max(hi.len()))),
        }
    }

    fn full(grid: Grid) -> Self {
        let mask = vec![true; grid.len()];
        Self { grid, mask }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        self.grid.center(idx)
    }

    /// Indices of masked-in cells in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// `h^dim ×` number of masked-in cells.
    pub fn measure(&self) -> f64 {
        self.grid.cell_measure() * self.cell_count() as f64
    }

    pub fn same_grid(&self, other: &GridDomain) -> bool {
        self.grid == other.grid
    }

    pub fn is_subset_of(&self, other: &GridDomain) -> bool {
        self.same_grid(other) && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// Sub-domain of masked-in cells satisfying `keep(idx)`.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> GridDomain {
        let mask = self.mask.iter().enumerate().map(|(i, &m)| m && keep(i)).collect();
        GridDomain {
            grid: self.grid.clone(),
            mask,
        }
    }

    /// Ω \ B(0, R): cells whose center has norm strictly greater than `r`.
    pub fn tail_restrict(&self, r: f64) -> GridDomain {
        let grid = &self.grid;
        self.restrict(|i| grid.center_norm(i) > r)
    }

    /// Ω ∩ B(0, R): cells whose center has norm at most `r`.
    pub fn ball_restrict(&self, r: f64) -> GridDomain {
        let grid = &self.grid;
        self.restrict(|i| grid.center_norm(i) <= r)
    }

    /// Cells of `self` not in `other` (both on the same grid).
    pub fn difference(&self, other: &GridDomain) -> Result<GridDomain, GridError> {
        if !self.same_grid(other) {
            return Err(GridError::MismatchedGrid);
        }
        Ok(self.restrict(|i| !other.mask[i]))
    }

    /// Serializes to the structured text record (JSON with a run-length mask).
    pub fn to_record(&self) -> DomainRecord {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &m in &self.mask {
            if m == current {
                len += 1;
            } else {
                runs.push(len);
                current = m;
                len = 1;
            }
        }
        runs.push(len);
        DomainRecord {
            dim: self.grid.dim,
            origin: self.grid.origin().to_vec(),
            h: self.grid.h,
            counts: self.grid.counts().to_vec(),
            mask_runs: runs,
        }
    }

    pub fn from_record(rec: &DomainRecord) -> Result<Self, GridError> {
        let bad = |m: &str| GridError::Record(m.to_string());
        if rec.dim != 1 && rec.dim != 2 {
            return Err(GridError::BadDimension(rec.dim));
        }
        if rec.origin.len() != rec.dim || rec.counts.len() != rec.dim {
            return Err(bad("origin/counts length must equal dim"));
        }
        if !(rec.h.is_finite() && rec.h > 0.0) || rec.origin.iter().any(|o| !o.is_finite()) {
            return Err(bad("h must be positive and all numbers finite"));
        }
        if rec.counts.contains(&0) {
            return Err(bad("counts must be at least 1"));
        }
        let mut origin = [0.0; 2];
        origin[..rec.dim].copy_from_slice(&rec.origin);
        let mut counts = [1usize; 2];
        counts[..rec.dim].copy_from_slice(&rec.counts);
        let grid = Grid {
            dim: rec.dim,
            origin,
            h: rec.h,
            counts,
        };
        let mut mask = Vec::with_capacity(grid.len());
        let mut current = false;
        for &run in &rec.mask_runs {
            if mask.len() + run > grid.len() {
                return Err(bad("mask runs exceed cell count"));
            }
            mask.extend(std::iter::repeat_n(current, run));
            current = !current;
        }
        if mask.len() != grid.len() {
            return Err(bad("mask runs do not cover the grid"));
        }
        Ok(GridDomain { grid, mask })
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("domain record serializes")
    }

    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let rec: DomainRecord = serde_json::from_str(text).map_err(|e| GridError::Record(e.to_string()))?;
        Self::from_record(&rec)
    }
}

/// Text form of a [`GridDomain`]. `mask_runs` alternates masked-out and
/// masked-in run lengths, starting with a (possibly empty) masked-out run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub h: f64,
    pub counts: Vec<usize>,
    pub mask_runs: Vec<usize>,
}

/// Real samples on a domain, zero-extended outside its mask.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Builds from one value per grid cell; values outside the mask are
    /// replaced by 0.
    pub fn new(domain: &GridDomain, mut values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != domain.grid.len() {
            return Err(GridError::WrongLength {
                expected: domain.grid.len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !domain.mask[i] {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(GridError::NonFiniteSample {
                    center: domain.center(i)[..domain.dim()].to_vec(),
                    value: *v,
                });
            }
        }
        Ok(Self {
            domain: Arc::new(domain.clone()),
            values,
        })
    }

    pub fn from_fn(domain: &GridDomain, mut f: impl FnMut(usize, [f64; 2]) -> f64) -> Result<Self, GridError> {
        let values = (0..domain.grid.len())
            .map(|i| if domain.mask[i] { f(i, domain.center(i)) } else { 0.0 })
            .collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: &GridDomain, c: f64) -> Result<Self, GridError> {
        Self::from_fn(domain, |_, _| c)
    }

    /// Evaluates `expr` at every masked-in cell center.
    pub fn sample(expr: &Expr, domain: &GridDomain) -> Result<Self, GridError> {
        let dim = domain.dim();
        let mut values = vec![0.0; domain.grid.len()];
        for i in domain.cells() {
            let c = domain.center(i);
            let v = expr.eval(&c[..dim]).map_err(|source| GridError::Eval {
                center: c[..dim].to_vec(),
                source,
            })?;
            values[i] = v;
        }
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.domain.grid
    }

    /// Value at cell `idx`, 0 outside the mask.
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// One value per grid cell (zeros outside the mask).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(&self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self, GridError> {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sub-domain of masked-in cells whose value satisfies `pred`.
    pub fn level_set(&self, pred: impl Fn(f64) -> bool) -> GridDomain {
        self.domain.restrict(|i| pred(self.values[i]))
    }

    /// `h^dim · Σ_{i ∈ region} value_i`, summed exactly.
    pub fn integral_over(&self, region: &GridDomain) -> Result<f64, GridError> {
        if !self.domain.same_grid(region) {
            return Err(GridError::MismatchedGrid);
        }
        let acc = ExactSum::from_values(region.cells().map(|i| self.values[i]));
        Ok(acc.value() * self.grid().cell_measure())
    }
}

/// A [`GridFunction`] whose masked-in samples all lie in `[1, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField(GridFunction);

impl ExponentField {
    pub fn new(field: GridFunction) -> Result<Self, GridError> {
        let dom = field.domain();
        for i in dom.cells() {
            let v = field.get(i);
            if v < 1.0 {
                return Err(GridError::NotAnExponent {
                    center: dom.center(i)[..dom.dim()].to_vec(),
                    value: v,
                });
            }
        }
        Ok(Self(field))
    }

    pub fn sample(expr: &Expr, domain: &GridDomain) -> Result<Self, GridError> {
        Self::new(GridFunction::sample(expr, domain)?)
    }

    pub fn constant(domain: &GridDomain, p: f64) -> Result<Self, GridError> {
        Self::new(GridFunction::constant(domain, p)?)
    }

    pub fn field(&self) -> &GridFunction {
        &self.0
    }

    pub fn domain(&self) -> &GridDomain {
        self.0.domain()
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.0.get(idx)
    }

    /// Checks that `region` lies on this field's grid and inside its support.
    pub fn check_region(&self, region: &GridDomain) -> Result<(), GridError> {
        if !self.domain().same_grid(region) {
            return Err(GridError::MismatchedGrid);
        }
        if !region.is_subset_of(self.domain()) {
            return Err(GridError::NotContained);
        }
        Ok(())
    }

    /// (min, max) of the samples over `region`; `None` if the region is empty.
    pub fn range_over(&self, region: &GridDomain) -> Option<(f64, f64)> {
        region.cells().fold(None, |acc, i| {
            let v = self.get(i);
            Some(match acc {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            })
        })
    }
}

/// An unbounded Ω represented by a bounded base grid and an increasing
/// sequence of radii; truncation `k` is `base ∩ B(0, R_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    base: GridDomain,
    radii: Vec<f64>,
    /// For each grid cell, the first truncation containing it.
    first: Vec<Option<usize>>,
}

impl Schedule {
    pub fn new(base: GridDomain, radii: Vec<f64>) -> Result<Self, GridError> {
        if radii.is_empty()
            || radii.iter().any(|r| !r.is_finite() || *r <= 0.0)
            || radii.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(GridError::BadSchedule);
        }
        let first = (0..base.grid.len())
            .map(|i| {
                if !base.mask[i] {
                    return None;
                }
                let n = base.grid.center_norm(i);
                radii.iter().position(|&r| n <= r)
            })
            .collect();
        Ok(Self { base, radii, first })
    }

    /// Geometric radii `R_k = 2^k · r0`, `k = 0..steps`.
    pub fn geometric_radii(r0: f64, steps: usize) -> Vec<f64> {
        (0..steps).map(|k| r0 * 2f64.powi(k as i32)).collect()
    }

    /// Base grid for the box `lo..hi` (entries may be infinite) clipped to
    /// the largest radius.
    pub fn for_box(lo: &[f64], hi: &[f64], h: f64, radii: Vec<f64>) -> Result<Self, GridError> {
        let r_max = *radii.last().ok_or(GridError::BadSchedule)?;
        let clip_lo: Vec<f64> = lo.iter().map(|&a| a.max(-r_max)).collect();
        let clip_hi: Vec<f64> = hi.iter().map(|&b| b.min(r_max)).collect();
        let base = GridDomain::from_bounds(&clip_lo, &clip_hi, h)?;
        Self::new(base, radii)
    }

    pub fn base(&self) -> &GridDomain {
        &self.base
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Index of the first truncation containing cell `idx`.
    pub fn first_truncation(&self, idx: usize) -> Option<usize> {
        self.first[idx]
    }

    pub fn truncation(&self, k: usize) -> GridDomain {
        self.base.restrict(|i| matches!(self.first[i], Some(j) if j <= k))
    }

    /// Truncation containing every cell the schedule reaches.
    pub fn last(&self) -> GridDomain {
        self.truncation(self.radii.len() - 1)
    }

    /// Partial integrals `h^dim · Σ_{i ∈ region ∩ B(0,R_k)} term(i)` for
    /// every radius, accumulated exactly. Non-decreasing when `term ≥ 0`.
    pub fn partial_integrals(
        &self,
        region: &GridDomain,
        mut term: impl FnMut(usize) -> f64,
    ) -> Result<Vec<f64>, GridError> {
        if !self.base.same_grid(region) {
            return Err(GridError::MismatchedGrid);
        }
        let mut buckets = vec![ExactSum::new(); self.radii.len()];
        for i in region.cells() {
            if let Some(k) = self.first[i] {
                buckets[k].add(term(i));
            }
        }
        let cell = self.base.grid.cell_measure();
        let mut running = ExactSum::new();
        Ok(buckets
            .iter()
            .map(|b| {
                running.add_sum(b);
                running.value() * cell
            })
            .collect())
    }

    /// Partial measures `|region ∩ B(0, R_k)|`.
    pub fn partial_measures(&self, region: &GridDomain) -> Result<Vec<f64>, GridError> {
        self.partial_integrals(region, |_| 1.0)
    }
}
