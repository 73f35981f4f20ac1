//! Seeded families of random step functions.
//!
//! Each member is a sum of a few boxes with log-uniform amplitudes. Box
//! corners are drawn on a lattice that divides the bounding box of the
//! domain into `divisions` equal parts per axis, so the same seed gives the
//! same function at every resolution whose cells refine the lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ExperimentError;
use crate::conditions::ConditionError;
use crate::grid::{GridDomain, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFamily {
    pub seed: u64,
    /// Independent ChaCha stream, so calibration and holdout never overlap.
    pub stream: u64,
    pub count: usize,
    pub max_pieces: usize,
    /// Lattice divisions per axis; `None` picks the largest divisor of the
    /// cell count that is at most 32.
    pub divisions: Option<usize>,
    pub amplitude: (f64, f64),
}

impl StepFamily {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            stream: 0,
            count,
            max_pieces: 3,
            divisions: None,
            amplitude: (1e-2, 1e2),
        }
    }

    pub fn stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn divisions(mut self, d: usize) -> Self {
        self.divisions = Some(d);
        self
    }

    pub fn generate(&self, dom: &GridDomain) -> Result<Vec<GridFunction>, ExperimentError> {
        if dom.is_empty() {
            return Err(ConditionError::EmptyRegion.into());
        }
        let dim = dom.dim();
        let grid = dom.grid();
        // Bounding box of the masked cells, in cell indices.
        let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
        for i in dom.cells() {
            let (ix, iy) = grid.coords(i);
            lo = [lo[0].min(ix), lo[1].min(iy)];
            hi = [hi[0].max(ix + 1), hi[1].max(iy + 1)];
        }
        let div: Vec<usize> = (0..dim)
            .map(|a| {
                self.divisions
                    .unwrap_or_else(|| default_divisions(hi[a] - lo[a]))
                    .max(1)
            })
            .collect();
        let h = grid.h();
        let origin = grid.origin();
        let box_lo: Vec<f64> = (0..dim).map(|a| origin[a] + lo[a] as f64 * h).collect();
        let unit: Vec<f64> = (0..dim).map(|a| (hi[a] - lo[a]) as f64 * h / div[a] as f64).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        let (amin, amax) = (self.amplitude.0.ln(), self.amplitude.1.ln());
        let mut out = Vec::with_capacity(self.count);
        for _ in 0..self.count {
            let pieces = rng.random_range(1..=self.max_pieces.max(1));
            let mut boxes = Vec::with_capacity(pieces);
            for _ in 0..pieces {
                let mut ranges = [(0usize, 1usize); 2];
                for (a, r) in ranges.iter_mut().enumerate().take(dim) {
                    let x = rng.random_range(0..div[a]);
                    let y = rng.random_range(0..div[a]);
                    *r = (x.min(y), x.max(y) + 1);
                }
                let amp = rng.random_range(amin..=amax).exp();
                boxes.push((ranges, amp));
            }
            let f = GridFunction::from_fn(dom, |_, c| {
                let mut v = 0.0;
                for (ranges, amp) in &boxes {
                    let inside = (0..dim).all(|a| {
                        let k = ((c[a] - box_lo[a]) / unit[a]).floor() as i64;
                        k >= ranges[a].0 as i64 && k < ranges[a].1 as i64
                    });
                    if inside {
                        v += amp;
                    }
                }
                v
            })?;
            out.push(f);
        }
        Ok(out)
    }
}

fn default_divisions(cells: usize) -> usize {
    (1..=cells.min(32))
        .rev()
        .find(|&d| cells.is_multiple_of(d))
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed_and_stream() {
        let dom = GridDomain::interval(0.0, 1.0, 0.01).unwrap();
        let a = StepFamily::new(3, 5).generate(&dom).unwrap();
        let b = StepFamily::new(3, 5).generate(&dom).unwrap();
        let c = StepFamily::new(3, 5).stream(1).generate(&dom).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn amplitudes_and_support() {
        let dom = GridDomain::square_box([0.0, 0.0], [1.0, 1.0], 0.125).unwrap();
        for f in StepFamily::new(11, 20).generate(&dom).unwrap() {
            assert!(f.max_abs() >= 1e-2);
            assert!(f.max_abs() <= 3e2);
            assert!(f.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn same_function_after_refinement() {
        let coarse = GridDomain::interval(-10.0, 10.0, 0.05).unwrap();
        let fine = GridDomain::interval(-10.0, 10.0, 0.025).unwrap();
        let fam = StepFamily::new(5, 10).divisions(20);
        let a = fam.generate(&coarse).unwrap();
        let b = fam.generate(&fine).unwrap();
        for (f, g) in a.iter().zip(&b) {
            for i in coarse.cells() {
                assert_eq!(f.get(i), g.get(2 * i));
                assert_eq!(f.get(i), g.get(2 * i + 1));
            }
        }
    }

    #[test]
    fn divisor_choice() {
        assert_eq!(default_divisions(300), 30);
        assert_eq!(default_divisions(400), 25);
        assert_eq!(default_divisions(7), 7);
        assert_eq!(default_divisions(37), 1);
    }
}
