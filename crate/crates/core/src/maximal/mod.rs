//! Discrete uncentered Hardy–Littlewood maximal operator.
//!
//! `Mf_i` is the largest average of `|f|` over a window containing cell `i`,
//! with `f` zero-extended outside Ω. In 1D the windows are all contiguous
//! cell ranges inside the grid; a window reaching past the grid only adds
//! zeros, so it never beats its in-grid part. In 2D the windows are `k × k`
//! squares with `1 ≤ k ≤ max(nx, ny)` whose start may lie left of or below
//! the grid (zero padding); a larger square already contains the whole
//! grid and only dilutes.
//!
//! Averages are `exact window sum (rounded once) / cell count`. Both
//! implementations compute exactly this number, so they agree bit for bit.
//! Ties go to the larger average, then the smaller window, then the
//! smaller start `(y, x)`.

mod fast;
mod operator;
mod oracle;

use serde::Serialize;

use crate::grid::GridFunction;

pub use fast::maximal_fast;
pub use operator::{apply_operator, FourierModulus, Identity, Maximal, Operator, OperatorError};
pub use oracle::maximal_oracle;

/// Square (2D) or interval (1D) of cells; `start` is `[x, y]`, `y = 0` in 1D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: [i64; 2],
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxOpResult {
    pub mf: GridFunction,
    /// Maximizing window per grid cell (also for cells outside Ω).
    pub windows: Vec<Window>,
}

/// Running best candidate for one cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Best {
    pub avg: f64,
    pub window: Window,
}

impl Best {
    pub const NONE: Best = Best {
        avg: f64::NEG_INFINITY,
        window: Window { start: [0, 0], len: 0 },
    };

    /// `true` if `(avg, window)` beats the current candidate.
    pub fn beaten_by(&self, avg: f64, window: Window) -> bool {
        if avg != self.avg {
            return avg > self.avg;
        }
        if window.len != self.window.len {
            return window.len < self.window.len;
        }
        (window.start[1], window.start[0]) < (self.window.start[1], self.window.start[0])
    }
}

pub(crate) fn finish(f: &GridFunction, best: Vec<Best>) -> MaxOpResult {
    let values = best.iter().map(|b| b.avg).collect();
    let mf = GridFunction::new(f.domain(), values).expect("averages of finite values are finite");
    MaxOpResult {
        mf,
        windows: best.into_iter().map(|b| b.window).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;

    fn line(values: &[f64]) -> GridFunction {
        let dom = GridDomain::interval(0.0, values.len() as f64, 1.0).unwrap();
        GridFunction::new(&dom, values.to_vec()).unwrap()
    }

    #[test]
    fn single_spike() {
        let f = line(&[0.0, 0.0, 6.0, 0.0]);
        for r in [maximal_oracle(&f), maximal_fast(&f)] {
            assert_eq!(r.mf.values(), &[2.0, 3.0, 6.0, 3.0]);
            assert_eq!(r.windows[0], Window { start: [0, 0], len: 3 });
            assert_eq!(r.windows[1], Window { start: [1, 0], len: 2 });
            assert_eq!(r.windows[2], Window { start: [2, 0], len: 1 });
            assert_eq!(r.windows[3], Window { start: [2, 0], len: 2 });
        }
    }

    #[test]
    fn constants_are_fixed() {
        let f = line(&[-2.5; 7]);
        assert_eq!(maximal_fast(&f).mf.values(), &[2.5; 7]);
        assert_eq!(maximal_oracle(&f).mf.values(), &[2.5; 7]);
        let dom = GridDomain::square_box([0.0, 0.0], [3.0, 2.0], 1.0).unwrap();
        let f = GridFunction::constant(&dom, 4.0).unwrap();
        assert_eq!(maximal_fast(&f).mf.values(), &[4.0; 6]);
        assert_eq!(maximal_oracle(&f).mf.values(), &[4.0; 6]);
    }

    #[test]
    fn squares_may_hang_off_the_grid() {
        // A 3×1 strip: the best square around the middle cell is 2×2 and
        // half outside the grid; the first cell needs the full 3×3 square.
        let dom = GridDomain::square_box([0.0, 0.0], [3.0, 1.0], 1.0).unwrap();
        let f = GridFunction::new(&dom, vec![0.0, 1.0, 4.0]).unwrap();
        let r = maximal_oracle(&f);
        assert_eq!(r.mf.values(), &[5.0 / 9.0, 1.25, 4.0]);
        assert_eq!(r.windows[1], Window { start: [1, -1], len: 2 });
        assert_eq!(maximal_fast(&f), r);
    }

    #[test]
    fn tie_prefers_smaller_window_then_start() {
        let f = line(&[1.0, 1.0, 1.0]);
        let r = maximal_fast(&f);
        assert!(r.windows.iter().all(|w| w.len == 1));
        let f = line(&[3.0, 0.0, 3.0]);
        let r = maximal_oracle(&f);
        assert_eq!(r.windows[1], Window { start: [0, 0], len: 3 });
        assert_eq!(r.mf.get(1), 2.0);
    }
}
