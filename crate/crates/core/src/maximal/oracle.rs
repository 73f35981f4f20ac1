//! Exhaustive enumeration: every window is grown cell by cell from its
//! start and every cell it covers is offered the window's average.

use super::{finish, Best, MaxOpResult, Window};
use crate::exact::ExactSum;
use crate::grid::GridFunction;

pub fn maximal_oracle(f: &GridFunction) -> MaxOpResult {
    let grid = f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let best = if grid.dim() == 1 {
        oracle_1d(&abs)
    } else {
        let c = grid.counts();
        oracle_2d(&abs, c[0], c[1])
    };
    finish(f, best)
}

fn oracle_1d(abs: &[f64]) -> Vec<Best> {
    let n = abs.len();
    let mut best = vec![Best::NONE; n];
    for a in 0..n {
        let mut acc = ExactSum::new();
        for b in a..n {
            acc.add(abs[b]);
            let len = b - a + 1;
            let avg = acc.div_value(len as u64);
            let w = Window {
                start: [a as i64, 0],
                len,
            };
            for slot in &mut best[a..=b] {
                if slot.beaten_by(avg, w) {
                    *slot = Best { avg, window: w };
                }
            }
        }
    }
    best
}

fn oracle_2d(abs: &[f64], nx: usize, ny: usize) -> Vec<Best> {
    let side_max = nx.max(ny) as i64;
    let (nx_i, ny_i) = (nx as i64, ny as i64);
    let at = |x: i64, y: i64| -> f64 {
        if (0..nx_i).contains(&x) && (0..ny_i).contains(&y) {
            abs[(y * nx_i + x) as usize]
        } else {
            0.0
        }
    };
    let mut best = vec![Best::NONE; nx * ny];
    for sy in (1 - side_max)..ny_i {
        for sx in (1 - side_max)..nx_i {
            let mut acc = ExactSum::new();
            for k in 1..=side_max {
                // Grow the square by its new top row and right column.
                let (top, right) = (sy + k - 1, sx + k - 1);
                for x in sx..=right {
                    acc.add(at(x, top));
                }
                for y in sy..top {
                    acc.add(at(right, y));
                }
                let (x0, x1) = (sx.max(0), right.min(nx_i - 1));
                let (y0, y1) = (sy.max(0), top.min(ny_i - 1));
                if x0 > x1 || y0 > y1 {
                    continue;
                }
                let avg = acc.div_value((k * k) as u64);
                let w = Window {
                    start: [sx, sy],
                    len: k as usize,
                };
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let slot = &mut best[(y * nx_i + x) as usize];
                        if slot.beaten_by(avg, w) {
                            *slot = Best { avg, window: w };
                        }
                    }
                }
            }
        }
    }
    best
}
