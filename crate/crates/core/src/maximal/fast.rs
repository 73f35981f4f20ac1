//! Prefix-sum implementation with exact window sums.
//!
//! 1D: only windows whose ends sit on boundaries between runs of equal
//! values, or at the cell itself, can be optimal, so the search is over runs.
//! 2D: for each side, all window averages come from a summed-area table and
//! the best window per cell is a sliding-window maximum (a monotone deque,
//! along x then along y). Sides are visited in increasing order and a cell
//! only switches on a strictly larger average, which reproduces the oracle's
//! tie-break.

use std::collections::VecDeque;

use super::{finish, Best, MaxOpResult, Window};
use crate::exact::ExactSum;
use crate::grid::GridFunction;

pub fn maximal_fast(f: &GridFunction) -> MaxOpResult {
    let grid = f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let best = if grid.dim() == 1 {
        fast_1d(&abs)
    } else {
        let c = grid.counts();
        fast_2d(&abs, c[0], c[1])
    };
    finish(f, best)
}

/// For each output position `j`, the index in `lo(j)..=hi(j)` of the
/// largest value (earliest on ties). Window bounds must be non-decreasing.
fn sliding_argmax(values: &[f64], out_len: usize, bounds: impl Fn(usize) -> (usize, usize)) -> Vec<usize> {
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let (lo, hi) = bounds(j);
        while next <= hi {
            while dq.back().is_some_and(|&b| values[b] < values[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&b| b < lo) {
            dq.pop_front();
        }
        out.push(*dq.front().expect("window is non-empty"));
    }
    out
}

/// Splits `abs` into maximal runs of equal values, as `(start, end)` pairs.
fn runs(abs: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut s = 0;
    for i in 1..=abs.len() {
        if i == abs.len() || abs[i] != abs[s] {
            out.push((s, i));
            s = i;
        }
    }
    out
}

// Within a run of equal values the average of a window is monotone in
// where its endpoint sits, so a best window for cell i starts at a run
// start or at i and ends at a run end or at i + 1. Windows spanning whole
// runs are shared by every cell of the runs they cover; the rest involve
// i itself. Cost O(R^2 + nR) for R runs.
fn fast_1d(abs: &[f64]) -> Vec<Best> {
    let n = abs.len();
    let mut prefix = Vec::with_capacity(n + 1);
    let mut run = ExactSum::new();
    prefix.push(run.clone());
    for &v in abs {
        run.add(v);
        prefix.push(run.clone());
    }
    let avg = |a: usize, b: usize| -> f64 {
        let mut s = prefix[b].clone();
        s.sub_sum(&prefix[a]);
        s.div_value((b - a) as u64)
    };
    let offer = |slot: &mut Best, a: usize, b: usize| {
        let w = Window {
            start: [a as i64, 0],
            len: b - a,
        };
        let v = avg(a, b);
        if slot.beaten_by(v, w) {
            *slot = Best { avg: v, window: w };
        }
    };

    let rs = runs(abs);
    let r_count = rs.len();
    // spanning[r]: best window from a run start at or before run r to a run
    // end at or after it.
    let mut spanning = vec![Best::NONE; r_count];
    for l in 0..r_count {
        let mut running = Best::NONE;
        for u in (l..r_count).rev() {
            offer(&mut running, rs[l].0, rs[u].1);
            let slot = &mut spanning[u];
            if slot.beaten_by(running.avg, running.window) {
                *slot = running;
            }
        }
    }

    // Runs tile 0..n in order, so cells are pushed in index order.
    let mut best = Vec::with_capacity(n);
    for (r, &(s, e)) in rs.iter().enumerate() {
        for i in s..e {
            let mut slot = spanning[r];
            if i > s {
                offer(&mut slot, i, i + 1);
                for &(_, end) in &rs[r..] {
                    offer(&mut slot, i, end);
                }
            }
            if i + 1 < e {
                for &(start, _) in &rs[..=r] {
                    offer(&mut slot, start, i + 1);
                }
            }
            best.push(slot);
        }
    }
    best
}

fn fast_2d(abs: &[f64], nx: usize, ny: usize) -> Vec<Best> {
    // table[y][x] = sum over cells with coordinates < (x, y).
    let w = nx + 1;
    let mut table = vec![ExactSum::new(); w * (ny + 1)];
    for y in 0..ny {
        let mut row = ExactSum::new();
        for x in 0..nx {
            row.add(abs[y * nx + x]);
            let mut cell = table[y * w + x + 1].clone();
            cell.add_sum(&row);
            table[(y + 1) * w + x + 1] = cell;
        }
    }
    let block_avg = |x0: usize, x1: usize, y0: usize, y1: usize, count: u64| -> f64 {
        if x0 >= x1 || y0 >= y1 {
            return 0.0;
        }
        let mut s = table[y1 * w + x1].clone();
        s.sub_sum(&table[y0 * w + x1]);
        s.sub_sum(&table[y1 * w + x0]);
        s.add_sum(&table[y0 * w + x0]);
        s.div_value(count)
    };

    let mut best = vec![Best::NONE; nx * ny];
    let side_max = nx.max(ny);
    for k in 1..=side_max {
        // Starts sx in [1-k, nx-1] are stored at offset sx + k - 1.
        let (sw, sh) = (nx + k - 1, ny + k - 1);
        let count = (k * k) as u64;
        let clamp = |s: usize, n: usize| -> (usize, usize) {
            // Offset s corresponds to start s - (k - 1); the window spans
            // [start, start + k) clipped to [0, n).
            let lo = s.saturating_sub(k - 1);
            let hi = (s + 1).min(n);
            (lo, hi)
        };
        let mut avgs = vec![0.0; sw * sh];
        for sy in 0..sh {
            let (y0, y1) = clamp(sy, ny);
            for sx in 0..sw {
                let (x0, x1) = clamp(sx, nx);
                avgs[sy * sw + sx] = block_avg(x0, x1, y0, y1, count);
            }
        }
        // Cell x is covered by offsets x ..= x + k - 1.
        let mut row_arg = vec![0usize; sh * nx];
        let mut row_max = vec![0.0; sh * nx];
        for sy in 0..sh {
            let row = &avgs[sy * sw..(sy + 1) * sw];
            let arg = sliding_argmax(row, nx, |x| (x, x + k - 1));
            for (x, &a) in arg.iter().enumerate() {
                row_arg[sy * nx + x] = a;
                row_max[sy * nx + x] = row[a];
            }
        }
        let mut column = vec![0.0; sh];
        for x in 0..nx {
            for sy in 0..sh {
                column[sy] = row_max[sy * nx + x];
            }
            let arg = sliding_argmax(&column, ny, |y| (y, y + k - 1));
            for (y, &sy) in arg.iter().enumerate() {
                let avg = column[sy];
                let slot = &mut best[y * nx + x];
                if avg > slot.avg {
                    let sx = row_arg[sy * nx + x];
                    *slot = Best {
                        avg,
                        window: Window {
                            start: [sx as i64 - (k as i64 - 1), sy as i64 - (k as i64 - 1)],
                            len: k,
                        },
                    };
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::grid::GridDomain;
    use crate::maximal::maximal_oracle;

    fn line(values: Vec<f64>) -> GridFunction {
        let dom = GridDomain::interval(0.0, values.len() as f64, 1.0).unwrap();
        GridFunction::new(&dom, values).unwrap()
    }

    #[test]
    fn runs_split_on_value_changes() {
        assert_eq!(runs(&[1.0, 1.0, 2.0, 1.0]), vec![(0, 2), (2, 3), (3, 4)]);
        assert_eq!(runs(&[5.0]), vec![(0, 1)]);
    }

    #[test]
    fn long_runs_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let levels = [0.0, 0.5, 1.0, 3.0, 7.25];
        for _ in 0..200 {
            let n = rng.random_range(1..=120);
            let mut v = Vec::with_capacity(n);
            while v.len() < n {
                let x = levels[rng.random_range(0..levels.len())];
                let k = rng.random_range(1..=12).min(n - v.len());
                v.extend(std::iter::repeat_n(x, k));
            }
            let f = line(v);
            assert_eq!(maximal_fast(&f), maximal_oracle(&f));
        }
    }

    #[test]
    fn step_family_members_match_oracle() {
        let dom = GridDomain::interval(-5.0, 5.0, 0.1).unwrap();
        for f in crate::experiments::StepFamily::new(21, 30).generate(&dom).unwrap() {
            assert_eq!(maximal_fast(&f), maximal_oracle(&f));
        }
    }
}
