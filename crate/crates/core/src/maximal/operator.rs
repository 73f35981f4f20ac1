//! Operators that can stand in for `M` in the modular inequality.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::grid::{GridError, GridFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("{0} needs every grid cell inside the domain")]
    PartialMask(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub trait Operator {
    fn name(&self) -> &'static str;

    /// Whether the operator is bounded on `L^p` for this constant exponent.
    fn bounded_on(&self, p: f64) -> bool;

    fn apply(&self, f: &GridFunction) -> Result<GridFunction, OperatorError>;
}

pub fn apply_operator(op: &dyn Operator, f: &GridFunction) -> Result<GridFunction, OperatorError> {
    op.apply(f)
}

pub struct Identity;

impl Operator for Identity {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn bounded_on(&self, p: f64) -> bool {
        p >= 1.0
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction, OperatorError> {
        Ok(f.clone())
    }
}

pub struct Maximal;

impl Operator for Maximal {
    fn name(&self) -> &'static str {
        "maximal"
    }

    fn bounded_on(&self, p: f64) -> bool {
        p > 1.0
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction, OperatorError> {
        Ok(super::maximal_fast(f).mf)
    }
}

/// `|f̂|` for the unitary DFT (scaled by `1/√N`), laid out on the input grid
/// with the zero frequency moved to the central cell.
pub struct FourierModulus;

impl Operator for FourierModulus {
    fn name(&self) -> &'static str {
        "fourier"
    }

    fn bounded_on(&self, p: f64) -> bool {
        p == 2.0
    }

    fn apply(&self, f: &GridFunction) -> Result<GridFunction, OperatorError> {
        if f.domain().cell_count() != f.grid().len() {
            return Err(OperatorError::PartialMask("the Fourier transform"));
        }
        let counts = f.grid().counts();
        let (nx, ny) = (counts[0], counts.get(1).copied().unwrap_or(1));
        let mut data: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut planner = FftPlanner::new();
        let row_fft = planner.plan_fft_forward(nx);
        for row in data.chunks_exact_mut(nx) {
            row_fft.process(row);
        }
        if ny > 1 {
            let col_fft = planner.plan_fft_forward(ny);
            let mut column = vec![Complex::new(0.0, 0.0); ny];
            for x in 0..nx {
                for y in 0..ny {
                    column[y] = data[y * nx + x];
                }
                col_fft.process(&mut column);
                for y in 0..ny {
                    data[y * nx + x] = column[y];
                }
            }
        }
        let scale = 1.0 / ((nx * ny) as f64).sqrt();
        let mut out = vec![0.0; nx * ny];
        for y in 0..ny {
            for x in 0..nx {
                let (sx, sy) = ((x + nx / 2) % nx, (y + ny / 2) % ny);
                out[sy * nx + sx] = data[y * nx + x].norm() * scale;
            }
        }
        Ok(GridFunction::new(f.domain(), out)?)
    }
}
