//! Numerical laboratory for variable-exponent Lebesgue spaces.
//!
//! The crate computes modulars `ρ_{p(·)}(f) = ∫ |f|^{p(x)} dx`, Luxemburg
//! norms and the uncentered Hardy–Littlewood maximal operator on uniform
//! grids, decides the exponent conditions under which the modular
//! inequality
//!
//! ```text
//! ∫_Ω Mf(x)^{p(x)} dx ≤ c₁ ∫_Ω |f(x)|^{q(x)} dx + c₂
//! ```
//!
//! holds, builds the weight ω that certifies it on sets of infinite
//! measure, and searches for counterexamples when the conditions fail.
//!
//! Modules, bottom up:
//!
//! * [`exact`]: order-independent exact summation.
//! * [`grid`]: domains, sampled functions, exponent fields, truncation schedules.
//! * [`expr`]: the closed-form expression language used for `p`, `q` and `f`.
//! * [`modular`]: modulars and Luxemburg norms.
//! * [`maximal`]: brute-force and prefix-sum maximal operators, plus the
//!   generic operator interface (identity, maximal, discrete Fourier modulus).
//! * [`conditions`]: verdict engines for the exponent conditions.
//! * [`experiments`]: falsifier, constant estimation and example reproduction.

pub mod conditions;
pub mod exact;
pub mod experiments;
pub mod expr;
pub mod grid;
pub mod maximal;
pub mod modular;

pub use conditions::{ConditionReport, Verdict};
pub use expr::{parse, Expr};
pub use grid::{ExponentField, GridDomain, GridFunction, Schedule};
pub use maximal::{maximal_fast, maximal_oracle, MaxOpResult};
pub use modular::{luxemburg_norm, modular, ModularValue};

/// Tolerance for strict/non-strict comparisons between sampled exponents.
pub const EPS_TIE: f64 = 1e-12;
