//! The modular inequality with `M` replaced by the modulus of the discrete
//! Fourier transform. Plancherel makes `T` an isometry of `L²`, so the
//! `L^{p₊}` constant is 1 when `p₊ = 2`.

use super::constants::{estimate_constants_unbounded, ConstantsOptions, InequalityReport};
use super::ExperimentError;
use crate::conditions::ess_range;
use crate::grid::{ExponentField, Schedule};
use crate::maximal::{FourierModulus, Operator};
use crate::modular::modular;
use crate::EPS_TIE;

pub fn fourier_check(
    p: &ExponentField,
    q: &ExponentField,
    schedule: &Schedule,
    opts: &ConstantsOptions,
    epsilons: &[f64],
) -> Result<InequalityReport, ExperimentError> {
    let reach = schedule.last();
    let (_, p_plus) = ess_range(p, &reach)?;
    if (p_plus - 2.0).abs() > EPS_TIE {
        return Err(ExperimentError::Refused(format!(
            "the Fourier check needs p_plus = 2, got {p_plus}"
        )));
    }
    if let Some(i) = reach.cells().find(|&i| q.get(i) < p.get(i) - EPS_TIE) {
        return Err(ExperimentError::Refused(format!(
            "q < p at {:?}",
            &reach.center(i)[..reach.dim()]
        )));
    }
    let mut rep = estimate_constants_unbounded(p, q, schedule, &FourierModulus, opts, epsilons)?;

    let two = ExponentField::constant(schedule.base(), 2.0)?;
    let mut fam = super::StepFamily::new(opts.seed, opts.holdout).stream(1);
    fam.divisions = opts.divisions;
    let mut worst = 0.0f64;
    for f in fam.generate(&reach)? {
        let tf = FourierModulus.apply(&f)?;
        let a = modular(&tf, &two, &reach)?.value;
        let b = modular(&f, &two, &reach)?.value;
        worst = worst.max((a - b).abs() / b);
    }
    rep.plancherel_max_rel_error = Some(worst);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn line() -> Schedule {
        Schedule::for_box(
            &[f64::NEG_INFINITY],
            &[f64::INFINITY],
            0.25,
            Schedule::geometric_radii(1.0, 10),
        )
        .unwrap()
    }

    fn field(src: &str, s: &Schedule) -> ExponentField {
        ExponentField::sample(&parse(src).unwrap(), s.base()).unwrap()
    }

    fn opts() -> ConstantsOptions {
        ConstantsOptions {
            calibration: 10,
            holdout: 10,
            ..Default::default()
        }
    }

    const EPS: [f64; 3] = [0.5, 0.1, 0.01];

    #[test]
    fn plancherel_for_constant_two() {
        let s = line();
        let p = field("2", &s);
        let rep = fourier_check(&p, &p, &s, &opts(), &EPS).unwrap();
        assert!(rep.plancherel_max_rel_error.unwrap() <= 1e-9);
        assert!((rep.c_hat - 1.0).abs() <= 1e-9);
        assert_eq!(rep.c2, 0.0);
        for m in &rep.members {
            assert!((m.lhs - m.rhs / rep.c1).abs() <= 1e-9 * m.lhs);
        }
        assert!(rep.all_pass());
    }

    #[test]
    fn bounded_perturbation_passes() {
        let s = line();
        let rep = fourier_check(&field("2", &s), &field("2 + chi(-1, 1)", &s), &s, &opts(), &EPS).unwrap();
        assert!(rep.all_pass());
        assert!(rep.c1 >= 1.0);
    }

    #[test]
    fn guards() {
        let s = line();
        let low = field("2 - (1 + x^2)^-1", &s);
        assert!(matches!(
            fourier_check(&low, &low, &s, &opts(), &EPS),
            Err(ExperimentError::Refused(_))
        ));
        let two = field("2", &s);
        let dip = field("2 - 0.5*chi(-1, 1)", &s);
        assert!(matches!(
            fourier_check(&two, &dip, &s, &opts(), &EPS),
            Err(ExperimentError::Refused(_))
        ));
    }
}
