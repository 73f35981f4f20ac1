use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Result};
use serde_json::{json, Value};

use varlp::conditions::{
    check_embedding, check_finite_measure, check_lerner, check_touching, construct_omega, defect_exponent,
    defect_integral_estimate, omega_with_kappa, ConditionError, ConditionReport, OmegaCertificate, Verdict,
};
use varlp::experiments::{
    estimate_constants, estimate_constants_unbounded, falsify, falsify_tail, fourier_check, golden_reference,
    modular_log_check, reproduce_example, ExperimentError, FalsifyOutcome, InequalityReport, StepFamily,
};
use varlp::grid::GridDomain;
use varlp::maximal::{maximal_fast, maximal_oracle, FourierModulus, Identity, Maximal, Operator};
use varlp::modular::{luxemburg_bracket, modular, modular_partials};

use crate::config::{Region, RunConfig};

pub struct Outcome {
    pub report: Value,
    pub exit: i32,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(report: Value, exit: i32) -> Self {
        Self {
            report,
            exit,
            csv: None,
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

pub fn parse_check(exprs: &[String], cfg: Option<&RunConfig>) -> Result<Outcome> {
    let mut items: Vec<(String, String)> = exprs
        .iter()
        .enumerate()
        .map(|(i, e)| (format!("arg{i}"), e.clone()))
        .collect();
    if let Some(cfg) = cfg {
        for (name, src) in [
            ("p", &cfg.exponents.p),
            ("q", &cfg.exponents.q),
            ("f", &cfg.exponents.f),
        ] {
            if let Some(src) = src {
                items.push((name.into(), src.clone()));
            }
        }
    }
    if items.is_empty() {
        bail!("nothing to parse: pass expressions or --config");
    }
    let mut exit = 0;
    let mut out = Vec::new();
    for (name, src) in items {
        match varlp::parse(&src) {
            Ok(e) => out.push(json!({ "name": name, "source": src, "ok": true, "printed": e.to_string() })),
            Err(e) => {
                exit = 3;
                out.push(json!({
                    "name": name,
                    "source": src,
                    "ok": false,
                    "offset": e.offset,
                    "column": e.column,
                    "expected": e.expected,
                    "found": e.found,
                }));
            }
        }
    }
    Ok(Outcome::new(json!(out), exit))
}

pub fn modular_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let region = cfg.region()?;
    let dom = region.base();
    let p = cfg.exponent("p", dom)?;
    let f = cfg.function(dom)?;
    match &region {
        Region::Bounded(d) => {
            let v = modular(&f, &p, d)?;
            Ok(Outcome::new(serde_json::to_value(v)?, 0))
        }
        Region::Unbounded(s) => {
            let partials = modular_partials(&f, &p, s.base(), s)?;
            let mut csv = String::from("radius,modular\n");
            for (r, v) in s.radii().iter().zip(&partials) {
                let _ = writeln!(csv, "{r},{v}");
            }
            Ok(Outcome::new(json!({ "radii": s.radii(), "partials": partials }), 0).with_csv(csv))
        }
    }
}

pub fn norm_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let region = cfg.region()?;
    let dom = match &region {
        Region::Bounded(d) => d.clone(),
        Region::Unbounded(s) => s.last(),
    };
    let p = cfg.exponent("p", region.base())?;
    let f = cfg.function(region.base())?;
    let bracket = luxemburg_bracket(&f, &p, &dom, cfg.norm.rtol)?;
    let (norm, report) = match bracket {
        None => (0.0, json!({ "norm": 0.0, "rtol": cfg.norm.rtol })),
        Some((lo, hi)) => (
            hi,
            json!({
                "norm": hi,
                "bracket": [lo, hi],
                "rtol": cfg.norm.rtol,
                "modular_at_norm": modular(&f.scale(1.0 / hi)?, &p, &dom)?.value,
            }),
        ),
    };
    let csv = format!("norm\n{norm}\n");
    Ok(Outcome::new(report, 0).with_csv(csv))
}

pub fn maxop_cmd(cfg: &RunConfig, oracle: bool) -> Result<Outcome> {
    let region = cfg.region()?;
    let dom = region.base();
    let f = cfg.function(dom)?;
    let r = if oracle { maximal_oracle(&f) } else { maximal_fast(&f) };
    let dim = dom.dim();
    let mut csv = String::from(if dim == 1 {
        "x,f,mf,start,len\n"
    } else {
        "x,y,f,mf,start_x,start_y,len\n"
    });
    for i in dom.cells() {
        let c = dom.center(i);
        let w = r.windows[i];
        if dim == 1 {
            let _ = writeln!(csv, "{},{},{},{},{}", c[0], f.get(i), r.mf.get(i), w.start[0], w.len);
        } else {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                c[0],
                c[1],
                f.get(i),
                r.mf.get(i),
                w.start[0],
                w.start[1],
                w.len
            );
        }
    }
    let mut report = json!({
        "implementation": if oracle { "oracle" } else { "fast" },
        "cells": dom.cell_count(),
        "max_f": f.max_abs(),
        "max_mf": r.mf.max_abs(),
    });
    if cfg.exponents.p.is_some() {
        let p = cfg.exponent("p", dom)?;
        report["modular_f"] = json!(modular(&f, &p, dom)?.value);
        report["modular_mf"] = json!(modular(&r.mf, &p, dom)?.value);
    }
    Ok(Outcome::new(report, 0).with_csv(csv))
}

fn evidence_csv(reports: &[ConditionReport]) -> String {
    let mut csv = String::from("condition,radius,quantity,value\n");
    for r in reports {
        for e in &r.evidence {
            let radius = e.radius.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{},{},\"{}\",{}", r.condition, radius, e.quantity, e.value);
        }
    }
    csv
}

pub fn check_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let region = cfg.region()?;
    let base = region.base();
    let p = cfg.exponent("p", base)?;
    let q = cfg.exponent_q(base)?;
    let mut names = cfg.check.conditions.clone();
    if names.is_empty() {
        names = match region {
            Region::Bounded(_) => vec!["finite_measure".into()],
            Region::Unbounded(_) => vec!["touching".into(), "embedding".into()],
        };
    }
    let mut reports = Vec::new();
    for name in &names {
        match (name.as_str(), &region) {
            ("finite_measure", Region::Bounded(d)) => reports.push(check_finite_measure(&p, &q, d)?),
            ("finite_measure", Region::Unbounded(s)) => reports.push(check_finite_measure(&p, &q, &s.last())?),
            ("constant_exponent", Region::Bounded(d)) => reports.push(check_lerner(&p, d)?),
            ("constant_exponent", Region::Unbounded(s)) => reports.push(check_lerner(&p, &s.last())?),
            ("touching", Region::Unbounded(s)) => reports.push(check_touching(&p, &q, s, &cfg.check.epsilons)?),
            ("embedding", Region::Unbounded(s)) => reports.push(check_embedding(&p, &q, s)?),
            ("defect_integral", Region::Unbounded(s)) => {
                let rf = defect_exponent(&p, &q)?;
                for &lambda in &cfg.check.lambdas {
                    reports.push(defect_integral_estimate(&rf, lambda, s)?);
                }
            }
            ("touching" | "embedding" | "defect_integral", Region::Bounded(_)) => {
                bail!("condition `{name}` needs a [schedule]")
            }
            _ => bail!(
                "unknown condition `{name}` (known: finite_measure, constant_exponent, touching, embedding, defect_integral)"
            ),
        }
    }
    let verdict = reports.iter().fold(Verdict::Holds, |v, r| v.and(r.verdict));
    let csv = evidence_csv(&reports);
    Ok(Outcome::new(
        json!({ "verdict": verdict, "conditions": reports }),
        verdict.exit_code(),
    )
    .with_csv(csv))
}

fn omega_summary(cert: &OmegaCertificate) -> (Value, i32) {
    let bounds = cert.omega_in_unit_interval() && cert.sup_norms_bounded() && cert.product_bounded();
    let stable = cert.modular_stabilizes(1e-6);
    let exit = if !cert.admissible || !bounds {
        1
    } else if !stable {
        2
    } else {
        0
    };
    let v = json!({
        "certificate": cert,
        "omega_in_unit_interval": cert.omega_in_unit_interval(),
        "sup_norms_bounded": cert.sup_norms_bounded(),
        "product_bounded": cert.product_bounded(),
        "sup_p": cert.sup_p(),
        "sup_q": cert.sup_q(),
        "modular_stabilizes": stable,
        "final_relative_increment": cert.final_relative_increment(),
    });
    (v, exit)
}

pub fn omega_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let Region::Unbounded(s) = cfg.region()? else {
        bail!("omega needs a [schedule]");
    };
    let p = cfg.exponent("p", s.base())?;
    let q = cfg.exponent_q(s.base())?;
    let o = &cfg.omega;
    let cert = match o.kappa {
        Some(kappa) => omega_with_kappa(&p, &q, o.lambda, kappa, &s),
        None => construct_omega(&p, &q, o.lambda, &s, &o.kappa_offsets),
    };
    match cert {
        Ok(cert) => {
            let (v, exit) = omega_summary(&cert);
            let mut csv = String::from("radius,e_measure,modular\n");
            for k in 0..cert.radii.len() {
                let _ = writeln!(csv, "{},{},{}", cert.radii[k], cert.e_measures[k], cert.modular[k]);
            }
            Ok(Outcome::new(v, exit).with_csv(csv))
        }
        Err(e @ ConditionError::NoAdmissibleKappa { .. }) => {
            Ok(Outcome::new(json!({ "admissible": false, "error": e.to_string() }), 1))
        }
        Err(e) => Err(e.into()),
    }
}

fn trajectory_csv(out: &FalsifyOutcome) -> String {
    let mut csv = String::from("lambda,lhs,rhs,ratio\n");
    if let Some(w) = out.witness() {
        for t in &w.trajectory {
            let _ = writeln!(csv, "{},{},{},{}", t.lambda, t.lhs, t.rhs, t.ratio);
        }
    }
    csv
}

pub fn falsify_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let region = cfg.region()?;
    let base = region.base();
    let p = cfg.exponent("p", base)?;
    let q = cfg.exponent_q(base)?;
    let opts = cfg.falsify.options();
    let dom = match &region {
        Region::Bounded(d) => d.clone(),
        Region::Unbounded(s) => s.last(),
    };
    let out = falsify(&p, &q, &dom, &opts)?;
    let verified = out.witness().map(|w| w.verify());
    let mut report = json!({ "cubes": &out });
    if let Some(v) = &verified {
        report["verified"] = json!(v.is_ok());
        if let Err(e) = v {
            report["verify_error"] = json!(e);
        }
    }
    let mut exit = out.exit_code();
    let mut csv = trajectory_csv(&out);
    if let (FalsifyOutcome::NoViolation, Region::Unbounded(s)) = (&out, &region) {
        let tail = falsify_tail(&p, &q, s, &opts)?;
        if let Some(t) = &tail {
            exit = if t.falsified { 1 } else { 2 };
            csv = String::from("radius,e_measure,height,lhs_lower,rhs\n");
            for pt in &t.points {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    pt.radius, pt.e_measure, pt.height, pt.lhs_lower, pt.rhs
                );
            }
        }
        report["tail"] = json!(tail);
    }
    Ok(Outcome::new(report, exit).with_csv(csv))
}

fn operator(name: &str) -> Result<&'static dyn Operator> {
    Ok(match name {
        "maximal" => &Maximal,
        "identity" => &Identity,
        "fourier" => &FourierModulus,
        _ => bail!("unknown operator `{name}` (known: maximal, identity, fourier)"),
    })
}

fn inequality_outcome(r: Result<InequalityReport, ExperimentError>) -> Result<Outcome> {
    match r {
        Ok(rep) => {
            let mut csv = String::from("index,lhs,rhs,pass\n");
            for m in &rep.members {
                let _ = writeln!(csv, "{},{},{},{}", m.index, m.lhs, m.rhs, m.pass);
            }
            let exit = if rep.all_pass() { 0 } else { 2 };
            let mut v = serde_json::to_value(&rep)?;
            if let Err(e) = rep.ensure_validated() {
                v["error"] = json!(e.to_string());
            }
            Ok(Outcome::new(v, exit).with_csv(csv))
        }
        Err(e @ ExperimentError::Refused(_)) => Ok(Outcome::new(json!({ "refused": e.to_string() }), 1)),
        Err(e) => Err(e.into()),
    }
}

pub fn constants_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let region = cfg.region()?;
    let base = region.base();
    let p = cfg.exponent("p", base)?;
    let q = cfg.exponent_q(base)?;
    let op = operator(&cfg.constants.operator)?;
    let opts = cfg.constants.options();
    match cfg.constants.mode.as_str() {
        "inequality" => {}
        "unit_ball" => {
            let dom = match &region {
                Region::Bounded(d) => d.clone(),
                Region::Unbounded(s) => s.last(),
            };
            let mut fam = StepFamily::new(opts.seed, opts.calibration);
            fam.divisions = opts.divisions;
            let rep = modular_log_check(&p, &dom, &fam.generate(&dom)?, cfg.norm.rtol)?;
            let mut csv = String::from("index,lhs,rhs\n");
            for m in &rep.members {
                let _ = writeln!(csv, "{},{},{}", m.index, m.lhs, m.rhs);
            }
            let exit = if rep.c_hat.is_finite() { 0 } else { 2 };
            return Ok(Outcome::new(serde_json::to_value(&rep)?, exit).with_csv(csv));
        }
        other => bail!("unknown constants.mode `{other}` (known: inequality, unit_ball)"),
    }
    inequality_outcome(match &region {
        Region::Bounded(d) => estimate_constants(&p, &q, d, op, &opts),
        Region::Unbounded(s) => estimate_constants_unbounded(&p, &q, s, op, &opts, &cfg.check.epsilons),
    })
}

pub fn fourier_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let Region::Unbounded(s) = cfg.region()? else {
        bail!("fourier needs a [schedule]");
    };
    let p = cfg.exponent("p", s.base())?;
    let q = cfg.exponent_q(s.base())?;
    inequality_outcome(fourier_check(&p, &q, &s, &cfg.constants.options(), &cfg.check.epsilons))
}

pub fn reproduce_cmd(
    id: &str,
    write_golden: Option<&std::path::Path>,
    golden: Option<&std::path::Path>,
) -> Result<Outcome> {
    let rep = reproduce_example(id)?;
    let csv = rep.golden_csv();
    if let Some(path) = write_golden {
        std::fs::write(path, &csv)?;
    }
    let reference = match golden {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => golden_reference(id).map(str::to_string),
    };
    let golden_status = match reference {
        None => json!("absent"),
        Some(text) => match rep.compare_golden(&text) {
            Ok(()) => json!("match"),
            Err(e) => json!({ "mismatch": e }),
        },
    };
    let exit = rep.exit_code();
    Ok(Outcome::new(json!({ "example": rep, "golden": golden_status }), exit).with_csv(csv))
}

pub fn bench_cmd(sizes_1d: &[usize], sizes_2d: &[usize], reps: usize, seed: u64) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut csv = String::from("dim,n,fast_ms,oracle_ms,speedup,identical\n");
    let cases = sizes_1d.iter().map(|&n| (1, n)).chain(sizes_2d.iter().map(|&n| (2, n)));
    for (dim, n) in cases {
        let dom = if dim == 1 {
            GridDomain::interval(0.0, n as f64, 1.0)?
        } else {
            GridDomain::square_box([0.0, 0.0], [n as f64, n as f64], 1.0)?
        };
        let fam = StepFamily::new(seed, reps.max(1)).generate(&dom)?;
        let (mut t_fast, mut t_oracle, mut identical) = (0.0, 0.0, true);
        for f in &fam {
            let t = Instant::now();
            let a = maximal_fast(f);
            t_fast += t.elapsed().as_secs_f64() * 1e3;
            let t = Instant::now();
            let b = maximal_oracle(f);
            t_oracle += t.elapsed().as_secs_f64() * 1e3;
            identical &= a == b;
        }
        let reps = fam.len() as f64;
        let (fast_ms, oracle_ms) = (t_fast / reps, t_oracle / reps);
        let _ = writeln!(
            csv,
            "{dim},{n},{fast_ms:.3},{oracle_ms:.3},{:.1},{identical}",
            oracle_ms / fast_ms
        );
        rows.push(json!({
            "dim": dim, "n": n, "fast_ms": fast_ms, "oracle_ms": oracle_ms,
            "speedup": oracle_ms / fast_ms, "identical": identical,
        }));
    }
    let all_identical = rows.iter().all(|r| r["identical"] == json!(true));
    Ok(Outcome::new(json!(rows), if all_identical { 0 } else { 1 }).with_csv(csv))
}
