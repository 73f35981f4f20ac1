//! TOML run configuration. Every section is optional; unknown keys are
//! rejected so typos surface as errors with a line and column.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize, Serializer};

use varlp::experiments::{ConstantsOptions, FalsifyOptions};
use varlp::grid::{ExponentField, GridDomain, GridFunction, Schedule};
use varlp::{parse, Expr};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub exponents: Exprs,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub omega: OmegaSpec,
    #[serde(default)]
    pub falsify: FalsifySpec,
    #[serde(default)]
    pub constants: ConstantsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn bounds<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element(&x.to_string())?;
        }
    }
    seq.end()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(serialize_with = "bounds")]
    pub lo: Vec<f64>,
    #[serde(serialize_with = "bounds")]
    pub hi: Vec<f64>,
    pub h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exprs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormSpec {
    pub rtol: f64,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self {
            rtol: varlp::modular::DEFAULT_RTOL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    /// Empty selects the conditions that fit the domain kind.
    pub conditions: Vec<String>,
    pub epsilons: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            conditions: Vec::new(),
            epsilons: vec![0.5, 0.1, 0.01, 0.001],
            lambdas: varlp::conditions::EMBEDDING_LAMBDAS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OmegaSpec {
    pub lambda: f64,
    pub kappa_offsets: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl Default for OmegaSpec {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            kappa_offsets: varlp::conditions::KAPPA_OFFSETS.to_vec(),
            kappa: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FalsifySpec {
    pub budget: u32,
    pub threshold: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for FalsifySpec {
    fn default() -> Self {
        let d = FalsifyOptions::default();
        Self {
            budget: d.budget,
            threshold: d.threshold,
            c1: d.c1,
            c2: d.c2,
        }
    }
}

impl FalsifySpec {
    pub fn options(&self) -> FalsifyOptions {
        FalsifyOptions {
            budget: self.budget,
            threshold: self.threshold,
            c1: self.c1,
            c2: self.c2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSpec {
    pub seed: u64,
    pub calibration: usize,
    pub holdout: usize,
    pub safety: f64,
    pub lambda: f64,
    /// `maximal`, `identity` or `fourier`.
    pub operator: String,
    /// `inequality` estimates c1, c2; `unit_ball` reports C* for
    /// rho(Mf) <= C (rho(f) + tail) over the family scaled into the unit ball.
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divisions: Option<usize>,
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        let d = ConstantsOptions::default();
        Self {
            seed: d.seed,
            calibration: d.calibration,
            holdout: d.holdout,
            safety: d.safety,
            lambda: d.lambda,
            operator: "maximal".into(),
            mode: "inequality".into(),
            divisions: None,
        }
    }
}

impl ConstantsSpec {
    pub fn options(&self) -> ConstantsOptions {
        ConstantsOptions {
            seed: self.seed,
            calibration: self.calibration,
            holdout: self.holdout,
            safety: self.safety,
            lambda: self.lambda,
            divisions: self.divisions,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File that receives the command's table as CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

pub fn parse_expr(name: &str, src: &str) -> Result<Expr> {
    parse(src).map_err(|e| anyhow!("expression `{name}` at offset {}: {e}", e.offset))
}

/// Where the exponents and functions live.
pub enum Region {
    Bounded(GridDomain),
    Unbounded(Schedule),
}

impl Region {
    pub fn base(&self) -> &GridDomain {
        match self {
            Region::Bounded(d) => d,
            Region::Unbounded(s) => s.base(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, src) in [
            ("p", &self.exponents.p),
            ("q", &self.exponents.q),
            ("f", &self.exponents.f),
        ] {
            if let Some(src) = src {
                parse_expr(name, src)?;
            }
        }
        if !(self.norm.rtol > 0.0 && self.norm.rtol <= 1e-2) {
            bail!("norm.rtol must lie in (0, 1e-2], got {}", self.norm.rtol);
        }
        if self.check.epsilons.iter().any(|e| e.is_nan() || *e <= 0.0) {
            bail!("check.epsilons must be positive");
        }
        if self.falsify.threshold <= 0.0 || self.falsify.c1 < 0.0 || self.falsify.c2 < 0.0 {
            bail!("falsify.threshold must be positive and c1, c2 non-negative");
        }
        if self.constants.safety <= 0.0 || self.constants.calibration == 0 || self.constants.holdout == 0 {
            bail!("constants.safety, calibration and holdout must be positive");
        }
        if self.domain.is_some() && self.schedule.is_some() {
            bail!("give either [domain] or [schedule], not both");
        }
        Ok(())
    }

    pub fn region(&self) -> Result<Region> {
        match (&self.domain, &self.schedule) {
            (Some(d), None) => Ok(Region::Bounded(GridDomain::from_bounds(&d.lo, &d.hi, d.h)?)),
            (None, Some(s)) => {
                let radii = match (&s.radii, s.r0, s.steps) {
                    (Some(r), _, _) => r.clone(),
                    (None, Some(r0), Some(steps)) => Schedule::geometric_radii(r0, steps),
                    _ => bail!("[schedule] needs `radii` or both `r0` and `steps`"),
                };
                Ok(Region::Unbounded(Schedule::for_box(&s.lo, &s.hi, s.h, radii)?))
            }
            (None, None) => bail!("config needs a [domain] or a [schedule] section"),
            (Some(_), Some(_)) => bail!("give either [domain] or [schedule], not both"),
        }
    }

    fn expr(&self, name: &str) -> Result<Expr> {
        let src = match name {
            "p" => &self.exponents.p,
            "q" => &self.exponents.q,
            _ => &self.exponents.f,
        };
        let src = src.as_ref().ok_or_else(|| anyhow!("[exponents] needs `{name}`"))?;
        parse_expr(name, src)
    }

    pub fn exponent(&self, name: &str, dom: &GridDomain) -> Result<ExponentField> {
        ExponentField::sample(&self.expr(name)?, dom).with_context(|| format!("sampling `{name}`"))
    }

    /// `q`, falling back to `p` when absent.
    pub fn exponent_q(&self, dom: &GridDomain) -> Result<ExponentField> {
        if self.exponents.q.is_some() {
            self.exponent("q", dom)
        } else {
            self.exponent("p", dom)
        }
    }

    pub fn function(&self, dom: &GridDomain) -> Result<GridFunction> {
        GridFunction::sample(&self.expr("f")?, dom).context("sampling `f`")
    }
}
