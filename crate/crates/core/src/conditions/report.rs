use serde::Serialize;

/// Fixed thresholds of the decision rules.
pub const DELTA_STAB: f64 = 1e-9;
pub const DELTA_GROW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// 0 holds, 1 fails, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Fails => 1,
            Verdict::Inconclusive => 2,
        }
    }

    /// Conjunction: any failure fails, otherwise any doubt is doubt.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Inconclusive,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One measured quantity, optionally tied to a truncation radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub eps_tie: f64,
    pub delta_stab: f64,
    pub delta_grow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            eps_tie: crate::EPS_TIE,
            delta_stab: DELTA_STAB,
            delta_grow: DELTA_GROW,
            lambda: None,
            kappa: None,
            epsilons: Vec::new(),
            radii: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub verdict: Verdict,
    /// Ordered by non-decreasing radius.
    pub evidence: Vec<Evidence>,
    pub parameters: Parameters,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(condition: &str, verdict: Verdict) -> Self {
        Self {
            condition: condition.to_string(),
            verdict,
            evidence: Vec::new(),
            parameters: Parameters::default(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, radius: Option<f64>, quantity: impl Into<String>, value: f64) {
        self.evidence.push(Evidence {
            radius,
            quantity: quantity.into(),
            value,
        });
    }

    /// Last recorded value of `quantity`.
    pub fn last(&self, quantity: &str) -> Option<f64> {
        self.evidence
            .iter()
            .rev()
            .find(|e| e.quantity == quantity)
            .map(|e| e.value)
    }

    /// All values of `quantity` in recording order.
    pub fn series(&self, quantity: &str) -> Vec<f64> {
        self.evidence
            .iter()
            .filter(|e| e.quantity == quantity)
            .map(|e| e.value)
            .collect()
    }
}

/// Consecutive differences of the last `points` entries.
pub fn tail_increments(series: &[f64], points: usize) -> Vec<f64> {
    let start = series.len().saturating_sub(points);
    series[start..].windows(2).map(|w| w[1] - w[0]).collect()
}

/// Every increment over the last three truncations is below `DELTA_STAB`.
pub fn stabilizes(series: &[f64]) -> bool {
    tail_increments(series, 3).iter().all(|d| d.abs() < DELTA_STAB)
}

/// Increments over the last three truncations exceed `DELTA_GROW` and do
/// not decrease.
pub fn grows(series: &[f64]) -> bool {
    let inc = tail_increments(series, 3);
    !inc.is_empty() && inc.iter().all(|&d| d > DELTA_GROW) && inc.windows(2).all(|w| w[1] >= w[0])
}
