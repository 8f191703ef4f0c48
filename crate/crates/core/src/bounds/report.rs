use super::{
    expectation_bound_t1, population_risk_bound_t3, representation_bound_t4, representation_tail_t7, tail_bound_t1,
    DEFAULT_DELTA,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Shared inputs of every bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub n: u64,
    pub num_classes: u64,
    /// KL or mutual-information term, nats.
    pub kl_term: f64,
    /// Distortion slack of the lossy forms.
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: Option<f64>,
}

impl BoundInputs {
    pub fn new(n: u64, num_classes: u64, kl_term: f64) -> Self {
        Self { n, num_classes, kl_term, epsilon: 0.0, delta: DEFAULT_DELTA, lambda: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !self.kl_term.is_finite() || self.kl_term < 0.0 {
            return Err(Error::Domain(format!("kl term {} must be finite and non-negative", self.kl_term)));
        }
        Ok(())
    }
}

/// Provenance stored with a report. No wall-clock fields, so reruns are
/// byte-identical.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub config_hash: Option<String>,
    pub source: Option<String>,
}

/// Every bound for one experiment next to the measured gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub empirical_risk: f64,
    pub t1_expectation: f64,
    pub t1_tail: f64,
    pub t3_population_risk: f64,
    pub t3_linear_form: Option<f64>,
    pub t4_expectation: f64,
    pub t5_tail: f64,
    pub t6_population_risk: f64,
    pub t7_tail: f64,
    pub empirical_gap: f64,
    /// Names of bound fields whose value is at least 1.
    pub vacuous: Vec<String>,
    pub warnings: Vec<String>,
    pub metadata: ReportMetadata,
}

pub const CSV_HEADER: &str = "n,num_classes,kl_term,epsilon,delta,empirical_risk,t1_expectation,t1_tail,\
t3_population_risk,t4_expectation,t5_tail,t6_population_risk,t7_tail,empirical_gap,vacuous,seed";

impl BoundReport {
    /// Evaluates all bounds. The population-risk bounds use
    /// `empirical_risk`; the gap is carried through for comparison.
    pub fn compute(
        inputs: BoundInputs,
        empirical_risk: f64,
        empirical_gap: f64,
        metadata: ReportMetadata,
    ) -> Result<Self> {
        inputs.validate()?;
        let BoundInputs { n, num_classes, kl_term, epsilon, delta, lambda } = inputs.clone();
        let tails = tail_bound_t1(kl_term, n, delta, epsilon)?;
        let t3 = population_risk_bound_t3(kl_term, n, empirical_risk, None)?;
        let t6 = population_risk_bound_t3(kl_term, n, empirical_risk, Some(delta))?;
        let mut warnings = Vec::new();
        if t3.below_precondition {
            warnings.push(format!("n = {n} is below 10; the h_D risk bounds are outside their stated range"));
        }
        let mut report = Self {
            inputs,
            empirical_risk,
            t1_expectation: expectation_bound_t1(kl_term, n, epsilon)?,
            t1_tail: tails.joint,
            t3_population_risk: t3.value,
            t3_linear_form: t3.linear_form,
            t4_expectation: representation_bound_t4(kl_term, n, num_classes, epsilon)?,
            t5_tail: tails.over_samples,
            t6_population_risk: t6.value,
            t7_tail: representation_tail_t7(kl_term, n, num_classes, delta, lambda)?,
            empirical_gap,
            vacuous: Vec::new(),
            warnings,
            metadata,
        };
        report.vacuous = report.rows().into_iter().filter(|(_, v)| *v >= 1.0).map(|(k, _)| k.to_string()).collect();
        Ok(report)
    }

    /// `(name, value)` for every bound, in report order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("t1_expectation", self.t1_expectation),
            ("t1_tail", self.t1_tail),
            ("t3_population_risk", self.t3_population_risk),
            ("t4_expectation", self.t4_expectation),
            ("t5_tail", self.t5_tail),
            ("t6_population_risk", self.t6_population_risk),
            ("t7_tail", self.t7_tail),
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One data row matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let i = &self.inputs;
        let mut s = format!(
            "{},{},{:.10},{:.10},{:.10},{:.10}",
            i.n, i.num_classes, i.kl_term, i.epsilon, i.delta, self.empirical_risk
        );
        for (_, v) in self.rows() {
            let _ = write!(s, ",{v:.10}");
        }
        let _ = write!(s, ",{:.10},{},{}", self.empirical_gap, self.vacuous.join(";"), self.metadata.seed);
        s
    }

    /// Plain-text table with a VACUOUS column.
    pub fn table(&self) -> String {
        let mut s = format!("{:<20} {:>14}  {}\n", "bound", "value", "VACUOUS");
        for (name, v) in self.rows() {
            let _ = writeln!(s, "{name:<20} {v:>14.6}  {}", if v >= 1.0 { "yes" } else { "no" });
        }
        let _ = writeln!(s, "{:<20} {:>14.6}", "empirical_gap", self.empirical_gap);
        let _ = writeln!(s, "{:<20} {:>14.6}", "latent/label KL", self.inputs.kl_term);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kl_free_floor_of_t4() {
        let r = BoundReport::compute(BoundInputs::new(1000, 2, 0.0), 0.1, 0.0, ReportMetadata::default()).unwrap();
        assert_abs_diff_eq!(r.t4_expectation, 2.0 * (4.0f64 / 1000.0).sqrt(), epsilon = 1e-15);
        assert!(r.vacuous.is_empty());
    }

    #[test]
    fn delta_only_moves_tail_columns() {
        let base = BoundReport::compute(BoundInputs::new(500, 3, 4.0), 0.1, 0.02, ReportMetadata::default()).unwrap();
        let other = BoundReport::compute(
            BoundInputs { delta: 0.001, ..BoundInputs::new(500, 3, 4.0) },
            0.1,
            0.02,
            ReportMetadata::default(),
        )
        .unwrap();
        assert_eq!(base.t1_expectation, other.t1_expectation);
        assert_eq!(base.t3_population_risk, other.t3_population_risk);
        assert_eq!(base.t4_expectation, other.t4_expectation);
        for (a, b) in [
            (base.t1_tail, other.t1_tail),
            (base.t5_tail, other.t5_tail),
            (base.t6_population_risk, other.t6_population_risk),
            (base.t7_tail, other.t7_tail),
        ] {
            assert!(b > a);
        }
    }

    #[test]
    fn vacuous_values_are_kept_and_flagged() {
        let r = BoundReport::compute(BoundInputs::new(20, 10, 500.0), 0.3, 0.1, ReportMetadata::default()).unwrap();
        assert!(r.t4_expectation > 1.0);
        assert!(r.vacuous.contains(&"t4_expectation".to_string()));
        assert!(r.table().contains("yes"));
    }

    #[test]
    fn serialization_shapes() {
        let r = BoundReport::compute(
            BoundInputs::new(50, 2, 1.0),
            0.0,
            0.05,
            ReportMetadata { seed: 7, ..Default::default() },
        )
        .unwrap();
        let back: BoundReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
        assert!(r.csv_row().ends_with(",7"));
    }
}
