use std::io::Write;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::random::RNG_FAMILY;

use super::stats::Estimate;

/// Slack for comparing exact values against closed forms.
pub const COMPARE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Value(f64),
    Interval(f64, f64),
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Bound::Value(v) => s.serialize_f64(v),
            Bound::Interval(lo, hi) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&lo)?;
                seq.serialize_element(&hi)?;
                seq.end()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "in")]
    Within,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Within => "in",
        }
    }
}

/// Whether the 99% interval is consistent with `relation`: the upper edge
/// for `<=`, the lower edge for `>=`, any overlap for `in`.
pub fn ci_consistent(ci: [f64; 2], relation: Relation, bound: Bound) -> bool {
    match (relation, bound) {
        (Relation::AtMost, Bound::Value(b)) => ci[1] <= b + COMPARE_TOL,
        (Relation::AtLeast, Bound::Value(b)) => ci[0] >= b - COMPARE_TOL,
        (Relation::Within, Bound::Interval(lo, hi)) => ci[1] >= lo - COMPARE_TOL && ci[0] <= hi + COMPARE_TOL,
        (Relation::Within, Bound::Value(b)) => ci[1] >= b - COMPARE_TOL && ci[0] <= b + COMPARE_TOL,
        (_, Bound::Interval(..)) => false,
    }
}

/// One estimate checked against one bound. Serializes to a flat JSON object.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub estimate: f64,
    pub stderr: f64,
    pub ci99: [f64; 2],
    pub bound: Bound,
    pub relation: Relation,
    pub pass: bool,
    /// 0 for values computed exactly.
    pub trials: u64,
    pub seed: u64,
    pub wall_time_ms: u64,
    pub rng: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl BoundReport {
    /// `pass` is the CI check and-ed with `extra`, for experiments whose
    /// verdict also depends on structural facts recorded in `details`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        experiment: impl Into<String>,
        params: serde_json::Value,
        est: Estimate,
        relation: Relation,
        bound: Bound,
        extra: bool,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            params,
            estimate: est.mean,
            stderr: est.stderr,
            ci99: est.ci99,
            bound,
            relation,
            pass: extra && ci_consistent(est.ci99, relation, bound),
            trials,
            seed,
            wall_time_ms: 0,
            rng: RNG_FAMILY,
            details: None,
        }
    }

    pub fn with_details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).ok();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One JSON object per line.
pub fn write_json(reports: &[BoundReport], mut w: impl Write) -> Result<()> {
    for r in reports {
        writeln!(w, "{}", r.to_json())?;
    }
    Ok(())
}

pub fn write_csv(reports: &[BoundReport], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    out.write_record([
        "experiment",
        "params",
        "estimate",
        "stderr",
        "ci99_lo",
        "ci99_hi",
        "bound_lo",
        "bound_hi",
        "relation",
        "pass",
        "trials",
        "seed",
        "wall_time_ms",
        "rng",
    ])
    .map_err(csv_err)?;
    for r in reports {
        let (lo, hi) = match r.bound {
            Bound::Value(v) => (v, v),
            Bound::Interval(lo, hi) => (lo, hi),
        };
        out.write_record([
            r.experiment.clone(),
            r.params.to_string(),
            r.estimate.to_string(),
            r.stderr.to_string(),
            r.ci99[0].to_string(),
            r.ci99[1].to_string(),
            lo.to_string(),
            hi.to_string(),
            r.relation.symbol().to_string(),
            r.pass.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
            r.wall_time_ms.to_string(),
            r.rng.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn render(reports: &[BoundReport], format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Json => write_json(reports, &mut buf)?,
        Format::Csv => write_csv(reports, &mut buf)?,
    }
    Ok(buf)
}
