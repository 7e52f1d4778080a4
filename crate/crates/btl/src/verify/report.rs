//! Machine-readable comparison reports.

use serde::{Deserialize, Serialize};

/// One probed point of a predicted-vs-observed comparison.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProbePoint {
    /// Human-readable coordinate, e.g. "lambda=0.5" or "m=512,s=(0.3,0.6)".
    pub label: String,
    pub predicted: f64,
    pub observed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

/// Reproducibility record: everything needed to regenerate the report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunk_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Slowly-growing window sequence value used for "well below scale"
    /// probes (the harness uses log n).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_n: Option<f64>,
    /// Slowly-vanishing offset used for "just after scale" probes (1/log n).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overflowed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhausted: Option<bool>,
}

/// A predicted-vs-observed comparison with an explicit tolerance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComparisonReport {
    pub experiment: String,
    pub model_label: String,
    pub horizons: Vec<u64>,
    pub quantity: String,
    /// Statistic name: "abs-error" | "rel-error" | "ks" | "chi-square" |
    /// "ci-ratio" (|obs - pred| / CI half-width).
    pub distance_kind: String,
    pub distance: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
    pub points: Vec<ProbePoint>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl ComparisonReport {
    /// Build a report; `pass` is always `distance <= tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        experiment: impl Into<String>,
        model_label: impl Into<String>,
        horizons: Vec<u64>,
        quantity: impl Into<String>,
        distance_kind: impl Into<String>,
        distance: f64,
        tolerance: f64,
        points: Vec<ProbePoint>,
        provenance: Provenance,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            model_label: model_label.into(),
            horizons,
            quantity: quantity.into(),
            distance_kind: distance_kind.into(),
            distance,
            tolerance,
            pass: distance <= tolerance,
            mc_stderr: None,
            points,
            provenance,
            notes: Vec::new(),
        }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.mc_stderr = Some(stderr);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// One line per point, long format, for plotting.
    pub fn csv_rows(&self) -> Vec<String> {
        self.points
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&self.experiment),
                    csv_field(&self.model_label),
                    self.horizons
                        .iter()
                        .map(|h| h.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                    csv_field(&p.label),
                    p.predicted,
                    p.observed,
                    p.stderr.map_or(String::new(), |s| s.to_string()),
                    self.distance_kind,
                    self.distance,
                    self.pass
                )
            })
            .collect()
    }

    pub fn csv_header() -> &'static str {
        "experiment,model,horizons,point,predicted,observed,stderr,distance_kind,distance,pass"
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
