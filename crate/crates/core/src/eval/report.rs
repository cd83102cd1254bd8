use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{correlations, full_report, CorrelationReport, EvalError, MethodResult, SubsampleStats};
use crate::reduce::MethodSpec;

/// Aggregate row for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<MethodSpec>,
    pub n_instances: usize,
    pub coverage: f64,
    pub mean_rr: f64,
    pub mean_wall_time: f64,
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_score: Option<f64>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<'a> {
    Method {
        #[serde(flatten)]
        summary: &'a MethodSummary,
        per_instance: &'a [super::InstanceResult],
    },
    Correlation(&'a CorrelationReport),
    Subsample(&'a SubsampleStats),
    Warning {
        message: &'a str,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<MethodResult>,
    pub summaries: Vec<MethodSummary>,
    pub correlation: Option<CorrelationReport>,
    pub subsample: Option<SubsampleStats>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    /// Summarizes `methods`; with external scores, correlates coverage with
    /// them and controls for mean reduction ratio.
    pub fn build(methods: Vec<MethodResult>, scores: Option<&BTreeMap<String, f64>>) -> Self {
        let summaries: Vec<MethodSummary> = methods
            .iter()
            .map(|m| MethodSummary {
                method_id: m.method_id.clone(),
                config: m.config.clone(),
                n_instances: m.per_instance.len(),
                coverage: m.coverage(),
                mean_rr: m.mean_rr(),
                mean_wall_time: m.mean_wall_time(),
                failures: m.failures(),
                external_score: scores.and_then(|s| s.get(&m.method_id).copied()),
            })
            .collect();
        let mut warnings = Vec::new();
        let correlation = scores.and_then(|_| {
            let scored: Vec<&MethodSummary> = summaries.iter().filter(|s| s.external_score.is_some()).collect();
            let x: Vec<f64> = scored.iter().map(|s| s.coverage).collect();
            let y: Vec<f64> = scored.iter().filter_map(|s| s.external_score).collect();
            let c: Vec<f64> = scored.iter().map(|s| s.mean_rr).collect();
            if scored.len() < 3 {
                warnings.push(format!(
                    "correlation section omitted: {}",
                    EvalError::InsufficientData(format!(
                        "{} methods with external scores, need at least 3",
                        scored.len()
                    ))
                ));
                return None;
            }
            match full_report(&x, &y, &c) {
                Ok(r) => Some(r),
                Err(partial_err) => match correlations(&x, &y) {
                    Ok(r) => {
                        warnings.push(format!("partial correlations omitted: {partial_err}"));
                        Some(r)
                    }
                    Err(e) => {
                        warnings.push(format!("correlation section omitted: {e}"));
                        None
                    }
                },
            }
        });
        EvalReport {
            methods,
            summaries,
            correlation,
            subsample: None,
            warnings,
        }
    }

    /// One object per method, then the correlation and subsampling blocks
    /// and warnings.
    pub fn to_jsonl(&self) -> String {
        let mut lines: Vec<Line<'_>> = self
            .summaries
            .iter()
            .zip(&self.methods)
            .map(|(s, m)| Line::Method {
                summary: s,
                per_instance: &m.per_instance,
            })
            .collect();
        lines.extend(self.correlation.as_ref().map(Line::Correlation));
        lines.extend(self.subsample.as_ref().map(Line::Subsample));
        lines.extend(self.warnings.iter().map(|w| Line::Warning { message: w }));
        crate::dataset::to_jsonl(&lines)
    }

    /// One row per method.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method_id",
            "k",
            "seed",
            "program",
            "n_instances",
            "coverage",
            "mean_rr",
            "mean_wall_time",
            "failures",
            "external_score",
        ])
        .expect("in-memory write");
        for s in &self.summaries {
            let cfg = s.config.as_ref();
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                s.method_id.clone(),
                opt(cfg.and_then(|c| c.k).map(|k| k.to_string())),
                opt(cfg.and_then(|c| c.seed).map(|k| k.to_string())),
                opt(cfg.and_then(|c| c.program.clone())),
                s.n_instances.to_string(),
                s.coverage.to_string(),
                s.mean_rr.to_string(),
                s.mean_wall_time.to_string(),
                s.failures.to_string(),
                opt(s.external_score.map(|v| v.to_string())),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}
