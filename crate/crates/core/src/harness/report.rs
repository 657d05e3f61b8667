use serde::{Deserialize, Serialize};

/// Configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub provider: String,
    pub step: u32,
    pub use_mask: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    pub template: bool,
    pub k: usize,
}

/// Wall-clock means per evaluated instance, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub mean_elapsed_seconds: f64,
    pub mean_acquire_seconds: f64,
    pub mean_scoring_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    /// `accuracy` or `recall@K`.
    pub metric: String,
    pub value: f64,
    /// Instances that contributed to `value`.
    pub instances: usize,
    pub failed: usize,
    pub config: ReportConfig,
    /// Absent when stripped for byte-reproducible output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl MetricsReport {
    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }
}

/// Aligned plain-text table, one row per report.
pub fn render_table(reports: &[MetricsReport]) -> String {
    let header = ["method", "metric", "value", "n", "failed", "step", "mask", "template", "k", "sec/inst"];
    let rows: Vec<[String; 10]> = reports
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                r.metric.clone(),
                format!("{:.4}", r.value),
                r.instances.to_string(),
                r.failed.to_string(),
                r.config.step.to_string(),
                r.config
                    .mask
                    .clone()
                    .unwrap_or_else(|| if r.config.use_mask { "yes" } else { "-" }.to_string()),
                r.config.template.to_string(),
                r.config.k.to_string(),
                r.timing
                    .as_ref()
                    .map_or_else(|| "-".into(), |t| format!("{:.6}", t.mean_elapsed_seconds)),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
