use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::{compute_metrics, Metric, MetricGroup, TaskMetrics};
use super::pairing::{pair_observations, PairingOptions};
use super::session::TaskSession;
use super::wilcoxon::{wilcoxon_signed_rank_with, ZeroMethod};

pub const DEFAULT_REPEATS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no sessions")]
    NoSessions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub n_repeats: usize,
    pub base_seed: u64,
    pub zero_method: ZeroMethod,
    pub pairing: PairingOptions,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { n_repeats: DEFAULT_REPEATS, base_seed: 0, zero_method: ZeroMethod::Wilcox, pairing: PairingOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionStat {
    pub seed: u64,
    pub n_pairs: usize,
    pub mean_difference: f64,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub group: MetricGroup,
    pub label: String,
    /// Mean over repetitions of the mean paired difference (On - Off).
    pub mean_difference: Option<f64>,
    pub mean_p: Option<f64>,
    pub stars: String,
    pub repetitions: Vec<RepetitionStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n_sessions: usize,
    pub n_repeats: usize,
    pub base_seed: u64,
    pub skipped_topics: Vec<String>,
    pub metrics: Vec<MetricSummary>,
}

/// `***` below 0.01, `**` below 0.05, `*` below 0.10.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Repeats random pairing `n_repeats` times (seeds `base_seed`,
/// `base_seed + 1`, ...) and runs a signed-rank test per metric on the
/// On − Off differences. A pair missing a metric on either side is left out
/// for that metric only.
pub fn analyze(sessions: &[TaskSession], config: &AnalysisConfig) -> Result<AnalysisReport, AnalysisError> {
    if sessions.is_empty() {
        return Err(AnalysisError::NoSessions);
    }
    let metrics: Vec<TaskMetrics> = sessions.iter().map(compute_metrics).collect();
    let mut per_metric: Vec<Vec<RepetitionStat>> = vec![Vec::new(); Metric::ALL.len()];
    let mut skipped_topics = Vec::new();

    for rep in 0..config.n_repeats {
        let seed = config.base_seed.wrapping_add(rep as u64);
        let pairing = pair_observations(sessions, seed, config.pairing);
        if rep == 0 {
            skipped_topics = pairing.skipped_topics.clone();
        }
        for (mi, metric) in Metric::ALL.iter().enumerate() {
            let diffs: Vec<f64> = pairing
                .pairs
                .iter()
                .filter_map(|&(off, on)| Some(metrics[on].get(*metric)? - metrics[off].get(*metric)?))
                .collect();
            let Ok(test) = wilcoxon_signed_rank_with(&diffs, config.zero_method) else {
                continue;
            };
            per_metric[mi].push(RepetitionStat {
                seed,
                n_pairs: diffs.len(),
                mean_difference: mean(diffs.iter().copied()).expect("non-empty"),
                statistic: test.statistic,
                p_value: test.p_value,
            });
        }
    }

    let summaries = Metric::ALL
        .iter()
        .zip(per_metric)
        .map(|(metric, repetitions)| {
            let mean_difference = mean(repetitions.iter().map(|r| r.mean_difference));
            let mean_p = mean(repetitions.iter().map(|r| r.p_value));
            MetricSummary {
                metric: *metric,
                group: metric.group(),
                label: metric.label().to_string(),
                mean_difference,
                mean_p,
                stars: mean_p.map(significance_stars).unwrap_or("").to_string(),
                repetitions,
            }
        })
        .collect();

    Ok(AnalysisReport {
        n_sessions: sessions.len(),
        n_repeats: config.n_repeats,
        base_seed: config.base_seed,
        skipped_topics,
        metrics: summaries,
    })
}

impl AnalysisReport {
    pub fn metric(&self, metric: Metric) -> &MetricSummary {
        self.metrics.iter().find(|m| m.metric == metric).expect("every metric is reported")
    }

    /// Aligned-column table: group, metric, mean pairwise difference, mean
    /// p-value and significance stars.
    pub fn to_table(&self) -> String {
        let header = ["Group", "Metric", "Mean pairwise difference (On - Off)", "Mean Wilcoxon p", "Sig."];
        let mut rows: Vec<[String; 5]> = Vec::new();
        let mut last_group = None;
        for m in &self.metrics {
            let group = if last_group == Some(m.group) { String::new() } else { m.group.label().to_string() };
            last_group = Some(m.group);
            rows.push([
                group,
                m.label.clone(),
                m.mean_difference.map_or("n/a".into(), |d| format!("{d:.3}")),
                m.mean_p.map_or("n/a".into(), |p| format!("{p:.4}")),
                m.stars.clone(),
            ]);
        }
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: [&str; 5]| {
            format!(
                "{:<w0$}  {:<w1$}  {:>w2$}  {:>w3$}  {:<w4$}",
                cells[0], cells[1], cells[2], cells[3], cells[4],
                w0 = widths[0], w1 = widths[1], w2 = widths[2], w3 = widths[3], w4 = widths[4]
            )
            .trim_end()
            .to_string()
        };
        let mut out = String::new();
        out.push_str(&line(header));
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 8));
        out.push('\n');
        for row in &rows {
            out.push_str(&line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
            out.push('\n');
        }
        out.push_str(&format!(
            "\n{} sessions, {} pairing repetitions from seed {}. *** p<0.01, ** p<0.05, * p<0.10\n",
            self.n_sessions, self.n_repeats, self.base_seed
        ));
        out
    }
}
