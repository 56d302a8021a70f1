use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyRecord {
    pub probe: u64,
    pub kind: super::MessageKind,
    /// Microseconds on the shared clock.
    pub published_us: u64,
    pub dispatched_us: u64,
}

impl LatencyRecord {
    pub fn latency_ms(&self) -> f64 {
        self.dispatched_us.saturating_sub(self.published_us) as f64 / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn summarize(samples: &[f64]) -> Option<Summary> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(Summary {
        count: sorted.len(),
        mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
        p50_ms: percentile(&sorted, 50.0),
        p95_ms: percentile(&sorted, 95.0),
        max_ms: sorted[sorted.len() - 1],
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyMetrics {
    pub records: Vec<LatencyRecord>,
}

impl LatencyMetrics {
    pub fn record(&mut self, r: LatencyRecord) {
        self.records.push(r);
    }

    /// Per-kind summaries; kinds without samples are absent.
    pub fn report(&self) -> BTreeMap<String, Summary> {
        let mut by_kind: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &self.records {
            by_kind
                .entry(r.kind.as_str().to_string())
                .or_default()
                .push(r.latency_ms());
        }
        by_kind
            .into_iter()
            .filter_map(|(k, v)| summarize(&v).map(|s| (k, s)))
            .collect()
    }
}
