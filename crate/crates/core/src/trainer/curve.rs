use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Training episodes completed when the evaluation ran.
    pub episode: usize,
    pub success_rate: f64,
}

/// Evaluation success rates over training for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub seed: u64,
    pub config_id: String,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    /// First evaluated episode count with success at or above `threshold`.
    pub fn first_crossing(&self, threshold: f64) -> Option<usize> {
        self.points
            .iter()
            .find(|p| p.success_rate >= threshold)
            .map(|p| p.episode)
    }
}

/// Median and 20th/80th percentiles of episodes-to-threshold across seeds.
/// Seeds that never reach the threshold count as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub median: f64,
    pub p20: f64,
    pub p80: f64,
}

/// Linear-interpolation percentile of sorted values; an infinite neighbour
/// with nonzero weight makes the result infinite.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if frac == 0.0 {
        return sorted[lo];
    }
    if sorted[hi].is_infinite() {
        return f64::INFINITY;
    }
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn episodes_to_threshold(curves: &[LearningCurve], threshold: f64) -> ThresholdSummary {
    assert!(!curves.is_empty(), "need at least one curve");
    let mut v: Vec<f64> = curves
        .iter()
        .map(|c| c.first_crossing(threshold).map_or(f64::INFINITY, |e| e as f64))
        .collect();
    v.sort_by(f64::total_cmp);
    ThresholdSummary {
        median: percentile(&v, 0.5),
        p20: percentile(&v, 0.2),
        p80: percentile(&v, 0.8),
    }
}

/// Formats an episode count, rendering the never-reached sentinel as text.
pub fn format_episodes(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "not reached".to_string()
    }
}
