//! Online z-score detection of a jump in the coreset curvature history.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopSignal {
    /// First differences of successive history values.
    #[default]
    Differences,
    /// The history values themselves.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingConfig {
    pub window: usize,
    pub z_thresh: f64,
    pub signal: StopSignal,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            window: 20,
            z_thresh: 3.0,
            signal: StopSignal::Differences,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::param("stopping window must hold at least 2 samples"));
        }
        if !(self.z_thresh > 0.0 && self.z_thresh.is_finite()) {
            return Err(Error::param("z threshold must be positive and finite"));
        }
        Ok(())
    }
}

// Windows whose spread is below this fraction of their largest magnitude are
// treated as constant; this absorbs rounding noise in differenced histories.
const DEGENERATE_SPREAD: f64 = 1e-9;

/// Streaming detector: feed history values one at a time.
#[derive(Debug, Clone)]
pub struct ZScoreDetector {
    cfg: StoppingConfig,
    window: VecDeque<f64>,
    last: Option<f64>,
}

impl ZScoreDetector {
    pub fn new(cfg: &StoppingConfig) -> Self {
        ZScoreDetector {
            cfg: cfg.clone(),
            window: VecDeque::with_capacity(cfg.window + 1),
            last: None,
        }
    }

    /// Adds a history value; returns true if its signal sample is anomalous.
    pub fn push(&mut self, value: f64) -> bool {
        let sample = match self.cfg.signal {
            StopSignal::Raw => value,
            StopSignal::Differences => match self.last.replace(value) {
                Some(prev) => value - prev,
                None => return false,
            },
        };
        self.window.push_back(sample);
        if self.window.len() > self.cfg.window {
            self.window.pop_front();
        }
        if self.window.len() < self.cfg.window {
            return false;
        }
        let len = self.window.len() as f64;
        let mean = self.window.iter().sum::<f64>() / len;
        let var = self.window.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / len;
        let std = var.sqrt();
        let scale = self.window.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if std == 0.0 || std <= DEGENERATE_SPREAD * scale {
            return false;
        }
        (sample - mean).abs() / std > self.cfg.z_thresh
    }
}

/// Index into `history` of the first value whose signal triggers the detector.
pub fn first_trigger(history: &[f64], cfg: &StoppingConfig) -> Option<usize> {
    let mut det = ZScoreDetector::new(cfg);
    history.iter().position(|&v| det.push(v))
}

/// Whether the detector fires anywhere in `history`.
pub fn zscore_stop(history: &[f64], cfg: &StoppingConfig) -> bool {
    first_trigger(history, cfg).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_history_never_fires() {
        let cfg = StoppingConfig::default();
        assert!(!zscore_stop(&[-1.25; 200], &cfg));
        let raw = StoppingConfig {
            signal: StopSignal::Raw,
            ..cfg
        };
        assert!(!zscore_stop(&[0.5; 200], &raw));
    }

    #[test]
    fn linear_ramp_then_jump() {
        let cfg = StoppingConfig::default();
        let mut h: Vec<f64> = Vec::new();
        let mut v = -1.9;
        for _ in 0..25 {
            h.push(v);
            v += 0.01;
        }
        assert!(!zscore_stop(&h, &cfg));
        let last = *h.last().unwrap();
        h.push(last + 1.0);
        assert_eq!(first_trigger(&h, &cfg), Some(25));
    }

    #[test]
    fn short_histories_never_fire() {
        let cfg = StoppingConfig::default();
        let mut h: Vec<f64> = (0..20).map(|i| (i * i) as f64).collect();
        h.push(1e9);
        assert_eq!(h.len(), cfg.window + 1);
        // 21 values give exactly 20 differences: the window just fills
        assert!(zscore_stop(&h, &cfg));
        assert!(!zscore_stop(&h[..20], &cfg));
    }

    #[test]
    fn validation() {
        let bad = StoppingConfig {
            window: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
