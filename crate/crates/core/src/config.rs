//! Experiment configuration (JSON) and its load-time checks.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::CodecParams;
use crate::error::{Error, Result};
use crate::group::GroupId;
use crate::measure::MetricParams;
use crate::source::SourceSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingConfig {
    pub eta: f64,
    pub k_min: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerConfig {
    pub delta_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub eps: f64,
}

fn default_entropy_depth() -> usize {
    2
}

fn default_pool() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupId,
    /// Side length of the box window.
    pub window: usize,
    pub seed: u64,
    pub source_x: SourceSpec,
    pub source_y: SourceSpec,
    pub codec: CodecParams,
    pub tiling: TilingConfig,
    pub markers: MarkerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    pub metric: MetricParams,
    /// Depth of the plug-in entropy estimates.
    #[serde(default = "default_entropy_depth")]
    pub entropy_depth: usize,
    /// Minimum number of X-blocks offered to each dictionary.
    #[serde(default = "default_pool")]
    pub pool: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn s(&self) -> u32 {
        self.source_x.alphabet()
    }

    /// Entropy rate of the l-truncated Y process.
    pub fn h_y(&self) -> f64 {
        self.truncated_y().entropy_rate()
    }

    pub fn truncated_y(&self) -> SourceSpec {
        let l = self.codec.l as usize;
        match &self.source_y {
            SourceSpec::Bernoulli { probs } if probs.len() > l => {
                let mut p = probs[..l].to_vec();
                p[l - 1] += probs[l..].iter().sum::<f64>();
                SourceSpec::Bernoulli { probs: p }
            }
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.group == GroupId::H3 {
            return bad("pipelines run on box windows of z1 or z2".into());
        }
        self.source_x.validate()?;
        self.source_y.validate()?;
        if self.window == 0 {
            return bad("window must be positive".into());
        }
        let s = self.s();
        if s < 2 {
            return bad("X alphabet needs at least 2 symbols".into());
        }
        if matches!(self.source_y, SourceSpec::Markov { .. }) && self.source_y.alphabet() > self.codec.l {
            return bad("Markov Y sources cannot be truncated; use l ≥ alphabet".into());
        }
        if self.tiling.eta != self.codec.eta {
            return bad(format!(
                "tiling η {} differs from codec η {}",
                self.tiling.eta, self.codec.eta
            ));
        }
        if self.tiling.k_min == 0 {
            return bad("k_min must be positive".into());
        }
        if !(self.markers.delta_m > 0.0) {
            return bad("δ_M must be positive".into());
        }
        if let Some(n) = self.noise {
            if !(0.0..1.0).contains(&n.eps) {
                return bad(format!("noise ε = {} must lie in [0, 1)", n.eps));
            }
        }
        if self.metric.n_max == 0 {
            return bad("metric n_max must be at least 1".into());
        }
        self.codec.validate(self.group, s)?;
        let gap = self.source_x.entropy_rate() - self.h_y();
        if self.codec.d_gap > gap + 1e-9 {
            return Err(Error::CodecParams(format!(
                "d = {} exceeds h(X) − h(Y) = {gap}",
                self.codec.d_gap
            )));
        }
        Ok(())
    }

    /// Hex SHA-256 of the serialized configuration.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The bundled ℤ configuration (uniform X on 4 symbols, Y = (0.5, 0.3, 0.2)).
pub const BUNDLED_ZD1: &str = include_str!("../configs/zd1_bernoulli.cfg");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_round_trips() {
        let cfg = ExperimentConfig::from_json(BUNDLED_ZD1).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_json(), again.to_json());
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn invalid_codec_params_rejected() {
        let mut cfg = ExperimentConfig::from_json(BUNDLED_ZD1).unwrap();
        cfg.codec.delta = cfg.codec.d_gap / 12.0 + 1e-4;
        cfg.codec.eps = 100.0;
        let e = cfg.validate().unwrap_err().to_string();
        assert!(e.contains("δ < d/12"), "{e}");
        let unknown = BUNDLED_ZD1.replacen('{', "{\"bogus\": 1,", 1);
        assert!(ExperimentConfig::from_json(&unknown).is_err());
    }
}
