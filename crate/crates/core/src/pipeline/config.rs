use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::annotation::LabelMethod;
use crate::classify::ClassifierSpec;
use crate::corpus::Channel;
use crate::error::{Error, Result};
use crate::features::FeatureOptions;
use crate::market::{ChangeKind, MAX_HORIZON};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelInput {
    pub channel: Channel,
    /// JSONL corpus, relative to the config file.
    pub corpus: PathBuf,
    /// Crowd rating CSV (`doc_id,worker_id,rating`), relative to the config file.
    pub annotations: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercentileFilter {
    pub hi: f64,
    pub lo: f64,
}

impl Default for PercentileFilter {
    fn default() -> Self {
        PercentileFilter { hi: 90.0, lo: 10.0 }
    }
}

/// Which trained classifier `classify` applies: the one with the best mean fold
/// accuracy, or a specific kind.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ModelChoice {
    #[default]
    Best,
    Kind(String),
}

impl Serialize for ModelChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ModelChoice::Best => s.serialize_str("best"),
            ModelChoice::Kind(k) => s.serialize_str(k),
        }
    }
}

impl<'de> Deserialize<'de> for ModelChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == "best" {
            ModelChoice::Best
        } else {
            ModelChoice::Kind(s)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub classifier: ModelChoice,
    /// First day of the sentiment series; defaults to the earliest document.
    pub start: Option<NaiveDate>,
    /// Last day of the sentiment series; defaults to the latest document.
    pub end: Option<NaiveDate>,
    /// Extra correlation tables restricted to high-positive, low-negative days.
    pub percentile_filter: Option<PercentileFilter>,
    pub granger_metrics: Vec<ChangeKind>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            classifier: ModelChoice::Best,
            start: None,
            end: None,
            percentile_filter: Some(PercentileFilter::default()),
            granger_metrics: vec![ChangeKind::PctPrice, ChangeKind::PctVolume],
        }
    }
}

fn default_classifiers() -> Vec<ClassifierSpec> {
    ClassifierSpec::DEFAULTS[..2].to_vec()
}

fn default_lags() -> Vec<usize> {
    (1..=MAX_HORIZON).collect()
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// One JSON document describing a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub channels: Vec<ChannelInput>,
    pub market: PathBuf,
    #[serde(default)]
    pub allow_gaps: bool,
    #[serde(default)]
    pub label_method: LabelMethod,
    #[serde(default)]
    pub features: FeatureOptions,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default = "default_lags")]
    pub lags: Vec<usize>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tfidf: bool,
    pub allow_gaps: bool,
}

/// A validated config with its paths resolved against the config's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(origin, e.line(), e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.cv.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if o.tfidf {
            self.features.tfidf = true;
        }
        if o.allow_gaps {
            self.allow_gaps = true;
        }
    }

    /// Structural checks that do not touch the filesystem.
    pub fn check(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::Validation("config lists no channels".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.channels {
            if !seen.insert(c.channel) {
                return Err(Error::Validation(format!(
                    "channel {} listed twice",
                    c.channel
                )));
            }
        }
        if self.classifiers.is_empty() {
            return Err(Error::Validation("config lists no classifiers".into()));
        }
        let mut kinds = HashSet::new();
        for c in &self.classifiers {
            if !kinds.insert(c.kind()) {
                return Err(Error::Validation(format!(
                    "classifier {} listed twice",
                    c.kind()
                )));
            }
        }
        if self.cv.folds < 2 {
            return Err(Error::Validation(format!(
                "cv.folds must be at least 2, got {}",
                self.cv.folds
            )));
        }
        if self.lags.is_empty() {
            return Err(Error::Validation("lags must not be empty".into()));
        }
        if let Some(l) = self.lags.iter().find(|l| !(1..=MAX_HORIZON).contains(*l)) {
            return Err(Error::Validation(format!(
                "lag {l} outside 1..={MAX_HORIZON}"
            )));
        }
        let mut sorted = self.lags.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != self.lags {
            return Err(Error::Validation("lags must be strictly increasing".into()));
        }
        if let (Some(s), Some(e)) = (self.analysis.start, self.analysis.end) {
            if e < s {
                return Err(Error::Validation(format!(
                    "analysis end {e} precedes start {s}"
                )));
            }
        }
        if let ModelChoice::Kind(k) = &self.analysis.classifier {
            if !self.classifiers.iter().any(|c| c.kind() == k) {
                return Err(Error::Validation(format!(
                    "analysis.classifier {k:?} is not among the configured classifiers"
                )));
            }
        }
        if let Some(p) = self.analysis.percentile_filter {
            if !(0.0..=100.0).contains(&p.hi) || !(0.0..=100.0).contains(&p.lo) {
                return Err(Error::Validation("percentiles must lie in 0..=100".into()));
            }
        }
        if self.analysis.granger_metrics.is_empty() {
            return Err(Error::Validation(
                "analysis.granger_metrics must not be empty".into(),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, leaving out the output directory so
    /// that the same run written to two places hashes identically.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("out");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}

impl LoadedConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Validation(format!(
                "config file {} not found",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = RunConfig::from_json(&text, path)?;
        config.apply(overrides);
        config.check()?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let loaded = LoadedConfig { config, base_dir };
        loaded.check_paths()?;
        Ok(loaded)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        // an --out flag is taken as given; a config value is relative to the config
        self.resolve(&self.config.out)
    }

    fn check_paths(&self) -> Result<()> {
        let mut inputs = vec![self.config.market.clone()];
        for c in &self.config.channels {
            inputs.push(c.corpus.clone());
            inputs.push(c.annotations.clone());
        }
        let missing: Vec<String> = inputs
            .iter()
            .map(|p| self.resolve(p))
            .filter(|p| !p.is_file())
            .map(|p| p.display().to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "input file(s) not found: {}",
                missing.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "channels": [{"channel": "news", "corpus": "c.jsonl", "annotations": "a.csv"}],
        "market": "m.csv"
    }"#;

    fn parse(s: &str) -> Result<RunConfig> {
        RunConfig::from_json(s, Path::new("run.json"))
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.cv, CvConfig { folds: 10, seed: 0 });
        assert_eq!(c.lags, vec![1, 2, 3, 4, 5]);
        assert_eq!(c.label_method, LabelMethod::Mean);
        assert_eq!(c.classifiers.len(), 2);
        assert_eq!(c.analysis.classifier, ModelChoice::Best);
        c.check().unwrap();
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse(r#"{"channels": [], "market": "m.csv", "bogus": 1}"#).is_err());
        let mut c = parse(MINIMAL).unwrap();
        c.lags = vec![1, 6];
        assert!(matches!(c.check(), Err(Error::Validation(_))));
        c.lags = vec![2, 1];
        assert!(c.check().is_err());
        c.lags = vec![1];
        c.cv.folds = 1;
        assert!(c.check().is_err());
        c.cv.folds = 2;
        c.analysis.classifier = ModelChoice::Kind("bernoulli_nb".into());
        assert!(c.check().is_err());
    }

    #[test]
    fn hash_tracks_fields_except_out() {
        let base = parse(MINIMAL).unwrap();
        let h = base.hash();
        let mut c = base.clone();
        c.out = PathBuf::from("elsewhere");
        assert_eq!(c.hash(), h);
        let mut c = base.clone();
        c.apply(&Overrides {
            seed: Some(9),
            ..Default::default()
        });
        assert_ne!(c.hash(), h);
        let mut c = base.clone();
        c.apply(&Overrides {
            tfidf: true,
            ..Default::default()
        });
        assert_ne!(c.hash(), h);
        let mut c = base.clone();
        c.lags = vec![1, 2];
        assert_ne!(c.hash(), h);
        let mut c = base;
        c.market = PathBuf::from("other.csv");
        assert_ne!(c.hash(), h);
    }
}
