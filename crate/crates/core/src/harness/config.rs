use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::LabelColumn;
use crate::error::{Error, Result};
use crate::learn::{TrainConfig, DEFAULT_BETA};
use crate::vsa::Family;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainParadigm {
    Bundle,
    Sgd,
    Perceptron,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisMode {
    Random,
    Rff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Directory with the four uncompressed MNIST-style IDX files.
    Idx {
        dir: PathBuf,
        #[serde(default = "default_idx_name")]
        name: String,
    },
    Csv {
        train: PathBuf,
        test: PathBuf,
        #[serde(default = "default_label_column")]
        label_column: LabelColumn,
        #[serde(default)]
        header: bool,
    },
    Synthetic {
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_synth_train")]
        train_samples: usize,
        #[serde(default = "default_synth_test")]
        test_samples: usize,
    },
}

fn default_idx_name() -> String {
    "mnist".into()
}

fn default_label_column() -> LabelColumn {
    LabelColumn::Last
}

fn default_p() -> f64 {
    0.05
}

fn default_synth_train() -> usize {
    100_000
}

fn default_synth_test() -> usize {
    20_000
}

/// Optimizer settings; the seed comes from the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta: f64,
    pub warm_start: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            lr: d.lr,
            epochs: d.epochs,
            batch_size: d.batch_size,
            beta: DEFAULT_BETA,
            warm_start: d.warm_start,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub dataset: DatasetSpec,
    pub family: Family,
    pub paradigm: TrainParadigm,
    pub dim: usize,
    #[serde(default = "default_basis")]
    pub basis: BasisMode,
    /// RBF bandwidth on the level scale; `None` picks it from the training
    /// data (see [`super::median_sigma`]).
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainSection,
    /// Use only the first rows of each split.
    #[serde(default)]
    pub max_train: Option<usize>,
    #[serde(default)]
    pub max_test: Option<usize>,
    pub output_dir: PathBuf,
}

fn default_basis() -> BasisMode {
    BasisMode::Rff
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `path`; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        match &mut self.dataset {
            DatasetSpec::Idx { dir, .. } => fix(dir),
            DatasetSpec::Csv { train, test, .. } => {
                fix(train);
                fix(test);
            }
            DatasetSpec::Synthetic { .. } => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "version: expected {CONFIG_VERSION}, got {}",
                self.version
            ));
        }
        if self.dim == 0 {
            return bad("dim: must be positive".into());
        }
        if let Some(s) = self.sigma.filter(|s| !(*s > 0.0 && s.is_finite())) {
            return bad(format!("sigma: must be positive, got {s}"));
        }
        if self.paradigm == TrainParadigm::Perceptron && self.family != Family::Binary {
            return bad(format!(
                "paradigm: the perceptron needs the binary family, got {}",
                self.family
            ));
        }
        if let DatasetSpec::Synthetic {
            p,
            train_samples,
            test_samples,
        } = &self.dataset
        {
            if !(*p > 0.0 && *p < 1.0 / 9.0) {
                return bad(format!("dataset.p: must lie in (0, 1/9), got {p}"));
            }
            if *train_samples == 0 || *test_samples == 0 {
                return bad("dataset: sample counts must be positive".into());
            }
        }
        let t = self.train_config();
        match self.paradigm {
            TrainParadigm::Sgd => t
                .validate()
                .map_err(|e| Error::Config(format!("train: {e}")))?,
            TrainParadigm::Perceptron if !(t.lr > 0.0) => {
                return bad("train.lr: must be positive".into())
            }
            _ => {}
        }
        if self.train.batch_size == 0 {
            return bad("train.batch_size: must be >= 1".into());
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.train.lr,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            seed: self.seed,
            beta: self.train.beta,
            warm_start: self.train.warm_start,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"version":1,"name":"t","dataset":{"kind":"synthetic"},"family":"g3","paradigm":"bundle","dim":64,"output_dir":"out"}"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.family, Family::Cyclic(3));
        assert_eq!(c.basis, BasisMode::Rff);
        assert_eq!(c.train.epochs, 10);
        assert_eq!(
            c.dataset,
            DatasetSpec::Synthetic {
                p: 0.05,
                train_samples: 100_000,
                test_samples: 20_000
            }
        );
    }

    #[test]
    fn unknown_keys_are_reported() {
        let e = ExperimentConfig::parse(&BASE.replace("\"dim\"", "\"dims\"")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("dims"), "{e}");
        let e = ExperimentConfig::parse(
            &BASE.replace("\"kind\":\"synthetic\"", "\"kind\":\"synthetic\",\"q\":1"),
        )
        .unwrap_err();
        assert!(e.to_string().contains("`q`"), "{e}");
        assert!(ExperimentConfig::parse(&BASE.replace("\"version\":1", "\"version\":2")).is_err());
        assert!(ExperimentConfig::parse(&BASE.replace("g3", "g1")).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        let again = ExperimentConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
