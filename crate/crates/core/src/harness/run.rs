use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{BasisMode, DatasetSpec, ExperimentConfig, TrainParadigm};
use super::dataset::{load_csv, load_idx, CsvOptions, Dataset, Split};
use super::synth::{synth_basis, synth_task_with, SyntheticTaskSpec};
use crate::error::{Error, Result};
use crate::learn::{
    bundle_train_par, evaluate, perceptron_train_with, quantize_feature, sgd_train_binary_with,
    sgd_train_cyclic_with, Encoder, EpochStats, Model, SgdModel, QUANT_LEVELS,
};
use crate::rff::{rbf_target, sample_correlated, CorrelatedBasis, DEFAULT_SIGMA};
use crate::rng::SeededRng;
use crate::vsa::{Family, Hypervector};

/// `git describe` of the tree this binary was built from.
pub const BUILD_ID: &str = env!("HYPERVSA_BUILD_ID");

pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

// Stream assignment under the experiment seed.
const BASIS_STREAM: u64 = 1;
const BUNDLE_STREAM: u64 = 2;
const SYNTH_TRAIN_STREAM: u64 = 3;
const SYNTH_TEST_STREAM: u64 = 4;
const SIGMA_STREAM: u64 = 5;

const SIGMA_PAIRS: usize = 2000;

/// Encoded splits ready for training.
pub struct EncodedTask {
    pub train: Vec<Hypervector>,
    pub train_labels: Vec<usize>,
    pub test: Vec<Hypervector>,
    pub test_labels: Vec<usize>,
    pub classes: usize,
    pub n_features: usize,
    pub basis: CorrelatedBasis,
    /// Level-kernel bandwidth actually used, for RFF bases.
    pub sigma: Option<f64>,
    pub info: DatasetInfo,
}

#[derive(Clone, Debug, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub classes: usize,
    pub preprocessing: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes_accuracy: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub test_accuracy: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub load_seconds: f64,
    pub basis_seconds: f64,
    pub encode_seconds: f64,
    pub train_seconds: f64,
    pub eval_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifacts {
    pub model: PathBuf,
    pub model_sha256: String,
    pub basis: PathBuf,
    pub basis_sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub build_id: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub threads: usize,
    pub seed: u64,
    pub sigma: Option<f64>,
    pub epochs: Vec<EpochRecord>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub timings: Timings,
    pub artifacts: Artifacts,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Basis over the 256 quantization levels: independent vectors, or an RFF
/// basis for the RBF kernel on the level index.
pub fn level_basis(
    family: Family,
    dim: usize,
    mode: BasisMode,
    sigma: f64,
    rng: &mut SeededRng,
) -> Result<CorrelatedBasis> {
    match mode {
        BasisMode::Random => CorrelatedBasis::random(family, QUANT_LEVELS, dim, rng),
        BasisMode::Rff => {
            let levels: Vec<f64> = (0..QUANT_LEVELS).map(|v| v as f64).collect();
            let target = rbf_target(&levels, sigma, None)?;
            sample_correlated(&target, family, dim, rng)
        }
    }
}

/// Median heuristic for the level-kernel bandwidth.
///
/// Binding every shifted feature multiplies the per-feature kernels, so two
/// samples `p`, `q` (in quantized-level units) end up with expected
/// similarity close to `exp(-|p - q|^2 / (2 sigma^2))`. A per-level bandwidth
/// like 16 therefore makes distinct samples nearly orthogonal; this returns
/// `median |p - q| / sqrt(2)` over random pairs of rows instead.
pub fn median_sigma(ds: &Dataset, seed: u64) -> Result<f64> {
    let m = ds.len();
    if m < 2 {
        return Err(Error::Data("need at least two rows to choose sigma".into()));
    }
    let mut rng = SeededRng::with_stream(seed, SIGMA_STREAM);
    let level = |x: f32| f64::from(quantize_feature(f64::from(x)));
    let mut d: Vec<f64> = (0..SIGMA_PAIRS)
        .map(|_| {
            let i = rng.random_range(0..m);
            let j = (i + rng.random_range(1..m)) % m;
            ds.row(i)
                .iter()
                .zip(ds.row(j))
                .map(|(&a, &b)| (level(a) - level(b)).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let median = d[d.len() / 2];
    if median == 0.0 {
        return Err(Error::Data(
            "sampled rows are identical; cannot choose sigma".into(),
        ));
    }
    Ok(median / std::f64::consts::SQRT_2)
}

/// Encodes every row of `ds` in parallel.
pub fn encode_dataset(enc: &Encoder, ds: &Dataset) -> Result<Vec<Hypervector>> {
    (0..ds.len())
        .into_par_iter()
        .map(|i| {
            let p: Vec<u8> = ds
                .row(i)
                .iter()
                .map(|&x| quantize_feature(f64::from(x)))
                .collect();
            enc.encode(&p)
        })
        .collect()
}

/// Loads the train and test splits named by `spec`.
pub fn load_splits(spec: &DatasetSpec) -> Result<(Dataset, Dataset)> {
    match spec {
        DatasetSpec::Idx { dir, name } => {
            let f: Vec<PathBuf> = MNIST_FILES.iter().map(|n| dir.join(n)).collect();
            let mut tr = load_idx(&f[0], &f[1], Split::Train)?;
            let mut te = load_idx(&f[2], &f[3], Split::Test)?;
            tr.name = format!("{name}/train");
            te.name = format!("{name}/test");
            Ok((tr, te))
        }
        DatasetSpec::Csv {
            train,
            test,
            label_column,
            header,
        } => {
            let mut opts = CsvOptions {
                label_column: *label_column,
                header: *header,
                label_map: None,
            };
            let tr = load_csv(train, Split::Train, &opts)?;
            opts.label_map = tr.label_map.clone();
            let te = load_csv(test, Split::Test, &opts)?;
            if te.n_features() != tr.n_features() {
                return Err(Error::Data(format!(
                    "test split has {} features, train has {}",
                    te.n_features(),
                    tr.n_features()
                )));
            }
            Ok((tr, te))
        }
        DatasetSpec::Synthetic { .. } => {
            Err(Error::invalid("synthetic data is generated, not loaded"))
        }
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn prepare(cfg: &ExperimentConfig, timings: &mut Timings) -> Result<EncodedTask> {
    let t = Instant::now();
    let mut basis_rng = SeededRng::with_stream(cfg.seed, BASIS_STREAM);
    if let DatasetSpec::Synthetic {
        p,
        train_samples,
        test_samples,
    } = &cfg.dataset
    {
        let spec = SyntheticTaskSpec {
            p: *p,
            samples: *train_samples,
            seed: cfg.seed,
        };
        let tr = synth_task_with(
            &spec,
            &mut SeededRng::with_stream(cfg.seed, SYNTH_TRAIN_STREAM),
        )?;
        let spec_te = SyntheticTaskSpec {
            samples: *test_samples,
            ..spec.clone()
        };
        let te = synth_task_with(
            &spec_te,
            &mut SeededRng::with_stream(cfg.seed, SYNTH_TEST_STREAM),
        )?;
        timings.load_seconds = secs(t);
        let t = Instant::now();
        let basis = synth_basis(cfg.family, cfg.dim, &mut basis_rng)?;
        timings.basis_seconds = secs(t);
        let t = Instant::now();
        let lookup = |xs: &[u8]| {
            xs.iter()
                .map(|&x| basis.vectors()[x as usize].clone())
                .collect::<Vec<_>>()
        };
        let (train, test) = (lookup(&tr.xs), lookup(&te.xs));
        timings.encode_seconds = secs(t);
        return Ok(EncodedTask {
            train,
            train_labels: tr.ys,
            test,
            test_labels: te.ys,
            classes: 3,
            n_features: 1,
            info: DatasetInfo {
                name: "synthetic".into(),
                n_train: *train_samples,
                n_test: *test_samples,
                n_features: 1,
                classes: 3,
                preprocessing: "symbol x encoded directly as phi(x)".into(),
                bayes_accuracy: Some(spec.bayes_accuracy()),
            },
            basis,
            sigma: None,
        });
    }
    let (mut tr, mut te) = load_splits(&cfg.dataset)?;
    if let Some(m) = cfg.max_train {
        tr.truncate(m);
    }
    if let Some(m) = cfg.max_test {
        te.truncate(m);
    }
    timings.load_seconds = secs(t);
    let t = Instant::now();
    let sigma = match (cfg.basis, cfg.sigma) {
        (BasisMode::Random, _) => None,
        (BasisMode::Rff, Some(s)) => Some(s),
        (BasisMode::Rff, None) => Some(median_sigma(&tr, cfg.seed)?),
    };
    let basis = level_basis(
        cfg.family,
        cfg.dim,
        cfg.basis,
        sigma.unwrap_or(DEFAULT_SIGMA),
        &mut basis_rng,
    )?;
    timings.basis_seconds = secs(t);
    let t = Instant::now();
    let enc = Encoder::new(basis, tr.n_features())?;
    let train = encode_dataset(&enc, &tr)?;
    let test = encode_dataset(&enc, &te)?;
    timings.encode_seconds = secs(t);
    let classes = tr.classes().max(te.classes());
    let preprocessing = match cfg.dataset {
        DatasetSpec::Idx { .. } => {
            "pixels p -> 2p/255 - 1, then 8-bit quantization (recovers the native intensity index)"
        }
        _ => "per-column min-max to [-1, 1] where out of range, then 8-bit quantization",
    };
    Ok(EncodedTask {
        info: DatasetInfo {
            name: tr.name.clone(),
            n_train: tr.len(),
            n_test: te.len(),
            n_features: tr.n_features(),
            classes,
            preprocessing: format!("{preprocessing}; position j shifted by j"),
            bayes_accuracy: None,
        },
        train,
        train_labels: tr.labels().to_vec(),
        test,
        test_labels: te.labels().to_vec(),
        classes,
        n_features: tr.n_features(),
        basis: enc.basis().clone(),
        sigma,
    })
}

/// Trains the configured paradigm on an encoded task, recording test
/// accuracy after every epoch.
pub fn train_encoded(
    cfg: &ExperimentConfig,
    task: &EncodedTask,
) -> Result<(Model, Vec<EpochRecord>)> {
    let tc = cfg.train_config();
    let mut epochs = Vec::new();
    let mut clock = Instant::now();
    let mut hook = |s: EpochStats, m: &SgdModel| -> Result<()> {
        let acc = evaluate(&task.test, &task.test_labels, m)?;
        epochs.push(EpochRecord {
            epoch: s.epoch,
            mean_loss: s.mean_loss,
            test_accuracy: acc,
            seconds: secs(clock),
        });
        clock = Instant::now();
        Ok(())
    };
    let model = match (cfg.paradigm, cfg.family) {
        (TrainParadigm::Bundle, _) => {
            let spec = cfg.family.default_spec();
            let mut rng = SeededRng::with_stream(cfg.seed, BUNDLE_STREAM);
            Model::Prototypes(bundle_train_par(
                &task.train,
                &task.train_labels,
                task.classes,
                spec.as_ref(),
                &mut rng,
            )?)
        }
        (TrainParadigm::Sgd, Family::Binary) => Model::Sgd(sgd_train_binary_with(
            &task.train,
            &task.train_labels,
            task.classes,
            &tc,
            &mut hook,
        )?),
        (TrainParadigm::Sgd, Family::Cyclic(_)) => Model::Sgd(sgd_train_cyclic_with(
            &task.train,
            &task.train_labels,
            task.classes,
            &tc,
            None,
            &mut hook,
        )?),
        (TrainParadigm::Perceptron, _) => Model::Sgd(perceptron_train_with(
            &task.train,
            &task.train_labels,
            task.classes,
            &tc,
            &mut hook,
        )?),
    };
    Ok((model, epochs))
}

/// `init-basis -> encode -> train -> eval`; writes `model.vsa`,
/// `model.vsa.basis` and `record.json` under the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let mut timings = Timings {
        load_seconds: 0.0,
        basis_seconds: 0.0,
        encode_seconds: 0.0,
        train_seconds: 0.0,
        eval_seconds: 0.0,
    };
    let task = prepare(cfg, &mut timings)?;
    let t = Instant::now();
    let (model, epochs) = train_encoded(cfg, &task)?;
    timings.train_seconds = secs(t);
    let t = Instant::now();
    let train_accuracy = evaluate(&task.train, &task.train_labels, &model)?;
    let test_accuracy = evaluate(&task.test, &task.test_labels, &model)?;
    timings.eval_seconds = secs(t);

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io_at(&cfg.output_dir, e))?;
    let model_path = cfg.output_dir.join("model.vsa");
    let basis_path = basis_path_for(&model_path);
    let model_bytes = model.to_bytes()?;
    let basis_bytes = task.basis.to_bytes();
    std::fs::write(&model_path, &model_bytes).map_err(|e| Error::io_at(&model_path, e))?;
    std::fs::write(&basis_path, &basis_bytes).map_err(|e| Error::io_at(&basis_path, e))?;
    let record = RunRecord {
        build_id: BUILD_ID.to_string(),
        config: cfg.clone(),
        dataset: task.info.clone(),
        threads: rayon::current_num_threads(),
        seed: cfg.seed,
        sigma: task.sigma,
        epochs,
        train_accuracy,
        test_accuracy,
        timings,
        artifacts: Artifacts {
            model: model_path,
            model_sha256: sha256_hex(&model_bytes),
            basis: basis_path,
            basis_sha256: sha256_hex(&basis_bytes),
        },
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| Error::Format(e.to_string()))?;
    let record_path = cfg.output_dir.join("record.json");
    std::fs::write(&record_path, json + "\n").map_err(|e| Error::io_at(&record_path, e))?;
    Ok(record)
}

/// The basis travels next to its model as `<model>.basis`.
pub fn basis_path_for(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".basis");
    PathBuf::from(s)
}
