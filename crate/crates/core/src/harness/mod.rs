//! Datasets, the synthetic task, experiment configs and run records.

mod config;
mod dataset;
mod run;
mod synth;

pub use config::{
    BasisMode, DatasetSpec, ExperimentConfig, TrainParadigm, TrainSection, CONFIG_VERSION,
};
pub use dataset::{
    load_csv, load_idx, parse_csv, parse_idx, CsvOptions, Dataset, LabelColumn, Split,
};
pub use run::{
    basis_path_for, encode_dataset, level_basis, load_splits, median_sigma, run_experiment,
    sha256_hex, train_encoded, Artifacts, DatasetInfo, EncodedTask, EpochRecord, RunRecord,
    Timings, BUILD_ID, MNIST_FILES,
};
pub use synth::{
    synth_basis, synth_task, synth_task_with, SyntheticSample, SyntheticTaskSpec, SYMBOLS,
};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "HYPERVSA_THREADS";

/// Sizes the global thread pool. `HYPERVSA_THREADS` overrides `requested`;
/// neither set means one thread per core. Returns the pool size.
pub fn configure_threads(requested: Option<usize>) -> Result<usize> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))?,
        ),
        Err(_) => None,
    };
    let n = env.or(requested).unwrap_or(0);
    // A pool that is already built (e.g. by an earlier call) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(rayon::current_num_threads())
}
