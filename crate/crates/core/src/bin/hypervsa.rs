use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hypervsa::analysis::{cdc_all, CdcQuery};
use hypervsa::expressivity::{
    bundling_angle_empirical, bundling_angle_theory, check_binary_expressible,
    classic_init_expectation, classic_limit_gap, pk, verify_classic_limit, Composition,
};
use hypervsa::harness::{
    basis_path_for, configure_threads, encode_dataset, level_basis, load_csv, load_idx,
    median_sigma, run_experiment, sha256_hex, synth_task, BasisMode, CsvOptions, Dataset,
    ExperimentConfig, LabelColumn, Split, SyntheticTaskSpec, MNIST_FILES,
};
use hypervsa::learn::{
    bundle_train_par, evaluate, perceptron_train, sgd_train_binary, sgd_train_cyclic, Encoder,
    Model, TrainConfig,
};
use hypervsa::rff::{
    sample_correlated, target_factor, CorrelatedBasis, SimilarityTarget, DEFAULT_SIGMA,
};
use hypervsa::vsa::{record, Family};
use hypervsa::{Error, Result, SeededRng};

#[derive(Parser)]
#[command(
    name = "hypervsa",
    version,
    about = "Binary HDC and cyclic-group VSA toolkit"
)]
struct Cli {
    /// Worker threads (HYPERVSA_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a basis: random, RBF-kernel RFF over 256 levels, or a given similarity matrix.
    InitBasis(InitBasisArgs),
    /// Encode a dataset split with a saved basis.
    Encode(EncodeArgs),
    /// Train a classifier; writes MODEL and MODEL.basis.
    Train(TrainArgs),
    /// Accuracy of a saved model on a dataset split.
    Eval(EvalArgs),
    /// Run a JSON experiment config end to end.
    Run { config: PathBuf },
    /// Sample the three-symbol task and report its joint frequencies.
    SynthTask(SynthArgs),
    /// Convex-hull, bundling-angle and classic-init checks.
    #[command(subcommand)]
    Expressivity(ExpressivityCmd),
    /// Circuit-depth complexity of the three inference circuits.
    Cdc {
        #[arg(long)]
        n_features: u64,
        #[arg(long)]
        dim: u64,
        #[arg(long, default_value_t = 3)]
        group_bits: u32,
    },
    /// Bundling angle for 2k+1 vectors.
    Angle(AngleArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum BasisArg {
    Random,
    Rff,
}

impl From<BasisArg> for BasisMode {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Random => BasisMode::Random,
            BasisArg::Rff => BasisMode::Rff,
        }
    }
}

#[derive(Args)]
struct InitBasisArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    dim: usize,
    #[arg(long, value_enum, default_value = "rff")]
    basis: BasisArg,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    /// Similarity matrix file (first line n, then n rows); overrides --basis.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// IDX directory or CSV file.
    #[arg(long)]
    data: PathBuf,
    /// IDX split; defaults to train for `train`, test otherwise.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    /// CSV label column: first, last, or a 0-based index.
    #[arg(long, default_value = "last", value_parser = parse_label_column)]
    label_column: LabelColumn,
    #[arg(long)]
    header: bool,
    /// Use only the first rows.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

fn parse_label_column(s: &str) -> std::result::Result<LabelColumn, String> {
    match s {
        "first" => Ok(LabelColumn::First),
        "last" => Ok(LabelColumn::Last),
        n => n
            .parse()
            .map(LabelColumn::Index)
            .map_err(|_| format!("bad label column '{n}'")),
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    basis: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum ParadigmArg {
    Bundle,
    Sgd,
    Perceptron,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    paradigm: ParadigmArg,
    #[arg(long)]
    family: Family,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = hypervsa::learn::DEFAULT_BETA)]
    beta: f64,
    #[arg(long)]
    warm_start: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "rff")]
    basis: BasisArg,
    /// RBF bandwidth on the 0..255 level scale; defaults to the median
    /// heuristic over the training rows
    #[arg(long)]
    sigma: Option<f64>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the samples as `x,y` rows.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExpressivityCmd {
    /// Is a similarity matrix in the convex hull of binary sign atoms?
    Check {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
    /// Bundling angle theory (and optionally Monte-Carlo).
    Angle(AngleArgs),
    /// Expected similarity of a bind/permute composition of random generators.
    Classic {
        #[arg(long)]
        composition: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 10_000)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct AngleArgs {
    #[arg(long)]
    k: i64,
    /// Also estimate the angle by simulation.
    #[arg(long)]
    empirical: bool,
    #[arg(long, default_value_t = 100_000)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn load_data(a: &DataArgs, default: SplitArg) -> Result<Dataset> {
    let which = a.split.unwrap_or(default);
    let mut ds = if a.data.is_dir() {
        let (img, lab) = match which {
            SplitArg::Train => (MNIST_FILES[0], MNIST_FILES[1]),
            SplitArg::Test => (MNIST_FILES[2], MNIST_FILES[3]),
        };
        let split = match which {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        };
        load_idx(&a.data.join(img), &a.data.join(lab), split)?
    } else {
        let opts = CsvOptions {
            label_column: a.label_column,
            header: a.header,
            label_map: None,
        };
        let split = match which {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        };
        load_csv(&a.data, split, &opts)?
    };
    if let Some(m) = a.limit {
        ds.truncate(m);
    }
    Ok(ds)
}

fn init_basis(a: &InitBasisArgs) -> Result<()> {
    let mut rng = SeededRng::new(a.seed);
    let (basis, clipped) = match &a.target {
        Some(path) => {
            let target = SimilarityTarget::load(path)?;
            let factor = target_factor(&target)?;
            if factor.far_from_expressible() {
                eprintln!(
                    "warning: {:.1}% of the spectrum was clipped; the target is far from expressible",
                    100.0 * factor.clipped_fraction()
                );
            }
            (
                sample_correlated(&target, a.family, a.dim, &mut rng)?,
                Some(factor.clipped_fraction()),
            )
        }
        None => (
            level_basis(a.family, a.dim, a.basis.into(), a.sigma, &mut rng)?,
            None,
        ),
    };
    basis.save(&a.out)?;
    print_json(&json!({
        "family": basis.family(),
        "n": basis.len(),
        "dim": basis.dim(),
        "seed": a.seed,
        "clipped_fraction": clipped,
        "path": a.out,
        "sha256": sha256_hex(&basis.to_bytes()),
    }))
}

fn encode(a: &EncodeArgs) -> Result<()> {
    let basis = CorrelatedBasis::load(&a.basis)?;
    let ds = load_data(&a.data, SplitArg::Test)?;
    let enc = Encoder::new(basis, ds.n_features())?;
    let vs = encode_dataset(&enc, &ds)?;
    // "ENC1" | count u64 | (label u32, HV01 record)*
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&a.out).map_err(|e| Error::io_at(&a.out, e))?,
    );
    out.write_all(b"ENC1")?;
    out.write_all(&(vs.len() as u64).to_le_bytes())?;
    for (v, &y) in vs.iter().zip(ds.labels()) {
        out.write_all(&(y as u32).to_le_bytes())?;
        record::write_record(v, &mut out)?;
    }
    out.flush()?;
    print_json(
        &json!({ "samples": vs.len(), "dim": enc.dim(), "family": enc.family(), "path": a.out }),
    )
}

fn train(a: &TrainArgs) -> Result<()> {
    let ds = load_data(&a.data, SplitArg::Train)?;
    let sigma = match (a.basis, a.sigma) {
        (BasisArg::Random, _) => None,
        (BasisArg::Rff, Some(s)) => Some(s),
        (BasisArg::Rff, None) => Some(median_sigma(&ds, a.seed)?),
    };
    let basis = level_basis(
        a.family,
        a.dim,
        a.basis.into(),
        sigma.unwrap_or(DEFAULT_SIGMA),
        &mut SeededRng::with_stream(a.seed, 1),
    )?;
    let enc = Encoder::new(basis, ds.n_features())?;
    let xs = encode_dataset(&enc, &ds)?;
    let classes = ds.classes();
    let cfg = TrainConfig {
        lr: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
        beta: a.beta,
        warm_start: a.warm_start,
    };
    let model = match (a.paradigm, a.family) {
        (ParadigmArg::Bundle, f) => {
            let spec = f.default_spec();
            let mut rng = SeededRng::with_stream(a.seed, 2);
            Model::Prototypes(bundle_train_par(
                &xs,
                ds.labels(),
                classes,
                spec.as_ref(),
                &mut rng,
            )?)
        }
        (ParadigmArg::Sgd, Family::Binary) => {
            Model::Sgd(sgd_train_binary(&xs, ds.labels(), classes, &cfg)?)
        }
        (ParadigmArg::Sgd, Family::Cyclic(_)) => {
            Model::Sgd(sgd_train_cyclic(&xs, ds.labels(), classes, &cfg, None)?)
        }
        (ParadigmArg::Perceptron, _) => {
            Model::Sgd(perceptron_train(&xs, ds.labels(), classes, &cfg)?)
        }
    };
    let acc = evaluate(&xs, ds.labels(), &model)?;
    let bytes = model.to_bytes()?;
    std::fs::write(&a.out, &bytes).map_err(|e| Error::io_at(&a.out, e))?;
    enc.basis().save(&basis_path_for(&a.out))?;
    print_json(&json!({
        "paradigm": model.paradigm(),
        "family": model.family(),
        "classes": classes,
        "dim": model.dim(),
        "train_samples": ds.len(),
        "train_accuracy": acc,
        "sigma": sigma,
        "model": a.out,
        "model_sha256": sha256_hex(&bytes),
    }))
}

fn eval(a: &EvalArgs) -> Result<()> {
    let model = Model::load(&a.model)?;
    let basis_path = basis_path_for(&a.model);
    let basis = CorrelatedBasis::load(&basis_path)
        .map_err(|e| Error::Data(format!("{}: {e}", basis_path.display())))?;
    let ds = load_data(&a.data, SplitArg::Test)?;
    let enc = Encoder::new(basis, ds.n_features())?;
    let xs = encode_dataset(&enc, &ds)?;
    let acc = evaluate(&xs, ds.labels(), &model)?;
    print_json(&json!({ "samples": ds.len(), "accuracy": acc, "model": a.model }))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let spec = SyntheticTaskSpec {
        p: a.p,
        samples: a.samples,
        seed: a.seed,
    };
    let s = synth_task(&spec)?;
    if let Some(path) = &a.out {
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io_at(path, e))?,
        );
        for (x, y) in s.xs.iter().zip(&s.ys) {
            writeln!(w, "{x},{y}")?;
        }
        w.flush()?;
    }
    let m = s.len() as f64;
    let freq: Vec<Vec<f64>> = s
        .counts()
        .iter()
        .map(|r| r.iter().map(|&c| c as f64 / m).collect())
        .collect();
    print_json(&json!({
        "p": a.p,
        "samples": s.len(),
        "joint": spec.joint(),
        "empirical": freq,
        "bayes_accuracy": spec.bayes_accuracy(),
    }))
}

fn angle(a: &AngleArgs) -> Result<()> {
    let theory = bundling_angle_theory(a.k)?;
    let empirical = if a.empirical {
        Some(bundling_angle_empirical(
            a.k,
            a.dim,
            a.trials,
            &mut SeededRng::new(a.seed),
        )?)
    } else {
        None
    };
    print_json(&json!({
        "k": a.k,
        "bundle_size": 2 * a.k + 1,
        "theory_degrees": theory,
        "p_k": pk(a.k)?,
        "empirical_degrees": empirical,
    }))
}

fn expressivity(c: &ExpressivityCmd) -> Result<()> {
    match c {
        ExpressivityCmd::Check { target, eps } => {
            let t = SimilarityTarget::load(target)?;
            let r = check_binary_expressible(&t, *eps)?;
            print_json(&serde_json::to_value(&r).map_err(|e| Error::Format(e.to_string()))?)
        }
        ExpressivityCmd::Angle(a) => angle(a),
        ExpressivityCmd::Classic {
            composition,
            trials,
            dim,
            seed,
        } => {
            let text =
                std::fs::read_to_string(composition).map_err(|e| Error::io_at(composition, e))?;
            let comp = Composition::from_json(&text)?;
            let est = classic_init_expectation(&comp, *trials, *dim, &mut SeededRng::new(*seed))?;
            let rows = |m: &hypervsa::linalg::SquareMatrix| -> Vec<Vec<f64>> {
                (0..3).map(|i| m.row(i).to_vec()).collect()
            };
            print_json(&json!({
                "mean": rows(&est.mean),
                "stderr": rows(&est.stderr),
                "within_classic_limit": verify_classic_limit(&est.mean, 3.0 * est.stderr.as_slice().iter().cloned().fold(0.0, f64::max))?,
                "gap_to_uniform_minus_third": classic_limit_gap(&est.mean)?,
            }))
        }
    }
}

fn cdc(n_features: u64, dim: u64, group_bits: u32) -> Result<()> {
    let q = CdcQuery::new(n_features, dim, group_bits)?;
    print_json(&serde_json::to_value(cdc_all(&q)).map_err(|e| Error::Format(e.to_string()))?)
}

fn run(config: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let rec = run_experiment(&cfg)?;
    print_json(&serde_json::to_value(&rec).map_err(|e| Error::Format(e.to_string()))?)
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match &cli.cmd {
        Cmd::InitBasis(a) => init_basis(a),
        Cmd::Encode(a) => encode(a),
        Cmd::Train(a) => train(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Run { config } => run(config),
        Cmd::SynthTask(a) => synth(a),
        Cmd::Expressivity(c) => expressivity(c),
        Cmd::Cdc {
            n_features,
            dim,
            group_bits,
        } => cdc(*n_features, *dim, *group_bits),
        Cmd::Angle(a) => angle(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
