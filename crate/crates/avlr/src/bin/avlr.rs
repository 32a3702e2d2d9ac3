//! Command-line interface: synthetic data generation, model training,
//! prediction, evaluation, and the multi-method benchmark.

use avlr::datagen::{apply_mechanism, calibrate_intercepts, gen_complete, GenSpec, Mechanism, MechanismKind};
use avlr::harness::csv::{read_csv, write_csv};
use avlr::harness::{run_benchmark, ExperimentConfig, Method};
use avlr::metrics::{auc, brier, confusion_metrics};
use avlr::predictor::{classify, predict_dataset, PredictConfig};
use avlr::trainer::{fit, FittedModel, TrainConfig};
use avlr::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "avlr",
    version,
    about = "Logistic regression with missing covariates by amortized variational inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic benchmark dataset and write train/test CSV files.
    Generate(GenerateArgs),
    /// Fit the variational model on an incomplete CSV file.
    Train(TrainArgs),
    /// Predict label probabilities for a CSV file with a saved model.
    Predict(PredictArgs),
    /// Score a saved model against a labeled CSV file.
    Evaluate(EvaluateArgs),
    /// Run the multi-method benchmark and report aggregate metrics.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory that receives train.csv and test.csv.
    #[arg(long)]
    out: PathBuf,
    /// Missingness mechanism: mcar, mar, mnar, self-mask, logistic, seq-logistic.
    #[arg(long, default_value = "mcar", value_parser = parse_mechanism)]
    mechanism: MechanismKind,
    /// Target missing rate per feature.
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    #[arg(long, default_value_t = 2000)]
    n_train: usize,
    #[arg(long, default_value_t = 500)]
    n_test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the complete (pre-masking) matrices.
    #[arg(long)]
    truth: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Training CSV (features then a binary label column).
    #[arg(long)]
    data: PathBuf,
    /// Where the fitted model JSON goes.
    #[arg(long)]
    out: PathBuf,
    /// Model the missingness mechanism instead of ignoring it.
    #[arg(long)]
    mnar: bool,
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 3e-3)]
    lr: f64,
    /// Importance samples per row during training.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Encoder hidden width.
    #[arg(long, default_value_t = 128)]
    hidden: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV with a probability and a thresholded label per row.
    #[arg(long)]
    out: PathBuf,
    /// Monte-Carlo draws per incomplete row.
    #[arg(long, default_value_t = 100)]
    s: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Monte-Carlo draws per incomplete row.
    #[arg(long, default_value_t = 100)]
    s: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Experiment configuration JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Missingness mechanism: mcar, mar, mnar, self-mask, logistic, seq-logistic.
    #[arg(long, value_parser = parse_mechanism)]
    mechanism: Option<MechanismKind>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    /// Comma-separated subset of: avlr, avlr-mnar, saem, mean.
    #[arg(long, value_parser = parse_methods)]
    methods: Option<std::vec::Vec<Method>>,
    /// Where the JSON report goes (the text table always prints).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mechanism(s: &str) -> std::result::Result<MechanismKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "mcar" => Ok(MechanismKind::Mcar),
        "mar" => Ok(MechanismKind::Mar),
        "mnar" => Ok(MechanismKind::Mnar),
        "self-mask" | "selfmask" => Ok(MechanismKind::SelfMask),
        "logistic" => Ok(MechanismKind::Logistic),
        "seq-logistic" | "seqlogistic" => Ok(MechanismKind::SeqLogistic),
        other => Err(format!(
            "unknown mechanism {other:?} (expected mcar, mar, mnar, self-mask, logistic, seq-logistic)"
        )),
    }
}

fn parse_methods(s: &str) -> std::result::Result<Vec<Method>, String> {
    s.split(',')
        .map(|token| match token.trim().to_ascii_lowercase().as_str() {
            "avlr" => Ok(Method::Avlr),
            "avlr-mnar" | "avlr_mnar" => Ok(Method::AvlrMnar),
            "saem" => Ok(Method::Saem),
            "mean" => Ok(Method::Mean),
            other => Err(format!(
                "unknown method {other:?} (expected avlr, avlr-mnar, saem, mean)"
            )),
        })
        .collect()
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let generator = GenSpec::benchmark_default();
    let train_complete = gen_complete(&generator.with_n_seed(args.n_train, args.seed))?;
    let test_complete =
        gen_complete(&generator.with_n_seed(args.n_test, args.seed ^ 0x9E37_79B9_7F4A_7C15))?;

    let mech = Mechanism::new(args.mechanism, args.rate, generator.d, args.seed)?;
    let calibrated = if args.rate > 0.0 {
        calibrate_intercepts(&mech, &train_complete, args.seed ^ 0x94D0_49BB_1331_11EB)?
    } else {
        mech
    };
    let train = apply_mechanism(&train_complete, &calibrated, args.seed.wrapping_add(1))?;
    let test = apply_mechanism(&test_complete, &calibrated, args.seed.wrapping_add(2))?;

    write_csv(&args.out.join("train.csv"), &train)?;
    write_csv(&args.out.join("test.csv"), &test)?;
    if args.truth {
        write_csv(&args.out.join("train_complete.csv"), &train_complete)?;
        write_csv(&args.out.join("test_complete.csv"), &test_complete)?;
    }
    println!(
        "wrote {} train rows and {} test rows to {}",
        train.n,
        test.n,
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let data = read_csv(&args.data)?;
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.lr,
        k: args.k,
        hidden: args.hidden,
        mnar: args.mnar,
        seed: args.seed,
    };
    let (model, history) = fit(&data, &config)?;
    model.save(&args.out)?;
    let last = history.epoch_loss.last().copied().unwrap_or(f64::NAN);
    println!(
        "fitted {} rows x {} features ({} epochs, final objective {last:.4}); model saved to {}",
        data.n,
        data.d,
        history.epoch_loss.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = FittedModel::load(&args.model)?;
    let data = read_csv(&args.data)?;
    let config = PredictConfig { s: args.s, seed: args.seed };
    let probs = predict_dataset(&model, &data, &config)?;
    let labels = classify(&probs, 0.5);

    let mut out = String::from("p1,label\n");
    for (p, l) in probs.iter().zip(&labels) {
        out.push_str(&format!("{p},{l}\n"));
    }
    std::fs::write(&args.out, out)?;
    println!("wrote {} predictions to {}", probs.len(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let model = FittedModel::load(&args.model)?;
    let data = read_csv(&args.data)?;
    let config = PredictConfig { s: args.s, seed: args.seed };
    let probs = predict_dataset(&model, &data, &config)?;
    let preds = classify(&probs, 0.5);
    let confusion = confusion_metrics(&preds, &data.y)?;
    let report = serde_json::json!({
        "n": data.n,
        "auc": auc(&probs, &data.y)?,
        "accuracy": confusion.accuracy,
        "precision": confusion.precision,
        "recall": confusion.recall,
        "f1": confusion.f1,
        "brier": brier(&probs, &data.y)?,
    });
    println!("{}", serde_json::to_string_pretty(&report).map_err(Error::Json)?);
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<ExperimentConfig>(&std::fs::read_to_string(path)?)
            .map_err(Error::Json)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &args.label {
        config.label = v.clone();
    }
    if let Some(v) = args.mechanism {
        config.mechanism = v;
    }
    if let Some(v) = args.rate {
        config.rate = v;
    }
    if let Some(v) = args.reps {
        config.reps = v;
    }
    if let Some(v) = args.seed {
        config.base_seed = v;
    }
    if let Some(v) = args.n_train {
        config.n_train = v;
    }
    if let Some(v) = args.n_test {
        config.n_test = v;
    }
    if let Some(v) = args.epochs {
        config.train.epochs = v;
    }
    if let Some(v) = args.batch_size {
        config.train.batch_size = v;
    }
    if let Some(v) = args.lr {
        config.train.learning_rate = v;
    }
    if let Some(v) = args.k {
        config.train.k = v;
    }
    if let Some(v) = args.s {
        config.predict.s = v;
    }
    if let Some(v) = &args.methods {
        config.methods = v.clone();
    }

    let table = run_benchmark(&config)?;
    print!("{}", table.to_text());
    if let Some(path) = &args.out {
        table.save_json(path)?;
        println!("report saved to {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
