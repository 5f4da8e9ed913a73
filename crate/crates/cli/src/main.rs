use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use sprocket::analysis::{
    averaged_grid, pooled_grid, sign_test, write_rank_table, RankSummary, Statistic,
};
use sprocket::io::{self, CorrectnessRow, DatasetManifest, ResultFormat, ResultRecord};
use sprocket::pipeline::{evaluate, Algorithm};
use sprocket::{
    apply_sprocket, fit_sprocket, parse_distance_spec, DistanceShare, MeasureKind, PrototypeModel, RunConfig,
    SelectionStrategy, WindowRule, DEFAULT_ALPHAS,
};

#[derive(Parser)]
#[command(name = "sprocket", version, about = "Prototype-distance time series classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write distance features for a dataset, fitting on it or applying a saved model.
    Transform(TransformArgs),
    /// Fit prototypes on a training set and save the model.
    Fit(FitArgs),
    /// Fit on a training file, score on a test file.
    Evaluate(EvaluateArgs),
    /// Evaluate every dataset in a manifest.
    Benchmark(BenchmarkArgs),
    /// Rank tables, ensemble grids and sign tests from results files.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Number of random kernels.
    #[arg(long, default_value_t = 512)]
    kernels: usize,
    /// Distance measure used by every kernel.
    #[arg(long, default_value = "msm")]
    distance: MeasureKind,
    /// Split of kernels across measures, e.g. "msm:300,euclidean:300".
    #[arg(long, conflicts_with = "distance")]
    distance_spec: Option<String>,
    /// Logarithm base for the prototype count.
    #[arg(long, default_value_t = 4.0)]
    proto_base: f64,
    /// Prototype selection: random, stratified or kmeanspp.
    #[arg(long, default_value = "random")]
    selection: SelectionStrategy,
    /// Warping window: sqrt, none or fixed:N.
    #[arg(long, default_value = "sqrt")]
    window_rule: WindowRule,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the hardware count.
    #[arg(long)]
    threads: Option<usize>,
    /// Z-normalize each channel before the transform.
    #[arg(long)]
    normalize: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            kernel_count: self.kernels,
            prototype_log_base: self.proto_base,
            window_rule: self.window_rule,
            distance_spec: vec![DistanceShare {
                measure: self.distance,
                kernels: self.kernels,
            }],
            selection: self.selection,
            seed: self.seed,
            normalize_input: self.normalize,
            ..RunConfig::default()
        };
        if let Some(threads) = self.threads {
            cfg.thread_count = threads;
        }
        if let Some(spec) = &self.distance_spec {
            cfg.distance_spec = parse_distance_spec(spec, Some(self.kernels))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Results file; the format follows the extension unless --format is given.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<ResultFormat>,
    /// Also write per-instance correctness next to the results.
    #[arg(long, requires = "output")]
    emit_correctness: bool,
}

#[derive(Args)]
struct TransformArgs {
    input: PathBuf,
    /// Apply this saved model instead of fitting on the input.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Feature matrix CSV.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct FitArgs {
    train: PathBuf,
    /// Where to save the model JSON.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    train: PathBuf,
    test: PathBuf,
    /// Comma-separated algorithms such as "sprocket,rocket+sprocket-dtw".
    #[arg(long, default_value = "sprocket", value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    /// Runs with seeds seed, seed+1, ...; the summary reports their mean.
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BenchmarkArgs {
    manifest: PathBuf,
    #[arg(long, default_value = "sprocket", value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    /// Skip entries whose files are missing instead of failing them.
    #[arg(long)]
    skip_missing: bool,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// One or more results files.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    /// Correctness sidecars for the ensemble grids.
    #[arg(long)]
    correctness: Vec<PathBuf>,
    /// Algorithm pair to compare, as "a,b"; may repeat.
    #[arg(long = "sign-test")]
    sign_test: Vec<String>,
    /// Explicit win/loss counts, as "wins,losses".
    #[arg(long)]
    win_loss: Option<String>,
    /// Directory for the report files.
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Analyze(a) => cmd_analyze(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    e.chain()
        .find_map(|c| c.downcast_ref::<sprocket::Error>())
        .map_or("Error", sprocket::Error::kind)
}

fn error_json(e: &anyhow::Error) -> serde_json::Value {
    json!({ "error": { "kind": error_kind(e), "message": format!("{e:#}") } })
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// `results.json` -> `results.<suffix>`
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn cmd_transform(args: TransformArgs) -> Result<bool> {
    let data = io::load_dataset(&args.input)?;
    let (features, config) = match &args.model {
        Some(path) => {
            let model = PrototypeModel::load(path)?;
            (apply_sprocket(&model, &data)?, model.config)
        }
        None => {
            let cfg = args.config.resolve()?;
            let fit = fit_sprocket(&data, &cfg)?;
            info!("{} distance calls", fit.stats.distance_calls);
            (fit.features, cfg)
        }
    };
    let mut w = csv_writer(&args.output)?;
    let header: Vec<String> = features
        .columns()
        .iter()
        .map(|c| format!("{}_{}_{:?}", c.source, c.kernel, c.feature).to_lowercase())
        .collect();
    w.write_record(&header)?;
    for r in 0..features.rows() {
        w.write_record(features.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    print_json(&json!({ "config": config, "rows": features.rows(), "cols": features.cols() }))?;
    Ok(true)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn cmd_fit(args: FitArgs) -> Result<bool> {
    let cfg = args.config.resolve()?;
    let train = io::load_dataset(&args.train)?;
    let fit = fit_sprocket(&train, &cfg)?;
    fit.model.save(&args.output)?;
    print_json(&json!({ "config": cfg, "stats": fit.stats, "feature_count": fit.model.feature_count() }))?;
    Ok(true)
}

struct RunOutput {
    records: Vec<ResultRecord>,
    correctness: Vec<CorrectnessRow>,
}

fn run_algorithms(
    name: &str,
    train: &sprocket::TimeSeriesDataset,
    test: &sprocket::TimeSeriesDataset,
    algorithms: &[Algorithm],
    base: &RunConfig,
    repeats: u64,
    out: &mut RunOutput,
) -> Result<()> {
    for algorithm in algorithms {
        for r in 0..repeats {
            let cfg = base.clone().with_seed(base.seed + r);
            let mut ev = evaluate(algorithm, train, test, &cfg, &DEFAULT_ALPHAS)
                .with_context(|| format!("{algorithm} on {name}"))?;
            ev.record.dataset = name.to_string();
            info!("{name} {algorithm} seed {}: accuracy {:.4}", cfg.seed, ev.record.accuracy);
            out.correctness.extend(io::correctness_rows(
                &ev.record.dataset,
                &ev.record.algorithm,
                cfg.seed,
                &ev.predicted,
                &ev.truth,
            ));
            out.records.push(ev.record);
        }
    }
    Ok(())
}

fn write_outputs(out: &OutputArgs, run: &RunOutput, cfg: &RunConfig, extra: serde_json::Value) -> Result<()> {
    if let Some(path) = &out.output {
        let format = out.format.unwrap_or_else(|| ResultFormat::from_path(path));
        io::write_results(&run.records, path, format)?;
        let config_path = sidecar(path, "config.json");
        fs::write(&config_path, serde_json::to_string_pretty(&json!({ "config": cfg, "run": extra }))?)?;
        if out.emit_correctness {
            io::write_correctness(&run.correctness, sidecar(path, "correctness.csv"))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MeanRecord {
    dataset: String,
    algorithm: String,
    runs: usize,
    accuracy: f64,
    transform_s: f64,
    fit_s: f64,
    predict_s: f64,
    distance_calls: f64,
    feature_count: usize,
}

fn means(records: &[ResultRecord]) -> Vec<MeanRecord> {
    let mut groups: BTreeMap<(String, String), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.dataset.clone(), r.algorithm.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((dataset, algorithm), rs)| {
            let n = rs.len() as f64;
            let mean = |f: fn(&ResultRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            MeanRecord {
                dataset,
                algorithm,
                runs: rs.len(),
                accuracy: mean(|r| r.accuracy),
                transform_s: mean(|r| r.transform_s),
                fit_s: mean(|r| r.fit_s),
                predict_s: mean(|r| r.predict_s),
                distance_calls: mean(|r| r.distance_calls as f64),
                feature_count: rs[0].feature_count,
            }
        })
        .collect()
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<bool> {
    let cfg = args.config.resolve()?;
    if args.repeats == 0 {
        bail!(sprocket::Error::InvalidConfig("--repeats must be positive".into()));
    }
    let train = io::load_dataset(&args.train)?;
    let test = io::load_dataset(&args.test)?;
    let mut run = RunOutput {
        records: Vec::new(),
        correctness: Vec::new(),
    };
    let name = train.name().strip_suffix("_TRAIN").unwrap_or(train.name()).to_string();
    run_algorithms(&name, &train, &test, &args.algorithms, &cfg, args.repeats, &mut run)?;
    let algorithms: Vec<String> = args.algorithms.iter().map(ToString::to_string).collect();
    let extra = json!({ "command": "evaluate", "algorithms": algorithms, "repeats": args.repeats });
    write_outputs(&args.out, &run, &cfg, extra.clone())?;
    print_json(&json!({
        "config": cfg,
        "run": extra,
        "records": run.records,
        "mean": means(&run.records),
    }))?;
    Ok(true)
}

#[derive(Serialize)]
struct EntryFailure {
    dataset: String,
    kind: &'static str,
    message: String,
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<bool> {
    let cfg = args.config.resolve()?;
    if args.repeats == 0 {
        bail!(sprocket::Error::InvalidConfig("--repeats must be positive".into()));
    }
    let manifest = DatasetManifest::load(&args.manifest)?;
    let mut run = RunOutput {
        records: Vec::new(),
        correctness: Vec::new(),
    };
    let mut failures = Vec::new();
    let mut skipped = Vec::new();
    for entry in &manifest.entries {
        if !(entry.train.exists() && entry.test.exists()) && args.skip_missing {
            warn!("skipping {}: data files missing", entry.name);
            skipped.push(entry.name.clone());
            continue;
        }
        let result = (|| -> Result<RunOutput> {
            let train = io::load_dataset(&entry.train)?;
            entry.check(&train)?;
            let test = io::load_dataset(&entry.test)?;
            let mut local = RunOutput {
                records: Vec::new(),
                correctness: Vec::new(),
            };
            run_algorithms(&entry.name, &train, &test, &args.algorithms, &cfg, args.repeats, &mut local)?;
            Ok(local)
        })();
        match result {
            Ok(local) => {
                run.records.extend(local.records);
                run.correctness.extend(local.correctness);
            }
            Err(e) => {
                warn!("{}: {e:#}", entry.name);
                failures.push(EntryFailure {
                    dataset: entry.name.clone(),
                    kind: error_kind(&e),
                    message: format!("{e:#}"),
                });
            }
        }
    }
    let algorithms: Vec<String> = args.algorithms.iter().map(ToString::to_string).collect();
    let extra = json!({
        "command": "benchmark",
        "manifest": args.manifest,
        "algorithms": algorithms,
        "repeats": args.repeats,
        "skip_missing": args.skip_missing,
        "failures": failures,
        "skipped": skipped,
    });
    write_outputs(&args.out, &run, &cfg, extra.clone())?;
    print_json(&json!({
        "config": cfg,
        "run": extra,
        "records": run.records,
        "mean": means(&run.records),
    }))?;
    Ok(failures.is_empty())
}

fn read_all_results(paths: &[PathBuf]) -> Result<Vec<ResultRecord>> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(io::read_results(p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(records)
}

/// Keyed by (algorithm, dataset).
type AccuracyTable = BTreeMap<(String, String), f64>;

/// Mean accuracy per (algorithm, dataset) over seeds.
fn accuracy_table(records: &[ResultRecord]) -> (Vec<String>, Vec<String>, AccuracyTable) {
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = sums.entry((r.algorithm.clone(), r.dataset.clone())).or_default();
        e.0 += r.accuracy;
        e.1 += 1;
    }
    let algorithms: BTreeSet<String> = sums.keys().map(|k| k.0.clone()).collect();
    let datasets: BTreeSet<String> = sums.keys().map(|k| k.1.clone()).collect();
    let table = sums.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect();
    (algorithms.into_iter().collect(), datasets.into_iter().collect(), table)
}

fn pair(text: &str) -> Result<(String, String)> {
    match text.split_once(',') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => Ok((a.trim().into(), b.trim().into())),
        _ => bail!(sprocket::Error::InvalidConfig(format!("expected two comma-separated values, got {text:?}"))),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<bool> {
    let win_loss = match &args.win_loss {
        Some(text) => {
            let (w, l) = pair(text)?;
            let parse = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| sprocket::Error::InvalidConfig(format!("{s:?} is not a count")))
            };
            Some((parse(&w)?, parse(&l)?))
        }
        None => None,
    };
    let pairs = args.sign_test.iter().map(|p| pair(p)).collect::<Result<Vec<_>>>()?;
    let records = read_all_results(&args.results)?;
    fs::create_dir_all(&args.output)?;
    let (algorithms, datasets, table) = accuracy_table(&records);
    let mut notices = Vec::new();

    // Rank over datasets every algorithm ran on.
    let complete: Vec<&String> = datasets
        .iter()
        .filter(|d| algorithms.iter().all(|a| table.contains_key(&(a.clone(), (*d).clone()))))
        .collect();
    if complete.len() < datasets.len() {
        notices.push(format!(
            "{} datasets lack results for some algorithm and are left out of the ranks",
            datasets.len() - complete.len()
        ));
    }
    let summary = if complete.is_empty() {
        notices.push("no dataset has results for every algorithm".into());
        None
    } else if algorithms.len() == 1 {
        Some(RankSummary {
            mean_ranks: vec![1.0],
            best_counts: vec![complete.len()],
        })
    } else {
        let rows: Vec<Vec<f64>> = algorithms
            .iter()
            .map(|a| complete.iter().map(|d| table[&(a.clone(), (*d).clone())]).collect())
            .collect();
        Some(sprocket::analysis::average_ranks(&rows)?)
    };
    if let Some(s) = &summary {
        write_rank_table(&algorithms, s, BufWriter::new(File::create(args.output.join("ranks.csv"))?))?;
        let mut w = csv_writer(&args.output.join("accuracy.csv"))?;
        w.write_record(std::iter::once("dataset".to_string()).chain(algorithms.iter().cloned()))?;
        for d in &complete {
            let accs: Vec<f64> = algorithms.iter().map(|a| table[&(a.clone(), (*d).clone())]).collect();
            w.write_record(std::iter::once((*d).clone()).chain(accs.iter().map(|v| v.to_string())))?;
        }
        w.flush()?;
    }

    let mut sign_tests = Vec::new();
    for (a, b) in &pairs {
        let (mut wins, mut losses, mut ties) = (0u64, 0u64, 0u64);
        for d in &datasets {
            match (table.get(&(a.clone(), d.clone())), table.get(&(b.clone(), d.clone()))) {
                (Some(x), Some(y)) if x > y => wins += 1,
                (Some(x), Some(y)) if x < y => losses += 1,
                (Some(_), Some(_)) => ties += 1,
                _ => {}
            }
        }
        if wins + losses + ties == 0 {
            bail!(sprocket::Error::MissingColumns(format!("no shared datasets for {a} and {b}")));
        }
        sign_tests.push(json!({
            "a": a, "b": b, "wins": wins, "losses": losses, "ties": ties,
            "p_value": sign_test(wins, losses),
        }));
    }
    if let Some((w, l)) = win_loss {
        sign_tests.push(json!({ "wins": w, "losses": l, "p_value": sign_test(w, l) }));
    }

    let mut grids = Vec::new();
    if !args.correctness.is_empty() {
        let mut rows = Vec::new();
        for p in &args.correctness {
            rows.extend(io::read_correctness(p).with_context(|| format!("reading {}", p.display()))?);
        }
        let vectors = io::correctness_vectors(&rows);
        let names: Vec<String> = vectors.keys().map(|k| k.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        if names.len() < 2 {
            notices.push("ensemble grids need at least two algorithms; skipped".into());
        } else {
            grids = write_grids(&names, &vectors, &args.output)?;
            if grids.is_empty() {
                notices.push("no (dataset, seed) has correctness for every algorithm; grids skipped".into());
            }
        }
    } else if algorithms.len() > 1 {
        notices.push("no correctness sidecar given; grids skipped".into());
    }

    for n in &notices {
        warn!("{n}");
    }
    print_json(&json!({
        "algorithms": algorithms,
        "datasets_ranked": complete.len(),
        "mean_ranks": summary.as_ref().map(|s| &s.mean_ranks),
        "best_counts": summary.as_ref().map(|s| &s.best_counts),
        "sign_tests": sign_tests,
        "grids": grids,
        "notices": notices,
    }))?;
    Ok(true)
}

/// Writes pooled and per-dataset-averaged grids for every statistic and
/// returns the file names.
fn write_grids(
    names: &[String],
    vectors: &BTreeMap<(String, String, u64), Vec<bool>>,
    dir: &Path,
) -> Result<Vec<String>> {
    // (dataset, seed) runs that every algorithm has, with equal lengths
    let runs: BTreeSet<(String, u64)> = vectors.keys().map(|k| (k.0.clone(), k.2)).collect();
    let shared: Vec<&(String, u64)> = runs
        .iter()
        .filter(|(d, s)| {
            let lens: BTreeSet<usize> = names
                .iter()
                .filter_map(|a| vectors.get(&(d.clone(), a.clone(), *s)).map(Vec::len))
                .collect();
            lens.len() == 1 && names.iter().all(|a| vectors.contains_key(&(d.clone(), a.clone(), *s)))
        })
        .collect();
    if shared.is_empty() {
        return Ok(Vec::new());
    }
    let get = |d: &str, a: &str, s: u64| &vectors[&(d.to_string(), a.to_string(), s)];
    let pooled: Vec<Vec<bool>> = names
        .iter()
        .map(|a| shared.iter().flat_map(|(d, s)| get(d, a, *s).iter().copied()).collect())
        .collect();
    let mut per_dataset: BTreeMap<&str, Vec<Vec<bool>>> = BTreeMap::new();
    for (d, s) in &shared {
        let entry = per_dataset.entry(d.as_str()).or_insert_with(|| vec![Vec::new(); names.len()]);
        for (i, a) in names.iter().enumerate() {
            entry[i].extend(get(d, a, *s));
        }
    }
    let per_dataset: Vec<Vec<Vec<bool>>> = per_dataset.into_values().collect();
    let mut files = Vec::new();
    for stat in Statistic::ALL {
        for (label, grid) in [
            ("pooled", pooled_grid(names, &pooled, stat)?),
            ("averaged", averaged_grid(names, &per_dataset, stat)?),
        ] {
            let file = format!("grid_{}_{label}.csv", stat.name());
            grid.write_csv(BufWriter::new(File::create(dir.join(&file))?))?;
            files.push(file);
        }
    }
    Ok(files)
}
