//! The `boss` command line: simulate synthetic datasets from random
//! causal models, search datasets for causal structure, evaluate
//! estimated graphs against the truth, and run benchmark grids end to
//! end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags or requests
//! the configuration cannot satisfy), 2 for data errors (unreadable,
//! malformed, or degenerate inputs).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use boss_cli::io;
use boss_cli::manifest::{
    self, BenchConfig, BenchManifest, BenchOutputs, EvalConfig, EvalManifest, EvalOutputs,
    RunInfo, SearchConfigInfo, SearchManifest, SearchOutputs, SearchResult, SimulateConfig,
    SimulateManifest, SimulateOutputs,
};
use boss_cli::CliError;
use boss_core::{
    boss, covariance_from_data, er_dag, evaluate, mix_seed, rep_seeds, sample_sem, sf_dag,
    shuffle_columns, BicScore, BossOutcome, Dag, DataMatrix, EvalReport, NoiseFamily, Pdag,
    Permutation, SearchConfig, SearchError, SimError,
};

#[derive(Parser)]
#[command(
    name = "boss",
    version,
    about = "Permutation-based causal discovery: simulate, search, evaluate, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random DAG and a linear dataset from it
    Simulate(SimulateArgs),
    /// Estimate a CPDAG from a dataset
    Search(SearchArgs),
    /// Score an estimated graph against the true DAG
    Eval(EvalArgs),
    /// Run simulate -> search -> eval over a grid and aggregate
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphKind {
    /// Uniform random DAG with a fixed edge budget
    Er,
    /// Scale-free DAG grown by preferential attachment
    Sf,
}

impl GraphKind {
    fn as_str(self) -> &'static str {
        match self {
            GraphKind::Er => "er",
            GraphKind::Sf => "sf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseKind {
    Gaussian,
    Gumbel,
    Exponential,
}

impl NoiseKind {
    fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Gumbel => "gumbel",
            NoiseKind::Exponential => "exponential",
        }
    }

    fn family(self) -> NoiseFamily {
        match self {
            NoiseKind::Gaussian => NoiseFamily::Gaussian,
            NoiseKind::Gumbel => NoiseFamily::Gumbel,
            NoiseKind::Exponential => NoiseFamily::Exponential,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of variables
    #[arg(long)]
    p: usize,
    /// Average degree of the sampled DAG
    #[arg(long)]
    avg_degree: f64,
    /// Graph family
    #[arg(long, value_enum)]
    graph: GraphKind,
    /// Noise distribution (standardized to zero mean, unit variance)
    #[arg(long, value_enum, default_value_t = NoiseKind::Gaussian)]
    noise: NoiseKind,
    /// Number of rows to sample
    #[arg(long)]
    n: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving graph.txt, data.csv, shuffle.csv, manifest.txt
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    /// Input dataset: CSV with a header row, one column per variable
    #[arg(long)]
    data: PathBuf,
    /// Sparsity penalty multiplier in the Gaussian score
    #[arg(long, default_value_t = 2.0)]
    penalty_discount: f64,
    /// Prune the final class with backward edge deletions
    #[arg(long)]
    bes: bool,
    /// Independent restarts; the best-scoring class wins
    #[arg(long, default_value_t = 1)]
    num_starts: usize,
    /// RNG seed for restart orderings
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Accepted and recorded; the search always runs its deterministic
    /// single-worker schedule, so the result never depends on this
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Clear grow-shrink trees whenever their cached nodes exceed this
    /// count, trading repeated score evaluations for bounded memory
    #[arg(long)]
    gst_node_cap: Option<usize>,
    /// Output graph file; manifest.txt is written next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// True DAG file
    #[arg(long)]
    true_graph: PathBuf,
    /// Estimated graph file (CPDAG)
    #[arg(long)]
    est_graph: PathBuf,
    /// Dataset used for the score gap column
    #[arg(long)]
    data: PathBuf,
    /// Sparsity penalty multiplier in the Gaussian score
    #[arg(long, default_value_t = 2.0)]
    penalty_discount: f64,
    /// Column-shuffle map written at simulation time; maps the estimate
    /// and the data back into the true graph's variable space
    #[arg(long)]
    shuffle: Option<PathBuf>,
    /// Search manifest whose elapsed seconds fill the report's seconds
    /// column (NA when omitted)
    #[arg(long)]
    search_manifest: Option<PathBuf>,
    /// Output report CSV; manifest.txt is written next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Repetitions per grid cell
    #[arg(long)]
    reps: usize,
    /// Grid axis: numbers of variables
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<usize>,
    /// Grid axis: average degrees
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    avg_degree: Vec<f64>,
    /// Grid axis: graph families
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., default_values_t = [GraphKind::Er])]
    graph: Vec<GraphKind>,
    /// Grid axis: noise distributions
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., default_values_t = [NoiseKind::Gaussian])]
    noise: Vec<NoiseKind>,
    /// Rows per dataset
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Base seed; every per-cell and per-repetition seed derives from it
    /// (the derivation is documented in the manifest)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sparsity penalty multiplier in the Gaussian score
    #[arg(long, default_value_t = 2.0)]
    penalty_discount: f64,
    /// Prune each final class with backward edge deletions
    #[arg(long)]
    bes: bool,
    /// Independent restarts per search
    #[arg(long, default_value_t = 1)]
    num_starts: usize,
    /// Accepted and recorded; repetitions run sequentially in cell and
    /// repetition order, so the results never depend on this
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Directory receiving runs.csv, summary.csv, summary.txt,
    /// manifest.txt
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Search(args) => cmd_search(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::BadConfig(msg) => CliError::Usage(msg),
        other => CliError::Data(other.to_string()),
    }
}

fn search_error(e: SearchError) -> CliError {
    match e {
        SearchError::BadConfig(msg) => CliError::Usage(msg),
        other => CliError::Data(other.to_string()),
    }
}

fn data_error(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn check_penalty(penalty_discount: f64) -> Result<(), CliError> {
    if penalty_discount.is_finite() && penalty_discount > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--penalty-discount must be a positive number, got {penalty_discount}"
        )))
    }
}

fn check_threads(threads: usize) -> Result<(), CliError> {
    if threads >= 1 {
        Ok(())
    } else {
        Err(CliError::Usage("--threads must be at least 1".into()))
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

/// manifest.txt in the same directory as `out`.
fn sibling_manifest(out: &Path) -> PathBuf {
    match out.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join("manifest.txt"),
        _ => PathBuf::from("manifest.txt"),
    }
}

/// Creates the directory an output file goes into.
fn create_parent_dir(out: &Path) -> Result<(), CliError> {
    match out.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => create_dir(dir),
        _ => Ok(()),
    }
}

struct SimOutput {
    truth: Dag,
    /// Sampled rows with their columns shuffled.
    data: DataMatrix,
    /// Entry j is the shuffled position of original variable j.
    map: Vec<usize>,
}

/// One dataset draw: random order, random DAG, linear model sample,
/// column shuffle — all from a single seeded stream.
fn run_simulation(
    p: usize,
    avg_degree: f64,
    graph: GraphKind,
    noise: NoiseKind,
    n: usize,
    seed: u64,
) -> Result<SimOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = Permutation::random(p, &mut rng);
    let truth = match graph {
        GraphKind::Er => er_dag(p, &order, avg_degree, &mut rng),
        GraphKind::Sf => sf_dag(p, &order, avg_degree, &mut rng),
    }
    .map_err(sim_error)?;
    let (data, _model) = sample_sem(&truth, n, noise.family(), &mut rng).map_err(sim_error)?;
    let (data, map) = shuffle_columns(&data, &mut rng);
    Ok(SimOutput { truth, data, map })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let sim = run_simulation(args.p, args.avg_degree, args.graph, args.noise, args.n, args.seed)?;
    create_dir(&args.out_dir)?;
    let graph_path = args.out_dir.join("graph.txt");
    let data_path = args.out_dir.join("data.csv");
    let shuffle_path = args.out_dir.join("shuffle.csv");
    io::write_graph(&graph_path, &Pdag::from_dag(&sim.truth))?;
    io::write_data_csv(&data_path, &sim.data)?;
    io::write_shuffle_csv(&shuffle_path, &sim.map)?;
    let m = SimulateManifest {
        run: RunInfo::new("simulate", simulate_invocation(args)),
        config: SimulateConfig {
            num_vars: args.p,
            avg_degree: args.avg_degree,
            graph: args.graph.as_str().into(),
            noise: args.noise.as_str().into(),
            sample_size: args.n,
            seed: args.seed,
        },
        outputs: SimulateOutputs {
            graph: graph_path.display().to_string(),
            data: data_path.display().to_string(),
            shuffle: shuffle_path.display().to_string(),
        },
    };
    manifest::write_manifest(&args.out_dir.join("manifest.txt"), &m)?;
    println!(
        "simulated {} variables, {} edges, {} rows -> {}",
        args.p,
        sim.truth.num_edges(),
        args.n,
        args.out_dir.display()
    );
    Ok(())
}

fn simulate_invocation(a: &SimulateArgs) -> Vec<String> {
    vec![
        "simulate".into(),
        "--p".into(),
        a.p.to_string(),
        "--avg-degree".into(),
        a.avg_degree.to_string(),
        "--graph".into(),
        a.graph.as_str().into(),
        "--noise".into(),
        a.noise.as_str().into(),
        "--n".into(),
        a.n.to_string(),
        "--seed".into(),
        a.seed.to_string(),
        "--out-dir".into(),
        a.out_dir.display().to_string(),
    ]
}

/// Covariance + penalized Gaussian score + search, timed.
fn run_search(
    data: &DataMatrix,
    penalty_discount: f64,
    bes: bool,
    num_starts: usize,
    seed: u64,
    gst_node_cap: Option<usize>,
) -> Result<(BossOutcome, f64), CliError> {
    let model = covariance_from_data(data).map_err(data_error)?;
    let score = Arc::new(BicScore::new(model, penalty_discount));
    let cfg = SearchConfig {
        num_starts,
        seed,
        use_bes: bes,
        initial_order: None,
        gst_node_cap,
    };
    let start = Instant::now();
    let outcome = boss(score, &cfg).map_err(search_error)?;
    Ok((outcome, start.elapsed().as_secs_f64()))
}

fn cmd_search(args: &SearchArgs) -> Result<(), CliError> {
    check_penalty(args.penalty_discount)?;
    check_threads(args.threads)?;
    let data = io::read_data_csv(&args.data)?;
    io::reject_constant_columns(&args.data, &data)?;
    let (outcome, elapsed) = run_search(
        &data,
        args.penalty_discount,
        args.bes,
        args.num_starts,
        args.seed,
        args.gst_node_cap,
    )?;
    create_parent_dir(&args.out)?;
    io::write_graph(&args.out, &outcome.cpdag)?;
    let m = SearchManifest {
        run: RunInfo::new("search", search_invocation(args)),
        config: SearchConfigInfo {
            data: args.data.display().to_string(),
            penalty_discount: args.penalty_discount,
            bes: args.bes,
            num_starts: args.num_starts,
            seed: args.seed,
            threads: args.threads,
            gst_node_cap: args.gst_node_cap,
        },
        outputs: SearchOutputs {
            graph: args.out.display().to_string(),
        },
        result: SearchResult {
            elapsed_seconds: elapsed,
            score: outcome.score,
            num_vars: outcome.cpdag.num_vars(),
            num_edges: outcome.cpdag.num_edges(),
        },
    };
    manifest::write_manifest(&sibling_manifest(&args.out), &m)?;
    println!("elapsed seconds: {elapsed:.3}");
    Ok(())
}

fn search_invocation(a: &SearchArgs) -> Vec<String> {
    let mut v: Vec<String> = vec![
        "search".into(),
        "--data".into(),
        a.data.display().to_string(),
        "--penalty-discount".into(),
        a.penalty_discount.to_string(),
    ];
    if a.bes {
        v.push("--bes".into());
    }
    v.extend([
        "--num-starts".into(),
        a.num_starts.to_string(),
        "--seed".into(),
        a.seed.to_string(),
        "--threads".into(),
        a.threads.to_string(),
    ]);
    if let Some(cap) = a.gst_node_cap {
        v.extend(["--gst-node-cap".into(), cap.to_string()]);
    }
    v.extend(["--out".into(), a.out.display().to_string()]);
    v
}

const REPORT_HEADER: &str = "adj_pre,adj_rec,ori_pre,ori_rec,delta_bic,edges,seconds";

fn report_row(report: &EvalReport, edges: usize, seconds: Option<f64>) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        io::ratio_field(report.adjacency_precision),
        io::ratio_field(report.adjacency_recall),
        io::ratio_field(report.orientation_precision),
        io::ratio_field(report.orientation_recall),
        report.delta_bic,
        edges,
        io::ratio_field(seconds),
    )
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    check_penalty(args.penalty_discount)?;
    let truth = io::read_dag(&args.true_graph)?;
    let mut est = io::read_graph(&args.est_graph)?;
    if est.num_vars() != truth.num_vars() {
        return Err(CliError::Data(format!(
            "variable counts differ: {} has {} but {} has {}",
            args.true_graph.display(),
            truth.num_vars(),
            args.est_graph.display(),
            est.num_vars(),
        )));
    }
    let mut data = io::read_data_csv(&args.data)?;
    if data.num_cols() != truth.num_vars() {
        return Err(CliError::Data(format!(
            "variable counts differ: {} has {} but {} has {} columns",
            args.true_graph.display(),
            truth.num_vars(),
            args.data.display(),
            data.num_cols(),
        )));
    }
    if let Some(path) = &args.shuffle {
        let map = io::read_shuffle_csv(path, truth.num_vars())?;
        let inverse = io::invert_map(&map);
        est = io::relabel_graph(&est, &inverse);
        data = data.permute_columns(&inverse);
    }
    io::reject_constant_columns(&args.data, &data)?;
    let model = covariance_from_data(&data).map_err(data_error)?;
    let score = BicScore::new(model, args.penalty_discount);
    let report = evaluate(&score, &truth, &est).map_err(data_error)?;
    let seconds = match &args.search_manifest {
        Some(path) => Some(
            manifest::read_manifest::<SearchManifest>(path)?
                .result
                .elapsed_seconds,
        ),
        None => None,
    };
    let row = report_row(&report, est.num_edges(), seconds);
    create_parent_dir(&args.out)?;
    io::write_file(&args.out, &format!("{REPORT_HEADER}\n{row}\n"))?;
    let m = EvalManifest {
        run: RunInfo::new("eval", eval_invocation(args)),
        config: EvalConfig {
            true_graph: args.true_graph.display().to_string(),
            est_graph: args.est_graph.display().to_string(),
            data: args.data.display().to_string(),
            penalty_discount: args.penalty_discount,
            shuffle: args.shuffle.as_ref().map(|p| p.display().to_string()),
            search_manifest: args
                .search_manifest
                .as_ref()
                .map(|p| p.display().to_string()),
        },
        outputs: EvalOutputs {
            report: args.out.display().to_string(),
        },
    };
    manifest::write_manifest(&sibling_manifest(&args.out), &m)?;
    println!("{row}");
    Ok(())
}

fn eval_invocation(a: &EvalArgs) -> Vec<String> {
    let mut v: Vec<String> = vec![
        "eval".into(),
        "--true-graph".into(),
        a.true_graph.display().to_string(),
        "--est-graph".into(),
        a.est_graph.display().to_string(),
        "--data".into(),
        a.data.display().to_string(),
        "--penalty-discount".into(),
        a.penalty_discount.to_string(),
    ];
    if let Some(p) = &a.shuffle {
        v.extend(["--shuffle".into(), p.display().to_string()]);
    }
    if let Some(p) = &a.search_manifest {
        v.extend(["--search-manifest".into(), p.display().to_string()]);
    }
    v.extend(["--out".into(), a.out.display().to_string()]);
    v
}

/// One grid cell of a benchmark run.
struct Cell {
    graph: GraphKind,
    p: usize,
    avg_degree: f64,
    noise: NoiseKind,
}

/// The measured columns of one repetition.
struct RepMetrics {
    adj_pre: Option<f64>,
    adj_rec: Option<f64>,
    ori_pre: Option<f64>,
    ori_rec: Option<f64>,
    delta_bic: f64,
    edges: usize,
    seconds: f64,
}

/// Mean and sample standard deviation of the defined values; the
/// deviation of fewer than two values is 0 by convention.
fn mean_sd(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let xs: Vec<f64> = values.iter().filter_map(|&x| x).collect();
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(sd))
}

/// `mean (sd)` with a fixed number of decimals, or `NA` when undefined.
fn pair_field(mean: Option<f64>, sd: Option<f64>, decimals: usize) -> String {
    match (mean, sd) {
        (Some(m), Some(s)) => format!("{m:.decimals$} ({s:.decimals$})"),
        _ => "NA".to_string(),
    }
}

fn csv_stat(x: Option<f64>) -> String {
    io::ratio_field(x)
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    check_penalty(args.penalty_discount)?;
    check_threads(args.threads)?;

    let mut cells = Vec::new();
    for &graph in &args.graph {
        for &p in &args.p {
            for &avg_degree in &args.avg_degree {
                for &noise in &args.noise {
                    cells.push(Cell {
                        graph,
                        p,
                        avg_degree,
                        noise,
                    });
                }
            }
        }
    }

    create_dir(&args.out_dir)?;
    let mut runs_csv = String::from(
        "graph,p,avg_degree,noise,rep,adj_pre,adj_rec,ori_pre,ori_rec,delta_bic,edges,seconds\n",
    );
    let mut summary_csv = String::from(
        "graph,p,avg_degree,noise,reps,\
         adj_pre_mean,adj_pre_sd,adj_rec_mean,adj_rec_sd,\
         ori_pre_mean,ori_pre_sd,ori_rec_mean,ori_rec_sd,\
         delta_bic_mean,delta_bic_sd,edges_mean,edges_sd,seconds_mean,seconds_sd\n",
    );
    let mut table = format!(
        "{:<5} {:>5} {:>6} {:<11} {:>15} {:>15} {:>15} {:>15} {:>19} {:>15} {:>15}\n",
        "graph", "p", "deg", "noise", "adj_pre", "adj_rec", "ori_pre", "ori_rec", "delta_bic",
        "edges", "seconds"
    );

    for (cell_index, cell) in cells.iter().enumerate() {
        let cell_seed = mix_seed(args.seed, cell_index as u64);
        let mut reps: Vec<RepMetrics> = Vec::with_capacity(args.reps);
        for rep in 0..args.reps {
            let (sim_seed, search_seed) = rep_seeds(cell_seed, rep as u64);
            let metrics = bench_rep(args, cell, sim_seed, search_seed)?;
            writeln!(
                runs_csv,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                cell.graph.as_str(),
                cell.p,
                cell.avg_degree,
                cell.noise.as_str(),
                rep,
                io::ratio_field(metrics.adj_pre),
                io::ratio_field(metrics.adj_rec),
                io::ratio_field(metrics.ori_pre),
                io::ratio_field(metrics.ori_rec),
                metrics.delta_bic,
                metrics.edges,
                metrics.seconds,
            )
            .expect("string write");
            reps.push(metrics);
        }

        let adj_pre = mean_sd(&reps.iter().map(|r| r.adj_pre).collect::<Vec<_>>());
        let adj_rec = mean_sd(&reps.iter().map(|r| r.adj_rec).collect::<Vec<_>>());
        let ori_pre = mean_sd(&reps.iter().map(|r| r.ori_pre).collect::<Vec<_>>());
        let ori_rec = mean_sd(&reps.iter().map(|r| r.ori_rec).collect::<Vec<_>>());
        let dbic = mean_sd(&reps.iter().map(|r| Some(r.delta_bic)).collect::<Vec<_>>());
        let edges = mean_sd(&reps.iter().map(|r| Some(r.edges as f64)).collect::<Vec<_>>());
        let secs = mean_sd(&reps.iter().map(|r| Some(r.seconds)).collect::<Vec<_>>());

        writeln!(
            summary_csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            cell.graph.as_str(),
            cell.p,
            cell.avg_degree,
            cell.noise.as_str(),
            args.reps,
            csv_stat(adj_pre.0),
            csv_stat(adj_pre.1),
            csv_stat(adj_rec.0),
            csv_stat(adj_rec.1),
            csv_stat(ori_pre.0),
            csv_stat(ori_pre.1),
            csv_stat(ori_rec.0),
            csv_stat(ori_rec.1),
            csv_stat(dbic.0),
            csv_stat(dbic.1),
            csv_stat(edges.0),
            csv_stat(edges.1),
            csv_stat(secs.0),
            csv_stat(secs.1),
        )
        .expect("string write");
        writeln!(
            table,
            "{:<5} {:>5} {:>6} {:<11} {:>15} {:>15} {:>15} {:>15} {:>19} {:>15} {:>15}",
            cell.graph.as_str(),
            cell.p,
            cell.avg_degree,
            cell.noise.as_str(),
            pair_field(adj_pre.0, adj_pre.1, 3),
            pair_field(adj_rec.0, adj_rec.1, 3),
            pair_field(ori_pre.0, ori_pre.1, 3),
            pair_field(ori_rec.0, ori_rec.1, 3),
            pair_field(dbic.0, dbic.1, 2),
            pair_field(edges.0, edges.1, 1),
            pair_field(secs.0, secs.1, 3),
        )
        .expect("string write");
    }

    let runs_path = args.out_dir.join("runs.csv");
    let summary_path = args.out_dir.join("summary.csv");
    let table_path = args.out_dir.join("summary.txt");
    io::write_file(&runs_path, &runs_csv)?;
    io::write_file(&summary_path, &summary_csv)?;
    io::write_file(&table_path, &table)?;
    let m = BenchManifest {
        seed_derivation: manifest::seed_derivation_text(),
        run: RunInfo::new("bench", bench_invocation(args)),
        config: BenchConfig {
            reps: args.reps,
            num_vars: args.p.clone(),
            avg_degree: args.avg_degree.clone(),
            graph: args.graph.iter().map(|g| g.as_str().to_string()).collect(),
            noise: args.noise.iter().map(|n| n.as_str().to_string()).collect(),
            sample_size: args.n,
            seed: args.seed,
            penalty_discount: args.penalty_discount,
            bes: args.bes,
            num_starts: args.num_starts,
            threads: args.threads,
        },
        outputs: BenchOutputs {
            runs: runs_path.display().to_string(),
            summary: summary_path.display().to_string(),
            table: table_path.display().to_string(),
        },
    };
    manifest::write_manifest(&args.out_dir.join("manifest.txt"), &m)?;
    print!("{table}");
    Ok(())
}

/// One repetition of one cell, entirely in process: the search sees the
/// shuffled columns exactly as it would read them back from disk, and
/// the evaluation maps its estimate into the true graph's variable
/// space through the shuffle map, as the file-based pipeline does.
fn bench_rep(
    args: &BenchArgs,
    cell: &Cell,
    sim_seed: u64,
    search_seed: u64,
) -> Result<RepMetrics, CliError> {
    let sim = run_simulation(cell.p, cell.avg_degree, cell.graph, cell.noise, args.n, sim_seed)?;
    let (outcome, seconds) = run_search(
        &sim.data,
        args.penalty_discount,
        args.bes,
        args.num_starts,
        search_seed,
        None,
    )?;
    let inverse = io::invert_map(&sim.map);
    let est = io::relabel_graph(&outcome.cpdag, &inverse);
    let data = sim.data.permute_columns(&inverse);
    let model = covariance_from_data(&data).map_err(data_error)?;
    let score = BicScore::new(model, args.penalty_discount);
    let report = evaluate(&score, &sim.truth, &est).map_err(data_error)?;
    Ok(RepMetrics {
        adj_pre: report.adjacency_precision,
        adj_rec: report.adjacency_recall,
        ori_pre: report.orientation_precision,
        ori_rec: report.orientation_recall,
        delta_bic: report.delta_bic,
        edges: est.num_edges(),
        seconds,
    })
}

fn bench_invocation(a: &BenchArgs) -> Vec<String> {
    let join = |parts: Vec<String>| parts.join(",");
    let mut v: Vec<String> = vec![
        "bench".into(),
        "--reps".into(),
        a.reps.to_string(),
        "--p".into(),
        join(a.p.iter().map(|x| x.to_string()).collect()),
        "--avg-degree".into(),
        join(a.avg_degree.iter().map(|x| x.to_string()).collect()),
        "--graph".into(),
        join(a.graph.iter().map(|g| g.as_str().to_string()).collect()),
        "--noise".into(),
        join(a.noise.iter().map(|n| n.as_str().to_string()).collect()),
        "--n".into(),
        a.n.to_string(),
        "--seed".into(),
        a.seed.to_string(),
        "--penalty-discount".into(),
        a.penalty_discount.to_string(),
    ];
    if a.bes {
        v.push("--bes".into());
    }
    v.extend([
        "--num-starts".into(),
        a.num_starts.to_string(),
        "--threads".into(),
        a.threads.to_string(),
        "--out-dir".into(),
        a.out_dir.display().to_string(),
    ]);
    v
}
