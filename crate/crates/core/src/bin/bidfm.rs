use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bidfm::detect::{detect, Algorithm, DetectOptions, Regularizer, Threshold};
use bidfm::experiments::{
    estimate_k_eigengap, filter_zero_degree, preset, run_simulation, FilterMode, SimulationConfig,
};
use bidfm::interface::{
    eigengap_csv, filter_summary_csv, index_list, matrix_from_str, metrics_csv, read_edge_list_str,
    read_labels, write_atomic, write_edge_list, write_labels, write_matrix, EdgeListOptions,
    IdUniverse, LabelFile, ReportFormat,
};
use bidfm::metrics::combined_report;
use bidfm::model::ModelConfig;
use bidfm::sampling::sample_adjacency;
use bidfm::theory::{gamma_tau, theory_report, TheoryInputs};
use bidfm::{Error, Matrix, Membership};

#[derive(Parser)]
#[command(name = "bidfm", version, about = "Community detection for weighted bipartite networks")]
struct Cli {
    /// Seed for every random choice; overrides seeds in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or directory for commands that write several files.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Delimiter of CSV reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Build Ω from a model config and optionally sample A.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Write only Ω and the true labels.
        #[arg(long)]
        population: bool,
        /// Also write A as an edge list.
        #[arg(long)]
        edges: bool,
    },
    /// Cluster rows and columns of A.
    Detect {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "alg", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(long)]
        kr: usize,
        #[arg(long)]
        kc: usize,
        #[arg(long)]
        restarts: Option<usize>,
        /// Laplacian regularizer; mean degree when omitted.
        #[arg(long)]
        tau: Option<f64>,
        /// D-SCORE clipping bound; log(n) when omitted.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Compare estimated label files with the truth.
    Evaluate {
        #[arg(long)]
        est_rows: PathBuf,
        #[arg(long)]
        true_rows: PathBuf,
        #[arg(long)]
        est_cols: PathBuf,
        #[arg(long)]
        true_cols: PathBuf,
    },
    /// Run a simulation sweep.
    Simulate {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Also write the long-format report here.
        #[arg(long)]
        long: Option<PathBuf>,
    },
    /// Suggest the number of clusters from singular value ratios.
    EstimateK {
        #[command(flatten)]
        input: InputArgs,
        /// Number of leading singular values inspected.
        #[arg(long, default_value_t = 10)]
        m: usize,
    },
    /// Remove zero-degree nodes.
    Preprocess {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_parser = parse_mode)]
        mode: FilterMode,
    },
    /// Evaluate assumptions, noise bound and envelopes.
    Theory {
        /// Precomputed inputs.
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        inputs: Option<PathBuf>,
        /// Model config with a distribution; inputs are derived from it.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Treat `--inputs` as degree-corrected.
        #[arg(long)]
        degree_corrected: bool,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        c_alpha: f64,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file, or edge list (detected by its header or forced with --edge-list).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    edge_list: bool,
    #[arg(long, default_value_t = '\t')]
    delimiter: char,
    /// The edge list has a header record.
    #[arg(long)]
    header: bool,
    /// Rows and columns share one id universe (directed network).
    #[arg(long)]
    shared_ids: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<FilterMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome = Result<(), Failure>;

struct Loaded {
    matrix: Matrix,
    row_ids: Option<Vec<String>>,
    col_ids: Option<Vec<String>>,
}

fn load(input: &InputArgs) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(&input.input)?;
    let is_edges = input.edge_list || text.starts_with("# bidfm-edges");
    if !is_edges {
        return Ok(Loaded {
            matrix: matrix_from_str(&text)?,
            row_ids: None,
            col_ids: None,
        });
    }
    if !input.delimiter.is_ascii() {
        return Err(Failure::Usage("the delimiter must be an ASCII character".into()));
    }
    let opts = EdgeListOptions {
        delimiter: input.delimiter as u8,
        header: input.header,
        universe: if input.shared_ids {
            IdUniverse::Shared
        } else {
            IdUniverse::Separate
        },
    };
    let read = read_edge_list_str(&text, &opts)?;
    if read.duplicates > 0 {
        eprintln!(
            "warning: {} duplicate edges in {} were summed",
            read.duplicates,
            input.input.display()
        );
    }
    Ok(Loaded {
        matrix: read.matrix,
        row_ids: Some(read.row_ids),
        col_ids: Some(read.col_ids),
    })
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn out_dir(output: Option<&Path>) -> Result<PathBuf, Failure> {
    let dir = output.map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Reorders `est` to follow the ids of `truth` when both files list the same nodes.
fn align(est: LabelFile, truth: &LabelFile) -> Result<Membership, Failure> {
    if est.ids == truth.ids {
        return Ok(est.membership);
    }
    let pos: std::collections::HashMap<&str, usize> =
        est.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut labels = Vec::with_capacity(truth.ids.len());
    for id in &truth.ids {
        let &i = pos.get(id.as_str()).ok_or_else(|| {
            Error::Dimension(format!("node {id:?} has no estimated label"))
        })?;
        labels.push(est.membership.labels()[i]);
    }
    if est.ids.len() != truth.ids.len() {
        return Err(Error::Dimension("label files cover different nodes".into()).into());
    }
    Ok(Membership::new(labels, est.membership.k())?)
}

fn run(cli: Cli) -> Outcome {
    let format = match cli.format {
        Format::Csv => ReportFormat::Csv,
        Format::Tsv => ReportFormat::Tsv,
    };
    let output = cli.output.as_deref();
    match cli.command {
        Command::Generate {
            config,
            population,
            edges,
        } => {
            let mut cfg = ModelConfig::from_toml(&std::fs::read_to_string(&config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let params = cfg.build()?;
            let omega = params.expected_adjacency()?;
            let dir = out_dir(output)?;
            write_matrix(&dir.join("omega.txt"), &omega)?;
            write_labels(&dir.join("row_labels.tsv"), params.row(), None)?;
            write_labels(&dir.join("col_labels.tsv"), params.col(), None)?;
            if !population {
                let dist = cfg.distribution.ok_or_else(|| {
                    Failure::Usage("the config has no distribution; pass --population".into())
                })?;
                let a = sample_adjacency(&omega, &dist, cfg.seed)?;
                write_matrix(&dir.join("adjacency.txt"), &a)?;
                if edges {
                    write_edge_list(&dir.join("adjacency.edges.tsv"), &a)?;
                }
            }
            Ok(())
        }
        Command::Detect {
            input,
            algorithm,
            kr,
            kc,
            restarts,
            tau,
            threshold,
        } => {
            let loaded = load(&input)?;
            let mut opts = DetectOptions::with_seed(cli.seed.unwrap_or(0));
            if let Some(r) = restarts {
                opts.restarts = r;
            }
            if let Some(t) = tau {
                opts.regularizer = Regularizer::Value(t);
            }
            if let Some(t) = threshold {
                opts.threshold = Threshold::Value(t);
            }
            let result = detect(algorithm, &loaded.matrix, kr, kc, &opts)?;
            let dir = out_dir(output)?;
            write_labels(&dir.join("row_labels.tsv"), &result.row_labels, loaded.row_ids.as_deref())?;
            write_labels(&dir.join("col_labels.tsv"), &result.col_labels, loaded.col_ids.as_deref())?;
            let d = &result.diagnostics;
            let mut summary = String::from(
                "# bidfm-detect v1\nalgorithm,rows,cols,k_r,k_c,row_objective,col_objective,shift,degenerate_rows,degenerate_cols\n",
            );
            let _ = writeln!(
                summary,
                "{algorithm},{},{},{kr},{kc},{},{},{},{},{}",
                loaded.matrix.rows(),
                loaded.matrix.cols(),
                d.row_objective,
                d.col_objective,
                d.shift,
                d.degenerate_rows.len(),
                d.degenerate_cols.len()
            );
            print!("{}", format.apply(&summary));
            Ok(())
        }
        Command::Evaluate {
            est_rows,
            true_rows,
            est_cols,
            true_cols,
        } => {
            let tr = read_labels(&true_rows)?;
            let tc = read_labels(&true_cols)?;
            let er = align(read_labels(&est_rows)?, &tr)?;
            let ec = align(read_labels(&est_cols)?, &tc)?;
            let report = combined_report(&er, &tr.membership, &ec, &tc.membership)?;
            emit(output, &format.apply(&metrics_csv(&report)))
        }
        Command::Simulate {
            preset: name,
            config,
            replicates,
            long,
        } => {
            let mut cfg = match (name, config) {
                (Some(name), _) => preset(&name)?,
                (None, Some(path)) => SimulationConfig::from_toml(&std::fs::read_to_string(path)?)?,
                (None, None) => return Err(Failure::Usage("pass --preset or --config".into())),
            };
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            let report = run_simulation(&cfg)?;
            if let Some(path) = long {
                write_atomic(&path, format.apply(&report.to_long_csv()).as_bytes())?;
            }
            emit(output, &format.apply(&report.to_csv()))
        }
        Command::EstimateK { input, m } => {
            let loaded = load(&input)?;
            let m = m.min(loaded.matrix.rows().min(loaded.matrix.cols()));
            let e = estimate_k_eigengap(&loaded.matrix, m)?;
            eprintln!("suggested K = {}", e.k);
            emit(output, &format.apply(&eigengap_csv(&e)))
        }
        Command::Preprocess { input, mode } => {
            let loaded = load(&input)?;
            let f = filter_zero_degree(&loaded.matrix, mode)?;
            let dir = out_dir(output)?;
            write_matrix(&dir.join("filtered.txt"), &f.matrix)?;
            let (ri, ci) = (loaded.row_ids.as_deref(), loaded.col_ids.as_deref());
            for (name, idx, ids) in [
                ("kept_rows.txt", &f.kept_rows, ri),
                ("kept_cols.txt", &f.kept_cols, ci),
                ("removed_rows.txt", &f.removed_rows, ri),
                ("removed_cols.txt", &f.removed_cols, ci),
            ] {
                write_atomic(&dir.join(name), index_list(idx, ids).as_bytes())?;
            }
            print!(
                "{}",
                format.apply(&filter_summary_csv(mode.name(), loaded.matrix.shape(), &f))
            );
            Ok(())
        }
        Command::Theory {
            inputs,
            model,
            degree_corrected,
            c,
            c_alpha,
        } => {
            let (ti, dc) = match (inputs, model) {
                (Some(path), _) => (TheoryInputs::from_toml(&std::fs::read_to_string(path)?)?, degree_corrected),
                (None, Some(path)) => {
                    let mut cfg = ModelConfig::from_toml(&std::fs::read_to_string(path)?)?;
                    if let Some(seed) = cli.seed {
                        cfg.seed = seed;
                    }
                    let dist = cfg
                        .distribution
                        .ok_or_else(|| Failure::Usage("the model config needs a distribution".into()))?;
                    let params = cfg.build()?;
                    let gt = gamma_tau(&dist, &params)?;
                    (TheoryInputs::from_params(&params, gt.gamma, gt.tau)?, params.is_degree_corrected())
                }
                (None, None) => return Err(Failure::Usage("pass --inputs or --model".into())),
            };
            let report = theory_report(&ti, dc, c, c_alpha)?;
            emit(output, &format.apply(&report.to_csv()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
