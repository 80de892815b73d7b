use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use congruence_core::congruence::{congruence_distance, SolverConfig, SolverMode};
use congruence_core::gen::{ratio_experiment, synth_corpus, CorpusKind, GenParams};
use congruence_core::io::{
    read_series_csv, write_ratio_records, write_report, write_series_csv, write_structure,
    DistanceReport, Measure,
};
use congruence_core::reduction::{
    build_reduction, parse_dimacs, verify_reduction_with, VerifyOptions,
};
use congruence_core::series::series_distance;
use congruence_core::structure::{
    delta_distance, reduced_delta_distance, reduced_structure, structure, MatrixNormOverLags,
};
use congruence_core::timing::{run_bench, BenchConfig, BenchMeasure};
use congruence_core::{Error, Execution};

#[derive(Parser)]
#[command(
    name = "tscong",
    version,
    about = "Congruence-aware time series distances"
)]
struct Cli {
    /// Worker thread cap for parallel loops.
    #[arg(long, global = true, env = "TSCONG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two series files, printed as a JSON report.
    Distance(DistanceArgs),
    /// Dump the self-similarity matrix of a series as CSV.
    Structure {
        input: PathBuf,
        /// Keep only power-of-two lags.
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the series pair for a 3-CNF formula in DIMACS format.
    Reduce {
        cnf: PathBuf,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Check the reduction on a formula by exhaustive search.
    VerifyReduction {
        cnf: PathBuf,
        /// Also run the iterative solver on the mirrored pair.
        #[arg(long)]
        spot_check: bool,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Perturbation ratio experiment on a synthetic corpus.
    Experiment {
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 1)]
        explosions: usize,
        #[arg(long, default_value = "random-walk")]
        corpus_kind: CorpusKind,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        length: usize,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time a distance kernel over increasing lengths.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value = "delta")]
        measure: BenchMeasure,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the kernel with the parallel execution policy.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Series,
    Delta,
    ReducedDelta,
    Congruence,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    MaxColumn,
    P,
}

#[derive(clap::Args)]
struct DistanceArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum, default_value = "series")]
    measure: MeasureArg,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Norm over the structure-matrix difference (delta measures).
    #[arg(long, value_enum, default_value = "max-column")]
    norm: NormArg,
    /// Solver for the congruence measure.
    #[arg(long, default_value = "iterative")]
    mode: SolverMode,
    #[arg(long, default_value_t = 1e-3)]
    grid_resolution: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fix the translation at zero.
    #[arg(long)]
    no_translation: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Parse { .. } | Error::Io { .. } => 2,
        Error::Capability(_) => 3,
        Error::Verification { .. } => 4,
    }
}

fn stdout_json(v: &impl serde::Serialize) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)
        .map_err(|e| io_error(Path::new("<stdout>"), e.into()))?;
    writeln!(out).map_err(|e| io_error(Path::new("<stdout>"), e))
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn distance(args: &DistanceArgs) -> Result<(), Error> {
    let s = read_series_csv(&args.a)?;
    let t = read_series_csv(&args.b)?;
    let windowed = s.len() != t.len();
    let norm = match args.norm {
        NormArg::MaxColumn => MatrixNormOverLags::MaxColumn,
        NormArg::P => MatrixNormOverLags::P(args.p),
    };
    let norm_name = match args.norm {
        NormArg::MaxColumn => "max-column",
        NormArg::P => "p",
    };
    let offset = |o: usize| windowed.then_some(o);
    let report = match args.measure {
        MeasureArg::Series => {
            let w = series_distance(&s, &t, args.p)?;
            DistanceReport::plain(
                Measure::Series,
                w.value,
                offset(w.offset),
                json!({ "p": args.p }),
            )
        }
        MeasureArg::Delta | MeasureArg::ReducedDelta => {
            let (measure, w) = match args.measure {
                MeasureArg::Delta => (Measure::Delta, delta_distance(&s, &t, norm)?),
                _ => (Measure::ReducedDelta, reduced_delta_distance(&s, &t, norm)?),
            };
            let params = json!({ "norm": norm_name, "p": args.p });
            DistanceReport::plain(measure, w.value, offset(w.offset), params)
        }
        MeasureArg::Congruence => {
            let cfg = SolverConfig {
                mode: args.mode,
                grid_resolution: args.grid_resolution,
                max_iters: args.max_iters,
                restarts: args.restarts,
                seed: args.seed,
                translation: !args.no_translation,
                ..SolverConfig::default()
            };
            let r = congruence_distance(&s, &t, args.p, &cfg)?;
            let measure = match args.mode {
                SolverMode::BooleanMatrices => Measure::CongruenceBoolean,
                SolverMode::SignedPermutations => Measure::CongruenceSignedPerm,
                SolverMode::GridK2 => Measure::CongruenceGrid2,
                SolverMode::Iterative => Measure::CongruenceUpper,
            };
            let mut params = serde_json::to_value(&cfg).expect("serializable config");
            params["p"] = json!(args.p);
            DistanceReport::congruence(measure, &r, params)
        }
    };
    write_report(&report, io::stdout().lock()).map_err(|e| io_error(Path::new("<stdout>"), e))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Distance(args) => distance(&args),
        Command::Structure {
            input,
            reduced,
            out,
        } => {
            let t = read_series_csv(&input)?;
            let m = if reduced {
                reduced_structure(&t)
            } else {
                structure(&t)
            };
            match out {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| io_error(&path, e))?;
                    write_structure(&m, BufWriter::new(file)).map_err(|e| io_error(&path, e))
                }
                None => write_structure(&m, io::stdout().lock())
                    .map_err(|e| io_error(Path::new("<stdout>"), e)),
            }
        }
        Command::Reduce { cnf, out_prefix } => {
            let formula = parse_dimacs(&read_text(&cnf)?)?;
            let inst = build_reduction(&formula);
            let with_suffix = |suffix: &str| {
                let mut name = out_prefix.clone().into_os_string();
                name.push(suffix);
                PathBuf::from(name)
            };
            write_series_csv(&inst.s_series, with_suffix("_S.csv"))?;
            write_series_csv(&inst.t_series, with_suffix("_T.csv"))?;
            let meta = json!({
                "k": formula.num_vars(),
                "m": formula.clauses().len(),
                "target": inst.target,
                "half_target": inst.half_target,
            });
            let meta_path = with_suffix("_meta.json");
            let text = serde_json::to_string_pretty(&meta).expect("json") + "\n";
            std::fs::write(&meta_path, text).map_err(|e| io_error(&meta_path, e))?;
            stdout_json(&meta)
        }
        Command::VerifyReduction {
            cnf,
            spot_check,
            restarts,
            seed,
        } => {
            let formula = parse_dimacs(&read_text(&cnf)?)?;
            let opts = VerifyOptions {
                spot_check: spot_check.then(|| SolverConfig {
                    restarts,
                    seed,
                    ..SolverConfig::default()
                }),
                exec: Execution::default(),
            };
            let report = verify_reduction_with(&build_reduction(&formula), &opts)?;
            stdout_json(&report)
        }
        Command::Experiment {
            eta,
            explosions,
            corpus_kind,
            count,
            length,
            dim,
            seed,
            out,
        } => {
            let params = GenParams::new(eta, explosions, seed)?;
            let corpus = synth_corpus(count, length, dim, corpus_kind, seed)?;
            let exp = ratio_experiment(&corpus, &params)?;
            let file = File::create(&out).map_err(|e| io_error(&out, e))?;
            write_ratio_records(&exp.records, BufWriter::new(file))
                .map_err(|e| io_error(&out, e))?;
            stdout_json(&exp.summary)
        }
        Command::Bench {
            lengths,
            dim,
            measure,
            repeats,
            seed,
            parallel,
        } => {
            let cfg = BenchConfig {
                lengths,
                dim,
                measure,
                repeats,
                seed,
                exec: if parallel {
                    Execution::Parallel
                } else {
                    Execution::Sequential
                },
            };
            let report = run_bench(&cfg)?;
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

#[cfg(feature = "parallel")]
fn cap_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn cap_threads(_threads: Option<usize>) -> Result<(), Error> {
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cap_threads(cli.threads).and_then(|()| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tscong: {e}");
            if let Error::Verification {
                counterexample: Some(cnf),
                ..
            } = &e
            {
                eprintln!("counterexample:\n{cnf}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
