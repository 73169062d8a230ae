use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ajd_core::ojd::ojd_run;
use ajd_core::sdiag::{sdiag_run, SdiagReport};
use ajd_core::simkit::rng::sub_seed;
use ajd_core::simkit::{run_scenario, t_test, Algorithm, Mixing, Scenario, ScenarioRun, TrialOutcome};
use ajd_core::{Error, MatrixSet};
use serde::Serialize;

use crate::args::{AlgoName, BenchArgs, DiagonalizeArgs, SimulateArgs, SolverArgs};
use crate::io::{read_matrix_set, to_json, MatrixFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

pub const CSV_HEADER: &str = "trial,algo,n,k,sigma,mixing,index,index_as_printed,iterations,final_off,seed";

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

fn in_pool<R: Send>(threads: usize, job: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(job))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn write_stdout(contents: &str) -> Result<(), Failure> {
    std::io::stdout()
        .write_all(contents.as_bytes())
        .map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

#[derive(Serialize)]
struct Theorems<'a> {
    trace_sum_per_iter: &'a [f64],
    top_eigenvalues: &'a [f64],
    second_eigenvalues: &'a [f64],
    u_orthogonality_defect: f64,
}

#[derive(Serialize)]
struct SdiagReportFile<'a> {
    algo: &'static str,
    n: usize,
    k: usize,
    rank: usize,
    iterations: usize,
    converged: bool,
    initial_off: f64,
    final_off: f64,
    off_history: &'a [f64],
    rank_per_iter: &'a [usize],
    theorems: Theorems<'a>,
    stationarity_residual: f64,
    power_fallbacks: usize,
    warnings: &'a [String],
}

impl<'a> SdiagReportFile<'a> {
    fn new(set: &MatrixSet, r: &'a SdiagReport) -> Self {
        let d = &r.diagonalizer;
        SdiagReportFile {
            algo: "sdiag",
            n: set.n(),
            k: set.k(),
            rank: d.rank,
            iterations: d.iterations_run,
            converged: d.converged,
            initial_off: r.initial_off,
            final_off: d.final_off,
            off_history: &d.off_history,
            rank_per_iter: &r.rank_per_iter,
            theorems: Theorems {
                trace_sum_per_iter: &r.trace_sum_per_iter,
                top_eigenvalues: &r.top_eigs_final,
                second_eigenvalues: &r.second_eigs_final,
                u_orthogonality_defect: r.u_orthogonality_final,
            },
            stationarity_residual: r.stationarity_residual_final,
            power_fallbacks: r.power_fallbacks,
            warnings: &r.warnings,
        }
    }
}

#[derive(Serialize)]
struct OjdReportFile<'a> {
    algo: &'static str,
    n: usize,
    k: usize,
    sweeps: usize,
    converged: bool,
    final_off: f64,
    off_history: &'a [f64],
    rotations: usize,
}

#[derive(Serialize)]
struct Combined<T: Serialize> {
    b: MatrixFile,
    report: T,
}

fn report_path(out: &Path, explicit: Option<&PathBuf>) -> PathBuf {
    if let Some(p) = explicit {
        return p.clone();
    }
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "b".into());
    out.with_file_name(format!("{stem}.report.json"))
}

fn emit<T: Serialize>(args: &DiagonalizeArgs, b: MatrixFile, report: T) -> Result<(), Failure> {
    match &args.out {
        Some(out) => {
            write_file(out, &to_json(&b))?;
            write_file(&report_path(out, args.report.as_ref()), &to_json(&report))
        }
        None => match &args.report {
            Some(path) => {
                write_file(path, &to_json(&report))?;
                write_stdout(&to_json(&b))
            }
            None => write_stdout(&to_json(&Combined { b, report })),
        },
    }
}

pub fn diagonalize(args: &DiagonalizeArgs) -> CmdResult {
    let set = read_matrix_set(&args.input).map_err(|e| Failure::usage(e.to_string()))?;
    if set.k() <= 2 {
        eprintln!(
            "warning: only K = {} matrices; joint diagonalization is identifiable for K > 2",
            set.k()
        );
    }
    let converged = match args.algo {
        AlgoName::Sdiag => {
            let mut cfg = args.solver.sdiag_config();
            cfg.parallel = args.solver.threads != 1;
            let report = in_pool(args.solver.threads, || sdiag_run(&set, &cfg))??;
            let d = &report.diagonalizer;
            if args.solver.verbose {
                for (t, off) in d.off_history.iter().enumerate() {
                    eprintln!("iter {:>4}  off {off:.6e}  rank {}", t + 1, report.rank_per_iter[t]);
                }
                eprintln!(
                    "stationarity residual {:.3e}, U orthogonality defect {:.3e}",
                    report.stationarity_residual_final, report.u_orthogonality_final
                );
            }
            let converged = d.converged;
            emit(args, MatrixFile::from(&d.b), SdiagReportFile::new(&set, &report))?;
            converged
        }
        AlgoName::Ojd => {
            let r = ojd_run(&set, &args.solver.ojd_config())?;
            if args.solver.verbose {
                for (t, off) in r.off_history.iter().enumerate() {
                    eprintln!("sweep {:>4}  off {off:.6e}", t + 1);
                }
            }
            let report = OjdReportFile {
                algo: "ojd",
                n: set.n(),
                k: set.k(),
                sweeps: r.sweeps_used,
                converged: r.converged,
                final_off: r.final_off,
                off_history: &r.off_history,
                rotations: r.rotations,
            };
            emit(args, MatrixFile::from(&r.b), report)?;
            r.converged
        }
    };
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("warning: iteration cap reached before convergence");
        Ok(EXIT_NO_CONVERGENCE)
    }
}

fn validate(scenario: &Scenario, algorithm: &Algorithm) -> Result<(), Failure> {
    scenario.validate()?;
    match algorithm {
        Algorithm::Sdiag(cfg) => cfg.validate()?,
        Algorithm::Ojd(cfg) => cfg.validate()?,
    }
    Ok(())
}

/// One CSV line per trial; failed trials keep their index and seed and leave
/// the result columns empty.
pub fn csv_rows(out: &mut String, algo: &str, scenario: &Scenario, run: &ScenarioRun) {
    for outcome in &run.outcomes {
        let prefix = format!(
            "{},{algo},{},{},{},{}",
            outcome.trial_index(),
            scenario.n,
            scenario.k,
            scenario.sigma,
            scenario.mixing
        );
        match outcome {
            TrialOutcome::Ok(r) => {
                let _ = writeln!(
                    out,
                    "{prefix},{},{},{},{:e},{}",
                    r.performance_index, r.index_as_printed, r.iterations, r.final_off, r.seed_used
                );
            }
            TrialOutcome::Failed(f) => {
                let _ = writeln!(out, "{prefix},,,,,{}", f.seed_used);
            }
        }
    }
}

fn summary(algo: &str, scenario: &Scenario, run: &ScenarioRun, verbose: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario  algo={algo} n={} k={} sigma={} mixing={} trials={} seed={}",
        scenario.n, scenario.k, scenario.sigma, scenario.mixing, scenario.trials, scenario.master_seed
    );
    match &run.stats {
        Some(st) => {
            let _ = writeln!(
                s,
                "index     mean={:.8} std={:.8} min={:.8} max={:.8}",
                st.mean, st.std, st.min, st.max
            );
        }
        None => s.push_str("index     no successful trials\n"),
    }
    let ok: Vec<_> = run.outcomes.iter().filter_map(|o| o.ok()).collect();
    let stalled = ok.iter().filter(|r| !r.converged).count();
    let _ = writeln!(
        s,
        "trials    ok={} failed={} not_converged={stalled}",
        ok.len(),
        run.failures
    );
    if verbose && !ok.is_empty() {
        let count = ok.len() as f64;
        let printed = ok.iter().map(|r| r.index_as_printed).sum::<f64>() / count;
        let iters = ok.iter().map(|r| r.iterations as f64).sum::<f64>() / count;
        let secs: f64 = ok.iter().map(|r| r.elapsed.as_secs_f64()).sum();
        let _ = writeln!(
            s,
            "detail    index_as_printed_mean={printed:.6} iterations_mean={iters:.1} cpu_seconds={secs:.2}"
        );
        for o in &run.outcomes {
            if let TrialOutcome::Failed(f) = o {
                let _ = writeln!(
                    s,
                    "failed    trial={} seed={}: {}",
                    f.trial_index, f.seed_used, f.message
                );
            }
        }
    }
    s
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let scenario = Scenario {
        n: args.n,
        k: args.k,
        sigma: args.sigma,
        mixing: Mixing::from(args.mixing),
        trials: args.trials,
        master_seed: args.seed,
    };
    let algorithm = args.solver.algorithm(args.algo);
    validate(&scenario, &algorithm)?;
    let run = in_pool(args.solver.threads, || run_scenario(&scenario, &algorithm))??;

    let mut csv = format!("{CSV_HEADER}\n");
    csv_rows(&mut csv, algorithm.name(), &scenario, &run);
    let text = summary(algorithm.name(), &scenario, &run, args.solver.verbose);
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            write_stdout(&text)?;
        }
        None => {
            write_stdout(&csv)?;
            eprint!("{text}");
        }
    }
    Ok(if run.failures > 0 { EXIT_DATA } else { EXIT_OK })
}

/// Results of one (mixing, sigma) cell for both algorithms on the same data.
pub struct BenchCell {
    pub scenario: Scenario,
    pub sdiag: ScenarioRun,
    pub ojd: ScenarioRun,
}

/// Runs the grid in table order: mixing (orthogonal, general) outer, sigma inner.
/// Cell `c` uses master seed `sub_seed(seed, c)`, shared by both algorithms.
pub fn run_bench(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    sigmas: &[f64],
    solver: &SolverArgs,
) -> Result<Vec<BenchCell>, Failure> {
    let sdiag = solver.algorithm(AlgoName::Sdiag);
    let ojd = solver.algorithm(AlgoName::Ojd);
    let mut cells = Vec::new();
    for mixing in [Mixing::Orthogonal, Mixing::General] {
        for &sigma in sigmas {
            let scenario = Scenario {
                n,
                k,
                sigma,
                mixing,
                trials,
                master_seed: sub_seed(seed, cells.len() as u64),
            };
            validate(&scenario, &sdiag)?;
            validate(&scenario, &ojd)?;
            let s = run_scenario(&scenario, &sdiag)?;
            let o = run_scenario(&scenario, &ojd)?;
            cells.push(BenchCell {
                scenario,
                sdiag: s,
                ojd: o,
            });
        }
    }
    Ok(cells)
}

pub fn bench_csv(cells: &[BenchCell]) -> String {
    let mut csv = format!("{CSV_HEADER}\n");
    for cell in cells {
        csv_rows(&mut csv, "sdiag", &cell.scenario, &cell.sdiag);
        csv_rows(&mut csv, "ojd", &cell.scenario, &cell.ojd);
    }
    csv
}

const COL: usize = 25;

fn cell_text(run: &ScenarioRun) -> String {
    match &run.stats {
        Some(s) => format!("{:.8} ({:.8})", s.mean, s.std),
        None => "n/a".into(),
    }
}

pub fn bench_table(cells: &[BenchCell], n: usize, k: usize, trials: usize, seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "N = {n}, K = {k}, {trials} trials per cell, seed {seed}\n");
    let per_mixing = cells.len() / 2;
    let mut line = format!("{:<14}", "");
    for mixing in [Mixing::Orthogonal, Mixing::General] {
        line += &format!("{:<w$}", mixing.as_str(), w = COL * per_mixing);
    }
    let _ = writeln!(s, "{}", line.trim_end());
    let mut line = format!("{:<14}", "");
    for cell in cells {
        line += &format!("{:<COL$}", format!("sigma = {}", cell.scenario.sigma));
    }
    let _ = writeln!(s, "{}", line.trim_end());
    for (label, pick) in [("SDIAG", 0), ("OJD", 1)] {
        let mut line = format!("{label:<14}");
        for cell in cells {
            let run = if pick == 0 { &cell.sdiag } else { &cell.ojd };
            line += &format!("{:<COL$}", cell_text(run));
        }
        let _ = writeln!(s, "{}", line.trim_end());
    }
    let mut line = format!("{:<14}", "t (SDIAG-OJD)");
    let mut dfs = Vec::new();
    for cell in cells {
        let text = match t_test(&cell.sdiag.indices(), &cell.ojd.indices()) {
            Ok(t) => {
                dfs.push(t.degrees_of_freedom);
                format!("{:.3}", t.t_statistic)
            }
            Err(_) => "n/a".into(),
        };
        line += &format!("{text:<COL$}");
    }
    let _ = writeln!(s, "{}", line.trim_end());
    dfs.dedup();
    if let [df] = dfs.as_slice() {
        let _ = writeln!(s, "{:<14}{df}", "df");
    }
    let failures: usize = cells.iter().map(|c| c.sdiag.failures + c.ojd.failures).sum();
    if failures > 0 {
        let _ = writeln!(s, "\n{failures} failed trial(s) excluded from the statistics");
    }
    s
}

pub fn bench(args: &BenchArgs) -> CmdResult {
    if args.sigmas.is_empty() {
        return Err(Failure::usage("at least one --sigma is required"));
    }
    let cells = in_pool(args.solver.threads, || {
        run_bench(args.n, args.k, args.trials, args.seed, &args.sigmas, &args.solver)
    })??;
    write_file(&args.out, &bench_csv(&cells))?;
    write_stdout(&bench_table(&cells, args.n, args.k, args.trials, args.seed))?;
    if args.solver.verbose {
        for cell in &cells {
            eprint!("{}", summary("sdiag", &cell.scenario, &cell.sdiag, true));
            eprint!("{}", summary("ojd", &cell.scenario, &cell.ojd, true));
        }
    }
    let failures: usize = cells.iter().map(|c| c.sdiag.failures + c.ojd.failures).sum();
    Ok(if failures > 0 { EXIT_DATA } else { EXIT_OK })
}
