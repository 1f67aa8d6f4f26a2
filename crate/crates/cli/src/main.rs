use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treemis::experiment::{parse_n_range, run_point, sweep_points, write_csv};
use treemis::graph::{generate, load_edge_list, GenKind, GenSpec};
use treemis::{mis_tree, Error, GatherMode, MpcConfig, RunReport};

#[derive(Parser)]
#[command(
    name = "treemis",
    version,
    about = "MIS on trees in a simulated low-memory MPC model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline once and write its JSON report.
    Run(RunArgs),
    /// Run the pipeline over many sizes and seeds and write CSV rows.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Memory exponent: S = c_S * n^eps.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value = "naive")]
    mode: GatherMode,
    /// Generator: random, path, star, balanced[:b], broom:handle,
    /// star-of-stars:fanout, forest:t:kind.
    #[arg(long = "gen", default_value = "random")]
    generator: String,
    /// Defaults to eps / 2.
    #[arg(long)]
    delta_prime: Option<f64>,
    #[arg(long)]
    c_s: Option<f64>,
    #[arg(long)]
    c_m: Option<f64>,
    /// Factor in front of the sampled-component size guard.
    #[arg(long)]
    c_size: Option<f64>,
    /// Sampling exponent is c_delta / (1 + eps).
    #[arg(long)]
    c_delta: Option<f64>,
    /// Degree reduction stops below log2(n)^stop_exponent.
    #[arg(long)]
    stop_exponent: Option<f64>,
    #[arg(long)]
    c_gh: Option<u64>,
    #[arg(long)]
    c0: Option<u64>,
    #[arg(long)]
    max_retries: Option<u32>,
}

impl ModelArgs {
    fn config(&self, n: usize, seed: u64) -> MpcConfig {
        let mut c = MpcConfig::new(n, self.eps, self.mode, seed);
        if let Some(x) = self.delta_prime {
            c.delta_prime = x;
        }
        if let Some(x) = self.c_s {
            c.c_s = x;
        }
        if let Some(x) = self.c_m {
            c.c_m = x;
        }
        if let Some(x) = self.c_size {
            c.c_size = x;
        }
        if let Some(x) = self.c_delta {
            c.c_delta = x;
        }
        if let Some(x) = self.stop_exponent {
            c.stop_exponent = x;
        }
        if let Some(x) = self.c_gh {
            c.c_gh = x;
        }
        if let Some(x) = self.c0 {
            c.c0 = x;
        }
        if let Some(x) = self.max_retries {
            c.max_retries = x;
        }
        c
    }

    fn kind(&self) -> Result<GenKind, Error> {
        self.generator.parse()
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list file (`n m` header, then `u v` lines); overrides --gen.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Report destination; without it the JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "n_range")]
    n_list: Vec<usize>,
    /// Geometric range lo:hi:factor.
    #[arg(long)]
    n_range: Option<String>,
    /// Seeds 0..k for every size.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for one JSON report per row.
    #[arg(long)]
    reports: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn describe(e: Error, path: Option<&PathBuf>) -> String {
    match (e, path) {
        (Error::Io(io), Some(p)) if io.kind() == io::ErrorKind::NotFound => {
            format!("file not found: {}", p.display())
        }
        (e, _) => e.to_string(),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn summary(r: &RunReport) -> String {
    let t = &r.totals;
    let v = &r.verdicts;
    format!(
        "n={} mode={} seed={} rounds={} accounting={} passes={} retries={} peak={}/{} independent={} maximal={} memory={} mis={}",
        r.config.n,
        r.config.mode,
        r.config.seed,
        t.algorithm_rounds,
        t.accounting_rounds,
        t.passes,
        t.retries,
        t.peak_traffic.max(t.peak_resident),
        r.config.s,
        v.independent,
        v.maximal,
        v.memory,
        t.mis_size,
    )
}

fn run(a: RunArgs) -> Result<ExitCode, String> {
    let g = match &a.graph {
        Some(p) => load_edge_list(p).map_err(|e| describe(e, Some(p)))?,
        None => {
            let kind = a.model.kind().map_err(|e| e.to_string())?;
            generate(&GenSpec::new(kind.fit(a.n), a.n, a.seed)).map_err(|e| e.to_string())?
        }
    };
    let cfg = a.model.config(g.n(), a.seed);
    cfg.validate().map_err(|e| e.to_string())?;
    let (report, failure) = match mis_tree(&g, &cfg) {
        Ok(run) => (run.report, None),
        Err(ab) => match ab.report {
            Some(r) => (*r, Some(ab.error.to_string())),
            None => return Err(ab.error.to_string()),
        },
    };
    emit(&report.to_json(), a.out.as_ref())?;
    let line = summary(&report);
    if a.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    if let Some(msg) = failure {
        return Err(format!("pipeline aborted: {msg}"));
    }
    if !report.verdicts.pass() {
        eprintln!("error: verification failed: {:?}", report.verdicts);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> Result<ExitCode, String> {
    let ns = match &a.n_range {
        Some(r) => parse_n_range(r).map_err(|e| e.to_string())?,
        None => a.n_list.clone(),
    };
    if ns.is_empty() {
        return Err("no sizes given: pass --n-list or --n-range".into());
    }
    if a.seeds == 0 {
        return Err("--seeds must be at least 1".into());
    }
    let kind = a.model.kind().map_err(|e| e.to_string())?;
    a.model
        .config(ns[0], 0)
        .validate()
        .map_err(|e| e.to_string())?;
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let (points, dropped) = sweep_points(&ns, &seeds);
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} duplicate (n, seed) pairs");
    }
    if let Some(dir) = &a.reports {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    let mut rows = Vec::with_capacity(points.len());
    for (n, seed) in points {
        let base = a.model.config(n, seed);
        let (row, report) =
            run_point(&kind, n, seed, &base).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
        if !row.passed() {
            eprintln!("warning: n={n} seed={seed} verdict={}", row.verdict);
        }
        if let (Some(dir), Some(r)) = (&a.reports, &report) {
            let p = dir.join(format!("n{n}-s{seed}-{}.json", row.mode));
            fs::write(&p, r.to_json()).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
        }
        rows.push(row);
    }
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
    emit(
        &String::from_utf8(buf).expect("csv is utf-8"),
        a.out.as_ref(),
    )?;
    if rows.iter().all(|r| r.passed()) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}
