use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpswf::approx::{self, TargetFunction, TargetSpec};
use gpswf::experiments::{self, encode_basis, BasisCache, ExperimentConfig, CACHE_VERSION};
use gpswf::gpswf::{
    build_basis, build_basis_with, chi_bracket_check, chi_lower_bound_check, local_estimate, BuildOptions, GpswfBasis,
};
use gpswf::spectral::{compute_spectrum, decay_bound_check};
use gpswf::Error;

#[derive(Debug, Parser)]
#[command(name = "gpswf", version, about = "Generalized prolate spheroidal wave functions")]
struct Cli {
    /// Output encoding; human-readable table when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Gauss–Jacobi order for projections by quadrature (0 = automatic floor).
    #[arg(long, global = true, default_value_t = 0)]
    quad_order: usize,
    /// Seed for random corpus members.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Basis cache directory.
    #[arg(long, global = true, env = "GPSWF_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct BasisArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    #[arg(long)]
    nmax: usize,
    /// Cap on Jacobi modes per parity; the build fails when it cannot reach the tail tolerance.
    #[arg(long)]
    max_trunc: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// χ_n table with the bracket n(n+2α+1) ≤ χ_n ≤ n(n+2α+1)+c².
    Basis {
        #[command(flatten)]
        basis: BasisArgs,
        /// Write the basis in the cache file format instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// χ_n, μ_n and λ_n.
    Spectrum {
        #[command(flatten)]
        basis: BasisArgs,
    },
    /// Eigenvalue bracket, improved lower bound, decay bounds and local estimates.
    Bounds {
        #[command(flatten)]
        basis: BasisArgs,
    },
    /// Project a corpus function onto the first N basis functions.
    Project {
        #[command(flatten)]
        basis: BasisArgs,
        /// Target: JSON object, or kind:key=value,... with kind in
        /// brownian, wm, exp, jacobi (e.g. wm:s=1,lambda=2).
        #[arg(long = "fn")]
        target: String,
        #[arg(long = "N")]
        n_terms: usize,
    },
    /// Run a registered scenario and write its report.
    Experiment {
        #[arg(long, value_parser = ["lambda-decay", "brownian", "wm-table", "custom"])]
        name: String,
        /// JSON config; missing keys take the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report root directory.
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Inspect or empty the basis cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
enum CacheAction {
    Ls,
    Clear,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn plain(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => String::new(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn pretty(&self) -> String {
        match self {
            Cell::Float(v) if v.is_nan() => "-".into(),
            Cell::Float(v) => format!("{v:.10e}"),
            other => other.plain(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
        }
    }
}

fn int(v: usize) -> Cell {
    Cell::Int(v as i64)
}

fn fl(v: f64) -> Cell {
    Cell::Float(v)
}

struct Output {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Lines printed after the table in human-readable mode.
    notes: Vec<String>,
}

impl Output {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn render(&self, format: Option<Format>) -> CliResult<String> {
        match format {
            Some(Format::Csv) => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
                w.write_record(&self.header).map_err(err)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::plain)).map_err(err)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
                Ok(String::from_utf8(bytes).expect("utf-8"))
            }
            Some(Format::Json) => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        self.header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| (h.to_string(), c.json()))
                            .collect::<serde_json::Map<_, _>>()
                            .into()
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&rows).map_err(Error::from)?;
                s.push('\n');
                Ok(s)
            }
            None => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::pretty).collect()).collect();
                let widths: Vec<usize> = (0..self.header.len())
                    .map(|i| cells.iter().map(|r| r[i].len()).chain([self.header[i].len()]).max().unwrap_or(0))
                    .collect();
                let mut s = String::new();
                let line = |s: &mut String, items: &mut dyn Iterator<Item = &str>| {
                    let parts: Vec<String> = items.zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
                    let _ = writeln!(s, "{}", parts.join("  ").trim_end());
                };
                line(&mut s, &mut self.header.iter().copied());
                for r in &cells {
                    line(&mut s, &mut r.iter().map(String::as_str));
                }
                for n in &self.notes {
                    let _ = writeln!(s, "{n}");
                }
                Ok(s)
            }
        }
    }
}

fn validate(b: &BasisArgs) -> CliResult<()> {
    if !b.alpha.is_finite() || b.alpha < 0.0 {
        return Err(CliError::Usage(format!("--alpha must be finite and >= 0, got {}", b.alpha)));
    }
    if !b.c.is_finite() || b.c <= 0.0 {
        return Err(CliError::Usage(format!("--c must be finite and > 0, got {}", b.c)));
    }
    if b.nmax == 0 {
        return Err(CliError::Usage("--nmax must be >= 1".into()));
    }
    Ok(())
}

fn obtain(cli: &Cli, b: &BasisArgs) -> CliResult<GpswfBasis> {
    validate(b)?;
    if let Some(max_trunc) = b.max_trunc {
        // capped builds bypass the cache, whose keys assume default options
        let opts = BuildOptions {
            max_trunc,
            initial_trunc: Some(max_trunc),
            ..BuildOptions::default()
        };
        return Ok(build_basis_with(b.alpha, b.c, b.nmax, opts)?);
    }
    Ok(match &cli.cache_dir {
        Some(dir) => BasisCache::new(dir)?.get_or_build(b.alpha, b.c, b.nmax)?,
        None => build_basis(b.alpha, b.c, b.nmax)?,
    })
}

fn cmd_basis(cli: &Cli, b: &BasisArgs, out: Option<&PathBuf>) -> CliResult<Output> {
    let basis = obtain(cli, b)?;
    let mut o = Output::new(&["n", "chi", "lower", "upper", "in_bracket"]);
    for n in 0..basis.nmax() {
        let v = chi_bracket_check(&basis, n)?;
        o.rows.push(vec![int(n), fl(v.chi), fl(v.lower), fl(v.upper), Cell::Bool(v.holds)]);
    }
    o.notes.push(format!("modes per parity M = {}", basis.trunc()));
    if let Some(path) = out {
        std::fs::write(path, encode_basis(&basis, CACHE_VERSION)).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
        let mut w = Output::new(&["path", "alpha", "c", "M", "nmax"]);
        w.rows.push(vec![
            Cell::Text(path.display().to_string()),
            fl(basis.alpha()),
            fl(basis.c()),
            int(basis.trunc()),
            int(basis.nmax()),
        ]);
        return Ok(w);
    }
    Ok(o)
}

fn cmd_spectrum(cli: &Cli, b: &BasisArgs) -> CliResult<Output> {
    let basis = obtain(cli, b)?;
    let sp = compute_spectrum(&basis)?;
    let mut o = Output::new(&["n", "chi", "mu_abs", "ln_mu_abs", "lambda", "ln_lambda", "method"]);
    for e in &sp {
        o.rows.push(vec![
            int(e.n),
            fl(e.chi),
            fl(e.mu_abs),
            fl(e.ln_mu_abs),
            fl(e.lambda),
            fl(e.ln_lambda),
            Cell::Text(format!("{:?}", e.method).to_lowercase()),
        ]);
    }
    Ok(o)
}

fn cmd_bounds(cli: &Cli, b: &BasisArgs) -> CliResult<(Output, bool)> {
    let basis = obtain(cli, b)?;
    let sp = compute_spectrum(&basis)?;
    let mut o = Output::new(&[
        "n",
        "chi_bracket",
        "chi_lower_applicable",
        "chi_lower",
        "decay_applicable",
        "mu_margin",
        "lambda_margin",
        "decay",
        "estimate_applicable",
        "estimate",
    ]);
    let mut all = true;
    for e in &sp {
        let br = chi_bracket_check(&basis, e.n)?;
        let lo = chi_lower_bound_check(&basis, e.n)?;
        let d = decay_bound_check(e, basis.alpha(), basis.c());
        let le = local_estimate(&basis, e.n, 1000)?;
        all &= br.holds && lo.holds && d.holds && le.holds();
        o.rows.push(vec![
            int(e.n),
            Cell::Bool(br.holds),
            Cell::Bool(lo.applicable),
            Cell::Bool(lo.holds),
            Cell::Bool(d.applicable),
            fl(d.mu_margin),
            fl(d.lambda_margin),
            Cell::Bool(d.holds),
            Cell::Bool(le.bound_applicable),
            Cell::Bool(le.holds()),
        ]);
    }
    o.notes.push(if all { "all bounds hold".into() } else { "bound violations found".into() });
    Ok((o, all))
}

fn parse_target(text: &str, alpha: f64, seed: Option<u64>) -> CliResult<TargetSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid --fn JSON: {e}")));
    }
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut kv = std::collections::BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected key=value in --fn, got '{part}'")))?;
        let v: f64 = v.parse().map_err(|_| CliError::Usage(format!("invalid number '{v}' for '{k}'")))?;
        kv.insert(k.trim().to_string(), v);
    }
    let allowed: &[&str] = match kind {
        "brownian" => &["s", "seed", "k"],
        "wm" => &["s", "lambda", "k"],
        "exp" | "jacobi" => &["k"],
        other => return Err(CliError::Usage(format!("unknown target kind '{other}'"))),
    };
    if let Some(bad) = kv.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown key '{bad}' for target '{kind}'")));
    }
    let get = |k: &str| kv.get(k).copied();
    let need = |k: &str| get(k).ok_or_else(|| CliError::Usage(format!("target '{kind}' needs '{k}'")));
    let count = |k: &str| -> CliResult<Option<usize>> {
        get(k)
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(CliError::Usage(format!("'{k}' must be a non-negative integer")))
                }
            })
            .transpose()
    };
    Ok(match kind {
        "brownian" => TargetSpec::Brownian {
            s: need("s")?,
            seed: get("seed").map(|v| v as u64).or(seed).unwrap_or(0),
            k_terms: count("k")?,
        },
        "wm" => TargetSpec::WeierstrassMandelbrot {
            s: need("s")?,
            lambda: get("lambda").unwrap_or(2.0),
            k_terms: count("k")?,
        },
        "exp" => TargetSpec::PeriodicExponential { k: need("k")? as i64 },
        _ => TargetSpec::JacobiMode {
            k: count("k")?.ok_or_else(|| CliError::Usage("target 'jacobi' needs 'k'".into()))?,
            alpha,
        },
    })
}

fn cmd_project(cli: &Cli, b: &BasisArgs, target: &str, n_terms: usize) -> CliResult<Output> {
    validate(b)?;
    if n_terms == 0 || n_terms > b.nmax {
        return Err(CliError::Usage(format!("--N must satisfy 1 <= N <= nmax = {}", b.nmax)));
    }
    let spec = parse_target(target, b.alpha, cli.seed)?;
    let f = TargetFunction::from_spec(&spec)?;
    let basis = obtain(cli, b)?;
    let closed = f.closed_form_coefficients(&basis, 1).is_some() && f.norm_sq(basis.alpha()).is_some();
    let p = if closed && cli.quad_order == 0 {
        approx::project_closed_form(&basis, &f, &[n_terms])?.remove(0)
    } else {
        let order = cli.quad_order.max(approx::quad_floor(&basis));
        approx::project(&basis, &f, n_terms, order)?
    };
    let mut o = Output::new(&["n", "coefficient_re", "coefficient_im"]);
    for (n, c) in p.coefficients.iter().enumerate() {
        o.rows.push(vec![int(n), fl(c.re), fl(c.im)]);
    }
    o.notes.push(format!("target {}", f.label()));
    o.notes.push(format!("l2w_error {:e} ({:?})", p.l2w_error, p.route).to_lowercase());
    o.notes.push(format!("sup_error {:e}", p.sup_error));
    Ok(o)
}

fn cmd_experiment(cli: &Cli, name: &str, config: Option<&PathBuf>, out: &PathBuf) -> CliResult<Output> {
    let mut cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.name != name {
                return Err(CliError::Usage(format!("config names scenario '{}' but --name is '{name}'", cfg.name)));
            }
            cfg
        }
        None => ExperimentConfig::defaults(name)?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.quad_order > 0 {
        cfg.quad_order = cli.quad_order;
    }
    if let Some(dir) = &cli.cache_dir {
        cfg.cache = true;
        cfg.cache_dir = Some(dir.clone());
    }
    cfg.output_dir = Some(out.clone());
    let report = experiments::run(&cfg)?;
    if let Some(dir) = &report.dir {
        eprintln!("report written to {}", dir.display());
    }
    let mut o = Output::new(&["file", "rows"]);
    for t in &report.tables {
        o.rows.push(vec![Cell::Text(t.file.clone()), int(t.rows.len())]);
    }
    if name == "wm-table" {
        let mut w = Output::new(&["alpha", "s", "l2w_error", "reference_value", "ratio"]);
        let t = report.table("wm_table.csv").expect("wm table");
        for r in &t.rows {
            let p = |i: usize| r[i].parse::<f64>().unwrap_or(f64::NAN);
            w.rows.push(vec![fl(p(0)), fl(p(1)), fl(p(4)), fl(p(5)), fl(p(6))]);
        }
        return Ok(w);
    }
    if name == "brownian" {
        let mut w = Output::new(&["alpha", "c", "N", "median_sup_error", "median_interior_sup_error", "median_l2w_error"]);
        let t = report.table("brownian_median.csv").expect("median table");
        for r in &t.rows {
            let p = |i: usize| r[i].parse::<f64>().unwrap_or(f64::NAN);
            w.rows.push(vec![fl(p(0)), fl(p(1)), int(p(2) as usize), fl(p(4)), fl(p(5)), fl(p(6))]);
        }
        return Ok(w);
    }
    Ok(o)
}

fn cmd_cache(cli: &Cli, action: &CacheAction) -> CliResult<Output> {
    let dir = cli
        .cache_dir
        .as_ref()
        .ok_or_else(|| CliError::Usage("no cache directory; pass --cache-dir or set GPSWF_CACHE_DIR".into()))?;
    let cache = BasisCache::new(dir)?;
    match action {
        CacheAction::Ls => {
            let mut o = Output::new(&["key", "version", "alpha", "c", "M", "nmax", "bytes"]);
            for e in cache.list()? {
                o.rows.push(vec![
                    Cell::Text(e.key),
                    int(e.version as usize),
                    fl(e.alpha),
                    fl(e.c),
                    int(e.trunc),
                    int(e.nmax),
                    int(e.bytes as usize),
                ]);
            }
            Ok(o)
        }
        CacheAction::Clear => {
            let mut o = Output::new(&["removed"]);
            o.rows.push(vec![int(cache.clear()?)]);
            Ok(o)
        }
    }
}

fn run(cli: &Cli) -> CliResult<(String, bool)> {
    if cli.threads > 0 {
        // a global pool can only be installed once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let (out, ok) = match &cli.command {
        Command::Basis { basis, out } => (cmd_basis(cli, basis, out.as_ref())?, true),
        Command::Spectrum { basis } => (cmd_spectrum(cli, basis)?, true),
        Command::Bounds { basis } => cmd_bounds(cli, basis)?,
        Command::Project { basis, target, n_terms } => (cmd_project(cli, basis, target, *n_terms)?, true),
        Command::Experiment { name, config, out } => (cmd_experiment(cli, name, config.as_ref(), out)?, true),
        Command::Cache { action } => (cmd_cache(cli, action)?, true),
    };
    Ok((out.render(cli.format)?, ok))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: bound violations found");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
