//! Scenario runners for the numerical examples, the on-disk basis cache and
//! CSV/JSON reporting.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx::{self, TargetFunction, TargetSpec, RNG_NAME, SUP_GRID};
use crate::error::{Error, Result};
use crate::gpswf::{build_basis, GpswfBasis, TAIL_TOLERANCE};
use crate::spectral::{comparison_curve, compute_spectrum, decay_bound_check};

pub const CACHE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"GPSW";
const CACHE_EXT: &str = "gpswf";

pub const SCENARIOS: [&str; 4] = ["lambda-decay", "brownian", "wm-table", "custom"];

/// Printed values of the Weierstrass–Mandelbrot error table, rows α, columns s.
pub const WM_REFERENCE_ALPHAS: [f64; 5] = [0.1, 0.5, 1.0, 1.5, 2.0];
pub const WM_REFERENCE_S: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const WM_REFERENCE_TABLE: [[f64; 4]; 5] = [
    [1.69146e-4, 5.42800e-4, 1.74173e-3, 5.61554e-3],
    [1.90589e-4, 6.07253e-4, 1.93120e-3, 6.15556e-3],
    [2.12572e-4, 6.72661e-4, 2.12113e-3, 6.68912e-3],
    [2.30518e-4, 7.25472e-4, 2.27216e-3, 7.10411e-3],
    [2.45810e-4, 7.70063e-4, 2.39797e-3, 7.44278e-3],
];

/// Looks up the printed table value for (α, s).
pub fn wm_reference_value(alpha: f64, s: f64) -> Option<f64> {
    let i = WM_REFERENCE_ALPHAS.iter().position(|a| *a == alpha)?;
    let j = WM_REFERENCE_S.iter().position(|v| *v == s)?;
    Some(WM_REFERENCE_TABLE[i][j])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub alpha_list: Vec<f64>,
    pub c_list: Vec<f64>,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub corpus: Vec<TargetSpec>,
    pub seed: u64,
    /// Number of consecutive seeds for random corpus members.
    pub seeds: usize,
    /// Modes per basis; 0 means max(N_list).
    pub nmax: usize,
    /// Quadrature order for targets without closed-form coefficients; 0 picks the floor.
    pub quad_order: usize,
    pub output_dir: Option<PathBuf>,
    pub cache: bool,
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults of a registered scenario.
    pub fn defaults(name: &str) -> Result<Self> {
        let base = Self {
            name: name.to_string(),
            alpha_list: vec![],
            c_list: vec![5.0 * PI],
            n_list: vec![],
            corpus: vec![],
            seed: 0,
            seeds: 1,
            nmax: 0,
            quad_order: 0,
            output_dir: None,
            cache: false,
            cache_dir: None,
        };
        let cfg = match name {
            "lambda-decay" => Self {
                alpha_list: vec![1.0, 1.5, 2.0, 2.5],
                c_list: vec![10.0],
                nmax: 40,
                ..base
            },
            "brownian" => Self {
                alpha_list: vec![1.5],
                n_list: vec![46, 90],
                corpus: vec![TargetSpec::Brownian {
                    s: 1.5,
                    seed: 0,
                    k_terms: Some(approx::DEFAULT_BROWNIAN_TERMS),
                }],
                seeds: 10,
                ..base
            },
            "wm-table" => Self {
                alpha_list: WM_REFERENCE_ALPHAS.to_vec(),
                n_list: vec![95],
                corpus: WM_REFERENCE_S
                    .iter()
                    .map(|&s| TargetSpec::WeierstrassMandelbrot {
                        s,
                        lambda: 2.0,
                        k_terms: None,
                    })
                    .collect(),
                ..base
            },
            "custom" => Self {
                alpha_list: vec![0.5],
                n_list: vec![10, 20, 40],
                corpus: vec![TargetSpec::PeriodicExponential { k: 1 }],
                ..base
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario '{other}', expected one of {}",
                    SCENARIOS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    /// Parses a JSON config; keys missing from the file take the scenario defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("experiment config must be a JSON object".into()))?;
        let name = obj
            .get("name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("experiment config needs a string 'name'".into()))?;
        let mut merged = serde_json::to_value(Self::defaults(name)?)?;
        let target = merged.as_object_mut().expect("struct serializes to an object");
        for (k, v) in obj {
            if !target.contains_key(k) {
                return Err(Error::Config(format!("unknown config key '{k}'")));
            }
            target.insert(k.clone(), v.clone());
        }
        let cfg: Self = serde_json::from_value(merged)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !SCENARIOS.contains(&self.name.as_str()) {
            return Err(Error::Config(format!("unknown scenario '{}'", self.name)));
        }
        if self.alpha_list.is_empty() || self.c_list.is_empty() {
            return Err(Error::Config("alpha_list and c_list must be non-empty".into()));
        }
        if self.alpha_list.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Config("alpha values must be finite and >= 0".into()));
        }
        if self.c_list.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::Config("c values must be finite and > 0".into()));
        }
        let needs_n = self.name != "lambda-decay";
        if needs_n && (self.n_list.is_empty() || self.n_list.contains(&0)) {
            return Err(Error::Config("N_list must be non-empty with entries >= 1".into()));
        }
        if needs_n && self.corpus.is_empty() {
            return Err(Error::Config("corpus must be non-empty".into()));
        }
        if self.name == "lambda-decay" && self.nmax == 0 {
            return Err(Error::Config("lambda-decay needs nmax >= 1".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be >= 1".into()));
        }
        Ok(())
    }

    fn basis_size(&self) -> usize {
        self.nmax.max(self.n_list.iter().copied().max().unwrap_or(0))
    }

    fn cache(&self) -> Result<Option<BasisCache>> {
        match (&self.cache, &self.cache_dir) {
            (true, Some(dir)) => Ok(Some(BasisCache::new(dir)?)),
            (true, None) => Err(Error::Config("cache enabled without cache_dir".into())),
            _ => Ok(None),
        }
    }
}

/// Content-addressed store of computed bases.
#[derive(Debug, Clone)]
pub struct BasisCache {
    dir: PathBuf,
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub path: PathBuf,
    pub version: u32,
    pub alpha: f64,
    pub c: f64,
    pub trunc: usize,
    pub nmax: usize,
    pub bytes: u64,
    pub created_at: Option<String>,
}

impl BasisCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        Self::with_version(dir, CACHE_VERSION)
    }

    fn with_version(dir: impl Into<PathBuf>, version: u32) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir, version })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex SHA-256 of the build request and code version.
    pub fn key(&self, alpha: f64, c: f64, nmax: usize) -> String {
        let mut h = Sha256::new();
        h.update(MAGIC);
        h.update(self.version.to_le_bytes());
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(alpha.to_le_bytes());
        h.update(c.to_le_bytes());
        h.update((nmax as u64).to_le_bytes());
        h.update(TAIL_TOLERANCE.to_le_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.{CACHE_EXT}"))
    }

    /// Returns the cached basis, or `None` on a miss, a stale version or a corrupt file.
    pub fn get(&self, alpha: f64, c: f64, nmax: usize) -> Result<Option<GpswfBasis>> {
        let path = self.path(&self.key(alpha, c, nmax));
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        match decode_basis(&bytes) {
            Ok((version, basis)) if version == self.version => {
                if basis.alpha().to_bits() == alpha.to_bits() && basis.c().to_bits() == c.to_bits() && basis.nmax() == nmax {
                    Ok(Some(basis))
                } else {
                    log::warn!("cache entry {} does not match its key, discarding", path.display());
                    let _ = fs::remove_file(&path);
                    Ok(None)
                }
            }
            Ok(_) => Ok(None),
            Err(e) => {
                log::warn!("discarding corrupt cache entry {}: {e}", path.display());
                let _ = fs::remove_file(&path);
                Ok(None)
            }
        }
    }

    /// Writes through a temporary file and an atomic rename.
    pub fn put(&self, basis: &GpswfBasis) -> Result<PathBuf> {
        let path = self.path(&self.key(basis.alpha(), basis.c(), basis.nmax()));
        let mut tmp = tempfile_in(&self.dir)?;
        tmp.1.write_all(&encode_basis(basis, self.version)).map_err(|e| Error::io(&tmp.0, e))?;
        tmp.1.sync_all().map_err(|e| Error::io(&tmp.0, e))?;
        drop(tmp.1);
        fs::rename(&tmp.0, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn get_or_build(&self, alpha: f64, c: f64, nmax: usize) -> Result<GpswfBasis> {
        if let Some(b) = self.get(alpha, c, nmax)? {
            return Ok(b);
        }
        let b = build_basis(alpha, c, nmax)?;
        self.put(&b)?;
        Ok(b)
    }

    pub fn list(&self) -> Result<Vec<CacheEntry>> {
        let mut out = Vec::new();
        let rd = fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for entry in rd {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some(CACHE_EXT) {
                continue;
            }
            let key = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let meta = entry.metadata().map_err(|e| Error::io(&path, e))?;
            let created_at = meta
                .modified()
                .ok()
                .map(|t| chrono::DateTime::<chrono::Utc>::from(t).to_rfc3339());
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            match read_header(&bytes) {
                Ok(h) => out.push(CacheEntry {
                    key,
                    path,
                    version: h.version,
                    alpha: h.alpha,
                    c: h.c,
                    trunc: h.trunc,
                    nmax: h.nmax,
                    bytes: meta.len(),
                    created_at,
                }),
                Err(e) => log::warn!("unreadable cache entry {}: {e}", path.display()),
            }
        }
        out.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(out)
    }

    /// Removes every cache file; returns how many were deleted.
    pub fn clear(&self) -> Result<usize> {
        let mut n = 0;
        let rd = fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for entry in rd {
            let path = entry.map_err(|e| Error::io(&self.dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) == Some(CACHE_EXT) {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
                n += 1;
            }
        }
        Ok(n)
    }
}

fn tempfile_in(dir: &Path) -> Result<(PathBuf, fs::File)> {
    for i in 0..1000u32 {
        let path = dir.join(format!(".tmp-{}-{i}", std::process::id()));
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(f) => return Ok((path, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io(&path, e)),
        }
    }
    Err(Error::io(dir, std::io::Error::other("no free temporary file name")))
}

/// Serializes a basis in the little-endian cache layout.
pub fn encode_basis(basis: &GpswfBasis, version: u32) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&basis.alpha().to_le_bytes());
    out.extend_from_slice(&basis.c().to_le_bytes());
    out.extend_from_slice(&(basis.trunc() as u32).to_le_bytes());
    out.extend_from_slice(&(basis.nmax() as u32).to_le_bytes());
    for x in basis.chi() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for row in basis.betas() {
        out.extend_from_slice(&(row.len() as u32).to_le_bytes());
        for x in row {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Header {
    version: u32,
    alpha: f64,
    c: f64,
    trunc: usize,
    nmax: usize,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format(format!("payload truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s.try_into().expect("slice length"))
    }

    fn u32(&mut self) -> Result<u32> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

fn header(r: &mut Reader) -> Result<Header> {
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    Ok(Header {
        version: r.u32()?,
        alpha: r.f64()?,
        c: r.f64()?,
        trunc: r.u32()? as usize,
        nmax: r.u32()? as usize,
    })
}

fn read_header(bytes: &[u8]) -> Result<Header> {
    header(&mut Reader { bytes, pos: 0 })
}

/// Parses the cache layout; returns the stored format version with the basis.
pub fn decode_basis(bytes: &[u8]) -> Result<(u32, GpswfBasis)> {
    let mut r = Reader { bytes, pos: 0 };
    let h = header(&mut r)?;
    // bound allocations by the payload size before trusting the header
    if h.nmax > bytes.len() / 8 {
        return Err(Error::Format(format!("nmax {} inconsistent with payload size", h.nmax)));
    }
    let chi = (0..h.nmax).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let mut beta = Vec::with_capacity(h.nmax);
    for _ in 0..h.nmax {
        let len = r.u32()? as usize;
        if len > (bytes.len() - r.pos) / 8 {
            return Err(Error::Format("row length exceeds payload".into()));
        }
        beta.push((0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok((h.version, GpswfBasis::from_parts(h.alpha, h.c, h.trunc, chi, beta)?))
}

fn obtain_basis(cache: Option<&BasisCache>, alpha: f64, c: f64, nmax: usize) -> Result<GpswfBasis> {
    match cache {
        Some(cache) => cache.get_or_build(alpha, c, nmax),
        None => build_basis(alpha, c, nmax),
    }
}

/// A CSV table held in memory; values are written with full precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(file: impl Into<String>, header: &[&str]) -> Self {
        Self {
            file: file.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Format(format!("csv: {e}"));
        w.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
    /// Directory the report was written to, when the config asks for output.
    pub dir: Option<PathBuf>,
}

impl Report {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }
}

fn timestamp_dir(root: &Path, scenario: &str) -> Result<PathBuf> {
    let base = root.join(scenario);
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    for i in 0..1000 {
        let dir = if i == 0 { base.join(&stamp) } else { base.join(format!("{stamp}-{i}")) };
        if !dir.exists() {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            return Ok(dir);
        }
    }
    Err(Error::io(&base, std::io::Error::other("could not allocate a report directory")))
}

fn finish(cfg: &ExperimentConfig, mut report: Report, assumptions: &[&str]) -> Result<Report> {
    let Some(root) = &cfg.output_dir else {
        return Ok(report);
    };
    let dir = timestamp_dir(root, &cfg.name)?;
    for t in &report.tables {
        let path = dir.join(&t.file);
        fs::write(&path, t.to_csv()?).map_err(|e| Error::io(&path, e))?;
    }
    let sidecar = serde_json::json!({
        "config": cfg,
        "environment": {
            "crate_version": env!("CARGO_PKG_VERSION"),
            "cache_version": CACHE_VERSION,
            "created_at": chrono::Utc::now().to_rfc3339(),
            "rng": RNG_NAME,
            "threads": rayon::current_num_threads(),
            "sup_grid_points": SUP_GRID,
        },
        "assumptions": assumptions,
        "summary": report.summary,
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&path, e))?;
    report.dir = Some(dir);
    Ok(report)
}

/// Runs the scenario named in the config.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.name.as_str() {
        "lambda-decay" => run_lambda_decay(cfg),
        "brownian" => run_brownian(cfg),
        "wm-table" => run_wm_table(cfg),
        "custom" => run_custom(cfg),
        other => Err(Error::Config(format!("unknown scenario '{other}'"))),
    }
}

const LAMBDA_HEADER: [&str; 13] = [
    "alpha",
    "c",
    "n",
    "chi",
    "lambda",
    "ln_lambda",
    "ln_lambda_bound",
    "lambda_margin",
    "ln_mu_abs",
    "ln_mu_bound",
    "mu_margin",
    "comparison_curve",
    "mu_method",
];

/// Eigenvalue decay sweep: χ_n, λ_n and the super-exponential bounds per α and c.
pub fn run_lambda_decay(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cache = cfg.cache()?;
    let cells: Vec<(f64, f64)> = cfg
        .c_list
        .iter()
        .flat_map(|&c| cfg.alpha_list.iter().map(move |&a| (a, c)))
        .collect();
    let results: Vec<(f64, f64, Vec<Vec<String>>, usize)> = cells
        .par_iter()
        .map(|&(alpha, c)| -> Result<_> {
            let basis = obtain_basis(cache.as_ref(), alpha, c, cfg.nmax)?;
            let spectrum = compute_spectrum(&basis)?;
            let mut violations = 0;
            let rows = spectrum
                .iter()
                .map(|e| {
                    let v = decay_bound_check(e, alpha, c);
                    if !v.holds {
                        violations += 1;
                    }
                    vec![
                        num(alpha),
                        num(c),
                        e.n.to_string(),
                        num(e.chi),
                        num(e.lambda),
                        num(e.ln_lambda),
                        num(v.ln_lambda_bound),
                        num(v.lambda_margin),
                        num(e.ln_mu_abs),
                        num(v.ln_mu_bound),
                        num(v.mu_margin),
                        num(comparison_curve(alpha, c, e.n)),
                        format!("{:?}", e.method).to_lowercase(),
                    ]
                })
                .collect();
            Ok((alpha, c, rows, violations))
        })
        .collect::<Result<_>>()?;

    let mut all = Table::new("lambda_decay.csv", &LAMBDA_HEADER);
    let mut tables = Vec::new();
    let multi_c = cfg.c_list.len() > 1;
    let mut violations = 0;
    for (alpha, c, rows, v) in results {
        violations += v;
        let file = if multi_c {
            format!("lambda_decay_alpha{alpha}_c{c}.csv")
        } else {
            format!("lambda_decay_alpha{alpha}.csv")
        };
        let mut t = Table::new(file, &LAMBDA_HEADER);
        for r in rows {
            all.push(r.clone());
            t.push(r);
        }
        tables.push(t);
    }
    tables.insert(0, all);
    let summary = serde_json::json!({ "rows": tables[0].rows.len(), "bound_violations": violations });
    finish(
        cfg,
        Report {
            scenario: cfg.name.clone(),
            tables,
            summary,
            dir: None,
        },
        &["bounds are reported only for n > (ec+1)/2"],
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Interior window used for the diagnostic sup column of the Brownian run.
pub const INTERIOR: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianMedian {
    pub n_terms: usize,
    pub median_sup: f64,
    pub median_interior_sup: f64,
    pub median_l2w: f64,
}

/// Sup of |f − S_N f| over the points of `grid` with |x| ≤ `window`.
fn windowed_sup(samples: &[(f64, f64, f64)], window: f64) -> f64 {
    samples
        .iter()
        .filter(|s| s.0.abs() <= window)
        .map(|s| (s.1 - s.2).abs())
        .fold(0.0, f64::max)
}

/// Brownian motion projections across consecutive seeds, with per-seed and median errors.
pub fn run_brownian(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cache = cfg.cache()?;
    let (s, k_terms) = match cfg.corpus.first() {
        Some(TargetSpec::Brownian { s, k_terms, .. }) => (*s, k_terms.unwrap_or(approx::DEFAULT_BROWNIAN_TERMS)),
        _ => return Err(Error::Config("brownian scenario needs a brownian corpus entry".into())),
    };
    let mut samples_t = Table::new("brownian_samples.csv", &["alpha", "c", "seed", "N", "x", "f", "approx", "error"]);
    let mut errors_t = Table::new(
        "brownian_errors.csv",
        &["alpha", "c", "seed", "N", "sup_error", "interior_sup_error", "l2w_error"],
    );
    let mut median_t = Table::new(
        "brownian_median.csv",
        &["alpha", "c", "N", "seeds", "median_sup_error", "median_interior_sup_error", "median_l2w_error"],
    );
    let mut medians = Vec::new();
    let grid: Vec<f64> = (0..SUP_GRID).map(|i| -1.0 + 2.0 * i as f64 / (SUP_GRID - 1) as f64).collect();
    for &c in &cfg.c_list {
        for &alpha in &cfg.alpha_list {
            let basis = obtain_basis(cache.as_ref(), alpha, c, cfg.basis_size())?;
            let per_seed: Vec<Vec<(usize, f64, f64, f64, Vec<(f64, f64, f64)>)>> = (0..cfg.seeds as u64)
                .into_par_iter()
                .map(|i| -> Result<_> {
                    let seed = cfg.seed + i;
                    let f = approx::brownian(s, seed, k_terms)?;
                    let projs = approx::project_closed_form(&basis, &f, &cfg.n_list)?;
                    projs
                        .iter()
                        .map(|p| {
                            let samples = eval_projection(&basis, &f, &p.coefficients, &grid)?;
                            Ok((p.n_terms, p.sup_error, windowed_sup(&samples, INTERIOR), p.l2w_error, samples))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            for (i, rows) in per_seed.iter().enumerate() {
                let seed = cfg.seed + i as u64;
                for (n, sup, isup, l2, samples) in rows {
                    errors_t.push(vec![num(alpha), num(c), seed.to_string(), n.to_string(), num(*sup), num(*isup), num(*l2)]);
                    for (x, fx, sx) in samples {
                        samples_t.push(vec![
                            num(alpha),
                            num(c),
                            seed.to_string(),
                            n.to_string(),
                            num(*x),
                            num(*fx),
                            num(*sx),
                            num(fx - sx),
                        ]);
                    }
                }
            }
            for (j, &n) in cfg.n_list.iter().enumerate() {
                let m = BrownianMedian {
                    n_terms: n,
                    median_sup: median(per_seed.iter().map(|r| r[j].1).collect()),
                    median_interior_sup: median(per_seed.iter().map(|r| r[j].2).collect()),
                    median_l2w: median(per_seed.iter().map(|r| r[j].3).collect()),
                };
                median_t.push(vec![
                    num(alpha),
                    num(c),
                    n.to_string(),
                    cfg.seeds.to_string(),
                    num(m.median_sup),
                    num(m.median_interior_sup),
                    num(m.median_l2w),
                ]);
                medians.push((alpha, c, m));
            }
        }
    }
    let summary = serde_json::json!({ "medians": medians.iter().map(|(a, c, m)| serde_json::json!({"alpha": a, "c": c, "median": m})).collect::<Vec<_>>(), "k_terms": k_terms, "s": s });
    finish(
        cfg,
        Report {
            scenario: cfg.name.clone(),
            tables: vec![median_t, errors_t, samples_t],
            summary,
            dir: None,
        },
        &[
            "S_N sums psi_0..psi_{N-1}",
            "L2 errors use the closed-form norm minus the coefficient mass",
            "sup errors on 2001 equispaced points of [-1,1]; interior column restricts to |x| <= 0.95",
        ],
    )
}

/// (x, f(x), S_N f(x)) on a grid, real parts.
fn eval_projection(
    basis: &GpswfBasis,
    f: &TargetFunction,
    coeffs: &[num_complex::Complex64],
    grid: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    grid.iter()
        .map(|&x| {
            let psi = basis.eval_all(x, 0, coeffs.len())?;
            let s: f64 = coeffs.iter().zip(&psi).map(|(c, p)| c.re * p).sum();
            Ok((x, f.eval(x).re, s))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WmCell {
    pub alpha: f64,
    pub s: f64,
    pub n_terms: usize,
    pub c: f64,
    pub error: f64,
    pub reference: Option<f64>,
    pub ratio: Option<f64>,
}

/// Weierstrass–Mandelbrot L²(ω_α) errors on the α × s grid against the printed table.
pub fn run_wm_table(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cache = cfg.cache()?;
    let wm: Vec<(f64, f64, Option<usize>)> = cfg
        .corpus
        .iter()
        .map(|t| match t {
            TargetSpec::WeierstrassMandelbrot { s, lambda, k_terms } => Ok((*s, *lambda, *k_terms)),
            _ => Err(Error::Config("wm-table corpus must hold Weierstrass-Mandelbrot entries".into())),
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(f64, f64)> = cfg
        .c_list
        .iter()
        .flat_map(|&c| cfg.alpha_list.iter().map(move |&a| (a, c)))
        .collect();
    let results: Vec<Vec<WmCell>> = cells
        .par_iter()
        .map(|&(alpha, c)| -> Result<Vec<WmCell>> {
            let basis = obtain_basis(cache.as_ref(), alpha, c, cfg.basis_size())?;
            let mut out = Vec::new();
            for &(s, lambda, k) in &wm {
                let f = approx::weierstrass_mandelbrot(s, lambda, k)?;
                for p in approx::project_closed_form(&basis, &f, &cfg.n_list)? {
                    let reference = if lambda == 2.0 && p.n_terms == 95 && c == 5.0 * PI {
                        wm_reference_value(alpha, s)
                    } else {
                        None
                    };
                    out.push(WmCell {
                        alpha,
                        s,
                        n_terms: p.n_terms,
                        c,
                        error: p.l2w_error,
                        reference,
                        ratio: reference.map(|v| p.l2w_error / v),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let cells: Vec<WmCell> = results.into_iter().flatten().collect();
    let mut t = Table::new("wm_table.csv", &["alpha", "s", "N", "c", "l2w_error", "reference_value", "ratio"]);
    for w in &cells {
        t.push(vec![
            num(w.alpha),
            num(w.s),
            w.n_terms.to_string(),
            num(w.c),
            num(w.error),
            opt(w.reference),
            opt(w.ratio),
        ]);
    }
    let summary = serde_json::json!({ "cells": cells });
    finish(
        cfg,
        Report {
            scenario: cfg.name.clone(),
            tables: vec![t],
            summary,
            dir: None,
        },
        &[
            "N=95 and c=5*pi are assumed for every table cell",
            "S_N sums psi_0..psi_{N-1}",
            "L2 errors use the closed-form norm minus the coefficient mass",
            "WM series truncated where the geometric tail falls below 1e-12",
        ],
    )
}

/// Projects every corpus function for each (α, c, N); closed forms where available, quadrature otherwise.
pub fn run_custom(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let cache = cfg.cache()?;
    let mut t = Table::new(
        "custom.csv",
        &["alpha", "c", "target", "N", "route", "l2w_error", "sup_error", "norm_sq"],
    );
    for &c in &cfg.c_list {
        for &alpha in &cfg.alpha_list {
            let basis = obtain_basis(cache.as_ref(), alpha, c, cfg.basis_size())?;
            for spec in &cfg.corpus {
                let spec = match spec {
                    TargetSpec::Brownian { s, seed, k_terms } if *seed == 0 => TargetSpec::Brownian {
                        s: *s,
                        seed: cfg.seed,
                        k_terms: *k_terms,
                    },
                    other => other.clone(),
                };
                let f = TargetFunction::from_spec(&spec)?;
                let closed = f.closed_form_coefficients(&basis, 1).is_some() && f.norm_sq(alpha).is_some();
                let projs = if closed {
                    approx::project_closed_form(&basis, &f, &cfg.n_list)?
                } else {
                    let order = cfg.quad_order.max(approx::quad_floor(&basis));
                    cfg.n_list
                        .iter()
                        .map(|&n| approx::project(&basis, &f, n, order))
                        .collect::<Result<_>>()?
                };
                for p in projs {
                    t.push(vec![
                        num(alpha),
                        num(c),
                        f.label().to_string(),
                        p.n_terms.to_string(),
                        serde_json::to_value(p.route)?.as_str().unwrap_or_default().to_string(),
                        num(p.l2w_error),
                        num(p.sup_error),
                        num(p.norm_sq),
                    ]);
                }
            }
        }
    }
    let summary = serde_json::json!({ "rows": t.rows.len() });
    finish(
        cfg,
        Report {
            scenario: cfg.name.clone(),
            tables: vec![t],
            summary,
            dir: None,
        },
        &["S_N sums psi_0..psi_{N-1}"],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BasisCache::new(dir.path()).unwrap();
        assert!(cache.get(0.5, 3.0, 8).unwrap().is_none());
        let b = cache.get_or_build(0.5, 3.0, 8).unwrap();
        let again = cache.get(0.5, 3.0, 8).unwrap().unwrap();
        assert_eq!(b, again);
        let entries = cache.list().unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!((entries[0].nmax, entries[0].version), (8, CACHE_VERSION));
        assert_eq!(cache.clear().unwrap(), 1);
        assert!(cache.list().unwrap().is_empty());
    }

    #[test]
    fn version_bump_misses() {
        let dir = tempfile::tempdir().unwrap();
        let old = BasisCache::with_version(dir.path(), CACHE_VERSION).unwrap();
        old.get_or_build(0.0, 2.0, 6).unwrap();
        let new = BasisCache::with_version(dir.path(), CACHE_VERSION + 1).unwrap();
        assert!(new.get(0.0, 2.0, 6).unwrap().is_none());
        // a stale file under the new key is ignored as well
        let stale = encode_basis(&build_basis(0.0, 2.0, 6).unwrap(), CACHE_VERSION);
        fs::write(new.path(&new.key(0.0, 2.0, 6)), stale).unwrap();
        assert!(new.get(0.0, 2.0, 6).unwrap().is_none());
    }

    #[test]
    fn corrupt_entry_is_discarded() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BasisCache::new(dir.path()).unwrap();
        let b = cache.get_or_build(1.0, 4.0, 6).unwrap();
        let path = cache.path(&cache.key(1.0, 4.0, 6));
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, &bytes).unwrap();
        assert!(cache.get(1.0, 4.0, 6).unwrap().is_none());
        assert!(!path.exists());
        assert_eq!(cache.get_or_build(1.0, 4.0, 6).unwrap(), b);
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(decode_basis(b"nope").is_err());
        let mut bytes = encode_basis(&build_basis(0.0, 1.0, 3).unwrap(), 1);
        bytes[0] = b'X';
        assert!(matches!(decode_basis(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn config_merge_and_validation() {
        let cfg = ExperimentConfig::from_json(r#"{"name": "lambda-decay", "nmax": 12}"#).unwrap();
        assert_eq!(cfg.nmax, 12);
        assert_eq!(cfg.alpha_list, vec![1.0, 1.5, 2.0, 2.5]);
        assert!(ExperimentConfig::from_json(r#"{"name": "nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"name": "wm-table", "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"name": "brownian", "alpha_list": []}"#).is_err());
    }

    #[test]
    fn lambda_decay_rows_and_warm_cache() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::defaults("lambda-decay").unwrap();
        cfg.nmax = 15;
        cfg.cache = true;
        cfg.cache_dir = Some(dir.path().join("cache"));
        let cold = run_lambda_decay(&cfg).unwrap();
        let warm = run_lambda_decay(&cfg).unwrap();
        let t = cold.table("lambda_decay.csv").unwrap();
        assert_eq!(t.rows.len(), cfg.alpha_list.len() * cfg.nmax);
        assert_eq!(t.to_csv().unwrap(), warm.table("lambda_decay.csv").unwrap().to_csv().unwrap());
        assert_eq!(cold.summary["bound_violations"], 0);
        for r in &t.rows {
            if !r[7].is_empty() {
                assert!(r[7].parse::<f64>().unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn reports_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::defaults("custom").unwrap();
        cfg.output_dir = Some(dir.path().to_path_buf());
        cfg.corpus.push(TargetSpec::UserSampled {
            grid: vec![-1.0, 0.0, 1.0],
            values: vec![1.0, 0.0, 1.0],
        });
        let r = run(&cfg).unwrap();
        let out = r.dir.unwrap();
        assert!(out.starts_with(dir.path().join("custom")));
        assert!(out.join("config.json").exists());
        let csv = fs::read_to_string(out.join("custom.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * cfg.n_list.len());
    }

    #[test]
    fn reference_table_lookup() {
        assert_eq!(wm_reference_value(0.1, 0.25), Some(1.69146e-4));
        assert_eq!(wm_reference_value(2.0, 1.0), Some(7.44278e-3));
        assert_eq!(wm_reference_value(0.3, 1.0), None);
        for row in WM_REFERENCE_TABLE {
            assert!(row.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
