//! Command-line front end.
//!
//! Every flag can also be set through an environment variable named
//! `SPARSEPOIS_<FLAG>`, e.g. `SPARSEPOIS_SEED` or `SPARSEPOIS_NULL_REPS`.
//! Flags win over the environment, and both win over config files.
//!
//! Exit status: 0 on success, 2 for unreadable input (bad flags, malformed
//! CSV or JSON), 3 for inputs that parse but are invalid, 4 for I/O and other
//! runtime failures.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::boundaries::{boundary_point, max_test_boundary, MeansScale, RegimeLabel};
use crate::detectors::{DetectorKind, DetectorResult, PreparedNull};
use crate::error::{Error, Result};
use crate::harness::{
    self, calibrate, estimate_power, load_calibration, run_grid, save_calibration, save_grid_json,
    write_grid_csv, CalibratedDetector, CalibrationConfig, GridConfig,
};
use crate::model::{Component, Hypothesis, ModelSpec, RngStream, Sidedness, StreamPurpose};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sparsepois", version, about = "Detection tests for sparse Poisson means")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Master seed; required wherever simulation happens.
    #[arg(long, global = true, env = "SPARSEPOIS_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "SPARSEPOIS_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, global = true, env = "SPARSEPOIS_NULL_REPS")]
    pub null_reps: Option<usize>,
    #[arg(long, global = true, env = "SPARSEPOIS_POWER_REPS")]
    pub power_reps: Option<usize>,
    /// Worker threads for simulation, 0 for all cores.
    #[arg(long, global = true, env = "SPARSEPOIS_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true, env = "SPARSEPOIS_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "SPARSEPOIS_FORMAT")]
    pub format: Option<Format>,
    /// Indented JSON.
    #[arg(long, global = true, env = "SPARSEPOIS_PRETTY")]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    TwoSided,
    OneSided,
}

impl From<SideArg> for Sidedness {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::TwoSided => Sidedness::TwoSided,
            SideArg::OneSided => Sidedness::OneSided,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test observed counts against their null means.
    Test(TestArgs),
    /// Simulate critical values for a scenario's null.
    Calibrate(CalibrateArgs),
    /// Estimate power of calibrated detectors under a scenario.
    Power(PowerArgs),
    /// Run a power grid from a config file.
    Grid(GridArgs),
    /// Tabulate a detection boundary.
    Boundary(BoundaryArgs),
    /// Draw raw samples from a scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV with header `index,lambda,count`, or JSON `{"lambdas": [...], "counts": [...]}` with --format json.
    #[arg(long)]
    pub counts: PathBuf,
    /// Comma-separated detector names; defaults to the suite for --sidedness.
    #[arg(long, value_delimiter = ',')]
    pub detectors: Vec<String>,
    #[arg(long, value_enum, default_value = "two-sided")]
    pub sidedness: SideArg,
    /// Precomputed critical values; otherwise they are simulated with --seed.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Scenario whose alternative the likelihood ratio is computed against.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Include per-entry P-values in the report.
    #[arg(long)]
    pub pvalues: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Scenario JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub detectors: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub calibration: PathBuf,
    /// Grid cell index, selecting an independent block of power streams.
    #[arg(long, default_value_t = 0)]
    pub cell: u32,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Grid config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Also write the full grid (config, calibration, cells) as JSON here.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryKind {
    Dense,
    DenseOneSided,
    Sparse,
    SmallMeans,
    Max,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long, value_enum)]
    pub kind: BoundaryKind,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 0.025)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub reps: u32,
    #[arg(long, value_enum, default_value = "alternative")]
    pub hypothesis: HypArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypArg {
    Null,
    Alternative,
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => EXIT_PARSE,
        Error::Io(_) => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Test(a) => cmd_test(g, a),
        Command::Calibrate(a) => cmd_calibrate(g, a),
        Command::Power(a) => cmd_power(g, a),
        Command::Grid(a) => cmd_grid(g, a),
        Command::Boundary(a) => cmd_boundary(g, a),
        Command::Simulate(a) => cmd_simulate(g, a),
    })
}

fn require_seed(g: &GlobalOpts, what: &str) -> Result<u64> {
    g.seed.ok_or_else(|| Error::invalid(format!("{what} needs --seed (or SPARSEPOIS_SEED)")))
}

fn calibration_config(g: &GlobalOpts, seed: u64) -> CalibrationConfig {
    let mut c = CalibrationConfig::new(seed);
    if let Some(a) = g.alpha {
        c.alpha = a;
    }
    if let Some(r) = g.null_reps {
        c.null_reps = r;
    }
    c
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// JSON from a file; errors carry the path of the offending field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let inner = e.into_inner();
        let msg = format!("{}: field `{at}`: {inner}", path.display());
        if inner.is_data() {
            Error::invalid(msg)
        } else {
            Error::Parse { line: inner.line(), msg }
        }
    })
}

fn decode_value<T: DeserializeOwned>(path: &Path, v: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let at = e.path().to_string();
        Error::invalid(format!("{}: field `{at}`: {}", path.display(), e.into_inner()))
    })
}

fn output(g: &GlobalOpts) -> Result<Box<dyn Write>> {
    Ok(match &g.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(g: &GlobalOpts, value: &T) -> Result<()> {
    let mut w = output(g)?;
    if g.pretty {
        serde_json::to_writer_pretty(&mut w, value)?;
    } else {
        serde_json::to_writer(&mut w, value)?;
    }
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn parse_detectors(names: &[String], default: Vec<DetectorKind>) -> Result<Vec<DetectorKind>> {
    if names.is_empty() {
        return Ok(default);
    }
    names.iter().map(|n| DetectorKind::from_name(n.trim())).collect()
}

/// Observed data: null means and counts, in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsFile {
    pub lambdas: Vec<f64>,
    pub counts: Vec<u64>,
}

impl CountsFile {
    /// CSV with the fixed header `index,lambda,count`. Rows may come in any
    /// order; they are sorted by index.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().ne(["index", "lambda", "count"]) {
            return Err(Error::Parse { line: 1, msg: "expected header `index,lambda,count`".into() });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let field = |j: usize, what: &str| -> Result<&str> {
                rec.get(j).ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })
            };
            let bad = |what: &str, v: &str| Error::Parse { line, msg: format!("bad {what} {v:?}") };
            let idx = field(0, "index")?;
            let idx: u64 = idx.parse().map_err(|_| bad("index", idx))?;
            let lam = field(1, "lambda")?;
            let lam: f64 = lam.parse().map_err(|_| bad("lambda", lam))?;
            let cnt = field(2, "count")?;
            let cnt: u64 = cnt.parse().map_err(|_| bad("count", cnt))?;
            rows.push((idx, lam, cnt, line));
        }
        rows.sort_by_key(|r| r.0);
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Parse { line: w[0].3.max(w[1].3), msg: format!("duplicate index {}", w[0].0) });
            }
        }
        let out =
            CountsFile { lambdas: rows.iter().map(|r| r.1).collect(), counts: rows.iter().map(|r| r.2).collect() };
        out.check()?;
        Ok(out)
    }

    pub fn check(&self) -> Result<()> {
        if self.counts.is_empty() {
            return Err(Error::EmptyInput("counts file has no rows".into()));
        }
        if self.lambdas.len() != self.counts.len() {
            return Err(Error::LengthMismatch { lambdas: self.lambdas.len(), counts: self.counts.len() });
        }
        if let Some((i, l)) = self.lambdas.iter().enumerate().find(|(_, l)| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("lambda at row {} is {l}; means must be positive", i + 1)));
        }
        Ok(())
    }

    pub fn load(path: &Path, format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::from_csv(open(path)?),
            Format::Json => {
                let c: CountsFile = read_json(path)?;
                c.check()?;
                Ok(c)
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DetectorReport {
    #[serde(flatten)]
    pub result: DetectorResult,
    #[serde(with = "crate::serde_util")]
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Serialize)]
pub struct TestReport {
    pub n: usize,
    pub alpha: f64,
    pub null_reps: usize,
    pub seed: u64,
    pub detectors: Vec<DetectorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pvalues: Option<Vec<f64>>,
}

fn cmd_test(g: &GlobalOpts, a: &TestArgs) -> Result<()> {
    let data = CountsFile::load(&a.counts, g.format.unwrap_or(Format::Csv))?;
    let side: Sidedness = a.sidedness.into();
    let default = match side {
        Sidedness::TwoSided => DetectorKind::two_sided_suite(),
        Sidedness::OneSided => DetectorKind::one_sided_suite(),
    };
    let mut kinds = parse_detectors(&a.detectors, default)?;
    let model: Option<ModelSpec> = a.model.as_deref().map(read_json).transpose()?;
    if model.is_none() && a.detectors.is_empty() {
        kinds.retain(|k| !k.needs_alternative());
    }
    if let Some(m) = &model {
        if m.lambdas() != data.lambdas.as_slice() {
            return Err(Error::invalid("--model null means differ from the counts file"));
        }
    }
    let prep = PreparedNull::new(&data.lambdas)?;
    let calibrated = match &a.calibration {
        Some(p) => {
            let all = load_calibration(open(p)?)?;
            kinds
                .iter()
                .map(|k| {
                    all.iter()
                        .find(|c| c.kind == *k)
                        .cloned()
                        .ok_or_else(|| Error::invalid(format!("calibration file has no entry for {k}")))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let seed = require_seed(g, "simulated calibration")?;
            calibrate(&prep, model.as_ref(), &kinds, &calibration_config(g, seed))?
        }
    };
    let expected = crate::model::null_fingerprint(&data.lambdas);
    let mut reports = Vec::with_capacity(kinds.len());
    for c in &calibrated {
        let fp_ok = match (&model, c.kind.needs_alternative()) {
            (Some(m), true) => c.spec_fingerprint == m.full_fingerprint(),
            _ => c.spec_fingerprint == expected,
        };
        if !fp_ok {
            return Err(Error::FingerprintMismatch { expected, found: c.spec_fingerprint.clone() });
        }
        let result = match &model {
            Some(m) => prep.evaluate_against(c.kind, &data.counts, m)?,
            None => prep.evaluate(c.kind, &data.counts)?,
        };
        reports.push(DetectorReport { reject: c.rejects(result.statistic), critical_value: c.critical_value, result });
    }
    let pvalues = if a.pvalues {
        Some(prep.log_pvalues(&data.counts, side)?.into_iter().map(f64::exp).collect())
    } else {
        None
    };
    let first = calibrated.first().map(|c| c.calibration);
    emit_json(
        g,
        &TestReport {
            n: data.counts.len(),
            alpha: first.map_or(g.alpha.unwrap_or(0.05), |c| c.alpha),
            null_reps: first.map_or(0, |c| c.null_reps),
            seed: first.map_or(0, |c| c.seed),
            detectors: reports,
            pvalues,
        },
    )
}

fn cmd_calibrate(g: &GlobalOpts, a: &CalibrateArgs) -> Result<()> {
    let seed = require_seed(g, "calibrate")?;
    let model: ModelSpec = read_json(&a.model)?;
    let default = match model.sidedness() {
        Sidedness::TwoSided => DetectorKind::two_sided_suite(),
        Sidedness::OneSided => DetectorKind::one_sided_suite(),
    };
    let kinds = parse_detectors(&a.detectors, default)?;
    let prep = PreparedNull::for_model(&model)?;
    let cal = calibrate(&prep, Some(&model), &kinds, &calibration_config(g, seed))?;
    let mut w = output(g)?;
    save_calibration(&cal, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct PowerReport {
    seed: u64,
    cell: u32,
    estimates: Vec<harness::PowerEstimate>,
    calibration: Vec<CalibratedDetector>,
}

fn cmd_power(g: &GlobalOpts, a: &PowerArgs) -> Result<()> {
    let seed = require_seed(g, "power")?;
    let model: ModelSpec = read_json(&a.model)?;
    let calibration = load_calibration(open(&a.calibration)?)?;
    let prep = PreparedNull::for_model(&model)?;
    let reps = g.power_reps.unwrap_or(200);
    let estimates = estimate_power(&prep, &model, &calibration, reps, seed, a.cell)?;
    emit_json(g, &PowerReport { seed, cell: a.cell, estimates, calibration })
}

fn cmd_grid(g: &GlobalOpts, a: &GridArgs) -> Result<()> {
    let mut raw: serde_json::Value = read_json(&a.config)?;
    let obj = raw
        .as_object_mut()
        .ok_or_else(|| Error::invalid(format!("{}: grid config must be a JSON object", a.config.display())))?;
    if let Some(s) = g.seed {
        obj.insert("seed".into(), s.into());
    }
    if !obj.contains_key("seed") {
        return Err(Error::invalid("grid needs a seed, in the config or via --seed"));
    }
    if let Some(x) = g.alpha {
        obj.insert("alpha".into(), x.into());
    }
    if let Some(x) = g.null_reps {
        obj.insert("null_reps".into(), x.into());
    }
    if let Some(x) = g.power_reps {
        obj.insert("power_reps".into(), x.into());
    }
    let cfg: GridConfig = decode_value(&a.config, raw)?;
    let grid = run_grid(&cfg, g.workers)?;
    for e in &grid.errors {
        eprintln!("warning: cell beta={} signal={}: {}", e.beta, e.signal, e.message);
    }
    if let Some(p) = &a.json_out {
        let mut w = BufWriter::new(File::create(p)?);
        save_grid_json(&grid, &mut w, g.pretty)?;
        w.flush()?;
    }
    let mut w = output(g)?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => write_grid_csv(&grid.cells, &mut w)?,
        Format::Json => save_grid_json(&grid, &mut w, g.pretty)?,
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRow {
    pub beta: f64,
    pub threshold: f64,
    pub regime_label: RegimeLabel,
}

pub fn boundary_table(kind: BoundaryKind, betas: &[f64]) -> Result<Vec<BoundaryRow>> {
    betas
        .iter()
        .map(|&beta| {
            let threshold = match kind {
                BoundaryKind::Dense | BoundaryKind::Sparse => {
                    let want_dense = kind == BoundaryKind::Dense;
                    if want_dense != (beta < 0.5) {
                        let range = if want_dense { "(0, 1/2)" } else { "(1/2, 1)" };
                        return Err(Error::Domain { op: "boundary", value: beta, domain: range });
                    }
                    boundary_point(beta, Sidedness::TwoSided, MeansScale::Large)?.threshold
                }
                BoundaryKind::DenseOneSided => crate::boundaries::rho_dense_one_sided(beta)?,
                BoundaryKind::SmallMeans => boundary_point(beta, Sidedness::TwoSided, MeansScale::Small)?.threshold,
                BoundaryKind::Max => max_test_boundary(beta)?,
            };
            Ok(BoundaryRow { beta, threshold, regime_label: RegimeLabel::of(beta) })
        })
        .collect()
}

fn cmd_boundary(g: &GlobalOpts, a: &BoundaryArgs) -> Result<()> {
    let betas = harness::Axis::Range { from: a.from, to: a.to, step: a.step }.points()?;
    let rows = boundary_table(a.kind, &betas)?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(g, &rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(g)?);
            w.write_record(["beta", "threshold", "regime_label"])?;
            for r in &rows {
                let label = match r.regime_label {
                    RegimeLabel::Dense => "dense",
                    RegimeLabel::ModeratelySparse => "moderately-sparse",
                    RegimeLabel::VerySparse => "very-sparse",
                };
                w.write_record([r.beta.to_string(), r.threshold.to_string(), label.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn cmd_simulate(g: &GlobalOpts, a: &SimulateArgs) -> Result<()> {
    let seed = require_seed(g, "simulate")?;
    let model: ModelSpec = read_json(&a.model)?;
    let under = match a.hypothesis {
        HypArg::Null => Hypothesis::Null,
        HypArg::Alternative => Hypothesis::Alternative,
    };
    let samples: Vec<_> = (0..a.reps)
        .map(|rep| model.sample(RngStream::derived(seed, StreamPurpose::Simulate, 0, rep), under))
        .collect();
    match g.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(g, &samples),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(g)?);
            w.write_record(["replicate", "index", "lambda", "count", "component"])?;
            for (rep, s) in samples.iter().enumerate() {
                for (i, (&x, &l)) in s.counts.iter().zip(model.lambdas()).enumerate() {
                    let comp = match s.labels.as_ref().map(|v| v[i]) {
                        Some(Component::Up) => "up",
                        Some(Component::Down) => "down",
                        _ => "null",
                    };
                    w.write_record([rep.to_string(), i.to_string(), l.to_string(), x.to_string(), comp.into()])?;
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_csv_parsing() {
        let ok = "index,lambda,count\n2,3.5,4\n0,1,0\n1,2,7\n";
        let c = CountsFile::from_csv(ok.as_bytes()).unwrap();
        assert_eq!(c.lambdas, vec![1.0, 2.0, 3.5]);
        assert_eq!(c.counts, vec![0, 7, 4]);

        let bad = "index,lambda,count\n0,1,0\n1,2,x\n";
        assert!(matches!(CountsFile::from_csv(bad.as_bytes()), Err(Error::Parse { line: 3, .. })));
        let dup = "index,lambda,count\n0,1,0\n0,2,1\n";
        assert!(matches!(CountsFile::from_csv(dup.as_bytes()), Err(Error::Parse { .. })));
        let neg = "index,lambda,count\n0,0,1\n";
        assert!(matches!(CountsFile::from_csv(neg.as_bytes()), Err(Error::InvalidParameter(_))));
        let empty = "index,lambda,count\n";
        assert!(matches!(CountsFile::from_csv(empty.as_bytes()), Err(Error::EmptyInput(_))));
        assert!(CountsFile::from_csv("i,l,c\n".as_bytes()).is_err());
    }

    #[test]
    fn boundary_rows() {
        let t = boundary_table(BoundaryKind::Dense, &[0.2, 0.25]).unwrap();
        assert!((t[0].threshold + 0.15).abs() < 1e-12);
        assert!((t[1].threshold + 0.125).abs() < 1e-12);
        let t = boundary_table(BoundaryKind::Sparse, &[0.6, 0.9]).unwrap();
        assert!((t[0].threshold - 0.1).abs() < 1e-12);
        assert!((t[1].threshold - 0.467_544_467_966_324).abs() < 1e-12);
        assert!(boundary_table(BoundaryKind::Dense, &[0.6]).is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let p = exit_code(&Error::Parse { line: 1, msg: String::new() });
        let v = exit_code(&Error::UnknownDetector("x".into()));
        let r = exit_code(&Error::Io(io::Error::other("x")));
        assert_eq!((p, v, r), (EXIT_PARSE, EXIT_VALIDATION, EXIT_RUNTIME));
    }
}
