//! Experiment configuration, execution and result files.
//!
//! A configuration is a flat set of `key = value` pairs, whether it comes from
//! command-line flags or a config file, and goes through one validation path.
//! Results are tables with a versioned schema, written as CSV or JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::compression::{regularize_target_timed, Method, ScanOptions, DEFAULT_MAX_QUBITS};
use crate::error::Error;
use crate::gisin_massar::{clone_fidelity_oracle, gm_coefficients, gm_state, GmSpec, PureQubit};
use crate::linalg::{C64, RANK_TOL};
use crate::mps::MatrixProductState;
use crate::sequential::{optimize_schedule_with, SynthesisOptions, DEFAULT_RESTARTS};

pub const RESULTS_SCHEMA: &str = "seqclone.results/1";
pub const GM_INFO_SCHEMA: &str = "seqclone.gm_info/1";
pub const MAX_QUBITS_ENV: &str = "SEQCLONE_MAX_QUBITS";

pub const RESULT_COLUMNS: [&str; 11] = [
    "experiment",
    "n",
    "clones",
    "setting",
    "method",
    "fidelity",
    "error",
    "iterations",
    "restarts",
    "wall_seconds",
    "seed",
];
pub const GM_INFO_COLUMNS: [&str; 5] = ["clones", "n", "kind", "index", "value"];

const KEYS: [&str; 16] = [
    "experiment",
    "clones",
    "qubits",
    "bond_caps",
    "methods",
    "aux",
    "restarts",
    "seed",
    "alpha",
    "beta",
    "output",
    "format",
    "threads",
    "max_sweeps",
    "timing",
    "mps_cache",
];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid {field}: {message}")]
    Config { field: String, message: String },
    #[error("{qubits} qubits exceeds the cap of {max}; set {MAX_QUBITS_ENV} to raise it")]
    Resource { qubits: usize, max: usize },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    fn config(field: &str, message: impl Into<String>) -> Self {
        RunError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } => 2,
            RunError::Resource { .. } | RunError::Core(Error::Resource { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Regularize,
    Synthesize,
    GmInfo,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::Regularize => "regularize",
            ExperimentKind::Synthesize => "synthesize",
            ExperimentKind::GmInfo => "gm-info",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "regularize" => Some(ExperimentKind::Regularize),
            "synthesize" => Some(ExperimentKind::Synthesize),
            "gm-info" | "gm_info" => Some(ExperimentKind::GmInfo),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Clone counts `M`, one target each; `n = 2M - 1`.
    pub clones: Vec<usize>,
    pub bond_caps: Vec<usize>,
    pub methods: Vec<Method>,
    pub aux: bool,
    pub restarts: usize,
    pub seed: u64,
    pub input: PureQubit,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub threads: Option<usize>,
    pub max_sweeps: Option<usize>,
    /// Fill `wall_seconds`; off by default so repeated runs are byte-identical.
    pub timing: bool,
    pub mps_cache: Option<PathBuf>,
    pub max_qubits: usize,
}

/// Qubit cap from the environment, with a warning when it is raised.
pub fn max_qubits_from_env() -> Result<(usize, Option<String>), RunError> {
    match std::env::var(MAX_QUBITS_ENV) {
        Err(_) => Ok((DEFAULT_MAX_QUBITS, None)),
        Ok(text) => {
            let v: usize = text
                .trim()
                .parse()
                .map_err(|_| RunError::config(MAX_QUBITS_ENV, format!("not a count: {text:?}")))?;
            let warning = (v > DEFAULT_MAX_QUBITS).then(|| {
                format!(
                    "warning: {MAX_QUBITS_ENV}={v} lifts the {DEFAULT_MAX_QUBITS}-qubit cap; \
                     dense states above it are unsupported and may exhaust memory"
                )
            });
            Ok((v, warning))
        }
    }
}

/// Read a flat `key = value` file. Blank lines and lines starting with `#`
/// are skipped; `-` and `_` are interchangeable in keys.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, RunError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            RunError::config("config", format!("line {} has no '=': {line:?}", lineno + 1))
        })?;
        let key = normalize_key(k);
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(RunError::config(&key, "given twice"));
        }
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

fn parse_list<T: std::str::FromStr>(field: &str, text: &str) -> Result<Vec<T>, RunError> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(RunError::config(field, "empty list"));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| RunError::config(field, format!("cannot parse {s:?}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(field: &str, text: &str) -> Result<T, RunError> {
    text.trim()
        .parse()
        .map_err(|_| RunError::config(field, format!("cannot parse {text:?}")))
}

fn parse_complex(field: &str, text: &str) -> Result<C64, RunError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let vals: Vec<f64> = match parts.as_slice() {
        [re] => vec![parse_one(field, re)?, 0.0],
        [re, im] => vec![parse_one(field, re)?, parse_one(field, im)?],
        _ => return Err(RunError::config(field, format!("expected \"re,im\", got {text:?}"))),
    };
    if !vals.iter().all(|v| v.is_finite()) {
        return Err(RunError::config(field, "must be finite"));
    }
    Ok(C64::new(vals[0], vals[1]))
}

fn parse_flag(field: &str, text: &str) -> Result<bool, RunError> {
    match text.trim() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(RunError::config(field, format!("expected on/off, got {other:?}"))),
    }
}

fn positive(field: &str, v: usize) -> Result<usize, RunError> {
    if v == 0 {
        Err(RunError::config(field, "must be at least 1"))
    } else {
        Ok(v)
    }
}

impl ExperimentConfig {
    /// Build and validate a configuration from `key = value` pairs. The
    /// `experiment` key is required.
    pub fn from_pairs(pairs: &BTreeMap<String, String>, max_qubits: usize) -> Result<Self, RunError> {
        for key in pairs.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(RunError::config(key, "unknown setting"));
            }
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let experiment = get("experiment")
            .ok_or_else(|| RunError::config("experiment", "missing"))
            .and_then(|s| {
                ExperimentKind::parse(s.trim()).ok_or_else(|| {
                    RunError::config("experiment", format!("expected regularize, synthesize or gm-info, got {s:?}"))
                })
            })?;

        let mut clones: Vec<usize> = match get("clones") {
            Some(t) => parse_list("clones", t)?,
            None => Vec::new(),
        };
        if let Some(t) = get("qubits") {
            if !clones.is_empty() {
                return Err(RunError::config("qubits", "give either clones or qubits, not both"));
            }
            for n in parse_list::<usize>("qubits", t)? {
                if n % 2 == 0 {
                    return Err(RunError::config("qubits", format!("{n} is not 2M-1 for any clone count M")));
                }
                clones.push(n.div_ceil(2));
            }
        }
        if clones.is_empty() {
            return Err(RunError::config("clones", "missing (give clones or qubits)"));
        }
        for &m in &clones {
            positive("clones", m)?;
            let n = 2 * m - 1;
            if n > max_qubits {
                return Err(RunError::Resource { qubits: n, max: max_qubits });
            }
        }

        let bond_caps = match get("bond_caps") {
            Some(t) => parse_list("bond_caps", t)?,
            None => vec![2, 3],
        };
        for &c in &bond_caps {
            positive("bond_caps", c)?;
        }
        let methods = match get("methods") {
            Some(t) => parse_list("methods", t)?,
            None => vec![Method::SvdTruncation, Method::Variational, Method::VariationalSeededBySvd],
        };
        let aux = get("aux").map(|t| parse_flag("aux", t)).transpose()?.unwrap_or(true);
        let restarts = positive(
            "restarts",
            get("restarts").map(|t| parse_one("restarts", t)).transpose()?.unwrap_or(DEFAULT_RESTARTS),
        )?;
        let seed = get("seed").map(|t| parse_one("seed", t)).transpose()?.unwrap_or(0);
        let alpha = get("alpha").map(|t| parse_complex("alpha", t)).transpose()?;
        let beta = get("beta").map(|t| parse_complex("beta", t)).transpose()?;
        let input = match (alpha, beta) {
            (None, None) => PureQubit::plus(),
            (a, b) => PureQubit::normalize(
                a.unwrap_or(C64::new(0.0, 0.0)),
                b.unwrap_or(C64::new(0.0, 0.0)),
            )
            .map_err(|_| RunError::config("alpha", "alpha and beta are both zero"))?,
        };
        let format = match get("format").map(str::trim) {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => return Err(RunError::config("format", format!("expected csv or json, got {other:?}"))),
        };
        let threads = get("threads")
            .map(|t| parse_one("threads", t).and_then(|v| positive("threads", v)))
            .transpose()?;
        let max_sweeps = get("max_sweeps")
            .map(|t| parse_one("max_sweeps", t).and_then(|v| positive("max_sweeps", v)))
            .transpose()?;
        let timing = get("timing").map(|t| parse_flag("timing", t)).transpose()?.unwrap_or(false);
        let output = get("output").filter(|s| !s.trim().is_empty()).map(|s| PathBuf::from(s.trim()));
        let mps_cache = get("mps_cache").filter(|s| !s.trim().is_empty()).map(|s| PathBuf::from(s.trim()));

        Ok(Self {
            experiment,
            clones,
            bond_caps,
            methods,
            aux,
            restarts,
            seed,
            input,
            output,
            format,
            threads,
            max_sweeps,
            timing,
            mps_cache,
            max_qubits,
        })
    }
}

/// One row of a regularize or synthesize result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub clones: usize,
    /// `bond_cap=<D>` or `aux=on|off`.
    pub setting: String,
    pub method: String,
    pub fidelity: f64,
    pub error: f64,
    /// Sweeps used (best restart for synthesis).
    pub iterations: usize,
    /// Optimizer restarts; 0 for compression rows.
    pub restarts: usize,
    pub wall_seconds: Option<f64>,
    pub seed: u64,
}

/// One row of a gm-info file. `kind` is `alpha` (index `j`), `bond_dim`
/// (index = cut after qubit `k`), `max_bond_dim` (index 0) or
/// `clone_fidelity` (index = clone number).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmInfoRow {
    pub clones: usize,
    pub n: usize,
    pub kind: String,
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Results(Vec<ResultRow>),
    GmInfo(Vec<GmInfoRow>),
}

#[derive(Serialize, Deserialize)]
struct JsonDocument<T> {
    schema: String,
    rows: Vec<T>,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> Result<String, RunError> {
        match format {
            OutputFormat::Json => {
                let text = match self {
                    Report::Results(rows) => serde_json::to_string_pretty(&JsonDocument {
                        schema: RESULTS_SCHEMA.into(),
                        rows: rows.clone(),
                    }),
                    Report::GmInfo(rows) => serde_json::to_string_pretty(&JsonDocument {
                        schema: GM_INFO_SCHEMA.into(),
                        rows: rows.clone(),
                    }),
                }
                .map_err(Error::from)?;
                Ok(text + "\n")
            }
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                match self {
                    Report::Results(rows) => {
                        w.write_record(RESULT_COLUMNS).map_err(Error::from)?;
                        for r in rows {
                            w.write_record([
                                r.experiment.clone(),
                                r.n.to_string(),
                                r.clones.to_string(),
                                r.setting.clone(),
                                r.method.clone(),
                                float(r.fidelity),
                                float(r.error),
                                r.iterations.to_string(),
                                r.restarts.to_string(),
                                r.wall_seconds.map(float).unwrap_or_default(),
                                r.seed.to_string(),
                            ])
                            .map_err(Error::from)?;
                        }
                    }
                    Report::GmInfo(rows) => {
                        w.write_record(GM_INFO_COLUMNS).map_err(Error::from)?;
                        for r in rows {
                            w.write_record([
                                r.clones.to_string(),
                                r.n.to_string(),
                                r.kind.clone(),
                                r.index.to_string(),
                                float(r.value),
                            ])
                            .map_err(Error::from)?;
                        }
                    }
                }
                let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
            }
        }
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), Error> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!("unexpected CSV header {found:?}")));
    }
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(
    text: &str,
    format: OutputFormat,
    schema: &str,
    columns: &[&str],
) -> Result<Vec<T>, Error> {
    match format {
        OutputFormat::Json => {
            let doc: JsonDocument<T> = serde_json::from_str(text)?;
            if doc.schema != schema {
                return Err(Error::Parse(format!("schema {:?}, expected {schema:?}", doc.schema)));
            }
            Ok(doc.rows)
        }
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            check_header(r.headers()?, columns)?;
            r.deserialize().map(|row| row.map_err(Error::from)).collect()
        }
    }
}

/// Parse a regularize/synthesize result file.
pub fn read_results(text: &str, format: OutputFormat) -> Result<Vec<ResultRow>, Error> {
    read_rows(text, format, RESULTS_SCHEMA, &RESULT_COLUMNS)
}

/// Parse a gm-info result file.
pub fn read_gm_info(text: &str, format: OutputFormat) -> Result<Vec<GmInfoRow>, Error> {
    read_rows(text, format, GM_INFO_SCHEMA, &GM_INFO_COLUMNS)
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

fn cache_path(dir: &Path, m: usize, input: &PureQubit) -> PathBuf {
    let bits: Vec<String> = [input.alpha().re, input.alpha().im, input.beta().re, input.beta().im]
        .iter()
        .map(|v| format!("{:016x}", v.to_bits()))
        .collect();
    dir.join(format!("gm-m{m}-{}.json", bits.join("-")))
}

/// GM target as an MPS, read from or written to the cache directory if set.
fn gm_target(m: usize, input: PureQubit, cache: Option<&Path>) -> Result<MatrixProductState, RunError> {
    let build = || -> Result<MatrixProductState, Error> {
        let v = gm_state(&GmSpec::new(m, input)?)?;
        MatrixProductState::from_statevector(&v, RANK_TOL)
    };
    let Some(dir) = cache else {
        return Ok(build()?);
    };
    let path = cache_path(dir, m, &input);
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(Error::from)?;
        let mps = MatrixProductState::from_json(&text)?;
        if mps.qubits() != 2 * m - 1 {
            return Err(Error::Structural(format!("cached MPS {} has {} qubits", path.display(), mps.qubits())).into());
        }
        return Ok(mps);
    }
    let mps = build()?;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Output { path: dir.to_path_buf(), source })?;
    std::fs::write(&path, mps.to_json()?).map_err(|source| RunError::Output { path: path.clone(), source })?;
    Ok(mps)
}

fn regularize(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, RunError> {
    let mut opts = ScanOptions {
        seed: cfg.seed,
        max_qubits: cfg.max_qubits,
        ..ScanOptions::default()
    };
    if let Some(s) = cfg.max_sweeps {
        opts.max_sweeps = s;
    }
    let mut rows = Vec::new();
    for &m in &cfg.clones {
        let target = gm_target(m, cfg.input, cfg.mps_cache.as_deref())?;
        for (rep, secs) in regularize_target_timed(&target, &cfg.bond_caps, &cfg.methods, &opts)? {
            rows.push(ResultRow {
                experiment: ExperimentKind::Regularize.tag().into(),
                n: rep.qubits,
                clones: m,
                setting: format!("bond_cap={}", rep.bond_cap),
                method: rep.method.tag().into(),
                fidelity: rep.fidelity,
                error: rep.error,
                iterations: rep.sweeps_used,
                restarts: 0,
                wall_seconds: cfg.timing.then_some(secs),
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

fn synthesize(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, RunError> {
    let mut rows = Vec::new();
    for &m in &cfg.clones {
        let start = Instant::now();
        let n = 2 * m - 1;
        let target = gm_state(&GmSpec::new(m, cfg.input)?)?;
        let mut opts = SynthesisOptions {
            aux: cfg.aux,
            restarts: cfg.restarts,
            seed: cfg.seed,
            ..SynthesisOptions::default()
        };
        if let Some(s) = cfg.max_sweeps {
            opts.max_sweeps = s;
        }
        let res = optimize_schedule_with(&target, n, &opts)?;
        rows.push(ResultRow {
            experiment: ExperimentKind::Synthesize.tag().into(),
            n,
            clones: m,
            setting: format!("aux={}", if cfg.aux { "on" } else { "off" }),
            method: "xxz".into(),
            fidelity: res.fidelity,
            error: 1.0 - res.fidelity,
            iterations: res.iterations,
            restarts: res.restarts_used,
            wall_seconds: cfg.timing.then(|| start.elapsed().as_secs_f64()),
            seed: cfg.seed,
        });
    }
    Ok(rows)
}

fn gm_info(cfg: &ExperimentConfig) -> Result<Vec<GmInfoRow>, RunError> {
    let mut rows = Vec::new();
    for &m in &cfg.clones {
        let n = 2 * m - 1;
        let row = |kind: &str, index: usize, value: f64| GmInfoRow {
            clones: m,
            n,
            kind: kind.into(),
            index,
            value,
        };
        for (j, a) in gm_coefficients(m)?.into_iter().enumerate() {
            rows.push(row("alpha", j, a));
        }
        let mps = gm_target(m, cfg.input, cfg.mps_cache.as_deref())?;
        for (k, d) in mps.internal_bond_dims().into_iter().enumerate() {
            rows.push(row("bond_dim", k + 1, d as f64));
        }
        rows.push(row("max_bond_dim", 0, mps.bond_dimension() as f64));
        let spec = GmSpec::new(m, cfg.input)?;
        for c in 1..=m {
            rows.push(row("clone_fidelity", c, clone_fidelity_oracle(&spec, c)?));
        }
    }
    Ok(rows)
}

/// Run the experiment on a pool of `cfg.threads` workers (all cores when unset).
pub fn run(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::config("threads", e.to_string()))?;
    pool.install(|| match cfg.experiment {
        ExperimentKind::Regularize => regularize(cfg).map(Report::Results),
        ExperimentKind::Synthesize => synthesize(cfg).map(Report::Results),
        ExperimentKind::GmInfo => gm_info(cfg).map(Report::GmInfo),
    })
}

/// Run and write the rendered report to `cfg.output`, or return it when no
/// output path is set.
pub fn run_to_output(cfg: &ExperimentConfig) -> Result<Option<String>, RunError> {
    let text = run(cfg)?.render(cfg.format)?;
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|source| RunError::Output {
                path: path.clone(),
                source,
            })?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
