//! Seeded experiment drivers and their persisted run records.
//!
//! Paper-style bounds are evaluated with their constants set to 1, so absolute
//! levels are only meaningful "modulo C(m)"; fitted slopes carry the signal.
//! Existence experiments aggregate trials by taking the minimum.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::exponents::{self, ExtendedExponent, Real};
use crate::normest::{self, bilinear_l2_norm, estimate_norm, multi_start_estimate, EstimatorSettings, Method, MethodChoice, NormEstimate};
use crate::rng;
use crate::tensors::{fourier_matrix, rademacher, FormInstance, GeneratorKind, Provenance, UnimodularTensor};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest coefficient count for which exhaustive sign enumeration is allowed (`2^20` tensors).
pub const EXHAUSTIVE_MAX_ENTRIES: usize = 20;

/// `8√(2 ln 9)`, the constant known for the real-sign bilinear case.
pub fn real_case_reference_constant() -> f64 {
    8.0 * (2.0 * 9f64.ln()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MinNormSearch,
    Slope,
    ConjectureRatio,
    FourierScan,
    ConstantOne,
}

/// Dimension path for the conjecture-ratio series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionPath {
    /// `(1, N, N)`.
    TailPair,
    /// `(N, N, N)`.
    Diagonal,
}

impl DimensionPath {
    pub fn dims(self, n: usize) -> [usize; 3] {
        match self {
            DimensionPath::TailPair => [1, n, n],
            DimensionPath::Diagonal => [n, n, n],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
    pub p1: Vec<ExtendedExponent>,
    pub p2: Vec<ExtendedExponent>,
}

impl FourierGrid {
    fn points(&self) -> Vec<(usize, usize, ExtendedExponent, ExtendedExponent)> {
        let mut out = Vec::new();
        for &n1 in &self.n1 {
            for &n2 in &self.n2 {
                for p1 in &self.p1 {
                    for p2 in &self.p2 {
                        out.push((n1, n2, p1.clone(), p2.clone()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ps: Vec<ExtendedExponent>,
    /// Dimensions `n` (or path parameters `N`), one row each.
    pub schedule: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub method: MethodChoice,
    pub estimator: EstimatorSettings,
    #[serde(default)]
    pub exhaustive: bool,
    #[serde(default)]
    pub path: Option<DimensionPath>,
    #[serde(default)]
    pub grid: Option<FourierGrid>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            ps: Vec::new(),
            schedule: Vec::new(),
            trials: 1,
            seed: 0,
            method: MethodChoice::Auto,
            estimator: EstimatorSettings::default(),
            exhaustive: false,
            path: None,
            grid: None,
        }
    }

    pub fn m(&self) -> usize {
        self.ps.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub dims: Vec<usize>,
    pub ps: Vec<ExtendedExponent>,
    #[serde(default)]
    pub method: Option<Method>,
    pub values: BTreeMap<String, f64>,
}

/// Wall-clock data, excluded from the determinism contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub created_unix: u64,
    pub code_version: String,
}

impl Metadata {
    pub fn now() -> Self {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Metadata { created_unix, code_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub derived: BTreeMap<String, f64>,
    pub metadata: Metadata,
}

impl RunRecord {
    fn new(config: ExperimentConfig, rows: Vec<Row>, derived: BTreeMap<String, f64>) -> Self {
        RunRecord { schema_version: SCHEMA_VERSION, config, rows, derived, metadata: Metadata::now() }
    }

    /// JSON of the rows alone; byte-identical across runs with the same config.
    pub fn rows_json(&self) -> String {
        serde_json::to_string(&self.rows).expect("rows serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Schema-checked parse: malformed JSON is a [`Error::Json`], a wrong
    /// version or unknown structure is an [`Error::Schema`].
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::Schema(format!("schema version {v} is not supported (expected {SCHEMA_VERSION})"))),
            None => return Err(Error::Schema("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
    }

    /// CSV with header `dims,ps,method,<value keys…>`; dims joined by `x`, exponents by `;`.
    pub fn to_csv(&self) -> Result<String> {
        let keys: Vec<&String> = {
            let mut ks: Vec<&String> = self.rows.iter().flat_map(|r| r.values.keys()).collect();
            ks.sort();
            ks.dedup();
            ks
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["dims".to_string(), "ps".to_string(), "method".to_string()];
        header.extend(keys.iter().map(|k| k.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
                row.ps.iter().map(ExtendedExponent::to_string).collect::<Vec<_>>().join(";"),
                row.method.map(|m| serde_json::to_value(m).expect("method").as_str().unwrap_or("").to_string()).unwrap_or_default(),
            ];
            rec.extend(keys.iter().map(|k| row.values.get(*k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn persist(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, record.to_json())?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<RunRecord> {
    let text = std::fs::read_to_string(path)?;
    RunRecord::from_json(&text)
}

pub fn write_csv(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, record.to_csv()?)?;
    Ok(())
}

/// Column documentation for each experiment kind's CSV export.
pub fn describe(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::MinNormSearch | ExperimentKind::Slope => {
            "dims: n x ... x n; ps: exponents joined by ';'; method: norm engine of the best trial;\n\
             best: smallest norm value over trials (exact upper when the engine is exact, else certified lower);\n\
             lower: certified lower bound of that tensor; best_trial: index of the winning draw;\n\
             hl_floor: universal lower floor (only when all p >= 2); theorem1_bound: n-dependent factor of the optimal upper estimate, C = 1"
        }
        ExperimentKind::ConjectureRatio => {
            "dims: n1 x n2 x n3 along the path; ps: 3/2;3;3; method: empty;\n\
             n: path parameter N; ratio: (n1+n2+n3)^(1/2) n2^(1/6) n3^(1/6) / ((n1^(1/3)+n2^(1/3)+n3^(1/3)) n2^(1/3) n3^(1/3))"
        }
        ExperimentKind::FourierScan | ExperimentKind::ConstantOne => {
            "dims: n1 x n2; ps: p1;p2; method: norm engine;\n\
             estimate: norm of the leading n1 x n2 block of the n x n Fourier matrix, n = max(n1, n2);\n\
             bound: n^(1/2) n1^(1/2-1/p1) n2^(1/2-1/p2); ratio: estimate / bound"
        }
    }
}

/// Least-squares line through `(log n, log value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub residual: f64,
}

pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*n > 0.0) || !(*v > 0.0)) {
        return argument(format!("slope fit needs positive n and values, got ({n}, {v})"));
    }
    let mut xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let len = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / len;
    let mean_y = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 2 || sxx == 0.0 {
        return argument("slope fit needs at least two distinct n");
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = points
        .iter()
        .map(|(n, v)| (v.ln() - (intercept + slope * n.ln())).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit { slope, intercept, residual })
}

/// Smallest-norm sign tensor found by a search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub tensor: UnimodularTensor,
    pub estimate: NormEstimate,
    /// Index of the winning draw (or of the sign pattern, when exhaustive).
    pub index: usize,
}

/// Minimum norm over `trials` Rademacher draws of shape `n × ⋯ × n`, or over
/// every sign tensor when `exhaustive` is set.
pub fn min_norm_search(
    ps: &[ExtendedExponent],
    n: usize,
    trials: usize,
    seed: u64,
    method: MethodChoice,
    estimator: &EstimatorSettings,
    exhaustive: bool,
) -> Result<SearchOutcome> {
    if ps.is_empty() || n == 0 {
        return argument("search needs at least one exponent and n >= 1");
    }
    let dims = vec![n; ps.len()];
    let tensors: Vec<UnimodularTensor> = if exhaustive {
        let entries = n.checked_pow(ps.len() as u32).filter(|&e| e <= EXHAUSTIVE_MAX_ENTRIES).ok_or_else(|| {
            Error::Capability(format!("exhaustive search needs at most 2^{EXHAUSTIVE_MAX_ENTRIES} sign tensors"))
        })?;
        (0..1u64 << entries)
            .map(|bits| {
                let signs = (0..entries).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
                UnimodularTensor::from_signs(dims.clone(), signs, Provenance { kind: GeneratorKind::File, seed: Some(bits) })
            })
            .collect::<Result<_>>()?
    } else {
        if trials == 0 {
            return argument("search needs trials >= 1");
        }
        (0..trials as u64).map(|t| rademacher(&dims, rng::split_seed(seed, t))).collect::<Result<_>>()?
    };
    let estimates: Vec<NormEstimate> = tensors
        .par_iter()
        .map(|t| estimate_norm(&FormInstance::with_exponents(t.clone(), ps)?, method, estimator))
        .collect::<Result<_>>()?;
    let (index, estimate) = estimates
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1.value() < best.1.value() { cur } else { best })
        .expect("at least one tensor");
    Ok(SearchOutcome { tensor: tensors[index].clone(), estimate, index })
}

fn search_row(ps: &[ExtendedExponent], n: usize, outcome: &SearchOutcome) -> Row {
    let mut values = BTreeMap::new();
    values.insert("best".to_string(), outcome.estimate.value());
    values.insert("lower".to_string(), outcome.estimate.lower);
    values.insert("best_trial".to_string(), outcome.index as f64);
    if let Ok(hl) = exponents::hl_lower_bound(ps, n) {
        values.insert("hl_floor".to_string(), hl);
    }
    let domain = crate::tensors::DomainSpec::from_parts(&vec![n; ps.len()], ps).expect("nonempty domain");
    values.insert("theorem1_bound".to_string(), normest::theorem1_upper_value(&domain));
    Row { dims: vec![n; ps.len()], ps: ps.to_vec(), method: Some(outcome.estimate.method), values }
}

/// One `min_norm_search` per schedule entry, recorded as a run.
pub fn min_norm_record(config: &ExperimentConfig) -> Result<RunRecord> {
    let rows = config
        .schedule
        .iter()
        .map(|&n| {
            let out = min_norm_search(&config.ps, n, config.trials, config.seed, config.method, &config.estimator, config.exhaustive)?;
            Ok(search_row(&config.ps, n, &out))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunRecord::new(config.clone(), rows, BTreeMap::new()))
}

/// Minimal norms along a strictly increasing dimension schedule, with the
/// fitted exponent of `n` next to the theoretical one.
pub fn slope_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.schedule.len() < 2 || config.schedule.windows(2).any(|w| w[0] >= w[1]) {
        return argument("slope schedule must be strictly increasing with at least two entries");
    }
    let mut record = min_norm_record(config)?;
    record.config.kind = ExperimentKind::Slope;
    let points: Vec<(f64, f64)> = record.rows.iter().map(|r| (r.dims[0] as f64, r.values["best"])).collect();
    let fit = slope_fit(&points)?;
    record.derived.insert("slope".into(), fit.slope);
    record.derived.insert("intercept".into(), fit.intercept);
    record.derived.insert("residual".into(), fit.residual);
    record.derived.insert("theorem1_exponent".into(), exponents::theorem1_exponent(&config.ps)?.to_f64());
    Ok(record)
}

/// Upper bound `(n1+n2+n3)^{1/2} n2^{1/6} n3^{1/6}` for `p = (3/2, 3, 3)` divided by
/// the conjectured order `(n1^{1/3}+n2^{1/3}+n3^{1/3}) n2^{1/3} n3^{1/3}`, both with constant 1.
pub fn conjecture_ratio(n1: usize, n2: usize, n3: usize) -> f64 {
    let (a, b, c) = (n1 as f64, n2 as f64, n3 as f64);
    let upper = (a + b + c).sqrt() * b.powf(1.0 / 6.0) * c.powf(1.0 / 6.0);
    let conjectured = (a.cbrt() + b.cbrt() + c.cbrt()) * b.cbrt() * c.cbrt();
    upper / conjectured
}

/// Ratio along a dimension path with the fitted decay exponent in `N`.
pub fn conjecture_series(path: DimensionPath, ns: &[usize]) -> Result<RunRecord> {
    if ns.iter().any(|&n| n == 0) {
        return argument("path parameters must be positive");
    }
    let ps = exponents::parse_exponent_list("3/2,3,3")?;
    let rows: Vec<Row> = ns
        .iter()
        .map(|&n| {
            let dims = path.dims(n);
            let mut values = BTreeMap::new();
            values.insert("n".to_string(), n as f64);
            values.insert("ratio".to_string(), conjecture_ratio(dims[0], dims[1], dims[2]));
            Row { dims: dims.to_vec(), ps: ps.clone(), method: None, values }
        })
        .collect();
    let mut derived = BTreeMap::new();
    let ratios: Vec<f64> = rows.iter().map(|r| r.values["ratio"]).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    derived.insert("strictly_decreasing".into(), if decreasing { 1.0 } else { 0.0 });
    if let Ok(fit) = slope_fit(&ns.iter().map(|&n| n as f64).zip(ratios).collect::<Vec<_>>()) {
        derived.insert("slope".into(), fit.slope);
        derived.insert("intercept".into(), fit.intercept);
        derived.insert("residual".into(), fit.residual);
    }
    let mut config = ExperimentConfig::new(ExperimentKind::ConjectureRatio);
    config.ps = ps;
    config.schedule = ns.to_vec();
    config.path = Some(path);
    Ok(RunRecord::new(config, rows, derived))
}

/// One point of the Fourier scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierPoint {
    pub n1: usize,
    pub n2: usize,
    pub p1: ExtendedExponent,
    pub p2: ExtendedExponent,
    pub estimate: NormEstimate,
    /// `n^{1/2} n1^{1/2−1/p1} n2^{1/2−1/p2}` with `n = max{n1, n2}`.
    pub bound: f64,
    pub ratio: f64,
}

/// `n^{1/2} n1^{1/2−1/p1} n2^{1/2−1/p2}`, `n = max{n1, n2}`.
pub fn fourier_bound(n1: usize, n2: usize, p1: &ExtendedExponent, p2: &ExtendedExponent) -> f64 {
    let n = n1.max(n2) as f64;
    let e1 = 0.5 - p1.reciprocal().to_f64();
    let e2 = 0.5 - p2.reciprocal().to_f64();
    n.sqrt() * (n1 as f64).powf(e1) * (n2 as f64).powf(e2)
}

/// Norm of the leading `n1 × n2` block of the `max{n1,n2}`-point Fourier matrix on `ℓ_{p1}^{n1} × ℓ_{p2}^{n2}`.
pub fn fourier_scan(n1: usize, n2: usize, p1: &ExtendedExponent, p2: &ExtendedExponent, estimator: &EstimatorSettings) -> Result<FourierPoint> {
    let two = ExtendedExponent::two();
    if *p1 < two || *p2 < two {
        return Err(Error::Domain(format!("fourier scan needs p1, p2 >= 2, got ({p1}, {p2})")));
    }
    if n1 == 0 || n2 == 0 {
        return argument("fourier scan needs positive dimensions");
    }
    let tensor = fourier_matrix(n1.max(n2))?.restrict(&[n1, n2])?;
    let f = FormInstance::with_exponents(tensor, &[p1.clone(), p2.clone()])?;
    let estimate = if *p1 == two && *p2 == two { bilinear_l2_norm(&f, estimator.seed)? } else { multi_start_estimate(&f, estimator) };
    let bound = fourier_bound(n1, n2, p1, p2);
    let ratio = estimate.value() / bound;
    Ok(FourierPoint { n1, n2, p1: p1.clone(), p2: p2.clone(), estimate, bound, ratio })
}

fn fourier_row(pt: &FourierPoint) -> Row {
    let mut values = BTreeMap::new();
    values.insert("estimate".to_string(), pt.estimate.value());
    values.insert("bound".to_string(), pt.bound);
    values.insert("ratio".to_string(), pt.ratio);
    Row { dims: vec![pt.n1, pt.n2], ps: vec![pt.p1.clone(), pt.p2.clone()], method: Some(pt.estimate.method), values }
}

pub fn fourier_grid_scan(grid: &FourierGrid, estimator: &EstimatorSettings) -> Result<RunRecord> {
    let points = grid.points();
    let scanned: Vec<FourierPoint> = points
        .par_iter()
        .map(|(n1, n2, p1, p2)| fourier_scan(*n1, *n2, p1, p2, estimator))
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = scanned.iter().map(fourier_row).collect();
    let mut derived = BTreeMap::new();
    derived.insert("max_ratio".into(), scanned.iter().map(|p| p.ratio).fold(0.0, f64::max));
    let mut config = ExperimentConfig::new(ExperimentKind::FourierScan);
    config.estimator = *estimator;
    config.grid = Some(grid.clone());
    Ok(RunRecord::new(config, rows, derived))
}

/// The real-sign reference constant next to the worst complex Fourier ratio on `grid`.
pub fn constant_comparison(grid: &FourierGrid, estimator: &EstimatorSettings) -> Result<RunRecord> {
    let mut record = fourier_grid_scan(grid, estimator)?;
    record.config.kind = ExperimentKind::ConstantOne;
    record.derived.insert("reference_constant".into(), real_case_reference_constant());
    let n1_one = record.rows.iter().filter(|r| r.dims[0] == 1).map(|r| (r.values["ratio"] - 1.0).abs()).fold(0.0, f64::max);
    record.derived.insert("max_abs_deviation_n1_eq_1".into(), n1_one);
    Ok(record)
}

/// Runs the experiment a config describes.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    match config.kind {
        ExperimentKind::MinNormSearch => min_norm_record(config),
        ExperimentKind::Slope => slope_experiment(config),
        ExperimentKind::ConjectureRatio => conjecture_series(config.path.unwrap_or(DimensionPath::TailPair), &config.schedule),
        ExperimentKind::FourierScan | ExperimentKind::ConstantOne => {
            let grid = config.grid.as_ref().ok_or_else(|| Error::Argument("fourier experiments need a grid".into()))?;
            if config.kind == ExperimentKind::FourierScan {
                fourier_grid_scan(grid, &config.estimator)
            } else {
                constant_comparison(grid, &config.estimator)
            }
        }
    }
}

/// The theoretical exponent recorded next to fitted slopes.
pub fn theoretical_exponent(ps: &[ExtendedExponent]) -> Result<Real> {
    exponents::theorem1_exponent(ps)
}
