//! Text file formats: datasets, models, predictions, run configuration and
//! replication tables.
//!
//! Structured documents are JSON with a top-level `format_version`. Floats
//! are written in shortest round-trip form, so a write/load pair is exact.
//! Every write goes to a temporary sibling file that is then renamed over the
//! target.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Truth};
use crate::error::{Error, Result};
use crate::funcspace::{FunctionSample, Grid};
use crate::kernels::{make_sine_projection, FiniteRankOperator, KernelFamily, KernelSpec};
use crate::model::{selected_indices, FitReport, MfRkhsModel};
use crate::simgen::{format_zero_set, ScenarioConfig, MULTI_DIM_FREQUENCIES, ONE_DIM_FREQUENCIES};
use crate::solver::FitConfig;

pub const FORMAT_VERSION: u32 = 1;

/// Samples of one variable on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSet {
    pub axes: Vec<Vec<f64>>,
    /// One flat row-major value vector per sample.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateRecord {
    pub name: String,
    pub axes: Vec<Vec<f64>>,
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthRecord {
    pub theta: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub format_version: u32,
    pub response: SampleSet,
    pub covariates: Vec<CovariateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthRecord>,
}

/// Spectral data of a finite-rank operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorRecord {
    pub axes: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
}

/// Stand-alone operator file referenced from a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub format_version: u32,
    pub operator: OperatorRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub kernels: Vec<KernelSpec>,
    pub operator: OperatorRecord,
    pub theta: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub train_covariates: Vec<CovariateRecord>,
    pub config: FitConfig,
    pub report: ReportRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionsFile {
    pub format_version: u32,
    pub predictions: SampleSet,
}

/// Summary written by `fit --report-out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSummary {
    pub format_version: u32,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub theta: Vec<f64>,
    /// 1-based indices of selected covariates.
    pub selected: Vec<usize>,
}

/// One shared kernel or one per covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelConfig {
    Shared(KernelSpec),
    PerCovariate(Vec<KernelSpec>),
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::Shared(KernelSpec {
            family: KernelFamily::Gaussian,
            bandwidth: 1.0,
        })
    }
}

impl KernelConfig {
    pub fn specs(&self, p: usize) -> Result<Vec<KernelSpec>> {
        let specs = match self {
            KernelConfig::Shared(s) => vec![*s; p],
            KernelConfig::PerCovariate(v) if v.len() == p => v.clone(),
            KernelConfig::PerCovariate(v) => {
                return Err(Error::DimensionMismatch(format!(
                    "{} kernel specs for {p} covariates",
                    v.len()
                )))
            }
        };
        for s in &specs {
            s.validate()?;
        }
        Ok(specs)
    }
}

/// Sine projection with per-axis counts, or spectral data read from a file.
/// With neither field set the counts follow the response dimension.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorConfig {
    pub sine_counts: Option<Vec<usize>>,
    pub spectral_file: Option<PathBuf>,
}

impl OperatorConfig {
    /// Builds the operator on `grid`. A relative `spectral_file` resolves
    /// against `base_dir`.
    pub fn build(&self, grid: &Arc<Grid>, base_dir: &Path) -> Result<FiniteRankOperator> {
        match (&self.sine_counts, &self.spectral_file) {
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "operator: give sine_counts or spectral_file, not both".into(),
            )),
            (Some(counts), None) => make_sine_projection(counts, grid.clone()),
            (None, Some(file)) => {
                let op = load_operator(&base_dir.join(file))?;
                if op.grid().as_ref() != grid.as_ref() {
                    return Err(Error::GridMismatch(
                        "spectral file grid differs from the response grid".into(),
                    ));
                }
                Ok(op)
            }
            (None, None) => {
                let counts = match grid.dim() {
                    1 => vec![ONE_DIM_FREQUENCIES],
                    d => vec![MULTI_DIM_FREQUENCIES; d],
                };
                make_sine_projection(&counts, grid.clone())
            }
        }
    }
}

/// Configuration consumed by `fit`; `scenario` feeds `simulate`/`repro`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fit: FitConfig,
    pub kernel: KernelConfig,
    pub operator: OperatorConfig,
    pub scenario: ScenarioConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        self.scenario.validate()?;
        if let KernelConfig::Shared(s) = &self.kernel {
            s.validate()?;
        }
        Ok(())
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("cannot serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn parse_err(source: &str, e: &serde_json::Error) -> Error {
    Error::Parse {
        location: format!("{source}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// Parses a versioned document, checking `format_version` before the body.
pub fn parse_versioned<T: DeserializeOwned>(text: &str, source: &str) -> Result<T> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| parse_err(source, &e))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    serde_json::from_str(text).map_err(|e| parse_err(source, &e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn grid_from_axes(axes: &[Vec<f64>], field: &str) -> Result<Arc<Grid>> {
    Grid::new(axes.to_vec())
        .map(Arc::new)
        .map_err(|e| Error::InvalidDataset(format!("{field}: {e}")))
}

fn samples_on(grid: &Arc<Grid>, rows: &[Vec<f64>], field: &str) -> Result<Vec<FunctionSample>> {
    rows.iter()
        .enumerate()
        .map(|(i, v)| {
            FunctionSample::new(grid.clone(), v.clone())
                .map_err(|e| Error::InvalidDataset(format!("{field} sample {i}: {e}")))
        })
        .collect()
}

fn axes_of(fs: &[FunctionSample]) -> Vec<Vec<f64>> {
    fs.first().map(|f| f.grid().axes().to_vec()).unwrap_or_default()
}

fn values_of(fs: &[FunctionSample]) -> Vec<Vec<f64>> {
    fs.iter().map(|f| f.values().to_vec()).collect()
}

fn covariate_records(names: &[String], covariates: &[Vec<FunctionSample>]) -> Vec<CovariateRecord> {
    names
        .iter()
        .zip(covariates)
        .map(|(name, xs)| CovariateRecord {
            name: name.clone(),
            axes: axes_of(xs),
            samples: values_of(xs),
        })
        .collect()
}

fn covariates_from_records(records: &[CovariateRecord]) -> Result<Vec<Vec<FunctionSample>>> {
    records
        .iter()
        .enumerate()
        .map(|(l, rec)| {
            let field = format!("covariate {l} ({})", rec.name);
            let grid = grid_from_axes(&rec.axes, &field)?;
            samples_on(&grid, &rec.samples, &field)
        })
        .collect()
}

impl DatasetFile {
    pub fn from_dataset(data: &Dataset) -> Self {
        DatasetFile {
            format_version: FORMAT_VERSION,
            response: SampleSet {
                axes: axes_of(&data.response),
                samples: values_of(&data.response),
            },
            covariates: covariate_records(&data.names, &data.covariates),
            truth: data.truth.as_ref().map(|t| TruthRecord {
                theta: t.theta.clone(),
                u: values_of(&t.u),
            }),
        }
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        let rgrid = grid_from_axes(&self.response.axes, "response")?;
        let response = samples_on(&rgrid, &self.response.samples, "response")?;
        let covariates = covariates_from_records(&self.covariates)?;
        let truth = match self.truth {
            Some(t) => Some(Truth {
                u: samples_on(&rgrid, &t.u, "truth.u")?,
                theta: t.theta,
            }),
            None => None,
        };
        let data = Dataset {
            response,
            covariates,
            names: self.covariates.into_iter().map(|c| c.name).collect(),
            truth,
        };
        data.validate()?;
        Ok(data)
    }
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    write_json(path, &DatasetFile::from_dataset(data))
}

pub fn parse_dataset(text: &str, source: &str) -> Result<Dataset> {
    parse_versioned::<DatasetFile>(text, source)?.into_dataset()
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_text(path)?, &path.display().to_string())
}

fn operator_record(op: &FiniteRankOperator) -> OperatorRecord {
    OperatorRecord {
        axes: op.grid().axes().to_vec(),
        eigenvalues: op.eigenvalues().to_vec(),
        eigenfunctions: values_of(op.eigenfunctions()),
    }
}

fn operator_from_record(rec: OperatorRecord) -> Result<FiniteRankOperator> {
    let grid = grid_from_axes(&rec.axes, "operator")?;
    let w = samples_on(&grid, &rec.eigenfunctions, "operator eigenfunction")?;
    FiniteRankOperator::new(grid, rec.eigenvalues, w)
}

pub fn write_operator(path: &Path, op: &FiniteRankOperator) -> Result<()> {
    write_json(
        path,
        &OperatorFile {
            format_version: FORMAT_VERSION,
            operator: operator_record(op),
        },
    )
}

pub fn load_operator(path: &Path) -> Result<FiniteRankOperator> {
    let file: OperatorFile = parse_versioned(&read_text(path)?, &path.display().to_string())?;
    operator_from_record(file.operator)
}

impl ModelFile {
    pub fn from_model(model: &MfRkhsModel) -> Self {
        let names: Vec<String> = (1..=model.p()).map(|l| format!("x{l}")).collect();
        ModelFile {
            format_version: FORMAT_VERSION,
            kernels: model.specs.clone(),
            operator: operator_record(&model.op),
            theta: model.theta.clone(),
            u: values_of(&model.u),
            train_covariates: covariate_records(&names, &model.train_x),
            config: model.config.clone(),
            report: ReportRecord {
                iterations: model.report.iterations,
                final_objective: model.report.final_objective,
                converged: model.report.converged,
                objective_trace: model.report.objective_trace.clone(),
            },
        }
    }

    pub fn into_model(self) -> Result<MfRkhsModel> {
        let op = operator_from_record(self.operator)?;
        let u = samples_on(op.grid(), &self.u, "u")?;
        let model = MfRkhsModel {
            specs: self.kernels,
            op,
            theta: self.theta,
            u,
            train_x: covariates_from_records(&self.train_covariates)?,
            config: self.config,
            report: FitReport {
                iterations: self.report.iterations,
                final_objective: self.report.final_objective,
                converged: self.report.converged,
                objective_trace: self.report.objective_trace,
            },
        };
        for s in &model.specs {
            s.validate()?;
        }
        model.validate()?;
        Ok(model)
    }
}

pub fn model_to_string(model: &MfRkhsModel) -> Result<String> {
    serde_json::to_string_pretty(&ModelFile::from_model(model))
        .map_err(|e| Error::Numerical(format!("cannot serialize model: {e}")))
}

pub fn parse_model(text: &str, source: &str) -> Result<MfRkhsModel> {
    parse_versioned::<ModelFile>(text, source)?.into_model()
}

pub fn write_model(path: &Path, model: &MfRkhsModel) -> Result<()> {
    write_json(path, &ModelFile::from_model(model))
}

pub fn load_model(path: &Path) -> Result<MfRkhsModel> {
    parse_model(&read_text(path)?, &path.display().to_string())
}

pub fn write_predictions(path: &Path, predictions: &[FunctionSample]) -> Result<()> {
    write_json(
        path,
        &PredictionsFile {
            format_version: FORMAT_VERSION,
            predictions: SampleSet {
                axes: axes_of(predictions),
                samples: values_of(predictions),
            },
        },
    )
}

pub fn load_predictions(path: &Path) -> Result<Vec<FunctionSample>> {
    let file: PredictionsFile = parse_versioned(&read_text(path)?, &path.display().to_string())?;
    let grid = grid_from_axes(&file.predictions.axes, "predictions")?;
    samples_on(&grid, &file.predictions.samples, "predictions")
}

impl FitSummary {
    pub fn from_model(model: &MfRkhsModel) -> Self {
        FitSummary {
            format_version: FORMAT_VERSION,
            iterations: model.report.iterations,
            final_objective: model.report.final_objective,
            converged: model.report.converged,
            theta: model.theta.clone(),
            selected: selected_indices(&model.theta),
        }
    }
}

pub fn write_fit_summary(path: &Path, model: &MfRkhsModel) -> Result<()> {
    write_json(path, &FitSummary::from_model(model))
}

/// Run configuration; unlike data files the version field is optional.
pub fn parse_run_config(text: &str, source: &str) -> Result<RunConfig> {
    let mut body: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(text).map_err(|e| parse_err(source, &e))?;
    if let Some(v) = body.remove("format_version") {
        let found = v.as_u64().unwrap_or(u64::MAX);
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::Version {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
    }
    let cfg: RunConfig =
        serde_json::from_value(serde_json::Value::Object(body)).map_err(|e| Error::Parse {
            location: source.to_string(),
            message: e.to_string(),
        })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    parse_run_config(&read_text(path)?, &path.display().to_string())
}

/// One `(M, kernel)` cell of a replication table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproRow {
    pub scenario: String,
    pub zero_set: Vec<usize>,
    pub kernel: KernelFamily,
    pub sigma: f64,
    pub selection_counts: Vec<usize>,
    pub mean_mse: f64,
    pub reps: usize,
}

pub const REPRO_HEADER: &str = "scenario,M,kernel,sigma,x1,x2,x3,x4,x5,mean_mse,reps";

pub fn repro_csv(rows: &[ReproRow]) -> String {
    let mut out = String::from(REPRO_HEADER);
    out.push('\n');
    for r in rows {
        let counts: Vec<String> = r.selection_counts.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scenario,
            format_zero_set(&r.zero_set),
            r.kernel,
            r.sigma,
            counts.join(","),
            r.mean_mse,
            r.reps
        ));
    }
    out
}

pub fn write_repro_csv(path: &Path, rows: &[ReproRow]) -> Result<()> {
    write_atomic(path, repro_csv(rows).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit, predict_dataset};
    use crate::simgen::{generate, SimData};

    fn sim(n: usize) -> SimData {
        generate(&ScenarioConfig {
            n,
            seed: 5,
            ..ScenarioConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn dataset_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let data = sim(4).dataset;
        write_dataset(&path, &data).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, data);
        for (a, b) in back.response.iter().zip(&data.response) {
            let bits = |f: &FunctionSample| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(back.truth, data.truth);
        // No temporary file is left behind.
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn wrong_sample_length_names_covariate_and_sample() {
        let mut file = DatasetFile::from_dataset(&sim(4).dataset);
        file.covariates[2].samples[3].pop();
        let text = serde_json::to_string(&file).unwrap();
        let err = parse_dataset(&text, "mem").unwrap_err().to_string();
        assert!(err.contains("covariate 2"), "{err}");
        assert!(err.contains("sample 3"), "{err}");
    }

    #[test]
    fn truncated_and_versioned_files() {
        let text = serde_json::to_string_pretty(&DatasetFile::from_dataset(&sim(2).dataset)).unwrap();
        let cut = &text[..text.len() / 2];
        match parse_dataset(cut, "cut.json") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("cut.json:")),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(
            parse_dataset(&bumped, "v2"),
            Err(Error::Version { found: 2, expected: 1 })
        ));
        assert!(matches!(load_dataset(Path::new("/nonexistent/d.json")), Err(Error::Io { .. })));
    }

    #[test]
    fn model_roundtrip_predicts_identically() {
        let s = sim(5);
        let m = fit(&s.dataset, &s.specs, &s.op, &FitConfig::default()).unwrap();
        let text = model_to_string(&m).unwrap();
        let back = parse_model(&text, "m").unwrap();
        assert_eq!(back.theta, m.theta);
        let a = predict_dataset(&m, &s.dataset).unwrap();
        let b = predict_dataset(&back, &s.dataset).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.values().iter().zip(y.values()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }

        // A hand-edited weight is honored.
        let mut file: ModelFile = serde_json::from_str(&text).unwrap();
        file.theta[0] = 0.25;
        let edited = parse_model(&serde_json::to_string(&file).unwrap(), "m").unwrap();
        assert_eq!(edited.theta[0], 0.25);

        assert!(matches!(parse_model(&text[..text.len() - 40], "m"), Err(Error::Parse { .. })));
    }

    #[test]
    fn operator_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("op.json");
        let op = sim(2).op;
        write_operator(&path, &op).unwrap();
        assert_eq!(load_operator(&path).unwrap(), op);
        let cfg = OperatorConfig {
            sine_counts: None,
            spectral_file: Some("op.json".into()),
        };
        assert_eq!(cfg.build(op.grid(), dir.path()).unwrap(), op);
        let both = OperatorConfig {
            sine_counts: Some(vec![3]),
            spectral_file: Some("op.json".into()),
        };
        assert!(both.build(op.grid(), dir.path()).is_err());
        assert_eq!(OperatorConfig::default().build(op.grid(), dir.path()).unwrap().rank(), 50);
    }

    #[test]
    fn run_config_parsing() {
        let cfg = parse_run_config(
            r#"{"fit": {"lambda2": 0.3}, "kernel": {"family": "cauchy", "bandwidth": 2.0},
                "scenario": {"n": 10, "zero_set": [1, 3, 5]}}"#,
            "c",
        )
        .unwrap();
        assert_eq!(cfg.fit.lambda2, 0.3);
        assert_eq!(cfg.scenario.n, 10);
        assert_eq!(cfg.kernel.specs(2).unwrap()[1].family, KernelFamily::Cauchy);
        let per = parse_run_config(
            r#"{"format_version": 1, "kernel": [{"family": "gaussian", "bandwidth": 1},
                {"family": "exponential", "bandwidth": 0.5}]}"#,
            "c",
        )
        .unwrap();
        assert!(per.kernel.specs(3).is_err());
        assert_eq!(per.kernel.specs(2).unwrap()[1].bandwidth, 0.5);
        assert!(matches!(parse_run_config(r#"{"fits": {}}"#, "c"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_run_config(r#"{"format_version": 9}"#, "c"),
            Err(Error::Version { found: 9, .. })
        ));
        assert!(parse_run_config(r#"{"fit": {"lambda1": -1}}"#, "c").is_err());
        assert_eq!(parse_run_config("{}", "c").unwrap(), RunConfig::default());
    }

    #[test]
    fn repro_csv_layout() {
        let rows = vec![ReproRow {
            scenario: "one-dim".into(),
            zero_set: vec![1, 3, 5],
            kernel: KernelFamily::Gaussian,
            sigma: 0.01,
            selection_counts: vec![0, 20, 0, 20, 0],
            mean_mse: 0.125,
            reps: 20,
        }];
        assert_eq!(
            repro_csv(&rows),
            "scenario,M,kernel,sigma,x1,x2,x3,x4,x5,mean_mse,reps\none-dim,135,gaussian,0.01,0,20,0,20,0,0.125,20\n"
        );
    }
}
