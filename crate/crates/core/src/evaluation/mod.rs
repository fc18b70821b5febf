//! Time-ordered cross-validation and the model × method matrix.

mod cv;

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use cv::{make_splits, mape_with_trend, CvPlan, Split, MIN_TRAIN};

use crate::error::{Error, Result};
use crate::ingest::{Crop, SeasonalTable, YieldTable};
use crate::models::{self, reference_family, GlmFamily, Method, ModelParams};
use crate::par::{self, Execution};
use crate::preprocess::{
    build_design_matrix, detrend_gated, model_spec, ols_trend, reduce, DetrendResult, Reducer, N_SPECS,
};

/// Seasonal indices and yields for a run.
#[derive(Debug, Clone, Default)]
pub struct DataBundle {
    pub seasonal: SeasonalTable,
    pub yields: YieldTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRequest {
    pub crops: Vec<Crop>,
    pub regions: Vec<String>,
    pub model_ids: Vec<u8>,
    pub methods: Vec<Method>,
    pub reducer: Reducer,
    /// Number of splits `M`.
    pub folds: usize,
    /// Test block length `k`; `round(0.1·N)` when absent.
    pub test_len: Option<usize>,
    pub params: ModelParams,
    /// Overrides the per-(crop, region) reference family.
    pub family: Option<GlmFamily>,
    pub basis_size: Option<usize>,
    /// Re-estimate the trend on each training block instead of the full series.
    pub redetrend_per_split: bool,
    pub execution: Execution,
}

impl MatrixRequest {
    /// All 22 specs and four methods for one crop and region.
    pub fn full(crop: Crop, region: &str, reducer: Reducer) -> Self {
        let methods = if reducer == Reducer::Raw {
            vec![Method::Xgb, Method::Lgbm]
        } else {
            Method::ALL.to_vec()
        };
        Self {
            crops: vec![crop],
            regions: vec![region.to_string()],
            model_ids: (1..=N_SPECS).collect(),
            methods,
            reducer,
            folds: 5,
            test_len: Some(6),
            params: ModelParams::default(),
            family: None,
            basis_size: None,
            redetrend_per_split: false,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.crops.is_empty() || self.regions.is_empty() {
            return Err(Error::InvalidInput("no crops or regions selected".into()));
        }
        if self.model_ids.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidInput("no models or methods selected".into()));
        }
        if let Some(id) = self.model_ids.iter().find(|id| !(1..=N_SPECS).contains(*id)) {
            return Err(Error::InvalidInput(format!("model id {id} outside 1..={N_SPECS}")));
        }
        if self.reducer == Reducer::Raw {
            if let Some(m) = self.methods.iter().find(|m| !m.is_tree()) {
                return Err(Error::InvalidInput(format!(
                    "reducer 'raw' is only available for tree methods, not {m}"
                )));
            }
        }
        if self.folds == 0 {
            return Err(Error::InvalidInput("folds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub split: usize,
    pub mape_train: f64,
    pub mape_test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub crop: Crop,
    pub region: String,
    pub model_id: u8,
    pub method: Method,
    pub reducer: Reducer,
    pub splits: Vec<SplitScore>,
    /// Means over splits.
    pub mape_train: f64,
    pub mape_test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub crop: Crop,
    pub region: String,
    pub model_id: Option<u8>,
    pub method: Option<Method>,
    pub error: String,
}

/// Per-series facts recorded for the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub crop: Crop,
    pub region: String,
    pub n: usize,
    pub plan: CvPlan,
    pub family: GlmFamily,
    pub detrended: bool,
    pub slope: f64,
    pub adf_p_before: Option<f64>,
    pub adf_p_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionInfo {
    pub crop: Crop,
    pub region: String,
    pub model_id: u8,
    pub reducer: Reducer,
    pub basis_size: Option<usize>,
    pub explained_ratio: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub reports: Vec<CvReport>,
    pub failures: Vec<CellFailure>,
    pub series: Vec<SeriesInfo>,
    pub reductions: Vec<ReductionInfo>,
}

struct Prepared {
    crop: Crop,
    region: String,
    years: Vec<i32>,
    y: Vec<f64>,
    detrend: DetrendResult,
    splits: Vec<Split>,
    family: GlmFamily,
}

fn prepare(bundle: &DataBundle, req: &MatrixRequest, crop: Crop, region: &str) -> Result<(Prepared, SeriesInfo)> {
    let series = bundle.yields.series(crop, region);
    if series.is_empty() {
        return Err(Error::Missing(format!("no {crop} yields for region {region}")));
    }
    let (years, y): (Vec<i32>, Vec<f64>) = series.into_iter().unzip();
    let plan = match req.test_len {
        Some(k) => CvPlan::new(y.len(), req.folds, k)?,
        None => CvPlan::auto(y.len(), req.folds)?,
    };
    let detrend = detrend_gated(&y)?;
    let family = req
        .family
        .or_else(|| reference_family(crop, region))
        .unwrap_or(GlmFamily::Normal);
    let info = SeriesInfo {
        crop,
        region: region.to_string(),
        n: y.len(),
        plan,
        family,
        detrended: detrend.applied,
        slope: detrend.slope,
        adf_p_before: detrend.adf_before.map(|r| r.p_value),
        adf_p_after: detrend.adf_after.map(|r| r.p_value),
    };
    Ok((
        Prepared {
            crop,
            region: region.to_string(),
            years,
            y,
            detrend,
            splits: make_splits(&plan)?,
            family,
        },
        info,
    ))
}

/// `(dy, tt)` for one split: the full-series split, or a trend refitted on
/// the training block when requested.
fn split_target(prep: &Prepared, split: &Split, per_split: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    if !per_split || !prep.detrend.applied {
        return Ok((prep.detrend.dy.clone(), prep.detrend.tt.clone()));
    }
    let train_y: Vec<f64> = split.train.iter().map(|&i| prep.y[i]).collect();
    let (_, slope) = ols_trend(&train_y);
    let tt: Vec<f64> = (0..prep.y.len()).map(|t| slope * t as f64).collect();
    let dy: Vec<f64> = prep.y.iter().zip(&tt).map(|(y, t)| y - t).collect();
    if let Some(v) = dy.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Degenerate(format!(
            "per-split detrended value {v} is not positive"
        )));
    }
    Ok((dy, tt))
}

fn run_cell(
    prep: &Prepared,
    features: &DMatrix<f64>,
    model_id: u8,
    method: Method,
    req: &MatrixRequest,
) -> Result<CvReport> {
    let params = ModelParams {
        family: prep.family,
        ..req.params
    };
    let mut splits = Vec::with_capacity(prep.splits.len());
    for split in &prep.splits {
        let (dy, tt) = split_target(prep, split, req.redetrend_per_split)?;
        let x_train = features.select_rows(split.train.iter());
        let dy_train: Vec<f64> = split.train.iter().map(|&i| dy[i]).collect();
        let model = models::fit(method, &x_train, &dy_train, &params)?;
        let mut dy_hat = vec![0.0; prep.y.len()];
        let rows: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        let pred = model.predict(&features.select_rows(rows.iter()))?;
        for (&i, p) in rows.iter().zip(pred) {
            dy_hat[i] = p;
        }
        splits.push(SplitScore {
            split: split.index,
            mape_train: mape_with_trend(&prep.y, &dy_hat, &tt, &split.train)?,
            mape_test: mape_with_trend(&prep.y, &dy_hat, &tt, &split.test)?,
        });
    }
    let m = splits.len() as f64;
    Ok(CvReport {
        crop: prep.crop,
        region: prep.region.clone(),
        model_id,
        method,
        reducer: req.reducer,
        mape_train: splits.iter().map(|s| s.mape_train).sum::<f64>() / m,
        mape_test: splits.iter().map(|s| s.mape_test).sum::<f64>() / m,
        splits,
    })
}

type UnitOutput = (Vec<Result<CvReport, CellFailure>>, Option<ReductionInfo>);

fn run_unit(bundle: &DataBundle, req: &MatrixRequest, prep: &Prepared, model_id: u8) -> UnitOutput {
    let fail = |method: Option<Method>, e: Error| CellFailure {
        crop: prep.crop,
        region: prep.region.clone(),
        model_id: Some(model_id),
        method,
        error: e.to_string(),
    };
    let features = model_spec(model_id)
        .and_then(|spec| build_design_matrix(&spec, &bundle.seasonal, &prep.region, &prep.years))
        .and_then(|design| match req.reducer {
            Reducer::Raw => Ok((design.data, None)),
            r => reduce(&design, r, req.basis_size).map(|pc| {
                let info = ReductionInfo {
                    crop: prep.crop,
                    region: prep.region.clone(),
                    model_id,
                    reducer: r,
                    basis_size: pc.basis_size,
                    explained_ratio: pc.explained_ratio.clone(),
                };
                (pc.scores, Some(info))
            }),
        });
    match features {
        Err(e) => (vec![Err(fail(None, e))], None),
        Ok((x, info)) => (
            req.methods
                .iter()
                .map(|&m| run_cell(prep, &x, model_id, m, req).map_err(|e| fail(Some(m), e)))
                .collect(),
            info,
        ),
    }
}

/// Run every requested (crop, region, model, method) cell. Failures are
/// collected, not propagated; only an invalid request is an error.
pub fn run_matrix(bundle: &DataBundle, req: &MatrixRequest) -> Result<MatrixReport> {
    req.validate()?;
    let mut out = MatrixReport::default();
    let mut prepared = Vec::new();
    for &crop in &req.crops {
        for region in &req.regions {
            match prepare(bundle, req, crop, region) {
                Ok((p, info)) => {
                    prepared.push(p);
                    out.series.push(info);
                }
                Err(e) => out.failures.push(CellFailure {
                    crop,
                    region: region.clone(),
                    model_id: None,
                    method: None,
                    error: e.to_string(),
                }),
            }
        }
    }
    let units: Vec<(usize, u8)> = (0..prepared.len())
        .flat_map(|p| req.model_ids.iter().map(move |&id| (p, id)))
        .collect();
    let results = par::map(req.execution, &units, |&(p, id)| {
        run_unit(bundle, req, &prepared[p], id)
    });
    for (cells, info) in results {
        out.reductions.extend(info);
        for c in cells {
            match c {
                Ok(r) => out.reports.push(r),
                Err(f) => out.failures.push(f),
            }
        }
    }
    out.reports
        .sort_by(|a, b| (a.crop, &a.region, a.model_id, a.method).cmp(&(b.crop, &b.region, b.model_id, b.method)));
    Ok(out)
}

/// Mean MAPE over models, per (crop, region, method, reducer), plus an
/// `Avg.` row per (crop, method, reducer) averaging the regional values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub crop: Crop,
    pub region: String,
    pub method: Method,
    pub reducer: Reducer,
    pub n_models: usize,
    pub mape_train: f64,
    pub mape_test: f64,
}

pub const AVERAGE_LABEL: &str = "Avg.";

type CellKey = (Crop, Method, Reducer);

pub fn regional_averages(reports: &[CvReport]) -> Vec<AverageRow> {
    // (cells, Σ train MAPE, Σ test MAPE)
    let mut groups: BTreeMap<(CellKey, String), (usize, f64, f64)> = BTreeMap::new();
    for r in reports {
        let e = groups
            .entry(((r.crop, r.method, r.reducer), r.region.clone()))
            .or_default();
        e.0 += 1;
        e.1 += r.mape_train;
        e.2 += r.mape_test;
    }
    let mut rows: Vec<AverageRow> = groups
        .into_iter()
        .map(|(((crop, method, reducer), region), (n, tr, te))| AverageRow {
            crop,
            region,
            method,
            reducer,
            n_models: n,
            mape_train: tr / n as f64,
            mape_test: te / n as f64,
        })
        .collect();
    // (regions, cells, Σ train MAPE, Σ test MAPE)
    let mut overall: BTreeMap<CellKey, (usize, usize, f64, f64)> = BTreeMap::new();
    for r in &rows {
        let e = overall.entry((r.crop, r.method, r.reducer)).or_default();
        e.0 += 1;
        e.1 += r.n_models;
        e.2 += r.mape_train;
        e.3 += r.mape_test;
    }
    rows.extend(
        overall
            .into_iter()
            .map(|((crop, method, reducer), (k, n, tr, te))| AverageRow {
                crop,
                region: AVERAGE_LABEL.to_string(),
                method,
                reducer,
                n_models: n,
                mape_train: tr / k as f64,
                mape_test: te / k as f64,
            }),
    );
    rows
}

/// `report.csv`: one row per split plus a `pooled` row per cell.
pub fn write_report_csv<W: Write>(reports: &[CvReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "crop",
        "region",
        "model_id",
        "method",
        "reducer",
        "split",
        "mape_train",
        "mape_test",
    ])?;
    for r in reports {
        let head = [
            r.crop.to_string(),
            r.region.clone(),
            r.model_id.to_string(),
            r.method.to_string(),
            r.reducer.to_string(),
        ];
        for s in &r.splits {
            let mut rec = head.to_vec();
            rec.extend([s.split.to_string(), s.mape_train.to_string(), s.mape_test.to_string()]);
            w.write_record(&rec)?;
        }
        let mut rec = head.to_vec();
        rec.extend(["pooled".to_string(), r.mape_train.to_string(), r.mape_test.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<report.csv>", e))?;
    Ok(())
}

/// Explained-variance totals of the retained components for every spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainedRow {
    pub model_id: u8,
    pub label: String,
    pub pca: Vec<f64>,
    pub fpca: Vec<f64>,
    pub pca_total: f64,
    pub fpca_total: f64,
}

pub fn explained_variance_table(
    seasonal: &SeasonalTable,
    region: &str,
    years: &[i32],
    basis_size: Option<usize>,
    exec: Execution,
) -> Result<Vec<ExplainedRow>> {
    let ids: Vec<u8> = (1..=N_SPECS).collect();
    par::map(exec, &ids, |&id| {
        let spec = model_spec(id)?;
        let design = build_design_matrix(&spec, seasonal, region, years)?;
        let pca = reduce(&design, Reducer::Pca, None)?;
        let fpca = reduce(&design, Reducer::Fpca, basis_size)?;
        Ok(ExplainedRow {
            model_id: id,
            label: spec.label(),
            pca_total: pca.total_explained(),
            fpca_total: fpca.total_explained(),
            pca: pca.explained_ratio,
            fpca: fpca.explained_ratio,
        })
    })
    .into_iter()
    .collect()
}
