use anyhow::Result;
use climidx_core::evaluation::{
    regional_averages, run_matrix, write_report_csv, DataBundle, MatrixReport, MatrixRequest,
};
use climidx_core::ingest::{SeasonalTable, YieldTable};

use super::Context;
use crate::output::{Manifest, OutputDir};

pub fn request(ctx: &Context) -> MatrixRequest {
    let p = &ctx.loaded.config.predict;
    MatrixRequest {
        crops: p.crops.clone(),
        regions: p.regions.clone(),
        model_ids: p.models.clone(),
        methods: p.methods(),
        reducer: p.reducer,
        folds: p.folds,
        test_len: p.test_len,
        params: p.model_params(),
        family: p.family,
        basis_size: p.basis_size,
        redetrend_per_split: p.redetrend_per_split,
        execution: ctx.execution,
    }
}

pub fn load_bundle(ctx: &Context) -> Result<DataBundle> {
    Ok(DataBundle {
        seasonal: SeasonalTable::load(&ctx.loaded.seasonal_path())?,
        yields: YieldTable::load(&ctx.loaded.yields_path())?,
    })
}

pub fn averages_rows(report: &MatrixReport) -> Vec<Vec<String>> {
    regional_averages(&report.reports)
        .into_iter()
        .map(|a| {
            vec![
                a.crop.to_string(),
                a.region,
                a.method.to_string(),
                a.reducer.to_string(),
                a.n_models.to_string(),
                a.mape_train.to_string(),
                a.mape_test.to_string(),
            ]
        })
        .collect()
}

pub const AVERAGES_HEADER: [&str; 7] = [
    "crop",
    "region",
    "method",
    "reducer",
    "n_models",
    "mape_train",
    "mape_test",
];

pub fn run(ctx: &Context) -> Result<i32> {
    let bundle = load_bundle(ctx)?;
    let req = request(ctx);
    let report = run_matrix(&bundle, &req)?;
    for f in &report.failures {
        log::warn!(
            "cell failed: {} {} model {:?} {:?}: {}",
            f.crop,
            f.region,
            f.model_id,
            f.method,
            f.error
        );
    }

    let mut out = OutputDir::create(&ctx.out_dir)?;
    out.write_with("report.csv", |w| write_report_csv(&report.reports, w))?;
    out.write_rows("averages.csv", &AVERAGES_HEADER, &averages_rows(&report))?;
    out.write_json("reports.json", &report)?;
    let mut manifest = Manifest::new("predict", &ctx.loaded, ctx.jobs);
    manifest.details = serde_json::json!({
        "cells": report.reports.len(),
        "failures": report.failures,
        "series": report.series,
        "reductions": report.reductions,
    });
    out.finish(manifest)?;

    log::info!(
        "{} cells scored, {} failed",
        report.reports.len(),
        report.failures.len()
    );
    if report.reports.is_empty() {
        anyhow::bail!("every cell failed ({} failures)", report.failures.len());
    }
    Ok(if report.failures.is_empty() { 0 } else { 1 })
}
