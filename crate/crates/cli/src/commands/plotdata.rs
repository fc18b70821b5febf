use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Context as _, Result};
use climidx_core::evaluation::{explained_variance_table, run_matrix, MatrixReport};
use climidx_core::ingest::SeasonalTable;
use climidx_core::preprocess::N_COMPONENTS;
use climidx_core::stats::ecdf;

use super::{predict, price, Context};
use crate::output::{Manifest, OutputDir};

/// Years with all four seasons of every variable the region reports.
pub fn complete_years(seasonal: &SeasonalTable, region: &str) -> Vec<i32> {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    let mut variables = BTreeSet::new();
    for row in seasonal.iter().filter(|r| r.region == region) {
        *counts.entry(row.year).or_default() += 1;
        variables.insert(row.variable);
    }
    let full = variables.len() * 4;
    counts.into_iter().filter(|&(_, n)| n == full).map(|(y, _)| y).collect()
}

fn explained_rows(ctx: &Context, seasonal: &SeasonalTable, region: &str) -> Result<Vec<Vec<String>>> {
    let years = complete_years(seasonal, region);
    if years.is_empty() {
        bail!("region {region} has no complete years in the seasonal data");
    }
    let basis = ctx
        .loaded
        .config
        .plotdata
        .basis_size
        .or(ctx.loaded.config.predict.basis_size);
    let table = explained_variance_table(seasonal, region, &years, basis, ctx.execution)
        .with_context(|| format!("explained variance for {region}"))?;
    Ok(table
        .into_iter()
        .map(|r| {
            let mut row = vec![
                r.model_id.to_string(),
                r.label,
                r.pca_total.to_string(),
                r.fpca_total.to_string(),
            ];
            for v in r.pca.iter().chain(&r.fpca) {
                row.push(v.to_string());
            }
            row
        })
        .collect())
}

fn explained_header() -> Vec<String> {
    let mut h: Vec<String> = ["model_id", "label", "pca_total", "fpca_total"]
        .map(String::from)
        .to_vec();
    for reducer in ["pca", "fpca"] {
        for k in 1..=N_COMPONENTS {
            h.push(format!("{reducer}_pc{k}"));
        }
    }
    h
}

fn matrix_report(ctx: &Context) -> Result<(MatrixReport, &'static str)> {
    let reuse = ctx.out_root.join("predict").join("reports.json");
    let candidate = ctx
        .predict_reports
        .clone()
        .or_else(|| (ctx.loaded.config.plotdata.reuse_reports && reuse.exists()).then_some(reuse));
    if let Some(path) = candidate {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let report = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok((report, "reused"));
    }
    let bundle = predict::load_bundle(ctx)?;
    Ok((run_matrix(&bundle, &predict::request(ctx))?, "computed"))
}

pub fn run(ctx: &Context) -> Result<i32> {
    let seasonal = SeasonalTable::load(&ctx.loaded.seasonal_path())?;
    let c = &ctx.loaded.config;
    let region = c
        .plotdata
        .region
        .clone()
        .unwrap_or_else(|| c.predict.regions[0].clone());
    let mut out = OutputDir::create(&ctx.out_dir)?;

    let rows = explained_rows(ctx, &seasonal, &region)?;
    let header = explained_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_rows("explained_variance.csv", &header, &rows)?;

    let (report, source) = matrix_report(ctx)?;
    out.write_rows(
        "mape_bars.csv",
        &predict::AVERAGES_HEADER,
        &predict::averages_rows(&report),
    )?;

    let mut payoff_rows = Vec::new();
    let mut ecdf_rows = Vec::new();
    if !c.pricing.contracts.is_empty() {
        for r in price::price_all(ctx, &seasonal)? {
            for ((y, i), p) in r.years.iter().zip(&r.index_used).zip(&r.payoffs_hba) {
                payoff_rows.push(vec![r.name.clone(), y.to_string(), i.to_string(), p.to_string()]);
            }
            for (source, payoffs) in [("hba", &r.payoffs_hba), ("im", &r.payoffs_im)] {
                if payoffs.is_empty() {
                    continue;
                }
                let e = ecdf(payoffs);
                for (v, p) in e.values.iter().zip(&e.probs) {
                    ecdf_rows.push(vec![r.name.clone(), source.to_string(), v.to_string(), p.to_string()]);
                }
            }
        }
        out.write_rows("payoffs.csv", &["contract", "year", "index", "payoff"], &payoff_rows)?;
        out.write_rows("payoff_ecdf.csv", &["contract", "source", "payoff", "ecdf"], &ecdf_rows)?;
    }

    let mut manifest = Manifest::new("plotdata", &ctx.loaded, ctx.jobs);
    manifest.seeds.insert("pricing".into(), c.pricing.seed);
    manifest.details = serde_json::json!({
        "explained_region": region,
        "matrix_report": source,
        "matrix_failures": report.failures.len(),
    });
    out.finish(manifest)?;
    Ok(0)
}
