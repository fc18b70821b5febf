use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use climidx_core::indices::{
    composite_aci, monthly_degree_days, monthly_extremes, monthly_to_seasonal_mean, standardize_component, ReferenceSet,
};
use climidx_core::ingest::{
    aggregate_seasonal_to_region, load_daily_weather, load_monthly, monthly_to_seasonal, MonthlyObservation, RegionMap,
    SeasonalTable, Variable,
};
use climidx_core::par;
use serde::Serialize;

use super::Context as RunContext;
use crate::output::{Manifest, OutputDir};

#[derive(Debug, Serialize)]
struct StateInfo {
    state: String,
    file: String,
    days: usize,
    rejected_rows: usize,
}

#[derive(Debug, Serialize)]
struct Details {
    states: Vec<StateInfo>,
    regions: Vec<String>,
    incomplete_seasons: usize,
    aci: bool,
}

/// Daily station files named `<STATE>.csv`, sorted by state.
fn station_files(dir: &Path, mapping: &RegionMap, regions: &BTreeSet<String>) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let state = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let region = mapping
            .region_of(&state)
            .with_context(|| format!("station file {}", path.display()))?;
        if regions.contains(region) {
            out.push((state, path));
        }
    }
    out.sort();
    Ok(out)
}

fn relabel(rows: Vec<MonthlyObservation>, state: &str) -> Vec<MonthlyObservation> {
    rows.into_iter()
        .map(|r| MonthlyObservation {
            region: state.to_string(),
            ..r
        })
        .collect()
}

pub fn run(ctx: &RunContext) -> Result<i32> {
    let cfg = &ctx.loaded.config.indices;
    let mapping = RegionMap::load(&ctx.loaded.region_map_path())?;
    let all_regions: BTreeSet<String> = mapping.iter().map(|(_, r)| r.to_string()).collect();
    let regions: BTreeSet<String> = match &cfg.regions {
        Some(sel) => {
            if let Some(r) = sel.iter().find(|r| !all_regions.contains(*r)) {
                bail!("region {r:?} has no states in the region map");
            }
            sel.iter().cloned().collect()
        }
        None => all_regions,
    };
    if regions.is_empty() {
        bail!("empty region selection");
    }

    let files = station_files(&ctx.loaded.daily_dir(), &mapping, &regions)?;
    if files.is_empty() {
        bail!("no daily station files for regions {regions:?}");
    }
    let base = cfg.unit.degree_day_base();
    let reference = (cfg.reference[0], cfg.reference[1]);
    let loaded = par::map(ctx.execution, &files, |(state, path)| -> Result<_> {
        let load = load_daily_weather(path)?;
        let dd = monthly_degree_days(state, &load.records, base);
        let ext = if cfg.aci {
            relabel(monthly_extremes(state, &load.records, reference)?, state)
        } else {
            Vec::new()
        };
        Ok((state.clone(), path.clone(), load, dd, ext))
    });

    let mut degree_days = Vec::new();
    let mut extremes = Vec::new();
    let mut states = Vec::new();
    for item in loaded {
        let (state, path, load, dd, ext) = item?;
        states.push(StateInfo {
            state,
            file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            days: load.records.len(),
            rejected_rows: load.rejected,
        });
        degree_days.extend(dd);
        extremes.extend(ext);
    }

    let (state_seasonal, gaps) = monthly_to_seasonal(&degree_days)?;
    for key in &gaps.missing {
        log::info!("incomplete season skipped: {} {} {} {}", key.0, key.1, key.2, key.3);
    }
    let seasonal = aggregate_seasonal_to_region(&state_seasonal, &mapping)?;

    let mut out = OutputDir::create(&ctx.out_dir)?;
    out.write_with("seasonal_indices.csv", |w| seasonal.write_csv(w))?;

    if cfg.aci {
        let mut raw = aggregate_seasonal_to_region(&monthly_to_seasonal_mean(&extremes)?, &mapping)?;
        if let Some(p) = ctx.loaded.aci_monthly_path() {
            let monthly: Vec<MonthlyObservation> = load_monthly(&p)?
                .into_iter()
                .filter(|m| regions.contains(&m.region) && Variable::ACI_COMPONENTS.contains(&m.variable))
                .collect();
            raw.extend(monthly_to_seasonal_mean(&monthly)?)
                .context("ACI component file repeats a variable computed from daily data")?;
        }
        let mut anomalies = SeasonalTable::new();
        for region in &regions {
            let refs = ReferenceSet::from_window(&raw, region, reference)
                .with_context(|| format!("reference window for {region}"))?;
            let rows: Vec<_> = raw.iter().filter(|r| &r.region == region).collect();
            let std_rows = standardize_component(&rows, &refs)?;
            let present: BTreeSet<Variable> = std_rows.iter().map(|r| r.variable).collect();
            let std_table = SeasonalTable::from_rows(std_rows)?;
            if Variable::ACI_COMPONENTS.iter().all(|v| present.contains(v)) {
                anomalies.extend(SeasonalTable::from_rows(composite_aci(&std_table, region)?)?)?;
            } else {
                log::warn!("{region}: composite ACI needs all six components, found {present:?}");
            }
            anomalies.extend(std_table)?;
        }
        out.write_with("aci_anomalies.csv", |w| anomalies.write_csv(w))?;
    }

    let mut manifest = Manifest::new("indices", &ctx.loaded, ctx.jobs);
    manifest.details = serde_json::to_value(Details {
        states,
        regions: regions.into_iter().collect(),
        incomplete_seasons: gaps.len(),
        aci: cfg.aci,
    })?;
    out.finish(manifest)?;
    Ok(0)
}
