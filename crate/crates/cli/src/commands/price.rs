use std::collections::BTreeMap;

use anyhow::{bail, Context as _, Result};
use climidx_core::ingest::SeasonalTable;
use climidx_core::par;
use climidx_core::pricing::{compare_payoffs, price, write_payoffs_csv, OptionContract, PricingOptions, PricingReport};
use serde::Serialize;

use super::Context;
use crate::config::{ContractConfig, PricingConfig};
use crate::output::{Manifest, OutputDir};

pub fn options(cfg: &PricingConfig) -> PricingOptions {
    PricingOptions {
        method: cfg.method,
        detrend: cfg.detrend,
        families: cfg.families.clone(),
        n_sims: cfg.n_sims,
        seed: cfg.seed,
        discount_factor: cfg.discount_factor,
    }
}

pub fn contract(seasonal: &SeasonalTable, c: &ContractConfig, default_alpha: f64) -> Result<OptionContract> {
    let series: Vec<(i32, f64)> = seasonal
        .series(&c.region, c.index, c.season)
        .into_iter()
        .filter(|(y, _)| c.years.is_none_or(|[lo, hi]| *y >= lo && *y <= hi))
        .collect();
    if series.is_empty() {
        bail!(
            "contract {}: no {} {} values for region {}",
            c.name,
            c.index,
            c.season,
            c.region
        );
    }
    let (years, index): (Vec<i32>, Vec<f64>) = series.into_iter().unzip();
    OptionContract::new(c.name.clone(), years, index, c.alpha.unwrap_or(default_alpha))
        .with_context(|| format!("contract {}", c.name))
}

/// Price every configured contract; reports keep configuration order.
pub fn price_all(ctx: &Context, seasonal: &SeasonalTable) -> Result<Vec<PricingReport>> {
    let cfg = &ctx.loaded.config.pricing;
    let opts = options(cfg);
    let contracts = cfg
        .contracts
        .iter()
        .map(|c| contract(seasonal, c, cfg.alpha))
        .collect::<Result<Vec<_>>>()?;
    par::map(ctx.execution, &contracts, |c| {
        price(c, &opts).with_context(|| format!("pricing {}", c.name))
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Serialize)]
struct ComparisonRow {
    a: String,
    b: String,
    rho: f64,
    ad_hba_statistic: f64,
    ad_hba_p_value: f64,
    ad_im_statistic: Option<f64>,
    ad_im_p_value: Option<f64>,
}

pub fn run(ctx: &Context) -> Result<i32> {
    let cfg = &ctx.loaded.config.pricing;
    if cfg.contracts.is_empty() {
        bail!("no contracts to price: add [[pricing.contracts]] or pass --index/--region/--season");
    }
    let seasonal = SeasonalTable::load(&ctx.loaded.seasonal_path())?;
    let reports = price_all(ctx, &seasonal)?;

    let mut out = OutputDir::create(&ctx.out_dir)?;
    let mut summary = Vec::new();
    for r in &reports {
        out.write_json(&format!("{}/pricing_report.json", r.name), r)?;
        out.write_with(&format!("{}/payoffs.csv", r.name), |w| write_payoffs_csv(r, w))?;
        summary.push(vec![
            r.name.clone(),
            r.detrended.to_string(),
            r.tick_alpha.to_string(),
            r.strike.to_string(),
            r.fair_price_hba.to_string(),
            r.fair_price_im.map(|v| v.to_string()).unwrap_or_default(),
            r.fit.as_ref().map(|f| f.family.to_string()).unwrap_or_default(),
        ]);
        match r.fair_price_im {
            Some(im) => log::info!(
                "{}: strike {:.4} HBA {:.4} IM {:.4}",
                r.name,
                r.strike,
                r.fair_price_hba,
                im
            ),
            None => log::info!("{}: strike {:.4} HBA {:.4}", r.name, r.strike, r.fair_price_hba),
        }
    }
    out.write_rows(
        "summary.csv",
        &[
            "name",
            "detrended",
            "alpha",
            "strike",
            "fair_price_hba",
            "fair_price_im",
            "im_family",
        ],
        &summary,
    )?;

    let by_name: BTreeMap<&str, &PricingReport> = reports.iter().map(|r| (r.name.as_str(), r)).collect();
    let mut comparisons = Vec::new();
    for c in &cfg.comparisons {
        let cmp = compare_payoffs(by_name[c.a.as_str()], by_name[c.b.as_str()])
            .with_context(|| format!("comparing {} and {}", c.a, c.b))?;
        comparisons.push(ComparisonRow {
            a: c.a.clone(),
            b: c.b.clone(),
            rho: cmp.rho,
            ad_hba_statistic: cmp.ad_hba.statistic,
            ad_hba_p_value: cmp.ad_hba.p_value,
            ad_im_statistic: cmp.ad_im.map(|h| h.statistic),
            ad_im_p_value: cmp.ad_im.map(|h| h.p_value),
        });
    }
    if !comparisons.is_empty() {
        out.write_json("comparisons.json", &comparisons)?;
    }

    let mut manifest = Manifest::new("price", &ctx.loaded, ctx.jobs);
    manifest.seeds.insert("pricing".into(), cfg.seed);
    manifest.details = serde_json::json!({
        "contracts": reports.iter().map(|r| serde_json::json!({
            "name": r.name,
            "years": [r.years.first(), r.years.last()],
            "detrended": r.detrended,
            "fit": r.fit,
        })).collect::<Vec<_>>(),
    });
    out.finish(manifest)?;
    Ok(0)
}
