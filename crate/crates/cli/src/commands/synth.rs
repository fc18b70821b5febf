use std::path::Path;

use anyhow::Result;
use climidx_core::synthetic::{generate, SyntheticConfig};

use super::Context;
use crate::output::{Manifest, OutputDir};

/// Write `seasonal.csv` and `yields.csv` for a seeded synthetic panel.
pub fn run(ctx: &Context, out_dir: &Path, cfg: &SyntheticConfig) -> Result<i32> {
    let data = generate(cfg);
    let mut out = OutputDir::create(out_dir)?;
    out.write_with("seasonal.csv", |w| data.seasonal.write_csv(w))?;
    out.write_with("yields.csv", |w| data.yields.write_csv(w))?;
    let mut manifest = Manifest::new("synth", &ctx.loaded, ctx.jobs);
    manifest.seeds.insert("synthetic".into(), cfg.seed);
    manifest.details = serde_json::to_value(cfg)?;
    out.finish(manifest)?;
    Ok(0)
}
