//! Seeded synthetic seasonal indices and crop yields.
//!
//! Each (region, year) draws a few latent climate factors; degree days,
//! rainfall and the ACI component anomalies load on them with seasonal
//! weights, and yields follow a positive linear trend times a log-linear
//! response to the summer factors. Output is a pure function of the config.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::indices::composite_aci;
use crate::ingest::{Crop, Season, SeasonalObservation, SeasonalTable, Variable, YieldRecord, YieldTable};

pub const DEFAULT_SEED: u64 = 1961;
pub const REGIONS: [&str; 6] = ["CEA", "CWP", "MID", "SEA", "SPL", "SWP"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub start_year: i32,
    pub n_years: usize,
    pub regions: Vec<String>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            start_year: 1961,
            n_years: 64,
            regions: REGIONS.iter().map(|r| r.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub seasonal: SeasonalTable,
    pub yields: YieldTable,
}

fn season_weight(season: Season) -> [f64; 4] {
    // (CDD scale, HDD scale, PRE mean mm, anomaly amplitude)
    match season {
        Season::Winter => [15.0, 2600.0, 210.0, 0.8],
        Season::Spring => [220.0, 900.0, 290.0, 1.0],
        Season::Summer => [1150.0, 20.0, 260.0, 1.2],
        Season::Autumn => [330.0, 700.0, 230.0, 0.9],
    }
}

fn region_offset(idx: usize) -> f64 {
    0.85 + 0.06 * idx as f64
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut rows = Vec::new();
    let mut yields = YieldTable::default();

    for (ri, region) in cfg.regions.iter().enumerate() {
        let scale = region_offset(ri);
        let mut summer_heat = Vec::with_capacity(cfg.n_years);
        let mut summer_wet = Vec::with_capacity(cfg.n_years);
        let mut spring_wet = Vec::with_capacity(cfg.n_years);
        let mut comp_rows = Vec::new();
        for t in 0..cfg.n_years {
            let year = cfg.start_year + t as i32;
            let warming = 0.012 * t as f64;
            for season in Season::ALL {
                let [cdd_s, hdd_s, pre_m, amp] = season_weight(season);
                let heat = 0.8 * normal() + warming;
                let wet = normal();
                let wind = normal();
                let cdd = cdd_s * scale * (0.25 * heat - 0.03).exp();
                let hdd = hdd_s * scale * (-0.12 * heat - 0.01).exp();
                let pre = pre_m / scale * (0.3 * wet - 0.045).exp();
                let t90 = amp * (0.9 * heat + 0.35 * normal());
                let t10 = amp * (-0.7 * heat + 0.5 * normal());
                let p = amp * (0.8 * wet + 0.45 * normal());
                let d = amp * (-0.6 * wet + 0.3 * heat + 0.5 * normal());
                let w = amp * (0.8 * wind + 0.3 * normal());
                let s = amp * (0.2 * wet + 0.9 * normal());
                if season == Season::Summer {
                    summer_heat.push(heat);
                    summer_wet.push(wet);
                }
                if season == Season::Spring {
                    spring_wet.push(wet);
                }
                for (variable, value) in [
                    (Variable::Cdd, cdd),
                    (Variable::Hdd, hdd),
                    (Variable::Pre, pre),
                    (Variable::T90, t90),
                    (Variable::T10, t10),
                    (Variable::P, p),
                    (Variable::D, d),
                    (Variable::W, w),
                    (Variable::S, s),
                ] {
                    let row = SeasonalObservation {
                        region: region.clone(),
                        variable,
                        year,
                        season,
                        value,
                    };
                    if Variable::ACI_COMPONENTS.contains(&variable) {
                        comp_rows.push(row.clone());
                    }
                    rows.push(row);
                }
            }
        }
        let comps = SeasonalTable::from_rows(comp_rows).expect("unique synthetic keys");
        rows.extend(composite_aci(&comps, region).expect("complete synthetic components"));

        for (ci, crop) in Crop::ALL.into_iter().enumerate() {
            let (level, slope, heat_k, wet_k) = match crop {
                Crop::Corn => (62.0, 1.75, -0.09, 0.05),
                Crop::Wheat => (26.0, 0.42, -0.05, 0.06),
                Crop::Soybeans => (22.0, 0.38, -0.07, 0.04),
            };
            let level = level * (1.0 + 0.03 * ((ri + ci) % 5) as f64);
            for t in 0..cfg.n_years {
                let h = summer_heat[t];
                let w = if crop == Crop::Wheat {
                    spring_wet[t]
                } else {
                    summer_wet[t]
                };
                let shock = heat_k * h + wet_k * w - 0.03 * (w * w - 1.0) + 0.035 * normal();
                let value = (level + slope * t as f64) * shock.exp();
                yields
                    .insert(YieldRecord {
                        crop,
                        region: region.clone(),
                        year: cfg.start_year + t as i32,
                        yield_bu_acre: value,
                    })
                    .expect("unique synthetic keys");
            }
        }
    }
    SyntheticData {
        seasonal: SeasonalTable::from_rows(rows).expect("unique synthetic keys"),
        yields,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let a = generate(&cfg);
        assert_eq!(a.seasonal.len(), 6 * 64 * 4 * 10);
        assert_eq!(a.yields.len(), 6 * 64 * 3);
        assert_eq!(a, generate(&cfg));
        let other = generate(&SyntheticConfig { seed: 7, ..cfg });
        assert_ne!(a.yields, other.yields);
        for rec in a.yields.iter() {
            assert!(rec.yield_bu_acre > 0.0);
        }
        for row in a.seasonal.iter() {
            if matches!(row.variable, Variable::Cdd | Variable::Hdd | Variable::Pre) {
                assert!(row.value > 0.0);
            }
        }
    }
}
