//! Weather-based indexes (CDD, HDD, PRE) and ACI-style standardized anomalies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DailyWeatherRecord, MonthlyObservation, Season, SeasonalObservation, SeasonalTable, Variable};

pub const BASE_TEMP_F: f64 = 65.0;
pub const BASE_TEMP_C: f64 = 18.0;

/// Default reference window for standardization.
pub const REFERENCE_START: i32 = 1961;
pub const REFERENCE_END: i32 = 1990;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemperatureUnit {
    #[default]
    Fahrenheit,
    Celsius,
}

impl TemperatureUnit {
    pub fn degree_day_base(self) -> f64 {
        match self {
            TemperatureUnit::Fahrenheit => BASE_TEMP_F,
            TemperatureUnit::Celsius => BASE_TEMP_C,
        }
    }
}

pub fn daily_mean_temp(rec: &DailyWeatherRecord) -> f64 {
    (rec.tmax + rec.tmin) / 2.0
}

pub fn daily_cdd(t_mean: f64, base: f64) -> f64 {
    (t_mean - base).max(0.0)
}

pub fn daily_hdd(t_mean: f64, base: f64) -> f64 {
    (base - t_mean).max(0.0)
}

/// Total rainfall over a window of daily depths.
pub fn accumulate_pre(daily_rain: &[f64]) -> Result<f64> {
    if let Some(bad) = daily_rain.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::InvalidInput(format!("negative or NaN rainfall {bad}")));
    }
    Ok(daily_rain.iter().sum())
}

fn days_in_month(year: i32, month: u32) -> u32 {
    let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    chrono::NaiveDate::from_ymd_opt(ny, nm, 1)
        .and_then(|d| d.pred_opt())
        .map(|d| chrono::Datelike::day(&d))
        .unwrap_or(0)
}

fn group_by_month(records: &[DailyWeatherRecord]) -> BTreeMap<(i32, u32), Vec<&DailyWeatherRecord>> {
    let mut months: BTreeMap<(i32, u32), Vec<&DailyWeatherRecord>> = BTreeMap::new();
    for r in records {
        months.entry(crate::ingest::year_month(r.date)).or_default().push(r);
    }
    months
}

/// Monthly CDD, HDD and PRE totals for one station or state.
///
/// Only calendar months with every day present are emitted. PRE requires a
/// rain value on every day of the month.
pub fn monthly_degree_days(region: &str, records: &[DailyWeatherRecord], base: f64) -> Vec<MonthlyObservation> {
    let mut out = Vec::new();
    for ((year, month), days) in group_by_month(records) {
        if days.len() as u32 != days_in_month(year, month) {
            continue;
        }
        let temps: Vec<f64> = days.iter().map(|d| daily_mean_temp(d)).collect();
        let cdd: f64 = temps.iter().map(|&t| daily_cdd(t, base)).sum();
        let hdd: f64 = temps.iter().map(|&t| daily_hdd(t, base)).sum();
        let row = |variable, value| MonthlyObservation {
            region: region.to_string(),
            variable,
            year,
            month,
            value,
        };
        out.push(row(Variable::Cdd, cdd));
        out.push(row(Variable::Hdd, hdd));
        let rain: Option<Vec<f64>> = days.iter().map(|d| d.rain).collect();
        if let Some(pre) = rain.and_then(|r| accumulate_pre(&r).ok()) {
            out.push(row(Variable::Pre, pre));
        }
    }
    out
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Largest total over any five consecutive days lying within one month.
pub fn rx5day(daily_rain: &[f64]) -> Option<f64> {
    if daily_rain.len() < 5 {
        return None;
    }
    daily_rain
        .windows(5)
        .map(|w| w.iter().sum::<f64>())
        .max_by(f64::total_cmp)
}

/// Raw monthly T90, T10 (percent of days) and Rx5day (mm) from daily data.
///
/// Thresholds are the 90th/10th percentiles of daily mean temperature for the
/// same calendar day across `reference` years; a day counts toward T90 when it
/// is at or above its threshold and toward T10 when at or below.
pub fn monthly_extremes(
    region: &str,
    records: &[DailyWeatherRecord],
    reference: (i32, i32),
) -> Result<Vec<MonthlyObservation>> {
    use chrono::Datelike;

    let mut by_day: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    for r in records {
        let y = r.date.year();
        if y >= reference.0 && y <= reference.1 {
            by_day
                .entry((r.date.month(), r.date.day()))
                .or_default()
                .push(daily_mean_temp(r));
        }
    }
    if by_day.is_empty() {
        return Err(Error::Missing(format!(
            "no daily records in reference window {}-{}",
            reference.0, reference.1
        )));
    }
    let thresholds: BTreeMap<(u32, u32), (f64, f64)> = by_day
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            (k, (quantile(&v, 0.9), quantile(&v, 0.1)))
        })
        .collect();

    let mut out = Vec::new();
    for ((year, month), days) in group_by_month(records) {
        if days.len() as u32 != days_in_month(year, month) {
            continue;
        }
        let mut hot = 0usize;
        let mut cold = 0usize;
        let mut counted = 0usize;
        for d in &days {
            if let Some(&(p90, p10)) = thresholds.get(&(d.date.month(), d.date.day())) {
                let t = daily_mean_temp(d);
                counted += 1;
                if t >= p90 {
                    hot += 1;
                }
                if t <= p10 {
                    cold += 1;
                }
            }
        }
        let row = |variable, value| MonthlyObservation {
            region: region.to_string(),
            variable,
            year,
            month,
            value,
        };
        if counted > 0 {
            out.push(row(Variable::T90, 100.0 * hot as f64 / counted as f64));
            out.push(row(Variable::T10, 100.0 * cold as f64 / counted as f64));
        }
        let rain: Option<Vec<f64>> = days.iter().map(|d| d.rain).collect();
        if let Some(v) = rain.as_deref().and_then(rx5day) {
            out.push(row(Variable::P, v));
        }
    }
    Ok(out)
}

/// Season-average of monthly values (used for T90/T10/Rx5day raw measures).
pub fn monthly_to_seasonal_mean(monthly: &[MonthlyObservation]) -> Result<SeasonalTable> {
    let (summed, _) = crate::ingest::monthly_to_seasonal(monthly)?;
    SeasonalTable::from_rows(summed.iter().map(|mut r| {
        r.value /= 3.0;
        r
    }))
}

/// Period over which a reference mean/sd applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodKey {
    Month(u32),
    Season(Season),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStats {
    pub variable: Variable,
    pub period_key: PeriodKey,
    pub mu: f64,
    pub sigma: f64,
}

/// Reference statistics keyed by `(variable, period)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceSet {
    stats: BTreeMap<(Variable, PeriodKey), ReferenceStats>,
}

impl ReferenceSet {
    pub fn insert(&mut self, s: ReferenceStats) -> Result<()> {
        if !(s.sigma > 0.0) {
            return Err(Error::InvalidInput(format!(
                "reference sigma for {} must be positive, got {}",
                s.variable, s.sigma
            )));
        }
        if self.stats.insert((s.variable, s.period_key), s).is_some() {
            return Err(Error::DuplicateKey(format!("{} {:?}", s.variable, s.period_key)));
        }
        Ok(())
    }

    pub fn get(&self, variable: Variable, period: PeriodKey) -> Option<&ReferenceStats> {
        self.stats.get(&(variable, period))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReferenceStats> {
        self.stats.values()
    }

    /// Per-season mean and sample sd of each variable for one region over
    /// the inclusive year window.
    pub fn from_window(table: &SeasonalTable, region: &str, window: (i32, i32)) -> Result<Self> {
        let mut groups: BTreeMap<(Variable, Season), Vec<f64>> = BTreeMap::new();
        for row in table.iter() {
            if row.region == region && row.year >= window.0 && row.year <= window.1 {
                groups.entry((row.variable, row.season)).or_default().push(row.value);
            }
        }
        let mut set = ReferenceSet::default();
        for ((variable, season), values) in groups {
            if values.len() < 2 {
                return Err(Error::Degenerate(format!(
                    "reference window has {} value(s) for {variable} {season}",
                    values.len()
                )));
            }
            let n = values.len() as f64;
            let mu = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0);
            set.insert(ReferenceStats {
                variable,
                period_key: PeriodKey::Season(season),
                mu,
                sigma: var.sqrt(),
            })?;
        }
        Ok(set)
    }
}

/// Standardize each observation by the reference stats of its own season.
pub fn standardize_component(raw: &[SeasonalObservation], refs: &ReferenceSet) -> Result<Vec<SeasonalObservation>> {
    raw.iter()
        .map(|obs| {
            let s = refs
                .get(obs.variable, PeriodKey::Season(obs.season))
                .ok_or_else(|| Error::Missing(format!("reference stats for {} {}", obs.variable, obs.season)))?;
            if !(s.sigma > 0.0) {
                return Err(Error::InvalidInput(format!("sigma {} ≤ 0", s.sigma)));
            }
            Ok(SeasonalObservation {
                value: (obs.value - s.mu) / s.sigma,
                ..obs.clone()
            })
        })
        .collect()
}

/// Composite index: `(T90 − T10 + P + D + W + S) / 6` per aligned (year, season).
///
/// Every period present for any component must be present for all six.
pub fn composite_aci(anoms: &SeasonalTable, region: &str) -> Result<Vec<SeasonalObservation>> {
    let mut periods: BTreeMap<(i32, Season), [Option<f64>; 6]> = BTreeMap::new();
    for row in anoms.iter() {
        if row.region != region {
            continue;
        }
        if let Some(idx) = Variable::ACI_COMPONENTS.iter().position(|v| *v == row.variable) {
            periods.entry((row.year, row.season)).or_default()[idx] = Some(row.value);
        }
    }
    if periods.is_empty() {
        return Err(Error::Missing(format!("no ACI components for region {region}")));
    }
    periods
        .into_iter()
        .map(|((year, season), comps)| {
            let missing: Vec<&str> = comps
                .iter()
                .zip(Variable::ACI_COMPONENTS)
                .filter(|(c, _)| c.is_none())
                .map(|(_, v)| v.as_str())
                .collect();
            if !missing.is_empty() {
                return Err(Error::Missing(format!(
                    "components {missing:?} for {region} {year} {season}"
                )));
            }
            let [t90, t10, p, d, w, s] = comps.map(|c| c.unwrap_or_default());
            Ok(SeasonalObservation {
                region: region.to_string(),
                variable: Variable::Aci,
                year,
                season,
                value: (t90 - t10 + p + d + w + s) / 6.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn rec(tmax: f64, tmin: f64) -> DailyWeatherRecord {
        DailyWeatherRecord {
            date: NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
            tmax,
            tmin,
            rain: None,
        }
    }

    #[test]
    fn mean_temperature() {
        assert_eq!(daily_mean_temp(&rec(80.0, 70.0)), 75.0);
        assert_eq!(daily_mean_temp(&rec(65.0, 65.0)), 65.0);
        assert_eq!(daily_mean_temp(&rec(100.0, 0.0)), 50.0);
    }

    #[test]
    fn degree_days() {
        assert_eq!(daily_cdd(75.0, BASE_TEMP_F), 10.0);
        assert_eq!(daily_cdd(65.0, BASE_TEMP_F), 0.0);
        assert_eq!(daily_cdd(60.0, BASE_TEMP_F), 0.0);
        assert_eq!(daily_hdd(60.0, BASE_TEMP_F), 5.0);
        assert_eq!(daily_hdd(65.0, BASE_TEMP_F), 0.0);
        assert_eq!(daily_hdd(80.0, BASE_TEMP_F), 0.0);
        assert_eq!(TemperatureUnit::Celsius.degree_day_base(), 18.0);
    }

    #[test]
    fn rainfall_accumulation() {
        assert_eq!(accumulate_pre(&[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(accumulate_pre(&[0.0; 30]).unwrap(), 0.0);
        assert_eq!(accumulate_pre(&[]).unwrap(), 0.0);
        assert!(accumulate_pre(&[1.0, -0.5]).is_err());
    }

    fn s(variable: Variable, year: i32, season: Season, value: f64) -> SeasonalObservation {
        SeasonalObservation {
            region: "R".into(),
            variable,
            year,
            season,
            value,
        }
    }

    #[test]
    fn standardize_formula() {
        let mut refs = ReferenceSet::default();
        refs.insert(ReferenceStats {
            variable: Variable::T90,
            period_key: PeriodKey::Season(Season::Summer),
            mu: 10.0,
            sigma: 2.0,
        })
        .unwrap();
        let out = standardize_component(
            &[
                s(Variable::T90, 2000, Season::Summer, 12.0),
                s(Variable::T90, 2001, Season::Summer, 10.0),
            ],
            &refs,
        )
        .unwrap();
        assert_eq!(out[0].value, 1.0);
        assert_eq!(out[1].value, 0.0);
        // winter value has no winter stats
        assert!(standardize_component(&[s(Variable::T90, 2000, Season::Winter, 1.0)], &refs).is_err());
    }

    #[test]
    fn nonpositive_sigma_rejected() {
        let mut refs = ReferenceSet::default();
        let bad = ReferenceStats {
            variable: Variable::P,
            period_key: PeriodKey::Season(Season::Spring),
            mu: 0.0,
            sigma: 0.0,
        };
        assert!(refs.insert(bad).is_err());
    }

    fn components(values: [f64; 6]) -> SeasonalTable {
        SeasonalTable::from_rows(
            Variable::ACI_COMPONENTS
                .iter()
                .zip(values)
                .map(|(v, x)| s(*v, 2000, Season::Spring, x)),
        )
        .unwrap()
    }

    #[test]
    fn composite_examples() {
        let zero = composite_aci(&components([0.0; 6]), "R").unwrap();
        assert_eq!(zero[0].value, 0.0);
        let hot = composite_aci(&components([6.0, 0.0, 0.0, 0.0, 0.0, 0.0]), "R").unwrap();
        assert_eq!(hot[0].value, 1.0);
        let cold = composite_aci(&components([0.0, 6.0, 0.0, 0.0, 0.0, 0.0]), "R").unwrap();
        assert_eq!(cold[0].value, -1.0);
        assert_eq!(cold[0].variable, Variable::Aci);
    }

    #[test]
    fn composite_requires_alignment() {
        let mut t = components([1.0; 6]);
        t.insert(s(Variable::T90, 2001, Season::Spring, 1.0)).unwrap();
        let err = composite_aci(&t, "R").unwrap_err();
        assert!(err.to_string().contains("T10"), "{err}");
    }

    #[test]
    fn rx5day_window() {
        assert_eq!(rx5day(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 0.0]), Some(15.0));
        assert_eq!(rx5day(&[1.0; 4]), None);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.9) - 4.6).abs() < 1e-12);
    }

    #[test]
    fn monthly_degree_days_full_month_only() {
        let mut recs = Vec::new();
        let mut d = NaiveDate::from_ymd_opt(2001, 6, 1).unwrap();
        while d < NaiveDate::from_ymd_opt(2001, 7, 10).unwrap() {
            recs.push(DailyWeatherRecord {
                date: d,
                tmax: 80.0,
                tmin: 70.0,
                rain: Some(1.0),
            });
            d = d.succ_opt().unwrap();
        }
        let m = monthly_degree_days("A", &recs, BASE_TEMP_F);
        assert_eq!(m.len(), 3);
        assert!(m.iter().all(|r| r.month == 6));
        let cdd = m.iter().find(|r| r.variable == Variable::Cdd).unwrap();
        assert_eq!(cdd.value, 300.0);
        let pre = m.iter().find(|r| r.variable == Variable::Pre).unwrap();
        assert_eq!(pre.value, 30.0);
    }
}
