//! Loading and normalising external data files.
//!
//! All tables produced here are immutable value types. Weather indexes live in
//! a [`SeasonalTable`] keyed by `(region, variable, year, season)`; crop yields
//! in a [`YieldTable`] keyed by `(crop, region, year)`.
//!
//! Winter (Dec–Feb) carries the year of its ending February, so December 1989
//! belongs to winter 1990.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every index variable that can appear in a seasonal table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "CDD")]
    Cdd,
    #[serde(rename = "HDD")]
    Hdd,
    #[serde(rename = "PRE")]
    Pre,
    T90,
    T10,
    P,
    D,
    W,
    S,
    #[serde(rename = "ACI")]
    Aci,
}

impl Variable {
    pub const ALL: [Variable; 10] = [
        Variable::Cdd,
        Variable::Hdd,
        Variable::Pre,
        Variable::T90,
        Variable::T10,
        Variable::P,
        Variable::D,
        Variable::W,
        Variable::S,
        Variable::Aci,
    ];

    /// The six standardized components averaged into the composite index.
    pub const ACI_COMPONENTS: [Variable; 6] = [
        Variable::T90,
        Variable::T10,
        Variable::P,
        Variable::D,
        Variable::W,
        Variable::S,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Cdd => "CDD",
            Variable::Hdd => "HDD",
            Variable::Pre => "PRE",
            Variable::T90 => "T90",
            Variable::T10 => "T10",
            Variable::P => "P",
            Variable::D => "D",
            Variable::W => "W",
            Variable::S => "S",
            Variable::Aci => "ACI",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable {s:?}")))
    }
}

/// Meteorological season: three-month blocks ending in Feb, May, Aug and Nov.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Autumn,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Autumn];

    /// Season and season-year for a calendar month (1–12).
    pub fn of_month(year: i32, month: u32) -> Option<(Season, i32)> {
        match month {
            12 => Some((Season::Winter, year + 1)),
            1 | 2 => Some((Season::Winter, year)),
            3..=5 => Some((Season::Spring, year)),
            6..=8 => Some((Season::Summer, year)),
            9..=11 => Some((Season::Autumn, year)),
            _ => None,
        }
    }

    /// Calendar (year, month) triples making up this season in `season_year`.
    pub fn months(self, season_year: i32) -> [(i32, u32); 3] {
        match self {
            Season::Winter => [(season_year - 1, 12), (season_year, 1), (season_year, 2)],
            Season::Spring => [(season_year, 3), (season_year, 4), (season_year, 5)],
            Season::Summer => [(season_year, 6), (season_year, 7), (season_year, 8)],
            Season::Autumn => [(season_year, 9), (season_year, 10), (season_year, 11)],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Season {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Season::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown season {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crop {
    Corn,
    Wheat,
    Soybeans,
}

impl Crop {
    pub const ALL: [Crop; 3] = [Crop::Corn, Crop::Wheat, Crop::Soybeans];

    pub fn as_str(self) -> &'static str {
        match self {
            Crop::Corn => "corn",
            Crop::Wheat => "wheat",
            Crop::Soybeans => "soybeans",
        }
    }
}

impl fmt::Display for Crop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Crop {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Crop::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown crop {s:?}")))
    }
}

/// One day of station weather. Temperatures in °F, rain in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyWeatherRecord {
    pub date: NaiveDate,
    pub tmax: f64,
    pub tmin: f64,
    pub rain: Option<f64>,
}

/// Result of loading a station file: accepted records plus rejected-row count.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyLoad {
    pub records: Vec<DailyWeatherRecord>,
    /// Rows dropped because `tmax < tmin`.
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalObservation {
    pub region: String,
    pub variable: Variable,
    pub year: i32,
    pub season: Season,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyObservation {
    pub region: String,
    pub variable: Variable,
    pub year: i32,
    pub month: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldRecord {
    pub crop: Crop,
    pub region: String,
    pub year: i32,
    #[serde(rename = "yield_bu_acre")]
    pub yield_bu_acre: f64,
}

pub type SeasonKey = (String, Variable, i32, Season);

/// Canonical seasonal index table with unique `(region, variable, year, season)` keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeasonalTable {
    rows: BTreeMap<SeasonKey, f64>,
}

impl SeasonalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = SeasonalObservation>) -> Result<Self> {
        let mut table = Self::new();
        for row in rows {
            table.insert(row)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, row: SeasonalObservation) -> Result<()> {
        let key = (row.region, row.variable, row.year, row.season);
        if self.rows.contains_key(&key) {
            return Err(Error::DuplicateKey(format!(
                "({}, {}, {}, {})",
                key.0, key.1, key.2, key.3
            )));
        }
        self.rows.insert(key, row.value);
        Ok(())
    }

    /// Merge another table in; overlapping keys are an error.
    pub fn extend(&mut self, other: SeasonalTable) -> Result<()> {
        for row in other.iter() {
            self.insert(row)?;
        }
        Ok(())
    }

    pub fn get(&self, region: &str, variable: Variable, year: i32, season: Season) -> Option<f64> {
        self.rows.get(&(region.to_string(), variable, year, season)).copied()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in key order.
    pub fn iter(&self) -> impl Iterator<Item = SeasonalObservation> + '_ {
        self.rows
            .iter()
            .map(|((region, variable, year, season), value)| SeasonalObservation {
                region: region.clone(),
                variable: *variable,
                year: *year,
                season: *season,
                value: *value,
            })
    }

    pub fn regions(&self) -> BTreeSet<String> {
        self.rows.keys().map(|k| k.0.clone()).collect()
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.rows.keys().map(|k| k.1).collect()
    }

    /// Sub-table restricted to one region and variable.
    pub fn series(&self, region: &str, variable: Variable, season: Season) -> Vec<(i32, f64)> {
        self.rows
            .iter()
            .filter(|(k, _)| k.0 == region && k.1 == variable && k.3 == season)
            .map(|(k, v)| (k.2, *v))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.iter() {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut table = Self::new();
        for row in r.deserialize() {
            let row: SeasonalObservation = row?;
            table.insert(row)?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let table = Self::read_csv(file)?;
        if table.is_empty() {
            return Err(Error::NoRecords(path.display().to_string()));
        }
        Ok(table)
    }
}

/// Crop yields keyed by `(crop, region, year)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct YieldTable {
    rows: BTreeMap<(Crop, String, i32), f64>,
}

impl YieldTable {
    pub fn from_rows(rows: impl IntoIterator<Item = YieldRecord>) -> Result<Self> {
        let mut table = Self::default();
        for row in rows {
            table.insert(row)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, row: YieldRecord) -> Result<()> {
        if !(row.yield_bu_acre > 0.0) || !row.yield_bu_acre.is_finite() {
            return Err(Error::InvalidInput(format!(
                "yield must be positive: {} {} {} = {}",
                row.crop, row.region, row.year, row.yield_bu_acre
            )));
        }
        let key = (row.crop, row.region, row.year);
        if self.rows.contains_key(&key) {
            return Err(Error::DuplicateKey(format!("({}, {}, {})", key.0, key.1, key.2)));
        }
        self.rows.insert(key, row.yield_bu_acre);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = YieldRecord> + '_ {
        self.rows.iter().map(|((crop, region, year), y)| YieldRecord {
            crop: *crop,
            region: region.clone(),
            year: *year,
            yield_bu_acre: *y,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Year-ordered yield series for one crop and region.
    pub fn series(&self, crop: Crop, region: &str) -> Vec<(i32, f64)> {
        self.rows
            .iter()
            .filter(|(k, _)| k.0 == crop && k.1 == region)
            .map(|(k, v)| (k.2, *v))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.iter() {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut table = Self::default();
        for row in r.deserialize() {
            table.insert(row?)?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let table = Self::read_csv(file)?;
        if table.is_empty() {
            return Err(Error::NoRecords(path.display().to_string()));
        }
        Ok(table)
    }
}

/// State → region assignment, loaded from `regions.csv` (`state,region`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegionMap {
    map: BTreeMap<String, String>,
}

impl RegionMap {
    pub fn new<I, S1, S2>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S1, S2)>,
        S1: Into<String>,
        S2: Into<String>,
    {
        Self {
            map: pairs.into_iter().map(|(s, r)| (s.into(), r.into())).collect(),
        }
    }

    pub fn region_of(&self, state: &str) -> Result<&str> {
        self.map
            .get(state)
            .map(String::as_str)
            .ok_or_else(|| Error::UnmappedState(state.to_string()))
    }

    pub fn contains(&self, state: &str) -> bool {
        self.map.contains_key(state)
    }

    pub fn states_in(&self, region: &str) -> Vec<&str> {
        self.map
            .iter()
            .filter(|(_, r)| r.as_str() == region)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(s, r)| (s.as_str(), r.as_str()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            state: String,
            region: String,
        }
        let mut r = csv::Reader::from_reader(reader);
        let mut map = BTreeMap::new();
        for row in r.deserialize() {
            let row: Row = row?;
            if map.insert(row.state.clone(), row.region).is_some() {
                return Err(Error::DuplicateKey(row.state));
            }
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let map = Self::read_csv(file)?;
        if map.map.is_empty() {
            return Err(Error::NoRecords(path.display().to_string()));
        }
        Ok(map)
    }
}

const DAILY_HEADER: [&str; 4] = ["date", "tmax_f", "tmin_f", "rain_mm"];

/// Parse a `date,tmax_f,tmin_f,rain_mm` station file.
///
/// Rows with `tmax < tmin` are dropped and counted; any other unparseable row
/// aborts the load with its 1-based data row index.
pub fn read_daily_weather<R: Read>(reader: R, source: &Path) -> Result<DailyLoad> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() != DAILY_HEADER.len() || header.iter().zip(DAILY_HEADER).any(|(a, b)| a != b) {
        return Err(Error::MalformedRow {
            path: source.to_path_buf(),
            row: 0,
            message: format!("expected header {:?}, found {:?}", DAILY_HEADER.join(","), header),
        });
    }

    let malformed = |row: usize, message: String| Error::MalformedRow {
        path: source.to_path_buf(),
        row,
        message,
    };

    let mut records: Vec<DailyWeatherRecord> = Vec::new();
    let mut rejected = 0usize;
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| malformed(row, e.to_string()))?;
        if rec.len() != 4 {
            return Err(malformed(row, format!("expected 4 fields, found {}", rec.len())));
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| malformed(row, format!("bad date {:?}: {e}", &rec[0])))?;
        let num = |idx: usize, name: &str| -> Result<f64> {
            rec[idx]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(row, format!("bad {name} {:?}", &rec[idx])))
        };
        let tmax = num(1, "tmax_f")?;
        let tmin = num(2, "tmin_f")?;
        let rain = if rec[3].is_empty() {
            None
        } else {
            let v = num(3, "rain_mm")?;
            if v < 0.0 {
                return Err(malformed(row, format!("negative rainfall {v}")));
            }
            Some(v)
        };
        if tmax < tmin {
            log::warn!(
                "{}: row {row}: tmax {tmax} < tmin {tmin}, row rejected",
                source.display()
            );
            rejected += 1;
            continue;
        }
        if let Some(prev) = records.last() {
            if date <= prev.date {
                return Err(malformed(row, format!("date {date} does not follow {}", prev.date)));
            }
        }
        records.push(DailyWeatherRecord { date, tmax, tmin, rain });
    }
    if records.is_empty() {
        return Err(Error::NoRecords(source.display().to_string()));
    }
    Ok(DailyLoad { records, rejected })
}

pub fn load_daily_weather(path: &Path) -> Result<DailyLoad> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_daily_weather(file, path)
}

pub fn read_monthly<R: Read>(reader: R) -> Result<Vec<MonthlyObservation>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: MonthlyObservation = row?;
        if !(1..=12).contains(&row.month) {
            return Err(Error::InvalidInput(format!("month {} out of range", row.month)));
        }
        out.push(row);
    }
    Ok(out)
}

pub fn load_monthly(path: &Path) -> Result<Vec<MonthlyObservation>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_monthly(file)?;
    if rows.is_empty() {
        return Err(Error::NoRecords(path.display().to_string()));
    }
    Ok(rows)
}

pub fn write_monthly<W: Write>(rows: &[MonthlyObservation], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Seasons that could not be emitted because a month was missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GapReport {
    pub missing: Vec<SeasonKey>,
}

impl GapReport {
    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Sum monthly values into meteorological seasons.
///
/// A season is emitted only when all three of its months are present;
/// incomplete seasons are listed in the returned [`GapReport`].
pub fn monthly_to_seasonal(monthly: &[MonthlyObservation]) -> Result<(SeasonalTable, GapReport)> {
    // (region, variable, season_year, season) -> month -> value
    let mut groups: BTreeMap<SeasonKey, BTreeMap<u32, f64>> = BTreeMap::new();
    for m in monthly {
        let (season, season_year) = Season::of_month(m.year, m.month)
            .ok_or_else(|| Error::InvalidInput(format!("month {} out of range", m.month)))?;
        let slot = groups
            .entry((m.region.clone(), m.variable, season_year, season))
            .or_default();
        if slot.insert(m.month, m.value).is_some() {
            return Err(Error::DuplicateKey(format!(
                "({}, {}, {}, {})",
                m.region, m.variable, m.year, m.month
            )));
        }
    }

    let mut table = SeasonalTable::new();
    let mut gaps = GapReport::default();
    for (key, months) in groups {
        let (_, _, season_year, season) = &key;
        let expected = season.months(*season_year);
        if expected.iter().all(|(_, m)| months.contains_key(m)) {
            let value: f64 = expected.iter().map(|(_, m)| months[m]).sum();
            table.insert(SeasonalObservation {
                region: key.0,
                variable: key.1,
                year: key.2,
                season: key.3,
                value,
            })?;
        } else {
            gaps.missing.push(key);
        }
    }
    Ok((table, gaps))
}

/// Unweighted mean of `values`, summed in a fixed order so the result does not
/// depend on input order.
fn ordered_mean(mut values: Vec<(String, f64)>) -> f64 {
    values.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = values.len() as f64;
    values.iter().map(|(_, v)| v).sum::<f64>() / n
}

/// Average state-level seasonal rows into regions (equal state weights).
pub fn aggregate_seasonal_to_region(state_rows: &SeasonalTable, mapping: &RegionMap) -> Result<SeasonalTable> {
    let mut groups: BTreeMap<SeasonKey, Vec<(String, f64)>> = BTreeMap::new();
    for row in state_rows.iter() {
        let region = mapping.region_of(&row.region)?.to_string();
        groups
            .entry((region, row.variable, row.year, row.season))
            .or_default()
            .push((row.region, row.value));
    }
    let mut out = SeasonalTable::new();
    for ((region, variable, year, season), values) in groups {
        out.insert(SeasonalObservation {
            region,
            variable,
            year,
            season,
            value: ordered_mean(values),
        })?;
    }
    Ok(out)
}

/// Average state-level yields into regions (equal state weights).
pub fn aggregate_yields_to_region(state_rows: &YieldTable, mapping: &RegionMap) -> Result<YieldTable> {
    let mut groups: BTreeMap<(Crop, String, i32), Vec<(String, f64)>> = BTreeMap::new();
    for row in state_rows.iter() {
        let region = mapping.region_of(&row.region)?.to_string();
        groups
            .entry((row.crop, region, row.year))
            .or_default()
            .push((row.region, row.yield_bu_acre));
    }
    let mut out = YieldTable::default();
    for ((crop, region, year), values) in groups {
        out.insert(YieldRecord {
            crop,
            region,
            year,
            yield_bu_acre: ordered_mean(values),
        })?;
    }
    Ok(out)
}

/// Calendar year/month of a daily record.
pub fn year_month(date: NaiveDate) -> (i32, u32) {
    (date.year(), date.month())
}
