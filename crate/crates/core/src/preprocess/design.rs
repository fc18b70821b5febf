//! The 22 explanatory-variable sets and their seasonal design matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Season, SeasonalTable, Variable};

/// One explanatory-variable set (ids 1..=22).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: u8,
    pub variables: Vec<Variable>,
}

impl ModelSpec {
    pub fn label(&self) -> String {
        self.variables.iter().map(|v| v.as_str()).collect::<Vec<_>>().join("-")
    }
}

pub const N_SPECS: u8 = 22;

/// Model specs 1–7 use weather-based indexes, 8–21 ACI components, 22 the
/// composite ACI.
pub fn model_spec(id: u8) -> Result<ModelSpec> {
    use Variable::*;
    let variables: &[Variable] = match id {
        1 => &[Cdd],
        2 => &[Hdd],
        3 => &[Pre],
        4 => &[Cdd, Hdd],
        5 => &[Cdd, Pre],
        6 => &[Hdd, Pre],
        7 => &[Cdd, Hdd, Pre],
        8 => &[T90],
        9 => &[T10],
        10 => &[P],
        11 => &[T90, T10],
        12 => &[T90, P],
        13 => &[T10, P],
        14 => &[T90, T10, P],
        15 => &[T90, T10, P, W],
        16 => &[T90, T10, P, D],
        17 => &[T90, T10, P, S],
        18 => &[T90, T10, P, W, D],
        19 => &[T90, T10, P, W, S],
        20 => &[T90, T10, P, D, S],
        21 => &[T90, T10, P, W, D, S],
        22 => &[Aci],
        _ => return Err(Error::InvalidInput(format!("model id {id} outside 1..={N_SPECS}"))),
    };
    Ok(ModelSpec {
        id,
        variables: variables.to_vec(),
    })
}

pub fn all_model_specs() -> Vec<ModelSpec> {
    (1..=N_SPECS).map(|id| model_spec(id).expect("valid id")).collect()
}

/// Years × (variable, season) matrix, columns ordered variable-major with
/// seasons winter, spring, summer, autumn.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub data: DMatrix<f64>,
    pub years: Vec<i32>,
    pub columns: Vec<(Variable, Season)>,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// Block index of each column (one block per variable, in column order).
    pub fn variable_blocks(&self) -> Vec<usize> {
        let mut blocks = Vec::with_capacity(self.columns.len());
        let mut seen: Vec<Variable> = Vec::new();
        for (v, _) in &self.columns {
            let idx = match seen.iter().position(|s| s == v) {
                Some(i) => i,
                None => {
                    seen.push(*v);
                    seen.len() - 1
                }
            };
            blocks.push(idx);
        }
        blocks
    }

    /// Rows for a subset of year indices.
    pub fn select_rows(&self, rows: &[usize]) -> DMatrix<f64> {
        self.data.select_rows(rows.iter())
    }
}

pub fn build_design_matrix(
    spec: &ModelSpec,
    seasonal: &SeasonalTable,
    region: &str,
    years: &[i32],
) -> Result<DesignMatrix> {
    if years.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("years must be strictly increasing".into()));
    }
    let columns: Vec<(Variable, Season)> = spec
        .variables
        .iter()
        .flat_map(|v| Season::ALL.iter().map(move |s| (*v, *s)))
        .collect();
    let mut data = DMatrix::zeros(years.len(), columns.len());
    for (r, &year) in years.iter().enumerate() {
        for (c, &(variable, season)) in columns.iter().enumerate() {
            data[(r, c)] = seasonal
                .get(region, variable, year, season)
                .ok_or_else(|| Error::Missing(format!("{region} {variable} {year} {season}")))?;
        }
    }
    Ok(DesignMatrix {
        data,
        years: years.to_vec(),
        columns,
    })
}
