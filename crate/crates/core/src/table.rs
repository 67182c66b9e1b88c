use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A discrete random variable: a field name and its ordered value universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: Vec<String>) -> Self {
        Variable {
            name: name.into(),
            states,
        }
    }

    pub fn card(&self) -> usize {
        self.states.len()
    }

    pub fn code(&self, value: &str) -> Option<u32> {
        self.states
            .iter()
            .position(|s| s == value)
            .map(|i| i as u32)
    }
}

/// Column-major table of state codes; `columns[v][row]` indexes `variables[v].states`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteTable {
    pub variables: Vec<Variable>,
    pub columns: Vec<Vec<u32>>,
}

impl DiscreteTable {
    pub fn new(variables: Vec<Variable>, columns: Vec<Vec<u32>>) -> Result<Self> {
        if variables.len() != columns.len() {
            return Err(Error::Data("one column per variable expected".into()));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (v, col) in variables.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Data(format!(
                    "column `{}` has a different length",
                    v.name
                )));
            }
            if let Some(bad) = col.iter().find(|&&c| c as usize >= v.card()) {
                return Err(Error::Data(format!(
                    "column `{}` holds out-of-range code {bad}",
                    v.name
                )));
            }
        }
        Ok(DiscreteTable { variables, columns })
    }

    /// Builds a table from string rows; every value must be in its variable's states.
    pub fn from_rows(variables: Vec<Variable>, rows: &[Vec<&str>]) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(rows.len()); variables.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(Error::Data(format!("row {r}: wrong arity")));
            }
            for (v, value) in row.iter().enumerate() {
                let code = variables[v].code(value).ok_or_else(|| {
                    Error::Data(format!("row {r}: `{value}` not in `{}`", variables[v].name))
                })?;
                columns[v].push(code);
            }
        }
        DiscreteTable::new(variables, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn value(&self, var: usize, row: usize) -> &str {
        &self.variables[var].states[self.columns[var][row] as usize]
    }

    /// Same variables, only the listed rows.
    pub fn select_rows(&self, rows: &[usize]) -> DiscreteTable {
        DiscreteTable {
            variables: self.variables.clone(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
        }
    }
}
