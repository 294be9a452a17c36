//! Result records and their CSV/JSON renderings.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use heliox::LadderRecord;
use serde::Serialize;

use crate::manifest::Format;

/// Decimals printed for energies; the variational roots are reproducible to
/// roughly this level across platforms.
pub const ENERGY_DECIMALS: usize = 10;

/// Decimals printed for the optimal exponent, matching its search tolerance.
pub const MU_DECIMALS: usize = 6;

/// Decimals printed for entropies from a single grid with nothing to
/// converge against.
pub const RAW_DECIMALS: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub command: &'static str,
    #[serde(rename = "Z")]
    pub z: f64,
    pub omega: u32,
    pub mu: f64,
    pub mu_optimized: bool,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub von_neumann: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deficit: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "n_m", skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(rename = "l_m", skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<LadderRecord>,
    pub wall_time_s: f64,
    pub version: &'static str,
    /// Decimals backed by the convergence tolerances; not serialized.
    #[serde(skip)]
    pub s_decimals: usize,
    #[serde(skip)]
    pub l_decimals: usize,
}

impl ResultRecord {
    /// Rounds every number to the digits its tolerance supports.
    pub fn rounded(mut self) -> Self {
        self.energy = round_to(self.energy, ENERGY_DECIMALS);
        self.mu = round_to(self.mu, MU_DECIMALS);
        self.von_neumann = self.von_neumann.map(|v| round_to(v, self.s_decimals));
        self.linear = self.linear.map(|v| round_to(v, self.l_decimals));
        self.deficit = self.deficit.map(|v| format!("{v:.3e}").parse().unwrap_or(v));
        self.wall_time_s = round_to(self.wall_time_s, 3);
        self
    }

    pub fn s_text(&self) -> String {
        opt_fixed(self.von_neumann, self.s_decimals)
    }

    pub fn l_text(&self) -> String {
        opt_fixed(self.linear, self.l_decimals)
    }

    pub fn energy_text(&self) -> String {
        fixed(self.energy, ENERGY_DECIMALS)
    }
}

/// Decimal places resolved by a tolerance: `1e-7` gives 7, `2e-6` gives 6.
pub fn decimals_for(tol: f64) -> usize {
    (-tol.log10() - 1e-9).ceil().max(0.0) as usize
}

pub fn round_to(x: f64, decimals: usize) -> f64 {
    format!("{x:.decimals$}").parse().unwrap_or(x)
}

pub fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    // avoid printing -0.000
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn opt_fixed(x: Option<f64>, decimals: usize) -> String {
    x.map(|v| fixed(v, decimals)).unwrap_or_default()
}

/// A rectangular table of preformatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().context("flushing CSV buffer")
    }
}

/// Output of one command: a table for CSV and the records behind it for JSON.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: Table,
    pub records: Vec<ResultRecord>,
}

impl Report {
    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(&self.records)?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => {
                let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                f.write_all(&bytes)
                    .with_context(|| format!("writing {}", path.display()))
            }
            None => io::stdout().lock().write_all(&bytes).context("writing to stdout"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_follow_tolerance() {
        assert_eq!(decimals_for(1e-7), 7);
        assert_eq!(decimals_for(2e-6), 6);
        assert_eq!(decimals_for(1e-6), 6);
        assert_eq!(decimals_for(0.5), 1);
    }

    #[test]
    fn fixed_formatting() {
        assert_eq!(fixed(-2.847_656_25, 10), "-2.8476562500");
        assert_eq!(fixed(-1e-12, 6), "0.000000");
        assert_eq!(round_to(0.084_899_97, 7), 0.0849);
    }

    #[test]
    fn csv_always_has_header() {
        let t = Table::new(["Z", "E"]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "Z,E\n");
    }
}
