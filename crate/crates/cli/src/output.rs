//! CSV and JSON rendering of metric records.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

/// One evaluated grid point.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct Record {
    pub params: Vec<f64>,
    /// Row-major upper triangle `g_11, g_12, ..., g_kk`.
    pub metric_upper: Vec<f64>,
    pub psd: bool,
}

/// 17 significant digits, locale independent.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(k: usize) -> String {
    let mut cols: Vec<String> = (1..=k).map(|i| format!("m_{i}")).collect();
    for i in 1..=k {
        for j in i..=k {
            cols.push(format!("g_{i}{j}"));
        }
    }
    cols.push("psd".into());
    cols.join(",")
}

pub fn render_records(records: &[Record], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let k = records.first().map_or(0, |r| r.params.len());
            let mut s = csv_header(k);
            s.push('\n');
            for r in records {
                let fields: Vec<String> = r
                    .params
                    .iter()
                    .chain(&r.metric_upper)
                    .map(|&x| number(x))
                    .chain(std::iter::once(r.psd.to_string()))
                    .collect();
                let _ = writeln!(s, "{}", fields.join(","));
            }
            s
        }
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lists_upper_triangle() {
        assert_eq!(csv_header(2), "m_1,m_2,g_11,g_12,g_22,psd");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 12345.678901234567] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(1.0), "1.0000000000000000e0");
    }
}
