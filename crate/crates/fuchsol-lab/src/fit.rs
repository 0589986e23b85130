//! `fuchsol fit`: power-law fit of one column of a CSV time series.

use std::path::Path;

use serde::Serialize;

use fuchsol_numerics::{fit_power_law, DecaySeries};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutput {
    pub input: String,
    pub column: String,
    /// Requested window in the file's own time column.
    pub t_min: f64,
    pub t_max: f64,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Column fitted when none is named: `u2` in oracle tables, `L2` in run
/// records, else the second column.
fn default_column(headers: &[String]) -> Option<usize> {
    ["u2", "L2"].iter().find_map(|c| headers.iter().position(|h| h == c)).or(if headers.len() > 1 { Some(1) } else { None })
}

/// Fits `|y| ∝ |t|^e` over rows with `t_min ≤ t ≤ t_max`.
///
/// Files in either time orientation are accepted: times are folded to
/// `−|t|` before fitting, so the exponent always refers to `|t| → 0`.
pub fn fit_csv(text: &str, column: Option<&str>, t_min: f64, t_max: f64) -> Result<(String, FitOutput), LabError> {
    check_window(t_min, t_max)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> =
        rdr.headers().map_err(|e| LabError::Usage(format!("csv header: {e}")))?.iter().map(|h| h.trim().to_string()).collect();
    let t_col = headers.iter().position(|h| h == "t").ok_or_else(|| LabError::Usage("csv has no 't' column".into()))?;
    let y_col = match column {
        Some(c) => headers.iter().position(|h| h == c).ok_or_else(|| {
            LabError::Usage(format!("csv has no column {c:?}; columns are {}", headers.join(",")))
        })?,
        None => default_column(&headers).ok_or_else(|| LabError::Usage("csv has a single column".into()))?,
    };
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LabError::Usage(format!("csv row {}: {e}", i + 2)))?;
        let num = |c: usize| -> Result<f64, LabError> {
            rec.get(c)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|_| LabError::Usage(format!("csv row {}: column {:?} is not a number", i + 2, headers[c])))
        };
        let t = num(t_col)?;
        if t >= t_min && t <= t_max && t != 0.0 {
            pts.push((-t.abs(), num(y_col)?.abs()));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    let (times, values): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let series = DecaySeries::new(headers[y_col].clone(), times, values).map_err(LabError::run)?;
    let fit = fit_power_law(&series, Some((f64::NEG_INFINITY, 0.0))).map_err(LabError::run)?;
    let name = headers[y_col].clone();
    Ok((
        name.clone(),
        FitOutput {
            input: String::new(),
            column: name,
            t_min,
            t_max,
            exponent: fit.exponent,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            samples: fit.samples,
        },
    ))
}

fn check_window(t_min: f64, t_max: f64) -> Result<(), LabError> {
    if t_min < t_max {
        Ok(())
    } else {
        Err(LabError::Usage(format!("need --t-min < --t-max, got {t_min} and {t_max}")))
    }
}

pub fn fit_file(path: &Path, column: Option<&str>, t_min: f64, t_max: f64) -> Result<FitOutput, LabError> {
    check_window(t_min, t_max)?;
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let (_, mut out) = fit_csv(&text, column, t_min, t_max)?;
    out.input = path.display().to_string();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(e: f64) -> String {
        let mut s = String::from("t,u1,u2,u1_limit\n");
        for k in 0..40 {
            let t = -(10f64).powf(-1.0 - 0.1 * k as f64);
            s.push_str(&format!("{t:e},1,{:e},1\n", 3.0 * (-t).powf(e)));
        }
        s
    }

    #[test]
    fn recovers_a_pure_power() {
        let (col, out) = fit_csv(&table(0.4), None, -1.0, 0.0).unwrap();
        assert_eq!(col, "u2");
        assert!((out.exponent - 0.4).abs() < 1e-12);
        assert_eq!(out.samples, 40);
    }

    #[test]
    fn window_restricts_rows() {
        let (_, out) = fit_csv(&table(0.4), None, -1e-2, -1e-4).unwrap();
        assert_eq!(out.samples, 21);
    }

    #[test]
    fn positive_times_are_folded() {
        let mut text = String::from("t,L2\n");
        for k in 0..20 {
            let t = (10f64).powf(-0.2 * k as f64);
            text.push_str(&format!("{t:e},{:e}\n", t.powf(1.5)));
        }
        let (col, out) = fit_csv(&text, None, 0.0, 1.0).unwrap();
        assert_eq!(col, "L2");
        assert!((out.exponent - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bad_requests_are_usage_errors() {
        assert_eq!(fit_csv(&table(0.4), Some("nope"), -1.0, 0.0).unwrap_err().exit_code(), 2);
        assert_eq!(fit_csv(&table(0.4), None, 0.0, -1.0).unwrap_err().exit_code(), 2);
        assert_eq!(fit_csv("t,u2\n-0.1,abc\n", None, -1.0, 0.0).unwrap_err().exit_code(), 2);
    }
}
