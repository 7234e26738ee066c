use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::thermal::ExteriorTrace;

use super::ScenarioResult;

/// Formats `v` with six significant digits, `%g` style: plain notation for
/// moderate exponents, scientific otherwise, trailing zeros dropped.
pub fn fmt_sig(v: f64) -> String {
    const DIGITS: i32 = 6;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Exponent after rounding to six digits.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_cell(path: &Path, line: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumeric {
            path: path.to_path_buf(),
            line,
            cell: cell.to_string(),
        })
}

/// Reads an `hour,temp_c` trace and resamples it onto `horizon` steps of
/// `dt_hours`, starting at the first row. Samples past the last row are held
/// for up to one row spacing.
pub fn load_exterior_csv(path: &Path, dt_hours: f64, horizon: usize) -> Result<ExteriorTrace> {
    if !path.is_file() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
        });
    }
    let malformed = |msg: String| Error::MalformedCsv {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != ["hour", "temp_c"] {
        return Err(malformed(format!(
            "expected header hour,temp_c, found {}",
            header.join(",")
        )));
    }

    let mut hours: Vec<f64> = Vec::new();
    let mut temps: Vec<f64> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(malformed(format!(
                "line {line}: expected 2 cells, found {}",
                record.len()
            )));
        }
        let hour = parse_cell(path, line, &record[0])?;
        let temp = parse_cell(path, line, &record[1])?;
        if let Some(&prev) = hours.last() {
            if hour <= prev {
                return Err(Error::NonMonotoneHours {
                    path: path.to_path_buf(),
                    line,
                    prev,
                    next: hour,
                });
            }
        }
        hours.push(hour);
        temps.push(temp);
    }
    if hours.is_empty() {
        return Err(malformed("no data rows".into()));
    }

    let spacing = if hours.len() > 1 {
        hours[hours.len() - 1] - hours[hours.len() - 2]
    } else {
        1.0
    };
    let start = hours[0];
    let available = hours[hours.len() - 1] - start + spacing;
    let needed = horizon as f64 * dt_hours;
    if needed > available + 1e-9 {
        return Err(Error::TraceTooShort {
            path: path.to_path_buf(),
            available_hours: available,
            needed_hours: needed,
        });
    }

    let mut out = Vec::with_capacity(horizon);
    let mut seg = 0;
    for k in 0..horizon {
        let t = start + k as f64 * dt_hours;
        while seg + 1 < hours.len() && hours[seg + 1] <= t {
            seg += 1;
        }
        let v = if seg + 1 == hours.len() {
            temps[seg]
        } else {
            let w = (t - hours[seg]) / (hours[seg + 1] - hours[seg]);
            temps[seg] + w * (temps[seg + 1] - temps[seg])
        };
        out.push(v);
    }
    ExteriorTrace::new(out)
}

pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const SUMMARY_HEADER: [&str; 7] = [
    "strategy",
    "energy_usd",
    "demand_usd",
    "total_usd",
    "peak_kw",
    "production_usd",
    "gamma_w",
];

pub fn trajectory_file(strategy: &str) -> String {
    format!("trajectory_{strategy}.csv")
}

fn write_trajectory(result: &ScenarioResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let m = result.states.first().map_or(0, |s| s.len());
    let mut header = vec![
        "step".to_string(),
        "hour".into(),
        "u_c".into(),
        "g_kw".into(),
    ];
    header.extend((1..=m).map(|i| format!("wall_t{i}_c")));
    w.write_record(&header)?;
    for (k, (&u, &g)) in result.controls.iter().zip(&result.powers_w).enumerate() {
        let mut row = vec![
            k.to_string(),
            fmt_sig(k as f64 * result.dt_hours),
            fmt_sig(u),
            fmt_sig(g / 1000.0),
        ];
        row.extend(result.states[k].temps().iter().map(|&t| fmt_sig(t)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(results: &[ScenarioResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in results {
        w.write_record([
            r.strategy.clone(),
            fmt_sig(r.bill.energy_cost),
            fmt_sig(r.bill.demand_cost),
            fmt_sig(r.bill.total),
            fmt_sig(r.bill.peak_kw),
            fmt_sig(r.production_cost),
            fmt_sig(r.gamma_w),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_report(scenario: &str, results: &[ScenarioResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {scenario}");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<20} {:>12} {:>12} {:>12} {:>10} {:>14} {:>12}",
        "strategy", "energy $", "demand $", "bill $", "peak kW", "production $", "gamma W"
    );
    for r in results {
        let _ = writeln!(
            s,
            "{:<20} {:>12} {:>12} {:>12} {:>10} {:>14} {:>12}",
            r.strategy,
            fmt_sig(r.bill.energy_cost),
            fmt_sig(r.bill.demand_cost),
            fmt_sig(r.bill.total),
            fmt_sig(r.bill.peak_kw),
            fmt_sig(r.production_cost),
            fmt_sig(r.gamma_w),
        );
    }
    let _ = writeln!(s);
    for r in results {
        let p = &r.prices;
        let _ = writeln!(
            s,
            "{}: prices on {} $/kWh, off {} $/kWh, demand {} $/kW; {} steps",
            r.strategy,
            fmt_sig(p.on),
            fmt_sig(p.off),
            fmt_sig(p.demand),
            r.controls.len()
        );
        if r.clamps > 0 {
            let _ = writeln!(s, "  warning: {} grid clamps", r.clamps);
        }
        if let Some(it) = r.iterations {
            let _ = writeln!(s, "  iterations: {it}");
        }
        for note in &r.notes {
            let _ = writeln!(s, "  {note}");
        }
    }
    s
}

/// Writes one trajectory file per result, `summary.csv` and `report.txt`.
/// Returns the paths written.
pub fn emit_results(
    scenario: &str,
    results: &[ScenarioResult],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(results.len() + 2);
    for r in results {
        let path = out_dir.join(trajectory_file(&r.strategy));
        write_trajectory(r, &path)?;
        written.push(path);
    }
    let summary = out_dir.join(SUMMARY_FILE);
    write_summary(results, &summary)?;
    written.push(summary);
    let report = out_dir.join(REPORT_FILE);
    fs::write(&report, render_report(scenario, results))?;
    written.push(report);
    Ok(written)
}
