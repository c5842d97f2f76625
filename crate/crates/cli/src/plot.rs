//! Gnuplot scripts for result CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Result, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Log-log `sup` against `r` with the fitted envelope `C·envelope`.
    Growth,
    /// Semilog `error` against `n`.
    Convergence,
    /// Log-log of every numeric column against the first.
    Scaling,
    /// Linear plot of every numeric column against the first.
    History,
}

impl PlotKind {
    fn required(self) -> &'static [&'static str] {
        match self {
            PlotKind::Growth => &["r", "sup", "envelope"],
            PlotKind::Convergence => &["n", "error"],
            PlotKind::Scaling | PlotKind::History => &[],
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes `<stem>.gp` next to `csv` and returns its path. The script expects
/// to run from the directory holding the CSV and writes `<stem>.png`.
pub fn emit_plot_script(csv: &Path, kind: PlotKind) -> Result<PathBuf> {
    let mut reader = csv::Reader::from_path(csv)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    for column in kind.required() {
        if !header.iter().any(|h| h == column) {
            return Err(RunError::MissingColumn {
                csv: csv.display().to_string(),
                column: column.to_string(),
            });
        }
    }
    let first = reader.records().next().transpose()?;
    let numeric: Vec<&String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            first
                .as_ref()
                .and_then(|r| r.get(*i))
                .is_some_and(|v| v.parse::<f64>().is_ok())
        })
        .map(|(_, h)| h)
        .collect();
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = csv
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let data = quote(&name);

    let mut s = String::new();
    writeln!(s, "# {name}").unwrap();
    writeln!(s, "set datafile separator \",\"").unwrap();
    writeln!(s, "set terminal pngcairo size 900,600").unwrap();
    writeln!(s, "set output {}", quote(&format!("{stem}.png"))).unwrap();
    writeln!(s, "set grid").unwrap();
    match kind {
        PlotKind::Growth => {
            writeln!(s, "stats {data} using (column(\"sup\")/column(\"envelope\")) name \"R\" nooutput").unwrap();
            writeln!(s, "set logscale xy").unwrap();
            writeln!(s, "set xlabel \"r\"").unwrap();
            writeln!(s, "set ylabel \"shell sup\"").unwrap();
            writeln!(
                s,
                "plot {data} using \"r\":\"sup\" with linespoints title \"sup |J_inf u|\", \\\n     \
                 {data} using \"r\":(R_max*column(\"envelope\")) with lines dashtype 2 title \"C envelope\""
            )
            .unwrap();
        }
        PlotKind::Convergence => {
            writeln!(s, "set logscale y").unwrap();
            writeln!(s, "set format y \"%.0e\"").unwrap();
            writeln!(s, "set xlabel \"N\"").unwrap();
            writeln!(s, "set ylabel \"relative error\"").unwrap();
            writeln!(s, "plot {data} using \"n\":\"error\" with linespoints title \"error\"").unwrap();
        }
        PlotKind::Scaling | PlotKind::History => {
            let x = header.first().cloned().unwrap_or_default();
            if kind == PlotKind::Scaling {
                writeln!(s, "set logscale xy").unwrap();
            }
            writeln!(s, "set xlabel {}", quote(&x)).unwrap();
            let curves: Vec<String> = numeric
                .iter()
                .filter(|c| **c != &x)
                .map(|c| {
                    format!(
                        "{data} using {}:{} with linespoints title {}",
                        quote(&x),
                        quote(c),
                        quote(c)
                    )
                })
                .collect();
            writeln!(s, "plot {}", curves.join(", \\\n     ")).unwrap();
        }
    }
    let path = csv.with_extension("gp");
    std::fs::write(&path, s)?;
    Ok(path)
}
