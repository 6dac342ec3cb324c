//! CSV table, JSON summary and plot script.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::{BenchResult, BenchSummary};
use crate::trial::TrialRecord;
use crate::BenchError;

pub const CSV_FILE: &str = "bench.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.gp";

/// Writes the trial table with the fixed column order.
pub fn write_csv(records: &[TrialRecord], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_summary(summary: &BenchSummary, path: &Path) -> Result<(), BenchError> {
    fs::write(path, serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(())
}

/// Gnuplot script with four log-scale panels over trials sorted by
/// `cond_ctrb`: `kappa(C)`, `kappa(T) kappa(G)`, errors and nilpotency.
pub fn plot_script(csv_name: &str, methods: &[&str]) -> String {
    let k = methods.len().max(1);
    let mut s = String::new();
    s.push_str("# gnuplot script; run `gnuplot plot.gp` next to the CSV\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 1200,900\n");
    s.push_str("set output 'bench.png'\n");
    s.push_str("set multiplot layout 2,2\n");
    s.push_str("set logscale y\n");
    s.push_str("set format y '10^{%L}'\n");
    s.push_str("set xlabel 'trial (sorted by cond_ctrb)'\n");
    s.push_str("set key top left\n");
    s.push_str(&format!("trial(row) = int(row / {k})\n"));
    let panels = [
        ("condition number of C", "$4", false),
        ("cond(T) cond(G)", "$5", true),
        ("error ||A_b - hat A_b|| + ||B_b - hat B_b||", "($6 + $7)", true),
        ("||hat A_b^mu||", "$8", true),
    ];
    for (title, expr, per_method) in panels {
        s.push_str(&format!("set title '{title}'\n"));
        if per_method {
            let series: Vec<String> = methods
                .iter()
                .map(|m| {
                    format!(
                        "'{csv_name}' every ::1 using (trial($0)):(strcol(3) eq '{m}' ? {expr} : NaN) with linespoints title '{m}'"
                    )
                })
                .collect();
            s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
        } else {
            let first = methods.first().copied().unwrap_or("proposed");
            s.push_str(&format!(
                "plot '{csv_name}' every ::1 using (trial($0)):(strcol(3) eq '{first}' ? {expr} : NaN) with linespoints notitle\n"
            ));
        }
    }
    s.push_str("unset multiplot\n");
    s
}

/// Paths of the emitted files.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

/// Writes CSV, summary and plot script into `dir` (created if missing).
pub fn write_all(result: &BenchResult, dir: &Path) -> Result<Artifacts, BenchError> {
    fs::create_dir_all(dir)?;
    let out = Artifacts {
        csv: dir.join(CSV_FILE),
        summary: dir.join(SUMMARY_FILE),
        plot: dir.join(PLOT_FILE),
    };
    write_csv(&result.records, &out.csv)?;
    write_summary(&result.summary, &out.summary)?;
    let methods: Vec<&str> = result.summary.config.methods.iter().map(|m| m.as_str()).collect();
    fs::write(&out.plot, plot_script(CSV_FILE, &methods))?;
    Ok(out)
}
