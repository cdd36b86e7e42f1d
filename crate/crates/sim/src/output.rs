//! CSV and manifest writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use otfs_radar::{CorrelationMap, DetectionList, FractionalEstimate, FrameGrid};

use crate::error::SimResult;
use crate::experiment::{CrlbRow, ExperimentReport, RocPoint, TrialFailure};
use crate::format::fmt9;
use crate::metrics::MetricsRow;

fn signed_row(k: usize, n: usize) -> isize {
    if k < n.div_ceil(2) {
        k as isize
    } else {
        k as isize - n as isize
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| fmt9(*v)).collect::<Vec<_>>().join(",")
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut s = MetricsRow::HEADER.join(",") + "\n";
    for r in rows {
        s += &join(&r.values());
        s.push('\n');
    }
    s
}

pub fn crlb_csv(rows: &[CrlbRow]) -> String {
    let mut s = CrlbRow::HEADER.join(",") + "\n";
    for r in rows {
        s += &join(&r.values());
        s.push('\n');
    }
    s
}

pub fn detections_csv(dets: &DetectionList<f64>, n_doppler: usize) -> String {
    let mut s = String::from("k_int,l_int,statistic,threshold\n");
    for d in &dets.detections {
        s += &format!(
            "{},{},{},{}\n",
            signed_row(d.k, n_doppler),
            d.l,
            fmt9(d.statistic),
            fmt9(d.threshold)
        );
    }
    s
}

pub fn estimates_csv(estimates: &[FractionalEstimate<f64>], grid: &FrameGrid<f64>) -> String {
    let mut s = String::from("k_int,l_int,kappa,iota,doppler_index,delay_index,range_m,velocity_mps\n");
    for e in estimates {
        s += &format!(
            "{},{},{}\n",
            e.doppler_bin(grid.n_doppler()),
            e.l,
            join(&[
                e.kappa,
                e.iota,
                e.doppler_index,
                e.delay_index,
                e.range_m(grid),
                e.velocity_mps(grid)
            ])
        );
    }
    s
}

/// `|V|` in long form, one line per cell.
pub fn heatmap_csv(v: &CorrelationMap<f64>) -> String {
    let (n, m) = v.dims();
    let mut s = String::from("k,l,magnitude\n");
    for k in 0..n {
        for l in 0..m {
            s += &format!("{},{},{}\n", signed_row(k, n), l, fmt9(v.v[(k, l)].norm()));
        }
    }
    s
}

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut s = String::from("method,p_fa,detection_rate,false_alarm_rate\n");
    for p in points {
        s += &format!("{},{}\n", p.method.name(), join(&[p.p_fa, p.detection_rate, p.false_alarm_rate]));
    }
    s
}

pub fn failures_csv(failures: &[TrialFailure]) -> String {
    let mut s = String::from("trial,snr_db,error\n");
    for f in failures {
        let snr = f.snr_db.map_or(String::new(), fmt9);
        s += &format!("{},{},\"{}\"\n", f.trial, snr, f.message.replace('"', "'"));
    }
    s
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> SimResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(body.as_bytes())?;
    Ok(path)
}

/// Manifest: the full config, then `# key: value` run facts.
pub fn manifest(report: &ExperimentReport, extra: &[(&str, String)]) -> String {
    let mut s = report.config.to_text();
    s += &format!("# failed_trials: {}\n", report.failures.len());
    for (k, v) in extra {
        s += &format!("# {k}: {v}\n");
    }
    s
}

/// `metrics.csv`, `crlb.csv`, `failures.csv`, `manifest.txt` and, with the
/// baseline on, `baseline_metrics.csv`.
pub fn write_experiment(report: &ExperimentReport, dir: &Path) -> SimResult<Vec<PathBuf>> {
    let mut paths = vec![
        write_file(dir, "metrics.csv", &metrics_csv(&report.rows))?,
        write_file(dir, "crlb.csv", &crlb_csv(&report.crlb_rows))?,
        write_file(dir, "failures.csv", &failures_csv(&report.failures))?,
        write_file(dir, "manifest.txt", &manifest(report, &[]))?,
    ];
    if let Some(rows) = &report.baseline_rows {
        paths.push(write_file(dir, "baseline_metrics.csv", &metrics_csv(rows))?);
    }
    Ok(paths)
}
