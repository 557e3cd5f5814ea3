use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::HarnessError;

/// One parsed `metrics.csv` row (wall-clock column retained but never
/// aggregated: it varies run to run by construction).
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub episode: u64,
    pub step: u64,
    pub ret: f64,
    pub loss: f64,
    pub epsilon: f64,
    pub omega_now: f64,
    pub success: bool,
    pub task_metric: f64,
    pub wall_ms: f64,
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != rf_train::MetricsRecord::CSV_HEADER {
                return Err(HarnessError::io(format!("{}: unexpected header", path.display())));
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 10 {
            return Err(HarnessError::io(format!("{}: bad row {i}", path.display())));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|e| HarnessError::io(format!("row {i}: {e}")));
        rows.push(MetricsRow {
            episode: cols[1].parse().map_err(|e| HarnessError::io(format!("row {i}: {e}")))?,
            step: cols[2].parse().map_err(|e| HarnessError::io(format!("row {i}: {e}")))?,
            ret: f(cols[3])?,
            loss: f(cols[4])?,
            epsilon: f(cols[5])?,
            omega_now: f(cols[6])?,
            success: cols[7] == "1",
            task_metric: f(cols[8])?,
            wall_ms: f(cols[9])?,
        });
    }
    Ok(rows)
}

/// Per-seed scalars distilled from one metrics file.
#[derive(Debug, Clone, Copy)]
pub struct SeedSummary {
    pub episodes: u64,
    pub total_steps: u64,
    pub mean_return: f64,
    pub success_rate_last100: f64,
    pub mean_return_last100: f64,
    pub best_metric: f64,
}

pub fn summarize_seed(rows: &[MetricsRow], metric_lower_better: bool) -> SeedSummary {
    let n = rows.len().max(1);
    let tail = &rows[rows.len().saturating_sub(100)..];
    let tn = tail.len().max(1);
    let finite: Vec<f64> = rows.iter().map(|r| r.task_metric).filter(|m| m.is_finite()).collect();
    let best = if finite.is_empty() {
        f64::NAN
    } else if metric_lower_better {
        finite.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    SeedSummary {
        episodes: rows.len() as u64,
        total_steps: rows.last().map_or(0, |r| r.step),
        mean_return: rows.iter().map(|r| r.ret).sum::<f64>() / n as f64,
        success_rate_last100: tail.iter().filter(|r| r.success).count() as f64 / tn as f64,
        mean_return_last100: tail.iter().map(|r| r.ret).sum::<f64>() / tn as f64,
        best_metric: best,
    }
}

#[derive(Debug, Clone)]
pub struct DirAggregate {
    pub dir: PathBuf,
    pub label: String,
    pub seeds: Vec<u64>,
    pub mean: SeedSummary,
    pub std: SeedSummary,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregate one run directory (`<dir>/<seed>/metrics.csv`) over its seeds.
pub fn aggregate_dir(dir: &Path) -> Result<DirAggregate, HarnessError> {
    let cfg = ExperimentConfig::load(&dir.join("config.snapshot"))?;
    let lower_better = !matches!(cfg.kind, ExperimentKind::Compile);
    let mut seeds = Vec::new();
    let mut summaries = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("metrics.csv").exists())
        .collect();
    entries.sort();
    for run in entries {
        let seed: u64 = run
            .file_name()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HarnessError::io(format!("{}: non-numeric seed dir", run.display())))?;
        let rows = read_metrics_csv(&run.join("metrics.csv"))?;
        seeds.push(seed);
        summaries.push(summarize_seed(&rows, lower_better));
    }
    if summaries.is_empty() {
        return Err(HarnessError::io(format!("{}: no seed runs found", dir.display())));
    }
    let collect = |f: fn(&SeedSummary) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = summaries.iter().map(f).collect();
        mean_std(&vals)
    };
    let (m_ret, s_ret) = collect(|s| s.mean_return);
    let (m_sr, s_sr) = collect(|s| s.success_rate_last100);
    let (m_r100, s_r100) = collect(|s| s.mean_return_last100);
    let (m_best, s_best) = collect(|s| s.best_metric);
    let (m_steps, s_steps) = collect(|s| s.total_steps as f64);
    let (m_ep, s_ep) = collect(|s| s.episodes as f64);
    Ok(DirAggregate {
        dir: dir.to_path_buf(),
        label: format!("{} [{}]", cfg.preset, cfg.replay.strategy),
        seeds,
        mean: SeedSummary {
            episodes: m_ep as u64,
            total_steps: m_steps as u64,
            mean_return: m_ret,
            success_rate_last100: m_sr,
            mean_return_last100: m_r100,
            best_metric: m_best,
        },
        std: SeedSummary {
            episodes: s_ep as u64,
            total_steps: s_steps as u64,
            mean_return: s_ret,
            success_rate_last100: s_sr,
            mean_return_last100: s_r100,
            best_metric: s_best,
        },
    })
}

/// Side-by-side comparison table over several run directories
/// (metric rows x strategy columns, mean ± std over seeds).
pub fn compare(dirs: &[PathBuf]) -> Result<String, HarnessError> {
    let aggregates: Vec<DirAggregate> =
        dirs.iter().map(|d| aggregate_dir(d)).collect::<Result<_, _>>()?;
    let mut out = String::new();
    out.push_str(&format!("{:<28}", "metric"));
    for a in &aggregates {
        out.push_str(&format!(" | {:^29}", a.label));
    }
    out.push('\n');
    let rows: Vec<(&str, fn(&SeedSummary) -> f64)> = vec![
        ("success_rate_last100", |s| s.success_rate_last100),
        ("mean_return", |s| s.mean_return),
        ("mean_return_last100", |s| s.mean_return_last100),
        ("best_task_metric", |s| s.best_metric),
        ("total_steps", |s| s.total_steps as f64),
        ("episodes", |s| s.episodes as f64),
    ];
    for (name, f) in rows {
        out.push_str(&format!("{name:<28}"));
        for a in &aggregates {
            out.push_str(&format!(" | {:>13.6} ± {:>12.6}", f(&a.mean), f(&a.std)));
        }
        out.push('\n');
    }
    Ok(out)
}

/// CSV twin of [`compare`] for machine consumption.
pub fn compare_csv(dirs: &[PathBuf]) -> Result<String, HarnessError> {
    let aggregates: Vec<DirAggregate> =
        dirs.iter().map(|d| aggregate_dir(d)).collect::<Result<_, _>>()?;
    let mut out = String::from(
        "dir,label,seeds,success_rate_last100_mean,success_rate_last100_std,mean_return_mean,mean_return_std,best_metric_mean,best_metric_std,total_steps_mean\n",
    );
    for a in &aggregates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            a.dir.display(),
            a.label,
            a.seeds.len(),
            a.mean.success_rate_last100,
            a.std.success_rate_last100,
            a.mean.mean_return,
            a.std.mean_return,
            a.mean.best_metric,
            a.std.best_metric,
            a.mean.total_steps,
        ));
    }
    Ok(out)
}
