use std::io::Write;
use std::path::{Path, PathBuf};

use crate::compare::{aggregate_dir, read_metrics_csv};
use crate::HarnessError;

/// Emit plot-ready artifacts for each run directory into `out_dir`:
/// `curve_<preset>.csv` with per-episode aggregates over seeds, plus one
/// `summary.json` across all directories. No images are rendered; the CSVs
/// are shaped for external plotting.
pub fn report(dirs: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut summaries = Vec::new();
    for dir in dirs {
        let agg = aggregate_dir(dir)?;
        let mut per_seed = Vec::new();
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir() && p.join("metrics.csv").exists())
            .collect();
        entries.sort();
        for run in entries {
            per_seed.push(read_metrics_csv(&run.join("metrics.csv"))?);
        }
        let episodes = per_seed.iter().map(Vec::len).min().unwrap_or(0);
        let name = dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("run")
            .replace(['/', '\\'], "_");
        let path = out_dir.join(format!("curve_{name}.csv"));
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "episode,mean_return,std_return,success_rate,mean_task_metric,mean_epsilon,mean_omega")?;
        for e in 0..episodes {
            let returns: Vec<f64> = per_seed.iter().map(|rows| rows[e].ret).collect();
            let n = returns.len() as f64;
            let mean = returns.iter().sum::<f64>() / n;
            let std = (returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
            let sr = per_seed.iter().filter(|rows| rows[e].success).count() as f64 / n;
            let metric_vals: Vec<f64> = per_seed
                .iter()
                .map(|rows| rows[e].task_metric)
                .filter(|m| m.is_finite())
                .collect();
            let metric = if metric_vals.is_empty() {
                f64::NAN
            } else {
                metric_vals.iter().sum::<f64>() / metric_vals.len() as f64
            };
            let eps = per_seed.iter().map(|rows| rows[e].epsilon).sum::<f64>() / n;
            let omega = per_seed.iter().map(|rows| rows[e].omega_now).sum::<f64>() / n;
            writeln!(f, "{e},{mean},{std},{sr},{metric},{eps},{omega}")?;
        }
        written.push(path);
        summaries.push(serde_json::json!({
            "dir": dir.display().to_string(),
            "label": agg.label,
            "seeds": agg.seeds,
            "mean_return": agg.mean.mean_return,
            "success_rate_last100": agg.mean.success_rate_last100,
            "best_task_metric": agg.mean.best_metric,
            "total_steps": agg.mean.total_steps,
        }));
    }
    let summary_path = out_dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summaries).expect("json"))?;
    written.push(summary_path);
    Ok(written)
}
