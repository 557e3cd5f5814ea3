use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rf_train::Environment;

use crate::{CompileConfig, CompileEnv};

/// A decision rule: observation and legality mask in, action index out.
pub type Policy<'a> = dyn FnMut(&[f64], &[bool]) -> usize + 'a;

/// One evaluation aggregate at a fixed tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub tolerance: f64,
    pub n_targets: usize,
    pub success_rate: f64,
    pub mean_fidelity: f64,
    pub mean_len: f64,
    pub std_len: f64,
    pub seed: u64,
}

/// Greedy evaluation protocol: roll the policy on `n_targets` freshly sampled
/// targets per tolerance (the same targets across tolerances, re-derived from
/// `seed`) and aggregate success rate, final fidelity and episode length.
pub fn evaluate(
    base: &CompileConfig,
    policy: &mut Policy<'_>,
    n_targets: usize,
    tolerances: &[f64],
    seed: u64,
) -> Vec<EvalRow> {
    let mut rows = Vec::with_capacity(tolerances.len());
    for &tolerance in tolerances {
        let mut cfg = base.clone();
        cfg.tolerance = tolerance;
        let mut env = CompileEnv::new(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut successes = 0usize;
        let mut fid_sum = 0.0;
        let mut lens = Vec::with_capacity(n_targets);
        for _ in 0..n_targets {
            let mut obs = env.reset(&mut rng);
            let mut len = 0usize;
            loop {
                let mask = env.legal_mask();
                let action = policy(&obs, &mask);
                let out = env.step(action, &mut rng);
                len += 1;
                if out.done {
                    if out.success {
                        successes += 1;
                    }
                    fid_sum += out.metric.unwrap_or(0.0);
                    break;
                }
                obs = out.observation;
            }
            lens.push(len as f64);
        }
        let n = n_targets as f64;
        let mean_len = lens.iter().sum::<f64>() / n;
        let var = lens.iter().map(|l| (l - mean_len).powi(2)).sum::<f64>() / n;
        rows.push(EvalRow {
            tolerance,
            n_targets,
            success_rate: successes as f64 / n,
            mean_fidelity: fid_sum / n,
            mean_len,
            std_len: var.sqrt(),
            seed,
        });
    }
    rows
}

pub fn write_eval_csv(path: &Path, rows: &[EvalRow]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "tolerance,n_targets,success_rate,mean_fidelity,mean_len,std_len,seed")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.tolerance, r.n_targets, r.success_rate, r.mean_fidelity, r.mean_len, r.std_len, r.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Gateset, TargetSource};
    use rand::Rng;

    #[test]
    fn random_policy_rarely_hits_tight_tolerance() {
        let mut cfg = CompileConfig::new(Gateset::SmallRotations1Q);
        cfg.max_len = 130;
        cfg.target_source = TargetSource::Haar1Q;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut policy = move |_: &[f64], mask: &[bool]| -> usize {
            loop {
                let a = rng.gen_range(0..mask.len());
                if mask[a] {
                    return a;
                }
            }
        };
        let rows = evaluate(&cfg, &mut policy, 1000, &[0.9999], 123);
        assert!(rows[0].success_rate < 0.05, "got {}", rows[0].success_rate);
        assert!(rows[0].mean_len > 100.0, "random walks should mostly time out");
    }

    #[test]
    fn inverse_policy_always_succeeds_on_single_gate_targets() {
        // targets are one basis gate; the inverting policy reads the residual
        // and applies the gate that matches it, succeeding in one step
        let mut cfg = CompileConfig::new(Gateset::SmallRotations1Q);
        cfg.tolerance = 0.9999;
        cfg.target_source = TargetSource::RandomCircuit { min_gates: 1, max_gates: 1 };
        let actions = Gateset::SmallRotations1Q.action_space();
        let gates: Vec<_> = actions
            .iter()
            .map(|g| rf_qcore::gate_matrix(g, 1).unwrap())
            .collect();
        let mut policy = move |obs: &[f64], _: &[bool]| -> usize {
            let residual = rf_qcore::UnitaryMatrix::from_observation(2, obs);
            (0..gates.len())
                .max_by(|&a, &b| {
                    let fa = rf_qcore::fidelity(&gates[a], &residual).unwrap();
                    let fb = rf_qcore::fidelity(&gates[b], &residual).unwrap();
                    fa.partial_cmp(&fb).unwrap()
                })
                .unwrap()
        };
        let rows = evaluate(&cfg, &mut policy, 200, &[0.9999], 7);
        assert_eq!(rows[0].success_rate, 1.0);
        assert!((rows[0].mean_len - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idle_policy_mean_fidelity_matches_haar_average() {
        // a policy that never improves: mean final fidelity approximates the
        // Haar average of |Tr U| / 2, itself estimated by direct Monte Carlo
        let mut cfg = CompileConfig::new(Gateset::SmallRotations1Q);
        cfg.tolerance = 1.0 - 1e-12;
        cfg.max_len = 2;
        // alternate +RX / -RX so the net circuit stays near identity
        let mut flip = false;
        let mut policy = move |_: &[f64], _: &[bool]| -> usize {
            flip = !flip;
            if flip {
                0
            } else {
                1
            }
        };
        let rows = evaluate(&cfg, &mut policy, 4000, &[1.0 - 1e-12], 5);
        // independent Monte-Carlo estimate of E[|Tr U| / 2]
        let mut rng = ChaCha8Rng::seed_from_u64(5005);
        let mc: f64 = (0..20000)
            .map(|_| rf_qcore::haar_random_1q(&mut rng).trace().norm() / 2.0)
            .sum::<f64>()
            / 20000.0;
        assert!(
            (rows[0].mean_fidelity - mc).abs() < 0.02,
            "eval {} vs Monte-Carlo {}",
            rows[0].mean_fidelity,
            mc
        );
    }

    #[test]
    fn csv_output_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eval.csv");
        let rows = vec![EvalRow {
            tolerance: 0.99,
            n_targets: 10,
            success_rate: 0.5,
            mean_fidelity: 0.9,
            mean_len: 12.0,
            std_len: 3.0,
            seed: 1,
        }];
        write_eval_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tolerance,n_targets,success_rate,mean_fidelity,mean_len,std_len,seed"
        );
        assert_eq!(lines.next().unwrap(), "0.99,10,0.5,0.9,12,3,1");
    }
}
