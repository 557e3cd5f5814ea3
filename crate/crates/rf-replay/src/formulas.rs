use crate::{OmegaSchedule, PrioritySpec, ReplayError, Strategy};

/// Bootstrapped TD target `Y = r + gamma (1 - done) max_a' Q(s', a')`.
pub fn td_target(reward: f64, done: bool, gamma: f64, max_next_q: f64) -> f64 {
    reward + gamma * if done { 0.0 } else { max_next_q }
}

/// Per-transition reliability scores for one episode:
/// `R_t = 1 - (sum_{i>t} d_i) / (sum_i d_i)` over the absolute TD errors.
///
/// A zero-total episode leaves the formula 0/0; such perfectly predicted
/// episodes are scored maximally reliable (`R_t = 1` everywhere).
pub fn reliability_scores(td_plus: &[f64]) -> Result<Vec<f64>, ReplayError> {
    for &d in td_plus {
        if !d.is_finite() || d < 0.0 {
            return Err(ReplayError::BadPriority(d));
        }
    }
    let total: f64 = td_plus.iter().sum();
    if total == 0.0 {
        return Ok(vec![1.0; td_plus.len()]);
    }
    let mut out = Vec::with_capacity(td_plus.len());
    let mut behind = 0.0;
    for &d in td_plus {
        behind += d;
        out.push(behind / total);
    }
    Ok(out)
}

/// Annealed reliability exponent: linear from `omega_min` to `omega_max`
/// over `t_ann` steps, clamped afterwards.
pub fn omega_at(schedule: &OmegaSchedule, tau: u64) -> f64 {
    let frac = if schedule.t_ann == 0 { 1.0 } else { (tau as f64 / schedule.t_ann as f64).min(1.0) };
    schedule.omega_min + (schedule.omega_max - schedule.omega_min) * frac
}

/// Unnormalized priorities and sampling probabilities for a set of transitions.
///
/// - Uniform / HER: `psi_i = 1`
/// - PER:           `psi_i = (d_i + eps)^alpha`
/// - ReaPER:        `psi_i = R_i^omega (d_i + eps)^alpha` with the fixed spec omega
/// - ReaPER+:       `psi_i = R_i^omega_now (d_i + eps)^alpha`
pub fn priorities(
    strategy: Strategy,
    td_plus: &[f64],
    reliability: &[f64],
    spec: &PrioritySpec,
    omega_now: f64,
) -> Result<(Vec<f64>, Vec<f64>), ReplayError> {
    if td_plus.is_empty() {
        return Err(ReplayError::Empty);
    }
    assert_eq!(td_plus.len(), reliability.len());
    let psi: Vec<f64> = match strategy {
        Strategy::Uniform | Strategy::Her => vec![1.0; td_plus.len()],
        Strategy::Per => td_plus
            .iter()
            .map(|&d| single_priority(d, 1.0, 0.0, spec))
            .collect::<Result<_, _>>()?,
        Strategy::ReaPer => td_plus
            .iter()
            .zip(reliability)
            .map(|(&d, &r)| single_priority(d, r, spec.omega, spec))
            .collect::<Result<_, _>>()?,
        Strategy::ReaPerPlus => td_plus
            .iter()
            .zip(reliability)
            .map(|(&d, &r)| single_priority(d, r, omega_now, spec))
            .collect::<Result<_, _>>()?,
    };
    let total: f64 = psi.iter().sum();
    let mu = psi.iter().map(|&p| p / total).collect();
    Ok((psi, mu))
}

/// One transition's unnormalized priority `R^omega (d + eps)^alpha`.
pub(crate) fn single_priority(
    td_plus: f64,
    reliability: f64,
    omega: f64,
    spec: &PrioritySpec,
) -> Result<f64, ReplayError> {
    if !td_plus.is_finite() || td_plus < 0.0 {
        return Err(ReplayError::BadPriority(td_plus));
    }
    let base = (td_plus + spec.epsilon_priority).powf(spec.alpha);
    Ok(if omega == 0.0 { base } else { reliability.powf(omega) * base })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn td_target_cases() {
        assert_eq!(td_target(1.0, true, 0.99, 100.0), 1.0);
        assert_eq!(td_target(0.0, false, 0.5, 4.0), 2.0);
        let r = -1.0 / 130.0;
        assert_eq!(td_target(r, false, 0.99, 0.0), r);
    }

    #[test]
    fn reliability_hand_cases() {
        assert_eq!(reliability_scores(&[1.0, 1.0, 1.0, 1.0]).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(reliability_scores(&[5.0]).unwrap(), vec![1.0]);
        assert_eq!(reliability_scores(&[0.0, 0.0, 0.0]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert!(reliability_scores(&[1.0, f64::NAN]).is_err());
        assert!(reliability_scores(&[-0.5]).is_err());
    }

    #[test]
    fn reliability_is_nondecreasing_and_ends_at_one() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let n = rng.gen_range(1..40);
            let tds: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let r = reliability_scores(&tds).unwrap();
            for w in r.windows(2) {
                assert!(w[1] >= w[0] - 1e-15);
            }
            if tds.iter().sum::<f64>() > 0.0 {
                assert!((r[n - 1] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn omega_schedule_endpoints_and_midpoint() {
        let s = OmegaSchedule { omega_min: 0.1, omega_max: 0.7, t_ann: 500_000 };
        assert!((omega_at(&s, 0) - 0.1).abs() < 1e-15);
        assert!((omega_at(&s, 250_000) - 0.4).abs() < 1e-12);
        assert!((omega_at(&s, 1_000_000) - 0.7).abs() < 1e-15);
        // non-decreasing
        let mut prev = -1.0;
        for tau in (0..700_000).step_by(1000) {
            let w = omega_at(&s, tau);
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn per_normalization_example() {
        let spec = PrioritySpec { alpha: 1.0, epsilon_priority: 0.0, ..Default::default() };
        let (_, mu) = priorities(Strategy::Per, &[1.0, 3.0], &[1.0, 1.0], &spec, 0.0).unwrap();
        assert!((mu[0] - 0.25).abs() < 1e-12);
        assert!((mu[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn reaper_plus_ratio_example() {
        // R = [0.5, 1.0], d = [2, 2], alpha = 0.4, omega = 1 -> mu = [1/3, 2/3]
        let spec = PrioritySpec { alpha: 0.4, epsilon_priority: 0.0, ..Default::default() };
        let (_, mu) =
            priorities(Strategy::ReaPerPlus, &[2.0, 2.0], &[0.5, 1.0], &spec, 1.0).unwrap();
        assert!((mu[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((mu[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mu_sums_to_one() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let spec = PrioritySpec::default();
        for strategy in [Strategy::Uniform, Strategy::Per, Strategy::ReaPer, Strategy::ReaPerPlus] {
            for _ in 0..50 {
                let n = rng.gen_range(1..30);
                let tds: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..4.0)).collect();
                let rel = reliability_scores(&tds).unwrap();
                let (_, mu) = priorities(strategy, &tds, &rel, &spec, rng.gen_range(0.0..1.0)).unwrap();
                assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let spec = PrioritySpec::default();
        assert!(priorities(Strategy::Per, &[], &[], &spec, 0.0).is_err());
    }
}
