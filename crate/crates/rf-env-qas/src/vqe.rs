use rand_chacha::ChaCha8Rng;

use rf_qcore::{
    noisy_expectation_density, noisy_expectation_trajectories, GateSpec, NoiseModel,
    PauliSumHamiltonian, Statevector,
};

use crate::QasError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VqeMethod {
    #[default]
    NelderMead,
    ParamShiftAdam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeOptimizerConfig {
    pub method: VqeMethod,
    /// Cost-evaluation budget per optimization call.
    pub max_iter: usize,
    /// Start from the previously optimized angles instead of zeros.
    pub warm_start: bool,
}

impl Default for VqeOptimizerConfig {
    fn default() -> Self {
        Self { method: VqeMethod::NelderMead, max_iter: 1000, warm_start: true }
    }
}

/// Cost backend: exact statevector when noiseless; under depolarizing noise,
/// exact density-matrix evolution up to 6 qubits and Monte-Carlo Pauli
/// trajectories beyond.
pub struct CostEvaluator<'a> {
    hamiltonian: &'a PauliSumHamiltonian,
    noise: Option<NoiseModel>,
    trajectories: usize,
}

const MAX_DENSITY_QUBITS: usize = 6;

impl<'a> CostEvaluator<'a> {
    pub fn new(hamiltonian: &'a PauliSumHamiltonian, noise: Option<NoiseModel>, trajectories: usize) -> Self {
        Self { hamiltonian, noise, trajectories }
    }

    pub fn cost(&self, gates: &[GateSpec], rng: &mut ChaCha8Rng) -> Result<f64, QasError> {
        let n = self.hamiltonian.n_qubits();
        let value = match self.noise {
            None => {
                let mut psi = Statevector::zero(n);
                psi.apply_circuit(gates)?;
                self.hamiltonian.expectation_statevector(&psi)?
            }
            Some(noise) if n <= MAX_DENSITY_QUBITS => {
                noisy_expectation_density(gates, self.hamiltonian, noise)?
            }
            Some(noise) => noisy_expectation_trajectories(
                gates,
                self.hamiltonian,
                noise,
                self.trajectories,
                rng,
            )?,
        };
        if !value.is_finite() {
            return Err(QasError::NonFiniteCost);
        }
        Ok(value)
    }
}

/// Minimize `cost_fn` over the circuit angles within a fixed evaluation
/// budget. Always returns the best point seen, so the result never exceeds
/// the cost at the initial angles.
pub fn optimize_parameters(
    cost_fn: &mut dyn FnMut(&[f64]) -> Result<f64, QasError>,
    init: &[f64],
    config: &VqeOptimizerConfig,
) -> Result<(Vec<f64>, f64), QasError> {
    if init.is_empty() {
        let c = cost_fn(&[])?;
        return Ok((Vec::new(), c));
    }
    match config.method {
        VqeMethod::NelderMead => nelder_mead(cost_fn, init, config.max_iter),
        VqeMethod::ParamShiftAdam => param_shift_adam(cost_fn, init, config.max_iter),
    }
}

/// Classic Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5) with an orthogonal initial simplex of step 0.25 rad.
fn nelder_mead(
    cost_fn: &mut dyn FnMut(&[f64]) -> Result<f64, QasError>,
    init: &[f64],
    max_evals: usize,
) -> Result<(Vec<f64>, f64), QasError> {
    const STEP: f64 = 0.25;
    let dim = init.len();
    let mut evals = 0usize;
    let mut best: (Vec<f64>, f64) = (init.to_vec(), f64::INFINITY);
    let mut eval = |x: &[f64], evals: &mut usize, best: &mut (Vec<f64>, f64)| -> Result<f64, QasError> {
        *evals += 1;
        let c = cost_fn(x)?;
        if !c.is_finite() {
            return Err(QasError::NonFiniteCost);
        }
        if c < best.1 {
            *best = (x.to_vec(), c);
        }
        Ok(c)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let c0 = eval(init, &mut evals, &mut best)?;
    simplex.push((init.to_vec(), c0));
    for i in 0..dim {
        if evals >= max_evals {
            return Ok(best);
        }
        let mut x = init.to_vec();
        x[i] += STEP;
        let c = eval(&x, &mut evals, &mut best)?;
        simplex.push((x, c));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let worst = simplex.len() - 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..worst].iter().map(|(x, _)| x[k]).sum::<f64>() / worst as f64)
            .collect();
        let reflect: Vec<f64> =
            (0..dim).map(|k| centroid[k] + (centroid[k] - simplex[worst].0[k])).collect();
        let c_r = eval(&reflect, &mut evals, &mut best)?;
        if c_r < simplex[0].1 {
            if evals >= max_evals {
                break;
            }
            let expand: Vec<f64> =
                (0..dim).map(|k| centroid[k] + 2.0 * (centroid[k] - simplex[worst].0[k])).collect();
            let c_e = eval(&expand, &mut evals, &mut best)?;
            simplex[worst] = if c_e < c_r { (expand, c_e) } else { (reflect, c_r) };
        } else if c_r < simplex[worst - 1].1 {
            simplex[worst] = (reflect, c_r);
        } else {
            if evals >= max_evals {
                break;
            }
            let contract: Vec<f64> =
                (0..dim).map(|k| centroid[k] + 0.5 * (simplex[worst].0[k] - centroid[k])).collect();
            let c_c = eval(&contract, &mut evals, &mut best)?;
            if c_c < simplex[worst].1 {
                simplex[worst] = (contract, c_c);
            } else {
                // shrink toward the best vertex
                let anchor = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    if evals >= max_evals {
                        return Ok(best);
                    }
                    for k in 0..dim {
                        v.0[k] = anchor[k] + 0.5 * (v.0[k] - anchor[k]);
                    }
                    v.1 = eval(&v.0, &mut evals, &mut best)?;
                }
            }
        }
    }
    Ok(best)
}

/// Gradient descent with the parameter-shift rule
/// `dC/dt_k = (C(t + pi/2 e_k) - C(t - pi/2 e_k)) / 2` (exact for gates
/// generated by half-angle Pauli rotations) and Adam updates.
fn param_shift_adam(
    cost_fn: &mut dyn FnMut(&[f64]) -> Result<f64, QasError>,
    init: &[f64],
    max_evals: usize,
) -> Result<(Vec<f64>, f64), QasError> {
    const LR: f64 = 0.1;
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let dim = init.len();
    let mut theta = init.to_vec();
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut t = 0u32;
    let mut evals = 0usize;
    let c0 = cost_fn(&theta)?;
    evals += 1;
    let mut best = (theta.clone(), c0);
    while evals + 2 * dim + 1 <= max_evals {
        t += 1;
        let mut grad = vec![0.0; dim];
        for k in 0..dim {
            let mut plus = theta.clone();
            plus[k] += std::f64::consts::FRAC_PI_2;
            let mut minus = theta.clone();
            minus[k] -= std::f64::consts::FRAC_PI_2;
            grad[k] = (cost_fn(&plus)? - cost_fn(&minus)?) / 2.0;
            evals += 2;
        }
        for k in 0..dim {
            m[k] = BETA1 * m[k] + (1.0 - BETA1) * grad[k];
            v[k] = BETA2 * v[k] + (1.0 - BETA2) * grad[k] * grad[k];
            let m_hat = m[k] / (1.0 - BETA1.powi(t as i32));
            let v_hat = v[k] / (1.0 - BETA2.powi(t as i32));
            theta[k] -= LR * m_hat / (v_hat.sqrt() + EPS);
        }
        let c = cost_fn(&theta)?;
        evals += 1;
        if !c.is_finite() {
            return Err(QasError::NonFiniteCost);
        }
        if c < best.1 {
            best = (theta.clone(), c);
        }
    }
    Ok(best)
}
