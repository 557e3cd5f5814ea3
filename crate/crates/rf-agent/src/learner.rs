use crate::{AdamState, AgentError, QNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    /// Huber with delta = 1.
    #[default]
    Huber,
    Squared,
}

impl LossKind {
    #[inline]
    fn value(self, e: f64) -> f64 {
        match self {
            LossKind::Squared => 0.5 * e * e,
            LossKind::Huber => {
                let a = e.abs();
                if a <= 1.0 {
                    0.5 * e * e
                } else {
                    a - 0.5
                }
            }
        }
    }

    #[inline]
    fn grad(self, e: f64) -> f64 {
        match self {
            LossKind::Squared => e,
            LossKind::Huber => e.clamp(-1.0, 1.0),
        }
    }
}

/// One learner minibatch, states borrowed from the replay buffer.
pub struct TrainBatch<'a> {
    pub states: Vec<&'a [f64]>,
    pub actions: Vec<usize>,
    pub targets: Vec<f64>,
    pub is_weights: Vec<f64>,
}

/// Bootstrapped targets for a batch:
/// DQN  `Y = r + g (1-d) max_a Q_target(s', a)`,
/// DDQN `Y = r + g (1-d) Q_target(s', argmax_a Q_online(s', a))`.
///
/// `next_legal` masks the bootstrap maximization per sample when the
/// environment restricts actions; `None` allows everything.
pub fn compute_target(
    rewards: &[f64],
    dones: &[bool],
    next_states: &[&[f64]],
    next_legal: Option<&[Vec<bool>]>,
    online: &QNetwork,
    target: &QNetwork,
    gamma: f64,
    double_q: bool,
) -> Result<Vec<f64>, AgentError> {
    let n = rewards.len();
    assert_eq!(dones.len(), n);
    assert_eq!(next_states.len(), n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if dones[i] {
            out.push(rewards[i]);
            continue;
        }
        let legal = next_legal.map(|m| m[i].as_slice());
        let q_target = target.forward(next_states[i])?;
        let bootstrap = if double_q {
            let q_online = online.forward(next_states[i])?;
            q_target[masked_argmax(&q_online, legal)?]
        } else {
            q_target[masked_argmax(&q_target, legal)?]
        };
        out.push(rewards[i] + gamma * bootstrap);
    }
    Ok(out)
}

pub(crate) fn masked_argmax(q: &[f64], legal: Option<&[bool]>) -> Result<usize, AgentError> {
    let mut best: Option<(usize, f64)> = None;
    for (a, &v) in q.iter().enumerate() {
        if let Some(mask) = legal {
            if !mask[a] {
                continue;
            }
        }
        // ties break toward the lowest index
        if best.map_or(true, |(_, bv)| v > bv) {
            best = Some((a, v));
        }
    }
    best.map(|(a, _)| a).ok_or(AgentError::NoLegalAction)
}

/// Importance-weighted regression loss of the batch without touching the
/// network; the scalar the finite-difference gradient oracle probes.
pub fn loss_only(net: &QNetwork, batch: &TrainBatch, loss: LossKind) -> Result<f64, AgentError> {
    let trace = net.forward_trace(&batch.states)?;
    let q_out = trace.activations.last().unwrap();
    let n_out = net.output_dim();
    let mut acc = 0.0;
    for b in 0..trace.batch {
        let q = q_out[b * n_out + batch.actions[b]];
        let e = q - batch.targets[b];
        acc += batch.is_weights[b] * loss.value(e);
    }
    Ok(acc / trace.batch as f64)
}

/// Reverse-mode pass: returns `(loss, per-sample |Q - Y|, unclipped gradient)`
/// with the gradient laid out in flat parameter order (layer 0 weights,
/// layer 0 biases, layer 1 weights, ...).
pub fn gradients(
    net: &QNetwork,
    batch: &TrainBatch,
    loss: LossKind,
) -> Result<(f64, Vec<f64>, Vec<f64>), AgentError> {
    let trace = net.forward_trace(&batch.states)?;
    let n_out = net.output_dim();
    let batch_n = trace.batch;
    let q_out = trace.activations.last().unwrap();

    let mut loss_acc = 0.0;
    let mut td_abs = Vec::with_capacity(batch_n);
    // dL/d(output): zero except at the taken action
    let mut upstream = vec![0.0; batch_n * n_out];
    for b in 0..batch_n {
        let q = q_out[b * n_out + batch.actions[b]];
        if !q.is_finite() {
            return Err(AgentError::NonFinite("forward pass"));
        }
        let e = q - batch.targets[b];
        loss_acc += batch.is_weights[b] * loss.value(e);
        td_abs.push(e.abs());
        upstream[b * n_out + batch.actions[b]] = batch.is_weights[b] * loss.grad(e) / batch_n as f64;
    }
    let loss_value = loss_acc / batch_n as f64;

    let n_layers = net.weights.len();
    let mut w_grads: Vec<Vec<f64>> = net.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut b_grads: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    for l in (0..n_layers).rev() {
        let n_in = net.layer_sizes()[l];
        let n_outl = net.layer_sizes()[l + 1];
        let prev_act = &trace.activations[l];
        // output layer is linear; hidden layers apply the activation derivative
        if l != n_layers - 1 {
            let pre = &trace.pre_activations[l];
            for (u, &z) in upstream.iter_mut().zip(pre.iter()) {
                *u *= net.activation_derivative(z);
            }
        }
        for b in 0..batch_n {
            let up = &upstream[b * n_outl..(b + 1) * n_outl];
            let x = &prev_act[b * n_in..(b + 1) * n_in];
            for o in 0..n_outl {
                let g = up[o];
                if g == 0.0 {
                    continue;
                }
                b_grads[l][o] += g;
                let row = &mut w_grads[l][o * n_in..(o + 1) * n_in];
                for (wg, &xv) in row.iter_mut().zip(x) {
                    *wg += g * xv;
                }
            }
        }
        if l > 0 {
            let mut down = vec![0.0; batch_n * n_in];
            for b in 0..batch_n {
                let up = &upstream[b * n_outl..(b + 1) * n_outl];
                let dn = &mut down[b * n_in..(b + 1) * n_in];
                for o in 0..n_outl {
                    let g = up[o];
                    if g == 0.0 {
                        continue;
                    }
                    let row = &net.weights[l][o * n_in..(o + 1) * n_in];
                    for (d, &w) in dn.iter_mut().zip(row) {
                        *d += g * w;
                    }
                }
            }
            upstream = down;
        }
    }

    let mut flat = Vec::with_capacity(net.param_count());
    for l in 0..n_layers {
        flat.extend_from_slice(&w_grads[l]);
        flat.extend_from_slice(&b_grads[l]);
    }
    Ok((loss_value, td_abs, flat))
}

/// Full learner step: backward pass, global-norm gradient clipping, Adam.
/// Returns the scalar loss and the per-sample `|Q - Y|` used to refresh
/// replay priorities.
pub fn train_step(
    net: &mut QNetwork,
    batch: &TrainBatch,
    loss: LossKind,
    grad_clip: f64,
    adam: &mut AdamState,
) -> Result<(f64, Vec<f64>), AgentError> {
    let (loss_value, td_abs, mut flat) = gradients(net, batch, loss)?;
    if grad_clip > 0.0 {
        let norm = flat.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > grad_clip {
            let scale = grad_clip / norm;
            for g in &mut flat {
                *g *= scale;
            }
        }
    }
    let mut params: Vec<f64> = (0..net.param_count()).map(|i| net.get_param(i)).collect();
    adam.step(&flat, |i, d| params[i] += d);
    for (i, &p) in params.iter().enumerate() {
        net.set_param(i, p);
    }
    Ok((loss_value, td_abs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Activation;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_batch<'a>(states: &'a [Vec<f64>], net: &QNetwork) -> TrainBatch<'a> {
        TrainBatch {
            states: states.iter().map(|s| s.as_slice()).collect(),
            actions: (0..states.len()).map(|i| i % net.output_dim()).collect(),
            targets: vec![0.3; states.len()],
            is_weights: vec![1.0; states.len()],
        }
    }

    #[test]
    fn targets_equal_to_q_give_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = QNetwork::new(vec![3, 8, 2], Activation::Relu, &mut rng);
        let states: Vec<Vec<f64>> =
            (0..4).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut batch = toy_batch(&states, &net);
        for (i, s) in states.iter().enumerate() {
            batch.targets[i] = net.forward(s).unwrap()[batch.actions[i]];
        }
        let before = net.clone();
        let mut adam = AdamState::new(net.param_count(), 1e-2);
        let (loss, td) = train_step(&mut net, &batch, LossKind::Huber, 1.0, &mut adam).unwrap();
        assert!(loss < 1e-20);
        assert!(td.iter().all(|&d| d < 1e-12));
        assert_eq!(net, before);
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (loss, activation) in [
            (LossKind::Squared, Activation::Relu),
            (LossKind::Huber, Activation::Relu),
            (LossKind::Squared, Activation::Selu),
        ] {
            let net = QNetwork::new(vec![4, 10, 6, 3], activation, &mut rng);
            let states: Vec<Vec<f64>> =
                (0..8).map(|_| (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect()).collect();
            let mut batch = toy_batch(&states, &net);
            for (i, s) in states.iter().enumerate() {
                batch.targets[i] = net.forward(s).unwrap()[batch.actions[i]] + rng.gen_range(-0.5..0.5);
                batch.is_weights[i] = rng.gen_range(0.2..1.0);
            }
            let (_, _, grads) = gradients(&net, &batch, loss).unwrap();
            let h = 1e-5;
            for _ in 0..60 {
                let idx = rng.gen_range(0..net.param_count());
                let mut plus = net.clone();
                plus.set_param(idx, plus.get_param(idx) + h);
                let mut minus = net.clone();
                minus.set_param(idx, minus.get_param(idx) - h);
                let fd = (loss_only(&plus, &batch, loss).unwrap()
                    - loss_only(&minus, &batch, loss).unwrap())
                    / (2.0 * h);
                let g = grads[idx];
                let denom = g.abs().max(fd.abs()).max(1e-8);
                assert!(
                    ((g - fd) / denom).abs() < 1e-4,
                    "param {idx}: analytic {g} vs fd {fd} ({loss:?}, {activation:?})"
                );
            }
        }
    }

    #[test]
    fn unit_is_weights_match_unweighted_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = QNetwork::new(vec![3, 6, 2], Activation::Relu, &mut rng);
        let states: Vec<Vec<f64>> =
            (0..5).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut batch = toy_batch(&states, &net);
        batch.targets = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let weighted = loss_only(&net, &batch, LossKind::Huber).unwrap();
        let mut manual = 0.0;
        for (i, s) in states.iter().enumerate() {
            let q = net.forward(s).unwrap()[batch.actions[i]];
            let e: f64 = q - batch.targets[i];
            manual += if e.abs() <= 1.0 { 0.5 * e * e } else { e.abs() - 0.5 };
        }
        manual /= 5.0;
        assert!((weighted - manual).abs() < 1e-12);
    }

    #[test]
    fn gradient_clipping_bounds_the_update_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = QNetwork::new(vec![3, 6, 2], Activation::Relu, &mut rng);
        let states: Vec<Vec<f64>> =
            (0..4).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut batch = toy_batch(&states, &net);
        batch.targets = vec![1e4; 4]; // huge errors force a large raw gradient
        let (_, _, grads) = gradients(&net, &batch, LossKind::Squared).unwrap();
        let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm > 1.0, "test premise: raw norm {norm} must exceed the clip");
    }

    #[test]
    fn dqn_vs_ddqn_divergence_case() {
        // Q_target = [10, 0], Q_online = [0, 10]:
        // DQN bootstraps max Q_target = 10; DDQN bootstraps Q_target[argmax Q_online] = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut online = QNetwork::new(vec![1, 2], Activation::Relu, &mut rng);
        let mut target = QNetwork::new(vec![1, 2], Activation::Relu, &mut rng);
        for i in 0..online.param_count() {
            online.set_param(i, 0.0);
            target.set_param(i, 0.0);
        }
        // with input fixed at 1.0, output o = w[o] * 1 + b[o]
        target.weights[0][0] = 10.0;
        target.weights[0][1] = 0.0;
        online.weights[0][0] = 0.0;
        online.weights[0][1] = 10.0;
        let next: Vec<&[f64]> = vec![&[1.0]];
        let dqn = compute_target(&[1.0], &[false], &next, None, &online, &target, 0.5, false).unwrap();
        let ddqn = compute_target(&[1.0], &[false], &next, None, &online, &target, 0.5, true).unwrap();
        assert!((dqn[0] - 6.0).abs() < 1e-12); // 1 + 0.5 * 10
        assert!((ddqn[0] - 1.0).abs() < 1e-12); // 1 + 0.5 * 0
        // terminal masks the bootstrap entirely
        let t = compute_target(&[7.0], &[true], &next, None, &online, &target, 0.5, false).unwrap();
        assert_eq!(t[0], 7.0);
        // identical nets make both rules coincide
        let same = online.clone();
        let a = compute_target(&[0.0], &[false], &next, None, &same, &online, 0.9, false).unwrap();
        let b = compute_target(&[0.0], &[false], &next, None, &same, &online, 0.9, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bootstrap_respects_legality_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut target = QNetwork::new(vec![1, 3], Activation::Relu, &mut rng);
        for i in 0..target.param_count() {
            target.set_param(i, 0.0);
        }
        target.biases[0].copy_from_slice(&[9.0, 5.0, 3.0]);
        let online = target.clone();
        let next: Vec<&[f64]> = vec![&[1.0]];
        let masks = vec![vec![false, true, true]];
        let y = compute_target(&[0.0], &[false], &next, Some(&masks), &online, &target, 1.0, false)
            .unwrap();
        assert_eq!(y[0], 5.0);
    }
}
