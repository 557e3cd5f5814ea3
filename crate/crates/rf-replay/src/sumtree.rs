/// Complete binary tree over priorities: leaves hold unnormalized priorities,
/// internal nodes hold subtree sums, giving O(log N) proportional sampling
/// and updates.
///
/// Internal nodes are recomputed as `left + right` on every update (instead
/// of propagating differences), so parent/child consistency never drifts.
#[derive(Debug, Clone)]
pub struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    /// `capacity` is rounded up to the next power of two.
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1).next_power_of_two();
        Self { capacity, nodes: vec![0.0; 2 * capacity - 1] }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total(&self) -> f64 {
        self.nodes[0]
    }

    pub fn get(&self, leaf: usize) -> f64 {
        assert!(leaf < self.capacity);
        self.nodes[leaf + self.capacity - 1]
    }

    pub fn set(&mut self, leaf: usize, priority: f64) {
        assert!(leaf < self.capacity, "leaf {leaf} out of range");
        assert!(priority >= 0.0 && priority.is_finite(), "bad priority {priority}");
        let mut ix = leaf + self.capacity - 1;
        self.nodes[ix] = priority;
        while ix > 0 {
            ix = (ix - 1) / 2;
            self.nodes[ix] = self.nodes[2 * ix + 1] + self.nodes[2 * ix + 2];
        }
    }

    /// Leaf index whose prefix-sum interval contains `value in [0, total)`.
    pub fn find(&self, value: f64) -> usize {
        let mut v = value;
        let mut ix = 0usize;
        while ix < self.capacity - 1 {
            let left = 2 * ix + 1;
            if v < self.nodes[left] || self.nodes[left + 1] == 0.0 {
                ix = left;
            } else {
                v -= self.nodes[left];
                ix = left + 1;
            }
        }
        ix - (self.capacity - 1)
    }

    /// Maximum deviation of any internal node from the sum of its children.
    pub fn consistency_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ix in 0..self.capacity - 1 {
            let dev = (self.nodes[ix] - self.nodes[2 * ix + 1] - self.nodes[2 * ix + 2]).abs();
            worst = worst.max(dev);
        }
        worst
    }

    pub fn max_leaf(&self) -> f64 {
        self.nodes[self.capacity - 1..].iter().fold(0.0f64, |a, &b| a.max(b))
    }
}
