//! Per-arm sample statistics that policies decide on.
//!
//! All in-scope policies depend on the history only through per-arm counts
//! and sums, so raw samples are retained only on request.

#[derive(Debug, Clone, PartialEq)]
pub struct SharedHistory {
    counts: Vec<u64>,
    sums: Vec<f64>,
    successes: Vec<u64>,
    total: u64,
    samples: Option<Vec<Vec<f64>>>,
}

impl SharedHistory {
    pub fn new(num_arms: usize) -> Self {
        Self {
            counts: vec![0; num_arms],
            sums: vec![0.0; num_arms],
            successes: vec![0; num_arms],
            total: 0,
            samples: None,
        }
    }

    /// History that also keeps every sample in arrival order.
    pub fn with_samples(num_arms: usize) -> Self {
        Self {
            samples: Some(vec![Vec::new(); num_arms]),
            ..Self::new(num_arms)
        }
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        if reward == 1.0 {
            self.successes[arm] += 1;
        }
        self.total += 1;
        if let Some(samples) = &mut self.samples {
            samples[arm].push(reward);
        }
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sum(&self, arm: usize) -> f64 {
        self.sums[arm]
    }

    /// Number of samples of `arm` equal to exactly 1.
    pub fn successes(&self, arm: usize) -> u64 {
        self.successes[arm]
    }

    /// Number of samples of `arm` equal to exactly 0 when rewards are binary.
    pub fn failures(&self, arm: usize) -> u64 {
        self.counts[arm] - self.successes[arm]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn samples(&self, arm: usize) -> Option<&[f64]> {
        self.samples.as_ref().map(|s| s[arm].as_slice())
    }

    /// Sample mean of `arm`, or `+inf` for an arm with no samples.
    pub fn empirical_mean(&self, arm: usize) -> f64 {
        match self.counts[arm] {
            0 => f64::INFINITY,
            n => self.sums[arm] / n as f64,
        }
    }

    /// Lowest-index arm without samples.
    pub fn first_unsampled(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c == 0)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (k, v) in values.into_iter().enumerate() {
        if v > best_value || k == 0 {
            best = k;
            best_value = v;
        }
    }
    best
}
