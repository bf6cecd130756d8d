//! Bandit environments: per-arm reward distributions on `[0, 1]` and the
//! derived quantities (best arm, gaps) every metric is expressed in.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family used to turn a list of arm means into reward distributions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    #[default]
    Bernoulli,
    /// Beta law with the given mean and `alpha + beta = concentration`.
    Beta { concentration: f64 },
}

/// Reward law of a single arm. Every variant is supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmDistribution {
    Bernoulli { mean: f64 },
    Beta { alpha: f64, beta: f64 },
}

impl ArmDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { mean } => mean,
            ArmDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ArmDistribution::Bernoulli { .. } => "bernoulli",
            ArmDistribution::Beta { .. } => "beta",
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, ArmDistribution::Bernoulli { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { mean } => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            ArmDistribution::Beta { alpha, beta } => sample_beta(alpha, beta, rng),
        }
    }
}

/// Draws a `Gamma(shape, 1)` variate; shape zero is the point mass at zero.
pub(crate) fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape <= 0.0 {
        return 0.0;
    }
    Gamma::new(shape, 1.0)
        .expect("positive finite gamma shape")
        .sample(rng)
}

/// Beta variate as `X / (X + Y)` with `X ~ Gamma(alpha)`, `Y ~ Gamma(beta)`.
///
/// A zero parameter degenerates to the matching endpoint; at least one of the
/// two must be positive.
pub(crate) fn sample_beta<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let x = sample_gamma(alpha, rng);
    let y = sample_gamma(beta, rng);
    if x + y == 0.0 {
        // Both gamma draws underflowed; fall back to the mean.
        return alpha / (alpha + beta);
    }
    x / (x + y)
}

/// A stochastic K-armed bandit with a unique best arm.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    arms: Vec<ArmDistribution>,
    means: Vec<f64>,
    best_arm: usize,
    gaps: Vec<f64>,
    min_gap: f64,
}

impl BanditInstance {
    /// Builds an instance from arm means. Arms are zero-indexed.
    pub fn new(means: &[f64], kind: DistributionKind) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::TooFewArms(means.len()));
        }
        for (arm, &mean) in means.iter().enumerate() {
            if !(0.0..=1.0).contains(&mean) {
                return Err(Error::MeanOutOfRange { arm, mean });
            }
        }
        let arms = means
            .iter()
            .enumerate()
            .map(|(arm, &mean)| match kind {
                DistributionKind::Bernoulli => Ok(ArmDistribution::Bernoulli { mean }),
                DistributionKind::Beta { concentration } => {
                    if !(concentration.is_finite() && concentration > 0.0) {
                        return Err(Error::InvalidDistribution {
                            arm,
                            reason: format!("beta concentration must be positive, got {concentration}"),
                        });
                    }
                    Ok(ArmDistribution::Beta {
                        alpha: mean * concentration,
                        beta: (1.0 - mean) * concentration,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_arms(arms)
    }

    pub fn from_arms(arms: Vec<ArmDistribution>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::TooFewArms(arms.len()));
        }
        let means: Vec<f64> = arms.iter().map(ArmDistribution::mean).collect();
        for (arm, &mean) in means.iter().enumerate() {
            if !(0.0..=1.0).contains(&mean) {
                return Err(Error::MeanOutOfRange { arm, mean });
            }
        }

        let mut best_arm = 0;
        for (arm, &mean) in means.iter().enumerate().skip(1) {
            if mean > means[best_arm] {
                best_arm = arm;
            }
        }
        let best_mean = means[best_arm];
        if let Some(second) = (0..means.len()).find(|&k| k != best_arm && means[k] == best_mean) {
            return Err(Error::NoUniqueBestArm {
                first: best_arm.min(second),
                second: best_arm.max(second),
                mean: best_mean,
            });
        }

        let gaps: Vec<f64> = means.iter().map(|&m| best_mean - m).collect();
        let min_gap = gaps
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != best_arm)
            .map(|(_, &g)| g)
            .fold(f64::INFINITY, f64::min);

        Ok(Self {
            arms,
            means,
            best_arm,
            gaps,
            min_gap,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmDistribution] {
        &self.arms
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.best_arm]
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// First non-Bernoulli arm, if any.
    pub fn non_bernoulli_arm(&self) -> Option<(usize, &'static str)> {
        self.arms
            .iter()
            .enumerate()
            .find(|(_, d)| !d.is_bernoulli())
            .map(|(k, d)| (k, d.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_arm_instance_gaps() {
        let inst = BanditInstance::new(&[0.8, 0.2], DistributionKind::Bernoulli).unwrap();
        assert_eq!(inst.best_arm(), 0);
        assert!((inst.gaps()[1] - 0.6).abs() < 1e-15);
        assert_eq!(inst.gaps()[0], 0.0);
        assert!((inst.min_gap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn deterministic_arms() {
        let inst = BanditInstance::new(&[1.0, 0.0], DistributionKind::Bernoulli).unwrap();
        assert_eq!(inst.gaps()[1], 1.0);
        assert_eq!(inst.min_gap(), 1.0);
    }

    #[test]
    fn best_arm_need_not_be_first() {
        let inst = BanditInstance::new(&[0.3, 0.9, 0.5], DistributionKind::Bernoulli).unwrap();
        assert_eq!(inst.best_arm(), 1);
        assert!((inst.min_gap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rejects_tied_maximum() {
        let err = BanditInstance::new(&[0.8, 0.8], DistributionKind::Bernoulli).unwrap_err();
        assert!(matches!(err, Error::NoUniqueBestArm { .. }));
        assert!(err.to_string().contains("no unique best arm"));
    }

    #[test]
    fn rejects_bad_means_and_sizes() {
        assert!(matches!(
            BanditInstance::new(&[1.2, 0.1], DistributionKind::Bernoulli),
            Err(Error::MeanOutOfRange { arm: 0, .. })
        ));
        assert!(matches!(
            BanditInstance::new(&[0.5], DistributionKind::Bernoulli),
            Err(Error::TooFewArms(1))
        ));
        assert!(matches!(
            BanditInstance::new(&[f64::NAN, 0.1], DistributionKind::Bernoulli),
            Err(Error::MeanOutOfRange { .. })
        ));
    }

    #[test]
    fn beta_arms_stay_in_unit_interval() {
        let inst =
            BanditInstance::new(&[0.7, 0.0], DistributionKind::Beta { concentration: 4.0 }).unwrap();
        assert_eq!(inst.non_bernoulli_arm(), Some((0, "beta")));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = inst.arms()[0].sample(&mut rng);
            assert!((0.0..=1.0).contains(&x));
            sum += x;
            assert_eq!(inst.arms()[1].sample(&mut rng), 0.0);
        }
        // Var of Beta(2.8, 1.2) = 0.21 / 5 = 0.042.
        let se = (0.042f64 / n as f64).sqrt();
        assert!((sum / n as f64 - 0.7).abs() < 4.0 * se);
    }
}
