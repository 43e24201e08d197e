//! Constant and decaying ε-greedy.

use rand::Rng;

use super::{ArmStats, BanditError, Feedback};

/// `min(1, t^-exponent)`.
pub fn eps_decay_schedule(t: u64, exponent: f64) -> Result<f64, BanditError> {
    if t == 0 {
        return Err(BanditError::ZeroTime);
    }
    if !exponent.is_finite() || exponent < 0.0 {
        return Err(BanditError::Range { name: "exponent", value: exponent, range: "[0, inf)" });
    }
    Ok((t as f64).powf(-exponent).min(1.0))
}

/// One ε-greedy draw over `means`: explore with probability `eps`, otherwise
/// the first maximizer.
pub fn eps_greedy_choice<R: Rng + ?Sized>(means: &[f64], eps: f64, rng: &mut R) -> usize {
    assert!(!means.is_empty(), "empty action set");
    if eps > 0.0 && rng.random::<f64>() < eps {
        return rng.random_range(0..means.len());
    }
    let mut best = 0;
    for (k, &m) in means.iter().enumerate().skip(1) {
        if m > means[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct EpsilonPolicy {
    stats: Vec<ArmStats>,
    epsilon: f64,
    /// `None` keeps `epsilon` constant.
    decay_exponent: Option<f64>,
    means: Vec<f64>,
}

impl EpsilonPolicy {
    pub fn constant(arms: usize, epsilon: f64) -> Result<Self, BanditError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(BanditError::Range { name: "epsilon", value: epsilon, range: "[0, 1]" });
        }
        Self::build(arms, epsilon, None)
    }

    pub fn decaying(arms: usize, exponent: f64) -> Result<Self, BanditError> {
        eps_decay_schedule(1, exponent)?;
        Self::build(arms, 1.0, Some(exponent))
    }

    fn build(arms: usize, epsilon: f64, decay_exponent: Option<f64>) -> Result<Self, BanditError> {
        if arms == 0 {
            return Err(BanditError::NoArms);
        }
        // an untried arm has no estimate yet; ranking it first tries every arm once
        Ok(Self { stats: vec![ArmStats::default(); arms], epsilon, decay_exponent, means: vec![f64::INFINITY; arms] })
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        if let Some(exp) = self.decay_exponent {
            // own trial count, so an idle band keeps its exploration budget
            self.epsilon = eps_decay_schedule(self.trials() + 1, exp).expect("validated exponent");
        }
        eps_greedy_choice(&self.means, self.epsilon, rng)
    }

    pub fn observe(&mut self, arm: usize, fb: &Feedback) {
        self.stats[arm].record(fb.reward);
        self.means[arm] = self.stats[arm].mean;
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn trials(&self) -> u64 {
        self.stats.iter().map(|s| s.pulls).sum()
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }
}
