//! Online learners for band and waveform selection.
//!
//! Every node runs one band-level policy over the `N` center frequencies and
//! one waveform-level policy per band. All policies follow the same
//! two-call protocol each PRI: [`select`](BandPolicy::select) an arm, then
//! [`observe`](BandPolicy::observe) the outcome of that arm.

mod epsilon;
mod mctopm;
mod musical_chairs;
mod saa;
mod two_level;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

pub use epsilon::{eps_decay_schedule, eps_greedy_choice, EpsilonPolicy};
pub use mctopm::{ucb_index, MCTopM};
pub use musical_chairs::{mc_exploration_length, McPhase, MusicalChairs};
pub use saa::{saa_step, SaaChoice, SaaPolicy};
pub use two_level::{ActionPair, PolicyParams, TwoLevelNode};

#[derive(Debug, Error, PartialEq)]
pub enum BanditError {
    #[error("{name} = {value} outside {range}")]
    Range { name: &'static str, value: f64, range: &'static str },
    #[error("t must be >= 1")]
    ZeroTime,
    #[error("action set is empty")]
    NoArms,
    #[error("unknown {kind} policy {name:?}")]
    UnknownPolicy { kind: &'static str, name: String },
    #[error("fixed arm {arm} outside {arms} arms")]
    FixedArm { arm: usize, arms: usize },
}

/// Running statistics of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmStats {
    pub pulls: u64,
    pub mean: f64,
    pub last_reward: f64,
}

impl ArmStats {
    /// Fold a reward (clamped to `[0, 1]`) into the running mean.
    pub fn record(&mut self, reward: f64) {
        let r = reward.clamp(0.0, 1.0);
        self.pulls += 1;
        self.mean += (r - self.mean) / self.pulls as f64;
        self.last_reward = r;
    }
}

/// What a node learns about its previous action.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Feedback {
    pub reward: f64,
    /// Another node shared the band.
    pub collided: bool,
    /// The waveform overlapped the band's primary user. Only the
    /// sense-and-avoid waveform learner reacts to this.
    pub interfered: bool,
}

/// Indices of the `m` largest scores, ties toward lower indices, returned in
/// ascending index order.
pub fn top_m(scores: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps lower indices first among equal scores
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut best: Vec<usize> = order.into_iter().take(m.min(scores.len())).collect();
    best.sort_unstable();
    best
}

pub(crate) fn uniform_from<R: Rng + ?Sized>(rng: &mut R, set: &[usize]) -> usize {
    set[rng.random_range(0..set.len())]
}

/// Band-level algorithm names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandPolicyKind {
    Fixed,
    Saa,
    MusicalChairs,
    MCTopM,
}

impl FromStr for BandPolicyKind {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "saa" => Ok(Self::Saa),
            "mc" => Ok(Self::MusicalChairs),
            "mctopm" => Ok(Self::MCTopM),
            other => Err(BanditError::UnknownPolicy { kind: "band", name: other.to_string() }),
        }
    }
}

impl fmt::Display for BandPolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fixed => "fixed",
            Self::Saa => "saa",
            Self::MusicalChairs => "mc",
            Self::MCTopM => "mctopm",
        })
    }
}

/// Waveform-level algorithm names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformPolicyKind {
    Fixed,
    Saa,
    EpsGreedy,
    EpsDecaying,
}

impl FromStr for WaveformPolicyKind {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(Self::Fixed),
            "saa" => Ok(Self::Saa),
            "eps-greedy" => Ok(Self::EpsGreedy),
            "eps-decaying" => Ok(Self::EpsDecaying),
            other => Err(BanditError::UnknownPolicy { kind: "waveform", name: other.to_string() }),
        }
    }
}

impl fmt::Display for WaveformPolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fixed => "fixed",
            Self::Saa => "saa",
            Self::EpsGreedy => "eps-greedy",
            Self::EpsDecaying => "eps-decaying",
        })
    }
}

/// Center-frequency learner of one node.
#[derive(Debug, Clone)]
pub enum BandPolicy {
    Fixed(usize),
    Saa(SaaPolicy),
    MusicalChairs(MusicalChairs),
    MCTopM(MCTopM),
}

impl BandPolicy {
    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        match self {
            Self::Fixed(arm) => *arm,
            Self::Saa(p) => p.select(rng),
            Self::MusicalChairs(p) => p.select(rng),
            Self::MCTopM(p) => p.select(rng),
        }
    }

    pub fn observe(&mut self, arm: usize, fb: &Feedback) {
        match self {
            Self::Fixed(_) => {}
            Self::Saa(p) => p.observe(arm, fb),
            Self::MusicalChairs(p) => p.observe(arm, fb),
            Self::MCTopM(p) => p.observe(arm, fb),
        }
    }

    /// Whether the policy has committed to its arm for good.
    pub fn is_settled(&self) -> bool {
        match self {
            Self::Fixed(_) => true,
            Self::Saa(p) => p.prev().is_some() && !p.triggered(),
            Self::MusicalChairs(p) => p.phase() == McPhase::Fixed,
            Self::MCTopM(p) => p.is_fixed(),
        }
    }
}

/// Waveform learner attached to one band of one node.
#[derive(Debug, Clone)]
pub enum WaveformPolicy {
    Fixed(usize),
    Saa(SaaPolicy),
    Epsilon(EpsilonPolicy),
}

impl WaveformPolicy {
    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        match self {
            Self::Fixed(arm) => *arm,
            Self::Saa(p) => p.select(rng),
            Self::Epsilon(p) => p.select(rng),
        }
    }

    pub fn observe(&mut self, arm: usize, fb: &Feedback) {
        match self {
            Self::Fixed(_) => {}
            Self::Saa(p) => p.observe(arm, fb),
            Self::Epsilon(p) => p.observe(arm, fb),
        }
    }

    /// Total selections observed by this instance.
    pub fn trials(&self) -> u64 {
        match self {
            Self::Fixed(_) => 0,
            Self::Saa(p) => p.trials(),
            Self::Epsilon(p) => p.trials(),
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    /// Pearson chi-square statistic for observed counts against a uniform
    /// expectation.
    pub fn chi_square_uniform(counts: &[usize]) -> f64 {
        let total: usize = counts.iter().sum();
        let expect = total as f64 / counts.len() as f64;
        counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum()
    }

    /// 99.9 % quantiles of chi-square for 1..=8 degrees of freedom.
    pub fn chi_square_999(dof: usize) -> f64 {
        [10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124][dof - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn top_m_breaks_ties_low() {
        assert_eq!(top_m(&[0.5, 0.9, 0.5, 0.5], 2), vec![0, 1]);
        assert_eq!(top_m(&[f64::INFINITY; 4], 3), vec![0, 1, 2]);
        assert_eq!(top_m(&[0.1, 0.2], 5), vec![0, 1]);
    }

    #[test]
    fn kinds_round_trip_names() {
        for name in ["fixed", "saa", "mc", "mctopm"] {
            assert_eq!(name.parse::<BandPolicyKind>().unwrap().to_string(), name);
        }
        for name in ["fixed", "saa", "eps-greedy", "eps-decaying"] {
            assert_eq!(name.parse::<WaveformPolicyKind>().unwrap().to_string(), name);
        }
        assert!("ucb".parse::<BandPolicyKind>().is_err());
    }

    #[test]
    fn arm_stats_clamps() {
        let mut s = ArmStats::default();
        s.record(1.5);
        s.record(-0.5);
        assert_eq!(s.pulls, 2);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.last_reward, 0.0);
    }

    proptest! {
        #[test]
        fn running_mean_matches_arithmetic_mean(rewards in prop::collection::vec(0.0f64..=1.0, 1..200)) {
            let mut s = ArmStats::default();
            for &r in &rewards {
                s.record(r);
            }
            let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
            prop_assert!((s.mean - mean).abs() <= 1e-12);
            prop_assert_eq!(s.pulls, rewards.len() as u64);
        }

        #[test]
        fn top_m_invariant_under_shift(scores in prop::collection::vec(0.0f64..1.0, 2..8), shift in -5.0f64..5.0, m in 1usize..4) {
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            // skip near-ties where the shift can reorder in floating point
            let mut sorted = scores.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let k = m.min(scores.len());
            prop_assume!(k == scores.len() || (sorted[k - 1] - sorted[k]).abs() > 1e-9);
            prop_assert_eq!(top_m(&scores, m), top_m(&shifted, m));
        }
    }
}
