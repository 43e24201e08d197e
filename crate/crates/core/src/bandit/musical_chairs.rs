//! Musical Chairs: explore for a fixed horizon, then sit on a free top arm.

use rand::Rng;

use super::{top_m, uniform_from, ArmStats, BanditError, Feedback};

/// Length of the exploration phase,
/// `ceil(max(16M/eps^2 * ln(4M^2/delta), M^2 * ln(4/delta) / 0.02))`.
pub fn mc_exploration_length(m: usize, eps: f64, delta: f64) -> Result<u64, BanditError> {
    if m == 0 {
        return Err(BanditError::Range { name: "M", value: 0.0, range: "[1, inf)" });
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(BanditError::Range { name: "eps", value: eps, range: "(0, 1]" });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BanditError::Range { name: "delta", value: delta, range: "(0, 1)" });
    }
    let m = m as f64;
    let a = 16.0 * m / (eps * eps) * (4.0 * m * m / delta).ln();
    let b = m * m * (4.0 / delta).ln() / 0.02;
    Ok(a.max(b).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McPhase {
    Exploring,
    /// Past `T0`, still looking for a free chair.
    Settling,
    Fixed,
}

#[derive(Debug, Clone)]
pub struct MusicalChairs {
    stats: Vec<ArmStats>,
    m: usize,
    t0: u64,
    t: u64,
    best_set: Vec<usize>,
    prev: Option<usize>,
    collided_prev: bool,
    fixed: bool,
}

impl MusicalChairs {
    pub fn new(arms: usize, m: usize, t0: u64) -> Self {
        assert!(arms > 0, "empty action set");
        Self {
            stats: vec![ArmStats::default(); arms],
            m: m.clamp(1, arms),
            t0,
            t: 0,
            best_set: Vec::new(),
            prev: None,
            collided_prev: false,
            fixed: false,
        }
    }

    pub fn with_params(arms: usize, m: usize, eps: f64, delta: f64) -> Result<Self, BanditError> {
        Ok(Self::new(arms, m, mc_exploration_length(m, eps, delta)?))
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.t += 1;
        let arm = match self.prev {
            Some(a) if self.fixed => a,
            _ if self.t <= self.t0 => rng.random_range(0..self.stats.len()),
            prev => {
                if self.best_set.is_empty() {
                    let means: Vec<f64> = self.stats.iter().map(|s| s.mean).collect();
                    self.best_set = top_m(&means, self.m);
                }
                match prev {
                    Some(a) if !self.collided_prev => {
                        self.fixed = true;
                        a
                    }
                    _ => uniform_from(rng, &self.best_set),
                }
            }
        };
        self.prev = Some(arm);
        arm
    }

    pub fn observe(&mut self, arm: usize, fb: &Feedback) {
        if self.t <= self.t0 && !fb.collided {
            self.stats[arm].record(fb.reward);
        }
        self.collided_prev = fb.collided;
    }

    pub fn phase(&self) -> McPhase {
        if self.fixed {
            McPhase::Fixed
        } else if self.t <= self.t0 {
            McPhase::Exploring
        } else {
            McPhase::Settling
        }
    }

    pub fn exploration_length(&self) -> u64 {
        self.t0
    }

    /// Top-M arms frozen at the end of exploration (empty before that).
    pub fn best_set(&self) -> &[usize] {
        &self.best_set
    }

    pub fn fixed_arm(&self) -> Option<usize> {
        self.fixed.then_some(self.prev).flatten()
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::testutil::{chi_square_999, chi_square_uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exploration_length_oracle() {
        assert_eq!(mc_exploration_length(1, 1.0, 0.5).unwrap(), 104);
        assert_eq!(mc_exploration_length(3, 0.1, 0.05).unwrap(), 31_581);
        assert!(mc_exploration_length(4, 0.1, 0.05).unwrap() > mc_exploration_length(2, 0.1, 0.05).unwrap());
    }

    #[test]
    fn exploration_length_rejects_bad_params() {
        assert!(mc_exploration_length(0, 0.1, 0.05).is_err());
        assert!(mc_exploration_length(2, 0.0, 0.05).is_err());
        assert!(mc_exploration_length(2, 0.1, 1.0).is_err());
        assert!(mc_exploration_length(2, 0.1, -0.1).is_err());
    }

    #[test]
    fn explores_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut p = MusicalChairs::new(5, 2, 20_000);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            let a = p.select(&mut rng);
            counts[a] += 1;
            p.observe(a, &Feedback { reward: 0.5, ..Default::default() });
        }
        assert_eq!(p.phase(), McPhase::Exploring);
        assert!(chi_square_uniform(&counts) < chi_square_999(4), "{counts:?}");
    }

    #[test]
    fn fixes_after_clean_step_past_t0() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut p = MusicalChairs::new(4, 2, 10);
        for _ in 0..10 {
            let a = p.select(&mut rng);
            p.observe(a, &Feedback { reward: a as f64 / 4.0, ..Default::default() });
        }
        let last = p.prev.unwrap();
        let a = p.select(&mut rng);
        assert_eq!(a, last);
        assert_eq!(p.phase(), McPhase::Fixed);
        for _ in 0..50 {
            let b = p.select(&mut rng);
            assert_eq!(b, last);
            // even collisions cannot dislodge a fixed player
            p.observe(b, &Feedback { reward: 0.0, collided: true, interfered: false });
        }
    }

    #[test]
    fn collision_after_t0_draws_from_best_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut p = MusicalChairs::new(4, 2, 8);
        // two pulls of each arm, best arms are 2 and 3
        for a in [0, 1, 2, 3, 0, 1, 2, 3] {
            p.t += 1;
            p.prev = Some(a);
            p.observe(a, &Feedback { reward: 0.2 * a as f64, ..Default::default() });
        }
        p.observe(3, &Feedback { reward: 0.0, collided: true, interfered: false });
        for _ in 0..20 {
            let a = p.select(&mut rng);
            assert!([2, 3].contains(&a));
            p.observe(a, &Feedback { reward: 0.0, collided: true, interfered: false });
        }
        assert_eq!(p.best_set(), &[2, 3]);
        assert_eq!(p.phase(), McPhase::Settling);
    }
}
