//! MCTopM: musical chairs restricted to the top-M arms by UCB, re-evaluated
//! every step.

use rand::Rng;

use super::{top_m, uniform_from, ArmStats, Feedback};

/// `mu + sqrt(ln t / (2 pulls))`; unpulled arms score `+inf`.
pub fn ucb_index(stats: &ArmStats, t: u64) -> f64 {
    if stats.pulls == 0 {
        return f64::INFINITY;
    }
    let t = t.max(1) as f64;
    stats.mean + (t.ln() / (2.0 * stats.pulls as f64)).sqrt()
}

#[derive(Debug, Clone)]
pub struct MCTopM {
    stats: Vec<ArmStats>,
    m: usize,
    t: u64,
    prev: Option<usize>,
    prev_ucb: Vec<f64>,
    best_set: Vec<usize>,
    collided_prev: bool,
    fixed: bool,
}

impl MCTopM {
    pub fn new(arms: usize, m: usize) -> Self {
        assert!(arms > 0, "empty action set");
        Self {
            stats: vec![ArmStats::default(); arms],
            m: m.clamp(1, arms),
            t: 0,
            prev: None,
            prev_ucb: vec![f64::INFINITY; arms],
            best_set: Vec::new(),
            collided_prev: false,
            fixed: false,
        }
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        self.t += 1;
        let ucb: Vec<f64> = self.stats.iter().map(|s| ucb_index(s, self.t)).collect();
        self.best_set = top_m(&ucb, self.m);

        let arm = match self.prev {
            None => uniform_from(rng, &self.best_set),
            Some(a) if !self.best_set.contains(&a) => {
                let bar = self.prev_ucb[a];
                let lower: Vec<usize> = self.best_set.iter().copied().filter(|&k| self.prev_ucb[k] <= bar).collect();
                self.fixed = false;
                if lower.is_empty() {
                    uniform_from(rng, &self.best_set)
                } else {
                    uniform_from(rng, &lower)
                }
            }
            Some(_) if self.collided_prev && !self.fixed => uniform_from(rng, &self.best_set),
            Some(a) => {
                self.fixed = true;
                a
            }
        };
        self.prev_ucb = ucb;
        self.prev = Some(arm);
        arm
    }

    pub fn observe(&mut self, arm: usize, fb: &Feedback) {
        if !fb.collided {
            self.stats[arm].record(fb.reward);
        }
        self.collided_prev = fb.collided;
    }

    pub fn is_fixed(&self) -> bool {
        self.fixed
    }

    pub fn chair(&self) -> Option<usize> {
        self.fixed.then_some(self.prev).flatten()
    }

    pub fn best_set(&self) -> &[usize] {
        &self.best_set
    }

    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }
}
