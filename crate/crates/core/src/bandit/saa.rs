//! Sense and avoid: keep the previous arm until something is sensed on it.

use rand::Rng;

use super::Feedback;

/// Result of one sense-and-avoid step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaaChoice {
    pub action: usize,
    /// A switch was required but the action set had no alternative.
    pub stuck: bool,
}

/// Repeat `prev` unless it was hit, otherwise draw uniformly from the other
/// `n_actions - 1` arms. With no previous arm the draw covers every arm.
pub fn saa_step<R: Rng + ?Sized>(prev: Option<usize>, hit: bool, n_actions: usize, rng: &mut R) -> SaaChoice {
    assert!(n_actions > 0, "empty action set");
    match prev {
        None => SaaChoice { action: rng.random_range(0..n_actions), stuck: false },
        Some(a) if !hit => SaaChoice { action: a, stuck: false },
        Some(a) if n_actions == 1 => SaaChoice { action: a, stuck: true },
        Some(a) => {
            // uniform over {0..n} \ {a}
            let draw = rng.random_range(0..n_actions - 1);
            SaaChoice { action: if draw >= a { draw + 1 } else { draw }, stuck: false }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SaaPolicy {
    arms: usize,
    prev: Option<usize>,
    triggered: bool,
    /// Treat primary-user overlap as a hit (waveform-level use).
    sense_interference: bool,
    trials: u64,
}

impl SaaPolicy {
    pub fn new(arms: usize, sense_interference: bool) -> Self {
        assert!(arms > 0, "empty action set");
        Self { arms, prev: None, triggered: false, sense_interference, trials: 0 }
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let choice = saa_step(self.prev, self.triggered, self.arms, rng);
        self.prev = Some(choice.action);
        choice.action
    }

    pub fn observe(&mut self, arm: usize, fb: &Feedback) {
        debug_assert_eq!(Some(arm), self.prev);
        self.triggered = fb.collided || (self.sense_interference && fb.interfered);
        self.trials += 1;
    }

    pub fn prev(&self) -> Option<usize> {
        self.prev
    }

    pub fn triggered(&self) -> bool {
        self.triggered
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::testutil::{chi_square_999, chi_square_uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_hit_repeats() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(saa_step(Some(2), false, 5, &mut rng).action, 2);
        }
    }

    #[test]
    fn hit_draws_uniformly_from_the_others() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[saa_step(Some(2), true, 5, &mut rng).action] += 1;
        }
        assert_eq!(counts[2], 0);
        let others = [counts[0], counts[1], counts[3], counts[4]];
        assert!(chi_square_uniform(&others) < chi_square_999(3), "{others:?}");
    }

    #[test]
    fn first_step_covers_all_arms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[saa_step(None, false, 5, &mut rng).action] += 1;
        }
        assert!(chi_square_uniform(&counts) < chi_square_999(4), "{counts:?}");
    }

    #[test]
    fn singleton_with_hit_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(saa_step(Some(0), true, 1, &mut rng), SaaChoice { action: 0, stuck: true });
    }

    #[test]
    fn policy_reacts_to_interference_only_when_sensing_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fb = Feedback { reward: 0.5, collided: false, interfered: true };
        let mut band = SaaPolicy::new(4, false);
        let a = band.select(&mut rng);
        band.observe(a, &fb);
        assert_eq!(band.select(&mut rng), a);

        let mut wf = SaaPolicy::new(4, true);
        let a = wf.select(&mut rng);
        wf.observe(a, &fb);
        assert_ne!(wf.select(&mut rng), a);
    }
}
