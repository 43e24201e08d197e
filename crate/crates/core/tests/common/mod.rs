#![allow(dead_code)]

use crn_core::model::{brute_force_optimum, enumerate_matchings, network_sinr, utility};
use crn_core::{RewardMatrix, SinrMatrix};
use rand::Rng;

/// Reward map with power-of-two constants: integer SINR in `[-8, 24]`
/// lands in `[0, 1]` and every sum below is exact in binary floating point.
pub const ALPHA: f64 = 1.0 / 32.0;
pub const BETA: f64 = 8.0;

/// Random instance with `m` radars, `n` bands and integer SINR entries.
pub fn dyadic_instance<R: Rng>(rng: &mut R, m: usize, n: usize) -> (SinrMatrix, RewardMatrix) {
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-8i32..=24) as f64).collect()).collect();
    let sinr = SinrMatrix::new(&rows).unwrap();
    let rewards = sinr.to_rewards(ALPHA, BETA).expect("range chosen to stay inside [0, 1]");
    (sinr, rewards)
}

/// Index sets (lexicographic order) of the matchings attaining the maximum
/// of `score`.
pub fn argmax_set(m: usize, n: usize, score: impl Fn(&crn_core::Mapping) -> f64) -> (Vec<Vec<usize>>, f64) {
    let mut best = f64::NEG_INFINITY;
    let mut set = Vec::new();
    for mt in enumerate_matchings(m, n).unwrap() {
        let s = score(mt.as_mapping());
        if s > best {
            best = s;
            set.clear();
        }
        if s == best {
            set.push(mt.indices());
        }
    }
    (set, best)
}

pub fn utility_argmax(r: &RewardMatrix) -> Vec<Vec<usize>> {
    argmax_set(r.radars(), r.bands(), |mp| utility(mp, r).unwrap()).0
}

pub fn sinr_argmax(s: &SinrMatrix) -> Vec<Vec<usize>> {
    argmax_set(s.radars(), s.bands(), |mp| network_sinr(mp, s).unwrap()).0
}

pub fn brute_u_star(r: &RewardMatrix) -> f64 {
    brute_force_optimum(r).unwrap().1
}
