//! Regret accounting and curve statistics.

use thiserror::Error;

use crate::model::{collision_set, optimal_matching, BandId, Mapping, ModelError, RadarId, RewardMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("t must be in 1..={0}")]
    Time(usize),
    #[error("curves have different lengths")]
    Ragged,
    #[error("no curves")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `t mu* - sum of the chosen actions' true means`.
pub fn single_regret(chosen_means: &[f64], mu_star: f64) -> f64 {
    // per-step gaps keep optimal play at exactly zero
    chosen_means.iter().map(|m| mu_star - m).sum()
}

/// Per-PRI expected utility against the optimum `U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    u_star: f64,
    achieved: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretLedger {
    pub fn new(u_star: f64) -> Self {
        Self { u_star, achieved: Vec::new(), cumulative: Vec::new() }
    }

    pub fn with_capacity(u_star: f64, n: usize) -> Self {
        Self { u_star, achieved: Vec::with_capacity(n), cumulative: Vec::with_capacity(n) }
    }

    /// Append one PRI's expected network utility.
    pub fn push(&mut self, achieved: f64) {
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.achieved.push(achieved);
        self.cumulative.push(prev + self.u_star - achieved);
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn achieved(&self) -> &[f64] {
        &self.achieved
    }

    /// `R_t` for `t = 1..=len`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `R_t / t` for every `t`.
    pub fn average_curve(&self) -> Vec<f64> {
        self.cumulative.iter().enumerate().map(|(i, r)| r / (i + 1) as f64).collect()
    }
}

/// `R_t / t`.
pub fn average_cumulative_regret(ledger: &RegretLedger, t: usize) -> Result<f64, MetricsError> {
    if t == 0 || t > ledger.len() {
        return Err(MetricsError::Time(ledger.len()));
    }
    Ok(ledger.cumulative[t - 1] / t as f64)
}

/// Expected utility of a band mapping, collided radars scoring zero.
pub fn expected_utility(mapping: &Mapping, rewards: &RewardMatrix) -> Result<f64, MetricsError> {
    mapping.validate(rewards.bands())?;
    let collided = collision_set(mapping);
    Ok((0..mapping.radars())
        .map(RadarId)
        .filter(|r| !collided.contains(r))
        .map(|r| rewards.get(r, mapping.band_of(r)))
        .sum())
}

/// Regret of a band-level history against the optimal matching of `rewards`.
pub fn network_regret(history: &[Mapping], rewards: &RewardMatrix) -> Result<RegretLedger, MetricsError> {
    let (_, u_star) = optimal_matching(rewards)?;
    let mut ledger = RegretLedger::with_capacity(u_star, history.len());
    for m in history {
        ledger.push(expected_utility(m, rewards)?);
    }
    Ok(ledger)
}

/// Each radar's reward under the optimal matching.
pub fn per_node_mu_star(rewards: &RewardMatrix) -> Result<Vec<f64>, MetricsError> {
    let (m, _) = optimal_matching(rewards)?;
    Ok(m.indices().iter().enumerate().map(|(r, &b)| rewards.get(RadarId(r), BandId(b))).collect())
}

/// Pointwise mean and standard error across equally long curves.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn mean_and_stderr<C: AsRef<[f64]>>(curves: &[C]) -> Result<CurveStats, MetricsError> {
    let first = curves.first().ok_or(MetricsError::Empty)?.as_ref();
    let len = first.len();
    if curves.iter().any(|c| c.as_ref().len() != len) {
        return Err(MetricsError::Ragged);
    }
    let n = curves.len() as f64;
    let mut mean = vec![0.0; len];
    for c in curves {
        for (m, x) in mean.iter_mut().zip(c.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let stderr = if curves.len() < 2 {
        vec![0.0; len]
    } else {
        (0..len)
            .map(|i| {
                let ss: f64 = curves.iter().map(|c| (c.as_ref()[i] - mean[i]).powi(2)).sum();
                (ss / (n - 1.0)).sqrt() / n.sqrt()
            })
            .collect()
    };
    Ok(CurveStats { mean, stderr })
}

/// Least-squares line through `(i + 1, y[i])`: `(slope, intercept, r^2)`.
pub fn linear_fit(y: &[f64]) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let xm = (n + 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let dx = (i + 1) as f64 - xm;
        let dy = v - ym;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, ym - slope * xm, r2)
}

/// Root mean square of `errors`.
pub fn rmse(errors: &[f64]) -> f64 {
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_regret_examples() {
        assert_eq!(single_regret(&[0.9; 7], 0.9), 0.0);
        assert!((single_regret(&[0.4; 10], 0.9) - 5.0).abs() < 1e-12);
        assert_eq!(single_regret(&[], 0.9), 0.0);
    }

    fn two_by_three() -> RewardMatrix {
        RewardMatrix::new(&[vec![0.9, 0.5, 0.1], vec![0.8, 0.6, 0.3]]).unwrap()
    }

    #[test]
    fn optimal_history_has_no_regret() {
        let r = two_by_three();
        // 0.9 + 0.6 beats 0.5 + 0.8
        let h = vec![Mapping::from_indices(&[0, 1]); 5];
        let l = network_regret(&h, &r).unwrap();
        assert_eq!(l.cumulative().last().copied(), Some(0.0));
    }

    #[test]
    fn full_collision_history_loses_everything() {
        let r = two_by_three();
        let h = vec![Mapping::from_indices(&[2, 2]); 4];
        let l = network_regret(&h, &r).unwrap();
        assert!((l.cumulative()[3] - 4.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn scripted_trace() {
        let r = two_by_three();
        let h = [Mapping::from_indices(&[1, 0]), Mapping::from_indices(&[0, 0]), Mapping::from_indices(&[0, 2])];
        let l = network_regret(&h, &r).unwrap();
        // per-step regret 1.5-1.3, 1.5-0, 1.5-1.2
        let want = [0.2, 1.7, 2.0];
        for (a, b) in l.cumulative().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((average_cumulative_regret(&l, 1).unwrap() - 0.2).abs() < 1e-12);
        assert!((average_cumulative_regret(&l, 3).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(average_cumulative_regret(&l, 0), Err(MetricsError::Time(3)));
    }

    #[test]
    fn constant_regret_gives_flat_average() {
        let mut l = RegretLedger::new(1.0);
        for _ in 0..100 {
            l.push(0.75);
        }
        assert!(l.average_curve().iter().all(|&x| (x - 0.25).abs() < 1e-12));
        let (slope, intercept, r2) = linear_fit(l.cumulative());
        assert!((slope - 0.25).abs() < 1e-12 && intercept.abs() < 1e-9 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mu_star_per_node() {
        assert_eq!(per_node_mu_star(&two_by_three()).unwrap(), vec![0.9, 0.6]);
    }

    #[test]
    fn curve_aggregation() {
        let s = mean_and_stderr(&[vec![1.0, 2.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(s.mean, vec![2.0, 2.0]);
        assert!((s.stderr[0] - 1.0).abs() < 1e-12 && s.stderr[1] == 0.0);
        let one = mean_and_stderr(&[vec![4.0, 5.0]]).unwrap();
        assert_eq!(one.mean, vec![4.0, 5.0]);
        assert_eq!(mean_and_stderr(&[vec![1.0], vec![1.0, 2.0]]), Err(MetricsError::Ragged));
    }

    #[test]
    fn rmse_basic() {
        assert!((rmse(&[3.0, 4.0]) - (12.5f64).sqrt()).abs() < 1e-12);
    }
}
