//! Radar/band bipartite formalism.
//!
//! A network of `M` radars picks from `N > M` non-overlapping center
//! frequencies. Any function radar -> band is a [`Mapping`]; an injective one
//! is a [`Matching`]. Utilities are sums of per-edge mean rewards, and the
//! optimal configuration is the matching of maximum utility.

mod assignment;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use assignment::max_weight_assignment;

/// Largest band count the brute-force enumerator accepts.
pub const BRUTE_FORCE_MAX: usize = 8;

/// Relative tolerance used when refining ties on the polynomial route.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },
    #[error("reward entry ({row}, {col}) = {value} is outside [0, 1]")]
    RewardRange { row: usize, col: usize, value: f64 },
    #[error("non-finite SINR entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("band {band} out of range for {bands} bands")]
    BandRange { band: usize, bands: usize },
    #[error("need 1 <= M <= N (got M = {radars}, N = {bands})")]
    Shape { radars: usize, bands: usize },
    #[error("brute-force enumeration limited to N <= {BRUTE_FORCE_MAX} (got N = {0})")]
    TooLarge(usize),
    #[error("mapping is not a matching: radars {0:?} collide")]
    NotMatching(Vec<usize>),
}

/// Index of a radar node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadarId(pub usize);

/// Index of a center frequency (band).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BandId(pub usize);

impl fmt::Display for RadarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

fn check_shape(radars: usize, bands: usize) -> Result<(), ModelError> {
    if radars == 0 || radars > bands {
        return Err(ModelError::Shape { radars, bands });
    }
    Ok(())
}

/// Dense row-major `rows x cols` array of `f64`.
#[derive(Debug, Clone, PartialEq)]
struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(ModelError::Dimension {
                expected: format!("{cols} columns"),
                got: format!("{} columns", bad.len()),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// Mean reward `mu[i][j]` of radar `i` on band `j`, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix(Grid);

impl RewardMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let grid = Grid::from_rows(rows)?;
        for i in 0..grid.rows {
            for j in 0..grid.cols {
                let value = grid.get(i, j);
                if !(0.0..=1.0).contains(&value) {
                    return Err(ModelError::RewardRange { row: i, col: j, value });
                }
            }
        }
        Ok(Self(grid))
    }

    /// Every radar sees the same per-band means.
    pub fn radar_independent(radars: usize, band_means: &[f64]) -> Result<Self, ModelError> {
        Self::new(&vec![band_means.to_vec(); radars])
    }

    pub fn radars(&self) -> usize {
        self.0.rows
    }

    pub fn bands(&self) -> usize {
        self.0.cols
    }

    pub fn get(&self, radar: RadarId, band: BandId) -> f64 {
        self.0.get(radar.0, band.0)
    }

    pub fn row(&self, radar: RadarId) -> &[f64] {
        self.0.row(radar.0)
    }
}

/// Per-edge SINR in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrMatrix(Grid);

impl SinrMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let grid = Grid::from_rows(rows)?;
        for i in 0..grid.rows {
            for j in 0..grid.cols {
                if !grid.get(i, j).is_finite() {
                    return Err(ModelError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(grid))
    }

    pub fn radars(&self) -> usize {
        self.0.rows
    }

    pub fn bands(&self) -> usize {
        self.0.cols
    }

    pub fn get(&self, radar: RadarId, band: BandId) -> f64 {
        self.0.get(radar.0, band.0)
    }

    /// Affine reward image `alpha * (sinr + beta)`; `None` if any entry
    /// leaves `[0, 1]`.
    pub fn to_rewards(&self, alpha: f64, beta: f64) -> Option<RewardMatrix> {
        let rows: Vec<Vec<f64>> = (0..self.radars())
            .map(|i| self.0.row(i).iter().map(|s| alpha * (s + beta)).collect())
            .collect();
        RewardMatrix::new(&rows).ok()
    }
}

/// Radar -> band assignment at one PRI. Bands may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    pub assignment: Vec<BandId>,
    pub timestamp: u64,
}

impl Mapping {
    pub fn new(assignment: Vec<BandId>) -> Self {
        Self { assignment, timestamp: 0 }
    }

    pub fn from_indices(bands: &[usize]) -> Self {
        Self::new(bands.iter().copied().map(BandId).collect())
    }

    pub fn at(mut self, timestamp: u64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn radars(&self) -> usize {
        self.assignment.len()
    }

    pub fn band_of(&self, radar: RadarId) -> BandId {
        self.assignment[radar.0]
    }

    pub fn validate(&self, bands: usize) -> Result<(), ModelError> {
        match self.assignment.iter().find(|b| b.0 >= bands) {
            Some(b) => Err(ModelError::BandRange { band: b.0, bands }),
            None => Ok(()),
        }
    }

    pub fn is_matching(&self) -> bool {
        collision_set(self).is_empty()
    }
}

/// Injective mapping: no two radars share a band.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching(Mapping);

impl Matching {
    pub fn new(mapping: Mapping) -> Result<Self, ModelError> {
        let colliding = collision_set(&mapping);
        if colliding.is_empty() {
            Ok(Self(mapping))
        } else {
            Err(ModelError::NotMatching(colliding.into_iter().map(|r| r.0).collect()))
        }
    }

    pub fn from_indices(bands: &[usize]) -> Result<Self, ModelError> {
        Self::new(Mapping::from_indices(bands))
    }

    pub fn as_mapping(&self) -> &Mapping {
        &self.0
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.assignment.iter().map(|b| b.0).collect()
    }
}

impl TryFrom<Mapping> for Matching {
    type Error = ModelError;

    fn try_from(mapping: Mapping) -> Result<Self, Self::Error> {
        Matching::new(mapping)
    }
}

impl AsRef<Mapping> for Matching {
    fn as_ref(&self) -> &Mapping {
        &self.0
    }
}

/// Radars whose band is shared with at least one other radar.
pub fn collision_set(mapping: &Mapping) -> BTreeSet<RadarId> {
    let mut counts = std::collections::HashMap::<BandId, usize>::new();
    for &band in &mapping.assignment {
        *counts.entry(band).or_default() += 1;
    }
    mapping
        .assignment
        .iter()
        .enumerate()
        .filter(|(_, band)| counts[band] >= 2)
        .map(|(i, _)| RadarId(i))
        .collect()
}

/// Sum of raw means along the mapping's edges. Collision zeroing is the
/// environment's business.
pub fn utility(mapping: &Mapping, rewards: &RewardMatrix) -> Result<f64, ModelError> {
    if mapping.radars() != rewards.radars() {
        return Err(ModelError::Dimension {
            expected: format!("{} radars", rewards.radars()),
            got: format!("{} radars", mapping.radars()),
        });
    }
    mapping.validate(rewards.bands())?;
    Ok(mapping
        .assignment
        .iter()
        .enumerate()
        .map(|(i, b)| rewards.get(RadarId(i), *b))
        .sum())
}

/// Sum of per-node SINR along a matching.
pub fn network_sinr(matching: &Mapping, sinr: &SinrMatrix) -> Result<f64, ModelError> {
    let matching = Matching::new(matching.clone())?;
    let assignment = &matching.as_mapping().assignment;
    if assignment.len() != sinr.radars() {
        return Err(ModelError::Dimension {
            expected: format!("{} radars", sinr.radars()),
            got: format!("{} radars", assignment.len()),
        });
    }
    matching.as_mapping().validate(sinr.bands())?;
    Ok(assignment.iter().enumerate().map(|(i, b)| sinr.get(RadarId(i), *b)).sum())
}

/// Lexicographic iterator over all injective assignments of `radars` into
/// `bands`.
#[derive(Debug, Clone)]
pub struct Matchings {
    bands: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Matchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        let current = self.current.take()?;
        let out = Matching(Mapping::from_indices(&current));
        self.current = next_injection(current, self.bands);
        Some(out)
    }
}

fn next_injection(mut current: Vec<usize>, bands: usize) -> Option<Vec<usize>> {
    let m = current.len();
    let mut pos = m;
    while pos > 0 {
        pos -= 1;
        let used: Vec<bool> = {
            let mut used = vec![false; bands];
            for &b in &current[..pos] {
                used[b] = true;
            }
            used
        };
        if let Some(next) = (current[pos] + 1..bands).find(|&b| !used[b]) {
            current[pos] = next;
            // refill the tail with the smallest unused bands
            let mut used = used;
            used[next] = true;
            for slot in current.iter_mut().skip(pos + 1) {
                let b = (0..bands).find(|&b| !used[b])?;
                used[b] = true;
                *slot = b;
            }
            return Some(current);
        }
    }
    None
}

/// Every matching of `radars <= bands` radars to `bands` bands, each exactly once, in
/// lexicographic order.
pub fn enumerate_matchings(radars: usize, bands: usize) -> Result<Matchings, ModelError> {
    check_shape(radars, bands)?;
    if bands > BRUTE_FORCE_MAX {
        return Err(ModelError::TooLarge(bands));
    }
    Ok(Matchings {
        bands,
        current: Some((0..radars).collect()),
    })
}

/// Exhaustive optimum; ties go to the lexicographically smallest matching.
pub fn brute_force_optimum(rewards: &RewardMatrix) -> Result<(Matching, f64), ModelError> {
    let mut best: Option<(Matching, f64)> = None;
    for m in enumerate_matchings(rewards.radars(), rewards.bands())? {
        let u = utility(m.as_mapping(), rewards)?;
        if best.as_ref().is_none_or(|(_, b)| u > *b) {
            best = Some((m, u));
        }
    }
    Ok(best.expect("at least one matching exists when M < N"))
}

/// Optimum through the polynomial assignment solver, padded square with
/// zero-weight dummy radars. Ties are refined toward the lexicographically
/// smallest matching by pinning radars one at a time.
pub fn assignment_optimum(rewards: &RewardMatrix) -> Result<(Matching, f64), ModelError> {
    let (m, n) = (rewards.radars(), rewards.bands());
    check_shape(m, n)?;
    let weights: Vec<Vec<f64>> = (0..m).map(|i| rewards.row(RadarId(i)).to_vec()).collect();
    let best = max_weight_assignment(&weights, &[]);
    let target = edge_sum(&weights, &best);
    let tol = TIE_TOL * target.abs().max(1.0);

    let mut pinned: Vec<usize> = Vec::with_capacity(m);
    for &fallback in best.iter().take(m) {
        let choice = (0..n)
            .filter(|b| !pinned.contains(b))
            .find(|&b| {
                let mut trial = pinned.clone();
                trial.push(b);
                let a = max_weight_assignment(&weights, &trial);
                edge_sum(&weights, &a) >= target - tol
            })
            .unwrap_or(fallback);
        pinned.push(choice);
    }
    let matching = Matching::from_indices(&pinned)?;
    let u = utility(matching.as_mapping(), rewards)?;
    Ok((matching, u))
}

fn edge_sum(weights: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &j)| weights[i][j]).sum()
}

/// Maximum-utility matching `(pi*, U*)`: brute force for small instances,
/// the assignment solver beyond [`BRUTE_FORCE_MAX`] bands.
pub fn optimal_matching(rewards: &RewardMatrix) -> Result<(Matching, f64), ModelError> {
    check_shape(rewards.radars(), rewards.bands())?;
    if rewards.bands() <= BRUTE_FORCE_MAX {
        brute_force_optimum(rewards)
    } else {
        assignment_optimum(rewards)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> BTreeSet<RadarId> {
        v.iter().copied().map(RadarId).collect()
    }

    // independent multiplicity count
    fn colliders_by_count(bands: &[usize]) -> BTreeSet<RadarId> {
        let mut out = BTreeSet::new();
        for (i, b) in bands.iter().enumerate() {
            if bands.iter().filter(|x| *x == b).count() >= 2 {
                out.insert(RadarId(i));
            }
        }
        out
    }

    #[test]
    fn collision_set_examples() {
        for bands in [vec![0, 1, 2], vec![0, 0, 1], vec![2, 2, 2]] {
            assert_eq!(collision_set(&Mapping::from_indices(&bands)), colliders_by_count(&bands));
        }
        assert!(collision_set(&Mapping::from_indices(&[0, 1, 2])).is_empty());
        assert_eq!(collision_set(&Mapping::from_indices(&[0, 0, 1])), ids(&[0, 1]));
        assert_eq!(collision_set(&Mapping::from_indices(&[2, 2, 2])), ids(&[0, 1, 2]));
    }

    #[test]
    fn utility_examples() {
        let mu = RewardMatrix::new(&[vec![0.9, 0.1], vec![0.8, 0.2]]).unwrap();
        let u01 = utility(&Mapping::from_indices(&[0, 1]), &mu).unwrap();
        let u10 = utility(&Mapping::from_indices(&[1, 0]), &mu).unwrap();
        assert!((u01 - (0.9 + 0.2)).abs() < 1e-15);
        assert!((u10 - (0.1 + 0.8)).abs() < 1e-15);

        let zero = RewardMatrix::new(&vec![vec![0.0; 3]; 2]).unwrap();
        assert_eq!(utility(&Mapping::from_indices(&[2, 2]), &zero).unwrap(), 0.0);
    }

    #[test]
    fn utility_rejects_dimension_mismatch() {
        let mu = RewardMatrix::new(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            utility(&Mapping::from_indices(&[0]), &mu),
            Err(ModelError::Dimension { .. })
        ));
        assert!(matches!(
            utility(&Mapping::from_indices(&[0, 5]), &mu),
            Err(ModelError::BandRange { .. })
        ));
    }

    #[test]
    fn reward_matrix_rejects_out_of_range() {
        assert!(RewardMatrix::new(&[vec![0.5, 1.2]]).is_err());
        assert!(RewardMatrix::new(&[vec![0.5, 0.2], vec![0.1]]).is_err());
    }

    #[test]
    fn matching_counts() {
        assert_eq!(enumerate_matchings(1, 2).unwrap().count(), 2);
        assert_eq!(enumerate_matchings(3, 4).unwrap().count(), 24);
        assert_eq!(enumerate_matchings(3, 6).unwrap().count(), 120);
        assert_eq!(enumerate_matchings(4, 8).unwrap().count(), 1680);
    }

    #[test]
    fn enumeration_guards() {
        assert_eq!(enumerate_matchings(2, 2).unwrap().count(), 2);
        assert!(matches!(enumerate_matchings(3, 2), Err(ModelError::Shape { .. })));
        assert!(matches!(enumerate_matchings(2, 9), Err(ModelError::TooLarge(9))));
        assert!(enumerate_matchings(0, 3).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_unique() {
        let all: Vec<Vec<usize>> = enumerate_matchings(2, 4).unwrap().map(|m| m.indices()).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all, sorted);
        assert_eq!(all.first().unwrap(), &vec![0, 1]);
        assert_eq!(all.last().unwrap(), &vec![3, 2]);
    }

    #[test]
    fn optimal_on_two_by_two_example() {
        let mu = RewardMatrix::new(&[vec![0.9, 0.1], vec![0.8, 0.2]]).unwrap();
        let all: Vec<f64> = enumerate_matchings(2, 2)
            .unwrap()
            .map(|m| utility(m.as_mapping(), &mu).unwrap())
            .collect();
        let (m, u) = optimal_matching(&mu).unwrap();
        assert_eq!(m.indices(), vec![0, 1]);
        assert_eq!(u, all.iter().copied().fold(f64::MIN, f64::max));
        assert!((u - 1.1).abs() < 1e-15);
        let (m2, u2) = assignment_optimum(&mu).unwrap();
        assert_eq!(m2.indices(), vec![0, 1]);
        assert_eq!(u, u2);

        // same matrix with a spare zero band
        let mu = RewardMatrix::new(&[vec![0.9, 0.1, 0.0], vec![0.8, 0.2, 0.0]]).unwrap();
        assert_eq!(optimal_matching(&mu).unwrap().0.indices(), vec![0, 1]);
    }

    #[test]
    fn identity_like_means() {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mu = RewardMatrix::new(&rows).unwrap();
        let (m, u) = optimal_matching(&mu).unwrap();
        assert_eq!(m.indices(), vec![0, 1, 2]);
        assert_eq!(u, 3.0);
        assert_eq!(assignment_optimum(&mu).unwrap().0.indices(), vec![0, 1, 2]);
    }

    #[test]
    fn all_equal_means_tie_breaks_lexicographically() {
        let mu = RewardMatrix::radar_independent(3, &[0.25; 5]).unwrap();
        let (m, u) = optimal_matching(&mu).unwrap();
        assert_eq!(u, 0.75);
        assert_eq!(m.indices(), vec![0, 1, 2]);
        let (m2, u2) = assignment_optimum(&mu).unwrap();
        assert_eq!(m2.indices(), vec![0, 1, 2]);
        assert_eq!(u2, 0.75);
    }

    #[test]
    fn large_instance_uses_assignment_route() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..10).map(|j| ((i * 7 + j * 3) % 11) as f64 / 10.0).collect())
            .collect();
        let mu = RewardMatrix::new(&rows).unwrap();
        let (m, u) = optimal_matching(&mu).unwrap();
        assert!(m.as_mapping().is_matching());
        assert!(u >= 4.0);
    }

    #[test]
    fn network_sinr_examples() {
        let s = SinrMatrix::new(&[vec![12.0, 3.0]]).unwrap();
        assert_eq!(network_sinr(&Mapping::from_indices(&[0]), &s).unwrap(), 12.0);
        let s = SinrMatrix::new(&[vec![10.0, 1.0, 2.0], vec![0.0, 14.0, 2.0]]).unwrap();
        assert_eq!(network_sinr(&Mapping::from_indices(&[0, 1]), &s).unwrap(), 24.0);
        let z = SinrMatrix::new(&vec![vec![0.0; 3]; 2]).unwrap();
        assert_eq!(network_sinr(&Mapping::from_indices(&[2, 0]), &z).unwrap(), 0.0);
        assert!(matches!(
            network_sinr(&Mapping::from_indices(&[1, 1]), &s),
            Err(ModelError::NotMatching(_))
        ));
    }

    #[test]
    fn matching_rejects_collisions() {
        assert!(Matching::from_indices(&[0, 0]).is_err());
        assert!(Matching::try_from(Mapping::from_indices(&[1, 0])).is_ok());
    }
}
