//! Ground-truth reward engine.
//!
//! Each band has a base SINR and optionally one narrow-band primary user
//! occupying a single sub-band. A waveform that overlaps the primary user
//! loses the user's INR; narrower waveforms pay a bandwidth penalty. Nodes
//! that share a band collide and earn nothing that PRI.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bandit::ActionPair;
use crate::model::{ModelError, RewardMatrix};
use crate::waveform::{build_library, WaveformError, WaveformSpec};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{name} has {got} entries, expected 1 or {want}")]
    Length { name: &'static str, got: usize, want: usize },
    #[error("primary-user sub-band {0} outside 1..={1}")]
    PuSubband(usize, usize),
    #[error("invalid reward parameter {name} = {value}")]
    Param { name: &'static str, value: f64 },
    #[error("need at least one band")]
    NoBands,
}

/// One band's interference profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandProfile {
    pub base_sinr_db: f64,
    pub inr_db: f64,
    /// 1-based primary-user sub-band, `None` for a clean band.
    pub pu_subband: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub alpha: f64,
    pub beta_db: f64,
    pub sinr_stddev_db: f64,
    pub bw_penalty_db: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { alpha: 1.0 / 25.0, beta_db: 5.0, sinr_stddev_db: 2.0, bw_penalty_db: 4.0 }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), EnvError> {
        let checks = [
            ("alpha", self.alpha, self.alpha > 0.0),
            ("beta_db", self.beta_db, true),
            ("sinr_stddev_db", self.sinr_stddev_db, self.sinr_stddev_db >= 0.0),
            ("bw_penalty_db", self.bw_penalty_db, self.bw_penalty_db >= 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(EnvError::Param { name, value });
            }
        }
        Ok(())
    }

    /// `clamp(alpha (sinr + beta), 0, 1)`.
    pub fn reward_of(&self, sinr_db: f64) -> f64 {
        (self.alpha * (sinr_db + self.beta_db)).clamp(0.0, 1.0)
    }
}

pub fn overlaps_pu(band: &BandProfile, wf: &WaveformSpec) -> bool {
    band.pu_subband.is_some_and(|p| wf.occupied.contains(p))
}

pub fn mean_sinr(band: &BandProfile, wf: &WaveformSpec, params: &RewardParams) -> f64 {
    let overlap = if overlaps_pu(band, wf) { band.inr_db } else { 0.0 };
    band.base_sinr_db - overlap - params.bw_penalty_db * (1.0 - wf.bandwidth_fraction())
}

pub fn mean_reward(band: &BandProfile, wf: &WaveformSpec, params: &RewardParams) -> f64 {
    params.reward_of(mean_sinr(band, wf, params))
}

/// Per-node result of one PRI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub collided: bool,
    /// The chosen waveform overlapped the band's primary user.
    pub pu_overlap: bool,
    /// Sampled SINR; absent on collision.
    pub realized_sinr: Option<f64>,
}

/// How per-band values are produced from the environment sub-seed.
#[derive(Debug, Clone, PartialEq)]
pub enum BandValues {
    /// One value for all bands, or one per band.
    List(Vec<f64>),
    /// Independent uniform draws in `[lo, hi]`.
    Uniform(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PuPlacement {
    /// Uniform over `1..=s` per band.
    Random,
    /// Explicit 1-based sub-band per band (or one for all).
    List(Vec<usize>),
    None,
}

/// Recipe for an [`Environment`], resolved once per configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub bands: usize,
    pub subbands: usize,
    pub base_sinr_db: BandValues,
    pub inr_db: BandValues,
    pub pu_subband: PuPlacement,
    pub reward: RewardParams,
    /// Per-node SINR offsets in dB; empty means radar-independent means.
    pub node_offset_db: Vec<f64>,
    pub seed: u64,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        Self {
            bands: 5,
            subbands: crate::waveform::DEFAULT_SUBBANDS,
            base_sinr_db: BandValues::List(vec![14.0, 13.25, 12.5, 11.5, 9.0]),
            inr_db: BandValues::Uniform(3.0, 9.0),
            // edge sub-bands leave two primary-user-free waveforms per band
            pu_subband: PuPlacement::List(vec![1, 4, 1, 4, 1]),
            reward: RewardParams::default(),
            node_offset_db: Vec::new(),
            seed: 0x5EED,
        }
    }
}

fn resolve_values<R: Rng>(rng: &mut R, name: &'static str, values: &BandValues, bands: usize) -> Result<Vec<f64>, EnvError> {
    match values {
        BandValues::List(v) if v.len() == 1 => Ok(vec![v[0]; bands]),
        BandValues::List(v) if v.len() == bands => Ok(v.clone()),
        BandValues::List(v) => Err(EnvError::Length { name, got: v.len(), want: bands }),
        BandValues::Uniform(lo, hi) => Ok((0..bands).map(|_| rng.random_range(*lo..=*hi)).collect()),
    }
}

impl EnvironmentSpec {
    pub fn build(&self) -> Result<Environment, EnvError> {
        if self.bands == 0 {
            return Err(EnvError::NoBands);
        }
        let library = build_library(self.subbands)?;
        // fixed order of draws keeps the profile stable when lists replace ranges
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let base = resolve_values(&mut rng, "bands.base_sinr_db", &self.base_sinr_db, self.bands)?;
        let inr = resolve_values(&mut rng, "bands.inr_db", &self.inr_db, self.bands)?;
        let pu: Vec<Option<usize>> = match &self.pu_subband {
            PuPlacement::Random => (0..self.bands).map(|_| Some(rng.random_range(1..=self.subbands))).collect(),
            PuPlacement::None => vec![None; self.bands],
            PuPlacement::List(v) => {
                let v = match v.len() {
                    1 => vec![v[0]; self.bands],
                    n if n == self.bands => v.clone(),
                    n => return Err(EnvError::Length { name: "bands.pu_subband", got: n, want: self.bands }),
                };
                if let Some(&bad) = v.iter().find(|&&p| p == 0 || p > self.subbands) {
                    return Err(EnvError::PuSubband(bad, self.subbands));
                }
                v.into_iter().map(Some).collect()
            }
        };
        let profiles = (0..self.bands)
            .map(|b| BandProfile { base_sinr_db: base[b], inr_db: inr[b], pu_subband: pu[b] })
            .collect();
        Environment::new(profiles, library, self.reward, self.node_offset_db.clone())
    }
}

/// Resolved environment: profiles plus cached mean tables.
#[derive(Debug, Clone)]
pub struct Environment {
    profiles: Vec<BandProfile>,
    library: Vec<WaveformSpec>,
    params: RewardParams,
    node_offset_db: Vec<f64>,
    /// `[band][waveform]` mean SINR before node offsets.
    sinr_table: Vec<Vec<f64>>,
    overlap_table: Vec<Vec<bool>>,
}

impl Environment {
    pub fn new(
        profiles: Vec<BandProfile>,
        library: Vec<WaveformSpec>,
        params: RewardParams,
        node_offset_db: Vec<f64>,
    ) -> Result<Self, EnvError> {
        params.validate()?;
        if profiles.is_empty() {
            return Err(EnvError::NoBands);
        }
        let sinr_table = profiles.iter().map(|b| library.iter().map(|w| mean_sinr(b, w, &params)).collect()).collect();
        let overlap_table = profiles.iter().map(|b| library.iter().map(|w| overlaps_pu(b, w)).collect()).collect();
        Ok(Self { profiles, library, params, node_offset_db, sinr_table, overlap_table })
    }

    pub fn bands(&self) -> usize {
        self.profiles.len()
    }

    pub fn waveforms(&self) -> usize {
        self.library.len()
    }

    pub fn profiles(&self) -> &[BandProfile] {
        &self.profiles
    }

    pub fn library(&self) -> &[WaveformSpec] {
        &self.library
    }

    pub fn params(&self) -> &RewardParams {
        &self.params
    }

    fn offset(&self, node: usize) -> f64 {
        self.node_offset_db.get(node).copied().unwrap_or(0.0)
    }

    pub fn mean_sinr_of(&self, node: usize, pair: ActionPair) -> f64 {
        self.sinr_table[pair.band][pair.waveform] + self.offset(node)
    }

    /// True mean reward of `pair` for `node`, ignoring collisions.
    pub fn expected_reward(&self, node: usize, pair: ActionPair) -> f64 {
        self.params.reward_of(self.mean_sinr_of(node, pair))
    }

    /// Band-level means for `radars` nodes, each band scored by its best
    /// waveform.
    pub fn band_rewards(&self, radars: usize) -> Result<RewardMatrix, EnvError> {
        let rows: Vec<Vec<f64>> = (0..radars)
            .map(|r| {
                (0..self.bands())
                    .map(|band| {
                        (0..self.waveforms())
                            .map(|waveform| self.expected_reward(r, ActionPair { band, waveform }))
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect()
            })
            .collect();
        Ok(RewardMatrix::new(&rows)?)
    }

    /// Best waveform of `band` for `node`, ties toward lower indices.
    pub fn best_waveform(&self, node: usize, band: usize) -> usize {
        let mut best = 0;
        for w in 1..self.waveforms() {
            if self.expected_reward(node, ActionPair { band, waveform: w })
                > self.expected_reward(node, ActionPair { band, waveform: best })
            {
                best = w;
            }
        }
        best
    }

    /// Advance one PRI. `noise[i]` supplies node `i`'s SINR perturbation so
    /// callers can give every node its own stream; one normal is consumed
    /// per node whether or not it collided.
    pub fn step_with<R: Rng>(&self, actions: &[ActionPair], noise: &mut [R], out: &mut Vec<StepOutcome>) {
        assert_eq!(actions.len(), noise.len());
        self.step_impl(actions, |node| noise[node].sample(StandardNormal), out);
    }

    /// Same as [`step_with`](Self::step_with) with every node on one stream.
    pub fn step<R: Rng>(&self, actions: &[ActionPair], rng: &mut R) -> Vec<StepOutcome> {
        let mut out = Vec::with_capacity(actions.len());
        self.step_impl(actions, |_| rng.sample(StandardNormal), &mut out);
        out
    }

    fn step_impl(&self, actions: &[ActionPair], mut normal: impl FnMut(usize) -> f64, out: &mut Vec<StepOutcome>) {
        out.clear();
        let mut load = vec![0u32; self.bands()];
        for a in actions {
            load[a.band] += 1;
        }
        for (node, a) in actions.iter().enumerate() {
            let z = normal(node);
            let pu_overlap = self.overlap_table[a.band][a.waveform];
            out.push(if load[a.band] > 1 {
                StepOutcome { reward: 0.0, collided: true, pu_overlap, realized_sinr: None }
            } else {
                let sinr = self.mean_sinr_of(node, *a) + self.params.sinr_stddev_db * z;
                StepOutcome { reward: self.params.reward_of(sinr), collided: false, pu_overlap, realized_sinr: Some(sinr) }
            });
        }
    }
}
