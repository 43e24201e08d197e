//! Power budget for target echoes versus line-of-sight mutual interference,
//! and the energy detector nodes use to flag collisions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum RfError {
    #[error("{0} must be positive (got {1})")]
    NonPositive(&'static str, f64),
    #[error("need at least 2 nodes (got {0})")]
    TooFewNodes(usize),
    #[error("need at least one Monte Carlo throw")]
    NoThrows,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// Monostatic link budget in linear units (W, m, m^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    /// Transmit power, W.
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    /// Interferer gain toward the victim (sidelobe level times main gain).
    pub sidelobe_gain: f64,
    pub wavelength: f64,
    /// Radar cross section, m^2.
    pub rcs: f64,
    /// Radar to target range, m.
    pub target_range: f64,
    /// Radar to interfering radar range, m.
    pub node_range: f64,
}

impl LinkBudgetParams {
    /// Parameters from dB-domain inputs: power in dBW, gains in dB, sidelobe
    /// level in dB relative to the main beam.
    pub fn from_db(
        tx_power_dbw: f64,
        gain_db: f64,
        sidelobe_db: f64,
        carrier_hz: f64,
        rcs: f64,
        target_range: f64,
        node_range: f64,
    ) -> Self {
        let gain = db_to_linear(gain_db);
        Self {
            tx_power: db_to_linear(tx_power_dbw),
            tx_gain: gain,
            rx_gain: gain,
            sidelobe_gain: gain * db_to_linear(sidelobe_db),
            wavelength: wavelength(carrier_hz),
            rcs,
            target_range,
            node_range,
        }
    }

    pub fn with_ranges(self, target_range: f64, node_range: f64) -> Self {
        Self { target_range, node_range, ..self }
    }

    fn check(&self) -> Result<(), RfError> {
        let positive = [
            ("tx_power", self.tx_power),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("wavelength", self.wavelength),
            ("target_range", self.target_range),
            ("node_range", self.node_range),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(RfError::NonPositive(name, v));
            }
        }
        Ok(())
    }
}

/// Radar-equation echo `Pt Gt Gr l^2 sigma / ((4 pi)^3 Rt^4)`.
pub fn target_echo_power(p: &LinkBudgetParams) -> Result<f64, RfError> {
    p.check()?;
    Ok(p.tx_power * p.tx_gain * p.rx_gain * p.wavelength.powi(2) * p.rcs
        / ((4.0 * PI).powi(3) * p.target_range.powi(4)))
}

/// One-way interference `Pt G(theta) Gr l^2 / (4 pi Rn^2)`.
pub fn interference_power(p: &LinkBudgetParams) -> Result<f64, RfError> {
    p.check()?;
    Ok(p.tx_power * p.sidelobe_gain * p.rx_gain * p.wavelength.powi(2)
        / (4.0 * PI * p.node_range.powi(2)))
}

/// Interference term of the combined-return model,
/// `Pt G G(theta) l^2 / ((4 pi)^2 Rn^2)`.
pub fn combined_interference_term(p: &LinkBudgetParams) -> Result<f64, RfError> {
    p.check()?;
    Ok(p.tx_power * p.rx_gain * p.sidelobe_gain * p.wavelength.powi(2)
        / ((4.0 * PI).powi(2) * p.node_range.powi(2)))
}

/// Echo plus mutual interference received in one PRI.
pub fn combined_received_power(p: &LinkBudgetParams) -> Result<f64, RfError> {
    Ok(target_echo_power(p)? + combined_interference_term(p)?)
}

/// `sigma / (4 pi Rt^4) < 1 / Rn^2`: echo small against interference.
pub fn detection_assumption_holds(p: &LinkBudgetParams) -> bool {
    p.rcs / (4.0 * PI * p.target_range.powi(4)) < p.node_range.powi(-2)
}

/// `(I, 2 I)` with `I` the interference term; brackets the combined power
/// whenever the echo does not exceed the interference.
pub fn combined_power_bounds(p: &LinkBudgetParams) -> Result<(f64, f64), RfError> {
    let i = combined_interference_term(p)?;
    Ok((i, 2.0 * i))
}

/// Smallest target range for which the detection assumption holds at
/// node spacing `node_range`: `(sigma Rn^2 / (4 pi))^(1/4)`.
pub fn min_target_range(rcs: f64, node_range: f64) -> f64 {
    (rcs * node_range.powi(2) / (4.0 * PI)).powf(0.25)
}

/// Which gain product the detector threshold assumes for the interferer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdGain {
    /// `G^2`: interferer main beam toward the victim.
    #[default]
    MainBeam,
    /// `G G(theta)`: interferer sidelobe toward the victim.
    Sidelobe,
}

/// Binomial point process: fixed node count, uniform in a disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BppModel {
    pub n_nodes: usize,
    pub disc_center: (f64, f64),
    pub disc_radius: f64,
}

impl BppModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(f64, f64)> {
        (0..self.n_nodes).map(|_| uniform_in_disc(rng, self.disc_center, self.disc_radius)).collect()
    }
}

pub fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, center: (f64, f64), radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    (center.0 + r * theta.cos(), center.1 + r * theta.sin())
}

/// Monte Carlo estimate of the nearest-neighbour distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub throws: usize,
}

impl NnEstimate {
    pub fn relative_std_error(&self) -> f64 {
        self.std_error / self.mean
    }
}

/// Default throw count for [`expected_nn_distance`].
pub const NN_THROWS: usize = 100_000;

/// Mean distance from a node to its nearest neighbour under the BPP,
/// averaged over every node of every throw.
pub fn expected_nn_distance(bpp: &BppModel, throws: usize, seed: u64) -> Result<NnEstimate, RfError> {
    if bpp.n_nodes < 2 {
        return Err(RfError::TooFewNodes(bpp.n_nodes));
    }
    if throws == 0 {
        return Err(RfError::NoThrows);
    }
    if !(bpp.disc_radius > 0.0) {
        return Err(RfError::NonPositive("disc_radius", bpp.disc_radius));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut pts = Vec::with_capacity(bpp.n_nodes);
    for _ in 0..throws {
        pts.clear();
        pts.extend((0..bpp.n_nodes).map(|_| uniform_in_disc(&mut rng, bpp.disc_center, bpp.disc_radius)));
        let throw_mean = pts
            .iter()
            .enumerate()
            .map(|(i, a)| {
                pts.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| (a.0 - b.0).hypot(a.1 - b.1))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / bpp.n_nodes as f64;
        sum += throw_mean;
        sum_sq += throw_mean * throw_mean;
    }
    let n = throws as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok(NnEstimate { mean, std_error: (var / n).sqrt(), throws })
}

/// Energy level above which a PRI is declared a collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorThreshold {
    /// J over one PRI.
    pub energy_threshold: f64,
    /// Reference nearest-neighbour distance, m.
    pub expected_nn: f64,
}

/// Threshold `PRI * Pt G_pair l^2 / ((4 pi)^2 E[g]^2)`.
pub fn collision_threshold(
    p: &LinkBudgetParams,
    pri_duration: f64,
    expected_nn: f64,
    gain: ThresholdGain,
) -> Result<DetectorThreshold, RfError> {
    p.check()?;
    if !(pri_duration > 0.0) {
        return Err(RfError::NonPositive("pri_duration", pri_duration));
    }
    if !(expected_nn > 0.0) {
        return Err(RfError::NonPositive("expected_nn", expected_nn));
    }
    let pair_gain = match gain {
        ThresholdGain::MainBeam => p.tx_gain * p.rx_gain,
        ThresholdGain::Sidelobe => p.rx_gain * p.sidelobe_gain,
    };
    if !(pair_gain > 0.0) {
        return Err(RfError::NonPositive("gain", pair_gain));
    }
    let power = p.tx_power * pair_gain * p.wavelength.powi(2) / ((4.0 * PI).powi(2) * expected_nn.powi(2));
    Ok(DetectorThreshold { energy_threshold: pri_duration * power, expected_nn })
}

/// Inclusive energy detector.
pub fn detect_collision(received_energy: f64, th: &DetectorThreshold) -> bool {
    received_energy >= th.energy_threshold
}
