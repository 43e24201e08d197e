//! Scenario configuration.
//!
//! The format is line oriented:
//!
//! ```text
//! # comment
//! nodes = 3
//! bands.base_sinr_db = 14, 13.25, 12.5, 11.5, 9   # list
//! bands.inr_db = 3..9                        # uniform range
//!
//! [variant saa]
//! policy.band = saa
//! ```
//!
//! Keys before the first `[variant NAME]` header form the base; each variant
//! overrides the base. A file without variants describes one scenario.
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bandit::{BandPolicyKind, PolicyParams, TwoLevelNode, WaveformPolicyKind};
use crate::environment::{BandValues, EnvironmentSpec, PuPlacement, RewardParams};
use crate::tracking::KalmanParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Missing { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invariant(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

fn schema(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Schema { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

/// Parsed but unresolved key/value layers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    base: Vec<Entry>,
    variants: Vec<(String, Vec<Entry>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut current: Option<usize> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header.strip_suffix(']').ok_or_else(|| schema(n, "unterminated section header"))?;
                let name = header
                    .trim()
                    .strip_prefix("variant")
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| schema(n, "expected [variant NAME]"))?;
                if !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.+".contains(c)) {
                    return Err(schema(n, format!("bad variant name {name:?}")));
                }
                if raw.variants.iter().any(|(v, _)| v == name) {
                    return Err(schema(n, format!("duplicate variant {name:?}")));
                }
                raw.variants.push((name.to_string(), Vec::new()));
                current = Some(raw.variants.len() - 1);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| schema(n, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(schema(n, "empty key or value"));
            }
            if !KEYS.contains(&key) {
                return Err(schema(n, format!("unknown key {key:?}")));
            }
            let layer = match current {
                Some(v) => &mut raw.variants[v].1,
                None => &mut raw.base,
            };
            if layer.iter().any(|e| e.key == key) {
                return Err(schema(n, format!("duplicate key {key:?}")));
            }
            layer.push(Entry { key: key.to_string(), value: value.to_string(), line: n });
        }
        Ok(raw)
    }

    /// Layer `upper` over `self`: upper base beats every lower layer, and
    /// variants with the same name merge.
    pub fn overlay(mut self, upper: RawConfig) -> RawConfig {
        fn put(layer: &mut Vec<Entry>, e: Entry) {
            layer.retain(|x| x.key != e.key);
            layer.push(e);
        }
        for e in &upper.base {
            put(&mut self.base, e.clone());
            for (_, layer) in &mut self.variants {
                put(layer, e.clone());
            }
        }
        for (name, entries) in upper.variants {
            match self.variants.iter_mut().find(|(v, _)| *v == name) {
                Some((_, layer)) => entries.into_iter().for_each(|e| put(layer, e)),
                None => {
                    let mut layer = self.base.clone();
                    entries.into_iter().for_each(|e| put(&mut layer, e));
                    self.variants.push((name, layer));
                }
            }
        }
        self
    }

    /// Validated configs, one per variant (a single unnamed one without).
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        if self.variants.is_empty() {
            return Ok(Scenario { variants: vec![Variant { name: None, config: SimConfig::from_entries(&self.base)? }] });
        }
        let variants = self
            .variants
            .iter()
            .map(|(name, layer)| {
                let mut merged: BTreeMap<&str, &Entry> = self.base.iter().map(|e| (e.key.as_str(), e)).collect();
                merged.extend(layer.iter().map(|e| (e.key.as_str(), e)));
                let entries: Vec<Entry> = merged.into_values().cloned().collect();
                let config = SimConfig::from_entries(&entries)
                    .map_err(|e| ConfigError::Invariant(format!("variant {name}: {e}")))?;
                Ok(Variant { name: Some(name.clone()), config })
            })
            .collect::<Result<_, ConfigError>>()?;
        Ok(Scenario { variants })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: Option<String>,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub variants: Vec<Variant>,
}

impl Scenario {
    pub fn variant(&self, name: &str) -> Option<&SimConfig> {
        self.variants.iter().find(|v| v.name.as_deref() == Some(name)).map(|v| &v.config)
    }

    /// Apply command-line overrides to every variant.
    pub fn override_all(&mut self, seed: Option<u64>, runs: Option<usize>) -> Result<(), ConfigError> {
        for v in &mut self.variants {
            if let Some(s) = seed {
                v.config.seed = s;
            }
            if let Some(r) = runs {
                v.config.runs = r;
            }
            v.config.validate()?;
        }
        Ok(())
    }
}

const KEYS: &[&str] = &[
    "nodes",
    "targets",
    "runs",
    "seed",
    "bands.count",
    "bands.subbands",
    "bands.base_sinr_db",
    "bands.inr_db",
    "bands.pu_subband",
    "bands.bandwidth_hz",
    "bands.seed",
    "bands.node_offset_db",
    "reward.alpha",
    "reward.beta_db",
    "reward.sinr_stddev_db",
    "reward.bw_penalty_db",
    "timing.pris_per_cpi",
    "timing.total_cpis",
    "timing.pri_s",
    "radio.carrier_hz",
    "radio.typical_snr_db",
    "policy.band",
    "policy.waveform",
    "policy.epsilon",
    "policy.decay_exponent",
    "policy.mc_epsilon",
    "policy.mc_delta",
    "policy.fixed_bands",
    "policy.fixed_waveform",
    "placement.center",
    "placement.radius_m",
    "target.position",
    "target.velocity",
    "tracking.sigma_ref_m",
    "tracking.process_noise",
    "tracking.init_pos_std_m",
    "tracking.init_vel_std_mps",
    "output.actions",
];

/// Fully resolved simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nodes: usize,
    pub targets: usize,
    pub runs: usize,
    pub seed: u64,
    pub env: EnvironmentSpec,
    pub bandwidth_hz: f64,
    pub pris_per_cpi: usize,
    pub total_cpis: usize,
    pub pri_s: f64,
    pub carrier_hz: f64,
    pub typical_snr_db: f64,
    pub policy: PolicyParams,
    pub placement_center: [f64; 2],
    pub placement_radius_m: f64,
    pub target_position: [f64; 2],
    pub target_velocity: [f64; 2],
    pub sigma_ref_m: f64,
    pub kalman: KalmanParams,
    pub record_actions: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            nodes: 3,
            targets: 1,
            runs: 50,
            seed: 1,
            env: EnvironmentSpec::default(),
            bandwidth_hz: 20e6,
            pris_per_cpi: 400,
            total_cpis: 50,
            pri_s: 1.024e-4,
            carrier_hz: 2.4e9,
            typical_snr_db: 12.0,
            policy: PolicyParams::default(),
            placement_center: [500.0, 500.0],
            placement_radius_m: 500.0,
            target_position: [400.0, 400.0],
            target_velocity: [5.0, 5.0],
            sigma_ref_m: 75.0,
            kalman: KalmanParams::default(),
            record_actions: true,
        }
    }
}

fn parse_f64(e: &Entry) -> Result<f64, ConfigError> {
    let v = e.value.as_str();
    // "a/b" fractions are handy for reward slopes
    let parsed = match v.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
        None => v.parse::<f64>().ok(),
    };
    parsed
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(e.line, format!("{}: expected a number, got {v:?}", e.key)))
}

fn parse_usize(e: &Entry) -> Result<usize, ConfigError> {
    e.value.parse().map_err(|_| schema(e.line, format!("{}: expected a non-negative integer, got {:?}", e.key, e.value)))
}

fn parse_u64(e: &Entry) -> Result<u64, ConfigError> {
    let v = e.value.as_str();
    let parsed = match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    };
    parsed.ok_or_else(|| schema(e.line, format!("{}: expected a 64-bit integer, got {v:?}", e.key)))
}

fn parse_bool(e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(schema(e.line, format!("{}: expected true/false, got {v:?}", e.key))),
    }
}

fn split_list(e: &Entry) -> Vec<Entry> {
    e.value
        .split(',')
        .map(|s| Entry { key: e.key.clone(), value: s.trim().to_string(), line: e.line })
        .collect()
}

fn parse_f64_list(e: &Entry) -> Result<Vec<f64>, ConfigError> {
    split_list(e).iter().map(parse_f64).collect()
}

fn parse_pair(e: &Entry) -> Result<[f64; 2], ConfigError> {
    let v = parse_f64_list(e)?;
    <[f64; 2]>::try_from(v).map_err(|_| schema(e.line, format!("{}: expected two numbers", e.key)))
}

fn parse_band_values(e: &Entry) -> Result<BandValues, ConfigError> {
    if let Some((lo, hi)) = e.value.split_once("..") {
        let lo = parse_f64(&Entry { value: lo.trim().to_string(), ..e.clone() })?;
        let hi = parse_f64(&Entry { value: hi.trim().to_string(), ..e.clone() })?;
        if lo > hi {
            return Err(schema(e.line, format!("{}: empty range", e.key)));
        }
        return Ok(BandValues::Uniform(lo, hi));
    }
    Ok(BandValues::List(parse_f64_list(e)?))
}

impl SimConfig {
    fn from_entries(entries: &[Entry]) -> Result<Self, ConfigError> {
        let mut c = SimConfig::default();
        for e in entries {
            match e.key.as_str() {
                "nodes" => c.nodes = parse_usize(e)?,
                "targets" => c.targets = parse_usize(e)?,
                "runs" => c.runs = parse_usize(e)?,
                "seed" => c.seed = parse_u64(e)?,
                "bands.count" => c.env.bands = parse_usize(e)?,
                "bands.subbands" => c.env.subbands = parse_usize(e)?,
                "bands.base_sinr_db" => c.env.base_sinr_db = parse_band_values(e)?,
                "bands.inr_db" => c.env.inr_db = parse_band_values(e)?,
                "bands.pu_subband" => {
                    c.env.pu_subband = match e.value.as_str() {
                        "random" => PuPlacement::Random,
                        "none" => PuPlacement::None,
                        _ => PuPlacement::List(split_list(e).iter().map(parse_usize).collect::<Result<_, _>>()?),
                    }
                }
                "bands.bandwidth_hz" => c.bandwidth_hz = parse_f64(e)?,
                "bands.seed" => c.env.seed = parse_u64(e)?,
                "bands.node_offset_db" => c.env.node_offset_db = parse_f64_list(e)?,
                "reward.alpha" => c.env.reward.alpha = parse_f64(e)?,
                "reward.beta_db" => c.env.reward.beta_db = parse_f64(e)?,
                "reward.sinr_stddev_db" => c.env.reward.sinr_stddev_db = parse_f64(e)?,
                "reward.bw_penalty_db" => c.env.reward.bw_penalty_db = parse_f64(e)?,
                "timing.pris_per_cpi" => c.pris_per_cpi = parse_usize(e)?,
                "timing.total_cpis" => c.total_cpis = parse_usize(e)?,
                "timing.pri_s" => c.pri_s = parse_f64(e)?,
                "radio.carrier_hz" => c.carrier_hz = parse_f64(e)?,
                "radio.typical_snr_db" => c.typical_snr_db = parse_f64(e)?,
                "policy.band" => {
                    c.policy.band = e.value.parse::<BandPolicyKind>().map_err(|err| schema(e.line, err.to_string()))?
                }
                "policy.waveform" => {
                    c.policy.waveform =
                        e.value.parse::<WaveformPolicyKind>().map_err(|err| schema(e.line, err.to_string()))?
                }
                "policy.epsilon" => c.policy.epsilon = parse_f64(e)?,
                "policy.decay_exponent" => c.policy.decay_exponent = parse_f64(e)?,
                "policy.mc_epsilon" => c.policy.mc_epsilon = parse_f64(e)?,
                "policy.mc_delta" => c.policy.mc_delta = parse_f64(e)?,
                "policy.fixed_bands" => {
                    c.policy.fixed_bands = split_list(e).iter().map(parse_usize).collect::<Result<_, _>>()?
                }
                "policy.fixed_waveform" => {
                    c.policy.fixed_waveform = match e.value.as_str() {
                        "full" => None,
                        _ => Some(parse_usize(e)?),
                    }
                }
                "placement.center" => c.placement_center = parse_pair(e)?,
                "placement.radius_m" => c.placement_radius_m = parse_f64(e)?,
                "target.position" => c.target_position = parse_pair(e)?,
                "target.velocity" => c.target_velocity = parse_pair(e)?,
                "tracking.sigma_ref_m" => c.sigma_ref_m = parse_f64(e)?,
                "tracking.process_noise" => c.kalman.process_noise = parse_f64(e)?,
                "tracking.init_pos_std_m" => c.kalman.init_pos_std = parse_f64(e)?,
                "tracking.init_vel_std_mps" => c.kalman.init_vel_std = parse_f64(e)?,
                "output.actions" => c.record_actions = parse_bool(e)?,
                other => return Err(schema(e.line, format!("unknown key {other:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invariant(msg));
        if self.nodes == 0 {
            return bad("nodes must be positive".into());
        }
        if self.nodes >= self.env.bands {
            return bad(format!("need nodes < bands, got {} nodes and {} bands", self.nodes, self.env.bands));
        }
        if self.targets != 1 {
            return bad("exactly one target is supported".into());
        }
        for (name, v) in [("runs", self.runs), ("timing.pris_per_cpi", self.pris_per_cpi), ("timing.total_cpis", self.total_cpis)] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("timing.pri_s", self.pri_s),
            ("bands.bandwidth_hz", self.bandwidth_hz),
            ("radio.carrier_hz", self.carrier_hz),
            ("placement.radius_m", self.placement_radius_m),
            ("tracking.sigma_ref_m", self.sigma_ref_m),
            ("tracking.init_pos_std_m", self.kalman.init_pos_std),
            ("tracking.init_vel_std_mps", self.kalman.init_vel_std),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.kalman.process_noise < 0.0 {
            return bad("tracking.process_noise must be non-negative".into());
        }
        if !self.env.node_offset_db.is_empty() && self.env.node_offset_db.len() != self.nodes {
            return bad(format!("bands.node_offset_db needs {} entries", self.nodes));
        }
        if self.policy.band == BandPolicyKind::Fixed && !self.policy.fixed_bands.is_empty() {
            let fb = &self.policy.fixed_bands;
            if fb.len() != self.nodes {
                return bad(format!("policy.fixed_bands needs {} entries", self.nodes));
            }
        }
        let env = self.env.build().map_err(|e| ConfigError::Invariant(e.to_string()))?;
        // building every node catches policy parameter errors up front
        for node in 0..self.nodes {
            TwoLevelNode::new(&self.policy, node, self.nodes, env.bands(), env.waveforms())
                .map_err(|e| ConfigError::Invariant(e.to_string()))?;
        }
        Ok(())
    }

    pub fn total_pris(&self) -> usize {
        self.pris_per_cpi * self.total_cpis
    }

    pub fn cpi_duration(&self) -> f64 {
        self.pris_per_cpi as f64 * self.pri_s
    }

    /// Every parameter as `key = value` lines in a fixed order; re-parsing
    /// the output yields the same config.
    pub fn canonical(&self) -> String {
        fn list<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
        }
        fn values(v: &BandValues) -> String {
            match v {
                BandValues::List(l) => list(l),
                BandValues::Uniform(lo, hi) => format!("{lo}..{hi}"),
            }
        }
        let e = &self.env;
        let p = &self.policy;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("nodes", self.nodes.to_string());
        kv("targets", self.targets.to_string());
        kv("runs", self.runs.to_string());
        kv("seed", self.seed.to_string());
        kv("bands.count", e.bands.to_string());
        kv("bands.subbands", e.subbands.to_string());
        kv("bands.base_sinr_db", values(&e.base_sinr_db));
        kv("bands.inr_db", values(&e.inr_db));
        kv(
            "bands.pu_subband",
            match &e.pu_subband {
                PuPlacement::Random => "random".into(),
                PuPlacement::None => "none".into(),
                PuPlacement::List(l) => list(l),
            },
        );
        kv("bands.bandwidth_hz", self.bandwidth_hz.to_string());
        kv("bands.seed", e.seed.to_string());
        if !e.node_offset_db.is_empty() {
            kv("bands.node_offset_db", list(&e.node_offset_db));
        }
        let RewardParams { alpha, beta_db, sinr_stddev_db, bw_penalty_db } = e.reward;
        kv("reward.alpha", alpha.to_string());
        kv("reward.beta_db", beta_db.to_string());
        kv("reward.sinr_stddev_db", sinr_stddev_db.to_string());
        kv("reward.bw_penalty_db", bw_penalty_db.to_string());
        kv("timing.pris_per_cpi", self.pris_per_cpi.to_string());
        kv("timing.total_cpis", self.total_cpis.to_string());
        kv("timing.pri_s", self.pri_s.to_string());
        kv("radio.carrier_hz", self.carrier_hz.to_string());
        kv("radio.typical_snr_db", self.typical_snr_db.to_string());
        kv("policy.band", p.band.to_string());
        kv("policy.waveform", p.waveform.to_string());
        kv("policy.epsilon", p.epsilon.to_string());
        kv("policy.decay_exponent", p.decay_exponent.to_string());
        kv("policy.mc_epsilon", p.mc_epsilon.to_string());
        kv("policy.mc_delta", p.mc_delta.to_string());
        if !p.fixed_bands.is_empty() {
            kv("policy.fixed_bands", list(&p.fixed_bands));
        }
        kv("policy.fixed_waveform", p.fixed_waveform.map_or("full".into(), |w| w.to_string()));
        kv("placement.center", list(&self.placement_center));
        kv("placement.radius_m", self.placement_radius_m.to_string());
        kv("target.position", list(&self.target_position));
        kv("target.velocity", list(&self.target_velocity));
        kv("tracking.sigma_ref_m", self.sigma_ref_m.to_string());
        kv("tracking.process_noise", self.kalman.process_noise.to_string());
        kv("tracking.init_pos_std_m", self.kalman.init_pos_std.to_string());
        kv("tracking.init_vel_std_mps", self.kalman.init_vel_std.to_string());
        kv("output.actions", self.record_actions.to_string());
        s
    }

    /// FNV-1a over [`canonical`](Self::canonical).
    pub fn hash(&self) -> u64 {
        crate::sim::fnv1a(self.canonical().as_bytes())
    }
}

/// Parse text into a resolved scenario.
pub fn parse_str(text: &str) -> Result<Scenario, ConfigError> {
    RawConfig::parse(text)?.resolve()
}

pub fn read_raw(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Missing { path: path.to_path_buf(), source })?;
    RawConfig::parse(&text)
}

pub fn load_config(path: &Path) -> Result<Scenario, ConfigError> {
    read_raw(path)?.resolve()
}

/// Figure scenarios shipped with the library.
pub mod presets {
    use super::{ConfigError, RawConfig, Scenario};

    pub const NAMES: &[&str] = &["default", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "convergence"];

    pub fn text(name: &str) -> Option<&'static str> {
        Some(match name {
            "default" => include_str!("../presets/default.cfg"),
            "fig4" => include_str!("../presets/fig4.cfg"),
            // the regret and tracking panels of a figure pair share a scenario
            "fig5" | "fig6" => include_str!("../presets/fig5.cfg"),
            "fig7" | "fig8" => include_str!("../presets/fig7.cfg"),
            "fig9" | "fig10" => include_str!("../presets/fig9.cfg"),
            "convergence" => include_str!("../presets/convergence.cfg"),
            _ => return None,
        })
    }

    pub fn raw(name: &str) -> Result<RawConfig, ConfigError> {
        RawConfig::parse(text(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?)
    }

    pub fn load(name: &str) -> Result<Scenario, ConfigError> {
        raw(name)?.resolve()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_table_defaults() {
        let s = parse_str("").unwrap();
        assert_eq!(s.variants.len(), 1);
        let c = &s.variants[0].config;
        assert_eq!(c.nodes, 3);
        assert_eq!(c.targets, 1);
        assert_eq!(c.pris_per_cpi, 400);
        assert_eq!(c.total_cpis, 50);
        assert_eq!(c.bandwidth_hz, 20e6);
        assert_eq!(c.typical_snr_db, 12.0);
        assert_eq!(c.carrier_hz, 2.4e9);
        assert_eq!(c.pri_s, 1.024e-4);
        assert_eq!(c.runs, 50);
        assert_eq!(*c, SimConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let c = parse_str("runs = 5\nreward.alpha = 1/32 # slope\nbands.inr_db = 2..4").unwrap();
        let c = &c.variants[0].config;
        assert_eq!(c.runs, 5);
        assert_eq!(c.env.reward.alpha, 1.0 / 32.0);
        assert_eq!(c.env.inr_db, BandValues::Uniform(2.0, 4.0));
    }

    #[test]
    fn invariant_violations() {
        assert!(matches!(parse_str("nodes = 4\nbands.count = 4"), Err(ConfigError::Invariant(_))));
        assert!(matches!(parse_str("runs = 0"), Err(ConfigError::Invariant(_))));
        assert!(matches!(parse_str("policy.band = fixed\npolicy.fixed_bands = 0, 9, 1"), Err(ConfigError::Invariant(_))));
    }

    #[test]
    fn schema_violations() {
        for text in ["nodes", "nodes = three", "bogus = 1", "nodes = 2\nnodes = 3", "[section]", "policy.band = ucb"] {
            assert!(matches!(parse_str(text), Err(ConfigError::Schema { .. })), "{text}");
        }
        match parse_str("\n\nnodes = x") {
            Err(ConfigError::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_config(Path::new("/nonexistent/x.cfg")), Err(ConfigError::Missing { .. })));
    }

    #[test]
    fn variants_inherit_and_override() {
        let s = parse_str("runs = 7\n[variant a]\nnodes = 2\n[variant b]\npolicy.band = saa").unwrap();
        assert_eq!(s.variants.len(), 2);
        let a = s.variant("a").unwrap();
        assert_eq!((a.runs, a.nodes), (7, 2));
        let b = s.variant("b").unwrap();
        assert_eq!((b.runs, b.nodes, b.policy.band), (7, 3, BandPolicyKind::Saa));
    }

    #[test]
    fn overlay_puts_user_base_on_top() {
        let lower = RawConfig::parse("runs = 7\n[variant a]\nruns = 9\nnodes = 2").unwrap();
        let upper = RawConfig::parse("runs = 3").unwrap();
        let s = lower.overlay(upper).resolve().unwrap();
        let a = s.variant("a").unwrap();
        assert_eq!((a.runs, a.nodes), (3, 2));
    }

    #[test]
    fn canonical_round_trips() {
        let text = "nodes = 2\nbands.pu_subband = 1, 4, 1, 4, 2\npolicy.band = fixed\npolicy.fixed_bands = 1, 0\npolicy.fixed_waveform = 2\nbands.node_offset_db = 0.5, -0.5";
        let c = parse_str(text).unwrap().variants.remove(0).config;
        let again = parse_str(&c.canonical()).unwrap().variants.remove(0).config;
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_ne!(c.hash(), SimConfig::default().hash());
    }

    #[test]
    fn presets_parse() {
        for name in presets::NAMES {
            let s = presets::load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!s.variants.is_empty());
        }
        assert!(matches!(presets::load("fig99"), Err(ConfigError::UnknownPreset(_))));
    }
}
