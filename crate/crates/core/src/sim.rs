//! Experiment driver: seeding, the PRI/CPI loop and Monte Carlo replication.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bandit::{ActionPair, BanditError, Feedback, TwoLevelNode};
use crate::config::SimConfig;
use crate::environment::{EnvError, Environment, StepOutcome};
use crate::metrics::{mean_and_stderr, CurveStats, MetricsError, RegretLedger};
use crate::model::{optimal_matching, ModelError};
use crate::rf::BppModel;
use crate::tracking::{fuse, measure, measurement_sigma, propagate_target, NodeTracker, TargetState, TrackError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Seed of the named stream for one run.
pub fn stream_seed(master: u64, run_index: u64, name: &str) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(run_index)) ^ fnv1a(name.as_bytes()))
}

pub fn stream(master: u64, run_index: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, run_index, name))
}

/// One node's decision and outcome in one PRI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionRecord {
    /// 1-based.
    pub pri: u32,
    pub node: u16,
    pub band: u16,
    pub waveform: u16,
    pub collided: bool,
    pub reward: f64,
    pub realized_sinr: Option<f64>,
}

/// Fused estimate against the truth at the end of one CPI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpiRecord {
    /// 1-based.
    pub cpi: u32,
    pub fused: [f64; 2],
    pub truth: [f64; 2],
    pub error: f64,
    pub contributing_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub run_index: u64,
    pub node_positions: Vec<(f64, f64)>,
    /// Empty unless action recording is on.
    pub actions: Vec<ActionRecord>,
    pub regret: RegretLedger,
    pub tracks: Vec<CpiRecord>,
    /// Last PRI (1-based) in which any node collided.
    pub last_collision_pri: Option<usize>,
    pub collisions: usize,
    pub final_actions: Vec<ActionPair>,
    /// Every band policy is committed at the end of the run.
    pub all_settled: bool,
}

impl RunLog {
    pub fn average_regret(&self) -> Vec<f64> {
        self.regret.average_curve()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.tracks.iter().map(|t| t.error).collect()
    }
}

/// Execute run `run_index` of `cfg` against a prebuilt environment.
pub fn run_with_env(cfg: &SimConfig, env: &Environment, u_star: f64, run_index: u64) -> Result<RunLog, SimError> {
    let m = cfg.nodes;
    let seed = cfg.seed;
    let bpp = BppModel { n_nodes: m, disc_center: (cfg.placement_center[0], cfg.placement_center[1]), disc_radius: cfg.placement_radius_m };
    let node_positions = bpp.sample(&mut stream(seed, run_index, "placement"));

    let mut nodes: Vec<TwoLevelNode> = (0..m)
        .map(|i| TwoLevelNode::new(&cfg.policy, i, m, env.bands(), env.waveforms()))
        .collect::<Result<_, _>>()?;
    let named = |prefix: &str| -> Vec<ChaCha8Rng> { (0..m).map(|i| stream(seed, run_index, &format!("{prefix}/{i}"))).collect() };
    let mut band_rngs = named("band");
    let mut wf_rngs = named("waveform");
    let mut sinr_rngs = named("sinr");
    let mut meas_rngs = named("measure");

    let total = cfg.total_pris();
    let mut ledger = RegretLedger::with_capacity(u_star, total);
    let mut actions_log = Vec::with_capacity(if cfg.record_actions { total * m } else { 0 });
    let mut tracks = Vec::with_capacity(cfg.total_cpis);
    let mut trackers = vec![NodeTracker::default(); m];
    let mut target = TargetState::new(cfg.target_position, cfg.target_velocity);
    let dt = cfg.cpi_duration();

    let mut actions = vec![ActionPair { band: 0, waveform: 0 }; m];
    let mut out: Vec<StepOutcome> = Vec::with_capacity(m);
    let mut last_collision = None;
    let mut collisions = 0;
    let mut pri = 0usize;

    for cpi in 0..cfg.total_cpis {
        let mut sinr_sum = vec![0.0; m];
        let mut sinr_n = vec![0usize; m];
        for _ in 0..cfg.pris_per_cpi {
            pri += 1;
            for (i, node) in nodes.iter_mut().enumerate() {
                actions[i] = node.select(&mut band_rngs[i], &mut wf_rngs[i]);
            }
            env.step_with(&actions, &mut sinr_rngs, &mut out);
            let mut achieved = 0.0;
            let mut any_collision = false;
            for (i, o) in out.iter().enumerate() {
                if o.collided {
                    any_collision = true;
                } else {
                    achieved += env.expected_reward(i, actions[i]);
                }
                if let Some(s) = o.realized_sinr {
                    sinr_sum[i] += s;
                    sinr_n[i] += 1;
                }
                nodes[i].observe(&Feedback { reward: o.reward, collided: o.collided, interfered: o.pu_overlap });
                if cfg.record_actions {
                    actions_log.push(ActionRecord {
                        pri: pri as u32,
                        node: i as u16,
                        band: actions[i].band as u16,
                        waveform: actions[i].waveform as u16,
                        collided: o.collided,
                        reward: o.reward,
                        realized_sinr: o.realized_sinr,
                    });
                }
            }
            if any_collision {
                collisions += 1;
                last_collision = Some(pri);
            }
            ledger.push(achieved);
        }

        target = propagate_target(&target, dt);
        for i in 0..m {
            let sinr = (sinr_n[i] > 0).then(|| sinr_sum[i] / sinr_n[i] as f64);
            let z = measure(&target, sinr, cfg.sigma_ref_m, &mut meas_rngs[i]);
            let meas = z.zip(sinr).map(|(z, s)| (z, measurement_sigma(s, cfg.sigma_ref_m).powi(2)));
            trackers[i].step(meas, dt, &cfg.kalman)?;
        }
        let (fused, contributing) = match fuse(trackers.iter().filter_map(NodeTracker::track)) {
            Ok(f) => ([f.position.x, f.position.y], f.contributing_nodes),
            // nobody has measured yet: fall back to the prior placement center
            Err(_) => (cfg.placement_center, 0),
        };
        let truth = [target.position.x, target.position.y];
        let error = ((fused[0] - truth[0]).powi(2) + (fused[1] - truth[1]).powi(2)).sqrt();
        tracks.push(CpiRecord { cpi: cpi as u32 + 1, fused, truth, error, contributing_nodes: contributing });
    }

    Ok(RunLog {
        run_index,
        node_positions,
        actions: actions_log,
        regret: ledger,
        tracks,
        last_collision_pri: last_collision,
        collisions,
        final_actions: actions,
        all_settled: nodes.iter().all(|n| n.band_policy().is_settled()),
    })
}

/// The environment and optimum shared by every run of `cfg`.
pub fn prepare(cfg: &SimConfig) -> Result<(Environment, f64), SimError> {
    let env = cfg.env.build()?;
    let (_, u_star) = optimal_matching(&env.band_rewards(cfg.nodes)?)?;
    Ok((env, u_star))
}

pub fn run_scenario(cfg: &SimConfig, run_index: u64) -> Result<RunLog, SimError> {
    let (env, u_star) = prepare(cfg)?;
    run_with_env(cfg, &env, u_star, run_index)
}

/// All runs of one configuration plus pointwise aggregates.
#[derive(Debug, Clone)]
pub struct MonteCarlo {
    pub u_star: f64,
    pub runs: Vec<RunLog>,
    /// Average cumulative regret per PRI.
    pub regret: CurveStats,
    /// Fused position error per CPI.
    pub tracking: CurveStats,
}

impl MonteCarlo {
    pub fn final_regret(&self) -> f64 {
        *self.regret.mean.last().expect("non-empty horizon")
    }

    pub fn final_error(&self) -> f64 {
        *self.tracking.mean.last().expect("non-empty horizon")
    }
}

/// Runs `0..cfg.runs` in parallel; results are independent of scheduling.
pub fn monte_carlo(cfg: &SimConfig) -> Result<MonteCarlo, SimError> {
    let (env, u_star) = prepare(cfg)?;
    let runs: Vec<RunLog> =
        (0..cfg.runs as u64).into_par_iter().map(|r| run_with_env(cfg, &env, u_star, r)).collect::<Result<_, _>>()?;
    let regret_curves: Vec<Vec<f64>> = runs.iter().map(RunLog::average_regret).collect();
    let error_curves: Vec<Vec<f64>> = runs.iter().map(RunLog::errors).collect();
    Ok(MonteCarlo { u_star, regret: mean_and_stderr(&regret_curves)?, tracking: mean_and_stderr(&error_curves)?, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{BandPolicyKind, WaveformPolicyKind};
    use crate::config::parse_str;

    fn small(extra: &str) -> SimConfig {
        parse_str(&format!("timing.total_cpis = 3\ntiming.pris_per_cpi = 50\nruns = 4\n{extra}")).unwrap().variants.remove(0).config
    }

    #[test]
    fn hashes_are_stable() {
        assert_eq!(fnv1a(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xAF63_DC4C_8601_EC8C);
        assert_ne!(stream_seed(1, 0, "env"), stream_seed(1, 1, "env"));
        assert_ne!(stream_seed(1, 0, "band/0"), stream_seed(1, 0, "band/1"));
        assert_ne!(stream_seed(1, 0, "x"), stream_seed(2, 0, "x"));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = small("");
        assert_eq!(run_scenario(&cfg, 2).unwrap(), run_scenario(&cfg, 2).unwrap());
        assert_ne!(run_scenario(&cfg, 2).unwrap().actions, run_scenario(&cfg, 3).unwrap().actions);
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = small("");
        let mc = monte_carlo(&cfg).unwrap();
        for (r, log) in mc.runs.iter().enumerate() {
            assert_eq!(*log, run_scenario(&cfg, r as u64).unwrap());
        }
    }

    #[test]
    fn log_shapes() {
        let cfg = small("");
        let log = run_scenario(&cfg, 0).unwrap();
        assert_eq!(log.actions.len(), 150 * 3);
        assert_eq!(log.tracks.len(), 3);
        assert_eq!(log.regret.len(), 150);
        assert!(log.actions.iter().all(|a| a.collided == a.realized_sinr.is_none()));
    }

    #[test]
    fn optimal_static_allocation_has_zero_regret() {
        let mut cfg = small("reward.sinr_stddev_db = 0\nbands.pu_subband = none\npolicy.band = fixed\npolicy.waveform = fixed");
        let (env, _) = prepare(&cfg).unwrap();
        let (opt, _) = optimal_matching(&env.band_rewards(3).unwrap()).unwrap();
        cfg.policy.fixed_bands = opt.indices();
        assert_eq!(cfg.policy.band, BandPolicyKind::Fixed);
        assert_eq!(cfg.policy.waveform, WaveformPolicyKind::Fixed);
        let log = run_scenario(&cfg, 0).unwrap();
        assert_eq!(log.regret.cumulative().last().copied(), Some(0.0));
        assert_eq!(log.collisions, 0);
    }

    #[test]
    fn single_run_aggregate_is_the_run() {
        let mut cfg = small("");
        cfg.runs = 1;
        let mc = monte_carlo(&cfg).unwrap();
        assert_eq!(mc.regret.mean, mc.runs[0].average_regret());
        assert_eq!(mc.tracking.mean, mc.runs[0].errors());
        assert!(mc.regret.stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn aggregate_is_the_mean_of_runs() {
        let mc = monte_carlo(&small("")).unwrap();
        let n = mc.runs.len() as f64;
        for t in [0, 75, 149] {
            let mean: f64 = mc.runs.iter().map(|r| r.average_regret()[t]).sum::<f64>() / n;
            assert!((mc.regret.mean[t] - mean).abs() < 1e-12);
        }
    }
}
