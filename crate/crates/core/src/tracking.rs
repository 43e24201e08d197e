//! Constant-velocity target, SINR-scaled position measurements, per-node
//! Kalman filters and equal-weight fusion.

use nalgebra::{Matrix2x4, Matrix4, Vector2, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rf::db_to_linear;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("no tracks to fuse")]
    Empty,
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
}

impl TargetState {
    pub fn new(position: [f64; 2], velocity: [f64; 2]) -> Self {
        Self { position: Vector2::from(position), velocity: Vector2::from(velocity) }
    }
}

pub fn propagate_target(s: &TargetState, dt: f64) -> TargetState {
    TargetState { position: s.position + s.velocity * dt, velocity: s.velocity }
}

/// Position noise standard deviation at the given SINR.
pub fn measurement_sigma(sinr_db: f64, sigma_ref: f64) -> f64 {
    sigma_ref / db_to_linear(sinr_db).sqrt()
}

/// Noisy position of `target`. Two normals are drawn even when `sinr_db`
/// is `None` (every PRI collided) so the stream stays aligned across
/// policies; the measurement is then discarded.
pub fn measure<R: Rng + ?Sized>(target: &TargetState, sinr_db: Option<f64>, sigma_ref: f64, rng: &mut R) -> Option<Vector2<f64>> {
    let z = Vector2::new(rng.sample::<f64, _>(StandardNormal), rng.sample(StandardNormal));
    let sinr = sinr_db?;
    Some(target.position + z * measurement_sigma(sinr, sigma_ref))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanParams {
    /// Continuous white-acceleration intensity, m^2/s^3.
    pub process_noise: f64,
    pub init_pos_std: f64,
    pub init_vel_std: f64,
}

impl Default for KalmanParams {
    fn default() -> Self {
        Self { process_noise: 0.5, init_pos_std: 100.0, init_vel_std: 10.0 }
    }
}

fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

fn process_cov(dt: f64, q: f64) -> Matrix4<f64> {
    let (a, b, c) = (dt.powi(3) / 3.0, dt.powi(2) / 2.0, dt);
    let mut m = Matrix4::zeros();
    for axis in 0..2 {
        let (p, v) = (axis, axis + 2);
        m[(p, p)] = a;
        m[(p, v)] = b;
        m[(v, p)] = b;
        m[(v, v)] = c;
    }
    m * q
}

fn observation() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

pub fn is_positive_definite(p: &Matrix4<f64>) -> bool {
    let sym = (p - p.transpose()).abs().max() <= 1e-9 * p.abs().max().max(1.0);
    sym && p.cholesky().is_some()
}

/// One node's state `(x, y, vx, vy)` and covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTrack {
    pub state: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl NodeTrack {
    /// Start at `position` with zero velocity.
    pub fn initiate(position: Vector2<f64>, params: &KalmanParams) -> Self {
        let (ps, vs) = (params.init_pos_std.powi(2), params.init_vel_std.powi(2));
        Self {
            state: Vector4::new(position.x, position.y, 0.0, 0.0),
            covariance: Matrix4::from_diagonal(&Vector4::new(ps, ps, vs, vs)),
        }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.state.x, self.state.y)
    }
}

/// Predict over `dt`, then update with `meas = (position, variance)` if
/// present.
pub fn kalman_update(
    track: &NodeTrack,
    meas: Option<(Vector2<f64>, f64)>,
    dt: f64,
    q: f64,
) -> Result<NodeTrack, TrackError> {
    if !(dt > 0.0) {
        return Err(TrackError::TimeStep(dt));
    }
    if !is_positive_definite(&track.covariance) {
        return Err(TrackError::NotPositiveDefinite);
    }
    let f = transition(dt);
    let mut x = f * track.state;
    let mut p = f * track.covariance * f.transpose() + process_cov(dt, q);
    if let Some((z, r)) = meas {
        let h = observation();
        let s = h * p * h.transpose() + nalgebra::Matrix2::identity() * r;
        let s_inv = s.try_inverse().ok_or(TrackError::NotPositiveDefinite)?;
        let k = p * h.transpose() * s_inv;
        x += k * (z - h * x);
        // Joseph form keeps P symmetric PD under rounding
        let i_kh = Matrix4::identity() - k * h;
        p = i_kh * p * i_kh.transpose() + k * k.transpose() * r;
    }
    p = (p + p.transpose()) * 0.5;
    if !is_positive_definite(&p) {
        return Err(TrackError::NotPositiveDefinite);
    }
    Ok(NodeTrack { state: x, covariance: p })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedEstimate {
    pub position: Vector2<f64>,
    pub contributing_nodes: usize,
}

/// Equal-weight mean of track positions.
pub fn fuse<'a>(tracks: impl IntoIterator<Item = &'a NodeTrack>) -> Result<FusedEstimate, TrackError> {
    let mut sum = Vector2::zeros();
    let mut n = 0;
    for t in tracks {
        sum += t.position();
        n += 1;
    }
    if n == 0 {
        return Err(TrackError::Empty);
    }
    Ok(FusedEstimate { position: sum / n as f64, contributing_nodes: n })
}

/// Per-node filter that initiates on its first measurement.
#[derive(Debug, Clone, Default)]
pub struct NodeTracker {
    track: Option<NodeTrack>,
}

impl NodeTracker {
    /// Advance one CPI with an optional `(position, variance)` measurement.
    pub fn step(&mut self, meas: Option<(Vector2<f64>, f64)>, dt: f64, params: &KalmanParams) -> Result<(), TrackError> {
        self.track = match (self.track, meas) {
            (Some(t), m) => Some(kalman_update(&t, m, dt, params.process_noise)?),
            (None, Some((z, _))) => Some(NodeTrack::initiate(z, params)),
            (None, None) => None,
        };
        Ok(())
    }

    pub fn track(&self) -> Option<&NodeTrack> {
        self.track.as_ref()
    }
}
