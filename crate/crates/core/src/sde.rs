//! Euler–Maruyama integration of the interacting Bessel and Dyson SDEs over
//! many independent paths.
//!
//! Each path draws from its own ChaCha8 stream selected by the path index, so
//! an ensemble is a pure function of its configuration no matter how paths
//! are scheduled across threads. Proposals that leave the Weyl chamber are
//! rejected; the step is halved and retried with fresh noise, and grows back
//! after each accepted step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dunkl::{in_open_chamber_a, in_open_chamber_b, ModelParams};
use crate::error::{Error, Result};

/// Consecutive rejections after which a path is declared stuck.
pub const MAX_CONSECUTIVE_REJECTIONS: u32 = 20;

/// Largest tolerated fraction of stuck paths.
pub const STUCK_PATH_LIMIT: f64 = 1e-3;

/// Largest drift displacement per step, as a fraction of the distance to the
/// nearest wall.
pub const MAX_DRIFT_FRACTION: f64 = 0.5;

/// Steps shorter than this fraction of `dt` mark a path as stuck.
const MIN_STEP_FRACTION: f64 = 1e-15;

/// Rejection fraction above which a run is flagged.
pub const REJECTION_FLAG_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Interacting Bessel processes on `0 < x_1 < … < x_N`.
    BesselB,
    /// Dyson's Brownian motion on `x_1 < … < x_N`.
    DysonA,
}

impl Model {
    fn admits(self, x: &[f64]) -> bool {
        match self {
            Model::BesselB => in_open_chamber_b(x),
            Model::DysonA => in_open_chamber_a(x),
        }
    }
}

/// Positions strictly inside the chamber of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig(Vec<f64>);

impl ParticleConfig {
    pub fn new(positions: Vec<f64>, model: Model) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid(
                "a configuration needs at least one particle",
            ));
        }
        if !model.admits(&positions) {
            return Err(Error::invalid(format!(
                "positions {positions:?} are not strictly inside the {model:?} chamber"
            )));
        }
        Ok(ParticleConfig(positions))
    }

    pub fn positions(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub model: Model,
    pub params: ModelParams,
    pub dt: f64,
    pub t_final: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub initial: ParticleConfig,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final > self.dt && self.t_final.is_finite()) {
            return Err(Error::invalid(format!(
                "t_final = {} must exceed dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths must be at least 1"));
        }
        if self.initial.len() != self.params.n_particles() {
            return Err(Error::invalid(format!(
                "initial configuration has {} particles, parameters say {}",
                self.initial.len(),
                self.params.n_particles()
            )));
        }
        if !self.model.admits(self.initial.positions()) {
            return Err(Error::invalid("initial configuration outside the chamber"));
        }
        Ok(())
    }

    /// Number of nominal time steps, `⌈t_final/dt⌉`; the last one is
    /// shortened to land on `t_final`.
    pub fn n_steps(&self) -> u64 {
        let k = self.t_final / self.dt;
        let r = k.round();
        if (k - r).abs() < 1e-9 * k {
            r as u64
        } else {
            k.ceil() as u64
        }
    }
}

/// Final positions of an ensemble, one row per completed path.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Row-major `n_completed × N` matrix.
    pub finals: Vec<f64>,
    pub n_particles: usize,
    pub rejected_steps: u64,
    /// Proposals made, accepted or not.
    pub total_steps: u64,
    /// Indices of paths abandoned after too many consecutive rejections.
    pub stuck_paths: Vec<u64>,
    pub config_echo: SimulationConfig,
}

impl EnsembleResult {
    pub fn n_completed(&self) -> usize {
        self.finals.len() / self.n_particles.max(1)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.finals.chunks_exact(self.n_particles)
    }

    pub fn rejection_fraction(&self) -> f64 {
        if self.total_steps == 0 {
            0.0
        } else {
            self.rejected_steps as f64 / self.total_steps as f64
        }
    }

    /// True when more than 1% of proposals were rejected.
    pub fn rejection_flagged(&self) -> bool {
        self.rejection_fraction() > REJECTION_FLAG_FRACTION
    }
}

fn check_chamber(x: &[f64], model: Model) -> Result<()> {
    if !model.admits(x) {
        return Err(Error::domain(format!(
            "positions {x:?} are outside the {model:?} chamber"
        )));
    }
    Ok(())
}

fn bessel_drift_into(x: &[f64], params: &ModelParams, out: &mut [f64]) {
    let beta = params.beta();
    let wall = 0.5 * beta * (params.nu() + 0.5);
    for (o, &xi) in out.iter_mut().zip(x) {
        *o = wall / xi;
    }
    for i in 0..x.len() {
        let (head, tail) = out.split_at_mut(i + 1);
        let xi = x[i];
        let xi2 = xi * xi;
        let mut acc = 0.0;
        // 1/(x_i − x_j) + 1/(x_i + x_j) combined over x_i² − x_j²
        for (o, &xj) in tail.iter_mut().zip(&x[i + 1..]) {
            let q = beta / (xi2 - xj * xj);
            acc += xi * q;
            *o -= xj * q;
        }
        head[i] += acc;
    }
}

fn dyson_drift_into(x: &[f64], beta: f64, out: &mut [f64]) {
    let half_beta = 0.5 * beta;
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in 0..x.len() {
        let (head, tail) = out.split_at_mut(i + 1);
        let xi = x[i];
        let mut acc = 0.0;
        for (o, &xj) in tail.iter_mut().zip(&x[i + 1..]) {
            let d = half_beta / (xi - xj);
            acc += d;
            *o -= d;
        }
        head[i] += acc;
    }
}

/// `(β/2)[(2ν+1)/(2x_i) + Σ_{j≠i}(1/(x_i−x_j) + 1/(x_i+x_j))]`.
pub fn drift_bessel(x: &ParticleConfig, params: &ModelParams) -> Result<Vec<f64>> {
    check_chamber(x.positions(), Model::BesselB)?;
    let mut out = vec![0.0; x.len()];
    bessel_drift_into(x.positions(), params, &mut out);
    Ok(out)
}

/// `(β/2) Σ_{j≠i} 1/(x_i − x_j)`.
pub fn drift_dyson(x: &ParticleConfig, beta: f64) -> Result<Vec<f64>> {
    check_chamber(x.positions(), Model::DysonA)?;
    let mut out = vec![0.0; x.len()];
    dyson_drift_into(x.positions(), beta, &mut out);
    Ok(out)
}

/// Distance from an ordered configuration to the nearest chamber wall, up to
/// a factor `√2` on the pair walls.
fn wall_distance(model: Model, x: &[f64]) -> f64 {
    let gaps = x.windows(2).map(|w| w[1] - w[0]);
    match model {
        Model::BesselB => gaps.fold(x[0], f64::min),
        Model::DysonA => gaps.fold(f64::INFINITY, f64::min),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Accepted(ParticleConfig),
    Rejected,
}

/// One Euler–Maruyama proposal `x + drift·dt + √dt·g`, rejected when it
/// leaves the chamber.
pub fn step(
    state: &ParticleConfig,
    dt: f64,
    gaussians: &[f64],
    model: Model,
    params: &ModelParams,
) -> Result<StepOutcome> {
    if gaussians.len() != state.len() {
        return Err(Error::invalid("one Gaussian draw per particle is required"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    check_chamber(state.positions(), model)?;
    let mut drift = vec![0.0; state.len()];
    let mut next = vec![0.0; state.len()];
    drift_into(model, params, state.positions(), &mut drift);
    Ok(
        if propose(
            model,
            state.positions(),
            dt,
            dt.sqrt(),
            gaussians,
            &drift,
            &mut next,
        ) {
            StepOutcome::Accepted(ParticleConfig(next))
        } else {
            StepOutcome::Rejected
        },
    )
}

fn drift_into(model: Model, params: &ModelParams, x: &[f64], drift: &mut [f64]) {
    match model {
        Model::BesselB => bessel_drift_into(x, params, drift),
        Model::DysonA => dyson_drift_into(x, params.beta(), drift),
    }
}

/// Largest step whose drift displacement stays within [`MAX_DRIFT_FRACTION`]
/// of the distance to the nearest wall.
fn drift_limited_step(model: Model, x: &[f64], drift: &[f64]) -> f64 {
    let speed = drift.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    MAX_DRIFT_FRACTION * wall_distance(model, x) / speed
}

#[inline]
fn propose(
    model: Model,
    x: &[f64],
    dt: f64,
    sd: f64,
    gaussians: &[f64],
    drift: &[f64],
    out: &mut [f64],
) -> bool {
    for (((o, &xi), &d), &g) in out.iter_mut().zip(x).zip(drift).zip(gaussians) {
        *o = xi + d * dt + sd * g;
    }
    model.admits(out)
}

struct PathOutcome {
    finals: Option<Vec<f64>>,
    rejected: u64,
    proposals: u64,
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn simulate_path(config: &SimulationConfig, path: u64) -> PathOutcome {
    let n = config.initial.len();
    let mut rng = path_rng(config.seed, path);
    let mut x = config.initial.positions().to_vec();
    let mut next = vec![0.0; n];
    let mut drift = vec![0.0; n];
    let mut noise = vec![0.0; n];
    let mut rejected = 0u64;
    let mut proposals = 0u64;
    let dt = config.dt;
    let sqrt_dt = dt.sqrt();
    let mut h = dt;
    let mut t = 0.0;
    for k in 1..=config.n_steps() {
        let target = (k as f64 * dt).min(config.t_final);
        let mut consecutive = 0u32;
        // leftovers below 1e-6·dt are rounding noise in t
        while target - t > 1e-6 * dt {
            drift_into(config.model, &config.params, &x, &mut drift);
            let hh = h
                .min(target - t)
                .min(drift_limited_step(config.model, &x, &drift));
            if !(hh > MIN_STEP_FRACTION * dt) {
                return PathOutcome {
                    finals: None,
                    rejected,
                    proposals,
                };
            }
            for g in noise.iter_mut() {
                *g = StandardNormal.sample(&mut rng);
            }
            proposals += 1;
            let sd = if hh == dt { sqrt_dt } else { hh.sqrt() };
            if propose(config.model, &x, hh, sd, &noise, &drift, &mut next) {
                std::mem::swap(&mut x, &mut next);
                debug_assert!(config.model.admits(&x));
                t += hh;
                consecutive = 0;
                h = (2.0 * h).min(dt);
            } else {
                rejected += 1;
                consecutive += 1;
                if consecutive > MAX_CONSECUTIVE_REJECTIONS {
                    return PathOutcome {
                        finals: None,
                        rejected,
                        proposals,
                    };
                }
                h = 0.5 * hh;
            }
        }
        t = target;
    }
    PathOutcome {
        finals: Some(x),
        rejected,
        proposals,
    }
}

/// Integrates `n_paths` independent paths to `t_final`.
pub fn run_ensemble(config: &SimulationConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let outcomes: Vec<PathOutcome> = (0..config.n_paths)
        .into_par_iter()
        .map(|p| simulate_path(config, p))
        .collect();
    let n = config.initial.len();
    let mut finals = Vec::with_capacity(outcomes.len() * n);
    let mut stuck_paths = Vec::new();
    let mut rejected_steps = 0;
    let mut total_steps = 0;
    for (p, o) in outcomes.into_iter().enumerate() {
        rejected_steps += o.rejected;
        total_steps += o.proposals;
        match o.finals {
            Some(row) => finals.extend_from_slice(&row),
            None => stuck_paths.push(p as u64),
        }
    }
    let limit = (STUCK_PATH_LIMIT * config.n_paths as f64).floor() as u64;
    if stuck_paths.len() as u64 > limit {
        return Err(Error::TooManyStuckPaths {
            stuck: stuck_paths.len() as u64,
            total: config.n_paths,
            limit,
        });
    }
    Ok(EnsembleResult {
        finals,
        n_particles: n,
        rejected_steps,
        total_steps,
        stuck_paths,
        config_echo: config.clone(),
    })
}

/// Runs a single path and reports a stuck path as an error.
pub fn run_single_path(config: &SimulationConfig, path: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let o = simulate_path(config, path);
    o.finals.ok_or_else(|| Error::StuckPath {
        path,
        rejections: MAX_CONSECUTIVE_REJECTIONS + 1,
        time: config.t_final,
    })
}
