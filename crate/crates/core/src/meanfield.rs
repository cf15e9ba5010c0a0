//! Deterministic expectation dynamics of the two transition models and their fixed points.
//!
//! One application of the map sends `(x_a, x_b)` to the expected high-type fractions of
//! the next generation. Admits become high with probability `p`. Under Equal Advantage a
//! rejected high type stays high with probability `q` and a rejected low type stays low.
//! Under Affinity Advantage the leading group's non-admits get `q + epsilon` (high) and
//! `epsilon` (low) instead.

use serde::{Deserialize, Serialize};

use crate::allocation::allocate_fractions;
use crate::error::{Error, Result};
use crate::model::{classify_regime, Group, GroupState, ModelParams, Regime};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Which transition model drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// Equal Advantage.
    Ea,
    /// Affinity Advantage.
    Aa,
}

impl MapKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::Ea => "ea",
            MapKind::Aa => "aa",
        }
    }
}

impl std::str::FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ea" => Ok(MapKind::Ea),
            "aa" => Ok(MapKind::Aa),
            other => Err(Error::invalid(format!("unknown model `{other}` (expected ea or aa)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPoint {
    pub x_a: f64,
    pub x_b: f64,
    pub regime: Regime,
    /// `max(|T(x) - x|)` under the map that produced the point.
    pub residual: f64,
}

impl MeanFieldPoint {
    pub fn delta(&self) -> f64 {
        self.x_a - self.x_b
    }

    pub fn state(&self) -> GroupState {
        GroupState::clamped(self.x_a, self.x_b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub trajectory: Vec<MeanFieldPoint>,
    pub converged: bool,
    pub iterations: usize,
    pub tolerance: f64,
}

impl ConvergenceReport {
    pub fn last(&self) -> &MeanFieldPoint {
        self.trajectory.last().expect("trajectory holds at least the start")
    }
}

/// Transition probabilities for one group's non-admits.
#[derive(Clone, Copy)]
struct RejectedOdds {
    high_stays: f64,
    low_rises: f64,
}

fn step_with(state: &GroupState, params: &ModelParams, odds: [RejectedOdds; 2]) -> GroupState {
    let seats = allocate_fractions(state, params.alpha())
        .expect("alpha > 0 rules out an empty over-subscribed state");
    let next = [Group::A, Group::B].map(|g| {
        let i = g.index();
        let x = state.x(g);
        let admitted = seats.high[i] + seats.low[i];
        let rejected_high = x - seats.high[i];
        let rejected_low = (1.0 - x) - seats.low[i];
        admitted * params.p()
            + rejected_high * odds[i].high_stays
            + rejected_low * odds[i].low_rises
    });
    GroupState::clamped(next[0], next[1])
}

/// One step of the Equal Advantage map.
pub fn step_ea(state: &GroupState, params: &ModelParams) -> GroupState {
    let odds = RejectedOdds {
        high_stays: params.q(),
        low_rises: 0.0,
    };
    step_with(state, params, [odds, odds])
}

/// One step of the Affinity Advantage map with `leader` receiving the advantage.
/// `leader = None` is the Equal Advantage step.
pub fn step_aa(state: &GroupState, params: &ModelParams, leader: Option<Group>) -> GroupState {
    let base = RejectedOdds {
        high_stays: params.q(),
        low_rises: 0.0,
    };
    let mut odds = [base, base];
    if let Some(g) = leader {
        odds[g.index()] = RejectedOdds {
            high_stays: params.q() + params.epsilon(),
            low_rises: params.epsilon(),
        };
    }
    step_with(state, params, odds)
}

/// One step of `kind`, with the AA leader taken from the current state.
pub fn step(kind: MapKind, state: &GroupState, params: &ModelParams) -> GroupState {
    match kind {
        MapKind::Ea => step_ea(state, params),
        MapKind::Aa => step_aa(state, params, state.leader()),
    }
}

fn point_of(kind: MapKind, state: &GroupState, params: &ModelParams) -> (MeanFieldPoint, GroupState) {
    let next = step(kind, state, params);
    let residual = (next.x_a() - state.x_a())
        .abs()
        .max((next.x_b() - state.x_b()).abs());
    let point = MeanFieldPoint {
        x_a: state.x_a(),
        x_b: state.x_b(),
        regime: classify_regime(state, params),
        residual,
    };
    (point, next)
}

/// Evaluate `state` as a candidate fixed point of `kind`.
pub fn evaluate(kind: MapKind, state: &GroupState, params: &ModelParams) -> MeanFieldPoint {
    point_of(kind, state, params).0
}

/// Iterate the map from `start` until the residual drops to `tolerance`.
///
/// Non-convergence is reported through `converged = false`; the trajectory is kept.
pub fn iterate(
    kind: MapKind,
    start: &GroupState,
    params: &ModelParams,
    tolerance: f64,
    max_iter: usize,
) -> ConvergenceReport {
    let mut trajectory = Vec::new();
    let mut current = GroupState::clamped(start.x_a(), start.x_b());
    let mut iterations = 0;
    loop {
        let (point, next) = point_of(kind, &current, params);
        trajectory.push(point);
        if point.residual <= tolerance {
            return ConvergenceReport {
                trajectory,
                converged: true,
                iterations,
                tolerance,
            };
        }
        if iterations >= max_iter {
            return ConvergenceReport {
                trajectory,
                converged: false,
                iterations,
                tolerance,
            };
        }
        current = next;
        iterations += 1;
    }
}

/// The unique Equal Advantage fixed point `(alpha p, alpha p)`.
pub fn ea_fixed_point(params: &ModelParams) -> MeanFieldPoint {
    let x = params.alpha() * params.p();
    evaluate(MapKind::Ea, &GroupState::clamped(x, x), params)
}

/// Affinity threshold `2 alpha (1 - p) / (1 - 2 alpha)`.
pub fn epsilon_threshold(alpha: f64, p: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::invalid(format!(
            "epsilon threshold needs 0 <= alpha < 0.5 (got {alpha})"
        )));
    }
    Ok(2.0 * alpha * (1.0 - p) / (1.0 - 2.0 * alpha))
}

// Relative slack when comparing epsilon against the threshold, so that e.g. 0.15 counts
// as "at threshold" for alpha = 0.3, p = 0.9 despite round-off in the threshold itself.
const THRESHOLD_SLACK: f64 = 1e-12;

pub(crate) fn at_or_above_threshold(params: &ModelParams) -> bool {
    let tilde = epsilon_threshold(params.alpha(), params.p()).expect("alpha < 0.5 by construction");
    params.epsilon() >= tilde - THRESHOLD_SLACK * tilde.max(1e-300)
}

/// Starting point used when the sub-threshold fixed point must be found by iteration.
pub fn canonical_aa_start(alpha: f64) -> GroupState {
    let base = (2.0 * alpha).min(0.2);
    GroupState::clamped(base * 1.01, base * 0.99)
}

/// Affinity Advantage fixed point with group A holding the advantage (requires `q = 0`).
///
/// At or above the threshold the closed form `(2 alpha (p - epsilon) + epsilon, 0)` is
/// returned. Below it the map is iterated from [`canonical_aa_start`].
pub fn aa_fixed_point(params: &ModelParams, tolerance: f64, max_iter: usize) -> Result<MeanFieldPoint> {
    if params.q() != 0.0 {
        return Err(Error::invalid(
            "the analytic Affinity Advantage fixed point is defined for q = 0; use iterate for q > 0",
        ));
    }
    if params.epsilon() == 0.0 {
        return Ok(ea_fixed_point(params));
    }
    if at_or_above_threshold(params) {
        let (a, p, e) = (params.alpha(), params.p(), params.epsilon());
        let x_a = 2.0 * a * (p - e) + e;
        return Ok(evaluate(MapKind::Aa, &GroupState::clamped(x_a, 0.0), params));
    }
    let report = iterate(
        MapKind::Aa,
        &canonical_aa_start(params.alpha()),
        params,
        tolerance,
        max_iter,
    );
    if !report.converged {
        return Err(Error::NoConvergence {
            iterations: report.iterations,
            residual: report.last().residual,
        });
    }
    Ok(*report.last())
}

/// Lower bound on the equilibrium separation of the Affinity Advantage model (`q = 0`).
///
/// Below the threshold this is
/// `max(0, 2(1 - alpha) - min(4 alpha (1 - p) / epsilon, (1 - alpha p)^2 / ((1 - alpha) epsilon)))`.
/// At or above it the separation is known exactly, `2 alpha (p - epsilon) + epsilon`, and
/// that value is returned; the two expressions agree at the threshold.
pub fn aa_separation_lower_bound(params: &ModelParams) -> f64 {
    let (a, p, e) = (params.alpha(), params.p(), params.epsilon());
    if e <= 0.0 {
        return 0.0;
    }
    if at_or_above_threshold(params) {
        return 2.0 * a * (p - e) + e;
    }
    let first = 4.0 * a * (1.0 - p) / e;
    let second = (1.0 - a * p).powi(2) / ((1.0 - a) * e);
    (2.0 * (1.0 - a) - first.min(second)).max(0.0)
}

/// Lower bound on the advantaged group's fixed-point fraction below the threshold:
/// `1 - min(2 alpha (1 - p) / epsilon, (1 - alpha p)^2 / (2 (1 - alpha) epsilon))`.
pub fn aa_leader_lower_bound(params: &ModelParams) -> f64 {
    let (a, p, e) = (params.alpha(), params.p(), params.epsilon());
    if e <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let first = 2.0 * a * (1.0 - p) / e;
    let second = (1.0 - a * p).powi(2) / (2.0 * (1.0 - a) * e);
    1.0 - first.min(second)
}

/// Equilibrium separation at or above the threshold when `q > 0`:
/// `(2 alpha (p - q - epsilon) + epsilon) / (1 - q)`.
pub fn aa_equilibrium_separation_qpos(params: &ModelParams) -> Result<f64> {
    if !at_or_above_threshold(params) {
        return Err(Error::invalid(
            "closed-form separation only holds for epsilon at or above the threshold",
        ));
    }
    let (a, p, q, e) = (params.alpha(), params.p(), params.q(), params.epsilon());
    Ok((2.0 * a * (p - q - e) + e) / (1.0 - q))
}
