//! Finite-population Monte Carlo engine with exact binomial transitions.
//!
//! Each run draws from its own `ChaCha8Rng`, seeded from `(master_seed, run_index)` by
//! [`run_seed`], so ensembles are identical whether executed serially or in parallel.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{allocate_integer, IntegerAllocation};
use crate::error::{Error, Result};
use crate::meanfield::MapKind;
use crate::model::{classify_regime, Group, GroupState, ModelParams, Regime};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub model: MapKind,
    pub initial: GroupState,
    pub horizon: u64,
    pub master_seed: u64,
    pub n_runs: u64,
}

impl SimConfig {
    pub fn new(
        params: ModelParams,
        model: MapKind,
        initial: GroupState,
        horizon: u64,
        master_seed: u64,
        n_runs: u64,
    ) -> Result<Self> {
        let config = SimConfig {
            params,
            model,
            initial,
            horizon,
            master_seed,
            n_runs,
        };
        config.validate()?;
        Ok(config)
    }

    /// Convenience constructor: the initial fractions are rounded to counts of `params.n_per_group()`.
    pub fn from_fractions(
        params: ModelParams,
        model: MapKind,
        x_a: f64,
        x_b: f64,
        horizon: u64,
        master_seed: u64,
        n_runs: u64,
    ) -> Result<Self> {
        let initial = GroupState::from_fractions_rounded(x_a, x_b, params.n_per_group())?;
        Self::new(params, model, initial, horizon, master_seed, n_runs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if self.n_runs < 1 {
            return Err(Error::invalid("n_runs must be at least 1"));
        }
        match self.initial.counts() {
            Some(c) if c.n == self.params.n_per_group() => Ok(()),
            Some(c) => Err(Error::invalid(format!(
                "initial state has N = {} but params have N = {}",
                c.n,
                self.params.n_per_group()
            ))),
            None => Err(Error::invalid("the initial state must be count-backed")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub t: u64,
    pub state: GroupState,
    pub allocation: IntegerAllocation,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub run_index: u64,
    pub run_seed: u64,
    /// Steps `t = 0..=horizon`.
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn deltas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.state.delta()).collect()
    }

    pub fn final_state(&self) -> &GroupState {
        &self.steps.last().expect("non-empty trajectory").state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaMoments {
    pub mean: f64,
    pub variance: f64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index`: `splitmix64(master_seed ^ splitmix64(run_index + golden_gamma))`.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(run_index.wrapping_add(GOLDEN_GAMMA)))
}

pub fn rng_for_run(master_seed: u64, run_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(run_seed(master_seed, run_index))
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("0 < p < 1 checked above")
        .sample(rng)
}

fn draw_next<R: Rng + ?Sized>(
    state: &GroupState,
    alloc: &IntegerAllocation,
    params: &ModelParams,
    model: MapKind,
    leader: Option<Group>,
    rng: &mut R,
) -> GroupState {
    let c = state.counts().expect("caller checked count-backing");
    let highs = [c.h_a, c.h_b];
    let next = [Group::A, Group::B].map(|g| {
        let i = g.index();
        let advantaged = model == MapKind::Aa && leader == Some(g);
        let (q_i, l_i) = if advantaged {
            (params.q() + params.epsilon(), params.epsilon())
        } else {
            (params.q(), 0.0)
        };
        let admits = alloc.high[i] + alloc.low[i];
        let rejected_high = highs[i] - alloc.high[i];
        let rejected_low = (c.n - highs[i]) - alloc.low[i];
        binomial(rng, admits, params.p())
            + binomial(rng, rejected_high, q_i)
            + binomial(rng, rejected_low, l_i)
    });
    GroupState::from_counts(next[0], next[1], c.n).expect("binomial draws never exceed N")
}

/// One stochastic generation. Draws are taken for group A, then group B, each in the
/// order admits, rejected highs, rejected lows.
pub fn sample_step<R: Rng + ?Sized>(
    state: &GroupState,
    params: &ModelParams,
    model: MapKind,
    leader: Option<Group>,
    rng: &mut R,
) -> Result<GroupState> {
    let alloc = allocate_integer(state, params)?;
    Ok(draw_next(state, &alloc, params, model, leader, rng))
}

/// Conditional mean and variance of `Delta(t+1)` given the state, under Equal Advantage.
pub fn conditional_delta_moments(
    state: &GroupState,
    params: &ModelParams,
    model: MapKind,
) -> Result<DeltaMoments> {
    if model != MapKind::Ea {
        return Err(Error::UnsupportedModel(
            "conditional moments are only available for Equal Advantage".into(),
        ));
    }
    let (a, p, q) = (params.alpha(), params.p(), params.q());
    let n = params.n_per_group() as f64;
    let x = state.total();
    let delta = state.delta();
    if x >= 2.0 * a {
        if x <= 0.0 {
            return Err(Error::DegenerateState("over-subscribed with X = 0".into()));
        }
        Ok(DeltaMoments {
            mean: (2.0 * a * (p - q) / x + q) * delta,
            variance: (2.0 * a * p * (1.0 - p) + q * (1.0 - q) * (x - 2.0 * a)) / n,
        })
    } else {
        Ok(DeltaMoments {
            mean: 2.0 * (1.0 - a) * p / (2.0 - x) * delta,
            variance: 2.0 * a * p * (1.0 - p) / n,
        })
    }
}

/// Simulate run `run_index`, handing each step `t = 0..=horizon` to `visit` without
/// storing the trajectory. Returning `ControlFlow::Break` stops the run early.
pub fn simulate_run<F>(config: &SimConfig, run_index: u64, mut visit: F) -> Result<()>
where
    F: FnMut(&TrajectoryStep) -> ControlFlow<()>,
{
    config.validate()?;
    let mut rng = rng_for_run(config.master_seed, run_index);
    let params = &config.params;
    let mut state = config.initial;
    for t in 0..=config.horizon {
        let step = TrajectoryStep {
            t,
            state,
            allocation: allocate_integer(&state, params)?,
            regime: classify_regime(&state, params),
        };
        if visit(&step).is_break() || t == config.horizon {
            break;
        }
        state = draw_next(&state, &step.allocation, params, config.model, state.leader(), &mut rng);
    }
    Ok(())
}

/// Simulate run `run_index` of `config`.
pub fn run_trajectory(config: &SimConfig, run_index: u64) -> Result<Trajectory> {
    let mut steps = Vec::with_capacity(config.horizon as usize + 1);
    simulate_run(config, run_index, |s| {
        steps.push(s.clone());
        ControlFlow::Continue(())
    })?;
    Ok(Trajectory {
        run_index,
        run_seed: run_seed(config.master_seed, run_index),
        steps,
    })
}

/// All runs of the ensemble, in run-index order.
pub fn run_ensemble(config: &SimConfig) -> Result<Vec<Trajectory>> {
    run_ensemble_map(config, |t| t)
}

/// Run the ensemble in parallel and reduce each trajectory with `f` as soon as it is
/// produced. Output is in run-index order regardless of thread count.
pub fn run_ensemble_map<T, F>(config: &SimConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Trajectory) -> T + Sync + Send,
{
    config.validate()?;
    (0..config.n_runs)
        .into_par_iter()
        .map(|i| run_trajectory(config, i).map(&f))
        .collect()
}
