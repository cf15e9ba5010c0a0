//! Time-to-parity and time-to-separation bounds, and the empirical hitting times they are
//! compared against.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::stochastic::Trajectory;

/// `f(alpha, p, q) = alpha (1 - p) + (1 - alpha) q (1 - q) / p`.
pub fn f_const(alpha: f64, p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid("f(alpha, p, q) needs p > 0"));
    }
    Ok(alpha * (1.0 - p) + (1.0 - alpha) * q * (1.0 - q) / p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityBoundInput {
    pub delta0: f64,
    pub eta: f64,
    pub omega: f64,
    pub params: ModelParams,
}

impl ParityBoundInput {
    /// `f / (N eta^2 (1 - p))`, the term `omega` must exceed for the bound to exist.
    pub fn validity_floor(&self) -> Result<f64> {
        let p = &self.params;
        let f = f_const(p.alpha(), p.p(), p.q())?;
        Ok(f / (p.n_per_group() as f64 * self.eta * self.eta * (1.0 - p.p())))
    }
}

/// High-probability number of steps until `|Delta| <= eta` under Equal Advantage.
///
/// Returns 0 when `delta0 <= eta`. Fails with `BoundInvalid` when `omega` does not exceed
/// [`ParityBoundInput::validity_floor`] or `p = 1`.
pub fn time_to_parity_bound(input: &ParityBoundInput) -> Result<u64> {
    let ParityBoundInput {
        delta0,
        eta,
        omega,
        params,
    } = *input;
    if !(delta0 > 0.0 && delta0 <= 1.0) {
        return Err(Error::invalid(format!("delta0 must lie in (0, 1] (got {delta0})")));
    }
    if !(eta > 0.0) {
        return Err(Error::invalid(format!("eta must be positive (got {eta})")));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!("omega must lie in (0, 1) (got {omega})")));
    }
    if delta0 <= eta {
        return Ok(0);
    }
    if params.p() >= 1.0 {
        return Err(Error::BoundInvalid("the parity bound needs p < 1".into()));
    }
    let c = input.validity_floor()?;
    if omega <= c {
        return Err(Error::BoundInvalid(format!(
            "omega = {omega} does not exceed f/(N eta^2 (1-p)) = {c}; N is too small"
        )));
    }
    let ratio = (omega - c) / (delta0 / eta - c);
    let steps = (ratio.ln() / params.p().ln()).ceil() - 1.0;
    Ok(steps.max(0.0) as u64)
}

/// Standard normal upper tail `1 - Phi(x)`, computed as `erfc(x / sqrt 2) / 2`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Per-step probability of a one-step separation of at least `delta`.
pub fn separation_prob_ps(delta: f64, params: &ModelParams) -> Result<f64> {
    let (a, p, q) = (params.alpha(), params.p(), params.q());
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p_s needs 0 < p < 1"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive (got {delta})")));
    }
    let sqrt_n = (params.n_per_group() as f64).sqrt();
    let sd = (2.0 * a * p * (1.0 - p)).sqrt();
    let first = normal_sf(sqrt_n * (1.0 + delta - p * (1.0 - a)) / sd);
    let second = normal_sf(sqrt_n * (1.0 + delta - q - a * (p - q)) / sd);
    Ok((2.0 * first.min(second)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparationBound {
    Finite(u64),
    /// `p_s` underflowed to zero; the bound is vacuous.
    Infinite,
}

impl SeparationBound {
    pub fn as_f64(self) -> f64 {
        match self {
            SeparationBound::Finite(t) => t as f64,
            SeparationBound::Infinite => f64::INFINITY,
        }
    }
}

/// `ceil(log(1/omega) / p_s)`.
pub fn separation_bound_from_ps(omega: f64, ps: f64) -> Result<SeparationBound> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!("omega must lie in (0, 1) (got {omega})")));
    }
    if !(ps >= 0.0) {
        return Err(Error::invalid(format!("p_s must be non-negative (got {ps})")));
    }
    let t = ((1.0 / omega).ln() / ps).ceil();
    if !t.is_finite() || t >= u64::MAX as f64 {
        return Ok(SeparationBound::Infinite);
    }
    Ok(SeparationBound::Finite(t as u64))
}

pub fn time_to_separation_bound(delta: f64, omega: f64, params: &ModelParams) -> Result<SeparationBound> {
    separation_bound_from_ps(omega, separation_prob_ps(delta, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HittingMode {
    /// First `t` with `|Delta(t)| <= eta`.
    Parity,
    /// First `t >= 1` with `|Delta(t) - Delta(t-1)| >= delta`.
    OneStepSeparation,
}

/// First hitting time of a sequence of separations, `None` if never reached.
pub fn hitting_time(deltas: &[f64], threshold: f64, mode: HittingMode) -> Option<u64> {
    match mode {
        HittingMode::Parity => deltas.iter().position(|d| d.abs() <= threshold),
        HittingMode::OneStepSeparation => deltas
            .windows(2)
            .position(|w| (w[1] - w[0]).abs() >= threshold)
            .map(|i| i + 1),
    }
    .map(|t| t as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingTimeStats {
    /// Per-run hitting times; `None` marks a run censored at the horizon.
    pub times: Vec<Option<u64>>,
    pub horizon: u64,
}

impl HittingTimeStats {
    pub fn new(times: Vec<Option<u64>>, horizon: u64) -> Self {
        HittingTimeStats { times, horizon }
    }

    pub fn n_runs(&self) -> usize {
        self.times.len()
    }

    pub fn censored(&self) -> usize {
        self.times.iter().filter(|t| t.is_none()).count()
    }

    fn observed(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().flatten().map(|&t| t as f64)
    }

    /// Mean over uncensored runs.
    pub fn mean(&self) -> Option<f64> {
        let n = self.n_runs() - self.censored();
        (n > 0).then(|| self.observed().sum::<f64>() / n as f64)
    }

    /// Standard error of [`Self::mean`].
    pub fn stderr(&self) -> Option<f64> {
        let n = self.n_runs() - self.censored();
        let mean = self.mean()?;
        if n < 2 {
            return Some(0.0);
        }
        let var = self.observed().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Some((var / n as f64).sqrt())
    }

    /// Nearest-rank percentile with censored runs ranked above every observed time.
    /// `None` when the rank lands on a censored run.
    pub fn percentile(&self, pct: f64) -> Option<u64> {
        if self.times.is_empty() {
            return None;
        }
        let mut sorted: Vec<u64> = self.times.iter().flatten().copied().collect();
        sorted.sort_unstable();
        let n = self.times.len();
        let rank = ((pct / 100.0) * n as f64).ceil().clamp(1.0, n as f64) as usize;
        sorted.get(rank - 1).copied()
    }
}

pub fn empirical_hitting_times(ensemble: &[Trajectory], threshold: f64, mode: HittingMode) -> HittingTimeStats {
    let horizon = ensemble
        .iter()
        .map(|t| t.steps.len().saturating_sub(1) as u64)
        .max()
        .unwrap_or(0);
    let times = ensemble
        .iter()
        .map(|t| hitting_time(&t.deltas(), threshold, mode))
        .collect();
    HittingTimeStats::new(times, horizon)
}
