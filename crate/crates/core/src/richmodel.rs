//! Continuous-ability simulator: rank-based admission, Gamma college boosts, Gaussian
//! inheritance noise and an affinity boost for the group that led admissions.
//!
//! Each generation:
//! 1. abilities are standardized (population-wide z-scores) when [`AbilityScale::Standardized`];
//! 2. the top `floor(alpha (n_a + n_b))` individuals are admitted;
//! 3. `a(t+1) = a(t) + theta I + lambda`, where `I ~ Gamma` for admits and `0` otherwise,
//!    `lambda ~ N(0, sigma_lambda^2)`, plus `eps ~ N(mu_eps, sigma_eps^2)` for non-admits
//!    of the group that had strictly more admits in the previous generation.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Group;
use crate::stochastic::rng_for_run;

/// How abilities are carried from one generation to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbilityScale {
    /// Abilities are replaced by their population-wide z-scores before each admission round,
    /// so boosts act on standardized ability.
    Standardized,
    /// Raw abilities accumulate without rescaling; ranking is unchanged.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichParams {
    pub mu: [f64; 2],
    pub sigma: [f64; 2],
    pub n: [usize; 2],
    pub alpha: f64,
    pub mu_i: f64,
    /// `0` gives a point-mass boost of `mu_i`.
    pub sigma_i: f64,
    pub theta: f64,
    pub sigma_lambda: f64,
    pub mu_eps: f64,
    pub sigma_eps: f64,
    pub horizon: u64,
    pub master_seed: u64,
    pub scale: AbilityScale,
    /// Generations whose abilities are recorded by [`run_rich`].
    pub snapshots: Vec<u64>,
}

impl RichParams {
    /// Two identical standard-normal groups of 500 with `theta = 1`, `mu_I = sigma_I = 1`,
    /// `sigma_lambda = 0.5`, `sigma_eps = mu_eps / 2` and 200 generations.
    pub fn base(alpha: f64, mu_eps: f64) -> Self {
        RichParams {
            mu: [0.0, 0.0],
            sigma: [1.0, 1.0],
            n: [500, 500],
            alpha,
            mu_i: 1.0,
            sigma_i: 1.0,
            theta: 1.0,
            sigma_lambda: 0.5,
            mu_eps,
            sigma_eps: mu_eps / 2.0,
            horizon: 200,
            master_seed: 0,
            scale: AbilityScale::Standardized,
            snapshots: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu[0],
            self.mu[1],
            self.sigma[0],
            self.sigma[1],
            self.alpha,
            self.mu_i,
            self.sigma_i,
            self.theta,
            self.sigma_lambda,
            self.mu_eps,
            self.sigma_eps,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("rich-model parameters must be finite"));
        }
        if self.n[0] < 1 || self.n[1] < 1 {
            return Err(Error::invalid("each group needs at least one individual"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1) (got {})", self.alpha)));
        }
        if self.sigma[0] < 0.0 || self.sigma[1] < 0.0 {
            return Err(Error::invalid("initial ability sd must be non-negative"));
        }
        if !(self.mu_i > 0.0) || self.sigma_i < 0.0 {
            return Err(Error::invalid("boost needs mu_I > 0 and sigma_I >= 0"));
        }
        if self.sigma_lambda < 0.0 || self.sigma_eps < 0.0 {
            return Err(Error::invalid("noise sds must be non-negative"));
        }
        if self.horizon < 1 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        admit_count(self.alpha, self.n[0] + self.n[1])
    }
}

fn admit_count(alpha: f64, total: usize) -> usize {
    // the small offset keeps products such as 0.29 * 1000 from flooring one short
    ((alpha * total as f64 + 1e-9).floor() as usize).min(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichPopulation {
    /// Individuals are stored group A first, then group B.
    pub ability: Vec<f64>,
    pub group: Vec<Group>,
    pub admitted: Vec<bool>,
    pub boost: Vec<f64>,
}

impl RichPopulation {
    pub fn len(&self) -> usize {
        self.ability.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ability.is_empty()
    }

    pub fn admit_counts(&self) -> [u64; 2] {
        let mut c = [0u64; 2];
        for (g, &adm) in self.group.iter().zip(&self.admitted) {
            if adm {
                c[g.index()] += 1;
            }
        }
        c
    }

    fn group_moments(&self) -> ([f64; 2], [f64; 2]) {
        let mut sum = [0.0; 2];
        let mut sq = [0.0; 2];
        let mut n = [0.0; 2];
        for (g, &a) in self.group.iter().zip(&self.ability) {
            let i = g.index();
            sum[i] += a;
            sq[i] += a * a;
            n[i] += 1.0;
        }
        let mean = [sum[0] / n[0], sum[1] / n[1]];
        let sd = [0, 1].map(|i| (sq[i] / n[i] - mean[i] * mean[i]).max(0.0).sqrt());
        (mean, sd)
    }

    /// Replace abilities by population-wide z-scores. A constant population is only centred.
    pub fn standardize(&mut self) {
        let n = self.len() as f64;
        let mean = self.ability.iter().sum::<f64>() / n;
        let var = self.ability.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let scale = if sd > 0.0 { 1.0 / sd } else { 1.0 };
        for a in &mut self.ability {
            *a = (*a - mean) * scale;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichMetrics {
    pub generation: u64,
    pub mean: [f64; 2],
    pub sd: [f64; 2],
    pub admits: [u64; 2],
    /// Group with the higher mean ability (A on ties).
    pub leading: Group,
    /// Fraction of admits going to `leading`.
    pub leading_share: f64,
    /// Group with strictly more admits; it receives the affinity boost next generation.
    pub admit_leader: Option<Group>,
}

impl RichMetrics {
    /// Admit shares of A and B.
    pub fn shares(&self) -> [f64; 2] {
        let total = (self.admits[0] + self.admits[1]) as f64;
        if total == 0.0 {
            return [0.5, 0.5];
        }
        [self.admits[0] as f64 / total, self.admits[1] as f64 / total]
    }
}

fn normal(mean: f64, sd: f64) -> Normal<f64> {
    Normal::new(mean, sd).expect("sd validated non-negative and finite")
}

pub fn init_population<R: Rng + ?Sized>(params: &RichParams, rng: &mut R) -> RichPopulation {
    let total = params.n[0] + params.n[1];
    let mut pop = RichPopulation {
        ability: Vec::with_capacity(total),
        group: Vec::with_capacity(total),
        admitted: vec![false; total],
        boost: vec![0.0; total],
    };
    for g in [Group::A, Group::B] {
        let i = g.index();
        let dist = normal(params.mu[i], params.sigma[i]);
        for _ in 0..params.n[i] {
            pop.ability.push(dist.sample(rng));
            pop.group.push(g);
        }
    }
    pop
}

/// Admit the top `floor(alpha n)` abilities. Ties keep storage order (group A first).
pub fn select_admits(population: &mut RichPopulation, alpha: f64) {
    let k = admit_count(alpha, population.len());
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&i, &j| population.ability[j].total_cmp(&population.ability[i]));
    population.admitted.iter_mut().for_each(|a| *a = false);
    for &i in &order[..k] {
        population.admitted[i] = true;
    }
}

fn metrics_of(population: &RichPopulation, generation: u64) -> RichMetrics {
    let (mean, sd) = population.group_moments();
    let admits = population.admit_counts();
    let leading = if mean[0] >= mean[1] { Group::A } else { Group::B };
    let total = (admits[0] + admits[1]) as f64;
    let leading_share = if total > 0.0 {
        admits[leading.index()] as f64 / total
    } else {
        0.5
    };
    let admit_leader = match admits[0].cmp(&admits[1]) {
        std::cmp::Ordering::Greater => Some(Group::A),
        std::cmp::Ordering::Less => Some(Group::B),
        std::cmp::Ordering::Equal => None,
    };
    RichMetrics {
        generation,
        mean,
        sd,
        admits,
        leading,
        leading_share,
        admit_leader,
    }
}

/// Produce generation `t + 1` from a population whose admissions for `t` are decided.
///
/// The drawn college boosts are recorded in `population.boost`. Returns the new population
/// (no admissions yet) and the metrics of generation `t`.
/// Draws per individual, in storage order: boost (admits), inheritance noise, affinity boost.
pub fn step_generation<R: Rng + ?Sized>(
    population: &mut RichPopulation,
    params: &RichParams,
    prev_leader: Option<Group>,
    generation: u64,
    rng: &mut R,
) -> (RichPopulation, RichMetrics) {
    let metrics = metrics_of(population, generation);
    let gamma = (params.sigma_i > 0.0).then(|| {
        let shape = params.mu_i * params.mu_i / (params.sigma_i * params.sigma_i);
        let scale = params.sigma_i * params.sigma_i / params.mu_i;
        Gamma::new(shape, scale).expect("mu_I > 0 and sigma_I > 0")
    });
    let lambda = normal(0.0, params.sigma_lambda);
    let affinity = normal(params.mu_eps, params.sigma_eps);
    let affinity_on = params.mu_eps != 0.0 || params.sigma_eps != 0.0;

    let len = population.len();
    let mut next = RichPopulation {
        ability: Vec::with_capacity(len),
        group: population.group.clone(),
        admitted: vec![false; len],
        boost: vec![0.0; len],
    };
    for j in 0..len {
        let boost = if population.admitted[j] {
            match &gamma {
                Some(d) => d.sample(rng),
                None => params.mu_i,
            }
        } else {
            0.0
        };
        let mut a = population.ability[j] + params.theta * boost;
        if params.sigma_lambda > 0.0 {
            a += lambda.sample(rng);
        }
        if affinity_on && !population.admitted[j] && prev_leader == Some(population.group[j]) {
            a += affinity.sample(rng);
        }
        next.ability.push(a);
        population.boost[j] = boost;
    }
    (next, metrics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilitySnapshot {
    pub generation: u64,
    pub group: Vec<Group>,
    pub ability: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RichRun {
    pub run_index: u64,
    pub metrics: Vec<RichMetrics>,
    pub snapshots: Vec<AbilitySnapshot>,
}

impl RichRun {
    /// Mean leading-group admit share over the last `window` generations.
    pub fn tail_share(&self, window: usize) -> f64 {
        let start = self.metrics.len().saturating_sub(window);
        let tail = &self.metrics[start..];
        tail.iter().map(|m| m.leading_share).sum::<f64>() / tail.len() as f64
    }
}

/// Simulate run `run_index` for `params.horizon` generations.
pub fn run_rich(params: &RichParams, run_index: u64) -> Result<RichRun> {
    params.validate()?;
    let mut rng = rng_for_run(params.master_seed, run_index);
    let mut pop = init_population(params, &mut rng);
    let mut prev_leader = None;
    let mut metrics = Vec::with_capacity(params.horizon as usize);
    let mut snapshots = Vec::new();
    for t in 0..params.horizon {
        if params.scale == AbilityScale::Standardized {
            pop.standardize();
        }
        select_admits(&mut pop, params.alpha);
        if params.snapshots.contains(&t) {
            snapshots.push(AbilitySnapshot {
                generation: t,
                group: pop.group.clone(),
                ability: pop.ability.clone(),
            });
        }
        let (next, m) = step_generation(&mut pop, params, prev_leader, t, &mut rng);
        prev_leader = m.admit_leader;
        metrics.push(m);
        pop = next;
    }
    Ok(RichRun {
        run_index,
        metrics,
        snapshots,
    })
}

/// Runs `0..n_runs` in parallel, each reduced by `f`, in run-index order.
pub fn run_rich_ensemble_map<T, F>(params: &RichParams, n_runs: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RichRun) -> T + Sync + Send,
{
    params.validate()?;
    (0..n_runs)
        .into_par_iter()
        .map(|i| run_rich(params, i).map(&f))
        .collect()
}

/// Write snapshots as CSV with columns `generation,group,ability`.
pub fn write_snapshots_csv<W: Write>(writer: W, snapshots: &[AbilitySnapshot]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::io("snapshot csv", e);
    w.write_record(["generation", "group", "ability"]).map_err(err)?;
    for snap in snapshots {
        for (g, a) in snap.group.iter().zip(&snap.ability) {
            w.write_record([snap.generation.to_string(), g.to_string(), a.to_string()])
                .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::io("snapshot csv", e))?;
    Ok(())
}
