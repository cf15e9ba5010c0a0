//! Shared domain types: model parameters, group state, regimes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Group::A => 0,
            Group::B => 1,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::A => "A",
            Group::B => "B",
        })
    }
}

/// Admission regime of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// More high types than seats: only high types are admitted.
    #[serde(rename = "over")]
    OverSubscribed,
    /// Every high type is admitted and the residual seats go to low types.
    #[serde(rename = "under")]
    UnderSubscribed,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::OverSubscribed => "over",
            Regime::UnderSubscribed => "under",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scalar parameters of the stylized two-group models.
///
/// * `alpha`: college capacity as a fraction of the whole population, `0 < alpha < 1/2`.
/// * `p`: probability an admitted individual becomes high type.
/// * `q`: probability a rejected high type stays high (`q < p`).
/// * `epsilon`: affinity advantage granted to the leading group's non-admits.
/// * `n_per_group`: individuals per group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    p: f64,
    q: f64,
    epsilon: f64,
    n_per_group: u64,
}

impl ModelParams {
    pub fn new(alpha: f64, p: f64, q: f64, epsilon: f64, n_per_group: u64) -> Result<Self> {
        let params = ModelParams {
            alpha,
            p,
            q,
            epsilon,
            n_per_group,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.p, self.q, self.epsilon];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid(format!(
                "alpha must satisfy 0 < alpha < 0.5 (got {})",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("p must lie in [0, 1] (got {})", self.p)));
        }
        if !(self.q >= 0.0 && self.q < self.p) {
            return Err(Error::invalid(format!(
                "q must satisfy 0 <= q < p (got q = {}, p = {})",
                self.q, self.p
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::invalid(format!(
                "epsilon must lie in [0, 1] (got {})",
                self.epsilon
            )));
        }
        if self.q + self.epsilon > 1.0 {
            return Err(Error::invalid(format!(
                "q + epsilon must not exceed 1 (got {})",
                self.q + self.epsilon
            )));
        }
        if self.n_per_group == 0 {
            return Err(Error::invalid("n_per_group must be at least 1"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_per_group(&self) -> u64 {
        self.n_per_group
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.alpha, self.p, self.q, epsilon, self.n_per_group)
    }

    pub fn with_q(self, q: f64) -> Result<Self> {
        Self::new(self.alpha, self.p, q, self.epsilon, self.n_per_group)
    }

    pub fn with_n(self, n_per_group: u64) -> Result<Self> {
        Self::new(self.alpha, self.p, self.q, self.epsilon, n_per_group)
    }

    /// Real-valued capacity `2 N alpha`.
    pub fn capacity_real(&self) -> f64 {
        2.0 * self.n_per_group as f64 * self.alpha
    }

    /// Integer capacity `C = round(2 N alpha)`, fixed for a whole stochastic run.
    pub fn capacity(&self) -> u64 {
        self.capacity_real().round() as u64
    }
}

/// Backing integer counts of a finite-population state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub h_a: u64,
    pub h_b: u64,
    pub n: u64,
}

/// Fractions of high types `(x_a, x_b)` in the two groups, optionally backed by counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupState {
    x_a: f64,
    x_b: f64,
    counts: Option<Counts>,
}

impl GroupState {
    pub fn new(x_a: f64, x_b: f64) -> Result<Self> {
        for (name, x) in [("x_a", x_a), ("x_b", x_b)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1] (got {x})")));
            }
        }
        Ok(GroupState {
            x_a,
            x_b,
            counts: None,
        })
    }

    pub fn from_counts(h_a: u64, h_b: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("group size must be at least 1"));
        }
        if h_a > n || h_b > n {
            return Err(Error::invalid(format!(
                "high-type counts ({h_a}, {h_b}) exceed group size {n}"
            )));
        }
        Ok(GroupState {
            x_a: h_a as f64 / n as f64,
            x_b: h_b as f64 / n as f64,
            counts: Some(Counts { h_a, h_b, n }),
        })
    }

    /// Count-backed state with `h_i = round(n * x_i)`.
    pub fn from_fractions_rounded(x_a: f64, x_b: f64, n: u64) -> Result<Self> {
        GroupState::new(x_a, x_b)?;
        let nf = n as f64;
        GroupState::from_counts((x_a * nf).round() as u64, (x_b * nf).round() as u64, n)
    }

    /// Real-valued state clamped into `[0, 1]`, absorbing round-off from the maps.
    pub(crate) fn clamped(x_a: f64, x_b: f64) -> Self {
        GroupState {
            x_a: x_a.clamp(0.0, 1.0),
            x_b: x_b.clamp(0.0, 1.0),
            counts: None,
        }
    }

    pub fn x_a(&self) -> f64 {
        self.x_a
    }

    pub fn x_b(&self) -> f64 {
        self.x_b
    }

    pub fn x(&self, group: Group) -> f64 {
        match group {
            Group::A => self.x_a,
            Group::B => self.x_b,
        }
    }

    pub fn counts(&self) -> Option<Counts> {
        self.counts
    }

    /// `X = x_a + x_b`.
    pub fn total(&self) -> f64 {
        self.x_a + self.x_b
    }

    /// Separation `x_a - x_b`.
    pub fn delta(&self) -> f64 {
        self.x_a - self.x_b
    }

    /// Group with strictly more high types; `None` on a tie.
    pub fn leader(&self) -> Option<Group> {
        if let Some(c) = self.counts {
            return match c.h_a.cmp(&c.h_b) {
                std::cmp::Ordering::Greater => Some(Group::A),
                std::cmp::Ordering::Less => Some(Group::B),
                std::cmp::Ordering::Equal => None,
            };
        }
        if self.x_a > self.x_b {
            Some(Group::A)
        } else if self.x_b > self.x_a {
            Some(Group::B)
        } else {
            None
        }
    }

    /// Same state with the group labels exchanged.
    pub fn swapped(&self) -> GroupState {
        GroupState {
            x_a: self.x_b,
            x_b: self.x_a,
            counts: self.counts.map(|c| Counts {
                h_a: c.h_b,
                h_b: c.h_a,
                n: c.n,
            }),
        }
    }
}

/// Regime of `state` under `params`.
///
/// Real-valued states are over-subscribed iff `x_a + x_b >= 2 alpha`. Count-backed
/// states compare against the rounded capacity instead, `h_a + h_b >= C`, so the
/// classification always agrees with the integer allocation actually performed.
pub fn classify_regime(state: &GroupState, params: &ModelParams) -> Regime {
    let over = match state.counts {
        Some(c) => c.h_a + c.h_b >= capacity_for(c.n, params.alpha()),
        None => state.total() >= 2.0 * params.alpha(),
    };
    if over {
        Regime::OverSubscribed
    } else {
        Regime::UnderSubscribed
    }
}

pub(crate) fn capacity_for(n: u64, alpha: f64) -> u64 {
    (2.0 * n as f64 * alpha).round() as u64
}
