//! The meritocratic, fair and efficient selection rule.
//!
//! Over-subscribed: every seat goes to a high type, split in proportion to each
//! group's high-type count. Under-subscribed: every high type is admitted and the
//! residual seats are split in proportion to each group's low-type count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{capacity_for, classify_regime, GroupState, ModelParams, Regime};

/// Real-valued seat counts per group (index 0 = A, 1 = B) and type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub high: [f64; 2],
    pub low: [f64; 2],
    pub regime: Regime,
}

impl Allocation {
    pub fn admits(&self) -> [f64; 2] {
        [self.high[0] + self.low[0], self.high[1] + self.low[1]]
    }

    pub fn total(&self) -> f64 {
        self.high.iter().chain(self.low.iter()).sum()
    }
}

/// Integer seat counts. `capacity` is the rounded capacity used for the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerAllocation {
    pub high: [u64; 2],
    pub low: [u64; 2],
    pub regime: Regime,
    pub capacity: u64,
}

impl IntegerAllocation {
    pub fn admits(&self) -> [u64; 2] {
        [self.high[0] + self.low[0], self.high[1] + self.low[1]]
    }

    pub fn total(&self) -> u64 {
        self.high.iter().chain(self.low.iter()).sum()
    }
}

/// Seat split per unit of group size (as if `N = 1`). The mean-field maps use this.
pub fn allocate_fractions(state: &GroupState, alpha: f64) -> Result<Allocation> {
    let (xa, xb) = (state.x_a(), state.x_b());
    let x = xa + xb;
    if x >= 2.0 * alpha {
        if x <= 0.0 {
            return Err(Error::DegenerateState(
                "no high types in an over-subscribed state".into(),
            ));
        }
        Ok(Allocation {
            high: [xa / x * 2.0 * alpha, xb / x * 2.0 * alpha],
            low: [0.0, 0.0],
            regime: Regime::OverSubscribed,
        })
    } else {
        let residual = 2.0 * alpha - x;
        Ok(Allocation {
            high: [xa, xb],
            low: [
                (1.0 - xa) / (2.0 - x) * residual,
                (1.0 - xb) / (2.0 - x) * residual,
            ],
            regime: Regime::UnderSubscribed,
        })
    }
}

/// Real-valued seat counts for a population of `params.n_per_group()` per group.
pub fn allocate_real(state: &GroupState, params: &ModelParams) -> Result<Allocation> {
    let unit = allocate_fractions(state, params.alpha())?;
    let n = params.n_per_group() as f64;
    Ok(Allocation {
        high: unit.high.map(|s| s * n),
        low: unit.low.map(|s| s * n),
        regime: unit.regime,
    })
}

/// Integer seat counts for a count-backed state.
///
/// The real split is integerized by largest remainder within each seat class, with
/// ties going to group A. Floors and remainders are computed in exact integer
/// arithmetic, so the capacity `C = round(2 N alpha)` is always met exactly and no
/// group is given more seats of a type than it has candidates.
pub fn allocate_integer(state: &GroupState, params: &ModelParams) -> Result<IntegerAllocation> {
    let counts = state
        .counts()
        .ok_or_else(|| Error::invalid("integer allocation requires a count-backed state"))?;
    let n = counts.n;
    let capacity = capacity_for(n, params.alpha());
    if capacity > 2 * n {
        return Err(Error::CapacityInfeasible {
            capacity,
            population: 2 * n,
        });
    }
    let (ha, hb) = (counts.h_a, counts.h_b);
    let h = ha + hb;
    let regime = classify_regime(state, params);
    let alloc = match regime {
        Regime::OverSubscribed => {
            let high = if h == 0 {
                [0, 0]
            } else {
                apportion(capacity, [ha, hb], h)
            };
            IntegerAllocation {
                high,
                low: [0, 0],
                regime,
                capacity,
            }
        }
        Regime::UnderSubscribed => {
            let residual = capacity - h;
            let lows = [n - ha, n - hb];
            let low = apportion(residual, lows, lows[0] + lows[1]);
            IntegerAllocation {
                high: [ha, hb],
                low,
                regime,
                capacity,
            }
        }
    };
    debug_assert_eq!(alloc.total(), capacity);
    Ok(alloc)
}

/// Split `seats` between two groups in proportion to `weights` (summing to `total`)
/// by largest remainder; a tie in remainders goes to the first group.
fn apportion(seats: u64, weights: [u64; 2], total: u64) -> [u64; 2] {
    if total == 0 {
        return [0, 0];
    }
    let num = |w: u64| seats as u128 * w as u128;
    let t = total as u128;
    let floors = [num(weights[0]) / t, num(weights[1]) / t];
    let rems = [num(weights[0]) % t, num(weights[1]) % t];
    let mut out = [floors[0] as u64, floors[1] as u64];
    let left = seats - out[0] - out[1];
    // two shares with fractional parts summing to an integer below 2
    debug_assert!(left <= 1);
    if left == 1 {
        if rems[0] >= rems[1] {
            out[0] += 1;
        } else {
            out[1] += 1;
        }
    }
    out
}

/// Outcome of the fairness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fairness {
    Fair,
    Unfair,
    /// Rates differ, but no integer split of the same seats could equalize them.
    IntegerInfeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub meritocratic: bool,
    pub fairness: Fairness,
    pub efficient: bool,
}

impl PropertyReport {
    pub fn fair(&self) -> bool {
        self.fairness == Fairness::Fair
    }

    pub fn all(&self) -> bool {
        self.meritocratic && self.fair() && self.efficient
    }
}

const RATE_TOL: f64 = 1e-12;

/// Check a real-valued allocation against the three desirable properties.
pub fn check_properties(
    state: &GroupState,
    alloc: &Allocation,
    params: &ModelParams,
) -> PropertyReport {
    let n = params.n_per_group() as f64;
    let cap = params.capacity_real();
    let seat_tol = RATE_TOL * (1.0 + cap);
    let highs = [n * state.x_a(), n * state.x_b()];
    let lows = [n - highs[0], n - highs[1]];

    let low_given = alloc.low.iter().sum::<f64>() > seat_tol;
    let all_high_in = (0..2).all(|i| alloc.high[i] >= highs[i] - seat_tol);
    let meritocratic = !low_given || all_high_in;

    let fair = real_rates_equal(alloc.high, highs, seat_tol)
        && real_rates_equal(alloc.low, lows, seat_tol);

    let efficient = (alloc.total() - cap).abs() <= seat_tol;

    PropertyReport {
        meritocratic,
        fairness: if fair { Fairness::Fair } else { Fairness::Unfair },
        efficient,
    }
}

fn real_rates_equal(seats: [f64; 2], candidates: [f64; 2], seat_tol: f64) -> bool {
    for i in 0..2 {
        if seats[i] < -seat_tol || seats[i] > candidates[i] + seat_tol {
            return false;
        }
    }
    if candidates[0] > 0.0 && candidates[1] > 0.0 {
        (seats[0] / candidates[0] - seats[1] / candidates[1]).abs() <= RATE_TOL
    } else {
        true
    }
}

/// Integer counterpart of [`check_properties`]; rates are compared as exact rationals.
pub fn check_integer_properties(
    state: &GroupState,
    alloc: &IntegerAllocation,
    params: &ModelParams,
) -> Result<PropertyReport> {
    let c = state
        .counts()
        .ok_or_else(|| Error::invalid("integer check requires a count-backed state"))?;
    let highs = [c.h_a, c.h_b];
    let lows = [c.n - c.h_a, c.n - c.h_b];

    let low_given = alloc.low[0] + alloc.low[1] > 0;
    let meritocratic = !low_given || (alloc.high[0] >= highs[0] && alloc.high[1] >= highs[1]);

    let fairness = match (
        integer_fairness(alloc.high, highs),
        integer_fairness(alloc.low, lows),
    ) {
        (Fairness::Fair, Fairness::Fair) => Fairness::Fair,
        (Fairness::Unfair, _) | (_, Fairness::Unfair) => Fairness::Unfair,
        _ => Fairness::IntegerInfeasible,
    };

    let efficient = alloc.total() == capacity_for(c.n, params.alpha());
    Ok(PropertyReport {
        meritocratic,
        fairness,
        efficient,
    })
}

fn integer_fairness(seats: [u64; 2], candidates: [u64; 2]) -> Fairness {
    if seats[0] > candidates[0] || seats[1] > candidates[1] {
        return Fairness::Unfair;
    }
    if candidates[0] == 0 || candidates[1] == 0 {
        return Fairness::Fair;
    }
    let cross = |a: u64, b: u64| a as u128 * b as u128;
    if cross(seats[0], candidates[1]) == cross(seats[1], candidates[0]) {
        return Fairness::Fair;
    }
    let total_seats = (seats[0] + seats[1]) as u128;
    let total_cands = (candidates[0] + candidates[1]) as u128;
    if (total_seats * candidates[0] as u128).is_multiple_of(total_cands) {
        // an exactly fair integer split of these seats exists
        Fairness::Unfair
    } else {
        Fairness::IntegerInfeasible
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u64) -> ModelParams {
        ModelParams::new(0.3, 0.9, 0.4, 0.0, n).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn over_subscribed_split() {
        let s = GroupState::new(0.7, 0.1).unwrap();
        let a = allocate_real(&s, &params(100)).unwrap();
        assert_eq!(a.regime, Regime::OverSubscribed);
        assert!(close(a.high[0], 52.5) && close(a.high[1], 7.5));
        assert_eq!(a.low, [0.0, 0.0]);
    }

    #[test]
    fn under_subscribed_split() {
        let s = GroupState::new(0.1, 0.4).unwrap();
        let a = allocate_real(&s, &params(100)).unwrap();
        assert_eq!(a.regime, Regime::UnderSubscribed);
        assert!(close(a.high[0], 10.0) && close(a.high[1], 40.0));
        assert!(close(a.low[0], 6.0) && close(a.low[1], 4.0));
    }

    #[test]
    fn symmetric_states_get_identical_seats() {
        for x in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let s = GroupState::new(x, x).unwrap();
            let a = allocate_real(&s, &params(100)).unwrap();
            assert_eq!(a.high[0], a.high[1]);
            assert_eq!(a.low[0], a.low[1]);
        }
    }

    #[test]
    fn boundary_formulas_agree() {
        let s = GroupState::new(0.25, 0.35).unwrap();
        let over = allocate_fractions(&s, 0.3).unwrap();
        let over = Allocation {
            high: over.high.map(|v| v * 100.0),
            low: over.low,
            regime: over.regime,
        };
        // evaluate the under-subscribed formula at the same point
        let x = s.total();
        let residual = 0.6 - x;
        let under_high = [25.0, 35.0];
        let under_low = [
            (1.0 - 0.25) / (2.0 - x) * residual * 100.0,
            (1.0 - 0.35) / (2.0 - x) * residual * 100.0,
        ];
        for i in 0..2 {
            assert!((over.high[i] - under_high[i]).abs() < 1e-12);
            assert!((over.low[i] - under_low[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_tie_goes_to_a() {
        let s = GroupState::from_counts(70, 10, 100).unwrap();
        let a = allocate_integer(&s, &params(100)).unwrap();
        assert_eq!(a.high, [53, 7]);
        assert_eq!(a.low, [0, 0]);
        assert_eq!(a.total(), 60);
    }

    #[test]
    fn integer_exact_when_real_is_integral() {
        let s = GroupState::from_counts(10, 40, 100).unwrap();
        let a = allocate_integer(&s, &params(100)).unwrap();
        assert_eq!(a.high, [10, 40]);
        assert_eq!(a.low, [6, 4]);
        assert_eq!(a.admits(), [16, 44]);
    }

    #[test]
    fn integer_all_low_population() {
        let s = GroupState::from_counts(0, 0, 100).unwrap();
        let a = allocate_integer(&s, &params(100)).unwrap();
        assert_eq!(a.low, [30, 30]);
        assert_eq!(a.regime, Regime::UnderSubscribed);
    }

    #[test]
    fn integer_requires_counts() {
        let s = GroupState::new(0.1, 0.2).unwrap();
        assert!(allocate_integer(&s, &params(100)).is_err());
    }

    #[test]
    fn zero_capacity_is_handled() {
        let p = ModelParams::new(0.2, 0.9, 0.4, 0.0, 1).unwrap();
        assert_eq!(p.capacity(), 0);
        let s = GroupState::from_counts(0, 0, 1).unwrap();
        let a = allocate_integer(&s, &p).unwrap();
        assert_eq!(a.total(), 0);
    }

    #[test]
    fn property_checker_examples() {
        let p = params(100);
        let s = GroupState::new(0.7, 0.1).unwrap();
        let a = allocate_real(&s, &p).unwrap();
        let r = check_properties(&s, &a, &p);
        assert!(r.meritocratic && r.fair() && r.efficient);

        let mut swapped = a;
        swapped.high = [7.5, 52.5];
        assert!(!check_properties(&s, &swapped, &p).fair());

        let mut short = a;
        short.high[0] -= 1.0;
        assert!(!check_properties(&s, &short, &p).efficient);

        let u = GroupState::new(0.1, 0.4).unwrap();
        let mut greedy = allocate_real(&u, &p).unwrap();
        greedy.high[0] -= 1.0;
        greedy.low[0] += 1.0;
        assert!(!check_properties(&u, &greedy, &p).meritocratic);
    }

    #[test]
    fn integer_fairness_verdicts() {
        let p = params(100);
        let exact = GroupState::from_counts(10, 40, 100).unwrap();
        let a = allocate_integer(&exact, &p).unwrap();
        let r = check_integer_properties(&exact, &a, &p).unwrap();
        assert_eq!(r.fairness, Fairness::Fair);
        assert!(r.meritocratic && r.efficient);

        let tie = GroupState::from_counts(70, 10, 100).unwrap();
        let a = allocate_integer(&tie, &p).unwrap();
        let r = check_integer_properties(&tie, &a, &p).unwrap();
        assert_eq!(r.fairness, Fairness::IntegerInfeasible);

        let wrong = IntegerAllocation {
            high: [11, 39],
            low: [6, 4],
            regime: Regime::UnderSubscribed,
            capacity: 60,
        };
        let r = check_integer_properties(&exact, &wrong, &p).unwrap();
        assert_eq!(r.fairness, Fairness::Unfair);
    }
}
