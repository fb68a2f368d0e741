//! Classical schedulers over a single divisible resource pool per step.
//!
//! Allocating schedulers split `capacity` among users. Opportunistic ones
//! (MaxSNR, proportional fair) pick one user who receives the whole slot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error("user {user}: weight must be positive, got {value}")]
    NonPositiveWeight { user: usize, value: f64 },
    #[error("user {user}: average rate must be positive, got {value}")]
    NonPositiveAverageRate { user: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedUser {
    /// Units the user asks for; may be infinite.
    pub demand: f64,
    pub weight: f64,
    pub snr: f64,
    pub instantaneous_rate: f64,
    pub average_rate: f64,
}

impl Default for SchedUser {
    fn default() -> Self {
        SchedUser { demand: f64::INFINITY, weight: 1.0, snr: 0.0, instantaneous_rate: 0.0, average_rate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SchedulerInput {
    pub capacity: f64,
    pub users: Vec<SchedUser>,
}

impl SchedulerInput {
    pub fn with_demands(capacity: f64, demands: &[f64]) -> Self {
        SchedulerInput {
            capacity,
            users: demands.iter().map(|&demand| SchedUser { demand, ..Default::default() }).collect(),
        }
    }
}

/// Equal split of the capacity.
pub fn round_robin(input: &SchedulerInput) -> Vec<f64> {
    let n = input.users.len();
    vec![input.capacity / n as f64; n]
}

/// Each of the N active users is served at `D/N`. On a single pool this is
/// the same split as [`round_robin`].
pub fn fair_queuing(input: &SchedulerInput) -> Vec<f64> {
    round_robin(input)
}

/// Hands out the capacity one unit at a time to uniformly drawn users; a
/// fractional remainder goes to one more draw.
pub fn random_access(input: &SchedulerInput, seed: u64) -> Vec<f64> {
    let n = input.users.len();
    let mut shares = vec![0.0; n];
    if n == 0 || !(input.capacity > 0.0) {
        return shares;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let whole = input.capacity.floor();
    for _ in 0..whole as u64 {
        shares[rng.gen_range(0..n)] += 1.0;
    }
    let rest = input.capacity - whole;
    if rest > 0.0 {
        shares[rng.gen_range(0..n)] += rest;
    }
    shares
}

/// Water-filling: raise a common level for all users, freezing each one at
/// its demand, until the capacity runs out.
pub fn max_min_fair(input: &SchedulerInput) -> Vec<f64> {
    let n = input.users.len();
    let mut shares = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| input.users[a].demand.total_cmp(&input.users[b].demand));
    let mut remaining = input.capacity.max(0.0);
    for (pos, &i) in order.iter().enumerate() {
        let level = remaining / (n - pos) as f64;
        let demand = input.users[i].demand.max(0.0);
        let take = demand.min(level);
        shares[i] = take;
        remaining -= take;
    }
    shares
}

/// Capacity split in proportion to weights, each user capped at its demand
/// with the excess redistributed among the rest by weight.
pub fn weighted_fair_queuing(input: &SchedulerInput) -> Result<Vec<f64>, SchedulerError> {
    for (user, u) in input.users.iter().enumerate() {
        if !(u.weight > 0.0 && u.weight.is_finite()) {
            return Err(SchedulerError::NonPositiveWeight { user, value: u.weight });
        }
    }
    let n = input.users.len();
    let mut shares = vec![0.0; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut remaining = input.capacity.max(0.0);
    while !active.is_empty() && remaining > 0.0 {
        let total_weight: f64 = active.iter().map(|&i| input.users[i].weight).sum();
        let saturated: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| {
                let u = &input.users[i];
                u.demand.max(0.0) - shares[i] <= remaining * u.weight / total_weight
            })
            .collect();
        if saturated.is_empty() {
            for &i in &active {
                shares[i] += remaining * input.users[i].weight / total_weight;
            }
            break;
        }
        for &i in &saturated {
            let top_up = input.users[i].demand.max(0.0) - shares[i];
            shares[i] += top_up;
            remaining -= top_up;
        }
        active.retain(|i| !saturated.contains(i));
    }
    Ok(shares)
}

/// First index holding the largest score.
fn argmax(scores: impl Iterator<Item = f64>) -> Option<usize> {
    scores
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
            Some((_, b)) if s <= b => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i)
}

/// User with the highest SNR; lowest index on ties. `None` without users.
pub fn max_snr(input: &SchedulerInput) -> Option<usize> {
    argmax(input.users.iter().map(|u| u.snr))
}

/// User with the highest instantaneous-to-average rate ratio.
pub fn proportional_fair(input: &SchedulerInput) -> Result<Option<usize>, SchedulerError> {
    for (user, u) in input.users.iter().enumerate() {
        if !(u.average_rate > 0.0) {
            return Err(SchedulerError::NonPositiveAverageRate { user, value: u.average_rate });
        }
    }
    Ok(argmax(input.users.iter().map(|u| u.instantaneous_rate / u.average_rate)))
}

/// Gives the whole capacity to one user.
pub fn whole_slot(n: usize, winner: Option<usize>, capacity: f64) -> Vec<f64> {
    let mut shares = vec![0.0; n];
    if let Some(i) = winner {
        shares[i] = capacity;
    }
    shares
}
