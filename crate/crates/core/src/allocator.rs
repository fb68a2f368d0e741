//! Per-user allocation, occupancy, network selection, capacity enforcement
//! and resource-state evolution.
//!
//! Resource units are real-valued throughout. Only reports round them down.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ZoneId;
use crate::traffic::{ModulationProfile, NetworkId, UserId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("{what} must be finite and non-negative, got {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("total drain fraction {0} exceeds 1")]
    InfeasibleDrain(f64),
    #[error("no network covers the user's zone")]
    NoCoverage,
    #[error("unknown resource pool ({zone}, {network})")]
    UnknownPool { zone: ZoneId, network: NetworkId },
}

fn non_negative(what: &'static str, value: f64) -> Result<f64, AllocError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(AllocError::Domain { what, value })
    }
}

/// A (zone, network) resource pool key.
pub type Pool = (ZoneId, NetworkId);

/// Available units `x^t_{z,r}` for every pool at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceState {
    pub step: usize,
    available: BTreeMap<Pool, f64>,
}

impl ResourceState {
    pub fn new(initial: BTreeMap<Pool, f64>) -> Result<Self, AllocError> {
        for &x in initial.values() {
            non_negative("available resources", x)?;
        }
        Ok(ResourceState { step: 0, available: initial })
    }

    pub fn get(&self, zone: ZoneId, network: NetworkId) -> Option<f64> {
        self.available.get(&(zone, network)).copied()
    }

    pub fn pools(&self) -> &BTreeMap<Pool, f64> {
        &self.available
    }

    /// Removes `granted` units from a pool by applying the transfer
    /// `x ← x·(1 − granted/x)`. Returns the new level.
    pub fn drain(&mut self, pool: Pool, granted: f64) -> Result<f64, AllocError> {
        let x = self
            .available
            .get_mut(&pool)
            .ok_or(AllocError::UnknownPool { zone: pool.0, network: pool.1 })?;
        non_negative("granted units", granted)?;
        if granted == 0.0 {
            return Ok(*x);
        }
        // rounding in the caller's capacity scaling can push this a hair past 1
        let mut w = granted / *x;
        if w > 1.0 && w <= 1.0 + 1e-12 {
            w = 1.0;
        }
        *x = step_state(*x, w)?;
        Ok(*x)
    }

    pub fn advance(&mut self) {
        self.step += 1;
    }
}

/// One user's grant `y^{i,t}_{z,r}` and the bits it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRecord {
    pub user: UserId,
    pub zone: ZoneId,
    pub network: NetworkId,
    pub step: usize,
    pub granted: f64,
    pub occupancy: f64,
}

/// Rate and handover rate of one requested service.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceLoad {
    /// `τ^{i,k}_z`
    pub rate: f64,
    /// `τ^H_z`
    pub handover: f64,
}

impl ServiceLoad {
    pub fn new(rate: f64, handover: f64) -> Self {
        ServiceLoad { rate, handover }
    }
}

/// Fraction of available units a user takes: `Σ_k (P + τ^H_k)·τ_k`.
pub fn drain_fraction(presence: f64, loads: &[ServiceLoad]) -> Result<f64, AllocError> {
    if !(0.0..=1.0).contains(&presence) {
        return Err(AllocError::Domain { what: "presence probability", value: presence });
    }
    loads.iter().try_fold(0.0, |acc, l| {
        let rate = non_negative("request rate", l.rate)?;
        let h = non_negative("handover rate", l.handover)?;
        Ok(acc + (presence + h) * rate)
    })
}

/// Units granted to one user: `y = Σ_k x·(P + τ^H_k)·τ_k`.
pub fn allocate_user(available: f64, presence: f64, loads: &[ServiceLoad]) -> Result<f64, AllocError> {
    let x = non_negative("available resources", available)?;
    Ok(x * drain_fraction(presence, loads)?)
}

/// Bits carried by `granted` units on one network, `K_r·N_of·N_bit·y`.
pub fn occupancy_single(profile: &ModulationProfile, granted: f64) -> f64 {
    profile.bits_per_unit() * granted
}

/// One network's offer to a user when choosing by occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub network: NetworkId,
    pub available: f64,
    pub occupancy: f64,
}

/// Network maximizing occupancy. Ties go to more available units, then to
/// the smaller network id.
pub fn occupancy_heterogeneous(candidates: &[Candidate]) -> Result<(NetworkId, f64), AllocError> {
    candidates
        .iter()
        .copied()
        .reduce(|best, c| {
            let wins = c.occupancy > best.occupancy
                || (c.occupancy == best.occupancy
                    && (c.available > best.available
                        || (c.available == best.available && c.network < best.network)));
            if wins {
                c
            } else {
                best
            }
        })
        .map(|c| (c.network, c.occupancy))
        .ok_or(AllocError::NoCoverage)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkChoice {
    Mobile,
    Wireless,
    Blocked,
}

/// Whether a pool holding `available` units can serve a request of `need` units.
/// An empty pool serves nobody.
pub fn can_serve(available: f64, need: f64) -> bool {
    available > 0.0 && available >= need
}

/// Access decision between the mobile network and the local wireless one:
/// prefer the network with more available units, fall back to the other,
/// otherwise block. Equal availability prefers the mobile network.
pub fn select_network(x_mobile: f64, x_wireless: f64, need: f64) -> NetworkChoice {
    let (first, second) = if x_mobile >= x_wireless {
        ((NetworkChoice::Mobile, x_mobile), (NetworkChoice::Wireless, x_wireless))
    } else {
        ((NetworkChoice::Wireless, x_wireless), (NetworkChoice::Mobile, x_mobile))
    };
    if can_serve(first.1, need) {
        first.0
    } else if can_serve(second.1, need) {
        second.0
    } else {
        NetworkChoice::Blocked
    }
}

/// Scales requests down proportionally so their sum never exceeds `available`.
pub fn enforce_capacity(requests: &[f64], available: f64) -> Vec<f64> {
    let total: f64 = requests.iter().sum();
    if total <= available || total == 0.0 {
        return requests.to_vec();
    }
    let scale = available / total;
    requests.iter().map(|r| r * scale).collect()
}

/// Admits requests in order while they fit, blocking the rest whole.
/// Returns the admitted grants (zero where blocked) and blocked indices.
pub fn enforce_capacity_blocking(requests: &[f64], available: f64) -> (Vec<f64>, Vec<usize>) {
    let mut used = 0.0;
    let mut blocked = Vec::new();
    let grants = requests
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if used + r <= available {
                used += r;
                r
            } else {
                blocked.push(i);
                0.0
            }
        })
        .collect();
    (grants, blocked)
}

/// One step of the resource recursion, `x·(1 − w)`.
pub fn step_state(available: f64, drain: f64) -> Result<f64, AllocError> {
    let x = non_negative("available resources", available)?;
    let w = non_negative("drain fraction", drain)?;
    if w > 1.0 {
        return Err(AllocError::InfeasibleDrain(w));
    }
    Ok(x * (1.0 - w))
}

/// Resources after `steps` constant drains, `x0·(1 − w)^steps`.
pub fn closed_form_state(initial: f64, drain: f64, steps: u32) -> Result<f64, AllocError> {
    let x = non_negative("available resources", initial)?;
    let w = non_negative("drain fraction", drain)?;
    if w > 1.0 {
        return Err(AllocError::InfeasibleDrain(w));
    }
    if x == 0.0 || w == 0.0 || steps == 0 {
        return Ok(x);
    }
    if w == 1.0 {
        return Ok(0.0);
    }
    // (1 - w)^steps underflows long before x0·(1 - w)^steps does, so the
    // power is carried as mantissa and binary exponent until the last multiply.
    let (mut acc, mut acc_exp) = (1.0_f64, 0_i64);
    let (mut base, mut base_exp) = split(1.0 - w);
    let mut n = steps;
    while n > 0 {
        if n & 1 == 1 {
            let (m, e) = split(acc * base);
            acc = m;
            acc_exp += e + base_exp;
        }
        n >>= 1;
        if n > 0 {
            let (m, e) = split(base * base);
            base = m;
            base_exp = 2 * base_exp + e;
        }
    }
    let (m, e) = split(x * acc);
    Ok(scale_by_pow2(m, e + acc_exp))
}

fn split(v: f64) -> (f64, i64) {
    let (m, e) = libm::frexp(v);
    (m, e as i64)
}

fn scale_by_pow2(mut v: f64, mut exp: i64) -> f64 {
    // ldexp in bounded chunks so only the final multiply can round
    while exp < -1000 {
        v = libm::ldexp(v, -1000);
        exp += 1000;
    }
    while exp > 1000 {
        v = libm::ldexp(v, 1000);
        exp -= 1000;
    }
    libm::ldexp(v, exp as i32)
}
