//! Users, services, request rates and per-network OFDM modulation profiles.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ZoneId;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(UserId, "u");
id_type!(ServiceId, "k");
id_type!(NetworkId, "r");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("request rate must be finite and non-negative, got {0}")]
    NegativeRate(f64),
    #[error("network {network}: {field} must be at least 1")]
    ZeroCount { network: NetworkId, field: &'static str },
    #[error("subcarrier counts must be non-decreasing: {prev} has {prev_k}, {next} has {next_k}")]
    SubcarrierOrder { prev: NetworkId, prev_k: u32, next: NetworkId, next_k: u32 },
}

/// Base request rate `τ^{i,k}_z` of one user for one service.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDemand {
    pub user: UserId,
    pub service: ServiceId,
    pub zone: ZoneId,
    pub base_rate: f64,
}

impl ServiceDemand {
    pub fn new(user: UserId, service: ServiceId, zone: ZoneId, base_rate: f64) -> Result<Self, TrafficError> {
        if base_rate >= 0.0 && base_rate.is_finite() {
            Ok(ServiceDemand { user, service, zone, base_rate })
        } else {
            Err(TrafficError::NegativeRate(base_rate))
        }
    }
}

/// OFDM parameters of a network as seen by one user at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulationProfile {
    pub network: NetworkId,
    /// `K_r`
    pub subcarriers: u32,
    /// `N_of`
    pub ofdm_symbols: u32,
    /// `N_bit`
    pub bits_per_symbol: u32,
}

impl ModulationProfile {
    pub fn new(network: NetworkId, subcarriers: u32, ofdm_symbols: u32, bits_per_symbol: u32) -> Result<Self, TrafficError> {
        let p = ModulationProfile { network, subcarriers, ofdm_symbols, bits_per_symbol };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        for (field, v) in [
            ("subcarriers", self.subcarriers),
            ("ofdm_symbols", self.ofdm_symbols),
            ("bits_per_symbol", self.bits_per_symbol),
        ] {
            if v == 0 {
                return Err(TrafficError::ZeroCount { network: self.network, field });
            }
        }
        Ok(())
    }

    /// Bits carried per resource unit, `K_r·N_of·N_bit`.
    pub fn bits_per_unit(&self) -> f64 {
        self.subcarriers as f64 * self.ofdm_symbols as f64 * self.bits_per_symbol as f64
    }

    /// Same network, different per-user symbol/bit counts.
    pub fn with_modulation(self, ofdm_symbols: u32, bits_per_symbol: u32) -> Self {
        ModulationProfile { ofdm_symbols, bits_per_symbol, ..self }
    }
}

/// Checks `K_r ≤ K_{r+1}` over an ordered network list, reporting every breach.
pub fn check_subcarrier_order(profiles: &[ModulationProfile]) -> Vec<TrafficError> {
    profiles
        .windows(2)
        .filter(|w| w[0].subcarriers > w[1].subcarriers)
        .map(|w| TrafficError::SubcarrierOrder {
            prev: w[0].network,
            prev_k: w[0].subcarriers,
            next: w[1].network,
            next_k: w[1].subcarriers,
        })
        .collect()
}

/// Presence-scaled request rate `P_z·τ^{i,k}_z`.
pub fn effective_request_rate(d: &ServiceDemand, presence: f64) -> f64 {
    presence * d.base_rate
}
