//! 2D fluid-flow mobility: boundary-crossing (exit) rate and handover rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{zone_perimeter, GeometryError, ServiceArea, Zone, ZoneId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MobilityError {
    #[error("mean speed must be finite and non-negative, got {0}")]
    NegativeSpeed(f64),
    #[error("division by a zero-area region")]
    ZeroArea,
    #[error("handover context fields must be non-negative (count {count}, exit rate {exit_rate})")]
    InvalidHandover { count: f64, exit_rate: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Mean user speed `E(v)` in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub mean_speed: f64,
}

impl MobilityParams {
    pub fn new(mean_speed: f64) -> Result<Self, MobilityError> {
        if mean_speed >= 0.0 && mean_speed.is_finite() {
            Ok(MobilityParams { mean_speed })
        } else {
            Err(MobilityError::NegativeSpeed(mean_speed))
        }
    }
}

/// Inputs of the handover rate for one (service, zone) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverContext {
    /// Users active on the service in the zone (`U^k_z`).
    pub active_count: f64,
    /// Zone exit rate `τ_{z,z'}` in 1/s.
    pub exit_rate: f64,
}

/// Fluid-flow exit rate `E(v)·L_cell / (π·A_area)`.
///
/// The perimeter is that of the cell, the area that of the whole service area.
pub fn exit_rate(params: MobilityParams, cell: &Zone, area: &ServiceArea) -> Result<f64, MobilityError> {
    if !(params.mean_speed >= 0.0) {
        return Err(MobilityError::NegativeSpeed(params.mean_speed));
    }
    let perimeter = zone_perimeter(cell)?;
    let a = area.total_area();
    if !(a > 0.0) {
        return Err(MobilityError::ZeroArea);
    }
    Ok(params.mean_speed * perimeter / (PI * a))
}

/// Exit rate for any zone of the partition.
///
/// A wireless subzone uses its own perimeter. The uncovered region's inner
/// boundary is the union of all subzone perimeters, so its rate is the sum of
/// the subzone rates (zero when there are no subzones).
pub fn zone_exit_rate(params: MobilityParams, zone: ZoneId, area: &ServiceArea) -> Result<f64, MobilityError> {
    match zone {
        ZoneId::UNCOVERED => area
            .subzones()
            .iter()
            .map(|cell| exit_rate(params, cell, area))
            .sum(),
        ZoneId::SERVICE_AREA => exit_rate(params, area.area_zone(), area),
        id => {
            let cell = area.subzone(id).ok_or(GeometryError::UnknownZone(id))?;
            exit_rate(params, cell, area)
        }
    }
}

/// Average handover rate `τ^H = U·τ_exit`.
pub fn handover_rate(ctx: HandoverContext) -> Result<f64, MobilityError> {
    if !(ctx.active_count >= 0.0) || !(ctx.exit_rate >= 0.0) {
        return Err(MobilityError::InvalidHandover { count: ctx.active_count, exit_rate: ctx.exit_rate });
    }
    Ok(ctx.active_count * ctx.exit_rate)
}
