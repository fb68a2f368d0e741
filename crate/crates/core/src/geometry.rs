//! Circular service area, its wireless sub-zones and the uncovered remainder.
//!
//! The service area is a single circle fully covered by the mobile network.
//! Wireless sub-zones are circles strictly inside it and pairwise disjoint.
//! The uncovered region is the set difference between the two and is never
//! stored as a shape; only its area is derived.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Zone identifier. `0` is the uncovered region, `1` the whole service area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub u32);

impl ZoneId {
    pub const UNCOVERED: ZoneId = ZoneId(0);
    pub const SERVICE_AREA: ZoneId = ZoneId(1);
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoneKind {
    ServiceArea,
    WirelessSubzone,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("zone {id} has non-positive radius {radius}")]
    InvalidZone { id: ZoneId, radius: f64 },
    #[error("subzone {id} is not contained in the service area")]
    NotContained { id: ZoneId },
    #[error("subzones {a} and {b} overlap")]
    Overlap { a: ZoneId, b: ZoneId },
    #[error("duplicate zone id {0}")]
    DuplicateId(ZoneId),
    #[error("zone id {0} is reserved")]
    ReservedId(ZoneId),
    #[error("unknown zone {0}")]
    UnknownZone(ZoneId),
}

/// A circular zone in the plane (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: ZoneId,
    pub center: Point,
    pub radius: f64,
    pub kind: ZoneKind,
}

impl Zone {
    pub fn new(id: ZoneId, center: Point, radius: f64, kind: ZoneKind) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidZone { id, radius });
        }
        Ok(Zone { id, center, radius, kind })
    }

    pub fn subzone(id: ZoneId, center: Point, radius: f64) -> Result<Self, GeometryError> {
        Zone::new(id, center, radius, ZoneKind::WirelessSubzone)
    }

    /// Tests whether `other` lies entirely inside this circle.
    pub fn contains(&self, other: &Zone) -> bool {
        self.center.distance(&other.center) + other.radius <= self.radius
    }

    pub fn is_disjoint(&self, other: &Zone) -> bool {
        self.center.distance(&other.center) >= self.radius + other.radius
    }
}

/// Area `π·r²` of a zone.
pub fn zone_area(z: &Zone) -> Result<f64, GeometryError> {
    check_radius(z)?;
    Ok(PI * z.radius * z.radius)
}

/// Perimeter `2π·r` of a zone.
pub fn zone_perimeter(z: &Zone) -> Result<f64, GeometryError> {
    check_radius(z)?;
    Ok(2.0 * PI * z.radius)
}

fn check_radius(z: &Zone) -> Result<(), GeometryError> {
    if z.radius > 0.0 && z.radius.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidZone { id: z.id, radius: z.radius })
    }
}

/// The global zone plus its wireless sub-zones. Validated on construction and
/// immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceArea {
    area_zone: Zone,
    subzones: Vec<Zone>,
}

impl ServiceArea {
    /// Builds a service area centered at the origin.
    pub fn new(radius: f64, subzones: Vec<Zone>) -> Result<Self, GeometryError> {
        match Self::check(radius, &subzones).into_iter().next() {
            Some(err) => Err(err),
            None => Ok(ServiceArea {
                area_zone: Zone {
                    id: ZoneId::SERVICE_AREA,
                    center: Point::default(),
                    radius,
                    kind: ZoneKind::ServiceArea,
                },
                subzones,
            }),
        }
    }

    /// Lists every layout violation instead of stopping at the first one.
    pub fn check(radius: f64, subzones: &[Zone]) -> Vec<GeometryError> {
        let mut errors = Vec::new();
        if !(radius > 0.0) || !radius.is_finite() {
            errors.push(GeometryError::InvalidZone { id: ZoneId::SERVICE_AREA, radius });
        }
        let area = Zone {
            id: ZoneId::SERVICE_AREA,
            center: Point::default(),
            radius,
            kind: ZoneKind::ServiceArea,
        };
        for (i, z) in subzones.iter().enumerate() {
            if z.id == ZoneId::UNCOVERED || z.id == ZoneId::SERVICE_AREA {
                errors.push(GeometryError::ReservedId(z.id));
            }
            if subzones[..i].iter().any(|o| o.id == z.id) {
                errors.push(GeometryError::DuplicateId(z.id));
            }
            if let Err(e) = check_radius(z) {
                errors.push(e);
                continue;
            }
            if !area.contains(z) {
                errors.push(GeometryError::NotContained { id: z.id });
            }
            for other in &subzones[..i] {
                if other.radius > 0.0 && !z.is_disjoint(other) {
                    errors.push(GeometryError::Overlap { a: other.id, b: z.id });
                }
            }
        }
        errors
    }

    pub fn area_zone(&self) -> &Zone {
        &self.area_zone
    }

    pub fn subzones(&self) -> &[Zone] {
        &self.subzones
    }

    pub fn subzone(&self, id: ZoneId) -> Option<&Zone> {
        self.subzones.iter().find(|z| z.id == id)
    }

    /// `A(z_tot)`.
    pub fn total_area(&self) -> f64 {
        PI * self.area_zone.radius * self.area_zone.radius
    }

    /// Area of any zone known to this service area, including the uncovered one.
    pub fn area_of(&self, id: ZoneId) -> Result<f64, GeometryError> {
        match id {
            ZoneId::UNCOVERED => Ok(uncovered_area(self)),
            ZoneId::SERVICE_AREA => Ok(self.total_area()),
            _ => self
                .subzone(id)
                .ok_or(GeometryError::UnknownZone(id))
                .and_then(zone_area),
        }
    }

    /// `P_z = A(z) / A(z_tot)`. Independent of the user.
    pub fn presence_probability(&self, id: ZoneId) -> Result<f64, GeometryError> {
        Ok(self.area_of(id)? / self.total_area())
    }

    /// Zones partitioning the service area: the uncovered region then every subzone.
    pub fn partition(&self) -> impl Iterator<Item = ZoneId> + '_ {
        std::iter::once(ZoneId::UNCOVERED).chain(self.subzones.iter().map(|z| z.id))
    }
}

/// Area of the service area not covered by any wireless sub-zone.
pub fn uncovered_area(sa: &ServiceArea) -> f64 {
    let covered: f64 = sa.subzones.iter().map(|z| PI * z.radius * z.radius).sum();
    // containment plus disjointness keeps this non-negative up to rounding
    (sa.total_area() - covered).max(0.0)
}

/// Free-function form of [`ServiceArea::presence_probability`].
pub fn presence_probability(z: ZoneId, sa: &ServiceArea) -> Result<f64, GeometryError> {
    sa.presence_probability(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(id: u32, x: f64, y: f64, r: f64) -> Zone {
        Zone::subzone(ZoneId(id), Point::new(x, y), r).unwrap()
    }

    fn five_cells() -> ServiceArea {
        ServiceArea::new(
            500.0,
            vec![
                sub(2, 0.0, 0.0, 100.0),
                sub(3, 300.0, 0.0, 100.0),
                sub(4, -300.0, 0.0, 100.0),
                sub(5, 0.0, 300.0, 100.0),
                sub(6, 0.0, -300.0, 100.0),
            ],
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }

    #[test]
    fn area_and_perimeter() {
        let unit = sub(2, 0.0, 0.0, 1.0);
        assert_eq!(zone_area(&unit).unwrap(), PI);
        assert_eq!(zone_perimeter(&unit).unwrap(), 2.0 * PI);
        assert!(close(zone_area(&sub(2, 0.0, 0.0, 500.0)).unwrap(), 785_398.163_397_448, 1e-6));
        assert!(close(zone_area(&sub(2, 0.0, 0.0, 100.0)).unwrap(), 31_415.926_535_897_9, 1e-9));
        assert!(close(zone_perimeter(&sub(2, 0.0, 0.0, 100.0)).unwrap(), 628.318_530_717_958, 1e-9));
        assert_eq!(zone_perimeter(&sub(2, 0.0, 0.0, 0.5)).unwrap(), PI);
    }

    #[test]
    fn non_positive_radius_rejected() {
        assert!(matches!(
            Zone::subzone(ZoneId(2), Point::default(), 0.0),
            Err(GeometryError::InvalidZone { .. })
        ));
        let bad = Zone { id: ZoneId(2), center: Point::default(), radius: -1.0, kind: ZoneKind::WirelessSubzone };
        assert!(zone_area(&bad).is_err());
        assert!(zone_perimeter(&bad).is_err());
    }

    #[test]
    fn uncovered_area_examples() {
        let empty = ServiceArea::new(500.0, vec![]).unwrap();
        assert_eq!(uncovered_area(&empty), empty.total_area());
        let one = ServiceArea::new(500.0, vec![sub(2, 0.0, 0.0, 100.0)]).unwrap();
        assert!(close(uncovered_area(&one), 753_982.236_861_550, 1e-12));
        assert!(close(uncovered_area(&five_cells()), 628_318.530_717_959, 1e-12));
    }

    #[test]
    fn presence_probability_examples() {
        let sa = five_cells();
        assert_eq!(sa.presence_probability(ZoneId::SERVICE_AREA).unwrap(), 1.0);
        assert!(close(sa.presence_probability(ZoneId(2)).unwrap(), 0.04, 1e-12));
        assert!(close(presence_probability(ZoneId::UNCOVERED, &sa).unwrap(), 0.8, 1e-12));
        assert_eq!(sa.presence_probability(ZoneId(42)), Err(GeometryError::UnknownZone(ZoneId(42))));
    }

    #[test]
    fn layout_violations_are_all_reported() {
        let errs = ServiceArea::check(
            500.0,
            vec![sub(2, 0.0, 0.0, 600.0), sub(3, 0.0, 0.0, 50.0), sub(3, 450.0, 0.0, 10.0)].as_slice(),
        );
        assert!(errs.contains(&GeometryError::NotContained { id: ZoneId(2) }));
        assert!(errs.contains(&GeometryError::Overlap { a: ZoneId(2), b: ZoneId(3) }));
        assert!(errs.contains(&GeometryError::DuplicateId(ZoneId(3))));
        assert!(ServiceArea::new(500.0, vec![sub(1, 0.0, 0.0, 10.0)]).is_err());
    }

    #[test]
    fn tangent_subzones_are_disjoint() {
        assert!(ServiceArea::new(500.0, vec![sub(2, -100.0, 0.0, 100.0), sub(3, 100.0, 0.0, 100.0)]).is_ok());
        assert!(ServiceArea::new(500.0, vec![sub(2, 400.0, 0.0, 100.0)]).is_ok());
    }
}
