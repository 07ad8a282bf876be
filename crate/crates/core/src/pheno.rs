//! Order-of-magnitude phenomenology in Planck units.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::automata::{Chirality, WaveVector};
use crate::error::{invalid, QcaError, Result};
use crate::maxwell::light_speed;

/// Planck units in SI. Every headline number is derived from these three.
pub mod planck {
    pub const LENGTH_M: f64 = 1.616255e-35;
    pub const TIME_S: f64 = 5.391247e-44;
    pub const MASS_KG: f64 = 2.176434e-8;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Length,
    Time,
    Mass,
    Wavevector,
}

impl Dimension {
    /// SI value of one Planck unit of this dimension.
    fn si_per_planck(self) -> f64 {
        match self {
            Dimension::Length => planck::LENGTH_M,
            Dimension::Time => planck::TIME_S,
            Dimension::Mass => planck::MASS_KG,
            Dimension::Wavevector => 1.0 / planck::LENGTH_M,
        }
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Mass => "kg",
            Dimension::Wavevector => "1/m",
        }
    }
}

impl FromStr for Dimension {
    type Err = QcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "length" => Ok(Dimension::Length),
            "time" => Ok(Dimension::Time),
            "mass" => Ok(Dimension::Mass),
            "wavevector" => Ok(Dimension::Wavevector),
            _ => Err(invalid("dimension", format!("unknown dimension `{s}`"))),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Mass => "mass",
            Dimension::Wavevector => "wavevector",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Planck,
    Si,
}

impl FromStr for UnitSystem {
    type Err = QcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "planck" => Ok(UnitSystem::Planck),
            "si" => Ok(UnitSystem::Si),
            _ => Err(invalid("system", format!("unknown unit system `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanckQuantity {
    pub value: f64,
    pub dimension: Dimension,
    pub system: UnitSystem,
}

impl PlanckQuantity {
    pub fn planck(value: f64, dimension: Dimension) -> Self {
        Self {
            value,
            dimension,
            system: UnitSystem::Planck,
        }
    }

    pub fn si(value: f64, dimension: Dimension) -> Self {
        Self {
            value,
            dimension,
            system: UnitSystem::Si,
        }
    }

    pub fn in_planck(&self) -> f64 {
        unit_convert(self, UnitSystem::Planck).value
    }

    pub fn in_si(&self) -> f64 {
        unit_convert(self, UnitSystem::Si).value
    }
}

pub fn unit_convert(q: &PlanckQuantity, target: UnitSystem) -> PlanckQuantity {
    let scale = q.dimension.si_per_planck();
    let value = match (q.system, target) {
        (UnitSystem::Planck, UnitSystem::Si) => q.value * scale,
        (UnitSystem::Si, UnitSystem::Planck) => q.value / scale,
        _ => q.value,
    };
    PlanckQuantity {
        value,
        dimension: q.dimension,
        system: target,
    }
}

fn expect(q: &PlanckQuantity, dim: Dimension, name: &'static str) -> Result<f64> {
    if q.dimension != dim {
        return Err(invalid(name, format!("expected a {dim}, got a {}", q.dimension)));
    }
    Ok(q.in_planck())
}

/// Time for the two branches of a massive packet of width `σ̂` to separate,
/// `t ≈ 6σ̂/m²`, in Planck time.
pub fn travel_time_separation(mass: &PlanckQuantity, width: &PlanckQuantity) -> Result<PlanckQuantity> {
    let m = expect(mass, Dimension::Mass, "mass")?;
    let s = expect(width, Dimension::Length, "width")?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(invalid("mass", "must be positive"));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid("width", "must be positive"));
    }
    Ok(PlanckQuantity::planck(6.0 * s / (m * m), Dimension::Time))
}

/// Arrival-time difference `L·|1/c(k₁) − 1/c(k₂)|` of two photon modes over
/// a distance `L`, with the light speed of the default-chirality automaton.
pub fn grb_time_lag(distance: &PlanckQuantity, k1: &WaveVector, k2: &WaveVector) -> Result<PlanckQuantity> {
    let l = expect(distance, Dimension::Length, "distance")?;
    let c1 = light_speed(k1, Chirality::Minus)?;
    let c2 = light_speed(k2, Chirality::Minus)?;
    Ok(PlanckQuantity::planck(l * (1.0 / c1 - 1.0 / c2).abs(), Dimension::Time))
}

/// A value reported in both systems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportValue {
    pub dimension: Dimension,
    pub planck: f64,
    pub si: f64,
    pub si_unit: &'static str,
}

impl From<PlanckQuantity> for ReportValue {
    fn from(q: PlanckQuantity) -> Self {
        Self {
            dimension: q.dimension,
            planck: q.in_planck(),
            si: q.in_si(),
            si_unit: q.dimension.si_unit(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TravelTimeReport {
    pub mass: ReportValue,
    pub width: ReportValue,
    pub separation_time: ReportValue,
}

pub fn travel_time_report(mass: &PlanckQuantity, width: &PlanckQuantity) -> Result<TravelTimeReport> {
    Ok(TravelTimeReport {
        mass: (*mass).into(),
        width: (*width).into(),
        separation_time: travel_time_separation(mass, width)?.into(),
    })
}
