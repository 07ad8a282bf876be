//! Nonlinear boosts that preserve the 1D Dirac automaton dispersion.
//!
//! A deformation map `𝒟` sends the automaton shell `cos ω = n·cos k` onto a
//! relativistic shell `Ω² − K² = m²`; the deformed boost is then
//! `𝒟⁻¹ ∘ L_β ∘ 𝒟` with `L_β` the ordinary 1+1 boost.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, QcaError, Result};
use crate::spectral::dirac1d_omega;

/// Largest `|cos ω − n·cos k|` for a point to count as on-shell.
pub const ON_SHELL_TOLERANCE: f64 = 1e-12;

/// A frequency/wave-vector pair of the 1D Dirac automaton.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyMomentum {
    pub omega: f64,
    pub k: f64,
    pub mass: f64,
}

impl EnergyMomentum {
    /// The positive-frequency point of the shell at `k`.
    pub fn on_shell_at(mass: f64, k: f64) -> Self {
        Self {
            omega: dirac1d_omega(mass, k),
            k,
            mass,
        }
    }

    /// `|cos ω − √(1−m²)·cos k|`.
    pub fn on_shell_residual(&self) -> f64 {
        let n = ((1.0 - self.mass) * (1.0 + self.mass)).sqrt();
        (self.omega.cos() - n * self.k.cos()).abs()
    }

    pub fn is_on_shell(&self) -> bool {
        self.on_shell_residual() < ON_SHELL_TOLERANCE
    }
}

/// Invertible map from automaton `(ω, k)` to relativistic `(Ω, K)`.
pub trait DeformationMap: Send + Sync {
    fn mass(&self) -> f64;
    fn forward(&self, omega: f64, k: f64) -> Result<(f64, f64)>;
    fn inverse(&self, big_omega: f64, big_k: f64) -> Result<(f64, f64)>;
    /// Human-readable validity domain.
    fn domain(&self) -> String;
}

/// `(Ω, K) = (sin ω, √(1−m²)·sin k)` on `ω ∈ [0, π/2]`, `|k| ≤ π/2`.
///
/// On the shell `sin²ω = 1 − n²cos²k = m² + n²sin²k`, so the image satisfies
/// `Ω² − K² = m²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineDeformation {
    mass: f64,
    n: f64,
}

pub fn default_deformation(mass: f64) -> Result<SineDeformation> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(invalid("mass", format!("{mass} outside (0, 1)")));
    }
    Ok(SineDeformation {
        mass,
        n: ((1.0 - mass) * (1.0 + mass)).sqrt(),
    })
}

impl DeformationMap for SineDeformation {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn forward(&self, omega: f64, k: f64) -> Result<(f64, f64)> {
        let (big_omega, big_k) = (omega.sin(), self.n * k.sin());
        if !(0.0..=FRAC_PI_2).contains(&omega) || !(k.abs() <= FRAC_PI_2) {
            return Err(QcaError::OutOfDomain {
                omega,
                k,
                big_omega,
                big_k,
            });
        }
        Ok((big_omega, big_k))
    }

    fn inverse(&self, big_omega: f64, big_k: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&big_omega) || !(big_k.abs() <= self.n) {
            return Err(QcaError::OutOfDomain {
                omega: f64::NAN,
                k: f64::NAN,
                big_omega,
                big_k,
            });
        }
        Ok((big_omega.asin(), (big_k / self.n).asin()))
    }

    fn domain(&self) -> String {
        format!("omega in [0, pi/2], |k| <= pi/2 (m = {})", self.mass)
    }
}

/// Ordinary 1+1 boost of `(Ω, K)` with velocity `β`.
pub fn lorentz_boost(beta: f64, big_omega: f64, big_k: f64) -> (f64, f64) {
    let gamma = 1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt();
    (gamma * (big_omega - beta * big_k), gamma * (big_k - beta * big_omega))
}

/// `𝒟⁻¹ ∘ L_β ∘ 𝒟` applied to an on-shell point.
pub fn deformed_boost(beta: f64, p: &EnergyMomentum, map: &dyn DeformationMap) -> Result<EnergyMomentum> {
    if !(beta > -1.0 && beta < 1.0) {
        return Err(invalid("beta", format!("{beta} outside (-1, 1)")));
    }
    if (p.mass - map.mass()).abs() > 1e-15 {
        return Err(invalid("mass", format!("point has m = {}, map has m = {}", p.mass, map.mass())));
    }
    if !p.is_on_shell() {
        return Err(invalid("p", format!("off shell by {:.3e}", p.on_shell_residual())));
    }
    let (big_omega, big_k) = map.forward(p.omega, p.k)?;
    let (bo, bk) = lorentz_boost(beta, big_omega, big_k);
    let (omega, k) = map.inverse(bo, bk).map_err(|_| QcaError::OutOfDomain {
        omega: p.omega,
        k: p.k,
        big_omega: bo,
        big_k: bk,
    })?;
    Ok(EnergyMomentum {
        omega,
        k,
        mass: p.mass,
    })
}

/// One row of a boost-orbit export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub beta: f64,
    pub omega: f64,
    pub k: f64,
    pub big_omega: f64,
    pub big_k: f64,
    pub onshell_residual: f64,
}

/// Images of `p` under a list of boosts; points leaving the domain are errors.
pub fn boost_orbit(p: &EnergyMomentum, betas: &[f64], map: &dyn DeformationMap) -> Result<Vec<OrbitPoint>> {
    betas
        .iter()
        .map(|&beta| {
            let q = deformed_boost(beta, p, map)?;
            let (big_omega, big_k) = map.forward(q.omega, q.k)?;
            Ok(OrbitPoint {
                beta,
                omega: q.omega,
                k: q.k,
                big_omega,
                big_k,
                onshell_residual: q.on_shell_residual(),
            })
        })
        .collect()
}
