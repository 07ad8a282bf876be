//! Scattering of a 1D Dirac packet off a potential step.
//!
//! A potential enters the walk as a site-dependent phase. In position space
//! the step reads
//!
//! ```text
//! R'(x) = e^{−iφ(x)}·[n·R(x−1) + i·m·L(x)]
//! L'(x) = e^{−iφ(x)}·[n·L(x+1) + i·m·R(x)]
//! ```
//!
//! which for `φ ≡ 0` is the momentum coin `[[n e^{−ik}, im], [im, n e^{ik}]]`
//! under the crate's Fourier convention.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::{AutomatonSpec, Model, WaveVector};
use crate::error::{invalid, QcaError, Result};
use crate::packets::{make_packet, LatticeState, MomentumGrid, PacketSpec, Representation};
use crate::spectral::{dirac1d_omega, dirac1d_velocity};

/// Mass left in the interaction region at which a run stops early.
pub const CLEAR_TOLERANCE: f64 = 1e-4;
/// Largest lingering mass accepted when a run has to stop at its step budget.
pub const LINGER_LIMIT: f64 = 1e-3;
/// Mass near the lattice ends beyond which wrap-around would spoil the split.
const GUARD_MASS: f64 = 1e-9;
/// Transmitted probability below which no velocity is measured.
const MIN_TRANSMITTED: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileKind {
    Step { height: f64, edge: usize },
    Custom,
}

/// Site-dependent phase `φ(x)` on a periodic 1D lattice, reduced to `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialProfile {
    pub kind: ProfileKind,
    phases: Vec<f64>,
}

impl PotentialProfile {
    /// `φ(x) = height` for `x ≥ edge`, zero below.
    pub fn step(sites: usize, height: f64, edge: usize) -> Result<Self> {
        if sites == 0 || edge >= sites {
            return Err(invalid("edge", format!("edge {edge} outside a lattice of {sites} sites")));
        }
        if !height.is_finite() {
            return Err(invalid("height", "must be finite"));
        }
        let h = height.rem_euclid(TAU);
        let phases = (0..sites).map(|x| if x >= edge { h } else { 0.0 }).collect();
        Ok(Self {
            kind: ProfileKind::Step { height, edge },
            phases,
        })
    }

    pub fn custom(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(invalid("phases", "empty profile"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(invalid("phases", "non-finite phase"));
        }
        Ok(Self {
            kind: ProfileKind::Custom,
            phases: phases.into_iter().map(|p| p.rem_euclid(TAU)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

/// Precomputed position-space walk for one mass and profile.
struct Walk {
    n: f64,
    im: C64,
    phase: Vec<C64>,
}

impl Walk {
    fn new(automaton: &AutomatonSpec, profile: &PotentialProfile) -> Self {
        Self {
            n: automaton.n_coupling(),
            im: C64::new(0.0, automaton.mass()),
            phase: profile.phases.iter().map(|p| C64::from_polar(1.0, -p)).collect(),
        }
    }

    fn step(&self, src: &[C64], dst: &mut [C64]) {
        let size = self.phase.len();
        let (r, l) = src.split_at(size);
        let (r2, l2) = dst.split_at_mut(size);
        for x in 0..size {
            let left = if x == 0 { size - 1 } else { x - 1 };
            let right = if x + 1 == size { 0 } else { x + 1 };
            let e = self.phase[x];
            r2[x] = e * (self.n * r[left] + self.im * l[x]);
            l2[x] = e * (self.n * l[right] + self.im * r[x]);
        }
    }
}

fn check_walk(state: &LatticeState, profile: &PotentialProfile, automaton: &AutomatonSpec) -> Result<()> {
    if automaton.model != Model::Dirac1d {
        return Err(QcaError::WrongModel {
            expected: "dirac1d",
            got: automaton.model.to_string(),
        });
    }
    if state.representation() != Representation::Position {
        return Err(QcaError::WrongRepresentation { expected: "position" });
    }
    if state.grid().dim() != 1 || state.internal_dim() != 2 {
        return Err(QcaError::DimensionMismatch {
            expected: 2,
            got: state.internal_dim(),
        });
    }
    if profile.len() != state.grid().len() {
        return Err(QcaError::DimensionMismatch {
            expected: state.grid().len(),
            got: profile.len(),
        });
    }
    Ok(())
}

/// One step of the 1D Dirac walk in the presence of `profile`.
pub fn step_with_potential(
    state: &LatticeState,
    profile: &PotentialProfile,
    automaton: &AutomatonSpec,
) -> Result<LatticeState> {
    check_walk(state, profile, automaton)?;
    let walk = Walk::new(automaton, profile);
    let mut out = state.clone().with_step(state.step() + 1);
    walk.step(state.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// `t` steps of [`step_with_potential`].
pub fn evolve_with_potential(
    state: &LatticeState,
    profile: &PotentialProfile,
    automaton: &AutomatonSpec,
    t: usize,
) -> Result<LatticeState> {
    check_walk(state, profile, automaton)?;
    let walk = Walk::new(automaton, profile);
    let mut a = state.amplitudes().to_vec();
    let mut b = a.clone();
    for _ in 0..t {
        walk.step(&a, &mut b);
        std::mem::swap(&mut a, &mut b);
    }
    Ok(LatticeState::from_amplitudes(*state.grid(), 2, Representation::Position, a)?.with_step(state.step() + t as i64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Transmission into the positive-frequency band.
    Transmitting,
    /// Total reflection: `ω(k₀) − φ` falls between the bands.
    Gap,
    /// Transmission into the negative-frequency band.
    Klein,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Transmitting => "transmitting",
            Regime::Gap => "gap",
            Regime::Klein => "klein",
        })
    }
}

/// Plane-wave kinematics behind the step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub regime: Regime,
    pub k_prime: Option<f64>,
    /// Group velocity of the transmitted wave; zero in the gap.
    pub velocity: f64,
}

/// Wave-vector `k′` behind a step of height `φ` for an incident
/// positive-frequency wave at `k₀ ∈ (0, π)`, from `cos(ω(k₀) − φ) = n·cos k′`.
///
/// The transmitted wave is chosen to move away from the step: `k′ ∈ (0, π)`
/// on the positive band, `k′ ∈ (−π, 0)` on the negative one.
pub fn transmitted_wavevector(m: f64, k0: f64, phi: f64) -> Result<Transmission> {
    if !(0.0..1.0).contains(&m) {
        return Err(invalid("mass", format!("{m} outside [0, 1)")));
    }
    if !(k0 > 0.0 && k0 < PI) {
        return Err(invalid("k0", format!("{k0} must lie in (0, π) for a right-moving particle")));
    }
    if !phi.is_finite() {
        return Err(invalid("phi", "must be finite"));
    }
    let n = ((1.0 - m) * (1.0 + m)).sqrt();
    let w_min = n.acos();
    // energy behind the step, in (−π, π]
    let mut e = (dirac1d_omega(m, k0) - phi).rem_euclid(TAU);
    if e > PI {
        e -= TAU;
    }
    let positive = e >= w_min && e <= PI - w_min;
    let negative = e <= -w_min && e >= -PI + w_min;
    if !(positive || negative) {
        return Ok(Transmission {
            regime: Regime::Gap,
            k_prime: None,
            velocity: 0.0,
        });
    }
    let c = (e.cos() / n).clamp(-1.0, 1.0);
    let k = c.acos();
    if positive {
        Ok(Transmission {
            regime: Regime::Transmitting,
            k_prime: Some(k),
            velocity: dirac1d_velocity(m, k),
        })
    } else {
        Ok(Transmission {
            regime: Regime::Klein,
            k_prime: Some(-k),
            velocity: -dirac1d_velocity(m, -k),
        })
    }
}

/// Lattice layout of a scattering run. Sites are `0..sites`, the step sits
/// at `edge`, the incident packet starts `separation` sites to its left, and
/// `buffer` sites either side of the edge form the interaction region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringGeometry {
    pub sites: usize,
    pub edge: usize,
    pub separation: f64,
    pub buffer: f64,
    pub check_every: usize,
    pub max_steps: usize,
}

impl ScatteringGeometry {
    /// Edge at the lattice centre, separation `6/σ`, buffer `4/σ`.
    pub fn for_packet(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(invalid("sigma", format!("{sigma} outside (0, 1)")));
        }
        let sites = ((160.0 / sigma).ceil() as usize).next_power_of_two().max(1 << 12);
        Ok(Self {
            sites,
            edge: sites / 2,
            separation: 6.0 / sigma,
            buffer: 4.0 / sigma,
            check_every: 16,
            max_steps: 10 * sites,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.sites < 8 || self.sites % 2 != 0 {
            return Err(invalid("sites", "need an even lattice of at least 8 sites"));
        }
        if self.edge >= self.sites || self.buffer <= 0.0 || self.separation <= self.buffer {
            return Err(invalid("geometry", "need 0 < buffer < separation and edge inside the lattice"));
        }
        if self.separation >= self.edge as f64 {
            return Err(invalid("separation", "incident packet would start off the lattice"));
        }
        if self.check_every == 0 {
            return Err(invalid("check_every", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub phi: f64,
    /// Reflected probability.
    pub r: f64,
    /// Transmitted probability.
    pub t: f64,
    pub k_prime: Option<f64>,
    /// Predicted group velocity of the transmitted packet.
    pub v_transmitted: f64,
    /// Centroid velocity of the transmitted packet, when there is one.
    pub v_measured: Option<f64>,
    pub regime: Regime,
    pub steps: usize,
    /// Mass still inside the interaction region when the run stopped.
    pub lingering: f64,
}

/// Reflected, lingering and transmitted masses, plus the transmitted first
/// moment and the mass within a guard band at the lattice ends.
struct Masses {
    left: f64,
    middle: f64,
    right: f64,
    right_moment: f64,
    guard: f64,
}

fn masses(amps: &[C64], g: &ScatteringGeometry) -> Masses {
    let size = g.sites;
    let lo = g.edge as f64 - g.buffer;
    let hi = g.edge as f64 + g.buffer;
    let guard = size / 16;
    let mut out = Masses {
        left: 0.0,
        middle: 0.0,
        right: 0.0,
        right_moment: 0.0,
        guard: 0.0,
    };
    for x in 0..size {
        let p = amps[x].norm_sqr() + amps[size + x].norm_sqr();
        let xf = x as f64;
        if xf < lo {
            out.left += p;
        } else if xf >= hi {
            out.right += p;
            out.right_moment += p * xf;
        } else {
            out.middle += p;
        }
        if x < guard || x >= size - guard {
            out.guard += p;
        }
    }
    out
}

/// Scatter a positive-frequency Gaussian packet (`k₀`, width `σ`) off a step
/// of height `φ`, running until the interaction region has emptied.
pub fn run_scattering(m: f64, k0: f64, sigma: f64, phi: f64, geometry: &ScatteringGeometry) -> Result<ScatteringResult> {
    let kin = transmitted_wavevector(m, k0, phi)?;
    geometry.validate()?;
    let automaton = AutomatonSpec::dirac(1, m)?;
    let grid = MomentumGrid::new(1, geometry.sites)?;
    let start = geometry.edge as f64 - geometry.separation;
    let packet = PacketSpec::particle(WaveVector::d1(k0), sigma).at(&[start]);
    let state = make_packet(&packet, &grid, &automaton)?.to_position();
    let profile = PotentialProfile::step(geometry.sites, phi, geometry.edge)?;
    let walk = Walk::new(&automaton, &profile);

    let v0 = dirac1d_velocity(m, k0);
    let min_steps = (1.5 * geometry.separation / v0).ceil() as usize;
    let mut a = state.amplitudes().to_vec();
    let mut b = a.clone();
    let mut steps = 0;
    let mut last = masses(&a, geometry);
    let mut stopped_at_budget = true;
    while steps < geometry.max_steps {
        for _ in 0..geometry.check_every {
            walk.step(&a, &mut b);
            std::mem::swap(&mut a, &mut b);
        }
        steps += geometry.check_every;
        let now = masses(&a, geometry);
        if now.guard > GUARD_MASS {
            // keep the last snapshot taken before anything neared the ends
            break;
        }
        last = now;
        if steps >= min_steps && last.middle <= CLEAR_TOLERANCE {
            stopped_at_budget = false;
            break;
        }
    }
    let total = last.left + last.middle + last.right;
    if stopped_at_budget && last.middle > LINGER_LIMIT {
        return Err(QcaError::NotCleared {
            steps,
            reflected: last.left / total,
            transmitted: last.right / total,
            lingering: last.middle / total,
        });
    }

    let v_measured = if last.right / total > MIN_TRANSMITTED && !stopped_at_budget {
        let extra = (steps / 4).max(geometry.check_every);
        let c1 = last.right_moment / last.right;
        for _ in 0..extra {
            walk.step(&a, &mut b);
            std::mem::swap(&mut a, &mut b);
        }
        let after = masses(&a, geometry);
        (after.guard <= GUARD_MASS).then(|| (after.right_moment / after.right - c1) / extra as f64)
    } else {
        None
    };

    Ok(ScatteringResult {
        phi,
        r: last.left / total,
        t: last.right / total,
        k_prime: kin.k_prime,
        v_transmitted: kin.velocity,
        v_measured,
        regime: kin.regime,
        steps,
        lingering: last.middle / total,
    })
}

/// [`run_scattering`] over a list of step heights, one lattice per height.
pub fn klein_scan(m: f64, k0: f64, sigma: f64, phis: &[f64], geometry: &ScatteringGeometry) -> Result<Vec<ScatteringResult>> {
    phis.par_iter()
        .map(|&phi| run_scattering(m, k0, sigma, phi, geometry))
        .collect()
}

/// First and last crossings of `R = level` bracketing the reflection
/// plateau of a scan, by linear interpolation between neighbouring points.
/// The scan must be sorted by `φ`.
pub fn plateau_bounds(scan: &[ScatteringResult], level: f64) -> Option<(f64, f64)> {
    let first = scan.iter().position(|p| p.r >= level)?;
    let last = scan.iter().rposition(|p| p.r >= level)?;
    if first == 0 || last + 1 == scan.len() {
        return None;
    }
    let cross = |a: &ScatteringResult, b: &ScatteringResult| a.phi + (level - a.r) * (b.phi - a.phi) / (b.r - a.r);
    Some((cross(&scan[first - 1], &scan[first]), cross(&scan[last], &scan[last + 1])))
}

/// Reflection plateau `(φ_lo, φ_hi)` at `R = level`: a scan over `phis`
/// brackets both crossings, and each is then refined by `iterations` rounds
/// of bisection on `φ`.
pub fn klein_plateau(
    m: f64,
    k0: f64,
    sigma: f64,
    phis: &[f64],
    geometry: &ScatteringGeometry,
    level: f64,
    iterations: usize,
) -> Result<(f64, f64)> {
    let scan = klein_scan(m, k0, sigma, phis, geometry)?;
    refine_plateau(m, k0, sigma, &scan, geometry, level, iterations)
}

/// Bisect both edges of the `R ≥ level` plateau bracketed by an existing scan.
pub fn refine_plateau(
    m: f64,
    k0: f64,
    sigma: f64,
    scan: &[ScatteringResult],
    geometry: &ScatteringGeometry,
    level: f64,
    iterations: usize,
) -> Result<(f64, f64)> {
    let first = scan.iter().position(|p| p.r >= level);
    let last = scan.iter().rposition(|p| p.r >= level);
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) if f > 0 && l + 1 < scan.len() => (f, l),
        _ => return Err(invalid("phis", "scan does not bracket the reflection plateau")),
    };
    let bisect = |mut below: f64, mut above: f64| -> Result<f64> {
        for _ in 0..iterations {
            let mid = 0.5 * (below + above);
            // a run that cannot clear still bounds R between the reflected
            // mass and the reflected plus lingering mass
            let reflects = match run_scattering(m, k0, sigma, mid, geometry) {
                Ok(res) => res.r >= level,
                Err(QcaError::NotCleared {
                    reflected, lingering, ..
                }) if reflected >= level || reflected + lingering < level => reflected >= level,
                Err(e) => return Err(e),
            };
            if reflects {
                above = mid;
            } else {
                below = mid;
            }
        }
        Ok(0.5 * (below + above))
    };
    let (lo, hi) = rayon::join(
        || bisect(scan[first - 1].phi, scan[first].phi),
        || bisect(scan[last + 1].phi, scan[last].phi),
    );
    Ok((lo?, hi?))
}
