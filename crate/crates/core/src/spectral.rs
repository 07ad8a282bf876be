//! Interpolating Hamiltonian, dispersion relation, branch eigenstates and the
//! derivatives of `ω(k)` that drive packet transport.
//!
//! Sign convention: the coin is `exp(−i·H)`, so positive-frequency (particle)
//! states pick up `e^{−iωt}` per step.
//!
//! Two independent routes are kept. [`interpolating_hamiltonian`] and
//! [`eigenbranches`] work on an arbitrary unitary through a complex Schur
//! decomposition; [`closed_form_hamiltonian`] and [`mode_projectors`] use the
//! `U = cos ω − i sin ω·Ĝ` structure shared by every automaton here.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::automata::{AutomatonSpec, CoinOperator, WaveVector};
use crate::error::{QcaError, Result};
use crate::linalg::{hermiticity_residual, unitarity_residual, CMatrix};

/// Coins whose unitarity residual exceeds this are rejected.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
/// Default gradient step.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Default Hessian step.
pub const HESSIAN_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Particle,
    Antiparticle,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Particle => 1.0,
            Branch::Antiparticle => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Branch::Particle => Branch::Antiparticle,
            Branch::Antiparticle => Branch::Particle,
        }
    }
}

/// Hermitian generator `H` with `coin = exp(−i·H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolatingHamiltonian {
    pub matrix: CMatrix,
}

impl InterpolatingHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `exp(−i·t·H)`, the coin raised to a real power.
    pub fn propagator(&self, t: f64) -> CMatrix {
        crate::linalg::exp_minus_i_hermitian(&self.matrix, t)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

fn check_unitary(coin: &CoinOperator) -> Result<()> {
    let residual = coin.unitarity_residual();
    if residual > UNITARITY_TOLERANCE || !residual.is_finite() {
        return Err(QcaError::NonUnitary { residual });
    }
    Ok(())
}

/// Orthonormal eigenvectors and phases `h_j = −arg λ_j ∈ (−π, π]` of a unitary.
fn unitary_eigen(coin: &CoinOperator) -> Result<(CMatrix, Vec<f64>)> {
    check_unitary(coin)?;
    let (q, t) = coin.matrix.clone().schur().unpack();
    // A normal matrix has a diagonal Schur form; the strictly upper part is rounding.
    let phases = (0..t.nrows())
        .map(|j| {
            let h = -t[(j, j)].arg();
            if h <= -PI {
                h + 2.0 * PI
            } else {
                h
            }
        })
        .collect();
    Ok((q, phases))
}

/// General route: `H = Q·diag(−arg λ)·Q†` from the Schur form of the coin.
pub fn interpolating_hamiltonian(coin: &CoinOperator) -> Result<InterpolatingHamiltonian> {
    let (q, phases) = unitary_eigen(coin)?;
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&h| C64::new(h, 0.0)),
    ));
    let h = &q * d * q.adjoint();
    // remove the anti-Hermitian rounding left by Q
    let matrix = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    Ok(InterpolatingHamiltonian { matrix })
}

/// Closed-form route: `H = ω·Ĝ` from the coin symbol.
pub fn closed_form_hamiltonian(spec: &AutomatonSpec, k: &WaveVector) -> Result<InterpolatingHamiltonian> {
    let mode = spec.mode(k)?;
    let (g, _) = mode.generator();
    Ok(InterpolatingHamiltonian {
        matrix: g * C64::new(mode.omega(), 0.0),
    })
}

/// `ω(k) ∈ [0, π]`, the positive eigenvalue of `H_k`.
pub fn dispersion(spec: &AutomatonSpec, k: &WaveVector) -> Result<f64> {
    Ok(spec.mode(k)?.omega())
}

/// `ω(k) = arccos(√(1−m²)·cos k)` of the 1D Dirac automaton.
pub fn dirac1d_omega(m: f64, k: f64) -> f64 {
    let n = ((1.0 - m) * (1.0 + m)).sqrt();
    let (s, c) = k.sin_cos();
    (n * n * s * s + m * m).sqrt().atan2(n * c)
}

/// Closed-form `dω/dk = n·sin k / sin ω` of the 1D Dirac automaton.
pub fn dirac1d_velocity(m: f64, k: f64) -> f64 {
    let n = ((1.0 - m) * (1.0 + m)).sqrt();
    let s = dirac1d_omega(m, k).sin();
    if s == 0.0 {
        return f64::NAN;
    }
    n * k.sin() / s
}

/// Closed-form `d²ω/dk² = (n·cos k − cos ω·v²)/sin ω` of the 1D Dirac automaton.
pub fn dirac1d_curvature(m: f64, k: f64) -> f64 {
    let n = ((1.0 - m) * (1.0 + m)).sqrt();
    let w = dirac1d_omega(m, k);
    let v = dirac1d_velocity(m, k);
    (n * k.cos() - w.cos() * v * v) / w.sin()
}

/// Smallest `sin ω` below which the frequency branches touch.
const DEGENERACY_FLOOR: f64 = 1e-12;

fn degeneracy_guard(spec: &AutomatonSpec, k: &WaveVector) -> Result<f64> {
    let omega = dispersion(spec, k)?;
    let s = omega.sin();
    if s < DEGENERACY_FLOOR {
        return Err(QcaError::Degenerate {
            k: k.as_slice().to_vec(),
            omega,
        });
    }
    Ok(s)
}

/// `∇ω(k)` by central differences with step `h`.
///
/// The step is shrunk near a band touching point so the stencil never
/// straddles the cone tip.
pub fn group_velocity_with_step(spec: &AutomatonSpec, k: &WaveVector, h: f64) -> Result<Vec<f64>> {
    let s = degeneracy_guard(spec, k)?;
    let h = h.min(0.25 * s);
    (0..k.dim())
        .map(|a| {
            let fp = dispersion(spec, &k.shifted(a, h))?;
            let fm = dispersion(spec, &k.shifted(a, -h))?;
            Ok((fp - fm) / (2.0 * h))
        })
        .collect()
}

pub fn group_velocity(spec: &AutomatonSpec, k: &WaveVector) -> Result<Vec<f64>> {
    group_velocity_with_step(spec, k, GRADIENT_STEP)
}

fn hessian_raw(spec: &AutomatonSpec, k: &WaveVector, h: f64) -> Result<DMatrix<f64>> {
    let dim = k.dim();
    let f0 = dispersion(spec, k)?;
    let mut out = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let fp = dispersion(spec, &k.shifted(a, h))?;
        let fm = dispersion(spec, &k.shifted(a, -h))?;
        out[(a, a)] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in 0..a {
            let pp = dispersion(spec, &k.shifted(a, h).shifted(b, h))?;
            let pm = dispersion(spec, &k.shifted(a, h).shifted(b, -h))?;
            let mp = dispersion(spec, &k.shifted(a, -h).shifted(b, h))?;
            let mm = dispersion(spec, &k.shifted(a, -h).shifted(b, -h))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    Ok(out)
}

/// Hessian of `ω` by central differences, Richardson-extrapolated over
/// `h` and `h/2` to cancel the leading `O(h²)` error.
pub fn diffusion_tensor_with_step(spec: &AutomatonSpec, k: &WaveVector, h: f64) -> Result<DMatrix<f64>> {
    let s = degeneracy_guard(spec, k)?;
    let h = h.min(0.25 * s);
    let coarse = hessian_raw(spec, k, h)?;
    let fine = hessian_raw(spec, k, 0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

pub fn diffusion_tensor(spec: &AutomatonSpec, k: &WaveVector) -> Result<DMatrix<f64>> {
    diffusion_tensor_with_step(spec, k, HESSIAN_STEP)
}

/// Frequency, drift and diffusion of one branch at one `k`.
///
/// `omega` is the non-negative modulus; `v` and `d` are derivatives of the
/// branch frequency `±ω`, so they flip sign on the antiparticle branch.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionPoint {
    pub omega: f64,
    pub v: Vec<f64>,
    pub d: DMatrix<f64>,
    pub branch: Branch,
    pub degeneracy: usize,
}

impl DispersionPoint {
    pub fn signed_omega(&self) -> f64 {
        self.branch.sign() * self.omega
    }
}

pub fn dispersion_point(spec: &AutomatonSpec, k: &WaveVector, branch: Branch) -> Result<DispersionPoint> {
    let omega = dispersion(spec, k)?;
    let sign = branch.sign();
    let v = group_velocity(spec, k)?.into_iter().map(|x| sign * x).collect();
    let d = diffusion_tensor(spec, k)? * sign;
    Ok(DispersionPoint {
        omega,
        v,
        d,
        branch,
        degeneracy: spec.internal_dim() / 2,
    })
}

/// One eigenvector of `H_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchEigenstate {
    pub k: Option<WaveVector>,
    pub branch: Branch,
    /// Signed eigenvalue of `H_k`.
    pub eigenvalue: f64,
    pub vector: Vec<C64>,
}

/// Full eigen-decomposition of a coin split into its two frequency branches.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenbranches {
    /// `ω ≥ 0`, mean modulus of the branch eigenvalues.
    pub omega: f64,
    pub states: Vec<BranchEigenstate>,
}

impl Eigenbranches {
    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &BranchEigenstate> {
        self.states.iter().filter(move |s| s.branch == b)
    }

    pub fn degeneracy(&self, b: Branch) -> usize {
        self.branch(b).count()
    }
}

/// Orthonormal basis of the range of the projector `p`, built by Gram-Schmidt
/// of `p·e_1, p·e_2, …` in that fixed order. This fixes the phase and the
/// basis inside degenerate subspaces so that outputs are deterministic and
/// vary smoothly with `k`.
pub(crate) fn gauge_fixed_basis(p: &CMatrix, rank: usize) -> Vec<Vec<C64>> {
    let s = p.nrows();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    for j in 0..s {
        if basis.len() == rank {
            break;
        }
        let mut v: Vec<C64> = (0..s).map(|r| p[(r, j)]).collect();
        for b in &basis {
            let overlap: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        // ‖P e_j‖² = P_jj, so a column this small carries no new direction
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn projector_from_columns(q: &CMatrix, cols: &[usize]) -> CMatrix {
    let s = q.nrows();
    let mut p = CMatrix::zeros(s, s);
    for &c in cols {
        let col = q.column(c);
        p += col * col.adjoint();
    }
    p
}

/// Split the Schur eigenvectors into the upper and lower halves of the spectrum.
fn branch_columns(phases: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..phases.len()).collect();
    order.sort_by(|&a, &b| phases[b].total_cmp(&phases[a]).then(a.cmp(&b)));
    let half = phases.len() / 2;
    (order[..half].to_vec(), order[half..].to_vec())
}

/// Eigen-decomposition of a coin by the general (Schur) route.
///
/// The upper half of the spectrum of `H` is labelled particle, the lower half
/// antiparticle; inside each branch the basis is gauge-fixed by
/// [`gauge_fixed_basis`].
pub fn eigenbranches(coin: &CoinOperator) -> Result<Eigenbranches> {
    let (q, phases) = unitary_eigen(coin)?;
    let (plus, minus) = branch_columns(&phases);
    let mut states = Vec::with_capacity(phases.len());
    let mut omega_acc = 0.0;
    for (branch, cols) in [(Branch::Particle, &plus), (Branch::Antiparticle, &minus)] {
        let p = projector_from_columns(&q, cols);
        let mean = cols.iter().map(|&c| phases[c]).sum::<f64>() / cols.len() as f64;
        omega_acc += branch.sign() * mean;
        for vector in gauge_fixed_basis(&p, cols.len()) {
            states.push(BranchEigenstate {
                k: coin.k,
                branch,
                eigenvalue: mean,
                vector,
            });
        }
    }
    Ok(Eigenbranches {
        omega: 0.5 * omega_acc,
        states,
    })
}

fn degeneracy_error(coin: &CoinOperator, omega: f64) -> QcaError {
    QcaError::Degenerate {
        k: coin.k.map(|k| k.as_slice().to_vec()).unwrap_or_default(),
        omega,
    }
}

/// Spectral projectors `(P₊, P₋)` of a coin by the general (Schur) route.
pub fn branch_projectors(coin: &CoinOperator) -> Result<(CMatrix, CMatrix)> {
    let (q, phases) = unitary_eigen(coin)?;
    let (plus, minus) = branch_columns(&phases);
    let lo = plus.iter().map(|&c| phases[c]).fold(f64::INFINITY, f64::min);
    let hi = minus.iter().map(|&c| phases[c]).fold(f64::NEG_INFINITY, f64::max);
    // branches must be separated, and must not meet again through ω = π
    let gap = (lo - hi).min(2.0 * PI - (phases.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - phases.iter().cloned().fold(f64::INFINITY, f64::min)));
    if gap < 1e-9 {
        return Err(degeneracy_error(coin, 0.5 * (lo - hi).max(0.0)));
    }
    Ok((projector_from_columns(&q, &plus), projector_from_columns(&q, &minus)))
}

/// Closed-form projectors `P± = (I ± Ĝ)/2` at one `k`.
pub fn mode_projectors(spec: &AutomatonSpec, k: &WaveVector) -> Result<(CMatrix, CMatrix)> {
    let mode = spec.mode(k)?;
    let (g, ok) = mode.generator();
    let omega = mode.omega();
    if !ok || omega.sin() < DEGENERACY_FLOOR {
        return Err(QcaError::Degenerate {
            k: k.as_slice().to_vec(),
            omega,
        });
    }
    let s = g.nrows();
    let id = CMatrix::identity(s, s);
    let half = C64::new(0.5, 0.0);
    Ok(((&id + &g) * half, (&id - &g) * half))
}

/// Spinors of one branch, one per eigenvalue.
pub type BranchSpinors = Vec<Vec<C64>>;

/// Gauge-fixed eigenvectors `u±(k)` of the closed-form generator.
///
/// At degenerate points the fallback generator is used, so the result is
/// always defined.
pub fn mode_eigenvectors(spec: &AutomatonSpec, k: &WaveVector) -> Result<(BranchSpinors, BranchSpinors)> {
    let mode = spec.mode(k)?;
    let (g, _) = mode.generator();
    let s = g.nrows();
    let id = CMatrix::identity(s, s);
    let half = C64::new(0.5, 0.0);
    let pp = (&id + &g) * half;
    let pm = (&id - &g) * half;
    Ok((gauge_fixed_basis(&pp, s / 2), gauge_fixed_basis(&pm, s / 2)))
}

/// `v†·M·v`-style helper: `‖M·v − λ·v‖`.
#[cfg(test)]
pub(crate) fn eigen_residual(m: &CMatrix, v: &[C64], lambda: f64) -> f64 {
    let mut out = vec![crate::linalg::ZERO; v.len()];
    crate::linalg::mat_vec(m, v, &mut out);
    out.iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Re-exponentiation error `‖exp(−iH) − coin‖₂`.
pub fn reexponentiation_error(h: &InterpolatingHamiltonian, coin: &CoinOperator) -> f64 {
    crate::linalg::spectral_norm(&(h.propagator(1.0) - &coin.matrix))
}

/// Unitarity residual of the coin, re-exported for callers holding only a matrix.
pub fn coin_residual(m: &CMatrix) -> f64 {
    unitarity_residual(m)
}
