//! One-particle states on a finite periodic lattice: momentum grid, Fourier
//! transforms, wave-packet construction, exact evolution and position moments.
//!
//! Amplitudes are stored component-major: `amps[c·M + s]` for internal
//! component `c` and site (or mode) `s`, with `M = N^dim` and axis 0 the
//! slowest-varying index. Momentum modes are kept in FFT order.
//!
//! Fourier convention: `ψ(x) = N^{−dim/2}·Σ_k e^{+ik·x}·ψ(k)`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::automata::{cell_period, AutomatonSpec, WaveVector};
use crate::error::{invalid, QcaError, Result};
use crate::linalg::ZERO;
use crate::spectral::{mode_eigenvectors, Branch};

/// Maximum envelope amplitude tolerated at the edge of the cell.
pub const LEAK_TOLERANCE: f64 = 1e-12;
/// Mass beyond a quarter lattice from the centre above which unwrapping is refused.
pub const UNWRAP_TOLERANCE: f64 = 1e-6;

/// Uniform periodic grid of wave-vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    dim: usize,
    n: usize,
}

impl MomentumGrid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(invalid("dim", format!("must be 1, 2 or 3, got {dim}")));
        }
        if points_per_axis < 4 || points_per_axis % 2 != 0 {
            return Err(invalid(
                "grid",
                format!("points per axis must be even and at least 4, got {points_per_axis}"),
            ));
        }
        let total = points_per_axis.checked_pow(dim as u32);
        if total.map_or(true, |t| t > 1 << 28) {
            return Err(invalid("grid", "lattice too large"));
        }
        Ok(Self {
            dim,
            n: points_per_axis,
        })
    }

    /// Default sizes: `2¹⁴` sites in 1D, `2⁹` per axis in 2D, `2⁶` per axis in 3D.
    pub fn default_for(dim: usize) -> Self {
        let n = match dim {
            1 => 1 << 14,
            2 => 1 << 9,
            _ => 1 << 6,
        };
        Self::new(dim, n).expect("default grid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        cell_period(self.dim)
    }

    /// Wave-vector spacing.
    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    /// Distance between neighbouring lattice sites along an axis.
    pub fn lattice_spacing(&self) -> f64 {
        2.0 * PI / self.period()
    }

    /// Signed integer frequency of FFT index `l`.
    fn signed_index(&self, l: usize) -> i64 {
        if l < self.n / 2 {
            l as i64
        } else {
            l as i64 - self.n as i64
        }
    }

    /// Per-axis indices of flat index `s`.
    pub fn multi_index(&self, mut s: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dim).rev() {
            idx[a] = s % self.n;
            s /= self.n;
        }
        idx
    }

    /// Wave-vector components of mode `s`, in `[−P/2, P/2)`.
    pub fn k_components(&self, s: usize) -> [f64; 3] {
        let idx = self.multi_index(s);
        let dk = self.spacing();
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.signed_index(idx[a]) as f64 * dk;
        }
        k
    }

    pub fn k_at(&self, s: usize) -> WaveVector {
        WaveVector::new(&self.k_components(s)[..self.dim]).expect("grid point is finite")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

/// Amplitudes over `grid × internal components`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    grid: MomentumGrid,
    internal: usize,
    representation: Representation,
    step: i64,
    amps: Vec<C64>,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unitary DFT along every axis of one component block.
fn fft_block(block: &mut [C64], grid: &MomentumGrid, inverse: bool) {
    let n = grid.n;
    let fft = plan(n, inverse);
    let scale = 1.0 / (n as f64).sqrt();
    let total = block.len();
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    let mut line = vec![ZERO; n];
    for axis in 0..grid.dim {
        let stride = n.pow((grid.dim - 1 - axis) as u32);
        if stride == 1 {
            for chunk in block.chunks_exact_mut(n) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
        } else {
            let outer = total / (n * stride);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = block[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        block[base + j * stride] = *v;
                    }
                }
            }
        }
    }
    let s = scale.powi(grid.dim as i32);
    for v in block.iter_mut() {
        *v *= s;
    }
}

impl LatticeState {
    /// Wrap raw amplitudes (component-major) and check their length.
    pub fn from_amplitudes(
        grid: MomentumGrid,
        internal: usize,
        representation: Representation,
        amps: Vec<C64>,
    ) -> Result<Self> {
        if internal == 0 || amps.len() != grid.len() * internal {
            return Err(QcaError::DimensionMismatch {
                expected: grid.len() * internal,
                got: amps.len(),
            });
        }
        Ok(Self {
            grid,
            internal,
            representation,
            step: 0,
            amps,
        })
    }

    pub fn zeros(grid: MomentumGrid, internal: usize, representation: Representation) -> Self {
        Self {
            grid,
            internal,
            representation,
            step: 0,
            amps: vec![ZERO; grid.len() * internal],
        }
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn internal_dim(&self) -> usize {
        self.internal
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn with_step(mut self, step: i64) -> Self {
        self.step = step;
        self
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Amplitude of component `c` at site or mode `s`.
    pub fn get(&self, c: usize, s: usize) -> C64 {
        self.amps[c * self.grid.len() + s]
    }

    pub fn component(&self, c: usize) -> &[C64] {
        let m = self.grid.len();
        &self.amps[c * m..(c + 1) * m]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in self.amps.iter_mut() {
                *a /= n;
            }
        }
    }

    /// `⟨self|other⟩`, both taken in the same representation.
    pub fn inner(&self, other: &LatticeState) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(QcaError::DimensionMismatch {
                expected: self.amps.len(),
                got: other.amps.len(),
            });
        }
        let other = other.in_representation(self.representation);
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `Σ_c |ψ_c(s)|²` per site or mode.
    pub fn density(&self) -> Vec<f64> {
        let m = self.grid.len();
        (0..m)
            .map(|s| (0..self.internal).map(|c| self.amps[c * m + s].norm_sqr()).sum())
            .collect()
    }

    fn transformed(&self, inverse: bool, target: Representation) -> Self {
        let m = self.grid.len();
        let mut amps = self.amps.clone();
        amps.par_chunks_mut(m).for_each(|block| fft_block(block, &self.grid, inverse));
        Self {
            amps,
            representation: target,
            ..*self
        }
    }

    /// Position representation (identity if already there).
    pub fn to_position(&self) -> Self {
        match self.representation {
            Representation::Position => self.clone(),
            Representation::Momentum => self.transformed(true, Representation::Position),
        }
    }

    /// Momentum representation (identity if already there).
    pub fn to_momentum(&self) -> Self {
        match self.representation {
            Representation::Momentum => self.clone(),
            Representation::Position => self.transformed(false, Representation::Momentum),
        }
    }

    pub fn in_representation(&self, r: Representation) -> std::borrow::Cow<'_, Self> {
        if self.representation == r {
            std::borrow::Cow::Borrowed(self)
        } else if r == Representation::Position {
            std::borrow::Cow::Owned(self.to_position())
        } else {
            std::borrow::Cow::Owned(self.to_momentum())
        }
    }

    /// Translate by an integer number of sites per axis.
    pub fn translated(&self, shift: &[i64]) -> Result<Self> {
        if shift.len() != self.grid.dim {
            return Err(QcaError::DimensionMismatch {
                expected: self.grid.dim,
                got: shift.len(),
            });
        }
        let n = self.grid.n as i64;
        let m = self.grid.len();
        let mut out = Self::zeros(self.grid, self.internal, self.representation).with_step(self.step);
        match self.representation {
            Representation::Position => {
                for s in 0..m {
                    let idx = self.grid.multi_index(s);
                    let mut t = 0usize;
                    for a in 0..self.grid.dim {
                        let j = (idx[a] as i64 + shift[a]).rem_euclid(n) as usize;
                        t = t * self.grid.n + j;
                    }
                    for c in 0..self.internal {
                        out.amps[c * m + t] = self.amps[c * m + s];
                    }
                }
            }
            Representation::Momentum => {
                let a = self.grid.lattice_spacing();
                for s in 0..m {
                    let k = self.grid.k_components(s);
                    let phase: f64 = (0..self.grid.dim).map(|ax| k[ax] * shift[ax] as f64 * a).sum();
                    let f = C64::from_polar(1.0, -phase);
                    for c in 0..self.internal {
                        out.amps[c * m + s] = self.amps[c * m + s] * f;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Wave-vector profile of a packet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Envelope {
    Gaussian,
    /// `Σ_j c_j·H_j(δ/σ)` times the Gaussian, with `δ` the offset along axis 0.
    Hermite { coefficients: Vec<f64> },
}

/// Everything needed to build a packet `Σ_k g(k)·(c₊u₊(k) + c₋u₋(k))|k⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketSpec {
    pub k0: WaveVector,
    /// Wave-vector width: `g ∝ exp(−|k − k0|²/(2σ²))`.
    pub sigma: f64,
    pub c_plus: C64,
    pub c_minus: C64,
    pub envelope: Envelope,
    /// Position of the packet centre, in sites along each axis.
    pub center: Vec<f64>,
}

impl PacketSpec {
    pub fn gaussian(k0: WaveVector, sigma: f64, c_plus: C64, c_minus: C64) -> Self {
        let dim = k0.dim();
        Self {
            k0,
            sigma,
            c_plus,
            c_minus,
            envelope: Envelope::Gaussian,
            center: vec![0.0; dim],
        }
    }

    /// Pure particle-branch Gaussian.
    pub fn particle(k0: WaveVector, sigma: f64) -> Self {
        Self::gaussian(k0, sigma, C64::new(1.0, 0.0), ZERO)
    }

    pub fn at(mut self, center: &[f64]) -> Self {
        self.center = center.to_vec();
        self
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        let w = self.c_plus.norm_sqr() + self.c_minus.norm_sqr();
        if (w - 1.0).abs() > 1e-9 {
            return Err(invalid("c_plus", format!("|c+|² + |c-|² must be 1, got {w}")));
        }
        if self.center.len() != self.k0.dim() || self.center.iter().any(|x| !x.is_finite()) {
            return Err(invalid("x0", "one finite coordinate per axis required"));
        }
        if let Envelope::Hermite { coefficients } = &self.envelope {
            if coefficients.is_empty() || coefficients.iter().all(|c| *c == 0.0) {
                return Err(invalid("hermite", "at least one non-zero coefficient required"));
            }
        }
        Ok(())
    }

    /// Unnormalised envelope value at periodic offsets `delta` from `k0`.
    pub fn envelope_at(&self, delta: &[f64]) -> f64 {
        let r2: f64 = delta.iter().map(|d| d * d).sum();
        let g = (-r2 / (2.0 * self.sigma * self.sigma)).exp();
        match &self.envelope {
            Envelope::Gaussian => g,
            Envelope::Hermite { coefficients } => {
                let x = delta[0] / self.sigma;
                let mut acc = 0.0;
                let (mut h0, mut h1) = (1.0, 2.0 * x);
                for (j, c) in coefficients.iter().enumerate() {
                    let hj = match j {
                        0 => h0,
                        1 => h1,
                        _ => {
                            let h2 = 2.0 * x * h1 - 2.0 * (j as f64 - 1.0) * h0;
                            h0 = h1;
                            h1 = h2;
                            h2
                        }
                    };
                    acc += c * hj;
                }
                acc * g
            }
        }
    }
}

/// Periodic offset of `k` from `k0` per axis, in `[−P/2, P/2)`.
pub(crate) fn periodic_offset(k: &[f64], k0: &[f64], period: f64) -> [f64; 3] {
    let mut d = [0.0; 3];
    for (a, (x, y)) in k.iter().zip(k0).enumerate() {
        d[a] = crate::automata::reduce_periodic(x - y, period);
    }
    d
}

/// Build the momentum-representation state of a packet.
pub fn make_packet(spec: &PacketSpec, grid: &MomentumGrid, automaton: &AutomatonSpec) -> Result<LatticeState> {
    spec.validate()?;
    if spec.k0.dim() != grid.dim() || automaton.dim() != grid.dim() {
        return Err(QcaError::DimensionMismatch {
            expected: grid.dim(),
            got: spec.k0.dim(),
        });
    }
    let period = grid.period();
    // envelope at the cell edge opposite k0, relative to its peak
    let peak = (0..=200)
        .map(|i| spec.envelope_at(&[4.0 * spec.sigma * (i as f64 / 100.0 - 1.0), 0.0, 0.0][..grid.dim()]).abs())
        .fold(0.0, f64::max)
        .max(spec.envelope_at(&vec![0.0; grid.dim()]).abs());
    let mut edge = vec![0.0; grid.dim()];
    edge[0] = 0.5 * period;
    let leak = spec.envelope_at(&edge).abs() / peak;
    if !(leak <= LEAK_TOLERANCE) {
        return Err(QcaError::EnvelopeTooWide { leak });
    }

    let m = grid.len();
    let s_int = automaton.internal_dim();
    let a = grid.lattice_spacing();
    let k0 = spec.k0.as_slice();
    let modes: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|s| {
            let kc = grid.k_components(s);
            let delta = periodic_offset(&kc[..grid.dim()], k0, period);
            let g = spec.envelope_at(&delta[..grid.dim()]);
            let mut out = vec![ZERO; s_int];
            if g == 0.0 {
                return Ok(out);
            }
            let phase: f64 = (0..grid.dim()).map(|ax| kc[ax] * spec.center[ax] * a).sum();
            let carrier = C64::from_polar(g, -phase);
            let (up, um) = mode_eigenvectors(automaton, &grid.k_at(s))?;
            for c in 0..s_int {
                out[c] = carrier * (spec.c_plus * up[0][c] + spec.c_minus * um[0][c]);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut amps = vec![ZERO; m * s_int];
    for (s, mode) in modes.iter().enumerate() {
        for (c, v) in mode.iter().enumerate() {
            amps[c * m + s] = *v;
        }
    }
    let mut state = LatticeState::from_amplitudes(*grid, s_int, Representation::Momentum, amps)?;
    state.normalize();
    Ok(state)
}

/// Per-mode `ω(k)` and unit generator `Ĝ(k)` of an automaton on a grid, so
/// that `coin^t = cos(ωt)·I − i·sin(ωt)·Ĝ` at every mode.
#[derive(Clone, Debug)]
pub struct ModeTable {
    grid: MomentumGrid,
    internal: usize,
    omega: Vec<f64>,
    /// `Ĝ` entries, row-major per mode.
    generator: Vec<C64>,
}

impl ModeTable {
    pub fn new(grid: &MomentumGrid, automaton: &AutomatonSpec) -> Result<Self> {
        if automaton.dim() != grid.dim() {
            return Err(QcaError::DimensionMismatch {
                expected: grid.dim(),
                got: automaton.dim(),
            });
        }
        let s = automaton.internal_dim();
        let rows: Vec<(f64, Vec<C64>)> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mode = automaton.mode(&grid.k_at(i))?;
                let (g, _) = mode.generator();
                let mut flat = Vec::with_capacity(s * s);
                for r in 0..s {
                    for c in 0..s {
                        flat.push(g[(r, c)]);
                    }
                }
                Ok((mode.omega(), flat))
            })
            .collect::<Result<_>>()?;
        let mut omega = Vec::with_capacity(rows.len());
        let mut generator = Vec::with_capacity(rows.len() * s * s);
        for (w, g) in rows {
            omega.push(w);
            generator.extend(g);
        }
        Ok(Self {
            grid: *grid,
            internal: s,
            omega,
            generator,
        })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    fn check(&self, state: &LatticeState) -> Result<()> {
        if state.grid != self.grid || state.internal != self.internal {
            return Err(QcaError::DimensionMismatch {
                expected: self.grid.len() * self.internal,
                got: state.amps.len(),
            });
        }
        Ok(())
    }

    /// `Ĝ·ψ` at mode `i`, optionally restricted to the `±` branch `(ψ ± Ĝψ)/2`.
    fn apply_mode(&self, i: usize, psi: &[C64], out: &mut [C64], f: impl Fn(C64, C64) -> C64) {
        let s = self.internal;
        let g = &self.generator[i * s * s..(i + 1) * s * s];
        for r in 0..s {
            let mut gv = ZERO;
            for c in 0..s {
                gv += g[r * s + c] * psi[c];
            }
            out[r] = f(psi[r], gv);
        }
    }

    fn map_modes(&self, state: &LatticeState, f: impl Fn(usize, C64, C64) -> C64 + Sync) -> LatticeState {
        let m = self.grid.len();
        let s = self.internal;
        let mom = state.to_momentum();
        let per_mode: Vec<[C64; 4]> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut psi = [ZERO; 4];
                for c in 0..s {
                    psi[c] = mom.amps[c * m + i];
                }
                let mut out = [ZERO; 4];
                self.apply_mode(i, &psi[..s], &mut out[..s], |p, gp| f(i, p, gp));
                out
            })
            .collect();
        let mut amps = vec![ZERO; m * s];
        for (i, mode) in per_mode.iter().enumerate() {
            for c in 0..s {
                amps[c * m + i] = mode[c];
            }
        }
        LatticeState {
            amps,
            representation: Representation::Momentum,
            ..mom
        }
    }

    /// `coin^t·ψ` for any integer `t`; the result is in momentum representation.
    pub fn evolve(&self, state: &LatticeState, t: i64) -> Result<LatticeState> {
        self.check(state)?;
        let tf = t as f64;
        let mut out = self.map_modes(state, |i, p, gp| {
            let (sn, cs) = (self.omega[i] * tf).sin_cos();
            p * cs - C64::new(0.0, sn) * gp
        });
        out.step = state.step + t;
        Ok(out)
    }

    /// Branch component `P±·ψ` in momentum representation.
    pub fn project(&self, state: &LatticeState, branch: Branch) -> Result<LatticeState> {
        self.check(state)?;
        let sign = branch.sign();
        Ok(self.map_modes(state, |_, p, gp| (p + gp * sign) * 0.5))
    }

    /// Split a state once into its two branches so that `ψ(t)` can be
    /// rebuilt for many `t` with pure phase factors.
    pub fn split(&self, state: &LatticeState) -> Result<BranchSplit> {
        let plus = self.project(state, Branch::Particle)?;
        let minus = self.project(state, Branch::Antiparticle)?;
        Ok(BranchSplit {
            plus,
            minus,
            omega: self.omega.clone(),
        })
    }
}

/// A state split into `P₊ψ` and `P₋ψ`; each branch evolves by `e^{∓iωt}`.
#[derive(Clone, Debug)]
pub struct BranchSplit {
    pub plus: LatticeState,
    pub minus: LatticeState,
    omega: Vec<f64>,
}

impl BranchSplit {
    fn phased(&self, src: &LatticeState, sign: f64, t: i64) -> LatticeState {
        let m = src.grid.len();
        let tf = t as f64;
        let mut out = src.clone();
        out.amps
            .par_chunks_mut(m)
            .for_each(|block| {
                for (i, a) in block.iter_mut().enumerate() {
                    *a *= C64::from_polar(1.0, -sign * self.omega[i] * tf);
                }
            });
        out.step = src.step + t;
        out
    }

    /// Particle component at time `t` (momentum representation).
    pub fn plus_at(&self, t: i64) -> LatticeState {
        self.phased(&self.plus, 1.0, t)
    }

    pub fn minus_at(&self, t: i64) -> LatticeState {
        self.phased(&self.minus, -1.0, t)
    }

    /// Both branch components at time `t`, in position representation.
    pub fn positions_at(&self, t: i64) -> (LatticeState, LatticeState) {
        let m = self.plus.grid.len();
        let tf = t as f64;
        let phases: Vec<C64> = self.omega.iter().map(|w| C64::from_polar(1.0, -w * tf)).collect();
        let mut plus = self.plus.clone();
        let mut minus = self.minus.clone();
        for block in plus.amps.chunks_mut(m) {
            for (a, p) in block.iter_mut().zip(&phases) {
                *a *= p;
            }
        }
        for block in minus.amps.chunks_mut(m) {
            for (a, p) in block.iter_mut().zip(&phases) {
                *a *= p.conj();
            }
        }
        plus.step += t;
        minus.step += t;
        (plus.to_position(), minus.to_position())
    }

    /// Full state at time `t` (momentum representation).
    pub fn total_at(&self, t: i64) -> LatticeState {
        let mut p = self.plus_at(t);
        let q = self.minus_at(t);
        for (a, b) in p.amps.iter_mut().zip(&q.amps) {
            *a += b;
        }
        p
    }
}

/// Exact evolution by `t` steps (any sign).
pub fn evolve_exact(state: &LatticeState, t: i64, automaton: &AutomatonSpec) -> Result<LatticeState> {
    ModeTable::new(&state.grid, automaton)?.evolve(state, t)
}

/// Circular mean of a marginal distribution on `n` sites, as a site index.
fn circular_center(marginal: &[f64]) -> f64 {
    let n = marginal.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (j, p) in marginal.iter().enumerate() {
        let th = 2.0 * PI * j as f64 / n;
        re += p * th.cos();
        im += p * th.sin();
    }
    // atan2 lands in (−π, π], so the centre is reported in (−N/2, N/2]
    im.atan2(re) * n / (2.0 * PI)
}

fn marginals(grid: &MomentumGrid, density: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; grid.n]; grid.dim];
    for (s, p) in density.iter().enumerate() {
        let idx = grid.multi_index(s);
        for a in 0..grid.dim {
            out[a][idx[a]] += p;
        }
    }
    out
}

/// First and second moments along each axis, in sites, about explicit
/// centres (one per axis). Offsets are wrapped into `[−N/2, N/2)`.
fn moments_about(grid: &MomentumGrid, marg: &[Vec<f64>], centers: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = grid.n as f64;
    let mut out = Vec::with_capacity(grid.dim);
    for (a, m) in marg.iter().enumerate() {
        let total: f64 = m.iter().sum();
        let (mut m1, mut m2, mut far) = (0.0, 0.0, 0.0);
        for (j, p) in m.iter().enumerate() {
            let off = (j as f64 - centers[a] + 0.5 * n).rem_euclid(n) - 0.5 * n;
            m1 += p * off;
            m2 += p * off * off;
            if off.abs() >= 0.25 * n {
                far += p;
            }
        }
        if far > UNWRAP_TOLERANCE * total {
            return Err(QcaError::UnwrapInvalid { mass: far / total });
        }
        let mean = m1 / total;
        out.push((centers[a] + mean, m2 / total - mean * mean));
    }
    Ok(out)
}

fn position_moments(state: &LatticeState, centers: Option<&[f64]>) -> Result<Vec<(f64, f64)>> {
    let pos = state.in_representation(Representation::Position);
    let grid = pos.grid;
    let marg = marginals(&grid, &pos.density());
    let c: Vec<f64> = match centers {
        Some(c) => {
            if c.len() != grid.dim {
                return Err(QcaError::DimensionMismatch {
                    expected: grid.dim,
                    got: c.len(),
                });
            }
            c.iter().map(|x| x / grid.lattice_spacing()).collect()
        }
        None => marg.iter().map(|m| circular_center(m)).collect(),
    };
    moments_about(&grid, &marg, &c)
}

/// `⟨X⟩` per axis, with coordinates unwrapped around the packet centre.
pub fn position_mean(state: &LatticeState) -> Result<Vec<f64>> {
    let a = state.grid.lattice_spacing();
    Ok(position_moments(state, None)?.iter().map(|(m, _)| m * a).collect())
}

/// `⟨X⟩` with coordinates unwrapped around a caller-supplied centre.
///
/// Use this when the packet has several lobes, where the circular-mean
/// centre estimate of [`position_mean`] would be ambiguous.
pub fn position_mean_about(state: &LatticeState, center: &[f64]) -> Result<Vec<f64>> {
    let a = state.grid.lattice_spacing();
    Ok(position_moments(state, Some(center))?.iter().map(|(m, _)| m * a).collect())
}

/// `⟨X²⟩ − ⟨X⟩²`, summed over axes.
pub fn position_variance(state: &LatticeState) -> Result<f64> {
    let a = state.grid.lattice_spacing();
    Ok(position_moments(state, None)?.iter().map(|(_, v)| v * a * a).sum())
}

pub fn position_variance_about(state: &LatticeState, center: &[f64]) -> Result<f64> {
    let a = state.grid.lattice_spacing();
    Ok(position_moments(state, Some(center))?.iter().map(|(_, v)| v * a * a).sum())
}

/// Mass-weighted first moment `Σ_x x·|ψ(x)|²` per axis (not divided by the
/// norm), with offsets unwrapped about `center`. Returns `(mass, moment)`.
///
/// Components of a decomposed state are not normalised, and their moments
/// must add up; this is the quantity that does.
pub fn weighted_position_about(state: &LatticeState, center: &[f64]) -> Result<(f64, Vec<f64>)> {
    let pos = state.in_representation(Representation::Position);
    let grid = pos.grid;
    if center.len() != grid.dim {
        return Err(QcaError::DimensionMismatch {
            expected: grid.dim,
            got: center.len(),
        });
    }
    let a = grid.lattice_spacing();
    let n = grid.n as f64;
    let marg = marginals(&grid, &pos.density());
    let mut moment = Vec::with_capacity(grid.dim);
    let mut mass = 0.0;
    for (ax, m) in marg.iter().enumerate() {
        let c = center[ax] / a;
        let total: f64 = m.iter().sum();
        let (mut m1, mut far) = (0.0, 0.0);
        for (j, p) in m.iter().enumerate() {
            let off = (j as f64 - c + 0.5 * n).rem_euclid(n) - 0.5 * n;
            m1 += p * off;
            if off.abs() >= 0.25 * n {
                far += p;
            }
        }
        if total > 1e-12 && far > UNWRAP_TOLERANCE * total {
            return Err(QcaError::UnwrapInvalid { mass: far / total });
        }
        mass = total;
        moment.push((c * total + m1) * a);
    }
    Ok((mass, moment))
}
