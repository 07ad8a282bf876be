//! Coin operators of the Weyl and Dirac automata.
//!
//! Every coin is built from a *Weyl symbol* `(d, ñ)` with `d² + |ñ|² = 1`,
//! which gives the 2×2 block `A = d·I − i·ñ·σ`. The Dirac coins couple two
//! copies of that block with a mass term:
//!
//! ```text
//! U = [[n·A, i·m·I], [i·m·I, n·A†]],   n² + m² = 1
//! ```
//!
//! Wave-vectors are dimensionless (lattice step = 1). In 3D the `c_α`, `s_α`
//! functions are `cos(k_α/√3)`, `sin(k_α/√3)`, so the coins are periodic with
//! period `2√3·π` per axis; in 1D and 2D the period is `2π`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QcaError, Result};
use crate::linalg::{block2, pauli_dot, unitarity_residual, CMatrix, I, ZERO};

const SQRT2: f64 = std::f64::consts::SQRT_2;

pub(crate) fn sqrt3() -> f64 {
    3.0_f64.sqrt()
}

/// Period of the fundamental cell along each axis for a lattice of dimension `dim`.
pub fn cell_period(dim: usize) -> f64 {
    match dim {
        3 => 2.0 * sqrt3() * PI,
        _ => 2.0 * PI,
    }
}

/// Reduce `x` into `[-period/2, period/2)`.
pub(crate) fn reduce_periodic(x: f64, period: f64) -> f64 {
    // leave in-range values untouched so tiny wave-vectors keep full precision
    if (-0.5 * period..0.5 * period).contains(&x) {
        return x;
    }
    let r = (x + 0.5 * period).rem_euclid(period) - 0.5 * period;
    // rem_euclid can return `period` itself for tiny negative inputs
    if r >= 0.5 * period {
        r - period
    } else {
        r
    }
}

/// A point of the wave-vector fundamental cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveVector {
    comps: [f64; 3],
    dim: usize,
}

impl WaveVector {
    /// Build from 1 to 3 components; components are reduced modulo the cell period.
    pub fn new(components: &[f64]) -> Result<Self> {
        let dim = components.len();
        if !(1..=3).contains(&dim) {
            return Err(invalid("k", format!("expected 1 to 3 components, got {dim}")));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(invalid("k", "components must be finite"));
        }
        let period = cell_period(dim);
        let mut comps = [0.0; 3];
        for (dst, src) in comps.iter_mut().zip(components) {
            *dst = reduce_periodic(*src, period);
        }
        Ok(Self { comps, dim })
    }

    pub fn d1(k: f64) -> Self {
        Self::new(&[k]).expect("finite 1D wave-vector")
    }

    pub fn d2(k1: f64, k2: f64) -> Self {
        Self::new(&[k1, k2]).expect("finite 2D wave-vector")
    }

    pub fn d3(kx: f64, ky: f64, kz: f64) -> Self {
        Self::new(&[kx, ky, kz]).expect("finite 3D wave-vector")
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            comps: [0.0; 3],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.comps[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.as_slice().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Copy with `delta` added to axis `axis` (re-reduced).
    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let mut c = self.comps;
        c[axis] += delta;
        Self::new(&c[..self.dim]).expect("shift keeps components finite")
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let c: Vec<f64> = self.as_slice().iter().map(|x| x * factor).collect();
        Self::new(&c).expect("scaling keeps components finite")
    }

    fn xyz(&self) -> [f64; 3] {
        self.comps
    }
}

/// Which of the two inequivalent 3D Weyl automata.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    #[serde(rename = "+")]
    Plus,
    #[default]
    #[serde(rename = "-")]
    Minus,
}

impl Chirality {
    /// `+1` for `Plus`; this is the upper sign of `∓`/`±` in the symbol formulas.
    fn upper(self) -> f64 {
        match self {
            Chirality::Plus => 1.0,
            Chirality::Minus => -1.0,
        }
    }

    pub fn sign(self) -> f64 {
        self.upper()
    }
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chirality::Plus => "+",
            Chirality::Minus => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Weyl1d,
    Weyl2d,
    Weyl3d,
    Dirac1d,
    Dirac2d,
    Dirac3d,
}

impl Model {
    pub fn dim(self) -> usize {
        match self {
            Model::Weyl1d | Model::Dirac1d => 1,
            Model::Weyl2d | Model::Dirac2d => 2,
            Model::Weyl3d | Model::Dirac3d => 3,
        }
    }

    pub fn is_dirac(self) -> bool {
        matches!(self, Model::Dirac1d | Model::Dirac2d | Model::Dirac3d)
    }

    /// Number of internal components per site.
    pub fn internal_dim(self) -> usize {
        if self.is_dirac() && self.dim() > 1 {
            4
        } else {
            2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Weyl1d => "weyl1d",
            Model::Weyl2d => "weyl2d",
            Model::Weyl3d => "weyl3d",
            Model::Dirac1d => "dirac1d",
            Model::Dirac2d => "dirac2d",
            Model::Dirac3d => "dirac3d",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Model {
    type Err = QcaError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "weyl1d" => Model::Weyl1d,
            "weyl2d" => Model::Weyl2d,
            "weyl3d" => Model::Weyl3d,
            "dirac1d" => Model::Dirac1d,
            "dirac2d" => Model::Dirac2d,
            "dirac3d" => Model::Dirac3d,
            other => return Err(invalid("model", format!("unknown model `{other}`"))),
        })
    }
}

/// A concrete automaton: model, chirality (3D only) and mass (Dirac only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonSpec {
    pub model: Model,
    pub chirality: Chirality,
    mass: f64,
}

impl AutomatonSpec {
    pub fn new(model: Model, chirality: Chirality, mass: f64) -> Result<Self> {
        if !mass.is_finite() || !(0.0..=1.0).contains(&mass) {
            return Err(invalid("mass", format!("must lie in [0, 1], got {mass}")));
        }
        if !model.is_dirac() && mass != 0.0 {
            return Err(invalid("mass", "Weyl automata are massless"));
        }
        Ok(Self {
            model,
            chirality,
            mass,
        })
    }

    pub fn weyl(dim: usize) -> Self {
        let model = match dim {
            1 => Model::Weyl1d,
            2 => Model::Weyl2d,
            _ => Model::Weyl3d,
        };
        Self::new(model, Chirality::Minus, 0.0).expect("massless Weyl")
    }

    pub fn dirac(dim: usize, mass: f64) -> Result<Self> {
        let model = match dim {
            1 => Model::Dirac1d,
            2 => Model::Dirac2d,
            _ => Model::Dirac3d,
        };
        Self::new(model, Chirality::Minus, mass)
    }

    pub fn with_chirality(mut self, chirality: Chirality) -> Self {
        self.chirality = chirality;
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Hopping amplitude `n = √(1 − m²)`.
    pub fn n_coupling(&self) -> f64 {
        if self.model.is_dirac() {
            ((1.0 - self.mass) * (1.0 + self.mass)).sqrt()
        } else {
            1.0
        }
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn internal_dim(&self) -> usize {
        self.model.internal_dim()
    }

    /// The coin `A_k` (Weyl) or `U_k` (Dirac).
    pub fn coin(&self, k: &WaveVector) -> Result<CoinOperator> {
        if self.model.is_dirac() {
            dirac_coin(k, self)
        } else {
            weyl_coin(k, self)
        }
    }

    /// Closed-form spectral data of the coin at `k`.
    pub fn symbol(&self, k: &WaveVector) -> Result<CoinSymbol> {
        let weyl = weyl_symbol(k, self)?;
        Ok(CoinSymbol {
            weyl,
            dirac: self.model.is_dirac(),
            n: self.n_coupling(),
            m: self.mass,
        })
    }
}

/// The `(d, ñ)` pair of a Weyl coin `A = d·I − i·ñ·σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylSymbol {
    pub d: f64,
    pub n_tilde: [f64; 3],
}

impl WeylSymbol {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::identity(2, 2) * C64::new(self.d, 0.0) - pauli_dot(self.n_tilde) * I
    }

    pub fn n_tilde_norm(&self) -> f64 {
        self.n_tilde.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Auxiliary vector functions of the 3D Weyl automaton at one `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NVector {
    pub n_tilde: [f64; 3],
    pub d: f64,
    /// `λ = arccos(d) ∈ [0, π]`.
    pub lambda: f64,
    /// `n = λ·ñ / sin λ`, continued to `ñ` at `λ = 0`.
    pub n: [f64; 3],
    pub chirality: Chirality,
}

impl NVector {
    pub fn n_norm(&self) -> f64 {
        self.n.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// The 3D symbol: `ñ`, `d` from the `c_α`, `s_α` products.
fn symbol_3d(k: [f64; 3], chirality: Chirality) -> WeylSymbol {
    let r = 1.0 / sqrt3();
    let (sx, cx) = (k[0] * r).sin_cos();
    let (sy, cy) = (k[1] * r).sin_cos();
    let (sz, cz) = (k[2] * r).sin_cos();
    let u = chirality.upper();
    WeylSymbol {
        n_tilde: [
            sx * cy * cz - u * cx * sy * sz,
            -u * cx * sy * cz - sx * cy * sz,
            cx * cy * sz - u * sx * sy * cz,
        ],
        d: cx * cy * cz + u * sx * sy * sz,
    }
}

/// `ñ`, `d`, `λ`, `n` of the 3D Weyl automaton.
pub fn n_vector(k: &WaveVector, chirality: Chirality) -> Result<NVector> {
    if k.dim() != 3 {
        return Err(QcaError::DimensionMismatch {
            expected: 3,
            got: k.dim(),
        });
    }
    let sym = symbol_3d(k.xyz(), chirality);
    let sin_l = sym.n_tilde_norm();
    // atan2 equals arccos(d) on the unit sphere d² + |ñ|² = 1 and keeps full
    // precision near d = ±1 where arccos loses digits.
    let lambda = sin_l.atan2(sym.d.clamp(-1.0, 1.0));
    let scale = if sin_l > 0.0 { lambda / sin_l } else { 1.0 };
    let n = sym.n_tilde.map(|c| c * scale);
    Ok(NVector {
        n_tilde: sym.n_tilde,
        d: sym.d,
        lambda,
        n,
        chirality,
    })
}

fn weyl_symbol(k: &WaveVector, spec: &AutomatonSpec) -> Result<WeylSymbol> {
    let dim = spec.dim();
    if k.dim() != dim {
        return Err(QcaError::DimensionMismatch {
            expected: dim,
            got: k.dim(),
        });
    }
    let c = k.xyz();
    Ok(match dim {
        1 => {
            let (s, co) = c[0].sin_cos();
            WeylSymbol {
                d: co,
                n_tilde: [0.0, 0.0, s],
            }
        }
        2 => {
            let kx = (c[0] + c[1]) / SQRT2;
            let ky = (c[0] - c[1]) / SQRT2;
            let (sx, cx) = (kx / SQRT2).sin_cos();
            let (sy, cy) = (ky / SQRT2).sin_cos();
            WeylSymbol {
                d: cx * cy,
                n_tilde: [sx * cy, cx * sy, sx * sy],
            }
        }
        _ => symbol_3d(c, spec.chirality),
    })
}

/// Closed-form structure shared by every coin of this crate:
/// `U = cos ω·I − i·S` with `S` Hermitian and `S² = sin²ω·I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinSymbol {
    pub weyl: WeylSymbol,
    pub dirac: bool,
    pub n: f64,
    pub m: f64,
}

impl CoinSymbol {
    pub fn internal_dim(&self) -> usize {
        if self.dirac {
            4
        } else {
            2
        }
    }

    pub fn cos_omega(&self) -> f64 {
        if self.dirac {
            self.n * self.weyl.d
        } else {
            self.weyl.d
        }
    }

    pub fn sin_omega(&self) -> f64 {
        let t = self.weyl.n_tilde_norm();
        if self.dirac {
            (self.n * self.n * t * t + self.m * self.m).sqrt()
        } else {
            t
        }
    }

    /// Dispersion `ω ∈ [0, π]`.
    pub fn omega(&self) -> f64 {
        self.sin_omega().atan2(self.cos_omega())
    }

    /// `S = sin ω · Ĝ`, the Hermitian part generating the step.
    pub fn sine_part(&self) -> CMatrix {
        let nt = pauli_dot(self.weyl.n_tilde);
        if self.dirac {
            let a = &nt * C64::new(self.n, 0.0);
            let off = CMatrix::identity(2, 2) * C64::new(-self.m, 0.0);
            block2(&a, &off, &off, &(-&a))
        } else {
            nt
        }
    }

    /// Unit generator `Ĝ` with `U = exp(−i·ω·Ĝ)`, `Ĝ² = I`.
    ///
    /// At the band-touching points (`sin ω = 0`) there is no preferred
    /// direction; the fixed fallback `σ_z` (block-diagonal `σ_z ⊕ −σ_z` for
    /// Dirac) is returned and the flag is `false`.
    pub fn generator(&self) -> (CMatrix, bool) {
        let s = self.sin_omega();
        if s > 0.0 {
            (self.sine_part() * C64::new(1.0 / s, 0.0), true)
        } else {
            let z = pauli_dot([0.0, 0.0, 1.0]);
            let g = if self.dirac {
                let zero = CMatrix::zeros(2, 2);
                block2(&z, &zero, &zero, &(-&z))
            } else {
                z
            };
            (g, false)
        }
    }

    /// Reassemble the coin matrix from the symbol.
    pub fn matrix(&self) -> CMatrix {
        let a = self.weyl.matrix();
        if self.dirac {
            let n = C64::new(self.n, 0.0);
            let mass = CMatrix::identity(2, 2) * (I * self.m);
            block2(&(&a * n), &mass, &mass, &(a.adjoint() * n))
        } else {
            a
        }
    }
}

/// The `s×s` unitary acting on the internal components at fixed `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinOperator {
    pub matrix: CMatrix,
    pub k: Option<WaveVector>,
}

impl CoinOperator {
    /// Wrap an arbitrary square matrix; unitarity is checked by the consumers.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(invalid("coin", "matrix must be square and non-empty"));
        }
        Ok(Self { matrix, k: None })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    pub fn determinant(&self) -> C64 {
        self.matrix.clone().determinant()
    }
}

/// Weyl coin `A_k` in 1, 2 or 3 dimensions.
pub fn weyl_coin(k: &WaveVector, spec: &AutomatonSpec) -> Result<CoinOperator> {
    if spec.model.is_dirac() {
        return Err(QcaError::WrongModel {
            expected: "Weyl",
            got: spec.model.to_string(),
        });
    }
    let sym = weyl_symbol(k, spec)?;
    let matrix = if spec.dim() == 1 {
        // exact diagonal phases
        let (s, c) = k.as_slice()[0].sin_cos();
        CMatrix::from_row_slice(2, 2, &[C64::new(c, -s), ZERO, ZERO, C64::new(c, s)])
    } else {
        sym.matrix()
    };
    Ok(CoinOperator {
        matrix,
        k: Some(*k),
    })
}

/// Dirac coin `U_k = [[n·A_k, i·m·I], [i·m·I, n·A_k†]]`.
pub fn dirac_coin(k: &WaveVector, spec: &AutomatonSpec) -> Result<CoinOperator> {
    if !spec.model.is_dirac() {
        return Err(QcaError::WrongModel {
            expected: "Dirac",
            got: spec.model.to_string(),
        });
    }
    let sym = weyl_symbol(k, spec)?;
    let n = C64::new(spec.n_coupling(), 0.0);
    let im = I * spec.mass();
    let matrix = if spec.dim() == 1 {
        let (s, c) = k.as_slice()[0].sin_cos();
        CMatrix::from_row_slice(2, 2, &[n * C64::new(c, -s), im, im, n * C64::new(c, s)])
    } else {
        let a = sym.matrix();
        let mass = CMatrix::identity(2, 2) * im;
        block2(&(&a * n), &mass, &mass, &(a.adjoint() * n))
    };
    Ok(CoinOperator {
        matrix,
        k: Some(*k),
    })
}

impl CoinSymbol {
    /// For 1D Dirac the 4×4 form reduces to a 2×2 block; this mirrors
    /// [`dirac_coin`] so that the closed form and the matrix agree.
    pub(crate) fn reduced(&self, dim: usize) -> ReducedSymbol {
        ReducedSymbol { sym: *self, dim }
    }
}

/// Symbol specialised to the internal dimension actually used by a model
/// (the 1D Dirac automaton has two components, not four).
#[derive(Clone, Copy, Debug)]
pub struct ReducedSymbol {
    sym: CoinSymbol,
    dim: usize,
}

impl ReducedSymbol {
    pub fn omega(&self) -> f64 {
        self.sym.omega()
    }

    pub fn internal_dim(&self) -> usize {
        if self.sym.dirac && self.dim > 1 {
            4
        } else {
            2
        }
    }

    /// `Ĝ` and a flag telling whether it is well defined.
    pub fn generator(&self) -> (CMatrix, bool) {
        if self.sym.dirac && self.dim == 1 {
            // U = [[n e^{-ik}, i m], [i m, n e^{ik}]] = cos ω − i·S,
            // S = [[n sin k, −m], [−m, −n sin k]].
            let s = self.sym.sin_omega();
            let nsk = self.sym.n * self.sym.weyl.n_tilde[2];
            if s > 0.0 {
                let inv = 1.0 / s;
                (
                    CMatrix::from_row_slice(
                        2,
                        2,
                        &[
                            C64::new(nsk * inv, 0.0),
                            C64::new(-self.sym.m * inv, 0.0),
                            C64::new(-self.sym.m * inv, 0.0),
                            C64::new(-nsk * inv, 0.0),
                        ],
                    ),
                    true,
                )
            } else {
                (pauli_dot([0.0, 0.0, 1.0]), false)
            }
        } else {
            self.sym.generator()
        }
    }

    pub fn matrix(&self) -> CMatrix {
        if self.sym.dirac && self.dim == 1 {
            let (n, m) = (self.sym.n, self.sym.m);
            let (c, s) = (self.sym.weyl.d, self.sym.weyl.n_tilde[2]);
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(n * c, -n * s),
                    I * m,
                    I * m,
                    C64::new(n * c, n * s),
                ],
            )
        } else {
            self.sym.matrix()
        }
    }
}

impl AutomatonSpec {
    /// Closed-form spectral structure at `k`, sized to the model's internal dimension.
    pub fn mode(&self, k: &WaveVector) -> Result<ReducedSymbol> {
        Ok(self.symbol(k)?.reduced(self.dim()))
    }
}
