//! Classical single-mode dynamics of the Maxwell automaton.
//!
//! A photon mode at `k` is built from the Weyl vector `n` at `k/2`. Its
//! transverse field obeys `∂ₜF = 2n × F`, `n·F = 0`, so `F` rotates rigidly
//! about `n̂` at angular frequency `ω = 2|n|`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::{n_vector, sqrt3, Chirality, WaveVector};
use crate::error::{invalid, QcaError, Result};
use crate::spectral::GRADIENT_STEP;

/// Relative tolerance on `n̂·F` accepted by [`TransverseField::new`].
pub const TRANSVERSE_TOLERANCE: f64 = 1e-12;

type CVec3 = [C64; 3];

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn re(v: &CVec3) -> [f64; 3] {
    v.map(|c| c.re)
}

fn im(v: &CVec3) -> [f64; 3] {
    v.map(|c| c.im)
}

fn cnorm(v: &CVec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonMode {
    pub k: [f64; 3],
    /// `n` of the Weyl automaton at `k/2`.
    pub n_half: [f64; 3],
    /// `ω = 2|n_half|`.
    pub omega: f64,
    pub chirality: Chirality,
}

impl PhotonMode {
    /// Unit vector along `n_half`, `None` at the cone tip.
    pub fn axis(&self) -> Option<[f64; 3]> {
        let l = norm(self.n_half);
        (l > 0.0).then(|| self.n_half.map(|c| c / l))
    }

    /// Circular-polarization basis `(e₊, e₋)`, transverse to `n_half`.
    /// Under [`evolve_mode`] `e±` picks up the phase `e^{∓iωt}`.
    pub fn circular_basis(&self) -> Result<(CVec3, CVec3)> {
        let a = self.axis().ok_or_else(|| QcaError::Degenerate {
            k: self.k.to_vec(),
            omega: self.omega,
        })?;
        // seed with the coordinate axis least aligned with n̂
        let j = (0..3)
            .min_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
            .unwrap_or(0);
        let mut seed = [0.0; 3];
        seed[j] = 1.0;
        let p = dot(seed, a);
        let e1 = {
            let v = [seed[0] - p * a[0], seed[1] - p * a[1], seed[2] - p * a[2]];
            let l = norm(v);
            v.map(|c| c / l)
        };
        let e2 = cross(a, e1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = std::array::from_fn(|i| C64::new(e1[i] * r, e2[i] * r));
        let minus = std::array::from_fn(|i| C64::new(e1[i] * r, -e2[i] * r));
        Ok((plus, minus))
    }
}

/// Photon mode at `k` with the default (−) Weyl chirality.
pub fn photon_dispersion(k: &WaveVector) -> Result<PhotonMode> {
    photon_dispersion_with(k, Chirality::Minus)
}

pub fn photon_dispersion_with(k: &WaveVector, chirality: Chirality) -> Result<PhotonMode> {
    if k.dim() != 3 {
        return Err(QcaError::DimensionMismatch {
            expected: 3,
            got: k.dim(),
        });
    }
    let half = k.scaled(0.5);
    let nv = n_vector(&half, chirality)?;
    let mut kk = [0.0; 3];
    kk.copy_from_slice(k.as_slice());
    Ok(PhotonMode {
        k: kk,
        n_half: nv.n,
        omega: 2.0 * nv.n_norm(),
        chirality,
    })
}

fn cone_tip(k: &WaveVector) -> QcaError {
    QcaError::Degenerate {
        k: k.as_slice().to_vec(),
        omega: 0.0,
    }
}

/// `|∇ω(k)|` by central differences, in units where `|∇ω| → 1` as `k → 0`.
///
/// Small-`k` photons obey `ω ≈ |k|/√3` on the automaton lattice; the factor
/// `√3` is the rescaling `k/√3 → k` to the usual wave-vector.
pub fn light_speed(k: &WaveVector, chirality: Chirality) -> Result<f64> {
    if k.dim() != 3 {
        return Err(QcaError::DimensionMismatch {
            expected: 3,
            got: k.dim(),
        });
    }
    let kn = k.norm();
    if kn == 0.0 {
        return Err(cone_tip(k));
    }
    // the cone has curvature 1/|k|, so the stencil scales with |k|
    let h = GRADIENT_STEP.min(1e-4 * kn);
    let mut g = [0.0; 3];
    for (a, ga) in g.iter_mut().enumerate() {
        let fp = photon_dispersion_with(&k.shifted(a, h), chirality)?.omega;
        let fm = photon_dispersion_with(&k.shifted(a, -h), chirality)?.omega;
        *ga = (fp - fm) / (2.0 * h);
    }
    Ok(sqrt3() * norm(g))
}

/// Direction that `n_half` approaches as `k → 0`: `k` itself for the (−)
/// automaton, `k` reflected in the y-axis for the (+) one.
pub fn relativistic_axis(k: [f64; 3], chirality: Chirality) -> [f64; 3] {
    match chirality {
        Chirality::Minus => k,
        Chirality::Plus => [k[0], -k[1], k[2]],
    }
}

/// Angle between `n̂_half` and its small-`k` direction (`k̂` for the default
/// chirality), which is the tilt of the polarization plane away from the
/// plane orthogonal to `k`.
pub fn polarization_tilt(k: &WaveVector, chirality: Chirality) -> Result<f64> {
    let mode = photon_dispersion_with(k, chirality)?;
    let kn = k.norm();
    if kn == 0.0 || mode.omega == 0.0 {
        return Err(cone_tip(k));
    }
    let r = relativistic_axis(mode.k, chirality);
    Ok(norm(cross(mode.n_half, r)).atan2(dot(mode.n_half, r)))
}

/// Transverse field amplitude `F` of one photon mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseField {
    pub f: CVec3,
    pub mode: PhotonMode,
}

impl TransverseField {
    pub fn new(f: CVec3, mode: PhotonMode) -> Result<Self> {
        if f.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("F", "non-finite component"));
        }
        let field = Self { f, mode };
        let r = field.transversality_residual();
        if r > TRANSVERSE_TOLERANCE * cnorm(&f).max(f64::MIN_POSITIVE) {
            return Err(invalid("F", format!("not transverse to n_half (|n̂·F| = {r:.3e})")));
        }
        Ok(field)
    }

    /// Drop the component of `f` along `n̂_half`.
    pub fn projected(f: CVec3, mode: PhotonMode) -> Result<Self> {
        let f = match mode.axis() {
            Some(a) => {
                let p: C64 = (0..3).map(|i| f[i] * a[i]).sum();
                std::array::from_fn(|i| f[i] - p * a[i])
            }
            None => f,
        };
        Self::new(f, mode)
    }

    /// `|n̂·F|`, zero at the cone tip.
    pub fn transversality_residual(&self) -> f64 {
        match self.mode.axis() {
            Some(a) => (0..3).map(|i| self.f[i] * a[i]).sum::<C64>().norm(),
            None => 0.0,
        }
    }

    pub fn magnitude(&self) -> f64 {
        cnorm(&self.f)
    }
}

/// Rotate `v` about the unit axis `a` by `theta`.
fn rodrigues(v: [f64; 3], a: [f64; 3], theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    let axv = cross(a, v);
    let p = dot(a, v) * (1.0 - c);
    std::array::from_fn(|i| v[i] * c + axv[i] * s + a[i] * p)
}

/// Exact solution of `∂ₜF = 2n × F`: a right-handed rotation of `Re F` and
/// `Im F` about `n̂` by `ωt`. At `k = 0` the field does not move.
pub fn evolve_mode(field: &TransverseField, t: f64) -> TransverseField {
    let Some(a) = field.mode.axis() else {
        return *field;
    };
    let theta = field.mode.omega * t;
    let r = rodrigues(re(&field.f), a, theta);
    let i = rodrigues(im(&field.f), a, theta);
    TransverseField {
        f: std::array::from_fn(|j| C64::new(r[j], i[j])),
        mode: field.mode,
    }
}

/// Classical `E = 2|n|·Re F` and `B = 2|n|·Im F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectroMagnetic {
    pub e: [f64; 3],
    pub b: [f64; 3],
}

#[allow(non_snake_case)]
pub fn fields_from_F(field: &TransverseField) -> ElectroMagnetic {
    let s = field.mode.omega;
    ElectroMagnetic {
        e: re(&field.f).map(|c| c * s),
        b: im(&field.f).map(|c| c * s),
    }
}

/// One row of the dispersion-surface export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub k: [f64; 3],
    pub omega: f64,
    pub c: f64,
    pub tilt: f64,
}

/// `ω`, light speed and tilt over a set of nonzero wave-vectors.
pub fn dispersion_surface(ks: &[WaveVector], chirality: Chirality) -> Result<Vec<SurfacePoint>> {
    ks.par_iter()
        .map(|k| {
            let mode = photon_dispersion_with(k, chirality)?;
            Ok(SurfacePoint {
                k: mode.k,
                omega: mode.omega,
                c: light_speed(k, chirality)?,
                tilt: polarization_tilt(k, chirality)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(len: f64) -> WaveVector {
        let c = len / sqrt3();
        WaveVector::d3(c, c, c)
    }

    fn field(mode: PhotonMode) -> TransverseField {
        let raw = [C64::new(0.3, -0.2), C64::new(-0.7, 0.4), C64::new(0.1, 0.9)];
        TransverseField::projected(raw, mode).unwrap()
    }

    #[test]
    fn dispersion_examples() {
        let m = photon_dispersion(&WaveVector::zero(3)).unwrap();
        assert_eq!(m.omega, 0.0);
        let k = WaveVector::d3(1e-3, 1e-3, 1e-3);
        let m = photon_dispersion(&k).unwrap();
        assert!((m.omega / 1e-3 - 1.0).abs() < 2e-4);
        assert!((m.omega - 2.0 * norm(m.n_half)).abs() < 1e-15);
        // on an axis n_{k/2} = (2 arcsin(sin(k/2√3)/…)) reduces to k/(2√3)
        let m = photon_dispersion(&WaveVector::d3(0.8, 0.0, 0.0)).unwrap();
        assert!((m.omega - 0.8 / sqrt3()).abs() < 1e-12, "{}", m.omega);
    }

    #[test]
    fn small_k_dispersion_matches_expansion() {
        // with a = k/√3: ω ≈ |a| ± a_x·a_y·a_z/(2|a|), + for the (−) automaton
        for k in [diag(1e-3), WaveVector::d3(1e-3, 1e-3, 1e-3), WaveVector::d3(1e-3, -4e-4, 2e-4)] {
            let a = k.as_slice().iter().map(|c| c / sqrt3()).collect::<Vec<_>>();
            let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            let cubic = a[0] * a[1] * a[2] / (2.0 * na);
            for (ch, sign) in [(Chirality::Minus, 1.0), (Chirality::Plus, -1.0)] {
                let w = photon_dispersion_with(&k, ch).unwrap().omega;
                let rel = w / (na + sign * cubic) - 1.0;
                assert!(rel.abs() < 1e-7, "{rel}");
            }
        }
    }

    #[test]
    fn light_speed_tends_to_one() {
        for len in [1e-2, 1e-3, 1e-4] {
            let c = light_speed(&WaveVector::d3(0.3 * len, 0.5 * len, -0.81 * len), Chirality::Minus).unwrap();
            assert!((c - 1.0).abs() < 2.0 * len, "{len}: {c}");
        }
        assert!(light_speed(&WaveVector::zero(3), Chirality::Plus).is_err());
    }

    #[test]
    fn light_speed_is_permutation_invariant() {
        let (a, b, c) = (0.21, -0.05, 0.13);
        let base = light_speed(&WaveVector::d3(a, b, c), Chirality::Plus).unwrap();
        for p in [[b, c, a], [c, a, b]] {
            let v = light_speed(&WaveVector::d3(p[0], p[1], p[2]), Chirality::Plus).unwrap();
            assert!((v - base).abs() < 1e-9);
        }
    }

    #[test]
    fn evolution_is_a_rotation() {
        let mode = photon_dispersion_with(&WaveVector::d3(0.4, -0.2, 0.7), Chirality::Plus).unwrap();
        let f0 = field(mode);
        assert_eq!(evolve_mode(&f0, 0.0), f0);
        let period = std::f64::consts::TAU / mode.omega;
        let back = evolve_mode(&f0, period);
        for i in 0..3 {
            assert!((back.f[i] - f0.f[i]).norm() < 1e-10);
        }
        let later = evolve_mode(&f0, 1234.5);
        assert!((later.magnitude() - f0.magnitude()).abs() < 1e-12);
        assert!(later.transversality_residual() < 1e-12);
    }

    #[test]
    fn evolution_solves_the_equation_of_motion() {
        // d/dt F = 2n × F, checked by a central difference in t
        let mode = photon_dispersion(&WaveVector::d3(0.9, 0.3, -0.5)).unwrap();
        let f0 = field(mode);
        let h = 1e-5;
        let fp = evolve_mode(&f0, 2.0 + h);
        let fm = evolve_mode(&f0, 2.0 - h);
        let f = evolve_mode(&f0, 2.0);
        let rhs_re = cross(mode.n_half, re(&f.f));
        let rhs_im = cross(mode.n_half, im(&f.f));
        for i in 0..3 {
            let d = (fp.f[i] - fm.f[i]) / (2.0 * h);
            assert!((d.re - 2.0 * rhs_re[i]).abs() < 1e-8);
            assert!((d.im - 2.0 * rhs_im[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn circular_modes_pick_up_a_phase() {
        let mode = photon_dispersion(&WaveVector::d3(0.2, 0.5, 0.1)).unwrap();
        let (ep, em) = mode.circular_basis().unwrap();
        let t = 3.7;
        for (e, sign) in [(ep, -1.0), (em, 1.0)] {
            let f = TransverseField::new(e, mode).unwrap();
            let out = evolve_mode(&f, t);
            let phase = C64::from_polar(1.0, sign * mode.omega * t);
            for i in 0..3 {
                assert!((out.f[i] - phase * e[i]).norm() < 1e-12);
            }
        }
        let em_fields = fields_from_F(&TransverseField::new(ep, mode).unwrap());
        assert!((norm(em_fields.e) - norm(em_fields.b)).abs() < 1e-12);
    }

    #[test]
    fn field_readout() {
        let mode = photon_dispersion(&WaveVector::d3(0.3, 0.1, 0.2)).unwrap();
        let (ep, _) = mode.circular_basis().unwrap();
        let real = TransverseField::new(ep.map(|c| C64::new(c.re, 0.0)), mode).unwrap();
        assert_eq!(fields_from_F(&real).b, [0.0; 3]);
        let eb = fields_from_F(&field(mode));
        assert!(dot(eb.e, mode.n_half).abs() < 1e-14);
        assert!(dot(eb.b, mode.n_half).abs() < 1e-14);
        let bad = [C64::new(mode.n_half[0], 0.0), C64::new(mode.n_half[1], 0.0), C64::new(mode.n_half[2], 0.0)];
        assert!(TransverseField::new(bad, mode).is_err());
    }

    #[test]
    fn tilt_vanishes_on_axes_and_grows_on_the_diagonal() {
        for axis in 0..3 {
            let mut c = [0.0; 3];
            c[axis] = 0.37;
            let t = polarization_tilt(&WaveVector::new(&c).unwrap(), Chirality::Minus).unwrap();
            assert!(t.abs() < 1e-15, "{t}");
        }
        let a = polarization_tilt(&diag(1e-3), Chirality::Minus).unwrap();
        let b = polarization_tilt(&diag(1e-2), Chirality::Minus).unwrap();
        assert!(a > 0.0 && (b / a - 10.0).abs() < 0.05, "{a} {b}");
        for ch in [Chirality::Plus, Chirality::Minus] {
            let t = polarization_tilt(&diag(5e-3), ch).unwrap();
            assert!((t / 5e-3 - b / 1e-2).abs() < 1e-3, "{ch:?}: {t}");
            let t = polarization_tilt(&WaveVector::d3(1e-4, 2e-4, -3e-4), ch).unwrap();
            assert!(t < 1e-4, "{ch:?}: {t}");
        }
    }

    #[test]
    fn cone_tip_field_is_constant() {
        let mode = photon_dispersion(&WaveVector::zero(3)).unwrap();
        let f = TransverseField::new([C64::new(1.0, 0.0); 3], mode).unwrap();
        assert_eq!(evolve_mode(&f, 10.0), f);
        assert!(mode.circular_basis().is_err());
    }
}
