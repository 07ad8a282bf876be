//! Zitterbewegung of the 1D Dirac automaton.
//!
//! A packet `ψ = P₊ψ + P₋ψ` is split once into its frequency branches; the
//! mean position then decomposes as `x = x₊ + x₋ + x_int`, where `x±` are
//! the mass-weighted positions of the branch components and `x_int` is the
//! interference term. All three are measured on exactly evolved states.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::automata::{AutomatonSpec, Model};
use crate::error::{invalid, QcaError, Result};
use crate::packets::{make_packet, weighted_position_about, MomentumGrid, ModeTable, PacketSpec};

/// Minimum spectral signal-to-noise accepted by [`fit_oscillation`].
pub const MIN_SNR: f64 = 3.0;
/// Opposite-branch weight below which a packet counts as single-branch.
pub const PURE_BRANCH_WEIGHT: f64 = 1e-20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDecomposition {
    pub times: Vec<i64>,
    pub x_total: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub x_int: Vec<f64>,
    /// Set when the packet has (numerically) no weight on one branch, so that
    /// `x_int` carries no oscillation.
    pub pure_branch: bool,
}

impl TrajectoryDecomposition {
    /// Largest violation of `x_total = x₊ + x₋ + x_int`.
    pub fn identity_residual(&self) -> f64 {
        (0..self.times.len())
            .map(|i| (self.x_total[i] - self.x_plus[i] - self.x_minus[i] - self.x_int[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Least-squares slope of `x₊ + x₋` against `t`.
    pub fn drift_velocity(&self) -> f64 {
        let y: Vec<f64> = self.x_plus.iter().zip(&self.x_minus).map(|(a, b)| a + b).collect();
        let t: Vec<f64> = self.times.iter().map(|&t| t as f64).collect();
        linear_fit(&t, &y).0
    }

    /// `x₊(t) + x₋(t)` at the sample whose time equals `t`.
    pub fn mean_position_at(&self, t: i64) -> Option<f64> {
        let i = self.times.iter().position(|&s| s == t)?;
        Some(self.x_plus[i] + self.x_minus[i])
    }
}

/// Evolve a packet of the 1D Dirac automaton for `0..=t_max` steps and
/// decompose its mean position. Positions are unwrapped about the packet's
/// initial centre.
pub fn decompose_trajectory(
    spec: &PacketSpec,
    automaton: &AutomatonSpec,
    grid: &MomentumGrid,
    t_max: i64,
) -> Result<TrajectoryDecomposition> {
    if automaton.model != Model::Dirac1d {
        return Err(QcaError::WrongModel {
            expected: "1D Dirac",
            got: automaton.model.to_string(),
        });
    }
    if t_max < 0 {
        return Err(invalid("t_max", "must be non-negative"));
    }
    let state = make_packet(spec, grid, automaton)?;
    let split = ModeTable::new(grid, automaton)?.split(&state)?;
    let weight = split.plus.norm_sqr().min(split.minus.norm_sqr());
    let center = spec.center.clone();
    let rows: Vec<[f64; 3]> = (0..=t_max)
        .into_par_iter()
        .map(|t| {
            let (plus, minus) = split.positions_at(t);
            let mut total = plus.clone();
            for (a, b) in total.amplitudes_mut().iter_mut().zip(minus.amplitudes()) {
                *a += b;
            }
            let (_, xt) = weighted_position_about(&total, &center)?;
            let (_, xp) = weighted_position_about(&plus, &center)?;
            let (_, xm) = weighted_position_about(&minus, &center)?;
            Ok([xt[0], xp[0], xm[0]])
        })
        .collect::<Result<_>>()?;
    let mut d = TrajectoryDecomposition {
        times: (0..=t_max).collect(),
        x_total: Vec::with_capacity(rows.len()),
        x_plus: Vec::with_capacity(rows.len()),
        x_minus: Vec::with_capacity(rows.len()),
        x_int: Vec::with_capacity(rows.len()),
        pure_branch: weight < PURE_BRANCH_WEIGHT,
    };
    for [xt, xp, xm] in rows {
        d.x_total.push(xt);
        d.x_plus.push(xp);
        d.x_minus.push(xm);
        d.x_int.push(xt - xp - xm);
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationFit {
    /// Cycles per step.
    pub frequency: f64,
    /// Largest excursion of `x_int` about its long-time mean during the first three periods.
    pub amplitude: f64,
    /// Log-log slope of the per-period envelope over the last half of the trace.
    pub decay_exponent: f64,
    /// Mean of `x_int` over the last half of the trace.
    pub shift: f64,
    /// Power of the main spectral peak over the strongest competing peak.
    pub snr: f64,
}

/// `(slope, intercept)` of the least-squares line through `(x, y)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

const PAD: usize = 16;

/// Periodogram of `y` zero-padded to `PAD` times its length (next power of two).
fn periodogram(y: &[f64]) -> (Vec<f64>, usize) {
    let len = (y.len() * PAD).next_power_of_two();
    let mut buf: Vec<C64> = y.iter().map(|&v| C64::new(v, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    (buf[..=len / 2].iter().map(|c| c.norm_sqr()).collect(), len)
}

/// Extract frequency, amplitude, decay and shift from the interference term.
///
/// Sample times must be consecutive integers.
pub fn fit_oscillation(decomp: &TrajectoryDecomposition) -> Result<OscillationFit> {
    let y = &decomp.x_int;
    let n = y.len();
    if n < 16 {
        return Err(invalid("t_max", "at least 16 samples are needed"));
    }
    if decomp.times.windows(2).any(|w| w[1] - w[0] != 1) {
        return Err(invalid("times", "samples must be consecutive steps"));
    }
    let t0 = decomp.times[0] as f64;
    let shift = y[n / 2..].iter().sum::<f64>() / (n - n / 2) as f64;
    let centred: Vec<f64> = y.iter().map(|v| v - shift).collect();

    let (power, len) = periodogram(&centred);
    let native = len as f64 / n as f64;
    // skip the lowest native bin, which holds residual drift
    let lo = native.ceil() as usize;
    let (peak, _) = power
        .iter()
        .enumerate()
        .skip(lo)
        .fold((lo, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
    // parabolic refinement on log power
    let refined = if peak > 0 && peak + 1 < power.len() {
        let (a, b, c) = (power[peak - 1].ln(), power[peak].ln(), power[peak + 1].ln());
        let den = a - 2.0 * b + c;
        if den.abs() > 0.0 && den.is_finite() {
            peak as f64 + 0.5 * (a - c) / den
        } else {
            peak as f64
        }
    } else {
        peak as f64
    };
    let frequency = refined / len as f64;
    // Ratio of the main peak to the strongest other local maximum of the
    // periodogram, outside two native bins of the peak (which holds the
    // main lobe and its first sidelobe).
    let lobe = 2.0 * native;
    let runner_up = (lo.max(1)..power.len() - 1)
        .filter(|&i| (i as f64 - refined).abs() > lobe)
        .filter(|&i| power[i] >= power[i - 1] && power[i] >= power[i + 1])
        .map(|i| power[i])
        .fold(0.0_f64, f64::max);
    let snr = if runner_up > 0.0 { power[peak] / runner_up } else { f64::INFINITY };
    if !(snr >= MIN_SNR) || !(frequency > 0.0 && frequency < 1.0) {
        return Err(QcaError::NoDominantPeak { snr: if snr.is_finite() { snr } else { 0.0 } });
    }

    let period = 1.0 / frequency;
    let early = ((3.0 * period).ceil() as usize + 1).min(n);
    let amplitude = centred[..early].iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    // per-period maxima of |y − shift|, regressed in log-log over the last half
    let w = (period.round() as usize).max(2);
    let (mut lt, mut la) = (Vec::new(), Vec::new());
    let mut start = 0;
    while start + w <= n {
        let (j, m) = centred[start..start + w]
            .iter()
            .enumerate()
            .fold((0, 0.0_f64), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
        let t = t0 + (start + j) as f64;
        if start >= n / 2 && t > 0.0 && m > 0.0 {
            lt.push(t.ln());
            la.push(m.ln());
        }
        start += w;
    }
    let decay_exponent = if lt.len() >= 2 { linear_fit(&lt, &la).0 } else { f64::NAN };

    Ok(OscillationFit {
        frequency,
        amplitude,
        decay_exponent,
        shift,
        snr,
    })
}
