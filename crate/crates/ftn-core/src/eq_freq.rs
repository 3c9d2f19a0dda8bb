//! Cyclic-prefix frequency-domain MMSE equalization and eigen-precoding.
//!
//! With a long enough cyclic prefix the matched-filter observation is
//! `y = C x + ν` where `C` is the circulant built from the Ungerboeck taps and
//! `ν ~ CN(0, N0·C)`. The DFT diagonalizes `C` with eigenvalues
//! `λ_k = Σ_j c[j] e^{-j2πjk/N}`; `τT·λ_k` samples the folded spectrum at `ξ = k/N`.

use crate::capacity::waterfill_levels;
use crate::error::{Error, Result};
use crate::model::{Constellation, Observation, ObservationModel};
use crate::pulse::FoldedSpectrum;
use crate::C64;
use crate::eq_time::LLR_CLAMP;
use rustfft::FftPlanner;

#[derive(Debug, Clone, PartialEq)]
pub struct FdeSetting {
    pub n: usize,
    pub cp_len: usize,
    /// Circulant eigenvalues (dimensionless, `g[0] = 1` scale).
    pub eigenvalues: Vec<f64>,
    /// `N0 / Es`.
    pub regularization: f64,
}

impl FdeSetting {
    /// Setting for a frequency-domain observation.
    pub fn from_observation(obs: &Observation, es: f64, cp_len: usize) -> Result<Self> {
        if obs.model != ObservationModel::FreqDomain {
            return Err(Error::invalid("model", "FDE needs a FreqDomain observation"));
        }
        let k = obs.tap_offset;
        let one_sided = &obs.taps[k..];
        Ok(FdeSetting {
            n: obs.n_symbols,
            cp_len,
            eigenvalues: circulant_eigenvalues(one_sided, obs.n_symbols),
            regularization: obs.n0 / es,
        })
    }
}

/// Eigenvalues of the `n × n` symmetric circulant with first row built from
/// one-sided taps `g[0..=K]` (requires `n > 2K`).
pub fn circulant_eigenvalues(g: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let mut acc = g[0];
            for (j, &gj) in g.iter().enumerate().skip(1) {
                acc += 2.0 * gj * (2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64).cos();
            }
            acc
        })
        .collect()
}

/// Maps DFT bin `k` of an `n`-point transform to `ξ ∈ [-1/2, 1/2)`.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    let xi = k as f64 / n as f64;
    if xi >= 0.5 {
        xi - 1.0
    } else {
        xi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdeOutput {
    pub estimates: Vec<C64>,
    /// Gaussian-approximation bit LLRs (`ln P(0)/P(1)`).
    pub llr: Vec<f64>,
    /// Averaged post-equalization bias `μ`, with `x̂ ≈ μ·x + e`.
    pub bias: f64,
    /// Variance of `e`.
    pub noise_var: f64,
}

/// `X̂_k = Y_k / (λ_k + N0/Es)` followed by an inverse DFT.
pub fn fde_mmse(obs: &Observation, setting: &FdeSetting, constellation: Constellation, es: f64) -> Result<FdeOutput> {
    let n = setting.n;
    if obs.samples.len() != n || setting.eigenvalues.len() != n {
        return Err(Error::invalid("n", "observation and setting lengths differ"));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = obs.samples.clone();
    planner.plan_fft_forward(n).process(&mut buf);
    let r = setting.regularization;
    for (v, &lam) in buf.iter_mut().zip(&setting.eigenvalues) {
        let den = lam + r;
        *v = if den > 1e-300 { *v / den } else { C64::new(0.0, 0.0) };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let estimates: Vec<C64> = buf.into_iter().map(|v| v * scale).collect();

    let bias = setting
        .eigenvalues
        .iter()
        .map(|&lam| if lam + r > 1e-300 { lam.max(0.0) / (lam + r) } else { 0.0 })
        .sum::<f64>()
        / n as f64;
    let noise_var = (es * bias * (1.0 - bias)).max(1e-300);
    let llr = gaussian_llrs(&estimates, constellation, es, bias, noise_var);
    Ok(FdeOutput {
        estimates,
        llr,
        bias,
        noise_var,
    })
}

/// Bit LLRs for `x̂ = μx + e`, `e ~ CN(0, σ²)`.
pub fn gaussian_llrs(estimates: &[C64], constellation: Constellation, es: f64, bias: f64, noise_var: f64) -> Vec<f64> {
    let clamp = |v: f64| v.clamp(-LLR_CLAMP, LLR_CLAMP);
    match constellation {
        Constellation::Bpsk => {
            let a = 4.0 * bias * es.sqrt() / noise_var;
            estimates.iter().map(|x| clamp(a * x.re)).collect()
        }
        Constellation::Qpsk => {
            let a = 4.0 * bias * (es / 2.0).sqrt() / noise_var;
            estimates.iter().flat_map(|x| [clamp(a * x.re), clamp(a * x.im)]).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoding {
    pub powers: Vec<f64>,
    pub rate: f64,
}

/// Water-filling power allocation across the bins of a sampled folded spectrum;
/// `rate = Σ log2(1 + p_k λ_k / N0) / (N τT)` in bits/s.
pub fn evd_precode(fs: &FoldedSpectrum, total_power: f64, n0: f64) -> Result<Precoding> {
    let (powers, _) = waterfill_levels(&fs.values, total_power, n0)?;
    let rate = powers
        .iter()
        .zip(&fs.values)
        .map(|(&p, &lam)| (1.0 + p * lam / n0).log2())
        .sum::<f64>()
        / (fs.len() as f64 * fs.symbol_duration());
    Ok(Precoding { powers, rate })
}

/// Folded spectrum sampled at the DFT bins `ξ = k/N` via circulant eigenvalues.
pub fn eigen_spectrum(g: &[f64], n: usize, tau: f64, symbol_time: f64) -> FoldedSpectrum {
    let lam = circulant_eigenvalues(g, n);
    FoldedSpectrum {
        xi: (0..n).map(|k| bin_frequency(k, n)).collect(),
        values: lam.iter().map(|v| v * tau * symbol_time).collect(),
        tau,
        symbol_time,
    }
}

/// Spectral efficiency loss factor of a cyclic prefix, `N / (N + cp)`.
pub fn cp_efficiency(n: usize, cp_len: usize) -> f64 {
    n as f64 / (n + cp_len) as f64
}
