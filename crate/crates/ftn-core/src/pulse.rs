//! Shaping pulses, their spectra, and the discrete ISI description they induce.
//!
//! A [`PulseShape`] is sampled on an oversampled grid with `samples_per_symbol`
//! ticks per symbol time `T`, hard-truncated to `±span·T` and renormalized to
//! unit energy. Samples use the continuous-amplitude convention: the energy is
//! `Σ h[i]² · dt` with `dt = T / samples_per_symbol`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Distance (in units of `T`) within which the RRC closed form is replaced by
/// its analytic limit.
const SINGULARITY_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseKind {
    Sinc,
    RootRaisedCosine,
}

impl PulseKind {
    pub fn name(&self) -> &'static str {
        match self {
            PulseKind::Sinc => "sinc",
            PulseKind::RootRaisedCosine => "rrc",
        }
    }
}

/// A truncated, sampled, energy-normalized shaping pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    kind: PulseKind,
    beta: f64,
    symbol_time: f64,
    span: usize,
    samples_per_symbol: usize,
    /// Normalization applied to the closed form so that the truncated samples have unit energy.
    scale: f64,
    samples: Vec<f64>,
}

impl PulseShape {
    /// Builds a pulse (`make_pulse`).
    pub fn new(
        kind: PulseKind,
        beta: f64,
        symbol_time: f64,
        span: usize,
        samples_per_symbol: usize,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("{beta} is outside [0, 1]")));
        }
        if kind == PulseKind::Sinc && beta != 0.0 {
            return Err(Error::invalid("beta", "a sinc pulse has no roll-off; use beta = 0"));
        }
        if !(symbol_time > 0.0 && symbol_time.is_finite()) {
            return Err(Error::invalid("symbol_time", "must be positive"));
        }
        if span < 4 {
            return Err(Error::invalid("span", format!("{span} < 4")));
        }
        if samples_per_symbol < 8 || samples_per_symbol % 2 != 0 {
            return Err(Error::invalid(
                "samples_per_symbol",
                format!("{samples_per_symbol} must be even and at least 8"),
            ));
        }
        Ok(Self::build(kind, beta, symbol_time, span, samples_per_symbol))
    }

    /// RRC pulse on an arbitrary integer oversampling grid, skipping the
    /// user-facing grid checks (used for the τT-orthogonal basis).
    pub(crate) fn rrc_on_grid(beta: f64, symbol_time: f64, span: usize, samples_per_symbol: usize) -> Self {
        Self::build(PulseKind::RootRaisedCosine, beta, symbol_time, span, samples_per_symbol.max(1))
    }

    fn build(kind: PulseKind, beta: f64, symbol_time: f64, span: usize, samples_per_symbol: usize) -> Self {
        let mut pulse = PulseShape {
            kind,
            beta,
            symbol_time,
            span,
            samples_per_symbol,
            scale: 1.0,
            samples: Vec::new(),
        };
        let half = span * samples_per_symbol;
        let raw: Vec<f64> = (0..=2 * half)
            .map(|i| pulse.closed_form((i as f64 - half as f64) / samples_per_symbol as f64))
            .collect();
        let energy: f64 = raw.iter().map(|v| v * v).sum::<f64>() * pulse.dt();
        pulse.scale = 1.0 / energy.sqrt();
        pulse.samples = raw.into_iter().map(|v| v * pulse.scale).collect();
        pulse
    }

    /// Sinc pulse with `T = 1`.
    pub fn sinc(span: usize, samples_per_symbol: usize) -> Result<Self> {
        Self::new(PulseKind::Sinc, 0.0, 1.0, span, samples_per_symbol)
    }

    /// Root-raised-cosine pulse with `T = 1`.
    pub fn rrc(beta: f64, span: usize, samples_per_symbol: usize) -> Result<Self> {
        Self::new(PulseKind::RootRaisedCosine, beta, 1.0, span, samples_per_symbol)
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn symbol_time(&self) -> f64 {
        self.symbol_time
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    /// Sampling interval of the oversampled grid.
    pub fn dt(&self) -> f64 {
        self.symbol_time / self.samples_per_symbol as f64
    }

    /// Pulse samples, centered: index `len()/2` is `t = 0`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index of the `t = 0` sample.
    pub fn center(&self) -> usize {
        self.span * self.samples_per_symbol
    }

    /// Discrete energy `Σ h² dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() * self.dt()
    }

    /// Two-sided bandwidth `W`.
    pub fn bandwidth(&self) -> f64 {
        (1.0 + self.beta) / self.symbol_time
    }

    /// Short label such as `rrc(0.3)` used in reports.
    pub fn descriptor(&self) -> String {
        match self.kind {
            PulseKind::Sinc => "sinc".to_string(),
            PulseKind::RootRaisedCosine => format!("rrc({})", self.beta),
        }
    }

    /// Truncated, normalized pulse evaluated at an arbitrary time.
    pub fn value_at(&self, t: f64) -> f64 {
        let u = t / self.symbol_time;
        if u.abs() > self.span as f64 + 1e-9 {
            return 0.0;
        }
        self.scale * self.closed_form(u)
    }

    /// Un-normalized closed form at `u = t / T` (amplitude in `1/√T`).
    fn closed_form(&self, u: f64) -> f64 {
        let amp = 1.0 / self.symbol_time.sqrt();
        match self.kind {
            PulseKind::Sinc => amp * sinc(u),
            PulseKind::RootRaisedCosine => amp * rrc_unit(u, self.beta),
        }
    }

    /// Closed-form `|H(f)|²` of the untruncated pulse (raised-cosine shape for
    /// RRC, ideal rectangle for sinc); zero beyond `W/2`.
    pub fn spectrum(&self, f: f64) -> f64 {
        let t = self.symbol_time;
        let a = (f * t).abs();
        match self.kind {
            PulseKind::Sinc => {
                if a < 0.5 {
                    t
                } else if a == 0.5 {
                    t / 2.0
                } else {
                    0.0
                }
            }
            PulseKind::RootRaisedCosine => {
                let b = self.beta;
                let lo = (1.0 - b) / 2.0;
                let hi = (1.0 + b) / 2.0;
                if a <= lo {
                    t
                } else if a > hi {
                    0.0
                } else {
                    0.5 * t * (1.0 + (PI / b * (a - lo)).cos())
                }
            }
        }
    }
}

pub(crate) fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-12 {
        1.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

/// Root-raised-cosine with unit symbol time.
fn rrc_unit(u: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return sinc(u);
    }
    if u.abs() < SINGULARITY_GUARD {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let t_sing = 1.0 / (4.0 * beta);
    if (u.abs() - t_sing).abs() < SINGULARITY_GUARD {
        let arg = PI / (4.0 * beta);
        return beta / 2f64.sqrt()
            * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * u * (1.0 - beta)).sin() + 4.0 * beta * u * (PI * u * (1.0 + beta)).cos();
    let den = PI * u * (1.0 - (4.0 * beta * u).powi(2));
    num / den
}

/// Discrete ISI description of an FTN link.
///
/// `g` holds the one-sided Ungerboeck taps `g[0..=K]`; for the real, even
/// pulses in scope the two-sided sequence is `g[-k] = g[k]`. `f`, when
/// present, holds the causal minimum-phase (Forney) factor.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiChannel {
    pub g: Vec<f64>,
    pub f: Option<Vec<f64>>,
    pub tau: f64,
    pub symbol_time: f64,
    /// Diagonal loading `ε` used when factorizing a spectrum with nulls.
    pub regularizer: f64,
    /// Pulse the taps were derived from, when known; used to detect exact spectral nulls.
    pub pulse: Option<PulseShape>,
}

impl IsiChannel {
    /// Channel from explicit one-sided taps (no pulse attached).
    pub fn from_taps(g: Vec<f64>, tau: f64, symbol_time: f64) -> Result<Self> {
        if g.is_empty() || g[0] <= 0.0 {
            return Err(Error::invalid("g", "g[0] must be positive"));
        }
        Ok(IsiChannel {
            g,
            f: None,
            tau,
            symbol_time,
            regularizer: 0.0,
            pulse: None,
        })
    }

    /// Highest tap index `K`.
    pub fn half_len(&self) -> usize {
        self.g.len() - 1
    }

    /// Tap `g[k]` for any signed `k` (zero outside the stored support).
    pub fn tap(&self, k: isize) -> f64 {
        self.g.get(k.unsigned_abs()).copied().unwrap_or(0.0)
    }

    /// Two-sided taps `g[-K..=K]`.
    pub fn two_sided(&self) -> Vec<f64> {
        let k = self.half_len();
        (0..=2 * k).map(|i| self.tap(i as isize - k as isize)).collect()
    }

    /// Discrete-time Fourier transform `Σ_k g[k] e^{-j2πkξ}` (real for even taps).
    pub fn dtft(&self, xi: f64) -> f64 {
        let mut acc = self.g[0];
        for (k, &gk) in self.g.iter().enumerate().skip(1) {
            acc += 2.0 * gk * (2.0 * PI * k as f64 * xi).cos();
        }
        acc
    }

    /// Smallest value of the folded spectrum relative to `g[0]`.
    ///
    /// Uses the closed-form folded spectrum when the pulse is known (so that
    /// exact nulls are seen as zeros), otherwise the DTFT of the taps.
    pub fn min_folded(&self) -> f64 {
        let grid = cell_centered_grid(4096);
        match &self.pulse {
            Some(p) => {
                let scale = self.tau * self.symbol_time;
                grid.iter()
                    .map(|&xi| folded_value(p, self.tau, xi) / scale)
                    .fold(f64::INFINITY, f64::min)
                    / self.g[0]
            }
            None => grid.iter().map(|&xi| self.dtft(xi)).fold(f64::INFINITY, f64::min) / self.g[0],
        }
    }

    /// Returns a copy with a different regularizer `ε`.
    pub fn with_regularizer(mut self, eps: f64) -> Self {
        self.regularizer = eps;
        self
    }
}

/// Default tap count `K = ⌈2·span/τ⌉`, the full support of the autocorrelation.
pub fn default_tap_count(pulse: &PulseShape, tau: f64) -> usize {
    (2.0 * pulse.span() as f64 / tau).ceil() as usize
}

/// Ungerboeck taps `g[k] = ∫ h(t) h(t - kτT) dt` by discrete inner products on
/// the oversampled grid, normalized so that `g[0] = 1`.
pub fn isi_taps(pulse: &PulseShape, tau: f64, k_max: usize) -> Result<IsiChannel> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid("tau", format!("{tau} is outside (0, 1]")));
    }
    let dt = pulse.dt();
    let center = pulse.center() as f64;
    let h = pulse.samples();
    let lag = tau * pulse.symbol_time();
    let ticks = lag / dt;
    let integer_lag = (ticks - ticks.round()).abs() < 1e-9;
    let mut g = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let v = if integer_lag {
            let shift = (ticks.round() as usize) * k;
            if shift >= h.len() {
                0.0
            } else {
                h[shift..].iter().zip(h).map(|(a, b)| a * b).sum::<f64>() * dt
            }
        } else {
            let shift = k as f64 * lag;
            h.iter()
                .enumerate()
                .map(|(i, &hi)| hi * pulse.value_at((i as f64 - center) * dt - shift))
                .sum::<f64>()
                * dt
        };
        g.push(v);
    }
    let g0 = g[0];
    for v in g.iter_mut() {
        *v /= g0;
    }
    if let Some(last) = g.last() {
        if k_max > 0 && last.abs() > 1e-3 {
            log::warn!(
                "isi_taps: |g[{k_max}]| = {:.2e} > 1e-3, truncation is too aggressive",
                last.abs()
            );
        }
    }
    Ok(IsiChannel {
        g,
        f: None,
        tau,
        symbol_time: pulse.symbol_time(),
        regularizer: 0.0,
        pulse: Some(pulse.clone()),
    })
}

/// Sampled folded spectrum `|H_fold(ξ)|²` (units of seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedSpectrum {
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
    pub tau: f64,
    pub symbol_time: f64,
}

impl FoldedSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Symbol duration `τT`.
    pub fn symbol_duration(&self) -> f64 {
        self.tau * self.symbol_time
    }

    /// `mean(values) / (τT)`, which equals the pulse energy (Parseval over one period).
    pub fn energy(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64 / self.symbol_duration()
    }

    /// Folded spectrum realized as `τT · DTFT(g)` on the given grid.
    pub fn from_channel(ch: &IsiChannel, xi: &[f64]) -> Self {
        let scale = ch.tau * ch.symbol_time;
        FoldedSpectrum {
            xi: xi.to_vec(),
            values: xi.iter().map(|&x| scale * ch.dtft(x)).collect(),
            tau: ch.tau,
            symbol_time: ch.symbol_time,
        }
    }

    /// Wraps explicit values (e.g. toy spectra in tests) on a cell-centered grid.
    pub fn from_values(values: Vec<f64>, tau: f64, symbol_time: f64) -> Self {
        FoldedSpectrum {
            xi: cell_centered_grid(values.len()),
            values,
            tau,
            symbol_time,
        }
    }
}

/// Cell-centered grid `ξ_i = -1/2 + (i + 1/2)/G`.
pub fn cell_centered_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -0.5 + (i as f64 + 0.5) / points as f64)
        .collect()
}

/// `Σ_n |H((ξ + n)/(τT))|²` summed over every shift with a nonzero contribution.
pub fn folded_value(pulse: &PulseShape, tau: f64, xi: f64) -> f64 {
    let rate = 1.0 / (tau * pulse.symbol_time());
    let reach = (pulse.bandwidth() / 2.0 / rate).ceil() as i64 + 1;
    (-reach..=reach)
        .map(|n| pulse.spectrum((xi + n as f64) * rate))
        .sum()
}

/// Folded spectrum on a cell-centered grid of `points` (a power of two ≥ 256).
pub fn folded_spectrum(pulse: &PulseShape, tau: f64, points: usize) -> Result<FoldedSpectrum> {
    if points < 256 || !points.is_power_of_two() {
        return Err(Error::invalid(
            "points",
            format!("{points} must be a power of two and at least 256"),
        ));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid("tau", format!("{tau} is outside (0, 1]")));
    }
    Ok(folded_spectrum_at(pulse, tau, &cell_centered_grid(points)))
}

/// Folded spectrum on an arbitrary `ξ` grid.
pub fn folded_spectrum_at(pulse: &PulseShape, tau: f64, xi: &[f64]) -> FoldedSpectrum {
    FoldedSpectrum {
        xi: xi.to_vec(),
        values: xi.iter().map(|&x| folded_value(pulse, tau, x)).collect(),
        tau,
        symbol_time: pulse.symbol_time(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(PulseShape::rrc(1.2, 16, 16).is_err());
        assert!(PulseShape::rrc(-0.1, 16, 16).is_err());
        assert!(PulseShape::new(PulseKind::Sinc, 0.2, 1.0, 16, 16).is_err());
        assert!(PulseShape::rrc(0.3, 3, 16).is_err());
        assert!(PulseShape::rrc(0.3, 16, 15).is_err());
    }

    #[test]
    fn sinc_peak_and_zero_crossings() {
        let p = PulseShape::sinc(16, 16).unwrap();
        let h = p.samples();
        let c = p.center();
        let peak = h.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(h[c], peak);
        for k in 1..16 {
            assert!(h[c + 16 * k].abs() < 1e-12);
            assert!(h[c - 16 * k].abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_normalized() {
        for beta in [0.0, 0.1, 0.3, 0.5, 1.0] {
            let p = PulseShape::rrc(beta, 16, 16).unwrap();
            assert!((p.energy() - 1.0).abs() < 1e-6, "beta {beta}");
        }
    }

    #[test]
    fn bandwidth_follows_roll_off() {
        assert!((PulseShape::rrc(0.5, 16, 16).unwrap().bandwidth() - 1.5).abs() < 1e-15);
        assert!((PulseShape::sinc(16, 16).unwrap().bandwidth() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rrc_singularities_are_continuous() {
        for beta in [0.1, 0.25, 0.5, 1.0] {
            let ts = 1.0 / (4.0 * beta);
            let at = rrc_unit(ts, beta);
            let near = rrc_unit(ts + 1e-6, beta);
            assert!((at - near).abs() < 1e-5, "beta {beta}: {at} vs {near}");
            assert!((rrc_unit(0.0, beta) - rrc_unit(1e-6, beta)).abs() < 1e-6);
        }
    }

    #[test]
    fn pulse_is_even() {
        let p = PulseShape::rrc(0.3, 16, 16).unwrap();
        let h = p.samples();
        let n = h.len();
        for i in 0..n / 2 {
            assert!((h[i] - h[n - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_values() {
        let s = PulseShape::sinc(16, 16).unwrap();
        assert_eq!(s.spectrum(0.0), 1.0);
        let r = PulseShape::rrc(0.5, 16, 16).unwrap();
        assert_eq!(r.spectrum(0.76), 0.0);
        assert!((r.spectrum(0.5) - 0.5).abs() < 1e-12);
    }

    /// Numeric Fourier transform of the sampled pulse as an independent check of
    /// the closed-form spectrum.
    #[test]
    fn spectrum_matches_numeric_fourier_transform() {
        let p = PulseShape::rrc(0.5, 16, 16).unwrap();
        let dt = p.dt();
        let c = p.center() as f64;
        for f in [0.0, 0.3, 0.5, 0.6, 0.7] {
            let h_f: f64 = p
                .samples()
                .iter()
                .enumerate()
                .map(|(i, &h)| h * (2.0 * PI * f * (i as f64 - c) * dt).cos())
                .sum::<f64>()
                * dt;
            assert!((h_f * h_f - p.spectrum(f)).abs() < 2e-3, "f = {f}");
        }
    }

    #[test]
    fn sinc_taps_match_closed_form() {
        // Long span so that hard truncation stays below 1e-3.
        let p = PulseShape::sinc(128, 16).unwrap();
        let ch = isi_taps(&p, 0.5, 4).unwrap();
        assert!((ch.g[0] - 1.0).abs() < 1e-12);
        assert!((ch.g[1] - 2.0 / PI).abs() < 1e-3, "{}", ch.g[1]);
    }

    #[test]
    fn rrc_is_nyquist_at_tau_one() {
        for beta in [0.1, 0.3, 0.5] {
            let p = PulseShape::rrc(beta, 16, 16).unwrap();
            let ch = isi_taps(&p, 1.0, 32).unwrap();
            // Lags near the span see the hard truncation edge; the near lags are exact.
            let worst = ch.g[1..=4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(worst <= 1e-4, "beta {beta}: {worst}");
        }
    }

    #[test]
    fn fractional_lags_agree_with_integer_lags() {
        // τ = 0.5 lands on the grid; evaluate the same lag through the closed-form path.
        let p = PulseShape::rrc(0.3, 16, 16).unwrap();
        let a = isi_taps(&p, 0.5, 6).unwrap();
        let q = PulseShape::rrc(0.3, 16, 18).unwrap(); // 0.5 * 18 = 9 ticks, still integer
        let b = isi_taps(&q, 0.5, 6).unwrap();
        for k in 0..=6 {
            assert!((a.g[k] - b.g[k]).abs() < 1e-6);
        }
        let c = isi_taps(&p, 0.503, 6).unwrap();
        assert!((c.g[1] - a.g[1]).abs() < 0.01);
    }

    #[test]
    fn folded_spectrum_nyquist_flat() {
        let p = PulseShape::rrc(0.5, 16, 16).unwrap();
        let fs = folded_spectrum(&p, 1.0, 1024).unwrap();
        for v in &fs.values {
            assert!((v - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn folded_spectrum_unaliased_has_nulls() {
        let p = PulseShape::rrc(0.5, 16, 16).unwrap();
        let fs = folded_spectrum(&p, 0.6, 1024).unwrap();
        for (xi, v) in fs.xi.iter().zip(&fs.values) {
            assert!((v - p.spectrum(xi / 0.6)).abs() < 1e-6);
        }
        let edge = fs.values[0];
        assert_eq!(edge, 0.0);
    }

    #[test]
    fn folded_spectrum_aliased_is_positive_not_flat() {
        let p = PulseShape::rrc(0.5, 16, 16).unwrap();
        let fs = folded_spectrum(&p, 0.8, 1024).unwrap();
        let min = fs.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = fs.values.iter().cloned().fold(f64::MIN, f64::max);
        assert!(min > 0.0);
        assert!(max - min > 0.1);
    }

    #[test]
    fn folded_spectrum_parseval() {
        for (beta, tau) in [(0.5, 0.6), (0.3, 0.8), (0.1, 1.0)] {
            let p = PulseShape::rrc(beta, 16, 16).unwrap();
            let fs = folded_spectrum(&p, tau, 4096).unwrap();
            assert!((fs.energy() - 1.0).abs() < 1e-4);
            let n = fs.len();
            for i in 0..n / 2 {
                assert!((fs.values[i] - fs.values[n - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn folded_spectrum_rejects_bad_grid() {
        let p = PulseShape::rrc(0.5, 16, 16).unwrap();
        assert!(folded_spectrum(&p, 0.8, 100).is_err());
        assert!(folded_spectrum(&p, 0.8, 128).is_err());
    }

    #[test]
    fn dtft_of_taps_matches_folded_spectrum() {
        let p = PulseShape::rrc(0.5, 16, 20).unwrap();
        for tau in [0.6, 0.8, 1.0] {
            let ch = isi_taps(&p, tau, default_tap_count(&p, tau)).unwrap();
            let direct = folded_spectrum(&p, tau, 512).unwrap();
            let via_taps = FoldedSpectrum::from_channel(&ch, &direct.xi);
            let worst = direct
                .values
                .iter()
                .zip(&via_taps.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "tau {tau}: {worst}");
        }
    }

    #[test]
    fn min_folded_detects_nulls() {
        let p = PulseShape::rrc(0.5, 16, 20).unwrap();
        let ch = isi_taps(&p, 0.6, 8).unwrap();
        assert!(ch.min_folded() < 1e-9);
        let ch = isi_taps(&p, 0.8, 8).unwrap();
        assert!(ch.min_folded() > 0.2);
    }
}
