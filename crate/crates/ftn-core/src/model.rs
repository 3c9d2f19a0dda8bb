//! Frame generation, AWGN and receiver observation models.
//!
//! Time conventions: frame symbol `n` is centered at `t = n·τT`. Cyclic-prefix
//! symbols sit at negative indices `-cp_len..0`. The waveform carries the full
//! pulse tails on both sides (`span/τ` symbols of silence), so there is no
//! tail-biting.

use crate::error::{Error, Result};
use crate::pulse::{isi_taps, IsiChannel, PulseShape};
use crate::util::{complex_gaussian, rng_from_seed};
use crate::C64;
use rand::Rng;
use rustfft::FftPlanner;

/// Default diagonal loading `ε = 1e-4 · g[0]` for factorizing spectra with nulls.
pub const DEFAULT_REGULARIZER: f64 = 1e-4;

/// Default roll-off of the τT-orthogonal RRC basis.
pub const DEFAULT_BASIS_BETA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constellation {
    Bpsk,
    Qpsk,
}

impl Constellation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Constellation::Bpsk => 1,
            Constellation::Qpsk => 2,
        }
    }

    pub fn size(&self) -> usize {
        1 << self.bits_per_symbol()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Constellation::Bpsk => "bpsk",
            Constellation::Qpsk => "qpsk",
        }
    }

    /// Point for label `a`; bit `i` of the label is the `i`-th bit of the symbol.
    ///
    /// BPSK maps bit 0 to `+√Es`; QPSK is Gray mapped,
    /// `((1 - 2b0) + j(1 - 2b1))·√(Es/2)`.
    pub fn point(&self, label: usize, es: f64) -> C64 {
        let bit = |i: usize| if (label >> i) & 1 == 0 { 1.0 } else { -1.0 };
        match self {
            Constellation::Bpsk => C64::new(bit(0) * es.sqrt(), 0.0),
            Constellation::Qpsk => C64::new(bit(0), bit(1)) * (es / 2.0).sqrt(),
        }
    }

    pub fn points(&self, es: f64) -> Vec<C64> {
        (0..self.size()).map(|a| self.point(a, es)).collect()
    }

    /// Maps a bit stream (length a multiple of bits-per-symbol) to symbols.
    pub fn map_bits(&self, bits: &[u8], es: f64) -> Vec<C64> {
        let m = self.bits_per_symbol();
        bits.chunks(m)
            .map(|c| {
                let label = c.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b as usize & 1) << i));
                self.point(label, es)
            })
            .collect()
    }

    /// Nearest-point hard decision, returned as a label.
    pub fn decide(&self, y: C64) -> usize {
        match self {
            Constellation::Bpsk => usize::from(y.re < 0.0),
            Constellation::Qpsk => usize::from(y.re < 0.0) | (usize::from(y.im < 0.0) << 1),
        }
    }
}

/// Link configuration shared by modulation and the receiver front-ends.
#[derive(Debug, Clone, PartialEq)]
pub struct FtnConfig {
    pub pulse: PulseShape,
    pub tau: f64,
    pub n_symbols: usize,
    pub constellation: Constellation,
    pub es: f64,
    pub cp_len: usize,
}

impl FtnConfig {
    pub fn new(
        pulse: PulseShape,
        tau: f64,
        n_symbols: usize,
        constellation: Constellation,
        es: f64,
        cp_len: usize,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::invalid("tau", format!("{tau} is outside (0, 1]")));
        }
        if n_symbols == 0 {
            return Err(Error::invalid("n_symbols", "must be at least 1"));
        }
        if cp_len >= n_symbols && cp_len > 0 {
            return Err(Error::invalid("cp_len", format!("{cp_len} must be smaller than N = {n_symbols}")));
        }
        if !(es > 0.0 && es.is_finite()) {
            return Err(Error::invalid("es", "must be positive"));
        }
        let ticks = tau * pulse.samples_per_symbol() as f64;
        if (ticks - ticks.round()).abs() > 1e-9 || ticks.round() < 1.0 {
            return Err(Error::invalid(
                "samples_per_symbol",
                format!(
                    "tau x samples_per_symbol = {ticks} is not an integer; choose samples_per_symbol so that tau·sps is whole"
                ),
            ));
        }
        Ok(FtnConfig {
            pulse,
            tau,
            n_symbols,
            constellation,
            es,
            cp_len,
        })
    }

    /// Oversampling ticks between consecutive symbols.
    pub fn step_ticks(&self) -> usize {
        (self.tau * self.pulse.samples_per_symbol() as f64).round() as usize
    }

    /// Symbol duration `τT`.
    pub fn symbol_duration(&self) -> f64 {
        self.tau * self.pulse.symbol_time()
    }

    /// Ungerboeck channel of this link with the full default tap count.
    pub fn channel(&self) -> Result<IsiChannel> {
        isi_taps(&self.pulse, self.tau, crate::pulse::default_tap_count(&self.pulse, self.tau))
    }
}

/// One transmitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub constellation: Constellation,
    pub symbols: Vec<C64>,
    pub bits: Vec<u8>,
    pub cp_len: usize,
}

impl SymbolFrame {
    pub fn from_bits(constellation: Constellation, es: f64, bits: Vec<u8>, cp_len: usize) -> Self {
        SymbolFrame {
            constellation,
            symbols: constellation.map_bits(&bits, es),
            bits,
            cp_len,
        }
    }

    /// Frame of i.i.d. uniform symbols.
    pub fn random(cfg: &FtnConfig, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let bits: Vec<u8> = (0..cfg.n_symbols * cfg.constellation.bits_per_symbol())
            .map(|_| rng.gen_range(0..2u8))
            .collect();
        Self::from_bits(cfg.constellation, cfg.es, bits, cfg.cp_len)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols in transmission order: the last `cp_len` symbols, then the frame.
    pub fn transmitted(&self) -> Vec<C64> {
        let n = self.symbols.len();
        let mut out = Vec::with_capacity(n + self.cp_len);
        out.extend_from_slice(&self.symbols[n - self.cp_len..]);
        out.extend_from_slice(&self.symbols);
        out
    }
}

/// Oversampled baseband signal. `origin` is the sample index of `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<C64>,
    pub dt: f64,
    pub origin: usize,
}

impl Waveform {
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.origin as f64) * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservationModel {
    Ungerboeck,
    Forney,
    OrthoBasis,
    FreqDomain,
}

/// Receiver observation together with the linear model that produced it.
///
/// The noiseless part is `y[n] = Σ_j taps[j] · x[n + tap_offset - j]`
/// (circularly in `n` for [`ObservationModel::FreqDomain`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub model: ObservationModel,
    pub samples: Vec<C64>,
    pub n0: f64,
    pub n_symbols: usize,
    pub taps: Vec<f64>,
    pub tap_offset: usize,
    pub channel: IsiChannel,
}

impl Observation {
    /// Noiseless output of the observation's linear model for symbols `x`.
    pub fn model_output(&self, x: &[C64]) -> Vec<C64> {
        let n = x.len();
        let circular = self.model == ObservationModel::FreqDomain;
        (0..self.samples.len())
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for (j, &t) in self.taps.iter().enumerate() {
                    let m = i as isize + self.tap_offset as isize - j as isize;
                    if circular {
                        acc += x[m.rem_euclid(n as isize) as usize] * t;
                    } else if m >= 0 && (m as usize) < n {
                        acc += x[m as usize] * t;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Pulse-shapes a frame: `s(t) = Σ x_n h(t - nτT)`, CP included.
pub fn modulate(cfg: &FtnConfig, frame: &SymbolFrame) -> Waveform {
    let step = cfg.step_ticks();
    let h = cfg.pulse.samples();
    let tx = frame.transmitted();
    let len = (tx.len() - 1) * step + h.len();
    let mut samples = vec![C64::new(0.0, 0.0); len];
    for (m, &x) in tx.iter().enumerate() {
        let start = m * step;
        for (s, &hv) in samples[start..start + h.len()].iter_mut().zip(h) {
            *s += x * hv;
        }
    }
    Waveform {
        samples,
        dt: cfg.pulse.dt(),
        origin: frame.cp_len * step + cfg.pulse.center(),
    }
}

/// Adds complex white Gaussian noise of one-sided PSD `N0`
/// (per-sample variance `N0 / dt`).
pub fn awgn(signal: &Waveform, n0: f64, seed: u64) -> Waveform {
    let mut out = signal.clone();
    if n0 <= 0.0 {
        return out;
    }
    let var = n0 / signal.dt;
    let mut rng = rng_from_seed(seed);
    for s in out.samples.iter_mut() {
        *s += complex_gaussian(&mut rng, var);
    }
    out
}

/// Correlates `signal` with `pulse` centered at `t = n·lag` for each `n` in `indices`.
fn correlate_at(signal: &Waveform, pulse: &PulseShape, step: usize, indices: impl Iterator<Item = isize>) -> Vec<C64> {
    let h = pulse.samples();
    let c = pulse.center() as isize;
    let dt = signal.dt;
    indices
        .map(|n| {
            let start = signal.origin as isize + n * step as isize - c;
            let lo = (-start).max(0) as usize;
            let hi = (signal.samples.len() as isize - start).clamp(0, h.len() as isize) as usize;
            let mut acc = C64::new(0.0, 0.0);
            for j in lo..hi {
                acc += signal.samples[(start + j as isize) as usize] * h[j];
            }
            acc * dt
        })
        .collect()
}

/// Matched filter and symbol-rate sampling (Ungerboeck observation).
/// Outputs for CP symbols are discarded; the result has length `N`.
pub fn mf_frontend(cfg: &FtnConfig, signal: &Waveform, n0: f64) -> Result<Observation> {
    let channel = cfg.channel()?;
    let samples = correlate_at(signal, &cfg.pulse, cfg.step_ticks(), 0..cfg.n_symbols as isize);
    let k = channel.half_len();
    Ok(Observation {
        model: ObservationModel::Ungerboeck,
        samples,
        n0,
        n_symbols: cfg.n_symbols,
        taps: channel.two_sided(),
        tap_offset: k,
        channel,
    })
}

/// One-sided length beyond which the taps carry less than `5e-4` of absolute mass.
pub fn effective_half_len(ch: &IsiChannel) -> usize {
    let mut tail = 0.0;
    for k in (1..ch.g.len()).rev() {
        tail += ch.g[k].abs();
        if tail >= 5e-4 {
            return k;
        }
    }
    0
}

/// Cyclic-prefix front-end: matched-filter outputs over a window that sees a
/// circular convolution, reordered so that `y = Circulant(g)·x`.
///
/// The window covers frame indices `[-cp/2, N - cp/2)`, which needs
/// `cp_len ≥ 2K` with `K` the effective one-sided tap length.
pub fn fd_frontend(cfg: &FtnConfig, signal: &Waveform, n0: f64) -> Result<Observation> {
    let channel = cfg.channel()?;
    let k = effective_half_len(&channel);
    if cfg.cp_len < 2 * k {
        return Err(Error::CpTooShort {
            cp_len: cfg.cp_len,
            required: 2 * k,
        });
    }
    let n = cfg.n_symbols;
    let half = (cfg.cp_len / 2) as isize;
    let window = correlate_at(signal, &cfg.pulse, cfg.step_ticks(), -half..n as isize - half);
    let mut samples = vec![C64::new(0.0, 0.0); n];
    for (i, v) in window.into_iter().enumerate() {
        let idx = (i as isize - half).rem_euclid(n as isize) as usize;
        samples[idx] = v;
    }
    let mut g_eff = channel.clone();
    g_eff.g.truncate(k + 1);
    Ok(Observation {
        model: ObservationModel::FreqDomain,
        samples,
        n0,
        n_symbols: n,
        taps: g_eff.two_sided(),
        tap_offset: k,
        channel,
    })
}

/// Fills `f` with the causal minimum-phase factor of `g + ε·δ`
/// (cepstral factorization of the folded spectrum).
pub fn whiten_forney(ch: &IsiChannel) -> Result<IsiChannel> {
    let eps = ch.regularizer * ch.g[0];
    if eps <= 0.0 {
        let min = ch.min_folded();
        if min < 1e-9 {
            return Err(Error::NullSpectrum { min });
        }
    }
    let k = ch.half_len();
    let grid = (16 * (k + 1)).max(4096).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(grid);
    let inv = planner.plan_fft_inverse(grid);
    let floor = 1e-14 * ch.g[0];
    let mut buf: Vec<C64> = (0..grid)
        .map(|m| C64::new((ch.dtft(m as f64 / grid as f64) + eps).max(floor).ln(), 0.0))
        .collect();
    inv.process(&mut buf);
    let scale = 1.0 / grid as f64;
    let half = grid / 2;
    let mut cep = vec![C64::new(0.0, 0.0); grid];
    cep[0] = C64::new(buf[0].re * scale / 2.0, 0.0);
    for n in 1..half {
        cep[n] = C64::new(buf[n].re * scale, 0.0);
    }
    cep[half] = C64::new(buf[half].re * scale / 2.0, 0.0);
    fwd.process(&mut cep);
    let mut spec: Vec<C64> = cep.into_iter().map(|c| c.exp()).collect();
    inv.process(&mut spec);
    let f_full: Vec<f64> = spec[..half].iter().map(|c| c.re * scale).collect();
    let total: f64 = f_full.iter().map(|v| v * v).sum();
    let mut acc = 0.0;
    let mut len = f_full.len();
    for (i, v) in f_full.iter().enumerate() {
        acc += v * v;
        if acc >= total * (1.0 - 1e-12) {
            len = i + 1;
            break;
        }
    }
    let mut out = ch.clone();
    out.f = Some(f_full[..len].to_vec());
    Ok(out)
}

/// Autocorrelation `Σ_n f[n] f[n+k]` for `k = 0..f.len()`.
pub fn autocorrelation(f: &[f64]) -> Vec<f64> {
    (0..f.len())
        .map(|k| f.iter().zip(&f[k..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Whitened-matched-filter observation `y = f ⋆ x + w`, `w ~ CN(0, N0)`,
/// including the `L` tail outputs (length `N + L`).
pub fn forney_observation(ch: &IsiChannel, frame: &SymbolFrame, n0: f64, seed: u64) -> Result<Observation> {
    let f = ch
        .f
        .clone()
        .ok_or_else(|| Error::invalid("f", "channel has no Forney taps; run whiten_forney first"))?;
    let n = frame.len();
    let l = f.len() - 1;
    let mut rng = rng_from_seed(seed);
    let mut obs = Observation {
        model: ObservationModel::Forney,
        samples: vec![C64::new(0.0, 0.0); n + l],
        n0,
        n_symbols: n,
        taps: f,
        tap_offset: 0,
        channel: ch.clone(),
    };
    let clean = obs.model_output(&frame.symbols);
    obs.samples = clean
        .into_iter()
        .map(|v| if n0 > 0.0 { v + complex_gaussian(&mut rng, n0) } else { v })
        .collect();
    Ok(obs)
}

/// Basis pulse used by [`ortho_basis_frontend`]: RRC with symbol time `τT`.
pub fn basis_pulse(cfg: &FtnConfig, beta_b: f64) -> PulseShape {
    PulseShape::rrc_on_grid(beta_b, cfg.symbol_duration(), 32, cfg.step_ticks())
}

/// Projection onto shifts of a τT-orthogonal RRC basis; white noise of variance `N0`.
pub fn ortho_basis_frontend(cfg: &FtnConfig, signal: &Waveform, n0: f64, beta_b: f64) -> Result<Observation> {
    if !(0.0..=1.0).contains(&beta_b) {
        return Err(Error::invalid("beta_b", format!("{beta_b} is outside [0, 1]")));
    }
    let basis = basis_pulse(cfg, beta_b);
    let step = cfg.step_ticks();
    let b = basis.samples();
    let dt = basis.dt();
    let mut leakage: f64 = 0.0;
    let mut shift = step;
    while shift < b.len() {
        let v: f64 = b[shift..].iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dt;
        leakage = leakage.max(v.abs());
        shift += step;
    }
    if leakage > 1e-4 {
        return Err(Error::NotOrthogonal { leakage });
    }
    let samples = correlate_at(signal, &basis, step, 0..cfg.n_symbols as isize);
    let channel = cfg.channel()?;
    let h = cfg.pulse.samples();
    let hc = cfg.pulse.center() as isize;
    let bc = basis.center() as isize;
    // c[d] = Σ h(t) b(t - dτT) dt; even in d for even pulses.
    let reach = ((hc + bc) / step as isize) + 1;
    let cross = |d: isize| -> f64 {
        let mut acc = 0.0;
        for (j, &bv) in b.iter().enumerate() {
            let i = j as isize - bc + d * step as isize + hc;
            if i >= 0 && (i as usize) < h.len() {
                acc += h[i as usize] * bv;
            }
        }
        acc * dt
    };
    let taps: Vec<f64> = (-reach..=reach).map(cross).collect();
    Ok(Observation {
        model: ObservationModel::OrthoBasis,
        samples,
        n0,
        n_symbols: cfg.n_symbols,
        taps,
        tap_offset: reach as usize,
        channel,
    })
}
