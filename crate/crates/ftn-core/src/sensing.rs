//! Expected ambiguity functions of random FTN signals and Doppler estimation.
//!
//! Delays are in units of `T`; Doppler frequencies in units of `1/T`.

use crate::error::{Error, Result};
use crate::model::{awgn, modulate, FtnConfig, SymbolFrame, Waveform};
use crate::util::{derive_seed, median};
use crate::C64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityGrid {
    pub delays: Vec<f64>,
    pub dopplers: Vec<f64>,
    /// `E|A(delay, ν)|²` normalized to the mean zero-lag energy; row-major by delay.
    pub values: Vec<f64>,
    /// Monte-Carlo standard error of each value.
    pub std_err: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl AmbiguityGrid {
    pub fn value(&self, delay_idx: usize, doppler_idx: usize) -> f64 {
        self.values[delay_idx * self.dopplers.len() + doppler_idx]
    }

    /// Doppler slice at a delay row.
    pub fn slice(&self, delay_idx: usize) -> &[f64] {
        let n = self.dopplers.len();
        &self.values[delay_idx * n..(delay_idx + 1) * n]
    }

    /// Row index of the delay closest to `delay`.
    pub fn delay_index(&self, delay: f64) -> usize {
        nearest(&self.delays, delay)
    }
}

fn nearest(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map_or(0, |(i, _)| i)
}

/// `A(d, ν) = Σ_i s_i s*_{i-d} e^{-j2πν t_i} dt` for every `ν` in `dopplers`.
pub fn ambiguity_row(s: &Waveform, lag: isize, dopplers: &[f64]) -> Vec<C64> {
    let n = s.samples.len() as isize;
    let lo = lag.max(0);
    let hi = (n + lag.min(0)).min(n);
    let prods: Vec<C64> = (lo..hi)
        .map(|i| s.samples[i as usize] * s.samples[(i - lag) as usize].conj())
        .collect();
    let t0 = s.time(lo.max(0) as usize);
    dopplers
        .iter()
        .map(|&nu| {
            let mut ph = C64::from_polar(1.0, -2.0 * PI * nu * t0);
            let step = C64::from_polar(1.0, -2.0 * PI * nu * s.dt);
            let mut acc = C64::new(0.0, 0.0);
            for &p in &prods {
                acc += p * ph;
                ph *= step;
            }
            acc * s.dt
        })
        .collect()
}

/// Monte-Carlo expected squared ambiguity function over random frames.
pub fn expected_af(cfg: &FtnConfig, delays: &[f64], dopplers: &[f64], trials: usize, seed: u64) -> Result<AmbiguityGrid> {
    if trials < 100 {
        return Err(Error::invalid("trials", format!("{trials} < 100")));
    }
    let dt = cfg.pulse.dt();
    let lags: Vec<isize> = delays
        .iter()
        .map(|&d| {
            let ticks = d * cfg.pulse.symbol_time() / dt;
            if (ticks - ticks.round()).abs() > 1e-6 {
                Err(Error::invalid("delays", format!("delay {d} is not a multiple of the sample spacing")))
            } else {
                Ok(ticks.round() as isize)
            }
        })
        .collect::<Result<_>>()?;
    let cells = delays.len() * dopplers.len();
    let mut sum = vec![0.0; cells];
    let mut sum_sq = vec![0.0; cells];
    let mut energy_sq = 0.0;
    for t in 0..trials {
        let frame = SymbolFrame::random(cfg, derive_seed(seed, t as u64));
        let s = modulate(cfg, &frame);
        energy_sq += s.energy().powi(2);
        for (r, &lag) in lags.iter().enumerate() {
            for (c, a) in ambiguity_row(&s, lag, dopplers).into_iter().enumerate() {
                let v = a.norm_sqr();
                sum[r * dopplers.len() + c] += v;
                sum_sq[r * dopplers.len() + c] += v * v;
            }
        }
    }
    let tn = trials as f64;
    let norm = energy_sq / tn;
    let values = sum.iter().map(|s| s / tn / norm).collect();
    let std_err = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, q)| {
            let mean = s / tn;
            let var = (q / tn - mean * mean).max(0.0) * tn / (tn - 1.0);
            (var / tn).sqrt() / norm
        })
        .collect();
    Ok(AmbiguityGrid {
        delays: delays.to_vec(),
        dopplers: dopplers.to_vec(),
        values,
        std_err,
        trials,
        seed,
    })
}

/// Detector settings for spurious Doppler peaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    /// Peaks with `|ν|` at or below this radius belong to the mainlobe.
    pub exclusion: f64,
    /// Required ratio over the neighborhood median.
    pub factor: f64,
    /// Neighborhood annulus `inner < |ν' − ν| < outer` used for the median floor.
    pub inner: f64,
    pub outer: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            exclusion: 0.2,
            factor: 3.0,
            inner: 0.05,
            outer: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub delay: f64,
    pub doppler: f64,
    pub value: f64,
    /// Value over the neighborhood median.
    pub ratio: f64,
}

/// Local maxima along Doppler outside the mainlobe that stand above their neighborhood.
pub fn af_peak_report(grid: &AmbiguityGrid, params: &PeakParams) -> Vec<Peak> {
    let nd = grid.dopplers.len();
    let mut peaks = Vec::new();
    for (r, &delay) in grid.delays.iter().enumerate() {
        let row = grid.slice(r);
        for j in 1..nd.saturating_sub(1) {
            let nu = grid.dopplers[j];
            if nu.abs() <= params.exclusion {
                continue;
            }
            let v = row[j];
            if !(v >= row[j - 1] && v >= row[j + 1] && (v > row[j - 1] || v > row[j + 1])) {
                continue;
            }
            let hood: Vec<f64> = grid
                .dopplers
                .iter()
                .zip(row)
                .filter(|(x, _)| {
                    let d = (**x - nu).abs();
                    d > params.inner && d < params.outer
                })
                .map(|(_, &y)| y)
                .collect();
            if hood.is_empty() {
                continue;
            }
            let floor = median(&hood);
            let ratio = if floor > 0.0 { v / floor } else { f64::INFINITY };
            if ratio > params.factor {
                peaks.push(Peak {
                    delay,
                    doppler: nu,
                    value: v,
                    ratio,
                });
            }
        }
    }
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub doppler: f64,
    pub amplitude: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingScene {
    pub targets: Vec<Target>,
    /// One-sided noise PSD.
    pub n0: f64,
}

impl SensingScene {
    pub fn new(targets: Vec<Target>, n0: f64) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("targets", "need at least one target"));
        }
        if targets.iter().any(|t| t.amplitude.norm() == 0.0) {
            return Err(Error::invalid("targets", "reflectivities must be nonzero"));
        }
        Ok(SensingScene { targets, n0 })
    }
}

/// Monostatic echo `r(t) = Σ_k a_k s(t) e^{j2πν_k t} + w(t)` (zero delay).
pub fn simulate_echo(scene: &SensingScene, s: &Waveform, seed: u64) -> Waveform {
    let mut clean = s.clone();
    for (i, v) in clean.samples.iter_mut().enumerate() {
        let t = s.time(i);
        let mut acc = C64::new(0.0, 0.0);
        for tg in &scene.targets {
            acc += tg.amplitude * C64::from_polar(1.0, 2.0 * PI * tg.doppler * t);
        }
        *v = s.samples[i] * acc;
    }
    awgn(&clean, scene.n0, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerEstimate {
    pub dopplers: Vec<f64>,
    pub amplitudes: Vec<C64>,
    /// Explained energy `bᴴ G⁻¹ b` at the estimate.
    pub objective: f64,
}

/// Correlations and Gram entries needed by the least-squares fit.
struct Fit<'a> {
    s: &'a Waveform,
    r: &'a Waveform,
    energy: f64,
}

impl Fit<'_> {
    /// `⟨s·e^{j2πνt}, r⟩`.
    fn corr(&self, nu: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, (a, b)) in self.s.samples.iter().zip(&self.r.samples).enumerate() {
            acc += a.conj() * b * C64::from_polar(1.0, -2.0 * PI * nu * self.s.time(i));
        }
        acc * self.s.dt
    }

    /// `Σ |s|² e^{j2πΔt} dt`, the cross-Gram of two Doppler copies.
    fn cross(&self, delta: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, a) in self.s.samples.iter().enumerate() {
            acc += a.norm_sqr() * C64::from_polar(1.0, 2.0 * PI * delta * self.s.time(i));
        }
        acc * self.s.dt
    }
}

/// Explained energy of a Doppler pair, `None` when the pair is numerically collinear.
fn pair_objective(energy: f64, b1: C64, b2: C64, p: C64) -> Option<f64> {
    let det = energy * energy - p.norm_sqr();
    if det < 1e-9 * energy * energy {
        return None;
    }
    Some((energy * (b1.norm_sqr() + b2.norm_sqr()) - 2.0 * (b1.conj() * p * b2).re) / det)
}

fn parabolic_offset(fm: f64, f0: f64, fp: f64, step: f64) -> f64 {
    let den = fm - 2.0 * f0 + fp;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (fm - fp) / den * step).clamp(-step / 2.0, step / 2.0)
}

/// Maximum-likelihood Doppler estimation for one or two targets with a known
/// transmitted waveform: grid search over the (uniform) candidate grid, a
/// least-squares amplitude fit per candidate, then one parabolic refinement
/// step per Doppler.
pub fn ml_doppler(order: usize, reference: &Waveform, received: &Waveform, grid: &[f64]) -> Result<DopplerEstimate> {
    if !(1..=2).contains(&order) {
        return Err(Error::invalid("targets", "model order must be 1 or 2"));
    }
    if grid.len() < 3 {
        return Err(Error::invalid("grid", "need at least 3 candidates"));
    }
    if reference.samples.len() != received.samples.len() {
        return Err(Error::invalid("received", "length differs from the reference waveform"));
    }
    let step = grid[1] - grid[0];
    if !(step > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0)) {
        return Err(Error::invalid("grid", "candidate grid must be uniform and ascending"));
    }
    let fit = Fit {
        s: reference,
        r: received,
        energy: reference.energy(),
    };
    let e = fit.energy;
    let c: Vec<C64> = grid.iter().map(|&nu| fit.corr(nu)).collect();

    if order == 1 {
        let obj = |b: C64| b.norm_sqr() / e;
        let best = (0..grid.len()).max_by(|&a, &b| obj(c[a]).total_cmp(&obj(c[b]))).unwrap_or(0);
        let mut nu = grid[best];
        if best > 0 && best + 1 < grid.len() {
            nu += parabolic_offset(obj(c[best - 1]), obj(c[best]), obj(c[best + 1]), step);
        }
        let b = fit.corr(nu);
        return Ok(DopplerEstimate {
            dopplers: vec![nu],
            amplitudes: vec![b / e],
            objective: obj(b),
        });
    }

    let n = grid.len();
    let p: Vec<C64> = (0..n).map(|d| fit.cross(d as f64 * step)).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            if let Some(v) = pair_objective(e, c[i], c[j], p[j - i]) {
                if best.map_or(true, |b| v > b.0) {
                    best = Some((v, i, j));
                }
            }
        }
    }
    let (_, i, j) = best.ok_or(Error::IllConditioned)?;
    let eval = |n1: f64, n2: f64| pair_objective(e, fit.corr(n1), fit.corr(n2), fit.cross(n2 - n1)).unwrap_or(0.0);
    let (mut n1, mut n2) = (grid[i], grid[j]);
    let f0 = eval(n1, n2);
    n1 += parabolic_offset(eval(n1 - step, n2), f0, eval(n1 + step, n2), step);
    n2 += parabolic_offset(eval(n1, n2 - step), eval(n1, n2), eval(n1, n2 + step), step);

    let (b1, b2, pp) = (fit.corr(n1), fit.corr(n2), fit.cross(n2 - n1));
    let det = e * e - pp.norm_sqr();
    if det < 1e-9 * e * e {
        return Err(Error::IllConditioned);
    }
    let a1 = (b1 * e - pp * b2) / det;
    let a2 = (b2 * e - pp.conj() * b1) / det;
    Ok(DopplerEstimate {
        dopplers: vec![n1, n2],
        amplitudes: vec![a1, a2],
        objective: pair_objective(e, b1, b2, pp).unwrap_or(0.0),
    })
}

/// Uniform grid of `points` values over `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}
