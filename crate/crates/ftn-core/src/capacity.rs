//! Constrained capacity, water-filling and simulated finite-alphabet information rates.

use crate::error::{Error, Result};
use crate::model::Constellation;
use crate::pulse::{FoldedSpectrum, IsiChannel};
use crate::util::{complex_gaussian, db_to_linear, derive_seed, linear_to_db, rng_from_seed};
use crate::C64;
use rand::Rng;

/// Default state budget for trellis recursions.
pub const DEFAULT_STATE_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMethod {
    Eq3,
    WaterFill,
    ArnoldLoeliger,
}

impl RateMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RateMethod::Eq3 => "gaussian_flat",
            RateMethod::WaterFill => "gaussian_waterfill",
            RateMethod::ArnoldLoeliger => "arnold_loeliger",
        }
    }
}

/// One point of a rate curve. `rate` is in bits/s with `T = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub tau: f64,
    pub beta: f64,
    pub ebn0_db: f64,
    pub esn0_db: f64,
    pub rate: f64,
    pub method: RateMethod,
    pub mc_std_err: Option<f64>,
}

/// `C = (1/τT) · mean_ξ log2(1 + Sx(ξ)|H_fold(ξ)|² / N0)` (midpoint rule over one period).
pub fn constrained_capacity(fs: &FoldedSpectrum, sx: &[f64], n0: f64) -> f64 {
    assert_eq!(sx.len(), fs.len(), "input PSD must live on the spectrum grid");
    let mean = fs
        .values
        .iter()
        .zip(sx)
        .map(|(&h, &s)| (1.0 + s * h / n0).log2())
        .sum::<f64>()
        / fs.len() as f64;
    mean / fs.symbol_duration()
}

/// Flat-input capacity `Sx ≡ es`.
pub fn flat_capacity(fs: &FoldedSpectrum, es: f64, n0: f64) -> f64 {
    constrained_capacity(fs, &vec![es; fs.len()], n0)
}

/// Water-filling allocation over a sampled spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    pub sx: Vec<f64>,
    pub level: f64,
    pub rate: f64,
}

/// Per-bin water-filling: `p_k = max(0, μ − N0/λ_k)` with `mean(p) = total_power`.
pub fn waterfill_levels(gains: &[f64], total_power: f64, n0: f64) -> Result<(Vec<f64>, f64)> {
    if !(total_power > 0.0) {
        return Err(Error::invalid("total_power", "must be positive"));
    }
    let inv: Vec<Option<f64>> = gains
        .iter()
        .map(|&g| if g > 1e-300 { Some(n0 / g) } else { None })
        .collect();
    let worst = inv.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let active = inv.iter().flatten().count();
    if active == 0 {
        return Err(Error::AllNull);
    }
    let power_at = |mu: f64| -> f64 {
        inv.iter().flatten().map(|&v| (mu - v).max(0.0)).sum::<f64>() / gains.len() as f64
    };
    let mut lo = 0.0;
    let mut hi = worst + total_power * gains.len() as f64 / active as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_at(mid) > total_power {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let p = inv.iter().map(|v| v.map_or(0.0, |v| (mu - v).max(0.0))).collect();
    Ok((p, mu))
}

/// Water-filling input PSD over a folded spectrum and the resulting capacity.
pub fn waterfill_input_psd(fs: &FoldedSpectrum, total_power: f64, n0: f64) -> Result<WaterFill> {
    let (sx, level) = waterfill_levels(&fs.values, total_power, n0)?;
    let rate = constrained_capacity(fs, &sx, n0);
    Ok(WaterFill { sx, level, rate })
}

/// Monte-Carlo information-rate estimate in bits/symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub bits_per_symbol: f64,
    pub std_err: f64,
}

/// Forney taps truncated where the cumulative energy reaches `fraction`.
pub fn truncate_by_energy(f: &[f64], fraction: f64) -> Vec<f64> {
    let total: f64 = f.iter().map(|v| v * v).sum();
    let mut acc = 0.0;
    for (i, v) in f.iter().enumerate() {
        acc += v * v;
        if acc >= fraction * total {
            return f[..=i].to_vec();
        }
    }
    f.to_vec()
}

/// Simulation-based information rate of a finite-alphabet ISI channel
/// (forward recursion over the Forney trellis), `Es = 1`.
pub fn info_rate_arnold_loeliger(
    ch: &IsiChannel,
    constellation: Constellation,
    esn0_db: f64,
    n_symbols: usize,
    n_trials: usize,
    seed: u64,
    budget: usize,
) -> Result<RateEstimate> {
    let f = ch
        .f
        .as_ref()
        .ok_or_else(|| Error::invalid("f", "channel has no Forney taps; run whiten_forney first"))?;
    if n_symbols == 0 || n_trials == 0 {
        return Err(Error::invalid("n_symbols", "need at least one symbol and one trial"));
    }
    let taps = truncate_by_energy(f, 0.999);
    let m = constellation.size();
    let mem = taps.len() - 1;
    let states = (m as f64).powi(mem as i32);
    if states > budget as f64 {
        return Err(Error::StateExplosion { states, budget });
    }
    let rates: Vec<f64> = (0..n_trials)
        .map(|t| al_trial(&taps, constellation, esn0_db, n_symbols, derive_seed(seed, t as u64)))
        .collect();
    let mean = rates.iter().sum::<f64>() / n_trials as f64;
    let var = if n_trials > 1 {
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n_trials - 1) as f64
    } else {
        0.0
    };
    Ok(RateEstimate {
        bits_per_symbol: mean,
        std_err: (var / n_trials as f64).sqrt(),
    })
}

fn al_trial(taps: &[f64], constellation: Constellation, esn0_db: f64, n: usize, seed: u64) -> f64 {
    let es = 1.0;
    let n0 = es / db_to_linear(esn0_db);
    let m = constellation.size();
    let mem = taps.len() - 1;
    let states = m.pow(mem as u32);
    let points = constellation.points(es);
    let mut rng = rng_from_seed(seed);
    let labels: Vec<usize> = (0..n + mem).map(|_| rng.gen_range(0..m)).collect();

    // outputs[s * m + a]: noiseless branch output from state s with new label a.
    // State digit k-1 (base m) holds the label of x[n-k].
    let mut outputs = vec![C64::new(0.0, 0.0); states * m];
    for s in 0..states {
        let mut past = C64::new(0.0, 0.0);
        let mut rest = s;
        for &fk in &taps[1..] {
            past += points[rest % m] * fk;
            rest /= m;
        }
        for a in 0..m {
            outputs[s * m + a] = past + points[a] * taps[0];
        }
    }
    let next = |s: usize, a: usize| (a + m * s) % states;
    let state_of = |i: usize| -> usize {
        // Labels x[i-1], x[i-2], ..., x[i-mem] as digits 0..mem.
        (0..mem).fold(0, |acc, k| acc + labels[i - 1 - k] * m.pow(k as u32))
    };

    let ln_norm = -(std::f64::consts::PI * n0).ln();
    let mut log_p_y_given_x = 0.0;
    let mut log_p_y = 0.0;
    let mut alpha = vec![1.0 / states as f64; states];
    let mut next_alpha = vec![0.0; states];
    let mut dist = vec![0.0; states * m];
    for i in mem..n + mem {
        let s_true = state_of(i);
        let clean = outputs[s_true * m + labels[i]];
        let y = clean + complex_gaussian(&mut rng, n0);
        log_p_y_given_x += -(y - clean).norm_sqr() / n0 + ln_norm;

        let mut dmin = f64::INFINITY;
        for (d, o) in dist.iter_mut().zip(&outputs) {
            *d = (y - o).norm_sqr();
            dmin = dmin.min(*d);
        }
        next_alpha.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..states {
            let a_s = alpha[s];
            if a_s == 0.0 {
                continue;
            }
            for a in 0..m {
                let w = (-(dist[s * m + a] - dmin) / n0).exp();
                next_alpha[next(s, a)] += a_s * w;
            }
        }
        let total: f64 = next_alpha.iter().sum();
        for v in next_alpha.iter_mut() {
            *v /= total;
        }
        std::mem::swap(&mut alpha, &mut next_alpha);
        log_p_y += total.ln() - dmin / n0 - (m as f64).ln() + ln_norm;
    }
    (log_p_y_given_x - log_p_y) / (n as f64 * std::f64::consts::LN_2)
}

/// Es/N0 (dB) at which a bits/symbol curve meets a target Eb/N0, i.e. the
/// root of `EsN0 − 10·log10(R(EsN0)) = EbN0`, by linear interpolation on the grid.
/// Returns `(esn0_db, rate)`.
pub fn operating_point(esn0_db: &[f64], rates: &[f64], ebn0_db: f64) -> Option<(f64, f64)> {
    let h: Vec<f64> = esn0_db
        .iter()
        .zip(rates)
        .map(|(&e, &r)| e - linear_to_db(r) - ebn0_db)
        .collect();
    for i in 1..h.len() {
        if h[i - 1] <= 0.0 && h[i] >= 0.0 {
            let w = if h[i] == h[i - 1] { 0.0 } else { -h[i - 1] / (h[i] - h[i - 1]) };
            let e = esn0_db[i - 1] + w * (esn0_db[i] - esn0_db[i - 1]);
            let r = rates[i - 1] + w * (rates[i] - rates[i - 1]);
            return Some((e, r));
        }
    }
    None
}
