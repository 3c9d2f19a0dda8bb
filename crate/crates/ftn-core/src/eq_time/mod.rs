//! Trellis equalizers for FTN ISI: Viterbi MLSE, full BCJR and M-BCJR.
//!
//! States hold the labels of the `L` most recent symbols, the newest in the
//! lowest base-`|A|` digit: from state `s` with input label `a` the next state
//! is `(a + |A|·s) mod |A|^L`. Trellises start from the empty state; taps that
//! would reach before the first symbol are skipped.

mod bcjr;
mod viterbi;

pub use bcjr::{bcjr_full, mbcjr};
pub use viterbi::viterbi_mlse;

use crate::capacity::{truncate_by_energy, DEFAULT_STATE_BUDGET};
use crate::error::{Error, Result};
use crate::model::{Constellation, Observation, ObservationModel};
use crate::C64;

/// Clamp applied to every LLR leaving an equalizer.
pub const LLR_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Whitened (Forney) model with white noise: `-|y - Σ f_k x_{n-k}|² / N0`.
    Euclidean,
    /// Matched-filter (Ungerboeck) model with colored noise.
    Ungerboeck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrellisSpec {
    /// One-sided taps: Forney `f[0..]` or Ungerboeck `g[0..]`. Taps beyond
    /// `memory` are cancelled per survivor in Viterbi and ignored by BCJR.
    pub taps: Vec<f64>,
    pub memory: usize,
    pub constellation: Constellation,
    pub es: f64,
    pub metric: Metric,
    pub budget: usize,
}

impl TrellisSpec {
    pub fn forney(f: &[f64], constellation: Constellation, es: f64) -> Self {
        TrellisSpec {
            taps: f.to_vec(),
            memory: f.len().saturating_sub(1),
            constellation,
            es,
            metric: Metric::Euclidean,
            budget: DEFAULT_STATE_BUDGET,
        }
    }

    /// Forney trellis over the taps holding `fraction` of the energy.
    pub fn forney_truncated(f: &[f64], fraction: f64, constellation: Constellation, es: f64) -> Self {
        Self::forney(&truncate_by_energy(f, fraction), constellation, es)
    }

    /// Ungerboeck trellis truncated to the taps covering 99% of `Σ_k |g[k]|`.
    pub fn ungerboeck(g: &[f64], constellation: Constellation, es: f64) -> Self {
        let total: f64 = g[0].abs() + 2.0 * g[1..].iter().map(|v| v.abs()).sum::<f64>();
        let mut acc = g[0].abs();
        let mut keep = 0;
        while acc < 0.99 * total && keep + 1 < g.len() {
            keep += 1;
            acc += 2.0 * g[keep].abs();
        }
        Self::ungerboeck_with_memory(&g[..=keep], keep, constellation, es)
    }

    /// Ungerboeck trellis with explicit memory; taps past `memory` stay in the
    /// metric through per-survivor cancellation (Viterbi only).
    pub fn ungerboeck_with_memory(g: &[f64], memory: usize, constellation: Constellation, es: f64) -> Self {
        TrellisSpec {
            taps: g.to_vec(),
            memory: memory.min(g.len().saturating_sub(1)),
            constellation,
            es,
            metric: Metric::Ungerboeck,
            budget: DEFAULT_STATE_BUDGET,
        }
    }

    /// Trellis matching an observation's model.
    pub fn for_observation(obs: &Observation, constellation: Constellation, es: f64) -> Result<Self> {
        match obs.model {
            ObservationModel::Forney => Ok(Self::forney(&obs.taps, constellation, es)),
            ObservationModel::Ungerboeck => Ok(Self::ungerboeck(&obs.channel.g, constellation, es)),
            other => Err(Error::invalid(
                "model",
                format!("{other:?} observations are not equalized on a trellis"),
            )),
        }
    }

    pub fn with_memory(mut self, memory: usize) -> Self {
        self.memory = memory.min(self.taps.len().saturating_sub(1));
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn state_count_f64(&self) -> f64 {
        (self.constellation.size() as f64).powi(self.memory as i32)
    }

    pub fn check_budget(&self) -> Result<usize> {
        if self.taps.is_empty() || self.taps[0] == 0.0 {
            return Err(Error::invalid("taps", "taps[0] must be nonzero"));
        }
        let states = self.state_count_f64();
        if states > self.budget as f64 {
            return Err(Error::StateExplosion {
                states,
                budget: self.budget,
            });
        }
        Ok(states as usize)
    }
}

/// Per-bit log-likelihood ratios `ln P(b=0)/P(b=1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftInfo {
    pub llr: Vec<f64>,
    pub extrinsic: bool,
}

impl SoftInfo {
    pub fn hard_bits(&self) -> Vec<u8> {
        self.llr.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

/// Shared branch-metric machinery for the trellis algorithms.
pub(crate) struct Trellis<'a> {
    pub spec: &'a TrellisSpec,
    pub m: usize,
    pub points: Vec<C64>,
    pub n0: f64,
    /// `Σ_{k=1}^{L} taps[k] · x_{n-k}` per state, valid once `n ≥ L`.
    pub isi: Vec<C64>,
    pub states: u64,
}

impl<'a> Trellis<'a> {
    pub fn new(spec: &'a TrellisSpec, n0: f64, dense: bool) -> Self {
        let m = spec.constellation.size();
        let points = spec.constellation.points(spec.es);
        let states = (m as u64).pow(spec.memory as u32);
        let mut t = Trellis {
            spec,
            m,
            points,
            n0,
            isi: Vec::new(),
            states,
        };
        if dense {
            t.isi = (0..states).map(|s| t.isi_of(s, usize::MAX)).collect();
        }
        t
    }

    #[inline]
    pub fn next(&self, s: u64, a: usize) -> u64 {
        (a as u64 + self.m as u64 * s) % self.states.max(1)
    }

    /// ISI from the symbols in state `s` at depth `n` (taps past `n` skipped).
    pub fn isi_of(&self, s: u64, n: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut rest = s;
        let m = self.m as u64;
        for k in 1..=self.spec.memory.min(n) {
            acc += self.points[(rest % m) as usize] * self.spec.taps[k];
            rest /= m;
        }
        acc
    }

    #[inline]
    pub fn isi_at(&self, s: u64, n: usize) -> C64 {
        if n >= self.spec.memory && !self.isi.is_empty() {
            self.isi[s as usize]
        } else {
            self.isi_of(s, n)
        }
    }

    /// Branch metric for new label `a` given observation `y` and interference `isi`.
    #[inline]
    pub fn branch(&self, y: C64, isi: C64, a: usize) -> f64 {
        let p = self.points[a];
        let f0 = self.spec.taps[0];
        match self.spec.metric {
            Metric::Euclidean => -(y - isi - p * f0).norm_sqr() / self.n0,
            Metric::Ungerboeck => (2.0 * (p.conj() * (y - isi)).re - f0 * p.norm_sqr()) / self.n0,
        }
    }

    /// Forney tail outputs `y[N..]` explained by the final state (zero for Ungerboeck).
    pub fn tail_weight(&self, s: u64, n_symbols: usize, tail: &[C64]) -> f64 {
        if self.spec.metric != Metric::Euclidean || tail.is_empty() {
            return 0.0;
        }
        let m = self.m as u64;
        let l = self.spec.memory;
        // sym(i) = x_{N-i}, i = 1..=L.
        let mut syms = Vec::with_capacity(l);
        let mut rest = s;
        for i in 1..=l {
            syms.push(if i <= n_symbols { Some(self.points[(rest % m) as usize]) } else { None });
            rest /= m;
        }
        let mut w = 0.0;
        for (j, &y) in tail.iter().enumerate() {
            let mut clean = C64::new(0.0, 0.0);
            for k in (j + 1)..=l {
                if let Some(x) = syms[k - j - 1] {
                    clean += x * self.spec.taps[k];
                }
            }
            w -= (y - clean).norm_sqr() / self.n0;
        }
        w
    }

    /// Log prior of label `a` from bit LLRs (bits of symbol `n`).
    #[inline]
    pub fn log_prior(&self, priors: Option<&[f64]>, n: usize, a: usize) -> f64 {
        let Some(pr) = priors else { return 0.0 };
        let bps = self.spec.constellation.bits_per_symbol();
        let mut acc = 0.0;
        for i in 0..bps {
            let l = pr[n * bps + i];
            acc += if (a >> i) & 1 == 0 { 0.5 * l } else { -0.5 * l };
        }
        acc
    }
}

/// Splits an observation into the per-symbol samples and the Forney tail.
pub(crate) fn split_observation(obs: &Observation) -> (&[C64], &[C64]) {
    let n = obs.n_symbols.min(obs.samples.len());
    obs.samples.split_at(n)
}

pub(crate) fn check_priors(spec: &TrellisSpec, obs: &Observation, priors: Option<&[f64]>) -> Result<()> {
    if let Some(p) = priors {
        let need = obs.n_symbols * spec.constellation.bits_per_symbol();
        if p.len() != need {
            return Err(Error::invalid("priors", format!("expected {need} LLRs, got {}", p.len())));
        }
    }
    if !(obs.n0 > 0.0) {
        return Err(Error::invalid("n0", "trellis metrics need N0 > 0"));
    }
    Ok(())
}

/// Maps labels to bits (bit `i` of each label, LSB first).
pub fn labels_to_bits(labels: &[usize], constellation: Constellation) -> Vec<u8> {
    let bps = constellation.bits_per_symbol();
    labels
        .iter()
        .flat_map(|&a| (0..bps).map(move |i| ((a >> i) & 1) as u8))
        .collect()
}
