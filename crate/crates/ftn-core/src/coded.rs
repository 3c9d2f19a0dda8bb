//! Coded FTN: rate-1/2 convolutional outer code, random interleaver and turbo
//! equalization between a soft FTN equalizer and a soft-output decoder.

use crate::eq_freq::{fde_mmse, FdeSetting};
use crate::eq_time::{bcjr_full, mbcjr, TrellisSpec, LLR_CLAMP};
use crate::error::{Error, Result};
use crate::model::{Constellation, Observation};
use crate::util::{log_add, rng_from_seed};
use rand::seq::SliceRandom;

/// Rate-1/2 feedforward convolutional code with octal generators.
///
/// The most significant generator bit taps the current input; bit `ν − d`
/// taps the input delayed by `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCode {
    pub generators: [u32; 2],
    pub memory: usize,
}

impl ConvCode {
    pub fn new(g1: u32, g2: u32) -> Result<Self> {
        if g1 == 0 || g2 == 0 {
            return Err(Error::invalid("generators", "generators must be nonzero"));
        }
        let bits = 32 - g1.max(g2).leading_zeros() as usize;
        if bits > 16 {
            return Err(Error::invalid("generators", "constraint length above 16 is not supported"));
        }
        Ok(ConvCode {
            generators: [g1, g2],
            memory: bits - 1,
        })
    }

    /// The (7,5) code.
    pub fn standard() -> Self {
        ConvCode {
            generators: [0o7, 0o5],
            memory: 2,
        }
    }

    pub fn rate(&self) -> f64 {
        0.5
    }

    pub fn states(&self) -> usize {
        1 << self.memory
    }

    /// Coded length for `info_len` information bits (termination included).
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + self.memory)
    }

    /// Output pair and next state for state `s` (past inputs, newest at bit ν−1) and input `u`.
    #[inline]
    fn step(&self, s: usize, u: u8) -> ([u8; 2], usize) {
        let reg = ((u as usize) << self.memory) | s;
        let out = [
            ((reg as u32 & self.generators[0]).count_ones() & 1) as u8,
            ((reg as u32 & self.generators[1]).count_ones() & 1) as u8,
        ];
        (out, reg >> 1)
    }
}

/// Terminated encoding: `ν` zero bits flush the register back to state 0.
pub fn cc_encode(bits: &[u8], code: &ConvCode) -> Vec<u8> {
    let mut s = 0;
    let mut out = Vec::with_capacity(code.coded_len(bits.len()));
    for &u in bits.iter().chain(std::iter::repeat(&0u8).take(code.memory)) {
        let (o, ns) = code.step(s, u & 1);
        out.extend_from_slice(&o);
        s = ns;
    }
    out
}

/// Soft-in soft-out decoding of a terminated codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderOutput {
    /// Posterior LLRs of the information bits.
    pub info_llr: Vec<f64>,
    /// Extrinsic LLRs of the coded bits (posterior minus channel input).
    pub coded_extrinsic: Vec<f64>,
}

/// Log-domain BCJR over the code trellis; `coded_llr` are `ln P(0)/P(1)`.
pub fn cc_bcjr(code: &ConvCode, coded_llr: &[f64], info_len: usize) -> Result<DecoderOutput> {
    let steps = info_len + code.memory;
    if coded_llr.len() != 2 * steps {
        return Err(Error::invalid(
            "coded_llr",
            format!("expected {} LLRs, got {}", 2 * steps, coded_llr.len()),
        ));
    }
    let ns = code.states();
    let neg = f64::NEG_INFINITY;
    let gamma = |t: usize, o: [u8; 2]| -> f64 {
        let l = &coded_llr[2 * t..2 * t + 2];
        0.5 * (if o[0] == 0 { l[0] } else { -l[0] }) + 0.5 * (if o[1] == 0 { l[1] } else { -l[1] })
    };
    let inputs = |t: usize| if t < info_len { 0..2u8 } else { 0..1u8 };

    let mut alpha = vec![neg; (steps + 1) * ns];
    alpha[0] = 0.0;
    for t in 0..steps {
        for s in 0..ns {
            let a = alpha[t * ns + s];
            if a == neg {
                continue;
            }
            for u in inputs(t) {
                let (o, nx) = code.step(s, u);
                let slot = &mut alpha[(t + 1) * ns + nx];
                *slot = log_add(*slot, a + gamma(t, o));
            }
        }
    }
    let mut beta = vec![neg; (steps + 1) * ns];
    beta[steps * ns] = 0.0;
    for t in (0..steps).rev() {
        for s in 0..ns {
            let mut acc = neg;
            for u in inputs(t) {
                let (o, nx) = code.step(s, u);
                let b = beta[(t + 1) * ns + nx];
                if b != neg {
                    acc = log_add(acc, gamma(t, o) + b);
                }
            }
            beta[t * ns + s] = acc;
        }
    }
    let mut info_llr = Vec::with_capacity(info_len);
    let mut coded_extrinsic = Vec::with_capacity(2 * steps);
    for t in 0..steps {
        let mut u_post = [neg; 2];
        let mut c_post = [[neg; 2]; 2];
        for s in 0..ns {
            let a = alpha[t * ns + s];
            if a == neg {
                continue;
            }
            for u in inputs(t) {
                let (o, nx) = code.step(s, u);
                let b = beta[(t + 1) * ns + nx];
                if b == neg {
                    continue;
                }
                let v = a + gamma(t, o) + b;
                u_post[u as usize] = log_add(u_post[u as usize], v);
                for j in 0..2 {
                    c_post[j][o[j] as usize] = log_add(c_post[j][o[j] as usize], v);
                }
            }
        }
        if t < info_len {
            info_llr.push(llr_of(u_post[0], u_post[1]));
        }
        for j in 0..2 {
            let post = llr_of(c_post[j][0], c_post[j][1]);
            coded_extrinsic.push((post - coded_llr[2 * t + j]).clamp(-LLR_CLAMP, LLR_CLAMP));
        }
    }
    Ok(DecoderOutput {
        info_llr,
        coded_extrinsic,
    })
}

fn llr_of(zero: f64, one: f64) -> f64 {
    match (zero == f64::NEG_INFINITY, one == f64::NEG_INFINITY) {
        (true, true) => 0.0,
        (false, true) => LLR_CLAMP,
        (true, false) => -LLR_CLAMP,
        (false, false) => (zero - one).clamp(-LLR_CLAMP, LLR_CLAMP),
    }
}

/// Hard decoding of a (noiseless or hard-decided) codeword.
pub fn cc_decode_hard(code: &ConvCode, coded: &[u8], info_len: usize) -> Result<Vec<u8>> {
    let llr: Vec<f64> = coded.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect();
    let out = cc_bcjr(code, &llr, info_len)?;
    Ok(out.info_llr.iter().map(|&l| u8::from(l < 0.0)).collect())
}

/// Seeded uniform random permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut rng_from_seed(seed));
        let mut inverse = vec![0; len];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        Interleaver { perm, inverse }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `out[i] = x[perm[i]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.inverse.iter().map(|&i| x[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EqualizerKind {
    Bcjr,
    Mbcjr { m: usize, lookahead: usize },
    /// Linear MMSE; ignores decoder feedback.
    Fde,
}

/// Soft equalizer used inside the turbo loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Equalizer {
    Trellis { spec: TrellisSpec, kind: EqualizerKind },
    Fde { setting: FdeSetting, constellation: Constellation, es: f64 },
}

impl Equalizer {
    /// Extrinsic LLRs for the transmitted (interleaved) coded bits.
    pub fn extrinsic(&self, obs: &Observation, priors: Option<&[f64]>) -> Result<Vec<f64>> {
        match self {
            Equalizer::Trellis { spec, kind } => match kind {
                EqualizerKind::Mbcjr { m, lookahead } => Ok(mbcjr(spec, obs, priors, *m, *lookahead)?.llr),
                _ => Ok(bcjr_full(spec, obs, priors)?.llr),
            },
            Equalizer::Fde {
                setting,
                constellation,
                es,
            } => Ok(fde_mmse(obs, setting, *constellation, *es)?.llr),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboConfig {
    pub code: ConvCode,
    pub interleaver_seed: u64,
    pub iterations: usize,
    pub info_len: usize,
}

impl TurboConfig {
    pub fn new(code: ConvCode, interleaver_seed: u64, iterations: usize, info_len: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if info_len == 0 {
            return Err(Error::invalid("info_len", "must be at least 1"));
        }
        Ok(TurboConfig {
            code,
            interleaver_seed,
            iterations,
            info_len,
        })
    }

    pub fn interleaver(&self) -> Interleaver {
        Interleaver::new(self.code.coded_len(self.info_len), self.interleaver_seed)
    }

    /// Coded, interleaved bit stream ready for symbol mapping.
    pub fn transmit_bits(&self, info: &[u8]) -> Vec<u8> {
        self.interleaver().interleave(&cc_encode(info, &self.code))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboResult {
    pub decoded: Vec<u8>,
    /// Information-bit error rate after each iteration (when truth is given).
    pub ber_trace: Vec<f64>,
}

/// Equalizer-first turbo loop exchanging extrinsic information only.
pub fn turbo_equalize(
    obs: &Observation,
    equalizer: &Equalizer,
    cfg: &TurboConfig,
    truth: Option<&[u8]>,
) -> Result<TurboResult> {
    let pi = cfg.interleaver();
    let mut eq_prior: Option<Vec<f64>> = None;
    let mut ber_trace = Vec::with_capacity(cfg.iterations);
    let mut decoded = Vec::new();
    for _ in 0..cfg.iterations {
        let eq_ext = equalizer.extrinsic(obs, eq_prior.as_deref())?;
        if eq_ext.len() != pi.len() {
            return Err(Error::invalid(
                "info_len",
                format!("observation carries {} coded bits, code expects {}", eq_ext.len(), pi.len()),
            ));
        }
        let dec = cc_bcjr(&cfg.code, &pi.deinterleave(&eq_ext), cfg.info_len)?;
        decoded = dec.info_llr.iter().map(|&l| u8::from(l < 0.0)).collect();
        if let Some(t) = truth {
            let errors = decoded.iter().zip(t).filter(|(a, b)| a != b).count();
            ber_trace.push(errors as f64 / cfg.info_len as f64);
        }
        eq_prior = Some(pi.interleave(&dec.coded_extrinsic));
    }
    Ok(TurboResult { decoded, ber_trace })
}

/// Spectral efficiency in bits/s/Hz: `R·bps / (τ(1+β)) · N/(N+cp)`.
pub fn coded_throughput(code_rate: f64, bits_per_symbol: usize, tau: f64, beta: f64, n: usize, cp_len: usize) -> f64 {
    code_rate * bits_per_symbol as f64 / (tau * (1.0 + beta)) * n as f64 / (n + cp_len) as f64
}
