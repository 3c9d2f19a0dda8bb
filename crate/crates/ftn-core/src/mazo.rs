//! Minimum-distance search over BPSK error sequences and Mazo-limit scans.
//!
//! Error sequences are written as `ẽ ∈ {-1, 0, +1}^ℓ` (the true difference is
//! `2√Es·ẽ`), with `ẽ[0] = +1` by sign symmetry and `ẽ[ℓ-1] ≠ 0`. Distances are
//! normalized so that the single-error (antipodal) event scores exactly 2:
//! `d² = 2·ẽᵀ G ẽ` with `G` the Toeplitz matrix of the Ungerboeck taps.

use crate::error::{Error, Result};
use crate::model::Constellation;
use crate::pulse::{isi_taps, IsiChannel, PulseShape};

/// Default search depth.
pub const DEFAULT_MAX_LEN: usize = 14;

/// Tolerance below 2 at which a τ counts as past the Mazo limit.
pub const MAZO_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub tau: f64,
    pub pulse: String,
    pub d2min: f64,
    pub argmin: Vec<i8>,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    BranchAndBound,
}

/// Minimum normalized squared distance over error sequences of length ≤ `max_len`.
///
/// Uses exhaustive enumeration for `max_len ≤ 12` and branch-and-bound otherwise.
pub fn min_distance(ch: &IsiChannel, constellation: Constellation, max_len: usize) -> Result<DistanceReport> {
    let method = if max_len <= 12 {
        SearchMethod::Exhaustive
    } else {
        SearchMethod::BranchAndBound
    };
    min_distance_with(ch, constellation, max_len, method)
}

pub fn min_distance_with(
    ch: &IsiChannel,
    constellation: Constellation,
    max_len: usize,
    method: SearchMethod,
) -> Result<DistanceReport> {
    if constellation != Constellation::Bpsk {
        return Err(Error::invalid("constellation", "distance search is implemented for BPSK only"));
    }
    if max_len == 0 {
        return Err(Error::invalid("max_len", "must be at least 1"));
    }
    let g: Vec<f64> = (0..max_len).map(|k| ch.tap(k as isize) / ch.g[0]).collect();
    let (q, e) = match method {
        SearchMethod::Exhaustive => exhaustive(&g, max_len),
        SearchMethod::BranchAndBound => branch_and_bound(&g, max_len),
    };
    Ok(DistanceReport {
        tau: ch.tau,
        pulse: ch.pulse.as_ref().map_or_else(|| "taps".to_string(), |p| p.descriptor()),
        d2min: 2.0 * q,
        argmin: e,
        depth: max_len,
    })
}

/// Quadratic form `ẽᵀ G ẽ` for a sequence.
pub fn quadratic_form(g: &[f64], e: &[i8]) -> f64 {
    let mut q = 0.0;
    for i in 0..e.len() {
        if e[i] == 0 {
            continue;
        }
        for j in 0..e.len() {
            let k = i.abs_diff(j);
            if e[j] != 0 && k < g.len() {
                q += g[k] * (e[i] * e[j]) as f64;
            }
        }
    }
    q
}

/// Incremental form: contribution of appending `v` at position `m`.
#[inline]
fn increment(g: &[f64], e: &[i8], m: usize, v: i8) -> f64 {
    if v == 0 {
        return 0.0;
    }
    let mut cross = 0.0;
    for j in 0..m {
        if e[j] != 0 {
            cross += g[m - j] * e[j] as f64;
        }
    }
    g[0] + 2.0 * v as f64 * cross
}

fn better(q: f64, e: &[i8], best_q: f64, best_e: &[i8]) -> bool {
    q < best_q - 1e-12 || ((q - best_q).abs() <= 1e-12 && e.len() < best_e.len())
}

fn exhaustive(g: &[f64], max_len: usize) -> (f64, Vec<i8>) {
    let mut best_q = g[0];
    let mut best_e = vec![1i8];
    let mut e = vec![0i8; max_len];
    e[0] = 1;
    let tails = 3usize.pow(max_len as u32 - 1);
    for code in 0..tails {
        let mut c = code;
        let mut last = 0;
        for slot in e.iter_mut().skip(1) {
            *slot = (c % 3) as i8 - 1;
            c /= 3;
        }
        for (i, &v) in e.iter().enumerate() {
            if v != 0 {
                last = i;
            }
        }
        let seq = &e[..=last];
        let q = quadratic_form(g, seq);
        if better(q, seq, best_q, &best_e) {
            best_q = q;
            best_e = seq.to_vec();
        }
    }
    (best_q, best_e)
}

/// Depth-first search with the prefix bound `Σ_{i<m} (L ẽ)_i²`, where
/// `G = LᵀL` and `L` is lower triangular, so row `i` of `Lẽ` depends only on
/// the first `i+1` entries and the partial sum never decreases.
fn branch_and_bound(g: &[f64], max_len: usize) -> (f64, Vec<i8>) {
    let (l, jitter) = lower_factor(g, max_len);
    let slack = jitter * max_len as f64 + 1e-9;
    let mut st = Bnb {
        g,
        l: &l,
        n: max_len,
        slack,
        e: vec![0; max_len],
        best_q: g[0],
        best_e: vec![1],
    };
    st.e[0] = 1;
    let bound0 = l[0] * l[0];
    st.descend(1, g[0], bound0);
    (st.best_q, st.best_e)
}

struct Bnb<'a> {
    g: &'a [f64],
    l: &'a [f64],
    n: usize,
    slack: f64,
    e: Vec<i8>,
    best_q: f64,
    best_e: Vec<i8>,
}

impl Bnb<'_> {
    fn descend(&mut self, m: usize, q: f64, bound: f64) {
        if m == self.n {
            return;
        }
        for v in [0i8, -1, 1] {
            let dq = increment(self.g, &self.e, m, v);
            self.e[m] = v;
            let mut row = 0.0;
            for j in 0..=m {
                row += self.l[m * self.n + j] * self.e[j] as f64;
            }
            let nb = bound + row * row;
            if nb - self.slack < self.best_q {
                let nq = q + dq;
                if v != 0 && better(nq, &self.e[..=m], self.best_q, &self.best_e) {
                    self.best_q = nq;
                    self.best_e = self.e[..=m].to_vec();
                }
                self.descend(m + 1, nq, nb);
            }
            self.e[m] = 0;
        }
    }
}

/// Lower-triangular `L` (row-major `n × n`) with `LᵀL = G + δI`, from the
/// Cholesky factor `C` of the persymmetric `G` as `L = J Cᵀ J`.
fn lower_factor(g: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut jitter = 0.0;
    loop {
        if let Some(c) = cholesky(g, n, jitter) {
            let mut l = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    // L[i][j] = C[n-1-j][n-1-i]
                    l[i * n + j] = c[(n - 1 - j) * n + (n - 1 - i)];
                }
            }
            return (l, jitter);
        }
        jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
    }
}

fn cholesky(g: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let a = |i: usize, j: usize| g[i.abs_diff(j)] + if i == j { jitter } else { 0.0 };
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a(i, j);
            for k in 0..j {
                s -= c[i * n + k] * c[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                c[i * n + i] = s.sqrt();
            } else {
                c[i * n + j] = s / c[j * n + j];
            }
        }
    }
    Some(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MazoScan {
    pub rows: Vec<DistanceReport>,
    /// Grid point just above the largest τ with `d² < 2 − tol`.
    pub limit: Option<f64>,
}

/// `d²min(τ)` over a descending τ grid and the resulting Mazo-limit estimate.
pub fn mazo_scan(pulse: &PulseShape, tau_grid: &[f64], constellation: Constellation, max_len: usize) -> Result<MazoScan> {
    if tau_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("tau_grid", "must be sorted in descending order"));
    }
    let mut rows = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let ch = isi_taps(pulse, tau, max_len)?;
        rows.push(min_distance(&ch, constellation, max_len)?);
    }
    Ok(MazoScan {
        limit: limit_from_rows(&rows),
        rows,
    })
}

/// Mazo-limit estimate from a descending scan.
pub fn limit_from_rows(rows: &[DistanceReport]) -> Option<f64> {
    let first = rows.iter().position(|r| r.d2min < 2.0 - MAZO_TOLERANCE)?;
    if first == 0 {
        None
    } else {
        Some(rows[first - 1].tau)
    }
}
