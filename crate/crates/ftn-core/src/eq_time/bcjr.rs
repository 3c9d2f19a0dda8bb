use super::{check_priors, split_observation, Metric, SoftInfo, Trellis, TrellisSpec, LLR_CLAMP};
use crate::error::{Error, Result};
use crate::model::Observation;
use crate::util::log_add;
use crate::C64;

const NEG: f64 = f64::NEG_INFINITY;

/// Exact log-domain BCJR over the full trellis; returns extrinsic bit LLRs.
pub fn bcjr_full(spec: &TrellisSpec, obs: &Observation, priors: Option<&[f64]>) -> Result<SoftInfo> {
    let states = spec.check_budget()?;
    check_priors(spec, obs, priors)?;
    let trellis = Trellis::new(spec, obs.n0, true);
    let (ys, tail) = split_observation(obs);
    let n = ys.len();
    let m = trellis.m;

    let mut alpha = vec![NEG; (n + 1) * states];
    alpha[0] = 0.0;
    for (step, &y) in ys.iter().enumerate() {
        let (cur, nxt) = alpha.split_at_mut((step + 1) * states);
        let cur = &cur[step * states..];
        let nxt = &mut nxt[..states];
        for s in 0..states {
            if cur[s] == NEG {
                continue;
            }
            let isi = trellis.isi_at(s as u64, step);
            for a in 0..m {
                let g = trellis.branch(y, isi, a) + trellis.log_prior(priors, step, a);
                let ns = trellis.next(s as u64, a) as usize;
                nxt[ns] = log_add(nxt[ns], cur[s] + g);
            }
        }
        normalize(nxt);
    }

    let mut beta: Vec<f64> = (0..states)
        .map(|s| {
            if alpha[n * states + s] == NEG {
                NEG
            } else {
                trellis.tail_weight(s as u64, n, tail)
            }
        })
        .collect();
    let mut prev_beta = vec![NEG; states];
    let mut post = vec![NEG; n * m];
    for step in (0..n).rev() {
        let y = ys[step];
        let a_row = &alpha[step * states..(step + 1) * states];
        prev_beta.iter_mut().for_each(|v| *v = NEG);
        for s in 0..states {
            if a_row[s] == NEG {
                continue;
            }
            let isi = trellis.isi_at(s as u64, step);
            for a in 0..m {
                let ns = trellis.next(s as u64, a) as usize;
                if beta[ns] == NEG {
                    continue;
                }
                let g = trellis.branch(y, isi, a) + trellis.log_prior(priors, step, a);
                let p = &mut post[step * m + a];
                *p = log_add(*p, a_row[s] + g + beta[ns]);
                prev_beta[s] = log_add(prev_beta[s], g + beta[ns]);
            }
        }
        normalize(&mut prev_beta);
        std::mem::swap(&mut beta, &mut prev_beta);
    }
    Ok(extrinsic_from_posteriors(&post, spec, priors, n))
}

/// Reduced-search BCJR keeping the `m_keep` best states per depth.
///
/// Forney trellises rank states by forward metric. Ungerboeck trellises add
/// the best `lookahead` -step extension metric (breadth-first over the next
/// observations) to the ranking score; the forward metric itself is unchanged.
pub fn mbcjr(
    spec: &TrellisSpec,
    obs: &Observation,
    priors: Option<&[f64]>,
    m_keep: usize,
    lookahead: usize,
) -> Result<SoftInfo> {
    if m_keep == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let states = spec.state_count_f64();
    if m_keep as f64 > states {
        return Err(Error::StateExplosion {
            states: m_keep as f64,
            budget: states as usize,
        });
    }
    if spec.taps.is_empty() || spec.taps[0] == 0.0 {
        return Err(Error::invalid("taps", "taps[0] must be nonzero"));
    }
    check_priors(spec, obs, priors)?;
    let trellis = Trellis::new(spec, obs.n0, states <= (1 << 16) as f64);
    let (ys, tail) = split_observation(obs);
    let n = ys.len();
    let m = trellis.m;
    let lookahead = if spec.metric == Metric::Ungerboeck { lookahead } else { 0 };

    // kept[d]: (state, alpha) sorted by state.
    let mut kept: Vec<Vec<(u64, f64)>> = Vec::with_capacity(n + 1);
    kept.push(vec![(0, 0.0)]);
    let mut cand: Vec<(u64, f64)> = Vec::new();
    for (step, &y) in ys.iter().enumerate() {
        cand.clear();
        for &(s, al) in &kept[step] {
            let isi = trellis.isi_at(s, step);
            for a in 0..m {
                let g = trellis.branch(y, isi, a) + trellis.log_prior(priors, step, a);
                cand.push((trellis.next(s, a), al + g));
            }
        }
        cand.sort_unstable_by_key(|c| c.0);
        let mut merged: Vec<(u64, f64)> = Vec::with_capacity(cand.len());
        for &(s, v) in &cand {
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 = log_add(last.1, v),
                _ => merged.push((s, v)),
            }
        }
        if merged.len() > m_keep {
            let mut scored: Vec<(f64, usize)> = merged
                .iter()
                .enumerate()
                .map(|(i, &(s, v))| {
                    let bonus = if lookahead > 0 {
                        best_extension(&trellis, ys, priors, s, step + 1, lookahead)
                    } else {
                        0.0
                    };
                    (v + bonus, i)
                })
                .collect();
            scored.select_nth_unstable_by(m_keep - 1, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut idx: Vec<usize> = scored[..m_keep].iter().map(|x| x.1).collect();
            idx.sort_unstable();
            merged = idx.into_iter().map(|i| merged[i]).collect();
        }
        let max = merged.iter().map(|x| x.1).fold(NEG, f64::max);
        if max.is_finite() {
            merged.iter_mut().for_each(|x| x.1 -= max);
        }
        kept.push(merged);
    }

    let mut beta: Vec<f64> = kept[n]
        .iter()
        .map(|&(s, _)| trellis.tail_weight(s, n, tail))
        .collect();
    let mut post = vec![NEG; n * m];
    for step in (0..n).rev() {
        let y = ys[step];
        let next_kept = &kept[step + 1];
        let mut prev_beta = vec![NEG; kept[step].len()];
        for (i, &(s, al)) in kept[step].iter().enumerate() {
            let isi = trellis.isi_at(s, step);
            for a in 0..m {
                let ns = trellis.next(s, a);
                let Ok(j) = next_kept.binary_search_by_key(&ns, |x| x.0) else { continue };
                if beta[j] == NEG {
                    continue;
                }
                let g = trellis.branch(y, isi, a) + trellis.log_prior(priors, step, a);
                let p = &mut post[step * m + a];
                *p = log_add(*p, al + g + beta[j]);
                prev_beta[i] = log_add(prev_beta[i], g + beta[j]);
            }
        }
        normalize(&mut prev_beta);
        beta = prev_beta;
    }
    Ok(extrinsic_from_posteriors(&post, spec, priors, n))
}

/// Best metric over all `depth`-step continuations from state `s` at depth `step`.
fn best_extension(trellis: &Trellis, ys: &[C64], priors: Option<&[f64]>, s: u64, step: usize, depth: usize) -> f64 {
    if depth == 0 || step >= ys.len() {
        return 0.0;
    }
    let isi = trellis.isi_at(s, step);
    let mut best = NEG;
    for a in 0..trellis.m {
        let g = trellis.branch(ys[step], isi, a) + trellis.log_prior(priors, step, a);
        let v = g + best_extension(trellis, ys, priors, trellis.next(s, a), step + 1, depth - 1);
        best = best.max(v);
    }
    best
}

fn normalize(v: &mut [f64]) {
    let max = v.iter().cloned().fold(NEG, f64::max);
    if max.is_finite() {
        v.iter_mut().for_each(|x| *x -= max);
    }
}

/// Bit extrinsic LLRs from per-symbol log posteriors (`post[n·|A| + a]`).
fn extrinsic_from_posteriors(post: &[f64], spec: &TrellisSpec, priors: Option<&[f64]>, n: usize) -> SoftInfo {
    let m = spec.constellation.size();
    let bps = spec.constellation.bits_per_symbol();
    let mut llr = Vec::with_capacity(n * bps);
    for step in 0..n {
        let row = &post[step * m..(step + 1) * m];
        for i in 0..bps {
            let (mut zero, mut one) = (NEG, NEG);
            for (a, &v) in row.iter().enumerate() {
                if (a >> i) & 1 == 0 {
                    zero = log_add(zero, v);
                } else {
                    one = log_add(one, v);
                }
            }
            let posterior = match (zero == NEG, one == NEG) {
                (true, true) => 0.0,
                (false, true) => LLR_CLAMP,
                (true, false) => -LLR_CLAMP,
                (false, false) => zero - one,
            };
            let prior = priors.map_or(0.0, |p| p[step * bps + i]);
            llr.push((posterior - prior).clamp(-LLR_CLAMP, LLR_CLAMP));
        }
    }
    SoftInfo { llr, extrinsic: true }
}
