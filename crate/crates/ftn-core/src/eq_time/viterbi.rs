use super::{split_observation, Trellis, TrellisSpec};
use crate::error::{Error, Result};
use crate::model::Observation;

const NONE: u8 = u8::MAX;

/// Maximum-metric path through the trellis; returns symbol labels.
///
/// Taps beyond `spec.memory` are cancelled with each survivor's own history
/// (per-survivor processing), which is exact MLSE when the memory covers all taps.
pub fn viterbi_mlse(spec: &TrellisSpec, obs: &Observation, priors: Option<&[f64]>) -> Result<Vec<usize>> {
    let states = spec.check_budget()?;
    if let Some(p) = priors {
        let need = obs.n_symbols * spec.constellation.bits_per_symbol();
        if p.len() != need {
            return Err(Error::invalid("priors", format!("expected {need} LLRs, got {}", p.len())));
        }
    }
    // The path ranking does not depend on the metric scale when there are no priors.
    let n0 = if obs.n0 > 0.0 { obs.n0 } else { 1.0 };
    let trellis = Trellis::new(spec, n0, true);
    let (ys, tail) = split_observation(obs);
    let n = ys.len();
    let m = trellis.m;
    let l = spec.memory;
    let extra = spec.taps.len() - 1 - l;

    let mut metric = vec![f64::NEG_INFINITY; states];
    let mut next_metric = vec![f64::NEG_INFINITY; states];
    metric[0] = 0.0;
    let mut hist = vec![NONE; states * extra];
    let mut next_hist = vec![NONE; states * extra];
    let mut back_state = vec![0u32; n * states];
    let mut back_input = vec![0u8; n * states];

    for (step, &y) in ys.iter().enumerate() {
        next_metric.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        for s in 0..states {
            let ms = metric[s];
            if ms == f64::NEG_INFINITY {
                continue;
            }
            let mut isi = trellis.isi_at(s as u64, step);
            let h = &hist[s * extra..(s + 1) * extra];
            for (j, &lab) in h.iter().enumerate() {
                if lab != NONE {
                    isi += trellis.points[lab as usize] * spec.taps[l + 1 + j];
                }
            }
            for a in 0..m {
                let cand = ms + trellis.branch(y, isi, a) + trellis.log_prior(priors, step, a);
                let ns = trellis.next(s as u64, a) as usize;
                if cand > next_metric[ns] {
                    next_metric[ns] = cand;
                    back_state[step * states + ns] = s as u32;
                    back_input[step * states + ns] = a as u8;
                    if extra > 0 {
                        let leaving = if l == 0 {
                            a as u8
                        } else if step >= l {
                            ((s as u64 / (m as u64).pow(l as u32 - 1)) % m as u64) as u8
                        } else {
                            NONE
                        };
                        let dst = &mut next_hist[ns * extra..(ns + 1) * extra];
                        dst[0] = leaving;
                        dst[1..].copy_from_slice(&h[..extra - 1]);
                    }
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
        std::mem::swap(&mut hist, &mut next_hist);
    }

    let mut best = 0usize;
    let mut best_metric = f64::NEG_INFINITY;
    for s in 0..states {
        if metric[s] == f64::NEG_INFINITY {
            continue;
        }
        let total = metric[s] + trellis.tail_weight(s as u64, n, tail);
        if total > best_metric {
            best_metric = total;
            best = s;
        }
    }
    let mut labels = vec![0usize; n];
    let mut s = best;
    for step in (0..n).rev() {
        labels[step] = back_input[step * states + s] as usize;
        s = back_state[step * states + s] as usize;
    }
    Ok(labels)
}
