use ftn_core::eq_time::{bcjr_full, labels_to_bits, mbcjr, viterbi_mlse, TrellisSpec, LLR_CLAMP};
use ftn_core::model::{autocorrelation, awgn, forney_observation, mf_frontend, modulate, whiten_forney};
use ftn_core::pulse::{isi_taps, IsiChannel, PulseShape};
use ftn_core::util::{derive_seed, log_add, rng_from_seed};
use ftn_core::{Constellation, FtnConfig, Observation, ObservationModel, SymbolFrame, C64};
use rand::Rng;

/// Exhaustive sequence log-likelihoods for a small frame.
struct Oracle {
    log_post: Vec<f64>,
    labels: Vec<Vec<usize>>,
}

fn enumerate(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..m.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let a = c % m;
                    c /= m;
                    a
                })
                .collect()
        })
        .collect()
}

fn sequence_prior(labels: &[usize], priors: Option<&[f64]>, bps: usize) -> f64 {
    let Some(p) = priors else { return 0.0 };
    let mut acc = 0.0;
    for (n, &a) in labels.iter().enumerate() {
        for i in 0..bps {
            let l = p[n * bps + i];
            acc += if (a >> i) & 1 == 0 { 0.5 * l } else { -0.5 * l };
        }
    }
    acc
}

fn forney_oracle(f: &[f64], y: &[C64], n: usize, n0: f64, c: Constellation, priors: Option<&[f64]>) -> Oracle {
    let pts = c.points(1.0);
    let labels = enumerate(n, c.size());
    let log_post = labels
        .iter()
        .map(|lab| {
            let mut ll = 0.0;
            for (i, &yi) in y.iter().enumerate() {
                let mut clean = C64::new(0.0, 0.0);
                for (k, &fk) in f.iter().enumerate() {
                    if i >= k && i - k < n {
                        clean += pts[lab[i - k]] * fk;
                    }
                }
                ll -= (yi - clean).norm_sqr() / n0;
            }
            ll + sequence_prior(lab, priors, c.bits_per_symbol())
        })
        .collect();
    Oracle { log_post, labels }
}

fn ungerboeck_oracle(g: &[f64], y: &[C64], n0: f64, c: Constellation, priors: Option<&[f64]>) -> Oracle {
    let pts = c.points(1.0);
    let n = y.len();
    let labels = enumerate(n, c.size());
    let log_post = labels
        .iter()
        .map(|lab| {
            let x: Vec<C64> = lab.iter().map(|&a| pts[a]).collect();
            let mut lin = 0.0;
            let mut quad = 0.0;
            for i in 0..n {
                lin += 2.0 * (x[i].conj() * y[i]).re;
                for j in 0..n {
                    let k = i.abs_diff(j);
                    if k < g.len() {
                        quad += g[k] * (x[i].conj() * x[j]).re;
                    }
                }
            }
            (lin - quad) / n0 + sequence_prior(lab, priors, c.bits_per_symbol())
        })
        .collect();
    Oracle { log_post, labels }
}

impl Oracle {
    fn map_sequence(&self) -> &[usize] {
        let best = (0..self.log_post.len())
            .max_by(|&a, &b| self.log_post[a].total_cmp(&self.log_post[b]))
            .unwrap();
        &self.labels[best]
    }

    fn bit_llrs(&self, bps: usize) -> Vec<f64> {
        let n = self.labels[0].len();
        let mut out = Vec::new();
        for pos in 0..n {
            for i in 0..bps {
                let (mut z, mut o) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (lab, &lp) in self.labels.iter().zip(&self.log_post) {
                    if (lab[pos] >> i) & 1 == 0 {
                        z = log_add(z, lp);
                    } else {
                        o = log_add(o, lp);
                    }
                }
                out.push((z - o).clamp(-LLR_CLAMP, LLR_CLAMP));
            }
        }
        out
    }
}

fn random_min_phase(rng: &mut impl Rng, l: usize) -> Vec<f64> {
    // Product of first-order minimum-phase sections (1 + r z^-1), |r| < 0.8.
    let mut f = vec![1.0];
    for _ in 0..l {
        let r: f64 = rng.gen_range(-0.8..0.8);
        let mut nf = vec![0.0; f.len() + 1];
        for (i, &v) in f.iter().enumerate() {
            nf[i] += v;
            nf[i + 1] += r * v;
        }
        f = nf;
    }
    let e: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    f.iter().map(|v| v / e).collect()
}

fn synthetic_pair(f: &[f64], labels: &[usize], c: Constellation, n0: f64, seed: u64) -> (Observation, Observation) {
    let g = autocorrelation(f);
    let ch = IsiChannel::from_taps(g.clone(), 0.8, 1.0).unwrap();
    let mut ch_f = ch.clone();
    ch_f.f = Some(f.to_vec());
    let bits = labels_to_bits(labels, c);
    let frame = SymbolFrame::from_bits(c, 1.0, bits, 0);
    let yf = forney_observation(&ch_f, &frame, n0, seed).unwrap();
    let n = labels.len();
    let l = f.len() - 1;
    // y_u = Fᴴ y_f.
    let yu: Vec<C64> = (0..n)
        .map(|i| (0..=l).map(|k| yf.samples[i + k] * f[k]).sum())
        .collect();
    let obs_u = Observation {
        model: ObservationModel::Ungerboeck,
        samples: yu,
        n0,
        n_symbols: n,
        taps: ch.two_sided(),
        tap_offset: ch.half_len(),
        channel: ch,
    };
    (yf, obs_u)
}

fn posterior(soft: &[f64], priors: Option<&[f64]>) -> Vec<f64> {
    soft.iter()
        .enumerate()
        .map(|(i, &e)| (e + priors.map_or(0.0, |p| p[i])).clamp(-LLR_CLAMP, LLR_CLAMP))
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn trellis_algorithms_match_exhaustive_enumeration() {
    let mut rng = rng_from_seed(2024);
    for trial in 0..60u64 {
        let c = if trial % 3 == 2 { Constellation::Qpsk } else { Constellation::Bpsk };
        let l = rng.gen_range(0..=3usize);
        let n = if c == Constellation::Qpsk { rng.gen_range(1..=5) } else { rng.gen_range(1..=10) };
        let f = random_min_phase(&mut rng, l);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c.size())).collect();
        let n0 = rng.gen_range(0.3..1.5);
        let (yf, yu) = synthetic_pair(&f, &labels, c, n0, trial);
        let bps = c.bits_per_symbol();
        let priors: Option<Vec<f64>> = if trial % 2 == 0 {
            Some((0..n * bps).map(|_| rng.gen_range(-3.0..3.0)).collect())
        } else {
            None
        };
        let pr = priors.as_deref();

        let spec_f = TrellisSpec::forney(&f, c, 1.0);
        let of = forney_oracle(&f, &yf.samples, n, n0, c, pr);
        assert_eq!(viterbi_mlse(&spec_f, &yf, pr).unwrap(), of.map_sequence(), "trial {trial}");
        let want = of.bit_llrs(bps);
        let got = posterior(&bcjr_full(&spec_f, &yf, pr).unwrap().llr, pr);
        assert!(max_diff(&got, &want) < 1e-6, "trial {trial}: {got:?} vs {want:?}");
        let states = c.size().pow(l as u32);
        let got_m = posterior(&mbcjr(&spec_f, &yf, pr, states, 0).unwrap().llr, pr);
        assert!(max_diff(&got_m, &want) < 1e-6);

        let g = autocorrelation(&f);
        let spec_u = TrellisSpec::ungerboeck_with_memory(&g, l, c, 1.0);
        let ou = ungerboeck_oracle(&g, &yu.samples, n0, c, pr);
        assert_eq!(viterbi_mlse(&spec_u, &yu, pr).unwrap(), ou.map_sequence(), "trial {trial}");
        let want_u = ou.bit_llrs(bps);
        let got_u = posterior(&bcjr_full(&spec_u, &yu, pr).unwrap().llr, pr);
        assert!(max_diff(&got_u, &want_u) < 1e-6);
        let got_um = posterior(&mbcjr(&spec_u, &yu, pr, states, 2).unwrap().llr, pr);
        assert!(max_diff(&got_um, &want_u) < 1e-6);

        // Same likelihood, two factorizations.
        assert!(max_diff(&got, &got_u) < 1e-4, "trial {trial}");
    }
}

#[test]
fn memoryless_bcjr_is_the_scalar_awgn_llr() {
    let f = [1.0];
    let mut rng = rng_from_seed(1);
    let labels: Vec<usize> = (0..32).map(|_| rng.gen_range(0..2)).collect();
    let n0 = 0.8;
    let (yf, _) = synthetic_pair(&f, &labels, Constellation::Bpsk, n0, 5);
    let spec = TrellisSpec::forney(&f, Constellation::Bpsk, 1.0);
    let soft = bcjr_full(&spec, &yf, None).unwrap();
    for (l, y) in soft.llr.iter().zip(&yf.samples) {
        let want = (2.0 * (2.0 / n0) * y.re).clamp(-LLR_CLAMP, LLR_CLAMP);
        assert!((l - want).abs() < 1e-9);
    }
    // Noiseless single-tap Viterbi returns the frame.
    let (clean, _) = synthetic_pair(&f, &labels, Constellation::Bpsk, 0.0, 0);
    assert_eq!(viterbi_mlse(&spec, &clean, None).unwrap(), labels);
}

#[test]
fn zero_observation_gives_zero_llrs() {
    let f = [0.8, 0.5, 0.3];
    let n = 6;
    let ch = IsiChannel::from_taps(autocorrelation(&f), 0.8, 1.0).unwrap();
    let obs = Observation {
        model: ObservationModel::Forney,
        samples: vec![C64::new(0.0, 0.0); n + 2],
        n0: 1.0,
        n_symbols: n,
        taps: f.to_vec(),
        tap_offset: 0,
        channel: ch,
    };
    let spec = TrellisSpec::forney(&f, Constellation::Bpsk, 1.0);
    let soft = bcjr_full(&spec, &obs, None).unwrap();
    assert!(soft.llr.iter().all(|l| l.abs() < 1e-9), "{:?}", soft.llr);
}

#[test]
fn posterior_marginals_sum_to_one() {
    let f = random_min_phase(&mut rng_from_seed(3), 2);
    let labels = vec![0, 1, 1, 0, 1, 0, 0];
    let (yf, _) = synthetic_pair(&f, &labels, Constellation::Bpsk, 0.7, 8);
    let spec = TrellisSpec::forney(&f, Constellation::Bpsk, 1.0);
    let soft = bcjr_full(&spec, &yf, None).unwrap();
    for l in soft.llr {
        let p0 = 1.0 / (1.0 + (-l).exp());
        let p1 = 1.0 / (1.0 + l.exp());
        assert!((p0 + p1 - 1.0).abs() < 1e-9);
    }
}

fn sinc_ungerboeck(tau: f64, n: usize, seed: u64, n0: f64) -> (FtnConfig, SymbolFrame, Observation) {
    let p = PulseShape::sinc(16, 20).unwrap();
    let cfg = FtnConfig::new(p, tau, n, Constellation::Bpsk, 1.0, 0).unwrap();
    let frame = SymbolFrame::random(&cfg, seed);
    let w = modulate(&cfg, &frame);
    let w = if n0 > 0.0 { awgn(&w, n0, derive_seed(seed, 99)) } else { w };
    let obs = mf_frontend(&cfg, &w, n0).unwrap();
    (cfg, frame, obs)
}

fn labels_of(frame: &SymbolFrame) -> Vec<usize> {
    frame.bits.iter().map(|&b| b as usize).collect()
}

#[test]
fn viterbi_recovers_noiseless_sinc_frame() {
    let (_, frame, obs) = sinc_ungerboeck(0.8, 12, 17, 0.0);
    let spec = TrellisSpec::ungerboeck_with_memory(&obs.channel.g, 11, Constellation::Bpsk, 1.0);
    let labels = viterbi_mlse(&spec, &obs, None).unwrap();
    assert_eq!(labels, labels_of(&frame));
    // Exhaustive search over all 2^12 sequences agrees.
    let mut tiny = obs.clone();
    tiny.n0 = 1.0;
    let g: Vec<f64> = obs.channel.g[..12].to_vec();
    let oracle = ungerboeck_oracle(&g, &tiny.samples, 1.0, Constellation::Bpsk, None);
    assert_eq!(oracle.map_sequence(), labels.as_slice());
}

#[test]
fn bcjr_matches_enumeration_on_sinc_frame() {
    let (_, _, obs) = sinc_ungerboeck(0.8, 8, 23, 0.5);
    let g: Vec<f64> = obs.channel.g[..8].to_vec();
    let spec = TrellisSpec::ungerboeck_with_memory(&g, 7, Constellation::Bpsk, 1.0);
    let soft = bcjr_full(&spec, &obs, None).unwrap();
    let oracle = ungerboeck_oracle(&g, &obs.samples, obs.n0, Constellation::Bpsk, None);
    assert!(max_diff(&soft.llr, &oracle.bit_llrs(1)) < 1e-6);
}

#[test]
fn single_survivor_mbcjr_tracks_noiseless_sinc() {
    let (_, frame, mut obs) = sinc_ungerboeck(0.9, 64, 31, 0.0);
    obs.n0 = 1e-2;
    let spec = TrellisSpec::ungerboeck(&obs.channel.g, Constellation::Bpsk, 1.0);
    let soft = mbcjr(&spec, &obs, None, 1, 2).unwrap();
    assert_eq!(soft.hard_bits(), frame.bits);
    let vit = viterbi_mlse(&spec.clone().with_memory(8), &obs, None).unwrap();
    assert_eq!(labels_to_bits(&vit, Constellation::Bpsk), frame.bits);
}

#[test]
fn larger_m_is_never_worse() {
    let ebn0 = [3.0, 5.0];
    for (i, &db) in ebn0.iter().enumerate() {
        let n0 = 1.0 / ftn_core::util::db_to_linear(db);
        let (mut e4, mut e16, mut bits) = (0usize, 0usize, 0usize);
        for frame_idx in 0..50u64 {
            let (_, frame, obs) = sinc_ungerboeck(0.8, 2000, derive_seed(i as u64, frame_idx), n0);
            let spec = TrellisSpec::ungerboeck(&obs.channel.g, Constellation::Bpsk, 1.0);
            let s4 = mbcjr(&spec, &obs, None, 4, 2).unwrap().hard_bits();
            let s16 = mbcjr(&spec, &obs, None, 16, 2).unwrap().hard_bits();
            e4 += s4.iter().zip(&frame.bits).filter(|(a, b)| a != b).count();
            e16 += s16.iter().zip(&frame.bits).filter(|(a, b)| a != b).count();
            bits += frame.bits.len();
        }
        assert!(bits >= 100_000);
        assert!(e16 <= e4, "Eb/N0 {db}: M=16 {e16} errors vs M=4 {e4}");
    }
}

#[test]
fn full_state_mbcjr_equals_bcjr_on_forney_channel() {
    let p = PulseShape::rrc(0.5, 16, 20).unwrap();
    let ch = isi_taps(&p, 0.8, 40).unwrap();
    let w = whiten_forney(&ch).unwrap();
    let spec = TrellisSpec::forney_truncated(w.f.as_ref().unwrap(), 0.999, Constellation::Bpsk, 1.0);
    let mut ch_t = w.clone();
    ch_t.f = Some(spec.taps.clone());
    let cfg = FtnConfig::new(p, 0.8, 40, Constellation::Bpsk, 1.0, 0).unwrap();
    let frame = SymbolFrame::random(&cfg, 77);
    let obs = forney_observation(&ch_t, &frame, 0.5, 78).unwrap();
    let full = bcjr_full(&spec, &obs, None).unwrap();
    let states = 2usize.pow(spec.memory as u32);
    let reduced = mbcjr(&spec, &obs, None, states, 0).unwrap();
    assert!(max_diff(&full.llr, &reduced.llr) < 1e-6);
}

#[test]
fn state_budget_is_enforced() {
    let g = vec![1.0; 30];
    let spec = TrellisSpec::ungerboeck_with_memory(&g, 25, Constellation::Bpsk, 1.0);
    let (_, _, obs) = sinc_ungerboeck(0.8, 4, 1, 0.5);
    assert!(matches!(bcjr_full(&spec, &obs, None), Err(ftn_core::Error::StateExplosion { .. })));
    assert!(matches!(viterbi_mlse(&spec, &obs, None), Err(ftn_core::Error::StateExplosion { .. })));
}
