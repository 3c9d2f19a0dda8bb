//! Acceptance suite. Prints one PASS/FAIL line per criterion.

use ftn_core::capacity::{flat_capacity, operating_point};
use ftn_core::eq_freq::{bin_frequency, eigen_spectrum, fde_mmse, FdeSetting};
use ftn_core::eq_time::{bcjr_full, labels_to_bits, mbcjr, viterbi_mlse, TrellisSpec, LLR_CLAMP};
use ftn_core::model::{autocorrelation, effective_half_len, fd_frontend, forney_observation, modulate};
use ftn_core::pulse::{default_tap_count, folded_spectrum, folded_value, isi_taps, FoldedSpectrum, IsiChannel, PulseShape};
use ftn_core::util::{crossing_log, log_add, q_function, rng_from_seed};
use ftn_core::{Constellation, FtnConfig, Observation, ObservationModel, SymbolFrame, C64};
use ftn_lab::catalog::builtin_text;
use ftn_lab::runner::run_in_memory;
use ftn_lab::table::Cell;
use ftn_lab::{ExperimentConfig, Table};
use rand::Rng;
use std::io::Write;
use std::time::Instant;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Written past the test harness capture so the lines always reach the log.
fn emit(o: &Outcome, secs: f64) {
    let line = format!(
        "{} {}: {} ({secs:.1} s)\n",
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.detail
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn run_toml(text: &str, seed: u64) -> Vec<Table> {
    let cfg = ExperimentConfig::parse(text, "acceptance", None).expect("valid config");
    run_in_memory(&cfg, seed, None).expect("experiment runs")
}

fn table<'a>(tables: &'a [Table], name: &str) -> &'a Table {
    tables.iter().find(|t| t.name == name).expect("table present")
}

fn num(t: &Table, row: usize, col: &str) -> f64 {
    match &t.rows[row][t.column(col).expect("column")] {
        Cell::Num(v) => *v,
        Cell::Int(v) => *v as f64,
        Cell::Text(s) => s.parse().unwrap_or(f64::NAN),
    }
}

fn text(t: &Table, row: usize, col: &str) -> String {
    match &t.rows[row][t.column(col).expect("column")] {
        Cell::Text(s) => s.clone(),
        Cell::Int(v) => v.to_string(),
        Cell::Num(v) => v.to_string(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

// ---------------------------------------------------------------- Mazo limits

fn mazo_limits() -> Outcome {
    let start = Instant::now();
    let tables = run_toml(builtin_text("mazo-table").unwrap(), 1);
    let secs = start.elapsed().as_secs_f64();
    let t = table(&tables, "mazo_limits.csv");
    let want = [("sinc", 0.0, 0.802), ("rrc", 0.1, 0.779), ("rrc", 0.3, 0.703)];
    let mut pass = secs < 600.0;
    let mut parts = Vec::new();
    for (pulse, beta, target) in want {
        let row = (0..t.rows.len())
            .find(|&r| text(t, r, "pulse") == pulse && close(num(t, r, "beta"), beta))
            .expect("pulse row");
        let limit = num(t, row, "limit");
        pass &= (limit - target).abs() <= 0.012;
        parts.push(format!("{pulse} β={beta}: {limit} (want {target}±0.012)"));
    }
    Outcome {
        name: "mazo limits",
        pass,
        detail: format!("{}; scan {secs:.1} s", parts.join(", ")),
    }
}

// --------------------------------------------------------- aliasing threshold

fn aliasing_threshold() -> Outcome {
    let p = PulseShape::rrc(0.5, 16, 20).unwrap();
    let n0 = 0.1; // Es/N0 = 10 dB
    let cap = |tau: f64| flat_capacity(&folded_spectrum(&p, tau, 4096).unwrap(), 1.0, n0);
    let falling: Vec<f64> = [1.0, 0.95, 0.9, 0.85, 0.8, 0.77].iter().map(|&t| cap(t)).collect();
    let monotone = falling.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let flat: Vec<f64> = [0.76, 0.70, 0.60, 0.50].iter().map(|&t| cap(t)).collect();
    let hi = flat.iter().cloned().fold(f64::MIN, f64::max);
    let lo = flat.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (hi - lo) / hi;
    Outcome {
        name: "aliasing threshold",
        pass: monotone && spread <= 0.005,
        detail: format!(
            "C(τ=1..0.77) = {:?} non-decreasing: {monotone}; C(0.76,0.7,0.6,0.5) = {:?}, spread {:.3}% (limit 0.5%)",
            falling.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            flat.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            100.0 * spread
        ),
    }
}

// ------------------------------------------------- folded-spectrum consistency

fn folded_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.5, 0.75, 1.0] {
        let p = PulseShape::rrc(beta, 16, 20).unwrap();
        for tau in [0.6, 0.7, 0.8, 1.0] {
            let ch = isi_taps(&p, tau, default_tap_count(&p, tau)).unwrap();
            let direct = folded_spectrum(&p, tau, 256).unwrap();
            let via = FoldedSpectrum::from_channel(&ch, &direct.xi);
            for (a, b) in direct.values.iter().zip(&via.values) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let mut flat: f64 = 0.0;
    let mut pulses = vec![PulseShape::sinc(16, 20).unwrap()];
    for beta in [0.1, 0.3, 0.5, 0.75, 1.0] {
        pulses.push(PulseShape::rrc(beta, 16, 20).unwrap());
    }
    for p in &pulses {
        for v in folded_spectrum(p, 1.0, 1024).unwrap().values {
            flat = flat.max((v - 1.0).abs());
        }
    }
    Outcome {
        name: "folded-spectrum consistency",
        pass: worst <= 1e-3 && flat <= 1e-4,
        detail: format!("12-point grid worst {worst:.2e} (limit 1e-3); Nyquist flatness worst {flat:.2e} (limit 1e-4)"),
    }
}

// ---------------------------------------------- equalizer oracle equivalence

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
    let ch = IsiChannel::from_taps(g, 0.8, 1.0).unwrap();
    let mut ch_f = ch.clone();
    ch_f.f = Some(f.to_vec());
    let frame = SymbolFrame::from_bits(c, 1.0, labels_to_bits(labels, c), 0);
    let yf = forney_observation(&ch_f, &frame, n0, seed).unwrap();
    let n = labels.len();
    let l = f.len() - 1;
    let yu: Vec<C64> = (0..n).map(|i| (0..=l).map(|k| yf.samples[i + k] * f[k]).sum()).collect();
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

fn equalizer_oracle() -> Outcome {
    let mut rng = rng_from_seed(77);
    let (mut viterbi_misses, mut worst_bcjr, mut worst_m): (usize, f64, f64) = (0, 0.0, 0.0);
    let frames = 200;
    for trial in 0..frames as u64 {
        let c = if trial % 4 == 3 { Constellation::Qpsk } else { Constellation::Bpsk };
        let l = (trial % 4) as usize;
        let n = if c == Constellation::Qpsk { rng.gen_range(1..=6) } else { rng.gen_range(1..=10) };
        let f = random_min_phase(&mut rng, l);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c.size())).collect();
        let n0 = rng.gen_range(0.2..2.0);
        let (yf, yu) = synthetic_pair(&f, &labels, c, n0, trial);
        let bps = c.bits_per_symbol();
        let priors: Option<Vec<f64>> = (trial % 2 == 0).then(|| (0..n * bps).map(|_| rng.gen_range(-3.0..3.0)).collect());
        let pr = priors.as_deref();
        let states = c.size().pow(l as u32);

        let spec_f = TrellisSpec::forney(&f, c, 1.0);
        let of = forney_oracle(&f, &yf.samples, n, n0, c, pr);
        viterbi_misses += usize::from(viterbi_mlse(&spec_f, &yf, pr).unwrap() != of.map_sequence());
        let want = of.bit_llrs(bps);
        let full = posterior(&bcjr_full(&spec_f, &yf, pr).unwrap().llr, pr);
        worst_bcjr = worst_bcjr.max(max_diff(&full, &want));
        let m = posterior(&mbcjr(&spec_f, &yf, pr, states, 0).unwrap().llr, pr);
        worst_m = worst_m.max(max_diff(&m, &full));

        let g = autocorrelation(&f);
        let spec_u = TrellisSpec::ungerboeck_with_memory(&g, l, c, 1.0);
        let ou = ungerboeck_oracle(&g, &yu.samples, n0, c, pr);
        viterbi_misses += usize::from(viterbi_mlse(&spec_u, &yu, pr).unwrap() != ou.map_sequence());
        let want_u = ou.bit_llrs(bps);
        let full_u = posterior(&bcjr_full(&spec_u, &yu, pr).unwrap().llr, pr);
        worst_bcjr = worst_bcjr.max(max_diff(&full_u, &want_u));
        let m_u = posterior(&mbcjr(&spec_u, &yu, pr, states, 2).unwrap().llr, pr);
        worst_m = worst_m.max(max_diff(&m_u, &full_u));
    }
    Outcome {
        name: "equalizer oracle equivalence",
        pass: viterbi_misses == 0 && worst_bcjr <= 1e-6 && worst_m <= 1e-6,
        detail: format!(
            "{frames} frames x 2 metrics: Viterbi mismatches {viterbi_misses}, BCJR worst |ΔLLR| {worst_bcjr:.1e}, M-BCJR(M = states) worst {worst_m:.1e}"
        ),
    }
}

// ------------------------------------------------------------ uncoded BER

const BER_MEMORY: usize = 10;

fn uncoded_ber() -> Outcome {
    // Matched-filter bound: Q(sqrt(2 Eb/N0)) = 1e-4.
    let mfb_db = {
        let (mut lo, mut hi) = (0.0f64, 15.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if q_function((2.0 * 10f64.powf(mid / 10.0)).sqrt()) > 1e-4 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let ebn0 = mfb_db + 0.5;
    let cfg = format!(
        r#"
experiment = "ber-td"
tau = 0.85
ebn0_db = [{ebn0}]
constellation = "bpsk"
n_symbols = 20000
frames = 100
equalizer = "viterbi"
memory = {BER_MEMORY}

[pulse]
kind = "sinc"
span = 16
sps = 20
"#
    );
    let start = Instant::now();
    let tables = run_toml(&cfg, 11);
    let secs = start.elapsed().as_secs_f64();
    let t = table(&tables, "ber_td.csv");
    let (bits, errors, ber) = (num(t, 0, "bits"), num(t, 0, "errors"), num(t, 0, "ber"));
    Outcome {
        name: "uncoded BER above the Mazo limit",
        pass: bits >= 2e6 && ber <= 1e-4 && secs < 900.0,
        detail: format!(
            "sinc τ=0.85 Viterbi (memory {BER_MEMORY}, per-survivor tail) at MFB({mfb_db:.2} dB)+0.5 dB: {errors}/{bits} = {ber:.2e} (limit 1e-4)"
        ),
    }
}

// ------------------------------------------------------------ FDE correctness

fn solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: C64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn fde_correctness() -> Outcome {
    let mut worst_solve: f64 = 0.0;
    for n in [64usize, 256] {
        let p = PulseShape::rrc(0.3, 16, 20).unwrap();
        let cfg = FtnConfig::new(p, 0.8, n, Constellation::Qpsk, 1.0, 48).unwrap();
        let frame = SymbolFrame::random(&cfg, n as u64);
        let mut obs = fd_frontend(&cfg, &modulate(&cfg, &frame), 0.0).unwrap();
        obs.n0 = 0.1;
        let setting = FdeSetting::from_observation(&obs, 1.0, cfg.cp_len).unwrap();
        let out = fde_mmse(&obs, &setting, Constellation::Qpsk, 1.0).unwrap();
        let k = obs.tap_offset;
        let a: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = (i as isize - j as isize).rem_euclid(n as isize) as usize;
                        let lag = d.min(n - d);
                        let c = if lag <= k { obs.taps[k + lag] } else { 0.0 };
                        C64::new(c + if i == j { 0.1 } else { 0.0 }, 0.0)
                    })
                    .collect()
            })
            .collect();
        let want = solve(a, obs.samples.clone());
        for (x, w) in out.estimates.iter().zip(&want) {
            worst_solve = worst_solve.max((x - w).norm());
        }
    }

    let mut worst_eig: f64 = 0.0;
    for (beta, tau) in [(0.3, 0.8), (0.5, 0.7), (0.5, 0.9), (1.0, 0.6), (0.3, 0.9)] {
        let p = PulseShape::rrc(beta, 32, 20).unwrap();
        let ch = FtnConfig::new(p.clone(), tau, 256, Constellation::Bpsk, 1.0, 0).unwrap().channel().unwrap();
        let k = effective_half_len(&ch);
        let es = eigen_spectrum(&ch.g[..=k], 256, tau, 1.0);
        for (i, v) in es.values.iter().enumerate() {
            worst_eig = worst_eig.max((v - folded_value(&p, tau, bin_frequency(i, 256))).abs());
        }
    }

    let tables = run_toml(
        r#"
experiment = "ber-fd"
tau = [0.9, 0.6]
ebn0_db = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
n_symbols = 256
frames = 40

[pulse]
beta = 0.3
sps = 20
"#,
        5,
    );
    let t = table(&tables, "ber_fd.csv");
    let mut ordered = true;
    let mut pairs = Vec::new();
    for r in 0..t.rows.len() {
        if close(num(t, r, "tau"), 0.9) {
            let eb = num(t, r, "EbN0_dB");
            let other = (0..t.rows.len())
                .find(|&q| close(num(t, q, "tau"), 0.6) && close(num(t, q, "EbN0_dB"), eb))
                .unwrap();
            let (b9, b6) = (num(t, r, "ber"), num(t, other, "ber"));
            ordered &= b6 > b9;
            pairs.push(format!("{eb}dB {b6:.1e}>{b9:.1e}"));
        }
    }
    Outcome {
        name: "FDE correctness",
        pass: worst_solve <= 1e-6 && worst_eig <= 1e-3 && ordered,
        detail: format!(
            "dense solve worst {worst_solve:.1e} (N=64,256); eigenvalue vs folded worst {worst_eig:.1e}; BER(0.6)>BER(0.9): {}",
            pairs.join(", ")
        ),
    }
}

// ---------------------------------------------------------- information rates

fn bpsk_mi(esn0_db: f64) -> f64 {
    let n0 = 1.0 / 10f64.powf(esn0_db / 10.0);
    let sigma = (n0 / 2.0).sqrt();
    let steps = 40_000;
    let (lo, hi) = (1.0 - 12.0 * sigma, 1.0 + 12.0 * sigma);
    let h = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let y = lo + i as f64 * h;
        let pdf = (-(y - 1.0).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        let z = -4.0 * y / n0;
        let softplus = if z > 30.0 { z } else { z.exp().ln_1p() };
        acc += w * pdf * softplus / std::f64::consts::LN_2;
    }
    1.0 - acc * h
}

fn information_rates() -> Outcome {
    let tables = run_toml(
        r#"
experiment = "rates"
tau = 1.0
constellation = "bpsk"
esn0_db = [-2.0, 0.0, 2.0, 4.0]
n_symbols = 20000
trials = 10
"#,
        3,
    );
    let t = table(&tables, "rates.csv");
    let mut within = true;
    let mut parts = Vec::new();
    for r in 0..t.rows.len() {
        let (db, got, se) = (num(t, r, "EsN0_dB"), num(t, r, "bits_per_symbol"), num(t, r, "mc_std_err"));
        let want = bpsk_mi(db);
        let z = (got - want).abs() / se;
        within &= z <= 3.0;
        parts.push(format!("{db}dB {got:.4} vs {want:.4} ({z:.1} SE)"));
    }

    let tables = run_toml(
        r#"
experiment = "rates"
tau = [1.0, 0.7]
constellation = "qpsk"
esn0_db = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
n_symbols = 20000
trials = 4

[pulse]
beta = 0.5
sps = 20
"#,
        3,
    );
    let t = table(&tables, "rates.csv");
    let at4 = |tau: f64| {
        let rows: Vec<usize> = (0..t.rows.len()).filter(|&r| close(num(t, r, "tau"), tau)).collect();
        let es: Vec<f64> = rows.iter().map(|&r| num(t, r, "EsN0_dB")).collect();
        let rs: Vec<f64> = rows.iter().map(|&r| num(t, r, "bits_per_symbol")).collect();
        operating_point(&es, &rs, 4.0).map(|(_, r)| r / tau)
    };
    let (r1, r7) = (at4(1.0), at4(0.7));
    let ordering = matches!((r1, r7), (Some(a), Some(b)) if b >= a);
    Outcome {
        name: "information rates",
        pass: within && ordering,
        detail: format!(
            "BPSK τ=1: {}; QPSK at Eb/N0=4 dB: τ=0.7 {:.4} vs τ=1 {:.4} bits/s/(1/T)",
            parts.join(", "),
            r7.unwrap_or(f64::NAN),
            r1.unwrap_or(f64::NAN)
        ),
    }
}

// ------------------------------------------------------------------ coded FTN

fn coded_ftn() -> Outcome {
    let tables = run_toml(
        r#"
experiment = "coded"
tau = "2/3"
ebn0_db = [3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0]
constellation = "bpsk"
info_len = 8192
iterations = 10
frames = 12
equalizer = "bcjr"
memory = 6

[pulse]
beta = 0.3
span = 16
sps = 24
"#,
        9,
    );
    let t = table(&tables, "coded.csv");
    let snrs: Vec<f64> = {
        let mut v: Vec<f64> = (0..t.rows.len()).map(|r| num(t, r, "EbN0_dB")).collect();
        v.dedup();
        v
    };
    let curve = |it: f64, col: &str| -> Vec<f64> {
        snrs.iter()
            .map(|&s| {
                let r = (0..t.rows.len())
                    .find(|&r| close(num(t, r, "EbN0_dB"), s) && close(num(t, r, "iteration"), it))
                    .unwrap();
                num(t, r, col)
            })
            .collect()
    };
    let first = curve(1.0, "ber");
    let last = curve(10.0, "ber");
    let x1 = crossing_log(&snrs, &first, 1e-4);
    let x10 = crossing_log(&snrs, &last, 1e-4);
    let gain = match (x1, x10) {
        (Some(a), Some(b)) => a - b,
        _ => f64::NAN,
    };
    let medians: Vec<Vec<f64>> = (1..=10).map(|it| curve(it as f64, "ber_median")).collect();
    let monotone_at = |i: usize| medians.windows(2).all(|w| w[1][i] <= w[0][i]);
    let waterfall = last.iter().position(|&b| b <= 1e-4);
    let monotone = waterfall.is_some_and(monotone_at);
    let not_monotone: Vec<String> = (0..snrs.len())
        .filter(|&i| !monotone_at(i))
        .map(|i| format!("{}", snrs[i]))
        .collect();
    Outcome {
        name: "coded FTN turbo gain",
        pass: monotone && gain >= 1.0,
        detail: format!(
            "BER 1e-4 at {:.2} dB (iteration 1) vs {:.2} dB (iteration 10): gain {gain:.2} dB; median BER monotone at the waterfall point {:?} dB: {monotone}; non-monotone points: [{}]",
            x1.unwrap_or(f64::NAN),
            x10.unwrap_or(f64::NAN),
            waterfall.map(|i| snrs[i]),
            not_monotone.join(", ")
        ),
    }
}

// -------------------------------------------------------------------- sensing

fn sensing_af() -> Outcome {
    let start = Instant::now();
    let tables = run_toml(builtin_text("fig2-af-slices").unwrap(), 1);
    let secs = start.elapsed().as_secs_f64();
    let t = table(&tables, "af_peaks.csv");
    let peaks_for = |tau: f64| -> Vec<(f64, f64)> {
        (0..t.rows.len())
            .filter(|&r| close(num(t, r, "tau"), tau))
            .map(|r| (num(t, r, "doppler"), num(t, r, "ratio")))
            .collect()
    };
    let ghost = |tau: f64| {
        peaks_for(tau)
            .into_iter()
            .filter(|(nu, ratio)| (nu.abs() - 1.0 / tau).abs() <= 0.05 && *ratio > 3.0)
            .map(|(_, ratio)| ratio)
            .fold(f64::NAN, f64::max)
    };
    let (g1, g8) = (ghost(1.0), ghost(0.8));
    let quiet = peaks_for(0.6);
    Outcome {
        name: "sensing ambiguity peaks",
        pass: g1 > 3.0 && g8 > 3.0 && quiet.is_empty() && secs < 600.0,
        detail: format!(
            "peak/median at |ν|=1/τ: τ=1 {g1:.1}, τ=0.8 {g8:.1}; τ=0.6 peaks above 3x: {}",
            quiet.len()
        ),
    }
}

fn sensing_ml() -> Outcome {
    let tables = run_toml(builtin_text("fig3-two-target").unwrap(), 1);
    let t = table(&tables, "sense_ml_summary.csv");
    let rate = |tau: f64, target: &str| {
        let r = (0..t.rows.len())
            .find(|&r| close(num(t, r, "tau"), tau) && text(t, r, "target") == target)
            .unwrap();
        num(t, r, "hit_rate")
    };
    let (ftn_all, ftn_weak, nyq_weak) = (rate(0.6, "all"), rate(0.6, "1"), rate(1.0, "1"));
    Outcome {
        name: "sensing two-target ML",
        pass: ftn_all >= 0.9 && nyq_weak < ftn_weak,
        detail: format!("τ=0.6 both recovered {ftn_all:.2} (limit 0.90); weak target τ=1 {nyq_weak:.2} vs τ=0.6 {ftn_weak:.2}"),
    }
}

// ---------------------------------------------------------------- determinism

const DETERMINISM_CONFIGS: [&str; 9] = [
    "experiment = \"spectrum\"\ntau = [1.0, 0.7]\npoints = 256\n",
    "experiment = \"capacity\"\ntau = [1.0, 0.7]\nebn0_db = [0.0, 5.0]\ngrid_points = 256\n",
    "experiment = \"rates\"\ntau = [1.0, 0.8]\nesn0_db = [0.0, 4.0]\nn_symbols = 2000\ntrials = 3\n",
    "experiment = \"mazo\"\ntau_max = 0.9\ntau_min = 0.8\ntau_step = 0.05\nmax_len = 8\n[[pulses]]\nbeta = 0.3\nsps = 20\n",
    "experiment = \"ber-td\"\ntau = 0.8\nebn0_db = [4.0]\nequalizer = \"mbcjr\"\nm = 8\nn_symbols = 500\nframes = 4\n",
    "experiment = \"ber-fd\"\ntau = 0.8\nebn0_db = [6.0]\nn_symbols = 128\nframes = 4\ntd_reference = \"bcjr\"\n",
    "experiment = \"coded\"\ntau = 0.8\nebn0_db = [3.0]\ninfo_len = 256\niterations = 3\nframes = 3\nequalizer = \"fde\"\nconstellation = \"qpsk\"\n",
    "experiment = \"sense-af\"\ntau = 0.8\nn_symbols = 32\ntrials = 100\ndoppler_points = 45\n[pulse]\nsps = 10\n",
    "experiment = \"sense-ml\"\nn0 = 0.1\nruns = 5\ngrid_points = 41\n[[scenarios]]\ntau = 0.8\nn_symbols = 24\n[[targets]]\ndoppler = 0.3\namplitude = 1.0\n[pulse]\nsps = 10\n",
];

fn determinism() -> Outcome {
    let mut mismatched = Vec::new();
    let mut seed_sensitive = 0;
    for text in DETERMINISM_CONFIGS {
        let cfg = ExperimentConfig::parse(text, "determinism", None).expect("valid config");
        let csv = |seed: u64, threads: usize| -> Vec<String> {
            run_in_memory(&cfg, seed, Some(threads))
                .expect("runs")
                .iter()
                .map(|t| t.to_csv())
                .collect()
        };
        let a = csv(42, 1);
        if a != csv(42, 1) || a != csv(42, 3) {
            mismatched.push(cfg.kind().to_string());
        }
        if a != csv(43, 1) {
            seed_sensitive += 1;
        }
    }
    Outcome {
        name: "determinism",
        pass: mismatched.is_empty(),
        detail: format!(
            "{} experiment kinds re-run (1 and 3 threads): mismatches [{}]; {seed_sensitive} kinds change with the seed",
            DETERMINISM_CONFIGS.len(),
            mismatched.join(", ")
        ),
    }
}

#[test]
fn primary_acceptance_criteria() {
    // FTN_ACCEPTANCE_ONLY=<substring> runs a subset while iterating.
    let only = std::env::var("FTN_ACCEPTANCE_ONLY").ok();
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("mazo_limits", mazo_limits),
        ("aliasing_threshold", aliasing_threshold),
        ("folded_consistency", folded_consistency),
        ("equalizer_oracle", equalizer_oracle),
        ("uncoded_ber", uncoded_ber),
        ("fde_correctness", fde_correctness),
        ("information_rates", information_rates),
        ("coded_ftn", coded_ftn),
        ("sensing_af", sensing_af),
        ("sensing_ml", sensing_ml),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (key, c) in criteria {
        if only.as_deref().is_some_and(|o| !key.contains(o)) {
            continue;
        }
        let start = Instant::now();
        let o = c();
        emit(&o, start.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(o.name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
