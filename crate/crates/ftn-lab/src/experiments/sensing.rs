use crate::config::{SenseAfConfig, SenseMlConfig};
use crate::error::LabResult;
use crate::experiments::{pulse_label, seed_at};
use crate::table::Table;
use ftn_core::model::modulate;
use ftn_core::sensing::{af_peak_report, expected_af, ml_doppler, simulate_echo, uniform_grid, PeakParams, SensingScene, Target};
use ftn_core::util::rng_from_seed;
use ftn_core::{FtnConfig, SymbolFrame, C64};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

pub fn run_af(c: &SenseAfConfig, seed: u64) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let dopplers = uniform_grid(c.doppler_min, c.doppler_max, c.doppler_points);
    let params = PeakParams {
        factor: c.peak_factor,
        ..PeakParams::default()
    };
    let grids = c
        .tau
        .0
        .par_iter()
        .enumerate()
        .map(|(ti, &tau)| {
            let cfg = FtnConfig::new(p.clone(), tau, c.n_symbols, c.constellation.into(), 1.0, 0)?;
            Ok(expected_af(&cfg, &c.delays, &dopplers, c.trials, seed_at(seed, &[ti as u64]))?)
        })
        .collect::<LabResult<Vec<_>>>()?;

    let label = pulse_label(&c.pulse);
    let beta = c.pulse.rolloff();
    let mut grid_t = Table::new(
        "af_grid.csv",
        &["pulse", "beta", "tau", "n_symbols", "delay", "doppler", "value", "stderr", "trials", "seed"],
    );
    let mut peak_t = Table::new(
        "af_peaks.csv",
        &["pulse", "beta", "tau", "n_symbols", "delay", "doppler", "value", "ratio", "alias_order", "seed"],
    );
    for (g, &tau) in grids.iter().zip(&c.tau.0) {
        for (r, &delay) in g.delays.iter().enumerate() {
            for (j, &nu) in g.dopplers.iter().enumerate() {
                grid_t.push(vec![
                    label.as_str().into(),
                    beta.into(),
                    tau.into(),
                    c.n_symbols.into(),
                    delay.into(),
                    nu.into(),
                    g.value(r, j).into(),
                    g.std_err[r * g.dopplers.len() + j].into(),
                    c.trials.into(),
                    seed.into(),
                ]);
            }
        }
        for pk in af_peak_report(g, &params) {
            peak_t.push(vec![
                label.as_str().into(),
                beta.into(),
                tau.into(),
                c.n_symbols.into(),
                pk.delay.into(),
                pk.doppler.into(),
                pk.value.into(),
                pk.ratio.into(),
                (pk.doppler * tau).into(),
                seed.into(),
            ]);
        }
    }
    Ok(vec![grid_t, peak_t])
}

/// Estimated Doppler for each true target, using the assignment with least total error.
fn assign(truth: &[f64], est: &[f64]) -> Vec<f64> {
    if truth.len() == 2 && est.len() == 2 {
        let straight = (truth[0] - est[0]).abs() + (truth[1] - est[1]).abs();
        let crossed = (truth[0] - est[1]).abs() + (truth[1] - est[0]).abs();
        if crossed < straight {
            return vec![est[1], est[0]];
        }
    }
    est.to_vec()
}

fn ml_run(c: &SenseMlConfig, p: &ftn_core::PulseShape, tau: f64, n: usize, grid: &[f64], seed: u64) -> LabResult<Vec<f64>> {
    let cfg = FtnConfig::new(p.clone(), tau, n, c.constellation.into(), 1.0, 0)?;
    let frame = SymbolFrame::random(&cfg, seed_at(seed, &[0]));
    let s = modulate(&cfg, &frame);
    let mut rng = rng_from_seed(seed_at(seed, &[1]));
    let targets = c
        .targets
        .iter()
        .map(|t| Target {
            doppler: t.doppler,
            amplitude: C64::from_polar(t.amplitude, 2.0 * PI * rng.gen::<f64>()),
        })
        .collect();
    let scene = SensingScene::new(targets, c.n0)?;
    let r = simulate_echo(&scene, &s, seed_at(seed, &[2]));
    let est = ml_doppler(c.targets.len(), &s, &r, grid)?;
    let truth: Vec<f64> = c.targets.iter().map(|t| t.doppler).collect();
    Ok(assign(&truth, &est.dopplers))
}

pub fn run_ml(c: &SenseMlConfig, seed: u64) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let grid = uniform_grid(c.grid_min, c.grid_max, c.grid_points);
    let tol = c.hit_tolerance();
    let work: Vec<(usize, usize)> = (0..c.scenarios.len())
        .flat_map(|si| (0..c.runs).map(move |r| (si, r)))
        .collect();
    let estimates: Vec<Vec<f64>> = work
        .par_iter()
        .map(|&(si, r)| {
            let sc = &c.scenarios[si];
            ml_run(c, &p, sc.tau.0[0], sc.n_symbols, &grid, seed_at(seed, &[si as u64, r as u64]))
        })
        .collect::<LabResult<_>>()?;

    let mut runs_t = Table::new(
        "sense_ml.csv",
        &[
            "scenario", "tau", "n_symbols", "window", "run", "target", "doppler", "amplitude", "estimate", "error", "hit", "seed",
        ],
    );
    let mut sum_t = Table::new(
        "sense_ml_summary.csv",
        &[
            "scenario", "tau", "n_symbols", "window", "target", "doppler", "hit_rate", "rmse", "runs", "tolerance", "grid_step", "n0", "seed",
        ],
    );
    for (si, sc) in c.scenarios.iter().enumerate() {
        let tau = sc.tau.0[0];
        let window = sc.n_symbols as f64 * tau;
        let rows: Vec<&Vec<f64>> = work
            .iter()
            .zip(&estimates)
            .filter(|((s, _), _)| *s == si)
            .map(|(_, e)| e)
            .collect();
        let mut all_hits = vec![true; rows.len()];
        for (k, tg) in c.targets.iter().enumerate() {
            let mut hits = 0usize;
            let mut sq = 0.0;
            for (r, est) in rows.iter().enumerate() {
                let err = est[k] - tg.doppler;
                let hit = err.abs() <= tol;
                hits += usize::from(hit);
                all_hits[r] &= hit;
                sq += err * err;
                runs_t.push(vec![
                    si.into(),
                    tau.into(),
                    sc.n_symbols.into(),
                    window.into(),
                    r.into(),
                    k.into(),
                    tg.doppler.into(),
                    tg.amplitude.into(),
                    est[k].into(),
                    err.into(),
                    usize::from(hit).into(),
                    seed.into(),
                ]);
            }
            sum_t.push(vec![
                si.into(),
                tau.into(),
                sc.n_symbols.into(),
                window.into(),
                k.to_string().into(),
                tg.doppler.into(),
                (hits as f64 / rows.len() as f64).into(),
                (sq / rows.len() as f64).sqrt().into(),
                c.runs.into(),
                tol.into(),
                c.grid_step().into(),
                c.n0.into(),
                seed.into(),
            ]);
        }
        let all = all_hits.iter().filter(|&&h| h).count() as f64 / rows.len() as f64;
        sum_t.push(vec![
            si.into(),
            tau.into(),
            sc.n_symbols.into(),
            window.into(),
            "all".into(),
            f64::NAN.into(),
            all.into(),
            f64::NAN.into(),
            c.runs.into(),
            tol.into(),
            c.grid_step().into(),
            c.n0.into(),
            seed.into(),
        ]);
    }
    Ok(vec![runs_t, sum_t])
}
