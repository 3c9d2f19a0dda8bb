use crate::config::RatesConfig;
use crate::error::LabResult;
use crate::experiments::{pulse_label, seed_at};
use crate::table::Table;
use ftn_core::capacity::{info_rate_arnold_loeliger, RateEstimate};
use ftn_core::model::{whiten_forney, DEFAULT_REGULARIZER};
use ftn_core::pulse::{default_tap_count, isi_taps, IsiChannel, PulseShape};
use ftn_core::{Constellation, Error};
use rayon::prelude::*;

/// Forney channel, regularized only when the folded spectrum has nulls.
pub(crate) fn forney_channel(p: &PulseShape, tau: f64) -> LabResult<IsiChannel> {
    let ch = isi_taps(p, tau, default_tap_count(p, tau))?;
    match whiten_forney(&ch) {
        Err(Error::NullSpectrum { min }) => {
            log::info!("tau {tau}: folded spectrum reaches {min:.2e}; whitening with eps = {DEFAULT_REGULARIZER}");
            Ok(whiten_forney(&ch.with_regularizer(DEFAULT_REGULARIZER))?)
        }
        other => Ok(other?),
    }
}

pub fn run(c: &RatesConfig, seed: u64) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let constellation: Constellation = c.constellation.into();
    let channels: Vec<IsiChannel> = c
        .tau
        .0
        .par_iter()
        .map(|&tau| forney_channel(&p, tau))
        .collect::<LabResult<_>>()?;
    let work: Vec<(usize, usize)> = (0..c.tau.0.len())
        .flat_map(|ti| (0..c.esn0_db.len()).map(move |ei| (ti, ei)))
        .collect();
    let estimates: Vec<RateEstimate> = work
        .par_iter()
        .map(|&(ti, ei)| -> LabResult<RateEstimate> {
            Ok(info_rate_arnold_loeliger(
                &channels[ti],
                constellation,
                c.esn0_db[ei],
                c.n_symbols,
                c.trials,
                seed_at(seed, &[ti as u64, ei as u64]),
                c.state_budget,
            )?)
        })
        .collect::<LabResult<_>>()?;

    let mut t = Table::new(
        "rates.csv",
        &[
            "tau",
            "beta",
            "EbN0_dB",
            "rate",
            "method",
            "EsN0_dB",
            "pulse",
            "constellation",
            "bits_per_symbol",
            "mc_std_err",
            "n_symbols",
            "trials",
            "seed",
        ],
    );
    for (&(ti, ei), est) in work.iter().zip(&estimates) {
        let tau = c.tau.0[ti];
        let es = c.esn0_db[ei];
        let r = est.bits_per_symbol;
        let eb = if r > 0.0 { es - 10.0 * r.log10() } else { f64::NAN };
        t.push(vec![
            tau.into(),
            c.pulse.rolloff().into(),
            eb.into(),
            (r / tau).into(),
            "arnold_loeliger".into(),
            es.into(),
            pulse_label(&c.pulse).into(),
            constellation.name().into(),
            r.into(),
            est.std_err.into(),
            c.n_symbols.into(),
            c.trials.into(),
            seed.into(),
        ]);
    }
    Ok(vec![t])
}
