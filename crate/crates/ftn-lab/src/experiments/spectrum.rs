use crate::config::SpectrumConfig;
use crate::error::LabResult;
use crate::experiments::pulse_label;
use crate::table::Table;
use ftn_core::pulse::{default_tap_count, folded_spectrum, isi_taps, FoldedSpectrum};
use rayon::prelude::*;

pub fn run(c: &SpectrumConfig) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let per_tau: Vec<(FoldedSpectrum, FoldedSpectrum)> = c
        .tau
        .0
        .par_iter()
        .map(|&tau| -> LabResult<_> {
            let direct = folded_spectrum(&p, tau, c.points)?;
            let ch = isi_taps(&p, tau, default_tap_count(&p, tau))?;
            let via = FoldedSpectrum::from_channel(&ch, &direct.xi);
            Ok((direct, via))
        })
        .collect::<LabResult<_>>()?;

    let mut t = Table::new("spectrum.csv", &["pulse", "beta", "tau", "xi", "folded", "folded_from_taps"]);
    for (&tau, (direct, via)) in c.tau.0.iter().zip(&per_tau) {
        for i in 0..direct.len() {
            t.push(vec![
                pulse_label(&c.pulse).into(),
                c.pulse.rolloff().into(),
                tau.into(),
                direct.xi[i].into(),
                direct.values[i].into(),
                via.values[i].into(),
            ]);
        }
    }
    Ok(vec![t])
}
