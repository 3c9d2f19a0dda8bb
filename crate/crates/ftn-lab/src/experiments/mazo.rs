use crate::config::MazoConfig;
use crate::error::LabResult;
use crate::experiments::pulse_label;
use crate::table::Table;
use ftn_core::mazo::{limit_from_rows, min_distance, DistanceReport};
use ftn_core::pulse::isi_taps;
use ftn_core::Constellation;
use rayon::prelude::*;

/// Descending grid from `tau_max` to `tau_min`, rounded to 1e-9.
pub(crate) fn tau_grid(c: &MazoConfig) -> Vec<f64> {
    let n = ((c.tau_max - c.tau_min) / c.tau_step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((c.tau_max - i as f64 * c.tau_step) * 1e9).round() / 1e9)
        .collect()
}

fn argmin_text(e: &[i8]) -> String {
    e.iter()
        .map(|&v| match v {
            -1 => '-',
            0 => '0',
            _ => '+',
        })
        .collect()
}

pub fn run(c: &MazoConfig) -> LabResult<Vec<Table>> {
    let grid = tau_grid(c);
    let pulses = c.pulses.iter().map(|p| p.build()).collect::<LabResult<Vec<_>>>()?;
    let work: Vec<(usize, f64)> = (0..pulses.len()).flat_map(|pi| grid.iter().map(move |&t| (pi, t))).collect();
    let reports: Vec<DistanceReport> = work
        .par_iter()
        .map(|&(pi, tau)| -> LabResult<DistanceReport> {
            let ch = isi_taps(&pulses[pi], tau, c.max_len)?;
            Ok(min_distance(&ch, Constellation::Bpsk, c.max_len)?)
        })
        .collect::<LabResult<_>>()?;

    let mut rows = Table::new("mazo.csv", &["pulse", "beta", "tau", "d2min", "argmin_len", "argmin", "max_len"]);
    let mut limits = Table::new("mazo_limits.csv", &["pulse", "beta", "limit", "max_len", "tau_step"]);
    for (pi, pc) in c.pulses.iter().enumerate() {
        let mine: Vec<DistanceReport> = work
            .iter()
            .zip(&reports)
            .filter(|((p, _), _)| *p == pi)
            .map(|(_, r)| r.clone())
            .collect();
        for r in &mine {
            rows.push(vec![
                pulse_label(pc).into(),
                pc.rolloff().into(),
                r.tau.into(),
                r.d2min.into(),
                r.argmin.len().into(),
                argmin_text(&r.argmin).into(),
                r.depth.into(),
            ]);
        }
        limits.push(vec![
            pulse_label(pc).into(),
            pc.rolloff().into(),
            limit_from_rows(&mine).unwrap_or(f64::NAN).into(),
            c.max_len.into(),
            c.tau_step.into(),
        ]);
    }
    Ok(vec![rows, limits])
}
