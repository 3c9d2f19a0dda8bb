use crate::config::CapacityConfig;
use crate::error::LabResult;
use crate::experiments::pulse_label;
use crate::table::Table;
use ftn_core::capacity::{flat_capacity, operating_point, waterfill_input_psd};
use ftn_core::pulse::folded_spectrum;
use ftn_core::util::db_to_linear;
use rayon::prelude::*;

/// Rows: one per (τ, method, Eb/N0); the rate is in bits/s with `T = 1`,
/// solved self-consistently so that `Eb = Es / R_symbol`.
pub fn run(c: &CapacityConfig) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let steps = ((c.esn0_max_db - c.esn0_min_db) / c.esn0_step_db).round() as usize;
    let esn0: Vec<f64> = (0..=steps).map(|i| c.esn0_min_db + i as f64 * c.esn0_step_db).collect();

    let work: Vec<(f64, &String)> = c.tau.0.iter().flat_map(|&t| c.methods.iter().map(move |m| (t, m))).collect();
    let curves: Vec<Vec<f64>> = work
        .par_iter()
        .map(|&(tau, method)| -> LabResult<Vec<f64>> {
            let fs = folded_spectrum(&p, tau, c.grid_points)?;
            esn0.iter()
                .map(|&db| {
                    let n0 = 1.0 / db_to_linear(db);
                    let bits_per_s = if method == "gaussian_waterfill" {
                        waterfill_input_psd(&fs, 1.0, n0)?.rate
                    } else {
                        flat_capacity(&fs, 1.0, n0)
                    };
                    Ok(bits_per_s * tau)
                })
                .collect()
        })
        .collect::<LabResult<_>>()?;

    let mut t = Table::new(
        "capacity.csv",
        &["tau", "beta", "EbN0_dB", "rate", "method", "EsN0_dB", "pulse", "bits_per_symbol"],
    );
    for (&(tau, method), curve) in work.iter().zip(&curves) {
        for &eb in &c.ebn0_db {
            let (es, r) = operating_point(&esn0, curve, eb).unwrap_or((f64::NAN, f64::NAN));
            t.push(vec![
                tau.into(),
                c.pulse.rolloff().into(),
                eb.into(),
                (r / tau).into(),
                method.as_str().into(),
                es.into(),
                pulse_label(&c.pulse).into(),
                r.into(),
            ]);
        }
    }
    Ok(vec![t])
}
