//! Browser bindings for three interactive views: folded spectra, ambiguity
//! Doppler slices and the minimum-distance curve.
//!
//! The plain functions in [`demo`] do the work and are testable natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use wasm_bindgen::prelude::*;

pub mod demo {
    use ftn_core::mazo::min_distance;
    use ftn_core::pulse::{cell_centered_grid, folded_spectrum, isi_taps, PulseShape};
    use ftn_core::sensing::{expected_af, uniform_grid};
    use ftn_core::{Constellation, FtnConfig, Result};

    /// Samples per symbol for the demo pulses; τ must be a multiple of 1/SPS.
    pub const SPS: usize = 20;
    const SPAN: usize = 16;

    /// Sinc for `beta == 0`, RRC otherwise.
    pub fn pulse(beta: f64, sps: usize) -> Result<PulseShape> {
        if beta == 0.0 {
            PulseShape::sinc(SPAN, sps)
        } else {
            PulseShape::rrc(beta, SPAN, sps)
        }
    }

    /// Frequency grid of [`folded`], in units of 1/(τT).
    pub fn folded_grid(points: usize) -> Vec<f64> {
        cell_centered_grid(points)
    }

    /// Closed-form folded spectrum on a cell-centered grid.
    pub fn folded(beta: f64, tau: f64, points: usize) -> Result<Vec<f64>> {
        Ok(folded_spectrum(&pulse(beta, SPS)?, tau, points)?.values)
    }

    /// Zero-delay Doppler slice of the expected squared ambiguity function.
    pub fn af_slice(beta: f64, tau: f64, n_symbols: usize, trials: usize, doppler_max: f64, points: usize, seed: u64) -> Result<Vec<f64>> {
        let cfg = FtnConfig::new(pulse(beta, SPS)?, tau, n_symbols, Constellation::Qpsk, 1.0, 0)?;
        let dopplers = uniform_grid(-doppler_max, doppler_max, points);
        Ok(expected_af(&cfg, &[0.0], &dopplers, trials, seed)?.values)
    }

    /// Minimum squared distance at each τ of a descending grid, for BPSK.
    pub fn dmin_curve(beta: f64, taus: &[f64], max_len: usize) -> Result<Vec<f64>> {
        let p = pulse(beta, SPS)?;
        taus.iter()
            .map(|&tau| Ok(min_distance(&isi_taps(&p, tau, max_len)?, Constellation::Bpsk, max_len)?.d2min))
            .collect()
    }
}

fn js(e: ftn_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = foldedGrid)]
pub fn folded_grid(points: usize) -> Vec<f64> {
    demo::folded_grid(points)
}

#[wasm_bindgen(js_name = foldedSpectrum)]
pub fn folded_spectrum(beta: f64, tau: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::folded(beta, tau, points).map_err(js)
}

#[wasm_bindgen(js_name = afDopplerSlice)]
pub fn af_doppler_slice(
    beta: f64,
    tau: f64,
    n_symbols: usize,
    trials: usize,
    doppler_max: f64,
    points: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    demo::af_slice(beta, tau, n_symbols, trials, doppler_max, points, u64::from(seed)).map_err(js)
}

#[wasm_bindgen(js_name = dminCurve)]
pub fn dmin_curve(beta: f64, taus: Vec<f64>, max_len: usize) -> Result<Vec<f64>, JsError> {
    demo::dmin_curve(beta, &taus, max_len).map_err(js)
}
