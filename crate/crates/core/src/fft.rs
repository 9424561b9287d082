//! Cached real-to-complex transforms.
//!
//! Conventions: `rfft` returns the unnormalized half spectrum
//! `c_k = sum_m f_m exp(-2 pi i k m / N)` for `k = 0..=N/2`, and `irfft`
//! applies the `1/N` factor so that `irfft(rfft(f)) == f`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

type Plans = (Arc<dyn RealToComplex<f64>>, Arc<dyn ComplexToReal<f64>>);
type PlanCache = Mutex<(RealFftPlanner<f64>, HashMap<usize, Plans>)>;

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((RealFftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, map) = &mut *guard;
    map.entry(n)
        .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
        .clone()
}

/// Forward transform of `n = samples.len()` real values.
pub fn rfft(samples: &[f64]) -> Vec<Complex64> {
    let (forward, _) = plans(samples.len());
    let mut input = samples.to_vec();
    let mut output = forward.make_output_vec();
    forward
        .process(&mut input, &mut output)
        .expect("buffer lengths come from the plan");
    output
}

/// Forward transform that consumes its input buffer.
pub fn rfft_owned(mut samples: Vec<f64>) -> Vec<Complex64> {
    let (forward, _) = plans(samples.len());
    let mut output = forward.make_output_vec();
    forward
        .process(&mut samples, &mut output)
        .expect("buffer lengths come from the plan");
    output
}

/// Inverse transform to `n` real samples, normalized by `1/n`.
///
/// The imaginary parts of the zero and Nyquist modes are ignored.
pub fn irfft(spectrum: &[Complex64], n: usize) -> Vec<f64> {
    irfft_owned(spectrum.to_vec(), n)
}

/// Inverse transform that consumes its spectrum buffer.
pub fn irfft_owned(mut spectrum: Vec<Complex64>, n: usize) -> Vec<f64> {
    assert_eq!(spectrum.len(), n / 2 + 1, "half spectrum length mismatch");
    let (_, inverse) = plans(n);
    spectrum[0].im = 0.0;
    if n.is_multiple_of(2) {
        spectrum[n / 2].im = 0.0;
    }
    let mut output = inverse.make_output_vec();
    inverse
        .process(&mut spectrum, &mut output)
        .expect("buffer lengths come from the plan");
    let scale = 1.0 / n as f64;
    for v in &mut output {
        *v *= scale;
    }
    output
}
