use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(n: usize, buf: &mut [Complex64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

fn run_2d(n: usize, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // rows are contiguous; rustfft processes the buffer in chunks of n
    fft.process_with_scratch(buf, &mut scratch);
    transpose(n, buf);
    fft.process_with_scratch(buf, &mut scratch);
    transpose(n, buf);
}

pub(crate) fn forward_2d(n: usize, buf: &mut [Complex64]) {
    let p = plans(n);
    run_2d(n, buf, &p.forward);
}

pub(crate) fn inverse_2d(n: usize, buf: &mut [Complex64]) {
    let p = plans(n);
    run_2d(n, buf, &p.inverse);
    let scale = 1.0 / (n * n) as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}
