//! FFT-backed linear convolution of real sequences.
//!
//! The cut-off needs two discrete sums over a compactly supported kernel
//! `K[d]`, `d = d0..d0+len`:
//!
//! * correlation, `out[k] = sum_d K[d] data[k - s + d]`;
//! * convolution, `out[i] = sum_d K[d] data[i + s - d]`;
//!
//! with `data` read as zero outside its index range. Several kernel/data
//! pairs sharing a shift are summed in the frequency domain, so one inverse
//! transform serves all of them.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A kernel sampled at integer offsets `first..first + values.len()`.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub first: i64,
    pub values: Vec<f64>,
}

impl Kernel {
    fn reversed(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }
}

/// Full linear convolution `sum_p a_p * b_p` of short kernels `a_p` (all
/// of one length) with data `b_p`, zero-padded to the longest output.
///
/// The data are processed in blocks (overlap-add), so the round-off at an
/// output index scales with the data near it rather than with the global
/// maximum; exponentially growing inputs would otherwise swamp small
/// values far from their peak.
fn convolve_sum(terms: &[(&[f64], &[f64])]) -> Vec<f64> {
    let out_len = terms
        .iter()
        .map(|(a, b)| a.len() + b.len() - 1)
        .max()
        .unwrap_or(0);
    if out_len == 0 {
        return Vec::new();
    }
    let klen = terms.iter().map(|(a, _)| a.len()).max().unwrap_or(1);
    let data_len = terms.iter().map(|(_, b)| b.len()).max().unwrap_or(0);
    let size = (4 * klen).next_power_of_two().max(64);
    let block = size - klen + 1;
    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(size), p.plan_fft_inverse(size))
    });
    let norm = 1.0 / size as f64;
    let mut out = vec![0.0; out_len];
    let mut acc = vec![Complex::new(0.0, 0.0); size];
    let mut buf = vec![Complex::new(0.0, 0.0); size];
    let mut start = 0;
    while start < data_len {
        acc.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
        let mut any = false;
        for (a, b) in terms {
            let end = (start + block).min(b.len());
            if start >= end || b[start..end].iter().all(|&v| v == 0.0) {
                continue;
            }
            any = true;
            // pack both real inputs into one complex transform
            buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
            for (z, &v) in buf.iter_mut().zip(a.iter()) {
                z.re = v;
            }
            for (z, &v) in buf.iter_mut().zip(&b[start..end]) {
                z.im = v;
            }
            fwd.process(&mut buf);
            // A[f] = (Z[f] + conj Z[-f]) / 2, B[f] = (Z[f] - conj Z[-f]) / 2i,
            // so A B = (Z[f]^2 - conj(Z[-f])^2) / 4i.
            for f in 0..size {
                let z = buf[f];
                let zc = buf[(size - f) % size].conj();
                acc[f] += (z * z - zc * zc) * Complex::new(0.0, -0.25);
            }
        }
        if any {
            inv.process(&mut acc);
            for (o, z) in out[start..].iter_mut().zip(&acc) {
                *o += z.re * norm;
            }
        }
        start += block;
    }
    out
}

/// `out[k] = sum_p sum_d K_p[d] data_p[k - shift + d]` for `k in 0..out_len`.
pub fn correlate_sum(terms: &[(&Kernel, &[f64])], shift: i64, out_len: usize) -> Vec<f64> {
    if terms.is_empty() {
        return vec![0.0; out_len];
    }
    let reversed: Vec<Vec<f64>> = terms.iter().map(|(k, _)| k.reversed()).collect();
    let pairs: Vec<(&[f64], &[f64])> = reversed
        .iter()
        .zip(terms)
        .map(|(r, (_, d))| (r.as_slice(), *d))
        .collect();
    let full = convolve_sum(&pairs);
    // all kernels in one call must share `first` and length
    let k0 = terms[0].0;
    let offset = -shift + k0.first + k0.values.len() as i64 - 1;
    pick(&full, offset, out_len)
}

/// `out[i] = sum_d K[d] data[i + shift - d]` for `i in 0..out_len`.
pub fn convolve(kernel: &Kernel, data: &[f64], shift: i64, out_len: usize) -> Vec<f64> {
    let full = convolve_sum(&[(kernel.values.as_slice(), data)]);
    pick(&full, shift - kernel.first, out_len)
}

fn pick(full: &[f64], offset: i64, out_len: usize) -> Vec<f64> {
    (0..out_len as i64)
        .map(|k| {
            let idx = k + offset;
            if idx >= 0 && (idx as usize) < full.len() {
                full[idx as usize]
            } else {
                0.0
            }
        })
        .collect()
}
