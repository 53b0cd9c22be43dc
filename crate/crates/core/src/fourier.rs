//! Tensor FFTs and axis-by-axis contractions on uniform torus grids.
//!
//! Grid node `k` on an axis of size `N` sits at angle `2πk/N - π`, so the
//! Fourier coefficient of frequency `m` is `(-1)^m X_m / N` where `X` is the
//! plain DFT of the samples.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Signed frequency stored in bin `k`; the Nyquist bin maps to `-N/2`.
pub fn freq(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Bin holding frequency `m`, if it is representable.
pub fn bin(m: i64, n: usize) -> Option<usize> {
    let half = n as i64 / 2;
    let lo = -half;
    let hi = (n as i64 - 1) / 2;
    if m < lo || m > hi {
        None
    } else {
        Some(m.rem_euclid(n as i64) as usize)
    }
}

pub fn is_nyquist(k: usize, n: usize) -> bool {
    n % 2 == 0 && k == n / 2
}

fn sign(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place FFT along one axis of a row-major tensor.
pub fn fft_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, inverse: bool) {
    let n = sizes[axis];
    let inner: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for k in 0..n {
                line[k] = data[base + k * inner];
            }
            plan.process(&mut line);
            for k in 0..n {
                data[base + k * inner] = line[k];
            }
        }
    }
}

/// Fourier coefficients of grid samples, in bin layout.
pub fn coefficients(values: &[Complex64], sizes: &[usize]) -> Vec<Complex64> {
    let mut data = values.to_vec();
    for axis in 0..sizes.len() {
        fft_axis(&mut data, sizes, axis, false);
    }
    let total = values.len() as f64;
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= bin_sign(flat, sizes) / total;
    }
    data
}

/// Grid samples of the trigonometric polynomial with the given coefficients.
pub fn synthesize(coeffs: &[Complex64], sizes: &[usize]) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= bin_sign(flat, sizes);
    }
    for axis in 0..sizes.len() {
        fft_axis(&mut data, sizes, axis, true);
    }
    data
}

fn bin_sign(mut flat: usize, sizes: &[usize]) -> f64 {
    let mut s = 1.0;
    for &n in sizes.iter().rev() {
        s *= sign(freq(flat % n, n));
        flat /= n;
    }
    s
}

/// Value-space weights `s` with `Σ_i f_i s_i = Σ_m f̂_m w(m) e^{imθ}`, the
/// Nyquist coefficient split evenly between `±N/2`.
pub fn axis_vector<W>(n: usize, theta: f64, w: W) -> Vec<Complex64>
where
    W: Fn(i64) -> Complex64,
{
    let mut spec: Vec<Complex64> = (0..n)
        .map(|k| {
            let m = freq(k, n);
            let term = if is_nyquist(k, n) {
                let h = (n / 2) as i64;
                0.5 * (w(h) * Complex64::from_polar(1.0, h as f64 * theta)
                    + w(-h) * Complex64::from_polar(1.0, -(h as f64) * theta))
            } else {
                w(m) * Complex64::from_polar(1.0, m as f64 * theta)
            };
            term * sign(m) / n as f64
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);
    spec
}

/// Contract the last axis of a row-major tensor against `v`.
pub fn contract_last(values: &[Complex64], n: usize, v: &[Complex64]) -> Vec<Complex64> {
    values
        .par_chunks(n)
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `Σ_i f_i Π_j v_j[i_j]`, contracting from the last axis inwards.
pub fn contract(values: &[Complex64], sizes: &[usize], vecs: &[Vec<Complex64>]) -> Complex64 {
    let mut cur = values.to_vec();
    for axis in (0..sizes.len()).rev() {
        cur = contract_last(&cur, sizes[axis], &vecs[axis]);
    }
    cur[0]
}

/// Contract a single axis, returning the reduced tensor.
pub fn contract_axis(
    values: &[Complex64],
    sizes: &[usize],
    axis: usize,
    v: &[Complex64],
) -> Vec<Complex64> {
    let n = sizes[axis];
    let inner: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    (0..outer * inner)
        .into_par_iter()
        .map(|idx| {
            let (o, i) = (idx / inner, idx % inner);
            let base = o * n * inner + i;
            (0..n).map(|k| values[base + k * inner] * v[k]).sum()
        })
        .collect()
}
