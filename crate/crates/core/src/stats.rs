//! Small goodness-of-fit helpers.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

/// One-sample Kolmogorov–Smirnov distance of `samples` against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    // the series converges slowly here and the tail is 1 to double precision
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a KS distance `d` from `n` samples (Stephens' correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Pearson statistic over bins with `expected ≥ min_expected`; returns `(χ², bins used)`.
pub fn chi_square(observed: &[f64], expected: &[f64], min_expected: f64) -> (f64, usize) {
    let mut stat = 0.0;
    let mut used = 0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e >= min_expected && e > 0.0 {
            stat += (o - e) * (o - e) / e;
            used += 1;
        }
    }
    (stat, used)
}

/// Linear-interpolated quantile, `q ∈ [0, 1]`, of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut xs: Vec<f64> = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(xs[lo] + (pos - lo as f64) * (xs[hi] - xs[lo]))
}
