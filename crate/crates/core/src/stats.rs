//! Small descriptive-statistics helpers shared by feature extraction,
//! ranking and evaluation. Empty inputs yield 0.0 rather than NaN.

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population variance (divides by n).
pub fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

pub fn std_dev(v: &[f64]) -> f64 {
    variance(v).sqrt()
}

pub fn min(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Percentile with linear interpolation between closest ranks over an
/// already sorted slice; `q` is in [0, 100].
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => 0.0,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q / 100.0;
            let lo = h.floor() as usize;
            if lo + 1 >= n {
                return sorted[n - 1];
            }
            let frac = h - lo as f64;
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        }
    }
}

pub fn percentile(v: &[f64], q: f64) -> f64 {
    percentile_sorted(&sorted(v), q)
}

/// mean, std, min, max, P5, P25, P50, P75, P95.
pub fn nine_stats(v: &[f64]) -> [f64; 9] {
    if v.is_empty() {
        return [0.0; 9];
    }
    let s = sorted(v);
    [
        mean(v),
        std_dev(v),
        s[0],
        s[s.len() - 1],
        percentile_sorted(&s, 5.0),
        percentile_sorted(&s, 25.0),
        percentile_sorted(&s, 50.0),
        percentile_sorted(&s, 75.0),
        percentile_sorted(&s, 95.0),
    ]
}

pub const NINE_STAT_NAMES: [&str; 9] = ["mean", "std", "min", "max", "p5", "p25", "p50", "p75", "p95"];
