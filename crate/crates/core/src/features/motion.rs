use super::{N_MOTION, WINDOW_FEATURES};
use crate::segment::{MagSample, Swipe};
use crate::stats::{mean, percentile_sorted, sorted, std_dev, variance};

/// Index-based fraction of the first occurrence of the extreme value.
fn arg_frac(v: &[f64], pick_max: bool) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if (pick_max && x > v[best]) || (!pick_max && x < v[best]) {
            best = i;
        }
    }
    best as f64 / (v.len() - 1) as f64
}

fn window_features(w: &[MagSample]) -> [f64; 28] {
    let n = w.len();
    if n == 0 {
        return [0.0; 28];
    }
    let m: Vec<f64> = w.iter().map(|s| s.m).collect();
    let s = sorted(&m);
    let mu = mean(&m);
    let lo = s[0];
    let hi = s[n - 1];
    let constant = lo == hi;

    let g = n / 10;
    let trimmed = mean(&s[g..n - g]);
    let mad = m.iter().map(|x| (x - mu).abs()).sum::<f64>() / n as f64;
    let p = |q: f64| percentile_sorted(&s, q);

    let mean_sq = m.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let mean_abs_diff = if n > 1 {
        m.windows(2).map(|d| (d[1] - d[0]).abs()).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };

    let autocorr = if n < 2 || constant {
        0.0
    } else {
        let den: f64 = m.iter().map(|x| (x - mu) * (x - mu)).sum();
        let num: f64 = m.windows(2).map(|d| (d[0] - mu) * (d[1] - mu)).sum();
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    };

    let slope = {
        let secs: Vec<f64> = w.iter().map(|s| (s.t - w[0].t) as f64 / 1000.0).collect();
        let sm = mean(&secs);
        let sxx: f64 = secs.iter().map(|x| (x - sm) * (x - sm)).sum();
        if n < 2 || sxx == 0.0 {
            0.0
        } else {
            secs.iter().zip(&m).map(|(x, y)| (x - sm) * (y - mu)).sum::<f64>() / sxx
        }
    };

    let crossing_rate = if n > 1 {
        m.windows(2).filter(|d| (d[0] - mu) * (d[1] - mu) < 0.0).count() as f64 / (n - 1) as f64
    } else {
        0.0
    };

    let peaks: Vec<f64> = (1..n.saturating_sub(1))
        .filter(|&j| m[j] > m[j - 1] && m[j] > m[j + 1])
        .map(|j| m[j])
        .collect();

    [
        mu,
        std_dev(&m),
        variance(&m),
        mad,
        trimmed,
        lo,
        hi,
        hi - lo,
        arg_frac(&m, false),
        arg_frac(&m, true),
        p(5.0),
        p(10.0),
        p(25.0),
        p(50.0),
        p(75.0),
        p(90.0),
        p(95.0),
        p(75.0) - p(25.0),
        mean_sq.sqrt(),
        mean_sq,
        mean_abs_diff,
        autocorr,
        slope,
        crossing_rate,
        peaks.len() as f64,
        mean(&peaks),
        m[n - 1] - m[0],
        mu - p(50.0),
    ]
}

fn cross_stats(f: &[f64; 28]) -> [f64; 5] {
    // mean, std, rms, max, range
    let at = |name: &str| WINDOW_FEATURES.iter().position(|(n, _)| *n == name).unwrap();
    [f[at("mean")], f[at("std")], f[at("rms")], f[at("max")], f[at("range")]]
}

/// 94 motion features in catalog order: 28 per window (pre, during, post)
/// followed by during-minus-pre and during-minus-post deltas.
pub fn extract_motion(swipe: &Swipe) -> Vec<f64> {
    let pre = window_features(&swipe.mag_pre);
    let during = window_features(&swipe.mag_during);
    let post = window_features(&swipe.mag_post);

    let mut out = Vec::with_capacity(N_MOTION);
    out.extend_from_slice(&pre);
    out.extend_from_slice(&during);
    out.extend_from_slice(&post);
    let d = cross_stats(&during);
    for other in [cross_stats(&pre), cross_stats(&post)] {
        out.extend(d.iter().zip(other).map(|(a, b)| a - b));
    }
    debug_assert_eq!(out.len(), N_MOTION);
    out
}
