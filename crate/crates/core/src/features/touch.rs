use super::{angle_deg, wrap_deg, N_TOUCH};
use crate::segment::Swipe;
use crate::stats::{max, mean, min, nine_stats, std_dev};

/// Derivative over non-uniform time: central differences on interior
/// points, one-sided at the ends.
fn derivative(f: &[f64], tau: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (f[b] - f[a]) / (tau[b] - tau[a])
        })
        .collect()
}

fn hypot_series(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.hypot(*y)).collect()
}

/// Linear interpolation of (tau, f) at `at`, clamped to the end values.
fn interp(tau: &[f64], f: &[f64], at: f64) -> f64 {
    match f.len() {
        0 => 0.0,
        1 => f[0],
        n => {
            if at <= tau[0] {
                return f[0];
            }
            if at >= tau[n - 1] {
                return f[n - 1];
            }
            let j = tau.partition_point(|&t| t <= at) - 1;
            f[j] + (at - tau[j]) / (tau[j + 1] - tau[j]) * (f[j + 1] - f[j])
        }
    }
}

fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn sign_changes(steps: impl Iterator<Item = f64>) -> f64 {
    let signs: Vec<bool> = steps.filter(|d| *d != 0.0).map(|d| d > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count() as f64
}

/// 117 touch features in catalog order.
pub fn extract_touch(swipe: &Swipe) -> Vec<f64> {
    let s = &swipe.samples;
    let n = s.len();
    let mut out = Vec::with_capacity(N_TOUCH);
    if n == 0 {
        out.resize(N_TOUCH, 0.0);
        return out;
    }

    let t0 = s[0].t;
    let tau: Vec<f64> = s.iter().map(|p| (p.t - t0) as f64).collect();
    let xs: Vec<f64> = s.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = s.iter().map(|p| p.y).collect();
    let ps: Vec<f64> = s.iter().map(|p| p.pressure).collect();
    // offsets from the first point; everything except the position group
    // is computed from these so it does not depend on screen placement
    let rx: Vec<f64> = xs.iter().map(|x| x - xs[0]).collect();
    let ry: Vec<f64> = ys.iter().map(|y| y - ys[0]).collect();

    let vx = derivative(&rx, &tau);
    let vy = derivative(&ry, &tau);
    let speed = hypot_series(&vx, &vy);
    let ax = derivative(&vx, &tau);
    let ay = derivative(&vy, &tau);
    let acc = hypot_series(&ax, &ay);
    let jerk = hypot_series(&derivative(&ax, &tau), &derivative(&ay, &tau));

    // position, pressure, kinematics
    for series in [&xs, &ys, &ps, &vx, &vy, &speed, &acc] {
        out.extend_from_slice(&nine_stats(series));
    }

    // geometry
    let dx = rx[n - 1];
    let dy = ry[n - 1];
    let disp = dx.hypot(dy);
    let seg: Vec<(f64, f64)> = (1..n).map(|i| (rx[i] - rx[i - 1], ry[i] - ry[i - 1])).collect();
    let seg_len: Vec<f64> = seg.iter().map(|(a, b)| a.hypot(*b)).collect();
    let path: f64 = seg_len.iter().sum();
    let straightness = if path > 0.0 { disp / path } else { 0.0 };
    let x_range = max(&rx) - min(&rx);
    let y_range = max(&ry) - min(&ry);
    let aspect = if x_range + y_range > 0.0 {
        y_range / (x_range + y_range)
    } else {
        0.0
    };
    let dev: Vec<f64> = (0..n)
        .map(|i| {
            if disp > 0.0 {
                ((dx * ry[i] - dy * rx[i]) / disp).abs()
            } else {
                rx[i].hypot(ry[i])
            }
        })
        .collect();
    let chord_area = 0.5
        * (0..n.saturating_sub(1))
            .map(|i| rx[i] * ry[i + 1] - rx[i + 1] * ry[i])
            .sum::<f64>();
    let curvature: Vec<f64> = (1..n.saturating_sub(1))
        .map(|i| {
            let (a, b) = (seg[i - 1], seg[i]);
            let (la, lb) = (seg_len[i - 1], seg_len[i]);
            if la == 0.0 || lb == 0.0 {
                0.0
            } else {
                let turn = (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
                turn.abs() / ((la + lb) / 2.0)
            }
        })
        .collect();
    out.extend_from_slice(&[
        xs[0],
        ys[0],
        xs[n - 1],
        ys[n - 1],
        dx,
        dy,
        disp,
        path,
        straightness,
        x_range,
        y_range,
        aspect,
        max(&dev),
        mean(&dev),
        std_dev(&dev),
        chord_area,
        mean(&curvature),
        std_dev(&curvature),
        max(&curvature),
        x_range * y_range,
    ]);

    // direction
    let chord_angle = angle_deg(dx, dy);
    let (chord_sin, chord_cos) = if disp > 0.0 { (dy / disp, dx / disp) } else { (0.0, 0.0) };
    let i2 = 2.min(n - 1);
    let first3 = angle_deg(rx[i2], ry[i2]);
    let j = n.saturating_sub(3);
    let last3 = angle_deg(rx[n - 1] - rx[j], ry[n - 1] - ry[j]);
    let units: Vec<(f64, f64)> = seg
        .iter()
        .zip(&seg_len)
        .filter(|(_, &l)| l > 0.0)
        .map(|(&(a, b), &l)| (a / l, b / l))
        .collect();
    let (seg_mean, seg_circstd) = if units.is_empty() {
        (0.0, 0.0)
    } else {
        let c = units.iter().map(|u| u.0).sum::<f64>() / units.len() as f64;
        let sn = units.iter().map(|u| u.1).sum::<f64>() / units.len() as f64;
        let r = c.hypot(sn).min(1.0);
        let circstd = if r > 0.0 { (-2.0 * r.ln()).sqrt() } else { 0.0 };
        (angle_deg(c, sn), circstd)
    };
    out.extend_from_slice(&[
        chord_angle,
        chord_sin,
        chord_cos,
        first3,
        last3,
        wrap_deg(last3 - first3),
        seg_mean,
        seg_circstd,
        sign_changes(seg.iter().map(|s| s.0)),
        sign_changes(seg.iter().map(|s| s.1)),
    ]);

    // temporal
    let duration = tau[n - 1];
    let dts: Vec<f64> = tau.windows(2).map(|w| w[1] - w[0]).collect();
    let frac_at = |i: usize| if duration > 0.0 { tau[i] / duration } else { 0.0 };
    out.extend_from_slice(&[
        duration,
        n as f64,
        mean(&dts),
        std_dev(&dts),
        frac_at(first_argmax(&speed)),
        frac_at(first_argmax(&ps)),
    ]);

    // checkpoints
    let tau_inner = if n > 2 { &tau[1..n - 1] } else { &tau[..0] };
    for (series_tau, series) in [(&tau[..], &speed[..]), (&tau[..], &ps[..]), (tau_inner, &curvature[..])] {
        for q in super::CHECKPOINTS {
            out.push(interp(series_tau, series, duration * q as f64 / 100.0));
        }
    }

    // transition
    out.extend_from_slice(&[ps[n - 1] - ps[0], speed[n - 1] - speed[0], mean(&jerk)]);

    debug_assert_eq!(out.len(), N_TOUCH);
    out
}
