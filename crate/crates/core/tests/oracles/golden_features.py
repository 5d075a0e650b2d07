"""Reference feature values for the golden fixtures.

Written from the feature definitions with plain loops; shares no code with
the crate. Regenerate with:

    python3 tests/oracles/golden_features.py tests/fixtures/golden_swipe_01.csv \
        tests/fixtures/golden_accel_01.csv > tests/fixtures/golden_01.expected.json
"""

import csv
import json
import math
import sys

import numpy as np


def read_rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def pop_std(v):
    if len(v) < 2:
        return 0.0
    m = sum(v) / len(v)
    return math.sqrt(sum((x - m) ** 2 for x in v) / len(v))


def mean(v):
    return sum(v) / len(v) if v else 0.0


def pct(v, q):
    return float(np.percentile(np.array(v, dtype=float), q, method="linear"))


def nine(v):
    return [mean(v), pop_std(v), min(v), max(v)] + [pct(v, q) for q in (5, 25, 50, 75, 95)]


def deriv(f, t):
    n = len(f)
    out = []
    for i in range(n):
        if i == 0:
            a, b = 0, 1
        elif i == n - 1:
            a, b = n - 2, n - 1
        else:
            a, b = i - 1, i + 1
        out.append((f[b] - f[a]) / (t[b] - t[a]))
    return out


def angle(dx, dy):
    a = math.degrees(math.atan2(dy, dx))
    return a + 360.0 if a <= -180.0 else a


def wrap(d):
    while d > 180.0:
        d -= 360.0
    while d <= -180.0:
        d += 360.0
    return d


def interp(ts, f, at):
    if at <= ts[0]:
        return f[0]
    if at >= ts[-1]:
        return f[-1]
    for j in range(len(ts) - 1):
        if ts[j] <= at < ts[j + 1]:
            return f[j] + (at - ts[j]) / (ts[j + 1] - ts[j]) * (f[j + 1] - f[j])
    raise AssertionError


def sign_changes(steps):
    signs = [d > 0 for d in steps if d != 0]
    return float(sum(1 for i in range(1, len(signs)) if signs[i] != signs[i - 1]))


def touch_features(rows):
    t = [int(r["t"]) for r in rows]
    x = [float(r["x"]) for r in rows]
    y = [float(r["y"]) for r in rows]
    p = [float(r["pressure"]) for r in rows]
    n = len(t)
    tau = [float(ti - t[0]) for ti in t]
    rx = [xi - x[0] for xi in x]
    ry = [yi - y[0] for yi in y]
    vx, vy = deriv(rx, tau), deriv(ry, tau)
    speed = [math.hypot(a, b) for a, b in zip(vx, vy)]
    ax, ay = deriv(vx, tau), deriv(vy, tau)
    acc = [math.hypot(a, b) for a, b in zip(ax, ay)]
    jx, jy = deriv(ax, tau), deriv(ay, tau)
    jerk = [math.hypot(a, b) for a, b in zip(jx, jy)]

    out = []
    for s in (x, y, p, vx, vy, speed, acc):
        out += nine(s)

    dx, dy = rx[-1], ry[-1]
    disp = math.hypot(dx, dy)
    segs = [(rx[i] - rx[i - 1], ry[i] - ry[i - 1]) for i in range(1, n)]
    lens = [math.hypot(a, b) for a, b in segs]
    path = sum(lens)
    xr = max(rx) - min(rx)
    yr = max(ry) - min(ry)
    dev = [abs(dx * ry[i] - dy * rx[i]) / disp for i in range(n)]
    area = 0.5 * sum(rx[i] * ry[i + 1] - rx[i + 1] * ry[i] for i in range(n - 1))
    curv = []
    for i in range(1, n - 1):
        a, b = segs[i - 1], segs[i]
        turn = math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
        curv.append(abs(turn) / ((lens[i - 1] + lens[i]) / 2))
    out += [x[0], y[0], x[-1], y[-1], dx, dy, disp, path, disp / path, xr, yr, yr / (xr + yr),
            max(dev), mean(dev), pop_std(dev), area, mean(curv), pop_std(curv), max(curv), xr * yr]

    first3 = angle(rx[2], ry[2])
    last3 = angle(rx[-1] - rx[-3], ry[-1] - ry[-3])
    c = mean([a / l for (a, _), l in zip(segs, lens)])
    s = mean([b / l for (_, b), l in zip(segs, lens)])
    r = min(math.hypot(c, s), 1.0)
    out += [angle(dx, dy), dy / disp, dx / disp, first3, last3, wrap(last3 - first3),
            angle(c, s), math.sqrt(-2 * math.log(r)),
            sign_changes([a for a, _ in segs]), sign_changes([b for _, b in segs])]

    dur = tau[-1]
    dts = [tau[i] - tau[i - 1] for i in range(1, n)]
    out += [dur, float(n), mean(dts), pop_std(dts),
            tau[speed.index(max(speed))] / dur, tau[p.index(max(p))] / dur]

    for ts, f in ((tau, speed), (tau, p), (tau[1:-1], curv)):
        for q in (20, 35, 50, 65, 80):
            out.append(interp(ts, f, dur * q / 100))

    out += [p[-1] - p[0], speed[-1] - speed[0], mean(jerk)]
    assert len(out) == 117
    return out


def window(ts, ms):
    n = len(ms)
    if n == 0:
        return [0.0] * 28
    mu = mean(ms)
    srt = sorted(ms)
    g = n // 10
    trimmed = mean(srt[g:n - g])
    mad = sum(abs(v - mu) for v in ms) / n
    lo, hi = srt[0], srt[-1]
    argmin = ms.index(lo) / (n - 1) if n > 1 else 0.0
    argmax = ms.index(hi) / (n - 1) if n > 1 else 0.0
    ps = {q: pct(ms, q) for q in (5, 10, 25, 50, 75, 90, 95)}
    msq = sum(v * v for v in ms) / n
    mad1 = sum(abs(ms[i] - ms[i - 1]) for i in range(1, n)) / (n - 1) if n > 1 else 0.0
    den = sum((v - mu) ** 2 for v in ms)
    ac = sum((ms[i] - mu) * (ms[i + 1] - mu) for i in range(n - 1)) / den if den > 0 and lo != hi else 0.0
    secs = [(t - ts[0]) / 1000.0 for t in ts]
    sm = mean(secs)
    sxx = sum((s - sm) ** 2 for s in secs)
    slope = sum((s - sm) * (v - mu) for s, v in zip(secs, ms)) / sxx if sxx > 0 else 0.0
    cross = sum(1 for i in range(n - 1) if (ms[i] - mu) * (ms[i + 1] - mu) < 0) / (n - 1) if n > 1 else 0.0
    peaks = [ms[j] for j in range(1, n - 1) if ms[j] > ms[j - 1] and ms[j] > ms[j + 1]]
    var = den / n if n > 1 else 0.0
    return [mu, math.sqrt(var), var, mad, trimmed, lo, hi, hi - lo, argmin, argmax,
            ps[5], ps[10], ps[25], ps[50], ps[75], ps[90], ps[95], ps[75] - ps[25],
            math.sqrt(msq), msq, mad1, ac, slope, cross, float(len(peaks)), mean(peaks),
            ms[-1] - ms[0], mu - ps[50]]


def motion_features(accel, t0, t1):
    pre, during, post = [], [], []
    for r in accel:
        t = int(r["t"])
        m = math.sqrt(float(r["ax"]) ** 2 + float(r["ay"]) ** 2 + float(r["az"]) ** 2)
        if t0 - 500 <= t < t0:
            pre.append((t, m))
        elif t0 <= t <= t1:
            during.append((t, m))
        elif t1 < t <= t1 + 500:
            post.append((t, m))
    feats = [window([a for a, _ in w], [b for _, b in w]) for w in (pre, during, post)]
    pick = (0, 1, 18, 6, 7)
    out = feats[0] + feats[1] + feats[2]
    for other in (feats[0], feats[2]):
        out += [feats[1][i] - other[i] for i in pick]
    assert len(out) == 94
    return out


def main():
    touch = read_rows(sys.argv[1])
    accel = read_rows(sys.argv[2])
    t0, t1 = int(touch[0]["t"]), int(touch[-1]["t"])
    json.dump({"touch": touch_features(touch), "motion": motion_features(accel, t0, t1)},
              sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
