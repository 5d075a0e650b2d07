//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any FAIL.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use swipeauth::classifier::{fit_gmm_traced, Point2};
use swipeauth::eval::{run_direction_ablation, run_table1, run_table2, EvalReport};
use swipeauth::ingest::{read_accel_events, read_touch_events};
use swipeauth::segment::SegmentConfig;
use swipeauth::{
    attach_motion, compute_eer, decide_window, extract, fit_gmm, generate_synthetic, load_dataset, rank_features,
    run_protocol, segment_swipes, train_user_model, ColumnMap, Context, EmSettings, FeatureSet, FeatureTable,
    Normalizer, Protocol, RunSettings, SynthConfig, TouchAction, TouchSample, TrainingSplit, N_FEATURES, N_MOTION,
    N_TOUCH,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Option<Check>);

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// 1 ------------------------------------------------------------------------

fn rates(g: &[f64], i: &[f64], t: f64) -> (f64, f64) {
    let frr = g.iter().filter(|&&v| v > t).count() as f64 / g.len() as f64;
    let far = i.iter().filter(|&&v| v <= t).count() as f64 / i.len() as f64;
    (far, frr)
}

/// Every observed value, every midpoint and one point below all of them.
fn brute_force_eer(g: &[f64], i: &[f64]) -> (f64, f64) {
    let mut vals: Vec<f64> = g.iter().chain(i).copied().collect();
    vals.sort_by(f64::total_cmp);
    let mut cands = vec![vals[0] - 1.0];
    for w in vals.windows(2) {
        cands.push(w[0]);
        cands.push(0.5 * (w[0] + w[1]));
    }
    cands.push(*vals.last().unwrap());
    let mut best = (f64::INFINITY, 0.0);
    for t in cands {
        let (far, frr) = rates(g, i, t);
        if (far - frr).abs() < best.0 {
            best = ((far - frr).abs(), (far + frr) / 2.0);
        }
    }
    best
}

fn eer_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 0..500 {
        let ng = rng.random_range(1..=200);
        let ni = rng.random_range(1..=200);
        // half the instances draw from a small integer grid to force ties
        let coarse = n % 2 == 0;
        let shift = rng.random_range(-3.0..3.0);
        let mut draw = |shift: f64| -> f64 {
            if coarse {
                (rng.random_range(0..30) as f64) + shift.round()
            } else {
                rng.random::<f64>() * 10.0 + shift
            }
        };
        let g: Vec<f64> = (0..ng).map(|_| draw(0.0)).collect();
        let i: Vec<f64> = (0..ni).map(|_| draw(shift)).collect();
        let got = compute_eer(&g, &i).map_err(|e| e.to_string())?;
        let (gap, eer) = brute_force_eer(&g, &i);
        ensure(got.eer == eer, || format!("instance {n}: eer {} vs brute force {eer}", got.eer))?;
        let (far, frr) = rates(&g, &i, got.threshold);
        ensure((far - frr).abs() == gap, || format!("instance {n}: threshold {} is not optimal", got.threshold))?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("500 instances in {:.2?}", start.elapsed()))
}

// 2 ------------------------------------------------------------------------

fn ranking_affine() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let width = 30;
    for n in 0..100 {
        let mut rows = |count: usize, shift: f64| -> Vec<Vec<f64>> {
            (0..count)
                .map(|_| (0..width).map(|c| rng.random::<f64>() + shift * (c % 7) as f64).collect())
                .collect()
        };
        let genuine = rows(25, 0.0);
        let impostor = rows(75, 0.3);
        let scale: Vec<f64> = (0..width).map(|_| rng.random_range(1e-3..1e3)).collect();
        let offset: Vec<f64> = (0..width).map(|_| rng.random_range(-1e4..1e4)).collect();
        let affine = |rs: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rs.iter()
                .map(|r| r.iter().enumerate().map(|(c, v)| scale[c] * v + offset[c]).collect())
                .collect()
        };
        let order = |g: &[Vec<f64>], i: &[Vec<f64>]| -> Result<Vec<usize>, String> {
            let pool: Vec<&Vec<f64>> = g.iter().chain(i).collect();
            let norm = Normalizer::fit(&pool).map_err(|e| e.to_string())?;
            let ranked = rank_features(&TrainingSplit {
                columns: (0..width).collect(),
                genuine: norm.apply(g),
                impostor: norm.apply(i),
            })
            .map_err(|e| e.to_string())?;
            Ok(ranked.ids())
        };
        let a = order(&genuine, &impostor)?;
        let b = order(&affine(&genuine), &affine(&impostor))?;
        ensure(a == b, || format!("dataset {n}: order changed"))?;
    }
    Ok("100 datasets, identical order".into())
}

// 3 ------------------------------------------------------------------------

fn em_properties() -> Check {
    let em = EmSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for run in 0..50u64 {
        let k = 1 + (run % 5) as usize;
        let pts: Vec<Point2> = (0..100).map(|_| [rng.random::<f64>(), rng.random::<f64>().powi(3)]).collect();
        let fit = fit_gmm_traced(&pts, k, run, &em).map_err(|e| e.to_string())?;
        for w in fit.log_likelihood_trace.windows(2) {
            ensure(w[1] >= w[0] - 1e-9, || format!("run {run}: log-likelihood {} -> {}", w[0], w[1]))?;
        }
        if k == 1 {
            let n = pts.len() as f64;
            let mean = [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n];
            let c = fit.model.centroids[0];
            ensure((c[0] - mean[0]).abs() < 1e-10 && (c[1] - mean[1]).abs() < 1e-10, || {
                format!("run {run}: centroid {c:?} vs mean {mean:?}")
            })?;
        }
    }
    let noise = Normal::new(0.0, 0.15).unwrap();
    let mut blobs: Vec<Vec<Point2>> = Vec::new();
    for c in [[0.0, 0.0], [2.0, 2.5]] {
        blobs.push((0..250).map(|_| [c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]).collect());
    }
    let all: Vec<Point2> = blobs.concat();
    let g = fit_gmm(&all, 2, 17, &em).map_err(|e| e.to_string())?;
    for b in &blobs {
        let n = b.len() as f64;
        let m = [b.iter().map(|p| p[0]).sum::<f64>() / n, b.iter().map(|p| p[1]).sum::<f64>() / n];
        let near = g.centroids.iter().any(|c| (c[0] - m[0]).abs() < 0.05 && (c[1] - m[1]).abs() < 0.05);
        ensure(near, || format!("no centroid within 0.05 of blob mean {m:?}: {:?}", g.centroids))?;
    }
    Ok("50 monotone runs, k=1 mean, two blobs recovered".into())
}

// 4 ------------------------------------------------------------------------

fn table(cfg: &SynthConfig) -> Result<FeatureTable, String> {
    let ds = generate_synthetic(cfg).map_err(|e| e.to_string())?;
    Ok(FeatureTable::from_dataset(&ds, &SegmentConfig::default()))
}

fn separable_zero_eer() -> Check {
    let start = Instant::now();
    let t = table(&SynthConfig::separable(5, 7))?;
    let mut worst = Vec::new();
    for ctx in Context::ALL {
        for fs in FeatureSet::ALL {
            let p = Protocol::new(vec![ctx], ctx, fs, RunSettings::default());
            let r = run_protocol(&t, &p, 0).map_err(|e| e.to_string())?;
            ensure(r.skipped.is_empty() && r.per_user.len() == 5, || format!("{ctx}/{fs}: users skipped"))?;
            let max = r.per_user.iter().map(|u| u.eer).fold(0.0, f64::max);
            if max != 0.0 {
                worst.push(format!("{ctx}/{fs} max {max:.4}"));
            }
        }
    }
    ensure(worst.is_empty(), || worst.join(", "))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("12 protocols x 5 users at EER 0 in {:.1?}", start.elapsed()))
}

// 5 ------------------------------------------------------------------------

fn mean_eer(reports: &[EvalReport], train_all: bool, test: Context, fs: FeatureSet) -> f64 {
    reports
        .iter()
        .find(|r| {
            r.protocol.test_context == test
                && r.protocol.feature_set == fs
                && (r.protocol.train_contexts.len() == 4) == train_all
        })
        .map(|r| r.mean_eer)
        .unwrap_or(f64::NAN)
}

fn context_effect() -> Check {
    let start = Instant::now();
    let cfg = SynthConfig {
        n_users: 20,
        rng_seed: 2,
        ..SynthConfig::default()
    };
    let t = table(&cfg)?;
    let reports = run_table1(&t, &RunSettings::default(), 0).map_err(|e| e.to_string())?;
    let best = |all: bool, c: Context| {
        FeatureSet::ALL.iter().map(|&f| mean_eer(&reports, all, c, f)).fold(f64::INFINITY, f64::min)
    };
    let mut strict_ctx = 0;
    let mut strict_fs = 0;
    let mut notes = Vec::new();
    for c in Context::ALL {
        let (cs, gen) = (best(false, c), best(true, c));
        ensure(cs <= gen, || format!("{c}: context-specific {cs:.4} > general {gen:.4}"))?;
        strict_ctx += usize::from(cs < gen);
        let (winner, loser) = if c.is_walking() {
            (FeatureSet::Fusion, FeatureSet::Touch)
        } else {
            (FeatureSet::Touch, FeatureSet::Motion)
        };
        let (w, l) = (mean_eer(&reports, false, c, winner), mean_eer(&reports, false, c, loser));
        strict_fs += usize::from(w < l);
        notes.push(format!("{c} {cs:.3}/{gen:.3} {winner}={w:.3} {loser}={l:.3}"));
    }
    ensure(strict_ctx >= 3, || format!("context-specific strictly better on {strict_ctx}/4"))?;
    ensure(strict_fs >= 3, || format!("feature-set ordering holds on {strict_fs}/4: {}", notes.join("; ")))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "context {strict_ctx}/4, features {strict_fs}/4 in {:.1?} ({})",
        start.elapsed(),
        notes.join("; ")
    ))
}

// 6 ------------------------------------------------------------------------

fn golden() -> Check {
    #[derive(serde::Deserialize)]
    struct Expected {
        touch: Vec<f64>,
        motion: Vec<f64>,
    }
    let dir = workspace().join("crates/core/tests/fixtures");
    let map = ColumnMap::default();
    let touch = read_touch_events(&dir.join("golden_swipe_01.csv"), &map).map_err(|e| e.to_string())?;
    let accel = read_accel_events(&dir.join("golden_accel_01.csv"), &map).map_err(|e| e.to_string())?;
    let swipes = attach_motion(segment_swipes(&touch), &accel);
    ensure(swipes.len() == 1, || format!("{} swipes", swipes.len()))?;
    let got = extract(&swipes[0]).0;
    let raw = std::fs::read_to_string(dir.join("golden_01.expected.json")).map_err(|e| e.to_string())?;
    let want: Expected = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    ensure((N_TOUCH, N_MOTION, N_FEATURES) == (117, 94, 211), || "catalog counts".into())?;
    ensure(swipeauth::catalog().len() == 211, || "catalog length".into())?;
    ensure(want.touch.len() == 117 && want.motion.len() == 94 && got.len() == 211, || "vector lengths".into())?;
    for (i, w) in want.touch.iter().chain(&want.motion).enumerate() {
        let tol = 1e-9 * w.abs().max(got[i].abs()).max(1e-3);
        ensure((got[i] - w).abs() <= tol, || format!("feature {i}: {} vs {w}", got[i]))?;
    }
    Ok("117 + 94 values within 1e-9".into())
}

// 7 ------------------------------------------------------------------------

fn gesture(n: usize) -> Vec<TouchSample> {
    (0..n)
        .map(|i| TouchSample {
            t: 1000 + 15 * i as i64,
            x: 300.0,
            y: 900.0 - 30.0 * i as f64,
            pressure: 0.5,
            action: match i {
                0 => TouchAction::Down,
                _ if i == n - 1 => TouchAction::Up,
                _ => TouchAction::Move,
            },
        })
        .collect()
}

fn contracts() -> Check {
    let t = table(&SynthConfig {
        n_users: 4,
        swipes_per_session: 30,
        contexts: vec![Context::S3MapSit],
        rng_seed: 5,
        ..SynthConfig::default()
    })?;
    let p = Protocol::new(vec![Context::S3MapSit], Context::S3MapSit, FeatureSet::Fusion, RunSettings::default());
    for u in &t.users {
        let model = train_user_model(&t, &p, &u.user, 100.0).map_err(|e| e.to_string())?;
        for s in u.sessions.iter().filter(|s| [1, 2].contains(&s.id.session_index)) {
            for r in &s.rows {
                let d = model.score_raw(r);
                ensure(d <= model.threshold, || format!("{}: training swipe {d} above {}", u.user, model.threshold))?;
            }
        }
    }
    let c: Vec<f64> = (1..=25).map(f64::from).collect();
    let stat = decide_window(f64::INFINITY, &c, 4).map_err(|e| e.to_string())?.statistic;
    ensure(stat == 2.5, || format!("window statistic {stat}"))?;
    ensure(segment_swipes(&gesture(5)).is_empty(), || "5-point gesture accepted".into())?;
    ensure(segment_swipes(&gesture(6)).len() == 1, || "6-point gesture rejected".into())?;
    Ok("i=100 covers training, statistic 2.5, 5 rejected / 6 accepted".into())
}

// 8 ------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_swipeauth")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("swipeauth {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| tmp.path().join(s).to_string_lossy().into_owned();
    run_cli(&["synth", "--seed", "11", "--users", "4", "--swipes", "30", "--out", &p("data")])?;
    for (w, dir) in [("1", "r1"), ("4", "r4")] {
        run_cli(&["experiment", "table1", "--seed", "11", "--data", &p("data"), "--out", &p(dir), "--workers", w])?;
    }
    for f in ["table1.json", "table1.csv", "manifest.json"] {
        let a = std::fs::read(tmp.path().join("r1").join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(tmp.path().join("r4").join(f)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{f} differs between --workers 1 and 4"))?;
    }
    Ok("table1 reports byte-identical for --workers 1 and 4".into())
}

// 9 ------------------------------------------------------------------------

fn hmog() -> Option<Check> {
    let root = std::env::var_os("SWIPEAUTH_HMOG_DIR")?;
    Some((|| {
        let map = ColumnMap::load(&workspace().join("config/hmog.map.json")).map_err(|e| e.to_string())?;
        let ds = load_dataset(Path::new(&root), &map).map_err(|e| e.to_string())?;
        let t = FeatureTable::from_dataset(&ds, &SegmentConfig::default());
        let s = RunSettings::default();
        let t1 = run_table1(&t, &s, 0).map_err(|e| e.to_string())?;
        let t2 = run_table2(&t, &s, 0).map_err(|e| e.to_string())?;
        let (all, vertical) = run_direction_ablation(&t, &s, 0).map_err(|e| e.to_string())?;
        let best_fs = |c: Context| {
            FeatureSet::ALL
                .into_iter()
                .min_by(|a, b| mean_eer(&t1, false, c, *a).total_cmp(&mean_eer(&t1, false, c, *b)))
                .unwrap()
        };
        let mut failures = Vec::new();
        for c in Context::ALL {
            let cs = FeatureSet::ALL.iter().map(|&f| mean_eer(&t1, false, c, f)).fold(f64::INFINITY, f64::min);
            let gen = FeatureSet::ALL.iter().map(|&f| mean_eer(&t1, true, c, f)).fold(f64::INFINITY, f64::min);
            if cs >= gen {
                failures.push(format!("{c}: specific {cs:.3} >= general {gen:.3}"));
            }
            let want = if c.is_walking() { FeatureSet::Fusion } else { FeatureSet::Touch };
            if best_fs(c) != want {
                failures.push(format!("{c}: best set {} not {want}", best_fs(c)));
            }
        }
        if vertical.mean_eer >= all.mean_eer {
            failures.push(format!("ablation {:.3} -> {:.3}", all.mean_eer, vertical.mean_eer));
        }
        let s2 = mean_eer(&t1, false, Context::S2ReadWalk, FeatureSet::Fusion);
        let s1g = mean_eer(&t1, true, Context::S1ReadSit, FeatureSet::Touch);
        let cross = t2
            .iter()
            .find(|r| {
                r.protocol.train_contexts == [Context::S4MapWalk]
                    && r.protocol.test_context == Context::S2ReadWalk
                    && r.protocol.feature_set == FeatureSet::Fusion
            })
            .map(|r| r.mean_eer)
            .unwrap_or(f64::NAN);
        let absolute = format!(
            "S2/S2 fusion {:.1}% (ref 7.0), S1 general touch {:.1}% (ref 25.5), S4->S2 fusion {:.1}% (ref 20.9), \
             ablation {:.1}% -> {:.1}% (ref 21.5 -> 17.2)",
            100.0 * s2,
            100.0 * s1g,
            100.0 * cross,
            100.0 * all.mean_eer,
            100.0 * vertical.mean_eer
        );
        ensure(failures.is_empty(), || format!("{}; {absolute}", failures.join("; ")))?;
        Ok(absolute)
    })())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("EER oracle equivalence", || Some(eer_oracle())),
        ("ranking affine invariance", || Some(ranking_affine())),
        ("EM properties", || Some(em_properties())),
        ("separable synthetic zero EER", || Some(separable_zero_eer())),
        ("context effect on synthetic data", || Some(context_effect())),
        ("golden feature vectors", || Some(golden())),
        ("threshold and decision contracts", || Some(contracts())),
        ("determinism across --workers", || Some(determinism())),
        ("HMOG ordinal findings", hmog),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Some(Ok(detail)) => println!("PASS {} {name}: {detail}", n + 1),
            Some(Err(why)) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", n + 1)
            }
            None => println!("SKIP {} {name}: set SWIPEAUTH_HMOG_DIR to run", n + 1),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
