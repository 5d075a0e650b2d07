//! Seeded synthetic recordings with per-user swipe and motion styles.
//!
//! Every user gets a latent style vector. Touch parameters (swipe length,
//! speed, pressure level and profile, curvature, slant, start position,
//! velocity-peak timing) and motion parameters (hand tremor, touch impulse
//! and ring-down, gait amplitude/frequency/harmonics, postural sway) move
//! away from population values in proportion to `user_separation`, with
//! smooth bounds that keep them physically plausible.
//!
//! Latents are stratified: along each dimension the users occupy evenly
//! spaced grid positions in random order, so a large separation really puts
//! every pair of users far apart. Each context reshuffles that order a
//! little (the user's habits drift between contexts) before the users are
//! put back on the grid.
//!
//! Walking contexts superimpose a gait oscillation of amplitude
//! `walk_noise` near 2 Hz and make touch input noisier. Reading contexts
//! are dominated by vertical scrolls; map contexts mix horizontal and
//! vertical swipes. Horizontal swipes carry only `horizontal_user_share`
//! of the user's touch style (0 makes them user-independent).
//!
//! The output is raw event streams, so segmentation and feature
//! extraction run exactly as they would on recorded data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, SessionRecord, UserRecord};
use crate::error::{Error, Result};
use crate::types::{AccelSample, Context, Millis, SessionId, TouchAction, TouchSample};

const GRAVITY: f64 = 9.80665;
const ACCEL_PERIOD_MS: Millis = 10;
const TOUCH_PERIOD_MS: i64 = 16;
const SESSIONS_PER_CONTEXT: u8 = 4;
const TOUCH_DIMS: usize = 9;
const MOTION_DIMS: usize = 8;
/// Noise added to the latent order before each context is re-gridded.
const CONTEXT_SPREAD: f64 = 0.8;
const TAP_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_users: usize,
    pub swipes_per_session: usize,
    pub contexts: Vec<Context>,
    pub user_separation: f64,
    pub walk_noise: f64,
    pub rng_seed: u64,
    #[serde(default = "default_horizontal_share")]
    pub horizontal_user_share: f64,
}

fn default_horizontal_share() -> f64 {
    0.25
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_users: 10,
            swipes_per_session: 60,
            contexts: Context::ALL.to_vec(),
            user_separation: 1.0,
            walk_noise: 1.5,
            rng_seed: 0,
            horizontal_user_share: default_horizontal_share(),
        }
    }
}

impl SynthConfig {
    /// Users far apart relative to their own swipe-to-swipe variation, with
    /// mild gait: a dataset on which every user should be recognized
    /// perfectly.
    pub fn separable(n_users: usize, rng_seed: u64) -> Self {
        SynthConfig {
            n_users,
            swipes_per_session: 50,
            user_separation: 8.0,
            walk_noise: 0.5,
            rng_seed,
            ..SynthConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_users < 2 {
            return bad("n_users must be at least 2");
        }
        if self.swipes_per_session < 25 {
            return bad("swipes_per_session must be at least 25");
        }
        if self.contexts.is_empty() {
            return bad("at least one context is required");
        }
        if !(self.user_separation >= 0.0 && self.user_separation.is_finite()) {
            return bad("user_separation must be a finite value >= 0");
        }
        if !(self.walk_noise >= 0.0 && self.walk_noise.is_finite()) {
            return bad("walk_noise must be a finite value >= 0");
        }
        if !(0.0..=1.0).contains(&self.horizontal_user_share) {
            return bad("horizontal_user_share must lie in [0, 1]");
        }
        Ok(())
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Smoothly bounds `x` to (-cap, cap), keeping large separations monotone.
fn sat(x: f64, cap: f64) -> f64 {
    cap * (x / cap).tanh()
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

#[derive(Debug, Clone, Copy)]
struct TouchStyle {
    length: f64,
    speed: f64,
    pressure: f64,
    pressure_slope: f64,
    bow: f64,
    slant_deg: f64,
    x0: f64,
    y0: f64,
    peak_frac: f64,
}

impl TouchStyle {
    /// `z` is in latent units; `s` is the user separation.
    fn from_latent(z: &[f64; TOUCH_DIMS], s: f64) -> Self {
        TouchStyle {
            length: 450.0 * sat(0.20 * s * z[0], 1.2).exp(),
            speed: 1.3 * sat(0.20 * s * z[1], 1.2).exp(),
            pressure: 0.45 * sat(0.15 * s * z[2], 0.8).exp(),
            pressure_slope: sat(0.15 * s * z[3], 0.6),
            bow: sat(0.05 * s * z[4], 0.2),
            slant_deg: sat(6.0 * s * z[5], 25.0),
            x0: 540.0 + sat(90.0 * s * z[6], 350.0),
            y0: 1000.0 + sat(120.0 * s * z[7], 600.0),
            peak_frac: 0.45 + sat(0.08 * s * z[8], 0.3),
        }
    }

    fn for_context(mut self, ctx: Context) -> Self {
        if ctx.is_walking() {
            self.speed *= 1.15;
            self.length *= 0.9;
            self.pressure *= 1.05;
        }
        if !ctx.is_reading() {
            self.length *= 0.8;
            self.speed *= 1.2;
        }
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct MotionStyle {
    tremor_amp: f64,
    tremor_hz: f64,
    impulse: f64,
    ring_ms: f64,
    gait_amp: f64,
    gait_hz: f64,
    gait_harmonic: f64,
    sway_amp: f64,
    tilt: f64,
}

impl MotionStyle {
    fn from_latent(z: &[f64; MOTION_DIMS], s: f64, tilt: f64) -> Self {
        MotionStyle {
            tremor_amp: 0.03 * sat(0.25 * s * z[0], 4.0).exp(),
            tremor_hz: 9.0 * sat(0.06 * s * z[1], 0.7).exp(),
            impulse: 0.25 * sat(0.25 * s * z[2], 4.0).exp(),
            ring_ms: 120.0 * sat(0.2 * s * z[3], 2.0).exp(),
            gait_amp: sat(0.4 * s * z[4], 2.0).exp(),
            gait_hz: 1.9 * sat(0.08 * s * z[5], 0.7).exp(),
            gait_harmonic: 0.3 + sat(0.12 * s * z[6], 0.3),
            sway_amp: 0.05 * sat(0.25 * s * z[7], 4.0).exp(),
            tilt,
        }
    }
}

/// Per dimension, users take evenly spaced positions of a zero-mean,
/// unit-variance grid in random order, so any two users differ in every
/// dimension by at least one grid step.
fn stratified(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Vec<Vec<f64>> {
    (0..dims)
        .map(|_| {
            let mut ranks: Vec<usize> = (0..n).collect();
            ranks.shuffle(rng);
            ranks.iter().map(|&r| grid_value(r, n)).collect()
        })
        .collect()
}

fn grid_value(rank: usize, n: usize) -> f64 {
    3f64.sqrt() * (2.0 * (rank as f64 + 0.5) / n as f64 - 1.0)
}

/// Replaces each key by the grid position of its rank.
fn regrid(keys: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; keys.len()];
    for (rank, &u) in order.iter().enumerate() {
        out[u] = grid_value(rank, keys.len());
    }
    out
}

fn scale<const N: usize>(a: &[f64; N], k: f64) -> [f64; N] {
    std::array::from_fn(|i| a[i] * k)
}

struct Gesture {
    t_start: Millis,
    t_end: Millis,
    strength: f64,
}

struct SessionGen<'a> {
    cfg: &'a SynthConfig,
    ctx: Context,
    touch_style: TouchStyle,
    horizontal_style: TouchStyle,
    motion: MotionStyle,
    rng: ChaCha8Rng,
}

impl SessionGen<'_> {
    fn swipe(&mut self, t_start: Millis, out: &mut Vec<TouchSample>) -> Gesture {
        let walking = self.ctx.is_walking();
        let noise = if walking { 2.5 } else { 1.0 };
        let vertical_share = if self.ctx.is_reading() { 0.95 } else { 0.6 };
        let vertical = self.rng.random::<f64>() < vertical_share;
        let base = if vertical {
            self.touch_style
        } else {
            self.horizontal_style
        };
        let heading = if vertical {
            if self.ctx.is_reading() {
                if self.rng.random::<f64>() < 0.85 { -90.0 } else { 90.0 }
            } else if self.rng.random::<bool>() {
                -90.0
            } else {
                90.0
            }
        } else if self.rng.random::<bool>() {
            0.0
        } else {
            180.0
        };

        let r = &mut self.rng;
        let mut jit = |sd: f64| noise * sd * normal(r);
        let length = base.length * jit(0.10).exp();
        let speed = base.speed * jit(0.10).exp();
        let pressure = base.pressure * jit(0.06).exp();
        let slope = base.pressure_slope + jit(0.05);
        let bow = base.bow + jit(0.02);
        let angle = (heading + base.slant_deg + jit(3.0)).to_radians();
        let x0 = base.x0 + jit(25.0);
        let y0 = base.y0 + jit(35.0);
        let peak = (base.peak_frac + jit(0.05)).clamp(0.1, 0.9);
        let point_jitter = if walking { 5.0 } else { 0.5 };

        let duration = (length / speed).max(120.0).round() as i64;
        let mut taus = vec![0i64];
        loop {
            let dt = TOUCH_PERIOD_MS + self.rng.random_range(-2..=2);
            let next = taus[taus.len() - 1] + dt;
            if next >= duration {
                break;
            }
            taus.push(next);
        }
        taus.push(duration);

        let gamma = 0.5f64.ln() / peak.ln();
        let (dir, nrm) = ((angle.cos(), angle.sin()), (-angle.sin(), angle.cos()));
        let n = taus.len();
        for (i, &tau) in taus.iter().enumerate() {
            let u = tau as f64 / duration as f64;
            let w = u.powf(gamma);
            let prog = 0.5 * (1.0 - (std::f64::consts::PI * w).cos());
            let lateral = bow * length * (std::f64::consts::PI * prog).sin();
            let x = x0 + length * prog * dir.0 + lateral * nrm.0 + point_jitter * normal(&mut self.rng);
            let y = y0 + length * prog * dir.1 + lateral * nrm.1 + point_jitter * normal(&mut self.rng);
            let p = pressure
                * (1.0 + slope * (u - 0.5) + 0.15 * (std::f64::consts::PI * u).sin())
                + 0.008 * normal(&mut self.rng);
            out.push(TouchSample {
                t: t_start + tau,
                x: round_to(x, 0.01),
                y: round_to(y, 0.01),
                pressure: round_to(p.max(0.01), 1e-4),
                action: match i {
                    0 => TouchAction::Down,
                    i if i + 1 == n => TouchAction::Up,
                    _ => TouchAction::Move,
                },
            });
        }
        Gesture {
            t_start,
            t_end: t_start + duration,
            strength: (pressure / base.pressure) * (0.15 * normal(&mut self.rng)).exp(),
        }
    }

    fn tap(&mut self, t_start: Millis, out: &mut Vec<TouchSample>) -> Millis {
        let n = self.rng.random_range(2..=5usize);
        let (x, y) = (
            self.touch_style.x0 + 40.0 * normal(&mut self.rng),
            self.touch_style.y0 + 40.0 * normal(&mut self.rng),
        );
        for i in 0..n {
            out.push(TouchSample {
                t: t_start + 12 * i as Millis,
                x: round_to(x + i as f64 * 0.3, 0.01),
                y: round_to(y, 0.01),
                pressure: round_to(self.touch_style.pressure, 1e-4),
                action: match i {
                    0 => TouchAction::Down,
                    i if i + 1 == n => TouchAction::Up,
                    _ => TouchAction::Move,
                },
            });
        }
        t_start + 12 * (n as Millis - 1)
    }

    fn run(mut self, t0: Millis) -> (Vec<TouchSample>, Vec<AccelSample>) {
        let mut touch = Vec::new();
        let mut gestures = Vec::new();
        let mut t = t0;
        for _ in 0..self.cfg.swipes_per_session {
            t += 700 + self.rng.random_range(0..800);
            if self.rng.random::<f64>() < TAP_PROBABILITY {
                t = self.tap(t, &mut touch) + 600 + self.rng.random_range(0..300);
            }
            let g = self.swipe(t, &mut touch);
            t = g.t_end;
            gestures.push(g);
        }
        let accel = self.accel(t0 - 1000, t + 1500, &gestures);
        (touch, accel)
    }

    fn accel(&mut self, begin: Millis, end: Millis, gestures: &[Gesture]) -> Vec<AccelSample> {
        let m = self.motion;
        let n = ((end - begin) / ACCEL_PERIOD_MS + 1) as usize;
        let time = |i: usize| begin + i as Millis * ACCEL_PERIOD_MS;
        let index = |t: Millis| ((t - begin).max(0) / ACCEL_PERIOD_MS) as usize;
        let two_pi = 2.0 * std::f64::consts::PI;

        let walking = self.ctx.is_walking();
        let phase: [f64; 4] = std::array::from_fn(|_| two_pi * self.rng.random::<f64>());
        let gait_hz = m.gait_hz * (1.0 + 0.02 * normal(&mut self.rng));
        let mut signal: Vec<f64> = (0..n)
            .map(|i| {
                let s = (time(i) - begin) as f64 / 1000.0;
                let mut v = m.tremor_amp * (two_pi * m.tremor_hz * s + phase[0]).sin()
                    + m.sway_amp * (two_pi * 0.5 * s + phase[1]).sin();
                if walking {
                    let a = self.cfg.walk_noise * m.gait_amp;
                    v += a * ((two_pi * gait_hz * s + phase[2]).sin()
                        + m.gait_harmonic * (2.0 * two_pi * gait_hz * s + phase[3]).sin());
                }
                v
            })
            .collect();

        for g in gestures {
            let amp = m.impulse * g.strength;
            let span = (g.t_end - g.t_start).max(1) as f64;
            let lead = 400;
            let tail = (5.0 * m.ring_ms) as Millis;
            let (lo, hi) = (index(g.t_start - lead), index(g.t_end + tail).min(n - 1));
            for (i, slot) in signal.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let t = time(i);
                let v = if t < g.t_start {
                    -0.3 * amp * (-((g.t_start - t) as f64) / 100.0).exp()
                } else if t <= g.t_end {
                    amp * (std::f64::consts::PI * (t - g.t_start) as f64 / span).sin()
                } else {
                    let dt = (t - g.t_end) as f64;
                    0.5 * amp * (-dt / m.ring_ms).exp() * (two_pi * 6.0 * dt / 1000.0).sin()
                };
                *slot += v;
            }
        }

        let (st, ct) = (m.tilt.sin(), m.tilt.cos());
        signal
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let g = GRAVITY + p;
                AccelSample {
                    t: time(i),
                    ax: round_to(0.01 * normal(&mut self.rng), 1e-4),
                    ay: round_to(g * st + 0.01 * normal(&mut self.rng), 1e-4),
                    az: round_to(g * ct + 0.01 * normal(&mut self.rng), 1e-4),
                }
            })
            .collect()
    }
}

/// Generates a dataset from `cfg`. Identical configs give identical data.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut contexts = cfg.contexts.clone();
    contexts.sort();
    contexts.dedup();

    let mut master = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let s = cfg.user_separation;
    let n = cfg.n_users;
    let dims = TOUCH_DIMS + MOTION_DIMS;
    let base = stratified(&mut master, n, dims);
    let tilts: Vec<f64> = (0..n).map(|_| 0.3 + 0.4 * master.random::<f64>()).collect();
    // latent[context][dim][user]: the base order perturbed per context, then
    // put back on the grid so every context keeps the full user spread.
    let latent: Vec<Vec<Vec<f64>>> = Context::ALL
        .iter()
        .map(|_| {
            base.iter()
                .map(|col| {
                    let keys: Vec<f64> = col.iter().map(|z| z + CONTEXT_SPREAD * normal(&mut master)).collect();
                    regrid(&keys)
                })
                .collect()
        })
        .collect();
    let sessions_per_user = Context::ALL.len() * SESSIONS_PER_CONTEXT as usize;
    let seeds: Vec<u64> = (0..n * sessions_per_user).map(|_| master.random()).collect();

    let mut users = Vec::with_capacity(n);
    for u in 0..n {
        let session_seeds = &seeds[u * sessions_per_user..(u + 1) * sessions_per_user];
        let id = format!("u{:03}", u + 1);
        let mut sessions = Vec::new();
        for &ctx in &contexts {
            let ci = Context::ALL.iter().position(|c| *c == ctx).unwrap();
            let zt: [f64; TOUCH_DIMS] = std::array::from_fn(|d| latent[ci][d][u]);
            let zm: [f64; MOTION_DIMS] = std::array::from_fn(|d| latent[ci][TOUCH_DIMS + d][u]);
            let touch_style = TouchStyle::from_latent(&zt, s).for_context(ctx);
            let horizontal_style =
                TouchStyle::from_latent(&scale(&zt, cfg.horizontal_user_share), s).for_context(ctx);
            let motion = MotionStyle::from_latent(&zm, s, tilts[u]);
            for idx in 1..=SESSIONS_PER_CONTEXT {
                let seed = session_seeds[ci * SESSIONS_PER_CONTEXT as usize + idx as usize - 1];
                let gen = SessionGen {
                    cfg,
                    ctx,
                    touch_style,
                    horizontal_style,
                    motion,
                    rng: ChaCha8Rng::seed_from_u64(seed),
                };
                let t0 = 1_000_000 + ((ci * 4 + idx as usize) as Millis) * 10_000_000;
                let (touch, accel) = gen.run(t0);
                sessions.push(SessionRecord {
                    id: SessionId::new(id.clone(), idx, ctx)?,
                    session_dir: format!("{}_{}", ctx.code(), idx),
                    touch,
                    accel,
                });
            }
        }
        users.push(UserRecord { id, sessions });
    }
    Ok(Dataset {
        users,
        warnings: Vec::new(),
    })
}
