//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use centroid_sections::revolution::RevolutionBody;

pub const SEED: u64 = 0x5EED;

/// `|S^{d}|` from the Gamma function, computed without the library.
pub fn sphere_area(d: usize) -> f64 {
    let k = (d + 1) as f64 / 2.0;
    2.0 * PI.powf(k) / statrs::function::gamma::gamma(k)
}

/// `C_m^lam(x)` from the explicit finite sum
/// `sum_k (-1)^k (lam)_{m-k} / (k! (m-2k)!) (2x)^{m-2k}`, with the sum of
/// absolute terms as a cancellation scale.
pub fn gegenbauer_explicit(m: usize, lam: f64, x: f64) -> (f64, f64) {
    let rising = |j: usize| (0..j).map(|i| lam + i as f64).product::<f64>();
    let fact = |j: usize| (1..=j).map(|i| i as f64).product::<f64>();
    (0..=m / 2).fold((0.0, 0.0), |(s, a), k| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let t = sign * rising(m - k) / (fact(k) * fact(m - 2 * k)) * (2.0 * x).powi((m - 2 * k) as i32);
        (s + t, a + t.abs())
    })
}

/// Composite Simpson on `[a, b]` with `2k` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, k: usize) -> f64 {
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `int_{S^{n-1}} f(<xi, e_n>)` in polar angle.
pub fn sphere_integral_oracle<F: Fn(f64) -> f64>(f: F, n: usize, panels: usize) -> f64 {
    sphere_area(n - 2) * simpson(|t| f(t.cos()) * t.sin().powi(n as i32 - 2), 0.0, PI, panels)
}

/// Hit-or-miss estimates in the cube `[-r, r]^n`.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub volume: f64,
    pub volume_sigma: f64,
    pub centroid: f64,
    pub centroid_sigma: f64,
}

pub fn monte_carlo(body: &RevolutionBody, r: f64, samples: usize, seed: u64) -> MonteCarlo {
    let n = body.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    let (mut hits, mut sum, mut sum2) = (0usize, 0.0, 0.0);
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen_range(-r..r);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || norm <= body.rho.eval(x[n - 1] / norm) {
            hits += 1;
            sum += x[n - 1];
            sum2 += x[n - 1] * x[n - 1];
        }
    }
    let cube = (2.0 * r).powi(n as i32);
    let p = hits as f64 / samples as f64;
    let mean = sum / hits as f64;
    let var = sum2 / hits as f64 - mean * mean;
    MonteCarlo {
        volume: cube * p,
        volume_sigma: cube * (p * (1.0 - p) / samples as f64).sqrt(),
        centroid: mean,
        centroid_sigma: (var / hits as f64).sqrt(),
    }
}

/// Sign changes of `f` on a uniform grid of `[lo, hi]`, zeros skipped.
pub fn brute_sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> usize {
    let mut prev = 0.0f64;
    let mut count = 0;
    for i in 0..=points {
        let v = f(lo + (hi - lo) * i as f64 / points as f64);
        if v == 0.0 {
            continue;
        }
        if prev != 0.0 && prev.signum() != v.signum() {
            count += 1;
        }
        prev = v;
    }
    count
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
