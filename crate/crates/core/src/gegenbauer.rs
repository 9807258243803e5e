//! Gegenbauer expansions `f(u) = sum_m c_m C_m^{(n-2)/2}(u)` of rotationally
//! invariant sphere functions.
//!
//! The polynomials `C_m^{(n-2)/2}(<xi, e_n>)` are the zonal spherical harmonics
//! of degree `m` on `S^{n-1}`; they are orthogonal for the weight
//! `(1 - u^2)^{(n-3)/2}`, which is the surface measure pushed forward to `u`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::profile::{Parity, SphereProfile};
use crate::quadrature::Quadrature;

/// Gegenbauer index `(n-2)/2` for the sphere `S^{n-1}`.
pub fn lambda_index(n: usize) -> f64 {
    (n as f64 - 2.0) / 2.0
}

/// `C_0^lam(u), ..., C_max^lam(u)` written into `out` by forward recurrence.
pub fn gegenbauer_all(max_degree: usize, lam: f64, u: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if max_degree == 0 {
        return;
    }
    out.push(2.0 * lam * u);
    for m in 1..max_degree {
        let mf = m as f64;
        let next = (2.0 * (mf + lam) * u * out[m] - (mf + 2.0 * lam - 1.0) * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
}

/// Single Gegenbauer polynomial `C_m^lam(u)`.
pub fn gegenbauer(m: usize, lam: f64, u: f64) -> f64 {
    let mut buf = Vec::with_capacity(m + 1);
    gegenbauer_all(m, lam, u, &mut buf);
    buf[m]
}

/// `h_m = int C_m^lam(u)^2 (1-u^2)^{lam - 1/2} du` for `m = 0..=max_degree`.
pub fn gegenbauer_norms(max_degree: usize, lam: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut h = Vec::with_capacity(max_degree + 1);
    let h0 = pi * 2f64.powf(1.0 - 2.0 * lam) * gamma(2.0 * lam) / (lam * gamma(lam).powi(2));
    h.push(h0);
    for m in 0..max_degree {
        let mf = m as f64;
        let ratio = (mf + 2.0 * lam) / (mf + 1.0) * (mf + lam) / (mf + 1.0 + lam);
        h.push(h[m] * ratio);
    }
    h
}

/// `C_m^lam(1) = (2 lam)_m / m!` for `m = 0..=max_degree`.
pub fn gegenbauer_at_one(max_degree: usize, lam: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(max_degree + 1);
    v.push(1.0);
    for m in 0..max_degree {
        let mf = m as f64;
        v.push(v[m] * (mf + 2.0 * lam) / (mf + 1.0));
    }
    v
}

/// Truncated Gegenbauer coefficient vector of a sphere function in dimension `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GegenbauerSpectrum {
    pub n: usize,
    pub parity: Parity,
    pub coeffs: Vec<f64>,
    /// Sup-norm share of the last 10% of terms relative to the largest term.
    #[serde(skip)]
    pub tail: f64,
    #[serde(skip)]
    pub truncation_warning: Option<String>,
}

impl GegenbauerSpectrum {
    /// Wraps raw coefficients; coefficients of the wrong parity are zeroed.
    pub fn new(n: usize, parity: Parity, mut coeffs: Vec<f64>) -> Self {
        for (m, c) in coeffs.iter_mut().enumerate() {
            if !parity.admits(m) {
                *c = 0.0;
            }
        }
        let tail = tail_share(&coeffs, lambda_index(n));
        GegenbauerSpectrum {
            n,
            parity,
            coeffs,
            tail,
            truncation_warning: None,
        }
    }

    pub fn lambda_index(&self) -> f64 {
        lambda_index(self.n)
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, u: f64) -> f64 {
        clenshaw(&self.coeffs, self.lambda_index(), u)
    }

    /// Coefficient-wise map `c_m -> factor(m) c_m`.
    pub fn map_coeffs(&self, factor: impl Fn(usize) -> f64) -> GegenbauerSpectrum {
        let coeffs = self.coeffs.iter().enumerate().map(|(m, c)| factor(m) * c).collect();
        let mut s = GegenbauerSpectrum::new(self.n, self.parity, coeffs);
        s.truncation_warning = self.truncation_warning.clone();
        s
    }

    /// Exact quotient by `u`: returns `(q, r)` with `u q(u) + r = f(u)`, `r = f(0)`.
    pub fn divide_by_u(&self) -> (GegenbauerSpectrum, f64) {
        let lam = self.lambda_index();
        let big_m = self.max_degree();
        if big_m == 0 {
            let q = GegenbauerSpectrum::new(self.n, flip(self.parity), vec![0.0]);
            return (q, self.coeffs[0]);
        }
        // u C_k = [(k+1) C_{k+1} + (k+2lam-1) C_{k-1}] / (2(k+lam)), solved top-down.
        let mut q = vec![0.0; big_m + 2];
        for j in (1..=big_m).rev() {
            let jf = j as f64;
            let upper = q[j + 1] * (jf + 2.0 * lam) / (2.0 * (jf + 1.0 + lam));
            q[j - 1] = (self.coeffs[j] - upper) * 2.0 * (jf - 1.0 + lam) / jf;
        }
        let remainder = self.coeffs[0] - q[1] * lam / (1.0 + lam);
        q.truncate(big_m);
        let mut quotient = GegenbauerSpectrum::new(self.n, flip(self.parity), q);
        quotient.truncation_warning = self.truncation_warning.clone();
        (quotient, remainder)
    }
}

fn flip(p: Parity) -> Parity {
    match p {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
        Parity::Mixed => Parity::Mixed,
    }
}

fn tail_share(coeffs: &[f64], lam: f64) -> f64 {
    if coeffs.len() < 10 {
        return 0.0;
    }
    let at_one = gegenbauer_at_one(coeffs.len() - 1, lam);
    let terms: Vec<f64> = coeffs.iter().zip(&at_one).map(|(c, a)| (c * a).abs()).collect();
    let peak = terms.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let start = (terms.len() as f64 * 0.9).floor() as usize;
    terms[start..].iter().cloned().fold(0.0, f64::max) / peak
}

/// `sum_m c_m C_m^lam(u)` by Clenshaw's backward recurrence.
pub fn clenshaw(coeffs: &[f64], lam: f64, u: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (0..coeffs.len()).rev() {
        let kf = k as f64;
        let a = 2.0 * (kf + lam) / (kf + 1.0);
        let bnext = (kf + 2.0 * lam) / (kf + 2.0);
        let b0 = coeffs[k] + a * u * b1 - bnext * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Evaluator with precomputed recurrence tables for a fixed spectrum and its derivative.
#[derive(Debug)]
pub struct SeriesEvaluator {
    spectrum: GegenbauerSpectrum,
    a: Vec<f64>,
    b: Vec<f64>,
    deriv_coeffs: Vec<f64>,
    da: Vec<f64>,
    db: Vec<f64>,
}

fn tables(len: usize, lam: f64) -> (Vec<f64>, Vec<f64>) {
    let a = (0..len).map(|k| 2.0 * (k as f64 + lam) / (k as f64 + 1.0)).collect();
    // b[k] multiplies b_{k+2} in the step for index k
    let b = (0..len)
        .map(|k| (k as f64 + 2.0 * lam) / (k as f64 + 2.0))
        .collect();
    (a, b)
}

fn clenshaw_tabled(coeffs: &[f64], a: &[f64], b: &[f64], u: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (0..coeffs.len()).rev() {
        let b0 = coeffs[k] + a[k] * u * b1 - b[k] * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

fn clenshaw_batch(coeffs: &[f64], a: &[f64], b: &[f64], us: &[f64], out: &mut [f64]) {
    assert_eq!(us.len(), out.len());
    let mut chunks = us.chunks_exact(4);
    let mut i = 0;
    for u in &mut chunks {
        let mut b1 = [0.0f64; 4];
        let mut b2 = [0.0f64; 4];
        for k in (0..coeffs.len()).rev() {
            let (c, ak, bk) = (coeffs[k], a[k], b[k]);
            for j in 0..4 {
                let b0 = c + ak * u[j] * b1[j] - bk * b2[j];
                b2[j] = b1[j];
                b1[j] = b0;
            }
        }
        out[i..i + 4].copy_from_slice(&b1);
        i += 4;
    }
    for &u in chunks.remainder() {
        out[i] = clenshaw_tabled(coeffs, a, b, u);
        i += 1;
    }
}

impl SeriesEvaluator {
    pub fn new(spectrum: GegenbauerSpectrum) -> Self {
        let lam = spectrum.lambda_index();
        let (a, b) = tables(spectrum.coeffs.len(), lam);
        // d/du C_m^lam = 2 lam C_{m-1}^{lam+1}
        let deriv_coeffs: Vec<f64> = spectrum
            .coeffs
            .iter()
            .skip(1)
            .map(|c| 2.0 * lam * c)
            .collect();
        let (da, db) = tables(deriv_coeffs.len(), lam + 1.0);
        SeriesEvaluator {
            spectrum,
            a,
            b,
            deriv_coeffs,
            da,
            db,
        }
    }

    pub fn spectrum(&self) -> &GegenbauerSpectrum {
        &self.spectrum
    }

    pub fn eval(&self, u: f64) -> f64 {
        clenshaw_tabled(&self.spectrum.coeffs, &self.a, &self.b, u)
    }

    pub fn eval_derivative(&self, u: f64) -> f64 {
        clenshaw_tabled(&self.deriv_coeffs, &self.da, &self.db, u)
    }

    /// Values at many points; four recurrences run side by side.
    pub fn eval_many(&self, us: &[f64], out: &mut [f64]) {
        clenshaw_batch(&self.spectrum.coeffs, &self.a, &self.b, us, out);
    }
}

/// Knobs for [`expand_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandOptions {
    /// Minimum number of quadrature nodes.
    pub quadrature_order: usize,
    /// Relative tail share above which a truncation warning is attached.
    pub tail_tolerance: f64,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            quadrature_order: 256,
            tail_tolerance: 1e-8,
        }
    }
}

/// Gegenbauer coefficients of `f` up to `max_degree` with default options.
pub fn expand(f: &SphereProfile, n: usize, max_degree: usize) -> Result<GegenbauerSpectrum> {
    expand_with(f, n, max_degree, &ExpandOptions::default())
}

pub fn expand_with(
    f: &SphereProfile,
    n: usize,
    max_degree: usize,
    opts: &ExpandOptions,
) -> Result<GegenbauerSpectrum> {
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "Gegenbauer expansion needs n >= 3".into(),
        });
    }
    if f.n() != n {
        return Err(Error::InvalidParameter(format!(
            "profile lives on S^{} but expansion requested for n = {n}",
            f.n() - 1
        )));
    }
    let lam = lambda_index(n);
    let parity = f.parity();
    let (nodes, weights) = match f.support_floor() {
        Some(floor) if floor > 0.0 && floor < 1.0 => cap_rule(n, floor, max_degree, opts)?,
        _ => {
            let order = opts.quadrature_order.max(2 * max_degree + 32);
            let q = Quadrature::gauss_jacobi(order, lam - 0.5)?;
            (q.nodes().to_vec(), q.weights().to_vec())
        }
    };

    let mut values = vec![0.0; nodes.len()];
    f.eval_many(&nodes, &mut values);
    let mut acc = vec![0.0; max_degree + 1];
    let mut mag = vec![0.0; max_degree + 1];
    let mut buf = Vec::with_capacity(max_degree + 1);
    for ((&u, &w), &v) in nodes.iter().zip(&weights).zip(&values) {
        let fw = v * w;
        if fw == 0.0 {
            continue;
        }
        gegenbauer_all(max_degree, lam, u, &mut buf);
        for ((a, m), c) in acc.iter_mut().zip(mag.iter_mut()).zip(&buf) {
            *a += fw * c;
            *m += (fw * c).abs();
        }
    }
    let norms = gegenbauer_norms(max_degree, lam);
    // coefficients indistinguishable from summation rounding are set to zero
    let coeffs = acc
        .iter()
        .zip(&mag)
        .zip(&norms)
        .map(|((a, m), h)| if a.abs() <= 16.0 * f64::EPSILON * m { 0.0 } else { a / h })
        .collect();
    let mut spectrum = GegenbauerSpectrum::new(n, parity, coeffs);
    if spectrum.tail > opts.tail_tolerance {
        spectrum.truncation_warning = Some(format!(
            "non-decaying tail: last 10% of terms carry {:.3e} of the peak (tolerance {:.1e}) at degree {max_degree}",
            spectrum.tail, opts.tail_tolerance
        ));
    }
    Ok(spectrum)
}

/// Gauss-Legendre in the polar angle over the two caps `|u| > floor`, with the
/// surface weight folded in.
fn cap_rule(
    n: usize,
    floor: f64,
    max_degree: usize,
    opts: &ExpandOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let theta0 = floor.acos();
    let order = opts
        .quadrature_order
        .max((max_degree as f64 * theta0 * 0.8).ceil() as usize + 256);
    cap_nodes(n, floor, order)
}

/// `order`-point rule per cap for `int_{|u| > floor} f(u) (1-u^2)^{(n-3)/2} du`.
pub(crate) fn cap_nodes(n: usize, floor: f64, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let theta0 = floor.acos();
    let (th, tw) = Quadrature::legendre_on(order, 0.0, theta0)?;
    let mut nodes = Vec::with_capacity(2 * order);
    let mut weights = Vec::with_capacity(2 * order);
    for (&t, &w) in th.iter().zip(&tw) {
        // du (1-u^2)^{(n-3)/2} = sin^{n-2}(theta) dtheta
        let wt = w * t.sin().powi(n as i32 - 2);
        nodes.push(t.cos());
        weights.push(wt);
        nodes.push(-t.cos());
        weights.push(wt);
    }
    Ok((nodes, weights))
}

/// Expands at `start` and doubles the degree until the tail share drops below
/// `opts.tail_tolerance` or `cap` is reached.
pub fn expand_adaptive(
    f: &SphereProfile,
    n: usize,
    start: usize,
    cap: usize,
    opts: &ExpandOptions,
) -> Result<GegenbauerSpectrum> {
    let mut degree = start.max(8);
    loop {
        let s = expand_with(f, n, degree, opts)?;
        if s.truncation_warning.is_none() || degree >= cap {
            return Ok(s);
        }
        degree = (degree * 2).min(cap);
    }
}

/// Evaluates a spectrum at `u`.
pub fn eval_spectrum(s: &GegenbauerSpectrum, u: f64) -> f64 {
    s.eval(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_expands_to_c0() {
        let f = SphereProfile::constant(5, 1.0);
        let s = expand(&f, 5, 20).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-14);
        assert!(s.coeffs[1..].iter().all(|c| c.abs() < 1e-14));
        assert!((s.eval(0.3) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn basis_element() {
        let f = SphereProfile::closed(5, Parity::Even, "C2", |u| gegenbauer(2, 1.5, u));
        let s = expand(&f, 5, 12).unwrap();
        for (m, c) in s.coeffs.iter().enumerate() {
            let expect = if m == 2 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-13, "m={m} c={c}");
        }
    }

    #[test]
    fn u_squared_two_terms() {
        // Oracle: solve a c0 + b C2(u) = u^2 at u = 0 and u = 1.
        let c2_at = |u: f64| gegenbauer(2, 1.5, u);
        let (u0, u1) = (0.0, 1.0);
        let det = c2_at(u1) - c2_at(u0);
        let b = (u1 * u1 - u0 * u0) / det;
        let a = u0 * u0 - b * c2_at(u0);

        let f = SphereProfile::closed(5, Parity::Even, "u^2", |u| u * u);
        let s = expand(&f, 5, 10).unwrap();
        assert!((s.coeffs[0] - a).abs() < 1e-14);
        assert!((s.coeffs[2] - b).abs() < 1e-14);
        let nonzero = s.coeffs.iter().filter(|c| c.abs() > 1e-13).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn norms_match_quadrature() {
        let lam = 2.0;
        let h = gegenbauer_norms(30, lam);
        let q = Quadrature::gauss_jacobi(64, lam - 0.5).unwrap();
        for m in [0, 1, 5, 17, 30] {
            let v = q.integrate(|u| gegenbauer(m, lam, u).powi(2));
            assert!(((v - h[m]) / h[m]).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let lam = 1.5;
        let coeffs: Vec<f64> = (0..40).map(|m| 1.0 / (1.0 + m as f64).powi(2)).collect();
        for &u in &[-1.0, -0.7, 0.0, 0.31, 1.0] {
            let mut buf = Vec::new();
            gegenbauer_all(39, lam, u, &mut buf);
            let direct: f64 = coeffs.iter().zip(&buf).map(|(c, p)| c * p).sum();
            let cl = clenshaw(&coeffs, lam, u);
            assert!((direct - cl).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn derivative_series() {
        let s = GegenbauerSpectrum::new(6, Parity::Mixed, vec![0.3, -0.2, 0.5, 0.1, 0.05]);
        let ev = SeriesEvaluator::new(s.clone());
        for &u in &[-0.9, -0.2, 0.4, 0.8] {
            let h = 1e-5;
            let fd = (s.eval(u + h) - s.eval(u - h)) / (2.0 * h);
            assert!((ev.eval_derivative(u) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn division_by_u() {
        // f = u^2 + 0.5 u^4 - 0.25 (even), f(0) = -0.25
        let f = SphereProfile::closed(7, Parity::Even, "poly", |u| u * u + 0.5 * u.powi(4) - 0.25);
        let s = expand(&f, 7, 8).unwrap();
        let (q, r) = s.divide_by_u();
        assert!((r + 0.25).abs() < 1e-14);
        assert_eq!(q.parity, Parity::Odd);
        for &u in &[-0.8f64, -0.1, 0.3, 0.9] {
            let expect = u + 0.5 * u.powi(3);
            assert!((q.eval(u) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn cap_supported_profile_uses_cap_rule() {
        let floor = 0.9;
        let f = SphereProfile::closed(5, Parity::Even, "cap poly", move |u: f64| {
            if u.abs() > floor {
                (u * u - floor * floor).powi(6)
            } else {
                0.0
            }
        });
        let dense = expand_with(
            &f,
            5,
            60,
            &ExpandOptions {
                quadrature_order: 4096,
                tail_tolerance: 1.0,
            },
        )
        .unwrap();
        let capped = expand_with(&f.clone().with_support_floor(floor), 5, 60, &ExpandOptions::default()).unwrap();
        for m in 0..=60 {
            let scale = dense.coeffs[0].abs();
            assert!((dense.coeffs[m] - capped.coeffs[m]).abs() < 1e-9 * scale, "m={m}");
        }
    }

    #[test]
    fn tail_warning_raised() {
        let f = SphereProfile::closed(5, Parity::Even, "|u|", |u: f64| u.abs());
        let s = expand(&f, 5, 40).unwrap();
        assert!(s.truncation_warning.is_some());
        let g = SphereProfile::closed(5, Parity::Even, "smooth", |u: f64| 1.0 / (2.0 + u * u));
        let s = expand(&g, 5, 60).unwrap();
        assert!(s.truncation_warning.is_none(), "tail {}", s.tail);
    }

    #[test]
    fn batch_matches_scalar() {
        let s = GegenbauerSpectrum::new(5, Parity::Mixed, (0..50).map(|m| (m as f64).cos() / (1.0 + m as f64)).collect());
        let ev = SeriesEvaluator::new(s);
        let us: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let mut out = vec![0.0; us.len()];
        ev.eval_many(&us, &mut out);
        for (u, v) in us.iter().zip(&out) {
            assert_eq!(*v, ev.eval(*u));
        }
    }

    #[test]
    fn json_shape() {
        let s = GegenbauerSpectrum::new(5, Parity::Even, vec![1.0, 0.0, 0.5]);
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["n"], 5);
        assert_eq!(v["parity"], "even");
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 3);
    }
}
