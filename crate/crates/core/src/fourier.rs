//! Fourier transforms of homogeneous functions on `R^n \ {0}` that are
//! rotationally invariant about the `x_n`-axis.
//!
//! Convention: `f^(x) = int f(y) e^{-i<x,y>} dy`, so that `f^^ = (2 pi)^n f` for even `f`.
//! A degree `-p` function `|x|^{-p} F(x/|x|)` with zonal harmonic component of degree `m`
//! transforms into a degree `-(n-p)` function, with that component scaled by the
//! Bochner multiplier `mu(m, p, n)`.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::gegenbauer::{self, cap_nodes, ExpandOptions, GegenbauerSpectrum};
use crate::profile::{Parity, SphereProfile};
use crate::quadrature::Quadrature;

/// Surface area `|S^d|` of the unit sphere in `R^{d+1}`.
pub fn sphere_area(d: usize) -> f64 {
    let k = (d + 1) as f64 / 2.0;
    2.0 * PI.powf(k) / gamma(k)
}

/// `c_n = 2^{n-1} pi^{(n-1)/2} Gamma((n-1)/2)`, the transform of `|x|^{-1}` on the sphere.
pub fn euclidean_constant(n: usize) -> f64 {
    let nf = n as f64;
    2f64.powf(nf - 1.0) * PI.powf((nf - 1.0) / 2.0) * gamma((nf - 1.0) / 2.0)
}

fn check_degree(p: f64, n: usize) -> Result<()> {
    if !(p > 0.0 && p < n as f64) {
        return Err(Error::Domain(format!(
            "homogeneity degree -{p} outside the range 0 < p < n = {n}"
        )));
    }
    Ok(())
}

/// Bochner multiplier `mu(m, p, n)`.
///
/// For even `m` this is `(-1)^{m/2} pi^{n/2} 2^{n-p} Gamma((n-p+m)/2) / Gamma((p+m)/2)`.
/// For odd `m` the true factor is `-i` times the value returned here, whose sign is
/// `(-1)^{(m-1)/2}`; odd profiles therefore transform into `i` times a real odd profile
/// and only the real part is carried.
pub fn bochner_multiplier(m: usize, p: f64, n: usize) -> Result<f64> {
    check_degree(p, n)?;
    let nf = n as f64;
    let mf = m as f64;
    let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let ratio = if m < 100 {
        gamma((nf - p + mf) / 2.0) / gamma((p + mf) / 2.0)
    } else {
        (ln_gamma((nf - p + mf) / 2.0) - ln_gamma((p + mf) / 2.0)).exp()
    };
    Ok(sign * PI.powf(nf / 2.0) * 2f64.powf(nf - p) * ratio)
}

/// `mu(0..=max_m, p, n)` by the two-step recurrence `mu(m+2) = -mu(m) (n-p+m)/(p+m)`.
pub fn bochner_multipliers(max_m: usize, p: f64, n: usize) -> Result<Vec<f64>> {
    check_degree(p, n)?;
    let nf = n as f64;
    let mut mu = Vec::with_capacity(max_m + 1);
    mu.push(bochner_multiplier(0, p, n)?);
    if max_m >= 1 {
        mu.push(bochner_multiplier(1, p, n)?);
    }
    for m in 2..=max_m {
        let k = (m - 2) as f64;
        let next = -mu[m - 2] * (nf - p + k) / (p + k);
        mu.push(next);
    }
    Ok(mu)
}

/// A function on `R^n \ {0}`, homogeneous of degree `-p`, given by its restriction to the sphere.
#[derive(Debug, Clone)]
pub struct HomogeneousFunction {
    pub profile: SphereProfile,
    pub degree_p: f64,
    transform: Option<SphereProfile>,
}

impl HomogeneousFunction {
    pub fn new(profile: SphereProfile, degree_p: f64) -> Result<Self> {
        check_degree(degree_p, profile.n())?;
        Ok(HomogeneousFunction {
            profile,
            degree_p,
            transform: None,
        })
    }

    /// Attaches a known transform (restricted to the sphere).
    pub fn with_transform(mut self, transform: SphereProfile) -> Self {
        self.transform = Some(transform);
        self
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn attached_transform(&self) -> Option<&SphereProfile> {
        self.transform.as_ref()
    }

    /// The attached transform if present, otherwise the spectral one at `max_degree`.
    pub fn transform_profile(&self, max_degree: usize) -> Result<SphereProfile> {
        match &self.transform {
            Some(t) => Ok(t.clone()),
            None => Ok(ft_homogeneous(self, max_degree)?.profile),
        }
    }
}

/// Applies the multipliers of degree `-p` to a spectrum.
pub fn ft_spectrum(s: &GegenbauerSpectrum, p: f64) -> Result<GegenbauerSpectrum> {
    let mu = bochner_multipliers(s.max_degree(), p, s.n)?;
    Ok(s.map_coeffs(|m| mu[m]))
}

/// Spectral transform with default expansion options.
pub fn ft_homogeneous(f: &HomogeneousFunction, max_degree: usize) -> Result<HomogeneousFunction> {
    ft_homogeneous_with(f, max_degree, &ExpandOptions::default())
}

/// Spectral transform; a profile that already is a series is used as is (truncated to `max_degree`).
pub fn ft_homogeneous_with(
    f: &HomogeneousFunction,
    max_degree: usize,
    opts: &ExpandOptions,
) -> Result<HomogeneousFunction> {
    let n = f.n();
    let spectrum = match f.profile.spectrum() {
        Some(s) if s.max_degree() <= max_degree => s.clone(),
        Some(s) => {
            let mut t = GegenbauerSpectrum::new(n, s.parity, s.coeffs[..=max_degree].to_vec());
            t.truncation_warning = s.truncation_warning.clone();
            t
        }
        None => gegenbauer::expand_with(&f.profile, n, max_degree, opts)?,
    };
    let transformed = ft_spectrum(&spectrum, f.degree_p)?;
    let note = format!("FT[{}]", f.profile.note());
    HomogeneousFunction::new(
        SphereProfile::from_spectrum(transformed, note),
        n as f64 - f.degree_p,
    )
}

/// Gauss-Jacobi order that integrates a profile of this series degree (times a smooth factor).
fn default_order(f: &SphereProfile) -> usize {
    256.max(f.series_degree() + 64)
}

/// `int_{S^{n-1}} f(<x, e_n>) dx`.
pub fn sphere_integral(f: &SphereProfile, n: usize) -> Result<f64> {
    sphere_integral_with(f, n, default_order(f))
}

pub fn sphere_integral_with(f: &SphereProfile, n: usize, order: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "sphere reduction needs n >= 3".into(),
        });
    }
    let area = sphere_area(n - 2);
    if let Some(floor) = f.support_floor().filter(|&x| x > 0.0 && x < 1.0) {
        let (nodes, weights) = cap_nodes(n, floor, order)?;
        let mut vals = vec![0.0; nodes.len()];
        f.eval_many(&nodes, &mut vals);
        return Ok(area * vals.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>());
    }
    let q = Quadrature::gauss_jacobi(order, (n as f64 - 3.0) / 2.0)?;
    Ok(area * weighted_sum(f, &q))
}

fn weighted_sum(f: &SphereProfile, q: &Quadrature) -> f64 {
    let mut vals = vec![0.0; q.order()];
    f.eval_many(q.nodes(), &mut vals);
    vals.iter().zip(q.weights()).map(|(v, w)| v * w).sum()
}

/// Reusable rule for subsphere integrals `int_{S^{n-1} cap xi^perp} f`.
#[derive(Debug, Clone)]
pub struct RadonIntegrator {
    n: usize,
    quad: Quadrature,
    area: f64,
}

impl RadonIntegrator {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if n < 5 {
            return Err(Error::UnsupportedDimension {
                n,
                reason: "the subsphere reduction is implemented for n >= 5 only".into(),
            });
        }
        Ok(RadonIntegrator {
            n,
            quad: Quadrature::gauss_jacobi(order, (n as f64 - 4.0) / 2.0)?,
            area: sphere_area(n - 3),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.quad.order()
    }

    /// The points `u = t sqrt(1 - u_xi^2)` at which integrands are sampled.
    pub fn sample_points(&self, u_xi: f64) -> Vec<f64> {
        let s = (1.0 - u_xi * u_xi).max(0.0).sqrt();
        self.quad.nodes().iter().map(|t| t * s).collect()
    }

    /// Integrates values given at [`Self::sample_points`].
    pub fn integrate_samples(&self, values: &[f64]) -> f64 {
        self.area * values.iter().zip(self.quad.weights()).map(|(v, w)| v * w).sum::<f64>()
    }

    pub fn integrate(&self, f: &SphereProfile, u_xi: f64) -> f64 {
        let pts = self.sample_points(u_xi);
        let mut vals = vec![0.0; pts.len()];
        f.eval_many(&pts, &mut vals);
        self.integrate_samples(&vals)
    }
}

fn check_u(u: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} outside [-1, 1]")));
    }
    Ok(())
}

/// `int_{S^{n-1} cap xi^perp} f` where `<xi, e_n> = u_xi`.
pub fn radon_subsphere(f: &SphereProfile, n: usize, u_xi: f64) -> Result<f64> {
    check_u(u_xi)?;
    let r = RadonIntegrator::new(n, 128.max(f.series_degree() / 2 + 64))?;
    Ok(r.integrate(f, u_xi))
}

/// `f^(xi) = pi int_{S^{n-1} cap xi^perp} f` for even `f` of degree `-(n-1)`.
pub fn ft_via_radon(f: &HomogeneousFunction, u_xi: f64) -> Result<f64> {
    let n = f.n();
    if (f.degree_p - (n as f64 - 1.0)).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "the subsphere formula needs degree -(n-1) = -{}, got -{}",
            n - 1,
            f.degree_p
        )));
    }
    if f.profile.parity() == Parity::Odd {
        return Ok(0.0);
    }
    Ok(PI * radon_subsphere(&f.profile, n, u_xi)?)
}

/// Both sides of a spherical Parseval identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl ParsevalReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        ParsevalReport {
            lhs,
            rhs,
            residual: (lhs - rhs).abs() / scale,
        }
    }
}

fn require_even(f: &HomogeneousFunction) -> Result<()> {
    if f.profile.parity() != Parity::Even {
        return Err(Error::Domain(format!(
            "Parseval identity needs even functions, `{}` is {:?}",
            f.profile.note(),
            f.profile.parity()
        )));
    }
    Ok(())
}

/// For even `f`, `g` of complementary degrees `-p` and `-(n-p)`:
/// `int f^ g^ = (2 pi)^n int f g` over `S^{n-1}`. Returns the relative residual.
///
/// Transforms are the attached ones when present, otherwise spectral at `max_degree`.
pub fn parseval_residual(
    f: &HomogeneousFunction,
    g: &HomogeneousFunction,
    max_degree: usize,
) -> Result<ParsevalReport> {
    let n = f.n();
    require_even(f)?;
    require_even(g)?;
    if g.n() != n || (f.degree_p + g.degree_p - n as f64).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "degrees -{} and -{} are not complementary in R^{n}",
            f.degree_p, g.degree_p
        )));
    }
    let fh = f.transform_profile(max_degree)?;
    let gh = g.transform_profile(max_degree)?;
    let order = 256.max(max_degree + 64);
    let lhs = sphere_integral_with(&fh.product(&gh), n, order)?;
    let rhs = (2.0 * PI).powi(n as i32) * sphere_integral_with(&f.profile.product(&g.profile), n, order)?;
    Ok(ParsevalReport::new(lhs, rhs))
}

/// For even `f`, `g` of the same degree `-p`: `int f^ g = int f g^`.
pub fn parseval_same_degree_residual(
    f: &HomogeneousFunction,
    g: &HomogeneousFunction,
    max_degree: usize,
) -> Result<ParsevalReport> {
    let n = f.n();
    require_even(f)?;
    require_even(g)?;
    if g.n() != n || (f.degree_p - g.degree_p).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "degrees -{} and -{} differ",
            f.degree_p, g.degree_p
        )));
    }
    let fh = f.transform_profile(max_degree)?;
    let gh = g.transform_profile(max_degree)?;
    let order = 256.max(max_degree + 64);
    let lhs = sphere_integral_with(&fh.product(&g.profile), n, order)?;
    let rhs = sphere_integral_with(&f.profile.product(&gh), n, order)?;
    Ok(ParsevalReport::new(lhs, rhs))
}

/// Profile `u -> (1 - u^2 + b^2 u^2)^{-e/2}`: the restriction of `|T x|^{-e}` with
/// `T = diag(1, ..., 1, b)`.
pub fn diagonal_norm_power(n: usize, b: f64, e: f64) -> SphereProfile {
    let b2 = b * b;
    SphereProfile::closed(n, Parity::Even, format!("|diag(1,..,{b})x|^-{e}"), move |u: f64| {
        (1.0 - u * u + b2 * u * u).powf(-e / 2.0)
    })
    .with_derivative(move |u: f64| {
        let q = 1.0 - u * u + b2 * u * u;
        -e * (b2 - 1.0) * u * q.powf(-e / 2.0 - 1.0)
    })
}

/// The degree `-1` function `|T x|^{-1}`, `T = diag(1, ..., 1, 1/b)`, with its exact transform
/// `c_n b |T^{-t} y|^{-(n-1)}` attached.
pub fn linear_image_of_norm(n: usize, b: f64) -> Result<HomogeneousFunction> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("axis ratio must be positive, got {b}")));
    }
    let f = diagonal_norm_power(n, 1.0 / b, 1.0);
    let cn = euclidean_constant(n);
    let t = diagonal_norm_power(n, b, n as f64 - 1.0);
    let transform = SphereProfile::combination(n, format!("c_n {b} |..|^-(n-1)"), vec![(cn * b, t)]);
    Ok(HomogeneousFunction::new(f, 1.0)?.with_transform(transform))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn areas() {
        assert!(rel(sphere_area(4), 8.0 * PI * PI / 3.0) < 1e-14);
        assert!(rel(sphere_area(3), 2.0 * PI * PI) < 1e-14);
        assert!(rel(sphere_area(2), 4.0 * PI) < 1e-14);
    }

    #[test]
    fn multiplier_anchors() {
        let c5 = bochner_multiplier(0, 1.0, 5).unwrap();
        assert!(rel(c5, 16.0 * PI * PI) < 1e-13);
        assert!(rel(bochner_multiplier(0, 4.0, 5).unwrap(), 2.0 * PI.powi(3)) < 1e-13);
        let prod = bochner_multiplier(2, 1.0, 5).unwrap() * bochner_multiplier(2, 4.0, 5).unwrap();
        assert!(rel(prod, (2.0 * PI).powi(5)) < 1e-13);
        assert!(bochner_multiplier(0, 5.0, 5).is_err());
        assert!(bochner_multiplier(0, 0.0, 5).is_err());
    }

    #[test]
    fn recurrence_matches_direct() {
        let mu = bochner_multipliers(150, 1.0, 6).unwrap();
        for m in [0, 1, 2, 7, 40, 99, 100, 150] {
            assert!(rel(mu[m], bochner_multiplier(m, 1.0, 6).unwrap()) < 1e-11, "m={m}");
        }
    }

    #[test]
    fn sphere_integrals() {
        let one = SphereProfile::constant(5, 1.0);
        assert!(rel(sphere_integral(&one, 5).unwrap(), 8.0 * PI * PI / 3.0) < 1e-13);
        let u = SphereProfile::closed(5, Parity::Odd, "u", |u| u);
        assert!(sphere_integral(&u, 5).unwrap().abs() < 1e-14);
        let u2 = SphereProfile::closed(5, Parity::Even, "u^2", |u| u * u);
        assert!(rel(sphere_integral(&u2, 5).unwrap(), 8.0 * PI * PI / 15.0) < 1e-13);
    }

    #[test]
    fn radon_constant_and_dimension_guard() {
        let one = SphereProfile::constant(5, 1.0);
        for u in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert!(rel(radon_subsphere(&one, 5, u).unwrap(), 2.0 * PI * PI) < 1e-13);
        }
        let one4 = SphereProfile::constant(4, 1.0);
        assert!(matches!(
            radon_subsphere(&one4, 4, 0.0),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn constant_degree_n_minus_1() {
        let f = HomogeneousFunction::new(SphereProfile::constant(5, 1.0), 4.0).unwrap();
        let v = ft_via_radon(&f, 0.37).unwrap();
        assert!(rel(v, 2.0 * PI.powi(3)) < 1e-12);
        assert!(rel(v, bochner_multiplier(0, 4.0, 5).unwrap()) < 1e-12);
        let g = HomogeneousFunction::new(SphereProfile::constant(5, 1.0), 1.0).unwrap();
        assert!(ft_via_radon(&g, 0.0).is_err());
    }

    #[test]
    fn euclidean_norm_transform() {
        let f = HomogeneousFunction::new(SphereProfile::constant(5, 1.0), 1.0).unwrap();
        let t = ft_homogeneous(&f, 10).unwrap();
        assert_eq!(t.degree_p, 4.0);
        assert!(rel(t.profile.eval(0.2), 16.0 * PI * PI) < 1e-13);
    }

    #[test]
    fn lintran_closed_form() {
        for b in [0.3, 0.5, 2.0] {
            let f = linear_image_of_norm(5, b).unwrap();
            let t = ft_homogeneous(&HomogeneousFunction::new(f.profile.clone(), 1.0).unwrap(), 160).unwrap();
            let exact = f.attached_transform().unwrap();
            for i in 0..=40 {
                let u = -1.0 + i as f64 / 20.0;
                assert!(rel(t.profile.eval(u), exact.eval(u)) < 1e-7, "b={b} u={u}");
            }
        }
    }

    #[test]
    fn parseval_radial_pair() {
        let f = HomogeneousFunction::new(SphereProfile::constant(5, 1.0), 1.0).unwrap();
        let g = HomogeneousFunction::new(SphereProfile::constant(5, 1.0), 4.0).unwrap();
        let r = parseval_residual(&f, &g, 10).unwrap();
        assert!(r.residual < 1e-12, "{r:?}");
        assert!(parseval_residual(&f, &f, 10).is_err());
        let s = parseval_same_degree_residual(&f, &f, 10).unwrap();
        assert!(s.residual < 1e-12);
    }
}
