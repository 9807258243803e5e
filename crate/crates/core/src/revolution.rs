//! Star bodies of revolution about the `x_n`-axis, described by the radial
//! function `rho(u)`, `u = <xi, e_n>`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, euclidean_constant, sphere_area, HomogeneousFunction, RadonIntegrator};
use crate::gegenbauer::{self, ExpandOptions};
use crate::profile::{Parity, SphereProfile};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodyKind {
    ClosedFormM { a: f64 },
    PerturbedK { a: f64, lambda: f64, eps: f64 },
    Custom { label: String },
}

#[derive(Debug, Clone)]
pub struct RevolutionBody {
    pub n: usize,
    pub rho: SphereProfile,
    pub kind: BodyKind,
    /// Exact transform of the degree `-1` extension of `rho`, when known.
    pub rho_transform: Option<SphereProfile>,
    /// `rho^n` in a form whose even parts are known exactly, when available.
    pub rho_power: Option<SphereProfile>,
}

const POSITIVITY_SAMPLES: usize = 2001;

impl RevolutionBody {
    /// Checks positivity of `rho` on a uniform `u` grid.
    pub fn new(n: usize, rho: SphereProfile, kind: BodyKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedDimension {
                n,
                reason: "bodies need n >= 2".into(),
            });
        }
        let us: Vec<f64> = (0..POSITIVITY_SAMPLES)
            .map(|i| -1.0 + 2.0 * i as f64 / (POSITIVITY_SAMPLES - 1) as f64)
            .collect();
        let mut vals = vec![0.0; us.len()];
        rho.eval_many(&us, &mut vals);
        if let Some((u, v)) = us.iter().zip(&vals).find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "radial function not positive: rho({u}) = {v}"
            )));
        }
        Ok(RevolutionBody {
            n,
            rho,
            kind,
            rho_transform: None,
            rho_power: None,
        })
    }

    pub fn with_transform(mut self, t: SphereProfile) -> Self {
        self.rho_transform = Some(t);
        self
    }

    /// Attaches `rho^n`; section moments then use its odd part.
    pub fn with_power(mut self, p: SphereProfile) -> Self {
        self.rho_power = Some(p);
        self
    }

    pub fn ball(n: usize, r: f64) -> Result<Self> {
        let rho = SphereProfile::constant(n, r);
        let body = RevolutionBody::new(n, rho, BodyKind::Custom { label: format!("ball r={r}") })?;
        Ok(body.with_transform(SphereProfile::constant(n, r * euclidean_constant(n))))
    }

    pub fn unit_ball(n: usize) -> Result<Self> {
        RevolutionBody::ball(n, 1.0)
    }

    /// Ellipsoid with semi-axis `b` along `e_n` and 1 across.
    pub fn ellipsoid(n: usize, b: f64) -> Result<Self> {
        let f = fourier::linear_image_of_norm(n, b)?;
        let t = f.attached_transform().cloned();
        let mut body = RevolutionBody::new(n, f.profile, BodyKind::Custom { label: format!("ellipsoid b={b}") })?;
        body.rho_transform = t;
        Ok(body)
    }

    /// Unit ball centred at `c e_n`, `|c| < 1`, seen from the origin.
    pub fn shifted_ball(n: usize, c: f64) -> Result<Self> {
        if c.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!("origin must be interior, |c| = {}", c.abs())));
        }
        let rho = SphereProfile::closed(n, Parity::Mixed, format!("ball at {c} e_n"), move |u: f64| {
            c * u + (1.0 - c * c * (1.0 - u * u)).sqrt()
        });
        RevolutionBody::new(n, rho, BodyKind::Custom { label: format!("shifted ball c={c}") })
    }

    /// Body with `rho(-u)`.
    pub fn reflected(&self) -> Result<Self> {
        let kind = BodyKind::Custom { label: "reflected".into() };
        RevolutionBody::new(self.n, self.rho.reflected(), kind)
    }

    /// `rho` as a degree `-1` homogeneous function, with any known transform attached.
    pub fn as_homogeneous(&self) -> Result<HomogeneousFunction> {
        let f = HomogeneousFunction::new(self.rho.clone(), 1.0)?;
        Ok(match &self.rho_transform {
            Some(t) => f.with_transform(t.clone()),
            None => f,
        })
    }

    pub fn is_origin_symmetric(&self) -> bool {
        self.rho.parity() == Parity::Even
    }
}

/// `rho_M(u) = 1 - 2 a^{n-2} (1 - u^2 + u^2/a^2)^{-1/2}`.
pub fn rho_m(n: usize, a: f64, u: f64) -> f64 {
    let an2 = a.powi(n as i32 - 2);
    1.0 - 2.0 * an2 / (1.0 - u * u + u * u / (a * a)).sqrt()
}

/// Transform of the degree `-1` extension of `rho_M`:
/// `c_n (1 - 2 a^{n-1} (1 - u^2 + a^2 u^2)^{-(n-1)/2})`.
pub fn rho_m_transform(n: usize, a: f64, u: f64) -> f64 {
    let e = (n as f64 - 1.0) / 2.0;
    euclidean_constant(n) * (1.0 - 2.0 * a.powi(n as i32 - 1) * (1.0 - u * u + a * a * u * u).powf(-e))
}

/// The origin-symmetric body `M` with `||x||_M^{-1} = |x|^{-1} - 2 a^{n-2} |T x|^{-1}`,
/// `T = diag(1, ..., 1, 1/a)`.
pub fn make_body_m(n: usize, a: f64) -> Result<RevolutionBody> {
    if n < 5 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "a non-intersection body of this kind needs n >= 5".into(),
        });
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("a must lie in (0, 1), got {a}")));
    }
    // minimum of rho_M is at the equator
    if 2.0 * a.powi(n as i32 - 2) >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "a = {a} makes the radial function non-positive at the equator"
        )));
    }
    let an2 = a.powi(n as i32 - 2);
    let k = 1.0 / (a * a) - 1.0;
    let rho = SphereProfile::closed(n, Parity::Even, format!("rho_M a={a}"), move |u: f64| rho_m(n, a, u))
        .with_derivative(move |u: f64| {
            let q = 1.0 + k * u * u;
            2.0 * an2 * k * u * q.powf(-1.5)
        });
    let t = SphereProfile::closed(n, Parity::Even, format!("FT rho_M a={a}"), move |u: f64| {
        rho_m_transform(n, a, u)
    });
    Ok(RevolutionBody::new(n, rho, BodyKind::ClosedFormM { a })?.with_transform(t))
}

/// Settings for [`curvature_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureOptions {
    /// Evaluation points in `theta` on `[0, pi]`.
    pub grid: usize,
    pub margin: f64,
    /// Cosine-series length; `None` picks it from the profile.
    pub nodes: Option<usize>,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        CurvatureOptions {
            grid: 4001,
            margin: 1e-6,
            nodes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub kappa_min: f64,
    pub argmin_theta: f64,
    pub is_convex: bool,
    pub margin: f64,
    pub low_confidence: bool,
    /// Share of the cosine-series tail relative to its largest coefficient.
    pub series_tail: f64,
}

/// Even cosine series `rho(theta) = sum_k b_k cos(k theta)`, `u = cos theta`.
#[derive(Debug, Clone)]
pub struct MeridianSeries {
    coeffs: Vec<f64>,
}

impl MeridianSeries {
    /// DCT-I of `rho(cos theta)` sampled at `theta_j = j pi / len`.
    pub fn fit(rho: &SphereProfile, len: usize) -> Self {
        let nn = len.max(8);
        let us: Vec<f64> = (0..=nn).map(|j| (j as f64 * PI / nn as f64).cos()).collect();
        let mut f = vec![0.0; nn + 1];
        rho.eval_many(&us, &mut f);
        let table: Vec<f64> = (0..2 * nn).map(|j| (j as f64 * PI / nn as f64).cos()).collect();
        let mut coeffs = vec![0.0; nn + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.5 * (f[0] + if k % 2 == 0 { f[nn] } else { -f[nn] });
            let mut idx = 0usize;
            for fj in &f[1..nn] {
                idx = (idx + k) % (2 * nn);
                s += fj * table[idx];
            }
            let w = if k == 0 || k == nn { 1.0 } else { 2.0 };
            *c = w * s / nn as f64;
        }
        // drop rounding-level coefficients, which the derivatives would amplify by k^2
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for c in coeffs.iter_mut() {
            if c.abs() <= 32.0 * f64::EPSILON * scale {
                *c = 0.0;
            }
        }
        MeridianSeries { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(rho, rho', rho'')` in `theta`.
    pub fn eval3(&self, theta: f64) -> (f64, f64, f64) {
        let (c1, s1) = (theta.cos(), theta.sin());
        let (mut ck, mut sk) = (1.0, 0.0);
        let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
        for (k, b) in self.coeffs.iter().enumerate() {
            let kf = k as f64;
            r0 += b * ck;
            r1 -= kf * b * sk;
            r2 -= kf * kf * b * ck;
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
        }
        (r0, r1, r2)
    }

    fn tail(&self) -> f64 {
        let peak = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let start = self.coeffs.len() * 9 / 10;
        let tail = self.coeffs[start..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }
}

/// Curvature of the meridian curve `theta -> rho(theta) (sin theta, cos theta)`.
pub fn meridian_curvature(r: f64, dr: f64, ddr: f64) -> f64 {
    (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
}

pub fn curvature(body: &RevolutionBody) -> ConvexityReport {
    curvature_with(body, &CurvatureOptions::default())
}

pub fn curvature_with(body: &RevolutionBody, opts: &CurvatureOptions) -> ConvexityReport {
    let len = opts
        .nodes
        .unwrap_or_else(|| 1024.max(2 * body.rho.series_degree() + 256));
    let series = MeridianSeries::fit(&body.rho, len);
    let mut kappa_min = f64::INFINITY;
    let mut argmin = 0.0;
    let grid = opts.grid.max(2);
    for i in 0..grid {
        let theta = PI * i as f64 / (grid - 1) as f64;
        let (r, dr, ddr) = series.eval3(theta);
        let k = meridian_curvature(r, dr, ddr);
        if k < kappa_min {
            kappa_min = k;
            argmin = theta;
        }
    }
    let series_tail = series.tail();
    ConvexityReport {
        kappa_min,
        argmin_theta: argmin,
        is_convex: kappa_min > opts.margin,
        margin: opts.margin,
        low_confidence: series_tail > 1e-9,
        series_tail,
    }
}

/// Zeroth and first axial moments of a hyperplane section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionMoments {
    pub u_xi: f64,
    /// `|K cap xi^perp|`
    pub volume: f64,
    /// `int_{K cap xi^perp} x_n dx`
    pub moment: f64,
    pub centroid: f64,
}

/// Cached rules for volume, centroid and section integrals of bodies in a fixed dimension.
#[derive(Debug, Clone)]
pub struct BodyIntegrator {
    n: usize,
    sphere: Quadrature,
    radon: RadonIntegrator,
}

impl BodyIntegrator {
    /// `sphere_order` nodes on `S^{n-1}`, `radon_order` nodes on the subspheres.
    pub fn new(n: usize, sphere_order: usize, radon_order: usize) -> Result<Self> {
        Ok(BodyIntegrator {
            n,
            sphere: Quadrature::gauss_jacobi(sphere_order, (n as f64 - 3.0) / 2.0)?,
            radon: RadonIntegrator::new(n, radon_order)?,
        })
    }

    /// Orders sized for the polynomial content of `body`.
    pub fn for_body(body: &RevolutionBody, min_order: usize) -> Result<Self> {
        let d = body.rho.series_degree();
        BodyIntegrator::new(body.n, min_order.max(d + 64), (min_order / 2).max(d / 2 + 64))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sphere_order(&self) -> usize {
        self.sphere.order()
    }

    pub fn radon_order(&self) -> usize {
        self.radon.order()
    }

    fn check(&self, body: &RevolutionBody) -> Result<()> {
        if body.n != self.n {
            return Err(Error::InvalidParameter(format!(
                "integrator built for n = {}, body has n = {}",
                self.n, body.n
            )));
        }
        Ok(())
    }

    fn rho_at_nodes(&self, body: &RevolutionBody) -> Vec<f64> {
        let mut v = vec![0.0; self.sphere.order()];
        body.rho.eval_many(self.sphere.nodes(), &mut v);
        v
    }

    /// `(1/n) int rho^n`.
    pub fn volume(&self, body: &RevolutionBody) -> Result<f64> {
        self.check(body)?;
        let r = self.rho_at_nodes(body);
        let nn = self.n as i32;
        let s: f64 = r.iter().zip(self.sphere.weights()).map(|(r, w)| w * r.powi(nn)).sum();
        Ok(sphere_area(self.n - 2) * s / self.n as f64)
    }

    /// `int_K x_n dx = (1/(n+1)) int u rho^{n+1}`.
    pub fn axial_moment(&self, body: &RevolutionBody) -> Result<f64> {
        self.check(body)?;
        let r = self.rho_at_nodes(body);
        let nn = self.n as i32;
        let s: f64 = r
            .iter()
            .zip(self.sphere.nodes())
            .zip(self.sphere.weights())
            .map(|((r, u), w)| w * u * r.powi(nn + 1))
            .sum();
        Ok(sphere_area(self.n - 2) * s / (self.n as f64 + 1.0))
    }

    /// `<c(K), e_n>`; the other coordinates vanish by symmetry.
    pub fn centroid_axis(&self, body: &RevolutionBody) -> Result<f64> {
        Ok(self.axial_moment(body)? / self.volume(body)?)
    }

    pub fn section(&self, body: &RevolutionBody, u_xi: f64) -> Result<SectionMoments> {
        self.check(body)?;
        if !(-1.0..=1.0).contains(&u_xi) {
            return Err(Error::Domain(format!("u_xi = {u_xi} outside [-1, 1]")));
        }
        let pts = self.radon.sample_points(u_xi);
        let mut r = vec![0.0; pts.len()];
        body.rho.eval_many(&pts, &mut r);
        // the sample points are the x_n coordinates of points of the subsphere
        let nn = self.n as i32;
        let vol_vals: Vec<f64> = r.iter().map(|r| r.powi(nn - 1)).collect();
        // x_n times the even part of rho^n integrates to zero over the subsphere
        let mom_vals: Vec<f64> = match &body.rho_power {
            Some(p) => {
                let mut odd = vec![0.0; pts.len()];
                p.odd_part_many(&pts, &mut odd);
                odd.iter().zip(&pts).map(|(o, x)| x * o).collect()
            }
            None => r.iter().zip(&pts).map(|(r, x)| x * r.powi(nn)).collect(),
        };
        let volume = self.radon.integrate_samples(&vol_vals) / (self.n as f64 - 1.0);
        let moment = self.radon.integrate_samples(&mom_vals) / self.n as f64;
        Ok(SectionMoments {
            u_xi,
            volume,
            moment,
            centroid: moment / volume,
        })
    }

    pub fn section_centroid_axis(&self, body: &RevolutionBody, u_xi: f64) -> Result<f64> {
        Ok(self.section(body, u_xi)?.centroid)
    }
}

fn integrator(body: &RevolutionBody) -> Result<BodyIntegrator> {
    BodyIntegrator::for_body(body, 256)
}

pub fn volume(body: &RevolutionBody) -> Result<f64> {
    integrator(body)?.volume(body)
}

pub fn centroid_axis(body: &RevolutionBody) -> Result<f64> {
    integrator(body)?.centroid_axis(body)
}

pub fn section_centroid_axis(body: &RevolutionBody, u_xi: f64) -> Result<f64> {
    integrator(body)?.section_centroid_axis(body, u_xi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub min_value: f64,
    pub argmin_u: f64,
    pub is_intersection: bool,
    pub tolerance: f64,
    pub degree: usize,
    pub truncation_warning: Option<String>,
}

/// Settings for [`intersection_body_test_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionOptions {
    pub max_degree: usize,
    pub degree_cap: usize,
    pub grid: usize,
    pub tolerance: f64,
}

impl Default for IntersectionOptions {
    fn default() -> Self {
        IntersectionOptions {
            max_degree: 120,
            degree_cap: 1024,
            grid: 2001,
            tolerance: 1e-9,
        }
    }
}

pub fn intersection_body_test(body: &RevolutionBody) -> Result<IntersectionReport> {
    intersection_body_test_with(body, &IntersectionOptions::default())
}

/// Minimum of the spectral transform of `rho` (degree `-1`) on a uniform `u` grid.
/// `tolerance` is relative to `c_n`.
pub fn intersection_body_test_with(body: &RevolutionBody, opts: &IntersectionOptions) -> Result<IntersectionReport> {
    if !body.is_origin_symmetric() {
        return Err(Error::Domain("the intersection-body test applies to origin-symmetric bodies".into()));
    }
    let eopts = ExpandOptions {
        tail_tolerance: 1e-14,
        ..ExpandOptions::default()
    };
    let spectrum = gegenbauer::expand_adaptive(&body.rho, body.n, opts.max_degree, opts.degree_cap, &eopts)?;
    let degree = spectrum.max_degree();
    let warning = spectrum.truncation_warning.clone();
    let transformed = fourier::ft_spectrum(&spectrum, 1.0)?;
    let ft = SphereProfile::from_spectrum(transformed, "FT rho");
    let grid = opts.grid.max(2);
    let us: Vec<f64> = (0..grid).map(|i| -1.0 + 2.0 * i as f64 / (grid - 1) as f64).collect();
    let mut vals = vec![0.0; grid];
    ft.eval_many(&us, &mut vals);
    let (mut min_value, mut argmin_u) = (f64::INFINITY, 0.0);
    for (u, v) in us.iter().zip(&vals) {
        if *v < min_value {
            min_value = *v;
            argmin_u = *u;
        }
    }
    let tolerance = opts.tolerance * euclidean_constant(body.n);
    Ok(IntersectionReport {
        min_value,
        argmin_u,
        is_intersection: min_value >= -tolerance,
        tolerance,
        degree,
        truncation_warning: warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyJson {
    pub n: usize,
    #[serde(flatten)]
    pub kind: BodyKind,
    pub profile_samples: Vec<[f64; 2]>,
}

/// Samples of `rho` at the Gauss nodes of the sphere rule of order `order`.
pub fn body_json(body: &RevolutionBody, order: usize) -> Result<BodyJson> {
    let q = Quadrature::gauss_jacobi(order, (body.n as f64 - 3.0) / 2.0)?;
    let mut r = vec![0.0; order];
    body.rho.eval_many(q.nodes(), &mut r);
    Ok(BodyJson {
        n: body.n,
        kind: body.kind.clone(),
        profile_samples: q.nodes().iter().zip(&r).map(|(u, r)| [*u, *r]).collect(),
    })
}

/// `u,rho,kappa` rows on a uniform `theta` grid.
pub fn profile_rows(body: &RevolutionBody, grid: usize) -> Vec<[f64; 3]> {
    let len = 1024.max(2 * body.rho.series_degree() + 256);
    let series = MeridianSeries::fit(&body.rho, len);
    let grid = grid.max(2);
    (0..grid)
        .map(|i| {
            let theta = PI * i as f64 / (grid - 1) as f64;
            let (r, dr, ddr) = series.eval3(theta);
            [theta.cos(), body.rho.eval(theta.cos()), meridian_curvature(r, dr, ddr)]
        })
        .collect()
}

pub fn write_profile_csv(body: &RevolutionBody, grid: usize, path: &Path) -> Result<()> {
    crate::io::write_csv(path, &["u", "rho", "kappa"], profile_rows(body, grid))
}
