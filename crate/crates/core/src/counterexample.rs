//! A convex body of revolution `K` in `R^n`, `n >= 5`, with centroid at the origin
//! whose hyperplane sections through the origin all have centroids strictly above
//! `e_n^perp`, except the equatorial one.
//!
//! `K` is obtained from the non-intersection body `M` by
//! `rho_K^n = rho_M^n + eps phi_lambda`, where `u phi_lambda(u) = g_lambda^(u)` and
//! `g_lambda = (1 - lambda) G + lambda H`. The mixing weight `lambda` is then tuned
//! so that `<c(K), e_n> = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Tolerances};
use crate::error::{Error, Result};
use crate::fourier::{self, euclidean_constant, sphere_area, HomogeneousFunction};
use crate::gegenbauer::{self, ExpandOptions, GegenbauerSpectrum};
use crate::profile::{Parity, SphereProfile};
use crate::quadrature::Quadrature;
use crate::revolution::{self, BodyIntegrator, BodyKind, CurvatureOptions, RevolutionBody};

/// `u*` such that the transform of `rho_M` is negative exactly for `|u| > u*`.
pub fn negativity_threshold(n: usize, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("a must lie in (0, 1), got {a}")));
    }
    let k = 2f64.powf(2.0 / (n as f64 - 1.0)) * a * a;
    if k >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "a = {a} leaves no negativity region: 2^(2/(n-1)) a^2 = {k} >= 1"
        )));
    }
    Ok(((1.0 - k) / (1.0 - a * a)).sqrt())
}

/// `exp(-1/s - 1/(1-s))` on `(0, 1)`, zero elsewhere; peak `e^{-4}` at `s = 1/2`.
pub fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / s - 1.0 / (1.0 - s)).exp()
    }
}

/// Even smooth bump on the two polar caps `|u| > cap_u0`, vanishing at the poles.
pub fn make_g(n: usize, a: f64, cap_u0: f64) -> Result<SphereProfile> {
    let u_star = negativity_threshold(n, a)?;
    if !(cap_u0 > u_star && cap_u0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cap boundary {cap_u0} must lie in (u*, 1) = ({u_star}, 1)"
        )));
    }
    let w = 1.0 - cap_u0;
    let g = SphereProfile::closed(n, Parity::Even, format!("bump on |u| > {cap_u0}"), move |u: f64| {
        bump((u.abs() - cap_u0) / w)
    })
    .with_derivative(move |u: f64| {
        let s = (u.abs() - cap_u0) / w;
        let b = bump(s);
        if b == 0.0 {
            return 0.0;
        }
        b * (1.0 / (s * s) - 1.0 / ((1.0 - s) * (1.0 - s))) * u.signum() / w
    })
    .with_support_floor(cap_u0);
    Ok(g)
}

/// `H = |x|^{-1} - (4 (x_1^2 + ... + x_{n-1}^2) + x_n^2)^{-1/2}` with its exact transform
/// `c_n (|y|^{-(n-1)} - (y_1^2 + ... + y_{n-1}^2 + 4 y_n^2)^{-(n-1)/2})` attached.
pub fn make_h(n: usize) -> Result<HomogeneousFunction> {
    if n < 5 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "the construction needs n >= 5".into(),
        });
    }
    let h = SphereProfile::closed(n, Parity::Even, "H", |u: f64| 1.0 - (4.0 - 3.0 * u * u).powf(-0.5))
        .with_derivative(|u: f64| -3.0 * u * (4.0 - 3.0 * u * u).powf(-1.5));
    Ok(HomogeneousFunction::new(h, 1.0)?.with_transform(h_transform(n)))
}

/// `u -> c_n (1 - (1 + 3 u^2)^{-(n-1)/2})`.
pub fn h_transform(n: usize) -> SphereProfile {
    let cn = euclidean_constant(n);
    let e = (n as f64 - 1.0) / 2.0;
    SphereProfile::closed(n, Parity::Even, "H^", move |u: f64| cn * (1.0 - (1.0 + 3.0 * u * u).powf(-e)))
        .with_derivative(move |u: f64| 6.0 * e * cn * u * (1.0 + 3.0 * u * u).powf(-e - 1.0))
}

/// Spectral fit of `G` and its transform.
#[derive(Debug, Clone)]
pub struct BumpFit {
    pub spectrum: GegenbauerSpectrum,
    pub transform: GegenbauerSpectrum,
    /// `|G^(0)| / max |G^|` of the truncated series.
    pub equator_ratio: f64,
    /// Sampled sup-norm distance between the series and `G`.
    pub fit_error: f64,
    pub transform_max: f64,
}

/// Degrees tried, in order, when fitting `G`.
pub const BUMP_DEGREE_LADDER: [usize; 8] = [512, 1024, 1536, 2048, 3072, 4096, 6144, 8192];

fn uniform_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64).collect()
}

fn max_abs(p: &SphereProfile, us: &[f64]) -> f64 {
    let mut v = vec![0.0; us.len()];
    p.eval_many(us, &mut v);
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Raises the degree along [`BUMP_DEGREE_LADDER`] until the truncated transform vanishes
/// on the equator to `equator_target` relative to its maximum.
pub fn fit_bump(g: &SphereProfile, quad_order: usize, equator_target: f64, degree_cap: usize) -> Result<BumpFit> {
    let n = g.n();
    let floor = g.support_floor().unwrap_or(0.0);
    let theta0 = floor.acos();
    let probe_u: Vec<f64> = (0..=400).map(|i| (theta0 * i as f64 / 400.0).cos()).collect();
    let grid = uniform_grid(2001);
    let opts = ExpandOptions {
        quadrature_order: quad_order,
        tail_tolerance: 1.0,
    };
    let mut last = None;
    for &degree in BUMP_DEGREE_LADDER.iter().filter(|&&d| d <= degree_cap.max(BUMP_DEGREE_LADDER[0])) {
        let spectrum = gegenbauer::expand_with(g, n, degree, &opts)?;
        let transform = fourier::ft_spectrum(&spectrum, 1.0)?;
        let t = SphereProfile::from_spectrum(transform.clone(), "G^");
        let transform_max = max_abs(&t, &grid);
        let equator_ratio = t.eval(0.0).abs() / transform_max;
        let series = SphereProfile::from_spectrum(spectrum.clone(), "G series");
        let mut fit_vals = vec![0.0; probe_u.len()];
        series.eval_many(&probe_u, &mut fit_vals);
        let fit_error = probe_u
            .iter()
            .zip(&fit_vals)
            .map(|(u, v)| (v - g.eval(*u)).abs())
            .fold(0.0, f64::max);
        let fit = BumpFit {
            spectrum,
            transform,
            equator_ratio,
            fit_error,
            transform_max,
        };
        if equator_ratio <= equator_target {
            return Ok(fit);
        }
        last = Some(fit);
    }
    let fit = last.ok_or_else(|| Error::construction("bump fit", "empty degree ladder"))?;
    Err(Error::construction(
        "bump fit",
        format!(
            "degree {} leaves |G^(0)|/max|G^| = {:.3e} above {:.1e}",
            fit.spectrum.max_degree(),
            fit.equator_ratio,
            equator_target
        ),
    ))
}

/// All `lambda`-independent ingredients.
#[derive(Debug, Clone)]
pub struct Ingredients {
    pub n: usize,
    pub a: f64,
    pub u_star: f64,
    pub cap_u0: f64,
    pub m: RevolutionBody,
    pub g: SphereProfile,
    pub h: HomogeneousFunction,
    pub bump: BumpFit,
    pub g_hat: SphereProfile,
    pub h_hat: SphereProfile,
    /// Series of `G` shifted by the constant whose transform is `G^(0)`; its transform
    /// is exactly `G^ - G^(0)`, the part that `phi` is built from.
    pub g_realized: SphereProfile,
}

impl Ingredients {
    pub fn new(n: usize, a: f64, cap_margin: f64, cfg: &RunConfig) -> Result<Self> {
        if !(cap_margin > 0.0 && cap_margin < 1.0) {
            return Err(Error::InvalidParameter(format!("cap margin must lie in (0, 1), got {cap_margin}")));
        }
        let m = revolution::make_body_m(n, a)?;
        let u_star = negativity_threshold(n, a)?;
        let cap_u0 = u_star + cap_margin * (1.0 - u_star);
        let g = make_g(n, a, cap_u0)?;
        let h = make_h(n)?;
        let bump = fit_bump(&g, cfg.quad_order, cfg.tolerances.equator / 10.0, cfg.bump_degree_cap)?;
        let g_hat = SphereProfile::from_spectrum(bump.transform.clone(), "G^");
        let (_, r) = bump.transform.divide_by_u();
        let g_realized = SphereProfile::combination(
            n,
            "G series, equator-corrected",
            vec![
                (1.0, SphereProfile::from_spectrum(bump.spectrum.clone(), "G series")),
                (-r / euclidean_constant(n), SphereProfile::constant(n, 1.0)),
            ],
        );
        let h_hat = h.attached_transform().cloned().unwrap_or_else(|| h_transform(n));
        Ok(Ingredients {
            n,
            a,
            u_star,
            cap_u0,
            m,
            g,
            h,
            bump,
            g_hat,
            h_hat,
            g_realized,
        })
    }

    pub fn bump_degree(&self) -> usize {
        self.bump.spectrum.max_degree()
    }
}

/// `g_lambda` of degree `-1` with its transform `(1 - lambda) G^ + lambda H^` attached.
pub fn make_g_lambda(parts: &Ingredients, lambda: f64) -> Result<HomogeneousFunction> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let n = parts.n;
    let profile = SphereProfile::combination(
        n,
        format!("g_{lambda}"),
        vec![(1.0 - lambda, parts.g.clone()), (lambda, parts.h.profile.clone())],
    );
    let transform = SphereProfile::combination(
        n,
        format!("g_{lambda}^"),
        vec![(1.0 - lambda, parts.g_hat.clone()), (lambda, parts.h_hat.clone())],
    );
    Ok(HomogeneousFunction::new(profile, 1.0)?.with_transform(transform))
}

/// Generating function of the body actually built: `(1 - lambda) G_realized + lambda H`.
pub fn realized_g_lambda(parts: &Ingredients, lambda: f64) -> SphereProfile {
    SphereProfile::combination(
        parts.n,
        format!("realized g_{lambda}"),
        vec![(1.0 - lambda, parts.g_realized.clone()), (lambda, parts.h.profile.clone())],
    )
}

/// Settings for [`make_phi_lambda`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiOptions {
    pub u_switch: f64,
    pub equator_tolerance: f64,
    pub integral_order: usize,
}

impl Default for PhiOptions {
    fn default() -> Self {
        PhiOptions {
            u_switch: 0.05,
            equator_tolerance: 1e-8,
            integral_order: 24,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhiLambda {
    pub profile: SphereProfile,
    /// Value of `g^(0)` removed before division.
    pub equator_subtraction: f64,
    /// `|g^(0)| / max |g^|` before subtraction.
    pub equator_ratio: f64,
    /// Relative disagreement of the two closed-form branches at `u_switch`.
    pub branch_mismatch: f64,
}

struct PhiPart {
    profile: SphereProfile,
    subtracted: f64,
    mismatch: f64,
}

fn phi_part(g_hat: &SphereProfile, opts: &PhiOptions, gl: &(Vec<f64>, Vec<f64>)) -> Result<PhiPart> {
    let n = g_hat.n();
    if let Some(s) = g_hat.spectrum() {
        let (q, r) = s.divide_by_u();
        return Ok(PhiPart {
            profile: SphereProfile::from_spectrum(q, format!("{} / u", g_hat.note())),
            subtracted: r,
            mismatch: 0.0,
        });
    }
    if let Some(terms) = g_hat.terms() {
        let mut out = Vec::with_capacity(terms.len());
        let (mut sub, mut mis) = (0.0, 0.0f64);
        for (c, p) in terms {
            let part = phi_part(p, opts, gl)?;
            sub += c * part.subtracted;
            mis = mis.max(part.mismatch);
            out.push((*c, part.profile));
        }
        return Ok(PhiPart {
            profile: SphereProfile::combination(n, format!("{} / u", g_hat.note()), out),
            subtracted: sub,
            mismatch: mis,
        });
    }
    if !g_hat.has_derivative() {
        return Err(Error::construction(
            "phi",
            format!("`{}` has neither a series form nor an exact derivative", g_hat.note()),
        ));
    }
    let r = g_hat.eval(0.0);
    let f = g_hat.clone();
    let (nodes, weights) = gl.clone();
    let sw = opts.u_switch;
    let near = move |u: f64| -> f64 {
        nodes
            .iter()
            .zip(&weights)
            .map(|(s, w)| w * f.derivative(s * u).unwrap_or(f64::NAN))
            .sum()
    };
    let far_f = g_hat.clone();
    let far = move |u: f64| (far_f.eval(u) - r) / u;
    let a = far(sw);
    let b = near(sw);
    let mismatch = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let profile = SphereProfile::closed(n, Parity::Odd, format!("{} / u", g_hat.note()), move |u: f64| {
        if u.abs() >= sw {
            far(u)
        } else {
            near(u)
        }
    });
    Ok(PhiPart {
        profile,
        subtracted: r,
        mismatch,
    })
}

/// `phi(u) = (g^(u) - g^(0)) / u`: exact quotient for series parts; for closed forms
/// the quotient above `u_switch` and `int_0^1 g^'(s u) ds` below.
pub fn make_phi_lambda(g_hat: &SphereProfile, opts: &PhiOptions) -> Result<PhiLambda> {
    let grid = uniform_grid(2001);
    let scale = max_abs(g_hat, &grid);
    let at0 = g_hat.eval(0.0);
    let equator_ratio = if scale > 0.0 { at0.abs() / scale } else { 0.0 };
    if equator_ratio > opts.equator_tolerance {
        return Err(Error::construction(
            "phi",
            format!(
                "transform does not vanish on the equator: |g^(0)| / max|g^| = {equator_ratio:.3e} > {:.1e}",
                opts.equator_tolerance
            ),
        ));
    }
    let gl = Quadrature::legendre_on(opts.integral_order, 0.0, 1.0)?;
    let part = phi_part(g_hat, opts, &gl)?;
    Ok(PhiLambda {
        profile: part.profile,
        equator_subtraction: part.subtracted,
        equator_ratio,
        branch_mismatch: part.mismatch,
    })
}

/// `rho_K = (rho_M^n + eps phi)^{1/n}`.
pub fn make_body_k(m: &RevolutionBody, phi: &SphereProfile, eps: f64, lambda: f64) -> Result<RevolutionBody> {
    let a = match m.kind {
        BodyKind::ClosedFormM { a } => a,
        _ => f64::NAN,
    };
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
    }
    let n = m.n;
    let nn = n as i32;
    let base = SphereProfile::mapped(
        n,
        Parity::Mixed,
        "rho_M^n + eps phi",
        vec![m.rho.clone(), phi.clone()],
        move |v| v[0].powi(nn) + eps * v[1],
    );
    let grid = uniform_grid(4001);
    let mut vals = vec![0.0; grid.len()];
    base.eval_many(&grid, &mut vals);
    if let Some((u, v)) = grid.iter().zip(&vals).find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} too large: rho_M^n + eps phi = {v:.3e} at u = {u}"
        )));
    }
    let inv = 1.0 / n as f64;
    let rho = SphereProfile::mapped(
        n,
        Parity::Mixed,
        format!("rho_K eps={eps} lambda={lambda}"),
        vec![m.rho.clone(), phi.clone()],
        move |v| (v[0].powi(nn) + eps * v[1]).powf(inv),
    );
    let m_power = SphereProfile::mapped(n, m.rho.parity(), "rho_M^n", vec![m.rho.clone()], move |v| v[0].powi(nn));
    let power = SphereProfile::combination(n, "rho_K^n", vec![(1.0, m_power), (eps, phi.clone())]);
    Ok(RevolutionBody::new(n, rho, BodyKind::PerturbedK { a, lambda, eps })?.with_power(power))
}

/// `K(lambda, eps)` from the shared ingredients.
pub fn body_for(parts: &Ingredients, lambda: f64, eps: f64, opts: &PhiOptions) -> Result<(RevolutionBody, PhiLambda)> {
    let g = make_g_lambda(parts, lambda)?;
    let g_hat = g.attached_transform().cloned().expect("g_lambda carries its transform");
    let phi = make_phi_lambda(&g_hat, opts)?;
    let k = make_body_k(&parts.m, &phi.profile, eps, lambda)?;
    Ok((k, phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionRow {
    pub u_xi: f64,
    pub centroid_quadrature: f64,
    pub centroid_analytic: f64,
    pub rel_err: f64,
    pub section_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionReport {
    pub rows: Vec<SectionRow>,
    /// Over `|u_xi| < 1`.
    pub max_rel_err: f64,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Section centroids of `K` by quadrature, against
/// `n |K cap xi^perp| <c, e_n> = eps (2 pi)^n g_lambda(u_xi) / pi`.
pub fn section_identity_check(
    k: &RevolutionBody,
    g_lambda: &SphereProfile,
    eps: f64,
    integrator: &BodyIntegrator,
    u_grid: &[f64],
) -> Result<SectionReport> {
    let n = k.n;
    let factor = eps * (2.0 * PI).powi(n as i32) / (PI * n as f64);
    let mut rows = Vec::with_capacity(u_grid.len());
    let mut max_rel_err = 0.0f64;
    for &u in u_grid {
        let s = integrator.section(k, u)?;
        let analytic = factor * g_lambda.eval(u) / s.volume;
        // both sides vanish at the poles; the difference there is absolute
        let rel_err = if u.abs() == 1.0 {
            (s.centroid - analytic).abs()
        } else {
            let e = rel_diff(s.centroid, analytic);
            max_rel_err = max_rel_err.max(e);
            e
        };
        rows.push(SectionRow {
            u_xi: u,
            centroid_quadrature: s.centroid,
            centroid_analytic: analytic,
            rel_err,
            section_volume: s.volume,
        });
    }
    Ok(SectionReport { rows, max_rel_err })
}

/// `<c(K(lambda, eps)), e_n>`.
pub fn centroid_functional(
    parts: &Ingredients,
    lambda: f64,
    eps: f64,
    integrator: &BodyIntegrator,
    opts: &PhiOptions,
) -> Result<f64> {
    let (k, _) = body_for(parts, lambda, eps, opts)?;
    integrator.centroid_axis(&k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub root: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Bisection until `|f| <= tol` or the bracket collapses.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<RootResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(RootResult { root: a, value: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(RootResult { root: b, value: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::construction(
            "root",
            format!("no sign change: f({lo}) = {fa:.6e}, f({hi}) = {fb:.6e}"),
        ));
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=max_iter {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= tol || mid <= a || mid >= b {
            return Ok(RootResult { root: best.0, value: best.1, iterations: it });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(RootResult { root: best.0, value: best.1, iterations: max_iter })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketValues {
    pub eps: f64,
    pub at_zero: f64,
    pub at_one: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub n: usize,
    pub a: f64,
    pub u_star: f64,
    pub cap_u0: f64,
    pub cap_margin: f64,
    pub eps: f64,
    pub lambda: f64,
    pub bump: String,
    pub bump_degree: usize,
}

/// Machine-readable record of a verified construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCertificate {
    pub schema: String,
    pub version: String,
    pub params: CounterexampleParams,
    pub lambda0: f64,
    pub eps0: f64,
    #[serde(rename = "F_at_root")]
    pub f_at_root: f64,
    pub root_iterations: usize,
    pub bracket: BracketValues,
    pub eps_halvings: usize,
    pub kappa_min_m: f64,
    pub kappa_min_k: f64,
    pub kappa_min_k_endpoints: [f64; 2],
    pub min_section_margin: f64,
    pub min_section_argmin: f64,
    pub pole_section_centroid: [f64; 2],
    pub pole_decay_exponent: f64,
    pub equator_residual: f64,
    pub equator_ratios: Vec<[f64; 2]>,
    pub equator_subtraction: f64,
    pub phi_branch_mismatch: f64,
    pub phi_bounds: PhiBounds,
    pub parseval_residual: f64,
    pub int_m_g: f64,
    pub int_m_h: f64,
    pub identity_max_relerr: f64,
    pub bump_fit_error: f64,
    pub negativity_boundary_error: f64,
    pub grids: Grids,
    pub tolerances: Tolerances,
    pub config: RunConfig,
    pub valid: bool,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub created_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiBounds {
    /// `(lambda, max |phi_lambda|, max |phi_lambda'|)` on the u grid.
    pub samples: Vec<[f64; 3]>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub section_points: usize,
    pub sphere_order: usize,
    pub radon_order: usize,
    pub curvature_grid: usize,
    pub bump_degree: usize,
    pub max_degree: usize,
}

/// Everything produced by a construction run.
#[derive(Debug, Clone)]
pub struct Construction {
    pub parts: Ingredients,
    pub k: RevolutionBody,
    pub phi: PhiLambda,
    pub g_lambda: HomogeneousFunction,
    pub sections: SectionReport,
    pub certificate: CounterexampleCertificate,
}

/// First candidate `a` whose `M` passes the curvature check and admits a negativity cap.
pub fn auto_a(n: usize, margin: f64) -> Result<(f64, f64)> {
    for &a in &crate::config::A_CANDIDATES {
        let Ok(m) = revolution::make_body_m(n, a) else { continue };
        if negativity_threshold(n, a).is_err() {
            continue;
        }
        let r = revolution::curvature_with(&m, &CurvatureOptions { margin, ..CurvatureOptions::default() });
        if r.is_convex {
            return Ok((a, r.kappa_min));
        }
    }
    Err(Error::construction("choose a", "no candidate value of a gives a convex M"))
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 5 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "for n = 3, 4 every origin-symmetric convex body is an intersection body, \
                     so no non-intersection M exists and the construction does not apply"
                .into(),
        });
    }
    Ok(())
}

/// Runs the full construction and verification for a configuration.
pub fn construct(cfg: &RunConfig) -> Result<Construction> {
    cfg.validate()?;
    check_dimension(cfg.n)?;
    let tol = &cfg.tolerances;
    let curv = CurvatureOptions {
        margin: tol.convexity_margin,
        ..CurvatureOptions::default()
    };
    let a = match cfg.a {
        Some(a) => a,
        None => auto_a(cfg.n, tol.convexity_margin)?.0,
    };
    let parts = Ingredients::new(cfg.n, a, cfg.cap_margin, cfg)?;
    let kappa_m = revolution::curvature_with(&parts.m, &curv);
    if !kappa_m.is_convex {
        return Err(Error::construction(
            "body M",
            format!("M is not certified convex: kappa_min = {:.3e}", kappa_m.kappa_min),
        ));
    }
    let phi_opts = PhiOptions {
        u_switch: tol.u_switch,
        equator_tolerance: tol.equator,
        ..PhiOptions::default()
    };

    // probe body sizes the integrator for the series content of phi
    let (probe, _) = body_for(&parts, 0.5, 0.0, &phi_opts)?;
    let integrator = BodyIntegrator::for_body(&probe, cfg.quad_order)?;

    let (eps, halvings, bracket) = select_eps(&parts, cfg, &integrator, &phi_opts, &curv)?;
    let root = bisect(
        |l| centroid_functional(&parts, l, eps, &integrator, &phi_opts),
        0.0,
        1.0,
        tol.root,
        200,
    )?;
    let (k, phi) = body_for(&parts, root.root, eps, &phi_opts)?;
    let g_lambda = make_g_lambda(&parts, root.root)?;
    let report = verify(
        &parts,
        &k,
        &phi,
        &g_lambda,
        root,
        eps,
        halvings,
        bracket,
        kappa_m.kappa_min,
        cfg,
        &integrator,
    )?;
    Ok(Construction {
        parts,
        k,
        phi,
        g_lambda,
        sections: report.1,
        certificate: report.0,
    })
}

fn select_eps(
    parts: &Ingredients,
    cfg: &RunConfig,
    integrator: &BodyIntegrator,
    phi_opts: &PhiOptions,
    curv: &CurvatureOptions,
) -> Result<(f64, usize, BracketValues)> {
    let mut eps = cfg.eps;
    let mut last_reason = String::new();
    for halvings in 0..=cfg.max_eps_halvings {
        match try_eps(parts, eps, integrator, phi_opts, curv) {
            Ok(Some(b)) => return Ok((eps, halvings, b)),
            Ok(None) => last_reason = format!("no sign change at eps = {eps:.3e}"),
            Err(e) => last_reason = e.to_string(),
        }
        eps *= 0.5;
    }
    Err(Error::construction(
        "eps selection",
        format!(
            "no admissible eps after {} halvings from {}: {last_reason}",
            cfg.max_eps_halvings, cfg.eps
        ),
    ))
}

fn try_eps(
    parts: &Ingredients,
    eps: f64,
    integrator: &BodyIntegrator,
    phi_opts: &PhiOptions,
    curv: &CurvatureOptions,
) -> Result<Option<BracketValues>> {
    let mut values = [0.0; 2];
    for (i, l) in [0.0, 1.0].into_iter().enumerate() {
        let (k, _) = body_for(parts, l, eps, phi_opts)?;
        let c = revolution::curvature_with(&k, curv);
        if !c.is_convex {
            return Err(Error::construction(
                "convexity guard",
                format!("K(lambda={l}, eps={eps:.3e}) has kappa_min = {:.3e}", c.kappa_min),
            ));
        }
        values[i] = integrator.centroid_axis(&k)?;
    }
    if values[0] < 0.0 && values[1] > 0.0 {
        Ok(Some(BracketValues {
            eps,
            at_zero: values[0],
            at_one: values[1],
        }))
    } else {
        Ok(None)
    }
}

/// Section grid: uniform in `u_xi` including both poles.
pub fn section_grid(points: usize) -> Vec<f64> {
    uniform_grid(points)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    parts: &Ingredients,
    k: &RevolutionBody,
    phi: &PhiLambda,
    g_lambda: &HomogeneousFunction,
    root: RootResult,
    eps: f64,
    halvings: usize,
    bracket: BracketValues,
    kappa_min_m: f64,
    cfg: &RunConfig,
    integrator: &BodyIntegrator,
) -> Result<(CounterexampleCertificate, SectionReport)> {
    let n = parts.n;
    let tol = &cfg.tolerances;
    let curv = CurvatureOptions {
        margin: tol.convexity_margin,
        ..CurvatureOptions::default()
    };
    let phi_opts = PhiOptions {
        u_switch: tol.u_switch,
        equator_tolerance: tol.equator,
        ..PhiOptions::default()
    };
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    let kappa_k = revolution::curvature_with(k, &curv);
    if !kappa_k.is_convex {
        failures.push(format!("kappa_min_K = {:.3e} <= margin {:.1e}", kappa_k.kappa_min, tol.convexity_margin));
    }
    if kappa_k.low_confidence {
        notes.push(format!("curvature series tail {:.2e}: low confidence", kappa_k.series_tail));
    }
    let mut endpoints = [0.0; 2];
    for (i, l) in [0.0, 1.0].into_iter().enumerate() {
        let (kl, _) = body_for(parts, l, eps, &phi_opts)?;
        endpoints[i] = revolution::curvature_with(&kl, &curv).kappa_min;
    }

    let centroid = integrator.centroid_axis(k)?;
    if centroid.abs() > tol.root {
        failures.push(format!("|<c(K), e_n>| = {:.3e} > {:.1e}", centroid.abs(), tol.root));
    }

    let grid = section_grid(cfg.alpha_grid);
    let sections = section_identity_check(k, &realized_g_lambda(parts, root.root), eps, integrator, &grid)?;
    let nominal_relerr = sections
        .rows
        .iter()
        .map(|r| {
            let nominal =
                eps * (2.0 * PI).powi(n as i32) / (PI * n as f64) * g_lambda.profile.eval(r.u_xi) / r.section_volume;
            rel_diff(r.centroid_quadrature, nominal)
        })
        .fold(0.0, f64::max);
    notes.push(format!(
        "section identity against the untruncated g_lambda: max rel err {nominal_relerr:.3e}"
    ));
    if sections.max_rel_err > tol.identity {
        failures.push(format!(
            "section identity max rel err {:.3e} > {:.1e}",
            sections.max_rel_err, tol.identity
        ));
    }
    let diameter = 2.0 * max_abs(&k.rho, &uniform_grid(4001));
    let (mut margin, mut argmin) = (f64::INFINITY, 0.0);
    for r in sections.rows.iter().filter(|r| r.u_xi.abs() < 1.0) {
        let v = r.centroid_quadrature / diameter;
        if v < margin {
            margin = v;
            argmin = r.u_xi;
        }
    }
    if !(margin > 0.0) {
        failures.push(format!("min section margin {margin:.3e} not positive at u_xi = {argmin}"));
    }
    let poles = [
        integrator.section_centroid_axis(k, -1.0)?,
        integrator.section_centroid_axis(k, 1.0)?,
    ];
    if poles.iter().any(|p| p.abs() > tol.pole) {
        failures.push(format!("pole section centroids {poles:?} exceed {:.1e}", tol.pole));
    }
    let pole_decay_exponent = decay_exponent(&sections.rows);

    // equator vanishing on a lambda grid, plus bounds on phi_lambda
    let mut equator_ratios = Vec::new();
    let mut bounds = Vec::new();
    let mut equator_residual = 0.0f64;
    let ugrid = uniform_grid(2001);
    for l in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let gl = make_g_lambda(parts, l)?;
        let gh = gl.attached_transform().expect("transform attached");
        let scale = max_abs(gh, &ugrid);
        let at0 = gh.eval(0.0).abs();
        equator_residual = equator_residual.max(at0);
        let ratio = at0 / scale;
        equator_ratios.push([l, ratio]);
        if ratio > tol.equator {
            failures.push(format!("|g_{l}^(0)| / max = {ratio:.3e} > {:.1e}", tol.equator));
        }
        let p = make_phi_lambda(gh, &phi_opts)?;
        let pm = max_abs(&p.profile, &ugrid);
        let h = 1e-6;
        let dm = ugrid
            .iter()
            .map(|&u| {
                let (a, b) = ((u - h).max(-1.0), (u + h).min(1.0));
                ((p.profile.eval(b) - p.profile.eval(a)) / (b - a)).abs()
            })
            .fold(0.0, f64::max);
        bounds.push([l, pm, dm]);
    }
    if phi.branch_mismatch > tol.phi_branch {
        failures.push(format!(
            "phi branches disagree by {:.3e} at u_switch",
            phi.branch_mismatch
        ));
    }

    // sign of the two integrals driving the bracket, and Parseval on the (M, H) pair
    let ft_m = parts.m.rho_transform.clone().expect("M carries its transform");
    let order = cfg.quad_order.max(parts.bump_degree() + 64);
    let int_m_g = fourier::sphere_integral_with(&ft_m.product(&parts.g), n, order)?;
    let int_m_h = fourier::sphere_integral_with(&ft_m.product(&parts.h.profile), n, order)?;
    let int_rho_hhat = fourier::sphere_integral_with(&parts.m.rho.product(&parts.h_hat), n, order)?;
    if !(int_m_g < 0.0) {
        failures.push(format!("int M^ G = {int_m_g:.6e} is not negative"));
    }
    if !(int_m_h > 0.0) {
        failures.push(format!("int M^ H = {int_m_h:.6e} is not positive"));
    }
    let fm = parts.m.as_homogeneous()?;
    let h_hat_fn = HomogeneousFunction::new(parts.h_hat.clone(), n as f64 - 1.0)?;
    let pr = fourier::parseval_residual(&fm, &h_hat_fn, cfg.max_degree)?;
    let same = rel_diff(int_m_h, int_rho_hhat);
    let parseval_residual = pr.residual.max(same);
    if parseval_residual > tol.parseval {
        failures.push(format!("Parseval residual {parseval_residual:.3e} > {:.1e}", tol.parseval));
    }

    // the negativity boundary seen by a sign-change search on the attached transform
    let boundary = bisect(|u| Ok(ft_m.eval(u)), 0.0, 1.0, 0.0, 200)?.root;
    let negativity_boundary_error = (boundary - parts.u_star).abs();
    if negativity_boundary_error > 1e-8 {
        failures.push(format!("negativity boundary off by {negativity_boundary_error:.3e}"));
    }

    notes.push("boundedness of phi_lambda and its derivative is grid-verified, not proved".into());
    notes.push(format!(
        "G is the bump exp(-1/s - 1/(1-s)), s = (|u| - {:.12})/(1 - {:.12}); series degree {}",
        parts.cap_u0,
        parts.cap_u0,
        parts.bump_degree()
    ));
    if phi.equator_subtraction != 0.0 {
        notes.push(format!(
            "g^(0) = {:.3e} subtracted before division by u",
            phi.equator_subtraction
        ));
    }

    let params = CounterexampleParams {
        n,
        a: parts.a,
        u_star: parts.u_star,
        cap_u0: parts.cap_u0,
        cap_margin: cfg.cap_margin,
        eps,
        lambda: root.root,
        bump: "exp(-1/s - 1/(1-s))".into(),
        bump_degree: parts.bump_degree(),
    };
    let cert = CounterexampleCertificate {
        schema: "v1".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        params,
        lambda0: root.root,
        eps0: eps,
        f_at_root: root.value,
        root_iterations: root.iterations,
        bracket,
        eps_halvings: halvings,
        kappa_min_m,
        kappa_min_k: kappa_k.kappa_min,
        kappa_min_k_endpoints: endpoints,
        min_section_margin: margin,
        min_section_argmin: argmin,
        pole_section_centroid: poles,
        pole_decay_exponent,
        equator_residual,
        equator_ratios,
        equator_subtraction: phi.equator_subtraction,
        phi_branch_mismatch: phi.branch_mismatch,
        phi_bounds: PhiBounds {
            samples: bounds,
            status: "grid-verified".into(),
        },
        parseval_residual,
        int_m_g,
        int_m_h,
        identity_max_relerr: sections.max_rel_err,
        bump_fit_error: parts.bump.fit_error,
        negativity_boundary_error,
        grids: Grids {
            section_points: grid.len(),
            sphere_order: integrator.sphere_order(),
            radon_order: integrator.radon_order(),
            curvature_grid: curv.grid,
            bump_degree: parts.bump_degree(),
            max_degree: cfg.max_degree,
        },
        tolerances: tol.clone(),
        config: cfg.clone(),
        valid: failures.is_empty(),
        failures,
        notes,
        metadata: Metadata::default(),
    };
    Ok((cert, sections))
}

/// Slope of `log |c(u_xi)|` against `log(1 - |u_xi|)` over the last interior grid points near `u_xi = 1`.
fn decay_exponent(rows: &[SectionRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.u_xi > 0.0 && r.u_xi < 1.0 && r.centroid_quadrature > 0.0)
        .map(|r| ((1.0 - r.u_xi).ln(), r.centroid_quadrature.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let tail = &pts[pts.len().saturating_sub(4)..];
    let (x0, y0) = tail[0];
    let (x1, y1) = tail[tail.len() - 1];
    (y1 - y0) / (x1 - x0)
}

/// Re-runs the verification for the parameters stored in `cert` under `cfg`, which
/// may differ in grids. The stored margins are checked as well.
pub fn verify_certificate(cert: &CounterexampleCertificate, cfg: &RunConfig) -> Result<VerifyReport> {
    if cert.schema != "v1" {
        return Err(Error::InvalidParameter(format!("unsupported certificate schema `{}`", cert.schema)));
    }
    let tol = &cfg.tolerances;
    let Realized { parts, k, .. } = realize(cert, cfg)?;
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, limit: f64, ok: bool| {
        checks.push(Check {
            name: name.into(),
            value,
            limit,
            pass: ok,
        })
    };
    push("recorded min_section_margin > 0", cert.min_section_margin, 0.0, cert.min_section_margin > 0.0);
    push(
        "recorded lambda0 in (0, 1)",
        cert.lambda0,
        0.0,
        cert.lambda0 > 0.0 && cert.lambda0 < 1.0,
    );
    let integrator = BodyIntegrator::for_body(&k, cfg.quad_order)?;
    let c = integrator.centroid_axis(&k)?;
    push("|<c(K), e_n>|", c.abs(), tol.root, c.abs() <= tol.root);
    let curv = CurvatureOptions {
        margin: tol.convexity_margin,
        ..CurvatureOptions::default()
    };
    let kap = revolution::curvature_with(&k, &curv);
    push("kappa_min(K)", kap.kappa_min, tol.convexity_margin, kap.is_convex);
    let grid = section_grid(cfg.alpha_grid);
    let sections = section_identity_check(&k, &realized_g_lambda(&parts, cert.lambda0), cert.eps0, &integrator, &grid)?;
    push(
        "section identity max rel err",
        sections.max_rel_err,
        tol.identity,
        sections.max_rel_err <= tol.identity,
    );
    let min_interior = sections
        .rows
        .iter()
        .filter(|r| r.u_xi.abs() < 1.0)
        .map(|r| r.centroid_quadrature)
        .fold(f64::INFINITY, f64::min);
    push("min interior section centroid > 0", min_interior, 0.0, min_interior > 0.0);
    let pole = integrator
        .section_centroid_axis(&k, 1.0)?
        .abs()
        .max(integrator.section_centroid_axis(&k, -1.0)?.abs());
    push("|pole section centroid|", pole, tol.pole, pole <= tol.pole);
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// The body `K` recorded in a certificate, rebuilt under `cfg`.
#[derive(Debug, Clone)]
pub struct Realized {
    pub parts: Ingredients,
    pub k: RevolutionBody,
    pub phi: PhiLambda,
    pub g_lambda: HomogeneousFunction,
}

pub fn realize(cert: &CounterexampleCertificate, cfg: &RunConfig) -> Result<Realized> {
    cfg.validate()?;
    check_dimension(cert.params.n)?;
    let parts = Ingredients::new(cert.params.n, cert.params.a, cert.params.cap_margin, cfg)?;
    let opts = PhiOptions {
        u_switch: cfg.tolerances.u_switch,
        equator_tolerance: cfg.tolerances.equator,
        ..PhiOptions::default()
    };
    let (k, phi) = body_for(&parts, cert.lambda0, cert.eps0, &opts)?;
    let g_lambda = make_g_lambda(&parts, cert.lambda0)?;
    Ok(Realized { parts, k, phi, g_lambda })
}

pub const PROFILE_COLUMNS: [&str; 6] = ["u", "rho_M", "phi_lambda", "rho_K", "g_lambda", "g_hat_lambda"];
pub const SECTION_COLUMNS: [&str; 4] = ["u_xi", "centroid_quadrature", "centroid_analytic", "rel_err"];

/// Rows for [`PROFILE_COLUMNS`] on a uniform grid.
pub fn profile_table(
    m: &RevolutionBody,
    phi: &SphereProfile,
    k: &RevolutionBody,
    g_lambda: &HomogeneousFunction,
    points: usize,
) -> Vec<[f64; 6]> {
    let grid = uniform_grid(points);
    let g_hat = g_lambda.attached_transform().expect("transform attached");
    let cols: Vec<Vec<f64>> = [&m.rho, phi, &k.rho, &g_lambda.profile, g_hat]
        .iter()
        .map(|p| {
            let mut v = vec![0.0; grid.len()];
            p.eval_many(&grid, &mut v);
            v
        })
        .collect();
    grid.iter()
        .enumerate()
        .map(|(i, &u)| [u, cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i]])
        .collect()
}

/// Rows for [`SECTION_COLUMNS`].
pub fn section_table(report: &SectionReport) -> Vec<[f64; 4]> {
    report
        .rows
        .iter()
        .map(|r| [r.u_xi, r.centroid_quadrature, r.centroid_analytic, r.rel_err])
        .collect()
}

/// `|S^{n-2}|`, used for reporting.
pub fn equator_area(n: usize) -> f64 {
    sphere_area(n - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_closed_form() {
        let u = negativity_threshold(5, 0.3).unwrap();
        assert!((u - ((1.0 - 2f64.sqrt() * 0.09) / 0.91).sqrt()).abs() < 1e-15);
        assert!((u - 0.97930).abs() < 1e-5);
        assert!(negativity_threshold(5, 0.9).is_err());
    }

    #[test]
    fn threshold_is_sign_change_of_transform() {
        for (n, a) in [(5, 0.3), (5, 0.4), (6, 0.5)] {
            let u = negativity_threshold(n, a).unwrap();
            let r = bisect(|x| Ok(revolution::rho_m_transform(n, a, x)), 0.0, 1.0, 0.0, 200).unwrap();
            assert!((r.root - u).abs() < 1e-12);
            assert!(revolution::rho_m_transform(n, a, 0.0) > 0.0);
        }
    }

    #[test]
    fn bump_values() {
        let g = make_g(5, 0.3, 0.99).unwrap();
        assert_eq!(g.eval(1.0), 0.0);
        assert_eq!(g.eval(-1.0), 0.0);
        assert_eq!(g.eval(0.0), 0.0);
        assert!((g.eval(0.995) - (-4.0f64).exp()).abs() < 1e-12);
        assert!(make_g(5, 0.3, 0.97).is_err());
    }

    #[test]
    fn h_values() {
        let h = make_h(5).unwrap();
        assert_eq!(h.profile.eval(1.0), 0.0);
        assert!((h.profile.eval(0.0) - 0.5).abs() < 1e-15);
        let t = h.attached_transform().unwrap();
        assert!((t.eval(1.0) - 15.0 * PI * PI).abs() < 1e-11);
        assert_eq!(t.eval(0.0), 0.0);
    }

    #[test]
    fn phi_of_square() {
        let g = SphereProfile::closed(5, Parity::Even, "u^2", |u| u * u).with_derivative(|u| 2.0 * u);
        let p = make_phi_lambda(&g, &PhiOptions::default()).unwrap();
        for u in [-0.7, -0.03, 0.0, 0.01, 0.05, 0.5] {
            assert!((p.profile.eval(u) - u).abs() < 1e-15, "u={u}");
        }
        assert!(p.branch_mismatch < 1e-14);
        let s = gegenbauer::expand(&g, 5, 6).unwrap();
        let p = make_phi_lambda(&SphereProfile::from_spectrum(s, "u^2"), &PhiOptions::default()).unwrap();
        for u in [-0.7, 0.0, 0.02, 0.5] {
            assert!((p.profile.eval(u) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_rejects_nonvanishing_equator() {
        let g = SphereProfile::closed(5, Parity::Even, "1+u^2", |u| 1.0 + u * u).with_derivative(|u| 2.0 * u);
        assert!(matches!(
            make_phi_lambda(&g, &PhiOptions::default()),
            Err(Error::Construction { .. })
        ));
    }

    #[test]
    fn bisection_self_test() {
        let r = bisect(|x| Ok(x - 0.3), 0.0, 1.0, 1e-13, 200).unwrap();
        assert!((r.root - 0.3).abs() < 1e-12);
        assert!(bisect(|x| Ok(x + 1.0), 0.0, 1.0, 1e-12, 10).is_err());
    }
}
