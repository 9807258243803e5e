//! Chords through the centroid of a planar convex body that the centroid bisects.
//!
//! With the centroid at the origin, a chord in direction `theta` is bisected iff
//! `f(theta) = rho^3(theta) - rho^3(theta + pi)` changes sign there.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

pub type Point = [f64; 2];

/// Convex polygon, counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarBody {
    vertices: Vec<Point>,
    /// Sample count for the sign scan of `f`.
    pub resolution: usize,
}

pub const DEFAULT_RESOLUTION: usize = 4096;

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn signed_area(v: &[Point]) -> f64 {
    let k = v.len();
    0.5 * (0..k)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % k]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

impl PlanarBody {
    /// Vertices in either orientation. Collinear runs are tolerated.
    pub fn from_polygon(mut vertices: Vec<Point>) -> Result<Self> {
        vertices.dedup();
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::Planar(format!("need at least 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Planar("non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        let scale = vertices
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::Planar(format!("degenerate polygon, area {area:.3e}")));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let k = vertices.len();
        let tol = 1e-12 * scale * scale;
        for i in 0..k {
            let c = cross(vertices[i], vertices[(i + 1) % k], vertices[(i + 2) % k]);
            if c < -tol {
                return Err(Error::Planar(format!("polygon not convex at vertex {}", (i + 1) % k)));
            }
        }
        // a convex turn sequence can still wind twice
        let mut turn = 0.0;
        for i in 0..k {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % k], vertices[(i + 2) % k]);
            let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            turn += (e1[0] * e2[1] - e1[1] * e2[0]).atan2(e1[0] * e2[0] + e1[1] * e2[1]);
        }
        if (turn - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::Planar(format!("boundary is not simple: total turning {turn:.6}")));
        }
        Ok(PlanarBody {
            vertices,
            resolution: DEFAULT_RESOLUTION,
        })
    }

    /// Boundary points `center + rho_i (cos theta_i, sin theta_i)`, joined as a polygon.
    pub fn from_radial(center: Point, samples: &[(f64, f64)]) -> Result<Self> {
        if samples.iter().any(|(_, r)| !(*r > 0.0)) {
            return Err(Error::Planar("radial samples must be positive".into()));
        }
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        let v = s
            .iter()
            .map(|(t, r)| [center[0] + r * t.cos(), center[1] + r * t.sin()])
            .collect();
        let body = PlanarBody::from_polygon(v)?;
        if !body.contains_strictly(center) {
            return Err(Error::Planar("declared centre is not interior".into()));
        }
        Ok(body)
    }

    /// Convex hull of a point cloud.
    pub fn hull(points: &[Point]) -> Result<Self> {
        PlanarBody::from_polygon(convex_hull(points))
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution.max(16);
        self
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn translated(&self, d: Point) -> PlanarBody {
        PlanarBody {
            vertices: self.vertices.iter().map(|p| [p[0] + d[0], p[1] + d[1]]).collect(),
            resolution: self.resolution,
        }
    }

    pub fn contains_strictly(&self, p: Point) -> bool {
        let k = self.vertices.len();
        (0..k).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % k], p) > 0.0)
    }

    /// Distance from the interior point `o` to the boundary along `theta`.
    pub fn radial(&self, o: Point, theta: f64) -> Result<f64> {
        let d = [theta.cos(), theta.sin()];
        let k = self.vertices.len();
        let ang = |p: Point| (p[1] - o[1]).atan2(p[0] - o[0]);
        // vertex angles about o increase around a convex polygon; locate the edge by bisection
        let a0 = ang(self.vertices[0]);
        let rel = |t: f64| (t - a0).rem_euclid(2.0 * PI);
        let target = rel(theta);
        let (mut lo, mut hi) = (0usize, k);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if rel(ang(self.vertices[mid])) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (a, b) = (self.vertices[lo], self.vertices[(lo + 1) % k]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let den = d[0] * e[1] - d[1] * e[0];
        let t = ((a[0] - o[0]) * e[1] - (a[1] - o[1]) * e[0]) / den;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Planar(format!(
                "ray at theta = {theta} misses the boundary (non-convex input?)"
            )));
        }
        Ok(t)
    }
}

/// Andrew's monotone chain, counterclockwise, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Shoelace centroid.
pub fn planar_centroid(body: &PlanarBody) -> Result<Point> {
    let v = &body.vertices;
    let k = v.len();
    let a = signed_area(v);
    if a.abs() <= f64::MIN_POSITIVE {
        return Err(Error::Planar("degenerate polygon".into()));
    }
    // shift to the first vertex to limit cancellation
    let o = v[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..k {
        let p = [v[i][0] - o[0], v[i][1] - o[1]];
        let q = [v[(i + 1) % k][0] - o[0], v[(i + 1) % k][1] - o[1]];
        let w = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    Ok([o[0] + cx / (6.0 * a), o[1] + cy / (6.0 * a)])
}

/// The body translated so its centroid is the origin.
pub fn recenter(body: &PlanarBody) -> Result<PlanarBody> {
    let c = planar_centroid(body)?;
    let out = body.translated([-c[0], -c[1]]);
    let c2 = planar_centroid(&out)?;
    if c2[0].hypot(c2[1]) > 1e-9 * out.vertices.iter().map(|p| p[0].hypot(p[1])).fold(1.0, f64::max) {
        return Err(Error::Planar(format!("recentering left centroid at {c2:?}")));
    }
    Ok(out)
}

/// `f(theta) = rho^3(theta) - rho^3(theta + pi)` about the origin.
pub fn chord_function(body: &PlanarBody, theta: f64) -> Result<f64> {
    let o = [0.0, 0.0];
    Ok(body.radial(o, theta)?.powi(3) - body.radial(o, theta + PI)?.powi(3))
}

/// Either every chord through the origin is bisected, or a finite count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChordCount {
    Finite(usize),
    All(SymmetricAll),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricAll {
    SymmetricAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordReport {
    pub count: ChordCount,
    /// Bisected directions in `[0, pi)`.
    pub directions: Vec<f64>,
    /// Set when fewer than three sign changes were resolved.
    pub resolution_warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordOptions {
    pub symmetric_tolerance: f64,
    pub theta_tolerance: f64,
    pub max_refinements: usize,
}

impl Default for ChordOptions {
    fn default() -> Self {
        ChordOptions {
            symmetric_tolerance: 1e-10,
            theta_tolerance: 1e-10,
            max_refinements: 6,
        }
    }
}

pub fn bisected_chords(body: &PlanarBody) -> Result<ChordReport> {
    bisected_chords_with(body, &ChordOptions::default())
}

/// Sign changes of `f` on `[0, pi)`, each refined by bisection.
pub fn bisected_chords_with(body: &PlanarBody, opts: &ChordOptions) -> Result<ChordReport> {
    let c = planar_centroid(body)?;
    let size = body.vertices.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    if c[0].hypot(c[1]) > 1e-9 * size.max(1.0) {
        return Err(Error::Planar(format!("body is not centred: centroid {c:?}")));
    }
    let mut n = body.resolution.max(16);
    for _ in 0..=opts.max_refinements {
        let h = PI / n as f64;
        // an offset keeps roots that sit on lattice directions off the sample points
        let start = 0.381_966_011_250_105_1 * h;
        let thetas: Vec<f64> = (0..=n).map(|i| start + i as f64 * h).collect();
        let f: Vec<f64> = thetas.iter().map(|&t| chord_function(body, t)).collect::<Result<_>>()?;
        let cube = thetas
            .iter()
            .map(|&t| Ok(body.radial([0.0, 0.0], t)?.powi(3).max(body.radial([0.0, 0.0], t + PI)?.powi(3))))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if fmax <= opts.symmetric_tolerance * cube {
            return Ok(ChordReport {
                count: ChordCount::All(SymmetricAll::SymmetricAll),
                directions: Vec::new(),
                resolution_warning: None,
            });
        }
        let floor = opts.symmetric_tolerance * cube;
        let mut brackets = Vec::new();
        let mut prev: Option<(usize, f64)> = None;
        for (i, &v) in f.iter().enumerate() {
            if v.abs() <= floor {
                continue;
            }
            if let Some((j, pv)) = prev {
                if pv.signum() != v.signum() {
                    brackets.push((j, i));
                }
            }
            prev = Some((i, v));
        }
        let crowded = brackets.windows(2).any(|w| w[1].1 - w[0].0 < 3);
        if crowded {
            n *= 2;
            continue;
        }
        let mut directions = Vec::with_capacity(brackets.len());
        for &(i, j) in &brackets {
            let (mut a, mut b) = (thetas[i], thetas[j]);
            let fa = f[i];
            while b - a > opts.theta_tolerance {
                let m = 0.5 * (a + b);
                let fm = chord_function(body, m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let d = (0.5 * (a + b)).rem_euclid(PI);
            directions.push(if PI - d <= 2.0 * opts.theta_tolerance { 0.0 } else { d });
        }
        directions.sort_by(f64::total_cmp);
        let resolution_warning = (directions.len() < 3).then(|| {
            format!(
                "only {} sign changes resolved at {} samples; at least 3 exist, so the scan is too coarse",
                directions.len(),
                n
            )
        });
        return Ok(ChordReport {
            count: ChordCount::Finite(directions.len()),
            directions,
            resolution_warning,
        });
    }
    Err(Error::Planar(format!(
        "sign changes of f closer than 3 samples even at {n} samples"
    )))
}

/// `(int_0^pi f cos, int_0^pi f sin)`, exact up to quadrature on each smooth piece.
pub fn centroid_moments(body: &PlanarBody) -> Result<Point> {
    let o = [0.0, 0.0];
    let mut breaks: Vec<f64> = body
        .vertices
        .iter()
        .flat_map(|p| {
            let a = p[1].atan2(p[0]);
            [a.rem_euclid(PI)]
        })
        .collect();
    breaks.push(0.0);
    breaks.push(PI);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (x, w) = Quadrature::legendre_on(16, 0.0, 1.0)?;
    let (mut mc, mut ms) = (0.0, 0.0);
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b - a <= 0.0 {
            continue;
        }
        for (xi, wi) in x.iter().zip(&w) {
            let t = a + (b - a) * xi;
            let f = body.radial(o, t)?.powi(3) - body.radial(o, t + PI)?.powi(3);
            mc += (b - a) * wi * f * t.cos();
            ms += (b - a) * wi * f * t.sin();
        }
    }
    Ok([mc, ms])
}

/// `x,y` vertex rows, or `theta,rho` radial rows about `center` (header decides).
pub fn read_body_csv(path: &Path, center: Point) -> Result<PlanarBody> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Planar(format!("short row {rec:?}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Planar(format!("bad number in {rec:?}: {e}")))
        };
        rows.push((parse(0)?, parse(1)?));
    }
    match (cols.first().map(String::as_str), cols.get(1).map(String::as_str)) {
        (Some("x"), Some("y")) => PlanarBody::from_polygon(rows.into_iter().map(|(x, y)| [x, y]).collect()),
        (Some("theta"), Some("rho")) => PlanarBody::from_radial(center, &rows),
        _ => Err(Error::Planar(format!(
            "expected header `x,y` or `theta,rho`, got `{}`",
            cols.join(",")
        ))),
    }
}

/// Equilateral triangle with centroid at the origin and a horizontal side.
pub fn equilateral_triangle() -> PlanarBody {
    let s3 = 3f64.sqrt();
    PlanarBody::from_polygon(vec![[-1.0, -1.0 / s3], [1.0, -1.0 / s3], [0.0, 2.0 / s3]]).expect("valid triangle")
}

/// Regular `k`-gon inscribed in the ellipse with semi-axes `a`, `b`.
pub fn ellipse(a: f64, b: f64, k: usize) -> Result<PlanarBody> {
    PlanarBody::from_polygon(
        (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                [a * t.cos(), b * t.sin()]
            })
            .collect(),
    )
}
