use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use centroid_sections::config::RunConfig;
use centroid_sections::counterexample::{
    self, section_grid, section_identity_check, section_table, CounterexampleCertificate, PROFILE_COLUMNS,
    SECTION_COLUMNS,
};
use centroid_sections::io::{write_csv, write_json};
use centroid_sections::planar;
use centroid_sections::revolution::{self, BodyIntegrator, IntersectionOptions, RevolutionBody};
use centroid_sections::{Error, Result};

#[derive(Parser)]
#[command(name = "centroid-sections", version, about = "Convex bodies whose centroid lies on exactly one central section")]
struct Cli {
    /// Directory for all written files.
    #[arg(long, global = true, env = "CENTROID_SECTIONS_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build K, verify it and write certificate.json, profiles.csv, sections.csv.
    Construct(ConfigArgs),
    /// Re-run the checks for a certificate on a refined grid.
    Verify {
        certificate: PathBuf,
        /// Grid refinement factor for the section grid and quadrature.
        #[arg(long, default_value_t = 2)]
        refine: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fourier-sign test for being an intersection body.
    IntersectionTest {
        #[arg(long, value_enum, default_value_t = Shape::M)]
        body: Shape,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Parameter of M; the automatic choice when absent.
        #[arg(long)]
        a: Option<f64>,
        /// Axis of the ellipsoid.
        #[arg(long, default_value_t = 0.5)]
        b: f64,
    },
    /// Bisected chords through the centroid of a planar convex body.
    Planar {
        /// CSV with header `x,y` or `theta,rho`.
        #[arg(long, conflicts_with = "shape")]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        shape: Option<PlanarShape>,
        /// Centre of radial samples, `x,y`.
        #[arg(long, value_parser = parse_point, default_value = "0,0")]
        center: [f64; 2],
        #[arg(long, default_value_t = planar::DEFAULT_RESOLUTION)]
        resolution: usize,
        /// Output file name inside the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Plot data for a certificate: one `u,value` CSV per profile and `u_xi,centroid`.
    Plot {
        certificate: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    M,
    Ball,
    Ellipsoid,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanarShape {
    Triangle,
    Ellipse,
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// JSON file with a full or partial configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    cap_margin: Option<f64>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    bump_degree_cap: Option<usize>,
    #[arg(long)]
    max_eps_halvings: Option<usize>,
    #[arg(long)]
    alpha_grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override `name=value`, repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().replace('-', "_"), v))
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got `{s}`"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{t}`: {e}"));
    Ok([p(x)?, p(y)?])
}

impl ConfigArgs {
    fn resolve(&self, base: RunConfig) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_slice(&std::fs::read(p)?)?,
            None => base,
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(n, eps, cap_margin, quad_order, max_degree, bump_degree_cap, max_eps_halvings, alpha_grid, seed);
        if self.a.is_some() {
            cfg.a = self.a;
        }
        if !self.tol.is_empty() {
            let mut t = serde_json::to_value(&cfg.tolerances)?;
            for (k, v) in &self.tol {
                match t.get_mut(k) {
                    Some(slot) => *slot = json!(v),
                    None => return Err(Error::InvalidParameter(format!("unknown tolerance `{k}`"))),
                }
            }
            cfg.tolerances = serde_json::from_value(t)?;
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Construction { .. } => 3,
        Error::Verification(_) => 4,
        _ => 2,
    }
}

fn stage_of(e: &Error) -> &str {
    match e {
        Error::Construction { stage, .. } => stage,
        Error::Verification(_) => "verification",
        Error::UnsupportedDimension { .. } => "dimension",
        Error::InvalidParameter(_) | Error::Domain(_) => "input",
        _ => "io",
    }
}

fn now_unix() -> Option<u64> {
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn read_certificate(path: &Path) -> Result<CounterexampleCertificate> {
    let bytes = std::fs::read(path)?;
    let v: serde_json::Value = serde_json::from_slice(&bytes)?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some("v1") => Ok(serde_json::from_value(v)?),
        other => Err(Error::InvalidParameter(format!(
            "certificate schema mismatch: expected \"v1\", found {other:?}"
        ))),
    }
}

fn construct(out: &Path, args: &ConfigArgs) -> Result<u8> {
    let cfg = args.resolve(RunConfig::default())?;
    let c = match counterexample::construct(&cfg) {
        Ok(c) => c,
        Err(e) => {
            let diag = json!({
                "schema": "v1",
                "version": env!("CARGO_PKG_VERSION"),
                "stage": stage_of(&e),
                "error": e.to_string(),
                "config": cfg,
            });
            write_json(&out.join("failure.json"), &diag)?;
            return Err(e);
        }
    };
    let mut cert = c.certificate.clone();
    cert.metadata.created_unix = now_unix();
    write_json(&out.join("certificate.json"), &cert)?;
    write_csv(
        &out.join("profiles.csv"),
        &PROFILE_COLUMNS,
        counterexample::profile_table(&c.parts.m, &c.phi.profile, &c.k, &c.g_lambda, cfg.alpha_grid),
    )?;
    write_csv(&out.join("sections.csv"), &SECTION_COLUMNS, section_table(&c.sections))?;
    println!(
        "n = {}, a = {}, lambda0 = {:.12}, eps0 = {:.6e}, kappa_min(K) = {:.6e}, min section margin = {:.6e}",
        cert.params.n, cert.params.a, cert.lambda0, cert.eps0, cert.kappa_min_k, cert.min_section_margin
    );
    if cert.valid {
        println!("certificate VALID -> {}", out.join("certificate.json").display());
        Ok(0)
    } else {
        for f in &cert.failures {
            println!("FAIL {f}");
        }
        Ok(4)
    }
}

fn verify(out: &Path, path: &Path, refine: usize, args: &ConfigArgs) -> Result<u8> {
    let cert = read_certificate(path)?;
    let mut cfg = args.resolve(cert.config.clone())?;
    let r = refine.max(1);
    cfg.alpha_grid = (cfg.alpha_grid - 1) * r + 1;
    cfg.quad_order *= r;
    let report = counterexample::verify_certificate(&cert, &cfg)?;
    for c in &report.checks {
        println!(
            "{} {}: value {:.6e}, limit {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    write_json(
        &out.join("verify_report.json"),
        &json!({ "schema": "v1", "version": env!("CARGO_PKG_VERSION"), "config": cfg, "report": report }),
    )?;
    Ok(if report.pass { 0 } else { 4 })
}

fn intersection_test(shape: Shape, n: usize, a: Option<f64>, b: f64) -> Result<u8> {
    let body = match shape {
        Shape::M => {
            if n < 5 {
                return Err(Error::UnsupportedDimension {
                    n,
                    reason: "M is defined for n >= 5 only".into(),
                });
            }
            let a = match a {
                Some(a) => a,
                None => counterexample::auto_a(n, RunConfig::default().tolerances.convexity_margin)?.0,
            };
            revolution::make_body_m(n, a)?
        }
        Shape::Ball => RevolutionBody::unit_ball(n)?,
        Shape::Ellipsoid => RevolutionBody::ellipsoid(n, b)?,
    };
    let r = revolution::intersection_body_test_with(&body, &IntersectionOptions::default())?;
    let c = centroid_sections::fourier::euclidean_constant(n);
    if r.is_intersection {
        println!("intersection body (transform >= 0), min {:.6e} at u = {:.6}", r.min_value, r.argmin_u);
    } else {
        println!(
            "NOT an intersection body, min {:.6e} = {:.9} c_{n} at u = {:.6}",
            r.min_value,
            r.min_value / c,
            r.argmin_u
        );
    }
    println!("{}", serde_json::to_string(&r)?);
    Ok(0)
}

fn planar_cmd(
    out: &Path,
    input: Option<&Path>,
    shape: Option<PlanarShape>,
    center: [f64; 2],
    resolution: usize,
    output: Option<&Path>,
) -> Result<u8> {
    let body = match (input, shape) {
        (Some(p), _) => planar::read_body_csv(p, center)?,
        (None, Some(PlanarShape::Triangle)) | (None, None) => planar::equilateral_triangle(),
        (None, Some(PlanarShape::Ellipse)) => planar::ellipse(2.0, 1.0, 1024)?,
    };
    let body = planar::recenter(&body)?.with_resolution(resolution);
    let report = planar::bisected_chords(&body)?;
    let v = json!({ "count": report.count, "directions": report.directions });
    println!("{v}");
    if let Some(w) = &report.resolution_warning {
        eprintln!("warning: {w}");
    }
    if let Some(o) = output {
        write_json(&out.join(o), &v)?;
    }
    Ok(if report.resolution_warning.is_some() { 4 } else { 0 })
}

fn plot(out: &Path, path: &Path, args: &ConfigArgs) -> Result<u8> {
    let cert = read_certificate(path)?;
    let cfg = args.resolve(cert.config.clone())?;
    let r = counterexample::realize(&cert, &cfg)?;
    let rows = counterexample::profile_table(&r.parts.m, &r.phi.profile, &r.k, &r.g_lambda, cfg.alpha_grid);
    for (j, name) in PROFILE_COLUMNS.iter().enumerate().skip(1) {
        write_csv(&out.join(format!("{name}.csv")), &["u", "value"], rows.iter().map(|row| [row[0], row[j]]))?;
    }
    let integrator = BodyIntegrator::for_body(&r.k, cfg.quad_order)?;
    let g = counterexample::realized_g_lambda(&r.parts, cert.lambda0);
    let sections = section_identity_check(&r.k, &g, cert.eps0, &integrator, &section_grid(cfg.alpha_grid))?;
    write_csv(
        &out.join("section_centroid.csv"),
        &["u_xi", "centroid"],
        sections.rows.iter().map(|s| [s.u_xi, s.centroid_quadrature]),
    )?;
    println!("wrote {} profile CSVs and section_centroid.csv ({} rows each) to {}", PROFILE_COLUMNS.len() - 1, cfg.alpha_grid, out.display());
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let out = cli.out_dir.as_path();
    match &cli.cmd {
        Cmd::Construct(args) => construct(out, args),
        Cmd::Verify {
            certificate,
            refine,
            config,
        } => verify(out, certificate, *refine, config),
        Cmd::IntersectionTest { body, n, a, b } => intersection_test(*body, *n, *a, *b),
        Cmd::Planar {
            input,
            shape,
            center,
            resolution,
            output,
        } => planar_cmd(out, input.as_deref(), *shape, *center, *resolution, output.as_deref()),
        Cmd::Plot { certificate, config } => plot(out, certificate, config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
