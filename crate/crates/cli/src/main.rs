use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use legendrian_core::contact::{kernel_basis, legendrian_residual, legendrize};
use legendrian_core::flat::{flat_embedding, taylor_truncate, FlatPlaneSpec};
use legendrian_core::flows::{
    contact_hamiltonian_field, flow, legendrian_path_approx, parse_poly, verify_contactomorphism,
};
use legendrian_core::geometry::{boundary_push, embedding_check, offset_target, MetricGrid, PushParams};
use legendrian_core::io::{
    curve_from_json, curve_to_json, family_from_json, path_from_csv, path_to_csv, projection_names, projection_traces,
    traces_to_csv, traces_to_svg, Metadata, Part, Projection,
};
use legendrian_core::period::{period, Cycle};
use legendrian_core::rh::{rh_approximate, RhOptions};
use legendrian_core::{Complex64, ContactPoint, CurveJet, Domain, Error, HolomorphicCurve};

#[derive(Parser)]
#[command(name = "legendrian", version, about = "Holomorphic Legendrian curves in C^(2n+1)")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replace z by the Legendrian primitive.
    Legendrize {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Approximate a boundary family by a Legendrian disk.
    Rh {
        center: PathBuf,
        family: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 0.8)]
        rho0: f64,
        #[arg(long, default_value_t = 4096)]
        max_n: usize,
        #[arg(long, default_value_t = 256)]
        boundary_samples: usize,
        #[arg(long, default_value_t = 256)]
        target_samples: usize,
    },
    /// Taylor truncation of the flat embedding in a plane.
    Flat {
        /// a1,b1,...,an,bn
        #[arg(long)]
        plane: String,
        /// x1,y1,...,xn,yn,z (default: origin)
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 20)]
        truncate: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Legendrian, immersion, injectivity and period checks.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Exit with status 3 when a check fails.
        #[arg(long)]
        strict: bool,
    },
    /// One boundary push step (n = 1).
    Push(PushArgs),
    /// Legendrian approximation of a sampled path.
    Path {
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long)]
        match_ends: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Flow of the contact Hamiltonian field of a polynomial.
    Flow {
        /// Polynomial in x1, y1, ..., z, e.g. "x1*y1 + (1+2i)*z^2".
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// x1,y1,...,z
        #[arg(long)]
        point: String,
        #[arg(long)]
        tau: String,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        /// Also measure contact preservation along the kernel basis.
        #[arg(long)]
        check: bool,
    },
    /// Projection plot (SVG) and raw samples (CSV).
    Plot {
        input: PathBuf,
        /// front | lagrange | "pair i,j"
        #[arg(long, default_value = "front")]
        proj: String,
        /// re | im
        #[arg(long, default_value = "re")]
        part: String,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(short, long)]
        out: PathBuf,
        /// CSV output (default: the SVG path with extension csv)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PushArgs {
    curve: PathBuf,
    /// Target boundary values taken from another curve file.
    #[arg(long, conflicts_with = "offset")]
    target: Option<PathBuf>,
    /// Target = f + offset on the boundary, as x,y,z.
    #[arg(long)]
    offset: Option<String>,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 0.12)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    d: f64,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 0.004)]
    rh_eps: f64,
    #[arg(long, default_value_t = 64)]
    grid_r: usize,
    #[arg(long, default_value_t = 256)]
    grid_theta: usize,
    #[arg(short, long)]
    out: PathBuf,
}

struct Exit {
    code: u8,
    msg: String,
}

type Res<T> = Result<T, Exit>;

fn input_error(msg: impl Into<String>) -> Exit {
    Exit { code: 2, msg: msg.into() }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        use Error::*;
        let code = match e {
            NonFinite { .. }
            | ZeroInPolarPart
            | IndexOutOfRange { .. }
            | DimensionMismatch { .. }
            | InvalidDomain(_)
            | InvalidArgument(_)
            | CycleOutsideDomain(_)
            | FamilyMismatch(_) => 2,
            NonzeroResidue { .. }
            | ConstantPairedComponent { .. }
            | NonvanishingPeriod { .. }
            | CenterNotLegendrian { .. }
            | PoleNotCleared { .. }
            | DegeneratePlane { .. }
            | NormalDegenerate { .. }
            | PreconditionViolated(_)
            | BasisDegenerate(_)
            | DerivativeNotLegendrianAtEndpoint { .. }
            | DominationFailed { .. }
            | SingularMatrix => 3,
            NotConverged { .. } | Diverged { .. } | ToleranceUnreachable { .. } => 4,
            PushBoundViolated { .. } => 5,
        };
        Exit { code, msg: e.to_string() }
    }
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_curve(path: &Path) -> Res<CurveJet> {
    curve_from_json(&read(path)?).map(|(f, _)| f).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn complex(s: &str) -> Res<Complex64> {
    let p = parse_poly(s, 1).map_err(|e| input_error(format!("{s:?}: {e}")))?;
    let mut value = Complex64::default();
    for (e, c) in p.terms() {
        if e.iter().any(|&k| k != 0) {
            return Err(input_error(format!("{s:?} is not a constant")));
        }
        value += c;
    }
    Ok(value)
}

fn complex_list(s: &str) -> Res<Vec<Complex64>> {
    s.split(',').map(|t| complex(t.trim())).collect()
}

fn meta(provenance: &str, tolerances: &[(&str, f64)]) -> Metadata {
    Metadata {
        provenance: Some(provenance.into()),
        tolerances: tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn cmd_legendrize(input: &Path, out: &Path) -> Res<()> {
    let f = read_curve(input)?;
    let before = legendrian_residual(&f, 256);
    let g = legendrize(&f)?;
    let after = legendrian_residual(&g, 256);
    write(out, &curve_to_json(&g, &meta("legendrize", &[])))?;
    println!("residual before {before:.1e}");
    println!("residual after {after:.1e}");
    Ok(())
}

fn cmd_rh(center: &Path, family: &Path, out: &Path, opts: RhOptions) -> Res<()> {
    let f = read_curve(center)?;
    let fam = family_from_json(&f, &read(family)?).map_err(|e| match e {
        Error::CenterNotLegendrian { .. } => Exit::from(e),
        e => input_error(format!("{}: {e}", family.display())),
    })?;
    let sol = rh_approximate(&f, &fam, &opts)?;
    let r = &sol.report;
    write(out, &curve_to_json(&sol.g, &meta("rh", &[("eps", opts.eps), ("rho_prime", sol.rho_prime)])))?;
    println!("N {}", r.n);
    println!("rho' {}", r.rho_prime);
    println!("defect bound {:.3e}", r.defect_bound);
    println!("sup (i) {:.3e}", r.sup_i);
    println!("sup (ii) {:.3e}", r.sup_ii);
    println!("sup (iii) {:.3e}", r.sup_iii);
    if let Some(c1) = r.sup_c1 {
        println!("sup C1 on sector {c1:.3e}");
    }
    println!("residual {:.3e}", r.residual);
    Ok(())
}

fn cmd_flat(plane: &str, point: Option<&str>, truncate: usize, radius: f64, out: &Path) -> Res<()> {
    let coeffs = complex_list(plane)?;
    if coeffs.is_empty() || coeffs.len() % 2 != 0 {
        return Err(input_error("--plane needs a1,b1,...,an,bn"));
    }
    let n = coeffs.len() / 2;
    let a = coeffs.iter().step_by(2).copied().collect();
    let b = coeffs.iter().skip(1).step_by(2).copied().collect();
    let p0 = match point {
        Some(s) => ContactPoint::new(complex_list(s)?)?,
        None => ContactPoint::origin(n),
    };
    let spec = FlatPlaneSpec::new(a, b, p0)?;
    let emb = flat_embedding(&spec);
    let (jet, bound) = taylor_truncate(&emb, truncate, radius);
    let residual = legendrian_residual(&jet, 256);
    write(out, &curve_to_json(&jet, &meta("flat", &[("taylor_bound", bound)])))?;
    println!("degree {truncate} radius {radius}");
    println!("taylor bound {bound:.3e}");
    println!("residual {residual:.3e}");
    Ok(())
}

fn cmd_verify(input: &Path, samples: usize, strict: bool) -> Res<()> {
    let f = read_curve(input)?;
    let scale = 1.0 + f.l1_norm();
    let residual = legendrian_residual(&f, samples.max(8));
    let emb = embedding_check(&f, f.domain(), samples.max(100), None)?;
    let mut all = true;
    let mut line = |name: &str, value: f64, ok: bool| {
        all &= ok;
        println!("{name} {value:.3e} {}", status(ok));
    };
    line("legendrian residual", residual, residual <= 1e-10 * scale);
    line("immersion margin", emb.min_speed, emb.min_speed > 1e-9);
    line("injectivity margin", emb.min_gap, emb.min_gap > 1e-9);
    if let Domain::Annulus { inner, outer } = f.domain() {
        let p = period(&f, &Cycle::circle((inner * outer).sqrt()))?;
        line("period", p.norm(), p.norm() <= 1e-10 * scale);
        let z = f.z().residue();
        line("z period", (z * std::f64::consts::TAU).norm(), z.norm() <= 1e-12 * scale);
    }
    if strict && !all {
        return Err(Exit { code: 3, msg: "verification failed".into() });
    }
    Ok(())
}

fn cmd_push(args: &PushArgs, seed: u64) -> Res<()> {
    let f = read_curve(&args.curve)?;
    if f.n() != 1 {
        return Err(input_error("push works on curves with n = 1"));
    }
    let k = args.samples;
    let target: Vec<[Complex64; 3]> = match (&args.target, &args.offset) {
        (Some(path), None) => {
            let g = read_curve(path)?;
            (0..k)
                .map(|j| {
                    let p = g.eval(Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / k as f64));
                    [p[0], p[1], p[2]]
                })
                .collect()
        }
        (None, Some(s)) => {
            let o = complex_list(s)?;
            let o: [Complex64; 3] = o.try_into().map_err(|_| input_error("--offset needs x,y,z"))?;
            offset_target(&f, o, k)
        }
        _ => return Err(input_error("give exactly one of --target or --offset")),
    };
    let params = PushParams {
        mu: args.mu,
        delta: args.delta,
        d: args.d,
        m: args.m,
        rh: RhOptions { eps: args.rh_eps, ..RhOptions::default() },
        grid: MetricGrid { n_r: args.grid_r, n_theta: args.grid_theta },
        seed,
        ..PushParams::default()
    };
    let (g, r) = boundary_push(&f, &target, &params)?;
    write(&args.out, &curve_to_json(&g, &meta("push", &[("mu", args.mu), ("delta", args.delta)])))?;
    println!("arcs {} N {} rho' {}", r.arcs, r.rh.n, r.rh.rho_prime);
    println!("boundary distance {:.5} bound {:.5} margin {:.5}", r.measured, r.bound, r.margin);
    println!("intrinsic distance {:.4} -> {:.4} gain {:.4}", r.dist_before, r.dist_after, r.delta_gain);
    if r.ineffective {
        println!("push ineffective: no distance gain");
    }
    println!("residual {:.3e}", r.residual);
    Ok(())
}

fn cmd_path(input: &Path, eps: f64, match_ends: bool, out: &Path, seed: u64) -> Res<()> {
    let gamma = path_from_csv(&read(input)?).map_err(|e| input_error(format!("{}: {e}", input.display())))?;
    let (lambda, r) = legendrian_path_approx(&gamma, eps, match_ends, seed)?;
    write(out, &path_to_csv(&lambda))?;
    println!("samples {} pieces {} attempts {} max turns {}", lambda.len(), r.pieces, r.attempts, r.max_turns);
    println!("deviation {:.3e} (xy {:.3e})", r.deviation, r.xy_deviation);
    println!("residual {:.3e}", r.residual);
    println!("injective {} (gap {:.3e})", r.injective, r.min_gap);
    Ok(())
}

fn cmd_flow(h: &str, n: usize, point: &str, tau: &str, steps: usize, check: bool) -> Res<()> {
    let h = parse_poly(h, n).map_err(|e| input_error(e.to_string()))?;
    let v = contact_hamiltonian_field(&h);
    let p0 = ContactPoint::new(complex_list(point)?)?;
    let tau = complex(tau)?;
    let r = flow(&v, &p0, tau, steps)?;
    let coords: Vec<String> = r.point.coords().iter().map(|c| format!("{c}")).collect();
    println!("point {}", coords.join(", "));
    println!("error estimate {:.3e}", r.error_estimate);
    if check {
        let rep = verify_contactomorphism(&v, &p0, tau, &kernel_basis(p0.coords()), steps)?;
        println!("contact residual {:.3e}", rep.residual);
    }
    Ok(())
}

fn cmd_plot(input: &Path, proj: &str, part: &str, samples: usize, out: &Path, csv: Option<&Path>) -> Res<()> {
    let f = read_curve(input)?;
    let proj = Projection::parse(proj).map_err(|e| input_error(e.to_string()))?;
    let part = Part::parse(part).map_err(|e| input_error(e.to_string()))?;
    let traces = projection_traces(&f, f.domain(), proj, part, samples).map_err(|e| input_error(e.to_string()))?;
    let (a, b) = projection_names(f.n(), proj, part)?;
    write(out, &traces_to_svg(&traces))?;
    let csv_path = csv.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("csv"));
    write(&csv_path, &traces_to_csv(&traces, (&a, &b)))?;
    println!("wrote {} and {}", out.display(), csv_path.display());
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    match &cli.cmd {
        Cmd::Legendrize { input, out } => cmd_legendrize(input, out),
        Cmd::Rh { center, family, out, eps, rho0, max_n, boundary_samples, target_samples } => {
            let opts = RhOptions {
                eps: *eps,
                rho0: *rho0,
                n_max: *max_n,
                boundary_samples: *boundary_samples,
                target_samples: *target_samples,
                ..RhOptions::default()
            };
            cmd_rh(center, family, out, opts)
        }
        Cmd::Flat { plane, point, truncate, radius, out } => cmd_flat(plane, point.as_deref(), *truncate, *radius, out),
        Cmd::Verify { input, samples, strict } => cmd_verify(input, *samples, *strict),
        Cmd::Push(args) => cmd_push(args, cli.seed),
        Cmd::Path { input, eps, match_ends, out } => cmd_path(input, *eps, *match_ends, out, cli.seed),
        Cmd::Flow { h, n, point, tau, steps, check } => cmd_flow(h, *n, point, tau, *steps, *check),
        Cmd::Plot { input, proj, part, samples, out, csv } => {
            cmd_plot(input, proj, part, *samples, out, csv.as_deref())
        }
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
