//! Command line front end: derived constants, radial profile solves,
//! Q(r) values, sweeps with optional SVG plots, and lower-bound
//! certifications with replayable traces.
//!
//! Exit codes: 0 success (or certified), 1 certification failed,
//! 2 usage error, 3 solver failure.

mod svg;

use clap::{Args, Parser, Subcommand};
use hyamabe::dimension::rat_f64;
use hyamabe::ode::Event;
use hyamabe::{
    boundary_constants, certify, compute_q, find_ground_state, integrate, sweep_q,
    CertificationTrace, CertifyControls, Dimensions, Error as HyError, IntegrationControls,
    OdeParams, QControls, QResult, ShootingControls, Verdict,
};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hyamabe",
    version,
    about = "Yamabe-type constants of hyperbolic-times-sphere products"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the derived constants of the (n, m) case
    Constants(ConstantsArgs),
    /// Integrate radial profiles and write trajectory CSVs
    Solve(SolveArgs),
    /// Compute Q(r) and print it as JSON
    Q(QArgs),
    /// Compute Q over a radius range into a CSV, optionally an SVG plot
    Sweep(SweepArgs),
    /// Certify Q(r) >= mu Q(0) on (0, 1] and write the proof trace
    Certify(CertifyArgs),
}

#[derive(Args)]
struct DimsArgs {
    /// Hyperbolic factor dimension (>= 2)
    #[arg(long)]
    n: u32,
    /// Sphere factor dimension (>= 2)
    #[arg(long)]
    m: u32,
}

impl DimsArgs {
    fn build(&self) -> Result<Dimensions, Fail> {
        Ok(Dimensions::new(self.n, self.m)?)
    }
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    dims: DimsArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Sphere radius-squared scale in (0, 1]
    #[arg(long, conflicts_with = "s")]
    r: Option<f64>,
    /// Product scalar curvature parameter; lambda = s / a
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Single initial value (default: ground-state search)
    #[arg(long, conflicts_with = "family")]
    alpha: Option<f64>,
    /// Comma-separated initial values; one CSV per value
    #[arg(long, value_delimiter = ',')]
    family: Option<Vec<f64>>,
    /// Directory for output CSVs
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Integration horizon
    #[arg(long)]
    t_max: Option<f64>,
    /// Relative step tolerance
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Absolute step tolerance
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Args)]
struct QArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Sphere radius-squared scale in (0, 1]
    #[arg(long)]
    r: f64,
    /// Relative bracket width for the ground-state search
    #[arg(long)]
    width_tol: Option<f64>,
    /// Also write the JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    dims: DimsArgs,
    #[arg(long)]
    r_min: f64,
    #[arg(long)]
    r_max: f64,
    /// Number of radii, evenly spaced over [r-min, r-max]
    #[arg(long)]
    steps: usize,
    /// Worker threads (default: HYAMABE_JOBS or the logical core count)
    #[arg(long)]
    jobs: Option<usize>,
    /// Prepend the stored r = 0 boundary constant as a first row
    #[arg(long)]
    include_boundary: bool,
    /// Also write a line plot of Q vs r
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Relative bracket width for the ground-state searches
    #[arg(long)]
    width_tol: Option<f64>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    dims: DimsArgs,
    /// Lower-bound fraction of Q(0) to certify
    #[arg(long, default_value_t = 0.99)]
    mu: f64,
    /// Override the stored flat-limit constant Q(0)
    #[arg(long)]
    q0: Option<f64>,
    /// Trace JSON path
    #[arg(long, default_value = "certify_trace.json")]
    out: PathBuf,
    /// Markdown report path
    #[arg(long, default_value = "certify_report.md")]
    report: PathBuf,
    /// Relative bracket width for the ground-state searches
    #[arg(long)]
    width_tol: Option<f64>,
}

/// A failed run: message plus process exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl From<HyError> for Fail {
    fn from(e: HyError) -> Self {
        let code = match e {
            HyError::InvalidDimensions { .. } | HyError::InvalidArgument(_) => 2,
            _ => 3,
        };
        Fail {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail {
        code: 2,
        msg: msg.into(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    std::fs::write(path, bytes).map_err(|e| Fail {
        code: 3,
        msg: format!("cannot write {}: {e}", path.display()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Constants(a) => cmd_constants(&a),
        Cmd::Solve(a) => cmd_solve(&a),
        Cmd::Q(a) => cmd_q(&a),
        Cmd::Sweep(a) => cmd_sweep(&a),
        Cmd::Certify(a) => cmd_certify(&a),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_constants(args: &ConstantsArgs) -> Result<ExitCode, Fail> {
    let dims = args.dims.build()?;
    let dc = dims.derived();
    println!("n            = {}", dims.n());
    println!("m            = {}", dims.m());
    println!("k = n + m    = {}", dims.k());
    println!("a            = {} ({})", dc.a, rat_f64(dc.a));
    println!("p            = {} ({})", dc.p, rat_f64(dc.p));
    println!("q            = {} ({})", dc.q, rat_f64(dc.q));
    println!("c            = {} ({})", dc.c, rat_f64(dc.c));
    println!("D            = {} ({})", dc.d, rat_f64(dc.d));
    println!(
        "vol(S^m)     = {}",
        hyamabe::dimension::sphere_volume(dims.m())?
    );
    println!(
        "Y(S^k)       = {}",
        hyamabe::dimension::sphere_yamabe(dims.k())?
    );
    println!("lambda floor = {}", dims.lambda_floor());
    println!(
        "regime boundary: sphere factor scalar curvature c = {} ({})",
        dc.c,
        rat_f64(dc.c)
    );
    match boundary_constants(&dims) {
        Ok(b) => println!("Q(0)         = {} (stored), Q(1) = {}", b.q0, b.q1),
        Err(HyError::UnknownQ0 { q1, .. }) => {
            println!("Q(0)         = unknown for this case, Q(1) = {q1}")
        }
        Err(e) => return Err(e.into()),
    }
    Ok(ExitCode::SUCCESS)
}

fn solve_lambda(args: &SolveArgs, dims: &Dimensions) -> Result<f64, Fail> {
    match (args.r, args.s) {
        (Some(r), None) => {
            if !(r > 0.0 && r <= 1.0) {
                return Err(usage(format!("--r must lie in (0, 1], got {r}")));
            }
            Ok(dims.lambda_of_r(r)?)
        }
        (None, Some(s)) => {
            if !s.is_finite() {
                return Err(usage("--s must be finite"));
            }
            Ok(dims.lambda_of_s(s))
        }
        (None, None) => Err(usage("exactly one of --r or --s is required")),
        (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
    }
}

fn log_events(tag: &str, traj: &hyamabe::Trajectory) {
    for ev in &traj.events {
        match *ev {
            Event::LocalMax { t, phi } => {
                println!("{tag}: local max at t={t:.6}, phi={phi:.6}")
            }
            Event::LocalMin { t, phi } => {
                println!("{tag}: local min at t={t:.6}, phi={phi:.6}")
            }
            Event::ZeroCrossing { t, dphi } => {
                println!("{tag}: crossed zero at t={t:.6} (slope {dphi:.6})")
            }
        }
    }
    if traj.first_crossing().is_none() {
        let last = traj.last();
        println!(
            "{tag}: no zero crossing up to t={:.6}, phi(end)={:.6e}",
            last.t, last.phi
        );
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<ExitCode, Fail> {
    let dims = args.dims.build()?;
    let lambda = solve_lambda(args, &dims)?;
    let q = rat_f64(dims.derived().q);
    let normalized = lambda > 0.0;
    let params = OdeParams::new(lambda, q, dims.n(), normalized)?;
    let mut controls = IntegrationControls::default();
    if let Some(t) = args.t_max {
        controls.t_max = t;
    }
    if let Some(t) = args.rel_tol {
        controls.rel_tol = t;
    }
    if let Some(t) = args.abs_tol {
        controls.abs_tol = t;
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Fail {
        code: 3,
        msg: format!("cannot create {}: {e}", args.out_dir.display()),
    })?;
    println!(
        "lambda = {lambda} ({} form)",
        if normalized { "normalized" } else { "plain" }
    );

    let write_traj = |name: String, traj: &hyamabe::Trajectory| -> Result<PathBuf, Fail> {
        let path = args.out_dir.join(name);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).expect("vec write cannot fail");
        write_file(&path, &buf)?;
        Ok(path)
    };

    let alphas: Vec<f64> = if let Some(fam) = &args.family {
        if fam.is_empty() {
            return Err(usage("--family needs at least one value"));
        }
        fam.clone()
    } else if let Some(a) = args.alpha {
        vec![a]
    } else {
        // Ground-state search at this lambda.
        let sc = ShootingControls {
            integration: controls,
            ..ShootingControls::default()
        };
        let gs = find_ground_state(&params, &sc)?;
        println!(
            "alpha_lambda = {} (bracket width {:.3e} rel, {} bisections)",
            gs.alpha,
            gs.width_rel(),
            gs.bisections
        );
        if normalized {
            let plain_alpha = gs.alpha * lambda.powf(1.0 / (q - 1.0));
            println!("alpha_lambda (plain scale) = {plain_alpha}");
        }
        log_events("ground state", &gs.trajectory);
        let path = write_traj("ground_state.csv".into(), &gs.trajectory)?;
        println!("wrote {}", path.display());
        return Ok(ExitCode::SUCCESS);
    };

    for &alpha in &alphas {
        let traj = integrate(&params, alpha, &controls)?;
        let tag = format!("alpha={alpha}");
        log_events(&tag, &traj);
        let path = write_traj(format!("profile_alpha_{alpha}.csv"), &traj)?;
        println!("{tag}: wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn q_json(dims: &Dimensions, res: &QResult) -> serde_json::Value {
    json!({
        "schema": 1,
        "n": dims.n(),
        "m": dims.m(),
        "r": res.r,
        "lambda": res.lambda,
        "normalized_form": res.normalized_form,
        "alpha_lambda": res.alpha_lambda,
        "q_value": res.q_value,
        "q_rel_uncertainty": res.q_rel_uncertainty,
        "tail_rel": res.tail_rel,
        "bisections": res.bisections,
        "bracket_width_rel": res.bracket_width_rel,
        "width_tol_used": res.width_tol_used,
        "norms": {
            "lp": res.norms.lp,
            "l2": res.norms.l2,
            "grad2": res.norms.grad2,
            "tail_bound_p": res.norms.tail_bound_p,
            "truncation_t": res.norms.truncation_t,
        },
    })
}

fn q_controls(width_tol: Option<f64>) -> QControls {
    let mut controls = QControls::default();
    if let Some(w) = width_tol {
        controls.shooting.width_tol = w;
    }
    controls
}

fn cmd_q(args: &QArgs) -> Result<ExitCode, Fail> {
    let dims = args.dims.build()?;
    let res = compute_q(&dims, args.r, &q_controls(args.width_tol))?;
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(&q_json(&dims, &res)).expect("static json")
    );
    print!("{text}");
    if let Some(path) = &args.out {
        write_file(path, text.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, Fail> {
    let dims = args.dims.build()?;
    if !(args.r_min > 0.0 && args.r_min <= args.r_max && args.r_max <= 1.0) {
        return Err(usage(format!(
            "need 0 < r-min <= r-max <= 1, got [{}, {}]",
            args.r_min, args.r_max
        )));
    }
    if args.steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    if args.steps == 1 && args.r_min != args.r_max {
        return Err(usage("--steps 1 needs r-min = r-max"));
    }
    let rs: Vec<f64> = (0..args.steps)
        .map(|i| {
            if i + 1 == args.steps {
                args.r_max
            } else {
                args.r_min
                    + (args.r_max - args.r_min) * i as f64 / (args.steps - 1).max(1) as f64
            }
        })
        .collect();
    let jobs = args.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }

    let results = sweep_q(&dims, &rs, &q_controls(args.width_tol), jobs);
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    if args.include_boundary {
        let b = boundary_constants(&dims)?;
        rows.push((0.0, b.q0, 0.0));
    }
    for res in results {
        let res = res?;
        rows.push((res.r, res.q_value, res.q_rel_uncertainty));
    }
    let mut csv = String::from("r,q_value,q_rel_uncertainty\n");
    for (r, qv, unc) in &rows {
        writeln!(csv, "{r:.16e},{qv:.16e},{unc:.16e}").expect("string write");
    }
    write_file(&args.out, csv.as_bytes())?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    if let Some(path) = &args.svg {
        let pts: Vec<(f64, f64)> = rows.iter().map(|&(r, qv, _)| (r, qv)).collect();
        let chart = svg::line_chart(
            &format!("Q(r) for n={}, m={}", dims.n(), dims.m()),
            "r",
            "Q",
            &pts,
        );
        write_file(path, chart.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn default_jobs() -> usize {
    if let Ok(v) = std::env::var("HYAMABE_JOBS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
        eprintln!("warning: ignoring invalid HYAMABE_JOBS={v:?}");
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn trace_json(trace: &CertificationTrace) -> serde_json::Value {
    let steps: Vec<serde_json::Value> = trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "i": s.i,
                "s": s.s,
                "q": s.q,
                "q_used": s.q_used,
                "q_uncertainty": s.q_uncertainty,
                "pass": s.pass,
            })
        })
        .collect();
    let (verdict, failed_step) = match trace.verdict {
        Verdict::Certified => ("certified", None),
        Verdict::Failed { step } => ("failed", Some(step)),
    };
    json!({
        "schema": 1,
        "n": trace.dims.n(),
        "m": trace.dims.m(),
        "mu": trace.mu,
        "q0": trace.q0,
        "threshold": trace.threshold,
        "exponent_num": trace.exponent.0,
        "exponent_den": trace.exponent.1,
        "verdict": verdict,
        "failed_step": failed_step,
        "final_s": trace.final_s,
        "steps": steps,
    })
}

fn trace_report(trace: &CertificationTrace) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Lower-bound certification");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Claim: Q(r) >= {} * Q(0) = {:.5} for every r in (0, 1], \
         where n = {}, m = {}, Q(0) = {:.5}.",
        trace.mu,
        trace.mu * trace.q0,
        trace.dims.n(),
        trace.dims.m(),
        trace.q0
    );
    let _ = writeln!(s);
    let verdict = match trace.verdict {
        Verdict::Certified => "CERTIFIED".to_string(),
        Verdict::Failed { step } => format!("FAILED at step {step}"),
    };
    let _ = writeln!(s, "- verdict: {verdict}");
    let _ = writeln!(s, "- steps: {}", trace.steps.len());
    let _ = writeln!(
        s,
        "- small-r hand-off threshold: {:.6} (reached: final s = {:.6})",
        trace.threshold, trace.final_s
    );
    let _ = writeln!(
        s,
        "- descent exponent: {}/{}",
        trace.exponent.0, trace.exponent.1
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "| i | s_i | Q(s_i) | Q used | rel. unc. | pass |");
    let _ = writeln!(s, "|--:|----:|-------:|-------:|----------:|:----:|");
    for st in &trace.steps {
        let _ = writeln!(
            s,
            "| {} | {:.8} | {:.5} | {:.5} | {:.2e} | {} |",
            st.i,
            st.s,
            st.q,
            st.q_used,
            st.q_uncertainty,
            if st.pass { "yes" } else { "no" }
        );
    }
    s
}

fn cmd_certify(args: &CertifyArgs) -> Result<ExitCode, Fail> {
    let dims = args.dims.build()?;
    let controls = CertifyControls {
        q: q_controls(args.width_tol),
        q0_override: args.q0,
        ..CertifyControls::default()
    };
    let trace = certify(&dims, args.mu, &controls)?;
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(&trace_json(&trace)).expect("static json")
    );
    write_file(&args.out, text.as_bytes())?;
    write_file(&args.report, trace_report(&trace).as_bytes())?;
    println!("wrote {} and {}", args.out.display(), args.report.display());
    match trace.verdict {
        Verdict::Certified => {
            println!(
                "certified: Q >= {} * Q(0) on (0, 1] in {} steps (final s = {:.6})",
                trace.mu,
                trace.steps.len(),
                trace.final_s
            );
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Failed { step } => {
            println!(
                "not certified: step {step} fell below the target (s = {:.6})",
                trace.final_s
            );
            Ok(ExitCode::from(1))
        }
    }
}
