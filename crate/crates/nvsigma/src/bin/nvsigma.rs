//! Batch driver: scenario files in, verification reports and data dumps out.
//!
//! Three subcommands share one exit-code contract: 0 when every requested
//! check passes, 1 when a check or conservation bound fails, 2 on usage,
//! schema or configuration errors.  Complex values in every JSON product are
//! `[re, im]` pairs, and all randomized probes are seeded, so reports are
//! deterministic for a given invocation.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

use nvsigma::ba::bloch_wave;
use nvsigma::ecm::{
    branch_cubic, cmsing_value, fit_integrals, involution_residual, turning_constraints,
    ECMConfig, ECMIntegrals, TurningTable,
};
use nvsigma::elliptic::EllipticLattice;
use nvsigma::nv::{flow_rhs, flow_step};
use nvsigma::scenario::{run_suite, Scenario, Suite};
use nvsigma::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nvsigma",
    version,
    about = "Verification driver for torus Bloch waves, harmonic maps and elliptic spectral curves"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one named check suite against a scenario file.
    Verify(VerifyArgs),
    /// Integrate a potential under one flow and record the trajectory.
    Flow(FlowArgs),
    /// Emit the spectral-curve report of a particle configuration.
    Ecm(EcmArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run: instanton | bloch | flow | ecm | o3.
    #[arg(long)]
    suite: String,
    /// Scenario JSON file (schema "nv-sigma/1").
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Override the scenario series order.
    #[arg(long)]
    order: Option<usize>,
    /// Write the report JSON here in addition to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    /// Scenario JSON file with a potential section.
    #[arg(long)]
    scenario: PathBuf,
    /// Flow index; overrides the scenario flow section.
    #[arg(long)]
    n: Option<usize>,
    /// Runge-Kutta step size; overrides the scenario flow section.
    #[arg(long)]
    dt: Option<f64>,
    /// Step count; 0 echoes the initial record only.
    #[arg(long)]
    steps: Option<usize>,
    /// Conservation tolerance on the torus mean of the potential.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Trajectory file (JSON lines); stdout when omitted.  Density profiles
    /// are dumped as CSV next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EcmArgs {
    /// Particle data as one or two tokens: "z=0.3,-0.3" and optionally
    /// "rho=0,0"; omitted momenta mean a turning configuration.
    #[arg(long, num_args = 1..=2)]
    particles: Vec<String>,
    /// Integrals of motion as one token "I=0,0.5,0,0.1".
    #[arg(long)]
    integrals: Option<String>,
    /// Lattice modulus, e.g. "1i" or "0.3+1.1i".
    #[arg(long, default_value = "1i")]
    tau: String,
    /// Emit the derivative table of constraint degree 2n.
    #[arg(long)]
    check_turning: Option<usize>,
    /// Write the curve report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

/// Configuration-class failures exit 2; numeric failures during a run exit 1.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Io(_)
        | Error::BadConfig(_)
        | Error::BadShape(_)
        | Error::BadInstanton(_)
        | Error::ShapeMismatch(_) => 2,
        _ => 1,
    }
}

fn run() -> i32 {
    if let Ok(v) = std::env::var("NVSIGMA_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t >= 1 => {
                // A second initialization attempt in the same process is
                // harmless; the first pool wins.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: NVSIGMA_THREADS must be a positive integer, got '{v}'");
                return 2;
            }
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Flow(a) => cmd_flow(a),
        Cmd::Ecm(a) => cmd_ecm(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let mut sc = Scenario::load(&a.scenario)?;
    if let Some(g) = a.grid {
        sc.grid = g;
    }
    if let Some(s) = a.order {
        if s < 2 {
            return Err(Error::Parse("order must be at least 2".into()));
        }
        sc.order = s;
        sc.depth = sc.depth.min(s - 1);
    }
    let suite: Suite = a.suite.parse()?;
    let rep = run_suite(&sc, suite)?;
    print!("{rep}");
    println!("suite {suite}: {}", if rep.all_pass() { "PASS" } else { "FAIL" });
    if let Some(out) = &a.out {
        rep.save(out)?;
    }
    Ok(if rep.all_pass() { 0 } else { 1 })
}

fn cmd_flow(a: FlowArgs) -> Result<i32> {
    let sc = Scenario::load(&a.scenario)?;
    let defaults = sc.flow.clone().unwrap_or_default();
    let n = a.n.unwrap_or(defaults.n);
    let dt = a.dt.unwrap_or(defaults.dt);
    let steps = a.steps.unwrap_or(defaults.steps);
    if 2 * n + 1 > sc.depth {
        return Err(Error::BadConfig(format!(
            "flow index {n} needs scenario depth at least {}, got {}",
            2 * n + 1,
            sc.depth
        )));
    }
    let u0 = sc.potential_field()?;

    let mut sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    // Density profiles go next to the trajectory file; pure-stdout runs skip
    // them so piping stays clean.
    let profile_dir = match &a.out {
        Some(path) => {
            let dir = path.with_extension("profiles");
            std::fs::create_dir_all(&dir)?;
            Some(dir)
        }
        None => None,
    };

    let mut emit = |step: usize, t: f64, u: &nvsigma::torus::GridFunction| -> Result<()> {
        let rhs = flow_rhs(&bloch_wave(u, sc.order)?, n, sc.depth)?;
        let profiles = match &profile_dir {
            Some(dir) => {
                let path = dir.join(format!("step{step}_J{n}.csv"));
                rhs.f1.save_csv(&path)?;
                json!({ format!("J{n}"): path.to_string_lossy() })
            }
            None => serde_json::Value::Null,
        };
        let mean = u.mean();
        let record = json!({
            "t": t,
            "mean_u": [mean.re, mean.im],
            "J_n_profiles": profiles,
        });
        writeln!(sink, "{record}")?;
        Ok(())
    };

    let mut u = u0.clone();
    let mut drift: f64 = 0.0;
    emit(0, 0.0, &u)?;
    for k in 1..=steps {
        u = flow_step(&u, n, dt, sc.order, sc.depth)?;
        drift = drift.max((u.mean() - u0.mean()).norm());
        emit(k, k as f64 * dt, &u)?;
    }
    let pass = drift <= a.tol;
    let summary = json!({
        "summary": {
            "n": n,
            "dt": dt,
            "steps": steps,
            "mean_drift": drift,
            "tolerance": a.tol,
            "pass": pass,
        }
    });
    writeln!(sink, "{summary}")?;
    Ok(if pass { 0 } else { 1 })
}

fn pair(v: Complex64) -> serde_json::Value {
    json!([v.re, v.im])
}

fn pairs(vs: &[Complex64]) -> serde_json::Value {
    serde_json::Value::Array(vs.iter().map(|&v| pair(v)).collect())
}

/// Rows i of d_alpha^i d_p^j F(0,0) for i + j up to the table degree.
fn table_json(t: &TurningTable) -> serde_json::Value {
    let m = t.max_total();
    let rows: Vec<serde_json::Value> = (0..=m)
        .map(|i| serde_json::Value::Array((0..=m - i).map(|j| pair(t.entry(i, j))).collect()))
        .collect();
    serde_json::Value::Array(rows)
}

/// Split "key=v1,v2,..." into its key and parsed complex values.
fn parse_token(token: &str) -> Result<(String, Vec<Complex64>)> {
    let (key, rest) = token
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected key=values, got '{token}'")))?;
    let vals = rest
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<Complex64>()
                .map_err(|_| Error::Parse(format!("bad complex number '{s}' in '{token}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((key.to_string(), vals))
}

fn cmd_ecm(a: EcmArgs) -> Result<i32> {
    if !a.particles.is_empty() && a.integrals.is_some() {
        return Err(Error::BadConfig(
            "give exactly one of --particles and --integrals, not both".into(),
        ));
    }
    if a.particles.is_empty() && a.integrals.is_none() {
        return Err(Error::BadConfig(
            "give exactly one of --particles and --integrals".into(),
        ));
    }
    let tau: Complex64 = a
        .tau
        .parse()
        .map_err(|_| Error::Parse(format!("bad modulus '{}'", a.tau)))?;
    let lat = EllipticLattice::new(tau)?;

    let (ints, fit_residual) = if a.particles.is_empty() {
        let (key, vals) = parse_token(a.integrals.as_ref().unwrap())?;
        if key != "I" {
            return Err(Error::Parse(format!("--integrals expects I=..., got '{key}='")));
        }
        (ECMIntegrals::new(vals)?, None)
    } else {
        let mut z = None;
        let mut rho = None;
        for token in &a.particles {
            let (key, vals) = parse_token(token)?;
            match key.as_str() {
                "z" if z.is_none() => z = Some(vals),
                "rho" if rho.is_none() => rho = Some(vals),
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected or repeated particle token '{other}='"
                    )))
                }
            }
        }
        let z = z.ok_or_else(|| Error::Parse("--particles needs a z=... token".into()))?;
        let cfg = match rho {
            Some(r) => ECMConfig::new(&lat, z, r)?,
            None => ECMConfig::turning(&lat, z)?,
        };
        let (ints, residual) = fit_integrals(&lat, &cfg, -1)?;
        (ints, Some(residual))
    };

    let n = ints.n();
    let table = match a.check_turning {
        Some(deg) => Some(turning_constraints(&lat, &ints, deg)?),
        // A turning-compatible curve gets the first-order table by default.
        None if n % 2 == 0 && ints.odd_norm() < 1e-10 => {
            turning_constraints(&lat, &ints, 1).ok()
        }
        None => None,
    };
    let cubic = branch_cubic(&lat, &ints).ok();
    let cmsing = (1..=3)
        .map(|j| cmsing_value(&lat, &ints, j).map(pair))
        .collect::<Result<Vec<_>>>()?;

    let report = json!({
        "N": n,
        "I": pairs(ints.as_slice()),
        "fit_residual": fit_residual,
        "involution_residual": involution_residual(&lat, &ints)?,
        "turning_table": table.as_ref().map(table_json),
        "cubic": cubic.as_ref().map(|c| json!({
            "b": pairs(&c.b),
            "roots": pairs(&c.roots),
        })),
        "cmsing": cmsing,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(0)
}
