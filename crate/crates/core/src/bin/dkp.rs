//! Command-line frontend: state generation, sign-table dumps, spectral-curve
//! extraction, flow runs, kernel-vector checks, and a consolidated property
//! check suite.
//!
//! Exit codes: 0 success, 1 failed check or numerical failure, 2 usage error,
//! 3 invalid input data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dkp_core::{
    admissible_support, beta_zero_product, build_kappa, build_phi, build_rho, curve_points_at_beta,
    curve_polynomial_with_threshold, det_w, euclid_case, expected_genus, flow_rhs, integrate,
    kernel_vector, load_state, newton_genus, random_state_default, recurrence_residual, save_state,
    special_state, state_to_json, Complex64, Error, LatticeState, Result, DEFAULT_THRESHOLD_FACTOR,
};

#[derive(Parser)]
#[command(
    name = "dkp",
    version,
    about = "Discrete lattice system on a coprime torus"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random lattice state and write it as JSON.
    Random {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "M")]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the deterministic three-term-curve state instead of a random one.
        #[arg(long, conflicts_with = "seed")]
        special: bool,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the sign tables κ, ρ, φ for a torus size.
    Kappa {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "M")]
        m: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Extract the spectral-curve polynomial of a state.
    Curve {
        /// State file produced by `random` or `flow --final-state`.
        state: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Relative cutoff below which a coefficient counts as structurally zero.
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_FACTOR)]
        threshold_factor: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the flow and record conservation drift.
    Flow {
        state: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Drift series CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the integrated state here as JSON.
        #[arg(long)]
        final_state: Option<PathBuf>,
    },
    /// Run the structural property checks on a state.
    Check { state: PathBuf },
    /// Solve for the curve points over one β and check their kernel vectors.
    Eigen {
        state: PathBuf,
        /// β as `re,im`.
        #[arg(long, value_parser = parse_pair)]
        beta: (f64, f64),
    },
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (re, im) = s.split_once(',').ok_or("expected re,im")?;
    let re = re
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad real part: {e}"))?;
    let im = im
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad imaginary part: {e}"))?;
    Ok((re, im))
}

/// 17-significant-digit float, valid as a JSON number.
fn jf(x: f64) -> String {
    format!("{x:.16e}")
}

fn jc(z: Complex64) -> String {
    format!("{{\"re\":{},\"im\":{}}}", jf(z.re), jf(z.im))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Fail on an unwritable output location before any computation runs.
fn validate_out(path: Option<&Path>) -> Result<()> {
    if let Some(path) = path {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() && !parent.is_dir() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("output directory {} does not exist", parent.display()),
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("DKP_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidTorus { .. }
                | Error::InvalidEntry { .. }
                | Error::MalformedState(_)
                | Error::UnsupportedVersion(_)
                | Error::Io(_)
                | Error::Parse(_)
                | Error::DimensionMismatch { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Random {
            n,
            m,
            seed,
            special,
            out,
        } => {
            validate_out(out.as_deref())?;
            let state = if special {
                special_state(n, m)?
            } else {
                random_state_default(n, m, seed)?
            };
            match out {
                Some(path) => save_state(&state, &path)?,
                None => println!("{}", state_to_json(&state)),
            }
            Ok(0)
        }
        Cmd::Kappa { n, m, format } => {
            cmd_kappa(n, m, format)?;
            Ok(0)
        }
        Cmd::Curve {
            state,
            format,
            threshold_factor,
            out,
        } => {
            validate_out(out.as_deref())?;
            let state = load_state(&state)?;
            cmd_curve(&state, format, threshold_factor, out.as_deref())
        }
        Cmd::Flow {
            state,
            dt,
            steps,
            record_every,
            out,
            final_state,
        } => {
            validate_out(out.as_deref())?;
            validate_out(final_state.as_deref())?;
            let state = load_state(&state)?;
            cmd_flow(
                &state,
                dt,
                steps,
                record_every,
                out.as_deref(),
                final_state.as_deref(),
            )
        }
        Cmd::Check { state } => {
            let state = load_state(&state)?;
            cmd_check(&state)
        }
        Cmd::Eigen { state, beta } => {
            let state = load_state(&state)?;
            cmd_eigen(&state, Complex64::new(beta.0, beta.1))
        }
    }
}

fn cmd_kappa(n: usize, m: usize, format: Format) -> Result<()> {
    let kappa = build_kappa(n, m)?;
    let rho = build_rho(n, m)?;
    let phi = build_phi(n, m)?;
    match format {
        Format::Csv => {
            let mut text = String::from("n,m,kappa,rho,phi\n");
            for mm in 0..m as i64 {
                for nn in 0..n as i64 {
                    writeln!(
                        text,
                        "{nn},{mm},{},{},{}",
                        kappa.at(nn, mm),
                        rho.at(nn, mm),
                        phi.at(nn, mm)
                    )
                    .unwrap();
                }
            }
            print!("{text}");
        }
        Format::Json => {
            let mut entries = Vec::new();
            for mm in 0..m as i64 {
                for nn in 0..n as i64 {
                    entries.push(format!(
                        "{{\"n\":{nn},\"m\":{mm},\"kappa\":{},\"rho\":{},\"phi\":{}}}",
                        kappa.at(nn, mm),
                        rho.at(nn, mm),
                        phi.at(nn, mm)
                    ));
                }
            }
            println!(
                "{{\"n\":{n},\"m\":{m},\"euclid_case\":\"{}\",\"entries\":[{}]}}",
                euclid_case(n, m)?,
                entries.join(",")
            );
        }
    }
    Ok(())
}

fn cmd_curve(
    state: &LatticeState,
    format: Format,
    threshold_factor: f64,
    out: Option<&Path>,
) -> Result<u8> {
    let curve = curve_polynomial_with_threshold(state, threshold_factor)?;
    let (polygon, genus) = newton_genus(&curve);
    if !polygon.has_generic_support() {
        eprintln!(
            "warning: non-generic support ({} of {} admissible points); \
             the genus count applies to the generic stratum only",
            curve.support().len(),
            admissible_support(curve.n(), curve.m()).len()
        );
    }
    match format {
        Format::Csv => {
            let mut text = String::from("i,j,re,im\n");
            for (i, j) in admissible_support(curve.n(), curve.m()) {
                let c = curve.coeff(i, j);
                writeln!(text, "{i},{j},{},{}", jf(c.re), jf(c.im)).unwrap();
            }
            emit(out, &text)?;
        }
        Format::Json => {
            let coefficients: Vec<String> = admissible_support(curve.n(), curve.m())
                .into_iter()
                .map(|(i, j)| {
                    let c = curve.coeff(i, j);
                    format!(
                        "{{\"i\":{i},\"j\":{j},\"re\":{},\"im\":{}}}",
                        jf(c.re),
                        jf(c.im)
                    )
                })
                .collect();
            let pairs = |pts: &[(i64, i64)]| -> String {
                let body: Vec<String> = pts.iter().map(|(i, j)| format!("[{i},{j}]")).collect();
                format!("[{}]", body.join(","))
            };
            let text = format!(
                "{{\"n\":{},\"m\":{},\"threshold\":{},\"discarded_max\":{},\
                 \"generic_support\":{},\"coefficients\":[{}],\"support\":{},\
                 \"hull\":{},\"interior_count\":{},\"genus_newton\":{},\"genus_expected\":{}}}\n",
                curve.n(),
                curve.m(),
                jf(curve.threshold()),
                jf(curve.discarded_max()),
                polygon.has_generic_support(),
                coefficients.join(","),
                pairs(&curve.support()),
                pairs(polygon.hull()),
                polygon.interior_count(),
                genus,
                expected_genus(curve.n(), curve.m()),
            );
            emit(out, &text)?;
        }
    }
    Ok(0)
}

fn cmd_flow(
    state: &LatticeState,
    dt: f64,
    steps: usize,
    record_every: usize,
    out: Option<&Path>,
    final_state: Option<&Path>,
) -> Result<u8> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::MalformedState(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if steps < 1 || record_every < 1 {
        return Err(Error::MalformedState(
            "steps and record-every must be at least 1".into(),
        ));
    }
    let (end, report) = integrate(state, dt, steps, record_every)?;
    let mut text = String::from("step,time,max_rel_drift");
    for (i, j) in &report.exponents {
        write!(text, ",c_{i}_{j}").unwrap();
    }
    text.push('\n');
    for s in &report.samples {
        write!(text, "{},{},{}", s.step, jf(s.time), jf(s.max_rel_drift)).unwrap();
        for d in &s.per_coeff {
            write!(text, ",{}", jf(*d)).unwrap();
        }
        text.push('\n');
    }
    emit(out, &text)?;
    if let Some(path) = final_state {
        save_state(&end, path)?;
    }
    if out.is_some() {
        println!(
            "{{\"dt\":{},\"steps\":{},\"record_every\":{},\"samples\":{},\
             \"max_drift\":{},\"sum_a_drift\":{},\"prod_b_drift\":{}}}",
            jf(report.dt),
            report.steps,
            report.record_every,
            report.samples.len(),
            jf(report.max_drift),
            jf(report.sum_a_drift),
            jf(report.prod_b_drift),
        );
    }
    Ok(0)
}

fn cmd_eigen(state: &LatticeState, beta: Complex64) -> Result<u8> {
    let curve = curve_polynomial_with_threshold(state, DEFAULT_THRESHOLD_FACTOR)?;
    let points = curve_points_at_beta(&curve, beta)?;
    let mut rows = Vec::new();
    for p in &points {
        let psi = kernel_vector(state, p)?;
        rows.push(format!(
            "{{\"alpha\":{},\"residual\":{},\"kernel_residual\":{},\"recurrence_residual\":{}}}",
            jc(p.alpha),
            jf(p.residual),
            jf(psi.residual()),
            jf(recurrence_residual(state, p, &psi)),
        ));
    }
    println!(
        "{{\"n\":{},\"m\":{},\"beta\":{},\"points\":[{}]}}",
        state.n(),
        state.m(),
        jc(beta),
        rows.join(",")
    );
    Ok(0)
}

struct CheckOutcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn cmd_check(state: &LatticeState) -> Result<u8> {
    let checks = vec![
        check_scaling(state)?,
        check_support_symmetry(state)?,
        check_support_count(state)?,
        check_beta_zero(state)?,
        check_genus(state)?,
        check_rhs_identity(state)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    let rows: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{{\"name\":\"{}\",\"passed\":{},\"detail\":\"{}\"}}",
                c.name, c.passed, c.detail
            )
        })
        .collect();
    println!(
        "{{\"n\":{},\"m\":{},\"passed\":{passed},\"checks\":[{}]}}",
        state.n(),
        state.m(),
        rows.join(",")
    );
    if !passed {
        let first = checks.iter().find(|c| !c.passed).unwrap();
        eprintln!("check failed: {} ({})", first.name, first.detail);
    }
    Ok(if passed { 0 } else { 1 })
}

/// Fixed generic probe points, deterministic across runs.
const PROBES: [((f64, f64), (f64, f64)); 3] = [
    ((0.83, 0.21), (-0.4, 0.67)),
    ((-1.1, 0.4), (0.3, -0.9)),
    ((0.5, -0.77), (1.2, 0.35)),
];

fn check_scaling(state: &LatticeState) -> Result<CheckOutcome> {
    let (n, m) = (state.n(), state.m());
    let nm = (n * m) as i32;
    let mut worst = 0.0f64;
    for lambda in [Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)] {
        let a: Vec<Complex64> = state.a_grid().iter().map(|&z| lambda * z).collect();
        let b: Vec<Complex64> = state
            .b_grid()
            .iter()
            .map(|&z| lambda * lambda * z)
            .collect();
        let scaled = LatticeState::new(n, m, a, b)?;
        for ((ar, ai), (br, bi)) in PROBES {
            let alpha = Complex64::new(ar, ai);
            let beta = Complex64::new(br, bi);
            let base = det_w(state, alpha, beta)?;
            let lhs = det_w(
                &scaled,
                lambda.powi(n as i32) * alpha,
                lambda.powi(m as i32) * beta,
            )?;
            let rhs = lambda.powi(nm) * base;
            let rel = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300);
            worst = worst.max(rel);
        }
    }
    Ok(CheckOutcome {
        name: "scaling_law",
        passed: worst < 1e-10,
        detail: format!(
            "max rel err {worst:.3e} over {} probes x 2 scale factors",
            PROBES.len()
        ),
    })
}

fn check_support_symmetry(state: &LatticeState) -> Result<CheckOutcome> {
    let curve = curve_polynomial_with_threshold(state, DEFAULT_THRESHOLD_FACTOR)?;
    let support = curve.support();
    let missing: Vec<(i64, i64)> = support
        .iter()
        .filter(|&&(i, j)| !support.contains(&(-i, j)))
        .copied()
        .collect();
    Ok(CheckOutcome {
        name: "support_symmetry",
        passed: missing.is_empty(),
        detail: if missing.is_empty() {
            format!("all {} support points mirror under i -> -i", support.len())
        } else {
            format!("{} support points lack their i -> -i mirror", missing.len())
        },
    })
}

fn check_support_count(state: &LatticeState) -> Result<CheckOutcome> {
    let curve = curve_polynomial_with_threshold(state, DEFAULT_THRESHOLD_FACTOR)?;
    let admissible = admissible_support(curve.n(), curve.m());
    let outside = curve.discarded_max();
    let scale = curve.max_abs_coeff().max(1e-300);
    if outside > 1e-10 * scale {
        return Ok(CheckOutcome {
            name: "support_count",
            passed: false,
            detail: format!(
                "coefficient mass {:.3e} (relative) found outside the admissible cone",
                outside / scale
            ),
        });
    }
    let k = curve.support().len();
    let full = admissible.len();
    Ok(CheckOutcome {
        name: "support_count",
        passed: true,
        detail: if k == full {
            format!("generic support: all {full} admissible points present")
        } else {
            format!("non-generic support: {k} of {full} admissible points")
        },
    })
}

fn check_beta_zero(state: &LatticeState) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for ((ar, ai), _) in PROBES {
        let alpha = Complex64::new(ar, ai);
        let lhs = det_w(state, alpha, Complex64::new(0.0, 0.0))?;
        let rhs = beta_zero_product(state, alpha)?;
        let rel = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300);
        worst = worst.max(rel);
    }
    Ok(CheckOutcome {
        name: "beta_zero_factorization",
        passed: worst < 1e-10,
        detail: format!("max rel err {worst:.3e} over {} alpha probes", PROBES.len()),
    })
}

fn check_genus(state: &LatticeState) -> Result<CheckOutcome> {
    let curve = curve_polynomial_with_threshold(state, DEFAULT_THRESHOLD_FACTOR)?;
    let (polygon, genus) = newton_genus(&curve);
    let expected = expected_genus(curve.n(), curve.m());
    if !polygon.has_generic_support() {
        return Ok(CheckOutcome {
            name: "newton_genus",
            passed: true,
            detail: "skipped: non-generic support".into(),
        });
    }
    Ok(CheckOutcome {
        name: "newton_genus",
        passed: genus == expected,
        detail: format!("interior lattice points {genus}, expected {expected}"),
    })
}

fn check_rhs_identity(state: &LatticeState) -> Result<CheckOutcome> {
    let kappa = build_kappa(state.n(), state.m())?;
    let rho = build_rho(state.n(), state.m())?;
    let d = flow_rhs(state, &kappa, &rho)?;
    let sum_da: Complex64 = d.da_grid().iter().sum();
    let da_scale: f64 = d.da_grid().iter().map(|z| z.norm()).sum();
    let log_db: Vec<Complex64> = d
        .db_grid()
        .iter()
        .zip(state.b_grid())
        .map(|(&db, &b)| db / b)
        .collect();
    let sum_log: Complex64 = log_db.iter().sum();
    let log_scale: f64 = log_db.iter().map(|z| z.norm()).sum();
    let rel_a = if da_scale > 1e-300 {
        sum_da.norm() / da_scale
    } else {
        0.0
    };
    let rel_b = if log_scale > 1e-300 {
        sum_log.norm() / log_scale
    } else {
        0.0
    };
    Ok(CheckOutcome {
        name: "rhs_identity",
        passed: rel_a < 1e-10 && rel_b < 1e-10,
        detail: format!("sum dA rel {rel_a:.3e}, sum dB/B rel {rel_b:.3e}"),
    })
}
