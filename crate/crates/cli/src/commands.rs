use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chargestate::diagnostics::photon_distribution;
use chargestate::state::{convergence_report, eigen_residual};
use chargestate::{
    build_deformed, husimi_grid, moments, AxisRange, BuildError, ChargeState, Diagnostic,
    HusimiError, Nonlinearity, StateDocument, TruncationPolicy,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::format::num;
use crate::{Command, HusimiArgs, StateArgs, SweepArgs};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(BuildError),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numeric(_) => 2,
            Self::Usage(_) | Self::Io(_) => 1,
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Precondition(msg) => Self::Usage(msg),
            e => Self::Numeric(e),
        }
    }
}

impl From<HusimiError> for Failure {
    fn from(e: HusimiError) -> Self {
        Self::Usage(e.to_string())
    }
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build { state, out } => {
            let s = build(&state)?;
            let mut json = serde_json::to_string_pretty(&StateDocument::from(&s))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            json.push('\n');
            match out {
                Some(path) => fs::write(path, json)?,
                None => stdout(&json)?,
            }
        }
        Command::Sweep(args) => stdout(&sweep_csv(&args)?)?,
        Command::Pnd { state } => stdout(&pnd_csv(&build(&state)?))?,
        Command::Husimi(args) => stdout(&husimi_csv(&args)?)?,
        Command::Verify { state, nmax2 } => {
            let report = verify(&state, nmax2.unwrap_or(2 * state.nmax))?;
            stdout(&to_json(&report)?)?;
        }
        Command::Reproduce { out, nmax } => reproduce(&out, nmax)?,
    }
    Ok(())
}

fn stdout(text: &str) -> io::Result<()> {
    let mut lock = io::stdout().lock();
    lock.write_all(text.as_bytes())?;
    lock.flush()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut json =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    json.push('\n');
    Ok(json)
}

fn build(args: &StateArgs) -> Result<ChargeState, Failure> {
    Ok(build_deformed(
        &args.f,
        args.q,
        args.xi,
        &TruncationPolicy::new(args.nmax),
    )?)
}

fn sweep_csv(args: &SweepArgs) -> Result<String, Failure> {
    if args.xi_start.partial_cmp(&args.xi_end) != Some(std::cmp::Ordering::Less) {
        return Err(Failure::Usage(format!(
            "--xi-start ({}) must be below --xi-end ({})",
            args.xi_start, args.xi_end
        )));
    }
    let policy = TruncationPolicy::new(args.nmax);
    let last = args.steps - 1;
    let rows: Vec<Result<(f64, Option<f64>), BuildError>> = (0..args.steps)
        .into_par_iter()
        .map(|i| {
            let xi = if i == last {
                args.xi_end
            } else {
                args.xi_start + (args.xi_end - args.xi_start) * i as f64 / last as f64
            };
            let s = build_deformed(&args.f, args.q, Complex64::new(xi, 0.0), &policy)?;
            Ok((xi, args.diagnostic.evaluate(&moments(&s))))
        })
        .collect();
    let mut csv = String::from("xi,value,defined\n");
    for row in rows {
        match row? {
            (xi, Some(v)) if v.is_finite() => writeln!(csv, "{},{},1", num(xi), num(v)),
            (xi, _) => writeln!(csv, "{},,0", num(xi)),
        }
        .expect("writing to a String");
    }
    Ok(csv)
}

fn pnd_csv(state: &ChargeState) -> String {
    let mut csv = String::from("n,na,nb,p\n");
    for r in photon_distribution(state) {
        writeln!(csv, "{},{},{},{}", r.n, r.na, r.nb, num(r.p)).expect("writing to a String");
    }
    csv
}

fn husimi_csv(args: &HusimiArgs) -> Result<String, Failure> {
    let s = build(&args.state)?;
    let n = args.grid as usize;
    let grid = husimi_grid(
        &s,
        args.alpha2,
        AxisRange::new(args.xmin, args.xmax, n),
        AxisRange::new(args.ymin, args.ymax, n),
    )?;
    let mut csv = String::from("x,y,q\n");
    for (x, y, q) in grid.rows() {
        writeln!(csv, "{},{},{}", num(x), num(y), num(q)).expect("writing to a String");
    }
    Ok(csv)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    f: String,
    q: i64,
    xi: [f64; 2],
    nmax: u64,
    nmax2: u64,
    max_interior_residual: f64,
    /// Largest interior residual divided by the row's operator scale.
    max_interior_scaled_residual: f64,
    boundary_residual: f64,
    /// `None` when the raw weight overflows; see the log fields.
    pre_norm: Option<f64>,
    pre_norm2: Option<f64>,
    log_pre_norm: f64,
    log_pre_norm2: f64,
    relative_change: BTreeMap<&'static str, Option<f64>>,
    converged: BTreeMap<&'static str, bool>,
    all_converged: bool,
    norm_divergent: bool,
}

fn verify(args: &StateArgs, nmax2: u64) -> Result<VerifyReport, Failure> {
    if nmax2 == args.nmax {
        return Err(Failure::Usage("--nmax2 must differ from --nmax".into()));
    }
    let s = build(args)?;
    let residual = eigen_residual(&args.f, &s);
    let (n1, n2) = (args.nmax.min(nmax2), args.nmax.max(nmax2));
    let conv = convergence_report(&args.f, args.q, args.xi, n1, n2, 1e-3)?;
    let log_growth = if args.nmax == n1 {
        conv.log_pre_norm_growth
    } else {
        -conv.log_pre_norm_growth
    };
    let finite = |x: f64| x.is_finite().then_some(x);
    Ok(VerifyReport {
        f: args.f.to_string(),
        q: args.q,
        xi: [args.xi.re, args.xi.im],
        nmax: args.nmax,
        nmax2,
        max_interior_residual: residual.max_interior(),
        max_interior_scaled_residual: residual.max_interior_scaled(),
        boundary_residual: residual.boundary(),
        pre_norm: finite(s.pre_norm()),
        pre_norm2: finite((s.log_pre_norm() + log_growth).exp()),
        log_pre_norm: s.log_pre_norm(),
        log_pre_norm2: s.log_pre_norm() + log_growth,
        relative_change: conv
            .diagnostics
            .iter()
            .map(|d| (d.name, d.relative_change))
            .collect(),
        converged: conv
            .diagnostics
            .iter()
            .map(|d| (d.name, d.converged))
            .collect(),
        all_converged: conv.all_converged(),
        norm_divergent: conv.norm_divergent,
    })
}

const SWEEPS: [(Diagnostic, &[(&str, i64)]); 4] = [
    (Diagnostic::MandelA, &[("ps:0.5", 1), ("qdef:7", 2)]),
    (
        Diagnostic::G2A,
        &[("unity", 1), ("ps:0.5", -1), ("qdef:7", 1), ("sqrt", 3)],
    ),
    (
        Diagnostic::G12,
        &[("unity", -1), ("ps:0.5", -2), ("qdef:7", 2), ("sqrt", 1)],
    ),
    (
        Diagnostic::I0,
        &[("unity", 1), ("ps:0.5", 1), ("qdef:7", 3), ("sqrt", 2)],
    ),
];

const DISTRIBUTIONS: [(&str, i64, f64); 4] = [
    ("unity", 2, 5.0),
    ("ps:0.5", -1, 10.0),
    ("qdef:7", -2, 5.0),
    ("sqrt", 1, 10.0),
];

const PHASE_SPACE: [(&str, i64); 8] = [
    ("unity", 1),
    ("unity", -1),
    ("ps:0.5", 2),
    ("ps:0.5", -2),
    ("qdef:7", 3),
    ("qdef:7", -3),
    ("sqrt", 4),
    ("sqrt", -4),
];

fn stem(kind: &str, f: &str, q: i64) -> String {
    format!("{kind}_{}_q{q}", f.replace(':', "-"))
}

fn state_args(f: &str, q: i64, xi: f64, nmax: u64) -> StateArgs {
    StateArgs {
        f: f.parse::<Nonlinearity>().expect("preset nonlinearity"),
        q,
        xi: Complex64::new(xi, 0.0),
        nmax,
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn reproduce(dir: &Path, nmax: u64) -> Result<(), Failure> {
    if nmax < 6 {
        return Err(Failure::Usage("--nmax must be at least 6".into()));
    }
    fs::create_dir_all(dir)?;
    let half = nmax / 2;
    for (diagnostic, configs) in SWEEPS {
        for &(f, q) in configs {
            let args = SweepArgs {
                diagnostic,
                f: f.parse().expect("preset nonlinearity"),
                q,
                xi_start: 1.0,
                xi_end: 10.0,
                steps: 50,
                nmax,
            };
            let name = stem(diagnostic.name(), f, q);
            write(dir, &format!("{name}.csv"), &sweep_csv(&args)?)?;
            let reports = [1.0, 10.0]
                .map(|xi| verify(&state_args(f, q, xi, nmax), half))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            write(dir, &format!("{name}.verify.json"), &to_json(&reports)?)?;
        }
    }
    for (f, q, xi) in DISTRIBUTIONS {
        let args = state_args(f, q, xi, nmax);
        let name = stem("pnd", f, q);
        write(dir, &format!("{name}.csv"), &pnd_csv(&build(&args)?))?;
        write(
            dir,
            &format!("{name}.verify.json"),
            &to_json(&verify(&args, half)?)?,
        )?;
    }
    for (f, q) in PHASE_SPACE {
        let args = HusimiArgs {
            state: state_args(f, q, 10.0, nmax),
            alpha2: Complex64::new(1.0, 1.0),
            xmin: -4.0,
            xmax: 4.0,
            ymin: -4.0,
            ymax: 4.0,
            grid: 81,
        };
        let name = stem("husimi", f, q);
        write(dir, &format!("{name}.csv"), &husimi_csv(&args)?)?;
        write(
            dir,
            &format!("{name}.verify.json"),
            &to_json(&verify(&args.state, half)?)?,
        )?;
    }
    Ok(())
}
