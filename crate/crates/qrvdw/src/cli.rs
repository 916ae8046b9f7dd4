//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 on a domain error, 2 on a usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::atom::{load_system, validate_regime, PairSystem};
use crate::closed_form::{excitation_probability, Method};
use crate::contour::{compare_prescriptions, evaluate_causal_with, CausalOptions, Order, Prescription, TermMask};
use crate::error::Error;
use crate::quadrature::{energy_quadrature_with, QuadratureConfig};
use crate::scan::{beat_analysis, evaluate, scan, time_average, EnergyUnit, Grid, ScanSpec, Variable};
use crate::units::{C, HBAR};

#[derive(Debug, Parser)]
#[command(
    name = "qrvdw",
    version,
    about = "Quasi-resonant van der Waals interaction between an excited and a ground-state atom"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy at one (R, T), or along an R range.
    Eval(EvalArgs),
    /// Dataset over an R or T range.
    Scan(ScanArgs),
    /// All four pole prescriptions along an R range.
    Compare(CompareArgs),
    /// Regime report for a system file.
    Validate(SystemArg),
    /// Carrier and envelope periods of an R scan.
    Beat(BeatArgs),
    /// Excitation probability of atom B.
    Probability(ProbabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    ClosedForm,
    FarField,
    Adiabatic,
    Causal,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrescriptionArg {
    Causal,
    Adiabatic,
    StationaryPv,
    Pt1995,
}

impl From<PrescriptionArg> for Prescription {
    fn from(p: PrescriptionArg) -> Self {
        match p {
            PrescriptionArg::Causal => Prescription::Causal,
            PrescriptionArg::Adiabatic => Prescription::Adiabatic,
            PrescriptionArg::StationaryPv => Prescription::StationaryPv,
            PrescriptionArg::Pt1995 => Prescription::Pt1995,
        }
    }
}

fn method(m: MethodArg, p: Option<PrescriptionArg>) -> Method {
    match m {
        MethodArg::ClosedForm => Method::ClosedForm,
        MethodArg::FarField => Method::FarField,
        MethodArg::Adiabatic => Method::Adiabatic,
        MethodArg::Causal => Method::Contour(p.map(Into::into).unwrap_or(Prescription::Causal)),
        MethodArg::Quadrature => Method::Quadrature,
    }
}

#[derive(Debug, Args)]
pub struct SystemArg {
    /// System description (JSON).
    #[arg(long)]
    pub system: PathBuf,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write results here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report energies in joules instead of rad/s.
    #[arg(long)]
    pub joules: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub sys: SystemArg,
    #[arg(long = "T-ps")]
    pub t_ps: Option<f64>,
    /// Scalar or min:max:count.
    #[arg(long = "R-um")]
    pub r_um: Option<String>,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub method: MethodArg,
    /// Pole prescription for the residue evaluator (`--method causal`).
    #[arg(long, value_enum)]
    pub prescription: Option<PrescriptionArg>,
    /// Average over this many detuning periods starting at T.
    #[arg(long)]
    pub average_window_periods: Option<f64>,
    /// Comma list of causal terms to keep: aa,bb,k,kp.
    #[arg(long, hide = true)]
    pub terms: Option<String>,
    /// Iterate k first in the coupled terms.
    #[arg(long, hide = true)]
    pub k_first: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub sys: SystemArg,
    /// Scalar or min:max:count.
    #[arg(long = "T-ps")]
    pub t_ps: Option<String>,
    /// Scalar or min:max:count.
    #[arg(long = "R-um")]
    pub r_um: Option<String>,
    /// Repeatable; defaults to closed-form and adiabatic.
    #[arg(long, value_enum)]
    pub method: Vec<MethodArg>,
    #[arg(long, value_enum)]
    pub prescription: Option<PrescriptionArg>,
    /// Add one column per B line.
    #[arg(long)]
    pub per_line: bool,
    /// Report `W R⁶/U₀` instead of rad/s.
    #[arg(long)]
    pub scaled: bool,
    /// Record the wall-clock time in the metadata.
    #[arg(long)]
    pub timestamp: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub sys: SystemArg,
    #[arg(long = "T-ps")]
    pub t_ps: Option<f64>,
    #[arg(long = "R-um")]
    pub r_um: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BeatArgs {
    #[command(flatten)]
    pub sys: SystemArg,
    #[arg(long = "T-ps")]
    pub t_ps: Option<f64>,
    #[arg(long = "R-um")]
    pub r_um: Option<String>,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ProbabilityArgs {
    #[command(flatten)]
    pub sys: SystemArg,
    /// Scalar or min:max:count.
    #[arg(long = "T-ps")]
    pub t_ps: Option<String>,
    #[arg(long = "R-um")]
    pub r_um: Option<f64>,
    /// B line to use when the system has several.
    #[arg(long)]
    pub line: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parse arguments, dispatch, and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("usage: qrvdw <eval|scan|compare|validate|beat|probability> --system <file> [options]");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(arg: &SystemArg) -> Res<PairSystem> {
    let text = std::fs::read_to_string(&arg.system)
        .map_err(|e| Failure::Domain(Error::Io(format!("{}: {e}", arg.system.display()))))?;
    Ok(load_system(&text)?)
}

fn grid(s: &str) -> Res<Grid> {
    Grid::parse(s).map_err(|e| usage(e.to_string()))
}

/// Flag value, else the system file's scan defaults.
fn t_default(sys_text: Option<f64>, flag: Option<f64>) -> Res<f64> {
    flag.or(sys_text).ok_or_else(|| usage("--T-ps is required"))
}

fn scan_defaults(arg: &SystemArg) -> (Option<String>, Option<f64>) {
    std::fs::read_to_string(&arg.system)
        .ok()
        .and_then(|t| crate::atom::SystemConfig::parse(&t).ok())
        .and_then(|c| c.scan)
        .map(|s| (Some(s.r_um), Some(s.t_ps)))
        .unwrap_or((None, None))
}

fn emit(out: &Output, text: &str) -> Res<()> {
    match &out.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Domain(Error::Io(format!("{}: {e}", p.display()))))?,
        None => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_mask(s: &str) -> Res<TermMask> {
    let mut m = TermMask { aa: false, bb_cos: false, mixed_k: false, mixed_k_prime: false };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "aa" => m.aa = true,
            "bb" => m.bb_cos = true,
            "k" => m.mixed_k = true,
            "kp" => m.mixed_k_prime = true,
            _ => return Err(usage(format!("unknown term `{part}`"))),
        }
    }
    Ok(m)
}

fn dispatch(cmd: Command) -> Res<()> {
    match cmd {
        Command::Eval(a) => cmd_eval(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Validate(a) => {
            let sys = load(&a)?;
            let rep = validate_regime(&sys);
            let v = json!({ "system_hash": sys.hash(), "error_scale": sys.error_scale(), "report": rep });
            print!("{}", to_json(&v));
            Ok(())
        }
        Command::Beat(a) => cmd_beat(a),
        Command::Probability(a) => cmd_probability(a),
    }
}

fn cmd_eval(a: EvalArgs) -> Res<()> {
    let base = load(&a.sys)?;
    let (_, t_def) = scan_defaults(&a.sys);
    let t_ps = t_default(t_def, a.t_ps)?;
    let t = t_ps * 1e-12;
    let m = method(a.method, a.prescription);
    if a.prescription.is_some() && a.method != MethodArg::Causal {
        return Err(usage("--prescription applies to --method causal"));
    }
    let r_flag = a.r_um.clone().unwrap_or_else(|| format!("{}", base.r() * 1e6));
    let g = grid(&r_flag)?;
    if g.count > 1 {
        if a.average_window_periods.is_some() || a.terms.is_some() {
            return Err(usage("averaging and term masks need a scalar --R-um"));
        }
        let spec = ScanSpec {
            variable: Variable::R,
            grid: g,
            fixed: t_ps,
            methods: vec![m],
            per_line: false,
            unit: if a.output.joules { EnergyUnit::Joule } else { EnergyUnit::RadPerSecond },
            id: "eval".into(),
        };
        let ds = scan(&base, &spec)?;
        let text = match a.output.format.unwrap_or(Format::Csv) {
            Format::Csv => ds.to_csv(),
            Format::Json => ds.to_json() + "\n",
        };
        return emit(&a.output, &text);
    }
    let sys = base.with_distance(g.min * 1e-6)?;
    let res = if let Some(n) = a.average_window_periods {
        if !(n > 0.0) {
            return Err(usage("--average-window-periods must be positive"));
        }
        let d = sys.detunings.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
        let window = n * 2.0 * std::f64::consts::PI / d;
        time_average(&sys, sys.r(), t, window, m)?
    } else if a.terms.is_some() || a.k_first {
        let mask = match &a.terms {
            Some(s) => parse_mask(s)?,
            None => TermMask::default(),
        };
        let order = if a.k_first { Order::KFirst } else { Order::KPrimeFirst };
        match m {
            Method::Contour(Prescription::Causal) => evaluate_causal_with(&sys, t, CausalOptions { order, mask })?,
            Method::Quadrature => energy_quadrature_with(&sys, t, order, mask, &QuadratureConfig::default())?,
            _ => return Err(usage("term masks apply to causal and quadrature")),
        }
    } else {
        evaluate(&sys, t, m)?
    };
    let energy = if a.output.joules { res.value } else { res.value_rad_s };
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "method": res.method,
            "R_um": g.min,
            // echo the flag unless averaging moved the reference time
            "T_ps": res.t.map(|x| if x == t { t_ps } else { x * 1e12 }),
            "energy": energy,
            "energy_unit": if a.output.joules { "J" } else { "rad/s" },
            "value_scaled": res.value_scaled,
            "error_scale": res.error_scale,
            "per_line": res.per_line.iter().map(|v| if a.output.joules { *v } else { v / HBAR }).collect::<Vec<_>>(),
            "system_hash": base.hash(),
        })),
        Format::Csv => format!(
            "R [um],T [ps],{} [{}],scaled\n{:e},{},{:e},{:e}\n",
            res.method,
            if a.output.joules { "J" } else { "rad/s" },
            res.r * 1e6,
            res.t.map(|t| format!("{:e}", t * 1e12)).unwrap_or_default(),
            energy,
            res.value_scaled
        ),
    };
    emit(&a.output, &text)
}

fn cmd_scan(a: ScanArgs) -> Res<()> {
    let sys = load(&a.sys)?;
    let (r_def, t_def) = scan_defaults(&a.sys);
    let r_s = a.r_um.clone().or(r_def).ok_or_else(|| usage("--R-um is required"))?;
    let t_s = a.t_ps.clone().or(t_def.map(|t| t.to_string())).ok_or_else(|| usage("--T-ps is required"))?;
    let (gr, gt) = (grid(&r_s)?, grid(&t_s)?);
    let (variable, g, fixed) = match (gr.count > 1, gt.count > 1) {
        (true, false) => (Variable::R, gr, gt.min),
        (false, true) => (Variable::T, gt, gr.min),
        (false, false) => (Variable::R, gr, gt.min),
        (true, true) => return Err(usage("only one of --R-um and --T-ps may be a range")),
    };
    let methods = if a.method.is_empty() {
        vec![Method::ClosedForm, Method::Adiabatic]
    } else {
        a.method.iter().map(|&m| method(m, a.prescription)).collect()
    };
    let unit = match (a.scaled, a.output.joules) {
        (true, true) => return Err(usage("--scaled and --joules are exclusive")),
        (true, false) => EnergyUnit::Scaled,
        (false, true) => EnergyUnit::Joule,
        (false, false) => EnergyUnit::RadPerSecond,
    };
    let spec = ScanSpec { variable, grid: g, fixed, methods, per_line: a.per_line, unit, id: "scan".into() };
    let mut ds = scan(&sys, &spec)?;
    if a.timestamp {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        ds.meta.timestamp = Some(format!("unix:{secs}"));
    }
    for d in &ds.diagnostics {
        eprintln!("row {} {}: {}", d.row, d.column, d.message);
    }
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => ds.to_csv(),
        Format::Json => ds.to_json() + "\n",
    };
    emit(&a.output, &text)
}

fn cmd_compare(a: CompareArgs) -> Res<()> {
    let sys = load(&a.sys)?;
    let (r_def, t_def) = scan_defaults(&a.sys);
    let t_ps = t_default(t_def, a.t_ps)?;
    let t = t_ps * 1e-12;
    let g = grid(&a.r_um.clone().or(r_def).ok_or_else(|| usage("--R-um is required"))?)?;
    let r_um = g.values();
    let rs: Vec<f64> = r_um.iter().map(|r| r * 1e-6).collect();
    let rows = compare_prescriptions(&sys, t, &rs)?;
    let k = if a.output.joules { 1.0 } else { 1.0 / HBAR };
    let unit = if a.output.joules { "J" } else { "rad/s" };
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!(
                "R [um],causal [{unit}],adiabatic [{unit}],stationary-pv [{unit}],pt1995 [{unit}],ff-pt1995 [{unit}],ff-stationary-pv [{unit}],ff-adiabatic [{unit}]\n"
            );
            for (r, x) in rows.iter().zip(&r_um) {
                s += &format!(
                    "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                    x,
                    r.causal * k,
                    r.adiabatic * k,
                    r.stationary_pv * k,
                    r.pt1995 * k,
                    r.far_field.pt1995 * k,
                    r.far_field.stationary_pv * k,
                    r.far_field.adiabatic * k
                );
            }
            s
        }
        Format::Json => to_json(&json!({ "T_ps": t_ps, "energy_unit": unit, "unit_factor": k, "rows": rows })),
    };
    emit(&a.output, &text)
}

fn cmd_beat(a: BeatArgs) -> Res<()> {
    let sys = load(&a.sys)?;
    let (r_def, t_def) = scan_defaults(&a.sys);
    let t = t_default(t_def, a.t_ps)?;
    let g = grid(&a.r_um.clone().or(r_def).ok_or_else(|| usage("--R-um is required"))?)?;
    if g.count < 2 {
        return Err(usage("beat needs an --R-um range"));
    }
    let m = method(a.method, None);
    let spec = ScanSpec {
        variable: Variable::R,
        grid: g,
        fixed: t,
        methods: vec![m],
        per_line: false,
        unit: EnergyUnit::Joule,
        id: "beat".into(),
    };
    let ds = scan(&sys, &spec)?;
    let b = beat_analysis(&ds, &m.to_string())?;
    let nb = sys.atom_b_lines.len() as f64;
    let kb = sys.atom_b_lines.iter().map(|l| l.k).sum::<f64>() / nb;
    let ka = sys.atom_a.k;
    let expected_long = std::f64::consts::PI / (ka - kb).abs();
    let expected_short = 2.0 * std::f64::consts::PI / (ka + kb);
    let v = json!({
        "short_period_um": b.short_period * 1e6,
        "long_period_um": b.long_period * 1e6,
        "expected_short_period_um": expected_short * 1e6,
        "expected_long_period_um": expected_long * 1e6,
        "mean_detuning_rad_s": C * (ka - kb),
    });
    emit(&a.output, &to_json(&v))
}

fn cmd_probability(a: ProbabilityArgs) -> Res<()> {
    let mut sys = load(&a.sys)?;
    if let Some(i) = a.line {
        if i >= sys.atom_b_lines.len() {
            return Err(usage(format!("--line {i} out of range")));
        }
        sys = PairSystem::new(sys.atom_a.clone(), vec![sys.atom_b_lines[i].clone()], sys.geom)?;
    }
    let (_, t_def) = scan_defaults(&a.sys);
    let t_s = a.t_ps.clone().or(t_def.map(|t| t.to_string())).ok_or_else(|| usage("--T-ps is required"))?;
    let g = grid(&t_s)?;
    if let Some(r) = a.r_um {
        sys = sys.with_distance(r * 1e-6)?;
    }
    let ts = g.values();
    let ps = ts.iter().map(|t| excitation_probability(&sys, t * 1e-12)).collect::<crate::error::Result<Vec<_>>>()?;
    let text = match a.output.format.unwrap_or(if ts.len() > 1 { Format::Csv } else { Format::Json }) {
        Format::Csv => {
            let mut s = String::from("T [ps],probability\n");
            for (t, p) in ts.iter().zip(&ps) {
                s += &format!("{t:e},{p:e}\n");
            }
            s
        }
        Format::Json => to_json(&json!({ "R_um": sys.r() * 1e6, "T_ps": ts, "probability": ps })),
    };
    emit(&a.output, &text)
}
