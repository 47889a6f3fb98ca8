//! `hhl-sim` command-line front end.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 invalid input (bad flags,
//! unreadable or malformed files, validation errors), 3 post-selection
//! with zero probability.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    self, best_ghz_frame, build_report, pauli_expectation, reconstruct_single_qubit, Estimate, Mode,
    Pauli, PauliExpectations, ReportConfig, ShotEstimate,
};
use crate::circuit::{qft, shot_rng, NoiseSpec, NoiseTarget};
use crate::compiled::{
    self, instance_matrix, CompiledConfig, Feedforward, InputVector, Stage,
};
use crate::error::{Error, Result};
use crate::hhl::{self, classical_solve, run_hhl, HhlProblem};
use crate::pipeline::Pipeline;
use crate::qstate::{eigh, fidelity, ComplexMatrix, ComplexVec, C64};

pub const SCHEMA_VERSION: &str = "1";
const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "hhl-sim", version, about = "Simulate the HHL linear-system algorithm on small instances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a linear system from a problem file or matrix/vector files.
    Solve(SolveArgs),
    /// Run the 2x2 instance on b1, b2, b3 and report Pauli expectations.
    Paper(PaperArgs),
    /// Output fidelity against depolarizing strength.
    NoiseSweep(SweepArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputArg {
    B1,
    B2,
    B3,
    All,
}

impl InputArg {
    fn vectors(self) -> Vec<InputVector> {
        match self {
            InputArg::B1 => vec![InputVector::B1],
            InputArg::B2 => vec![InputVector::B2],
            InputArg::B3 => vec![InputVector::B3],
            InputArg::All => InputVector::PRESETS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Compiled,
    Generic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Compiled => Mode::Compiled,
            ModeArg::Generic => Mode::Generic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeedforwardArg {
    Unitary,
    Semiclassical,
}

impl From<FeedforwardArg> for Feedforward {
    fn from(f: FeedforwardArg) -> Self {
        match f {
            FeedforwardArg::Unitary => Feedforward::Unitary,
            FeedforwardArg::Semiclassical => Feedforward::Semiclassical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseTargetArg {
    All,
    EntanglingOnly,
}

impl From<NoiseTargetArg> for NoiseTarget {
    fn from(t: NoiseTargetArg) -> Self {
        match t {
            NoiseTargetArg::All => NoiseTarget::All,
            NoiseTargetArg::EntanglingOnly => NoiseTarget::EntanglingOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for sampling and mid-circuit measurements.
    #[arg(long, env = "HHL_SIM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file: {"matrix", "vector", "register_bits", "t0", "c_const"}.
    pub problem: Option<PathBuf>,
    /// JSON matrix file (array of rows; entries real or [re, im]).
    #[arg(long, conflicts_with = "problem", requires = "vector")]
    pub matrix: Option<PathBuf>,
    /// JSON vector file.
    #[arg(long, conflicts_with = "problem", requires = "matrix")]
    pub vector: Option<PathBuf>,
    #[arg(long)]
    pub register_bits: Option<usize>,
    #[arg(long)]
    pub c_const: Option<f64>,
    /// Evolution time of the phase-estimation unitary.
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PaperArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub input: InputArg,
    #[arg(long, value_enum, default_value = "compiled")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "unitary")]
    pub feedforward: FeedforwardArg,
    /// Generic mode register size.
    #[arg(long, default_value_t = 2)]
    pub register_bits: usize,
    /// Generic mode rotation constant.
    #[arg(long, default_value_t = 1.0)]
    pub c_const: f64,
    /// Shots per Pauli observable; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    /// Depolarizing probability applied after every gate.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_enum, default_value = "all")]
    pub noise_target: NoiseTargetArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated depolarizing probabilities.
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")]
    pub p_values: Vec<f64>,
    #[arg(long, value_enum, default_value = "all")]
    pub input: InputArg,
    #[arg(long, value_enum, default_value = "compiled")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "unitary")]
    pub feedforward: FeedforwardArg,
    #[arg(long, default_value_t = 2)]
    pub register_bits: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c_const: f64,
    #[arg(long, value_enum, default_value = "all")]
    pub noise_target: NoiseTargetArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Negative control: offset added to the large compiled rotation angle.
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub corrupt_angle: f64,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hhl-sim: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ZeroProbability { .. } => 3,
        _ => 2,
    }
}

pub fn execute(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Solve(a) => cmd_solve(a).map(|_| 0),
        Command::Paper(a) => cmd_paper(a).map(|_| 0),
        Command::NoiseSweep(a) => cmd_noise_sweep(a).map(|_| 0),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_problem(a: &SolveArgs) -> Result<HhlProblem> {
    let mut value = match (&a.problem, &a.matrix, &a.vector) {
        (Some(p), _, _) => read_json(p)?,
        (None, Some(m), Some(v)) => json!({ "matrix": read_json(m)?, "vector": read_json(v)? }),
        _ => {
            return Err(Error::BadFlag(
                "give a problem file or both --matrix and --vector".into(),
            ))
        }
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("problem must be a JSON object".into()))?;
    if let Some(n) = a.register_bits {
        obj.insert("register_bits".into(), json!(n));
    }
    if let Some(c) = a.c_const {
        obj.insert("c_const".into(), json!(c));
    }
    if let Some(t) = a.t0 {
        obj.insert("t0".into(), json!(t));
    }
    Ok(serde_json::from_value(value)?)
}

/// Rounds to 12 significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_significant(n.as_f64().unwrap_or(0.0));
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn emit(common: &Common, text: String) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::Io(e.to_string()))
        }
    }
}


fn json_text(mut v: Value) -> Result<String> {
    round_value(&mut v);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn csv_text<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn noise_spec(p: Option<f64>, target: NoiseTargetArg) -> Result<Option<NoiseSpec>> {
    p.map(|p| NoiseSpec::new(p, target.into())).transpose()
}

#[derive(Serialize)]
struct FieldRow {
    field: String,
    value: f64,
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let problem = load_problem(a)?;
    let result = run_hhl(&problem)?;
    let shots = match a.shots {
        0 => None,
        n => {
            let pipeline = hhl::build_pipeline(&problem)?.pipeline;
            Some(sample_solution(&pipeline, n, a.common.seed)?)
        }
    };
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut report = serde_json::to_value(&result)?;
            let obj = report.as_object_mut().expect("struct serializes to object");
            obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
            obj.insert(
                "config".into(),
                json!({
                    "command": "solve",
                    "problem": problem,
                    "shots": a.shots,
                    "seed": a.common.seed,
                }),
            );
            if let Some(s) = shots {
                obj.insert("shots".into(), serde_json::to_value(s)?);
            }
            emit(&a.common, json_text(report)?)
        }
        Format::Csv => {
            let mut rows: Vec<FieldRow> = [
                ("success_probability", result.success_probability),
                ("fidelity", result.fidelity_vs_classical),
                ("register_residual", result.register_residual),
                ("c_const", result.c_const),
                ("kappa", result.kappa),
            ]
            .into_iter()
            .map(|(f, v)| FieldRow {
                field: f.into(),
                value: round_significant(v),
            })
            .collect();
            for (i, c) in result.x_state.amplitudes().iter().enumerate() {
                rows.push(FieldRow {
                    field: format!("x{i}_re"),
                    value: round_significant(c.re),
                });
                rows.push(FieldRow {
                    field: format!("x{i}_im"),
                    value: round_significant(c.im),
                });
            }
            emit(&a.common, csv_text(&rows)?)
        }
    }
}

/// Shot estimates for `solve`: Pauli expectations for a one-qubit
/// solution, the heralding probability alone otherwise.
#[derive(Serialize)]
#[serde(untagged)]
enum SolutionSample {
    Tomography(ShotEstimate),
    Herald { shots: u64, success_probability: Estimate },
}

fn sample_solution(pipeline: &Pipeline, shots: u64, seed: u64) -> Result<SolutionSample> {
    if pipeline.output.len() == 1 {
        return Ok(SolutionSample::Tomography(analysis::shot_estimate(
            pipeline, None, shots, seed,
        )?));
    }
    Ok(SolutionSample::Herald {
        shots,
        success_probability: analysis::shot_success_probability(pipeline, None, shots, seed)?,
    })
}

#[derive(Serialize)]
struct CsvReportRow {
    input: String,
    observable: String,
    ideal: f64,
    simulated: f64,
    stderr: Option<f64>,
}

pub fn cmd_paper(a: &PaperArgs) -> Result<()> {
    let cfg = ReportConfig {
        mode: a.mode.into(),
        feedforward: a.feedforward.into(),
        inputs: a.input.vectors(),
        noise: noise_spec(a.noise, a.noise_target)?,
        register_bits: a.register_bits,
        c_const: a.c_const,
        shots: a.shots,
        seed: a.common.seed,
    };
    let report = build_report(&cfg)?;
    match a.common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&report)?;
            v.as_object_mut()
                .expect("object")
                .insert("schema_version".into(), json!(SCHEMA_VERSION));
            emit(&a.common, json_text(v)?)
        }
        Format::Csv => {
            let rows: Vec<CsvReportRow> = report
                .rows()
                .into_iter()
                .map(|r| CsvReportRow {
                    input: r.input,
                    observable: r.observable,
                    ideal: round_significant(r.ideal),
                    simulated: round_significant(r.simulated),
                    stderr: r.stderr.map(round_significant),
                })
                .collect();
            emit(&a.common, csv_text(&rows)?)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub input: String,
    pub fidelity: f64,
}

/// Fidelity of the post-selected output against the exact solution for
/// each depolarizing probability and input.
pub fn noise_sweep(base: &ReportConfig, p_values: &[f64], target: NoiseTarget) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &p in p_values {
        let cfg = ReportConfig {
            noise: Some(NoiseSpec::new(p, target)?),
            shots: 0,
            ..base.clone()
        };
        for e in build_report(&cfg)?.entries {
            rows.push(SweepRow {
                p,
                input: e.input,
                fidelity: e.fidelity,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_noise_sweep(a: &SweepArgs) -> Result<()> {
    if a.p_values.is_empty() {
        return Err(Error::BadFlag("--p-values is empty".into()));
    }
    let base = ReportConfig {
        mode: a.mode.into(),
        feedforward: a.feedforward.into(),
        inputs: a.input.vectors(),
        noise: None,
        register_bits: a.register_bits,
        c_const: a.c_const,
        shots: 0,
        seed: a.common.seed,
    };
    let rows = noise_sweep(&base, &a.p_values, a.noise_target.into())?;
    match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rounded: Vec<SweepRow> = rows
                .into_iter()
                .map(|r| SweepRow {
                    fidelity: round_significant(r.fidelity),
                    ..r
                })
                .collect();
            emit(&a.common, csv_text(&rounded)?)
        }
        Format::Json => emit(
            &a.common,
            json_text(json!({
                "schema_version": SCHEMA_VERSION,
                "config": {
                    "command": "noise-sweep",
                    "p_values": a.p_values,
                    "noise_target": NoiseTarget::from(a.noise_target),
                    "report": base,
                },
                "rows": rows,
            }))?,
        ),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn paper_problem(b: &InputVector, c: f64) -> Result<HhlProblem> {
    Ok(HhlProblem::new(instance_matrix(), b.state()?, 2).with_c(c))
}

/// The embedded invariant suite. `corrupt_angle` perturbs the large
/// compiled rotation and must make the suite fail.
pub fn selftest_checks(corrupt_angle: f64, seed: u64) -> Vec<Check> {
    let compiled_cfg = |b: InputVector| {
        let mut c = CompiledConfig::new(b).with_seed(seed);
        c.theta_big += corrupt_angle;
        c
    };
    let mut checks = Vec::new();

    checks.push(check("qft_matches_dft", || {
        let n = 3;
        let u = qft(n).unitary()?;
        let d = 1usize << n;
        let mut dft = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let ang = 2.0 * PI * (j * k) as f64 / d as f64;
                dft.set(j, k, C64::from_polar(1.0 / (d as f64).sqrt(), ang));
            }
        }
        let dev = u.max_abs_diff(&dft);
        Ok((dev < 1e-12, format!("max deviation {dev:.2e}")))
    }));

    checks.push(check("eigh_reconstructs_matrix", || {
        let e = eigh(&instance_matrix())?;
        let dev = e.reconstruct().max_abs_diff(&instance_matrix());
        let ok = dev < 1e-12 && (e.eigenvalues[0] - 1.0).abs() < 1e-12 && (e.eigenvalues[1] - 2.0).abs() < 1e-12;
        Ok((ok, format!("eigenvalues {:?}", e.eigenvalues)))
    }));

    checks.push(check("classical_solve_b3", || {
        let x = classical_solve(&instance_matrix(), &InputVector::B3.state()?)?;
        let want = ComplexVec::from_real(&[3.0 / 10f64.sqrt(), -1.0 / 10f64.sqrt()]);
        let f = x.overlap(&want)?;
        Ok(((f - 1.0).abs() < 1e-12, format!("overlap {f}")))
    }));

    checks.push(check("generic_solution_oracle", || {
        let mut worst: f64 = 1.0;
        for b in InputVector::PRESETS {
            worst = worst.min(run_hhl(&paper_problem(&b, 1.0)?)?.fidelity_vs_classical);
        }
        Ok((worst >= 1.0 - 1e-9, format!("min fidelity {worst}")))
    }));

    checks.push(check("generic_success_probability", || {
        let want = [0.25, 1.0, 0.625];
        let mut dev: f64 = 0.0;
        for (b, w) in InputVector::PRESETS.iter().zip(want) {
            let p = paper_problem(b, 1.0)?;
            let r = run_hhl(&p)?;
            dev = dev.max((r.success_probability - w).abs());
            dev = dev.max((hhl::success_probability(&p)? - w).abs());
        }
        Ok((dev < 1e-9, format!("max deviation {dev:.2e}")))
    }));

    checks.push(check("register_disentangled", || {
        let mut worst: f64 = 0.0;
        for b in InputVector::PRESETS {
            worst = worst.max(run_hhl(&paper_problem(&b, 1.0)?)?.register_residual);
        }
        Ok((worst < 1e-10, format!("max residual {worst:.2e}")))
    }));

    checks.push(check("c_invariance", || {
        let x1 = run_hhl(&paper_problem(&InputVector::B3, 1.0)?)?.x_state;
        let x2 = run_hhl(&paper_problem(&InputVector::B3, 0.5)?)?.x_state;
        let f = x1.overlap(&x2)?;
        Ok(((f - 1.0).abs() < 1e-10, format!("overlap {f}")))
    }));

    checks.push(check("compiled_entangling_count", || {
        let n = compiled::build_compiled_circuit(&compiled_cfg(InputVector::B3))?.entangling_count();
        Ok((n == 4, format!("{n} entangling gates")))
    }));

    checks.push(check("compiled_eigenvector_inputs_exact", || {
        let mut worst: f64 = 1.0;
        for b in [InputVector::B1, InputVector::B2] {
            worst = worst.min(compiled::run_compiled(&compiled_cfg(b))?.fidelity_vs_classical);
        }
        Ok(((worst - 1.0).abs() < 1e-10, format!("min fidelity {worst}")))
    }));

    checks.push(check("compiled_b3_fidelity_oracle", || {
        let (s8, s4) = ((PI / 8.0).sin(), (PI / 4.0).sin());
        let oracle = (s8 + 2.0 * s4).powi(2) / (5.0 * (s8 * s8 + s4 * s4));
        let f = compiled::run_compiled(&compiled_cfg(InputVector::B3))?.fidelity_vs_classical;
        Ok(((f - oracle).abs() < 1e-10, format!("fidelity {f}, oracle {oracle}")))
    }));

    checks.push(check("compiled_success_probability", || {
        let s8sq = (PI / 8.0).sin().powi(2);
        let want = [s8sq, 0.5, 0.25 + 0.5 * s8sq];
        let mut dev: f64 = 0.0;
        for (b, w) in InputVector::PRESETS.into_iter().zip(want) {
            let r = compiled::run_compiled(&compiled_cfg(b))?;
            dev = dev.max((r.success_probability - w).abs());
        }
        Ok((dev < 1e-10, format!("max deviation {dev:.2e}")))
    }));

    checks.push(check("feedforward_matches_unitary", || {
        let mut rng = shot_rng(seed, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let phi = rng.gen_range(0.0..PI);
            let cfg = compiled_cfg(InputVector::Polarization(phi));
            let u = compiled::run_compiled(&cfg)?.x_state;
            let s = compiled::run_compiled(&cfg.with_feedforward(Feedforward::Semiclassical))?.x_state;
            worst = worst.max(1.0 - u.overlap(&s)?);
        }
        Ok((worst < 1e-10, format!("max infidelity {worst:.2e}")))
    }));

    checks.push(check("deferred_measurement", || {
        let cfg = compiled_cfg(InputVector::B3).with_feedforward(Feedforward::Semiclassical);
        let mut pipeline = compiled::compiled_pipeline(&cfg)?;
        pipeline.circuit = pipeline.circuit.defer_measurements()?;
        let deferred = pipeline.execute(None, seed)?;
        let reference = compiled::run_compiled(&cfg)?.x_state;
        let f = fidelity(&reference, &deferred.rho)?;
        Ok(((f - 1.0).abs() < 1e-10, format!("fidelity {f}")))
    }));

    checks.push(check("tomography_round_trip", || {
        let mut rng = shot_rng(seed, 1);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let scale = rng.gen::<f64>() / (v.iter().map(|x| x * x).sum::<f64>().sqrt() + 1e-12);
            let e = PauliExpectations::new(v[0] * scale, v[1] * scale, v[2] * scale);
            let rho = reconstruct_single_qubit(&e)?;
            for p in Pauli::ALL {
                worst = worst.max((pauli_expectation(&rho, p)? - e.get(p)).abs());
            }
        }
        Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
    }));

    checks.push(check("ghz_stage", || {
        let s = compiled::intermediate_state(&compiled_cfg(InputVector::B3), Stage::AncillaEntangled)?;
        let m = best_ghz_frame(&s)?;
        Ok(((m.fidelity - 1.0).abs() < 1e-10, format!("fidelity {} in frame {:?}", m.fidelity, m.frame)))
    }));

    checks.push(check("full_depolarizing_limit", || {
        let cfg = ReportConfig::new(Mode::Compiled).with_noise(Some(NoiseSpec::all(1.0)?));
        let worst = build_report(&cfg)?
            .entries
            .iter()
            .map(|e| (e.fidelity - 0.5).abs())
            .fold(0.0, f64::max);
        Ok((worst < 1e-9, format!("max |F - 0.5| {worst:.2e}")))
    }));

    checks
}

pub fn cmd_selftest(a: &SelftestArgs) -> Result<i32> {
    let checks = selftest_checks(a.corrupt_angle, a.common.seed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let text = match a.common.format {
        Some(Format::Json) => json_text(json!({
            "schema_version": SCHEMA_VERSION,
            "config": { "command": "selftest", "seed": a.common.seed },
            "checks": checks,
            "failed": failed,
        }))?,
        Some(Format::Csv) => csv_text(&checks)?,
        None => {
            let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            let mut t = String::new();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                t += &format!("{status}  {:width$}  {}\n", c.name, c.detail);
            }
            t += &format!("{} checks, {} failed\n", checks.len(), failed);
            t
        }
    };
    emit(&a.common, text)?;
    Ok(if failed == 0 { 0 } else { 1 })
}
