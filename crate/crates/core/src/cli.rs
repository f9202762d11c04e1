//! JSON run configurations and command dispatch for the `rgq` binary.
//!
//! A config is a flat JSON object with a `command` key. Rates and times are
//! given in units of λ².
//!
//! Exit codes: 0 success, 1 config or I/O error, 2 numerical failure. Errors
//! go to stderr as one line `<Tag>: <message>` with the tag drawn from
//! ParseError, SchemaError, IoError, NotPSD, NonFiniteState, NumericalError.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::harness::{comparison_csv, comparison_json, compare_methods_with, summary_stats, write_atomic, CompareOptions, Method};
use crate::numeric::density::{uniform_grid, DensityMatrix};
use crate::numeric::linalg::{herm_eig, HERMITIAN_TOL};
use crate::numeric::matrix::C64;
use crate::open_system::rwa_solve;
use crate::rg_linear::{oscillator_exact, oscillator_naive, oscillator_rg, OscillatorParams};
use crate::spin_boson::{SignVariant, SpinBosonParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Oscillator,
    SpinBoson,
    Lindblad,
    Compare,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Oscillator => "oscillator",
            Command::SpinBoson => "spin-boson",
            Command::Lindblad => "lindblad",
            Command::Compare => "compare",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Command::Oscillator, Command::SpinBoson, Command::Lindblad, Command::Compare].into_iter().find(|c| c.as_str() == s)
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Command::Oscillator => &["command", "output_path", "t_max", "dt", "epsilon", "a_bar", "theta_bar"],
            Command::Lindblad => &["command", "output_path", "t_max", "dt", "Delta", "alpha", "lambda", "initial_state"],
            Command::SpinBoson | Command::Compare => &[
                "command",
                "output_path",
                "t_max",
                "dt",
                "Delta",
                "alpha",
                "lambda",
                "initial_state",
                "methods",
                "sign_variant",
                "oracle_modes",
                "oracle_window",
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Excited,
    Ground,
    /// (|+⟩ + |−⟩)/√2
    Superposition,
}

impl InitialState {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialState::Excited => "excited",
            InitialState::Ground => "ground",
            InitialState::Superposition => "superposition",
        }
    }

    pub fn density(self) -> DensityMatrix {
        match self {
            InitialState::Excited => DensityMatrix::basis(2, 0),
            InitialState::Ground => DensityMatrix::basis(2, 1),
            InitialState::Superposition => {
                let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                DensityMatrix::pure(&[a, a]).expect("normalized state")
            }
        }
    }
}

/// Spin-boson settings, in units of λ².
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBosonConfig {
    pub delta: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub initial_state: InitialState,
    pub methods: Vec<Method>,
    pub sign_variant: Option<SignVariant>,
    pub oracle_modes: usize,
    pub oracle_window: Option<(f64, f64)>,
}

impl SpinBosonConfig {
    pub fn params(&self) -> crate::Result<SpinBosonParams> {
        SpinBosonParams::in_lambda2_units(self.delta, self.alpha, self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Oscillator(OscillatorParams),
    SpinBoson(SpinBosonConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub t_max: f64,
    pub dt: f64,
    pub parameters: Parameters,
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Parse(String),
    Schema { field: String, message: String },
    Io(String),
    Numerical(Error),
}

impl CliError {
    fn schema(field: &str, message: impl Into<String>) -> Self {
        CliError::Schema { field: field.into(), message: message.into() }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Schema { .. } => "SchemaError",
            CliError::Io(_) => "IoError",
            CliError::Numerical(Error::NotPsd { .. }) => "NotPSD",
            CliError::Numerical(Error::NonFiniteState { .. }) => "NonFiniteState",
            CliError::Numerical(_) => "NumericalError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Io(m) => write!(f, "{}: {m}", self.tag()),
            CliError::Schema { field, message } => write!(f, "{}: field \"{field}\": {message}", self.tag()),
            CliError::Numerical(e) => write!(f, "{}: {e}", self.tag()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

struct Fields<'a>(&'a Map<String, Value>);

impl Fields<'_> {
    fn number(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        match self.0.get(key) {
            None => default.ok_or_else(|| CliError::schema(key, "missing required field")),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::schema(key, format!("expected a finite number, got {v}"))),
        }
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let x = self.number(key, default)?;
        if x <= 0.0 {
            return Err(CliError::schema(key, format!("must be > 0, got {x}")));
        }
        Ok(x)
    }

    fn string(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(CliError::schema(key, format!("expected a string, got {v}"))),
        }
    }
}

const DEFAULT_METHODS: [Method; 4] = [Method::Exact, Method::Tcl, Method::Rwa, Method::Rg];

/// Parses and validates a JSON run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| CliError::Parse("config must be a JSON object".into()))?;
    let fields = Fields(obj);
    let name = fields.string("command")?.ok_or_else(|| CliError::schema("command", "missing required field"))?;
    let command = Command::parse(name).ok_or_else(|| CliError::schema("command", format!("unknown command \"{name}\"")))?;
    if let Some(key) = obj.keys().find(|k| !command.allowed_keys().contains(&k.as_str())) {
        return Err(CliError::schema(key, format!("unknown key for command {}", command.as_str())));
    }
    let (t_default, dt_default) = match command {
        Command::Oscillator => (50.0, 0.01),
        _ => (10.0, 0.005),
    };
    let t_max = fields.positive("t_max", Some(t_default))?;
    let dt = fields.positive("dt", Some(dt_default))?;
    if dt >= t_max {
        return Err(CliError::schema("dt", format!("must be smaller than t_max ({dt} >= {t_max})")));
    }
    let output_path = fields.string("output_path")?.map(str::to_string);

    let parameters = match command {
        Command::Oscillator => {
            let epsilon = fields.positive("epsilon", None)?;
            if epsilon >= 2.0 {
                return Err(CliError::schema("epsilon", "must be < 2 (underdamped)"));
            }
            let a_bar = fields.positive("a_bar", Some(1.0))?;
            let theta_bar = fields.number("theta_bar", Some(FRAC_PI_2))?;
            Parameters::Oscillator(
                OscillatorParams::new(epsilon, a_bar, theta_bar).map_err(|e| CliError::schema("epsilon", e.to_string()))?,
            )
        }
        _ => {
            let delta = fields.number("Delta", None)?;
            if delta < 0.0 {
                return Err(CliError::schema("Delta", format!("must be >= 0, got {delta}")));
            }
            let alpha = fields.positive("alpha", None)?;
            let lambda = fields.positive("lambda", Some(1.0))?;
            let initial_state = match fields.string("initial_state")? {
                None | Some("excited") => InitialState::Excited,
                Some("ground") => InitialState::Ground,
                Some("superposition") => InitialState::Superposition,
                Some(s) => return Err(CliError::schema("initial_state", format!("unknown state \"{s}\""))),
            };
            let methods = match obj.get("methods") {
                None if command == Command::Compare => return Err(CliError::schema("methods", "missing required field")),
                None => DEFAULT_METHODS.to_vec(),
                Some(Value::Array(items)) => {
                    let mut out = Vec::with_capacity(items.len());
                    for item in items {
                        let m = item
                            .as_str()
                            .and_then(Method::parse)
                            .ok_or_else(|| CliError::schema("methods", format!("unknown method {item}")))?;
                        out.push(m);
                    }
                    if out.is_empty() {
                        return Err(CliError::schema("methods", "must be nonempty"));
                    }
                    if !out.contains(&Method::Exact) {
                        return Err(CliError::schema("methods", "must include \"exact\""));
                    }
                    out
                }
                Some(v) => return Err(CliError::schema("methods", format!("expected an array, got {v}"))),
            };
            let sign_variant = match fields.string("sign_variant")? {
                None | Some("auto") => None,
                Some("plus") => Some(SignVariant::Plus),
                Some("minus") => Some(SignVariant::Minus),
                Some(s) => return Err(CliError::schema("sign_variant", format!("expected auto, plus or minus, got \"{s}\""))),
            };
            let oracle_modes = match obj.get("oracle_modes") {
                None => 2000,
                Some(v) => v
                    .as_u64()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| CliError::schema("oracle_modes", format!("expected a positive integer, got {v}")))?
                    as usize,
            };
            let oracle_window = match obj.get("oracle_window") {
                None => None,
                Some(v) => {
                    let pair = v.as_array().filter(|a| a.len() == 2).and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)));
                    match pair {
                        Some((lo, hi)) if lo.is_finite() && hi.is_finite() && hi > lo => Some((lo, hi)),
                        _ => return Err(CliError::schema("oracle_window", format!("expected [min, max] with min < max, got {v}"))),
                    }
                }
            };
            Parameters::SpinBoson(SpinBosonConfig {
                delta,
                alpha,
                lambda,
                initial_state,
                methods,
                sign_variant,
                oracle_modes,
                oracle_window,
            })
        }
    };
    Ok(RunConfig { command, t_max, dt, parameters, output_path })
}

/// Files written by [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub csv: PathBuf,
    pub json: PathBuf,
}

fn write_outputs(out_dir: &Path, stem: &str, csv: &str, summary: &Value) -> Result<Outcome, CliError> {
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(&csv_path, csv.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    write_atomic(&json_path, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", json_path.display())))?;
    Ok(Outcome { csv: csv_path, json: json_path })
}

fn run_oscillator(cfg: &RunConfig, p: &OscillatorParams, out_dir: &Path) -> Result<Outcome, CliError> {
    let grid = uniform_grid(cfg.t_max, cfg.dt);
    let mut csv = String::from("t,exact,naive,rg\n");
    let (mut err_rg, mut err_naive) = (0.0_f64, 0.0_f64);
    for &t in &grid {
        let x = oscillator_exact(p, p.a_bar, p.theta_bar, 0.0, t);
        let naive = oscillator_naive(p, 0.0, t);
        let rg = oscillator_rg(p, t);
        err_rg = err_rg.max((rg - x).abs());
        err_naive = err_naive.max((naive - x).abs());
        csv.push_str(&format!("{t:.16e},{x:.16e},{naive:.16e},{rg:.16e}\n"));
    }
    let summary = json!({
        "command": cfg.command.as_str(),
        "parameters": {"epsilon": p.epsilon, "a_bar": p.a_bar, "theta_bar": p.theta_bar, "t_max": cfg.t_max, "dt": cfg.dt, "points": grid.len()},
        "max_abs_error": {"naive": err_naive, "rg": err_rg},
    });
    write_outputs(out_dir, cfg.command.as_str(), &csv, &summary)
}

fn physical_grid(cfg: &RunConfig, p: &SpinBosonParams) -> Vec<f64> {
    let l2 = p.lambda2();
    uniform_grid(cfg.t_max, cfg.dt).into_iter().map(|t| t / l2).collect()
}

fn run_comparison(cfg: &RunConfig, sb: &SpinBosonConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let p = sb.params()?;
    let l2 = p.lambda2();
    let grid = physical_grid(cfg, &p);
    let opts = CompareOptions {
        sign: sb.sign_variant,
        bath_modes: sb.oracle_modes,
        bath_window: sb.oracle_window.map(|(lo, hi)| (lo * l2, hi * l2)),
    };
    let rho0 = sb.initial_state.density();
    let r = compare_methods_with(&p, &rho0, &grid, &sb.methods, &opts)?;
    let stats = summary_stats(&r);
    let mut summary = comparison_json(&r, &stats);
    let obj = summary.as_object_mut().expect("summary is an object");
    obj.insert("command".into(), json!(cfg.command.as_str()));
    obj.insert("initial_state".into(), json!(sb.initial_state.as_str()));
    obj.insert("dt".into(), json!(cfg.dt));
    obj.insert("requested_methods".into(), json!(sb.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>()));
    write_outputs(out_dir, cfg.command.as_str(), &comparison_csv(&r, l2), &summary)
}

fn run_lindblad(cfg: &RunConfig, sb: &SpinBosonConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let p = sb.params()?;
    let l2 = p.lambda2();
    let grid = physical_grid(cfg, &p);
    let rwa = p.open_system()?.rwa_generator()?;
    let ts = rwa_solve(&rwa, &sb.initial_state.density(), &grid)?;
    let mut csv = String::from("t,rho_pp,re_rho_pm,im_rho_pm\n");
    for (t, s) in grid.iter().zip(&ts.states) {
        let m = s.matrix();
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", t * l2, m[(0, 0)].re, m[(0, 1)].re, m[(0, 1)].im));
    }
    let t_end = *grid.last().unwrap();
    let choi = rwa.generator.scale_real(t_end).expm()?.choi();
    let choi_min = herm_eig(&choi.hermitian_part(), HERMITIAN_TOL)?.values[0];
    let coefficients: Vec<Value> = rwa
        .coefficients
        .iter()
        .map(|c| {
            json!({
                "i": c.i, "j": c.j,
                "omega1": c.omega1 / l2, "omega2": c.omega2 / l2,
                "decay": c.decay / l2, "shift": c.shift / l2,
            })
        })
        .collect();
    let summary = json!({
        "command": cfg.command.as_str(),
        "parameters": {
            "Delta": sb.delta, "alpha": sb.alpha, "lambda": sb.lambda, "units": "lambda^2",
            "t_max": cfg.t_max, "dt": cfg.dt, "points": grid.len(),
        },
        "initial_state": sb.initial_state.as_str(),
        "coefficients": coefficients,
        "diagnostics": {
            "trace_preservation_defect": rwa.generator.trace_preservation_defect(),
            "hermiticity_defect": rwa.generator.hermiticity_defect(),
            "choi_min_eigenvalue_at_t_max": choi_min,
        },
    });
    write_outputs(out_dir, cfg.command.as_str(), &csv, &summary)
}

/// Runs a validated config, writing `<command>.csv` and `<command>.json`
/// into `out_dir`.
pub fn execute(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    match (&cfg.parameters, cfg.command) {
        (Parameters::Oscillator(p), _) => run_oscillator(cfg, p, out_dir),
        (Parameters::SpinBoson(sb), Command::Lindblad) => run_lindblad(cfg, sb, out_dir),
        (Parameters::SpinBoson(sb), _) => run_comparison(cfg, sb, out_dir),
    }
}

/// Reads, parses and executes a config file; returns the process exit code.
pub fn run(config: &Path, out_dir: Option<&Path>, quiet: bool) -> i32 {
    let result = std::fs::read_to_string(config)
        .map_err(|e| CliError::Io(format!("{}: {e}", config.display())))
        .and_then(|text| parse_config(&text))
        .and_then(|cfg| {
            let dir = match (out_dir, &cfg.output_path) {
                (Some(d), _) => d.to_path_buf(),
                (None, Some(p)) => PathBuf::from(p),
                (None, None) => PathBuf::from("results"),
            };
            execute(&cfg, &dir)
        });
    match result {
        Ok(outcome) => {
            if !quiet {
                println!("wrote {} and {}", outcome.csv.display(), outcome.json.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
