//! Fidelity, method comparison on the spin-boson model and deterministic
//! CSV/JSON export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numeric::density::{DensityMatrix, TimeSeries, PERTURBATIVE_MIN_EIGENVALUE};
use crate::numeric::linalg::{herm_eig, HERMITIAN_TOL};
use crate::numeric::matrix::{ComplexMatrix, C64};
use crate::open_system::{rg_map_solve, rwa_solve, tc2_solve, tcl2_solve};
use crate::spin_boson::{
    default_window, discretized_bath_oracle, exact_map, select_sign_variant, AmplitudeFunction, SignVariant,
    SpinBosonParams,
};

/// Clamps below this magnitude are rounding noise and are not logged.
pub const CLAMP_LOG_FLOOR: f64 = 1e-12;
/// Fraction of the window used for the early-time averages.
pub const EARLY_FRACTION: f64 = 0.05;

/// Fidelity Tr√(√ρ₁ ρ₂ √ρ₁).
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    fidelity_with_clamp(rho1, rho2).map(|(f, _)| f)
}

/// Eigenvalues at or below this magnitude (relative to the spectral scale)
/// are treated as exact zeros, so rounding noise does not leak through the
/// square root.
pub const ZERO_EIGENVALUE_CUT: f64 = 1e-14;

/// √ρ for a Hermitian matrix with eigenvalues ≥ −clamp_tol, plus the
/// magnitude of the most negative eigenvalue.
fn sqrt_psd(m: &ComplexMatrix, clamp_tol: f64) -> Result<(ComplexMatrix, f64)> {
    let e = herm_eig(m, HERMITIAN_TOL.max(1e-9 * m.norm_max()))?;
    let min = e.values.first().copied().unwrap_or(0.0);
    if min < -clamp_tol {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let cut = ZERO_EIGENVALUE_CUT * e.values.last().map_or(1.0, |v| v.abs().max(1.0));
    let root = e.map(|l| C64::new(if l > cut { l.sqrt() } else { 0.0 }, 0.0));
    Ok((root, if min < 0.0 { -min } else { 0.0 }))
}

/// Fidelity plus the largest negative eigenvalue magnitude clamped away in
/// either argument.
pub fn fidelity_with_clamp(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<(f64, f64)> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimMismatch(format!("fidelity of dims {} and {}", rho1.dim(), rho2.dim())));
    }
    let tol = -PERTURBATIVE_MIN_EIGENVALUE;
    let (s1, c1) = sqrt_psd(rho1.matrix(), tol)?;
    let (_, c2) = sqrt_psd(rho2.matrix(), tol)?;
    let m = (&(&s1 * rho2.matrix()) * &s1).hermitian_part();
    let (root, _) = sqrt_psd(&m, f64::INFINITY)?;
    Ok((root.trace().re, c1.max(c2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Exact,
    Tcl,
    Rwa,
    Rg,
    Tc,
    Bath,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Exact, Method::Tcl, Method::Rwa, Method::Rg, Method::Tc, Method::Bath];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Tcl => "tcl",
            Method::Rwa => "rwa",
            Method::Rg => "rg",
            Method::Tc => "tc",
            Method::Bath => "bath",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

/// Settings for [`compare_methods_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Fixed sign variant for u(t); `None` selects it with the amplitude oracle.
    pub sign: Option<SignVariant>,
    pub bath_modes: usize,
    /// Frequency window of the discretized bath; `None` uses Δ ± 80α.
    pub bath_window: Option<(f64, f64)>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { sign: None, bath_modes: 2000, bath_window: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClampEvent {
    pub method: Method,
    pub t: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub grid: Vec<f64>,
    pub parameters: SpinBosonParams,
    pub series: BTreeMap<Method, TimeSeries>,
    pub fidelity_by_method: BTreeMap<Method, Vec<f64>>,
    /// (value, time) of the smallest fidelity.
    pub min_fidelity: BTreeMap<Method, (f64, f64)>,
    pub clamp_events: Vec<ClampEvent>,
    pub metadata: BTreeMap<String, String>,
}

pub fn compare_methods(
    p: &SpinBosonParams,
    rho0: &DensityMatrix,
    grid: &[f64],
    methods: &[Method],
) -> Result<ComparisonResult> {
    compare_methods_with(p, rho0, grid, methods, &CompareOptions::default())
}

/// Runs each method on the shared grid and compares it with the exact map.
pub fn compare_methods_with(
    p: &SpinBosonParams,
    rho0: &DensityMatrix,
    grid: &[f64],
    methods: &[Method],
    opts: &CompareOptions,
) -> Result<ComparisonResult> {
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    if !methods.contains(&Method::Exact) {
        return Err(Error::InvalidArgument("method list must include exact".into()));
    }
    let mut metadata = BTreeMap::new();
    let sign = match opts.sign {
        Some(s) => {
            metadata.insert("sign_selection".into(), "override".into());
            s
        }
        None => {
            let sel = select_sign_variant(p)?;
            metadata.insert("sign_selection".into(), "oracle".into());
            metadata.insert("sign_error_plus".into(), format!("{:.6e}", sel.error_plus));
            metadata.insert("sign_error_minus".into(), format!("{:.6e}", sel.error_minus));
            sel.sign
        }
    };
    metadata.insert("sign_variant".into(), sign.as_str().into());
    metadata.insert("picture".into(), "interaction".into());

    let model = p.open_system()?;
    let mut series = BTreeMap::new();
    let mut requested: Vec<Method> = methods.to_vec();
    requested.sort();
    requested.dedup();
    for &m in &requested {
        let ts = match m {
            Method::Exact => exact_map(&AmplitudeFunction::new(*p, sign), rho0, grid)?,
            Method::Tcl => tcl2_solve(&model, rho0, grid)?,
            Method::Rwa => rwa_solve(&model.rwa_generator()?, rho0, grid)?,
            Method::Rg => rg_map_solve(&model, rho0, grid)?,
            Method::Tc => tc2_solve(&model, rho0, grid)?,
            Method::Bath => {
                let window = opts.bath_window.unwrap_or_else(|| default_window(p));
                metadata.insert("bath_modes".into(), opts.bath_modes.to_string());
                metadata.insert("bath_window".into(), format!("{:.6e},{:.6e}", window.0, window.1));
                discretized_bath_oracle(p, opts.bath_modes, Some(window), rho0, grid)?
            }
        };
        series.insert(m, ts);
    }

    let exact = &series[&Method::Exact];
    let mut fidelity_by_method = BTreeMap::new();
    let mut min_fidelity = BTreeMap::new();
    let mut clamp_events = Vec::new();
    for (&m, ts) in &series {
        let mut f = Vec::with_capacity(grid.len());
        let mut best = (f64::INFINITY, grid[0]);
        for ((t, a), b) in grid.iter().zip(&ts.states).zip(&exact.states) {
            let (v, clamp) = fidelity_with_clamp(a, b)?;
            if clamp > CLAMP_LOG_FLOOR {
                clamp_events.push(ClampEvent { method: m, t: *t, magnitude: clamp });
            }
            if v < best.0 {
                best = (v, *t);
            }
            f.push(v);
        }
        fidelity_by_method.insert(m, f);
        min_fidelity.insert(m, best);
    }
    Ok(ComparisonResult {
        grid: grid.to_vec(),
        parameters: *p,
        series,
        fidelity_by_method,
        min_fidelity,
        clamp_events,
        metadata,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodStats {
    pub min: f64,
    pub argmin_t: f64,
    pub mean: f64,
    /// Mean over the earliest 5% of the window.
    pub early_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub per_method: BTreeMap<Method, MethodStats>,
    /// Pairwise orderings, present when both methods were run.
    pub flags: BTreeMap<String, bool>,
}

pub fn summary_stats(r: &ComparisonResult) -> SummaryStats {
    let t0 = r.grid[0];
    let t1 = *r.grid.last().unwrap();
    let early_end = t0 + EARLY_FRACTION * (t1 - t0);
    let quarter = t0 + 0.25 * (t1 - t0);
    let mut per_method = BTreeMap::new();
    for (&m, f) in &r.fidelity_by_method {
        let (min, argmin_t) = r.min_fidelity[&m];
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let early: Vec<f64> = r.grid.iter().zip(f).filter(|(t, _)| **t <= early_end).map(|(_, v)| *v).collect();
        let early_mean = early.iter().sum::<f64>() / early.len() as f64;
        per_method.insert(m, MethodStats { min, argmin_t, mean, early_mean });
    }
    let mut flags = BTreeMap::new();
    let get = |m| per_method.get(&m).copied();
    if let (Some(tcl), Some(rg)) = (get(Method::Tcl), get(Method::Rg)) {
        flags.insert("rg_min_exceeds_tcl_min".into(), rg.min > tcl.min);
        flags.insert("tcl_early_mean_ge_rg".into(), tcl.early_mean >= rg.early_mean);
    }
    if let Some(rwa) = get(Method::Rwa) {
        if let Some(tcl) = get(Method::Tcl) {
            flags.insert("rwa_min_below_tcl_min".into(), rwa.min < tcl.min);
        }
        if let Some(rg) = get(Method::Rg) {
            flags.insert("rwa_min_below_rg_min".into(), rwa.min < rg.min);
        }
        flags.insert("rwa_argmin_in_first_quarter".into(), rwa.argmin_t <= quarter);
    }
    SummaryStats { per_method, flags }
}

pub const CSV_HEADER: &str = "t,method,fidelity,rho_pp,re_rho_pm,im_rho_pm";

/// Fidelity table, rows ordered by t and then by method. Times are scaled
/// by `time_unit` (λ² for output in units of 1/λ²).
pub fn comparison_csv(r: &ComparisonResult, time_unit: f64) -> String {
    let mut out = String::with_capacity(64 * r.grid.len() * r.series.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (k, t) in r.grid.iter().enumerate() {
        for (m, ts) in &r.series {
            let rho = ts.states[k].matrix();
            let f = r.fidelity_by_method[m][k];
            let pm = rho[(0, 1)];
            let _ = writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                t * time_unit,
                m.as_str(),
                f,
                rho[(0, 0)].re,
                pm.re,
                pm.im
            );
        }
    }
    out
}

/// JSON summary: parameters, per-method statistics, orderings and clamp
/// events. Rates are reported in units of λ².
pub fn comparison_json(r: &ComparisonResult, stats: &SummaryStats) -> Value {
    let p = &r.parameters;
    let l2 = p.lambda2();
    let methods: serde_json::Map<String, Value> = stats
        .per_method
        .iter()
        .map(|(m, s)| {
            (
                m.as_str().to_string(),
                json!({
                    "min_fidelity": s.min,
                    "argmin_t": s.argmin_t * l2,
                    "mean_fidelity": s.mean,
                    "early_mean_fidelity": s.early_mean,
                }),
            )
        })
        .collect();
    let clamps: Vec<Value> = r
        .clamp_events
        .iter()
        .map(|c| json!({"method": c.method.as_str(), "t": c.t * l2, "magnitude": c.magnitude}))
        .collect();
    json!({
        "parameters": {
            "Delta": p.delta / l2,
            "alpha": p.alpha / l2,
            "lambda": p.lambda,
            "units": "lambda^2",
            "t_min": r.grid[0] * l2,
            "t_max": r.grid.last().copied().unwrap_or(0.0) * l2,
            "points": r.grid.len(),
        },
        "methods": methods,
        "flags": stats.flags,
        "clamp_events": clamps,
        "metadata": r.metadata,
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}
