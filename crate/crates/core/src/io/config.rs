use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::experiments::{CaseKind, CaseSpec};
use crate::model::{FluxLaw, SIGMA};
use crate::scheme::{SolverConfig, Step3Mode};

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseSpec,
    pub solver: SolverConfig,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    /// Grid sizes of the convergence battery.
    pub sizes: Vec<usize>,
    /// Time steps of the energy battery.
    pub dts: Vec<f64>,
    /// Interface widths of the sharp-limit sweep.
    pub epsilons: Vec<f64>,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn perr(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

/// Parses a float, also accepting fractions such as `1/64`.
fn parse_f64(e: &Entry) -> Result<f64> {
    let v = e.value.trim();
    let parsed = match v.split_once('/') {
        Some((a, b)) => a
            .trim()
            .parse::<f64>()
            .ok()
            .zip(b.trim().parse::<f64>().ok())
            .map(|(a, b)| a / b),
        None => v.parse::<f64>().ok(),
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(perr(e.line, &e.key, format!("'{v}' is not a finite number"))),
    }
}

fn parse_usize(e: &Entry) -> Result<usize> {
    e.value
        .trim()
        .parse()
        .map_err(|_| perr(e.line, &e.key, format!("'{}' is not a non-negative integer", e.value)))
}

fn parse_bool(e: &Entry) -> Result<bool> {
    match e.value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(perr(e.line, &e.key, format!("'{v}' is not a boolean"))),
    }
}

fn parse_list<T>(e: &Entry, one: impl Fn(&Entry) -> Result<T>) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(|s| {
            one(&Entry {
                line: e.line,
                key: e.key.clone(),
                value: s.trim().to_string(),
            })
        })
        .collect()
}

fn canonical(key: &str) -> String {
    match key.to_ascii_lowercase().as_str() {
        "epsilon" => "eps".into(),
        "mobility" => "m".into(),
        "d+" => "d_plus".into(),
        "d-" => "d_minus".into(),
        other => other.to_string(),
    }
}

const KEYS: &[&str] = &[
    "nx", "ny", "x_min", "x_max", "y_min", "y_max", "re", "ca", "pe", "eps", "m", "k", "d_plus", "d_minus", "s",
    "q_law", "h", "end_time", "output_every", "frozen_interface", "stop_when_steady", "dt", "gauss_tol",
    "gauss_max_iters", "lin_tol", "lin_max_iters", "newton_tol", "newton_max_iters", "step3_mode", "out_dir",
    "seed", "sizes", "dts", "epsilons",
];

/// Parses an INI-style document: one `[CaseName]` section followed by
/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut section: Option<(usize, String)> = None;
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(line, "[section]", "unterminated section header"))?
                .trim();
            if section.is_some() {
                return Err(perr(line, name, "only one case section is allowed"));
            }
            section = Some((line, name.to_string()));
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| perr(line, content, "expected `key = value`"))?;
        let key = canonical(k.trim());
        if section.is_none() {
            return Err(perr(line, &key, "key appears before the case section"));
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(perr(line, &key, "unknown key"));
        }
        if entries.iter().any(|e| e.key == key) {
            return Err(perr(line, &key, "duplicate key"));
        }
        entries.push(Entry {
            line,
            key,
            value: v.trim().to_string(),
        });
    }
    let (section_line, name) = section.ok_or_else(|| perr(0, "[section]", "missing case section"))?;
    let find = |k: &str| entries.iter().find(|e| e.key == k);

    let kind = match name.as_str() {
        "SharpLimit1D" => CaseKind::SharpLimit1D {
            epsilon: find("eps").map(parse_f64).transpose()?.unwrap_or(0.01),
        },
        "TwoInterface1D" => CaseKind::TwoInterface1D,
        "Gaussian2D" => CaseKind::Gaussian2D,
        "Convergence2D" => CaseKind::Convergence2D {
            h: find("h").map(parse_f64).transpose()?.unwrap_or(1.0 / 64.0),
            dt: find("dt").map(parse_f64).transpose()?.unwrap_or(1e-4),
        },
        "EnergyStability" => CaseKind::EnergyStability {
            dt: find("dt").map(parse_f64).transpose()?.unwrap_or(0.1 / 256.0),
        },
        "ShearDrop" => CaseKind::ShearDrop {
            k: match find("k") {
                Some(e) => match e.value.trim() {
                    "high" => 1.0 / (2.0 * SIGMA * crate::experiments::PERMEABILITY_DELTA),
                    "medium" => 1.0 / (2.0 * SIGMA),
                    "low" => crate::experiments::PERMEABILITY_DELTA / (2.0 * SIGMA),
                    _ => parse_f64(e)?,
                },
                None => 1.0 / (2.0 * SIGMA),
            },
        },
        "TwoDroplets" => CaseKind::TwoDroplets,
        other => {
            return Err(perr(
                section_line,
                other,
                format!("unknown case; expected one of {}", CaseKind::ALL_NAMES.join(", ")),
            ))
        }
    };
    let mut case = CaseSpec::new(kind).map_err(|err| {
        let culprit = ["h", "eps", "k", "dt"].into_iter().find_map(&find);
        match culprit {
            Some(e) => perr(e.line, &e.key, err.to_string()),
            None => perr(section_line, &name, err.to_string()),
        }
    })?;
    let mut solver = case.solver_config();
    let mut cfg_out = RunConfig {
        case: case.clone(),
        solver,
        out_dir: None,
        seed: 0,
        sizes: vec![16, 32, 64, 128],
        dts: (0..=8).map(|k| 0.1 / f64::from(1u32 << k)).collect(),
        epsilons: vec![0.04, 0.02, 0.01],
    };

    for e in &entries {
        let f = || parse_f64(e);
        let mut physical = false;
        let mut grid = false;
        match e.key.as_str() {
            "nx" => {
                case.grid.nx = parse_usize(e)?;
                grid = true;
            }
            "ny" => {
                case.grid.ny = parse_usize(e)?;
                grid = true;
            }
            "x_min" => {
                case.grid.x_min = f()?;
                grid = true;
            }
            "x_max" => {
                case.grid.x_max = f()?;
                grid = true;
            }
            "y_min" => {
                case.grid.y_min = f()?;
                grid = true;
            }
            "y_max" => {
                case.grid.y_max = f()?;
                grid = true;
            }
            "re" => {
                case.params.re = f()?;
                physical = true;
            }
            "ca" => {
                case.params.ca = f()?;
                physical = true;
            }
            "pe" => {
                case.params.pe = f()?;
                physical = true;
            }
            "eps" => {
                case.params.epsilon = f()?;
                physical = true;
            }
            "m" => {
                case.params.mobility = f()?;
                physical = true;
            }
            "k" => {
                if let CaseKind::ShearDrop { k } = kind {
                    case.params.k = k;
                } else {
                    case.params.k = f()?;
                }
                physical = true;
            }
            "d_plus" => {
                case.params.d_plus = f()?;
                physical = true;
            }
            "d_minus" => {
                case.params.d_minus = f()?;
                physical = true;
            }
            "s" => {
                case.params.s = f()?;
                physical = true;
            }
            "q_law" => {
                case.params.q_law = match e.value.as_str() {
                    "linear" => FluxLaw::Linear,
                    "log" | "logarithmic" => FluxLaw::Logarithmic,
                    v => return Err(perr(e.line, &e.key, format!("'{v}' is not linear or logarithmic"))),
                };
            }
            "h" => {
                if !matches!(kind, CaseKind::Convergence2D { .. }) {
                    return Err(perr(e.line, &e.key, "only Convergence2D takes `h`"));
                }
            }
            "end_time" => case.end_time = f()?,
            "output_every" => case.output_every = parse_usize(e)?,
            "frozen_interface" => case.frozen_interface = parse_bool(e)?,
            "stop_when_steady" => case.stop_when_steady = parse_bool(e)?,
            "dt" => {
                case.dt = f()?;
                solver.dt = case.dt;
            }
            "gauss_tol" => solver.gauss_tol = f()?,
            "gauss_max_iters" => solver.gauss_max_iters = parse_usize(e)?,
            "lin_tol" => solver.lin_tol = f()?,
            "lin_max_iters" => solver.lin_max_iters = parse_usize(e)?,
            "newton_tol" => solver.newton_tol = f()?,
            "newton_max_iters" => solver.newton_max_iters = parse_usize(e)?,
            "step3_mode" => {
                case.step3_mode = match e.value.as_str() {
                    "linearized" => Step3Mode::LinearizedFlux,
                    "entropy" => Step3Mode::EntropyFlux,
                    v => return Err(perr(e.line, &e.key, format!("'{v}' is not linearized or entropy"))),
                };
                solver.step3_mode = case.step3_mode;
            }
            "out_dir" => cfg_out.out_dir = Some(PathBuf::from(e.value.trim())),
            "seed" => {
                cfg_out.seed = e
                    .value
                    .trim()
                    .parse()
                    .map_err(|_| perr(e.line, &e.key, "seed must be a non-negative integer"))?
            }
            "sizes" => cfg_out.sizes = parse_list(e, parse_usize)?,
            "dts" => cfg_out.dts = parse_list(e, parse_f64)?,
            "epsilons" => cfg_out.epsilons = parse_list(e, parse_f64)?,
            _ => unreachable!("key list and match arms agree"),
        }
        if physical {
            case.params
                .validate()
                .map_err(|err| perr(e.line, &e.key, err.to_string()))?;
        }
        if grid {
            crate::grid::make_grid(case.grid).map_err(|err| perr(e.line, &e.key, err.to_string()))?;
        }
        solver.validate().map_err(|err| perr(e.line, &e.key, err.to_string()))?;
    }
    case.validate().map_err(|e| perr(section_line, &name, e.to_string()))?;
    if cfg_out.sizes.windows(2).any(|w| w[1] != 2 * w[0]) || cfg_out.sizes.len() < 2 {
        let line = find("sizes").map_or(section_line, |e| e.line);
        return Err(perr(line, "sizes", "need at least two doubling grid sizes"));
    }
    for (key, vals) in [("dts", &cfg_out.dts), ("epsilons", &cfg_out.epsilons)] {
        if vals.is_empty() || vals.iter().any(|v| !(*v > 0.0)) {
            let line = find(key).map_or(section_line, |e| e.line);
            return Err(perr(line, key, "values must be positive"));
        }
    }
    cfg_out.case = case;
    cfg_out.solver = solver;
    Ok(cfg_out)
}

fn list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn list_e(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")
}

/// Effective configuration with every key spelled out; parsing it yields
/// the same [`RunConfig`].
pub fn render_config(cfg: &RunConfig) -> String {
    let c = &cfg.case;
    let p = &c.params;
    let s = &cfg.solver;
    let mut o = String::new();
    let _ = writeln!(o, "[{}]", c.kind.name());
    let g = &c.grid;
    if let CaseKind::Convergence2D { h, .. } = c.kind {
        let _ = writeln!(o, "h = {h:e}");
    }
    let _ = writeln!(o, "nx = {}\nny = {}", g.nx, g.ny);
    let _ = writeln!(
        o,
        "x_min = {:e}\nx_max = {:e}\ny_min = {:e}\ny_max = {:e}",
        g.x_min, g.x_max, g.y_min, g.y_max
    );
    let _ = writeln!(
        o,
        "Re = {:e}\nCa = {:e}\nPe = {:e}\neps = {:e}\nM = {:e}\nK = {:e}\nD_plus = {:e}\nD_minus = {:e}\ns = {:e}",
        p.re, p.ca, p.pe, p.epsilon, p.mobility, p.k, p.d_plus, p.d_minus, p.s
    );
    let _ = writeln!(o, "q_law = {}", p.q_law.name());
    let _ = writeln!(
        o,
        "end_time = {:e}\noutput_every = {}\nfrozen_interface = {}\nstop_when_steady = {}",
        c.end_time, c.output_every, c.frozen_interface, c.stop_when_steady
    );
    let _ = writeln!(
        o,
        "dt = {:e}\ngauss_tol = {:e}\ngauss_max_iters = {}\nlin_tol = {:e}\nlin_max_iters = {}\nnewton_tol = {:e}\nnewton_max_iters = {}\nstep3_mode = {}",
        s.dt,
        s.gauss_tol,
        s.gauss_max_iters,
        s.lin_tol,
        s.lin_max_iters,
        s.newton_tol,
        s.newton_max_iters,
        s.step3_mode.name()
    );
    if let Some(d) = &cfg.out_dir {
        let _ = writeln!(o, "out_dir = {}", d.display());
    }
    let _ = writeln!(o, "seed = {}", cfg.seed);
    let _ = writeln!(o, "sizes = {}", list(&cfg.sizes));
    let _ = writeln!(o, "dts = {}", list_e(&cfg.dts));
    let _ = writeln!(o, "epsilons = {}", list_e(&cfg.epsilons));
    o
}
