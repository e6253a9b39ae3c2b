//! Line-oriented `key = value` experiment configuration with
//! `[scenario]`, `[sweep]`, `[grid]`, and `[solver]` sections. Unknown
//! sections or keys are errors — typos never pass silently.

use crate::error::{Error, Result};
use crate::harness::{Horizon, Scenario};
use crate::kdv::{Direction, KdvProfile, Soliton};

/// A parsed and validated experiment configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::ConfigSyntax { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| syntax(line, format!("{key}: expected a number, got `{value}`")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| syntax(line, format!("{key}: expected an integer, got `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(syntax(line, format!("{key}: expected true or false, got `{value}`"))),
    }
}

/// Wavetrain spec: `zero`, `soliton(kappa, x0)`, or
/// `two_soliton(kappa_fast, x0_fast, kappa_slow, x0_slow)`.
fn parse_profile(line: usize, key: &str, value: &str, direction: Direction) -> Result<KdvProfile> {
    if value == "zero" {
        return Ok(KdvProfile::Zero);
    }
    let (name, args) = value
        .split_once('(')
        .and_then(|(n, rest)| rest.strip_suffix(')').map(|a| (n.trim(), a)))
        .ok_or_else(|| syntax(line, format!("{key}: malformed profile `{value}`")))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|s| parse_f64(line, key, s.trim()))
        .collect::<Result<_>>()?;
    match (name, nums.as_slice()) {
        ("soliton", [kappa, x0]) => Ok(KdvProfile::SingleSoliton {
            direction,
            soliton: Soliton { kappa: *kappa, x0: *x0 },
        }),
        ("two_soliton", [k_fast, x_fast, k_slow, x_slow]) => {
            if direction != Direction::Right {
                return Err(syntax(line, format!("{key}: two_soliton profiles are right-moving")));
            }
            Ok(KdvProfile::TwoSoliton {
                fast: Soliton { kappa: *k_fast, x0: *x_fast },
                slow: Soliton { kappa: *k_slow, x0: *x_slow },
            })
        }
        _ => Err(syntax(
            line,
            format!("{key}: expected zero, soliton(kappa, x0) or two_soliton(k, x0, k, x0)"),
        )),
    }
}

/// Parse the documented format into a validated [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut scenario: Option<Scenario> = None;
    // Deferred (line, section, key, value) entries so overrides may appear
    // before the `[scenario] name = ...` line that picks the base.
    let mut entries: Vec<(usize, String, String, String)> = Vec::new();
    let mut section = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, "unterminated section header"))?
                .trim();
            match name {
                "scenario" | "sweep" | "grid" | "solver" => section = name.to_string(),
                _ => return Err(syntax(line, format!("unknown section `[{name}]`"))),
            }
            continue;
        }
        if section.is_empty() {
            return Err(syntax(line, "key before any section header"));
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, "expected `key = value`"))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if section == "scenario" && key == "name" {
            if scenario.is_some() {
                return Err(syntax(line, "scenario name given twice"));
            }
            scenario = Some(match value.as_str() {
                "head-on" => Scenario::head_on(),
                "overtaking" => Scenario::overtaking(),
                "custom" => {
                    let mut s = Scenario::head_on();
                    s.name = "custom".into();
                    s
                }
                other => {
                    return Err(syntax(
                        line,
                        format!("unknown scenario `{other}` (head-on, overtaking, custom)"),
                    ))
                }
            });
            continue;
        }
        entries.push((line, section.clone(), key, value));
    }

    let mut s = scenario
        .ok_or_else(|| syntax(text.lines().count().max(1), "missing `[scenario] name = ...`"))?;

    for (line, section, key, value) in entries {
        match (section.as_str(), key.as_str()) {
            ("scenario", "u0") => s.u0 = parse_profile(line, "u0", &value, Direction::Right)?,
            ("scenario", "v0") => s.v0 = parse_profile(line, "v0", &value, Direction::Left)?,
            ("scenario", "t0") => {
                s.t0 = parse_f64(line, "t0", &value)?;
                s.horizon = match s.horizon {
                    Horizon::OverEps(_) => Horizon::OverEps(s.t0),
                    Horizon::OverEpsCubed(_) => Horizon::OverEpsCubed(s.t0),
                };
            }
            ("scenario", "horizon_over_eps") => {
                s.horizon = Horizon::OverEps(parse_f64(line, "horizon_over_eps", &value)?)
            }
            ("scenario", "horizon_over_eps_cubed") => {
                s.horizon =
                    Horizon::OverEpsCubed(parse_f64(line, "horizon_over_eps_cubed", &value)?)
            }
            ("scenario", "n_samples") => s.n_samples = parse_usize(line, "n_samples", &value)?,
            ("scenario", "measure_theta") => {
                s.measure_theta = parse_bool(line, "measure_theta", &value)?
            }
            ("scenario", "coarse_quadrature") => {
                s.coarse_quadrature = parse_bool(line, "coarse_quadrature", &value)?
            }
            ("scenario", "frame_velocity") => {
                s.solver.frame_velocity = parse_f64(line, "frame_velocity", &value)?
            }
            ("sweep", "eps") => {
                let mut eps: Vec<f64> = value
                    .split(',')
                    .map(|p| parse_f64(line, "eps", p.trim()))
                    .collect::<Result<_>>()?;
                eps.sort_by(|a, b| b.total_cmp(a));
                s.eps_list = eps;
            }
            ("grid", "dx_max") => s.dx_max = parse_f64(line, "dx_max", &value)?,
            ("grid", "scaled_n") => s.scaled_grid_n = parse_usize(line, "scaled_n", &value)?,
            ("grid", "scaled_length") => {
                s.scaled_length = parse_f64(line, "scaled_length", &value)?
            }
            ("solver", "dt") => s.solver.dt = parse_f64(line, "dt", &value)?,
            ("solver", "fg_dt") => s.fg_dt = parse_f64(line, "fg_dt", &value)?,
            ("solver", "fixed_point_tol") => {
                s.solver.fixed_point_tol = parse_f64(line, "fixed_point_tol", &value)?
            }
            ("solver", "max_iters") => {
                s.solver.max_iters = parse_usize(line, "max_iters", &value)?
            }
            (sec, k) => {
                return Err(syntax(line, format!("unknown key `{k}` in section `[{sec}]`")))
            }
        }
    }

    // Profile snapshot defaults depend on n_samples; recompute so overrides
    // keep them in range.
    s.profile_samples = vec![0, s.n_samples / 2, s.n_samples];
    s.validate()?;
    Ok(RunConfig { scenario: s })
}
