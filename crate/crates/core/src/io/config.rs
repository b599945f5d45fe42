//! Flat `key = value` run configuration.
//!
//! Blank lines are ignored and `#` starts a comment. Every key is optional;
//! unknown keys are rejected. The forcing constants can be given directly
//! (`c1`, `c2`) or through the kinetic parameters `kappa`, `alpha` and
//! `overpotential`, which are converted on load.

use std::fmt::Write as _;
use std::path::Path;

use crate::anisotropy::DELTA_0;
use crate::error::{Error, Result};
use crate::materials::compute_c1_c2;
use crate::params::{ForcingSign, InitialConcentration, Params, TransportPotential};

/// Keys accepted by [`parse_config`], in serialisation order.
pub const KEYS: &[&str] = &[
    "l1",
    "l2",
    "nx",
    "ny",
    "half_domain",
    "end_time",
    "snapshot_times",
    "record_every",
    "gamma",
    "mu",
    "nu1",
    "phi_minus",
    "c1",
    "c2",
    "kappa",
    "alpha",
    "overpotential",
    "d_e",
    "d_s",
    "sigma_e",
    "sigma_s",
    "eps",
    "a0",
    "delta",
    "p_tol",
    "tau",
    "linear_tol",
    "clamp",
    "lumped_mass",
    "implicit_reaction",
    "forcing_sign",
    "transport_potential",
    "seed_x",
    "seed_y",
    "r0",
    "w0",
    "initial_concentration",
];

/// Parsed parameters together with non-fatal warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub params: Params,
    pub warnings: Vec<String>,
}

pub fn parse_config(text: &str) -> Result<Params> {
    let parsed = parse_config_with_warnings(text)?;
    for w in &parsed.warnings {
        log::warn!("{w}");
    }
    Ok(parsed.params)
}

pub fn load_config(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config_with_warnings(text: &str) -> Result<Parsed> {
    let mut p = Params::default();
    let mut kinetics: [Option<(usize, f64)>; 3] = [None; 3];
    let mut direct_c = None;
    let mut delta_line = None;
    let mut seen: Vec<&str> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(config_err(line, content, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&canonical) = KEYS.iter().find(|k| **k == key) else {
            return Err(config_err(line, key, "unknown key"));
        };
        if seen.contains(&canonical) {
            return Err(config_err(line, key, "given more than once"));
        }
        seen.push(canonical);
        let fail = |msg: String| config_err(line, key, &msg);
        match canonical {
            "kappa" => kinetics[0] = Some((line, positive(value).map_err(fail)?)),
            "alpha" => {
                let a = number(value).map_err(fail)?;
                if !(0.0..=1.0).contains(&a) {
                    return Err(fail(format!("must lie in [0, 1], got {a}")));
                }
                kinetics[1] = Some((line, a));
            }
            "overpotential" => kinetics[2] = Some((line, non_negative(value).map_err(fail)?)),
            "c1" | "c2" => {
                direct_c.get_or_insert(line);
                set(&mut p, canonical, value).map_err(fail)?;
            }
            "delta" => {
                delta_line = Some(line);
                set(&mut p, canonical, value).map_err(fail)?;
            }
            _ => set(&mut p, canonical, value).map_err(fail)?,
        }
    }

    if let Some(first) = kinetics.iter().flatten().map(|(l, _)| *l).min() {
        if let Some(cl) = direct_c {
            return Err(config_err(
                cl.max(first),
                "c1/c2",
                "cannot be combined with kappa/alpha/overpotential",
            ));
        }
        let (k, a, b) = (
            kinetics[0].map_or(1.0, |v| v.1),
            kinetics[1].map_or(0.5, |v| v.1),
            kinetics[2].map_or(1.0, |v| v.1),
        );
        let (c1, c2) = compute_c1_c2(k, a, b).map_err(|e| config_err(first, "kappa", &e.to_string()))?;
        p.material.c1 = c1;
        p.material.c2 = c2;
    }

    p.validate().map_err(|e| config_err(0, "params", &e.to_string()))?;

    let mut warnings = Vec::new();
    if p.aniso.exceeds_convexity_limit() {
        warnings.push(format!(
            "config line {}: delta = {} exceeds the convexity bound 1/15 = {:.6}",
            delta_line.unwrap_or(0),
            p.aniso.delta,
            DELTA_0
        ));
    }
    Ok(Parsed { params: p, warnings })
}

fn config_err(line: usize, key: &str, message: &str) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn number(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{v}` is not finite"));
    }
    Ok(x)
}

fn positive(v: &str) -> std::result::Result<f64, String> {
    let x = number(v)?;
    if x <= 0.0 {
        return Err(format!("must be positive, got {x}"));
    }
    Ok(x)
}

fn non_negative(v: &str) -> std::result::Result<f64, String> {
    let x = number(v)?;
    if x < 0.0 {
        return Err(format!("must be non-negative, got {x}"));
    }
    Ok(x)
}

fn count(v: &str) -> std::result::Result<usize, String> {
    let n: usize = v.parse().map_err(|_| format!("`{v}` is not a whole number"))?;
    if n == 0 {
        return Err("must be at least 1".into());
    }
    Ok(n)
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn list(v: &str) -> std::result::Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| non_negative(s.trim())).collect()
}

fn set(p: &mut Params, key: &str, v: &str) -> std::result::Result<(), String> {
    let m = &mut p.material;
    match key {
        "l1" => p.l1 = positive(v)?,
        "l2" => p.l2 = positive(v)?,
        "nx" => p.nx = count(v)?,
        "ny" => p.ny = count(v)?,
        "half_domain" => p.half_domain = flag(v)?,
        "end_time" => p.end_time = positive(v)?,
        "snapshot_times" => p.snapshot_times = list(v)?,
        "record_every" => p.record_every = count(v)?,
        "gamma" => m.gamma = positive(v)?,
        "mu" => m.mu = number(v)?,
        "nu1" => m.nu1 = number(v)?,
        "phi_minus" => {
            let x = number(v)?;
            if !(-2.0..0.0).contains(&x) {
                return Err(format!("must lie in [-2, 0), got {x}"));
            }
            m.phi_minus = x;
        }
        "c1" => m.c1 = positive(v)?,
        "c2" => m.c2 = positive(v)?,
        "d_e" => m.d_e = positive(v)?,
        "d_s" => m.d_s = positive(v)?,
        "sigma_e" => m.sigma_e = positive(v)?,
        "sigma_s" => m.sigma_s = positive(v)?,
        "eps" => m.eps = positive(v)?,
        "a0" => p.aniso.a0 = positive(v)?,
        "delta" => p.aniso.delta = non_negative(v)?,
        "p_tol" => p.aniso.p_tol = positive(v)?,
        "tau" => p.scheme.tau = positive(v)?,
        "linear_tol" => p.scheme.linear_tol = positive(v)?,
        "clamp" => p.scheme.clamp = flag(v)?,
        "lumped_mass" => p.scheme.lumped_mass = flag(v)?,
        "implicit_reaction" => p.scheme.implicit_reaction = flag(v)?,
        "forcing_sign" => {
            p.scheme.forcing_sign = match v {
                "plus" | "+" => ForcingSign::Plus,
                "minus" | "-" => ForcingSign::Minus,
                _ => return Err(format!("`{v}` is not `plus` or `minus`")),
            }
        }
        "transport_potential" => {
            p.scheme.transport_potential = match v {
                "full" => TransportPotential::Full,
                "homogenized" => TransportPotential::Homogenized,
                _ => return Err(format!("`{v}` is not `full` or `homogenized`")),
            }
        }
        "seed_x" => p.initial.seed_x = number(v)?,
        "seed_y" => p.initial.seed_y = number(v)?,
        "r0" => p.initial.r0 = positive(v)?,
        "w0" => p.initial.w0 = positive(v)?,
        "initial_concentration" => {
            p.initial.concentration = match v {
                "complement" => InitialConcentration::Complement,
                "uniform" => InitialConcentration::Uniform,
                _ => return Err(format!("`{v}` is not `complement` or `uniform`")),
            }
        }
        _ => unreachable!("key table and setter disagree on {key}"),
    }
    Ok(())
}

/// Sets one parameter from its textual value, as if read from a config file.
pub fn set_param(p: &mut Params, key: &str, value: &str) -> Result<()> {
    if !KEYS.contains(&key) || matches!(key, "kappa" | "alpha" | "overpotential") {
        return Err(config_err(0, key, "not a settable parameter"));
    }
    set(p, key, value).map_err(|m| config_err(0, key, &m))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Writes every parameter; floats use the shortest round-trip form.
pub fn serialize_config(p: &Params) -> String {
    let m = &p.material;
    let s = &p.scheme;
    let i = &p.initial;
    let times: Vec<String> = p.snapshot_times.iter().map(|&t| num(t)).collect();
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("l1", num(p.l1));
    kv("l2", num(p.l2));
    kv("nx", p.nx.to_string());
    kv("ny", p.ny.to_string());
    kv("half_domain", p.half_domain.to_string());
    kv("end_time", num(p.end_time));
    kv("snapshot_times", times.join(","));
    kv("record_every", p.record_every.to_string());
    kv("gamma", num(m.gamma));
    kv("mu", num(m.mu));
    kv("nu1", num(m.nu1));
    kv("phi_minus", num(m.phi_minus));
    kv("c1", num(m.c1));
    kv("c2", num(m.c2));
    kv("d_e", num(m.d_e));
    kv("d_s", num(m.d_s));
    kv("sigma_e", num(m.sigma_e));
    kv("sigma_s", num(m.sigma_s));
    kv("eps", num(m.eps));
    kv("a0", num(p.aniso.a0));
    kv("delta", num(p.aniso.delta));
    kv("p_tol", num(p.aniso.p_tol));
    kv("tau", num(s.tau));
    kv("linear_tol", num(s.linear_tol));
    kv("clamp", s.clamp.to_string());
    kv("lumped_mass", s.lumped_mass.to_string());
    kv("implicit_reaction", s.implicit_reaction.to_string());
    kv(
        "forcing_sign",
        match s.forcing_sign {
            ForcingSign::Plus => "plus",
            ForcingSign::Minus => "minus",
        }
        .into(),
    );
    kv(
        "transport_potential",
        match s.transport_potential {
            TransportPotential::Full => "full",
            TransportPotential::Homogenized => "homogenized",
        }
        .into(),
    );
    kv("seed_x", num(i.seed_x));
    kv("seed_y", num(i.seed_y));
    kv("r0", num(i.r0));
    kv("w0", num(i.w0));
    kv(
        "initial_concentration",
        match i.concentration {
            InitialConcentration::Complement => "complement",
            InitialConcentration::Uniform => "uniform",
        }
        .into(),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), Params::default());
        assert_eq!(parse_config("# only a comment\n\n   \n").unwrap(), Params::default());
    }

    #[test]
    fn delta_beyond_bound_warns() {
        let parsed = parse_config_with_warnings("delta = 0.1").unwrap();
        assert_eq!(parsed.params.aniso.delta, 0.1);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("line 1"));
        let quiet = parse_config_with_warnings("delta = 0.065").unwrap();
        assert!(quiet.warnings.is_empty());
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = parse_config("tau = 1e-3\ndelta = banana\n").unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "delta");
            }
            e => panic!("unexpected {e}"),
        }
        let msg = parse_config("\n\ndeltta = 0.1").unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("deltta") && msg.contains("unknown"));
        let msg = parse_config("nx 12").unwrap_err().to_string();
        assert!(msg.contains("line 1"));
        let msg = parse_config("phi_minus = 0.5").unwrap_err().to_string();
        assert!(msg.contains("phi_minus"));
        assert!(parse_config("nx = 0").is_err());
        assert!(parse_config("tau = -1").is_err());
        assert!(parse_config("mu = 1\nmu = 2").is_err());
        assert!(parse_config("clamp = maybe").is_err());
        assert!(parse_config("end_time = 0.1\nsnapshot_times = 0.2").is_err());
    }

    #[test]
    fn kinetic_parameters() {
        let p = parse_config("kappa = 2\nalpha = 0.5\noverpotential = 0").unwrap();
        assert_eq!((p.material.c1, p.material.c2), (2.0, 2.0));
        assert!(parse_config("kappa = 1\nc1 = 0.5").is_err());
        assert!(parse_config("alpha = 1.5").is_err());
    }

    #[test]
    fn inline_comments_and_spacing() {
        let p = parse_config("  mu=1.5   # sweep value\nforcing_sign = plus").unwrap();
        assert_eq!(p.material.mu, 1.5);
        assert_eq!(p.scheme.forcing_sign, ForcingSign::Plus);
    }

    #[test]
    fn round_trip_is_exact() {
        let mut p = Params::default();
        p.material.c1 = 1.0 / 3.0;
        p.aniso.delta = 0.065;
        p.scheme.tau = 6.1e-4 / 7.0;
        p.snapshot_times = vec![0.0, 0.1 + 0.2];
        p.scheme.transport_potential = TransportPotential::Homogenized;
        p.initial.concentration = InitialConcentration::Uniform;
        p.half_domain = true;
        let text = serialize_config(&p);
        let q = parse_config(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(serialize_config(&q), text);
        for key in KEYS.iter().filter(|k| !matches!(**k, "kappa" | "alpha" | "overpotential")) {
            assert!(text.contains(&format!("{key} = ")), "{key} missing");
        }
    }

    #[test]
    fn set_param_by_name() {
        let mut p = Params::default();
        set_param(&mut p, "mu", "0.5").unwrap();
        assert_eq!(p.material.mu, 0.5);
        assert!(set_param(&mut p, "kappa", "1").is_err());
        assert!(set_param(&mut p, "nope", "1").is_err());
    }
}
