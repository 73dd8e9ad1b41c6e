//! Name-keyed catalogs: scalar functions, vector fields, and functionals
//! assembled from config entries.
//!
//! Scalar specs are space-separated: `poly c0 c1 …`, `sin amp freq phase`,
//! `cos amp freq phase`, `logistic amp scale shift`, `expnegsq amp rate`,
//! `exp amp rate`, `identity`, `const c`, `zero`.
//!
//! Field specs reuse scalar specs componentwise, plus `zero`,
//! `constant c1 … ce`, and `affine a11 … aee b1 … be`.
//!
//! Functionals: `cylinder` (`f` applied to one state coordinate, optional
//! `time_factor`), `running-integral` (`f`, `g`, `coord`), and `product`
//! with `left_*` / `right_*` sub-specs.

use chenfliess_core::derivation::{VectorField, VectorFieldSet};
use chenfliess_core::functional::{
    make_cylinder, make_running_integral, product, FunctionalHandle,
};
use chenfliess_core::scalar::{MultiFn, ScalarFn};

use crate::config::Config;
use crate::{CliError, Result};

fn parse_args(parts: &[&str], expected: usize, what: &str) -> Result<Vec<f64>> {
    if parts.len() != expected {
        return Err(CliError::new(format!(
            "{what}: expected {expected} numeric arguments, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| CliError::new(format!("{what}: bad number `{p}`: {e}")))
        })
        .collect()
}

/// Parses a scalar function spec.
pub fn scalar_fn_from_spec(spec: &str) -> Result<ScalarFn> {
    let mut parts = spec.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| CliError::new("empty scalar function spec"))?;
    let rest: Vec<&str> = parts.collect();
    match name {
        "poly" => {
            if rest.is_empty() {
                return Err(CliError::new("poly needs at least one coefficient"));
            }
            let coeffs = rest
                .iter()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|e| CliError::new(format!("poly: bad coefficient `{p}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ScalarFn::Poly(coeffs))
        }
        "sin" => {
            let a = parse_args(&rest, 3, "sin")?;
            Ok(ScalarFn::Sin {
                amp: a[0],
                freq: a[1],
                phase: a[2],
            })
        }
        "cos" => {
            let a = parse_args(&rest, 3, "cos")?;
            Ok(ScalarFn::cos(a[0], a[1], a[2]))
        }
        "logistic" => {
            let a = parse_args(&rest, 3, "logistic")?;
            Ok(ScalarFn::logistic(a[0], a[1], a[2]))
        }
        "expnegsq" => {
            let a = parse_args(&rest, 2, "expnegsq")?;
            if a[1] <= 0.0 {
                return Err(CliError::new("expnegsq: rate must be positive"));
            }
            Ok(ScalarFn::PolyExpNegSq {
                poly: vec![a[0]],
                rate: a[1],
            })
        }
        "exp" => {
            let a = parse_args(&rest, 2, "exp")?;
            Ok(ScalarFn::Exp {
                amp: a[0],
                rate: a[1],
            })
        }
        "identity" => Ok(ScalarFn::identity()),
        "zero" => Ok(ScalarFn::zero()),
        "const" => {
            let a = parse_args(&rest, 1, "const")?;
            Ok(ScalarFn::constant(a[0]))
        }
        other => Err(CliError::new(format!(
            "unknown scalar function `{other}` (catalog: poly, sin, cos, logistic, expnegsq, exp, identity, const, zero)"
        ))),
    }
}

/// Parses a vector field spec for state dimension `dim`.
pub fn field_from_spec(spec: &str, dim: usize) -> Result<VectorField> {
    let mut parts = spec.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| CliError::new("empty field spec"))?;
    let rest: Vec<&str> = parts.collect();
    match name {
        "zero" => Ok(VectorField::zero(dim)),
        "constant" => {
            let a = parse_args(&rest, dim, "constant field")?;
            Ok(VectorField::new(
                a.into_iter().map(|c| MultiFn::constant(dim, c)).collect(),
            ))
        }
        "affine" => {
            let a = parse_args(&rest, dim * dim + dim, "affine field")?;
            Ok(VectorField::affine(dim, &a[..dim * dim], &a[dim * dim..]))
        }
        _ => {
            let profile = scalar_fn_from_spec(spec)?;
            Ok(VectorField::componentwise(dim, profile))
        }
    }
}

/// Reads `[fields]`: state dimension `e`, initial state `y0`, and the
/// fields `v0..vd` (`v0` defaults to zero; `d` is the largest index given).
pub fn fields_from_config(cfg: &Config) -> Result<(VectorFieldSet, Vec<f64>)> {
    let e = cfg.get_usize("fields.e", 1)?;
    let y0 = cfg
        .get_f64_list("fields.y0")?
        .unwrap_or_else(|| vec![0.0; e]);
    if y0.len() != e {
        return Err(CliError::new(format!(
            "fields.y0 has {} entries, state dimension is {e}",
            y0.len()
        )));
    }
    let mut d = 0usize;
    for key in cfg.section_keys("fields") {
        if let Some(idx) = key.strip_prefix("fields.v") {
            if let Ok(i) = idx.parse::<usize>() {
                d = d.max(i);
            }
        }
    }
    if d == 0 {
        return Err(CliError::new(
            "[fields] must define at least v1 (the first diffusion field)",
        ));
    }
    let mut fields = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let key = format!("fields.v{i}");
        match cfg.get(&key) {
            Some(spec) => fields.push(field_from_spec(spec, e)?),
            None if i == 0 => fields.push(VectorField::zero(e)),
            None => {
                return Err(CliError::new(format!(
                    "missing field `{key}` (indices must be contiguous up to v{d})"
                )))
            }
        }
    }
    let set = VectorFieldSet::new(fields).map_err(CliError::from)?;
    Ok((set, y0))
}

fn coordinate_cylinder(e: usize, coord: usize, f: ScalarFn) -> Result<FunctionalHandle> {
    if coord > e {
        return Err(CliError::new(format!(
            "coord {coord} out of range 0..={e} (0 is the time coordinate)"
        )));
    }
    Ok(make_cylinder(MultiFn::on_coord(e + 1, coord, f)))
}

fn functional_from_prefixed(
    cfg: &Config,
    section: &str,
    prefix: &str,
    e: usize,
    allow_product: bool,
) -> Result<FunctionalHandle> {
    let kind_key = format!("{section}.{prefix}kind");
    let kind = cfg.require(&kind_key)?.to_string();
    let key = |name: &str| format!("{section}.{prefix}{name}");
    match kind.as_str() {
        "cylinder" => {
            let f = scalar_fn_from_spec(cfg.require(&key("f"))?)?;
            let coord = cfg.get_usize(&key("coord"), 1)?;
            let base = coordinate_cylinder(e, coord, f)?;
            match cfg.get(&key("time_factor")) {
                None => Ok(base),
                Some(spec) => {
                    let phi = scalar_fn_from_spec(spec)?;
                    Ok(product(coordinate_cylinder(e, 0, phi)?, base))
                }
            }
        }
        "running_integral" | "running-integral" => {
            let f = scalar_fn_from_spec(cfg.require(&key("f"))?)?;
            let g = scalar_fn_from_spec(cfg.require(&key("g"))?)?;
            let coord = cfg.get_usize(&key("coord"), 1)?;
            if coord == 0 || coord > e {
                return Err(CliError::new(format!(
                    "running-integral coord {coord} out of range 1..={e}"
                )));
            }
            Ok(make_running_integral(f, MultiFn::on_coord(e, coord - 1, g)))
        }
        "product" if allow_product => {
            let left = functional_from_prefixed(cfg, section, &format!("{prefix}left_"), e, false)?;
            let right =
                functional_from_prefixed(cfg, section, &format!("{prefix}right_"), e, false)?;
            Ok(product(left, right))
        }
        other => Err(CliError::new(format!(
            "unknown functional kind `{other}` in `{kind_key}` (catalog: cylinder, running_integral, product)"
        ))),
    }
}

/// Builds the functional described by a config section.
pub fn functional_from_config(cfg: &Config, section: &str, e: usize) -> Result<FunctionalHandle> {
    functional_from_prefixed(cfg, section, "", e, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chenfliess_core::path::SampledPath;

    #[test]
    fn scalar_specs_parse_and_evaluate() {
        let f = scalar_fn_from_spec("poly 1 0 2").unwrap();
        assert_eq!(f.eval(3.0), 1.0 + 2.0 * 9.0);
        let s = scalar_fn_from_spec("sin 2 1 0").unwrap();
        assert!((s.eval(0.5) - 2.0 * (0.5f64).sin()).abs() < 1e-15);
        let c = scalar_fn_from_spec("cos 1 1 0").unwrap();
        assert!((c.eval(0.3) - (0.3f64).cos()).abs() < 1e-15);
        assert!(scalar_fn_from_spec("sin 1").is_err());
        assert!(scalar_fn_from_spec("warble 1 2").is_err());
        assert!(scalar_fn_from_spec("expnegsq 1 -2").is_err());
    }

    #[test]
    fn field_specs_parse() {
        let f = field_from_spec("affine 2 0 0 1 0.5 -0.5", 2).unwrap();
        let mut out = [0.0; 2];
        f.eval_into(&[1.0, 3.0], &mut out);
        assert_eq!(out, [2.5, 2.5]);
        let g = field_from_spec("logistic 1 1 0", 1).unwrap();
        let mut o = [0.0; 1];
        g.eval_into(&[0.0], &mut o);
        assert!((o[0] - 0.5).abs() < 1e-15);
        assert!(field_from_spec("affine 1 2 3", 2).is_err());
    }

    #[test]
    fn functional_sections_build() {
        let cfg = Config::parse(
            "[functional]\nkind = running-integral\nf = sin 1 1 0\ng = logistic 1 1 0\n",
        )
        .unwrap();
        let f = functional_from_config(&cfg, "functional", 1).unwrap();
        assert!(f.is_bounded());
        let x = SampledPath::sample_scalar(1.0, 32, |r| r).unwrap();
        assert!(f.eval(1.0, &x).unwrap().abs() < 1.0);
        cfg.check_unknown_keys().unwrap();
    }

    #[test]
    fn product_functionals_build_with_prefixes() {
        let cfg = Config::parse(
            "[functional]\nkind = product\nleft_kind = cylinder\nleft_f = identity\n\
             left_time_factor = identity\nright_kind = cylinder\nright_f = identity\n",
        )
        .unwrap();
        let f = functional_from_config(&cfg, "functional", 1).unwrap();
        // F(t,x) = (t * x_t) * x_t
        let x = SampledPath::sample_scalar(1.0, 16, |r| r + 1.0).unwrap();
        let got = f.eval(0.5, &x).unwrap();
        assert!((got - 0.5 * 1.5 * 1.5).abs() < 1e-14);
        cfg.check_unknown_keys().unwrap();
    }

    #[test]
    fn fields_section_builds_a_set() {
        let cfg = Config::parse("[fields]\ne = 1\ny0 = 0.1\nv1 = sin 0.8 1.0 0.3\n").unwrap();
        let (vf, y0) = fields_from_config(&cfg).unwrap();
        assert_eq!(vf.noise_dim(), 1);
        assert_eq!(y0, vec![0.1]);
        assert!(vf.is_bounded());
        cfg.check_unknown_keys().unwrap();
    }

    #[test]
    fn fields_require_contiguous_indices() {
        let cfg = Config::parse("[fields]\ne = 1\nv2 = zero\n").unwrap();
        assert!(fields_from_config(&cfg).is_err());
    }
}
