//! Builtin tensors, right-hand sides and class inputs, named in configs as
//! `name` or `name(arg, ...)`, or loaded with `file:path`.

use beppo::ellipticity::Tensor4;
use beppo::quotient::{HomogeneousClass, Mollifier};
use beppo::testfields::{self, RadialGrowth};
use beppo::{io, Field, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Source;
use crate::error::Result;

/// Class inputs are rounded to multiples of `2^-40` so that a constant shift
/// of moderate size is exact and leaves the canonical representative
/// bit-identical.
pub const QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;

/// `name(a, b)` split into the name and numeric arguments.
pub fn parse_call(spec: &str) -> Option<(String, Vec<f64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Some((spec.to_string(), Vec::new()));
    };
    let inner = spec[open + 1..].strip_suffix(')')?;
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|a| a.trim().parse::<f64>().ok())
            .collect::<Option<Vec<_>>>()?
    };
    Some((spec[..open].trim().to_string(), args))
}

fn file_path<'a>(spec: &'a str) -> Option<&'a str> {
    spec.strip_prefix("file:")
}

fn arity(source: &Source, key: &str, name: &str, args: &[f64], min: usize, max: usize) -> Result<()> {
    if args.len() < min || args.len() > max {
        let expected = if min == max {
            format!("{min}")
        } else {
            format!("{min} to {max}")
        };
        return Err(source.error(key, format!("`{name}` takes {expected} arguments, got {}", args.len())));
    }
    Ok(())
}

fn existing(source: &Source, key: &str, path: &str) -> Result<std::path::PathBuf> {
    let resolved = source.resolve(path);
    if !resolved.exists() {
        return Err(source.error(key, format!("file {} does not exist", resolved.display())));
    }
    Ok(resolved)
}

/// Number of components a tensor spec implies, before a grid exists.
pub fn tensor_components(source: &Source, key: &str, spec: &str, d: usize) -> Result<usize> {
    if let Some(path) = file_path(spec) {
        let t = io::load_tensor(existing(source, key, path)?).map_err(|e| source.error(key, e))?;
        return Ok(t.m());
    }
    let (name, args) = parse_call(spec).ok_or_else(|| source.error(key, format!("cannot parse `{spec}`")))?;
    match name.as_str() {
        "laplacian" => Ok(args.first().map_or(1, |&m| m as usize)),
        "perturbed-laplacian" => Ok(args.get(1).map_or(1, |&m| m as usize)),
        "isotropic" => Ok(d),
        _ => Err(source.error(key, format!("unknown tensor `{name}`"))),
    }
}

/// `laplacian[(m)]`, `isotropic(λ, μ)`, `perturbed-laplacian(a[, m])` or
/// `file:path`.
pub fn tensor(source: &Source, key: &str, spec: &str, grid: Grid) -> Result<Tensor4> {
    let d = grid.d();
    if let Some(path) = file_path(spec) {
        let t = io::load_tensor(existing(source, key, path)?).map_err(|e| source.error(key, e))?;
        if t.d() != d {
            return Err(source.error(key, format!("tensor has d = {}, grid has d = {d}", t.d())));
        }
        if let Some(g) = t.grid() {
            if !g.same_domain(&grid) {
                return Err(source.error(key, "tensor grid differs from the experiment grid"));
            }
        }
        return Ok(t);
    }
    let (name, args) = parse_call(spec).ok_or_else(|| source.error(key, format!("cannot parse `{spec}`")))?;
    let count = |a: &[f64], i: usize| -> Result<usize> {
        let v = a[i];
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(source.error(key, format!("component count must be a positive integer, got {v}")))
        }
    };
    match name.as_str() {
        "laplacian" => {
            arity(source, key, &name, &args, 0, 1)?;
            let m = if args.is_empty() { 1 } else { count(&args, 0)? };
            Ok(Tensor4::laplacian(m, d))
        }
        "isotropic" => {
            arity(source, key, &name, &args, 2, 2)?;
            Ok(Tensor4::isotropic(d, args[0], args[1]))
        }
        "perturbed-laplacian" => {
            arity(source, key, &name, &args, 1, 2)?;
            let m = if args.len() == 2 { count(&args, 1)? } else { 1 };
            Ok(Tensor4::perturbed_laplacian(grid, m, args[0]))
        }
        _ => Err(source.error(key, format!("unknown tensor `{name}`"))),
    }
}

/// Right-hand side densities: `gaussian-dipole(sep[, width])`,
/// `gradient-of-gaussian([width[, axis]])`, `gaussian([width])` or
/// `file:path`.
pub fn rhs(source: &Source, key: &str, spec: &str, grid: Grid) -> Result<Field> {
    if let Some(path) = file_path(spec) {
        return load_on(source, key, path, grid);
    }
    let (name, args) = parse_call(spec).ok_or_else(|| source.error(key, format!("cannot parse `{spec}`")))?;
    let field = match name.as_str() {
        "gaussian-dipole" => {
            arity(source, key, &name, &args, 1, 2)?;
            testfields::gaussian_dipole(grid, args[0], args.get(1).copied().unwrap_or(1.0))
        }
        "gradient-of-gaussian" => {
            arity(source, key, &name, &args, 0, 2)?;
            let axis = args.get(1).copied().unwrap_or(0.0) as usize;
            testfields::gaussian_gradient(grid, axis, args.first().copied().unwrap_or(1.0))
        }
        "gaussian" => {
            arity(source, key, &name, &args, 0, 1)?;
            testfields::gaussian(grid, &vec![0.0; grid.d()], args.first().copied().unwrap_or(1.0), 1.0)
        }
        _ => return Err(source.error(key, format!("unknown right-hand side `{name}`"))),
    };
    field.map_err(|e| source.error(key, e))
}

fn load_on(source: &Source, key: &str, path: &str, grid: Grid) -> Result<Field> {
    let f = io::load_field(existing(source, key, path)?).map_err(|e| source.error(key, e))?;
    if !f.grid().same_domain(&grid) || f.grid().m() != grid.m() {
        return Err(source.error(key, "field grid differs from the experiment grid"));
    }
    Ok(f)
}

/// Class-valued inputs: `gaussian([width])`, `radial-power(p)`,
/// `radial-log`, `band-limited(kmax)`, `sine` or `file:path`.
///
/// The radial profiles have a unit bump added so that their mollification
/// vanishes at the origin.
pub fn class_field(source: &Source, key: &str, spec: &str, grid: Grid, seed: u64) -> Result<Field> {
    if let Some(path) = file_path(spec) {
        return load_on(source, key, path, grid);
    }
    let (name, args) = parse_call(spec).ok_or_else(|| source.error(key, format!("cannot parse `{spec}`")))?;
    let balanced = |growth| -> beppo::Result<Field> {
        let raw = testfields::radial_growth(grid, growth)?;
        testfields::balance_origin(&raw, &Mollifier::new(&grid, 1.0)?)
    };
    let field = match name.as_str() {
        "gaussian" => {
            arity(source, key, &name, &args, 0, 1)?;
            testfields::gaussian(grid, &vec![0.0; grid.d()], args.first().copied().unwrap_or(1.0), 1.0)
        }
        "radial-power" => {
            arity(source, key, &name, &args, 1, 1)?;
            balanced(RadialGrowth::Power { p: args[0] })
        }
        "radial-log" => {
            arity(source, key, &name, &args, 0, 0)?;
            balanced(RadialGrowth::Log)
        }
        "band-limited" => {
            arity(source, key, &name, &args, 1, 1)?;
            testfields::band_limited(grid, args[0], &mut ChaCha8Rng::seed_from_u64(seed))
        }
        "sine" => {
            arity(source, key, &name, &args, 0, 0)?;
            testfields::sine_mode(grid)
        }
        _ => return Err(source.error(key, format!("unknown field `{name}`"))),
    };
    field.map_err(|e| source.error(key, e))
}

/// Quantizes, shifts every component by `shift` and canonicalizes.
pub fn class_input(field: &Field, shift: f64, p: f64) -> beppo::Result<HomogeneousClass> {
    let shifted = field.quantized(QUANTUM).shifted(&vec![shift; field.grid().m()]);
    HomogeneousClass::canonicalize(&shifted, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calls() {
        assert_eq!(parse_call("laplacian"), Some(("laplacian".into(), vec![])));
        assert_eq!(parse_call(" isotropic(1, -1.5) "), Some(("isotropic".into(), vec![1.0, -1.5])));
        assert_eq!(parse_call("gaussian()"), Some(("gaussian".into(), vec![])));
        assert_eq!(parse_call("isotropic(1,x)"), None);
        assert_eq!(parse_call("isotropic(1"), None);
    }

    #[test]
    fn shifted_inputs_share_a_representative() {
        let g = Grid::new(2, 1, 8.0, 32).unwrap();
        let u = testfields::gaussian(g, &[0.5, 0.0], 1.3, 2.0).unwrap();
        let a = class_input(&u, 0.0, 2.0).unwrap();
        let b = class_input(&u, 5.0, 2.0).unwrap();
        assert_eq!(a.rep().values(), b.rep().values());
    }
}
