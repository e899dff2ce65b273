//! Path expressions for configs:
//! `rot_u(angle)`, `rot_x(angle)`, `axisym(f, time)`, `ham(f, time)`,
//! `twopiloop`, `fourpiloop`, `zero`, `kick(f)`, and the combinators
//! `concat(p1, p2, ...)`, `prod(p1, p2)`, `inv(p)`, and `transport(r, p)`
//! for the autonomous path `p` conjugated by the time-one map of `r`.

use super::HamiltonianPath;
use crate::error::{Error, Result};
use crate::sphere::registry::{function_by_name, parse_scalar, split_args, split_call};

fn arity(name: &str, args: &[&str], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::Input(format!(
            "{name} takes {n} argument(s), got {}",
            args.len()
        )));
    }
    Ok(())
}

/// Resolves a path expression; `l_cap` bounds the band limit of transported
/// Hamiltonians inside products and inverses.
pub fn path_by_name(expr: &str, l_cap: usize) -> Result<HamiltonianPath> {
    let expr = expr.trim();
    let (name, args) = split_call(expr)?;
    let args = match args {
        Some(a) => split_args(a)?,
        None => Vec::new(),
    };
    let path = match name {
        "zero" => {
            arity(name, &args, 0)?;
            HamiltonianPath::zero()
        }
        "twopiloop" => {
            arity(name, &args, 0)?;
            HamiltonianPath::two_pi_loop()
        }
        "fourpiloop" => {
            arity(name, &args, 0)?;
            HamiltonianPath::four_pi_loop()
        }
        "rot_u" | "rot_x" => {
            arity(name, &args, 1)?;
            let angle = parse_scalar(args[0])?;
            if name == "rot_u" {
                HamiltonianPath::rot_u(angle)
            } else {
                HamiltonianPath::rot_x(angle)
            }
        }
        "axisym" | "ham" => {
            arity(name, &args, 2)?;
            let f = function_by_name(args[0])?;
            if name == "axisym" && !f.is_axisymmetric(1e-13) {
                return Err(Error::Input(format!("'{}' is not axisymmetric", args[0])));
            }
            HamiltonianPath::autonomous(expr, f * parse_scalar(args[1])?)
        }
        "kick" => {
            arity(name, &args, 1)?;
            HamiltonianPath::kick(expr, function_by_name(args[0])?)
        }
        "concat" => {
            let parts = args
                .iter()
                .map(|a| path_by_name(a, l_cap))
                .collect::<Result<Vec<_>>>()?;
            HamiltonianPath::concat(parts)?
        }
        "prod" => {
            arity(name, &args, 2)?;
            HamiltonianPath::product(&path_by_name(args[0], l_cap)?, &path_by_name(args[1], l_cap)?)
        }
        "transport" => {
            arity(name, &args, 2)?;
            let by = path_by_name(args[0], l_cap)?;
            path_by_name(args[1], l_cap)?.transported(&by)?
        }
        "inv" => {
            arity(name, &args, 1)?;
            path_by_name(args[0], l_cap)?.inverse()
        }
        other => return Err(Error::UnknownName(format!("path '{other}'"))),
    };
    Ok(path.with_label(expr).with_l_cap(l_cap))
}
