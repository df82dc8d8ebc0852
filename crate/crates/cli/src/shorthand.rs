//! Compact command-line spellings of norms, measures and ε grids.

use concmeter_core::normspace::Exponent;
use concmeter_core::{MeasureSpec, NormSpec};

/// `l1`, `l1.5`, `linf`, optionally prefixed by a scale: `0.5*l1`.
pub fn parse_norm(s: &str, dim: usize) -> Result<NormSpec, String> {
    let s = s.trim();
    let (scale, body) = match s.split_once('*') {
        Some((f, b)) => (
            f.trim().parse::<f64>().map_err(|_| format!("bad norm scale in \"{s}\""))?,
            b.trim(),
        ),
        None => (1.0, s),
    };
    let p = body
        .strip_prefix('l')
        .ok_or_else(|| format!("norm \"{s}\" must look like l1, l1.5 or linf"))?;
    let p = match p {
        "inf" | "infinity" => Exponent::INFINITY,
        num => {
            let v: f64 = num.parse().map_err(|_| format!("bad exponent in norm \"{s}\""))?;
            Exponent::new(v).map_err(|e| e.to_string())?
        }
    };
    let norm = NormSpec::lp(dim, p).map_err(|e| e.to_string())?;
    if scale == 1.0 {
        Ok(norm)
    } else {
        norm.scaled(scale).map_err(|e| e.to_string())
    }
}

/// `haar_sphere`, `gaussian`, `ggp:1.5`, `uniform_ball:l1`, `cone_surface:linf`.
/// Ball families default to the Euclidean ball.
pub fn parse_measure(s: &str, dim: usize) -> Result<MeasureSpec, String> {
    let (family, arg) = match s.trim().split_once(':') {
        Some((f, a)) => (f, Some(a)),
        None => (s.trim(), None),
    };
    let no_arg = |m: Result<MeasureSpec, concmeter_core::Error>| match arg {
        Some(a) => Err(format!("measure \"{family}\" takes no argument, got \"{a}\"")),
        None => m.map_err(|e| e.to_string()),
    };
    match family {
        "haar_sphere" => no_arg(MeasureSpec::haar_sphere(dim)),
        "gaussian" => no_arg(MeasureSpec::gaussian(dim)),
        "ggp" => {
            let p: f64 = arg
                .ok_or("ggp needs an exponent, as in ggp:1")?
                .parse()
                .map_err(|_| format!("bad exponent in \"{s}\""))?;
            MeasureSpec::generalized_gaussian(dim, p).map_err(|e| e.to_string())
        }
        "uniform_ball" | "cone_surface" => {
            let norm = parse_norm(arg.unwrap_or("l2"), dim)?;
            let m = if family == "uniform_ball" {
                MeasureSpec::uniform_ball(norm)
            } else {
                MeasureSpec::cone_surface(norm)
            };
            m.map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown measure family \"{other}\" (expected haar_sphere, gaussian, ggp, uniform_ball or cone_surface)"
        )),
    }
}

/// Comma list `0.1,0.2`, or `from:to:count` (arithmetic), or `from:to:count:log`.
pub fn parse_eps(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("the ε grid is empty".into());
    }
    let v = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.as_slice() {
            [_, _, _] => false,
            [_, _, _, "log"] => true,
            _ => return Err(format!("range \"{s}\" must be from:to:count[:log]")),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number \"{t}\" in \"{s}\""));
        let count: usize = parts[2].trim().parse().map_err(|_| format!("bad count in \"{s}\""))?;
        let grid = if log {
            concmeter_core::verify::EpsGrid::geometric(num(parts[0])?, num(parts[1])?, count)
        } else {
            concmeter_core::verify::EpsGrid::linear(num(parts[0])?, num(parts[1])?, count)
        };
        grid.values().map_err(|e| e.to_string())?
    } else {
        let list = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number \"{t}\" in ε grid")))
            .collect::<Result<Vec<_>, _>>()?;
        concmeter_core::verify::EpsGrid::List(list).values().map_err(|e| e.to_string())?
    };
    Ok(v)
}

/// Comma-separated positive integers.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    let v = s
        .split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("bad dimension \"{t}\"")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("no dimensions given".into());
    }
    Ok(v)
}
