use anyhow::{anyhow, bail, Context, Result};
use jjarray::code::ArrayCode;
use jjarray::lattice::{EdgePath, Face, HoleSpec};

/// `q,r[,radius]` items separated by `;`.
pub fn parse_holes(s: &str) -> Result<Vec<HoleSpec>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let nums: Vec<i64> = item
                .split(',')
                .map(|x| x.trim().parse::<i64>().with_context(|| format!("bad hole spec {item:?}")))
                .collect::<Result<_>>()?;
            match nums[..] {
                [q, r] => Ok(HoleSpec::single(q as i32, r as i32)),
                [q, r, rad] if rad >= 0 => Ok(HoleSpec { radius: rad as u32, ..HoleSpec::single(q as i32, r as i32) }),
                _ => bail!("hole spec {item:?} must be q,r or q,r,radius"),
            }
        })
        .collect()
}

/// `N=1..3`, `1..3`, `2,4` or `3`.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>> {
    let body = s.trim().trim_start_matches("N=");
    let out: Vec<usize> = if let Some((a, b)) = body.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad sweep start in {s:?}"))?;
        let b: usize = b.trim_start_matches('=').trim().parse().with_context(|| format!("bad sweep end in {s:?}"))?;
        (a..=b).collect()
    } else {
        body.split(',')
            .map(|x| x.trim().parse().with_context(|| format!("bad sweep entry in {s:?}")))
            .collect::<Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) {
        bail!("sweep {s:?} must list path lengths ≥ 1");
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PathRole {
    Charge,
    Vortex,
}

fn hole_suffix(rest: Option<&str>) -> Result<usize> {
    rest.map(|h| h.parse().with_context(|| format!("bad hole index {h:?}"))).unwrap_or(Ok(0))
}

/// `auto[:hole]` (shortest string or hole loop), `len:N[:hole]`, or
/// comma-separated edge ids.
pub fn parse_path(code: &ArrayCode, spec: &str, role: PathRole) -> Result<EdgePath> {
    let lat = code.lattice();
    let mut parts = spec.trim().split(':');
    let head = parts.next().unwrap_or("");
    match head {
        "auto" | "hole" => {
            let hole = hole_suffix(parts.next())?;
            lat.hole(hole)?;
            Ok(match role {
                PathRole::Charge => code.x_paths()[hole].clone(),
                PathRole::Vortex => code.z_paths()[hole].clone(),
            })
        }
        "len" => {
            let n: usize = parts
                .next()
                .ok_or_else(|| anyhow!("len:N needs a length"))?
                .parse()
                .context("bad path length")?;
            let hole = hole_suffix(parts.next())?;
            let found = match role {
                PathRole::Charge => lat.strings_of_length(Face::Hole(hole), Face::Outer, n, 1)?,
                PathRole::Vortex => lat.loops_around_hole(hole, n, n)?,
            };
            found.into_iter().next().ok_or_else(|| anyhow!("no path of length {n} from hole {hole}"))
        }
        _ => {
            let edges: Vec<usize> = spec
                .split(',')
                .map(|x| x.trim().parse().with_context(|| format!("bad edge id in {spec:?}")))
                .collect::<Result<_>>()?;
            Ok(match role {
                PathRole::Charge => lat.open_string(edges)?,
                PathRole::Vortex => lat.closed_loop(edges)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("N=1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_sweep("2,5").unwrap(), vec![2, 5]);
        assert!(parse_sweep("N=0..2").is_err());
    }

    #[test]
    fn holes() {
        let h = parse_holes("0,0; 3,0,1").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h[1].radius, 1);
        assert!(parse_holes("1").is_err());
        assert!(parse_holes("").unwrap().is_empty());
    }
}
