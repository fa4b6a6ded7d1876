//! Plain-text file formats: curve CSV, treadmill path CSV, JSON sidecars and
//! `key = value` configuration files.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::curve::{BaseCurve, C64};
use crate::error::{Error, Result};
use crate::treadmill::TreadmillPath;

/// Samples written for analytic curves, which carry no nodes of their own.
pub const DEFAULT_CURVE_SAMPLES: usize = 1001;

const CURVE_HEADER: &str = "u,gx,gy,dgx,dgy";
const CURVE_HEADER_ACC: &str = "u,gx,gy,dgx,dgy,ddgx,ddgy";

/// 17 significant digits: every f64 survives a round trip.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a curve as CSV. Sampled curves are written at their nodes (with
/// second derivatives only when they were supplied); analytic curves on a
/// uniform grid of `samples` points.
pub fn write_curve<W: Write>(mut w: W, curve: &BaseCurve, samples: usize) -> Result<()> {
    let (params, with_acc) = match curve.nodes() {
        Some(nodes) => (nodes.to_vec(), curve.has_second_derivatives()),
        None => (curve.grid(samples), true),
    };
    writeln!(w, "{}", if with_acc { CURVE_HEADER_ACC } else { CURVE_HEADER })?;
    for u in params {
        let j = curve.eval(u)?;
        write!(w, "{},{},{},{},{}", num(u), num(j.pos.re), num(j.pos.im), num(j.vel.re), num(j.vel.im))?;
        if with_acc {
            write!(w, ",{},{}", num(j.acc.re), num(j.acc.im))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Numeric rows of a CSV file with a required header; `#` lines and blank
/// lines are skipped.
fn read_table<R: BufRead>(r: R, headers: &[&str]) -> Result<(usize, Vec<(usize, Vec<f64>)>)> {
    let mut cols = None;
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        match cols {
            None => {
                let header: String = text.chars().filter(|c| !c.is_whitespace()).collect();
                let Some(k) = headers.iter().position(|h| *h == header) else {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected header one of {headers:?}, got `{text}`"),
                    });
                };
                cols = Some(headers[k].split(',').count());
            }
            Some(n) => {
                let vals = text
                    .split(',')
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
                if vals.len() != n {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {n} fields, got {}", vals.len()),
                    });
                }
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse { line: lineno, msg: "non-finite value".into() });
                }
                rows.push((lineno, vals));
            }
        }
    }
    let Some(n) = cols else {
        return Err(Error::InvalidInput("empty CSV: no header".into()));
    };
    if rows.is_empty() {
        return Err(Error::InvalidInput("CSV has a header but no samples".into()));
    }
    Ok((n, rows))
}

fn check_increasing(rows: &[(usize, Vec<f64>)]) -> Result<()> {
    for w in rows.windows(2) {
        if !(w[1].1[0] > w[0].1[0]) {
            return Err(Error::Parse {
                line: w[1].0,
                msg: "parameter column must be strictly increasing".into(),
            });
        }
    }
    Ok(())
}

/// Reads a curve CSV (`u,gx,gy,dgx,dgy[,ddgx,ddgy]`) into a sampled curve.
pub fn read_curve<R: BufRead>(r: R) -> Result<BaseCurve> {
    let (n, rows) = read_table(r, &[CURVE_HEADER, CURVE_HEADER_ACC])?;
    if rows.len() < 2 {
        return Err(Error::InvalidInput("a curve needs at least two samples".into()));
    }
    check_increasing(&rows)?;
    let u = rows.iter().map(|(_, v)| v[0]).collect();
    let pos = rows.iter().map(|(_, v)| C64::new(v[1], v[2])).collect();
    let vel = rows.iter().map(|(_, v)| C64::new(v[3], v[4])).collect();
    let acc = (n == 7).then(|| rows.iter().map(|(_, v)| C64::new(v[5], v[6])).collect());
    BaseCurve::sampled(u, pos, vel, acc)
}

pub fn write_path<W: Write>(mut w: W, path: &TreadmillPath) -> Result<()> {
    writeln!(w, "t,x,y")?;
    for i in 0..path.len() {
        writeln!(w, "{},{},{}", num(path.t[i]), num(path.x[i]), num(path.y[i]))?;
    }
    Ok(())
}

/// Reads a `t,x,y` path; `ell` labels which treadmill it is.
pub fn read_path<R: BufRead>(r: R, ell: f64) -> Result<TreadmillPath> {
    let (_, rows) = read_table(r, &["t,x,y"])?;
    check_increasing(&rows)?;
    TreadmillPath::new(
        ell,
        rows.iter().map(|(_, v)| v[0]).collect(),
        rows.iter().map(|(_, v)| v[1]).collect(),
        rows.iter().map(|(_, v)| v[2]).collect(),
    )
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Parses `key = value` lines. `#` starts a comment and `-` in keys is
/// folded to `_`, so `max-steps` and `max_steps` coincide. Keys stay case
/// sensitive because `M` (the level) and `m` (the pitch) differ.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") });
        };
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "empty key".into() });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_curve_round_trips() {
        let c = BaseCurve::circle(1.5, C64::new(0.2, -0.1));
        let mut buf = Vec::new();
        write_curve(&mut buf, &c, 65).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CURVE_HEADER_ACC));
        assert_eq!(text.lines().count(), 66);
        let back = read_curve(&buf[..]).unwrap();
        assert!(back.has_second_derivatives());
        for u in c.grid(65) {
            let (a, b) = (c.eval(u).unwrap(), back.eval(u).unwrap());
            assert!((a.pos - b.pos).norm() < 1e-13);
            assert!((a.vel - b.vel).norm() < 1e-13);
            assert!((a.acc - b.acc).norm() < 1e-13);
        }
    }

    #[test]
    fn five_column_curves_stay_five_columns() {
        let u: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let pos = u.iter().map(|&t| C64::new(t, t * t)).collect();
        let vel = u.iter().map(|&t| C64::new(1.0, 2.0 * t)).collect();
        let c = BaseCurve::sampled(u, pos, vel, None).unwrap();
        let mut buf = Vec::new();
        write_curve(&mut buf, &c, 0).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("u,gx,gy,dgx,dgy\n"));
        let back = read_curve(&buf[..]).unwrap();
        assert!(!back.has_second_derivatives());
        assert_eq!(back.eval(0.35).unwrap().pos, c.eval(0.35).unwrap().pos);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(matches!(read_curve(&b""[..]), Err(Error::InvalidInput(_))));
        assert!(matches!(read_curve(&b"u,gx,gy,dgx,dgy\n"[..]), Err(Error::InvalidInput(_))));
        assert!(matches!(read_curve(&b"a,b\n1,2\n"[..]), Err(Error::Parse { line: 1, .. })));
        let bad = b"u,gx,gy,dgx,dgy\n0,1,0,0,1\n1,1,0,0\n";
        assert!(matches!(read_curve(&bad[..]), Err(Error::Parse { line: 3, .. })));
        let nonmono = b"u,gx,gy,dgx,dgy\n0,1,0,0,1\n0,1,0,0,1\n";
        assert!(matches!(read_curve(&nonmono[..]), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn path_round_trip() {
        let p = TreadmillPath::new(0.5, vec![0.0, 1.0, 2.0], vec![0.1, 0.2, 1.0 / 3.0], vec![-1.0, 0.0, 1e-300]).unwrap();
        let mut buf = Vec::new();
        write_path(&mut buf, &p).unwrap();
        let q = read_path(&buf[..], 0.5).unwrap();
        assert_eq!(q.x, p.x);
        assert_eq!(q.y, p.y);
        assert_eq!(q.t, p.t);
    }

    #[test]
    fn config_parsing() {
        let cfg = parse_config("# solver\nH = -0.5\nm = 2\n  max-steps=100 # inline\n\nspace = r3\n").unwrap();
        assert_eq!(cfg["H"], "-0.5");
        assert_eq!(cfg["m"], "2");
        assert!(!cfg.contains_key("h"));
        assert_eq!(cfg["max_steps"], "100");
        assert_eq!(cfg["space"], "r3");
        assert!(matches!(parse_config("oops"), Err(Error::Parse { line: 1, .. })));
    }
}
