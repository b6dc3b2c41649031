//! File formats shared across the tools.
//!
//! Set files: first significant line `group N1 ... Nr` (elements are residue
//! vectors, `0 ≤ x_i < N_i`) or `box N1 ... Nr` (lattice points of the 1-based
//! box, `1 ≤ x_i ≤ N_i`); each later line holds the whitespace-separated
//! coordinates of one element; `#` starts a comment; duplicate elements are
//! rejected. Map files: `x_coords -> y_coords` per line, tab-separated.
//! Density files: `density N1 ... Nr` then one `coords value` line per
//! nonzero entry, values as exact fractions `p/q` or decimals.
//!
//! All parse failures carry 1-based line/column locations.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ApcError;
use crate::group::{make_group, GroupSet};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    /// Residue vectors in `∏ Z_{N_i}`.
    Group,
    /// Lattice points of the 1-based box `∏ [1, N_i]`.
    Box,
}

/// Parsed set file, still format-level: validation of coordinates has
/// happened, interpretation (group set vs configuration) is up to the caller.
#[derive(Debug, Clone)]
pub struct SetFile {
    pub kind: SetKind,
    pub lengths: Vec<u64>,
    pub points: Vec<Vec<i64>>,
}

impl SetFile {
    pub fn rank(&self) -> usize {
        self.lengths.len()
    }

    /// Group-kind files as a `GroupSet` over `∏ Z_{N_i}`.
    pub fn to_group_set(&self) -> Result<GroupSet> {
        if self.kind != SetKind::Group {
            return Err(ApcError::Precondition(
                "set file holds box points, not group residues".into(),
            ));
        }
        let moduli: Vec<u32> = self
            .lengths
            .iter()
            .map(|&n| {
                u32::try_from(n).map_err(|_| {
                    ApcError::Precondition(format!("modulus {n} too large for a group set"))
                })
            })
            .collect::<Result<_>>()?;
        let g = make_group(&moduli)?;
        let idx: Vec<usize> = self
            .points
            .iter()
            .map(|p| {
                let coords: Vec<u32> = p.iter().map(|&c| c as u32).collect();
                g.index_of(&coords)
            })
            .collect();
        GroupSet::new(&g, &idx)
    }

    /// Canonical text rendering; `parse_set(render(x)) = x`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let head = match self.kind {
            SetKind::Group => "group",
            SetKind::Box => "box",
        };
        out.push_str(head);
        for n in &self.lengths {
            out.push(' ');
            out.push_str(&n.to_string());
        }
        out.push('\n');
        for p in &self.points {
            let line: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A `GroupSet` as a writable set file.
pub fn group_set_file(s: &GroupSet) -> SetFile {
    let g = s.group();
    let lengths: Vec<u64> = g.moduli().iter().map(|&n| n as u64).collect();
    let points: Vec<Vec<i64>> = s
        .members()
        .iter()
        .map(|&m| g.coords_of(m).iter().map(|&c| c as i64).collect())
        .collect();
    SetFile { kind: SetKind::Group, lengths, points }
}

fn tokens_with_cols(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut col = 1usize;
    let mut start = None;
    let mut start_col = 1usize;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((start_col, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
            start_col = col;
        }
        col += 1;
    }
    if let Some(s) = start {
        out.push((start_col, &line[s..]));
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_i64(path: &str, lineno: usize, col: usize, tok: &str) -> Result<i64> {
    tok.parse::<i64>().map_err(|_| ApcError::Parse {
        path: path.into(),
        line: lineno,
        col,
        msg: format!("expected an integer, found `{tok}`"),
    })
}

/// Parses set-file text; `path` labels diagnostics only.
pub fn parse_set(path: &str, text: &str) -> Result<SetFile> {
    let mut kind = None;
    let mut lengths: Vec<u64> = Vec::new();
    let mut points: Vec<Vec<i64>> = Vec::new();
    let mut seen_lines: std::collections::HashMap<Vec<i64>, usize> = Default::default();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        let toks = tokens_with_cols(line);
        if toks.is_empty() {
            continue;
        }
        if kind.is_none() {
            let (c0, head) = toks[0];
            let k = match head {
                "group" => SetKind::Group,
                "box" => SetKind::Box,
                other => {
                    return Err(ApcError::Parse {
                        path: path.into(),
                        line: lineno,
                        col: c0,
                        msg: format!("expected `group` or `box` header, found `{other}`"),
                    })
                }
            };
            if toks.len() < 2 {
                return Err(ApcError::Parse {
                    path: path.into(),
                    line: lineno,
                    col: c0,
                    msg: "header needs at least one length".into(),
                });
            }
            for &(c, t) in &toks[1..] {
                let n = parse_i64(path, lineno, c, t)?;
                if n < 1 {
                    return Err(ApcError::Parse {
                        path: path.into(),
                        line: lineno,
                        col: c,
                        msg: format!("length must be ≥ 1, found {n}"),
                    });
                }
                lengths.push(n as u64);
            }
            kind = Some(k);
            continue;
        }

        let k = kind.unwrap();
        if toks.len() != lengths.len() {
            return Err(ApcError::Parse {
                path: path.into(),
                line: lineno,
                col: toks[0].0,
                msg: format!(
                    "expected {} coordinates, found {}",
                    lengths.len(),
                    toks.len()
                ),
            });
        }
        let mut p = Vec::with_capacity(lengths.len());
        for (i, &(c, t)) in toks.iter().enumerate() {
            let x = parse_i64(path, lineno, c, t)?;
            let n = lengths[i] as i64;
            let ok = match k {
                SetKind::Group => x >= 0 && x < n,
                SetKind::Box => x >= 1 && x <= n,
            };
            if !ok {
                let range = match k {
                    SetKind::Group => format!("[0, {})", n),
                    SetKind::Box => format!("[1, {}]", n),
                };
                return Err(ApcError::Parse {
                    path: path.into(),
                    line: lineno,
                    col: c,
                    msg: format!("coordinate {x} outside {range}"),
                });
            }
            p.push(x);
        }
        if let Some(&first) = seen_lines.get(&p) {
            return Err(ApcError::Parse {
                path: path.into(),
                line: lineno,
                col: toks[0].0,
                msg: format!("duplicate element (first seen on line {first})"),
            });
        }
        seen_lines.insert(p.clone(), lineno);
        points.push(p);
    }

    match kind {
        Some(k) => Ok(SetFile { kind: k, lengths, points }),
        None => Err(ApcError::Parse {
            path: path.into(),
            line: 1,
            col: 1,
            msg: "empty set file (missing header)".into(),
        }),
    }
}

pub fn load_set(path: &Path) -> Result<SetFile> {
    let text = fs::read_to_string(path)?;
    parse_set(&path.display().to_string(), &text)
}

pub fn save_set(set: &SetFile, path: &Path) -> Result<()> {
    fs::write(path, set.render())?;
    Ok(())
}

/// Raw map file: coordinate pairs, dimensions checked for consistency.
#[derive(Debug, Clone)]
pub struct MapFile {
    pub left_dim: usize,
    pub right_dim: usize,
    pub pairs: Vec<(Vec<i64>, Vec<i64>)>,
}

impl MapFile {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (x, y) in &self.pairs {
            let xs: Vec<String> = x.iter().map(|c| c.to_string()).collect();
            let ys: Vec<String> = y.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("{}\t->\t{}\n", xs.join(" "), ys.join(" ")));
        }
        out
    }
}

/// Parses map-file text: one `x_coords -> y_coords` pair per line.
pub fn parse_map(path: &str, text: &str) -> Result<MapFile> {
    let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = Vec::new();
    let mut dims: Option<(usize, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let arrow = line.find("->").ok_or_else(|| ApcError::Parse {
            path: path.into(),
            line: lineno,
            col: 1,
            msg: "missing `->` separator".into(),
        })?;
        let left = &line[..arrow];
        let right = &line[arrow + 2..];
        let parse_side = |side: &str, offset: usize| -> Result<Vec<i64>> {
            let toks = tokens_with_cols(side);
            let mut v = Vec::with_capacity(toks.len());
            for (c, t) in toks {
                v.push(parse_i64(path, lineno, offset + c - 1, t)?);
            }
            Ok(v)
        };
        let x = parse_side(left, 1)?;
        let y = parse_side(right, arrow + 3)?;
        if x.is_empty() || y.is_empty() {
            return Err(ApcError::Parse {
                path: path.into(),
                line: lineno,
                col: 1,
                msg: "both sides of `->` need coordinates".into(),
            });
        }
        match dims {
            None => dims = Some((x.len(), y.len())),
            Some((l, r)) => {
                if x.len() != l || y.len() != r {
                    return Err(ApcError::Parse {
                        path: path.into(),
                        line: lineno,
                        col: 1,
                        msg: format!(
                            "dimension mismatch: expected {l} -> {r}, found {} -> {}",
                            x.len(),
                            y.len()
                        ),
                    });
                }
            }
        }
        pairs.push((x, y));
    }
    let (left_dim, right_dim) = dims.ok_or_else(|| ApcError::Parse {
        path: path.into(),
        line: 1,
        col: 1,
        msg: "empty map file".into(),
    })?;
    Ok(MapFile { left_dim, right_dim, pairs })
}

pub fn load_map(path: &Path) -> Result<MapFile> {
    let text = fs::read_to_string(path)?;
    parse_map(&path.display().to_string(), &text)
}

/// Exact rational from `p/q` or a decimal literal (parsed base-10 exactly, so
/// `0.1` means one tenth, not its float approximation).
pub fn parse_rational(path: &str, lineno: usize, col: usize, tok: &str) -> Result<BigRational> {
    let bad = |msg: String| ApcError::Parse {
        path: path.into(),
        line: lineno,
        col,
        msg,
    };
    if let Some(slash) = tok.find('/') {
        let p = tok[..slash]
            .parse::<BigInt>()
            .map_err(|_| bad(format!("bad numerator in `{tok}`")))?;
        let q = tok[slash + 1..]
            .parse::<BigInt>()
            .map_err(|_| bad(format!("bad denominator in `{tok}`")))?;
        if q.is_zero() {
            return Err(bad("zero denominator".into()));
        }
        return Ok(BigRational::new(p, q));
    }
    let (sign, body) = match tok.strip_prefix('-') {
        Some(rest) => (-BigInt::one(), rest),
        None => (BigInt::one(), tok.strip_prefix('+').unwrap_or(tok)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(dot) => (&body[..dot], &body[dot + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad(format!("expected a number, found `{tok}`")));
    }
    let digits = |s: &str| -> Result<BigInt> {
        if s.is_empty() {
            return Ok(BigInt::zero());
        }
        if !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(format!("expected a number, found `{tok}`")));
        }
        Ok(s.parse::<BigInt>().expect("digits parse"))
    };
    let int_v = digits(int_part)?;
    let frac_v = digits(frac_part)?;
    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(sign * (int_v * &scale + frac_v), scale))
}

/// Parsed density file: box lengths plus the nonzero entries.
#[derive(Debug, Clone)]
pub struct DensityFile {
    pub lengths: Vec<u64>,
    pub entries: Vec<(Vec<i64>, BigRational)>,
}

pub fn parse_density(path: &str, text: &str) -> Result<DensityFile> {
    let mut lengths: Vec<u64> = Vec::new();
    let mut entries = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        let toks = tokens_with_cols(line);
        if toks.is_empty() {
            continue;
        }
        if !seen_header {
            let (c0, head) = toks[0];
            if head != "density" {
                return Err(ApcError::Parse {
                    path: path.into(),
                    line: lineno,
                    col: c0,
                    msg: format!("expected `density` header, found `{head}`"),
                });
            }
            for &(c, t) in &toks[1..] {
                let n = parse_i64(path, lineno, c, t)?;
                if n < 1 {
                    return Err(ApcError::Parse {
                        path: path.into(),
                        line: lineno,
                        col: c,
                        msg: format!("length must be ≥ 1, found {n}"),
                    });
                }
                lengths.push(n as u64);
            }
            if lengths.is_empty() {
                return Err(ApcError::Parse {
                    path: path.into(),
                    line: lineno,
                    col: c0,
                    msg: "header needs at least one length".into(),
                });
            }
            seen_header = true;
            continue;
        }
        if toks.len() != lengths.len() + 1 {
            return Err(ApcError::Parse {
                path: path.into(),
                line: lineno,
                col: toks[0].0,
                msg: format!(
                    "expected {} coordinates and one value, found {} tokens",
                    lengths.len(),
                    toks.len()
                ),
            });
        }
        let mut coords = Vec::with_capacity(lengths.len());
        for (i, &(c, t)) in toks[..lengths.len()].iter().enumerate() {
            let x = parse_i64(path, lineno, c, t)?;
            let n = lengths[i] as i64;
            if x < 0 || x >= n {
                return Err(ApcError::Parse {
                    path: path.into(),
                    line: lineno,
                    col: c,
                    msg: format!("coordinate {x} outside [0, {n})"),
                });
            }
            coords.push(x);
        }
        let (vc, vt) = toks[lengths.len()];
        let value = parse_rational(path, lineno, vc, vt)?;
        entries.push((coords, value));
    }
    if !seen_header {
        return Err(ApcError::Parse {
            path: path.into(),
            line: 1,
            col: 1,
            msg: "empty density file (missing header)".into(),
        });
    }
    Ok(DensityFile { lengths, entries })
}

pub fn load_density(path: &Path) -> Result<DensityFile> {
    let text = fs::read_to_string(path)?;
    parse_density(&path.display().to_string(), &text)
}
