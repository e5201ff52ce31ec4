//! Text formats: edge lists, permutation files and diagnostic matrix dumps.
//!
//! Edge list: a header line `n m`, then one edge per line as two decimal
//! labels. Users are `1..=n`, attributes `n+1..=n+m`. Blank lines and lines
//! starting with `#` are skipped. Attribute-attribute lines are rejected.
//!
//! Permutation file: one line `i pi(i)` per user, both as user labels.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{AttrId, AttributedGraph, Permutation, UserId};

fn parse_pair(line: &str, lineno: usize) -> Result<(u64, u64)> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> Result<u64> {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("missing {what}"),
        })?;
        tok.parse::<u64>().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad {what} {tok:?}: {e}"),
        })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line: lineno,
            msg: "expected exactly two fields".into(),
        });
    }
    Ok((a, b))
}

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let t = s.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

pub fn read_edge_list<R: Read>(reader: R) -> Result<AttributedGraph> {
    let mut lines = content_lines(BufReader::new(reader));
    let (lineno, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing `n m` header".into(),
    })?;
    let header = header.map_err(|e| Error::io("reading edge list", e))?;
    let (n, m) = parse_pair(&header, lineno)?;
    let (n, m) = (n as usize, m as usize);
    let mut uu = Vec::new();
    let mut ua = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io("reading edge list", e))?;
        let (a, b) = parse_pair(&line, lineno)?;
        let is_user = |x: u64| x >= 1 && x <= n as u64;
        let at_line = |e: Error| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        };
        match (is_user(a), is_user(b)) {
            (true, true) => uu.push((
                UserId::from_label(a, n).map_err(at_line)?,
                UserId::from_label(b, n).map_err(at_line)?,
            )),
            (true, false) => ua.push((
                UserId::from_label(a, n).map_err(at_line)?,
                AttrId::from_label(b, n, m).map_err(at_line)?,
            )),
            (false, true) => ua.push((
                UserId::from_label(b, n).map_err(at_line)?,
                AttrId::from_label(a, n, m).map_err(at_line)?,
            )),
            (false, false) => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("attribute-attribute edge {a} {b} is not allowed"),
                })
            }
        }
    }
    AttributedGraph::from_edges(n, m, uu, ua)
}

pub fn write_edge_list<W: Write>(g: &AttributedGraph, mut w: W) -> Result<()> {
    let n = g.n();
    let ctx = |e| Error::io("writing edge list", e);
    writeln!(w, "{} {}", n, g.m()).map_err(ctx)?;
    for (a, b) in g.user_edges() {
        writeln!(w, "{} {}", a.label(), b.label()).map_err(ctx)?;
    }
    for (u, a) in g.attr_edges() {
        writeln!(w, "{} {}", u.label(), a.label(n)).map_err(ctx)?;
    }
    w.flush().map_err(ctx)
}

pub fn read_permutation<R: Read>(reader: R) -> Result<Permutation> {
    let mut pairs = Vec::new();
    for (lineno, line) in content_lines(BufReader::new(reader)) {
        let line = line.map_err(|e| Error::io("reading permutation", e))?;
        pairs.push((lineno, parse_pair(&line, lineno)?));
    }
    let n = pairs.len();
    let mut map = vec![u32::MAX; n];
    for (lineno, (i, pi)) in pairs {
        let at_line = |e: Error| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        };
        let i = UserId::from_label(i, n).map_err(at_line)?;
        let pi = UserId::from_label(pi, n).map_err(at_line)?;
        if map[i.index()] != u32::MAX {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("{i} listed twice"),
            });
        }
        map[i.index()] = pi.0;
    }
    Permutation::from_vec(map)
}

pub fn write_permutation<W: Write>(pi: &Permutation, mut w: W) -> Result<()> {
    let ctx = |e| Error::io("writing permutation", e);
    for (i, &v) in pi.as_slice().iter().enumerate() {
        writeln!(w, "{} {}", i + 1, u64::from(v) + 1).map_err(ctx)?;
    }
    w.flush().map_err(ctx)
}

pub fn read_edge_list_file(path: &Path) -> Result<AttributedGraph> {
    let f = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_edge_list(f)
}

pub fn write_edge_list_file(g: &AttributedGraph, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_edge_list(g, BufWriter::new(f))
}

pub fn write_permutation_file(pi: &Permutation, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_permutation(pi, BufWriter::new(f))
}

/// Dumps a square score matrix as CSV. The first row holds the column user
/// labels, and each following row starts with its own row label.
pub fn write_matrix_csv<W: Write, T: Display>(rows: &[Vec<T>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let width = rows.first().map_or(0, Vec::len);
    let mut header = vec!["user".to_string()];
    header.extend((1..=width).map(|j| j.to_string()));
    out.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(ToString::to_string));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::io("writing matrix csv", e))
}
