//! Edge-list text format: a header line `n m`, then `m` lines `u v`.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Parses the edge-list format and validates that the result is a forest.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let (n, m) = pair::<usize>(hl, header)?;
    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                msg: format!("more than the declared {m} edges"),
            });
        }
        let (u, v) = pair::<NodeId>(line, l)?;
        if u as usize >= n || v as usize >= n {
            return Err(Error::Parse {
                line,
                msg: format!("endpoint out of range 0..{n}"),
            });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            msg: format!("expected {m} edges, found {}", edges.len()),
        });
    }
    let g = Graph::from_edges(n, &edges)?;
    if !g.is_forest() {
        return Err(Error::InvariantViolation(
            "edge list contains a cycle".into(),
        ));
    }
    Ok(g)
}

fn pair<T: std::str::FromStr>(line: usize, l: &str) -> Result<(T, T)> {
    let mut it = l.split_whitespace();
    let mut next = || -> Result<T> {
        it.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected two integers, got '{l}'"),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: format!("trailing tokens in '{l}'"),
        });
    }
    Ok((a, b))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn write_edge_list(g: &Graph, mut w: impl Write) -> Result<()> {
    writeln!(w, "{} {}", g.n(), g.m())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn store_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
