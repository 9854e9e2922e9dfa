//! Plain-text mesh format:
//!
//! ```text
//! nodes <count>
//! <id> <x> <y>
//! elements <count>
//! <id> <n0> <n1> <n2> <n3>
//! boundary <count>
//! <element> <local edge> <tag>
//! ```
//!
//! Tags are `N<id>` (Neumann) or `D<id>` (Dirichlet). Coordinates use the
//! shortest representation that round-trips exactly.

use std::io::{BufRead, Write};

use nalgebra::Point2;

use super::{BoundaryEdge, BoundaryTag, Mesh, Node, QuadElement};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(out, "nodes {}", mesh.n_nodes())?;
    for n in mesh.nodes() {
        writeln!(out, "{} {:?} {:?}", n.id, n.position.x, n.position.y)?;
    }
    writeln!(out, "elements {}", mesh.n_elements())?;
    for e in mesh.elements() {
        let [a, b, c, d] = e.nodes;
        writeln!(out, "{} {a} {b} {c} {d}", e.id)?;
    }
    writeln!(out, "boundary {}", mesh.boundary().len())?;
    for be in mesh.boundary() {
        writeln!(out, "{} {} {}", be.element, be.local_edge, be.tag)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::iter::Enumerate<std::io::Lines<R>>,
}

impl<R: BufRead> Lines<R> {
    fn next_fields(&mut self) -> Result<(usize, Vec<String>)> {
        loop {
            let (i, line) = self.inner.next().ok_or(Error::MeshFormat {
                line: 0,
                detail: "unexpected end of file".into(),
            })?;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok((i + 1, trimmed.split_whitespace().map(str::to_owned).collect()));
        }
    }

    fn header(&mut self, name: &str) -> Result<usize> {
        let (line, f) = self.next_fields()?;
        if f.len() != 2 || f[0] != name {
            return Err(Error::MeshFormat {
                line,
                detail: format!("expected `{name} <count>`"),
            });
        }
        parse(&f[1], line)
    }
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::MeshFormat {
        line,
        detail: format!("cannot parse {s:?}"),
    })
}

fn expect_len(f: &[String], n: usize, line: usize) -> Result<()> {
    if f.len() != n {
        return Err(Error::MeshFormat {
            line,
            detail: format!("expected {n} fields, found {}", f.len()),
        });
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = Lines {
        inner: input.lines().enumerate(),
    };
    let n_nodes = lines.header("nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (line, f) = lines.next_fields()?;
        expect_len(&f, 3, line)?;
        nodes.push(Node {
            id: parse(&f[0], line)?,
            position: Point2::new(parse(&f[1], line)?, parse(&f[2], line)?),
        });
    }
    let n_elements = lines.header("elements")?;
    let mut elements = Vec::with_capacity(n_elements);
    for _ in 0..n_elements {
        let (line, f) = lines.next_fields()?;
        expect_len(&f, 5, line)?;
        let mut conn = [0usize; 4];
        for (k, c) in conn.iter_mut().enumerate() {
            *c = parse(&f[k + 1], line)?;
        }
        elements.push(QuadElement {
            id: parse(&f[0], line)?,
            nodes: conn,
        });
    }
    let n_boundary = lines.header("boundary")?;
    let mut boundary = Vec::with_capacity(n_boundary);
    for _ in 0..n_boundary {
        let (line, f) = lines.next_fields()?;
        expect_len(&f, 3, line)?;
        let element: usize = parse(&f[0], line)?;
        let local_edge: usize = parse(&f[1], line)?;
        let tag: BoundaryTag = f[2].parse().map_err(|detail| Error::MeshFormat { line, detail })?;
        let conn = elements
            .get(element)
            .ok_or(Error::MeshFormat {
                line,
                detail: format!("unknown element {element}"),
            })?
            .nodes;
        if local_edge > 3 {
            return Err(Error::MeshFormat {
                line,
                detail: format!("local edge {local_edge} out of range"),
            });
        }
        boundary.push(BoundaryEdge {
            element,
            local_edge,
            nodes: [conn[local_edge], conn[(local_edge + 1) % 4]],
            tag,
        });
    }
    Mesh::from_parts(nodes, elements, boundary)
}
