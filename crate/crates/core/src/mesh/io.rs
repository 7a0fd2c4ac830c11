//! Plain-text mesh format.
//!
//! ```text
//! pmesh2 v1 <nv> <ne> <nf>
//! v x y
//! e i0 i1 ... ik          (CCW)
//! f a b left right tag    (right = -1 on the boundary, tag in {i,d,n})
//! ```
//! When `nf` is 0 the faces are derived from the elements and every boundary
//! face is tagged Dirichlet.

use std::io::{BufRead, Write};

use super::{Face, FaceTag, Mesh, Point};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "pmesh2 v1 {} {} {}", mesh.vertices.len(), mesh.elements.len(), mesh.faces.len())?;
    for p in &mesh.vertices {
        writeln!(w, "v {:?} {:?}", p[0], p[1])?;
    }
    for el in &mesh.elements {
        let ids: Vec<String> = el.iter().map(|v| v.to_string()).collect();
        writeln!(w, "e {}", ids.join(" "))?;
    }
    for f in &mesh.faces {
        let right = f.right.map_or(-1, |r| r as i64);
        let tag = match f.tag {
            FaceTag::Interior => 'i',
            FaceTag::Dirichlet => 'd',
            FaceTag::Neumann => 'n',
        };
        writeln!(w, "f {} {} {} {} {}", f.v[0], f.v[1], f.left, right, tag)?;
    }
    Ok(())
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let t = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    t.parse().map_err(|_| perr(line, format!("invalid {what} `{t}`")))
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<Mesh> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hl, header) = loop {
        match lines.next() {
            None => return Err(perr(1, "missing header")),
            Some((no, l)) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break (no, l);
                }
            }
        }
    };
    let mut tok = header.split_whitespace();
    if tok.next() != Some("pmesh2") || tok.next() != Some("v1") {
        return Err(perr(hl, "malformed header, expected `pmesh2 v1 <nv> <ne> <nf>`"));
    }
    let nv: usize = num(tok.next(), hl, "vertex count")?;
    let ne: usize = num(tok.next(), hl, "element count")?;
    let nf: usize = num(tok.next(), hl, "face count")?;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    let mut elements: Vec<Vec<usize>> = Vec::with_capacity(ne);
    let mut faces: Vec<Face> = Vec::with_capacity(nf);
    for (no, l) in lines {
        let l = l?;
        let mut t = l.split_whitespace();
        match t.next() {
            None => continue,
            Some("v") => {
                let x: f64 = num(t.next(), no, "x coordinate")?;
                let y: f64 = num(t.next(), no, "y coordinate")?;
                vertices.push([x, y]);
            }
            Some("e") => {
                let mut el = Vec::new();
                for s in t {
                    let v: usize = s.parse().map_err(|_| perr(no, format!("invalid vertex index `{s}`")))?;
                    if v >= nv {
                        return Err(perr(no, format!("vertex index {v} out of range ({nv} vertices)")));
                    }
                    el.push(v);
                }
                if el.len() < 3 {
                    return Err(perr(no, "element needs at least 3 vertices"));
                }
                elements.push(el);
            }
            Some("f") => {
                let a: usize = num(t.next(), no, "face vertex")?;
                let b: usize = num(t.next(), no, "face vertex")?;
                let left: usize = num(t.next(), no, "left element")?;
                let right: i64 = num(t.next(), no, "right element")?;
                let tag = match t.next() {
                    Some("i") => FaceTag::Interior,
                    Some("d") => FaceTag::Dirichlet,
                    Some("n") => FaceTag::Neumann,
                    other => return Err(perr(no, format!("invalid face tag {other:?}"))),
                };
                if a >= nv || b >= nv {
                    return Err(perr(no, "face vertex out of range"));
                }
                if left >= ne {
                    return Err(perr(no, format!("face references element {left} of {ne}")));
                }
                let right = match right {
                    -1 => None,
                    r if r >= 0 && (r as usize) < ne => Some(r as usize),
                    r => return Err(perr(no, format!("face references element {r} of {ne}"))),
                };
                faces.push(Face { v: [a, b], left, right, tag });
            }
            Some(other) => return Err(perr(no, format!("unknown record `{other}`"))),
        }
    }
    if elements.is_empty() {
        return Err(Error::Mesh("no elements".into()));
    }
    if vertices.len() != nv || elements.len() != ne || faces.len() != nf {
        return Err(perr(
            hl,
            format!("header counts {nv}/{ne}/{nf} do not match records {}/{}/{}", vertices.len(), elements.len(), faces.len()),
        ));
    }
    if nf == 0 {
        Mesh::from_elements(vertices, elements)
    } else {
        Mesh::from_parts(vertices, elements, faces)
    }
}
