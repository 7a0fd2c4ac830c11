//! Polygonal 2D meshes with element/face topology and boundary tags.

mod generate;
mod io;

pub use generate::{apply_grading, gauss_lobatto_nodes, gen_quad_family, gen_tri_family, GradedShape, QuadKind, TriStyle};
pub use io::{read_mesh, write_mesh};

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceTag {
    Interior,
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "bottom" => Ok(Side::Bottom),
            "top" => Ok(Side::Top),
            _ => Err(Error::Config(format!("unknown side `{s}`"))),
        }
    }
}

/// A mesh face. Vertices are ordered along the CCW boundary of `left`, so the
/// face normal (rotated tangent) points out of `left`.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub v: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub tag: FaceTag,
}

/// Face of an element together with the orientation flag: `true` when the
/// stored face normal points out of that element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ElementFace {
    pub face: usize,
    pub outward: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    pub element_faces: Vec<Vec<ElementFace>>,
    pub h_t: Vec<f64>,
    pub h_f: Vec<f64>,
    pub area: Vec<f64>,
    pub centroid: Vec<Point>,
}

fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    })
    .sum::<f64>()
        * 0.5
}

impl Mesh {
    /// Builds topology from CCW element polygons; every boundary face is tagged Dirichlet.
    pub fn from_elements(vertices: Vec<Point>, elements: Vec<Vec<usize>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Mesh("no elements".into()));
        }
        let mut faces: Vec<Face> = Vec::new();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_faces = Vec::with_capacity(elements.len());
        for (t, el) in elements.iter().enumerate() {
            if el.len() < 3 {
                return Err(Error::Mesh(format!("element {t} has fewer than 3 vertices")));
            }
            if let Some(&bad) = el.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!("element {t} references vertex {bad} of {}", vertices.len())));
            }
            let mut ef = Vec::with_capacity(el.len());
            for i in 0..el.len() {
                let (a, b) = (el[i], el[(i + 1) % el.len()]);
                if a == b {
                    return Err(Error::Mesh(format!("element {t} has a repeated vertex")));
                }
                let key = (a.min(b), a.max(b));
                match edge_map.get(&key) {
                    None => {
                        edge_map.insert(key, faces.len());
                        ef.push(ElementFace { face: faces.len(), outward: true });
                        faces.push(Face { v: [a, b], left: t, right: None, tag: FaceTag::Dirichlet });
                    }
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.right.is_some() || face.v != [b, a] {
                            return Err(Error::Mesh(format!("non-manifold or inconsistently oriented face between vertices {a} and {b}")));
                        }
                        face.right = Some(t);
                        face.tag = FaceTag::Interior;
                        ef.push(ElementFace { face: f, outward: false });
                    }
                }
            }
            element_faces.push(ef);
        }
        Self::finish(vertices, elements, faces, element_faces)
    }

    /// Builds a mesh from explicit faces (as read from file); validates consistency.
    pub fn from_parts(vertices: Vec<Point>, elements: Vec<Vec<usize>>, faces: Vec<Face>) -> Result<Self> {
        let derived = Self::from_elements(vertices.clone(), elements.clone())?;
        if derived.faces.len() != faces.len() {
            return Err(Error::Mesh(format!("face list has {} faces, topology implies {}", faces.len(), derived.faces.len())));
        }
        let mut key_to_face: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, f) in faces.iter().enumerate() {
            key_to_face.insert((f.v[0].min(f.v[1]), f.v[0].max(f.v[1])), i);
        }
        let mut element_faces = Vec::with_capacity(elements.len());
        for (t, el) in elements.iter().enumerate() {
            let mut ef = Vec::new();
            for i in 0..el.len() {
                let (a, b) = (el[i], el[(i + 1) % el.len()]);
                let fi = *key_to_face
                    .get(&(a.min(b), a.max(b)))
                    .ok_or_else(|| Error::Mesh(format!("edge ({a},{b}) of element {t} missing from face list")))?;
                let f = &faces[fi];
                let outward = f.v == [a, b];
                let owner_ok = if outward { f.left == t } else { f.right == Some(t) };
                if !owner_ok {
                    return Err(Error::Mesh(format!("face {fi} incidence does not match element {t}")));
                }
                ef.push(ElementFace { face: fi, outward });
            }
            element_faces.push(ef);
        }
        for (i, f) in faces.iter().enumerate() {
            let interior = f.right.is_some();
            if interior != (f.tag == FaceTag::Interior) {
                return Err(Error::Mesh(format!("face {i} tag inconsistent with its incidence")));
            }
        }
        Self::finish(vertices, elements, faces, element_faces)
    }

    fn finish(vertices: Vec<Point>, elements: Vec<Vec<usize>>, faces: Vec<Face>, element_faces: Vec<Vec<ElementFace>>) -> Result<Self> {
        let mut h_t = Vec::with_capacity(elements.len());
        let mut area = Vec::with_capacity(elements.len());
        let mut centroid = Vec::with_capacity(elements.len());
        for (t, el) in elements.iter().enumerate() {
            let pts: Vec<Point> = el.iter().map(|&v| vertices[v]).collect();
            let a = signed_area(&pts);
            if a <= 0.0 {
                return Err(Error::Mesh(format!("element {t} is not counter-clockwise (signed area {a:e})")));
            }
            let n = pts.len();
            let (mut cx, mut cy) = (0.0, 0.0);
            for i in 0..n {
                let (p, q) = (pts[i], pts[(i + 1) % n]);
                let w = p[0] * q[1] - q[0] * p[1];
                cx += (p[0] + q[0]) * w;
                cy += (p[1] + q[1]) * w;
            }
            centroid.push([cx / (6.0 * a), cy / (6.0 * a)]);
            let mut h: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    h = h.max(dist(pts[i], pts[j]));
                }
            }
            h_t.push(h);
            area.push(a);
        }
        let h_f = faces.iter().map(|f| dist(vertices[f.v[0]], vertices[f.v[1]])).collect();
        Ok(Self { vertices, elements, faces, element_faces, h_t, h_f, area, centroid })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn element_vertices(&self, t: usize) -> Vec<Point> {
        self.elements[t].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Endpoints of face `f` as seen from the orientation of its stored normal.
    pub fn face_points(&self, f: usize) -> [Point; 2] {
        let v = self.faces[f].v;
        [self.vertices[v[0]], self.vertices[v[1]]]
    }

    pub fn face_midpoint(&self, f: usize) -> Point {
        let [a, b] = self.face_points(f);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Unit normal of the stored face orientation (outward of `left`).
    pub fn face_normal(&self, f: usize) -> Point {
        let [a, b] = self.face_points(f);
        let l = self.h_f[f];
        [(b[1] - a[1]) / l, -(b[0] - a[0]) / l]
    }

    /// Outward unit normal n_TF.
    pub fn normal_out(&self, ef: ElementFace) -> Point {
        let n = self.face_normal(ef.face);
        if ef.outward {
            n
        } else {
            [-n[0], -n[1]]
        }
    }

    /// Element on the other side of face `ef` seen from `t`.
    pub fn neighbor(&self, t: usize, ef: ElementFace) -> Option<usize> {
        let f = &self.faces[ef.face];
        if f.left == t {
            f.right
        } else {
            Some(f.left)
        }
    }

    pub fn boundary_face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.right.is_none()).count()
    }

    pub fn count_tag(&self, tag: FaceTag) -> usize {
        self.faces.iter().filter(|f| f.tag == tag).count()
    }

    pub fn max_h(&self) -> f64 {
        self.h_t.iter().cloned().fold(0.0, f64::max)
    }

    /// Tags boundary faces on `side` as Neumann and all other boundary faces as Dirichlet.
    pub fn classify_boundary(mut self, neumann_side: Option<Side>) -> Result<Self> {
        let side = neumann_side.ok_or_else(|| Error::Mesh("Neumann side required".into()))?;
        let tol = 1e-12;
        for f in 0..self.faces.len() {
            if self.faces[f].right.is_some() {
                continue;
            }
            let m = self.face_midpoint(f);
            let on = match side {
                Side::Left => (m[0] + 1.0).abs() < tol,
                Side::Right => (m[0] - 1.0).abs() < tol,
                Side::Bottom => (m[1] + 1.0).abs() < tol,
                Side::Top => (m[1] - 1.0).abs() < tol,
            };
            self.faces[f].tag = if on { FaceTag::Neumann } else { FaceTag::Dirichlet };
        }
        Ok(self)
    }

    /// Number of distinct vertices used by the elements.
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
