//! Punctured triangular lattices of hexagon centres.
//!
//! Vertices are hexagon centres `a, b, c, …`, edges are the rhombi `(ab)`
//! and triangles `(abc)` are the supports of the three-rhombus flip terms.
//! Every bounded non-triangular face of the planar graph is a hole; the
//! unbounded face is the outer boundary.
//!
//! Coordinates are axial `(q, r)` on the triangular lattice. They are only
//! used to build and check geometry; nothing downstream depends on lengths.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type TriangleId = usize;

/// Axial coordinates on the triangular lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Axial {
    pub q: i32,
    pub r: i32,
}

impl Axial {
    pub const fn new(q: i32, r: i32) -> Self {
        Self { q, r }
    }

    pub const NEIGHBOURS: [Axial; 6] = [
        Axial::new(1, 0),
        Axial::new(1, -1),
        Axial::new(0, -1),
        Axial::new(-1, 0),
        Axial::new(-1, 1),
        Axial::new(0, 1),
    ];

    pub fn add(self, o: Axial) -> Axial {
        Axial::new(self.q + o.q, self.r + o.r)
    }

    pub fn distance(self, o: Axial) -> u32 {
        let dq = self.q - o.q;
        let dr = self.r - o.r;
        dq.abs().max(dr.abs()).max((dq + dr).abs()) as u32
    }

    pub fn neighbours(self) -> impl Iterator<Item = Axial> {
        Self::NEIGHBOURS.into_iter().map(move |d| self.add(d))
    }

    /// Planar position with unit nearest-neighbour spacing.
    pub fn cartesian(self) -> (f64, f64) {
        (
            self.q as f64 + 0.5 * self.r as f64,
            self.r as f64 * 3f64.sqrt() / 2.0,
        )
    }
}

/// A face adjacent to an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    Triangle(TriangleId),
    Hole(usize),
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    /// Lattice sites (not lattice vertices) removed to make the hole.
    pub removed_vertices: Vec<Axial>,
    /// Closed, ordered edge cycle around the hole.
    #[serde(rename = "loop")]
    pub boundary_loop: Vec<EdgeId>,
}

/// A hole request for [`build_punctured_patch`]: every site within
/// `radius` of `center` is removed (`radius = 0` removes one site).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub center: Axial,
    pub radius: u32,
}

impl HoleSpec {
    pub fn single(q: i32, r: i32) -> Self {
        Self {
            center: Axial::new(q, r),
            radius: 0,
        }
    }

    fn removed(&self) -> Vec<Axial> {
        let r = self.radius as i32;
        let mut out = Vec::new();
        for dq in -r..=r {
            for dr in -r..=r {
                let a = self.center.add(Axial::new(dq, dr));
                if a.distance(self.center) <= self.radius {
                    out.push(a);
                }
            }
        }
        out.sort();
        out
    }
}

/// On-disk lattice description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFile {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
    pub triangles: Vec<[VertexId; 3]>,
    pub holes: Vec<Hole>,
    pub outer_boundary: Vec<EdgeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Axial>>,
}

/// Punctured triangular lattice. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    n_vertices: usize,
    coords: Option<Vec<Axial>>,
    edges: Vec<[VertexId; 2]>,
    triangles: Vec<[VertexId; 3]>,
    holes: Vec<Hole>,
    outer_boundary: Vec<EdgeId>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    vertex_edges: Vec<Vec<EdgeId>>,
    triangle_edges: Vec<[EdgeId; 3]>,
    edge_faces: Vec<[Face; 2]>,
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Lattice::from_file(LatticeFile::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

impl Lattice {
    /// Builds the lattice spanned by `sites`: all nearest-neighbour edges
    /// that lie on at least one fully present triangle.
    ///
    /// Holes are discovered as bounded non-triangular faces. Vertex ids
    /// follow sorted axial order and edge ids follow sorted `(a, b)` order.
    pub fn from_sites(sites: impl IntoIterator<Item = Axial>) -> Result<Self> {
        let present: BTreeSet<Axial> = sites.into_iter().collect();
        let mut tris: BTreeSet<[Axial; 3]> = BTreeSet::new();
        for &v in &present {
            for (d1, d2) in [(Axial::new(1, 0), Axial::new(0, 1)), (Axial::new(1, -1), Axial::new(1, 0))] {
                let (b, c) = (v.add(d1), v.add(d2));
                if present.contains(&b) && present.contains(&c) {
                    let mut t = [v, b, c];
                    t.sort();
                    tris.insert(t);
                }
            }
        }
        let used: BTreeSet<Axial> = tris.iter().flatten().copied().collect();
        let coords: Vec<Axial> = used.into_iter().collect();
        let id: HashMap<Axial, usize> = coords.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut edge_set = BTreeSet::new();
        let mut triangles = Vec::new();
        for t in &tris {
            let mut ids = t.map(|a| id[&a]);
            ids.sort();
            edge_set.insert([ids[0], ids[1]]);
            edge_set.insert([ids[0], ids[2]]);
            edge_set.insert([ids[1], ids[2]]);
            triangles.push(ids);
        }
        triangles.sort();
        let edges: Vec<[usize; 2]> = edge_set.into_iter().collect();
        let mut lat = Self::assemble(coords.len(), Some(coords), edges, triangles, vec![], vec![])?;
        lat.detect_faces()?;
        lat.check()?;
        Ok(lat)
    }

    fn assemble(
        n_vertices: usize,
        coords: Option<Vec<Axial>>,
        edges: Vec<[VertexId; 2]>,
        triangles: Vec<[VertexId; 3]>,
        holes: Vec<Hole>,
        outer_boundary: Vec<EdgeId>,
    ) -> Result<Self> {
        let mut edge_index = HashMap::new();
        let mut vertex_edges = vec![Vec::new(); n_vertices];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if a >= n_vertices || b >= n_vertices || a == b {
                return Err(structural(format!("edge {e} = ({a},{b}) is not a valid vertex pair")));
            }
            let key = (a.min(b), a.max(b));
            if edge_index.insert(key, e).is_some() {
                return Err(structural(format!("edge ({a},{b}) listed twice")));
            }
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
        }
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let mut es = [0; 3];
            for (slot, (u, v)) in [(a, b), (b, c), (a, c)].into_iter().enumerate() {
                es[slot] = *edge_index
                    .get(&(u.min(v), u.max(v)))
                    .ok_or_else(|| structural(format!("triangle {t} uses missing edge ({u},{v})")))?;
            }
            triangle_edges.push(es);
        }
        Ok(Self {
            n_vertices,
            coords,
            edges,
            triangles,
            holes,
            outer_boundary,
            edge_index,
            vertex_edges,
            triangle_edges,
            edge_faces: Vec::new(),
        })
    }

    /// Traces faces of the embedded graph and records holes and the outer
    /// boundary. Requires coordinates.
    fn detect_faces(&mut self) -> Result<()> {
        let coords = self.coords.clone().ok_or_else(|| structural("face detection needs coordinates"))?;
        let pos: Vec<(f64, f64)> = coords.iter().map(|a| a.cartesian()).collect();
        // neighbours sorted counter-clockwise
        let mut rot: Vec<Vec<VertexId>> = vec![Vec::new(); self.n_vertices];
        for (v, es) in self.vertex_edges.iter().enumerate() {
            let mut nb: Vec<VertexId> = es.iter().map(|&e| self.other_end(e, v)).collect();
            nb.sort_by(|&a, &b| {
                let ang = |u: usize| (pos[u].1 - pos[v].1).atan2(pos[u].0 - pos[v].0);
                ang(a).total_cmp(&ang(b))
            });
            rot[v] = nb;
        }
        let mut visited: HashMap<(VertexId, VertexId), bool> = HashMap::new();
        let mut faces: Vec<Vec<(VertexId, VertexId)>> = Vec::new();
        for &[a, b] in &self.edges {
            for (u, v) in [(a, b), (b, a)] {
                if visited.contains_key(&(u, v)) {
                    continue;
                }
                let mut walk = Vec::new();
                let (mut cu, mut cv) = (u, v);
                loop {
                    visited.insert((cu, cv), true);
                    walk.push((cu, cv));
                    let nb = &rot[cv];
                    let i = nb.iter().position(|&w| w == cu).expect("rotation contains neighbour");
                    let w = nb[(i + nb.len() - 1) % nb.len()];
                    (cu, cv) = (cv, w);
                    if (cu, cv) == (u, v) {
                        break;
                    }
                }
                faces.push(walk);
            }
        }
        let tri_set: HashMap<[VertexId; 3], TriangleId> =
            self.triangles.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut holes = Vec::new();
        let mut outer: Option<Vec<(VertexId, VertexId)>> = None;
        let mut edge_faces: Vec<Vec<Face>> = vec![Vec::new(); self.edges.len()];
        for walk in faces {
            let area: f64 = walk
                .iter()
                .map(|&(u, v)| pos[u].0 * pos[v].1 - pos[v].0 * pos[u].1)
                .sum::<f64>()
                / 2.0;
            if walk.len() == 3 && area > 0.0 {
                let mut t = [walk[0].0, walk[1].0, walk[2].0];
                t.sort();
                if let Some(&tid) = tri_set.get(&t) {
                    for &(u, v) in &walk {
                        edge_faces[self.edge_id(u, v).unwrap()].push(Face::Triangle(tid));
                    }
                    continue;
                }
            }
            if area < 0.0 {
                if outer.is_some() {
                    return Err(structural("lattice is disconnected (several unbounded faces)"));
                }
                outer = Some(walk);
            } else {
                holes.push(walk);
            }
        }
        let outer = outer.ok_or_else(|| structural("no outer face found"))?;
        // deterministic hole order: by smallest removed site, then smallest edge
        let mut hole_recs: Vec<Hole> = Vec::new();
        for walk in &holes {
            let mut seen = BTreeSet::new();
            for &(u, _) in walk {
                if !seen.insert(u) {
                    return Err(structural(format!(
                        "hole boundary through vertex {u} is not a simple cycle"
                    )));
                }
            }
            let loop_edges: Vec<EdgeId> = walk.iter().map(|&(u, v)| self.edge_id(u, v).unwrap()).collect();
            let polygon: Vec<(f64, f64)> = walk.iter().map(|&(u, _)| pos[u]).collect();
            let removed = sites_inside(&polygon, walk.iter().map(|&(u, _)| coords[u]));
            hole_recs.push(Hole {
                removed_vertices: removed,
                boundary_loop: loop_edges,
            });
        }
        hole_recs.sort_by(|a, b| {
            (a.removed_vertices.first(), a.boundary_loop.iter().min())
                .cmp(&(b.removed_vertices.first(), b.boundary_loop.iter().min()))
        });
        for (k, h) in hole_recs.iter().enumerate() {
            for &e in &h.boundary_loop {
                edge_faces[e].push(Face::Hole(k));
            }
        }
        let outer_edges: Vec<EdgeId> = outer.iter().map(|&(u, v)| self.edge_id(u, v).unwrap()).collect();
        for &e in &outer_edges {
            edge_faces[e].push(Face::Outer);
        }
        self.holes = hole_recs;
        self.outer_boundary = outer_edges;
        self.edge_faces = edge_faces
            .into_iter()
            .enumerate()
            .map(|(e, f)| {
                <[Face; 2]>::try_from(f).map_err(|f| {
                    structural(format!("edge {e} borders {} faces, expected 2", f.len()))
                })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Derives edge faces from declared holes/outer boundary (no geometry).
    fn faces_from_declared(&mut self) -> Result<()> {
        let mut edge_faces: Vec<Vec<Face>> = vec![Vec::new(); self.edges.len()];
        for (t, es) in self.triangle_edges.iter().enumerate() {
            for &e in es {
                edge_faces[e].push(Face::Triangle(t));
            }
        }
        for (k, h) in self.holes.iter().enumerate() {
            for &e in &h.boundary_loop {
                let slot = edge_faces
                    .get_mut(e)
                    .ok_or_else(|| structural(format!("hole {k} loop uses unknown edge {e}")))?;
                slot.push(Face::Hole(k));
            }
        }
        for &e in &self.outer_boundary {
            edge_faces
                .get_mut(e)
                .ok_or_else(|| structural(format!("outer boundary uses unknown edge {e}")))?
                .push(Face::Outer);
        }
        self.edge_faces = edge_faces
            .into_iter()
            .enumerate()
            .map(|(e, f)| {
                <[Face; 2]>::try_from(f).map_err(|f| {
                    structural(format!("edge {e} borders {} faces, expected 2", f.len()))
                })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Checks every structural invariant.
    pub fn check(&self) -> Result<()> {
        for (e, faces) in self.edge_faces.iter().enumerate() {
            let n_tri = faces.iter().filter(|f| matches!(f, Face::Triangle(_))).count();
            if n_tri == 0 {
                return Err(structural(format!("edge {e} belongs to no triangle")));
            }
        }
        for (k, h) in self.holes.iter().enumerate() {
            self.check_closed_loop(&h.boundary_loop)
                .map_err(|e| structural(format!("hole {k}: {e}")))?;
            let verts: Vec<VertexId> = self.loop_vertices(&h.boundary_loop)?;
            let distinct: BTreeSet<_> = verts.iter().collect();
            if distinct.len() != verts.len() {
                return Err(structural(format!("hole {k} loop is not a simple cycle")));
            }
        }
        if let Some(coords) = &self.coords {
            for (k, h) in self.holes.iter().enumerate() {
                let p = self.hole_point(k);
                let w = self.winding_number(&h.boundary_loop, p)?;
                if w.abs() != 1 {
                    return Err(structural(format!("hole {k} loop winds {w} times around it")));
                }
                for j in 0..self.holes.len() {
                    if j != k && self.winding_number(&h.boundary_loop, self.hole_point(j))? != 0 {
                        return Err(structural(format!("hole {k} loop also encloses hole {j}")));
                    }
                }
            }
            if coords.len() != self.n_vertices {
                return Err(structural("coordinate count differs from vertex count"));
            }
        }
        Ok(())
    }

    pub fn from_file(file: LatticeFile) -> Result<Self> {
        let n = file.vertices.len();
        if file.vertices.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(structural("vertex ids must be 0..n in order"));
        }
        let mut lat = Self::assemble(n, file.coords, file.edges, file.triangles, file.holes, file.outer_boundary)?;
        lat.faces_from_declared()?;
        lat.check()?;
        Ok(lat)
    }

    pub fn to_file(&self) -> LatticeFile {
        LatticeFile {
            vertices: (0..self.n_vertices).collect(),
            edges: self.edges.clone(),
            triangles: self.triangles.clone(),
            holes: self.holes.clone(),
            outer_boundary: self.outer_boundary.clone(),
            coords: self.coords.clone(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_holes(&self) -> usize {
        self.holes.len()
    }

    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[VertexId; 3]] {
        &self.triangles
    }

    pub fn triangle_edges(&self, t: TriangleId) -> [EdgeId; 3] {
        self.triangle_edges[t]
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    pub fn hole(&self, k: usize) -> Result<&Hole> {
        self.holes.get(k).ok_or(Error::UnknownHole {
            hole: k,
            count: self.holes.len(),
        })
    }

    pub fn outer_boundary(&self) -> &[EdgeId] {
        &self.outer_boundary
    }

    pub fn coords(&self) -> Option<&[Axial]> {
        self.coords.as_deref()
    }

    pub fn vertex_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertex_edges[v].len()
    }

    pub fn edge_faces(&self, e: EdgeId) -> [Face; 2] {
        self.edge_faces[e]
    }

    pub fn edge_id(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn other_end(&self, e: EdgeId, v: VertexId) -> VertexId {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Triangles containing edge `e` (one on a boundary, two in the bulk).
    pub fn edge_triangles(&self, e: EdgeId) -> Vec<TriangleId> {
        self.edge_faces[e]
            .iter()
            .filter_map(|f| match f {
                Face::Triangle(t) => Some(*t),
                _ => None,
            })
            .collect()
    }

    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        self.edge_triangles(e).len() == 1
    }

    /// Boundary polygons: vertices with fewer than six rhombi, paired with
    /// their rhombus count `m`.
    pub fn boundary_polygons(&self) -> Vec<(VertexId, Vec<EdgeId>, usize)> {
        (0..self.n_vertices)
            .filter(|&v| self.degree(v) < 6)
            .map(|v| (v, self.vertex_edges[v].clone(), self.degree(v)))
            .collect()
    }

    fn hole_point(&self, k: usize) -> (f64, f64) {
        let h = &self.holes[k];
        if !h.removed_vertices.is_empty() {
            let n = h.removed_vertices.len() as f64;
            let (sx, sy) = h
                .removed_vertices
                .iter()
                .map(|a| a.cartesian())
                .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
            return (sx / n, sy / n);
        }
        let coords = self.coords.as_ref().expect("called only with coordinates");
        let verts = self.loop_vertices(&h.boundary_loop).expect("checked loop");
        let n = verts.len() as f64;
        let (sx, sy) = verts
            .iter()
            .map(|&v| coords[v].cartesian())
            .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        (sx / n, sy / n)
    }

    /// Vertex sequence of a closed edge walk, starting at the vertex shared
    /// by the last and first edges.
    pub fn loop_vertices(&self, edges: &[EdgeId]) -> Result<Vec<VertexId>> {
        if edges.is_empty() {
            return Ok(vec![]);
        }
        let first = self.edges[edges[0]];
        let last = self.edges[*edges.last().unwrap()];
        let start = if edges.len() == 1 {
            return Err(Error::InvalidPath("a single edge cannot close".into()));
        } else if first.contains(&last[0]) && (edges.len() > 2 || first != last) {
            // choose the endpoint of the first edge shared with the last edge
            if first.contains(&last[1]) && !self.edges[edges[1]].contains(&last[0]) {
                last[0]
            } else if first.contains(&last[1]) {
                last[1]
            } else {
                last[0]
            }
        } else if first.contains(&last[1]) {
            last[1]
        } else {
            return Err(Error::InvalidPath("loop does not close".into()));
        };
        let mut verts = vec![start];
        let mut cur = start;
        for &e in edges {
            let [a, b] = self.edges[e];
            cur = if a == cur {
                b
            } else if b == cur {
                a
            } else {
                return Err(Error::InvalidPath(format!("edge {e} does not continue the walk at vertex {cur}")));
            };
            verts.push(cur);
        }
        if cur != start {
            return Err(Error::InvalidPath("loop does not return to its start".into()));
        }
        verts.pop();
        Ok(verts)
    }

    fn check_closed_loop(&self, edges: &[EdgeId]) -> Result<()> {
        if let Some(&e) = edges.iter().find(|&&e| e >= self.edges.len()) {
            return Err(Error::InvalidPath(format!("unknown edge {e}")));
        }
        if edges.len() < 3 {
            return Err(Error::InvalidPath("a closed loop needs at least three edges".into()));
        }
        self.loop_vertices(edges).map(|_| ())
    }

    /// Winding number of a closed edge walk around a planar point.
    pub fn winding_number(&self, edges: &[EdgeId], point: (f64, f64)) -> Result<i32> {
        let coords = self
            .coords
            .as_ref()
            .ok_or_else(|| structural("winding numbers need coordinates"))?;
        let verts = self.loop_vertices(edges)?;
        let mut total = 0.0;
        for i in 0..verts.len() {
            let (ax, ay) = coords[verts[i]].cartesian();
            let (bx, by) = coords[verts[(i + 1) % verts.len()]].cartesian();
            let a = (ay - point.1).atan2(ax - point.0);
            let b = (by - point.1).atan2(bx - point.0);
            let mut d = b - a;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
        }
        Ok((total / (2.0 * std::f64::consts::PI)).round() as i32)
    }

    /// Winding number of a loop around hole `k`.
    pub fn winding_around_hole(&self, edges: &[EdgeId], k: usize) -> Result<i32> {
        self.hole(k)?;
        self.winding_number(edges, self.hole_point(k))
    }

    /// Minimum hole–hole and hole–outer-boundary graph distances, in edges.
    pub fn separation_report(&self) -> SeparationReport {
        let dist_from = |sources: &BTreeSet<VertexId>| -> Vec<usize> {
            let mut d = vec![usize::MAX; self.n_vertices];
            let mut q = VecDeque::new();
            for &s in sources {
                d[s] = 0;
                q.push_back(s);
            }
            while let Some(v) = q.pop_front() {
                for &e in &self.vertex_edges[v] {
                    let w = self.other_end(e, v);
                    if d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        };
        let vset = |edges: &[EdgeId]| -> BTreeSet<VertexId> { edges.iter().flat_map(|&e| self.edges[e]).collect() };
        let outer = vset(&self.outer_boundary);
        let mut hole_outer = Vec::new();
        let mut hole_hole = Vec::new();
        for (k, h) in self.holes.iter().enumerate() {
            let d = dist_from(&vset(&h.boundary_loop));
            hole_outer.push(outer.iter().map(|&v| d[v]).min().unwrap_or(usize::MAX));
            for (j, g) in self.holes.iter().enumerate().skip(k + 1) {
                let m = vset(&g.boundary_loop).iter().map(|&v| d[v]).min().unwrap_or(usize::MAX);
                hole_hole.push((k, j, m));
            }
        }
        SeparationReport { hole_outer, hole_hole }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// Per hole, graph distance from its loop to the outer boundary.
    pub hole_outer: Vec<usize>,
    /// `(i, j, distance)` between hole loops.
    pub hole_hole: Vec<(usize, usize, usize)>,
}

fn point_in_polygon(p: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[(i + n - 1) % n];
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
    }
    inside
}

fn sites_inside(poly: &[(f64, f64)], boundary: impl Iterator<Item = Axial>) -> Vec<Axial> {
    let bnd: Vec<Axial> = boundary.collect();
    let (qmin, qmax) = (bnd.iter().map(|a| a.q).min().unwrap(), bnd.iter().map(|a| a.q).max().unwrap());
    let (rmin, rmax) = (bnd.iter().map(|a| a.r).min().unwrap(), bnd.iter().map(|a| a.r).max().unwrap());
    let mut out = Vec::new();
    for q in qmin..=qmax {
        for r in rmin..=rmax {
            let a = Axial::new(q, r);
            if !bnd.contains(&a) && point_in_polygon(a.cartesian(), poly) {
                out.push(a);
            }
        }
    }
    out
}

/// Hexagonal patch of `radius` rings around the origin with the requested
/// holes punched out.
pub fn build_punctured_patch(radius: u32, hole_specs: &[HoleSpec]) -> Result<Lattice> {
    if radius < 1 {
        return Err(Error::InvalidRadius(radius));
    }
    let origin = Axial::new(0, 0);
    for (i, h) in hole_specs.iter().enumerate() {
        // the hole's surrounding ring must lie strictly inside the patch
        if origin.distance(h.center) + h.radius + 1 >= radius {
            return Err(Error::HoleTouchesBoundary { hole: i });
        }
    }
    for i in 0..hole_specs.len() {
        for j in i + 1..hole_specs.len() {
            let (a, b) = (hole_specs[i], hole_specs[j]);
            if a.center.distance(b.center) <= a.radius + b.radius + 1 {
                return Err(Error::OverlappingHoles { first: i, second: j });
            }
        }
    }
    let removed: Vec<Vec<Axial>> = hole_specs.iter().map(HoleSpec::removed).collect();
    let all_removed: BTreeSet<Axial> = removed.iter().flatten().copied().collect();
    let r = radius as i32;
    let mut sites = Vec::new();
    for q in -r..=r {
        for rr in -r..=r {
            let a = Axial::new(q, rr);
            if a.distance(origin) <= radius && !all_removed.contains(&a) {
                sites.push(a);
            }
        }
    }
    let mut lat = Lattice::from_sites(sites)?;
    // match discovered holes to the requests
    let mut order = Vec::with_capacity(hole_specs.len());
    for (i, rem) in removed.iter().enumerate() {
        let found: Vec<usize> = lat
            .holes
            .iter()
            .enumerate()
            .filter(|(_, h)| h.removed_vertices.iter().any(|a| rem.contains(a)))
            .map(|(k, _)| k)
            .collect();
        match found.as_slice() {
            [] => return Err(Error::HoleTouchesBoundary { hole: i }),
            [k] => {
                let h = &lat.holes[*k];
                if let Some(j) = removed
                    .iter()
                    .enumerate()
                    .find(|(j, other)| *j != i && h.removed_vertices.iter().any(|a| other.contains(a)))
                    .map(|(j, _)| j)
                {
                    return Err(Error::OverlappingHoles {
                        first: i.min(j),
                        second: i.max(j),
                    });
                }
                order.push(*k);
            }
            _ => return Err(structural(format!("hole {i} split into several faces"))),
        }
    }
    if lat.holes.len() != hole_specs.len() {
        return Err(structural(format!(
            "patch has {} holes but {} were requested",
            lat.holes.len(),
            hole_specs.len()
        )));
    }
    if order.iter().enumerate().any(|(i, &k)| i != k) {
        let holes: Vec<Hole> = order.iter().map(|&k| lat.holes[k].clone()).collect();
        lat.holes = holes;
        lat.faces_from_declared()?;
    }
    Ok(lat)
}

/// One end of an open string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Hole(usize),
    Outer,
    /// Ends inside the bulk on this triangle.
    Interior(TriangleId),
}

impl Anchor {
    pub fn is_boundary(&self) -> bool {
        !matches!(self, Anchor::Interior(_))
    }

    fn from_face(f: Face) -> Self {
        match f {
            Face::Triangle(t) => Anchor::Interior(t),
            Face::Hole(k) => Anchor::Hole(k),
            Face::Outer => Anchor::Outer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum PathKind {
    OpenString { start: Anchor, end: Anchor },
    ClosedLoop,
}

/// An ordered set of edges: either a closed loop on the lattice or an open
/// string crossing edges from face to face through triangles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePath {
    pub edges: Vec<EdgeId>,
    pub kind: PathKind,
}

impl EdgePath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, PathKind::ClosedLoop)
    }

    pub fn empty_string() -> Self {
        Self {
            edges: vec![],
            kind: PathKind::OpenString {
                start: Anchor::Outer,
                end: Anchor::Outer,
            },
        }
    }
}

impl Lattice {
    /// Builds and checks an open string from an ordered edge list.
    ///
    /// Consecutive edges must share a triangle; the anchors are the faces at
    /// either end not used by the string.
    pub fn open_string(&self, edges: Vec<EdgeId>) -> Result<EdgePath> {
        if let Some(&e) = edges.iter().find(|&&e| e >= self.edges.len()) {
            return Err(Error::InvalidPath(format!("unknown edge {e}")));
        }
        if edges.is_empty() {
            return Ok(EdgePath::empty_string());
        }
        let shared = |a: EdgeId, b: EdgeId| -> Option<Face> {
            let fa = self.edge_faces[a];
            let fb = self.edge_faces[b];
            fa.iter()
                .copied()
                .find(|f| matches!(f, Face::Triangle(_)) && fb.contains(f))
        };
        let mut via = Vec::new();
        for w in edges.windows(2) {
            via.push(shared(w[0], w[1]).ok_or_else(|| {
                Error::InvalidPath(format!("edges {} and {} share no triangle", w[0], w[1]))
            })?);
        }
        for w in via.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidPath("string crosses the same triangle twice in a row".into()));
            }
        }
        let other = |e: EdgeId, used: Face| -> Face {
            let [a, b] = self.edge_faces[e];
            if a == used {
                b
            } else {
                a
            }
        };
        let (start, end) = if edges.len() == 1 {
            let [a, b] = self.edge_faces[edges[0]];
            (a, b)
        } else {
            (
                other(edges[0], via[0]),
                other(*edges.last().unwrap(), *via.last().unwrap()),
            )
        };
        Ok(EdgePath {
            edges,
            kind: PathKind::OpenString {
                start: Anchor::from_face(start),
                end: Anchor::from_face(end),
            },
        })
    }

    /// Accepts only strings whose two ends lie on the outer boundary or on
    /// hole boundaries.
    pub fn validate_boundary_string(&self, path: &EdgePath) -> Result<()> {
        match path.kind {
            PathKind::OpenString { start, end } => {
                let rebuilt = self.open_string(path.edges.clone())?;
                if rebuilt.kind != path.kind {
                    return Err(Error::InvalidPath("declared anchors do not match the edges".into()));
                }
                if !start.is_boundary() || !end.is_boundary() {
                    return Err(Error::InvalidPath(format!(
                        "string terminates in the bulk ({start:?} → {end:?})"
                    )));
                }
                Ok(())
            }
            PathKind::ClosedLoop => Err(Error::InvalidPath("expected an open string".into())),
        }
    }

    pub fn closed_loop(&self, edges: Vec<EdgeId>) -> Result<EdgePath> {
        self.check_closed_loop(&edges)?;
        Ok(EdgePath {
            edges,
            kind: PathKind::ClosedLoop,
        })
    }

    pub fn find_hole_loop(&self, hole: usize) -> Result<EdgePath> {
        let h = self.hole(hole)?;
        Ok(EdgePath {
            edges: h.boundary_loop.clone(),
            kind: PathKind::ClosedLoop,
        })
    }

    fn face_node(&self, f: Face) -> usize {
        match f {
            Face::Triangle(t) => t,
            Face::Hole(k) => self.triangles.len() + k,
            Face::Outer => self.triangles.len() + self.holes.len(),
        }
    }

    /// Dual adjacency: node → sorted (edge, node) pairs.
    fn dual_adjacency(&self) -> Vec<Vec<(EdgeId, usize)>> {
        let mut adj = vec![Vec::new(); self.triangles.len() + self.holes.len() + 1];
        for (e, [a, b]) in self.edge_faces.iter().enumerate() {
            let (na, nb) = (self.face_node(*a), self.face_node(*b));
            adj[na].push((e, nb));
            adj[nb].push((e, na));
        }
        for l in &mut adj {
            l.sort();
        }
        adj
    }

    /// Shortest string between two boundary faces that does not pass
    /// through any other hole. Ties go to the lexicographically smallest
    /// edge sequence read from `from`.
    pub fn find_string_between(&self, from: Face, to: Face) -> Result<EdgePath> {
        for f in [from, to] {
            if let Face::Hole(k) = f {
                self.hole(k)?;
            }
        }
        if from == to {
            return Err(Error::InvalidPath("string endpoints coincide".into()));
        }
        let adj = self.dual_adjacency();
        let (src, dst) = (self.face_node(from), self.face_node(to));
        let n_tri = self.triangles.len();
        let blocked = |node: usize| node >= n_tri && node != src && node != dst;
        let mut dist = vec![usize::MAX; adj.len()];
        dist[dst] = 0;
        let mut q = VecDeque::from([dst]);
        while let Some(v) = q.pop_front() {
            if v != dst && blocked(v) {
                continue;
            }
            for &(_, w) in &adj[v] {
                if dist[w] == usize::MAX && !(blocked(w)) {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                } else if dist[w] == usize::MAX && w == src {
                    dist[w] = dist[v] + 1;
                }
            }
        }
        if dist[src] == usize::MAX {
            return Err(structural("no string connects the requested boundaries"));
        }
        let mut edges = Vec::new();
        let mut cur = src;
        while cur != dst {
            let &(e, next) = adj[cur]
                .iter()
                .find(|&&(_, w)| dist[w] != usize::MAX && dist[w] + 1 == dist[cur])
                .expect("bfs tree is consistent");
            edges.push(e);
            cur = next;
        }
        self.open_string(edges)
    }

    /// Shortest string from hole `hole` to the outer boundary.
    pub fn find_boundary_string(&self, hole: usize) -> Result<EdgePath> {
        self.hole(hole)?;
        if self.outer_boundary.is_empty() {
            return Err(structural("lattice has no outer boundary"));
        }
        self.find_string_between(Face::Hole(hole), Face::Outer)
    }

    /// Boundary strings for every hole, with pairs that share edges flagged.
    pub fn find_boundary_strings(&self) -> Result<BoundaryStrings> {
        let strings: Vec<EdgePath> = (0..self.holes.len())
            .map(|k| self.find_boundary_string(k))
            .collect::<Result<_>>()?;
        let mut overlaps = Vec::new();
        for i in 0..strings.len() {
            for j in i + 1..strings.len() {
                if strings[i].edges.iter().any(|e| strings[j].edges.contains(e)) {
                    overlaps.push((i, j));
                }
            }
        }
        Ok(BoundaryStrings { strings, overlaps })
    }

    /// All simple strings of exactly `length` edges between two faces,
    /// avoiding other holes, in lexicographic order of edge sequence.
    pub fn strings_of_length(&self, from: Face, to: Face, length: usize, limit: usize) -> Result<Vec<EdgePath>> {
        for f in [from, to] {
            if let Face::Hole(k) = f {
                self.hole(k)?;
            }
        }
        let adj = self.dual_adjacency();
        let (src, dst) = (self.face_node(from), self.face_node(to));
        let n_tri = self.triangles.len();
        let mut out = Vec::new();
        let mut on_path = vec![false; adj.len()];
        let mut edges = Vec::new();
        #[allow(clippy::too_many_arguments)]
        fn dfs(
            v: usize,
            dst: usize,
            left: usize,
            n_tri: usize,
            adj: &[Vec<(EdgeId, usize)>],
            on_path: &mut [bool],
            edges: &mut Vec<EdgeId>,
            out: &mut Vec<Vec<EdgeId>>,
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            if v == dst {
                if left == 0 {
                    out.push(edges.clone());
                }
                return;
            }
            if left == 0 {
                return;
            }
            for &(e, w) in &adj[v] {
                if on_path[w] || (w >= n_tri && w != dst) {
                    continue;
                }
                on_path[w] = true;
                edges.push(e);
                dfs(w, dst, left - 1, n_tri, adj, on_path, edges, out, limit);
                edges.pop();
                on_path[w] = false;
            }
        }
        on_path[src] = true;
        let mut raw = Vec::new();
        dfs(src, dst, length, n_tri, &adj, &mut on_path, &mut edges, &mut raw, limit);
        for e in raw {
            out.push(self.open_string(e)?);
        }
        Ok(out)
    }

    /// A closed loop enclosing exactly the given holes, built as the
    /// boundary of the holes joined by shortest corridors of triangles.
    pub fn find_enclosing_loop(&self, holes: &[usize]) -> Result<EdgePath> {
        if holes.is_empty() {
            return Err(Error::InvalidPath("no holes requested".into()));
        }
        for &k in holes {
            self.hole(k)?;
        }
        let mut parity = vec![false; self.edges.len()];
        for &k in holes {
            for &e in &self.holes[k].boundary_loop {
                parity[e] ^= true;
            }
        }
        for w in holes.windows(2) {
            let s = self.find_string_between(Face::Hole(w[0]), Face::Hole(w[1]))?;
            // triangles visited by the corridor
            let mut tris = BTreeSet::new();
            for &e in &s.edges {
                for t in self.edge_triangles(e) {
                    tris.insert(t);
                }
            }
            for t in tris {
                if s.edges.iter().filter(|e| self.triangle_edges[t].contains(e)).count() == 2 {
                    for e in self.triangle_edges[t] {
                        parity[e] ^= true;
                    }
                }
            }
        }
        let set: Vec<EdgeId> = (0..self.edges.len()).filter(|&e| parity[e]).collect();
        let ordered = self.order_cycle(&set)?;
        let path = self.closed_loop(ordered)?;
        if self.coords.is_some() {
            for k in 0..self.holes.len() {
                let w = self.winding_around_hole(&path.edges, k)?.abs();
                let want = holes.contains(&k) as i32;
                if w != want {
                    return Err(structural(format!("enclosing loop winds {w} times around hole {k}")));
                }
            }
        }
        Ok(path)
    }

    /// Orders an edge set forming one simple cycle into a closed walk.
    pub fn order_cycle(&self, edges: &[EdgeId]) -> Result<Vec<EdgeId>> {
        if edges.is_empty() {
            return Ok(vec![]);
        }
        let mut inc: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for &e in edges {
            for v in self.edges[e] {
                inc.entry(v).or_default().push(e);
            }
        }
        if inc.values().any(|l| l.len() != 2) {
            return Err(Error::InvalidPath("edge set is not a simple cycle".into()));
        }
        let start_edge = *edges.iter().min().unwrap();
        let mut out = vec![start_edge];
        let mut cur = self.edges[start_edge][1];
        let mut prev = start_edge;
        while out.len() < edges.len() {
            let l = &inc[&cur];
            let next = if l[0] == prev { l[1] } else { l[0] };
            if next == start_edge {
                break;
            }
            out.push(next);
            cur = self.other_end(next, cur);
            prev = next;
        }
        if out.len() != edges.len() {
            return Err(Error::InvalidPath("edge set splits into several cycles".into()));
        }
        Ok(out)
    }

    /// Loops of exactly `length` edges homotopic to the loop around `hole`,
    /// obtained by absorbing up to `max_triangles` triangles into the hole.
    pub fn loops_around_hole(&self, hole: usize, length: usize, max_triangles: usize) -> Result<Vec<EdgePath>> {
        let base = self.hole(hole)?.boundary_loop.clone();
        let mut seen: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
        let mut found: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
        let mut frontier: Vec<(BTreeSet<TriangleId>, Vec<bool>)> = {
            let mut p = vec![false; self.edges.len()];
            base.iter().for_each(|&e| p[e] = true);
            vec![(BTreeSet::new(), p)]
        };
        for _ in 0..=max_triangles {
            let mut next = Vec::new();
            for (tris, parity) in frontier {
                let set: Vec<EdgeId> = (0..self.edges.len()).filter(|&e| parity[e]).collect();
                if !seen.insert(set.clone()) {
                    continue;
                }
                if set.len() == length {
                    if let Ok(ordered) = self.order_cycle(&set) {
                        let ok = self.coords.is_none()
                            || (0..self.holes.len()).all(|k| {
                                self.winding_around_hole(&ordered, k).map(|w| w.abs()).unwrap_or(9)
                                    == (k == hole) as i32
                            });
                        if ok {
                            found.insert(set.clone());
                        }
                    }
                }
                // grow across any triangle touching the current loop
                for &e in &set {
                    for t in self.edge_triangles(e) {
                        if tris.contains(&t) {
                            continue;
                        }
                        let mut p = parity.clone();
                        for te in self.triangle_edges[t] {
                            p[te] ^= true;
                        }
                        let mut nt = tris.clone();
                        nt.insert(t);
                        next.push((nt, p));
                    }
                }
            }
            frontier = next;
        }
        found
            .into_iter()
            .map(|s| self.order_cycle(&s).and_then(|o| self.closed_loop(o)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryStrings {
    pub strings: Vec<EdgePath>,
    /// Pairs of holes whose strings share at least one edge.
    pub overlaps: Vec<(usize, usize)>,
}

/// Flux through one hexagon or boundary polygon, in units of Φ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonFlux {
    /// Integer part `n_s` (bulk) or `n_b` (boundary).
    pub n: i64,
    /// Rhombus count around the polygon.
    pub m: usize,
    /// Broken hexagons carry an integer flux.
    pub broken: bool,
}

impl PolygonFlux {
    /// `(n + m/4)Φ₀`, which is `(n + ½)Φ₀` modulo Φ₀ for bulk hexagons, or
    /// `n·Φ₀` when broken.
    pub fn flux(&self) -> f64 {
        if self.broken {
            self.n as f64
        } else if self.m == 6 {
            self.n as f64 + 0.5
        } else {
            self.n as f64 + self.m as f64 / 4.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxMap {
    /// Per vertex (hexagon centre or boundary polygon).
    pub polygons: Vec<PolygonFlux>,
    /// Per edge `δΦ/Φ₀`.
    pub rhombus_detuning: Vec<f64>,
}

impl FluxMap {
    pub fn broken_vertices(&self) -> Vec<VertexId> {
        (0..self.polygons.len()).filter(|&v| self.polygons[v].broken).collect()
    }

    /// Rhombi whose two hexagons are both broken; only these admit a
    /// single flip.
    pub fn flip_enabled_edges(&self, lattice: &Lattice) -> Vec<EdgeId> {
        lattice
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, [a, b])| self.polygons[*a].broken && self.polygons[*b].broken)
            .map(|(e, _)| e)
            .collect()
    }

    pub fn detuned_edges(&self) -> Vec<EdgeId> {
        (0..self.rhombus_detuning.len())
            .filter(|&e| self.rhombus_detuning[e] != 0.0)
            .collect()
    }

    /// Checks the half-integer / `m/4` flux rules.
    pub fn check(&self, lattice: &Lattice) -> Result<()> {
        if self.polygons.len() != lattice.n_vertices() || self.rhombus_detuning.len() != lattice.n_edges() {
            return Err(structural("flux map does not match lattice size"));
        }
        for (v, p) in self.polygons.iter().enumerate() {
            if p.m != lattice.degree(v) {
                return Err(structural(format!("polygon {v} records m={} but has {} rhombi", p.m, lattice.degree(v))));
            }
            let frac = p.flux() - p.flux().floor();
            let want = if p.broken {
                0.0
            } else {
                (p.m as f64 / 4.0).fract()
            };
            if (frac - want).abs() > 1e-12 {
                return Err(structural(format!("polygon {v} flux {} breaks the m/4 rule", p.flux())));
            }
        }
        Ok(())
    }
}

/// Assigns the uniform flux `n_s` to every polygon, per-edge detunings and
/// the broken hexagons used for vortex operations.
///
/// Every broken hexagon needs a broken neighbour: a single broken hexagon
/// enables no flip.
pub fn assign_flux(
    lattice: &Lattice,
    n_s: i64,
    detunings: &[f64],
    broken_hexagons: &[VertexId],
) -> Result<FluxMap> {
    let detuning = if detunings.is_empty() {
        vec![0.0; lattice.n_edges()]
    } else if detunings.len() == lattice.n_edges() {
        detunings.to_vec()
    } else {
        return Err(Error::DimensionMismatch {
            expected: lattice.n_edges(),
            got: detunings.len(),
        });
    };
    if detuning.iter().any(|d| d.abs() > 0.05) {
        log::warn!("flux detuning above 0.05 Φ₀; the first-order rhombus model may be inaccurate");
    }
    let broken: BTreeSet<VertexId> = broken_hexagons.iter().copied().collect();
    for &v in &broken {
        if v >= lattice.n_vertices() {
            return Err(Error::IndexOutOfRange {
                what: "vertex",
                index: v,
                size: lattice.n_vertices(),
            });
        }
        let has_partner = lattice
            .vertex_edges(v)
            .iter()
            .any(|&e| broken.contains(&lattice.other_end(e, v)));
        if !has_partner {
            return Err(Error::IsolatedBrokenHexagon { vertex: v });
        }
    }
    let polygons = (0..lattice.n_vertices())
        .map(|v| PolygonFlux {
            n: n_s,
            m: lattice.degree(v),
            broken: broken.contains(&v),
        })
        .collect();
    let map = FluxMap {
        polygons,
        rhombus_detuning: detuning,
    };
    map.check(lattice)?;
    Ok(map)
}
