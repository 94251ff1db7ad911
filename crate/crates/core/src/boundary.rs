//! Triangulation of `∂U` by radial projection of a subdivided polyhedron.
//!
//! The base polyhedron is chosen so that the cone's spherical trace is a union
//! of its edges: the tetrahedron for T, the bipyramid over the Y directions
//! for Y and the octahedron for the plane. Edge points are spaced uniformly in
//! angle, so after projection the trace `K ∩ ∂U` is carried exactly by mesh
//! edges and the components of `∂U \ K` are found by flood fill.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::cones::{ConeKind, Piece, T_VERTICES};
use crate::domain::{BoundaryRegion, ConvexDomain};
use crate::error::{Error, Result};
use crate::geom::{Point, TriangleMesh};
use crate::measure::UnionFind;

/// Polyhedron whose edges contain the spherical trace of the cone.
#[derive(Clone, Debug)]
pub struct BaseSurface {
    pub vertices: Vec<[f64; 3]>,
    /// Outward oriented faces.
    pub faces: Vec<[usize; 3]>,
    /// Edges `(i, j)`, `i < j`, that lie on the cone's trace.
    pub cone_edges: Vec<(usize, usize)>,
    /// Base vertex chains along each piece of the trace, in
    /// [`crate::cones::ConeSpec::pieces`] order.
    pub piece_chains: Vec<Vec<usize>>,
    /// Direction contained in component `i` of `∂U \ K`.
    pub anchors: Vec<[f64; 3]>,
}

fn unit3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn neg(v: [f64; 3]) -> [f64; 3] {
    [-v[0], -v[1], -v[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn orient_outward(vertices: &[[f64; 3]], faces: &mut [[usize; 3]]) {
    for f in faces.iter_mut() {
        let [a, b, c] = f.map(|i| vertices[i]);
        let n = crate::geom::cross3(
            [b[0] - a[0], b[1] - a[1], b[2] - a[2]],
            [c[0] - a[0], c[1] - a[1], c[2] - a[2]],
        );
        let centroid = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
        if dot3(n, centroid) < 0.0 {
            f.swap(1, 2);
        }
    }
}

pub fn base_surface(kind: ConeKind) -> BaseSurface {
    match kind {
        ConeKind::T => {
            let vertices: Vec<[f64; 3]> = T_VERTICES.iter().map(|&v| unit3(v)).collect();
            let mut faces = vec![[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
            orient_outward(&vertices, &mut faces);
            let mut cone_edges = Vec::new();
            let mut piece_chains = Vec::new();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    cone_edges.push((i, j));
                    piece_chains.push(vec![i, j]);
                }
            }
            let anchors = vertices.iter().map(|&v| neg(v)).collect();
            BaseSurface { vertices, faces, cone_edges, piece_chains, anchors }
        }
        ConeKind::Y => {
            let dirs = crate::cones::y_horizontal_dirs();
            let mut vertices = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
            vertices.extend(dirs);
            let mut faces = Vec::new();
            let mut cone_edges = Vec::new();
            let mut piece_chains = Vec::new();
            for k in 0..3 {
                let (a, b) = (2 + k, 2 + (k + 1) % 3);
                faces.push([0, a, b]);
                faces.push([1, b, a]);
                cone_edges.push((0, a));
                cone_edges.push((1, a));
                piece_chains.push(vec![0, a, 1]);
            }
            orient_outward(&vertices, &mut faces);
            let anchors = dirs.iter().map(|&d| neg(d)).collect();
            BaseSurface { vertices, faces, cone_edges, piece_chains, anchors }
        }
        ConeKind::Plane => {
            let vertices = vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ];
            let ring = [0, 2, 1, 3];
            let mut faces = Vec::new();
            let mut cone_edges = Vec::new();
            for k in 0..4 {
                let (a, b) = (ring[k], ring[(k + 1) % 4]);
                faces.push([4, a, b]);
                faces.push([5, b, a]);
                cone_edges.push((a.min(b), a.max(b)));
            }
            orient_outward(&vertices, &mut faces);
            BaseSurface {
                vertices,
                faces,
                cone_edges,
                piece_chains: vec![vec![0, 2, 1, 3, 0]],
                anchors: vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
            }
        }
    }
}

/// `n + 1` unit points from `a` to `b`, equally spaced in angle. The endpoints
/// are returned bit-exactly.
pub fn slerp_samples(a: [f64; 3], b: [f64; 3], n: usize) -> Vec<[f64; 3]> {
    let omega = dot3(a, b).clamp(-1.0, 1.0).acos();
    let s = omega.sin();
    let mut out = Vec::with_capacity(n + 1);
    out.push(a);
    for k in 1..n {
        let t = k as f64 / n as f64;
        let wa = ((1.0 - t) * omega).sin() / s;
        let wb = (t * omega).sin() / s;
        out.push(unit3([wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]]));
    }
    out.push(b);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum VertexKey {
    Base(usize),
    Edge(usize, usize, usize),
    Face(usize, usize, usize),
}

/// Triangulated `∂U` with per-triangle labels.
#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    pub mesh: TriangleMesh,
    /// Region of each triangle (classified at the projected centroid).
    pub regions: Vec<BoundaryRegion>,
    /// Component of `∂U \ K` containing each triangle.
    pub components: Vec<usize>,
    pub n_components: usize,
    /// Subdivisions per base edge.
    pub resolution: usize,
    base: BaseSurface,
    edge_vertex_ids: HashMap<(usize, usize), Vec<usize>>,
}

impl BoundaryMesh {
    pub fn base(&self) -> &BaseSurface {
        &self.base
    }

    /// Mesh vertex ids along base edge `(i, j)`, ordered from `i` to `j`.
    pub fn edge_vertices(&self, i: usize, j: usize) -> Vec<usize> {
        let ids = &self.edge_vertex_ids[&(i.min(j), i.max(j))];
        if i < j {
            ids.clone()
        } else {
            ids.iter().rev().copied().collect()
        }
    }

    /// Vertex ids tracing the cone's boundary curve over `piece`; closed
    /// curves repeat their first vertex at the end.
    pub fn piece_chain(&self, piece_index: usize) -> Vec<usize> {
        let chain = &self.base.piece_chains[piece_index];
        let mut out: Vec<usize> = Vec::new();
        for w in chain.windows(2) {
            let ids = self.edge_vertices(w[0], w[1]);
            if out.is_empty() {
                out.extend(ids);
            } else {
                out.extend(&ids[1..]);
            }
        }
        out
    }

    pub fn piece_chain_for(&self, piece: Piece, n_arcs: usize) -> Vec<usize> {
        match piece {
            Piece::Arc(k) => self.piece_chain(k),
            Piece::Circle(k) => self.piece_chain(n_arcs + k),
        }
    }

    /// Unit outward normal of triangle `t` (3D meshes).
    pub fn normal(&self, t: usize) -> [f64; 3] {
        triangle_normal(&self.mesh, t)
    }

    pub fn area_by_region(&self) -> std::collections::BTreeMap<BoundaryRegion, f64> {
        let mut out = std::collections::BTreeMap::new();
        for (t, r) in self.regions.iter().enumerate() {
            *out.entry(*r).or_insert(0.0) += self.mesh.triangle_area(t);
        }
        out
    }

    /// CSV with one row per face: index, region kind, region index, component.
    pub fn labels_csv(&self) -> String {
        let mut s = String::from("face,region,region_index,component\n");
        for (t, (r, c)) in self.regions.iter().zip(&self.components).enumerate() {
            let idx = r.index().map(|i| i.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{t},{},{idx},{c}", r.kind_name());
        }
        s
    }
}

pub(crate) fn triangle_normal(mesh: &TriangleMesh, t: usize) -> [f64; 3] {
    let [a, b, c] = mesh.triangles()[t].map(|i| mesh.vertex(i));
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = crate::geom::cross3(u, v);
    let len = dot3(n, n).sqrt();
    [n[0] / len, n[1] / len, n[2] / len]
}

/// Smallest subdivision that separates the plates from the bands.
pub const MIN_RESOLUTION: usize = 4;

/// Resolution used by the calibration checks unless told otherwise.
pub const DEFAULT_RESOLUTION: usize = 32;

/// Radially projected triangulation of `∂U` with `resolution` subdivisions
/// per base edge. Fails with [`Error::ResolutionTooCoarse`] when some plate
/// or band receives no triangle.
pub fn boundary_mesh(dom: &ConvexDomain, resolution: usize) -> Result<BoundaryMesh> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooCoarse(format!(
            "boundary resolution {resolution} is below the minimum {MIN_RESOLUTION}"
        )));
    }
    let n = resolution;
    let dim = dom.dim();
    let base = base_surface(dom.spec().kind());
    let mut ids: HashMap<VertexKey, usize> = HashMap::new();
    let mut coords: Vec<f64> = Vec::new();
    let mut add = |key: VertexKey, p: [f64; 3], coords: &mut Vec<f64>| -> Result<usize> {
        if let Some(&i) = ids.get(&key) {
            return Ok(i);
        }
        let mut x = Point::zeros(dim);
        for k in 0..3 {
            x[k] = p[k];
        }
        let y = dom.project_to_boundary(&x)?;
        coords.extend(y.iter());
        let i = ids.len();
        ids.insert(key, i);
        Ok(i)
    };
    // edges first, in canonical direction, so ids along an edge are known
    let mut edge_vertex_ids = HashMap::new();
    let mut edge_points: HashMap<(usize, usize), Vec<[f64; 3]>> = HashMap::new();
    for f in &base.faces {
        for k in 0..3 {
            let (i, j) = (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]));
            if edge_points.contains_key(&(i, j)) {
                continue;
            }
            let pts = slerp_samples(base.vertices[i], base.vertices[j], n);
            let mut vid = Vec::with_capacity(n + 1);
            for (m, p) in pts.iter().enumerate() {
                let key = if m == 0 {
                    VertexKey::Base(i)
                } else if m == n {
                    VertexKey::Base(j)
                } else {
                    VertexKey::Edge(i, j, m)
                };
                vid.push(add(key, *p, &mut coords)?);
            }
            edge_vertex_ids.insert((i, j), vid);
            edge_points.insert((i, j), pts);
        }
    }
    let edge_id = |a: usize, b: usize, m: usize| -> usize {
        // m-th vertex counted from a
        let ids = &edge_vertex_ids[&(a.min(b), a.max(b))];
        if a < b {
            ids[m]
        } else {
            ids[n - m]
        }
    };
    let mut tris = Vec::new();
    let mut tri_face = Vec::new();
    for (fi, f) in base.faces.iter().enumerate() {
        let [a, b, c] = *f;
        let (va, vb, vc) = (base.vertices[a], base.vertices[b], base.vertices[c]);
        let mut grid = vec![vec![0usize; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=(n - i) {
                grid[i][j] = if j == 0 {
                    edge_id(a, b, i)
                } else if i == 0 {
                    edge_id(a, c, j)
                } else if i + j == n {
                    edge_id(b, c, j)
                } else {
                    let wa = (n - i - j) as f64;
                    let (wb, wc) = (i as f64, j as f64);
                    let p = unit3([
                        wa * va[0] + wb * vb[0] + wc * vc[0],
                        wa * va[1] + wb * vb[1] + wc * vc[1],
                        wa * va[2] + wb * vb[2] + wc * vc[2],
                    ]);
                    add(VertexKey::Face(fi, i, j), p, &mut coords)?
                };
            }
        }
        for i in 0..n {
            for j in 0..(n - i) {
                tris.push([grid[i][j], grid[i + 1][j], grid[i][j + 1]]);
                tri_face.push(fi);
                if i + j + 2 <= n {
                    tris.push([grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
                    tri_face.push(fi);
                }
            }
        }
    }
    let ntri = tris.len();
    let mesh = TriangleMesh::new(dim, coords, tris)?;
    if mesh.triangles().len() != ntri {
        return Err(Error::ResolutionTooCoarse("degenerate triangles in the boundary mesh".into()));
    }
    let regions: Vec<BoundaryRegion> = (0..ntri)
        .map(|t| {
            let [a, b, c] = mesh.triangles()[t];
            let cen = (mesh.vertex_point(a) + mesh.vertex_point(b) + mesh.vertex_point(c)) / 3.0;
            let y = dom.project_to_boundary(&cen)?;
            dom.classify_boundary(&y)
        })
        .collect::<Result<_>>()?;
    let spec = dom.spec();
    for j in 0..spec.singular_dirs().len() {
        if !regions.contains(&BoundaryRegion::Plate(j)) {
            return Err(Error::ResolutionTooCoarse(format!("plate {j} received no triangle")));
        }
    }
    for k in 0..spec.arcs().len() {
        if !regions.contains(&BoundaryRegion::Band(k)) {
            return Err(Error::ResolutionTooCoarse(format!("band {k} received no triangle")));
        }
    }
    let (components, n_components) = flood_fill_components(&mesh, &tri_face, &base)?;
    Ok(BoundaryMesh { mesh, regions, components, n_components, resolution: n, base, edge_vertex_ids })
}

/// Components of `∂U \ K`: triangles are joined across every mesh edge that
/// does not lie on a cone edge of the base polyhedron. Component `i` is the
/// one containing the base face closest to anchor `i`.
fn flood_fill_components(mesh: &TriangleMesh, tri_face: &[usize], base: &BaseSurface) -> Result<(Vec<usize>, usize)> {
    let ntri = mesh.triangles().len();
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let is_cone_edge = |f: usize, g: usize| {
        let shared: Vec<usize> = base.faces[f].iter().copied().filter(|v| base.faces[g].contains(v)).collect();
        shared.len() == 2 && base.cone_edges.contains(&(shared[0].min(shared[1]), shared[0].max(shared[1])))
    };
    let mut uf = UnionFind::new(ntri);
    let mut keys: Vec<_> = by_edge.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let ts = &by_edge[&key];
        if ts.len() != 2 {
            return Err(Error::InvalidMesh("boundary mesh is not watertight".into()));
        }
        let (f, g) = (tri_face[ts[0]], tri_face[ts[1]]);
        if f == g || !is_cone_edge(f, g) {
            uf.union(ts[0], ts[1]);
        }
    }
    // label components by anchor
    let mut face_rep = vec![usize::MAX; base.faces.len()];
    for (t, &f) in tri_face.iter().enumerate() {
        if face_rep[f] == usize::MAX {
            face_rep[f] = t;
        }
    }
    let mut root_label: HashMap<usize, usize> = HashMap::new();
    for (i, anchor) in base.anchors.iter().enumerate() {
        let best = (0..base.faces.len())
            .max_by(|&f, &g| {
                let cf = face_centroid(base, f);
                let cg = face_centroid(base, g);
                dot3(cf, *anchor).total_cmp(&dot3(cg, *anchor))
            })
            .expect("base has faces");
        let root = uf.find(face_rep[best]);
        if root_label.insert(root, i).is_some() {
            return Err(Error::Numerical("two anchors fell into one component".into()));
        }
    }
    let mut labels = Vec::with_capacity(ntri);
    for t in 0..ntri {
        let root = uf.find(t);
        match root_label.get(&root) {
            Some(&l) => labels.push(l),
            None => return Err(Error::Numerical("component without an anchor".into())),
        }
    }
    Ok((labels, base.anchors.len()))
}

fn face_centroid(base: &BaseSurface, f: usize) -> [f64; 3] {
    let [a, b, c] = base.faces[f].map(|i| base.vertices[i]);
    unit3([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]])
}
