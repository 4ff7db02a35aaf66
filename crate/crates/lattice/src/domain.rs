//! Lattice discretizations of polygonal domains with marked boundary points.

use crate::error::{LatticeError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Triangular,
    Square,
}

impl LatticeKind {
    fn offsets(self) -> &'static [[i64; 2]] {
        match self {
            LatticeKind::Triangular => &[[1, 0], [-1, 0], [0, 1], [0, -1], [1, -1], [-1, 1]],
            LatticeKind::Square => &[[1, 0], [-1, 0], [0, 1], [0, -1]],
        }
    }

    /// Position of the lattice point with integer coordinates `c` at unit mesh
    /// (axial coordinates on the triangular lattice).
    fn position(self, c: [i64; 2]) -> [f64; 2] {
        let (q, r) = (c[0] as f64, c[1] as f64);
        match self {
            LatticeKind::Triangular => [q + 0.5 * r, SQRT3_2 * r],
            LatticeKind::Square => [q, r],
        }
    }
}

/// A simple polygon with counterclockwise vertices, parameterized by
/// normalized arclength from vertex 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
    cumulative: Vec<f64>,
    perimeter: f64,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(LatticeError::Domain("need at least three finite vertices".into()));
        }
        let m = vertices.len();
        let area: f64 = (0..m)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % m]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if area <= 0.0 {
            return Err(LatticeError::Domain("vertices must be listed counterclockwise".into()));
        }
        let mut cumulative = vec![0.0];
        for i in 0..m {
            let (a, b) = (vertices[i], vertices[(i + 1) % m]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            if len == 0.0 {
                return Err(LatticeError::Domain(format!("repeated vertex {i}")));
            }
            cumulative.push(cumulative[i] + len);
        }
        let perimeter = cumulative[m];
        Ok(Self { vertices, cumulative, perimeter })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for a in v {
            for b in v {
                d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        d
    }

    /// Nearest boundary point of `p`: (normalized arclength in [0, 1), distance).
    pub fn nearest(&self, p: [f64; 2]) -> (f64, f64) {
        let m = self.vertices.len();
        let mut best = (0.0, f64::INFINITY);
        for i in 0..m {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % m]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
            let d = (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy);
            if d < best.1 {
                let s = (self.cumulative[i] + t * len2.sqrt()) / self.perimeter;
                best = (if s >= 1.0 { s - 1.0 } else { s }, d);
            }
        }
        best
    }

    /// The boundary point at normalized arclength `s`.
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let s = s.rem_euclid(1.0) * self.perimeter;
        let m = self.vertices.len();
        let i = (0..m).rev().find(|&i| self.cumulative[i] <= s).unwrap_or(0);
        let (a, b) = (self.vertices[i], self.vertices[(i + 1) % m]);
        let t = (s - self.cumulative[i]) / (self.cumulative[i + 1] - self.cumulative[i]);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// Closed-polygon membership, counting points within `tol` of an edge.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        if self.nearest(p).1 <= tol {
            return true;
        }
        let m = self.vertices.len();
        let mut inside = false;
        for i in 0..m {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % m]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// A site just outside the domain, adjacent to at least one interior site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundarySite {
    pub coord: [i64; 2],
    pub pos: [f64; 2],
    /// Normalized arclength of the nearest polygon point.
    pub param: f64,
    /// Boundary arc, 0-based: arc k runs from mark k to mark k + 1 and is
    /// edge e_{k+1}. Always 0 when there are no marks.
    pub arc: usize,
}

/// Interior sites of a polygon on a lattice of spacing `mesh`, plus the ring
/// of outside sites touching them, split into boundary arcs by the marks.
#[derive(Clone, Debug)]
pub struct LatticeDomain {
    pub kind: LatticeKind,
    pub mesh: f64,
    pub polygon: Polygon,
    pub marks: Vec<f64>,
    pub coords: Vec<[i64; 2]>,
    pub sites: Vec<[f64; 2]>,
    /// Interior neighbours of each interior site.
    pub neighbors: Vec<Vec<usize>>,
    pub boundary: Vec<BoundarySite>,
    /// Boundary neighbours (indices into `boundary`) of each interior site.
    pub boundary_neighbors: Vec<Vec<usize>>,
    interior_index: HashMap<[i64; 2], usize>,
    boundary_index: HashMap<[i64; 2], usize>,
}

impl LatticeDomain {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Number of marked-point pairs n (there are 2n marks).
    pub fn n_pairs(&self) -> usize {
        self.marks.len() / 2
    }

    pub fn n_arcs(&self) -> usize {
        self.marks.len().max(1)
    }

    /// Total degree (interior plus boundary neighbours) of an interior site.
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len() + self.boundary_neighbors[v].len()
    }

    pub fn interior_at(&self, coord: [i64; 2]) -> Option<usize> {
        self.interior_index.get(&coord).copied()
    }

    pub fn boundary_at(&self, coord: [i64; 2]) -> Option<usize> {
        self.boundary_index.get(&coord).copied()
    }

    /// The boundary site whose nearest polygon point is closest in arclength
    /// to `s`.
    pub fn boundary_near(&self, s: f64) -> usize {
        let circ = |a: f64| {
            let d = (a - s).rem_euclid(1.0);
            d.min(1.0 - d)
        };
        (0..self.boundary.len())
            .min_by(|&a, &b| circ(self.boundary[a].param).total_cmp(&circ(self.boundary[b].param)))
            .expect("domains have a non-empty boundary")
    }

    /// Normalized arclength of the boundary point nearest to interior site `v`.
    pub fn site_param(&self, v: usize) -> f64 {
        self.polygon.nearest(self.sites[v]).0
    }
}

fn arc_of(marks: &[f64], t: f64) -> usize {
    if marks.is_empty() {
        return 0;
    }
    marks.iter().rposition(|&m| m <= t).unwrap_or(marks.len() - 1)
}

/// Discretizes the polygon on a lattice of spacing `mesh`. Marks are
/// normalized arclength positions in [0, 1), strictly increasing, an even
/// number of them (or none). Sites on the polygon count as interior.
pub fn build_domain(kind: LatticeKind, vertices: &[[f64; 2]], marks: &[f64], mesh: f64) -> Result<LatticeDomain> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(LatticeError::Domain(format!("mesh must be positive, got {mesh}")));
    }
    let polygon = Polygon::new(vertices.to_vec())?;
    if marks.len() % 2 == 1 {
        return Err(LatticeError::Domain(format!("need an even number of marks, got {}", marks.len())));
    }
    if marks.iter().any(|m| !(0.0..1.0).contains(m)) || marks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LatticeError::Domain("marks must be strictly increasing in [0, 1)".into()));
    }
    let m = marks.len();
    for i in 0..m {
        let gap = (marks[(i + 1) % m] - marks[i]).rem_euclid(1.0) * polygon.perimeter;
        if m > 1 && gap < mesh {
            return Err(LatticeError::MeshTooCoarse(mesh, format!("marks {} and {} closer than the mesh", i + 1, (i + 1) % m + 1)));
        }
    }
    let unit: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0] / mesh, v[1] / mesh]).collect();
    let (xmin, xmax) = unit.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v[0]), b.max(v[0])));
    let (ymin, ymax) = unit.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v[1]), b.max(v[1])));
    let (rmin, rmax, qmin, qmax) = match kind {
        LatticeKind::Triangular => {
            let r0 = (ymin / SQRT3_2).floor() as i64 - 2;
            let r1 = (ymax / SQRT3_2).ceil() as i64 + 2;
            (r0, r1, (xmin - 0.5 * r1 as f64).floor() as i64 - 2, (xmax - 0.5 * r0 as f64).ceil() as i64 + 2)
        }
        LatticeKind::Square => {
            (ymin.floor() as i64 - 2, ymax.ceil() as i64 + 2, xmin.floor() as i64 - 2, xmax.ceil() as i64 + 2)
        }
    };
    let width = (qmax - qmin + 1) as usize;
    let cells = width * (rmax - rmin + 1) as usize;
    if cells > 50_000_000 {
        return Err(LatticeError::Domain(format!("mesh {mesh} gives {cells} lattice cells")));
    }
    let cell = |c: [i64; 2]| ((c[1] - rmin) as usize) * width + (c[0] - qmin) as usize;
    let pos = |c: [i64; 2]| {
        let p = kind.position(c);
        [p[0] * mesh, p[1] * mesh]
    };
    let tol = 1e-9 * mesh;

    let mut grid = vec![usize::MAX; cells];
    let mut coords = Vec::new();
    for r in rmin + 1..rmax {
        for q in qmin + 1..qmax {
            if polygon.contains(pos([q, r]), tol) {
                grid[cell([q, r])] = coords.len();
                coords.push([q, r]);
            }
        }
    }
    if coords.is_empty() {
        return Err(LatticeError::MeshTooCoarse(mesh, "no lattice site inside the polygon".into()));
    }

    let n = coords.len();
    let mut neighbors = vec![Vec::new(); n];
    let mut boundary_neighbors = vec![Vec::new(); n];
    let mut boundary: Vec<BoundarySite> = Vec::new();
    let mut boundary_index = HashMap::new();
    for (v, &c) in coords.iter().enumerate() {
        for o in kind.offsets() {
            let d = [c[0] + o[0], c[1] + o[1]];
            let g = grid[cell(d)];
            if g != usize::MAX {
                neighbors[v].push(g);
                continue;
            }
            let b = *boundary_index.entry(d).or_insert_with(|| {
                let p = pos(d);
                let (param, _) = polygon.nearest(p);
                boundary.push(BoundarySite { coord: d, pos: p, param, arc: arc_of(marks, param) });
                boundary.len() - 1
            });
            boundary_neighbors[v].push(b);
        }
    }

    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &u in &neighbors[v] {
            if !seen[u] {
                seen[u] = true;
                reached += 1;
                queue.push_back(u);
            }
        }
    }
    if reached != n {
        return Err(LatticeError::MeshTooCoarse(mesh, "interior sites are not connected".into()));
    }

    let arcs = marks.len().max(1);
    let mut per_arc = vec![0usize; arcs];
    for b in &boundary {
        per_arc[b.arc] += 1;
    }
    if let Some(k) = per_arc.iter().position(|&c| c == 0) {
        return Err(LatticeError::MeshTooCoarse(mesh, format!("boundary arc {} has no lattice site", k + 1)));
    }

    let interior_index = coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let sites = coords.iter().map(|&c| pos(c)).collect();
    Ok(LatticeDomain {
        kind,
        mesh,
        polygon,
        marks: marks.to_vec(),
        coords,
        sites,
        neighbors,
        boundary,
        boundary_neighbors,
        interior_index,
        boundary_index,
    })
}

/// Triangular-lattice discretization used for percolation.
pub fn build_polygon_domain(vertices: &[[f64; 2]], marks: &[f64], mesh: f64) -> Result<LatticeDomain> {
    if marks.len() < 2 {
        return Err(LatticeError::Domain(format!("need 2n ≥ 2 marks, got {}", marks.len())));
    }
    build_domain(LatticeKind::Triangular, vertices, marks, mesh)
}

/// The unit square on the square lattice with `size` steps per side: sites
/// (i, j) with 0 < i, j < size are interior, the rest of the edge sites
/// form the (wired) boundary.
pub fn build_square_domain(size: usize) -> Result<LatticeDomain> {
    if size < 2 {
        return Err(LatticeError::MeshTooCoarse(1.0 / size.max(1) as f64, "need size ≥ 2".into()));
    }
    let v = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    // Discretize the open square, then measure boundary positions on the
    // closed one, where the edge sites live.
    let h = 0.5 / size as f64;
    let inner = [[h, h], [1.0 - h, h], [1.0 - h, 1.0 - h], [h, 1.0 - h]];
    let mut e = build_domain(LatticeKind::Square, &inner, &[], 1.0 / size as f64)?;
    e.polygon = Polygon::new(v.to_vec())?;
    for b in &mut e.boundary {
        b.param = e.polygon.nearest(b.pos).0;
    }
    Ok(e)
}

/// JSON description of a lattice domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lattice", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// A polygon with 2n marks on the triangular lattice.
    Triangular { vertices: Vec<[f64; 2]>, marks: Vec<f64>, mesh: f64 },
    /// The unit square with `size` steps per side, wired boundary.
    Square { size: usize },
}

impl DomainSpec {
    pub fn build(&self) -> Result<LatticeDomain> {
        match self {
            DomainSpec::Triangular { vertices, marks, mesh } => build_polygon_domain(vertices, marks, *mesh),
            DomainSpec::Square { size } => build_square_domain(*size),
        }
    }

    /// Regular hexagon of circumradius 1 with marks at its vertices, sides
    /// along lattice directions.
    pub fn regular_hexagon(mesh: f64) -> Self {
        let vertices = (0..6)
            .map(|k| {
                let a = k as f64 * std::f64::consts::FRAC_PI_3;
                [a.cos(), a.sin()]
            })
            .collect();
        DomainSpec::Triangular { vertices, marks: (0..6).map(|k| k as f64 / 6.0).collect(), mesh }
    }

    /// Unit lozenge with 60° and 120° angles and marks at its corners.
    pub fn lozenge(mesh: f64) -> Self {
        DomainSpec::Triangular {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.5, SQRT3_2], [0.5, SQRT3_2]],
            marks: vec![0.0, 0.25, 0.5, 0.75],
            mesh,
        }
    }
}
