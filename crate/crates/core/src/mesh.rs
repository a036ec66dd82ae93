//! Plane-strain meshes, the native text format, structured generators,
//! Dirichlet data and the `(u, φ)` unknown numbering.

use crate::element::{self, ElementKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("element {element} references node {node}: index out of range (mesh has {nodes} nodes)")]
    IndexOutOfRange {
        element: usize,
        node: usize,
        nodes: usize,
    },
    #[error("element {element} has a non-positive Jacobian determinant ({det:.3e})")]
    NegativeJacobian { element: usize, det: f64 },
    #[error("nodes {a} and {b} coincide")]
    DuplicateNode { a: usize, b: usize },
    #[error("invalid mesh dimensions: {0}")]
    InvalidDimensions(String),
    #[error("unknown node set `{0}`")]
    UnknownSet(String),
    #[error("node {node} has conflicting Dirichlet values for dof {dof:?}")]
    ConflictingConstraint { node: usize, dof: Dof },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Node coordinates [mm].
    pub nodes: Vec<[f64; 2]>,
    pub kind: ElementKind,
    /// Counter-clockwise connectivity, 0-based.
    pub elements: Vec<Vec<usize>>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
}

impl Mesh {
    /// Builds and validates a mesh.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        kind: ElementKind,
        elements: Vec<Vec<usize>>,
        node_sets: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self, MeshError> {
        let mesh = Self {
            nodes,
            kind,
            elements,
            node_sets,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, e: usize) -> Vec<[f64; 2]> {
        self.elements[e].iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize], MeshError> {
        self.node_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| MeshError::UnknownSet(name.to_string()))
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.nodes.len();
        for (e, conn) in self.elements.iter().enumerate() {
            if conn.len() != self.kind.n_nodes() {
                return Err(MeshError::InvalidDimensions(format!(
                    "element {} has {} nodes, expected {}",
                    e + 1,
                    conn.len(),
                    self.kind.n_nodes()
                )));
            }
            if let Some(&bad) = conn.iter().find(|&&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    element: e + 1,
                    node: bad + 1,
                    nodes: n,
                });
            }
            let coords = self.element_coords(e);
            for qp in element::quadrature(self.kind) {
                let det = element::jacobian_det(self.kind, &coords, qp.xi);
                if !(det > 0.0) {
                    return Err(MeshError::NegativeJacobian { element: e + 1, det });
                }
            }
        }
        for ids in self.node_sets.values() {
            if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
                return Err(MeshError::InvalidDimensions(format!("node set references node {}", bad + 1)));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.nodes[a][0].total_cmp(&self.nodes[b][0]));
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                if self.nodes[b][0] - self.nodes[a][0] > DUPLICATE_TOL {
                    break;
                }
                if (self.nodes[b][1] - self.nodes[a][1]).abs() <= DUPLICATE_TOL {
                    return Err(MeshError::DuplicateNode {
                        a: a.min(b) + 1,
                        b: a.max(b) + 1,
                    });
                }
            }
        }
        Ok(())
    }

    /// Smallest element edge length [mm].
    pub fn min_edge_length(&self) -> f64 {
        self.elements
            .iter()
            .flat_map(|conn| {
                (0..conn.len()).map(move |i| {
                    let a = self.nodes[conn[i]];
                    let b = self.nodes[conn[(i + 1) % conn.len()]];
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest element edge length [mm].
    pub fn max_edge_length(&self) -> f64 {
        self.elements
            .iter()
            .flat_map(|conn| {
                (0..conn.len()).map(move |i| {
                    let a = self.nodes[conn[i]];
                    let b = self.nodes[conn[(i + 1) % conn.len()]];
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
            })
            .fold(0.0, f64::max)
    }

    /// Drops the elements selected by `remove` (given their centroid) and
    /// renumbers the surviving nodes; node sets keep their surviving members.
    pub fn without_elements(&self, mut remove: impl FnMut([f64; 2]) -> bool) -> Result<Self, MeshError> {
        let kept: Vec<Vec<usize>> = self
            .elements
            .iter()
            .filter(|conn| {
                let k = conn.len() as f64;
                let c = conn.iter().fold([0.0, 0.0], |acc, &n| {
                    [acc[0] + self.nodes[n][0] / k, acc[1] + self.nodes[n][1] / k]
                });
                !remove(c)
            })
            .cloned()
            .collect();
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for conn in &kept {
            for &n in conn {
                if new_id[n] == usize::MAX {
                    new_id[n] = usize::MAX - 1;
                }
            }
        }
        for (old, id) in new_id.iter_mut().enumerate() {
            if *id != usize::MAX {
                *id = nodes.len();
                nodes.push(self.nodes[old]);
            }
        }
        let elements = kept
            .into_iter()
            .map(|conn| conn.into_iter().map(|n| new_id[n]).collect())
            .collect();
        let node_sets = self
            .node_sets
            .iter()
            .map(|(name, ids)| {
                let ids = ids.iter().filter(|&&n| new_id[n] != usize::MAX).map(|&n| new_id[n]).collect();
                (name.clone(), ids)
            })
            .collect();
        Mesh::new(nodes, self.kind, elements, node_sets)
    }

    /// Adds a node set holding every node accepted by `select`.
    pub fn add_node_set(&mut self, name: &str, mut select: impl FnMut([f64; 2]) -> bool) {
        let ids = (0..self.nodes.len()).filter(|&n| select(self.nodes[n])).collect();
        self.node_sets.insert(name.to_string(), ids);
    }

    /// Node adjacency through shared elements, sorted and without self loops.
    pub fn node_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for conn in &self.elements {
            for &a in conn {
                for &b in conn {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Parses the native text format.
    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line, message: String| MeshError::Parse { line, message };

        let (ln, header) = lines.next().ok_or_else(|| perr(1, "empty mesh file".into()))?;
        let n_nodes = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["nodes", n] => n.parse::<usize>().map_err(|e| perr(ln, format!("node count: {e}")))?,
            _ => return Err(perr(ln, "expected `nodes <N>`".into())),
        };
        let mut nodes = Vec::with_capacity(n_nodes);
        for k in 0..n_nodes {
            let (ln, l) = lines.next().ok_or_else(|| perr(ln, "unexpected end of node block".into()))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(perr(ln, "expected `id x y`".into()));
            }
            expect_id(f[0], k + 1, ln)?;
            let x = f[1].parse::<f64>().map_err(|e| perr(ln, format!("x: {e}")))?;
            let y = f[2].parse::<f64>().map_err(|e| perr(ln, format!("y: {e}")))?;
            nodes.push([x, y]);
        }

        let (ln, header) = lines.next().ok_or_else(|| perr(ln, "missing element block".into()))?;
        let (n_el, kind) = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["elements", m, kind] => (
                m.parse::<usize>().map_err(|e| perr(ln, format!("element count: {e}")))?,
                kind.parse::<ElementKind>().map_err(|e| perr(ln, e))?,
            ),
            _ => return Err(perr(ln, "expected `elements <M> <quad4|tri3>`".into())),
        };
        let mut elements = Vec::with_capacity(n_el);
        for k in 0..n_el {
            let (ln, l) = lines.next().ok_or_else(|| perr(ln, "unexpected end of element block".into()))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 1 + kind.n_nodes() {
                return Err(perr(ln, format!("expected id and {} node ids", kind.n_nodes())));
            }
            expect_id(f[0], k + 1, ln)?;
            let conn = f[1..]
                .iter()
                .map(|s| match s.parse::<usize>() {
                    Ok(0) => Err(perr(ln, "node ids are 1-based".into())),
                    Ok(i) => Ok(i - 1),
                    Err(e) => Err(perr(ln, format!("node id: {e}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            elements.push(conn);
        }

        let mut node_sets = BTreeMap::new();
        while let Some((ln, header)) = lines.next() {
            let (name, k) = match header.split_whitespace().collect::<Vec<_>>()[..] {
                ["nodeset", name, k] => (
                    name.to_string(),
                    k.parse::<usize>().map_err(|e| perr(ln, format!("set size: {e}")))?,
                ),
                _ => return Err(perr(ln, "expected `nodeset <name> <k>`".into())),
            };
            let mut ids = Vec::with_capacity(k);
            let mut last = ln;
            while ids.len() < k {
                let (ln, l) = lines.next().ok_or_else(|| perr(last, "unexpected end of node set".into()))?;
                last = ln;
                for s in l.split_whitespace() {
                    match s.parse::<usize>() {
                        Ok(i) if i >= 1 => ids.push(i - 1),
                        _ => return Err(perr(ln, format!("bad node id `{s}`"))),
                    }
                }
            }
            if ids.len() != k {
                return Err(perr(last, format!("node set `{name}` declares {k} ids")));
            }
            node_sets.insert(name, ids);
        }
        Mesh::new(nodes, kind, elements, node_sets)
    }

    /// Canonical text form; parsing it gives back an identical mesh.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for (i, [x, y]) in self.nodes.iter().enumerate() {
            writeln!(s, "{} {:?} {:?}", i + 1, x, y).unwrap();
        }
        writeln!(s, "elements {} {}", self.elements.len(), self.kind).unwrap();
        for (i, conn) in self.elements.iter().enumerate() {
            write!(s, "{}", i + 1).unwrap();
            for n in conn {
                write!(s, " {}", n + 1).unwrap();
            }
            s.push('\n');
        }
        for (name, ids) in &self.node_sets {
            writeln!(s, "nodeset {} {}", name, ids.len()).unwrap();
            for chunk in ids.chunks(16) {
                let line: Vec<String> = chunk.iter().map(|n| (n + 1).to_string()).collect();
                writeln!(s, "{}", line.join(" ")).unwrap();
            }
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MeshError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn expect_id(field: &str, expected: usize, line: usize) -> Result<(), MeshError> {
    match field.parse::<usize>() {
        Ok(id) if id == expected => Ok(()),
        _ => Err(MeshError::Parse {
            line,
            message: format!("expected id {expected}, found `{field}`"),
        }),
    }
}

/// Reads and validates a mesh file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    Mesh::parse(&std::fs::read_to_string(path)?)
}

/// Uniform `nx × ny` quad mesh of `[0, width] × [0, height]` with node sets
/// `left`, `right`, `bottom`, `top` and `origin` (the corner at the origin).
pub fn structured_rect_mesh(width: f64, height: f64, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    if !(width > 0.0 && height > 0.0) {
        return Err(MeshError::InvalidDimensions(format!("width {width} and height {height} must be > 0")));
    }
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidDimensions("nx and ny must be >= 1".into()));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut sets = BTreeMap::new();
    sets.insert("bottom".to_string(), (0..=nx).map(|i| id(i, 0)).collect());
    sets.insert("top".to_string(), (0..=nx).map(|i| id(i, ny)).collect());
    sets.insert("left".to_string(), (0..=ny).map(|j| id(0, j)).collect());
    sets.insert("right".to_string(), (0..=ny).map(|j| id(nx, j)).collect());
    sets.insert("origin".to_string(), vec![id(0, 0)]);
    Mesh::new(nodes, ElementKind::Quad4, elements, sets)
}

/// Plate with an edge slot cut from the left along its mid-height.
///
/// The slot is the middle two element rows over `0 ≤ x < notch_length`, so
/// `ny` must be even and the crack plane `y = height/2` is a row of nodes.
/// Adds the node set `ligament` (crack-plane nodes ahead of the slot) and
/// `tip` (the slot tip node).
pub fn edge_notched_mesh(width: f64, height: f64, nx: usize, ny: usize, notch_length: f64) -> Result<Mesh, MeshError> {
    if ny % 2 != 0 || ny < 4 {
        return Err(MeshError::InvalidDimensions("ny must be even and >= 4".into()));
    }
    let hy = height / ny as f64;
    let mid = 0.5 * height;
    let base = structured_rect_mesh(width, height, nx, ny)?;
    let mut mesh = base.without_elements(|c| c[0] < notch_length && (c[1] - mid).abs() < hy)?;
    let tol = 1e-9 * width.max(height);
    let tip_x = mesh
        .nodes
        .iter()
        .filter(|p| (p[1] - mid).abs() < tol)
        .map(|p| p[0])
        .fold(f64::INFINITY, f64::min);
    mesh.add_node_set("ligament", |p| (p[1] - mid).abs() < tol);
    mesh.add_node_set("tip", |p| (p[1] - mid).abs() < tol && (p[0] - tip_x).abs() < tol);
    Ok(mesh)
}

/// Plate with two edge slots one element row high: one from the left at
/// `left_y` and one from the right at `right_y`.
pub fn double_notched_mesh(
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    notch_length: f64,
    left_y: f64,
    right_y: f64,
) -> Result<Mesh, MeshError> {
    let hy = height / ny as f64;
    let base = structured_rect_mesh(width, height, nx, ny)?;
    base.without_elements(|c| {
        (c[0] < notch_length && (c[1] - left_y).abs() < 0.5 * hy)
            || (c[0] > width - notch_length && (c[1] - right_y).abs() < 0.5 * hy)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dof {
    X,
    Y,
}

impl Dof {
    pub fn index(self) -> usize {
        match self {
            Dof::X => 0,
            Dof::Y => 1,
        }
    }
}

/// Prescribed displacement on a node set, `u = scale · signal(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletBc {
    pub set: String,
    pub dof: Dof,
    /// Multiplier of the load signal; zero fixes the dof.
    #[serde(default)]
    pub scale: f64,
}

impl DirichletBc {
    pub fn fixed(set: &str, dof: Dof) -> Self {
        Self {
            set: set.to_string(),
            dof,
            scale: 0.0,
        }
    }

    pub fn driven(set: &str, dof: Dof, scale: f64) -> Self {
        Self {
            set: set.to_string(),
            dof,
            scale,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.scale == 0.0
    }
}

/// A constrained displacement component: global index `2·node + dof` and its
/// signal multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub node: usize,
    pub dof: Dof,
    pub scale: f64,
}

impl Constraint {
    pub fn global(&self) -> usize {
        2 * self.node + self.dof.index()
    }
}

/// Resolves boundary conditions into one constraint per constrained
/// displacement component, sorted by global index.
pub fn resolve_constraints(mesh: &Mesh, bcs: &[DirichletBc]) -> Result<Vec<Constraint>, MeshError> {
    let mut map: BTreeMap<(usize, Dof), f64> = BTreeMap::new();
    for bc in bcs {
        for &node in mesh.node_set(&bc.set)? {
            match map.insert((node, bc.dof), bc.scale) {
                Some(prev) if prev != bc.scale => {
                    return Err(MeshError::ConflictingConstraint { node: node + 1, dof: bc.dof })
                }
                _ => {}
            }
        }
    }
    let mut out: Vec<Constraint> = map
        .into_iter()
        .map(|((node, dof), scale)| Constraint { node, dof, scale })
        .collect();
    out.sort_by_key(Constraint::global);
    Ok(out)
}

/// Numbering of the free unknowns: free displacement components first, then
/// one phase-field unknown per node. Both blocks follow a reverse
/// Cuthill–McKee node order to keep the factor bandwidth small.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub n_nodes: usize,
    /// Free index of displacement component `2·node + dof`, if free.
    pub u_free: Vec<Option<usize>>,
    /// Global displacement component of each free index.
    pub u_global: Vec<usize>,
    /// Phase-field index of each node.
    pub phi_index: Vec<usize>,
    pub constraints: Vec<Constraint>,
}

impl DofMap {
    pub fn n_free_u(&self) -> usize {
        self.u_global.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_nodes
    }

    pub fn n_total(&self) -> usize {
        self.n_free_u() + self.n_phi()
    }

    /// Row of the phase-field unknown of `node` in the combined system.
    pub fn phi_row(&self, node: usize) -> usize {
        self.n_free_u() + self.phi_index[node]
    }
}

/// Numbers the unknowns of `mesh` with the given constrained components.
pub fn dof_map(mesh: &Mesh, constraints: &[Constraint]) -> DofMap {
    let order = reverse_cuthill_mckee(&mesh.node_adjacency());
    let n = mesh.n_nodes();
    let mut constrained = vec![false; 2 * n];
    for c in constraints {
        constrained[c.global()] = true;
    }
    let mut u_free = vec![None; 2 * n];
    let mut u_global = Vec::with_capacity(2 * n);
    let mut phi_index = vec![0; n];
    for (rank, &node) in order.iter().enumerate() {
        phi_index[node] = rank;
        for d in 0..2 {
            let g = 2 * node + d;
            if !constrained[g] {
                u_free[g] = Some(u_global.len());
                u_global.push(g);
            }
        }
    }
    DofMap {
        n_nodes: n,
        u_free,
        u_global,
        phi_index,
        constraints: constraints.to_vec(),
    }
}

/// Reverse Cuthill–McKee ordering; returns nodes in their new order.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(adj, start);
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], start: usize) -> usize {
    let mut root = start;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(adj, root);
        let max = levels.iter().filter_map(|l| *l).max().unwrap_or(0);
        if max <= depth && root != start {
            break;
        }
        depth = max;
        let far = (0..adj.len())
            .filter(|&v| levels[v] == Some(max))
            .min_by_key(|&v| (adj[v].len(), v))
            .unwrap_or(root);
        if far == root {
            break;
        }
        root = far;
    }
    root
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

/// Global nodal fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// Displacements `[u_x, u_y]` per node [mm].
    pub u: Vec<f64>,
    /// Phase field per node [-].
    pub phi: Vec<f64>,
    /// Load-program time in cycles.
    pub time: f64,
}

impl FieldState {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            u: vec![0.0; 2 * n_nodes],
            phi: vec![0.0; n_nodes],
            time: 0.0,
        }
    }

    pub fn clamp_phase(&mut self) {
        for p in &mut self.phi {
            *p = p.clamp(0.0, 1.0);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.phi).all(|v| v.is_finite())
    }

    /// Packs free displacements then the phase field into one vector.
    pub fn pack(&self, dofs: &DofMap) -> Vec<f64> {
        let mut z = vec![0.0; dofs.n_total()];
        for (i, &g) in dofs.u_global.iter().enumerate() {
            z[i] = self.u[g];
        }
        for (node, &p) in self.phi.iter().enumerate() {
            z[dofs.phi_row(node)] = p;
        }
        z
    }

    /// Inverse of [`FieldState::pack`]; constrained components are untouched.
    pub fn unpack(&mut self, dofs: &DofMap, z: &[f64]) {
        for (i, &g) in dofs.u_global.iter().enumerate() {
            self.u[g] = z[i];
        }
        for node in 0..self.phi.len() {
            self.phi[node] = z[dofs.phi_row(node)];
        }
    }

    /// Sets every constrained component to `scale · signal`.
    pub fn apply_constraints(&mut self, dofs: &DofMap, signal: f64) {
        for c in &dofs.constraints {
            self.u[c.global()] = c.scale * signal;
        }
    }
}
