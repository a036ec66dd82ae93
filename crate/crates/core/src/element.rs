//! Linear plane-strain elements: shape functions, Gauss rules and
//! per-element geometry at the quadrature points.

use crate::tensor::{Sym, SQRT_2};
use smallvec::SmallVec;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Quad4,
    Tri3,
}

impl ElementKind {
    pub fn n_nodes(self) -> usize {
        match self {
            ElementKind::Quad4 => 4,
            ElementKind::Tri3 => 3,
        }
    }

    pub fn n_quadrature(self) -> usize {
        match self {
            ElementKind::Quad4 => 4,
            ElementKind::Tri3 => 1,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Quad4 => "quad4",
            ElementKind::Tri3 => "tri3",
        })
    }
}

impl FromStr for ElementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quad4" => Ok(ElementKind::Quad4),
            "tri3" => Ok(ElementKind::Tri3),
            other => Err(format!("unknown element type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GaussPoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

pub fn quadrature(kind: ElementKind) -> SmallVec<[GaussPoint; 4]> {
    match kind {
        ElementKind::Quad4 => {
            let a = 1.0 / 3f64.sqrt();
            [[-a, -a], [a, -a], [a, a], [-a, a]]
                .into_iter()
                .map(|xi| GaussPoint { xi, weight: 1.0 })
                .collect()
        }
        ElementKind::Tri3 => [GaussPoint {
            xi: [1.0 / 3.0, 1.0 / 3.0],
            weight: 0.5,
        }]
        .into_iter()
        .collect(),
    }
}

/// Shape function values at a reference point.
pub fn shape(kind: ElementKind, xi: [f64; 2]) -> SmallVec<[f64; 4]> {
    let [r, s] = xi;
    match kind {
        ElementKind::Quad4 => [
            0.25 * (1.0 - r) * (1.0 - s),
            0.25 * (1.0 + r) * (1.0 - s),
            0.25 * (1.0 + r) * (1.0 + s),
            0.25 * (1.0 - r) * (1.0 + s),
        ]
        .into_iter()
        .collect(),
        ElementKind::Tri3 => [1.0 - r - s, r, s].into_iter().collect(),
    }
}

/// Reference-coordinate derivatives `[dN/dξ, dN/dη]` per node.
pub fn shape_derivatives(kind: ElementKind, xi: [f64; 2]) -> SmallVec<[[f64; 2]; 4]> {
    let [r, s] = xi;
    match kind {
        ElementKind::Quad4 => [
            [-0.25 * (1.0 - s), -0.25 * (1.0 - r)],
            [0.25 * (1.0 - s), -0.25 * (1.0 + r)],
            [0.25 * (1.0 + s), 0.25 * (1.0 + r)],
            [-0.25 * (1.0 + s), 0.25 * (1.0 - r)],
        ]
        .into_iter()
        .collect(),
        ElementKind::Tri3 => [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]].into_iter().collect(),
    }
}

fn jacobian(kind: ElementKind, coords: &[[f64; 2]], xi: [f64; 2]) -> [[f64; 2]; 2] {
    let dn = shape_derivatives(kind, xi);
    let mut j = [[0.0; 2]; 2];
    for (d, x) in dn.iter().zip(coords) {
        for a in 0..2 {
            for b in 0..2 {
                j[a][b] += d[a] * x[b];
            }
        }
    }
    j
}

pub fn jacobian_det(kind: ElementKind, coords: &[[f64; 2]], xi: [f64; 2]) -> f64 {
    let j = jacobian(kind, coords, xi);
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Geometry of one quadrature point in physical space.
#[derive(Debug, Clone)]
pub struct QuadPoint {
    pub n: SmallVec<[f64; 4]>,
    /// `[dN/dx, dN/dy]` per node.
    pub grad: SmallVec<[[f64; 2]; 4]>,
    /// Gauss weight times Jacobian determinant (unit thickness).
    pub dv: f64,
    pub x: [f64; 2],
}

impl QuadPoint {
    /// Mandel strain from element displacements `[ux1, uy1, ux2, ...]`.
    pub fn strain(&self, ue: &[f64]) -> Sym {
        let mut e = [0.0; 3];
        for (a, g) in self.grad.iter().enumerate() {
            let (ux, uy) = (ue[2 * a], ue[2 * a + 1]);
            e[0] += g[0] * ux;
            e[1] += g[1] * uy;
            e[2] += g[1] * ux + g[0] * uy;
        }
        Sym::new(e[0], e[1], 0.0, e[2] / SQRT_2)
    }

    /// Column of the strain-displacement operator for local dof `2a + d`.
    pub fn b_column(&self, a: usize, d: usize) -> Sym {
        let g = self.grad[a];
        match d {
            0 => Sym::new(g[0], 0.0, 0.0, g[1] / SQRT_2),
            _ => Sym::new(0.0, g[1], 0.0, g[0] / SQRT_2),
        }
    }

    pub fn interpolate(&self, nodal: &[f64]) -> f64 {
        self.n.iter().zip(nodal).map(|(n, v)| n * v).sum()
    }

    pub fn gradient(&self, nodal: &[f64]) -> [f64; 2] {
        self.grad
            .iter()
            .zip(nodal)
            .fold([0.0, 0.0], |acc, (g, v)| [acc[0] + g[0] * v, acc[1] + g[1] * v])
    }
}

/// Quadrature-point geometry of an element; fails on a non-positive
/// Jacobian.
pub fn element_geometry(kind: ElementKind, coords: &[[f64; 2]]) -> Result<SmallVec<[QuadPoint; 4]>, f64> {
    quadrature(kind)
        .into_iter()
        .map(|gp| {
            let j = jacobian(kind, coords, gp.xi);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(det > 0.0) {
                return Err(det);
            }
            let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
            let grad = shape_derivatives(kind, gp.xi)
                .iter()
                .map(|d| {
                    [
                        inv[0][0] * d[0] + inv[0][1] * d[1],
                        inv[1][0] * d[0] + inv[1][1] * d[1],
                    ]
                })
                .collect();
            let n = shape(kind, gp.xi);
            let x = n
                .iter()
                .zip(coords)
                .fold([0.0, 0.0], |acc, (w, p)| [acc[0] + w * p[0], acc[1] + w * p[1]]);
            Ok(QuadPoint {
                n,
                grad,
                dv: gp.weight * det,
                x,
            })
        })
        .collect()
}

/// Inverse isoparametric map of `p` into the reference element, if `p` lies
/// inside (with a small tolerance).
pub fn locate(kind: ElementKind, coords: &[[f64; 2]], p: [f64; 2]) -> Option<[f64; 2]> {
    let tol = 1e-9;
    let xi = match kind {
        ElementKind::Tri3 => {
            let j = jacobian(kind, coords, [0.0, 0.0]);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let dx = [p[0] - coords[0][0], p[1] - coords[0][1]];
            [(dx[0] * j[1][1] - dx[1] * j[1][0]) / det, (dx[1] * j[0][0] - dx[0] * j[0][1]) / det]
        }
        ElementKind::Quad4 => {
            let mut xi = [0.0, 0.0];
            for _ in 0..25 {
                let n = shape(kind, xi);
                let x = n
                    .iter()
                    .zip(coords)
                    .fold([0.0, 0.0], |acc, (w, c)| [acc[0] + w * c[0], acc[1] + w * c[1]]);
                let r = [p[0] - x[0], p[1] - x[1]];
                let j = jacobian(kind, coords, xi);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                // J maps reference to physical as dx_b = Σ_a J[a][b] dξ_a
                let d = [(r[0] * j[1][1] - r[1] * j[1][0]) / det, (r[1] * j[0][0] - r[0] * j[0][1]) / det];
                xi = [xi[0] + d[0], xi[1] + d[1]];
                if d[0].abs().max(d[1].abs()) < 1e-13 {
                    break;
                }
                if xi[0].abs() > 10.0 || xi[1].abs() > 10.0 {
                    return None;
                }
            }
            xi
        }
    };
    let inside = match kind {
        ElementKind::Quad4 => xi[0].abs() <= 1.0 + tol && xi[1].abs() <= 1.0 + tol,
        ElementKind::Tri3 => xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol,
    };
    inside.then_some(xi)
}
