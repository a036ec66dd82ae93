//! Scalar run metrics: crack extension along a declared path and the failure
//! monitor.

use crate::element::{self, ElementKind};
use crate::mesh::Mesh;
use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("crack path needs at least two distinct points")]
    Degenerate,
    #[error("crack path point ({x}, {y}) lies outside the mesh")]
    OutsideMesh { x: f64, y: f64 },
}

#[derive(Debug, Clone)]
struct Sample {
    arc: f64,
    nodes: SmallVec<[usize; 4]>,
    weights: SmallVec<[f64; 4]>,
}

/// A polyline through the mesh, sampled once and interpolated from nodal
/// phase-field values. The first point is the crack origin.
#[derive(Debug, Clone)]
pub struct CrackPath {
    samples: Vec<Sample>,
    pub length: f64,
}

impl CrackPath {
    /// Samples the polyline at no more than a quarter of the smallest edge.
    pub fn new(mesh: &Mesh, points: &[[f64; 2]]) -> Result<Self, PathError> {
        if points.len() < 2 {
            return Err(PathError::Degenerate);
        }
        let spacing = 0.25 * mesh.min_edge_length();
        let boxes: Vec<[f64; 4]> = (0..mesh.n_elements())
            .map(|e| {
                mesh.element_coords(e).iter().fold(
                    [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
                    |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])],
                )
            })
            .collect();
        let pad = 1e-9 * mesh.max_edge_length();

        let mut samples = Vec::new();
        let mut arc0 = 0.0;
        for seg in points.windows(2) {
            let d = [seg[1][0] - seg[0][0], seg[1][1] - seg[0][1]];
            let len = d[0].hypot(d[1]);
            if len == 0.0 {
                continue;
            }
            let n = (len / spacing).ceil().max(1.0) as usize;
            let first = if samples.is_empty() { 0 } else { 1 };
            for k in first..=n {
                let t = k as f64 / n as f64;
                let p = [seg[0][0] + t * d[0], seg[0][1] + t * d[1]];
                samples.push(locate_sample(mesh, &boxes, pad, p, arc0 + t * len)?);
            }
            arc0 += len;
        }
        if samples.is_empty() {
            return Err(PathError::Degenerate);
        }
        Ok(Self { samples, length: arc0 })
    }

    /// Arc length from the origin to the farthest point where the
    /// interpolated phase field reaches `threshold`, or zero.
    pub fn extension(&self, phi: &[f64], threshold: f64) -> f64 {
        let values: Vec<f64> = self
            .samples
            .iter()
            .map(|s| s.nodes.iter().zip(&s.weights).map(|(&n, w)| w * phi[n]).sum())
            .collect();
        let Some(last) = values.iter().rposition(|&v| v >= threshold) else {
            return 0.0;
        };
        let s = &self.samples[last];
        match self.samples.get(last + 1) {
            Some(next) => {
                let (a, b) = (values[last], values[last + 1]);
                s.arc + (a - threshold) / (a - b) * (next.arc - s.arc)
            }
            None => s.arc,
        }
    }
}

fn locate_sample(mesh: &Mesh, boxes: &[[f64; 4]], pad: f64, p: [f64; 2], arc: f64) -> Result<Sample, PathError> {
    for (e, b) in boxes.iter().enumerate() {
        if p[0] < b[0] - pad || p[0] > b[2] + pad || p[1] < b[1] - pad || p[1] > b[3] + pad {
            continue;
        }
        let coords = mesh.element_coords(e);
        if let Some(xi) = element::locate(mesh.kind, &coords, p) {
            let xi = match mesh.kind {
                ElementKind::Quad4 => [xi[0].clamp(-1.0, 1.0), xi[1].clamp(-1.0, 1.0)],
                ElementKind::Tri3 => xi,
            };
            return Ok(Sample {
                arc,
                nodes: mesh.elements[e].iter().copied().collect(),
                weights: element::shape(mesh.kind, xi),
            });
        }
    }
    Err(PathError::OutsideMesh { x: p[0], y: p[1] })
}

/// Largest nodal phase-field value over `nodes`, or over all nodes.
pub fn max_phase(phi: &[f64], nodes: Option<&[usize]>) -> f64 {
    match nodes {
        Some(set) => set.iter().map(|&n| phi[n]).fold(0.0, f64::max),
        None => phi.iter().copied().fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_rect_mesh;
    use approx::assert_relative_eq;

    fn strip() -> Mesh {
        structured_rect_mesh(10.0, 2.0, 10, 2).unwrap()
    }

    #[test]
    fn intact_field_has_no_extension() {
        let m = strip();
        let path = CrackPath::new(&m, &[[0.0, 1.0], [10.0, 1.0]]).unwrap();
        assert_eq!(path.extension(&vec![0.0; m.n_nodes()], 0.9), 0.0);
        assert_relative_eq!(path.length, 10.0);
    }

    #[test]
    fn broken_first_two_millimetres() {
        let m = strip();
        let path = CrackPath::new(&m, &[[0.0, 1.0], [10.0, 1.0]]).unwrap();
        let phi: Vec<f64> = m.nodes.iter().map(|p| if p[0] <= 2.0 + 1e-12 { 1.0 } else { 0.0 }).collect();
        let da = path.extension(&phi, 0.9);
        // the field falls to zero over the next element
        assert_relative_eq!(da, 2.1, epsilon = 1e-12);
        let phi: Vec<f64> = m.nodes.iter().map(|p| (3.0 - p[0]).clamp(0.0, 1.0)).collect();
        assert_relative_eq!(path.extension(&phi, 1.0), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_profile_crossing_between_nodes() {
        let m = strip();
        let path = CrackPath::new(&m, &[[0.0, 1.0], [10.0, 1.0]]).unwrap();
        // φ = 1 − x/7 crosses 0.9 at x = 0.7, inside the first element
        let phi: Vec<f64> = m.nodes.iter().map(|p| 1.0 - p[0] / 7.0).collect();
        assert_relative_eq!(path.extension(&phi, 0.9), 0.7, epsilon = 1e-12);
        let phi: Vec<f64> = m.nodes.iter().map(|p| 1.0 - p[0] / 43.0).collect();
        assert_relative_eq!(path.extension(&phi, 0.9), 4.3, epsilon = 1e-12);
    }

    #[test]
    fn bent_path_measures_arc_length() {
        let m = strip();
        let path = CrackPath::new(&m, &[[0.0, 0.0], [3.0, 0.0], [3.0, 2.0]]).unwrap();
        assert_relative_eq!(path.length, 5.0);
        let phi: Vec<f64> = m.nodes.iter().map(|p| if p[0] <= 3.0 + 1e-12 { 1.0 } else { 0.0 }).collect();
        assert_relative_eq!(path.extension(&phi, 0.9), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn path_leaving_the_mesh_is_an_error() {
        let m = strip();
        let err = CrackPath::new(&m, &[[0.0, 1.0], [12.0, 1.0]]).unwrap_err();
        assert!(matches!(err, PathError::OutsideMesh { .. }));
    }

    #[test]
    fn failure_monitor_restricts_to_a_set() {
        let phi = [0.1, 0.95, 0.3];
        assert_eq!(max_phase(&phi, None), 0.95);
        assert_eq!(max_phase(&phi, Some(&[0, 2])), 0.3);
    }
}
