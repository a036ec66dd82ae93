//! Element kinematics, the volumetric-deviatoric energy split, hybrid
//! residuals and tangent blocks, and global sparse assembly.
//!
//! The momentum balance carries the undegraded stress scaled by `g(φ) + κ`.
//! The tensile part of the elastic energy drives the phase field through the
//! history field. The two blocks `K_uu` and `K_φφ` are assembled separately
//! and the off-diagonal coupling is never formed.

use crate::element::{self, QuadPoint};
use crate::fatigue::{fatigue_variable, FatigueLaw, FatigueState};
use crate::fracture::{update_history, FractureKind, FractureModel, Triple};
use crate::mesh::{DofMap, FieldState, Mesh, MeshError};
use crate::plasticity::{return_map, PlasticState, PlasticityError, PlasticityParams};
use crate::sparse::BlockPattern;
use crate::tensor::{self, Sym};
use nalgebra_sparse::CscMatrix;
use rayon::prelude::*;
use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("material update failed in element {element}, point {point}: {source}")]
    Material {
        element: usize,
        point: usize,
        #[source]
        source: PlasticityError,
    },
    #[error("non-finite value in element {element}")]
    NonFinite { element: usize },
}

/// Constitutive description of the solid.
#[derive(Debug, Clone, PartialEq)]
pub struct Materials {
    pub plasticity: PlasticityParams,
    pub fracture: FractureModel,
    pub fatigue: FatigueLaw,
}

impl Materials {
    /// `g(φ)` at a quadrature point. PF-CZM is clamped to `[0, 1]` because its
    /// rational form is singular just below zero.
    pub fn degradation(&self, phi: f64) -> Triple {
        match self.fracture.kind {
            FractureKind::PfCzm => self.fracture.degradation_unchecked(phi.clamp(0.0, 1.0)),
            _ => self.fracture.degradation_unchecked(phi),
        }
    }
}

/// Full material history at one integration point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePointState {
    pub plastic: PlasticState,
    /// History field H [MPa].
    pub history: f64,
    pub fatigue: FatigueState,
    /// Tensile elastic energy density ψ⁺ [MPa].
    pub psi_plus: f64,
    /// Compressive elastic energy density ψ⁻ [MPa].
    pub psi_minus: f64,
}

impl QuadraturePointState {
    /// Intact state; the fatigue record starts from ϑ = g(0)·H_min so the
    /// damage threshold itself is not counted as loading.
    pub fn virgin(materials: &Materials) -> Self {
        let h_min = materials.fracture.h_min();
        Self {
            plastic: PlasticState::virgin(&materials.plasticity),
            history: h_min,
            fatigue: FatigueState {
                last: fatigue_variable(1.0, h_min, 0.0),
                accumulated: 0.0,
            },
            psi_plus: 0.0,
            psi_minus: 0.0,
        }
    }
}

/// Volumetric-deviatoric split of the elastic energy density:
/// `ψ⁺ = ½K⟨tr ε⟩₊² + μ ε':ε'` and `ψ⁻ = ½K⟨tr ε⟩₋²`.
pub fn amor_split(elastic_strain: &Sym, bulk: f64, shear: f64) -> (f64, f64) {
    let tr = tensor::trace(elastic_strain);
    let dev = tensor::deviator(elastic_strain);
    let plus = 0.5 * bulk * tr.max(0.0).powi(2) + shear * dev.norm_squared();
    let minus = 0.5 * bulk * tr.min(0.0).powi(2);
    (plus, minus)
}

/// Strains at the quadrature points of one element.
pub fn strain_from_nodes(points: &[QuadPoint], ue: &[f64]) -> Vec<Sym> {
    points.iter().map(|q| q.strain(ue)).collect()
}

/// Precomputed discretisation: geometry, unknown numbering and block patterns.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub geometry: Vec<SmallVec<[QuadPoint; 4]>>,
    pub uu: BlockPattern,
    pub pp: BlockPattern,
    pub points_per_element: usize,
}

impl Discretization {
    pub fn new(mesh: Mesh, dofs: DofMap) -> Result<Self, MeshError> {
        let geometry = (0..mesh.n_elements())
            .map(|e| {
                element::element_geometry(mesh.kind, &mesh.element_coords(e))
                    .map_err(|det| MeshError::NegativeJacobian { element: e + 1, det })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let u_rows: Vec<Vec<Option<usize>>> = mesh
            .elements
            .iter()
            .map(|conn| conn.iter().flat_map(|&n| [dofs.u_free[2 * n], dofs.u_free[2 * n + 1]]).collect())
            .collect();
        let p_rows: Vec<Vec<Option<usize>>> = mesh
            .elements
            .iter()
            .map(|conn| conn.iter().map(|&n| Some(dofs.phi_index[n])).collect())
            .collect();
        let uu = BlockPattern::new(dofs.n_free_u(), &u_rows);
        let pp = BlockPattern::new(dofs.n_phi(), &p_rows);
        let points_per_element = mesh.kind.n_quadrature();
        Ok(Self {
            mesh,
            dofs,
            geometry,
            uu,
            pp,
            points_per_element,
        })
    }

    pub fn n_points(&self) -> usize {
        self.mesh.n_elements() * self.points_per_element
    }

    pub fn virgin_states(&self, materials: &Materials) -> Vec<QuadraturePointState> {
        vec![QuadraturePointState::virgin(materials); self.n_points()]
    }

    fn gather(&self, e: usize, fields: &FieldState) -> (SmallVec<[f64; 8]>, SmallVec<[f64; 4]>) {
        let conn = &self.mesh.elements[e];
        let ue = conn.iter().flat_map(|&n| [fields.u[2 * n], fields.u[2 * n + 1]]).collect();
        let pe = conn.iter().map(|&n| fields.phi[n]).collect();
        (ue, pe)
    }

    /// Phase field at each quadrature point.
    pub fn phase_at_points(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_points());
        for (conn, points) in self.mesh.elements.iter().zip(&self.geometry) {
            let pe: SmallVec<[f64; 4]> = conn.iter().map(|&n| phi[n]).collect();
            out.extend(points.iter().map(|q| q.interpolate(&pe)));
        }
        out
    }
}

/// Which tangent blocks to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tangents {
    pub uu: bool,
    pub pp: bool,
}

impl Tangents {
    pub const NONE: Tangents = Tangents { uu: false, pp: false };
    pub const BOTH: Tangents = Tangents { uu: true, pp: true };
}

/// Residuals, optional tangents and trial point states for one field state.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    /// Internal force per displacement component `2·node + dof`.
    pub r_u: Vec<f64>,
    /// Phase-field residual per node.
    pub r_phi: Vec<f64>,
    /// Free-free displacement block.
    pub k_uu: Option<CscMatrix<f64>>,
    /// Phase-field block in the unknown numbering of the dof map.
    pub k_pp: Option<CscMatrix<f64>>,
    /// Trial states: return-mapped plasticity and trial history field, with
    /// the fatigue record unchanged.
    pub trial: Vec<QuadraturePointState>,
}

/// Local residuals, row-major tangents and trial states of one element.
#[derive(Debug, Clone)]
pub struct ElementContribution {
    pub r_u: SmallVec<[f64; 8]>,
    pub r_phi: SmallVec<[f64; 4]>,
    pub k_uu: SmallVec<[f64; 64]>,
    pub k_pp: SmallVec<[f64; 16]>,
    pub trial: SmallVec<[QuadraturePointState; 4]>,
}

/// Element residuals and tangents for the given nodal values and committed
/// point states; errors carry the failing point index.
pub fn element_contributions(
    points: &[QuadPoint],
    ue: &[f64],
    pe: &[f64],
    committed: &[QuadraturePointState],
    materials: &Materials,
    tangents: Tangents,
) -> Result<ElementContribution, (usize, PlasticityError)> {
    let nn = pe.len();
    let nu = 2 * nn;
    let frac = &materials.fracture;
    let (bulk, shear) = (materials.plasticity.bulk_modulus(), materials.plasticity.shear_modulus());
    let kappa = frac.residual_stiffness;
    let h_min = frac.h_min();
    let c_w = frac.c_w();
    let ell = frac.length_scale;

    let mut out = ElementContribution {
        r_u: SmallVec::from_elem(0.0, nu),
        r_phi: SmallVec::from_elem(0.0, nn),
        k_uu: if tangents.uu { SmallVec::from_elem(0.0, nu * nu) } else { SmallVec::new() },
        k_pp: if tangents.pp { SmallVec::from_elem(0.0, nn * nn) } else { SmallVec::new() },
        trial: SmallVec::new(),
    };

    for (q, (qp, state)) in points.iter().zip(committed).enumerate() {
        let strain = qp.strain(ue);
        let rm = return_map(&strain, &state.plastic, &materials.plasticity).map_err(|e| (q, e))?;
        let elastic = strain - rm.state.plastic_strain;
        let (psi_plus, psi_minus) = amor_split(&elastic, bulk, shear);
        let history = update_history(state.history, psi_plus, h_min);
        let drive = history + rm.state.plastic_work;

        let phi = qp.interpolate(pe);
        let grad_phi = qp.gradient(pe);
        let g = materials.degradation(phi);
        let w = frac.dissipation(phi);
        let f = materials.fatigue.degradation(state.fatigue.accumulated);
        let crack = frac.toughness * f / (2.0 * c_w * ell);
        let scale = (g.value + kappa) * qp.dv;

        let bcols: SmallVec<[Sym; 8]> = (0..nu).map(|i| qp.b_column(i / 2, i % 2)).collect();
        for (i, b) in bcols.iter().enumerate() {
            out.r_u[i] += scale * b.dot(&rm.stress);
        }
        for a in 0..nn {
            let grad_dot = qp.grad[a][0] * grad_phi[0] + qp.grad[a][1] * grad_phi[1];
            out.r_phi[a] +=
                qp.dv * (g.d1 * qp.n[a] * drive + crack * (0.5 * w.d1 * qp.n[a] + ell * ell * grad_dot));
        }
        if tangents.uu {
            let c = 0.5 * (rm.tangent + rm.tangent.transpose());
            let cb: SmallVec<[Sym; 8]> = bcols.iter().map(|b| c * b).collect();
            for i in 0..nu {
                for j in 0..nu {
                    out.k_uu[i * nu + j] += scale * bcols[i].dot(&cb[j]);
                }
            }
        }
        if tangents.pp {
            // The local reaction coefficient is kept non-negative so the block
            // stays positive definite.
            let reaction = (g.d2 * drive + 0.5 * crack * w.d2).max(0.0);
            for a in 0..nn {
                for b in 0..nn {
                    let gg = qp.grad[a][0] * qp.grad[b][0] + qp.grad[a][1] * qp.grad[b][1];
                    out.k_pp[a * nn + b] += qp.dv * (reaction * qp.n[a] * qp.n[b] + crack * ell * ell * gg);
                }
            }
        }
        out.trial.push(QuadraturePointState {
            plastic: rm.state,
            history,
            fatigue: state.fatigue,
            psi_plus,
            psi_minus,
        });
    }
    Ok(out)
}

/// Evaluates residuals and the requested tangents for `fields`, starting the
/// material updates from the `committed` point states.
pub fn assemble(
    disc: &Discretization,
    materials: &Materials,
    fields: &FieldState,
    committed: &[QuadraturePointState],
    tangents: Tangents,
) -> Result<GlobalSystem, AssemblyError> {
    let npe = disc.points_per_element;
    let outputs: Vec<ElementContribution> = (0..disc.mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let (ue, pe) = disc.gather(e, fields);
            element_contributions(
                &disc.geometry[e],
                &ue,
                &pe,
                &committed[e * npe..(e + 1) * npe],
                materials,
                tangents,
            )
            .map_err(|(point, source)| AssemblyError::Material {
                element: e + 1,
                point: point + 1,
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    let n = disc.mesh.n_nodes();
    let mut r_u = vec![0.0; 2 * n];
    let mut r_phi = vec![0.0; n];
    let mut kuu = tangents.uu.then(|| disc.uu.zero_values());
    let mut kpp = tangents.pp.then(|| disc.pp.zero_values());
    let mut trial = Vec::with_capacity(disc.n_points());
    for (e, out) in outputs.into_iter().enumerate() {
        let conn = &disc.mesh.elements[e];
        for (a, &node) in conn.iter().enumerate() {
            r_u[2 * node] += out.r_u[2 * a];
            r_u[2 * node + 1] += out.r_u[2 * a + 1];
            r_phi[node] += out.r_phi[a];
        }
        if let Some(v) = kuu.as_mut() {
            disc.uu.scatter_add(e, &out.k_uu, v);
        }
        if let Some(v) = kpp.as_mut() {
            disc.pp.scatter_add(e, &out.k_pp, v);
        }
        trial.extend(out.trial);
        if !(out_is_finite(&r_u, conn) && conn.iter().all(|&n| r_phi[n].is_finite())) {
            return Err(AssemblyError::NonFinite { element: e + 1 });
        }
    }
    Ok(GlobalSystem {
        r_u,
        r_phi,
        k_uu: kuu.map(|v| disc.uu.to_matrix(v)),
        k_pp: kpp.map(|v| disc.pp.to_matrix(v)),
        trial,
    })
}

fn out_is_finite(r_u: &[f64], conn: &[usize]) -> bool {
    conn.iter().all(|&n| r_u[2 * n].is_finite() && r_u[2 * n + 1].is_finite())
}

/// Commits converged trial states: the history field and plastic state are
/// taken over and the fatigue variable is accumulated from the (clamped)
/// phase field.
pub fn commit_states(
    disc: &Discretization,
    materials: &Materials,
    phi: &[f64],
    trial: &[QuadraturePointState],
) -> Vec<QuadraturePointState> {
    disc.phase_at_points(phi)
        .into_iter()
        .zip(trial)
        .map(|(p, t)| {
            let g = materials.fracture.degradation_unchecked(p.clamp(0.0, 1.0)).value;
            let theta = fatigue_variable(g, t.history, t.plastic.plastic_work);
            QuadraturePointState {
                fatigue: t.fatigue.accumulate(theta),
                ..t.clone()
            }
        })
        .collect()
}

/// Restricts a full displacement-sized vector to the free unknowns.
pub fn free_part(dofs: &DofMap, full: &[f64]) -> Vec<f64> {
    dofs.u_global.iter().map(|&g| full[g]).collect()
}

/// Reorders a per-node phase-field vector into the unknown numbering.
pub fn phase_part(dofs: &DofMap, per_node: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; per_node.len()];
    for (node, &v) in per_node.iter().enumerate() {
        out[dofs.phi_index[node]] = v;
    }
    out
}
