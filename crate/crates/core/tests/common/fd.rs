//! Finite-difference probes of the analytic tangents.

use super::materials;
use pffatigue::assembly::{assemble, Discretization, Materials, QuadraturePointState, Tangents};
use pffatigue::element::ElementKind;
use pffatigue::fatigue::FatigueLaw;
use pffatigue::fracture::FractureKind;
use pffatigue::mesh::{structured_rect_mesh, FieldState, Mesh};
use pffatigue::plasticity::{return_map, PlasticState, PlasticityParams};
use pffatigue::sparse::to_dense;
use pffatigue::tensor::{sym, Sym};
use proptest::prelude::*;

/// A 3×2 patch with the interior nodes pushed off the grid.
pub fn distorted(kind: ElementKind, shift: &[f64]) -> Mesh {
    let mut mesh = structured_rect_mesh(1.5, 1.0, 3, 2).unwrap();
    let mut k = 0;
    for p in mesh.nodes.iter_mut() {
        let interior = p[0] > 1e-9 && p[0] < 1.5 - 1e-9 && p[1] > 1e-9 && p[1] < 1.0 - 1e-9;
        if interior {
            p[0] += 0.12 * shift[k % shift.len()];
            p[1] += 0.12 * shift[(k + 1) % shift.len()];
            k += 2;
        }
    }
    match kind {
        ElementKind::Quad4 => mesh,
        ElementKind::Tri3 => {
            let elements = mesh
                .elements
                .iter()
                .flat_map(|q| [vec![q[0], q[1], q[2]], vec![q[0], q[2], q[3]]])
                .collect();
            Mesh::new(mesh.nodes, ElementKind::Tri3, elements, mesh.node_sets).unwrap()
        }
    }
}

fn frozen_states(disc: &Discretization, materials: &Materials, history: f64, accumulated: &[f64]) -> Vec<QuadraturePointState> {
    let mut states = disc.virgin_states(materials);
    for (i, s) in states.iter_mut().enumerate() {
        s.history = history;
        s.fatigue.accumulated = accumulated[i % accumulated.len()];
    }
    states
}

fn column_error(analytic: &[f64], fd: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / scale.max(1e-300)
}

pub fn fracture_kind() -> impl Strategy<Value = FractureKind> {
    prop_oneof![Just(FractureKind::At1), Just(FractureKind::At2), Just(FractureKind::PfCzm)]
}

pub fn element_kind() -> impl Strategy<Value = ElementKind> {
    prop_oneof![Just(ElementKind::Quad4), Just(ElementKind::Tri3)]
}

/// Inputs of one tangent probe: element and fracture kind, node shifts,
/// displacements, phase field and fatigue histories.
pub type PatchCase = (ElementKind, FractureKind, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

pub fn patch_case() -> impl Strategy<Value = PatchCase> {
    (
        element_kind(),
        fracture_kind(),
        prop::collection::vec(-1.0f64..1.0, 8),
        prop::collection::vec(-1e-4f64..1e-4, 24),
        prop::collection::vec(0.05f64..0.95, 12),
        prop::collection::vec(0.0f64..400.0, 5),
    )
}

fn setup(case: &PatchCase) -> (Discretization, Materials, Vec<QuadraturePointState>, FieldState) {
    let (kind, frac, shift, u, phi, accumulated) = case;
    let materials = materials(*frac, FatigueLaw::asymptotic(100.0));
    let disc = super::clamped_patch(distorted(*kind, shift));
    // H above every ψ⁺ the displacements can produce freezes the history
    let history = 50.0_f64.max(materials.fracture.h_min());
    let states = frozen_states(&disc, &materials, history, accumulated);
    let mut fields = FieldState::zeros(disc.mesh.n_nodes());
    for (i, &g) in disc.dofs.u_global.iter().enumerate() {
        fields.u[g] = u[i % u.len()];
    }
    for (n, p) in fields.phi.iter_mut().enumerate() {
        *p = phi[n % phi.len()];
    }
    (disc, materials, states, fields)
}

/// Largest relative column error of K_uu against central differences of R_u.
pub fn displacement_block_error(case: &PatchCase) -> f64 {
    let (disc, materials, states, fields) = setup(case);
    let sys = assemble(&disc, &materials, &fields, &states, Tangents::BOTH).unwrap();
    let k = to_dense(sys.k_uu.as_ref().unwrap());
    let h = 1e-9;
    let mut worst: f64 = 0.0;
    for (j, &gj) in disc.dofs.u_global.iter().enumerate() {
        let mut plus = fields.clone();
        plus.u[gj] += h;
        let mut minus = fields.clone();
        minus.u[gj] -= h;
        let rp = assemble(&disc, &materials, &plus, &states, Tangents::NONE).unwrap().r_u;
        let rm = assemble(&disc, &materials, &minus, &states, Tangents::NONE).unwrap().r_u;
        let fd: Vec<f64> = disc.dofs.u_global.iter().map(|&gi| (rp[gi] - rm[gi]) / (2.0 * h)).collect();
        let analytic: Vec<f64> = (0..fd.len()).map(|i| k[(i, j)]).collect();
        worst = worst.max(column_error(&analytic, &fd));
    }
    worst
}

/// Largest relative column error of K_φφ against central differences of R_φ.
pub fn phase_block_error(case: &PatchCase) -> f64 {
    let (disc, materials, states, fields) = setup(case);
    let sys = assemble(&disc, &materials, &fields, &states, Tangents::BOTH).unwrap();
    assert!(sys.trial.iter().zip(&states).all(|(t, s)| t.history == s.history), "history moved");
    let k = to_dense(sys.k_pp.as_ref().unwrap());
    let h = 1e-6;
    let n = disc.mesh.n_nodes();
    let mut worst: f64 = 0.0;
    for b in 0..n {
        let mut plus = fields.clone();
        plus.phi[b] += h;
        let mut minus = fields.clone();
        minus.phi[b] -= h;
        let rp = assemble(&disc, &materials, &plus, &states, Tangents::NONE).unwrap().r_phi;
        let rm = assemble(&disc, &materials, &minus, &states, Tangents::NONE).unwrap().r_phi;
        let fd: Vec<f64> = (0..n).map(|a| (rp[a] - rm[a]) / (2.0 * h)).collect();
        let col = disc.dofs.phi_index[b];
        let analytic: Vec<f64> = (0..n).map(|a| k[(disc.dofs.phi_index[a], col)]).collect();
        worst = worst.max(column_error(&analytic, &fd));
    }
    worst
}

/// Strain path, probe direction and hardening variant (0 combined,
/// 1 isotropic, 2 kinematic).
pub type ReturnCase = (Vec<Vec<f64>>, Vec<f64>, usize);

pub fn return_case() -> impl Strategy<Value = ReturnCase> {
    (
        prop::collection::vec(prop::collection::vec(-6e-3f64..6e-3, 4), 1..4),
        prop::collection::vec(-1.0f64..1.0, 4),
        0usize..3,
    )
}

/// Relative error of the return-map tangent along a direction, or `None`
/// when the probe is not a plastic step on both sides.
pub fn return_map_error(case: &ReturnCase) -> Option<f64> {
    let (path, direction, hardening) = case;
    let mut params = PlasticityParams::carbon_steel();
    match hardening {
        1 => params.backstresses.clear(),
        2 => params.q_inf = 0.0,
        _ => {}
    }
    let mut state = PlasticState::virgin(&params);
    let mut strain = Sym::zeros();
    let to_sym = |v: &[f64]| sym(v[0], v[1], 0.0, v[2] + 0.5 * v[3]);
    for step in &path[..path.len() - 1] {
        strain += to_sym(step);
        state = return_map(&strain, &state, &params).unwrap().state;
    }
    strain += to_sym(&path[path.len() - 1]);
    let rm = return_map(&strain, &state, &params).unwrap();
    let d = to_sym(direction);
    if !rm.plastic || d.norm() <= 0.1 {
        return None;
    }
    let h = 1e-8;
    let plus = return_map(&(strain + h * d), &state, &params).unwrap();
    let minus = return_map(&(strain - h * d), &state, &params).unwrap();
    if !(plus.plastic && minus.plastic) {
        return None;
    }
    let fd = (plus.stress - minus.stress) / (2.0 * h);
    let analytic = rm.tangent * d;
    Some((analytic - fd).norm() / analytic.norm())
}

/// Largest deviation of central differences from the analytic g′ and g″
/// on a dense grid, relative to 1 + |derivative|.
pub fn degradation_derivative_error(kind: FractureKind, n: usize) -> (f64, f64) {
    let model = materials(kind, FatigueLaw::none()).fracture;
    let h = 1e-6;
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for i in 0..=n {
        let phi = i as f64 / n as f64;
        let t = model.degradation(phi).unwrap();
        let a = model.degradation_unchecked(phi - h);
        let b = model.degradation_unchecked(phi + h);
        e1 = e1.max(((b.value - a.value) / (2.0 * h) - t.d1).abs() / (1.0 + t.d1.abs()));
        e2 = e2.max(((b.d1 - a.d1) / (2.0 * h) - t.d2).abs() / (1.0 + t.d2.abs()));
    }
    (e1, e2)
}
