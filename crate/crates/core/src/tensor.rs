//! Symmetric second-order tensors for plane-strain analysis in Mandel notation.
//!
//! A tensor is stored as `[t_xx, t_yy, t_zz, √2·t_xy]`. The out-of-plane shear
//! components vanish identically in plane strain, while `t_zz` is kept because
//! plastic flow and the volumetric split both need it. With the `√2` scaling the
//! double contraction `a : b` is the ordinary dot product and fourth-order
//! tensors are plain 4×4 matrices.

use nalgebra::{Matrix4, Vector4};

/// Symmetric tensor in Mandel notation.
pub type Sym = Vector4<f64>;

/// Fourth-order tensor with minor symmetries, in Mandel notation.
pub type Tangent4 = Matrix4<f64>;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_3_2: f64 = 1.224_744_871_391_589;
pub const SQRT_2_3: f64 = 0.816_496_580_927_726;

/// Builds a tensor from its (unscaled) components.
pub fn sym(xx: f64, yy: f64, zz: f64, xy: f64) -> Sym {
    Sym::new(xx, yy, zz, SQRT_2 * xy)
}

/// Tensor shear component `t_xy` (undoing the Mandel scaling).
pub fn shear(t: &Sym) -> f64 {
    t[3] / SQRT_2
}

pub fn identity() -> Sym {
    Sym::new(1.0, 1.0, 1.0, 0.0)
}

pub fn trace(t: &Sym) -> f64 {
    t[0] + t[1] + t[2]
}

pub fn deviator(t: &Sym) -> Sym {
    let p = trace(t) / 3.0;
    Sym::new(t[0] - p, t[1] - p, t[2] - p, t[3])
}

/// `sqrt(3/2 s:s)` of the deviatoric part.
pub fn von_mises(t: &Sym) -> f64 {
    SQRT_3_2 * deviator(t).norm()
}

/// Deviatoric projector `I - (1/3) 1⊗1`.
pub fn deviatoric_projector() -> Tangent4 {
    let one = identity();
    Tangent4::identity() - one * one.transpose() / 3.0
}

/// Isotropic elasticity `K 1⊗1 + 2G P_dev`.
pub fn isotropic_stiffness(bulk: f64, shear: f64) -> Tangent4 {
    let one = identity();
    bulk * (one * one.transpose()) + 2.0 * shear * deviatoric_projector()
}
