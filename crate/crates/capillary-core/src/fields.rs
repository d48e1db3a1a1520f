//! Ambient vector fields with closed-form first derivatives.
//!
//! Used by the tangential-divergence residual, which needs `div_M X`
//! pointwise: `div_M X = div X - <∇_ν X, ν>` evaluated from the exact
//! Jacobian rather than by differencing.

use nalgebra::Matrix3;

use crate::Vec3;

/// The conformal Killing field of the unit ball,
/// `X_a(x) = <x,a> x - (|x|² + 1)/2 · a`; tangent to the unit sphere.
pub fn conformal_field(a: &Vec3, x: &Vec3) -> Vec3 {
    x * x.dot(a) - a * 0.5 * (x.norm_squared() + 1.0)
}

/// A small family of closed-form ambient fields.
#[derive(Debug, Clone)]
pub enum AmbientField {
    /// Constant field `X = v`.
    Constant(Vec3),
    /// Linear field `X = A x`.
    Linear(Matrix3<f64>),
    /// Position field `X = x`.
    Position,
    /// Conformal Killing field `X_a`.
    Conformal(Vec3),
}

impl AmbientField {
    pub fn value(&self, x: &Vec3) -> Vec3 {
        match self {
            AmbientField::Constant(v) => *v,
            AmbientField::Linear(a) => a * x,
            AmbientField::Position => *x,
            AmbientField::Conformal(a) => conformal_field(a, x),
        }
    }

    pub fn jacobian(&self, x: &Vec3) -> Matrix3<f64> {
        match self {
            AmbientField::Constant(_) => Matrix3::zeros(),
            AmbientField::Linear(a) => *a,
            AmbientField::Position => Matrix3::identity(),
            AmbientField::Conformal(a) => {
                // ∂_j (X_a)_i = x_i a_j + <x,a> δ_ij - a_i x_j
                x * a.transpose() + Matrix3::identity() * x.dot(a) - a * x.transpose()
            }
        }
    }

    /// Tangential divergence on a surface with unit normal `nu`.
    pub fn tangential_divergence(&self, x: &Vec3, nu: &Vec3) -> f64 {
        let j = self.jacobian(x);
        j.trace() - (j * nu).dot(nu)
    }
}
