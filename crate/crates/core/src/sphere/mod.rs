//! Functions on the unit sphere: complex spherical harmonics, product
//! Gauss–Legendre × trapezoid quadrature and angular-momentum coupling
//! coefficients.

mod harmonics;
mod quadrature;
mod wigner;

pub use harmonics::{legendre_table, sph_harm, LegendreTable};
pub use quadrature::{gauss_legendre, SphereQuadrature};
pub use wigner::{gaunt, wigner_3j, ylm_matrix_element};

/// A real scalar field on the unit sphere, `V(θ, φ)`.
pub trait AngularField {
    fn value(&self, theta: f64, phi: f64) -> f64;
}

impl<F: ?Sized> AngularField for F
where
    F: Fn(f64, f64) -> f64,
{
    fn value(&self, theta: f64, phi: f64) -> f64 {
        self(theta, phi)
    }
}

/// Flat index of `(l, m)` in an array holding all `|m| <= l <= l_max`.
#[inline]
pub fn lm_index(l: u32, m: i32) -> usize {
    let l = l as i64;
    (l * l + l + m as i64) as usize
}

/// Number of `(l, m)` pairs with `l <= l_max`.
#[inline]
pub fn lm_count(l_max: u32) -> usize {
    ((l_max + 1) * (l_max + 1)) as usize
}
