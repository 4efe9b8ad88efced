//! Translational–rotational quantum states of a diatomic rotor trapped in a
//! molecular crystal site.
//!
//! The crate follows one numerical pipeline from sampled potential-energy
//! surfaces to predicted spectra and spin-conversion channels:
//!
//! 1. [`potential`]: fit a harmonic radial well and a trigonometric angular
//!    surface, then expand the angular field in spherical tensors and read
//!    off which conversion channels its rank content opens.
//! 2. [`hamiltonian`]: discretize `-(ħ²/2M)∂²/∂r² + B·L² + V(r,θ,φ)` on a
//!    product grid as a symmetric sparse matrix.
//! 3. [`eigensolver`]: shift-invert block Krylov–Schur for the lowest eigenpairs,
//!    with a dense diagonalization oracle for small instances.
//! 4. [`states`]: reduced densities and `(n, l, λ, m)` labels plus the
//!    ortho/para class of each state.
//! 5. [`spectroscopy`]: Q₁-branch lines, conversion pathways and thermal
//!    ortho:para ratios.
//! 6. [`specfit`]: multi-Gaussian spectral fits and first-order conversion
//!    kinetics.
//! 7. [`pipeline`]: configuration, end-to-end execution and report emission.
//!
//! Energies are in cm⁻¹, lengths in Å and masses in unified atomic mass
//! units throughout.

pub mod eigensolver;
pub mod hamiltonian;
pub mod numfmt;
pub mod pipeline;
pub mod potential;
pub mod sparse;
pub mod specfit;
pub mod spectroscopy;
pub mod sphere;
pub mod states;
pub mod units;

// Every chapter of the guide in book/ runs as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/hamiltonian.md")]
    mod hamiltonian {}
    #[doc = include_str!("../../../book/src/eigensolver.md")]
    mod eigensolver {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/spectroscopy.md")]
    mod spectroscopy {}
    #[doc = include_str!("../../../book/src/specfit.md")]
    mod specfit {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
