//! Algorithmic core for constructing graded (super-)KMS functionals on free-field
//! algebras and verifying their defining properties numerically.
//!
//! The crate is organized around nine subsystems:
//!
//! * [`testfn`]: an exactly-closed family of Hermite-based test functions
//!   (derivative, translation, conjugation and Fourier transform stay in the family).
//! * [`kernel`]: the two-point kernels (principal-value thermal kernel, vacuum part,
//!   trace-class correction, analytic strip continuation) with error estimates.
//! * [`car`]: words in fermionic/bosonic generators over an abstract one-particle
//!   space and quasi-free evaluation (recursive, Pfaffian, mixed).
//! * [`superderiv`]: the odd derivation exchanging fermion and current generators,
//!   its square, and the associated invariance checks.
//! * [`skms`]: strip-boundary verification, growth scans and the axiom test suites.
//! * [`araki`]: finite-dimensional selfdual-CAR instances, spectral splits,
//!   domination constants, Fock realizations and Jordan decompositions.
//! * [`gibbs`]: finite-dimensional graded Gibbs functionals, intertwiner solves and
//!   the classification checks.
//! * [`svir`]: exact-rational super-Virasoro mode algebra on a truncated Fock space.
//! * [`report`] / [`suites`]: machine-readable case records for the CLI front end.
//!
//! No IO happens here; the companion CLI crate handles files, JSON and timing.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod araki;
pub mod car;
pub mod gibbs;
pub mod kernel;
pub mod linalg;
pub mod quad;
pub mod report;
pub mod skms;
pub mod suites;
pub mod superderiv;
pub mod svir;
pub mod testfn;

pub use num_complex::Complex64;

/// Value with a propagated numerical error estimate.
///
/// Quadrature results carry their own error; arithmetic on measured values
/// accumulates first-order error bounds so that downstream tolerance checks can
/// consume `err` alongside the fixed tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub value: Complex64,
    pub err: f64,
}

impl Measured {
    pub fn exact(value: Complex64) -> Self {
        Measured { value, err: 0.0 }
    }

    pub fn new(value: Complex64, err: f64) -> Self {
        Measured { value, err }
    }

    pub fn add(self, other: Measured) -> Measured {
        Measured::new(self.value + other.value, self.err + other.err)
    }

    pub fn sub(self, other: Measured) -> Measured {
        Measured::new(self.value - other.value, self.err + other.err)
    }

    pub fn mul(self, other: Measured) -> Measured {
        Measured::new(
            self.value * other.value,
            self.value.norm() * other.err + other.value.norm() * self.err,
        )
    }

    pub fn scale(self, c: Complex64) -> Measured {
        Measured::new(self.value * c, self.err * c.norm())
    }

    pub fn neg(self) -> Measured {
        Measured::new(-self.value, self.err)
    }
}
