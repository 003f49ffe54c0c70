//! Verification laboratory for the two-mode oscillator
//!
//! ```text
//! H = ½(p₁² + p₂²) + ½(a₁²x₁² + a₂²x₂²) + i·a₃/(2a₁a₂)·p₁p₂
//! ```
//!
//! which is neither Hermitian nor PT-symmetric but is PT-pseudo-Hermitian,
//! `H = (PT)⁻¹ H† (PT)`, and whose classical dynamics is the fourth-order
//! Pais-Uhlenbeck oscillator.
//!
//! Modules, bottom-up:
//!
//! - [`params`]: parameter triple, regime classification, derived scalars.
//! - [`quadform`]: exact 4×4 coefficient matrices, canonical maps, the
//!   diagonalization pipeline and the permutation/branch-flip analysis.
//! - [`fock`]: truncated two-mode Fock representation, parity metrics,
//!   linear and antilinear pseudo-adjoints.
//! - [`spectra`]: closed-form level lattices and truncated-basis
//!   convergence studies.
//! - [`dynamics`]: exact classical propagation and the fourth-order
//!   equation of motion.
//! - [`pseudoherm`]: the indefinite-metric identities (reality, conservation,
//!   unitarity, averages, Heisenberg covariance, Ehrenfest).

pub mod dynamics;
pub mod error;
pub mod exact;
pub mod fock;
pub mod linalg;
pub mod params;
pub mod pseudoherm;
pub mod quadform;
pub mod sampling;
pub mod spectra;

pub use error::{Error, Result};
pub use params::{BranchLabel, CaseLabel, DerivedParams, ModelParams};
