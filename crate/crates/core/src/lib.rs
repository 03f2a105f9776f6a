//! Entanglement-assisted reversibility and invertibility of quantum channels
//! between finite-dimensional C*-algebras.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices and the few spectral tools used everywhere.
//! - [`diagram`]: shaded string diagrams as indexed families of matrices.
//! - [`algebra`]: multimatrix algebras and shared resource states.
//! - [`channel`]: Choi blocks, application, composition and Stinespring dilations.
//! - [`schemes`]: biunitarity, reversibility and invertibility decisions, inverses and intertwiners.
//! - [`ueb`]: unitary error bases, tight teleportation and dense coding, and their classifiers.
//! - [`format`]: the versioned JSON schema.
//!
//! Construction and rank decisions use the relative cutoff
//! [`algebra::RANK_CUTOFF`]; verdicts compare operator-norm residuals with
//! [`schemes::VERDICT_TOL`] unless a tolerance is passed explicitly.

pub mod algebra;
pub mod channel;
pub mod diagram;
pub mod format;
pub mod linalg;
pub mod random;
pub mod schemes;
pub mod ueb;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/diagrams.md")]
    mod diagrams {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/quantum-bijections.md")]
    mod quantum_bijections {}
    #[doc = include_str!("../../../book/src/resource-states.md")]
    mod resource_states {}
    #[doc = include_str!("../../../book/src/teleportation.md")]
    mod teleportation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
