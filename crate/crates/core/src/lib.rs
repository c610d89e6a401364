//! Numerical laboratory for the one-dimensional McKean-Vlasov evolution
//!
//! ```text
//! dx_t = -Psi'(x_t) dt + J E[x_t] dt + sqrt(2) dB_t
//! ```
//!
//! viewed as the Wasserstein gradient flow of the free energy
//!
//! ```text
//! F(mu) = \int rho log rho + \int Psi dmu - J/2 (\int z dmu)^2 .
//! ```
//!
//! The crate is organised bottom-up:
//!
//! | module          | contents                                                        |
//! |-----------------|-----------------------------------------------------------------|
//! | [`potential`]   | even single-site potentials and the structural assumption audit |
//! | [`measure`]     | grid measures, W2, entropy, free energy, metric slope, I/O      |
//! | [`tilt`]        | log-partition, Legendre transform, macroscopic Hamiltonian      |
//! | [`flow`]        | Fokker-Planck and JKO integrators, gradient-flow audits         |
//! | [`ergodicity`]  | limit classification, basin probes and the basin certificate    |
//! | [`particles`]   | the N-particle mean-field system and propagation of chaos       |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ergodicity;
pub mod flow;
pub mod measure;
pub mod numerics;
pub mod particles;
pub mod potential;
pub mod tilt;

mod error;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use ergodicity::{BasinCertificate, ClassificationResult, Label};
pub use flow::{FlowParams, FlowState, FlowTrajectory, Scheme, TerminalStatus};
pub use measure::{Grid, GridMeasure};
pub use particles::ParticleEnsemble;
pub use potential::{AssumptionReport, EvenPolynomial, PotentialSpec, SiteEnergy};
pub use tilt::{StationaryTriple, Tilt};
