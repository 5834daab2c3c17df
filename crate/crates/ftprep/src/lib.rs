//! Fault-tolerant ancilla preparation workbench for self-dual CSS codes.
//!
//! The crate covers the full pipeline: synthesis of encoded |0> preparation
//! circuits, strict fault-tolerance checking of verification networks,
//! Monte Carlo overhead simulation under depolarizing noise, and rigorous
//! threshold lower bounds by exact counting of malignant fault sets.

pub mod circuit;
pub mod code;
pub mod counting;
pub mod ft;
pub mod montecarlo;
pub mod network;
pub mod noise;
pub mod polynomials;

pub use code::CssCode;
