//! Simulation of GHZ-state preparation and the GHZ test with atoms crossing a
//! microwave cavity.
//!
//! The crate is generic over the real scalar type (`f32` or `f64`); the
//! aliases below fix it to `f64`.
//!
//! ```
//! use cavity_ghz::{ghz_prepare_cascade, ghz_target, AtomFamily, Sign};
//!
//! let state = ghz_prepare_cascade::<f64>(Sign::Plus, 4, 1e-10).unwrap();
//! let target = ghz_target(AtomFamily::Cascade, Sign::Plus, 4).unwrap();
//! assert!(state.fidelity(&target).unwrap() > 1.0 - 1e-10);
//! ```

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod mermin;
pub mod protocol;
pub mod scalar;

pub use error::{Error, Result};
pub use hilbert::{CompositeSystem, Measurement, StateVector, SubsystemKind, SubsystemSpec, Unitary};
pub use linalg::CMatrix;
pub use mermin::{Axis, MerminSet, QubitEmbedding, Sign};
pub use protocol::{
    builtin_steps, ghz_prepare_cascade, ghz_prepare_lambda, ghz_target, ghz_test, prepare_cavity, probe_cavity,
    run_steps, AtomFamily, GhzConfig, GhzRun, Interpreter, NamedRotation, OutcomeRecord, ProtocolStep, Rotation,
};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;
pub type CMatrix64 = CMatrix<f64>;
pub type StateVector64 = StateVector<f64>;
pub type Unitary64 = Unitary<f64>;
pub type ProtocolStep64 = ProtocolStep<f64>;
pub type Interpreter64 = Interpreter<f64>;
