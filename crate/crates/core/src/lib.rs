//! Quantum-efficiency measurement station: physics and error budgets, the
//! instrument wire protocol, a deterministic virtual bench, raster planning,
//! the measurement engine and result persistence.

pub mod model;
pub mod protocol;
pub mod clock;
pub mod engine;
pub mod simbench;
pub mod scan;
pub mod io;
