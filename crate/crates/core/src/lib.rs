//! Schmidt-number certification from the ratio of global to local state
//! overlaps, together with the detection criteria it is usually compared
//! against (reduction, purity, fidelity witnesses, partial-transpose moments),
//! a simulator for local randomized measurements, multipartite extensions and
//! a variational optimizer over local unitaries.
//!
//! All subsystem layouts are row-major: the leftmost subsystem index varies
//! slowest in every Kronecker product and reshape.

pub mod criteria;
pub mod error;
pub mod multipartite;
pub mod qmat;
pub mod randomized;
pub mod scans;
pub mod states;
pub mod variational;

pub use error::{Error, Result};
pub use qmat::{Bipartition, CMat, CVec, PureVec, QState, SchmidtDecomp, C64};
