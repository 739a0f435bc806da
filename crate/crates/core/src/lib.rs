//! Radial basis function interpolation and RBF-FD discretizations with
//! classical and neural-network shape-parameter strategies.

pub mod bench;
pub mod error;
pub mod fd;
pub mod kernel;
pub mod linalg;
pub mod neural;
pub mod pde;
pub mod points;
pub mod poly;
pub mod shape;
pub mod system;

pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use points::{Point, PointSet};
pub use poly::PolyBasis;
pub use shape::{EpsReport, ShapeStrategy};
pub use system::AugmentedSystem;
