//! Symmetric and elastic tensor fields in the plane: solenoidal/potential
//! decompositions, momentum, elastic and mixed ray transforms, and the
//! numerical checks that tie them together.

pub mod decompose;
pub mod diffops;
pub mod error;
pub mod grid_field;
pub mod io;
pub mod raytransforms;
pub mod spectral;
pub mod tensor_core;
pub mod verify;

pub use error::{Error, Result};
pub use grid_field::{AnalyticScalar, FieldKind, Grid2, GridField, Poly};
pub use spectral::SpectralField;
pub use tensor_core::{ElasticTensor2, PolarizedRay, SymTensor};
