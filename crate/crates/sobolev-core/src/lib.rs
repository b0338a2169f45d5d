//! Constructive approximation of manifold-valued Sobolev maps on cubes: opening,
//! adaptive smoothing, thickening, projection, continuous extension and shrinking,
//! with numerical W^{k,p} diagnostics.

pub mod checks;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod manifold;
pub mod map;
pub mod pipeline;
pub mod smoothmap;

pub use error::{Error, Result};
pub use jet::{Jet2, Point, Scalar, MAX_DIM};
pub use map::{GenericMap, Mapping};
