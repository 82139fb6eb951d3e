//! Numerical toolkit for planar Hilbert geometries.

pub mod domain;
pub mod error;
pub mod experiments;
pub mod metric;
pub mod measure;
pub mod normalize;
pub mod numeric;
pub mod regularity;
pub mod sampling;
pub mod triangles;

pub use domain::{Chord, ConvexDomain, DomainSpec, Line2, Point2, ProjectiveMap};
pub use error::{Error, Result};
