//! Planar tessellations as segment systems: Poisson-Voronoi, Poisson-Delaunay
//! and Poisson line tessellations, plus the underlying robust Delaunay
//! triangulation.

pub mod delaunay;
pub mod lines;
pub mod predicates;
pub mod system;
pub mod voronoi;

pub use delaunay::Delaunay;
pub use lines::line_tessellation;
pub use system::{SegmentSystem, SysEdge};
pub use voronoi::{delaunay_segments, voronoi_segments};
