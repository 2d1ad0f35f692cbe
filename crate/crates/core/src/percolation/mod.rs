//! Gilbert graphs, connectivity events, and bond-percolation models on
//! segment systems.

pub mod bond;
pub mod gilbert;
pub mod union_find;

pub use bond::{bond_percolation_theta, gap_model_theta, gap_survival_bracket, GapModelResult};
pub use gilbert::{build_gilbert, GilbertGraph};
pub use union_find::UnionFind;
