//! Exact computations for layered spinal branch groups built from finite
//! perfect groups.

pub mod error;
pub mod perm;
pub mod permgroup;
pub mod tree;
pub mod treeaut;
pub mod construction;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use permgroup::{Limits, PermutationGroup, TauAction};
