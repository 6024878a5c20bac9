pub mod coherent;
pub mod design;
pub mod error;
pub mod graph;
pub mod graph_iso;
pub mod local_certs;
pub mod partitions;
pub mod perm;
pub mod permgroup;
pub mod split_or_johnson;
pub mod string_iso;

pub use error::{Error, Result};
pub use perm::Perm;
pub use permgroup::{Giant, GroupAction, PermGroup};
