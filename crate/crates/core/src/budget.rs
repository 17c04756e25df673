use serde::{Deserialize, Serialize};

/// Work limits; exceeding one is reported as a resource error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budget {
    /// Cylinders or balls in a single cover.
    pub max_cells: u64,
    /// Cylinder pairs enumerated by one sum cover.
    pub max_pairs: u64,
    /// Tree nodes materialised by the tower construction.
    pub max_tree_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_cells: 100_000_000,
            max_pairs: 4_000_000_000,
            max_tree_nodes: 10_000_000,
        }
    }
}
