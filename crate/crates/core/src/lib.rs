//! Generalized 3x+1 mappings: iteration, cycle detection, exact cycle
//! enumeration, and the λ / least-element bound analysis.

pub mod affine;
pub mod catalog;
pub mod cycle;
pub mod family;
pub mod hp;
pub mod int;
pub mod mapping;
pub mod nodes;
pub mod oracle;
pub mod ratio;
pub mod search;
pub mod serde_big;
pub mod table;

pub use affine::{compose_affine, AffineMap};
pub use catalog::{verify_catalog, CatalogEntry, CycleCatalog, VerifyReport};
pub use cycle::{canonicalize, detect_cycle, Cycle, Detection, Limits};
pub use family::Family;
pub use hp::Fixed;
pub use mapping::{Branch, BranchCounts, MappingDef, MappingError, Trajectory};
pub use nodes::{
    bound_c, generate_nodes, lambda_exact, ln_lambda, reciprocity_check, rho_max, BoundConstant,
    Node, NodeOptions, NodeStop, Side, TwoBranchFamily,
};
pub use oracle::{enumerate_cycles_exact, Enumeration};
pub use search::{lambda_profile, search_node, search_range, SearchOptions, SearchReport};
pub use ratio::{ExactRatio, FactoredRatio};
