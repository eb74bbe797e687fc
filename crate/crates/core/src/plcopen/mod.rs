//! PLCopen TC6 XML exchange and the normalized chart topology.

mod codec;
pub mod graph;
pub mod template;
pub mod xml;

pub use codec::{
    emit_plcopen, parse_plcopen, parse_plcopen_all, EmitError, PlcopenError, PlcopenWarning, TC6_NAMESPACE,
};
pub use graph::{
    canonical_edge_order, check_graph, denormalize, normalize, GraphBuilder, GraphError, Node, NodeId, NodeKind,
    NormalizationError, NormalizedGraph,
};
pub use template::{MetadataTemplate, TemplateError, DEFAULT_TEMPLATE};
