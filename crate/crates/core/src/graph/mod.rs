//! Function graphs (MRFG) and the contract-level nested graph (MRNG).

mod calls;
mod dot;
mod edge;
mod mrfg;
mod mrng;
mod prune;
mod serial;
mod vocab;

pub use calls::{extract_call_edges, CallEdge};
pub use dot::{mrfg_to_dot, mrng_to_dot};
pub use edge::{all_subtypes, EdgeCategory, EdgeType, UNK_EDGE};
pub use mrfg::{
    add_dataflow_edges, add_fallback_edges, build_mrfg, is_transfer_call, state_variables, Edge, GraphDraft,
    GraphNode, Mrfg, StateVar, ENTRY_LABEL, UNSUPPORTED_LABEL,
};
pub use mrng::{build_mrng, Mrng};
pub use prune::{prune_ast, type_token, PrunedNode, PrunedTree};
pub use serial::{deserialize_graph, serialize_graph, GraphFormatError, GRAPH_FORMAT};
pub use vocab::{build_vocabulary, Vocabulary, VocabularyError, PAD, PAD_ID, UNK, UNK_ID};
