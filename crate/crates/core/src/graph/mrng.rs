//! Contract-level nested graph: one function graph per function, plus call edges.

use super::calls::extract_call_edges;
use super::mrfg::{build_mrfg, Mrfg};
use crate::frontend::{list_functions, NormalizedAst};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mrng {
    /// File path or digest identifying the contract file.
    pub contract: String,
    pub functions: Vec<Mrfg>,
    /// `(caller, callee)` indices into `functions`; no duplicates.
    pub calls: Vec<(usize, usize)>,
}

pub fn build_mrng(contract: impl Into<String>, ast: &NormalizedAst) -> Mrng {
    let functions = list_functions(ast).iter().map(|f| build_mrfg(f, ast)).collect();
    let calls = extract_call_edges(ast).into_iter().map(|e| (e.caller, e.callee)).collect();
    Mrng {
        contract: contract.into(),
        functions,
        calls,
    }
}
