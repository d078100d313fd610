//! Per-function verdicts for one source file.

use serde::{Deserialize, Serialize};

use crate::frontend::{list_functions, parse_source, FrontendError, SourceFile};
use crate::graph::build_mrng;
use crate::model::Model;
use crate::tensor::KernelError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionVerdict {
    pub contract: String,
    pub name: String,
    pub arity: usize,
    /// `[start_line, start_col, end_line, end_col]`, 1-based.
    pub span: [u32; 4],
    pub probability: f64,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocateReport {
    pub file: String,
    pub threshold: f64,
    pub functions: Vec<FunctionVerdict>,
}

impl LocateReport {
    pub fn any_positive(&self) -> bool {
        self.functions.iter().any(|f| f.verdict)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LocateError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Verdict is `probability >= threshold`.
pub fn locate(file: &SourceFile, model: &Model, threshold: f64) -> Result<LocateReport, LocateError> {
    let ast = parse_source(file)?;
    let graph = build_mrng(file.path.clone(), &ast);
    let probs = model.predict(&graph)?;
    let functions = list_functions(&ast)
        .into_iter()
        .zip(probs)
        .map(|(f, p)| FunctionVerdict {
            contract: f.contract,
            name: f.name,
            arity: f.arity,
            span: [f.span.start_line, f.span.start_col, f.span.end_line, f.span.end_col],
            probability: p,
            verdict: p >= threshold,
        })
        .collect();
    Ok(LocateReport {
        file: file.path.clone(),
        threshold,
        functions,
    })
}
