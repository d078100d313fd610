//! Solidity frontend: source text or AST interchange JSON in, [`NormalizedAst`] out.

mod ast;
mod json;
mod lexer;
mod parser;

pub use ast::{AstNode, NodeKind, NormalizedAst, Span, UnknownKind};
pub use json::{emit_ast_json, ingest_ast_json, AST_FORMAT};
pub use parser::is_elementary_type;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("source is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("invalid AST interchange at {path}: {message}")]
    Format { path: String, message: String },
}

impl FrontendError {
    pub(crate) fn syntax(line: u32, col: u32, message: impl Into<String>) -> Self {
        FrontendError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub(crate) fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        FrontendError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    /// Only used in diagnostics.
    pub path: String,
    pub content: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, content: impl Into<String>) -> Self {
        SourceFile {
            path: path.into(),
            content: content.into(),
        }
    }

    pub fn from_bytes(path: impl Into<String>, bytes: Vec<u8>) -> Result<Self, FrontendError> {
        let content = String::from_utf8(bytes).map_err(|e| FrontendError::Encoding {
            offset: e.utf8_error().valid_up_to(),
        })?;
        Ok(SourceFile::new(path, content))
    }
}

/// Parses a source file into its normalized AST. Deterministic: identical
/// input yields identical node ids.
pub fn parse_source(file: &SourceFile) -> Result<NormalizedAst, FrontendError> {
    let mut parser = parser::Parser::new(&file.content)?;
    Ok(parser.parse_source_unit()?.flatten())
}

/// One function definition in a parsed file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionAst {
    pub name: String,
    pub arity: usize,
    /// Id of the `FunctionDefinition` node.
    pub root: usize,
    pub contract: String,
    /// Id of the enclosing `ContractDefinition` node.
    pub contract_id: usize,
    pub is_fallback: bool,
    pub is_constructor: bool,
    pub span: Span,
}

/// All function definitions of all contracts, in file order.
///
/// `FunctionDefinition.text` is `None` for fallbacks and `constructor` for
/// keyword constructors; a function named after its contract is an old-style
/// constructor.
pub fn list_functions(ast: &NormalizedAst) -> Vec<FunctionAst> {
    let mut out = Vec::new();
    for (contract_id, contract) in ast.contracts() {
        for member in ast.children(contract_id) {
            if member.kind != NodeKind::FunctionDefinition {
                continue;
            }
            let text = member.text.as_deref();
            let is_fallback = text.is_none();
            let is_constructor = text == Some("constructor") || text == Some(contract);
            let name = match text {
                None | Some("constructor") => String::new(),
                Some(name) => name.to_string(),
            };
            let arity = ast
                .children(member.id)
                .find(|c| c.kind == NodeKind::Parameters)
                .map_or(0, |p| p.children.len());
            out.push(FunctionAst {
                name,
                arity,
                root: member.id,
                contract: contract.to_string(),
                contract_id,
                is_fallback,
                is_constructor,
                span: member.span,
            });
        }
    }
    out
}
