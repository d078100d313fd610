//! Removal of description-only syntax before graph construction.

use crate::frontend::{FunctionAst, NodeKind, NormalizedAst};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedNode {
    /// Originating AST node.
    pub ast_id: usize,
    pub kind: NodeKind,
    pub text: Option<String>,
    /// Canonical type token folded in from the dropped type-name child of a
    /// `VariableDeclaration`.
    pub type_token: Option<String>,
    pub children: Vec<usize>,
}

/// Function subtree with wrappers removed, stored as an arena in preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedTree {
    pub nodes: Vec<PrunedNode>,
    pub root: usize,
}

impl PrunedTree {
    pub fn node(&self, i: usize) -> &PrunedNode {
        &self.nodes[i]
    }

    pub fn preorder(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![i];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }
}

/// Canonical DataType token of a type-name subtree: the elementary type
/// text, or `mapping` / `array` / `user_defined`.
pub fn type_token(ast: &NormalizedAst, type_node: usize) -> String {
    let node = ast.node(type_node);
    match node.kind {
        NodeKind::ElementaryTypeName => node.text.clone().unwrap_or_default(),
        NodeKind::Mapping => "mapping".into(),
        NodeKind::ArrayTypeName => "array".into(),
        NodeKind::UserDefinedTypeName => "user_defined".into(),
        _ => String::new(),
    }
}

fn is_dropped(kind: NodeKind) -> bool {
    kind.is_type_name() || kind == NodeKind::ExpressionStatement
}

/// Drops type-name nodes and `ExpressionStatement` wrappers from a
/// function's subtree. Dropped interior nodes splice their children into
/// the parent; a declaration keeps its type as `type_token`.
pub fn prune_ast(function: &FunctionAst, ast: &NormalizedAst) -> PrunedTree {
    let mut nodes = Vec::new();

    fn keep(ast: &NormalizedAst, id: usize, nodes: &mut Vec<PrunedNode>) -> Vec<usize> {
        let node = ast.node(id);
        if is_dropped(node.kind) {
            return node.children.iter().flat_map(|&c| keep(ast, c, nodes)).collect();
        }
        let idx = nodes.len();
        let type_token = if node.kind == NodeKind::VariableDeclaration {
            node.children
                .iter()
                .find(|&&c| ast.node(c).kind.is_type_name())
                .map(|&c| type_token(ast, c))
        } else {
            None
        };
        nodes.push(PrunedNode {
            ast_id: id,
            kind: node.kind,
            text: node.text.clone(),
            type_token,
            children: Vec::new(),
        });
        let children = node.children.iter().flat_map(|&c| keep(ast, c, nodes)).collect();
        nodes[idx].children = children;
        vec![idx]
    }

    let roots = keep(ast, function.root, &mut nodes);
    debug_assert_eq!(roots, vec![0]);
    PrunedTree { nodes, root: 0 }
}
