//! Normalized syntax tree shared by the built-in parser and the JSON ingest path.

use std::fmt;
use std::str::FromStr;

/// Closed node-kind vocabulary. Adding a kind requires bumping the
/// interchange format tag (`mrn-ast/1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    SourceUnit,
    ContractDefinition,
    VariableDeclaration,
    FunctionDefinition,
    Parameters,
    ReturnParameters,
    ElementaryTypeName,
    UserDefinedTypeName,
    Mapping,
    ArrayTypeName,
    Block,
    VariableDeclarationStatement,
    ExpressionStatement,
    IfStatement,
    WhileStatement,
    DoWhileStatement,
    ForStatement,
    Return,
    Require,
    EmitStatement,
    Break,
    Continue,
    Throw,
    Assignment,
    BinaryOperation,
    UnaryOperation,
    Conditional,
    FunctionCall,
    MemberAccess,
    IndexAccess,
    Identifier,
    Literal,
    TupleExpression,
    NewExpression,
    Unsupported,
}

impl NodeKind {
    pub const ALL: [NodeKind; 35] = [
        NodeKind::SourceUnit,
        NodeKind::ContractDefinition,
        NodeKind::VariableDeclaration,
        NodeKind::FunctionDefinition,
        NodeKind::Parameters,
        NodeKind::ReturnParameters,
        NodeKind::ElementaryTypeName,
        NodeKind::UserDefinedTypeName,
        NodeKind::Mapping,
        NodeKind::ArrayTypeName,
        NodeKind::Block,
        NodeKind::VariableDeclarationStatement,
        NodeKind::ExpressionStatement,
        NodeKind::IfStatement,
        NodeKind::WhileStatement,
        NodeKind::DoWhileStatement,
        NodeKind::ForStatement,
        NodeKind::Return,
        NodeKind::Require,
        NodeKind::EmitStatement,
        NodeKind::Break,
        NodeKind::Continue,
        NodeKind::Throw,
        NodeKind::Assignment,
        NodeKind::BinaryOperation,
        NodeKind::UnaryOperation,
        NodeKind::Conditional,
        NodeKind::FunctionCall,
        NodeKind::MemberAccess,
        NodeKind::IndexAccess,
        NodeKind::Identifier,
        NodeKind::Literal,
        NodeKind::TupleExpression,
        NodeKind::NewExpression,
        NodeKind::Unsupported,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::SourceUnit => "SourceUnit",
            NodeKind::ContractDefinition => "ContractDefinition",
            NodeKind::VariableDeclaration => "VariableDeclaration",
            NodeKind::FunctionDefinition => "FunctionDefinition",
            NodeKind::Parameters => "Parameters",
            NodeKind::ReturnParameters => "ReturnParameters",
            NodeKind::ElementaryTypeName => "ElementaryTypeName",
            NodeKind::UserDefinedTypeName => "UserDefinedTypeName",
            NodeKind::Mapping => "Mapping",
            NodeKind::ArrayTypeName => "ArrayTypeName",
            NodeKind::Block => "Block",
            NodeKind::VariableDeclarationStatement => "VariableDeclarationStatement",
            NodeKind::ExpressionStatement => "ExpressionStatement",
            NodeKind::IfStatement => "IfStatement",
            NodeKind::WhileStatement => "WhileStatement",
            NodeKind::DoWhileStatement => "DoWhileStatement",
            NodeKind::ForStatement => "ForStatement",
            NodeKind::Return => "Return",
            NodeKind::Require => "Require",
            NodeKind::EmitStatement => "EmitStatement",
            NodeKind::Break => "Break",
            NodeKind::Continue => "Continue",
            NodeKind::Throw => "Throw",
            NodeKind::Assignment => "Assignment",
            NodeKind::BinaryOperation => "BinaryOperation",
            NodeKind::UnaryOperation => "UnaryOperation",
            NodeKind::Conditional => "Conditional",
            NodeKind::FunctionCall => "FunctionCall",
            NodeKind::MemberAccess => "MemberAccess",
            NodeKind::IndexAccess => "IndexAccess",
            NodeKind::Identifier => "Identifier",
            NodeKind::Literal => "Literal",
            NodeKind::TupleExpression => "TupleExpression",
            NodeKind::NewExpression => "NewExpression",
            NodeKind::Unsupported => "Unsupported",
        }
    }

    /// Type-name kinds describe a declaration's type and are folded into it
    /// during pruning.
    pub fn is_type_name(self) -> bool {
        matches!(
            self,
            NodeKind::ElementaryTypeName
                | NodeKind::UserDefinedTypeName
                | NodeKind::Mapping
                | NodeKind::ArrayTypeName
        )
    }

    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::VariableDeclarationStatement
                | NodeKind::ExpressionStatement
                | NodeKind::IfStatement
                | NodeKind::WhileStatement
                | NodeKind::DoWhileStatement
                | NodeKind::ForStatement
                | NodeKind::Return
                | NodeKind::Require
                | NodeKind::EmitStatement
                | NodeKind::Break
                | NodeKind::Continue
                | NodeKind::Throw
                | NodeKind::Unsupported
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownKind(pub String);

impl FromStr for NodeKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

/// Source range, 1-based: (start line, start column, end line, end column).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        Span {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn to_array(self) -> [u32; 4] {
        [self.start_line, self.start_col, self.end_line, self.end_col]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AstNode {
    pub id: usize,
    pub kind: NodeKind,
    /// Identifier name, operator symbol, literal text or elementary type name.
    pub text: Option<String>,
    pub children: Vec<usize>,
    pub span: Span,
}

/// Syntax tree of one source file. Node ids are dense and assigned in
/// preorder, so the root is always id 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedAst {
    pub nodes: Vec<AstNode>,
    pub root: usize,
}

impl NormalizedAst {
    pub fn node(&self, id: usize) -> &AstNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &AstNode> + '_ {
        self.nodes[id].children.iter().map(move |&c| &self.nodes[c])
    }

    /// Parent of every node, `None` for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = vec![None; self.nodes.len()];
        for node in &self.nodes {
            for &c in &node.children {
                parents[c] = Some(node.id);
            }
        }
        parents
    }

    /// Ids of the subtree rooted at `id`, in preorder.
    pub fn preorder(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            for &c in self.nodes[n].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// The contracts declared in the file, as (node id, name).
    pub fn contracts(&self) -> Vec<(usize, &str)> {
        self.children(self.root)
            .filter(|n| n.kind == NodeKind::ContractDefinition)
            .map(|n| (n.id, n.text.as_deref().unwrap_or("")))
            .collect()
    }
}

/// Owned tree used while parsing; flattened into a [`NormalizedAst`] in
/// preorder once complete.
#[derive(Clone, Debug)]
pub(crate) struct TreeNode {
    pub kind: NodeKind,
    pub text: Option<String>,
    pub children: Vec<TreeNode>,
    pub span: Span,
}

impl TreeNode {
    pub fn new(kind: NodeKind, text: Option<String>, span: Span) -> Self {
        TreeNode {
            kind,
            text,
            children: Vec::new(),
            span,
        }
    }

    pub fn with_children(mut self, children: Vec<TreeNode>) -> Self {
        self.children = children;
        self
    }

    pub fn flatten(self) -> NormalizedAst {
        let mut nodes = Vec::new();
        fn walk(node: TreeNode, nodes: &mut Vec<AstNode>) -> usize {
            let id = nodes.len();
            nodes.push(AstNode {
                id,
                kind: node.kind,
                text: node.text,
                children: Vec::new(),
                span: node.span,
            });
            let children: Vec<usize> = node.children.into_iter().map(|c| walk(c, nodes)).collect();
            nodes[id].children = children;
            id
        }
        let root = walk(self, &mut nodes);
        NormalizedAst { nodes, root }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for kind in NodeKind::ALL {
            assert_eq!(kind.as_str().parse::<NodeKind>().unwrap(), kind);
        }
        assert!("YulBlock".parse::<NodeKind>().is_err());
    }

    #[test]
    fn flatten_assigns_preorder_ids() {
        let s = Span::default();
        let tree = TreeNode::new(NodeKind::SourceUnit, None, s).with_children(vec![
            TreeNode::new(NodeKind::ContractDefinition, Some("A".into()), s).with_children(vec![
                TreeNode::new(NodeKind::Unsupported, None, s),
            ]),
            TreeNode::new(NodeKind::ContractDefinition, Some("B".into()), s),
        ]);
        let ast = tree.flatten();
        assert_eq!(ast.root, 0);
        assert_eq!(ast.nodes[0].children, vec![1, 3]);
        assert_eq!(ast.nodes[1].children, vec![2]);
        assert_eq!(ast.preorder(0), vec![0, 1, 2, 3]);
        assert_eq!(ast.contracts(), vec![(1, "A"), (3, "B")]);
    }
}
