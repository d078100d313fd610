//! Per-function multi-relational graph construction.

use std::collections::{HashMap, HashSet};

use super::edge::EdgeType;
use super::prune::{prune_ast, type_token, PrunedTree};
use crate::frontend::{FunctionAst, NodeKind, NormalizedAst};

pub const ENTRY_LABEL: &str = "entry";
pub const UNSUPPORTED_LABEL: &str = "unsupported";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphNode {
    pub id: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeType,
    /// Position along the statement order; set on sequential edges only.
    pub seq: Option<usize>,
}

impl Edge {
    pub fn new(src: usize, dst: usize, kind: EdgeType) -> Self {
        Edge { src, dst, kind, seq: None }
    }

    fn sequential(src: usize, dst: usize, seq: usize) -> Self {
        Edge {
            src,
            dst,
            kind: EdgeType::SEQUENTIAL,
            seq: Some(seq),
        }
    }
}

/// Multi-relational function graph. Node 0 is always `entry`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mrfg {
    pub name: String,
    pub arity: usize,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
}

impl Mrfg {
    pub const ENTRY: usize = 0;

    pub fn edges_of(&self, kind: EdgeType) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn label(&self, id: usize) -> &str {
        &self.nodes[id].label
    }
}

/// A contract state variable that function bodies may reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVar {
    pub name: String,
    pub type_token: String,
}

pub fn state_variables(ast: &NormalizedAst, contract_id: usize) -> Vec<StateVar> {
    ast.children(contract_id)
        .filter(|n| n.kind == NodeKind::VariableDeclaration)
        .filter_map(|n| {
            let name = n.text.clone()?;
            let ty = n
                .children
                .iter()
                .find(|&&c| ast.node(c).kind.is_type_name())
                .map(|&c| type_token(ast, c))
                .unwrap_or_default();
            Some(StateVar { name, type_token: ty })
        })
        .collect()
}

/// Graph under construction: materialized nodes plus the mapping from
/// pruned-tree nodes to graph node ids.
#[derive(Clone, Debug)]
pub struct GraphDraft {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    /// Graph id of each pruned node; `None` for the function root and blocks.
    pub graph_id: Vec<Option<usize>>,
    state_nodes: HashMap<String, usize>,
}

impl GraphDraft {
    fn add_node(&mut self, label: String) -> usize {
        let id = self.nodes.len();
        self.nodes.push(GraphNode { id, label });
        id
    }

    fn gid(&self, pruned: usize) -> Option<usize> {
        self.graph_id[pruned]
    }
}

fn node_label(kind: NodeKind, text: Option<&str>) -> String {
    match kind {
        NodeKind::Unsupported => UNSUPPORTED_LABEL.to_string(),
        NodeKind::NewExpression => format!("new {}", text.unwrap_or_default()),
        NodeKind::VariableDeclaration
        | NodeKind::Identifier
        | NodeKind::Literal
        | NodeKind::BinaryOperation
        | NodeKind::UnaryOperation
        | NodeKind::Assignment
        | NodeKind::MemberAccess
        | NodeKind::Require => text.map_or_else(|| kind.as_str().to_string(), str::to_string),
        _ => kind.as_str().to_string(),
    }
}

/// Statements of a body slot: a block's statements with nested blocks
/// flattened, or the single statement itself.
fn statements(tree: &PrunedTree, idx: usize) -> Vec<usize> {
    let node = tree.node(idx);
    if node.kind == NodeKind::Block {
        node.children.iter().flat_map(|&c| statements(tree, c)).collect()
    } else {
        vec![idx]
    }
}

/// Body slots (`then`, `else`, loop body) of a control statement, each with
/// the ControlInfo type linking the statement to the slot's head.
fn body_slots(tree: &PrunedTree, idx: usize) -> Vec<(usize, EdgeType)> {
    let node = tree.node(idx);
    match node.kind {
        NodeKind::IfStatement => {
            let mut slots = vec![(node.children[1], EdgeType::IF)];
            if let Some(&e) = node.children.get(2) {
                slots.push((e, EdgeType::ELSE));
            }
            slots
        }
        NodeKind::WhileStatement | NodeKind::DoWhileStatement => vec![(node.children[1], EdgeType::WHILE)],
        NodeKind::ForStatement => vec![(*node.children.last().expect("for has a body"), EdgeType::FOR)],
        _ => Vec::new(),
    }
}

fn materialize(tree: &PrunedTree) -> GraphDraft {
    let mut draft = GraphDraft {
        nodes: Vec::new(),
        edges: Vec::new(),
        graph_id: vec![None; tree.nodes.len()],
        state_nodes: HashMap::new(),
    };
    draft.add_node(ENTRY_LABEL.to_string());
    for idx in tree.preorder(tree.root) {
        let node = tree.node(idx);
        if idx == tree.root || node.kind == NodeKind::Block {
            continue;
        }
        let id = draft.add_node(node_label(node.kind, node.text.as_deref()));
        draft.graph_id[idx] = Some(id);
    }
    draft
}

fn sequential_edges(tree: &PrunedTree, draft: &GraphDraft) -> Vec<Edge> {
    let root = tree.node(tree.root);
    let find = |kind| {
        root.children
            .iter()
            .copied()
            .find(|&c| tree.node(c).kind == kind)
            .expect("function has parameter lists")
    };
    let params = find(NodeKind::Parameters);
    let returns = find(NodeKind::ReturnParameters);
    let body: Vec<usize> = root
        .children
        .iter()
        .filter(|&&c| tree.node(c).kind == NodeKind::Block)
        .flat_map(|&c| statements(tree, c))
        .collect();

    let mut chain = vec![Mrfg::ENTRY, draft.gid(params).unwrap()];
    chain.extend(body.iter().map(|&s| draft.gid(s).unwrap()));
    chain.push(draft.gid(returns).unwrap());
    let mut edges: Vec<Edge> = chain
        .windows(2)
        .enumerate()
        .map(|(i, w)| Edge::sequential(w[0], w[1], i))
        .collect();

    // nested bodies continue the numbering in preorder
    let mut seq = edges.len();
    for idx in tree.preorder(tree.root) {
        for (slot, _) in body_slots(tree, idx) {
            let stmts = statements(tree, slot);
            for w in stmts.windows(2) {
                edges.push(Edge::sequential(draft.gid(w[0]).unwrap(), draft.gid(w[1]).unwrap(), seq));
                seq += 1;
            }
        }
    }
    edges
}

fn structural_edges(tree: &PrunedTree, draft: &GraphDraft) -> Vec<Edge> {
    let mut edges = Vec::new();
    for idx in tree.preorder(tree.root) {
        let node = tree.node(idx);
        let Some(src) = draft.gid(idx) else { continue };
        let child = |i: usize| draft.gid(node.children[i]).expect("expression children are materialized");
        let mut push = |dst: usize, kind: EdgeType| edges.push(Edge::new(src, dst, kind));
        match node.kind {
            NodeKind::Parameters | NodeKind::ReturnParameters => {
                for &c in &node.children {
                    let ty = tree.node(c).type_token.as_deref().unwrap_or_default();
                    push(draft.gid(c).unwrap(), EdgeType::data_type(ty));
                }
            }
            NodeKind::VariableDeclarationStatement => {
                for &c in &node.children {
                    let cn = tree.node(c);
                    let dst = draft.gid(c).unwrap();
                    if cn.kind == NodeKind::VariableDeclaration {
                        push(dst, EdgeType::LEFT);
                        push(dst, EdgeType::data_type(cn.type_token.as_deref().unwrap_or_default()));
                    } else {
                        push(dst, EdgeType::RIGHT);
                    }
                }
            }
            NodeKind::Assignment | NodeKind::BinaryOperation => {
                push(child(0), EdgeType::LEFT);
                push(child(1), EdgeType::RIGHT);
            }
            NodeKind::IndexAccess => {
                push(child(0), EdgeType::LEFT);
                if node.children.len() > 1 {
                    push(child(1), EdgeType::INDEX);
                }
            }
            NodeKind::UnaryOperation | NodeKind::Return => {
                if !node.children.is_empty() {
                    push(child(0), EdgeType::OPERATION);
                }
            }
            NodeKind::Conditional => {
                push(child(0), EdgeType::CONDITION);
                push(child(1), EdgeType::LEFT);
                push(child(2), EdgeType::RIGHT);
            }
            NodeKind::FunctionCall => {
                push(child(0), EdgeType::FUNCTION_CALL);
                for i in 1..node.children.len() {
                    push(child(i), EdgeType::ARGUMENT);
                }
            }
            NodeKind::EmitStatement => push(child(0), EdgeType::FUNCTION_CALL),
            NodeKind::MemberAccess => push(child(0), EdgeType::MEMBER),
            NodeKind::TupleExpression => {
                for i in 0..node.children.len() {
                    push(child(i), EdgeType::ARGUMENT);
                }
            }
            NodeKind::Require => {
                if !node.children.is_empty() {
                    push(child(0), EdgeType::REQUIRE);
                }
                for i in 1..node.children.len() {
                    push(child(i), EdgeType::ARGUMENT);
                }
            }
            NodeKind::IfStatement | NodeKind::WhileStatement | NodeKind::DoWhileStatement => {
                let kind = if node.kind == NodeKind::IfStatement {
                    EdgeType::IF
                } else {
                    EdgeType::WHILE
                };
                push(child(0), kind);
                for (slot, kind) in body_slots(tree, idx) {
                    if let Some(&head) = statements(tree, slot).first() {
                        push(draft.gid(head).unwrap(), kind);
                    }
                }
            }
            NodeKind::ForStatement => {
                // init, condition and update hang off the loop like its body head
                for &c in &node.children[..node.children.len() - 1] {
                    push(draft.gid(c).unwrap(), EdgeType::FOR);
                }
                for (slot, kind) in body_slots(tree, idx) {
                    if let Some(&head) = statements(tree, slot).first() {
                        push(draft.gid(head).unwrap(), kind);
                    }
                }
            }
            _ => {}
        }
    }
    edges
}

/// DataFlow edges: `compute_from` from each assigned variable to every node
/// of the assigned expression, and `value_from` from each identifier to the
/// declaration it names (parameter, then local, then state variable). State
/// variables are materialized on first reference.
pub fn add_dataflow_edges(draft: &mut GraphDraft, tree: &PrunedTree, state_vars: &[StateVar]) -> Vec<Edge> {
    let mut edges = Vec::new();
    let subtree_nodes = |draft: &GraphDraft, idx: usize| -> Vec<usize> {
        tree.preorder(idx).into_iter().filter_map(|i| draft.gid(i)).collect()
    };

    for idx in tree.preorder(tree.root) {
        let node = tree.node(idx);
        match node.kind {
            NodeKind::Assignment => {
                let target = draft.gid(node.children[0]).unwrap();
                for dst in subtree_nodes(draft, node.children[1]) {
                    edges.push(Edge::new(target, dst, EdgeType::COMPUTE_FROM));
                }
            }
            NodeKind::VariableDeclarationStatement => {
                let (decls, init): (Vec<usize>, Vec<usize>) = node
                    .children
                    .iter()
                    .partition(|&&c| tree.node(c).kind == NodeKind::VariableDeclaration);
                if let Some(&init) = init.first() {
                    let targets = subtree_nodes(draft, init);
                    for d in decls {
                        let src = draft.gid(d).unwrap();
                        edges.extend(targets.iter().map(|&t| Edge::new(src, t, EdgeType::COMPUTE_FROM)));
                    }
                }
            }
            _ => {}
        }
    }

    let mut params: HashMap<&str, usize> = HashMap::new();
    let mut locals: HashMap<&str, usize> = HashMap::new();
    for idx in tree.preorder(tree.root) {
        let node = tree.node(idx);
        let scope = match node.kind {
            NodeKind::Parameters | NodeKind::ReturnParameters => &mut params,
            NodeKind::VariableDeclarationStatement => &mut locals,
            _ => continue,
        };
        for &c in &node.children {
            let decl = tree.node(c);
            if decl.kind == NodeKind::VariableDeclaration {
                if let Some(name) = decl.text.as_deref() {
                    scope.entry(name).or_insert_with(|| draft.gid(c).unwrap());
                }
            }
        }
    }

    for idx in tree.preorder(tree.root) {
        let node = tree.node(idx);
        if node.kind != NodeKind::Identifier {
            continue;
        }
        let Some(name) = node.text.as_deref() else { continue };
        let src = draft.gid(idx).unwrap();
        let decl = if let Some(&d) = params.get(name) {
            Some(d)
        } else if let Some(&d) = locals.get(name) {
            Some(d)
        } else if let Some(var) = state_vars.iter().find(|v| v.name == name) {
            let id = match draft.state_nodes.get(name) {
                Some(&id) => id,
                None => {
                    let id = draft.add_node(var.name.clone());
                    draft.state_nodes.insert(var.name.clone(), id);
                    // the state variable's type hangs off entry
                    edges.push(Edge::new(Mrfg::ENTRY, id, EdgeType::data_type(&var.type_token)));
                    id
                }
            };
            Some(id)
        } else {
            None
        };
        if let Some(dst) = decl {
            edges.push(Edge::new(src, dst, EdgeType::VALUE_FROM));
        }
    }
    edges
}

/// True for the pruned `FunctionCall` nodes that move ether: `.transfer(..)`,
/// `.send(..)` and the `.value(..)` application of `.call.value(..)`.
pub fn is_transfer_call(tree: &PrunedTree, idx: usize) -> bool {
    let node = tree.node(idx);
    if node.kind != NodeKind::FunctionCall {
        return false;
    }
    let callee = tree.node(node.children[0]);
    if callee.kind != NodeKind::MemberAccess {
        return false;
    }
    match callee.text.as_deref() {
        Some("transfer") | Some("send") => true,
        Some("value") => {
            // walk the receiver chain looking for `.call`, through `.gas(..)`
            let mut cur = callee.children.first().copied();
            while let Some(c) = cur {
                let n = tree.node(c);
                match n.kind {
                    NodeKind::MemberAccess if n.text.as_deref() == Some("call") => return true,
                    NodeKind::MemberAccess | NodeKind::FunctionCall => cur = n.children.first().copied(),
                    _ => return false,
                }
            }
            false
        }
        _ => false,
    }
}

/// One Fallback edge from every ether-transferring call site to `entry`.
pub fn add_fallback_edges(draft: &GraphDraft, tree: &PrunedTree) -> Vec<Edge> {
    tree.preorder(tree.root)
        .into_iter()
        .filter(|&idx| is_transfer_call(tree, idx))
        .map(|idx| Edge::new(draft.gid(idx).unwrap(), Mrfg::ENTRY, EdgeType::FALLBACK))
        .collect()
}

/// Builds the multi-relational graph of one function.
pub fn build_mrfg(function: &FunctionAst, ast: &NormalizedAst) -> Mrfg {
    let tree = prune_ast(function, ast);
    let state_vars = state_variables(ast, function.contract_id);
    let mut draft = materialize(&tree);
    let mut edges = sequential_edges(&tree, &draft);
    edges.extend(structural_edges(&tree, &draft));
    let flow = add_dataflow_edges(&mut draft, &tree, &state_vars);
    edges.extend(flow);
    edges.extend(add_fallback_edges(&draft, &tree));
    edges.extend((0..draft.nodes.len()).map(|i| Edge::new(i, i, EdgeType::SELF_LOOP)));

    let mut seen = HashSet::new();
    edges.retain(|e| seen.insert(e.clone()));
    Mrfg {
        name: function.name.clone(),
        arity: function.arity,
        nodes: draft.nodes,
        edges,
    }
}
