//! AST interchange JSON (`mrn-ast/1`).

use serde_json::{json, Value};

use super::ast::{NodeKind, NormalizedAst, Span, TreeNode};
use super::FrontendError;

pub const AST_FORMAT: &str = "mrn-ast/1";

pub fn emit_ast_json(ast: &NormalizedAst) -> String {
    let nodes: Vec<Value> = ast
        .nodes
        .iter()
        .map(|n| {
            json!({
                "id": n.id,
                "kind": n.kind.as_str(),
                "text": n.text,
                "children": n.children,
                "span": n.span.to_array(),
            })
        })
        .collect();
    let doc = json!({ "format": AST_FORMAT, "nodes": nodes, "root": ast.root });
    serde_json::to_string_pretty(&doc).expect("AST JSON serializes")
}

struct RawNode {
    kind: Option<NodeKind>,
    text: Option<String>,
    children: Vec<usize>,
    span: Span,
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, FrontendError> {
    obj.get(key)
        .ok_or_else(|| FrontendError::format(format!("{path}.{key}"), "missing field"))
}

fn as_index(v: &Value, path: &str) -> Result<usize, FrontendError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| FrontendError::format(path, "expected a non-negative integer"))
}

/// Reads interchange JSON. Unknown node kinds become `Unsupported` leaves
/// (their subtrees are dropped) and ids are renumbered in preorder.
pub fn ingest_ast_json(bytes: &[u8]) -> Result<NormalizedAst, FrontendError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| FrontendError::format("$", e.to_string()))?;
    if !doc.is_object() {
        return Err(FrontendError::format("$", "expected an object"));
    }
    let format = field(&doc, "format", "$")?;
    if format.as_str() != Some(AST_FORMAT) {
        return Err(FrontendError::format(
            "$.format",
            format!("expected \"{AST_FORMAT}\", found {format}"),
        ));
    }
    let nodes = field(&doc, "nodes", "$")?
        .as_array()
        .ok_or_else(|| FrontendError::format("$.nodes", "expected an array"))?;
    let n = nodes.len();
    let mut raw: Vec<Option<RawNode>> = (0..n).map(|_| None).collect();
    let mut json_index = vec![0usize; n];
    for (i, node) in nodes.iter().enumerate() {
        let path = format!("$.nodes[{i}]");
        if !node.is_object() {
            return Err(FrontendError::format(path, "expected an object"));
        }
        let id = as_index(field(node, "id", &path)?, &format!("{path}.id"))?;
        if id >= n {
            return Err(FrontendError::format(
                format!("{path}.id"),
                format!("id {id} out of range for {n} nodes"),
            ));
        }
        if raw[id].is_some() {
            return Err(FrontendError::format(format!("{path}.id"), format!("duplicate id {id}")));
        }
        let kind_value = field(node, "kind", &path)?;
        let kind = kind_value
            .as_str()
            .ok_or_else(|| FrontendError::format(format!("{path}.kind"), "expected a string"))?
            .parse::<NodeKind>()
            .ok();
        let text = match field(node, "text", &path)? {
            Value::Null => None,
            Value::String(s) => Some(s.clone()),
            _ => return Err(FrontendError::format(format!("{path}.text"), "expected a string or null")),
        };
        let children = field(node, "children", &path)?
            .as_array()
            .ok_or_else(|| FrontendError::format(format!("{path}.children"), "expected an array"))?
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let cpath = format!("{path}.children[{k}]");
                let c = as_index(c, &cpath)?;
                if c >= n {
                    return Err(FrontendError::format(cpath, format!("child id {c} does not exist")));
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let span_value = field(node, "span", &path)?;
        let span_arr = span_value
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| FrontendError::format(format!("{path}.span"), "expected 4 integers"))?;
        let mut span = [0u32; 4];
        for (k, v) in span_arr.iter().enumerate() {
            span[k] = v
                .as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| FrontendError::format(format!("{path}.span[{k}]"), "expected a non-negative integer"))?;
        }
        raw[id] = Some(RawNode {
            kind,
            text,
            children,
            span: Span::new(span[0], span[1], span[2], span[3]),
        });
        json_index[id] = i;
    }
    let raw: Vec<RawNode> = raw.into_iter().map(|r| r.expect("ids are dense")).collect();
    let root = as_index(field(&doc, "root", "$")?, "$.root")?;
    if root >= n {
        return Err(FrontendError::format("$.root", format!("root id {root} does not exist")));
    }

    // single parent, root has none, everything reachable
    let mut parent = vec![None::<usize>; n];
    for (id, node) in raw.iter().enumerate() {
        for (k, &c) in node.children.iter().enumerate() {
            let cpath = format!("$.nodes[{}].children[{k}]", json_index[id]);
            if c == root {
                return Err(FrontendError::format(cpath, "the root cannot be a child"));
            }
            if parent[c].is_some() {
                return Err(FrontendError::format(cpath, format!("node {c} already has a parent")));
            }
            parent[c] = Some(id);
        }
    }
    let mut reached = vec![false; n];
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        reached[id] = true;
        stack.extend(raw[id].children.iter().copied());
    }
    if let Some(id) = reached.iter().position(|r| !r) {
        return Err(FrontendError::format(
            format!("$.nodes[{}]", json_index[id]),
            "node is not reachable from the root",
        ));
    }

    fn build(id: usize, raw: &[RawNode]) -> TreeNode {
        let node = &raw[id];
        match node.kind {
            Some(kind) if kind != NodeKind::Unsupported => TreeNode::new(kind, node.text.clone(), node.span)
                .with_children(node.children.iter().map(|&c| build(c, raw)).collect()),
            _ => TreeNode::new(NodeKind::Unsupported, node.text.clone(), node.span),
        }
    }
    Ok(build(root, &raw).flatten())
}
