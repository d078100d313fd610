//! Graph interchange JSON (`mrn-graph/1`).

use serde_json::{json, Value};
use thiserror::Error;

use super::edge::{EdgeCategory, EdgeType};
use super::mrfg::{Edge, GraphNode, Mrfg};
use super::mrng::Mrng;

pub const GRAPH_FORMAT: &str = "mrn-graph/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid graph interchange at {path}: {message}")]
pub struct GraphFormatError {
    pub path: String,
    pub message: String,
}

fn err(path: impl Into<String>, message: impl Into<String>) -> GraphFormatError {
    GraphFormatError {
        path: path.into(),
        message: message.into(),
    }
}

/// Pretty JSON with lexicographically ordered keys; stable byte output.
pub fn serialize_graph(g: &Mrng) -> String {
    let functions: Vec<Value> = g
        .functions
        .iter()
        .map(|f| {
            let nodes: Vec<Value> = f.nodes.iter().map(|n| json!({ "id": n.id, "label": n.label })).collect();
            let edges: Vec<Value> = f
                .edges
                .iter()
                .map(|e| {
                    json!({
                        "src": e.src,
                        "dst": e.dst,
                        "category": e.kind.category.as_str(),
                        "subtype": e.kind.subtype(),
                        "seq": e.seq,
                    })
                })
                .collect();
            json!({ "name": f.name, "arity": f.arity, "nodes": nodes, "edges": edges })
        })
        .collect();
    let calls: Vec<Value> = g
        .calls
        .iter()
        .map(|&(caller, callee)| json!({ "caller": caller, "callee": callee }))
        .collect();
    let doc = json!({
        "format": GRAPH_FORMAT,
        "contract": g.contract,
        "functions": functions,
        "calls": calls,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("graph JSON serializes");
    out.push('\n');
    out
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, GraphFormatError> {
    obj.get(key).ok_or_else(|| err(format!("{path}.{key}"), "missing field"))
}

fn index(obj: &Value, key: &str, path: &str) -> Result<usize, GraphFormatError> {
    field(obj, key, path)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| err(format!("{path}.{key}"), "expected a non-negative integer"))
}

fn string<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a str, GraphFormatError> {
    field(obj, key, path)?
        .as_str()
        .ok_or_else(|| err(format!("{path}.{key}"), "expected a string"))
}

fn array<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Vec<Value>, GraphFormatError> {
    field(obj, key, path)?
        .as_array()
        .ok_or_else(|| err(format!("{path}.{key}"), "expected an array"))
}

fn read_function(f: &Value, path: &str, warnings: &mut Vec<String>) -> Result<Mrfg, GraphFormatError> {
    let name = string(f, "name", path)?.to_string();
    let arity = index(f, "arity", path)?;
    let mut nodes = Vec::new();
    for (i, n) in array(f, "nodes", path)?.iter().enumerate() {
        let npath = format!("{path}.nodes[{i}]");
        let id = index(n, "id", &npath)?;
        if id != i {
            return Err(err(format!("{npath}.id"), format!("expected id {i}, found {id}")));
        }
        nodes.push(GraphNode {
            id,
            label: string(n, "label", &npath)?.to_string(),
        });
    }
    let mut edges = Vec::new();
    for (i, e) in array(f, "edges", path)?.iter().enumerate() {
        let epath = format!("{path}.edges[{i}]");
        let src = index(e, "src", &epath)?;
        let dst = index(e, "dst", &epath)?;
        for (key, v) in [("src", src), ("dst", dst)] {
            if v >= nodes.len() {
                return Err(err(format!("{epath}.{key}"), format!("node {v} does not exist")));
            }
        }
        let category_name = string(e, "category", &epath)?;
        let category = EdgeCategory::parse(category_name)
            .ok_or_else(|| err(format!("{epath}.category"), format!("unknown category {category_name:?}")))?;
        let subtype = string(e, "subtype", &epath)?;
        let kind = EdgeType::new(category, subtype).unwrap_or_else(|| {
            warnings.push(format!("{epath}.subtype: unknown subtype {subtype:?} read as UNK_EDGE"));
            EdgeType::unknown(category)
        });
        let seq = match field(e, "seq", &epath)? {
            Value::Null => None,
            v => Some(
                v.as_u64()
                    .ok_or_else(|| err(format!("{epath}.seq"), "expected a non-negative integer or null"))?
                    as usize,
            ),
        };
        edges.push(Edge { src, dst, kind, seq });
    }
    Ok(Mrfg {
        name,
        arity,
        nodes,
        edges,
    })
}

/// Reads interchange JSON. Unknown edge subtypes become `UNK_EDGE` and are
/// reported in the returned warnings.
pub fn deserialize_graph(bytes: &[u8]) -> Result<(Mrng, Vec<String>), GraphFormatError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| err("$", e.to_string()))?;
    if !doc.is_object() {
        return Err(err("$", "expected an object"));
    }
    let format = field(&doc, "format", "$")?;
    if format.as_str() != Some(GRAPH_FORMAT) {
        return Err(err("$.format", format!("expected \"{GRAPH_FORMAT}\", found {format}")));
    }
    let contract = string(&doc, "contract", "$")?.to_string();
    let mut warnings = Vec::new();
    let functions = array(&doc, "functions", "$")?
        .iter()
        .enumerate()
        .map(|(i, f)| read_function(f, &format!("$.functions[{i}]"), &mut warnings))
        .collect::<Result<Vec<_>, _>>()?;
    let mut calls = Vec::new();
    for (i, c) in array(&doc, "calls", "$")?.iter().enumerate() {
        let cpath = format!("$.calls[{i}]");
        let caller = index(c, "caller", &cpath)?;
        let callee = index(c, "callee", &cpath)?;
        for (key, v) in [("caller", caller), ("callee", callee)] {
            if v >= functions.len() {
                return Err(err(format!("{cpath}.{key}"), format!("function {v} does not exist")));
            }
        }
        if calls.contains(&(caller, callee)) {
            return Err(err(cpath, "duplicate call edge"));
        }
        calls.push((caller, callee));
    }
    Ok((
        Mrng {
            contract,
            functions,
            calls,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, SourceFile};
    use crate::graph::build_mrng;

    fn sample() -> Mrng {
        let src = "contract C { uint t; function f(uint a) { if (a > t) { msg.sender.transfer(a); } g(); } function g() {} }";
        build_mrng("c.sol", &parse_source(&SourceFile::new("c.sol", src)).unwrap())
    }

    #[test]
    fn round_trip() {
        let g = sample();
        let text = serialize_graph(&g);
        let (back, warnings) = deserialize_graph(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        assert!(warnings.is_empty());
        assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn truncated_input() {
        let text = serialize_graph(&sample());
        let e = deserialize_graph(&text.as_bytes()[..text.len() / 2]).unwrap_err();
        assert_eq!(e.path, "$");
    }

    #[test]
    fn unknown_subtype_warns() {
        let text = serialize_graph(&sample()).replacen("\"subtype\": \"sequential\"", "\"subtype\": \"goto\"", 1);
        let (g, warnings) = deserialize_graph(text.as_bytes()).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(g.functions[0].edges.iter().filter(|e| e.kind.is_unknown()).count(), 1);
    }

    #[test]
    fn dangling_endpoint_names_path() {
        let text = serialize_graph(&sample()).replacen("\"dst\": 1,", "\"dst\": 999,", 1);
        let e = deserialize_graph(text.as_bytes()).unwrap_err();
        assert_eq!(e.path, "$.functions[0].edges[0].dst");
    }
}
