//! Intra-file call edge extraction.

use std::collections::HashMap;

use crate::frontend::{list_functions, FunctionAst, NodeKind, NormalizedAst};

/// A resolved invocation, as indices into [`list_functions`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallEdge {
    pub caller: usize,
    pub callee: usize,
}

struct Resolver<'a> {
    ast: &'a NormalizedAst,
    functions: &'a [FunctionAst],
    contracts: HashMap<&'a str, usize>,
}

impl<'a> Resolver<'a> {
    /// Name first, then arity; a unique same-name function is accepted when
    /// no arity matches. Candidates in `prefer_contract` shadow the rest.
    fn resolve(&self, name: &str, arity: usize, in_contract: Option<usize>, prefer_contract: Option<usize>) -> Option<usize> {
        let mut candidates: Vec<usize> = (0..self.functions.len())
            .filter(|&i| {
                let f = &self.functions[i];
                f.name == name && !f.is_fallback && !f.is_constructor
            })
            .filter(|&i| in_contract.is_none_or(|c| self.functions[i].contract_id == c))
            .collect();
        if let Some(pref) = prefer_contract {
            if candidates.iter().any(|&i| self.functions[i].contract_id == pref) {
                candidates.retain(|&i| self.functions[i].contract_id == pref);
            }
        }
        let by_arity: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| self.functions[i].arity == arity)
            .collect();
        match (by_arity.as_slice(), candidates.as_slice()) {
            ([one], _) => Some(*one),
            ([], [one]) => Some(*one),
            _ => None,
        }
    }

    /// Contract named by the receiver of a member call, if any: `this`, a
    /// contract name, a conversion `C(addr)`, or a variable of contract type.
    fn receiver_contract(&self, receiver: usize, caller: &FunctionAst, var_types: &HashMap<String, String>) -> Option<usize> {
        let node = self.ast.node(receiver);
        match node.kind {
            NodeKind::Identifier => {
                let name = node.text.as_deref()?;
                if name == "this" {
                    return Some(caller.contract_id);
                }
                if let Some(&c) = self.contracts.get(name) {
                    return Some(c);
                }
                var_types.get(name).and_then(|ty| self.contracts.get(ty.as_str()).copied())
            }
            NodeKind::FunctionCall => {
                let callee = self.ast.node(node.children[0]);
                if callee.kind == NodeKind::Identifier && node.children.len() == 2 {
                    callee.text.as_deref().and_then(|n| self.contracts.get(n).copied())
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Declared user-defined types visible in a function: state variables of its
/// contract, parameters and locals.
fn declared_types(ast: &NormalizedAst, function: &FunctionAst) -> HashMap<String, String> {
    let mut types = HashMap::new();
    let mut collect = |decl: usize| {
        let node = ast.node(decl);
        if node.kind != NodeKind::VariableDeclaration {
            return;
        }
        let (Some(name), Some(&ty)) = (node.text.clone(), node.children.first()) else {
            return;
        };
        let ty = ast.node(ty);
        if ty.kind == NodeKind::UserDefinedTypeName {
            if let Some(t) = &ty.text {
                types.insert(name, t.clone());
            }
        }
    };
    for member in &ast.node(function.contract_id).children {
        collect(*member);
    }
    for id in ast.preorder(function.root) {
        collect(id);
    }
    types
}

/// Call edges among the functions of one file, in caller order then call
/// site order, without duplicates.
pub fn extract_call_edges(ast: &NormalizedAst) -> Vec<CallEdge> {
    let functions = list_functions(ast);
    let contracts: HashMap<&str, usize> = ast.contracts().into_iter().map(|(id, name)| (name, id)).collect();
    let resolver = Resolver {
        ast,
        functions: &functions,
        contracts,
    };
    let mut edges = Vec::new();
    for (caller_idx, caller) in functions.iter().enumerate() {
        let var_types = declared_types(ast, caller);
        for id in ast.preorder(caller.root) {
            let node = ast.node(id);
            if node.kind != NodeKind::FunctionCall {
                continue;
            }
            let arity = node.children.len() - 1;
            let mut callee = ast.node(node.children[0]);
            // `f.value(v)(..)` and `f.gas(g)(..)` call `f`
            while callee.kind == NodeKind::FunctionCall && callee.children.len() == 2 {
                let option = ast.node(callee.children[0]);
                if option.kind != NodeKind::MemberAccess || !matches!(option.text.as_deref(), Some("value" | "gas")) {
                    break;
                }
                callee = ast.node(option.children[0]);
            }
            let target = match callee.kind {
                NodeKind::Identifier => callee
                    .text
                    .as_deref()
                    .and_then(|name| resolver.resolve(name, arity, None, Some(caller.contract_id))),
                NodeKind::MemberAccess => {
                    let contract = resolver.receiver_contract(callee.children[0], caller, &var_types);
                    match (contract, callee.text.as_deref()) {
                        (Some(c), Some(name)) => resolver.resolve(name, arity, Some(c), None),
                        _ => None,
                    }
                }
                _ => None,
            };
            if let Some(callee) = target {
                let edge = CallEdge {
                    caller: caller_idx,
                    callee,
                };
                if !edges.contains(&edge) {
                    edges.push(edge);
                }
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, SourceFile};

    fn calls(src: &str) -> Vec<(String, String)> {
        let ast = parse_source(&SourceFile::new("t.sol", src)).unwrap();
        let fns = list_functions(&ast);
        extract_call_edges(&ast)
            .into_iter()
            .map(|e| (fns[e.caller].name.clone(), fns[e.callee].name.clone()))
            .collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn recursion_and_external_calls() {
        assert_eq!(calls("contract C { function f() { f(); } }"), vec![pair("f", "f")]);
        assert!(calls("contract C { function f() { erc20.transferFrom(a, b, 1); } }").is_empty());
        assert!(calls("contract C { function f() { g(); } }").is_empty());
        assert_eq!(
            calls("contract C { function d() payable {} function f() { this.d.value(1)(); } }"),
            vec![pair("f", "d")]
        );
    }

    #[test]
    fn arity_disambiguates_overloads() {
        let src = "contract C {
            function g(uint a) {} function g(uint a, uint b) {}
            function f() { g(1, 2); g(3); h(1, 2, 3); }
            function h(uint a) {}
        }";
        let ast = parse_source(&SourceFile::new("t.sol", src)).unwrap();
        let edges = extract_call_edges(&ast);
        assert_eq!(
            edges,
            vec![CallEdge { caller: 2, callee: 1 }, CallEdge { caller: 2, callee: 0 }, CallEdge { caller: 2, callee: 3 }]
        );
    }

    #[test]
    fn contract_typed_member_calls() {
        let src = "contract Victim { function withdraw() {} }
            contract Attacker {
              Victim v;
              function attack() { v.withdraw(); }
              function other(address a) { Victim(a).withdraw(); this.attack(); }
              function raw(address a) { a.withdraw(); }
            }";
        assert_eq!(
            calls(src),
            vec![pair("attack", "withdraw"), pair("other", "withdraw"), pair("other", "attack")]
        );
    }
}
