//! Graphviz rendering.

use std::fmt::Write;

use super::edge::EdgeCategory;
use super::mrfg::Mrfg;
use super::mrng::Mrng;

fn color(c: EdgeCategory) -> &'static str {
    match c {
        EdgeCategory::DataType => "darkgreen",
        EdgeCategory::ControlInfo => "blue",
        EdgeCategory::Fields => "black",
        EdgeCategory::DataFlow => "orange",
        EdgeCategory::Fallback => "red",
        EdgeCategory::SelfLoop => "gray",
    }
}

fn style(c: EdgeCategory) -> &'static str {
    match c {
        EdgeCategory::DataFlow => "dashed",
        EdgeCategory::SelfLoop => "dotted",
        EdgeCategory::Fallback => "bold",
        _ => "solid",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn write_body(out: &mut String, g: &Mrfg, prefix: &str, indent: &str) {
    for n in &g.nodes {
        writeln!(out, "{indent}{prefix}n{} [label={}];", n.id, quote(&n.label)).unwrap();
    }
    for e in &g.edges {
        let label = match e.seq {
            Some(seq) => format!("{} #{seq}", e.kind.subtype()),
            None => e.kind.subtype().to_string(),
        };
        writeln!(
            out,
            "{indent}{prefix}n{} -> {prefix}n{} [label={}, color={}, style={}];",
            e.src,
            e.dst,
            quote(&label),
            color(e.kind.category),
            style(e.kind.category)
        )
        .unwrap();
    }
}

pub fn mrfg_to_dot(g: &Mrfg) -> String {
    let mut out = format!("digraph {} {{\n", quote(&g.name));
    write_body(&mut out, g, "", "  ");
    out.push_str("}\n");
    out
}

/// One cluster per function; call edges join the functions' entry nodes.
pub fn mrng_to_dot(g: &Mrng) -> String {
    let mut out = format!("digraph {} {{\n  compound=true;\n", quote(&g.contract));
    for (i, f) in g.functions.iter().enumerate() {
        writeln!(out, "  subgraph cluster_f{i} {{").unwrap();
        writeln!(out, "    label={};", quote(&format!("{}/{}", f.name, f.arity))).unwrap();
        write_body(&mut out, f, &format!("f{i}_"), "    ");
        out.push_str("  }\n");
    }
    for &(a, b) in &g.calls {
        writeln!(
            out,
            "  f{a}_n0 -> f{b}_n0 [label=\"call\", color=purple, penwidth=2, ltail=cluster_f{a}, lhead=cluster_f{b}];"
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
