//! Small helpers shared by the DOT emitters.

/// Quotes `s` as a DOT string literal.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn digraph(name: &str, nodes: &[String], edges: &[String]) -> String {
    let mut out = format!("digraph {} {{\n", quote(name));
    for stmt in nodes.iter().chain(edges) {
        out.push_str("  ");
        out.push_str(stmt);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}
