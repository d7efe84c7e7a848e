//! The `.vdse` scenario language.
//!
//! ```text
//! scenario "uber"
//! entity driver: P
//! entity car: V {static=["VIN"]}
//! package DP1_1 "driving data" items ["speed", "habits"]
//! relation r1: occupy driver -> car {role="driver"}
//! flow e1_1: E1 driver -> car package DP1_1
//! flow e3_1: E3 app <-> car package DP3_1
//! ```
//!
//! Statements end at a newline and `#` starts a comment. A `<->` flow
//! expands to the directed pair `<id>.fwd` / `<id>.rev`. Packages must be
//! declared before the flows and packages that reference them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::error::GraphError;
use crate::graph::{
    AttrValue, Attributes, DataPackage, FlowInstance, InstanceGraph, FORWARD_SUFFIX, REVERSE_SUFFIX,
};
use crate::schema::{EntityType, FlowEdgeId, RelationKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    /// Multi-line rendering with the source line and a caret.
    pub fn render(&self, file: &str) -> String {
        let caret = format!("{}^", " ".repeat(self.column.saturating_sub(1)));
        format!(
            "{file}:{}:{}: error: {}\n  {}\n  {}",
            self.line, self.column, self.message, self.snippet, caret
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Arrow,
    BiArrow,
    Colon,
    Comma,
    Dot,
    Eq,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(_) => f.write_str("string"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::BiArrow => f.write_str("`<->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexed<'s> {
    tokens: Vec<(Tok, Pos)>,
    lines: Vec<&'s str>,
}

fn error_at(lines: &[&str], pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
        snippet: lines.get(pos.line - 1).copied().unwrap_or("").to_string(),
    }
}

fn lex(source: &str) -> Result<Lexed<'_>, ParseError> {
    let lines: Vec<&str> = source
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let mut tokens = Vec::new();

    for (li, line) in lines.iter().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let at = |i: usize| Pos {
            line: li + 1,
            column: i + 1,
        };
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let start = at(i);
            match c {
                ' ' | '\t' => i += 1,
                '#' => break,
                ':' | ',' | '.' | '=' | '{' | '}' | '[' | ']' => {
                    let t = match c {
                        ':' => Tok::Colon,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        '=' => Tok::Eq,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '[' => Tok::LBracket,
                        _ => Tok::RBracket,
                    };
                    tokens.push((t, start));
                    i += 1;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    tokens.push((Tok::Arrow, start));
                    i += 2;
                }
                '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                    tokens.push((Tok::BiArrow, start));
                    i += 3;
                }
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => {
                                return Err(error_at(&lines, start, "unterminated string"));
                            }
                            Some('"') => {
                                i += 1;
                                break;
                            }
                            Some('\\') => {
                                let escaped = match chars.get(i + 1) {
                                    Some('"') => '"',
                                    Some('\\') => '\\',
                                    Some('n') => '\n',
                                    Some('t') => '\t',
                                    Some(other) => {
                                        return Err(error_at(
                                            &lines,
                                            at(i),
                                            format!("unknown escape `\\{other}`"),
                                        ));
                                    }
                                    None => {
                                        return Err(error_at(&lines, start, "unterminated string"));
                                    }
                                };
                                s.push(escaped);
                                i += 2;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    tokens.push((Tok::Str(s), start));
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let begin = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    tokens.push((Tok::Ident(chars[begin..i].iter().collect()), start));
                }
                other => {
                    return Err(error_at(
                        &lines,
                        start,
                        format!("unexpected character `{other}`"),
                    ));
                }
            }
        }
        if li + 1 < lines.len() {
            tokens.push((Tok::Newline, at(chars.len())));
        }
    }
    let last = lines.len();
    let eof_col = lines.last().map(|l| l.chars().count()).unwrap_or(0) + 1;
    tokens.push((
        Tok::Eof,
        Pos {
            line: last,
            column: eof_col,
        },
    ));
    Ok(Lexed { tokens, lines })
}

struct Parser<'s> {
    tokens: Vec<(Tok, Pos)>,
    lines: Vec<&'s str>,
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> ParseError {
        error_at(&self.lines, pos, message)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error(
            self.pos(),
            format!("expected {expected}, found {}", self.peek()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek() {
            Tok::Ident(s) if s.starts_with(|c: char| c.is_ascii_alphabetic()) => {
                let s = s.clone();
                Ok((s, self.bump().1))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().1),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("string")),
        }
    }

    fn end_of_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    /// `[` STRING { `,` STRING } `]`; an empty list is accepted.
    fn string_list(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LBracket)?;
        let mut items = Vec::new();
        if *self.peek() == Tok::RBracket {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.string()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBracket => {
                    self.bump();
                    return Ok(items);
                }
                _ => return Err(self.unexpected("`,` or `]`")),
            }
        }
    }

    fn attrs(&mut self) -> PResult<Attributes> {
        let mut out = Attributes::new();
        if *self.peek() != Tok::LBrace {
            return Ok(out);
        }
        self.bump();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(out);
        }
        loop {
            let (key, key_pos) = self.ident("attribute name")?;
            self.expect(Tok::Eq)?;
            let value = match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    AttrValue::Text(s)
                }
                Tok::Ident(s) if s == "true" || s == "false" => {
                    self.bump();
                    AttrValue::Bool(s == "true")
                }
                Tok::LBracket => AttrValue::List(self.string_list()?),
                _ => return Err(self.unexpected("string, `true`, `false` or list")),
            };
            if out.insert(key.clone(), value).is_some() {
                return Err(self.error(key_pos, format!("duplicate attribute `{key}`")));
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrace => {
                    self.bump();
                    return Ok(out);
                }
                _ => return Err(self.unexpected("`,` or `}`")),
            }
        }
    }

    fn type_code(&mut self) -> PResult<EntityType> {
        let pos = self.pos();
        match self.peek() {
            Tok::Ident(s) => match EntityType::from_code(s) {
                Some(t) => {
                    self.bump();
                    Ok(t)
                }
                None => Err(self.error(pos, format!("unknown entity type code `{s}`"))),
            },
            _ => Err(self.unexpected("entity type code")),
        }
    }

    fn edge_code(&mut self) -> PResult<FlowEdgeId> {
        let pos = self.pos();
        match self.peek() {
            Tok::Ident(s) => match s.parse::<FlowEdgeId>() {
                Ok(e) => {
                    self.bump();
                    Ok(e)
                }
                Err(_) => Err(self.error(
                    pos,
                    format!("unknown flow edge type `{s}` (expected E1..E21)"),
                )),
            },
            _ => Err(self.unexpected("flow edge type")),
        }
    }

    /// IDENT with an optional `.fwd` / `.rev` suffix.
    fn flow_id(&mut self) -> PResult<(String, Pos)> {
        let (mut id, pos) = self.ident("flow id")?;
        if *self.peek() == Tok::Dot {
            self.bump();
            match self.peek() {
                Tok::Ident(s) if s == "fwd" || s == "rev" => {
                    id.push('.');
                    id.push_str(s);
                    self.bump();
                }
                _ => return Err(self.unexpected("`fwd` or `rev`")),
            }
        }
        Ok((id, pos))
    }
}

/// Maps a graph build error onto the most specific token of the statement.
fn build_error(p: &Parser<'_>, err: GraphError, stmt: Pos, refs: &[(&str, Pos)]) -> ParseError {
    let pos = match &err {
        GraphError::Dangling { id, .. } | GraphError::DuplicateId { id, .. } => refs
            .iter()
            .find(|(r, _)| r == id)
            .map(|&(_, p)| p)
            .unwrap_or(stmt),
        _ => stmt,
    };
    p.error(pos, err.to_string())
}

pub fn parse(source: &str) -> Result<InstanceGraph, ParseError> {
    let Lexed { tokens, lines } = lex(source)?;
    let mut p = Parser {
        tokens,
        lines,
        at: 0,
    };

    while *p.peek() == Tok::Newline {
        p.bump();
    }
    p.keyword("scenario")?;
    let name_pos = p.pos();
    let name = p.string()?;
    let mut g = InstanceGraph::new(name).map_err(|e| p.error(name_pos, e.to_string()))?;
    p.end_of_statement()?;

    loop {
        let stmt = p.pos();
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Newline => {
                p.bump();
            }
            Tok::Ident(kw) if kw == "entity" => {
                p.bump();
                let (id, id_pos) = p.ident("entity id")?;
                p.expect(Tok::Colon)?;
                let ty = p.type_code()?;
                let attrs = p.attrs()?;
                p.end_of_statement()?;
                g.add_entity(&id, ty, attrs)
                    .map_err(|e| build_error(&p, e, id_pos, &[(&id, id_pos)]))?;
            }
            Tok::Ident(kw) if kw == "package" => {
                p.bump();
                let (id, id_pos) = p.ident("package id")?;
                let mut pkg = DataPackage::new(id.clone(), "");
                if let Tok::Str(_) = p.peek() {
                    pkg.description = p.string()?;
                }
                if matches!(p.peek(), Tok::Ident(s) if s == "items") {
                    p.bump();
                    pkg.items = p.string_list()?;
                }
                let mut refs = vec![(id.clone(), id_pos)];
                if matches!(p.peek(), Tok::Ident(s) if s == "derives") {
                    p.bump();
                    loop {
                        let (parent, pos) = p.ident("package id")?;
                        pkg.derives_from.push(parent.clone());
                        refs.push((parent, pos));
                        if *p.peek() != Tok::Comma {
                            break;
                        }
                        p.bump();
                    }
                }
                p.end_of_statement()?;
                if g.package(&id).is_some() {
                    return Err(p.error(id_pos, format!("duplicate package id `{id}`")));
                }
                let refs: Vec<(&str, Pos)> = refs.iter().map(|(s, q)| (s.as_str(), *q)).collect();
                g.add_package(pkg)
                    .map_err(|e| build_error(&p, e, id_pos, &refs))?;
            }
            Tok::Ident(kw) if kw == "relation" => {
                p.bump();
                let (id, id_pos) = p.ident("relation id")?;
                p.expect(Tok::Colon)?;
                let rel_pos = p.pos();
                let (rel_name, _) = p.ident("relation name")?;
                let relation = RelationKind::from_name(&rel_name).ok_or_else(|| {
                    p.error(rel_pos, format!("unknown semantic relation `{rel_name}`"))
                })?;
                let (src, src_pos) = p.ident("entity id")?;
                p.expect(Tok::Arrow)?;
                let (dst, dst_pos) = p.ident("entity id")?;
                let attrs = p.attrs()?;
                p.end_of_statement()?;
                g.add_semantic_relation(&id, relation, &src, &dst, attrs)
                    .map_err(|e| {
                        build_error(
                            &p,
                            e,
                            id_pos,
                            &[(&id, id_pos), (&src, src_pos), (&dst, dst_pos)],
                        )
                    })?;
            }
            Tok::Ident(kw) if kw == "flow" => {
                p.bump();
                let (id, id_pos) = p.flow_id()?;
                p.expect(Tok::Colon)?;
                let edge = p.edge_code()?;
                let (src, src_pos) = p.ident("entity id")?;
                let bidirectional = match p.peek() {
                    Tok::Arrow => false,
                    Tok::BiArrow => true,
                    _ => return Err(p.unexpected("`->` or `<->`")),
                };
                let arrow_pos = p.bump().1;
                let (dst, dst_pos) = p.ident("entity id")?;
                p.keyword("package")?;
                let (pkg, pkg_pos) = p.ident("package id")?;
                p.end_of_statement()?;
                let fwd = format!("{id}{FORWARD_SUFFIX}");
                let rev = format!("{id}{REVERSE_SUFFIX}");
                let refs = [
                    (id.as_str(), id_pos),
                    (fwd.as_str(), id_pos),
                    (rev.as_str(), id_pos),
                    (src.as_str(), src_pos),
                    (dst.as_str(), dst_pos),
                    (pkg.as_str(), pkg_pos),
                ];
                let result = if bidirectional {
                    if id.contains('.') {
                        return Err(p.error(arrow_pos, "a `<->` flow id cannot carry a suffix"));
                    }
                    g.add_exchange(&id, edge, &src, &dst, &pkg)
                } else {
                    g.add_flow(&id, edge, &src, &dst, &pkg)
                };
                result.map_err(|e| build_error(&p, e, stmt, &refs))?;
            }
            _ => return Err(p.unexpected("`entity`, `package`, `relation` or `flow`")),
        }
    }
    Ok(g)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn list(items: &[String]) -> String {
    let inner: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", inner.join(", "))
}

fn attr_block(attrs: &Attributes) -> String {
    if attrs.is_empty() {
        return String::new();
    }
    let pairs: Vec<String> = attrs
        .iter()
        .map(|(k, v)| {
            let v = match v {
                AttrValue::Bool(b) => b.to_string(),
                AttrValue::Text(s) => quote(s),
                AttrValue::List(items) => list(items),
            };
            format!("{k}={v}")
        })
        .collect();
    format!(" {{{}}}", pairs.join(", "))
}

/// Packages in id order, except that a package always follows the
/// packages it derives from.
fn package_order(g: &InstanceGraph) -> Result<Vec<&DataPackage>, GraphError> {
    let by_id: BTreeMap<&str, &DataPackage> =
        g.packages().iter().map(|p| (p.id.as_str(), p)).collect();
    let mut pending: BTreeMap<&str, usize> = BTreeMap::new();
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for p in by_id.values() {
        let parents: HashSet<&str> = p.derives_from.iter().map(String::as_str).collect();
        pending.insert(&p.id, parents.len());
        for parent in parents {
            children.entry(parent).or_default().push(&p.id);
        }
    }
    let mut ready: std::collections::BTreeSet<&str> = pending
        .iter()
        .filter(|&(_, &n)| n == 0)
        .map(|(&id, _)| id)
        .collect();
    let mut out = Vec::with_capacity(by_id.len());
    while let Some(id) = ready.pop_first() {
        out.push(by_id[id]);
        for &child in children.get(id).map(Vec::as_slice).unwrap_or(&[]) {
            let n = pending.get_mut(child).expect("child is a package");
            *n -= 1;
            if *n == 0 {
                ready.insert(child);
            }
        }
    }
    if out.len() != by_id.len() {
        return Err(GraphError::Malformed(
            "package derivations form a cycle".into(),
        ));
    }
    Ok(out)
}

/// Canonical text form. Sections appear in the order entities, packages,
/// relations, flows, each sorted by id; a `.fwd`/`.rev` pair sharing its
/// package is written back as one `<->` flow.
pub fn serialize(g: &InstanceGraph) -> Result<String, GraphError> {
    g.check_well_formed()?;
    let mut out = format!("scenario {}\n", quote(g.name()));

    let mut entities: Vec<_> = g.entities().iter().collect();
    entities.sort_by(|a, b| a.id.cmp(&b.id));
    if !entities.is_empty() {
        out.push('\n');
    }
    for e in entities {
        out.push_str(&format!(
            "entity {}: {}{}\n",
            e.id,
            e.entity_type.code(),
            attr_block(&e.attributes)
        ));
    }

    let packages = package_order(g)?;
    if !packages.is_empty() {
        out.push('\n');
    }
    for p in packages {
        let mut line = format!("package {}", p.id);
        if !p.description.is_empty() {
            line.push(' ');
            line.push_str(&quote(&p.description));
        }
        if !p.items.is_empty() {
            line.push_str(" items ");
            line.push_str(&list(&p.items));
        }
        if !p.derives_from.is_empty() {
            line.push_str(" derives ");
            line.push_str(&p.derives_from.join(", "));
        }
        out.push_str(&line);
        out.push('\n');
    }

    let mut relations: Vec<_> = g.relations().iter().collect();
    relations.sort_by(|a, b| a.id.cmp(&b.id));
    if !relations.is_empty() {
        out.push('\n');
    }
    for r in relations {
        out.push_str(&format!(
            "relation {}: {} {} -> {}{}\n",
            r.id,
            r.relation.name(),
            r.source,
            r.target,
            attr_block(&r.attributes)
        ));
    }

    let mut lines: Vec<(String, String)> = Vec::new();
    let flow_line = |id: &str, f: &FlowInstance, arrow: &str| {
        format!(
            "flow {id}: {} {} {arrow} {} package {}\n",
            f.edge_type, f.source, f.target, f.package
        )
    };
    for f in g.flows() {
        if let Some(base) = f.id.strip_suffix(FORWARD_SUFFIX) {
            if let Some(rev) = g.flow(&format!("{base}{REVERSE_SUFFIX}")) {
                if is_mirror(f, rev) {
                    lines.push((base.to_string(), flow_line(base, f, "<->")));
                    continue;
                }
            }
        }
        if let Some(base) = f.id.strip_suffix(REVERSE_SUFFIX) {
            if let Some(fwd) = g.flow(&format!("{base}{FORWARD_SUFFIX}")) {
                if is_mirror(fwd, f) {
                    continue;
                }
            }
        }
        lines.push((f.id.clone(), flow_line(&f.id, f, "->")));
    }
    lines.sort();
    if !lines.is_empty() {
        out.push('\n');
    }
    for (_, line) in lines {
        out.push_str(&line);
    }
    Ok(out)
}

fn is_mirror(fwd: &FlowInstance, rev: &FlowInstance) -> bool {
    fwd.edge_type == rev.edge_type
        && fwd.package == rev.package
        && fwd.source == rev.target
        && fwd.target == rev.source
}
