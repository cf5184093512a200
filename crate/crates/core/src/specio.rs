//! Textual specification language and output emitters.
//!
//! A spec file is a sequence of `graph`, `cond`, `rule` and `system` blocks.
//! Conditions are written in cospan form; `pattern(P)` is sugar for the
//! existential lift of the embedding of the current root into `P`. Leg maps
//! in cospan literals pair node names and default to name identity.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cegar::{RunConfig, SpuriousMode};
use crate::condition::{conjoin, disjoin, negate, Child, Condition, Polarity};
use crate::cospan::Cospan;
use crate::graph::{Graph, Morphism};
use crate::rules::Rule;

#[derive(Clone, Debug)]
pub struct GraphDef {
    pub graph: Graph,
    pub node_names: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct ConfigOverrides {
    pub budget_ms: Option<u64>,
    pub unfold_depth: Option<u32>,
    pub model_nodes: Option<usize>,
    pub model_edges: Option<usize>,
    pub max_refinements: Option<usize>,
    pub spurious_mode: Option<SpuriousMode>,
    pub split_conjuncts: Option<bool>,
    pub witness_nodes: Option<usize>,
    pub witness_edges: Option<usize>,
    pub max_states: Option<usize>,
    pub skip_undetermined: Option<bool>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut base: RunConfig) -> RunConfig {
        if let Some(v) = self.budget_ms {
            base.budget.wall_ms = v;
        }
        if let Some(v) = self.unfold_depth {
            base.budget.unfold_depth = v;
        }
        if let Some(v) = self.model_nodes {
            base.budget.model_nodes = v;
        }
        if let Some(v) = self.model_edges {
            base.budget.model_edges = v;
        }
        if let Some(v) = self.max_refinements {
            base.max_refinements = v;
        }
        if let Some(v) = self.spurious_mode {
            base.spurious_mode = v;
        }
        if let Some(v) = self.split_conjuncts {
            base.split_conjuncts = v;
        }
        if let Some(v) = self.witness_nodes {
            base.witness_nodes = v;
        }
        if let Some(v) = self.witness_edges {
            base.witness_edges = v;
        }
        if let Some(v) = self.max_states {
            base.explore_max_states = v;
        }
        if let Some(v) = self.skip_undetermined {
            base.skip_undetermined = v;
        }
        base
    }
}

#[derive(Clone, Debug, Default)]
pub struct SystemBlock {
    pub init: String,
    pub bad: String,
    pub rules: Vec<String>,
    pub predicates: Vec<String>,
    pub config: ConfigOverrides,
}

#[derive(Clone, Debug, Default)]
pub struct SystemSpec {
    pub graphs: Vec<(String, GraphDef)>,
    pub conds: Vec<(String, Condition)>,
    pub rules: Vec<Rule>,
    pub system: Option<SystemBlock>,
}

impl SystemSpec {
    /// named graph definitions; the predefined "empty" graph is handled at
    /// the lookup sites
    pub fn graph(&self, name: &str) -> Option<&GraphDef> {
        self.graphs.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    pub fn cond(&self, name: &str) -> Option<&Condition> {
        self.conds.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {} (at '{}')", self.line, self.column, self.message, self.token)
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tok {
    Ident,
    Number,
    Arrow,     // ->
    BackArrow, // <-
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Eq,
    Dot,
    Bang,
    Amp,
    Pipe,
    Eof,
    Bad,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    text: String,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    let mut push = |kind, text: String, line, col| out.push(Token { kind, text, line, column: col });
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '/' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                        col += 1;
                    }
                } else {
                    push(Tok::Bad, "/".into(), l, co);
                }
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push(Tok::Arrow, "->".into(), l, co);
                } else {
                    push(Tok::Bad, "-".into(), l, co);
                }
            }
            '<' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'-') {
                    chars.next();
                    col += 1;
                    push(Tok::BackArrow, "<-".into(), l, co);
                } else {
                    push(Tok::Bad, "<".into(), l, co);
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push(Tok::Ident, s, l, co);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push(Tok::Number, s, l, co);
            }
            _ => {
                chars.next();
                col += 1;
                let kind = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '=' => Tok::Eq,
                    '.' => Tok::Dot,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    _ => Tok::Bad,
                };
                push(kind, c.to_string(), l, co);
            }
        }
    }
    out.push(Token { kind: Tok::Eof, text: "end of input".into(), line, column: col });
    out
}

// --------------------------------------------------------------- parser

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    spec: SystemSpec,
}

pub fn parse_spec(text: &str) -> Result<SystemSpec, Vec<ParseError>> {
    let mut p = Parser {
        tokens: lex(text),
        pos: 0,
        errors: Vec::new(),
        spec: SystemSpec::default(),
    };
    p.parse();
    if p.errors.is_empty() {
        Ok(p.spec)
    } else {
        Err(p.errors)
    }
}

/// Parse a single cospan literal, resolving graph names against `spec`.
pub fn parse_cospan(spec: &SystemSpec, text: &str) -> Result<Cospan, Vec<ParseError>> {
    let mut p = Parser { tokens: lex(text), pos: 0, errors: Vec::new(), spec: spec.clone() };
    let c = p.cospan_lit();
    if p.peek().kind != Tok::Eof {
        p.error_here("expected end of input after the cospan");
    }
    match (c, p.errors.is_empty()) {
        (Some(c), true) => Ok(c),
        _ => Err(p.errors),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&mut self, tok: &Token, message: impl Into<String>) {
        self.errors.push(ParseError {
            line: tok.line,
            column: tok.column,
            message: message.into(),
            token: tok.text.clone(),
        });
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let tok = self.peek().clone();
        self.error_at(&tok, message);
    }

    fn expect(&mut self, kind: Tok, what: &str) -> Option<Token> {
        if self.peek().kind == kind {
            Some(self.advance())
        } else {
            self.error_here(format!("expected {}", what));
            None
        }
    }

    fn ident(&mut self, what: &str) -> Option<String> {
        self.expect(Tok::Ident, what).map(|t| t.text)
    }

    /// skip tokens until after the closing brace of the current block
    fn sync_block(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek().kind {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    self.advance();
                    if depth <= 1 {
                        return;
                    }
                    depth -= 1;
                    continue;
                }
                _ => {}
            }
            self.advance();
        }
    }

    /// skip to just after the next `;` (or stop before `}` / end of input)
    fn sync_stmt(&mut self) {
        loop {
            match self.peek().kind {
                Tok::Eof | Tok::RBrace => return,
                Tok::Semi => {
                    self.advance();
                    return;
                }
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn parse(&mut self) {
        loop {
            let tok = self.peek().clone();
            match (tok.kind, tok.text.as_str()) {
                (Tok::Eof, _) => break,
                (Tok::Ident, "graph") => self.graph_def(),
                (Tok::Ident, "cond") => self.cond_def(),
                (Tok::Ident, "rule") => self.rule_def(),
                (Tok::Ident, "system") => self.system_def(),
                _ => {
                    self.error_here("expected 'graph', 'cond', 'rule' or 'system'");
                    self.advance();
                }
            }
        }
        self.check_system_refs();
    }

    fn graph_def(&mut self) {
        self.advance(); // graph
        let Some(name) = self.ident("a graph name") else {
            self.sync_block();
            return;
        };
        if name == "empty" || self.spec.graph(&name).is_some() {
            self.error_here(format!("graph '{}' is already defined", name));
        }
        if self.expect(Tok::LBrace, "'{'").is_none() {
            self.sync_block();
            return;
        }
        let mut def = GraphDef { graph: Graph::empty(), node_names: Vec::new() };
        loop {
            let tok = self.peek().clone();
            match (tok.kind, tok.text.as_str()) {
                (Tok::RBrace, _) => {
                    self.advance();
                    break;
                }
                (Tok::Eof, _) => {
                    self.error_here("expected '}'");
                    break;
                }
                (Tok::Ident, "nodes") => {
                    self.advance();
                    loop {
                        let Some(n) = self.ident("a node name") else {
                            self.sync_stmt();
                            break;
                        };
                        if def.node_names.contains(&n) {
                            self.error_at(&tok, format!("duplicate node name '{}'", n));
                        }
                        let mut label = 0;
                        if self.peek().kind == Tok::Colon {
                            self.advance();
                            if let Some(num) = self.expect(Tok::Number, "a numeric label") {
                                label = num.text.parse().unwrap_or(0);
                            }
                        }
                        def.graph.add_node(label);
                        def.node_names.push(n);
                        match self.peek().kind {
                            Tok::Comma => {
                                self.advance();
                            }
                            _ => {
                                self.expect(Tok::Semi, "';'");
                                break;
                            }
                        }
                    }
                }
                (Tok::Ident, "edge") => {
                    self.advance();
                    // optional edge name, purely cosmetic
                    if self.peek().kind == Tok::Ident {
                        self.advance();
                    }
                    if self.expect(Tok::Colon, "':'").is_none() {
                        self.sync_stmt();
                        continue;
                    }
                    let src = self.ident("a source node name");
                    if self.expect(Tok::Arrow, "'->'").is_none() {
                        self.sync_stmt();
                        continue;
                    }
                    let tgt = self.ident("a target node name");
                    self.expect(Tok::Semi, "';'");
                    if let (Some(src), Some(tgt)) = (src, tgt) {
                        let si = def.node_names.iter().position(|n| *n == src);
                        let ti = def.node_names.iter().position(|n| *n == tgt);
                        match (si, ti) {
                            (Some(s), Some(t)) => {
                                def.graph.add_edge(s, t);
                            }
                            _ => self.error_at(&tok, "edge endpoint is not a declared node"),
                        }
                    }
                }
                _ => {
                    self.error_here("expected 'nodes', 'edge' or '}'");
                    self.sync_stmt();
                }
            }
        }
        self.spec.graphs.push((name, def));
    }

    fn cond_def(&mut self) {
        self.advance(); // cond
        let Some(name) = self.ident("a condition name") else {
            self.sync_stmt();
            return;
        };
        if self.spec.cond(&name).is_some() {
            self.error_here(format!("condition '{}' is already defined", name));
        }
        if self.expect(Tok::Eq, "'='").is_none() {
            self.sync_stmt();
            return;
        }
        let empty = GraphDef { graph: Graph::empty(), node_names: Vec::new() };
        if let Some(cond) = self.cond_expr(&empty) {
            self.spec.conds.push((name, cond));
        }
        self.expect(Tok::Semi, "';'");
    }

    fn rule_def(&mut self) {
        self.advance(); // rule
        let Some(name) = self.ident("a rule name") else {
            self.sync_block();
            return;
        };
        if self.spec.rules.iter().any(|r| r.name == name) {
            self.error_here(format!("rule '{}' is already defined", name));
        }
        if self.expect(Tok::LBrace, "'{'").is_none() {
            self.sync_block();
            return;
        }
        let mut left: Option<Cospan> = None;
        let mut right: Option<Cospan> = None;
        let mut app_cond: Option<Condition> = None;
        loop {
            let tok = self.peek().clone();
            match (tok.kind, tok.text.as_str()) {
                (Tok::RBrace, _) => {
                    self.advance();
                    break;
                }
                (Tok::Eof, _) => {
                    self.error_here("expected '}'");
                    break;
                }
                (Tok::Ident, key @ ("left" | "right")) => {
                    let key = key.to_string();
                    self.advance();
                    if self.expect(Tok::Eq, "'='").is_none() {
                        self.sync_stmt();
                        continue;
                    }
                    let c = self.cospan_lit();
                    self.expect(Tok::Semi, "';'");
                    if let Some(c) = c {
                        if key == "left" {
                            left = Some(c);
                        } else {
                            right = Some(c);
                        }
                    }
                }
                (Tok::Ident, "cond") => {
                    self.advance();
                    if self.expect(Tok::Eq, "'='").is_none() {
                        self.sync_stmt();
                        continue;
                    }
                    let root = match &left {
                        Some(l) => {
                            let g = l.codomain().clone();
                            self.def_for_graph(&g, &tok)
                        }
                        None => {
                            self.error_at(&tok, "'cond' must come after 'left'");
                            None
                        }
                    };
                    let parsed = root.and_then(|root| self.cond_expr(&root));
                    self.expect(Tok::Semi, "';'");
                    app_cond = parsed;
                }
                _ => {
                    self.error_here("expected 'left', 'right', 'cond' or '}'");
                    self.sync_stmt();
                }
            }
        }
        let (Some(l), Some(r)) = (left, right) else {
            self.error_here(format!("rule '{}' needs both 'left' and 'right'", name));
            return;
        };
        let cond = app_cond.unwrap_or_else(|| Condition::tt(l.codomain().clone()));
        match Rule::new(name.clone(), l, r, cond) {
            Ok(rule) => self.spec.rules.push(rule),
            Err(e) => self.error_here(format!("invalid rule '{}': {}", name, e)),
        }
    }

    fn system_def(&mut self) {
        self.advance(); // system
        if self.spec.system.is_some() {
            self.error_here("only one system block is allowed");
        }
        if self.expect(Tok::LBrace, "'{'").is_none() {
            self.sync_block();
            return;
        }
        let mut block = SystemBlock::default();
        loop {
            let tok = self.peek().clone();
            match (tok.kind, tok.text.as_str()) {
                (Tok::RBrace, _) => {
                    self.advance();
                    break;
                }
                (Tok::Eof, _) => {
                    self.error_here("expected '}'");
                    break;
                }
                (Tok::Ident, key) => {
                    let key = key.to_string();
                    self.advance();
                    if self.expect(Tok::Eq, "'='").is_none() {
                        self.sync_stmt();
                        continue;
                    }
                    match key.as_str() {
                        "init" | "bad" => {
                            if let Some(n) = self.ident("a condition name") {
                                if key == "init" {
                                    block.init = n;
                                } else {
                                    block.bad = n;
                                }
                            }
                        }
                        "rules" | "predicates" => {
                            let mut names = Vec::new();
                            loop {
                                match self.ident("a name") {
                                    Some(n) => names.push(n),
                                    None => break,
                                }
                                if self.peek().kind == Tok::Comma {
                                    self.advance();
                                } else {
                                    break;
                                }
                            }
                            if key == "rules" {
                                block.rules = names;
                            } else {
                                block.predicates = names;
                            }
                        }
                        "spuriousMode" => match self.ident("'wp' or 'sp'").as_deref() {
                            Some("wp") => block.config.spurious_mode = Some(SpuriousMode::Wp),
                            Some("sp") => block.config.spurious_mode = Some(SpuriousMode::Sp),
                            _ => self.error_at(&tok, "spuriousMode must be 'wp' or 'sp'"),
                        },
                        "splitConjuncts" | "skipUndetermined" => {
                            let v = match self.ident("'true' or 'false'").as_deref() {
                                Some("true") => Some(true),
                                Some("false") => Some(false),
                                _ => {
                                    self.error_at(&tok, format!("{} must be 'true' or 'false'", key));
                                    None
                                }
                            };
                            if key == "splitConjuncts" {
                                block.config.split_conjuncts = v;
                            } else {
                                block.config.skip_undetermined = v;
                            }
                        }
                        _ => {
                            let num: Option<u64> = self
                                .expect(Tok::Number, "a number")
                                .and_then(|t| t.text.parse().ok());
                            if let Some(v) = num {
                                match key.as_str() {
                                    "budgetMs" => block.config.budget_ms = Some(v),
                                    "unfoldDepth" => block.config.unfold_depth = Some(v as u32),
                                    "modelNodes" => block.config.model_nodes = Some(v as usize),
                                    "modelEdges" => block.config.model_edges = Some(v as usize),
                                    "maxRefinements" => {
                                        block.config.max_refinements = Some(v as usize)
                                    }
                                    "witnessNodes" => block.config.witness_nodes = Some(v as usize),
                                    "witnessEdges" => block.config.witness_edges = Some(v as usize),
                                    "maxStates" => block.config.max_states = Some(v as usize),
                                    _ => self.error_at(&tok, format!("unknown system key '{}'", key)),
                                }
                            }
                        }
                    }
                    self.expect(Tok::Semi, "';'");
                }
                _ => {
                    self.error_here("expected a system key or '}'");
                    self.sync_stmt();
                }
            }
        }
        self.spec.system = Some(block);
    }

    fn check_system_refs(&mut self) {
        let Some(block) = self.spec.system.clone() else {
            return;
        };
        let eof = self.tokens.last().unwrap().clone();
        for (what, name) in [("init", &block.init), ("bad", &block.bad)] {
            if name.is_empty() {
                self.error_at(&eof, format!("system block is missing '{}'", what));
            } else if self.spec.cond(name).is_none() {
                self.error_at(&eof, format!("{} condition '{}' is not defined", what, name));
            }
        }
        for name in block.rules.iter() {
            if !self.spec.rules.iter().any(|r| r.name == *name) {
                self.error_at(&eof, format!("rule '{}' is not defined", name));
            }
        }
        for name in block.predicates.iter() {
            if self.spec.cond(name).is_none() {
                self.error_at(&eof, format!("predicate condition '{}' is not defined", name));
            }
        }
    }

    fn lookup_graph(&mut self, name: &str, tok: &Token) -> Option<GraphDef> {
        if name == "empty" {
            return Some(GraphDef { graph: Graph::empty(), node_names: Vec::new() });
        }
        match self.spec.graph(name) {
            Some(d) => Some(d.clone()),
            None => {
                self.error_at(tok, format!("graph '{}' is not defined", name));
                None
            }
        }
    }

    /// find a graph definition structurally equal to `g` (used to recover
    /// node names for an interface graph produced by an earlier cospan)
    fn def_for_graph(&mut self, g: &Graph, tok: &Token) -> Option<GraphDef> {
        if g.is_empty() {
            return Some(GraphDef { graph: Graph::empty(), node_names: Vec::new() });
        }
        match self.spec.graphs.iter().find(|(_, d)| d.graph == *g) {
            Some((_, d)) => Some(d.clone()),
            None => {
                self.error_at(tok, "no graph definition matches the rule interface");
                None
            }
        }
    }

    /// `NAME -> NAME <- NAME [legMaps]?`
    fn cospan_lit(&mut self) -> Option<Cospan> {
        let dom_tok = self.peek().clone();
        let dom = self.ident("a graph name")?;
        self.expect(Tok::Arrow, "'->'")?;
        let mid_tok = self.peek().clone();
        let mid = self.ident("a graph name")?;
        self.expect(Tok::BackArrow, "'<-'")?;
        let cod_tok = self.peek().clone();
        let cod = self.ident("a graph name")?;
        let dom = self.lookup_graph(&dom, &dom_tok)?;
        let mid = self.lookup_graph(&mid, &mid_tok)?;
        let cod = self.lookup_graph(&cod, &cod_tok)?;
        let mut left_pairs = Vec::new();
        let mut right_pairs = Vec::new();
        if self.peek().kind == Tok::LBracket {
            self.advance();
            loop {
                match self.peek().kind {
                    Tok::RBracket => {
                        self.advance();
                        break;
                    }
                    Tok::Eof => {
                        self.error_here("expected ']'");
                        return None;
                    }
                    _ => {}
                }
                let side = self.ident("'left' or 'right'")?;
                let pairs = match side.as_str() {
                    "left" => &mut left_pairs,
                    "right" => &mut right_pairs,
                    _ => {
                        self.error_here("leg map side must be 'left' or 'right'");
                        return None;
                    }
                };
                self.expect(Tok::Colon, "':'")?;
                loop {
                    let a = self.ident("a node name")?;
                    self.expect(Tok::Arrow, "'->'")?;
                    let b = self.ident("a node name")?;
                    pairs.push((a, b));
                    if self.peek().kind == Tok::Comma {
                        self.advance();
                    } else {
                        break;
                    }
                }
                if self.peek().kind == Tok::Semi {
                    self.advance();
                }
            }
        }
        let left = self.leg_morphism(&dom, &mid, &left_pairs, &dom_tok)?;
        let right = self.leg_morphism(&cod, &mid, &right_pairs, &cod_tok)?;
        Some(Cospan::new(left, right))
    }

    /// build the mono `dom -> mid` from name pairs, defaulting to name
    /// identity; edge maps are inferred greedily and injectively
    fn leg_morphism(
        &mut self,
        dom: &GraphDef,
        mid: &GraphDef,
        pairs: &[(String, String)],
        tok: &Token,
    ) -> Option<Morphism> {
        let map: BTreeMap<&str, &str> =
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let mut node_map = Vec::with_capacity(dom.graph.node_count());
        for (i, name) in dom.node_names.iter().enumerate() {
            let target_name = map.get(name.as_str()).copied().unwrap_or(name);
            let Some(j) = mid.node_names.iter().position(|n| n == target_name) else {
                self.error_at(tok, format!("node '{}' has no image in the middle graph", target_name));
                return None;
            };
            if dom.graph.label(i) != mid.graph.label(j) {
                self.error_at(tok, format!("node '{}' maps across different labels", name));
                return None;
            }
            if node_map.contains(&j) {
                self.error_at(tok, format!("leg map is not injective at '{}'", target_name));
                return None;
            }
            node_map.push(j);
        }
        let mut edge_map = Vec::with_capacity(dom.graph.edge_count());
        for &(s, t) in dom.graph.edges() {
            let want = (node_map[s], node_map[t]);
            let Some(e) = mid
                .graph
                .edges()
                .iter()
                .enumerate()
                .position(|(e, &st)| st == want && !edge_map.contains(&e))
            else {
                self.error_at(tok, "an edge has no injective image in the middle graph");
                return None;
            };
            edge_map.push(e);
        }
        Some(Morphism::new(dom.graph.clone(), mid.graph.clone(), node_map, edge_map))
    }

    fn cond_expr(&mut self, root: &GraphDef) -> Option<Condition> {
        let mut acc = self.and_expr(root)?;
        while self.peek().kind == Tok::Pipe {
            self.advance();
            let rhs = self.and_expr(root)?;
            match disjoin(&acc, &rhs) {
                Ok(c) => acc = c,
                Err(e) => {
                    self.error_here(format!("cannot disjoin: {}", e));
                    return None;
                }
            }
        }
        Some(acc)
    }

    fn and_expr(&mut self, root: &GraphDef) -> Option<Condition> {
        let mut acc = self.unary_expr(root)?;
        while self.peek().kind == Tok::Amp {
            self.advance();
            let rhs = self.unary_expr(root)?;
            match conjoin(&acc, &rhs) {
                Ok(c) => acc = c,
                Err(e) => {
                    self.error_here(format!("cannot conjoin: {}", e));
                    return None;
                }
            }
        }
        Some(acc)
    }

    fn unary_expr(&mut self, root: &GraphDef) -> Option<Condition> {
        if self.peek().kind == Tok::Bang {
            self.advance();
            return self.unary_expr(root).map(|c| negate(&c));
        }
        self.atom_expr(root)
    }

    fn atom_expr(&mut self, root: &GraphDef) -> Option<Condition> {
        let tok = self.peek().clone();
        match (tok.kind, tok.text.as_str()) {
            (Tok::LParen, _) => {
                self.advance();
                let c = self.cond_expr(root)?;
                self.expect(Tok::RParen, "')'")?;
                Some(c)
            }
            (Tok::Ident, "true") => {
                self.advance();
                Some(Condition::tt(root.graph.clone()))
            }
            (Tok::Ident, "false") => {
                self.advance();
                Some(Condition::ff(root.graph.clone()))
            }
            (Tok::Ident, "pattern") => {
                self.advance();
                self.expect(Tok::LParen, "'('")?;
                let name_tok = self.peek().clone();
                let name = self.ident("a graph name")?;
                self.expect(Tok::RParen, "')'")?;
                let def = self.lookup_graph(&name, &name_tok)?;
                let leg = self.leg_morphism(root, &def, &[], &name_tok)?;
                Some(Condition::quantifier(
                    Polarity::Existential,
                    Cospan::lift(leg),
                    Condition::tt(def.graph),
                ))
            }
            (Tok::Ident, kw @ ("forall" | "exists")) => {
                let polarity = if kw == "forall" {
                    Polarity::Universal
                } else {
                    Polarity::Existential
                };
                self.advance();
                let arrow = self.cospan_lit()?;
                if arrow.domain() != &root.graph {
                    self.error_at(&tok, "quantifier domain does not match the current root");
                    return None;
                }
                self.expect(Tok::Dot, "'.'")?;
                let cod_def = GraphDef {
                    graph: arrow.codomain().clone(),
                    node_names: self.codomain_names(&arrow),
                };
                let sub = self.cond_expr(&cod_def)?;
                Some(Condition::quantifier(polarity, arrow, sub))
            }
            _ => {
                self.error_here("expected a condition");
                None
            }
        }
    }

    /// node names for a cospan codomain, recovered from its graph definition
    /// if one matches, else synthesized
    fn codomain_names(&self, arrow: &Cospan) -> Vec<String> {
        let g = arrow.codomain();
        if let Some((_, d)) = self.spec.graphs.iter().find(|(_, d)| d.graph == *g) {
            return d.node_names.clone();
        }
        (0..g.node_count()).map(|i| format!("n{}", i)).collect()
    }
}

// --------------------------------------------------------------- writers

/// interning writer: gives every distinct graph a name and node names
struct GraphTable {
    entries: Vec<(String, GraphDef)>,
}

impl GraphTable {
    fn new() -> Self {
        GraphTable { entries: Vec::new() }
    }

    fn seed(spec: &SystemSpec) -> Self {
        GraphTable { entries: spec.graphs.clone() }
    }

    fn intern(&mut self, g: &Graph) -> usize {
        if let Some(i) = self.entries.iter().position(|(_, d)| d.graph == *g) {
            return i;
        }
        let name = format!("G{}", self.entries.len());
        let names = (0..g.node_count()).map(|i| format!("n{}", i)).collect();
        self.entries.push((name, GraphDef { graph: g.clone(), node_names: names }));
        self.entries.len() - 1
    }

    fn name(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    fn def(&self, i: usize) -> &GraphDef {
        &self.entries[i].1
    }

    fn name_of(&mut self, g: &Graph) -> String {
        if g.is_empty() {
            return "empty".into();
        }
        let i = self.intern(g);
        self.name(i).to_string()
    }

    fn write_graph_defs(&self, out: &mut String, skip: usize) {
        for (name, def) in self.entries.iter().skip(skip) {
            writeln!(out, "graph {} {{", name).unwrap();
            if def.graph.node_count() > 0 {
                let nodes: Vec<String> = def
                    .node_names
                    .iter()
                    .enumerate()
                    .map(|(i, n)| {
                        let l = def.graph.label(i);
                        if l == 0 {
                            n.clone()
                        } else {
                            format!("{}:{}", n, l)
                        }
                    })
                    .collect();
                writeln!(out, "  nodes {};", nodes.join(", ")).unwrap();
            }
            for &(s, t) in def.graph.edges() {
                writeln!(out, "  edge : {} -> {};", def.node_names[s], def.node_names[t]).unwrap();
            }
            writeln!(out, "}}").unwrap();
        }
    }

    fn write_cospan(&mut self, c: &Cospan) -> String {
        let dom = self.name_of(c.domain());
        let mid = self.name_of(c.middle());
        let cod = self.name_of(c.codomain());
        let mid_i = if c.middle().is_empty() { usize::MAX } else { self.intern(c.middle()) };
        let mut parts = Vec::new();
        for (side, m) in [("left", c.left()), ("right", c.right())] {
            if m.source().is_empty() {
                continue;
            }
            let src_i = self.intern(m.source());
            let src_names = self.def(src_i).node_names.clone();
            let mid_names = self.def(mid_i).node_names.clone();
            let pairs: Vec<String> = m
                .node_map()
                .iter()
                .enumerate()
                .map(|(i, &j)| format!("{} -> {}", src_names[i], mid_names[j]))
                .collect();
            parts.push(format!("{}: {}", side, pairs.join(", ")));
        }
        if parts.is_empty() {
            format!("{} -> {} <- {}", dom, mid, cod)
        } else {
            format!("{} -> {} <- {} [{}]", dom, mid, cod, parts.join("; "))
        }
    }

    fn write_cond_expr(&mut self, cond: &Condition) -> String {
        if cond.is_true() {
            return "true".into();
        }
        if cond.is_false() {
            return "false".into();
        }
        let kw = match cond.polarity() {
            Polarity::Universal => "forall",
            Polarity::Existential => "exists",
        };
        let join = match cond.polarity() {
            Polarity::Universal => " & ",
            Polarity::Existential => " | ",
        };
        let parts: Vec<String> = cond
            .children()
            .iter()
            .map(|Child { arrow, sub }| {
                let lit = self.write_cospan(arrow);
                let body = self.write_cond_expr(sub);
                format!("({} {} . {})", kw, lit, body)
            })
            .collect();
        parts.join(join)
    }
}

pub fn write_condition(name: &str, cond: &Condition) -> String {
    let mut table = GraphTable::new();
    let expr = table.write_cond_expr(cond);
    let mut out = String::new();
    table.write_graph_defs(&mut out, 0);
    writeln!(out, "cond {} = {};", name, expr).unwrap();
    out
}

pub fn write_spec(spec: &SystemSpec) -> String {
    let mut table = GraphTable::seed(spec);
    let mut body = String::new();
    for (name, cond) in &spec.conds {
        writeln!(body, "cond {} = {};", name, table.write_cond_expr(cond)).unwrap();
    }
    for rule in &spec.rules {
        writeln!(body, "rule {} {{", rule.name).unwrap();
        writeln!(body, "  left = {};", table.write_cospan(rule.lhs())).unwrap();
        writeln!(body, "  right = {};", table.write_cospan(rule.rhs())).unwrap();
        writeln!(body, "  cond = {};", table.write_cond_expr(rule.app_cond())).unwrap();
        writeln!(body, "}}").unwrap();
    }
    if let Some(block) = &spec.system {
        writeln!(body, "system {{").unwrap();
        writeln!(body, "  init = {};", block.init).unwrap();
        writeln!(body, "  bad = {};", block.bad).unwrap();
        if !block.rules.is_empty() {
            writeln!(body, "  rules = {};", block.rules.join(", ")).unwrap();
        }
        if !block.predicates.is_empty() {
            writeln!(body, "  predicates = {};", block.predicates.join(", ")).unwrap();
        }
        let c = &block.config;
        let mut kv: Vec<(&str, String)> = Vec::new();
        if let Some(v) = c.budget_ms {
            kv.push(("budgetMs", v.to_string()));
        }
        if let Some(v) = c.unfold_depth {
            kv.push(("unfoldDepth", v.to_string()));
        }
        if let Some(v) = c.model_nodes {
            kv.push(("modelNodes", v.to_string()));
        }
        if let Some(v) = c.model_edges {
            kv.push(("modelEdges", v.to_string()));
        }
        if let Some(v) = c.max_refinements {
            kv.push(("maxRefinements", v.to_string()));
        }
        if let Some(v) = c.spurious_mode {
            kv.push((
                "spuriousMode",
                match v {
                    SpuriousMode::Wp => "wp".into(),
                    SpuriousMode::Sp => "sp".into(),
                },
            ));
        }
        if let Some(v) = c.split_conjuncts {
            kv.push(("splitConjuncts", v.to_string()));
        }
        if let Some(v) = c.witness_nodes {
            kv.push(("witnessNodes", v.to_string()));
        }
        if let Some(v) = c.witness_edges {
            kv.push(("witnessEdges", v.to_string()));
        }
        if let Some(v) = c.max_states {
            kv.push(("maxStates", v.to_string()));
        }
        if let Some(v) = c.skip_undetermined {
            kv.push(("skipUndetermined", v.to_string()));
        }
        for (k, v) in kv {
            writeln!(body, "  {} = {};", k, v).unwrap();
        }
        writeln!(body, "}}").unwrap();
    }
    let mut out = String::new();
    table.write_graph_defs(&mut out, 0);
    out.push_str(&body);
    out
}

pub fn write_dot_graph(g: &Graph) -> String {
    let mut out = String::from("digraph {\n");
    for v in 0..g.node_count() {
        writeln!(out, "  n{} [label=\"{}\"];", v, g.label(v)).unwrap();
    }
    for &(s, t) in g.edges() {
        writeln!(out, "  n{} -> n{};", s, t).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn write_dot_ats(ts: &crate::abstraction::AbstractTS, preds: &crate::abstraction::PredicateSet) -> String {
    use crate::abstraction::{AbstractState, Lit};
    let mut out = String::from("digraph {\n");
    for (i, q) in ts.states.iter().enumerate() {
        let label = match q {
            AbstractState::Bottom => "bottom".to_string(),
            AbstractState::Assign(lits) => lits
                .iter()
                .zip(&preds.preds)
                .map(|(l, p)| {
                    let sign = match l {
                        Lit::Pos => "+",
                        Lit::Neg => "-",
                        Lit::Unknown => "?",
                    };
                    format!("{}{}", sign, p.name)
                })
                .collect::<Vec<_>>()
                .join(" "),
        };
        let shape = if i == ts.initial { " shape=doublecircle" } else { "" };
        writeln!(out, "  q{} [label=\"{}\"{}];", i, label, shape).unwrap();
    }
    for (src, rule, tgt) in &ts.transitions {
        writeln!(out, "  q{} -> q{} [label=\"{}\"];", src, tgt, rule).unwrap();
    }
    out.push_str("}\n");
    out
}

fn graph_json(g: &Graph) -> serde_json::Value {
    serde_json::json!({
        "nodes": (0..g.node_count()).map(|v| g.label(v)).collect::<Vec<_>>(),
        "edges": g.edges().iter().map(|&(s, t)| vec![s, t]).collect::<Vec<_>>(),
    })
}

/// Serialize a verdict report. `wallMillis` is pinned to zero so the output
/// is byte-identical across runs; real timing goes to the human summary.
pub fn report_json(report: &crate::cegar::VerdictReport) -> String {
    use crate::abstraction::PredicateSource;
    use crate::cegar::Outcome;
    let (outcome, trace, witness) = match &report.outcome {
        Outcome::Safe => ("safe", Vec::new(), None),
        Outcome::Unsafe { trace, witness } => ("unsafe", trace.clone(), Some(graph_json(witness))),
        Outcome::Inconclusive { .. } => ("inconclusive", Vec::new(), None),
    };
    let predicates: Vec<serde_json::Value> = report
        .predicates
        .preds
        .iter()
        .map(|p| {
            serde_json::json!({
                "name": p.name,
                "source": match p.source {
                    PredicateSource::User => "user",
                    PredicateSource::Wp => "wp",
                    PredicateSource::Sp => "sp",
                },
            })
        })
        .collect();
    let (states, transitions) = report
        .ts
        .as_ref()
        .map(|ts| (ts.states.len(), ts.transitions.len()))
        .unwrap_or((0, 0));
    let mut value = serde_json::json!({
        "outcome": outcome,
        "trace": trace,
        "iterations": report.iterations,
        "predicates": predicates,
        "states": states,
        "transitions": transitions,
        "stats": {
            "entailmentCalls": report.stats.entailment_calls,
            "unknownLiterals": report.stats.unknown_results,
            "wallMillis": 0,
        },
    });
    if let Some(w) = witness {
        value["witness"] = w;
    }
    let mut s = serde_json::to_string_pretty(&value).unwrap();
    s.push('\n');
    s
}
