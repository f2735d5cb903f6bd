//! Line-oriented parser for the lo-FIRRTL subset.

use super::ast::*;
use super::FirrtlError;
use crate::dfg::Opcode;
use crate::kernel::bitvec::MAX_WIDTH;
use std::collections::{HashMap, HashSet};

/// Parse FIRRTL text into a validated AST. Every statement records its
/// source line; diagnostics reference those lines.
pub fn parse_firrtl(text: &str) -> Result<CircuitAst, FirrtlError> {
    let ast = parse_raw(text)?;
    validate(&ast)?;
    Ok(ast)
}

fn syn(line: u32, msg: impl Into<String>) -> FirrtlError {
    FirrtlError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn unsup(line: u32, construct: impl Into<String>) -> FirrtlError {
    FirrtlError::Unsupported {
        line,
        construct: construct.into(),
    }
}

const STATEMENT_KEYWORDS: &[&str] = &[
    "circuit", "module", "extmodule", "intmodule", "input", "output", "wire", "reg", "regreset",
    "node", "inst", "of", "skip", "when", "else", "mem", "cmem", "smem", "with", "mux", "UInt",
    "SInt", "Clock",
];

// ---------------------------------------------------------------------------
// Tokens

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Id(&'a str),
    Int(i128),
    Str(&'a str),
    Colon,
    Comma,
    Dot,
    LParen,
    RParen,
    Lt,
    Gt,
    Connect,
    PartialConnect,
    FatArrow,
    Assign,
}

fn lex(line: &str, lineno: u32) -> Result<Vec<Tok<'_>>, FirrtlError> {
    let bytes = line.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' => i += 1,
            ';' => break,
            '@' => {
                // trailing source-info token `@[...]`
                if i + 1 < bytes.len() && bytes[i + 1] == b'[' {
                    match line[i..].find(']') {
                        Some(end) => i += end + 1,
                        None => return Err(syn(lineno, "unterminated info token")),
                    }
                } else {
                    return Err(syn(lineno, "unexpected `@`"));
                }
            }
            ':' => {
                toks.push(Tok::Colon);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '.' => {
                toks.push(Tok::Dot);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push(Tok::Connect);
                    i += 2;
                } else if bytes.get(i + 1) == Some(&b'-') {
                    toks.push(Tok::PartialConnect);
                    i += 2;
                } else {
                    toks.push(Tok::Lt);
                    i += 1;
                }
            }
            '>' => {
                toks.push(Tok::Gt);
                i += 1;
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push(Tok::FatArrow);
                    i += 2;
                } else {
                    toks.push(Tok::Assign);
                    i += 1;
                }
            }
            '"' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j] != b'"' {
                    j += 1;
                }
                if j == bytes.len() {
                    return Err(syn(lineno, "unterminated string"));
                }
                toks.push(Tok::Str(&line[start..j]));
                i = j + 1;
            }
            '-' | '0'..='9' => {
                let start = i;
                if c == '-' {
                    i += 1;
                    if !matches!(bytes.get(i), Some(b'0'..=b'9')) {
                        return Err(syn(lineno, "expected digits after `-`"));
                    }
                }
                while matches!(bytes.get(i), Some(b'0'..=b'9')) {
                    i += 1;
                }
                let v: i128 = line[start..i]
                    .parse()
                    .map_err(|_| syn(lineno, "integer literal out of range"))?;
                toks.push(Tok::Int(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push(Tok::Id(&line[start..i]));
            }
            other => return Err(syn(lineno, format!("unexpected character `{}`", other))),
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Cursor over one line of tokens

struct Cur<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    line: u32,
}

impl<'a> Cur<'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok<'a>, FirrtlError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syn(self.line, "unexpected end of line"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: Tok<'a>, what: &str) -> Result<(), FirrtlError> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            Err(syn(self.line, format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, FirrtlError> {
        match self.next()? {
            Tok::Id(s) => Ok(s),
            _ => Err(syn(self.line, format!("expected {what}"))),
        }
    }

    fn int(&mut self, what: &str) -> Result<i128, FirrtlError> {
        match self.next()? {
            Tok::Int(v) => Ok(v),
            _ => Err(syn(self.line, format!("expected {what}"))),
        }
    }

    fn done(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn finish(&self) -> Result<(), FirrtlError> {
        if self.done() {
            Ok(())
        } else {
            Err(syn(self.line, "trailing tokens on line"))
        }
    }
}

// ---------------------------------------------------------------------------
// Grammar

fn parse_raw(text: &str) -> Result<CircuitAst, FirrtlError> {
    let mut top: Option<String> = None;
    let mut modules: Vec<ModuleAst> = Vec::new();
    let mut in_statements = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = (idx + 1) as u32;
        let toks = lex(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cur {
            toks,
            pos: 0,
            line: lineno,
        };

        let head = match cur.peek() {
            Some(Tok::Id(s)) => *s,
            _ => "",
        };

        if top.is_none() {
            if head != "circuit" {
                return Err(syn(lineno, "expected `circuit <name>:`"));
            }
            cur.next()?;
            let name = cur.ident("circuit name")?;
            cur.expect(Tok::Colon, "`:` after circuit name")?;
            cur.finish()?;
            top = Some(name.to_string());
            continue;
        }

        match head {
            "circuit" => return Err(syn(lineno, "only one circuit per file")),
            "module" => {
                cur.next()?;
                let name = cur.ident("module name")?;
                cur.expect(Tok::Colon, "`:` after module name")?;
                cur.finish()?;
                modules.push(ModuleAst {
                    name: name.to_string(),
                    ports: Vec::new(),
                    statements: Vec::new(),
                    line: lineno,
                });
                in_statements = false;
            }
            "extmodule" | "intmodule" => return Err(unsup(lineno, head)),
            "input" | "output" => {
                let module = modules
                    .last_mut()
                    .ok_or_else(|| syn(lineno, "port outside of a module"))?;
                if in_statements {
                    return Err(syn(lineno, "ports must precede statements"));
                }
                cur.next()?;
                let name = parse_decl_name(&mut cur)?;
                cur.expect(Tok::Colon, "`:` after port name")?;
                let ty = parse_type(&mut cur)?;
                cur.finish()?;
                module.ports.push(Port {
                    name,
                    direction: if head == "input" {
                        Direction::Input
                    } else {
                        Direction::Output
                    },
                    ty,
                    line: lineno,
                });
            }
            _ => {
                let stmt = parse_statement(&mut cur)?;
                let module = modules
                    .last_mut()
                    .ok_or_else(|| syn(lineno, "statement outside of a module"))?;
                in_statements = true;
                module.statements.push(Stmt {
                    line: lineno,
                    kind: stmt,
                });
            }
        }
    }

    let top = top.ok_or_else(|| syn(0, "empty input: expected `circuit <name>:`"))?;
    Ok(CircuitAst { top, modules })
}

fn parse_decl_name(cur: &mut Cur) -> Result<String, FirrtlError> {
    let name = cur.ident("identifier")?;
    if STATEMENT_KEYWORDS.contains(&name) || Opcode::from_name(name).is_some() {
        return Err(syn(cur.line, format!("`{name}` is a reserved word")));
    }
    Ok(name.to_string())
}

fn parse_type(cur: &mut Cur) -> Result<Ty, FirrtlError> {
    let line = cur.line;
    let name = cur.ident("type")?;
    match name {
        "UInt" | "SInt" => {
            if cur.peek() != Some(&Tok::Lt) {
                return Err(syn(line, format!("{name} requires an explicit width")));
            }
            cur.next()?;
            let w = cur.int("width")?;
            cur.expect(Tok::Gt, "`>` after width")?;
            if w < 1 {
                return Err(syn(line, "width must be at least 1"));
            }
            if w > MAX_WIDTH as i128 {
                return Err(unsup(line, format!("width {w} exceeds {MAX_WIDTH} bits")));
            }
            Ok(if name == "UInt" {
                Ty::UInt(w as u32)
            } else {
                Ty::SInt(w as u32)
            })
        }
        "Clock" => Ok(Ty::Clock),
        "Analog" | "AsyncReset" | "Reset" | "Fixed" | "Probe" => Err(unsup(line, name)),
        _ => Err(syn(line, format!("unknown type `{name}`"))),
    }
}

fn parse_statement(cur: &mut Cur) -> Result<StmtKind, FirrtlError> {
    let line = cur.line;
    let head = match cur.peek() {
        Some(Tok::Id(s)) => *s,
        _ => return Err(syn(line, "expected a statement")),
    };

    match head {
        "mem" | "cmem" | "smem" => Err(unsup(line, head)),
        "when" | "else" => Err(unsup(
            line,
            "when (control flow must be lowered to muxes)",
        )),
        "attach" | "printf" | "stop" | "assert" | "assume" | "cover" | "define" | "force"
        | "release" | "invalidate" | "regreset" => Err(unsup(line, head)),
        "skip" => {
            cur.next()?;
            cur.finish()?;
            Ok(StmtKind::Skip)
        }
        "wire" => {
            cur.next()?;
            let name = parse_decl_name(cur)?;
            cur.expect(Tok::Colon, "`:` after wire name")?;
            let ty = parse_type(cur)?;
            cur.finish()?;
            if ty == Ty::Clock {
                return Err(unsup(line, "clock-typed wire"));
            }
            Ok(StmtKind::Wire { name, ty })
        }
        "reg" => {
            cur.next()?;
            let name = parse_decl_name(cur)?;
            cur.expect(Tok::Colon, "`:` after register name")?;
            let ty = parse_type(cur)?;
            if ty == Ty::Clock {
                return Err(syn(line, "register type must be UInt or SInt"));
            }
            cur.expect(Tok::Comma, "`,` before register clock")?;
            let clock = parse_ref(cur)?;
            let reset = if cur.done() {
                None
            } else {
                Some(parse_reg_with(cur)?)
            };
            cur.finish()?;
            Ok(StmtKind::Reg {
                name,
                ty,
                clock,
                reset,
            })
        }
        "node" => {
            cur.next()?;
            let name = parse_decl_name(cur)?;
            cur.expect(Tok::Assign, "`=` after node name")?;
            let expr = parse_expr(cur)?;
            cur.finish()?;
            Ok(StmtKind::Node { name, expr })
        }
        "inst" => {
            cur.next()?;
            let name = parse_decl_name(cur)?;
            let of = cur.ident("`of`")?;
            if of != "of" {
                return Err(syn(line, "expected `of` after instance name"));
            }
            let module = cur.ident("module name")?;
            cur.finish()?;
            Ok(StmtKind::Instance {
                name,
                module: module.to_string(),
            })
        }
        _ => {
            // connect: `<ref> <= <expr>`
            let target = parse_ref(cur)?;
            match cur.next()? {
                Tok::Connect => {}
                Tok::PartialConnect => return Err(unsup(line, "partial connect `<-`")),
                _ => return Err(syn(line, "expected `<=` in connect statement")),
            }
            let expr = parse_expr(cur)?;
            cur.finish()?;
            Ok(StmtKind::Connect { target, expr })
        }
    }
}

fn parse_reg_with(cur: &mut Cur) -> Result<RegReset, FirrtlError> {
    let line = cur.line;
    let with = cur.ident("`with`")?;
    if with != "with" {
        return Err(syn(line, "expected `with` after register clock"));
    }
    cur.expect(Tok::Colon, "`:` after `with`")?;
    cur.expect(Tok::LParen, "`(`")?;
    let reset_kw = cur.ident("`reset`")?;
    if reset_kw != "reset" {
        return Err(syn(line, "expected `reset =>` in register with-block"));
    }
    cur.expect(Tok::FatArrow, "`=>`")?;
    cur.expect(Tok::LParen, "`(`")?;
    let signal = parse_ref(cur)?;
    cur.expect(Tok::Comma, "`,` between reset signal and init value")?;
    let init = match parse_expr(cur)? {
        Expr::Lit(lit) => lit,
        _ => return Err(syn(line, "register init value must be a literal")),
    };
    cur.expect(Tok::RParen, "`)`")?;
    cur.expect(Tok::RParen, "`)`")?;
    Ok(RegReset { signal, init })
}

fn parse_ref(cur: &mut Cur) -> Result<Ref, FirrtlError> {
    let name = cur.ident("identifier")?;
    if cur.peek() == Some(&Tok::Dot) {
        cur.next()?;
        let field = cur.ident("field name")?;
        if cur.peek() == Some(&Tok::Dot) {
            return Err(unsup(cur.line, "nested field access"));
        }
        Ok(Ref {
            name: name.to_string(),
            field: Some(field.to_string()),
        })
    } else {
        Ok(Ref::simple(name))
    }
}

fn parse_expr(cur: &mut Cur) -> Result<Expr, FirrtlError> {
    let line = cur.line;
    let head = match cur.peek() {
        Some(Tok::Id(s)) => *s,
        _ => return Err(syn(line, "expected an expression")),
    };

    match head {
        "UInt" | "SInt" => parse_literal(cur).map(Expr::Lit),
        "validif" | "andr" | "orr" | "xorr" => Err(unsup(line, head)),
        name => {
            if let Some(op) = Opcode::from_name(name) {
                if op != Opcode::MuxChain && matches!(cur.toks.get(cur.pos + 1), Some(Tok::LParen))
                {
                    return parse_prim(cur, op);
                }
            }
            parse_ref(cur).map(Expr::Ref)
        }
    }
}

fn parse_literal(cur: &mut Cur) -> Result<Literal, FirrtlError> {
    let line = cur.line;
    let kind = cur.ident("literal type")?;
    let signed = kind == "SInt";
    if cur.peek() != Some(&Tok::Lt) {
        return Err(syn(line, format!("{kind} literal requires an explicit width")));
    }
    cur.next()?;
    let w = cur.int("width")?;
    cur.expect(Tok::Gt, "`>` after width")?;
    if w < 1 {
        return Err(syn(line, "width must be at least 1"));
    }
    if w > MAX_WIDTH as i128 {
        return Err(unsup(line, format!("width {w} exceeds {MAX_WIDTH} bits")));
    }
    let width = w as u32;
    cur.expect(Tok::LParen, "`(` before literal value")?;
    let value: i128 = match cur.next()? {
        Tok::Int(v) => v,
        Tok::Str(s) => parse_radix_literal(s, line)?,
        _ => return Err(syn(line, "expected literal value")),
    };
    cur.expect(Tok::RParen, "`)` after literal value")?;
    if !Literal::fits(value, width, signed) {
        return Err(syn(
            line,
            format!("literal {value} does not fit {kind}<{width}>"),
        ));
    }
    Ok(Literal::new(value, width, signed))
}

fn parse_radix_literal(s: &str, line: u32) -> Result<i128, FirrtlError> {
    let (radix, digits) = match s.chars().next() {
        Some('h') => (16, &s[1..]),
        Some('o') => (8, &s[1..]),
        Some('b') => (2, &s[1..]),
        Some('d') => (10, &s[1..]),
        _ => return Err(syn(line, format!("bad radix literal \"{s}\""))),
    };
    u128::from_str_radix(digits, radix)
        .ok()
        .and_then(|v| i128::try_from(v).ok())
        .ok_or_else(|| syn(line, format!("bad radix literal \"{s}\"")))
}

fn parse_prim(cur: &mut Cur, op: Opcode) -> Result<Expr, FirrtlError> {
    let line = cur.line;
    cur.next()?; // op name
    cur.expect(Tok::LParen, "`(`")?;
    let mut args = Vec::new();
    let mut params = Vec::new();
    loop {
        match cur.peek() {
            Some(Tok::Int(_)) => {
                let v = cur.int("parameter")?;
                if v < 0 || v > u32::MAX as i128 {
                    return Err(syn(line, format!("parameter {v} out of range")));
                }
                params.push(v as u32);
            }
            _ => {
                if !params.is_empty() {
                    return Err(syn(line, "operands must precede static parameters"));
                }
                args.push(parse_expr(cur)?);
            }
        }
        match cur.next()? {
            Tok::Comma => continue,
            Tok::RParen => break,
            _ => return Err(syn(line, "expected `,` or `)` in argument list")),
        }
    }
    if Some(args.len()) != op.fixed_arity() {
        return Err(syn(
            line,
            format!(
                "{} expects {} operand(s), got {}",
                op.name(),
                op.fixed_arity().unwrap_or(0),
                args.len()
            ),
        ));
    }
    if params.len() != op.param_count() {
        return Err(syn(
            line,
            format!(
                "{} expects {} parameter(s), got {}",
                op.name(),
                op.param_count(),
                params.len()
            ),
        ));
    }
    Ok(Expr::Prim { op, args, params })
}

// ---------------------------------------------------------------------------
// Validation: naming, structure and instance topology

#[derive(Clone)]
enum Decl {
    Data,
    Clock,
    Instance(usize),
}

fn validate(ast: &CircuitAst) -> Result<(), FirrtlError> {
    let mut by_name: HashMap<&str, usize> = HashMap::new();
    for (i, m) in ast.modules.iter().enumerate() {
        if by_name.insert(m.name.as_str(), i).is_some() {
            return Err(syn(m.line, format!("duplicate module `{}`", m.name)));
        }
    }
    if !by_name.contains_key(ast.top.as_str()) {
        return Err(syn(0, format!("top module `{}` is not defined", ast.top)));
    }

    for m in &ast.modules {
        validate_module(ast, m, &by_name)?;
    }
    check_instance_dag(ast, &by_name)?;
    Ok(())
}

fn validate_module(
    ast: &CircuitAst,
    module: &ModuleAst,
    by_name: &HashMap<&str, usize>,
) -> Result<(), FirrtlError> {
    let mut env: HashMap<&str, Decl> = HashMap::new();

    for p in &module.ports {
        let decl = if p.ty == Ty::Clock {
            if p.direction == Direction::Output {
                return Err(unsup(p.line, "clock output port"));
            }
            Decl::Clock
        } else {
            Decl::Data
        };
        if env.insert(p.name.as_str(), decl).is_some() {
            return Err(syn(p.line, format!("duplicate declaration `{}`", p.name)));
        }
    }

    for stmt in &module.statements {
        let line = stmt.line;
        match &stmt.kind {
            StmtKind::Wire { name, .. } => {
                declare_name(&mut env, name, Decl::Data, line)?;
            }
            StmtKind::Reg {
                name,
                clock,
                reset,
                ..
            } => {
                check_ref(ast, &env, clock, line, by_name)?;
                if let Some(r) = reset {
                    check_ref(ast, &env, &r.signal, line, by_name)?;
                }
                declare_name(&mut env, name, Decl::Data, line)?;
            }
            StmtKind::Node { name, expr } => {
                check_expr(ast, &env, expr, line, by_name)?;
                declare_name(&mut env, name, Decl::Data, line)?;
            }
            StmtKind::Connect { target, expr } => {
                check_ref(ast, &env, target, line, by_name)?;
                check_expr(ast, &env, expr, line, by_name)?;
            }
            StmtKind::Instance { name, module: of } => {
                let idx = *by_name
                    .get(of.as_str())
                    .ok_or_else(|| syn(line, format!("instance of undefined module `{of}`")))?;
                declare_name(&mut env, name, Decl::Instance(idx), line)?;
            }
            StmtKind::Skip => {}
        }
    }
    Ok(())
}

fn declare_name<'m>(
    env: &mut HashMap<&'m str, Decl>,
    name: &'m str,
    decl: Decl,
    line: u32,
) -> Result<(), FirrtlError> {
    if env.insert(name, decl).is_some() {
        return Err(syn(line, format!("duplicate declaration `{name}`")));
    }
    Ok(())
}

fn check_ref(
    ast: &CircuitAst,
    env: &HashMap<&str, Decl>,
    r: &Ref,
    line: u32,
    _by_name: &HashMap<&str, usize>,
) -> Result<(), FirrtlError> {
    match env.get(r.name.as_str()) {
        None => Err(syn(line, format!("`{}` is not declared", r.name))),
        Some(Decl::Instance(idx)) => {
            let field = r
                .field
                .as_ref()
                .ok_or_else(|| syn(line, format!("instance `{}` used without a port", r.name)))?;
            let target = &ast.modules[*idx];
            if !target.ports.iter().any(|p| &p.name == field) {
                return Err(syn(
                    line,
                    format!("module `{}` has no port `{}`", target.name, field),
                ));
            }
            Ok(())
        }
        Some(_) => {
            if r.field.is_some() {
                Err(syn(line, format!("`{}` is not an instance", r.name)))
            } else {
                Ok(())
            }
        }
    }
}

fn check_expr(
    ast: &CircuitAst,
    env: &HashMap<&str, Decl>,
    expr: &Expr,
    line: u32,
    by_name: &HashMap<&str, usize>,
) -> Result<(), FirrtlError> {
    match expr {
        Expr::Lit(_) => Ok(()),
        Expr::Ref(r) => check_ref(ast, env, r, line, by_name),
        Expr::Prim { args, .. } => {
            for a in args {
                check_expr(ast, env, a, line, by_name)?;
            }
            Ok(())
        }
    }
}

fn check_instance_dag(
    ast: &CircuitAst,
    by_name: &HashMap<&str, usize>,
) -> Result<(), FirrtlError> {
    // DFS three-color over the module instantiation graph.
    fn visit(
        ast: &CircuitAst,
        by_name: &HashMap<&str, usize>,
        idx: usize,
        state: &mut [u8],
    ) -> Result<(), FirrtlError> {
        if state[idx] == 2 {
            return Ok(());
        }
        if state[idx] == 1 {
            return Err(syn(
                ast.modules[idx].line,
                format!("recursive instantiation of module `{}`", ast.modules[idx].name),
            ));
        }
        state[idx] = 1;
        for stmt in &ast.modules[idx].statements {
            if let StmtKind::Instance { module, .. } = &stmt.kind {
                let child = by_name[module.as_str()];
                visit(ast, by_name, child, state)?;
            }
        }
        state[idx] = 2;
        Ok(())
    }

    let mut state = vec![0u8; ast.modules.len()];
    let mut reached: HashSet<usize> = HashSet::new();
    for i in 0..ast.modules.len() {
        visit(ast, by_name, i, &mut state)?;
        reached.insert(i);
    }
    Ok(())
}
