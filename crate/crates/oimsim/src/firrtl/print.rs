//! Canonical AST printer. Parsing the printed text reproduces the AST, which
//! the round-trip tests rely on.

use super::ast::*;
use std::fmt::Write;

pub fn print_circuit(ast: &CircuitAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "circuit {}:", ast.top);
    for m in &ast.modules {
        let _ = writeln!(out, "  module {}:", m.name);
        for p in &m.ports {
            let dir = match p.direction {
                Direction::Input => "input",
                Direction::Output => "output",
            };
            let _ = writeln!(out, "    {} {}: {}", dir, p.name, print_ty(p.ty));
        }
        for s in &m.statements {
            let _ = writeln!(out, "    {}", print_stmt(&s.kind));
        }
    }
    out
}

fn print_ty(ty: Ty) -> String {
    match ty {
        Ty::UInt(w) => format!("UInt<{w}>"),
        Ty::SInt(w) => format!("SInt<{w}>"),
        Ty::Clock => "Clock".to_string(),
    }
}

fn print_stmt(kind: &StmtKind) -> String {
    match kind {
        StmtKind::Wire { name, ty } => format!("wire {}: {}", name, print_ty(*ty)),
        StmtKind::Reg {
            name,
            ty,
            clock,
            reset,
        } => match reset {
            None => format!("reg {}: {}, {}", name, print_ty(*ty), clock),
            Some(r) => format!(
                "reg {}: {}, {} with: (reset => ({}, {}))",
                name,
                print_ty(*ty),
                clock,
                r.signal,
                print_literal(&r.init)
            ),
        },
        StmtKind::Node { name, expr } => format!("node {} = {}", name, print_expr(expr)),
        StmtKind::Connect { target, expr } => format!("{} <= {}", target, print_expr(expr)),
        StmtKind::Instance { name, module } => format!("inst {} of {}", name, module),
        StmtKind::Skip => "skip".to_string(),
    }
}

fn print_literal(lit: &Literal) -> String {
    if lit.signed {
        let v = crate::kernel::BitVec::new(lit.bits, lit.width, true).to_i128();
        format!("SInt<{}>({})", lit.width, v)
    } else {
        format!("UInt<{}>({})", lit.width, lit.bits)
    }
}

pub(super) fn print_expr(expr: &Expr) -> String {
    match expr {
        Expr::Lit(lit) => print_literal(lit),
        Expr::Ref(r) => r.to_string(),
        Expr::Prim { op, args, params } => {
            let mut parts: Vec<String> = args.iter().map(print_expr).collect();
            parts.extend(params.iter().map(|p| p.to_string()));
            format!("{}({})", op.name(), parts.join(", "))
        }
    }
}
