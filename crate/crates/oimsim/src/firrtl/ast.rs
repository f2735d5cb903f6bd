//! Parsed circuit representation. Statements keep their source line for
//! diagnostics; structural equality ignores lines so printer round-trips can
//! be compared.

use crate::dfg::Opcode;
use crate::kernel::bitvec::mask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitAst {
    pub top: String,
    pub modules: Vec<ModuleAst>,
}

impl CircuitAst {
    pub fn top_module(&self) -> &ModuleAst {
        self.modules
            .iter()
            .find(|m| m.name == self.top)
            .expect("validated: top module exists")
    }

    pub fn module(&self, name: &str) -> Option<&ModuleAst> {
        self.modules.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleAst {
    pub name: String,
    pub ports: Vec<Port>,
    pub statements: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    pub ty: Ty,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    UInt(u32),
    SInt(u32),
    Clock,
}

impl Ty {
    pub fn width_sign(self) -> Option<(u32, bool)> {
        match self {
            Ty::UInt(w) => Some((w, false)),
            Ty::SInt(w) => Some((w, true)),
            Ty::Clock => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub line: u32,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Wire {
        name: String,
        ty: Ty,
    },
    Reg {
        name: String,
        ty: Ty,
        clock: Ref,
        reset: Option<RegReset>,
    },
    Node {
        name: String,
        expr: Expr,
    },
    Connect {
        target: Ref,
        expr: Expr,
    },
    Instance {
        name: String,
        module: String,
    },
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegReset {
    pub signal: Ref,
    pub init: Literal,
}

/// A (possibly field-qualified) identifier reference; `i0.out` reads port
/// `out` of instance `i0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ref {
    pub name: String,
    pub field: Option<String>,
}

impl Ref {
    pub fn simple(name: impl Into<String>) -> Self {
        Ref {
            name: name.into(),
            field: None,
        }
    }
}

impl std::fmt::Display for Ref {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{}.{}", self.name, field),
            None => write!(f, "{}", self.name),
        }
    }
}

/// A literal with explicit width; the payload is stored as masked
/// two's-complement bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub width: u32,
    pub signed: bool,
    pub bits: u128,
}

impl Literal {
    pub fn new(value: i128, width: u32, signed: bool) -> Self {
        Literal {
            width,
            signed,
            bits: (value as u128) & mask(width),
        }
    }

    /// Whether `value` is representable at this width and signedness.
    pub fn fits(value: i128, width: u32, signed: bool) -> bool {
        if signed {
            let half = 1i128 << (width - 1).min(126);
            if width >= 128 {
                true
            } else {
                value >= -half && value < half
            }
        } else {
            value >= 0 && (width >= 128 || (value as u128) < (1u128 << width))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Literal),
    Ref(Ref),
    Prim {
        op: Opcode,
        args: Vec<Expr>,
        params: Vec<u32>,
    },
}
