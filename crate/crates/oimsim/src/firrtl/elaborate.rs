//! Hierarchy flattening: instances are inlined with `instance.port` name
//! prefixes, every signal gets a dense id, literals are materialized as
//! constant signals, and every expression is width-checked against the FIRRTL
//! rules. The result is a single-module netlist with one implicit clock.

use super::ast::*;
use super::FirrtlError;
use crate::dfg::Opcode;
use crate::kernel::bitvec::mask;
use std::collections::HashMap;

pub type SignalId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub name: String,
    pub width: u32,
    pub signed: bool,
    pub kind: SignalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Input,
    Output,
    Wire,
    Node,
    Register,
    Constant(u128),
}

/// Typed expression tree over signal references. Leaves are always signal
/// refs; literals were hoisted into constant signals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetExpr {
    Ref(SignalId),
    Prim {
        op: Opcode,
        args: Vec<NetExpr>,
        params: Vec<u32>,
        width: u32,
        signed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetRegister {
    pub signal: SignalId,
    pub reset: Option<SignalId>,
    /// Reset/initial value, sign-extended to the register width; zero when no
    /// reset clause was given.
    pub init: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub signals: Vec<Signal>,
    /// One driving expression per non-input, non-constant signal, indexed by
    /// signal id.
    pub assignments: Vec<Option<NetExpr>>,
    pub registers: Vec<NetRegister>,
    /// Top-level data ports in declaration order.
    pub inputs: Vec<SignalId>,
    pub outputs: Vec<SignalId>,
    pub has_clock: bool,
}

impl Netlist {
    pub fn expr_type(&self, e: &NetExpr) -> (u32, bool) {
        match e {
            NetExpr::Ref(id) => (self.signals[*id].width, self.signals[*id].signed),
            NetExpr::Prim { width, signed, .. } => (*width, *signed),
        }
    }
}

/// Flatten the module hierarchy into a netlist.
pub fn elaborate(ast: &CircuitAst) -> Result<Netlist, FirrtlError> {
    let mut elab = Elaborator {
        ast,
        by_name: ast
            .modules
            .iter()
            .enumerate()
            .map(|(i, m)| (m.name.as_str(), i))
            .collect(),
        signals: Vec::new(),
        signal_ids: HashMap::new(),
        assignments: Vec::new(),
        registers: Vec::new(),
        const_count: 0,
        has_clock: false,
    };

    let top_idx = elab.by_name[ast.top.as_str()];
    let top = &ast.modules[top_idx];

    let mut env: HashMap<String, Entry> = HashMap::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut clock_ports = 0usize;

    for p in &top.ports {
        match p.ty.width_sign() {
            None => {
                clock_ports += 1;
                if clock_ports > 1 {
                    return Err(FirrtlError::ClockDomain {
                        line: p.line,
                        msg: format!(
                            "second clock port `{}`: only a single clock domain is supported",
                            p.name
                        ),
                    });
                }
                elab.has_clock = true;
                env.insert(p.name.clone(), Entry::Clock);
            }
            Some((width, signed)) => {
                let kind = match p.direction {
                    Direction::Input => SignalKind::Input,
                    Direction::Output => SignalKind::Output,
                };
                let id = elab.add_signal(p.name.clone(), width, signed, kind);
                match p.direction {
                    Direction::Input => inputs.push(id),
                    Direction::Output => outputs.push(id),
                }
                env.insert(p.name.clone(), Entry::Data(id));
            }
        }
    }

    elab.elab_body(top_idx, "", &mut env)?;

    // Every non-source signal needs exactly one driver.
    for (id, sig) in elab.signals.iter().enumerate() {
        let needs_driver = !matches!(sig.kind, SignalKind::Input | SignalKind::Constant(_));
        if needs_driver && elab.assignments[id].is_none() {
            return Err(FirrtlError::Undriven {
                signal: sig.name.clone(),
            });
        }
    }

    Ok(Netlist {
        signals: elab.signals,
        assignments: elab.assignments,
        registers: elab.registers,
        inputs,
        outputs,
        has_clock: elab.has_clock,
    })
}

#[derive(Clone)]
enum Entry {
    Data(SignalId),
    Clock,
    Instance {
        module: usize,
        prefix: String,
    },
}

struct Elaborator<'a> {
    ast: &'a CircuitAst,
    by_name: HashMap<&'a str, usize>,
    signals: Vec<Signal>,
    signal_ids: HashMap<String, SignalId>,
    assignments: Vec<Option<NetExpr>>,
    registers: Vec<NetRegister>,
    const_count: usize,
    has_clock: bool,
}

impl<'a> Elaborator<'a> {
    fn add_signal(&mut self, name: String, width: u32, signed: bool, kind: SignalKind) -> SignalId {
        let id = self.signals.len();
        self.signal_ids.insert(name.clone(), id);
        self.signals.push(Signal {
            name,
            width,
            signed,
            kind,
        });
        self.assignments.push(None);
        id
    }

    fn make_constant(&mut self, lit: &Literal) -> SignalId {
        let name = format!("_c{}", self.const_count);
        self.const_count += 1;
        self.add_signal(name, lit.width, lit.signed, SignalKind::Constant(lit.bits))
    }

    /// Elaborate the statements of module `idx` with names prefixed by
    /// `prefix` (empty for the top). Port entries are already in `env`.
    fn elab_body(
        &mut self,
        idx: usize,
        prefix: &str,
        env: &mut HashMap<String, Entry>,
    ) -> Result<(), FirrtlError> {
        // Track instance clock ports that still need a connect.
        let mut pending_clocks: HashMap<String, bool> = HashMap::new();

        let module = &self.ast.modules[idx];
        for stmt in &module.statements {
            let line = stmt.line;
            match &stmt.kind {
                StmtKind::Skip => {}
                StmtKind::Wire { name, ty } => {
                    let (w, s) = ty.width_sign().expect("parser rejects clock wires");
                    let id = self.add_signal(format!("{prefix}{name}"), w, s, SignalKind::Wire);
                    env.insert(name.clone(), Entry::Data(id));
                }
                StmtKind::Reg {
                    name,
                    ty,
                    clock,
                    reset,
                } => {
                    match env.get(&clock.name) {
                        Some(Entry::Clock) if clock.field.is_none() => {}
                        _ => {
                            return Err(FirrtlError::ClockDomain {
                                line,
                                msg: format!(
                                    "register `{name}` clock `{clock}` does not name the module clock port"
                                ),
                            })
                        }
                    }
                    let (w, s) = ty.width_sign().expect("parser rejects clock registers");
                    let id = self.add_signal(format!("{prefix}{name}"), w, s, SignalKind::Register);
                    env.insert(name.clone(), Entry::Data(id));

                    let (reset_id, init) = match reset {
                        None => (None, 0u128),
                        Some(r) => {
                            let rid = self.data_ref(env, &r.signal, line)?;
                            let rsig = &self.signals[rid];
                            if rsig.width != 1 || rsig.signed {
                                return Err(FirrtlError::Type {
                                    line,
                                    msg: format!(
                                        "reset signal `{}` must be UInt<1>",
                                        r.signal
                                    ),
                                });
                            }
                            if r.init.signed != s {
                                return Err(FirrtlError::Type {
                                    line,
                                    msg: format!(
                                        "register `{name}` init signedness does not match"
                                    ),
                                });
                            }
                            if r.init.width > w {
                                return Err(FirrtlError::Type {
                                    line,
                                    msg: format!(
                                        "register `{name}` init is wider than the register"
                                    ),
                                });
                            }
                            // Extend the init bits to the register width.
                            let v = crate::kernel::BitVec::new(r.init.bits, r.init.width, s);
                            (Some(rid), v.extended_bits() & mask(w))
                        }
                    };
                    self.registers.push(NetRegister {
                        signal: id,
                        reset: reset_id,
                        init,
                    });
                }
                StmtKind::Node { name, expr } => {
                    let lowered = self.lower_expr(env, expr, line)?;
                    let (w, s) = self.expr_type(&lowered);
                    let id = self.add_signal(format!("{prefix}{name}"), w, s, SignalKind::Node);
                    self.assignments[id] = Some(lowered);
                    env.insert(name.clone(), Entry::Data(id));
                }
                StmtKind::Instance { name, module: of } => {
                    let child_idx = self.by_name[of.as_str()];
                    let child_prefix = format!("{prefix}{name}.");
                    let mut child_env: HashMap<String, Entry> = HashMap::new();
                    let mut child_clocks = 0usize;
                    let child = &self.ast.modules[child_idx];
                    for p in &child.ports {
                        match p.ty.width_sign() {
                            None => {
                                child_clocks += 1;
                                if child_clocks > 1 {
                                    return Err(FirrtlError::ClockDomain {
                                        line: p.line,
                                        msg: format!(
                                            "second clock port `{}` in module `{}`",
                                            p.name, child.name
                                        ),
                                    });
                                }
                                pending_clocks
                                    .insert(format!("{}.{}", name, p.name), false);
                                child_env.insert(p.name.clone(), Entry::Clock);
                            }
                            Some((w, s)) => {
                                let id = self.add_signal(
                                    format!("{child_prefix}{}", p.name),
                                    w,
                                    s,
                                    SignalKind::Wire,
                                );
                                child_env.insert(p.name.clone(), Entry::Data(id));
                            }
                        }
                    }
                    env.insert(
                        name.clone(),
                        Entry::Instance {
                            module: child_idx,
                            prefix: child_prefix.clone(),
                        },
                    );
                    self.elab_body(child_idx, &child_prefix, &mut child_env)?;
                }
                StmtKind::Connect { target, expr } => {
                    // Clock plumbing: `i0.clock <= clock` binds an instance
                    // clock port and produces no netlist signal.
                    if let Some(key) = self.clock_field(env, target) {
                        match pending_clocks.get_mut(&key) {
                            Some(bound) => {
                                if *bound {
                                    return Err(FirrtlError::MultipleDrivers {
                                        line,
                                        signal: key,
                                    });
                                }
                                match expr {
                                    Expr::Ref(r)
                                        if r.field.is_none()
                                            && matches!(env.get(&r.name), Some(Entry::Clock)) =>
                                    {
                                        *bound = true;
                                    }
                                    _ => {
                                        return Err(FirrtlError::ClockDomain {
                                            line,
                                            msg: format!(
                                                "`{key}` must be driven by the module clock port"
                                            ),
                                        })
                                    }
                                }
                            }
                            None => {
                                return Err(FirrtlError::ClockDomain {
                                    line,
                                    msg: format!("`{key}` is not a clock port of this scope"),
                                })
                            }
                        }
                        continue;
                    }

                    let tid = self.connect_target(env, target, line)?;
                    let lowered = self.lower_expr(env, expr, line)?;
                    let fitted = self.fit_connect(tid, lowered, target, line)?;
                    if self.assignments[tid].is_some() {
                        return Err(FirrtlError::MultipleDrivers {
                            line,
                            signal: self.signals[tid].name.clone(),
                        });
                    }
                    self.assignments[tid] = Some(fitted);
                }
            }
        }

        for (name, bound) in pending_clocks {
            if !bound {
                return Err(FirrtlError::Undriven { signal: name });
            }
        }
        Ok(())
    }

    /// `Some(key)` when `r` names an instance clock port within this scope.
    fn clock_field(&self, env: &HashMap<String, Entry>, r: &Ref) -> Option<String> {
        let field = r.field.as_ref()?;
        if let Some(Entry::Instance { module, .. }) = env.get(&r.name) {
            let child = &self.ast.modules[*module];
            let port = child.ports.iter().find(|p| &p.name == field)?;
            if port.ty == Ty::Clock {
                return Some(format!("{}.{}", r.name, field));
            }
        }
        None
    }

    fn data_ref(
        &self,
        env: &HashMap<String, Entry>,
        r: &Ref,
        line: u32,
    ) -> Result<SignalId, FirrtlError> {
        match env.get(&r.name) {
            Some(Entry::Data(id)) if r.field.is_none() => Ok(*id),
            Some(Entry::Clock) => Err(FirrtlError::Type {
                line,
                msg: format!("clock `{}` used as a data value", r.name),
            }),
            Some(Entry::Instance { module, prefix }) => {
                let field = r.field.as_ref().expect("validated: instance refs have fields");
                let child = &self.ast.modules[*module];
                let port = child
                    .ports
                    .iter()
                    .find(|p| &p.name == field)
                    .expect("validated: port exists");
                if port.ty == Ty::Clock {
                    return Err(FirrtlError::Type {
                        line,
                        msg: format!("clock `{r}` used as a data value"),
                    });
                }
                let name = format!("{prefix}{field}");
                Ok(self.signal_ids[&name])
            }
            _ => Err(FirrtlError::Syntax {
                line,
                msg: format!("`{}` is not declared", r.name),
            }),
        }
    }

    fn connect_target(
        &self,
        env: &HashMap<String, Entry>,
        target: &Ref,
        line: u32,
    ) -> Result<SignalId, FirrtlError> {
        let id = self.data_ref(env, target, line)?;
        // Instance port wires are SignalKind::Wire, so they stay connectable
        // from the parent; only genuine top-level inputs are rejected.
        match self.signals[id].kind {
            SignalKind::Input => Err(FirrtlError::Type {
                line,
                msg: format!("cannot connect to input port `{target}`"),
            }),
            SignalKind::Node | SignalKind::Constant(_) => Err(FirrtlError::Type {
                line,
                msg: format!("`{target}` is not a connectable target"),
            }),
            _ => Ok(id),
        }
    }

    fn expr_type(&self, e: &NetExpr) -> (u32, bool) {
        match e {
            NetExpr::Ref(id) => (self.signals[*id].width, self.signals[*id].signed),
            NetExpr::Prim { width, signed, .. } => (*width, *signed),
        }
    }

    fn lower_expr(
        &mut self,
        env: &HashMap<String, Entry>,
        expr: &Expr,
        line: u32,
    ) -> Result<NetExpr, FirrtlError> {
        match expr {
            Expr::Lit(lit) => Ok(NetExpr::Ref(self.make_constant(lit))),
            Expr::Ref(r) => Ok(NetExpr::Ref(self.data_ref(env, r, line)?)),
            Expr::Prim { op, args, params } => {
                let lowered: Vec<NetExpr> = args
                    .iter()
                    .map(|a| self.lower_expr(env, a, line))
                    .collect::<Result<_, _>>()?;
                let types: Vec<(u32, bool)> =
                    lowered.iter().map(|a| self.expr_type(a)).collect();
                let (width, signed) = op
                    .infer_type(&types, params)
                    .map_err(|msg| FirrtlError::Type { line, msg })?;
                Ok(NetExpr::Prim {
                    op: *op,
                    args: lowered,
                    params: params.clone(),
                    width,
                    signed,
                })
            }
        }
    }

    /// Connect semantics: same signedness required; a narrower source is
    /// implicitly padded, a wider one is an error.
    fn fit_connect(
        &self,
        target: SignalId,
        expr: NetExpr,
        target_ref: &Ref,
        line: u32,
    ) -> Result<NetExpr, FirrtlError> {
        let (tw, ts) = (self.signals[target].width, self.signals[target].signed);
        let (w, s) = self.expr_type(&expr);
        if s != ts {
            return Err(FirrtlError::Type {
                line,
                msg: format!("signedness mismatch connecting to `{target_ref}`"),
            });
        }
        if w > tw {
            return Err(FirrtlError::Type {
                line,
                msg: format!(
                    "cannot connect {w}-bit source to {tw}-bit target `{target_ref}`"
                ),
            });
        }
        if w == tw {
            Ok(expr)
        } else {
            Ok(NetExpr::Prim {
                op: Opcode::Pad,
                args: vec![expr],
                params: vec![tw],
                width: tw,
                signed: ts,
            })
        }
    }
}
