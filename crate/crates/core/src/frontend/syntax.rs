//! Untyped surface tree produced by the parser, before name resolution.

use crate::span::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Mult {
    Set,
    Some,
    Lone,
    One,
}

impl Mult {
    pub fn text(self) -> &'static str {
        match self {
            Mult::Set => "set",
            Mult::Some => "some",
            Mult::Lone => "lone",
            Mult::One => "one",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SBin {
    Or,
    And,
    Iff,
    Implies,
    Union,
    Diff,
    Override,
    Inter,
    DomR,
    RanR,
    Join,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SCmp {
    In,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SUn {
    Transpose,
    Closure,
    RClosure,
    Card,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SMultF {
    No,
    Some,
    Lone,
    One,
    Set,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SQuant {
    All,
    Some,
    No,
    One,
    Lone,
    Sum,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NK,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum NK {
    Name(String),
    At(String),
    This,
    Num(i64),
    Univ,
    Iden,
    NoneE,
    IntSig,
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(SBin, Box<Node>, Box<Node>),
    Cmp(SCmp, bool, Box<Node>, Box<Node>),
    Arrow(Box<Node>, Option<Mult>, Option<Mult>, Box<Node>),
    Unary(SUn, Box<Node>),
    MultF(SMultF, Box<Node>),
    IfElse(Box<Node>, Box<Node>, Box<Node>),
    BoxJoin(Box<Node>, Vec<Node>),
    Quant(SQuant, Vec<SDecl>, Box<Node>),
    Let(Vec<(String, Span, Node)>, Box<Node>),
    Compr(Vec<SDecl>, Box<Node>),
    Block(Vec<Node>),
}

#[derive(Clone, Debug)]
pub struct SDecl {
    pub names: Vec<(String, Span)>,
    pub disj: bool,
    pub mult: Option<Mult>,
    pub bound: Node,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum SParent {
    None,
    Extends(String, Span),
    In(Vec<(String, Span)>),
}

#[derive(Clone, Debug)]
pub struct SField {
    pub names: Vec<(String, Span)>,
    pub mult: Option<Mult>,
    pub bound: Node,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SSig {
    pub names: Vec<(String, Span)>,
    pub is_abstract: bool,
    pub mult: Option<Mult>,
    pub parent: SParent,
    pub fields: Vec<SField>,
    pub fact: Option<Node>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SPredFun {
    pub name: String,
    pub receiver: Option<(String, Span)>,
    pub params: Vec<SDecl>,
    pub ret: Option<(Option<Mult>, Node)>,
    pub body: Node,
    pub is_fun: bool,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SFact {
    pub name: Option<String>,
    pub body: Node,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SAssert {
    pub name: String,
    pub body: Node,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum CmdTarget {
    Name(String, Span),
    Block(Node),
}

#[derive(Clone, Debug, Default)]
pub struct SScope {
    pub default: Option<u32>,
    pub sigs: Vec<(String, u32, bool, Span)>,
    pub bitwidth: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct SCmd {
    pub label: Option<String>,
    pub check: bool,
    pub target: CmdTarget,
    pub scope: SScope,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct SOpen {
    pub path: String,
    pub args: Vec<(String, Span)>,
    pub alias: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct SModel {
    pub sigs: Vec<SSig>,
    pub facts: Vec<SFact>,
    pub defs: Vec<SPredFun>,
    pub asserts: Vec<SAssert>,
    pub cmds: Vec<SCmd>,
    pub opens: Vec<SOpen>,
}
