use super::lexer::{lex, Kw, Tok, Token};
use super::syntax::*;
use crate::error::{Error, Result};
use crate::span::Span;

pub fn parse_surface(src: &str) -> Result<SModel> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    p.model()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn kw_mult(k: Kw) -> Option<Mult> {
    match k {
        Kw::Set => Some(Mult::Set),
        Kw::Some => Some(Mult::Some),
        Kw::Lone => Some(Mult::Lone),
        Kw::One => Some(Mult::One),
        _ => None,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: Kw) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Kw) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        let t = &self.toks[self.pos];
        if let Tok::Kw(k) = t.tok {
            if k.is_temporal() {
                return Err(Error::unsupported(t.span, format!("temporal operator `{}`", k.text())));
            }
        }
        if t.tok == Tok::Sym("'") {
            return Err(Error::unsupported(t.span, "temporal operator `'`"));
        }
        Err(Error::Parse {
            span: t.span,
            message: format!("unexpected {}, expected {}", t.tok, expected.join(" or ")),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<Span> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            self.fail(&[&format!("`{s}`")])
        }
    }

    fn ident(&mut self) -> Result<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn number(&mut self) -> Result<u32> {
        match self.peek().clone() {
            Tok::Num(n) if n >= 0 && n <= u32::MAX as i64 => {
                self.bump();
                Ok(n as u32)
            }
            _ => self.fail(&["number"]),
        }
    }

    fn model(&mut self) -> Result<SModel> {
        let mut m = SModel::default();
        loop {
            let start = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Kw(Kw::Module) => {
                    self.bump();
                    self.ident()?;
                    if self.eat_sym("[") {
                        while !self.eat_sym("]") {
                            if *self.peek() == Tok::Eof {
                                return self.fail(&["`]`"]);
                            }
                            self.bump();
                        }
                    }
                }
                Tok::Kw(Kw::Open) => m.opens.push(self.open()?),
                Tok::Kw(Kw::Abstract | Kw::Sig | Kw::One | Kw::Lone | Kw::Some) => {
                    m.sigs.push(self.sig()?)
                }
                Tok::Kw(Kw::Var) => {
                    return Err(Error::unsupported(start, "temporal operator `var`"));
                }
                Tok::Kw(Kw::Enum) => return Err(Error::unsupported(start, "enum declaration")),
                Tok::Kw(Kw::Fact) => {
                    self.bump();
                    let name = match self.peek().clone() {
                        Tok::Ident(s) => {
                            self.bump();
                            Some(s)
                        }
                        _ => None,
                    };
                    let body = self.block()?;
                    m.facts.push(SFact { name, span: start.to(body.span), body });
                }
                Tok::Kw(Kw::Assert) => {
                    self.bump();
                    let (name, _) = self.ident()?;
                    let body = self.block()?;
                    m.asserts.push(SAssert { name, span: start.to(body.span), body });
                }
                Tok::Kw(Kw::Pred) => m.defs.push(self.predfun(false)?),
                Tok::Kw(Kw::Fun) => m.defs.push(self.predfun(true)?),
                Tok::Kw(Kw::Run | Kw::Check) => m.cmds.push(self.command(None)?),
                Tok::Ident(label) if *self.peek_at(1) == Tok::Sym(":") => {
                    self.bump();
                    self.bump();
                    if !(self.is_kw(Kw::Run) || self.is_kw(Kw::Check)) {
                        return self.fail(&["`run`", "`check`"]);
                    }
                    m.cmds.push(self.command(Some(label))?);
                }
                _ => return self.fail(&["declaration"]),
            }
        }
        Ok(m)
    }

    fn open(&mut self) -> Result<SOpen> {
        let start = self.bump().span;
        let (path, _) = self.ident()?;
        let mut args = Vec::new();
        if self.eat_sym("[") {
            loop {
                args.push(self.ident()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("]")?;
        }
        let alias = if self.eat_kw(Kw::As) { Some(self.ident()?.0) } else { None };
        Ok(SOpen { path, args, alias, span: start.to(self.prev_span()) })
    }

    fn sig(&mut self) -> Result<SSig> {
        let start = self.span();
        let mut is_abstract = false;
        let mut mult = None;
        loop {
            match self.peek() {
                Tok::Kw(Kw::Abstract) => {
                    self.bump();
                    is_abstract = true;
                }
                Tok::Kw(k) if kw_mult(*k).is_some() && *k != Kw::Set => {
                    mult = kw_mult(*k);
                    self.bump();
                }
                Tok::Kw(Kw::Var) => return Err(Error::unsupported(self.span(), "temporal operator `var`")),
                _ => break,
            }
        }
        if !self.eat_kw(Kw::Sig) {
            return self.fail(&["`sig`"]);
        }
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        let parent = if self.eat_kw(Kw::Extends) {
            let (p, sp) = self.ident()?;
            SParent::Extends(p, sp)
        } else if self.eat_kw(Kw::In) || self.eat_sym("=") {
            let mut ps = vec![self.sig_ref()?];
            while self.eat_sym("+") {
                ps.push(self.sig_ref()?);
            }
            SParent::In(ps)
        } else {
            SParent::None
        };
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        while !self.is_sym("}") {
            fields.push(self.field()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        let fact = if self.is_sym("{") { Some(self.block()?) } else { None };
        Ok(SSig { names, is_abstract, mult, parent, fields, fact, span: start.to(self.prev_span()) })
    }

    fn sig_ref(&mut self) -> Result<(String, Span)> {
        if self.is_kw(Kw::Int) {
            let sp = self.bump().span;
            return Ok(("Int".into(), sp));
        }
        if self.is_kw(Kw::Univ) {
            let sp = self.bump().span;
            return Ok(("univ".into(), sp));
        }
        self.ident()
    }

    fn field(&mut self) -> Result<SField> {
        let start = self.span();
        if self.is_kw(Kw::Var) {
            return Err(Error::unsupported(start, "temporal operator `var`"));
        }
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        self.expect_sym(":")?;
        if self.is_kw(Kw::Disj) {
            return Err(Error::unsupported(self.span(), "disj field declaration"));
        }
        let mult = self.opt_mult_not_arrow();
        let bound = self.expr_shift()?;
        Ok(SField { names, mult, span: start.to(bound.span), bound })
    }

    /// Consumes a multiplicity keyword unless it is the left multiplicity of an arrow.
    fn opt_mult_not_arrow(&mut self) -> Option<Mult> {
        if let Tok::Kw(k) = self.peek() {
            if let Some(m) = kw_mult(*k) {
                if *self.peek_at(1) != Tok::Sym("->") {
                    self.bump();
                    return Some(m);
                }
            }
        }
        None
    }

    fn predfun(&mut self, is_fun: bool) -> Result<SPredFun> {
        let start = self.bump().span;
        let mut receiver = None;
        let (mut name, mut nsp) = self.sig_ref()?;
        if self.eat_sym(".") {
            receiver = Some((name, nsp));
            let (n2, s2) = self.ident()?;
            name = n2;
            nsp = s2;
        }
        let _ = nsp;
        let mut params = Vec::new();
        let close = if self.eat_sym("[") {
            Some("]")
        } else if self.eat_sym("(") {
            Some(")")
        } else {
            None
        };
        if let Some(close) = close {
            while !self.is_sym(close) {
                params.push(self.decl()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            if !self.eat_sym(close) {
                return self.fail(&[&format!("`{close}`")]);
            }
        }
        let ret = if is_fun {
            self.expect_sym(":")?;
            let m = self.opt_mult_not_arrow();
            Some((m, self.expr_shift()?))
        } else {
            None
        };
        let body = self.block()?;
        Ok(SPredFun { name, receiver, params, ret, span: start.to(body.span), body, is_fun })
    }

    fn command(&mut self, label: Option<String>) -> Result<SCmd> {
        let start = self.span();
        let check = self.is_kw(Kw::Check);
        self.bump();
        let target = if self.is_sym("{") {
            CmdTarget::Block(self.block()?)
        } else {
            let (n, sp) = self.ident()?;
            CmdTarget::Name(n, sp)
        };
        let mut scope = SScope::default();
        if self.eat_kw(Kw::For) {
            let typescope_next = |p: &Parser| {
                p.is_kw(Kw::Exactly)
                    || (matches!(p.peek(), Tok::Num(_))
                        && matches!(p.peek_at(1), Tok::Ident(_) | Tok::Kw(Kw::Int | Kw::Seq))
                        && *p.peek_at(2) != Tok::Sym(":"))
            };
            if typescope_next(self) {
                self.typescopes(&mut scope)?;
            } else {
                scope.default = Some(self.number()?);
                if self.eat_kw(Kw::But) {
                    self.typescopes(&mut scope)?;
                }
            }
        }
        if self.eat_kw(Kw::Expect) {
            self.number()?;
        }
        Ok(SCmd { label, check, target, scope, span: start.to(self.prev_span()) })
    }

    fn typescopes(&mut self, scope: &mut SScope) -> Result<()> {
        loop {
            let sp = self.span();
            let exact = self.eat_kw(Kw::Exactly);
            let n = self.number()?;
            match self.peek().clone() {
                Tok::Kw(Kw::Int) => {
                    self.bump();
                    scope.bitwidth = Some(n);
                }
                Tok::Ident(s) if s == "int" => {
                    self.bump();
                    scope.bitwidth = Some(n);
                }
                Tok::Kw(Kw::Seq) => return Err(Error::unsupported(self.span(), "seq scope")),
                Tok::Ident(s) => {
                    let end = self.bump().span;
                    scope.sigs.push((s, n, exact, sp.to(end)));
                }
                _ => return self.fail(&["signature name"]),
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(())
    }

    fn block(&mut self) -> Result<Node> {
        let start = self.expect_sym("{")?;
        let mut items = Vec::new();
        while !self.is_sym("}") {
            if *self.peek() == Tok::Eof {
                return self.fail(&["`}`"]);
            }
            items.push(self.expr()?);
        }
        let end = self.bump().span;
        Ok(Node { kind: NK::Block(items), span: start.to(end) })
    }

    fn decl(&mut self) -> Result<SDecl> {
        let start = self.span();
        let mut disj = self.eat_kw(Kw::Disj);
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        self.expect_sym(":")?;
        if self.eat_kw(Kw::Disj) {
            disj = true;
        }
        let mult = self.opt_mult_not_arrow();
        let bound = self.expr_shift()?;
        Ok(SDecl { names, disj, mult, span: start.to(bound.span), bound })
    }

    fn decls(&mut self) -> Result<Vec<SDecl>> {
        let mut ds = vec![self.decl()?];
        while self.eat_sym(",") {
            ds.push(self.decl()?);
        }
        Ok(ds)
    }

    /// True when the tokens after a quantifier keyword look like `[disj] x, y:`.
    fn quant_lookahead(&self) -> bool {
        let mut i = 1;
        if *self.peek_at(i) == Tok::Kw(Kw::Disj) {
            i += 1;
        }
        loop {
            if !matches!(self.peek_at(i), Tok::Ident(_)) {
                return false;
            }
            i += 1;
            match self.peek_at(i) {
                Tok::Sym(":") => return true,
                Tok::Sym(",") => i += 1,
                _ => return false,
            }
        }
    }

    fn body(&mut self) -> Result<Node> {
        if self.eat_sym("|") {
            self.expr()
        } else if self.is_sym("{") {
            self.block()
        } else {
            self.fail(&["`|`", "`{`"])
        }
    }

    pub fn expr(&mut self) -> Result<Node> {
        self.expr_or()
    }

    fn bin(op: SBin, a: Node, b: Node) -> Node {
        let span = a.span.to(b.span);
        Node { kind: NK::Bin(op, Box::new(a), Box::new(b)), span }
    }

    fn expr_or(&mut self) -> Result<Node> {
        let mut a = self.expr_iff()?;
        while self.eat_sym("||") || self.eat_kw(Kw::Or) {
            let b = self.expr_iff()?;
            a = Self::bin(SBin::Or, a, b);
        }
        Ok(a)
    }

    fn expr_iff(&mut self) -> Result<Node> {
        let mut a = self.expr_implies()?;
        while self.eat_sym("<=>") || self.eat_kw(Kw::Iff) {
            let b = self.expr_implies()?;
            a = Self::bin(SBin::Iff, a, b);
        }
        Ok(a)
    }

    fn expr_implies(&mut self) -> Result<Node> {
        let a = self.expr_and()?;
        if self.eat_sym("=>") || self.eat_kw(Kw::Implies) {
            let b = self.expr_implies()?;
            if self.eat_kw(Kw::Else) {
                let c = self.expr_implies()?;
                let span = a.span.to(c.span);
                return Ok(Node { kind: NK::IfElse(Box::new(a), Box::new(b), Box::new(c)), span });
            }
            return Ok(Self::bin(SBin::Implies, a, b));
        }
        Ok(a)
    }

    fn expr_and(&mut self) -> Result<Node> {
        let mut a = self.expr_not()?;
        while self.eat_sym("&&") || self.eat_kw(Kw::And) {
            let b = self.expr_not()?;
            a = Self::bin(SBin::And, a, b);
        }
        Ok(a)
    }

    fn expr_not(&mut self) -> Result<Node> {
        let start = self.span();
        if self.eat_sym("!") || self.eat_kw(Kw::Not) {
            let a = self.expr_not()?;
            let span = start.to(a.span);
            return Ok(Node { kind: NK::Not(Box::new(a)), span });
        }
        self.expr_cmp()
    }

    fn cmp_op(&self, at: usize) -> Option<(SCmp, bool)> {
        match self.peek_at(at) {
            Tok::Kw(Kw::In) => Some((SCmp::In, false)),
            Tok::Sym("=") => Some((SCmp::Eq, false)),
            Tok::Sym("!=") => Some((SCmp::Eq, true)),
            Tok::Sym("<") => Some((SCmp::Lt, false)),
            Tok::Sym(">") => Some((SCmp::Gt, false)),
            Tok::Sym("=<") | Tok::Sym("<=") => Some((SCmp::Le, false)),
            Tok::Sym(">=") => Some((SCmp::Ge, false)),
            _ => None,
        }
    }

    fn expr_cmp(&mut self) -> Result<Node> {
        let start = self.span();
        if let Tok::Kw(k) = self.peek() {
            let m = match k {
                Kw::No => Some(SMultF::No),
                Kw::Some => Some(SMultF::Some),
                Kw::Lone => Some(SMultF::Lone),
                Kw::One => Some(SMultF::One),
                Kw::Set => Some(SMultF::Set),
                _ => None,
            };
            if let Some(m) = m {
                if !self.quant_lookahead() {
                    self.bump();
                    let e = self.expr_shift()?;
                    let span = start.to(e.span);
                    return Ok(Node { kind: NK::MultF(m, Box::new(e)), span });
                }
            }
        }
        let a = self.expr_shift()?;
        let negated_prefix = (self.is_sym("!") || self.is_kw(Kw::Not)) && self.cmp_op(1).is_some();
        if negated_prefix {
            self.bump();
        }
        if let Some((op, neg)) = self.cmp_op(0) {
            self.bump();
            let b = self.expr_shift()?;
            let span = a.span.to(b.span);
            return Ok(Node { kind: NK::Cmp(op, neg ^ negated_prefix, Box::new(a), Box::new(b)), span });
        }
        if negated_prefix {
            return self.fail(&["comparison operator"]);
        }
        Ok(a)
    }

    fn expr_shift(&mut self) -> Result<Node> {
        let a = self.expr_union()?;
        if self.is_sym("<<") || self.is_sym(">>") || self.is_sym(">>>") {
            return Err(Error::unsupported(self.span(), "bitshift operator"));
        }
        Ok(a)
    }

    fn expr_union(&mut self) -> Result<Node> {
        let mut a = self.expr_card()?;
        loop {
            let op = if self.eat_sym("+") {
                SBin::Union
            } else if self.eat_sym("-") {
                SBin::Diff
            } else {
                break;
            };
            let b = self.expr_card()?;
            a = Self::bin(op, a, b);
        }
        Ok(a)
    }

    fn expr_card(&mut self) -> Result<Node> {
        let start = self.span();
        if self.eat_sym("#") {
            let a = self.expr_card()?;
            let span = start.to(a.span);
            return Ok(Node { kind: NK::Unary(SUn::Card, Box::new(a)), span });
        }
        self.expr_override()
    }

    fn expr_override(&mut self) -> Result<Node> {
        let mut a = self.expr_inter()?;
        while self.eat_sym("++") {
            let b = self.expr_inter()?;
            a = Self::bin(SBin::Override, a, b);
        }
        Ok(a)
    }

    fn expr_inter(&mut self) -> Result<Node> {
        let mut a = self.expr_arrow()?;
        while self.eat_sym("&") {
            let b = self.expr_arrow()?;
            a = Self::bin(SBin::Inter, a, b);
        }
        Ok(a)
    }

    fn expr_arrow(&mut self) -> Result<Node> {
        let a = self.expr_domr()?;
        let lm = match self.peek() {
            Tok::Kw(k) if kw_mult(*k).is_some() && *self.peek_at(1) == Tok::Sym("->") => {
                let m = kw_mult(*k);
                self.bump();
                m
            }
            _ => None,
        };
        if lm.is_some() || self.is_sym("->") {
            self.expect_sym("->")?;
            let rm = match self.peek() {
                Tok::Kw(k) if kw_mult(*k).is_some() => {
                    let m = kw_mult(*k);
                    self.bump();
                    m
                }
                _ => None,
            };
            let b = self.expr_arrow()?;
            let span = a.span.to(b.span);
            return Ok(Node { kind: NK::Arrow(Box::new(a), lm, rm, Box::new(b)), span });
        }
        Ok(a)
    }

    fn expr_domr(&mut self) -> Result<Node> {
        let mut a = self.expr_ranr()?;
        while self.eat_sym("<:") {
            let b = self.expr_ranr()?;
            a = Self::bin(SBin::DomR, a, b);
        }
        Ok(a)
    }

    fn expr_ranr(&mut self) -> Result<Node> {
        let mut a = self.expr_postfix()?;
        while self.eat_sym(":>") {
            let b = self.expr_postfix()?;
            a = Self::bin(SBin::RanR, a, b);
        }
        Ok(a)
    }

    fn expr_postfix(&mut self) -> Result<Node> {
        let mut a = self.expr_unary()?;
        loop {
            if self.eat_sym(".") {
                let b = self.expr_unary()?;
                a = Self::bin(SBin::Join, a, b);
            } else if self.is_sym("[") {
                self.bump();
                let mut args = Vec::new();
                while !self.is_sym("]") {
                    args.push(self.expr()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                let end = self.expect_sym("]")?;
                let span = a.span.to(end);
                a = Node { kind: NK::BoxJoin(Box::new(a), args), span };
            } else if self.is_sym("'") {
                return Err(Error::unsupported(self.span(), "temporal operator `'`"));
            } else {
                break;
            }
        }
        Ok(a)
    }

    fn expr_unary(&mut self) -> Result<Node> {
        let start = self.span();
        let op = if self.eat_sym("~") {
            Some(SUn::Transpose)
        } else if self.eat_sym("^") {
            Some(SUn::Closure)
        } else if self.eat_sym("*") {
            Some(SUn::RClosure)
        } else {
            None
        };
        if let Some(op) = op {
            let a = self.expr_unary()?;
            let span = start.to(a.span);
            return Ok(Node { kind: NK::Unary(op, Box::new(a)), span });
        }
        self.primary()
    }

    fn leaf(&mut self, kind: NK) -> Node {
        let span = self.bump().span;
        Node { kind, span }
    }

    fn primary(&mut self) -> Result<Node> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => Ok(self.leaf(NK::Name(s))),
            Tok::Num(n) => Ok(self.leaf(NK::Num(n))),
            Tok::Kw(Kw::This) => Ok(self.leaf(NK::This)),
            Tok::Kw(Kw::Univ) => Ok(self.leaf(NK::Univ)),
            Tok::Kw(Kw::Iden) => Ok(self.leaf(NK::Iden)),
            Tok::Kw(Kw::None) => Ok(self.leaf(NK::NoneE)),
            Tok::Kw(Kw::Int) => Ok(self.leaf(NK::IntSig)),
            Tok::Kw(Kw::Sum) if *self.peek_at(1) == Tok::Sym("[") => Ok(self.leaf(NK::Name("sum".into()))),
            Tok::Kw(Kw::Disj) if *self.peek_at(1) == Tok::Sym("[") => {
                Ok(self.leaf(NK::Name("disj".into())))
            }
            Tok::Sym("@") => {
                self.bump();
                let (n, sp) = self.ident()?;
                Ok(Node { kind: NK::At(n), span: start.to(sp) })
            }
            Tok::Sym("-") => {
                self.bump();
                let a = self.expr_unary()?;
                let span = start.to(a.span);
                Ok(Node { kind: NK::Neg(Box::new(a)), span })
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                let is_compr = matches!(self.peek_at(1), Tok::Ident(_) | Tok::Kw(Kw::Disj)) && {
                    let save = self.pos;
                    let r = self.quant_lookahead();
                    self.pos = save;
                    r
                };
                if is_compr {
                    self.bump();
                    let ds = self.decls()?;
                    let body = if self.eat_sym("|") {
                        self.expr()?
                    } else {
                        Node { kind: NK::Block(vec![]), span: self.span() }
                    };
                    let end = self.expect_sym("}")?;
                    Ok(Node { kind: NK::Compr(ds, Box::new(body)), span: start.to(end) })
                } else {
                    self.block()
                }
            }
            Tok::Kw(Kw::Let) => {
                self.bump();
                let mut binds = Vec::new();
                loop {
                    let (n, sp) = self.ident()?;
                    self.expect_sym("=")?;
                    let e = self.expr()?;
                    binds.push((n, sp, e));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                let body = self.body()?;
                let span = start.to(body.span);
                Ok(Node { kind: NK::Let(binds, Box::new(body)), span })
            }
            Tok::Kw(k @ (Kw::All | Kw::Some | Kw::No | Kw::One | Kw::Lone | Kw::Sum)) if self.quant_lookahead() => {
                self.bump();
                let q = match k {
                    Kw::All => SQuant::All,
                    Kw::Some => SQuant::Some,
                    Kw::No => SQuant::No,
                    Kw::One => SQuant::One,
                    Kw::Lone => SQuant::Lone,
                    _ => SQuant::Sum,
                };
                let ds = self.decls()?;
                let body = self.body()?;
                let span = start.to(body.span);
                Ok(Node { kind: NK::Quant(q, ds, Box::new(body)), span })
            }
            Tok::Kw(Kw::Seq) => Err(Error::unsupported(start, "seq")),
            _ => self.fail(&["expression"]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_expr(s: &str) -> Node {
        let toks = lex(s).unwrap();
        let mut p = Parser { toks, pos: 0 };
        p.expr().unwrap()
    }

    #[test]
    fn join_binds_tighter_than_union() {
        let n = parse_expr("a + b.c");
        assert!(matches!(n.kind, NK::Bin(SBin::Union, _, _)));
    }

    #[test]
    fn arrow_multiplicities() {
        let n = parse_expr("A one -> lone B");
        match n.kind {
            NK::Arrow(_, Some(Mult::One), Some(Mult::Lone), _) => {}
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn quantifier_vs_multiplicity() {
        assert!(matches!(parse_expr("some x: A | x in B").kind, NK::Quant(SQuant::Some, _, _)));
        assert!(matches!(parse_expr("some A").kind, NK::MultF(SMultF::Some, _)));
        assert!(matches!(parse_expr("{x: A | some x}").kind, NK::Compr(_, _)));
        assert!(matches!(parse_expr("{ some A }").kind, NK::Block(_)));
    }

    #[test]
    fn negated_comparisons() {
        assert!(matches!(parse_expr("a not in b").kind, NK::Cmp(SCmp::In, true, _, _)));
        assert!(matches!(parse_expr("a !in b").kind, NK::Cmp(SCmp::In, true, _, _)));
        assert!(matches!(parse_expr("a != b").kind, NK::Cmp(SCmp::Eq, true, _, _)));
    }

    #[test]
    fn labelled_command_after_default_scope() {
        let m = parse_surface("sig A {}\nrun { some A } for 3\nc1: check { no A } for 2").unwrap();
        assert_eq!(m.cmds.len(), 2);
        assert_eq!(m.cmds[1].label.as_deref(), Some("c1"));
    }

    #[test]
    fn implies_else() {
        assert!(matches!(parse_expr("a => b else c").kind, NK::IfElse(_, _, _)));
    }

    #[test]
    fn scopes() {
        let m = parse_surface("sig A {} sig B {} run {} for 3 but exactly 2 B, 5 Int").unwrap();
        let s = &m.cmds[0].scope;
        assert_eq!(s.default, Some(3));
        assert_eq!(s.sigs[0].0, "B");
        assert!(s.sigs[0].2);
        assert_eq!(s.bitwidth, Some(5));
        let m = parse_surface("sig A {} run {} for 2 A").unwrap();
        assert_eq!(m.cmds[0].scope.default, None);
        assert_eq!(m.cmds[0].scope.sigs[0].1, 2);
    }

    #[test]
    fn temporal_rejected() {
        let e = parse_surface("sig A {} fact { always some A }").unwrap_err();
        assert!(matches!(e, Error::Unsupported { .. }), "{e}");
        let e = parse_surface("var sig A {}").unwrap_err();
        assert!(matches!(e, Error::Unsupported { .. }));
    }

    #[test]
    fn bitshift_rejected() {
        let e = parse_surface("sig A {} fact { 1 << 2 = 4 }").unwrap_err();
        assert!(matches!(e, Error::Unsupported { .. }));
    }
}
