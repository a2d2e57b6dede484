use crate::error::{Error, Result};
use crate::span::Span;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    Kw(Kw),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Abstract,
    All,
    And,
    As,
    Assert,
    But,
    Check,
    Disj,
    Else,
    Exactly,
    Extends,
    Fact,
    For,
    Fun,
    Iden,
    Iff,
    Implies,
    In,
    Int,
    Let,
    Lone,
    Module,
    No,
    None,
    Not,
    One,
    Open,
    Or,
    Pred,
    Run,
    Set,
    Sig,
    Some,
    Sum,
    This,
    Univ,
    // Recognised only to be rejected with a precise diagnostic.
    Var,
    Always,
    Eventually,
    After,
    Before,
    Historically,
    Once,
    Until,
    Since,
    Releases,
    Triggered,
    Seq,
    Enum,
    Expect,
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("abstract", Kw::Abstract),
    ("all", Kw::All),
    ("and", Kw::And),
    ("as", Kw::As),
    ("assert", Kw::Assert),
    ("but", Kw::But),
    ("check", Kw::Check),
    ("disj", Kw::Disj),
    ("else", Kw::Else),
    ("exactly", Kw::Exactly),
    ("extends", Kw::Extends),
    ("fact", Kw::Fact),
    ("for", Kw::For),
    ("fun", Kw::Fun),
    ("iden", Kw::Iden),
    ("iff", Kw::Iff),
    ("implies", Kw::Implies),
    ("in", Kw::In),
    ("Int", Kw::Int),
    ("let", Kw::Let),
    ("lone", Kw::Lone),
    ("module", Kw::Module),
    ("no", Kw::No),
    ("none", Kw::None),
    ("not", Kw::Not),
    ("one", Kw::One),
    ("open", Kw::Open),
    ("or", Kw::Or),
    ("pred", Kw::Pred),
    ("run", Kw::Run),
    ("set", Kw::Set),
    ("sig", Kw::Sig),
    ("some", Kw::Some),
    ("sum", Kw::Sum),
    ("this", Kw::This),
    ("univ", Kw::Univ),
    ("var", Kw::Var),
    ("always", Kw::Always),
    ("eventually", Kw::Eventually),
    ("after", Kw::After),
    ("before", Kw::Before),
    ("historically", Kw::Historically),
    ("once", Kw::Once),
    ("until", Kw::Until),
    ("since", Kw::Since),
    ("releases", Kw::Releases),
    ("triggered", Kw::Triggered),
    ("seq", Kw::Seq),
    ("enum", Kw::Enum),
    ("expect", Kw::Expect),
];

impl Kw {
    pub fn text(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).unwrap_or("?")
    }

    pub fn is_temporal(self) -> bool {
        matches!(
            self,
            Kw::Var
                | Kw::Always
                | Kw::Eventually
                | Kw::After
                | Kw::Before
                | Kw::Historically
                | Kw::Once
                | Kw::Until
                | Kw::Since
                | Kw::Releases
                | Kw::Triggered
        )
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Kw(k) => write!(f, "`{}`", k.text()),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

// Longest operators first so that prefix matching picks the right one.
const SYMBOLS: &[&str] = &[
    ">>>", "<=>", "->", "=>", "=<", "<=", ">=", "!=", "++", "<:", ":>", "&&", "||", "<<", ">>",
    "{", "}", "[", "]", "(", ")", ",", ":", "|", ".", "~", "^", "*", "#", "+", "-", "&", "=", "<",
    ">", "!", "@", "'", ";", "/",
];

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut line_start = 0usize;
    let span_at = |start: usize, end: usize, line: u32, line_start: usize| {
        Span::new(start, end, line, (start - line_start + 1) as u32)
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") || src[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let start = i;
            let (sl, sls) = (line, line_start);
            i += 2;
            loop {
                if i >= bytes.len() {
                    return Err(Error::parse(span_at(start, i, sl, sls), "unterminated block comment"));
                }
                if src[i..].starts_with("*/") {
                    i += 2;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                    line_start = i + 1;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let span = span_at(start, i, line, line_start);
            let n: i64 = src[start..i]
                .parse()
                .map_err(|_| Error::parse(span, "integer literal too large"))?;
            out.push(Token { tok: Tok::Num(n), span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() {
                let d = bytes[i];
                if d.is_ascii_alphanumeric() || d == b'_' {
                    i += 1;
                } else if d == b'/' && i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphabetic()) {
                    // qualified module path such as util/ordering
                    i += 1;
                } else {
                    break;
                }
            }
            let text = &src[start..i];
            let span = span_at(start, i, line, line_start);
            let tok = match KEYWORDS.iter().find(|(s, _)| *s == text) {
                Some((_, k)) => Tok::Kw(*k),
                None => Tok::Ident(text.to_string()),
            };
            out.push(Token { tok, span });
            continue;
        }
        if c == b'"' {
            return Err(Error::unsupported(span_at(start, start + 1, line, line_start), "string literal"));
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                out.push(Token { tok: Tok::Sym(s), span: span_at(start, i, line, line_start) });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Error::parse(
                    span_at(start, start + ch.len_utf8(), line, line_start),
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    let end = bytes.len();
    out.push(Token { tok: Tok::Eof, span: Span::new(end, end, line, (end - line_start + 1) as u32) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_use_longest_match() {
        assert_eq!(
            toks("a <=> b => c -> d =< e"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<=>"),
                Tok::Ident("b".into()),
                Tok::Sym("=>"),
                Tok::Ident("c".into()),
                Tok::Sym("->"),
                Tok::Ident("d".into()),
                Tok::Sym("=<"),
                Tok::Ident("e".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = lex("-- one\n// two\n/* three\n */ sig A").unwrap();
        assert_eq!(t[0].tok, Tok::Kw(Kw::Sig));
        assert_eq!((t[0].span.line, t[0].span.col), (4, 5));
        assert_eq!(t[1].span.col, 9);
    }

    #[test]
    fn module_paths_are_single_identifiers() {
        assert_eq!(toks("util/ordering")[0], Tok::Ident("util/ordering".into()));
        assert_eq!(toks("a/b")[0], Tok::Ident("a/b".into()));
        assert_eq!(toks("4/2").len(), 4);
    }

    #[test]
    fn bad_character() {
        assert!(matches!(lex("sig $"), Err(Error::Parse { .. })));
    }
}
