use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses a sequence of s-expressions. Quoted symbols keep their bars; comments are skipped.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>> {
    let cs: Vec<char> = text.chars().collect();
    let mut stack: Vec<Vec<Sexp>> = vec![vec![]];
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            ';' => {
                while i < cs.len() && cs[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(vec![]);
                i += 1;
            }
            ')' => {
                let done = stack.pop().filter(|_| !stack.is_empty()).ok_or_else(|| Error::ModelParse("unbalanced ')'".into()))?;
                stack.last_mut().unwrap().push(Sexp::List(done));
                i += 1;
            }
            '|' | '"' => {
                let start = i;
                i += 1;
                while i < cs.len() && cs[i] != c {
                    i += 1;
                }
                if i == cs.len() {
                    return Err(Error::ModelParse("unterminated quoted token".into()));
                }
                i += 1;
                stack.last_mut().unwrap().push(Sexp::Atom(cs[start..i].iter().collect()));
            }
            _ => {
                let start = i;
                while i < cs.len() && !cs[i].is_whitespace() && !"()|\";".contains(cs[i]) {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(cs[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(Error::ModelParse("unbalanced '('".into()));
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_and_quoted() {
        let s = parse_sexps("((|a b| (- 3)) (x true)) ; c\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].to_string(), "((|a b| (- 3)) (x true))");
        assert!(parse_sexps("(a").is_err());
        assert!(parse_sexps("a)").is_err());
    }
}
