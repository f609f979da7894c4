//! Prefix-notation reader.
//!
//! ```text
//! formula := "and" "(" formula ("," formula)* ")"
//!          | "or"  "(" formula ("," formula)* ")"
//!          | ident "(" term ("," term)* ")"
//! term    := ident            -- capitalised identifiers are proper names
//! ident   := [A-Za-z_][A-Za-z0-9_]*
//! ```

use thiserror::Error;

use super::{Atom, Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula syntax error at byte {offset}: {message}")]
pub struct ParseFormulaError {
    pub offset: usize,
    pub message: String,
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn error(&self, message: impl Into<String>) -> ParseFormulaError {
        ParseFormulaError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, want: char) -> Result<(), ParseFormulaError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<&'a str, ParseFormulaError> {
        self.skip_ws();
        let start = self.pos;
        for (i, c) in self.text[start..].char_indices() {
            let ok = c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit());
            if !ok {
                break;
            }
            self.pos = start + i + c.len_utf8();
        }
        if self.pos == start {
            Err(self.error("expected identifier"))
        } else {
            Ok(&self.text[start..self.pos])
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseFormulaError> {
        let head = self.ident()?;
        self.expect('(')?;
        match head {
            "and" | "or" => {
                let mut children = vec![self.formula()?];
                while self.peek() == Some(',') {
                    self.pos += 1;
                    children.push(self.formula()?);
                }
                self.expect(')')?;
                Ok(if head == "and" {
                    Formula::And(children)
                } else {
                    Formula::Or(children)
                })
            }
            predicate => {
                let mut args = vec![self.term()?];
                while self.peek() == Some(',') {
                    self.pos += 1;
                    args.push(self.term()?);
                }
                self.expect(')')?;
                Ok(Formula::Atom(Atom::new(predicate, args)))
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseFormulaError> {
        let id = self.ident()?;
        Ok(if id.starts_with(|c: char| c.is_ascii_uppercase()) {
            Term::Name(id.to_string())
        } else {
            Term::Var(id.to_string())
        })
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseFormulaError> {
    let mut r = Reader { text, pos: 0 };
    let f = r.formula()?;
    if r.peek().is_some() {
        return Err(r.error("trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_connectives() {
        let f = parse("or(chair(x), and( bag(y) , telescope(z) ))").unwrap();
        assert_eq!(f.to_string(), "or(chair(x), and(bag(y), telescope(z)))");
    }

    #[test]
    fn capitalised_terms_are_names() {
        let f = parse("move(Claire,x)").unwrap();
        assert_eq!(f.atoms()[0].args, vec![Term::name("Claire"), Term::var("x")]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("and(chair(x)").is_err());
        assert!(parse("chair(x) extra").is_err());
        assert!(parse("chair()").is_err());
        assert!(parse("").is_err());
    }
}
