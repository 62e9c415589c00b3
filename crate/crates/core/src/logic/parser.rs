//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula  := disj ( "->" formula )?        right-associative
//! disj     := conj ( "|" conj )*
//! conj     := unary ( "&" unary )*
//! unary    := "!" unary | primary
//! primary  := IDENT | QUOTED | "(" formula ")"
//! ```

use super::{AtomRegistry, Formula, LogicError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'!' => {
                out.push((i, Tok::Not));
                i += 1;
            }
            b'&' => {
                out.push((i, Tok::And));
                i += 1;
            }
            b'|' => {
                out.push((i, Tok::Or));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((i, Tok::Arrow));
                i += 2;
            }
            b'"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match bytes.get(i) {
                        None => {
                            return Err(LogicError::Syntax {
                                offset: start,
                                message: "unterminated string".into(),
                            })
                        }
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(b'\\') if matches!(bytes.get(i + 1), Some(b'"' | b'\\')) => {
                            s.push(bytes[i + 1] as char);
                            i += 2;
                        }
                        Some(_) => {
                            // Copy one UTF-8 scalar.
                            let ch = text[i..].chars().next().expect("in bounds");
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                out.push((start, Tok::Quoted(s)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                let ch = text[i..].chars().next().expect("in bounds");
                return Err(LogicError::Syntax {
                    offset: i,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        }
    }
    Ok(out)
}

enum Atoms<'r> {
    Fixed(&'r AtomRegistry),
    Registering(&'r mut AtomRegistry),
}

impl Atoms<'_> {
    fn registry(&self) -> &AtomRegistry {
        match self {
            Atoms::Fixed(r) => r,
            Atoms::Registering(r) => r,
        }
    }

    fn by_id(&mut self, id: &str) -> Result<Formula, LogicError> {
        if let Ok(f) = self.registry().atom(id) {
            return Ok(f);
        }
        match self {
            Atoms::Fixed(_) => Err(LogicError::UnknownAtom(id.to_string())),
            Atoms::Registering(r) => {
                r.register(id, id)?;
                r.atom(id)
            }
        }
    }

    fn by_surface(&mut self, surface: &str) -> Result<Formula, LogicError> {
        if let Some(a) = self.registry().by_surface(surface) {
            return Ok(Formula::atom(a.id.clone(), a.surface.clone()));
        }
        match self {
            Atoms::Fixed(_) => Err(LogicError::UnknownAtom(format!("{surface:?}"))),
            Atoms::Registering(r) => {
                let id = r.fresh_id_for(surface);
                r.register(id.clone(), surface)?;
                r.atom(&id)
            }
        }
    }
}

struct Parser<'r> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    atoms: Atoms<'r>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                self.atoms.by_id(&id)
            }
            Some(Tok::Quoted(surface)) => {
                self.pos += 1;
                self.atoms.by_surface(&surface)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.error("expected an atom, '!' or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn run(mut self) -> Result<Formula, LogicError> {
        let f = self.formula()?;
        if self.pos != self.toks.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(f)
    }
}

/// Parses `text` against a fixed registry. Unknown atoms are an error.
pub fn parse_formula(text: &str, registry: &AtomRegistry) -> Result<Formula, LogicError> {
    Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        atoms: Atoms::Fixed(registry),
    }
    .run()
}

/// Parses `text`, registering unknown atoms as it goes. A bare identifier is
/// registered with itself as surface; a quoted string gets a derived id.
pub fn parse_formula_registering(
    text: &str,
    registry: &mut AtomRegistry,
) -> Result<Formula, LogicError> {
    Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        atoms: Atoms::Registering(registry),
    }
    .run()
}
