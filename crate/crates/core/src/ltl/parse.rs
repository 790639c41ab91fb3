//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence, tightest to loosest: unary `! X G F`, then `U`
//! (right-associative), `&` (left), `|` (left), `->` (right). Unicode
//! aliases `¬ ∧ ∨ →` are accepted.

use super::{Formula, LtlError};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Globally,
    Finally,
    LParen,
    RParen,
}

struct Lexer;

impl Lexer {
    fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, LtlError> {
        let mut tokens = Vec::new();
        let mut chars = text.char_indices().peekable();
        while let Some(&(pos, ch)) = chars.peek() {
            match ch {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '(' => {
                    chars.next();
                    tokens.push((pos, Token::LParen));
                }
                ')' => {
                    chars.next();
                    tokens.push((pos, Token::RParen));
                }
                '!' | '¬' => {
                    chars.next();
                    tokens.push((pos, Token::Not));
                }
                '&' | '∧' => {
                    chars.next();
                    tokens.push((pos, Token::And));
                }
                '|' | '∨' => {
                    chars.next();
                    tokens.push((pos, Token::Or));
                }
                '→' => {
                    chars.next();
                    tokens.push((pos, Token::Implies));
                }
                '-' => {
                    chars.next();
                    match chars.peek() {
                        Some(&(_, '>')) => {
                            chars.next();
                            tokens.push((pos, Token::Implies));
                        }
                        _ => {
                            return Err(LtlError::UnknownToken {
                                position: pos,
                                token: "-".into(),
                            })
                        }
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut ident = String::new();
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            ident.push(c);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    let token = match ident.as_str() {
                        "true" => Token::True,
                        "false" => Token::False,
                        "X" => Token::Next,
                        "U" => Token::Until,
                        "G" => Token::Globally,
                        "F" => Token::Finally,
                        _ => Token::Ident(ident),
                    };
                    tokens.push((pos, token));
                }
                other => {
                    return Err(LtlError::UnknownToken {
                        position: pos,
                        token: other.to_string(),
                    })
                }
            }
        }
        Ok(tokens)
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|(_, t)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> LtlError {
        LtlError::Syntax { position: self.position(), message: message.into() }
    }

    // implies := or ('->' implies)?          (right-associative)
    fn parse_implies(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.parse_or()?;
        if self.peek() == Some(&Token::Implies) {
            self.bump();
            let rhs = self.parse_implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    // or := and ('|' and)*                   (left-associative)
    fn parse_or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some(&Token::Or) {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    // and := until ('&' until)*              (left-associative)
    fn parse_and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.parse_until()?;
        while self.peek() == Some(&Token::And) {
            self.bump();
            let rhs = self.parse_until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // until := unary ('U' until)?            (right-associative)
    fn parse_until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.parse_unary()?;
        if self.peek() == Some(&Token::Until) {
            self.bump();
            let rhs = self.parse_until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Formula, LtlError> {
        match self.peek() {
            Some(Token::Not) => {
                self.bump();
                Ok(Formula::not(self.parse_unary()?))
            }
            Some(Token::Next) => {
                self.bump();
                Ok(Formula::next(self.parse_unary()?))
            }
            Some(Token::Globally) => {
                self.bump();
                Ok(Formula::globally(self.parse_unary()?))
            }
            Some(Token::Finally) => {
                self.bump();
                Ok(Formula::finally(self.parse_unary()?))
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Formula, LtlError> {
        match self.bump() {
            Some(Token::Ident(name)) => Ok(Formula::Atom(name)),
            Some(Token::True) => Ok(Formula::True),
            Some(Token::False) => Ok(Formula::False),
            Some(Token::LParen) => {
                let inner = self.parse_implies()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => {
                        self.cursor = self.cursor.saturating_sub(1);
                        Err(self.error("expected ')'"))
                    }
                }
            }
            Some(other) => {
                self.cursor -= 1;
                Err(self.error(format!("unexpected token {other:?}")))
            }
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parses a formula string into its AST.
pub fn parse(text: &str) -> Result<Formula, LtlError> {
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser { tokens, cursor: 0, end: text.len() };
    let formula = parser.parse_implies()?;
    if parser.peek().is_some() {
        return Err(parser.error("trailing input after formula"));
    }
    Ok(formula)
}
