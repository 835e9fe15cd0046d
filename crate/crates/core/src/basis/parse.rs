//! Parser for the textual basis syntax shared by the IR printers, e.g.
//! `std + {'01','10'@(pi/2)} + fourier[3]`.

use super::{validate_literal, Basis, BasisElement, BasisLiteral, BasisVector, Prim};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("bad basis at offset {offset}: {message}")]
pub struct ParseBasisError {
    pub offset: usize,
    pub message: String,
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseBasisError> {
        Err(ParseBasisError { offset: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseBasisError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn uint(&mut self) -> Result<usize, ParseBasisError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .map_or_else(|| self.err("expected an integer"), Ok)
    }

    fn number(&mut self) -> Result<f64, ParseBasisError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .map_or_else(|| self.err("expected a number"), Ok)
    }

    fn angle_expr(&mut self) -> Result<f64, ParseBasisError> {
        let mut v = self.angle_term()?;
        loop {
            if self.eat(b'+') {
                v += self.angle_term()?;
            } else if self.eat(b'-') {
                v -= self.angle_term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn angle_term(&mut self) -> Result<f64, ParseBasisError> {
        let mut v = self.angle_factor()?;
        loop {
            if self.eat(b'*') {
                v *= self.angle_factor()?;
            } else if self.eat(b'/') {
                v /= self.angle_factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn angle_factor(&mut self) -> Result<f64, ParseBasisError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.angle_factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.angle_expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => match self.ident().as_str() {
                "pi" => Ok(std::f64::consts::PI),
                other => self.err(format!("unknown angle name '{other}'")),
            },
            _ => self.err("expected an angle"),
        }
    }

    fn vector(&mut self) -> Result<BasisVector, ParseBasisError> {
        self.expect(b'\'')?;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos] != b'\'' {
            self.pos += 1;
        }
        let syms = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        if self.pos >= self.s.len() {
            return self.err("unterminated basis vector");
        }
        self.pos += 1;
        let mut v = match BasisVector::from_symbols(&syms) {
            Some(v) => v,
            None => return self.err(format!("bad basis vector '{syms}'")),
        };
        if self.eat(b'@') {
            v.phase = Some(self.angle_factor()?);
        }
        Ok(v)
    }

    fn element(&mut self) -> Result<Vec<BasisElement>, ParseBasisError> {
        let elem = if self.eat(b'{') {
            let mut vectors = vec![self.vector()?];
            while self.eat(b',') {
                vectors.push(self.vector()?);
            }
            self.expect(b'}')?;
            let lit = BasisLiteral::new(vectors);
            if let Err(e) = validate_literal(&lit) {
                return self.err(e.to_string());
            }
            BasisElement::Literal(lit)
        } else {
            let name = self.ident();
            match Prim::from_name(&name) {
                Some(Prim::Fourier) => {
                    self.expect(b'[')?;
                    let n = self.uint()?;
                    self.expect(b']')?;
                    if n == 0 {
                        return self.err("fourier dimension must be positive");
                    }
                    return Ok(vec![BasisElement::builtin(Prim::Fourier, n)]);
                }
                Some(p) => BasisElement::builtin(p, 1),
                None => return self.err(format!("expected a basis, found '{name}'")),
            }
        };
        if self.eat(b'[') {
            let n = self.uint()?;
            self.expect(b']')?;
            if n == 0 {
                return self.err("repeat count must be positive");
            }
            return Ok(match elem {
                BasisElement::Builtin { prim, dim } => vec![BasisElement::builtin(prim, dim * n)],
                other => vec![other; n],
            });
        }
        Ok(vec![elem])
    }
}

/// Parses a basis in canon-form text.
pub fn parse_basis(s: &str) -> Result<Basis, ParseBasisError> {
    let mut c = Cursor { s: s.as_bytes(), pos: 0 };
    let mut elements = c.element()?;
    while c.eat(b'+') {
        elements.extend(c.element()?);
    }
    if c.peek().is_some() {
        return c.err("trailing input");
    }
    Ok(Basis::new(elements))
}

/// Parses an angle expression over numbers and `pi`.
pub fn parse_angle(s: &str) -> Result<f64, ParseBasisError> {
    let mut c = Cursor { s: s.as_bytes(), pos: 0 };
    let v = c.angle_expr()?;
    if c.peek().is_some() {
        return c.err("trailing input");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_forms() {
        let b = parse_basis("std[2] + {'01','10'} + fourier[3] + {'p'}[2]").unwrap();
        assert_eq!(b.elements.len(), 5);
        assert_eq!(b.dim(), 2 + 2 + 3 + 2);
        let b = parse_basis("{'1'@(pi/2), '0'@(-0.5)}").unwrap();
        let BasisElement::Literal(l) = &b.elements[0] else { panic!() };
        assert_eq!(l.vectors[0].phase, Some(PI / 2.0));
        assert_eq!(l.vectors[1].phase, Some(-0.5));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_basis("{'0','0'}").is_err());
        assert!(parse_basis("{'0p'}").is_err());
        assert!(parse_basis("foo").is_err());
        assert!(parse_basis("std +").is_err());
        assert_eq!(parse_angle("-pi/4 + 2*pi").unwrap(), -PI / 4.0 + 2.0 * PI);
        assert_eq!(parse_angle("1e-3").unwrap(), 1e-3);
    }
}
