use super::ast::Span;
use super::diag::Diagnostic;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    /// `'...'`
    Str(String),
    /// `bit'...'`
    Bits(Vec<bool>),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCTS: [&str; 24] = [
    ">>", "->", "(", ")", "[", "]", "{", "}", "|", "&", "^", "~", "+", "-", "*", "/", "@", ",", ":", ";", "=", ".",
    "<", ">",
];

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1u32, 1u32);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '\'' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i] != '\'' && chars[i] != '\n' {
                bump!();
            }
            if i >= chars.len() || chars[i] != '\'' {
                return Err(Diagnostic::error(span, "unterminated string literal"));
            }
            let s: String = chars[start..i].iter().collect();
            bump!();
            out.push(Token { tok: Tok::Str(s), span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            if word == "bit" && i < chars.len() && chars[i] == '\'' {
                bump!();
                let mut bits = Vec::new();
                while i < chars.len() && chars[i] != '\'' {
                    match chars[i] {
                        '0' => bits.push(false),
                        '1' => bits.push(true),
                        other => {
                            return Err(Diagnostic::error(Span { line, col }, format!("invalid bit '{other}' in bit literal")))
                        }
                    }
                    bump!();
                }
                if i >= chars.len() {
                    return Err(Diagnostic::error(span, "unterminated bit literal"));
                }
                bump!();
                out.push(Token { tok: Tok::Bits(bits), span });
            } else {
                out.push(Token { tok: Tok::Ident(word), span });
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let mut float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                float = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col);
                bump!();
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    float = true;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                } else {
                    (i, line, col) = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if float {
                Tok::Float(text.parse().map_err(|_| Diagnostic::error(span, format!("invalid number {text}")))?)
            } else {
                Tok::Int(text.parse().map_err(|_| Diagnostic::error(span, format!("integer {text} is too large")))?)
            };
            out.push(Token { tok, span });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.len() {
                    bump!();
                }
                out.push(Token { tok: Tok::Punct(p), span });
            }
            None => return Err(Diagnostic::error(span, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn tokens() {
        assert_eq!(
            toks("std[N] >> {'1'@pi/2} // c\n bit'10' 2.5"),
            vec![
                Tok::Ident("std".into()),
                Tok::Punct("["),
                Tok::Ident("N".into()),
                Tok::Punct("]"),
                Tok::Punct(">>"),
                Tok::Punct("{"),
                Tok::Str("1".into()),
                Tok::Punct("@"),
                Tok::Ident("pi".into()),
                Tok::Punct("/"),
                Tok::Int(2),
                Tok::Punct("}"),
                Tok::Bits(vec![true, false]),
                Tok::Float(2.5),
                Tok::Eof
            ]
        );
        let t = lex("qpu\n  main").unwrap();
        assert_eq!((t[1].span.line, t[1].span.col), (2, 3));
        assert!(lex("'abc").is_err());
        assert!(lex("$").is_err());
    }
}
