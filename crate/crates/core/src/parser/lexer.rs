use num::BigInt;

use super::{ParseDiagnostic, SourceSpan};
use crate::symexpr::Rational;

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
    Semi,
    End,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Num(_) => "number".into(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

pub(super) fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseDiagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Eq),
            b';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, SourceSpan::new(start, start + 1)));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut frac = "";
            if i < bytes.len() && bytes[i] == b'.' {
                let fs = i + 1;
                i = fs;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac = &src[fs..i];
            }
            let digits = format!("{int_part}{frac}");
            let numer: BigInt =
                digits.parse().map_err(|_| ParseDiagnostic::error(SourceSpan::new(start, i), "malformed number"))?;
            let denom = num::pow(BigInt::from(10), frac.len());
            let q = if frac.is_empty() { Rational::from_integer(numer) } else { Rational::new(numer, denom) };
            out.push((Tok::Num(q), SourceSpan::new(start, i)));
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), SourceSpan::new(start, i)));
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        return Err(ParseDiagnostic::error(
            SourceSpan::new(start, start + ch.len_utf8()),
            format!("unexpected character `{ch}`"),
        ));
    }
    out.push((Tok::End, SourceSpan::new(src.len(), src.len())));
    Ok(out)
}
