//! Minimal polynomial-literal grammar for command-line arguments:
//! variables `s1..sn`, integer or rational coefficients, `+`, `-`, `^`,
//! with optional `*` between factors. Example: `2*s1^2*s2 - 1/3*s2^3`.

use num_traits::{One, Zero};
use thiserror::Error;

use veronese::algebra::{MJet, MultiIndex, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyParseError {
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("variable index {0} outside 1..={1}")]
    VariableOutOfRange(usize, usize),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("empty term")]
    EmptyTerm,
    #[error("term of degree {0} exceeds truncation {1}")]
    DegreeTooHigh(u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(String),
    Var(usize),
    Caret,
    Star,
    Slash,
    Plus,
    Minus,
}

fn tokenize(input: &str) -> Result<Vec<Token>, PolyParseError> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                tokens.push(Token::Int(bytes[start..i].iter().collect()));
            }
            's' => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(PolyParseError::UnexpectedChar('s', start - 1));
                }
                let idx: usize = bytes[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| PolyParseError::BadNumber(bytes[start..i].iter().collect()))?;
                tokens.push(Token::Var(idx));
            }
            other => return Err(PolyParseError::UnexpectedChar(other, i)),
        }
    }
    Ok(tokens)
}

/// Parse a polynomial literal into a jet with `n` variables at the given
/// truncation.
pub fn parse_poly(input: &str, n: usize, trunc: u32) -> Result<MJet, PolyParseError> {
    let tokens = tokenize(input)?;
    let mut jet = MJet::zero(n, trunc);
    let mut pos = 0;

    let parse_int = |tok: &Token| -> Result<i64, PolyParseError> {
        match tok {
            Token::Int(s) => s.parse().map_err(|_| PolyParseError::BadNumber(s.clone())),
            _ => Err(PolyParseError::UnexpectedEnd),
        }
    };

    loop {
        // sign
        let mut negative = false;
        while pos < tokens.len() {
            match tokens[pos] {
                Token::Plus => pos += 1,
                Token::Minus => {
                    negative = !negative;
                    pos += 1;
                }
                _ => break,
            }
        }
        if pos >= tokens.len() {
            if jet.is_zero() && negative {
                return Err(PolyParseError::UnexpectedEnd);
            }
            break;
        }

        // optional coefficient
        let mut coeff = Rat::one();
        let mut saw_anything = false;
        if let Token::Int(_) = tokens[pos] {
            let numerator = parse_int(&tokens[pos])?;
            pos += 1;
            saw_anything = true;
            let denominator = if pos < tokens.len() && tokens[pos] == Token::Slash {
                pos += 1;
                let d = parse_int(tokens.get(pos).ok_or(PolyParseError::UnexpectedEnd)?)?;
                pos += 1;
                if d == 0 {
                    return Err(PolyParseError::ZeroDenominator);
                }
                d
            } else {
                1
            };
            coeff = Rat::new(numerator.into(), denominator.into());
        }
        if negative {
            coeff = -coeff;
        }

        // factors
        let mut exponents = vec![0u32; n];
        loop {
            if pos < tokens.len() && tokens[pos] == Token::Star {
                pos += 1;
                continue;
            }
            match tokens.get(pos) {
                Some(Token::Var(idx)) => {
                    let idx = *idx;
                    if idx < 1 || idx > n {
                        return Err(PolyParseError::VariableOutOfRange(idx, n));
                    }
                    pos += 1;
                    saw_anything = true;
                    let power = if pos < tokens.len() && tokens[pos] == Token::Caret {
                        pos += 1;
                        let p =
                            parse_int(tokens.get(pos).ok_or(PolyParseError::UnexpectedEnd)?)?;
                        pos += 1;
                        if p < 0 {
                            return Err(PolyParseError::BadNumber(p.to_string()));
                        }
                        p as u32
                    } else {
                        1
                    };
                    exponents[idx - 1] += power;
                }
                _ => break,
            }
        }
        if !saw_anything {
            return Err(PolyParseError::EmptyTerm);
        }
        let alpha = MultiIndex::new(exponents);
        if alpha.weight() > trunc {
            return Err(PolyParseError::DegreeTooHigh(alpha.weight(), trunc));
        }
        if !coeff.is_zero() {
            jet = jet
                .add(&MJet::monomial(n, trunc, alpha, coeff))
                .expect("same shape");
        }
        // next must be a sign or the end
        match tokens.get(pos) {
            None => break,
            Some(Token::Plus) | Some(Token::Minus) => continue,
            Some(other) => {
                return Err(PolyParseError::UnexpectedChar(
                    match other {
                        Token::Caret => '^',
                        Token::Star => '*',
                        Token::Slash => '/',
                        _ => '?',
                    },
                    pos,
                ))
            }
        }
    }
    Ok(jet)
}
