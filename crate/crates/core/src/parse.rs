//! Text grammar and JSON forms for polynomials.
//!
//! ```text
//! poly   := term (('+'|'-') term)*
//! term   := [coeff] factor+ | coeff
//! coeff  := integer | integer '/' integer | decimal
//! factor := ('a'|'x') index
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::{parse_q, QMat, Q};
use crate::poly::FreePoly;
use crate::word::{Generator, Kind, Word};

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        // 1-based column of the offending character, counting lines too
        let before = &self.src[..self.pos.min(self.src.len())];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let col = before.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        Error::Parse { line, col, msg: msg.into() }
    }

    fn number(&mut self) -> Result<Q> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let mut text = String::from_utf8_lossy(&self.src[start..self.pos]).to_string();
        let save = self.pos;
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'/') {
            self.pos += 1;
            self.skip_ws();
            let dstart = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if dstart == self.pos {
                return Err(self.err("expected denominator after `/`"));
            }
            text.push('/');
            text.push_str(&String::from_utf8_lossy(&self.src[dstart..self.pos]));
        } else {
            self.pos = save;
        }
        parse_q(&text).map_err(|_| {
            let mut e = self.err(format!("bad coefficient `{text}`"));
            if let Error::Parse { col, .. } = &mut e {
                *col -= self.pos - start;
            }
            e
        })
    }

    fn factor(&mut self) -> Result<Generator> {
        self.skip_ws();
        let c = self.src[self.pos] as char;
        let kind = match c {
            'a' => Kind::A,
            'x' => Kind::X,
            _ => return Err(self.err(format!("expected `a` or `x`, found `{c}`"))),
        };
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("missing index after `{c}`")));
        }
        let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("index too large"))?;
        if idx == 0 || idx > u16::MAX as usize {
            return Err(self.err("indices start at 1"));
        }
        Ok(Generator::new(kind, idx))
    }
}

/// Parse a scalar polynomial in the text grammar.
pub fn parse_poly(src: &str) -> Result<FreePoly> {
    let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
    let mut terms: Vec<(Word, QMat)> = Vec::new();
    let mut first = true;
    loop {
        let mut sign = Q::from_integer(1.into());
        match lx.peek() {
            None if first => return Err(lx.err("empty polynomial")),
            None => return Err(lx.err("expected a term after the operator")),
            Some('+') => {
                lx.pos += 1;
            }
            Some('-') => {
                lx.pos += 1;
                sign = -sign;
            }
            Some(_) if !first => return Err(lx.err("expected `+` or `-`")),
            Some(_) => {}
        }
        first = false;
        let coeff = match lx.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => lx.number()?,
            Some(_) => Q::from_integer(1.into()),
            None => return Err(lx.err("expected a term")),
        };
        let mut letters = Vec::new();
        while let Some(c) = lx.peek() {
            if c == 'a' || c == 'x' {
                letters.push(lx.factor()?);
            } else if c == '+' || c == '-' {
                break;
            } else {
                return Err(lx.err(format!("unexpected `{c}`")));
            }
        }
        // a bare coefficient with no letters is a constant term
        terms.push((Word::new(letters), QMat::from_vec(1, 1, vec![sign * coeff])));
        if lx.peek().is_none() {
            break;
        }
    }
    FreePoly::from_terms(1, 1, terms)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    word: Word,
    coeff: Vec<Vec<Value>>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    kappa: usize,
    kappa_p: usize,
    terms: Vec<TermJson>,
}

pub fn q_from_json(v: &Value) -> Result<Q> {
    match v {
        Value::Number(n) => parse_q(&n.to_string()),
        Value::String(s) => parse_q(s),
        _ => Err(Error::Input(format!("expected a number, found {v}"))),
    }
}

pub fn q_to_json(x: &Q) -> Value {
    if x.is_integer() {
        if let Ok(i) = x.to_integer().to_string().parse::<i64>() {
            return Value::from(i);
        }
    }
    Value::String(x.to_string())
}

pub fn qmat_from_json(rows: &[Vec<Value>], field: &str) -> Result<QMat> {
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(q_from_json).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Input(format!("field `{field}`: {e}")))?;
    QMat::from_rows(parsed).map_err(|e| Error::Input(format!("field `{field}`: {e}")))
}

pub fn qmat_to_json(m: &QMat) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(q_to_json).collect())).collect())
}

/// Read a matrix-valued polynomial from its JSON form.
pub fn poly_from_json(text: &str) -> Result<FreePoly> {
    let pj: PolyJson = serde_json::from_str(text).map_err(|e| Error::Input(format!("polynomial JSON: {e}")))?;
    let mut terms = Vec::with_capacity(pj.terms.len());
    for (i, t) in pj.terms.iter().enumerate() {
        let c = qmat_from_json(&t.coeff, &format!("terms[{i}].coeff"))?;
        if c.shape() != (pj.kappa, pj.kappa_p) {
            return Err(Error::Input(format!(
                "field `terms[{i}].coeff`: shape {:?}, expected {:?}",
                c.shape(),
                (pj.kappa, pj.kappa_p)
            )));
        }
        terms.push((t.word.clone(), c));
    }
    FreePoly::from_terms(pj.kappa, pj.kappa_p, terms)
}

pub fn poly_to_json_value(p: &FreePoly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .iter()
        .map(|(w, c)| {
            serde_json::json!({
                "word": w,
                "coeff": qmat_to_json(c),
            })
        })
        .collect();
    serde_json::json!({ "kappa": p.kappa(), "kappa_p": p.kappa_p(), "terms": terms })
}

pub fn poly_to_json(p: &FreePoly) -> String {
    serde_json::to_string(&poly_to_json_value(p)).expect("serializable")
}
