//! Text and JSON codecs for tower elements.
//!
//! Text grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := 'P' | 'u' | integer | '(' expr ')' | '-' factor
//! ```
//!
//! `P` is the uniformizer Π, `u` the unramified generator. Integer literals
//! of any length are reduced mod `p^n_work`. Exponents are capped and
//! nesting is depth-limited so that parsing is total on untrusted input.
//!
//! The JSON form is `{"pi_shift": s, "coeffs": [[...], ...]}` with one row
//! per Π-power and one column per u-power; decoding validates the exact
//! shape and coefficient ranges and accepted documents round-trip
//! bit-exactly through [`encode_json`].

use super::{Tower, TowerElement};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const MAX_EXPONENT: u64 = 10_000;
const MAX_DEPTH: u32 = 64;

/// Canonical text rendering (`0` for zero; terms in Π-then-u order).
pub(crate) fn render_text(x: &TowerElement) -> Result<String> {
    let data = x.materialized()?;
    let mut terms: Vec<String> = Vec::new();
    for (i, row) in data.grid().iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut parts: Vec<String> = Vec::new();
            if c != 1 || (i == 0 && j == 0) {
                parts.push(c.to_string());
            }
            match i {
                0 => {}
                1 => parts.push("P".into()),
                _ => parts.push(format!("P^{i}")),
            }
            match j {
                0 => {}
                1 => parts.push("u".into()),
                _ => parts.push(format!("u^{j}")),
            }
            terms.push(parts.join("*"));
        }
    }
    if terms.is_empty() {
        return Ok("0".into());
    }
    Ok(terms.join(" + "))
}

/// Debug rendering of a raw grid (used for fractional intermediates that
/// have no canonical text form).
pub(crate) fn render_grid(grid: &[Vec<u64>]) -> String {
    let rows: Vec<String> = grid
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Renders an element in the canonical text grammar. Fails only for
/// crate-internal fractional elements (negative `pi_shift`).
pub fn element_to_text(x: &TowerElement) -> Result<String> {
    render_text(x)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    tower: &'a Tower,
    depth: u32,
}

impl<'a> Parser<'a> {
    fn ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Error::parse(self.pos, "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<TowerElement> {
        let mut acc = self.term()?;
        loop {
            self.ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<TowerElement> {
        let mut acc = self.factor()?;
        loop {
            self.ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
                acc = acc.mul(&self.factor()?)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<TowerElement> {
        let base = self.atom()?;
        self.ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.ws();
            let e = self.uint()?;
            return base.pow_u64(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TowerElement> {
        self.ws();
        match self.peek() {
            None => Err(Error::parse(self.pos, "unexpected end of input")),
            Some(b'P') => {
                self.pos += 1;
                self.reject_symbol_tail()?;
                Ok(self.tower.pi())
            }
            Some(b'u') => {
                self.pos += 1;
                self.reject_symbol_tail()?;
                Ok(self.tower.u_gen())
            }
            Some(b'(') => {
                self.enter()?;
                self.pos += 1;
                let e = self.expr()?;
                self.ws();
                if self.peek() != Some(b')') {
                    return Err(Error::parse(self.pos, "expected ')'"));
                }
                self.pos += 1;
                self.depth -= 1;
                Ok(e)
            }
            Some(b'-') => {
                self.enter()?;
                self.pos += 1;
                let e = self.factor()?;
                self.depth -= 1;
                Ok(e.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let modulus = self.tower.coeff_modulus() as u128;
                let mut v: u128 = 0;
                while let Some(c) = self.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    v = (v * 10 + (c - b'0') as u128) % modulus;
                    self.pos += 1;
                }
                self.reject_symbol_tail()?;
                Ok(self.tower.from_u64(v as u64))
            }
            Some(c) => Err(Error::parse(
                self.pos,
                format!("unexpected character '{}'", char::from(c)),
            )),
        }
    }

    /// After `P`, `u`, or a literal, an immediately following alphanumeric
    /// character would form an unknown symbol — reject with the position.
    fn reject_symbol_tail(&mut self) -> Result<()> {
        if let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                return Err(Error::parse(
                    self.pos,
                    format!("unknown symbol starting with '{}'", char::from(c)),
                ));
            }
        }
        Ok(())
    }

    fn uint(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut v: u64 = 0;
        let mut any = false;
        while let Some(c) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            any = true;
            v = v.saturating_mul(10).saturating_add((c - b'0') as u64);
            if v > MAX_EXPONENT {
                return Err(Error::parse(
                    start,
                    format!("exponent exceeds {MAX_EXPONENT}"),
                ));
            }
            self.pos += 1;
        }
        if !any {
            return Err(Error::parse(self.pos, "expected an exponent"));
        }
        Ok(v)
    }
}

/// Parses the text element grammar into an exact element of the given
/// tower. All failures carry the byte position of the offending token.
pub fn parse_element(tower: &Tower, input: &str) -> Result<TowerElement> {
    let mut p = Parser {
        bytes: input.as_bytes(),
        pos: 0,
        tower,
        depth: 0,
    };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.bytes.len() {
        return Err(Error::parse(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementRepr {
    pi_shift: i64,
    coeffs: Vec<Vec<u64>>,
}

/// Encodes an element as canonical JSON. Fractional (negative-shift)
/// intermediates are crate-internal and refuse to serialize.
pub fn encode_json(x: &TowerElement) -> Result<String> {
    if x.pi_shift() < 0 {
        return Err(Error::InvalidArgument(
            "cannot encode an element with a negative Π-shift".into(),
        ));
    }
    let repr = ElementRepr {
        pi_shift: x.pi_shift(),
        coeffs: x.grid().clone(),
    };
    serde_json::to_string(&repr)
        .map_err(|e| Error::InvalidArgument(format!("JSON encoding failed: {e}")))
}

/// Decodes the JSON element form, validating shape, coefficient ranges and
/// the non-negativity of `pi_shift`. Every rejection is a parse error.
pub fn decode_json(tower: &Tower, input: &str) -> Result<TowerElement> {
    let repr: ElementRepr = serde_json::from_str(input).map_err(|e| {
        Error::parse(
            e.column().saturating_sub(1),
            format!("invalid element JSON: {e}"),
        )
    })?;
    if repr.pi_shift < 0 {
        return Err(Error::parse(
            0,
            "pi_shift must be non-negative in element input",
        ));
    }
    match tower.from_grid(repr.pi_shift, repr.coeffs) {
        Ok(e) => Ok(e),
        Err(Error::InvalidArgument(msg)) => Err(Error::parse(0, msg)),
        Err(e) => Err(e),
    }
}
