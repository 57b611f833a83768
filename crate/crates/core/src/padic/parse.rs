//! Strict p-adic literal grammar and the canonical printer.
//!
//! number   := term ('+' term)* ('+' bigO)? | bigO
//! term     := rational ('*' P ('^' SINT)?)?
//! rational := SINT ('/' INT)?
//! bigO     := 'O(' P '^' SINT ')'
//!
//! The base P of a starred term and of the big-O tail must equal the session
//! prime. A bare signed integer in digit position must satisfy |d| < p;
//! slashed rationals are exact values and exempt. A literal without a big-O
//! tail materializes at the policy's default precision and is remembered as
//! exact.

use super::prime::Prime;
use super::value::{Padic, PrecisionPolicy};
use crate::error::PadicError;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigUint),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    BigO,
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer, PadicError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            'O' => {
                toks.push((i, Tok::BigO));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigUint = text[start..i].parse().expect("digit run");
                toks.push((start, Tok::Int(n)));
            }
            other => {
                return Err(PadicError::Syntax {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(Lexer {
        toks,
        pos: 0,
        end: text.len(),
    })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), PadicError> {
        let pos = self.here();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(PadicError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<BigUint, PadicError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(n),
            _ => Err(PadicError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expect_sint(&mut self, what: &str) -> Result<BigInt, PadicError> {
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.bump();
        }
        let n = self.expect_int(what)?;
        let n = BigInt::from(n);
        Ok(if neg { -n } else { n })
    }
}

fn expect_base(lx: &mut Lexer, p: Prime) -> Result<(), PadicError> {
    let pos = lx.here();
    let base = lx.expect_int("prime base")?;
    if base != BigUint::from(p.get()) {
        return Err(PadicError::Syntax {
            pos,
            msg: format!("base {base} does not match session prime {p}"),
        });
    }
    Ok(())
}

/// big-O tail: 'O' '(' P '^' SINT ')'. Returns the absolute-precision bound.
fn parse_bigo(lx: &mut Lexer, p: Prime) -> Result<i64, PadicError> {
    lx.expect(Tok::BigO, "O")?;
    lx.expect(Tok::LParen, "'('")?;
    expect_base(lx, p)?;
    lx.expect(Tok::Caret, "'^'")?;
    let pos = lx.here();
    let e = lx.expect_sint("exponent")?;
    lx.expect(Tok::RParen, "')'")?;
    e.to_i64().ok_or(PadicError::Syntax {
        pos,
        msg: "exponent out of range".into(),
    })
}

/// One term's exact value: rational ('*' P ('^' SINT)?)?. A missing exponent
/// after the star means p^1 (the printer's form for that power).
fn parse_term(lx: &mut Lexer, p: Prime) -> Result<BigRational, PadicError> {
    let num = lx.expect_sint("number")?;
    let mut value = BigRational::from_integer(num.clone());
    let mut is_digit = true;
    if matches!(lx.peek(), Some(Tok::Slash)) {
        lx.bump();
        let dpos = lx.here();
        let den = lx.expect_int("denominator")?;
        if den.is_zero() {
            return Err(PadicError::Syntax {
                pos: dpos,
                msg: "zero denominator".into(),
            });
        }
        value /= BigRational::from_integer(BigInt::from(den));
        is_digit = false;
    }
    if is_digit && num.magnitude() >= &BigUint::from(p.get()) {
        return Err(PadicError::DigitRange {
            digit: num.to_string(),
            p: p.get(),
        });
    }
    if matches!(lx.peek(), Some(Tok::Star)) {
        lx.bump();
        expect_base(lx, p)?;
        let e: i64 = if matches!(lx.peek(), Some(Tok::Caret)) {
            lx.bump();
            let epos = lx.here();
            lx.expect_sint("exponent")?
                .to_i64()
                .ok_or(PadicError::Syntax {
                    pos: epos,
                    msg: "exponent out of range".into(),
                })?
        } else {
            1
        };
        let pb = BigInt::from(p.get());
        let scale = if e >= 0 {
            BigRational::from_integer(pb.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), pb.pow(e.unsigned_abs() as u32))
        };
        value *= scale;
    }
    Ok(value)
}

/// Parses a strict literal, additionally reporting the exact rational value
/// when the literal carried no explicit big-O tail.
pub fn parse_padic_with_exact(
    text: &str,
    p: Prime,
    policy: &PrecisionPolicy,
) -> Result<(Padic, Option<BigRational>), PadicError> {
    let mut lx = lex(text)?;
    if lx.peek().is_none() {
        return Err(PadicError::Syntax {
            pos: 0,
            msg: "empty literal".into(),
        });
    }
    // Bare big-O: an imprecise zero.
    if matches!(lx.peek(), Some(Tok::BigO)) {
        let bound = parse_bigo(&mut lx, p)?;
        if lx.peek().is_some() {
            return Err(PadicError::Syntax {
                pos: lx.here(),
                msg: "trailing input after O(...)".into(),
            });
        }
        return Ok((Padic::zero(p, bound), None));
    }
    let mut sum = parse_term(&mut lx, p)?;
    let mut bound: Option<i64> = None;
    while matches!(lx.peek(), Some(Tok::Plus)) {
        lx.bump();
        if matches!(lx.peek(), Some(Tok::BigO)) {
            bound = Some(parse_bigo(&mut lx, p)?);
            break;
        }
        sum += parse_term(&mut lx, p)?;
    }
    if lx.peek().is_some() {
        return Err(PadicError::Syntax {
            pos: lx.here(),
            msg: "trailing input".into(),
        });
    }
    let value = rational_to_padic(p, &sum, bound, policy)?;
    let exact = if bound.is_none() { Some(sum) } else { None };
    Ok((value, exact))
}

pub fn parse_padic(text: &str, p: Prime, policy: &PrecisionPolicy) -> Result<Padic, PadicError> {
    parse_padic_with_exact(text, p, policy).map(|(v, _)| v)
}

/// Converts an exact rational to a Padic. With an explicit absolute bound the
/// value is reduced to that bound; otherwise it gets the policy's default
/// relative precision.
pub fn rational_to_padic(
    p: Prime,
    value: &BigRational,
    bound: Option<i64>,
    policy: &PrecisionPolicy,
) -> Result<Padic, PadicError> {
    if value.is_zero() {
        return Ok(Padic::zero(p, bound.unwrap_or(i64::from(policy.default_digits))));
    }
    match bound {
        None => {
            Padic::from_rational(p, value.numer(), value.denom(), policy.default_digits)
        }
        Some(abs) => {
            // Convert with enough relative precision to cover the bound, then
            // truncate. ord_p of the value tells how many digits that needs.
            let full = Padic::from_rational(p, value.numer(), value.denom(), policy.default_digits)?;
            let v = match full.valuation() {
                super::value::Valuation::Finite(v) => v,
                super::value::Valuation::Unbounded { .. } => unreachable!("nonzero rational"),
            };
            if abs <= v {
                return Ok(Padic::zero(p, abs));
            }
            let need = (abs - v) as u32;
            let wide = Padic::from_rational(p, value.numer(), value.denom(), need)?;
            Ok(wide.truncate_abs(abs))
        }
    }
}

/// Parses "(lit, lit, ...)" into coordinates with their exactness tags.
pub fn parse_point(
    text: &str,
    p: Prime,
    policy: &PrecisionPolicy,
) -> Result<Vec<(Padic, Option<BigRational>)>, PadicError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or(PadicError::Syntax {
            pos: 0,
            msg: "point must be parenthesized: (a, b, ...)".into(),
        })?;
    inner
        .split(',')
        .map(|part| parse_padic_with_exact(part, p, policy))
        .collect()
}

/// Canonical literal: nonzero digits as "d", "d*p", or "d*p^e" in increasing
/// power order, then the "O(p^A)" tail. Imprecise zeros are the bare tail.
/// Round-trips through `parse_padic` at equal value and precision.
pub fn to_literal(x: &Padic) -> String {
    let p = x.prime().get();
    let abs = x.abs_prec();
    if x.is_imprecise_zero() {
        return format!("O({p}^{abs})");
    }
    let v = match x.valuation() {
        super::value::Valuation::Finite(v) => v,
        super::value::Valuation::Unbounded { .. } => unreachable!(),
    };
    let mut parts = Vec::new();
    for (i, d) in x.unit_digits().iter().enumerate() {
        if *d == 0 {
            continue;
        }
        let e = v + i as i64;
        parts.push(match e {
            0 => format!("{d}"),
            1 => format!("{d}*{p}"),
            _ => format!("{d}*{p}^{e}"),
        });
    }
    parts.push(format!("O({p}^{abs})"));
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::value::Valuation;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    #[test]
    fn parses_plain_digit_sum() {
        let x = parse_padic("2 + 1*5 + O(5^3)", p(5), &pol()).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(0));
        assert_eq!(x.unit_digits(), vec![2, 1, 0]);
        assert_eq!(x.rel_prec(), Some(3));
    }

    #[test]
    fn parses_negative_power_term() {
        let x = parse_padic("2*3^-1 + 1 + O(3^2)", p(3), &pol()).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(-1));
        assert_eq!(x.unit_digits(), vec![2, 1, 0]);
        assert_eq!(x.rel_prec(), Some(3));
    }

    #[test]
    fn rejects_out_of_range_digit() {
        for text in ["9 + O(7^2)", "4 + 9*7 + O(7^2)"] {
            match parse_padic(text, p(7), &pol()) {
                Err(PadicError::DigitRange { digit, p: 7 }) => assert_eq!(digit, "9"),
                other => panic!("expected DigitRange for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn slashed_rationals_are_exempt_and_exact() {
        let (x, exact) = parse_padic_with_exact("5/3", p(3), &pol()).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(-1));
        let digits = x.unit_digits();
        assert_eq!(&digits[..3], &[2, 1, 0]);
        assert!(digits[3..].iter().all(|d| *d == 0));
        let e = exact.unwrap();
        assert_eq!(e, BigRational::new(BigInt::from(5), BigInt::from(3)));
    }

    #[test]
    fn bare_bigo_is_imprecise_zero() {
        let x = parse_padic("O(3^4)", p(3), &pol()).unwrap();
        assert!(x.is_imprecise_zero());
        assert_eq!(x.abs_prec(), 4);
    }

    #[test]
    fn tail_reduces_to_imprecise_zero_when_value_invisible() {
        let x = parse_padic("1*5^4 + O(5^2)", p(5), &pol()).unwrap();
        assert!(x.is_imprecise_zero());
        assert_eq!(x.abs_prec(), 2);
    }

    #[test]
    fn base_must_match_session_prime() {
        assert!(matches!(
            parse_padic("1*7 + O(7^2)", p(5), &pol()),
            Err(PadicError::Syntax { .. })
        ));
        assert!(matches!(
            parse_padic("1 + O(7^2)", p(5), &pol()),
            Err(PadicError::Syntax { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_padic("2 + + O(5^2)", p(5), &pol()) {
            Err(PadicError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected Syntax, got {other:?}"),
        }
        match parse_padic("2 @ O(5^2)", p(5), &pol()) {
            Err(PadicError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected Syntax, got {other:?}"),
        }
    }

    #[test]
    fn negative_digits_normalize() {
        let x = parse_padic("-1 + O(5^3)", p(5), &pol()).unwrap();
        assert_eq!(x.unit_digits(), vec![4, 4, 4]);
    }

    #[test]
    fn printer_round_trips() {
        let samples = [
            "2 + 1*5 + O(5^3)",
            "2*3^-1 + 1 + O(3^2)",
            "O(7^5)",
            "4*7^-2 + 6*7^3 + O(7^6)",
            "1*2 + 1*2^3 + O(2^9)",
        ];
        for text in samples {
            let prime = match text.as_bytes()[text.find("O(").unwrap() + 2] {
                b'2' => 2,
                b'3' => 3,
                b'5' => 5,
                _ => 7,
            };
            let x = parse_padic(text, p(prime), &pol()).unwrap();
            let printed = to_literal(&x);
            let back = parse_padic(&printed, p(prime), &pol()).unwrap();
            assert_eq!(back, x, "round trip failed for {text:?} -> {printed:?}");
        }
    }

    #[test]
    fn printer_uses_bare_p_for_exponent_one() {
        let x = parse_padic("1*5 + O(5^4)", p(5), &pol()).unwrap();
        assert_eq!(to_literal(&x), "1*5 + O(5^4)");
        let y = parse_padic("3 + O(5^1)", p(5), &pol()).unwrap();
        assert_eq!(to_literal(&y), "3 + O(5^1)");
    }

    #[test]
    fn default_precision_applies_without_tail() {
        let x = parse_padic("3", p(5), &pol()).unwrap();
        assert_eq!(x.rel_prec(), Some(32));
        let z = parse_padic("0", p(5), &pol()).unwrap();
        assert!(z.is_imprecise_zero());
        assert_eq!(z.abs_prec(), 32);
    }

    #[test]
    fn parse_point_splits_components() {
        let pt = parse_point("(0, 5/3, O(3^2))", p(3), &pol()).unwrap();
        assert_eq!(pt.len(), 3);
        assert!(pt[0].0.is_imprecise_zero());
        assert!(pt[0].1.as_ref().unwrap().is_zero());
        assert_eq!(pt[1].0.valuation(), Valuation::Finite(-1));
        assert!(pt[2].1.is_none());
    }
}
