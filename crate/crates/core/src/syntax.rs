//! Text grammar shared by operators, expressions and trajectory files.
//!
//! ```text
//! expr     := ['-'] term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' exponent)?
//! base     := rational | 't' | 'D' | func '(' expr ')' | 'pow' '(' expr ',' rational ')' | '(' expr ')'
//! func     := abs | sgn | exp | sin | cos
//! rational := int ('/' posint)?
//! exponent := ['-'] int | '(' ['-'] rational ')'
//! ```
//!
//! Operators may use `D` but no functions; expressions may not use `D`, and a
//! non-integer exponent is legal only on an `abs(..)` base (or through `pow`
//! on a structurally positive base).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::field::{RatFun, Rational, UniPoly};
use crate::ore::OrePoly;
use crate::orematrix::OreMatrix;
use crate::trajectory::{Expr, Node};
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str, line0: usize) -> Result<Vec<Token>, Error> {
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, 1);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l, cl) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Int(s.parse().expect("digits")), line: l, col: cl });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), line: l, col: cl });
            continue;
        }
        if "+-*/^()[],".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line: l, col: cl });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Parse { line: l, column: cl, message: format!("unexpected character '{c}'") });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Values the two grammar profiles build.
trait Profile: Sized + Clone {
    fn rational(q: Rational) -> Self;
    fn t() -> Self;
    fn d() -> Result<Self, String>;
    fn func(name: &str, arg: Self) -> Result<Self, String>;
    fn rpow(base: Self, q: Rational) -> Result<Self, String>;
    fn add(a: Self, b: Self) -> Self;
    fn sub(a: Self, b: Self) -> Self;
    fn neg(a: Self) -> Self;
    fn mul(a: Self, b: Self) -> Self;
    fn powi(base: Self, n: i64, abs_base: bool) -> Result<Self, String>;
    fn powq(base: Self, q: Rational, abs_base: bool) -> Result<Self, String>;
}

impl Profile for OrePoly {
    fn rational(q: Rational) -> Self {
        OrePoly::rational(q)
    }
    fn t() -> Self {
        OrePoly::constant(RatFun::t())
    }
    fn d() -> Result<Self, String> {
        Ok(OrePoly::d())
    }
    fn func(name: &str, _: Self) -> Result<Self, String> {
        Err(format!("function '{name}' is not allowed in an operator"))
    }
    fn rpow(_: Self, _: Rational) -> Result<Self, String> {
        Err("pow is not allowed in an operator".into())
    }
    fn add(a: Self, b: Self) -> Self {
        &a + &b
    }
    fn sub(a: Self, b: Self) -> Self {
        &a - &b
    }
    fn neg(a: Self) -> Self {
        -&a
    }
    fn mul(a: Self, b: Self) -> Self {
        &a * &b
    }
    fn powi(base: Self, n: i64, _: bool) -> Result<Self, String> {
        if n >= 0 {
            let mut acc = OrePoly::one();
            for _ in 0..n {
                acc = &acc * &base;
            }
            return Ok(acc);
        }
        if base.degree().finite() == Some(0) {
            let c = base.coeff(0).pow(n).map_err(|e| e.to_string())?;
            return Ok(OrePoly::constant(c));
        }
        Err("negative powers are only allowed on functions of t".into())
    }
    fn powq(_: Self, q: Rational, _: bool) -> Result<Self, String> {
        Err(format!("non-integer exponent {q} in an operator"))
    }
}

impl Profile for Expr {
    fn rational(q: Rational) -> Self {
        Expr::constant(q)
    }
    fn t() -> Self {
        Expr::t()
    }
    fn d() -> Result<Self, String> {
        Err("'D' is not allowed in an expression".into())
    }
    fn func(name: &str, a: Self) -> Result<Self, String> {
        Ok(match name {
            "abs" => a.abs(),
            "sgn" => a.sgn(),
            "exp" => a.exp(),
            "sin" => a.sin(),
            "cos" => a.cos(),
            _ => return Err(format!("unknown function '{name}'")),
        })
    }
    fn rpow(base: Self, q: Rational) -> Result<Self, String> {
        base.rpow(q).map_err(|e| e.to_string())
    }
    fn add(a: Self, b: Self) -> Self {
        Expr::add(vec![a, b])
    }
    fn sub(a: Self, b: Self) -> Self {
        a.sub(&b)
    }
    fn neg(a: Self) -> Self {
        a.neg()
    }
    fn mul(a: Self, b: Self) -> Self {
        Expr::mul(vec![a, b])
    }
    fn powi(base: Self, n: i64, _: bool) -> Result<Self, String> {
        if n < 0 {
            if let Some(r) = base.as_rat() {
                if r.is_zero() {
                    return Err("negative power of zero".into());
                }
            }
        }
        Ok(base.pow(n))
    }
    fn powq(base: Self, q: Rational, abs_base: bool) -> Result<Self, String> {
        if !abs_base {
            return Err("a non-integer exponent needs an abs(..) base".into());
        }
        base.rpow(q).map_err(|e| e.to_string())
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, tok: &Token, msg: impl Into<String>) -> Result<T, Error> {
        Err(Error::Parse { line: tok.line, column: tok.col, message: msg.into() })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect(&mut self, c: char) -> Result<(), Error> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            self.err(&t, format!("expected '{c}', found {}", describe(&t.tok)))
        }
    }

    fn expect_eof(&mut self) -> Result<(), Error> {
        let t = self.peek().clone();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            self.err(&t, format!("unexpected {}", describe(&t.tok)))
        }
    }

    fn expr<P: Profile>(&mut self) -> Result<P, Error> {
        let mut acc = if self.is_sym('-') {
            self.next();
            P::neg(self.term()?)
        } else {
            self.term()?
        };
        loop {
            if self.is_sym('+') {
                self.next();
                acc = P::add(acc, self.term()?);
            } else if self.is_sym('-') {
                self.next();
                acc = P::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<P: Profile>(&mut self) -> Result<P, Error> {
        let mut acc = self.factor()?;
        while self.is_sym('*') {
            self.next();
            acc = P::mul(acc, self.factor()?);
        }
        Ok(acc)
    }

    fn factor<P: Profile>(&mut self) -> Result<P, Error> {
        let start = self.peek().clone();
        let abs_base = start.tok == Tok::Ident("abs".into());
        let base = self.base()?;
        if !self.is_sym('^') {
            return Ok(base);
        }
        let caret = self.next();
        let q = if self.is_sym('(') {
            self.next();
            let q = self.signed_rational()?;
            self.expect(')')?;
            q
        } else {
            let neg = if self.is_sym('-') {
                self.next();
                true
            } else {
                false
            };
            let t = self.next();
            let Tok::Int(n) = t.tok else {
                return self.err(&t, "expected an integer exponent");
            };
            let n = Rational::from_integer(n);
            if neg {
                -n
            } else {
                n
            }
        };
        let res = if q.is_integer() {
            let n: i64 = match q.to_integer().try_into() {
                Ok(n) if (-4096..=4096).contains(&n) => n,
                _ => return self.err(&caret, "exponent out of range"),
            };
            P::powi(base, n, abs_base)
        } else {
            P::powq(base, q, abs_base)
        };
        res.or_else(|m| self.err(&caret, m))
    }

    fn signed_rational(&mut self) -> Result<Rational, Error> {
        let neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            false
        };
        let q = self.rational()?;
        Ok(if neg { -q } else { q })
    }

    fn rational(&mut self) -> Result<Rational, Error> {
        let t = self.next();
        let Tok::Int(n) = t.tok else {
            return self.err(&t, format!("expected a number, found {}", describe(&t.tok)));
        };
        if self.is_sym('/') {
            self.next();
            let dt = self.next();
            let Tok::Int(d) = dt.tok.clone() else {
                return self.err(&dt, "expected a positive integer denominator");
            };
            if d.is_zero() {
                return self.err(&dt, "zero denominator");
            }
            return Ok(Rational::new(n, d));
        }
        Ok(Rational::from_integer(n))
    }

    fn base<P: Profile>(&mut self) -> Result<P, Error> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(_) => Ok(P::rational(self.rational()?)),
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                match name.as_str() {
                    "t" => Ok(P::t()),
                    "D" => P::d().or_else(|m| self.err(&t, m)),
                    "pow" => {
                        self.expect('(')?;
                        let b = self.expr()?;
                        self.expect(',')?;
                        let q = self.signed_rational()?;
                        self.expect(')')?;
                        P::rpow(b, q).or_else(|m| self.err(&t, m))
                    }
                    "abs" | "sgn" | "exp" | "sin" | "cos" => {
                        self.expect('(')?;
                        let a = self.expr()?;
                        self.expect(')')?;
                        P::func(name, a).or_else(|m| self.err(&t, m))
                    }
                    _ => self.err(&t, format!("unknown identifier '{name}'")),
                }
            }
            other => self.err(&t, format!("unexpected {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number {n}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Eof => "end of input".into(),
    }
}

fn parser(text: &str, line0: usize) -> Result<Parser, Error> {
    Ok(Parser { toks: tokenize(text, line0)?, pos: 0 })
}

pub fn parse_expr(text: &str) -> Result<Expr, Error> {
    parse_expr_at(text, 1)
}

fn parse_expr_at(text: &str, line: usize) -> Result<Expr, Error> {
    let mut p = parser(text, line)?;
    let e = p.expr::<Expr>()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_ore(text: &str) -> Result<OrePoly, Error> {
    let mut p = parser(text, 1)?;
    let e = p.expr::<OrePoly>()?;
    p.expect_eof()?;
    Ok(e)
}

/// `[[e, e], [e, e]]`; a bare operator is read as a 1x1 matrix.
pub fn parse_ore_matrix(text: &str) -> Result<OreMatrix, Error> {
    let mut p = parser(text, 1)?;
    if !p.is_sym('[') {
        let e = p.expr::<OrePoly>()?;
        p.expect_eof()?;
        return OreMatrix::new(1, 1, vec![e]);
    }
    let open = p.next();
    let mut rows = Vec::new();
    loop {
        p.expect('[')?;
        let mut row = Vec::new();
        loop {
            row.push(p.expr::<OrePoly>()?);
            if p.is_sym(',') {
                p.next();
                continue;
            }
            p.expect(']')?;
            break;
        }
        rows.push(row);
        if p.is_sym(',') {
            p.next();
            continue;
        }
        p.expect(']')?;
        break;
    }
    p.expect_eof()?;
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return p.err(&open, "rows have different lengths");
    }
    OreMatrix::from_rows(rows)
}

/// Parsed contents of a trajectory file, before validation.
#[derive(Clone, Debug)]
pub struct TrajectoryText {
    pub components: usize,
    pub pieces: Vec<(Rational, Rational, Vec<Expr>)>,
}

/// ```text
/// components: 2
/// piece [-1, 0]:
///   w1 = abs(t)^(3/2)
///   w2 = 31/4*t^2*abs(t)^(3/2)
/// ```
/// Blank lines and `#` comments are ignored.
pub fn parse_trajectory_text(text: &str) -> Result<TrajectoryText, Error> {
    let perr = |line: usize, column: usize, m: &str| Error::Parse { line, column, message: m.to_string() };
    let mut components: Option<usize> = None;
    let mut pieces: Vec<(Rational, Rational, Vec<Expr>)> = Vec::new();
    let mut pending: Option<(usize, Rational, Rational, Vec<Option<Expr>>)> = None;
    let finish = |p: (usize, Rational, Rational, Vec<Option<Expr>>),
                  pieces: &mut Vec<(Rational, Rational, Vec<Expr>)>|
     -> Result<(), Error> {
        let (line, lo, hi, comps) = p;
        let mut out = Vec::with_capacity(comps.len());
        for (k, c) in comps.into_iter().enumerate() {
            match c {
                Some(e) => out.push(e),
                None => return Err(perr(line, 1, &format!("piece is missing w{}", k + 1))),
            }
        }
        pieces.push((lo, hi, out));
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix("components:") {
            if components.is_some() {
                return Err(perr(line, indent, "duplicate components header"));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| perr(line, indent, "expected a positive component count"))?;
            if n == 0 {
                return Err(perr(line, indent, "expected a positive component count"));
            }
            components = Some(n);
        } else if let Some(rest) = trimmed.strip_prefix("piece") {
            let n = components.ok_or_else(|| perr(line, indent, "missing 'components: n' header"))?;
            if let Some(p) = pending.take() {
                finish(p, &mut pieces)?;
            }
            let rest = rest.trim_end();
            let Some(body) = rest.strip_suffix(':') else {
                return Err(perr(line, indent + trimmed.len(), "expected ':' after the piece interval"));
            };
            let col0 = indent + "piece".len();
            let mut p = parser(body, line)?;
            for t in p.toks.iter_mut() {
                if t.line == line {
                    t.col += col0;
                }
            }
            p.expect('[')?;
            let lo = p.signed_rational()?;
            p.expect(',')?;
            let hi = p.signed_rational()?;
            p.expect(']')?;
            p.expect_eof()?;
            pending = Some((line, lo, hi, vec![None; n]));
        } else if trimmed.starts_with('w') {
            let Some((lhs, _)) = trimmed.split_once('=') else {
                return Err(perr(line, indent, "expected 'wk = <expr>'"));
            };
            let Some(p) = pending.as_mut() else {
                return Err(perr(line, indent, "component outside of a piece"));
            };
            let k: usize = lhs[1..]
                .trim()
                .parse()
                .map_err(|_| perr(line, indent, "expected a component name like w1"))?;
            if k == 0 || k > p.3.len() {
                return Err(perr(line, indent, &format!("component w{k} out of range")));
            }
            if p.3[k - 1].is_some() {
                return Err(perr(line, indent, &format!("duplicate component w{k}")));
            }
            let offset = content.find('=').expect("split") + 1;
            let mut pr = parser(&content[offset..], line)?;
            for t in pr.toks.iter_mut() {
                if t.line == line {
                    t.col += offset;
                }
            }
            let e = pr.expr::<Expr>()?;
            pr.expect_eof()?;
            p.3[k - 1] = Some(e);
        } else {
            return Err(perr(line, indent, "expected 'components:', 'piece' or a component line"));
        }
    }
    if let Some(p) = pending.take() {
        finish(p, &mut pieces)?;
    }
    let components = components.ok_or_else(|| perr(1, 1, "missing 'components: n' header"))?;
    if pieces.is_empty() {
        return Err(perr(text.lines().count().max(1), 1, "no pieces"));
    }
    Ok(TrajectoryText { components, pieces })
}

/// The text block for a TN form of `r`:
/// ```text
/// tn-form
/// R: [[D, -1]]
/// ell: 1
/// r: D
/// U: [[1]]
/// Uinv: [[1]]
/// V: [[1, 0], [0, 1]]
/// Vinv: [[1, 0], [0, 1]]
/// # merge 1: theta = ..., deg 3 -> 2
/// ```
/// Merge steps are informational comments; [`parse_tn_form`] ignores them.
pub fn tn_form_text(r: &OreMatrix, form: &crate::orematrix::TnForm) -> String {
    let mut s = String::from("tn-form\n");
    s.push_str(&format!("R: {r}\nell: {}\nr: {}\n", form.ell, form.r));
    for (name, m) in [("U", &form.u), ("Uinv", &form.uinv), ("V", &form.v), ("Vinv", &form.vinv)] {
        s.push_str(&format!("{name}: {m}\n"));
    }
    for m in &form.merges {
        s.push_str(&format!(
            "# merge {}: theta = {}, deg {} -> {}\n",
            m.index + 1,
            m.theta,
            m.degree_before,
            m.degree_after
        ));
    }
    s
}

/// Reads a block written by [`tn_form_text`]. Only shapes are checked here;
/// `TnForm::verify` re-multiplies.
pub fn parse_tn_form(text: &str) -> Result<(OreMatrix, crate::orematrix::TnForm), Error> {
    const KEYS: [&str; 7] = ["R", "ell", "r", "U", "Uinv", "V", "Vinv"];
    let perr = |line: usize, column: usize, m: String| Error::Parse { line, column, message: m };
    let relocate = |e: Error, line: usize, offset: usize| match e {
        Error::Parse { column, message, .. } => Error::Parse { line, column: column + offset, message },
        other => other,
    };
    let mut seen_header = false;
    let mut values: Vec<Option<(usize, usize, String)>> = vec![None; KEYS.len()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if !seen_header {
            if trimmed != "tn-form" {
                return Err(perr(line, indent, "expected 'tn-form' header".into()));
            }
            seen_header = true;
            continue;
        }
        let Some((key, _)) = trimmed.split_once(':') else {
            return Err(perr(line, indent, "expected 'key: value'".into()));
        };
        let Some(k) = KEYS.iter().position(|x| *x == key.trim()) else {
            return Err(perr(line, indent, format!("unknown key '{}'", key.trim())));
        };
        if values[k].is_some() {
            return Err(perr(line, indent, format!("duplicate key '{}'", KEYS[k])));
        }
        let offset = content.find(':').expect("split") + 1;
        values[k] = Some((line, offset, content[offset..].to_string()));
    }
    if !seen_header {
        return Err(perr(1, 1, "expected 'tn-form' header".into()));
    }
    let last = text.lines().count().max(1);
    let mut get = |k: usize| values[k].take().ok_or_else(|| perr(last, 1, format!("missing key '{}'", KEYS[k])));
    let matrix = |(line, offset, v): (usize, usize, String)| parse_ore_matrix(&v).map_err(|e| relocate(e, line, offset));
    let r = matrix(get(0)?)?;
    let (line, offset, v) = get(1)?;
    let ell: usize = v.trim().parse().map_err(|_| perr(line, offset + 1, "expected a nonnegative integer".into()))?;
    let (line, offset, v) = get(2)?;
    let rr = parse_ore(&v).map_err(|e| relocate(e, line, offset))?;
    let u = matrix(get(3)?)?;
    let uinv = matrix(get(4)?)?;
    let v = matrix(get(5)?)?;
    let vinv = matrix(get(6)?)?;
    let (m, n) = (r.rows(), r.cols());
    let square = |x: &OreMatrix, k: usize| x.rows() == k && x.cols() == k;
    if !(square(&u, m) && square(&uinv, m) && square(&v, n) && square(&vinv, n)) || ell > m.min(n) {
        return Err(Error::DimensionMismatch(format!("transforms do not fit a {m}x{n} matrix")));
    }
    Ok((r, crate::orematrix::TnForm { ell, r: rr, u, uinv, v, vinv, merges: Vec::new() }))
}

// ---------------------------------------------------------------------------
// Printing

fn poly_string(p: &UniPoly) -> String {
    struct P<'a>(&'a UniPoly);
    impl fmt::Display for P<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            self.0.fmt_with_var(f, "t")
        }
    }
    P(p).to_string()
}

fn is_monomial(p: &UniPoly) -> bool {
    p.coeffs().iter().filter(|c| !c.is_zero()).count() <= 1
}

/// A nonzero function as `(negative, body)` where `body` prints `|c|` as a
/// product factor; `"1"` for the unit.
pub(crate) fn ratfun_term(c: &RatFun) -> (bool, String) {
    let neg = c.num().lc().is_negative();
    let a = if neg { -c } else { c.clone() };
    let num = a.num();
    let den = a.den();
    let num_s = if is_monomial(num) { poly_string(num) } else { format!("({})", poly_string(num)) };
    if den.is_one() {
        return (neg, num_s);
    }
    let den_s = if is_monomial(den) {
        let k = den.degree().finite().unwrap_or(0);
        if k == 1 {
            "t^-1".to_string()
        } else {
            format!("t^-{k}")
        }
    } else {
        format!("({})^-1", poly_string(den))
    };
    if num.is_one() {
        (neg, den_s)
    } else {
        (neg, format!("{num_s}*{den_s}"))
    }
}

/// Standalone form of a function of `t`, reparsable.
pub fn ratfun_string(c: &RatFun) -> String {
    if c.is_zero() {
        return "0".into();
    }
    if c.den().is_one() {
        return poly_string(c.num());
    }
    let (neg, body) = ratfun_term(c);
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Split off the sign of a summand: (negative, printed magnitude).
fn signed_term(e: &Expr) -> (bool, String) {
    match e.node() {
        Node::Rat(r) => {
            let neg = r.num().lc().is_negative();
            let a = if neg { -r } else { r.clone() };
            (neg, ratfun_string(&a))
        }
        Node::Mul(fs) => {
            if let Some(r) = fs[0].as_rat() {
                let neg = r.num().lc().is_negative();
                let a = if neg { -r } else { r.clone() };
                let mut parts = Vec::new();
                if !a.is_one() {
                    parts.push(ratfun_term(&a).1);
                }
                parts.extend(fs[1..].iter().map(factor_string));
                (neg, parts.join("*"))
            } else {
                (false, fs.iter().map(factor_string).collect::<Vec<_>>().join("*"))
            }
        }
        _ => (false, expr_string(e)),
    }
}

/// An expression usable as a product factor.
fn factor_string(e: &Expr) -> String {
    match e.node() {
        Node::Add(_) => format!("({})", expr_string(e)),
        Node::Rat(r) => {
            let (neg, body) = ratfun_term(r);
            if neg {
                format!("(-{body})")
            } else {
                body
            }
        }
        Node::Mul(_) => format!("({})", expr_string(e)),
        _ => expr_string(e),
    }
}

/// An expression usable as the base of `^`.
fn base_string(e: &Expr) -> String {
    match e.node() {
        Node::Abs(_) | Node::Sgn(_) | Node::Exp(_) | Node::Sin(_) | Node::Cos(_) => expr_string(e),
        Node::Rat(r) if r.den().is_one() && r.num().degree().finite() == Some(1) && r.num().coeffs()[0].is_zero() && r.num().lc().is_one() => "t".into(),
        _ => format!("({})", expr_string(e)),
    }
}

fn expr_string(e: &Expr) -> String {
    match e.node() {
        Node::Rat(r) => ratfun_string(r),
        Node::Add(ts) => {
            let mut s = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (neg, body) = signed_term(t);
                if i == 0 {
                    if neg {
                        s.push('-');
                    }
                } else {
                    s.push_str(if neg { " - " } else { " + " });
                }
                s.push_str(&body);
            }
            s
        }
        Node::Mul(_) => {
            let (neg, body) = signed_term(e);
            if neg {
                format!("-{body}")
            } else {
                body
            }
        }
        Node::Pow(b, n) => {
            if *n < 0 {
                format!("{}^-{}", base_string(b), -n)
            } else {
                format!("{}^{n}", base_string(b))
            }
        }
        Node::RPow(b, q) => {
            if matches!(b.node(), Node::Abs(_)) {
                format!("{}^({})", base_string(b), rational_string(q))
            } else {
                format!("pow({}, {})", expr_string(b), rational_string(q))
            }
        }
        Node::Abs(u) => format!("abs({})", expr_string(u)),
        Node::Sgn(u) => format!("sgn({})", expr_string(u)),
        Node::Exp(u) => format!("exp({})", expr_string(u)),
        Node::Sin(u) => format!("sin({})", expr_string(u)),
        Node::Cos(u) => format!("cos({})", expr_string(u)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr_string(self))
    }
}
