use std::fmt;
use std::str::FromStr;

use crate::Error;

/// A differentiability order in `{-1, 0, 1, ...} ∪ {∞}`; `-1` means "not
/// even continuous" (or unbounded).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(i64),
    Infinite,
}

impl Order {
    pub const NONE: Order = Order::Finite(-1);

    /// Caps an order to a jet length: `None` for "nothing to check".
    pub fn checked_orders(self, kmax: u32) -> Option<u32> {
        match self {
            Order::Finite(k) if k < 0 => None,
            Order::Finite(k) => Some((k as u32).min(kmax)),
            Order::Infinite => Some(kmax),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Order, Error> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Order::Infinite);
        }
        match s.parse::<i64>() {
            Ok(k) if k >= -1 => Ok(Order::Finite(k)),
            _ => Err(Error::Domain(format!("expected an order >= -1 or 'inf', got '{s}'"))),
        }
    }
}

/// `(L, M, N)` with `-1 <= L <= M <= N`: global `C^L`, every piece `C^M` up
/// to its ends, `C^N` inside pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegularityTriple {
    pub l: Order,
    pub m: Order,
    pub n: Order,
}

impl RegularityTriple {
    pub fn new(l: Order, m: Order, n: Order) -> Result<RegularityTriple, Error> {
        if l < Order::NONE || !(l <= m && m <= n) {
            return Err(Error::Domain(format!("need -1 <= L <= M <= N, got ({l}, {m}, {n})")));
        }
        Ok(RegularityTriple { l, m, n })
    }

    /// `C^self ⊆ C^other`, i.e. componentwise `>=`.
    pub fn at_least(&self, other: &RegularityTriple) -> bool {
        self.l >= other.l && self.m >= other.m && self.n >= other.n
    }
}

impl fmt::Display for RegularityTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.l, self.m, self.n)
    }
}

impl FromStr for RegularityTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<RegularityTriple, Error> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!("expected (L, M, N), got '{s}'")));
        }
        RegularityTriple::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?)
    }
}

/// Outcome of a classification: the maximal triple, with infinite entries
/// meaning "verified up to order `kmax`".
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub triple: RegularityTriple,
    pub kmax: u32,
    pub notes: Vec<String>,
}

impl RegularityReport {
    pub fn capped(&self) -> bool {
        self.triple.l == Order::Infinite || self.triple.m == Order::Infinite
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.triple)?;
        if self.capped() {
            write!(f, "  [inf: verified to order {}]", self.kmax)?;
        }
        for n in &self.notes {
            write!(f, "\nnote: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_parsing() {
        assert!(Order::Finite(-1) < Order::Finite(0));
        assert!(Order::Finite(1000) < Order::Infinite);
        let t: RegularityTriple = "(0, 0, inf)".parse().unwrap();
        assert_eq!(t.to_string(), "(0, 0, inf)");
        assert!("(1, 0, inf)".parse::<RegularityTriple>().is_err());
        assert!("(-2, 0, 1)".parse::<RegularityTriple>().is_err());
    }
}
