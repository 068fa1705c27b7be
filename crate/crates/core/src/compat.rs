//! Formal derivation and evaluation of the Stefan compatibility conditions.
//!
//! Along a boundary path with `X' = -∇u` and `u_t = Δu`, the time derivative
//! of a polynomial `P` in the derivative symbols `D^β u` is
//!
//! ```text
//! dP/dt = Σ_β ∂P/∂(D^β u) · (D^β Δu − Σ_i D^{β+e_i} u · D^{e_i} u)
//! ```
//!
//! Starting from `P_0 = u` and applying this `k` times yields the residual
//! of the k-th compatibility condition, `Δ^k u + F_k(u)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{DerivJet, Ring};

pub const DEFAULT_TERM_CAP: usize = 100_000;

/// A derivative factor `∂x^dx ∂y^dy u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivSymbol {
    pub dx: u8,
    pub dy: u8,
}

impl DerivSymbol {
    pub const fn new(dx: u8, dy: u8) -> Self {
        DerivSymbol { dx, dy }
    }

    pub fn order(&self) -> usize {
        (self.dx + self.dy) as usize
    }

    fn shifted(&self, dx: u8, dy: u8) -> Self {
        DerivSymbol { dx: self.dx + dx, dy: self.dy + dy }
    }
}

// Higher total order first, then more x-derivatives first.
impl Ord for DerivSymbol {
    fn cmp(&self, o: &Self) -> Ordering {
        o.order().cmp(&self.order()).then(o.dx.cmp(&self.dx))
    }
}

impl PartialOrd for DerivSymbol {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for DerivSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub: String =
            "x".repeat(self.dx as usize) + &"y".repeat(self.dy as usize);
        match sub.len() {
            0 => write!(f, "u"),
            1 => write!(f, "u_{sub}"),
            _ => write!(f, "u_{{{sub}}}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational64,
    /// Sorted factor multiset.
    pub factors: Vec<DerivSymbol>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatOperator {
    pub k: usize,
    pub terms: Vec<Term>,
}

type Poly = BTreeMap<Vec<DerivSymbol>, Rational64>;

fn insert(p: &mut Poly, mut factors: Vec<DerivSymbol>, c: Rational64) {
    factors.sort();
    let e = p.entry(factors).or_insert_with(Rational64::zero);
    *e += c;
}

fn material_derivative(p: &Poly, cap: usize) -> Result<Poly> {
    let ex = DerivSymbol::new(1, 0);
    let ey = DerivSymbol::new(0, 1);
    let mut out = Poly::new();
    for (mono, &c) in p {
        for pos in 0..mono.len() {
            let s = mono[pos];
            let mut rest = mono.clone();
            rest.remove(pos);
            for (add, sign) in [
                (vec![s.shifted(2, 0)], 1),
                (vec![s.shifted(0, 2)], 1),
                (vec![s.shifted(1, 0), ex], -1),
                (vec![s.shifted(0, 1), ey], -1),
            ] {
                let mut f = rest.clone();
                f.extend(add);
                insert(&mut out, f, c * Rational64::from_integer(sign));
            }
            if out.len() > cap {
                return Err(Error::TermCap { count: out.len(), cap });
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

pub fn derive_compat_operator(k: usize) -> Result<CompatOperator> {
    derive_compat_operator_with_cap(k, DEFAULT_TERM_CAP)
}

pub fn derive_compat_operator_with_cap(k: usize, cap: usize) -> Result<CompatOperator> {
    if k == 0 {
        return Err(Error::InvalidParameter("compatibility order k must be ≥ 1".into()));
    }
    let mut p = Poly::new();
    p.insert(vec![DerivSymbol::new(0, 0)], Rational64::one());
    for _ in 0..k {
        p = material_derivative(&p, cap)?;
    }
    let lead = p
        .get(&vec![DerivSymbol::new(2 * k as u8, 0)])
        .copied()
        .ok_or_else(|| Error::Invariant("derivation lost the leading Laplacian term".into()))?;
    let terms = p
        .into_iter()
        .map(|(factors, c)| Term { coeff: c / lead, factors })
        .collect();
    Ok(CompatOperator { k, terms })
}

fn binomial(n: usize, r: usize) -> i64 {
    (0..r).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

impl CompatOperator {
    /// Largest derivative order appearing in any factor.
    pub fn max_order(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(DerivSymbol::order))
            .max()
            .unwrap_or(0)
    }

    /// Largest factor order among terms that are not part of `Δ^k u`.
    pub fn lower_order(&self) -> usize {
        self.terms
            .iter()
            .filter(|t| !(t.factors.len() == 1 && t.factors[0].order() == 2 * self.k))
            .flat_map(|t| t.factors.iter().map(DerivSymbol::order))
            .max()
            .unwrap_or(0)
    }

    /// True when the order-2k single-factor terms are exactly the expansion
    /// of the k-fold Laplacian with unit coefficient.
    pub fn has_laplacian_leading_term(&self) -> bool {
        let k = self.k;
        let lead: Vec<&Term> = self
            .terms
            .iter()
            .filter(|t| t.factors.iter().any(|s| s.order() == 2 * k))
            .collect();
        if lead.len() != k + 1 || lead.iter().any(|t| t.factors.len() != 1) {
            return false;
        }
        (0..=k).all(|a| {
            let s = DerivSymbol::new(2 * a as u8, 2 * (k - a) as u8);
            lead.iter()
                .any(|t| t.factors[0] == s && t.coeff == Rational64::from_integer(binomial(k, a)))
        })
    }

    pub fn evaluate<T: Ring>(&self, jet: &DerivJet<T>) -> Result<T> {
        let need = self.max_order();
        if jet.depth() < need {
            return Err(Error::Depth { requested: need, available: jet.depth() });
        }
        let one = jet.get(0, 0)?.one_like();
        let mut acc = one.zero_like();
        for t in &self.terms {
            let mut prod = one.clone();
            for s in &t.factors {
                prod = prod.mul_ref(jet.get(s.dx as usize, s.dy as usize)?);
            }
            let c = t.coeff.to_f64().expect("finite rational");
            acc = acc.add_ref(&prod.scale(c));
        }
        Ok(acc)
    }

    /// Deterministic text form, one term per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.coeff.is_integer() {
            self.coeff.numer().to_string()
        } else {
            format!("{}/{}", self.coeff.numer(), self.coeff.denom())
        };
        let body: Vec<String> = self.factors.iter().map(|s| s.to_string()).collect();
        write!(f, "{c} * {}", body.join("·"))
    }
}

impl fmt::Display for CompatOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let s = t.to_string();
                if i == 0 {
                    s
                } else if t.coeff.is_negative() {
                    format!("- {}", s.trim_start_matches('-'))
                } else {
                    format!("+ {s}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(c: i64, f: &[(u8, u8)]) -> Term {
        let mut factors: Vec<DerivSymbol> = f.iter().map(|&(a, b)| DerivSymbol::new(a, b)).collect();
        factors.sort();
        Term { coeff: Rational64::from_integer(c), factors }
    }

    #[test]
    fn first_condition_terms() {
        let op = derive_compat_operator(1).unwrap();
        let want = vec![
            term(1, &[(2, 0)]),
            term(1, &[(0, 2)]),
            term(-1, &[(1, 0), (1, 0)]),
            term(-1, &[(0, 1), (0, 1)]),
        ];
        assert_eq!(op.terms.len(), 4);
        for w in &want {
            assert!(op.terms.contains(w), "missing {w}");
        }
        assert_eq!(op.max_order(), 2);
    }

    #[test]
    fn text_form_is_stable() {
        let op = derive_compat_operator(1).unwrap();
        assert_eq!(op.to_text(), "1 * u_{xx}\n1 * u_{yy}\n-1 * u_x·u_x\n-1 * u_y·u_y\n");
    }

    #[test]
    fn evaluate_simple_jets() {
        let op = derive_compat_operator(1).unwrap();
        let j = DerivJet::from_entries(2, &[((1, 0), 1.0), ((2, 0), 1.0), ((0, 2), 1.0)]);
        assert_eq!(op.evaluate(&j).unwrap(), 1.0);
        let op2 = derive_compat_operator(2).unwrap();
        let j = DerivJet::from_entries(4, &[((1, 0), 1.0), ((2, 0), 1.0), ((1, 1), 1.0), ((0, 2), 1.0)]);
        assert_eq!(op2.evaluate(&j).unwrap(), 2.0);
        assert!(matches!(op2.evaluate(&j.truncated(3)), Err(Error::Depth { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(derive_compat_operator_with_cap(3, 10), Err(Error::TermCap { .. })));
    }
}
