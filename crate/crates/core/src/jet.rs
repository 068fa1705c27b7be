//! Derivative jets: tables of partial derivatives at a point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

/// Minimal arithmetic needed to evaluate polynomial operators on jets whose
/// entries are either numbers or Taylor series.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn scale(&self, k: f64) -> Self;
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
}

impl Ring for Series {
    fn zero_like(&self) -> Self {
        Series::zeros(self.nvars(), self.depth())
    }
    fn one_like(&self) -> Self {
        Series::constant(self.nvars(), self.depth(), 1.0)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, k: f64) -> Self {
        Series::scale(self, k)
    }
}

#[inline]
fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Partial derivatives `∂x^i ∂y^j u` for `i + j ≤ depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivJet<T = f64> {
    depth: usize,
    values: Vec<T>,
}

impl<T: Clone> DerivJet<T> {
    pub fn from_fn(depth: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(index(0, depth + 1));
        for d in 0..=depth {
            for j in 0..=d {
                values.push(f(d - j, j));
            }
        }
        DerivJet { depth, values }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&T> {
        if i + j > self.depth {
            return Err(Error::Depth { requested: i + j, available: self.depth });
        }
        Ok(&self.values[index(i, j)])
    }

    /// Shorthand for entries known to be present.
    pub fn at(&self, i: usize, j: usize) -> T {
        self.get(i, j).expect("jet entry within depth").clone()
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        if i + j > self.depth {
            return Err(Error::Depth { requested: i + j, available: self.depth });
        }
        self.values[index(i, j)] = v;
        Ok(())
    }

    pub fn map<S: Clone>(&self, f: impl Fn(&T) -> S) -> DerivJet<S> {
        DerivJet { depth: self.depth, values: self.values.iter().map(f).collect() }
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth);
        DerivJet { depth, values: self.values[..index(0, depth + 1)].to_vec() }
    }
}

impl DerivJet<f64> {
    /// Jet from a sparse list of entries; everything else is zero.
    pub fn from_entries(depth: usize, entries: &[((usize, usize), f64)]) -> Self {
        let mut j = Self::from_fn(depth, |_, _| 0.0);
        for &((a, b), v) in entries {
            j.set(a, b, v).expect("entry within depth");
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.values[0]
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.at(1, 0), self.at(0, 1)]
    }

    pub fn hessian(&self) -> [f64; 3] {
        [self.at(2, 0), self.at(1, 1), self.at(0, 2)]
    }

    pub fn scaled(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_error_on_missing_entry() {
        let j = DerivJet::from_entries(2, &[((1, 0), 1.0)]);
        assert!(matches!(j.get(2, 1), Err(Error::Depth { requested: 3, available: 2 })));
        assert_eq!(*j.get(1, 0).unwrap(), 1.0);
    }

    #[test]
    fn series_to_jet_uses_factorials() {
        let x = Series::var(2, 4, 0, 0.0);
        let y = Series::var(2, 4, 1, 0.0);
        let f = &(&x * &x) * &(&y * &y);
        let j = f.to_jet();
        assert_eq!(j.at(2, 2), 4.0);
        assert_eq!(j.at(1, 2), 0.0);
    }
}
