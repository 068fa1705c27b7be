//! Truncated Taylor series in one or two variables.
//!
//! Coefficients are stored grouped by total degree, so `c[(i, j)]` is
//! `∂x^i ∂y^j f / (i! j!)` at the expansion point. All arithmetic truncates
//! at the smaller depth of its operands. Elementary functions use the
//! graded recurrences obtained from `τ d/dτ f(τx, τy)`, which keeps every
//! operation at the cost of a single product.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::jet::DerivJet;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    nvars: usize,
    depth: usize,
    c: Vec<f64>,
}

#[inline]
fn offset(nvars: usize, d: usize) -> usize {
    if nvars == 1 {
        d
    } else {
        d * (d + 1) / 2
    }
}

#[inline]
fn width(nvars: usize, d: usize) -> usize {
    if nvars == 1 {
        1
    } else {
        d + 1
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl Series {
    pub fn zeros(nvars: usize, depth: usize) -> Self {
        assert!(nvars == 1 || nvars == 2, "series supports one or two variables");
        Series { nvars, depth, c: vec![0.0; offset(nvars, depth + 1)] }
    }

    pub fn constant(nvars: usize, depth: usize, v: f64) -> Self {
        let mut s = Self::zeros(nvars, depth);
        s.c[0] = v;
        s
    }

    /// The coordinate function `x0 + dx` (axis 0) or `y0 + dy` (axis 1).
    pub fn var(nvars: usize, depth: usize, axis: usize, x0: f64) -> Self {
        assert!(axis < nvars);
        let mut s = Self::constant(nvars, depth, x0);
        if depth >= 1 {
            s.c[offset(nvars, 1) + axis] = 1.0;
        }
        s
    }

    /// Univariate series from raw Taylor coefficients.
    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Series { nvars: 1, depth: c.len() - 1, c }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        if self.nvars == 1 {
            debug_assert_eq!(j, 0);
            i
        } else {
            offset(2, i + j) + j
        }
    }

    /// Taylor coefficient of `dx^i dy^j` (zero beyond the depth).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.depth || (self.nvars == 1 && j > 0) {
            0.0
        } else {
            self.c[self.idx(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.c[k] = v;
    }

    /// Partial derivative `∂x^i ∂y^j` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    fn part(&self, d: usize) -> &[f64] {
        let o = offset(self.nvars, d);
        &self.c[o..o + width(self.nvars, d)]
    }

    fn part_mut(&mut self, d: usize) -> &mut [f64] {
        let o = offset(self.nvars, d);
        let w = width(self.nvars, d);
        &mut self.c[o..o + w]
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth);
        Series { nvars: self.nvars, depth, c: self.c[..offset(self.nvars, depth + 1)].to_vec() }
    }

    fn check(&self, o: &Series) -> usize {
        assert_eq!(self.nvars, o.nvars, "series variable count mismatch");
        self.depth.min(o.depth)
    }

    pub fn scale(&self, k: f64) -> Self {
        Series { nvars: self.nvars, depth: self.depth, c: self.c.iter().map(|v| v * k).collect() }
    }

    pub fn add_scalar(&self, v: f64) -> Self {
        let mut s = self.clone();
        s.c[0] += v;
        s
    }

    fn zip(&self, o: &Series, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.check(o);
        let len = offset(self.nvars, n + 1);
        Series { nvars: self.nvars, depth: n, c: (0..len).map(|k| f(self.c[k], o.c[k])).collect() }
    }

    /// out_d += s · a_k ⊗ b_m (products of homogeneous parts).
    fn acc(out: &mut [f64], a: &[f64], b: &[f64], s: f64) {
        for (j, &aj) in a.iter().enumerate() {
            if aj == 0.0 {
                continue;
            }
            let t = s * aj;
            for (l, &bl) in b.iter().enumerate() {
                out[j + l] += t * bl;
            }
        }
    }

    pub fn mul_series(&self, o: &Series) -> Self {
        let n = self.check(o);
        let mut r = Series::zeros(self.nvars, n);
        for da in 0..=n {
            for db in 0..=(n - da) {
                let (a, b) = (self.part(da), o.part(db));
                Self::acc(r.part_mut(da + db), a, b, 1.0);
            }
        }
        r
    }

    pub fn square(&self) -> Self {
        self.mul_series(self)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut r = Series::constant(self.nvars, self.depth, 1.0);
        for _ in 0..k {
            r = r.mul_series(self);
        }
        r
    }

    pub fn div_series(&self, b: &Series) -> Self {
        let n = self.check(b);
        let b0 = b.c[0];
        let mut q = Series::zeros(self.nvars, n);
        for d in 0..=n {
            let mut acc = self.part(d).to_vec();
            for k in 1..=d {
                let (bk, qk) = (b.part(k).to_vec(), q.part(d - k).to_vec());
                Self::acc(&mut acc, &bk, &qk, -1.0);
            }
            for (t, v) in q.part_mut(d).iter_mut().zip(acc) {
                *t = v / b0;
            }
        }
        q
    }

    pub fn recip(&self) -> Self {
        Series::constant(self.nvars, self.depth, 1.0).div_series(self)
    }

    pub fn sqrt(&self) -> Self {
        let n = self.depth;
        let mut s = Series::zeros(self.nvars, n);
        let s0 = self.c[0].sqrt();
        s.c[0] = s0;
        for d in 1..=n {
            let mut acc = self.part(d).to_vec();
            for k in 1..d {
                let (a, b) = (s.part(k).to_vec(), s.part(d - k).to_vec());
                Self::acc(&mut acc, &a, &b, -1.0);
            }
            for (t, v) in s.part_mut(d).iter_mut().zip(acc) {
                *t = v / (2.0 * s0);
            }
        }
        s
    }

    pub fn exp(&self) -> Self {
        let n = self.depth;
        let mut e = Series::zeros(self.nvars, n);
        e.c[0] = self.c[0].exp();
        for d in 1..=n {
            let mut acc = vec![0.0; width(self.nvars, d)];
            for k in 1..=d {
                let (a, b) = (self.part(k).to_vec(), e.part(d - k).to_vec());
                Self::acc(&mut acc, &a, &b, k as f64 / d as f64);
            }
            e.part_mut(d).copy_from_slice(&acc);
        }
        e
    }

    pub fn ln(&self) -> Self {
        let n = self.depth;
        let a0 = self.c[0];
        let mut l = Series::zeros(self.nvars, n);
        l.c[0] = a0.ln();
        for d in 1..=n {
            let mut acc = self.part(d).to_vec();
            for k in 1..d {
                let (a, b) = (l.part(k).to_vec(), self.part(d - k).to_vec());
                Self::acc(&mut acc, &a, &b, -(k as f64) / d as f64);
            }
            for (t, v) in l.part_mut(d).iter_mut().zip(acc) {
                *t = v / a0;
            }
        }
        l
    }

    pub fn powf(&self, p: f64) -> Self {
        let n = self.depth;
        let a0 = self.c[0];
        let mut r = Series::zeros(self.nvars, n);
        r.c[0] = a0.powf(p);
        for d in 1..=n {
            let mut acc = vec![0.0; width(self.nvars, d)];
            for k in 1..=d {
                let w = (p * k as f64 - (d - k) as f64) / (d as f64 * a0);
                let (a, b) = (self.part(k).to_vec(), r.part(d - k).to_vec());
                Self::acc(&mut acc, &a, &b, w);
            }
            r.part_mut(d).copy_from_slice(&acc);
        }
        r
    }

    /// `f(self)` where `f[k] = f^(k)(a0)/k!` at the constant term `a0`.
    /// With `exact_polynomial` the coefficients describe `f` completely and
    /// the full depth is kept; otherwise the result is truncated to `f.len()-1`.
    pub fn compose(&self, f: &[f64], exact_polynomial: bool) -> Self {
        assert!(!f.is_empty());
        let depth = if exact_polynomial { self.depth } else { self.depth.min(f.len() - 1) };
        let mut dlt = self.truncated(depth);
        dlt.c[0] = 0.0;
        let mut r = Series::constant(self.nvars, depth, f[f.len() - 1]);
        for &fk in f[..f.len() - 1].iter().rev() {
            r = r.mul_series(&dlt);
            r.c[0] += fk;
        }
        r
    }

    pub fn diff(&self, axis: usize) -> Self {
        assert!(axis < self.nvars);
        if self.depth == 0 {
            return Series::zeros(self.nvars, 0);
        }
        let n = self.depth - 1;
        let mut r = Series::zeros(self.nvars, n);
        for d in 0..=n {
            for j in 0..width(self.nvars, d) {
                let i = d - j;
                let v = if axis == 0 {
                    (i + 1) as f64 * self.coeff(i + 1, j)
                } else {
                    (j + 1) as f64 * self.coeff(i, j + 1)
                };
                r.set_coeff(i, j, v);
            }
        }
        r
    }

    /// Substitutes `dx → a`, `dy → b` (increments with vanishing constant term).
    pub fn substitute(&self, a: &Series, b: Option<&Series>) -> Self {
        let n = match b {
            Some(b) => a.check(b),
            None => a.depth,
        }
        .min(self.depth);
        let nv = a.nvars;
        let mut ai = vec![Series::constant(nv, n, 1.0)];
        for k in 1..=n {
            let mut p = ai[k - 1].mul_series(a);
            p.depth = n;
            p.c.truncate(offset(nv, n + 1));
            ai.push(p);
        }
        let bj = match b {
            Some(b) => {
                let mut v = vec![Series::constant(nv, n, 1.0)];
                for k in 1..=n {
                    v.push(v[k - 1].mul_series(&b.truncated(n)));
                }
                v
            }
            None => vec![Series::constant(nv, n, 1.0)],
        };
        let mut r = Series::zeros(nv, n);
        for i in 0..=n {
            for j in 0..bj.len().min(n - i + 1) {
                let cij = self.coeff(i, j);
                if cij == 0.0 {
                    continue;
                }
                let term = if j == 0 { ai[i].clone() } else { ai[i].mul_series(&bj[j]) };
                for (t, v) in r.c.iter_mut().zip(term.c.iter()) {
                    *t += cij * v;
                }
            }
        }
        r
    }

    /// Embeds a univariate series as a bivariate one depending on `axis` only.
    pub fn lift(&self, axis: usize) -> Self {
        assert_eq!(self.nvars, 1);
        let mut r = Series::zeros(2, self.depth);
        for (k, &v) in self.c.iter().enumerate() {
            if axis == 0 {
                r.set_coeff(k, 0, v);
            } else {
                r.set_coeff(0, k, v);
            }
        }
        r
    }

    pub fn eval(&self, dx: f64, dy: f64) -> f64 {
        let mut s = 0.0;
        for d in (0..=self.depth).rev() {
            let mut p = 0.0;
            for j in 0..width(self.nvars, d) {
                p += self.coeff(d - j, j) * dx.powi((d - j) as i32) * dy.powi(j as i32);
            }
            s += p;
        }
        s
    }

    /// Univariate evaluation of the derivative of order `k` at offset `dx`.
    pub fn eval_derivative(&self, dx: f64, k: usize) -> f64 {
        assert_eq!(self.nvars, 1);
        let mut s = 0.0;
        for m in (k..=self.depth).rev() {
            let fall = (m - k + 1..=m).fold(1.0, |a, v| a * v as f64);
            s = s * dx + fall * self.c[m];
        }
        s
    }

    /// Univariate re-expansion about `x0 + dx`, keeping the degree.
    pub fn recentered(&self, dx: f64) -> Self {
        self.recentered_to(dx, self.depth)
    }

    /// As [`Series::recentered`], keeping only `degree` terms.
    pub fn recentered_to(&self, dx: f64, degree: usize) -> Self {
        assert_eq!(self.nvars, 1);
        let d = degree.min(self.depth);
        let c = (0..=d).map(|k| self.eval_derivative(dx, k) / factorial(k)).collect();
        Series::from_coeffs(c)
    }

    pub fn to_jet(&self) -> DerivJet {
        assert_eq!(self.nvars, 2);
        DerivJet::from_fn(self.depth, |i, j| self.derivative(i, j))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Series> for &Series {
            type Output = Series;
            fn $m(self, o: &Series) -> Series {
                $f(self, o)
            }
        }
        impl $tr<Series> for Series {
            type Output = Series;
            fn $m(self, o: Series) -> Series {
                $f(&self, &o)
            }
        }
        impl $tr<&Series> for Series {
            type Output = Series;
            fn $m(self, o: &Series) -> Series {
                $f(&self, o)
            }
        }
        impl $tr<Series> for &Series {
            type Output = Series;
            fn $m(self, o: Series) -> Series {
                $f(self, &o)
            }
        }
    };
}

binop!(Add, add, |a: &Series, b: &Series| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a: &Series, b: &Series| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a: &Series, b: &Series| a.mul_series(b));
binop!(Div, div, |a: &Series, b: &Series| a.div_series(b));

macro_rules! scalar_op {
    ($tr:ident, $m:ident, $lhs:expr, $rhs:expr) => {
        impl $tr<f64> for &Series {
            type Output = Series;
            fn $m(self, k: f64) -> Series {
                $lhs(self, k)
            }
        }
        impl $tr<f64> for Series {
            type Output = Series;
            fn $m(self, k: f64) -> Series {
                $lhs(&self, k)
            }
        }
        impl $tr<&Series> for f64 {
            type Output = Series;
            fn $m(self, s: &Series) -> Series {
                $rhs(self, s)
            }
        }
        impl $tr<Series> for f64 {
            type Output = Series;
            fn $m(self, s: Series) -> Series {
                $rhs(self, &s)
            }
        }
    };
}

scalar_op!(Add, add, |s: &Series, k: f64| s.add_scalar(k), |k: f64, s: &Series| s.add_scalar(k));
scalar_op!(Sub, sub, |s: &Series, k: f64| s.add_scalar(-k), |k: f64, s: &Series| s.scale(-1.0).add_scalar(k));
scalar_op!(Mul, mul, |s: &Series, k: f64| s.scale(k), |k: f64, s: &Series| s.scale(k));
scalar_op!(Div, div, |s: &Series, k: f64| s.scale(1.0 / k), |k: f64, s: &Series| s.recip().scale(k));

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}
