//! Truncated multivariate Taylor arithmetic.
//!
//! A [`TaylorScalar`] holds the Taylor coefficients `c_α` of a smooth function
//! around a base point, `f(x0 + h) = Σ_{|α| ≤ order} c_α h^α`, for all
//! multi-indices up to the truncation order. Arithmetic and elementary
//! functions are exact at the truncation order, so differentiating a metric
//! evaluated in this arithmetic yields exact (up to roundoff) partial
//! derivatives without step-size error.
//!
//! Coefficients are stored in graded order (all degree-0 monomials, then
//! degree 1, ...), so the layout for order `k` is a prefix of the layout for
//! order `k + 1`. Mixed-order arithmetic truncates to the smaller order.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Largest number of chart coordinates supported by the Taylor tables.
pub const MAX_VARS: usize = 6;
/// Largest truncation order supported by the Taylor tables.
pub const MAX_ORDER: u8 = 4;

struct VarTables {
    /// Exponent vectors in graded order.
    monomials: Vec<[u8; MAX_VARS]>,
    /// `len_upto[k]` = number of monomials of degree ≤ k.
    len_upto: [usize; MAX_ORDER as usize + 1],
    /// Product table `(a, b, target)`, sorted by the degree of `target`.
    mul: Vec<(u16, u16, u16)>,
    /// `mul_upto[k]` = number of product entries with target degree ≤ k.
    mul_upto: [usize; MAX_ORDER as usize + 1],
    /// Per variable: `(target, source, factor)` with `∂_i h^source = factor · h^target`,
    /// sorted by target degree.
    deriv: Vec<Vec<(u16, u16, f64)>>,
    /// Per variable: number of derivative entries with target degree ≤ k.
    deriv_upto: Vec<[usize; MAX_ORDER as usize + 1]>,
}

fn degree(m: &[u8; MAX_VARS]) -> u8 {
    m.iter().sum()
}

fn build_tables(nvars: usize) -> VarTables {
    // Monomials of exact degree d, enumerated lexicographically.
    fn rec(nvars: usize, var: usize, left: u8, cur: &mut [u8; MAX_VARS], out: &mut Vec<[u8; MAX_VARS]>) {
        if var + 1 == nvars {
            cur[var] = left;
            out.push(*cur);
            cur[var] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[var] = e;
            rec(nvars, var + 1, left - e, cur, out);
        }
        cur[var] = 0;
    }

    let mut monomials = Vec::new();
    let mut len_upto = [0usize; MAX_ORDER as usize + 1];
    for d in 0..=MAX_ORDER {
        let mut cur = [0u8; MAX_VARS];
        rec(nvars, 0, d, &mut cur, &mut monomials);
        len_upto[d as usize] = monomials.len();
    }
    let index_of = |m: &[u8; MAX_VARS]| monomials.iter().position(|x| x == m);

    let mut mul = Vec::new();
    for (ia, a) in monomials.iter().enumerate() {
        for (ib, b) in monomials.iter().enumerate() {
            if degree(a) + degree(b) > MAX_ORDER {
                continue;
            }
            let mut t = [0u8; MAX_VARS];
            for v in 0..MAX_VARS {
                t[v] = a[v] + b[v];
            }
            let it = index_of(&t).expect("product monomial present");
            mul.push((ia as u16, ib as u16, it as u16));
        }
    }
    mul.sort_by_key(|&(_, _, t)| (degree(&monomials[t as usize]), t));
    let mut mul_upto = [0usize; MAX_ORDER as usize + 1];
    for k in 0..=MAX_ORDER {
        mul_upto[k as usize] = mul
            .iter()
            .take_while(|&&(_, _, t)| degree(&monomials[t as usize]) <= k)
            .count();
    }

    let mut deriv = Vec::with_capacity(nvars);
    let mut deriv_upto = Vec::with_capacity(nvars);
    for v in 0..nvars {
        let mut entries = Vec::new();
        for (it, t) in monomials.iter().enumerate() {
            if degree(t) >= MAX_ORDER {
                continue;
            }
            let mut s = *t;
            s[v] += 1;
            let is = index_of(&s).expect("source monomial present");
            entries.push((it as u16, is as u16, f64::from(s[v])));
        }
        let mut upto = [0usize; MAX_ORDER as usize + 1];
        for k in 0..=MAX_ORDER {
            upto[k as usize] = entries
                .iter()
                .take_while(|&&(t, _, _)| degree(&monomials[t as usize]) <= k)
                .count();
        }
        deriv.push(entries);
        deriv_upto.push(upto);
    }

    VarTables {
        monomials,
        len_upto,
        mul,
        mul_upto,
        deriv,
        deriv_upto,
    }
}

fn tables(nvars: usize) -> &'static VarTables {
    static TABLES: OnceLock<Vec<VarTables>> = OnceLock::new();
    let all = TABLES.get_or_init(|| (0..=MAX_VARS).map(|n| build_tables(n.max(1))).collect());
    &all[nvars]
}

/// Number of coefficients of a Taylor scalar in `nvars` variables truncated at `order`.
pub fn coefficient_count(nvars: usize, order: u8) -> usize {
    tables(nvars).len_upto[order as usize]
}

/// Truncated multivariate Taylor expansion of a scalar function at a point.
#[derive(Clone, PartialEq)]
pub struct TaylorScalar {
    nvars: u8,
    order: u8,
    coeffs: Vec<f64>,
}

impl TaylorScalar {
    fn check(nvars: usize, order: u8) {
        assert!(
            (1..=MAX_VARS).contains(&nvars),
            "Taylor arithmetic supports 1..={MAX_VARS} variables, got {nvars}"
        );
        assert!(order <= MAX_ORDER, "Taylor order {order} exceeds {MAX_ORDER}");
    }

    /// Constant function `value`.
    pub fn constant(value: f64, nvars: usize, order: u8) -> Self {
        Self::check(nvars, order);
        let mut coeffs = vec![0.0; coefficient_count(nvars, order)];
        coeffs[0] = value;
        Self {
            nvars: nvars as u8,
            order,
            coeffs,
        }
    }

    /// Coordinate function `x_var` expanded around `value`.
    pub fn variable(value: f64, var: usize, nvars: usize, order: u8) -> Self {
        let mut t = Self::constant(value, nvars, order);
        assert!(var < nvars, "variable index {var} out of range for {nvars} variables");
        if order >= 1 {
            t.coeffs[1 + var] = 1.0;
        }
        t
    }

    /// Coordinate functions for every axis around `point`.
    pub fn variables(point: &[f64], order: u8) -> Vec<Self> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Self::variable(v, i, n, order))
            .collect()
    }

    /// Constant with the same variable count and order as `self`.
    pub fn constant_like(&self, value: f64) -> Self {
        Self::constant(value, self.nvars(), self.order)
    }

    pub fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Plain value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of the monomial with the given exponents
    /// (zero beyond the truncation order).
    pub fn coefficient(&self, exponents: &[u8]) -> f64 {
        let t = tables(self.nvars());
        let mut key = [0u8; MAX_VARS];
        key[..exponents.len()].copy_from_slice(exponents);
        if degree(&key) > self.order {
            return 0.0;
        }
        t.monomials
            .iter()
            .position(|m| *m == key)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// First partial derivative `∂f/∂x_var` at the base point.
    pub fn first_derivative(&self, var: usize) -> f64 {
        if self.order == 0 {
            return f64::NAN;
        }
        self.coeffs[1 + var]
    }

    /// Partial derivative with respect to `x_var` as a Taylor scalar of one lower order.
    ///
    /// Panics on an order-0 input; callers track the order budget.
    pub fn partial(&self, var: usize) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 Taylor scalar");
        let t = tables(self.nvars());
        let order = self.order - 1;
        let mut coeffs = vec![0.0; t.len_upto[order as usize]];
        for &(tgt, src, factor) in &t.deriv[var][..t.deriv_upto[var][order as usize]] {
            coeffs[tgt as usize] = factor * self.coeffs[src as usize];
        }
        Self {
            nvars: self.nvars,
            order,
            coeffs,
        }
    }

    /// Truncate to a lower order.
    pub fn truncate(&self, order: u8) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let len = coefficient_count(self.nvars(), order);
        Self {
            nvars: self.nvars,
            order,
            coeffs: self.coeffs[..len].to_vec(),
        }
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(
            self.nvars, other.nvars,
            "Taylor scalars over different variable counts"
        );
    }

    /// `self += a * b`, truncated to the smallest of the three orders.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        self.assert_compatible(a);
        self.assert_compatible(b);
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            *self = self.truncate(order);
        }
        let t = tables(self.nvars());
        for &(ia, ib, it) in &t.mul[..t.mul_upto[order as usize]] {
            self.coeffs[it as usize] += a.coeffs[ia as usize] * b.coeffs[ib as usize];
        }
    }

    /// `self += s * a`.
    pub fn add_scaled(&mut self, s: f64, a: &Self) {
        self.assert_compatible(a);
        let order = self.order.min(a.order);
        if order < self.order {
            *self = self.truncate(order);
        }
        for (c, x) in self.coeffs.iter_mut().zip(&a.coeffs) {
            *c += s * x;
        }
    }

    fn binary(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.assert_compatible(other);
        let order = self.order.min(other.order);
        let len = coefficient_count(self.nvars(), order);
        let coeffs = self.coeffs[..len]
            .iter()
            .zip(&other.coeffs[..len])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self {
            nvars: self.nvars,
            order,
            coeffs,
        }
    }

    fn product(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::constant(0.0, self.nvars(), order);
        out.add_product(self, other);
        out
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nvars: self.nvars,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| f(*c)).collect(),
        }
    }

    /// Compose a univariate function with this scalar, given its Taylor
    /// coefficients `φ^{(m)}(x0)/m!` at the base value for `m = 0..=order`.
    pub fn compose(&self, series: &[f64]) -> Self {
        let mut out = self.constant_like(series[0]);
        if self.order == 0 {
            return out;
        }
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut power = delta.clone();
        for (m, &a) in series.iter().enumerate().skip(1).take(self.order as usize) {
            if m > 1 {
                power = power.product(&delta);
            }
            out.add_scaled(a, &power);
        }
        out
    }

    /// Compose with a function given its successive derivatives `φ^{(m)}(x0)`.
    fn compose_derivatives(&self, derivs: impl Fn(usize) -> f64) -> Self {
        let mut series = [0.0; MAX_ORDER as usize + 1];
        let mut fact = 1.0;
        for (m, s) in series.iter_mut().enumerate().take(self.order as usize + 1) {
            if m > 0 {
                fact *= m as f64;
            }
            *s = derivs(m) / fact;
        }
        self.compose(&series[..=self.order as usize])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose_derivatives(|m| [s, c, -s, -c][m % 4])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose_derivatives(|m| [c, -s, -c, s][m % 4])
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose_derivatives(|_| e)
    }

    /// Natural logarithm. The base value must be positive.
    pub fn ln(&self) -> Self {
        let x = self.value();
        self.compose_derivatives(|m| {
            if m == 0 {
                x.ln()
            } else {
                // d^m ln x = (-1)^{m-1} (m-1)! / x^m
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                let fact: f64 = (1..m).map(|k| k as f64).product();
                sign * fact / x.powi(m as i32)
            }
        })
    }

    /// Real power `x^p` (base value must be positive unless `p` is a non-negative integer).
    pub fn powf(&self, p: f64) -> Self {
        let x = self.value();
        self.compose_derivatives(|m| {
            let falling: f64 = (0..m).map(|k| p - k as f64).product();
            falling * x.powf(p - m as f64)
        })
    }

    pub fn powi(&self, p: i32) -> Self {
        if p >= 0 {
            let mut out = self.constant_like(1.0);
            for _ in 0..p {
                out = out.product(self);
            }
            out
        } else {
            self.recip().powi(-p)
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        let x = self.value();
        self.compose_derivatives(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let fact: f64 = (1..=m).map(|k| k as f64).product();
            sign * fact / x.powi(m as i32 + 1)
        })
    }

    pub fn square(&self) -> Self {
        self.product(self)
    }
}

impl fmt::Debug for TaylorScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TaylorScalar(n={}, order={}, {:?})",
            self.nvars, self.order, self.coeffs
        )
    }
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&TaylorScalar> for &TaylorScalar {
            type Output = TaylorScalar;
            fn $method(self, rhs: &TaylorScalar) -> TaylorScalar {
                let f: fn(&TaylorScalar, &TaylorScalar) -> TaylorScalar = $body;
                f(self, rhs)
            }
        }
        impl $trait<TaylorScalar> for TaylorScalar {
            type Output = TaylorScalar;
            fn $method(self, rhs: TaylorScalar) -> TaylorScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&TaylorScalar> for TaylorScalar {
            type Output = TaylorScalar;
            fn $method(self, rhs: &TaylorScalar) -> TaylorScalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<TaylorScalar> for &TaylorScalar {
            type Output = TaylorScalar;
            fn $method(self, rhs: TaylorScalar) -> TaylorScalar {
                self.$method(&rhs)
            }
        }
    };
}

binary_ops!(Add, add, |a, b| a.binary(b, |x, y| x + y));
binary_ops!(Sub, sub, |a, b| a.binary(b, |x, y| x - y));
binary_ops!(Mul, mul, |a, b| a.product(b));
binary_ops!(Div, div, |a, b| a.product(&b.recip()));

macro_rules! scalar_ops {
    ($trait:ident, $method:ident, $lhs:ident, $rhs:ident, $body:expr) => {
        impl $trait<f64> for &TaylorScalar {
            type Output = TaylorScalar;
            fn $method(self, $rhs: f64) -> TaylorScalar {
                let $lhs = self;
                $body
            }
        }
        impl $trait<f64> for TaylorScalar {
            type Output = TaylorScalar;
            fn $method(self, $rhs: f64) -> TaylorScalar {
                let $lhs = &self;
                $body
            }
        }
    };
}

scalar_ops!(Add, add, a, s, {
    let mut out = a.clone();
    out.coeffs[0] += s;
    out
});
scalar_ops!(Sub, sub, a, s, {
    let mut out = a.clone();
    out.coeffs[0] -= s;
    out
});
scalar_ops!(Mul, mul, a, s, a.map(|c| c * s));
scalar_ops!(Div, div, a, s, a.map(|c| c / s));

impl Add<&TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn add(self, rhs: &TaylorScalar) -> TaylorScalar {
        rhs + self
    }
}

impl Add<TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn add(self, rhs: TaylorScalar) -> TaylorScalar {
        rhs + self
    }
}

impl Sub<&TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn sub(self, rhs: &TaylorScalar) -> TaylorScalar {
        -rhs + self
    }
}

impl Sub<TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn sub(self, rhs: TaylorScalar) -> TaylorScalar {
        -rhs + self
    }
}

impl Mul<&TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn mul(self, rhs: &TaylorScalar) -> TaylorScalar {
        rhs * self
    }
}

impl Mul<TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn mul(self, rhs: TaylorScalar) -> TaylorScalar {
        rhs * self
    }
}

impl Div<&TaylorScalar> for f64 {
    type Output = TaylorScalar;
    fn div(self, rhs: &TaylorScalar) -> TaylorScalar {
        rhs.recip() * self
    }
}

impl Neg for &TaylorScalar {
    type Output = TaylorScalar;
    fn neg(self) -> TaylorScalar {
        self.map(|c| -c)
    }
}

impl Neg for TaylorScalar {
    type Output = TaylorScalar;
    fn neg(self) -> TaylorScalar {
        (&self).neg()
    }
}

impl AddAssign<&TaylorScalar> for TaylorScalar {
    fn add_assign(&mut self, rhs: &TaylorScalar) {
        self.add_scaled(1.0, rhs);
    }
}

impl SubAssign<&TaylorScalar> for TaylorScalar {
    fn sub_assign(&mut self, rhs: &TaylorScalar) {
        self.add_scaled(-1.0, rhs);
    }
}

impl MulAssign<f64> for TaylorScalar {
    fn mul_assign(&mut self, rhs: f64) {
        for c in &mut self.coeffs {
            *c *= rhs;
        }
    }
}

/// Minimal ring interface shared by plain numbers and Taylor scalars, so
/// tensor algebra can run on either.
pub trait Scalar: Clone + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn value(&self) -> f64;
    /// `self += a * b`.
    fn add_product(&mut self, a: &Self, b: &Self);
    /// `self += s * a`.
    fn add_scaled(&mut self, s: f64, a: &Self);
    fn scaled(&self, s: f64) -> Self {
        let mut out = self.zero_like();
        out.add_scaled(s, self);
        out
    }
}

impl Scalar for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn add_scaled(&mut self, s: f64, a: &Self) {
        *self += s * a;
    }
}

impl Scalar for TaylorScalar {
    fn zero_like(&self) -> Self {
        TaylorScalar::zero_like(self)
    }
    fn value(&self) -> f64 {
        TaylorScalar::value(self)
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        TaylorScalar::add_product(self, a, b);
    }
    fn add_scaled(&mut self, s: f64, a: &Self) {
        TaylorScalar::add_scaled(self, s, a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout_counts_are_binomial() {
        // C(n + k, k)
        assert_eq!(coefficient_count(1, 3), 4);
        assert_eq!(coefficient_count(2, 2), 6);
        assert_eq!(coefficient_count(3, 3), 20);
        assert_eq!(coefficient_count(6, 3), 84);
        assert_eq!(coefficient_count(6, 4), 210);
    }

    #[test]
    fn polynomial_product_is_exact() {
        // (1 + x + 2y)(3 - x + y) = 3 + 2x + 7y - x^2 - xy + 2y^2
        let x = TaylorScalar::variable(0.0, 0, 2, 3);
        let y = TaylorScalar::variable(0.0, 1, 2, 3);
        let p = (&x + &y * 2.0) + 1.0;
        let q = (&y - &x) + 3.0;
        let r = p * q;
        assert_eq!(r.coefficient(&[0, 0]), 3.0);
        assert_eq!(r.coefficient(&[1, 0]), 2.0);
        assert_eq!(r.coefficient(&[0, 1]), 7.0);
        assert_eq!(r.coefficient(&[2, 0]), -1.0);
        assert_eq!(r.coefficient(&[1, 1]), -1.0);
        assert_eq!(r.coefficient(&[0, 2]), 2.0);
        assert_eq!(r.coefficient(&[3, 0]), 0.0);
    }

    #[test]
    fn cubic_at_offset_point() {
        // f = x^3 at x0 = 2: 8 + 12h + 6h^2 + h^3
        let x = TaylorScalar::variable(2.0, 0, 1, 3);
        let f = x.powi(3);
        assert_eq!(f.coefficients(), &[8.0, 12.0, 6.0, 1.0]);
    }

    #[test]
    fn elementary_functions_match_derivatives() {
        let x0 = 0.7;
        let x = TaylorScalar::variable(x0, 0, 1, 4);
        let s = x.sin();
        assert_relative_eq!(s.coefficients()[1], x0.cos(), epsilon = 1e-15);
        assert_relative_eq!(s.coefficients()[2], -x0.sin() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(s.coefficients()[3], -x0.cos() / 6.0, epsilon = 1e-15);
        assert_relative_eq!(s.coefficients()[4], x0.sin() / 24.0, epsilon = 1e-15);

        let r = x.sqrt();
        assert_relative_eq!(r.coefficients()[2], -0.125 * x0.powf(-1.5), epsilon = 1e-15);

        let l = x.ln();
        assert_relative_eq!(l.coefficients()[3], 1.0 / (3.0 * x0.powi(3)), epsilon = 1e-14);

        let e = x.exp() * (-&x).exp();
        assert_relative_eq!(e.value(), 1.0, epsilon = 1e-15);
        for c in &e.coefficients()[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = TaylorScalar::variable(0.3, 0, 2, 3);
        let y = TaylorScalar::variable(-1.1, 1, 2, 3);
        let a = (&x * &y).sin() + 2.0;
        let b = (&x + &y * &y).exp();
        let q = &(&a / &b) * &b;
        for (u, v) in q.coefficients().iter().zip(a.coefficients()) {
            assert_relative_eq!(u, v, epsilon = 1e-13);
        }
    }

    #[test]
    fn partial_lowers_order() {
        let x = TaylorScalar::variable(1.0, 0, 2, 3);
        let y = TaylorScalar::variable(2.0, 1, 2, 3);
        // f = x^2 y, ∂x f = 2xy, ∂y f = x^2
        let f = &x * &x * &y;
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert_eq!(fx.value(), 4.0);
        assert_eq!(fx.first_derivative(0), 4.0);
        assert_eq!(fx.first_derivative(1), 2.0);
        let fy = f.partial(1);
        assert_eq!(fy.value(), 1.0);
        assert_eq!(fy.partial(1).value(), 0.0);
    }

    #[test]
    fn mixed_orders_truncate() {
        let x = TaylorScalar::variable(1.0, 0, 1, 3);
        let y = TaylorScalar::variable(1.0, 0, 1, 1);
        assert_eq!((&x * &y).order(), 1);
        assert_eq!((&x + &y).order(), 1);
    }
}
