//! Truncated third-order Taylor arithmetic in four variables.
//!
//! A [`Jet3`] carries the value of a scalar function together with every
//! partial derivative up to total order three at one point. Internally the
//! jet is stored as the 35 Taylor coefficients of the monomials
//! `x^α` with `|α| <= 3`; products are truncated polynomial products, so
//! all arithmetic is exact up to round-off.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Number of independent variables (chart dimension).
pub const NVARS: usize = 4;
/// Number of stored Taylor coefficients: 1 + 4 + 10 + 20.
pub const NCOEF: usize = 35;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by zero (denominator value {0:e})")]
    DivisionByZero(f64),
    #[error("{function} is undefined at {value:e}")]
    Domain { function: &'static str, value: f64 },
}

struct Tables {
    /// Exponent vector of every monomial, in storage order.
    exps: [[u8; NVARS]; NCOEF],
    /// `(lhs, rhs, out)` for every pair of monomials whose product survives truncation.
    products: Vec<(u8, u8, u8)>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exps = [[0u8; NVARS]; NCOEF];
        let mut n = 1;
        for i in 0..NVARS {
            exps[n][i] += 1;
            n += 1;
        }
        for i in 0..NVARS {
            for j in i..NVARS {
                exps[n][i] += 1;
                exps[n][j] += 1;
                n += 1;
            }
        }
        for i in 0..NVARS {
            for j in i..NVARS {
                for k in j..NVARS {
                    exps[n][i] += 1;
                    exps[n][j] += 1;
                    exps[n][k] += 1;
                    n += 1;
                }
            }
        }
        debug_assert_eq!(n, NCOEF);
        let find = |e: [u8; NVARS]| exps.iter().position(|m| *m == e);
        let mut products = Vec::new();
        for a in 0..NCOEF {
            for b in 0..NCOEF {
                let mut e = [0u8; NVARS];
                for v in 0..NVARS {
                    e[v] = exps[a][v] + exps[b][v];
                }
                if e.iter().map(|&x| x as usize).sum::<usize>() <= 3 {
                    let out = find(e).expect("monomial of degree <= 3");
                    products.push((a as u8, b as u8, out as u8));
                }
            }
        }
        Tables { exps, products }
    })
}

fn monomial_index(axes: &[usize]) -> usize {
    let mut e = [0u8; NVARS];
    for &a in axes {
        e[a] += 1;
    }
    tables()
        .exps
        .iter()
        .position(|m| *m == e)
        .expect("derivative order <= 3")
}

fn factorial_weight(axes: &[usize]) -> f64 {
    let mut e = [0u32; NVARS];
    for &a in axes {
        e[a] += 1;
    }
    e.iter()
        .map(|&k| (1..=k).product::<u32>() as f64)
        .product()
}

/// Value and all partial derivatives through order three at a point.
///
/// Mixed partials are stored once; `d2(i, j) == d2(j, i)` and every
/// permutation of `d3` indices returns the same canonical entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    coef: [f64; NCOEF],
}

impl Default for Jet3 {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl Jet3 {
    pub fn constant(c: f64) -> Self {
        let mut coef = [0.0; NCOEF];
        coef[0] = c;
        Jet3 { coef }
    }

    /// Coordinate function `x_axis` expanded at `point`.
    pub fn axis(axis: usize, point: &[f64; NVARS]) -> Self {
        assert!(axis < NVARS, "axis {axis} out of range");
        let mut j = Self::constant(point[axis]);
        j.coef[1 + axis] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.coef[1 + i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.partial(&[i, j])
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.partial(&[i, j, k])
    }

    /// Partial derivative along the listed axes (order 0 to 3).
    pub fn partial(&self, axes: &[usize]) -> f64 {
        self.coef[monomial_index(axes)] * factorial_weight(axes)
    }

    pub fn gradient(&self) -> [f64; NVARS] {
        [self.d1(0), self.d1(1), self.d1(2), self.d1(3)]
    }

    pub fn hessian(&self) -> [[f64; NVARS]; NVARS] {
        let mut h = [[0.0; NVARS]; NVARS];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.d2(i, j);
            }
        }
        h
    }

    pub fn third(&self) -> [[[f64; NVARS]; NVARS]; NVARS] {
        let mut t = [[[0.0; NVARS]; NVARS]; NVARS];
        for i in 0..NVARS {
            for j in 0..NVARS {
                for k in 0..NVARS {
                    t[i][j][k] = self.d3(i, j, k);
                }
            }
        }
        t
    }

    /// Raw Taylor coefficients in storage order.
    pub fn coefficients(&self) -> &[f64; NCOEF] {
        &self.coef
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.coef.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.coef.iter().all(|c| c.is_finite())
    }

    /// Largest magnitude among all stored coefficients.
    pub fn max_abs(&self) -> f64 {
        self.coef.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `f(self)` given `f, f', f'', f'''` at `self.value()` (Faà di Bruno to order three).
    pub fn compose(&self, f: [f64; 4]) -> Self {
        let mut d = *self;
        d.coef[0] = 0.0;
        let d2 = d * d;
        let d3 = d2 * d;
        let mut out = Self::constant(f[0]);
        for n in 1..NCOEF {
            out.coef[n] = f[1] * d.coef[n] + 0.5 * f[2] * d2.coef[n] + f[3] / 6.0 * d3.coef[n];
        }
        out
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let b = self.value();
        if b == 0.0 || !b.is_finite() {
            return Err(JetError::DivisionByZero(b));
        }
        let r = 1.0 / b;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        Ok(*self * rhs.recip()?)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Result<Self, JetError> {
        let x = self.value();
        if x.cos() == 0.0 {
            return Err(JetError::Domain { function: "tan", value: x });
        }
        let t = x.tan();
        let s = 1.0 + t * t;
        Ok(self.compose([t, s, 2.0 * t * s, 2.0 * s * s + 4.0 * t * t * s]))
    }

    pub fn sinh(&self) -> Self {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Self {
        let x = self.value();
        let (s, c) = (x.sinh(), x.cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Self {
        let u = self.value().tanh();
        let s = 1.0 - u * u;
        self.compose([u, s, -2.0 * u * s, s * (6.0 * u * u - 2.0)])
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::Domain { function: "ln", value: a });
        }
        let r = 1.0 / a;
        Ok(self.compose([a.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::Domain { function: "sqrt", value: a });
        }
        let s = a.sqrt();
        Ok(self.compose([
            s,
            0.5 / s,
            -0.25 / (a * s),
            0.375 / (a * a * s),
        ]))
    }

    /// Integer power. Non-negative exponents use exact repeated products;
    /// negative exponents go through the reciprocal.
    pub fn powi(&self, n: i32) -> Result<Self, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Self::constant(1.0);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        Ok(result)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: Jet3) -> Jet3 {
        for (a, b) in self.coef.iter_mut().zip(rhs.coef.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(mut self, rhs: Jet3) -> Jet3 {
        for (a, b) in self.coef.iter_mut().zip(rhs.coef.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut coef = [0.0; NCOEF];
        for &(a, b, o) in &tables().products {
            coef[o as usize] += self.coef[a as usize] * rhs.coef[b as usize];
        }
        Jet3 { coef }
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const P: [f64; 4] = [0.0, PI / 2.0, PI / 2.0, 0.0];

    #[test]
    fn constant_seed_has_no_derivatives() {
        let c = Jet3::constant(5.0);
        assert_eq!(c.value(), 5.0);
        assert!(c.coefficients()[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn axis_seed() {
        let a = Jet3::axis(1, &P);
        assert_eq!(a.value(), PI / 2.0);
        assert_eq!(a.gradient(), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(a.hessian(), [[0.0; 4]; 4]);
        let z = Jet3::axis(3, &[0.3, 0.1, 0.2, 1.7]);
        assert_eq!(z.gradient(), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn square_of_axis() {
        let x = Jet3::axis(0, &[3.0, 0.0, 0.0, 0.0]);
        let sq = x * x;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.d1(0), 6.0);
        assert_eq!(sq.d2(0, 0), 2.0);
        assert_eq!(sq.d3(0, 0, 0), 0.0);
        assert_eq!(x.powi(2).unwrap(), sq);
    }

    #[test]
    fn reciprocal_derivatives() {
        let x = Jet3::axis(0, &[2.0, 0.0, 0.0, 0.0]);
        let r = x.recip().unwrap();
        assert_eq!(r.value(), 0.5);
        assert_eq!(r.d1(0), -0.25);
        assert_eq!(r.d2(0, 0), 0.25);
        assert_eq!(r.d3(0, 0, 0), -0.375);
    }

    #[test]
    fn division_by_zero_is_reported() {
        let x = Jet3::axis(0, &[0.0; 4]);
        assert!(matches!(Jet3::constant(1.0).checked_div(&x), Err(JetError::DivisionByZero(_))));
    }

    #[test]
    fn exp_at_zero() {
        let e = Jet3::axis(2, &[0.0; 4]).exp();
        assert_eq!(e.value(), 1.0);
        assert_eq!(e.d1(2), 1.0);
        assert_eq!(e.d2(2, 2), 1.0);
        assert!((e.d3(2, 2, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let x = Jet3::axis(0, &[-1.0, 0.0, 0.0, 0.0]);
        assert!(x.ln().is_err());
        assert!(x.sqrt().is_err());
        assert!(Jet3::constant(0.0).sqrt().is_err());
    }

    #[test]
    fn mixed_third_partials_are_symmetric() {
        let p = [0.3, 0.7, 1.1, 0.2];
        let f = (Jet3::axis(1, &p) * Jet3::axis(2, &p)).sin() * Jet3::axis(0, &p).exp();
        let v = f.d3(0, 1, 2);
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            assert_eq!(f.d3(perm[0], perm[1], perm[2]), v);
        }
        // d/dx0 d/dx1 d/dx2 of e^x0 sin(x1 x2) = e^x0 (cos(x1 x2) - x1 x2 sin(x1 x2))
        let u = p[1] * p[2];
        let expect = p[0].exp() * (u.cos() - u * u.sin());
        assert!((v - expect).abs() < 1e-13);
    }

    #[test]
    fn tanh_and_tan_third_derivatives() {
        let x0 = 0.4;
        let x = Jet3::axis(0, &[x0, 0.0, 0.0, 0.0]);
        let t = x.tan().unwrap();
        let s = 1.0 / x0.cos().powi(2);
        let tn = x0.tan();
        assert!((t.d3(0, 0, 0) - (2.0 * s * s + 4.0 * tn * tn * s)).abs() < 1e-12);
        let th = x.tanh();
        let u = x0.tanh();
        // tanh''' = -2 sech^2 (sech^2 - 2 tanh^2)... compare via identity
        let sech2 = 1.0 - u * u;
        assert!((th.d3(0, 0, 0) - (-2.0 * sech2 * sech2 + 4.0 * u * u * sech2)).abs() < 1e-12);
    }

    fn arb_jet() -> impl Strategy<Value = Jet3> {
        (prop::array::uniform4(-1.0f64..1.0), prop::array::uniform4(-2.0f64..2.0)).prop_map(|(p, w)| {
            // a generic polynomial-plus-transcendental jet built from the seeds
            let x: Vec<Jet3> = (0..NVARS).map(|i| Jet3::axis(i, &p)).collect();
            let lin = x[0] * w[0] + x[1] * w[1] + x[2] * w[2] + x[3] * w[3];
            lin.sin() * x[1] + (x[2] * x[3]).exp() * w[0] + Jet3::constant(w[1])
        })
    }

    fn near(a: &Jet3, b: &Jet3) -> bool {
        let scale = a.max_abs().max(b.max_abs()).max(1.0);
        (*a - *b).max_abs() <= 1e-12 * scale
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            prop_assert!(near(&(a + b), &(b + a)));
            prop_assert!(near(&(a * b), &(b * a)));
            prop_assert!(near(&((a * b) * c), &(a * (b * c))));
            prop_assert!(near(&(a * (b + c)), &(a * b + a * c)));
            prop_assert!(near(&(a * Jet3::constant(1.0)), &a));
            prop_assert!(near(&(a - a), &Jet3::constant(0.0)));
        }

        #[test]
        fn reciprocal_inverts(a in arb_jet()) {
            prop_assume!(a.value().abs() > 0.2);
            let r = a.recip().unwrap();
            prop_assert!(near(&(a * r), &Jet3::constant(1.0)));
        }

        #[test]
        fn exp_ln_and_sqrt_square_round_trip(a in arb_jet()) {
            let pos = a * a + Jet3::constant(1.0);
            prop_assert!(near(&pos.ln().unwrap().exp(), &pos));
            let s = pos.sqrt().unwrap();
            prop_assert!(near(&(s * s), &pos));
        }
    }
}
