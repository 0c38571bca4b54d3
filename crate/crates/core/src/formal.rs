//! Gaussian rationals, truncated ν-series and the exact time ring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat { re: Rational::zero(), im: Rational::zero() }
    }

    pub fn one() -> Self {
        GaussRat { re: Rational::one(), im: Rational::zero() }
    }

    pub fn i() -> Self {
        GaussRat { re: Rational::zero(), im: Rational::one() }
    }

    pub fn real(re: Rational) -> Self {
        GaussRat { re, im: Rational::zero() }
    }

    pub fn int(n: i64) -> Self {
        GaussRat::real(rat_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        GaussRat::real(rat(n, d))
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => GaussRat::one(),
            1 => GaussRat::i(),
            2 => GaussRat::int(-1),
            _ => -GaussRat::i(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        GaussRat { re: &self.re * q, im: &self.im * q }
    }

    pub fn inv(&self) -> Result<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "({}-{}i)", self.re, -self.im.clone())
                } else {
                    write!(f, "({}+{}i)", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        &self + &o
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        &self - &o
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        &self * &o
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussRat> for GaussRat {
    fn sub_assign(&mut self, o: &GaussRat) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

/// Truncated series `Σ_{k≤K} c_k ν^k`. The coefficient vector always has length `K+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormalScalar {
    coeffs: Vec<GaussRat>,
}

impl FormalScalar {
    pub fn zero(order: usize) -> Self {
        FormalScalar { coeffs: vec![GaussRat::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(GaussRat::one(), order)
    }

    pub fn constant(c: GaussRat, order: usize) -> Self {
        Self::monomial(c, 0, order)
    }

    pub fn int(n: i64, order: usize) -> Self {
        Self::constant(GaussRat::int(n), order)
    }

    /// `c ν^j`, zero when `j > order`.
    pub fn monomial(c: GaussRat, j: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if j <= order {
            s.coeffs[j] = c;
        }
        s
    }

    pub fn nu(order: usize) -> Self {
        Self::monomial(GaussRat::one(), 1, order)
    }

    /// Pads with zeros or drops coefficients beyond `order`.
    pub fn from_coeffs(mut coeffs: Vec<GaussRat>, order: usize) -> Self {
        coeffs.resize(order + 1, GaussRat::zero());
        FormalScalar { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussRat {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn set_coeff(&mut self, k: usize, c: GaussRat) {
        if k < self.coeffs.len() {
            self.coeffs[k] = c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(GaussRat::is_zero)
    }

    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(GaussRat::is_real)
    }

    pub fn conj(&self) -> Self {
        FormalScalar { coeffs: self.coeffs.iter().map(GaussRat::conj).collect() }
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        FormalScalar { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_rat(&self, q: &Rational) -> Self {
        FormalScalar { coeffs: self.coeffs.iter().map(|x| x.scale(q)).collect() }
    }

    /// Multiplication by `ν^j`, truncated.
    pub fn shift(&self, j: usize) -> Self {
        let k = self.order();
        let mut out = Self::zero(k);
        for i in 0..=k {
            if i + j <= k {
                out.coeffs[i + j] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Zeroes every coefficient above `k` while keeping the order.
    pub fn truncated(&self, k: usize) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if i > k {
                *c = GaussRat::zero();
            }
        }
        out
    }

    pub fn with_order(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.clone(), order)
    }

    pub fn inverse(&self) -> Result<Self> {
        let k = self.order();
        let a0inv = self.coeffs[0].inv().map_err(|_| Error::Domain("series is not a unit".into()))?;
        let mut out = Self::zero(k);
        out.coeffs[0] = a0inv.clone();
        for n in 1..=k {
            let mut s = GaussRat::zero();
            for j in 1..=n {
                s += &(&self.coeffs[j] * &out.coeffs[n - j]);
            }
            out.coeffs[n] = -(&s * &a0inv);
        }
        Ok(out)
    }

    /// `log(a)` for `a` with constant term 1.
    pub fn log_unipotent(&self) -> Result<Self> {
        if self.coeffs[0] != GaussRat::one() {
            return Err(Error::Domain("log needs constant term 1".into()));
        }
        let k = self.order();
        let x = self - &Self::one(k);
        let mut out = Self::zero(k);
        let mut pw = Self::one(k);
        for n in 1..=k {
            pw = &pw * &x;
            let sign = if n % 2 == 1 { 1 } else { -1 };
            out += &pw.scale_rat(&rat(sign, n as i64));
        }
        Ok(out)
    }
}

impl fmt::Display for FormalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}ν")?,
                _ => write!(f, "{c}ν^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn check_orders(a: &FormalScalar, b: &FormalScalar) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::Config(format!(
            "mismatched truncation orders {} and {}",
            a.order(),
            b.order()
        )));
    }
    Ok(())
}

pub fn series_mul(a: &FormalScalar, b: &FormalScalar) -> Result<FormalScalar> {
    check_orders(a, b)?;
    Ok(a * b)
}

pub fn series_add(a: &FormalScalar, b: &FormalScalar) -> Result<FormalScalar> {
    check_orders(a, b)?;
    Ok(a + b)
}

pub fn series_exp(a: &FormalScalar) -> Result<FormalScalar> {
    if !a.coeffs[0].is_zero() {
        return Err(Error::Domain("exp of a series with nonzero constant term".into()));
    }
    let k = a.order();
    let mut out = FormalScalar::one(k);
    let mut term = FormalScalar::one(k);
    for n in 1..=k {
        term = (&term * a).scale_rat(&rat(1, n as i64));
        out += &term;
    }
    Ok(out)
}

impl<'a> Add<&'a FormalScalar> for &'a FormalScalar {
    type Output = FormalScalar;
    fn add(self, o: &FormalScalar) -> FormalScalar {
        assert_eq!(self.order(), o.order(), "truncation mismatch");
        FormalScalar { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(x, y)| x + y).collect() }
    }
}

impl<'a> Sub<&'a FormalScalar> for &'a FormalScalar {
    type Output = FormalScalar;
    fn sub(self, o: &FormalScalar) -> FormalScalar {
        assert_eq!(self.order(), o.order(), "truncation mismatch");
        FormalScalar { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(x, y)| x - y).collect() }
    }
}

impl<'a> Mul<&'a FormalScalar> for &'a FormalScalar {
    type Output = FormalScalar;
    fn mul(self, o: &FormalScalar) -> FormalScalar {
        assert_eq!(self.order(), o.order(), "truncation mismatch");
        let k = self.order();
        let mut out = FormalScalar::zero(k);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(k + 1 - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] += &(a * b);
                }
            }
        }
        out
    }
}

impl Add for FormalScalar {
    type Output = FormalScalar;
    fn add(self, o: FormalScalar) -> FormalScalar {
        &self + &o
    }
}

impl Sub for FormalScalar {
    type Output = FormalScalar;
    fn sub(self, o: FormalScalar) -> FormalScalar {
        &self - &o
    }
}

impl Mul for FormalScalar {
    type Output = FormalScalar;
    fn mul(self, o: FormalScalar) -> FormalScalar {
        &self * &o
    }
}

impl Neg for FormalScalar {
    type Output = FormalScalar;
    fn neg(self) -> FormalScalar {
        FormalScalar { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Neg for &FormalScalar {
    type Output = FormalScalar;
    fn neg(self) -> FormalScalar {
        FormalScalar { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl AddAssign<&FormalScalar> for FormalScalar {
    fn add_assign(&mut self, o: &FormalScalar) {
        assert_eq!(self.order(), o.order(), "truncation mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *x += y;
        }
    }
}

impl SubAssign<&FormalScalar> for FormalScalar {
    fn sub_assign(&mut self, o: &FormalScalar) {
        assert_eq!(self.order(), o.order(), "truncation mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *x -= y;
        }
    }
}

/// `t ↦ Σ_k p_k(t) e^{2πikt}` on `[0,1]`; nonzero frequencies carry constant amplitudes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeFun {
    order: usize,
    terms: BTreeMap<i64, Vec<FormalScalar>>,
}

impl TimeFun {
    pub fn zero(order: usize) -> Self {
        TimeFun { order, terms: BTreeMap::new() }
    }

    pub fn constant(c: FormalScalar) -> Self {
        Self::poly(vec![c])
    }

    /// Polynomial `Σ_j c_j t^j`.
    pub fn poly(coeffs: Vec<FormalScalar>) -> Self {
        let order = coeffs.first().map_or(0, FormalScalar::order);
        let mut f = TimeFun::zero(order);
        f.insert(0, coeffs);
        f
    }

    pub fn monomial(c: FormalScalar, j: usize) -> Self {
        let k = c.order();
        let mut coeffs = vec![FormalScalar::zero(k); j];
        coeffs.push(c);
        Self::poly(coeffs)
    }

    /// `c e^{2πikt}`.
    pub fn oscillation(k: i64, c: FormalScalar) -> Self {
        let mut f = TimeFun::zero(c.order());
        f.insert(k, vec![c]);
        f
    }

    /// General constructor; rejects polynomial amplitudes on nonzero frequencies.
    pub fn from_terms(order: usize, terms: BTreeMap<i64, Vec<FormalScalar>>) -> Result<Self> {
        let mut f = TimeFun::zero(order);
        for (k, p) in terms {
            if p.iter().any(|c| c.order() != order) {
                return Err(Error::Config("mismatched truncation orders in time function".into()));
            }
            f.insert(k, p);
        }
        f.validate()?;
        Ok(f)
    }

    fn insert(&mut self, k: i64, mut p: Vec<FormalScalar>) {
        while p.last().is_some_and(FormalScalar::is_zero) {
            p.pop();
        }
        if p.is_empty() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, p);
        }
    }

    fn validate(&self) -> Result<()> {
        for (k, p) in &self.terms {
            if *k != 0 && p.len() > 1 {
                return Err(Error::Unsupported(
                    "polynomial amplitude on a nonzero frequency leaves the exact time ring".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<i64, Vec<FormalScalar>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficients of the pure polynomial part, or `None` when oscillating terms are present.
    pub fn as_poly(&self) -> Option<Vec<FormalScalar>> {
        if self.terms.keys().any(|k| *k != 0) {
            return None;
        }
        Some(self.terms.get(&0).cloned().unwrap_or_default())
    }

    pub fn add(&self, o: &TimeFun) -> TimeFun {
        let mut out = self.clone();
        for (k, p) in &o.terms {
            let mut cur = out.terms.remove(k).unwrap_or_default();
            if cur.len() < p.len() {
                cur.resize(p.len(), FormalScalar::zero(self.order));
            }
            for (j, c) in p.iter().enumerate() {
                cur[j] += c;
            }
            out.insert(*k, cur);
        }
        out
    }

    pub fn scale(&self, c: &FormalScalar) -> TimeFun {
        let mut out = TimeFun::zero(self.order);
        for (k, p) in &self.terms {
            out.insert(*k, p.iter().map(|x| x * c).collect());
        }
        out
    }

    pub fn mul(&self, o: &TimeFun) -> Result<TimeFun> {
        let mut out = TimeFun::zero(self.order);
        for (k1, p1) in &self.terms {
            for (k2, p2) in &o.terms {
                let mut prod = vec![FormalScalar::zero(self.order); p1.len() + p2.len() - 1];
                for (i, a) in p1.iter().enumerate() {
                    for (j, b) in p2.iter().enumerate() {
                        prod[i + j] += &(a * b);
                    }
                }
                out = out.add(&TimeFun { order: self.order, terms: BTreeMap::from([(k1 + k2, prod)]) });
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Affine reparametrization `t ↦ f(a t)` for an integer `a ≥ 1`, as a function on `[0,1]`.
    pub fn rescale(&self, a: i64) -> Result<TimeFun> {
        if a < 1 {
            return Err(Error::Domain("rescaling factor must be a positive integer".into()));
        }
        let mut out = TimeFun::zero(self.order);
        for (k, p) in &self.terms {
            let mut q = Vec::with_capacity(p.len());
            let mut pw = rat_int(1);
            for c in p {
                q.push(c.scale_rat(&pw));
                pw *= rat_int(a);
            }
            out.insert(k * a, q);
        }
        Ok(out)
    }
}

pub fn time_integrate(f: &TimeFun) -> Result<FormalScalar> {
    f.validate()?;
    let mut out = FormalScalar::zero(f.order);
    if let Some(p) = f.terms.get(&0) {
        for (j, c) in p.iter().enumerate() {
            out += &c.scale_rat(&rat(1, j as i64 + 1));
        }
    }
    Ok(out)
}

/// Solves `A x = b` over the series ring by elimination with unit pivots.
pub fn solve_linear(a: &[Vec<FormalScalar>], b: &[FormalScalar]) -> Result<Vec<FormalScalar>> {
    let n = b.len();
    let mut m: Vec<Vec<FormalScalar>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].coeff(0).is_zero())
            .ok_or_else(|| Error::Domain("linear system is singular at order ν⁰".into()))?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].inverse()?;
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..n {
                let t = &factor * &m[col][c];
                m[r][c] -= &t;
            }
            let t = &factor * &rhs[col];
            rhs[r] -= &t;
        }
    }
    (0..n).map(|r| Ok(&rhs[r] * &m[r][r].inverse()?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fs(v: &[i64], k: usize) -> FormalScalar {
        FormalScalar::from_coeffs(v.iter().map(|&x| GaussRat::int(x)).collect(), k)
    }

    // [DERIVED]
    #[test]
    fn linear_solve_with_pivoting() {
        let k = 2;
        let a = vec![
            vec![FormalScalar::nu(k), FormalScalar::int(2, k)],
            vec![FormalScalar::int(-1, k), FormalScalar::nu(k)],
        ];
        let x = vec![FormalScalar::int(3, k), FormalScalar::from_coeffs(vec![GaussRat::one(), GaussRat::i()], k)];
        let b: Vec<FormalScalar> = a.iter().map(|row| &(&row[0] * &x[0]) + &(&row[1] * &x[1])).collect();
        assert_eq!(solve_linear(&a, &b).unwrap(), x);
        let singular = vec![vec![FormalScalar::nu(k), FormalScalar::zero(k)], vec![FormalScalar::zero(k), FormalScalar::one(k)]];
        assert!(solve_linear(&singular, &b).is_err());
    }

    // [TRIVIAL]
    #[test]
    fn difference_of_squares() {
        let a = fs(&[1, 1], 2);
        let b = fs(&[1, -1], 2);
        assert_eq!(series_mul(&a, &b).unwrap(), fs(&[1, 0, -1], 2));
    }

    // [TRIVIAL]
    #[test]
    fn truncation_kills_high_powers() {
        let k = 3;
        let a = FormalScalar::nu(k);
        let b = FormalScalar::monomial(GaussRat::one(), k, k);
        assert!(series_mul(&a, &b).unwrap().is_zero());
    }

    // [TRIVIAL]
    #[test]
    fn mismatched_orders_rejected() {
        assert!(matches!(
            series_mul(&FormalScalar::one(2), &FormalScalar::one(3)),
            Err(Error::Config(_))
        ));
    }

    // [DERIVED]
    #[test]
    fn exp_taylor() {
        let e = series_exp(&FormalScalar::nu(3)).unwrap();
        let want = FormalScalar::from_coeffs(
            vec![GaussRat::one(), GaussRat::one(), GaussRat::frac(1, 2), GaussRat::frac(1, 6)],
            3,
        );
        assert_eq!(e, want);
        assert_eq!(series_exp(&FormalScalar::zero(3)).unwrap(), FormalScalar::one(3));
        assert!(matches!(series_exp(&FormalScalar::one(3)), Err(Error::Domain(_))));
    }

    // [DERIVED]
    #[test]
    fn exp_group_law() {
        for k in 0..6 {
            let a = series_exp(&FormalScalar::nu(k)).unwrap();
            let b = series_exp(&-FormalScalar::nu(k)).unwrap();
            assert_eq!(&a * &b, FormalScalar::one(k));
        }
    }

    // [DERIVED]
    #[test]
    fn log_inverts_exp() {
        let x = fs(&[0, 3, -2, 5], 3).scale(&GaussRat::i());
        assert_eq!(series_exp(&x).unwrap().log_unipotent().unwrap(), x);
    }

    // [DERIVED]
    #[test]
    fn inverse_of_unit() {
        let a = fs(&[2, 1, 7], 2);
        assert_eq!(&a * &a.inverse().unwrap(), FormalScalar::one(2));
        assert!(fs(&[0, 1], 2).inverse().is_err());
    }

    // [DERIVED]
    #[test]
    fn time_integrals() {
        let k = 2;
        assert_eq!(time_integrate(&TimeFun::constant(FormalScalar::one(k))).unwrap(), FormalScalar::one(k));
        assert!(time_integrate(&TimeFun::oscillation(1, FormalScalar::one(k))).unwrap().is_zero());
        let t = TimeFun::monomial(FormalScalar::one(k), 1);
        assert_eq!(
            time_integrate(&t).unwrap(),
            FormalScalar::constant(GaussRat::frac(1, 2), k)
        );
    }

    // [TRIVIAL]
    #[test]
    fn polynomial_amplitude_on_oscillation_rejected() {
        let t = TimeFun::monomial(FormalScalar::one(1), 1);
        let e = TimeFun::oscillation(1, FormalScalar::one(1));
        assert!(matches!(t.mul(&e), Err(Error::Unsupported(_))));
        assert_eq!(e.mul(&TimeFun::oscillation(-1, FormalScalar::one(1))).unwrap(), TimeFun::constant(FormalScalar::one(1)));
    }

    // [DERIVED]
    #[test]
    fn rescaling_preserves_integral_of_periodic_and_constant_parts() {
        let k = 1;
        let f = TimeFun::constant(FormalScalar::int(3, k)).add(&TimeFun::oscillation(2, FormalScalar::one(k)));
        let g = f.rescale(3).unwrap();
        assert_eq!(time_integrate(&f).unwrap(), time_integrate(&g).unwrap());
    }

    fn arb_gauss() -> impl Strategy<Value = GaussRat> {
        (-9i64..10, 1i64..5, -9i64..10, 1i64..5)
            .prop_map(|(a, b, c, d)| GaussRat::new(rat(a, b), rat(c, d)))
    }

    fn arb_series(k: usize) -> impl Strategy<Value = FormalScalar> {
        proptest::collection::vec(arb_gauss(), k + 1).prop_map(move |v| FormalScalar::from_coeffs(v, k))
    }

    proptest! {
        // [DERIVED]
        #[test]
        fn ring_axioms(a in arb_series(3), b in arb_series(3), c in arb_series(3)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        // [DERIVED]
        #[test]
        fn exp_is_additive(a in arb_series(3), b in arb_series(3)) {
            let mut a = a;
            let mut b = b;
            a.set_coeff(0, GaussRat::zero());
            b.set_coeff(0, GaussRat::zero());
            prop_assert_eq!(series_exp(&(&a + &b)).unwrap(), &series_exp(&a).unwrap() * &series_exp(&b).unwrap());
        }

        // [DERIVED]
        #[test]
        fn integrate_is_linear(a in arb_series(2), b in arb_series(2), f in 1i64..4) {
            let x = TimeFun::poly(vec![a.clone(), b.clone()]).add(&TimeFun::oscillation(f, a.clone()));
            let y = TimeFun::monomial(b.clone(), 2).add(&TimeFun::oscillation(-f, b.clone()));
            let lhs = time_integrate(&x.add(&y)).unwrap();
            let rhs = &time_integrate(&x).unwrap() + &time_integrate(&y).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert!(time_integrate(&TimeFun::oscillation(f, a)).unwrap().is_zero());
        }
    }
}
