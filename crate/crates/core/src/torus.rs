//! Fourier calculus on the standard symplectic torus `T^{2n}`.
//!
//! Coordinates `θ ∈ [0,2π)^{2n}`, modes `e_m = e^{i m·θ}`, and
//! `ω = Σ_b dθ_{2b}∧dθ_{2b+1}` (0-based indices), `Λ = ω⁻¹`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::{json, Value};

use crate::formal::{rat, FormalScalar, GaussRat, Rational};
use crate::{Error, Result};

pub type Mode = Vec<i64>;

/// `ω_{ij}`.
pub fn omega(i: usize, j: usize) -> i64 {
    if i / 2 != j / 2 {
        return 0;
    }
    match (i % 2, j % 2) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}

/// `Λ^{ij}`, the inverse matrix of `ω`.
pub fn lambda(i: usize, j: usize) -> i64 {
    -omega(i, j)
}

/// Integer pairing with `{e_m, e_n} = λ(m,n) e_{m+n}`.
pub fn pairing(m: &[i64], n: &[i64]) -> i64 {
    let mut s = 0;
    for i in 0..m.len() {
        for j in 0..n.len() {
            let l = lambda(i, j);
            if l != 0 {
                s -= l * m[i] * n[j];
            }
        }
    }
    s
}

pub fn mode_add(m: &[i64], n: &[i64]) -> Mode {
    m.iter().zip(n).map(|(a, b)| a + b).collect()
}

pub fn sup_norm(m: &[i64]) -> i64 {
    m.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// All modes with `|m|_∞ ≤ bound`.
pub fn mode_box(dim: usize, bound: i64) -> Vec<Mode> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for m in &out {
            for x in -bound..=bound {
                let mut m2 = m.clone();
                m2.push(x);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Finite Fourier polynomial with `FormalScalar` coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusFun {
    dim: usize,
    order: usize,
    modes: BTreeMap<Mode, FormalScalar>,
}

impl TorusFun {
    pub fn zero(dim: usize, order: usize) -> Self {
        TorusFun { dim, order, modes: BTreeMap::new() }
    }

    pub fn constant(c: FormalScalar, dim: usize) -> Self {
        Self::mode(vec![0; dim], c)
    }

    pub fn one(dim: usize, order: usize) -> Self {
        Self::constant(FormalScalar::one(order), dim)
    }

    /// `c · e_m`.
    pub fn mode(m: Mode, c: FormalScalar) -> Self {
        let mut f = TorusFun::zero(m.len(), c.order());
        f.add_term(m, &c);
        f
    }

    /// `e_m`.
    pub fn exp_mode(m: &[i64], order: usize) -> Self {
        Self::mode(m.to_vec(), FormalScalar::one(order))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modes(&self) -> &BTreeMap<Mode, FormalScalar> {
        &self.modes
    }

    pub fn coeff(&self, m: &[i64]) -> FormalScalar {
        self.modes.get(m).cloned().unwrap_or_else(|| FormalScalar::zero(self.order))
    }

    pub fn mean(&self) -> FormalScalar {
        self.coeff(&vec![0; self.dim])
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn max_mode(&self) -> i64 {
        self.modes.keys().map(|m| sup_norm(m)).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Mode, c: &FormalScalar) {
        assert_eq!(m.len(), self.dim, "mode dimension mismatch");
        if c.is_zero() {
            return;
        }
        match self.modes.get_mut(&m) {
            Some(cur) => {
                *cur += c;
                if cur.is_zero() {
                    self.modes.remove(&m);
                }
            }
            None => {
                self.modes.insert(m, c.clone());
            }
        }
    }

    fn map_coeffs(&self, f: impl Fn(&FormalScalar) -> FormalScalar) -> Self {
        let mut out = TorusFun::zero(self.dim, self.order);
        for (m, c) in &self.modes {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn add(&self, o: &TorusFun) -> TorusFun {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn add_assign(&mut self, o: &TorusFun) {
        assert_eq!(self.dim, o.dim);
        for (m, c) in &o.modes {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub(&self, o: &TorusFun) -> TorusFun {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> TorusFun {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, s: &FormalScalar) -> TorusFun {
        self.map_coeffs(|c| c * s)
    }

    pub fn scale_gauss(&self, s: &GaussRat) -> TorusFun {
        self.map_coeffs(|c| c.scale(s))
    }

    pub fn scale_rat(&self, q: &Rational) -> TorusFun {
        self.map_coeffs(|c| c.scale_rat(q))
    }

    /// Multiplication by `ν^j`.
    pub fn shift(&self, j: usize) -> TorusFun {
        self.map_coeffs(|c| c.shift(j))
    }

    pub fn truncated(&self, k: usize) -> TorusFun {
        self.map_coeffs(|c| c.truncated(k))
    }

    pub fn with_order(&self, order: usize) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, order);
        for (m, c) in &self.modes {
            out.add_term(m.clone(), &c.with_order(order));
        }
        out
    }

    /// Pointwise product.
    pub fn mul(&self, o: &TorusFun) -> TorusFun {
        assert_eq!(self.dim, o.dim);
        let mut out = TorusFun::zero(self.dim, self.order);
        for (m, a) in &self.modes {
            for (n, b) in &o.modes {
                out.add_term(mode_add(m, n), &(a * b));
            }
        }
        out
    }

    /// Complex conjugate function.
    pub fn conj(&self) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, self.order);
        for (m, c) in &self.modes {
            out.add_term(m.iter().map(|x| -x).collect(), &c.conj());
        }
        out
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    pub fn partial(&self, k: usize) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, self.order);
        for (m, c) in &self.modes {
            out.add_term(m.clone(), &c.scale(&GaussRat::new(rat(0, 1), rat(m[k], 1))));
        }
        out
    }

    /// `∂^α` for a multi-index `α`.
    pub fn partial_multi(&self, alpha: &[u32]) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, self.order);
        let total: u32 = alpha.iter().sum();
        for (m, c) in &self.modes {
            let mut p = BigInt::from(1);
            for (k, a) in alpha.iter().enumerate() {
                p *= BigInt::from(m[k]).pow(*a);
            }
            let f = GaussRat::i_pow(total as i64).scale(&Rational::from_integer(p));
            out.add_term(m.clone(), &c.scale(&f));
        }
        out
    }

    /// The ν^r coefficient, returned as a ν-free function.
    pub fn nu_coefficient(&self, r: usize) -> TorusFun {
        self.map_coeffs(|c| FormalScalar::constant(c.coeff(r), self.order))
    }

    /// Removes the mean.
    pub fn without_mean(&self) -> TorusFun {
        let mut out = self.clone();
        out.modes.remove(&vec![0; self.dim]);
        out
    }

    pub fn d(&self) -> TorusForm {
        let mut out = TorusForm::zero(self.dim, self.order, 1);
        for k in 0..self.dim {
            out.set(1 << k, self.partial(k));
        }
        out
    }
}

impl fmt::Display for TorusFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modes.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.modes.iter().map(|(m, c)| format!("[{c}]e{m:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn poisson(f: &TorusFun, g: &TorusFun) -> TorusFun {
    let mut out = TorusFun::zero(f.dim, f.order);
    for (m, a) in &f.modes {
        for (n, b) in &g.modes {
            let l = pairing(m, n);
            if l != 0 {
                out.add_term(mode_add(m, n), &(a * b).scale(&GaussRat::int(l)));
            }
        }
    }
    out
}

fn bit_sign_before(mask: u32, k: usize) -> i64 {
    if (mask & ((1u32 << k) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of `dx^J ∧ dx^L` relative to the increasing ordering, or 0 on overlap.
pub fn wedge_sign(j: u32, l: u32) -> i64 {
    if j & l != 0 {
        return 0;
    }
    let mut inv = 0;
    let mut jj = j;
    while jj != 0 {
        let b = jj.trailing_zeros();
        inv += (l & ((1u32 << b) - 1)).count_ones();
        jj &= jj - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `dx^k ∧ dx^J`: sign and resulting mask.
pub fn insert_index(k: usize, mask: u32) -> Option<(i64, u32)> {
    if mask & (1 << k) != 0 {
        None
    } else {
        Some((bit_sign_before(mask, k), mask | (1 << k)))
    }
}

/// `i(∂_k) dx^J`: sign and resulting mask.
pub fn remove_index(k: usize, mask: u32) -> Option<(i64, u32)> {
    if mask & (1 << k) == 0 {
        None
    } else {
        Some((bit_sign_before(mask, k), mask & !(1 << k)))
    }
}

pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask & (1 << k) != 0).collect()
}

/// Differential form; components keyed by increasing index sets encoded as bitmasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusForm {
    dim: usize,
    order: usize,
    degree: usize,
    comps: BTreeMap<u32, TorusFun>,
}

impl TorusForm {
    pub fn zero(dim: usize, order: usize, degree: usize) -> Self {
        TorusForm { dim, order, degree, comps: BTreeMap::new() }
    }

    /// `Σ c_k dθ_k` with constant coefficients.
    pub fn harmonic(periods: &[FormalScalar]) -> Self {
        let dim = periods.len();
        let order = periods[0].order();
        let mut out = TorusForm::zero(dim, order, 1);
        for (k, c) in periods.iter().enumerate() {
            out.set(1 << k, TorusFun::constant(c.clone(), dim));
        }
        out
    }

    /// `c · dθ_0∧dθ_1 ∧ …` style constant form on the given index set.
    pub fn constant(dim: usize, mask: u32, c: FormalScalar) -> Self {
        let mut out = TorusForm::zero(dim, c.order(), mask.count_ones() as usize);
        out.set(mask, TorusFun::constant(c, dim));
        out
    }

    /// The standard symplectic form `ω`.
    pub fn symplectic(dim: usize, order: usize) -> Self {
        let mut out = TorusForm::zero(dim, order, 2);
        for b in 0..dim / 2 {
            out.set(0b11 << (2 * b), TorusFun::one(dim, order));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<u32, TorusFun> {
        &self.comps
    }

    pub fn component(&self, mask: u32) -> TorusFun {
        self.comps.get(&mask).cloned().unwrap_or_else(|| TorusFun::zero(self.dim, self.order))
    }

    pub fn set(&mut self, mask: u32, f: TorusFun) {
        assert_eq!(mask.count_ones() as usize, self.degree, "form degree mismatch");
        if f.is_zero() {
            self.comps.remove(&mask);
        } else {
            self.comps.insert(mask, f);
        }
    }

    pub fn add_to(&mut self, mask: u32, f: &TorusFun) {
        let cur = self.component(mask).add(f);
        self.set(mask, cur);
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, o: &TorusForm) -> TorusForm {
        assert_eq!(self.degree, o.degree);
        let mut out = self.clone();
        for (j, f) in &o.comps {
            out.add_to(*j, f);
        }
        out
    }

    pub fn sub(&self, o: &TorusForm) -> TorusForm {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> TorusForm {
        self.map(|f| f.neg())
    }

    pub fn scale(&self, s: &FormalScalar) -> TorusForm {
        self.map(|f| f.scale(s))
    }

    pub fn scale_rat(&self, q: &Rational) -> TorusForm {
        self.map(|f| f.scale_rat(q))
    }

    pub fn shift(&self, j: usize) -> TorusForm {
        self.map(|f| f.shift(j))
    }

    pub fn truncated(&self, k: usize) -> TorusForm {
        self.map(|f| f.truncated(k))
    }

    pub fn with_order(&self, order: usize) -> TorusForm {
        let mut out = TorusForm::zero(self.dim, order, self.degree);
        for (j, f) in &self.comps {
            out.set(*j, f.with_order(order));
        }
        out
    }

    fn map(&self, g: impl Fn(&TorusFun) -> TorusFun) -> TorusForm {
        let mut out = TorusForm::zero(self.dim, self.order, self.degree);
        for (j, f) in &self.comps {
            out.set(*j, g(f));
        }
        out
    }

    pub fn d(&self) -> TorusForm {
        let mut out = TorusForm::zero(self.dim, self.order, self.degree + 1);
        for (j, f) in &self.comps {
            for k in 0..self.dim {
                if let Some((s, mask)) = insert_index(k, *j) {
                    out.add_to(mask, &f.partial(k).scale_rat(&Rational::from_integer(s.into())));
                }
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.d().is_zero()
    }

    pub fn wedge(&self, o: &TorusForm) -> TorusForm {
        let mut out = TorusForm::zero(self.dim, self.order, self.degree + o.degree);
        for (j, f) in &self.comps {
            for (l, g) in &o.comps {
                let s = wedge_sign(*j, *l);
                if s != 0 {
                    out.add_to(j | l, &f.mul(g).scale_rat(&Rational::from_integer(s.into())));
                }
            }
        }
        out
    }

    /// Interior product `i(X)` by a vector field.
    pub fn interior(&self, x: &TorusField) -> TorusForm {
        assert!(self.degree >= 1);
        let mut out = TorusForm::zero(self.dim, self.order, self.degree - 1);
        for (j, f) in &self.comps {
            for k in mask_indices(*j) {
                let (s, mask) = remove_index(k, *j).expect("index present");
                out.add_to(mask, &x.comps[k].mul(f).scale_rat(&Rational::from_integer(s.into())));
            }
        }
        out
    }

    /// Mean (mode-0) part of every component.
    pub fn mean_part(&self) -> TorusForm {
        self.map(|f| TorusFun::constant(f.mean(), self.dim))
    }

    pub fn max_mode(&self) -> i64 {
        self.comps.values().map(TorusFun::max_mode).max().unwrap_or(0)
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.comps.values().all(|f| f.max_mode() == 0)
    }
}

/// Vector field `Σ X^k ∂_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusField {
    pub comps: Vec<TorusFun>,
}

impl TorusField {
    pub fn zero(dim: usize, order: usize) -> Self {
        TorusField { comps: vec![TorusFun::zero(dim, order); dim] }
    }

    pub fn constant(v: &[FormalScalar]) -> Self {
        TorusField { comps: v.iter().map(|c| TorusFun::constant(c.clone(), v.len())).collect() }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn add(&self, o: &TorusField) -> TorusField {
        TorusField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(TorusFun::is_zero)
    }

    /// `X·∂F`.
    pub fn apply(&self, f: &TorusFun) -> TorusFun {
        let mut out = TorusFun::zero(f.dim(), f.order());
        for (k, x) in self.comps.iter().enumerate() {
            out.add_assign(&x.mul(&f.partial(k)));
        }
        out
    }

    /// Constant components, when the field is translation invariant.
    pub fn constant_components(&self) -> Option<Vec<FormalScalar>> {
        self.comps.iter().map(|c| if c.max_mode() == 0 { Some(c.mean()) } else { None }).collect()
    }

    /// `i(X)ω`.
    pub fn flat(&self) -> TorusForm {
        let dim = self.dim();
        let order = self.comps[0].order();
        TorusForm::symplectic(dim, order).interior(self)
    }
}

/// The unique `X` with `i(X)ω = dF`: `X^k = Σ_j ∂_jF Λ^{jk}`.
pub fn ham_field(f: &TorusFun) -> TorusField {
    sharp(&f.d())
}

/// The unique `X` with `i(X)ω = β`.
pub fn sharp(beta: &TorusForm) -> TorusField {
    assert_eq!(beta.degree(), 1);
    let dim = beta.dim();
    let mut x = TorusField::zero(dim, beta.order());
    for k in 0..dim {
        for j in 0..dim {
            let l = lambda(j, k);
            if l != 0 {
                x.comps[k].add_assign(&beta.component(1 << j).scale_rat(&Rational::from_integer(l.into())));
            }
        }
    }
    x
}

/// Periods of a closed 1-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1Class {
    pub periods: Vec<FormalScalar>,
}

impl H1Class {
    pub fn zero(dim: usize, order: usize) -> Self {
        H1Class { periods: vec![FormalScalar::zero(order); dim] }
    }

    pub fn add(&self, o: &H1Class) -> H1Class {
        H1Class { periods: self.periods.iter().zip(&o.periods).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &H1Class) -> H1Class {
        H1Class { periods: self.periods.iter().zip(&o.periods).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> H1Class {
        H1Class { periods: self.periods.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, s: &FormalScalar) -> H1Class {
        H1Class { periods: self.periods.iter().map(|a| a * s).collect() }
    }

    pub fn truncated(&self, k: usize) -> H1Class {
        H1Class { periods: self.periods.iter().map(|a| a.truncated(k)).collect() }
    }

    pub fn with_order(&self, k: usize) -> H1Class {
        H1Class { periods: self.periods.iter().map(|a| a.with_order(k)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.periods.iter().all(FormalScalar::is_zero)
    }

    pub fn to_form(&self) -> TorusForm {
        TorusForm::harmonic(&self.periods)
    }
}

impl fmt::Display for H1Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.periods.iter().map(|p| format!("({p})")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

pub fn h1_class(beta: &TorusForm) -> Result<H1Class> {
    if beta.degree() != 1 {
        return Err(Error::Domain("h1_class expects a 1-form".into()));
    }
    if !beta.is_closed() {
        return Err(Error::Domain("1-form is not closed".into()));
    }
    Ok(H1Class { periods: (0..beta.dim()).map(|k| beta.component(1 << k).mean()).collect() })
}

/// `F` with `dF = β` and zero mean.
pub fn primitive(beta: &TorusForm) -> Result<TorusFun> {
    let class = h1_class(beta)?;
    if !class.is_zero() {
        return Err(Error::Domain("not exact".into()));
    }
    let dim = beta.dim();
    let mut out = TorusFun::zero(dim, beta.order());
    let mut seen = std::collections::BTreeSet::new();
    for (mask, f) in beta.components() {
        let k = mask.trailing_zeros() as usize;
        for (m, c) in f.modes() {
            if m[k] == 0 || seen.contains(m) {
                continue;
            }
            let lead = m.iter().position(|x| *x != 0).expect("nonzero mode");
            if lead != k {
                continue;
            }
            seen.insert(m.clone());
            let div = GaussRat::new(rat(0, 1), rat(m[k], 1)).inv()?;
            out.add_term(m.clone(), &c.scale(&div));
        }
    }
    if out.d() != *beta {
        return Err(Error::Internal("primitive failed the round trip".into()));
    }
    Ok(out)
}

/// Random Fourier polynomial with small rational coefficients; `real` enforces conjugation symmetry.
pub fn random_fun<R: Rng>(rng: &mut R, dim: usize, order: usize, max_mode: i64, terms: usize, real: bool) -> TorusFun {
    let mut out = TorusFun::zero(dim, order);
    for _ in 0..terms {
        let m: Mode = (0..dim).map(|_| rng.gen_range(-max_mode..=max_mode)).collect();
        let coeffs: Vec<GaussRat> = (0..=order)
            .map(|_| {
                if rng.gen_bool(0.4) {
                    GaussRat::zero()
                } else {
                    GaussRat::new(
                        rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)),
                        rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)),
                    )
                }
            })
            .collect();
        let c = FormalScalar::from_coeffs(coeffs, order);
        let t = TorusFun::mode(m, c);
        if real {
            out.add_assign(&t.add(&t.conj()));
        } else {
            out.add_assign(&t);
        }
    }
    out
}

fn big_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(x) => json!(x),
        None => json!(b.to_string()),
    }
}

fn big_from_json(v: &Value) -> Result<BigInt> {
    if let Some(x) = v.as_i64() {
        return Ok(BigInt::from(x));
    }
    if let Some(s) = v.as_str() {
        return s.parse().map_err(|_| Error::Config(format!("bad integer {s}")));
    }
    Err(Error::Config(format!("expected integer, got {v}")))
}

pub fn rat_to_json(q: &Rational) -> Value {
    json!([big_to_json(q.numer()), big_to_json(q.denom())])
}

pub fn rat_from_json(v: &Value) -> Result<Rational> {
    if let Some(x) = v.as_i64() {
        return Ok(Rational::from_integer(x.into()));
    }
    let a = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Config(format!("expected [num, den], got {v}")))?;
    let d = big_from_json(&a[1])?;
    if d == BigInt::from(0) {
        return Err(Error::Config("zero denominator".into()));
    }
    Ok(Rational::new(big_from_json(&a[0])?, d))
}

pub fn gauss_to_json(c: &GaussRat) -> Value {
    json!({"re": rat_to_json(&c.re), "im": rat_to_json(&c.im)})
}

pub fn scalar_to_json(s: &FormalScalar) -> Value {
    json!({
        "re": s.coeffs().iter().map(|c| rat_to_json(&c.re)).collect::<Vec<_>>(),
        "im": s.coeffs().iter().map(|c| rat_to_json(&c.im)).collect::<Vec<_>>(),
    })
}

pub fn scalar_from_json(v: &Value, order: usize) -> Result<FormalScalar> {
    let list = |key: &str| -> Result<Vec<Rational>> {
        match v.get(key) {
            None => Ok(vec![]),
            Some(Value::Array(a)) => a.iter().map(rat_from_json).collect(),
            Some(x) => Err(Error::Config(format!("expected list under {key}, got {x}"))),
        }
    };
    let re = list("re")?;
    let im = list("im")?;
    if re.len() > order + 1 || im.len() > order + 1 {
        return Err(Error::Config("series longer than the truncation order".into()));
    }
    let coeffs = (0..=order)
        .map(|k| GaussRat::new(re.get(k).cloned().unwrap_or_else(|| rat(0, 1)), im.get(k).cloned().unwrap_or_else(|| rat(0, 1))))
        .collect();
    Ok(FormalScalar::from_coeffs(coeffs, order))
}

pub fn fun_to_json(f: &TorusFun) -> Value {
    let modes: Vec<Value> = f
        .modes()
        .iter()
        .map(|(m, c)| {
            let mut s = scalar_to_json(c);
            s["m"] = json!(m);
            s
        })
        .collect();
    json!({"dim": f.dim(), "truncation": f.order(), "modes": modes})
}

pub fn fun_from_json(v: &Value) -> Result<TorusFun> {
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::Config("missing dim".into()))? as usize;
    let order = v.get("truncation").and_then(Value::as_u64).ok_or_else(|| Error::Config("missing truncation".into()))? as usize;
    let mut out = TorusFun::zero(dim, order);
    for entry in v.get("modes").and_then(Value::as_array).cloned().unwrap_or_default() {
        let m: Mode = entry
            .get("m")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config("mode entry without m".into()))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| Error::Config("mode index must be an integer".into())))
            .collect::<Result<_>>()?;
        if m.len() != dim {
            return Err(Error::Config("mode length differs from dim".into()));
        }
        out.add_term(m, &scalar_from_json(&entry, order)?);
    }
    Ok(out)
}

pub fn form_to_json(f: &TorusForm) -> Value {
    let comps: Vec<Value> = f
        .components()
        .iter()
        .map(|(mask, g)| json!({"J": mask_indices(*mask), "fun": fun_to_json(g)}))
        .collect();
    json!({"dim": f.dim(), "truncation": f.order(), "degree": f.degree(), "components": comps})
}

pub fn class_to_json(c: &H1Class) -> Value {
    json!(c.periods.iter().map(scalar_to_json).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(m: &[i64]) -> TorusFun {
        TorusFun::exp_mode(m, 2)
    }

    // [TRIVIAL]
    #[test]
    fn poisson_of_basic_modes() {
        // {e_(1,0), e_(0,1)} = Λ^{12}(i)(i) e_(1,1) with Λ^{12} = −1
        assert_eq!(poisson(&e(&[1, 0]), &e(&[0, 1])), e(&[1, 1]));
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(1), 2, 2, 2, 4, false);
        assert!(poisson(&f, &TorusFun::one(2, 2)).is_zero());
        assert!(poisson(&f, &f).is_zero());
    }

    // [DERIVED]
    #[test]
    fn poisson_matches_coordinate_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let f = random_fun(&mut rng, 2, 1, 2, 3, false);
            let g = random_fun(&mut rng, 2, 1, 2, 3, false);
            // {F,G} = −ω(X_F, X_G)
            let xf = ham_field(&f);
            let xg = ham_field(&g);
            let mut w = TorusFun::zero(2, 1);
            for i in 0..2 {
                for j in 0..2 {
                    let o = omega(i, j);
                    if o != 0 {
                        w.add_assign(&xf.comps[i].mul(&xg.comps[j]).scale_rat(&rat(-o, 1)));
                    }
                }
            }
            assert_eq!(poisson(&f, &g), w);
        }
    }

    // [TRIVIAL]
    #[test]
    fn ham_field_of_mode() {
        let x = ham_field(&e(&[1, 0]));
        assert!(x.comps[0].is_zero());
        assert_eq!(x.comps[1], e(&[1, 0]).scale_gauss(&-GaussRat::i()));
        assert!(ham_field(&TorusFun::one(2, 2)).is_zero());
        // i(X)ω = dF
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(3), 4, 1, 1, 4, false);
        assert_eq!(ham_field(&f).flat(), f.d());
    }

    // [DERIVED]
    #[test]
    fn h1_and_primitive() {
        let k = 1;
        let dt2 = TorusForm::harmonic(&[FormalScalar::zero(k), FormalScalar::one(k)]);
        assert_eq!(h1_class(&dt2).unwrap().periods, vec![FormalScalar::zero(k), FormalScalar::one(k)]);
        let f = TorusFun::exp_mode(&[2, 1], k);
        assert!(h1_class(&f.d()).unwrap().is_zero());
        assert_eq!(primitive(&f.d()).unwrap(), f);
        assert!(primitive(&TorusForm::zero(2, k, 1)).unwrap().is_zero());
        let mut b = TorusForm::zero(2, k, 1);
        b.set(1, TorusFun::exp_mode(&[1, 0], k).scale_gauss(&GaussRat::i()));
        assert_eq!(primitive(&b).unwrap(), TorusFun::exp_mode(&[1, 0], k));
        assert!(matches!(primitive(&dt2), Err(Error::Domain(_))));
        let mut open = TorusForm::zero(2, k, 1);
        open.set(1, TorusFun::exp_mode(&[0, 1], k));
        assert!(matches!(h1_class(&open), Err(Error::Domain(_))));
    }

    // [DERIVED]
    #[test]
    fn class_is_linear_over_series() {
        let k = 2;
        let c1 = FormalScalar::from_coeffs(vec![GaussRat::one(), GaussRat::int(-3)], k);
        let b = TorusForm::harmonic(&[FormalScalar::zero(k), c1.clone()]);
        assert_eq!(h1_class(&b).unwrap().periods[1], c1);
    }

    // [TRIVIAL]
    #[test]
    fn json_round_trip() {
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(4), 2, 3, 2, 5, false);
        let v = fun_to_json(&f);
        assert_eq!(fun_from_json(&v).unwrap(), f);
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(fun_from_json(&serde_json::from_str(&text).unwrap()).unwrap(), f);
    }

    // [TRIVIAL]
    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_sign(0b01, 0b10), 1);
        assert_eq!(wedge_sign(0b10, 0b01), -1);
        assert_eq!(wedge_sign(0b11, 0b01), 0);
        assert_eq!(insert_index(0, 0b10), Some((1, 0b11)));
        assert_eq!(insert_index(1, 0b01), Some((-1, 0b11)));
    }

    fn arb_fun() -> impl Strategy<Value = TorusFun> {
        any::<u64>().prop_map(|s| random_fun(&mut ChaCha8Rng::seed_from_u64(s), 2, 1, 2, 3, false))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        // [DERIVED]
        #[test]
        fn jacobi(f in arb_fun(), g in arb_fun(), h in arb_fun()) {
            let s = poisson(&f, &poisson(&g, &h)).add(&poisson(&g, &poisson(&h, &f))).add(&poisson(&h, &poisson(&f, &g)));
            prop_assert!(s.is_zero());
        }

        // [DERIVED]
        #[test]
        fn leibniz(f in arb_fun(), g in arb_fun(), h in arb_fun()) {
            let lhs = poisson(&f, &g.mul(&h));
            let rhs = poisson(&f, &g).mul(&h).add(&g.mul(&poisson(&f, &h)));
            prop_assert_eq!(lhs, rhs);
        }

        // [DERIVED]
        #[test]
        fn d_squared_and_exactness(f in arb_fun(), g in arb_fun()) {
            prop_assert!(f.d().d().is_zero());
            let beta = f.d().scale(&FormalScalar::int(2, 1)).wedge(&g.d());
            prop_assert!(f.d().wedge(&g.d()).d().is_zero());
            prop_assert!(beta.d().is_zero());
            prop_assert!(h1_class(&f.d()).unwrap().is_zero());
            prop_assert_eq!(primitive(&f.d()).unwrap(), f.without_mean());
        }
    }
}
