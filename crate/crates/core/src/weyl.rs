//! Weyl-bundle calculus over the torus: sections `Σ ν^k a_{α,J}(x) y^α dx^J`,
//! the fiberwise product, commutators, δ, δ⁻¹, connections and translations.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde_json::{json, Value};

use crate::formal::{rat, FormalScalar, Rational};
use crate::torus::{
    fun_to_json, insert_index, lambda, mask_indices, omega, random_fun, remove_index, wedge_sign, TorusField, TorusForm,
    TorusFun,
};
use crate::{Error, Result};

/// y-multidegree and dx index set of a term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeylKey {
    pub y: Vec<u32>,
    pub form: u32,
}

impl WeylKey {
    pub fn new(y: Vec<u32>, form: u32) -> Self {
        WeylKey { y, form }
    }

    pub fn ydeg(&self) -> u32 {
        self.y.iter().sum()
    }

    pub fn form_degree(&self) -> u32 {
        self.form.count_ones()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylSection {
    dim: usize,
    order: usize,
    dmax: usize,
    terms: BTreeMap<WeylKey, TorusFun>,
}

/// Drops `ν^k` with `2k + ydeg > dmax`.
fn prune_fun(f: &TorusFun, ydeg: usize, dmax: usize) -> TorusFun {
    if ydeg > dmax {
        return TorusFun::zero(f.dim(), f.order());
    }
    let kmax = (dmax - ydeg) / 2;
    if kmax >= f.order() {
        f.clone()
    } else {
        f.truncated(kmax)
    }
}

fn unit(dim: usize, k: usize) -> Vec<u32> {
    let mut v = vec![0; dim];
    v[k] = 1;
    v
}

impl WeylSection {
    pub fn zero(dim: usize, order: usize, dmax: usize) -> Self {
        WeylSection { dim, order, dmax, terms: BTreeMap::new() }
    }

    /// `f y^α dx^J`.
    pub fn monomial(y: Vec<u32>, form: u32, f: TorusFun, dmax: usize) -> Self {
        let mut s = WeylSection::zero(f.dim(), f.order(), dmax);
        s.add_term(WeylKey::new(y, form), &f);
        s
    }

    pub fn function(f: TorusFun, dmax: usize) -> Self {
        let dim = f.dim();
        Self::monomial(vec![0; dim], 0, f, dmax)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }

    pub fn terms(&self) -> &BTreeMap<WeylKey, TorusFun> {
        &self.terms
    }

    pub fn get(&self, key: &WeylKey) -> TorusFun {
        self.terms.get(key).cloned().unwrap_or_else(|| TorusFun::zero(self.dim, self.order))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: WeylKey, f: &TorusFun) {
        let f = prune_fun(f, key.ydeg() as usize, self.dmax);
        if f.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(cur) => {
                cur.add_assign(&f);
                if cur.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, f);
            }
        }
    }

    fn map(&self, g: impl Fn(&TorusFun) -> TorusFun) -> Self {
        let mut out = WeylSection::zero(self.dim, self.order, self.dmax);
        for (k, f) in &self.terms {
            out.add_term(k.clone(), &g(f));
        }
        out
    }

    pub fn add(&self, o: &WeylSection) -> WeylSection {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn add_assign(&mut self, o: &WeylSection) {
        for (k, f) in &o.terms {
            self.add_term(k.clone(), f);
        }
    }

    pub fn sub(&self, o: &WeylSection) -> WeylSection {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> WeylSection {
        self.map(TorusFun::neg)
    }

    pub fn scale(&self, s: &FormalScalar) -> WeylSection {
        self.map(|f| f.scale(s))
    }

    pub fn scale_rat(&self, q: &Rational) -> WeylSection {
        self.map(|f| f.scale_rat(q))
    }

    /// Multiplication by `ν^j`.
    pub fn shift(&self, j: usize) -> WeylSection {
        self.map(|f| f.shift(j))
    }

    /// Multiplies every coefficient by a function.
    pub fn mul_fun(&self, g: &TorusFun) -> WeylSection {
        self.map(|f| f.mul(g))
    }

    pub fn with_dmax(&self, dmax: usize) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, dmax);
        for (k, f) in &self.terms {
            out.add_term(k.clone(), f);
        }
        out
    }

    /// Keeps only the parts of Weyl degree in `[lo, hi]`.
    pub fn degree_range(&self, lo: usize, hi: usize) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, self.dmax);
        for (key, f) in &self.terms {
            let l = key.ydeg() as usize;
            let mut g = TorusFun::zero(self.dim, self.order);
            for (m, c) in f.modes() {
                let mut c2 = FormalScalar::zero(self.order);
                for k in 0..=self.order {
                    let d = 2 * k + l;
                    if d >= lo && d <= hi {
                        c2.set_coeff(k, c.coeff(k));
                    }
                }
                g.add_term(m.clone(), &c2);
            }
            out.add_term(key.clone(), &g);
        }
        out
    }

    pub fn degree_at_least(&self, lo: usize) -> WeylSection {
        self.degree_range(lo, usize::MAX)
    }

    pub fn degree_at_most(&self, hi: usize) -> WeylSection {
        self.degree_range(0, hi)
    }

    /// Smallest Weyl degree present.
    pub fn min_degree(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|(k, f)| {
                f.modes().values().filter_map(|c| c.valuation()).min().map(|v| 2 * v + k.ydeg() as usize)
            })
            .min()
    }

    pub fn form_part(&self, q: u32) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, self.dmax);
        for (k, f) in &self.terms {
            if k.form_degree() == q {
                out.add_term(k.clone(), f);
            }
        }
        out
    }

    /// The y⁰, form-degree-0 part `a₀₀`.
    pub fn a00(&self) -> TorusFun {
        self.get(&WeylKey::new(vec![0; self.dim], 0))
    }

    /// The symbol map σ.
    pub fn symbol(&self) -> TorusFun {
        self.a00()
    }

    pub fn max_mode(&self) -> i64 {
        self.terms.values().map(TorusFun::max_mode).max().unwrap_or(0)
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.max_mode() == 0
    }

    /// Exterior derivative of the coefficients, `dx^k ∧ ∂_k`.
    pub fn d(&self) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, self.dmax);
        for (key, f) in &self.terms {
            for k in 0..self.dim {
                if let Some((s, mask)) = insert_index(k, key.form) {
                    out.add_term(WeylKey::new(key.y.clone(), mask), &f.partial(k).scale_rat(&rat(s, 1)));
                }
            }
        }
        out
    }

    /// `X^k ∂_k` on the coefficients, for a constant field.
    pub fn lie_derivative(&self, x: &[FormalScalar]) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, self.dmax);
        for (key, f) in &self.terms {
            for (k, xk) in x.iter().enumerate() {
                out.add_term(key.clone(), &f.partial(k).scale(xk));
            }
        }
        out
    }

    /// Interior product `i(X)` with a constant field.
    pub fn interior(&self, x: &[FormalScalar]) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, self.dmax);
        for (key, f) in &self.terms {
            for k in mask_indices(key.form) {
                if x[k].is_zero() {
                    continue;
                }
                let (s, mask) = remove_index(k, key.form).expect("index present");
                out.add_term(WeylKey::new(key.y.clone(), mask), &f.scale(&x[k]).scale_rat(&rat(s, 1)));
            }
        }
        out
    }

    /// Translation pullback along the loop `θ ↦ θ + 2πt v`: returns the frequency
    /// decomposition `Σ_k e^{2πikt} a_k`.
    pub fn pullback_loop(&self, v: &[Rational]) -> Result<BTreeMap<i64, WeylSection>> {
        let v = integer_direction(v)?;
        let mut out: BTreeMap<i64, WeylSection> = BTreeMap::new();
        for (key, f) in &self.terms {
            for (m, c) in f.modes() {
                let k: i64 = m.iter().zip(&v).map(|(a, b)| a * b).sum();
                out.entry(k)
                    .or_insert_with(|| WeylSection::zero(self.dim, self.order, self.dmax))
                    .add_term(key.clone(), &TorusFun::mode(m.clone(), c.clone()));
            }
        }
        Ok(out)
    }
}

pub fn integer_direction(v: &[Rational]) -> Result<Vec<i64>> {
    v.iter()
        .map(|q| {
            if q.is_integer() {
                num_traits::ToPrimitive::to_i64(&q.to_integer()).ok_or_else(|| Error::Domain("direction too large".into()))
            } else {
                Err(Error::Domain("non-integer direction: path is not a loop".into()))
            }
        })
        .collect()
}

/// `∫₀¹` of a pulled-back family: only the frequency-0 part survives.
pub fn integrate_family(family: &BTreeMap<i64, WeylSection>, template: &WeylSection) -> WeylSection {
    family.get(&0).cloned().unwrap_or_else(|| WeylSection::zero(template.dim, template.order, template.dmax))
}

struct Contractions {
    fact: Vec<Rational>,
    cache: HashMap<(Vec<u32>, Vec<u32>), Vec<(u32, Rational, Vec<u32>)>>,
}

impl Contractions {
    fn new(n: usize) -> Self {
        let mut fact = vec![rat(1, 1)];
        for i in 1..=n + 1 {
            let last = fact[i - 1].clone();
            fact.push(last * rat(i as i64, 1));
        }
        Contractions { fact, cache: HashMap::new() }
    }

    fn ff(&self, n: u32, p: u32) -> Rational {
        &self.fact[n as usize] / &self.fact[(n - p) as usize]
    }

    /// Terms `(N, c, γ)` of `exp((ν/2)Λ^{ij}∂_{y^i}⊗∂_{z^j}) y^α z^β |_{z=y} = Σ c ν^N y^γ`.
    fn get(&mut self, a: &[u32], b: &[u32]) -> &[(u32, Rational, Vec<u32>)] {
        let key = (a.to_vec(), b.to_vec());
        if !self.cache.contains_key(&key) {
            let v = self.compute(a, b);
            self.cache.insert(key.clone(), v);
        }
        &self.cache[&key]
    }

    fn compute(&self, a: &[u32], b: &[u32]) -> Vec<(u32, Rational, Vec<u32>)> {
        let dim = a.len();
        let mut acc = vec![(0u32, rat(1, 1), vec![0u32; dim])];
        for blk in 0..dim / 2 {
            let (i, j) = (2 * blk, 2 * blk + 1);
            let c = lambda(i, j);
            let mut next = Vec::new();
            for (n0, c0, g0) in &acc {
                for p in 0..=a[i].min(b[j]) {
                    for q in 0..=a[j].min(b[i]) {
                        let n = p + q;
                        let sign = c.pow(n) * if q % 2 == 0 { 1 } else { -1 };
                        let coef = rat(sign, 1) / (&self.fact[p as usize] * &self.fact[q as usize] * rat(1 << n, 1))
                            * self.ff(a[i], p)
                            * self.ff(a[j], q)
                            * self.ff(b[j], p)
                            * self.ff(b[i], q);
                        let mut g = g0.clone();
                        g[i] = a[i] - p + b[i] - q;
                        g[j] = a[j] - q + b[j] - p;
                        next.push((n0 + n, c0 * coef, g));
                    }
                }
            }
            acc = next;
        }
        acc
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ProductKind {
    Circ,
    Scaled,
    SymbolOnly,
    ScaledSymbol,
}

impl ProductKind {
    fn symbol_only(self) -> bool {
        matches!(self, ProductKind::SymbolOnly | ProductKind::ScaledSymbol)
    }

    fn scaled(self) -> bool {
        matches!(self, ProductKind::Scaled | ProductKind::ScaledSymbol)
    }
}

fn product(a: &WeylSection, b: &WeylSection, kind: ProductKind) -> WeylSection {
    assert_eq!(a.dim, b.dim);
    assert_eq!(a.order, b.order);
    let dmax = a.dmax.max(b.dmax);
    let mut out = WeylSection::zero(a.dim, a.order, dmax);
    let mut con = Contractions::new(2 * dmax + 4);
    for (ka, fa) in &a.terms {
        for (kb, fb) in &b.terms {
            let s = wedge_sign(ka.form, kb.form);
            if s == 0 {
                continue;
            }
            if kind.symbol_only() && (ka.form | kb.form) != 0 {
                continue;
            }
            let la = ka.ydeg() as usize;
            let lb = kb.ydeg() as usize;
            let slack = if kind.scaled() { 2 } else { 0 };
            if la + lb > dmax + slack {
                continue;
            }
            if kind.symbol_only() {
                let swapped: Vec<u32> = (0..a.dim).map(|i| ka.y[i ^ 1]).collect();
                if kb.y != swapped {
                    continue;
                }
            }
            let mut prod: Option<TorusFun> = None;
            for (n, coef, g) in con.get(&ka.y, &kb.y).to_vec() {
                let (shift, factor) = if kind.scaled() {
                    if n % 2 == 0 {
                        continue;
                    }
                    (n as usize - 1, coef * rat(2 * s, 1))
                } else {
                    (n as usize, coef * rat(s, 1))
                };
                if kind.symbol_only() && g.iter().any(|x| *x != 0) {
                    continue;
                }
                let gdeg: u32 = g.iter().sum();
                if gdeg as usize + 2 * shift > dmax || shift > a.order {
                    continue;
                }
                let p = prod.get_or_insert_with(|| fa.mul(fb));
                out.add_term(WeylKey::new(g, ka.form | kb.form), &p.shift(shift).scale_rat(&factor));
            }
        }
    }
    out
}

/// Fiberwise Moyal product, wedge on forms.
pub fn circ(a: &WeylSection, b: &WeylSection) -> WeylSection {
    product(a, b, ProductKind::Circ)
}

/// `σ(a∘b)` for 0-forms, computed from full contractions only.
pub fn circ_symbol(a: &WeylSection, b: &WeylSection) -> TorusFun {
    product(a, b, ProductKind::SymbolOnly).a00()
}

/// `(1/ν)[a,b]` from the odd contraction orders.
pub fn scaled_commutator(a: &WeylSection, b: &WeylSection) -> WeylSection {
    product(a, b, ProductKind::Scaled)
}

/// `σ((1/ν)[a,b])` for 0-forms.
pub fn scaled_symbol(a: &WeylSection, b: &WeylSection) -> TorusFun {
    product(a, b, ProductKind::ScaledSymbol).a00()
}

/// `[a,b] = a∘b − (−1)^{q₁q₂} b∘a`.
pub fn graded_commutator(a: &WeylSection, b: &WeylSection) -> WeylSection {
    scaled_commutator(a, b).shift(1)
}

/// `δa = dx^k ∧ ∂_{y^k} a`.
pub fn delta(a: &WeylSection) -> WeylSection {
    let mut out = WeylSection::zero(a.dim, a.order, a.dmax);
    for (key, f) in &a.terms {
        for k in 0..a.dim {
            if key.y[k] == 0 {
                continue;
            }
            if let Some((s, mask)) = insert_index(k, key.form) {
                let mut y = key.y.clone();
                y[k] -= 1;
                out.add_term(WeylKey::new(y, mask), &f.scale_rat(&rat(s * key.y[k] as i64, 1)));
            }
        }
    }
    out
}

/// `δ⁻¹a_{pq} = (1/(p+q)) y^k i(∂_k) a_{pq}`, `δ⁻¹a₀₀ = 0`.
pub fn delta_inv(a: &WeylSection) -> WeylSection {
    let mut out = WeylSection::zero(a.dim, a.order, a.dmax);
    for (key, f) in &a.terms {
        let pq = key.ydeg() + key.form_degree();
        if pq == 0 {
            continue;
        }
        for k in mask_indices(key.form) {
            let (s, mask) = remove_index(k, key.form).expect("index present");
            let mut y = key.y.clone();
            y[k] += 1;
            out.add_term(WeylKey::new(y, mask), &f.scale_rat(&rat(s, pq as i64)));
        }
    }
    out
}

/// `ω_{ij} y^i dx^j`, with `δ = −(1/ν)[ω_{ij}y^i dx^j, ·]`.
pub fn omega_y_dx(dim: usize, order: usize, dmax: usize) -> WeylSection {
    let mut out = WeylSection::zero(dim, order, dmax);
    for i in 0..dim {
        for j in 0..dim {
            let o = omega(i, j);
            if o != 0 {
                out.add_term(WeylKey::new(unit(dim, i), 1 << j), &TorusFun::constant(FormalScalar::int(o, order), dim));
            }
        }
    }
    out
}

/// `ω_{ij} X^i y^j` for a constant field `X`.
pub fn lowered_linear(x: &[FormalScalar], dmax: usize) -> WeylSection {
    let dim = x.len();
    let order = x[0].order();
    let mut out = WeylSection::zero(dim, order, dmax);
    for i in 0..dim {
        for j in 0..dim {
            let o = omega(i, j);
            if o != 0 && !x[i].is_zero() {
                out.add_term(WeylKey::new(unit(dim, j), 0), &TorusFun::constant(x[i].scale_rat(&rat(o, 1)), dim));
            }
        }
    }
    out
}

/// Symplectic connection with Christoffel symbols `Γ^k_{ij}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticConnection {
    dim: usize,
    order: usize,
    gamma: BTreeMap<(usize, usize, usize), TorusFun>,
}

impl SymplecticConnection {
    pub fn flat(dim: usize, order: usize) -> Self {
        SymplecticConnection { dim, order, gamma: BTreeMap::new() }
    }

    /// From `Γ^k_{ij}` keyed by `(k, i, j)`; checks torsion-freeness and `∇ω = 0`.
    pub fn new(dim: usize, order: usize, gamma: BTreeMap<(usize, usize, usize), TorusFun>) -> Result<Self> {
        let conn = SymplecticConnection { dim, order, gamma: gamma.into_iter().filter(|(_, f)| !f.is_zero()).collect() };
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if conn.christoffel(k, i, j) != conn.christoffel(k, j, i) {
                        return Err(Error::Domain("connection has torsion".into()));
                    }
                }
            }
        }
        for l in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    if conn.lowered(l, i, j) != conn.lowered(j, i, l) {
                        return Err(Error::Domain("connection does not preserve ω".into()));
                    }
                }
            }
        }
        Ok(conn)
    }

    /// Connection from a totally symmetric constant tensor `S_{lij} = ω_{lk}Γ^k_{ij}`.
    pub fn from_symmetric(dim: usize, order: usize, s: impl Fn(usize, usize, usize) -> Rational) -> Result<Self> {
        let mut gamma = BTreeMap::new();
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut v = rat(0, 1);
                    for l in 0..dim {
                        let lam = lambda(k, l);
                        if lam != 0 {
                            v += rat(lam, 1) * s(l, i, j);
                        }
                    }
                    let f = TorusFun::constant(FormalScalar::constant(crate::formal::GaussRat::real(v), order), dim);
                    gamma.insert((k, i, j), f);
                }
            }
        }
        Self::new(dim, order, gamma)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_flat_data(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.gamma.values().all(|f| f.max_mode() == 0)
    }

    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> TorusFun {
        self.gamma.get(&(k, i, j)).cloned().unwrap_or_else(|| TorusFun::zero(self.dim, self.order))
    }

    /// `ω_{lk}Γ^k_{ij}`.
    pub fn lowered(&self, l: usize, i: usize, j: usize) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, self.order);
        for k in 0..self.dim {
            let o = omega(l, k);
            if o != 0 {
                out.add_assign(&self.christoffel(k, i, j).scale_rat(&rat(o, 1)));
            }
        }
        out
    }

    /// `Γ̄ = ½ ω_{lk}Γ^k_{ij} y^l y^j dx^i`.
    pub fn gamma_bar(&self, dmax: usize) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, dmax);
        for l in 0..self.dim {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let c = self.lowered(l, i, j);
                    if c.is_zero() {
                        continue;
                    }
                    let mut y = vec![0; self.dim];
                    y[l] += 1;
                    y[j] += 1;
                    out.add_term(WeylKey::new(y, 1 << i), &c.scale_rat(&rat(1, 2)));
                }
            }
        }
        out
    }

    /// `R̄ = dΓ̄ + ½(1/ν)[Γ̄, Γ̄]`.
    pub fn curvature_section(&self, dmax: usize) -> WeylSection {
        let g = self.gamma_bar(dmax);
        g.d().add(&scaled_commutator(&g, &g).scale_rat(&rat(1, 2)))
    }

    /// `R^r_{jkl} = ∂_kΓ^r_{lj} − ∂_lΓ^r_{kj} + Γ^r_{ks}Γ^s_{lj} − Γ^r_{ls}Γ^s_{kj}`.
    pub fn riemann(&self, r: usize, j: usize, k: usize, l: usize) -> TorusFun {
        let mut out = self.christoffel(r, l, j).partial(k).sub(&self.christoffel(r, k, j).partial(l));
        for s in 0..self.dim {
            out.add_assign(&self.christoffel(r, k, s).mul(&self.christoffel(s, l, j)));
            out = out.sub(&self.christoffel(r, l, s).mul(&self.christoffel(s, k, j)));
        }
        out
    }

    /// `(∇_i X)_j y^i y^j = ω_{kj} (∇_i X)^k y^i y^j` for a constant field.
    pub fn covariant_quadratic(&self, x: &[FormalScalar], dmax: usize) -> WeylSection {
        let mut out = WeylSection::zero(self.dim, self.order, dmax);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut c = TorusFun::zero(self.dim, self.order);
                for k in 0..self.dim {
                    let o = omega(k, j);
                    if o == 0 {
                        continue;
                    }
                    for (l, xl) in x.iter().enumerate() {
                        c.add_assign(&self.christoffel(k, i, l).scale(xl).scale_rat(&rat(o, 1)));
                    }
                }
                let mut y = vec![0; self.dim];
                y[i] += 1;
                y[j] += 1;
                out.add_term(WeylKey::new(y, 0), &c);
            }
        }
        out
    }
}

/// `∂a = da + (1/ν)[Γ̄, a]`.
pub fn connection(a: &WeylSection, conn: &SymplecticConnection) -> WeylSection {
    let mut out = a.d();
    if !conn.is_flat_data() {
        out.add_assign(&scaled_commutator(&conn.gamma_bar(a.dmax), a));
    }
    out
}

/// `𝒟a = ∂a − δa + (1/ν)[r, a]`.
pub fn fedosov_derivative(a: &WeylSection, conn: &SymplecticConnection, r: &WeylSection) -> WeylSection {
    let mut out = connection(a, conn).sub(&delta(a));
    if !r.is_zero() {
        out.add_assign(&scaled_commutator(r, a));
    }
    out
}

/// Residual of the Cartan formula for the translation flow of a constant field, at `t = 0`:
/// `L_X a − (i(X)𝒟a + 𝒟 i(X)a + (1/ν)[ω_{ij}X^iy^j + ½(∇_iX)_jy^iy^j − i(X)r, a])`.
pub fn cartan_check(x: &[FormalScalar], conn: &SymplecticConnection, r: &WeylSection, a: &WeylSection) -> WeylSection {
    let dmax = a.dmax;
    let lhs = a.lie_derivative(x);
    let mut rhs = fedosov_derivative(a, conn, r).interior(x);
    rhs.add_assign(&fedosov_derivative(&a.interior(x), conn, r));
    let gen = lowered_linear(x, dmax)
        .add(&conn.covariant_quadratic(x, dmax).scale_rat(&rat(1, 2)))
        .sub(&r.interior(x));
    rhs.add_assign(&scaled_commutator(&gen, a));
    lhs.sub(&rhs)
}

/// Random section with y-degree ≤ `max_y` and the given form degrees.
pub fn random_section<R: Rng>(
    rng: &mut R,
    dim: usize,
    order: usize,
    dmax: usize,
    max_y: u32,
    form_degrees: &[u32],
    terms: usize,
) -> WeylSection {
    let mut out = WeylSection::zero(dim, order, dmax);
    for _ in 0..terms {
        let total = rng.gen_range(0..=max_y);
        let mut y = vec![0u32; dim];
        for _ in 0..total {
            y[rng.gen_range(0..dim)] += 1;
        }
        let q = form_degrees[rng.gen_range(0..form_degrees.len())];
        let mut idx: Vec<usize> = (0..dim).collect();
        let mut mask = 0u32;
        for _ in 0..q {
            let p = rng.gen_range(0..idx.len());
            mask |= 1 << idx.remove(p);
        }
        let f = random_fun(rng, dim, order, 1, 2, false);
        out.add_term(WeylKey::new(y, mask), &f);
    }
    out
}

/// Constant 2-form as a y⁰ section.
pub fn form_section(beta: &TorusForm, dmax: usize) -> WeylSection {
    let mut out = WeylSection::zero(beta.dim(), beta.order(), dmax);
    for (mask, f) in beta.components() {
        out.add_term(WeylKey::new(vec![0; beta.dim()], *mask), f);
    }
    out
}

/// The y⁰ part of a section as a differential form of degree `q`.
pub fn y0_form(a: &WeylSection, q: usize) -> TorusForm {
    let mut out = TorusForm::zero(a.dim, a.order, q);
    for (key, f) in &a.terms {
        if key.ydeg() == 0 && key.form_degree() as usize == q {
            out.add_to(key.form, f);
        }
    }
    out
}

/// Constant components of a field, when it is translation invariant.
pub fn constant_field(x: &TorusField) -> Result<Vec<FormalScalar>> {
    x.constant_components().ok_or_else(|| Error::Unsupported("only constant vector fields are supported".into()))
}

pub fn section_to_json(a: &WeylSection) -> Value {
    let terms: Vec<Value> = a
        .terms
        .iter()
        .map(|(k, f)| json!({"y": k.y, "J": mask_indices(k.form), "fun": fun_to_json(f)}))
        .collect();
    json!({"dim": a.dim, "truncation": a.order, "dmax": a.dmax, "terms": terms})
}
