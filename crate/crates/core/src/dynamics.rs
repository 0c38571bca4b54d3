//! Derivations, Heisenberg flows and the automorphisms they generate.
//!
//! A derivation is carried by the closed 1-form `β = i(p(D))ω`. Flows are computed in two
//! independent ways: a Picard recursion on functions, valid for any star product, and the
//! Fedosov route, which solves for the exponent `u` of `A = φ* ∘ exp((1/ν) ad u)` on flat sections.

use crate::fedosov::FedosovProduct;
use crate::formal::{rat, time_integrate, FormalScalar, Rational, TimeFun};
use crate::star::StarProduct;
use crate::torus::{h1_class, mode_box, primitive, sharp, H1Class, TorusField, TorusForm, TorusFun};
use crate::weyl::{scaled_commutator, y0_form, WeylSection};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    beta: TorusForm,
}

impl Derivation {
    pub fn new(beta: TorusForm) -> Result<Self> {
        if beta.degree() != 1 {
            return Err(Error::Domain("a derivation is given by a 1-form".into()));
        }
        if !beta.is_closed() {
            return Err(Error::Domain("1-form is not closed".into()));
        }
        Ok(Derivation { beta })
    }

    /// `D_H = (1/ν)[H, ·]_*`.
    pub fn quasi_inner(h: &TorusFun) -> Self {
        Derivation { beta: h.d() }
    }

    pub fn harmonic(c: &[FormalScalar]) -> Self {
        Derivation { beta: TorusForm::harmonic(c) }
    }

    pub fn beta(&self) -> &TorusForm {
        &self.beta
    }

    pub fn class(&self) -> H1Class {
        h1_class(&self.beta).expect("closed by construction")
    }

    pub fn is_quasi_inner(&self) -> bool {
        self.class().is_zero()
    }

    /// `p(D)`.
    pub fn field(&self) -> TorusField {
        sharp(&self.beta)
    }

    /// `D F` for any star product: the harmonic part through `linear_bracket`, the exact part as a
    /// quasi-inner derivation.
    pub fn apply(&self, p: &dyn StarProduct, f: &TorusFun) -> TorusFun {
        let class = self.class();
        let exact = self.beta.sub(&class.to_form());
        let h = primitive(&exact).expect("exact by construction");
        let mut out = p.scaled_commutator(&h, f);
        if !class.is_zero() {
            out.add_assign(&p.linear_bracket(&class.periods, f));
        }
        out
    }

    /// `σ((1/ν)[q_tail(β), QF])`.
    pub fn apply_fedosov(&self, p: &FedosovProduct, f: &TorusFun) -> TorusFun {
        p.derivation(&self.beta, f).expect("closed by construction")
    }

    /// `[D, D']`, whose 1-form `dσ((1/ν)[q_tail(β), q_tail(β')])` is exact.
    pub fn commutator(&self, o: &Derivation, p: &FedosovProduct) -> Derivation {
        let data = p.data();
        let a = data.q_tail(&self.beta).expect("closed");
        let b = data.q_tail(&o.beta).expect("closed");
        Derivation { beta: scaled_commutator(&a, &b).symbol().d() }
    }
}

/// `t ↦ Σ_k p_k(t) β_k` on `[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathGenerator {
    dim: usize,
    order: usize,
    terms: Vec<(TimeFun, TorusForm)>,
}

/// One generator term with a polynomial profile and its classical translation rate.
struct FlowTerm {
    profile: Vec<FormalScalar>,
    classical_profile: Vec<FormalScalar>,
    beta: TorusForm,
    rate: Vec<FormalScalar>,
}

impl PathGenerator {
    pub fn new(dim: usize, order: usize) -> Self {
        PathGenerator { dim, order, terms: Vec::new() }
    }

    pub fn autonomous(beta: TorusForm) -> Result<Self> {
        let mut g = PathGenerator::new(beta.dim(), beta.order());
        g.push(TimeFun::constant(FormalScalar::one(beta.order())), beta)?;
        Ok(g)
    }

    /// Autonomous quasi-inner path of `H`.
    pub fn hamiltonian(h: &TorusFun) -> Self {
        Self::autonomous(h.d()).expect("exact forms are closed")
    }

    pub fn push(&mut self, profile: TimeFun, beta: TorusForm) -> Result<()> {
        Derivation::new(beta.clone())?;
        if beta.dim() != self.dim || beta.order() != self.order || profile.order() != self.order {
            return Err(Error::Config("generator terms have mismatched dimension or order".into()));
        }
        self.terms.push((profile, beta));
        Ok(())
    }

    pub fn with(mut self, profile: TimeFun, beta: TorusForm) -> Result<Self> {
        self.push(profile, beta)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[(TimeFun, TorusForm)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(p, b)| p.is_zero() || b.is_zero())
    }

    /// `∫₀¹ [β_t] dt`.
    pub fn flux(&self) -> Result<H1Class> {
        let mut out = H1Class::zero(self.dim, self.order);
        for (p, b) in &self.terms {
            out = out.add(&h1_class(b)?.scale(&time_integrate(p)?));
        }
        Ok(out)
    }

    /// The path `t ↦ A_{at}`-generator on `[0,1]`, `a·β_{at}`.
    pub fn rescaled(&self, a: i64) -> Result<Self> {
        let mut out = PathGenerator::new(self.dim, self.order);
        for (p, b) in &self.terms {
            out.push(p.rescale(a)?, b.scale_rat(&rat(a, 1)))?;
        }
        Ok(out)
    }

    fn flow_terms(&self) -> Result<Vec<FlowTerm>> {
        let mut out = Vec::new();
        for (p, b) in &self.terms {
            let profile = p
                .as_poly()
                .ok_or_else(|| Error::Unsupported("flows need polynomial time profiles".into()))?;
            let classical = b.truncated(0);
            if !classical.is_translation_invariant() {
                return Err(Error::Unsupported("the classical part of a generator must be a translation".into()));
            }
            let rate: Vec<FormalScalar> = sharp(&classical).comps.iter().map(TorusFun::mean).collect();
            let classical_profile = profile.iter().map(|c| c.truncated(0)).collect();
            out.push(FlowTerm { profile, classical_profile, beta: b.clone(), rate });
        }
        Ok(out)
    }

    fn translates(terms: &[FlowTerm]) -> bool {
        terms.iter().any(|t| t.rate.iter().any(|x| !x.is_zero()) && t.classical_profile.iter().any(|c| !c.is_zero()))
    }

    /// The classical translation `∫₀¹ X₀(t) dt`.
    pub fn translation(&self) -> Result<Vec<Rational>> {
        let terms = self.flow_terms()?;
        let mut w = vec![FormalScalar::zero(self.order); self.dim];
        for t in &terms {
            let s = time_integrate(&TimeFun::poly(t.classical_profile.clone()))?;
            for (wk, xk) in w.iter_mut().zip(&t.rate) {
                *wk += &(&s * xk);
            }
        }
        w.iter()
            .map(|x| {
                let c = x.coeff(0);
                if c.is_real() {
                    Ok(c.re.clone())
                } else {
                    Err(Error::Domain("classical translation is not real".into()))
                }
            })
            .collect()
    }

    /// The generator of `t ↦ A_{τ(t)}` for a polynomial `τ` with `τ(0) = 0`, `τ(1) = 1`:
    /// `τ'(t) β_{τ(t)}`.
    pub fn reparametrized(&self, tau: &[Rational]) -> Result<Self> {
        let zero = rat(0, 1);
        if tau.first().unwrap_or(&zero) != &zero || tau.iter().sum::<Rational>() != rat(1, 1) {
            return Err(Error::Domain("reparametrization must fix 0 and 1".into()));
        }
        let k = self.order;
        let tau_s: Vec<FormalScalar> = tau.iter().map(|c| FormalScalar::one(k).scale_rat(c)).collect();
        let dtau: Vec<FormalScalar> =
            tau.iter().enumerate().skip(1).map(|(j, c)| FormalScalar::one(k).scale_rat(&(c * rat(j as i64, 1)))).collect();
        let tau_t = TimeFun::poly(tau_s);
        let mut out = PathGenerator::new(self.dim, self.order);
        for (p, b) in &self.terms {
            let coeffs = p.as_poly().ok_or_else(|| Error::Unsupported("reparametrization needs polynomial profiles".into()))?;
            let mut composed = TimeFun::zero(k);
            let mut power = TimeFun::constant(FormalScalar::one(k));
            for c in &coeffs {
                composed = composed.add(&power.scale(c));
                power = power.mul(&tau_t)?;
            }
            out.push(composed.mul(&TimeFun::poly(dtau.clone()))?, b.clone())?;
        }
        Ok(out)
    }

    /// Pointwise sum of generators.
    pub fn add(&self, o: &PathGenerator) -> PathGenerator {
        let mut out = self.clone();
        out.terms.extend(o.terms.iter().cloned());
        out
    }

    pub fn neg(&self) -> PathGenerator {
        let mut out = self.clone();
        for (_, b) in &mut out.terms {
            *b = b.neg();
        }
        out
    }
}

fn check_translation_support(terms: &[FlowTerm], invariant_product: bool) -> Result<()> {
    if PathGenerator::translates(terms) && (!invariant_product || terms.iter().any(|t| !t.beta.is_translation_invariant())) {
        return Err(Error::Unsupported(
            "a translating flow needs a translation-invariant product and generator".into(),
        ));
    }
    Ok(())
}

/// Vertical part `V₁F` of the flow `A' = D_t A`, `A_t = φ_t* ∘ V_t`, by the Picard recursion
/// `V_tF = F + ∫₀ᵗ (D_s − X₀(s)·∂) V_sF ds`.
pub fn picard_vertical(p: &dyn StarProduct, gen: &PathGenerator, f: &TorusFun) -> Result<TorusFun> {
    let terms = gen.flow_terms()?;
    check_translation_support(&terms, p.translation_invariant())?;
    let derivations: Vec<Derivation> = terms.iter().map(|t| Derivation { beta: t.beta.clone() }).collect();
    let fields: Vec<TorusField> = terms.iter().map(|t| TorusField::constant(&t.rate)).collect();
    let mut g = vec![f.clone()];
    for _ in 0..=gen.order + 2 {
        let mut rhs: Vec<TorusFun> = Vec::new();
        for (j, gj) in g.iter().enumerate() {
            for ((t, d), x) in terms.iter().zip(&derivations).zip(&fields) {
                let full = d.apply(p, gj);
                let lie = x.apply(gj);
                for (i, c) in t.profile.iter().enumerate() {
                    fun_poly_add(&mut rhs, i + j, &full.scale(c));
                }
                for (i, c) in t.classical_profile.iter().enumerate() {
                    fun_poly_add(&mut rhs, i + j, &lie.scale(c).neg());
                }
            }
        }
        let mut next = vec![f.clone()];
        for (j, c) in rhs.iter().enumerate() {
            fun_poly_add(&mut next, j + 1, &c.scale_rat(&rat(1, j as i64 + 1)));
        }
        trim_funs(&mut next);
        if next == g {
            let mut out = TorusFun::zero(f.dim(), f.order());
            for c in &g {
                out.add_assign(c);
            }
            return Ok(out);
        }
        g = next;
    }
    Err(Error::Internal("Picard recursion did not stabilize".into()))
}

fn fun_poly_add(p: &mut Vec<TorusFun>, j: usize, f: &TorusFun) {
    while p.len() <= j {
        p.push(TorusFun::zero(f.dim(), f.order()));
    }
    p[j].add_assign(f);
}

fn trim_funs(p: &mut Vec<TorusFun>) {
    while p.len() > 1 && p.last().is_some_and(TorusFun::is_zero) {
        p.pop();
    }
}

/// Sections polynomial in `t`: entry `j` is the coefficient of `t^j`.
pub type PolySection = Vec<WeylSection>;

fn sec_poly_add(p: &mut PolySection, j: usize, a: &WeylSection) {
    while p.len() <= j {
        p.push(WeylSection::zero(a.dim(), a.order(), a.dmax()));
    }
    p[j].add_assign(a);
}

fn trim_secs(p: &mut PolySection) {
    while p.len() > 1 && p.last().is_some_and(WeylSection::is_zero) {
        p.pop();
    }
}

fn poly_bracket(a: &[WeylSection], b: &[WeylSection]) -> PolySection {
    let mut out = Vec::new();
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                sec_poly_add(&mut out, i + j, &scaled_commutator(x, y));
            }
        }
    }
    out
}

/// Value at `t = 1`.
pub fn poly_eval(p: &[WeylSection]) -> WeylSection {
    let mut out = p[0].clone();
    for a in &p[1..] {
        out.add_assign(a);
    }
    out
}

/// `B_n / n!` with `B₁ = −½`.
fn bernoulli_over_factorial(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = vec![rat(1, 1)];
    for m in 1..=n {
        let mut s = rat(0, 1);
        let mut binom = rat(1, 1);
        for (k, bk) in b.iter().enumerate() {
            s += &binom * bk;
            binom *= rat((m + 1 - k) as i64, (k + 1) as i64);
        }
        b.push(-s / rat(m as i64 + 1, 1));
    }
    let mut fact = rat(1, 1);
    for (m, bm) in b.iter_mut().enumerate() {
        if m > 0 {
            fact *= rat(m as i64, 1);
        }
        *bm = &*bm / &fact;
    }
    b
}

/// Solves `u' = Σ_n (B_n/n!) ad_u^n(Y_t)`, `u(0) = u₀`, so that `exp(ad u_t)` solves
/// `E' = ad(Y_t) E`, `E(0) = exp(ad u₀)`.
pub fn magnus(u0: &WeylSection, y: &[WeylSection]) -> Result<PolySection> {
    let dmax = u0.dmax();
    let coeffs = bernoulli_over_factorial(dmax + 2);
    let mut u = vec![u0.clone()];
    for _ in 0..=2 * dmax + 4 {
        let mut rhs: PolySection = y.to_vec();
        let mut term: PolySection = y.to_vec();
        for c in &coeffs[1..] {
            term = poly_bracket(&u, &term);
            if term.iter().all(WeylSection::is_zero) {
                break;
            }
            if *c != rat(0, 1) {
                for (j, a) in term.iter().enumerate() {
                    sec_poly_add(&mut rhs, j, &a.scale_rat(c));
                }
            }
        }
        let mut next = vec![u0.clone()];
        for (j, a) in rhs.iter().enumerate() {
            sec_poly_add(&mut next, j + 1, &a.scale_rat(&rat(1, j as i64 + 1)));
        }
        trim_secs(&mut next);
        if next == u {
            return Ok(u);
        }
        u = next;
    }
    Err(Error::Internal("Magnus recursion did not stabilize".into()))
}

/// `exp((1/ν) ad u)(a)`.
pub fn exp_ad(u: &WeylSection, a: &WeylSection) -> WeylSection {
    let mut out = a.clone();
    let mut term = a.clone();
    for n in 1..=2 * a.dmax() + 4 {
        term = scaled_commutator(u, &term).scale_rat(&rat(1, n as i64));
        if term.is_zero() {
            return out;
        }
        out.add_assign(&term);
    }
    panic!("exp(ad u) did not terminate: exponent of degree < 3")
}

/// `log(exp(ad x) exp(ad y))`.
pub fn bch(x: &WeylSection, y: &WeylSection) -> Result<WeylSection> {
    Ok(poly_eval(&magnus(y, std::slice::from_ref(x))?))
}

/// The Fedosov integrand `Y_t = (Σ_k p_k(t) q_tail(β_k))^{≥3} + i(X₀(t)) r` as a polynomial in `t`.
pub fn fedosov_integrand(p: &FedosovProduct, gen: &PathGenerator) -> Result<PolySection> {
    let terms = gen.flow_terms()?;
    let data = p.data();
    check_translation_support(&terms, data.is_translation_invariant())?;
    let mut y: PolySection = vec![WeylSection::zero(data.dim(), data.order(), data.dmax())];
    for t in &terms {
        let tail = data.q_tail(&t.beta)?;
        let ir = data.r().interior(&t.rate);
        for (i, c) in t.profile.iter().enumerate() {
            sec_poly_add(&mut y, i, &tail.scale(c).degree_at_least(3));
        }
        for (i, c) in t.classical_profile.iter().enumerate() {
            sec_poly_add(&mut y, i, &ir.scale(c));
        }
    }
    trim_secs(&mut y);
    Ok(y)
}

/// `A = φ* ∘ exp((1/ν) ad u)` with `φ` the translation by `translation` (radians).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    translation: Vec<Rational>,
    exponent: WeylSection,
}

impl Automorphism {
    pub fn identity(dim: usize, order: usize, dmax: usize) -> Self {
        Automorphism { translation: vec![rat(0, 1); dim], exponent: WeylSection::zero(dim, order, dmax) }
    }

    pub fn vertical(exponent: WeylSection) -> Result<Self> {
        if exponent.min_degree().is_some_and(|d| d < 3) || exponent.terms().keys().any(|k| k.form != 0) {
            return Err(Error::Domain("vertical exponents are 0-forms of degree at least 3".into()));
        }
        Ok(Automorphism { translation: vec![rat(0, 1); exponent.dim()], exponent })
    }

    pub fn translation(&self) -> &[Rational] {
        &self.translation
    }

    pub fn exponent(&self) -> &WeylSection {
        &self.exponent
    }

    pub fn is_vertical(&self) -> bool {
        self.translation.iter().all(|w| *w == rat(0, 1))
    }

    /// Vertical part `σ(exp(ad u) QF)`; the translation is reported by `translation`.
    pub fn apply(&self, p: &FedosovProduct, f: &TorusFun) -> TorusFun {
        exp_ad(&self.exponent, &p.q(f)).symbol()
    }

    pub fn compose(&self, o: &Automorphism) -> Result<Automorphism> {
        if !o.is_vertical() && !self.exponent.is_translation_invariant() {
            return Err(Error::Unsupported("composition across a translation needs an invariant exponent".into()));
        }
        let translation = self.translation.iter().zip(&o.translation).map(|(a, b)| a + b).collect();
        Ok(Automorphism { translation, exponent: bch(&self.exponent, &o.exponent)? })
    }

    pub fn invert(&self) -> Result<Automorphism> {
        if !self.is_vertical() && !self.exponent.is_translation_invariant() {
            return Err(Error::Unsupported("inversion across a translation needs an invariant exponent".into()));
        }
        Ok(Automorphism { translation: self.translation.iter().map(|w| -w).collect(), exponent: self.exponent.neg() })
    }

    /// `u` with `A = exp((1/ν) ad u)`.
    pub fn log_vertical(&self) -> Result<WeylSection> {
        if !self.is_vertical() {
            return Err(Error::Domain("log_vertical needs an identity classical part".into()));
        }
        Ok(self.exponent.clone())
    }

    /// Whether both automorphisms agree on `{e_m : |m|_∞ ≤ bound}`.
    pub fn agrees_on_probes(&self, o: &Automorphism, p: &FedosovProduct, bound: i64) -> bool {
        self.translation == o.translation
            && mode_box(p.dim(), bound).iter().all(|m| {
                let e = TorusFun::exp_mode(m, p.order());
                self.apply(p, &e) == o.apply(p, &e)
            })
    }
}

/// Endpoint `A₁` of the Heisenberg flow along the Fedosov route.
pub fn heisenberg_flow(p: &FedosovProduct, gen: &PathGenerator) -> Result<Automorphism> {
    let path = heisenberg_exponent(p, gen)?;
    Ok(Automorphism { translation: gen.translation()?, exponent: poly_eval(&path) })
}

/// The exponent `u_t` of `A_t` as a polynomial in `t`.
pub fn heisenberg_exponent(p: &FedosovProduct, gen: &PathGenerator) -> Result<PolySection> {
    let y = fedosov_integrand(p, gen)?;
    let d = p.data();
    magnus(&WeylSection::zero(d.dim(), d.order(), d.dmax()), &y)
}

/// `exp(D)`.
pub fn exp_derivation(p: &FedosovProduct, d: &Derivation) -> Result<Automorphism> {
    heisenberg_flow(p, &PathGenerator::autonomous(d.beta.clone())?)
}

/// The 1-form `−𝒟(u − σ(u))` of the derivation `(1/ν) ad u` on flat sections.
pub fn exponent_form(p: &FedosovProduct, u: &WeylSection) -> Result<TorusForm> {
    let data = p.data();
    let x = u.sub(&WeylSection::function(u.symbol(), u.dmax()));
    let dx = data.dcal(&x).degree_at_most(data.dmax() - 1);
    let beta = y0_form(&dx, 1).neg();
    if dx.sub(&crate::weyl::form_section(&beta.neg(), data.dmax())).is_zero() {
        Ok(beta)
    } else {
        Err(Error::Internal("𝒟 of the exponent is not a scalar 1-form".into()))
    }
}

/// Generator of the pointwise product path `A_t B_t`: `D^A_t + A_t D^B_t A_t⁻¹`. `A` must not translate.
pub fn product_generator(p: &FedosovProduct, a: &PathGenerator, b: &PathGenerator) -> Result<PathGenerator> {
    let ta = a.flow_terms()?;
    if PathGenerator::translates(&ta) {
        return Err(Error::Unsupported("the left factor of a product path must not translate".into()));
    }
    let ut = heisenberg_exponent(p, a)?;
    let data = p.data();
    let mut out = a.add(b);
    for (profile, beta) in &b.terms {
        let tail = data.q_tail(beta)?;
        let mut conj: PolySection = vec![tail.clone()];
        let mut term: PolySection = vec![tail];
        for n in 1..=2 * data.dmax() + 4 {
            term = poly_bracket(&ut, &term);
            if term.iter().all(WeylSection::is_zero) {
                break;
            }
            for (j, s) in term.iter().enumerate() {
                sec_poly_add(&mut conj, j, &s.scale_rat(&rat(1, factorial(n))));
            }
        }
        for (j, s) in conj.iter().enumerate() {
            let correction = s.symbol().d();
            if correction.is_zero() {
                continue;
            }
            let t = TimeFun::monomial(FormalScalar::one(a.order), j);
            out.push(profile.mul(&t)?, correction)?;
        }
    }
    Ok(out)
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// A time-independent `H` with `exp(D_H)` equal to the endpoint of a non-translating path of zero
/// total flux, normalized to zero mean.
pub fn hamiltonianize(p: &FedosovProduct, gen: &PathGenerator) -> Result<TorusFun> {
    if PathGenerator::translates(&gen.flow_terms()?) {
        return Err(Error::Unsupported("hamiltonianize needs a path without classical translation".into()));
    }
    if !gen.flux()?.is_zero() {
        return Err(Error::Domain("path not flux-exact".into()));
    }
    let u = heisenberg_flow(p, gen)?.log_vertical()?;
    let beta = exponent_form(p, &u)?;
    Ok(primitive(&beta)?.without_mean())
}
