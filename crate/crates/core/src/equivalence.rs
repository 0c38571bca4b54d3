//! Equivalence operators `T = Id + Σ_α c_α ∂^α` with `c_α ∈ ν C^∞(T^{2n})[[ν]]`, transported
//! products `F *′ G = T(T⁻¹F * T⁻¹G)` and conjugated automorphisms.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::dynamics::Automorphism;
use crate::fedosov::FedosovProduct;
use crate::flux::{generic_loop_flux, LoopDescriptor};
use crate::formal::{FormalScalar, Rational};
use crate::star::StarProduct;
use crate::torus::{fun_from_json, fun_to_json, H1Class, TorusFun};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceOperator {
    dim: usize,
    order: usize,
    terms: BTreeMap<Vec<u32>, TorusFun>,
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut out = BigInt::from(1);
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

/// Multi-indices `γ ≤ α`.
fn below(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for a in alpha {
        out = out
            .into_iter()
            .flat_map(|g: Vec<u32>| {
                (0..=*a).map(move |x| {
                    let mut g = g.clone();
                    g.push(x);
                    g
                })
            })
            .collect();
    }
    out
}

impl EquivalenceOperator {
    pub fn identity(dim: usize, order: usize) -> Self {
        EquivalenceOperator { dim, order, terms: BTreeMap::new() }
    }

    pub fn new(dim: usize, order: usize, terms: impl IntoIterator<Item = (Vec<u32>, TorusFun)>) -> Result<Self> {
        let mut out = Self::identity(dim, order);
        for (alpha, c) in terms {
            if alpha.len() != dim || c.dim() != dim || c.order() != order {
                return Err(Error::Config("equivalence term has the wrong dimension or order".into()));
            }
            if alpha.iter().all(|a| *a == 0) {
                return Err(Error::Domain("equivalence terms must annihilate constants".into()));
            }
            if !c.nu_coefficient(0).is_zero() {
                return Err(Error::Domain("equivalence terms must carry a positive power of ν".into()));
            }
            out.add_term(alpha, &c);
        }
        Ok(out)
    }

    /// `Id + ν^r Σ_α c_α ∂^α` with rational constant coefficients.
    pub fn constant(dim: usize, order: usize, r: usize, terms: &[(Vec<u32>, Rational)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|(a, c)| (a.clone(), TorusFun::constant(FormalScalar::one(order).scale_rat(c).shift(r), dim)))
            .collect::<Vec<_>>();
        Self::new(dim, order, terms)
    }

    fn add_term(&mut self, alpha: Vec<u32>, c: &TorusFun) {
        let entry = self.terms.entry(alpha.clone()).or_insert_with(|| TorusFun::zero(self.dim, self.order));
        entry.add_assign(c);
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, TorusFun> {
        &self.terms
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.terms.values().all(|c| c.max_mode() == 0)
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    /// `N F = Σ_α c_α ∂^α F`.
    fn nilpotent(&self, f: &TorusFun) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, self.order);
        for (alpha, c) in &self.terms {
            out.add_assign(&c.mul(&f.partial_multi(alpha)));
        }
        out
    }

    pub fn apply(&self, f: &TorusFun) -> TorusFun {
        f.add(&self.nilpotent(f))
    }

    /// `T⁻¹F = Σ_j (−N)^j F`.
    pub fn apply_inverse(&self, f: &TorusFun) -> TorusFun {
        let mut out = f.clone();
        let mut term = f.clone();
        for _ in 0..=self.order {
            term = self.nilpotent(&term).neg();
            if term.is_zero() {
                break;
            }
            out.add_assign(&term);
        }
        out
    }

    /// `T⁻¹(c·θ) − c·θ`, a function because `N(c·θ) = Σ_k c_k c_{e_k}`.
    pub fn inverse_linear_correction(&self, c: &[FormalScalar]) -> TorusFun {
        let mut h1 = TorusFun::zero(self.dim, self.order);
        for (alpha, coef) in &self.terms {
            if alpha.iter().sum::<u32>() == 1 {
                let k = alpha.iter().position(|a| *a == 1).expect("unit index");
                h1.add_assign(&coef.scale(&c[k]));
            }
        }
        self.apply_inverse(&h1).neg()
    }

    /// `S ∘ T` as an operator: `self` applied after `t`.
    pub fn compose(&self, t: &EquivalenceOperator) -> EquivalenceOperator {
        let mut out = self.clone();
        for (beta, d) in &t.terms {
            out.add_term(beta.clone(), d);
        }
        for (alpha, c) in &self.terms {
            for (beta, d) in &t.terms {
                for gamma in below(alpha) {
                    let mut coef = BigInt::from(1);
                    for (a, g) in alpha.iter().zip(&gamma) {
                        coef *= binomial(*a, *g);
                    }
                    let f = c.mul(&d.partial_multi(&gamma)).scale_rat(&Rational::from_integer(coef));
                    let idx: Vec<u32> = alpha.iter().zip(&gamma).zip(beta).map(|((a, g), b)| a - g + b).collect();
                    out.add_term(idx, &f);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self.terms.iter().map(|(a, c)| json!({"alpha": a, "coeff": fun_to_json(c)})).collect();
        json!({"dim": self.dim, "truncation": self.order, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::Config("missing dim".into()))? as usize;
        let order =
            v.get("truncation").and_then(Value::as_u64).ok_or_else(|| Error::Config("missing truncation".into()))? as usize;
        let mut terms = Vec::new();
        for t in v.get("terms").and_then(Value::as_array).cloned().unwrap_or_default() {
            let alpha: Vec<u32> = t
                .get("alpha")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Config("term without alpha".into()))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| Error::Config("alpha entries are naturals".into())))
                .collect::<Result<_>>()?;
            let coeff = fun_from_json(t.get("coeff").ok_or_else(|| Error::Config("term without coeff".into()))?)?;
            terms.push((alpha, coeff.with_order(order)));
        }
        Self::new(dim, order, terms)
    }
}

/// `F *′ G = T(T⁻¹F * T⁻¹G)`.
#[derive(Clone)]
pub struct TransportedProduct {
    base: Arc<dyn StarProduct>,
    t: EquivalenceOperator,
}

impl TransportedProduct {
    pub fn new(base: Arc<dyn StarProduct>, t: EquivalenceOperator) -> Result<Self> {
        if base.dim() != t.dim() || base.order() != t.order() {
            return Err(Error::Config("product and equivalence have different dimension or order".into()));
        }
        Ok(TransportedProduct { base, t })
    }

    pub fn operator(&self) -> &EquivalenceOperator {
        &self.t
    }

    pub fn base(&self) -> &Arc<dyn StarProduct> {
        &self.base
    }
}

pub fn transport(base: Arc<dyn StarProduct>, t: EquivalenceOperator) -> Result<TransportedProduct> {
    TransportedProduct::new(base, t)
}

impl StarProduct for TransportedProduct {
    fn dim(&self) -> usize {
        self.t.dim()
    }

    fn order(&self) -> usize {
        self.t.order()
    }

    fn star(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.t.apply(&self.base.star(&self.t.apply_inverse(f), &self.t.apply_inverse(g)))
    }

    fn scaled_commutator(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.t.apply(&self.base.scaled_commutator(&self.t.apply_inverse(f), &self.t.apply_inverse(g)))
    }

    fn cochain_order_bound(&self) -> usize {
        self.base.cochain_order_bound() + 2 * self.t.order() * self.t.max_order() as usize
    }

    /// `T((1/ν)[c·θ, T⁻¹G] + (1/ν)[h, T⁻¹G])` with `T⁻¹(c·θ) = c·θ + h`.
    fn linear_bracket(&self, c: &[FormalScalar], g: &TorusFun) -> TorusFun {
        let ig = self.t.apply_inverse(g);
        let h = self.t.inverse_linear_correction(c);
        self.t.apply(&self.base.linear_bracket(c, &ig).add(&self.base.scaled_commutator(&h, &ig)))
    }

    fn translation_invariant(&self) -> bool {
        self.base.translation_invariant() && self.t.is_constant_coefficient()
    }

    fn name(&self) -> String {
        format!("transported {}", self.base.name())
    }
}

/// `C_T(A) = T A T⁻¹`, acting on the vertical parts.
pub struct ConjugatedAutomorphism<'a> {
    a: &'a Automorphism,
    product: &'a FedosovProduct,
    t: &'a EquivalenceOperator,
}

pub fn conjugate_automorphism<'a>(
    a: &'a Automorphism,
    product: &'a FedosovProduct,
    t: &'a EquivalenceOperator,
) -> ConjugatedAutomorphism<'a> {
    ConjugatedAutomorphism { a, product, t }
}

impl ConjugatedAutomorphism<'_> {
    pub fn apply(&self, f: &TorusFun) -> TorusFun {
        self.t.apply(&self.a.apply(self.product, &self.t.apply_inverse(f)))
    }

    pub fn translation(&self) -> &[Rational] {
        self.a.translation()
    }
}

/// Deformed flux of `loop` for `base` and for `T`-transported `base`, both by the generic lift.
pub fn check_flux_invariance(
    base: Arc<dyn StarProduct>,
    t: &EquivalenceOperator,
    l: &LoopDescriptor,
    probe_bound: i64,
) -> Result<(H1Class, H1Class)> {
    if !t.is_constant_coefficient() {
        return Err(Error::Unsupported("the generic lift needs a constant-coefficient equivalence".into()));
    }
    let before = generic_loop_flux(base.as_ref(), l, probe_bound)?;
    let transported = TransportedProduct::new(base, t.clone())?;
    let after = generic_loop_flux(&transported, l, probe_bound)?;
    Ok((before, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{exp_derivation, picard_vertical, Derivation, PathGenerator};
    use crate::fedosov::{default_dmax, FedosovData};
    use crate::flux::flux_def_of_loop;
    use crate::formal::rat;
    use crate::star::{check_associativity, check_c0, check_c1, extract_cochain, interpolated_linear_bracket, Moyal};
    use crate::torus::{mode_box, random_fun};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t1(k: usize) -> EquivalenceOperator {
        EquivalenceOperator::constant(2, k, 1, &[(vec![2, 0], rat(1, 2)), (vec![1, 1], rat(-1, 3))]).unwrap()
    }

    fn wavy(k: usize) -> EquivalenceOperator {
        let c = TorusFun::exp_mode(&[1, 0], k).add(&TorusFun::exp_mode(&[-1, 0], k)).shift(1);
        EquivalenceOperator::new(2, k, [(vec![0, 1], c), (vec![0, 2], TorusFun::constant(FormalScalar::nu(k), 2))]).unwrap()
    }

    // [TRIVIAL]
    #[test]
    fn inverse_and_identity() {
        let k = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_fun(&mut rng, 2, k, 2, 4, false);
        for t in [t1(k), wavy(k)] {
            assert_eq!(t.apply(&t.apply_inverse(&f)), f);
            assert_eq!(t.apply_inverse(&t.apply(&f)), f);
            assert_eq!(t.apply(&TorusFun::one(2, k)), TorusFun::one(2, k));
        }
        assert!(EquivalenceOperator::new(2, k, [(vec![0, 0], TorusFun::constant(FormalScalar::nu(k), 2))]).is_err());
        assert!(EquivalenceOperator::new(2, k, [(vec![1, 0], TorusFun::one(2, k))]).is_err());
    }

    // [DERIVED]
    #[test]
    fn composition_matches_sequential_application() {
        let k = 3;
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(22), 2, k, 2, 4, false);
        let (s, t) = (t1(k), wavy(k));
        assert_eq!(s.compose(&t).apply(&f), s.apply(&t.apply(&f)));
        assert_eq!(t.compose(&s).apply(&f), t.apply(&s.apply(&f)));
    }

    // [TRIVIAL]
    #[test]
    fn json_round_trip() {
        let t = wavy(2);
        assert_eq!(EquivalenceOperator::from_json(&t.to_json()).unwrap(), t);
    }

    // [DERIVED]
    #[test]
    fn transported_product_axioms() {
        let k = 2;
        let p = TransportedProduct::new(Arc::new(Moyal::new(2, k)), wavy(k)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = random_fun(&mut rng, 2, k, 1, 2, true);
        let g = random_fun(&mut rng, 2, k, 1, 2, true);
        let h = random_fun(&mut rng, 2, k, 1, 2, true);
        assert!(check_associativity(&p, &f, &g, &h).is_zero());
        assert!(check_c0(&p, &f, &g).is_zero());
        assert!(check_c1(&p, &f, &g).unwrap().is_zero());
        let identity = TransportedProduct::new(Arc::new(Moyal::new(2, k)), EquivalenceOperator::identity(2, k)).unwrap();
        assert_eq!(identity.star(&f, &g), Moyal::new(2, k).star(&f, &g));
    }

    // [PAPER]
    #[test]
    fn first_cochain_changes_by_coboundary() {
        // C₁′(F,G) = C₁(F,G) + T₁(FG) − T₁(F)G − F T₁(G)
        let k = 2;
        let t = wavy(k);
        let base = Moyal::new(2, k);
        let p = TransportedProduct::new(Arc::new(base.clone()), t.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let f = random_fun(&mut rng, 2, k, 1, 2, true).nu_coefficient(0);
        let g = random_fun(&mut rng, 2, k, 1, 2, true).nu_coefficient(0);
        let t1 = |x: &TorusFun| t.apply(x).sub(x).nu_coefficient(1);
        let want = extract_cochain(&base, 1)
            .unwrap()
            .apply(&f, &g)
            .add(&t1(&f.mul(&g)))
            .sub(&t1(&f).mul(&g))
            .sub(&f.mul(&t1(&g)));
        assert_eq!(extract_cochain(&p, 1).unwrap().apply(&f, &g), want);
    }

    // [DERIVED]
    #[test]
    fn transport_is_functorial() {
        let k = 2;
        let base: Arc<dyn StarProduct> = Arc::new(Moyal::new(2, k));
        let (s, t) = (t1(k), wavy(k));
        let twice = TransportedProduct::new(Arc::new(TransportedProduct::new(base.clone(), t.clone()).unwrap()), s.clone()).unwrap();
        let once = TransportedProduct::new(base, s.compose(&t)).unwrap();
        for m in mode_box(2, 1) {
            for n in mode_box(2, 1) {
                let (em, en) = (TorusFun::exp_mode(&m, k), TorusFun::exp_mode(&n, k));
                assert_eq!(twice.star(&em, &en), once.star(&em, &en));
            }
        }
    }

    // [DERIVED]
    #[test]
    fn linear_bracket_matches_interpolation() {
        let k = 2;
        let p = TransportedProduct::new(Arc::new(Moyal::new(2, k)), wavy(k)).unwrap();
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(25), 2, k, 1, 3, false);
        let c = vec![FormalScalar::int(2, k), FormalScalar::nu(k)];
        assert_eq!(p.linear_bracket(&c, &f), interpolated_linear_bracket(&p, &c, &f));
    }

    // [DERIVED]
    #[test]
    fn conjugated_automorphisms() {
        let k = 2;
        let data = Arc::new(FedosovData::constant_omega(2, k, &[rat(1, 1)], default_dmax(k)).unwrap());
        let fed = FedosovProduct::new(data, 2);
        let t = t1(k);
        let moved = TransportedProduct::new(Arc::new(fed.clone()), t.clone()).unwrap();
        let id = Automorphism::identity(2, k, fed.data().dmax());
        let h = TorusFun::exp_mode(&[1, 0], k).add(&TorusFun::exp_mode(&[0, -1], k)).shift(1);
        let a = exp_derivation(&fed, &Derivation::quasi_inner(&h)).unwrap();
        let b = exp_derivation(&fed, &Derivation::harmonic(&[FormalScalar::zero(k), FormalScalar::nu(k)])).unwrap();
        let ab = a.compose(&b).unwrap();
        let th = t.apply(&h);
        for m in mode_box(2, 1) {
            let e = TorusFun::exp_mode(&m, k);
            assert_eq!(conjugate_automorphism(&id, &fed, &t).apply(&e), e);
            let ca = conjugate_automorphism(&a, &fed, &t).apply(&e);
            assert_eq!(ca, picard_vertical(&moved, &PathGenerator::hamiltonian(&th), &e).unwrap());
            let cb = conjugate_automorphism(&b, &fed, &t);
            assert_eq!(conjugate_automorphism(&ab, &fed, &t).apply(&e), conjugate_automorphism(&a, &fed, &t).apply(&cb.apply(&e)));
        }
    }

    // [PAPER]
    #[test]
    fn flux_is_invariant_under_equivalence() {
        let k = 3;
        let data = Arc::new(FedosovData::constant_omega(2, k, &[rat(2, 1), rat(-1, 1)], default_dmax(k)).unwrap());
        let fed = FedosovProduct::new(data, 1);
        for j in 0..2 {
            let l = LoopDescriptor::unit(2, j);
            let (before, after) = check_flux_invariance(Arc::new(fed.clone()), &t1(k), &l, 1).unwrap();
            assert_eq!(before, after);
            assert_eq!(after, flux_def_of_loop(&fed, &l).unwrap());
        }
        let (a, b) = check_flux_invariance(Arc::new(Moyal::new(2, k)), &t1(k), &LoopDescriptor::unit(2, 0), 1).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            check_flux_invariance(Arc::new(Moyal::new(2, k)), &wavy(k), &LoopDescriptor::unit(2, 0), 1),
            Err(Error::Unsupported(_))
        ));
    }
}
