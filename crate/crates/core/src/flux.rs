//! Formal flux of paths, the deformed flux of rotation loops and the generators of `Γ(M,*)`.
//!
//! Loop fluxes are per turn: the loop `θ ↦ θ + 2πt v` is handled through the unit-time flow of
//! the constant field `X = v`, and every class is the loop's flux divided by `2π`.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::dynamics::{exponent_form, heisenberg_flow, picard_vertical, PathGenerator};
use crate::fedosov::{FedosovData, FedosovProduct};
use crate::formal::{series_exp, solve_linear, FormalScalar};
use crate::star::StarProduct;
use crate::torus::{class_to_json, h1_class, mode_box, H1Class, TorusField, TorusForm, TorusFun};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopDescriptor {
    v: Vec<i64>,
}

impl LoopDescriptor {
    pub fn new(v: Vec<i64>) -> Self {
        LoopDescriptor { v }
    }

    /// Rotation along `∂θ_j`.
    pub fn unit(dim: usize, j: usize) -> Self {
        let mut v = vec![0; dim];
        v[j] = 1;
        LoopDescriptor { v }
    }

    pub fn v(&self) -> &[i64] {
        &self.v
    }

    pub fn field(&self, order: usize) -> Vec<FormalScalar> {
        self.v.iter().map(|x| FormalScalar::int(*x, order)).collect()
    }

    /// `i(X)ω`.
    pub fn classical_form(&self, order: usize) -> TorusForm {
        TorusField::constant(&self.field(order)).flat()
    }

    pub fn classical_flux(&self, order: usize) -> H1Class {
        h1_class(&self.classical_form(order)).expect("harmonic")
    }

    fn generator(&self, order: usize) -> PathGenerator {
        PathGenerator::autonomous(self.classical_form(order)).expect("harmonic forms are closed")
    }
}

/// `Flux*({A_t}) = ∫₀¹ [i(p(D_t))ω] dt`.
pub fn flux_of_path(gen: &PathGenerator) -> Result<H1Class> {
    gen.flux()
}

fn moves_along(f: &TorusFun, v: &[i64]) -> bool {
    f.modes().keys().any(|m| m.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() != 0)
}

/// `φ_t*Ω = Ω` and `φ_{t*}∇ = ∇` along the loop.
fn check_loop_hypotheses(data: &FedosovData, l: &LoopDescriptor) -> Result<()> {
    if l.v.len() != data.dim() {
        return Err(Error::Config("loop direction has the wrong dimension".into()));
    }
    if data.omega().components().values().any(|f| moves_along(f, &l.v)) {
        return Err(Error::Domain("Ω is not invariant under the loop".into()));
    }
    let n = data.dim();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if moves_along(&data.connection().christoffel(k, i, j), &l.v) {
                    return Err(Error::Domain("∇ is not invariant under the loop".into()));
                }
            }
        }
    }
    Ok(())
}

/// Deformed flux from the lift: `[i(X)ω] − [i(p(D))ω]` with `B₁ = exp(D)` and
/// `[i(p(D))ω] = −harmonic part of 𝒟u` for the exponent `u` of the lift.
pub fn flux_def_of_loop(p: &FedosovProduct, l: &LoopDescriptor) -> Result<H1Class> {
    check_loop_hypotheses(p.data(), l)?;
    let order = p.order();
    let u = heisenberg_flow(p, &l.generator(order))?.exponent().clone();
    let pd = h1_class(&exponent_form(p, &u)?)?;
    Ok(l.classical_flux(order).sub(&pd))
}

/// `[i(X)ω] − [∫₀¹ φ_t* i(X)Ω dt]`.
pub fn flux_def_closed_form(data: &FedosovData, l: &LoopDescriptor) -> Result<H1Class> {
    check_loop_hypotheses(data, l)?;
    Ok(closed_form_for(data.omega(), l, data.order()))
}

fn closed_form_for(omega: &TorusForm, l: &LoopDescriptor, order: usize) -> H1Class {
    let x = TorusField::constant(&l.field(order));
    let averaged = omega.interior(&x).mean_part();
    l.classical_flux(order).sub(&h1_class(&averaged).expect("constant forms are closed"))
}

/// `[i(X)ω] − ν[∫₀¹ φ_t* i(X)Ω₁ dt]`, truncated at ν¹.
pub fn flux_order1(data: &FedosovData, l: &LoopDescriptor) -> Result<H1Class> {
    check_loop_hypotheses(data, l)?;
    Ok(closed_form_for(&data.omega().truncated(1), l, data.order()).truncated(1))
}

/// Deformed flux for any translation-invariant product: the lift's vertical part on `e_m` is
/// `exp(μ(m)) e_m`; solving `μ = (1/ν)[b·θ, ·]` on the unit modes gives `[i(p(D))ω] = b`, checked on
/// `|m|_∞ ≤ probe_bound`.
pub fn generic_loop_flux(p: &dyn StarProduct, l: &LoopDescriptor, probe_bound: i64) -> Result<H1Class> {
    if !p.translation_invariant() {
        return Err(Error::Unsupported("the generic lift needs a translation-invariant product".into()));
    }
    let dim = p.dim();
    let order = p.order();
    let gen = l.generator(order);
    let units: Vec<FormalScalar> = (0..dim).map(|_| FormalScalar::zero(order)).collect();
    let basis = |k: usize| {
        let mut c = units.clone();
        c[k] = FormalScalar::one(order);
        c
    };
    let kappa = |m: &[i64]| -> Vec<FormalScalar> {
        let e = TorusFun::exp_mode(m, order);
        (0..dim).map(|k| p.linear_bracket(&basis(k), &e).coeff(m)).collect()
    };
    let mut matrix = Vec::new();
    let mut mu = Vec::new();
    for j in 0..dim {
        let mut m = vec![0; dim];
        m[j] = 1;
        let e = TorusFun::exp_mode(&m, order);
        let v = picard_vertical(p, &gen, &e)?;
        let s = v.coeff(&m);
        if v != e.scale(&s) {
            return Err(Error::Internal("lift of a translation-invariant product is not diagonal".into()));
        }
        mu.push(s.log_unipotent()?);
        matrix.push(kappa(&m));
    }
    let b = solve_linear(&matrix, &mu)?;
    for m in mode_box(dim, probe_bound) {
        let e = TorusFun::exp_mode(&m, order);
        let k = kappa(&m);
        let mut exponent = FormalScalar::zero(order);
        for (bk, kk) in b.iter().zip(&k) {
            exponent += &(bk * kk);
        }
        if picard_vertical(p, &gen, &e)? != e.scale(&series_exp(&exponent)?) {
            return Err(Error::Domain("the lift is not generated by a harmonic derivation".into()));
        }
    }
    Ok(l.classical_flux(order).sub(&H1Class { periods: b }))
}

/// Deformed fluxes of the rotation loops along the coordinate directions.
pub fn gamma_generators(p: &FedosovProduct) -> Result<Vec<H1Class>> {
    (0..p.dim()).map(|j| flux_def_of_loop(p, &LoopDescriptor::unit(p.dim(), j))).collect()
}

/// Generators with the sign fixed by the first nonzero coefficient, sorted.
pub fn normalized_generators(gens: &[H1Class]) -> Vec<H1Class> {
    let mut out: Vec<H1Class> = gens
        .iter()
        .map(|g| {
            let lead = g.periods.iter().flat_map(|s| s.coeffs().iter()).find(|c| !c.is_zero());
            let negative = lead.is_some_and(|c| if !c.re.is_zero() { c.re.is_negative() } else { c.im.is_negative() });
            if negative {
                g.neg()
            } else {
                g.clone()
            }
        })
        .collect();
    out.sort_by_key(|g| class_to_json(g).to_string());
    out
}

pub fn same_generators(a: &[H1Class], b: &[H1Class]) -> bool {
    normalized_generators(a) == normalized_generators(b)
}

/// Report of `flux-rotation`.
pub fn rotation_report(p: &FedosovProduct, l: &LoopDescriptor) -> Result<Value> {
    let order = p.order();
    let deformed = flux_def_of_loop(p, l)?;
    let closed = flux_def_closed_form(p.data(), l)?;
    Ok(json!({
        "v": l.v,
        "classical": class_to_json(&l.classical_flux(order)),
        "deformed": class_to_json(&deformed),
        "closed_form": class_to_json(&closed),
        "match": deformed == closed,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::default_dmax;
    use crate::formal::{rat, GaussRat, Rational};
    use crate::star::Moyal;
    use crate::weyl::SymplecticConnection;
    use std::sync::Arc;

    fn product(cs: &[i64], k: usize) -> FedosovProduct {
        let cs: Vec<Rational> = cs.iter().map(|c| rat(*c, 1)).collect();
        FedosovProduct::new(Arc::new(FedosovData::constant_omega(2, k, &cs, default_dmax(k)).unwrap()), 1)
    }

    fn one_minus(cs: &[i64], k: usize) -> FormalScalar {
        let mut c = vec![GaussRat::one()];
        c.extend(cs.iter().map(|x| GaussRat::int(-x)));
        FormalScalar::from_coeffs(c, k)
    }

    fn class(a: FormalScalar, b: FormalScalar) -> H1Class {
        H1Class { periods: vec![a, b] }
    }

    // [PAPER]
    #[test]
    fn flat_moyal_loop_has_classical_flux() {
        let p = product(&[], 2);
        let f = flux_def_of_loop(&p, &LoopDescriptor::unit(2, 0)).unwrap();
        assert_eq!(f, class(FormalScalar::zero(2), FormalScalar::one(2)));
        assert!(flux_def_of_loop(&p, &LoopDescriptor::new(vec![0, 0])).unwrap().is_zero());
    }

    // [PAPER]
    #[test]
    fn golden_torus_flux() {
        for cs in [[1, 0], [2, 5], [-1, 3]] {
            let p = product(&cs, 3);
            let s = one_minus(&cs, 3);
            let f1 = flux_def_of_loop(&p, &LoopDescriptor::unit(2, 0)).unwrap();
            assert_eq!(f1, class(FormalScalar::zero(3), s.clone()));
            let f2 = flux_def_of_loop(&p, &LoopDescriptor::unit(2, 1)).unwrap();
            assert_eq!(f2, class(-&s, FormalScalar::zero(3)));
            assert_eq!(f1, flux_def_closed_form(p.data(), &LoopDescriptor::unit(2, 0)).unwrap());
        }
    }

    // [PAPER]
    #[test]
    fn closed_form_with_curved_connection() {
        let conn = SymplecticConnection::from_symmetric(2, 2, |l, i, j| rat([1, -1, 2, 1][l + i + j], [2, 1, 1, 3][l + i + j]))
            .unwrap();
        let data = Arc::new(FedosovData::with_connection(conn, &[rat(2, 1), rat(-1, 1)], default_dmax(2)).unwrap());
        let p = FedosovProduct::new(data.clone(), 1);
        for l in [LoopDescriptor::unit(2, 0), LoopDescriptor::new(vec![1, -2])] {
            assert_eq!(flux_def_of_loop(&p, &l).unwrap(), flux_def_closed_form(&data, &l).unwrap());
        }
    }

    // [PAPER]
    #[test]
    fn order_one_formula() {
        for c1 in [-2, 1, 3] {
            let p = product(&[c1, 4], 2);
            let l = LoopDescriptor::unit(2, 0);
            assert_eq!(flux_order1(p.data(), &l).unwrap(), flux_def_of_loop(&p, &l).unwrap().truncated(1));
        }
    }

    // [DERIVED]
    #[test]
    fn generic_lift_matches_fedosov_route() {
        let p = product(&[2, -1], 2);
        for j in 0..2 {
            let l = LoopDescriptor::unit(2, j);
            assert_eq!(generic_loop_flux(&p, &l, 1).unwrap(), flux_def_of_loop(&p, &l).unwrap());
        }
        let m = Moyal::new(2, 2);
        assert_eq!(generic_loop_flux(&m, &LoopDescriptor::unit(2, 0), 1).unwrap(), LoopDescriptor::unit(2, 0).classical_flux(2));
    }

    // [PAPER]
    #[test]
    fn gamma_distinguishes_first_coefficient() {
        let g0 = gamma_generators(&product(&[], 2)).unwrap();
        assert!(same_generators(
            &g0,
            &[class(FormalScalar::zero(2), FormalScalar::one(2)), class(FormalScalar::one(2), FormalScalar::zero(2))]
        ));
        let g1 = gamma_generators(&product(&[1], 2)).unwrap();
        let g2 = gamma_generators(&product(&[2], 2)).unwrap();
        assert!(!same_generators(&g1, &g2));
        assert!(same_generators(&g1, &gamma_generators(&product(&[1], 2)).unwrap()));
    }

    // [TRIVIAL]
    #[test]
    fn loop_hypotheses() {
        let k = 2;
        let wave = TorusFun::exp_mode(&[0, 1], k).add(&TorusFun::exp_mode(&[0, -1], k)).shift(1);
        let omega = TorusForm::symplectic(2, k).scale(&FormalScalar::nu(k)).add(&{
            let mut w = TorusForm::zero(2, k, 2);
            w.set(0b11, wave);
            w
        });
        let data = FedosovData::new(SymplecticConnection::flat(2, k), omega, default_dmax(k)).unwrap();
        assert!(matches!(flux_def_closed_form(&data, &LoopDescriptor::unit(2, 1)), Err(Error::Domain(_))));
        let f = flux_def_closed_form(&data, &LoopDescriptor::unit(2, 0)).unwrap();
        assert_eq!(f, class(FormalScalar::zero(k), one_minus(&[1], k)));
    }

    // [TRIVIAL]
    #[test]
    fn path_flux() {
        let k = 2;
        let gen = PathGenerator::autonomous(TorusForm::harmonic(&[FormalScalar::zero(k), FormalScalar::one(k)])).unwrap();
        assert_eq!(flux_of_path(&gen).unwrap(), class(FormalScalar::zero(k), FormalScalar::one(k)));
        assert!(flux_of_path(&PathGenerator::new(2, k)).unwrap().is_zero());
        let h = PathGenerator::hamiltonian(&TorusFun::exp_mode(&[1, 2], k).shift(1));
        assert!(flux_of_path(&h).unwrap().is_zero());
    }
}
