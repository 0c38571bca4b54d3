//! Star-product interface, the closed-form Moyal product and axiom checks.

use std::collections::HashMap;

use crate::formal::{rat, FormalScalar, GaussRat, Rational};
use crate::torus::{lambda, mode_add, pairing, poisson, TorusFun};
use crate::{Error, Result};

pub trait StarProduct: Send + Sync {
    fn dim(&self) -> usize;

    /// Truncation order `K`.
    fn order(&self) -> usize;

    fn star(&self, f: &TorusFun, g: &TorusFun) -> TorusFun;

    /// `(1/ν)(F*G − G*F)`, computed without division by ν.
    fn scaled_commutator(&self, f: &TorusFun, g: &TorusFun) -> TorusFun;

    /// Upper bound for the differential order of `C_r`, `r ≤ K+1`, in either argument.
    fn cochain_order_bound(&self) -> usize {
        self.order() + 1
    }

    /// `(1/ν)[Σ c_j θ_j, F]`, the derivation attached to a harmonic 1-form.
    fn linear_bracket(&self, c: &[FormalScalar], f: &TorusFun) -> TorusFun {
        interpolated_linear_bracket(self, c, f)
    }

    /// Whether the product commutes with all translations of the torus.
    fn translation_invariant(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

/// `(1/ν)[θ_j, F]` recovered from the integer family `(1/ν)[e_{s e_j}, F]`:
/// `e_{−s e_j}(1/ν)[e_{s e_j}, F]` is a polynomial in `s` vanishing at 0 whose
/// derivative at 0 is `i (1/ν)[θ_j, F]`.
pub fn interpolated_linear_bracket<P: StarProduct + ?Sized>(p: &P, c: &[FormalScalar], f: &TorusFun) -> TorusFun {
    let dim = p.dim();
    let order = p.order();
    let deg = p.cochain_order_bound() as i64;
    let weights = derivative_weights(deg);
    let mut out = TorusFun::zero(dim, order);
    for (j, cj) in c.iter().enumerate() {
        if cj.is_zero() {
            continue;
        }
        let mut dq = TorusFun::zero(dim, order);
        for s in 1..=deg {
            let mut m = vec![0; dim];
            m[j] = s;
            let es = TorusFun::exp_mode(&m, order);
            m[j] = -s;
            let back = TorusFun::exp_mode(&m, order);
            let q = back.mul(&p.scaled_commutator(&es, f));
            dq.add_assign(&q.scale_rat(&weights[s as usize]));
        }
        out.add_assign(&dq.scale(cj).scale_gauss(&-GaussRat::i()));
    }
    out
}

/// Weights `w_s` with `P'(0) = Σ w_s P(s)` for polynomials of degree ≤ `deg` on nodes `0..=deg`.
fn derivative_weights(deg: i64) -> Vec<Rational> {
    let mut w = Vec::new();
    for s in 0..=deg {
        if s == 0 {
            let mut h = rat(0, 1);
            for k in 1..=deg {
                h -= rat(1, k);
            }
            w.push(h);
            continue;
        }
        let mut num = rat(1, 1);
        let mut den = rat(1, 1);
        for k in 0..=deg {
            if k == s {
                continue;
            }
            if k != 0 {
                num *= rat(-k, 1);
            }
            den *= rat(s - k, 1);
        }
        w.push(num / den);
    }
    w
}

/// `exp(νx)` truncated.
fn exp_phase(x: &Rational, order: usize) -> FormalScalar {
    let mut c = Vec::with_capacity(order + 1);
    let mut term = rat(1, 1);
    for k in 0..=order {
        if k > 0 {
            term = term * x / rat(k as i64, 1);
        }
        c.push(GaussRat::real(term.clone()));
    }
    FormalScalar::from_coeffs(c, order)
}

/// `(1/ν)(exp(νx) − exp(−νx))` truncated.
fn sinh_phase(x: &Rational, order: usize) -> FormalScalar {
    let mut c = vec![GaussRat::zero(); order + 1];
    let mut term = rat(1, 1);
    for k in 1..=order + 1 {
        term = term * x / rat(k as i64, 1);
        if k % 2 == 1 {
            c[k - 1] = GaussRat::real(&term * rat(2, 1));
        }
    }
    FormalScalar::from_coeffs(c, order)
}

/// Closed-form Moyal product `e_m * e_n = exp((ν/2)λ(m,n)) e_{m+n}`.
#[derive(Clone, Debug)]
pub struct Moyal {
    dim: usize,
    order: usize,
}

impl Moyal {
    pub fn new(dim: usize, order: usize) -> Self {
        Moyal { dim, order }
    }

    fn bilinear(&self, f: &TorusFun, g: &TorusFun, phase: impl Fn(&Rational) -> FormalScalar) -> TorusFun {
        let mut cache: HashMap<i64, FormalScalar> = HashMap::new();
        let mut out = TorusFun::zero(self.dim, self.order);
        for (m, a) in f.modes() {
            for (n, b) in g.modes() {
                let l = pairing(m, n);
                let ph = cache.entry(l).or_insert_with(|| phase(&rat(l, 2)));
                out.add_term(mode_add(m, n), &(&(a * b) * ph));
            }
        }
        out
    }
}

impl StarProduct for Moyal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn order(&self) -> usize {
        self.order
    }

    fn star(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.bilinear(f, g, |x| exp_phase(x, self.order))
    }

    fn scaled_commutator(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.bilinear(f, g, |x| sinh_phase(x, self.order))
    }

    fn linear_bracket(&self, c: &[FormalScalar], f: &TorusFun) -> TorusFun {
        let mut out = TorusFun::zero(self.dim, self.order);
        for (j, cj) in c.iter().enumerate() {
            for k in 0..self.dim {
                let l = lambda(j, k);
                if l != 0 {
                    out.add_assign(&f.partial(k).scale(cj).scale_rat(&rat(l, 1)));
                }
            }
        }
        out
    }

    fn translation_invariant(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "moyal".into()
    }
}

pub fn moyal(f: &TorusFun, g: &TorusFun) -> TorusFun {
    Moyal::new(f.dim(), f.order()).star(f, g)
}

/// The cochain `C_r`, evaluated on the ν⁰ parts of its arguments.
pub struct Cochain<'a, P: StarProduct + ?Sized> {
    product: &'a P,
    r: usize,
}

impl<P: StarProduct + ?Sized> Cochain<'_, P> {
    pub fn order(&self) -> usize {
        self.r
    }

    pub fn apply(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.product.star(&f.nu_coefficient(0), &g.nu_coefficient(0)).nu_coefficient(self.r)
    }
}

pub fn extract_cochain<P: StarProduct + ?Sized>(p: &P, r: usize) -> Result<Cochain<'_, P>> {
    if r > p.order() {
        return Err(Error::Range(format!("cochain order {r} exceeds truncation {}", p.order())));
    }
    Ok(Cochain { product: p, r })
}

/// `(F*G)*H − F*(G*H)`.
pub fn check_associativity<P: StarProduct + ?Sized>(p: &P, f: &TorusFun, g: &TorusFun, h: &TorusFun) -> TorusFun {
    p.star(&p.star(f, g), h).sub(&p.star(f, &p.star(g, h)))
}

/// `C₀(F,G) − FG`.
pub fn check_c0<P: StarProduct + ?Sized>(p: &P, f: &TorusFun, g: &TorusFun) -> TorusFun {
    let f0 = f.nu_coefficient(0);
    let g0 = g.nu_coefficient(0);
    extract_cochain(p, 0).expect("r = 0").apply(&f0, &g0).sub(&f0.mul(&g0))
}

/// `C₁(F,G) − C₁(G,F) − {F,G}`; needs `K ≥ 1`.
pub fn check_c1<P: StarProduct + ?Sized>(p: &P, f: &TorusFun, g: &TorusFun) -> Result<TorusFun> {
    let c1 = extract_cochain(p, 1)?;
    let f0 = f.nu_coefficient(0);
    let g0 = g.nu_coefficient(0);
    Ok(c1.apply(&f0, &g0).sub(&c1.apply(&g0, &f0)).sub(&poisson(&f0, &g0)))
}

/// `C_r(1,F)` and `C_r(F,1)` for every `1 ≤ r ≤ K`.
pub fn check_null_on_constants<P: StarProduct + ?Sized>(p: &P, f: &TorusFun) -> Vec<TorusFun> {
    let one = TorusFun::one(p.dim(), p.order());
    let mut out = Vec::new();
    for r in 1..=p.order() {
        let c = extract_cochain(p, r).expect("r ≤ K");
        out.push(c.apply(&one, f));
        out.push(c.apply(f, &one));
    }
    out
}

/// `C_r(e_m, e_n)` for `r = 0..=K`, each as a function (a multiple of `e_{m+n}`).
pub fn star_table<P: StarProduct + ?Sized>(p: &P, pairs: &[(Vec<i64>, Vec<i64>)]) -> Vec<Vec<TorusFun>> {
    pairs
        .iter()
        .map(|(m, n)| {
            let prod = p.star(&TorusFun::exp_mode(m, p.order()), &TorusFun::exp_mode(n, p.order()));
            (0..=p.order()).map(|r| prod.nu_coefficient(r)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::random_fun;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(m: &[i64], k: usize) -> TorusFun {
        TorusFun::exp_mode(m, k)
    }

    /// Moyal expanded as `Σ_r (ν/2)^r/r! Λ^{i1j1}…Λ^{irjr} ∂_{i1…ir}F ∂_{j1…jr}G` on two modes.
    fn bidifferential_oracle(m: &[i64], n: &[i64], k: usize) -> TorusFun {
        let mut total = FormalScalar::zero(k);
        let mut lam = GaussRat::zero();
        for i in 0..2 {
            for j in 0..2 {
                let l = crate::torus::lambda(i, j);
                lam += &(&GaussRat::int(l) * &(&GaussRat::new(rat(0, 1), rat(m[i], 1)) * &GaussRat::new(rat(0, 1), rat(n[j], 1))));
            }
        }
        let mut pw = GaussRat::one();
        let mut fact = 1i64;
        for r in 0..=k {
            if r > 0 {
                pw = &pw * &lam;
                fact *= r as i64;
            }
            let c = pw.scale(&rat(1, fact * (1 << r)));
            total += &FormalScalar::monomial(c, r, k);
        }
        TorusFun::mode(mode_add(m, n), total)
    }

    // [PAPER]
    #[test]
    fn basic_moyal_product() {
        let p = moyal(&e(&[1, 0], 2), &e(&[0, 1], 2));
        let want = TorusFun::mode(
            vec![1, 1],
            FormalScalar::from_coeffs(vec![GaussRat::one(), GaussRat::frac(1, 2), GaussRat::frac(1, 8)], 2),
        );
        assert_eq!(p, want);
        for m in crate::torus::mode_box(2, 2) {
            for n in crate::torus::mode_box(2, 1) {
                assert_eq!(moyal(&e(&m, 3), &e(&n, 3)), bidifferential_oracle(&m, &n, 3));
            }
        }
    }

    // [DERIVED]
    #[test]
    fn cochains() {
        let p = Moyal::new(2, 2);
        let c2 = extract_cochain(&p, 2).unwrap();
        assert_eq!(c2.apply(&e(&[1, 0], 2), &e(&[0, 1], 2)), e(&[1, 1], 2).scale_rat(&rat(1, 8)));
        assert!(matches!(extract_cochain(&p, 3), Err(Error::Range(_))));
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(9), 2, 2, 2, 4, true);
        let g = random_fun(&mut ChaCha8Rng::seed_from_u64(10), 2, 2, 2, 4, true);
        assert!(check_c0(&p, &f, &g).is_zero());
        assert!(check_null_on_constants(&p, &f).iter().all(TorusFun::is_zero));
    }

    // [PAPER]
    #[test]
    fn c1_antisymmetrization_is_the_poisson_bracket() {
        // pins the sign of the Moyal phase against the torus conventions
        let p = Moyal::new(2, 1);
        assert!(check_c1(&p, &e(&[1, 0], 1), &e(&[0, 1], 1)).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let f = random_fun(&mut rng, 2, 1, 2, 3, true);
            let g = random_fun(&mut rng, 2, 1, 2, 3, true);
            assert!(check_c1(&p, &f, &g).unwrap().is_zero());
        }
    }

    // [DERIVED]
    #[test]
    fn commutator_matches_difference() {
        let p = Moyal::new(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = random_fun(&mut rng, 2, 3, 2, 3, false);
        let g = random_fun(&mut rng, 2, 3, 2, 3, false);
        let diff = p.star(&f, &g).sub(&p.star(&g, &f));
        assert_eq!(p.scaled_commutator(&f, &g).shift(1), diff);
        assert_eq!(p.scaled_commutator(&f, &g).truncated(0), poisson(&f, &g).truncated(0));
    }

    // [DERIVED]
    #[test]
    fn linear_bracket_interpolation_matches_closed_form() {
        let p = Moyal::new(2, 3);
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(13), 2, 3, 2, 4, false);
        let c = vec![
            FormalScalar::from_coeffs(vec![GaussRat::int(2), GaussRat::int(-1)], 3),
            FormalScalar::from_coeffs(vec![GaussRat::frac(1, 3), GaussRat::zero(), GaussRat::i()], 3),
        ];
        assert_eq!(interpolated_linear_bracket(&p, &c, &f), p.linear_bracket(&c, &f));
    }

    // [TRIVIAL]
    #[test]
    fn empty_star_table() {
        assert!(star_table(&Moyal::new(2, 2), &[]).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        // [DERIVED]
        #[test]
        fn moyal_is_associative_with_unit(s in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let f = random_fun(&mut rng, 2, 4, 2, 3, false);
            let g = random_fun(&mut rng, 2, 4, 2, 3, false);
            let h = random_fun(&mut rng, 2, 4, 2, 3, false);
            let p = Moyal::new(2, 4);
            prop_assert!(check_associativity(&p, &f, &g, &h).is_zero());
            prop_assert!(check_associativity(&p, &f, &g, &TorusFun::one(2, 4)).is_zero());
            prop_assert_eq!(p.star(&f, &TorusFun::one(2, 4)), f.clone());
            prop_assert_eq!(p.star(&f, &g).truncated(0), f.mul(&g).truncated(0));
        }
    }
}
