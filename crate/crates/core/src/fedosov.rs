//! The Fedosov construction: the connection 1-form `r`, flat sections, the
//! symbol map and the star product `F *_{Ω,∇} G = σ(QF ∘ QG)`.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::formal::{rat, FormalScalar, GaussRat, Rational};
use crate::star::StarProduct;
use crate::torus::{mode_add, mode_box, Mode, TorusForm, TorusFun};
use crate::weyl::{
    circ_symbol, connection, delta, delta_inv, fedosov_derivative, form_section, scaled_commutator, scaled_symbol, SymplecticConnection,
    WeylSection,
};
use crate::{Error, Result};

pub fn default_dmax(order: usize) -> usize {
    2 * order + 2
}

#[derive(Clone, Debug)]
pub struct FedosovData {
    dim: usize,
    order: usize,
    dmax: usize,
    conn: SymplecticConnection,
    omega: TorusForm,
    r: WeylSection,
}

/// Iterates `a ↦ step(a)` from `start` until it stabilizes.
fn fixed_point(start: WeylSection, budget: usize, step: impl Fn(&WeylSection) -> WeylSection) -> Result<WeylSection> {
    let mut a = start;
    for _ in 0..=budget + 2 {
        let next = step(&a);
        if next == a {
            return Ok(a);
        }
        a = next;
    }
    Err(Error::Internal("degree recursion did not stabilize".into()))
}

/// Solves `a = base + lin(a)` for a linear `lin` raising the degree, summing `lin^n(base)`.
fn neumann(base: WeylSection, budget: usize, lin: impl Fn(&WeylSection) -> WeylSection) -> Result<WeylSection> {
    let mut a = base.clone();
    let mut diff = base;
    for _ in 0..=budget + 2 {
        diff = lin(&diff);
        if diff.is_zero() {
            return Ok(a);
        }
        a.add_assign(&diff);
    }
    Err(Error::Internal("degree recursion did not stabilize".into()))
}

impl FedosovData {
    /// Solves `r = δ⁻¹(R̄ + ∂r + ½(1/ν)[r,r] − Ω)`.
    pub fn new(conn: SymplecticConnection, omega: TorusForm, dmax: usize) -> Result<Self> {
        let dim = omega.dim();
        let order = omega.order();
        if conn.dim() != dim {
            return Err(Error::Config("connection and Ω have different dimensions".into()));
        }
        if omega.degree() != 2 {
            return Err(Error::Config("Ω must be a 2-form".into()));
        }
        if !omega.is_closed() {
            return Err(Error::Domain("Ω is not closed".into()));
        }
        if omega.components().values().any(|f| f.modes().values().any(|c| !c.coeff(0).is_zero())) {
            return Err(Error::Domain("Ω must have positive ν-valuation".into()));
        }
        let rbar = conn.curvature_section(dmax);
        let om = form_section(&omega, dmax);
        let source = rbar.sub(&om);
        let r = fixed_point(WeylSection::zero(dim, order, dmax), dmax, |r| {
            let mut x = source.add(&connection(r, &conn));
            if !r.is_zero() {
                x.add_assign(&scaled_commutator(r, r).scale_rat(&rat(1, 2)));
            }
            delta_inv(&x)
        })?;
        Ok(FedosovData { dim, order, dmax, conn, omega, r })
    }

    /// Flat connection, `Ω = Σ_i ν^i C_i ω`.
    pub fn constant_omega(dim: usize, order: usize, cs: &[Rational], dmax: usize) -> Result<Self> {
        Self::with_connection(SymplecticConnection::flat(dim, order), cs, dmax)
    }

    pub fn with_connection(conn: SymplecticConnection, cs: &[Rational], dmax: usize) -> Result<Self> {
        let dim = conn.dim();
        let order = conn_order(&conn, cs)?;
        let omega = omega_from_coefficients(dim, order, cs)?;
        Self::new(conn, omega, dmax)
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

    pub fn connection(&self) -> &SymplecticConnection {
        &self.conn
    }

    pub fn omega(&self) -> &TorusForm {
        &self.omega
    }

    pub fn r(&self) -> &WeylSection {
        &self.r
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.conn.is_translation_invariant() && self.omega.is_translation_invariant()
    }

    /// `r − δ⁻¹(R̄ + ∂r + ½(1/ν)[r,r] − Ω)`.
    pub fn r_residual(&self) -> WeylSection {
        let x = self
            .conn
            .curvature_section(self.dmax)
            .add(&connection(&self.r, &self.conn))
            .add(&scaled_commutator(&self.r, &self.r).scale_rat(&rat(1, 2)))
            .sub(&form_section(&self.omega, self.dmax));
        self.r.sub(&delta_inv(&x))
    }

    /// Fedosov connection `𝒟`.
    pub fn dcal(&self, a: &WeylSection) -> WeylSection {
        fedosov_derivative(a, &self.conn, &self.r)
    }

    /// Flat section with symbol `F`: `a = F + δ⁻¹(∂a + (1/ν)[r,a])`.
    pub fn q(&self, f: &TorusFun) -> WeylSection {
        neumann(WeylSection::function(f.clone(), self.dmax), self.dmax, |a| self.tail_step(a)).expect("Q recursion is graded")
    }

    /// `δ⁻¹(∂a + (1/ν)[r,a])`.
    fn tail_step(&self, a: &WeylSection) -> WeylSection {
        let mut x = connection(a, &self.conn);
        if !self.r.is_zero() {
            x.add_assign(&scaled_commutator(&self.r, a));
        }
        delta_inv(&x)
    }

    pub fn sigma(&self, a: &WeylSection) -> TorusFun {
        a.symbol()
    }

    /// `a` with no y⁰ term solving `a = δ⁻¹(β + ∂a + (1/ν)[r,a])`, so that `𝒟a = −β`.
    pub fn q_tail(&self, beta: &TorusForm) -> Result<WeylSection> {
        if beta.degree() != 1 {
            return Err(Error::Domain("q_tail expects a 1-form".into()));
        }
        if !beta.is_closed() {
            return Err(Error::Domain("1-form is not closed".into()));
        }
        neumann(delta_inv(&form_section(beta, self.dmax)), self.dmax, |a| self.tail_step(a))
    }

    pub fn star(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        circ_symbol(&self.q(f), &self.q(g))
    }

    /// Same data with a different `D_max`.
    pub fn with_dmax(&self, dmax: usize) -> Result<Self> {
        Self::new(self.conn.clone(), self.omega.clone(), dmax)
    }
}

fn conn_order(conn: &SymplecticConnection, cs: &[Rational]) -> Result<usize> {
    let order = conn.christoffel(0, 0, 0).order();
    if cs.len() > order {
        return Err(Error::Config(format!("{} Ω coefficients exceed truncation order {order}", cs.len())));
    }
    Ok(order)
}

/// `Ω = Σ_{i≥1} ν^i C_i ω`.
pub fn omega_from_coefficients(dim: usize, order: usize, cs: &[Rational]) -> Result<TorusForm> {
    if cs.len() > order {
        return Err(Error::Config(format!("{} Ω coefficients exceed truncation order {order}", cs.len())));
    }
    let mut coeffs = vec![GaussRat::zero()];
    coeffs.extend(cs.iter().map(|c| GaussRat::real(c.clone())));
    let c = FormalScalar::from_coeffs(coeffs, order);
    Ok(TorusForm::symplectic(dim, order).scale(&c))
}

/// The Fedosov star product as a `StarProduct`, with flat sections of the modes in
/// `|m|_∞ ≤ bound` precomputed when the data are translation invariant.
#[derive(Clone, Debug)]
pub struct FedosovProduct {
    data: Arc<FedosovData>,
    table: BTreeMap<Mode, WeylSection>,
}

impl FedosovProduct {
    pub fn new(data: Arc<FedosovData>, bound: i64) -> Self {
        let mut table = BTreeMap::new();
        if data.is_translation_invariant() {
            for m in mode_box(data.dim, bound) {
                table.insert(m.clone(), data.q(&TorusFun::exp_mode(&m, data.order)));
            }
        }
        FedosovProduct { data, table }
    }

    pub fn data(&self) -> &Arc<FedosovData> {
        &self.data
    }

    fn q_mode(&self, m: &Mode) -> Cow<'_, WeylSection> {
        match self.table.get(m) {
            Some(a) => Cow::Borrowed(a),
            None => Cow::Owned(self.data.q(&TorusFun::exp_mode(m, self.data.order))),
        }
    }

    /// `Q(F)`, assembled modewise when the data are translation invariant.
    pub fn q(&self, f: &TorusFun) -> WeylSection {
        if !self.data.is_translation_invariant() {
            return self.data.q(f);
        }
        let mut out = WeylSection::zero(self.data.dim, self.data.order, self.data.dmax);
        for (m, c) in f.modes() {
            out.add_assign(&self.q_mode(m).scale(c));
        }
        out
    }

    /// `σ((1/ν)[q_tail(β), QF])`, the derivation with `i(p(D))ω = β`.
    pub fn derivation(&self, beta: &TorusForm, f: &TorusFun) -> Result<TorusFun> {
        let u = self.data.q_tail(beta)?;
        Ok(scaled_symbol(&u, &self.q(f)))
    }

    fn symbol_product(&self, f: &TorusFun, g: &TorusFun, scaled: bool) -> TorusFun {
        let prod = |a: &WeylSection, b: &WeylSection| if scaled { scaled_symbol(a, b) } else { circ_symbol(a, b) };
        if !self.data.is_translation_invariant() {
            return prod(&self.data.q(f), &self.data.q(g));
        }
        let qg: Vec<(&Mode, &FormalScalar, Cow<'_, WeylSection>)> =
            g.modes().iter().map(|(n, d)| (n, d, self.q_mode(n))).collect();
        let mut out = TorusFun::zero(self.data.dim, self.data.order);
        for (m, c) in f.modes() {
            let qm = self.q_mode(m);
            for (n, d, qn) in &qg {
                let k = mode_add(m, n);
                let coef = prod(&qm, qn).coeff(&k);
                out.add_term(k, &(&coef * &(c * *d)));
            }
        }
        out
    }
}

impl StarProduct for FedosovProduct {
    fn dim(&self) -> usize {
        self.data.dim
    }

    fn order(&self) -> usize {
        self.data.order
    }

    fn star(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.symbol_product(f, g, false)
    }

    fn scaled_commutator(&self, f: &TorusFun, g: &TorusFun) -> TorusFun {
        self.symbol_product(f, g, true)
    }

    fn linear_bracket(&self, c: &[FormalScalar], f: &TorusFun) -> TorusFun {
        self.derivation(&TorusForm::harmonic(c), f).expect("harmonic forms are closed")
    }

    fn translation_invariant(&self) -> bool {
        self.data.is_translation_invariant()
    }

    fn name(&self) -> String {
        "fedosov".into()
    }
}

/// Residuals `fedosov_star(e_m, e_n) − moyal(e_m, e_n)` for flat ∇ and Ω = 0.
pub fn fedosov_vs_moyal(dim: usize, order: usize, bound: i64) -> Result<Vec<(Mode, Mode, TorusFun)>> {
    use crate::star::Moyal;
    let data = Arc::new(FedosovData::constant_omega(dim, order, &[], default_dmax(order))?);
    let fed = FedosovProduct::new(data, bound);
    let moy = Moyal::new(dim, order);
    let mut out = Vec::new();
    for m in mode_box(dim, bound) {
        let em = TorusFun::exp_mode(&m, order);
        for n in mode_box(dim, bound) {
            let en = TorusFun::exp_mode(&n, order);
            out.push((m.clone(), n.clone(), fed.star(&em, &en).sub(&moy.star(&em, &en))));
        }
    }
    Ok(out)
}

/// Checks `σ∘Q = id` and the flatness `𝒟(QF) = 0` below the tracked degree.
pub fn check_flat_section(data: &FedosovData, f: &TorusFun) -> (TorusFun, WeylSection) {
    let a = data.q(f);
    (a.symbol().sub(f), data.dcal(&a).degree_at_most(data.dmax - 1))
}

/// `𝒟²a` below the tracked degree.
pub fn check_flatness(data: &FedosovData, a: &WeylSection) -> WeylSection {
    data.dcal(&data.dcal(a)).degree_at_most(data.dmax - 2)
}

/// `δ(δ⁻¹(a)) + δ⁻¹(δ(a)) − (a − a₀₀)` for `a` below the tracked degree.
pub fn check_hodge(a: &WeylSection) -> WeylSection {
    let a = a.degree_at_most(a.dmax() - 1);
    let lhs = delta(&delta_inv(&a)).add(&delta_inv(&delta(&a)));
    lhs.sub(&a).add(&WeylSection::function(a.a00(), a.dmax()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star::{check_associativity, check_c0, check_c1, check_null_on_constants, interpolated_linear_bracket};
    use crate::torus::{random_fun, TorusField};
    use crate::weyl::{cartan_check, lowered_linear, random_section, WeylKey};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data(cs: &[i64], k: usize) -> FedosovData {
        let cs: Vec<Rational> = cs.iter().map(|c| rat(*c, 1)).collect();
        FedosovData::constant_omega(2, k, &cs, default_dmax(k)).unwrap()
    }

    fn curved(cs: &[i64], k: usize) -> FedosovData {
        let conn = SymplecticConnection::from_symmetric(2, k, |l, i, j| {
            let n = l + i + j;
            rat([1, -1, 2, 1][n], [2, 1, 1, 3][n])
        })
        .unwrap();
        let cs: Vec<Rational> = cs.iter().map(|c| rat(*c, 1)).collect();
        FedosovData::with_connection(conn, &cs, default_dmax(k)).unwrap()
    }

    // [TRIVIAL]
    #[test]
    fn flat_zero_omega_has_zero_r() {
        assert!(data(&[], 3).r().is_zero());
    }

    // [PAPER]
    #[test]
    fn leading_term_of_r() {
        let d = data(&[3], 2);
        // −δ⁻¹(νC₁ dθ₁∧dθ₂) = −(νC₁/2)(y¹dθ₂ − y²dθ₁)
        let c = FormalScalar::monomial(GaussRat::frac(-3, 2), 1, 2);
        let want = WeylSection::monomial(vec![1, 0], 0b10, TorusFun::constant(c.clone(), 2), d.dmax())
            .sub(&WeylSection::monomial(vec![0, 1], 0b01, TorusFun::constant(c, 2), d.dmax()));
        assert_eq!(d.r().degree_at_most(3), want);
        assert!(d.r_residual().is_zero());
        assert!(delta_inv(d.r()).is_zero());
        assert!(d.r().min_degree().unwrap() >= 3);
    }

    // [DERIVED]
    #[test]
    fn r_for_curved_connection() {
        let d = curved(&[1, 2], 2);
        assert!(d.r_residual().is_zero());
        assert!(delta_inv(d.r()).is_zero());
        assert!(d.r().min_degree().unwrap() >= 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            let a = random_section(&mut rng, 2, 2, d.dmax(), 3, &[0, 1], 4);
            assert!(check_flatness(&d, &a).is_zero());
        }
    }

    // [TRIVIAL]
    #[test]
    fn rejects_bad_omega() {
        let flat = SymplecticConnection::flat(2, 2);
        let om = TorusForm::symplectic(2, 2);
        assert!(matches!(FedosovData::new(flat.clone(), om, 6), Err(Error::Domain(_))));
        assert!(matches!(
            FedosovData::constant_omega(2, 1, &[rat(1, 1), rat(1, 1)], 4),
            Err(Error::Config(_))
        ));
    }

    // [DERIVED]
    #[test]
    fn flat_sections() {
        let d = curved(&[2], 2);
        let one = TorusFun::one(2, 2);
        assert_eq!(d.q(&one), WeylSection::function(one.clone(), d.dmax()));
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(2), 2, 2, 1, 3, true);
        let (s, fl) = check_flat_section(&d, &f);
        assert!(s.is_zero());
        assert!(fl.is_zero());
    }

    // [PAPER]
    #[test]
    fn low_degree_terms_of_q() {
        // QF = F + ∂_iF y^i + ½(∇_iX_F)_j y^iy^j + (QF)^{≥3}
        let d = curved(&[1], 2);
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(3), 2, 2, 1, 2, true).nu_coefficient(0);
        let qf = d.q(&f).degree_at_most(2);
        let mut want = WeylSection::function(f.clone(), d.dmax());
        for i in 0..2 {
            let mut y = vec![0, 0];
            y[i] = 1;
            want.add_term(WeylKey::new(y, 0), &f.partial(i));
        }
        // (∇_iX)_j = ω_{kj}(∂_iX^k + Γ^k_{il}X^l)
        let x = crate::torus::ham_field(&f);
        for i in 0..2 {
            for j in 0..2 {
                let mut c = TorusFun::zero(2, 2);
                for k in 0..2 {
                    let o = crate::torus::omega(k, j);
                    if o == 0 {
                        continue;
                    }
                    let mut nab = x.comps[k].partial(i);
                    for l in 0..2 {
                        nab.add_assign(&d.connection().christoffel(k, i, l).mul(&x.comps[l]));
                    }
                    c.add_assign(&nab.scale_rat(&rat(o, 1)));
                }
                let mut y = vec![0, 0];
                y[i] += 1;
                y[j] += 1;
                want.add_term(WeylKey::new(y, 0), &c.scale_rat(&rat(1, 2)));
            }
        }
        assert_eq!(qf, want.degree_at_most(2));
    }

    // [DERIVED]
    #[test]
    fn q_tail_properties() {
        let d = curved(&[1], 2);
        assert!(d.q_tail(&TorusForm::zero(2, 2, 1)).unwrap().is_zero());
        let f = TorusFun::exp_mode(&[1, 0], 2);
        let tail = d.q_tail(&f.d()).unwrap();
        assert_eq!(tail, d.q(&f).sub(&WeylSection::function(f.clone(), d.dmax())));
        let beta = f.d().add(&TorusForm::harmonic(&[FormalScalar::int(2, 2), FormalScalar::nu(2)]));
        let t = d.q_tail(&beta).unwrap();
        assert_eq!(d.dcal(&t).degree_at_most(d.dmax() - 1), form_section(&beta, d.dmax()).neg().degree_at_most(d.dmax() - 1));
        let mut open = TorusForm::zero(2, 2, 1);
        open.set(1, TorusFun::exp_mode(&[0, 1], 2));
        assert!(matches!(d.q_tail(&open), Err(Error::Domain(_))));
    }

    // [DERIVED]
    #[test]
    fn q_tail_of_harmonic_form_in_flat_case() {
        let d = data(&[], 3);
        let beta = TorusForm::harmonic(&[FormalScalar::zero(3), FormalScalar::one(3)]);
        let want = WeylSection::monomial(vec![0, 1], 0, TorusFun::one(2, 3), d.dmax());
        assert_eq!(d.q_tail(&beta).unwrap(), want);
    }

    // [PAPER]
    #[test]
    fn moyal_gate_small() {
        for (_, _, res) in fedosov_vs_moyal(2, 3, 1).unwrap() {
            assert!(res.is_zero());
        }
    }

    // [DERIVED]
    #[test]
    fn fedosov_axioms_and_associativity() {
        let d = Arc::new(curved(&[1, -2], 2));
        let p = FedosovProduct::new(d, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2 {
            let f = random_fun(&mut rng, 2, 2, 1, 2, true);
            let g = random_fun(&mut rng, 2, 2, 1, 2, true);
            let h = random_fun(&mut rng, 2, 2, 1, 2, true);
            assert!(check_associativity(&p, &f, &g, &h).is_zero());
            assert!(check_c0(&p, &f, &g).is_zero());
            assert!(check_c1(&p, &f, &g).unwrap().is_zero());
            assert!(check_null_on_constants(&p, &f).iter().all(TorusFun::is_zero));
            assert_eq!(p.star(&f, &TorusFun::one(2, 2)), f);
        }
    }

    // [DERIVED]
    #[test]
    fn table_and_direct_products_agree() {
        let d = Arc::new(data(&[2, 5], 3));
        let tabled = FedosovProduct::new(d.clone(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_fun(&mut rng, 2, 3, 1, 3, false);
        let g = random_fun(&mut rng, 2, 3, 1, 3, false);
        assert_eq!(d.star(&f, &g), tabled.star(&f, &g));
        assert_eq!(scaled_symbol(&d.q(&f), &d.q(&g)), tabled.scaled_commutator(&f, &g));
        assert_eq!(tabled.scaled_commutator(&f, &g).shift(1), tabled.star(&f, &g).sub(&tabled.star(&g, &f)));
    }

    // [DERIVED]
    #[test]
    fn derivation_of_harmonic_form_matches_interpolation() {
        let d = Arc::new(curved(&[3], 2));
        let p = FedosovProduct::new(d, 3);
        let f = random_fun(&mut ChaCha8Rng::seed_from_u64(6), 2, 2, 1, 3, false);
        let c = vec![FormalScalar::from_coeffs(vec![GaussRat::one(), GaussRat::int(2)], 2), FormalScalar::nu(2)];
        assert_eq!(p.linear_bracket(&c, &f), interpolated_linear_bracket(&p, &c, &f));
    }

    // [PAPER]
    #[test]
    fn companion_identities() {
        let d = curved(&[1], 2);
        let dm = d.dmax();
        let x = vec![FormalScalar::int(2, 2), FormalScalar::constant(GaussRat::frac(-1, 3), 2)];
        // 𝒟H = dH = δ(ω_{ij}X^iy^j)
        let field = TorusField::constant(&x);
        assert_eq!(delta(&lowered_linear(&x, dm)), form_section(&field.flat(), dm));
        // ∂(½(∇_iX)_jy^iy^j) = ½(∇²_{ij}X)^l ω_{lk} y^k y^j dx^i
        let conn = d.connection();
        let lhs = connection(&conn.covariant_quadratic(&x, dm).scale_rat(&rat(1, 2)), conn);
        let mut rhs = WeylSection::zero(2, 2, dm);
        let nab = |l: usize, j: usize| {
            let mut s = TorusFun::zero(2, 2);
            for (m, xm) in x.iter().enumerate() {
                s.add_assign(&conn.christoffel(l, j, m).scale(xm));
            }
            s
        };
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut c = TorusFun::zero(2, 2);
                    for l in 0..2 {
                        let o = crate::torus::omega(l, k);
                        if o == 0 {
                            continue;
                        }
                        let mut n2 = TorusFun::zero(2, 2);
                        for s in 0..2 {
                            n2.add_assign(&conn.christoffel(l, i, s).mul(&nab(s, j)));
                            n2 = n2.sub(&conn.christoffel(s, i, j).mul(&nab(l, s)));
                        }
                        c.add_assign(&n2.scale_rat(&rat(o, 1)));
                    }
                    let mut y = vec![0, 0];
                    y[k] += 1;
                    y[j] += 1;
                    rhs.add_term(WeylKey::new(y, 1 << i), &c.scale_rat(&rat(1, 2)));
                }
            }
        }
        assert_eq!(lhs, rhs);
    }

    // [PAPER]
    #[test]
    fn cartan_formula_at_time_zero() {
        let d = data(&[1], 2);
        let a = d.q(&TorusFun::exp_mode(&[1, 0], 2));
        let x = vec![FormalScalar::one(2), FormalScalar::zero(2)];
        assert!(cartan_check(&x, d.connection(), d.r(), &a).degree_at_most(d.dmax() - 2).is_zero());
        let dc = curved(&[2], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random_section(&mut rng, 2, 2, dc.dmax(), 3, &[0, 1], 4);
        let x = vec![FormalScalar::int(1, 2), FormalScalar::int(-2, 2)];
        assert!(cartan_check(&x, dc.connection(), dc.r(), &b).degree_at_most(dc.dmax() - 2).is_zero());
    }
}
