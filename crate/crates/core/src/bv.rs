//! The free BV complex of smeared observables.
//!
//! A [`BvFrame`] fixes `k` even field generators `x_f = O(β_f)` and `m` odd
//! antifield generators `ξ_a = v(χ_a)`, together with
//!
//! * the pairing `P[a][f] = ⟨χ_a, β_f⟩` used by the BV operator
//!   `D = Σ P[a][f] ∂_{x_f} ∂_{ξ_a}`, and
//! * the classical differential `δ ξ_a = Σ_f K[a][f] x_f`, which is `−ι_{dS}`:
//!   for `S(a) = ⟨a, Q a⟩` it sends `v(χ)` to `−2·O(Qχ)`.
//!
//! Monomials are stored in normal form `ξ_{a_1} ⋯ ξ_{a_r} x^e` with
//! `a_1 < ⋯ < a_r`, the antifield set packed into a bitmask.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{hodge_decompose, SpectralForm};
use crate::observable::{LinearObservable, PolynomialObservable};
use crate::poly::Polynomial;
use crate::scalar::{Mat, Scalar, C64};
use crate::theory::{TheorySpec, Variant};

pub const MAX_ANTIFIELDS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct BvFrame<S> {
    fields: usize,
    antifields: usize,
    pairing: Mat<S>,
    classical: Mat<S>,
}

impl<S: Scalar> BvFrame<S> {
    /// `pairing` and `classical` are both `antifields × fields`.
    pub fn new(fields: usize, pairing: Mat<S>, classical: Mat<S>) -> Result<Self> {
        let antifields = pairing.len();
        if antifields > MAX_ANTIFIELDS {
            return Err(Error::Invalid(format!(
                "at most {MAX_ANTIFIELDS} antifield generators"
            )));
        }
        if classical.len() != antifields
            || pairing
                .iter()
                .chain(&classical)
                .any(|row| row.len() != fields)
        {
            return Err(Error::Invalid(
                "frame matrices must be antifields × fields".into(),
            ));
        }
        Ok(Self {
            fields,
            antifields,
            pairing,
            classical,
        })
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn antifields(&self) -> usize {
        self.antifields
    }

    pub fn pairing(&self) -> &Mat<S> {
        &self.pairing
    }

    pub fn classical(&self) -> &Mat<S> {
        &self.classical
    }

    /// `Σ_f P[a][f] ∂_{x_f} g` for a field polynomial `g`.
    fn contract(&self, a: usize, g: &Polynomial<S>) -> Polynomial<S> {
        let mut out = Polynomial::zero(self.fields);
        for (f, w) in self.pairing[a].iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            out = out.add(&derivative(g, f).scale(w));
        }
        out
    }
}

fn derivative<S: Scalar>(g: &Polynomial<S>, f: usize) -> Polynomial<S> {
    let mut out = Polynomial::zero(g.vars());
    for (e, c) in g.terms() {
        if e[f] == 0 {
            continue;
        }
        let mut ne = e.clone();
        ne[f] -= 1;
        out.add_term(ne, c.clone() * S::from_i64(e[f] as i64));
    }
    out
}

/// Sign of `ξ_A ξ_B` relative to the sorted monomial `ξ_{A∪B}`.
fn merge_sign(a: u64, b: u64) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // antifields of A after position j must jump over ξ_j
        swaps += (a >> j >> 1).count_ones();
    }
    swaps % 2 == 1
}

/// Number of antifields before position `a` in the mask (the Koszul sign of `∂_{ξ_a}`).
fn position(mask: u64, a: usize) -> u32 {
    (mask & ((1u64 << a) - 1)).count_ones()
}

/// A polynomial in even field and odd antifield generators.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedObservable<S> {
    fields: usize,
    antifields: usize,
    terms: BTreeMap<(u64, Vec<u32>), S>,
}

impl<S: Scalar> GradedObservable<S> {
    pub fn zero(fields: usize, antifields: usize) -> Self {
        Self {
            fields,
            antifields,
            terms: BTreeMap::new(),
        }
    }

    pub fn for_frame(frame: &BvFrame<S>) -> Self {
        Self::zero(frame.fields, frame.antifields)
    }

    pub fn constant(fields: usize, antifields: usize, c: S) -> Self {
        let mut g = Self::zero(fields, antifields);
        g.add_term(0, vec![0; fields], c);
        g
    }

    /// `ξ_a`.
    pub fn antifield(fields: usize, antifields: usize, a: usize) -> Self {
        let mut g = Self::zero(fields, antifields);
        g.add_term(1 << a, vec![0; fields], S::one());
        g
    }

    /// `x_f`.
    pub fn field(fields: usize, antifields: usize, f: usize) -> Self {
        let mut e = vec![0; fields];
        e[f] = 1;
        let mut g = Self::zero(fields, antifields);
        g.add_term(0, e, S::one());
        g
    }

    /// `Σ ξ_mask · poly`.
    pub fn from_field_polynomial(antifields: usize, mask: u64, poly: &Polynomial<S>) -> Self {
        let mut g = Self::zero(poly.vars(), antifields);
        for (e, c) in poly.terms() {
            g.add_term(mask, e.clone(), c.clone());
        }
        g
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn antifields(&self) -> usize {
        self.antifields
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u64, Vec<u32>), &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mask: u64, exps: Vec<u32>, c: S) {
        assert_eq!(exps.len(), self.fields, "field exponent vector length");
        assert!(
            self.antifields >= 64 || mask >> self.antifields == 0,
            "antifield index out of range"
        );
        if c.is_negligible() {
            return;
        }
        let key = (mask, exps);
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_negligible() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// Cohomological degree if homogeneous: minus the number of antifields.
    pub fn degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(|(m, _)| -(m.count_ones() as i32));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Largest number of generators in any term.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(m, e)| m.count_ones() + e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Part with exactly `r` antifields.
    pub fn component(&self, r: u32) -> Self {
        let mut out = Self::zero(self.fields, self.antifields);
        for ((m, e), c) in &self.terms {
            if m.count_ones() == r {
                out.add_term(*m, e.clone(), c.clone());
            }
        }
        out
    }

    /// Field polynomial of a term-free-of-antifields observable.
    pub fn field_part(&self) -> Polynomial<S> {
        let mut p = Polynomial::zero(self.fields);
        for ((m, e), c) in &self.terms {
            if *m == 0 {
                p.add_term(e.clone(), c.clone());
            }
        }
        p
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(
            (self.fields, self.antifields),
            (other.fields, other.antifields),
            "observables from different frames"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        for ((m, e), c) in &other.terms {
            out.add_term(*m, e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.fields, self.antifields);
        for ((m, e), c) in &self.terms {
            out.add_term(*m, e.clone(), c.clone() * s.clone());
        }
        out
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = Self::zero(self.fields, self.antifields);
        for ((m1, e1), c1) in &self.terms {
            for ((m2, e2), c2) in &other.terms {
                if m1 & m2 != 0 {
                    continue;
                }
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let c = c1.clone() * c2.clone();
                out.add_term(m1 | m2, e, if merge_sign(*m1, *m2) { -c } else { c });
            }
        }
        out
    }

    /// `(−1)^{|φ|}` for homogeneous `φ`; panics on mixed parity.
    fn parity_sign(&self) -> S {
        let mut parities = self.terms.keys().map(|(m, _)| m.count_ones() % 2);
        match parities.next() {
            None => S::one(),
            Some(p) => {
                assert!(parities.all(|q| q == p), "inhomogeneous parity");
                if p == 1 {
                    -S::one()
                } else {
                    S::one()
                }
            }
        }
    }
}

/// `δ`: replaces one antifield `ξ_a` by `Σ_f K[a][f] x_f`, with Koszul signs.
pub fn classical_differential<S: Scalar>(
    g: &GradedObservable<S>,
    frame: &BvFrame<S>,
) -> GradedObservable<S> {
    let mut out = GradedObservable::for_frame(frame);
    for ((m, e), c) in &g.terms {
        let mut rest = *m;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let sign = if position(*m, a) % 2 == 1 {
                -c.clone()
            } else {
                c.clone()
            };
            for (f, k) in frame.classical[a].iter().enumerate() {
                if k.is_zero() {
                    continue;
                }
                let mut ne = e.clone();
                ne[f] += 1;
                out.add_term(m & !(1 << a), ne, sign.clone() * k.clone());
            }
        }
    }
    out
}

/// `D = Σ P[a][f] ∂_{x_f} ∂_{ξ_a}`.
pub fn quantum_bv<S: Scalar>(g: &GradedObservable<S>, frame: &BvFrame<S>) -> GradedObservable<S> {
    let mut out = GradedObservable::for_frame(frame);
    for ((m, e), c) in &g.terms {
        let mut rest = *m;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let sign = if position(*m, a) % 2 == 1 {
                -c.clone()
            } else {
                c.clone()
            };
            for (f, w) in frame.pairing[a].iter().enumerate() {
                if e[f] == 0 || w.is_zero() {
                    continue;
                }
                let mut ne = e.clone();
                ne[f] -= 1;
                out.add_term(
                    m & !(1 << a),
                    ne,
                    sign.clone() * w.clone() * S::from_i64(e[f] as i64),
                );
            }
        }
    }
    out
}

/// `δ + D` (the internal differential vanishes for these presentations).
pub fn total_quantum_differential<S: Scalar>(
    g: &GradedObservable<S>,
    frame: &BvFrame<S>,
) -> GradedObservable<S> {
    classical_differential(g, frame).add(&quantum_bv(g, frame))
}

/// The antibracket on arguments with at most one antifield per term:
///
/// * `{f₁, f₂} = 0`
/// * `{ξ_a f₁, f₂} = (∂_a f₂) f₁`
/// * `{f₁, ξ_b f₂} = (∂_b f₁) f₂`
/// * `{ξ_a f₁, ξ_b f₂} = ξ_b (∂_a f₂) f₁ − ξ_a (∂_b f₁) f₂`
///
/// where `∂_a = Σ_f P[a][f] ∂_{x_f}`, extended bilinearly.
pub fn poisson_bracket<S: Scalar>(
    a: &GradedObservable<S>,
    b: &GradedObservable<S>,
    frame: &BvFrame<S>,
) -> Result<GradedObservable<S>> {
    a.check_same(b);
    for g in [a, b] {
        if g.terms.keys().any(|(m, _)| m.count_ones() > 1) {
            return Err(Error::NotImplemented(
                "antibracket of terms with more than one antifield".into(),
            ));
        }
    }
    let k = frame.fields;
    let mut out = GradedObservable::for_frame(frame);
    for ((m1, e1), c1) in &a.terms {
        let f1 = Polynomial::monomial(e1.clone(), c1.clone());
        for ((m2, e2), c2) in &b.terms {
            let f2 = Polynomial::monomial(e2.clone(), c2.clone());
            match (*m1, *m2) {
                (0, 0) => {}
                (ma, 0) => {
                    let ia = ma.trailing_zeros() as usize;
                    out = out.add(&GradedObservable::from_field_polynomial(
                        frame.antifields,
                        0,
                        &frame.contract(ia, &f2).mul(&f1),
                    ));
                }
                (0, mb) => {
                    let ib = mb.trailing_zeros() as usize;
                    out = out.add(&GradedObservable::from_field_polynomial(
                        frame.antifields,
                        0,
                        &frame.contract(ib, &f1).mul(&f2),
                    ));
                }
                (ma, mb) => {
                    let ia = ma.trailing_zeros() as usize;
                    let ib = mb.trailing_zeros() as usize;
                    let first = frame.contract(ia, &f2).mul(&f1);
                    let second = frame.contract(ib, &f1).mul(&f2);
                    out = out
                        .add(&GradedObservable::from_field_polynomial(
                            frame.antifields,
                            mb,
                            &first,
                        ))
                        .sub(&GradedObservable::from_field_polynomial(
                            frame.antifields,
                            ma,
                            &second,
                        ));
                }
            }
        }
        debug_assert_eq!(out.fields, k);
    }
    Ok(out)
}

/// `D(φψ) − D(φ)ψ − (−1)^{|φ|} φ D(ψ) − {φ, ψ}` (vanishes identically).
pub fn bd_defect<S: Scalar>(
    phi: &GradedObservable<S>,
    psi: &GradedObservable<S>,
    frame: &BvFrame<S>,
) -> Result<GradedObservable<S>> {
    let lhs = quantum_bv(&phi.mul(psi), frame);
    let a = quantum_bv(phi, frame).mul(psi);
    let b = phi.mul(&quantum_bv(psi, frame)).scale(&phi.parity_sign());
    Ok(lhs.sub(&a).sub(&b).sub(&poisson_bracket(phi, psi, frame)?))
}

/// A frame realised by smearing forms in a free theory.
#[derive(Clone, Debug)]
pub struct SmearedFrame {
    pub theory: TheorySpec,
    /// Field smearings; the last `antifields.len()` of them are `Q χ_a`.
    pub fields: Vec<SpectralForm>,
    pub antifields: Vec<SpectralForm>,
    pub frame: BvFrame<C64>,
}

impl SmearedFrame {
    /// Field generators `β_f` followed by `Q χ_a`, so that `δ ξ_a = −2 x_{k+a}`.
    pub fn new(
        theory: &TheorySpec,
        fields: Vec<SpectralForm>,
        antifields: Vec<SpectralForm>,
    ) -> Result<Self> {
        for f in fields.iter().chain(&antifields) {
            theory.check_form(f)?;
        }
        let mut all = fields;
        let k0 = all.len();
        all.extend(antifields.iter().map(|chi| theory.apply_q(chi)));
        let k = all.len();
        let mut pairing = Vec::with_capacity(antifields.len());
        let mut classical = Vec::with_capacity(antifields.len());
        for (a, chi) in antifields.iter().enumerate() {
            pairing.push(
                all.iter()
                    .map(|b| chi.pairing(b))
                    .collect::<Result<Vec<_>>>()?,
            );
            let mut row = vec![C64::new(0.0, 0.0); k];
            row[k0 + a] = C64::new(-2.0, 0.0);
            classical.push(row);
        }
        let frame = BvFrame::new(k, pairing, classical)?;
        Ok(Self {
            theory: *theory,
            fields: all,
            antifields,
            frame,
        })
    }

    /// The degree-0 part as a polynomial observable over the field smearings.
    pub fn to_polynomial(&self, g: &GradedObservable<C64>) -> Result<PolynomialObservable> {
        if g.terms.keys().any(|(m, _)| *m != 0) {
            return Err(Error::Invalid("observable has antifield terms".into()));
        }
        let generators = self
            .fields
            .iter()
            .enumerate()
            .map(|(i, f)| LinearObservable::new(f.clone(), format!("x{i}")))
            .collect();
        PolynomialObservable::new(
            self.theory.dimension,
            self.theory.degree,
            generators,
            g.field_part(),
        )
    }
}

/// Whether every generator smearing is coexact-free (closed-form theory only).
pub fn is_gauge_invariant(p: &PolynomialObservable, theory: &TheorySpec) -> Result<bool> {
    if theory.variant != Variant::ClosedPForm {
        return Err(Error::VariantMismatch(
            "gauge invariance is defined for the closed-form theory".into(),
        ));
    }
    Ok(p.generators().iter().all(|g| {
        let co = hodge_decompose(&g.smearing).coexact.norm();
        co <= 1e-12 * g.smearing.norm().max(1.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{codifferential, FormMode, ModeTruncation};
    use crate::scalar::{exact, ExactComplex};
    use crate::testing::random_form;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type G = GradedObservable<ExactComplex>;

    /// Two orthonormal field coordinates, one antifield with `χ = x_0`, `Q = R²`.
    fn unit_frame(r2: ExactComplex) -> BvFrame<ExactComplex> {
        let pairing = vec![vec![exact(1, 1), exact(0, 1)]];
        let classical = vec![vec![exact(-2, 1) * r2, exact(0, 1)]];
        BvFrame::new(2, pairing, classical).unwrap()
    }

    #[test]
    fn single_contraction() {
        let fr = unit_frame(exact(1, 1));
        let v = G::antifield(2, 1, 0);
        let o = G::field(2, 1, 0);
        assert_eq!(quantum_bv(&v.mul(&o), &fr), G::constant(2, 1, exact(1, 1)));
        assert_eq!(
            poisson_bracket(&v, &o, &fr).unwrap(),
            G::constant(2, 1, exact(1, 1))
        );
        assert!(quantum_bv(&G::constant(2, 1, exact(3, 1)), &fr).is_zero());
        assert!(classical_differential(&o.mul(&o), &fr).is_zero());
    }

    #[test]
    fn classical_differential_of_antifield() {
        let fr = unit_frame(exact(3, 2));
        let d = classical_differential(&G::antifield(2, 1, 0), &fr);
        assert_eq!(d, G::field(2, 1, 0).scale(&exact(-3, 1)));
    }

    #[test]
    fn antifields_anticommute() {
        let v0 = G::antifield(1, 2, 0);
        let v1 = G::antifield(1, 2, 1);
        assert_eq!(v0.mul(&v1), v1.mul(&v0).scale(&exact(-1, 1)));
        assert!(v0.mul(&v0).is_zero());
    }

    #[test]
    fn bracket_of_fields_vanishes() {
        let fr = unit_frame(exact(1, 1));
        let f = G::field(2, 1, 0).mul(&G::field(2, 1, 1));
        assert!(poisson_bracket(&f, &f, &fr).unwrap().is_zero());
        let two = G::antifield(2, 1, 0).mul(&G::antifield(2, 1, 0));
        assert!(two.is_zero());
    }

    #[test]
    fn too_many_antifields() {
        let fr = BvFrame::new(
            1,
            vec![vec![exact(1, 1)], vec![exact(1, 1)]],
            vec![vec![exact(1, 1)], vec![exact(1, 1)]],
        )
        .unwrap();
        let vv = G::antifield(1, 2, 0).mul(&G::antifield(1, 2, 1));
        let err = poisson_bracket(&vv, &G::field(1, 2, 0), &fr).unwrap_err();
        assert_eq!(err.code(), "NOT_IMPLEMENTED");
    }

    #[test]
    fn smeared_frame_gauge_check() {
        let t = ModeTruncation::new(8);
        let theory = TheorySpec::closed_pform(2, 1, 1.0, 8).unwrap();
        let h = SpectralForm::mode(2, t, FormMode::constant(0b01)).unwrap();
        let p = PolynomialObservable::linear(LinearObservable::new(h, "h"));
        assert!(is_gauge_invariant(&p, &theory).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let co = codifferential(&random_form(&mut rng, 2, 2, t, 5)).unwrap();
        let q = PolynomialObservable::linear(LinearObservable::new(co, "c"));
        assert!(!is_gauge_invariant(&q, &theory).unwrap());
        assert!(is_gauge_invariant(&q.restrict_to_closed().unwrap(), &theory).unwrap());
        let pform = TheorySpec::pform(2, 1, 1.0, 8).unwrap();
        assert_eq!(
            is_gauge_invariant(&p, &pform).unwrap_err().code(),
            "VARIANT_MISMATCH"
        );
    }

    #[test]
    fn smeared_frame_pforms() {
        let t = ModeTruncation::new(8);
        let theory = TheorySpec::pform(2, 1, 1.5, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let beta = random_form(&mut rng, 2, 1, t, 6);
        let chi = random_form(&mut rng, 2, 1, t, 6);
        let sf = SmearedFrame::new(&theory, vec![beta.clone()], vec![chi.clone()]).unwrap();
        assert_eq!(sf.fields.len(), 2);
        let expect = chi.pairing(&beta).unwrap();
        assert_eq!(sf.frame.pairing()[0][0], expect);
        let g = classical_differential(&GradedObservable::antifield(2, 1, 0), &sf.frame);
        let poly = sf.to_polynomial(&g).unwrap();
        // δ v(χ) = −2 R² O(χ)
        let a = random_form(&mut rng, 2, 1, t, 20);
        let want = chi.pairing(&a).unwrap() * (-2.0 * 2.25);
        assert!((poly.evaluate(&a).unwrap() - want).norm() < 1e-12);
    }
}
