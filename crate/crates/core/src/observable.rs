//! Smeared observables: linear functionals `O(a) = ⟨a, β⟩` and polynomials in them.

use crate::error::{Error, Result};
use crate::geometry::{coexact_free_part, hodge_star, hodge_star_inverse, SpectralForm};
use crate::poly::Polynomial;
use crate::scalar::{Mat, C64};

/// Relative pivot below which a generator counts as linearly dependent.
pub const PIVOT_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearObservable {
    pub smearing: SpectralForm,
    pub label: String,
}

impl LinearObservable {
    pub fn new(smearing: SpectralForm, label: impl Into<String>) -> Self {
        Self {
            smearing,
            label: label.into(),
        }
    }

    pub fn evaluate(&self, a: &SpectralForm) -> Result<C64> {
        a.pairing(&self.smearing)
    }
}

/// Bilinear Gram matrix `g_ij = ⟨β_i, β_j⟩`.
pub type GramMatrix = Mat<C64>;

pub fn gram_matrix(smearings: &[&SpectralForm]) -> Result<GramMatrix> {
    let k = smearings.len();
    let mut g = vec![vec![C64::new(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in i..k {
            let v = smearings[i].pairing(smearings[j])?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// `Σ coeff · Π O_i^{n_i}` over an explicit generator list.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialObservable {
    dimension: usize,
    degree: usize,
    generators: Vec<LinearObservable>,
    terms: Polynomial<C64>,
}

impl PolynomialObservable {
    /// Builds an observable without canonicalising the generator list.
    pub fn new(
        dimension: usize,
        degree: usize,
        generators: Vec<LinearObservable>,
        terms: Polynomial<C64>,
    ) -> Result<Self> {
        if terms.vars() != generators.len() {
            return Err(Error::Invalid(format!(
                "{} generators but exponent vectors of length {}",
                generators.len(),
                terms.vars()
            )));
        }
        for g in &generators {
            if g.smearing.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: g.smearing.dimension(),
                });
            }
            if g.smearing.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: g.smearing.degree(),
                });
            }
        }
        Ok(Self {
            dimension,
            degree,
            generators,
            terms,
        })
    }

    pub fn constant(dimension: usize, degree: usize, c: C64) -> Self {
        Self {
            dimension,
            degree,
            generators: Vec::new(),
            terms: Polynomial::constant(0, c),
        }
    }

    pub fn linear(generator: LinearObservable) -> Self {
        let f = &generator.smearing;
        Self {
            dimension: f.dimension(),
            degree: f.degree(),
            generators: vec![generator],
            terms: Polynomial::variable(1, 0),
        }
    }

    /// `c · O^e` for a single generator.
    pub fn power(generator: LinearObservable, e: u32, c: C64) -> Self {
        let f = &generator.smearing;
        Self {
            dimension: f.dimension(),
            degree: f.degree(),
            generators: vec![generator],
            terms: Polynomial::monomial(vec![e], c),
        }
    }

    /// Product of `O_i^{e_i}` over the raw list, in canonical form.
    pub fn canonicalise(
        dimension: usize,
        degree: usize,
        raw: Vec<(LinearObservable, u32)>,
    ) -> Result<Self> {
        let exps: Vec<u32> = raw.iter().map(|(_, e)| *e).collect();
        let generators = raw.into_iter().map(|(g, _)| g).collect();
        Self::new(
            dimension,
            degree,
            generators,
            Polynomial::monomial(exps, C64::new(1.0, 0.0)),
        )?
        .canonical()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[LinearObservable] {
        &self.generators
    }

    pub fn terms(&self) -> &Polynomial<C64> {
        &self.terms
    }

    pub fn smearings(&self) -> Vec<&SpectralForm> {
        self.generators.iter().map(|g| &g.smearing).collect()
    }

    pub fn gram(&self) -> GramMatrix {
        gram_matrix(&self.smearings()).expect("generators share degree")
    }

    pub fn evaluate(&self, a: &SpectralForm) -> Result<C64> {
        if a.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: a.degree(),
            });
        }
        if a.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: a.dimension(),
            });
        }
        let values = self
            .generators
            .iter()
            .map(|g| g.evaluate(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.terms.evaluate(&values))
    }

    /// Equivalent observable over a linearly independent generator list.
    ///
    /// Generators are scanned in order (Cholesky on the Hermitian Gram matrix);
    /// one whose residual pivot falls below `PIVOT_THRESHOLD` times its own
    /// squared norm is rewritten in terms of the earlier pivots. Generators
    /// that no term uses are dropped.
    pub fn canonical(&self) -> Result<Self> {
        let k = self.generators.len();
        let mut pivots: Vec<usize> = Vec::new();
        // rows of the Cholesky factor of the pivot Hermitian Gram matrix
        let mut chol: Vec<Vec<C64>> = Vec::new();
        let mut images: Vec<Polynomial<C64>> = Vec::with_capacity(k);
        let mut rep: Vec<Vec<C64>> = Vec::with_capacity(k);
        for i in 0..k {
            let beta = &self.generators[i].smearing;
            let norm2 = beta.norm_sqr();
            // projections onto the pivots
            let b: Vec<C64> = pivots
                .iter()
                .map(|&j| self.generators[j].smearing.inner(beta))
                .collect::<Result<_>>()?;
            let y = forward_solve(&chol, &b);
            let residual = norm2 - y.iter().map(|v| v.norm_sqr()).sum::<f64>();
            if norm2 > 0.0 && residual > PIVOT_THRESHOLD * norm2 {
                let diag = residual.sqrt();
                let mut row: Vec<C64> = y.iter().map(|v| v.conj()).collect();
                row.push(C64::new(diag, 0.0));
                chol.push(row);
                pivots.push(i);
                let mut r = vec![C64::new(0.0, 0.0); k];
                r[i] = C64::new(1.0, 0.0);
                rep.push(r);
            } else {
                // β = Σ c_j β_pivot_j with Gc = b
                let c = backward_solve(&chol, &y);
                let mut r = vec![C64::new(0.0, 0.0); k];
                for (pos, &j) in pivots.iter().enumerate() {
                    r[j] = c[pos];
                }
                rep.push(r);
            }
        }
        for r in &rep {
            let mut p = Polynomial::zero(k);
            for (j, c) in r.iter().enumerate() {
                let mut e = vec![0; k];
                e[j] = 1;
                p.add_term(e, *c);
            }
            images.push(p);
        }
        let rewritten = self.terms.substitute_linear(&images, k);
        // keep only pivots that survive in some term
        let used: Vec<usize> = (0..k)
            .filter(|&j| rewritten.terms().any(|(e, _)| e[j] > 0))
            .collect();
        let mut terms = Polynomial::zero(used.len());
        for (e, c) in rewritten.terms() {
            terms.add_term(used.iter().map(|&j| e[j]).collect(), *c);
        }
        Ok(Self {
            dimension: self.dimension,
            degree: self.degree,
            generators: used.iter().map(|&j| self.generators[j].clone()).collect(),
            terms,
        })
    }

    /// Product of observables on the same field space, canonicalised.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if other.degree != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let k = self.generators.len() + other.generators.len();
        let a = self.terms.embed(k, 0);
        let b = other.terms.embed(k, self.generators.len());
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Self::new(self.dimension, self.degree, generators, a.mul(&b))?.canonical()
    }

    /// Product without re-canonicalising (generator lists are concatenated).
    pub fn product_raw(&self, other: &Self) -> Result<Self> {
        if other.degree != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let k = self.generators.len() + other.generators.len();
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Self::new(
            self.dimension,
            self.degree,
            generators,
            self.terms
                .embed(k, 0)
                .mul(&other.terms.embed(k, self.generators.len())),
        )
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if other.degree != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let k = self.generators.len() + other.generators.len();
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        let terms = self
            .terms
            .embed(k, 0)
            .add(&other.terms.embed(k, self.generators.len()));
        Self::new(self.dimension, self.degree, generators, terms)?.canonical()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            terms: self.terms.scale(&c),
            ..self.clone()
        }
    }

    pub fn with_terms(&self, terms: Polynomial<C64>) -> Result<Self> {
        Self::new(self.dimension, self.degree, self.generators.clone(), terms)
    }

    fn map_smearings(&self, degree: usize, f: impl Fn(&SpectralForm) -> SpectralForm) -> Self {
        Self {
            dimension: self.dimension,
            degree,
            generators: self
                .generators
                .iter()
                .map(|g| LinearObservable::new(f(&g.smearing), g.label.clone()))
                .collect(),
            terms: self.terms.clone(),
        }
    }

    /// Drops the coexact part of every smearing: the observable seen by closed forms.
    pub fn restrict_to_closed(&self) -> Result<Self> {
        self.map_smearings(self.degree, coexact_free_part)
            .canonical()
    }

    /// Replaces every smearing `β` by `*β`; acts on `(n−p)`-forms.
    pub fn star_transport(&self) -> Self {
        self.map_smearings(self.dimension - self.degree, hodge_star)
    }

    /// Replaces every smearing `γ` by `*^{-1}γ`.
    pub fn star_transport_inverse(&self) -> Self {
        self.map_smearings(self.dimension - self.degree, hodge_star_inverse)
    }

    /// Largest coefficient difference once both sides are written over the same generators.
    pub fn max_term_diff(&self, other: &Self) -> Option<f64> {
        if self.generators.len() != other.generators.len() {
            return None;
        }
        for (a, b) in self.generators.iter().zip(&other.generators) {
            let d = a.smearing.sub(&b.smearing).ok()?;
            if d.norm() > 1e-12 * (1.0 + a.smearing.norm()) {
                return None;
            }
        }
        Some(self.terms.max_abs_diff(&other.terms))
    }
}

/// True iff every cross Gram entry between the two generator lists is at most `tol`.
pub fn are_support_orthogonal(
    p: &PolynomialObservable,
    q: &PolynomialObservable,
    tol: f64,
) -> Result<bool> {
    if p.degree != q.degree {
        return Err(Error::DegreeMismatch {
            expected: p.degree,
            found: q.degree,
        });
    }
    for a in &p.generators {
        for b in &q.generators {
            if a.smearing.pairing(&b.smearing)?.norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Solves `L y = b` for lower-triangular `L` given row-wise.
fn forward_solve(l: &[Vec<C64>], b: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); b.len()];
    for i in 0..b.len() {
        let mut s = b[i];
        for j in 0..i {
            s -= l[i][j] * y[j];
        }
        y[i] = s / l[i][i];
    }
    y
}

/// Solves `L^H x = y`.
fn backward_solve(l: &[Vec<C64>], y: &[C64]) -> Vec<C64> {
    let n = y.len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= l[j][i].conj() * x[j];
        }
        x[i] = s / l[i][i].conj();
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{codifferential, FormMode, ModeTruncation};
    use crate::testing::random_form;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t() -> ModeTruncation {
        ModeTruncation::new(8)
    }

    fn lin(f: SpectralForm) -> LinearObservable {
        LinearObservable::new(f, "O")
    }

    #[test]
    fn square_of_single_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_form(&mut rng, 2, 1, t(), 5);
        let p = PolynomialObservable::canonicalise(2, 1, vec![(lin(b), 2)]).unwrap();
        assert_eq!(p.generators().len(), 1);
        assert_eq!(p.terms().coefficient(&[2]), C64::new(1.0, 0.0));
    }

    #[test]
    fn dependent_generators_merge() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_form(&mut rng, 2, 1, t(), 5);
        let b2 = b.scale(C64::new(2.0, 0.0));
        let p = PolynomialObservable::canonicalise(2, 1, vec![(lin(b), 1), (lin(b2), 1)]).unwrap();
        assert_eq!(p.generators().len(), 1);
        assert!((p.terms().coefficient(&[2]) - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_smearing_gives_zero_observable() {
        let z = SpectralForm::zero(2, 0, t());
        let p = PolynomialObservable::canonicalise(2, 0, vec![(lin(z), 3)]).unwrap();
        assert!(p.generators().is_empty());
        assert!(p.terms().is_zero());
    }

    #[test]
    fn evaluation() {
        let m = FormMode::new(&[1, 0], crate::geometry::Phase::Cos, &[0]).unwrap();
        let beta = SpectralForm::mode(2, t(), m).unwrap();
        let p = PolynomialObservable::power(lin(beta.clone()), 2, C64::new(1.0, 0.0));
        let a = beta.scale(C64::new(3.0, 0.0));
        assert_eq!(p.evaluate(&a).unwrap(), C64::new(9.0, 0.0));
        let one = PolynomialObservable::constant(2, 1, C64::new(1.0, 0.0));
        assert_eq!(one.evaluate(&a).unwrap(), C64::new(1.0, 0.0));
        let wrong = SpectralForm::zero(2, 2, t());
        assert_eq!(p.evaluate(&wrong).unwrap_err().code(), "DEGREE_MISMATCH");
    }

    #[test]
    fn canonicalise_preserves_evaluation_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rng.gen_range(1..4);
            let mut gens: Vec<SpectralForm> = (0..k)
                .map(|_| random_form(&mut rng, 2, 1, t(), 4))
                .collect();
            // a dependent combination
            let dep = gens[0]
                .scale(C64::new(0.5, 0.0))
                .add(&gens[k - 1].scale(C64::new(-1.5, 0.0)))
                .unwrap();
            gens.push(dep);
            let raw: Vec<_> = gens
                .into_iter()
                .map(|g| (lin(g), rng.gen_range(0..3)))
                .collect();
            let p = PolynomialObservable::canonicalise(2, 1, raw.clone()).unwrap();
            let again = p.canonical().unwrap();
            assert_eq!(p, again);
            let direct = {
                let exps: Vec<u32> = raw.iter().map(|r| r.1).collect();
                PolynomialObservable::new(
                    2,
                    1,
                    raw.into_iter().map(|r| r.0).collect(),
                    Polynomial::monomial(exps, C64::new(1.0, 0.0)),
                )
                .unwrap()
            };
            let a = random_form(&mut rng, 2, 1, t(), 30);
            let d = (p.evaluate(&a).unwrap() - direct.evaluate(&a).unwrap()).norm();
            assert!(
                d <= 1e-12 * (1.0 + direct.evaluate(&a).unwrap().norm()),
                "{d}"
            );
        }
    }

    #[test]
    fn restriction_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = SpectralForm::mode(2, t(), FormMode::constant(0b01)).unwrap();
        let p = PolynomialObservable::power(lin(h), 2, C64::new(1.0, 0.0));
        assert_eq!(p.restrict_to_closed().unwrap(), p);

        let gamma = random_form(&mut rng, 2, 2, t(), 6);
        let co = codifferential(&gamma).unwrap();
        let q = PolynomialObservable::power(lin(co), 3, C64::new(1.0, 0.0))
            .sum(&PolynomialObservable::constant(2, 1, C64::new(2.0, 0.0)))
            .unwrap();
        let r = q.restrict_to_closed().unwrap();
        assert!(r.generators().is_empty());
        assert_eq!(r.terms().coefficient(&[]), C64::new(2.0, 0.0));
    }

    #[test]
    fn restriction_agrees_on_closed_forms_and_is_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gens: Vec<_> = (0..3)
            .map(|_| lin(random_form(&mut rng, 3, 1, t(), 10)))
            .collect();
        let p = PolynomialObservable::new(
            3,
            1,
            gens,
            crate::testing::random_c64_polynomial(&mut rng, 3, 6, 4),
        )
        .unwrap();
        let r = p.restrict_to_closed().unwrap();
        assert_eq!(r.restrict_to_closed().unwrap(), r);
        let closed = coexact_free_part(&random_form(&mut rng, 3, 1, t(), 40));
        let d = (r.evaluate(&closed).unwrap() - p.evaluate(&closed).unwrap()).norm();
        assert!(d < 1e-10);
    }

    #[test]
    fn star_transport_preserves_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let gens: Vec<_> = (0..3)
            .map(|_| lin(random_form(&mut rng, 4, 2, t(), 8)))
            .collect();
        let p = PolynomialObservable::new(
            4,
            2,
            gens,
            Polynomial::monomial(vec![1, 2, 1], C64::new(1.0, 0.0)),
        )
        .unwrap();
        let s = p.star_transport();
        assert_eq!(s.gram(), p.gram());
        // on n=4, p=2 the double transport is the identity
        assert_eq!(s.star_transport(), p);
        assert_eq!(s.star_transport_inverse(), p);
        let c = PolynomialObservable::constant(4, 2, C64::new(1.0, 0.0));
        assert_eq!(c.star_transport().terms(), c.terms());
    }

    #[test]
    fn support_orthogonality() {
        let a = SpectralForm::mode(2, t(), FormMode::constant(0b01)).unwrap();
        let b = SpectralForm::mode(2, t(), FormMode::constant(0b10)).unwrap();
        let p = PolynomialObservable::linear(lin(a));
        let q = PolynomialObservable::linear(lin(b));
        assert!(are_support_orthogonal(&p, &q, 0.0).unwrap());
        assert!(!are_support_orthogonal(&p, &p, 1e-6).unwrap());
    }
}
