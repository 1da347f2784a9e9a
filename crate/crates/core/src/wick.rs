//! Feynman-diagram sums over labelled half-edge pairings.
//!
//! A monomial `Π O_i^{r_i}` is a vertex set with `r_i` half-edges of colour
//! `i`. Expectation values sum over perfect matchings, each edge `{i, j}`
//! weighted by the propagator `P_ij`. The Fourier transform additionally lets
//! any half-edge end on a source, which contributes `Y · Ō_i` to the output
//! monomial. Both sums use the standard recursion on the lowest free
//! half-edge, memoised on the residual half-edge vector.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::SpectralForm;
use crate::observable::{gram_matrix, LinearObservable, PolynomialObservable};
use crate::poly::Polynomial;
use crate::scalar::{Mat, Scalar, C64};
use crate::theory::{TheorySpec, Variant};

/// Largest number of half-edges in a single monomial.
pub const MAX_HALF_EDGES: u32 = 24;

/// Edge weights of the duality diagrams.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramRules<S> {
    /// Multiplies the Gram entry `g_ij` on a propagator edge.
    pub propagator: S,
    /// Weight of a source edge.
    pub source: S,
}

impl<S: Scalar> DiagramRules<S> {
    /// Forward transform at coupling `R`: `1/(2R²)` and `i/(2R²)`.
    pub fn forward(r2: S) -> Self {
        let p = S::one() / (S::from_i64(2) * r2);
        Self {
            source: S::imag_unit() * p.clone(),
            propagator: p,
        }
    }

    /// Inverse transform at the current coupling `ρ`: `1/(2ρ²)` and `−i/(2ρ²)`.
    pub fn inverse(rho2: S) -> Self {
        let p = S::one() / (S::from_i64(2) * rho2);
        Self {
            source: -(S::imag_unit() * p.clone()),
            propagator: p,
        }
    }
}

fn guard(e: &[u32]) -> Result<()> {
    let total: u32 = e.iter().sum();
    if total > MAX_HALF_EDGES {
        return Err(Error::TooLarge {
            half_edges: total,
            limit: MAX_HALF_EDGES,
        });
    }
    Ok(())
}

fn lowest(r: &[u32]) -> Option<usize> {
    r.iter().position(|&x| x > 0)
}

/// Number of labelled (partial) matchings of the half-edge multiset.
pub fn count_matchings(half_edges: &[u32], sources_allowed: bool) -> Result<u128> {
    guard(half_edges)?;
    fn rec(r: &mut Vec<u32>, sources: bool, memo: &mut HashMap<Vec<u32>, u128>) -> u128 {
        let Some(i) = lowest(r) else { return 1 };
        if let Some(v) = memo.get(r.as_slice()) {
            return *v;
        }
        let key = r.clone();
        r[i] -= 1;
        let mut acc = 0u128;
        if sources {
            acc += rec(r, sources, memo);
        }
        for j in i..r.len() {
            let mult = r[j];
            if mult == 0 {
                continue;
            }
            r[j] -= 1;
            acc += mult as u128 * rec(r, sources, memo);
            r[j] += 1;
        }
        r[i] += 1;
        memo.insert(key, acc);
        acc
    }
    Ok(rec(
        &mut half_edges.to_vec(),
        sources_allowed,
        &mut HashMap::new(),
    ))
}

/// `Σ_terms c · Σ_{perfect matchings} Π P_ij`, with `P` the full propagator matrix.
pub fn expectation_terms<S: Scalar>(terms: &Polynomial<S>, propagator: &Mat<S>) -> Result<S> {
    assert_eq!(propagator.len(), terms.vars());
    fn rec<S: Scalar>(r: &mut Vec<u32>, p: &Mat<S>, memo: &mut HashMap<Vec<u32>, S>) -> S {
        let Some(i) = lowest(r) else { return S::one() };
        if let Some(v) = memo.get(r.as_slice()) {
            return v.clone();
        }
        let key = r.clone();
        r[i] -= 1;
        let mut acc = S::zero();
        for j in i..r.len() {
            let mult = r[j];
            if mult == 0 || p[i][j].is_zero() {
                continue;
            }
            r[j] -= 1;
            let sub = rec(r, p, memo);
            r[j] += 1;
            acc = acc + p[i][j].clone() * S::from_i64(mult as i64) * sub;
        }
        r[i] += 1;
        memo.insert(key, acc.clone());
        acc
    }
    let mut memo = HashMap::new();
    let mut total = S::zero();
    for (e, c) in terms.terms() {
        guard(e)?;
        if e.iter().sum::<u32>() % 2 == 1 {
            continue;
        }
        total = total + c.clone() * rec(&mut e.clone(), propagator, &mut memo);
    }
    Ok(total)
}

/// The Fourier transform on coefficients: `Σ` over partial matchings of
/// `Π propagator·g_ij · Π source`, emitting `Π Ō_i^{m_i}` for unmatched half-edges.
pub fn transform_terms<S: Scalar>(
    terms: &Polynomial<S>,
    gram: &Mat<S>,
    rules: &DiagramRules<S>,
) -> Result<Polynomial<S>> {
    let k = terms.vars();
    assert_eq!(gram.len(), k);
    let prop: Mat<S> = gram
        .iter()
        .map(|row| {
            row.iter()
                .map(|g| g.clone() * rules.propagator.clone())
                .collect()
        })
        .collect();
    fn rec<S: Scalar>(
        r: &mut Vec<u32>,
        p: &Mat<S>,
        y: &S,
        memo: &mut HashMap<Vec<u32>, Polynomial<S>>,
    ) -> Polynomial<S> {
        let k = r.len();
        let Some(i) = lowest(r) else {
            return Polynomial::constant(k, S::one());
        };
        if let Some(v) = memo.get(r.as_slice()) {
            return v.clone();
        }
        let key = r.clone();
        r[i] -= 1;
        let mut e = vec![0; k];
        e[i] = 1;
        let mut acc = rec(r, p, y, memo).shift(&e).scale(y);
        for j in i..k {
            let mult = r[j];
            if mult == 0 || p[i][j].is_zero() {
                continue;
            }
            r[j] -= 1;
            let sub = rec(r, p, y, memo);
            r[j] += 1;
            acc = acc.add(&sub.scale(&(p[i][j].clone() * S::from_i64(mult as i64))));
        }
        r[i] += 1;
        memo.insert(key, acc.clone());
        acc
    }
    let mut memo = HashMap::new();
    let mut out = Polynomial::zero(k);
    for (e, c) in terms.terms() {
        guard(e)?;
        out = out.add(&rec(&mut e.clone(), &prop, &rules.source, &mut memo).scale(c));
    }
    Ok(out)
}

/// Propagator matrix `½⟨β_i, Q⁻¹β_j⟩` for the Gaussian sector of a theory.
pub fn propagator_matrix(smearings: &[&SpectralForm], theory: &TheorySpec) -> Result<Mat<C64>> {
    for s in smearings {
        theory.check_form(s)?;
    }
    match theory.variant {
        Variant::PForm => {
            let w = 1.0 / (2.0 * theory.coupling * theory.coupling);
            Ok(gram_matrix(smearings)?
                .into_iter()
                .map(|row| row.into_iter().map(|g| g * w).collect())
                .collect())
        }
        Variant::Scalar => {
            let half_inv: Vec<SpectralForm> = smearings
                .iter()
                .map(|s| theory.half_q_inverse(s))
                .collect::<Result<_>>()?;
            let k = smearings.len();
            let mut m = vec![vec![C64::new(0.0, 0.0); k]; k];
            for i in 0..k {
                for j in 0..k {
                    m[i][j] = smearings[i].pairing(&half_inv[j])?;
                }
            }
            Ok(m)
        }
        Variant::ClosedPForm => {
            for s in smearings {
                let h = s.harmonic_part().norm();
                if h > 1e-12 * s.norm().max(1.0) {
                    return Err(Error::MasslessSector { norm: h });
                }
            }
            let exact: Vec<SpectralForm> = smearings
                .iter()
                .map(|s| crate::geometry::hodge_decompose(s).exact)
                .collect();
            let refs: Vec<&SpectralForm> = exact.iter().collect();
            let w = 1.0 / (2.0 * theory.coupling * theory.coupling);
            Ok(gram_matrix(&refs)?
                .into_iter()
                .map(|row| row.into_iter().map(|g| g * w).collect())
                .collect())
        }
    }
}

/// `⟨P⟩` in the Gaussian sector of the theory.
pub fn expectation_diagrams(p: &PolynomialObservable, theory: &TheorySpec) -> Result<C64> {
    if p.degree() != theory.degree {
        return Err(Error::DegreeMismatch {
            expected: theory.degree,
            found: p.degree(),
        });
    }
    let prop = propagator_matrix(&p.smearings(), theory)?;
    expectation_terms(p.terms(), &prop)
}

fn transform(
    p: &PolynomialObservable,
    rules: &DiagramRules<C64>,
    transported: PolynomialObservable,
) -> Result<PolynomialObservable> {
    let terms = transform_terms(p.terms(), &p.gram(), rules)?;
    let labelled: Vec<LinearObservable> = transported
        .generators()
        .iter()
        .map(|g| LinearObservable::new(g.smearing.clone(), dual_label(&g.label)))
        .collect();
    PolynomialObservable::new(
        transported.dimension(),
        transported.degree(),
        labelled,
        terms,
    )?
    .canonical()
}

fn dual_label(label: &str) -> String {
    match label.strip_prefix('*') {
        Some(rest) => rest.to_string(),
        None => format!("*{label}"),
    }
}

/// The Fourier dual observable and the dual theory (degree `n−p`, coupling `1/(2R)`).
pub fn fourier_dual(
    p: &PolynomialObservable,
    theory: &TheorySpec,
) -> Result<(PolynomialObservable, TheorySpec)> {
    if theory.variant != Variant::PForm {
        return Err(Error::VariantMismatch(
            "the Fourier transform acts on the all-forms theory".into(),
        ));
    }
    if p.degree() != theory.degree {
        return Err(Error::DegreeMismatch {
            expected: theory.degree,
            found: p.degree(),
        });
    }
    let r2 = theory.coupling * theory.coupling;
    let rules = DiagramRules::forward(C64::new(r2, 0.0));
    Ok((transform(p, &rules, p.star_transport())?, theory.dual()?))
}

/// Inverse transform from the dual theory back to the original one.
pub fn inverse_fourier_dual(
    p: &PolynomialObservable,
    dual_theory: &TheorySpec,
) -> Result<(PolynomialObservable, TheorySpec)> {
    if dual_theory.variant != Variant::PForm {
        return Err(Error::VariantMismatch(
            "the Fourier transform acts on the all-forms theory".into(),
        ));
    }
    if p.degree() != dual_theory.degree {
        return Err(Error::DegreeMismatch {
            expected: dual_theory.degree,
            found: p.degree(),
        });
    }
    let rho2 = dual_theory.coupling * dual_theory.coupling;
    let rules = DiagramRules::inverse(C64::new(rho2, 0.0));
    Ok((
        transform(p, &rules, p.star_transport_inverse())?,
        dual_theory.dual()?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{exact, ExactComplex};

    type X = ExactComplex;

    #[test]
    fn matching_counts() {
        assert_eq!(count_matchings(&[4], false).unwrap(), 3);
        assert_eq!(count_matchings(&[2, 2], false).unwrap(), 3);
        assert_eq!(count_matchings(&[1], false).unwrap(), 0);
        assert_eq!(count_matchings(&[8], false).unwrap(), 105);
        // partial matchings of 4 labelled points: telephone number 10
        assert_eq!(count_matchings(&[4], true).unwrap(), 10);
        assert_eq!(count_matchings(&[1, 1, 1, 1], true).unwrap(), 10);
        assert_eq!(
            count_matchings(&[25], false).unwrap_err().code(),
            "TOO_LARGE"
        );
        assert_eq!(
            count_matchings(&[24], false).unwrap(),
            (1..24u128).step_by(2).product()
        );
    }

    #[test]
    fn fourth_moment() {
        let p = Polynomial::<X>::monomial(vec![4], exact(1, 1));
        let g = vec![vec![exact(3, 1)]];
        // 3 g² / (4 R⁴) at R² = 2
        let prop = vec![vec![exact(3, 4)]];
        assert_eq!(expectation_terms(&p, &prop).unwrap(), exact(27, 16));
        let _ = g;
        let one = Polynomial::<X>::constant(1, exact(1, 1));
        assert_eq!(expectation_terms(&one, &prop).unwrap(), exact(1, 1));
    }

    #[test]
    fn hermite_four() {
        let p = Polynomial::<X>::monomial(vec![4], exact(1, 1));
        let out = transform_terms(
            &p,
            &vec![vec![exact(1, 1)]],
            &DiagramRules::forward(exact(1, 2)),
        )
        .unwrap();
        assert_eq!(out.coefficient(&[4]), exact(1, 1));
        assert_eq!(out.coefficient(&[2]), exact(-6, 1));
        assert_eq!(out.coefficient(&[0]), exact(3, 1));
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn dual_of_square_and_back() {
        // R² = 3, g = 5: dual = −(1/4R⁴) Ō² + g/(2R²)
        let r2 = exact(3, 1);
        let g = vec![vec![exact(5, 1)]];
        let p = Polynomial::<X>::monomial(vec![2], exact(1, 1));
        let d = transform_terms(&p, &g, &DiagramRules::forward(r2.clone())).unwrap();
        assert_eq!(d.coefficient(&[2]), exact(-1, 36));
        assert_eq!(d.coefficient(&[0]), exact(5, 6));
        let rho2 = exact(1, 1) / (exact(4, 1) * r2);
        let back = transform_terms(&d, &g, &DiagramRules::inverse(rho2)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn composite_source_weight_is_one() {
        let r2 = exact(7, 3);
        let f = DiagramRules::forward(r2.clone());
        let i = DiagramRules::inverse(exact(1, 1) / (exact(4, 1) * r2));
        assert_eq!(f.source * i.source, exact(1, 1));
    }
}
