//! Independent Gaussian backends: Isserlis moments from the generating
//! function, Monte-Carlo sampling, the regularised Fourier integral and the
//! lattice-sector expectation of the closed-form theory.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hodge_decompose, hodge_star, HarmonicLattice, SpectralForm};
use crate::observable::{gram_matrix, PolynomialObservable};
use crate::poly::Polynomial;
use crate::scalar::{factorial, Mat, Scalar, C64};
use crate::theory::{TheorySpec, Variant};
use crate::wick::MAX_HALF_EDGES;

/// Identifier of the Monte-Carlo generator, recorded in result files.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Samples drawn per independent batch (one ChaCha20 stream each).
const BATCH: usize = 4096;

/// Gaussian law of the generator values: `x ~ N(mean, covariance)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec<S> {
    pub covariance: Mat<S>,
    pub mean: Vec<S>,
}

impl<S: Scalar> GaussianSpec<S> {
    pub fn centered(covariance: Mat<S>) -> Self {
        let k = covariance.len();
        Self {
            covariance,
            mean: vec![S::zero(); k],
        }
    }
}

impl GaussianSpec<C64> {
    /// Law of `⟨a, β_i⟩` under the theory's Gaussian sector.
    pub fn for_observable(p: &PolynomialObservable, theory: &TheorySpec) -> Result<Self> {
        theory.require_positive()?;
        let prop = crate::wick::propagator_matrix(&p.smearings(), theory)?;
        Ok(Self::centered(prop))
    }
}

/// `S(a)`: `R²‖a‖²` for forms, `Σ q_m |a_m|²` for the scalar.
pub fn action(a: &SpectralForm, theory: &TheorySpec) -> Result<f64> {
    theory.check_form(a)?;
    Ok(match theory.variant {
        Variant::PForm | Variant::ClosedPForm => theory.coupling * theory.coupling * a.norm_sqr(),
        Variant::Scalar => a
            .modes()
            .map(|(m, c)| theory.q_eigenvalue(m) * c.norm_sqr())
            .sum(),
    })
}

/// Centered moments `E[x^e]` for every `e ≤ max` componentwise, from
/// `E[x^e] = e! · [t^e] q^{|e|/2} / (|e|/2)!` with `q = ½ tᵀ C t`.
fn centered_moments<S: Scalar>(
    cov: &Mat<S>,
    max: &[u32],
) -> Result<std::collections::HashMap<Vec<u32>, S>> {
    let k = cov.len();
    let total: u32 = max.iter().sum();
    if total > MAX_HALF_EDGES * 4 {
        return Err(Error::TooLarge {
            half_edges: total,
            limit: MAX_HALF_EDGES * 4,
        });
    }
    let mut q = Polynomial::zero(k);
    let half = S::one() / S::from_i64(2);
    for i in 0..k {
        for j in 0..k {
            let mut e = vec![0; k];
            e[i] += 1;
            e[j] += 1;
            q.add_term(e, cov[i][j].clone() * half.clone());
        }
    }
    let mut out = std::collections::HashMap::new();
    let mut qpow = Polynomial::constant(k, S::one());
    for m in 0..=(total / 2) {
        if m > 0 {
            qpow = qpow.mul(&q);
        }
        let mf = S::from_i64(factorial(m));
        for (e, c) in qpow.terms() {
            if e.iter().zip(max).any(|(a, b)| a > b) {
                continue;
            }
            let ef: S = e
                .iter()
                .fold(S::one(), |acc, &x| acc * S::from_i64(factorial(x)));
            out.insert(e.clone(), c.clone() * ef / mf.clone());
        }
    }
    Ok(out)
}

/// `E[P(μ + x)]` as a polynomial in `μ`: the moments are resolved once and
/// the result can be evaluated at many mean vectors.
pub fn mean_polynomial<S: Scalar>(terms: &Polynomial<S>, cov: &Mat<S>) -> Result<Polynomial<S>> {
    for (e, _) in terms.terms() {
        let total: u32 = e.iter().sum();
        if total > MAX_HALF_EDGES {
            return Err(Error::TooLarge {
                half_edges: total,
                limit: MAX_HALF_EDGES,
            });
        }
    }
    let k = terms.vars();
    let moments = centered_moments(cov, &terms.max_exponents())?;
    let mut out = Polynomial::zero(k);
    for (e, c) in terms.terms() {
        // Σ_{j ≤ e} Π C(e_i, j_i) μ^{e−j} E[x^j]
        let mut stack: Vec<(usize, Vec<u32>, S)> = vec![(0, Vec::with_capacity(k), c.clone())];
        while let Some((pos, j, w)) = stack.pop() {
            if pos == k {
                if let Some(m) = moments.get(&j) {
                    let rest: Vec<u32> = e.iter().zip(&j).map(|(a, b)| a - b).collect();
                    out.add_term(rest, w * m.clone());
                }
                continue;
            }
            for ji in 0..=e[pos] {
                let mut nj = j.clone();
                nj.push(ji);
                let b = S::from_i64(crate::scalar::binomial(e[pos], ji));
                stack.push((pos + 1, nj, w.clone() * b));
            }
        }
    }
    Ok(out)
}

/// `E[P(x)]` for `x ~ N(μ, C)` by the binomial expansion over the mean and
/// Isserlis moments of the centered part.
pub fn moments_isserlis<S: Scalar>(terms: &Polynomial<S>, g: &GaussianSpec<S>) -> Result<S> {
    Ok(mean_polynomial(terms, &g.covariance)?.evaluate(&g.mean))
}

/// Isserlis route on an observable in the theory's Gaussian sector.
pub fn expectation_isserlis(p: &PolynomialObservable, theory: &TheorySpec) -> Result<C64> {
    let g = GaussianSpec::for_observable(p, theory)?;
    moments_isserlis(p.terms(), &g)
}

/// Lower-triangular `L` with `L Lᵀ = C` for a real symmetric PSD matrix;
/// numerically null pivots are set to zero.
pub fn cholesky_psd(c: &Mat<C64>) -> Result<Vec<Vec<f64>>> {
    let k = c.len();
    let scale = (0..k)
        .map(|i| c[i][i].re.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for row in c {
        for v in row {
            if v.im.abs() > 1e-12 * scale {
                return Err(Error::NotPositive("covariance must be real".into()));
            }
        }
    }
    let mut l = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut d = c[j][j].re;
        for p in 0..j {
            d -= l[j][p] * l[j][p];
        }
        if d < -1e-10 * scale {
            return Err(Error::NotPositive(format!("covariance pivot {d:e}")));
        }
        if d <= 1e-14 * scale {
            continue;
        }
        let dj = d.sqrt();
        l[j][j] = dj;
        for i in j + 1..k {
            let mut s = c[i][j].re;
            for p in 0..j {
                s -= l[i][p] * l[j][p];
            }
            l[i][j] = s / dj;
        }
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: C64,
    pub standard_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Sample mean of `P` over `x ~ N(μ, C)`. Batches of 4096 draws use
/// independent ChaCha20 streams and are reduced in order, so the result
/// depends only on `seed` and `samples`.
pub fn moments_montecarlo(
    terms: &Polynomial<C64>,
    g: &GaussianSpec<C64>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < 1000 {
        return Err(Error::Invalid(
            "Monte-Carlo needs at least 1000 samples".into(),
        ));
    }
    let l = cholesky_psd(&g.covariance)?;
    let k = l.len();
    let batches = samples.div_ceil(BATCH);
    let partial: Vec<(C64, f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = BATCH.min(samples - b * BATCH);
            let mut sum = C64::new(0.0, 0.0);
            let (mut sq_re, mut sq_im) = (0.0, 0.0);
            let mut z = vec![0.0; k];
            let mut x = vec![C64::new(0.0, 0.0); k];
            for _ in 0..n {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                for i in 0..k {
                    let s: f64 = (0..=i).map(|p| l[i][p] * z[p]).sum();
                    x[i] = g.mean[i] + s;
                }
                let v = terms.evaluate(&x);
                sum += v;
                sq_re += v.re * v.re;
                sq_im += v.im * v.im;
            }
            (sum, sq_re, sq_im)
        })
        .collect();
    let (mut sum, mut sq_re, mut sq_im) = (C64::new(0.0, 0.0), 0.0, 0.0);
    for (s, a, b) in partial {
        sum += s;
        sq_re += a;
        sq_im += b;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var_re = (sq_re / n - mean.re * mean.re).max(0.0) * n / (n - 1.0);
    let var_im = (sq_im / n - mean.im * mean.im).max(0.0) * n / (n - 1.0);
    Ok(MonteCarloEstimate {
        value: mean,
        standard_error: ((var_re + var_im) / n).sqrt(),
        samples,
        seed,
    })
}

/// The regularised integral `∫ P(a) e^{i⟨*a, ã⟩} e^{−S(a)} da / Z`, evaluated
/// by completing the square: `E[P(μ + x)]` with `μ_i = (i/2R²)⟨*β_i, ã⟩`
/// and `x ~ N(0, G/2R²)`.
pub fn fourier_dual_integral(
    p: &PolynomialObservable,
    theory: &TheorySpec,
    dual_field: &SpectralForm,
) -> Result<C64> {
    if theory.variant != Variant::PForm {
        return Err(Error::VariantMismatch(
            "the Fourier integral is taken over all forms".into(),
        ));
    }
    theory.dual()?.check_form(dual_field)?;
    let r2 = theory.coupling * theory.coupling;
    let w = C64::new(0.0, 1.0 / (2.0 * r2));
    let mean = p
        .smearings()
        .iter()
        .map(|b| hodge_star(b).pairing(dual_field).map(|v| v * w))
        .collect::<Result<Vec<_>>>()?;
    let cov: Mat<C64> = p
        .gram()
        .into_iter()
        .map(|row| row.into_iter().map(|g| g / (2.0 * r2)).collect())
        .collect();
    moments_isserlis(
        p.terms(),
        &GaussianSpec {
            covariance: cov,
            mean,
        },
    )
}

/// Truncated sum over the topological sectors of the closed-form theory.
#[derive(Clone, Debug)]
pub struct LatticeSectorSum {
    pub lattice: HarmonicLattice,
    pub cutoff: f64,
    /// Integer coordinates of the retained sectors.
    pub points: Vec<Vec<i64>>,
    /// `e^{−S_R(λ)}` per sector.
    pub weights: Vec<f64>,
    pub normalisation: f64,
}

impl LatticeSectorSum {
    pub fn new(theory: &TheorySpec, cutoff: f64) -> Result<Self> {
        let lattice = HarmonicLattice::new(theory.dimension, theory.degree, theory.coupling)?;
        let points = lattice.points(cutoff);
        let q = lattice.action_quantum();
        let weights: Vec<f64> = points
            .iter()
            .map(|m| (-q * m.iter().map(|c| (c * c) as f64).sum::<f64>()).exp())
            .collect();
        let normalisation = ordered_sum(&weights);
        Ok(Self {
            lattice,
            cutoff,
            points,
            weights,
            normalisation,
        })
    }

    /// Weight of the sectors beyond the cutoff, `Σ_{j>J} N(j) e^{−q j} f(j)`
    /// with `N(j) ≤ (2√j + 1)^r` bounding the shell size.
    fn tail(&self, f: impl Fn(f64) -> f64) -> f64 {
        let q = self.lattice.action_quantum();
        let r = self.lattice.rank() as i32;
        let start = (self.cutoff / q).floor() as i64 + 1;
        let mut acc = 0.0;
        let mut j = start.max(1);
        loop {
            let jf = j as f64;
            let term = (2.0 * jf.sqrt() + 1.0).powi(r) * (-q * jf).exp() * f(jf);
            acc += term;
            if (term <= 1e-30 * acc.max(f64::MIN_POSITIVE) && j > start + 8)
                || term == 0.0
                || j > start + 1_000_000
            {
                break;
            }
            j += 1;
        }
        acc
    }
}

/// Summation in a fixed order of fixed-size chunks: independent of thread count.
fn ordered_sum(v: &[f64]) -> f64 {
    v.par_chunks(BATCH)
        .map(|c| c.iter().sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeExpectation {
    pub value: C64,
    /// Bound on the change of `value` from sectors beyond the cutoff.
    pub tail_bound: f64,
    /// A-priori bound on floating-point summation error.
    pub rounding_bound: f64,
    pub sectors: usize,
    pub lattice_cutoff: f64,
    /// Set when no sector besides `λ = 0` is retained.
    pub warning: Option<String>,
}

/// `⟨P⟩_R = Σ_λ e^{−S_R(λ)} E[P(⟨β_i, λ⟩ + x)] / Σ_λ e^{−S_R(λ)}` over the
/// harmonic lattice, `x` Gaussian on the exact forms with covariance
/// `⟨β_i^{ex}, β_j^{ex}⟩ / 2R²`. Coexact parts of the smearings pair to zero
/// with closed forms and are ignored.
pub fn maxwell_expectation(
    p: &PolynomialObservable,
    theory: &TheorySpec,
    lattice_cutoff: f64,
) -> Result<LatticeExpectation> {
    if theory.variant != Variant::ClosedPForm {
        return Err(Error::VariantMismatch(
            "lattice expectation needs the closed-form theory".into(),
        ));
    }
    if p.degree() != theory.degree {
        return Err(Error::DegreeMismatch {
            expected: theory.degree,
            found: p.degree(),
        });
    }
    let sectors = LatticeSectorSum::new(theory, lattice_cutoff)?;
    let splits: Vec<_> = p.smearings().iter().map(|b| hodge_decompose(b)).collect();
    let exact: Vec<&SpectralForm> = splits.iter().map(|s| &s.exact).collect();
    let r2 = theory.coupling * theory.coupling;
    let cov: Mat<C64> = gram_matrix(&exact)?
        .into_iter()
        .map(|row| row.into_iter().map(|g| g / (2.0 * r2)).collect())
        .collect();
    let mp = mean_polynomial(p.terms(), &cov)?;
    // μ_i(m) = Σ_l m_l · a_il with a_il = ⟨β_i^h, s·e_l⟩
    let spacing = sectors.lattice.spacing();
    let a: Vec<Vec<C64>> = splits
        .iter()
        .map(|s| {
            sectors
                .lattice
                .index_sets()
                .iter()
                .map(|&idx| s.harmonic.coeff(&crate::geometry::FormMode::constant(idx)) * spacing)
                .collect()
        })
        .collect();
    let k = a.len();
    let mp_abs = mp.map_coeffs(|c| C64::new(c.norm(), 0.0));
    let values: Vec<(C64, f64)> = sectors
        .points
        .par_iter()
        .zip(sectors.weights.par_iter())
        .map(|(m, w)| {
            let mu: Vec<C64> = (0..k)
                .map(|i| m.iter().zip(&a[i]).map(|(&c, v)| v * c as f64).sum())
                .collect();
            let mu_abs: Vec<C64> = mu.iter().map(|v| C64::new(v.norm(), 0.0)).collect();
            (mp.evaluate(&mu) * *w, mp_abs.evaluate(&mu_abs).re * *w)
        })
        .collect();
    let (num, abs_sum) = values
        .chunks(BATCH)
        .map(|c| {
            c.iter()
                .fold((C64::new(0.0, 0.0), 0.0), |(s, t), (v, a)| (s + v, t + a))
        })
        .collect::<Vec<_>>()
        .iter()
        .fold((C64::new(0.0, 0.0), 0.0), |(s, t), (v, a)| (s + v, t + a));
    let value = num / sectors.normalisation;
    let chain = (BATCH + sectors.points.len() / BATCH + mp.len() + 4 * k + 8) as f64;
    let rounding_bound = f64::EPSILON * chain * abs_sum / sectors.normalisation;

    // |E[P(μ + x)]| ≤ Σ |c| Π (|μ_i| + σ_i √N)^{e_i}, |μ_i| ≤ ‖a_i‖ √j on shell j
    let big_n = p.terms().total_degree().max(1) as f64;
    let amp: Vec<f64> = a
        .iter()
        .map(|row| row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let sig: Vec<f64> = (0..k)
        .map(|i| cov[i][i].norm().sqrt() * big_n.sqrt())
        .collect();
    let bound = |j: f64| -> f64 {
        p.terms()
            .terms()
            .map(|(e, c)| {
                c.norm()
                    * e.iter()
                        .enumerate()
                        .map(|(i, &n)| (amp[i] * j.sqrt() + sig[i]).powi(n as i32))
                        .product::<f64>()
            })
            .sum()
    };
    let num_tail = sectors.tail(bound);
    let z_tail = sectors.tail(|_| 1.0);
    let tail_bound = (num_tail + value.norm() * z_tail) / sectors.normalisation;
    let warning = (sectors.points.len() <= 1)
        .then(|| format!("lattice cutoff {lattice_cutoff} retains only the trivial sector"));
    Ok(LatticeExpectation {
        value,
        tail_bound,
        rounding_bound,
        sectors: sectors.points.len(),
        lattice_cutoff,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FormMode, ModeTruncation};
    use crate::observable::LinearObservable;
    use crate::scalar::{exact, ExactComplex};

    #[test]
    fn fourth_moment_and_constant() {
        let g = GaussianSpec::centered(vec![vec![exact(2, 1)]]);
        let p = Polynomial::<ExactComplex>::monomial(vec![4], exact(1, 1));
        assert_eq!(moments_isserlis(&p, &g).unwrap(), exact(12, 1));
        let one = Polynomial::<ExactComplex>::constant(1, exact(1, 1));
        assert_eq!(moments_isserlis(&one, &g).unwrap(), exact(1, 1));
    }

    #[test]
    fn shifted_second_moment() {
        let g = GaussianSpec {
            covariance: vec![vec![exact(3, 1)]],
            mean: vec![exact(2, 1)],
        };
        let p = Polynomial::<ExactComplex>::monomial(vec![2], exact(1, 1));
        assert_eq!(moments_isserlis(&p, &g).unwrap(), exact(7, 1));
    }

    #[test]
    fn mixed_moment() {
        // E[x² y²] = C11 C22 + 2 C12²
        let c = vec![
            vec![exact(2, 1), exact(1, 1)],
            vec![exact(1, 1), exact(3, 1)],
        ];
        let p = Polynomial::<ExactComplex>::monomial(vec![2, 2], exact(1, 1));
        assert_eq!(
            moments_isserlis(&p, &GaussianSpec::centered(c)).unwrap(),
            exact(8, 1)
        );
    }

    #[test]
    fn montecarlo_basics() {
        let g = GaussianSpec::centered(vec![vec![C64::new(1.0, 0.0)]]);
        let one = Polynomial::constant(1, C64::new(1.0, 0.0));
        let est = moments_montecarlo(&one, &g, 1000, 3).unwrap();
        assert_eq!(est.value, C64::new(1.0, 0.0));
        assert_eq!(est.standard_error, 0.0);
        let sq = Polynomial::monomial(vec![2], C64::new(1.0, 0.0));
        let est = moments_montecarlo(&sq, &g, 100_000, 3).unwrap();
        assert!((est.value.re - 1.0).abs() < 5.0 * est.standard_error);
        let again = moments_montecarlo(&sq, &g, 100_000, 3).unwrap();
        assert_eq!(est, again);
        assert!(moments_montecarlo(&sq, &g, 10, 3).is_err());
    }

    #[test]
    fn action_examples() {
        let t = ModeTruncation::new(4);
        let th = TheorySpec::pform(2, 1, 2.0, 4).unwrap();
        let m = SpectralForm::mode(2, t, FormMode::constant(0b01)).unwrap();
        assert_eq!(action(&m, &th).unwrap(), 4.0);
        assert_eq!(action(&SpectralForm::zero(2, 1, t), &th).unwrap(), 0.0);
    }

    #[test]
    fn lattice_trivial_cases() {
        let t = ModeTruncation::new(4);
        let th = TheorySpec::closed_pform(2, 1, 1.0, 4).unwrap();
        let one = PolynomialObservable::constant(2, 1, C64::new(1.0, 0.0));
        let r = maxwell_expectation(&one, &th, 40.0).unwrap();
        assert!((r.value - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(r.warning.is_none());
        let h = SpectralForm::mode(2, t, FormMode::constant(0b01)).unwrap();
        let odd = PolynomialObservable::power(LinearObservable::new(h, "h"), 3, C64::new(1.0, 0.0));
        let r = maxwell_expectation(&odd, &th, 40.0).unwrap();
        assert!(r.value.norm() < 1e-14);
        let tiny = maxwell_expectation(&one, &th, 1.0).unwrap();
        assert!(tiny.warning.is_some());
    }
}
