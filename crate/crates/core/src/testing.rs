//! Random inputs shared by the verification suites and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::{basis, ModeTruncation, SpectralForm};
use crate::poly::Polynomial;
use crate::scalar::{exact, ExactComplex, Mat, C64};

/// Real form supported on `modes` random basis elements, coefficients in `[-1, 1]`.
pub fn random_form<R: Rng>(
    rng: &mut R,
    dimension: usize,
    degree: usize,
    truncation: ModeTruncation,
    modes: usize,
) -> SpectralForm {
    let all = basis(dimension, degree, truncation);
    let chosen: Vec<_> = all
        .choose_multiple(rng, modes.min(all.len()))
        .copied()
        .collect();
    SpectralForm::from_modes(
        dimension,
        degree,
        truncation,
        chosen
            .into_iter()
            .map(|m| (m, C64::new(rng.gen_range(-1.0..1.0), 0.0))),
    )
    .expect("basis modes are valid")
}

/// Random form with a guaranteed nonzero harmonic component.
pub fn random_form_with_harmonic<R: Rng>(
    rng: &mut R,
    dimension: usize,
    degree: usize,
    truncation: ModeTruncation,
    modes: usize,
) -> SpectralForm {
    let f = random_form(rng, dimension, degree, truncation, modes);
    let h = random_form(rng, dimension, degree, ModeTruncation::new(0), 3)
        .with_truncation(truncation)
        .expect("constant modes fit every truncation");
    f.add(&h).expect("same degree")
}

/// Symmetric positive-definite exact Gram matrix `B Bᵀ + I` with small integer `B`
/// divided by `den`.
pub fn random_exact_gram<R: Rng>(rng: &mut R, size: usize, den: i64) -> Mat<ExactComplex> {
    let b: Vec<Vec<i64>> = (0..size)
        .map(|_| (0..size).map(|_| rng.gen_range(-3..=3)).collect())
        .collect();
    (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let dot: i64 = (0..size).map(|l| b[i][l] * b[j][l]).sum();
                    exact(dot + if i == j { 1 } else { 0 }, den)
                })
                .collect()
        })
        .collect()
}

/// Random rational in `[-max, max]` with denominator up to `den_max`.
pub fn random_rational<R: Rng>(rng: &mut R, max: i64, den_max: i64) -> ExactComplex {
    let den = rng.gen_range(1..=den_max);
    exact(rng.gen_range(-max * den..=max * den), den)
}

/// Random polynomial in `vars` variables, `terms` monomials of total degree `≤ max_degree`.
pub fn random_exact_polynomial<R: Rng>(
    rng: &mut R,
    vars: usize,
    terms: usize,
    max_degree: u32,
) -> Polynomial<ExactComplex> {
    let mut p = Polynomial::zero(vars);
    for _ in 0..terms {
        let mut exps = vec![0u32; vars];
        let deg = rng.gen_range(0..=max_degree);
        for _ in 0..deg {
            exps[rng.gen_range(0..vars)] += 1;
        }
        let c = ExactComplex::new(random_rational(rng, 3, 4).re, random_rational(rng, 1, 3).re);
        p.add_term(exps, c);
    }
    p
}

pub fn random_c64_polynomial<R: Rng>(
    rng: &mut R,
    vars: usize,
    terms: usize,
    max_degree: u32,
) -> Polynomial<C64> {
    let mut p = Polynomial::zero(vars);
    for _ in 0..terms {
        let mut exps = vec![0u32; vars];
        let deg = rng.gen_range(0..=max_degree);
        for _ in 0..deg {
            exps[rng.gen_range(0..vars)] += 1;
        }
        p.add_term(
            exps,
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
        );
    }
    p
}

/// Exact BV frame over `fields` orthonormal field coordinates: antifields
/// `χ_a` are random rational vectors, `M` is a random symmetric rational
/// matrix and `δ ξ_a = −2 M χ_a`.
pub fn random_exact_frame<R: Rng>(
    rng: &mut R,
    fields: usize,
    antifields: usize,
) -> crate::bv::BvFrame<ExactComplex> {
    let chi: Vec<Vec<ExactComplex>> = (0..antifields)
        .map(|_| (0..fields).map(|_| random_rational(rng, 2, 3)).collect())
        .collect();
    let mut m = vec![vec![exact(0, 1); fields]; fields];
    for i in 0..fields {
        for j in i..fields {
            let v = random_rational(rng, 2, 4);
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    let classical = chi
        .iter()
        .map(|c| {
            (0..fields)
                .map(|f| {
                    (0..fields).fold(exact(0, 1), |acc, g| acc + m[f][g].clone() * c[g].clone())
                        * exact(-2, 1)
                })
                .collect()
        })
        .collect();
    crate::bv::BvFrame::new(fields, chi, classical).expect("consistent shapes")
}

/// Random graded observable whose terms have at most `max_antifields`
/// antifields (all exactly `exact_antifields` when given) and at most
/// `max_total` generators.
pub fn random_graded<R: Rng>(
    rng: &mut R,
    frame: &crate::bv::BvFrame<ExactComplex>,
    terms: usize,
    max_total: u32,
    antifields: Option<u32>,
) -> crate::bv::GradedObservable<ExactComplex> {
    let k = frame.fields();
    let m = frame.antifields();
    let mut g = crate::bv::GradedObservable::for_frame(frame);
    for _ in 0..terms {
        let r = match antifields {
            Some(r) => r,
            None => rng.gen_range(0..=(m as u32).min(max_total)),
        };
        let mut idx: Vec<usize> = (0..m).collect();
        idx.shuffle(rng);
        let mask = idx[..r as usize]
            .iter()
            .fold(0u64, |acc, &a| acc | (1 << a));
        let mut exps = vec![0u32; k];
        let fdeg = rng.gen_range(0..=max_total.saturating_sub(r));
        for _ in 0..fdeg {
            exps[rng.gen_range(0..k)] += 1;
        }
        g.add_term(mask, exps, random_rational(rng, 3, 4));
    }
    g
}
