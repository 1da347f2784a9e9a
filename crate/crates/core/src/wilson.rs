//! Wilson and 't Hooft observables `a ↦ e^{i r ⟨a, β⟩}`, smeared chains and
//! their Fourier duality.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    basis, hodge_decompose, hodge_star, hodge_star_inverse, mode_normalisation, FormMode,
    ModeTruncation, Phase, SpectralForm,
};
use crate::observable::{LinearObservable, PolynomialObservable};
use crate::oracle::{LatticeExpectation, LatticeSectorSum};
use crate::poly::Polynomial;
use crate::scalar::C64;
use crate::theory::{TheorySpec, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentialKind {
    Wilson,
    Thooft,
}

/// `a ↦ e^{i r ⟨a, β⟩}`. For the 't Hooft kind `β` already carries the Hodge
/// star, so both kinds evaluate by a single pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialObservable {
    pub kind: ExponentialKind,
    pub smearing: SpectralForm,
    pub charge: C64,
}

impl ExponentialObservable {
    pub fn wilson(smearing: SpectralForm, charge: C64) -> Self {
        Self {
            kind: ExponentialKind::Wilson,
            smearing,
            charge,
        }
    }

    /// `a ↦ e^{i r ⟨*a, γ⟩} = e^{i r ⟨a, *^{-1}γ⟩}` for a chain smearing `γ`.
    pub fn thooft(chain_smearing: &SpectralForm, charge: C64) -> Self {
        Self {
            kind: ExponentialKind::Thooft,
            smearing: hodge_star_inverse(chain_smearing),
            charge,
        }
    }

    /// Field degree the observable acts on.
    pub fn degree(&self) -> usize {
        self.smearing.degree()
    }

    pub fn evaluate(&self, a: &SpectralForm) -> Result<C64> {
        let x = a.pairing(&self.smearing)?;
        Ok((C64::new(0.0, 1.0) * self.charge * x).exp())
    }
}

/// Gaussian prefactor and dual observable: `e^{−r²⟨β,β⟩/(4R²)}` and
/// `ã ↦ e^{i (ir/2R²) ⟨ã, *β⟩}` in the theory of degree `n−p` at `1/(2R)`.
pub fn dual_exponential(
    e: &ExponentialObservable,
    theory: &TheorySpec,
) -> Result<(C64, ExponentialObservable, TheorySpec)> {
    if theory.variant != Variant::PForm {
        return Err(Error::VariantMismatch(
            "the Fourier transform acts on the all-forms theory".into(),
        ));
    }
    if e.kind != ExponentialKind::Wilson {
        return Err(Error::Invalid(
            "the forward transform takes a Wilson observable".into(),
        ));
    }
    theory.check_form(&e.smearing)?;
    let r2 = theory.coupling * theory.coupling;
    let g = e.smearing.pairing(&e.smearing)?;
    let prefactor = (-(e.charge * e.charge) * g / (4.0 * r2)).exp();
    let dual = ExponentialObservable {
        kind: ExponentialKind::Thooft,
        smearing: hodge_star(&e.smearing),
        charge: C64::new(0.0, 1.0) * e.charge / (2.0 * r2),
    };
    Ok((prefactor, dual, theory.dual()?))
}

/// The inverse transform: prefactor `e^{−r'²⟨γ,γ⟩/(4ρ²)}`, smearing
/// `*^{-1}γ` and charge `−i r'/(2ρ²)`.
pub fn inverse_dual_exponential(
    e: &ExponentialObservable,
    dual_theory: &TheorySpec,
) -> Result<(C64, ExponentialObservable, TheorySpec)> {
    if dual_theory.variant != Variant::PForm {
        return Err(Error::VariantMismatch(
            "the Fourier transform acts on the all-forms theory".into(),
        ));
    }
    dual_theory.check_form(&e.smearing)?;
    let rho2 = dual_theory.coupling * dual_theory.coupling;
    let g = e.smearing.pairing(&e.smearing)?;
    let prefactor = (-(e.charge * e.charge) * g / (4.0 * rho2)).exp();
    let back = ExponentialObservable {
        kind: ExponentialKind::Wilson,
        smearing: hodge_star_inverse(&e.smearing),
        charge: C64::new(0.0, -1.0) * e.charge / (2.0 * rho2),
    };
    Ok((prefactor, back, dual_theory.dual()?))
}

/// `⟨e^{i r O_β}⟩`: the Gaussian characteristic function, times the
/// normalised sum over topological sectors for the closed-form theory.
pub fn expectation_exponential(
    e: &ExponentialObservable,
    theory: &TheorySpec,
    lattice_cutoff: f64,
) -> Result<LatticeExpectation> {
    theory.check_form(&e.smearing)?;
    let r = e.charge;
    let gaussian = |var: C64| (-(r * r) * var / 2.0).exp();
    let plain = |value: C64| LatticeExpectation {
        value,
        tail_bound: 0.0,
        rounding_bound: 0.0,
        sectors: 0,
        lattice_cutoff,
        warning: None,
    };
    let r2 = theory.coupling * theory.coupling;
    match theory.variant {
        Variant::PForm => Ok(plain(gaussian(
            e.smearing.pairing(&e.smearing)? / (2.0 * r2),
        ))),
        Variant::Scalar => {
            theory.require_positive()?;
            let var = e.smearing.pairing(&theory.half_q_inverse(&e.smearing)?)?;
            Ok(plain(gaussian(var)))
        }
        Variant::ClosedPForm => {
            let split = hodge_decompose(&e.smearing);
            let g = gaussian(split.exact.pairing(&split.exact)? / (2.0 * r2));
            let sectors = LatticeSectorSum::new(theory, lattice_cutoff)?;
            let s = sectors.lattice.spacing();
            let a: Vec<C64> = sectors
                .lattice
                .index_sets()
                .iter()
                .map(|&idx| split.harmonic.coeff(&FormMode::constant(idx)) * s)
                .collect();
            let i = C64::new(0.0, 1.0);
            let terms: Vec<C64> = sectors
                .points
                .par_iter()
                .zip(sectors.weights.par_iter())
                .map(|(m, w)| {
                    let x: C64 = m.iter().zip(&a).map(|(&c, v)| v * c as f64).sum();
                    (i * r * x).exp() * *w
                })
                .collect();
            let chunked: Vec<(C64, f64)> = terms
                .chunks(4096)
                .map(|c| {
                    (
                        c.iter().sum::<C64>(),
                        c.iter().map(|v| v.norm()).sum::<f64>(),
                    )
                })
                .collect();
            let num: C64 = chunked.iter().map(|c| c.0).sum();
            let abs_sum: f64 = chunked.iter().map(|c| c.1).sum();
            let lattice_factor = num / sectors.normalisation;
            let chain = (4096 + terms.len() / 4096 + 16) as f64;
            let rounding_bound = g.norm() * f64::EPSILON * chain * abs_sum / sectors.normalisation;
            let value = g * lattice_factor;
            // |e^{i r ⟨λ, β⟩}| ≤ e^{|r| ‖a‖ √j} on shell j
            let amp = r.norm() * a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let q = sectors.lattice.action_quantum();
            let rank = sectors.lattice.rank() as i32;
            let start = (lattice_cutoff / q).floor() as i64 + 1;
            let (mut num_tail, mut z_tail) = (0.0, 0.0);
            for j in start.max(1)..start.max(1) + 100_000 {
                let jf = j as f64;
                let shell = (2.0 * jf.sqrt() + 1.0).powi(rank) * (-q * jf).exp();
                let t = shell * (amp * jf.sqrt()).exp();
                num_tail += t;
                z_tail += shell;
                if t < 1e-30 * num_tail.max(f64::MIN_POSITIVE) && j > start + 8 {
                    break;
                }
            }
            let tail_bound =
                g.norm() * (num_tail + lattice_factor.norm() * z_tail) / sectors.normalisation;
            let warning = (sectors.points.len() <= 1).then(|| {
                format!("lattice cutoff {lattice_cutoff} retains only the trivial sector")
            });
            Ok(LatticeExpectation {
                value,
                tail_bound,
                rounding_bound,
                sectors: sectors.points.len(),
                lattice_cutoff,
                warning,
            })
        }
    }
}

/// `Σ_{j ≤ N} (i r)^j O_β^j / j!`.
pub fn taylor_truncate(e: &ExponentialObservable, max_degree: u32) -> PolynomialObservable {
    let mut terms = Polynomial::zero(1);
    let ir = C64::new(0.0, 1.0) * e.charge;
    let mut c = C64::new(1.0, 0.0);
    for j in 0..=max_degree {
        if j > 0 {
            c = c * ir / j as f64;
        }
        terms.add_term(vec![j], c);
    }
    let f = &e.smearing;
    PolynomialObservable::new(
        f.dimension(),
        f.degree(),
        vec![LinearObservable::new(f.clone(), "exp")],
        terms,
    )
    .expect("one generator, one variable")
    .canonical()
    .expect("single generator")
}

/// Geometric description of a `p`-chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChainSpec {
    /// The coordinate torus `T^I` through `offset` (coordinates in `I` vary).
    CoordinateCycle {
        indices: Vec<usize>,
        offset: Vec<f64>,
    },
    /// Degree 1: a polyline through the sample points. Degree `p ≥ 2`:
    /// consecutive groups of `2^p` corner points, each a multilinear cell
    /// with corners in binary order (bit `i` set means `t_i = 1`).
    Parametric {
        degree: usize,
        samples: Vec<Vec<f64>>,
    },
}

impl ChainSpec {
    pub fn degree(&self) -> usize {
        match self {
            ChainSpec::CoordinateCycle { indices, .. } => indices.len(),
            ChainSpec::Parametric { degree, .. } => *degree,
        }
    }
}

/// Heat-smoothed Poincaré dual of a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SmearedChain {
    pub chain: ChainSpec,
    pub epsilon: f64,
    pub smearing: SpectralForm,
}

/// Quadrature error above which a parametric cell is rejected.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

/// Mode coefficients `∫_C φ_m dx_J`, damped by `e^{−ε|k|²}`.
pub fn smear_chain(
    chain: &ChainSpec,
    dimension: usize,
    epsilon: f64,
    truncation: ModeTruncation,
) -> Result<SmearedChain> {
    crate::geometry::GeometrySpec::new(dimension)?;
    if !(epsilon > 0.0) {
        return Err(Error::Invalid("smoothing width must be positive".into()));
    }
    let p = chain.degree();
    if p == 0 || p > dimension {
        return Err(Error::DegreeOutOfRange {
            degree: p,
            dimension,
        });
    }
    let modes = basis(dimension, p, truncation);
    let coeffs: Vec<(FormMode, C64)> = match chain {
        ChainSpec::CoordinateCycle { indices, offset } => {
            if offset.len() != dimension || indices.iter().any(|&i| i >= dimension) {
                return Err(Error::Invalid(
                    "cycle indices/offset do not fit the torus".into(),
                ));
            }
            let mut sorted = indices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != p {
                return Err(Error::Invalid("repeated cycle index".into()));
            }
            let idx = sorted.iter().fold(0u8, |m, &i| m | (1 << i));
            modes
                .iter()
                .filter(|m| m.idx == idx && sorted.iter().all(|&j| m.k[j] == 0))
                .map(|m| {
                    let kx = m.k_dot(offset);
                    let trig = match m.phase {
                        Phase::Cos => kx.cos(),
                        Phase::Sin => kx.sin(),
                    };
                    let c = (2.0 * PI).powi(p as i32) * mode_normalisation(dimension, m) * trig;
                    (*m, C64::new(c, 0.0))
                })
                .collect()
        }
        ChainSpec::Parametric { degree, samples } => {
            if samples.iter().any(|s| s.len() != dimension) {
                return Err(Error::Invalid(
                    "sample points must have one coordinate per dimension".into(),
                ));
            }
            let results: Vec<Result<(FormMode, C64)>> = if *degree == 1 {
                if samples.len() < 2 {
                    return Err(Error::Invalid(
                        "a polyline needs at least two points".into(),
                    ));
                }
                modes
                    .par_iter()
                    .map(|m| Ok((*m, C64::new(polyline_integral(m, dimension, samples), 0.0))))
                    .collect()
            } else {
                let corners = 1usize << degree;
                if samples.is_empty() || samples.len() % corners != 0 {
                    return Err(Error::Invalid(format!(
                        "cells of degree {degree} need {corners} corners each"
                    )));
                }
                modes
                    .par_iter()
                    .map(|m| {
                        let mut acc = 0.0;
                        for cell in samples.chunks(corners) {
                            acc += cell_integral(m, dimension, *degree, cell)?;
                        }
                        Ok((*m, C64::new(acc, 0.0)))
                    })
                    .collect()
            };
            results.into_iter().collect::<Result<_>>()?
        }
    };
    let damped = coeffs
        .into_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(m, c)| (m, c * (-epsilon * m.eigenvalue() as f64).exp()));
    let smearing = SpectralForm::from_modes(dimension, p, truncation, damped)?;
    Ok(SmearedChain {
        chain: chain.clone(),
        epsilon,
        smearing,
    })
}

/// `∫_0^1 N trig(k·(x0 + t v)) v_J dt` summed over the segments.
fn polyline_integral(m: &FormMode, n: usize, points: &[Vec<f64>]) -> f64 {
    let j = m.idx.trailing_zeros() as usize;
    let norm = mode_normalisation(n, m);
    let mut acc = 0.0;
    for w in points.windows(2) {
        let v: Vec<f64> = (0..n).map(|i| w[1][i] - w[0][i]).collect();
        if v[j] == 0.0 {
            continue;
        }
        let a = m.k_dot(&w[0]);
        let b = m.k_dot(&v);
        // ∫_0^1 e^{i(a + b t)} dt
        let z = if b.abs() < 1e-12 {
            C64::new(0.0, a).exp() * C64::new(1.0, b / 2.0)
        } else {
            (C64::new(0.0, a + b).exp() - C64::new(0.0, a).exp()) / C64::new(0.0, b)
        };
        let trig = match m.phase {
            Phase::Cos => z.re,
            Phase::Sin => z.im,
        };
        acc += norm * trig * v[j];
    }
    acc
}

fn cell_point(cell: &[Vec<f64>], n: usize, t: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = t.len();
    let mut x = vec![0.0; n];
    let mut tangents = vec![vec![0.0; n]; p];
    for (c, corner) in cell.iter().enumerate() {
        let w: f64 = (0..p)
            .map(|i| if c >> i & 1 == 1 { t[i] } else { 1.0 - t[i] })
            .product();
        for d in 0..n {
            x[d] += w * corner[d];
        }
        for (i, tan) in tangents.iter_mut().enumerate() {
            let dw: f64 = (0..p)
                .map(|l| {
                    if l == i {
                        if c >> l & 1 == 1 {
                            1.0
                        } else {
                            -1.0
                        }
                    } else if c >> l & 1 == 1 {
                        t[l]
                    } else {
                        1.0 - t[l]
                    }
                })
                .product();
            for d in 0..n {
                tan[d] += dw * corner[d];
            }
        }
    }
    (x, tangents)
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 1 { x } else { p1 };
            let pm = if order == 1 { 1.0 } else { p0 };
            dp = order as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

fn cell_rule(m: &FormMode, n: usize, p: usize, cell: &[Vec<f64>], order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let rows: Vec<usize> = m.indices();
    let norm = mode_normalisation(n, m);
    let mut acc = 0.0;
    let mut idx = vec![0usize; p];
    loop {
        let t: Vec<f64> = idx.iter().map(|&i| rule[i].0).collect();
        let w: f64 = idx.iter().map(|&i| rule[i].1).product();
        let (x, tangents) = cell_point(cell, n, &t);
        let jac: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| tangents.iter().map(|tan| tan[r]).collect())
            .collect();
        let kx = m.k_dot(&x);
        let trig = match m.phase {
            Phase::Cos => kx.cos(),
            Phase::Sin => kx.sin(),
        };
        acc += w * norm * trig * determinant(jac);
        let mut d = 0;
        loop {
            if d == p {
                return acc;
            }
            idx[d] += 1;
            if idx[d] < order {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Tensor Gauss–Legendre, doubling the order until two estimates agree.
fn cell_integral(m: &FormMode, n: usize, p: usize, cell: &[Vec<f64>]) -> Result<f64> {
    let mut order = 8;
    let mut prev = cell_rule(m, n, p, cell, order);
    let max_order = if p <= 2 { 128 } else { 32 };
    loop {
        order *= 2;
        let next = cell_rule(m, n, p, cell, order);
        let err = (next - prev).abs();
        if err <= 1e-12 * next.abs().max(1.0) {
            return Ok(next);
        }
        if order >= max_order {
            if err > QUADRATURE_TOLERANCE {
                return Err(Error::QuadratureFail { estimate: err });
            }
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> ModeTruncation {
        ModeTruncation::new(16)
    }

    fn cycle() -> ChainSpec {
        ChainSpec::CoordinateCycle {
            indices: vec![0],
            offset: vec![0.0, 0.3],
        }
    }

    #[test]
    fn coordinate_cycle_coefficients() {
        let s = smear_chain(&cycle(), 2, 0.1, t()).unwrap();
        let c0 = s.smearing.coeff(&FormMode::constant(0b01));
        assert!((c0.re - 2.0 * PI / (2.0 * PI)).abs() < 1e-12);
        // cos(k₁ x₁) dx¹ integrates to zero over the cycle
        let osc = FormMode::new(&[1, 0], Phase::Cos, &[0]).unwrap();
        assert_eq!(s.smearing.coeff(&osc), C64::new(0.0, 0.0));
        // |k|² = 4 damps by e^{−4ε}
        let m = FormMode::new(&[0, 2], Phase::Cos, &[0]).unwrap();
        let s2 = smear_chain(&cycle(), 2, 0.2, t()).unwrap();
        let ratio = s2.smearing.coeff(&m) / s.smearing.coeff(&m);
        assert!((ratio.re - (-0.4f64).exp()).abs() < 1e-12);
        assert!(s2.smearing.norm() < s.smearing.norm());
    }

    #[test]
    fn polyline_matches_cycle() {
        let poly = ChainSpec::Parametric {
            degree: 1,
            samples: vec![vec![0.0, 0.3], vec![PI, 0.3], vec![2.0 * PI, 0.3]],
        };
        let a = smear_chain(&cycle(), 2, 0.1, t()).unwrap();
        let b = smear_chain(&poly, 2, 0.1, t()).unwrap();
        assert!(a.smearing.sub(&b.smearing).unwrap().norm() < 1e-12);
    }

    #[test]
    fn square_cell_matches_coordinate_cycle() {
        let tp = 2.0 * PI;
        let cell = ChainSpec::Parametric {
            degree: 2,
            samples: vec![
                vec![0.0, 0.0, 0.5],
                vec![tp, 0.0, 0.5],
                vec![0.0, tp, 0.5],
                vec![tp, tp, 0.5],
            ],
        };
        let cyc = ChainSpec::CoordinateCycle {
            indices: vec![0, 1],
            offset: vec![0.0, 0.0, 0.5],
        };
        let tr = ModeTruncation::new(6);
        let a = smear_chain(&cyc, 3, 0.05, tr).unwrap();
        let b = smear_chain(&cell, 3, 0.05, tr).unwrap();
        assert!(a.smearing.sub(&b.smearing).unwrap().norm() < 1e-9);
    }

    #[test]
    fn wildly_oscillating_cell_fails() {
        let big = 400.0;
        let cell = ChainSpec::Parametric {
            degree: 2,
            samples: vec![
                vec![0.0, 0.0, 0.0],
                vec![big, 0.0, 3.0],
                vec![0.0, big, -2.0],
                vec![big, big, 50.0],
            ],
        };
        let err = smear_chain(&cell, 3, 0.01, ModeTruncation::new(9)).unwrap_err();
        assert_eq!(err.code(), "QUADRATURE_FAIL");
    }

    #[test]
    fn dual_exponential_examples() {
        let th = TheorySpec::pform(2, 1, 0.5f64.sqrt(), 4).unwrap();
        let beta = SpectralForm::mode(2, ModeTruncation::new(4), FormMode::constant(0b01)).unwrap();
        let w = ExponentialObservable::wilson(beta.clone(), C64::new(1.0, 0.0));
        let (pre, dual, dth) = dual_exponential(&w, &th).unwrap();
        assert!((pre - C64::new((-0.5f64).exp(), 0.0)).norm() < 1e-14);
        assert!((dual.charge - C64::new(0.0, 1.0)).norm() < 1e-14);
        let (pre2, back, bth) = inverse_dual_exponential(&dual, &dth).unwrap();
        assert!((pre * pre2 - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((back.charge - w.charge).norm() < 1e-14);
        assert_eq!(back.smearing, w.smearing);
        assert_eq!(bth.degree, th.degree);
        let zero = ExponentialObservable::wilson(beta, C64::new(0.0, 0.0));
        let (p0, d0, _) = dual_exponential(&zero, &th).unwrap();
        assert_eq!(p0, C64::new(1.0, 0.0));
        assert_eq!(d0.charge, C64::new(0.0, 0.0));
    }

    #[test]
    fn gaussian_expectation() {
        let th = TheorySpec::pform(2, 1, 1.0, 4).unwrap();
        let beta = SpectralForm::mode(2, ModeTruncation::new(4), FormMode::constant(0b01)).unwrap();
        let w = ExponentialObservable::wilson(beta, C64::new(1.0, 0.0));
        let e = expectation_exponential(&w, &th, 40.0).unwrap();
        assert!((e.value.re - (-0.25f64).exp()).abs() < 1e-15);
        let tp = taylor_truncate(&w, 8);
        let d = crate::wick::expectation_diagrams(&tp, &th).unwrap();
        // remainder Σ_{j>8, even} (j−1)!! σ^j / j! with σ² = 1/2
        let mut tail = 0.0;
        for j in (10..60).step_by(2) {
            let dfact: f64 = (1..j).step_by(2).map(|x| x as f64).product();
            let fact: f64 = (1..=j).map(|x| x as f64).product();
            tail += dfact * 0.5f64.powi(j as i32 / 2) / fact;
        }
        assert!((d - e.value).norm() <= tail);
    }

    #[test]
    fn taylor_examples() {
        let beta = SpectralForm::mode(2, ModeTruncation::new(4), FormMode::constant(0b01)).unwrap();
        let w = ExponentialObservable::wilson(beta, C64::new(2.0, 0.0));
        let t0 = taylor_truncate(&w, 0);
        assert!(t0.generators().is_empty());
        let t2 = taylor_truncate(&w, 2);
        assert_eq!(t2.terms().coefficient(&[1]), C64::new(0.0, 2.0));
        assert_eq!(t2.terms().coefficient(&[2]), C64::new(-2.0, 0.0));
    }

    #[test]
    fn closed_exact_smearing_has_trivial_lattice_factor() {
        let th = TheorySpec::closed_pform(2, 1, 1.0, 4).unwrap();
        let m = FormMode::new(&[1, 0], Phase::Sin, &[0]).unwrap();
        let beta = SpectralForm::mode(2, ModeTruncation::new(4), m).unwrap();
        let w = ExponentialObservable::wilson(beta, C64::new(1.0, 0.0));
        let e = expectation_exponential(&w, &th, 40.0).unwrap();
        assert!((e.value.re - (-0.25f64).exp()).abs() < 1e-14);
    }
}
