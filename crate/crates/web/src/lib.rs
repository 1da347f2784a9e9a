//! Browser bindings: three small computations behind `www/index.html`.
//!
//! Every exported function returns a JSON string so the page needs no glue
//! beyond `JSON.parse`. The same functions are plain Rust underneath and are
//! tested natively.

use bvdual::oracle::maxwell_expectation;
use bvdual::wick::{fourier_dual, transform_terms, DiagramRules};
use bvdual::wilson::{
    dual_exponential, expectation_exponential, smear_chain, ChainSpec, ExponentialObservable,
};
use bvdual::{
    FormMode, LinearObservable, ModeTruncation, Phase, Polynomial, PolynomialObservable,
    SpectralForm, TheorySpec, Variant, C64,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct Term {
    pub power: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct HermiteDual {
    pub n: u32,
    pub coupling_sq: f64,
    /// Coefficients of the dual polynomial in the unit-norm generator, by power.
    pub terms: Vec<Term>,
    /// `⟨O^n⟩` at the same coupling.
    pub expectation: f64,
}

/// Dual of `O^n` for a unit-norm smearing at `R² = coupling_sq`.
pub fn hermite_dual_of(n: u32, coupling_sq: f64) -> bvdual::Result<HermiteDual> {
    if !(coupling_sq > 0.0 && coupling_sq.is_finite()) {
        return Err(bvdual::Error::Invalid("R² must be positive".into()));
    }
    let mono = Polynomial::monomial(vec![n], C64::new(1.0, 0.0));
    let gram = vec![vec![C64::new(1.0, 0.0)]];
    let dual = transform_terms(
        &mono,
        &gram,
        &DiagramRules::forward(C64::new(coupling_sq, 0.0)),
    )?;
    let mut terms: Vec<Term> = dual
        .terms()
        .map(|(e, c)| Term {
            power: e[0],
            re: c.re + 0.0,
            im: c.im + 0.0,
        })
        .collect();
    terms.sort_by_key(|t| std::cmp::Reverse(t.power));
    let var = 1.0 / (2.0 * coupling_sq);
    // (n−1)!! var^{n/2} for even n
    let expectation = if n % 2 == 1 {
        0.0
    } else {
        (1..n).step_by(2).map(|k| k as f64 * var).product()
    };
    Ok(HermiteDual {
        n,
        coupling_sq,
        terms,
        expectation,
    })
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct WilsonThooft {
    pub epsilon: f64,
    pub wilson: [f64; 2],
    pub prefactor: f64,
    pub thooft: [f64; 2],
    /// `prefactor · ⟨T⟩`.
    pub dual_side: [f64; 2],
    pub relative_gap: f64,
    pub smearing_norm_sq: f64,
}

/// Both sides of the Wilson–'t Hooft exchange for the loop `x² = offset` on `T²`.
pub fn wilson_thooft_sides(
    epsilon: f64,
    offset: f64,
    charge: f64,
    coupling: f64,
    cutoff: u32,
) -> bvdual::Result<WilsonThooft> {
    let trunc = ModeTruncation::new(cutoff);
    let chain = ChainSpec::CoordinateCycle {
        indices: vec![0],
        offset: vec![0.0, offset],
    };
    let smeared = smear_chain(&chain, 2, epsilon, trunc)?;
    let theory = TheorySpec::pform(2, 1, coupling, cutoff)?;
    let w = ExponentialObservable::wilson(smeared.smearing.clone(), C64::new(charge, 0.0));
    let lhs = expectation_exponential(&w, &theory.with_variant(Variant::ClosedPForm)?, 40.0)?;
    let (pre, t, dual_theory) = dual_exponential(&w, &theory)?;
    let rhs = expectation_exponential(&t, &dual_theory.with_variant(Variant::ClosedPForm)?, 40.0)?;
    let dual_side = pre * rhs.value;
    Ok(WilsonThooft {
        epsilon,
        wilson: [lhs.value.re, lhs.value.im],
        prefactor: pre.re,
        thooft: [rhs.value.re, rhs.value.im],
        dual_side: [dual_side.re, dual_side.im],
        relative_gap: (lhs.value - dual_side).norm() / lhs.value.norm(),
        smearing_norm_sq: smeared.smearing.norm_sqr(),
    })
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct DualityPoint {
    pub coupling: f64,
    pub original: [f64; 2],
    pub dual: [f64; 2],
    pub discrepancy: f64,
    pub sectors: [usize; 2],
}

/// `a ↦ ⟨a, β₁⟩² + ½⟨a, β₁⟩⟨a, β₂⟩` with `β₁` a constant plus a wave and `β₂` a wave.
fn sample_observable(cutoff: u32) -> bvdual::Result<PolynomialObservable> {
    let trunc = ModeTruncation::new(cutoff);
    let b1 = SpectralForm::from_modes(
        2,
        1,
        trunc,
        [
            (FormMode::constant(0b01), C64::new(0.6, 0.0)),
            (FormMode::constant(0b10), C64::new(-0.3, 0.0)),
            (
                FormMode::new(&[1, 0], Phase::Cos, &[1])?,
                C64::new(0.8, 0.0),
            ),
            (
                FormMode::new(&[1, 1], Phase::Sin, &[0])?,
                C64::new(0.5, 0.0),
            ),
        ],
    )?;
    let b2 = SpectralForm::from_modes(
        2,
        1,
        trunc,
        [
            (
                FormMode::new(&[0, 1], Phase::Sin, &[0])?,
                C64::new(0.7, 0.0),
            ),
            (
                FormMode::new(&[2, 1], Phase::Cos, &[1])?,
                C64::new(-0.4, 0.0),
            ),
        ],
    )?;
    let mut terms = Polynomial::zero(2);
    terms.add_term(vec![2, 0], C64::new(1.0, 0.0));
    terms.add_term(vec![1, 1], C64::new(0.5, 0.0));
    PolynomialObservable::new(
        2,
        1,
        vec![
            LinearObservable::new(b1, "b1"),
            LinearObservable::new(b2, "b2"),
        ],
        terms,
    )
}

/// `⟨r(O)⟩_R` against `⟨r(Õ)⟩_{1/2R}` for a fixed observable on `T²`, one point per coupling.
pub fn duality_scan_points(
    r_min: f64,
    r_max: f64,
    steps: u32,
) -> bvdual::Result<Vec<DualityPoint>> {
    if !(r_min > 0.0 && r_max >= r_min && steps >= 1) {
        return Err(bvdual::Error::Invalid(
            "need 0 < r_min ≤ r_max and steps ≥ 1".into(),
        ));
    }
    let cutoff = 16;
    let o = sample_observable(cutoff)?;
    let mut out = Vec::with_capacity(steps as usize);
    for i in 0..steps {
        let r = if steps == 1 {
            r_min
        } else {
            r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64
        };
        let theory = TheorySpec::pform(2, 1, r, cutoff)?;
        let (d, dt) = fourier_dual(&o, &theory)?;
        let a = maxwell_expectation(
            &o.restrict_to_closed()?,
            &theory.with_variant(Variant::ClosedPForm)?,
            40.0,
        )?;
        let b = maxwell_expectation(
            &d.restrict_to_closed()?,
            &dt.with_variant(Variant::ClosedPForm)?,
            40.0,
        )?;
        out.push(DualityPoint {
            coupling: r,
            original: [a.value.re, a.value.im],
            dual: [b.value.re, b.value.im],
            discrepancy: (a.value - b.value).norm() / (1.0 + a.value.norm()),
            sectors: [a.sectors, b.sectors],
        });
    }
    Ok(out)
}

fn to_js<T: Serialize>(r: bvdual::Result<T>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&format!("{}: {e}", e.code())))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())))
}

#[wasm_bindgen]
pub fn hermite_dual(n: u32, coupling_sq: f64) -> Result<String, JsValue> {
    to_js(hermite_dual_of(n, coupling_sq))
}

#[wasm_bindgen]
pub fn wilson_thooft(
    epsilon: f64,
    offset: f64,
    charge: f64,
    coupling: f64,
    cutoff: u32,
) -> Result<String, JsValue> {
    to_js(wilson_thooft_sides(
        epsilon, offset, charge, coupling, cutoff,
    ))
}

#[wasm_bindgen]
pub fn duality_scan(r_min: f64, r_max: f64, steps: u32) -> Result<String, JsValue> {
    to_js(duality_scan_points(r_min, r_max, steps))
}
