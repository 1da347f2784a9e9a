//! JSON forms of observables and results.
//!
//! Writing is deterministic. [`Precision::Full`] keeps every binary64 bit
//! (shortest round-trip decimals), which is what chained transforms need.
//! [`Precision::Canonical`] rounds onto a grid of 12 significant digits of
//! the largest coefficient, so observables that agree to well below that
//! grid serialise to identical bytes.

use serde::{Deserialize, Serialize};

use crate::bv::{GradedObservable, SmearedFrame};
use crate::error::{Error, Result};
use crate::geometry::{FormMode, ModeTruncation, Phase, SpectralForm, MAX_DIM};
use crate::observable::{LinearObservable, PolynomialObservable};
use crate::poly::Polynomial;
use crate::scalar::C64;
use crate::theory::TheorySpec;
use crate::wilson::{smear_chain, ChainSpec, ExponentialKind, ExponentialObservable};

/// Form coefficients at or below this magnitude are not written.
pub const FORM_DROP: f64 = 1e-15;
/// Polynomial terms at or below this fraction of the largest coefficient are
/// not written at full precision (cancellation residue).
pub const TERM_DROP: f64 = 1e-15;
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Full,
    Canonical,
}

fn normalise_zero(v: f64) -> f64 {
    v + 0.0
}

/// Rounds onto the grid `10^(e − 11)` where `e` is the decimal exponent of `scale`.
pub fn round_to_grid(v: f64, scale: f64) -> f64 {
    if !(scale > 0.0 && scale.is_finite() && v.is_finite()) {
        return normalise_zero(v);
    }
    let decimals = SIGNIFICANT_DIGITS as i32 - 1 - scale.log10().floor() as i32;
    let r = if (0..=300).contains(&decimals) {
        format!("{:.*}", decimals as usize, v).parse().unwrap_or(v)
    } else {
        let step = 10f64.powi(-decimals);
        (v / step).round() * step
    };
    normalise_zero(r)
}

/// Rounds to [`SIGNIFICANT_DIGITS`] and maps `-0.0` to `0.0`.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .unwrap_or(v);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl ComplexJson {
    pub fn with_precision(c: C64, precision: Precision) -> Self {
        match precision {
            Precision::Full => Self {
                re: normalise_zero(c.re),
                im: normalise_zero(c.im),
            },
            Precision::Canonical => c.into(),
        }
    }
}

impl From<C64> for ComplexJson {
    fn from(c: C64) -> Self {
        Self {
            re: round_sig(c.re),
            im: round_sig(c.im),
        }
    }
}

impl From<ComplexJson> for C64 {
    fn from(c: ComplexJson) -> Self {
        C64::new(c.re, c.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeJson {
    pub k: Vec<i16>,
    pub phase: Phase,
    /// Zero-based coordinate indices of the form component.
    pub idx: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    /// Optional on input when the wavevectors fix it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub degree: usize,
    pub cutoff: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub modes: Vec<ModeJson>,
}

impl FormJson {
    pub fn from_form(f: &SpectralForm, label: Option<&str>, precision: Precision) -> Self {
        let n = f.dimension();
        let write = |v: f64| match precision {
            Precision::Full => normalise_zero(v),
            Precision::Canonical => round_sig(v),
        };
        let modes = f
            .modes()
            .filter(|(_, c)| c.norm() > FORM_DROP)
            .map(|(m, c)| ModeJson {
                k: m.k[..n].to_vec(),
                phase: m.phase,
                idx: m.indices(),
                re: write(c.re),
                im: write(c.im),
            })
            .collect();
        Self {
            dimension: Some(n),
            degree: f.degree(),
            cutoff: f.truncation().cutoff,
            label: label.map(str::to_string),
            modes,
        }
    }

    pub fn to_form(&self) -> Result<SpectralForm> {
        let n = match (self.dimension, self.modes.first()) {
            (Some(n), _) => n,
            (None, Some(m)) => m.k.len(),
            (None, None) => {
                return Err(Error::Invalid(
                    "empty form needs an explicit dimension".into(),
                ))
            }
        };
        let mut modes = Vec::with_capacity(self.modes.len());
        for m in &self.modes {
            if m.k.len() != n || n > MAX_DIM {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.k.len(),
                });
            }
            modes.push((FormMode::new(&m.k, m.phase, &m.idx)?, C64::new(m.re, m.im)));
        }
        SpectralForm::from_modes(n, self.degree, ModeTruncation::new(self.cutoff), modes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedTermJson {
    /// One entry per antifield, each 0 or 1.
    pub antifields: Vec<u8>,
    pub exps: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Smearing given either directly or as a heat-smoothed chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SmearingJson {
    Form {
        smearing: FormJson,
    },
    Chain {
        chain: ChainSpec,
        epsilon: f64,
        dimension: usize,
        cutoff: u32,
    },
}

/// Every observable file: a `kind` discriminator plus an optional theory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObservableJson {
    Polynomial {
        dimension: usize,
        degree: usize,
        generators: Vec<FormJson>,
        terms: Vec<TermJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theory: Option<TheorySpec>,
    },
    Wilson {
        #[serde(flatten)]
        smearing: SmearingJson,
        charge: ComplexJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prefactor: Option<ComplexJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theory: Option<TheorySpec>,
    },
    Thooft {
        #[serde(flatten)]
        smearing: SmearingJson,
        charge: ComplexJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prefactor: Option<ComplexJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theory: Option<TheorySpec>,
    },
    Graded {
        fields: Vec<FormJson>,
        antifields: Vec<FormJson>,
        terms: Vec<GradedTermJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theory: Option<TheorySpec>,
    },
}

/// A parsed observable file.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Polynomial(PolynomialObservable),
    /// Exponential observable with the Gaussian prefactor written next to it, if any.
    Exponential(ExponentialObservable, Option<C64>),
    /// Graded observable over field smearings `fields` and antifields `antifields`.
    Graded {
        fields: Vec<SpectralForm>,
        antifields: Vec<SpectralForm>,
        terms: GradedObservable<C64>,
    },
}

impl ObservableJson {
    pub fn theory(&self) -> Option<&TheorySpec> {
        match self {
            ObservableJson::Polynomial { theory, .. }
            | ObservableJson::Wilson { theory, .. }
            | ObservableJson::Thooft { theory, .. }
            | ObservableJson::Graded { theory, .. } => theory.as_ref(),
        }
    }

    pub fn set_theory(&mut self, t: Option<TheorySpec>) {
        match self {
            ObservableJson::Polynomial { theory, .. }
            | ObservableJson::Wilson { theory, .. }
            | ObservableJson::Thooft { theory, .. }
            | ObservableJson::Graded { theory, .. } => *theory = t,
        }
    }

    pub fn from_polynomial(
        p: &PolynomialObservable,
        theory: Option<TheorySpec>,
        precision: Precision,
    ) -> Self {
        ObservableJson::Polynomial {
            dimension: p.dimension(),
            degree: p.degree(),
            generators: p
                .generators()
                .iter()
                .map(|g| FormJson::from_form(&g.smearing, Some(&g.label), precision))
                .collect(),
            terms: terms_json(p.terms(), precision),
            theory,
        }
    }

    pub fn from_exponential(
        e: &ExponentialObservable,
        prefactor: Option<C64>,
        theory: Option<TheorySpec>,
        precision: Precision,
    ) -> Self {
        let smearing = SmearingJson::Form {
            smearing: FormJson::from_form(&e.smearing, None, precision),
        };
        let charge = ComplexJson::with_precision(e.charge, precision);
        let prefactor = prefactor.map(|c| ComplexJson::with_precision(c, precision));
        match e.kind {
            ExponentialKind::Wilson => ObservableJson::Wilson {
                smearing,
                charge,
                prefactor,
                theory,
            },
            ExponentialKind::Thooft => ObservableJson::Thooft {
                smearing,
                charge,
                prefactor,
                theory,
            },
        }
    }

    pub fn parse(&self) -> Result<Observable> {
        match self {
            ObservableJson::Polynomial {
                dimension,
                degree,
                generators,
                terms,
                ..
            } => {
                let gens = generators
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let label = g.label.clone().unwrap_or_else(|| format!("b{i}"));
                        Ok(LinearObservable::new(g.to_form()?, label))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let poly = parse_terms(terms, gens.len())?;
                Ok(Observable::Polynomial(PolynomialObservable::new(
                    *dimension, *degree, gens, poly,
                )?))
            }
            ObservableJson::Wilson {
                smearing,
                charge,
                prefactor,
                ..
            } => {
                let form = smearing_form(smearing)?;
                let e = ExponentialObservable::wilson(form, (*charge).into());
                Ok(Observable::Exponential(e, prefactor.map(Into::into)))
            }
            ObservableJson::Thooft {
                smearing,
                charge,
                prefactor,
                ..
            } => {
                let e = match smearing {
                    // a chain describes the cycle; the stored smearing carries the star
                    SmearingJson::Chain { .. } => {
                        ExponentialObservable::thooft(&smearing_form(smearing)?, (*charge).into())
                    }
                    SmearingJson::Form { smearing } => ExponentialObservable {
                        kind: ExponentialKind::Thooft,
                        smearing: smearing.to_form()?,
                        charge: (*charge).into(),
                    },
                };
                Ok(Observable::Exponential(e, prefactor.map(Into::into)))
            }
            ObservableJson::Graded {
                fields,
                antifields,
                terms,
                ..
            } => {
                let fields = fields
                    .iter()
                    .map(FormJson::to_form)
                    .collect::<Result<Vec<_>>>()?;
                let antifields = antifields
                    .iter()
                    .map(FormJson::to_form)
                    .collect::<Result<Vec<_>>>()?;
                let k = fields.len() + antifields.len();
                let m = antifields.len();
                let mut g = GradedObservable::zero(k, m);
                for t in terms {
                    if t.exps.len() != k || t.antifields.len() != m {
                        return Err(Error::Invalid(format!(
                            "graded term needs {k} field and {m} antifield exponents"
                        )));
                    }
                    let mut mask = 0u64;
                    for (a, &e) in t.antifields.iter().enumerate() {
                        match e {
                            0 => {}
                            1 => mask |= 1 << a,
                            _ => {
                                return Err(Error::Invalid("antifield exponents are 0 or 1".into()))
                            }
                        }
                    }
                    g.add_term(mask, t.exps.clone(), C64::new(t.re, t.im));
                }
                Ok(Observable::Graded {
                    fields,
                    antifields,
                    terms: g,
                })
            }
        }
    }
}

/// Field exponents of a graded observable refer to `fields` followed by `Q χ_a`.
pub fn graded_frame(
    theory: &TheorySpec,
    fields: &[SpectralForm],
    antifields: &[SpectralForm],
) -> Result<SmearedFrame> {
    SmearedFrame::new(theory, fields.to_vec(), antifields.to_vec())
}

fn smearing_form(s: &SmearingJson) -> Result<SpectralForm> {
    match s {
        SmearingJson::Form { smearing } => smearing.to_form(),
        SmearingJson::Chain {
            chain,
            epsilon,
            dimension,
            cutoff,
        } => Ok(smear_chain(chain, *dimension, *epsilon, ModeTruncation::new(*cutoff))?.smearing),
    }
}

fn parse_terms(terms: &[TermJson], vars: usize) -> Result<Polynomial<C64>> {
    let mut p = Polynomial::zero(vars);
    for t in terms {
        if t.exps.len() != vars {
            return Err(Error::Invalid(format!(
                "term has {} exponents for {vars} generators",
                t.exps.len()
            )));
        }
        p.add_term(t.exps.clone(), C64::new(t.re, t.im));
    }
    Ok(p)
}

fn terms_json(p: &Polynomial<C64>, precision: Precision) -> Vec<TermJson> {
    let max = p.max_abs_coeff();
    p.terms()
        .filter(|(_, c)| c.norm() > TERM_DROP * max)
        .map(|(e, c)| {
            let (re, im) = match precision {
                Precision::Full => (normalise_zero(c.re), normalise_zero(c.im)),
                Precision::Canonical => (round_to_grid(c.re, max), round_to_grid(c.im, max)),
            };
            TermJson {
                exps: e.clone(),
                re,
                im,
            }
        })
        .filter(|t| t.re != 0.0 || t.im != 0.0)
        .collect()
}

/// Expectation value with every parameter that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub value: ComplexJson,
    pub method: String,
    pub tail_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounding_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sectors: Option<usize>,
    pub mode_cutoff: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub theory: TheorySpec,
}

/// Pretty JSON with a trailing newline.
pub fn to_canonical_string<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{random_c64_polynomial, random_form};
    use rand::SeedableRng;

    #[test]
    fn rounding_is_idempotent_and_normalises_zero() {
        assert_eq!(round_sig(-0.0).to_bits(), 0.0f64.to_bits());
        let v = round_sig(std::f64::consts::PI);
        assert_eq!(v, 3.14159265359);
        assert_eq!(round_sig(v), v);
    }

    #[test]
    fn polynomial_round_trip_is_byte_stable() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let trunc = ModeTruncation::new(16);
        let gens = (0..2)
            .map(|i| LinearObservable::new(random_form(&mut rng, 3, 1, trunc, 5), format!("g{i}")))
            .collect();
        let p = PolynomialObservable::new(3, 1, gens, random_c64_polynomial(&mut rng, 2, 4, 3))
            .unwrap();
        for precision in [Precision::Full, Precision::Canonical] {
            let a =
                to_canonical_string(&ObservableJson::from_polynomial(&p, None, precision)).unwrap();
            let parsed: ObservableJson = serde_json::from_str(&a).unwrap();
            let Observable::Polynomial(q) = parsed.parse().unwrap() else {
                panic!()
            };
            if precision == Precision::Full {
                assert_eq!(q, p);
            }
            let b =
                to_canonical_string(&ObservableJson::from_polynomial(&q, None, precision)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn grid_rounding_absorbs_noise_below_the_grid() {
        let max = 0.904712520661;
        for v in [0.904712520661, -0.708294604525, 3.1e-7, 0.0] {
            let noisy = v + 4e-15;
            assert_eq!(round_to_grid(noisy, max + 1e-15), round_to_grid(v, max));
        }
        assert_eq!(round_to_grid(2e-14, 1.0), 0.0);
        assert_eq!(round_to_grid(-1e-14, 1.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round_to_grid(1234.5678901234567, 2000.0), 1234.56789012);
    }

    #[test]
    fn chain_smearing_parses() {
        let text = r#"{"kind":"wilson","chain":{"type":"coordinate_cycle","indices":[0],"offset":[0.0,0.5]},
            "epsilon":0.1,"dimension":2,"cutoff":16,"charge":{"re":1.0,"im":0.0}}"#;
        let o: ObservableJson = serde_json::from_str(text).unwrap();
        let Observable::Exponential(e, None) = o.parse().unwrap() else {
            panic!()
        };
        assert_eq!(e.degree(), 1);
        assert!(!e.smearing.is_empty());
    }

    #[test]
    fn dimension_is_inferred_from_wavevectors() {
        let text =
            r#"{"degree":1,"cutoff":4,"modes":[{"k":[1,0,0],"phase":"cos","idx":[2],"re":1.0}]}"#;
        let f: FormJson = serde_json::from_str(text).unwrap();
        assert_eq!(f.to_form().unwrap().dimension(), 3);
    }
}
