//! Free theory descriptions: the field space, the quadratic action
//! `S(a) = ⟨a, Q a⟩` and the massless sector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    coexact_free_part, eigenvalue_of, FormMode, GeometrySpec, ModeTruncation, SpectralForm,
};
use crate::scalar::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// All `p`-forms, `S_R(a) = R²‖a‖²`.
    #[serde(rename = "pform")]
    PForm,
    /// Closed `p`-forms (harmonic part summed over the integral-period lattice).
    #[serde(rename = "closed_pform")]
    ClosedPForm,
    /// Massive scalar field.
    #[serde(rename = "scalar")]
    Scalar,
}

/// Sign of the scalar mass term: `paper` gives `Q = Δ − m²`, `euclidean` gives `Q = Δ + m²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassSign {
    #[default]
    Paper,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySpec {
    pub variant: Variant,
    pub dimension: usize,
    #[serde(default)]
    pub degree: usize,
    #[serde(default = "one")]
    pub coupling: f64,
    #[serde(default)]
    pub mass: f64,
    #[serde(default)]
    pub mass_sign: MassSign,
    pub cutoff: u32,
}

fn one() -> f64 {
    1.0
}

impl TheorySpec {
    pub fn pform(dimension: usize, degree: usize, coupling: f64, cutoff: u32) -> Result<Self> {
        Self {
            variant: Variant::PForm,
            dimension,
            degree,
            coupling,
            mass: 0.0,
            mass_sign: MassSign::Paper,
            cutoff,
        }
        .validated()
    }

    pub fn closed_pform(
        dimension: usize,
        degree: usize,
        coupling: f64,
        cutoff: u32,
    ) -> Result<Self> {
        Self {
            variant: Variant::ClosedPForm,
            ..Self::pform(dimension, degree, coupling, cutoff)?
        }
        .validated()
    }

    pub fn scalar(dimension: usize, mass: f64, mass_sign: MassSign, cutoff: u32) -> Result<Self> {
        Self {
            variant: Variant::Scalar,
            dimension,
            degree: 0,
            coupling: 1.0,
            mass,
            mass_sign,
            cutoff,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        GeometrySpec::new(self.dimension).map_err(|e| Error::InvalidTheory(e.to_string()))?;
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::InvalidTheory(format!(
                "coupling {} must be positive",
                self.coupling
            )));
        }
        match self.variant {
            Variant::PForm | Variant::ClosedPForm => {
                if self.degree == 0 || self.degree >= self.dimension {
                    return Err(Error::InvalidTheory(format!(
                        "form degree must satisfy 0 < p < n, got p = {} on T^{}",
                        self.degree, self.dimension
                    )));
                }
            }
            Variant::Scalar => {
                if self.degree != 0 {
                    return Err(Error::InvalidTheory("scalar theory has degree 0".into()));
                }
                if !(self.mass.is_finite() && self.mass > 0.0) {
                    return Err(Error::InvalidTheory("scalar theory needs m > 0".into()));
                }
                if self.mass_sign == MassSign::Paper {
                    let m2 = self.mass * self.mass;
                    let j = m2.round();
                    if (m2 - j).abs() < 1e-12
                        && j <= self.cutoff as f64
                        && is_sum_of_squares(j as i64, self.dimension)
                    {
                        return Err(Error::MasslessMode { mass2: m2 });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn truncation(&self) -> ModeTruncation {
        ModeTruncation::new(self.cutoff)
    }

    pub fn field_degree(&self) -> usize {
        self.degree
    }

    /// The dual theory: degree `n − p`, coupling `1/(2R)`.
    pub fn dual(&self) -> Result<Self> {
        if self.variant == Variant::Scalar {
            return Err(Error::VariantMismatch("duality needs a form theory".into()));
        }
        Ok(Self {
            degree: self.dimension - self.degree,
            coupling: 1.0 / (2.0 * self.coupling),
            ..*self
        })
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Self { variant, ..*self }.validated()
    }

    /// Eigenvalue of `Q` on a mode (`S(a) = Σ q_m a_m²` for `PForm`/`Scalar`).
    pub fn q_eigenvalue(&self, mode: &FormMode) -> f64 {
        match self.variant {
            Variant::PForm | Variant::ClosedPForm => self.coupling * self.coupling,
            Variant::Scalar => {
                let m2 = self.mass * self.mass;
                match self.mass_sign {
                    MassSign::Paper => eigenvalue_of(mode) - m2,
                    MassSign::Euclidean => eigenvalue_of(mode) + m2,
                }
            }
        }
    }

    /// `Q f`.
    pub fn apply_q(&self, f: &SpectralForm) -> SpectralForm {
        let r2 = C64::new(self.coupling * self.coupling, 0.0);
        match self.variant {
            Variant::PForm => f.scale(r2),
            Variant::ClosedPForm => coexact_free_part(f).scale(r2),
            Variant::Scalar => f.map_coeffs(|m, c| c * self.q_eigenvalue(m)),
        }
    }

    /// `½ Q^{-1} f` (the propagator), for theories without massless modes.
    pub fn half_q_inverse(&self, f: &SpectralForm) -> Result<SpectralForm> {
        match self.variant {
            Variant::PForm => Ok(f.scale(C64::new(0.5 / (self.coupling * self.coupling), 0.0))),
            Variant::Scalar => {
                for (m, _) in f.modes() {
                    if self.q_eigenvalue(m) == 0.0 {
                        return Err(Error::MasslessMode {
                            mass2: self.mass * self.mass,
                        });
                    }
                }
                Ok(f.map_coeffs(|m, c| c * (0.5 / self.q_eigenvalue(m))))
            }
            Variant::ClosedPForm => Err(Error::VariantMismatch(
                "closed theory has massless modes; use the lattice expectation".into(),
            )),
        }
    }

    /// Errors unless `Q` is strictly positive on every retained mode.
    pub fn require_positive(&self) -> Result<()> {
        if self.variant == Variant::Scalar {
            let lowest = match self.mass_sign {
                MassSign::Paper => -self.mass * self.mass,
                MassSign::Euclidean => self.mass * self.mass,
            };
            if lowest <= 0.0 {
                return Err(Error::NotPositive(format!(
                    "Q = Δ − m² has eigenvalue {lowest} on the constant mode"
                )));
            }
        }
        Ok(())
    }

    pub fn check_form(&self, f: &SpectralForm) -> Result<()> {
        if f.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: f.dimension(),
            });
        }
        if f.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: f.degree(),
            });
        }
        Ok(())
    }
}

fn is_sum_of_squares(j: i64, terms: usize) -> bool {
    if terms == 0 {
        return j == 0;
    }
    let r = (j as f64).sqrt().floor() as i64;
    (0..=r).any(|a| is_sum_of_squares(j - a * a, terms - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TheorySpec::pform(2, 1, 1.0, 8).is_ok());
        assert_eq!(
            TheorySpec::pform(2, 0, 1.0, 8).unwrap_err().code(),
            "INVALID_THEORY"
        );
        assert_eq!(
            TheorySpec::pform(2, 2, 1.0, 8).unwrap_err().code(),
            "INVALID_THEORY"
        );
        assert_eq!(
            TheorySpec::pform(2, 1, -1.0, 8).unwrap_err().code(),
            "INVALID_THEORY"
        );
        assert_eq!(
            TheorySpec::scalar(2, 0.0, MassSign::Paper, 8)
                .unwrap_err()
                .code(),
            "INVALID_THEORY"
        );
        // m² = 2 = 1² + 1² is an eigenvalue on T²
        assert_eq!(
            TheorySpec::scalar(2, 2f64.sqrt(), MassSign::Paper, 8)
                .unwrap_err()
                .code(),
            "MASSLESS_MODE"
        );
        // m² = 3 is not a sum of two squares
        assert!(TheorySpec::scalar(2, 3f64.sqrt(), MassSign::Paper, 8).is_ok());
        // but it is a sum of three
        assert!(TheorySpec::scalar(3, 3f64.sqrt(), MassSign::Paper, 8).is_err());
        // above the cutoff it is harmless
        assert!(TheorySpec::scalar(2, 2f64.sqrt(), MassSign::Paper, 1).is_ok());
        assert!(TheorySpec::scalar(2, 2f64.sqrt(), MassSign::Euclidean, 8).is_ok());
    }

    #[test]
    fn dual_theory() {
        let t = TheorySpec::pform(3, 1, 0.8, 10).unwrap();
        let d = t.dual().unwrap();
        assert_eq!(d.degree, 2);
        assert!((d.coupling - 0.625).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let t = TheorySpec::scalar(2, 0.5, MassSign::Euclidean, 16).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: TheorySpec = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        let parsed: TheorySpec = serde_json::from_str(
            r#"{"variant":"closed_pform","dimension":2,"degree":1,"cutoff":4}"#,
        )
        .unwrap();
        assert_eq!(parsed.coupling, 1.0);
    }
}
