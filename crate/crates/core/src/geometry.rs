//! Exterior calculus on the flat torus `T^n = [0, 2π]^n` in a truncated,
//! orthonormal cos/sin Fourier basis.
//!
//! A basis element is `φ_{k,phase}(x) dx_I` with `φ` a unit-norm cosine or
//! sine of `k·x`. The wavevector lives in the half-lattice whose first
//! nonzero component is positive; `k = 0` carries only the cosine. Every
//! operator here (`d`, `d*`, `*`, `Δ`) preserves `|k|²`, so truncations by
//! `|k|² ≤ Λ` are invariant subspaces.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::C64;

pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub dimension: usize,
}

impl GeometrySpec {
    pub fn new(dimension: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dimension) {
            return Err(Error::Invalid(format!(
                "torus dimension {dimension} unsupported (2..=4)"
            )));
        }
        Ok(Self { dimension })
    }

    pub fn side_length(&self) -> f64 {
        2.0 * PI
    }

    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dimension as i32)
    }
}

/// Retains the modes with `|k|² ≤ cutoff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeTruncation {
    pub cutoff: u32,
}

impl ModeTruncation {
    pub fn new(cutoff: u32) -> Self {
        Self { cutoff }
    }

    pub fn contains(&self, mode: &FormMode) -> bool {
        mode.eigenvalue() <= self.cutoff as i64
    }

    /// Canonical wavevectors with `|k|² ≤ cutoff`, in lexicographic order.
    pub fn wavevectors(&self, dimension: usize) -> Vec<[i16; MAX_DIM]> {
        let r = (self.cutoff as f64).sqrt().floor() as i16;
        let mut out = Vec::new();
        let mut k = [0i16; MAX_DIM];
        fn rec(
            pos: usize,
            dim: usize,
            r: i16,
            cutoff: i64,
            k: &mut [i16; MAX_DIM],
            out: &mut Vec<[i16; MAX_DIM]>,
        ) {
            if pos == dim {
                let norm: i64 = k.iter().map(|&c| (c as i64) * (c as i64)).sum();
                if norm <= cutoff && is_canonical(k) {
                    out.push(*k);
                }
                return;
            }
            for c in -r..=r {
                k[pos] = c;
                rec(pos + 1, dim, r, cutoff, k, out);
            }
            k[pos] = 0;
        }
        rec(0, dimension, r, self.cutoff as i64, &mut k, &mut out);
        out
    }
}

fn is_canonical(k: &[i16; MAX_DIM]) -> bool {
    match k.iter().find(|&&c| c != 0) {
        None => true,
        Some(&c) => c > 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

/// One orthonormal basis element `φ_{k,phase} dx_I`; `idx` is the bitmask of `I`
/// (bit `j` set means `dx^{j+1}` is present).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormMode {
    pub k: [i16; MAX_DIM],
    pub phase: Phase,
    pub idx: u8,
}

impl FormMode {
    pub fn new(k: &[i16], phase: Phase, indices: &[usize]) -> Result<Self> {
        if k.len() > MAX_DIM {
            return Err(Error::Invalid("wavevector longer than 4".into()));
        }
        let mut kk = [0i16; MAX_DIM];
        kk[..k.len()].copy_from_slice(k);
        if !is_canonical(&kk) {
            return Err(Error::Invalid(format!("wavevector {k:?} is not canonical")));
        }
        if kk.iter().all(|&c| c == 0) && phase == Phase::Sin {
            return Err(Error::Invalid("sine mode with k = 0".into()));
        }
        let mut idx = 0u8;
        for &i in indices {
            if i >= k.len() || idx & (1 << i) != 0 {
                return Err(Error::Invalid(format!("bad index set {indices:?}")));
            }
            idx |= 1 << i;
        }
        Ok(Self { k: kk, phase, idx })
    }

    /// The constant mode `(2π)^{-n/2} dx_I`.
    pub fn constant(idx: u8) -> Self {
        Self {
            k: [0; MAX_DIM],
            phase: Phase::Cos,
            idx,
        }
    }

    pub fn degree(&self) -> usize {
        self.idx.count_ones() as usize
    }

    /// Zero-based coordinate indices of `I`, increasing.
    pub fn indices(&self) -> Vec<usize> {
        (0..MAX_DIM).filter(|j| self.idx & (1 << j) != 0).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.k.iter().all(|&c| c == 0)
    }

    pub fn eigenvalue(&self) -> i64 {
        self.k.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn k_dot(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.k.iter())
            .map(|(a, &b)| a * b as f64)
            .sum()
    }

    /// Value of the normalised scalar profile `φ_{k,phase}` at `x`.
    pub fn profile_at(&self, dimension: usize, x: &[f64]) -> f64 {
        let t = self.k_dot(x);
        let trig = match self.phase {
            Phase::Cos => t.cos(),
            Phase::Sin => t.sin(),
        };
        mode_normalisation(dimension, self) * trig
    }
}

/// `N` with `‖N cos(k·x)‖ = 1` on `[0, 2π]^n`.
pub fn mode_normalisation(dimension: usize, mode: &FormMode) -> f64 {
    let base = (2.0 * PI).powf(-(dimension as f64) / 2.0);
    if mode.is_constant() {
        base
    } else {
        base * std::f64::consts::SQRT_2
    }
}

/// Laplacian eigenvalue `|k|²` of a basis mode.
pub fn eigenvalue_of(mode: &FormMode) -> f64 {
    mode.eigenvalue() as f64
}

/// All index bitmasks of size `p` in `{0..n-1}`, increasing.
pub fn index_sets(dimension: usize, degree: usize) -> Vec<u8> {
    (0u8..(1u8 << dimension))
        .filter(|m| m.count_ones() as usize == degree)
        .collect()
}

/// Full orthonormal basis of `p`-forms retained by the truncation.
pub fn basis(dimension: usize, degree: usize, truncation: ModeTruncation) -> Vec<FormMode> {
    let sets = index_sets(dimension, degree);
    let mut out = Vec::new();
    for k in truncation.wavevectors(dimension) {
        let zero = k.iter().all(|&c| c == 0);
        for &idx in &sets {
            out.push(FormMode {
                k,
                phase: Phase::Cos,
                idx,
            });
            if !zero {
                out.push(FormMode {
                    k,
                    phase: Phase::Sin,
                    idx,
                });
            }
        }
    }
    out.sort();
    out
}

/// Sign of `dx_j ∧ dx_I` against `dx_{I ∪ j}` (zero-based `j ∉ I`).
fn wedge_sign(j: usize, idx: u8) -> f64 {
    let below = (idx & ((1u8 << j) - 1)).count_ones();
    if below % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Parity of the permutation `(I, I^c)` of `(1..n)`.
pub fn star_sign(dimension: usize, idx: u8) -> f64 {
    let mut inversions = 0;
    for i in 0..dimension {
        if idx & (1 << i) == 0 {
            continue;
        }
        // every complement element smaller than i sits after i
        inversions += (0..i).filter(|&j| idx & (1 << j) == 0).count();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A `p`-form with complex coefficients over the truncated orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralForm {
    dimension: usize,
    degree: usize,
    truncation: ModeTruncation,
    coeffs: BTreeMap<FormMode, C64>,
}

impl SpectralForm {
    pub fn zero(dimension: usize, degree: usize, truncation: ModeTruncation) -> Self {
        debug_assert!(degree <= dimension);
        Self {
            dimension,
            degree,
            truncation,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_modes(
        dimension: usize,
        degree: usize,
        truncation: ModeTruncation,
        modes: impl IntoIterator<Item = (FormMode, C64)>,
    ) -> Result<Self> {
        GeometrySpec::new(dimension)?;
        if degree > dimension {
            return Err(Error::DegreeOutOfRange { degree, dimension });
        }
        let mut f = Self::zero(dimension, degree, truncation);
        for (m, c) in modes {
            f.add_mode(m, c)?;
        }
        Ok(f)
    }

    /// Single basis mode with coefficient 1.
    pub fn mode(dimension: usize, truncation: ModeTruncation, mode: FormMode) -> Result<Self> {
        Self::from_modes(
            dimension,
            mode.degree(),
            truncation,
            [(mode, C64::new(1.0, 0.0))],
        )
    }

    pub fn add_mode(&mut self, mode: FormMode, c: C64) -> Result<()> {
        if mode.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: mode.degree(),
            });
        }
        if mode.k[self.dimension..].iter().any(|&c| c != 0)
            || (mode.idx as usize) >= (1usize << self.dimension)
        {
            return Err(Error::Invalid(format!(
                "mode {mode:?} outside T^{}",
                self.dimension
            )));
        }
        if !self.truncation.contains(&mode) {
            return Err(Error::Invalid(format!(
                "mode with |k|² = {} exceeds cutoff {}",
                mode.eigenvalue(),
                self.truncation.cutoff
            )));
        }
        self.accumulate(mode, c);
        Ok(())
    }

    fn accumulate(&mut self, mode: FormMode, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let e = self.coeffs.entry(mode).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if *e == C64::new(0.0, 0.0) {
            self.coeffs.remove(&mode);
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn truncation(&self) -> ModeTruncation {
        self.truncation
    }

    pub fn coeff(&self, mode: &FormMode) -> C64 {
        self.coeffs.get(mode).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = (&FormMode, &C64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: other.dimension,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    /// Sum; the result keeps the larger truncation.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.truncation = self.truncation.max(other.truncation);
        for (m, c) in &other.coeffs {
            out.accumulate(*m, *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.dimension, self.degree, self.truncation);
        for (m, c) in &self.coeffs {
            out.accumulate(*m, *c * s);
        }
        out
    }

    /// Bilinear L² pairing `∫ a ∧ *b` (no conjugation).
    pub fn pairing(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small
            .coeffs
            .iter()
            .filter_map(|(m, c)| large.coeffs.get(m).map(|d| c * d))
            .sum())
    }

    /// Hermitian L² inner product `⟨a, b⟩ = Σ conj(a_m) b_m`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .filter_map(|(m, c)| other.coeffs.get(m).map(|d| c.conj() * d))
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Restriction to a (possibly smaller) truncation.
    pub fn project(&self, truncation: ModeTruncation) -> Self {
        let mut out = Self::zero(self.dimension, self.degree, truncation);
        for (m, c) in &self.coeffs {
            if truncation.contains(m) {
                out.coeffs.insert(*m, *c);
            }
        }
        out
    }

    /// Same coefficients viewed under a larger truncation.
    pub fn with_truncation(&self, truncation: ModeTruncation) -> Result<Self> {
        let mut out = Self::zero(self.dimension, self.degree, truncation);
        for (m, c) in &self.coeffs {
            out.add_mode(*m, *c)?;
        }
        Ok(out)
    }

    pub fn map_coeffs(&self, f: impl Fn(&FormMode, C64) -> C64) -> Self {
        let mut out = Self::zero(self.dimension, self.degree, self.truncation);
        for (m, c) in &self.coeffs {
            out.accumulate(*m, f(m, *c));
        }
        out
    }

    /// Drops coefficients with `|c| < tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() >= tol);
        out
    }

    /// Pointwise evaluation: the component along each `dx_I`, keyed by bitmask.
    pub fn evaluate_at(&self, x: &[f64]) -> BTreeMap<u8, C64> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.coeffs {
            *out.entry(m.idx).or_insert(C64::new(0.0, 0.0)) += c * m.profile_at(self.dimension, x);
        }
        out
    }

    /// Heat-smoothed point source `Σ_m e^{-t|k|²} φ_m(x₀) φ_m dx_I`, the
    /// truncated heat kernel centred at `x₀` along `dx_I`.
    pub fn heat_bump(
        dimension: usize,
        truncation: ModeTruncation,
        idx: u8,
        center: &[f64],
        t: f64,
    ) -> Result<Self> {
        let degree = idx.count_ones() as usize;
        let modes = basis(dimension, degree, truncation)
            .into_iter()
            .filter(|m| m.idx == idx)
            .map(|m| {
                let w = (-t * m.eigenvalue() as f64).exp() * m.profile_at(dimension, center);
                (m, C64::new(w, 0.0))
            });
        Self::from_modes(dimension, degree, truncation, modes)
    }

    /// Harmonic (k = 0) component.
    pub fn harmonic_part(&self) -> Self {
        let mut out = Self::zero(self.dimension, self.degree, self.truncation);
        for (m, c) in &self.coeffs {
            if m.is_constant() {
                out.coeffs.insert(*m, *c);
            }
        }
        out
    }
}

fn d_raw(f: &SpectralForm) -> SpectralForm {
    let n = f.dimension;
    if f.degree >= n {
        return SpectralForm::zero(n, n, f.truncation);
    }
    let mut out = SpectralForm::zero(n, f.degree + 1, f.truncation);
    for (m, c) in &f.coeffs {
        if m.is_constant() {
            continue;
        }
        for j in 0..n {
            if m.idx & (1 << j) != 0 || m.k[j] == 0 {
                continue;
            }
            let kj = m.k[j] as f64 * wedge_sign(j, m.idx);
            let idx = m.idx | (1 << j);
            let (phase, w) = match m.phase {
                Phase::Cos => (Phase::Sin, -kj),
                Phase::Sin => (Phase::Cos, kj),
            };
            out.accumulate(FormMode { k: m.k, phase, idx }, c * w);
        }
    }
    out
}

fn codiff_raw(f: &SpectralForm) -> SpectralForm {
    let n = f.dimension;
    if f.degree == 0 {
        return SpectralForm::zero(n, 0, f.truncation);
    }
    let mut out = SpectralForm::zero(n, f.degree - 1, f.truncation);
    for (m, c) in &f.coeffs {
        if m.is_constant() {
            continue;
        }
        for j in 0..n {
            if m.idx & (1 << j) == 0 || m.k[j] == 0 {
                continue;
            }
            let idx = m.idx & !(1 << j);
            let kj = m.k[j] as f64 * wedge_sign(j, idx);
            // transpose of d on the orthonormal basis
            let (phase, w) = match m.phase {
                Phase::Sin => (Phase::Cos, -kj),
                Phase::Cos => (Phase::Sin, kj),
            };
            out.accumulate(FormMode { k: m.k, phase, idx }, c * w);
        }
    }
    out
}

/// `d f`; degree `n` input is rejected.
pub fn exterior_derivative(f: &SpectralForm) -> Result<SpectralForm> {
    if f.degree >= f.dimension {
        return Err(Error::DegreeOutOfRange {
            degree: f.degree,
            dimension: f.dimension,
        });
    }
    Ok(d_raw(f))
}

/// `d* f`, the L² adjoint of `d`; degree 0 input is rejected.
pub fn codifferential(f: &SpectralForm) -> Result<SpectralForm> {
    if f.degree == 0 {
        return Err(Error::DegreeOutOfRange {
            degree: 0,
            dimension: f.dimension,
        });
    }
    Ok(codiff_raw(f))
}

/// `*(φ dx_I) = sign(I, I^c) φ dx_{I^c}`.
pub fn hodge_star(f: &SpectralForm) -> SpectralForm {
    let n = f.dimension;
    let full = ((1u16 << n) - 1) as u8;
    let mut out = SpectralForm::zero(n, n - f.degree, f.truncation);
    for (m, c) in &f.coeffs {
        let s = star_sign(n, m.idx);
        out.coeffs.insert(
            FormMode {
                k: m.k,
                phase: m.phase,
                idx: full & !m.idx,
            },
            c * s,
        );
    }
    out
}

/// Inverse Hodge star, `*^{-1} = (-1)^{p(n-p)} *` on `(n-p)`-forms.
pub fn hodge_star_inverse(f: &SpectralForm) -> SpectralForm {
    let p = f.dimension - f.degree;
    let s = if (p * f.degree) % 2 == 0 { 1.0 } else { -1.0 };
    hodge_star(f).scale(C64::new(s, 0.0))
}

/// `Δ = d d* + d* d`, diagonal with eigenvalue `|k|²`.
pub fn laplacian(f: &SpectralForm) -> SpectralForm {
    f.map_coeffs(|m, c| c * eigenvalue_of(m))
}

/// Orthogonal exact / coexact / harmonic parts of a form.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeSplit {
    pub exact: SpectralForm,
    pub coexact: SpectralForm,
    pub harmonic: SpectralForm,
}

impl HodgeSplit {
    pub fn recompose(&self) -> SpectralForm {
        self.exact
            .add(&self.coexact)
            .and_then(|s| s.add(&self.harmonic))
            .expect("parts share degree")
    }
}

pub fn hodge_decompose(f: &SpectralForm) -> HodgeSplit {
    let inv = |m: &FormMode, c: C64| {
        if m.is_constant() {
            C64::new(0.0, 0.0)
        } else {
            c / eigenvalue_of(m)
        }
    };
    let exact = d_raw(&codiff_raw(f)).map_coeffs(inv);
    let coexact = codiff_raw(&d_raw(f)).map_coeffs(inv);
    let exact = if f.degree == 0 {
        SpectralForm::zero(f.dimension, 0, f.truncation)
    } else {
        exact
    };
    let coexact = if f.degree == f.dimension {
        SpectralForm::zero(f.dimension, f.degree, f.truncation)
    } else {
        coexact
    };
    HodgeSplit {
        exact,
        coexact,
        harmonic: f.harmonic_part(),
    }
}

/// Exact plus harmonic part: the component that pairs non-trivially with closed forms.
pub fn coexact_free_part(f: &SpectralForm) -> SpectralForm {
    let split = hodge_decompose(f);
    split.exact.add(&split.harmonic).expect("same degree")
}

/// The lattice of harmonic `p`-forms whose periods over the coordinate
/// `p`-cycles lie in `period·Z`.
///
/// [`HarmonicLattice::new`] uses `period = 2√π·R`, the normalisation under
/// which the `p`-form lattice at coupling `R` and the `(n−p)`-form lattice at
/// coupling `1/(2R)` are Pontryagin dual for the kernel `e^{i∫a∧ã}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicLattice {
    pub dimension: usize,
    pub degree: usize,
    pub coupling: f64,
    pub period: f64,
    index_sets: Vec<u8>,
}

impl HarmonicLattice {
    pub fn new(dimension: usize, degree: usize, coupling: f64) -> Result<Self> {
        Self::with_period(dimension, degree, coupling, 2.0 * PI.sqrt() * coupling)
    }

    /// Lattice with periods in `2πR·Z`.
    pub fn with_two_pi_periods(dimension: usize, degree: usize, coupling: f64) -> Result<Self> {
        Self::with_period(dimension, degree, coupling, 2.0 * PI * coupling)
    }

    pub fn with_period(
        dimension: usize,
        degree: usize,
        coupling: f64,
        period: f64,
    ) -> Result<Self> {
        GeometrySpec::new(dimension)?;
        if degree > dimension {
            return Err(Error::DegreeOutOfRange { degree, dimension });
        }
        if !(coupling > 0.0 && period > 0.0) {
            return Err(Error::Invalid(
                "coupling and period must be positive".into(),
            ));
        }
        Ok(Self {
            dimension,
            degree,
            coupling,
            period,
            index_sets: index_sets(dimension, degree),
        })
    }

    pub fn rank(&self) -> usize {
        self.index_sets.len()
    }

    pub fn index_sets(&self) -> &[u8] {
        &self.index_sets
    }

    /// `c` with `∫_{p-cycle} c dx_I = period`, i.e. `c = period / (2π)^p`.
    pub fn generator_constant(&self) -> f64 {
        self.period / (2.0 * PI).powi(self.degree as i32)
    }

    /// Coefficient of a generator along its unit constant mode.
    pub fn spacing(&self) -> f64 {
        self.generator_constant() * (2.0 * PI).powf(self.dimension as f64 / 2.0)
    }

    /// Action `R²‖λ‖²` per unit of `|m|²` in integer coordinates.
    pub fn action_quantum(&self) -> f64 {
        let s = self.spacing();
        self.coupling * self.coupling * s * s
    }

    pub fn generators(&self, truncation: ModeTruncation) -> Vec<SpectralForm> {
        self.index_sets
            .iter()
            .map(|&idx| {
                SpectralForm::from_modes(
                    self.dimension,
                    self.degree,
                    truncation,
                    [(FormMode::constant(idx), C64::new(self.spacing(), 0.0))],
                )
                .expect("constant modes are always retained")
            })
            .collect()
    }

    /// Integer coordinates `m` with action `≤ radius`, in lexicographic order.
    pub fn points(&self, radius: f64) -> Vec<Vec<i64>> {
        let q = self.action_quantum();
        let max_sq = if radius < 0.0 {
            -1
        } else {
            (radius / q).floor() as i64
        };
        let mut out = Vec::new();
        if max_sq < 0 {
            return out;
        }
        let r = (max_sq as f64).sqrt().floor() as i64;
        let rank = self.rank();
        let mut m = vec![0i64; rank];
        fn rec(pos: usize, r: i64, left: i64, m: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if pos == m.len() {
                out.push(m.clone());
                return;
            }
            for c in -r..=r {
                if c * c > left {
                    continue;
                }
                m[pos] = c;
                rec(pos + 1, r, left - c * c, m, out);
            }
            m[pos] = 0;
        }
        rec(0, r, max_sq, &mut m, &mut out);
        out
    }

    pub fn element(&self, m: &[i64], truncation: ModeTruncation) -> SpectralForm {
        let s = self.spacing();
        let modes = self
            .index_sets
            .iter()
            .zip(m)
            .map(|(&idx, &c)| (FormMode::constant(idx), C64::new(s * c as f64, 0.0)));
        SpectralForm::from_modes(self.dimension, self.degree, truncation, modes)
            .expect("constant modes are always retained")
    }

    /// Every lattice element with action `S_R(λ) ≤ radius`.
    pub fn lattice_elements(&self, radius: f64, truncation: ModeTruncation) -> Vec<SpectralForm> {
        self.points(radius)
            .iter()
            .map(|m| self.element(m, truncation))
            .collect()
    }

    /// Period of a harmonic form over the coordinate cycle `T^I`.
    pub fn period_of(form: &SpectralForm, idx: u8) -> C64 {
        let n = form.dimension();
        let p = form.degree();
        form.coeff(&FormMode::constant(idx))
            * (2.0 * PI).powf(-(n as f64) / 2.0)
            * (2.0 * PI).powi(p as i32)
    }
}
