//! Verification suites. Each suite is deterministic given its seed and returns
//! one [`Check`] per measured quantity.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bv::{
    bd_defect, classical_differential, poisson_bracket, quantum_bv, total_quantum_differential,
    GradedObservable, SmearedFrame,
};
use crate::error::{Error, Result};
use crate::geometry::{
    basis, codifferential, exterior_derivative, hodge_decompose, hodge_star, laplacian,
    ModeTruncation, SpectralForm,
};
use crate::observable::{LinearObservable, PolynomialObservable};
use crate::oracle::{maxwell_expectation, moments_isserlis, moments_montecarlo, GaussianSpec};
use crate::poly::Polynomial;
use crate::scalar::{exact, scale_mat, ExactComplex, Mat, Scalar, C64};
use crate::testing::{
    random_c64_polynomial, random_exact_frame, random_exact_gram, random_exact_polynomial,
    random_form, random_form_with_harmonic, random_graded, random_rational,
};
use crate::theory::{TheorySpec, Variant};
use crate::wick::{
    expectation_diagrams, expectation_terms, fourier_dual, transform_terms, DiagramRules,
};
use crate::wilson::{
    dual_exponential, expectation_exponential, smear_chain, ChainSpec, ExponentialObservable,
};

pub const SUITES: [&str; 9] = [
    "geometry",
    "bd",
    "double-dual",
    "hermite",
    "stokes",
    "plancherel",
    "wilson-thooft",
    "factorisation",
    "oracle",
];

/// Parameters shared by all suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Mode cutoff `Λ`.
    pub cutoff: u32,
    pub lattice_cutoff: f64,
    pub samples: usize,
    /// Replaces the default tolerance of every floating-point check.
    pub tolerance: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            cutoff: 64,
            lattice_cutoff: 40.0,
            samples: 100_000,
            tolerance: None,
        }
    }
}

impl VerifyConfig {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn rng(&self, salt: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    /// A check decided in exact arithmetic; `measured` is informational.
    pub fn exact(name: impl Into<String>, measured: f64, holds: bool) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: 0.0,
            passed: holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cutoff: u32,
    pub lattice_cutoff: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Wall-clock seconds; left out of reports unless timings are requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl SuiteReport {
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed).or_else(|| {
            self.checks.iter().max_by(|a, b| {
                (a.measured / a.tolerance.max(f64::MIN_POSITIVE))
                    .total_cmp(&(b.measured / b.tolerance.max(f64::MIN_POSITIVE)))
            })
        })
    }

    pub fn to_csv(&self, timings: bool) -> String {
        let mut s = String::from("suite,check,measured,tolerance,passed\n");
        for c in &self.checks {
            s.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                self.suite,
                c.name.replace(',', ";"),
                c.measured,
                c.tolerance,
                c.passed
            ));
        }
        if timings {
            if let Some(t) = self.runtime_seconds {
                s.push_str(&format!("{},runtime_seconds,{t:e},,\n", self.suite));
            }
        }
        s
    }
}

pub fn run_suite(name: &str, config: &VerifyConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let checks = match name {
        "geometry" => geometry(config)?,
        "bd" => bd(config)?,
        "double-dual" => double_dual(config)?,
        "hermite" => hermite(config)?,
        "stokes" => stokes(config)?,
        "plancherel" => plancherel(config)?,
        "wilson-thooft" => wilson_thooft(config)?,
        "factorisation" => factorisation(config)?,
        "oracle" => oracle(config)?,
        other => return Err(Error::Invalid(format!("unknown suite {other:?}"))),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        seed: config.seed,
        cutoff: config.cutoff,
        lattice_cutoff: config.lattice_cutoff,
        passed: checks.iter().all(|c| c.passed),
        checks,
        runtime_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

fn max_abs(f: &SpectralForm) -> f64 {
    f.modes().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

fn diff(a: &SpectralForm, b: &SpectralForm) -> Result<f64> {
    Ok(max_abs(&a.sub(b)?))
}

fn exact_diff(a: &Polynomial<ExactComplex>, b: &Polynomial<ExactComplex>) -> (f64, bool) {
    let d = a.sub(b);
    (
        d.terms()
            .map(|(_, c)| c.to_c64().norm())
            .fold(0.0, f64::max),
        d.is_zero(),
    )
}

fn graded_zero(g: &GradedObservable<ExactComplex>) -> (f64, bool) {
    let m = g
        .terms()
        .map(|(_, c)| c.to_c64().norm())
        .fold(0.0, f64::max);
    (m, g.is_zero())
}

fn geometry(config: &VerifyConfig) -> Result<Vec<Check>> {
    let tol = config.tol(1e-12);
    let trunc = ModeTruncation::new(config.cutoff);
    let mut rng = config.rng(1);
    let mut checks = Vec::new();
    for n in [2usize, 3] {
        let mut d2 = 0.0f64;
        let mut ds2 = 0.0f64;
        let mut adj = 0.0f64;
        let mut star = 0.0f64;
        let mut split = 0.0f64;
        let mut orth = 0.0f64;
        let mut comm = 0.0f64;
        let mut count = 0usize;
        for p in 0..=n {
            let sign = if (p * (n - p)) % 2 == 0 { 1.0 } else { -1.0 };
            let upper = if p < n {
                basis(n, p + 1, trunc)
            } else {
                Vec::new()
            };
            for m in basis(n, p, trunc) {
                count += 1;
                let f = SpectralForm::mode(n, trunc, m)?;
                let df = if p < n {
                    Some(exterior_derivative(&f)?)
                } else {
                    None
                };
                let sf = if p > 0 {
                    Some(codifferential(&f)?)
                } else {
                    None
                };
                let lf = laplacian(&f);
                let mut hodge_laplacian = SpectralForm::zero(n, p, trunc);
                if let Some(df) = &df {
                    if p + 1 < n {
                        d2 = d2.max(max_abs(&exterior_derivative(df)?));
                    }
                    for (mu, c) in df.modes() {
                        let back = codifferential(&SpectralForm::mode(n, trunc, *mu)?)?.coeff(&m);
                        adj = adj.max((c - back).norm());
                    }
                    hodge_laplacian = hodge_laplacian.add(&codifferential(df)?)?;
                    comm = comm.max(diff(&laplacian(df), &exterior_derivative(&lf)?)?);
                }
                if let Some(sf) = &sf {
                    if p > 1 {
                        ds2 = ds2.max(max_abs(&codifferential(sf)?));
                    }
                    hodge_laplacian = hodge_laplacian.add(&exterior_derivative(sf)?)?;
                    comm = comm.max(diff(&laplacian(sf), &codifferential(&lf)?)?);
                }
                comm = comm.max(diff(&hodge_laplacian, &lf)?);
                comm = comm.max(diff(&lf, &f.scale(C64::new(m.eigenvalue() as f64, 0.0)))?);
                comm = comm.max(diff(&laplacian(&hodge_star(&f)), &hodge_star(&lf))?);
                star = star.max(diff(
                    &hodge_star(&hodge_star(&f)),
                    &f.scale(C64::new(sign, 0.0)),
                )?);
                let h = hodge_decompose(&f);
                split = split.max(diff(&h.recompose(), &f)?);
                for (a, b) in [
                    (&h.exact, &h.coexact),
                    (&h.exact, &h.harmonic),
                    (&h.coexact, &h.harmonic),
                ] {
                    orth = orth.max(a.inner(b)?.norm());
                }
            }
            // the transpose direction: every entry of d* on (p+1)-modes
            for mu in upper {
                let g = SpectralForm::mode(n, trunc, mu)?;
                for (m, c) in codifferential(&g)?.modes() {
                    let fwd = exterior_derivative(&SpectralForm::mode(n, trunc, *m)?)?.coeff(&mu);
                    adj = adj.max((c - fwd).norm());
                }
            }
            // dense random forms for the splitting
            for _ in 0..2 {
                let all = basis(n, p, trunc).len();
                let f = random_form(&mut rng, n, p, trunc, all);
                let h = hodge_decompose(&f);
                split = split.max(diff(&h.recompose(), &f)?);
                for (a, b) in [
                    (&h.exact, &h.coexact),
                    (&h.exact, &h.harmonic),
                    (&h.coexact, &h.harmonic),
                ] {
                    orth = orth.max(a.inner(b)?.norm());
                }
            }
        }
        let tag = format!("T{n} ({count} basis forms)");
        checks.push(Check::within(format!("d^2 = 0 {tag}"), d2, tol));
        checks.push(Check::within(format!("d*^2 = 0 {tag}"), ds2, tol));
        checks.push(Check::within(
            format!("<d a, b> = <a, d* b> {tag}"),
            adj,
            tol,
        ));
        checks.push(Check::within(
            format!("** = (-1)^(p(n-p)) {tag}"),
            star,
            tol,
        ));
        checks.push(Check::within(
            format!("Hodge recomposition {tag}"),
            split,
            tol,
        ));
        checks.push(Check::within(
            format!("Hodge orthogonality {tag}"),
            orth,
            tol,
        ));
        checks.push(Check::within(
            format!("Laplacian = dd* + d*d, eigenvalues, commutation {tag}"),
            comm,
            tol,
        ));
    }
    Ok(checks)
}

fn hermite_table(n: usize) -> Vec<Polynomial<ExactComplex>> {
    let x = Polynomial::variable(1, 0);
    let mut he = vec![Polynomial::constant(1, exact(1, 1)), x.clone()];
    for k in 1..n {
        let next = x.mul(&he[k]).sub(&he[k - 1].scale(&exact(k as i64, 1)));
        he.push(next);
    }
    he.truncate(n + 1);
    he
}

fn hermite(config: &VerifyConfig) -> Result<Vec<Check>> {
    let he = hermite_table(10);
    let rules = DiagramRules::forward(exact(1, 2));
    let gram = vec![vec![exact(1, 1)]];
    let mut checks = Vec::new();
    let mut i_pow = exact(1, 1);
    for (n, h) in he.iter().enumerate() {
        let dual = transform_terms(
            &Polynomial::monomial(vec![n as u32], exact(1, 1)),
            &gram,
            &rules,
        )?;
        let (m, ok) = exact_diff(&dual, &h.scale(&i_pow));
        checks.push(Check::exact(format!("dual(O^{n}) = i^{n} He_{n}"), m, ok));
        i_pow = i_pow * ExactComplex::imag_unit();
    }
    let dual4 = transform_terms(&Polynomial::monomial(vec![4], exact(1, 1)), &gram, &rules)?;
    let want = [(4u32, 1i64), (2, -6), (0, 3)];
    let ok = dual4.len() == 3
        && want
            .iter()
            .all(|&(e, c)| dual4.coefficient(&[e]) == exact(c, 1));
    let err = want
        .iter()
        .map(|&(e, c)| (dual4.coefficient(&[e]) - exact(c, 1)).to_c64().norm())
        .fold(0.0, f64::max);
    checks.push(Check::exact("dual(O^4) coefficients (1, -6, 3)", err, ok));

    // the same through a unit-norm spectral smearing in floating point
    let trunc = ModeTruncation::new(config.cutoff);
    let theory = TheorySpec::pform(2, 1, 0.5f64.sqrt(), config.cutoff)?;
    let mut rng = config.rng(4);
    let f = random_form(&mut rng, 2, 1, trunc, 6);
    let f = f.scale(C64::new(1.0 / f.norm(), 0.0));
    let mut worst = 0.0f64;
    for (n, h) in he.iter().enumerate().skip(1) {
        let o = PolynomialObservable::power(
            LinearObservable::new(f.clone(), "O"),
            n as u32,
            C64::new(1.0, 0.0),
        );
        let (d, _) = fourier_dual(&o, &theory)?;
        let want = h
            .scale(&pow(&ExactComplex::imag_unit(), n as u32))
            .map_coeffs(|c| c.to_c64());
        worst = worst.max(d.terms().max_abs_diff(&want));
    }
    checks.push(Check::within(
        "spectral unit smearing He_n, 1 <= n <= 10",
        worst,
        config.tol(1e-9),
    ));
    Ok(checks)
}

fn pow(b: &ExactComplex, e: u32) -> ExactComplex {
    crate::scalar::pow(b, e)
}

fn random_r2<R: Rng>(rng: &mut R) -> ExactComplex {
    let den = rng.gen_range(1..=6);
    exact(rng.gen_range(1..=4 * den), den)
}

fn double_dual(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = config.rng(3);
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    let cases = 50;
    for _ in 0..cases {
        let k = rng.gen_range(1..=4);
        let mut exps = vec![0u32; k];
        for _ in 0..rng.gen_range(0..=8) {
            exps[rng.gen_range(0..k)] += 1;
        }
        let mono = Polynomial::monomial(exps, random_rational(&mut rng, 3, 5));
        let den = rng.gen_range(1..=4);
        let gram = random_exact_gram(&mut rng, k, den);
        let r2 = random_r2(&mut rng);
        let rho2 = exact(1, 4) / r2.clone();
        let dual = transform_terms(&mono, &gram, &DiagramRules::forward(r2))?;
        let back = transform_terms(&dual, &gram, &DiagramRules::inverse(rho2))?;
        let (m, ok) = exact_diff(&back, &mono);
        worst = worst.max(m);
        failures += usize::from(!ok);
    }
    let mut checks = vec![Check::exact(
        format!("inverse(dual(P)) = P on {cases} exact monomials ({failures} failures)"),
        worst,
        failures == 0,
    )];

    // floating-point round trip through the observable layer
    let trunc = ModeTruncation::new(config.cutoff);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (n, p) = [(2, 1), (3, 1), (3, 2)][rng.gen_range(0..3)];
        let theory = TheorySpec::pform(n, p, rng.gen_range(0.5..1.5), config.cutoff)?;
        let k = rng.gen_range(1..=3);
        let gens = (0..k)
            .map(|i| LinearObservable::new(random_form(&mut rng, n, p, trunc, 4), format!("b{i}")))
            .collect();
        let o = PolynomialObservable::new(n, p, gens, random_c64_polynomial(&mut rng, k, 4, 6))?
            .canonical()?;
        let (d, dt) = fourier_dual(&o, &theory)?;
        let (back, _) = crate::wick::inverse_fourier_dual(&d, &dt)?;
        let err = back
            .max_term_diff(&o)
            .ok_or_else(|| Error::Invalid("round trip changed the generators".into()))?;
        worst = worst.max(err / (1.0 + o.terms().max_abs_coeff()));
    }
    checks.push(Check::within(
        "spectral round trip, 10 observables",
        worst,
        config.tol(1e-9),
    ));
    Ok(checks)
}

fn oracle(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = config.rng(9);
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    let mut mc_worst = 0.0f64;
    let mut mc_failures = 0usize;
    for case in 0..100u64 {
        let k = rng.gen_range(1..=3);
        let count = rng.gen_range(1..=4);
        let terms = random_exact_polynomial(&mut rng, k, count, 6);
        let den = rng.gen_range(1..=4);
        let gram = random_exact_gram(&mut rng, k, den);
        let r2 = random_r2(&mut rng);
        let cov = scale_mat(&gram, &(exact(1, 2) / r2));
        let diagrams = expectation_terms(&terms, &cov)?;
        let isserlis = moments_isserlis(&terms, &GaussianSpec::centered(cov.clone()))?;
        worst = worst.max((diagrams.clone() - isserlis.clone()).to_c64().norm());
        failures += usize::from(diagrams != isserlis);
        if case < 10 {
            let fterms = terms.map_coeffs(|c| c.to_c64());
            let fcov: Mat<C64> = cov
                .iter()
                .map(|r| r.iter().map(|c| c.to_c64()).collect())
                .collect();
            let est = moments_montecarlo(
                &fterms,
                &GaussianSpec::centered(fcov),
                config.samples,
                config.seed ^ case,
            )?;
            let z =
                (est.value - diagrams.to_c64()).norm() / est.standard_error.max(f64::MIN_POSITIVE);
            mc_worst = mc_worst.max(z);
            mc_failures += usize::from(z > 4.0);
        }
    }
    Ok(vec![
        Check::exact(format!("diagrams = Isserlis on 100 exact inputs ({failures} failures)"), worst, failures == 0),
        Check::within(
            format!("Monte-Carlo within 4 standard errors on 10 inputs, {} samples ({mc_failures} outside)", config.samples),
            mc_worst,
            4.0,
        ),
    ])
}

fn bd(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = config.rng(2);
    let mut worst = [0.0f64; 5];
    let mut ok = [true; 5];
    let mut record = |slot: usize, (m, z): (f64, bool)| {
        worst[slot] = worst[slot].max(m);
        ok[slot] &= z;
    };
    for _ in 0..20 {
        let frame = random_exact_frame(&mut rng, 3, 3);
        let g = random_graded(&mut rng, &frame, 6, 6, None);
        record(0, graded_zero(&quantum_bv(&quantum_bv(&g, &frame), &frame)));
        record(
            1,
            graded_zero(&classical_differential(
                &classical_differential(&g, &frame),
                &frame,
            )),
        );
        record(
            2,
            graded_zero(&total_quantum_differential(
                &total_quantum_differential(&g, &frame),
                &frame,
            )),
        );
        let r1 = rng.gen_range(0..=1);
        let r2 = rng.gen_range(0..=1);
        let phi = random_graded(&mut rng, &frame, 3, 3, Some(r1));
        let psi = random_graded(&mut rng, &frame, 3, 3, Some(r2));
        record(3, graded_zero(&bd_defect(&phi, &psi, &frame)?));
        let sign = if r1 * r2 % 2 == 1 {
            exact(-1, 1)
        } else {
            exact(1, 1)
        };
        let sym = poisson_bracket(&phi, &psi, &frame)?
            .sub(&poisson_bracket(&psi, &phi, &frame)?.scale(&sign));
        record(4, graded_zero(&sym));
    }
    let names = [
        "D^2 = 0",
        "delta^2 = 0",
        "(delta + D)^2 = 0",
        "BD product rule",
        "bracket graded symmetry",
    ];
    Ok(names
        .iter()
        .zip(worst.iter().zip(ok))
        .map(|(n, (&m, z))| Check::exact(format!("{n} (20 exact frames, total degree <= 6)"), m, z))
        .collect())
}

fn stokes(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = config.rng(5);
    let trunc = ModeTruncation::new(config.cutoff);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let (n, p) = [(2, 1), (3, 1), (3, 2)][rng.gen_range(0..3)];
        let theory = TheorySpec::pform(n, p, rng.gen_range(0.6..1.4), config.cutoff)?;
        let fields = (0..2)
            .map(|_| random_form(&mut rng, n, p, trunc, 4))
            .collect();
        let m = rng.gen_range(1..=2);
        let anti = (0..m)
            .map(|_| random_form(&mut rng, n, p, trunc, 4))
            .collect();
        let sf = SmearedFrame::new(&theory, fields, anti)?;
        let k = sf.frame.fields();
        let mut w = GradedObservable::for_frame(&sf.frame);
        for a in 0..m {
            let f = random_c64_polynomial(&mut rng, k, 3, 3);
            w = w.add(&GradedObservable::from_field_polynomial(m, 1 << a, &f));
        }
        let dw = total_quantum_differential(&w, &sf.frame);
        let e = expectation_diagrams(&sf.to_polynomial(&dw)?, &theory)?;
        worst = worst.max(e.norm());
    }
    Ok(vec![Check::within(
        "|<(delta + D) W>| over 25 degree -1 observables",
        worst,
        config.tol(1e-10),
    )])
}

fn random_observable<R: Rng>(
    rng: &mut R,
    n: usize,
    p: usize,
    trunc: ModeTruncation,
) -> Result<PolynomialObservable> {
    let k = rng.gen_range(1..=2);
    let gens = (0..k)
        .map(|i| {
            LinearObservable::new(
                random_form_with_harmonic(rng, n, p, trunc, 4),
                format!("b{i}"),
            )
        })
        .collect();
    PolynomialObservable::new(n, p, gens, random_c64_polynomial(rng, k, 3, 4))?.canonical()
}

fn plancherel(config: &VerifyConfig) -> Result<Vec<Check>> {
    let tol = config.tol(1e-6);
    let trunc = ModeTruncation::new(config.cutoff);
    let mut rng = config.rng(6);
    let mut checks = Vec::new();
    for (n, p) in [(2usize, 1usize), (3, 1)] {
        for r in [0.7, 1.0, 1.3] {
            let theory = TheorySpec::pform(n, p, r, config.cutoff)?;
            let mut worst = 0.0f64;
            let mut monotone = f64::NEG_INFINITY;
            for _ in 0..5 {
                let o = random_observable(&mut rng, n, p, trunc)?;
                let (d, dt) = fourier_dual(&o, &theory)?;
                let ro = o.restrict_to_closed()?;
                let rd = d.restrict_to_closed()?;
                let closed = theory.with_variant(Variant::ClosedPForm)?;
                let dclosed = dt.with_variant(Variant::ClosedPForm)?;
                let measure = |cut: f64| -> Result<(f64, f64)> {
                    let a = maxwell_expectation(&ro, &closed, cut)?;
                    let b = maxwell_expectation(&rd, &dclosed, cut)?;
                    let scale = 1.0 + a.value.norm();
                    let slack = a.tail_bound + a.rounding_bound + b.tail_bound + b.rounding_bound;
                    Ok(((a.value - b.value).norm() / scale, slack / scale))
                };
                let (disc, _) = measure(config.lattice_cutoff)?;
                worst = worst.max(disc);
                let cuts = [
                    config.lattice_cutoff / 4.0,
                    config.lattice_cutoff / 2.0,
                    config.lattice_cutoff,
                    2.0 * config.lattice_cutoff,
                ];
                let series = cuts
                    .iter()
                    .map(|&c| measure(c))
                    .collect::<Result<Vec<_>>>()?;
                for w in series.windows(2) {
                    let (d0, s0) = w[0];
                    let (d1, s1) = w[1];
                    monotone = monotone.max(d1 - d0 - s0 - s1);
                }
            }
            checks.push(Check::within(
                format!(
                    "T{n} p={p} R={r}: relative discrepancy, 5 incident pairs, lattice cutoff {}",
                    config.lattice_cutoff
                ),
                worst,
                tol,
            ));
            checks.push(Check::within(
                format!("T{n} p={p} R={r}: discrepancy non-increasing under cutoff doubling beyond tail bounds"),
                monotone.max(0.0),
                0.0,
            ));
        }
    }
    Ok(checks)
}

fn wilson_thooft(config: &VerifyConfig) -> Result<Vec<Check>> {
    let trunc = ModeTruncation::new(config.cutoff);
    let theory = TheorySpec::pform(2, 1, 1.0, config.cutoff)?;
    let chain = ChainSpec::CoordinateCycle {
        indices: vec![0],
        offset: vec![0.0, 0.7],
    };
    let mut checks = Vec::new();
    for eps in [0.1, 0.05] {
        let sc = smear_chain(&chain, 2, eps, trunc)?;
        let w = ExponentialObservable::wilson(sc.smearing.clone(), C64::new(1.0, 0.0));
        let lhs = expectation_exponential(
            &w,
            &theory.with_variant(Variant::ClosedPForm)?,
            config.lattice_cutoff,
        )?;
        let (pre, t, dt) = dual_exponential(&w, &theory)?;
        let rhs = expectation_exponential(
            &t,
            &dt.with_variant(Variant::ClosedPForm)?,
            config.lattice_cutoff,
        )?;
        let rel = (lhs.value - pre * rhs.value).norm() / lhs.value.norm();
        checks.push(Check::within(
            format!("<W> = prefactor <T>, eps={eps}"),
            rel,
            config.tol(1e-6),
        ));
    }
    Ok(checks)
}

fn factorisation(config: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = config.rng(8);
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..20 {
        let k1 = rng.gen_range(1..=2);
        let k2 = rng.gen_range(1..=2);
        let k = k1 + k2;
        let g1 = random_exact_gram(&mut rng, k1, 2);
        let g2 = random_exact_gram(&mut rng, k2, 3);
        let mut gram = vec![vec![exact(0, 1); k]; k];
        for i in 0..k1 {
            gram[i][..k1].clone_from_slice(&g1[i]);
        }
        for i in 0..k2 {
            gram[k1 + i][k1..].clone_from_slice(&g2[i]);
        }
        let p = random_exact_polynomial(&mut rng, k1, 3, 4);
        let q = random_exact_polynomial(&mut rng, k2, 3, 4);
        let rules = DiagramRules::forward(random_r2(&mut rng));
        let whole = transform_terms(&p.embed(k, 0).mul(&q.embed(k, k1)), &gram, &rules)?;
        let parts = transform_terms(&p, &g1, &rules)?
            .embed(k, 0)
            .mul(&transform_terms(&q, &g2, &rules)?.embed(k, k1));
        let (m, ok) = exact_diff(&whole, &parts);
        worst = worst.max(m);
        failures += usize::from(!ok);
    }
    let mut checks = vec![Check::exact(
        format!("dual(PQ) = dual(P) dual(Q), orthogonal generators, 20 exact cases ({failures} failures)"),
        worst,
        failures == 0,
    )];

    // disjoint mode supports in the spectral basis
    let trunc = ModeTruncation::new(config.cutoff);
    let theory = TheorySpec::pform(2, 1, 1.0, config.cutoff)?;
    let modes = basis(2, 1, trunc);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let split = modes.len() / 2;
        let pick = |rng: &mut ChaCha20Rng, range: std::ops::Range<usize>| {
            let f = (0..3).map(|_| {
                (
                    modes[rng.gen_range(range.clone())],
                    C64::new(rng.gen_range(-1.0..1.0), 0.0),
                )
            });
            SpectralForm::from_modes(2, 1, trunc, f)
        };
        let p = single(pick(&mut rng, 0..split)?, &mut rng)?;
        let q = single(pick(&mut rng, split..modes.len())?, &mut rng)?;
        worst = worst.max(factor_gap(&p, &q, &theory)?);
    }
    checks.push(Check::within(
        "disjoint spectral supports, 5 cases",
        worst,
        config.tol(1e-12),
    ));

    // heat-kernel bumps centred at antipodal points
    let mut worst = 0.0f64;
    let c = [0.5, 0.5];
    let a = [0.5 + std::f64::consts::PI, 0.5 + std::f64::consts::PI];
    for _ in 0..5 {
        let bumps = |centre: &[f64], label: &str| -> Result<Vec<LinearObservable>> {
            [0b01u8, 0b10]
                .iter()
                .map(|&idx| {
                    let b = SpectralForm::heat_bump(2, trunc, idx, centre, BUMP_WIDTH)?;
                    Ok(LinearObservable::new(
                        b.scale(C64::new(1.0 / b.norm(), 0.0)),
                        format!("{label}{idx}"),
                    ))
                })
                .collect()
        };
        let p = PolynomialObservable::new(
            2,
            1,
            bumps(&c, "p")?,
            random_c64_polynomial(&mut rng, 2, 3, 2),
        )?;
        let q = PolynomialObservable::new(
            2,
            1,
            bumps(&a, "q")?,
            random_c64_polynomial(&mut rng, 2, 3, 2),
        )?;
        worst = worst.max(factor_gap(&p, &q, &theory)?);
    }
    checks.push(Check::within(
        format!("antipodal heat-kernel bumps (width {BUMP_WIDTH}), 5 cases"),
        worst,
        config.tol(1e-6),
    ));
    Ok(checks)
}

/// Heat-kernel time of the bumps in the factorisation suite.
pub const BUMP_WIDTH: f64 = 0.12;

fn single<R: Rng>(f: SpectralForm, rng: &mut R) -> Result<PolynomialObservable> {
    PolynomialObservable::new(
        2,
        1,
        vec![LinearObservable::new(f, "b")],
        random_c64_polynomial(rng, 1, 3, 3),
    )
}

/// `max |dual(PQ) − dual(P) dual(Q)| / max |coefficient|`.
fn factor_gap(
    p: &PolynomialObservable,
    q: &PolynomialObservable,
    theory: &TheorySpec,
) -> Result<f64> {
    let whole = fourier_dual(&p.product_raw(q)?, theory)?.0;
    let parts = fourier_dual(p, theory)?
        .0
        .product_raw(&fourier_dual(q, theory)?.0)?;
    let gap = whole
        .max_term_diff(&parts)
        .ok_or_else(|| Error::Invalid("factorisation changed the generators".into()))?;
    Ok(gap / whole.terms().max_abs_coeff().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_table_matches_known_values() {
        let he = hermite_table(4);
        assert_eq!(he[4].coefficient(&[2]), exact(-6, 1));
        assert_eq!(he[3].coefficient(&[1]), exact(-3, 1));
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", &VerifyConfig::default()).is_err());
    }

    #[test]
    fn report_csv_has_one_row_per_check() {
        let r = run_suite("hermite", &VerifyConfig::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.to_csv(false).lines().count(), r.checks.len() + 1);
        assert!(!r.to_csv(false).contains("runtime"));
    }
}
