use std::fs;
use std::path::{Path, PathBuf};

use bvdual::json::{round_sig, Observable, ObservableJson, Precision, ResultRecord};
use bvdual::oracle::{
    expectation_isserlis, maxwell_expectation, moments_montecarlo, GaussianSpec, RNG_ALGORITHM,
};
use bvdual::verify::{run_suite, SuiteReport, VerifyConfig, SUITES};
use bvdual::wick::{expectation_diagrams, fourier_dual, inverse_fourier_dual};
use bvdual::wilson::{
    dual_exponential, expectation_exponential, inverse_dual_exponential, ExponentialObservable,
};
use bvdual::{
    LinearObservable, ModeTruncation, PolynomialObservable, SpectralForm, TheorySpec, Variant,
};
use log::{info, warn};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, EXIT_SEMANTIC};

pub fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_observable(path: &Path) -> CliResult<ObservableJson> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(&path.display().to_string(), e))
}

/// Theory from the config, else from the observable file; `lambda` overrides the mode cutoff.
fn resolve_theory(cfg: &RunConfig, file: &ObservableJson) -> CliResult<TheorySpec> {
    let mut t = cfg
        .theory
        .or_else(|| file.theory().copied())
        .ok_or_else(|| {
            CliError::usage("no theory: set [theory] in the config or \"theory\" in the observable")
        })?;
    if let Some(l) = cfg.lambda {
        t.cutoff = l;
    }
    t.validate().map_err(CliError::invalid_input)?;
    Ok(t)
}

/// Re-expresses a form under the theory's truncation (dropping modes above it).
fn align(f: &SpectralForm, trunc: ModeTruncation) -> CliResult<SpectralForm> {
    if f.truncation() == trunc {
        return Ok(f.clone());
    }
    f.project(trunc)
        .with_truncation(trunc)
        .map_err(CliError::invalid_input)
}

fn align_polynomial(
    p: &PolynomialObservable,
    trunc: ModeTruncation,
) -> CliResult<PolynomialObservable> {
    let gens = p
        .generators()
        .iter()
        .map(|g| {
            Ok(LinearObservable::new(
                align(&g.smearing, trunc)?,
                g.label.clone(),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    PolynomialObservable::new(p.dimension(), p.degree(), gens, p.terms().clone())
        .map_err(CliError::invalid_input)
}

fn load(path: &Path, cfg: &RunConfig) -> CliResult<(Observable, TheorySpec)> {
    let file = read_observable(path)?;
    let theory = resolve_theory(cfg, &file)?;
    let trunc = theory.truncation();
    let obs = match file.parse().map_err(CliError::invalid_input)? {
        Observable::Polynomial(p) => Observable::Polynomial(align_polynomial(&p, trunc)?),
        Observable::Exponential(e, pre) => Observable::Exponential(
            ExponentialObservable {
                smearing: align(&e.smearing, trunc)?,
                ..e
            },
            pre,
        ),
        Observable::Graded {
            fields,
            antifields,
            terms,
        } => Observable::Graded {
            fields: fields
                .iter()
                .map(|f| align(f, trunc))
                .collect::<CliResult<_>>()?,
            antifields: antifields
                .iter()
                .map(|f| align(f, trunc))
                .collect::<CliResult<_>>()?,
            terms,
        },
    };
    Ok((obs, theory))
}

fn record(theory: &TheorySpec, method: &str, value: bvdual::C64) -> ResultRecord {
    ResultRecord {
        value: value.into(),
        method: method.to_string(),
        tail_bound: 0.0,
        rounding_bound: None,
        standard_error: None,
        lattice_cutoff: None,
        sectors: None,
        mode_cutoff: theory.cutoff,
        samples: None,
        seed: None,
        rng: None,
        warning: None,
        theory: *theory,
    }
}

fn lattice_record(theory: &TheorySpec, e: bvdual::oracle::LatticeExpectation) -> ResultRecord {
    if let Some(w) = &e.warning {
        warn!("{w}");
    }
    ResultRecord {
        tail_bound: round_sig(e.tail_bound),
        rounding_bound: Some(round_sig(e.rounding_bound)),
        lattice_cutoff: Some(e.lattice_cutoff),
        sectors: Some(e.sectors),
        warning: e.warning,
        ..record(theory, "lattice", e.value)
    }
}

pub fn expect(cfg: &RunConfig, path: &Path) -> CliResult<ResultRecord> {
    let (obs, theory) = load(path, cfg)?;
    let closed = theory.variant == Variant::ClosedPForm;
    let p = match obs {
        Observable::Exponential(e, pre) => {
            let method =
                cfg.method
                    .as_deref()
                    .unwrap_or(if closed { "lattice" } else { "diagrams" });
            let ok = if closed {
                method == "lattice"
            } else {
                method == "diagrams"
            };
            if !ok {
                return Err(CliError::new(
                    "E_METHOD",
                    format!("method {method:?} does not apply to exponential observables in this theory"),
                    EXIT_SEMANTIC,
                ));
            }
            let mut r = expectation_exponential(&e, &theory, cfg.lattice_cutoff())?;
            if let Some(c) = pre {
                r.value *= c;
            }
            let mut rec = lattice_record(&theory, r);
            if !closed {
                rec = ResultRecord {
                    method: "diagrams".into(),
                    lattice_cutoff: None,
                    sectors: None,
                    ..rec
                };
            }
            return Ok(rec);
        }
        Observable::Polynomial(p) => p,
        Observable::Graded {
            fields,
            antifields,
            terms,
        } => {
            let frame = bvdual::json::graded_frame(&theory, &fields, &antifields)?;
            frame.to_polynomial(&terms)?
        }
    };
    let method = cfg
        .method
        .as_deref()
        .unwrap_or(if closed { "lattice" } else { "diagrams" });
    info!("expectation by {method} at cutoff {}", theory.cutoff);
    match method {
        "diagrams" => Ok(record(&theory, method, expectation_diagrams(&p, &theory)?)),
        "isserlis" => Ok(record(&theory, method, expectation_isserlis(&p, &theory)?)),
        "montecarlo" => {
            let g = GaussianSpec::for_observable(&p, &theory)?;
            let est = moments_montecarlo(p.terms(), &g, cfg.samples(), cfg.seed())?;
            Ok(ResultRecord {
                standard_error: Some(round_sig(est.standard_error)),
                samples: Some(est.samples),
                seed: Some(est.seed),
                rng: Some(RNG_ALGORITHM.to_string()),
                ..record(&theory, method, est.value)
            })
        }
        "lattice" => Ok(lattice_record(
            &theory,
            maxwell_expectation(&p, &theory, cfg.lattice_cutoff())?,
        )),
        other => Err(CliError::usage(format!(
            "unknown method {other:?} (expected diagrams, isserlis, montecarlo or lattice)"
        ))),
    }
}

fn transform(
    p: &PolynomialObservable,
    theory: &TheorySpec,
    inverse: bool,
) -> CliResult<(PolynomialObservable, TheorySpec)> {
    Ok(if inverse {
        inverse_fourier_dual(p, theory)?
    } else {
        fourier_dual(p, theory)?
    })
}

pub fn dualize(
    cfg: &RunConfig,
    path: &Path,
    inverse: bool,
    precision: Precision,
) -> CliResult<ObservableJson> {
    let (obs, theory) = load(path, cfg)?;
    match obs {
        Observable::Polynomial(p) if theory.variant == Variant::ClosedPForm => {
            let lift_path = cfg.lift.as_ref().ok_or_else(|| {
                CliError::new(
                    "E_NEEDS_LIFT",
                    "restriction to closed forms is not injective; give an all-forms lift with `lift` in the config",
                    EXIT_SEMANTIC,
                )
            })?;
            let all_forms = theory.with_variant(Variant::PForm)?;
            let lift = match read_observable(lift_path)?
                .parse()
                .map_err(CliError::invalid_input)?
            {
                Observable::Polynomial(l) => align_polynomial(&l, theory.truncation())?,
                _ => return Err(CliError::usage("the lift must be a polynomial observable")),
            };
            let restricted = lift.restrict_to_closed()?;
            let input = p.canonical()?;
            let scale = 1.0 + input.terms().max_abs_coeff();
            match restricted.max_term_diff(&input) {
                Some(d) if d <= 1e-9 * scale => {}
                _ => {
                    return Err(CliError::new(
                        "E_LIFT_MISMATCH",
                        "the lift does not restrict to the given observable",
                        EXIT_SEMANTIC,
                    ))
                }
            }
            let (d, dt) = transform(&lift, &all_forms, inverse)?;
            let dt = dt.with_variant(Variant::ClosedPForm)?;
            Ok(ObservableJson::from_polynomial(
                &d.restrict_to_closed()?,
                Some(dt),
                precision,
            ))
        }
        Observable::Polynomial(p) => {
            let (d, dt) = transform(&p, &theory, inverse)?;
            Ok(ObservableJson::from_polynomial(&d, Some(dt), precision))
        }
        Observable::Exponential(e, pre) => {
            let (f, d, dt) = if inverse {
                inverse_dual_exponential(&e, &theory)?
            } else {
                dual_exponential(&e, &theory)?
            };
            Ok(ObservableJson::from_exponential(
                &d,
                Some(pre.unwrap_or(bvdual::C64::new(1.0, 0.0)) * f),
                Some(dt),
                precision,
            ))
        }
        Observable::Graded { .. } => Err(CliError::usage(
            "graded observables cannot be dualised; dualise their field part",
        )),
    }
}

pub fn verify(cfg: &RunConfig, suite: &str, timings: bool) -> CliResult<i32> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(CliError::usage(format!(
            "unknown suite {suite:?}; expected one of {} or all",
            SUITES.join(", ")
        )));
    };
    let defaults = VerifyConfig::default();
    let vc = VerifyConfig {
        seed: cfg.seed.unwrap_or(defaults.seed),
        cutoff: cfg.lambda.unwrap_or(defaults.cutoff),
        lattice_cutoff: cfg.lattice_cutoff.unwrap_or(defaults.lattice_cutoff),
        samples: cfg.samples.unwrap_or(defaults.samples),
        tolerance: cfg.tolerance,
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for name in names {
        info!("running suite {name}");
        let mut r = run_suite(name, &vc)?;
        if !timings {
            r.runtime_seconds = None;
        }
        reports.push(r);
    }
    let mut csv = String::new();
    for (i, r) in reports.iter().enumerate() {
        let body = r.to_csv(timings);
        csv.push_str(if i == 0 {
            &body
        } else {
            body.split_once('\n').map_or("", |x| x.1)
        });
    }
    match &cfg.out {
        Some(p) => {
            fs::write(p, bvdual::json::to_canonical_string(&reports)?)
                .map_err(|e| CliError::io(p, e))?;
            let csv_path = p.with_extension("csv");
            fs::write(&csv_path, &csv).map_err(|e| CliError::io(&csv_path, e))?;
            print!("{csv}");
        }
        None => print!("{csv}"),
    }
    Ok(if reports.iter().all(|r| r.passed) {
        0
    } else {
        1
    })
}
