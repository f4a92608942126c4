//! Acceptance suite: one PASS/FAIL line per criterion, with wall time.
//!
//! Runs without the libtest harness. The process fails when a criterion
//! fails unless it is listed in `KNOWN_FAILURES`, which covers the cells
//! that depend on unknown reference seeds at the fixed master seed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use geodesic_bench::BenchError;
use geodesic_bench::checks::{CheckConfig, ONE_STEP_TOL, one_step_mle_error, run_checks};
use geodesic_bench::experiments::{
    BtConfig, BtMethod, CategoricalKlConfig, KlObjective, MixtureConfig, MixtureMethod, RunOutcome, ViConfig,
    run_bradley_terry, run_categorical_kl, run_mixture_mle, run_vi_mlr,
};
use geodesic_bench::table::mean_std;
use geodesic_core::optimizers::Connection;
use geodesic_core::varinf::ViMethod;

const KNOWN_FAILURES: &[(u32, &str)] = &[
    (
        6,
        "mixture counts at 1.5/N and exponentiated gradient on the second case vary across seeds by more than the band",
    ),
    (
        7,
        "at small prior precision the e-geodesic advantage is below the 20-trial noise",
    ),
];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict, BenchError> {
    Ok(Verdict { passed, detail })
}

fn iteration_mean(outcomes: &[&RunOutcome]) -> Option<(f64, f64)> {
    let its: Option<Vec<f64>> = outcomes.iter().map(|o| o.iterations().map(|k| k as f64)).collect();
    its.filter(|v| !v.is_empty()).map(|v| mean_std(&v))
}

fn show(ms: Option<(f64, f64)>) -> String {
    ms.map_or("failed runs".to_owned(), |(m, s)| format!("{m:.2} ± {s:.2}"))
}

fn one_step_suite() -> Result<Verdict, BenchError> {
    let result = run_categorical_kl(&CategoricalKlConfig::default())?;
    let mut notes = Vec::new();
    let mut passed = true;
    for (objective, connection) in [
        (KlObjective::Forward, Connection::M),
        (KlObjective::Backward, Connection::E),
    ] {
        let runs: Vec<_> = result.runs_of(objective, connection).collect();
        let all_one = runs.iter().all(|r| r.outcome == RunOutcome::Converged(1));
        let worst = runs.iter().map(|r| r.landing_error).fold(0.0f64, f64::max);
        passed &= runs.len() == 100 && all_one && worst < 1e-10;
        notes.push(format!(
            "{} {connection:?}: all 1 iteration = {all_one}, max landing error {worst:.1e}",
            objective.label()
        ));
    }
    verdict(passed, notes.join("; "))
}

fn one_step_mle() -> Result<Verdict, BenchError> {
    let err = one_step_mle_error(0, 50)?;
    verdict(
        err < ONE_STEP_TOL,
        format!("50 datasets, max |eta - frequencies| = {err:.2e}"),
    )
}

fn stochastic_kl() -> Result<Verdict, BenchError> {
    let result = run_categorical_kl(&CategoricalKlConfig::default())?;
    let mean = |o, c| {
        let runs: Vec<&RunOutcome> = result.runs_of(o, c).map(|r| &r.outcome).collect();
        iteration_mean(&runs)
    };
    let f_e = mean(KlObjective::Forward, Connection::E);
    let h_m = mean(KlObjective::Backward, Connection::M);
    let ok = matches!(f_e, Some((m, _)) if (3.0..=4.5).contains(&m))
        && matches!(h_m, Some((m, _)) if (3.2..=4.6).contains(&m));
    verdict(ok, format!("f/e-geodesic {}, h/m-geodesic {}", show(f_e), show(h_m)))
}

fn bt_small() -> Result<Verdict, BenchError> {
    let result = run_bradley_terry(&BtConfig::small())?;
    let one = |method, lr| result.outcomes(method, lr).next().cloned();
    let mm = one(BtMethod::Mm, None);
    let eg_small = one(BtMethod::ExponentiatedGradient, Some(0.01));
    let geo_small = one(BtMethod::EGeodesic, Some(0.01));
    let eg_one = one(BtMethod::ExponentiatedGradient, Some(1.0));
    let geo_one = one(BtMethod::EGeodesic, Some(1.0));
    let near = |o: &Option<RunOutcome>, target: usize, tol: usize| {
        o.as_ref()
            .and_then(RunOutcome::iterations)
            .is_some_and(|k| k.abs_diff(target) <= tol)
    };
    let ok = near(&mm, 20, 0)
        && near(&geo_one, 4, 1)
        && near(&eg_small, 84, 2)
        && near(&geo_small, 1468, 30)
        && matches!(eg_one, Some(RunOutcome::Overflow(_)));
    let label = |o: &Option<RunOutcome>| o.as_ref().map_or("missing".to_owned(), RunOutcome::label);
    verdict(
        ok,
        format!(
            "MM {}, lr=0.01: expgrad {} e-geodesic {}, lr=1: expgrad {} e-geodesic {}",
            label(&mm),
            label(&eg_small),
            label(&geo_small),
            label(&eg_one),
            label(&geo_one)
        ),
    )
}

fn bt_large() -> Result<Verdict, BenchError> {
    let result = run_bradley_terry(&BtConfig::large())?;
    let mm: Vec<&RunOutcome> = result.outcomes(BtMethod::Mm, None).collect();
    let geo: Vec<&RunOutcome> = result.outcomes(BtMethod::EGeodesic, Some(1.0)).collect();
    let (mm, geo) = (iteration_mean(&mm), iteration_mean(&geo));
    let ok = matches!(mm, Some((m, _)) if (43.0..=50.0).contains(&m))
        && matches!(geo, Some((m, _)) if (2.5..=3.7).contains(&m));
    verdict(ok, format!("100 instances: MM {}, e-geodesic {}", show(mm), show(geo)))
}

fn mixture() -> Result<Verdict, BenchError> {
    let result = run_mixture_mle(&MixtureConfig::default())?;
    // per case: exponentiated gradient, m-geodesic, e-geodesic at 0.5/N, 1/N, 1.5/N
    let reference: [[[usize; 3]; 3]; 3] = [
        [[89, 40, 24], [25, 5, 22], [27, 5, 23]],
        [[82, 37, 21], [27, 9, 49], [28, 9, 47]],
        [[92, 41, 23], [29, 8, 41], [29, 8, 39]],
    ];
    let extra_reference: [[usize; 6]; 3] = [
        [22, 20, 18, 17, 17, 20],
        [19, 17, 16, 16, 19, 23],
        [21, 19, 24, 31, 40, 57],
    ];
    let mults = [0.5, 1.0, 1.5];
    let extra = [1.6, 1.7, 1.8, 1.9, 2.0, 2.1];
    let mut misses = Vec::new();
    let mut ordering = true;
    let count = |case, method, mult| result.get(case, method, mult).and_then(RunOutcome::iterations);
    for case in 0..3 {
        for (m_idx, method) in MixtureMethod::ALL.into_iter().enumerate() {
            for (l_idx, &mult) in mults.iter().enumerate() {
                let want = reference[case][m_idx][l_idx];
                let got = count(case, method, mult);
                let ok = match (method, got) {
                    (_, None) => false,
                    (MixtureMethod::ExponentiatedGradient, Some(k)) => {
                        (k as f64 - want as f64).abs() <= 0.15 * want as f64
                    }
                    (_, Some(k)) => k.abs_diff(want) <= 3,
                };
                if !ok {
                    misses.push(format!(
                        "case {} {} {mult}/N: {} vs {want}",
                        case + 1,
                        method.label(),
                        shown(got)
                    ));
                }
            }
            if method != MixtureMethod::ExponentiatedGradient {
                let c: Vec<Option<usize>> = mults.iter().map(|&m| count(case, method, m)).collect();
                ordering &= matches!(c[..], [Some(a), Some(b), Some(d)] if b < a && b < d);
            }
        }
        for (l_idx, &mult) in extra.iter().enumerate() {
            let want = extra_reference[case][l_idx];
            let got = count(case, MixtureMethod::ExponentiatedGradient, mult);
            if !got.is_some_and(|k| (k as f64 - want as f64).abs() <= 0.15 * want as f64) {
                misses.push(format!("case {} expgrad {mult}/N: {} vs {want}", case + 1, shown(got)));
            }
        }
    }
    let detail = format!(
        "1/N fastest for both geodesic methods in every case: {ordering}; {} cells outside band{}{}",
        misses.len(),
        if misses.is_empty() { "" } else { ": " },
        misses.join(", ")
    );
    verdict(ordering && misses.is_empty(), detail)
}

fn shown(k: Option<usize>) -> String {
    k.map_or("failed".to_owned(), |k| k.to_string())
}

fn vi() -> Result<Verdict, BenchError> {
    let cfg = ViConfig {
        lrs: vec![1.0],
        ..ViConfig::default()
    };
    let result = run_vi_mlr(&cfg)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for &lambda in &cfg.lambdas {
        let test = |m| result.mean_accuracy(lambda, 1.0, m).map(|a| a.1);
        let (g, e, m) = (
            test(ViMethod::Gradient),
            test(ViMethod::EGeodesic),
            test(ViMethod::MGeodesic),
        );
        let best = matches!((g, e, m), (Some(g), Some(e), Some(m)) if e > g && e > m);
        let fmt = |v: Option<f64>| v.map_or("n/a".to_owned(), |v| format!("{v:.4}"));
        notes.push(format!(
            "lambda={lambda}: e {} grad {} m {} e-best={best}",
            fmt(e),
            fmt(g),
            fmt(m)
        ));
        ok &= best;
    }
    let band = result.mean_accuracy(1.0, 1.0, ViMethod::EGeodesic).map(|a| a.1);
    let band_ok = band.is_some_and(|a| a >= 0.70);
    notes.push(format!("e-geodesic test accuracy at lambda=1 >= 0.70: {band_ok}"));
    verdict(ok && band_ok, notes.join("; "))
}

fn property_suites() -> Result<Verdict, BenchError> {
    let report = run_checks(&CheckConfig::default());
    let failed: Vec<String> = report
        .failures()
        .map(|f| format!("{} ({})", f.name, f.detail))
        .collect();
    verdict(
        report.all_passed(),
        format!("{} suites, failed: [{}]", report.results.len(), failed.join(", ")),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Verdict, BenchError>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            1,
            "one-step landing for f/m and h/e",
            Duration::from_secs(1),
            one_step_suite,
        ),
        (
            2,
            "one m-step with t=1/N gives the categorical MLE",
            Duration::from_secs(1),
            one_step_mle,
        ),
        (3, "stochastic categorical cells", Duration::from_secs(1), stochastic_kl),
        (4, "Bradley-Terry small instance", Duration::from_secs(1), bt_small),
        (5, "Bradley-Terry N=100", Duration::from_secs(30), bt_large),
        (6, "mixture iteration counts", Duration::from_secs(30), mixture),
        (7, "variational inference accuracy", Duration::from_secs(600), vi),
        (8, "property suites", Duration::from_secs(60), property_suites),
    ];
    let mut unexpected = Vec::new();
    for (id, name, limit, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed && elapsed < limit, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
        println!(
            "{} criterion {id} ({name}) [{timing}]: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        match (passed, KNOWN_FAILURES.iter().find(|(k, _)| *k == id)) {
            (false, Some((_, why))) => println!("     known failure: {why}"),
            (false, None) => unexpected.push(id),
            (true, Some(_)) => println!("     listed as a known failure but passed"),
            (true, None) => {}
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
