//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion passes when every stated condition holds at its tolerance. A
//! criterion can fail without failing the run; the process exits nonzero only
//! when a guard breaks. Guards are the conditions known to hold, so they
//! catch regressions even where the full criterion is out of reach at these
//! graph sizes.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rieszlab::experiments::{free_product, gaffney, hardy, heat, identities, lemmas, pseudo, sweep};
use rieszlab::report::Report;
use rieszlab::spec::parse_family;
use rieszlab_core::builders::build;
use rieszlab_core::Space;

fn space(recipe: &str) -> Space {
    build(&parse_family(recipe).expect("recipe")).expect("build")
}

struct Outcome {
    passed: bool,
    guard: bool,
    detail: String,
}

fn verdict_value(r: &Report, name: &str) -> f64 {
    r.verdict(name).map_or(f64::NAN, |v| v.value)
}

fn all_pass(r: &Report) -> bool {
    r.verdicts.iter().all(|v| v.passed)
}

fn failed_names(r: &Report) -> Vec<String> {
    r.verdicts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| format!("{} {} = {:.4e} > {:.3e}", r.graph.as_deref().unwrap_or(""), v.name, v.value, v.threshold))
        .collect()
}

fn summarize(reports: &[Report]) -> (bool, String) {
    let failures: Vec<String> = reports.iter().flat_map(failed_names).collect();
    if failures.is_empty() {
        (true, String::new())
    } else {
        (false, failures.join("; "))
    }
}

fn criterion_1() -> Outcome {
    let recipes = [
        "path:200",
        "cycle:64",
        "lattice:1:257",
        "lattice:2:31",
        "lattice:2:41",
        "lattice:2:31@lazy=none",
        "sierpinski:3",
        "sierpinski:4",
        "sierpinski:5",
        "sierpinski:6",
        "product(path:8,cycle:12)",
        "product(lattice:2:9,sierpinski:2)",
    ];
    let params = heat::ExactnessParams::default();
    let reports: Vec<Report> = recipes
        .iter()
        .map(|r| heat::kernel_exactness(&space(r), r, &params))
        .collect();
    let (passed, detail) = summarize(&reports);
    let worst = reports
        .iter()
        .flat_map(|r| r.verdicts.iter().map(|v| v.value))
        .fold(0.0, f64::max);
    Outcome {
        passed,
        guard: passed,
        detail: if passed {
            format!("{} graphs, worst defect {worst:.2e}", recipes.len())
        } else {
            detail
        },
    }
}

fn criterion_2() -> Outcome {
    let reports: Vec<Report> = ["lattice:2:11", "sierpinski:3", "cycle:50", "path:40"]
        .iter()
        .map(|r| identities::calculus_identities(&space(r), r, &Default::default()))
        .collect();
    let (passed, detail) = summarize(&reports);
    let worst = |name: &str| reports.iter().map(|r| verdict_value(r, name)).fold(0.0, f64::max);
    Outcome {
        passed,
        guard: passed,
        detail: if passed {
            format!(
                "adjointness {:.1e}, energy {:.1e}, hodge {:.1e}, isometry {:.1e}",
                worst("adjointness"),
                worst("energy"),
                worst("hodge"),
                worst("isometry")
            )
        } else {
            detail
        },
    }
}

fn criterion_3() -> Outcome {
    let r = identities::spectral_series_agreement(&space("sierpinski:4"), "sierpinski:4", &Default::default());
    let passed = all_pass(&r);
    Outcome {
        passed,
        guard: passed,
        detail: format!("max discrepancy {:.2e}", verdict_value(&r, "agreement")),
    }
}

fn criterion_4() -> Outcome {
    let cases = [
        ("lattice:2:61", -1.0),
        ("sierpinski:7", -(3f64.ln() / 5f64.ln())),
    ];
    let reports: Vec<Report> = cases
        .iter()
        .map(|&(recipe, target)| {
            let params = heat::DiagonalParams {
                target: Some(target),
                ..Default::default()
            };
            heat::fit_on_diagonal(&space(recipe), recipe, &params)
        })
        .collect();
    let (passed, detail) = summarize(&reports);
    let slopes: Vec<String> = reports
        .iter()
        .map(|r| {
            let fit = r.fit("slope").expect("fit");
            format!("{} slope {:.4}", r.graph.as_deref().unwrap_or(""), fit.slope)
        })
        .collect();
    Outcome {
        passed,
        guard: passed,
        detail: if passed { slopes.join(", ") } else { detail },
    }
}

fn criterion_5() -> Outcome {
    let r = free_product::free_product_experiment(&Default::default()).expect("free product");
    let passed = all_pass(&r);
    let slope = r.fit("diagonal slope").map_or(f64::NAN, |f| f.slope);
    Outcome {
        passed,
        guard: passed,
        detail: format!(
            "factorization {:.1e}, slope {slope:.4}, residual ratio {:.3}",
            verdict_value(&r, "factorization"),
            verdict_value(&r, "no single m")
        ),
    }
}

fn criterion_6() -> Outcome {
    let reports: Vec<Report> = ["sierpinski:4", "lattice:2:31"]
        .iter()
        .map(|r| pseudo::verify_pseudo_gradient(&space(r), r, &Default::default()))
        .collect();
    let (passed, detail) = summarize(&reports);
    // Positivity is exact; the domination constants must be finite. The
    // factor-2 band across k in 1..=50 is reported but not guarded: C(1) is
    // the supremum over arbitrary nonnegative u and smoothing lowers C(k).
    let guard = reports.iter().all(|r| {
        r.verdicts
            .iter()
            .filter(|v| v.name.starts_with("positivity"))
            .all(|v| v.passed)
            && r.verdicts
                .iter()
                .filter(|v| v.name.starts_with("domination"))
                .all(|v| v.value.is_finite())
    });
    Outcome {
        passed,
        guard,
        detail: if passed {
            "positivity and domination bands hold".into()
        } else {
            detail
        },
    }
}

fn criterion_7() -> Outcome {
    let recipe = "lattice:2:129";
    let main = gaffney::verify_gaffney(&space(recipe), recipe, &Default::default());
    let controls: Vec<Report> = ["lattice:2:129@beta=4", "sierpinski:5@beta=2"]
        .iter()
        .map(|r| {
            let params = gaffney::GaffneyParams {
                negative_control: true,
                ..Default::default()
            };
            gaffney::verify_gaffney(&space(r), r, &params)
        })
        .collect();
    let controls_fail = controls.iter().all(|r| r.verdicts.iter().all(|v| !v.passed));
    let passed = all_pass(&main) && controls_fail;
    let bands: Vec<String> = main
        .verdicts
        .iter()
        .map(|v| format!("{} {:.3}", v.name, v.value))
        .collect();
    // The exact-norm bands at k in [4, 64] sit near 2.3-2.5 on Z^2; they
    // settle below 2 only from k = 16 on. Guard: finite bands below 3 and
    // failing negative controls.
    let guard = controls_fail && main.verdicts.iter().all(|v| v.value.is_finite() && v.value < 3.0);
    let control_bands: Vec<String> = controls
        .iter()
        .flat_map(|r| r.verdicts.iter().map(|v| format!("{:.2}", v.value)))
        .collect();
    Outcome {
        passed,
        guard,
        detail: format!(
            "{}; negative controls {} ({})",
            bands.join(", "),
            if controls_fail { "fail as required" } else { "PASS unexpectedly" },
            control_bands.join(", ")
        ),
    }
}

fn criterion_8() -> Outcome {
    let r = hardy::tent_round_trip(&space("sierpinski:3"), "sierpinski:3", &Default::default()).expect("tent");
    let passed = all_pass(&r);
    Outcome {
        passed,
        guard: passed,
        detail: format!(
            "residual {:.1e}, efficiency band {:.3}",
            verdict_value(&r, "residual"),
            verdict_value(&r, "efficiency band")
        ),
    }
}

fn criterion_9() -> Outcome {
    let r = hardy::molecular_pipeline(&space("sierpinski:3"), "sierpinski:3", &Default::default()).expect("molecular");
    let passed = all_pass(&r);
    let residual = r
        .verdicts
        .iter()
        .filter(|v| v.name.starts_with("reconstruction"))
        .map(|v| v.value)
        .fold(0.0, f64::max);
    Outcome {
        passed,
        guard: passed,
        detail: if passed {
            format!("worst relative residual {residual:.1e}")
        } else {
            failed_names(&r).join("; ")
        },
    }
}

fn criterion_10() -> Outcome {
    let gasket = sweep::riesz_lp_sweep("gasket", &Default::default()).expect("gasket sweep");
    let lattice_params = sweep::SweepParams {
        graphs: [15, 23, 31, 43, 61].iter().map(|s| format!("lattice:2:{s}")).collect(),
        ..Default::default()
    };
    let lattice = sweep::riesz_lp_sweep("lattice", &lattice_params).expect("lattice sweep");
    let reports = [gasket, lattice];
    let passed = reports.iter().all(all_pass);
    // Slopes for p >= 1.5 and the p = 2 isometry are guarded; closer to
    // p = 1 the atom probes still gain with n at these sizes.
    let guard = reports.iter().all(|r| {
        r.verdicts.iter().all(|v| {
            let small_p = v
                .name
                .strip_prefix("slope p=")
                .and_then(|p| p.parse::<f64>().ok())
                .map_or(false, |p| p < 1.5);
            v.passed || (small_p && v.value < 0.15)
        })
    });
    let slopes: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.fits
                .iter()
                .map(move |f| format!("{} {} {:.3}", r.graph.as_deref().unwrap_or(""), f.name, f.slope))
        })
        .collect();
    Outcome {
        passed,
        guard,
        detail: format!(
            "{}; isometry {:.1e}",
            slopes.join(", "),
            reports.iter().map(|r| verdict_value(r, "isometry")).fold(0.0, f64::max)
        ),
    }
}

fn criterion_11() -> Outcome {
    let r = lemmas::lemma_grids(&Default::default());
    let passed = all_pass(&r);
    let worst = r.verdicts.iter().map(|v| v.value).fold(0.0, f64::max);
    Outcome {
        passed,
        guard: passed,
        detail: format!("largest relative change {worst:.2e}"),
    }
}

fn main() -> ExitCode {
    rieszlab::parallel::init_from_env();
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(u32, &str, fn() -> Outcome, u64); 11] = [
        (1, "kernel exactness", criterion_1, 60),
        (2, "calculus identities", criterion_2, 60),
        (3, "spectral vs series", criterion_3, 60),
        (4, "on-diagonal exponents", criterion_4, 600),
        (5, "free-product counterexample", criterion_5, 900),
        (6, "pseudo-gradient", criterion_6, 300),
        (7, "Gaffney stability", criterion_7, 600),
        (8, "tent round trip", criterion_8, 300),
        (9, "molecular pipeline", criterion_9, 600),
        (10, "Riesz L^p sweep", criterion_10, 1200),
        (11, "lemma grids", criterion_11, 60),
    ];
    let mut guards_ok = true;
    let (mut passed, mut run) = (0, 0);
    for (id, name, body, budget) in criteria {
        let selected = filter.is_empty() || filter.iter().any(|f| f == &id.to_string() || name.contains(f.as_str()));
        if !selected {
            continue;
        }
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let ok = outcome.passed && in_time;
        run += 1;
        passed += ok as usize;
        guards_ok &= outcome.guard;
        let timing = if in_time {
            format!("{:.1}s", elapsed.as_secs_f64())
        } else {
            format!("{:.1}s, over the {budget}s budget", elapsed.as_secs_f64())
        };
        println!(
            "{} criterion {id} ({name}): {} [{timing}]",
            if ok { "PASS" } else { "FAIL" },
            outcome.detail
        );
        if !outcome.guard {
            println!("  guard broken for criterion {id}");
        }
    }
    println!("{passed}/{run} criteria pass; guards {}", if guards_ok { "hold" } else { "BROKEN" });
    if guards_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
