//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p collapse-lab --test acceptance`. Campaign sizes,
//! tolerances and runtime budgets are fixed here and are not configurable.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use collapse_lab_core::campaign::{
    dilation_campaign, min_disturbance_campaign, outcome_frequency, p4_equivalence_campaign, repeatability_campaign,
    unit_operator_campaign, InstanceSpec, StateSpec,
};
use collapse_lab_core::commutant::{p4_conjecture_scan, p4_scan_trial};
use collapse_lab_core::dilation::rank_invariance_demo;
use collapse_lab_core::operator::{max_abs_diff, ComplexMatrix};
use collapse_lab_core::rules::{luders_nonselective, luders_selective, vn_nonselective, SelectiveRule};
use collapse_lab_core::seed::rng_from_seed;
use collapse_lab_core::states::{born, projector_family};
use collapse_lab_core::{Observable, PureState};
use num_complex::Complex64;

const MASTER_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn real_matrix(n: usize, rows: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(n, n, rows.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn criterion_1() -> Outcome {
    let obs = Observable::diagonal(&[1.0, 1.0, 2.0]);
    let fam = projector_family(&obs).unwrap();
    let psi = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();

    // hand-derived values
    let third = 1.0 / 3.0;
    let born_want = [(1.0, 2.0 / 3.0), (2.0, third)];
    let selective_want = real_matrix(3, &[0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
    let luders_want = real_matrix(3, &[third, third, 0.0, third, third, 0.0, 0.0, 0.0, third]);
    let vn_want = real_matrix(3, &[third, 0.0, 0.0, 0.0, third, 0.0, 0.0, 0.0, third]);

    let b = born(&psi, &fam).unwrap();
    let mut dev: f64 = 0.0;
    for ((a, p), (wa, wp)) in b.outcomes.iter().zip(born_want) {
        dev = dev.max((a - wa).abs()).max((p - wp).abs());
    }
    dev = dev.max(max_abs_diff(
        luders_selective(&psi, &fam, 1.0).unwrap().matrix(),
        &selective_want,
    ));
    dev = dev.max(max_abs_diff(
        luders_nonselective(&psi, &fam).unwrap().matrix(),
        &luders_want,
    ));
    dev = dev.max(max_abs_diff(vn_nonselective(&psi, &fam).unwrap().matrix(), &vn_want));
    Outcome {
        pass: dev <= 1e-10,
        detail: format!("max deviation from hand-derived values {dev:.2e} (tol 1e-10)"),
    }
}

fn criterion_2() -> Outcome {
    let dims: Vec<usize> = (2..=16).collect();
    let r = unit_operator_campaign(&dims, 1000, MASTER_SEED, 1e-12).unwrap();
    Outcome {
        pass: r.max_luders_dev <= 1e-12 && r.max_vn_dev <= 1e-12,
        detail: format!(
            "{} states, dims 2-16: Lüders change {:.2e}, vN distance from I/n {:.2e} (tol 1e-12)",
            r.trials, r.max_luders_dev, r.max_vn_dev
        ),
    }
}

fn criterion_3() -> Outcome {
    let spec = InstanceSpec {
        state: StateSpec::RandomPure,
        require_degenerate: true,
        ..InstanceSpec::random((2..=16).collect())
    };
    let r = min_disturbance_campaign(&spec, 1000, 1000, None, MASTER_SEED, 1e-10).unwrap();
    Outcome {
        pass: r.max_excess <= 1e-10 && r.max_fidelity_gap <= 1e-10 && r.failures.is_empty(),
        detail: format!(
            "{} triples x {} probes: max probe excess {:.2e}, max |F* - <psi|P|psi>| {:.2e} (tol 1e-10)",
            r.trials, r.probes, r.max_excess, r.max_fidelity_gap
        ),
    }
}

fn criterion_4() -> Outcome {
    let spec = InstanceSpec::random((2..=16).collect());
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, rule) in [SelectiveRule::Luders, SelectiveRule::Vn].into_iter().enumerate() {
        let r = repeatability_campaign(&spec, 10_000, rule, MASTER_SEED + i as u64, 1e-9).unwrap();
        pass &= r.agreement_fraction == 1.0 && r.max_leak <= 1e-9;
        parts.push(format!(
            "{:?}: agreement {}/{}, max leak {:.2e}",
            rule, r.agreements, r.trajectories, r.max_leak
        ));
    }
    Outcome {
        pass,
        detail: format!("{} (tol 1e-9)", parts.join("; ")),
    }
}

fn criterion_5() -> Outcome {
    let spec = InstanceSpec::random((2..=16).collect());
    let r = p4_equivalence_campaign(&spec, 10_000, MASTER_SEED, 1e-10).unwrap();
    Outcome {
        pass: r.max_luders_dev <= 1e-10 && r.max_oracle_dev <= 1e-8 && r.dimension_mismatches == 0,
        detail: format!(
            "{} pairs, dims 2-16: |P4 - Lüders| {:.2e} (tol 1e-10), |blocks - oracle| {:.2e} (tol 1e-8), {} commutant dimension mismatches",
            r.trials, r.max_luders_dev, r.max_oracle_dev, r.dimension_mismatches
        ),
    }
}

fn criterion_6() -> Outcome {
    let dims: Vec<usize> = (2..=16).collect();
    // 667 per dimension gives 10 005 trials over the 15 dimensions
    let r = p4_conjecture_scan(&dims, 667, MASTER_SEED).unwrap();
    let reproducible = r.counterexamples.iter().all(|c| {
        p4_scan_trial(c.dim, c.seed)
            .map(|t| t.violation() == c.violation)
            .unwrap_or(false)
    });
    let again = p4_conjecture_scan(&dims[..2], 50, MASTER_SEED).unwrap()
        == p4_conjecture_scan(&dims[..2], 50, MASTER_SEED).unwrap();
    Outcome {
        pass: r.counterexamples.is_empty() && reproducible && again,
        detail: format!(
            "{} trials: {} counterexamples above 1e-8, worst min eigenvalue {:.2e}, worst |tr - 1| {:.2e}",
            r.trials,
            r.counterexamples.len(),
            r.worst_min_eigenvalue,
            r.worst_trace_dev
        ),
    }
}

fn criterion_7() -> Outcome {
    let spec = InstanceSpec::random((2..=8).collect());
    let r = dilation_campaign(&spec, 1000, MASTER_SEED, 1e-9).unwrap();
    Outcome {
        pass: r.checks().iter().all(|c| c.pass),
        detail: format!(
            "{} pairs, dims 2-8: |dilated - Lüders| {:.2e} (tol 1e-9), |pointer - Born| {:.2e} (tol 1e-10), unitarity defect {:.2e}, global purity change {:.2e}",
            r.trials, r.max_luders_dev, r.max_born_dev, r.max_unitarity_defect, r.max_global_purity_dev
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED);
    let rho = PureState::random(2, &mut rng).density();
    let r = rank_invariance_demo(&rho, 100, &mut rng).unwrap();
    Outcome {
        pass: r.passed(1e-9),
        detail: format!(
            "{} conjugations: spectrum drift {:.2e} (tol 1e-9), ranks preserved {}; sigma_z dilation rank {:?}",
            r.trials, r.max_spectrum_dev, r.ranks_preserved, r.witness_ranks
        ),
    }
}

fn criterion_9() -> Outcome {
    let plus = PureState::from_real(&[1.0, 1.0]).unwrap().density();
    let fam = projector_family(&Observable::diagonal(&[1.0, -1.0])).unwrap();
    let r = outcome_frequency(&plus, &fam, 1.0, 100_000, MASTER_SEED).unwrap();
    Outcome {
        pass: (r.frequency - 0.5).abs() <= 0.005,
        detail: format!(
            "{} of {} samples gave +1, frequency {:.5} (0.5 +/- 0.005)",
            r.hits, r.samples, r.frequency
        ),
    }
}

fn criterion_10() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let dir = tempfile::tempdir().unwrap();
    let campaigns: [&[&str]; 7] = [
        &[
            "measure",
            "--input",
            "sigma_z.json",
            "--input",
            "plus.json",
            "--seed",
            "42",
        ],
        &["measure", "--gen", "mults=2:1:1,rank=2", "--rule", "vn", "--seed", "5"],
        &["compare-rules", "--gen", "dim=5", "--trials", "200", "--seed", "6"],
        &["p4-scan", "--dims", "2-8", "--trials", "300", "--seed", "7"],
        &["dilation-check", "--trials", "200", "--seed", "8"],
        &["min-disturbance", "--trials", "100", "--probes", "100", "--seed", "9"],
        &["repeatability", "--trials", "500", "--seed", "10"],
    ];
    let lab = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_collapse-lab"))
            .args(args)
            .current_dir(&data)
            .output()
            .expect("binary runs")
    };
    let mut mismatched = Vec::new();
    for (i, args) in campaigns.iter().enumerate() {
        let first = dir.path().join(format!("{i}-first.json"));
        let second = dir.path().join(format!("{i}-second.json"));
        let mut a = args.to_vec();
        a.extend(["--out", first.to_str().unwrap()]);
        let ok_first = lab(&a).status.code() == Some(0);
        let rerun = lab(&[
            "rerun",
            "--config",
            first.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ]);
        let same = std::fs::read(&first)
            .ok()
            .is_some_and(|f| std::fs::read(&second).ok() == Some(f));
        if !(ok_first && rerun.status.code() == Some(0) && same) {
            mismatched.push(args[0]);
        }
    }
    Outcome {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!(
                "{} campaigns rerun from their echoed configs, all byte-identical",
                campaigns.len()
            )
        } else {
            format!("not reproduced: {mismatched:?}")
        },
    }
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 10] = [
        (1, "worked degenerate example", criterion_1, secs(1)),
        (2, "unit-operator critique", criterion_2, secs(10)),
        (3, "minimal disturbance", criterion_3, secs(60)),
        (4, "repeatability", criterion_4, secs(30)),
        (5, "commutant projection equals Lüders", criterion_5, secs(300)),
        (6, "commutant projection positivity scan", criterion_6, secs(300)),
        (7, "dilation theorem", criterion_7, secs(120)),
        (8, "rank argument", criterion_8, secs(10)),
        (9, "sampling frequency", criterion_9, secs(10)),
        (10, "report reproducibility", criterion_10, Duration::MAX),
    ];
    let mut failed = 0;
    for (id, name, f, budget) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        failed += usize::from(!pass);
        let limit = if budget == Duration::MAX {
            String::new()
        } else {
            format!(
                " (budget {} s{})",
                budget.as_secs(),
                if in_time { "" } else { ", EXCEEDED" }
            )
        };
        println!(
            "criterion {id:>2} {}: {name}: {}; {:.2} s{limit}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
