//! Self-contained property suites behind `bellwigner check`. Seeds are
//! fixed, so a run either passes forever or fails forever on a given
//! build.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use bellwigner_core::extended::{
    bell_margin_extended, compose_from_conditionals, compositions_count, detection_sum_margin,
    enumerate_simplex, for_each_composition, marginal_conditional, ConditionalPairTable,
    EnumerationMode, ExtendedTripleDistribution,
};
use bellwigner_core::feasibility::{
    analyze_pairs, apply_system, reduce_system, solution_family, verify_reduction, MarginalVector,
};
use bellwigner_core::inequality::{bell_wigner_decomposition, generalized_q_margin, scan_grid};
use bellwigner_core::quantum::{
    expected_product, pair_distribution, single_marginal, AngleConfig, Convention, Correlation,
    HiddenPoint, HiddenVariableModel, Pair, Side, Sign,
};
use bellwigner_core::simulation::{
    configuration_probabilities, estimate_all, estimator_bell_check, simulate_counts, Assignment,
    CountTable, Normalization, TrialConfig,
};
use bellwigner_core::{ratio, tol, Rational};

use crate::Suite;

type Check = (&'static str, fn() -> Result<(), String>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($arg)+)),
        }
    };
}

fn random_pairs(rng: &mut ChaCha12Rng) -> [bellwigner_core::quantum::PairDistribution; 3] {
    let config = AngleConfig::photon(
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.0..2.0 * PI),
    );
    [
        pair_distribution(&config, 1, 2).unwrap(),
        pair_distribution(&config, 1, 3).unwrap(),
        pair_distribution(&config, 2, 3).unwrap(),
    ]
}

fn quantum_normalization() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for _ in 0..2_000 {
        let [d12, _, _] = random_pairs(&mut rng);
        let sum: f64 = d12.entries().iter().sum();
        ensure!((sum - 1.0).abs() <= tol::PROB_IDENTITY, "sum {sum} != 1");
        for z in Sign::BOTH {
            ensure!(
                (d12.prob(z, z) - d12.prob(z.flip(), z.flip())).abs() <= tol::PROB_IDENTITY,
                "agreement symmetry broken"
            );
            ensure!(
                (d12.prob(z, z) - (0.5 - d12.prob(z.flip(), z))).abs() <= tol::PROB_IDENTITY,
                "complement relation broken"
            );
            for side in [Side::First, Side::Second] {
                ensure!(
                    (single_marginal(&d12, side, z) - 0.5).abs() <= tol::PROB_IDENTITY,
                    "marginal not 1/2"
                );
            }
        }
    }
    Ok(())
}

fn quantum_conventions() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    for _ in 0..500 {
        let theta: [f64; 3] = [(); 3].map(|_| rng.gen_range(-PI..PI));
        let electron = AngleConfig::new(
            theta[0],
            theta[1],
            theta[2],
            Convention::Electron,
            Correlation::Negative,
        );
        let photon = AngleConfig::new(
            theta[0] / 2.0,
            theta[1] / 2.0,
            theta[2] / 2.0,
            Convention::Photon,
            Correlation::Negative,
        );
        for pair in Pair::ALL {
            let (j, k) = pair.indices();
            let a = pair_distribution(&electron, j, k).unwrap();
            let b = pair_distribution(&photon, j, k).unwrap();
            ensure!(a.entries() == b.entries(), "convention outputs differ");
        }
    }
    Ok(())
}

fn quantum_hidden_reduction() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n_points = rng.gen_range(1..=12);
        let raw: Vec<u64> = (0..n_points).map(|_| rng.gen_range(1..=99)).collect();
        let total: u64 = raw.iter().sum();
        let model = HiddenVariableModel::new(
            raw.iter()
                .map(|&w| HiddenPoint {
                    weight: Rational::new(w as i128, total as i128),
                    outcomes: [(); 3].map(|_| {
                        if rng.gen::<bool>() {
                            Sign::Plus
                        } else {
                            Sign::Minus
                        }
                    }),
                })
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        for pair in Pair::ALL {
            let (j, k) = pair.indices();
            let direct = model.lambda_expectation(j, k).unwrap();
            let induced = model
                .induced_pair_distribution(j, k)
                .unwrap()
                .expected_product();
            ensure!(direct == induced, "λ-sum {direct} != induced {induced}");
        }
    }
    Ok(())
}

fn inequality_generalized_q() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    for _ in 0..20_000 {
        let q: [f64; 8] = [(); 8].map(|_| rng.gen_range(-10.0..10.0));
        for sign in Sign::BOTH {
            let (lhs, rhs) = generalized_q_margin(&q, [1, 2, 3], sign).unwrap();
            ensure!(lhs - rhs >= -1e-12, "lhs {lhs} < rhs {rhs}");
        }
    }
    Ok(())
}

fn inequality_decomposition() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let [d12, d13, d23] = random_pairs(&mut rng);
        let (wa, wb) = bell_wigner_decomposition(&d12, &d23, &d13).unwrap();
        let (e12, e13, e23) = (
            expected_product(&d12),
            expected_product(&d13),
            expected_product(&d23),
        );
        ensure!(
            (1.0 - e13 - (e12 - e23) - 2.0 * wa).abs() <= tol::PROB_IDENTITY,
            "w_a identity broken"
        );
        ensure!(
            (1.0 - e13 + (e12 - e23) - 2.0 * wb).abs() <= tol::PROB_IDENTITY,
            "w_b identity broken"
        );
    }
    Ok(())
}

fn inequality_region_union() -> Result<(), String> {
    let map = scan_grid(PI / 60.0, Convention::Photon, Correlation::Negative, 2)
        .map_err(|e| e.to_string())?;
    for cell in map.cells() {
        let margins = [cell.bell_minus, cell.wigner1, cell.wigner2];
        if margins.iter().any(|m| m.abs() <= tol::VIOLATION_BAND) {
            continue;
        }
        let bell = cell.bell_minus < -tol::VIOLATION_BAND;
        let union = cell.wigner1 < -tol::VIOLATION_BAND || cell.wigner2 < -tol::VIOLATION_BAND;
        ensure!(bell == union, "region-union disagreement");
    }
    Ok(())
}

fn feasibility_reduction() -> Result<(), String> {
    ensure!(verify_reduction(), "reduction matrices disagree");
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    for _ in 0..500 {
        let [d12, d13, d23] = random_pairs(&mut rng);
        let b = MarginalVector::from_pairs(&d12, &d13, &d23).unwrap();
        let reduction = reduce_system(&b).map_err(|e| e.to_string())?;
        ensure!(reduction.rank == 7, "rank != 7");
        ensure!(
            reduction.consistency_residual <= tol::REDUCTION_RESIDUAL,
            "residual too large"
        );
        let family = solution_family(&reduction);
        let t = rng.gen_range(-1.0..2.0);
        for (lhs, rhs) in apply_system(&family.triple(t).q).iter().zip(b.b.iter()) {
            ensure!((lhs - rhs).abs() <= 1e-10, "A·q(t) != B");
        }
    }
    Ok(())
}

fn feasibility_intervals() -> Result<(), String> {
    let spots = [(60.0, 120.0, Some((0.25, 0.375))), (60.0, 90.0, None)];
    for (theta2, theta3, expected) in spots {
        let config = AngleConfig::from_degrees(
            0.0,
            theta2,
            theta3,
            Convention::Photon,
            Correlation::Negative,
        );
        let d12 = pair_distribution(&config, 1, 2).unwrap();
        let d13 = pair_distribution(&config, 1, 3).unwrap();
        let d23 = pair_distribution(&config, 2, 3).unwrap();
        let report = analyze_pairs(&d12, &d13, &d23).map_err(|e| e.to_string())?;
        match expected {
            Some((lo, hi)) => {
                ensure!(
                    report.interval.nonempty,
                    "expected feasible at ({theta2},{theta3})"
                );
                ensure!(
                    (report.interval.lo - lo).abs() <= 1e-10
                        && (report.interval.hi - hi).abs() <= 1e-10,
                    "interval mismatch at ({theta2},{theta3})"
                );
            }
            None => {
                ensure!(
                    !report.interval.nonempty,
                    "expected infeasible at ({theta2},{theta3})"
                );
                let worst = report.best.q.iter().cloned().fold(f64::INFINITY, f64::min);
                ensure!((worst + 0.25).abs() <= 1e-10, "worst entry {worst} != -1/4");
            }
        }
        // Brute-force confirmation on a coarse t grid.
        let mut any_feasible = false;
        for i in 0..=10_000 {
            let t = i as f64 / 10_000.0;
            if report.family.triple(t).q.iter().all(|&x| x >= -1e-9) {
                any_feasible = true;
                break;
            }
        }
        ensure!(
            any_feasible == report.interval.nonempty,
            "brute-force scan disagrees at ({theta2},{theta3})"
        );
    }
    Ok(())
}

fn feasibility_matches_violation() -> Result<(), String> {
    let map = scan_grid(PI / 60.0, Convention::Photon, Correlation::Negative, 2)
        .map_err(|e| e.to_string())?;
    for cell in map.cells() {
        let margin = cell.bell_margin();
        if margin.abs() <= tol::VIOLATION_BAND {
            continue;
        }
        ensure!(
            (margin < -tol::VIOLATION_BAND) == !cell.feasible,
            "feasibility/violation mismatch"
        );
    }
    Ok(())
}

fn simulation_estimator_inequality() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..20_000 {
        let counts: [[u64; 4]; 3] =
            [(); 3].map(|_| [(); 4].map(|_| rng.gen_range(0..1_000_000u64)));
        let table = CountTable::from_counts(counts).unwrap();
        ensure!(
            estimator_bell_check(&table).satisfied(),
            "inequality violated"
        );
    }
    for run in 0..100u64 {
        let tc = TrialConfig::new(
            AngleConfig::photon(0.0, rng.gen_range(0.0..PI), rng.gen_range(0.0..PI)),
            rng.gen_range(1..=50_000),
            Assignment::RandomUniform,
            run,
        )
        .unwrap();
        let table = simulate_counts(&tc).map_err(|e| e.to_string())?;
        ensure!(
            estimator_bell_check(&table).satisfied(),
            "simulated violation"
        );
        let probs = configuration_probabilities(&table).unwrap();
        ensure!(
            detection_sum_margin(&probs) == ratio(0, 1),
            "detection-sum margin nonzero"
        );
    }
    Ok(())
}

fn simulation_determinism_and_identity() -> Result<(), String> {
    let tc = TrialConfig::new(
        AngleConfig::from_degrees(0.0, 60.0, 90.0, Convention::Photon, Correlation::Negative),
        30_000,
        Assignment::Weighted([0.4, 0.35, 0.25]),
        99,
    )
    .unwrap();
    let a = simulate_counts(&tc).map_err(|e| e.to_string())?;
    let b = simulate_counts(&tc).map_err(|e| e.to_string())?;
    ensure!(a == b, "same seed gave different tables");
    let per = estimate_all(&a, Normalization::PerConfig).map_err(|e| e.to_string())?;
    let global = estimate_all(&a, Normalization::GlobalN).map_err(|e| e.to_string())?;
    let probs = configuration_probabilities(&a).unwrap();
    for ((per_pair, global_pair), prob) in per.pairs.iter().zip(&global.pairs).zip(&probs) {
        ensure!(
            per_pair.expected_product * *prob == global_pair.expected_product,
            "normalization identity broken"
        );
    }
    Ok(())
}

fn extended_margins() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    for _ in 0..20_000 {
        let raw: [u32; 27] = [(); 27].map(|_| rng.gen_range(0..1000u32));
        let total: u64 = raw.iter().map(|&x| x as u64).sum();
        if total == 0 {
            continue;
        }
        let mut p = [Rational::default(); 27];
        for (slot, &x) in p.iter_mut().zip(raw.iter()) {
            *slot = Rational::new(x as i128, total as i128);
        }
        let d = ExtendedTripleDistribution::new(p).unwrap();
        for sign in Sign::BOTH {
            let margin = bell_margin_extended(&d, sign).unwrap();
            ensure!(margin >= ratio(0, 1), "extended margin negative");
        }
    }
    Ok(())
}

fn extended_compose_roundtrip() -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for _ in 0..500 {
        let conditionals = [(); 3].map(|_| {
            let cells: [u32; 4] = [(); 4].map(|_| rng.gen_range(1..50u32));
            let total: u64 = cells.iter().map(|&x| x as u64).sum();
            ConditionalPairTable::new(cells.map(|x| Rational::new(x as i128, total as i128)))
                .unwrap()
        });
        let raw: [u32; 3] = [(); 3].map(|_| rng.gen_range(0..50u32));
        let denom = (raw.iter().map(|&x| x as u64).sum::<u64>().max(1) * 2) as i128;
        let config_probs = raw.map(|x| Rational::new(x as i128, denom));
        let d =
            compose_from_conditionals(&conditionals, &config_probs).map_err(|e| e.to_string())?;
        for (i, pair) in Pair::ALL.into_iter().enumerate() {
            if config_probs[i] != ratio(0, 1) {
                let recovered = marginal_conditional(&d, pair).map_err(|e| e.to_string())?;
                ensure!(recovered == conditionals[i], "round trip not exact");
            }
        }
    }
    Ok(())
}

fn extended_enumeration_smoke() -> Result<(), String> {
    let summary = enumerate_simplex(4, EnumerationMode::Full, 2).map_err(|e| e.to_string())?;
    ensure!(summary.tuples == 27_405, "tuple count {}", summary.tuples);
    ensure!(
        summary.tuples as u128 == compositions_count(4),
        "count formula"
    );
    ensure!(summary.min_margin_num >= 0, "negative margin");
    ensure!(
        summary.histogram.total() == summary.tuples,
        "histogram total"
    );

    let single = enumerate_simplex(4, EnumerationMode::Full, 1).map_err(|e| e.to_string())?;
    ensure!(single == summary, "thread count changed the result");

    let mut reference = 0u64;
    for_each_composition(4, |_| reference += 1);
    ensure!(
        reference == summary.tuples,
        "reference enumerator disagrees"
    );
    Ok(())
}

fn suite_checks(suite: Suite) -> Vec<Check> {
    let quantum: Vec<Check> = vec![
        (
            "quantum/normalization-symmetry-marginals",
            quantum_normalization,
        ),
        ("quantum/electron-photon-consistency", quantum_conventions),
        (
            "quantum/hidden-variable-reduction",
            quantum_hidden_reduction,
        ),
    ];
    let inequality: Vec<Check> = vec![
        ("inequality/generalized-q", inequality_generalized_q),
        (
            "inequality/bell-wigner-decomposition",
            inequality_decomposition,
        ),
        ("inequality/region-union", inequality_region_union),
    ];
    let feasibility: Vec<Check> = vec![
        ("feasibility/reduction-rank-solution", feasibility_reduction),
        ("feasibility/spot-intervals", feasibility_intervals),
        (
            "feasibility/violation-equivalence",
            feasibility_matches_violation,
        ),
    ];
    let simulation: Vec<Check> = vec![
        (
            "simulation/estimator-inequality",
            simulation_estimator_inequality,
        ),
        (
            "simulation/determinism-identity",
            simulation_determinism_and_identity,
        ),
    ];
    let extended: Vec<Check> = vec![
        ("extended/margins-nonnegative", extended_margins),
        ("extended/compose-roundtrip", extended_compose_roundtrip),
        ("extended/enumeration-smoke", extended_enumeration_smoke),
    ];
    match suite {
        Suite::Quantum => quantum,
        Suite::Inequality => inequality,
        Suite::Feasibility => feasibility,
        Suite::Simulation => simulation,
        Suite::Extended => extended,
        Suite::All => quantum
            .into_iter()
            .chain(inequality)
            .chain(feasibility)
            .chain(simulation)
            .chain(extended)
            .collect(),
    }
}

/// Runs the chosen suite, printing one line per check; returns the number
/// of failures.
pub fn run(suite: Suite) -> usize {
    let checks = suite_checks(suite);
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("PASS {name}"),
            Err(message) => {
                failures += 1;
                println!("FAIL {name}: {message}");
            }
        }
    }
    failures
}
