//! Report writers: scan CSV, PGM heatmaps, and the solve/simulate text
//! reports. All numeric formatting is deterministic, so identical
//! invocations produce byte-identical output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use bellwigner_core::feasibility::{analyze_pairs, vertex_signs};
use bellwigner_core::fmt::sig12;
use bellwigner_core::inequality::{
    bell_margin_angles_signed, pair_expectation, wigner_first, wigner_margin_at, wigner_second,
    CellRecord, ViolationMap,
};
use bellwigner_core::quantum::{
    pair_distribution, rational_to_f64, AngleConfig, Convention, Correlation, Pair, Sign,
};
use bellwigner_core::simulation::{
    configuration_probabilities, estimate_all, estimator_bell_check, CountTable, Normalization,
    TrialConfig,
};
use bellwigner_core::tol;

use crate::{AppError, PgmChannel};

/// Header pinned by the file contract; margins carry 12 significant
/// digits.
const SCAN_HEADER: &str =
    "theta2_deg,theta3_deg,bell_margin,wigner1_margin,wigner2_margin,feasible,t_lo,t_hi";

pub fn write_scan_csv(map: &ViolationMap, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{SCAN_HEADER}")?;
    for row in 0..map.size {
        let theta2 = map.angle(row).to_degrees();
        for col in 0..map.size {
            let theta3 = map.angle(col).to_degrees();
            let cell = map.cell(row, col);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                sig12(theta2),
                sig12(theta3),
                sig12(cell.bell_margin()),
                sig12(cell.wigner1),
                sig12(cell.wigner2),
                u8::from(cell.feasible),
                sig12(cell.t_lo),
                sig12(cell.t_hi),
            )?;
        }
    }
    out.flush()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Violated,
    Boundary,
    Satisfied,
}

fn classify(margin: f64) -> Class {
    if margin < -tol::VIOLATION_BAND {
        Class::Violated
    } else if margin <= tol::VIOLATION_BAND {
        Class::Boundary
    } else {
        Class::Satisfied
    }
}

fn pixel(cell: &CellRecord, channel: PgmChannel) -> u8 {
    let class = match channel {
        PgmChannel::Bell => classify(cell.bell_margin()),
        PgmChannel::Wigner1 => classify(cell.wigner1),
        PgmChannel::Wigner2 => classify(cell.wigner2),
        PgmChannel::UnionCheck => {
            // Agreement between the minus-form Bell region and the union of
            // the two Wigner regions; indeterminate near the boundary.
            let bell = classify(cell.bell_minus);
            let union = if classify(cell.wigner1) == Class::Violated
                || classify(cell.wigner2) == Class::Violated
            {
                Class::Violated
            } else if classify(cell.wigner1) == Class::Boundary
                || classify(cell.wigner2) == Class::Boundary
            {
                Class::Boundary
            } else {
                Class::Satisfied
            };
            if bell == Class::Boundary || union == Class::Boundary {
                Class::Boundary
            } else if bell == union {
                Class::Satisfied
            } else {
                Class::Violated
            }
        }
    };
    match class {
        Class::Violated => 0,
        Class::Boundary => 128,
        Class::Satisfied => 255,
    }
}

/// Plain-text PGM: violation 0, boundary 128, satisfied 255. Row `r` is
/// θ2 = r·step, column `c` is θ3 = c·step.
pub fn write_pgm(map: &ViolationMap, channel: PgmChannel, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "P2")?;
    writeln!(out, "{} {}", map.size, map.size)?;
    writeln!(out, "255")?;
    for row in 0..map.size {
        for col in 0..map.size {
            writeln!(out, "{}", pixel(map.cell(row, col), channel))?;
        }
    }
    out.flush()
}

fn convention_name(c: Convention) -> &'static str {
    match c {
        Convention::Photon => "photon",
        Convention::Electron => "electron",
    }
}

fn correlation_name(c: Correlation) -> &'static str {
    match c {
        Correlation::Negative => "negative",
        Correlation::Positive => "positive",
    }
}

/// The solve report: margins, reduction data, the solution family's
/// feasibility interval, and a representative (quasi-)distribution.
pub fn solve_report(config: &AngleConfig) -> Result<String, AppError> {
    let d12 = pair_distribution(config, 1, 2)?;
    let d13 = pair_distribution(config, 1, 3)?;
    let d23 = pair_distribution(config, 2, 3)?;
    let report = analyze_pairs(&d12, &d13, &d23)?;

    let mut out = String::new();
    let deg = |i: usize| sig12(config.theta[i].to_degrees());
    out.push_str(&format!(
        "angles_deg: theta1={} theta2={} theta3={}\n",
        deg(0),
        deg(1),
        deg(2)
    ));
    out.push_str(&format!(
        "convention: {}  correlation: {}\n",
        convention_name(config.convention),
        correlation_name(config.correlation)
    ));
    out.push_str(&format!(
        "expected_products: E12={} E13={} E23={}\n",
        sig12(pair_expectation(config, Pair::OneTwo)),
        sig12(pair_expectation(config, Pair::OneThree)),
        sig12(pair_expectation(config, Pair::TwoThree)),
    ));
    out.push_str(&format!(
        "bell_margins: minus={} plus={}\n",
        sig12(bell_margin_angles_signed(config, Sign::Minus)),
        sig12(bell_margin_angles_signed(config, Sign::Plus)),
    ));
    out.push_str(&format!(
        "wigner_margins: first={} second={}\n",
        sig12(wigner_margin_at(config, &wigner_first())),
        sig12(wigner_margin_at(config, &wigner_second())),
    ));
    out.push_str(&format!("rank: {}\n", report.reduction.rank));
    out.push_str(&format!(
        "consistency_residual: {:.3e}\n",
        report.reduction.consistency_residual
    ));
    if report.interval.nonempty {
        out.push_str(&format!(
            "feasibility_interval: [{}, {}]\n",
            sig12(report.interval.lo),
            sig12(report.interval.hi)
        ));
    } else {
        out.push_str(&format!(
            "feasibility_interval: empty (lower bound {} exceeds upper bound {})\n",
            sig12(report.interval.lo),
            sig12(report.interval.hi)
        ));
    }
    let t = report.best.prob(Sign::Plus, Sign::Plus, Sign::Plus);
    out.push_str(&format!("representative_t: {}\n", sig12(t)));
    for (index, value) in report.best.q.iter().enumerate() {
        let [z1, z2, z3] = vertex_signs(index);
        out.push_str(&format!("q({z1},{z2},{z3}) = {}\n", sig12(*value)));
    }
    out.push_str(&format!("quasi: {}\n", report.best.quasi));
    Ok(out)
}

/// The simulate report. Every candidate normalization is shown side by
/// side; none is preferred silently.
pub fn simulate_report(tc: &TrialConfig, table: &CountTable) -> Result<String, AppError> {
    let mut out = String::new();
    out.push_str(&format!("trials: {}  seed: {}\n", table.total(), tc.seed));
    let n12 = table.config_total(Pair::OneTwo);
    let n13 = table.config_total(Pair::OneThree);
    let n23 = table.config_total(Pair::TwoThree);
    out.push_str(&format!(
        "configuration_counts: n12={n12} n13={n13} n23={n23}\n"
    ));
    let probs = configuration_probabilities(table)?;
    out.push_str(&format!(
        "configuration_probabilities: {} {} {}\n",
        probs[0], probs[1], probs[2]
    ));

    let bell_minus = |e12: f64, e13: f64, e23: f64| 1.0 - e13 - (e12 - e23).abs();
    for (label, normalization) in [
        ("per_config", Normalization::PerConfig),
        ("global_n", Normalization::GlobalN),
    ] {
        match estimate_all(table, normalization) {
            Ok(set) => {
                let e: Vec<f64> = set
                    .pairs
                    .iter()
                    .map(|p| rational_to_f64(p.expected_product))
                    .collect();
                out.push_str(&format!(
                    "{label}: E12={} E13={} E23={}  bell_minus={}\n",
                    sig12(e[0]),
                    sig12(e[1]),
                    sig12(e[2]),
                    sig12(bell_minus(e[0], e[1], e[2]))
                ));
            }
            Err(err) => out.push_str(&format!("{label}: unavailable ({err})\n")),
        }
    }
    // The pooled reading of the difference E12 − E23 divides the count
    // difference by the two configurations' combined total.
    let s12 = table.signed_sum(Pair::OneTwo);
    let s23 = table.signed_sum(Pair::TwoThree);
    if n12 + n23 > 0 {
        let pooled = (s12 - s23) as f64 / (n12 + n23) as f64;
        out.push_str(&format!(
            "pooled_difference_e12_minus_e23: {}\n",
            sig12(pooled)
        ));
    } else {
        out.push_str("pooled_difference_e12_minus_e23: unavailable (no trials)\n");
    }

    let check = estimator_bell_check(table);
    out.push_str(&format!(
        "estimator_check: N={} rhs_plus={} rhs_minus={} satisfied={}\n",
        check.lhs,
        check.rhs_plus,
        check.rhs_minus,
        check.satisfied()
    ));
    out.push_str(&format!(
        "detection_sum_margin: {}\n",
        bellwigner_core::extended::detection_sum_margin(&probs)
    ));
    Ok(out)
}
