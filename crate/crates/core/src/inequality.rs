//! Wigner and Bell inequality margins and violation-region scans.
//!
//! Margins are reported signed (`lhs − rhs` of the inequality): negative
//! means violation. Grids classify a cell as violating only below
//! `-`[`tol::VIOLATION_BAND`], since the inequalities are non-strict.

use std::f64::consts::PI;
use std::thread;

use crate::feasibility::{self, vertex_signs};
use crate::quantum::{
    pair_distribution, AngleConfig, Convention, Correlation, Pair, PairDistribution, Sign,
};
use crate::{tol, Error, Result};

/// A Wigner-inequality instantiation: which ordered index triple plays
/// `(j, k, l)` and which outcome is selected for each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrangement {
    perm: [u8; 3],
    signs: [Sign; 3],
}

impl Arrangement {
    pub fn new(perm: [u8; 3], signs: [Sign; 3]) -> Result<Arrangement> {
        let mut seen = [false; 3];
        for &idx in &perm {
            if !(1..=3).contains(&idx) {
                return Err(Error::ApparatusIndex(idx));
            }
            seen[(idx - 1) as usize] = true;
        }
        if seen != [true; 3] {
            return Err(Error::NotAPermutation(perm));
        }
        Ok(Arrangement { perm, signs })
    }

    pub fn perm(&self) -> [u8; 3] {
        self.perm
    }

    pub fn signs(&self) -> [Sign; 3] {
        self.signs
    }

    /// All 48 arrangements: 6 index orders × 8 outcome selections.
    pub fn all() -> Vec<Arrangement> {
        const PERMS: [[u8; 3]; 6] = [
            [1, 2, 3],
            [1, 3, 2],
            [2, 1, 3],
            [2, 3, 1],
            [3, 1, 2],
            [3, 2, 1],
        ];
        let mut out = Vec::with_capacity(48);
        for perm in PERMS {
            for v in 0..8 {
                out.push(Arrangement {
                    perm,
                    signs: vertex_signs(v),
                });
            }
        }
        out
    }
}

/// The first Wigner form the scan tracks:
/// `P13(+,-) + P23(+,+) − P12(+,+)`, i.e. `cos²(ϑ₃)/2 + sin²(ϑ₂−ϑ₃)/2 −
/// sin²(ϑ₂)/2` at `θ₁ = 0`.
pub fn wigner_first() -> Arrangement {
    Arrangement {
        perm: [1, 3, 2],
        signs: [Sign::Plus, Sign::Minus, Sign::Plus],
    }
}

/// The second Wigner form the scan tracks:
/// `P12(+,+) + P23(-,+) − P13(+,+)`, i.e. `cos²(ϑ₃−ϑ₂)/2 + sin²(ϑ₂)/2 −
/// sin²(ϑ₃)/2` at `θ₁ = 0`.
pub fn wigner_second() -> Arrangement {
    Arrangement {
        perm: [1, 2, 3],
        signs: [Sign::Plus, Sign::Plus, Sign::Plus],
    }
}

/// `P(Z_a = z_a, Z_b = z_b)` read off a distribution whose label is the
/// canonical form of `(a, b)`; coordinates swap when the query order is
/// reversed.
fn oriented_prob(d: &PairDistribution, a: u8, z_a: Sign, b: u8, z_b: Sign) -> Result<f64> {
    let pair = Pair::new(a, b)?;
    if d.pair() != pair {
        return Err(Error::PairMismatch {
            expected: pair,
            got: d.pair(),
        });
    }
    Ok(if a < b {
        d.prob(z_a, z_b)
    } else {
        d.prob(z_b, z_a)
    })
}

/// Wigner margin `P_jk(z_j, z_k) + P_kl(z̄_k, z_l) − P_jl(z_j, z_l)`.
///
/// Nonnegative whenever a genuine triple distribution reproduces the three
/// pair distributions; in that case it equals `p(z_j, z_k, z̄_l) +
/// p(z̄_j, z̄_k, z_l)`.
pub fn wigner_margin(
    d_jk: &PairDistribution,
    d_kl: &PairDistribution,
    d_jl: &PairDistribution,
    arrangement: &Arrangement,
) -> Result<f64> {
    let [j, k, l] = arrangement.perm;
    let [z_j, z_k, z_l] = arrangement.signs;
    Ok(
        oriented_prob(d_jk, j, z_j, k, z_k)? + oriented_prob(d_kl, k, z_k.flip(), l, z_l)?
            - oriented_prob(d_jl, j, z_j, l, z_l)?,
    )
}

/// Wigner margin at an angle configuration, building the three pair
/// distributions internally.
pub fn wigner_margin_at(config: &AngleConfig, arrangement: &Arrangement) -> f64 {
    let [j, k, l] = arrangement.perm;
    let d_jk = pair_distribution(config, j, k).expect("distinct indices");
    let d_kl = pair_distribution(config, k, l).expect("distinct indices");
    let d_jl = pair_distribution(config, j, l).expect("distinct indices");
    wigner_margin(&d_jk, &d_kl, &d_jl, arrangement).expect("labels match by construction")
}

fn bell_forms(e12: f64, e23: f64, e13: f64) -> (f64, f64) {
    let minus = (1.0 - e13) - (e12 - e23).abs();
    let plus = (1.0 + e13) - (e12 + e23).abs();
    (minus, plus)
}

/// Bell margin `(1 ∓ E13) − |E12 ∓ E23|` for the chosen sign variant.
pub fn bell_margin(e12: f64, e23: f64, e13: f64, sign: Sign) -> Result<f64> {
    for e in [e12, e23, e13] {
        if e.abs() > 1.0 + tol::PROB_IDENTITY {
            return Err(Error::ExpectationOutOfRange(e));
        }
    }
    let (minus, plus) = bell_forms(e12, e23, e13);
    Ok(match sign {
        Sign::Minus => minus,
        Sign::Plus => plus,
    })
}

/// Expected product `E[Z_j·Z_k] = −cos(2Δ)` straight from the angles — the
/// expectation route, independent of the probability-table route.
pub fn pair_expectation(config: &AngleConfig, pair: Pair) -> f64 {
    -(2.0 * config.delta(pair)).cos()
}

/// The minus-form Bell margin at an angle configuration:
/// `1 + cos(2ϑ₃) − |cos(2(ϑ₂−ϑ₃)) − cos(2ϑ₂)|` when `θ₁ = 0`.
pub fn bell_margin_angles(config: &AngleConfig) -> f64 {
    bell_margin_angles_signed(config, Sign::Minus)
}

/// Either sign variant of the Bell margin from the expectation route.
pub fn bell_margin_angles_signed(config: &AngleConfig, sign: Sign) -> f64 {
    let e12 = pair_expectation(config, Pair::OneTwo);
    let e23 = pair_expectation(config, Pair::TwoThree);
    let e13 = pair_expectation(config, Pair::OneThree);
    let (minus, plus) = bell_forms(e12, e23, e13);
    match sign {
        Sign::Minus => minus,
        Sign::Plus => plus,
    }
}

/// Generalized inequality for an arbitrary signed 8-vector `Q` over
/// `{-1,+1}³`, with the dichotomic variables `U = Z_j·Z_k` and
/// `V = Z_k·Z_l` for the index order `(j, k, l)`:
///
/// `Σ|Q| ± Σ U·V·|Q|  ≥  |Σ U·Q ± Σ V·Q|`
///
/// Returns `(lhs, rhs)`. `Q` needs no sign or normalization constraint —
/// only its absolute value enters the left side, which is the point.
pub fn generalized_q_margin(q: &[f64; 8], perm: [u8; 3], sign: Sign) -> Result<(f64, f64)> {
    Arrangement::new(perm, [Sign::Plus; 3])?;
    let [j, k, l] = perm;
    let mut abs_sum = 0.0;
    let mut uv_abs = 0.0;
    let mut u_sum = 0.0;
    let mut v_sum = 0.0;
    for (v_idx, &value) in q.iter().enumerate() {
        let z = vertex_signs(v_idx);
        let u = z[(j - 1) as usize].value() * z[(k - 1) as usize].value();
        let w = z[(k - 1) as usize].value() * z[(l - 1) as usize].value();
        abs_sum += value.abs();
        uv_abs += u * w * value.abs();
        u_sum += u * value;
        v_sum += w * value;
    }
    let (lhs, rhs) = match sign {
        Sign::Plus => (abs_sum + uv_abs, (u_sum + v_sum).abs()),
        Sign::Minus => (abs_sum - uv_abs, (u_sum - v_sum).abs()),
    };
    Ok((lhs, rhs))
}

/// Decomposes the two sides of the minus-form Bell inequality into the two
/// Wigner expressions:
///
/// `w_a = P23(C) − P12(C) + 1 − P13(C)` and
/// `w_b = P12(C) − P23(C) + 1 − P13(C)`,
///
/// with the identities `1 − E13 − (E12 − E23) = 2·w_a` and
/// `1 − E13 + (E12 − E23) = 2·w_b`.
pub fn bell_wigner_decomposition(
    d12: &PairDistribution,
    d23: &PairDistribution,
    d13: &PairDistribution,
) -> Result<(f64, f64)> {
    for (d, expected) in [
        (d12, Pair::OneTwo),
        (d23, Pair::TwoThree),
        (d13, Pair::OneThree),
    ] {
        if d.pair() != expected {
            return Err(Error::PairMismatch {
                expected,
                got: d.pair(),
            });
        }
    }
    let c12 = crate::quantum::agreement_probability(d12);
    let c23 = crate::quantum::agreement_probability(d23);
    let c13 = crate::quantum::agreement_probability(d13);
    Ok((c23 - c12 + 1.0 - c13, c12 - c23 + 1.0 - c13))
}

/// Per-cell scan record. Both sign variants of the Bell margin are kept:
/// the minus form carries the region-union identity with the two Wigner
/// forms, while feasibility tracks the minimum of the two.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellRecord {
    pub bell_minus: f64,
    pub bell_plus: f64,
    pub wigner1: f64,
    pub wigner2: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub feasible: bool,
}

impl CellRecord {
    /// The scan's reported Bell margin: the minimum of the two sign
    /// variants.
    pub fn bell_margin(&self) -> f64 {
        self.bell_minus.min(self.bell_plus)
    }
}

/// Margins and feasibility data over a `(θ₂, θ₃)` grid with `θ₁ = 0`.
///
/// Every formula is π-periodic in each device-angle difference, so the
/// grid covers `[0, π)²`. Cells live at integer multiples of the step,
/// row-major with θ₂ as the row coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationMap {
    pub theta_step: f64,
    pub size: usize,
    pub convention: Convention,
    pub correlation: Correlation,
    cells: Vec<CellRecord>,
}

impl ViolationMap {
    pub fn cell(&self, row: usize, col: usize) -> &CellRecord {
        &self.cells[row * self.size + col]
    }

    pub fn cells(&self) -> &[CellRecord] {
        &self.cells
    }

    /// Angle of a grid line, radians.
    pub fn angle(&self, index: usize) -> f64 {
        index as f64 * self.theta_step
    }
}

fn cell_record(config: &AngleConfig) -> Result<CellRecord> {
    let e12 = pair_expectation(config, Pair::OneTwo);
    let e23 = pair_expectation(config, Pair::TwoThree);
    let e13 = pair_expectation(config, Pair::OneThree);
    let (bell_minus, bell_plus) = bell_forms(e12, e23, e13);

    let d12 = pair_distribution(config, 1, 2)?;
    let d13 = pair_distribution(config, 1, 3)?;
    let d23 = pair_distribution(config, 2, 3)?;
    let wigner1 = wigner_margin(&d13, &d23, &d12, &wigner_first())?;
    let wigner2 = wigner_margin(&d12, &d23, &d13, &wigner_second())?;

    let report = feasibility::analyze_pairs(&d12, &d13, &d23)?;
    Ok(CellRecord {
        bell_minus,
        bell_plus,
        wigner1,
        wigner2,
        t_lo: report.interval.lo,
        t_hi: report.interval.hi,
        feasible: report.interval.nonempty,
    })
}

/// Scans the `[0, π)²` grid with the given step. Cells are independent
/// pure evaluations, so the result is identical for any thread count.
pub fn scan_grid(
    theta_step: f64,
    convention: Convention,
    correlation: Correlation,
    threads: usize,
) -> Result<ViolationMap> {
    if theta_step.is_nan() || theta_step <= 0.0 {
        return Err(Error::NonPositiveStep(theta_step));
    }
    let size = (PI / theta_step).ceil().max(1.0) as usize;
    let mut cells = vec![CellRecord::default(); size * size];

    let workers = threads.max(1).min(size);
    let rows_per_chunk = size.div_ceil(workers);
    let fill_row = |row: usize, out: &mut [CellRecord]| -> Result<()> {
        let theta2 = row as f64 * theta_step;
        for (col, slot) in out.iter_mut().enumerate() {
            let theta3 = col as f64 * theta_step;
            let config = AngleConfig::new(0.0, theta2, theta3, convention, correlation);
            *slot = cell_record(&config)?;
        }
        Ok(())
    };

    if workers == 1 {
        for (row, chunk) in cells.chunks_mut(size).enumerate() {
            fill_row(row, chunk)?;
        }
    } else {
        let results: Vec<Result<()>> = thread::scope(|scope| {
            let mut handles = Vec::new();
            for (chunk_idx, chunk) in cells.chunks_mut(rows_per_chunk * size).enumerate() {
                let fill_row = &fill_row;
                handles.push(scope.spawn(move || -> Result<()> {
                    for (offset, row_cells) in chunk.chunks_mut(size).enumerate() {
                        fill_row(chunk_idx * rows_per_chunk + offset, row_cells)?;
                    }
                    Ok(())
                }));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("scan worker panicked"))
                .collect()
        });
        for result in results {
            result?;
        }
    }

    Ok(ViolationMap {
        theta_step,
        size,
        convention,
        correlation,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{analyze_pairs, vertex_index};
    use std::f64::consts::{FRAC_PI_2, PI};

    const EPS: f64 = 1e-12;
    const FRAC_PI_3: f64 = PI / 3.0;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= EPS, "{a} != {b}");
    }

    fn pairs_at(theta2: f64, theta3: f64) -> [PairDistribution; 3] {
        let cfg = AngleConfig::photon(0.0, theta2, theta3);
        [
            pair_distribution(&cfg, 1, 2).unwrap(),
            pair_distribution(&cfg, 1, 3).unwrap(),
            pair_distribution(&cfg, 2, 3).unwrap(),
        ]
    }

    #[test]
    fn wigner_first_form_at_violation_point() {
        // cos²(θ₃)/2 + sin²(θ₂−θ₃)/2 − sin²(θ₂)/2 = 0 + 0.125 − 0.375.
        let cfg = AngleConfig::photon(0.0, FRAC_PI_3, FRAC_PI_2);
        close(wigner_margin_at(&cfg, &wigner_first()), -0.25);
        close(wigner_margin_at(&cfg, &wigner_second()), 0.25);
    }

    #[test]
    fn wigner_boundary_when_all_pairs_fully_agree() {
        // Three standalone pair distributions at Δ = π/2 each:
        // 0.5 + 0 − 0.5 = 0.
        let agree = |pair| PairDistribution::new(pair, [0.5, 0.0, 0.0, 0.5]).unwrap();
        let arr = Arrangement::new([1, 2, 3], [Sign::Plus; 3]).unwrap();
        let margin = wigner_margin(
            &agree(Pair::OneTwo),
            &agree(Pair::TwoThree),
            &agree(Pair::OneThree),
            &arr,
        )
        .unwrap();
        close(margin, 0.0);
    }

    #[test]
    fn wigner_rejects_mislabeled_pairs() {
        let [d12, d13, d23] = pairs_at(0.4, 0.9);
        let err = wigner_margin(&d12, &d13, &d23, &wigner_second()).unwrap_err();
        assert!(matches!(err, Error::PairMismatch { .. }));
        // d_kl and d_jl swapped relative to the arrangement.
        assert!(wigner_margin(&d12, &d23, &d13, &wigner_second()).is_ok());
    }

    #[test]
    fn arrangement_validation() {
        assert!(Arrangement::new([1, 2, 2], [Sign::Plus; 3]).is_err());
        assert!(Arrangement::new([0, 1, 2], [Sign::Plus; 3]).is_err());
        assert_eq!(Arrangement::all().len(), 48);
    }

    #[test]
    fn bell_margin_examples() {
        close(bell_margin(0.0, 0.0, 0.0, Sign::Minus).unwrap(), 1.0);
        close(bell_margin(0.0, 0.0, 0.0, Sign::Plus).unwrap(), 1.0);
        // θ = (0, π/3, π/2): E12 = +0.5, E23 = −0.5, E13 = +1.
        close(bell_margin(0.5, -0.5, 1.0, Sign::Minus).unwrap(), -1.0);
        assert!(matches!(
            bell_margin(1.5, 0.0, 0.0, Sign::Minus),
            Err(Error::ExpectationOutOfRange(_))
        ));
    }

    #[test]
    fn bell_margin_angles_examples() {
        let at = |t2: f64, t3: f64| bell_margin_angles(&AngleConfig::photon(0.0, t2, t3));
        close(at(0.0, 0.0), 2.0);
        close(at(FRAC_PI_3, FRAC_PI_2), -1.0);
        close(at(PI / 8.0, PI / 4.0), 1.0);
    }

    #[test]
    fn generalized_q_uniform_and_point_mass() {
        let uniform = [0.125; 8];
        for sign in Sign::BOTH {
            let (lhs, rhs) = generalized_q_margin(&uniform, [1, 2, 3], sign).unwrap();
            close(lhs, 1.0);
            close(rhs, 0.0);
        }
        for v in 0..8 {
            let mut q = [0.0; 8];
            q[v] = 0.7;
            for sign in Sign::BOTH {
                let (lhs, rhs) = generalized_q_margin(&q, [1, 2, 3], sign).unwrap();
                close(lhs, rhs);
            }
        }
    }

    #[test]
    fn generalized_q_holds_for_quasi_distribution() {
        // The infeasible point's representative, containing −1/4.
        let [d12, d13, d23] = pairs_at(FRAC_PI_3, FRAC_PI_2);
        let report = analyze_pairs(&d12, &d13, &d23).unwrap();
        assert!(report.best.quasi);
        for sign in Sign::BOTH {
            let (lhs, rhs) = generalized_q_margin(&report.best.q, [1, 2, 3], sign).unwrap();
            assert!(lhs >= rhs - EPS, "lhs {lhs} < rhs {rhs}");
        }
    }

    #[test]
    fn decomposition_examples_and_identity() {
        let agree = |pair| PairDistribution::new(pair, [0.5, 0.0, 0.0, 0.5]).unwrap();
        let (wa, wb) = bell_wigner_decomposition(
            &agree(Pair::OneTwo),
            &agree(Pair::TwoThree),
            &agree(Pair::OneThree),
        )
        .unwrap();
        close(wa, 0.0);
        close(wb, 0.0);

        let [d12, d13, d23] = pairs_at(FRAC_PI_3, FRAC_PI_2);
        let (wa, wb) = bell_wigner_decomposition(&d12, &d23, &d13).unwrap();
        close(wa, -0.5);
        close(wb, 0.5);
        // 2·w_a equals the minus-form Bell expression without the absolute
        // value.
        let e12 = crate::quantum::expected_product(&d12);
        let e23 = crate::quantum::expected_product(&d23);
        let e13 = crate::quantum::expected_product(&d13);
        close(1.0 - e13 - (e12 - e23), 2.0 * wa);
        close(1.0 - e13 + (e12 - e23), 2.0 * wb);

        let [d12, d13, d23] = pairs_at(PI / 8.0, PI / 4.0);
        let (wa, wb) = bell_wigner_decomposition(&d12, &d23, &d13).unwrap();
        assert!(wa >= 0.0 && wb >= 0.0);
    }

    #[test]
    fn wigner_margin_matches_triple_entries_when_feasible() {
        let theta = (FRAC_PI_3, 2.0 * FRAC_PI_3);
        let [d12, d13, d23] = pairs_at(theta.0, theta.1);
        let report = analyze_pairs(&d12, &d13, &d23).unwrap();
        assert!(report.interval.nonempty);
        let q = report.best;
        let cfg = AngleConfig::photon(0.0, theta.0, theta.1);
        for arr in Arrangement::all() {
            let margin = wigner_margin_at(&cfg, &arr);
            // p(z_j, z_k, z̄_l) + p(z̄_j, z̄_k, z_l), mapped through the
            // permutation back to (z_1, z_2, z_3) positions.
            let [j, k, l] = arr.perm();
            let [z_j, z_k, z_l] = arr.signs();
            let mut by_apparatus = [Sign::Plus; 3];
            by_apparatus[(j - 1) as usize] = z_j;
            by_apparatus[(k - 1) as usize] = z_k;
            by_apparatus[(l - 1) as usize] = z_l.flip();
            let first = vertex_index(by_apparatus[0], by_apparatus[1], by_apparatus[2]);
            let second = vertex_index(
                by_apparatus[0].flip(),
                by_apparatus[1].flip(),
                by_apparatus[2].flip(),
            );
            let from_triple = q.q[first] + q.q[second];
            assert!(
                (margin - from_triple).abs() <= 1e-10,
                "arrangement {arr:?}: {margin} != {from_triple}"
            );
        }
    }

    #[test]
    fn scan_smoke_two_by_two() {
        let map = scan_grid(FRAC_PI_2, Convention::Photon, Correlation::Negative, 1).unwrap();
        assert_eq!(map.size, 2);
        assert_eq!(map.cells().len(), 4);
    }

    #[test]
    fn scan_cell_values_and_thread_invariance() {
        let map1 = scan_grid(PI / 6.0, Convention::Photon, Correlation::Negative, 1).unwrap();
        assert_eq!(map1.size, 6);
        let cell = map1.cell(2, 3); // (60°, 90°)
        close(cell.bell_minus, -1.0);
        close(cell.wigner1, -0.25);
        assert!(!cell.feasible);

        let map3 = scan_grid(PI / 6.0, Convention::Photon, Correlation::Negative, 3).unwrap();
        assert_eq!(map1, map3);
    }

    #[test]
    fn scan_rejects_nonpositive_step() {
        assert!(matches!(
            scan_grid(0.0, Convention::Photon, Correlation::Negative, 1),
            Err(Error::NonPositiveStep(_))
        ));
    }

    #[test]
    fn region_union_identity_on_coarse_grid() {
        let map = scan_grid(PI / 40.0, Convention::Photon, Correlation::Negative, 2).unwrap();
        for cell in map.cells() {
            let margins = [cell.bell_minus, cell.wigner1, cell.wigner2];
            if margins.iter().any(|m| m.abs() <= tol::VIOLATION_BAND) {
                continue; // boundary cell
            }
            let bell_violated = cell.bell_minus < -tol::VIOLATION_BAND;
            let union_violated =
                cell.wigner1 < -tol::VIOLATION_BAND || cell.wigner2 < -tol::VIOLATION_BAND;
            assert_eq!(bell_violated, union_violated);
        }
    }
}
