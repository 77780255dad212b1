//! The three-valued detection model: outcomes in `{-1, 0, +1}` with `0`
//! meaning "no detection at this apparatus".
//!
//! Distributions here are genuine (nonnegative, normalized) and kept in
//! exact rational arithmetic, so composition, marginalization, and the
//! tower law are identities. The exhaustive enumeration discretizes the
//! 27-cell simplex with entries `k/denominator` and evaluates the Bell
//! expression in pure integer arithmetic: across hundreds of millions of
//! cases, float drift could misclassify boundary-zero margins.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::thread;

use num_integer::binomial;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::quantum::{rational_to_f64, Pair, Sign};
use crate::{fmt, Error, Rational, Result};

/// A detector reading: `-1`, `0` (no detection), or `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trit {
    Minus,
    Zero,
    Plus,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::Minus, Trit::Zero, Trit::Plus];

    pub fn value(self) -> i64 {
        match self {
            Trit::Minus => -1,
            Trit::Zero => 0,
            Trit::Plus => 1,
        }
    }

    pub(crate) fn idx(self) -> usize {
        match self {
            Trit::Minus => 0,
            Trit::Zero => 1,
            Trit::Plus => 2,
        }
    }

    fn from_idx(idx: usize) -> Trit {
        Trit::ALL[idx]
    }
}

impl From<Sign> for Trit {
    fn from(sign: Sign) -> Trit {
        match sign {
            Sign::Minus => Trit::Minus,
            Sign::Plus => Trit::Plus,
        }
    }
}

/// Cell index of `(z_1, z_2, z_3)` in lexicographic `(-1, 0, +1)` order.
pub fn cell_index(z1: Trit, z2: Trit, z3: Trit) -> usize {
    z1.idx() * 9 + z2.idx() * 3 + z3.idx()
}

/// Outcome triple at a cell index.
pub fn cell_trits(index: usize) -> [Trit; 3] {
    [
        Trit::from_idx(index / 9),
        Trit::from_idx(index / 3 % 3),
        Trit::from_idx(index % 3),
    ]
}

/// A genuine joint distribution over `{-1, 0, +1}³`: 27 nonnegative
/// rational entries summing to one exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTripleDistribution {
    p: [Rational; 27],
}

impl ExtendedTripleDistribution {
    pub fn new(p: [Rational; 27]) -> Result<ExtendedTripleDistribution> {
        if let Some(index) = p.iter().position(|x| x < &Rational::zero()) {
            return Err(Error::NegativeEntry { index });
        }
        let total: Rational = p.iter().copied().sum();
        if total != Rational::from_integer(1) {
            return Err(Error::NotNormalized {
                sum: rational_to_f64(total),
            });
        }
        Ok(ExtendedTripleDistribution { p })
    }

    /// The discretized distribution with entries `counts[i] / denominator`.
    pub fn from_composition(
        counts: &[u32; 27],
        denominator: u32,
    ) -> Result<ExtendedTripleDistribution> {
        if denominator == 0 {
            return Err(Error::ZeroDenominator);
        }
        let mut p = [Rational::zero(); 27];
        for (slot, &k) in p.iter_mut().zip(counts.iter()) {
            *slot = Rational::new(k as i128, denominator as i128);
        }
        ExtendedTripleDistribution::new(p)
    }

    pub fn prob(&self, z1: Trit, z2: Trit, z3: Trit) -> Rational {
        self.p[cell_index(z1, z2, z3)]
    }

    pub fn entries(&self) -> &[Rational; 27] {
        &self.p
    }

    /// Marginal probability that apparatus `j` reads zero.
    pub fn zero_probability(&self, j: u8) -> Result<Rational> {
        if !(1..=3).contains(&j) {
            return Err(Error::ApparatusIndex(j));
        }
        let mut total = Rational::zero();
        for (index, &p) in self.p.iter().enumerate() {
            if cell_trits(index)[(j - 1) as usize] == Trit::Zero {
                total += p;
            }
        }
        Ok(total)
    }
}

/// `E[Z_j · Z_k]` over all 27 cells; cells where either variable reads
/// zero contribute nothing.
pub fn extended_expected_product(d: &ExtendedTripleDistribution, pair: Pair) -> Rational {
    let (j, k) = pair.indices();
    let mut sum = Rational::zero();
    for (index, &p) in d.entries().iter().enumerate() {
        let z = cell_trits(index);
        let weight = z[(j - 1) as usize].value() * z[(k - 1) as usize].value();
        if weight != 0 {
            sum += Rational::from_integer(weight as i128) * p;
        }
    }
    sum
}

/// Conditional distribution of a configuration's two detected outcomes
/// over `{-1,+1}²`, given that the third apparatus read zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPairTable {
    /// `[--, -+, +-, ++]` order.
    p: [Rational; 4],
}

impl ConditionalPairTable {
    pub fn new(p: [Rational; 4]) -> Result<ConditionalPairTable> {
        if let Some(index) = p.iter().position(|x| x < &Rational::zero()) {
            return Err(Error::NegativeEntry { index });
        }
        let total: Rational = p.iter().copied().sum();
        if total != Rational::from_integer(1) {
            return Err(Error::NotNormalized {
                sum: rational_to_f64(total),
            });
        }
        Ok(ConditionalPairTable { p })
    }

    /// Uniform table, the neutral choice for configurations of zero mass.
    pub fn uniform() -> ConditionalPairTable {
        ConditionalPairTable {
            p: [Rational::new(1, 4); 4],
        }
    }

    pub fn prob(&self, z_j: Sign, z_k: Sign) -> Rational {
        self.p[z_j.idx() * 2 + z_k.idx()]
    }

    /// `E[Z_j · Z_k]` under this conditional table.
    pub fn expected_product(&self) -> Rational {
        self.p[0] - self.p[1] - self.p[2] + self.p[3]
    }
}

/// Builds the joint distribution from per-configuration conditionals by
/// the total-probability law: `P(z_j, z_k, 0) = P(z_j, z_k | Z_l = 0) ·
/// P(Z_l = 0)`.
///
/// Configurations follow [`Pair::ALL`] order; configuration `(j,k)` means
/// the remaining apparatus read zero. There is never detection at all
/// three apparatuses, so cells with three nonzero readings get
/// probability zero, as do cells with exactly one detection. Mass not
/// assigned to any configuration goes to the no-detection cell
/// `(0, 0, 0)`.
pub fn compose_from_conditionals(
    conditionals: &[ConditionalPairTable; 3],
    config_probs: &[Rational; 3],
) -> Result<ExtendedTripleDistribution> {
    let mut mass = Rational::zero();
    for (index, prob) in config_probs.iter().enumerate() {
        if prob < &Rational::zero() {
            return Err(Error::NegativeEntry { index });
        }
        mass += *prob;
    }
    if mass > Rational::from_integer(1) {
        return Err(Error::ConfigMassExceedsOne);
    }

    let mut p = [Rational::zero(); 27];
    for (config_idx, pair) in Pair::ALL.into_iter().enumerate() {
        let zero_position = (pair.third() - 1) as usize;
        for z_j in Sign::BOTH {
            for z_k in Sign::BOTH {
                let mut trits = [Trit::Zero; 3];
                let (j, k) = pair.indices();
                trits[(j - 1) as usize] = z_j.into();
                trits[(k - 1) as usize] = z_k.into();
                debug_assert_eq!(trits[zero_position], Trit::Zero);
                p[cell_index(trits[0], trits[1], trits[2])] =
                    conditionals[config_idx].prob(z_j, z_k) * config_probs[config_idx];
            }
        }
    }
    p[cell_index(Trit::Zero, Trit::Zero, Trit::Zero)] = Rational::from_integer(1) - mass;
    ExtendedTripleDistribution::new(p)
}

/// Inverts [`compose_from_conditionals`] for one configuration: restricts
/// the joint to the cells where exactly that configuration fired and
/// renormalizes. Exact in rational arithmetic.
pub fn marginal_conditional(
    d: &ExtendedTripleDistribution,
    config: Pair,
) -> Result<ConditionalPairTable> {
    let (j, k) = config.indices();
    let mut cells = [Rational::zero(); 4];
    let mut mass = Rational::zero();
    for z_j in Sign::BOTH {
        for z_k in Sign::BOTH {
            let mut trits = [Trit::Zero; 3];
            trits[(j - 1) as usize] = z_j.into();
            trits[(k - 1) as usize] = z_k.into();
            let p = d.prob(trits[0], trits[1], trits[2]);
            cells[z_j.idx() * 2 + z_k.idx()] = p;
            mass += p;
        }
    }
    if mass.is_zero() {
        return Err(Error::ZeroMarginalConditioning);
    }
    for cell in &mut cells {
        *cell /= mass;
    }
    ConditionalPairTable::new(cells)
}

/// Bell margin `(1 ± E_13) − |E_12 ± E_23|` on an extended distribution.
/// Nonnegative for every genuine distribution over `{-1, 0, +1}³`.
pub fn bell_margin_extended(d: &ExtendedTripleDistribution, sign: Sign) -> Result<Rational> {
    if let Some(index) = d.entries().iter().position(|x| x < &Rational::zero()) {
        return Err(Error::NegativeEntry { index });
    }
    let e12 = extended_expected_product(d, Pair::OneTwo);
    let e13 = extended_expected_product(d, Pair::OneThree);
    let e23 = extended_expected_product(d, Pair::TwoThree);
    let one = Rational::from_integer(1);
    Ok(match sign {
        Sign::Minus => one - e13 - (e12 - e23).abs(),
        Sign::Plus => one + e13 - (e12 + e23).abs(),
    })
}

/// `1 − (P(Z_1=0) + P(Z_2=0) + P(Z_3=0))`: the worst-case bound left after
/// substituting extremal conditional expectations into the Bell
/// inequality. Nonnegative whenever the three inputs are configuration
/// probabilities of a single run.
pub fn detection_sum_margin(p: &[Rational; 3]) -> Rational {
    Rational::from_integer(1) - p[0] - p[1] - p[2]
}

/// Count tables for the extended model: nine outcome cells per
/// configuration, including the undetected rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtendedCounts {
    counts: [[u64; 9]; 3],
}

impl ExtendedCounts {
    pub fn from_counts(counts: [[u64; 9]; 3]) -> ExtendedCounts {
        ExtendedCounts { counts }
    }

    pub fn count(&self, config: Pair, a: Trit, b: Trit) -> u64 {
        self.counts[config.idx()][a.idx() * 3 + b.idx()]
    }

    /// `n_{j,k}`: all nine cells of one configuration, undetected events
    /// included.
    pub fn config_total(&self, config: Pair) -> u64 {
        self.counts[config.idx()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// The three estimates for one configuration and their exact relationship.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedEstimates {
    /// `(n^{--} − n^{-+} − n^{+-} + n^{++}) / n_{j,k}`.
    pub conditional_expectation: Rational,
    /// `n_{j,k} / N`.
    pub config_probability: Rational,
    /// Their product, `(n^{--} − n^{-+} − n^{+-} + n^{++}) / N`.
    pub global_expectation: Rational,
}

/// Computes the conditional, configuration, and global estimates; the
/// first two multiply to the third as exact rationals.
pub fn extended_estimates(counts: &ExtendedCounts, config: Pair) -> Result<ExtendedEstimates> {
    let n_config = counts.config_total(config);
    if n_config == 0 {
        return Err(Error::EmptyConfiguration(config));
    }
    let total = counts.total();
    let signed = counts.count(config, Trit::Minus, Trit::Minus) as i128
        - counts.count(config, Trit::Minus, Trit::Plus) as i128
        - counts.count(config, Trit::Plus, Trit::Minus) as i128
        + counts.count(config, Trit::Plus, Trit::Plus) as i128;
    let conditional_expectation = Rational::new(signed, n_config as i128);
    let config_probability = Rational::new(n_config as i128, total as i128);
    Ok(ExtendedEstimates {
        conditional_expectation,
        config_probability,
        global_expectation: conditional_expectation * config_probability,
    })
}

/// Frequency histogram over fixed-width, left-closed bins `[i·w, (i+1)·w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    bins: BTreeMap<i32, u64>,
    pub min_value: f64,
    pub max_value: f64,
    total: u64,
}

/// Default bin width for Bell-expression histograms (range `[-2, 2]`).
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;

impl Histogram {
    pub fn new(bin_width: f64) -> Histogram {
        Histogram {
            bin_width,
            bins: BTreeMap::new(),
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
            total: 0,
        }
    }

    pub(crate) fn from_parts(
        bin_width: f64,
        bins: BTreeMap<i32, u64>,
        min_value: f64,
        max_value: f64,
    ) -> Histogram {
        let total = bins.values().sum();
        Histogram {
            bin_width,
            bins,
            min_value,
            max_value,
            total,
        }
    }

    pub fn record(&mut self, value: f64) {
        let index = (value / self.bin_width).floor() as i32;
        *self.bins.entry(index).or_insert(0) += 1;
        self.min_value = self.min_value.min(value);
        self.max_value = self.max_value.max(value);
        self.total += 1;
    }

    /// Nonempty bins in ascending index order.
    pub fn bins(&self) -> impl Iterator<Item = (i32, u64)> + '_ {
        self.bins.iter().map(|(&i, &c)| (i, c))
    }

    pub fn bin_bounds(&self, index: i32) -> (f64, f64) {
        (
            index as f64 * self.bin_width,
            (index + 1) as f64 * self.bin_width,
        )
    }

    /// Total recorded values; equals the sum of all bin counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Writes `bin_lo,bin_hi,count` rows in ascending bin order.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "bin_lo,bin_hi,count")?;
        for (index, count) in self.bins() {
            let (lo, hi) = self.bin_bounds(index);
            writeln!(out, "{},{},{count}", fmt::sig12(lo), fmt::sig12(hi))?;
        }
        Ok(())
    }
}

/// How [`enumerate_simplex`] visits the discretized simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Every nonnegative integer 27-tuple summing to the denominator.
    Full,
    /// `count` uniformly sampled tuples (seeded), for desk-scale runs.
    Sample { count: u64, seed: u64 },
}

/// Largest denominator admitted in full mode; the composition count grows
/// combinatorially beyond it.
pub const FULL_MODE_MAX_DENOMINATOR: u32 = 10;

/// Number of nonnegative integer 27-tuples summing to `denominator`:
/// `C(denominator + 26, 26)`.
pub fn compositions_count(denominator: u32) -> u128 {
    binomial(denominator as u128 + 26, 26)
}

/// Outcome of an enumeration run. The minimum margin is reported as the
/// exact integer numerator over the common denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationSummary {
    pub denominator: u32,
    pub tuples: u64,
    pub min_margin_num: i64,
    pub max_margin_num: i64,
    /// Tuples with a strictly negative margin (always zero: the margin is
    /// nonnegative for every genuine distribution).
    pub violations: u64,
    pub histogram: Histogram,
}

impl EnumerationSummary {
    pub fn min_margin(&self) -> f64 {
        self.min_margin_num as f64 / self.denominator as f64
    }
}

/// `(z_1·z_2, z_1·z_3, z_2·z_3)` per cell in [`cell_trits`] order.
const fn cell_weights() -> [[i64; 3]; 27] {
    let mut out = [[0i64; 3]; 27];
    let mut cell = 0;
    while cell < 27 {
        let v1 = (cell / 9) as i64 - 1;
        let v2 = (cell / 3 % 3) as i64 - 1;
        let v3 = (cell % 3) as i64 - 1;
        out[cell] = [v1 * v2, v1 * v3, v2 * v3];
        cell += 1;
    }
    out
}

const WEIGHTS: [[i64; 3]; 27] = cell_weights();

/// Scaled Bell expression `D·(1 − E_13 − |E_12 − E_23|)` for a composition
/// with partial weight sums `s12, s13, s23`; an exact integer.
#[inline]
fn margin_numerator(denominator: i64, s12: i64, s13: i64, s23: i64) -> i64 {
    denominator - s13 - (s12 - s23).abs()
}

/// Accumulator for one enumeration worker. Bin indices are shifted by
/// `+20` so the whole `[-2, 2]` margin range fits a flat array.
struct Accumulator {
    bins: [u64; 41],
    min_num: i64,
    max_num: i64,
    tuples: u64,
    violations: u64,
}

impl Accumulator {
    fn new() -> Accumulator {
        Accumulator {
            bins: [0; 41],
            min_num: i64::MAX,
            max_num: i64::MIN,
            tuples: 0,
            violations: 0,
        }
    }

    #[inline]
    fn record(&mut self, margin_num: i64, bin_lut: &[u8]) {
        self.tuples += 1;
        let shift = (bin_lut.len() as i64 - 1) / 2;
        self.bins[bin_lut[(margin_num + shift) as usize] as usize] += 1;
        if margin_num < self.min_num {
            self.min_num = margin_num;
        }
        if margin_num > self.max_num {
            self.max_num = margin_num;
        }
        if margin_num < 0 {
            self.violations += 1;
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.bins.iter_mut().zip(other.bins.iter()) {
            *a += b;
        }
        self.min_num = self.min_num.min(other.min_num);
        self.max_num = self.max_num.max(other.max_num);
        self.tuples += other.tuples;
        self.violations += other.violations;
    }
}

/// Recursive enumeration of the suffix starting at `cell`, with the last
/// two cells unrolled into a linear sweep: moving one unit from the final
/// cell to the one before changes each weight sum by a constant.
fn enumerate_suffix(
    cell: usize,
    rem: u32,
    sums: [i64; 3],
    denominator: i64,
    bin_lut: &[u8],
    acc: &mut Accumulator,
) {
    if cell == 25 {
        let w25 = WEIGHTS[25];
        let w26 = WEIGHTS[26];
        let mut s12 = sums[0] + rem as i64 * w26[0];
        let mut s13 = sums[1] + rem as i64 * w26[1];
        let mut s23 = sums[2] + rem as i64 * w26[2];
        let (d12, d13, d23) = (w25[0] - w26[0], w25[1] - w26[1], w25[2] - w26[2]);
        for _ in 0..=rem {
            acc.record(margin_numerator(denominator, s12, s13, s23), bin_lut);
            s12 += d12;
            s13 += d13;
            s23 += d23;
        }
        return;
    }
    let w = WEIGHTS[cell];
    let mut sums_k = sums;
    for k in 0..=rem {
        enumerate_suffix(cell + 1, rem - k, sums_k, denominator, bin_lut, acc);
        sums_k[0] += w[0];
        sums_k[1] += w[1];
        sums_k[2] += w[2];
    }
}

/// Shifted-bin lookup table: margin numerator `m ∈ [-2D, 2D]` maps to the
/// flat bin slot for the value `m/D` under 0.1-wide left-closed bins.
fn bin_lut(denominator: i64) -> Vec<u8> {
    let span = 2 * denominator;
    (-span..=span)
        .map(|m| (20 + (10 * m).div_euclid(denominator)) as u8)
        .collect()
}

fn accumulator_histogram(acc: &Accumulator, denominator: u32) -> Histogram {
    let mut bins = BTreeMap::new();
    for (slot, &count) in acc.bins.iter().enumerate() {
        if count > 0 {
            bins.insert(slot as i32 - 20, count);
        }
    }
    Histogram::from_parts(
        DEFAULT_BIN_WIDTH,
        bins,
        acc.min_num as f64 / denominator as f64,
        acc.max_num as f64 / denominator as f64,
    )
}

/// Visits every nonnegative integer 27-tuple summing to `denominator` in
/// lexicographic order. Reference-grade path used by tests and small
/// denominators; the histogram runs use the specialized sweep above.
pub fn for_each_composition<F: FnMut(&[u32; 27])>(denominator: u32, mut visit: F) {
    fn recurse<F: FnMut(&[u32; 27])>(cell: usize, rem: u32, tuple: &mut [u32; 27], visit: &mut F) {
        if cell == 26 {
            tuple[26] = rem;
            visit(tuple);
            return;
        }
        for k in 0..=rem {
            tuple[cell] = k;
            recurse(cell + 1, rem - k, tuple, visit);
        }
        tuple[cell] = 0;
    }
    let mut tuple = [0u32; 27];
    recurse(0, denominator, &mut tuple, &mut visit);
}

/// Uniformly samples a composition by choosing 26 bar positions among
/// `denominator + 26` slots (Floyd's algorithm) and reading off the gaps.
fn sample_composition(rng: &mut ChaCha12Rng, denominator: u32) -> [u32; 27] {
    let slots = denominator + 26;
    let mut bars: Vec<u32> = Vec::with_capacity(26);
    for j in (slots - 26)..slots {
        let t = rng.gen_range(0..=j);
        if bars.contains(&t) {
            bars.push(j);
        } else {
            bars.push(t);
        }
    }
    bars.sort_unstable();
    let mut tuple = [0u32; 27];
    let mut prev = -1i64;
    for (i, &bar) in bars.iter().enumerate() {
        tuple[i] = (bar as i64 - prev - 1) as u32;
        prev = bar as i64;
    }
    tuple[26] = (slots as i64 - 1 - prev) as u32;
    tuple
}

fn margin_numerator_of(tuple: &[u32; 27], denominator: i64) -> i64 {
    let mut sums = [0i64; 3];
    for (cell, &k) in tuple.iter().enumerate() {
        sums[0] += k as i64 * WEIGHTS[cell][0];
        sums[1] += k as i64 * WEIGHTS[cell][1];
        sums[2] += k as i64 * WEIGHTS[cell][2];
    }
    margin_numerator(denominator, sums[0], sums[1], sums[2])
}

fn enumerate_full(denominator: u32, threads: usize) -> EnumerationSummary {
    let d = denominator as i64;
    let lut = bin_lut(d);

    // Partition by the first two cell counts: independent sub-enumerations
    // with a deterministic, order-insensitive merge.
    let mut tasks = Vec::new();
    for k0 in 0..=denominator {
        for k1 in 0..=(denominator - k0) {
            tasks.push((k0, k1));
        }
    }

    let workers = threads.max(1).min(tasks.len());
    let run_task = |&(k0, k1): &(u32, u32), acc: &mut Accumulator| {
        let sums = [
            k0 as i64 * WEIGHTS[0][0] + k1 as i64 * WEIGHTS[1][0],
            k0 as i64 * WEIGHTS[0][1] + k1 as i64 * WEIGHTS[1][1],
            k0 as i64 * WEIGHTS[0][2] + k1 as i64 * WEIGHTS[1][2],
        ];
        enumerate_suffix(2, denominator - k0 - k1, sums, d, &lut, acc);
    };

    let mut total = Accumulator::new();
    if workers == 1 {
        for task in &tasks {
            run_task(task, &mut total);
        }
    } else {
        let partials: Vec<Accumulator> = thread::scope(|scope| {
            let mut handles = Vec::new();
            for worker in 0..workers {
                let tasks = &tasks;
                let run_task = &run_task;
                handles.push(scope.spawn(move || {
                    let mut acc = Accumulator::new();
                    for task in tasks.iter().skip(worker).step_by(workers) {
                        run_task(task, &mut acc);
                    }
                    acc
                }));
            }
            handles
                .into_iter()
                .map(|h| h.join().expect("enumeration worker panicked"))
                .collect()
        });
        for partial in &partials {
            total.merge(partial);
        }
    }

    EnumerationSummary {
        denominator,
        tuples: total.tuples,
        min_margin_num: total.min_num,
        max_margin_num: total.max_num,
        violations: total.violations,
        histogram: accumulator_histogram(&total, denominator),
    }
}

fn enumerate_sample(denominator: u32, count: u64, seed: u64, threads: usize) -> EnumerationSummary {
    let d = denominator as i64;
    let lut = bin_lut(d);
    let workers = threads.max(1);

    // Each sample owns a ChaCha stream derived from (seed, index), rebuilt
    // from scratch so the word position starts at zero: the result is then
    // identical for any worker count.
    let run_range = |worker: usize| {
        let mut acc = Accumulator::new();
        let mut index = worker as u64;
        while index < count {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(index);
            let tuple = sample_composition(&mut rng, denominator);
            acc.record(margin_numerator_of(&tuple, d), &lut);
            index += workers as u64;
        }
        acc
    };

    let mut total = Accumulator::new();
    if workers == 1 {
        total = run_range(0);
    } else {
        let partials: Vec<Accumulator> = thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|worker| scope.spawn(move || run_range(worker)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        });
        for partial in &partials {
            total.merge(partial);
        }
    }

    EnumerationSummary {
        denominator,
        tuples: total.tuples,
        min_margin_num: total.min_num,
        max_margin_num: total.max_num,
        violations: total.violations,
        histogram: accumulator_histogram(&total, denominator),
    }
}

/// Evaluates the Bell expression `1 − E_13 − |E_12 − E_23|` over the
/// discretized simplex with entries `k/denominator`, in exact integer
/// arithmetic, and histograms the values.
///
/// Full mode visits every composition — `C(denominator+26, 26)` of them —
/// and is guarded at denominator [`FULL_MODE_MAX_DENOMINATOR`]. The result
/// is identical for any thread count.
pub fn enumerate_simplex(
    denominator: u32,
    mode: EnumerationMode,
    threads: usize,
) -> Result<EnumerationSummary> {
    if denominator == 0 {
        return Err(Error::ZeroDenominator);
    }
    match mode {
        EnumerationMode::Full => {
            if denominator > FULL_MODE_MAX_DENOMINATOR {
                return Err(Error::EnumerationTooLarge {
                    denominator,
                    combinations: compositions_count(denominator),
                    max: FULL_MODE_MAX_DENOMINATOR,
                });
            }
            Ok(enumerate_full(denominator, threads))
        }
        EnumerationMode::Sample { count, seed } => {
            Ok(enumerate_sample(denominator, count, seed, threads))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    #[test]
    fn expected_product_point_masses() {
        let mut p = [Rational::zero(); 27];
        p[cell_index(Trit::Zero, Trit::Zero, Trit::Zero)] = ratio(1, 1);
        let d = ExtendedTripleDistribution::new(p).unwrap();
        for pair in Pair::ALL {
            assert_eq!(extended_expected_product(&d, pair), ratio(0, 1));
        }

        let mut p = [Rational::zero(); 27];
        p[cell_index(Trit::Plus, Trit::Plus, Trit::Zero)] = ratio(1, 1);
        let d = ExtendedTripleDistribution::new(p).unwrap();
        assert_eq!(extended_expected_product(&d, Pair::OneTwo), ratio(1, 1));
        assert_eq!(extended_expected_product(&d, Pair::OneThree), ratio(0, 1));
        assert_eq!(extended_expected_product(&d, Pair::TwoThree), ratio(0, 1));
    }

    #[test]
    fn expected_product_uniform_corners() {
        let mut p = [Rational::zero(); 27];
        for z1 in [Trit::Minus, Trit::Plus] {
            for z2 in [Trit::Minus, Trit::Plus] {
                for z3 in [Trit::Minus, Trit::Plus] {
                    p[cell_index(z1, z2, z3)] = ratio(1, 8);
                }
            }
        }
        let d = ExtendedTripleDistribution::new(p).unwrap();
        for pair in Pair::ALL {
            assert_eq!(extended_expected_product(&d, pair), ratio(0, 1));
        }
    }

    #[test]
    fn compose_product_rule() {
        let point_pp = {
            let mut p = [Rational::zero(); 4];
            p[3] = ratio(1, 1);
            ConditionalPairTable::new(p).unwrap()
        };
        let conds = [
            point_pp,
            ConditionalPairTable::uniform(),
            ConditionalPairTable::uniform(),
        ];
        let probs = [ratio(1, 3), ratio(0, 1), ratio(0, 1)];
        let d = compose_from_conditionals(&conds, &probs).unwrap();
        assert_eq!(d.prob(Trit::Plus, Trit::Plus, Trit::Zero), ratio(1, 3));
        assert_eq!(d.prob(Trit::Zero, Trit::Zero, Trit::Zero), ratio(2, 3));
    }

    #[test]
    fn compose_remainder_goes_to_no_detection() {
        let conds = [ConditionalPairTable::uniform(); 3];
        let probs = [ratio(3, 10), ratio(3, 10), ratio(3, 10)];
        let d = compose_from_conditionals(&conds, &probs).unwrap();
        assert_eq!(d.prob(Trit::Zero, Trit::Zero, Trit::Zero), ratio(1, 10));
        // Corner cells stay empty: never three detections at once.
        assert_eq!(d.prob(Trit::Plus, Trit::Plus, Trit::Plus), ratio(0, 1));
        assert_eq!(d.prob(Trit::Minus, Trit::Plus, Trit::Minus), ratio(0, 1));
    }

    #[test]
    fn compose_rejects_excess_mass() {
        let conds = [ConditionalPairTable::uniform(); 3];
        let probs = [ratio(1, 2), ratio(1, 2), ratio(1, 2)];
        assert_eq!(
            compose_from_conditionals(&conds, &probs),
            Err(Error::ConfigMassExceedsOne)
        );
    }

    #[test]
    fn composed_zero_probabilities_and_conditional_expectations() {
        // Anticorrelated, correlated, and tilted conditionals.
        let table = |agree: Rational| {
            let disagree = (ratio(1, 1) - agree - agree) / ratio(2, 1);
            ConditionalPairTable::new([agree, disagree, disagree, agree]).unwrap()
        };
        let conds = [table(ratio(0, 1)), table(ratio(1, 2)), table(ratio(1, 8))];
        let probs = [ratio(1, 4), ratio(1, 4), ratio(2, 5)];
        let remainder = ratio(1, 10);
        let d = compose_from_conditionals(&conds, &probs).unwrap();

        // Z_l reads zero exactly in configuration (j,k) and in the
        // no-detection cell.
        assert_eq!(d.zero_probability(3).unwrap(), probs[0] + remainder);
        assert_eq!(d.zero_probability(2).unwrap(), probs[1] + remainder);
        assert_eq!(d.zero_probability(1).unwrap(), probs[2] + remainder);
        assert!(d.zero_probability(4).is_err());

        // E[Z_j·Z_k] collapses to the configuration's own contribution:
        // the other configurations zero one of the two factors.
        for (i, pair) in Pair::ALL.into_iter().enumerate() {
            assert_eq!(
                extended_expected_product(&d, pair),
                conds[i].expected_product() * probs[i]
            );
        }
    }

    #[test]
    fn summary_min_margin_is_the_exact_ratio() {
        let summary = enumerate_simplex(2, EnumerationMode::Full, 1).unwrap();
        assert_eq!(summary.min_margin(), summary.min_margin_num as f64 / 2.0);
        assert_eq!(summary.min_margin_num, 0);
    }

    #[test]
    fn compose_then_marginalize_recovers_conditionals_exactly() {
        // Exact tables matching the closed-form values at (0, 60°, 90°):
        // sin² ∈ {3/4, 1, 1/4}.
        let quantum = |agree: Rational| {
            let disagree = (ratio(1, 1) - agree - agree) / ratio(2, 1);
            ConditionalPairTable::new([agree, disagree, disagree, agree]).unwrap()
        };
        let conds = [
            quantum(ratio(3, 8)),
            quantum(ratio(1, 2)),
            quantum(ratio(1, 8)),
        ];
        let probs = [ratio(1, 3), ratio(1, 3), ratio(1, 3)];
        let d = compose_from_conditionals(&conds, &probs).unwrap();
        for (i, pair) in Pair::ALL.into_iter().enumerate() {
            assert_eq!(marginal_conditional(&d, pair).unwrap(), conds[i]);
        }
    }

    #[test]
    fn tower_law_is_exact() {
        // E[Z_j·Z_k] = Σ_z P(Z_l=z)·E[Z_j·Z_k | Z_l=z] for arbitrary
        // rational distributions, checked by direct slice sums.
        let mut entries = [Rational::zero(); 27];
        let weights: [i128; 27] = [
            3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4, 6, 2, 6, 4, 3, 3, 8,
        ];
        let total: i128 = weights.iter().sum();
        for (slot, &w) in entries.iter_mut().zip(weights.iter()) {
            *slot = Rational::new(w, total);
        }
        let d = ExtendedTripleDistribution::new(entries).unwrap();

        for pair in Pair::ALL {
            let l = pair.third();
            let lhs = extended_expected_product(&d, pair);
            let mut rhs = Rational::zero();
            for z in Trit::ALL {
                // Slice mass and sliced product expectation at Z_l = z.
                let mut mass = Rational::zero();
                let mut product = Rational::zero();
                for (index, &p) in d.entries().iter().enumerate() {
                    let trits = cell_trits(index);
                    if trits[(l - 1) as usize] != z {
                        continue;
                    }
                    mass += p;
                    let (j, k) = pair.indices();
                    let w = trits[(j - 1) as usize].value() * trits[(k - 1) as usize].value();
                    product += Rational::from_integer(w as i128) * p;
                }
                if !mass.is_zero() {
                    rhs += (product / mass) * mass;
                }
            }
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn extended_margin_trivial_cases() {
        let mut p = [Rational::zero(); 27];
        p[cell_index(Trit::Zero, Trit::Zero, Trit::Zero)] = ratio(1, 1);
        let d = ExtendedTripleDistribution::new(p).unwrap();
        assert_eq!(bell_margin_extended(&d, Sign::Minus).unwrap(), ratio(1, 1));
        assert_eq!(bell_margin_extended(&d, Sign::Plus).unwrap(), ratio(1, 1));

        let uniform = ExtendedTripleDistribution::new([ratio(1, 27); 27]).unwrap();
        assert_eq!(
            bell_margin_extended(&uniform, Sign::Minus).unwrap(),
            ratio(1, 1)
        );
    }

    #[test]
    fn detection_sum_examples() {
        assert_eq!(
            detection_sum_margin(&[ratio(1, 3), ratio(1, 3), ratio(1, 3)]),
            ratio(0, 1)
        );
        assert_eq!(
            detection_sum_margin(&[ratio(0, 1), ratio(0, 1), ratio(0, 1)]),
            ratio(1, 1)
        );
    }

    #[test]
    fn extended_estimates_identity() {
        let mut counts = [[0u64; 9]; 3];
        counts[0] = [1, 0, 0, 0, 0, 0, 0, 0, 1]; // (-,-) and (+,+)
        counts[1] = [1; 9];
        counts[2] = [2, 1, 0, 3, 4, 0, 1, 1, 2];
        let ec = ExtendedCounts::from_counts(counts);
        let est12 = extended_estimates(&ec, Pair::OneTwo).unwrap();
        assert_eq!(est12.conditional_expectation, ratio(1, 1));
        let est13 = extended_estimates(&ec, Pair::OneThree).unwrap();
        assert_eq!(est13.conditional_expectation, ratio(0, 1));
        assert_eq!(est13.config_probability, ratio(9, ec.total() as i128));
        for pair in Pair::ALL {
            let est = extended_estimates(&ec, pair).unwrap();
            assert_eq!(
                est.conditional_expectation * est.config_probability,
                est.global_expectation
            );
        }
    }

    #[test]
    fn extended_estimates_empty_config() {
        let ec = ExtendedCounts::from_counts([[0; 9], [1; 9], [1; 9]]);
        assert_eq!(
            extended_estimates(&ec, Pair::OneTwo),
            Err(Error::EmptyConfiguration(Pair::OneTwo))
        );
    }

    #[test]
    fn composition_counts_match_stars_and_bars() {
        assert_eq!(compositions_count(1), 27);
        assert_eq!(compositions_count(2), 378);
        assert_eq!(compositions_count(4), 27_405);
        assert_eq!(compositions_count(10), 254_186_856);

        let mut seen = 0u64;
        for_each_composition(2, |_| seen += 1);
        assert_eq!(seen, 378);
    }

    #[test]
    fn enumeration_denominator_one_visits_point_masses() {
        let summary = enumerate_simplex(1, EnumerationMode::Full, 1).unwrap();
        assert_eq!(summary.tuples, 27);
        assert!(summary.min_margin_num >= 0);
        assert_eq!(summary.violations, 0);
        assert_eq!(summary.histogram.total(), 27);
    }

    #[test]
    fn enumeration_matches_reference_path() {
        for denominator in [1u32, 2, 3] {
            let summary = enumerate_simplex(denominator, EnumerationMode::Full, 2).unwrap();
            let mut count = 0u64;
            let mut min_num = i64::MAX;
            for_each_composition(denominator, |tuple| {
                count += 1;
                min_num = min_num.min(margin_numerator_of(tuple, denominator as i64));
            });
            assert_eq!(summary.tuples, count);
            assert_eq!(summary.tuples as u128, compositions_count(denominator));
            assert_eq!(summary.min_margin_num, min_num);
        }
    }

    #[test]
    fn enumeration_thread_count_does_not_change_result() {
        let one = enumerate_simplex(4, EnumerationMode::Full, 1).unwrap();
        let many = enumerate_simplex(4, EnumerationMode::Full, 3).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.tuples, 27_405);
        assert_eq!(one.violations, 0);
    }

    #[test]
    fn enumeration_guard_reports_composition_count() {
        match enumerate_simplex(11, EnumerationMode::Full, 1) {
            Err(Error::EnumerationTooLarge { combinations, .. }) => {
                assert_eq!(combinations, compositions_count(11));
            }
            other => panic!("expected guard error, got {other:?}"),
        }
        assert_eq!(
            enumerate_simplex(0, EnumerationMode::Full, 1),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn sampling_is_deterministic_and_thread_invariant() {
        let mode = EnumerationMode::Sample {
            count: 500,
            seed: 42,
        };
        let a = enumerate_simplex(10, mode, 1).unwrap();
        let b = enumerate_simplex(10, mode, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tuples, 500);
        assert!(a.min_margin_num >= 0);

        let other_seed = enumerate_simplex(
            10,
            EnumerationMode::Sample {
                count: 500,
                seed: 43,
            },
            1,
        )
        .unwrap();
        assert_ne!(a, other_seed);
    }

    #[test]
    fn sampled_compositions_sum_to_denominator() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for denominator in [1u32, 2, 10, 100] {
            for _ in 0..50 {
                let tuple = sample_composition(&mut rng, denominator);
                assert_eq!(tuple.iter().sum::<u32>(), denominator);
            }
        }
    }

    #[test]
    fn histogram_bins_are_left_closed() {
        let mut h = Histogram::new(0.1);
        h.record(0.0);
        h.record(0.05);
        h.record(-0.05);
        h.record(0.1);
        let bins: Vec<(i32, u64)> = h.bins().collect();
        assert_eq!(bins, vec![(-1, 1), (0, 2), (1, 1)]);
        assert_eq!(h.total(), 4);
    }
}
