//! Modified band depth and modified epigraph index.
//!
//! Both depths reduce to per-column rank counts: at each grid column, every
//! curve value only needs to know how many sample values lie below, tie with,
//! and lie above it. The counts are integers, so depths are kept as exact
//! integer numerators over a common denominator and only converted to `f64`
//! at the edges. That makes fast-vs-brute comparisons exact, makes results
//! independent of summation order, and lets downstream stages rank depth
//! values without any floating-point ties.

use crate::error::Error;

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

/// A functional sample: `n` curves observed on a shared grid of `m` points.
///
/// Stored row-major (curve-major). Construction validates shape and
/// finiteness so the depth routines can assume clean input.
#[derive(Debug, Clone)]
pub struct FunctionalSample {
    values: Vec<f64>,
    n: usize,
    m: usize,
}

impl FunctionalSample {
    /// Builds a sample from one row per curve.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, Error> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewCurves { n });
        }
        let m = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::RaggedSample {
                    row: i + 1,
                    got: row.len(),
                    expected: m,
                });
            }
        }
        let mut values = Vec::with_capacity(n * m);
        for row in &rows {
            values.extend_from_slice(row);
        }
        Self::from_flat(n, m, values)
    }

    /// Builds a sample from a flat row-major buffer of `n * m` values.
    pub fn from_flat(n: usize, m: usize, values: Vec<f64>) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::TooFewCurves { n });
        }
        if m == 0 || values.len() != n * m {
            return Err(Error::Shape(format!(
                "expected {n} x {m} = {} values, got {}",
                n * m,
                values.len()
            )));
        }
        for (pos, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteSample {
                    observation: pos / m + 1,
                    point: pos % m + 1,
                    value: v,
                });
            }
        }
        // Depth numerators sum `m` per-column counts bounded by C(n, 2); make
        // sure that sum cannot wrap before doing any work.
        check_accumulator_capacity(n, m as u64)?;
        Ok(Self { values, n, m })
    }

    /// Number of curves.
    pub fn n_curves(&self) -> usize {
        self.n
    }

    /// Number of grid points per curve.
    pub fn n_points(&self) -> usize {
        self.m
    }

    /// One curve as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    /// Value of curve `i` at grid point `k`.
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.m + k]
    }
}

/// Rejects `(n, columns)` combinations whose integer depth numerators could
/// exceed `u64`. The bound is conservative (factor-4 headroom).
pub(crate) fn check_accumulator_capacity(n: usize, columns: u64) -> Result<(), Error> {
    let pairs = pair_count(n as u64);
    match pairs.checked_mul(columns) {
        Some(total) if total <= u64::MAX / 4 => Ok(()),
        _ => Err(Error::Overflow(format!(
            "n = {n} with {columns} columns: C(n,2) * columns exceeds the \
             64-bit accumulator budget"
        ))),
    }
}

/// C(n, 2) without intermediate overflow.
#[inline]
pub fn pair_count(n: u64) -> u64 {
    n * (n - 1) / 2
}

// ---------------------------------------------------------------------------
// Per-column rank counts
// ---------------------------------------------------------------------------

/// Rank counts for one value within one grid column of a sample.
///
/// All counts include the value itself: `n_le` values are `<=` it, `n_ge` are
/// `>=` it, `equal` tie with it exactly, so `n_le + n_ge - equal == n`.
/// `pairs_containing` counts the unordered curve pairs whose pointwise band
/// `[min, max]` covers the value, ties included on both edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCounts {
    pub n_le: u64,
    pub n_ge: u64,
    pub equal: u64,
    pub pairs_containing: u64,
}

/// Computes [`PointCounts`] for every entry of one column.
///
/// A value with `b` sample values strictly below, `e` tied (itself included),
/// and `a` strictly above is covered by a pair exactly when the pair does not
/// lie entirely strictly below or entirely strictly above, which closes to
/// `C(e,2) + e*(b + a) + b*a` covering pairs.
pub fn pointwise_counts(column: &[f64]) -> Result<Vec<PointCounts>, Error> {
    let n = column.len();
    if n < 2 {
        return Err(Error::TooFewCurves { n });
    }
    for (i, &v) in column.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteSample {
                observation: i + 1,
                point: 1,
                value: v,
            });
        }
    }
    let mut out = vec![
        PointCounts {
            n_le: 0,
            n_ge: 0,
            equal: 0,
            pairs_containing: 0
        };
        n
    ];
    let mut scratch = RankScratch::new();
    scratch.tie_groups(
        n,
        |a, b| cmp_finite(column[a as usize], column[b as usize]),
        |group, below, ties, above| {
            let counts = PointCounts {
                n_le: below + ties,
                n_ge: above + ties,
                equal: ties,
                pairs_containing: band_pairs(below, ties, above),
            };
            for &i in group {
                out[i as usize] = counts;
            }
        },
    );
    Ok(out)
}

/// Unordered pairs covering a value with `below`/`ties`/`above` rank counts
/// (`ties` includes the value itself). Symmetric in `below` and `above`, so
/// negating a whole column leaves every value's pair count unchanged.
#[inline]
pub(crate) fn band_pairs(below: u64, ties: u64, above: u64) -> u64 {
    pair_count(ties) + ties * (below + above) + below * above
}

/// Value comparison for validated (finite) data. Uses IEEE semantics so that
/// `-0.0` and `0.0` tie, exactly as the band-membership tests see them.
#[inline]
pub(crate) fn cmp_finite(a: f64, b: f64) -> std::cmp::Ordering {
    a.partial_cmp(&b).expect("values validated finite")
}

/// Reusable index buffer for sorting columns by value.
pub(crate) struct RankScratch {
    idx: Vec<u32>,
}

impl RankScratch {
    pub fn new() -> Self {
        Self { idx: Vec::new() }
    }

    /// Sorts indices `0..n` with `compare` and emits each tie group along
    /// with its strictly-below / tied / strictly-above counts.
    pub fn tie_groups(
        &mut self,
        n: usize,
        compare: impl Fn(u32, u32) -> std::cmp::Ordering,
        mut emit: impl FnMut(&[u32], u64, u64, u64),
    ) {
        debug_assert!(n <= u32::MAX as usize);
        self.idx.clear();
        self.idx.extend(0..n as u32);
        self.idx.sort_unstable_by(|&a, &b| compare(a, b));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && compare(self.idx[start], self.idx[end]).is_eq() {
                end += 1;
            }
            let below = start as u64;
            let ties = (end - start) as u64;
            let above = (n - end) as u64;
            emit(&self.idx[start..end], below, ties, above);
            start = end;
        }
    }
}

// ---------------------------------------------------------------------------
// Depth vectors
// ---------------------------------------------------------------------------

/// Which depth a [`DepthVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthKind {
    /// Modified band depth: average fraction of curve pairs covering the
    /// curve, column by column.
    Band,
    /// Modified epigraph index: average fraction of curves lying at or above
    /// the curve, column by column.
    Epigraph,
}

/// One depth value per curve, kept as exact integers.
///
/// The real depth of curve `i` is
/// `numerators[i] / (per_column_denominator * columns)`; the numerator is the
/// column sum of per-column integer counts, so two depth vectors over the
/// same sample can be compared without floating-point error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthVector {
    pub kind: DepthKind,
    pub numerators: Vec<u64>,
    pub per_column_denominator: u64,
    pub columns: u64,
}

impl DepthVector {
    /// Depth of curve `i` as a float.
    pub fn value(&self, i: usize) -> f64 {
        self.numerators[i] as f64 / (self.per_column_denominator * self.columns) as f64
    }

    /// All depths as floats, in curve order.
    pub fn values(&self) -> Vec<f64> {
        (0..self.numerators.len()).map(|i| self.value(i)).collect()
    }

    /// Number of curves.
    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    /// True when the vector is empty (never for a valid sample).
    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }
}

/// Modified band depth of every curve in the sample.
///
/// For each grid column the kernel sorts the column once and hands every
/// curve its covering-pair count; numerators sum those counts over columns.
/// Runs in `O(m * n log n)`.
pub fn mbd(sample: &FunctionalSample) -> DepthVector {
    let n = sample.n_curves();
    let m = sample.n_points();
    let mut numerators = vec![0u64; n];
    let mut scratch = RankScratch::new();
    for k in 0..m {
        scratch.tie_groups(
            n,
            |a, b| cmp_finite(sample.value(a as usize, k), sample.value(b as usize, k)),
            |group, below, ties, above| {
                let pairs = band_pairs(below, ties, above);
                for &i in group {
                    numerators[i as usize] += pairs;
                }
            },
        );
    }
    DepthVector {
        kind: DepthKind::Band,
        numerators,
        per_column_denominator: pair_count(n as u64),
        columns: m as u64,
    }
}

/// Modified epigraph index of every curve in the sample.
///
/// Same kernel as [`mbd`], accumulating at-or-above counts instead of pair
/// counts. A curve always counts itself, so values lie in `[1/n, 1]`.
pub fn mei(sample: &FunctionalSample) -> DepthVector {
    let n = sample.n_curves();
    let m = sample.n_points();
    let mut numerators = vec![0u64; n];
    let mut scratch = RankScratch::new();
    for k in 0..m {
        scratch.tie_groups(
            n,
            |a, b| cmp_finite(sample.value(a as usize, k), sample.value(b as usize, k)),
            |group, _below, ties, above| {
                let n_ge = ties + above;
                for &i in group {
                    numerators[i as usize] += n_ge;
                }
            },
        );
    }
    DepthVector {
        kind: DepthKind::Epigraph,
        numerators,
        per_column_denominator: n as u64,
        columns: m as u64,
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

/// Literal modified band depth: enumerates every curve pair at every column
/// and tests band membership directly. `O(n^3 m)`; kept as the validation
/// oracle for [`mbd`].
pub fn mbd_brute(sample: &FunctionalSample) -> DepthVector {
    let n = sample.n_curves();
    let m = sample.n_points();
    let mut numerators = vec![0u64; n];
    for a in 0..n {
        for b in (a + 1)..n {
            for k in 0..m {
                let (va, vb) = (sample.value(a, k), sample.value(b, k));
                let (lo, hi) = if va <= vb { (va, vb) } else { (vb, va) };
                for i in 0..n {
                    let v = sample.value(i, k);
                    if lo <= v && v <= hi {
                        numerators[i] += 1;
                    }
                }
            }
        }
    }
    DepthVector {
        kind: DepthKind::Band,
        numerators,
        per_column_denominator: pair_count(n as u64),
        columns: m as u64,
    }
}

/// Literal modified epigraph index: compares every curve against every other
/// at every column. `O(n^2 m)`; the validation oracle for [`mei`].
pub fn mei_brute(sample: &FunctionalSample) -> DepthVector {
    let n = sample.n_curves();
    let m = sample.n_points();
    let mut numerators = vec![0u64; n];
    for i in 0..n {
        for h in 0..n {
            for k in 0..m {
                if sample.value(h, k) >= sample.value(i, k) {
                    numerators[i] += 1;
                }
            }
        }
    }
    DepthVector {
        kind: DepthKind::Epigraph,
        numerators,
        per_column_denominator: n as u64,
        columns: m as u64,
    }
}

// ---------------------------------------------------------------------------
// Depth/index parabolas
// ---------------------------------------------------------------------------

/// Upper envelope of band depth as a function of the epigraph index within
/// one sample of `n` curves:
/// `f_n(z) = a0 + a1 z + a2 n^2 z^2` with `a0 = a2 = -2 / (n(n-1))` and
/// `a1 = 2(n+1) / (n-1)`.
///
/// For tie-free samples `mbd <= f_n(mei)` always, with equality exactly when
/// no two curves cross. The curve is symmetric around `z = (n+1)/(2n)`.
///
/// # Panics
///
/// Panics if `n < 2`.
pub fn parabola_f(n: usize, z: f64) -> f64 {
    assert!(n >= 2, "parabola_f needs n >= 2, got {n}");
    let nf = n as f64;
    let a0 = -2.0 / (nf * (nf - 1.0));
    let a1 = 2.0 * (nf + 1.0) / (nf - 1.0);
    let a2 = a0;
    a0 + a1 * z + a2 * nf * nf * z * z
}

/// Second-level envelope linking the two DepthGram coordinates:
/// `g_n(z) = 2/n + z - n z^2 / (2(n-1))`.
///
/// When every dimension of a dataset is free of curve crossings, the band
/// depth of the epigraph-index rows is at most `g_n` of one minus the
/// epigraph index of the band-depth rows; preserving the curve ordering
/// across all dimensions turns the bound into equality. Observations above
/// the curve are exactly the DepthGram outlier candidates.
///
/// # Panics
///
/// Panics if `n < 2`.
pub fn parabola_g(n: usize, z: f64) -> f64 {
    assert!(n >= 2, "parabola_g needs n >= 2, got {n}");
    let nf = n as f64;
    2.0 / nf + z - nf * z * z / (2.0 * (nf - 1.0))
}

/// Exact test that every observation sits on the `f_n` parabola.
///
/// With `band` and `epi` numerators `P_i`, `q_i` over `m` columns,
/// `mbd_i == f_n(mei_i)` is equivalent to the integer identity
/// `m P_i == (n+1) m q_i - q_i^2 - m^2`, checked here in `i128`.
pub fn parabola_f_exact(band: &DepthVector, epi: &DepthVector) -> bool {
    assert_eq!(band.kind, DepthKind::Band);
    assert_eq!(epi.kind, DepthKind::Epigraph);
    assert_eq!(band.len(), epi.len());
    assert_eq!(band.columns, epi.columns);
    let n = epi.per_column_denominator as i128;
    let m = band.columns as i128;
    band.numerators
        .iter()
        .zip(&epi.numerators)
        .all(|(&p, &q)| {
            let (p, q) = (p as i128, q as i128);
            m * p == (n + 1) * m * q - q * q - m * m
        })
}

/// Exact test that every observation sits on the `g_n` parabola.
///
/// `band_numerators` are second-level band-depth numerators `B_i` and
/// `epi_numerators` second-level epigraph numerators `E_i`, both over
/// `columns` columns of an `n`-observation dataset. Equality
/// `B_i/(C(n,2) p) == g_n(1 - E_i/(n p))` reduces to
/// `4 p B_i == 4(n-1) p^2 + 2(n-1) p (n p - E_i) - (n p - E_i)^2`.
pub fn parabola_g_exact(
    n: usize,
    columns: u64,
    band_numerators: &[u64],
    epi_numerators: &[u64],
) -> bool {
    assert_eq!(band_numerators.len(), epi_numerators.len());
    let n = n as i128;
    let p = columns as i128;
    band_numerators
        .iter()
        .zip(epi_numerators)
        .all(|(&b, &e)| {
            let (b, e) = (b as i128, e as i128);
            let slack = n * p - e;
            4 * p * b == 4 * (n - 1) * p * p + 2 * (n - 1) * p * slack - slack * slack
        })
}

// ---------------------------------------------------------------------------
// Quantiles
// ---------------------------------------------------------------------------

/// Linear-interpolation sample quantile (the common "type 7" rule):
/// with `m` sorted values, the `q`-quantile sits at fractional position
/// `h = (m - 1) q` and interpolates between the neighboring order statistics.
///
/// # Panics
///
/// Panics if `values` is empty, `q` is outside `[0, 1]`, or any value is NaN.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level {q} outside [0, 1]");
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| {
        a.partial_cmp(b)
            .expect("quantile input must be free of NaN")
    });
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn constant_sample(levels: &[f64], m: usize) -> FunctionalSample {
        FunctionalSample::from_rows(levels.iter().map(|&v| vec![v; m]).collect()).unwrap()
    }

    #[test]
    fn counts_for_distinct_column() {
        let c = pointwise_counts(&[1.0, 2.0, 3.0]).unwrap();
        // Middle value: every one of the three pairs covers it.
        assert_eq!(c[1].pairs_containing, 3);
        // Extremes: only the two pairs they belong to.
        assert_eq!(c[0].pairs_containing, 2);
        assert_eq!(c[2].pairs_containing, 2);
        assert_eq!(c[1].n_le, 2);
        assert_eq!(c[1].n_ge, 2);
        assert_eq!(c[1].equal, 1);
    }

    #[test]
    fn counts_for_tied_column() {
        let c = pointwise_counts(&[1.0, 1.0, 2.0]).unwrap();
        // The tied pair {1,1} covers both ones, and each one pairs with the 2.
        assert_eq!(c[0].pairs_containing, 3);
        assert_eq!(c[1].pairs_containing, 3);
        assert_eq!(c[2].pairs_containing, 2);
        assert_eq!(c[0].n_le, 2);
        assert_eq!(c[0].n_ge, 3);
        assert_eq!(c[0].equal, 2);
    }

    #[test]
    fn counts_reject_bad_input() {
        assert!(pointwise_counts(&[1.0]).is_err());
        assert!(pointwise_counts(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn counts_partition_identity() {
        let col = [3.0, 1.0, 3.0, 2.0, 3.0, -1.0];
        for c in pointwise_counts(&col).unwrap() {
            assert_eq!(c.n_le + c.n_ge - c.equal, col.len() as u64);
        }
    }

    #[test]
    fn depths_of_stacked_constant_curves() {
        let s = constant_sample(&[1.0, 2.0, 3.0], 4);
        let b = mbd(&s);
        let e = mei(&s);
        assert_eq!(b.values(), vec![2.0 / 3.0, 1.0, 2.0 / 3.0]);
        assert_eq!(e.values(), vec![1.0, 2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn crossing_pair_depths() {
        let s = FunctionalSample::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        // With n = 2 the single band covers both curves everywhere.
        assert_eq!(mbd(&s).values(), vec![1.0, 1.0]);
        assert_eq!(mei(&s).values(), vec![0.75, 0.75]);
    }

    #[test]
    fn identical_curves_have_full_depth() {
        let s = constant_sample(&[5.0; 4], 3);
        assert!(mbd(&s).values().iter().all(|&v| v == 1.0));
        assert!(mei(&s).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn middle_curve_attains_band_depth_maximum() {
        // Odd sample of non-crossing curves: the middle one hits the known
        // maximum (n + 3) / (2n).
        for n in [3usize, 5, 7, 9] {
            let levels: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let s = constant_sample(&levels, 2);
            let top = mbd(&s).value(n / 2);
            assert!((top - (n as f64 + 3.0) / (2.0 * n as f64)).abs() < 1e-15);
        }
    }

    /// Random sample with deliberate pointwise ties and duplicated rows.
    fn rough_sample(rng: &mut StdRng) -> FunctionalSample {
        let n = rng.gen_range(2..=12);
        let m = rng.gen_range(1..=8);
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..m)
                    // Snapping to a coarse grid forces ties between curves.
                    .map(|_| (rng.gen_range(-4.0..4.0) * 2.0_f64).round() / 2.0)
                    .collect()
            })
            .collect();
        if n >= 3 && rng.gen_bool(0.4) {
            rows[0] = rows[1].clone();
        }
        FunctionalSample::from_rows(rows).unwrap()
    }

    #[test]
    fn fast_and_brute_agree_exactly() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        for _ in 0..300 {
            let s = rough_sample(&mut rng);
            assert_eq!(mbd(&s), mbd_brute(&s));
            assert_eq!(mei(&s), mei_brute(&s));
        }
    }

    #[test]
    fn parabola_f_fixed_points() {
        // Both extremes of a tie-free ordered sample sit at depth 2/n.
        for n in [2usize, 3, 5, 10, 100] {
            let nf = n as f64;
            assert!((parabola_f(n, 1.0 / nf) - 2.0 / nf).abs() < 1e-12);
            assert!((parabola_f(n, 1.0) - 2.0 / nf).abs() < 1e-12);
            // Symmetry around (n + 1) / (2n).
            let x0 = (nf + 1.0) / (2.0 * nf);
            for d in [0.05, 0.21, 0.4] {
                assert!((parabola_f(n, x0 + d) - parabola_f(n, x0 - d)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parabola_g_fixed_points() {
        assert!((parabola_g(3, 2.0 / 3.0) - 1.0).abs() < 1e-15);
        for n in [2usize, 4, 9, 50] {
            assert!((parabola_g(n, 0.0) - 2.0 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn ordered_sample_lies_on_parabola_f() {
        for n in [2usize, 3, 4, 7, 12] {
            let levels: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 1.0).collect();
            let s = constant_sample(&levels, 5);
            assert!(parabola_f_exact(&mbd(&s), &mei(&s)));
        }
    }

    #[test]
    fn crossing_sample_leaves_parabola_f() {
        let s = FunctionalSample::from_rows(vec![
            vec![0.0, 3.0],
            vec![1.0, 1.0],
            vec![2.0, 0.0],
        ])
        .unwrap();
        assert!(!parabola_f_exact(&mbd(&s), &mei(&s)));
    }

    #[test]
    fn quantile_type7_golden() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert_eq!(quantile(&v, 0.75), 4.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        // 19 equal values and one large one: Q3 stays at the plateau.
        let mut d = vec![0.01; 19];
        d.push(0.5);
        assert_eq!(quantile(&d, 0.75), 0.01);
        assert_eq!(quantile(&d, 0.25), 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

        /// Tie-free random samples: value ranges and the f_n upper bound.
        #[test]
        fn bounds_on_tie_free_samples(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(2..=15);
            let m = rng.gen_range(1..=20);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect())
                .collect();
            let s = FunctionalSample::from_rows(rows).unwrap();
            let (b, e) = (mbd(&s), mei(&s));
            let nf = n as f64;
            for i in 0..n {
                let (bv, ev) = (b.value(i), e.value(i));
                prop_assert!(bv > 0.0 && bv <= 0.5 + 3.0 / (2.0 * nf) + 1e-12);
                prop_assert!(ev >= 1.0 / nf - 1e-15 && ev <= 1.0 + 1e-15);
                prop_assert!(bv <= parabola_f(n, ev) + 1e-12);
            }
        }

        /// Depths only depend on per-column ranks: any strictly increasing
        /// transform of all values leaves the integer numerators unchanged.
        #[test]
        fn rank_invariance(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let s = {
                let n = rng.gen_range(2..=10);
                let m = rng.gen_range(1..=6);
                let rows: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect())
                    .collect();
                FunctionalSample::from_rows(rows).unwrap()
            };
            let warped = FunctionalSample::from_rows(
                (0..s.n_curves())
                    .map(|i| s.row(i).iter().map(|&v| (v * 0.5).exp() + v).collect())
                    .collect(),
            )
            .unwrap();
            prop_assert_eq!(mbd(&s).numerators, mbd(&warped).numerators);
            prop_assert_eq!(mei(&s).numerators, mei(&warped).numerators);
        }

        /// Permuting curves permutes depths.
        #[test]
        fn permutation_equivariance(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(2..=10);
            let m = rng.gen_range(1..=6);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(-3.0..3.0) as f64).collect())
                .collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let s = FunctionalSample::from_rows(rows.clone()).unwrap();
            let p = FunctionalSample::from_rows(
                perm.iter().map(|&i| rows[i].clone()).collect(),
            )
            .unwrap();
            let (b, bp) = (mbd(&s), mbd(&p));
            let (e, ep) = (mei(&s), mei(&p));
            for (pos, &orig) in perm.iter().enumerate() {
                prop_assert_eq!(bp.numerators[pos], b.numerators[orig]);
                prop_assert_eq!(ep.numerators[pos], e.numerators[orig]);
            }
        }
    }
}
