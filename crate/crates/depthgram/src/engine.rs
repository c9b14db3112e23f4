//! The streaming DepthGram engine.
//!
//! One pass over the dataset's dimensions produces all three DepthGrams.
//! Every grid column `(j, k)` is sorted once; its per-curve rank counts feed
//! four accumulators at the same time:
//!
//! * per-dimension band/epigraph numerators, folded immediately into the
//!   second-level *dimensions* accumulators and then discarded;
//! * the `n x N` *time* matrices, which sum the same counts over dimensions
//!   instead of grid points;
//! * the sign-corrected epigraph matrix for the *time/correlation* variant,
//!   fed by the at-or-below counts whenever the running sign chain is
//!   negative (negating a column swaps at-or-above with at-or-below and
//!   leaves covering-pair counts untouched, so no second data pass is
//!   needed — [`crate::reference`] re-derives all of this the slow way);
//! * optional per-dimension outlier screens (module [`crate::marginal`]).
//!
//! All cross-dimension state is integer-additive and folded in dimension
//! order, so reports are byte-identical no matter how many worker threads
//! compute the per-dimension records.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{
    band_pairs, pair_count, parabola_g, quantile, RankScratch,
};
use crate::error::Error;
use crate::hdfd::{DatasetShape, DimensionSource};
use crate::marginal::{screen_dimension, DimensionScreen, MarginalFlags};

// ---------------------------------------------------------------------------
// Public types
// ---------------------------------------------------------------------------

/// The three DepthGram variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Second-level depths across the per-dimension depth matrices.
    Dimensions,
    /// Second-level depths across the per-time-point depth matrices.
    Time,
    /// Time variant after aligning dimensions that correlate negatively.
    TimeCorrelation,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Dimensions, Variant::Time, Variant::TimeCorrelation];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dimensions => "dimensions",
            Variant::Time => "time",
            Variant::TimeCorrelation => "time_correlation",
        }
    }
}

/// One DepthGram: a 2-D point per observation plus the fence-rule outcome.
///
/// Coordinates are kept both as floats and as the exact integer numerators
/// they come from: `dg1 = 1 - epi_numerators/(n*columns)` and
/// `dg2 = band_numerators/(C(n,2)*columns)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthGram {
    pub variant: Variant,
    pub dg1: Vec<f64>,
    pub dg2: Vec<f64>,
    /// Vertical clearance over the non-crossing envelope:
    /// `dg2 - g_n(dg1)` per observation.
    pub d_scores: Vec<f64>,
    /// Fence `Q3 + factor * IQR` over the d-scores.
    pub threshold: f64,
    /// Strict exceedance of the fence.
    pub flagged: Vec<bool>,
    pub epi_numerators: Vec<u64>,
    pub band_numerators: Vec<u64>,
    pub columns: u64,
}

impl DepthGram {
    /// 1-based ids of flagged observations.
    pub fn flagged_observations(&self) -> Vec<usize> {
        self.flagged
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i + 1))
            .collect()
    }
}

/// An integer-count depth matrix: `rows x cols` numerators where each entry
/// sums `columns_per_entry` per-column counts with denominator
/// `per_column_denominator`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntDepthMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
    pub per_column_denominator: u64,
    pub columns_per_entry: u64,
}

impl IntDepthMatrix {
    /// Numerator at `(row, col)`.
    pub fn numerator(&self, row: usize, col: usize) -> u64 {
        self.data[row * self.cols + col]
    }

    /// Depth value at `(row, col)`.
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.numerator(row, col) as f64
            / (self.per_column_denominator * self.columns_per_entry) as f64
    }
}

/// First-level depth matrices produced by the pass. The time-direction
/// matrices are always materialized (`n x N` is small); the per-dimension
/// matrices are only kept when [`AnalyzeConfig::emit_matrices`] is set.
#[derive(Debug, Clone)]
pub struct DepthMatrices {
    pub band_time: IntDepthMatrix,
    pub epi_time: IntDepthMatrix,
    /// Epigraph counts of the sign-aligned data.
    pub epi_time_aligned: IntDepthMatrix,
    pub band_dims: Option<IntDepthMatrix>,
    pub epi_dims: Option<IntDepthMatrix>,
}

/// Tuning knobs for [`analyze`].
#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    /// Fence factor F in `Q3 + F * IQR`; 1.5 unless a study says otherwise.
    pub fence_factor: f64,
    /// Also run the per-dimension marginal screens during the pass.
    pub marginal_screen: bool,
    /// Keep the `n x p` first-level matrices (costs `16 n p` bytes).
    pub emit_matrices: bool,
    /// Dimensions handed to the worker pool per scheduling round. Purely a
    /// throughput knob; results do not depend on it.
    pub chunk_dims: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            fence_factor: 1.5,
            marginal_screen: false,
            emit_matrices: false,
            chunk_dims: 64,
        }
    }
}

/// Sign-chain bookkeeping for the time/correlation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChainSummary {
    /// Dimensions whose cumulative sign ended up negative.
    pub flipped_dimensions: u64,
    /// Consecutive-dimension sign reversals along the chain.
    pub sign_changes: u64,
}

/// Per-variant serialized results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub dg1: Vec<f64>,
    pub dg2: Vec<f64>,
    pub d_scores: Vec<f64>,
    pub threshold: f64,
    /// 1-based observation ids over the fence.
    pub flagged: Vec<usize>,
}

/// Per-dimension screen results in serializable form (all ids 1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub magnitude: Vec<ObservationDims>,
    pub shape: Vec<ObservationDims>,
    /// Flag counts per dimension, magnitude screen.
    pub magnitude_counts: Vec<u32>,
    /// Flag counts per dimension, shape screen.
    pub shape_counts: Vec<u32>,
}

/// Dimensions on which one observation was flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationDims {
    pub observation: usize,
    pub dimensions: Vec<u32>,
}

/// The deterministic analysis result. Serializes to the versioned JSON
/// document emitted by `write_report`; wall-clock timing is deliberately not
/// part of the serialized form so that reports from different worker counts
/// are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub n: usize,
    pub p: usize,
    pub n_points: usize,
    pub fence_factor: f64,
    pub variants: Vec<VariantReport>,
    /// Union of the three flag sets, 1-based and sorted.
    pub outlier_union: Vec<usize>,
    pub sign_chain: SignChainSummary,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub marginal: Option<MarginalReport>,
    /// Filled by callers that want to log it; never serialized.
    #[serde(skip)]
    pub timing: Option<RunTiming>,
}

/// Non-deterministic run metadata, kept out of the serialized report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTiming {
    pub wall_seconds: f64,
    pub threads: usize,
}

/// Everything [`analyze`] produces.
#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    pub report: AnalysisReport,
    pub depthgrams: [DepthGram; 3],
    pub matrices: DepthMatrices,
    pub marginal: Option<MarginalFlags>,
}

// ---------------------------------------------------------------------------
// Per-dimension worker
// ---------------------------------------------------------------------------

/// Everything a worker extracts from one dimension block. Pure function of
/// the block, so records can be computed in any order and on any thread.
struct DimensionRecord {
    j: usize,
    /// Band-depth numerators of this marginal sample (sum over grid points).
    band_col: Vec<u64>,
    /// Epigraph numerators of this marginal sample.
    epi_col: Vec<u64>,
    /// Covering-pair count per `(i, k)`.
    col_pairs: Vec<u32>,
    /// At-or-above count per `(i, k)`.
    col_ge: Vec<u32>,
    /// At-or-below count per `(i, k)`.
    col_le: Vec<u32>,
    /// At-or-above counts of `band_col` within itself (second level).
    sl_epi: Vec<u64>,
    /// Covering-pair counts of `epi_col` within itself (second level).
    sl_band: Vec<u64>,
    screen: Option<DimensionScreen>,
}

fn compute_record(
    shape: &DatasetShape,
    j: usize,
    block: &[f64],
    cfg: &AnalyzeConfig,
) -> Result<DimensionRecord, Error> {
    let (n, n_points) = (shape.n, shape.n_points);
    debug_assert_eq!(block.len(), n * n_points);
    for (pos, &v) in block.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteData {
                observation: pos / n_points + 1,
                dimension: j + 1,
                point: pos % n_points + 1,
                value: v,
            });
        }
    }

    let mut rec = DimensionRecord {
        j,
        band_col: vec![0; n],
        epi_col: vec![0; n],
        col_pairs: vec![0; n * n_points],
        col_ge: vec![0; n * n_points],
        col_le: vec![0; n * n_points],
        sl_epi: vec![0; n],
        sl_band: vec![0; n],
        screen: None,
    };
    let mut scratch = RankScratch::new();
    let mut column = vec![0.0; n];
    for k in 0..n_points {
        for i in 0..n {
            column[i] = block[i * n_points + k];
        }
        scratch.tie_groups(
            n,
            |a, b| crate::depth::cmp_finite(column[a as usize], column[b as usize]),
            |group, below, ties, above| {
                let pairs = band_pairs(below, ties, above);
                let ge = (ties + above) as u32;
                let le = (ties + below) as u32;
                for &i in group {
                    let i = i as usize;
                    rec.band_col[i] += pairs;
                    rec.epi_col[i] += ge as u64;
                    rec.col_pairs[i * n_points + k] = pairs as u32;
                    rec.col_ge[i * n_points + k] = ge;
                    rec.col_le[i * n_points + k] = le;
                }
            },
        );
    }

    // Second-level contributions of this dimension: rank the marginal depth
    // numerators across observations (exact integer comparisons).
    scratch.tie_groups(
        n,
        |a, b| rec.band_col[a as usize].cmp(&rec.band_col[b as usize]),
        |group, _below, ties, above| {
            for &i in group {
                rec.sl_epi[i as usize] = ties + above;
            }
        },
    );
    scratch.tie_groups(
        n,
        |a, b| rec.epi_col[a as usize].cmp(&rec.epi_col[b as usize]),
        |group, below, ties, above| {
            let pairs = band_pairs(below, ties, above);
            for &i in group {
                rec.sl_band[i as usize] = pairs;
            }
        },
    );

    if cfg.marginal_screen {
        rec.screen = Some(screen_dimension(
            block,
            n,
            n_points,
            &rec.band_col,
            &rec.epi_col,
            cfg.fence_factor,
        ));
    }
    Ok(rec)
}

// ---------------------------------------------------------------------------
// Streaming state
// ---------------------------------------------------------------------------

/// Accumulator state of one analysis pass.
///
/// Dimensions must be pushed in order (`0, 1, ..., p-1`): the sign chain is
/// inherently sequential, and in-order folding is what makes the result
/// independent of worker scheduling. [`analyze`] drives this state with
/// parallel record computation; [`StreamState::push_dimension`] is the
/// single-threaded equivalent.
pub struct StreamState {
    shape: DatasetShape,
    cfg: AnalyzeConfig,
    next_j: usize,
    dim_epi_acc: Vec<u64>,
    dim_band_acc: Vec<u64>,
    time_band: Vec<u64>,
    time_epi: Vec<u64>,
    time_epi_aligned: Vec<u64>,
    sign: i64,
    flipped_dimensions: u64,
    sign_changes: u64,
    prev_epi_col: Vec<u64>,
    band_dims: Option<Vec<u64>>,
    epi_dims: Option<Vec<u64>>,
    marginal: Option<MarginalFlags>,
}

impl StreamState {
    pub fn new(shape: DatasetShape, cfg: AnalyzeConfig) -> Result<Self, Error> {
        shape.validate()?;
        if !(cfg.fence_factor.is_finite() && cfg.fence_factor >= 0.0) {
            return Err(Error::Config(format!(
                "fence factor must be finite and >= 0, got {}",
                cfg.fence_factor
            )));
        }
        let (n, n_points, p) = (shape.n, shape.n_points, shape.p);
        Ok(Self {
            shape,
            next_j: 0,
            dim_epi_acc: vec![0; n],
            dim_band_acc: vec![0; n],
            time_band: vec![0; n * n_points],
            time_epi: vec![0; n * n_points],
            time_epi_aligned: vec![0; n * n_points],
            sign: 1,
            flipped_dimensions: 0,
            sign_changes: 0,
            prev_epi_col: Vec::new(),
            band_dims: cfg.emit_matrices.then(|| Vec::with_capacity(n * p)),
            epi_dims: cfg.emit_matrices.then(|| Vec::with_capacity(n * p)),
            marginal: cfg.marginal_screen.then(|| MarginalFlags::new(n, p)),
            cfg,
        })
    }

    /// Computes and folds one dimension block (single-threaded path).
    pub fn push_dimension(&mut self, j: usize, block: &[f64]) -> Result<(), Error> {
        if block.len() != self.shape.block_len() {
            return Err(Error::Shape(format!(
                "dimension block has {} values, expected n*N = {}",
                block.len(),
                self.shape.block_len()
            )));
        }
        let rec = compute_record(&self.shape, j, block, &self.cfg)?;
        self.fold_record(rec)
    }

    fn fold_record(&mut self, rec: DimensionRecord) -> Result<(), Error> {
        if rec.j != self.next_j {
            return Err(Error::Shape(format!(
                "dimension {} pushed out of order, expected {}",
                rec.j + 1,
                self.next_j + 1
            )));
        }

        // Extend the sign chain before committing epigraph counts.
        if rec.j > 0 {
            let step = correlation_sign(&self.prev_epi_col, &rec.epi_col);
            if step < 0 {
                self.sign_changes += 1;
            }
            self.sign *= step;
        }
        if self.sign < 0 {
            self.flipped_dimensions += 1;
        }

        for (acc, &v) in self.time_band.iter_mut().zip(&rec.col_pairs) {
            *acc += v as u64;
        }
        for (acc, &v) in self.time_epi.iter_mut().zip(&rec.col_ge) {
            *acc += v as u64;
        }
        let aligned_counts = if self.sign > 0 {
            &rec.col_ge
        } else {
            &rec.col_le
        };
        for (acc, &v) in self.time_epi_aligned.iter_mut().zip(aligned_counts) {
            *acc += v as u64;
        }
        for (acc, &v) in self.dim_epi_acc.iter_mut().zip(&rec.sl_epi) {
            *acc += v;
        }
        for (acc, &v) in self.dim_band_acc.iter_mut().zip(&rec.sl_band) {
            *acc += v;
        }
        if let Some(band_dims) = &mut self.band_dims {
            band_dims.extend_from_slice(&rec.band_col);
        }
        if let Some(epi_dims) = &mut self.epi_dims {
            epi_dims.extend_from_slice(&rec.epi_col);
        }
        if let Some(marginal) = &mut self.marginal {
            marginal.record_dimension(rec.j, rec.screen.as_ref().expect("screen computed"));
        }
        self.prev_epi_col = rec.epi_col;
        self.next_j += 1;
        Ok(())
    }

    /// Closes the pass and assembles DepthGrams, flags, and the report.
    pub fn finalize(self) -> Result<AnalysisOutput, Error> {
        let (n, p, n_points) = (self.shape.n, self.shape.p, self.shape.n_points);
        if self.next_j != p {
            return Err(Error::Shape(format!(
                "only {} of {p} dimensions were pushed",
                self.next_j
            )));
        }

        let dims_gram = build_depthgram(
            Variant::Dimensions,
            n,
            p as u64,
            self.dim_epi_acc,
            self.dim_band_acc,
            self.cfg.fence_factor,
        );

        // Second level over the time-direction matrices: rank each grid
        // column of the integer matrices across observations.
        let time_epi_acc = epigraph_of_rows(&self.time_band, n, n_points);
        let time_band_acc = band_of_rows(&self.time_epi, n, n_points);
        let aligned_band_acc = band_of_rows(&self.time_epi_aligned, n, n_points);

        let time_gram = build_depthgram(
            Variant::Time,
            n,
            n_points as u64,
            time_epi_acc.clone(),
            time_band_acc,
            self.cfg.fence_factor,
        );
        // Covering-pair counts are negation-invariant, so the aligned data
        // shares the first coordinate with the plain time variant exactly.
        let tc_gram = build_depthgram(
            Variant::TimeCorrelation,
            n,
            n_points as u64,
            time_epi_acc,
            aligned_band_acc,
            self.cfg.fence_factor,
        );

        let pair_denom = pair_count(n as u64);
        let matrices = DepthMatrices {
            band_time: IntDepthMatrix {
                rows: n,
                cols: n_points,
                data: self.time_band,
                per_column_denominator: pair_denom,
                columns_per_entry: p as u64,
            },
            epi_time: IntDepthMatrix {
                rows: n,
                cols: n_points,
                data: self.time_epi,
                per_column_denominator: n as u64,
                columns_per_entry: p as u64,
            },
            epi_time_aligned: IntDepthMatrix {
                rows: n,
                cols: n_points,
                data: self.time_epi_aligned,
                per_column_denominator: n as u64,
                columns_per_entry: p as u64,
            },
            band_dims: self.band_dims.map(|data| IntDepthMatrix {
                rows: p,
                cols: n,
                data,
                per_column_denominator: pair_denom,
                columns_per_entry: n_points as u64,
            }),
            epi_dims: self.epi_dims.map(|data| IntDepthMatrix {
                rows: p,
                cols: n,
                data,
                per_column_denominator: n as u64,
                columns_per_entry: n_points as u64,
            }),
        };

        let depthgrams = [dims_gram, time_gram, tc_gram];
        let mut union: Vec<usize> = Vec::new();
        for g in &depthgrams {
            union.extend(g.flagged_observations());
        }
        union.sort_unstable();
        union.dedup();

        let report = AnalysisReport {
            schema_version: 1,
            n,
            p,
            n_points,
            fence_factor: self.cfg.fence_factor,
            variants: depthgrams
                .iter()
                .map(|g| VariantReport {
                    variant: g.variant,
                    dg1: g.dg1.clone(),
                    dg2: g.dg2.clone(),
                    d_scores: g.d_scores.clone(),
                    threshold: g.threshold,
                    flagged: g.flagged_observations(),
                })
                .collect(),
            outlier_union: union,
            sign_chain: SignChainSummary {
                flipped_dimensions: self.flipped_dimensions,
                sign_changes: self.sign_changes,
            },
            marginal: self.marginal.as_ref().map(MarginalFlags::to_report),
            timing: None,
        };

        Ok(AnalysisOutput {
            report,
            depthgrams,
            matrices,
            marginal: self.marginal,
        })
    }
}

/// Epigraph numerators of the rows of an integer matrix: at each of the
/// `cols` columns, how many rows sit at or above each row's entry.
fn epigraph_of_rows(matrix: &[u64], rows: usize, cols: usize) -> Vec<u64> {
    let mut acc = vec![0u64; rows];
    let mut scratch = RankScratch::new();
    for k in 0..cols {
        scratch.tie_groups(
            rows,
            |a, b| matrix[a as usize * cols + k].cmp(&matrix[b as usize * cols + k]),
            |group, _below, ties, above| {
                for &i in group {
                    acc[i as usize] += ties + above;
                }
            },
        );
    }
    acc
}

/// Band-depth numerators of the rows of an integer matrix.
fn band_of_rows(matrix: &[u64], rows: usize, cols: usize) -> Vec<u64> {
    let mut acc = vec![0u64; rows];
    let mut scratch = RankScratch::new();
    for k in 0..cols {
        scratch.tie_groups(
            rows,
            |a, b| matrix[a as usize * cols + k].cmp(&matrix[b as usize * cols + k]),
            |group, below, ties, above| {
                let pairs = band_pairs(below, ties, above);
                for &i in group {
                    acc[i as usize] += pairs;
                }
            },
        );
    }
    acc
}

/// Sign of the Pearson correlation between two equal-length count vectors.
/// Returns +1 for zero or undefined correlation (either vector constant).
pub(crate) fn correlation_sign(a: &[u64], b: &[u64]) -> i64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let (mut sa, mut sb) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sa += x as f64;
        sb += y as f64;
    }
    let (ma, mb) = (sa / n, sb / n);
    let mut cov = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x as f64 - ma) * (y as f64 - mb);
    }
    if cov > 0.0 {
        1
    } else if cov < 0.0 {
        -1
    } else {
        1
    }
}

pub(crate) fn build_depthgram(
    variant: Variant,
    n: usize,
    columns: u64,
    epi_numerators: Vec<u64>,
    band_numerators: Vec<u64>,
    fence_factor: f64,
) -> DepthGram {
    let pair_denom = (pair_count(n as u64) * columns) as f64;
    let epi_denom = n as u64 * columns;
    // (total - e) / total instead of 1 - e/total: one rounding, and integer
    // numerators stay comparable across variants.
    let dg1: Vec<f64> = epi_numerators
        .iter()
        .map(|&e| (epi_denom - e) as f64 / epi_denom as f64)
        .collect();
    let dg2: Vec<f64> = band_numerators
        .iter()
        .map(|&b| b as f64 / pair_denom)
        .collect();
    let d_scores: Vec<f64> = dg1
        .iter()
        .zip(&dg2)
        .map(|(&x, &y)| y - parabola_g(n, x))
        .collect();
    let (threshold, flagged) = fence_flags(&d_scores, fence_factor);
    DepthGram {
        variant,
        dg1,
        dg2,
        d_scores,
        threshold,
        flagged,
        epi_numerators,
        band_numerators,
        columns,
    }
}

/// The flag rule: fence at `Q3 + factor * IQR`, strict exceedance flags.
/// With all scores equal the IQR is zero and nothing is flagged.
pub fn fence_flags(scores: &[f64], factor: f64) -> (f64, Vec<bool>) {
    let q1 = quantile(scores, 0.25);
    let q3 = quantile(scores, 0.75);
    let threshold = q3 + factor * (q3 - q1);
    let flagged = scores.iter().map(|&d| d > threshold).collect();
    (threshold, flagged)
}

// ---------------------------------------------------------------------------
// Parallel driver
// ---------------------------------------------------------------------------

/// Runs the full analysis over a dimension source.
///
/// Dimensions are processed in chunks: workers compute per-dimension records
/// in parallel, then the records are folded sequentially in dimension order.
/// Peak memory is `O(chunk_dims * n * N)` on top of the accumulators, and the
/// result is bit-identical for any worker count.
pub fn analyze(source: &dyn DimensionSource, cfg: &AnalyzeConfig) -> Result<AnalysisOutput, Error> {
    let start = std::time::Instant::now();
    let shape = source.shape();
    let mut state = StreamState::new(shape, cfg.clone())?;
    let chunk = cfg.chunk_dims.max(1);
    let mut j0 = 0;
    while j0 < shape.p {
        let j1 = (j0 + chunk).min(shape.p);
        let records: Result<Vec<DimensionRecord>, Error> = (j0..j1)
            .into_par_iter()
            .map(|j| {
                let mut block = vec![0.0; shape.block_len()];
                source.read_dimension(j, &mut block)?;
                compute_record(&shape, j, &block, cfg)
            })
            .collect();
        for rec in records? {
            state.fold_record(rec)?;
        }
        j0 = j1;
    }
    let mut output = state.finalize()?;
    output.report.timing = Some(RunTiming {
        wall_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    });
    Ok(output)
}

// ===========================================================================
