//! Per-dimension outlier screens.
//!
//! For pinpointing *which* dimensions make an observation outlying, every
//! marginal sample gets two classic univariate-functional screens:
//!
//! * a functional boxplot for magnitude outliers — curves leaving the fences
//!   around the band-deepest half of the sample;
//! * an outliergram for shape outliers — curves whose band depth falls far
//!   below the epigraph-index parabola that non-crossing curves would attain.
//!
//! Both screens only need the raw block and the marginal depth numerators
//! the engine computes anyway, so they ride along in the same pass.

use crate::engine::{AnalyzeConfig, MarginalReport, ObservationDims};
use crate::error::Error;
use crate::hdfd::DimensionSource;
use crate::depth::quantile;

/// Flags from both screens for a single dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionScreen {
    pub magnitude: Vec<bool>,
    pub shape: Vec<bool>,
}

/// Runs both screens on one marginal sample.
///
/// `band_col` / `epi_col` are the marginal depth numerators over the
/// dimension's `n_points` grid columns, as produced by the engine pass.
pub fn screen_dimension(
    block: &[f64],
    n: usize,
    n_points: usize,
    band_col: &[u64],
    epi_col: &[u64],
    fence_factor: f64,
) -> DimensionScreen {
    DimensionScreen {
        magnitude: functional_boxplot_flags(block, n, n_points, band_col, fence_factor),
        shape: outliergram_flags(n, n_points as u64, band_col, epi_col, fence_factor),
    }
}

/// Functional boxplot magnitude screen.
///
/// The central region is the pointwise envelope of the `ceil(n/2)` curves
/// with the highest band depth (depth ties broken toward the lower
/// observation index, on exact integer numerators). Fences extend the
/// envelope by `factor` times its pointwise height; a curve is flagged when
/// it leaves the fences at any grid point.
pub fn functional_boxplot_flags(
    block: &[f64],
    n: usize,
    n_points: usize,
    band_col: &[u64],
    fence_factor: f64,
) -> Vec<bool> {
    debug_assert_eq!(block.len(), n * n_points);
    debug_assert_eq!(band_col.len(), n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&i| (std::cmp::Reverse(band_col[i]), i));
    let central = &order[..n.div_ceil(2)];

    let mut flags = vec![false; n];
    for k in 0..n_points {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in central {
            let v = block[i * n_points + k];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let height = hi - lo;
        let (fence_lo, fence_hi) = (lo - fence_factor * height, hi + fence_factor * height);
        for (i, flag) in flags.iter_mut().enumerate() {
            let v = block[i * n_points + k];
            if v < fence_lo || v > fence_hi {
                *flag = true;
            }
        }
    }
    flags
}

/// Outliergram shape screen.
///
/// Within one marginal sample, band depth is bounded above by the parabola
/// `f_n` of the epigraph index, reaching it exactly when curves do not
/// cross. The shape score `d_i = f_n(mei_i) - mbd_i` measures how much
/// crossing behavior curve `i` shows; scores beyond `Q3 + factor * IQR` are
/// flagged.
pub fn outliergram_flags(
    n: usize,
    columns: u64,
    band_col: &[u64],
    epi_col: &[u64],
    fence_factor: f64,
) -> Vec<bool> {
    let d = outliergram_scores(n, columns, band_col, epi_col);
    let q1 = quantile(&d, 0.25);
    let q3 = quantile(&d, 0.75);
    let fence = q3 + fence_factor * (q3 - q1);
    d.into_iter().map(|v| v > fence).collect()
}

/// The shape scores behind [`outliergram_flags`]; non-negative for any
/// tie-free sample, and exactly `0.0` when an observation sits on the
/// parabola.
///
/// The distance `f_n(e/(n m)) - b/(C(n,2) m)` over `m` columns reduces to the
/// integer numerator `(n+1)·m·e - e² - m² - m·b` scaled by the constant
/// `2 / (n (n-1) m²)`, so each score is a single correctly rounded division
/// and never carries accumulated float noise. Observations exactly on the
/// parabola (every non-crossing sample) score an exact zero, which keeps the
/// fence rule from reacting to rounding jitter.
pub fn outliergram_scores(n: usize, columns: u64, band_col: &[u64], epi_col: &[u64]) -> Vec<f64> {
    debug_assert_eq!(band_col.len(), n);
    debug_assert_eq!(epi_col.len(), n);
    let nn = n as i128;
    let m = columns as i128;
    let scale = 2.0 / ((nn * (nn - 1)) as f64 * (m * m) as f64);
    band_col
        .iter()
        .zip(epi_col)
        .map(|(&b, &e)| {
            let (b, e) = (b as i128, e as i128);
            let numerator = (nn + 1) * m * e - e * e - m * m - m * b;
            numerator as f64 * scale
        })
        .collect()
}

/// Aggregated screen results over all dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalFlags {
    n: usize,
    /// Per observation: 1-based dimensions flagged by the magnitude screen.
    magnitude_dims: Vec<Vec<u32>>,
    /// Per observation: 1-based dimensions flagged by the shape screen.
    shape_dims: Vec<Vec<u32>>,
    /// Per dimension: number of observations flagged by each screen.
    magnitude_counts: Vec<u32>,
    shape_counts: Vec<u32>,
}

impl MarginalFlags {
    pub fn new(n: usize, p: usize) -> Self {
        Self {
            n,
            magnitude_dims: vec![Vec::new(); n],
            shape_dims: vec![Vec::new(); n],
            magnitude_counts: vec![0; p],
            shape_counts: vec![0; p],
        }
    }

    /// Folds one dimension's screen into the aggregate. Dimensions arrive in
    /// order, so the per-observation lists stay sorted.
    pub fn record_dimension(&mut self, j: usize, screen: &DimensionScreen) {
        for (i, &flag) in screen.magnitude.iter().enumerate() {
            if flag {
                self.magnitude_dims[i].push(j as u32 + 1);
                self.magnitude_counts[j] += 1;
            }
        }
        for (i, &flag) in screen.shape.iter().enumerate() {
            if flag {
                self.shape_dims[i].push(j as u32 + 1);
                self.shape_counts[j] += 1;
            }
        }
    }

    /// 1-based dimensions where observation `i` (0-based) was magnitude-flagged.
    pub fn magnitude_dims(&self, i: usize) -> &[u32] {
        &self.magnitude_dims[i]
    }

    /// 1-based dimensions where observation `i` (0-based) was shape-flagged.
    pub fn shape_dims(&self, i: usize) -> &[u32] {
        &self.shape_dims[i]
    }

    pub fn magnitude_counts(&self) -> &[u32] {
        &self.magnitude_counts
    }

    pub fn shape_counts(&self) -> &[u32] {
        &self.shape_counts
    }

    /// Total flags of each kind over all `(observation, dimension)` pairs.
    pub fn totals(&self) -> (u64, u64) {
        (
            self.magnitude_counts.iter().map(|&c| c as u64).sum(),
            self.shape_counts.iter().map(|&c| c as u64).sum(),
        )
    }

    /// Serializable form: only observations with at least one flag appear.
    pub fn to_report(&self) -> MarginalReport {
        let collect = |dims: &Vec<Vec<u32>>| -> Vec<ObservationDims> {
            dims.iter()
                .enumerate()
                .filter(|(_, d)| !d.is_empty())
                .map(|(i, d)| ObservationDims {
                    observation: i + 1,
                    dimensions: d.clone(),
                })
                .collect()
        };
        MarginalReport {
            magnitude: collect(&self.magnitude_dims),
            shape: collect(&self.shape_dims),
            magnitude_counts: self.magnitude_counts.clone(),
            shape_counts: self.shape_counts.clone(),
        }
    }
}

/// Streams a dataset through the engine pass with the screens enabled and
/// returns only the marginal flags.
pub fn marginal_screen(
    source: &dyn DimensionSource,
    fence_factor: f64,
) -> Result<MarginalFlags, Error> {
    let cfg = AnalyzeConfig {
        fence_factor,
        marginal_screen: true,
        ..AnalyzeConfig::default()
    };
    let out = crate::engine::analyze(source, &cfg)?;
    Ok(out.marginal.expect("screens were requested"))
}

// ===========================================================================
