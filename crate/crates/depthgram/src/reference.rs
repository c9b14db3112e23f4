//! Slow, independent recomputation of the full analysis for validation.
//!
//! The streaming engine in [`crate::engine`] never materializes the dataset:
//! it folds per-dimension integer counts into accumulators and handles the
//! sign-aligned variant by swapping `n_ge`/`n_le` counts instead of negating
//! data. This module re-derives every quantity the slow, obvious way —
//! materialize each marginal sample and each fixed-time pseudo-sample as a
//! [`FunctionalSample`], call the plain depth routines on it, and for the
//! sign-aligned variant actually multiply the data through by the sign chain
//! and recompute from scratch.
//!
//! The two routes must agree to the last bit: the numerators are integers,
//! the second level ranks those integers (cast to `f64`, exact below `2^53`,
//! far above anything a test-sized dataset can produce), and the float
//! conversions are shared. Tests here drive both paths over random datasets
//! with heavy ties and assert exact equality of every matrix, every
//! DepthGram coordinate, and every flag.

use crate::depth::{mbd, mei, FunctionalSample};
use crate::engine::{build_depthgram, correlation_sign, DepthGram, Variant};
use crate::hdfd::{DimensionSource, MemoryDataset};
use crate::Error;

/// Everything the slow route computes, in the engine's layouts.
#[derive(Debug, Clone)]
pub struct ReferenceAnalysis {
    /// Band-depth numerators per dimension: `p * n`, row `j`, entry `i`.
    pub band_dims: Vec<u64>,
    /// Epigraph (`n_ge`) numerators per dimension, same layout.
    pub epi_dims: Vec<u64>,
    /// Band-depth numerators per time point: `n * N`, entry `[i * N + k]`.
    pub band_time: Vec<u64>,
    /// Epigraph numerators per time point, same layout.
    pub epi_time: Vec<u64>,
    /// Epigraph numerators of the sign-aligned data, same layout. Computed
    /// here by literally negating flipped dimensions and recounting.
    pub epi_time_aligned: Vec<u64>,
    /// Band numerators of the sign-aligned data. Band depth only looks at
    /// which values lie between which, so this must equal [`band_time`];
    /// the field exists so tests can confirm that instead of assuming it.
    ///
    /// [`band_time`]: Self::band_time
    pub band_time_aligned: Vec<u64>,
    /// Cumulative sign per dimension (`+1`/`-1`), length `p`.
    pub signs: Vec<i64>,
    /// DepthGrams in [`Variant::ALL`] order.
    pub depthgrams: [DepthGram; 3],
}

/// Recomputes the whole analysis by materializing every sample.
///
/// Memory is `O(n * max(p, N))` per sample plus the dataset itself, so this
/// is strictly a validation tool; the streaming engine is the product path.
pub fn reference_analysis(
    data: &MemoryDataset,
    fence_factor: f64,
) -> Result<ReferenceAnalysis, Error> {
    let shape = data.shape();
    let (n, p, n_points) = (shape.n, shape.p, shape.n_points);

    // First level, dimensions direction: one marginal sample per dimension.
    let mut band_dims = vec![0u64; p * n];
    let mut epi_dims = vec![0u64; p * n];
    let mut block = vec![0.0; shape.block_len()];
    for j in 0..p {
        data.read_dimension(j, &mut block)?;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| block[i * n_points..(i + 1) * n_points].to_vec())
            .collect();
        let sample = FunctionalSample::from_rows(rows)?;
        band_dims[j * n..(j + 1) * n].copy_from_slice(&mbd(&sample).numerators);
        epi_dims[j * n..(j + 1) * n].copy_from_slice(&mei(&sample).numerators);
    }

    // Sign chain over consecutive per-dimension epigraph columns.
    let mut signs = vec![1i64; p];
    for j in 1..p {
        let step = correlation_sign(&epi_dims[(j - 1) * n..j * n], &epi_dims[j * n..(j + 1) * n]);
        signs[j] = signs[j - 1] * step;
    }

    // First level, time direction: one pseudo-sample per time point, rows
    // indexed by observation and columns by dimension. The depth numerator
    // of row `i` already sums over dimensions, which is exactly the engine's
    // accumulated entry.
    let band_time = time_numerators(data, None, TimeCount::Band)?;
    let epi_time = time_numerators(data, None, TimeCount::Epigraph)?;
    let band_time_aligned = time_numerators(data, Some(&signs), TimeCount::Band)?;
    let epi_time_aligned = time_numerators(data, Some(&signs), TimeCount::Epigraph)?;

    // Second level: rank the rows of each first-level matrix. A DepthGram
    // point is (1 - MEI of the band rows, MBD of the epigraph rows).
    let dims_gram = second_level(
        Variant::Dimensions,
        n,
        p,
        &transpose(&band_dims, p, n),
        &transpose(&epi_dims, p, n),
        fence_factor,
    )?;
    let time_gram = second_level(
        Variant::Time,
        n,
        n_points,
        &band_time,
        &epi_time,
        fence_factor,
    )?;
    let tc_gram = second_level(
        Variant::TimeCorrelation,
        n,
        n_points,
        &band_time_aligned,
        &epi_time_aligned,
        fence_factor,
    )?;

    Ok(ReferenceAnalysis {
        band_dims,
        epi_dims,
        band_time,
        epi_time,
        epi_time_aligned,
        band_time_aligned,
        signs,
        depthgrams: [dims_gram, time_gram, tc_gram],
    })
}

enum TimeCount {
    Band,
    Epigraph,
}

/// `n * N` numerators, entry `[i * N + k]`, from the pseudo-sample at each
/// time point, optionally with flipped dimensions negated first.
fn time_numerators(
    data: &MemoryDataset,
    signs: Option<&[i64]>,
    which: TimeCount,
) -> Result<Vec<u64>, Error> {
    let shape = data.shape();
    let (n, p, n_points) = (shape.n, shape.p, shape.n_points);
    let mut out = vec![0u64; n * n_points];
    for k in 0..n_points {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        let s = signs.map_or(1, |s| s[j]);
                        data.value(i, j, k) * s as f64
                    })
                    .collect()
            })
            .collect();
        let sample = FunctionalSample::from_rows(rows)?;
        let vector = match which {
            TimeCount::Band => mbd(&sample),
            TimeCount::Epigraph => mei(&sample),
        };
        for i in 0..n {
            out[i * n_points + k] = vector.numerators[i];
        }
    }
    Ok(out)
}

/// Transposes a `rows x cols` flat matrix into `cols x rows`.
fn transpose(data: &[u64], rows: usize, cols: usize) -> Vec<u64> {
    let mut out = vec![0u64; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Ranks the rows of the two first-level matrices (`n` rows, `columns`
/// entries each) with the plain depth routines and assembles the DepthGram.
fn second_level(
    variant: Variant,
    n: usize,
    columns: usize,
    band_rows: &[u64],
    epi_rows: &[u64],
    fence_factor: f64,
) -> Result<DepthGram, Error> {
    let as_sample = |matrix: &[u64]| -> Result<FunctionalSample, Error> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                matrix[i * columns..(i + 1) * columns]
                    .iter()
                    .map(|&v| v as f64)
                    .collect()
            })
            .collect();
        FunctionalSample::from_rows(rows)
    };
    let epi_numerators = mei(&as_sample(band_rows)?).numerators;
    let band_numerators = mbd(&as_sample(epi_rows)?).numerators;
    Ok(build_depthgram(
        variant,
        n,
        columns as u64,
        epi_numerators,
        band_numerators,
        fence_factor,
    ))
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{analyze, AnalyzeConfig};
    use crate::hdfd::DatasetShape;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_dataset(rng: &mut StdRng, n: usize, p: usize, n_points: usize) -> MemoryDataset {
        let shape = DatasetShape { n, p, n_points };
        let values: Vec<f64> = (0..p * n * n_points)
            // Half-integer grid so ties across observations are common.
            .map(|_| (rng.gen_range(-3.0..3.0) * 2.0_f64).round() / 2.0)
            .collect();
        MemoryDataset::new(shape, values, None).unwrap()
    }

    #[test]
    fn engine_matches_reference_on_random_datasets() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0007);
        let mut cfg = AnalyzeConfig::default();
        cfg.emit_matrices = true;
        cfg.chunk_dims = 3; // force several chunks even at test sizes
        for &n in &[2usize, 3, 5, 8] {
            for &p in &[1usize, 2, 5, 9] {
                for &n_points in &[1usize, 3, 6] {
                    let data = random_dataset(&mut rng, n, p, n_points);
                    let fast = analyze(&data, &cfg).unwrap();
                    let slow = reference_analysis(&data, cfg.fence_factor).unwrap();

                    let matrices = fast.matrices;
                    assert_eq!(matrices.band_time.data, slow.band_time);
                    assert_eq!(matrices.epi_time.data, slow.epi_time);
                    assert_eq!(matrices.epi_time_aligned.data, slow.epi_time_aligned);
                    assert_eq!(matrices.band_dims.unwrap().data, slow.band_dims);
                    assert_eq!(matrices.epi_dims.unwrap().data, slow.epi_dims);
                    // Band counts ignore per-dimension orientation entirely.
                    assert_eq!(slow.band_time_aligned, slow.band_time);

                    for (fast_gram, slow_gram) in fast.depthgrams.iter().zip(&slow.depthgrams) {
                        assert_eq!(fast_gram, slow_gram, "n={n} p={p} N={n_points}");
                    }

                    let flipped = slow.signs.iter().filter(|&&s| s < 0).count() as u64;
                    assert_eq!(fast.report.sign_chain.flipped_dimensions, flipped);
                }
            }
        }
    }

    #[test]
    fn negating_dimensions_preserves_band_counts() {
        let mut rng = StdRng::seed_from_u64(41);
        let data = random_dataset(&mut rng, 6, 5, 4);
        let shape = data.shape();
        let mut flipped_values = Vec::with_capacity(shape.p * shape.block_len());
        for j in 0..shape.p {
            let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            for i in 0..shape.n {
                for k in 0..shape.n_points {
                    flipped_values.push(data.value(i, j, k) * sign);
                }
            }
        }
        let flipped = MemoryDataset::new(shape, flipped_values, None).unwrap();

        let mut cfg = AnalyzeConfig::default();
        cfg.emit_matrices = true;
        let original = analyze(&data, &cfg).unwrap();
        let negated = analyze(&flipped, &cfg).unwrap();

        // Band membership is unchanged by negating a dimension, in both
        // directions of the analysis.
        assert_eq!(
            original.matrices.band_time.data,
            negated.matrices.band_time.data
        );
        assert_eq!(
            original.matrices.band_dims.unwrap().data,
            negated.matrices.band_dims.unwrap().data
        );
        // Epigraph counts are not: a flipped dimension reverses its ranks.
        assert_ne!(
            original.matrices.epi_time.data,
            negated.matrices.epi_time.data
        );
    }
}
