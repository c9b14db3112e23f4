//! Synthetic functional datasets with labeled outliers, and the study
//! harness that turns replicated runs into detection-rate tables.
//!
//! Four generator models share one template: observation `i` on dimension
//! `j` is a reference curve times a dimension-specific coefficient
//! `h_j(t)`, plus a Gaussian-process noise draw. A fixed tail of 15
//! observations is reserved for outliers — 5 magnitude (shifted by +10),
//! 5 shape (a different reference curve), 5 joint (another observation's
//! reference, breaking cross-dimensional coherence) — and each outlier
//! misbehaves only on a random subset of `round(c * p)` contaminated
//! dimensions, following the typical recipe bit-for-bit everywhere else.
//!
//! # Reproducibility
//!
//! Every random quantity comes from a ChaCha12 counter generator seeded
//! from the dataset seed, with one *stream* per purpose:
//!
//! | stream id            | purpose                                       |
//! |----------------------|-----------------------------------------------|
//! | `j * n + i`          | noise curve for observation `i`, dimension `j` (0-based) |
//! | `2^48`               | the α intercepts, drawn in observation order  |
//! | `2 * 2^48 + i`       | contaminated-dimension sample for outlier `i` |
//! | `3 * 2^48 + i`       | joint reference draws for outlier `i`         |
//!
//! Streams are independent by construction, so dimensions can be generated
//! in any order — or in parallel — and the dataset comes out bit-identical.
//! `n * p` must stay below `2^48` to keep the noise streams clear of the
//! tagged ones; the config validator enforces that.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::cmp_finite;
use crate::engine::{analyze, AnalyzeConfig, Variant};
use crate::hdfd::{DatasetShape, DatasetWriter, DimensionSource, HdfdHeader};
use crate::marginal::MarginalFlags;
use crate::Error;

const ALPHA_STREAM: u64 = 1 << 48;
const DIMS_STREAM_BASE: u64 = 2 << 48;
const REFS_STREAM_BASE: u64 = 3 << 48;

// ============================================================================
// Models and configuration
// ============================================================================

/// The four generator models. One/Three use a sine reference, Two/Four a
/// linear one with alternating coefficient signs; Three/Four differ from
/// One/Two only in how joint outliers pick their reference observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Model {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl Model {
    /// Model from its conventional number.
    pub fn from_number(number: u8) -> Option<Model> {
        match number {
            1 => Some(Model::One),
            2 => Some(Model::Two),
            3 => Some(Model::Three),
            4 => Some(Model::Four),
            _ => None,
        }
    }

    /// Conventional number of the model.
    pub fn number(self) -> u8 {
        self as u8
    }

    /// Even-numbered dimensions get a negated coefficient.
    fn alternating(self) -> bool {
        matches!(self, Model::Two | Model::Four)
    }

    /// Joint outliers reference themselves on odd dimensions and a mirror
    /// observation on even ones, instead of a random typical observation.
    fn mirrored_joint_refs(self) -> bool {
        matches!(self, Model::Three | Model::Four)
    }
}

impl From<Model> for u8 {
    fn from(model: Model) -> u8 {
        model.number()
    }
}

impl TryFrom<u8> for Model {
    type Error = String;

    fn try_from(number: u8) -> Result<Model, String> {
        Model::from_number(number).ok_or_else(|| format!("model must be 1..=4, got {number}"))
    }
}

/// Observation classes. The 15 nominal outliers keep their role labels even
/// at `c = 0`, where nothing is contaminated and every curve behaves
/// typically; scoring treats them as typical in that case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Typical,
    Magnitude,
    Shape,
    Joint,
}

/// One synthetic dataset's parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: Model,
    /// Observations; at least 20 so the 15 nominal outliers leave a bulk.
    pub n: usize,
    /// Dimensions.
    pub p: usize,
    /// Time points; the grid is `t_k = k / (n_points - 1)` on `[0, 1]`.
    pub n_points: usize,
    /// Contamination rate in `[0, 1]`: each outlier misbehaves on
    /// `round(c * p)` dimensions.
    pub c: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Validates counts, the contamination rate, and stream-id headroom.
    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 20 {
            return Err(Error::Config(format!(
                "need at least 20 observations (15 outlier slots plus a bulk), got {}",
                self.n
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Config(format!(
                "need at least 2 time points for a grid on [0, 1], got {}",
                self.n_points
            )));
        }
        if !(self.c.is_finite() && (0.0..=1.0).contains(&self.c)) {
            return Err(Error::Config(format!(
                "contamination rate must lie in [0, 1], got {}",
                self.c
            )));
        }
        let shape = self.shape();
        shape.validate()?;
        if (self.n as u128) * (self.p as u128) >= 1 << 48 {
            return Err(Error::Config(format!(
                "n * p = {} leaves no per-curve noise streams below 2^48",
                self.n * self.p
            )));
        }
        Ok(())
    }

    /// Dataset shape this config generates.
    pub fn shape(&self) -> DatasetShape {
        DatasetShape {
            n: self.n,
            p: self.p,
            n_points: self.n_points,
        }
    }

    /// Contaminated dimensions per outlier: `round(c * p)`.
    pub fn contaminated_per_outlier(&self) -> usize {
        (self.c * self.p as f64).round() as usize
    }

    /// Role of a 0-based observation index: the last 15 slots are
    /// magnitude, shape, joint in blocks of five.
    pub fn role_of(&self, i: usize) -> Role {
        if i >= self.n - 5 {
            Role::Joint
        } else if i >= self.n - 10 {
            Role::Shape
        } else if i >= self.n - 15 {
            Role::Magnitude
        } else {
            Role::Typical
        }
    }
}

/// Evenly spaced grid on `[0, 1]`: `t_k = k / (n_points - 1)`.
/// A single-point grid degenerates to `[0.0]`.
pub fn time_grid(n_points: usize) -> Vec<f64> {
    if n_points == 1 {
        return vec![0.0];
    }
    (0..n_points)
        .map(|k| k as f64 / (n_points - 1) as f64)
        .collect()
}

/// Dimension coefficient `h_j(t) = 1 + 2 t^{1 + j/p} (1 - t)^{2 - j/p}`
/// with 1-based `j`; `alternating` negates even dimensions. Both power
/// terms vanish at the endpoints (`0^positive = 0`), so `h_j(0) = h_j(1)
/// = ±1`.
///
/// # Panics
///
/// If `t` is outside `[0, 1]` or `j` is not in `1..=p`.
pub fn coefficient_h(j: usize, p: usize, t: f64, alternating: bool) -> f64 {
    assert!((0.0..=1.0).contains(&t), "t={t} outside [0, 1]");
    assert!(j >= 1 && j <= p, "dimension {j} outside 1..={p}");
    let ratio = j as f64 / p as f64;
    let value = 1.0 + 2.0 * t.powf(1.0 + ratio) * (1.0 - t).powf(2.0 - ratio);
    if alternating && j % 2 == 0 {
        -value
    } else {
        value
    }
}

/// Typical reference curve at intercept `alpha`.
fn typical_reference(model: Model, t: f64, alpha: f64) -> f64 {
    use std::f64::consts::PI;
    match model {
        Model::One | Model::Three => (4.0 * PI * t).sin() + alpha,
        Model::Two | Model::Four => 4.0 * t + alpha,
    }
}

/// Shape-outlier reference curve at intercept `alpha`. For the sine
/// models this is `cos(4πt + π/2) = -sin(4πt)`: same range and frequency,
/// opposite phase.
fn shape_reference(model: Model, t: f64, alpha: f64) -> f64 {
    use std::f64::consts::PI;
    match model {
        Model::One | Model::Three => (4.0 * PI * t + PI / 2.0).cos() + alpha,
        Model::Two | Model::Four => 4.0 * t + 2.0 * (4.0 * (t + 0.5) * PI).sin() + alpha,
    }
}

// ============================================================================
// Gaussian-process noise
// ============================================================================

/// Stationary noise kernel: `γ(s, t) = 0.3 exp(-|s - t| / 0.3)`.
fn noise_kernel(s: f64, t: f64) -> f64 {
    0.3 * (-(s - t).abs() / 0.3).exp()
}

/// A zero-mean Gaussian process on the standard grid, sampled through a
/// cached lower-triangular factor of its covariance matrix.
#[derive(Debug)]
pub struct GpNoise {
    n_points: usize,
    /// Row-major lower-triangular factor `L` with `L Lᵀ = Σ`.
    lower: Vec<f64>,
}

impl GpNoise {
    /// Factors the covariance matrix for an `n_points` grid. If the exact
    /// matrix is numerically indefinite, retries once with `1e-10` added
    /// to the diagonal before giving up.
    pub fn new(n_points: usize) -> Result<Self, Error> {
        assert!(n_points >= 1, "need at least one grid point");
        let grid = time_grid(n_points);
        let mut cov = vec![0.0; n_points * n_points];
        for k in 0..n_points {
            for l in 0..n_points {
                cov[k * n_points + l] = noise_kernel(grid[k], grid[l]);
            }
        }
        let lower = cholesky_lower(&cov, n_points)
            .or_else(|| {
                let mut jittered = cov;
                for k in 0..n_points {
                    jittered[k * n_points + k] += 1e-10;
                }
                cholesky_lower(&jittered, n_points)
            })
            .ok_or_else(|| {
                Error::Factorization(format!(
                    "noise covariance for {n_points} grid points is not positive definite, \
                     even with 1e-10 diagonal jitter"
                ))
            })?;
        Ok(Self { n_points, lower })
    }

    /// Returns the process for this grid size from a global cache, so
    /// repeated studies factor each covariance once.
    pub fn shared(n_points: usize) -> Result<Arc<GpNoise>, Error> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GpNoise>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(gp) = guard.get(&n_points) {
            return Ok(Arc::clone(gp));
        }
        let gp = Arc::new(GpNoise::new(n_points)?);
        guard.insert(n_points, Arc::clone(&gp));
        Ok(gp)
    }

    /// Grid size this process was factored for.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Fills `out` with one draw of the process: `out = L z` with `z`
    /// standard normal. Works in place, back to front, so no scratch
    /// buffer is needed.
    pub fn sample_into(&self, rng: &mut impl Rng, out: &mut [f64]) {
        let n = self.n_points;
        assert_eq!(out.len(), n, "output buffer must match the grid");
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for k in (0..n).rev() {
            let row = &self.lower[k * n..k * n + k + 1];
            let mut acc = 0.0;
            for (l, &w) in row.iter().enumerate() {
                acc += w * out[l];
            }
            out[k] = acc;
        }
    }
}

/// Dense Cholesky factorization, lower triangular. Returns `None` when a
/// pivot is non-positive or non-finite.
fn cholesky_lower(matrix: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut lower = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i * n + j];
            for k in 0..j {
                sum -= lower[i * n + k] * lower[j * n + k];
            }
            if i == j {
                if !(sum.is_finite() && sum > 0.0) {
                    return None;
                }
                lower[i * n + i] = sum.sqrt();
            } else {
                lower[i * n + j] = sum / lower[j * n + j];
            }
        }
    }
    Some(lower)
}

// ============================================================================
// Ground truth
// ============================================================================

/// Joint-outlier reference for one contaminated dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReference {
    /// 1-based dimension.
    pub dimension: u32,
    /// 1-based observation whose typical curve is copied there.
    pub reference: u32,
}

/// Everything known about one observation at generation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationTruth {
    /// 1-based observation id.
    pub id: u32,
    pub role: Role,
    /// Sorted 1-based contaminated dimensions; empty for typical
    /// observations and at `c = 0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contaminated_dimensions: Vec<u32>,
    /// Joint outliers only: reference observation per contaminated
    /// dimension, sorted by dimension.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_map: Vec<DimensionReference>,
    /// Models Three/Four joint outliers only: the mirror observation used
    /// on even dimensions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_reference: Option<u32>,
}

/// Labels for one generated dataset, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub schema_version: u32,
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub n_points: usize,
    pub c: f64,
    pub seed: u64,
    /// `round(c * p)`, the size of every contaminated-dimension set.
    pub contaminated_per_outlier: usize,
    pub observations: Vec<ObservationTruth>,
    /// The drawn intercepts, after any joint-outlier reassignment.
    pub alphas: Vec<f64>,
}

impl GroundTruth {
    /// 1-based ids with the given role.
    pub fn ids_with_role(&self, role: Role) -> Vec<usize> {
        self.observations
            .iter()
            .filter(|o| o.role == role)
            .map(|o| o.id as usize)
            .collect()
    }

    /// Role of a 1-based observation id.
    pub fn role_of_id(&self, id: usize) -> Role {
        self.observations[id - 1].role
    }

    /// Whether any contamination happens at this configuration.
    pub fn is_contaminated(&self) -> bool {
        self.contaminated_per_outlier > 0
    }
}

// ============================================================================
// The generator
// ============================================================================

/// A synthetic dataset as a streaming dimension source. Construction draws
/// all cross-dimension state (intercepts, contaminated sets, joint
/// references); each `read_dimension` call then only needs its own noise
/// streams, so blocks can be produced in any order or in parallel.
#[derive(Debug)]
pub struct SynthSource {
    config: ModelConfig,
    grid: Vec<f64>,
    gp: Arc<GpNoise>,
    truth: GroundTruth,
}

impl SynthSource {
    pub fn new(config: ModelConfig) -> Result<Self, Error> {
        config.validate()?;
        let grid = time_grid(config.n_points);
        let gp = GpNoise::shared(config.n_points)?;
        let truth = draw_ground_truth(&config)?;
        Ok(Self {
            config,
            grid,
            gp,
            truth,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn into_ground_truth(self) -> GroundTruth {
        self.truth
    }

    /// ChaCha12 generator positioned on the given stream.
    fn stream_rng(&self, stream: u64) -> ChaCha12Rng {
        stream_rng(self.config.seed, stream)
    }

    /// Reference observation (0-based) for a joint outlier `i` (0-based)
    /// on contaminated 1-based dimension `j`.
    fn joint_reference(&self, i: usize, j: u32) -> usize {
        let obs = &self.truth.observations[i];
        let at = obs
            .reference_map
            .binary_search_by_key(&j, |r| r.dimension)
            .expect("contaminated dimension must have a reference entry");
        obs.reference_map[at].reference as usize - 1
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `k` distinct values from `1..=p`, sorted. A partial Fisher–Yates
/// shuffle, spelled out here so the sampled sets are a fixed function of
/// the generator output alone.
fn sample_dimensions(rng: &mut ChaCha12Rng, p: usize, k: usize) -> Vec<u32> {
    debug_assert!(k <= p);
    let mut pool: Vec<u32> = (1..=p as u32).collect();
    for slot in 0..k {
        let pick = rng.gen_range(slot..pool.len());
        pool.swap(slot, pick);
    }
    let mut out = pool;
    out.truncate(k);
    out.sort_unstable();
    out
}

/// Draws intercepts, contaminated sets, and joint references.
fn draw_ground_truth(config: &ModelConfig) -> Result<GroundTruth, Error> {
    let n = config.n;
    let k = config.contaminated_per_outlier();

    let mut alphas: Vec<f64> = {
        let mut rng = stream_rng(config.seed, ALPHA_STREAM);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    };

    let joint_ids: Vec<usize> = (n - 5..n).collect();
    let typical_ids: Vec<usize> = (0..n - 15).collect();

    // Models Three/Four: move the three lowest and two highest drawn
    // intercepts onto the joint outliers (in id order), swapping with the
    // current holders, so each joint outlier sits at one extreme of the
    // intercept distribution.
    let mut mirrors: HashMap<usize, usize> = HashMap::new();
    if config.model.mirrored_joint_refs() {
        let mut sorted = alphas.clone();
        sorted.sort_by(|a, b| cmp_finite(*a, *b));
        let targets = [
            sorted[0],
            sorted[1],
            sorted[2],
            sorted[n - 1],
            sorted[n - 2],
        ];
        for (slot, &target) in targets.iter().enumerate() {
            let holder = alphas
                .iter()
                .position(|&a| a == target)
                .expect("order statistic came from this sample");
            alphas.swap(holder, joint_ids[slot]);
        }

        // Mirror reference: an outlier at the u-quantile of the intercepts
        // points at the typical observation near the (1 - u)-quantile, so
        // its even-dimension curves pair a low intercept with a high one
        // (or vice versa).
        let mut typicals_by_alpha = typical_ids.clone();
        typicals_by_alpha.sort_by(|&a, &b| cmp_finite(alphas[a], alphas[b]).then(a.cmp(&b)));
        for &i in &joint_ids {
            let below = alphas
                .iter()
                .enumerate()
                .filter(|&(q, &a)| q != i && a < alphas[i])
                .count();
            let u = below as f64 / (n - 1) as f64;
            let slot = ((1.0 - u) * (typical_ids.len() - 1) as f64).round() as usize;
            mirrors.insert(i, typicals_by_alpha[slot]);
        }
    }

    let mut observations = Vec::with_capacity(n);
    for i in 0..n {
        let role = config.role_of(i);
        let mut obs = ObservationTruth {
            id: i as u32 + 1,
            role,
            contaminated_dimensions: Vec::new(),
            reference_map: Vec::new(),
            mirror_reference: None,
        };
        if role != Role::Typical && k > 0 {
            let mut rng = stream_rng(config.seed, DIMS_STREAM_BASE + i as u64);
            obs.contaminated_dimensions = sample_dimensions(&mut rng, config.p, k);
        }
        if role == Role::Joint && k > 0 {
            if config.model.mirrored_joint_refs() {
                let mirror = mirrors[&i];
                obs.mirror_reference = Some(mirror as u32 + 1);
                obs.reference_map = obs
                    .contaminated_dimensions
                    .iter()
                    .map(|&j| DimensionReference {
                        dimension: j,
                        reference: if j % 2 == 1 {
                            i as u32 + 1
                        } else {
                            mirror as u32 + 1
                        },
                    })
                    .collect();
            } else {
                let mut rng = stream_rng(config.seed, REFS_STREAM_BASE + i as u64);
                obs.reference_map = obs
                    .contaminated_dimensions
                    .iter()
                    .map(|&j| DimensionReference {
                        dimension: j,
                        reference: typical_ids[rng.gen_range(0..typical_ids.len())] as u32 + 1,
                    })
                    .collect();
            }
        }
        observations.push(obs);
    }

    Ok(GroundTruth {
        schema_version: 1,
        model: config.model,
        n,
        p: config.p,
        n_points: config.n_points,
        c: config.c,
        seed: config.seed,
        contaminated_per_outlier: k,
        observations,
        alphas,
    })
}

impl DimensionSource for SynthSource {
    fn shape(&self) -> DatasetShape {
        self.config.shape()
    }

    fn time_grid(&self) -> Option<&[f64]> {
        Some(&self.grid)
    }

    fn read_dimension(&self, j: usize, out: &mut [f64]) -> Result<(), Error> {
        let config = &self.config;
        let (n, n_points) = (config.n, config.n_points);
        assert_eq!(out.len(), n * n_points, "block buffer must be n * N");
        let dim = j as u32 + 1;
        let alternating = config.model.alternating();
        let h: Vec<f64> = self
            .grid
            .iter()
            .map(|&t| coefficient_h(dim as usize, config.p, t, alternating))
            .collect();

        for i in 0..n {
            let row = &mut out[i * n_points..(i + 1) * n_points];
            let mut rng = self.stream_rng(j as u64 * n as u64 + i as u64);
            // Noise first: the stream is consumed identically whichever
            // branch runs, which is what makes an outlier's uncontaminated
            // dimensions bitwise equal to its typical counterpart.
            self.gp.sample_into(&mut rng, row);

            let obs = &self.truth.observations[i];
            let contaminated = obs.contaminated_dimensions.binary_search(&dim).is_ok();
            let branch = if contaminated { obs.role } else { Role::Typical };
            match branch {
                Role::Typical => {
                    for (k, v) in row.iter_mut().enumerate() {
                        *v += typical_reference(config.model, self.grid[k], self.truth.alphas[i])
                            * h[k];
                    }
                }
                Role::Magnitude => {
                    for (k, v) in row.iter_mut().enumerate() {
                        *v += 10.0
                            + typical_reference(config.model, self.grid[k], self.truth.alphas[i])
                                * h[k];
                    }
                }
                Role::Shape => {
                    for (k, v) in row.iter_mut().enumerate() {
                        *v += shape_reference(config.model, self.grid[k], self.truth.alphas[i])
                            * h[k];
                    }
                }
                Role::Joint => {
                    let reference = self.joint_reference(i, dim);
                    for (k, v) in row.iter_mut().enumerate() {
                        *v += typical_reference(
                            config.model,
                            self.grid[k],
                            self.truth.alphas[reference],
                        ) * h[k];
                    }
                }
            }
        }
        Ok(())
    }
}

/// Generates a dataset to an HDFD file (dimension blocks produced in
/// parallel, written in order) and returns its labels.
pub fn generate_to_file(config: ModelConfig, path: &Path) -> Result<GroundTruth, Error> {
    let source = SynthSource::new(config)?;
    let shape = source.shape();
    let header = HdfdHeader {
        shape,
        time_grid: Some(source.grid.clone()),
    };
    let mut writer = DatasetWriter::create(path, &header)?;
    let chunk = 64;
    let mut j0 = 0;
    while j0 < shape.p {
        let j1 = (j0 + chunk).min(shape.p);
        let blocks: Vec<Vec<f64>> = (j0..j1)
            .into_par_iter()
            .map(|j| {
                let mut block = vec![0.0; shape.block_len()];
                source
                    .read_dimension(j, &mut block)
                    .expect("synthetic blocks are always finite");
                block
            })
            .collect();
        for block in &blocks {
            writer.write_dimension(block)?;
        }
        j0 = j1;
    }
    writer.finish()?;
    Ok(source.into_ground_truth())
}

/// Writes labels as pretty-printed JSON.
pub fn write_labels(truth: &GroundTruth, path: &Path) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(truth)
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads labels back from JSON.
pub fn read_labels(path: &Path) -> Result<GroundTruth, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

// ============================================================================
// Scoring
// ============================================================================

/// Detection rates for one replicate under the DepthGram rule: the union
/// of flagged observations across the three variants, scored per role.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DetectionRates {
    /// Flagged magnitude outliers / 5 (0 when nothing is contaminated).
    pub magnitude: f64,
    /// Flagged shape outliers / 5.
    pub shape: f64,
    /// Flagged joint outliers / 5.
    pub joint: f64,
    /// Flagged typical observations over the typical count; at `c = 0`
    /// every observation counts as typical.
    pub false_rate: f64,
}

/// Scores a flagged-id union (sorted, 1-based) against the labels.
pub fn score_depthgram_rule(truth: &GroundTruth, union: &[usize]) -> DetectionRates {
    let n = truth.n;
    if !truth.is_contaminated() {
        return DetectionRates {
            magnitude: 0.0,
            shape: 0.0,
            joint: 0.0,
            false_rate: union.len() as f64 / n as f64,
        };
    }
    let flagged = |id: usize| union.binary_search(&id).is_ok();
    let rate_for = |role: Role| {
        let ids = truth.ids_with_role(role);
        ids.iter().filter(|&&id| flagged(id)).count() as f64 / ids.len() as f64
    };
    let typical_ids = truth.ids_with_role(Role::Typical);
    let false_rate =
        typical_ids.iter().filter(|&&id| flagged(id)).count() as f64 / typical_ids.len() as f64;
    DetectionRates {
        magnitude: rate_for(Role::Magnitude),
        shape: rate_for(Role::Shape),
        joint: rate_for(Role::Joint),
        false_rate,
    }
}

/// Detection rates for one replicate under the per-dimension screens,
/// counted over (observation, dimension) pairs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MarginalRates {
    /// Boxplot-flagged pairs among {magnitude outlier} × {its contaminated
    /// dimensions}, over `5 * round(c * p)`.
    pub magnitude_correct: f64,
    /// All other boxplot-flagged pairs, over the remaining pair count.
    pub magnitude_false: f64,
    /// Same for the outliergram screen against shape outliers.
    pub shape_correct: f64,
    pub shape_false: f64,
}

/// Scores the per-dimension screens against the labels.
pub fn score_marginal(truth: &GroundTruth, flags: &MarginalFlags) -> MarginalRates {
    let n = truth.n as u64;
    let p = truth.p as u64;
    let k = truth.contaminated_per_outlier as u64;
    let (magnitude_total, shape_total) = flags.totals();

    let correct_pairs = |role: Role, dims_of: &dyn Fn(usize) -> Vec<u32>| -> u64 {
        truth
            .observations
            .iter()
            .filter(|o| o.role == role)
            .map(|o| {
                let flagged = dims_of(o.id as usize - 1);
                // Both lists are sorted; count the overlap with two cursors.
                let mut hits = 0u64;
                let (mut a, mut b) = (0, 0);
                let truth_dims = &o.contaminated_dimensions;
                while a < flagged.len() && b < truth_dims.len() {
                    match flagged[a].cmp(&truth_dims[b]) {
                        std::cmp::Ordering::Less => a += 1,
                        std::cmp::Ordering::Greater => b += 1,
                        std::cmp::Ordering::Equal => {
                            hits += 1;
                            a += 1;
                            b += 1;
                        }
                    }
                }
                hits
            })
            .sum()
    };

    if k == 0 {
        let all = (n * p) as f64;
        return MarginalRates {
            magnitude_correct: 0.0,
            magnitude_false: magnitude_total as f64 / all,
            shape_correct: 0.0,
            shape_false: shape_total as f64 / all,
        };
    }

    let magnitude_hits = correct_pairs(Role::Magnitude, &|i| flags.magnitude_dims(i).to_vec());
    let shape_hits = correct_pairs(Role::Shape, &|i| flags.shape_dims(i).to_vec());
    let outlying = 5 * k;
    let rest = n * p - outlying;
    MarginalRates {
        magnitude_correct: magnitude_hits as f64 / outlying as f64,
        magnitude_false: (magnitude_total - magnitude_hits) as f64 / rest as f64,
        shape_correct: shape_hits as f64 / outlying as f64,
        shape_false: (shape_total - shape_hits) as f64 / rest as f64,
    }
}

// ============================================================================
// The study harness
// ============================================================================

/// A replicated simulation study over a contamination grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub n_points: usize,
    pub c_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub fence_factor: f64,
    /// Also run the per-dimension screens each replicate (slower at large
    /// `p`; required for the marginal rate columns).
    pub marginal_rule: bool,
    /// Keep every replicate's DepthGram points for pooled summaries.
    pub collect_points: bool,
}

impl StudyConfig {
    /// The conventional layout: n = 100, N = 100, c over {0, 0.25, 0.5,
    /// 0.75, 1}, 200 replicates.
    pub fn standard(model: Model, p: usize, seed: u64) -> Self {
        Self {
            model,
            n: 100,
            p,
            n_points: 100,
            c_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            replicates: 200,
            seed,
            fence_factor: 1.5,
            marginal_rule: true,
            collect_points: false,
        }
    }
}

/// Mean and sample standard deviation over replicates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    fn over(values: impl ExactSizeIterator<Item = f64> + Clone) -> Stat {
        let count = values.len() as f64;
        let mean = values.clone().sum::<f64>() / count;
        let sd = if values.len() > 1 {
            (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, sd }
    }
}

/// Aggregated DepthGram-rule rates at one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateTable {
    pub magnitude: Stat,
    pub shape: Stat,
    pub joint: Stat,
    pub false_rate: Stat,
}

/// Aggregated per-dimension screen rates at one grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalRateTable {
    pub magnitude_correct: Stat,
    pub magnitude_false: Stat,
    pub shape_correct: Stat,
    pub shape_false: Stat,
}

/// One contamination level's aggregated results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub c: f64,
    pub depthgram: RateTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginal: Option<MarginalRateTable>,
}

/// The study's aggregated output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudySummary {
    pub schema_version: u32,
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub n_points: usize,
    pub replicates: usize,
    pub seed: u64,
    pub fence_factor: f64,
    pub rows: Vec<StudyRow>,
}

/// One pooled DepthGram point, tagged with everything a density summary
/// needs to stratify by.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PooledPoint {
    pub c: f64,
    pub replicate: u32,
    pub variant: Variant,
    /// 1-based observation id.
    pub observation: u32,
    pub role: Role,
    pub dg1: f64,
    pub dg2: f64,
}

/// Aggregated summary plus (optionally) the pooled point cloud.
#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub summary: StudySummary,
    pub points: Vec<PooledPoint>,
}

/// Derives one replicate's dataset seed from the study seed and the grid
/// position, by chaining a 64-bit finalizer. Replicates are therefore
/// independent of execution order and thread count.
pub fn replicate_seed(study_seed: u64, c_index: usize, replicate: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(study_seed).wrapping_add(c_index as u64)).wrapping_add(replicate as u64))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct ReplicateResult {
    rates: DetectionRates,
    marginal: Option<MarginalRates>,
    points: Vec<PooledPoint>,
}

/// Runs the full study: replicates in parallel, aggregation in replicate
/// order, everything derived from the study seed.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutput, Error> {
    if config.replicates == 0 {
        return Err(Error::Config("study needs at least one replicate".into()));
    }
    if config.c_grid.is_empty() {
        return Err(Error::Config(
            "study needs at least one contamination level".into(),
        ));
    }

    let mut rows = Vec::with_capacity(config.c_grid.len());
    let mut points = Vec::new();
    for (c_index, &c) in config.c_grid.iter().enumerate() {
        let results: Vec<ReplicateResult> = (0..config.replicates)
            .into_par_iter()
            .map(|replicate| -> Result<ReplicateResult, Error> {
                let model_config = ModelConfig {
                    model: config.model,
                    n: config.n,
                    p: config.p,
                    n_points: config.n_points,
                    c,
                    seed: replicate_seed(config.seed, c_index, replicate),
                };
                let source = SynthSource::new(model_config)?;
                let analyze_config = AnalyzeConfig {
                    fence_factor: config.fence_factor,
                    marginal_screen: config.marginal_rule,
                    ..AnalyzeConfig::default()
                };
                let output = analyze(&source, &analyze_config)?;
                let truth = source.ground_truth();
                let rates = score_depthgram_rule(truth, &output.report.outlier_union);
                let marginal = output.marginal.as_ref().map(|m| score_marginal(truth, m));
                let mut replicate_points = Vec::new();
                if config.collect_points {
                    for gram in &output.depthgrams {
                        for i in 0..config.n {
                            replicate_points.push(PooledPoint {
                                c,
                                replicate: replicate as u32,
                                variant: gram.variant,
                                observation: i as u32 + 1,
                                role: truth.observations[i].role,
                                dg1: gram.dg1[i],
                                dg2: gram.dg2[i],
                            });
                        }
                    }
                }
                Ok(ReplicateResult {
                    rates,
                    marginal,
                    points: replicate_points,
                })
            })
            .collect::<Result<_, _>>()?;

        let stat_of = |pick: &dyn Fn(&DetectionRates) -> f64| {
            Stat::over(results.iter().map(|r| pick(&r.rates)).collect::<Vec<_>>().into_iter())
        };
        let depthgram = RateTable {
            magnitude: stat_of(&|r| r.magnitude),
            shape: stat_of(&|r| r.shape),
            joint: stat_of(&|r| r.joint),
            false_rate: stat_of(&|r| r.false_rate),
        };
        let marginal = if config.marginal_rule {
            let pick = |f: &dyn Fn(&MarginalRates) -> f64| {
                Stat::over(
                    results
                        .iter()
                        .map(|r| f(r.marginal.as_ref().expect("screen was requested")))
                        .collect::<Vec<_>>()
                        .into_iter(),
                )
            };
            Some(MarginalRateTable {
                magnitude_correct: pick(&|m| m.magnitude_correct),
                magnitude_false: pick(&|m| m.magnitude_false),
                shape_correct: pick(&|m| m.shape_correct),
                shape_false: pick(&|m| m.shape_false),
            })
        } else {
            None
        };
        rows.push(StudyRow {
            c,
            depthgram,
            marginal,
        });
        for result in results {
            points.extend(result.points);
        }
    }

    Ok(StudyOutput {
        summary: StudySummary {
            schema_version: 1,
            model: config.model,
            n: config.n,
            p: config.p,
            n_points: config.n_points,
            replicates: config.replicates,
            seed: config.seed,
            fence_factor: config.fence_factor,
            rows,
        },
        points,
    })
}

// ============================================================================
// Tests
// ============================================================================
