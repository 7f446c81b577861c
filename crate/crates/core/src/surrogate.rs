//! Radial-basis-function surrogate of the thermal oracle.
//!
//! A placement is flattened into a feature vector of per-chiplet effective
//! dimensions and center coordinates. An [`RbfModel`] predicts peak
//! temperature as a weighted sum of Gaussian bumps around K-means centers
//! plus a bias; weights come from a pseudo-inverse (SVD least-squares) fit.
//! The bias term is an extension over a plain linear combination of kernels:
//! without it the model cannot represent the ambient offset of a constant
//! temperature field.
//!
//! Stage two keeps one *global* model, retrained periodically from a
//! temperature-stratified subset of the oracle sample archive, and — at low
//! annealing temperatures, with increasing probability — throwaway *local*
//! models fitted to the archive neighborhood of the queried placement.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Placement;

/// Flattened placement features: per chiplet, in id order,
/// `(effective width, effective height, center x, center y)`, all mm.
pub type FeatureVector = Vec<f64>;

/// One oracle-evaluated placement in the sample archive.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    /// Peak temperature from the thermal oracle, °C. Never a surrogate value.
    pub temperature: f64,
    /// Routed wirelength, mm.
    pub wirelength: f64,
    /// Annealing step that produced the sample; 0 for seeding samples.
    pub step: u64,
}

/// Tunables of the surrogate subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    /// Cap on the K-means center count; the actual k is
    /// `min(k_cap, floor(N/4))`, at least 1.
    pub k_cap: usize,
    /// Per-bin sample quota when stratifying the archive for global training.
    pub per_bin: usize,
    /// Neighborhood size for local models.
    pub local_neighborhood: usize,
    /// Multiplier on the center-distance width heuristic. The raw
    /// `d_max / sqrt(2k)` kernels are too narrow to generalize on our
    /// feature scales; 8x was calibrated on held-out quadratic data.
    pub width_scale: f64,
    /// Min-max normalize features before clustering and fitting.
    pub normalize: bool,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            k_cap: 25,
            per_bin: 40,
            local_neighborhood: 500,
            width_scale: 8.0,
            normalize: false,
        }
    }
}

impl SurrogateConfig {
    /// Center count for a training set of `n` samples.
    pub fn k_for(&self, n: usize) -> usize {
        (n / 4).clamp(1, self.k_cap.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurrogateError {
    /// Fewer distinct points than requested clusters.
    DegenerateInput { distinct: usize, k: usize },
    /// Query length does not match the model's feature dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// A sample archive CSV line did not parse.
    MalformedCsv { line: usize },
}

impl std::fmt::Display for SurrogateError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            SurrogateError::DegenerateInput { distinct, k } => {
                write!(f, "k-means needs at least k={k} distinct points, got {distinct}")
            }
            SurrogateError::DimensionMismatch { expected, got } => {
                write!(f, "feature vector has length {got}, model expects {expected}")
            }
            SurrogateError::MalformedCsv { line } => {
                write!(f, "malformed sample archive record on line {line}")
            }
        }
    }
}

impl std::error::Error for SurrogateError {}

/// Flatten a placement into its feature vector. Power is deliberately
/// excluded: it is constant across candidate placements of one system.
pub fn featurize(placement: &Placement) -> FeatureVector {
    let mut features = Vec::with_capacity(4 * placement.len());
    for idx in 0..placement.len() {
        let (w, h) = placement.chiplets[idx].effective_dims();
        let (cx, cy) = placement.centers[idx];
        features.extend_from_slice(&[w, h, cx, cy]);
    }
    features
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's K-means over feature vectors.
///
/// Initial centers are `k` distinct points drawn with the seeded generator;
/// iteration runs to an assignment fixpoint or 300 rounds. Clusters that
/// empty out are re-seeded to the point farthest from its current center.
pub fn kmeans(points: &[FeatureVector], k: usize, seed: u64) -> Result<Vec<FeatureVector>, SurrogateError> {
    Ok(lloyd(points, k, seed)?.0)
}

/// K-means plus the within-cluster SSE after every center update, for the
/// monotonicity tests.
fn lloyd(points: &[FeatureVector], k: usize, seed: u64) -> Result<(Vec<FeatureVector>, Vec<f64>), SurrogateError> {
    assert!(k >= 1, "k-means needs k >= 1");
    let dim = points.first().map_or(0, |p| p.len());
    assert!(points.iter().all(|p| p.len() == dim), "inconsistent feature dimensions");

    let mut distinct: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !distinct.iter().any(|&j| points[j] == *p) {
            distinct.push(i);
        }
    }
    if distinct.len() < k {
        return Err(SurrogateError::DegenerateInput { distinct: distinct.len(), k });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, distinct.len(), k);
    let mut centers: Vec<FeatureVector> = chosen.iter().map(|i| points[distinct[i]].clone()).collect();

    let nearest = |centers: &[FeatureVector], p: &[f64]| -> usize {
        let mut best = 0;
        let mut best_d = dist2(p, &centers[0]);
        for (j, c) in centers.iter().enumerate().skip(1) {
            let d = dist2(p, c);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        best
    };

    let mut assignment: Vec<usize> = Vec::new();
    let mut sse_trace = Vec::new();
    for _ in 0..300 {
        let new_assignment: Vec<usize> = points.iter().map(|p| nearest(&centers, p)).collect();
        if new_assignment == assignment {
            break;
        }
        assignment = new_assignment;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignment) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            } else {
                // Re-seed to the point farthest from its own center.
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        let da = dist2(&points[a], &centers[assignment[a]]);
                        let db = dist2(&points[b], &centers[assignment[b]]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                centers[j] = points[far].clone();
            }
        }
        let sse: f64 = points.iter().zip(&assignment).map(|(p, &a)| dist2(p, &centers[a])).sum();
        sse_trace.push(sse);
    }
    Ok((centers, sse_trace))
}

/// Classical shared-width heuristic: `d_max / sqrt(2k)` over the maximum
/// pairwise center distance, falling back to 1.0 for a single or fully
/// collapsed center set.
pub fn width_from_centers(centers: &[FeatureVector]) -> f64 {
    let k = centers.len();
    assert!(k >= 1);
    let mut d2_max = 0.0f64;
    for i in 0..k {
        for j in i + 1..k {
            d2_max = d2_max.max(dist2(&centers[i], &centers[j]));
        }
    }
    if k == 1 || d2_max == 0.0 {
        return 1.0;
    }
    d2_max.sqrt() / (2.0 * k as f64).sqrt()
}

/// A trained RBF network: Gaussian kernels of shared width around `centers`,
/// linearly combined by `weights` (last entry is the bias).
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    pub centers: Vec<FeatureVector>,
    pub width: f64,
    /// `centers.len() + 1` entries; the trailing one is the bias.
    pub weights: Vec<f64>,
    pub training_rmse: f64,
    /// Per-dimension (min, max) ranges when the model was fit on normalized
    /// features; queries are transformed the same way.
    pub feature_ranges: Option<Vec<(f64, f64)>>,
}

impl RbfModel {
    /// Feature dimension the model expects.
    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, |c| c.len())
    }

    /// `sum_j w_j * exp(-|x - C_j|^2 / width^2) + bias`.
    pub fn predict(&self, x: &[f64]) -> Result<f64, SurrogateError> {
        let expected = self.feature_ranges.as_ref().map_or(self.dim(), Vec::len);
        if x.len() != expected {
            return Err(SurrogateError::DimensionMismatch { expected, got: x.len() });
        }
        let query: FeatureVector = match &self.feature_ranges {
            Some(ranges) => normalize_one(x, ranges),
            None => x.to_vec(),
        };
        let w2 = self.width * self.width;
        let kernels: f64 = self
            .centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * (-dist2(&query, c) / w2).exp())
            .sum();
        Ok(kernels + self.weights[self.centers.len()])
    }
}

fn normalize_one(x: &[f64], ranges: &[(f64, f64)]) -> FeatureVector {
    x.iter()
        .zip(ranges)
        .map(|(v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

/// Fit an RBF model with `k` K-means centers under the default
/// [`SurrogateConfig`].
pub fn train(samples: &[Sample], k: usize, seed: u64) -> Result<RbfModel, SurrogateError> {
    train_with(samples, k, seed, &SurrogateConfig::default())
}

/// Fit an RBF model: K-means centers, scaled shared width, pseudo-inverse
/// weights (SVD least squares on the kernel matrix with a bias column).
pub fn train_with(samples: &[Sample], k: usize, seed: u64, config: &SurrogateConfig) -> Result<RbfModel, SurrogateError> {
    assert!(!samples.is_empty(), "training needs samples");
    let n = samples.len();

    let feature_ranges = config.normalize.then(|| {
        let dim = samples[0].features.len();
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for s in samples {
            for (r, &v) in ranges.iter_mut().zip(&s.features) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        ranges
    });
    let points: Vec<FeatureVector> = match &feature_ranges {
        Some(ranges) => samples.iter().map(|s| normalize_one(&s.features, ranges)).collect(),
        None => samples.iter().map(|s| s.features.clone()).collect(),
    };

    let centers = kmeans(&points, k, seed)?;
    let width = width_from_centers(&centers) * config.width_scale;
    let w2 = width * width;

    let phi = DMatrix::from_fn(n, k + 1, |i, j| {
        if j == k {
            1.0
        } else {
            (-dist2(&points[i], &centers[j]) / w2).exp()
        }
    });
    let targets = DVector::from_iterator(n, samples.iter().map(|s| s.temperature));

    let svd = phi.clone().svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12;
    let weights = svd.solve(&targets, cutoff).expect("SVD was computed with U and V");
    let residual = &phi * &weights - &targets;
    let training_rmse = (residual.norm_squared() / n as f64).sqrt();

    Ok(RbfModel {
        centers,
        width,
        weights: weights.iter().copied().collect(),
        training_rmse,
        feature_ranges,
    })
}

/// Append-only archive of oracle-evaluated placements, in evaluation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleStore {
    samples: Vec<Sample>,
}

impl SampleStore {
    pub fn new() -> Self {
        SampleStore::default()
    }

    pub fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Line-oriented CSV: `step,temperature,wirelength,f0,f1,...` per sample,
    /// floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&format!("{},{},{}", s.step, s.temperature, s.wirelength));
            for v in &s.features {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, SurrogateError> {
        let mut store = SampleStore::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || SurrogateError::MalformedCsv { line: i + 1 };
            let mut fields = line.split(',');
            let step = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let temperature = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let wirelength = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let features = fields
                .map(|f| f.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<f64>, _>>()?;
            store.push(Sample { features, temperature, wirelength, step });
        }
        Ok(store)
    }
}

/// Stratified subset of the archive for global training: samples are sorted
/// by temperature, split into 10 equal-width temperature bins, and each bin
/// contributes up to `per_bin` samples, most recent first.
pub fn select_global_training_set(store: &SampleStore, per_bin: usize) -> Vec<Sample> {
    let samples = store.samples();
    if samples.is_empty() {
        return Vec::new();
    }
    let (t_min, t_max) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.temperature), hi.max(s.temperature))
    });
    let span = t_max - t_min;

    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); 10];
    for (i, s) in samples.iter().enumerate() {
        let bin = if span > 0.0 {
            (((s.temperature - t_min) / span) * 10.0).floor().min(9.0) as usize
        } else {
            0
        };
        bins[bin].push(i);
    }

    let mut picked: Vec<usize> = Vec::new();
    for bin in &bins {
        // Bin entries are in insertion order; the most recent sit at the end.
        picked.extend(bin.iter().rev().take(per_bin));
    }
    picked.sort_by(|&a, &b| {
        samples[a]
            .temperature
            .partial_cmp(&samples[b].temperature)
            .unwrap()
            .then(a.cmp(&b))
    });
    picked.into_iter().map(|i| samples[i].clone()).collect()
}

/// Train a throwaway model on the `min(local_neighborhood, |store|)` archive
/// samples nearest to `x` (Euclidean feature distance, ties kept in
/// insertion order).
pub fn train_local(
    store: &SampleStore,
    x: &[f64],
    k_local: usize,
    seed: u64,
    config: &SurrogateConfig,
) -> Result<RbfModel, SurrogateError> {
    let samples = store.samples();
    if samples.is_empty() {
        return Err(SurrogateError::DegenerateInput { distinct: 0, k: k_local });
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        dist2(&samples[a].features, x)
            .partial_cmp(&dist2(&samples[b].features, x))
            .unwrap()
    });
    let take = samples.len().min(config.local_neighborhood);
    let neighborhood: Vec<Sample> = order[..take].iter().map(|&i| samples[i].clone()).collect();
    train_with(&neighborhood, k_local, seed, config)
}

/// Local-model probability schedule: the chance of consulting a local model
/// is `1 - flag`, growing as annealing cools.
pub fn local_model_flag(t_annealing: f64) -> f64 {
    if t_annealing > 0.7 {
        1.0
    } else if t_annealing > 0.2 {
        0.9
    } else if t_annealing > 0.08 {
        0.8
    } else {
        0.7
    }
}

/// Predict the temperature of `x`, using a freshly trained local model with
/// probability `1 - local_model_flag(t_annealing)` and the global model
/// otherwise (or when local training degenerates). Returns the prediction
/// and whether a local model produced it.
pub fn choose_and_predict(
    t_annealing: f64,
    x: &[f64],
    global_model: &RbfModel,
    store: &SampleStore,
    config: &SurrogateConfig,
    rng: &mut impl Rng,
) -> (f64, bool) {
    let flag = local_model_flag(t_annealing);
    let f: f64 = rng.random();
    if flag < f {
        let n_local = store.len().min(config.local_neighborhood);
        let k_local = config.k_for(n_local);
        let seed = rng.random::<u64>();
        if let Ok(model) = train_local(store, x, k_local, seed, config) {
            return (model.predict(x).expect("local model trained on x's dimension"), true);
        }
    }
    (global_model.predict(x).expect("query matches the global model dimension"), false)
}
