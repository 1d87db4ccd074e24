//! Concrete realizations of the four search-behavior criteria plus their
//! weighted scalarization.
//!
//! The paper-level notions are deliberately parameter-light here:
//! - exploitation — inverse-distance-weighted interpolation of observed values,
//!   rescaled to `[0,1]` between the worst and best observation;
//! - informativeness — distance to the nearest evaluated point (local sparsity);
//! - diversity — mean distance to the evaluated set (global dispersion);
//! - representativeness — proximity to k-means cluster centers of the
//!   evaluated set.
//!
//! Every distance is Euclidean in normalized `[0,1]^dim` coordinates with
//! `sqrt(dim)` as the normalizing diameter, and history values are used in the
//! internal maximize orientation. All functions are pure; with at most a few
//! dozen evaluations per run nothing is cached.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core::{normalize_point, Criterion, History, ProblemSpec, WeightVector};
use crate::{Error, Result};

/// Two normalized points closer than this count as coincident (keeps the
/// inverse-distance weights finite at observed points).
pub const COINCIDENCE_TOL: f64 = 1e-12;
/// Requested cluster count used by the generation pool.
pub const DEFAULT_CLUSTER_COUNT: usize = 3;

const LLOYD_MAX_ITERS: usize = 50;
const LLOYD_SHIFT_TOL: f64 = 1e-6;
const KMEANS_RESTARTS: usize = 10;

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn require_nonempty(h: &History) -> Result<()> {
    if h.is_empty() {
        Err(Error::State("history is empty".into()))
    } else {
        Ok(())
    }
}

fn normalized_history(h: &History) -> Result<Vec<Vec<f64>>> {
    h.evaluations()
        .iter()
        .map(|e| normalize_point(&e.point, h.problem()))
        .collect()
}

/// Expected-improvement criterion: the candidate's interpolated objective
/// value, rescaled so the worst observation maps to 0 and the best to 1.
pub fn exploitation(x: &[f64], h: &History) -> Result<f64> {
    require_nonempty(h)?;
    let xn = normalize_point(x, h.problem())?;
    let points = normalized_history(h)?;
    let values: Vec<f64> = h.evaluations().iter().map(|e| e.value).collect();

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &v in &values {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    }

    // Shepard interpolation with power 2; exact value at coincident points.
    let mut nearest = (f64::INFINITY, 0usize);
    for (i, p) in points.iter().enumerate() {
        let d = euclid(&xn, p);
        if d < nearest.0 {
            nearest = (d, i);
        }
    }
    let y_hat = if nearest.0 <= COINCIDENCE_TOL {
        values[nearest.1]
    } else {
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, &v) in points.iter().zip(&values) {
            let w = 1.0 / euclid(&xn, p).powi(2);
            num += w * v;
            den += w;
        }
        num / den
    };

    if y_max == y_min {
        return Ok(0.5);
    }
    Ok(((y_hat - y_min) / (y_max - y_min)).clamp(0.0, 1.0))
}

/// Local-sparsity criterion: normalized distance to the nearest evaluated point.
pub fn informativeness(x: &[f64], h: &History) -> Result<f64> {
    require_nonempty(h)?;
    let xn = normalize_point(x, h.problem())?;
    let points = normalized_history(h)?;
    let diameter = (h.problem().dim as f64).sqrt();
    let min_dist = points.iter().map(|p| euclid(&xn, p)).fold(f64::INFINITY, f64::min);
    let min_dist = if min_dist <= COINCIDENCE_TOL { 0.0 } else { min_dist };
    Ok((min_dist / diameter).clamp(0.0, 1.0))
}

/// Global-dispersion criterion: normalized mean distance to the evaluated set.
pub fn diversity(x: &[f64], h: &History) -> Result<f64> {
    require_nonempty(h)?;
    let xn = normalize_point(x, h.problem())?;
    let points = normalized_history(h)?;
    let diameter = (h.problem().dim as f64).sqrt();
    let mean = points.iter().map(|p| euclid(&xn, p)).sum::<f64>() / points.len() as f64;
    Ok((mean / diameter).clamp(0.0, 1.0))
}

/// K-means centroids of the normalized evaluated points.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    problem: Arc<ProblemSpec>,
    centroids: Vec<Vec<f64>>,
    k: usize,
    rng_seed: u64,
    wcss: f64,
}

impl ClusterModel {
    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// Final within-cluster sum of squares.
    pub fn wcss(&self) -> f64 {
        self.wcss
    }
}

/// Fit k-means (Lloyd's algorithm, k-means++ initialization) on the
/// normalized evaluated points. `k` is capped at the number of points. The
/// best of a fixed number of seeded restarts is kept, so the result is
/// deterministic given `(history, k, seed)`.
pub fn fit_clusters(h: &History, k: usize, seed: u64) -> Result<ClusterModel> {
    require_nonempty(h)?;
    let points = normalized_history(h)?;
    let k = k.clamp(1, points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let init = kmeans_pp_init(&points, k, &mut rng);
        let (centroids, trace) = lloyd(&points, init);
        let wcss = *trace.last().expect("lloyd always records at least one pass");
        if best.as_ref().is_none_or(|(_, w)| wcss < *w) {
            best = Some((centroids, wcss));
        }
    }
    let (centroids, wcss) = best.expect("at least one restart ran");
    Ok(ClusterModel { problem: Arc::clone(h.problem()), centroids, k, rng_seed: seed, wcss })
}

/// D^2-weighted seeding: the first center is uniform, each further center is
/// drawn proportional to squared distance from the chosen set.
fn kmeans_pp_init<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..points.len())].clone());
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| euclid(p, c).powi(2))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let idx = if total <= 0.0 {
            // All remaining points coincide with a center; any choice is fine.
            rng.gen_range(0..points.len())
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        centers.push(points[idx].clone());
    }
    centers
}

/// Lloyd iterations from the given initial centers. Returns the final centers
/// and the per-iteration objective trace (nonincreasing by construction).
fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let dim = points[0].len();
    let k = centroids.len();
    let mut trace = Vec::new();

    for _ in 0..LLOYD_MAX_ITERS {
        let assign: Vec<usize> = points.iter().map(|p| nearest_index(p, &centroids)).collect();

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut new_centroids = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                for (nc, s) in new_centroids[c].iter_mut().zip(&sums[c]) {
                    *nc = s / counts[c] as f64;
                }
            } else {
                // Empty cluster: move its center to the point farthest from
                // its current assignment (lowest index on ties).
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(i, p), (j, q)| {
                        let dp = euclid(p, &centroids[assign[*i]]);
                        let dq = euclid(q, &centroids[assign[*j]]);
                        dp.partial_cmp(&dq).unwrap().then(j.cmp(i))
                    })
                    .map(|(i, _)| i)
                    .expect("points nonempty");
                new_centroids[c] = points[far].clone();
            }
        }

        let shift: f64 = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| euclid(a, b))
            .sum();
        centroids = new_centroids;

        let wcss: f64 = points
            .iter()
            .map(|p| euclid(p, &centroids[nearest_index(p, &centroids)]).powi(2))
            .sum();
        trace.push(wcss);

        if shift < LLOYD_SHIFT_TOL {
            break;
        }
    }
    (centroids, trace)
}

fn nearest_index(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, c) in centroids.iter().enumerate() {
        let d = euclid(p, c);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Structure criterion: 1 minus the normalized distance to the nearest
/// cluster center.
pub fn representativeness(x: &[f64], model: &ClusterModel) -> Result<f64> {
    let xn = normalize_point(x, &model.problem)?;
    let diameter = (model.problem.dim as f64).sqrt();
    let min_dist = model
        .centroids
        .iter()
        .map(|c| euclid(&xn, c))
        .fold(f64::INFINITY, f64::min);
    Ok((1.0 - min_dist / diameter).clamp(0.0, 1.0))
}

/// Per-criterion scores for one candidate against a history.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub candidate: Vec<f64>,
    pub scores: Vec<(Criterion, f64)>,
}

/// Score every active criterion at `x`. `model` is required exactly when
/// representativeness is active.
pub fn metric_report(
    x: &[f64],
    h: &History,
    active: &[Criterion],
    model: Option<&ClusterModel>,
) -> Result<MetricReport> {
    let mut scores = Vec::with_capacity(active.len());
    for &c in active {
        let v = criterion_score(c, x, h, model)?;
        scores.push((c, v));
    }
    Ok(MetricReport { candidate: x.to_vec(), scores })
}

fn criterion_score(
    c: Criterion,
    x: &[f64],
    h: &History,
    model: Option<&ClusterModel>,
) -> Result<f64> {
    match c {
        Criterion::Exploitation => exploitation(x, h),
        Criterion::Informativeness => informativeness(x, h),
        Criterion::Diversity => diversity(x, h),
        Criterion::Representativeness => {
            let model = model.ok_or_else(|| {
                Error::State("representativeness requires a fitted cluster model".into())
            })?;
            representativeness(x, model)
        }
    }
}

/// Weighted scalarization `S(x) = sum_m w_m * m(x)` over the active criteria.
/// Zero-weight criteria are skipped entirely.
pub fn score_candidate(
    x: &[f64],
    h: &History,
    w: &WeightVector,
    model: Option<&ClusterModel>,
) -> Result<f64> {
    let mut total = 0.0;
    for (c, weight) in w.iter() {
        if weight == 0.0 {
            continue;
        }
        total += weight * criterion_score(c, x, h, model)?;
    }
    Ok(total)
}
