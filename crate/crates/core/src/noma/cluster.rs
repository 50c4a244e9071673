//! k-means partitioning of UE feature vectors and the elbow/F-test choice of
//! the group count.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{NtnError, Result};
use crate::seed;

const MAX_ITERATIONS: usize = 300;
const SHIFT_TOLERANCE: f64 = 1e-6;
const RESTARTS: u64 = 8;

/// Output of one k-means fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Cluster index of every point.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub sse: f64,
    pub iterations: usize,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Members of each cluster in ascending point order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k()];
        for (i, &c) in self.assignment.iter().enumerate() {
            groups[c].push(i);
        }
        groups
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_features(features: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = features.first() else {
        return Err(NtnError::Domain("no feature vectors to cluster".into()));
    };
    let d = first.len();
    if d == 0 {
        return Err(NtnError::Domain("feature vectors are empty".into()));
    }
    for (i, f) in features.iter().enumerate() {
        if f.len() != d {
            return Err(NtnError::Domain(format!("feature {i} has {} entries, expected {d}", f.len())));
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(NtnError::Domain(format!("feature {i} is not finite")));
        }
    }
    Ok(d)
}

/// Standardizes every column to zero mean and unit variance. Constant
/// columns become zero.
pub fn zscore(features: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = features.first() else {
        return Vec::new();
    };
    let n = features.len() as f64;
    let d = first.len();
    let mut out = features.to_vec();
    for j in 0..d {
        let mean = features.iter().map(|f| f[j]).sum::<f64>() / n;
        let sd = (features.iter().map(|f| (f[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
        for row in out.iter_mut() {
            row[j] = if sd > 0.0 { (row[j] - mean) / sd } else { 0.0 };
        }
    }
    out
}

fn plus_plus_seeds<R: Rng>(features: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = features.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = features.iter().map(|f| dist2(f, &features[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // Every remaining point coincides with a centre already chosen.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, f) in features.iter().enumerate() {
            d2[i] = d2[i].min(dist2(f, &features[next]));
        }
    }
    chosen.into_iter().map(|i| features[i].clone()).collect()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centre) in centroids.iter().enumerate() {
        let d = dist2(point, centre);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn lloyd(features: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> Partition {
    let n = features.len();
    let k = centroids.len();
    let d = features[0].len();
    let mut assignment = vec![0; n];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        for (i, f) in features.iter().enumerate() {
            assignment[i] = nearest(f, &centroids);
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (f, &c) in features.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(f) {
                *s += x;
            }
        }
        let mut updated: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &m)| s.into_iter().map(|x| x / m.max(1) as f64).collect())
            .collect();
        // An empty cluster is re-seeded at the point farthest from its own centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = dist2(&features[a], &updated[assignment[a]]);
                        let db = dist2(&features[b], &updated[assignment[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                let old = assignment[far];
                counts[old] -= 1;
                counts[c] = 1;
                assignment[far] = c;
                updated[c] = features[far].clone();
                if counts[old] > 0 {
                    let members: Vec<&Vec<f64>> =
                        features.iter().zip(&assignment).filter(|(_, &a)| a == old).map(|(f, _)| f).collect();
                    updated[old] = (0..d).map(|j| members.iter().map(|f| f[j]).sum::<f64>() / members.len() as f64).collect();
                }
            }
        }
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    let sse = features
        .iter()
        .zip(&assignment)
        .map(|(f, &c)| dist2(f, &centroids[c]))
        .sum();
    Partition {
        assignment,
        centroids,
        sse,
        iterations,
    }
}

/// Lloyd's k-means with k-means++ seeding. The fit is repeated from a few
/// seeded starts and the lowest-SSE partition is kept.
pub fn kmeans_cluster(features: &[Vec<f64>], k: usize, rng_seed: u64) -> Result<Partition> {
    check_features(features)?;
    if k == 0 || k > features.len() {
        return Err(NtnError::Domain(format!(
            "k = {k} must lie in [1, {}]",
            features.len()
        )));
    }
    let mut best: Option<Partition> = None;
    for restart in 0..RESTARTS {
        let mut rng = seed::rng(seed::stream_seed(rng_seed, restart));
        let fit = lloyd(features, plus_plus_seeds(features, k, &mut rng));
        if best.as_ref().map_or(true, |b| fit.sse < b.sse) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Outcome of the group-count search.
#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k: usize,
    /// Candidate picked by the elbow rule before validation.
    pub elbow_k: usize,
    /// False when no candidate passed the F-test and `k` fell back to the elbow.
    pub validated: bool,
    /// `(k, sse)` for every fitted k.
    pub sse_curve: Vec<(usize, f64)>,
}

/// Parameters of [`select_k`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSearch {
    pub k_min: usize,
    pub k_max: usize,
    pub elbow_threshold: f64,
    pub f_test_alpha: f64,
}

impl Default for KSearch {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 10,
            elbow_threshold: 0.10,
            f_test_alpha: 0.05,
        }
    }
}

/// Elbow rule followed by an F-test on the SSE curve.
///
/// The elbow candidate is the smallest k whose next split removes less than
/// `elbow_threshold` of the single-cluster SSE. A candidate `k >= 2` is
/// accepted when the SSE drop gained by its k-th cluster, against the drop
/// gained by a (k+1)-th one, exceeds the `F(d, d)` critical value (`d` =
/// feature dimension, each extra centroid costing `d` degrees of freedom).
/// Rejected candidates advance to `k + 1`.
pub fn select_k(features: &[Vec<f64>], search: KSearch, rng_seed: u64) -> Result<KSelection> {
    let d = check_features(features)?;
    let n = features.len();
    if search.k_min == 0 || search.k_min > search.k_max || search.k_min > n {
        return Err(NtnError::Domain(format!(
            "k range [{}, {}] is not within [1, {n}]",
            search.k_min, search.k_max
        )));
    }
    let k_max = search.k_max.min(n);
    let mut sse = Vec::new();
    for k in 1..=(k_max + 1).min(n) {
        sse.push(kmeans_cluster(features, k, seed::stream_seed(rng_seed, k as u64))?.sse);
    }
    let at = |k: usize| sse[k - 1];
    let total = at(1);
    let negligible = 1e-12 * total.max(1e-300);
    let sse_curve: Vec<(usize, f64)> = (1..=sse.len()).map(|k| (k, at(k))).collect();

    if total <= f64::MIN_POSITIVE || at(search.k_min) <= negligible {
        return Ok(KSelection {
            k: search.k_min,
            elbow_k: search.k_min,
            validated: true,
            sse_curve,
        });
    }

    let mut elbow_k = k_max;
    for k in search.k_min..k_max {
        if at(k) <= negligible || (at(k) - at(k + 1)) / total < search.elbow_threshold {
            elbow_k = k;
            break;
        }
    }

    let crit = FisherSnedecor::new(d as f64, d as f64)
        .map_err(|e| NtnError::Numerical(format!("F distribution: {e}")))?
        .inverse_cdf(1.0 - search.f_test_alpha);
    let passes = |k: usize| -> bool {
        if k == 1 || k >= n {
            return true;
        }
        let gained = at(k - 1) - at(k);
        let next = at(k) - at(k + 1);
        next <= negligible || gained / next > crit
    };
    for k in elbow_k..=k_max {
        if passes(k) {
            return Ok(KSelection {
                k,
                elbow_k,
                validated: true,
                sse_curve,
            });
        }
    }
    Ok(KSelection {
        k: elbow_k,
        elbow_k,
        validated: false,
        sse_curve,
    })
}
