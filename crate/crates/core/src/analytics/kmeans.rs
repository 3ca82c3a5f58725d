//! Seeded k-means over sparse rows.
//!
//! Seeding is k-means++ driven by [`SplitMix64`]; Lloyd iterations follow with
//! assignment ties going to the lowest centroid index. Points are first put
//! into a canonical order (lexicographic on their sparse entries) so the fit
//! does not depend on input order.

use std::cmp::Ordering;

use super::rng::SplitMix64;
use super::tfidf::SparseRow;
use super::AnalyticsError;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig { k, seed, max_iter: 100, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Cluster index per input point, in input order.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<u64>,
    pub inertia: f64,
    /// Inertia after every assignment step, final assignment last.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn cmp_rows(a: &SparseRow, b: &SparseRow) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.0.cmp(&y.0).then_with(|| x.1.total_cmp(&y.1));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn sq_dist(row: &SparseRow, centroid: &[f64], centroid_sq_norm: f64) -> f64 {
    let mut d = centroid_sq_norm;
    for &(c, x) in row {
        let diff = x - centroid[c];
        d += diff * diff - centroid[c] * centroid[c];
    }
    d.max(0.0)
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn densify(row: &SparseRow, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for &(c, x) in row {
        out[c] = x;
    }
    out
}

fn nearest(row: &SparseRow, centroids: &[Vec<f64>], norms: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, (c, n)) in centroids.iter().zip(norms).enumerate() {
        let d = sq_dist(row, c, *n);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign(points: &[&SparseRow], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let norms: Vec<f64> = centroids.iter().map(|c| sq_norm(c)).collect();
    let mut inertia = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let (j, d) = nearest(p, centroids, &norms);
            inertia += d;
            j
        })
        .collect();
    (labels, inertia)
}

fn seed_centroids(points: &[&SparseRow], dim: usize, k: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![densify(points[rng.below(n)], dim)];
    let mut d2: Vec<f64> = vec![f64::INFINITY; n];
    while centroids.len() < k {
        let last = centroids.last().unwrap();
        let last_norm = sq_norm(last);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, last, last_norm));
        }
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = d2.iter().rposition(|w| *w > 0.0).expect("positive total");
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && *w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.below(n)
        };
        centroids.push(densify(points[pick], dim));
    }
    centroids
}

/// Fit k-means to `rows` living in a `dim`-dimensional space.
pub fn kmeans(rows: &[SparseRow], dim: usize, config: &KMeansConfig) -> Result<KMeansFit, AnalyticsError> {
    let n = rows.len();
    if config.k == 0 || config.k > n {
        return Err(AnalyticsError::BadK { k: config.k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_rows(&rows[a], &rows[b]));
    let points: Vec<&SparseRow> = order.iter().map(|&i| &rows[i]).collect();

    let mut rng = SplitMix64::new(config.seed);
    let mut centroids = seed_centroids(&points, dim, config.k, &mut rng);
    let mut history = Vec::new();
    let mut iterations = 0;

    let (mut labels, mut inertia) = assign(&points, &centroids);
    history.push(inertia);
    while iterations < config.max_iter {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; config.k];
        let mut counts = vec![0u64; config.k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for &(c, x) in p.iter() {
                sums[l][c] += x;
            }
        }
        let mut shift: f64 = 0.0;
        for j in 0..config.k {
            if counts[j] == 0 {
                continue;
            }
            let updated: Vec<f64> = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            let moved = updated.iter().zip(&centroids[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            shift = shift.max(moved);
            centroids[j] = updated;
        }
        (labels, inertia) = assign(&points, &centroids);
        history.push(inertia);
        if shift < config.tol {
            break;
        }
    }

    let mut sizes = vec![0u64; config.k];
    let mut assignments = vec![0; n];
    for (pos, &l) in labels.iter().enumerate() {
        sizes[l] += 1;
        assignments[order[pos]] = l;
    }
    Ok(KMeansFit { assignments, centroids, sizes, inertia, inertia_history: history, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(points: &[[f64; 2]]) -> Vec<SparseRow> {
        points
            .iter()
            .map(|p| p.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(c, x)| (c, *x)).collect())
            .collect()
    }

    #[test]
    fn k_one_centroid_is_mean() {
        let rows = dense(&[[0.0, 0.0], [2.0, 0.0], [4.0, 6.0]]);
        let fit = kmeans(&rows, 2, &KMeansConfig::new(1, 9)).unwrap();
        assert_eq!(fit.sizes, vec![3]);
        assert!((fit.centroids[0][0] - 2.0).abs() < 1e-12);
        assert!((fit.centroids[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let rows = dense(&[[0.0, 1.0], [3.0, 0.0], [5.0, 5.0], [1.0, 1.0]]);
        for seed in 0..20 {
            let fit = kmeans(&rows, 2, &KMeansConfig::new(4, seed)).unwrap();
            assert_eq!(fit.sizes, vec![1; 4]);
            assert_eq!(fit.inertia, 0.0);
        }
    }

    #[test]
    fn bad_k() {
        let rows = dense(&[[0.0, 1.0]]);
        assert!(matches!(kmeans(&rows, 2, &KMeansConfig::new(0, 1)), Err(AnalyticsError::BadK { .. })));
        assert!(matches!(kmeans(&rows, 2, &KMeansConfig::new(2, 1)), Err(AnalyticsError::BadK { k: 2, n: 1 })));
    }

    #[test]
    fn input_order_does_not_matter() {
        let pts = [[0.0, 0.1], [0.2, 0.0], [5.0, 5.0], [5.1, 4.9], [9.0, 0.0], [8.8, 0.3], [0.1, 0.1]];
        let rows = dense(&pts);
        let mut reversed = rows.clone();
        reversed.reverse();
        let a = kmeans(&rows, 2, &KMeansConfig::new(3, 42)).unwrap();
        let b = kmeans(&reversed, 2, &KMeansConfig::new(3, 42)).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.inertia, b.inertia);
        let mut b_assign = b.assignments.clone();
        b_assign.reverse();
        assert_eq!(a.assignments, b_assign);
    }
}
