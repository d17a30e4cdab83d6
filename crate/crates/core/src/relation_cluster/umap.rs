//! UMAP dimensionality reduction: exact k-nearest-neighbour graph, fuzzy
//! simplicial set, and the cross-entropy layout optimized by SGD with
//! negative sampling.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Exact neighbour lists, each starting with the point itself.
#[derive(Debug, Clone)]
pub struct Knn {
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

impl Knn {
    pub fn k(&self) -> usize {
        self.indices.first().map_or(0, Vec::len)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `k` nearest neighbours of every row (self included), ties by index.
pub fn exact_knn(data: &[Vec<f64>], k: usize) -> Knn {
    let n = data.len();
    let mut indices = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<(f64, usize)> = (0..n)
            .map(|j| (if i == j { 0.0 } else { euclidean(&data[i], &data[j]) }, j))
            .collect();
        // self first even when duplicates sit at distance 0
        row.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then((a.1 != i).cmp(&(b.1 != i)))
                .then(a.1.cmp(&b.1))
        });
        row.truncate(k);
        indices.push(row.iter().map(|p| p.1).collect());
        distances.push(row.iter().map(|p| p.0).collect());
    }
    Knn { indices, distances }
}

impl Knn {
    /// First `k` neighbours of a wider neighbour table.
    pub fn truncated(&self, k: usize) -> Knn {
        Knn {
            indices: self.indices.iter().map(|r| r[..k].to_vec()).collect(),
            distances: self.distances.iter().map(|r| r[..k].to_vec()).collect(),
        }
    }
}

const SMOOTH_K_TOLERANCE: f64 = 1e-5;
const MIN_K_DIST_SCALE: f64 = 1e-3;

/// Per-point `(sigma, rho)` so that the smoothed neighbour memberships sum
/// to `log2(k)`.
pub fn smooth_knn_dist(knn: &Knn) -> (Vec<f64>, Vec<f64>) {
    let n = knn.distances.len();
    let k = knn.k();
    let target = (k as f64).log2();
    let mean_all: f64 = {
        let total: f64 = knn.distances.iter().flatten().sum();
        total / (n * k).max(1) as f64
    };
    let mut sigmas = vec![0.0; n];
    let mut rhos = vec![0.0; n];
    for i in 0..n {
        let d = &knn.distances[i];
        let rho = d.iter().copied().find(|&x| x > 0.0).unwrap_or(0.0);
        let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
        for _ in 0..64 {
            let psum: f64 = d[1..]
                .iter()
                .map(|&x| {
                    let t = x - rho;
                    if t > 0.0 {
                        (-t / mid).exp()
                    } else {
                        1.0
                    }
                })
                .sum();
            if (psum - target).abs() < SMOOTH_K_TOLERANCE {
                break;
            }
            if psum > target {
                hi = mid;
                mid = (lo + hi) / 2.0;
            } else {
                lo = mid;
                if hi == f64::INFINITY {
                    mid *= 2.0;
                } else {
                    mid = (lo + hi) / 2.0;
                }
            }
        }
        let mean_i = d.iter().sum::<f64>() / k as f64;
        let floor = if rho > 0.0 { mean_i } else { mean_all } * MIN_K_DIST_SCALE;
        sigmas[i] = mid.max(floor);
        rhos[i] = rho;
    }
    (sigmas, rhos)
}

/// Symmetrized fuzzy union `P + Pᵀ − P∘Pᵀ` as a sorted edge list
/// `(i, j, w)` containing both directions.
pub fn fuzzy_simplicial_set(knn: &Knn) -> Vec<(usize, usize, f64)> {
    let (sigmas, rhos) = smooth_knn_dist(knn);
    let mut directed: std::collections::BTreeMap<(usize, usize), f64> = std::collections::BTreeMap::new();
    for (i, (idx, dist)) in knn.indices.iter().zip(&knn.distances).enumerate() {
        for (&j, &d) in idx.iter().zip(dist) {
            if j == i {
                continue;
            }
            let t = d - rhos[i];
            let w = if t <= 0.0 || sigmas[i] == 0.0 { 1.0 } else { (-t / sigmas[i]).exp() };
            directed.insert((i, j), w);
        }
    }
    let mut sym: std::collections::BTreeMap<(usize, usize), f64> = std::collections::BTreeMap::new();
    for (&(i, j), &w) in &directed {
        let wt = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let v = w + wt - w * wt;
        sym.insert((i, j), v);
        sym.insert((j, i), v);
    }
    sym.into_iter().map(|((i, j), w)| (i, j, w)).collect()
}

/// Fits `1 / (1 + a·x^(2b))` to the offset-exponential target curve on
/// 300 points over `[0, 3·spread]` by Levenberg–Marquardt from `(1, 1)`.
pub fn find_ab_params(spread: f64, min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();
    let residual = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let f = 1.0 / (1.0 + a * x.powf(2.0 * b));
                (f - y) * (f - y)
            })
            .sum()
    };
    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut lambda = 1e-3;
    let mut cost = residual(a, b);
    for _ in 0..500 {
        // normal equations JᵀJ δ = −Jᵀr
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            let p = if x > 0.0 { x.powf(2.0 * b) } else { 0.0 };
            let denom = 1.0 + a * p;
            let f = 1.0 / denom;
            let r = f - y;
            let da = -p / (denom * denom);
            let db = if x > 0.0 { -a * p * 2.0 * x.ln() / (denom * denom) } else { 0.0 };
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let m00 = jaa * (1.0 + lambda);
        let m11 = jbb * (1.0 + lambda);
        let det = m00 * m11 - jab * jab;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (-ga * m11 + gb * jab) / det;
        let db = (-gb * m00 + ga * jab) / det;
        let (na, nb) = (a + da, b + db);
        let new_cost = if na > 0.0 && nb > 0.0 { residual(na, nb) } else { f64::INFINITY };
        if new_cost < cost {
            let converged = (cost - new_cost).abs() < 1e-15 * cost.max(1e-300) || (da.abs() < 1e-12 && db.abs() < 1e-12);
            a = na;
            b = nb;
            cost = new_cost;
            lambda = (lambda / 10.0).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (a, b)
}

/// Principal axes of the data, strongest first.
#[derive(Debug, Clone)]
pub struct PrincipalAxes {
    mean: Vec<f64>,
    axes: Vec<Vec<f64>>,
}

impl PrincipalAxes {
    pub fn fit(data: &[Vec<f64>], max_axes: usize) -> Self {
        let n = data.len();
        let d = data.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; d];
        for row in data {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n as f64;
            }
        }
        let centered = DMatrix::from_fn(n, d, |i, j| data[i][j] - mean[j]);
        let cov = centered.transpose() * &centered;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
        let axes = order
            .into_iter()
            .take(max_axes)
            .map(|c| {
                let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
                // sign convention: largest-magnitude component positive
                let pivot = v
                    .iter()
                    .copied()
                    .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
                if pivot < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        PrincipalAxes { mean, axes }
    }

    pub fn project(&self, data: &[Vec<f64>], dims: usize) -> Vec<Vec<f64>> {
        data.iter()
            .map(|row| {
                self.axes[..dims]
                    .iter()
                    .map(|ax| ax.iter().zip(row).zip(&self.mean).map(|((a, x), m)| a * (x - m)).sum())
                    .collect()
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_components: usize,
    pub seed: u64,
}

const NEGATIVE_SAMPLE_RATE: f64 = 5.0;
const REPULSION: f64 = 1.0;
const GRAD_CLIP: f64 = 4.0;

fn clip(v: f64) -> f64 {
    v.clamp(-GRAD_CLIP, GRAD_CLIP)
}

/// Embeds `data` into `n_components` dimensions. `knn` must hold at least
/// `n_neighbors` neighbours per point; `axes` at least `n_components` axes.
pub fn umap_embed(data: &[Vec<f64>], knn: &Knn, axes: &PrincipalAxes, params: &UmapParams) -> Result<Vec<Vec<f64>>> {
    let n = data.len();
    if params.n_neighbors < 2 {
        return Err(Error::InvalidInput("n_neighbors must be at least 2".into()));
    }
    if n < params.n_neighbors + 1 {
        return Err(Error::InvalidInput(format!(
            "{n} points are too few for n_neighbors = {}",
            params.n_neighbors
        )));
    }
    if knn.k() < params.n_neighbors || axes.len() < params.n_components {
        return Err(Error::InvalidInput("neighbour table or principal axes too small".into()));
    }
    let dim = params.n_components;
    let knn = knn.truncated(params.n_neighbors);
    let mut edges = fuzzy_simplicial_set(&knn);
    let n_epochs: usize = if n <= 10_000 { 500 } else { 200 };
    let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    edges.retain(|e| e.2 >= max_w / n_epochs as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut emb = axes.project(data, dim);
    let max_abs = emb.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let expansion = if max_abs > 0.0 { 10.0 / max_abs } else { 1.0 };
    let noise = Normal::new(0.0, 1e-4).expect("valid normal");
    for row in emb.iter_mut() {
        for x in row.iter_mut() {
            *x = *x * expansion + noise.sample(&mut rng);
        }
    }
    for c in 0..dim {
        let lo = emb.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min);
        let hi = emb.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
        let range = if hi > lo { hi - lo } else { 1.0 };
        for r in emb.iter_mut() {
            r[c] = 10.0 * (r[c] - lo) / range;
        }
    }

    let (a, b) = find_ab_params(1.0, params.min_dist);
    let epochs_per_sample: Vec<f64> = edges.iter().map(|e| max_w / e.2).collect();
    let epochs_per_negative: Vec<f64> = epochs_per_sample.iter().map(|e| e / NEGATIVE_SAMPLE_RATE).collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = epochs_per_negative.clone();
    let mut delta = vec![0.0; dim];

    for epoch in 0..n_epochs {
        let alpha = 1.0 - epoch as f64 / n_epochs as f64;
        let ep = epoch as f64;
        for (e, &(j, k, _)) in edges.iter().enumerate() {
            if next_sample[e] > ep {
                continue;
            }
            let d2: f64 = (0..dim).map(|c| (emb[j][c] - emb[k][c]).powi(2)).sum();
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for c in 0..dim {
                delta[c] = clip(coeff * (emb[j][c] - emb[k][c]));
            }
            for c in 0..dim {
                emb[j][c] += delta[c] * alpha;
                emb[k][c] -= delta[c] * alpha;
            }
            next_sample[e] += epochs_per_sample[e];

            let n_neg = ((ep - next_negative[e]) / epochs_per_negative[e]).floor().max(0.0) as usize;
            for _ in 0..n_neg {
                let other = rng.gen_range(0..n);
                let d2: f64 = (0..dim).map(|c| (emb[j][c] - emb[other][c]).powi(2)).sum();
                let coeff = if d2 > 0.0 {
                    2.0 * REPULSION * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0))
                } else if other == j {
                    continue;
                } else {
                    0.0
                };
                #[allow(clippy::needless_range_loop)]
                for c in 0..dim {
                    let g = if coeff > 0.0 { clip(coeff * (emb[j][c] - emb[other][c])) } else { 0.0 };
                    emb[j][c] += g * alpha;
                }
            }
            next_negative[e] += n_neg as f64 * epochs_per_negative[e];
        }
    }
    Ok(emb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ab_params_match_reference_fits() {
        let (a, b) = find_ab_params(1.0, 0.1);
        assert!((a - 1.577).abs() < 2e-3, "a = {a}");
        assert!((b - 0.8951).abs() < 2e-3, "b = {b}");
        // the reference fit stops at a looser tolerance here
        let (a, b) = find_ab_params(1.0, 0.0);
        assert!((a - 1.929).abs() < 5e-3, "a = {a}");
        assert!((b - 0.7915).abs() < 2e-3, "b = {b}");
    }

    #[test]
    fn knn_starts_with_self() {
        let data = vec![vec![0.0], vec![1.0], vec![3.0], vec![0.0]];
        let knn = exact_knn(&data, 3);
        assert_eq!(knn.indices[0], [0, 3, 1]);
        assert_eq!(knn.indices[3], [3, 0, 1]);
        assert_eq!(knn.distances[2], [0.0, 2.0, 3.0]);
    }

    #[test]
    fn smoothing_hits_log2_k() {
        let data: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64).sqrt(), (i * i % 7) as f64]).collect();
        let knn = exact_knn(&data, 6);
        let (sig, rho) = smooth_knn_dist(&knn);
        for i in 0..20 {
            let s: f64 = knn.distances[i][1..]
                .iter()
                .map(|&d| if d - rho[i] > 0.0 { (-(d - rho[i]) / sig[i]).exp() } else { 1.0 })
                .sum();
            assert!((s - 6f64.log2()).abs() < 1e-3, "row {i}: {s}");
        }
    }

    #[test]
    fn fuzzy_union_symmetric_in_unit_interval() {
        let data: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64, (i % 4) as f64]).collect();
        let edges = fuzzy_simplicial_set(&exact_knn(&data, 4));
        let map: std::collections::HashMap<(usize, usize), f64> = edges.iter().map(|&(i, j, w)| ((i, j), w)).collect();
        for (&(i, j), &w) in &map {
            assert!(w > 0.0 && w <= 1.0);
            assert_eq!(map[&(j, i)], w);
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let data: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 0.0, 1.0]).collect();
        let knn = exact_knn(&data, 4);
        let axes = PrincipalAxes::fit(&data, 2);
        let p = UmapParams {
            n_neighbors: 5,
            min_dist: 0.1,
            n_components: 2,
            seed: 1,
        };
        assert!(umap_embed(&data, &knn, &axes, &p).is_err());
    }
}
