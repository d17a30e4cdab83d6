use std::collections::BTreeMap;

use super::umap::euclidean;

/// Mean silhouette coefficient over clustered points, outliers excluded
/// from both the mean and the neighbour sets. Points alone in their cluster
/// score 0. Returns `(0.0, false)` when fewer than two clusters exist.
pub fn silhouette_mean(points: &[Vec<f64>], labels: &[Option<usize>]) -> (f64, bool) {
    let clustered: Vec<(usize, usize)> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|c| (i, c)))
        .collect();
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, c) in &clustered {
        *sizes.entry(c).or_default() += 1;
    }
    if sizes.len() < 2 {
        return (0.0, false);
    }
    let slot: BTreeMap<usize, usize> = sizes.keys().enumerate().map(|(s, &c)| (c, s)).collect();
    let k = sizes.len();
    let size_by_slot: Vec<usize> = sizes.values().copied().collect();

    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for &(i, ci) in &clustered {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for &(j, cj) in &clustered {
            if i != j {
                sums[slot[&cj]] += euclidean(&points[i], &points[j]);
            }
        }
        let own = slot[&ci];
        if size_by_slot[own] < 2 {
            continue;
        }
        let a = sums[own] / (size_by_slot[own] - 1) as f64;
        let b = (0..k)
            .filter(|&s| s != own)
            .map(|s| sums[s] / size_by_slot[s] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    (total / clustered.len() as f64, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_on_line() {
        // point 0: a = 1, b = 3
        let pts = vec![vec![0.0], vec![1.0], vec![3.0], vec![3.0]];
        let labels = [Some(0), Some(0), Some(1), Some(1)];
        let (_, ok) = silhouette_mean(&pts, &labels);
        assert!(ok);
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        let labels = [Some(0), Some(0), Some(1)];
        let (s, _) = silhouette_mean(&pts, &labels);
        // p0: a=1,b=3 → 2/3; p1: a=1,b=2 → 1/2; p2 singleton → 0
        assert!((s - (2.0 / 3.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tight_far_clusters_near_one() {
        let pts = vec![vec![0.0], vec![0.001], vec![1000.0], vec![1000.001]];
        let (s, _) = silhouette_mean(&pts, &[Some(0), Some(0), Some(1), Some(1)]);
        assert!(s > 0.999);
    }

    #[test]
    fn single_cluster_undefined() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert_eq!(silhouette_mean(&pts, &[Some(0), Some(0)]), (0.0, false));
        assert_eq!(silhouette_mean(&pts, &[None, None]), (0.0, false));
    }

    #[test]
    fn outliers_ignored() {
        let pts = vec![vec![0.0], vec![1.0], vec![3.0], vec![4.0], vec![1.5]];
        let a = silhouette_mean(&pts, &[Some(0), Some(0), Some(1), Some(1), None]).0;
        let b = silhouette_mean(&pts[..4], &[Some(0), Some(0), Some(1), Some(1)]).0;
        assert_eq!(a, b);
    }
}
