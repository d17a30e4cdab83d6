//! HDBSCAN: mutual-reachability minimum spanning tree, condensed cluster
//! tree and excess-of-mass selection.

use super::umap::euclidean;

/// Cluster label per point; `None` marks an outlier. Clusters are numbered
/// from 0 in order of their smallest member index.
pub fn hdbscan(points: &[Vec<f64>], min_cluster_size: usize, min_samples: usize) -> Vec<Option<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let min_cluster_size = min_cluster_size.max(2);
    if n < min_cluster_size {
        return vec![None; n];
    }

    // core distance: distance to the min_samples-th neighbour, self counted
    let k = min_samples.clamp(1, n);
    let dist = |i: usize, j: usize| euclidean(&points[i], &points[j]);
    let core: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| if i == j { 0.0 } else { dist(i, j) }).collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect();
    let mreach = |i: usize, j: usize| dist(i, j).max(core[i]).max(core[j]);

    // Prim over the complete mutual-reachability graph
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = mreach(current, j);
            if d < best[j] {
                best[j] = d;
                from[j] = current;
            }
            if best[j] < next_d || (best[j] == next_d && j < next) {
                next_d = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((from[next], next, next_d));
        current = next;
    }
    if edges.iter().all(|e| e.2 == 0.0) {
        // every point coincides: one cluster of everything
        return vec![Some(0); n];
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.min(a.1).cmp(&b.0.min(b.1))));

    let hierarchy = single_linkage(n, &edges);
    let condensed = condense(n, &hierarchy, min_cluster_size);
    let selected = select_eom(n, &condensed);
    label_points(n, &condensed, &selected)
}

/// Merge rows `(left, right, distance, size)`; row `i` creates node `n + i`.
fn single_linkage(n: usize, edges: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64, usize)> {
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    let mut size = vec![1usize; 2 * n - 1];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rows = Vec::with_capacity(n - 1);
    for (i, &(a, b, d)) in edges.iter().enumerate() {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        let node = n + i;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        rows.push((ra, rb, d, size[node]));
    }
    rows
}

#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

fn lambda_of(d: f64) -> f64 {
    1.0 / d.max(1e-12)
}

fn condense(n: usize, hierarchy: &[(usize, usize, f64, usize)], min_size: usize) -> Vec<CondensedEdge> {
    let root = 2 * n - 2;
    let node_size = |x: usize| if x < n { 1 } else { hierarchy[x - n].3 };
    let leaves_under = |x: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            if y < n {
                out.push(y);
            } else {
                let (l, r, _, _) = hierarchy[y - n];
                stack.push(l);
                stack.push(r);
            }
        }
        out
    };
    let mut relabel = vec![0usize; 2 * n - 1];
    relabel[root] = n;
    let mut next_label = n + 1;
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node < n {
            continue;
        }
        let (left, right, d, _) = hierarchy[node - n];
        let lambda = lambda_of(d);
        let (ls, rs) = (node_size(left), node_size(right));
        let parent = relabel[node];
        match (ls >= min_size, rs >= min_size) {
            (true, true) => {
                for (child, size) in [(left, ls), (right, rs)] {
                    relabel[child] = next_label;
                    next_label += 1;
                    out.push(CondensedEdge {
                        parent,
                        child: relabel[child],
                        lambda,
                        size,
                    });
                    stack.push(child);
                }
            }
            (false, false) => {
                for child in [left, right] {
                    for leaf in leaves_under(child) {
                        out.push(CondensedEdge {
                            parent,
                            child: leaf,
                            lambda,
                            size: 1,
                        });
                    }
                }
            }
            (true, false) | (false, true) => {
                let (big, small) = if ls >= min_size { (left, right) } else { (right, left) };
                relabel[big] = parent;
                stack.push(big);
                for leaf in leaves_under(small) {
                    out.push(CondensedEdge {
                        parent,
                        child: leaf,
                        lambda,
                        size: 1,
                    });
                }
            }
        }
    }
    out
}

/// Excess-of-mass selection; the root is never selected.
fn select_eom(n: usize, tree: &[CondensedEdge]) -> Vec<usize> {
    let max_label = tree.iter().map(|e| e.parent.max(e.child)).max().unwrap_or(n);
    let mut birth = vec![0.0f64; max_label + 1];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[e.child] = e.lambda;
    }
    let mut stability = vec![0.0f64; max_label + 1];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); max_label + 1];
    for e in tree {
        stability[e.parent] += (e.lambda - birth[e.parent]) * e.size as f64;
        if e.child >= n {
            children[e.parent].push(e.child);
        }
    }
    let mut selected = vec![false; max_label + 1];
    let mut subtree = stability.clone();
    for c in (n + 1..=max_label).rev() {
        let child_sum: f64 = children[c].iter().map(|&ch| subtree[ch]).sum();
        if children[c].is_empty() || stability[c] >= child_sum {
            selected[c] = true;
            subtree[c] = stability[c];
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(children[d].iter().copied());
            }
        } else {
            subtree[c] = child_sum;
        }
    }
    (n + 1..=max_label).filter(|&c| selected[c]).collect()
}

fn label_points(n: usize, tree: &[CondensedEdge], selected: &[usize]) -> Vec<Option<usize>> {
    let max_label = tree.iter().map(|e| e.parent.max(e.child)).max().unwrap_or(n);
    let mut parent_of = vec![usize::MAX; max_label + 1];
    for e in tree {
        parent_of[e.child] = e.parent;
    }
    let is_selected = |c: usize| selected.binary_search(&c).is_ok();
    let mut raw = vec![None; n];
    for (p, slot) in raw.iter_mut().enumerate() {
        let mut c = parent_of[p];
        while c != usize::MAX {
            if is_selected(c) {
                *slot = Some(c);
                break;
            }
            c = parent_of[c];
        }
    }
    // renumber by first member
    let mut map = std::collections::HashMap::new();
    raw.iter()
        .map(|l| {
            l.map(|c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
        })
        .collect()
}
