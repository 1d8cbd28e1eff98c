use serde::{Deserialize, Serialize};

/// Default gap (mm) that separates two whorls.
pub const DEFAULT_CLUSTER_GAP: f64 = 150.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster index of every input knot, in input order. Clusters are numbered
    /// by increasing position along the log.
    pub assignment: Vec<usize>,
    /// Mean origin position of each cluster.
    pub centers: Vec<f64>,
}

impl Clustering {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(move |(_, c)| **c == cluster).map(|(i, _)| i)
    }
}

/// Groups knot origins into whorls: sorted positions are split wherever two
/// neighbors are more than `gap` apart.
pub fn cluster_knots(l0: &[f64], gap: f64) -> Clustering {
    let mut order: Vec<usize> = (0..l0.len()).collect();
    order.sort_by(|&a, &b| l0[a].total_cmp(&l0[b]).then(a.cmp(&b)));
    let mut assignment = vec![0; l0.len()];
    let mut sums: Vec<(f64, usize)> = Vec::new();
    let mut prev: Option<f64> = None;
    for &i in &order {
        if prev.is_none_or(|p| l0[i] - p > gap) {
            sums.push((0.0, 0));
        }
        let c = sums.len() - 1;
        assignment[i] = c;
        sums[c].0 += l0[i];
        sums[c].1 += 1;
        prev = Some(l0[i]);
    }
    Clustering { assignment, centers: sums.iter().map(|(s, n)| s / *n as f64).collect() }
}

/// Clustering taken from given labels. Labels are renumbered by increasing
/// mean position.
pub fn clustering_from_labels(l0: &[f64], labels: &[u32]) -> Clustering {
    let mut uniq: Vec<u32> = labels.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let mut stats: Vec<(u32, f64)> = uniq
        .iter()
        .map(|&u| {
            let (s, n) = labels.iter().zip(l0).filter(|(l, _)| **l == u).fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
            (u, s / n as f64)
        })
        .collect();
    stats.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let assignment = labels.iter().map(|l| stats.iter().position(|(u, _)| u == l).unwrap_or(0)).collect();
    Clustering { assignment, centers: stats.iter().map(|s| s.1).collect() }
}
