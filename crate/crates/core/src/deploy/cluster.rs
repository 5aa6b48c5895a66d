use alloc::vec;
use alloc::vec::Vec;

use super::DeployError;
use crate::model::Point3;
use crate::rng::{self, StreamTag};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Iteration cap for one Lloyd run.
pub const MAX_LLOYD_ITERATIONS: usize = 200;

/// AUV hover position and the IUSNs it serves.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Cluster {
    pub centroid: Point3,
    /// Ascending node ids.
    pub members: Vec<usize>,
}

/// Result of one Lloyd run in the horizontal plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    /// Cluster index per point; clusters are numbered densely.
    pub assignment: Vec<usize>,
    pub centroids: Vec<[f64; 2]>,
    /// Objective after every iteration, starting with the initial assignment.
    pub objective: Vec<f64>,
}

fn sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn objective(points: &[[f64; 2]], assignment: &[usize], centroids: &[[f64; 2]], anchor: Option<[f64; 2]>) -> f64 {
    let mut total: f64 = points.iter().zip(assignment).map(|(p, &c)| sq(*p, centroids[c])).sum();
    if let Some(a) = anchor {
        total += centroids.iter().map(|c| sq(*c, a)).sum::<f64>();
    }
    total
}

fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    for (j, c) in centroids.iter().enumerate().skip(1) {
        if sq(p, *c) < sq(p, centroids[best]) {
            best = j;
        }
    }
    best
}

/// Lloyd iterations from the given centroids. With an `anchor`, every
/// cluster's mean also includes the anchor point once (pulling centroids
/// towards it). A point only changes cluster when strictly closer; empty
/// clusters are dropped.
pub fn lloyd(points: &[[f64; 2]], init: &[[f64; 2]], anchor: Option<[f64; 2]>, max_iter: usize) -> LloydRun {
    let mut centroids = init.to_vec();
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(*p, &centroids)).collect();
    let mut trace = Vec::new();

    for iter in 0..=max_iter {
        // Update step.
        let k = centroids.len();
        let mut sum = vec![[0.0f64; 2]; k];
        let mut count = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            sum[c][0] += p[0];
            sum[c][1] += p[1];
            count[c] += 1;
        }
        let mut remap = vec![usize::MAX; k];
        let mut next = Vec::with_capacity(k);
        for j in 0..k {
            if count[j] == 0 {
                continue;
            }
            let (mut sx, mut sy, mut n) = (sum[j][0], sum[j][1], count[j] as f64);
            if let Some(a) = anchor {
                sx += a[0];
                sy += a[1];
                n += 1.0;
            }
            remap[j] = next.len();
            next.push([sx / n, sy / n]);
        }
        for c in &mut assignment {
            *c = remap[*c];
        }
        centroids = next;
        trace.push(objective(points, &assignment, &centroids, anchor));
        if iter == max_iter {
            break;
        }

        // Assignment step.
        let mut changed = false;
        for (p, c) in points.iter().zip(assignment.iter_mut()) {
            let j = nearest(*p, &centroids);
            if sq(*p, centroids[j]) < sq(*p, centroids[*c]) {
                *c = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    LloydRun {
        assignment,
        centroids,
        objective: trace,
    }
}

/// Distinct horizontal positions, in first-seen order.
fn distinct(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::new();
    for p in points {
        if !out.contains(p) {
            out.push(*p);
        }
    }
    out
}

/// Farthest-point seeding: the first centroid is a random distinct point,
/// each next one the point farthest from all chosen (lowest index on ties).
pub fn farthest_point_seeds(points: &[[f64; 2]], k: usize, seed: u64) -> Vec<[f64; 2]> {
    let uniq = distinct(points);
    let k = k.min(uniq.len());
    let mut r = rng::stream(seed, StreamTag::Cluster, k as u64);
    let mut chosen = vec![uniq[rng::index(&mut r, uniq.len())]];
    let mut dist: Vec<f64> = uniq.iter().map(|p| sq(*p, chosen[0])).collect();
    while chosen.len() < k {
        let mut far = 0;
        for i in 1..uniq.len() {
            if dist[i] > dist[far] {
                far = i;
            }
        }
        let c = uniq[far];
        chosen.push(c);
        for (d, p) in dist.iter_mut().zip(&uniq) {
            *d = d.min(sq(*p, c));
        }
    }
    chosen
}

/// Output of the adaptive clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct Akmc {
    pub clusters: Vec<Cluster>,
    /// Cluster count of every attempt, in order.
    pub attempts: Vec<usize>,
    /// Objective trace of the final Lloyd run.
    pub objective: Vec<f64>,
    /// Final horizontal assignment (cluster index per input point).
    pub assignment: Vec<usize>,
    pub centroids_xy: Vec<[f64; 2]>,
}

fn build_clusters(points: &[(usize, Point3)], assignment: &[usize], centroids: &[[f64; 2]]) -> Vec<Cluster> {
    (0..centroids.len())
        .map(|j| {
            let mut members: Vec<usize> = Vec::new();
            let mut depth = 0.0;
            for ((id, p), &c) in points.iter().zip(assignment) {
                if c == j {
                    members.push(*id);
                    depth += p.z;
                }
            }
            let z = depth / members.len() as f64;
            members.sort_unstable();
            Cluster {
                centroid: Point3::new(centroids[j][0], centroids[j][1], z),
                members,
            }
        })
        .collect()
}

/// Splits clusters larger than `n_max` into chunks in input order.
fn chunk_overfull(assignment: &mut Vec<usize>, centroids: &mut Vec<[f64; 2]>, points: &[[f64; 2]], n_max: usize) {
    let k = centroids.len();
    for j in 0..k {
        let idx: Vec<usize> = (0..assignment.len()).filter(|&i| assignment[i] == j).collect();
        for chunk in idx.chunks(n_max).skip(1) {
            let c = centroids.len();
            let (mut sx, mut sy) = (0.0, 0.0);
            for &i in chunk {
                assignment[i] = c;
                sx += points[i][0];
                sy += points[i][1];
            }
            centroids.push([sx / chunk.len() as f64, sy / chunk.len() as f64]);
        }
    }
}

/// Adaptive k-means: Lloyd in the horizontal plane with `x1_init` clusters,
/// adding one cluster and restarting while any cluster exceeds `n_max`.
/// Cluster depth is the members' mean depth.
pub fn akmc(points: &[(usize, Point3)], x1_init: usize, n_max: usize, seed: u64) -> Result<Akmc, DeployError> {
    if points.is_empty() {
        return Err(DeployError::EmptyInput);
    }
    if x1_init == 0 || n_max == 0 {
        return Err(DeployError::InvalidCount);
    }
    if x1_init > points.len() {
        return Err(DeployError::InsufficientCapacity {
            requested: x1_init,
            points: points.len(),
        });
    }
    let xy: Vec<[f64; 2]> = points.iter().map(|(_, p)| [p.x, p.y]).collect();
    let n_distinct = distinct(&xy).len();
    let mut k = x1_init.min(n_distinct);
    let mut attempts = Vec::new();
    loop {
        attempts.push(k);
        let init = farthest_point_seeds(&xy, k, seed);
        let mut run = lloyd(&xy, &init, None, MAX_LLOYD_ITERATIONS);
        let mut sizes = vec![0usize; run.centroids.len()];
        for &c in &run.assignment {
            sizes[c] += 1;
        }
        let overfull = sizes.iter().any(|&s| s > n_max);
        if overfull && k < n_distinct {
            k += 1;
            continue;
        }
        if overfull {
            chunk_overfull(&mut run.assignment, &mut run.centroids, &xy, n_max);
        }
        return Ok(Akmc {
            clusters: build_clusters(points, &run.assignment, &run.centroids),
            attempts,
            objective: run.objective,
            assignment: run.assignment,
            centroids_xy: run.centroids,
        });
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    crate::math::sqrt(sq(a, b))
}

/// Weiszfeld iterations for the point minimizing the summed distance to
/// `points`, starting from `start`. Stops when the estimate lands on an
/// input point.
pub fn geometric_median(points: &[[f64; 2]], start: [f64; 2], iterations: usize) -> [f64; 2] {
    let mut y = start;
    for _ in 0..iterations {
        let (mut nx, mut ny, mut wsum) = (0.0, 0.0, 0.0);
        for p in points {
            let d = dist(*p, y);
            if d == 0.0 {
                return y;
            }
            nx += p[0] / d;
            ny += p[1] / d;
            wsum += 1.0 / d;
        }
        let next = [nx / wsum, ny / wsum];
        if sq(next, y) < 1e-18 {
            return next;
        }
        y = next;
    }
    y
}

/// Summed member-to-centroid plus centroid-to-anchor distance.
pub fn anchored_cost(points: &[[f64; 2]], assignment: &[usize], centroids: &[[f64; 2]], anchor: [f64; 2]) -> f64 {
    let members: f64 = points.iter().zip(assignment).map(|(p, &c)| dist(*p, centroids[c])).sum();
    members + centroids.iter().map(|c| dist(*c, anchor)).sum::<f64>()
}

/// Second stage: move every AUV to the point minimizing the summed distance
/// to its members and to the USV, alternating with nearest-centroid
/// reassignment, starting from the first-stage centroids. Keeps the first
/// stage when reassignment would break capacity. Returns the clusters and
/// the cost trace.
pub fn refine_towards(points: &[(usize, Point3)], first: &Akmc, anchor: [f64; 2], n_max: usize) -> (Vec<Cluster>, Vec<f64>) {
    let xy: Vec<[f64; 2]> = points.iter().map(|(_, p)| [p.x, p.y]).collect();
    let mut assignment = first.assignment.clone();
    let mut centroids = first.centroids_xy.clone();
    let mut trace = vec![anchored_cost(&xy, &assignment, &centroids, anchor)];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        for (j, c) in centroids.iter_mut().enumerate() {
            let mut group: Vec<[f64; 2]> = xy
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == j)
                .map(|(p, _)| *p)
                .collect();
            group.push(anchor);
            *c = geometric_median(&group, *c, 100);
        }
        trace.push(anchored_cost(&xy, &assignment, &centroids, anchor));
        let mut next = assignment.clone();
        let mut changed = false;
        for (p, c) in xy.iter().zip(next.iter_mut()) {
            let j = nearest(*p, &centroids);
            if sq(*p, centroids[j]) < sq(*p, centroids[*c]) {
                *c = j;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; centroids.len()];
        for &c in &next {
            sizes[c] += 1;
        }
        if !changed || sizes.iter().any(|&s| s > n_max || s == 0) {
            break;
        }
        assignment = next;
    }
    (build_clusters(points, &assignment, &centroids), trace)
}
