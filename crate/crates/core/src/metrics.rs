//! Observables computed from snapshots: clusters of elements, area covered,
//! the covariance ellipse of the structure, path curvature and spacing.

use crate::agent::TrajectoryPoint;
use crate::geom::{min_image, wrap_angle, Rect, Vec2};
use crate::rng::RngStream;

/// Union-find over `n` items with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Cluster label per point: points closer than `delta` share a label, and
/// labels are closed under chaining. Labels are `0..n_c` in order of first
/// appearance.
pub fn cluster_labels(points: &[Vec2], delta: f64) -> Vec<usize> {
    let mut sets = DisjointSets::new(points.len());
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].distance(points[j]) < delta {
                sets.union(i, j);
            }
        }
    }
    let mut label_of_root = std::collections::HashMap::new();
    (0..points.len())
        .map(|i| {
            let root = sets.find(i);
            let next = label_of_root.len();
            *label_of_root.entry(root).or_insert(next)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub n_c: usize,
    /// Area of each cluster (union of its disks), by label.
    pub areas: Vec<f64>,
    pub largest: f64,
    /// Union area of all disks over the area of the construction region.
    pub covered_fraction: f64,
    /// `Σ A_i / (n_c A_o)`; zero without clusters.
    pub mean_relative_area: f64,
    /// Number of elements in each cluster.
    pub sizes: Vec<usize>,
}

/// Samples used for the disk-union area estimate.
pub const AREA_SAMPLES: usize = 100_000;

/// Cluster the elements whose centres lie in `area` and measure what they
/// cover. Disk areas are estimated with [`AREA_SAMPLES`] uniform points
/// from a fixed seed, so the report is a pure function of its inputs.
pub fn cluster_elements(centers: &[Vec2], radius: f64, delta: f64, area: &Rect) -> ClusterReport {
    let inside: Vec<Vec2> = centers.iter().copied().filter(|&p| area.contains(p)).collect();
    let labels = cluster_labels(&inside, delta);
    let n_c = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; n_c];
    for &l in &labels {
        sizes[l] += 1;
    }
    let mut hits = vec![0usize; n_c];
    let mut covered = 0usize;
    if !inside.is_empty() {
        // bucket disks on a coarse grid so each sample checks a few
        let cell = 2.0 * radius;
        let nx = (area.width() / cell).ceil().max(1.0) as usize;
        let ny = (area.height() / cell).ceil().max(1.0) as usize;
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
        for (k, p) in inside.iter().enumerate() {
            let i0 = (((p.x - radius - area.min.x) / cell).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((p.x + radius - area.min.x) / cell).floor().max(0.0) as usize).min(nx - 1);
            let j0 = (((p.y - radius - area.min.y) / cell).floor().max(0.0) as usize).min(ny - 1);
            let j1 = (((p.y + radius - area.min.y) / cell).floor().max(0.0) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(k);
                }
            }
        }
        let mut rng = RngStream::new(0x5eed);
        let r2 = radius * radius;
        for _ in 0..AREA_SAMPLES {
            let q = Vec2::new(
                rng.uniform(area.min.x, area.max.x),
                rng.uniform(area.min.y, area.max.y),
            );
            let i = (((q.x - area.min.x) / cell) as usize).min(nx - 1);
            let j = (((q.y - area.min.y) / cell) as usize).min(ny - 1);
            if let Some(&k) = buckets[j * nx + i].iter().find(|&&k| (inside[k] - q).norm_sq() <= r2) {
                covered += 1;
                hits[labels[k]] += 1;
            }
        }
    }
    let a_o = area.area();
    let per_sample = a_o / AREA_SAMPLES as f64;
    let areas: Vec<f64> = hits.iter().map(|&h| h as f64 * per_sample).collect();
    let largest = areas.iter().copied().fold(0.0, f64::max);
    let mean_relative_area = if n_c == 0 {
        0.0
    } else {
        areas.iter().sum::<f64>() / (n_c as f64 * a_o)
    };
    ClusterReport {
        n_c,
        areas,
        largest,
        covered_fraction: covered as f64 / AREA_SAMPLES as f64,
        mean_relative_area,
        sizes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseReport {
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// Perimeter of the ellipse with semi-axes `√λ_a`, `√λ_b`.
    pub circumference: f64,
}

/// Ramanujan's perimeter `π[3(a + b) − √((3a + b)(a + 3b))]`.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    std::f64::consts::PI * (3.0 * (a + b) - ((3.0 * a + b) * (a + 3.0 * b)).sqrt())
}

/// Eigenvalues of the unbiased sample covariance of `points`.
pub fn covariance_ellipse(points: &[Vec2]) -> Option<EllipseReport> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec2::ZERO, |a, &p| a + p) / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - mean;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    let (sxx, syy, sxy) = (sxx / (n - 1.0), syy / (n - 1.0), sxy / (n - 1.0));
    let tr = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let lambda_a = tr + disc;
    let lambda_b = (tr - disc).max(0.0);
    Some(EllipseReport {
        lambda_a,
        lambda_b,
        circumference: ellipse_perimeter(lambda_a.sqrt(), lambda_b.sqrt()),
    })
}

/// Mean `|Δθ|/(v_o dt)` along one agent's consecutive samples. Steps slower
/// than `0.1 v_o` are skipped. Returns `None` if nothing qualifies.
pub fn trajectory_curvature(traj: &[TrajectoryPoint], v_o: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for w in traj.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let speed = w[0].r.distance(w[1].r) / dt;
        if speed < 0.1 * v_o {
            continue;
        }
        sum += wrap_angle(w[1].theta - w[0].theta).abs() / (v_o * dt);
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Curvature relative to that of the predicted orbit, `κ̄ l_s r*`.
pub fn normalized_curvature(kappa: f64, l_s: f64, r_star: f64) -> f64 {
    kappa * l_s * r_star
}

/// Average distance over all unordered pairs; on a torus of size `torus`
/// when given.
pub fn mean_pairwise_distance(points: &[Vec2], torus: Option<(f64, f64)>) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = match torus {
                Some((w, h)) => min_image(points[i], points[j], w, h).norm(),
                None => points[i].distance(points[j]),
            };
            sum += d;
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}

/// One row of the per-snapshot metrics table.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsRow {
    pub t: f64,
    pub n_c: usize,
    pub covered_fraction: f64,
    pub mean_relative_area: f64,
    pub largest_relative_area: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub circumference: f64,
    pub kappa_normalized: f64,
    pub mean_distance: f64,
    pub in_area: usize,
}

impl MetricsRow {
    pub const HEADER: &'static str =
        "t,n_c,covered_fraction,mean_relative_area,largest_relative_area,lambda_a,lambda_b,circumference,kappa_normalized,mean_distance,in_area";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.n_c,
            self.covered_fraction,
            self.mean_relative_area,
            self.largest_relative_area,
            self.lambda_a,
            self.lambda_b,
            self.circumference,
            self.kappa_normalized,
            self.mean_distance,
            self.in_area
        )
    }

    pub fn from_csv(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 11 {
            return None;
        }
        let num = |i: usize| f[i].parse::<f64>().ok();
        Some(MetricsRow {
            t: num(0)?,
            n_c: f[1].parse().ok()?,
            covered_fraction: num(2)?,
            mean_relative_area: num(3)?,
            largest_relative_area: num(4)?,
            lambda_a: num(5)?,
            lambda_b: num(6)?,
            circumference: num(7)?,
            kappa_normalized: num(8)?,
            mean_distance: num(9)?,
            in_area: f[10].parse().ok()?,
        })
    }
}
