//! Greedy packing and covering estimates on sampled point clouds.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;

use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use super::{d2_unchecked, TractableSubgroup};
use crate::error::{Error, Result};
use crate::linalg::{conjugate, haar_unitary, hs_norm_full, CMat, RngSeed};

/// Indexed stream of points; `sample(i)` is a pure function of `i`.
pub trait PointSampler: Sync {
    type Point: Clone + Send + Sync;

    fn sample(&self, index: u64) -> Self::Point;
}

/// `(u x_1 u*, …, u x_n u*)` for Haar `u`.
#[derive(Debug, Clone)]
pub struct OrbitSampler {
    pub base: Vec<CMat>,
    pub seed: RngSeed,
}

impl PointSampler for OrbitSampler {
    type Point = Vec<CMat>;

    fn sample(&self, index: u64) -> Vec<CMat> {
        let k = self.base.first().map(|b| b.nrows()).unwrap_or(1);
        let u = haar_unitary(k, &mut self.seed.rng(index));
        self.base.iter().map(|x| conjugate(&u, x)).collect()
    }
}

/// Uniform points of the torus `U(1)^m`, as angles.
#[derive(Debug, Clone)]
pub struct TorusSampler {
    pub m: usize,
    pub seed: RngSeed,
}

impl PointSampler for TorusSampler {
    type Point = Vec<f64>;

    fn sample(&self, index: u64) -> Vec<f64> {
        let mut rng = self.seed.rng(index);
        (0..self.m)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect()
    }
}

/// Haar unitaries in `U_k`, to be read as points of `U_k / H`.
#[derive(Debug, Clone)]
pub struct HaarSampler {
    pub k: usize,
    pub seed: RngSeed,
}

impl PointSampler for HaarSampler {
    type Point = CMat;

    fn sample(&self, index: u64) -> CMat {
        haar_unitary(self.k, &mut self.seed.rng(index))
    }
}

/// Cycles through a fixed list.
#[derive(Debug, Clone)]
pub struct FiniteSetSampler<P> {
    pub points: Vec<P>,
}

impl<P: Clone + Send + Sync> PointSampler for FiniteSetSampler<P> {
    type Point = P;

    fn sample(&self, index: u64) -> P {
        self.points[(index as usize) % self.points.len()].clone()
    }
}

/// `ρ((x_i), (y_i)) = max_i |x_i − y_i|₂`.
pub fn rho(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| hs_norm_full(&(x - y))).fold(0.0, f64::max)
}

/// Product metric on `U(1)^m`: `max_i |e^{ia_i} − e^{ib_i}|`.
pub fn torus_metric(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| 2.0 * ((x - y) / 2.0).sin().abs())
        .fold(0.0, f64::max)
}

/// `d₂` on `U_k/H` as a point-cloud metric.
pub fn quotient_metric(h: &TractableSubgroup) -> impl Fn(&CMat, &CMat) -> f64 + Sync + '_ {
    move |u, v| d2_unchecked(u, v, h).distance
}

/// Maximal independent set of a conflict graph, repeatedly taking the
/// remaining vertex of least degree (ties by index). Returns sorted indices.
fn min_degree_independent_set(adj: Vec<Vec<u32>>) -> Vec<usize> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((degree[i], i))).collect();
    let mut chosen = Vec::new();
    while let Some(Reverse((d, i))) = heap.pop() {
        if !alive[i] || d != degree[i] {
            continue;
        }
        chosen.push(i);
        alive[i] = false;
        for &j in &adj[i] {
            let j = j as usize;
            if !alive[j] {
                continue;
            }
            alive[j] = false;
            for &l in &adj[j] {
                let l = l as usize;
                if alive[l] {
                    degree[l] -= 1;
                    heap.push(Reverse((degree[l], l)));
                }
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Farthest-point traversal over `n` points from point 0, stopping once the
/// covering radius drops below `min_eps`.
fn traverse<D>(n: usize, min_eps: f64, dist: D) -> Traversal
where
    D: Fn(usize, usize) -> f64 + Sync,
{
    if n == 0 {
        return Traversal {
            centers: Vec::new(),
            selection_radii: Vec::new(),
            final_radius: 0.0,
        };
    }
    let mut nearest = vec![f64::INFINITY; n];
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    let mut next = 0usize;
    let mut next_dist = f64::INFINITY;
    loop {
        centers.push(next);
        radii.push(next_dist);
        let c = next;
        nearest
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, d)| *d = d.min(dist(c, i)));
        // argmax, lowest index on ties
        let (idx, far) =
            nearest.iter().enumerate().fold(
                (0usize, f64::NEG_INFINITY),
                |best, (i, &d)| {
                    if d > best.1 {
                        (i, d)
                    } else {
                        best
                    }
                },
            );
        if far < min_eps || far <= 0.0 {
            return Traversal {
                centers,
                selection_radii: radii,
                final_radius: far.max(0.0),
            };
        }
        next = idx;
        next_dist = far;
    }
}

/// A finite sample of points.
#[derive(Debug, Clone)]
pub struct PointCloud<P> {
    points: Vec<P>,
}

impl<P: Clone + Send + Sync> PointCloud<P> {
    /// Draws indices `0..budget`; sampling runs in parallel but the cloud
    /// order is the index order.
    pub fn sample<S: PointSampler<Point = P>>(sampler: &S, budget: usize) -> Self {
        Self {
            points: (0..budget as u64).into_par_iter().map(|i| sampler.sample(i)).collect(),
        }
    }

    pub fn from_points(points: Vec<P>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Conflict graph: `j` is a neighbour of `i` when `d(i, j) < eps`.
    fn conflicts<M>(&self, metric: &M, eps: f64) -> Vec<Vec<u32>>
    where
        M: Fn(&P, &P) -> f64 + Sync,
    {
        let n = self.points.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && metric(&self.points[i], &self.points[j]) < eps)
                    .map(|j| j as u32)
                    .collect()
            })
            .collect()
    }

    /// Maximal `eps`-separated subset, built by repeatedly taking the
    /// remaining point with fewest conflicts (ties by index).
    pub fn pack<M>(&self, metric: &M, eps: f64) -> Vec<usize>
    where
        M: Fn(&P, &P) -> f64 + Sync,
    {
        min_degree_independent_set(self.conflicts(metric, eps))
    }

    /// Farthest-point traversal from point 0 down to covering radius
    /// `min_eps`. Returns the centers in order and, for each, the distance at
    /// which it was selected (`∞` for the first) plus the final radius.
    pub fn farthest_point_traversal<M>(&self, metric: &M, min_eps: f64) -> Traversal
    where
        M: Fn(&P, &P) -> f64 + Sync,
    {
        traverse(self.points.len(), min_eps, |c, i| {
            metric(&self.points[c], &self.points[i])
        })
    }

    /// Smallest pairwise distance among `indices` (`∞` for fewer than two).
    pub fn min_separation<M>(&self, indices: &[usize], metric: &M) -> f64
    where
        M: Fn(&P, &P) -> f64 + Sync,
    {
        let mut best = f64::INFINITY;
        for (a, &i) in indices.iter().enumerate() {
            for &j in &indices[a + 1..] {
                best = best.min(metric(&self.points[i], &self.points[j]));
            }
        }
        best
    }
}

/// Output of a farthest-point traversal.
#[derive(Debug, Clone)]
pub struct Traversal {
    pub centers: Vec<usize>,
    pub selection_radii: Vec<f64>,
    pub final_radius: f64,
}

impl Traversal {
    /// Number of centers whose open `eps`-balls cover the cloud. The same
    /// centers are pairwise `≥ eps` apart.
    pub fn cover_count(&self, eps: f64) -> usize {
        self.selection_radii.iter().filter(|&&r| r >= eps).count()
    }
}

/// Upper bound on cloud size for [`DistanceMatrix`] (the matrix holds
/// `n(n−1)/2` doubles).
pub const DISTANCE_MATRIX_LIMIT: usize = 6000;

/// All pairwise distances of a cloud, computed once and shared by every
/// radius of a packing run.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    // row i holds d(i, j) for j > i
    rows: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new<P, M>(cloud: &PointCloud<P>, metric: &M) -> Result<Self>
    where
        P: Clone + Send + Sync,
        M: Fn(&P, &P) -> f64 + Sync,
    {
        let n = cloud.len();
        if n > DISTANCE_MATRIX_LIMIT {
            return Err(Error::CostGuard {
                what: "pairwise distance matrix",
                needed: n as u128,
                limit: DISTANCE_MATRIX_LIMIT as u128,
            });
        }
        let pts = cloud.points();
        let rows = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| metric(&pts[i], &pts[j])).collect())
            .collect();
        Ok(Self { n, rows })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.rows[i][j - i - 1],
            std::cmp::Ordering::Greater => self.rows[j][i - j - 1],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Same selection rule as [`PointCloud::pack`], scanning rows of the
    /// matrix instead of materialising the conflict graph.
    pub fn pack(&self, eps: f64) -> Vec<usize> {
        let n = self.n;
        let mut degree = vec![0usize; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (off, &d) in row.iter().enumerate() {
                if d < eps {
                    degree[i] += 1;
                    degree[i + 1 + off] += 1;
                }
            }
        }
        let mut alive = vec![true; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((degree[i], i))).collect();
        let mut chosen = Vec::new();
        while let Some(Reverse((d, i))) = heap.pop() {
            if !alive[i] || d != degree[i] {
                continue;
            }
            chosen.push(i);
            alive[i] = false;
            for j in 0..n {
                if !alive[j] || self.get(i, j) >= eps {
                    continue;
                }
                alive[j] = false;
                for l in 0..n {
                    if alive[l] && self.get(j, l) < eps {
                        degree[l] -= 1;
                        heap.push(Reverse((degree[l], l)));
                    }
                }
            }
        }
        chosen.sort_unstable();
        chosen
    }

    /// Same traversal as [`PointCloud::farthest_point_traversal`].
    pub fn farthest_point_traversal(&self, min_eps: f64) -> Traversal {
        traverse(self.n, min_eps, |c, i| self.get(c, i))
    }
}

/// A certified `eps`-separated subset of a sampled cloud.
#[derive(Debug, Clone)]
pub struct SeparatedSet<P> {
    pub eps: f64,
    pub indices: Vec<usize>,
    pub points: Vec<P>,
}

impl<P> SeparatedSet<P> {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

fn check_eps_budget(eps: f64, budget: usize) -> Result<()> {
    if !(eps > 0.0) || budget == 0 {
        return Err(Error::InvalidInput("need eps > 0 and budget ≥ 1".into()));
    }
    Ok(())
}

/// Greedy lower bound for the `eps`-packing number on `budget` sampled points.
pub fn pack_greedy<S, M>(sampler: &S, metric: M, eps: f64, budget: usize) -> Result<SeparatedSet<S::Point>>
where
    S: PointSampler,
    M: Fn(&S::Point, &S::Point) -> f64 + Sync,
{
    check_eps_budget(eps, budget)?;
    let cloud = PointCloud::sample(sampler, budget);
    let indices = cloud.pack(&metric, eps);
    let points = indices.iter().map(|&i| cloud.points[i].clone()).collect();
    Ok(SeparatedSet { eps, indices, points })
}

/// Farthest-point-traversal cover size of `budget` sampled points by open `eps`-balls.
pub fn cover_greedy<S, M>(sampler: &S, metric: M, eps: f64, budget: usize) -> Result<usize>
where
    S: PointSampler,
    M: Fn(&S::Point, &S::Point) -> f64 + Sync,
{
    check_eps_budget(eps, budget)?;
    let cloud = PointCloud::sample(sampler, budget);
    Ok(cloud.farthest_point_traversal(&metric, eps).cover_count(eps))
}

/// `eps_max, eps_max·ratio, …` down to `eps_min`.
pub fn geometric_grid(eps_max: f64, eps_min: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(eps_max > 0.0 && eps_min > 0.0 && eps_min <= eps_max && ratio > 0.0 && ratio < 1.0) {
        return Err(Error::DegenerateGrid(format!(
            "bad grid eps_max={eps_max} eps_min={eps_min} ratio={ratio}"
        )));
    }
    let mut out = Vec::new();
    let mut e = eps_max;
    while e >= eps_min * (1.0 - 1e-12) {
        out.push(e);
        e *= ratio;
    }
    Ok(out)
}

/// Least-squares line `log count ≈ intercept + slope · log(1/ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn exponent_fit(epsilons: &[f64], counts: &[usize]) -> Result<ExponentFit> {
    if epsilons.len() != counts.len() {
        return Err(Error::ShapeMismatch("epsilons and counts differ in length".into()));
    }
    if epsilons.len() < 3 {
        return Err(Error::DegenerateGrid("need at least 3 grid points".into()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) || counts.contains(&0) {
        return Err(Error::DegenerateGrid("epsilons and counts must be positive".into()));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 {
        return Err(Error::DegenerateGrid("all epsilons coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
    })
}

/// Packing and covering counts over an ε grid, all from one sampled cloud.
///
/// `packing_counts[i]` is the largest separated set found at any radius
/// `≥ ε_i` (greedy packs, traversal centers, and the packs computed at
/// `2ε_j`); `covering_counts[i]` is the traversal cover at `ε_i`.
#[derive(Debug, Clone, Serialize)]
pub struct PackingResult {
    pub epsilons: Vec<f64>,
    pub packing_counts: Vec<usize>,
    pub covering_counts: Vec<usize>,
    /// Packing counts at `2ε_i`, for the duality check `P(2ε) ≤ N(ε)`.
    pub double_packing_counts: Vec<usize>,
    pub fitted_exponent: f64,
    pub fit_intercept: f64,
    pub fit_residual: f64,
    pub budget: usize,
    pub seed: RngSeed,
}

impl PackingResult {
    pub fn compute<P, M>(cloud: &PointCloud<P>, metric: M, epsilons: &[f64], seed: RngSeed) -> Result<Self>
    where
        P: Clone + Send + Sync,
        M: Fn(&P, &P) -> f64 + Sync,
    {
        if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::DegenerateGrid("epsilons must be positive and non-empty".into()));
        }
        if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::DegenerateGrid("epsilons must be strictly decreasing".into()));
        }
        let smallest = *epsilons.last().expect("non-empty");
        let dm = DistanceMatrix::new(cloud, &metric)?;
        let traversal = dm.farthest_point_traversal(smallest);
        let covering_counts: Vec<usize> = epsilons.iter().map(|&e| traversal.cover_count(e)).collect();

        // (radius, separated-set size) candidates
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for (&e, &c) in epsilons.iter().zip(&covering_counts) {
            candidates.push((e, c));
            candidates.push((e, dm.pack(e).len()));
        }
        let mut double_packing_counts = Vec::with_capacity(epsilons.len());
        for &e in epsilons {
            let raw = dm.pack(2.0 * e).len();
            candidates.push((2.0 * e, raw));
            candidates.push((2.0 * e, traversal.cover_count(2.0 * e)));
            double_packing_counts.push(raw);
        }
        let best_at = |eps: f64| {
            candidates
                .iter()
                .filter(|(r, _)| *r >= eps)
                .map(|&(_, c)| c)
                .max()
                .unwrap_or(1)
        };
        let packing_counts: Vec<usize> = epsilons.iter().map(|&e| best_at(e)).collect();
        let double_packing_counts: Vec<usize> = epsilons
            .iter()
            .zip(&double_packing_counts)
            .map(|(&e, &raw)| raw.max(best_at(2.0 * e)))
            .collect();

        let (fitted_exponent, fit_intercept, fit_residual) = if epsilons.len() >= 3 {
            let fit = exponent_fit(epsilons, &packing_counts)?;
            (fit.slope, fit.intercept, fit.residual)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Ok(Self {
            epsilons: epsilons.to_vec(),
            packing_counts,
            covering_counts,
            double_packing_counts,
            fitted_exponent,
            fit_intercept,
            fit_residual,
            budget: cloud.len(),
            seed,
        })
    }

    /// Duality on the grid: `N(ε) ≤ P(ε)` and `P(2ε) ≤ N(ε)`; counts monotone in ε.
    pub fn duality_holds(&self) -> bool {
        let pointwise = self
            .packing_counts
            .iter()
            .zip(&self.covering_counts)
            .zip(&self.double_packing_counts)
            .all(|((&p, &n), &p2)| n <= p && p2 <= n);
        let monotone = self.packing_counts.windows(2).all(|w| w[0] <= w[1])
            && self.covering_counts.windows(2).all(|w| w[0] <= w[1]);
        pointwise && monotone
    }

    /// CSV with columns `epsilon,pack_count,cover_count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epsilon", "pack_count", "cover_count"])?;
        for ((e, p), c) in self
            .epsilons
            .iter()
            .zip(&self.packing_counts)
            .zip(&self.covering_counts)
        {
            w.write_record([format!("{e}"), p.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Fit summary as JSON.
    pub fn fit_summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "fitted_exponent": self.fitted_exponent,
            "fit_intercept": self.fit_intercept,
            "fit_residual": self.fit_residual,
            "budget": self.budget,
            "seed": self.seed,
            "epsilons": self.epsilons,
            "packing_counts": self.packing_counts,
            "covering_counts": self.covering_counts,
        }))?)
    }
}
