//! Reference curves in the (linear entropy, concurrence) and
//! (linear entropy, |B|max) planes, and statistics of how closely a
//! trajectory approaches them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytic::TwoQubitState;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix, C64};
use crate::metrics::{bell_max_general, linear_entropy, wootters_concurrence};
use crate::model::{bell_minus, bell_plus, SystemParams};
use crate::trajectory::Trajectory;

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Linear entropy where the two branches of the MEMS family meet (`C = 2/3`).
pub const MEMS_KNOT_ENTROPY: f64 = 16.0 / 27.0;
pub const MEMS_KNOT_CONCURRENCE: f64 = 2.0 / 3.0;

/// Minimum sample count accepted by [`bell_frontier`].
pub const MIN_BELL_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontierKind {
    Werner,
    MemsCm,
    BellFrontier,
}

impl FrontierKind {
    pub fn name(&self) -> &'static str {
        match self {
            FrontierKind::Werner => "werner",
            FrontierKind::MemsCm => "mems",
            FrontierKind::BellFrontier => "bell",
        }
    }

    fn max_value(&self) -> f64 {
        match self {
            FrontierKind::BellFrontier => TSIRELSON,
            _ => 1.0,
        }
    }
}

/// A sampled boundary curve, points `(M, value)` sorted by strictly increasing `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCurve {
    kind: FrontierKind,
    points: Vec<(f64, f64)>,
}

impl FrontierCurve {
    pub fn new(kind: FrontierKind, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("frontier curve needs at least one point".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter("frontier entropies must be strictly increasing".into()));
        }
        let slack = 1e-12;
        let top = kind.max_value() + slack;
        if let Some(&(m, v)) = points
            .iter()
            .find(|&&(m, v)| !(-slack..=1.0 + slack).contains(&m) || !(-slack..=top).contains(&v))
        {
            return Err(Error::InvalidParameter(format!("frontier point ({m}, {v}) out of range")));
        }
        Ok(Self { kind, points })
    }

    pub fn kind(&self) -> FrontierKind {
        self.kind
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation at entropy `m`; `None` outside the sampled range.
    pub fn value_at(&self, m: f64) -> Option<f64> {
        let first = self.points.first()?.0;
        let last = self.points.last()?.0;
        if m < first || m > last {
            return None;
        }
        let idx = self.points.partition_point(|&(x, _)| x <= m);
        if idx == 0 {
            return Some(self.points[0].1);
        }
        if idx == self.points.len() {
            return Some(self.points[idx - 1].1);
        }
        let (x0, y0) = self.points[idx - 1];
        let (x1, y1) = self.points[idx];
        Some(y0 + (y1 - y0) * (m - x0) / (x1 - x0))
    }

    /// Value of the last point at or below `m`; an upper bound on a
    /// non-increasing envelope stored at bin left edges.
    pub fn step_value_at(&self, m: f64) -> Option<f64> {
        let idx = self.points.partition_point(|&(x, _)| x <= m);
        (idx > 0).then(|| self.points[idx - 1].1)
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Euclidean distance from `q` to the polyline through the points.
    pub fn distance_to(&self, q: (f64, f64)) -> f64 {
        if self.points.len() == 1 {
            return dist(q, self.points[0]);
        }
        self.points
            .windows(2)
            .map(|w| segment_distance(q, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Points spaced evenly in arc length along the polyline, each paired with
    /// the arc length it represents.
    fn arc_samples(&self, pieces: usize) -> Vec<((f64, f64), f64)> {
        let total = self.arc_length();
        if total == 0.0 || self.points.len() < 2 {
            return vec![(self.points[0], 0.0)];
        }
        let piece = total / pieces as f64;
        let mut out = Vec::with_capacity(pieces);
        let mut seg = 0;
        let mut seg_start = 0.0;
        for k in 0..pieces {
            let s = (k as f64 + 0.5) * piece;
            loop {
                let len = dist(self.points[seg], self.points[seg + 1]);
                if s <= seg_start + len || seg + 2 == self.points.len() {
                    let f = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                    let (a, b) = (self.points[seg], self.points[seg + 1]);
                    out.push(((a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1)), piece));
                    break;
                }
                seg_start += len;
                seg += 1;
            }
        }
        out
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn segment_distance(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let f = if len2 == 0.0 { 0.0 } else { (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    dist(q, (a.0 + f * dx, a.1 + f * dy))
}

/// Bucket grid over planar points for radius and nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<(f64, f64)>,
    origin: (f64, f64),
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl PointIndex {
    pub fn new(points: Vec<(f64, f64)>, cell: f64) -> Self {
        assert!(!points.is_empty(), "point index needs at least one point");
        let min_x = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let min_y = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let max_x = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let max_y = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let nx = ((max_x - min_x) / cell).floor() as usize + 1;
        let ny = ((max_y - min_y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in points.iter().enumerate() {
            let cx = ((p.0 - min_x) / cell) as usize;
            let cy = ((p.1 - min_y) / cell) as usize;
            buckets[cy.min(ny - 1) * nx + cx.min(nx - 1)].push(i as u32);
        }
        Self { points, origin: (min_x, min_y), cell, nx, ny, buckets }
    }

    fn cell_range(&self, lo: f64, hi: f64, origin: f64, n: usize) -> Option<(usize, usize)> {
        let a = ((lo - origin) / self.cell).floor();
        let b = ((hi - origin) / self.cell).floor();
        if b < 0.0 || a > (n - 1) as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(n - 1)))
    }

    /// Smallest distance to a point within `radius` of `q`.
    pub fn nearest_within(&self, q: (f64, f64), radius: f64) -> Option<f64> {
        let (x0, x1) = self.cell_range(q.0 - radius, q.0 + radius, self.origin.0, self.nx)?;
        let (y0, y1) = self.cell_range(q.1 - radius, q.1 + radius, self.origin.1, self.ny)?;
        let mut best = f64::INFINITY;
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &i in &self.buckets[cy * self.nx + cx] {
                    best = best.min(dist(q, self.points[i as usize]));
                }
            }
        }
        (best <= radius).then_some(best)
    }

    pub fn nearest(&self, q: (f64, f64)) -> f64 {
        let mut radius = self.cell;
        loop {
            if let Some(d) = self.nearest_within(q, radius) {
                return d;
            }
            radius *= 2.0;
        }
    }
}

/// Werner state `p|B+><B+| + (1−p) I/4`.
pub fn werner_state(p: f64) -> Result<TwoQubitState> {
    let m = &ComplexMatrix::outer(&bell_plus()).scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    TwoQubitState::new(m)
}

/// `(M, C) = (1 − p², (3p − 1)/2)` for `p ∈ [1/3, 1]`.
pub fn werner_point(p: f64) -> (f64, f64) {
    (1.0 - p * p, ((3.0 * p - 1.0) / 2.0).max(0.0))
}

pub fn werner_curve(n_points: usize) -> Result<FrontierCurve> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("werner curve needs at least two points".into()));
    }
    let points = (0..n_points)
        .map(|i| {
            let p = if i + 1 == n_points { 1.0 / 3.0 } else { 1.0 - (2.0 / 3.0) * i as f64 / (n_points - 1) as f64 };
            werner_point(p)
        })
        .collect();
    FrontierCurve::new(FrontierKind::Werner, points)
}

fn mems_g(c: f64) -> f64 {
    if c >= MEMS_KNOT_CONCURRENCE {
        c / 2.0
    } else {
        1.0 / 3.0
    }
}

/// Maximally entangled mixed state with concurrence `c` for the linear entropy:
/// `g(C)(|00><00| + |11><11|) + (1 − 2g(C))|01><01| + (C/2)(|00><11| + h.c.)`.
pub fn mems_state(c: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("MEMS concurrence must lie in [0, 1], got {c}")));
    }
    let g = mems_g(c);
    let mut m = ComplexMatrix::from_real_diag(&[g, 1.0 - 2.0 * g, 0.0, g]);
    m[(0, 3)] = C64::new(c / 2.0, 0.0);
    m[(3, 0)] = C64::new(c / 2.0, 0.0);
    TwoQubitState::new(m)
}

/// Linear entropy of [`mems_state`]`(c)`.
pub fn mems_linear_entropy(c: f64) -> f64 {
    if c >= MEMS_KNOT_CONCURRENCE {
        8.0 / 3.0 * c * (1.0 - c)
    } else {
        8.0 / 9.0 - 2.0 / 3.0 * c * c
    }
}

/// Largest concurrence reachable at linear entropy `m` (zero beyond `8/9`).
pub fn mems_concurrence_at(m: f64) -> f64 {
    if m <= 0.0 {
        1.0
    } else if m <= MEMS_KNOT_ENTROPY {
        (1.0 + (1.0 - 1.5 * m).max(0.0).sqrt()) / 2.0
    } else if m < 8.0 / 9.0 {
        (1.5 * (8.0 / 9.0 - m)).sqrt()
    } else {
        0.0
    }
}

/// MEMS frontier sampled uniformly in concurrence, always including the
/// branch knot `C = 2/3`.
pub fn mems_curve(n_points: usize) -> Result<FrontierCurve> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("MEMS curve needs at least two points".into()));
    }
    let mut cs: Vec<f64> = (0..n_points).map(|i| 1.0 - i as f64 / (n_points - 1) as f64).collect();
    if !cs.iter().any(|&c| (c - MEMS_KNOT_CONCURRENCE).abs() < 1e-12) {
        cs.push(MEMS_KNOT_CONCURRENCE);
        cs.sort_by(|a, b| b.total_cmp(a));
    }
    let points = cs
        .into_iter()
        .map(|c| {
            let c = if (c - MEMS_KNOT_CONCURRENCE).abs() < 1e-12 { MEMS_KNOT_CONCURRENCE } else { c };
            (mems_linear_entropy(c), c)
        })
        .collect();
    FrontierCurve::new(FrontierKind::MemsCm, points)
}

/// Random two-qubit state: a Haar-random pure state mixed with `I/4` at a
/// uniformly drawn weight.
pub fn random_state(rng: &mut impl Rng) -> TwoQubitState {
    let psi = random_unit_vector(rng);
    let x: f64 = rng.random();
    let m = &ComplexMatrix::outer(&psi).scale_real(1.0 - x) + &ComplexMatrix::identity(4).scale_real(x / 4.0);
    TwoQubitState::new(m).expect("convex mixture of states is a state")
}

fn random_unit_vector(rng: &mut impl Rng) -> [C64; 4] {
    let mut v = [C64::new(0.0, 0.0); 4];
    for z in v.iter_mut() {
        *z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// A state held as a factor `A` with `ρ = AA† / Tr(AA†)`, for local search.
#[derive(Debug, Clone)]
struct Factor(ComplexMatrix);

impl Factor {
    fn from_state(s: &TwoQubitState) -> Self {
        let eig = herm_eig(s.matrix()).expect("states are Hermitian");
        let mut a = eig.vectors.clone();
        for (k, &p) in eig.values.iter().enumerate() {
            let root = p.max(0.0).sqrt();
            for i in 0..4 {
                a[(i, k)] *= root;
            }
        }
        Factor(a)
    }

    fn random(rng: &mut impl Rng, rank: usize) -> Self {
        let mut a = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for k in 0..rank {
                a[(i, k)] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
        Factor(a)
    }

    fn state(&self) -> Option<TwoQubitState> {
        let rho = &self.0 * &self.0.adjoint();
        let tr = rho.trace().re;
        if tr.is_nan() || tr <= 1e-300 {
            return None;
        }
        let mut rho = rho.scale_real(1.0 / tr);
        for i in 0..4 {
            rho[(i, i)] = C64::new(rho[(i, i)].re, 0.0);
        }
        TwoQubitState::new(rho).ok()
    }

    fn perturbed(&self, rng: &mut impl Rng, step: f64) -> Self {
        let scale = self.0.frobenius_norm();
        let mut a = self.0.clone();
        for i in 0..4 {
            for k in 0..4 {
                a[(i, k)] += C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * (step * scale);
            }
        }
        Factor(a)
    }
}

/// Hill climbing on a state factor; `score` returns `None` for rejected states.
fn local_search<F>(start: Factor, start_score: f64, iterations: usize, rng: &mut impl Rng, score: F) -> (Factor, f64)
where
    F: Fn(&TwoQubitState) -> Option<f64>,
{
    let (mut best, mut best_score) = (start, start_score);
    let mut step = 0.05;
    for _ in 0..iterations {
        let cand = best.perturbed(rng, step);
        match cand.state().and_then(|s| score(&s)) {
            Some(v) if v > best_score => {
                best = cand;
                best_score = v;
                step = (step * 1.3).min(0.3);
            }
            _ => step = (step * 0.85).max(1e-5),
        }
    }
    (best, best_score)
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

const CHUNK: usize = 4096;

/// Result of searching for states above the MEMS curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAudit {
    pub samples: usize,
    /// Largest `C − C_MEMS(M)` over entangled states found (negative when
    /// nothing reaches the curve).
    pub max_excess: f64,
    /// `(M, C)` of the state attaining `max_excess`.
    pub worst_point: (f64, f64),
}

/// `C − C_MEMS(M)` for entangled states; separable states cannot exceed the
/// curve and are skipped so the audit reports the closest real approach.
fn mems_excess(s: &TwoQubitState) -> Option<(f64, (f64, f64))> {
    let c = wootters_concurrence(s).ok()?;
    if c <= 0.0 {
        return None;
    }
    let m = linear_entropy(s);
    Some((c - mems_concurrence_at(m), (m, c)))
}

/// Random sampling plus local search maximizing `C − C_MEMS(M)`.
///
/// Samples mix three families: pure states mixed with `I/4`, random
/// rank-2 and rank-3 states, and perturbed MEMS states. The best candidates
/// are then refined by hill climbing.
pub fn mems_oracle_audit(samples: usize, seed: u64) -> Result<OracleAudit> {
    if samples == 0 {
        return Err(Error::InvalidParameter("oracle audit needs samples".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    type Candidate = (f64, (f64, f64), Factor);
    let per_chunk: Vec<Vec<Candidate>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut top: Vec<Candidate> = Vec::new();
            for i in 0..count {
                let state = match i % 4 {
                    0 | 1 => random_state(&mut rng),
                    2 => match Factor::random(&mut rng, 2 + (i / 4) % 2).state() {
                        Some(s) => s,
                        None => continue,
                    },
                    _ => {
                        let c: f64 = rng.random();
                        let base = Factor::from_state(&mems_state(c).expect("c in range"));
                        match base.perturbed(&mut rng, 0.02).state() {
                            Some(s) => s,
                            None => continue,
                        }
                    }
                };
                if let Some((excess, point)) = mems_excess(&state) {
                    top.push((excess, point, Factor::from_state(&state)));
                    if top.len() > 16 {
                        top.sort_by(|a, b| b.0.total_cmp(&a.0));
                        top.truncate(8);
                    }
                }
            }
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(2);
            top
        })
        .collect();

    let candidates: Vec<Candidate> = per_chunk.into_iter().flatten().collect();
    let refined: Vec<(f64, (f64, f64))> = candidates
        .into_par_iter()
        .enumerate()
        .map(|(k, (excess, point, factor))| {
            let mut rng = chunk_rng(seed ^ 0x5eed_0fa1, k as u64);
            let (best, score) = local_search(factor, excess, 300, &mut rng, |s| mems_excess(s).map(|e| e.0));
            let point = best.state().and_then(|s| mems_excess(&s)).map_or(point, |e| e.1);
            (score, point)
        })
        .collect();

    let (max_excess, worst_point) = refined
        .into_iter()
        .fold((f64::NEG_INFINITY, (0.0, 0.0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(OracleAudit { samples, max_excess, worst_point })
}

/// Bell-diagonal state with weights on `|Φ+>, |Φ->, |Ψ+>, |Ψ->`.
fn bell_diagonal(weights: [f64; 4]) -> Result<TwoQubitState> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    let phi_p = [s, z, z, s];
    let phi_m = [s, z, z, -s];
    let vectors = [phi_p, phi_m, bell_plus(), bell_minus()];
    let mut m = ComplexMatrix::zeros(4);
    for (w, v) in weights.iter().zip(&vectors) {
        m = &m + &ComplexMatrix::outer(v).scale_real(*w);
    }
    TwoQubitState::new(m)
}

/// Probability weights with a random number of nonzero entries, skewed so
/// that nearly pure mixtures are drawn often.
fn skewed_simplex(rng: &mut impl Rng) -> [f64; 4] {
    let mut slots = [0, 1, 2, 3];
    slots.shuffle(rng);
    let used = rng.random_range(1..=4);
    let exponent = rng.random_range(1.0..8.0);
    let mut w = [0.0; 4];
    for &k in &slots[..used] {
        w[k] = rng.random::<f64>().powf(exponent);
    }
    let sum: f64 = w.iter().sum();
    if sum > 0.0 {
        w.map(|x| x / sum)
    } else {
        [1.0, 0.0, 0.0, 0.0]
    }
}

/// `w|ψ><ψ| + (1 − w)|χ><χ|` for random pure `ψ, χ` and `w` skewed towards 1.
fn skewed_rank_two(rng: &mut impl Rng) -> Option<TwoQubitState> {
    let psi = random_unit_vector(rng);
    let chi = random_unit_vector(rng);
    let w = 1.0 - rng.random::<f64>().powi(3) / 2.0;
    let m = &ComplexMatrix::outer(&psi).scale_real(w) + &ComplexMatrix::outer(&chi).scale_real(1.0 - w);
    TwoQubitState::new(m).ok()
}

fn bin_of(m: f64, bins: usize) -> usize {
    ((m * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

/// Numerically estimated upper envelope of `|B|max` versus linear entropy.
///
/// States are drawn from Bell-diagonal, perturbed-MEMS, skewed rank-2 and
/// generic random families and binned by `M` into `n_points − 1` bins over `[0, 1]`. The best
/// state in each bin is refined by local search that stays in the bin, and
/// the envelope is made non-increasing by a running maximum from `M = 1`
/// down. Point `i` sits at the left edge `M = i/(n_points − 1)` and bounds
/// every state in its bin and beyond.
pub fn bell_frontier(n_points: usize, samples: usize, seed: u64) -> Result<FrontierCurve> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("bell frontier needs at least two points".into()));
    }
    if samples < MIN_BELL_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "bell frontier needs at least {MIN_BELL_SAMPLES} samples, got {samples}"
        )));
    }
    let bins = n_points - 1;
    let chunks = samples.div_ceil(CHUNK);
    type Best = Vec<Option<(f64, Factor)>>;
    let per_chunk: Vec<Best> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut best: Best = vec![None; bins];
            for i in 0..count {
                let state = match i % 4 {
                    0 => bell_diagonal(skewed_simplex(&mut rng)).ok(),
                    1 => {
                        let c: f64 = rng.random();
                        let base = Factor::from_state(&mems_state(c).expect("c in range"));
                        base.perturbed(&mut rng, 0.05).state()
                    }
                    2 => skewed_rank_two(&mut rng),
                    _ => Some(random_state(&mut rng)),
                };
                let Some(state) = state else { continue };
                let Ok(b) = bell_max_general(&state) else { continue };
                let k = bin_of(linear_entropy(&state), bins);
                if best[k].as_ref().is_none_or(|(v, _)| b > *v) {
                    best[k] = Some((b, Factor::from_state(&state)));
                }
            }
            best
        })
        .collect();

    let mut merged: Best = vec![None; bins];
    for chunk in per_chunk {
        for (slot, cand) in merged.iter_mut().zip(chunk) {
            if let Some((v, f)) = cand {
                if slot.as_ref().is_none_or(|(cur, _)| v > *cur) {
                    *slot = Some((v, f));
                }
            }
        }
    }
    // The pure Bell state pins the M = 0 end.
    let bell = TwoQubitState::pure(&bell_plus())?;
    merged[0] = Some((bell_max_general(&bell)?, Factor::from_state(&bell)));

    let refined: Vec<f64> = merged
        .into_par_iter()
        .enumerate()
        .map(|(k, slot)| {
            let Some((value, factor)) = slot else { return 0.0 };
            let mut rng = chunk_rng(seed ^ 0xbe11_f407, k as u64);
            let score = |s: &TwoQubitState| {
                (bin_of(linear_entropy(s), bins) == k).then(|| bell_max_general(s).ok()).flatten()
            };
            local_search(factor, value, 400, &mut rng, score).1
        })
        .collect();

    let mut envelope = vec![0.0; n_points];
    let mut running: f64 = 0.0;
    for k in (0..bins).rev() {
        running = running.max(refined[k]);
        envelope[k] = running.min(TSIRELSON);
    }
    // M = 1 is reached only by I/4, for which T = 0.
    envelope[bins] = 0.0;
    let points = envelope.into_iter().enumerate().map(|(i, v)| (i as f64 / bins as f64, v)).collect();
    FrontierCurve::new(FrontierKind::BellFrontier, points)
}

/// How closely a set of plane points approaches a frontier curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub epsilon: f64,
    /// Smallest distance from any trajectory point to the curve.
    pub min_distance: f64,
    /// Fraction of the curve's arc length within `epsilon` of some trajectory point.
    pub fraction_covered: f64,
}

/// Number of equal-arc-length pieces used to measure coverage.
pub const COVERAGE_PIECES: usize = 4096;

/// Coverage of `curve` by the `(M, C)` points of a trajectory.
pub fn coverage(traj: &Trajectory, curve: &FrontierCurve, epsilon: f64) -> Result<CoverageReport> {
    let points: Vec<(f64, f64)> = traj.points.iter().map(|p| (p.linear_entropy, p.concurrence)).collect();
    coverage_of_points(&points, curve, epsilon)
}

/// Coverage of `curve` by arbitrary plane points.
pub fn coverage_of_points(points: &[(f64, f64)], curve: &FrontierCurve, epsilon: f64) -> Result<CoverageReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("coverage needs at least one trajectory point".into()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let min_distance = points
        .par_iter()
        .map(|&q| curve.distance_to(q))
        .reduce(|| f64::INFINITY, f64::min);

    let index = PointIndex::new(points.to_vec(), 0.01);
    let samples = curve.arc_samples(COVERAGE_PIECES);
    let total: f64 = samples.iter().map(|s| s.1).sum();
    let covered = samples
        .iter()
        .filter(|(q, _)| index.nearest_within(*q, epsilon).is_some())
        .fold(0.0, |acc, s| acc + s.1);
    let fraction_covered = if total > 0.0 {
        covered / total
    } else if index.nearest_within(curve.points[0], epsilon).is_some() {
        1.0
    } else {
        0.0
    };
    Ok(CoverageReport { epsilon, min_distance, fraction_covered })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rationality {
    EffectivelyRational,
    EffectivelyIrrational,
}

impl Rationality {
    pub fn label(&self) -> &'static str {
        match self {
            Rationality::EffectivelyRational => "EFFECTIVELY_RATIONAL",
            Rationality::EffectivelyIrrational => "EFFECTIVELY_IRRATIONAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalityReport {
    /// Δ/Ω.
    pub ratio: f64,
    /// Continued-fraction convergents `(p, q)` with `q ≤ q_max`.
    pub convergents: Vec<(i64, u64)>,
    /// Smallest `q ≤ q_max` with `|ratio − p/q| < tol` for some integer `p`.
    pub best_q: Option<u64>,
    pub classification: Rationality,
    pub tol: f64,
    pub q_max: u64,
}

/// Continued-fraction convergents of `x` with denominators up to `q_max`.
pub fn convergents(x: f64, q_max: u64) -> Vec<(i64, u64)> {
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut out = vec![(h as i64, k as u64)];
    let mut rest = x - x.floor();
    for _ in 0..64 {
        if rest <= 0.0 {
            break;
        }
        let inv = 1.0 / rest;
        if !inv.is_finite() {
            break;
        }
        let a = inv.floor();
        rest = inv - a;
        let a = a as i128;
        let (h_next, k_next) = (a * h + h_prev, a * k + k_prev);
        if k_next > q_max as i128 {
            break;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        // Equal denominators only occur at the start; keep the later, better one.
        if out.last().is_some_and(|&(_, q)| q == k as u64) {
            out.pop();
        }
        out.push((h as i64, k as u64));
    }
    out
}

pub fn classify_ratio(p: &SystemParams, tol: f64, q_max: u64) -> Result<RationalityReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if q_max < 2 {
        return Err(Error::InvalidParameter(format!("q_max must be at least 2, got {q_max}")));
    }
    let ratio = p.delta() / p.omega();
    let best_q = (1..=q_max).find(|&q| {
        let qf = q as f64;
        (ratio - (ratio * qf).round() / qf).abs() < tol
    });
    let classification = if best_q.is_some() {
        Rationality::EffectivelyRational
    } else {
        Rationality::EffectivelyIrrational
    };
    Ok(RationalityReport { ratio, convergents: convergents(ratio, q_max), best_q, classification, tol, q_max })
}
