//! Distances between point configurations and between samplers.
//!
//! Two notions of discrepancy are used throughout: the symmetric-difference
//! count (a total-variation-style distance that tolerates unequal
//! cardinalities) and the lifted quadratic cost `½ min_σ Σ ‖x_j − y_σ(j)‖²`
//! over equal-cardinality configurations. The module also carries the
//! closed-form accuracy bounds for spectral truncation and the ring
//! approximation, a one-dimensional quantile-coupling Wasserstein distance
//! between per-slot radial laws, and a coupled Monte Carlo estimator that
//! turns any two samplers into an empirical upper bound on their lifted
//! transport distance.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{GinibreSpectrum, RingBasis};
use crate::rng::SampleStream;
use crate::sampler::SampleMeta;
use crate::specfun;

/// A finite planar point configuration, optionally carrying the provenance
/// of the sample that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<Complex64>,
    pub meta: Option<SampleMeta>,
}

impl Configuration {
    /// Wraps a point list, rejecting non-finite coordinates.
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        for (i, z) in points.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "point {i} has non-finite coordinates {z}"
                )));
            }
        }
        Ok(Configuration { points, meta: None })
    }

    pub fn with_meta(mut self, meta: SampleMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl From<crate::sampler::GinibreSample> for Configuration {
    fn from(sample: crate::sampler::GinibreSample) -> Self {
        Configuration {
            points: sample.points,
            meta: Some(sample.meta),
        }
    }
}

/// An equal-cardinality point matching: `assignment[i]` pairs point `i` of
/// the first configuration with that index of the second, and `cost` is
/// `½ Σ ‖x_i − y_assignment(i)‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub assignment: Vec<usize>,
    pub cost: f64,
}

impl Matching {
    /// Recomputes the cost of this assignment from scratch.
    pub fn recompute_cost(&self, a: &Configuration, b: &Configuration) -> f64 {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| 0.5 * (a.points[i] - b.points[j]).norm_sqr())
            .sum()
    }
}

fn pair_cost(x: Complex64, y: Complex64) -> f64 {
    0.5 * (x - y).norm_sqr()
}

/// Minimum-cost perfect matching via shortest augmenting paths with dual
/// potentials, O(n³). Exact up to floating-point addition of the costs.
pub fn quadratic_matching_cost(a: &Configuration, b: &Configuration) -> Result<Matching> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::SizeMismatch {
            left: n,
            right: b.len(),
        });
    }
    if n == 0 {
        return Ok(Matching {
            assignment: Vec::new(),
            cost: 0.0,
        });
    }
    let cost = |i: usize, j: usize| pair_cost(a.points[i], b.points[j]);

    // Duals u (rows) and v (columns), 1-based with a virtual 0 column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // p[j] = row currently matched to column j (0 = none).
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
        total += cost(p[j] - 1, j - 1);
    }
    Ok(Matching {
        assignment,
        cost: total,
    })
}

/// Size cap of the exhaustive matcher.
pub const BRUTE_FORCE_MAX: usize = 8;

/// Exhaustive minimum over all n! pairings; test oracle for the solver.
pub fn brute_force_matching(a: &Configuration, b: &Configuration) -> Result<Matching> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::SizeMismatch {
            left: n,
            right: b.len(),
        });
    }
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            what: "configuration for brute-force matching",
            limit: BRUTE_FORCE_MAX,
            got: n,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    let evaluate = |perm: &[usize], best: &mut Option<(Vec<usize>, f64)>| {
        let total: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| pair_cost(a.points[i], b.points[j]))
            .sum();
        if best.as_ref().map_or(true, |(_, cost)| total < *cost) {
            *best = Some((perm.to_vec(), total));
        }
    };
    evaluate(&perm, &mut best);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            evaluate(&perm, &mut best);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let (assignment, cost) = best.unwrap_or((Vec::new(), 0.0));
    Ok(Matching { assignment, cost })
}

fn try_augment(
    left: usize,
    adjacency: &[Vec<usize>],
    visited: &mut [bool],
    matched_right: &mut [usize],
) -> bool {
    for &right in &adjacency[left] {
        if !visited[right] {
            visited[right] = true;
            if matched_right[right] == usize::MAX
                || try_augment(matched_right[right], adjacency, visited, matched_right)
            {
                matched_right[right] = left;
                return true;
            }
        }
    }
    false
}

/// Symmetric-difference count `|ξ Δ ζ|`, treating points as equal when
/// within Euclidean distance `tol` (with `tol = 0`, exact coordinate
/// equality). Computed through a maximum bipartite matching so each point
/// cancels at most one partner.
pub fn tv_config_distance(a: &Configuration, b: &Configuration, tol: f64) -> Result<usize> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let matched = if tol == 0.0 {
        // Exact multiset intersection via sorted two-pointer walk.
        let key = |z: &Complex64| (z.re, z.im);
        let mut xs: Vec<_> = a.points.clone();
        let mut ys: Vec<_> = b.points.clone();
        xs.sort_by(|p, q| key(p).0.total_cmp(&key(q).0).then(key(p).1.total_cmp(&key(q).1)));
        ys.sort_by(|p, q| key(p).0.total_cmp(&key(q).0).then(key(p).1.total_cmp(&key(q).1)));
        let (mut i, mut j, mut common) = (0, 0, 0usize);
        while i < xs.len() && j < ys.len() {
            let ord = key(&xs[i])
                .0
                .total_cmp(&key(&ys[j]).0)
                .then(key(&xs[i]).1.total_cmp(&key(&ys[j]).1));
            match ord {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        common
    } else {
        let adjacency: Vec<Vec<usize>> = a
            .points
            .iter()
            .map(|x| {
                b.points
                    .iter()
                    .enumerate()
                    .filter(|(_, y)| (x - *y).norm() <= tol)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        let mut matched_right = vec![usize::MAX; b.len()];
        let mut total = 0usize;
        for left in 0..a.len() {
            let mut visited = vec![false; b.len()];
            if try_augment(left, &adjacency, &mut visited, &mut matched_right) {
                total += 1;
            }
        }
        total
    };
    Ok(a.len() + b.len() - 2 * matched)
}

/// Number of quadrature nodes of [`radial_w2`].
const RADIAL_W2_NODES: usize = 10_000;

/// Quantile levels are clipped into `[CLIP, 1 − CLIP]` before inversion;
/// the inverse CDFs are smooth away from the endpoints.
const RADIAL_W2_CLIP: f64 = 1e-10;

/// Gauss–Legendre nodes and weights on (0, 1); weights sum to 1.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (n + 1) / 2;
    for i in 0..half {
        // Root of P_n near the top of [−1, 1], refined by Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn radial_w2_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_unit(RADIAL_W2_NODES))
}

/// Solves `P(shape, x) = target` for `x ∈ [lo, hi]` by safeguarded Newton
/// (the derivative is the gamma density, available in closed form).
fn invert_lower_gamma(shape: f64, target: f64, mut lo: f64, mut hi: f64, ln_gamma: f64) -> f64 {
    debug_assert!(hi > lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..80 {
        let p = specfun::lower_regularized_gamma(shape, x).unwrap_or(f64::NAN);
        let err = p - target;
        if err > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let density = if x > 0.0 {
            ((shape - 1.0) * x.ln() - x - ln_gamma).exp()
        } else {
            0.0
        };
        let newton = x - err / density;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    x
}

/// Squared quadratic Wasserstein distance between the exact radial law of
/// one slot (density ∝ r^{2m+1} e^{−r²} on [0, R]) and its ring-restricted
/// law, by quantile coupling: `∫₀¹ (F⁻¹(t) − F̃⁻¹(t))² dt`.
///
/// The ring law is the exact law conditioned on the ring, so both quantile
/// functions invert the same incomplete-gamma CDF at shifted levels; the
/// angle-preserving coupling makes this an upper bound for the planar
/// transport cost between the corresponding eigenfunction densities.
pub fn radial_w2(basis: &RingBasis, slot: usize) -> Result<f64> {
    let spectrum = basis.spectrum();
    if slot >= spectrum.truncation() {
        return Err(Error::InvalidConfig(format!(
            "slot {slot} outside truncation {}",
            spectrum.truncation()
        )));
    }
    let base = spectrum.base_eigenvalue(slot);
    if base <= 0.0 {
        return Err(Error::Degenerate(format!(
            "slot {slot} has an underflowed disc mass"
        )));
    }
    let m = spectrum.global_index(slot) as f64;
    let shape = m + 1.0;
    let ln_gamma = specfun::ln_gamma(shape);
    let radius = spectrum.radius();
    let r2 = radius * radius;
    let lo_ring = basis.lower(slot).powi(2);
    let hi_ring = basis.upper(slot).powi(2);
    let p_lo = basis.cdf_lower_raw(slot);
    let span = basis.cdf_span_raw(slot);
    if span <= 0.0 {
        return Err(Error::Degenerate(format!(
            "slot {slot} has an empty ring CDF span"
        )));
    }
    let (nodes, weights) = radial_w2_rule();
    let mut acc = 0.0;
    for (&t, &w) in nodes.iter().zip(weights) {
        let t = t.clamp(RADIAL_W2_CLIP, 1.0 - RADIAL_W2_CLIP);
        let x_exact = invert_lower_gamma(shape, t * base, 0.0, r2, ln_gamma);
        let x_ring = invert_lower_gamma(shape, p_lo + t * span, lo_ring, hi_ring, ln_gamma);
        let gap = x_exact.sqrt() - x_ring.sqrt();
        acc += w * gap * gap;
    }
    Ok(acc)
}

/// Truncation accuracy: the Kantorovich–Rubinstein distance between the
/// full process and its spectral truncation at `⌈(R+c)²⌉` indices is at
/// most `√(2/π) · R · e^{−c²}`.
pub fn kr_truncation_bound(radius: f64, margin: f64) -> Result<f64> {
    if !(margin > 0.0 && radius > margin) {
        return Err(Error::Domain(format!(
            "truncation bound needs R > c > 0, got R = {radius}, c = {margin}"
        )));
    }
    Ok((2.0 / PI).sqrt() * radius * (-margin * margin).exp())
}

/// Kantorovich–Rubinstein distance bound between two spectra whose
/// eigenvalues dominate one another pointwise: `Σ |λ_n^A − λ_n^B|`.
pub fn eigenvalue_gap_bound(a: &GinibreSpectrum, b: &GinibreSpectrum) -> Result<f64> {
    if a.params().palm != b.params().palm {
        return Err(Error::InvalidConfig(
            "eigenvalue gap bound compares spectra with the same index offset".into(),
        ));
    }
    let la = a.eigenvalues();
    let lb = b.eigenvalues();
    let n = la.len().max(lb.len());
    let mut total = 0.0;
    for i in 0..n {
        let va = la.get(i).copied().unwrap_or(0.0);
        let vb = lb.get(i).copied().unwrap_or(0.0);
        if vb > va + 1e-12 {
            return Err(Error::Domain(format!(
                "domination hypothesis fails at index {i}: {vb} > {va}"
            )));
        }
        total += (va - vb).abs();
    }
    Ok(total)
}

/// Lower bound on the point count: `P(card < (R−c)²) ≤ R e^{−c²} / √(2π)`.
pub fn cardinality_lower_bound(radius: f64, margin: f64) -> Result<f64> {
    if !(margin > 0.0 && radius > margin) {
        return Err(Error::Domain(format!(
            "cardinality bound needs R > c > 0, got R = {radius}, c = {margin}"
        )));
    }
    Ok(radius * (-margin * margin).exp() / (2.0 * PI).sqrt())
}

/// Ring-approximation accuracy over the worst-case active set (all
/// indices): the lifted transport cost between the exact and
/// ring-restricted conditional laws is at most `Σ_n log(1/μ_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximationBound {
    /// `Σ_{n<N} log(1/μ_n)`.
    pub total: f64,
    /// `R² e^{−c²}`: the scale this sum is expected to track (the sharper
    /// cap involves an unspecified absolute constant).
    pub reference_scale: f64,
}

pub fn approximation_bound(basis: &RingBasis) -> ApproximationBound {
    let spectrum = basis.spectrum();
    let mut total = 0.0;
    for slot in 0..spectrum.truncation() {
        // log(1/μ) = −log(1 − complement), accurate for μ near 1.
        total -= (-basis.mass_complement(slot)).ln_1p();
    }
    let radius = spectrum.radius();
    let margin = spectrum.margin();
    ApproximationBound {
        total,
        reference_scale: radius * radius * (-margin * margin).exp(),
    }
}

/// Outcome of a coupled Monte Carlo comparison of two samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcEstimate {
    pub trials: u64,
    /// Trials whose two configurations had equal cardinality.
    pub matched_trials: u64,
    /// Mean lifted matching cost over matched trials; `None` if there were
    /// no matched trials at all.
    pub mean_matched_cost: Option<f64>,
    /// 95% confidence half-width of the mean cost (infinite below 2
    /// matched trials).
    pub cost_half_width: f64,
    /// Fraction of trials with unequal cardinalities (lifted cost infinite).
    pub mismatch_rate: f64,
    /// 95% binomial half-width of the mismatch rate.
    pub mismatch_half_width: f64,
}

/// Draws `trials` coupled configuration pairs and reports the mean lifted
/// matching cost over equal-count pairs plus the count-mismatch rate.
///
/// With `shared_randomness` both samplers consume the same substream per
/// trial (a common coupling); otherwise they get disjoint substreams. Any
/// coupling upper-bounds the transport distance in expectation, so the
/// returned mean is a statistical upper bound. Trials run in parallel.
pub fn estimate_wc_monte_carlo<A, B>(
    sampler_a: A,
    sampler_b: B,
    trials: u64,
    seed: u64,
    shared_randomness: bool,
) -> Result<WcEstimate>
where
    A: Fn(&mut SampleStream) -> Result<Configuration> + Sync,
    B: Fn(&mut SampleStream) -> Result<Configuration> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    let outcomes: Vec<(bool, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(bool, f64)> {
            let (xa, xb) = if shared_randomness {
                let mut sa = SampleStream::substream(seed, trial);
                let mut sb = SampleStream::substream(seed, trial);
                (sampler_a(&mut sa)?, sampler_b(&mut sb)?)
            } else {
                let mut sa = SampleStream::substream(seed, 2 * trial);
                let mut sb = SampleStream::substream(seed, 2 * trial + 1);
                (sampler_a(&mut sa)?, sampler_b(&mut sb)?)
            };
            if xa.len() != xb.len() {
                return Ok((false, 0.0));
            }
            let matching = quadratic_matching_cost(&xa, &xb)?;
            Ok((true, matching.cost))
        })
        .collect::<Result<Vec<_>>>()?;

    let matched_trials = outcomes.iter().filter(|(ok, _)| *ok).count() as u64;
    let mismatches = trials - matched_trials;
    let mismatch_rate = mismatches as f64 / trials as f64;
    let mismatch_half_width =
        1.96 * (mismatch_rate * (1.0 - mismatch_rate) / trials as f64).sqrt();
    let (mean, half_width) = if matched_trials == 0 {
        (None, f64::INFINITY)
    } else {
        let n = matched_trials as f64;
        let mean: f64 = outcomes
            .iter()
            .filter(|(ok, _)| *ok)
            .map(|(_, c)| c)
            .sum::<f64>()
            / n;
        let half = if matched_trials < 2 {
            f64::INFINITY
        } else {
            let var: f64 = outcomes
                .iter()
                .filter(|(ok, _)| *ok)
                .map(|(_, c)| (c - mean) * (c - mean))
                .sum::<f64>()
                / (n - 1.0);
            1.96 * (var / n).sqrt()
        };
        (Some(mean), half)
    };
    Ok(WcEstimate {
        trials,
        matched_trials,
        mean_matched_cost: mean,
        cost_half_width: half_width,
        mismatch_rate,
        mismatch_half_width,
    })
}
