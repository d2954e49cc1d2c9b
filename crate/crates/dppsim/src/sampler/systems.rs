//! Radial and angular inverse-CDF systems for one conditional draw.
//!
//! With the remaining-mass weights `U` and the residual projection matrix
//! `W` (identity minus the accumulated frame outer products), the next point
//! is drawn in polar form in two stages:
//!
//! * radius: the marginal radial CDF is `S(r) = Σ_j U_j F_j(r)` over active
//!   slots, normalized by `Σ_j U_j`; `F_j` is the per-slot radial CDF.
//! * angle: at the drawn radius `r`, the conditional angular CDF is a pure
//!   trigonometric polynomial whose coefficients group the entries of `W`
//!   by index difference `d`: with `C_d = Σ_{m_b − m_a = d} W[a,b] g_a g_b`
//!   and `A₀ = Σ_j U_j g_j²`,
//!   `Q(α) ∝ A₀ α + Σ_{d ≥ 1} (2/d)(Re C_d · sin dα − Im C_d · (1 − cos dα))`.
//!
//! Both CDFs are inverted by bisection to a fixed value tolerance. Ring mode
//! exploits the nondecreasing ring edges: slots fully below the trial radius
//! contribute through a prefix sum, and only the O(√n · margin) slots whose
//! ring straddles the radius are evaluated.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::RingBasis;
use crate::sampler::frame::SparseVec;
use crate::sampler::window::{ln_factorial_table, PoissonWindow};
use crate::sampler::SamplerMode;

/// Relative width (times the search interval) at which bisection gives up.
const INTERVAL_TOL_REL: f64 = 1e-12;

/// Hard cap on bisection steps; 2^-200 of the interval is unreachable, so
/// this only trips on a NaN-poisoned objective.
const MAX_BISECT_STEPS: usize = 200;

/// Per-slot constants of one projection draw, fixed across all points.
#[derive(Debug, Clone)]
pub(crate) struct SlotContext {
    pub mode: SamplerMode,
    pub radius: f64,
    /// Global index `m_j` per active slot, strictly increasing.
    pub globals: Vec<u32>,
    /// Ring edges per active slot (nondecreasing in slot order).
    pub ring_lo: Vec<f64>,
    pub ring_hi: Vec<f64>,
    /// `P(m+1, l²)` per slot.
    pub cdf_lo_raw: Vec<f64>,
    /// `1/(P(m+1, u²) − P(m+1, l²))` per slot.
    pub inv_span: Vec<f64>,
    /// `1/P(m+1, R²)` per slot.
    pub inv_base: Vec<f64>,
    /// `g̃_j²(r) = t_{m_j}(r²) · g2_coef[j]`: `1/(π P(m+1,R²))`, divided by
    /// the ring mass `μ_j` in ring mode.
    pub g2_coef: Vec<f64>,
    /// `ln k!` up to `⌈R²⌉ + 1`, enough to seed any Poisson window.
    pub ln_factorial: Vec<f64>,
}

impl SlotContext {
    pub fn build(basis: &RingBasis, active: &[usize], mode: SamplerMode) -> Result<Self> {
        let spectrum = basis.spectrum();
        let radius = spectrum.radius();
        let k = active.len();
        let mut globals = Vec::with_capacity(k);
        let mut ring_lo = Vec::with_capacity(k);
        let mut ring_hi = Vec::with_capacity(k);
        let mut cdf_lo_raw = Vec::with_capacity(k);
        let mut inv_span = Vec::with_capacity(k);
        let mut inv_base = Vec::with_capacity(k);
        let mut g2_coef = Vec::with_capacity(k);
        for (pos, &slot) in active.iter().enumerate() {
            if slot >= spectrum.truncation() {
                return Err(Error::InvalidConfig(format!(
                    "active slot {slot} outside truncation {}",
                    spectrum.truncation()
                )));
            }
            if pos > 0 && active[pos - 1] >= slot {
                return Err(Error::InvalidConfig(
                    "active slots must be strictly increasing".into(),
                ));
            }
            let base = spectrum.base_eigenvalue(slot);
            if base <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "active slot {slot} has an underflowed disc mass"
                )));
            }
            let m = spectrum.global_index(slot);
            globals.push(m as u32);
            ring_lo.push(basis.lower(slot));
            ring_hi.push(basis.upper(slot));
            cdf_lo_raw.push(basis.cdf_lower_raw(slot));
            let span = basis.cdf_span_raw(slot);
            if mode == SamplerMode::Ring && span <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "active slot {slot} has an empty ring CDF span"
                )));
            }
            inv_span.push(if span > 0.0 { 1.0 / span } else { 0.0 });
            inv_base.push(1.0 / base);
            let coef = match mode {
                SamplerMode::Exact => 1.0 / (PI * base),
                SamplerMode::Ring => 1.0 / (PI * base * basis.mass(slot)),
            };
            g2_coef.push(coef);
        }
        let ln_factorial = ln_factorial_table(radius.mul_add(radius, 2.0).ceil() as usize);
        Ok(SlotContext {
            mode,
            radius,
            globals,
            ring_lo,
            ring_hi,
            cdf_lo_raw,
            inv_span,
            inv_base,
            g2_coef,
            ln_factorial,
        })
    }

    pub fn len(&self) -> usize {
        self.globals.len()
    }

    /// Slots whose ring has been fully swept at radius `r` (`u_j ≤ r`);
    /// a prefix of the slot order because the edges are nondecreasing.
    fn completed_below(&self, r: f64) -> usize {
        self.ring_hi.partition_point(|&h| h <= r)
    }

    /// Slots whose ring has started before radius `r` (`l_j < r`).
    fn started_below(&self, r: f64) -> usize {
        self.ring_lo.partition_point(|&l| l < r)
    }
}

/// Inverts a nondecreasing CDF-like objective on `[lo, hi]` by bisection.
///
/// Returns `(x, residual)` with `residual = |f(x) − target| ≤ value_tol`.
/// If the interval collapses first the objective effectively jumps across
/// the target, which no continuous mixture CDF here can do, so that case is
/// reported as a convergence failure rather than papered over.
pub(crate) fn invert_cdf(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    value_tol: f64,
    what: &'static str,
    mut f: impl FnMut(f64) -> f64,
) -> Result<(f64, f64)> {
    debug_assert!((0.0..=1.0).contains(&target));
    let interval_tol = INTERVAL_TOL_REL * (hi - lo);
    let mut best = (0.5 * (lo + hi), f64::INFINITY);
    let mut steps = 0;
    while hi - lo > interval_tol && steps < MAX_BISECT_STEPS {
        steps += 1;
        let mid = 0.5 * (lo + hi);
        let value = f(mid);
        let residual = (value - target).abs();
        if residual < best.1 {
            best = (mid, residual);
        }
        if residual <= value_tol {
            return Ok((mid, residual));
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.1 <= value_tol {
        Ok(best)
    } else {
        Err(Error::Convergence {
            what,
            iterations: steps,
        })
    }
}

/// The radial stage: mixture CDF evaluation and inversion.
pub(crate) struct RadialSystem<'a> {
    ctx: &'a SlotContext,
    u: &'a [f64],
    /// `prefix[j] = Σ_{t < j} u[t]`; length `k + 1`. Only read in ring mode.
    prefix: &'a [f64],
    sum_u: f64,
}

impl<'a> RadialSystem<'a> {
    pub fn new(ctx: &'a SlotContext, u: &'a [f64], prefix: &'a [f64]) -> Result<Self> {
        debug_assert_eq!(prefix.len(), u.len() + 1);
        let sum_u = prefix[u.len()];
        if !(sum_u > 0.0) {
            return Err(Error::Degenerate(format!(
                "remaining mixture mass {sum_u} is not positive"
            )));
        }
        Ok(RadialSystem { ctx, u, prefix, sum_u })
    }

    /// Normalized mixture CDF `S(r)/Σ U` at radius `r`, rebuilding `window`
    /// at `x = r²`.
    pub fn mixture_cdf(&self, r: f64, window: &mut PoissonWindow) -> f64 {
        let ctx = self.ctx;
        window.rebuild(r * r, &ctx.ln_factorial);
        let mut sum = 0.0;
        match ctx.mode {
            SamplerMode::Exact => {
                for j in 0..ctx.len() {
                    let w = self.u[j];
                    if w == 0.0 {
                        continue;
                    }
                    let f = (window.survival(ctx.globals[j] as i64) * ctx.inv_base[j])
                        .clamp(0.0, 1.0);
                    sum += w * f;
                }
            }
            SamplerMode::Ring => {
                let done = ctx.completed_below(r);
                let started = ctx.started_below(r);
                sum = self.prefix[done];
                for j in done..started {
                    let w = self.u[j];
                    if w == 0.0 {
                        continue;
                    }
                    let raw = window.survival(ctx.globals[j] as i64) - ctx.cdf_lo_raw[j];
                    sum += w * (raw * ctx.inv_span[j]).clamp(0.0, 1.0);
                }
            }
        }
        sum / self.sum_u
    }

    /// Draws the radius for CDF level `target`, to `|S/ΣU − target| ≤ tol`.
    pub fn draw_radius(
        &self,
        target: f64,
        tol: f64,
        window: &mut PoissonWindow,
    ) -> Result<(f64, f64)> {
        invert_cdf(0.0, self.ctx.radius, target, tol, "radial CDF inversion", |r| {
            self.mixture_cdf(r, window)
        })
    }
}

/// The angular stage at a fixed radius: grouped trigonometric CDF.
pub(crate) struct AngularSystem {
    /// Active slots alive at radius `r`: (slot position, global index, g̃).
    items: Vec<(u32, u32, f64)>,
    /// `Σ U_j g̃_j²` over live slots; `Q(2π) = 2π r A₀`.
    a0: f64,
    /// `(d, 2 Re C_d / d, −2 Im C_d / d)`, strictly increasing in `d`.
    terms: Vec<(u32, f64, f64)>,
}

impl AngularSystem {
    /// Builds the grouped coefficients at radius `r` from the residual
    /// matrix `w_upper` (strict upper triangle of `W`, row-major `k × k`)
    /// and the diagonal `u`.
    pub fn build(
        ctx: &SlotContext,
        u: &[f64],
        w_upper: &[Complex64],
        r: f64,
        window: &mut PoissonWindow,
    ) -> Result<Self> {
        let k = ctx.len();
        let x = r * r;
        window.rebuild(x, &ctx.ln_factorial);
        let range = match ctx.mode {
            SamplerMode::Ring => ctx.completed_below(r)..ctx.started_below(r),
            SamplerMode::Exact => {
                let lo = ctx.globals.partition_point(|&m| (m as i64) < window.lo());
                let hi = ctx.globals.partition_point(|&m| (m as i64) <= window.hi());
                lo..hi
            }
        };
        let mut items = Vec::with_capacity(range.len());
        let mut a0 = 0.0;
        for j in range {
            let g2 = window.mass(ctx.globals[j] as i64) * ctx.g2_coef[j];
            if g2 > 0.0 {
                a0 += u[j] * g2;
                items.push((j as u32, ctx.globals[j], g2.sqrt()));
            }
        }
        if !(a0 > 0.0) {
            return Err(Error::Degenerate(format!(
                "angular mass {a0} at radius {r} is not positive"
            )));
        }
        let d_max = match (items.first(), items.last()) {
            (Some(first), Some(last)) => last.1 - first.1,
            _ => 0,
        };
        let mut coeffs = vec![Complex64::ZERO; d_max as usize + 1];
        for (a, &(ja, ma, ga)) in items.iter().enumerate() {
            let row = ja as usize * k;
            for &(jb, mb, gb) in &items[a + 1..] {
                let w = w_upper[row + jb as usize];
                if w != Complex64::ZERO {
                    coeffs[(mb - ma) as usize] += w * (ga * gb);
                }
            }
        }
        let mut terms = Vec::new();
        for (d, c) in coeffs.iter().enumerate().skip(1) {
            if *c != Complex64::ZERO {
                let d_f = d as f64;
                terms.push((d as u32, 2.0 * c.re / d_f, -2.0 * c.im / d_f));
            }
        }
        Ok(AngularSystem { items, a0, terms })
    }

    /// Normalized angular CDF `Q(α)/Q(2π)` for `α ∈ [0, 2π]`.
    pub fn cdf(&self, alpha: f64) -> f64 {
        let mut acc = self.a0 * alpha;
        if !self.terms.is_empty() {
            let (s1, c1) = alpha.sin_cos();
            // (s, c) = (sin dα, cos dα), advanced by angle addition.
            let (mut s, mut c) = (s1, c1);
            let mut d_cur = 1u32;
            for &(d, sin_coef, omc_coef) in &self.terms {
                while d_cur < d {
                    (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
                    d_cur += 1;
                }
                acc += sin_coef * s + omc_coef * (1.0 - c);
            }
        }
        (acc / (self.a0 * TAU)).clamp(0.0, 1.0)
    }

    /// Draws the angle for CDF level `target`, to `|Q/Q(2π) − target| ≤ tol`.
    pub fn draw_angle(&self, target: f64, tol: f64) -> Result<(f64, f64)> {
        invert_cdf(0.0, TAU, target, tol, "angular CDF inversion", |a| self.cdf(a))
    }

    /// The eigenfunction coordinate vector at `r e^{iα}`, sparse over the
    /// slots alive at this radius.
    pub fn eigenvector_at(&self, alpha: f64) -> SparseVec {
        let mut out = SparseVec::default();
        out.pos.reserve(self.items.len());
        out.val.reserve(self.items.len());
        for &(j, m, g) in &self.items {
            out.pos.push(j);
            out.val.push(Complex64::from_polar(g, m as f64 * alpha));
        }
        out
    }

    /// Number of slots alive at this radius.
    pub fn support(&self) -> usize {
        self.items.len()
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{GinibreSpectrum, SpectrumParams};

    fn basis(radius: f64, margin: f64) -> RingBasis {
        let spectrum =
            GinibreSpectrum::build(SpectrumParams::new(radius).with_margin(margin)).unwrap();
        RingBasis::build(spectrum).unwrap()
    }

    #[test]
    fn bisection_inverts_smooth_cdf() {
        let (x, res) = invert_cdf(0.0, 1.0, 0.37, 1e-12, "test", |t| t * t).unwrap();
        assert!((x - 0.37f64.sqrt()).abs() < 1e-6);
        assert!(res <= 1e-12);
    }

    #[test]
    fn bisection_reports_jump() {
        let err = invert_cdf(0.0, 1.0, 0.5, 1e-10, "test", |t| {
            if t < 0.6 {
                0.2
            } else {
                0.9
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn mixture_cdf_matches_direct_evaluation() {
        let b = basis(4.0, 3.0);
        let k = b.spectrum().truncation();
        let active: Vec<usize> = (0..k).collect();
        let u = vec![1.0; k];
        let mut prefix = vec![0.0; k + 1];
        for j in 0..k {
            prefix[j + 1] = prefix[j] + u[j];
        }
        let mut window = PoissonWindow::default();
        for mode in [SamplerMode::Exact, SamplerMode::Ring] {
            let ctx = SlotContext::build(&b, &active, mode).unwrap();
            let sys = RadialSystem::new(&ctx, &u, &prefix).unwrap();
            for i in 1..20 {
                let r = 4.0 * i as f64 / 20.0;
                let got = sys.mixture_cdf(r, &mut window);
                let want: f64 = active
                    .iter()
                    .map(|&slot| match mode {
                        SamplerMode::Exact => b.spectrum().radial_cdf(slot, r).unwrap(),
                        SamplerMode::Ring => b.radial_cdf(slot, r).unwrap(),
                    })
                    .sum::<f64>()
                    / k as f64;
                assert!(
                    (got - want).abs() < 1e-11,
                    "{mode:?} r = {r}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn radial_draw_hits_target_level() {
        let b = basis(5.0, 3.0);
        let k = b.spectrum().truncation();
        let active: Vec<usize> = (0..k).collect();
        let mut u = vec![1.0; k];
        // Uneven weights to exercise the prefix path.
        for (j, w) in u.iter_mut().enumerate() {
            *w = 1.0 / (1.0 + j as f64 * 0.2);
        }
        let mut prefix = vec![0.0; k + 1];
        for j in 0..k {
            prefix[j + 1] = prefix[j] + u[j];
        }
        let mut window = PoissonWindow::default();
        for mode in [SamplerMode::Exact, SamplerMode::Ring] {
            let ctx = SlotContext::build(&b, &active, mode).unwrap();
            let sys = RadialSystem::new(&ctx, &u, &prefix).unwrap();
            for target in [1e-6, 0.111, 0.5, 0.93, 1.0 - 1e-9] {
                let (r, res) = sys.draw_radius(target, 1e-9, &mut window).unwrap();
                assert!(res <= 1e-9);
                assert!((0.0..=5.0).contains(&r));
                let back = sys.mixture_cdf(r, &mut window);
                assert!((back - target).abs() <= 1e-9, "{mode:?}: {back} vs {target}");
            }
        }
    }

    #[test]
    fn angular_cdf_is_monotone_and_normalized() {
        let b = basis(3.0, 3.0);
        let k = b.spectrum().truncation();
        let active: Vec<usize> = (0..k).collect();
        let u = vec![1.0; k];
        let w_upper = vec![Complex64::ZERO; k * k];
        let ctx = SlotContext::build(&b, &active, SamplerMode::Exact).unwrap();
        let mut window = PoissonWindow::default();
        let sys = AngularSystem::build(&ctx, &u, &w_upper, 1.7, &mut window).unwrap();
        // W = identity: the angular law is uniform.
        for i in 0..=16 {
            let alpha = TAU * i as f64 / 16.0;
            assert!((sys.cdf(alpha) - alpha / TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn angular_draw_inverts_nonuniform_law() {
        let b = basis(3.0, 3.0);
        let k = b.spectrum().truncation();
        let active: Vec<usize> = (0..k).collect();
        let u = vec![1.0; k];
        // A non-trivial Hermitian residual: knock out a mixed direction.
        let mut w_upper = vec![Complex64::ZERO; k * k];
        w_upper[1] = Complex64::new(-0.31, 0.17); // W[0,1]
        w_upper[k + 2] = Complex64::new(0.05, -0.23); // W[1,2]
        let ctx = SlotContext::build(&b, &active, SamplerMode::Exact).unwrap();
        let mut window = PoissonWindow::default();
        let sys = AngularSystem::build(&ctx, &u, &w_upper, 1.3, &mut window).unwrap();
        let mut last = 0.0;
        for i in 0..=64 {
            let alpha = TAU * i as f64 / 64.0;
            let c = sys.cdf(alpha);
            assert!(c + 1e-12 >= last, "CDF decreased at α = {alpha}");
            last = c;
        }
        for target in [0.03, 0.42, 0.88] {
            let (alpha, res) = sys.draw_angle(target, 1e-9).unwrap();
            assert!(res <= 1e-9);
            assert!((sys.cdf(alpha) - target).abs() <= 1e-9);
        }
    }

    #[test]
    fn ring_band_is_narrow_deep_in_spectrum() {
        let b = basis(20.0, 3.0);
        let k = b.spectrum().truncation();
        let active: Vec<usize> = (0..k).collect();
        let ctx = SlotContext::build(&b, &active, SamplerMode::Ring).unwrap();
        let r = 14.0;
        let done = ctx.completed_below(r);
        let started = ctx.started_below(r);
        // Slots straddling r have √m ∈ (r − c, r + c): about 4rc + c² slots.
        let width = started - done;
        assert!(width >= 100 && width <= 180, "band width {width}");
        for j in done..started {
            assert!(ctx.ring_lo[j] < r && r < ctx.ring_hi[j]);
        }
        assert!(ctx.ring_hi[done.saturating_sub(1)] <= r || done == 0);
    }
}
