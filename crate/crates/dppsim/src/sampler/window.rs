//! Windowed Poisson mass tables for batch radial-CDF evaluation.
//!
//! Every radial quantity the sampler needs at a trial radius `r` reduces to
//! Poisson masses at `x = r²`: the exact per-slot CDF is the Poisson
//! survival `P(m+1, x) = P(Pois(x) ≥ m+1)` divided by its value at the disc
//! edge, and the squared eigenfunction magnitude is `t_m(x)/(π P(m+1, R²))`
//! with `t_m(x) = x^m e^{−x}/m!`. A [`PoissonWindow`] materializes `t_m`
//! for every index within a `±O(√x)` window of the mean, seeding the
//! two-sided recurrence `t_{m+1} = t_m · x/(m+1)` at the mode with a single
//! exponential, then accumulates suffix sums from the small end so the
//! survival values carry no cancellation.
//!
//! Outside the window the masses are below 1e−300 relative to the peak;
//! queries there saturate to 0 or 1.

/// Window half-width multipliers, in units of `√x`. The lower margin only
/// has to flush the left tail below f64 noise; the upper margin additionally
/// keeps suffix sums accurate relative to the smallest eigenvalue a slot can
/// realistically activate with.
const LOWER_SIGMAS: f64 = 14.0;
const UPPER_SIGMAS: f64 = 18.0;
const PAD: i64 = 60;

/// Poisson masses `t_k(x)` and their suffix sums over an index window.
#[derive(Debug, Clone, Default)]
pub(crate) struct PoissonWindow {
    lo: i64,
    hi: i64,
    /// `t[i] = x^{lo+i} e^{−x}/(lo+i)!`.
    t: Vec<f64>,
    /// `tail[i] = Σ_{k > lo+i} t_k` within the window.
    tail: Vec<f64>,
}

impl PoissonWindow {
    /// Rebuilds the table in place for a new `x ≥ 0`, reusing allocations.
    ///
    /// `ln_factorial[k] = ln k!` must cover `k = ⌊x⌋ + 1`.
    pub fn rebuild(&mut self, x: f64, ln_factorial: &[f64]) {
        debug_assert!(x >= 0.0);
        if x == 0.0 {
            self.lo = 0;
            self.hi = 0;
            self.t.clear();
            self.t.push(1.0);
            self.tail.clear();
            self.tail.push(0.0);
            return;
        }
        let s = x.sqrt();
        let lo = ((x - LOWER_SIGMAS * s).floor() as i64 - PAD).max(0);
        let hi = (x + UPPER_SIGMAS * s).ceil() as i64 + PAD;
        let len = (hi - lo + 1) as usize;
        self.lo = lo;
        self.hi = hi;
        self.t.clear();
        self.t.resize(len, 0.0);
        self.tail.clear();
        self.tail.resize(len, 0.0);

        // Seed at the mode so the recurrence only ever scales downwards.
        let mode = (x.floor() as i64).clamp(lo, hi);
        let seed_ln = mode as f64 * x.ln() - x - ln_factorial[mode as usize];
        let seed = seed_ln.exp();
        let mode_i = (mode - lo) as usize;
        self.t[mode_i] = seed;
        let mut value = seed;
        for k in (lo..mode).rev() {
            value *= (k + 1) as f64 / x;
            self.t[(k - lo) as usize] = value;
        }
        value = seed;
        for k in mode + 1..=hi {
            value *= x / k as f64;
            self.t[(k - lo) as usize] = value;
        }

        // Suffix sums accumulated small-end first.
        let mut acc = 0.0;
        for i in (0..len).rev() {
            self.tail[i] = acc;
            acc += self.t[i];
        }
    }

    /// Poisson mass `t_m(x)`, zero outside the window.
    #[inline]
    pub fn mass(&self, m: i64) -> f64 {
        if m < self.lo || m > self.hi {
            0.0
        } else {
            self.t[(m - self.lo) as usize]
        }
    }

    /// Survival `P(Pois(x) ≥ m + 1) = P(m+1, x)`, saturating to 1 below the
    /// window and 0 above it.
    #[inline]
    pub fn survival(&self, m: i64) -> f64 {
        if m < self.lo {
            1.0
        } else if m > self.hi {
            0.0
        } else {
            self.tail[(m - self.lo) as usize]
        }
    }

    /// First index of the window.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last index of the window.
    pub fn hi(&self) -> i64 {
        self.hi
    }
}

/// `ln k!` for `k = 0..=max`, via the log-gamma function.
pub(crate) fn ln_factorial_table(max: usize) -> Vec<f64> {
    (0..=max)
        .map(|k| {
            if k < 2 {
                0.0
            } else {
                crate::specfun::ln_gamma(k as f64 + 1.0)
            }
        })
        .collect()
}
