//! Truncated spectral decomposition of the Ginibre kernel on a disc.
//!
//! The Ginibre kernel restricted to the centered disc of radius `R` has
//! eigenfunctions `φ_m(z) = z^m e^{−|z|²/2} / √(π γ(m+1, R²))` with
//! eigenvalues `λ_m = γ(m+1, R²)/m!`, for `m = 0, 1, 2, …`. A
//! [`GinibreSpectrum`] materializes the first `N = ⌈(R+c)²⌉` of these, which
//! is enough to keep the discarded tail exponentially small in the margin
//! `c`. A [`RingBasis`] further restricts each eigenfunction to the annulus
//! where it carries all but a vanishing fraction of its mass; sampling
//! against the ring basis is what makes large simulations cheap.
//!
//! Process variants are folded into the spectrum at construction time:
//! thinning scales every eigenvalue by `p`, the Palm measure at the origin
//! shifts every index up by one, and dilation is a coordinate map applied to
//! sampler output.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun;

/// Largest active-set size accepted by [`GinibreSpectrum::joint_density`].
/// Determinant evaluation is numerically wasteful past this point and the
/// density values themselves underflow.
pub const JOINT_DENSITY_MAX: usize = 12;

/// Relative slack allowed when clamping a barely-negative determinant.
const DET_CLAMP_REL: f64 = 1e-10;

/// Truncation indices above this are refused as a resource guard.
const MAX_TRUNCATION: usize = 4_000_000;

/// Parameters selecting a restricted, possibly transformed, Ginibre process.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectrumParams {
    /// Disc radius `R > 0`.
    pub radius: f64,
    /// Truncation margin `c > 0`; indices up to `⌈(R+c)²⌉` are kept.
    pub margin: f64,
    /// Condition on a point at the origin (shifts every index up by one).
    pub palm: bool,
    /// Independent thinning probability in `(0, 1]`.
    pub thinning: f64,
    /// Dilation factor `ρ > 0`; sampler output is scaled by `√ρ`.
    pub dilation: f64,
}

impl SpectrumParams {
    /// Plain process on the disc of radius `radius` with the default margin 3.
    pub fn new(radius: f64) -> Self {
        SpectrumParams {
            radius,
            margin: 3.0,
            palm: false,
            thinning: 1.0,
            dilation: 1.0,
        }
    }

    /// Same process with a different truncation margin.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = self.radius.is_finite()
            && self.radius > 0.0
            && self.margin.is_finite()
            && self.margin > 0.0
            && self.thinning > 0.0
            && self.thinning <= 1.0
            && self.dilation.is_finite()
            && self.dilation > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "spectrum parameters out of range: radius = {}, margin = {}, thinning = {}, dilation = {}",
                self.radius, self.margin, self.thinning, self.dilation
            )))
        }
    }
}

/// The first `N = ⌈(R+c)²⌉` eigenvalue/eigenfunction pairs of the restricted
/// kernel, with variant transformations applied.
///
/// Slot `n` of the spectrum refers to global eigenfunction index
/// `m = n + offset`, where the offset is 1 for the Palm variant and 0
/// otherwise.
#[derive(Debug, Clone)]
pub struct GinibreSpectrum {
    params: SpectrumParams,
    truncation: usize,
    index_offset: usize,
    /// `P(m+1, R²)` per slot: the eigenvalue before thinning.
    base: Vec<f64>,
    /// `thinning · base` per slot: the Bernoulli inclusion probability.
    eigenvalues: Vec<f64>,
    /// `ln γ(m+1, R²)` per slot: the eigenfunction normalizer.
    ln_lower_gamma: Vec<f64>,
}

impl GinibreSpectrum {
    /// Builds the truncated spectrum for the given parameters.
    ///
    /// # Examples
    ///
    /// ```
    /// use dppsim::kernel::{GinibreSpectrum, SpectrumParams};
    /// let spec = GinibreSpectrum::build(SpectrumParams::new(1.0).with_margin(1.0)).unwrap();
    /// assert_eq!(spec.truncation(), 4);
    /// // λ_0 = γ(1, 1)/0! = 1 − e^{−1}
    /// assert!((spec.eigenvalue(0) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    /// ```
    pub fn build(params: SpectrumParams) -> Result<Self> {
        params.validate()?;
        let span = params.radius + params.margin;
        let truncation = (span * span).ceil() as usize;
        if truncation > MAX_TRUNCATION {
            return Err(Error::InvalidConfig(format!(
                "truncation index {truncation} exceeds the supported maximum {MAX_TRUNCATION}"
            )));
        }
        let index_offset = usize::from(params.palm);
        let r2 = params.radius * params.radius;
        let mut base = Vec::with_capacity(truncation);
        let mut eigenvalues = Vec::with_capacity(truncation);
        let mut ln_lower_gamma = Vec::with_capacity(truncation);
        for slot in 0..truncation {
            let shape = (slot + index_offset) as f64 + 1.0;
            let p = specfun::lower_regularized_gamma(shape, r2)?;
            base.push(p);
            eigenvalues.push(params.thinning * p);
            // Slots so deep in the tail that P underflows can never activate;
            // their normalizer is recorded as −∞ and their eigenfunction as 0.
            ln_lower_gamma.push(if p > 0.0 {
                p.ln() + specfun::ln_gamma(shape)
            } else {
                f64::NEG_INFINITY
            });
        }
        Ok(GinibreSpectrum {
            params,
            truncation,
            index_offset,
            base,
            eigenvalues,
            ln_lower_gamma,
        })
    }

    /// Parameters this spectrum was built from.
    pub fn params(&self) -> &SpectrumParams {
        &self.params
    }

    /// Disc radius `R`.
    pub fn radius(&self) -> f64 {
        self.params.radius
    }

    /// Truncation margin `c`.
    pub fn margin(&self) -> f64 {
        self.params.margin
    }

    /// Number of retained slots `N = ⌈(R+c)²⌉`.
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Global eigenfunction index of a slot (equal to the slot except for the
    /// Palm variant, which shifts by one).
    pub fn global_index(&self, slot: usize) -> usize {
        slot + self.index_offset
    }

    /// Bernoulli inclusion probability of a slot, thinning included.
    pub fn eigenvalue(&self, slot: usize) -> f64 {
        self.eigenvalues[slot]
    }

    /// All inclusion probabilities, in slot order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalue before thinning, `P(m+1, R²)`.
    pub fn base_eigenvalue(&self, slot: usize) -> f64 {
        self.base[slot]
    }


    /// Sum of all retained inclusion probabilities (the expected cardinality
    /// up to the truncated tail).
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Evaluates the slot's eigenfunction at a point of the disc.
    ///
    /// The magnitude is assembled in the log domain, so slots far above
    /// `|z|²` underflow to zero instead of overflowing intermediates. Points
    /// outside the closed disc evaluate to zero because the restricted
    /// kernel does not see them.
    pub fn eval_eigenfunction(&self, slot: usize, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r > self.params.radius {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.global_index(slot);
        let ln_norm = self.ln_lower_gamma[slot];
        if ln_norm == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        let ln_mag =
            specfun::log_radial_weight(m, r) - 0.5 * (std::f64::consts::PI.ln() + ln_norm);
        let mag = ln_mag.exp();
        if mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(mag, m as f64 * z.arg())
    }

    /// Exact radial CDF of a slot: `F_n(r) = γ(m+1, r²)/γ(m+1, R²)`.
    ///
    /// This is the law of the modulus of a point drawn from `|φ_m|²`.
    ///
    /// # Examples
    ///
    /// ```
    /// use dppsim::kernel::{GinibreSpectrum, SpectrumParams};
    /// let spec = GinibreSpectrum::build(SpectrumParams::new(3.0)).unwrap();
    /// let expected = (1.0 - (-1.0f64).exp()) / (1.0 - (-9.0f64).exp());
    /// assert!((spec.radial_cdf(0, 1.0).unwrap() - expected).abs() < 1e-14);
    /// ```
    pub fn radial_cdf(&self, slot: usize, r: f64) -> Result<f64> {
        if !(0.0..=self.params.radius).contains(&r) {
            return Err(Error::Domain(format!(
                "radial CDF evaluated at r = {r} outside [0, {}]",
                self.params.radius
            )));
        }
        let shape = self.global_index(slot) as f64 + 1.0;
        let num = specfun::lower_regularized_gamma(shape, r * r)?;
        let den = self.base[slot];
        if den <= 0.0 {
            return Err(Error::Degenerate(format!(
                "slot {slot} has an underflowed normalizer; its radial law is not representable"
            )));
        }
        Ok((num / den).min(1.0))
    }

    /// Intensity `K(x, x)` of the process at radius `r` from the center, in
    /// base (undilated) coordinates.
    ///
    /// Each term collapses to a Poisson point mass:
    /// `λ_m |φ_m|²(r) = (p/π) · (r²)^m e^{−r²}/m!`, so in the bulk the sum is
    /// within the truncated tail of `p/π`.
    pub fn intensity(&self, r: f64) -> f64 {
        let x = r * r;
        let mut sum = 0.0;
        for slot in 0..self.truncation {
            let m = self.global_index(slot);
            let ln_term = if m == 0 {
                -x
            } else if x == 0.0 {
                f64::NEG_INFINITY
            } else {
                m as f64 * x.ln() - x - specfun::ln_gamma(m as f64 + 1.0)
            };
            sum += ln_term.exp();
        }
        self.params.thinning * sum / std::f64::consts::PI
    }

    /// Projection-kernel value `Σ_{n ∈ I} φ_n(x) conj(φ_n(y))` for an active
    /// slot set `I`.
    pub fn kernel_value(&self, active: &[usize], x: Complex64, y: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for &slot in active {
            sum += self.eval_eigenfunction(slot, x) * self.eval_eigenfunction(slot, y).conj();
        }
        sum
    }

    /// Joint density `det(K_I(x_i, x_j))/|I|!` of a full draw given the
    /// active set `I`.
    ///
    /// Intended as a low-dimensional oracle: `|I|` is capped at
    /// [`JOINT_DENSITY_MAX`]. The Gram determinant is mathematically
    /// nonnegative; tiny negative values from finite-precision elimination
    /// (within `1e−10` relative to the largest partial product) are clamped
    /// to zero, anything worse is reported as degenerate.
    pub fn joint_density(&self, active: &[usize], points: &[Complex64]) -> Result<f64> {
        if active.len() > JOINT_DENSITY_MAX {
            return Err(Error::TooLarge {
                what: "joint_density active set",
                limit: JOINT_DENSITY_MAX,
                got: active.len(),
            });
        }
        if points.len() != active.len() {
            return Err(Error::SizeMismatch {
                left: active.len(),
                right: points.len(),
            });
        }
        let k = points.len();
        if k == 0 {
            return Ok(1.0);
        }
        let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
        for i in 0..k {
            for j in 0..k {
                gram[i * k + j] = self.kernel_value(active, points[i], points[j]);
            }
        }
        let (det, scale) = complex_det(gram, k);
        let value = det.re;
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        if value >= 0.0 {
            return Ok(value / factorial);
        }
        if value >= -DET_CLAMP_REL * scale.max(f64::MIN_POSITIVE) {
            return Ok(0.0);
        }
        Err(Error::Degenerate(format!(
            "joint density determinant is negative beyond tolerance: {value:e}"
        )))
    }
}

/// Determinant of a `k × k` complex matrix in row-major order, by LU with
/// partial pivoting. Also returns the largest intermediate magnitude of the
/// running product, which calibrates the clamping tolerance.
fn complex_det(mut m: Vec<Complex64>, k: usize) -> (Complex64, f64) {
    let mut det = Complex64::new(1.0, 0.0);
    let mut scale = 0.0f64;
    for col in 0..k {
        let mut pivot = col;
        let mut best = m[col * k + col].norm_sqr();
        for row in col + 1..k {
            let mag = m[row * k + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return (Complex64::new(0.0, 0.0), scale);
        }
        if pivot != col {
            for j in 0..k {
                m.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        let diag = m[col * k + col];
        det *= diag;
        scale = scale.max(det.norm());
        for row in col + 1..k {
            let factor = m[row * k + col] / diag;
            for j in col..k {
                let sub = factor * m[col * k + j];
                m[row * k + j] -= sub;
            }
        }
    }
    (det, scale)
}

/// Annular restriction of the spectrum: slot `n` (global index `m`) is
/// supported on the ring `l_m ≤ r ≤ u_m` with `l_m = max(0, min(√m, R) − c)`
/// and `u_m = min(R, √m + c)`, which carries all but `1 − μ_m` of its mass.
#[derive(Debug, Clone)]
pub struct RingBasis {
    spectrum: GinibreSpectrum,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Ring mass `μ_m = (γ(m+1, u²) − γ(m+1, l²))/γ(m+1, R²)` per slot.
    mass: Vec<f64>,
    /// `1 − μ_m` accumulated from tail pieces directly, so it stays accurate
    /// when `μ_m` is within rounding of 1.
    complement: Vec<f64>,
    /// `P(m+1, l²)` per slot: exact CDF value at the inner edge.
    cdf_lower_raw: Vec<f64>,
    /// `P(m+1, u²) − P(m+1, l²)` per slot: unnormalized ring CDF span.
    cdf_span_raw: Vec<f64>,
}

impl RingBasis {
    /// Restricts each retained eigenfunction to its concentration ring.
    pub fn build(spectrum: GinibreSpectrum) -> Result<Self> {
        let radius = spectrum.radius();
        let margin = spectrum.margin();
        let r2 = radius * radius;
        let n = spectrum.truncation();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut mass = Vec::with_capacity(n);
        let mut complement = Vec::with_capacity(n);
        let mut cdf_lower_raw = Vec::with_capacity(n);
        let mut cdf_span_raw = Vec::with_capacity(n);
        for slot in 0..n {
            let m = spectrum.global_index(slot) as f64;
            let center = m.sqrt().min(radius);
            let l = (center - margin).max(0.0);
            let u = (m.sqrt() + margin).min(radius);
            let shape = m + 1.0;
            let at_lower = specfun::regularized_gamma_pair(shape, l * l)?;
            let at_upper = specfun::regularized_gamma_pair(shape, u * u)?;
            let at_edge = specfun::regularized_gamma_pair(shape, r2)?;
            let denom = at_edge.p;
            if denom <= 0.0 {
                // Tail slots whose full-disc mass underflows keep a unit-mass
                // placeholder ring; they can never activate.
                lower.push(l);
                upper.push(u);
                mass.push(1.0);
                complement.push(0.0);
                cdf_lower_raw.push(0.0);
                cdf_span_raw.push(1.0);
                continue;
            }
            let span = (at_upper.p - at_lower.p).max(0.0);
            // Mass missing from the ring: the inner disc plus the outer
            // shell, each taken from the branch computed directly.
            let missing = (at_lower.p + (at_upper.q - at_edge.q).max(0.0)) / denom;
            lower.push(l);
            upper.push(u);
            mass.push((span / denom).min(1.0));
            complement.push(missing.min(1.0));
            cdf_lower_raw.push(at_lower.p);
            cdf_span_raw.push(span);
        }
        Ok(RingBasis {
            spectrum,
            lower,
            upper,
            mass,
            complement,
            cdf_lower_raw,
            cdf_span_raw,
        })
    }

    /// The spectrum the rings were derived from.
    pub fn spectrum(&self) -> &GinibreSpectrum {
        &self.spectrum
    }

    /// Inner ring edge of a slot.
    pub fn lower(&self, slot: usize) -> f64 {
        self.lower[slot]
    }

    /// Outer ring edge of a slot.
    pub fn upper(&self, slot: usize) -> f64 {
        self.upper[slot]
    }

    /// Ring mass `μ_m` of a slot.
    pub fn mass(&self, slot: usize) -> f64 {
        self.mass[slot]
    }

    /// `1 − μ_m`, computed without cancellation.
    pub fn mass_complement(&self, slot: usize) -> f64 {
        self.complement[slot]
    }

    /// `P(m+1, l²)` for a slot.
    pub(crate) fn cdf_lower_raw(&self, slot: usize) -> f64 {
        self.cdf_lower_raw[slot]
    }

    /// `P(m+1, u²) − P(m+1, l²)` for a slot.
    pub(crate) fn cdf_span_raw(&self, slot: usize) -> f64 {
        self.cdf_span_raw[slot]
    }

    /// Ring-restricted radial CDF: 0 below the ring, 1 above it, and the
    /// renormalized exact CDF in between.
    pub fn radial_cdf(&self, slot: usize, r: f64) -> Result<f64> {
        if !(0.0..=self.spectrum.radius()).contains(&r) {
            return Err(Error::Domain(format!(
                "radial CDF evaluated at r = {r} outside [0, {}]",
                self.spectrum.radius()
            )));
        }
        if r <= self.lower[slot] {
            return Ok(0.0);
        }
        if r >= self.upper[slot] {
            return Ok(1.0);
        }
        let span = self.cdf_span_raw[slot];
        if span <= 0.0 {
            return Err(Error::Degenerate(format!(
                "slot {slot} has an empty ring CDF span"
            )));
        }
        let shape = self.spectrum.global_index(slot) as f64 + 1.0;
        let num = specfun::lower_regularized_gamma(shape, r * r)? - self.cdf_lower_raw[slot];
        Ok((num / span).clamp(0.0, 1.0))
    }

    /// Ring-restricted eigenfunction: `φ_m/√μ_m` inside the ring, zero
    /// outside it.
    pub fn eval_eigenfunction(&self, slot: usize, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r < self.lower[slot] || r > self.upper[slot] {
            return Complex64::new(0.0, 0.0);
        }
        self.spectrum.eval_eigenfunction(slot, z) / self.mass[slot].sqrt()
    }

    /// Projection-kernel value of the ring-restricted basis.
    pub fn kernel_value(&self, active: &[usize], x: Complex64, y: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for &slot in active {
            sum += self.eval_eigenfunction(slot, x) * self.eval_eigenfunction(slot, y).conj();
        }
        sum
    }
}
