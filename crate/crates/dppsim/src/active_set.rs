//! Bernoulli sampling of the active eigenfunction set.
//!
//! A determinantal process with a spectral kernel is sampled in two stages:
//! first each slot `n` joins the active set `I` independently with
//! probability `λ_n`, then `|I|` points are drawn from the projection kernel
//! on the active eigenfunctions. This module owns the first stage, plus the
//! quantities that depend only on it: the exact law of `|I|`, couplings of
//! two spectra through shared uniforms, and the mass lost to truncation.
//!
//! Uniform consumption is part of the contract: one uniform per slot, in
//! ascending slot order, even for slots whose eigenvalue is zero. Two
//! spectra sampled from equal `(seed, stream)` pairs therefore stay
//! positively coupled slot by slot, which is what the truncation-accuracy
//! experiments rely on.

use crate::error::Result;
use crate::kernel::GinibreSpectrum;
use crate::rng::SampleStream;

/// An active slot set together with the stream that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    slots: Vec<usize>,
    seed: u64,
    stream: u64,
}

impl ActiveSet {
    /// Active slots in ascending order.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// Number of active slots; the point count of the eventual draw.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    /// True when no slot activated.
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Seed of the stream that produced this set.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Substream index of the stream that produced this set.
    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// An active set fixed by hand rather than sampled. Slots must be
    /// strictly increasing.
    pub fn from_slots(slots: Vec<usize>, seed: u64) -> Self {
        debug_assert!(slots.windows(2).all(|w| w[0] < w[1]));
        ActiveSet { slots, seed, stream: 0 }
    }
}

/// Draws the active set, consuming exactly `spectrum.truncation()` uniforms
/// in ascending slot order.
///
/// Slot `n` activates iff its uniform falls strictly below `λ_n`; a slot
/// with `λ_n = 0` can never activate but still consumes its uniform, keeping
/// streams aligned across spectra of equal truncation.
pub fn sample_active_set(spectrum: &GinibreSpectrum, stream: &mut SampleStream) -> ActiveSet {
    let mut slots = Vec::new();
    for n in 0..spectrum.truncation() {
        let u = stream.uniform();
        if u < spectrum.eigenvalue(n) {
            slots.push(n);
        }
    }
    ActiveSet { slots, seed: stream.seed(), stream: stream.stream() }
}

/// Draws active sets for two spectra from one shared uniform sequence.
///
/// Slot `n` of both spectra is decided by the same uniform, so the chance
/// that the sets disagree at slot `n` is exactly `|λ_n − λ'_n|`, and if one
/// spectrum dominates the other slotwise, its active set contains the
/// other's. Slots past a spectrum's truncation count as eigenvalue zero.
pub fn coupled_active_sets(
    first: &GinibreSpectrum,
    second: &GinibreSpectrum,
    stream: &mut SampleStream,
) -> (ActiveSet, ActiveSet) {
    let horizon = first.truncation().max(second.truncation());
    let mut slots_first = Vec::new();
    let mut slots_second = Vec::new();
    for n in 0..horizon {
        let u = stream.uniform();
        if n < first.truncation() && u < first.eigenvalue(n) {
            slots_first.push(n);
        }
        if n < second.truncation() && u < second.eigenvalue(n) {
            slots_second.push(n);
        }
    }
    let (seed, sub) = (stream.seed(), stream.stream());
    (
        ActiveSet { slots: slots_first, seed, stream: sub },
        ActiveSet { slots: slots_second, seed, stream: sub },
    )
}

/// Exact law of the active-set cardinality `|I|`.
///
/// `|I|` is a sum of independent Bernoulli variables, so its probability
/// vector is the coefficient list of `Π_n (1 − λ_n + λ_n z)`, built here by
/// iterated convolution. The returned vector has length `N + 1`.
pub fn count_distribution(spectrum: &GinibreSpectrum) -> Vec<f64> {
    let mut coeffs = vec![1.0f64];
    for n in 0..spectrum.truncation() {
        let lambda = spectrum.eigenvalue(n);
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &q) in coeffs.iter().enumerate() {
            next[k] += q * (1.0 - lambda);
            next[k + 1] += q * lambda;
        }
        coeffs = next;
    }
    coeffs
}

/// Eigenvalue mass at and beyond a slot, split into the part held by the
/// truncated spectrum and an analytic bound on the discarded remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMass {
    /// `Σ_{n ≥ from} λ_n` over the retained slots.
    pub stored: f64,
    /// Upper bound on the eigenvalue mass beyond the truncation index.
    pub remainder_bound: f64,
}

impl TailMass {
    /// Bound on the full tail: held mass plus the analytic remainder.
    pub fn total(&self) -> f64 {
        self.stored + self.remainder_bound
    }
}

/// Eigenvalue mass from slot `from` onwards.
///
/// The remainder term bounds `Σ_{n ≥ N} λ_n` for the infinite spectrum by
/// `p · (R + c) e^{−c²} / √(2π)`, valid for every positive radius and
/// margin; the expected number of points lost to truncation is at most
/// [`TailMass::total`] of `tail_mass(spec, N)`, i.e. the remainder alone.
pub fn tail_mass(spectrum: &GinibreSpectrum, from: usize) -> Result<TailMass> {
    let stored = (from..spectrum.truncation())
        .map(|n| spectrum.eigenvalue(n))
        .sum();
    let r = spectrum.radius();
    let c = spectrum.margin();
    let remainder_bound = spectrum.params().thinning * (r + c) / (2.0 * std::f64::consts::PI).sqrt()
        * (-c * c).exp();
    Ok(TailMass { stored, remainder_bound })
}
