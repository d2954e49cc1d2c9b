//! Sequential samplers for the restricted Ginibre point process.
//!
//! Given an active index set `I` (drawn upstream from the eigenvalue
//! Bernoullis), the conditional law of the points is the projection process
//! onto the corresponding eigenfunctions. [`sample_projection_dpp`] draws
//! those `|I|` points by exact chain-rule inversion: each point's radius and
//! angle are obtained by bisecting one-dimensional CDFs that are available
//! in closed form thanks to the radial symmetry of the basis, after which
//! the drawn direction is removed from the residual projection via a
//! Gram-Schmidt frame update.
//!
//! Two evaluation modes share this machinery. `Exact` uses the full
//! eigenfunctions on the disc; `Ring` restricts each eigenfunction to its
//! concentration annulus and renormalizes, which keeps every per-point
//! system banded and is the source of the speedup. [`sample_rejection`] is
//! an independently coded rejection sampler for the same conditional law,
//! kept deliberately simple so the fast path can be validated against it.

mod frame;
mod rejection;
mod systems;
mod window;

use std::time::Instant;

use num_complex::Complex64;

pub use frame::ProjectionFrame;
pub use rejection::{sample_rejection, RejectionStats};

use crate::active_set::{sample_active_set, ActiveSet};
use crate::error::{Error, Result};
use crate::kernel::{GinibreSpectrum, RingBasis, SpectrumParams};
use crate::rng::SampleStream;
use crate::sampler::frame::SparseVec;
use crate::sampler::systems::{AngularSystem, RadialSystem, SlotContext};
use crate::sampler::window::PoissonWindow;

/// Largest active set the sequential sampler accepts; the residual matrix
/// is dense, so memory grows with the square of this.
pub const MAX_ACTIVE: usize = 2048;

/// Magnitude below which entries of a normalized ring-mode frame vector are
/// dropped. Exact mode keeps every nonzero entry.
const FRAME_DROP_TOL: f64 = 1e-12;

/// How far below zero a residual diagonal entry may drift before the run is
/// declared numerically broken rather than clamped.
const DIAGONAL_NEGATIVE_TOL: f64 = 1e-8;

/// Evaluation mode of the eigenfunction basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerMode {
    /// Full eigenfunctions on the disc.
    Exact,
    /// Ring-restricted, renormalized eigenfunctions.
    Ring,
}

impl SamplerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerMode::Exact => "exact",
            SamplerMode::Ring => "ring",
        }
    }
}

impl std::str::FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SamplerMode::Exact),
            "ring" => Ok(SamplerMode::Ring),
            other => Err(Error::Parse(format!(
                "unknown sampler mode {other:?} (expected \"exact\" or \"ring\")"
            ))),
        }
    }
}

/// Knobs of the sequential sampler.
#[derive(Debug, Clone)]
pub struct SamplerOptions {
    pub mode: SamplerMode,
    /// Accepted deviation of each inverted CDF level from its target.
    pub cdf_tolerance: f64,
    /// Record per-point step costs (for scaling studies).
    pub collect_costs: bool,
    /// Return the orthonormal frame with the draw.
    pub keep_frame: bool,
}

impl SamplerOptions {
    pub fn new(mode: SamplerMode) -> Self {
        SamplerOptions {
            mode,
            cdf_tolerance: 1e-9,
            collect_costs: false,
            keep_frame: false,
        }
    }

    pub fn exact() -> Self {
        Self::new(SamplerMode::Exact)
    }

    pub fn ring() -> Self {
        Self::new(SamplerMode::Ring)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cdf_tolerance > 0.0 && self.cdf_tolerance <= 1e-3) {
            return Err(Error::InvalidConfig(format!(
                "cdf_tolerance must lie in (0, 1e-3], got {}",
                self.cdf_tolerance
            )));
        }
        Ok(())
    }
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self::exact()
    }
}

/// Wall-clock cost split of one drawn point.
#[derive(Debug, Clone, Copy)]
pub struct PointCost {
    /// Radius and angle inversion (CDF solves).
    pub solve_nanos: u64,
    /// Eigenvector evaluation and Gram-Schmidt orthogonalization.
    pub frame_nanos: u64,
    /// Residual matrix and diagonal update.
    pub update_nanos: u64,
    /// Number of basis slots alive at the drawn radius.
    pub support: u32,
}

/// Accuracy and cost bookkeeping of one projection draw.
#[derive(Debug, Clone, Default)]
pub struct DrawDiagnostics {
    /// Largest `|S(r)/ΣU − target|` over all radius inversions.
    pub max_radial_residual: f64,
    /// Largest `|Q(α)/Q(2π) − target|` over all angle inversions.
    pub max_angular_residual: f64,
    /// Per-point costs, if requested.
    pub costs: Option<Vec<PointCost>>,
}

/// Result of drawing the conditional point configuration for one active set.
#[derive(Debug, Clone)]
pub struct ProjectionDraw {
    /// The points, in draw order.
    pub points: Vec<Complex64>,
    pub diagnostics: DrawDiagnostics,
    /// The orthonormal frame, if requested.
    pub frame: Option<ProjectionFrame>,
}

/// Provenance of one end-to-end sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub radius: f64,
    pub margin: f64,
    pub seed: u64,
    pub stream: u64,
    pub mode: SamplerMode,
    pub n_points: usize,
    pub tool_version: String,
    pub palm: bool,
    pub thinning: f64,
    pub dilation: f64,
}

/// An end-to-end sample: active set plus conditional points, with the
/// dilation map already applied to the output coordinates.
#[derive(Debug, Clone)]
pub struct GinibreSample {
    pub points: Vec<Complex64>,
    pub active: ActiveSet,
    pub meta: SampleMeta,
    pub diagnostics: DrawDiagnostics,
}

/// Mutable state of one sequential draw: the frame built so far, the
/// residual diagonal `U`, and the strict upper triangle of the residual
/// projection matrix `W = I − Σ e_k e_k†`.
pub(crate) struct SamplerState {
    ctx: SlotContext,
    frame: ProjectionFrame,
    u: Vec<f64>,
    /// `prefix[j] = Σ_{t<j} u[t]`, rebuilt before each radial solve.
    prefix: Vec<f64>,
    w_upper: Vec<Complex64>,
    window: PoissonWindow,
    tol: f64,
    points: Vec<Complex64>,
    max_radial_residual: f64,
    max_angular_residual: f64,
    costs: Option<Vec<PointCost>>,
}

impl SamplerState {
    pub fn new(basis: &RingBasis, active: &[usize], options: &SamplerOptions) -> Result<Self> {
        options.validate()?;
        let k = active.len();
        if k > MAX_ACTIVE {
            return Err(Error::TooLarge {
                what: "active set for the sequential sampler",
                limit: MAX_ACTIVE,
                got: k,
            });
        }
        let ctx = SlotContext::build(basis, active, options.mode)?;
        let drop_tol = match options.mode {
            SamplerMode::Exact => 0.0,
            SamplerMode::Ring => FRAME_DROP_TOL,
        };
        Ok(SamplerState {
            ctx,
            frame: ProjectionFrame::new(k, drop_tol),
            u: vec![1.0; k],
            prefix: vec![0.0; k + 1],
            w_upper: vec![Complex64::ZERO; k * k],
            window: PoissonWindow::default(),
            tol: options.cdf_tolerance,
            points: Vec::with_capacity(k),
            max_radial_residual: 0.0,
            max_angular_residual: 0.0,
            costs: options.collect_costs.then(|| Vec::with_capacity(k)),
        })
    }

    pub fn remaining(&self) -> usize {
        self.ctx.len() - self.points.len()
    }

    /// Draws the next point, consuming exactly two uniforms.
    pub fn step(&mut self, stream: &mut SampleStream) -> Result<Complex64> {
        debug_assert!(self.remaining() > 0);
        let k = self.ctx.len();

        let solve_started = Instant::now();
        for j in 0..k {
            self.prefix[j + 1] = self.prefix[j] + self.u[j];
        }
        let radial = RadialSystem::new(&self.ctx, &self.u, &self.prefix)?;
        let (r, radial_residual) =
            radial.draw_radius(stream.uniform(), self.tol, &mut self.window)?;
        let angular = AngularSystem::build(&self.ctx, &self.u, &self.w_upper, r, &mut self.window)?;
        let (alpha, angular_residual) = angular.draw_angle(stream.uniform(), self.tol)?;
        let solve_nanos = solve_started.elapsed().as_nanos() as u64;

        let frame_started = Instant::now();
        let phi = angular.eigenvector_at(alpha);
        let e: &SparseVec = self.frame.orthogonalize_and_push(&phi)?;
        let frame_nanos = frame_started.elapsed().as_nanos() as u64;

        let update_started = Instant::now();
        for (&p, &v) in e.pos.iter().zip(&e.val) {
            let j = p as usize;
            let next = self.u[j] - v.norm_sqr();
            if next < -DIAGONAL_NEGATIVE_TOL {
                return Err(Error::Degenerate(format!(
                    "residual diagonal entry {next:.3e} at slot position {j}"
                )));
            }
            self.u[j] = next.max(0.0);
        }
        for (a, (&pa, &va)) in e.pos.iter().zip(&e.val).enumerate() {
            let row = pa as usize * k;
            for (&pb, &vb) in e.pos[a + 1..].iter().zip(&e.val[a + 1..]) {
                self.w_upper[row + pb as usize] -= va * vb.conj();
            }
        }
        let update_nanos = update_started.elapsed().as_nanos() as u64;

        self.max_radial_residual = self.max_radial_residual.max(radial_residual);
        self.max_angular_residual = self.max_angular_residual.max(angular_residual);
        if let Some(costs) = &mut self.costs {
            costs.push(PointCost {
                solve_nanos,
                frame_nanos,
                update_nanos,
                support: angular.support() as u32,
            });
        }
        let z = Complex64::from_polar(r, alpha);
        self.points.push(z);
        Ok(z)
    }

    #[cfg(test)]
    pub(crate) fn context(&self) -> &SlotContext {
        &self.ctx
    }

    #[cfg(test)]
    pub(crate) fn residual_parts(&self) -> (&[f64], &[Complex64]) {
        (&self.u, &self.w_upper)
    }

    #[cfg(test)]
    pub(crate) fn frame(&self) -> &ProjectionFrame {
        &self.frame
    }

    fn finish(self, keep_frame: bool) -> ProjectionDraw {
        ProjectionDraw {
            points: self.points,
            diagnostics: DrawDiagnostics {
                max_radial_residual: self.max_radial_residual,
                max_angular_residual: self.max_angular_residual,
                costs: self.costs,
            },
            frame: keep_frame.then_some(self.frame),
        }
    }
}

/// Draws the conditional point configuration for the given active set by
/// sequential inverse-CDF sampling. Consumes exactly two uniforms per point.
pub fn sample_projection_dpp(
    basis: &RingBasis,
    active: &ActiveSet,
    options: &SamplerOptions,
    stream: &mut SampleStream,
) -> Result<ProjectionDraw> {
    let mut state = SamplerState::new(basis, active.slots(), options)?;
    while state.remaining() > 0 {
        state.step(stream)?;
    }
    Ok(state.finish(options.keep_frame))
}

/// Conditional density of the next point given `frame.len()` already-drawn
/// points, evaluated from first principles (direct eigenfunction sums, no
/// shared tables with the sequential sampler).
///
/// This is the chain-rule factor `(‖φ(z)‖² − Σ_k |⟨φ(z), e_k⟩|²) / (|I| − i)`
/// and integrates to 1 over the disc.
pub fn conditional_density(
    basis: &RingBasis,
    mode: SamplerMode,
    active: &[usize],
    frame: &ProjectionFrame,
    z: Complex64,
) -> Result<f64> {
    let k = active.len();
    if frame.dim() != k {
        return Err(Error::SizeMismatch {
            left: frame.dim(),
            right: k,
        });
    }
    let drawn = frame.len();
    if drawn >= k {
        return Err(Error::InvalidConfig(format!(
            "all {k} points already conditioned on; no next-point density"
        )));
    }
    let mut phi = vec![Complex64::ZERO; k];
    let mut norm_sq = 0.0;
    for (j, &slot) in active.iter().enumerate() {
        let value = match mode {
            SamplerMode::Exact => basis.spectrum().eval_eigenfunction(slot, z),
            SamplerMode::Ring => basis.eval_eigenfunction(slot, z),
        };
        phi[j] = value;
        norm_sq += value.norm_sqr();
    }
    let mut projected = 0.0;
    for i in 0..drawn {
        projected += frame.coefficient(i, &phi).norm_sqr();
    }
    let remaining = (k - drawn) as f64;
    let density = (norm_sq - projected) / remaining;
    if density < 0.0 {
        // Cancellation forgiveness scales with the magnitudes involved.
        let forgiveness = 1e-10 * (1.0 + norm_sq) / remaining;
        if density >= -forgiveness {
            return Ok(0.0);
        }
        return Err(Error::Degenerate(format!(
            "conditional density {density:.3e} out of tolerance at z = {z}"
        )));
    }
    Ok(density)
}

/// One end-to-end sample against an already-built basis: Bernoulli active
/// set, conditional points, then the dilation output map.
pub fn sample_with_basis(
    basis: &RingBasis,
    options: &SamplerOptions,
    stream: &mut SampleStream,
) -> Result<GinibreSample> {
    let spectrum = basis.spectrum();
    let (seed, stream_index) = (stream.seed(), stream.stream());
    let active = sample_active_set(spectrum, stream);
    let draw = sample_projection_dpp(basis, &active, options, stream)?;
    let params = spectrum.params();
    let scale = params.dilation.sqrt();
    let points: Vec<Complex64> = draw.points.iter().map(|&z| z * scale).collect();
    let meta = SampleMeta {
        radius: params.radius,
        margin: params.margin,
        seed,
        stream: stream_index,
        mode: options.mode,
        n_points: points.len(),
        tool_version: crate::TOOL_VERSION.to_string(),
        palm: params.palm,
        thinning: params.thinning,
        dilation: params.dilation,
    };
    Ok(GinibreSample {
        points,
        active,
        meta,
        diagnostics: draw.diagnostics,
    })
}

/// One end-to-end sample from scratch; builds the spectrum and ring basis
/// for `params` first. For repeated replications build the basis once and
/// call [`sample_with_basis`].
pub fn sample_ginibre(
    params: SpectrumParams,
    options: &SamplerOptions,
    stream: &mut SampleStream,
) -> Result<GinibreSample> {
    let spectrum = GinibreSpectrum::build(params)?;
    let basis = RingBasis::build(spectrum)?;
    sample_with_basis(&basis, options, stream)
}
