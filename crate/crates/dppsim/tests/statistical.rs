//! Cross-module statistical invariants that exercise the full sampling
//! pipeline at realistic sizes.

use dppsim::active_set::ActiveSet;
use dppsim::diagnostics::{ks_one_sample, ks_two_sample};
use dppsim::kernel::{GinibreSpectrum, RingBasis, SpectrumParams};
use dppsim::rng::SampleStream;
use dppsim::sampler::{sample_projection_dpp, sample_with_basis, SamplerOptions};
use dppsim::transport::{estimate_wc_monte_carlo, quadratic_matching_cost, Configuration};

fn basis(radius: f64, margin: f64) -> RingBasis {
    let spectrum = GinibreSpectrum::build(SpectrumParams::new(radius).with_margin(margin)).unwrap();
    RingBasis::build(spectrum).unwrap()
}

/// The ring approximation perturbs each conditional draw only through the
/// masked eigenfunction tails, so a shared-randomness coupling of the two
/// modes yields identical counts and nearly coincident points.
#[test]
fn ring_mode_stays_close_to_exact_mode_under_coupling() {
    let shared_basis = basis(5.0, 3.0);
    let exact = SamplerOptions::exact();
    let ring = SamplerOptions::ring();
    let estimate = estimate_wc_monte_carlo(
        |stream: &mut SampleStream| -> dppsim::Result<Configuration> {
            Ok(sample_with_basis(&shared_basis, &exact, stream)?.into())
        },
        |stream: &mut SampleStream| -> dppsim::Result<Configuration> {
            Ok(sample_with_basis(&shared_basis, &ring, stream)?.into())
        },
        40,
        2718,
        true,
    )
    .unwrap();
    // Identical spectra consume identical uniforms for the active set, so
    // cardinalities can never disagree.
    assert_eq!(estimate.mismatch_rate, 0.0);
    let mean = estimate.mean_matched_cost.unwrap();
    assert!(
        mean < 1e-2,
        "coupled exact-vs-ring mean matched cost too large: {mean}"
    );
}

/// A large ring-mode draw must still deliver a numerically orthonormal
/// frame and respect the disc boundary everywhere.
#[test]
fn large_ring_draw_keeps_frame_orthonormal() {
    let big = basis(18.0, 3.0);
    let mut options = SamplerOptions::ring();
    options.keep_frame = true;
    let mut stream = SampleStream::substream(31415, 0);
    let active = dppsim::active_set::sample_active_set(big.spectrum(), &mut stream);
    let draw = sample_projection_dpp(&big, &active, &options, &mut stream).unwrap();
    assert_eq!(draw.points.len(), active.len());
    assert!(active.len() > 250, "expected a large draw, got {}", active.len());
    for z in &draw.points {
        assert!(z.norm() <= 18.0 + 1e-12);
    }
    assert!(draw.diagnostics.max_radial_residual <= 1e-9);
    assert!(draw.diagnostics.max_angular_residual <= 1e-9);
    let defect = draw.frame.unwrap().gram_defect();
    assert!(defect <= 1e-8, "gram defect {defect}");
}

/// Conditioning on a point at the origin drops the constant eigenfunction,
/// which empties the neighborhood of the origin relative to the plain
/// process.
#[test]
fn palm_conditioning_produces_valid_samples() {
    let mut params = SpectrumParams::new(4.0);
    params.palm = true;
    let spectrum = GinibreSpectrum::build(params).unwrap();
    let palm_basis = RingBasis::build(spectrum).unwrap();
    let options = SamplerOptions::ring();
    let mut near_origin = 0usize;
    let mut total = 0usize;
    for rep in 0..60 {
        let mut stream = SampleStream::substream(99, rep);
        let sample = sample_with_basis(&palm_basis, &options, &mut stream).unwrap();
        for z in &sample.points {
            assert!(z.norm() <= 4.0 + 1e-12);
            total += 1;
            if z.norm() < 0.3 {
                near_origin += 1;
            }
        }
        assert!(sample.diagnostics.max_radial_residual <= 1e-9);
    }
    assert!(total > 500);
    // The Palm intensity vanishes quadratically at the origin: the disc
    // r < 0.3 would hold ~0.09 points per plain sample but an order of
    // magnitude fewer here; allow a little noise.
    assert!(
        (near_origin as f64) < 0.02 * total as f64,
        "{near_origin} of {total} points landed near the origin"
    );
}

/// Dilation commutes with sampling: drawing with dilation ρ equals drawing
/// plain and scaling the points by √ρ, uniform for uniform.
#[test]
fn dilation_is_a_deterministic_point_map() {
    let mut plain = SpectrumParams::new(3.0);
    plain.thinning = 0.8;
    let mut dilated = plain;
    dilated.dilation = 2.25;
    let options = SamplerOptions::exact();
    for rep in 0..5 {
        let mut sa = SampleStream::substream(512, rep);
        let mut sb = SampleStream::substream(512, rep);
        let a = dppsim::sampler::sample_ginibre(plain, &options, &mut sa).unwrap();
        let b = dppsim::sampler::sample_ginibre(dilated, &options, &mut sb).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((y - x * 1.5).norm() <= 1e-12 * (1.0 + x.norm()));
        }
    }
}

/// With a single active index at R = 1 the first-point radius law has the
/// closed form (1 − e^{−r²})/(1 − e^{−1}); the drawn radii must pass a
/// one-sample KS test against it and the angles against the uniform law.
#[test]
fn single_index_draw_matches_the_closed_form_law() {
    use std::f64::consts::PI;
    let b = basis(1.0, 3.0);
    let options = SamplerOptions::exact();
    let mut radii = Vec::with_capacity(5000);
    let mut angles = Vec::with_capacity(5000);
    for rep in 0..5000u64 {
        let mut stream = SampleStream::substream(606, rep);
        let active = ActiveSet::from_slots(vec![0], 606);
        let draw = sample_projection_dpp(&b, &active, &options, &mut stream).unwrap();
        radii.push(draw.points[0].norm());
        angles.push(draw.points[0].arg());
    }
    let scale = 1.0 - (-1.0f64).exp();
    let (_, p_radius) =
        ks_one_sample(&radii, |r| (1.0 - (-r * r).exp()) / scale).unwrap();
    assert!(p_radius > 1e-3, "radius KS p = {p_radius}");
    let (_, p_angle) = ks_one_sample(&angles, |t| (t + PI) / (2.0 * PI)).unwrap();
    assert!(p_angle > 1e-3, "angle KS p = {p_angle}");
}

/// The joint law is exchangeable, so the first and last drawn points share
/// one radius marginal even though the sampler produces them sequentially.
#[test]
fn first_and_last_drawn_points_share_a_radius_law() {
    let b = basis(3.0, 3.0);
    let options = SamplerOptions::exact();
    let mut first = Vec::with_capacity(5000);
    let mut last = Vec::with_capacity(5000);
    for rep in 0..5000u64 {
        let mut stream = SampleStream::substream(707, rep);
        let active = ActiveSet::from_slots(vec![0, 1, 2], 707);
        let draw = sample_projection_dpp(&b, &active, &options, &mut stream).unwrap();
        first.push(draw.points[0].norm());
        last.push(draw.points[2].norm());
    }
    let (stat, p) = ks_two_sample(&first, &last).unwrap();
    assert!(p > 1e-3, "first-vs-last KS D = {stat}, p = {p}");
}

/// Per-replication matching cost between coupled exact and ring draws:
/// the median must sit well below the engineering gate of 1e-2.
#[test]
fn coupled_mode_gap_median_is_small() {
    let shared_basis = basis(5.0, 3.0);
    let exact = SamplerOptions::exact();
    let ring = SamplerOptions::ring();
    let mut costs = Vec::with_capacity(40);
    for rep in 0..40u64 {
        let mut sa = SampleStream::substream(2718, rep);
        let mut sb = SampleStream::substream(2718, rep);
        let a: Configuration = sample_with_basis(&shared_basis, &exact, &mut sa).unwrap().into();
        let b: Configuration = sample_with_basis(&shared_basis, &ring, &mut sb).unwrap().into();
        costs.push(quadratic_matching_cost(&a, &b).unwrap().cost);
    }
    costs.sort_by(f64::total_cmp);
    let median = 0.5 * (costs[19] + costs[20]);
    assert!(median < 1e-2, "median coupled cost = {median}");
}
