//! Statistical validation of samples: radial intensity against the kernel
//! diagonal, cardinality moments, nonparametric two-sample tests, and the
//! thinning and dilation maps that transform one determinantal process into
//! another.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::GinibreSpectrum;
use crate::rng::SampleStream;
use crate::specfun;
use crate::transport::Configuration;

/// Radial intensity histogram of a batch of samples, with the kernel
/// diagonal `K(x,x)` for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    /// `nbins + 1` increasing radii from 0 to the disc radius.
    pub edges: Vec<f64>,
    /// Points per unit area in each annulus, averaged over samples.
    pub empirical: Vec<f64>,
    /// `K(x,x) = Σ_n λ_n |φ_n(x)|²` at each annulus midpoint.
    pub theoretical: Vec<f64>,
    pub samples: usize,
    pub total_points: usize,
}

impl IntensityProfile {
    /// Area-weighted total of the empirical column; equals points per
    /// sample by construction.
    pub fn empirical_total(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.empirical)
            .map(|(edge, &density)| {
                density * std::f64::consts::PI * (edge[1] * edge[1] - edge[0] * edge[0])
            })
            .sum()
    }
}

/// Bins the points of every sample into equal-width annuli and normalizes
/// by annulus area and sample count.
pub fn intensity_profile(
    samples: &[Configuration],
    spectrum: &GinibreSpectrum,
    nbins: usize,
) -> Result<IntensityProfile> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig(
            "intensity profile needs at least one sample".into(),
        ));
    }
    if nbins == 0 {
        return Err(Error::InvalidConfig("need at least one bin".into()));
    }
    let radius = spectrum.radius();
    let width = radius / nbins as f64;
    let mut counts = vec![0usize; nbins];
    let mut total_points = 0usize;
    for (s, sample) in samples.iter().enumerate() {
        for z in sample.points() {
            let r = z.norm();
            if r > radius {
                return Err(Error::InvalidConfig(format!(
                    "sample {s} has a point at radius {r} outside the disc of radius {radius}"
                )));
            }
            // The boundary point belongs to the last annulus.
            let bin = ((r / width) as usize).min(nbins - 1);
            counts[bin] += 1;
            total_points += 1;
        }
    }
    let edges: Vec<f64> = (0..=nbins).map(|i| i as f64 * width).collect();
    let empirical: Vec<f64> = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, edge)| {
            let area = std::f64::consts::PI * (edge[1] * edge[1] - edge[0] * edge[0]);
            c as f64 / (samples.len() as f64 * area)
        })
        .collect();
    let theoretical: Vec<f64> = edges
        .windows(2)
        .map(|edge| spectrum.intensity(0.5 * (edge[0] + edge[1])))
        .collect();
    Ok(IntensityProfile {
        edges,
        empirical,
        theoretical,
        samples: samples.len(),
        total_points,
    })
}

/// Sample mean and unbiased variance of the configuration cardinalities.
pub fn count_moments(samples: &[Configuration]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "count moments need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.len() as f64).sum::<f64>() / n;
    let variance = samples
        .iter()
        .map(|s| {
            let d = s.len() as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    Ok((mean, variance))
}

/// Minimum sample size per side of the two-sample KS test; the asymptotic
/// p-value is unreliable below this.
pub const KS_MIN_SAMPLES: usize = 25;

/// Survival function of the Kolmogorov distribution, two-branch form:
/// a theta-series near 0 where the direct alternating series loses all
/// precision, the alternating series elsewhere.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let factor = (std::f64::consts::TAU).sqrt() / lambda;
        let t = (-std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda)).exp();
        let cdf = factor * (t + t.powi(9) + t.powi(25) + t.powi(49));
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let u = (-2.0 * lambda * lambda).exp();
        let tail = 2.0 * (u - u.powi(4) + u.powi(9) - u.powi(16));
        tail.clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov–Smirnov test with the standard asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < KS_MIN_SAMPLES || b.len() < KS_MIN_SAMPLES {
        return Err(Error::TooLarge {
            what: "two-sample KS test needs at least 25 points per side; shortfall",
            limit: KS_MIN_SAMPLES,
            got: a.len().min(b.len()),
        });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut statistic = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let x = xs[i];
        let y = ys[j];
        let level = x.min(y);
        while i < xs.len() && xs[i] <= level {
            i += 1;
        }
        while j < ys.len() && ys[j] <= level {
            j += 1;
        }
        statistic = statistic.max((i as f64 / na - j as f64 / nb).abs());
    }
    if statistic == 0.0 {
        return Ok((0.0, 1.0));
    }
    let n_eff = (na * nb / (na + nb)).sqrt();
    let lambda = (n_eff + 0.12 + 0.11 / n_eff) * statistic;
    Ok((statistic, kolmogorov_survival(lambda)))
}

/// One-sample Kolmogorov–Smirnov test of `data` against a reference law
/// given by its cumulative distribution function, with the standard
/// asymptotic p-value. The CDF must be nondecreasing with values in [0, 1].
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if data.len() < KS_MIN_SAMPLES {
        return Err(Error::TooLarge {
            what: "one-sample KS test needs at least 25 points; shortfall",
            limit: KS_MIN_SAMPLES,
            got: data.len(),
        });
    }
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut statistic = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidConfig(format!(
                "reference CDF returned {f} at {x}, outside [0, 1]"
            )));
        }
        statistic = statistic
            .max(f - i as f64 / n)
            .max((i + 1) as f64 / n - f);
    }
    let n_eff = n.sqrt();
    let lambda = (n_eff + 0.12 + 0.11 / n_eff) * statistic;
    Ok((statistic, kolmogorov_survival(lambda)))
}

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    /// Degrees of freedom after pooling: pooled bins − 1.
    pub dof: usize,
    pub p_value: f64,
    /// Cells actually compared after adjacent low-expectation bins merged.
    pub pooled_bins: usize,
}

/// Default minimum expected count per cell; adjacent cells below it are
/// pooled, which keeps the chi-square asymptotics honest in the tails.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

/// Chi-square goodness-of-fit of observed histogram counts against a
/// probability vector. Probabilities may sum to less than one (the
/// remainder becomes an implicit overflow cell with zero observed count
/// only if it is negligible; otherwise pass an explicit final cell).
pub fn chi_square_gof(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probabilities.len() {
        return Err(Error::SizeMismatch {
            left: observed.len(),
            right: probabilities.len(),
        });
    }
    if observed.len() < 2 {
        return Err(Error::InvalidConfig(
            "chi-square needs at least 2 cells".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::InvalidConfig(
            "chi-square needs at least one observation".into(),
        ));
    }
    let mass: f64 = probabilities.iter().sum();
    if !(mass > 0.0) || probabilities.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidConfig(
            "cell probabilities must be nonnegative with positive total".into(),
        ));
    }
    let scale = total as f64 / mass;
    // Pool adjacent cells until each pooled cell expects at least the
    // minimum; the final remainder merges into the last pooled cell.
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0f64, 0.0f64);
    for (&o, &p) in observed.iter().zip(probabilities) {
        obs_acc += o as f64;
        exp_acc += p * scale;
        if exp_acc >= CHI_SQUARE_MIN_EXPECTED {
            pooled.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += obs_acc;
            last.1 += exp_acc;
        } else {
            pooled.push((obs_acc, exp_acc));
        }
    }
    if pooled.len() < 2 {
        return Err(Error::Degenerate(
            "all cells pooled into one; too few observations for chi-square".into(),
        ));
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = pooled.len() - 1;
    let p_value = specfun::upper_regularized_gamma(dof as f64 / 2.0, statistic / 2.0)?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
        pooled_bins: pooled.len(),
    })
}

/// Keeps each point independently with probability `p`; the result of
/// thinning a determinantal process with kernel `K` is determinantal with
/// kernel `pK`. The derived configuration carries no provenance record.
pub fn thin_configuration(
    config: &Configuration,
    p: f64,
    stream: &mut SampleStream,
) -> Result<Configuration> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "thinning probability must lie in (0, 1], got {p}"
        )));
    }
    let kept: Vec<Complex64> = config
        .points()
        .iter()
        .copied()
        .filter(|_| stream.uniform() < p)
        .collect();
    Configuration::new(kept)
}

/// Maps every point `x ↦ ρ^{1/2} x`. In two dimensions this turns a
/// determinantal process with kernel `K` into one with kernel
/// `ρ^{−1} K(ρ^{−1/2}x, ρ^{−1/2}y)`; for the infinite Ginibre process the
/// intensity drops from `1/π` to `1/(ρπ)`. The derived configuration
/// carries no provenance record.
pub fn dilate_configuration(config: &Configuration, rho: f64) -> Result<Configuration> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!(
            "dilation ratio must be positive and finite, got {rho}"
        )));
    }
    let factor = rho.sqrt();
    Configuration::new(config.points().iter().map(|&z| z * factor).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::active_set::{count_distribution, sample_active_set};
    use crate::kernel::SpectrumParams;

    fn config(points: Vec<Complex64>) -> Configuration {
        Configuration::new(points).unwrap()
    }

    /// Configurations whose cardinalities follow the exact count law of
    /// `spectrum` without paying for conditional point draws.
    fn count_proxy_samples(
        spectrum: &GinibreSpectrum,
        reps: usize,
        seed: u64,
    ) -> Vec<Configuration> {
        (0..reps)
            .map(|i| {
                let mut stream = SampleStream::substream(seed, i as u64);
                let active = sample_active_set(spectrum, &mut stream);
                config(vec![Complex64::new(0.0, 0.0); active.len()])
            })
            .collect()
    }

    #[test]
    fn empty_samples_give_zero_empirical_column() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(4.0)).unwrap();
        let samples = vec![config(Vec::new()); 3];
        let profile = intensity_profile(&samples, &spectrum, 8).unwrap();
        assert!(profile.empirical.iter().all(|&v| v == 0.0));
        assert_eq!(profile.total_points, 0);
        assert_eq!(profile.edges.len(), 9);
    }

    #[test]
    fn intensity_bookkeeping_identity() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(3.0)).unwrap();
        let options = crate::sampler::SamplerOptions::ring();
        let samples: Vec<Configuration> = (0..40)
            .map(|i| {
                let mut stream = SampleStream::substream(11, i);
                crate::sampler::sample_with_basis(
                    &crate::kernel::RingBasis::build(spectrum.clone()).unwrap(),
                    &options,
                    &mut stream,
                )
                .unwrap()
                .into()
            })
            .collect();
        let profile = intensity_profile(&samples, &spectrum, 13).unwrap();
        let per_sample = profile.total_points as f64 / profile.samples as f64;
        assert!(
            (profile.empirical_total() - per_sample).abs() <= 1e-9 * per_sample.max(1.0),
            "{} vs {per_sample}",
            profile.empirical_total()
        );
    }

    #[test]
    fn theoretical_column_integrates_to_trace() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(5.0)).unwrap();
        let profile = intensity_profile(
            &[config(vec![Complex64::new(0.1, 0.0)])],
            &spectrum,
            2000,
        )
        .unwrap();
        let integral: f64 = profile
            .edges
            .windows(2)
            .zip(&profile.theoretical)
            .map(|(edge, &k)| k * std::f64::consts::PI * (edge[1] * edge[1] - edge[0] * edge[0]))
            .sum();
        assert!(
            (integral - spectrum.trace()).abs() < 1e-4,
            "{integral} vs {}",
            spectrum.trace()
        );
    }

    #[test]
    fn interior_intensity_near_inverse_pi() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(4.0)).unwrap();
        let basis = crate::kernel::RingBasis::build(spectrum.clone()).unwrap();
        let options = crate::sampler::SamplerOptions::ring();
        let samples: Vec<Configuration> = (0..150)
            .map(|i| {
                let mut stream = SampleStream::substream(21, i);
                crate::sampler::sample_with_basis(&basis, &options, &mut stream)
                    .unwrap()
                    .into()
            })
            .collect();
        let profile = intensity_profile(&samples, &spectrum, 8).unwrap();
        // Bulk annuli only: r ≤ 2 of R = 4.
        for bin in 0..4 {
            let expected = 1.0 / std::f64::consts::PI;
            assert!(
                (profile.empirical[bin] - expected).abs() < 0.12 * expected,
                "bin {bin}: {} vs {expected}",
                profile.empirical[bin]
            );
            assert!((profile.theoretical[bin] - expected).abs() < 0.01 * expected);
        }
    }

    #[test]
    fn out_of_disc_points_are_rejected() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(2.0)).unwrap();
        let samples = vec![config(vec![Complex64::new(3.0, 0.0)])];
        assert!(matches!(
            intensity_profile(&samples, &spectrum, 4),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn moments_of_constant_counts() {
        let samples = vec![config(vec![Complex64::new(0.0, 0.0); 7]); 5];
        let (mean, variance) = count_moments(&samples).unwrap();
        assert_eq!(mean, 7.0);
        assert_eq!(variance, 0.0);
        assert!(count_moments(&samples[..1]).is_err());
    }

    #[test]
    fn count_moments_match_bernoulli_sums() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(4.0)).unwrap();
        let reps = 2000;
        let samples = count_proxy_samples(&spectrum, reps, 3001);
        let (mean, variance) = count_moments(&samples).unwrap();
        let want_mean: f64 = spectrum.trace();
        let want_var: f64 = spectrum
            .eigenvalues()
            .iter()
            .map(|&l| l * (1.0 - l))
            .sum();
        let se_mean = (want_var / reps as f64).sqrt();
        assert!(
            (mean - want_mean).abs() < 4.0 * se_mean,
            "mean {mean} vs {want_mean} (se {se_mean})"
        );
        // Variance of the sample variance for independent sums of
        // Bernoullis is close to 2σ⁴/(n−1); use 5 of those as the gate.
        let se_var = (2.0 * want_var * want_var / (reps as f64 - 1.0)).sqrt();
        assert!(
            (variance - want_var).abs() < 5.0 * se_var,
            "variance {variance} vs {want_var} (se {se_var})"
        );
    }

    #[test]
    fn palm_shifts_mean_down_by_leading_eigenvalue() {
        let plain = GinibreSpectrum::build(SpectrumParams::new(4.0)).unwrap();
        let mut palm_params = SpectrumParams::new(4.0);
        palm_params.palm = true;
        let palm = GinibreSpectrum::build(palm_params).unwrap();
        let reps = 2000;
        let (mean_plain, _) = count_moments(&count_proxy_samples(&plain, reps, 71)).unwrap();
        let (mean_palm, _) = count_moments(&count_proxy_samples(&palm, reps, 72)).unwrap();
        let shift = plain.eigenvalue(0);
        let var: f64 = plain
            .eigenvalues()
            .iter()
            .map(|&l| l * (1.0 - l))
            .sum();
        let se = (2.0 * var / reps as f64).sqrt();
        assert!(
            ((mean_plain - mean_palm) - shift).abs() < 4.0 * se,
            "shift {} vs λ₀ = {shift}",
            mean_plain - mean_palm
        );
    }

    #[test]
    fn ks_identical_sequences() {
        let a: Vec<f64> = (0..60).map(|i| i as f64 / 60.0).collect();
        let (stat, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn ks_rejects_shifted_uniform() {
        let mut stream = SampleStream::new(5150);
        let a: Vec<f64> = (0..1000).map(|_| stream.uniform()).collect();
        let b: Vec<f64> = (0..1000).map(|_| stream.uniform() + 0.5).collect();
        let (stat, p) = ks_two_sample(&a, &b).unwrap();
        assert!(stat > 0.4 && stat <= 1.0);
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn ks_is_symmetric_and_bounded() {
        let mut stream = SampleStream::new(88);
        let a: Vec<f64> = (0..80).map(|_| stream.uniform()).collect();
        let b: Vec<f64> = (0..133).map(|_| stream.uniform() * 1.1).collect();
        let (sa, pa) = ks_two_sample(&a, &b).unwrap();
        let (sb, pb) = ks_two_sample(&b, &a).unwrap();
        assert_eq!(sa, sb);
        assert_eq!(pa, pb);
        assert!((0.0..=1.0).contains(&sa));
        assert!((0.0..=1.0).contains(&pa));
        assert!(ks_two_sample(&a[..10], &b).is_err());
    }

    #[test]
    fn one_sample_ks_accepts_its_own_law_and_rejects_another() {
        let mut stream = SampleStream::new(7221);
        // Exponential(1) draws by inverse transform.
        let data: Vec<f64> = (0..2000).map(|_| -(1.0 - stream.uniform()).ln()).collect();
        let (_, p_good) = ks_one_sample(&data, |x| 1.0 - (-x).exp()).unwrap();
        assert!(p_good > 1e-3, "p = {p_good}");
        let (stat, p_bad) = ks_one_sample(&data, |x| 1.0 - (-x / 2.0).exp()).unwrap();
        assert!(stat > 0.1 && p_bad < 1e-8, "stat = {stat}, p = {p_bad}");
        assert!(ks_one_sample(&data[..10], |x| x).is_err());
        // A broken reference law is reported, not silently clamped.
        assert!(ks_one_sample(&data, |x| 2.0 * x).is_err());
    }

    #[test]
    fn kolmogorov_survival_branches_agree() {
        // Both series converge near the branch point; they must agree there.
        for lambda in [1.0f64, 1.1, 1.18, 1.25, 1.4] {
            let u: f64 = (-2.0 * lambda * lambda).exp();
            let alternating = 2.0 * (u - u.powi(4) + u.powi(9) - u.powi(16) + u.powi(25));
            let got = kolmogorov_survival(lambda);
            assert!(
                (got - alternating).abs() < 1e-9,
                "λ = {lambda}: {got} vs {alternating}"
            );
        }
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(0.2) > 1.0 - 1e-12);
        assert!(kolmogorov_survival(3.0) < 2e-7);
    }

    #[test]
    fn chi_square_pools_and_accepts_exact_law() {
        // Observed drawn exactly proportional to the law: statistic 0.
        let probabilities = [0.25, 0.25, 0.25, 0.25];
        let observed = [25u64, 25, 25, 25];
        let result = chi_square_gof(&observed, &probabilities).unwrap();
        assert_eq!(result.statistic, 0.0);
        assert_eq!(result.dof, 3);
        assert!((result.p_value - 1.0).abs() < 1e-12);

        // Tiny tail cells pool away instead of blowing up the statistic:
        // the last three expect 0.5 + 0.4 + 0.1 points and merge into the
        // second cell, which then matches its observed count exactly.
        let probabilities = [0.5, 0.49, 0.005, 0.004, 0.001];
        let observed = [50u64, 49, 1, 0, 0];
        let result = chi_square_gof(&observed, &probabilities).unwrap();
        assert_eq!(result.pooled_bins, 2);
        assert_eq!(result.statistic, 0.0);
    }

    #[test]
    fn chi_square_rejects_wrong_law() {
        let probabilities = [0.5, 0.5];
        let observed = [900u64, 100];
        let result = chi_square_gof(&observed, &probabilities).unwrap();
        assert!(result.p_value < 1e-10);
        assert!(chi_square_gof(&observed, &[0.5]).is_err());
        assert!(chi_square_gof(&[0, 0], &probabilities).is_err());
    }

    #[test]
    fn thinning_keeps_all_at_unit_probability() {
        let points: Vec<Complex64> = (0..20)
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        let original = config(points);
        let mut stream = SampleStream::new(1);
        let thinned = thin_configuration(&original, 1.0, &mut stream).unwrap();
        assert_eq!(thinned.points(), original.points());
        assert!(thin_configuration(&original, 0.0, &mut stream).is_err());
        assert!(thin_configuration(&original, 1.5, &mut stream).is_err());
    }

    #[test]
    fn extreme_thinning_empties_the_configuration() {
        let original = config(vec![Complex64::new(0.5, 0.5); 300]);
        let mut stream = SampleStream::new(42);
        let thinned = thin_configuration(&original, 1e-9, &mut stream).unwrap();
        assert!(thinned.is_empty());
    }

    #[test]
    fn thinned_counts_match_thinned_spectrum_law() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(4.0)).unwrap();
        let mut thinned_params = SpectrumParams::new(4.0);
        thinned_params.thinning = 0.5;
        let thinned_spectrum = GinibreSpectrum::build(thinned_params).unwrap();
        let law = count_distribution(&thinned_spectrum);

        let reps = 2000;
        let mut histogram = vec![0u64; law.len()];
        for i in 0..reps {
            let mut stream = SampleStream::substream(909, i);
            let active = sample_active_set(&spectrum, &mut stream);
            let sample = config(vec![Complex64::new(0.0, 0.0); active.len()]);
            let thinned = thin_configuration(&sample, 0.5, &mut stream).unwrap();
            histogram[thinned.len().min(law.len() - 1)] += 1;
        }
        let result = chi_square_gof(&histogram, &law).unwrap();
        assert!(
            result.p_value > 0.001,
            "chi-square p = {} (stat {}, dof {})",
            result.p_value,
            result.statistic,
            result.dof
        );
    }

    #[test]
    fn sequential_thinning_composes_multiplicatively() {
        let spectrum = GinibreSpectrum::build(SpectrumParams::new(4.0)).unwrap();
        let mut composed_params = SpectrumParams::new(4.0);
        composed_params.thinning = 0.6 * 0.5;
        let composed = GinibreSpectrum::build(composed_params).unwrap();
        let law = count_distribution(&composed);

        let reps = 2000;
        let mut histogram = vec![0u64; law.len()];
        for i in 0..reps {
            let mut stream = SampleStream::substream(4242, i);
            let active = sample_active_set(&spectrum, &mut stream);
            let sample = config(vec![Complex64::new(0.0, 0.0); active.len()]);
            let once = thin_configuration(&sample, 0.6, &mut stream).unwrap();
            let twice = thin_configuration(&once, 0.5, &mut stream).unwrap();
            histogram[twice.len().min(law.len() - 1)] += 1;
        }
        let result = chi_square_gof(&histogram, &law).unwrap();
        assert!(
            result.p_value > 0.001,
            "chi-square p = {} (stat {}, dof {})",
            result.p_value,
            result.statistic,
            result.dof
        );
    }

    #[test]
    fn dilation_examples() {
        let original = config(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)]);
        let identity = dilate_configuration(&original, 1.0).unwrap();
        assert_eq!(identity.points(), original.points());

        let doubled = dilate_configuration(&original, 4.0).unwrap();
        assert_eq!(doubled.len(), original.len());
        for (z, w) in original.points().iter().zip(doubled.points()) {
            assert!((w.norm() - 2.0 * z.norm()).abs() < 1e-15);
            // Angles preserved.
            assert!((w / z - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        }
        assert!(dilate_configuration(&original, 0.0).is_err());
        assert!(dilate_configuration(&original, f64::INFINITY).is_err());
    }
}
