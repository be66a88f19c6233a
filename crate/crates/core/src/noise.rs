//! Photon loss and phase dephasing acting on the Fourier network with all
//! phase in the first mode.
//!
//! Loss is modeled analytically: with per-photon survival probability `l`
//! and at most one photon lost, a collision is detected unambiguously with
//! probability `(1 - P) [l^n + (n - 2)(1 - l) l^(n-1)]`. Dephasing adds a
//! zero-mean Gaussian phase of variance `dchi` to the unknown phase; to
//! second order the averaged coincidence probability is
//! `1 - (2n - 2)(phi^2 + dchi) / n`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrology::{delta_phi_from, sensitivity_error_propagation, DEFAULT_STEP, SWEEP_MAX_N};
use crate::permanent::{clamp_probability, survival_probability, NetworkSpec};
use crate::scalar::Real;

/// Number of independently seeded streams the Monte-Carlo estimate is split
/// into. Part of the reproducibility contract: changing it changes results.
pub const MONTE_CARLO_CHUNKS: u64 = 16;
/// Minimum sample count for [`gaussian_dephasing_monte_carlo`].
pub const MONTE_CARLO_MIN_SAMPLES: usize = 10_000;
/// Largest mode count for the Monte-Carlo reference.
pub const MONTE_CARLO_MAX_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Per-photon survival probability.
    pub fidelity: f64,
    /// Variance of the random phase, rad^2.
    pub dephasing_var: f64,
}

impl NoiseParams {
    pub fn new(fidelity: f64, dephasing_var: f64) -> Result<Self> {
        check_fidelity(fidelity)?;
        check_dephasing(dephasing_var)?;
        Ok(Self {
            fidelity,
            dephasing_var,
        })
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            fidelity: 1.0,
            dephasing_var: 0.0,
        }
    }
}

fn check_fidelity(fidelity: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::invalid("fidelity", fidelity, "must lie in [0, 1]"));
    }
    Ok(())
}

fn check_dephasing(var: f64) -> Result<()> {
    if !(var >= 0.0 && var.is_finite()) {
        return Err(Error::invalid(
            "dephasing_var",
            var,
            "must be finite and nonnegative",
        ));
    }
    Ok(())
}

fn check_modes(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", n as f64, "need at least two modes"));
    }
    if n > SWEEP_MAX_N {
        return Err(Error::TooLarge {
            what: "noise model mode count",
            size: n,
            max: SWEEP_MAX_N,
        });
    }
    Ok(())
}

/// Probability of an unambiguous collision under independent per-photon
/// loss, keeping terms with at most one photon lost.
pub fn collision_probability_lossy(p_coincidence: f64, fidelity: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_coincidence) {
        return Err(Error::invalid(
            "p_coincidence",
            p_coincidence,
            "must lie in [0, 1]",
        ));
    }
    check_fidelity(fidelity)?;
    if n < 2 {
        return Err(Error::invalid("n", n as f64, "need at least two photons"));
    }
    let l = fidelity;
    let survive = l.powi(n as i32) + (n as f64 - 2.0) * (1.0 - l) * l.powi(n as i32 - 1);
    Ok((1.0 - p_coincidence) * survive)
}

/// Error-propagation sensitivity when collisions are read through lossy
/// detection, evaluated on the `n`-mode Fourier network.
pub fn lossy_sensitivity(n: usize, phi0: f64, fidelity: f64) -> Result<f64> {
    check_modes(n)?;
    check_fidelity(fidelity)?;
    if !(phi0 > 0.0) {
        return Err(Error::invalid(
            "phi0",
            phi0,
            "working point must be positive",
        ));
    }
    let net = NetworkSpec::<f64>::qufti(n)?;
    sensitivity_error_propagation(
        |phi| collision_probability_lossy(survival_probability(&net, phi)?, fidelity, n),
        phi0,
        DEFAULT_STEP,
    )
}

/// Second-order Gaussian-averaged coincidence probability. Only meaningful
/// for `phi, dephasing_var << 1`.
pub fn dephased_expectation(n: usize, phi: f64, dephasing_var: f64) -> f64 {
    let nf = n as f64;
    1.0 - (2.0 * nf - 2.0) * (phi * phi + dephasing_var) / nf
}

/// Sensitivity of the averaged coincidence probability, with the exact
/// derivative of the quadratic model, `-2 phi (2n - 2) / n`.
pub fn dephased_sensitivity(n: usize, phi0: f64, dephasing_var: f64) -> Result<f64> {
    dephased_sensitivity_with_offset(n, phi0, dephasing_var, 0.0)
}

/// As [`dephased_sensitivity`], with a known bias phase added to `phi0` to
/// move the working point off the symmetric peak at zero.
pub fn dephased_sensitivity_with_offset(
    n: usize,
    phi0: f64,
    dephasing_var: f64,
    offset: f64,
) -> Result<f64> {
    check_modes(n)?;
    check_dephasing(dephasing_var)?;
    let phi = phi0 + offset;
    let nf = n as f64;
    let slope = -2.0 * phi * (2.0 * nf - 2.0) / nf;
    if !(slope.abs() >= <f64 as Real>::MIN_SLOPE) {
        return Err(Error::NonIdentifiablePhase {
            phi,
            slope: slope.abs(),
        });
    }
    let p = clamp_probability(dephased_expectation(n, phi, dephasing_var)).map_err(|_| {
        Error::invalid(
            "dephasing_var",
            dephasing_var,
            "outside the quadratic model's range",
        )
    })?;
    delta_phi_from(p, slope, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub samples: usize,
}

/// Monte-Carlo average of the exact Fourier-network survival probability
/// over Gaussian phase noise `chi ~ N(0, dephasing_var)`.
///
/// The samples are split into [`MONTE_CARLO_CHUNKS`] ChaCha streams of the
/// same seed, evaluated in parallel and combined in stream order, so the
/// estimate is bit-for-bit reproducible for a fixed `(seed, samples)`.
pub fn gaussian_dephasing_monte_carlo(
    n: usize,
    phi0: f64,
    dephasing_var: f64,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if !(1..=MONTE_CARLO_MAX_N).contains(&n) {
        return Err(Error::TooLarge {
            what: "Monte-Carlo mode count",
            size: n,
            max: MONTE_CARLO_MAX_N,
        });
    }
    check_dephasing(dephasing_var)?;
    let net = NetworkSpec::<f64>::qufti(n)?;
    let exact = |phi: f64| survival_probability(&net, phi);
    if dephasing_var == 0.0 {
        return Ok(MonteCarloEstimate {
            mean: exact(phi0)?,
            std_error: 0.0,
            samples,
        });
    }
    if samples < MONTE_CARLO_MIN_SAMPLES {
        return Err(Error::invalid(
            "samples",
            samples as f64,
            "Monte-Carlo reference needs at least 10^4 samples",
        ));
    }
    let normal = Normal::new(0.0, dephasing_var.sqrt())
        .map_err(|_| Error::invalid("dephasing_var", dephasing_var, "invalid Gaussian width"))?;
    let chunks = MONTE_CARLO_CHUNKS as usize;
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = samples / chunks + usize::from(c < samples % chunks);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let p = exact(phi0 + normal.sample(&mut rng))?;
                sum += p;
                sum_sq += p * p;
            }
            Ok((sum, sum_sq))
        })
        .collect::<Result<Vec<_>>>()?;
    let (sum, sum_sq) = partials
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::{analytic_delta_phi, network_sensitivity, DEFAULT_PHI0};
    use crate::permanent::{qufti_permanent_closed_form, taylor_survival};
    use proptest::prelude::*;

    #[test]
    fn collision_examples() {
        assert!((collision_probability_lossy(0.8, 1.0, 5).unwrap() - 0.2).abs() < 1e-15);
        for &l in &[0.0, 0.3, 0.9, 1.0] {
            assert_eq!(collision_probability_lossy(1.0, l, 4).unwrap(), 0.0);
        }
        let q = collision_probability_lossy(0.9, 0.9, 3).unwrap();
        assert!((q - 0.0810).abs() < 1e-12, "q = {q}");
        assert!(collision_probability_lossy(1.2, 0.9, 3).is_err());
        assert!(collision_probability_lossy(0.5, 1.1, 3).is_err());
        assert!(collision_probability_lossy(0.5, 0.9, 1).is_err());
    }

    #[test]
    fn collision_stays_a_probability() {
        for n in 2..=8 {
            for i in 0..=20 {
                for j in 0..=20 {
                    let q =
                        collision_probability_lossy(i as f64 / 20.0, j as f64 / 20.0, n).unwrap();
                    assert!((0.0..=1.0).contains(&q));
                }
            }
        }
    }

    #[test]
    fn lossless_limit_matches_coincidence_sensitivity() {
        for n in [3, 6] {
            let net = NetworkSpec::<f64>::qufti(n).unwrap();
            let lossless = network_sensitivity(&net, 1e-3, DEFAULT_STEP).unwrap();
            let lossy = lossy_sensitivity(n, 1e-3, 1.0).unwrap();
            assert!((lossy - lossless).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn loss_degrades_sensitivity() {
        let clean = lossy_sensitivity(3, 1e-3, 1.0).unwrap();
        let lossy = lossy_sensitivity(3, 1e-3, 0.8).unwrap();
        assert!(lossy.is_finite() && lossy > clean);

        let sweep: Vec<f64> = (0..=25)
            .map(|i| lossy_sensitivity(6, 1e-3, 0.5 + 0.02 * i as f64).unwrap())
            .collect();
        assert!(sweep.windows(2).all(|w| w[1] <= w[0]), "{sweep:?}");
    }

    #[test]
    fn total_loss_is_not_identifiable() {
        assert!(matches!(
            lossy_sensitivity(3, 1e-3, 0.0),
            Err(Error::NonIdentifiablePhase { .. })
        ));
        assert!(lossy_sensitivity(3, 0.0, 0.9).is_err());
        assert!(lossy_sensitivity(9, 1e-3, 0.9).is_err());
    }

    #[test]
    fn dephased_expectation_examples() {
        for n in 2..=8 {
            assert!((dephased_expectation(n, 0.07, 0.0) - taylor_survival(n, 0.07)).abs() < 1e-15);
            let at_zero = dephased_expectation(n, 0.0, 0.002);
            assert!(at_zero < 1.0);
            assert!((at_zero - (1.0 - (2.0 * n as f64 - 2.0) * 0.002 / n as f64)).abs() < 1e-15);
        }
        assert!((dephased_expectation(6, 0.1, 0.005) - 0.975).abs() < 1e-15);
    }

    #[test]
    fn dephased_sensitivity_examples() {
        for n in 2..=8 {
            let target = analytic_delta_phi(n).unwrap();
            let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&phi| (dephased_sensitivity(n, phi, 0.0).unwrap() - target).abs())
                .collect();
            assert!(
                errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-8,
                "n={n} {errs:?}"
            );
        }

        let sweep: Vec<f64> = (0..=50)
            .map(|i| dephased_sensitivity(6, 0.1, 0.005 * i as f64 / 50.0).unwrap())
            .collect();
        assert!(sweep.windows(2).all(|w| w[1] >= w[0]));

        assert!(matches!(
            dephased_sensitivity(4, 0.0, 0.001),
            Err(Error::NonIdentifiablePhase { .. })
        ));
        assert!(dephased_sensitivity(4, 0.1, -1e-3).is_err());
    }

    #[test]
    fn bias_phase_restores_identifiability() {
        assert!(dephased_sensitivity(4, 0.0, 0.001).is_err());
        let biased = dephased_sensitivity_with_offset(4, 0.0, 0.001, 0.1).unwrap();
        assert_eq!(biased, dephased_sensitivity(4, 0.1, 0.001).unwrap());
    }

    #[test]
    fn monte_carlo_without_noise_is_exact() {
        let net = NetworkSpec::<f64>::qufti(4).unwrap();
        let mc = gaussian_dephasing_monte_carlo(4, 0.1, 0.0, 10, 3).unwrap();
        assert_eq!(mc.mean, survival_probability(&net, 0.1).unwrap());
        assert_eq!(mc.std_error, 0.0);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let a = gaussian_dephasing_monte_carlo(3, 0.1, 0.003, 20_000, 11).unwrap();
        let b = gaussian_dephasing_monte_carlo(3, 0.1, 0.003, 20_000, 11).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = gaussian_dephasing_monte_carlo(3, 0.1, 0.003, 20_000, 12).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn monte_carlo_guards() {
        assert!(gaussian_dephasing_monte_carlo(7, 0.1, 0.003, 20_000, 1).is_err());
        assert!(gaussian_dephasing_monte_carlo(4, 0.1, 0.003, 100, 1).is_err());
        assert!(gaussian_dephasing_monte_carlo(4, 0.1, -0.1, 20_000, 1).is_err());
    }

    /// Gaussian average of the exact closed-form probability by trapezoidal
    /// quadrature over +-10 standard deviations.
    fn quadrature_average(n: usize, phi: f64, var: f64) -> f64 {
        let sigma = var.sqrt();
        let steps = 4000;
        let h = 20.0 * sigma / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let chi = -10.0 * sigma + h * i as f64;
            let w = (-chi * chi / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
            let p = qufti_permanent_closed_form(n, phi + chi)
                .unwrap()
                .norm_sqr();
            acc += if i == 0 || i == steps { 0.5 } else { 1.0 } * w * p * h;
        }
        acc
    }

    #[test]
    fn monte_carlo_matches_quadrature() {
        for &var in &[0.001, 0.003, 0.005] {
            let mc = gaussian_dephasing_monte_carlo(4, 0.1, var, 100_000, 5).unwrap();
            let exact = quadrature_average(4, 0.1, var);
            assert!(
                (mc.mean - exact).abs() <= 4.0 * mc.std_error,
                "var={var}: {mc:?} vs {exact}"
            );
        }
    }

    #[test]
    fn quadratic_model_error_is_fourth_order() {
        // exact average minus the model is c4 E[(phi+chi)^4] + O(sixth order)
        let n = 4;
        let c4 = {
            let phi: f64 = 1e-2;
            (qufti_permanent_closed_form(n, phi).unwrap().norm_sqr() - taylor_survival(n, phi))
                / phi.powi(4)
        };
        for &(phi, var) in &[(0.05f64, 0.0005f64), (0.1, 0.001), (0.1, 0.003)] {
            let fourth = phi.powi(4) + 6.0 * phi * phi * var + 3.0 * var * var;
            let gap = quadrature_average(n, phi, var) - dephased_expectation(n, phi, var);
            assert!(
                (gap - c4 * fourth).abs() <= 0.1 * c4 * fourth,
                "phi={phi} var={var} gap={gap}"
            );
        }
    }

    proptest! {
        #[test]
        fn loss_never_helps(n in 2usize..=6, l in 0.3f64..1.0) {
            let clean = lossy_sensitivity(n, DEFAULT_PHI0, 1.0).unwrap();
            prop_assert!(lossy_sensitivity(n, DEFAULT_PHI0, l).unwrap() >= clean);
        }
    }
}
