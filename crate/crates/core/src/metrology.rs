//! Fisher information, Cramer-Rao bounds and error-propagation sensitivity
//! for interferometers fed with one photon per mode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{mode_covariance, output_distribution, FockOccupation};
use crate::matrix::{top_row_quartic_sum, ComplexMatrix};
use crate::permanent::{survival_probability, NetworkSpec};
use crate::scalar::Real;
use crate::strategy::{strategy_table, PhaseStrategy, StrategyKind};

/// Working point for error-propagation estimates.
pub const DEFAULT_PHI0: f64 = 1e-3;
/// Central-difference step used around [`DEFAULT_PHI0`].
///
/// Near `phi = 0` the probability sits close to 1, so rounding in `P`
/// contributes about `eps / (h |P'|)` to the relative slope error: 5e-9 at
/// `h = 1e-5` but 5e-11 at `1e-3`, where the Richardson truncation is still
/// near 1e-12.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Largest mode count for permanent-based sweeps.
pub const SWEEP_MAX_N: usize = 8;

/// Fisher information of `V1 |1,...,1>` with all phase in mode 0:
/// `8 (1 - sum_i |V1[0][i]|^4)`.
pub fn qfi_single_photons<T: Real>(v1: &ComplexMatrix<T>) -> Result<T> {
    qfi_fock_k(v1, 1)
}

/// Fisher information of `V1 |k,...,k>` with all phase in mode 0:
/// `4 (1 - sum_i |V1[0][i]|^4) k (k + 1)`.
pub fn qfi_fock_k<T: Real>(v1: &ComplexMatrix<T>, k: u32) -> Result<T> {
    if k == 0 {
        return Err(Error::invalid(
            "k",
            0.0,
            "photons per mode must be positive",
        ));
    }
    v1.check_unitary(T::INPUT_TOL)?;
    let kf = T::lit(k as f64);
    Ok(T::lit(4.0) * (T::one() - top_row_quartic_sum(v1)) * kf * (kf + T::one()))
}

/// Fisher information for an arbitrary strategy,
/// `4 sum_{j,k} f_j f_k Cov(n_j, n_k)`, from the full joint output statistics
/// of `V1 |1,...,1>`. Limited to the Fock oracle scale.
pub fn qfi_general<T: Real>(v1: &ComplexMatrix<T>, strategy: &PhaseStrategy) -> Result<T> {
    let n = v1.dim();
    if strategy.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: strategy.len(),
        });
    }
    v1.check_unitary(T::INPUT_TOL)?;
    let dist = output_distribution(v1, &FockOccupation::uniform(n, 1))?;
    let f = strategy.weights();
    let mut acc = T::zero();
    for j in 0..n {
        for k in 0..n {
            if f[j] != 0.0 && f[k] != 0.0 {
                acc += T::lit(f[j] * f[k]) * mode_covariance(&dist, j, k)?;
            }
        }
    }
    Ok(T::lit(4.0) * acc)
}

/// Best achievable phase uncertainty `1 / sqrt(F)`.
pub fn qcrb(fisher: f64) -> Result<f64> {
    if !(fisher > 0.0) {
        return Err(Error::UndefinedBound(fisher));
    }
    Ok(1.0 / fisher.sqrt())
}

/// Central difference with one Richardson step (`h` and `2h` stencils).
fn richardson_derivative<T: Real, F>(f: &F, x: T, h: T) -> Result<T>
where
    F: Fn(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let d1 = (f(x + h)? - f(x - h)?) / (two * h);
    let d2 = (f(x + two * h)? - f(x - two * h)?) / (T::lit(4.0) * h);
    Ok((T::lit(4.0) * d1 - d2) / T::lit(3.0))
}

/// Error-propagation sensitivity of a binary outcome with probability
/// `p(phi)`: `sqrt(P - P^2) / |dP/dphi|` at `phi0`.
///
/// The derivative is a Richardson-extrapolated central difference with the
/// given step. A slope below `T::MIN_SLOPE` means the outcome carries no
/// information about the phase and is reported as
/// [`Error::NonIdentifiablePhase`].
pub fn sensitivity_error_propagation<T: Real, F>(p: F, phi0: T, step: T) -> Result<T>
where
    F: Fn(T) -> Result<T>,
{
    if !(step > T::zero()) {
        return Err(Error::invalid(
            "step",
            step.to_f64().unwrap_or(f64::NAN),
            "finite-difference step must be positive",
        ));
    }
    let slope = richardson_derivative(&p, phi0, step)?;
    delta_phi_from(p(phi0)?, slope, phi0)
}

/// `sqrt(P - P^2) / |slope|` with the identifiability check.
pub(crate) fn delta_phi_from<T: Real>(prob: T, slope: T, phi: T) -> Result<T> {
    if !(slope.abs() >= T::MIN_SLOPE) {
        return Err(Error::NonIdentifiablePhase {
            phi: phi.to_f64().unwrap_or(f64::NAN),
            slope: slope.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    let var = (prob - prob * prob).max(T::zero());
    Ok(var.sqrt() / slope.abs())
}

/// Sensitivity of the all-modes coincidence measurement of a network.
pub fn network_sensitivity<T: Real>(net: &NetworkSpec<T>, phi0: T, step: T) -> Result<T> {
    sensitivity_error_propagation(|phi| survival_probability(net, phi), phi0, step)
}

/// Optimal single-photon sensitivity of a uniform first interferometer,
/// `1 / sqrt(8 (1 - 1/n))`.
pub fn analytic_delta_phi(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", n as f64, "need at least two modes"));
    }
    Ok(1.0 / (8.0 * (1.0 - 1.0 / n as f64)).sqrt())
}

/// `1 / sqrt(n)`.
pub fn shot_noise_limit(n: usize) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// `1 / n`.
pub fn heisenberg_limit(n: usize) -> f64 {
    1.0 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRecord {
    pub n: usize,
    pub delta_phi: f64,
    pub ratio_to_shotnoise: f64,
}

impl SensitivityRecord {
    pub fn new(n: usize, delta_phi: f64) -> Self {
        Self {
            n,
            delta_phi,
            ratio_to_shotnoise: delta_phi * (n as f64).sqrt(),
        }
    }
}

/// Sensitivity against photon number; a ratio below one beats shot noise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensitivityCurve {
    pub records: Vec<SensitivityRecord>,
}

impl SensitivityCurve {
    pub fn get(&self, n: usize) -> Option<&SensitivityRecord> {
        self.records.iter().find(|r| r.n == n)
    }

    /// CSV with header `n,delta_phi,ratio_to_shotnoise`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(["n", "delta_phi", "ratio_to_shotnoise"])
                .expect("in-memory write");
        }
        for r in &self.records {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, csv::Error> {
        let records = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { records })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serialization is infallible")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Sensitivity of the Fourier network (`V1 = F`, `V2 = F^dagger`) for one
/// strategy kind at `n` modes.
pub fn strategy_sensitivity(kind: StrategyKind, n: usize, phi0: f64) -> Result<f64> {
    if n > SWEEP_MAX_N {
        return Err(Error::TooLarge {
            what: "strategy sweep mode count",
            size: n,
            max: SWEEP_MAX_N,
        });
    }
    let net = NetworkSpec::fourier(n, strategy_table(kind, n)?)?;
    network_sensitivity(&net, phi0, DEFAULT_STEP)
}

/// One sensitivity curve per strategy kind over `ns`.
///
/// Grid points run in parallel; the output order follows `kinds` and `ns`.
pub fn strategy_sweep(
    ns: &[usize],
    kinds: &[StrategyKind],
    phi0: f64,
) -> Result<Vec<(StrategyKind, SensitivityCurve)>> {
    if let Some(&n) = ns.iter().find(|&&n| n > SWEEP_MAX_N) {
        return Err(Error::TooLarge {
            what: "strategy sweep mode count",
            size: n,
            max: SWEEP_MAX_N,
        });
    }
    let grid: Vec<(StrategyKind, usize)> = kinds
        .iter()
        .flat_map(|&k| ns.iter().map(move |&n| (k, n)))
        .collect();
    let values = grid
        .par_iter()
        .map(|&(kind, n)| strategy_sensitivity(kind, n, phi0))
        .collect::<Result<Vec<f64>>>()?;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let records = ns
                .iter()
                .enumerate()
                .map(|(j, &n)| SensitivityRecord::new(n, values[i * ns.len() + j]))
                .collect();
            (kind, SensitivityCurve { records })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::mode_moments;
    use crate::matrix::{build_qft, build_qumi_cascade, sample_haar_unitary};
    use crate::permanent::taylor_survival;
    use proptest::prelude::*;

    #[test]
    fn single_photon_qfi_examples() {
        assert_eq!(
            qfi_single_photons(&ComplexMatrix::<f64>::identity(3)).unwrap(),
            0.0
        );
        assert!((qfi_single_photons(&build_qft::<f64>(2)).unwrap() - 4.0).abs() < 1e-14);
        let v = sample_haar_unitary::<f64>(3, 21);
        let dist = output_distribution(&v, &FockOccupation::uniform(3, 1)).unwrap();
        let (_, var) = mode_moments(&dist, 0).unwrap();
        assert!((qfi_single_photons(&v).unwrap() - 4.0 * var).abs() < 1e-8);
    }

    #[test]
    fn qfi_rejects_non_unitary() {
        let shear = ComplexMatrix::<f64>::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            qfi_single_photons(&shear),
            Err(Error::NotUnitary { .. })
        ));
        assert!(qfi_fock_k(&build_qft::<f64>(2), 0).is_err());
    }

    #[test]
    fn fock_k_closed_form() {
        let v = sample_haar_unitary::<f64>(4, 8);
        assert_eq!(qfi_fock_k(&v, 1).unwrap(), qfi_single_photons(&v).unwrap());
        for n in 2..=10 {
            for k in 1..=5u32 {
                let kf = k as f64;
                let expect = 4.0 * kf * (kf + 1.0) * (1.0 - 1.0 / n as f64);
                let got = qfi_fock_k(&build_qft::<f64>(n), k).unwrap();
                assert!((got - expect).abs() <= 1e-12 * expect, "n={n} k={k}");
            }
        }
        for k in 1..=5u32 {
            let kf = k as f64;
            let got = qfi_fock_k(&build_qft::<f64>(2), k).unwrap();
            assert!((got - 2.0 * kf * (kf + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fock_k_against_brute_force_variance() {
        // QFI = 4 Var(n_0) of V1 |k,...,k> for every unitary
        for (n, k, seed) in [(2usize, 2u32, 1u64), (2, 3, 2), (3, 2, 3)] {
            let v = sample_haar_unitary::<f64>(n, seed);
            let dist = output_distribution(&v, &FockOccupation::uniform(n, k)).unwrap();
            let (_, var) = mode_moments(&dist, 0).unwrap();
            assert!(
                (qfi_fock_k(&v, k).unwrap() - 4.0 * var).abs() < 1e-9,
                "n={n} k={k}"
            );
        }
    }

    #[test]
    fn general_qfi_examples() {
        let v = sample_haar_unitary::<f64>(4, 99);
        let delta = strategy_table(StrategyKind::Delta, 4).unwrap();
        assert!((qfi_general(&v, &delta).unwrap() - qfi_single_photons(&v).unwrap()).abs() < 1e-8);

        let uniform = PhaseStrategy::custom(&[1.0; 4]).unwrap();
        assert!(qfi_general(&v, &uniform).unwrap().abs() < 1e-10);

        let f = build_qft::<f64>(4);
        let lin = strategy_table(StrategyKind::Linear, 4).unwrap();
        assert!(qfi_general(&f, &lin).unwrap() <= qfi_single_photons(&f).unwrap() + 1e-12);

        assert!(qfi_general(&v, &lin).is_ok());
        let short = strategy_table(StrategyKind::Delta, 3).unwrap();
        assert!(matches!(
            qfi_general(&v, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn qcrb_examples() {
        assert_eq!(qcrb(4.0).unwrap(), 0.5);
        assert_eq!(qcrb(1.0).unwrap(), 1.0);
        for n in 2..=8 {
            let f = 8.0 * (1.0 - 1.0 / n as f64);
            assert!((qcrb(f).unwrap() - analytic_delta_phi(n).unwrap()).abs() < 1e-15);
        }
        assert!(matches!(qcrb(0.0), Err(Error::UndefinedBound(_))));
        assert!(matches!(qcrb(-1.0), Err(Error::UndefinedBound(_))));
    }

    #[test]
    fn error_propagation_examples() {
        let net = NetworkSpec::<f64>::qufti(4).unwrap();
        let d = network_sensitivity(&net, DEFAULT_PHI0, DEFAULT_STEP).unwrap();
        let expect = 1.0 / (8.0f64 * 0.75).sqrt();
        assert!((d - expect).abs() / expect < 1e-4, "d = {d}");

        for &phi0 in &[1e-2, 1e-3, 1e-4] {
            let d = sensitivity_error_propagation(|x: f64| Ok(taylor_survival(2, x)), phi0, 1e-6)
                .unwrap();
            assert!((d - 0.5).abs() < 1e-3, "phi0={phi0} d={d}");
        }

        assert!(matches!(
            sensitivity_error_propagation(|_x: f64| Ok(0.7), 0.1, 1e-5),
            Err(Error::NonIdentifiablePhase { .. })
        ));
        assert!(sensitivity_error_propagation(|_x: f64| Ok(0.7), 0.1, 0.0).is_err());
    }

    #[test]
    fn richardson_is_fourth_order() {
        let f = |x: f64| Ok(x.sin());
        let d = richardson_derivative(&f, 0.3, 1e-2).unwrap();
        assert!((d - 0.3f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn analytic_and_limits() {
        assert!((analytic_delta_phi(2).unwrap() - 0.5).abs() < 1e-15);
        assert!((analytic_delta_phi(1_000_000).unwrap() - 1.0 / 8f64.sqrt()).abs() < 1e-6);
        assert!(analytic_delta_phi(1).is_err());
        for n in 2..=6 {
            let ratio = analytic_delta_phi(n).unwrap() * (n as f64).sqrt();
            assert!(ratio < 1.0, "n={n}");
        }
        let r7 = analytic_delta_phi(7).unwrap() * 7f64.sqrt();
        assert!(r7 > 1.0 && (r7 - (49.0f64 / 48.0).sqrt()).abs() < 1e-12);

        assert_eq!((shot_noise_limit(4), heisenberg_limit(4)), (0.5, 0.25));
        assert_eq!((shot_noise_limit(1), heisenberg_limit(1)), (1.0, 1.0));
        assert!(analytic_delta_phi(6).unwrap() < shot_noise_limit(6));
    }

    #[test]
    fn sweep_delta_is_best() {
        let ns: Vec<usize> = (2..=6).collect();
        let curves = strategy_sweep(&ns, &StrategyKind::TABLE, DEFAULT_PHI0).unwrap();
        let delta = &curves
            .iter()
            .find(|(k, _)| *k == StrategyKind::Delta)
            .unwrap()
            .1;
        for &n in &ns {
            let d = delta.get(n).unwrap();
            assert!(
                (d.ratio_to_shotnoise - analytic_delta_phi(n).unwrap() * (n as f64).sqrt()).abs()
                    < 1e-4
            );
            for (kind, curve) in &curves {
                assert!(
                    d.delta_phi <= curve.get(n).unwrap().delta_phi + 1e-9,
                    "{kind} at n={n}"
                );
            }
        }
        let linear = &curves
            .iter()
            .find(|(k, _)| *k == StrategyKind::Linear)
            .unwrap()
            .1;
        // same physics at n = 2, up to finite-difference noise
        assert!((linear.get(2).unwrap().delta_phi - delta.get(2).unwrap().delta_phi).abs() < 1e-7);
        assert!(matches!(
            strategy_sweep(&[9], &[StrategyKind::Delta], DEFAULT_PHI0),
            Err(Error::TooLarge { size: 9, .. })
        ));
    }

    #[test]
    fn cascade_is_as_good_as_fourier() {
        for n in 2..=5 {
            let delta = strategy_table(StrategyKind::Delta, n).unwrap();
            let cascade = NetworkSpec::with_inverse(build_qumi_cascade::<f64>(n), delta).unwrap();
            let a = network_sensitivity(&cascade, DEFAULT_PHI0, DEFAULT_STEP).unwrap();
            let b = network_sensitivity(
                &NetworkSpec::<f64>::qufti(n).unwrap(),
                DEFAULT_PHI0,
                DEFAULT_STEP,
            )
            .unwrap();
            assert!((a - b).abs() < 1e-7, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn qcrb_saturation_near_zero_phase() {
        let net = NetworkSpec::<f64>::qufti(4).unwrap();
        let bound = 1.0 / qfi_single_photons(net.v1()).unwrap().sqrt();
        let coef: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&phi0| {
                let d = network_sensitivity(&net, phi0, 1e-5).unwrap();
                (d - bound).abs() / (phi0 * phi0)
            })
            .collect();
        assert!(
            (coef[1] / coef[0] - 1.0).abs() < 0.1 && (coef[2] / coef[1] - 1.0).abs() < 0.1,
            "{coef:?}"
        );
    }

    #[test]
    fn curve_serialization() {
        let curve = SensitivityCurve {
            records: vec![
                SensitivityRecord::new(2, 0.5),
                SensitivityRecord::new(3, 0.433_012_701_892_219_3),
            ],
        };
        let csv = curve.to_csv();
        assert!(csv.starts_with("n,delta_phi,ratio_to_shotnoise\n2,0.5,0.7071067811865476\n"));
        assert_eq!(SensitivityCurve::from_csv(&csv).unwrap(), curve);
        assert_eq!(
            SensitivityCurve::from_json(&curve.to_json()).unwrap(),
            curve
        );
        assert_eq!(
            SensitivityCurve::default().to_csv(),
            "n,delta_phi,ratio_to_shotnoise\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn fourier_maximizes_single_photon_qfi(n in 2usize..=8, seed in any::<u64>()) {
            let v = sample_haar_unitary::<f64>(n, seed);
            let best = qfi_single_photons(&build_qft::<f64>(n)).unwrap();
            prop_assert!(qfi_single_photons(&v).unwrap() <= best + 1e-12);
        }

        #[test]
        fn general_qfi_bounded_by_largest_variance(
            n in 2usize..=4,
            seed in any::<u64>(),
            raw in prop::collection::vec(0.0f64..1.0, 4),
        ) {
            prop_assume!(raw[..n].iter().sum::<f64>() > 1e-3);
            let v = sample_haar_unitary::<f64>(n, seed);
            let s = PhaseStrategy::custom(&raw[..n]).unwrap();
            let dist = output_distribution(&v, &FockOccupation::uniform(n, 1)).unwrap();
            let max_var = (0..n).map(|j| mode_moments(&dist, j).unwrap().1).fold(0.0, f64::max);
            prop_assert!(qfi_general(&v, &s).unwrap() <= 4.0 * max_var + 1e-8);
        }

        #[test]
        fn small_phase_probability_law(n in 2usize..=5, seed in any::<u64>()) {
            let v = sample_haar_unitary::<f64>(n, seed);
            let fisher = qfi_single_photons(&v).unwrap();
            let net = NetworkSpec::with_inverse(v, strategy_table(StrategyKind::Delta, n).unwrap()).unwrap();
            let residual = |phi: f64| {
                (survival_probability(&net, phi).unwrap() - (1.0 - phi * phi * fisher / 4.0)).abs() / phi.powi(4)
            };
            let (r1, r2) = (residual(0.05), residual(0.025));
            prop_assert!(r1 < 10.0 && r2 < 10.0);
            prop_assert!((r1 - r2).abs() <= 0.2 * r1.max(1e-6) + 1e-6);
        }
    }
}
