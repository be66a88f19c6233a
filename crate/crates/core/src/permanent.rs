//! Matrix permanents and the all-modes coincidence probability of an
//! interferometer `V2 * Phi(phi) * V1` fed with one photon per mode.

use itertools::Itertools;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{build_qft, matmul, phase_diagonal_for, ComplexMatrix};
use crate::scalar::Real;
use crate::strategy::{strategy_table, PhaseStrategy, StrategyKind};

/// Largest matrix accepted by [`permanent_ryser`].
pub const RYSER_MAX_DIM: usize = 30;
/// Largest matrix accepted by [`permanent_naive`].
pub const NAIVE_MAX_DIM: usize = 9;
/// Largest `n` for exact rencontres numbers and the closed-form permanent.
pub const RENCONTRES_MAX_N: usize = 20;

/// Below this size the subset loop runs on the calling thread.
const PARALLEL_MIN_DIM: usize = 16;
/// Fixed number of subset ranges for the parallel path, so the reduction
/// order does not depend on the thread count.
const PARALLEL_CHUNKS: u64 = 256;

/// Permanent by Ryser's inclusion-exclusion formula, visiting column subsets
/// in Gray-code order so each step updates the row sums by a single column.
pub fn permanent_ryser<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    let n = m.dim();
    if n > RYSER_MAX_DIM {
        return Err(Error::TooLarge {
            what: "Ryser permanent",
            size: n,
            max: RYSER_MAX_DIM,
        });
    }
    let total = 1u64 << n;
    let sum = if n < PARALLEL_MIN_DIM {
        ryser_range(m, 0, total)
    } else {
        let chunk = total / PARALLEL_CHUNKS;
        let parts: Vec<Complex<T>> = (0..PARALLEL_CHUNKS)
            .into_par_iter()
            .map(|c| ryser_range(m, c * chunk, (c + 1) * chunk))
            .collect();
        parts
            .into_iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    };
    Ok(if n.is_multiple_of(2) { sum } else { -sum })
}

/// Signed partial Ryser sum over Gray-code indices `start..end`.
fn ryser_range<T: Real>(m: &ComplexMatrix<T>, start: u64, end: u64) -> Complex<T> {
    let n = m.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let gray = |k: u64| k ^ (k >> 1);

    let mut row_sums = vec![zero; n];
    let g0 = gray(start);
    for (i, s) in row_sums.iter_mut().enumerate() {
        for j in (0..n).filter(|j| g0 >> j & 1 == 1) {
            *s += m[(i, j)];
        }
    }

    let signed_product = |sums: &[Complex<T>], g: u64| {
        let p = sums
            .iter()
            .fold(Complex::new(T::one(), T::zero()), |acc, s| acc * s);
        if g.count_ones().is_multiple_of(2) {
            p
        } else {
            -p
        }
    };

    let mut acc = if g0 == 0 {
        zero
    } else {
        signed_product(&row_sums, g0)
    };
    for k in start + 1..end {
        let col = k.trailing_zeros() as usize;
        let g = gray(k);
        if g >> col & 1 == 1 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
        }
        acc += signed_product(&row_sums, g);
    }
    acc
}

/// Literal sum over all `n!` permutations. Only meant as a reference.
pub fn permanent_naive<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    let n = m.dim();
    if n > NAIVE_MAX_DIM {
        return Err(Error::TooLarge {
            what: "naive permanent",
            size: n,
            max: NAIVE_MAX_DIM,
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    Ok((0..n).permutations(n).fold(zero, |acc, sigma| {
        acc + sigma
            .iter()
            .enumerate()
            .fold(Complex::new(T::one(), T::zero()), |p, (i, &j)| {
                p * m[(i, j)]
            })
    }))
}

/// Closed form of `F * Phi_delta(phi) * F^dagger` for the `n`-mode Fourier
/// transform `F`: `U[j][k] = (exp(i phi) + n delta_jk - 1) / n`.
pub fn qufti_network_matrix<T: Real>(n: usize, phi: T) -> ComplexMatrix<T> {
    assert!(n >= 1, "network dimension must be at least 1");
    let nf = T::from_count(n);
    let e = Complex::from_polar(T::one(), phi);
    let off = (e - T::one()) / nf;
    let diag = (e + (nf - T::one())) / nf;
    ComplexMatrix::from_fn(n, |j, k| if j == k { diag } else { off })
}

/// Number of permutations of `n` elements with exactly `k` fixed points,
/// `(n!/k!) * sum_{j=0}^{n-k} (-1)^j / j!`, in exact integer arithmetic.
pub fn rencontres(n: usize, k: usize) -> Result<u128> {
    if n > RENCONTRES_MAX_N {
        return Err(Error::TooLarge {
            what: "rencontres number",
            size: n,
            max: RENCONTRES_MAX_N,
        });
    }
    if k > n {
        return Err(Error::invalid("k", k as f64, "fixed-point count exceeds n"));
    }
    let m = n - k;
    // n!/(k! j!) = C(n, k) * m!/j!, an integer for every j <= m
    let choose = binomial(n, k);
    let mut total: i128 = 0;
    let mut falling: i128 = 1; // m!/j! for j running down from m
    for j in (0..=m).rev() {
        let term = choose as i128 * falling;
        total += if j % 2 == 0 { term } else { -term };
        falling *= j.max(1) as i128;
    }
    Ok(total as u128)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Closed-form permanent of [`qufti_network_matrix`], grouping permutations
/// by their number of fixed points. Polynomial in `n`.
pub fn qufti_permanent_closed_form<T: Real>(n: usize, phi: T) -> Result<Complex<T>> {
    if n == 0 {
        return Err(Error::invalid("n", 0.0, "need at least one mode"));
    }
    let nf = T::from_count(n);
    let e = Complex::from_polar(T::one(), phi);
    let diag = (e + (nf - T::one())) / nf;
    let off = (e - T::one()) / nf;
    let mut acc = Complex::new(T::zero(), T::zero());
    for k in 0..=n {
        let d = rencontres(n, k)?;
        if d == 0 {
            continue;
        }
        let weight = T::from_u128(d).expect("rencontres number representable as float");
        acc += diag.powu(k as u32) * off.powu((n - k) as u32) * weight;
    }
    Ok(acc)
}

/// Second-order expansion of the Fourier-network survival probability,
/// `1 - ((2n - 2)/n) phi^2`.
pub fn taylor_survival<T: Real>(n: usize, phi: T) -> T {
    assert!(n >= 1, "network dimension must be at least 1");
    let nf = T::from_count(n);
    let c = (T::lit(2.0) * nf - T::lit(2.0)) / nf;
    T::one() - c * phi * phi
}

/// Interferometer `V2 * Phi(phi) * V1` with a phase strategy for `Phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec<T: Real> {
    v1: ComplexMatrix<T>,
    v2: ComplexMatrix<T>,
    strategy: PhaseStrategy,
}

impl<T: Real> NetworkSpec<T> {
    pub fn new(
        v1: ComplexMatrix<T>,
        v2: ComplexMatrix<T>,
        strategy: PhaseStrategy,
    ) -> Result<Self> {
        let n = v1.dim();
        if v2.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v2.dim(),
            });
        }
        if strategy.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: strategy.len(),
            });
        }
        v1.check_unitary(T::INPUT_TOL)?;
        v2.check_unitary(T::INPUT_TOL)?;
        Ok(Self { v1, v2, strategy })
    }

    /// Measurement stage set to the inverse of the preparation stage.
    pub fn with_inverse(v1: ComplexMatrix<T>, strategy: PhaseStrategy) -> Result<Self> {
        let v2 = v1.conjugate_transpose();
        Self::new(v1, v2, strategy)
    }

    /// Fourier transform in, its inverse out, given phase strategy.
    pub fn fourier(n: usize, strategy: PhaseStrategy) -> Result<Self> {
        Self::with_inverse(build_qft(n), strategy)
    }

    /// Fourier network with all phase in the first mode.
    pub fn qufti(n: usize) -> Result<Self> {
        Self::fourier(n, strategy_table(StrategyKind::Delta, n)?)
    }

    pub fn dim(&self) -> usize {
        self.v1.dim()
    }

    pub fn v1(&self) -> &ComplexMatrix<T> {
        &self.v1
    }

    pub fn v2(&self) -> &ComplexMatrix<T> {
        &self.v2
    }

    pub fn strategy(&self) -> &PhaseStrategy {
        &self.strategy
    }

    /// Full transfer matrix `V2 * Phi(phi) * V1`.
    pub fn transfer_matrix(&self, phi: T) -> Result<ComplexMatrix<T>> {
        let phase = phase_diagonal_for(&self.strategy, phi, self.dim())?;
        matmul(&matmul(&self.v2, &phase)?, &self.v1)
    }
}

/// Probability that every output mode detects exactly one photon, given one
/// photon in every input mode: `|perm(V2 Phi V1)|^2`.
///
/// Values within `T::PROBABILITY_SLACK` outside `[0, 1]` are clamped; larger
/// excursions mean the network was not unitary and are reported as errors.
pub fn survival_probability<T: Real>(net: &NetworkSpec<T>, phi: T) -> Result<T> {
    let u = net.transfer_matrix(phi)?;
    clamp_probability(permanent_ryser(&u)?.norm_sqr())
}

pub(crate) fn clamp_probability<T: Real>(p: T) -> Result<T> {
    let slack = T::PROBABILITY_SLACK;
    if !(p >= -slack && p <= T::one() + slack) {
        return Err(Error::ProbabilityOutOfRange(p.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(p.max(T::zero()).min(T::one()))
}
