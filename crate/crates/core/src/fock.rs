//! Brute-force evolution of multimode Fock states through a linear-optical
//! network. Exponential in the photon number; intended as a small-scale
//! reference for the closed-form results elsewhere in the crate.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::permanent::permanent_ryser;
use crate::scalar::Real;

/// Largest photon number and mode count accepted by [`output_distribution`].
pub const ORACLE_MAX_PHOTONS: u32 = 6;
pub const ORACLE_MAX_MODES: usize = 6;
/// Largest number of occupations [`enumerate_fock`] will produce.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Photon count per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockOccupation(Vec<u32>);

impl FockOccupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    /// `k` photons in each of `modes` modes.
    pub fn uniform(modes: usize, k: u32) -> Self {
        Self(vec![k; modes])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `prod_i counts[i]!`, exact.
    fn factorial_product(&self) -> u128 {
        self.0
            .iter()
            .map(|&c| (1..=c as u128).product::<u128>())
            .product()
    }
}

impl From<Vec<u32>> for FockOccupation {
    fn from(counts: Vec<u32>) -> Self {
        Self(counts)
    }
}

impl fmt::Display for FockOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ">")
    }
}

/// Every way of placing `photons` photons in `modes` modes, ordered with
/// the first mode's count descending, e.g. `(2,0), (1,1), (0,2)`.
pub fn enumerate_fock(photons: u32, modes: usize) -> Result<Vec<FockOccupation>> {
    if modes == 0 {
        return Err(Error::invalid("modes", 0.0, "need at least one mode"));
    }
    let size = occupation_count(photons, modes);
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "Fock basis",
            size: size.min(usize::MAX as u128) as usize,
            max: ENUMERATION_LIMIT as usize,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut current = vec![0u32; modes];
    fill(&mut current, 0, photons, &mut out);
    Ok(out)
}

fn fill(current: &mut [u32], mode: usize, remaining: u32, out: &mut Vec<FockOccupation>) {
    if mode + 1 == current.len() {
        current[mode] = remaining;
        out.push(FockOccupation(current.to_vec()));
        return;
    }
    for c in (0..=remaining).rev() {
        current[mode] = c;
        fill(current, mode + 1, remaining - c, out);
    }
}

/// Stars and bars: `C(photons + modes - 1, modes - 1)`, saturating.
fn occupation_count(photons: u32, modes: usize) -> u128 {
    let k = (modes - 1) as u128;
    let n = photons as u128 + k;
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Amplitude `<output| U |input>` for a network sending `a_j^dagger` to
/// `sum_i U[i][j] a_i^dagger`: the permanent of `U` with row `i` repeated
/// `output[i]` times and column `j` repeated `input[j]` times, divided by
/// `sqrt(prod input! * prod output!)`.
pub fn transition_amplitude<T: Real>(
    u: &ComplexMatrix<T>,
    input: &FockOccupation,
    output: &FockOccupation,
) -> Result<Complex<T>> {
    let modes = u.dim();
    for occ in [input, output] {
        if occ.modes() != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                found: occ.modes(),
            });
        }
    }
    let (n_in, n_out) = (input.photons(), output.photons());
    if n_in != n_out {
        return Err(Error::PhotonMismatch {
            input: n_in,
            output: n_out,
        });
    }
    if n_in == 0 {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    let rows = expand(output);
    let cols = expand(input);
    let sub = ComplexMatrix::from_fn(rows.len(), |a, b| u[(rows[a], cols[b])]);
    let norm = (input.factorial_product() * output.factorial_product()) as f64;
    Ok(permanent_ryser(&sub)? / T::lit(norm.sqrt()))
}

/// Mode index list with each mode repeated by its occupation.
fn expand(occ: &FockOccupation) -> Vec<usize> {
    occ.counts()
        .iter()
        .enumerate()
        .flat_map(|(mode, &c)| std::iter::repeat_n(mode, c as usize))
        .collect()
}

/// Joint photon-number statistics at the output of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution<T: Real> {
    modes: usize,
    photons: u32,
    entries: Vec<(FockOccupation, T)>,
}

impl<T: Real> OutputDistribution<T> {
    /// Point mass on a single occupation.
    pub fn point_mass(occ: FockOccupation) -> Self {
        Self {
            modes: occ.modes(),
            photons: occ.photons(),
            entries: vec![(occ, T::one())],
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn entries(&self) -> &[(FockOccupation, T)] {
        &self.entries
    }

    /// Probability of an occupation; zero if it is not in the support.
    pub fn probability(&self, occ: &FockOccupation) -> T {
        self.entries
            .iter()
            .find(|(o, _)| o == occ)
            .map_or(T::zero(), |(_, p)| *p)
    }

    pub fn total(&self) -> T {
        self.entries.iter().map(|(_, p)| *p).sum()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.modes,
            })
        } else {
            Ok(())
        }
    }

    fn expectation(&self, f: impl Fn(&[u32]) -> T) -> T {
        self.entries.iter().map(|(o, p)| *p * f(o.counts())).sum()
    }
}

/// Full output distribution of `input` sent through `u`.
pub fn output_distribution<T: Real>(
    u: &ComplexMatrix<T>,
    input: &FockOccupation,
) -> Result<OutputDistribution<T>> {
    let modes = u.dim();
    if modes > ORACLE_MAX_MODES {
        return Err(Error::TooLarge {
            what: "oracle mode count",
            size: modes,
            max: ORACLE_MAX_MODES,
        });
    }
    let photons = input.photons();
    if photons > ORACLE_MAX_PHOTONS {
        return Err(Error::TooLarge {
            what: "oracle photon number",
            size: photons as usize,
            max: ORACLE_MAX_PHOTONS as usize,
        });
    }
    if input.modes() != modes {
        return Err(Error::DimensionMismatch {
            expected: modes,
            found: input.modes(),
        });
    }
    let entries = enumerate_fock(photons, modes)?
        .into_par_iter()
        .map(|out| {
            let amp = transition_amplitude(u, input, &out)?;
            Ok((out, amp.norm_sqr()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutputDistribution {
        modes,
        photons,
        entries,
    })
}

/// Mean and variance of the photon number in `mode` (0-based).
pub fn mode_moments<T: Real>(dist: &OutputDistribution<T>, mode: usize) -> Result<(T, T)> {
    dist.check_mode(mode)?;
    let mean = dist.expectation(|c| T::lit(c[mode] as f64));
    let var = mode_covariance(dist, mode, mode)?;
    Ok((mean, var))
}

/// `Cov(n_j, n_k) = <n_j n_k> - <n_j><n_k>` under the joint distribution.
pub fn mode_covariance<T: Real>(dist: &OutputDistribution<T>, j: usize, k: usize) -> Result<T> {
    dist.check_mode(j)?;
    dist.check_mode(k)?;
    let mean_j = dist.expectation(|c| T::lit(c[j] as f64));
    let mean_k = dist.expectation(|c| T::lit(c[k] as f64));
    let joint = dist.expectation(|c| T::lit((c[j] * c[k]) as f64));
    Ok(joint - mean_j * mean_k)
}
