//! Dense complex matrices and the interferometer building blocks: Fourier
//! transforms, beamsplitter cascades, Haar-random unitaries and phase layers.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::strategy::PhaseStrategy;

/// Square `dim x dim` complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "MatrixJson<T>",
    into = "MatrixJson<T>",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct ComplexMatrix<T: Real> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// # Panics
    ///
    /// Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(entries: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have as many entries
    /// as there are rows.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::MalformedMatrix("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::MalformedMatrix(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    /// Convenience constructor for real-valued matrices.
    pub fn from_real_rows(rows: &[&[T]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex::new(x, T::zero())).collect())
                .collect(),
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn conjugate_transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// Largest entrywise deviation of `M M^dagger` from the identity.
    pub fn unitarity_deviation(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (a, b) in self.row(i).iter().zip(self.row(j)) {
                    acc += a * b.conj();
                }
                if i == j {
                    acc.re -= T::one();
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Returns an error unless the matrix is unitary to `tol`.
    pub fn check_unitary(&self, tol: T) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary {
                deviation: deviation.to_f64().unwrap_or(f64::INFINITY),
                tolerance: tol.to_f64().unwrap_or(0.0),
            })
        }
    }

    /// Maximum entrywise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

pub fn matmul<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let n = a.dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[(i, k)];
            for j in 0..n {
                out.data[i * n + j] += aik * b.data[k * n + j];
            }
        }
    }
    Ok(out)
}

pub fn conjugate_transpose<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    m.conjugate_transpose()
}

pub fn is_unitary<T: Real>(m: &ComplexMatrix<T>, tol: T) -> bool {
    m.unitarity_deviation() <= tol
}

/// `sum_i |M[0][i]|^4`: the only property of the first interferometer the
/// single-photon Fisher information depends on.
pub fn top_row_quartic_sum<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.row(0).iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
}

/// `n`-mode discrete Fourier transform, `V[j][l] = omega^(j*l) / sqrt(n)`.
pub fn build_qft<T: Real>(n: usize) -> ComplexMatrix<T> {
    assert!(n >= 1, "QFT dimension must be at least 1");
    let scale = T::one() / T::from_count(n).sqrt();
    let step = T::TAU() / T::from_count(n);
    ComplexMatrix::from_fn(n, |j, l| {
        // reduce the exponent first so large n keeps full phase accuracy
        let k = (j * l) % n;
        Complex::from_polar(scale, step * T::from_count(k))
    })
}

/// Cascade of `n - 1` real beamsplitters on mode pairs `(0, k)`, applied for
/// `k = 1..n` in ascending order, with reflectivity amplitude `1/sqrt(k+1)`.
/// The first row of the result has uniform magnitude `1/sqrt(n)`.
pub fn build_qumi_cascade<T: Real>(n: usize) -> ComplexMatrix<T> {
    assert!(n >= 1, "cascade dimension must be at least 1");
    let mut m = ComplexMatrix::<T>::identity(n);
    for k in 1..n {
        let r = T::one() / T::from_count(k + 1).sqrt();
        let t = (T::one() - r * r).sqrt();
        // left-multiply by [[t, r], [-r, t]] acting on rows 0 and k
        for c in 0..n {
            let top = m[(0, c)];
            let other = m[(k, c)];
            m[(0, c)] = top * t + other * r;
            m[(k, c)] = other * t - top * r;
        }
    }
    m
}

/// Haar-distributed unitary drawn from a ChaCha stream seeded with `seed`.
pub fn sample_haar_unitary<T: Real>(n: usize, seed: u64) -> ComplexMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_haar_unitary_with(n, &mut rng)
}

/// QR of a complex Ginibre matrix with the phases of `diag(R)` moved into `Q`,
/// which makes the distribution of `Q` exactly Haar.
pub fn sample_haar_unitary_with<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    assert!(n >= 1, "unitary dimension must be at least 1");
    let ginibre = ComplexMatrix::from_fn(n, |_, _| {
        Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let (mut q, r_diag) = householder_qr(&ginibre);
    for (k, d) in r_diag.iter().enumerate() {
        let norm = d.norm();
        if norm > T::zero() {
            let phase = d / norm;
            for i in 0..n {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

/// Householder QR; returns `Q` and the diagonal of `R`.
fn householder_qr<T: Real>(a: &ComplexMatrix<T>) -> (ComplexMatrix<T>, Vec<Complex<T>>) {
    let n = a.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let two = T::lit(2.0);
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![zero; n];

    for k in 0..n.saturating_sub(1) {
        let len = n - k;
        let norm = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -phase * norm;
        for i in 0..len {
            v[i] = r[(k + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in v[..len].iter_mut() {
            *z /= vnorm;
        }
        // R <- H R on rows k..n
        for c in k..n {
            let mut s = zero;
            for i in 0..len {
                s += v[i].conj() * r[(k + i, c)];
            }
            for i in 0..len {
                r[(k + i, c)] -= v[i] * s * two;
            }
        }
        // Q <- Q H on columns k..n
        for row in 0..n {
            let mut s = zero;
            for i in 0..len {
                s += q[(row, k + i)] * v[i];
            }
            for i in 0..len {
                q[(row, k + i)] -= s * v[i].conj() * two;
            }
        }
    }
    let diag = (0..n).map(|k| r[(k, k)]).collect();
    (q, diag)
}

/// Phase layer `diag(exp(i f_j phi))` for a normalized strategy.
pub fn phase_diagonal<T: Real>(strategy: &PhaseStrategy, phi: T) -> ComplexMatrix<T> {
    let entries: Vec<Complex<T>> = strategy
        .weights()
        .iter()
        .map(|&f| Complex::from_polar(T::one(), T::lit(f) * phi))
        .collect();
    ComplexMatrix::from_diagonal(&entries)
}

/// Checked variant of [`phase_diagonal`] for callers that need a specific
/// matrix size.
pub fn phase_diagonal_for<T: Real>(
    strategy: &PhaseStrategy,
    phi: T,
    dim: usize,
) -> Result<ComplexMatrix<T>> {
    if strategy.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: strategy.len(),
        });
    }
    Ok(phase_diagonal(strategy, phi))
}

/// Declarative description of a first-stage interferometer.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySpec<T: Real> {
    Qft { dim: usize },
    QumiCascade { dim: usize },
    HaarRandom { dim: usize, seed: u64 },
    Custom(ComplexMatrix<T>),
}

impl<T: Real> UnitarySpec<T>
where
    StandardNormal: Distribution<T>,
{
    pub fn dim(&self) -> usize {
        match self {
            UnitarySpec::Qft { dim }
            | UnitarySpec::QumiCascade { dim }
            | UnitarySpec::HaarRandom { dim, .. } => *dim,
            UnitarySpec::Custom(m) => m.dim(),
        }
    }

    /// Materializes the matrix. Constructed kinds are checked against
    /// `T::CONSTRUCTION_TOL`, custom matrices against `T::INPUT_TOL`.
    pub fn build(&self) -> Result<ComplexMatrix<T>> {
        let (m, tol) = match self {
            UnitarySpec::Qft { dim } => (build_qft(*dim), T::CONSTRUCTION_TOL),
            UnitarySpec::QumiCascade { dim } => (build_qumi_cascade(*dim), T::CONSTRUCTION_TOL),
            UnitarySpec::HaarRandom { dim, seed } => {
                (sample_haar_unitary(*dim, *seed), T::CONSTRUCTION_TOL)
            }
            UnitarySpec::Custom(m) => (m.clone(), T::INPUT_TOL),
        };
        m.check_unitary(tol)?;
        Ok(m)
    }
}

/// On-disk form `{"dim": n, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson<T> {
    pub dim: usize,
    pub re: Vec<Vec<T>>,
    pub im: Vec<Vec<T>>,
}

impl<T: Real> From<ComplexMatrix<T>> for MatrixJson<T> {
    fn from(m: ComplexMatrix<T>) -> Self {
        let n = m.dim();
        let re = (0..n)
            .map(|i| m.row(i).iter().map(|z| z.re).collect())
            .collect();
        let im = (0..n)
            .map(|i| m.row(i).iter().map(|z| z.im).collect())
            .collect();
        MatrixJson { dim: n, re, im }
    }
}

impl<T: Real> TryFrom<MatrixJson<T>> for ComplexMatrix<T> {
    type Error = Error;

    fn try_from(j: MatrixJson<T>) -> Result<Self> {
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(Error::MalformedMatrix(format!(
                "expected {} rows in both re and im, found {} and {}",
                j.dim,
                j.re.len(),
                j.im.len()
            )));
        }
        let rows =
            j.re.iter()
                .zip(&j.im)
                .map(|(re, im)| {
                    if re.len() != j.dim || im.len() != j.dim {
                        return Err(Error::MalformedMatrix(format!(
                            "row length mismatch: re {} / im {} for dim {}",
                            re.len(),
                            im.len(),
                            j.dim
                        )));
                    }
                    Ok(re
                        .iter()
                        .zip(im)
                        .map(|(&a, &b)| Complex::new(a, b))
                        .collect())
                })
                .collect::<Result<Vec<_>>>()?;
        ComplexMatrix::from_rows(rows)
    }
}

impl ComplexMatrix<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::MalformedMatrix(e.to_string()))
    }
}
