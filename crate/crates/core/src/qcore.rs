//! Exact complex linear algebra over small, labeled Hilbert spaces.
//!
//! Every basis is an ordered list of distinct string labels. Bipartite
//! states keep their two factor bases separately so that partial traces and
//! Schmidt analysis never depend on an implicit subsystem ordering.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QError, Result};

/// Absolute tolerance for comparisons of dimensionless amplitudes.
pub const TOL: f64 = 1e-12;

/// Norms below this are treated as the zero vector.
pub const ZERO_NORM: f64 = 1e-14;

/// Schmidt coefficients below this are reported as zero.
pub const SCHMIDT_CUTOFF: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Phase factor `e^{i phi}`.
#[inline]
pub fn phase(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// Which factor of a bipartite system to act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

/// Ordered, duplicate-free list of basis labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis(Vec<String>);

impl Basis {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(QError::EmptyBasis);
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(QError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Basis(labels))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    /// Labels of the product basis, A-major: `(a,b)`.
    pub fn product(&self, other: &Basis) -> Basis {
        let labels = self
            .0
            .iter()
            .flat_map(|a| other.0.iter().map(move |b| pair_label(a, b)))
            .collect();
        Basis(labels)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(", "))
    }
}

pub fn pair_label(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

fn check_same(expected: &Basis, found: &Basis) -> Result<()> {
    if expected != found {
        return Err(QError::BasisMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|U^dagger U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// A unit vector over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    basis: Basis,
    amps: Vec<Complex64>,
}

/// Scales `amps` to unit norm over `basis`.
pub fn normalize(basis: Basis, amps: Vec<Complex64>) -> Result<Ket> {
    if amps.len() != basis.dim() {
        return Err(QError::LengthMismatch {
            expected: basis.dim(),
            found: amps.len(),
        });
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < ZERO_NORM {
        return Err(QError::ZeroVector);
    }
    let amps = amps.into_iter().map(|z| z / norm).collect();
    Ok(Ket { basis, amps })
}

impl Ket {
    /// The basis vector `|label>`.
    pub fn basis_state(basis: &Basis, label: &str) -> Result<Ket> {
        let idx = basis
            .index_of(label)
            .ok_or_else(|| QError::UnknownLabel(label.to_string()))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Ket {
            basis: basis.clone(),
            amps,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, label: &str) -> Option<Complex64> {
        self.basis.index_of(label).map(|i| self.amps[i])
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Born-rule probabilities in basis order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn probability(&self, label: &str) -> Option<f64> {
        self.amplitude(label).map(|z| z.norm_sqr())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        check_same(&self.basis, &other.basis)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn as_column(&self) -> CMatrix {
        CMatrix::from_column_slice(self.dim(), 1, &self.amps)
    }

    /// Applies a unitary acting on this ket's basis.
    pub fn evolve(&self, u: &CMatrix) -> Result<Ket> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(QError::DimensionError {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        let out = u * self.as_column();
        Ok(Ket {
            basis: self.basis.clone(),
            amps: out.iter().copied().collect(),
        })
    }

    /// Reinterprets the amplitudes over a relabeled basis of the same size.
    pub fn relabel(&self, basis: Basis) -> Result<Ket> {
        if basis.dim() != self.dim() {
            return Err(QError::DimensionError {
                expected: self.dim(),
                found: basis.dim(),
            });
        }
        Ok(Ket {
            basis,
            amps: self.amps.clone(),
        })
    }
}

/// A pure state of a two-part system with amplitude matrix indexed `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    basis_a: Basis,
    basis_b: Basis,
    amps: CMatrix,
}

/// `a ⊗ b`.
pub fn tensor(a: &Ket, b: &Ket) -> BipartiteState {
    let amps = CMatrix::from_fn(a.dim(), b.dim(), |i, j| a.amps[i] * b.amps[j]);
    BipartiteState {
        basis_a: a.basis.clone(),
        basis_b: b.basis.clone(),
        amps,
    }
}

impl BipartiteState {
    /// Builds a state from an amplitude matrix, rescaling it to unit
    /// Frobenius norm.
    pub fn new(basis_a: Basis, basis_b: Basis, amps: CMatrix) -> Result<Self> {
        if amps.nrows() != basis_a.dim() || amps.ncols() != basis_b.dim() {
            return Err(QError::LengthMismatch {
                expected: basis_a.dim() * basis_b.dim(),
                found: amps.len(),
            });
        }
        let norm = amps.norm();
        if norm < ZERO_NORM {
            return Err(QError::ZeroVector);
        }
        Ok(BipartiteState {
            basis_a,
            basis_b,
            amps: amps / Complex64::new(norm, 0.0),
        })
    }

    /// Recovers the factor structure of a ket over `basis_a.product(basis_b)`.
    pub fn from_ket(ket: &Ket, basis_a: Basis, basis_b: Basis) -> Result<Self> {
        let product = basis_a.product(&basis_b);
        if ket.basis != product {
            return Err(QError::NotProductBasis(ket.basis.to_string()));
        }
        let nb = basis_b.dim();
        let amps = CMatrix::from_fn(basis_a.dim(), nb, |i, j| ket.amps[i * nb + j]);
        Ok(BipartiteState { basis_a, basis_b, amps })
    }

    pub fn to_ket(&self) -> Ket {
        let (na, nb) = (self.basis_a.dim(), self.basis_b.dim());
        let mut amps = Vec::with_capacity(na * nb);
        for i in 0..na {
            for j in 0..nb {
                amps.push(self.amps[(i, j)]);
            }
        }
        Ket {
            basis: self.basis_a.product(&self.basis_b),
            amps,
        }
    }

    pub fn basis(&self, side: Side) -> &Basis {
        match side {
            Side::A => &self.basis_a,
            Side::B => &self.basis_b,
        }
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amps
    }

    pub fn amplitude(&self, a: &str, b: &str) -> Option<Complex64> {
        let i = self.basis_a.index_of(a)?;
        let j = self.basis_b.index_of(b)?;
        Some(self.amps[(i, j)])
    }

    pub fn probability(&self, a: &str, b: &str) -> Option<f64> {
        self.amplitude(a, b).map(|z| z.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Applies local unitaries `u_a ⊗ u_b`.
    pub fn evolve_local(&self, u_a: &CMatrix, u_b: &CMatrix) -> Result<Self> {
        for (u, basis) in [(u_a, &self.basis_a), (u_b, &self.basis_b)] {
            if u.nrows() != basis.dim() || u.ncols() != basis.dim() {
                return Err(QError::DimensionError {
                    expected: basis.dim(),
                    found: u.nrows(),
                });
            }
        }
        Ok(BipartiteState {
            basis_a: self.basis_a.clone(),
            basis_b: self.basis_b.clone(),
            amps: u_a * &self.amps * u_b.transpose(),
        })
    }

    /// Same amplitudes over renamed factor bases.
    pub fn relabel(&self, basis_a: Basis, basis_b: Basis) -> Result<Self> {
        if basis_a.dim() != self.basis_a.dim() || basis_b.dim() != self.basis_b.dim() {
            return Err(QError::DimensionError {
                expected: self.amps.len(),
                found: basis_a.dim() * basis_b.dim(),
            });
        }
        Ok(BipartiteState {
            basis_a,
            basis_b,
            amps: self.amps.clone(),
        })
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    basis: Basis,
    factors: Option<(Basis, Basis)>,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates `matrix` as a density operator over `basis`.
    pub fn new(basis: Basis, matrix: CMatrix) -> Result<Self> {
        validate_density(&basis, &matrix)?;
        Ok(DensityOperator {
            basis,
            factors: None,
            matrix,
        })
    }

    /// Validates `matrix` over the product of two factor bases.
    pub fn new_bipartite(basis_a: Basis, basis_b: Basis, matrix: CMatrix) -> Result<Self> {
        let basis = basis_a.product(&basis_b);
        validate_density(&basis, &matrix)?;
        Ok(DensityOperator {
            basis,
            factors: Some((basis_a, basis_b)),
            matrix,
        })
    }

    /// The maximally mixed state `I / dim`.
    pub fn maximally_mixed(basis: Basis) -> Self {
        let n = basis.dim();
        let matrix = CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0);
        DensityOperator {
            basis,
            factors: None,
            matrix,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn factors(&self) -> Option<(&Basis, &Basis)> {
        self.factors.as_ref().map(|(a, b)| (a, b))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn entry(&self, row: &str, col: &str) -> Option<Complex64> {
        let i = self.basis.index_of(row)?;
        let j = self.basis.index_of(col)?;
        Some(self.matrix[(i, j)])
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Diagonal in basis order.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Largest entrywise deviation from another operator on the same basis.
    pub fn max_deviation(&self, other: &DensityOperator) -> Result<f64> {
        check_same(&self.basis, &other.basis)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }
}

fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn validate_density(basis: &Basis, m: &CMatrix) -> Result<()> {
    if m.nrows() != basis.dim() || m.ncols() != basis.dim() {
        return Err(QError::DimensionError {
            expected: basis.dim(),
            found: m.nrows(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > TOL {
        return Err(QError::NotHermitian(defect));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
        return Err(QError::InvalidTrace(tr.re));
    }
    let min_ev = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    if min_ev < -TOL {
        return Err(QError::NegativeEigenvalue(min_ev));
    }
    Ok(())
}

/// Anything with a pure-state density operator.
pub trait PureState {
    fn density(&self) -> DensityOperator;
}

impl PureState for Ket {
    fn density(&self) -> DensityOperator {
        let col = self.as_column();
        DensityOperator {
            basis: self.basis.clone(),
            factors: None,
            matrix: &col * col.adjoint(),
        }
    }
}

impl PureState for BipartiteState {
    fn density(&self) -> DensityOperator {
        let col = self.to_ket().as_column();
        DensityOperator {
            basis: self.basis_a.product(&self.basis_b),
            factors: Some((self.basis_a.clone(), self.basis_b.clone())),
            matrix: &col * col.adjoint(),
        }
    }
}

/// The projector `|k><k|`.
pub fn density_of<S: PureState + ?Sized>(state: &S) -> DensityOperator {
    state.density()
}

/// A Hermitian operator over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    basis: Basis,
    matrix: CMatrix,
}

impl Observable {
    pub fn new(basis: Basis, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(QError::DimensionError {
                expected: basis.dim(),
                found: matrix.nrows(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > TOL {
            return Err(QError::NotHermitian(defect));
        }
        Ok(Observable { basis, matrix })
    }

    pub fn identity(basis: Basis) -> Self {
        let n = basis.dim();
        Observable {
            basis,
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn projector(k: &Ket) -> Self {
        let col = k.as_column();
        Observable {
            basis: k.basis.clone(),
            matrix: &col * col.adjoint(),
        }
    }

    /// `self ⊗ other` over the product basis.
    pub fn kron(&self, other: &Observable) -> Observable {
        Observable {
            basis: self.basis.product(&other.basis),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `Tr(rho O)`.
pub fn expectation(rho: &DensityOperator, obs: &Observable) -> Result<f64> {
    check_same(&rho.basis, &obs.basis)?;
    let value = (&rho.matrix * &obs.matrix).trace();
    if value.im.abs() > TOL {
        return Err(QError::ComplexExpectation(value.im));
    }
    Ok(value.re)
}

/// Source for [`partial_trace`]: either a pure bipartite state or a density
/// operator that remembers its product structure.
pub trait ProductStructured {
    fn bipartite_density(&self) -> Result<DensityOperator>;
}

impl ProductStructured for BipartiteState {
    fn bipartite_density(&self) -> Result<DensityOperator> {
        Ok(self.density())
    }
}

impl ProductStructured for DensityOperator {
    fn bipartite_density(&self) -> Result<DensityOperator> {
        if self.factors.is_none() {
            return Err(QError::NotProductBasis(self.basis.to_string()));
        }
        Ok(self.clone())
    }
}

/// Reduced density operator of the `keep` factor.
pub fn partial_trace<S: ProductStructured + ?Sized>(state: &S, keep: Side) -> Result<DensityOperator> {
    let rho = state.bipartite_density()?;
    let (basis_a, basis_b) = rho
        .factors
        .clone()
        .ok_or_else(|| QError::NotProductBasis(rho.basis.to_string()))?;
    let (na, nb) = (basis_a.dim(), basis_b.dim());
    let m = &rho.matrix;
    let (basis, matrix) = match keep {
        Side::A => {
            let r = CMatrix::from_fn(na, na, |i, k| (0..nb).map(|j| m[(i * nb + j, k * nb + j)]).sum());
            (basis_a, r)
        }
        Side::B => {
            let r = CMatrix::from_fn(nb, nb, |j, l| (0..na).map(|i| m[(i * nb + j, i * nb + l)]).sum());
            (basis_b, r)
        }
    };
    Ok(DensityOperator {
        basis,
        factors: None,
        matrix,
    })
}

/// Schmidt coefficients in nonincreasing order; entries below
/// [`SCHMIDT_CUTOFF`] are dropped.
pub fn schmidt(state: &BipartiteState) -> Vec<f64> {
    let mut sv: Vec<f64> = state
        .amps
        .clone()
        .singular_values()
        .iter()
        .copied()
        .filter(|&s| s >= SCHMIDT_CUTOFF)
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityOperator) -> f64 {
    (&rho.matrix * &rho.matrix).trace().re
}
