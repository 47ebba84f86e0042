//! Dense complex operators on a chain of spin-1/2 ions, each carrying one
//! truncated local phonon mode.
//!
//! The full Hilbert space is ordered `(spin_0 ⊗ mode_0) ⊗ (spin_1 ⊗ mode_1) ⊗ …`
//! with the leftmost factor most significant. Spin basis is `(|↓⟩, |↑⟩)`;
//! Fock basis is `|0⟩ … |d-1⟩`. Everything that touches a single site goes
//! through [`embed`], so no caller orders Kronecker factors by hand.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-10;
const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }

    pub fn from_index(i: usize) -> Spin {
        if i == 0 {
            Spin::Down
        } else {
            Spin::Up
        }
    }
}

/// Which tensor factor of an ion a local operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Spin,
    Mode,
}

/// Ion count and per-mode Fock cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    n_ions: usize,
    fock_cutoff: usize,
}

impl HilbertLayout {
    pub fn new(n_ions: usize, fock_cutoff: usize) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::InvalidDimension("need at least one ion".into()));
        }
        if fock_cutoff < 2 {
            return Err(Error::InvalidDimension(format!(
                "Fock cutoff {fock_cutoff} < 2 cannot hold a sideband transition"
            )));
        }
        Ok(HilbertLayout {
            n_ions,
            fock_cutoff,
        })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    /// Dimension of one ion's `spin ⊗ mode` factor.
    pub fn site_dim(&self) -> usize {
        2 * self.fock_cutoff
    }

    pub fn dim(&self) -> usize {
        self.site_dim().pow(self.n_ions as u32)
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_ions {
            Err(Error::SiteOutOfRange {
                site,
                n_ions: self.n_ions,
            })
        } else {
            Ok(())
        }
    }

    /// Basis index of the product state `|s_0, n_0⟩ ⊗ |s_1, n_1⟩ ⊗ …`.
    pub fn index(&self, spins: &[Spin], phonons: &[usize]) -> Result<usize> {
        if spins.len() != self.n_ions || phonons.len() != self.n_ions {
            return Err(Error::DimensionMismatch {
                expected: self.n_ions,
                got: spins.len().min(phonons.len()),
            });
        }
        let mut idx = 0;
        for (s, &n) in spins.iter().zip(phonons) {
            if n >= self.fock_cutoff {
                return Err(Error::InvalidDimension(format!(
                    "Fock level {n} beyond cutoff {}",
                    self.fock_cutoff
                )));
            }
            idx = idx * self.site_dim() + s.index() * self.fock_cutoff + n;
        }
        Ok(idx)
    }

    /// Inverse of [`HilbertLayout::index`].
    pub fn decode(&self, mut index: usize) -> (Vec<Spin>, Vec<usize>) {
        let mut spins = vec![Spin::Down; self.n_ions];
        let mut phonons = vec![0; self.n_ions];
        for site in (0..self.n_ions).rev() {
            let local = index % self.site_dim();
            index /= self.site_dim();
            spins[site] = Spin::from_index(local / self.fock_cutoff);
            phonons[site] = local % self.fock_cutoff;
        }
        (spins, phonons)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    General,
    Hermitian,
    Unitary,
}

/// A dense square matrix with an optional Hermitian or unitary guarantee.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: Matrix,
    kind: OperatorKind,
}

impl Operator {
    pub fn general(matrix: Matrix) -> Result<Self> {
        check_square(&matrix)?;
        Ok(Operator {
            matrix,
            kind: OperatorKind::General,
        })
    }

    /// Hermiticity is checked relative to the largest entry, so Hamiltonians
    /// in rad/s pass as readily as dimensionless ones.
    pub fn hermitian(matrix: Matrix) -> Result<Self> {
        check_square(&matrix)?;
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Operator {
            matrix,
            kind: OperatorKind::Hermitian,
        })
    }

    pub fn unitary(matrix: Matrix) -> Result<Self> {
        check_square(&matrix)?;
        let dev = unitary_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Operator {
            matrix,
            kind: OperatorKind::Unitary,
        })
    }

    pub(crate) fn with_kind(matrix: Matrix, kind: OperatorKind) -> Self {
        Operator { matrix, kind }
    }

    pub fn identity(dim: usize) -> Self {
        // identity is both; unitary is the stronger statement for composition
        Operator::with_kind(Matrix::identity(dim, dim), OperatorKind::Unitary)
    }

    pub fn zeros(dim: usize) -> Self {
        Operator::with_kind(Matrix::zeros(dim, dim), OperatorKind::Hermitian)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_hermitian(&self) -> bool {
        self.kind == OperatorKind::Hermitian
            || (self.kind == OperatorKind::Unitary && hermitian_deviation(&self.matrix) == 0.0)
    }

    pub fn is_unitary(&self) -> bool {
        self.kind == OperatorKind::Unitary
    }

    pub fn adjoint(&self) -> Operator {
        Operator::with_kind(self.matrix.adjoint(), self.kind)
    }

    /// Matrix product; the product of two unitaries stays unitary.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        check_same_dim(self, rhs)?;
        let kind = if self.is_unitary() && rhs.is_unitary() {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Ok(Operator::with_kind(&self.matrix * &rhs.matrix, kind))
    }

    /// Sum; the sum of two Hermitian operators stays Hermitian.
    pub fn plus(&self, rhs: &Operator) -> Result<Operator> {
        check_same_dim(self, rhs)?;
        let kind = if self.kind == OperatorKind::Hermitian && rhs.kind == OperatorKind::Hermitian {
            OperatorKind::Hermitian
        } else {
            OperatorKind::General
        };
        Ok(Operator::with_kind(&self.matrix + &rhs.matrix, kind))
    }

    /// Real scaling preserves Hermiticity.
    pub fn scaled(&self, factor: f64) -> Operator {
        let kind = match self.kind {
            OperatorKind::Hermitian => OperatorKind::Hermitian,
            _ => OperatorKind::General,
        };
        Operator::with_kind(&self.matrix * C64::from(factor), kind)
    }

    pub fn commutator(&self, rhs: &Operator) -> Result<Matrix> {
        check_same_dim(self, rhs)?;
        Ok(&self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix)
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }
}

fn check_square(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension(format!(
            "operator must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &Matrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitary_deviation(m: &Matrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - Matrix::identity(n, n)))
}

/// Truncated annihilation operator on `d` Fock levels: `a[n-1, n] = √n`.
pub fn annihilation(d: usize) -> Result<Operator> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("Fock dimension {d} < 2")));
    }
    let mut m = Matrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    Ok(Operator::with_kind(m, OperatorKind::General))
}

pub fn creation(d: usize) -> Result<Operator> {
    Ok(annihilation(d)?.adjoint())
}

pub fn number(d: usize) -> Result<Operator> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("Fock dimension {d} < 2")));
    }
    let m = Matrix::from_diagonal(&Vector::from_fn(d, |n, _| C64::from(n as f64)));
    Ok(Operator::with_kind(m, OperatorKind::Hermitian))
}

#[derive(Clone, Debug)]
pub struct SpinOps {
    /// σ⁺ = |↑⟩⟨↓|
    pub raise: Operator,
    /// σ⁻ = |↓⟩⟨↑|
    pub lower: Operator,
    /// σ_z = |↑⟩⟨↑| − |↓⟩⟨↓|
    pub z: Operator,
}

pub fn spin_ops() -> SpinOps {
    let mut raise = Matrix::zeros(2, 2);
    raise[(Spin::Up.index(), Spin::Down.index())] = ONE;
    let lower = raise.adjoint();
    let mut z = Matrix::zeros(2, 2);
    z[(0, 0)] = -ONE;
    z[(1, 1)] = ONE;
    SpinOps {
        raise: Operator::with_kind(raise, OperatorKind::General),
        lower: Operator::with_kind(lower, OperatorKind::General),
        z: Operator::with_kind(z, OperatorKind::Hermitian),
    }
}

/// Lift a single-factor operator to the full space: identities on every
/// other factor. Hermitian and unitary flags carry over.
pub fn embed(op: &Operator, site: usize, factor: Factor, layout: &HilbertLayout) -> Result<Operator> {
    layout.check_site(site)?;
    let d = layout.fock_cutoff();
    let k = match factor {
        Factor::Spin => 2,
        Factor::Mode => d,
    };
    if op.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: op.dim(),
        });
    }
    let site_dim = layout.site_dim();
    let before = site_dim.pow(site as u32);
    let after_sites = site_dim.pow((layout.n_ions() - 1 - site) as u32);
    let (left, right) = match factor {
        Factor::Spin => (before, d * after_sites),
        Factor::Mode => (before * 2, after_sites),
    };

    let dim = layout.dim();
    let mut m = Matrix::zeros(dim, dim);
    let local = op.matrix();
    for i in 0..k {
        for j in 0..k {
            let v = local[(i, j)];
            if v == ZERO {
                continue;
            }
            for l in 0..left {
                for r in 0..right {
                    m[((l * k + i) * right + r, (l * k + j) * right + r)] = v;
                }
            }
        }
    }
    Ok(Operator::with_kind(m, op.kind()))
}

/// Eigendecomposition of a Hermitian operator, reusable for `exp(-iHt)` at
/// many times.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl Spectrum {
    pub fn new(h: &Operator) -> Result<Self> {
        if h.kind() != OperatorKind::Hermitian {
            return Err(Error::NotHermitian(hermitian_deviation(h.matrix())));
        }
        let eig = SymmetricEigen::new(h.matrix().clone());
        Ok(Spectrum {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `exp(-iHt)`; negative `t` gives the time-reversed propagator.
    pub fn propagator(&self, t: f64) -> Operator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
        Operator::with_kind(scaled * v.adjoint(), OperatorKind::Unitary)
    }
}

/// `U = exp(-iHt)` by Hermitian eigendecomposition.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite time {t}")));
    }
    Ok(Spectrum::new(h)?.propagator(t))
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateData {
    Pure(Vector),
    Density(Matrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: HilbertLayout,
    data: StateData,
}

impl QuantumState {
    pub fn pure(layout: HilbertLayout, psi: Vector) -> Result<Self> {
        if psi.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: psi.len(),
            });
        }
        let norm = psi.norm_squared();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("norm² = {norm}")));
        }
        Ok(QuantumState {
            layout,
            data: StateData::Pure(psi),
        })
    }

    pub fn density(layout: HilbertLayout, rho: Matrix) -> Result<Self> {
        if rho.nrows() != layout.dim() || rho.ncols() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: rho.nrows(),
            });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidState(format!("trace = {tr}")));
        }
        let dev = hermitian_deviation(&rho);
        if dev > 1e-10 {
            return Err(Error::InvalidState(format!("non-Hermitian density, {dev:e}")));
        }
        Ok(QuantumState {
            layout,
            data: StateData::Density(rho),
        })
    }

    pub(crate) fn from_data(layout: HilbertLayout, data: StateData) -> Self {
        QuantumState { layout, data }
    }

    /// Product basis state.
    pub fn basis(layout: HilbertLayout, spins: &[Spin], phonons: &[usize]) -> Result<Self> {
        let idx = layout.index(spins, phonons)?;
        let mut psi = Vector::zeros(layout.dim());
        psi[idx] = ONE;
        Ok(QuantumState {
            layout,
            data: StateData::Pure(psi),
        })
    }

    /// All spins down with the given Fock occupations.
    pub fn fock(layout: HilbertLayout, phonons: &[usize]) -> Result<Self> {
        QuantumState::basis(layout, &vec![Spin::Down; layout.n_ions()], phonons)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&Vector> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Matrix {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn to_density(&self) -> QuantumState {
        QuantumState {
            layout: self.layout,
            data: StateData::Density(self.density_matrix()),
        }
    }

    /// ⟨ψ|ψ⟩ or Tr ρ.
    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Density(m) => m.trace().re,
        }
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.dim(),
                got: op.dim(),
            });
        }
        Ok(match &self.data {
            StateData::Pure(v) => v.dotc(&(op.matrix() * v)),
            StateData::Density(rho) => trace_product(op.matrix(), rho),
        })
    }

    /// Populations of every product-basis state.
    pub fn basis_populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Density(m) => (0..m.nrows()).map(|i| m[(i, i)].re).collect(),
        }
    }

    /// Population of Fock level `level` in mode `mode`, traced over everything else.
    pub fn mode_population(&self, mode: usize, level: usize) -> f64 {
        let pops = self.basis_populations();
        pops.iter()
            .enumerate()
            .filter(|(i, _)| self.layout.decode(*i).1[mode] == level)
            .map(|(_, p)| p)
            .sum()
    }

    /// Population sitting on the top Fock level of any mode; the largest one
    /// and the mode carrying it.
    pub fn boundary_population(&self) -> (usize, f64) {
        let top = self.layout.fock_cutoff() - 1;
        (0..self.layout.n_ions())
            .map(|m| (m, self.mode_population(m, top)))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }

    /// Smallest eigenvalue of ρ (0 for pure states up to rounding).
    pub fn min_eigenvalue(&self) -> f64 {
        let rho = self.density_matrix();
        let eig = SymmetricEigen::new(rho);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Density(m) => trace_product(m, m).re,
        }
    }
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Expectation values of projectors, clamped to `[0, 1]`.
pub fn populations(state: &QuantumState, projectors: &[Operator]) -> Result<Vec<f64>> {
    projectors
        .iter()
        .map(|p| {
            check_projector(p)?;
            let v = state.expectation(p)?.re;
            if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&v) {
                return Err(Error::InvalidState(format!("probability {v} out of range")));
            }
            Ok(v.clamp(0.0, 1.0))
        })
        .collect()
}

pub fn check_projector(p: &Operator) -> Result<()> {
    let m = p.matrix();
    let herm = hermitian_deviation(m);
    if herm > PROJECTOR_TOL {
        return Err(Error::NotProjector(format!("not Hermitian ({herm:e})")));
    }
    let idem = max_abs(&(m * m - m));
    if idem > PROJECTOR_TOL {
        return Err(Error::NotProjector(format!("P² ≠ P ({idem:e})")));
    }
    Ok(())
}

/// Diagonal projector onto every basis state accepted by `keep`.
pub fn diagonal_projector(
    layout: &HilbertLayout,
    keep: impl Fn(&[Spin], &[usize]) -> bool,
) -> Operator {
    let dim = layout.dim();
    let diag = Vector::from_fn(dim, |i, _| {
        let (s, n) = layout.decode(i);
        if keep(&s, &n) {
            ONE
        } else {
            ZERO
        }
    });
    Operator::with_kind(Matrix::from_diagonal(&diag), OperatorKind::Hermitian)
}

/// Projector onto the given phonon occupations, any spin configuration.
pub fn phonon_projector(layout: &HilbertLayout, phonons: &[usize]) -> Result<Operator> {
    if phonons.len() != layout.n_ions() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_ions(),
            got: phonons.len(),
        });
    }
    Ok(diagonal_projector(layout, |_, n| n == phonons))
}

/// Projector onto a spin configuration, any phonon occupations.
pub fn spin_projector(layout: &HilbertLayout, spins: &[Spin]) -> Result<Operator> {
    if spins.len() != layout.n_ions() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_ions(),
            got: spins.len(),
        });
    }
    Ok(diagonal_projector(layout, |s, _| s == spins))
}
