//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here is sized for qudits up to d = 8 plus a control qubit, so
//! the backing store is a plain dense `nalgebra` matrix and eigenproblems go
//! through the Hermitian eigensolver. Values are immutable after
//! construction; all operations are pure functions.
//!
//! Convention used across the whole crate: when a system is paired with the
//! control qubit, the control is always the *second* tensor factor.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Global numerical tolerances (double precision, dimensions ≤ 16).
pub mod tol {
    /// Entrywise Hermiticity tolerance for state validation.
    pub const HERMITICITY: f64 = 1e-12;
    /// Unit-trace tolerance for state validation.
    pub const TRACE: f64 = 1e-12;
    /// Eigenvalue floor for positive semidefiniteness checks.
    pub const POSITIVITY: f64 = 1e-10;
    /// Tolerance on Σ K†K = 𝕀 for trace-preserving Kraus sets.
    pub const KRAUS_COMPLETENESS: f64 = 1e-10;
    /// Hermiticity tolerance accepted by the eigensolver entry point.
    pub const EIGEN_HERMITICITY: f64 = 1e-10;
}

/// A square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    m: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Contract(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.is_empty() {
            return Err(Error::Contract("matrix dimension must be positive".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Contract("matrix entries must be finite".into()));
        }
        Ok(Self { m })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row-major nested slices.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Contract("rows must form a square matrix".into()));
        }
        Self::from_fn(dim, |i, j| rows[i][j])
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// Outer product |u⟩⟨v| of two equal-length vectors.
    pub fn outer(u: &[C64], v: &[C64]) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::Contract("outer product needs equal nonzero lengths".into()));
        }
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { m: self.m.map(|z| z * s) }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    /// K X K† sandwich, the basic Kraus-term application.
    pub fn sandwich(&self, x: &Self) -> Self {
        Self {
            m: &self.m * &x.m * self.m.adjoint(),
        }
    }

    /// Largest entry magnitude, used for ‖·‖_max contract checks.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                if (self.m[(i, j)] - self.m[(j, i)].conj()).norm() > tolerance {
                    return false;
                }
            }
        }
        true
    }
}

/// A d×d Hermitian, unit-trace, positive-semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12 entrywise), unit trace (1e-12) and
    /// positivity (eigenvalues ≥ −1e-10) before accepting the matrix.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, tol::HERMITICITY, tol::TRACE, tol::POSITIVITY)
    }

    pub fn with_tolerances(
        m: ComplexMatrix,
        hermiticity: f64,
        trace: f64,
        positivity: f64,
    ) -> Result<Self> {
        if !m.is_hermitian(hermiticity) {
            return Err(Error::Contract(
                "density matrix must be Hermitian within tolerance".into(),
            ));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > trace || tr.im.abs() > trace {
            return Err(Error::Contract(format!(
                "density matrix trace must be 1, got {}+{}i",
                tr.re, tr.im
            )));
        }
        let eigs = hermitian_eigenvalues(&m)?;
        if eigs.first().copied().unwrap_or(0.0) < -positivity {
            return Err(Error::Contract(format!(
                "density matrix must be positive semidefinite, min eigenvalue {:e}",
                eigs[0]
            )));
        }
        Ok(Self { m })
    }

    /// Pure state |ψ⟩⟨ψ| from an (unnormalized) ket.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::Contract("ket must be nonzero".into()));
        }
        let m = ComplexMatrix::outer(ket, ket)?.scale_re(1.0 / norm2);
        Self::new(m)
    }

    /// Computational basis state |i⟩⟨i| in dimension d.
    pub fn basis_state(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::Domain(format!("basis index {i} out of range for dim {dim}")));
        }
        let mut ket = vec![C64::new(0.0, 0.0); dim];
        ket[i] = C64::new(1.0, 0.0);
        Self::pure(&ket)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    /// Qubit state from a Bloch vector with |r| ≤ 1.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if r2 > 1.0 + 1e-12 {
            return Err(Error::Domain("Bloch vector must satisfy |r| <= 1".into()));
        }
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new((1.0 + z) / 2.0, 0.0), C64::new(x / 2.0, -y / 2.0)],
            vec![C64::new(x / 2.0, y / 2.0), C64::new((1.0 - z) / 2.0, 0.0)],
        ])?;
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m.get(i, j)
    }
}

/// σ_x, σ_y, σ_z and the 2×2 identity.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
    .expect("static matrix")
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
    .expect("static matrix")
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
    .expect("static matrix")
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
///
/// The decomposition is accepted only if the input is Hermitian within
/// 1e-10 and V Λ V† reproduces the input within 1e-10, so a silent
/// eigensolver failure cannot leak into downstream trace norms.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_hermitian(tol::EIGEN_HERMITICITY) {
        return Err(Error::Contract("eigensolver input must be Hermitian".into()));
    }
    // Symmetrize the rounding noise so the solver sees an exactly Hermitian matrix.
    let d = m.dim();
    let mut sym = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            sym[(i, j)] = (m.as_inner()[(i, j)] + m.as_inner()[(j, i)].conj()) * C64::new(0.5, 0.0);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(sym.clone());

    // Reconstruction check: ‖m − VΛV†‖_max ≤ 1e-10.
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&v| C64::new(v, 0.0)),
    ));
    let recon = &eig.eigenvectors * lambda * eig.eigenvectors.adjoint();
    let err = (&sym - recon).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if err > 1e-10 {
        return Err(Error::Contract(format!(
            "eigendecomposition reconstruction error {err:e} exceeds 1e-10"
        )));
    }

    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(vals)
}

/// Trace distance D(a, b) = ½‖a − b‖₁ via the spectrum of the Hermitian
/// difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a.matrix().sub(b.matrix());
    let eigs = hermitian_eigenvalues(&diff)?;
    let d = 0.5 * eigs.iter().map(|v| v.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        m: a.as_inner().kronecker(b.as_inner()),
    }
}

/// Partial trace over the control qubit (second tensor factor).
///
/// `joint` lives on system ⊗ control with the control as the trailing
/// factor; the result is the `system_dim`-dimensional reduced operator.
pub fn partial_trace_control(joint: &ComplexMatrix, system_dim: usize) -> Result<ComplexMatrix> {
    if joint.dim() != system_dim * 2 {
        return Err(Error::DimensionMismatch {
            expected: system_dim * 2,
            found: joint.dim(),
        });
    }
    ComplexMatrix::from_fn(system_dim, |i, j| {
        joint.get(2 * i, 2 * j) + joint.get(2 * i + 1, 2 * j + 1)
    })
}

/// Choi matrix of a linear map: (𝕀 ⊗ Φ) applied to the maximally entangled
/// state |ψ⟩ = (1/√d) Σ_i |ii⟩.
///
/// The map is only probed on density matrices; the action on off-diagonal
/// units |i⟩⟨j| is recovered by polarization, which is exact for linear maps.
pub fn choi_matrix(
    dim: usize,
    map: impl Fn(&DensityMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);

    // Φ(|i⟩⟨i|) directly, Φ(|i⟩⟨j|) for i≠j via
    // |i⟩⟨j| = |u⟩⟨u| + i|v⟩⟨v| − (1+i)(|i⟩⟨i| + |j⟩⟨j|)/2,
    // |u⟩ = (|i⟩+|j⟩)/√2, |v⟩ = (|i⟩+i|j⟩)/√2.
    let mut diag = Vec::with_capacity(dim);
    for i in 0..dim {
        let rho = DensityMatrix::basis_state(dim, i)?;
        diag.push(map(&rho)?);
    }

    let mut blocks: Vec<Vec<ComplexMatrix>> = vec![vec![ComplexMatrix::zeros(dim); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                blocks[i][j] = diag[i].clone();
                continue;
            }
            let mut ket_u = vec![zero; dim];
            ket_u[i] = one;
            ket_u[j] = one;
            let mut ket_v = vec![zero; dim];
            ket_v[i] = one;
            ket_v[j] = im;
            let phi_u = map(&DensityMatrix::pure(&ket_u)?)?;
            let phi_v = map(&DensityMatrix::pure(&ket_v)?)?;
            let half = (one + im).scale(0.5);
            let corr = diag[i].add(&diag[j]).scale(half);
            blocks[i][j] = phi_u.add(&phi_v.scale(im)).sub(&corr);
        }
    }

    // Choi = (1/d) Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)
    ComplexMatrix::from_fn(dim * dim, |r, c| {
        let (i, a) = (r / dim, r % dim);
        let (j, b) = (c / dim, c % dim);
        blocks[i][j].get(a, b) / C64::new(dim as f64, 0.0)
    })
}
