//! Hermitian matrices, the real Frobenius inner product and dense solves over
//! the real vector space of Hermitian matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative eigenvalue cutoff used by the PSD and PD tests.
pub const PSD_TOL: f64 = 1e-10;
/// Relative residual target of `solve_hermitian_operator`.
pub const SOLVE_TOL: f64 = 1e-12;
/// Condition estimates above this are reported as singular.
pub const COND_LIMIT: f64 = 1e13;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes the input so the invariant holds exactly,
/// including real diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        project_hermitian(&m)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        project_hermitian(&to_complex(m))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        HermitianMatrix {
            m: CMatrix::identity(n, n) * Complex64::new(s, 0.0),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        HermitianMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    /// Drops the imaginary part (still Hermitian: the real part of a
    /// Hermitian matrix is symmetric).
    pub fn real_part(&self) -> Self {
        HermitianMatrix {
            m: self.m.map(|z| Complex64::new(z.re, 0.0)),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix {
            m: &self.m * Complex64::new(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianMatrix {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianMatrix {
            m: &self.m - &other.m,
        }
    }

    /// `self + alpha * other`, re-projected so rounding cannot break symmetry.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        hermitian_part(&(&self.m + &other.m * Complex64::new(alpha, 0.0)))
    }

    pub fn norm_fro(&self) -> f64 {
        self.m.norm()
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors as columns.
    pub fn eigh(&self) -> (DVector<f64>, CMatrix) {
        let n = self.dim();
        let eig = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vectors.set_column(k, &eig.eigenvectors.column(i));
        }
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let v = self.eigenvalues();
        v[v.len() - 1]
    }

    pub fn min_eigenpair(&self) -> (f64, CVector) {
        let (v, w) = self.eigh();
        (v[0], w.column(0).into_owned())
    }

    /// Largest eigenvalue magnitude, which is the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Applies `f` to every eigenvalue.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (v, w) = self.eigh();
        let mut scaled = w.clone();
        for (j, lam) in v.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(*lam));
        }
        hermitian_part(&(scaled * w.adjoint()))
    }

    /// Inverse of a nonsingular Hermitian matrix.
    pub fn inverse(&self) -> Result<Self> {
        let (v, _) = self.eigh();
        let big = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let small = v.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
        if big == 0.0 || small <= big / COND_LIMIT {
            let condition = if small == 0.0 { f64::INFINITY } else { big / small };
            return Err(Error::SingularOperator { condition });
        }
        Ok(self.map_spectrum(|x| 1.0 / x))
    }

    /// `tᴴ · self · t`.
    pub fn congruence(&self, t: &CMatrix) -> Self {
        hermitian_part(&(t.adjoint() * &self.m * t))
    }

    /// Natural log of the determinant of a positive definite matrix.
    pub fn ln_det_pd(&self) -> Result<f64> {
        match self.m.clone().cholesky() {
            Some(c) => Ok(2.0 * c.l_dirty().diagonal().iter().map(|z| z.re.ln()).sum::<f64>()),
            None => Err(Error::NotPd {
                min_eig: self.min_eigenvalue(),
            }),
        }
    }
}

/// Symmetrizes a square matrix that is known to be square.
pub(crate) fn hermitian_part(m: &CMatrix) -> HermitianMatrix {
    let n = m.nrows();
    let mut h = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    HermitianMatrix { m: h }
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `(M + Mᴴ)/2`.
pub fn project_hermitian(m: &CMatrix) -> Result<HermitianMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(hermitian_part(m))
}

/// `Re tr(Xᴴ Y)`.
pub fn frobenius_real_inner(x: &CMatrix, y: &CMatrix) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "inner product of {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum())
}

pub(crate) fn inner(x: &HermitianMatrix, y: &HermitianMatrix) -> f64 {
    x.m.iter().zip(y.m.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub fn min_eigenvalue(h: &HermitianMatrix) -> f64 {
    h.min_eigenvalue()
}

pub fn min_eigenpair(h: &HermitianMatrix) -> (f64, CVector) {
    h.min_eigenpair()
}

/// Hermitian square root, with its inverse when the input is definite.
#[derive(Clone, Debug)]
pub struct SqrtFactor {
    pub root: HermitianMatrix,
    pub inv_root: Option<HermitianMatrix>,
}

pub fn hermitian_sqrt(p: &HermitianMatrix, require_pd: bool) -> Result<SqrtFactor> {
    let (v, w) = p.eigh();
    let norm = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = PSD_TOL * norm;
    let min_eig = v[0];
    if min_eig < -tol {
        return Err(Error::NotPsd { min_eig });
    }
    if require_pd && (min_eig <= tol || norm == 0.0) {
        return Err(Error::NotPd { min_eig });
    }
    let build = |f: &dyn Fn(f64) -> f64| {
        let mut scaled = w.clone();
        for (j, lam) in v.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(*lam));
        }
        hermitian_part(&(scaled * w.adjoint()))
    };
    let root = build(&|x| x.max(0.0).sqrt());
    let inv_root = if require_pd {
        Some(build(&|x| 1.0 / x.sqrt()))
    } else {
        None
    };
    Ok(SqrtFactor { root, inv_root })
}

/// Orthonormal basis of the Hermitian (or real symmetric) matrices under
/// the real Frobenius inner product.
///
/// Ordering: diagonal units, then `(e_ij + e_ji)/√2` for `i < j`, then for
/// complex data `i(e_ij − e_ji)/√2` for `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianBasis {
    pub n: usize,
    pub real: bool,
}

impl HermitianBasis {
    pub fn new(n: usize, real: bool) -> Self {
        HermitianBasis { n, real }
    }

    pub fn dim(&self) -> usize {
        if self.real {
            self.n * (self.n + 1) / 2
        } else {
            self.n * self.n
        }
    }

    pub fn coords(&self, h: &HermitianMatrix) -> DVector<f64> {
        let n = self.n;
        let mut c = DVector::zeros(self.dim());
        let mut k = 0;
        for i in 0..n {
            c[k] = h.m[(i, i)].re;
            k += 1;
        }
        for i in 0..n {
            for j in i + 1..n {
                c[k] = SQRT_2 * h.m[(i, j)].re;
                k += 1;
            }
        }
        if !self.real {
            for i in 0..n {
                for j in i + 1..n {
                    c[k] = SQRT_2 * h.m[(i, j)].im;
                    k += 1;
                }
            }
        }
        c
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> HermitianMatrix {
        let n = self.n;
        let mut m = CMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            m[(i, i)] = Complex64::new(c[k], 0.0);
            k += 1;
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = c[k] / SQRT_2;
                m[(i, j)] = Complex64::new(v, 0.0);
                m[(j, i)] = Complex64::new(v, 0.0);
                k += 1;
            }
        }
        if !self.real {
            for i in 0..n {
                for j in i + 1..n {
                    let v = c[k] / SQRT_2;
                    m[(i, j)].im = v;
                    m[(j, i)].im = -v;
                    k += 1;
                }
            }
        }
        HermitianMatrix { m }
    }

    /// Basis element `k` as `(i, j, α)` meaning `α e_i e_jᵀ + ᾱ e_j e_iᵀ`
    /// for `i ≠ j`, or `e_i e_iᵀ` when `i = j`.
    fn element_spec(&self, k: usize) -> (usize, usize, Complex64) {
        let n = self.n;
        if k < n {
            return (k, k, Complex64::new(1.0, 0.0));
        }
        let pairs = n * (n - 1) / 2;
        let (offset, alpha) = if k < n + pairs {
            (k - n, Complex64::new(1.0 / SQRT_2, 0.0))
        } else {
            (k - n - pairs, Complex64::new(0.0, 1.0 / SQRT_2))
        };
        let mut rem = offset;
        for i in 0..n {
            let row = n - i - 1;
            if rem < row {
                return (i, i + 1 + rem, alpha);
            }
            rem -= row;
        }
        unreachable!("basis index out of range")
    }

    pub fn element(&self, k: usize) -> HermitianMatrix {
        let mut c = DVector::zeros(self.dim());
        c[k] = 1.0;
        self.from_coords(&c)
    }
}

/// Real-linear map on Hermitian matrices stored as a dense real matrix in
/// the coordinates of a `HermitianBasis`.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    basis: HermitianBasis,
    matrix: DMatrix<f64>,
}

impl HermitianOperator {
    /// Assembles the operator column by column. For a real basis the map
    /// must send real symmetric matrices to real symmetric matrices.
    pub fn from_map(
        n: usize,
        real: bool,
        f: impl Fn(&HermitianMatrix) -> HermitianMatrix,
    ) -> Self {
        let basis = HermitianBasis::new(n, real);
        let d = basis.dim();
        let mut matrix = DMatrix::zeros(d, d);
        for k in 0..d {
            let image = f(&basis.element(k));
            matrix.set_column(k, &basis.coords(&image));
        }
        HermitianOperator { basis, matrix }
    }

    /// Assembles `Δ ↦ Σ_k M_k Δ N_k`. Each basis element has rank at most
    /// two, so a column costs `O(n²)` per term instead of a matrix product.
    /// The sum must map Hermitian matrices to Hermitian matrices.
    pub fn from_kronecker_terms(n: usize, real: bool, terms: &[(CMatrix, CMatrix)]) -> Self {
        let basis = HermitianBasis::new(n, real);
        let d = basis.dim();
        let mut matrix = DMatrix::zeros(d, d);
        let rows: Vec<Vec<CVector>> = terms
            .iter()
            .map(|(_, right)| (0..n).map(|j| right.row(j).transpose()).collect())
            .collect();
        let one = Complex64::new(1.0, 0.0);
        let mut out = CMatrix::zeros(n, n);
        for k in 0..d {
            let (i, j, alpha) = basis.element_spec(k);
            out.fill(Complex64::new(0.0, 0.0));
            for (t, (left, _)) in terms.iter().enumerate() {
                if i == j {
                    out.ger(one, &left.column(i), &rows[t][i], one);
                } else {
                    out.ger(alpha, &left.column(i), &rows[t][j], one);
                    out.ger(alpha.conj(), &left.column(j), &rows[t][i], one);
                }
            }
            matrix.set_column(k, &basis.coords(&hermitian_part(&out)));
        }
        HermitianOperator { basis, matrix }
    }

    pub fn from_matrix(basis: HermitianBasis, matrix: DMatrix<f64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::Shape(format!(
                "operator matrix {:?} does not match basis dimension {d}",
                matrix.shape()
            )));
        }
        Ok(HermitianOperator { basis, matrix })
    }

    pub fn dim(&self) -> usize {
        self.basis.n
    }

    pub fn basis(&self) -> HermitianBasis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, h: &HermitianMatrix) -> HermitianMatrix {
        self.basis.from_coords(&(&self.matrix * self.basis.coords(h)))
    }
}

/// Solves `L(Δ) = rhs` by LU on the dense coordinate matrix, with one or two
/// steps of iterative refinement.
pub fn solve_hermitian_operator(
    op: &HermitianOperator,
    rhs: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if rhs.dim() != op.dim() {
        return Err(Error::Shape(format!(
            "rhs is {0}x{0}, operator acts on {1}x{1}",
            rhs.dim(),
            op.dim()
        )));
    }
    let a = &op.matrix;
    let lu = a.clone().lu();
    let inv = match lu.try_inverse() {
        Some(inv) => inv,
        None => {
            return Err(Error::SingularOperator {
                condition: f64::INFINITY,
            })
        }
    };
    let condition = norm1(a) * norm1(&inv);
    if !condition.is_finite() || condition > COND_LIMIT {
        return Err(Error::SingularOperator { condition });
    }
    let b = op.basis.coords(rhs);
    let mut x = &inv * &b;
    let b_norm = b.norm();
    for _ in 0..2 {
        let r = &b - a * &x;
        if r.norm() <= SOLVE_TOL * b_norm {
            break;
        }
        x += &inv * r;
    }
    Ok(op.basis.from_coords(&x))
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a, v| a.max(*v))
}

/// Inverse of a general square matrix, refusing numerically singular input.
pub fn checked_inverse(m: &CMatrix) -> Option<CMatrix> {
    let sv = m.clone().svd(false, false).singular_values;
    let big = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    let small = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if big == 0.0 || small <= big * f64::EPSILON * (m.nrows() as f64) {
        return None;
    }
    m.clone().lu().try_inverse()
}
