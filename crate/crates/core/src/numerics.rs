//! Dense complex linear algebra kernel.
//!
//! Thin deterministic layer over `nalgebra`: every routine that returns a basis
//! canonicalizes it (pivoted Gram-Schmidt on the subspace projector, leading
//! entry real-positive) so downstream golden values do not depend on the
//! internal rotation choices of the eigen/SVD backend.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Default tolerance shared by most checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;
/// Entries below this magnitude are skipped when choosing a phase reference.
const PHASE_EPS: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("eigen decomposition did not converge")]
    NoConvergence,
    #[error("matrix has non-finite entries")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, NumericsError>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| r(data[i * cols + j]))
}

pub fn real_vector(data: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(data.len(), data.iter().map(|&x| r(x)))
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m)[0]
}

pub fn vector_norm(v: &ComplexVector) -> f64 {
    v.norm()
}

/// `‖M − M*‖`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    operator_norm(&(m - m.adjoint()))
}

/// Rotates `v` so that its first entry of magnitude above `PHASE_EPS·‖v‖∞`
/// becomes real and positive.
pub fn normalize_phase(v: &mut ComplexVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > PHASE_EPS * scale) {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    /// `Σ f(λₖ) vₖvₖ*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            if fk == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            out += (v * v.adjoint()) * r(fk);
        }
        out
    }
}

/// Eigen decomposition of a Hermitian matrix with ascending eigenvalues.
///
/// The input is symmetrized before decomposition. Eigenvalues that agree
/// within `tol·‖M‖` are treated as one cluster whose basis is replaced by the
/// canonical basis of the cluster projector, so the output depends only on the
/// eigenspaces and not on backend rotations.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(NumericsError::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if !is_finite(m) {
        return Err(NumericsError::NonFinite);
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEig { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let norm = operator_norm(m);
    let defect = hermitian_defect(m);
    if defect > tol * norm.max(1.0) {
        return Err(NumericsError::NonHermitian { defect });
    }
    let sym = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER).ok_or(NumericsError::NoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    // Canonicalize each cluster of (numerically) equal eigenvalues.
    let cluster_tol = (tol * norm).max(1e-13);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        let block = vectors.columns(start, end - start).into_owned();
        let canon = canonical_basis(&block);
        vectors.columns_mut(start, end - start).copy_from(&canon);
        start = end;
    }
    Ok(HermitianEig { values, vectors })
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// `[−tol, tol]` are set to zero before the root is taken (`tol` is scaled by
/// `max(1, ‖M‖)`), so rounding noise in the kernel does not grow to `√ε`.
pub fn psd_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m, tol)?;
    let scale = eig.values.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if let Some(&lowest) = eig.values.first() {
        if lowest < -tol * scale {
            return Err(NumericsError::NotPsd { eigenvalue: lowest });
        }
    }
    let floor = tol * scale;
    let root = eig.map_spectrum(|x| if x <= floor { 0.0 } else { x.sqrt() });
    Ok((&root + root.adjoint()) * r(0.5))
}

/// Orthonormal basis of the column space of `m`. Singular values above
/// `tol·σ_max` count towards the rank; the basis is canonical (see module docs).
pub fn orthonormal_range(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return ComplexMatrix::zeros(rows, 0);
    }
    let svd = Svd::new(m);
    let sigma_max = svd.sigma_max();
    if sigma_max == 0.0 {
        return ComplexMatrix::zeros(rows, 0);
    }
    let u = &svd.u;
    let kept: Vec<usize> = (0..svd.sigma.len())
        .filter(|&k| svd.sigma[k] > tol * sigma_max)
        .collect();
    let mut basis = ComplexMatrix::zeros(rows, kept.len());
    for (dst, &src) in kept.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    canonical_basis(&basis)
}

/// Orthonormal basis of the kernel of `m`, singular values at most
/// `tol·max(σ_max, 1)` count as zero.
pub fn solve_linear_nullspace(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD yields a complete right basis.
    let rows = m.nrows().max(cols);
    let mut padded = ComplexMatrix::zeros(rows, cols);
    padded.rows_mut(0, m.nrows()).copy_from(m);
    let svd = Svd::new(&padded);
    let threshold = tol * svd.sigma_max().max(1.0);
    let kept: Vec<usize> = (0..svd.sigma.len())
        .filter(|&k| svd.sigma[k] <= threshold)
        .collect();
    let mut basis = ComplexMatrix::zeros(cols, kept.len());
    for (dst, &src) in kept.iter().enumerate() {
        basis.set_column(dst, &svd.v.column(src));
    }
    canonical_basis(&basis)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    Svd::new(m).sigma
}

/// Moore-Penrose pseudo-inverse, singular values at most `tol·σ_max` dropped.
pub fn pseudo_inverse(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return ComplexMatrix::zeros(cols, rows);
    }
    let svd = Svd::new(m);
    let sigma_max = svd.sigma_max();
    let mut out = ComplexMatrix::zeros(cols, rows);
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s > tol * sigma_max && s > 0.0 {
            out += (svd.v.column(k) * svd.u.column(k).adjoint()) * r(1.0 / s);
        }
    }
    out
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `M = U·diag(σ)·V*` by one-sided
/// (Hestenes) Jacobi, `σ` descending.
///
/// Used instead of `nalgebra`'s complex SVD, which returned factors that do
/// not reconstruct some small Hermitian inputs. For `rows ≥ cols` the factor
/// `V` is a full unitary, which the kernel computations rely on. Columns of
/// `U` belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn new(m: &ComplexMatrix) -> Self {
        if m.nrows() < m.ncols() {
            let t = Self::new(&m.adjoint());
            return Svd { u: t.v, sigma: t.sigma, v: t.u };
        }
        let (a, v) = jacobi_columns(m.clone());
        let k = a.ncols();
        let norms: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
        let mut u = ComplexMatrix::zeros(a.nrows(), k);
        let mut vs = ComplexMatrix::zeros(k, k);
        let mut sigma = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            let s = norms[src];
            if s > 0.0 {
                u.set_column(dst, &(a.column(src) * r(1.0 / s)));
            }
            vs.set_column(dst, &v.column(src));
            sigma.push(s);
        }
        Svd { u, sigma, v: vs }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }
}

/// Rotates column pairs of `a` until they are mutually orthogonal; returns
/// the rotated matrix and the accumulated unitary.
fn jacobi_columns(mut a: ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.ncols();
    let mut v = ComplexMatrix::identity(n, n);
    // Pairs coupled below this are numerically orthogonal; rotating them
    // would take a phase from subnormal inner products.
    let floor = f64::EPSILON.powi(3) * a.norm_squared();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= floor || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_pair(&mut a, p, q, cs, sn, phase);
                rotate_pair(&mut v, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

fn rotate_pair(m: &mut ComplexMatrix, p: usize, q: usize, cs: f64, sn: f64, phase: C64) {
    for row in 0..m.nrows() {
        let x = m[(row, p)];
        let y = m[(row, q)] * phase;
        m[(row, p)] = x * cs - y * sn;
        m[(row, q)] = x * sn + y * cs;
    }
}

/// Canonical orthonormal basis for the span of the orthonormal columns `q`:
/// pivoted Gram-Schmidt over the columns of the projector `qq*` (largest
/// residual first, lowest index on ties), then phase normalization.
fn canonical_basis(q: &ComplexMatrix) -> ComplexMatrix {
    let (n, k) = q.shape();
    if k == 0 {
        return q.clone();
    }
    let proj = q * q.adjoint();
    let mut out = ComplexMatrix::zeros(n, k);
    let mut residual = proj.clone();
    for col in 0..k {
        let mut best = 0;
        let mut best_norm = -1.0;
        for j in 0..n {
            let nj = residual.column(j).norm();
            if nj > best_norm + 1e-12 {
                best_norm = nj;
                best = j;
            }
        }
        let mut v: ComplexVector = residual.column(best).into_owned();
        // Re-orthogonalize against the accepted columns for stability.
        for _ in 0..2 {
            for prev in 0..col {
                let p = out.column(prev);
                let coef = p.dotc(&v);
                v -= p * coef;
            }
        }
        let nv = v.norm();
        if nv == 0.0 {
            break;
        }
        v /= r(nv);
        normalize_phase(&mut v);
        out.set_column(col, &v);
        let vv = &v * v.adjoint();
        residual -= &vv * &residual;
    }
    out
}

/// `Σᵢ Xᵢ Y Xᵢ*`.
pub fn kraus_apply(ops: &[ComplexMatrix], y: &ComplexMatrix) -> ComplexMatrix {
    let n = ops[0].nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for x in ops {
        out += x * y * x.adjoint();
    }
    out
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-major vectorization.
pub fn vec_col(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_iterator(m.len(), m.iter().cloned())
}

pub fn unvec_col(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_iterator(rows, cols, v.iter().cloned())
}

/// `‖M*M − 1‖`.
pub fn isometry_defect(m: &ComplexMatrix) -> f64 {
    let k = m.ncols();
    operator_norm(&(m.adjoint() * m - ComplexMatrix::identity(k, k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m7() -> ComplexMatrix {
        real_matrix(3, 3, &[1.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0])
    }

    fn decay_matrix() -> ComplexMatrix {
        real_matrix(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0])
    }

    #[test]
    fn rank_one_complement_projector() {
        // nalgebra's complex SVD did not reconstruct this matrix.
        let w = ComplexVector::from_vec(vec![c(-0.7553, -0.6081), c(-0.2275, 0.0890)]);
        let w = &w / r(w.norm());
        let p = ComplexMatrix::identity(2, 2) - &w * w.adjoint();
        let basis = orthonormal_range(&p, 1e-9);
        assert_eq!(basis.ncols(), 1);
        assert!(w.dotc(&basis.column(0)).norm() < 1e-14);
        let sv = singular_values(&p);
        assert!((sv[0] - 1.0).abs() < 1e-14 && sv[1] < 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix_with_zero_columns() {
        let m = ComplexMatrix::from_fn(2, 5, |i, j| c((i * j) as f64 + 1.0, (i + 2 * j) as f64));
        let mut wide = ComplexMatrix::zeros(2, 7);
        wide.columns_mut(0, 5).copy_from(&m);
        let kernel = solve_linear_nullspace(&wide, 1e-9);
        assert_eq!(kernel.ncols(), 5);
        assert!((&wide * &kernel).norm() < 1e-13);
        assert!(isometry_defect(&kernel) < 1e-13);
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eig(&ComplexMatrix::identity(3, 3), 1e-12).unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(isometry_defect(&eig.vectors) < 1e-14);
    }

    #[test]
    fn m7_and_decay_matrix_spectra() {
        let eig = hermitian_eig(&m7(), 1e-12).unwrap();
        for (got, want) in eig.values.iter().zip([0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        let eig = hermitian_eig(&decay_matrix(), 1e-12).unwrap();
        for (got, want) in eig.values.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
        assert!((operator_norm(&decay_matrix()) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect, 1e-10), Err(NumericsError::NonSquare { .. })));
        let m = real_matrix(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(hermitian_eig(&m, 1e-10), Err(NumericsError::NonHermitian { .. })));
        let mut nan = ComplexMatrix::identity(2, 2);
        nan[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(hermitian_eig(&nan, 1e-10), Err(NumericsError::NonFinite)));
    }

    #[test]
    fn eigenvector_phase_convention() {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => r(2.0),
            (1, 1) => r(1.0),
            (0, 1) => c(0.0, 0.5),
            _ => c(0.0, -0.5),
        });
        let eig = hermitian_eig(&m, 1e-12).unwrap();
        for k in 0..2 {
            let col = eig.vectors.column(k);
            let lead = col.iter().find(|z| z.norm() > 1e-8).unwrap();
            assert!(lead.im.abs() < 1e-14 && lead.re > 0.0);
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        let diag = real_matrix(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let root = psd_sqrt(&diag, 1e-10).unwrap();
        assert!((root - real_matrix(2, 2, &[2.0, 0.0, 0.0, 3.0])).norm() < 1e-14);

        let root = psd_sqrt(&(m7() * r(1.0 / 3.0)), 1e-10).unwrap();
        let want = m7() * r(1.0 / 6f64.sqrt());
        assert!((root - want).norm() < 1e-14);

        let zero = ComplexMatrix::zeros(3, 3);
        assert!(psd_sqrt(&zero, 1e-10).unwrap().norm() == 0.0);

        let neg = real_matrix(2, 2, &[1.0, 0.0, 0.0, -0.1]);
        assert!(matches!(psd_sqrt(&neg, 1e-10), Err(NumericsError::NotPsd { .. })));
        let tiny_neg = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        assert!(psd_sqrt(&tiny_neg, 1e-10).is_ok());
    }

    #[test]
    fn orthonormal_range_examples() {
        assert_eq!(orthonormal_range(&ComplexMatrix::identity(2, 2), 1e-10).ncols(), 2);
        let ones = real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = orthonormal_range(&ones, 1e-10);
        assert_eq!(b.ncols(), 1);
        let s = 1.0 / 2f64.sqrt();
        assert!((b[(0, 0)] - r(s)).norm() < 1e-14 && (b[(1, 0)] - r(s)).norm() < 1e-14);
        assert_eq!(orthonormal_range(&ComplexMatrix::zeros(3, 3), 1e-10).ncols(), 0);
    }

    #[test]
    fn nullspace_of_m7() {
        let ns = solve_linear_nullspace(&m7(), 1e-10);
        assert_eq!(ns.ncols(), 2);
        let proj = &ns * ns.adjoint();
        let s = 1.0 / 2f64.sqrt();
        for v in [real_vector(&[0.0, 1.0, 0.0]), real_vector(&[s, 0.0, s])] {
            assert!((&proj * &v - &v).norm() < 1e-13);
        }
        // canonical: the pivot picks (0,1,0) first
        assert!((ns.column(0) - real_vector(&[0.0, 1.0, 0.0])).norm() < 1e-13);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = real_matrix(1, 3, &[1.0, 1.0, 0.0]);
        let ns = solve_linear_nullspace(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-13);
    }

    #[test]
    fn pseudo_inverse_of_tall_matrix() {
        let m = real_matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let p = pseudo_inverse(&m, 1e-12);
        assert!((&p * &m - ComplexMatrix::identity(2, 2)).norm() < 1e-13);
    }
}
