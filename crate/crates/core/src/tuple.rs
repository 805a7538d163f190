//! Row contractions `A = (A₁, …, A_d)` on `ℂⁿ`, their invariant vector
//! states and the block form relative to `ℂΩ ⊕ ℋ̊`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::numerics::{
    self, c, hermitian_eig, kron, normalize_phase, operator_norm, r, solve_linear_nullspace,
    unvec_col, ComplexMatrix, Svd, ComplexVector, NumericsError, C64, DEFAULT_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TupleError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("tuple is not coisometric (‖ΣAᵢAᵢ* − 1‖ = {defect:.3e})")]
    NotCoisometric { defect: f64 },
    #[error("no invariant vector state: {0}")]
    NoVectorState(String),
    #[error("invariant state is not unique (fixed-point space has dimension {dim})")]
    NonUniqueVectorState { dim: usize },
    #[error("Ω is not a common eigenvector of the adjoints (residual {residual:.3e})")]
    EigenvectorMismatch { residual: f64 },
    #[error(
        "ergodicity inconclusive: fixed-point space is 1-dimensional but s_n stalls at {last_norm:.3e} (fitted ratio {ratio:.4})"
    )]
    Inconclusive { last_norm: f64, ratio: f64 },
    #[error("tuple is not ergodic (fixed-point space dimension {fixed_point_dim})")]
    NotErgodic { fixed_point_dim: usize },
    #[error("random generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, TupleError>;

/// A `d`-tuple of `n×n` complex matrices, `d ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowContraction {
    mats: Vec<ComplexMatrix>,
}

impl RowContraction {
    pub fn new(mats: Vec<ComplexMatrix>) -> Result<Self> {
        if mats.len() < 2 {
            return Err(TupleError::DimensionMismatch(format!(
                "need at least 2 operators, got {}",
                mats.len()
            )));
        }
        let n = mats[0].nrows();
        if n == 0 {
            return Err(TupleError::DimensionMismatch("empty matrices".into()));
        }
        for (i, m) in mats.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(TupleError::DimensionMismatch(format!(
                    "A{} is {}x{}, expected {n}x{n}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !numerics::is_finite(m) {
                return Err(TupleError::DimensionMismatch(format!("A{} has non-finite entries", i + 1)));
            }
        }
        Ok(Self { mats })
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn n(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn mats(&self) -> &[ComplexMatrix] {
        &self.mats
    }

    /// `Aᵢ` with a zero-based index.
    pub fn get(&self, i: usize) -> &ComplexMatrix {
        &self.mats[i]
    }

    /// `ΣAᵢAᵢ*`.
    pub fn row_gram(&self) -> ComplexMatrix {
        let n = self.n();
        self.mats
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, a| acc + a * a.adjoint())
    }

    /// The column `[A₁*; …; A_d*] : ℂⁿ → ⊕ᵈℂⁿ` (`dn×n`).
    pub fn adjoint_column(&self) -> ComplexMatrix {
        let (d, n) = (self.d(), self.n());
        let mut out = ComplexMatrix::zeros(d * n, n);
        for (i, a) in self.mats.iter().enumerate() {
            out.view_mut((i * n, 0), (n, n)).copy_from(&a.adjoint());
        }
        out
    }

    /// `A_α = A_{α₁}⋯A_{α_m}`, letters one-based.
    pub fn word_product(&self, letters: &[usize]) -> ComplexMatrix {
        let n = self.n();
        letters
            .iter()
            .fold(ComplexMatrix::identity(n, n), |acc, &l| acc * &self.mats[l - 1])
    }

    /// `(UA₁U*, …, UA_dU*)`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            mats: self.mats.iter().map(|a| u * a * u.adjoint()).collect(),
        }
    }

    /// Block-diagonal direct sum `(A₁ ⊕ B₁, …)`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(TupleError::DimensionMismatch("direct sum of tuples with different d".into()));
        }
        let (n, m) = (self.n(), other.n());
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut out = ComplexMatrix::zeros(n + m, n + m);
                out.view_mut((0, 0), (n, n)).copy_from(a);
                out.view_mut((n, n), (m, m)).copy_from(b);
                out
            })
            .collect();
        Self::new(mats)
    }

    /// Superoperator of `x ↦ ΣAᵢxAᵢ*` on column-major `vec(x)`.
    pub fn kraus_superoperator(&self) -> ComplexMatrix {
        let n = self.n();
        self.mats
            .iter()
            .fold(ComplexMatrix::zeros(n * n, n * n), |acc, a| acc + kron(&a.map(|z| z.conj()), a))
    }

    /// Superoperator of the predual `ρ ↦ ΣAᵢ*ρAᵢ`.
    pub fn predual_superoperator(&self) -> ComplexMatrix {
        let n = self.n();
        self.mats
            .iter()
            .fold(ComplexMatrix::zeros(n * n, n * n), |acc, a| acc + kron(&a.transpose(), &a.adjoint()))
    }
}

/// The tuple of the worked example on `ℂ³`: entries `0, ±1/√2`.
pub fn section7() -> RowContraction {
    let s = 1.0 / 2f64.sqrt();
    let a1 = numerics::real_matrix(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0]) * r(s);
    let a2 = numerics::real_matrix(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]) * r(s);
    RowContraction::new(vec![a1, a2]).expect("static example is well formed")
}

/// The one-dimensional tuple `Aᵢ = ωᵢ` on `ℂ¹`.
pub fn scalar_tuple(omega: &[C64]) -> Result<RowContraction> {
    RowContraction::new(omega.iter().map(|&w| ComplexMatrix::from_element(1, 1, w)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// `‖ΣAᵢAᵢ*‖`, the square of the row norm.
    pub contraction_norm: f64,
    /// `‖ΣAᵢAᵢ* − 1‖`.
    pub coisometry_defect: f64,
    pub is_contraction: bool,
    pub is_coisometric: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.is_contraction && self.is_coisometric
    }
}

pub fn validate(tuple: &RowContraction, tol: f64) -> ValidationReport {
    let gram = tuple.row_gram();
    let n = tuple.n();
    let contraction_norm = operator_norm(&gram);
    let coisometry_defect = operator_norm(&(gram - ComplexMatrix::identity(n, n)));
    ValidationReport {
        contraction_norm,
        coisometry_defect,
        is_contraction: contraction_norm <= 1.0 + tol,
        is_coisometric: coisometry_defect <= tol,
    }
}

/// Invariant vector state: unit `Ω` and `ω` with `Aᵢ*Ω = ω̄ᵢΩ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorState {
    pub omega_h: ComplexVector,
    pub omega: ComplexVector,
}

fn eigen_tol(tol: f64) -> f64 {
    (1e3 * tol).max(1e-9)
}

/// `maxᵢ ‖Aᵢ*Ω − ω̄ᵢΩ‖`.
pub fn eigenvector_residual(tuple: &RowContraction, omega_h: &ComplexVector, omega: &ComplexVector) -> f64 {
    tuple
        .mats()
        .iter()
        .zip(omega.iter())
        .map(|(a, w)| (a.adjoint() * omega_h - omega_h * w.conj()).norm())
        .fold(0.0, f64::max)
}

/// Finds the invariant vector state from the fixed points of the predual map
/// `ρ ↦ ΣAᵢ*ρAᵢ`. The fixed-point space must be one-dimensional and spanned
/// by a rank-one positive matrix `|Ω⟩⟨Ω|`.
pub fn find_invariant_vector_state(tuple: &RowContraction, tol: f64) -> Result<VectorState> {
    let report = validate(tuple, tol);
    if !report.is_coisometric {
        return Err(TupleError::NotCoisometric { defect: report.coisometry_defect });
    }
    let n = tuple.n();
    let shifted = tuple.predual_superoperator() - ComplexMatrix::identity(n * n, n * n);
    let fixed = solve_linear_nullspace(&shifted, tol);
    match fixed.ncols() {
        0 => return Err(TupleError::NoVectorState("predual map has no fixed point".into())),
        1 => {}
        dim => return Err(TupleError::NonUniqueVectorState { dim }),
    }
    let x = unvec_col(&fixed.column(0).into_owned(), n, n);
    // The fixed-point space is closed under adjoints; pick a nonzero Hermitian element.
    let h1 = &x + x.adjoint();
    let h2 = (&x - x.adjoint()) * c(0.0, 1.0);
    let mut h = if h1.norm() >= h2.norm() { h1 } else { h2 };
    if h.trace().re < 0.0 {
        h = -h;
    }
    let eig = hermitian_eig(&h, tol.max(1e-12))?;
    let top = *eig.values.last().expect("n ≥ 1");
    let rank_tol = eigen_tol(tol) * top.abs().max(f64::MIN_POSITIVE);
    if top <= 0.0 || eig.values[..n - 1].iter().any(|v| v.abs() > rank_tol) {
        return Err(TupleError::NoVectorState(
            "the invariant state is not a vector state (fixed point has rank > 1)".into(),
        ));
    }
    let mut omega_h: ComplexVector = eig.vectors.column(n - 1).into_owned();
    omega_h /= r(omega_h.norm());
    let omega = refine_common_eigenvector(tuple, &mut omega_h);
    let residual = eigenvector_residual(tuple, &omega_h, &omega);
    if residual > eigen_tol(tol) {
        return Err(TupleError::NoVectorState(format!("eigenvector residual {residual:.3e}")));
    }
    Ok(VectorState { omega_h, omega })
}

fn eigenvalues_at(tuple: &RowContraction, omega_h: &ComplexVector) -> ComplexVector {
    ComplexVector::from_iterator(tuple.d(), tuple.mats().iter().map(|a| omega_h.dotc(&(a * omega_h))))
}

/// Sharpens `Ω` to the smallest right singular vector of the stacked
/// `[Aᵢ* − ω̄ᵢ1]`, alternating with `ωᵢ = ⟨Ω, AᵢΩ⟩`.
fn refine_common_eigenvector(tuple: &RowContraction, omega_h: &mut ComplexVector) -> ComplexVector {
    let n = tuple.n();
    let id = ComplexMatrix::identity(n, n);
    let mut omega = eigenvalues_at(tuple, omega_h);
    for _ in 0..3 {
        let blocks: Vec<ComplexMatrix> = tuple
            .mats()
            .iter()
            .zip(omega.iter())
            .map(|(a, w)| a.adjoint() - &id * w.conj())
            .collect();
        let svd = Svd::new(&stack_rows(&blocks));
        let cand: ComplexVector = svd.v.column(svd.sigma.len() - 1).into_owned();
        let before = eigenvector_residual(tuple, omega_h, &omega);
        let cand_omega = eigenvalues_at(tuple, &cand);
        if eigenvector_residual(tuple, &cand, &cand_omega) < before {
            *omega_h = cand;
            omega = cand_omega;
        } else {
            break;
        }
    }
    *omega_h /= r(omega_h.norm());
    normalize_phase(omega_h);
    eigenvalues_at(tuple, omega_h)
}

/// Block data of a tuple with respect to `ℋ = ℂΩ ⊕ ℋ̊`:
/// `Aᵢ = [[ωᵢ, 0], [|ℓᵢ⟩, Åᵢ]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicProfile {
    pub omega_h: ComplexVector,
    pub omega: ComplexVector,
    /// Projection onto `ℋ̊ = Ω⊥`.
    pub q: ComplexMatrix,
    pub ell: Vec<ComplexVector>,
    /// `Åᵢ = QAᵢQ` in ambient coordinates.
    pub a_ring: Vec<ComplexMatrix>,
    /// Orthonormal basis of `ℋ̊` (`n×(n−1)`).
    pub ring_basis: ComplexMatrix,
}

impl ErgodicProfile {
    pub fn d(&self) -> usize {
        self.omega.len()
    }

    pub fn n(&self) -> usize {
        self.omega_h.len()
    }

    /// `dim ℋ̊`.
    pub fn ring_dim(&self) -> usize {
        self.ring_basis.ncols()
    }

    /// `Ω_P = (ω̄₁, …, ω̄_d)ᵀ`.
    pub fn omega_p(&self) -> ComplexVector {
        self.omega.map(|w| w.conj())
    }

    /// `Åᵢ` in `ring_basis` coordinates.
    pub fn a_ring_coords(&self) -> Vec<ComplexMatrix> {
        self.a_ring
            .iter()
            .map(|a| self.ring_basis.adjoint() * a * &self.ring_basis)
            .collect()
    }

    /// `ℓᵢ` in `ring_basis` coordinates.
    pub fn ell_coords(&self) -> Vec<ComplexVector> {
        self.ell.iter().map(|l| self.ring_basis.adjoint() * l).collect()
    }

    /// Rebuilds `Aᵢ = ωᵢ|Ω⟩⟨Ω| + |ℓᵢ⟩⟨Ω| + Åᵢ`.
    pub fn reconstruct(&self) -> Vec<ComplexMatrix> {
        let bra = self.omega_h.adjoint();
        (0..self.d())
            .map(|i| &self.omega_h * &bra * self.omega[i] + &self.ell[i] * &bra + &self.a_ring[i])
            .collect()
    }
}

/// Decomposes `A` relative to the common eigenvector `Ω`.
pub fn block_decompose(
    tuple: &RowContraction,
    omega_h: &ComplexVector,
    omega: &ComplexVector,
    tol: f64,
) -> Result<ErgodicProfile> {
    let n = tuple.n();
    if omega_h.len() != n || omega.len() != tuple.d() {
        return Err(TupleError::DimensionMismatch("Ω or ω has the wrong length".into()));
    }
    let residual = eigenvector_residual(tuple, omega_h, omega);
    if residual > eigen_tol(tol) {
        return Err(TupleError::EigenvectorMismatch { residual });
    }
    let q = ComplexMatrix::identity(n, n) - omega_h * omega_h.adjoint();
    let ell = tuple
        .mats()
        .iter()
        .zip(omega.iter())
        .map(|(a, &w)| a * omega_h - omega_h * w)
        .collect();
    let a_ring = tuple.mats().iter().map(|a| &q * a * &q).collect();
    let ring_basis = projected_basis(&q);
    Ok(ErgodicProfile {
        omega_h: omega_h.clone(),
        omega: omega.clone(),
        q,
        ell,
        a_ring,
        ring_basis,
    })
}

/// Gram-Schmidt over `Q e₁, Q e₂, …` in index order, dropping vectors that
/// are numerically dependent.
fn projected_basis(q: &ComplexMatrix) -> ComplexMatrix {
    let n = q.nrows();
    let mut cols: Vec<ComplexVector> = Vec::new();
    for k in 0..n {
        let mut v: ComplexVector = q.column(k).into_owned();
        for _ in 0..2 {
            for b in &cols {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / r(norm));
        }
    }
    if cols.is_empty() {
        ComplexMatrix::zeros(n, 0)
    } else {
        ComplexMatrix::from_columns(&cols)
    }
}

/// `Mₙ = Σ_{|α|=n} Å_αÅ_α*` for `n = 1..=n_max`, by the recursion
/// `M₀ = Q`, `M_{m+1} = ΣÅᵢMₘÅᵢ*`.
pub fn star_stability_matrices(profile: &ErgodicProfile, n_max: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(n_max);
    let mut m = profile.q.clone();
    for _ in 0..n_max {
        m = numerics::kraus_apply(&profile.a_ring, &m);
        out.push(m.clone());
    }
    out
}

/// `sₙ = ‖Σ_{|α|=n} Å_αÅ_α*‖` for `n = 1..=n_max`.
pub fn star_stability_norms(profile: &ErgodicProfile, n_max: usize) -> Vec<f64> {
    if profile.ring_dim() == 0 {
        return vec![0.0; n_max];
    }
    star_stability_matrices(profile, n_max).iter().map(operator_norm).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicityParams {
    pub n_max: usize,
    /// `s_{n_max}` below this passes the decay test outright.
    pub decay_threshold: f64,
    /// A clean geometric fit over the last five terms with ratio at most this
    /// also passes.
    pub max_fit_ratio: f64,
    pub tol: f64,
}

impl Default for ErgodicityParams {
    fn default() -> Self {
        Self {
            n_max: 40,
            decay_threshold: 1e-8,
            max_fit_ratio: 0.95,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    /// Dimension of the fixed-point space of `x ↦ ΣAᵢxAᵢ*`.
    pub fixed_point_dim: usize,
    /// Dimension of the commutant `{Aᵢ, Aᵢ*}'`; supplementary only.
    pub commutant_dim: usize,
    /// `s₁..s_{n_max}`, empty when no vector state was available.
    pub decay_norms: Vec<f64>,
    /// `exp` of the least-squares slope of `ln sₙ` over the last five terms.
    pub fitted_ratio: Option<f64>,
    pub decay_ok: Option<bool>,
    pub ergodic: bool,
    /// The two tests disagree.
    pub disagreement: bool,
}

fn fixed_point_dim(tuple: &RowContraction, tol: f64) -> usize {
    let n = tuple.n();
    let shifted = tuple.kraus_superoperator() - ComplexMatrix::identity(n * n, n * n);
    solve_linear_nullspace(&shifted, tol).ncols()
}

/// Dimension of `{X : XAᵢ = AᵢX, XAᵢ* = Aᵢ*X}`.
pub fn commutant_dim(tuple: &RowContraction, tol: f64) -> usize {
    let n = tuple.n();
    let id = ComplexMatrix::identity(n, n);
    let mut blocks = Vec::new();
    for a in tuple.mats() {
        blocks.push(kron(&a.transpose(), &id) - kron(&id, a));
        let ad = a.adjoint();
        blocks.push(kron(&ad.transpose(), &id) - kron(&id, &ad));
    }
    solve_linear_nullspace(&stack_rows(&blocks), tol).ncols()
}

pub(crate) fn stack_rows(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), b.shape()).copy_from(b);
        at += b.nrows();
    }
    out
}

fn geometric_fit(norms: &[f64]) -> Option<f64> {
    let tail: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .rev()
        .take(5)
        .filter(|(_, &s)| s > 0.0)
        .map(|(k, &s)| (k as f64, s.ln()))
        .collect();
    if tail.len() < 5 {
        return None;
    }
    let mean_x = tail.iter().map(|p| p.0).sum::<f64>() / 5.0;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / 5.0;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    Some((sxy / sxx).exp())
}

/// Decides ergodicity by two independent tests: decay of `sₙ` (needs the
/// vector state) and dimension of the fixed-point space of `Z`.
pub fn is_ergodic(tuple: &RowContraction, params: &ErgodicityParams) -> Result<ErgodicityReport> {
    let report = validate(tuple, params.tol);
    if !report.is_coisometric {
        return Err(TupleError::NotCoisometric { defect: report.coisometry_defect });
    }
    let fixed = fixed_point_dim(tuple, params.tol);
    let commutant = commutant_dim(tuple, params.tol);
    if fixed != 1 {
        return Ok(ErgodicityReport {
            fixed_point_dim: fixed,
            commutant_dim: commutant,
            decay_norms: vec![],
            fitted_ratio: None,
            decay_ok: None,
            ergodic: false,
            disagreement: false,
        });
    }
    let state = find_invariant_vector_state(tuple, params.tol)?;
    let profile = block_decompose(tuple, &state.omega_h, &state.omega, params.tol)?;
    let norms = star_stability_norms(&profile, params.n_max);
    let last = norms.last().copied().unwrap_or(0.0);
    let ratio = geometric_fit(&norms);
    let decay_ok = last < params.decay_threshold || ratio.is_some_and(|q| q <= params.max_fit_ratio);
    if !decay_ok {
        return Err(TupleError::Inconclusive { last_norm: last, ratio: ratio.unwrap_or(f64::NAN) });
    }
    Ok(ErgodicityReport {
        fixed_point_dim: fixed,
        commutant_dim: commutant,
        decay_norms: norms,
        fitted_ratio: ratio,
        decay_ok: Some(true),
        ergodic: true,
        disagreement: false,
    })
}

/// `rₙ = ‖(A_{Ω_P}*)ⁿ − |Ω⟩⟨Ω|‖` for `n = 0..=n_max`, `A_{Ω_P} = Σω̄ᵢAᵢ`.
pub fn omega_p_power_decay(tuple: &RowContraction, profile: &ErgodicProfile, n_max: usize) -> Vec<f64> {
    let n = tuple.n();
    let a_omega = tuple
        .mats()
        .iter()
        .zip(profile.omega.iter())
        .fold(ComplexMatrix::zeros(n, n), |acc, (a, w)| acc + a * w.conj());
    let step = a_omega.adjoint();
    let target = &profile.omega_h * profile.omega_h.adjoint();
    let mut power = ComplexMatrix::identity(n, n);
    let mut out = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        if k > 0 {
            power = &step * power;
        }
        out.push(operator_norm(&(&power - &target)));
    }
    out
}

/// A validated ergodic coisometric tuple together with its block data.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicTuple {
    pub tuple: RowContraction,
    pub profile: ErgodicProfile,
    pub ergodicity: ErgodicityReport,
}

impl ErgodicTuple {
    pub fn analyze(tuple: RowContraction, params: &ErgodicityParams) -> Result<Self> {
        let ergodicity = is_ergodic(&tuple, params)?;
        if !ergodicity.ergodic {
            return Err(TupleError::NotErgodic { fixed_point_dim: ergodicity.fixed_point_dim });
        }
        let state = find_invariant_vector_state(&tuple, params.tol)?;
        let profile = block_decompose(&tuple, &state.omega_h, &state.omega, params.tol)?;
        Ok(Self { tuple, profile, ergodicity })
    }

    pub fn d(&self) -> usize {
        self.tuple.d()
    }

    pub fn n(&self) -> usize {
        self.tuple.n()
    }
}

/// Standard complex Gaussian matrix.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let (q, rr) = qr.unpack();
    let phases = ComplexMatrix::from_diagonal(&rr.diagonal().map(|z| if z.norm() > 0.0 { z / z.norm() } else { r(1.0) }));
    q * phases
}

/// Uniform random unit vector in `ℂᵈ`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    let g = gaussian_matrix(d, 1, rng).column(0).into_owned();
    let norm = g.norm();
    g / r(norm)
}

const GENERATION_ATTEMPTS: usize = 16;

/// Random ergodic coisometric tuple with prescribed `ω` and `Ω = e₁`.
///
/// The column isometry `[A₁*; …; A_d*]` sends `e₁` to `(ω̄₁e₁, …, ω̄_de₁)` and
/// the remaining columns are a random orthonormal completion.
pub fn random_ergodic_tuple_with_omega<R: Rng + ?Sized>(
    omega: &ComplexVector,
    n: usize,
    rng: &mut R,
) -> Result<ErgodicTuple> {
    let d = omega.len();
    if d < 2 || n == 0 {
        return Err(TupleError::DimensionMismatch(format!("need d ≥ 2 and n ≥ 1, got d={d}, n={n}")));
    }
    let norm = omega.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(TupleError::DimensionMismatch(format!("ω must be a unit vector (norm {norm})")));
    }
    let params = ErgodicityParams::default();
    for _ in 0..GENERATION_ATTEMPTS {
        let mut first = ComplexVector::zeros(d * n);
        for i in 0..d {
            first[i * n] = omega[i].conj();
        }
        let mut cols = vec![first.clone()];
        if n > 1 {
            let mut g = gaussian_matrix(d * n, n - 1, rng);
            for _ in 0..2 {
                g -= &first * (first.adjoint() * &g);
            }
            let q = g.qr().q();
            cols.extend(q.column_iter().map(|c| c.into_owned()));
        }
        let column = ComplexMatrix::from_columns(&cols);
        let mats = (0..d)
            .map(|i| column.view((i * n, 0), (n, n)).adjoint())
            .collect();
        let tuple = RowContraction::new(mats)?;
        match ErgodicTuple::analyze(tuple, &params) {
            Ok(t) => return Ok(t),
            Err(TupleError::NotErgodic { .. } | TupleError::Inconclusive { .. }) => continue,
            Err(TupleError::NonUniqueVectorState { .. } | TupleError::NoVectorState(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(TupleError::GenerationFailed { attempts: GENERATION_ATTEMPTS })
}

/// Random ergodic coisometric tuple with random `ω`, seeded.
pub fn random_ergodic_tuple(d: usize, n: usize, seed: u64) -> Result<ErgodicTuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if d < 2 {
        return Err(TupleError::DimensionMismatch(format!("need d ≥ 2, got {d}")));
    }
    let omega = random_unit_vector(d, &mut rng);
    random_ergodic_tuple_with_omega(&omega, n, &mut rng)
}

/// Default-tolerance wrapper used by the higher layers.
pub fn analyze(tuple: RowContraction) -> Result<ErgodicTuple> {
    ErgodicTuple::analyze(tuple, &ErgodicityParams { tol: DEFAULT_TOL.max(1e-9), ..Default::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real_matrix, real_vector};

    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn sec7_profile() -> ErgodicProfile {
        analyze(section7()).unwrap().profile
    }

    #[test]
    fn section7_validates() {
        let rep = validate(&section7(), 1e-12);
        assert!(rep.passed());
        assert!(rep.coisometry_defect <= 1e-12);
    }

    #[test]
    fn scalar_tuple_is_coisometric_and_ergodic() {
        let t = scalar_tuple(&[r(0.6), c(0.0, 0.8)]).unwrap();
        assert!(validate(&t, 1e-12).passed());
        let state = find_invariant_vector_state(&t, 1e-10).unwrap();
        assert!((state.omega_h[0] - r(1.0)).norm() < 1e-14);
        assert!((state.omega[0] - r(0.6)).norm() < 1e-14);
        assert!((state.omega[1] - c(0.0, 0.8)).norm() < 1e-14);
        let et = analyze(t).unwrap();
        assert_eq!(et.profile.ring_dim(), 0);
        assert!(et.profile.q.norm() < 1e-15);
        assert!(et.profile.ell.iter().all(|l| l.norm() < 1e-15));
        assert_eq!(star_stability_norms(&et.profile, 5), vec![0.0; 5]);
    }

    #[test]
    fn oversized_tuple_fails_contraction() {
        let a = ComplexMatrix::identity(2, 2) * r(1.1 * S2);
        let t = RowContraction::new(vec![a.clone(), a]).unwrap();
        let rep = validate(&t, 1e-10);
        assert!(!rep.is_contraction && !rep.passed());
    }

    #[test]
    fn rejects_malformed_tuples() {
        let a = ComplexMatrix::identity(2, 2);
        assert!(RowContraction::new(vec![a.clone()]).is_err());
        assert!(RowContraction::new(vec![a, ComplexMatrix::identity(3, 3)]).is_err());
    }

    #[test]
    fn section7_vector_state() {
        let state = find_invariant_vector_state(&section7(), 1e-10).unwrap();
        let s3 = 1.0 / 3f64.sqrt();
        assert!((state.omega_h - real_vector(&[s3, s3, s3])).norm() < 1e-12);
        assert!((state.omega - real_vector(&[S2, S2])).norm() < 1e-12);
    }

    #[test]
    fn direct_sum_has_no_unique_state() {
        let t = section7().direct_sum(&section7()).unwrap();
        assert!(matches!(
            find_invariant_vector_state(&t, 1e-10),
            Err(TupleError::NonUniqueVectorState { .. })
        ));
        let rep = is_ergodic(&t, &ErgodicityParams::default()).unwrap();
        assert!(!rep.ergodic);
        assert!(rep.fixed_point_dim >= 2);
        assert!(matches!(analyze(t), Err(TupleError::NotErgodic { .. })));
    }

    #[test]
    fn section7_block_data() {
        let p = sec7_profile();
        let q = real_matrix(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]) * r(1.0 / 3.0);
        assert!((&p.q - q).norm() < 1e-12);
        let a1 = real_matrix(3, 3, &[0.0, 0.0, 0.0, 2.0, -1.0, -1.0, -2.0, 1.0, 1.0]) * r(1.0 / (3.0 * 2f64.sqrt()));
        assert!((&p.a_ring[0] - a1).norm() < 1e-12);
        let s6 = 1.0 / 6f64.sqrt();
        assert!((&p.ell[0] - real_vector(&[-s6, 0.0, s6])).norm() < 1e-12);
        assert!((&p.ell[1] - real_vector(&[s6, 0.0, -s6])).norm() < 1e-12);
        let a1l1 = &p.a_ring[0] * &p.ell[0];
        let k = 1.0 / (2.0 * 3f64.sqrt());
        assert!((a1l1 - real_vector(&[0.0, -k, k])).norm() < 1e-12);
        assert_eq!(p.ring_dim(), 2);
    }

    #[test]
    fn block_identities_hold() {
        let et = analyze(section7()).unwrap();
        let p = &et.profile;
        for (a, b) in p.reconstruct().iter().zip(et.tuple.mats()) {
            assert!((a - b).norm() < 1e-10);
        }
        let weighted = p
            .ell
            .iter()
            .zip(p.omega.iter())
            .fold(ComplexVector::zeros(3), |acc, (l, w)| acc + l * w.conj());
        assert!(weighted.norm() < 1e-10);
        let mut sum = ComplexMatrix::zeros(3, 3);
        for (l, a) in p.ell.iter().zip(&p.a_ring) {
            sum += l * l.adjoint() + a * a.adjoint();
        }
        assert!((sum - &p.q).norm() < 1e-10);
        for l in &p.ell {
            assert!(p.omega_h.dotc(l).norm() < 1e-12);
        }
    }

    #[test]
    fn block_decompose_rejects_wrong_vector() {
        let t = section7();
        let wrong = real_vector(&[1.0, 0.0, 0.0]);
        let omega = real_vector(&[S2, S2]);
        assert!(matches!(
            block_decompose(&t, &wrong, &omega, 1e-10),
            Err(TupleError::EigenvectorMismatch { .. })
        ));
    }

    #[test]
    fn section7_decay_law() {
        let p = sec7_profile();
        let g = real_matrix(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let ms = star_stability_matrices(&p, 12);
        for (k, m) in ms.iter().enumerate() {
            let n = k as i32 + 1;
            let want = &g * r(1.0 / (3.0 * 2f64.powi(n - 1)));
            assert!((m - want).norm() < 1e-12);
        }
        for (k, s) in star_stability_norms(&p, 12).iter().enumerate() {
            assert!((s - 2f64.powi(-(k as i32))).abs() < 1e-12);
        }
    }

    #[test]
    fn section7_is_ergodic_by_both_tests() {
        let rep = is_ergodic(&section7(), &ErgodicityParams::default()).unwrap();
        assert!(rep.ergodic && !rep.disagreement);
        assert_eq!(rep.fixed_point_dim, 1);
        assert_eq!(rep.decay_ok, Some(true));
        assert_eq!(rep.commutant_dim, 1);
    }

    #[test]
    fn omega_p_decay_on_examples() {
        let et = analyze(section7()).unwrap();
        let r_n = omega_p_power_decay(&et.tuple, &et.profile, 20);
        assert!((r_n[0] - 1.0).abs() < 1e-12);
        assert!(r_n[20] < 1e-3);
        let t = scalar_tuple(&[r(S2), r(S2)]).unwrap();
        let et = analyze(t).unwrap();
        assert!(omega_p_power_decay(&et.tuple, &et.profile, 5).iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn random_tuples_satisfy_construction() {
        for seed in 0..5 {
            let et = random_ergodic_tuple(2, 3, seed).unwrap();
            assert!(validate(&et.tuple, 1e-12).coisometry_defect <= 1e-12);
            let e1 = real_vector(&[1.0, 0.0, 0.0]);
            assert!(eigenvector_residual(&et.tuple, &e1, &et.profile.omega) <= 1e-12);
        }
        let et = random_ergodic_tuple(3, 4, 11).unwrap();
        assert!(et.ergodicity.ergodic);
    }
}
