//! Unitary invariance of the extended characteristic function: symbol
//! comparison, the direct intertwiner search, mixing transforms and
//! conjugacy of the associated completely positive maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::charfun::{CharacteristicData, CharfunError, ExtendedCharfun};
use crate::fock::TruncationParams;
use crate::numerics::{
    self, c, hermitian_eig, isometry_defect, kron, operator_norm, orthonormal_range, pseudo_inverse,
    r, singular_values, solve_linear_nullspace, unvec_col, ComplexMatrix, ComplexVector, NumericsError,
};
use crate::tuple::{self, stack_rows, ErgodicTuple, RowContraction, TupleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivalenceError {
    #[error("symbols use different ω (distance {distance:.3e})")]
    FrameMismatch { distance: f64 },
    #[error("not comparable: {0}")]
    NotComparable(String),
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error(transparent)]
    Charfun(#[from] CharfunError),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, EquivalenceError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceParams {
    pub depth: usize,
    /// Acceptance threshold for symbol residual and unitarity defect.
    pub tol: f64,
    /// Acceptance threshold for the tuple intertwiner.
    pub unitary_tol: f64,
    /// Tolerance used to build the characteristic data.
    pub build_tol: f64,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        Self { depth: 6, tol: 1e-8, unitary_tol: 1e-8, build_tol: 1e-10 }
    }
}

impl EquivalenceParams {
    fn truncation(&self) -> TruncationParams {
        TruncationParams { depth: self.depth, tol: self.build_tol }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// `V : 𝒟_A → 𝒟_B` in the two defect bases.
    pub v: Option<ComplexMatrix>,
    /// `‖Θ_A − Θ_B V‖` over the stacked coefficients.
    pub residual: f64,
    pub unitarity_defect: f64,
    pub depth: usize,
    /// `Θ_B` has full column rank, so `V` is determined.
    pub full_rank: bool,
}

/// Looks for a unitary `V` with `θ̂_A = θ̂_B V` at the common depth.
pub fn symbols_equivalent(a: &ExtendedCharfun, b: &ExtendedCharfun, tol: f64) -> Result<EquivalenceReport> {
    if a.symbol.d() != b.symbol.d() || a.depth() != b.depth() {
        return Err(EquivalenceError::NotComparable("symbols differ in d or depth".into()));
    }
    let distance = (&a.omega - &b.omega).norm();
    if distance > 1e-8 {
        return Err(EquivalenceError::FrameMismatch { distance });
    }
    let depth = a.depth();
    if a.symbol.source_dim() != b.symbol.source_dim() {
        return Ok(EquivalenceReport {
            equivalent: false,
            v: None,
            residual: f64::INFINITY,
            unitarity_defect: f64::INFINITY,
            depth,
            full_rank: false,
        });
    }
    let theta_a = a.symbol.stacked();
    // Express B's coefficients in A's frame; both frames span 𝒟_ω.
    let change = a.symbol.target_frame().adjoint() * b.symbol.target_frame();
    let m = change.nrows();
    let stacked_b = b.symbol.stacked();
    let mut theta_b = ComplexMatrix::zeros(stacked_b.nrows(), stacked_b.ncols());
    for w in 0..stacked_b.nrows() / m.max(1) {
        let blk = &change * stacked_b.rows(w * m, m);
        theta_b.rows_mut(w * m, m).copy_from(&blk);
    }
    let sv = singular_values(&theta_b);
    let full_rank = sv.last().is_some_and(|&s| s > 1e-6 * sv[0].max(1.0));
    let v = pseudo_inverse(&theta_b, 1e-12) * &theta_a;
    let residual = operator_norm(&(&theta_a - &theta_b * &v));
    let unitarity_defect = isometry_defect(&v).max(isometry_defect(&v.adjoint()));
    Ok(EquivalenceReport {
        equivalent: full_rank && residual <= tol && unitarity_defect <= tol,
        v: Some(v),
        residual,
        unitarity_defect,
        depth,
        full_rank,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryReport {
    /// `U` with `UAᵢ = BᵢU` and `UAᵢ* = Bᵢ*U`, when one exists.
    pub u: Option<ComplexMatrix>,
    /// Dimension of the solution space of the joint linear system.
    pub nullity: usize,
    /// Smallest singular value of the joint system.
    pub sigma_min: f64,
    pub unitarity_defect: f64,
}

fn intertwiner_system(a: &RowContraction, b: &RowContraction) -> ComplexMatrix {
    let n = a.n();
    let id = ComplexMatrix::identity(n, n);
    let mut blocks = Vec::with_capacity(2 * a.d());
    for (ai, bi) in a.mats().iter().zip(b.mats()) {
        blocks.push(kron(&ai.transpose(), &id) - kron(&id, bi));
        blocks.push(kron(&ai.map(|z| z.conj()), &id) - kron(&id, &bi.adjoint()));
    }
    stack_rows(&blocks)
}

fn sigma_min(a: &RowContraction, b: &RowContraction) -> f64 {
    singular_values(&intertwiner_system(a, b)).last().copied().unwrap_or(0.0)
}

/// Solves `UAᵢ = BᵢU`, `UAᵢ* = Bᵢ*U` and accepts a normalized solution if
/// it is unitary within `tol`.
pub fn tuples_unitarily_equivalent(a: &RowContraction, b: &RowContraction, tol: f64) -> UnitaryReport {
    if a.d() != b.d() || a.n() != b.n() {
        return UnitaryReport { u: None, nullity: 0, sigma_min: f64::INFINITY, unitarity_defect: f64::INFINITY };
    }
    let n = a.n();
    let system = intertwiner_system(a, b);
    let sigma = singular_values(&system).last().copied().unwrap_or(0.0);
    let kernel = solve_linear_nullspace(&system, tol);
    let nullity = kernel.ncols();
    if nullity == 0 {
        return UnitaryReport { u: None, nullity, sigma_min: sigma, unitarity_defect: f64::INFINITY };
    }
    let mut u = unvec_col(&kernel.column(0).into_owned(), n, n);
    let norm = operator_norm(&u);
    u /= r(norm);
    let unitarity_defect = isometry_defect(&u);
    UnitaryReport {
        u: (unitarity_defect <= tol).then_some(u),
        nullity,
        sigma_min: sigma,
        unitarity_defect,
    }
}

/// Multiplies `u` by the phase making `⟨Ω_B, UΩ_A⟩` real-positive.
pub fn align_phase(u: &ComplexMatrix, omega_a: &ComplexVector, omega_b: &ComplexVector) -> ComplexMatrix {
    let z = omega_b.dotc(&(u * omega_a));
    if z.norm() == 0.0 {
        return u.clone();
    }
    u * (z.conj() / z.norm())
}

/// `min_φ ‖U − e^{iφ}U₀‖`.
pub fn distance_up_to_phase(u: &ComplexMatrix, u0: &ComplexMatrix) -> f64 {
    let t = (u0.adjoint() * u).trace();
    let phase = if t.norm() > 0.0 { t / t.norm() } else { r(1.0) };
    operator_norm(&(u - u0 * phase))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem61Report {
    pub symbol: EquivalenceReport,
    pub unitary: UnitaryReport,
    /// `UΩ_A = Ω_B` after phase alignment, when `U` exists.
    pub aligned_u: Option<ComplexMatrix>,
    pub consistent: bool,
}

impl Theorem61Report {
    pub fn symbols_say_equivalent(&self) -> bool {
        self.symbol.equivalent
    }

    pub fn intertwiner_found(&self) -> bool {
        self.unitary.u.is_some()
    }
}

/// Runs both tests of unitary equivalence on precomputed data.
pub fn theorem61_from_data(
    a: &CharacteristicData,
    b: &CharacteristicData,
    params: &EquivalenceParams,
) -> Result<Theorem61Report> {
    if a.tuple.d() != b.tuple.d() {
        return Err(EquivalenceError::NotComparable("different number of operators".into()));
    }
    let distance = (&a.tuple.profile.omega - &b.tuple.profile.omega).norm();
    if distance > 1e-8 {
        return Err(EquivalenceError::NotComparable(format!("ω differs (distance {distance:.3e})")));
    }
    let symbol = symbols_equivalent(&a.theta_hat, &b.theta_hat, params.tol)?;
    let unitary = tuples_unitarily_equivalent(&a.tuple.tuple, &b.tuple.tuple, params.unitary_tol);
    let aligned_u = unitary
        .u
        .as_ref()
        .map(|u| align_phase(u, &a.tuple.profile.omega_h, &b.tuple.profile.omega_h));
    let consistent = symbol.equivalent == unitary.u.is_some();
    Ok(Theorem61Report { symbol, unitary, aligned_u, consistent })
}

pub fn theorem61_crosscheck(a: &ErgodicTuple, b: &ErgodicTuple, params: &EquivalenceParams) -> Result<Theorem61Report> {
    let da = CharacteristicData::compute(a.clone(), params.truncation())?;
    let db = CharacteristicData::compute(b.clone(), params.truncation())?;
    theorem61_from_data(&da, &db, params)
}

/// `A′ᵢ = Σⱼ uᵢⱼAⱼ` together with `ω′ = uω`.
pub fn mixing_transform(
    tuple: &RowContraction,
    omega: &ComplexVector,
    u: &ComplexMatrix,
    tol: f64,
) -> Result<(RowContraction, ComplexVector)> {
    let d = tuple.d();
    if u.shape() != (d, d) || omega.len() != d {
        return Err(EquivalenceError::NotComparable("mixing matrix has the wrong size".into()));
    }
    let defect = isometry_defect(u);
    if defect > tol {
        return Err(EquivalenceError::NotUnitary { defect });
    }
    let n = tuple.n();
    let mats = (0..d)
        .map(|i| {
            (0..d).fold(ComplexMatrix::zeros(n, n), |acc, j| acc + tuple.get(j) * u[(i, j)])
        })
        .collect();
    Ok((RowContraction::new(mats)?, u * omega))
}

/// `max_{k,l} ‖ΣA′ᵢEₖₗA′ᵢ* − ΣAᵢEₖₗAᵢ*‖` over matrix units.
pub fn kraus_invariance_defect(a: &RowContraction, b: &RowContraction) -> f64 {
    let n = a.n();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(k, l)] = r(1.0);
            let diff = numerics::kraus_apply(a.mats(), &e) - numerics::kraus_apply(b.mats(), &e);
            worst = worst.max(operator_norm(&diff));
        }
    }
    worst
}

/// `max_{k,l} ‖Z_B(UEₖₗU*) − UZ_A(Eₖₗ)U*‖`.
pub fn conjugacy_residual(a: &RowContraction, b: &RowContraction, u: &ComplexMatrix) -> f64 {
    let n = a.n();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(k, l)] = r(1.0);
            let lhs = numerics::kraus_apply(b.mats(), &(u * &e * u.adjoint()));
            let rhs = u * numerics::kraus_apply(a.mats(), &e) * u.adjoint();
            worst = worst.max(operator_norm(&(lhs - rhs)));
        }
    }
    worst
}

/// Unitary `[x | basis of x⊥]` for a unit vector `x`.
fn completion(x: &ComplexVector) -> ComplexMatrix {
    let d = x.len();
    let perp = orthonormal_range(&(ComplexMatrix::identity(d, d) - x * x.adjoint()), 1e-9);
    let mut out = ComplexMatrix::zeros(d, d);
    out.set_column(0, x);
    out.columns_mut(1, d - 1).copy_from(&perp);
    out
}

/// `exp(iH)` for Hermitian `H`.
fn exp_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let eig = hermitian_eig(h, 1e-12).expect("hermitian by construction");
    let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&l| c(l.cos(), l.sin())),
    ));
    &eig.vectors * phases * eig.vectors.adjoint()
}

/// Hermitian `k×k` matrix from `k²` real parameters.
fn hermitian_from(params: &[f64], k: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(k, k);
    let mut it = params.iter();
    for i in 0..k {
        h[(i, i)] = r(*it.next().expect("k² parameters"));
        for j in i + 1..k {
            let re = *it.next().expect("k² parameters");
            let im = *it.next().expect("k² parameters");
            h[(i, j)] = c(re, im);
            h[(j, i)] = c(re, -im);
        }
    }
    h
}

/// Element `P_ω + F e^{iH} F*` of the stabilizer of `ω` in `U(d)`.
fn stabilizer_element(omega: &ComplexVector, frame: &ComplexMatrix, params: &[f64]) -> ComplexMatrix {
    let k = frame.ncols();
    omega * omega.adjoint() + frame * exp_i_hermitian(&hermitian_from(params, k)) * frame.adjoint()
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { x1 } else { x2 }
}

fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: Vec<f64>, step: f64, iters: usize) -> (Vec<f64>, f64) {
    let k = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((start.clone(), f(&start)));
    for i in 0..k {
        let mut p = start.clone();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[k].1 - simplex[0].1 < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..k)
            .map(|j| simplex[..k].iter().map(|p| p.0[j]).sum::<f64>() / k as f64)
            .collect();
        let worst = simplex[k].0.clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            simplex[k] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[k - 1].1 {
            simplex[k] = (reflected, fr);
        } else {
            let contracted = lerp(&centroid, &worst, 0.5);
            let fc = f(&contracted);
            if fc < simplex[k].1 {
                simplex[k] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = lerp(&best, &p.0, 0.5);
                    p.1 = f(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Minimizes `σ_min` of the intertwiner system of `(A, mix(B, v))` over
/// `v` in the stabilizer of `ω_A`.
fn stabilizer_search(a: &RowContraction, b: &RowContraction, omega: &ComplexVector) -> (ComplexMatrix, f64) {
    let d = a.d();
    let frame = completion(omega).columns(1, d - 1).into_owned();
    let k = d - 1;
    let objective = |p: &[f64]| -> f64 {
        let v = stabilizer_element(omega, &frame, p);
        match mixing_transform(b, omega, &v, 1e-8) {
            Ok((mixed, _)) => sigma_min(a, &mixed),
            Err(_) => f64::INFINITY,
        }
    };
    let best = if k == 1 {
        let scan = 96;
        let tau = std::f64::consts::TAU;
        let (mut arg, mut val) = (0.0, f64::INFINITY);
        for s in 0..scan {
            let phi = tau * s as f64 / scan as f64;
            let v = objective(&[phi]);
            if v < val {
                (arg, val) = (phi, v);
            }
        }
        let width = tau / scan as f64;
        let phi = golden_section(&|x| objective(&[x]), arg - width, arg + width, 80);
        vec![phi]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x63);
        let mut best = (vec![0.0; k * k], f64::INFINITY);
        for start in 0..12 {
            let init: Vec<f64> = if start == 0 {
                vec![0.0; k * k]
            } else {
                (0..k * k).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
            };
            let cand = nelder_mead(&objective, init, 0.5, 4000);
            if cand.1 < best.1 {
                best = cand;
            }
            if best.1 < 1e-12 {
                break;
            }
        }
        best.0
    };
    let v = stabilizer_element(omega, &frame, &best);
    let val = objective(&best);
    (v, val)
}

/// Solves `UAᵢU* = Σⱼ vᵢⱼBⱼ` for `v` by least squares and returns its
/// nearest unitary.
fn polish_mixing(a: &RowContraction, b: &RowContraction, u: &ComplexMatrix) -> ComplexMatrix {
    let d = a.d();
    let n = a.n();
    let mut basis = ComplexMatrix::zeros(n * n, d);
    for (j, bj) in b.mats().iter().enumerate() {
        basis.set_column(j, &numerics::vec_col(bj));
    }
    let pinv = pseudo_inverse(&basis, 1e-12);
    let mut v = ComplexMatrix::zeros(d, d);
    for (i, ai) in a.mats().iter().enumerate() {
        let coeffs = &pinv * numerics::vec_col(&(u * ai * u.adjoint()));
        v.set_row(i, &coeffs.transpose());
    }
    let svd = numerics::Svd::new(&v);
    svd.u * svd.v.adjoint()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corollary63Report {
    pub conjugate: bool,
    /// `u` with `mix(B, u)` sharing `ω` with `A` and, when conjugate,
    /// unitarily equivalent to it.
    pub mixing: ComplexMatrix,
    /// Best `σ_min` reached by the stabilizer search.
    pub search_sigma: f64,
    pub theorem61: Option<Theorem61Report>,
    /// `max ‖Z_B(U·U*) − UZ_A(·)U*‖` on matrix units for the found `U`.
    pub conjugacy_residual: Option<f64>,
    pub consistent: bool,
}

/// Decides whether `Z_A` and `Z_B` are conjugate by a unitary.
///
/// `B` is first mixed so its eigenvalue tuple equals `ω_A`; the remaining
/// freedom is the stabilizer of `ω_A`, which is searched for a mixing that
/// makes the tuples unitarily equivalent.
pub fn corollary63_check(a: &ErgodicTuple, b: &ErgodicTuple, params: &EquivalenceParams) -> Result<Corollary63Report> {
    if a.d() != b.d() {
        return Err(EquivalenceError::NotComparable("different number of operators".into()));
    }
    let d = a.d();
    let omega_a = &a.profile.omega;
    if a.n() != b.n() {
        return Ok(Corollary63Report {
            conjugate: false,
            mixing: ComplexMatrix::identity(d, d),
            search_sigma: f64::INFINITY,
            theorem61: None,
            conjugacy_residual: None,
            consistent: true,
        });
    }
    let u0 = completion(omega_a) * completion(&b.profile.omega).adjoint();
    let (b_aligned, _) = mixing_transform(&b.tuple, &b.profile.omega, &u0, 1e-8)?;
    let (v, search_sigma) = stabilizer_search(&a.tuple, &b_aligned, omega_a);
    let mut mixing = &v * &u0;
    let (mut mixed, _) = mixing_transform(&b.tuple, &b.profile.omega, &mixing, 1e-8)?;
    let loose = tuples_unitarily_equivalent(&a.tuple, &mixed, 1e-4);
    if let Some(u) = &loose.u {
        // Sharpen the mixing from the approximate intertwiner.
        let refined = polish_mixing(&a.tuple, &b.tuple, u);
        if let Ok((cand, _)) = mixing_transform(&b.tuple, &b.profile.omega, &refined, 1e-8) {
            if sigma_min(&a.tuple, &cand) <= sigma_min(&a.tuple, &mixed) {
                mixing = refined;
                mixed = cand;
            }
        }
    }
    let mixed_tuple = tuple::analyze(mixed)?;
    let report = theorem61_crosscheck(a, &mixed_tuple, params);
    let theorem61 = match report {
        Ok(rep) => Some(rep),
        Err(EquivalenceError::NotComparable(_)) => None,
        Err(e) => return Err(e),
    };
    let conjugate = theorem61.as_ref().is_some_and(|t| t.intertwiner_found());
    let conjugacy_residual = theorem61
        .as_ref()
        .and_then(|t| t.unitary.u.as_ref())
        .map(|u| conjugacy_residual(&a.tuple, &b.tuple, u));
    let consistent = theorem61.as_ref().is_none_or(|t| t.consistent);
    Ok(Corollary63Report { conjugate, mixing, search_sigma, theorem61, conjugacy_residual, consistent })
}

/// Random mixing matrix, for tests and the CLI.
pub fn random_mixing<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    tuple::random_unitary(d, rng)
}
