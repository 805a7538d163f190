//! Truncated minimal isometric dilations, the coupling oracle for `Ĉ` and
//! the intertwiner `W` between the dilation of `A` and that of `ω`.
//!
//! A vector at depth `N` lives in `ℋ ⊕ (Γ_N ⊗ ℂʳ)` with the fock block of
//! word index `k` at offset `n + k·r`. Spaces are nested, so a depth-`N`
//! vector is a prefix of its depth-`N+1` embedding.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::charfun::{CharacteristicData, CharfunError, DefectData, PoissonKernel};
use crate::fock::{FockError, FockVector, Word, WordIndexer};
use crate::numerics::{self, r, singular_values, ComplexMatrix, ComplexVector, C64};
use crate::tuple::{scalar_tuple, ErgodicProfile, RowContraction, TupleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DilationError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("depth {requested} exceeds the dilation's depth {available}")]
    TooDeep { requested: usize, available: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Charfun(#[from] CharfunError),
    #[error(transparent)]
    Tuple(#[from] TupleError),
}

pub type Result<T> = std::result::Result<T, DilationError>;

/// Coefficients below this norm are dropped from coupling states.
pub const COUPLING_PRUNE: f64 = 1e-14;

/// `ℋ ⊕ (Γ_N ⊗ 𝒟)` coordinates for all depths up to a maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSpace {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub indexer: WordIndexer,
}

impl DilationSpace {
    pub fn dim(&self, depth: usize) -> usize {
        self.n + self.indexer.count_up_to(depth) * self.r
    }

    /// Offset of the fock block of word index `k`.
    pub fn block(&self, k: usize) -> usize {
        self.n + k * self.r
    }

    pub fn max_depth(&self) -> usize {
        self.indexer.depth()
    }
}

/// The isometries `Vᵢ(h ⊕ Σe_α⊗d_α) = Aᵢh ⊕ (e₀⊗Dᵢh + Σe_{iα}⊗d_α)` of the
/// minimal isometric dilation, as maps from depth `N` to depth `N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopescuDilation {
    pub tuple: RowContraction,
    pub space: DilationSpace,
    /// `Ξ*D_{·i}` for each `i`: `r×n`.
    defect_maps: Vec<ComplexMatrix>,
}

impl PopescuDilation {
    pub fn new(tuple: &RowContraction, defects: &DefectData, max_depth: usize) -> Result<Self> {
        Self::with_basis(tuple, &defects.d_proj, &defects.basis, max_depth)
    }

    /// Dilation with the defect space written in a caller-chosen orthonormal
    /// basis of `Range D`.
    pub fn with_basis(
        tuple: &RowContraction,
        d_proj: &ComplexMatrix,
        basis: &ComplexMatrix,
        max_depth: usize,
    ) -> Result<Self> {
        let (d, n) = (tuple.d(), tuple.n());
        if d_proj.shape() != (d * n, d * n) || basis.nrows() != d * n {
            return Err(DilationError::DimensionMismatch("defect data does not match tuple".into()));
        }
        let defect_maps = (0..d)
            .map(|i| basis.adjoint() * d_proj.columns(i * n, n))
            .collect();
        Ok(Self {
            tuple: tuple.clone(),
            space: DilationSpace { n, d, r: basis.ncols(), indexer: WordIndexer::new(d, max_depth)? },
            defect_maps,
        })
    }

    pub fn d(&self) -> usize {
        self.space.d
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > self.space.max_depth() {
            return Err(DilationError::TooDeep { requested: depth, available: self.space.max_depth() });
        }
        Ok(())
    }

    /// `Vᵢx` for `x` at `depth`; the result is at `depth + 1`. Zero-based `i`.
    pub fn apply(&self, i: usize, x: &ComplexVector, depth: usize) -> Result<ComplexVector> {
        self.check_depth(depth)?;
        let s = &self.space;
        if x.len() != s.dim(depth) {
            return Err(DilationError::DimensionMismatch(format!(
                "vector of length {} at depth {depth} (expected {})",
                x.len(),
                s.dim(depth)
            )));
        }
        let mut out = ComplexVector::zeros(s.dim(depth + 1));
        let h = x.rows(0, s.n);
        out.rows_mut(0, s.n).copy_from(&(self.tuple.get(i) * h));
        out.rows_mut(s.block(0), s.r).copy_from(&(&self.defect_maps[i] * h));
        for k in 0..s.indexer.count_up_to(depth) {
            let target = s.indexer.prepend_index(k, i + 1);
            out.rows_mut(s.block(target), s.r).copy_from(&x.rows(s.block(k), s.r));
        }
        Ok(out)
    }

    /// `Vᵢ*y` for `y` at `depth`; the result is at `depth − 1` (or `0`).
    pub fn apply_adjoint(&self, i: usize, y: &ComplexVector, depth: usize) -> Result<ComplexVector> {
        self.check_depth(depth)?;
        let s = &self.space;
        if y.len() != s.dim(depth) {
            return Err(DilationError::DimensionMismatch("adjoint input has the wrong length".into()));
        }
        let out_depth = depth.saturating_sub(1);
        let mut out = ComplexVector::zeros(s.dim(out_depth));
        let h = y.rows(0, s.n);
        let e0 = y.rows(s.block(0), s.r);
        let top = self.tuple.get(i).adjoint() * h + self.defect_maps[i].adjoint() * e0;
        out.rows_mut(0, s.n).copy_from(&top);
        if depth >= 1 {
            for k in 0..s.indexer.count_up_to(depth - 1) {
                let source = s.indexer.prepend_index(k, i + 1);
                out.rows_mut(s.block(k), s.r).copy_from(&y.rows(s.block(source), s.r));
            }
        }
        Ok(out)
    }

    /// Matrix of `Vᵢ` from depth `N` to depth `N+1`.
    pub fn matrix(&self, i: usize, depth: usize) -> Result<ComplexMatrix> {
        let cols = self.space.dim(depth);
        let mut out = ComplexMatrix::zeros(self.space.dim(depth + 1), cols);
        for c in 0..cols {
            let mut e = ComplexVector::zeros(cols);
            e[c] = r(1.0);
            out.set_column(c, &self.apply(i, &e, depth)?);
        }
        Ok(out)
    }

    /// `V_α(h ⊕ 0)`, at depth `|α|`.
    pub fn apply_word(&self, letters: &[usize], h: &ComplexVector) -> Result<ComplexVector> {
        let mut v = self.embed(h);
        for (step, &l) in letters.iter().rev().enumerate() {
            v = self.apply(l - 1, &v, step)?;
        }
        Ok(v)
    }

    /// `h ⊕ 0` at depth 0.
    pub fn embed(&self, h: &ComplexVector) -> ComplexVector {
        let mut v = ComplexVector::zeros(self.space.dim(0));
        v.rows_mut(0, self.space.n).copy_from(h);
        v
    }

    /// `max_{i,j} ‖Vᵢ*Vⱼ − δᵢⱼ1‖` at the given depth.
    pub fn orthogonality_defect(&self, depth: usize) -> Result<f64> {
        let mats = (0..self.d())
            .map(|i| self.matrix(i, depth))
            .collect::<Result<Vec<_>>>()?;
        let dim = self.space.dim(depth);
        let mut worst: f64 = 0.0;
        for (i, mi) in mats.iter().enumerate() {
            for (j, mj) in mats.iter().enumerate() {
                let mut g = mi.adjoint() * mj;
                if i == j {
                    g -= ComplexMatrix::identity(dim, dim);
                }
                worst = worst.max(numerics::operator_norm(&g));
            }
        }
        Ok(worst)
    }

    /// `max_{|α|≤L} ‖p_ℋV_α|_ℋ − A_α‖`.
    pub fn compressed_word_deviation(&self, max_len: usize) -> Result<f64> {
        let n = self.space.n;
        let ix = WordIndexer::new(self.d(), max_len)?;
        let mut worst: f64 = 0.0;
        for w in ix.words() {
            let want = self.tuple.word_product(w.letters());
            for k in 0..n {
                let mut e = ComplexVector::zeros(n);
                e[k] = r(1.0);
                let v = self.apply_word(w.letters(), &e)?;
                let got = v.rows(0, n).into_owned();
                worst = worst.max((got - want.column(k)).norm());
            }
        }
        Ok(worst)
    }

    /// `h ∈ ℋ` pushed through `V_β* = V_{β_m}*⋯V_{β_1}*`; stays in `ℋ ⊕ 0`.
    fn adjoint_word_on_h(&self, letters: &[usize], h: &ComplexVector) -> Result<ComplexVector> {
        let mut v = self.embed(h);
        for &l in letters {
            v = self.apply_adjoint(l - 1, &v, 0)?;
        }
        Ok(v)
    }
}

/// `max |⟨Ω, V_αV_β*Ω⟩ − ω_α·conj(ω_β)|` over `|α|, |β| ≤ max_len`.
pub fn cuntz_state_check(dil: &PopescuDilation, profile: &ErgodicProfile, max_len: usize) -> Result<f64> {
    let ix = WordIndexer::new(dil.d(), max_len)?;
    let omega_word = |w: &Word| -> C64 {
        w.letters().iter().fold(r(1.0), |acc, &l| acc * profile.omega[l - 1])
    };
    let n = dil.space.n;
    let mut worst: f64 = 0.0;
    for beta in ix.words() {
        let reversed: Vec<usize> = beta.letters().iter().rev().copied().collect();
        let back = dil.adjoint_word_on_h(&reversed, &profile.omega_h)?;
        let h = back.rows(0, n).into_owned();
        for alpha in ix.words() {
            let forward = dil.apply_word(alpha.letters(), &h)?;
            let value = profile.omega_h.dotc(&forward.rows(0, n).into_owned());
            let want = omega_word(&alpha) * omega_word(&beta).conj();
            worst = worst.max((value - want).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalityReport {
    /// Rank of `{V_α h : |α| ≤ N}`.
    pub rank: usize,
    /// `dim ℋ ⊕ (Γ_{N−1} ⊗ 𝒟)`.
    pub expected: usize,
    /// Largest component of a spanning vector on words of length `N`.
    pub leak: f64,
}

impl MinimalityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.rank == self.expected && self.leak <= tol
    }
}

/// Compares `span{V_αh : |α| ≤ N}` with `ℋ ⊕ (Γ_{N−1} ⊗ 𝒟)` at depth `N ≥ 1`.
pub fn minimality_check(dil: &PopescuDilation, depth: usize, tol: f64) -> Result<MinimalityReport> {
    if depth == 0 {
        return Err(DilationError::DimensionMismatch("minimality needs depth ≥ 1".into()));
    }
    let s = &dil.space;
    let ix = WordIndexer::new(dil.d(), depth)?;
    let dim = s.dim(depth);
    let inner = s.dim(depth - 1);
    let mut cols = Vec::new();
    let mut leak: f64 = 0.0;
    for w in ix.words() {
        for k in 0..s.n {
            let mut e = ComplexVector::zeros(s.n);
            e[k] = r(1.0);
            let v = dil.apply_word(w.letters(), &e)?;
            let mut full = ComplexVector::zeros(dim);
            full.rows_mut(0, v.len()).copy_from(&v);
            leak = leak.max(full.rows(inner, dim - inner).norm());
            cols.push(full);
        }
    }
    let m = ComplexMatrix::from_columns(&cols);
    let sv = singular_values(&m);
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&x| x > tol.max(1e-12) * top.max(1.0)).count();
    Ok(MinimalityReport { rank, expected: inner, leak })
}

/// The dilation `Ṽ` of the one-dimensional tuple `ω` on `ℂ ⊕ (Γ ⊗ 𝒟_ω)`,
/// with `𝒟_ω` written in the given frame.
pub fn scalar_dilation(omega: &ComplexVector, frame: &ComplexMatrix, max_depth: usize) -> Result<PopescuDilation> {
    let tuple = scalar_tuple(omega.as_slice())?;
    let d = omega.len();
    let omega_p = omega.map(|w| w.conj());
    let d_proj = ComplexMatrix::identity(d, d) - &omega_p * omega_p.adjoint();
    PopescuDilation::with_basis(&tuple, &d_proj, frame, max_depth)
}

/// `W = Ĉ ⊕ M_θ̂` from the dilation space of `A` to that of `ω`, truncated
/// at a fixed depth.
#[derive(Debug, Clone)]
pub struct Intertwiner<'a> {
    data: &'a CharacteristicData,
    source: DilationSpace,
    target: DilationSpace,
}

impl<'a> Intertwiner<'a> {
    pub fn new(data: &'a CharacteristicData) -> Result<Self> {
        let d = data.tuple.d();
        let depth = data.params.depth;
        let indexer = WordIndexer::new(d, depth)?;
        Ok(Self {
            source: DilationSpace { n: data.tuple.n(), d, r: data.defects.rank(), indexer: indexer.clone() },
            target: DilationSpace { n: 1, d, r: data.defects.omega_defect_frame.ncols(), indexer },
            data,
        })
    }

    pub fn depth(&self) -> usize {
        self.source.max_depth()
    }

    /// `Wx` for `x` at depth `from`, truncated at depth `to ≤ self.depth()`.
    pub fn apply(&self, x: &ComplexVector, from: usize, to: usize) -> Result<ComplexVector> {
        if to > self.depth() || from > self.depth() {
            return Err(DilationError::TooDeep { requested: from.max(to), available: self.depth() });
        }
        let (s, t) = (&self.source, &self.target);
        if x.len() != s.dim(from) {
            return Err(DilationError::DimensionMismatch("W input has the wrong length".into()));
        }
        let ix = &s.indexer;
        let m = t.r;
        let mut out = ComplexVector::zeros(t.dim(to));
        let h = x.rows(0, s.n).into_owned();
        let (vac, hat) = self.data.poisson.apply_frame(&h);
        out[0] = vac;
        let lim = ix.count_up_to(to);
        out.rows_mut(t.block(0), lim * m).copy_from(&hat.data.rows(0, lim * m));
        let symbol = &self.data.theta_hat.symbol;
        for a in 0..ix.count_up_to(from) {
            let la = ix.len_of(a);
            if la > to {
                break;
            }
            let xa = x.rows(s.block(a), s.r);
            if xa.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            for (b, theta) in symbol.iter_indexed() {
                if la + ix.len_of(b) > to {
                    continue;
                }
                let k = ix.concat_index(a, b);
                let mut blk = out.rows_mut(t.block(k), m);
                blk += theta * xa;
            }
        }
        Ok(out)
    }
}

/// `max ‖WVᵢx − ṼᵢWx‖` over `i` and the standard basis of the depth-`(N−1)`
/// space, with `N` the depth of `data`.
pub fn intertwining_check(data: &CharacteristicData) -> Result<f64> {
    let depth = data.params.depth;
    if depth == 0 {
        return Err(DilationError::DimensionMismatch("intertwining needs depth ≥ 1".into()));
    }
    let et = &data.tuple;
    let dil = PopescuDilation::new(&et.tuple, &data.defects, depth)?;
    let scalar = scalar_dilation(&et.profile.omega, &data.defects.omega_defect_frame, depth)?;
    let w = Intertwiner::new(data)?;
    let dim = dil.space.dim(depth - 1);
    let mut worst: f64 = 0.0;
    for c in 0..dim {
        let mut x = ComplexVector::zeros(dim);
        x[c] = r(1.0);
        let wx = w.apply(&x, depth - 1, depth - 1)?;
        for i in 0..et.d() {
            let left = w.apply(&dil.apply(i, &x, depth - 1)?, depth, depth)?;
            let right = scalar.apply(i, &wx, depth - 1)?;
            worst = worst.max((left - right).norm());
        }
    }
    Ok(worst)
}

/// `w_n h = Σ_{|β|=n} A_β*h ⊗ ε_β`, stored sparsely by word.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingState {
    pub step: usize,
    pub coeffs: BTreeMap<Word, ComplexVector>,
}

impl CouplingState {
    pub fn new(h: &ComplexVector) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Word::empty(), h.clone());
        Self { step: 0, coeffs }
    }

    /// `Σ_β ‖coef_β‖²`.
    pub fn mass(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm_squared()).sum()
    }
}

/// One application of `u*`: the coefficient at `β` spawns `Aⱼ*h_β` at `βj`.
pub fn coupling_step(state: &CouplingState, tuple: &RowContraction, budget: usize) -> Result<CouplingState> {
    let d = tuple.d();
    let next_len = state.coeffs.len().saturating_mul(d);
    if next_len > budget {
        return Err(FockError::BudgetExceeded { words: next_len as u128, budget }.into());
    }
    let adjoints: Vec<ComplexMatrix> = tuple.mats().iter().map(|a| a.adjoint()).collect();
    let mut coeffs = BTreeMap::new();
    for (w, v) in &state.coeffs {
        for (j, a) in adjoints.iter().enumerate() {
            let child = a * v;
            if child.norm() >= COUPLING_PRUNE {
                coeffs.insert(w.append(j + 1), child);
            }
        }
    }
    Ok(CouplingState { step: state.step + 1, coeffs })
}

/// Coefficients of `Ĉh` recovered from `n` coupling steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEstimate {
    pub steps: usize,
    pub vacuum: C64,
    /// Words `|α| < n`, fibres in `𝒟_ω` frame coordinates.
    pub coeffs: FockVector,
    /// `Σ_{|β|=n} ‖Q A_β*h‖²`, the part not yet resolved.
    pub residual_mass: f64,
}

/// Runs `steps ≥ 1` coupling steps from `h` and reads off the Fock
/// coefficients: the `Ω`-component of each leg-tensor is contracted against
/// `Ω_P` on trailing legs and against the `𝒟_ω` frame on the leg after the
/// prefix `α`.
pub fn product_intertwiner_coefficients(
    tuple: &RowContraction,
    profile: &ErgodicProfile,
    frame: &ComplexMatrix,
    h: &ComplexVector,
    steps: usize,
) -> Result<CouplingEstimate> {
    if steps == 0 {
        return Err(DilationError::DimensionMismatch("need at least one coupling step".into()));
    }
    let d = tuple.d();
    let ix = WordIndexer::new(d, steps)?;
    let mut state = CouplingState::new(h);
    for _ in 0..steps {
        state = coupling_step(&state, tuple, crate::fock::DEFAULT_WORD_BUDGET)?;
    }
    // levels[m][value] = R_m at the word of length m with base-d value.
    let mut top = vec![r(0.0); ix.level(steps).len()];
    let mut residual_mass = 0.0;
    let offset = ix.level(steps).start;
    for (w, v) in &state.coeffs {
        let t = profile.omega_h.dotc(v);
        top[ix.index(w)? - offset] = t;
        residual_mass += (v - &profile.omega_h * t).norm_squared();
    }
    let mut levels = vec![top];
    for _ in 0..steps {
        let prev = levels.last().expect("non-empty");
        let next: Vec<C64> = prev
            .chunks(d)
            .map(|ch| ch.iter().zip(profile.omega.iter()).map(|(x, w)| x * w).sum())
            .collect();
        levels.push(next);
    }
    levels.reverse();
    let m = frame.ncols();
    let out_ix = WordIndexer::new(d, steps - 1)?;
    let mut coeffs = FockVector::zeros(out_ix.clone(), m);
    for k in 0..out_ix.count() {
        let len = out_ix.len_of(k);
        let value = k - out_ix.level(len).start;
        let children = &levels[len + 1][value * d..(value + 1) * d];
        for col in 0..m {
            let f = frame.column(col);
            coeffs.data[k * m + col] = children.iter().zip(f.iter()).map(|(x, fj)| fj.conj() * x).sum();
        }
    }
    Ok(CouplingEstimate { steps, vacuum: levels[0][0], coeffs, residual_mass })
}

/// `max` over resolved words of the distance between the coupling estimate
/// and `Ĉh` in frame coordinates, vacuum included.
pub fn oracle_deviation(est: &CouplingEstimate, poisson: &PoissonKernel, h: &ComplexVector) -> f64 {
    let (vac, hat) = poisson.apply_frame(h);
    let m = est.coeffs.fiber_dim;
    let count = est.coeffs.indexer.count().min(hat.indexer.count());
    let mut worst = (vac - est.vacuum).norm();
    for k in 0..count {
        let a = est.coeffs.data.rows(k * m, m);
        let b = hat.data.rows(k * m, m);
        worst = worst.max((a - b).norm());
    }
    worst
}
