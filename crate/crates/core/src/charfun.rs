//! Defect spaces, the Poisson kernel `Ĉ`, the extended characteristic
//! function `θ̂`, Popescu's characteristic function `θ°` of the `*`-stable
//! corner `Å`, and the isometry `γ` linking them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::fock::{
    apply_symbol, FockError, FockVector, MultiAnalyticSymbol, TruncationParams, Word, WordIndexer,
};
use crate::numerics::{
    self, isometry_defect, operator_norm, orthonormal_range, pseudo_inverse, psd_sqrt, ComplexMatrix,
    ComplexVector, NumericsError, C64,
};
use crate::tuple::{validate, ErgodicProfile, ErgodicTuple, RowContraction, TupleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharfunError {
    #[error("tuple is not coisometric (defect {defect:.3e})")]
    NotCoisometric { defect: f64 },
    #[error("coefficient at word {word} leaves the target subspace (residual {residual:.3e})")]
    FrameMembership { word: String, residual: f64 },
    #[error("γ is not isometric (‖γ*γ − 1‖ = {defect:.3e}, fit residual {residual:.3e})")]
    NotIsometric { defect: f64, residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, CharfunError>;

/// Blocks drop out of a symbol when their norm is at most this.
const PRUNE: f64 = 1e-15;

/// Defects of the full tuple and the `ω`-defect space `𝒟_ω ⊂ ℂᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectData {
    pub n: usize,
    pub d: usize,
    /// `D` on `⊕ᵈℂⁿ`; a projection for coisometric tuples.
    pub d_proj: ComplexMatrix,
    /// Orthonormal basis `Ξ` of `𝒟_A = Range D` (`dn×r`).
    pub basis: ComplexMatrix,
    /// `Ω_P = (ω̄₁, …, ω̄_d)ᵀ`.
    pub omega_p: ComplexVector,
    /// Orthonormal basis of `𝒟_ω = Ω_P⊥` (`d×(d−1)`).
    pub omega_defect_frame: ComplexMatrix,
}

impl DefectData {
    pub fn new(tuple: &RowContraction, omega: &ComplexVector, tol: f64) -> Result<Self> {
        let (d, n) = (tuple.d(), tuple.n());
        let report = validate(tuple, tol);
        let column = tuple.adjoint_column();
        let d_sq = ComplexMatrix::identity(d * n, d * n) - &column * column.adjoint();
        let basis = orthonormal_range(&d_sq, tol.max(1e-9));
        let d_proj = if report.is_coisometric {
            d_sq
        } else if report.is_contraction {
            psd_sqrt(&d_sq, tol)?
        } else {
            return Err(CharfunError::NotCoisometric { defect: report.coisometry_defect });
        };
        let omega_p = omega.map(|w| w.conj());
        let frame = omega_frame(&omega_p, tol);
        Ok(Self { n, d, d_proj, basis, omega_p, omega_defect_frame: frame })
    }

    /// `r = dim 𝒟_A`.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `dⁱ_h = D(0, …, h, …, 0)` in `⊕ᵈℂⁿ`, zero-based `i`.
    pub fn defect_vector(&self, i: usize, h: &ComplexVector) -> ComplexVector {
        self.d_proj.columns(i * self.n, self.n) * h
    }

    /// Coordinates of a vector of `𝒟_A` in the basis `Ξ`.
    pub fn coords(&self, v: &ComplexVector) -> ComplexVector {
        self.basis.adjoint() * v
    }
}

fn omega_frame(omega_p: &ComplexVector, tol: f64) -> ComplexMatrix {
    let d = omega_p.len();
    let proj = ComplexMatrix::identity(d, d) - omega_p * omega_p.adjoint();
    orthonormal_range(&proj, tol.max(1e-9))
}

/// Defects of `Å` in `ring_basis` coordinates (`n′ = n − 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct RingDefectData {
    pub ring_dim: usize,
    pub d: usize,
    /// `Åᵢ` as `n′×n′` matrices.
    pub a_ring: Vec<ComplexMatrix>,
    /// `D̊ = (1 − Å*Å)^{1/2}` on `⊕ᵈℋ̊`.
    pub d_ring: ComplexMatrix,
    /// `D̊_* = (Σ|ℓᵢ⟩⟨ℓᵢ|)^{1/2}` on `ℋ̊`.
    pub d_ring_star: ComplexMatrix,
    pub basis_d: ComplexMatrix,
    pub basis_d_star: ComplexMatrix,
}

impl RingDefectData {
    pub fn new(profile: &ErgodicProfile, tol: f64) -> Result<Self> {
        let m = profile.ring_dim();
        let d = profile.d();
        let a_ring = profile.a_ring_coords();
        let mut row = ComplexMatrix::zeros(m, d * m);
        for (i, a) in a_ring.iter().enumerate() {
            row.columns_mut(i * m, m).copy_from(a);
        }
        let d_ring_sq = ComplexMatrix::identity(d * m, d * m) - row.adjoint() * &row;
        let d_ring = psd_sqrt(&d_ring_sq, tol)?;
        let ell = profile.ell_coords();
        let ell_gram = ell
            .iter()
            .fold(ComplexMatrix::zeros(m, m), |acc, l| acc + l * l.adjoint());
        let d_ring_star = psd_sqrt(&ell_gram, tol)?;
        // Ranges come from the squares: a square root lifts rounding noise
        // near zero to the size of its square root.
        let rank_tol = tol.max(1e-9);
        Ok(Self {
            ring_dim: m,
            d,
            basis_d: orthonormal_range(&d_ring_sq, rank_tol),
            basis_d_star: orthonormal_range(&ell_gram, rank_tol),
            a_ring,
            d_ring,
            d_ring_star,
        })
    }

    /// `D̊(0, …, h, …, 0)` for `h` in ring coordinates, zero-based `i`.
    pub fn defect_vector(&self, i: usize, h: &ComplexVector) -> ComplexVector {
        self.d_ring.columns(i * self.ring_dim, self.ring_dim) * h
    }

    /// `D̊_*` viewed on ambient `ℂⁿ`.
    pub fn d_ring_star_ambient(&self, profile: &ErgodicProfile) -> ComplexMatrix {
        &profile.ring_basis * &self.d_ring_star * profile.ring_basis.adjoint()
    }
}

/// `D̂* : ℋ → ℂᵈ`, row `i` equal to `⟨ℓᵢ|`.
pub fn dstar_hat(profile: &ErgodicProfile) -> ComplexMatrix {
    let (d, n) = (profile.d(), profile.n());
    let mut out = ComplexMatrix::zeros(d, n);
    for (i, l) in profile.ell.iter().enumerate() {
        out.row_mut(i).copy_from(&l.adjoint());
    }
    out
}

/// `X_α* = X_{α_m}*⋯X_{α_1}*` for every word of length `≤ depth`, one
/// product per word.
fn adjoint_word_products(ops: &[ComplexMatrix], ix: &WordIndexer) -> Vec<ComplexMatrix> {
    let n = ops[0].nrows();
    let adjoints: Vec<ComplexMatrix> = ops.iter().map(|a| a.adjoint()).collect();
    let mut out = Vec::with_capacity(ix.count());
    out.push(ComplexMatrix::identity(n, n));
    for k in 1..ix.count() {
        let (parent, letter) = ix.split_last(k);
        let next = &adjoints[letter - 1] * &out[parent];
        out.push(next);
    }
    out
}

/// Coefficient family `c_α = D̂*Å_α*` of the embedding `Ĉ : ℋ → Γ ⊗ ℂᵈ`
/// (ambient `d×n` matrices), together with the `𝒟_ω` frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonKernel {
    pub indexer: WordIndexer,
    pub omega_h: ComplexVector,
    pub coeffs: Vec<ComplexMatrix>,
    pub frame: ComplexMatrix,
}

pub fn poisson_hat(profile: &ErgodicProfile, frame: &ComplexMatrix, depth: usize) -> Result<PoissonKernel> {
    let indexer = WordIndexer::new(profile.d(), depth)?;
    let dstar = dstar_hat(profile);
    let coeffs = adjoint_word_products(&profile.a_ring, &indexer)
        .iter()
        .map(|p| &dstar * p)
        .collect();
    Ok(PoissonKernel { indexer, omega_h: profile.omega_h.clone(), coeffs, frame: frame.clone() })
}

impl PoissonKernel {
    pub fn depth(&self) -> usize {
        self.indexer.depth()
    }

    pub fn coefficient(&self, word: &Word) -> Result<&ComplexMatrix> {
        let i = self.indexer.index(word)?;
        self.coeffs
            .get(i)
            .ok_or_else(|| CharfunError::DimensionMismatch(format!("word {word} deeper than kernel")))
    }

    /// `Ĉh = ⟨Ω,h⟩·1 ⊕ Σ_α e_α ⊗ c_α h` with ambient `ℂᵈ` fibres.
    pub fn apply(&self, h: &ComplexVector) -> (C64, FockVector) {
        let d = self.frame.nrows();
        let mut out = FockVector::zeros(self.indexer.clone(), d);
        for (k, c) in self.coeffs.iter().enumerate() {
            out.data.rows_mut(k * d, d).copy_from(&(c * h));
        }
        (self.omega_h.dotc(h), out)
    }

    /// `Ĉh` with fibres in `𝒟_ω` frame coordinates.
    pub fn apply_frame(&self, h: &ComplexVector) -> (C64, FockVector) {
        let m = self.frame.ncols();
        let mut out = FockVector::zeros(self.indexer.clone(), m);
        let fa = self.frame.adjoint();
        for (k, c) in self.coeffs.iter().enumerate() {
            out.data.rows_mut(k * m, m).copy_from(&(&fa * (c * h)));
        }
        (self.omega_h.dotc(h), out)
    }

    /// `‖Qh‖² − Σ_{|α|≤N}‖c_α h‖²`.
    pub fn truncation_gap(&self, h: &ComplexVector) -> f64 {
        let ring = h - &self.omega_h * self.omega_h.dotc(h);
        let captured: f64 = self.coeffs.iter().map(|c| (c * h).norm_squared()).sum();
        ring.norm_squared() - captured
    }
}

/// `θ̂` with the data needed to compare it across tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedCharfun {
    pub symbol: MultiAnalyticSymbol,
    pub omega: ComplexVector,
    /// Basis `Ξ` of `𝒟_A` the symbol's source coordinates refer to.
    pub defect_basis: ComplexMatrix,
}

impl ExtendedCharfun {
    pub fn depth(&self) -> usize {
        self.symbol.depth()
    }

    /// `θ̂` applied to `ξ ∈ 𝒟_A ⊂ ⊕ᵈℂⁿ`, fibres in frame coordinates.
    pub fn apply_defect_vector(&self, v: &ComplexVector) -> Result<FockVector> {
        Ok(apply_symbol(&self.symbol, &(self.defect_basis.adjoint() * v))?)
    }

    /// The same symbol with `𝒟_A` re-based by the unitary `u` (new basis `Ξu`).
    pub fn rebase(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            symbol: self.symbol.compose_source(u)?,
            omega: self.omega.clone(),
            defect_basis: &self.defect_basis * u,
        })
    }
}

fn to_frame(frame: &ComplexMatrix, v: &ComplexVector, word: &dyn Fn() -> String, tol: f64) -> Result<ComplexVector> {
    let coords = frame.adjoint() * v;
    let residual = (v - frame * &coords).norm();
    if residual > tol * v.norm().max(1.0) {
        return Err(CharfunError::FrameMembership { word: word(), residual });
    }
    Ok(coords)
}

/// The extended characteristic function on an orthonormal basis of `𝒟_A`.
///
/// Each basis vector `ξ` is written as `Σᵢ dⁱ_{ξᵢ}` with `ξᵢ = cᵢΩ + h̊ᵢ`;
/// the `Ω`-parts follow the closed form for `h = Ω`, the `ℋ̊`-parts the one
/// for `h ⊥ Ω`.
pub fn extended_charfun(
    et: &ErgodicTuple,
    defects: &DefectData,
    poisson: &PoissonKernel,
    params: &TruncationParams,
) -> Result<ExtendedCharfun> {
    let profile = &et.profile;
    let (d, n) = (et.d(), et.n());
    let depth = params.depth;
    if poisson.depth() < depth {
        return Err(CharfunError::DimensionMismatch("Poisson kernel shallower than requested depth".into()));
    }
    let ix = WordIndexer::new(d, depth)?;
    let r = defects.rank();
    let frame = &defects.omega_defect_frame;

    // k_{ji} = ⟨AⱼΩ, AᵢΩ⟩
    let mut images = ComplexMatrix::zeros(n, d);
    for (i, a) in et.tuple.mats().iter().enumerate() {
        images.set_column(i, &(a * &profile.omega_h));
    }
    let e0_case_one = ComplexMatrix::identity(d, d) - images.adjoint() * &images;
    let dstar = dstar_hat(profile);

    // Per basis vector: e₀ coefficient, g = Σcᵢℓᵢ and yⱼ = h̊ⱼ − Åⱼ*ΣÅᵢh̊ᵢ.
    let mut e0 = ComplexMatrix::zeros(d, r);
    let mut g = ComplexMatrix::zeros(n, r);
    let mut y: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(n, r); d];
    for col in 0..r {
        let xi = defects.basis.column(col);
        let mut cvec = ComplexVector::zeros(d);
        let mut mixed = ComplexVector::zeros(n);
        let mut g_col = ComplexVector::zeros(n);
        let mut rings = Vec::with_capacity(d);
        for i in 0..d {
            let block: ComplexVector = xi.rows(i * n, n).into_owned();
            let ci = profile.omega_h.dotc(&block);
            let ring = &block - &profile.omega_h * ci;
            cvec[i] = ci;
            g_col += &profile.ell[i] * ci;
            mixed += &profile.a_ring[i] * &ring;
            rings.push(ring);
        }
        g.set_column(col, &g_col);
        e0.set_column(col, &(&e0_case_one * &cvec - &dstar * &mixed));
        for j in 0..d {
            y[j].set_column(col, &(&rings[j] - profile.a_ring[j].adjoint() * &mixed));
        }
    }

    let mut symbol = MultiAnalyticSymbol::new(d, depth, r, frame.clone())?;
    let tol = params.tol;
    for k in 0..ix.count() {
        let ambient = if k == 0 {
            e0.clone()
        } else {
            let (first, rest) = split_first(&ix, k);
            -&poisson.coeffs[k] * &g + &poisson.coeffs[rest] * &y[first - 1]
        };
        if ambient.norm() <= PRUNE {
            continue;
        }
        let mut coords = ComplexMatrix::zeros(frame.ncols(), r);
        for col in 0..r {
            let v = ambient.column(col).into_owned();
            let c = to_frame(frame, &v, &|| ix.word(k).to_string(), tol)?;
            coords.set_column(col, &c);
        }
        symbol.insert_index(k, coords)?;
    }
    Ok(ExtendedCharfun { symbol, omega: profile.omega.clone(), defect_basis: defects.basis.clone() })
}

/// First letter and index of the remaining suffix of a non-empty word.
fn split_first(ix: &WordIndexer, k: usize) -> (usize, usize) {
    let w = ix.word(k);
    let rest = Word(w.letters()[1..].to_vec());
    (w.letters()[0], ix.index(&rest).expect("suffix of an indexed word"))
}

/// Word-by-word series `α ↦ vector in ℂᵈ`, in canonical order.
pub type CaseSeries = Vec<(Word, ComplexVector)>;

/// `θ̂dⁱ_Ω` from its closed form, zero-based `i`: `εᵢ − Σⱼ⟨AⱼΩ,AᵢΩ⟩εⱼ`
/// at `e₀` and `−Σⱼ⟨Å_αℓⱼ, ℓᵢ⟩εⱼ` at `α`.
pub fn case_one_series(et: &ErgodicTuple, i: usize, depth: usize) -> Result<CaseSeries> {
    let p = &et.profile;
    let d = et.d();
    let ix = WordIndexer::new(d, depth)?;
    let ai_omega = et.tuple.get(i) * &p.omega_h;
    let mut out = Vec::with_capacity(ix.count());
    for w in ix.words() {
        let mut v = ComplexVector::zeros(d);
        if w.is_empty() {
            v[i] = numerics::r(1.0);
            for j in 0..d {
                v[j] -= (et.tuple.get(j) * &p.omega_h).dotc(&ai_omega);
            }
        } else {
            let prod = ring_word_product(p, w.letters());
            for j in 0..d {
                v[j] = -(&prod * &p.ell[j]).dotc(&p.ell[i]);
            }
        }
        out.push((w, v));
    }
    Ok(out)
}

/// `θ̂dⁱ_h` for `h ⊥ Ω` from its closed form, zero-based `i`: `−D̂*Åᵢh` at
/// `e₀` and `D̂*Å_α*(δⱼᵢ1 − Åⱼ*Åᵢ)h` at the word `(j, α)`.
pub fn case_two_series(et: &ErgodicTuple, i: usize, h: &ComplexVector, depth: usize) -> Result<CaseSeries> {
    let p = &et.profile;
    let d = et.d();
    let ix = WordIndexer::new(d, depth)?;
    let dstar = dstar_hat(p);
    let mut out = Vec::with_capacity(ix.count());
    for w in ix.words() {
        let v = if w.is_empty() {
            -(&dstar * (&p.a_ring[i] * h))
        } else {
            let j = w.letters()[0] - 1;
            let mut inner = -(p.a_ring[j].adjoint() * (&p.a_ring[i] * h));
            if j == i {
                inner += h;
            }
            let prod = ring_word_product(p, &w.letters()[1..]);
            &dstar * (prod.adjoint() * inner)
        };
        out.push((w, v));
    }
    Ok(out)
}

/// `Å_α = Å_{α₁}⋯Å_{α_m}` in ambient coordinates.
pub fn ring_word_product(p: &ErgodicProfile, letters: &[usize]) -> ComplexMatrix {
    let n = p.n();
    letters
        .iter()
        .fold(ComplexMatrix::identity(n, n), |acc, &l| acc * &p.a_ring[l - 1])
}

/// Popescu's characteristic function `θ°` of `Å` on an orthonormal basis of
/// `𝒟̊`, coefficients in the basis of `𝒟̊_*`.
pub fn popescu_charfun(ring: &RingDefectData, params: &TruncationParams) -> Result<MultiAnalyticSymbol> {
    let (d, m) = (ring.d, ring.ring_dim);
    let src = ring.basis_d.ncols();
    let frame = ring.basis_d_star.clone();
    let mut symbol = MultiAnalyticSymbol::new(d, params.depth, src, frame.clone())?;
    if m == 0 || src == 0 {
        return Ok(symbol);
    }
    let ix = symbol.indexer().clone();
    let products = adjoint_word_products(&ring.a_ring, &ix);
    let f = &ring.basis_d;
    let df = &ring.d_ring * f;
    let mut e0 = ComplexMatrix::zeros(m, src);
    for (j, a) in ring.a_ring.iter().enumerate() {
        e0 -= a * f.rows(j * m, m);
    }
    for k in 0..ix.count() {
        let ambient = if k == 0 {
            e0.clone()
        } else {
            let (first, rest) = split_first(&ix, k);
            &ring.d_ring_star * &products[rest] * df.rows((first - 1) * m, m)
        };
        if ambient.norm() <= PRUNE {
            continue;
        }
        let mut coords = ComplexMatrix::zeros(frame.ncols(), src);
        for col in 0..src {
            let v = ambient.column(col).into_owned();
            coords.set_column(col, &to_frame(&frame, &v, &|| ix.word(k).to_string(), params.tol)?);
        }
        symbol.insert_index(k, coords)?;
    }
    Ok(symbol)
}

/// Coefficients `D̊_*Å_α*` of Popescu's Poisson kernel `C̊`, in `𝒟̊_*` basis
/// coordinates (`m°×n′` matrices).
pub fn popescu_poisson(ring: &RingDefectData, depth: usize) -> Result<Vec<ComplexMatrix>> {
    let ix = WordIndexer::new(ring.d, depth)?;
    if ring.ring_dim == 0 {
        return Ok(vec![ComplexMatrix::zeros(0, 0); ix.count()]);
    }
    let left = ring.basis_d_star.adjoint() * &ring.d_ring_star;
    Ok(adjoint_word_products(&ring.a_ring, &ix).iter().map(|p| &left * p).collect())
}

/// The isometry `γ : 𝒟̊_* → 𝒟_ω` with `γD̊_*h = D̂*h`, from `𝒟̊_*` basis
/// coordinates to `𝒟_ω` frame coordinates.
pub fn gamma_isometry(
    profile: &ErgodicProfile,
    ring: &RingDefectData,
    defects: &DefectData,
    tol: f64,
) -> Result<ComplexMatrix> {
    let k = ring.basis_d_star.ncols();
    let m = defects.omega_defect_frame.ncols();
    if k == 0 {
        return Ok(ComplexMatrix::zeros(m, 0));
    }
    let xc = ring.basis_d_star.adjoint() * &ring.d_ring_star;
    let y = defects.omega_defect_frame.adjoint() * dstar_hat(profile) * &profile.ring_basis;
    let gamma = &y * pseudo_inverse(&xc, tol.max(1e-12));
    let residual = operator_norm(&(&gamma * &xc - &y));
    let defect = isometry_defect(&gamma);
    let gate = (1e2 * tol).max(1e-9);
    if defect > gate || residual > gate {
        return Err(CharfunError::NotIsometric { defect, residual });
    }
    Ok(gamma)
}

/// Everything derived from one ergodic tuple at a fixed depth.
#[derive(Debug, Clone)]
pub struct CharacteristicData {
    pub tuple: ErgodicTuple,
    pub params: TruncationParams,
    pub defects: DefectData,
    pub ring: RingDefectData,
    pub poisson: PoissonKernel,
    pub theta_hat: ExtendedCharfun,
    pub theta_ring: MultiAnalyticSymbol,
    pub gamma: ComplexMatrix,
}

impl CharacteristicData {
    pub fn compute(tuple: ErgodicTuple, params: TruncationParams) -> Result<Self> {
        let tol = params.tol;
        let defects = DefectData::new(&tuple.tuple, &tuple.profile.omega, tol)?;
        let ring = RingDefectData::new(&tuple.profile, tol)?;
        let poisson = poisson_hat(&tuple.profile, &defects.omega_defect_frame, params.depth)?;
        let theta_hat = extended_charfun(&tuple, &defects, &poisson, &params)?;
        let theta_ring = popescu_charfun(&ring, &params)?;
        let gamma = gamma_isometry(&tuple.profile, &ring, &defects, tol)?;
        Ok(Self { tuple, params, defects, ring, poisson, theta_hat, theta_ring, gamma })
    }

    /// Largest distance of a `θ̂` coefficient column from `𝒟_ω`, measured in
    /// the ambient space (zero by construction once stored in the frame).
    pub fn membership_residual(&self) -> f64 {
        let frame = &self.defects.omega_defect_frame;
        let p = &self.defects.omega_p;
        self.theta_hat
            .symbol
            .iter()
            .map(|(_, c)| (p.adjoint() * (frame * c)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem52Report {
    /// `max ‖(1⊗γ)θ°dⁱ_h̊ − θ̂dⁱ_h̊‖` over ring basis vectors and `i`.
    pub charfun_residual: f64,
    /// `max ‖(1⊗γ)C̊h̊ − Ĉh̊‖` over ring basis vectors.
    pub poisson_residual: f64,
}

impl Theorem52Report {
    pub fn max(&self) -> f64 {
        self.charfun_residual.max(self.poisson_residual)
    }
}

/// Compares `θ̂` with `γθ°` on the `ℋ̊`-part of the defect space and `Ĉ`
/// with `γC̊` on `ℋ̊`, word by word up to the depth.
pub fn theorem52_check(data: &CharacteristicData) -> Result<Theorem52Report> {
    let p = &data.tuple.profile;
    let m = p.ring_dim();
    let depth = data.params.depth;
    let d = data.tuple.d();
    let ix = WordIndexer::new(d, depth)?;
    let ring_poisson = popescu_poisson(&data.ring, depth)?;
    let mut charfun_residual: f64 = 0.0;
    let mut poisson_residual: f64 = 0.0;
    for k in 0..m {
        let mut h_ring = ComplexVector::zeros(m);
        h_ring[k] = numerics::r(1.0);
        let h = &p.ring_basis * &h_ring;

        let (_, hat) = data.poisson.apply_frame(&h);
        let mut diff2 = 0.0;
        for (w, c) in ring_poisson.iter().enumerate() {
            let lifted = &data.gamma * (c * &h_ring);
            let ours = hat.data.rows(w * lifted.len(), lifted.len());
            diff2 += (lifted - ours).norm_squared();
        }
        poisson_residual = poisson_residual.max(diff2.sqrt());

        for i in 0..d {
            let full = data.theta_hat.apply_defect_vector(&data.defects.defect_vector(i, &h))?;
            let ring_vec = data.ring.defect_vector(i, &h_ring);
            let ring_coords = data.ring.basis_d.adjoint() * ring_vec;
            let ring_img = apply_symbol(&data.theta_ring, &ring_coords)?;
            let fm = full.fiber_dim;
            let rm = ring_img.fiber_dim;
            let mut diff2 = 0.0;
            for w in 0..ix.count() {
                let ours = full.data.rows(w * fm, fm).into_owned();
                let theirs = if rm == 0 {
                    ComplexVector::zeros(fm)
                } else {
                    &data.gamma * ring_img.data.rows(w * rm, rm)
                };
                diff2 += (ours - theirs).norm_squared();
            }
            charfun_residual = charfun_residual.max(diff2.sqrt());
        }
    }
    Ok(Theorem52Report { charfun_residual, poisson_residual })
}

/// Ambient `θ̂` coefficients of a defect vector, keyed by word.
pub fn ambient_series(charfun: &ExtendedCharfun, v: &ComplexVector) -> Result<BTreeMap<Word, ComplexVector>> {
    let fv = charfun.apply_defect_vector(v)?;
    let frame = charfun.symbol.target_frame();
    let mut out = BTreeMap::new();
    for (k, w) in fv.indexer.words().enumerate() {
        let comp = fv.data.rows(k * fv.fiber_dim, fv.fiber_dim).into_owned();
        out.insert(w, frame * comp);
    }
    Ok(out)
}
