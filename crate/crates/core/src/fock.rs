//! Words over `{1..d}`, truncated full Fock space coordinates and
//! coefficient families of multi-analytic operators.
//!
//! Words are ordered by length, then lexicographically. The index of a word
//! depends only on `d`, so symbols of different depths share keys.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::numerics::{hermitian_eig, operator_norm, ComplexMatrix, ComplexVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("letter {letter} outside 1..={d}")]
    InvalidLetter { letter: usize, d: usize },
    #[error("word budget exceeded: {words} words requested, budget is {budget}")]
    BudgetExceeded { words: u128, budget: usize },
}

pub type Result<T> = std::result::Result<T, FockError>;

pub const DEFAULT_WORD_BUDGET: usize = 1_000_000;

/// Truncation depth `N` and numerical tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    pub depth: usize,
    pub tol: f64,
}

impl Default for TruncationParams {
    fn default() -> Self {
        Self { depth: 6, tol: 1e-10 }
    }
}

/// A word `α = (α₁, …, α_m)` with one-based letters; the empty word is `e₀`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn prepend(&self, letter: usize) -> Self {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn append(&self, letter: usize) -> Self {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// No two consecutive letters are equal.
    pub fn is_alternating(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

/// Index ↔ word bijection for words of length `≤ depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordIndexer {
    d: usize,
    depth: usize,
    /// `offsets[k] = Σ_{j<k} dʲ`, length `depth + 2`.
    offsets: Vec<usize>,
}

fn word_count(d: usize, depth: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(d as u128);
    }
    total
}

impl WordIndexer {
    pub fn new(d: usize, depth: usize) -> Result<Self> {
        Self::with_budget(d, depth, DEFAULT_WORD_BUDGET)
    }

    pub fn with_budget(d: usize, depth: usize, budget: usize) -> Result<Self> {
        if d == 0 {
            return Err(FockError::DimensionMismatch("alphabet must be non-empty".into()));
        }
        // One level of headroom: dilations map depth N into depth N + 1.
        let words = word_count(d, depth + 1);
        if words > budget as u128 {
            return Err(FockError::BudgetExceeded { words, budget });
        }
        let mut offsets = Vec::with_capacity(depth + 3);
        let mut acc = 0usize;
        let mut level = 1usize;
        for _ in 0..=depth + 2 {
            offsets.push(acc);
            acc += level;
            level *= d;
        }
        Ok(Self { d, depth, offsets })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of words of length `≤ depth`.
    pub fn count(&self) -> usize {
        self.offsets[self.depth + 1]
    }

    /// Number of words of length `≤ k`.
    pub fn count_up_to(&self, k: usize) -> usize {
        self.offsets[k + 1]
    }

    /// Index range of the words of length exactly `k`.
    pub fn level(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn index(&self, word: &Word) -> Result<usize> {
        let m = word.len();
        if m > self.depth + 1 {
            return Err(FockError::DimensionMismatch(format!(
                "word of length {m} exceeds depth {}",
                self.depth
            )));
        }
        let mut value = 0usize;
        for &l in word.letters() {
            if l == 0 || l > self.d {
                return Err(FockError::InvalidLetter { letter: l, d: self.d });
            }
            value = value * self.d + (l - 1);
        }
        Ok(self.offsets[m] + value)
    }

    pub fn word(&self, index: usize) -> Word {
        let m = self.offsets.partition_point(|&o| o <= index) - 1;
        let mut value = index - self.offsets[m];
        let mut letters = vec![0; m];
        for slot in letters.iter_mut().rev() {
            *slot = value % self.d + 1;
            value /= self.d;
        }
        Word(letters)
    }

    /// Parent index and last letter of a non-empty word.
    pub fn split_last(&self, index: usize) -> (usize, usize) {
        let m = self.len_of(index);
        let value = index - self.offsets[m];
        (self.offsets[m - 1] + value / self.d, value % self.d + 1)
    }

    pub fn len_of(&self, index: usize) -> usize {
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    /// Index of `α·j` given the index of `α`.
    pub fn append_index(&self, index: usize, letter: usize) -> usize {
        let m = self.len_of(index);
        let value = index - self.offsets[m];
        self.offsets[m + 1] + value * self.d + (letter - 1)
    }

    /// Index of `j·α` given the index of `α`.
    pub fn prepend_index(&self, index: usize, letter: usize) -> usize {
        let m = self.len_of(index);
        let value = index - self.offsets[m];
        self.offsets[m + 1] + (letter - 1) * self.d.pow(m as u32) + value
    }

    /// Index of the concatenation `αβ` given the indices of `α` and `β`.
    pub fn concat_index(&self, a: usize, b: usize) -> usize {
        let (la, lb) = (self.len_of(a), self.len_of(b));
        let va = a - self.offsets[la];
        let vb = b - self.offsets[lb];
        self.offsets[la + lb] + va * self.d.pow(lb as u32) + vb
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.count()).map(|k| self.word(k))
    }
}

/// All words of length `≤ depth` in canonical order.
pub fn words_up_to(d: usize, depth: usize) -> Result<Vec<Word>> {
    let ix = WordIndexer::new(d, depth)?;
    Ok(ix.words().collect())
}

/// A truncated multi-analytic symbol `{θ_α}`, `|α| ≤ depth`, with
/// coefficients `θ_α : ℂʳ → ℂᵐ` written in `target_frame` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiAnalyticSymbol {
    indexer: WordIndexer,
    source_dim: usize,
    /// Orthonormal columns spanning the target inside its ambient space.
    target_frame: ComplexMatrix,
    coeffs: BTreeMap<usize, ComplexMatrix>,
}

impl MultiAnalyticSymbol {
    pub fn new(d: usize, depth: usize, source_dim: usize, target_frame: ComplexMatrix) -> Result<Self> {
        Ok(Self {
            indexer: WordIndexer::new(d, depth)?,
            source_dim,
            target_frame,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.indexer.d()
    }

    pub fn depth(&self) -> usize {
        self.indexer.depth()
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_frame.ncols()
    }

    pub fn target_frame(&self) -> &ComplexMatrix {
        &self.target_frame
    }

    pub fn indexer(&self) -> &WordIndexer {
        &self.indexer
    }

    pub fn insert(&mut self, word: &Word, coeff: ComplexMatrix) -> Result<()> {
        if word.len() > self.depth() {
            return Err(FockError::DimensionMismatch(format!(
                "word {word} is deeper than {}",
                self.depth()
            )));
        }
        let idx = self.indexer.index(word)?;
        self.insert_index(idx, coeff)
    }

    pub(crate) fn insert_index(&mut self, idx: usize, coeff: ComplexMatrix) -> Result<()> {
        if coeff.shape() != (self.target_dim(), self.source_dim) {
            return Err(FockError::DimensionMismatch(format!(
                "coefficient is {}x{}, expected {}x{}",
                coeff.nrows(),
                coeff.ncols(),
                self.target_dim(),
                self.source_dim
            )));
        }
        self.coeffs.insert(idx, coeff);
        Ok(())
    }

    pub fn get(&self, word: &Word) -> Option<&ComplexMatrix> {
        self.indexer.index(word).ok().and_then(|i| self.coeffs.get(&i))
    }

    /// `θ_α`, zero when not stored.
    pub fn coefficient(&self, word: &Word) -> ComplexMatrix {
        self.get(word)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.target_dim(), self.source_dim))
    }

    /// `θ_α` pushed into the ambient target space.
    pub fn ambient_coefficient(&self, word: &Word) -> ComplexMatrix {
        &self.target_frame * self.coefficient(word)
    }

    /// Stored coefficients in canonical word order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, &ComplexMatrix)> + '_ {
        self.coeffs.iter().map(|(&i, m)| (self.indexer.word(i), m))
    }

    pub(crate) fn iter_indexed(&self) -> impl Iterator<Item = (usize, &ComplexMatrix)> + '_ {
        self.coeffs.iter().map(|(&i, m)| (i, m))
    }

    pub fn stored_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Stacked coefficients: rows indexed by `(word, target)`, all words of
    /// length `≤ depth`, columns by the source.
    pub fn stacked(&self) -> ComplexMatrix {
        let m = self.target_dim();
        let mut out = ComplexMatrix::zeros(self.indexer.count() * m, self.source_dim);
        for (&i, c) in &self.coeffs {
            out.view_mut((i * m, 0), (m, self.source_dim)).copy_from(c);
        }
        out
    }

    /// The symbol `θ·V` for `V : ℂʳ' → ℂʳ`.
    pub fn compose_source(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.nrows() != self.source_dim {
            return Err(FockError::DimensionMismatch("source change has wrong row count".into()));
        }
        let mut out = Self {
            indexer: self.indexer.clone(),
            source_dim: v.ncols(),
            target_frame: self.target_frame.clone(),
            coeffs: BTreeMap::new(),
        };
        for (&i, c) in &self.coeffs {
            out.coeffs.insert(i, c * v);
        }
        Ok(out)
    }
}

/// A vector in `Γ_N ⊗ ℂᵐ`, stored word-major: entry `(α, k)` lives at
/// `index(α)·m + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub indexer: WordIndexer,
    pub fiber_dim: usize,
    pub data: ComplexVector,
}

impl FockVector {
    pub fn zeros(indexer: WordIndexer, fiber_dim: usize) -> Self {
        let len = indexer.count() * fiber_dim;
        Self { indexer, fiber_dim, data: ComplexVector::zeros(len) }
    }

    pub fn component(&self, word: &Word) -> ComplexVector {
        match self.indexer.index(word) {
            Ok(i) if i < self.indexer.count() => {
                self.data.rows(i * self.fiber_dim, self.fiber_dim).into_owned()
            }
            _ => ComplexVector::zeros(self.fiber_dim),
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }
}

/// `M_θ(e₀ ⊗ x) = Σ_α e_α ⊗ θ_α x`.
pub fn apply_symbol(sym: &MultiAnalyticSymbol, x: &ComplexVector) -> Result<FockVector> {
    if x.len() != sym.source_dim() {
        return Err(FockError::DimensionMismatch(format!(
            "vector of length {}, symbol source is {}",
            x.len(),
            sym.source_dim()
        )));
    }
    let m = sym.target_dim();
    let mut out = FockVector::zeros(sym.indexer.clone(), m);
    for (&i, c) in &sym.coeffs {
        out.data.rows_mut(i * m, m).copy_from(&(c * x));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryDefect {
    /// `‖1 − Σθ_α*θ_α‖`.
    pub norm: f64,
    /// Smallest eigenvalue of `1 − Σθ_α*θ_α`; negative means over-isometric.
    pub min_eigenvalue: f64,
}

pub fn isometry_defect(sym: &MultiAnalyticSymbol) -> IsometryDefect {
    let r = sym.source_dim();
    if r == 0 {
        return IsometryDefect { norm: 0.0, min_eigenvalue: 0.0 };
    }
    let mut g = ComplexMatrix::identity(r, r);
    for c in sym.coeffs.values() {
        g -= c.adjoint() * c;
    }
    let min_eigenvalue = hermitian_eig(&g, 1e-8)
        .map(|e| e.values[0])
        .unwrap_or(f64::NAN);
    IsometryDefect { norm: operator_norm(&g), min_eigenvalue }
}

/// Coefficients of `(Lᵢ ⊗ 1)M_θ` on `e₀`: every word gets `i` prepended.
/// Words pushed beyond the depth are dropped and reported by the flag.
pub fn shift_compose(sym: &MultiAnalyticSymbol, letter: usize) -> Result<(MultiAnalyticSymbol, bool)> {
    let d = sym.d();
    if letter == 0 || letter > d {
        return Err(FockError::InvalidLetter { letter, d });
    }
    let mut out = MultiAnalyticSymbol {
        indexer: sym.indexer.clone(),
        source_dim: sym.source_dim,
        target_frame: sym.target_frame.clone(),
        coeffs: BTreeMap::new(),
    };
    let mut truncated = false;
    for (&i, c) in &sym.coeffs {
        if sym.indexer.len_of(i) + 1 > sym.depth() {
            truncated = true;
            continue;
        }
        out.coeffs.insert(sym.indexer.prepend_index(i, letter), c.clone());
    }
    Ok((out, truncated))
}
