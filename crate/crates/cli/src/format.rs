//! JSON file formats. Complex scalars are `[re, im]` pairs, matrices are
//! row-major lists of rows.

use charfun_core::charfun::CharacteristicData;
use charfun_core::fock::{isometry_defect, MultiAnalyticSymbol, Word};
use charfun_core::numerics::{ComplexMatrix, ComplexVector, C64};
use charfun_core::tuple::{star_stability_norms, RowContraction};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub type Cx = [f64; 2];

/// Pretty JSON with every array of scalars, and every array of such arrays,
/// kept on one line, so `[re, im]` pairs and matrix rows stay readable.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    out
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| !x.is_array() && !x.is_object()),
        _ => false,
    }
}

fn is_inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| (!x.is_array() && !x.is_object()) || is_flat(x)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) if !is_inline(v) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(item, indent, out);
            }
            out.push(']');
        }
        other => out.push_str(&serde_json::to_string(other).expect("scalar serializes")),
    }
}

pub fn to_cx(z: C64) -> Cx {
    [z.re, z.im]
}

pub fn from_cx(z: Cx) -> C64 {
    C64::new(z[0], z[1])
}

pub fn vector_out(v: &ComplexVector) -> Vec<Cx> {
    v.iter().map(|&z| to_cx(z)).collect()
}

pub fn matrix_out(m: &ComplexMatrix) -> Vec<Vec<Cx>> {
    m.row_iter().map(|row| row.iter().map(|&z| to_cx(z)).collect()).collect()
}

/// Columns of `m` as rows, for frames stored one vector per row.
pub fn columns_out(m: &ComplexMatrix) -> Vec<Vec<Cx>> {
    matrix_out(&m.transpose())
}

pub fn vector_in(field: &str, v: &[Cx], len: usize) -> Result<ComplexVector, CliError> {
    if v.len() != len {
        return Err(CliError::Input(format!("{field}: expected {len} entries, found {}", v.len())));
    }
    Ok(ComplexVector::from_iterator(len, v.iter().map(|&z| from_cx(z))))
}

pub fn matrix_in(field: &str, m: &[Vec<Cx>], rows: usize, cols: usize) -> Result<ComplexMatrix, CliError> {
    if m.len() != rows {
        return Err(CliError::Input(format!("{field}: expected {rows} rows, found {}", m.len())));
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::Input(format!(
                "{field}[{i}]: expected {cols} entries, found {}",
                row.len()
            )));
        }
        for (j, &z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(CliError::Input(format!("{field}[{i}][{j}]: non-finite entry")));
            }
            out[(i, j)] = from_cx(z);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub d: usize,
    pub n: usize,
    /// `matrices[i][row][col]`.
    pub matrices: Vec<Vec<Vec<Cx>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_hint: Option<Vec<Cx>>,
    #[serde(rename = "Omega_hint", default, skip_serializing_if = "Option::is_none")]
    pub big_omega_hint: Option<Vec<Cx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl TupleFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn read(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{path}: {msg}")),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(self)
    }

    pub fn from_tuple(t: &RowContraction, label: Option<String>) -> Self {
        Self {
            d: t.d(),
            n: t.n(),
            matrices: t.mats().iter().map(matrix_out).collect(),
            omega_hint: None,
            big_omega_hint: None,
            label,
        }
    }

    pub fn tuple(&self) -> Result<RowContraction, CliError> {
        if self.matrices.len() != self.d {
            return Err(CliError::Input(format!(
                "matrices: expected d = {} matrices, found {}",
                self.d,
                self.matrices.len()
            )));
        }
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_in(&format!("matrices[{i}]"), m, self.n, self.n))
            .collect::<Result<Vec<_>, _>>()?;
        RowContraction::new(mats).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn omega_hint(&self) -> Result<Option<ComplexVector>, CliError> {
        self.omega_hint.as_ref().map(|v| vector_in("omega_hint", v, self.d)).transpose()
    }

    pub fn big_omega_hint(&self) -> Result<Option<ComplexVector>, CliError> {
        self.big_omega_hint.as_ref().map(|v| vector_in("Omega_hint", v, self.n)).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    /// One-based letters.
    pub word: Vec<usize>,
    pub matrix: Vec<Vec<Cx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖Θ*Θ − 1‖` of the truncated symbol.
    pub isometry_defect: f64,
    /// `s_{N+1}`, the star-stability tail beyond the truncation depth.
    pub s_tail: f64,
    /// Largest distance of a coefficient column from `𝒟_ω`.
    pub membership_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopescuBlock {
    /// Orthonormal basis of `ℋ̊` in ambient coordinates, one vector per row.
    pub ring_basis: Vec<Vec<Cx>>,
    /// Basis of `𝒟̊` in `⊕ᵈℋ̊` ring coordinates, one vector per row.
    pub defect_basis: Vec<Vec<Cx>>,
    /// Basis of `𝒟̊_*` in ring coordinates, one vector per row.
    pub target_frame: Vec<Vec<Cx>>,
    pub coefficients: Vec<Coefficient>,
    /// `γ : 𝒟̊_* → 𝒟_ω` between the two frames.
    pub gamma: Vec<Vec<Cx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFile {
    pub d: usize,
    pub depth: usize,
    pub omega: Vec<Cx>,
    /// `(d−1)` rows, each a vector of `ℂᵈ`.
    pub omega_defect_frame: Vec<Vec<Cx>>,
    /// `dn × r`.
    pub defect_basis: Vec<Vec<Cx>>,
    pub coefficients: Vec<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popescu: Option<PopescuBlock>,
}

fn coefficients_out(sym: &MultiAnalyticSymbol) -> Vec<Coefficient> {
    sym.iter()
        .map(|(w, m)| Coefficient { word: w.letters().to_vec(), matrix: matrix_out(m) })
        .collect()
}

impl SymbolFile {
    pub fn from_data(data: &CharacteristicData, popescu: bool) -> Self {
        let sym = &data.theta_hat.symbol;
        let depth = data.params.depth;
        let s_tail = star_stability_norms(&data.tuple.profile, depth + 1)[depth];
        let diagnostics = Diagnostics {
            isometry_defect: isometry_defect(sym).norm,
            s_tail,
            membership_residual: data.membership_residual(),
        };
        let popescu = popescu.then(|| PopescuBlock {
            ring_basis: columns_out(&data.tuple.profile.ring_basis),
            defect_basis: columns_out(&data.ring.basis_d),
            target_frame: columns_out(&data.ring.basis_d_star),
            coefficients: coefficients_out(&data.theta_ring),
            gamma: matrix_out(&data.gamma),
        });
        Self {
            d: data.tuple.d(),
            depth,
            omega: vector_out(&data.tuple.profile.omega),
            omega_defect_frame: columns_out(sym.target_frame()),
            defect_basis: matrix_out(&data.defects.basis),
            coefficients: coefficients_out(sym),
            diagnostics: Some(diagnostics),
            popescu,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        file.check()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(self)
    }

    fn check(&self) -> Result<(), CliError> {
        let words: Vec<Word> = self.coefficients.iter().map(|c| Word(c.word.clone())).collect();
        let canonical = |a: &Word, b: &Word| (a.len(), a.letters()) < (b.len(), b.letters());
        if !words.windows(2).all(|p| canonical(&p[0], &p[1])) {
            return Err(CliError::Input("coefficients: words not in canonical order".into()));
        }
        if let Some(bad) = words.iter().find(|w| w.len() > self.depth || w.letters().iter().any(|&l| l == 0 || l > self.d)) {
            return Err(CliError::Input(format!("coefficients: invalid word {bad}")));
        }
        Ok(())
    }

    /// The stored `θ̂` as a symbol with its `𝒟_ω` frame.
    pub fn symbol(&self) -> Result<MultiAnalyticSymbol, CliError> {
        let d = self.d;
        let frame = matrix_in("omega_defect_frame", &self.omega_defect_frame, d.saturating_sub(1), d)?.transpose();
        let r = self.defect_basis.first().map_or(0, Vec::len);
        let mut sym = MultiAnalyticSymbol::new(d, self.depth, r, frame).map_err(|e| CliError::Input(e.to_string()))?;
        for (k, c) in self.coefficients.iter().enumerate() {
            let m = matrix_in(&format!("coefficients[{k}].matrix"), &c.matrix, d - 1, r)?;
            sym.insert(&Word(c.word.clone()), m).map_err(|e| CliError::Input(e.to_string()))?;
        }
        Ok(sym)
    }
}
