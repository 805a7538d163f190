use std::fmt::Write as _;
use std::path::PathBuf;

use charfun_core::charfun::{poisson_hat, theorem52_check, CharacteristicData, DefectData};
use charfun_core::dilation::{
    coupling_step, cuntz_state_check, intertwining_check, oracle_deviation, product_intertwiner_coefficients,
    CouplingState, PopescuDilation,
};
use charfun_core::equivalence::{corollary63_check, theorem61_crosscheck, EquivalenceParams, Theorem61Report};
use charfun_core::fock::{TruncationParams, DEFAULT_WORD_BUDGET};
use charfun_core::numerics::{ComplexMatrix, ComplexVector, C64};
use charfun_core::tuple::{
    omega_p_power_decay, random_ergodic_tuple, scalar_tuple, section7, star_stability_norms, validate,
    ErgodicTuple, ErgodicityParams, RowContraction,
};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::format::{matrix_out, vector_out, SymbolFile, TupleFile};
use crate::CliError;

/// Rows of the `rₙ` table printed by `analyze`.
const R_TABLE_LEN: usize = 20;
/// Rows of the `sₙ` table printed by `analyze`.
const S_TABLE_LEN: usize = 12;
const HINT_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "charfun-kit", version, about = "Characteristic functions of ergodic coisometric row contractions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Truncation depth of Fock-space expansions.
    #[arg(long, global = true, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the produced file here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Row contraction and coisometry checks.
    Validate { file: String },
    /// Vector state, block data, ergodicity and decay tables.
    Analyze { file: String },
    /// Extended characteristic function as a symbol file.
    Charfun {
        file: String,
        /// Also emit Popescu's characteristic function of the ring part and γ.
        #[arg(long)]
        popescu: bool,
    },
    /// Unitary equivalence of two tuples, up to mixing when ω differs.
    Compare { file_a: String, file_b: String },
    /// Identities of the minimal isometric dilation at truncation.
    DilationCheck { file: String },
    /// Coupling-limit coefficients against the closed-form Poisson kernel.
    CouplingCheck {
        file: String,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
    /// Emit a built-in tuple file.
    Builtin {
        #[command(subcommand)]
        which: Builtin,
    },
}

#[derive(Debug, Subcommand)]
pub enum Builtin {
    /// The 3-dimensional example with entries ±1/√2.
    Section7,
    /// The one-dimensional tuple `ω` (n = 1).
    Scalar {
        /// Entry of ω as `re` or `re,im`; repeat once per operator.
        #[arg(long = "omega", allow_hyphen_values = true)]
        omega: Vec<String>,
        /// Number of operators when no --omega is given (uniform ω).
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Random ergodic coisometric tuple.
    Random {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub text: String,
    pub json: Value,
    /// File contents produced by the command (tuple or symbol file).
    pub artifact: Option<String>,
}

impl Outcome {
    fn report(status: Status, text: String, mut json: Value) -> Self {
        json["status"] = json!(status.label());
        Self { status, text, json, artifact: None }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Validate { file } => cmd_validate(&TupleFile::read(file)?, cli),
        Command::Analyze { file } => cmd_analyze(&TupleFile::read(file)?, cli),
        Command::Charfun { file, popescu } => cmd_charfun(&TupleFile::read(file)?, *popescu, cli),
        Command::Compare { file_a, file_b } => cmd_compare(&TupleFile::read(file_a)?, &TupleFile::read(file_b)?, cli),
        Command::DilationCheck { file } => cmd_dilation_check(&TupleFile::read(file)?, cli),
        Command::CouplingCheck { file, steps } => cmd_coupling_check(&TupleFile::read(file)?, *steps, cli),
        Command::Builtin { which } => cmd_builtin(which),
    }
}

/// Six decimals, with values that would print as `-0.000000` shown as zero.
fn fmt_c(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

fn fmt_v(v: &ComplexVector) -> String {
    let parts: Vec<String> = v.iter().map(|&z| fmt_c(z)).collect();
    format!("({})", parts.join(", "))
}

fn fmt_m(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|row| row.iter().map(|&z| fmt_c(z)).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}

fn ergodicity_params(cli: &Cli) -> ErgodicityParams {
    ErgodicityParams { tol: cli.tol.max(1e-9), ..Default::default() }
}

fn ergodic(t: RowContraction, cli: &Cli) -> Result<ErgodicTuple, CliError> {
    Ok(ErgodicTuple::analyze(t, &ergodicity_params(cli))?)
}

pub fn cmd_validate(file: &TupleFile, cli: &Cli) -> Result<Outcome, CliError> {
    let t = file.tuple()?;
    let rep = validate(&t, cli.tol);
    let status = Status::from_bool(rep.is_coisometric);
    let mut text = String::new();
    if let Some(label) = &file.label {
        let _ = writeln!(text, "tuple: {label}");
    }
    let _ = writeln!(text, "d = {}, n = {}", t.d(), t.n());
    let _ = writeln!(text, "‖ΣAᵢAᵢ*‖ = {:.3e}", rep.contraction_norm);
    let _ = writeln!(text, "‖ΣAᵢAᵢ* − 1‖ = {:.3e}", rep.coisometry_defect);
    let _ = writeln!(text, "row contraction: {}", yes_no(rep.is_contraction));
    let _ = writeln!(text, "coisometric: {}", yes_no(rep.is_coisometric));
    let _ = write!(text, "{}", status.label());
    let json = json!({
        "d": t.d(),
        "n": t.n(),
        "contraction_norm": rep.contraction_norm,
        "coisometry_defect": rep.coisometry_defect,
        "is_contraction": rep.is_contraction,
        "is_coisometric": rep.is_coisometric,
    });
    Ok(Outcome::report(status, text, json))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// `min_φ ‖x − e^{iφ}y‖` for unit-normalized `x`, `y`.
fn phase_distance(x: &ComplexVector, y: &ComplexVector) -> f64 {
    let (xn, yn) = (x.norm(), y.norm());
    if xn == 0.0 || yn == 0.0 {
        return f64::INFINITY;
    }
    let overlap = x.dotc(y).norm() / (xn * yn);
    (2.0 - 2.0 * overlap.min(1.0)).max(0.0).sqrt()
}

pub fn cmd_analyze(file: &TupleFile, cli: &Cli) -> Result<Outcome, CliError> {
    let t = file.tuple()?;
    let omega_hint = file.omega_hint()?;
    let big_omega_hint = file.big_omega_hint()?;
    let rep = validate(&t, cli.tol);
    let mut text = String::new();
    if !rep.is_coisometric {
        let _ = writeln!(text, "not coisometric: ‖ΣAᵢAᵢ* − 1‖ = {:.3e}", rep.coisometry_defect);
        let _ = write!(text, "FAIL");
        let json = json!({ "coisometry_defect": rep.coisometry_defect, "error": "not coisometric" });
        return Ok(Outcome::report(Status::Fail, text, json));
    }
    let et = match ergodic(t, cli) {
        Ok(et) => et,
        Err(CliError::Math(msg)) => {
            let _ = write!(text, "{msg}\nFAIL");
            return Ok(Outcome::report(Status::Fail, text, json!({ "error": msg })));
        }
        Err(e) => return Err(e),
    };
    let p = &et.profile;
    let s_table = star_stability_norms(p, S_TABLE_LEN);
    let r_table = omega_p_power_decay(&et.tuple, p, R_TABLE_LEN);
    let omega_dev = omega_hint.as_ref().map(|h| (h - &p.omega).norm());
    let big_omega_dev = big_omega_hint.as_ref().map(|h| phase_distance(h, &p.omega_h));
    let hints_ok = omega_dev.is_none_or(|x| x <= HINT_TOL) && big_omega_dev.is_none_or(|x| x <= HINT_TOL);
    let status = Status::from_bool(et.ergodicity.ergodic && hints_ok);

    let _ = writeln!(text, "d = {}, n = {}", et.d(), et.n());
    let _ = writeln!(text, "Ω = {}", fmt_v(&p.omega_h));
    let _ = writeln!(text, "ω = {}", fmt_v(&p.omega));
    for (i, l) in p.ell.iter().enumerate() {
        let _ = writeln!(text, "ℓ{} = {}", i + 1, fmt_v(l));
    }
    for (i, a) in p.a_ring.iter().enumerate() {
        let _ = writeln!(text, "Å{} = {}", i + 1, fmt_m(a));
    }
    let erg = &et.ergodicity;
    let _ = writeln!(
        text,
        "fixed-point space dim = {}, commutant dim = {}, ergodic: {}",
        erg.fixed_point_dim,
        erg.commutant_dim,
        yes_no(erg.ergodic)
    );
    if let Some(ratio) = erg.fitted_ratio {
        let _ = writeln!(text, "fitted decay ratio of s_n = {ratio:.6}");
    }
    if let Some(dev) = omega_dev {
        let _ = writeln!(text, "ω hint deviation = {dev:.3e}");
    }
    if let Some(dev) = big_omega_dev {
        let _ = writeln!(text, "Ω hint deviation (up to phase) = {dev:.3e}");
    }
    let _ = writeln!(text, "n    s_n");
    for (k, s) in s_table.iter().enumerate() {
        let _ = writeln!(text, "{:<4} {s:.6e}", k + 1);
    }
    let _ = writeln!(text, "n    r_n");
    for (k, x) in r_table.iter().enumerate() {
        let _ = writeln!(text, "{k:<4} {x:.6e}");
    }
    let _ = write!(text, "{}", status.label());
    let json = json!({
        "d": et.d(),
        "n": et.n(),
        "Omega": vector_out(&p.omega_h),
        "omega": vector_out(&p.omega),
        "ell": p.ell.iter().map(vector_out).collect::<Vec<_>>(),
        "a_ring": p.a_ring.iter().map(matrix_out).collect::<Vec<_>>(),
        "ergodicity": {
            "fixed_point_dim": erg.fixed_point_dim,
            "commutant_dim": erg.commutant_dim,
            "fitted_ratio": erg.fitted_ratio,
            "decay_ok": erg.decay_ok,
            "ergodic": erg.ergodic,
            "disagreement": erg.disagreement,
        },
        "omega_hint_deviation": omega_dev,
        "Omega_hint_deviation": big_omega_dev,
        "s_n": s_table,
        "r_n": r_table,
    });
    Ok(Outcome::report(status, text, json))
}

fn characteristic_data(file: &TupleFile, cli: &Cli) -> Result<CharacteristicData, CliError> {
    let et = ergodic(file.tuple()?, cli)?;
    Ok(CharacteristicData::compute(et, TruncationParams { depth: cli.depth, tol: cli.tol })?)
}

pub fn cmd_charfun(file: &TupleFile, popescu: bool, cli: &Cli) -> Result<Outcome, CliError> {
    let data = characteristic_data(file, cli)?;
    let sym = SymbolFile::from_data(&data, popescu);
    let diag = sym.diagnostics.clone().expect("diagnostics are always written");
    let theorem52 = if popescu { Some(theorem52_check(&data)?) } else { None };
    let mut text = String::new();
    let _ = writeln!(
        text,
        "depth {}, dim 𝒟_A = {}, {} stored coefficients",
        sym.depth,
        data.defects.rank(),
        sym.coefficients.len()
    );
    let _ = writeln!(text, "isometry defect = {:.3e}", diag.isometry_defect);
    let _ = writeln!(text, "s_(N+1) = {:.3e}", diag.s_tail);
    let _ = writeln!(text, "𝒟_ω membership residual = {:.3e}", diag.membership_residual);
    if let Some(rep) = &theorem52 {
        let _ = writeln!(
            text,
            "γ comparison: Poisson {:.3e}, characteristic function {:.3e}",
            rep.poisson_residual, rep.charfun_residual
        );
    }
    let _ = write!(text, "PASS");
    let mut json = json!({
        "depth": sym.depth,
        "defect_rank": data.defects.rank(),
        "stored_coefficients": sym.coefficients.len(),
        "diagnostics": diag,
    });
    if let Some(rep) = theorem52 {
        json["gamma_comparison"] = json!({
            "poisson_residual": rep.poisson_residual,
            "charfun_residual": rep.charfun_residual,
        });
    }
    let mut out = Outcome::report(Status::Pass, text, json);
    out.artifact = Some(sym.to_json());
    Ok(out)
}

fn equivalence_params(cli: &Cli) -> EquivalenceParams {
    EquivalenceParams { depth: cli.depth, build_tol: cli.tol, ..Default::default() }
}

fn theorem61_text(text: &mut String, rep: &Theorem61Report) {
    let sym = &rep.symbol;
    let _ = writeln!(
        text,
        "symbols: {} (residual {:.3e}, unitarity defect {:.3e}, full rank {})",
        if sym.equivalent { "EQUIVALENT" } else { "NOT EQUIVALENT" },
        sym.residual,
        sym.unitarity_defect,
        yes_no(sym.full_rank)
    );
    let _ = writeln!(
        text,
        "intertwiner: {} (σ_min {:.3e}, nullity {})",
        if rep.intertwiner_found() { "FOUND" } else { "NONE" },
        rep.unitary.sigma_min,
        rep.unitary.nullity
    );
    let _ = writeln!(text, "consistent: {}", yes_no(rep.consistent));
}

fn theorem61_json(rep: &Theorem61Report) -> Value {
    json!({
        "symbols_equivalent": rep.symbol.equivalent,
        "symbol_residual": rep.symbol.residual,
        "unitarity_defect": rep.symbol.unitarity_defect,
        "full_rank": rep.symbol.full_rank,
        "intertwiner_found": rep.intertwiner_found(),
        "sigma_min": rep.unitary.sigma_min,
        "nullity": rep.unitary.nullity,
        "unitary": rep.aligned_u.as_ref().map(matrix_out),
        "consistent": rep.consistent,
    })
}

pub fn cmd_compare(a: &TupleFile, b: &TupleFile, cli: &Cli) -> Result<Outcome, CliError> {
    let (ta, tb) = (a.tuple()?, b.tuple()?);
    if ta.d() != tb.d() {
        return Err(CliError::NotComparable(format!("d = {} vs d = {}", ta.d(), tb.d())));
    }
    let (ea, eb) = (ergodic(ta, cli)?, ergodic(tb, cli)?);
    let params = equivalence_params(cli);
    let mut text = String::new();
    let distance = (&ea.profile.omega - &eb.profile.omega).norm();
    if distance <= 1e-8 {
        let rep = theorem61_crosscheck(&ea, &eb, &params)?;
        theorem61_text(&mut text, &rep);
        let status = Status::from_bool(rep.consistent);
        let _ = write!(text, "{}", status.label());
        let mut json = theorem61_json(&rep);
        json["mode"] = json!("same omega");
        return Ok(Outcome::report(status, text, json));
    }
    let rep = corollary63_check(&ea, &eb, &params)?;
    let _ = writeln!(text, "ω differs by {distance:.3e}; aligning B by a mixing unitary");
    let _ = writeln!(text, "mixing search σ_min = {:.3e}", rep.search_sigma);
    if let Some(t61) = &rep.theorem61 {
        theorem61_text(&mut text, t61);
    }
    let _ = writeln!(
        text,
        "Kraus maps: {}",
        if rep.conjugate { "CONJUGATE" } else { "NOT CONJUGATE" }
    );
    if let Some(res) = rep.conjugacy_residual {
        let _ = writeln!(text, "conjugacy residual = {res:.3e}");
    }
    let status = Status::from_bool(rep.consistent);
    let _ = write!(text, "{}", status.label());
    let json = json!({
        "mode": "mixed",
        "omega_distance": distance,
        "conjugate": rep.conjugate,
        "mixing": matrix_out(&rep.mixing),
        "search_sigma": rep.search_sigma,
        "theorem61": rep.theorem61.as_ref().map(theorem61_json),
        "conjugacy_residual": rep.conjugacy_residual,
        "consistent": rep.consistent,
    });
    Ok(Outcome::report(status, text, json))
}

pub fn cmd_dilation_check(file: &TupleFile, cli: &Cli) -> Result<Outcome, CliError> {
    let data = characteristic_data(file, cli)?;
    let depth = cli.depth;
    let et = &data.tuple;
    let dil = PopescuDilation::new(&et.tuple, &data.defects, depth.max(1))?;
    let compression = dil.compressed_word_deviation(depth)?;
    let orthogonality = dil.orthogonality_defect(depth.saturating_sub(1))?;
    let cuntz = cuntz_state_check(&dil, &et.profile, depth.min(3))?;
    let s_tail = star_stability_norms(&et.profile, depth + 1)[depth];
    let bound = 10.0 * s_tail.sqrt();
    let intertwining = if depth >= 1 { Some(intertwining_check(&data)?) } else { None };
    let ok = compression <= cli.tol
        && orthogonality <= cli.tol
        && cuntz <= cli.tol
        && intertwining.is_none_or(|x| x <= bound.max(cli.tol));
    let status = Status::from_bool(ok);
    let mut text = String::new();
    let _ = writeln!(text, "max ‖p_ℋV_α|_ℋ − A_α‖ (|α| ≤ {depth}) = {compression:.3e}");
    let _ = writeln!(text, "max ‖Vᵢ*Vⱼ − δᵢⱼ‖ = {orthogonality:.3e}");
    let _ = writeln!(text, "Cuntz state deviation (|α|, |β| ≤ {}) = {cuntz:.3e}", depth.min(3));
    match intertwining {
        Some(x) => {
            let _ = writeln!(text, "intertwining residual = {x:.3e} (bound 10·√s_(N+1) = {bound:.3e})");
        }
        None => {
            let _ = writeln!(text, "intertwining residual: skipped at depth 0");
        }
    }
    let _ = write!(text, "{}", status.label());
    let json = json!({
        "depth": depth,
        "compression_deviation": compression,
        "orthogonality_defect": orthogonality,
        "cuntz_state_deviation": cuntz,
        "intertwining_residual": intertwining,
        "intertwining_bound": bound,
    });
    Ok(Outcome::report(status, text, json))
}

pub fn cmd_coupling_check(file: &TupleFile, steps: usize, cli: &Cli) -> Result<Outcome, CliError> {
    if steps == 0 {
        return Err(CliError::Input("--steps must be at least 1".into()));
    }
    let t = file.tuple()?;
    let et = match ergodic(t, cli) {
        Ok(et) => et,
        Err(CliError::Math(msg)) => {
            let text = format!("coupling oracle requires an ergodic tuple with invariant vector state: {msg}\nFAIL");
            return Ok(Outcome::report(Status::Fail, text, json!({ "error": msg })));
        }
        Err(e) => return Err(e),
    };
    let p = &et.profile;
    let defects = DefectData::new(&et.tuple, &p.omega, cli.tol)?;
    let poisson = poisson_hat(p, &defects.omega_defect_frame, steps)?;
    let n = et.n();
    let mut deviation: f64 = 0.0;
    let mut resolved = 0;
    let mut masses = vec![0.0f64; steps];
    for k in 0..n {
        let mut h = ComplexVector::zeros(n);
        h[k] = C64::new(1.0, 0.0);
        let est = product_intertwiner_coefficients(&et.tuple, p, &defects.omega_defect_frame, &h, steps)?;
        deviation = deviation.max(oracle_deviation(&est, &poisson, &h));
        resolved = est.coeffs.indexer.count();
        let mut state = CouplingState::new(&h);
        for mass in masses.iter_mut() {
            state = coupling_step(&state, &et.tuple, DEFAULT_WORD_BUDGET)?;
            let unresolved: f64 = state
                .coeffs
                .values()
                .map(|v| (v - &p.omega_h * p.omega_h.dotc(v)).norm_squared())
                .sum();
            *mass = mass.max(unresolved);
        }
    }
    let status = Status::from_bool(deviation <= cli.tol);
    let mut text = String::new();
    let _ = writeln!(text, "{steps} coupling steps, {resolved} words resolved");
    let _ = writeln!(text, "max coefficient deviation from the closed form = {deviation:.3e}");
    let _ = writeln!(text, "step residual mass");
    for (m, mass) in masses.iter().enumerate() {
        let _ = writeln!(text, "{:<4} {mass:.6e}", m + 1);
    }
    let _ = write!(text, "{}", status.label());
    let json = json!({
        "steps": steps,
        "resolved_words": resolved,
        "max_deviation": deviation,
        "residual_mass": masses,
    });
    Ok(Outcome::report(status, text, json))
}

fn parse_entry(s: &str) -> Result<C64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| {
        x.parse::<f64>()
            .map_err(|_| CliError::Input(format!("--omega: cannot parse {x:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(CliError::Input(format!("--omega: expected re or re,im, got {s:?}"))),
    }
}

pub fn cmd_builtin(which: &Builtin) -> Result<Outcome, CliError> {
    let file = match which {
        Builtin::Section7 => {
            let t = section7();
            let s2 = std::f64::consts::FRAC_1_SQRT_2;
            let s3 = 1.0 / 3f64.sqrt();
            let mut f = TupleFile::from_tuple(&t, Some("section7".into()));
            f.omega_hint = Some(vec![[s2, 0.0]; 2]);
            f.big_omega_hint = Some(vec![[s3, 0.0]; 3]);
            f
        }
        Builtin::Scalar { omega, d } => {
            let entries: Vec<C64> = if omega.is_empty() {
                if *d < 2 {
                    return Err(CliError::Input(format!("need d ≥ 2, got {d}")));
                }
                vec![C64::new(1.0 / (*d as f64).sqrt(), 0.0); *d]
            } else {
                omega.iter().map(|s| parse_entry(s)).collect::<Result<_, _>>()?
            };
            let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(CliError::Input(format!("ω must be a unit vector, has norm {norm:.6}")));
            }
            let t = scalar_tuple(&entries)?;
            let mut f = TupleFile::from_tuple(&t, Some("scalar".into()));
            f.omega_hint = Some(entries.iter().map(|&z| [z.re, z.im]).collect());
            f.big_omega_hint = Some(vec![[1.0, 0.0]]);
            f
        }
        Builtin::Random { d, n, seed } => {
            let et = random_ergodic_tuple(*d, *n, *seed)?;
            let mut f = TupleFile::from_tuple(&et.tuple, Some(format!("random d={d} n={n} seed={seed}")));
            f.omega_hint = Some(vector_out(&et.profile.omega));
            f.big_omega_hint = Some(vector_out(&et.profile.omega_h));
            f
        }
    };
    let text = format!("{} tuple, d = {}, n = {}", file.label.as_deref().unwrap_or("builtin"), file.d, file.n);
    let json = json!({ "label": file.label, "d": file.d, "n": file.n });
    let mut out = Outcome::report(Status::Pass, text, json);
    out.artifact = Some(file.to_json());
    Ok(out)
}
