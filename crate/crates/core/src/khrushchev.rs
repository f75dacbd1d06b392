//! Verifiers for the Khrushchev factorization formulas of block CMV and block
//! Hessenberg unitaries, and for the scalar Schur functions of two-site
//! superpositions. Every check compares a formula route (iterates and inverse
//! iterates of the Schur function) with an operator route (first-return
//! amplitudes of the built unitary).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cmv::{build_operator, truncation_from_alphas, BlockOperatorSpec, BuiltOperator, Family};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;
use crate::schur::{binary_transform, defects, synthesize, SchurParameterSequence};
use crate::series::MatrixPowerSeries;
use crate::spectral::schur_of_window;

/// Extra synthesis order for iterates and inverse iterates.
pub const ORDER_BUDGET: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Schur function of a single block site.
    Site,
    /// Schur function of a block range of a CMV matrix.
    Range,
    /// Schur function of a block range of a Hessenberg matrix.
    Hessenberg,
    /// Scalar two-site superposition for CMV matrices.
    Superposition,
    /// Scalar two-site superposition for Hessenberg matrices.
    HessenbergSuperposition,
    /// Schur function of an explicit unitary against a closed form.
    ExplicitSchur,
    /// Schur function of `V_L ⊕ ℋ_C ⊕ V_R` against the factors of an overlapping factorization.
    Factorization,
    /// Product of the factors of an overlapping factorization against the unitary.
    Reconstruction,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::Site => "site",
            Theorem::Range => "range",
            Theorem::Hessenberg => "hessenberg",
            Theorem::Superposition => "superposition",
            Theorem::HessenbergSuperposition => "hessenberg-superposition",
            Theorem::ExplicitSchur => "explicit-schur",
            Theorem::Factorization => "factorization",
            Theorem::Reconstruction => "reconstruction",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "site" => Ok(Theorem::Site),
            "range" => Ok(Theorem::Range),
            "hessenberg" => Ok(Theorem::Hessenberg),
            "superposition" => Ok(Theorem::Superposition),
            "hessenberg-superposition" => Ok(Theorem::HessenbergSuperposition),
            "explicit-schur" => Ok(Theorem::ExplicitSchur),
            "factorization" => Ok(Theorem::Factorization),
            "reconstruction" => Ok(Theorem::Reconstruction),
            other => Err(Error::Parse(format!("unknown theorem '{other}'"))),
        }
    }
}

/// Outcome of one verification, with enough metadata to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub family: Option<String>,
    pub d: usize,
    pub j: usize,
    pub k: Option<usize>,
    pub order: usize,
    pub seed: Option<u64>,
    /// Largest coefficient discrepancy between the routes.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub formula_route: String,
    pub operator_route: String,
    /// Order at which iterates and inverse iterates were synthesized.
    pub synthesis_order: usize,
    /// `terminal` or `zero`: how the iterates were seeded.
    pub synthesis_seed: String,
    /// Blocks of the operator window used by the operator route.
    pub window_blocks: Option<usize>,
    /// Whether the formula-route series passed contractivity sampling.
    pub formula_contractive: bool,
    /// `(β, γ)` as `[re, im]` pairs for superposition checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Report skeleton with no residual yet; `pass` stays `false` until [`Self::conclude`].
    pub fn blank(theorem: Theorem, d: usize, j: usize, k: Option<usize>, order: usize, tol: f64) -> Self {
        Self {
            theorem,
            family: None,
            d,
            j,
            k,
            order,
            seed: None,
            residual: f64::NAN,
            tolerance: tol,
            pass: false,
            formula_route: String::new(),
            operator_route: String::new(),
            synthesis_order: order,
            synthesis_seed: String::new(),
            window_blocks: None,
            formula_contractive: false,
            coordinates: None,
            notes: Vec::new(),
        }
    }

    fn start<T: Real>(
        theorem: Theorem,
        params: &SchurParameterSequence<T>,
        j: usize,
        k: Option<usize>,
        order: usize,
        tol: f64,
    ) -> Self {
        let mut r = Self::blank(theorem, params.d(), j, k, order, tol);
        r.synthesis_order = order + ORDER_BUDGET;
        r.synthesis_seed = params.seed().as_str().to_string();
        r
    }

    /// Records the residual and sets `pass` iff it is finite and within the tolerance.
    pub fn conclude(mut self, residual: f64) -> Self {
        self.residual = residual;
        self.pass = residual.is_finite() && residual <= self.tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// `α_0..α_{n−1}`, continuing an unterminated sequence with zeros.
fn alphas_upto<T: Real>(params: &SchurParameterSequence<T>, n: usize) -> Result<Vec<ComplexMatrix<T>>> {
    let have = params.len();
    if n <= have {
        return Ok(params.alphas()[..n].to_vec());
    }
    if params.is_terminated() {
        return Err(Error::InsufficientParameters { needed: n, available: have });
    }
    let mut out = params.alphas().to_vec();
    out.resize(n, ComplexMatrix::zeros(params.d(), params.d()));
    Ok(out)
}

/// `f_j`, the Schur function of `(α_j, α_{j+1}, …)`, truncated at `order`.
///
/// Past the end of an unterminated sequence the iterate is `0`.
pub fn iterate_series<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    if j > params.len() {
        if params.is_terminated() {
            return Err(Error::InsufficientParameters { needed: j, available: params.len() });
        }
        return Ok(MatrixPowerSeries::zero(params.d(), order).mark_schur());
    }
    let it = params.iterate(j)?;
    if it.is_empty() {
        return Ok(MatrixPowerSeries::zero(params.d(), order).mark_schur());
    }
    Ok(synthesize(&it, order + ORDER_BUDGET)?.truncate(order))
}

/// `b_j`, the Schur function of `(−α_{j−1}†, …, −α_0†, 𝟙)`, truncated at `order`.
pub fn inverse_iterate_series<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    let padded = SchurParameterSequence::new(params.d(), alphas_upto(params, j)?, None)?;
    Ok(synthesize(&padded.inverse_iterate(j)?, order + ORDER_BUDGET)?.truncate(order))
}

/// Operator window on which blocks `≤ last_block` have exact Schur coefficients up to `order`.
///
/// Terminated sequences give the finite operator; unterminated ones are continued
/// with zeros up to the window size required by the margin rule.
pub fn verification_window<T: Real>(
    params: &SchurParameterSequence<T>,
    family: Family,
    last_block: usize,
    order: usize,
) -> Result<BuiltOperator<T>> {
    let spec = if params.is_terminated() {
        if last_block > params.len() {
            return Err(Error::OutOfRange(format!("block {last_block} outside 0..={}", params.len())));
        }
        BlockOperatorSpec::finite(params.clone(), family)?
    } else {
        if !family.is_cmv() {
            return Err(Error::MissingTerminal);
        }
        let n = BlockOperatorSpec::<T>::required_blocks(last_block, order + 1);
        let padded = SchurParameterSequence::new(params.d(), alphas_upto(params, n - 1)?, None)?;
        BlockOperatorSpec::new(padded, family, n)?
    };
    build_operator(&spec)
}

fn contractive<T: Real>(f: &MatrixPowerSeries<T>) -> bool {
    f.contractivity_check(T::of(T::SERIES_TOL)).pass
}

/// Whether block `j` of `family` takes the `b_j f_j` order (the other order is `f_j b_j`).
fn b_first(family: Family, j: usize) -> bool {
    j.is_multiple_of(2) != family.is_hat()
}

/// Formula side of the site theorem: `b_j f_j` or `f_j b_j` by parity.
pub fn site_formula_series<T: Real>(
    params: &SchurParameterSequence<T>,
    family: Family,
    j: usize,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    if !family.is_cmv() {
        return Err(Error::OutOfRange(format!("site formula is stated for CMV families, got {family}")));
    }
    let syn = order + ORDER_BUDGET;
    let b = inverse_iterate_series(params, j, syn)?;
    let f = iterate_series(params, j, syn)?;
    let prod = if b_first(family, j) { b.mul(&f)? } else { f.mul(&b)? };
    Ok(prod.truncate(order).mark_schur())
}

fn verify_site_on<T: Real>(
    params: &SchurParameterSequence<T>,
    op: &BuiltOperator<T>,
    j: usize,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::start(Theorem::Site, params, j, None, order, tol);
    report.family = Some(op.family.to_string());
    report.window_blocks = Some(op.n_blocks);
    let formula = site_formula_series(params, op.family, j, order)?;
    let operator = schur_of_window(op, j, j, order, false)?;
    report.formula_route = if b_first(op.family, j) { "b_j·f_j".into() } else { "f_j·b_j".into() };
    report.operator_route = "first-return amplitudes of V_j".into();
    report.formula_contractive = contractive(&formula);
    let residual = formula.max_coeff_diff(&operator)?.as_f64();
    Ok(report.conclude(residual))
}

/// Schur function of the site `V_j` against `b_j f_j` / `f_j b_j`.
pub fn verify_site_formula<T: Real>(
    params: &SchurParameterSequence<T>,
    family: Family,
    j: usize,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let op = verification_window(params, family, j, order)?;
    verify_site_on(params, &op, j, order, tol)
}

/// Site check on a caller-chosen window; fails with [`Error::InexactWindow`] if the window is too small.
pub fn verify_site_formula_in<T: Real>(
    spec: &BlockOperatorSpec<T>,
    j: usize,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let op = build_operator(spec)?;
    verify_site_on(spec.params(), &op, j, order, tol)
}

/// Series `X†` sandwiched with `b_j` and `f_k` as prescribed by the parities of `j`, `k`.
///
/// `X` is the unitary truncation on blocks `j..=k` of the given family. For the CMV
/// families `j < k` is required; the Hessenberg families use the two-sided form.
pub fn substitute_into_truncation<T: Real>(
    params: &SchurParameterSequence<T>,
    family: Family,
    j: usize,
    k: usize,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    if j >= k {
        return Err(Error::OutOfRange(format!("range formula needs j < k, got ({j},{k})")));
    }
    let d = params.d();
    let m = k - j;
    let syn = order + ORDER_BUDGET;
    let x = truncation_from_alphas(family, &alphas_upto(params, k)?, j)?.adjoint();
    let xs = MatrixPowerSeries::constant(&x, syn);
    let b = inverse_iterate_series(params, j, syn)?;
    let f = iterate_series(params, k, syn)?;
    let id = |blocks: usize| MatrixPowerSeries::identity(blocks * d, syn);
    let b_head = MatrixPowerSeries::direct_sum(&[&b, &id(m)]);
    let f_tail = MatrixPowerSeries::direct_sum(&[&id(m), &f]);
    let out = match family {
        Family::Hessenberg => f_tail.mul(&xs)?.mul(&b_head)?,
        Family::HessenbergHat => b_head.mul(&xs)?.mul(&f_tail)?,
        Family::Cmv | Family::CmvHat => {
            // Parities as seen by the C table; Ĉ flips both.
            let je = b_first(family, j);
            let ke = b_first(family, k);
            match (je, ke) {
                (true, true) => b_head.mul(&xs)?.mul(&f_tail)?,
                (false, false) => f_tail.mul(&xs)?.mul(&b_head)?,
                (true, false) | (false, true) => {
                    let both = if m == 1 {
                        MatrixPowerSeries::direct_sum(&[&b, &f])
                    } else {
                        MatrixPowerSeries::direct_sum(&[&b, &id(m - 1), &f])
                    };
                    if je {
                        both.mul(&xs)?
                    } else {
                        xs.mul(&both)?
                    }
                }
            }
        }
    };
    Ok(out.truncate(order).mark_schur())
}

/// Schur function of blocks `j..=k` of a CMV matrix against [`substitute_into_truncation`].
///
/// `j = k` is the single-site case and is checked with the site formula.
pub fn verify_range_formula<T: Real>(
    params: &SchurParameterSequence<T>,
    family: Family,
    j: usize,
    k: usize,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if !family.is_cmv() {
        return Err(Error::OutOfRange(format!("range formula is stated for CMV families, got {family}")));
    }
    if j > k {
        return Err(Error::OutOfRange(format!("empty block range ({j},{k})")));
    }
    if j == k {
        let mut r = verify_site_formula(params, family, j, order, tol)?;
        r.theorem = Theorem::Range;
        r.k = Some(k);
        r.notes.push("j = k: checked with the single-site formula".into());
        return Ok(r);
    }
    let op = verification_window(params, family, k, order)?;
    let mut report = VerificationReport::start(Theorem::Range, params, j, Some(k), order, tol);
    report.family = Some(family.to_string());
    report.window_blocks = Some(op.n_blocks);
    let formula = substitute_into_truncation(params, family, j, k, order)?;
    let operator = schur_of_window(&op, j, k, order, false)?;
    report.formula_route = "b_j, f_k substituted into the unitary truncation".into();
    report.operator_route = "first-return amplitudes of V_[j,k]".into();
    report.formula_contractive = contractive(&formula);
    let residual = formula.max_coeff_diff(&operator)?.as_f64();
    Ok(report.conclude(residual))
}

/// Schur function of blocks `j..=k` of the finite Hessenberg matrix against
/// `(𝟙 ⊕ f_k) H_(j,k)† (b_j ⊕ 𝟙)` (or its mirror for `Ĥ`).
pub fn verify_hessenberg_formula<T: Real>(
    params: &SchurParameterSequence<T>,
    family: Family,
    j: usize,
    k: usize,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if family.is_cmv() {
        return Err(Error::OutOfRange(format!("Hessenberg formula called with family {family}")));
    }
    if !params.is_terminated() {
        return Err(Error::MissingTerminal);
    }
    if j >= k || k > params.len() {
        return Err(Error::OutOfRange(format!("need j < k ≤ {}, got ({j},{k})", params.len())));
    }
    let op = verification_window(params, family, k, order)?;
    let mut report = VerificationReport::start(Theorem::Hessenberg, params, j, Some(k), order, tol);
    report.family = Some(family.to_string());
    report.window_blocks = Some(op.n_blocks);
    let formula = substitute_into_truncation(params, family, j, k, order)?;
    let operator = schur_of_window(&op, j, k, order, false)?;
    report.formula_route = if family == Family::Hessenberg {
        "(1 ⊕ f_k) H_(j,k)† (b_j ⊕ 1)".into()
    } else {
        "(b_j ⊕ 1) Ĥ_(j,k)† (1 ⊕ f_k)".into()
    };
    report.operator_route = "first-return amplitudes of V_[j,k] in the finite Hessenberg matrix".into();
    report.formula_contractive = contractive(&formula);
    report.notes.push("finite terminal-unitary sequence; semi-infinite sequences are not certified".into());
    let residual = formula.max_coeff_diff(&operator)?.as_f64();
    Ok(report.conclude(residual))
}

/// Scalar Schur function of a unit vector `ψ` from a matrix Schur function `f_V`.
///
/// Goes through `F_V`, compresses to `⟨ψ|F_V ψ⟩` and converts back; the result has the
/// order of `f_V`.
pub fn compress_to_vector<T: Real>(f_v: &MatrixPowerSeries<T>, psi: &[Complex<T>]) -> Result<MatrixPowerSeries<T>> {
    if psi.len() != f_v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a {}x{} series",
            psi.len(),
            f_v.dim(),
            f_v.dim()
        )));
    }
    check_normalized(psi)?;
    let car = f_v.schur_to_caratheodory()?;
    let coeffs: Vec<Complex<T>> = car
        .coeffs()
        .iter()
        .map(|c| {
            let cp = c.mat_vec(psi);
            psi.iter().zip(&cp).fold(Complex::zero(), |acc, (p, q)| acc + p.conj() * q)
        })
        .collect();
    MatrixPowerSeries::scalar(&coeffs).caratheodory_to_schur()
}

fn check_normalized<T: Real>(v: &[Complex<T>]) -> Result<()> {
    let n2 = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    if (n2 - T::one()).abs() > T::of(1e-12).max(T::epsilon() * T::of(16.0)) {
        return Err(Error::NotNormalized(n2.sqrt().as_f64()));
    }
    Ok(())
}

/// How [`scalar_superposition_schur`] computes `f_{β,γ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuperpositionRoute {
    /// The closed rational expression in `b_j`, `f_{j+1}`, `α_j`.
    Formula,
    /// `T_{u_j,v_j}(b_j, f_{j+1})`.
    BinaryTransform,
    /// Compression of the operator Schur function of `V_[j,j+1]` to `(β, γ)`.
    OperatorCompress,
}

impl SuperpositionRoute {
    pub const ALL: [SuperpositionRoute; 3] =
        [SuperpositionRoute::Formula, SuperpositionRoute::BinaryTransform, SuperpositionRoute::OperatorCompress];

    pub fn as_str(self) -> &'static str {
        match self {
            SuperpositionRoute::Formula => "formula",
            SuperpositionRoute::BinaryTransform => "binary-transform",
            SuperpositionRoute::OperatorCompress => "operator-compress",
        }
    }
}

struct ScalarPieces<T> {
    alpha: Complex<T>,
    rho: Complex<T>,
    b: MatrixPowerSeries<T>,
    f: MatrixPowerSeries<T>,
}

fn scalar_pieces<T: Real>(params: &SchurParameterSequence<T>, j: usize, order: usize) -> Result<ScalarPieces<T>> {
    if params.d() != 1 {
        return Err(Error::DimensionMismatch("superposition formulas are scalar".into()));
    }
    let a = alphas_upto(params, j + 1)?;
    let alpha = a[j][(0, 0)];
    let rho = defects(&a[j])?.0[(0, 0)];
    let syn = order + ORDER_BUDGET;
    Ok(ScalarPieces { alpha, rho, b: inverse_iterate_series(params, j, syn)?, f: iterate_series(params, j + 1, syn)? })
}

fn constant_scalar<T: Real>(c: Complex<T>, order: usize) -> MatrixPowerSeries<T> {
    MatrixPowerSeries::constant(&ComplexMatrix::scalar(c), order)
}

/// `f_{β,γ}` for the measure weighted by the superposition of sites `j`, `j+1` of `C`.
pub fn scalar_superposition_schur<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    beta: Complex<T>,
    gamma: Complex<T>,
    order: usize,
    route: SuperpositionRoute,
) -> Result<MatrixPowerSeries<T>> {
    check_normalized(&[beta, gamma])?;
    if params.d() != 1 {
        return Err(Error::DimensionMismatch("superposition formulas are scalar".into()));
    }
    if route == SuperpositionRoute::OperatorCompress {
        let op = verification_window(params, Family::Cmv, j + 1, order)?;
        let f2 = schur_of_window(&op, j, j + 1, order, false)?;
        return compress_to_vector(&f2, &[beta, gamma]);
    }
    // Odd sites use the conjugated coordinates.
    let (be, ga) = if j.is_multiple_of(2) { (beta, gamma) } else { (beta.conj(), gamma.conj()) };
    let ScalarPieces { alpha, rho, b, f } = scalar_pieces(params, j, order)?;
    let n = b.order();
    let out = match route {
        SuperpositionRoute::BinaryTransform => {
            let beta_j = be * alpha + ga * rho;
            let gamma_j = be * rho - ga * alpha.conj();
            binary_transform(be.conj() * beta_j, ga.conj() * gamma_j, &b, &f)?
        }
        _ => {
            let zb = b.shift_up().truncate(n);
            let zf = f.shift_up().truncate(n);
            let num = zb
                .mul(&f)?
                .add(&b.scale(be.conj() * (be * alpha + ga * rho)))?
                .add(&f.scale(ga.conj() * (be * rho - ga * alpha.conj())))?;
            let den = constant_scalar(Complex::one(), n)
                .add(&zb.scale(ga * (be.conj() * rho - ga.conj() * alpha)))?
                .add(&zf.scale(be * (be.conj() * alpha.conj() + ga.conj() * rho)))?;
            num.mul(&den.inverse()?)?
        }
    };
    Ok(out.truncate(order).mark_schur())
}

/// Runs all superposition routes and reports the largest pairwise discrepancy.
pub fn verify_superposition<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    beta: Complex<T>,
    gamma: Complex<T>,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::start(Theorem::Superposition, params, j, Some(j + 1), order, tol);
    report.family = Some(Family::Cmv.to_string());
    report.coordinates = Some([[beta.re.as_f64(), beta.im.as_f64()], [gamma.re.as_f64(), gamma.im.as_f64()]]);
    let series = SuperpositionRoute::ALL
        .iter()
        .map(|&r| scalar_superposition_schur(params, j, beta, gamma, order, r))
        .collect::<Result<Vec<_>>>()?;
    let mut residual = T::zero();
    for a in 0..series.len() {
        for b in a + 1..series.len() {
            residual = residual.max(series[a].max_coeff_diff(&series[b])?);
        }
    }
    // Unit coordinates on a single site reduce to the one-site formulas.
    let eps = T::of(1e-14);
    let extreme = if gamma.norm() <= eps {
        Some((j, "γ = 0: compared with b_j·f_j"))
    } else if beta.norm() <= eps {
        Some((j + 1, "β = 0: compared with f_{j+1}·b_{j+1}"))
    } else {
        None
    };
    if let Some((site, note)) = extreme {
        let syn = order + ORDER_BUDGET;
        let b = inverse_iterate_series(params, site, syn)?;
        let f = iterate_series(params, site, syn)?;
        let expected = if site == j { b.mul(&f)? } else { f.mul(&b)? };
        for s in &series {
            residual = residual.max(s.max_coeff_diff(&expected)?);
        }
        report.notes.push(note.into());
    }
    report.window_blocks = Some(verification_window(params, Family::Cmv, j + 1, order)?.n_blocks);
    report.formula_route = "closed formula and binary transform".into();
    report.operator_route = "compression of f_V[j,j+1] of C".into();
    report.formula_contractive = contractive(&series[0]) && contractive(&series[1]);
    Ok(report.conclude(residual.as_f64()))
}

/// `h_{β,γ}` from its closed rational expression in `b_j`, `f_{j+1}`, `α_j`.
pub fn hessenberg_superposition<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    beta: Complex<T>,
    gamma: Complex<T>,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    check_normalized(&[beta, gamma])?;
    if !params.is_terminated() {
        return Err(Error::MissingTerminal);
    }
    let (be, ga) = (beta, gamma);
    let ScalarPieces { alpha, rho, b, f } = scalar_pieces(params, j, order)?;
    let n = b.order();
    let one = constant_scalar(Complex::one(), n);
    let z = MatrixPowerSeries::monomial(&ComplexMatrix::scalar(Complex::one()), 1, n);
    let zbf = b.mul(&f)?.shift_up().truncate(n);
    let num = zbf
        .add(&b.scale(be.conj() * be * alpha).add(&constant_scalar(be.conj() * ga * rho, n))?)?
        .add(&b.scale(ga.conj() * be * rho).sub(&constant_scalar(ga.conj() * ga * alpha.conj(), n))?.mul(&f)?)?;
    let den_b = constant_scalar(ga * be.conj() * rho, n).sub(&b.scale(ga * ga.conj() * alpha))?.mul(&z)?;
    let den_f = constant_scalar(be * be.conj() * alpha.conj(), n)
        .add(&b.scale(be * ga.conj() * rho))?
        .mul(&f.shift_up().truncate(n))?;
    let den = one.add(&den_b)?.add(&den_f)?;
    Ok(num.mul(&den.inverse()?)?.truncate(order).mark_schur())
}

/// Compression of the Schur function of blocks `j, j+1` of the finite `H` to `(β, γ)`.
pub fn hessenberg_superposition_oracle<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    beta: Complex<T>,
    gamma: Complex<T>,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    let op = verification_window(params, Family::Hessenberg, j + 1, order)?;
    let f2 = schur_of_window(&op, j, j + 1, order, false)?;
    compress_to_vector(&f2, &[beta, gamma])
}

/// `h_{β,γ}` formula against its operator oracle.
pub fn verify_hessenberg_superposition<T: Real>(
    params: &SchurParameterSequence<T>,
    j: usize,
    beta: Complex<T>,
    gamma: Complex<T>,
    order: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::start(Theorem::HessenbergSuperposition, params, j, Some(j + 1), order, tol);
    report.family = Some(Family::Hessenberg.to_string());
    report.coordinates = Some([[beta.re.as_f64(), beta.im.as_f64()], [gamma.re.as_f64(), gamma.im.as_f64()]]);
    let formula = hessenberg_superposition(params, j, beta, gamma, order)?;
    let oracle = hessenberg_superposition_oracle(params, j, beta, gamma, order)?;
    report.window_blocks = Some(params.len() + 1);
    report.formula_route = "closed formula for h".into();
    report.operator_route = "compression of f_V[j,j+1] of H".into();
    report.formula_contractive = contractive(&formula);
    Ok(report.conclude(formula.max_coeff_diff(&oracle)?.as_f64()))
}
