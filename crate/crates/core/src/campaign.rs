//! Batches of verification jobs described in JSON, run in parallel with a
//! deterministic report order.

use std::path::{Path, PathBuf};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmv::Family;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::io::{read_json, MatrixJson, ParamsJson, SCHEMA_VERSION};
use crate::khrushchev::{
    verify_hessenberg_formula, verify_hessenberg_superposition, verify_range_formula, verify_site_formula,
    verify_superposition, Theorem, VerificationReport,
};
use crate::linalg::{ComplexMatrix, IndexSubspace};
use crate::overlap::{construct_overlap, khrushchev_residual, OverlapFactorization};
use crate::random::{random_parameters, seeded_rng};
use crate::schur::SchurParameterSequence;
use crate::series::{rational_taylor, MatrixPowerSeries};
use crate::spectral::schur_of_basis;

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_order() -> usize {
    12
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    /// Worker threads; `None` uses rayon's default.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Where the CLI writes the report, relative to the config file.
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub jobs: Vec<Job>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Job {
    /// One of the Verblunsky-parameter theorems over ranges of `j`, `k`.
    Verify(VerifyJob),
    /// Schur function of an explicit unitary against a product of rational matrices.
    ExplicitSchur(ExplicitSchurJob),
    /// Factorization identity and reconstruction for a named fixture.
    Factorization(FactorizationJob),
}

/// A single index or an inclusive range `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSpec {
    One(usize),
    Range([usize; 2]),
}

impl IndexSpec {
    fn values(&self) -> Vec<usize> {
        match *self {
            IndexSpec::One(v) => vec![v],
            IndexSpec::Range([lo, hi]) => (lo..=hi).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSource {
    File(PathBuf),
    Random(RandomParams),
    Inline(ParamsJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub d: usize,
    pub length: usize,
    pub seed: u64,
    #[serde(default)]
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyJob {
    #[serde(default)]
    pub name: Option<String>,
    pub theorem: Theorem,
    /// `C`, `Chat`, `H` or `Hhat`; defaults to `C` (`H` for the Hessenberg theorem).
    #[serde(default)]
    pub family: Option<String>,
    pub params: ParamSource,
    pub j: IndexSpec,
    #[serde(default)]
    pub k: Option<IndexSpec>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// `(β, γ)` samples as `[[re, im], [re, im]]` for the superposition theorems.
    #[serde(default)]
    pub coordinates: Vec<[[f64; 2]; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitarySource {
    /// A named fixture; `part` selects the full unitary (`u`) or a factor (`lc`, `cr`).
    Fixture {
        name: String,
        #[serde(default)]
        part: FixturePart,
    },
    File(PathBuf),
    Inline(MatrixJson),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixturePart {
    #[default]
    U,
    Lc,
    Cr,
}

/// Real-coefficient rational function `num(z)/den(z)`, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// Matrix of rationals in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalMatrix {
    pub rows: usize,
    pub entries: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitSchurJob {
    #[serde(default)]
    pub name: Option<String>,
    pub unitary: UnitarySource,
    /// Ordered basis of `V` (indices into the unitary).
    pub basis: Vec<usize>,
    /// Expected Schur function as a product of these factors, left to right.
    pub expected: Vec<RationalMatrix>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationJob {
    #[serde(default)]
    pub name: Option<String>,
    pub fixture: String,
    #[serde(default)]
    pub v_left: Vec<usize>,
    #[serde(default)]
    pub v_right: Vec<usize>,
    /// Rebuild the factors with the overlap construction instead of using the fixture's.
    #[serde(default)]
    pub construct: bool,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_reconstruction_tol")]
    pub reconstruction_tolerance: f64,
}

fn default_reconstruction_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobOutcome {
    pub index: usize,
    pub name: String,
    pub reports: Vec<VerificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    pub errors: usize,
    pub jobs: Vec<JobOutcome>,
}

impl CampaignReport {
    /// `0` when everything passed, `1` on a failed check, `2` when a job could not run.
    pub fn exit_code(&self) -> i32 {
        if self.errors > 0 {
            2
        } else if self.failures > 0 {
            1
        } else {
            0
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_params(src: &ParamSource, base: &Path) -> Result<(SchurParameterSequence<f64>, Option<u64>)> {
    match src {
        ParamSource::File(p) => {
            let raw: ParamsJson = read_json(&resolve(base, p))?;
            Ok((SchurParameterSequence::try_from(&raw)?, None))
        }
        ParamSource::Inline(raw) => Ok((SchurParameterSequence::try_from(raw)?, None)),
        ParamSource::Random(r) => {
            if r.d == 0 {
                return Err(Error::OutOfRange("random parameters need d ≥ 1".into()));
            }
            Ok((random_parameters(&mut seeded_rng(r.seed), r.d, r.length, r.terminal), Some(r.seed)))
        }
    }
}

fn load_unitary(src: &UnitarySource, base: &Path) -> Result<ComplexMatrix<f64>> {
    match src {
        UnitarySource::Fixture { name, part } => {
            let ex = fixtures::by_name(name).ok_or_else(|| Error::Parse(format!("unknown fixture '{name}'")))?;
            Ok(match part {
                FixturePart::U => ex.u,
                FixturePart::Lc => ex.factorization.u_lc().clone(),
                FixturePart::Cr => ex.factorization.u_cr().clone(),
            })
        }
        UnitarySource::File(p) => {
            let raw: MatrixJson = read_json(&resolve(base, p))?;
            ComplexMatrix::try_from(&raw)
        }
        UnitarySource::Inline(raw) => ComplexMatrix::try_from(raw),
    }
}

fn to_complex(c: [f64; 2]) -> Complex<f64> {
    Complex::new(c[0], c[1])
}

/// One unit of work after expanding index ranges and samples.
enum Case {
    Verify {
        theorem: Theorem,
        family: Family,
        params: SchurParameterSequence<f64>,
        seed: Option<u64>,
        j: usize,
        k: Option<usize>,
        coords: Option<[Complex<f64>; 2]>,
        order: usize,
        tol: f64,
    },
    Explicit(ExplicitSchurJob, ComplexMatrix<f64>),
    Factorization(FactorizationJob),
}

fn expand(job: &Job, base: &Path) -> Result<Vec<Case>> {
    match job {
        Job::Verify(v) => {
            let (params, seed) = load_params(&v.params, base)?;
            let family = match &v.family {
                Some(f) => f.parse()?,
                None if v.theorem == Theorem::Hessenberg => Family::Hessenberg,
                None => Family::Cmv,
            };
            let js = v.j.values();
            let mut cases = Vec::new();
            let mk = |j: usize, k: Option<usize>, coords: Option<[Complex<f64>; 2]>| Case::Verify {
                theorem: v.theorem,
                family,
                params: params.clone(),
                seed,
                j,
                k,
                coords,
                order: v.order,
                tol: v.tolerance,
            };
            match v.theorem {
                Theorem::Site => cases.extend(js.iter().map(|&j| mk(j, None, None))),
                Theorem::Range | Theorem::Hessenberg => {
                    let ks =
                        v.k.as_ref().ok_or_else(|| Error::Parse(format!("theorem {} needs k", v.theorem)))?.values();
                    for &j in &js {
                        for &k in &ks {
                            let valid = if v.theorem == Theorem::Range { j <= k } else { j < k };
                            if valid {
                                cases.push(mk(j, Some(k), None));
                            }
                        }
                    }
                }
                Theorem::Superposition | Theorem::HessenbergSuperposition => {
                    if v.coordinates.is_empty() {
                        return Err(Error::Parse("superposition jobs need coordinates".into()));
                    }
                    for &j in &js {
                        for c in &v.coordinates {
                            cases.push(mk(j, Some(j + 1), Some([to_complex(c[0]), to_complex(c[1])])));
                        }
                    }
                }
                other => return Err(Error::Parse(format!("theorem {other} is not a verify job; use its own kind"))),
            }
            Ok(cases)
        }
        Job::ExplicitSchur(e) => Ok(vec![Case::Explicit(e.clone(), load_unitary(&e.unitary, base)?)]),
        Job::Factorization(f) => Ok(vec![Case::Factorization(f.clone())]),
    }
}

fn rational_matrix_series(m: &RationalMatrix, order: usize) -> Result<MatrixPowerSeries<f64>> {
    if m.rows == 0 || m.entries.len() != m.rows * m.rows {
        return Err(Error::Parse(format!(
            "rational matrix with {} entries is not {}x{}",
            m.entries.len(),
            m.rows,
            m.rows
        )));
    }
    let real = |v: &[f64]| v.iter().map(|&x| Complex::new(x, 0.0)).collect::<Vec<_>>();
    let mut coeffs = vec![ComplexMatrix::zeros(m.rows, m.rows); order + 1];
    for (idx, r) in m.entries.iter().enumerate() {
        if r.den.first().is_none_or(|&d| d == 0.0) {
            return Err(Error::SingularConstantTerm(0.0));
        }
        let taylor = rational_taylor(&real(&r.num), &real(&r.den), order);
        for (n, c) in taylor.into_iter().enumerate() {
            coeffs[n][(idx / m.rows, idx % m.rows)] = c;
        }
    }
    MatrixPowerSeries::new(coeffs)
}

fn run_explicit(job: &ExplicitSchurJob, u: &ComplexMatrix<f64>) -> Result<VerificationReport> {
    let dim = job.basis.len();
    let mut report = VerificationReport::blank(Theorem::ExplicitSchur, dim, 0, None, job.order, job.tolerance);
    let f = schur_of_basis(u, &job.basis, job.order)?;
    let mut expected = MatrixPowerSeries::identity(dim, job.order);
    for factor in &job.expected {
        expected = expected.mul(&rational_matrix_series(factor, job.order)?)?;
    }
    report.formula_route = "closed-form rational matrices".into();
    report.operator_route = format!("first-return amplitudes in basis {:?}", job.basis);
    report.formula_contractive = expected.contractivity_check(1e-8).pass;
    let residual = f.max_coeff_diff(&expected)?;
    Ok(report.conclude(residual))
}

fn run_factorization(job: &FactorizationJob) -> Result<Vec<VerificationReport>> {
    let ex =
        fixtures::by_name(&job.fixture).ok_or_else(|| Error::Parse(format!("unknown fixture '{}'", job.fixture)))?;
    let fac: OverlapFactorization<f64> =
        if job.construct { construct_overlap(&ex.u, ex.factorization.partition())? } else { ex.factorization.clone() };
    let n = ex.u.rows();
    let vl = IndexSubspace::new(n, job.v_left.iter().copied())?;
    let vr = IndexSubspace::new(n, job.v_right.iter().copied())?;
    let dim = vl.dim() + fac.partition().center().dim() + vr.dim();

    let mut rec = VerificationReport::blank(Theorem::Reconstruction, n, 0, None, 0, job.reconstruction_tolerance);
    rec.formula_route = "(U_LC ⊕ 1)(1 ⊕ U_CR)".into();
    rec.operator_route = "fixture unitary".into();
    let rec = rec.conclude(fac.reconstruction_residual(&ex.u));

    let check = khrushchev_residual(&ex.u, &fac, &vl, &vr, job.order)?;
    let mut rep = VerificationReport::blank(Theorem::Factorization, dim, 0, None, job.order, job.tolerance);
    rep.formula_route = "(1 ⊕ f^R)(f^L ⊕ 1)".into();
    rep.operator_route = "first-return amplitudes of V".into();
    let prod_ok = check.f_left.contractivity_check(1e-8).pass && check.f_right.contractivity_check(1e-8).pass;
    rep.formula_contractive = prod_ok;
    if job.construct {
        rep.notes.push("factors rebuilt by the overlap construction".into());
    }
    Ok(vec![rec, rep.conclude(check.residual)])
}

fn run_case(case: &Case) -> Result<Vec<VerificationReport>> {
    match case {
        Case::Verify { theorem, family, params, seed, j, k, coords, order, tol } => {
            let (j, order, tol) = (*j, *order, *tol);
            let r = match theorem {
                Theorem::Site => verify_site_formula(params, *family, j, order, tol)?,
                Theorem::Range => verify_range_formula(params, *family, j, k.expect("expanded with k"), order, tol)?,
                Theorem::Hessenberg => {
                    verify_hessenberg_formula(params, *family, j, k.expect("expanded with k"), order, tol)?
                }
                Theorem::Superposition => {
                    let [b, g] = coords.expect("expanded with coordinates");
                    verify_superposition(params, j, b, g, order, tol)?
                }
                Theorem::HessenbergSuperposition => {
                    let [b, g] = coords.expect("expanded with coordinates");
                    verify_hessenberg_superposition(params, j, b, g, order, tol)?
                }
                other => return Err(Error::Parse(format!("theorem {other} is not a verify job"))),
            };
            Ok(vec![match seed {
                Some(s) => r.with_seed(*s),
                None => r,
            }])
        }
        Case::Explicit(job, u) => Ok(vec![run_explicit(job, u)?]),
        Case::Factorization(job) => run_factorization(job),
    }
}

fn job_name(job: &Job, index: usize) -> String {
    let name = match job {
        Job::Verify(v) => v.name.clone().unwrap_or_else(|| v.theorem.to_string()),
        Job::ExplicitSchur(e) => e.name.clone().unwrap_or_else(|| "explicit-schur".into()),
        Job::Factorization(f) => f.name.clone().unwrap_or_else(|| format!("factorization {}", f.fixture)),
    };
    format!("{index}: {name}")
}

/// Runs every job; input paths are resolved against `base_dir`.
///
/// Job-level problems (missing files, invalid parameters, inexact windows) are recorded
/// in the report rather than aborting the campaign.
pub fn run_campaign(config: &CampaignConfig, base_dir: &Path) -> Result<CampaignReport> {
    if config.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema version {}", config.schema_version)));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Inconsistent(e.to_string()))?;

    let expanded: Vec<Result<Vec<Case>>> = config.jobs.iter().map(|j| expand(j, base_dir)).collect();
    let flat: Vec<(usize, &Case)> = expanded
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.as_ref().ok().map(|cases| cases.iter().map(move |c| (i, c))))
        .flatten()
        .collect();
    let results: Vec<(usize, Result<Vec<VerificationReport>>)> =
        pool.install(|| flat.par_iter().map(|&(i, c)| (i, run_case(c))).collect());

    let mut jobs: Vec<JobOutcome> = config
        .jobs
        .iter()
        .enumerate()
        .map(|(i, j)| JobOutcome { index: i, name: job_name(j, i), reports: Vec::new(), error: None })
        .collect();
    for (i, e) in expanded.iter().enumerate() {
        if let Err(err) = e {
            jobs[i].error = Some(err.to_string());
        }
    }
    for (i, r) in results {
        match r {
            Ok(reports) => jobs[i].reports.extend(reports),
            Err(err) => {
                if jobs[i].error.is_none() {
                    jobs[i].error = Some(err.to_string());
                }
            }
        }
    }
    let cases = jobs.iter().map(|j| j.reports.len()).sum();
    let failures = jobs.iter().flat_map(|j| &j.reports).filter(|r| !r.pass).count();
    let errors = jobs.iter().filter(|j| j.error.is_some()).count();
    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION,
        pass: failures == 0 && errors == 0,
        cases,
        failures,
        errors,
        jobs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_json;

    #[test]
    fn empty_campaign_passes() {
        let cfg: CampaignConfig = parse_json("{}").unwrap();
        let r = run_campaign(&cfg, Path::new(".")).unwrap();
        assert!(r.pass && r.cases == 0 && r.jobs.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn random_jobs_run_and_are_deterministic() {
        let text = r#"{"threads": 2, "jobs": [
            {"kind": "verify", "theorem": "site", "family": "Chat", "params": {"random": {"d": 2, "length": 4, "seed": 3}}, "j": [0, 3], "order": 8},
            {"kind": "verify", "theorem": "range", "params": {"random": {"d": 1, "length": 6, "seed": 4}}, "j": [0, 2], "k": [1, 3]},
            {"kind": "verify", "theorem": "superposition", "params": {"random": {"d": 1, "length": 6, "seed": 5}}, "j": 1,
             "coordinates": [[[1, 0], [0, 0]], [[0.6, 0], [0, 0.8]]]}
        ]}"#;
        let cfg: CampaignConfig = parse_json(text).unwrap();
        let a = run_campaign(&cfg, Path::new(".")).unwrap();
        assert!(a.pass, "{a:#?}");
        assert_eq!(a.cases, 4 + 8 + 2);
        let mut single = cfg.clone();
        single.threads = Some(1);
        let b = run_campaign(&single, Path::new(".")).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn corrupted_parameters_are_an_error() {
        let text = r#"{"jobs": [{"kind": "verify", "theorem": "site", "j": 0,
            "params": {"inline": {"d": 1, "alphas": [{"rows": 1, "cols": 1, "data": [[1.5, 0]]}]}}}]}"#;
        let r = run_campaign(&parse_json(text).unwrap(), Path::new(".")).unwrap();
        assert_eq!(r.exit_code(), 2);
        assert!(r.jobs[0].error.as_ref().unwrap().contains("contraction"));
    }

    #[test]
    fn failing_tolerance_gives_exit_one() {
        let text = r#"{"jobs": [{"kind": "explicit-schur", "unitary": {"fixture": {"name": "grover-chain-6"}},
            "basis": [2], "expected": [{"rows": 1, "entries": [{"num": [0], "den": [1]}]}]}]}"#;
        let r = run_campaign(&parse_json(text).unwrap(), Path::new(".")).unwrap();
        assert_eq!(r.exit_code(), 1);
    }
}
