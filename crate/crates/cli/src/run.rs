//! Executes a validated job and collects its records.

use contfrac::{
    auto_mode, build_family, descriptor_mode, empirical_limit, even_part, extend, lange_check, lange_find_params,
    odd_part, realize, to_unit_denominators, value_at, verify, wall_empirical, worpitzky_check, CertResult, CfError,
    CoefficientSource, ExtensionScheme, IdentityId, Mode, Params, Scalar, Sequence, VerificationReport, VerifyOptions,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::spec::{ActionSpec, JobSpec, SourceSpec};

/// Longest exact fraction printed before switching to decimals.
const EXACT_TEXT_LIMIT: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success = 0,
    Failure = 1,
    InputError = 2,
}

pub struct Outcome {
    pub records: Vec<Value>,
    pub status: Status,
}

impl Outcome {
    fn one(record: Value, status: Status) -> Outcome {
        Outcome { records: vec![record], status }
    }
}

fn show(s: &Scalar, digits: u32) -> String {
    s.to_report_string(digits, EXACT_TEXT_LIMIT)
}

fn resolve_mode(job: &JobSpec, src: &SourceSpec) -> Result<Mode, CfError> {
    if let Some(m) = job.mode.forced(job.digits)? {
        return Ok(m);
    }
    match src {
        SourceSpec::Descriptor(d) => descriptor_mode(d, job.depth, job.digits),
        SourceSpec::Identity(id, p) => auto_mode(*id, p, job.depth, job.digits),
    }
}

fn build_source(src: &SourceSpec, mode: Mode) -> Result<CoefficientSource, CfError> {
    match src {
        SourceSpec::Descriptor(d) => realize(d, mode),
        SourceSpec::Identity(id, p) => build_family(id.name(), p, None, mode),
    }
}

fn options(job: &JobSpec, override_predicate: bool) -> Result<VerifyOptions, CfError> {
    Ok(VerifyOptions {
        depth: job.depth,
        digits: job.digits,
        tol: job.tol.clone(),
        mode: job.mode.forced(job.digits)?,
        override_predicate,
    })
}

fn terms_record(action: &str, src: &CoefficientSource, n: usize, digits: u32) -> Result<Map<String, Value>, CfError> {
    let n = src.available(n);
    let terms = src
        .terms(n)?
        .iter()
        .map(|(a, b)| json!([show(a, digits), show(b, digits)]))
        .collect::<Vec<_>>();
    let mut m = Map::new();
    m.insert("action".into(), json!(action));
    m.insert("source".into(), src.descriptor().to_json());
    m.insert("mode".into(), json!(src.mode().name()));
    m.insert("length".into(), src.len().map_or(Value::Null, |l| json!(l)));
    m.insert("b0".into(), json!(show(src.b0(), digits)));
    m.insert("terms".into(), Value::Array(terms));
    Ok(m)
}

fn eval(job: &JobSpec, src: &CoefficientSource) -> Result<Outcome, CfError> {
    let n = src.available(job.depth);
    let value = value_at(src, n)?.value();
    let mut m = Map::new();
    m.insert("action".into(), json!("eval"));
    m.insert("source".into(), src.descriptor().to_json());
    m.insert("mode".into(), json!(src.mode().name()));
    m.insert("depth".into(), json!(n));
    m.insert("approximant".into(), json!(value.as_ref().map_or_else(|| "infinity".into(), |v| show(v, job.digits))));
    if n >= 4 {
        let tol = Scalar::parse_in(&job.tol, src.mode())?;
        let (limit, diag) = empirical_limit(src, n, &tol)?;
        let estimate = limit.value().map_or_else(|| "infinity".into(), |v| show(&v, job.digits));
        m.insert("estimate".into(), json!(estimate));
        m.insert("converged".into(), json!(diag.converged));
        m.insert("diagnostics".into(), diag.to_json());
    }
    Ok(Outcome::one(Value::Object(m), Status::Success))
}

fn certificate_outcome(result: CertResult, src: &CoefficientSource) -> Result<Outcome, CfError> {
    let (mut record, status) = match result? {
        Ok(cert) => (cert.to_json(), Status::Success),
        Err(refusal) => (json!({ "refusal": refusal.to_json(), "verdict": "refused" }), Status::Failure),
    };
    if let Value::Object(m) = &mut record {
        m.insert("action".into(), json!("certify"));
        m.insert("source".into(), src.descriptor().to_json());
    }
    Ok(Outcome::one(record, status))
}

/// Lange's test on `K(c_n^2/1)`, with `c_n` the principal square roots of the
/// unit-denominator numerators. Runs in complex-float mode.
fn certify_lange(
    job: &JobSpec,
    src: &CoefficientSource,
    alpha: Option<&str>,
    rho: Option<&str>,
    lange_a: Option<&str>,
) -> Result<Outcome, CfError> {
    let mode = Mode::complex(job.digits)?;
    let src = src.to_mode(mode)?;
    let (alpha, rho) = match lange_a {
        Some(a) => {
            let lp = lange_find_params(&Scalar::parse(a, job.digits)?, job.digits)?;
            (lp.alpha.to_mode(mode)?, lp.rho.to_mode(mode)?)
        }
        None => {
            let need = |t: Option<&str>, k: &str| match t {
                Some(text) => Scalar::parse_in(text, mode),
                None => Err(CfError::Domain(format!("lange needs {k}"))),
            };
            (need(alpha, "alpha")?, need(rho, "rho")?)
        }
    };
    let unit = to_unit_denominators(&src);
    let c = Sequence::new(unit.len(), move |n| unit.term(n)?.0.sqrt());
    certificate_outcome(Ok(lange_check(&c, &alpha, &rho, job.depth)), &src)
}

fn verify_cell(job: &JobSpec, id: IdentityId, p: &Params, override_predicate: bool) -> Result<VerificationReport, CfError> {
    verify(id, p, &options(job, override_predicate)?)
}

fn cells(params: &Params, grid: &[(String, Vec<String>)]) -> Vec<Params> {
    let mut out = vec![params.clone()];
    for (key, values) in grid {
        out = out
            .into_iter()
            .flat_map(|base| {
                values.iter().map(move |v| {
                    let mut p = base.clone();
                    p.insert(key.clone(), v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn sweep(job: &JobSpec, id: IdentityId, params: &Params, override_predicate: bool, grid: &[(String, Vec<String>)], jobs: usize) -> Result<Outcome, CfError> {
    let cells = cells(params, grid);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CfError::Unsupported(format!("thread pool: {e}")))?;
    // collect preserves grid order whatever the completion order
    let results: Vec<_> = pool.install(|| cells.par_iter().map(|p| (p, verify_cell(job, id, p, override_predicate))).collect());
    let mut status = Status::Success;
    let records = results
        .into_iter()
        .map(|(p, r)| match r {
            Ok(report) => {
                if !report.passed() {
                    status = status.max(Status::Failure);
                }
                report.to_json()
            }
            Err(e) => {
                status = Status::InputError;
                json!({ "id": id.name(), "params": p, "error": e.to_string(), "verdict": "error" })
            }
        })
        .collect();
    Ok(Outcome { records, status })
}

pub fn run(job: &JobSpec, jobs: usize) -> Result<Outcome, CfError> {
    match &job.spec {
        ActionSpec::Verify { id, params, override_predicate } => {
            let report = verify_cell(job, *id, params, *override_predicate)?;
            let status = if report.passed() { Status::Success } else { Status::Failure };
            return Ok(Outcome::one(report.to_json(), status));
        }
        ActionSpec::Sweep { id, params, override_predicate, grid } => {
            return sweep(job, *id, params, *override_predicate, grid, jobs);
        }
        _ => {}
    }
    let spec = job.source.as_ref().ok_or_else(|| CfError::Domain("missing source".into()))?;
    let mode = resolve_mode(job, spec)?;
    let src = build_source(spec, mode)?;
    match &job.spec {
        ActionSpec::Eval => eval(job, &src),
        ActionSpec::Contract { kind, terms } => {
            let part = if kind == "odd" { odd_part(&src)? } else { even_part(&src) };
            Ok(Outcome::one(Value::Object(terms_record("contract", &part, *terms, job.digits)?), Status::Success))
        }
        ActionSpec::Extend { scheme, a, terms } => {
            let scheme = match scheme.as_str() {
                "cor1" => ExtensionScheme::Cor1,
                "cor2" => ExtensionScheme::Cor2,
                "cor7" => ExtensionScheme::Cor7,
                _ => {
                    let a = a.as_deref().unwrap_or_default();
                    let a = a.iter().map(|t| Scalar::parse_in(t, mode)).collect::<Result<Vec<_>, _>>()?;
                    ExtensionScheme::Cor3 { a: Sequence::from_vec(a) }
                }
            };
            let ext = extend(&src, &scheme)?;
            Ok(Outcome::one(Value::Object(terms_record("extend", &ext, *terms, job.digits)?), Status::Success))
        }
        ActionSpec::Certify { criterion, alpha, rho, lange_a } => match criterion.as_str() {
            "worpitzky" => certificate_outcome(worpitzky_check(&src, job.depth), &src),
            "wall" => {
                let tol = Scalar::parse_in(&job.tol, mode)?;
                certificate_outcome(wall_empirical(&src, job.depth, &tol), &src)
            }
            _ => certify_lange(job, &src, alpha.as_deref(), rho.as_deref(), lange_a.as_deref()),
        },
        ActionSpec::Verify { .. } | ActionSpec::Sweep { .. } => unreachable!("handled above"),
    }
}
