//! Verification driver: evaluate a catalog fraction, compare with its claimed
//! limit, and attach diagnostics.

use std::cmp::Ordering;
use std::fmt;

use serde_json::{json, Map, Value};

use super::hill::hyp2f1_partial_sum;
use super::{
    auto_mode, cf_source, cf_source_with, check_predicate, closed_form_with, entry7a_threshold, params, IdentityId,
    Params, Target, YSequence,
};
use crate::convergence::{
    empirical_limit_with, lange_find_params, lange_scan, Acceleration, AffineTail, LimitDiagnostics,
};
use crate::convergent::approximants;
use crate::error::CfError;
use crate::scalar::{Mode, Scalar};
use crate::source::{tail, CoefficientSource, Descriptor};
use crate::transforms::even_part;

/// Interpolation order used for Entry 12, whose approximants are rational in `1/k`.
pub const ENTRY12_ORDER: usize = 8;

/// Longest exact fraction printed in reports before switching to decimals.
const EXACT_TEXT_LIMIT: usize = 60;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub depth: usize,
    pub digits: u32,
    pub tol: String,
    /// Forced mode; inferred with [`auto_mode`] when `None`.
    pub mode: Option<Mode>,
    /// Evaluate even when the hypotheses fail.
    pub override_predicate: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { depth: 200, digits: 50, tol: "1e-30".into(), mode: None, override_predicate: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub id: IdentityId,
    pub params: Params,
    pub depth: usize,
    pub digits: u32,
    pub mode: Mode,
    pub tol: Scalar,
    /// `None` when the claimed value is the point at infinity.
    pub target: Option<Scalar>,
    /// Where the target came from: `closed_form`, `infinity` or `cross_check:<id>`.
    pub target_kind: String,
    /// For an infinite target, the estimate of the reciprocal.
    pub estimate: Scalar,
    pub abs_diff: Scalar,
    pub diagnostics: LimitDiagnostics,
    pub certificate: Option<Value>,
    /// Identity-specific side checks.
    pub checks: Map<String, Value>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

fn params_text(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl VerificationReport {
    fn show(&self, s: &Scalar) -> String {
        s.to_report_string(self.digits, EXACT_TEXT_LIMIT)
    }

    pub fn target_text(&self) -> String {
        self.target.as_ref().map_or_else(|| "infinity".to_string(), |t| self.show(t))
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Value {
        let mut diag = self.diagnostics.to_json();
        if let Value::Object(m) = &mut diag {
            m.insert("certificate".into(), self.certificate.clone().unwrap_or(Value::Null));
        }
        json!({
            "id": self.id.name(),
            "params": self.params,
            "depth": self.depth,
            "digits": self.digits,
            "mode": self.mode.name(),
            "tol": self.show(&self.tol),
            "target": self.target_text(),
            "target_kind": self.target_kind,
            "estimate": self.show(&self.estimate),
            "abs_diff": self.abs_diff.to_report_string(6, 0),
            "verdict": self.verdict.to_string(),
            "diagnostics": diag,
            "checks": Value::Object(self.checks.clone()),
            "notes": self.notes,
        })
    }

    pub const CSV_HEADER: &'static str = "id,params,depth,digits,target,estimate,abs_diff,verdict";

    pub fn csv_row(&self) -> String {
        [
            self.id.name().to_string(),
            params_text(&self.params),
            self.depth.to_string(),
            self.digits.to_string(),
            self.target_text(),
            self.show(&self.estimate),
            self.abs_diff.to_report_string(6, 0),
            self.verdict.to_string(),
        ]
        .iter()
        .map(|s| csv_field(s))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// `1 / (a1/(b1 + a2/(b2 + ...)))` as the fraction `b1/a1 + (a2/a1)/(b2 + ...)`.
fn reciprocal(src: &CoefficientSource) -> Result<CoefficientSource, CfError> {
    if !src.b0().is_zero() {
        return Err(CfError::Unsupported("reciprocal needs b0 = 0".into()));
    }
    let (a1, b1) = src.term(1)?;
    if a1.is_zero() {
        return Err(CfError::ZeroTerm { index: 1 });
    }
    let b0 = b1.checked_div(&a1)?;
    let inner = src.clone();
    Ok(CoefficientSource::new(b0, src.len().map(|l| l - 1), Descriptor::Opaque("reciprocal".into()), move |n| {
        let (a, b) = inner.term(n + 1)?;
        if n == 1 {
            Ok((a.checked_div(&a1)?, b))
        } else {
            Ok((a, b))
        }
    }))
}

/// `b0 + a_1/(b_1 + ... + a_{m-1}/(b_{m-1} + t))`, evaluated from the bottom
/// up in projective form. `None` means the point at infinity.
fn collapse_prefix(src: &CoefficientSource, m: usize, t: &Scalar) -> Result<Option<Scalar>, CfError> {
    let mode = src.mode();
    let (mut num, mut den) = (t.clone(), Scalar::one(mode));
    for n in (1..m).rev() {
        let (a, b) = src.term(n)?;
        // a / (b + num/den) = a den / (b den + num)
        let next_den = &(&b * &den) + &num;
        num = &a * &den;
        den = next_den;
    }
    num = &(src.b0() * &den) + &num;
    if den.is_zero() {
        return Ok(None);
    }
    Ok(Some(num.checked_div(&den)?))
}

/// Closed forms of the even approximants `f_{2k}`, `k = 1..=k_max`, of the
/// extension behind Entry 13 (the `k`-th approximants of the entry itself).
pub fn entry13_even_closed_forms(a: &Scalar, b: &Scalar, d: &Scalar, k_max: usize) -> Result<Vec<Scalar>, CfError> {
    let mode = a.mode();
    let one = Scalar::one(mode);
    let f = |s: &Scalar| -> Result<Scalar, CfError> { one.checked_div(&(&one.checked_div(a)? + &one.checked_div(s)?)) };
    let mut out = Vec::with_capacity(k_max);
    if d.is_zero() {
        let r = b.checked_div(a)?;
        let (mut pw, mut sum) = (one.clone(), Scalar::zero(mode));
        for _ in 0..k_max {
            pw = &pw * &r;
            sum = &sum + &pw;
            out.push(f(&(a * &sum))?);
        }
    } else if a == b {
        let mut sum = Scalar::zero(mode);
        let a2 = a * a;
        for i in 1..=k_max {
            sum = &sum + &a2.checked_div(&(a + &(&Scalar::from_i64(i as i64, mode) * d)))?;
            out.push(f(&sum)?);
        }
    } else {
        let (bd, ad1) = (b.checked_div(d)?, &a.checked_div(d)? + &one);
        let (mut term, mut sum) = (one.clone(), Scalar::zero(mode));
        for i in 1..=k_max {
            let s = Scalar::from_i64(i as i64 - 1, mode);
            term = (&term * &(&bd + &s)).checked_div(&(&ad1 + &s))?;
            sum = &sum + &term;
            out.push(f(&(a * &sum))?);
        }
    }
    Ok(out)
}

/// `T_k` via the hypergeometric partial sum, for cross-checking
/// [`entry13_even_closed_forms`]: `sum_{i=0}^{k} (b/d)_i / (a/d+1)_i - 1`.
pub fn entry13_series(a: &Scalar, b: &Scalar, d: &Scalar, k: usize) -> Result<Scalar, CfError> {
    let one = Scalar::one(a.mode());
    let s = hyp2f1_partial_sum(&one, &b.checked_div(d)?, &(&a.checked_div(d)? + &one), k)?;
    Ok(&s - &one)
}

fn abs_text(s: &Scalar) -> Value {
    Value::String(s.to_report_string(6, 0))
}

/// Richardson exponent for Entry 13: `±(a - b)/d` with negative real part.
fn entry13_exponent(a: &Scalar, b: &Scalar, d: &Scalar) -> Result<Option<Scalar>, CfError> {
    if d.is_zero() || a == b {
        return Ok(None);
    }
    let p = (a - b).checked_div(d)?;
    let zero = Scalar::zero(p.mode());
    Ok(match p.real_part().cmp_real(&zero) {
        Ordering::Less => Some(p),
        Ordering::Greater => Some(-&p),
        Ordering::Equal => None,
    })
}

/// Evaluates `id` to `opts.depth` and compares against its claimed limit.
pub fn verify(id: IdentityId, p: &Params, opts: &VerifyOptions) -> Result<VerificationReport, CfError> {
    id.check_schema(p)?;
    let mut notes = Vec::new();
    let mut checks = Map::new();
    let mut mode = match opts.mode {
        Some(m) => m,
        None => auto_mode(id, p, opts.depth, opts.digits)?,
    };

    let get = |key: &str, mode: Mode| Scalar::parse_in(&p[key], mode);
    let mut acc = Acceleration::None;
    match id {
        IdentityId::Entry12 => {
            acc = Acceleration::Polynomial { order: ENTRY12_ORDER };
            notes.push("approximants are rational in 1/k; polynomial extrapolation in 1/k per parity".into());
        }
        IdentityId::Entry13 => {
            let probe = if mode == Mode::Rational { Mode::Rational } else { mode };
            let (a, b, d) = (get("a", probe)?, get("b", probe)?, get("d", probe)?);
            match entry13_exponent(&a, &b, &d)? {
                Some(e) => {
                    if mode == Mode::Rational && e.as_i64().is_none() {
                        mode = Mode::complex(opts.digits)?;
                        notes.push("non-integer decay exponent: evaluated in complex-float mode".into());
                    }
                    acc = Acceleration::Richardson { exponent: e.to_mode(mode)? };
                }
                None if d.is_zero() => notes.push("d = 0: geometric decay, no extrapolation".into()),
                None => notes.push("a = b: logarithmic decay, no extrapolation applies".into()),
            }
        }
        _ => {}
    }

    let tol = Scalar::parse_in(&opts.tol, if mode == Mode::Rational { Mode::Rational } else { mode })
        .or_else(|_| Scalar::parse(&opts.tol, opts.digits))?;
    if let Err(e) = check_predicate(id, p, mode) {
        if !opts.override_predicate {
            return Err(e);
        }
        notes.push(format!("hypotheses overridden: {e}"));
    }
    let src = cf_source_with(id, p, mode, opts.override_predicate)?;
    let target = closed_form_with(id, p, mode, opts.override_predicate)?;

    let (target_value, target_kind, estimate, abs_diff, diagnostics) = match &target {
        Target::Infinity => {
            let rec = reciprocal(&src)?;
            let (est, diag) = empirical_limit_with(&rec, opts.depth.saturating_sub(1), &tol, &acc)?;
            let est = est.value().expect("finite estimate");
            notes.push("claimed value is infinity: the reciprocal is compared with 0".into());
            (None, "infinity".to_string(), est.clone(), est.abs(), diag)
        }
        Target::Value(t) => {
            let (est, diag) = empirical_limit_with(&src, opts.depth, &tol, &acc)?;
            let est = est.value().expect("finite estimate");
            let diff = (&est - t).abs();
            (Some(t.clone()), "closed_form".to_string(), est, diff, diag)
        }
        Target::CrossCheck(other, op) => {
            let (est, diag) = empirical_limit_with(&src, opts.depth, &tol, &acc)?;
            let est = est.value().expect("finite estimate");
            let other_src = cf_source(*other, op, mode)?;
            let (o_est, o_diag) = empirical_limit_with(&other_src, opts.depth, &tol, &acc)?;
            let o_est = o_est.value().expect("finite estimate");
            checks.insert("cross_check_id".into(), json!(other.name()));
            checks.insert("cross_check_params".into(), json!(op));
            checks.insert("cross_check_converged".into(), json!(o_diag.converged));
            let diff = (&est - &o_est).abs();
            (Some(o_est), format!("cross_check:{other}"), est, diff, diag)
        }
    };

    let mut certificate = None;
    match id {
        IdentityId::Entry7a => entry7a_checks(&src, p, mode, opts, &tol, &estimate, &mut checks, &mut notes)?,
        IdentityId::Entry9 => {
            let (a, x) = (get("a", mode)?, get("x", mode)?);
            if a.is_zero() {
                notes.push("a = 0: periodic fraction, verified empirically only".into());
            } else if a.is_real() && a.cmp_real(&Scalar::zero(mode)) == Ordering::Less {
                notes.push("a on the negative real axis: no Lange certificate".into());
            } else {
                let lp = lange_find_params(&a, opts.digits)?;
                let inv = a.recip()?;
                let xa = x.checked_div(&a)?;
                let build = |m: usize| -> Result<(AffineTail, usize), CfError> {
                    if m < 3 {
                        return Err(CfError::Domain("the tail of 1/a terms starts at m = 3".into()));
                    }
                    let shift = Scalar::from_i64(m as i64 - 1, mode);
                    Ok((AffineTail { odd_sq: inv.clone(), p: &(-&xa) - &shift, q: -&Scalar::one(mode) }, 2 * m - 2))
                };
                certificate = Some(scan_json(lange_scan(build, &lp, 200, opts.depth.max(64))));
            }
        }
        IdentityId::Entry10 => {
            let n = get("n", mode)?;
            if n.is_one() {
                notes.push("n = 1 is Entry 7 at x = 0: no Lange certificate".into());
            } else {
                let one = Scalar::one(mode);
                let m1 = &n - &one;
                let lp = lange_find_params(&m1, opts.digits)?;
                let inv = m1.recip()?;
                let neg = (-&m1).recip()?;
                let build = |big_n: usize| -> Result<(AffineTail, usize), CfError> {
                    if big_n < 3 {
                        return Err(CfError::Domain("the tail of 1/(m-1) terms starts at N = 3".into()));
                    }
                    let p0 = &Scalar::from_i64(big_n as i64, mode) * &neg;
                    Ok((AffineTail { odd_sq: inv.clone(), p: p0, q: neg.clone() }, 2 * big_n - 2))
                };
                certificate = Some(scan_json(lange_scan(build, &lp, 200, opts.depth.max(64))));
            }
        }
        IdentityId::Entry13 => {
            let (a, b, d) = (get("a", mode)?, get("b", mode)?, get("d", mode)?);
            let k_max = src.available(opts.depth).min(2000);
            let closed = entry13_even_closed_forms(&a, &b, &d, k_max)?;
            let direct = approximants(&src, k_max)?;
            let mut worst = Scalar::zero(mode);
            for (k, c) in closed.iter().enumerate() {
                if let Some(v) = &direct[k + 1] {
                    let e = (v - c).abs();
                    if e.cmp_abs(&worst) == Ordering::Greater {
                        worst = e;
                    }
                }
            }
            checks.insert("closed_form_terms".into(), json!(k_max));
            checks.insert("closed_form_max_discrepancy".into(), abs_text(&worst));
            if opts.override_predicate && a != b && !d.is_zero() {
                let to_b = (&estimate - &b).abs();
                checks.insert("abs_diff_to_b".into(), abs_text(&to_b));
            }
        }
        IdentityId::BbEven => {
            let bb = cf_source(IdentityId::Bb, p, mode)?;
            let same = even_part(&bb).first_difference(&src, 40)?;
            checks.insert("even_part_of_bb_matches".into(), json!(same.is_none()));
        }
        _ => {}
    }

    let verdict = if abs_diff.cmp_abs(&tol) == Ordering::Less && diagnostics.converged { Verdict::Pass } else { Verdict::Fail };
    Ok(VerificationReport {
        id,
        params: p.clone(),
        depth: opts.depth,
        digits: opts.digits,
        mode,
        tol,
        target: target_value,
        target_kind,
        estimate,
        abs_diff,
        diagnostics,
        certificate,
        checks,
        notes,
        verdict,
    })
}

fn scan_json(r: Result<(usize, crate::convergence::ConvergenceCertificate), crate::convergence::Refusal>) -> Value {
    match r {
        Ok((m, cert)) => {
            let mut v = cert.to_json();
            if let Value::Object(o) = &mut v {
                o.insert("tail_parameter".into(), json!(m));
            }
            v
        }
        Err(refusal) => json!({ "refused": refusal.to_json() }),
    }
}

#[allow(clippy::too_many_arguments)]
fn entry7a_checks(
    src: &CoefficientSource,
    p: &Params,
    mode: Mode,
    opts: &VerifyOptions,
    tol: &Scalar,
    estimate: &Scalar,
    checks: &mut Map<String, Value>,
    notes: &mut Vec<String>,
) -> Result<(), CfError> {
    let y1 = Scalar::parse_in(&p["y1"], mode)?;
    let ys = match p.get("step") {
        Some(s) => YSequence::Linear { y1, step: Scalar::parse_in(s, mode)? },
        None => YSequence::Geometric { y1, ratio: Scalar::parse_in(&p["ratio"], mode)? },
    };
    let Some(n0) = entry7a_threshold(&ys, opts.depth)? else {
        notes.push("no threshold N0 found within depth".into());
        return Ok(());
    };
    let m = n0 - 1;
    checks.insert("threshold_n0".into(), json!(n0));
    checks.insert("tail_start".into(), json!(m));
    let t = tail(src, m)?;
    let (t_est, _) = empirical_limit_with(&t, opts.depth - m + 1, tol, &Acceleration::None)?;
    let t_est = t_est.value().expect("finite estimate");
    let one = Scalar::one(mode);
    checks.insert("tail_abs_diff".into(), abs_text(&(&t_est - &one).abs()));
    match collapse_prefix(src, m, &t_est)? {
        Some(v) => {
            checks.insert("collapsed_abs_diff".into(), abs_text(&(&v - &one).abs()));
            checks.insert("collapse_vs_direct".into(), abs_text(&(&v - estimate).abs()));
        }
        None => notes.push("prefix collapse reached the point at infinity".into()),
    }
    Ok(())
}

/// Entry 13 at `(a, b, d) = (2, 1, 1)`, outside its hypotheses: the fraction
/// converges to `b = 1`, not to `a = 2`. The report carries `abs_diff_to_b`.
pub fn entry13_footnote(depth: usize, digits: u32, tol: &str) -> Result<VerificationReport, CfError> {
    let p = params(&[("a", "2"), ("b", "1"), ("d", "1")]);
    let opts = VerifyOptions { depth, digits, tol: tol.to_string(), mode: None, override_predicate: true };
    verify(IdentityId::Entry13, &p, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        Scalar::parse(s, 50).unwrap()
    }

    fn opts(depth: usize, tol: &str) -> VerifyOptions {
        VerifyOptions { depth, tol: tol.into(), ..VerifyOptions::default() }
    }

    #[test]
    fn entry7_rational() {
        let r = verify(IdentityId::Entry7, &params(&[("x", "1")]), &opts(40, "1e-20")).unwrap();
        assert_eq!(r.mode, Mode::Rational);
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn entry9_closed_form_and_certificate() {
        let r = verify(IdentityId::Entry9, &params(&[("a", "1"), ("x", "2")]), &opts(100, "1e-15")).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.target, Some(q("4/3")));
        let cert = r.certificate.unwrap();
        assert_eq!(cert["criterion"], "lange", "{cert}");
    }

    #[test]
    fn entry9_at_infinity() {
        let r = verify(IdentityId::Entry9, &params(&[("a", "2"), ("x", "-1")]), &opts(200, "1e-20")).unwrap();
        assert!(r.target.is_none());
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn entry10_interior_zero() {
        for n in 1..=6 {
            let r = verify(IdentityId::Entry10, &params(&[("n", &n.to_string())]), &opts(100, "1e-20")).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }

    #[test]
    fn entry13_oracles_agree() {
        for (a, b, d) in [("1", "2", "1"), ("1", "1", "1"), ("1", "2", "0"), ("3/2", "5", "1/2")] {
            let (a, b, d) = (q(a), q(b), q(d));
            let src = cf_source(IdentityId::Entry13, &params(&[("a", &a.to_string()), ("b", &b.to_string()), ("d", &d.to_string())]), Mode::Rational).unwrap();
            let closed = entry13_even_closed_forms(&a, &b, &d, 50).unwrap();
            let direct = approximants(&src, 50).unwrap();
            for k in 1..=50 {
                assert_eq!(direct[k].as_ref(), Some(&closed[k - 1]), "k = {k}");
            }
            if !d.is_zero() && a != b {
                let one = q("1");
                let t = entry13_series(&a, &b, &d, 7).unwrap();
                let f7 = one.checked_div(&(&one.checked_div(&a).unwrap() + &one.checked_div(&(&a * &t)).unwrap())).unwrap();
                assert_eq!(f7, closed[6]);
            }
        }
    }

    #[test]
    fn prefix_collapse() {
        let src = cf_source(IdentityId::Entry7a, &params(&[("y1", "1"), ("step", "1")]), Mode::Rational).unwrap();
        for m in 1..6 {
            assert_eq!(collapse_prefix(&src, m, &q("1")).unwrap(), Some(q("1")));
        }
    }

    #[test]
    fn reports_serialize() {
        let r = verify(IdentityId::Entry10, &params(&[("n", "3")]), &opts(60, "1e-20")).unwrap();
        let v = r.to_json();
        assert_eq!(v["verdict"], "pass");
        assert_eq!(v["target"], "3");
        assert_eq!(r.csv_row().split(',').count(), 8);
        assert!(r.csv_row().starts_with("entry10,n=3,60,50,3,"));
    }
}
