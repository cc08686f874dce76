//! Convergence certificates (Worpitzky, Lange) and the empirical limit
//! estimator with even/odd diagnostics.
//!
//! Certificates are finite-depth evidence. They are marked exhaustive only
//! when the checked inequalities are known to hold for every index, either
//! because the coefficients are constant or because a closed-form growth
//! bound covers the unchecked indices.

use std::cmp::Ordering;
use std::fmt;

use serde_json::{json, Value};

use crate::convergent::{Convergents, ProjectiveValue};
use crate::error::CfError;
use crate::scalar::{Mode, Scalar, MIN_DIGITS};
use crate::source::{CoefficientSource, Descriptor, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    Worpitzky,
    Lange,
    WallEmpirical,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Worpitzky => "worpitzky",
            Criterion::Lange => "lange",
            Criterion::WallEmpirical => "wall-empirical",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Witness {
    Worpitzky {
        /// sup |a_n| over the checked indices.
        sup_abs_a: Scalar,
        /// max |f_N| over the checked approximants, all below 1/2.
        max_abs_approximant: Scalar,
    },
    Lange {
        alpha: Scalar,
        rho: Scalar,
        checks: Vec<String>,
    },
    Wall {
        approximant_bound: Scalar,
        numerator_bound: Scalar,
        subsequence: String,
    },
}

/// Evidence that a criterion's hypotheses hold.
#[derive(Clone, Debug)]
pub struct ConvergenceCertificate {
    pub criterion: Criterion,
    pub start_index: usize,
    /// Last index at which the conditions were checked.
    pub depth: usize,
    pub exhaustive: bool,
    pub witness: Witness,
}

impl ConvergenceCertificate {
    pub fn to_json(&self) -> Value {
        let witness = match &self.witness {
            Witness::Worpitzky { sup_abs_a, max_abs_approximant } => json!({
                "sup_abs_a": sup_abs_a.to_string(),
                "max_abs_approximant": max_abs_approximant.to_string(),
            }),
            Witness::Lange { alpha, rho, checks } => json!({
                "alpha": alpha.to_string(),
                "rho": rho.to_string(),
                "checks": checks,
            }),
            Witness::Wall { approximant_bound, numerator_bound, subsequence } => json!({
                "M": approximant_bound.to_string(),
                "L": numerator_bound.to_string(),
                "subsequence": subsequence,
            }),
        };
        json!({
            "criterion": self.criterion.name(),
            "start_index": self.start_index,
            "depth": self.depth,
            "exhaustive": self.exhaustive,
            "witness": witness,
            "verdict": "certified",
        })
    }
}

/// A failed check: the first index and inequality that did not hold.
#[derive(Clone, Debug, PartialEq)]
pub struct Refusal {
    pub criterion: Criterion,
    pub index: usize,
    pub inequality: String,
    pub depth: usize,
}

impl Refusal {
    pub fn to_json(&self) -> Value {
        json!({
            "criterion": self.criterion.name(),
            "index": self.index,
            "inequality": self.inequality,
            "depth": self.depth,
            "verdict": "refused",
        })
    }
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} refused at index {}: {}", self.criterion.name(), self.index, self.inequality)
    }
}

pub type CertResult = Result<Result<ConvergenceCertificate, Refusal>, CfError>;

fn quarter(mode: Mode) -> Scalar {
    Scalar::from_ratio(1, 4, mode)
}

fn max_abs(acc: Option<Scalar>, x: &Scalar) -> Option<Scalar> {
    let ax = x.abs();
    match acc {
        Some(m) if m.cmp_real(&ax) != Ordering::Less => Some(m),
        _ => Some(ax),
    }
}

fn is_constant_family(d: &Descriptor) -> bool {
    matches!(d, Descriptor::Family { name, .. } if name == "constant" || name == "golden")
}

/// Worpitzky: in unit-denominator form, `|a_n| <= 1/4` for `1 <= n <= depth`.
/// On success also checks that every approximant of `K(a_n/1)` satisfies `|w| < 1/2`.
pub fn worpitzky_check(src: &CoefficientSource, depth: usize) -> CertResult {
    let mode = src.mode();
    let bound = quarter(mode);
    let n_max = src.available(depth);
    let mut sup = None;
    for n in 1..=n_max {
        let (a, b) = src.term(n)?;
        if !b.is_one() {
            return Err(CfError::NotUnitDenominators { index: n });
        }
        if a.cmp_abs(&bound) == Ordering::Greater {
            return Ok(Err(Refusal {
                criterion: Criterion::Worpitzky,
                index: n,
                inequality: format!("|a_{n}| = |{a}| > 1/4"),
                depth: n_max,
            }));
        }
        sup = max_abs(sup, &a);
    }
    let half = Scalar::from_ratio(1, 2, mode);
    let mut max_w = Scalar::zero(mode);
    for c in Convergents::new(src, n_max).skip(1) {
        let c = c?;
        let Some(f) = c.approximant() else {
            return Ok(Err(Refusal {
                criterion: Criterion::Worpitzky,
                index: c.n,
                inequality: format!("approximant {} is at infinity", c.n),
                depth: n_max,
            }));
        };
        let w = &f - src.b0();
        if w.cmp_abs(&half) != Ordering::Less {
            return Ok(Err(Refusal {
                criterion: Criterion::Worpitzky,
                index: c.n,
                inequality: format!("|f_{}| = |{w}| >= 1/2", c.n),
                depth: n_max,
            }));
        }
        max_w = max_abs(Some(max_w), &w).expect("present");
    }
    Ok(Ok(ConvergenceCertificate {
        criterion: Criterion::Worpitzky,
        start_index: 1,
        depth: n_max,
        exhaustive: is_constant_family(src.descriptor()),
        witness: Witness::Worpitzky { sup_abs_a: sup.unwrap_or_else(|| Scalar::zero(mode)), max_abs_approximant: max_w },
    }))
}

fn digits_of(values: &[&Scalar]) -> Option<u32> {
    values.iter().filter_map(|v| v.mode().digits()).min()
}

/// `(|x + i y|^2, |x - i y|^2)`, exact when both are rational.
fn abs_sq_pm_i(x: &Scalar, y: &Scalar) -> Result<(Scalar, Scalar), CfError> {
    match (x, y) {
        (Scalar::Rational(_), Scalar::Rational(_)) => {
            let s = &(x * x) + &(y * y);
            Ok((s.clone(), s))
        }
        _ => {
            let digits = digits_of(&[x, y]).unwrap_or(MIN_DIGITS);
            let m = Mode::Complex { digits };
            let x = x.to_mode(m)?;
            let iy = &Scalar::i(digits) * &y.to_mode(m)?;
            Ok(((&x + &iy).abs_sq(), (&x - &iy).abs_sq()))
        }
    }
}

/// `lhs <= rhs`, exact in rational mode; in complex-float mode with a
/// relative slack of `10^(2 - digits)` so equality cases survive rounding.
fn le_slack(lhs: &Scalar, rhs: &Scalar) -> bool {
    match (lhs, rhs) {
        (Scalar::Rational(_), Scalar::Rational(_)) => lhs.cmp_real(rhs) != Ordering::Greater,
        _ => lhs.cmp_real(rhs) != Ordering::Greater || lhs.approx_eq(rhs) || rhs.approx_eq(lhs),
    }
}

fn lt_strict(lhs: &Scalar, rhs: &Scalar) -> bool {
    lhs.cmp_real(rhs) == Ordering::Less
}

/// Checks `|alpha| < rho < |alpha + 1|`.
pub fn lange_sandwich(alpha: &Scalar, rho: &Scalar) -> bool {
    let alpha_sq = alpha.abs_sq();
    let rho_sq = rho.abs_sq();
    let one = Scalar::one(alpha.mode());
    let shifted = (alpha + &one).abs_sq();
    rho.cmp_real(&Scalar::zero(rho.mode())) == Ordering::Greater
        && rho.is_real()
        && lt_strict(&alpha_sq, &rho_sq)
        && lt_strict(&rho_sq, &shifted)
}

/// Lange's twin-region test for `K(c_n^2 / 1)`:
/// `|c_{2n-1} ± iα| <= ρ`, `|c_{2n} ± i(1+α)| >= ρ`, with `|α| < ρ < |α+1|`.
pub fn lange_check(c: &Sequence, alpha: &Scalar, rho: &Scalar, depth: usize) -> Result<ConvergenceCertificate, Refusal> {
    lange_check_from(c, alpha, rho, depth, 1)
}

fn lange_check_from(
    c: &Sequence,
    alpha: &Scalar,
    rho: &Scalar,
    depth: usize,
    start_index: usize,
) -> Result<ConvergenceCertificate, Refusal> {
    let refuse = |index: usize, inequality: String| Refusal { criterion: Criterion::Lange, index, inequality, depth };
    if !lange_sandwich(alpha, rho) {
        return Err(refuse(0, format!("|α| < ρ < |α+1| fails for α = {alpha}, ρ = {rho}")));
    }
    let rho_sq = rho.abs_sq();
    let one = Scalar::one(alpha.mode());
    let alpha1 = alpha + &one;
    let n_max = c.len().map_or(depth, |l| l.min(depth));
    for n in 1..=n_max {
        let cn = c.get(n).map_err(|e| refuse(n, e.to_string()))?;
        if n % 2 == 1 {
            let (p, m) = abs_sq_pm_i(&cn, alpha).map_err(|e| refuse(n, e.to_string()))?;
            if !le_slack(&p, &rho_sq) || !le_slack(&m, &rho_sq) {
                return Err(refuse(n, format!("|c_{n} ± iα| <= ρ fails")));
            }
        } else {
            let (p, m) = abs_sq_pm_i(&cn, &alpha1).map_err(|e| refuse(n, e.to_string()))?;
            if !le_slack(&rho_sq, &p) || !le_slack(&rho_sq, &m) {
                return Err(refuse(n, format!("|c_{n} ± i(1+α)| >= ρ fails")));
            }
        }
    }
    Ok(ConvergenceCertificate {
        criterion: Criterion::Lange,
        start_index,
        depth: n_max,
        exhaustive: false,
        witness: Witness::Lange {
            alpha: alpha.clone(),
            rho: rho.clone(),
            checks: vec![
                "|α| < ρ < |α+1|".into(),
                format!("|c_(2n-1) ± iα| <= ρ for 2n-1 <= {n_max}"),
                format!("|c_(2n) ± i(1+α)| >= ρ for 2n <= {n_max}"),
            ],
        },
    })
}

/// Witness pair built from `sqrt(1/a) = c + i d`, `c > 0`.
#[derive(Clone, Debug)]
pub struct LangeParams {
    pub alpha: Scalar,
    pub rho: Scalar,
    /// ρ², exact whenever `a` is a positive rational.
    pub rho_sq: Scalar,
    /// The principal `sqrt(1/a)`.
    pub c: Scalar,
}

/// `α = (|w|/2)(1 + i d/c)` and `ρ = sqrt((|w|/(4c²))(|w|² + 4c²))` for
/// `w = 1/a`, `sqrt(w) = c + i d`. Fails on the ray `a <= 0`.
///
/// Positive rational `a` gives exact `α` and `ρ²`; `ρ` and `c` stay exact
/// when they are rational and otherwise are computed in complex-float mode at `digits`.
pub fn lange_find_params(a: &Scalar, digits: u32) -> Result<LangeParams, CfError> {
    let excluded = || CfError::Domain(format!("a = {a} lies on the excluded ray (-∞, 0]"));
    if a.is_zero() {
        return Err(excluded());
    }
    let params = match a {
        Scalar::Rational(r) => {
            if r <= &num_rational::BigRational::from_integer(0.into()) {
                return Err(excluded());
            }
            let w = a.recip()?;
            let mode = Mode::Rational;
            let alpha = &w / &Scalar::from_i64(2, mode);
            let rho_sq = &(&(&w * &w) + &(&Scalar::from_i64(4, mode) * &w)) / &Scalar::from_i64(4, mode);
            LangeParams { alpha, rho: sqrt_any(&rho_sq, digits)?, c: sqrt_any(&w, digits)?, rho_sq }
        }
        Scalar::Complex(z) => {
            if z.im().is_zero() && !z.re().is_positive() {
                return Err(excluded());
            }
            let w = a.recip()?;
            let mode = a.mode();
            let two = Scalar::from_i64(2, mode);
            let four = Scalar::from_i64(4, mode);
            let s = w.abs();
            let c_sq = &(&s + &w.real_part()) / &two;
            if c_sq.is_zero() {
                return Err(excluded());
            }
            let c = c_sq.sqrt()?;
            let d = &w.imag_part() / &(&two * &c);
            let digits = mode.digits().expect("complex");
            let alpha = &(&s / &two) * &(&Scalar::one(mode) + &(&Scalar::i(digits) * &(&d / &c)));
            let rho_sq = &(&s / &(&four * &c_sq)) * &(&(&s * &s) + &(&four * &c_sq));
            let root = &c + &(&Scalar::i(digits) * &d);
            LangeParams { alpha, rho: rho_sq.sqrt()?, rho_sq, c: root }
        }
    };
    if !lange_sandwich(&params.alpha, &params.rho) {
        return Err(CfError::Numeric(format!("Lange parameters for a = {a} fail |α| < ρ < |α+1|")));
    }
    Ok(params)
}

/// Principal square root, exact when possible, otherwise in complex-float mode.
fn sqrt_any(x: &Scalar, digits: u32) -> Result<Scalar, CfError> {
    match x.sqrt() {
        Ok(v) => Ok(v),
        Err(_) => x.to_mode(Mode::complex(digits)?)?.sqrt(),
    }
}

/// A tail `K(c_k^2/1)` with constant odd terms and affine even squares:
/// `c_{2k-1}^2 = odd_sq`, `c_{2k}^2 = p + q (k - 1)`.
#[derive(Clone, Debug)]
pub struct AffineTail {
    pub odd_sq: Scalar,
    pub p: Scalar,
    pub q: Scalar,
}

/// Lange check for an [`AffineTail`] over `k <= check`, extended as far as
/// needed for the growth bound `|c_{2k}| >= ρ + |1+α|` to cover every
/// later index, in which case the certificate is exhaustive.
pub fn lange_affine_tail(
    tail: &AffineTail,
    params: &LangeParams,
    check: usize,
    start_index: usize,
) -> Result<ConvergenceCertificate, Refusal> {
    let to_f = |s: &Scalar| s.to_c64();
    let reach = params.rho.to_c64().norm() + (to_f(&params.alpha) + 1.0).norm();
    let (p, q) = (to_f(&tail.p), to_f(&tail.q));
    // |p + q(k-1)| >= |q|(k-1) - |p| grows past reach^2 from this k on
    let closure = if q.norm() > 0.0 { ((reach * reach * 1.01 + p.norm()) / q.norm()).ceil() + 2.0 } else { f64::INFINITY };
    let k_max = if closure.is_finite() { check.max(closure as usize).min(1_000_000) } else { check };
    let exhaustive = closure.is_finite() && (closure as usize) <= k_max;
    let digits = params.alpha.mode().digits().unwrap_or(50);
    let odd = sqrt_any(&tail.odd_sq, digits).map_err(|e| Refusal {
        criterion: Criterion::Lange,
        index: 1,
        inequality: e.to_string(),
        depth: check,
    })?;
    let (tp, tq) = (tail.p.clone(), tail.q.clone());
    let seq = Sequence::new(Some(2 * k_max), move |n| {
        if n % 2 == 1 {
            return Ok(odd.clone());
        }
        let k = (n / 2) as i64;
        sqrt_any(&(&tp + &(&tq * &Scalar::from_i64(k - 1, tq.mode()))), digits)
    });
    let mut cert = lange_check_from(&seq, &params.alpha, &params.rho, 2 * k_max, start_index)?;
    cert.exhaustive = exhaustive;
    Ok(cert)
}

/// Scans the tail start `m = 1, 2, ...` until [`lange_affine_tail`] certifies.
pub fn lange_scan(
    build: impl Fn(usize) -> Result<(AffineTail, usize), CfError>,
    params: &LangeParams,
    m_max: usize,
    check: usize,
) -> Result<(usize, ConvergenceCertificate), Refusal> {
    let mut last = None;
    for m in 1..=m_max {
        let (tail, start) = match build(m) {
            Ok(t) => t,
            Err(e) => {
                last = Some(Refusal { criterion: Criterion::Lange, index: m, inequality: e.to_string(), depth: check });
                continue;
            }
        };
        match lange_affine_tail(&tail, params, check, start) {
            Ok(cert) if cert.exhaustive => return Ok((m, cert)),
            Ok(_) => {}
            Err(r) => last = Some(r),
        }
    }
    Err(last.unwrap_or(Refusal {
        criterion: Criterion::Lange,
        index: m_max,
        inequality: "no tail start found".into(),
        depth: check,
    }))
}

/// How the gaps between approximants shrink.
#[derive(Clone, Debug, PartialEq)]
pub enum DecayClass {
    /// The approximants became exactly constant.
    Exact,
    /// Gap ratio per index roughly constant.
    Geometric { rate: f64 },
    /// Faster than any fixed ratio.
    SuperGeometric,
    /// Gaps behave like `N^exponent`.
    Algebraic { exponent: f64 },
    /// Slower than any power.
    Logarithmic,
    /// Too few usable gaps, or gaps not shrinking.
    Undetermined,
}

impl DecayClass {
    pub fn label(&self) -> String {
        match self {
            DecayClass::Exact => "exact".into(),
            DecayClass::Geometric { rate } => format!("geometric(rate={rate:.3e})"),
            DecayClass::SuperGeometric => "super-geometric".into(),
            DecayClass::Algebraic { exponent } => format!("algebraic(exponent={exponent:.3})"),
            DecayClass::Logarithmic => "logarithmic".into(),
            DecayClass::Undetermined => "undetermined".into(),
        }
    }

    pub fn is_slow(&self) -> bool {
        matches!(self, DecayClass::Algebraic { .. } | DecayClass::Logarithmic)
    }
}

/// Extrapolation applied separately to the even and odd subsequences.
#[derive(Clone, Debug, Default)]
pub enum Acceleration {
    #[default]
    None,
    /// One Richardson step for errors `~ C k^p`, from indices `K` and `K/2`.
    Richardson { exponent: Scalar },
    /// Neville extrapolation to `h = 0` in `h = 1/k` through `order + 1` nodes.
    Polynomial { order: usize },
}

impl Acceleration {
    pub fn label(&self) -> String {
        match self {
            Acceleration::None => "none".into(),
            Acceleration::Richardson { exponent } => format!("richardson(p={exponent})"),
            Acceleration::Polynomial { order } => format!("polynomial(order={order})"),
        }
    }
}

/// Diagnostics from [`empirical_limit`].
#[derive(Clone, Debug)]
pub struct LimitDiagnostics {
    pub depth: usize,
    pub last_index: usize,
    pub last_value: Scalar,
    /// max |f_N - f_{N-1}| over the final quarter of indices.
    pub max_tail_gap: Option<Scalar>,
    pub even_last: Option<Scalar>,
    pub even_gap: Option<Scalar>,
    pub odd_last: Option<Scalar>,
    pub odd_gap: Option<Scalar>,
    /// max |a_{2k}| seen.
    pub max_even_numerator: Scalar,
    /// max |f_N| over the second half of indices.
    pub approximant_bound: Scalar,
    pub infinite_count: usize,
    pub decay: DecayClass,
    pub acceleration: Acceleration,
    pub even_estimate: Option<Scalar>,
    pub odd_estimate: Option<Scalar>,
    pub parity_difference: Option<Scalar>,
    pub converged: bool,
}

impl LimitDiagnostics {
    pub fn to_json(&self) -> Value {
        let s = |v: &Option<Scalar>| v.as_ref().map(|x| Value::String(x.to_string())).unwrap_or(Value::Null);
        json!({
            "depth": self.depth,
            "last_index": self.last_index,
            "last_value": self.last_value.to_string(),
            "max_tail_gap": s(&self.max_tail_gap),
            "even_last": s(&self.even_last),
            "even_gap": s(&self.even_gap),
            "odd_last": s(&self.odd_last),
            "odd_gap": s(&self.odd_gap),
            "max_abs_a_even": self.max_even_numerator.to_string(),
            "approximant_bound": self.approximant_bound.to_string(),
            "infinite_approximants": self.infinite_count,
            "decay": self.decay.label(),
            "acceleration": self.acceleration.label(),
            "even_estimate": s(&self.even_estimate),
            "odd_estimate": s(&self.odd_estimate),
            "parity_difference": s(&self.parity_difference),
            "converged": self.converged,
        })
    }
}

fn precision_floor(mode: Mode) -> f64 {
    match mode {
        Mode::Rational => f64::NEG_INFINITY,
        Mode::Complex { digits } => 5.0 - digits as f64,
    }
}

/// Classifies decay from `(index, log10 gap)` samples of one subsequence.
fn classify(samples: &[(usize, f64)], floor: f64) -> DecayClass {
    let usable: Vec<(f64, f64)> =
        samples.iter().filter(|(_, g)| g.is_finite() && *g > floor).map(|&(n, g)| (n as f64, g)).collect();
    if samples.len() >= 4 && samples.iter().rev().take(samples.len() / 2).all(|(_, g)| *g == f64::NEG_INFINITY) {
        return DecayClass::Exact;
    }
    if usable.len() < 8 {
        return if samples.iter().any(|(_, g)| *g <= floor) { DecayClass::SuperGeometric } else { DecayClass::Undetermined };
    }
    let pick = |frac: f64| usable[((usable.len() - 1) as f64 * frac) as usize];
    let (p1, p2, p3) = (pick(0.25), pick(0.5), pick(1.0));
    let lin1 = (p2.1 - p1.1) / (p2.0 - p1.0);
    let lin2 = (p3.1 - p2.1) / (p3.0 - p2.0);
    let log1 = (p2.1 - p1.1) / (p2.0.log10() - p1.0.log10());
    let log2 = (p3.1 - p2.1) / (p3.0.log10() - p2.0.log10());
    if lin2 >= 0.0 && log2 >= -0.05 {
        return DecayClass::Undetermined;
    }
    if lin1 < 0.0 && lin2 < 0.0 {
        let ratio = lin2 / lin1;
        if (0.8..=1.25).contains(&ratio) && lin2 * (p3.0 - p2.0) < -1.0 {
            return DecayClass::Geometric { rate: 10f64.powf(lin2) };
        }
        if ratio > 1.25 {
            return DecayClass::SuperGeometric;
        }
    }
    if (log2 - log1).abs() <= 0.25 * log1.abs().max(0.2) && log2 < -0.3 {
        return DecayClass::Algebraic { exponent: log2 };
    }
    DecayClass::Logarithmic
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`.
fn neville_at_zero(xs: &[Scalar], ys: &[Scalar]) -> Scalar {
    let mut p: Vec<Scalar> = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            // p_i = (x_j p_i - x_i p_{i+1}) / (x_j - x_i) evaluated at 0
            let num = &(&xs[j] * &p[i]) - &(&xs[i] * &p[i + 1]);
            p[i] = &num / &(&xs[j] - &xs[i]);
        }
    }
    p[0].clone()
}

/// Applies `acc` to a parity subsequence `s_k = f_{2k + parity}`, `k = 0..`.
/// Entries may be `None` (at infinity).
fn accelerate(sub: &[Option<Scalar>], acc: &Acceleration) -> Option<Scalar> {
    let last = sub.iter().rposition(Option::is_some)?;
    match acc {
        Acceleration::None => sub[last].clone(),
        Acceleration::Richardson { exponent } => {
            let k = last - last % 2;
            let (hi, lo) = (sub.get(k)?.clone()?, sub.get(k / 2)?.clone()?);
            if k < 4 {
                return Some(hi);
            }
            let mode = hi.mode();
            let two = Scalar::from_i64(2, mode);
            let exponent = if exponent.mode().same_kind(mode) { exponent.clone() } else { exponent.to_mode(mode).ok()? };
            let factor = two.pow(&exponent).ok()?;
            let denom = &Scalar::one(mode) - &factor;
            if denom.is_zero() {
                return Some(hi);
            }
            Some(&(&hi - &(&factor * &lo)) / &denom)
        }
        Acceleration::Polynomial { order } => {
            let order = (*order).max(1);
            let spacing = (last / (2 * order)).max(1);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for i in 0..=order {
                let k = last.checked_sub(i * spacing)?;
                if k == 0 {
                    break;
                }
                let y = sub[k].clone()?;
                xs.push(Scalar::from_ratio(1, k as i64, Mode::Rational).to_mode(y.mode()).ok()?);
                ys.push(y);
            }
            if xs.len() < 2 {
                return sub[last].clone();
            }
            Some(neville_at_zero(&xs, &ys))
        }
    }
}

/// Estimates the limit from approximants up to `depth`, skipping those at infinity.
pub fn empirical_limit(
    src: &CoefficientSource,
    depth: usize,
    tol: &Scalar,
) -> Result<(ProjectiveValue, LimitDiagnostics), CfError> {
    empirical_limit_with(src, depth, tol, &Acceleration::None)
}

/// [`empirical_limit`] with per-parity extrapolation.
pub fn empirical_limit_with(
    src: &CoefficientSource,
    depth: usize,
    tol: &Scalar,
    acc: &Acceleration,
) -> Result<(ProjectiveValue, LimitDiagnostics), CfError> {
    if depth < 4 {
        return Err(CfError::Domain("empirical_limit needs depth >= 4".into()));
    }
    let mode = src.mode();
    let n_max = src.available(depth);
    let mut values: Vec<Option<Scalar>> = Vec::with_capacity(n_max + 1);
    let mut max_even_a: Option<Scalar> = None;
    for c in Convergents::new(src, n_max) {
        let c = c?;
        if c.n > 0 && c.n % 2 == 0 {
            max_even_a = max_abs(max_even_a, &src.term(c.n)?.0);
        }
        values.push(c.approximant());
    }
    let last_index = values.iter().rposition(Option::is_some).ok_or(CfError::AllInfinite { depth: n_max })?;
    let last_value = values[last_index].clone().expect("finite");
    let infinite_count = values.iter().filter(|v| v.is_none()).count();

    let gap = |i: usize, j: usize| -> Option<Scalar> {
        match (&values[i], &values[j]) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        }
    };
    let mut max_tail_gap: Option<Scalar> = None;
    for n in (3 * n_max / 4).max(1)..=n_max {
        if let Some(g) = gap(n, n - 1) {
            max_tail_gap = max_abs(max_tail_gap, &g);
        }
    }
    let mut bound = Scalar::zero(mode);
    for v in values[n_max / 2..].iter().flatten() {
        bound = max_abs(Some(bound), v).expect("present");
    }

    let parity = |p: usize| -> Vec<Option<Scalar>> { values.iter().skip(p).step_by(2).cloned().collect() };
    let (even, odd) = (parity(0), parity(1));
    let last_of = |sub: &[Option<Scalar>]| sub.iter().rev().flatten().next().cloned();
    let last_gap = |sub: &[Option<Scalar>]| -> Option<Scalar> {
        let idx: Vec<usize> = sub.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i).collect();
        let (&j, &i) = (idx.last()?, idx.get(idx.len().checked_sub(2)?)?);
        Some((&sub[j].clone()? - &sub[i].clone()?).abs())
    };

    let floor = precision_floor(mode);
    let samples = |sub: &[Option<Scalar>], p: usize| -> Vec<(usize, f64)> {
        (1..sub.len())
            .filter_map(|k| match (&sub[k], &sub[k - 1]) {
                (Some(x), Some(y)) => Some((2 * k + p, (x - y).log10_abs())),
                _ => None,
            })
            .collect()
    };
    let mut decay = classify(&samples(&even, 0), floor);
    if decay == DecayClass::Undetermined {
        decay = classify(&samples(&odd, 1), floor);
    }

    let even_estimate = accelerate(&even, acc);
    let odd_estimate = accelerate(&odd, acc);
    let parity_difference = match (&even_estimate, &odd_estimate) {
        (Some(e), Some(o)) => Some((e - o).abs()),
        _ => None,
    };
    let converged = parity_difference.as_ref().is_some_and(|d| d.cmp_abs(tol) == Ordering::Less);
    let estimate = match acc {
        Acceleration::None => ProjectiveValue::finite(last_value.clone()),
        _ => {
            let pick = if last_index % 2 == 0 { &even_estimate } else { &odd_estimate };
            ProjectiveValue::finite(pick.clone().unwrap_or_else(|| last_value.clone()))
        }
    };
    let diagnostics = LimitDiagnostics {
        depth: n_max,
        last_index,
        last_value,
        max_tail_gap,
        even_last: last_of(&even),
        even_gap: last_gap(&even),
        odd_last: last_of(&odd),
        odd_gap: last_gap(&odd),
        max_even_numerator: max_even_a.unwrap_or_else(|| Scalar::zero(mode)),
        approximant_bound: bound,
        infinite_count,
        decay,
        acceleration: acc.clone(),
        even_estimate,
        odd_estimate,
        parity_difference,
        converged,
    };
    Ok((estimate, diagnostics))
}

/// Wall-style empirical certificate: approximants bounded over the second
/// half, even-indexed numerators bounded, and both parities converged.
pub fn wall_empirical(src: &CoefficientSource, depth: usize, tol: &Scalar) -> CertResult {
    let (_, d) = empirical_limit(src, depth, tol)?;
    if !d.converged {
        return Ok(Err(Refusal {
            criterion: Criterion::WallEmpirical,
            index: d.last_index,
            inequality: "even and odd parts disagree beyond tol".into(),
            depth: d.depth,
        }));
    }
    Ok(Ok(ConvergenceCertificate {
        criterion: Criterion::WallEmpirical,
        start_index: d.depth / 2,
        depth: d.depth,
        exhaustive: false,
        witness: Witness::Wall {
            approximant_bound: d.approximant_bound,
            numerator_bound: d.max_even_numerator,
            subsequence: "even indices".into(),
        },
    }))
}
