//! Catalog of the verifiable continued fraction identities: Entries 7, 7a,
//! 9, 10, 12 and 13, the Rogers-Ramanujan fraction `R(q)` and the generalized
//! Blecksmith-Brillhart identity with its even part.

pub mod hill;
pub mod verify;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::CfError;
use crate::scalar::{Mode, Scalar};
use crate::source::{CoefficientSource, Descriptor, Sequence};
use crate::transforms::ExtensionScheme;

/// Identity parameters by name, as scalar text.
pub type Params = BTreeMap<String, String>;

/// Largest depth evaluated in exact arithmetic when the mode is inferred.
pub const RATIONAL_DEPTH_CAP: usize = 1000;

/// Builds a [`Params`] map from pairs.
pub fn params(pairs: &[(&str, &str)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    Entry7,
    Entry7a,
    Entry9,
    Entry10,
    Entry12,
    Entry13,
    Rr,
    Bb,
    BbEven,
}

impl IdentityId {
    pub const ALL: [IdentityId; 9] = [
        IdentityId::Entry7,
        IdentityId::Entry7a,
        IdentityId::Entry9,
        IdentityId::Entry10,
        IdentityId::Entry12,
        IdentityId::Entry13,
        IdentityId::Rr,
        IdentityId::Bb,
        IdentityId::BbEven,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Entry7 => "entry7",
            IdentityId::Entry7a => "entry7a",
            IdentityId::Entry9 => "entry9",
            IdentityId::Entry10 => "entry10",
            IdentityId::Entry12 => "entry12",
            IdentityId::Entry13 => "entry13",
            IdentityId::Rr => "rr",
            IdentityId::Bb => "bb",
            IdentityId::BbEven => "bb_even",
        }
    }

    /// Required parameters, then optional ones.
    pub fn schema(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            IdentityId::Entry7 => (&["x"], &[]),
            IdentityId::Entry7a => (&["y1"], &["step", "ratio"]),
            IdentityId::Entry9 | IdentityId::Entry12 => (&["a", "x"], &[]),
            IdentityId::Entry10 => (&["n"], &[]),
            IdentityId::Entry13 => (&["a", "b", "d"], &[]),
            IdentityId::Rr => (&["q"], &[]),
            IdentityId::Bb | IdentityId::BbEven => (&["q", "alpha"], &[]),
        }
    }

    /// Rejects unknown or missing parameters.
    pub fn check_schema(self, p: &Params) -> Result<(), CfError> {
        let (required, optional) = self.schema();
        for key in p.keys() {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(CfError::Domain(format!("{}: unknown parameter {key:?}", self.name())));
            }
        }
        for key in required {
            if !p.contains_key(*key) {
                return Err(CfError::Domain(format!("{}: missing parameter {key:?}", self.name())));
            }
        }
        if self == IdentityId::Entry7a && p.contains_key("step") == p.contains_key("ratio") {
            return Err(CfError::Domain("entry7a: give exactly one of \"step\" or \"ratio\"".into()));
        }
        Ok(())
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self, CfError> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| CfError::Domain(format!("unknown identity {s:?}")))
    }
}

/// The limit an identity claims.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Value(Scalar),
    /// The claimed value is the point at infinity.
    Infinity,
    /// No elementary closed form: compare with another catalog entry.
    CrossCheck(IdentityId, Params),
}

/// Exact arithmetic when every parameter is an integer or fraction, the
/// fraction stays rational (integer `alpha` for the q-fractions) and `depth`
/// is at most [`RATIONAL_DEPTH_CAP`]; complex floats at `digits` otherwise.
pub fn auto_mode(id: IdentityId, p: &Params, depth: usize, digits: u32) -> Result<Mode, CfError> {
    let rational_text = p.values().all(|v| Scalar::is_rational_text(v));
    let integer_alpha = match id {
        IdentityId::Bb | IdentityId::BbEven => {
            p.get("alpha").is_some_and(|a| Scalar::parse(a, digits).ok().and_then(|s| s.as_i64()).is_some())
        }
        _ => true,
    };
    if rational_text && integer_alpha && depth <= RATIONAL_DEPTH_CAP {
        Ok(Mode::Rational)
    } else {
        Mode::complex(digits)
    }
}

struct Parsed<'a> {
    id: IdentityId,
    map: &'a Params,
    mode: Mode,
}

impl Parsed<'_> {
    fn new(id: IdentityId, map: &Params, mode: Mode) -> Result<Parsed<'_>, CfError> {
        id.check_schema(map)?;
        Ok(Parsed { id, map, mode })
    }

    fn get(&self, key: &str) -> Result<Scalar, CfError> {
        let text = self.map.get(key).ok_or_else(|| CfError::Domain(format!("{}: missing parameter {key:?}", self.id)))?;
        Scalar::parse_in(text, self.mode).map_err(|e| match e {
            CfError::Parse { text, reason } => CfError::Parse { text, reason: format!("parameter {key}: {reason}") },
            other => other,
        })
    }
}

fn predicate(id: IdentityId, clause: impl fmt::Display) -> CfError {
    CfError::Predicate(format!("{id}: {clause}"))
}

fn is_positive_integer(z: &Scalar) -> bool {
    z.as_i64().is_some_and(|k| k >= 1)
}

fn is_nonnegative_integer(z: &Scalar) -> bool {
    z.as_i64().is_some_and(|k| k >= 0)
}

fn abs_lt(x: &Scalar, y: &Scalar) -> bool {
    x.cmp_abs(y) == Ordering::Less
}

/// The `y` sequence of Entry 7a: linear `y_i = y1 + (i-1) step` or
/// geometric `y_i = y1 ratio^(i-1)`.
#[derive(Clone, Debug)]
pub enum YSequence {
    Linear { y1: Scalar, step: Scalar },
    Geometric { y1: Scalar, ratio: Scalar },
}

impl YSequence {
    fn from_params(p: &Parsed<'_>) -> Result<YSequence, CfError> {
        let y1 = p.get("y1")?;
        if p.map.contains_key("step") {
            Ok(YSequence::Linear { y1, step: p.get("step")? })
        } else {
            Ok(YSequence::Geometric { y1, ratio: p.get("ratio")? })
        }
    }

    pub fn get(&self, i: usize) -> Result<Scalar, CfError> {
        match self {
            YSequence::Linear { y1, step } => Ok(y1 + &(step * &Scalar::from_i64(i as i64 - 1, y1.mode()))),
            YSequence::Geometric { y1, ratio } => Ok(y1 * &ratio.powi(i as i64 - 1)?),
        }
    }

    /// Hypotheses (i) to (iii), decided from the closed shape of the sequence.
    fn check(&self) -> Result<(), CfError> {
        let id = IdentityId::Entry7a;
        let one = Scalar::one(self.mode());
        let minus_one = -&one;
        match self {
            YSequence::Linear { y1, step } => {
                if step.is_zero() {
                    if y1 == &minus_one {
                        return Err(predicate(id, "(i) y_i = -1"));
                    }
                    if !abs_lt(&one, &(y1 + &one)) {
                        return Err(predicate(id, "(ii) constant y with |1 + y| <= 1 keeps the product bounded"));
                    }
                    // 16 |y + 1|^2 <= |y|^4
                    let lhs = &Scalar::from_i64(16, self.mode()) * &(y1 + &one).abs_sq();
                    let rhs = &y1.abs_sq() * &y1.abs_sq();
                    if lhs.cmp_real(&rhs) == Ordering::Greater {
                        return Err(predicate(id, "(iii) |(y+1)/y^2| > 1/4 for constant y"));
                    }
                } else {
                    let k = (&minus_one - y1).checked_div(step)?;
                    if is_nonnegative_integer(&k) {
                        return Err(predicate(id, format!("(i) y_{} = -1", k.as_i64().unwrap_or(0) + 1)));
                    }
                }
            }
            YSequence::Geometric { y1, ratio } => {
                if y1.is_zero() {
                    return Err(predicate(id, "(ii) y1 = 0 makes every y_i zero"));
                }
                if ratio.is_one() {
                    return YSequence::Linear { y1: y1.clone(), step: Scalar::zero(self.mode()) }.check();
                }
                if !abs_lt(&one, ratio) {
                    return Err(predicate(id, "(ii) geometric y needs |ratio| > 1 or ratio = 1"));
                }
            }
        }
        Ok(())
    }

    fn mode(&self) -> Mode {
        match self {
            YSequence::Linear { y1, .. } | YSequence::Geometric { y1, .. } => y1.mode(),
        }
    }
}

/// Smallest `n >= 2` such that `|(y_i + 1) / (y_{i-1} y_i)| <= 1/4` for every
/// `i` in `n..=depth`. Zero products count as violations.
pub fn entry7a_threshold(ys: &YSequence, depth: usize) -> Result<Option<usize>, CfError> {
    let sixteen = Scalar::from_i64(16, ys.mode());
    let one = Scalar::one(ys.mode());
    let y: Vec<Scalar> = (1..=depth.max(2)).map(|i| ys.get(i)).collect::<Result<_, _>>()?;
    let mut n0 = None;
    for i in (2..=y.len()).rev() {
        let (prev, yi) = (&y[i - 2], &y[i - 1]);
        let prod = prev * yi;
        let ok = !prod.is_zero() && (&sixteen * &(yi + &one).abs_sq()).cmp_real(&prod.abs_sq()) != Ordering::Greater;
        if !ok {
            break;
        }
        n0 = Some(i);
    }
    Ok(n0)
}

fn check_predicate_parsed(p: &Parsed<'_>) -> Result<(), CfError> {
    let id = p.id;
    let zero = Scalar::zero(p.mode);
    let one = Scalar::one(p.mode);
    match id {
        IdentityId::Entry7 => {
            let x = p.get("x")?;
            if is_positive_integer(&-&x) {
                return Err(predicate(id, "x is a negative integer"));
            }
        }
        IdentityId::Entry7a => YSequence::from_params(p)?.check()?,
        IdentityId::Entry9 => {
            let (a, x) = (p.get("a")?, p.get("x")?);
            if a.is_zero() {
                if !abs_lt(&one, &x) {
                    return Err(predicate(id, "a = 0 requires |x| > 1"));
                }
            } else if is_positive_integer(&(-&x).checked_div(&a)?) {
                return Err(predicate(id, "x = -ka for a positive integer k"));
            }
        }
        IdentityId::Entry10 => {
            let n = p.get("n")?;
            if !is_positive_integer(&n) {
                return Err(predicate(id, "n is not a positive integer"));
            }
        }
        IdentityId::Entry12 => {
            let (a, x) = (p.get("a")?, p.get("x")?);
            if a.is_zero() {
                return Err(predicate(id, "a = 0"));
            }
            if is_positive_integer(&(-&x).checked_div(&a)?) {
                return Err(predicate(id, "x = -ka for a positive integer k"));
            }
        }
        IdentityId::Entry13 => {
            let (a, b, d) = (p.get("a")?, p.get("b")?, p.get("d")?);
            if d.is_zero() {
                if a.is_zero() {
                    return Err(predicate(id, "a + kd = 0 at k = 0"));
                }
                if !abs_lt(&a, &b) {
                    return Err(predicate(id, "d = 0 requires |a| < |b|"));
                }
            } else {
                if is_nonnegative_integer(&(-&a).checked_div(&d)?) {
                    return Err(predicate(id, "a + kd = 0 for some k >= 0"));
                }
                if a != b {
                    if is_nonnegative_integer(&(-&b).checked_div(&d)?) {
                        return Err(predicate(id, "b = -kd for some k >= 0"));
                    }
                    let ratio = (&a - &b).checked_div(&d)?;
                    if ratio.real_part().cmp_real(&zero) != Ordering::Less {
                        return Err(predicate(id, "Re((a - b)/d) >= 0"));
                    }
                }
            }
        }
        IdentityId::Rr | IdentityId::Bb | IdentityId::BbEven => {
            let q = p.get("q")?;
            if !abs_lt(&q, &one) {
                return Err(predicate(id, "|q| >= 1"));
            }
            if id != IdentityId::Rr && q.is_zero() {
                let alpha = p.get("alpha")?;
                let re = alpha.real_part();
                if re.cmp_real(&zero) != Ordering::Greater || re.cmp_real(&one) != Ordering::Less {
                    return Err(predicate(id, "q = 0 requires 0 < Re(alpha) < 1"));
                }
            }
        }
    }
    Ok(())
}

/// Checks the identity's hypotheses, naming the violated clause.
pub fn check_predicate(id: IdentityId, p: &Params, mode: Mode) -> Result<(), CfError> {
    check_predicate_parsed(&Parsed::new(id, p, mode)?)
}

fn family(id_name: &str, p: &Params) -> Descriptor {
    Descriptor::Family { name: id_name.to_string(), params: p.clone(), b0: None }
}

/// `c_1 = q^α`, `c_{2k} = q^(k-α)`, `c_{2k+1} = q^(k+α)`.
fn bb_c(p: &Parsed<'_>) -> Result<impl Fn(usize) -> Result<Scalar, CfError> + Send + Sync + Clone + 'static, CfError> {
    let q = p.get("q")?;
    let alpha = p.get("alpha")?.to_mode(p.mode)?;
    let qa = q.pow(&alpha)?.to_mode(p.mode)?;
    Ok(move |j: usize| -> Result<Scalar, CfError> {
        if j == 1 {
            return Ok(qa.clone());
        }
        if q.is_zero() {
            return Ok(Scalar::zero(q.mode()));
        }
        let qk = q.powi((j / 2) as i64)?;
        if j.is_multiple_of(2) {
            qk.checked_div(&qa)
        } else {
            Ok(&qk * &qa)
        }
    })
}

fn build(id: IdentityId, p: &Parsed<'_>) -> Result<CoefficientSource, CfError> {
    let mode = p.mode;
    let zero = Scalar::zero(mode);
    let one = Scalar::one(mode);
    let desc = family(id.name(), p.map);
    let n_of = move |n: usize| Scalar::from_i64(n as i64, mode);
    Ok(match id {
        IdentityId::Entry7 => {
            let x = p.get("x")?;
            CoefficientSource::new(zero, None, desc, move |n| Ok((&x + &n_of(n), &x + &n_of(n - 1))))
        }
        IdentityId::Entry7a => {
            let ys = YSequence::from_params(p)?;
            CoefficientSource::new(zero, None, desc, move |i| {
                let y = ys.get(i)?;
                let a = &y + &one;
                if a.is_zero() {
                    return Err(predicate(IdentityId::Entry7a, format!("(i) y_{i} = -1")));
                }
                Ok((a, y))
            })
        }
        IdentityId::Entry9 => {
            let (a, x) = (p.get("a")?, p.get("x")?);
            CoefficientSource::new(zero, None, desc, move |n| {
                Ok((&x + &(&n_of(n) * &a), &(&x + &(&n_of(n - 1) * &a)) - &one))
            })
        }
        IdentityId::Entry10 => {
            let m = p.get("n")?;
            CoefficientSource::new(zero, None, desc, move |k| Ok((n_of(k), &n_of(k) - &m)))
        }
        IdentityId::Entry12 => {
            let (a, x) = (p.get("a")?, p.get("x")?);
            CoefficientSource::new(zero, None, desc, move |k| {
                if k == 1 {
                    return Ok((&x + &a, a.clone()));
                }
                let s = &x + &(&n_of(k - 1) * &a);
                Ok((&(&s * &s) - &(&a * &a), a.clone()))
            })
        }
        IdentityId::Entry13 => {
            let (a, b, d) = (p.get("a")?, p.get("b")?, p.get("d")?);
            CoefficientSource::new(zero, None, desc, move |k| {
                if k == 1 {
                    return Ok((&a * &b, &(&a + &b) + &d));
                }
                let s = &n_of(k - 1) * &d;
                let num = -&(&(&a + &s) * &(&b + &s));
                Ok((num, &(&a + &b) + &(&n_of(2 * k - 1) * &d)))
            })
        }
        IdentityId::Rr => {
            let q = p.get("q")?;
            CoefficientSource::new(one.clone(), None, desc, move |n| Ok((q.powi(n as i64)?, one.clone())))
        }
        IdentityId::Bb => {
            let c = bb_c(p)?;
            let b0 = &one - &c(1)?;
            CoefficientSource::new(b0, None, desc, move |n| {
                let a = if n == 1 {
                    c(1)?
                } else if n % 2 == 0 {
                    -&c(n / 2 + 1)?
                } else {
                    c(n / 2 + 1)?
                };
                Ok((a, one.clone()))
            })
        }
        IdentityId::BbEven => {
            let c = bb_c(p)?;
            let b0 = &one - &c(1)?;
            CoefficientSource::new(b0, None, desc, move |k| {
                if k == 1 {
                    return Ok((c(1)?, &one - &c(2)?));
                }
                let ck = c(k)?;
                Ok((&ck * &ck, &(&one + &ck) - &c(k + 1)?))
            })
        }
    })
}

/// The continued fraction written in the identity, after checking its hypotheses.
pub fn cf_source(id: IdentityId, p: &Params, mode: Mode) -> Result<CoefficientSource, CfError> {
    cf_source_with(id, p, mode, false)
}

/// [`cf_source`], optionally skipping the hypothesis check (used to
/// reproduce counterexamples outside the stated parameter range).
pub fn cf_source_with(id: IdentityId, p: &Params, mode: Mode, override_predicate: bool) -> Result<CoefficientSource, CfError> {
    let parsed = Parsed::new(id, p, mode)?;
    if !override_predicate {
        check_predicate_parsed(&parsed)?;
    }
    build(id, &parsed)
}

/// The limit claimed by the identity.
pub fn closed_form(id: IdentityId, p: &Params, mode: Mode) -> Result<Target, CfError> {
    closed_form_with(id, p, mode, false)
}

pub fn closed_form_with(id: IdentityId, p: &Params, mode: Mode, override_predicate: bool) -> Result<Target, CfError> {
    let parsed = Parsed::new(id, p, mode)?;
    if !override_predicate {
        check_predicate_parsed(&parsed)?;
    }
    let one = Scalar::one(mode);
    let q_only = |extra: Option<&str>| {
        let mut m = Params::new();
        m.insert("q".into(), p["q"].clone());
        if let Some(alpha) = extra {
            m.insert("alpha".into(), alpha.to_string());
        }
        m
    };
    Ok(match id {
        IdentityId::Entry7 | IdentityId::Entry7a | IdentityId::Entry12 => Target::Value(one),
        IdentityId::Entry9 => {
            let (a, x) = (parsed.get("a")?, parsed.get("x")?);
            let den = &x + &one;
            if den.is_zero() {
                Target::Infinity
            } else {
                Target::Value((&(&x + &a) + &one).checked_div(&den)?)
            }
        }
        IdentityId::Entry10 => Target::Value(parsed.get("n")?),
        IdentityId::Entry13 => Target::Value(parsed.get("a")?),
        IdentityId::Rr => Target::CrossCheck(IdentityId::Bb, q_only(Some("0"))),
        IdentityId::Bb => Target::CrossCheck(IdentityId::Rr, q_only(None)),
        IdentityId::BbEven => Target::CrossCheck(IdentityId::Bb, p.clone()),
    })
}

/// Which canonical contraction of an extension gives back the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contraction {
    Even,
    Odd,
}

/// The extended fraction used in an identity's proof.
#[derive(Clone, Debug)]
pub struct ProofExtension {
    pub source: CoefficientSource,
    pub contraction: Contraction,
    /// The catalog entry the contraction reproduces term by term.
    pub contracts_to: IdentityId,
    /// Parameters of `contracts_to`.
    pub params: Params,
}

fn literal_extension(id: IdentityId, p: &Parsed<'_>) -> Result<CoefficientSource, CfError> {
    let mode = p.mode;
    let zero = Scalar::zero(mode);
    let one = Scalar::one(mode);
    let n_of = move |n: usize| Scalar::from_i64(n as i64, mode);
    let desc = family(&format!("{}_ext", id.name()), p.map);
    Ok(match id {
        IdentityId::Entry7 | IdentityId::Entry7a => {
            let ys = if id == IdentityId::Entry7 {
                YSequence::Linear { y1: p.get("x")?, step: one.clone() }
            } else {
                YSequence::from_params(p)?
            };
            CoefficientSource::new(zero.clone(), None, desc, move |n| {
                if n == 1 {
                    let a = &ys.get(1)? + &one;
                    return Ok((a.clone(), a));
                }
                if n % 2 == 0 {
                    Ok((-&one, one.clone()))
                } else {
                    Ok((&ys.get(n / 2 + 1)? + &one, zero.clone()))
                }
            })
        }
        IdentityId::Entry9 => {
            let (a, x) = (p.get("a")?, p.get("x")?);
            CoefficientSource::new(zero, None, desc, move |n| {
                if n == 1 {
                    return Ok((&x + &a, x.clone()));
                }
                if n % 2 == 0 {
                    Ok((-&one, one.clone()))
                } else {
                    Ok((&x + &(&n_of(n / 2 + 1) * &a), -&a))
                }
            })
        }
        IdentityId::Entry10 => {
            let m = p.get("n")?;
            CoefficientSource::new(zero, None, desc, move |n| {
                if n == 1 {
                    return Ok((one.clone(), &n_of(2) - &m));
                }
                if n % 2 == 0 {
                    Ok((-&one, one.clone()))
                } else {
                    Ok((n_of(n / 2 + 1), &one - &m))
                }
            })
        }
        IdentityId::Entry12 => {
            let (a, x) = (p.get("a")?, p.get("x")?);
            CoefficientSource::new(zero.clone(), None, desc, move |n| {
                if n == 1 {
                    let s = &x + &a;
                    return Ok((s.clone(), s));
                }
                let k = n / 2;
                if n % 2 == 0 {
                    Ok((-&(&x + &(&n_of(k - 1) * &a)), one.clone()))
                } else {
                    Ok((&x + &(&n_of(k + 1) * &a), zero.clone()))
                }
            })
        }
        IdentityId::Entry13 => {
            let (a, b, d) = (p.get("a")?, p.get("b")?, p.get("d")?);
            CoefficientSource::new(zero.clone(), None, desc, move |n| {
                if n == 1 {
                    return Ok((&a * &b, b.clone()));
                }
                let kd = &n_of(n / 2) * &d;
                if n % 2 == 0 {
                    Ok((&a + &kd, one.clone()))
                } else {
                    Ok((&b + &kd, zero.clone()))
                }
            })
        }
        IdentityId::Rr | IdentityId::Bb | IdentityId::BbEven => {
            return Err(CfError::Unsupported(format!("{id} has no separate extension family")));
        }
    })
}

/// The extension from the identity's proof, with the contraction that
/// recovers the catalog fraction.
pub fn proof_extension(id: IdentityId, p: &Params, mode: Mode) -> Result<ProofExtension, CfError> {
    let parsed = Parsed::new(id, p, mode)?;
    check_predicate_parsed(&parsed)?;
    let with_alpha = |alpha: &str| {
        let mut m = Params::new();
        m.insert("q".into(), p["q"].clone());
        m.insert("alpha".into(), alpha.to_string());
        m
    };
    let ext = |source, contraction, contracts_to, params| ProofExtension { source, contraction, contracts_to, params };
    Ok(match id {
        IdentityId::Rr => {
            let bb = with_alpha("0");
            ext(cf_source(IdentityId::Bb, &bb, mode)?, Contraction::Odd, IdentityId::Rr, p.clone())
        }
        IdentityId::Bb => {
            let mut rr = Params::new();
            rr.insert("q".into(), p["q"].clone());
            ext(build(id, &parsed)?, Contraction::Odd, IdentityId::Rr, rr)
        }
        IdentityId::BbEven => ext(cf_source(IdentityId::Bb, p, mode)?, Contraction::Even, id, p.clone()),
        _ => ext(literal_extension(id, &parsed)?, Contraction::Even, id, p.clone()),
    })
}

/// The extension scheme that produces [`proof_extension`] from the catalog
/// fraction through [`crate::extend`], when there is one.
pub fn extension_scheme(id: IdentityId, p: &Params, mode: Mode) -> Result<Option<ExtensionScheme>, CfError> {
    let parsed = Parsed::new(id, p, mode)?;
    Ok(match id {
        IdentityId::Entry7 | IdentityId::Entry7a | IdentityId::Entry9 | IdentityId::Entry10 => Some(ExtensionScheme::Cor2),
        IdentityId::Entry12 | IdentityId::Entry13 => {
            let lit = literal_extension(id, &parsed)?;
            let a = Sequence::new(None, move |n| Ok(lit.term(n)?.0));
            Some(ExtensionScheme::Cor3 { a })
        }
        IdentityId::Rr => Some(ExtensionScheme::Cor7),
        IdentityId::Bb | IdentityId::BbEven => None,
    })
}

/// Every family name accepted by [`build_family`].
pub fn family_names() -> Vec<String> {
    let mut names = vec!["golden".to_string(), "constant".to_string()];
    for id in IdentityId::ALL {
        names.push(id.name().to_string());
    }
    for id in [
        IdentityId::Entry7,
        IdentityId::Entry7a,
        IdentityId::Entry9,
        IdentityId::Entry10,
        IdentityId::Entry12,
        IdentityId::Entry13,
    ] {
        names.push(format!("{}_ext", id.name()));
    }
    names
}

/// Mode for a family when none is forced: exact when every parameter (and `b0`) is rational text.
pub fn family_mode(name: &str, p: &Params, b0: Option<&str>, depth: usize, digits: u32) -> Result<Mode, CfError> {
    let base = name.strip_suffix("_ext").unwrap_or(name);
    let b0_rational = b0.is_none_or(Scalar::is_rational_text);
    match IdentityId::from_str(base) {
        Ok(id) => {
            let m = auto_mode(id, p, depth, digits)?;
            Ok(if b0_rational { m } else { Mode::complex(digits)? })
        }
        Err(_) => {
            if p.values().all(|v| Scalar::is_rational_text(v)) && b0_rational {
                Ok(Mode::Rational)
            } else {
                Mode::complex(digits)
            }
        }
    }
}

/// Builds a named family: `golden` (all ones), `constant` (`a`, optional `b`
/// defaulting to 1), any identity id, or `<id>_ext` for the literal proof
/// extensions. A given `b0` replaces the family's own.
pub fn build_family(name: &str, p: &Params, b0: Option<&str>, mode: Mode) -> Result<CoefficientSource, CfError> {
    let src = match name {
        "golden" => {
            if let Some(k) = p.keys().next() {
                return Err(CfError::Domain(format!("golden: unknown parameter {k:?}")));
            }
            let one = Scalar::one(mode);
            CoefficientSource::new(Scalar::zero(mode), None, family(name, p), move |_| Ok((one.clone(), one.clone())))
        }
        "constant" => {
            for k in p.keys() {
                if k != "a" && k != "b" {
                    return Err(CfError::Domain(format!("constant: unknown parameter {k:?}")));
                }
            }
            let a_text = p.get("a").ok_or_else(|| CfError::Domain("constant: missing parameter \"a\"".into()))?;
            let a = Scalar::parse_in(a_text, mode)?;
            let b = match p.get("b") {
                Some(t) => Scalar::parse_in(t, mode)?,
                None => Scalar::one(mode),
            };
            CoefficientSource::new(Scalar::zero(mode), None, family(name, p), move |_| Ok((a.clone(), b.clone())))
        }
        other => {
            if let Some(base) = other.strip_suffix("_ext") {
                let id = IdentityId::from_str(base).map_err(|_| CfError::Domain(format!("unknown family {other:?}")))?;
                let parsed = Parsed::new(id, p, mode)?;
                check_predicate_parsed(&parsed)?;
                literal_extension(id, &parsed)?
            } else {
                let id = IdentityId::from_str(other).map_err(|_| CfError::Domain(format!("unknown family {other:?}")))?;
                cf_source(id, p, mode)?
            }
        }
    };
    match b0 {
        Some(text) => {
            let b0 = Scalar::parse_in(text, mode)?;
            let desc = Descriptor::Family { name: name.to_string(), params: p.clone(), b0: Some(text.to_string()) };
            Ok(src.with_b0(b0).with_descriptor(desc))
        }
        None => Ok(src),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergent::approximants;
    use crate::source::to_unit_numerators;
    use crate::transforms::{collapse_zeros, even_part, extend, odd_part};

    fn q(s: &str) -> Scalar {
        Scalar::parse(s, 50).unwrap()
    }

    const R: Mode = Mode::Rational;

    fn c50() -> Mode {
        Mode::complex(50).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert!("entry8".parse::<IdentityId>().is_err());
    }

    #[test]
    fn written_forms() {
        let e7 = cf_source(IdentityId::Entry7, &params(&[("x", "1")]), R).unwrap();
        for n in 1..6 {
            assert_eq!(e7.term(n).unwrap(), (Scalar::from_i64(n as i64 + 1, R), Scalar::from_i64(n as i64, R)));
        }
        let e10 = cf_source(IdentityId::Entry10, &params(&[("n", "3")]), R).unwrap();
        let expect = [(1, -2), (2, -1), (3, 0), (4, 1), (5, 2)];
        for (i, (a, b)) in expect.into_iter().enumerate() {
            assert_eq!(e10.term(i + 1).unwrap(), (Scalar::from_i64(a, R), Scalar::from_i64(b, R)));
        }
        let rr = cf_source(IdentityId::Rr, &params(&[("q", "0")]), R).unwrap();
        assert!(rr.b0().is_one());
        assert!((1..10).all(|n| rr.term(n).unwrap().0.is_zero()));
    }

    #[test]
    fn predicates_name_the_clause() {
        let cases = [
            (IdentityId::Entry7, params(&[("x", "-3")])),
            (IdentityId::Entry9, params(&[("a", "1"), ("x", "-2")])),
            (IdentityId::Entry9, params(&[("a", "0"), ("x", "1/2")])),
            (IdentityId::Entry10, params(&[("n", "0")])),
            (IdentityId::Entry12, params(&[("a", "0"), ("x", "1")])),
            (IdentityId::Entry13, params(&[("a", "2"), ("b", "1"), ("d", "1")])),
            (IdentityId::Entry13, params(&[("a", "2"), ("b", "1"), ("d", "0")])),
            (IdentityId::Rr, params(&[("q", "1")])),
            (IdentityId::Bb, params(&[("q", "0"), ("alpha", "0")])),
            (IdentityId::Entry7a, params(&[("y1", "2"), ("ratio", "1/2")])),
            (IdentityId::Entry7a, params(&[("y1", "-3"), ("step", "1")])),
        ];
        for (id, p) in cases {
            match cf_source(id, &p, R) {
                Err(CfError::Predicate(msg)) => assert!(msg.starts_with(id.name()), "{msg}"),
                other => panic!("{id} {p:?}: {other:?}"),
            }
        }
        assert!(cf_source(IdentityId::Bb, &params(&[("q", "0"), ("alpha", "0.5")]), c50()).is_ok());
        assert!(cf_source(IdentityId::Entry9, &params(&[("a", "1"), ("z", "2")]), R).is_err());
        assert!(cf_source_with(IdentityId::Entry13, &params(&[("a", "2"), ("b", "1"), ("d", "1")]), R, true).is_ok());
    }

    #[test]
    fn closed_forms() {
        let t = closed_form(IdentityId::Entry9, &params(&[("a", "1"), ("x", "2")]), R).unwrap();
        assert_eq!(t, Target::Value(q("4/3")));
        assert_eq!(closed_form(IdentityId::Entry10, &params(&[("n", "5")]), R).unwrap(), Target::Value(q("5")));
        assert_eq!(closed_form(IdentityId::Entry9, &params(&[("a", "2"), ("x", "-1")]), R).unwrap(), Target::Infinity);
        assert!(matches!(
            closed_form(IdentityId::Bb, &params(&[("q", "1/3"), ("alpha", "1")]), R).unwrap(),
            Target::CrossCheck(IdentityId::Rr, _)
        ));
    }

    fn grid() -> Vec<(IdentityId, Params, Mode)> {
        let mut g = Vec::new();
        for x in ["1", "1/2", "3", "0"] {
            g.push((IdentityId::Entry7, params(&[("x", x)]), R));
        }
        g.push((IdentityId::Entry7, params(&[("x", "2+1i")]), c50()));
        g.push((IdentityId::Entry7a, params(&[("y1", "1/2"), ("step", "2")]), R));
        g.push((IdentityId::Entry7a, params(&[("y1", "-3"), ("ratio", "4/3")]), R));
        g.push((IdentityId::Entry7a, params(&[("y1", "1+1i"), ("ratio", "2")]), c50()));
        for (a, x) in [("1", "2"), ("2", "1/3"), ("-1/2", "7/3"), ("0", "2"), ("3", "-1")] {
            g.push((IdentityId::Entry9, params(&[("a", a), ("x", x)]), R));
        }
        g.push((IdentityId::Entry9, params(&[("a", "1+1i"), ("x", "0.5")]), c50()));
        for n in ["1", "2", "3", "6"] {
            g.push((IdentityId::Entry10, params(&[("n", n)]), R));
        }
        for (a, x) in [("1", "1"), ("2", "1/2"), ("-1", "3/2")] {
            g.push((IdentityId::Entry12, params(&[("a", a), ("x", x)]), R));
        }
        g.push((IdentityId::Entry12, params(&[("a", "1"), ("x", "1+1i")]), c50()));
        for (a, b, d) in [("1", "2", "1"), ("1", "3", "2"), ("1", "1", "1"), ("1", "2", "0")] {
            g.push((IdentityId::Entry13, params(&[("a", a), ("b", b), ("d", d)]), R));
        }
        g.push((IdentityId::Entry13, params(&[("a", "1+1i"), ("b", "2"), ("d", "1")]), c50()));
        g
    }

    #[test]
    fn even_part_of_extension_is_the_entry() {
        for (id, p, mode) in grid() {
            let src = cf_source(id, &p, mode).unwrap();
            let ext = proof_extension(id, &p, mode).unwrap();
            assert_eq!(ext.contraction, Contraction::Even);
            let ev = even_part(&ext.source);
            assert_eq!(ev.first_difference(&src, 40).unwrap(), None, "{id} {p:?}");
        }
    }

    #[test]
    fn scheme_route_matches_literal_extension() {
        for (id, p, mode) in grid() {
            let src = cf_source(id, &p, mode).unwrap();
            let scheme = extension_scheme(id, &p, mode).unwrap().unwrap();
            let via = extend(&src, &scheme).unwrap();
            let lit = proof_extension(id, &p, mode).unwrap().source;
            assert_eq!(via.first_difference(&lit, 40).unwrap(), None, "{id} {p:?}");
        }
    }

    #[test]
    fn odd_approximants_of_7a_extension_are_one() {
        for p in [params(&[("y1", "1"), ("step", "1")]), params(&[("y1", "-3"), ("ratio", "4/3")])] {
            let ext = proof_extension(IdentityId::Entry7a, &p, R).unwrap().source;
            let vals = approximants(&ext, 81).unwrap();
            for n in (1..=81).step_by(2) {
                assert_eq!(vals[n], Some(q("1")), "index {n}");
            }
        }
    }

    #[test]
    fn entry12_unit_numerator_form() {
        for (a, x) in [("1", "1"), ("2", "1/2"), ("3", "-5/2")] {
            let p = params(&[("a", a), ("x", x)]);
            let ext = proof_extension(IdentityId::Entry12, &p, R).unwrap().source;
            let den = to_unit_numerators(&ext);
            let (av, xv) = (q(a), q(x));
            let one = q("1");
            assert_eq!(den.term(1).unwrap(), (one.clone(), one.clone()));
            assert_eq!(den.term(2).unwrap().1, &-&one - &(&av / &xv));
            assert!(den.term(3).unwrap().1.is_zero());
            assert_eq!(den.term(4).unwrap().1, &one + &(&(&q("2") * &av) / &xv));
            let vals = approximants(&den, 81).unwrap();
            for n in (1..=81).step_by(2) {
                assert_eq!(vals[n], Some(one.clone()), "index {n}");
            }
            for k in 1..=20usize {
                let prefix = collapse_zeros(&den.truncate(4 * k).unwrap()).unwrap();
                let kax = &Scalar::from_i64(k as i64, R) * &(&av / &xv);
                let expect = one.checked_div(&(&one + &one.checked_div(&kax).unwrap())).unwrap();
                let got = crate::convergent::value_at(&prefix, prefix.len().unwrap()).unwrap().value().unwrap();
                assert_eq!(got, expect, "k = {k}");
                assert_eq!(prefix.len(), Some(2));
            }
        }
    }

    #[test]
    fn entry13_unit_numerator_form() {
        let p = params(&[("a", "2"), ("b", "3"), ("d", "1")]);
        let den = to_unit_numerators(&proof_extension(IdentityId::Entry13, &p, R).unwrap().source);
        assert_eq!(den.term(1).unwrap().1, q("1/2"));
        assert_eq!(den.term(2).unwrap().1, q("2"));
        let vals = approximants(&den, 41).unwrap();
        for n in (1..=41).step_by(2) {
            assert_eq!(vals[n], Some(q("2")), "index {n}");
        }
    }

    #[test]
    fn bb_structure() {
        let p = params(&[("q", "1/10"), ("alpha", "0")]);
        let bb = cf_source(IdentityId::Bb, &p, R).unwrap();
        let rr = cf_source(IdentityId::Rr, &params(&[("q", "1/10")]), R).unwrap();
        assert_eq!(odd_part(&bb).unwrap().first_difference(&rr, 30).unwrap(), None);
        let via = extend(&rr, &ExtensionScheme::Cor7).unwrap();
        assert_eq!(via.first_difference(&bb, 30).unwrap(), None);
        for (qt, at) in [("0.3", "0.5"), ("-0.4", "0.5i"), ("0.3+0.2i", "0")] {
            let p = params(&[("q", qt), ("alpha", at)]);
            let bb = cf_source(IdentityId::Bb, &p, c50()).unwrap();
            let ev = cf_source(IdentityId::BbEven, &p, c50()).unwrap();
            assert_eq!(even_part(&bb).first_difference(&ev, 40).unwrap(), None, "{qt} {at}");
            let rr = cf_source(IdentityId::Rr, &params(&[("q", qt)]), c50()).unwrap();
            assert_eq!(odd_part(&bb).unwrap().first_difference(&rr, 40).unwrap(), None, "{qt} {at}");
        }
    }

    #[test]
    fn threshold_scan() {
        let p = params(&[("y1", "-3"), ("ratio", "4/3")]);
        let parsed = Parsed::new(IdentityId::Entry7a, &p, R).unwrap();
        let ys = YSequence::from_params(&parsed).unwrap();
        assert_eq!(entry7a_threshold(&ys, 40).unwrap(), Some(2));
        // y_i = i: (i+1)/((i-1)i) <= 1/4 from i = 6 on
        let lin = YSequence::Linear { y1: q("1"), step: q("1") };
        assert_eq!(entry7a_threshold(&lin, 60).unwrap(), Some(6));
    }

    #[test]
    fn families() {
        let g = build_family("golden", &Params::new(), None, R).unwrap();
        assert_eq!(g.term(3).unwrap(), (q("1"), q("1")));
        let c = build_family("constant", &params(&[("a", "3/10")]), Some("1"), R).unwrap();
        assert_eq!(c.term(2).unwrap(), (q("3/10"), q("1")));
        assert!(c.b0().is_one());
        assert!(build_family("entry9_ext", &params(&[("a", "1"), ("x", "2")]), None, R).is_ok());
        assert!(build_family("nope", &Params::new(), None, R).is_err());
        assert!(build_family("constant", &params(&[("c", "1")]), None, R).is_err());
        assert_eq!(family_mode("entry9", &params(&[("a", "1"), ("x", "0.5")]), None, 10, 50).unwrap(), c50());
        assert_eq!(family_mode("bb", &params(&[("q", "1/2"), ("alpha", "1/2")]), None, 10, 50).unwrap(), c50());
        assert_eq!(family_mode("bb", &params(&[("q", "1/2"), ("alpha", "2")]), None, 10, 50).unwrap(), R);
    }
}
