//! Replayable coefficient sources `b0 + K(a_n / b_n)` and the generic
//! operations on them: tails and equivalence transforms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde_json::{json, Map, Value};

use crate::error::CfError;
use crate::scalar::{Mode, Scalar};

type TermFn = dyn Fn(usize) -> Result<(Scalar, Scalar), CfError> + Send + Sync;
type SeqFn = dyn Fn(usize) -> Result<Scalar, CfError> + Send + Sync;

/// A 1-based scalar sequence, finite or unbounded.
#[derive(Clone)]
pub struct Sequence {
    f: Arc<SeqFn>,
    len: Option<usize>,
}

impl Sequence {
    pub fn new(len: Option<usize>, f: impl Fn(usize) -> Result<Scalar, CfError> + Send + Sync + 'static) -> Self {
        Sequence { f: Arc::new(f), len }
    }

    /// `values[0]` becomes entry 1.
    pub fn from_vec(values: Vec<Scalar>) -> Self {
        let len = values.len();
        Sequence::new(Some(len), move |n| Ok(values[n - 1].clone()))
    }

    /// Memoized first-order recurrence: `s(start) = init`, `s(n) = step(n, s(n-1))`.
    /// Entries below `start` are rejected.
    pub fn recurrence(
        start: usize,
        init: Scalar,
        len: Option<usize>,
        step: impl Fn(usize, &Scalar) -> Result<Scalar, CfError> + Send + Sync + 'static,
    ) -> Self {
        let cache: Arc<Mutex<Vec<Scalar>>> = Arc::new(Mutex::new(vec![init]));
        Sequence::new(len, move |n| {
            if n < start {
                return Err(CfError::Domain(format!("sequence index {n} below start {start}")));
            }
            let mut memo = cache.lock().expect("sequence cache poisoned");
            while memo.len() <= n - start {
                let k = start + memo.len();
                let next = step(k, memo.last().expect("seeded"))?;
                memo.push(next);
            }
            Ok(memo[n - start].clone())
        })
    }

    pub fn len(&self) -> Option<usize> {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == Some(0)
    }

    pub fn get(&self, n: usize) -> Result<Scalar, CfError> {
        if n == 0 {
            return Err(CfError::Domain("sequences are indexed from 1".into()));
        }
        if let Some(len) = self.len {
            if n > len {
                return Err(CfError::SourceExhausted { index: n, len });
            }
        }
        (self.f)(n)
    }

    pub fn take(&self, n: usize) -> Result<Vec<Scalar>, CfError> {
        (1..=n).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence").field("len", &self.len).finish_non_exhaustive()
    }
}

/// Which extension scheme built a source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Cor1,
    Cor2,
    Cor3,
    Cor7,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Cor1 => "cor1",
            SchemeKind::Cor2 => "cor2",
            SchemeKind::Cor3 => "cor3",
            SchemeKind::Cor7 => "cor7",
        }
    }

    pub fn parse(s: &str) -> Option<SchemeKind> {
        Some(match s {
            "cor1" => SchemeKind::Cor1,
            "cor2" => SchemeKind::Cor2,
            "cor3" => SchemeKind::Cor3,
            "cor7" => SchemeKind::Cor7,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    Bernoulli,
    Euler,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TransformKind {
    Even,
    Odd,
    /// `a` carries the explicit a-sequence required by cor3.
    Extend { scheme: SchemeKind, a: Option<Vec<String>> },
    Collapse,
    Tail { m: usize },
    /// `r` is `None` when the scaling came from a function rather than a list.
    Equivalence { r: Option<Vec<String>> },
    UnitNumerators,
    UnitDenominators,
}

impl TransformKind {
    pub fn tag(&self) -> String {
        match self {
            TransformKind::Even => "even".into(),
            TransformKind::Odd => "odd".into(),
            TransformKind::Extend { scheme, .. } => format!("extend:{}", scheme.name()),
            TransformKind::Collapse => "collapse".into(),
            TransformKind::Tail { .. } => "tail".into(),
            TransformKind::Equivalence { .. } => "equivalence".into(),
            TransformKind::UnitNumerators => "unit_numerators".into(),
            TransformKind::UnitDenominators => "unit_denominators".into(),
        }
    }
}

/// Structured, serializable description of how a source was built.
#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Family { name: String, params: BTreeMap<String, String>, b0: Option<String> },
    Terms { b0: String, terms: Vec<(String, String)> },
    Sequence { kind: SequenceKind, values: Vec<String> },
    Transform { kind: TransformKind, of: Box<Descriptor> },
    /// Built in code from a closure; not reconstructible from JSON.
    Opaque(String),
}

fn str_list(v: &[String]) -> Value {
    Value::Array(v.iter().map(|s| Value::String(s.clone())).collect())
}

fn take_str(v: &Value, ptr: &str) -> Result<String, CfError> {
    v.as_str().map(str::to_owned).ok_or_else(|| CfError::json(ptr, "expected a string"))
}

fn take_str_list(v: &Value, ptr: &str) -> Result<Vec<String>, CfError> {
    let arr = v.as_array().ok_or_else(|| CfError::json(ptr, "expected an array of strings"))?;
    arr.iter().enumerate().map(|(i, x)| take_str(x, &format!("{ptr}/{i}"))).collect()
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], ptr: &str) -> Result<(), CfError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CfError::json(format!("{ptr}/{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn require<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value, CfError> {
    obj.get(key).ok_or_else(|| CfError::json(format!("{ptr}/{key}"), "missing required field"))
}

impl Descriptor {
    pub fn family(name: &str, params: &[(&str, &str)]) -> Descriptor {
        Descriptor::Family {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            b0: None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Descriptor::Family { name, params, b0 } => {
                let mut m = Map::new();
                if let Some(b0) = b0 {
                    m.insert("b0".into(), Value::String(b0.clone()));
                }
                m.insert("family".into(), Value::String(name.clone()));
                m.insert(
                    "params".into(),
                    Value::Object(params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
                );
                Value::Object(m)
            }
            Descriptor::Terms { b0, terms } => json!({
                "b0": b0,
                "terms": terms.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            }),
            Descriptor::Sequence { kind, values } => {
                let tag = match kind {
                    SequenceKind::Bernoulli => "bernoulli",
                    SequenceKind::Euler => "euler",
                };
                json!({ "transform": tag, "sequence": str_list(values) })
            }
            Descriptor::Transform { kind, of } => {
                let mut m = Map::new();
                m.insert("transform".into(), Value::String(kind.tag()));
                match kind {
                    TransformKind::Extend { a: Some(a), .. } => {
                        m.insert("a".into(), str_list(a));
                    }
                    TransformKind::Tail { m: shift } => {
                        m.insert("m".into(), json!(shift));
                    }
                    TransformKind::Equivalence { r } => {
                        m.insert("r".into(), r.as_deref().map(str_list).unwrap_or(Value::Null));
                    }
                    _ => {}
                }
                m.insert("of".into(), of.to_json());
                Value::Object(m)
            }
            Descriptor::Opaque(label) => json!({ "opaque": label }),
        }
    }

    /// Parses the JSON form. Errors carry a JSON pointer relative to `value`.
    pub fn from_json(value: &Value) -> Result<Descriptor, CfError> {
        Descriptor::from_json_at(value, "")
    }

    fn from_json_at(value: &Value, ptr: &str) -> Result<Descriptor, CfError> {
        let obj = value.as_object().ok_or_else(|| CfError::json(ptr, "expected an object"))?;
        if let Some(tag) = obj.get("transform") {
            let tag = take_str(tag, &format!("{ptr}/transform"))?;
            return Descriptor::transform_from_json(&tag, obj, ptr);
        }
        if let Some(name) = obj.get("family") {
            reject_unknown(obj, &["b0", "family", "params"], ptr)?;
            let name = take_str(name, &format!("{ptr}/family"))?;
            let b0 = obj.get("b0").map(|v| take_str(v, &format!("{ptr}/b0"))).transpose()?;
            let mut params = BTreeMap::new();
            if let Some(p) = obj.get("params") {
                let pobj = p.as_object().ok_or_else(|| CfError::json(format!("{ptr}/params"), "expected an object"))?;
                for (k, v) in pobj {
                    params.insert(k.clone(), take_str(v, &format!("{ptr}/params/{k}"))?);
                }
            }
            return Ok(Descriptor::Family { name, params, b0 });
        }
        if let Some(terms) = obj.get("terms") {
            reject_unknown(obj, &["b0", "terms"], ptr)?;
            let b0 = take_str(require(obj, "b0", ptr)?, &format!("{ptr}/b0"))?;
            let arr = terms.as_array().ok_or_else(|| CfError::json(format!("{ptr}/terms"), "expected an array"))?;
            let mut out = Vec::with_capacity(arr.len());
            for (i, t) in arr.iter().enumerate() {
                let p = format!("{ptr}/terms/{i}");
                match t.as_array().map(Vec::as_slice) {
                    Some([a, b]) => out.push((take_str(a, &format!("{p}/0"))?, take_str(b, &format!("{p}/1"))?)),
                    _ => return Err(CfError::json(p, "expected a pair [a, b]")),
                }
            }
            return Ok(Descriptor::Terms { b0, terms: out });
        }
        if obj.contains_key("opaque") {
            return Err(CfError::json(ptr, "opaque sources cannot be rebuilt from JSON"));
        }
        Err(CfError::json(ptr, "expected one of \"family\", \"terms\" or \"transform\""))
    }

    fn transform_from_json(tag: &str, obj: &Map<String, Value>, ptr: &str) -> Result<Descriptor, CfError> {
        if tag == "bernoulli" || tag == "euler" {
            reject_unknown(obj, &["transform", "sequence"], ptr)?;
            let values = take_str_list(require(obj, "sequence", ptr)?, &format!("{ptr}/sequence"))?;
            let kind = if tag == "bernoulli" { SequenceKind::Bernoulli } else { SequenceKind::Euler };
            return Ok(Descriptor::Sequence { kind, values });
        }
        let (kind, extra): (TransformKind, &[&str]) = match tag {
            "even" => (TransformKind::Even, &[]),
            "odd" => (TransformKind::Odd, &[]),
            "collapse" => (TransformKind::Collapse, &[]),
            "unit_numerators" => (TransformKind::UnitNumerators, &[]),
            "unit_denominators" => (TransformKind::UnitDenominators, &[]),
            "tail" => {
                let p = format!("{ptr}/m");
                let m = require(obj, "m", ptr)?
                    .as_u64()
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| CfError::json(p, "expected a positive integer"))?;
                (TransformKind::Tail { m: m as usize }, &["m"])
            }
            "equivalence" => {
                let r = take_str_list(require(obj, "r", ptr)?, &format!("{ptr}/r"))?;
                (TransformKind::Equivalence { r: Some(r) }, &["r"])
            }
            other => match other.strip_prefix("extend:").and_then(SchemeKind::parse) {
                Some(SchemeKind::Cor3) => {
                    let a = take_str_list(require(obj, "a", ptr)?, &format!("{ptr}/a"))?;
                    (TransformKind::Extend { scheme: SchemeKind::Cor3, a: Some(a) }, &["a"])
                }
                Some(scheme) => (TransformKind::Extend { scheme, a: None }, &[]),
                None => return Err(CfError::json(format!("{ptr}/transform"), format!("unknown transform {other:?}"))),
            },
        };
        let mut allowed = vec!["transform", "of"];
        allowed.extend_from_slice(extra);
        reject_unknown(obj, &allowed, ptr)?;
        let of_ptr = format!("{ptr}/of");
        let of = Descriptor::from_json_at(require(obj, "of", ptr)?, &of_ptr)?;
        Ok(Descriptor::Transform { kind, of: Box::new(of) })
    }
}

/// A replayable generator of `b0` and the pairs `(a_n, b_n)`, `n >= 1`.
#[derive(Clone)]
pub struct CoefficientSource {
    b0: Scalar,
    term: Arc<TermFn>,
    len: Option<usize>,
    descriptor: Descriptor,
}

impl CoefficientSource {
    /// `term` must be pure: the same `n` always yields the same pair.
    pub fn new(
        b0: Scalar,
        len: Option<usize>,
        descriptor: Descriptor,
        term: impl Fn(usize) -> Result<(Scalar, Scalar), CfError> + Send + Sync + 'static,
    ) -> Self {
        CoefficientSource { b0, term: Arc::new(term), len, descriptor }
    }

    /// A finite source from explicit pairs.
    pub fn from_terms(b0: Scalar, terms: Vec<(Scalar, Scalar)>) -> Self {
        let descriptor = Descriptor::Terms {
            b0: b0.to_string(),
            terms: terms.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        };
        let len = terms.len();
        CoefficientSource::new(b0, Some(len), descriptor, move |n| Ok(terms[n - 1].clone()))
    }

    pub fn b0(&self) -> &Scalar {
        &self.b0
    }

    pub fn mode(&self) -> Mode {
        self.b0.mode()
    }

    pub fn len(&self) -> Option<usize> {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == Some(0)
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn with_descriptor(mut self, descriptor: Descriptor) -> Self {
        self.descriptor = descriptor;
        self
    }

    /// Replaces `b0`, keeping the terms.
    pub fn with_b0(mut self, b0: Scalar) -> Self {
        self.b0 = b0;
        self
    }

    /// `(a_n, b_n)` for `n >= 1`, with bounds and mode checks.
    pub fn term(&self, n: usize) -> Result<(Scalar, Scalar), CfError> {
        if n == 0 {
            return Err(CfError::Domain("terms are indexed from 1".into()));
        }
        if let Some(len) = self.len {
            if n > len {
                return Err(CfError::SourceExhausted { index: n, len });
            }
        }
        let (a, b) = (self.term)(n)?;
        let mode = self.mode();
        if !a.mode().same_kind(mode) || !b.mode().same_kind(mode) {
            return Err(CfError::ModeMismatch {
                context: format!("term {n} is {} but b0 is {}", a.mode().name(), mode.name()),
            });
        }
        Ok((a, b))
    }

    /// The first `n` terms.
    pub fn terms(&self, n: usize) -> Result<Vec<(Scalar, Scalar)>, CfError> {
        (1..=n).map(|i| self.term(i)).collect()
    }

    /// Number of terms available up to `depth`.
    pub fn available(&self, depth: usize) -> usize {
        self.len.map_or(depth, |l| l.min(depth))
    }

    /// Materializes the first `n` terms into an explicit finite source.
    pub fn truncate(&self, n: usize) -> Result<CoefficientSource, CfError> {
        Ok(CoefficientSource::from_terms(self.b0.clone(), self.terms(n)?))
    }

    /// Same source converted to another mode.
    pub fn to_mode(&self, mode: Mode) -> Result<CoefficientSource, CfError> {
        if self.mode() == mode {
            return Ok(self.clone());
        }
        let inner = self.clone();
        let b0 = self.b0.to_mode(mode)?;
        Ok(CoefficientSource::new(b0, self.len, self.descriptor.clone(), move |n| {
            let (a, b) = inner.term(n)?;
            Ok((a.to_mode(mode)?, b.to_mode(mode)?))
        }))
    }

    /// Term-by-term equality of the first `n` terms and `b0`, using
    /// [`Scalar::approx_eq`] (exact in rational mode). Returns the first differing index.
    pub fn first_difference(&self, other: &CoefficientSource, n: usize) -> Result<Option<usize>, CfError> {
        if !self.b0.approx_eq(&other.b0) {
            return Ok(Some(0));
        }
        for i in 1..=n {
            let (a, b) = self.term(i)?;
            let (c, d) = other.term(i)?;
            if !a.approx_eq(&c) || !b.approx_eq(&d) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

impl fmt::Debug for CoefficientSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSource")
            .field("b0", &self.b0.to_string())
            .field("len", &self.len)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

/// The tail beginning at term `m`: `b0 = 0`, `term(n) = src.term(n + m - 1)`.
pub fn tail(src: &CoefficientSource, m: usize) -> Result<CoefficientSource, CfError> {
    if m == 0 {
        return Err(CfError::Domain("tail index starts at 1".into()));
    }
    if let Some(len) = src.len() {
        if m > len {
            return Err(CfError::SourceExhausted { index: m, len });
        }
    }
    let inner = src.clone();
    let descriptor = Descriptor::Transform { kind: TransformKind::Tail { m }, of: Box::new(src.descriptor.clone()) };
    Ok(CoefficientSource::new(
        Scalar::zero(src.mode()),
        src.len().map(|l| l + 1 - m),
        descriptor,
        move |n| inner.term(n + m - 1),
    ))
}

fn check_scale(r: &Sequence, n: usize, mode: Mode) -> Result<Scalar, CfError> {
    if n == 0 {
        return Ok(Scalar::one(mode));
    }
    let v = r.get(n)?;
    if v.is_zero() {
        return Err(CfError::ZeroScale { index: n });
    }
    if !v.mode().same_kind(mode) {
        return Err(CfError::ModeMismatch { context: format!("r({n}) is {} but source is {}", v.mode().name(), mode.name()) });
    }
    Ok(v)
}

fn equivalence_with(src: &CoefficientSource, r: &Sequence, descriptor: Descriptor) -> CoefficientSource {
    let inner = src.clone();
    let r = r.clone();
    let mode = src.mode();
    CoefficientSource::new(src.b0().clone(), src.len(), descriptor, move |n| {
        let (a, b) = inner.term(n)?;
        let rn = check_scale(&r, n, mode)?;
        let rp = check_scale(&r, n - 1, mode)?;
        Ok((&(&rn * &rp) * &a, &rn * &b))
    })
}

/// `a'_n = r(n) r(n-1) a_n`, `b'_n = r(n) b_n`, with `r(0) = 1`. Every
/// approximant is preserved. Zero scale factors are reported lazily, when
/// the affected term is requested.
pub fn equivalence_transform(src: &CoefficientSource, r: &Sequence) -> CoefficientSource {
    let listed = r
        .len()
        .filter(|&l| l <= 4096)
        .and_then(|l| r.take(l).ok())
        .map(|v| v.iter().map(ToString::to_string).collect());
    let descriptor = Descriptor::Transform {
        kind: TransformKind::Equivalence { r: listed },
        of: Box::new(src.descriptor.clone()),
    };
    equivalence_with(src, r, descriptor)
}

/// Equivalent source with every partial numerator equal to 1, via
/// `r(n) = 1 / (a_n r(n-1))`. Requires nonzero `a_n`.
pub fn to_unit_numerators(src: &CoefficientSource) -> CoefficientSource {
    let inner = src.clone();
    let mode = src.mode();
    let r = Sequence::recurrence(0, Scalar::one(mode), src.len(), move |n, prev| {
        let (a, _) = inner.term(n)?;
        if a.is_zero() {
            return Err(CfError::ZeroTerm { index: n });
        }
        (&a * prev).recip()
    });
    let descriptor = Descriptor::Transform { kind: TransformKind::UnitNumerators, of: Box::new(src.descriptor.clone()) };
    equivalence_with(src, &r, descriptor)
}

/// Equivalent source with every partial denominator equal to 1, via `r(n) = 1 / b_n`.
pub fn to_unit_denominators(src: &CoefficientSource) -> CoefficientSource {
    let inner = src.clone();
    let r = Sequence::new(src.len(), move |n| {
        let (_, b) = inner.term(n)?;
        if b.is_zero() {
            return Err(CfError::ZeroDenominator { index: n });
        }
        b.recip()
    });
    let descriptor = Descriptor::Transform { kind: TransformKind::UnitDenominators, of: Box::new(src.descriptor.clone()) };
    equivalence_with(src, &r, descriptor)
}
