//! Job specifications: JSON parsing, schema validation and defaults.

use std::fmt;
use std::str::FromStr;

use contfrac::{family_names, CfError, Descriptor, IdentityId, Mode, Params, Scalar, TransformKind};
use serde_json::{json, Map, Value};

pub const DEFAULT_DEPTH: usize = 200;
pub const DEFAULT_DIGITS: u32 = 50;
pub const DEFAULT_TOL: &str = "1e-30";
pub const DEFAULT_TERMS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Eval,
    Contract,
    Extend,
    Certify,
    Verify,
    Sweep,
}

impl Action {
    const NAMES: [(&'static str, Action); 6] = [
        ("eval", Action::Eval),
        ("contract", Action::Contract),
        ("extend", Action::Extend),
        ("certify", Action::Certify),
        ("verify", Action::Verify),
        ("sweep", Action::Sweep),
    ];

    pub fn name(self) -> &'static str {
        Action::NAMES.iter().find(|(_, a)| *a == self).map(|(n, _)| *n).unwrap_or("eval")
    }

    /// Fields accepted in addition to the common ones.
    fn fields(self) -> &'static [&'static str] {
        match self {
            Action::Eval => &["source", "id", "params", "mode"],
            Action::Contract => &["source", "id", "params", "mode", "kind", "terms"],
            Action::Extend => &["source", "id", "params", "mode", "scheme", "a", "terms"],
            Action::Certify => &["source", "id", "params", "mode", "criterion", "alpha", "rho", "lange_a"],
            Action::Verify => &["id", "params", "mode", "override"],
            Action::Sweep => &["id", "params", "mode", "override", "grid"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "table",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(format!("unknown format {other:?}; expected json, csv or table")),
        }
    }
}

/// `auto` infers exact or float evaluation from the inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    Auto,
    Rational,
    Complex,
}

impl ModeChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModeChoice::Auto => "auto",
            ModeChoice::Rational => "rational",
            ModeChoice::Complex => "complex",
        }
    }

    pub fn forced(self, digits: u32) -> Result<Option<Mode>, CfError> {
        match self {
            ModeChoice::Auto => Ok(None),
            ModeChoice::Rational => Ok(Some(Mode::Rational)),
            ModeChoice::Complex => Mode::complex(digits).map(Some),
        }
    }
}

/// Where the coefficients come from.
#[derive(Clone, Debug)]
pub enum SourceSpec {
    Descriptor(Descriptor),
    Identity(IdentityId, Params),
}

#[derive(Clone, Debug)]
pub enum ActionSpec {
    Eval,
    Contract { kind: String, terms: usize },
    Extend { scheme: String, a: Option<Vec<String>>, terms: usize },
    Certify { criterion: String, alpha: Option<String>, rho: Option<String>, lange_a: Option<String> },
    Verify { id: IdentityId, params: Params, override_predicate: bool },
    Sweep { id: IdentityId, params: Params, override_predicate: bool, grid: Vec<(String, Vec<String>)> },
}

/// A validated job with every default filled in.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub action: Action,
    pub source: Option<SourceSpec>,
    pub spec: ActionSpec,
    pub depth: usize,
    pub digits: u32,
    pub tol: String,
    pub mode: ModeChoice,
    pub format: Format,
}

#[derive(Debug)]
pub struct SpecError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ptr = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{ptr}: {}", self.message)
    }
}

impl From<CfError> for SpecError {
    fn from(e: CfError) -> Self {
        match e {
            CfError::Json { pointer, message } => SpecError { pointer, message },
            other => SpecError { pointer: String::new(), message: other.to_string() },
        }
    }
}

fn err(pointer: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError { pointer: pointer.into(), message: message.into() }
}

fn string_at(v: &Value, ptr: &str) -> Result<String, SpecError> {
    v.as_str().map(str::to_string).ok_or_else(|| err(ptr, format!("must be a string, not {}", kind(v))))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn uint_at(v: &Value, ptr: &str) -> Result<u64, SpecError> {
    v.as_u64().ok_or_else(|| err(ptr, format!("must be a non-negative integer, not {}", kind(v))))
}

fn scalar_text(v: &Value, ptr: &str, digits: u32) -> Result<String, SpecError> {
    let text = string_at(v, ptr)?;
    Scalar::parse(&text, digits).map_err(|e| err(ptr, e.to_string()))?;
    Ok(text)
}

fn scalar_list(v: &Value, ptr: &str, digits: u32) -> Result<Vec<String>, SpecError> {
    let arr = v.as_array().ok_or_else(|| err(ptr, format!("must be an array, not {}", kind(v))))?;
    arr.iter().enumerate().map(|(i, x)| scalar_text(x, &format!("{ptr}/{i}"), digits)).collect()
}

fn params_at(v: &Value, ptr: &str, digits: u32) -> Result<Params, SpecError> {
    let obj = v.as_object().ok_or_else(|| err(ptr, format!("must be an object, not {}", kind(v))))?;
    obj.iter().map(|(k, x)| Ok((k.clone(), scalar_text(x, &format!("{ptr}/{k}"), digits)?))).collect()
}

fn choice(v: &Value, ptr: &str, allowed: &[&str]) -> Result<String, SpecError> {
    let s = string_at(v, ptr)?;
    if allowed.contains(&s.as_str()) {
        Ok(s)
    } else {
        Err(err(ptr, format!("unknown value {s:?}; expected one of {}", allowed.join(", "))))
    }
}

fn check_texts<'a>(texts: impl IntoIterator<Item = &'a String>, ptr: &str, digits: u32) -> Result<(), SpecError> {
    for (i, t) in texts.into_iter().enumerate() {
        Scalar::parse(t, digits).map_err(|e| err(format!("{ptr}/{i}"), e.to_string()))?;
    }
    Ok(())
}

/// Every scalar inside a source descriptor must parse.
fn check_descriptor(d: &Descriptor, ptr: &str, digits: u32) -> Result<(), SpecError> {
    let parse = |t: &str, p: String| Scalar::parse(t, digits).map(|_| ()).map_err(|e| err(p, e.to_string()));
    match d {
        Descriptor::Family { name, params, b0 } => {
            if !family_names().contains(name) {
                return Err(err(format!("{ptr}/family"), format!("unknown family {name:?}")));
            }
            if let Some(b0) = b0 {
                parse(b0, format!("{ptr}/b0"))?;
            }
            for (k, v) in params {
                parse(v, format!("{ptr}/params/{k}"))?;
            }
            Ok(())
        }
        Descriptor::Terms { b0, terms } => {
            parse(b0, format!("{ptr}/b0"))?;
            for (i, (a, b)) in terms.iter().enumerate() {
                parse(a, format!("{ptr}/terms/{i}/0"))?;
                parse(b, format!("{ptr}/terms/{i}/1"))?;
            }
            Ok(())
        }
        Descriptor::Sequence { values, .. } => check_texts(values, &format!("{ptr}/sequence"), digits),
        Descriptor::Transform { kind, of } => {
            match kind {
                TransformKind::Extend { a: Some(a), .. } => check_texts(a, &format!("{ptr}/a"), digits)?,
                TransformKind::Equivalence { r: Some(r) } => check_texts(r, &format!("{ptr}/r"), digits)?,
                _ => {}
            }
            check_descriptor(of, &format!("{ptr}/of"), digits)
        }
        Descriptor::Opaque(_) => Err(err(ptr, "opaque sources cannot be rebuilt")),
    }
}

const COMMON: [&str; 6] = ["action", "depth", "digits", "precision_digits", "tol", "format"];

/// Validates a JSON job. Errors carry the JSON pointer of the offending field.
pub fn parse_spec(value: &Value) -> Result<JobSpec, SpecError> {
    let obj = value.as_object().ok_or_else(|| err("", format!("job must be an object, not {}", kind(value))))?;
    let action_v = obj.get("action").ok_or_else(|| err("/action", "missing required field"))?;
    let action_name = choice(action_v, "/action", &Action::NAMES.map(|(n, _)| n))?;
    let action = Action::NAMES.iter().find(|(n, _)| *n == action_name).map(|(_, a)| *a).unwrap_or(Action::Eval);
    for key in obj.keys() {
        if !COMMON.contains(&key.as_str()) && !action.fields().contains(&key.as_str()) {
            return Err(err(format!("/{key}"), format!("unknown field for action {action_name:?}")));
        }
    }
    if obj.contains_key("digits") && obj.contains_key("precision_digits") {
        return Err(err("/precision_digits", "give either digits or precision_digits, not both"));
    }

    let depth = obj.get("depth").map(|v| uint_at(v, "/depth")).transpose()?.unwrap_or(DEFAULT_DEPTH as u64) as usize;
    let digits_key = if obj.contains_key("precision_digits") { "precision_digits" } else { "digits" };
    let digits_ptr = format!("/{digits_key}");
    let digits = match obj.get(digits_key) {
        Some(v) => u32::try_from(uint_at(v, &digits_ptr)?).map_err(|_| err(&digits_ptr, "out of range"))?,
        None => DEFAULT_DIGITS,
    };
    Mode::complex(digits).map_err(|e| err(&digits_ptr, e.to_string()))?;
    let tol = match obj.get("tol") {
        Some(v) => scalar_text(v, "/tol", digits)?,
        None => DEFAULT_TOL.to_string(),
    };
    if !Scalar::parse(&tol, digits).map(|t| t.is_real()).unwrap_or(false) {
        return Err(err("/tol", "must be a real number"));
    }
    let format = match obj.get("format") {
        Some(v) => choice(v, "/format", &["json", "csv", "table"])?.parse().map_err(|e: String| err("/format", e))?,
        None => Format::Json,
    };
    let mode = match obj.get("mode").map(|v| choice(v, "/mode", &["auto", "rational", "complex"])).transpose()? {
        Some(m) if m == "rational" => ModeChoice::Rational,
        Some(m) if m == "complex" => ModeChoice::Complex,
        _ => ModeChoice::Auto,
    };

    let id = obj
        .get("id")
        .map(|v| {
            let name = string_at(v, "/id")?;
            IdentityId::from_str(&name).map_err(|e| err("/id", e.to_string()))
        })
        .transpose()?;
    let params = obj.get("params").map(|v| params_at(v, "/params", digits)).transpose()?.unwrap_or_default();
    if id.is_none() && obj.contains_key("params") {
        return Err(err("/params", "params require an id"));
    }

    let source = match (obj.get("source"), id) {
        (Some(_), Some(_)) => return Err(err("/source", "give either source or id, not both")),
        (Some(s), None) => {
            let d = Descriptor::from_json(s).map_err(|e| match e {
                CfError::Json { pointer, message } => err(format!("/source{pointer}"), message),
                other => err("/source", other.to_string()),
            })?;
            check_descriptor(&d, "/source", digits)?;
            Some(SourceSpec::Descriptor(d))
        }
        (None, Some(id)) => Some(SourceSpec::Identity(id, params.clone())),
        (None, None) => None,
    };
    let terms = |obj: &Map<String, Value>| -> Result<usize, SpecError> {
        Ok(obj.get("terms").map(|v| uint_at(v, "/terms")).transpose()?.unwrap_or(DEFAULT_TERMS as u64) as usize)
    };
    let need_id = || id.ok_or_else(|| err("/id", "missing required field"));
    let override_predicate = match obj.get("override") {
        Some(v) => v.as_bool().ok_or_else(|| err("/override", format!("must be a boolean, not {}", kind(v))))?,
        None => false,
    };

    let spec = match action {
        Action::Eval => ActionSpec::Eval,
        Action::Contract => ActionSpec::Contract {
            kind: obj.get("kind").map(|v| choice(v, "/kind", &["even", "odd"])).transpose()?.unwrap_or_else(|| "even".into()),
            terms: terms(obj)?,
        },
        Action::Extend => {
            let scheme = choice(obj.get("scheme").ok_or_else(|| err("/scheme", "missing required field"))?, "/scheme", &["cor1", "cor2", "cor3", "cor7"])?;
            let a = obj.get("a").map(|v| scalar_list(v, "/a", digits)).transpose()?;
            match (scheme.as_str(), &a) {
                ("cor3", None) => return Err(err("/a", "cor3 needs the a-sequence")),
                (s, Some(_)) if s != "cor3" => return Err(err("/a", "only cor3 takes an a-sequence")),
                _ => {}
            }
            ActionSpec::Extend { scheme, a, terms: terms(obj)? }
        }
        Action::Certify => {
            let criterion = choice(
                obj.get("criterion").ok_or_else(|| err("/criterion", "missing required field"))?,
                "/criterion",
                &["worpitzky", "lange", "wall"],
            )?;
            let get = |k: &str| obj.get(k).map(|v| scalar_text(v, &format!("/{k}"), digits)).transpose();
            let (alpha, rho, lange_a) = (get("alpha")?, get("rho")?, get("lange_a")?);
            if criterion != "lange" {
                if let Some(k) = ["alpha", "rho", "lange_a"].into_iter().find(|k| obj.contains_key(*k)) {
                    return Err(err(format!("/{k}"), "only the lange criterion takes witness parameters"));
                }
            } else if lange_a.is_none() && (alpha.is_none() || rho.is_none()) {
                return Err(err("/lange_a", "lange needs lange_a, or both alpha and rho"));
            }
            ActionSpec::Certify { criterion, alpha, rho, lange_a }
        }
        Action::Verify => ActionSpec::Verify { id: need_id()?, params: params.clone(), override_predicate },
        Action::Sweep => {
            let grid_v = obj.get("grid").ok_or_else(|| err("/grid", "missing required field"))?;
            let gobj = grid_v.as_object().ok_or_else(|| err("/grid", format!("must be an object, not {}", kind(grid_v))))?;
            let mut grid = Vec::new();
            for (k, v) in gobj {
                let values = scalar_list(v, &format!("/grid/{k}"), digits)?;
                if values.is_empty() {
                    return Err(err(format!("/grid/{k}"), "must list at least one value"));
                }
                if params.contains_key(k) {
                    return Err(err(format!("/grid/{k}"), "also fixed in params"));
                }
                grid.push((k.clone(), values));
            }
            ActionSpec::Sweep { id: need_id()?, params: params.clone(), override_predicate, grid }
        }
    };
    if source.is_none() && matches!(action, Action::Eval | Action::Contract | Action::Extend | Action::Certify) {
        return Err(err("/source", "missing required field (or give id and params)"));
    }
    Ok(JobSpec { action, source, spec, depth, digits, tol, mode, format })
}

fn params_json(p: &Params) -> Value {
    Value::Object(p.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

impl JobSpec {
    /// The fully resolved job, defaults included, in the input schema.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("action".into(), json!(self.action.name()));
        match &self.source {
            Some(SourceSpec::Descriptor(d)) => {
                m.insert("source".into(), d.to_json());
            }
            Some(SourceSpec::Identity(id, p)) => {
                m.insert("id".into(), json!(id.name()));
                m.insert("params".into(), params_json(p));
            }
            None => {}
        }
        match &self.spec {
            ActionSpec::Eval => {}
            ActionSpec::Contract { kind, terms } => {
                m.insert("kind".into(), json!(kind));
                m.insert("terms".into(), json!(terms));
            }
            ActionSpec::Extend { scheme, a, terms } => {
                m.insert("scheme".into(), json!(scheme));
                if let Some(a) = a {
                    m.insert("a".into(), json!(a));
                }
                m.insert("terms".into(), json!(terms));
            }
            ActionSpec::Certify { criterion, alpha, rho, lange_a } => {
                m.insert("criterion".into(), json!(criterion));
                for (k, v) in [("alpha", alpha), ("rho", rho), ("lange_a", lange_a)] {
                    if let Some(v) = v {
                        m.insert(k.into(), json!(v));
                    }
                }
            }
            ActionSpec::Verify { id, params, override_predicate } => {
                m.insert("id".into(), json!(id.name()));
                m.insert("params".into(), params_json(params));
                m.insert("override".into(), json!(override_predicate));
            }
            ActionSpec::Sweep { id, params, override_predicate, grid } => {
                m.insert("id".into(), json!(id.name()));
                m.insert("params".into(), params_json(params));
                m.insert("override".into(), json!(override_predicate));
                m.insert("grid".into(), Value::Object(grid.iter().map(|(k, v)| (k.clone(), json!(v))).collect()));
            }
        }
        m.insert("mode".into(), json!(self.mode.name()));
        m.insert("depth".into(), json!(self.depth));
        m.insert("digits".into(), json!(self.digits));
        m.insert("tol".into(), json!(self.tol));
        m.insert("format".into(), json!(self.format.name()));
        Value::Object(m)
    }
}
