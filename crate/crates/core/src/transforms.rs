//! Even and odd contractions, the extension schemes that invert them,
//! the Bernoulli and Euler sequence transforms, and zero-denominator collapse.
//!
//! Contractions and extensions are lazy: term `k` is computed from the
//! underlying terms only when requested, and preconditions are checked at
//! that point.

use crate::error::CfError;
use crate::scalar::Scalar;
use crate::source::{CoefficientSource, Descriptor, SchemeKind, Sequence, SequenceKind, TransformKind};

/// How to build an extension of a target continued fraction.
#[derive(Clone, Debug)]
pub enum ExtensionScheme {
    /// Even part recovers `d0 + K(c_n / d_n)`; uses `c_{L+1} = 0` past a finite end.
    Cor1,
    /// Even part recovers `d0 + K(c_n / d_n)`, with `-1/1` inserted between terms.
    Cor2,
    /// Extension with `b_{2k} = 1`, `b_{2k+1} = 0`. The target must be
    /// `b0 + a1/(b1 + a2) - a2 a3/(a4 + a3) - a4 a5/(a6 + a5) - ...` for the given `a`.
    Cor3 { a: Sequence },
    /// Odd part recovers `c1 + K(c_n c_{n+1} / 1)`.
    Cor7,
}

impl ExtensionScheme {
    pub fn kind(&self) -> SchemeKind {
        match self {
            ExtensionScheme::Cor1 => SchemeKind::Cor1,
            ExtensionScheme::Cor2 => SchemeKind::Cor2,
            ExtensionScheme::Cor3 { .. } => SchemeKind::Cor3,
            ExtensionScheme::Cor7 => SchemeKind::Cor7,
        }
    }
}

fn nonzero(x: Scalar, index: usize) -> Result<Scalar, CfError> {
    if x.is_zero() {
        Err(CfError::ContractionUndefined { index })
    } else {
        Ok(x)
    }
}

fn wrap(kind: TransformKind, of: &CoefficientSource) -> Descriptor {
    Descriptor::Transform { kind, of: Box::new(of.descriptor().clone()) }
}

/// The canonical contraction with `C_k = A_{2k}`, `D_k = B_{2k}`.
pub fn even_part(src: &CoefficientSource) -> CoefficientSource {
    let s = src.clone();
    CoefficientSource::new(src.b0().clone(), src.len().map(|l| l / 2), wrap(TransformKind::Even, src), move |k| {
        let (a2k, b2k) = s.term(2 * k)?;
        let b2k = nonzero(b2k, 2 * k)?;
        let (a2k1, b2k1) = s.term(2 * k - 1)?;
        if k == 1 {
            return Ok((&b2k * &a2k1, &(&b2k * &b2k1) + &a2k));
        }
        let (a2k2, b2k2) = s.term(2 * k - 2)?;
        let ratio = &b2k / &nonzero(b2k2, 2 * k - 2)?;
        let num = -(&(&a2k2 * &a2k1) * &ratio);
        let den = &(&a2k + &(&b2k1 * &b2k)) + &(&a2k1 * &ratio);
        Ok((num, den))
    })
}

/// The canonical contraction with `C_k = A_{2k+1}`, `D_k = B_{2k+1}` and
/// constant term `(b0 b1 + a1) / b1`.
pub fn odd_part(src: &CoefficientSource) -> Result<CoefficientSource, CfError> {
    let (a1, b1) = src.term(1)?;
    let b1 = nonzero(b1, 1)?;
    let b0 = &(&(src.b0() * &b1) + &a1) / &b1;
    let s = src.clone();
    let len = src.len().map(|l| l.saturating_sub(1) / 2);
    Ok(CoefficientSource::new(b0, len, wrap(TransformKind::Odd, src), move |k| {
        let (a_top, b_top) = s.term(2 * k + 1)?;
        let b_top = nonzero(b_top, 2 * k + 1)?;
        let (a_mid, b_mid) = s.term(2 * k)?;
        let (a_low, b_low) = s.term(2 * k - 1)?;
        if k == 1 {
            let num = -(&(&(&a_low * &a_mid) * &b_top) / &b_low);
            let den = &(&b_low * &(&a_top + &(&b_mid * &b_top))) + &(&a_mid * &b_top);
            return Ok((num, den));
        }
        let ratio = &b_top / &b_low;
        let mut num = -(&(&a_low * &a_mid) * &ratio);
        if k == 2 {
            num = &num * &b1;
        }
        let den = &(&a_top + &(&b_mid * &b_top)) + &(&a_mid * &ratio);
        Ok((num, den))
    }))
}

/// Builds the extension of `target` for `scheme`. The matching contraction
/// (even part for cor1/cor2/cor3, odd part for cor7) recovers `target`.
pub fn extend(target: &CoefficientSource, scheme: &ExtensionScheme) -> Result<CoefficientSource, CfError> {
    let t = target.clone();
    let mode = target.mode();
    let one = Scalar::one(mode);
    let kind = TransformKind::Extend {
        scheme: scheme.kind(),
        a: match scheme {
            ExtensionScheme::Cor3 { a } => a.len().and_then(|l| a.take(l).ok()).map(|v| v.iter().map(ToString::to_string).collect()),
            _ => None,
        },
    };
    let descriptor = wrap(kind, target);
    let tlen = target.len();
    let ext = match scheme {
        ExtensionScheme::Cor1 => {
            // c_{L+1} = 0 closes a finite target
            let c = move |j: usize| -> Result<Scalar, CfError> {
                match t.len() {
                    Some(l) if j > l => Ok(Scalar::zero(mode)),
                    _ => Ok(t.term(j)?.0),
                }
            };
            let t2 = target.clone();
            CoefficientSource::new(target.b0().clone(), tlen.map(|l| 2 * l), descriptor, move |n| {
                if n == 1 {
                    let (c1, d1) = t2.term(1)?;
                    return Ok((c1, &d1 - &c(2)?));
                }
                let k = n / 2;
                if n % 2 == 0 {
                    Ok((c(k + 1)?, one.clone()))
                } else {
                    let d = t2.term(k + 1)?.1;
                    Ok((-&one, &(&d - &c(k + 2)?) + &one))
                }
            })
        }
        ExtensionScheme::Cor2 => CoefficientSource::new(target.b0().clone(), tlen.map(|l| 2 * l), descriptor, move |n| {
            if n == 1 {
                let (c1, d1) = t.term(1)?;
                return Ok((c1, &d1 + &one));
            }
            if n % 2 == 0 {
                return Ok((-&one, one.clone()));
            }
            let (c, d) = t.term(n / 2 + 1)?;
            let b = &(&d - &c) + &one;
            Ok((c, b))
        }),
        ExtensionScheme::Cor3 { a } => {
            let need = tlen.map(|l| 2 * l);
            let ext_len = match (need, a.len()) {
                (Some(n), Some(have)) if have < n => {
                    return Err(CfError::ShapeMismatch(format!("cor3 needs {n} a-values, got {have}")));
                }
                (Some(n), _) => Some(n),
                (None, have) => have.map(|h| h - h % 2),
            };
            let a = a.clone();
            let zero = Scalar::zero(mode);
            CoefficientSource::new(target.b0().clone(), ext_len, descriptor, move |n| {
                let an = a.get(n)?;
                if !an.mode().same_kind(mode) {
                    return Err(CfError::ModeMismatch { context: format!("cor3 a_{n} does not match the target mode") });
                }
                let k = n.div_ceil(2);
                let (tk_a, tk_b) = t.term(k)?;
                if k == 1 {
                    if !tk_a.approx_eq(&a.get(1)?) {
                        return Err(CfError::ShapeMismatch("target a_1 differs from the given a_1".into()));
                    }
                    if n == 1 {
                        return Ok((an, &tk_b - &a.get(2)?));
                    }
                    return Ok((an, one.clone()));
                }
                let (lo, mid, hi) = (a.get(2 * k - 2)?, a.get(2 * k - 1)?, a.get(2 * k)?);
                if !tk_a.approx_eq(&-(&lo * &mid)) || !tk_b.approx_eq(&(&hi + &mid)) {
                    return Err(CfError::ShapeMismatch(format!("target term {k} is not of the form -a a'/(a'' + a')")));
                }
                Ok((an, if n % 2 == 0 { one.clone() } else { zero.clone() }))
            })
        }
        ExtensionScheme::Cor7 => {
            let tc = target.clone();
            let c = Sequence::recurrence(1, target.b0().clone(), tlen.map(|l| l + 1), move |j, prev| {
                let (a, b) = tc.term(j - 1)?;
                if !b.is_one() {
                    return Err(CfError::ShapeMismatch(format!("cor7 target needs b_{} = 1", j - 1)));
                }
                if prev.is_zero() {
                    return Err(CfError::ShapeMismatch(format!("c_{} = 0 leaves c_{j} undetermined", j - 1)));
                }
                a.checked_div(prev)
            });
            CoefficientSource::new(Scalar::zero(mode), tlen.map(|l| 2 * l + 1), descriptor, move |n| {
                if n == 1 {
                    return Ok((c.get(1)?, one.clone()));
                }
                let ci = c.get(n / 2 + 1)?;
                Ok((if n % 2 == 0 { -ci } else { ci }, one.clone()))
            })
        }
    };
    Ok(ext)
}

fn check_modes(values: &[Scalar]) -> Result<(), CfError> {
    if let Some(first) = values.first() {
        for v in values {
            first.check_mode(v)?;
        }
    }
    Ok(())
}

fn texts(values: &[Scalar]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

/// The continued fraction whose `N`-th approximant is `K_N`.
pub fn bernoulli_cf(k: &[Scalar]) -> Result<CoefficientSource, CfError> {
    if k.is_empty() {
        return Err(CfError::Domain("Bernoulli transform needs at least K_0".into()));
    }
    check_modes(k)?;
    for i in 1..k.len() {
        if k[i] == k[i - 1] {
            return Err(CfError::EqualConsecutive { index: i });
        }
    }
    let ks = k.to_vec();
    let one = Scalar::one(k[0].mode());
    let descriptor = Descriptor::Sequence { kind: SequenceKind::Bernoulli, values: texts(k) };
    Ok(CoefficientSource::new(k[0].clone(), Some(k.len() - 1), descriptor, move |n| {
        let d = |i: usize, j: usize| &ks[i] - &ks[j];
        Ok(match n {
            1 => (d(1, 0), one.clone()),
            2 => (d(1, 2), d(2, 0)),
            _ => (&d(n - 2, n - 3) * &d(n - 1, n), d(n, n - 2)),
        })
    }))
}

/// Euler's continued fraction whose `N`-th approximant is `a_0 + ... + a_N`.
pub fn euler_cf(a: &[Scalar]) -> Result<CoefficientSource, CfError> {
    if a.is_empty() {
        return Err(CfError::Domain("Euler transform needs at least a_0".into()));
    }
    check_modes(a)?;
    if let Some(i) = (1..a.len()).find(|&i| a[i].is_zero()) {
        return Err(CfError::ZeroTerm { index: i });
    }
    let xs = a.to_vec();
    let one = Scalar::one(a[0].mode());
    let descriptor = Descriptor::Sequence { kind: SequenceKind::Euler, values: texts(a) };
    Ok(CoefficientSource::new(a[0].clone(), Some(a.len() - 1), descriptor, move |n| {
        Ok(match n {
            1 => (xs[1].clone(), one.clone()),
            2 => (-&xs[2], &xs[2] + &xs[1]),
            _ => (-(&xs[n - 2] * &xs[n]), &xs[n] + &xs[n - 1]),
        })
    }))
}

/// Removes interior zero denominators from a finite unit-numerator source by
/// repeatedly merging `1/(x + 1/(0 + 1/(y + ...)))` into `1/((x + y) + ...)`.
/// A zero at index 1 merges into `b0`.
pub fn collapse_zeros(src: &CoefficientSource) -> Result<CoefficientSource, CfError> {
    let len = src.len().ok_or_else(|| CfError::Unsupported("collapse_zeros needs a finite source".into()))?;
    let terms = src.terms(len)?;
    if let Some(i) = terms.iter().position(|(a, _)| !a.is_one()) {
        return Err(CfError::NotUnitNumerators { index: i + 1 });
    }
    let mut out: Vec<Scalar> = vec![src.b0().clone()];
    let mut i = 0;
    while i < len {
        let b = &terms[i].1;
        if b.is_zero() {
            if i + 1 == len {
                return Err(CfError::TrailingZero { index: i + 1 });
            }
            let prev = out.pop().expect("b0 is always present");
            out.push(&prev + &terms[i + 1].1);
            i += 2;
        } else {
            out.push(b.clone());
            i += 1;
        }
    }
    let one = Scalar::one(src.mode());
    let b0 = out.remove(0);
    let collapsed = CoefficientSource::from_terms(b0, out.into_iter().map(|b| (one.clone(), b)).collect());
    Ok(collapsed.with_descriptor(wrap(TransformKind::Collapse, src)))
}
