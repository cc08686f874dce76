//! Rebuilding coefficient sources from their JSON descriptors.

use crate::error::CfError;
use crate::identities::{build_family, family_mode};
use crate::scalar::{Mode, Scalar};
use crate::source::{
    equivalence_transform, tail, to_unit_denominators, to_unit_numerators, CoefficientSource, Descriptor,
    SchemeKind, Sequence, SequenceKind, TransformKind,
};
use crate::transforms::{bernoulli_cf, collapse_zeros, euler_cf, even_part, extend, odd_part, ExtensionScheme};

fn all_rational(texts: &[String]) -> bool {
    texts.iter().all(|t| Scalar::is_rational_text(t))
}

/// Mode for a descriptor when none is forced: exact iff every leaf admits exact evaluation.
pub fn descriptor_mode(desc: &Descriptor, depth: usize, digits: u32) -> Result<Mode, CfError> {
    let rational = match desc {
        Descriptor::Family { name, params, b0 } => {
            family_mode(name, params, b0.as_deref(), depth, digits)? == Mode::Rational
        }
        Descriptor::Terms { b0, terms } => {
            Scalar::is_rational_text(b0) && terms.iter().all(|(a, b)| Scalar::is_rational_text(a) && Scalar::is_rational_text(b))
        }
        Descriptor::Sequence { values, .. } => all_rational(values),
        Descriptor::Transform { kind, of } => {
            let extra = match kind {
                TransformKind::Extend { a: Some(a), .. } => all_rational(a),
                TransformKind::Equivalence { r: Some(r) } => all_rational(r),
                _ => true,
            };
            extra && descriptor_mode(of, depth, digits)? == Mode::Rational
        }
        Descriptor::Opaque(label) => return Err(CfError::Unsupported(format!("opaque source {label:?}"))),
    };
    if rational {
        Ok(Mode::Rational)
    } else {
        Mode::complex(digits)
    }
}

fn scalars(texts: &[String], mode: Mode) -> Result<Vec<Scalar>, CfError> {
    texts.iter().map(|t| Scalar::parse_in(t, mode)).collect()
}

/// Builds the source a descriptor names, evaluated in `mode`.
pub fn realize(desc: &Descriptor, mode: Mode) -> Result<CoefficientSource, CfError> {
    match desc {
        Descriptor::Family { name, params, b0 } => build_family(name, params, b0.as_deref(), mode),
        Descriptor::Terms { b0, terms } => {
            let b0 = Scalar::parse_in(b0, mode)?;
            let terms = terms
                .iter()
                .map(|(a, b)| Ok((Scalar::parse_in(a, mode)?, Scalar::parse_in(b, mode)?)))
                .collect::<Result<Vec<_>, CfError>>()?;
            Ok(CoefficientSource::from_terms(b0, terms))
        }
        Descriptor::Sequence { kind, values } => {
            let v = scalars(values, mode)?;
            match kind {
                SequenceKind::Bernoulli => bernoulli_cf(&v),
                SequenceKind::Euler => euler_cf(&v),
            }
        }
        Descriptor::Transform { kind, of } => {
            let inner = realize(of, mode)?;
            match kind {
                TransformKind::Even => Ok(even_part(&inner)),
                TransformKind::Odd => odd_part(&inner),
                TransformKind::Collapse => collapse_zeros(&inner),
                TransformKind::UnitNumerators => Ok(to_unit_numerators(&inner)),
                TransformKind::UnitDenominators => Ok(to_unit_denominators(&inner)),
                TransformKind::Tail { m } => tail(&inner, *m),
                TransformKind::Equivalence { r: Some(r) } => {
                    let mut r = scalars(r, mode)?;
                    // r(0) = 1 is implicit in the listed form
                    r.insert(0, Scalar::one(mode));
                    Ok(equivalence_transform(&inner, &Sequence::from_vec(r)))
                }
                TransformKind::Equivalence { r: None } => {
                    Err(CfError::Unsupported("equivalence transform without listed factors".into()))
                }
                TransformKind::Extend { scheme, a } => {
                    let scheme = match (scheme, a) {
                        (SchemeKind::Cor1, _) => ExtensionScheme::Cor1,
                        (SchemeKind::Cor2, _) => ExtensionScheme::Cor2,
                        (SchemeKind::Cor7, _) => ExtensionScheme::Cor7,
                        (SchemeKind::Cor3, Some(a)) => ExtensionScheme::Cor3 { a: Sequence::from_vec(scalars(a, mode)?) },
                        (SchemeKind::Cor3, None) => {
                            return Err(CfError::Unsupported("cor3 extension without a listed a-sequence".into()))
                        }
                    };
                    extend(&inner, &scheme)
                }
            }
        }
        Descriptor::Opaque(label) => Err(CfError::Unsupported(format!("opaque source {label:?}"))),
    }
}
