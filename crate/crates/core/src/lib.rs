pub mod convergence;
pub mod convergent;
pub mod error;
pub mod identities;
pub mod realize;
pub mod scalar;
pub mod source;
pub mod transforms;

pub use convergent::{
    approximant_gap, approximants, convergent_at, convergents, determinant_residual, value_at, Convergent,
    Convergents, ProjectiveValue,
};
pub use error::CfError;
pub use realize::{descriptor_mode, realize};
pub use scalar::{Mode, Scalar, MIN_DIGITS};
pub use source::{
    equivalence_transform, tail, to_unit_denominators, to_unit_numerators, CoefficientSource, Descriptor,
    SchemeKind, Sequence, SequenceKind, TransformKind,
};
pub use transforms::{bernoulli_cf, collapse_zeros, euler_cf, even_part, extend, odd_part, ExtensionScheme};
pub use convergence::{
    empirical_limit, empirical_limit_with, lange_affine_tail, lange_check, lange_find_params, lange_sandwich,
    lange_scan, wall_empirical, worpitzky_check, Acceleration, AffineTail, CertResult, ConvergenceCertificate, Criterion,
    DecayClass, LangeParams, LimitDiagnostics, Refusal, Witness,
};
pub use identities::hill::{gamma, hill_ratio, hyp2f1_partial_sum, pochhammer_ratio};
pub use identities::verify::{entry13_footnote, verify, Verdict, VerificationReport, VerifyOptions};
pub use identities::{
    auto_mode, build_family, family_names, cf_source, cf_source_with, closed_form, extension_scheme, family_mode, params,
    proof_extension, Contraction, IdentityId, Params, ProofExtension, Target,
};
