//! Canonical numerators and denominators via the three-term recurrence
//! `A_N = b_N A_{N-1} + a_N A_{N-2}` (same for `B_N`).

use serde::Serialize;

use crate::error::CfError;
use crate::scalar::{Mode, Scalar};
use crate::source::CoefficientSource;

/// A point `A : B` of the extended complex plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectiveValue {
    pub num: Scalar,
    pub den: Scalar,
}

impl ProjectiveValue {
    pub fn new(num: Scalar, den: Scalar) -> Result<Self, CfError> {
        num.check_mode(&den)?;
        if num.is_zero() && den.is_zero() {
            return Err(CfError::Domain("0 : 0 is not a projective point".into()));
        }
        Ok(ProjectiveValue { num, den })
    }

    pub fn finite(value: Scalar) -> Self {
        let den = Scalar::one(value.mode());
        ProjectiveValue { num: value, den }
    }

    pub fn is_infinite(&self) -> bool {
        self.den.is_zero()
    }

    /// `A / B`, or `None` at infinity.
    pub fn value(&self) -> Option<Scalar> {
        (!self.is_infinite()).then(|| &self.num / &self.den)
    }

    /// Same point, i.e. `A B' = A' B`; exact in rational mode.
    pub fn same_point(&self, other: &ProjectiveValue) -> bool {
        (&self.num * &other.den).approx_eq(&(&other.num * &self.den))
    }
}

/// Recurrence state at index `N`.
///
/// In complex-float mode the four stored values may carry a common factor
/// `2^renorm_log`; ratios are unaffected.
#[derive(Clone, Debug)]
pub struct Convergent {
    pub n: usize,
    pub a: Scalar,
    pub a_prev: Scalar,
    pub b: Scalar,
    pub b_prev: Scalar,
    pub renorm_log: i64,
}

impl Convergent {
    pub fn value(&self) -> ProjectiveValue {
        ProjectiveValue { num: self.a.clone(), den: self.b.clone() }
    }

    /// `A_N / B_N`, `None` when `B_N = 0`.
    pub fn approximant(&self) -> Option<Scalar> {
        self.value().value()
    }
}

/// Iterator over `Convergent` states `N = 0, 1, ..., n_max`.
pub struct Convergents<'a> {
    src: &'a CoefficientSource,
    n_max: usize,
    state: Option<Convergent>,
    renormalize: bool,
    window_bits: i64,
    done: bool,
}

impl<'a> Convergents<'a> {
    pub fn new(src: &'a CoefficientSource, n_max: usize) -> Self {
        let window_bits = match src.mode() {
            Mode::Rational => 0,
            Mode::Complex { digits } => ((digits as f64 / 2.0) * std::f64::consts::LOG2_10).floor() as i64,
        };
        Convergents {
            src,
            n_max,
            state: None,
            renormalize: matches!(src.mode(), Mode::Complex { .. }),
            window_bits,
            done: false,
        }
    }

    /// Disables the magnitude-window rescaling, so the stored values are the
    /// true canonical numerators and denominators.
    pub fn without_renormalization(mut self) -> Self {
        self.renormalize = false;
        self
    }

    fn rescale(&self, c: &mut Convergent) {
        let ea = c.a.binary_exponent();
        let eb = c.b.binary_exponent();
        let Some(e) = ea.max(eb) else { return };
        if e.abs() <= self.window_bits {
            return;
        }
        for v in [&mut c.a, &mut c.a_prev, &mut c.b, &mut c.b_prev] {
            *v = v.scale_pow2(-e);
        }
        c.renorm_log -= e;
    }

    fn step(&mut self) -> Result<Convergent, CfError> {
        let next = match &self.state {
            None => {
                let mode = self.src.mode();
                Convergent {
                    n: 0,
                    a: self.src.b0().clone(),
                    a_prev: Scalar::one(mode),
                    b: Scalar::one(mode),
                    b_prev: Scalar::zero(mode),
                    renorm_log: 0,
                }
            }
            Some(c) => {
                let n = c.n + 1;
                let (an, bn) = self.src.term(n)?;
                let mut next = Convergent {
                    n,
                    a: &(&bn * &c.a) + &(&an * &c.a_prev),
                    a_prev: c.a.clone(),
                    b: &(&bn * &c.b) + &(&an * &c.b_prev),
                    b_prev: c.b.clone(),
                    renorm_log: c.renorm_log,
                };
                if next.a.is_zero() && next.b.is_zero() {
                    return Err(CfError::Degenerate { index: n });
                }
                if self.renormalize {
                    self.rescale(&mut next);
                }
                next
            }
        };
        Ok(next)
    }
}

impl Iterator for Convergents<'_> {
    type Item = Result<Convergent, CfError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.state.as_ref().is_some_and(|c| c.n >= self.n_max) {
            self.done = true;
            return None;
        }
        match self.step() {
            Ok(c) => {
                self.state = Some(c.clone());
                Some(Ok(c))
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// All states for `N = 0..=n_max`.
pub fn convergents(src: &CoefficientSource, n_max: usize) -> Result<Vec<Convergent>, CfError> {
    if let Some(len) = src.len() {
        if n_max > len {
            return Err(CfError::SourceExhausted { index: n_max, len });
        }
    }
    Convergents::new(src, n_max).collect()
}

/// State at index `n` only.
pub fn convergent_at(src: &CoefficientSource, n: usize) -> Result<Convergent, CfError> {
    let mut last = None;
    for c in Convergents::new(src, n) {
        last = Some(c?);
    }
    Ok(last.expect("N = 0 is always produced"))
}

/// `(A_N, B_N)` as a projective point.
pub fn value_at(src: &CoefficientSource, n: usize) -> Result<ProjectiveValue, CfError> {
    Ok(convergent_at(src, n)?.value())
}

/// Approximant values `f_0..=f_{n_max}`, `None` where `B_N = 0`.
pub fn approximants(src: &CoefficientSource, n_max: usize) -> Result<Vec<Option<Scalar>>, CfError> {
    Convergents::new(src, n_max).map(|c| c.map(|c| c.approximant())).collect()
}

fn sign_product(src: &CoefficientSource, n: usize) -> Result<Scalar, CfError> {
    let mut p = Scalar::one(src.mode());
    for i in 1..=n {
        p = &p * &src.term(i)?.0;
    }
    Ok(if n.is_multiple_of(2) { -p } else { p })
}

/// The two determinant residuals at `N >= 1`:
///
/// `A_N B_{N-1} - A_{N-1} B_N - (-1)^(N-1) prod a_i` and
/// `A_{N+1} B_{N-1} - A_{N-1} B_{N+1} - (-1)^(N-1) b_{N+1} prod a_i`.
///
/// At the last term of a finite source, `(a_{N+1}, b_{N+1}) = (0, 1)`.
pub fn determinant_residual(src: &CoefficientSource, n: usize) -> Result<(Scalar, Scalar), CfError> {
    if n == 0 {
        return Err(CfError::Domain("determinant identities start at N = 1".into()));
    }
    if let Some(len) = src.len() {
        if n > len {
            return Err(CfError::SourceExhausted { index: n, len });
        }
    }
    let states: Vec<Convergent> = Convergents::new(src, n).without_renormalization().collect::<Result<_, _>>()?;
    let c = &states[n];
    let signed = sign_product(src, n)?;
    let first = &(&(&c.a * &c.b_prev) - &(&c.a_prev * &c.b)) - &signed;
    // a finite source ending at N continues as the neutral term 0/1
    let (a_next, b_next) = if src.len() == Some(n) {
        (Scalar::zero(src.mode()), Scalar::one(src.mode()))
    } else {
        src.term(n + 1)?
    };
    let next_a = &(&b_next * &c.a) + &(&a_next * &c.a_prev);
    let next_b = &(&b_next * &c.b) + &(&a_next * &c.b_prev);
    let second = &(&(&next_a * &c.b_prev) - &(&c.a_prev * &next_b)) - &(&b_next * &signed);
    Ok((first, second))
}

/// `f_N - f_{N-1}` computed as `(-1)^(N-1) prod a_i / (B_N B_{N-1})`.
pub fn approximant_gap(src: &CoefficientSource, n: usize) -> Result<Scalar, CfError> {
    if n == 0 {
        return Err(CfError::Domain("gap needs N >= 1".into()));
    }
    let c = convergent_at(src, n)?;
    for (b, idx) in [(&c.b, n), (&c.b_prev, n - 1)] {
        if b.is_zero() {
            return Err(CfError::ZeroDenominator { index: idx });
        }
    }
    // the stored B values share the factor 2^renorm_log
    let scale = Scalar::one(src.mode()).scale_pow2(2 * c.renorm_log);
    let num = &sign_product(src, n)? * &scale;
    num.checked_div(&(&c.b * &c.b_prev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::Descriptor;

    fn q(s: &str) -> Scalar {
        Scalar::parse(s, 50).unwrap()
    }

    fn constant(a: &str, b: &str, mode: Mode) -> CoefficientSource {
        let a = Scalar::parse_in(a, mode).unwrap();
        let b = Scalar::parse_in(b, mode).unwrap();
        CoefficientSource::new(Scalar::zero(mode), None, Descriptor::Opaque("constant".into()), move |_| {
            Ok((a.clone(), b.clone()))
        })
    }

    #[test]
    fn golden_approximants_are_fibonacci_ratios() {
        let g = constant("1", "1", Mode::Rational);
        let got: Vec<_> = approximants(&g, 5).unwrap().into_iter().map(|v| v.unwrap()).collect();
        let want: Vec<_> = ["0", "1", "1/2", "2/3", "3/5", "5/8"].iter().map(|s| q(s)).collect();
        assert_eq!(got, want);
        let v = value_at(&g, 4).unwrap();
        assert_eq!((v.num, v.den), (q("3"), q("5")));
    }

    #[test]
    fn seed_values() {
        let s = CoefficientSource::from_terms(q("7"), vec![]);
        let v = value_at(&s, 0).unwrap();
        assert_eq!((v.num, v.den), (q("7"), q("1")));
        assert!(convergents(&s, 1).is_err());
    }

    #[test]
    fn zero_denominators_give_points_at_infinity() {
        // 1/(0 + 1/(1 + ...)): B_1 = 0
        let s = CoefficientSource::from_terms(q("0"), vec![(q("1"), q("0")), (q("1"), q("1")), (q("1"), q("1"))]);
        let vals = approximants(&s, 3).unwrap();
        assert!(vals[1].is_none());
        assert_eq!(vals[2], Some(q("1")));
    }

    #[test]
    fn determinant_identities_hold_exactly() {
        let g = constant("1", "1", Mode::Rational);
        for n in 1..=10 {
            let (r1, r2) = determinant_residual(&g, n).unwrap();
            assert!(r1.is_zero() && r2.is_zero(), "N = {n}");
        }
        let s = CoefficientSource::from_terms(
            q("2"),
            vec![(q("3"), q("-1")), (q("-2/3"), q("5")), (q("7"), q("1/2")), (q("1"), q("1")), (q("4"), q("0"))],
        );
        for n in 1..=5 {
            let (r1, r2) = determinant_residual(&s, n).unwrap();
            assert!(r1.is_zero() && r2.is_zero(), "N = {n}");
        }
    }

    #[test]
    fn gaps_match_direct_subtraction() {
        let g = constant("1", "1", Mode::Rational);
        assert_eq!(approximant_gap(&g, 2).unwrap(), q("-1/2"));
        assert_eq!(approximant_gap(&g, 1).unwrap(), q("1"));
        let s = CoefficientSource::from_terms(q("0"), vec![(q("1"), q("0")), (q("1"), q("1"))]);
        assert_eq!(approximant_gap(&s, 2).unwrap_err(), CfError::ZeroDenominator { index: 1 });
    }

    #[test]
    fn renormalization_preserves_ratios() {
        let mode = Mode::Complex { digits: 30 };
        let s = constant("1e9", "3.5e8", mode);
        let plain: Vec<_> = Convergents::new(&s, 60).without_renormalization().map(|c| c.unwrap()).collect();
        let scaled: Vec<_> = Convergents::new(&s, 60).map(|c| c.unwrap()).collect();
        assert!(scaled.last().unwrap().renorm_log != 0);
        for (p, r) in plain.iter().zip(&scaled) {
            assert_eq!(p.approximant(), r.approximant(), "N = {}", p.n);
        }
        assert!(scaled[4].renorm_log != 0);
        let g = approximant_gap(&s, 4).unwrap();
        let direct = &plain[4].approximant().unwrap() - &plain[3].approximant().unwrap();
        assert!((&g - &direct).log10_abs() < -25.0);
    }

    #[test]
    fn degenerate_pair_is_an_error() {
        let s = CoefficientSource::from_terms(q("0"), vec![(q("0"), q("0"))]);
        assert_eq!(convergents(&s, 1).unwrap_err(), CfError::Degenerate { index: 1 });
    }
}
