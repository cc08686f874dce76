//! Partial sums of `2F1(a, b; c; 1)` and their growth against Hill's asymptotic forms.

use num_complex::Complex64;

use crate::error::CfError;
use crate::scalar::{Mode, Scalar};

const HILL_DIGITS: u32 = 30;

/// `sum_{i=0}^{k} (a)_i (b)_i / ((c)_i i!)`, by incremental term ratios.
pub fn hyp2f1_partial_sum(a: &Scalar, b: &Scalar, c: &Scalar, k: usize) -> Result<Scalar, CfError> {
    a.check_mode(b)?;
    a.check_mode(c)?;
    let mode = a.mode();
    let mut term = Scalar::one(mode);
    let mut sum = term.clone();
    for i in 1..=k {
        let shift = Scalar::from_i64(i as i64 - 1, mode);
        let cs = c + &shift;
        if cs.is_zero() {
            return Err(CfError::Domain(format!("pole: c + {} = 0", i - 1)));
        }
        let num = &(a + &shift) * &(b + &shift);
        let den = &cs * &Scalar::from_i64(i as i64, mode);
        term = &(&term * &num) / &den;
        sum = &sum + &term;
    }
    Ok(sum)
}

/// `m (b/d)_k / (a/d + 1)_k`, the shifted-factorial ratio behind the
/// closed-form even approximants of the `a, b, d` family.
pub fn pochhammer_ratio(m: &Scalar, b_over_d: &Scalar, a_over_d_plus_1: &Scalar, k: usize) -> Result<Scalar, CfError> {
    let mode = m.mode();
    let mut r = m.clone();
    for j in 0..k {
        let s = Scalar::from_i64(j as i64, mode);
        r = (&r * &(b_over_d + &s)).checked_div(&(a_over_d_plus_1 + &s))?;
    }
    Ok(r)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex gamma function (Lanczos, g = 7), about 15 significant digits.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * z).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// `s_k` divided by its asymptotic form: `Γ(c) k^(a+b-c) / (Γ(a) Γ(b))` when
/// `Re(c - a - b) < 0`, and `Γ(c) log k / (Γ(a) Γ(b))` when `c = a + b`.
pub fn hill_ratio(a: &Scalar, b: &Scalar, c: &Scalar, k: usize) -> Result<Complex64, CfError> {
    if k < 2 {
        return Err(CfError::Domain("hill_ratio needs k >= 2".into()));
    }
    let excess = &(c - a) - b;
    let log_case = excess.is_zero();
    if !log_case && excess.to_c64().re >= 0.0 {
        return Err(CfError::Regime(format!("Re(c - a - b) = {} is not negative and c != a + b", excess.to_c64().re)));
    }
    // the ratio is reported in f64, so the sum needs no exact arithmetic
    let float = |x: &Scalar| x.to_mode(Mode::Complex { digits: HILL_DIGITS });
    let s = hyp2f1_partial_sum(&float(a)?, &float(b)?, &float(c)?, k)?.to_c64();
    let (ac, bc, cc) = (a.to_c64(), b.to_c64(), c.to_c64());
    let kf = k as f64;
    let scale = gamma(cc) / (gamma(ac) * gamma(bc));
    let growth = if log_case { Complex64::new(kf.ln(), 0.0) } else { Complex64::new(kf, 0.0).powc(ac + bc - cc) };
    Ok(s / (scale * growth))
}
