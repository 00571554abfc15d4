//! Complex scalars in two computation modes.
//!
//! `Scalar::Exact` is a Gaussian rational (both components `BigRational`);
//! arithmetic on it is exact and every equality decision is honest.
//! `Scalar::Float` wraps a `Complex64`.  Mixed operations promote to float,
//! so exactness degrades only when an operation genuinely leaves the Gaussian
//! rationals (irrational roots, logs of constants, Gamma values, ...).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};

/// Requested computation mode for constructors that take plain numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

/// A complex number, exact or floating.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact { re: BigRational, im: BigRational },
    Float(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Scalar::Exact {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit as an exact scalar.
    pub fn i() -> Self {
        Scalar::Exact {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// Exact rational `num/den`.  Panics if `den == 0` (literal constructor).
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "from_ratio: zero denominator");
        Scalar::Exact {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// Exact Gaussian rational `re_n/re_d + (im_n/im_d)i`.
    pub fn from_gaussian(re_n: i64, re_d: i64, im_n: i64, im_d: i64) -> Self {
        assert!(re_d != 0 && im_d != 0, "from_gaussian: zero denominator");
        Scalar::Exact {
            re: BigRational::new(BigInt::from(re_n), BigInt::from(re_d)),
            im: BigRational::new(BigInt::from(im_n), BigInt::from(im_d)),
        }
    }

    pub fn from_rationals(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact { re, im }
    }

    pub fn from_f64(x: f64) -> Self {
        Scalar::Float(Complex64::new(x, 0.0))
    }

    pub fn from_c64(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    /// Integer constructor honouring the requested mode.
    pub fn int_in_mode(n: i64, mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::from_int(n),
            Mode::Float => Scalar::from_f64(n as f64),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact { .. })
    }

    /// True for the exact zero (float zero must be exactly `0.0 + 0.0i`).
    /// Arithmetic never drops small float coefficients; tolerance decisions
    /// belong to the classification layer (`is_zero_tol`).
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => re.is_zero() && im.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    /// Zero test with tolerance: exact scalars are compared exactly, floats
    /// by modulus.
    pub fn is_zero_tol(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact { .. } => self.is_zero(),
            Scalar::Float(z) => z.norm() <= tol,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact { re, im } => re.is_one() && im.is_zero(),
            Scalar::Float(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact { re, im } => Complex64::new(
                re.to_f64().unwrap_or(f64::NAN),
                im.to_f64().unwrap_or(f64::NAN),
            ),
            Scalar::Float(z) => *z,
        }
    }

    /// Demote to the float representation.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_c64())
    }

    pub fn re_f64(&self) -> f64 {
        self.to_c64().re
    }

    pub fn im_f64(&self) -> f64 {
        self.to_c64().im
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact {
                re: re.clone(),
                im: -im.clone(),
            },
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    /// |z|² in the same mode as z.
    pub fn norm_sqr(&self) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact {
                re: re * re + im * im,
                im: BigRational::zero(),
            },
            Scalar::Float(z) => Scalar::Float(Complex64::new(z.norm_sqr(), 0.0)),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            Scalar::Exact { re, im } => {
                let n = re * re + im * im;
                Ok(Scalar::Exact {
                    re: re / &n,
                    im: -im / &n,
                })
            }
            Scalar::Float(z) => Ok(Scalar::Float(z.inv())),
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(self * &rhs.inv()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn powi(&self, n: i32) -> Result<Scalar> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Scale by an exact rational without leaving exact mode.
    pub fn mul_rat(&self, r: &BigRational) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact {
                re: re * r,
                im: im * r,
            },
            Scalar::Float(z) => Scalar::Float(z * r.to_f64().unwrap_or(f64::NAN)),
        }
    }

    pub fn mul_int(&self, n: i64) -> Scalar {
        self.mul_rat(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Equality with tolerance: exact pairs compare exactly, anything float
    /// compares by modulus of the difference.
    pub fn eq_tol(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact { .. }, Scalar::Exact { .. }) => self == other,
            _ => (self.to_c64() - other.to_c64()).norm() <= tol,
        }
    }

    /// Principal square root.  Exact input: returns the exact root whenever
    /// the result is again a Gaussian rational, otherwise demotes to float.
    /// Float input exactly on the negative real axis is reported as
    /// `BranchAmbiguity` rather than silently resolved.
    pub fn sqrt(&self) -> Result<Scalar> {
        match self {
            Scalar::Exact { re, im } => {
                if let Some(root) = exact_sqrt(re, im) {
                    return Ok(root);
                }
                // No Gaussian-rational root: fall through to the float value,
                // whose principal branch is well defined for exact data even
                // on the cut (the sign convention im >= 0 is reproducible).
                let z = self.to_c64();
                if z.im == 0.0 && z.re < 0.0 {
                    return Ok(Scalar::Float(Complex64::new(0.0, (-z.re).sqrt())));
                }
                Ok(Scalar::Float(z.sqrt()))
            }
            Scalar::Float(z) => {
                if z.im == 0.0 && z.re < 0.0 {
                    return Err(Error::BranchAmbiguity { re: z.re, im: z.im });
                }
                Ok(Scalar::Float(z.sqrt()))
            }
        }
    }

    /// Principal k-th root with the same exactness policy as `sqrt`: if the
    /// principal root is a Gaussian rational we return it exactly (found by
    /// float evaluation, rational reconstruction and exact verification).
    pub fn nth_root(&self, k: u32) -> Result<Scalar> {
        if k == 0 {
            return Err(Error::InvalidInput("0-th root".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(match self {
                Scalar::Exact { .. } => Scalar::zero(),
                Scalar::Float(_) => Scalar::from_c64(Complex64::new(0.0, 0.0)),
            });
        }
        match self {
            Scalar::Exact { re, im } => {
                // Fast exact path: positive rational base.
                if im.is_zero() && re.is_positive() {
                    if let Some(r) = rational_nth_root(re, k) {
                        return Ok(Scalar::Exact {
                            re: r,
                            im: BigRational::zero(),
                        });
                    }
                }
                // General path: principal root in f64, then try to recognise
                // both components as small rationals and verify by powering.
                let approx = principal_root_c64(self.to_c64(), k);
                if let Some(exact) = reconstruct_gaussian(approx) {
                    if exact.powi(k as i32).unwrap() == *self {
                        return Ok(exact);
                    }
                }
                Ok(Scalar::Float(approx))
            }
            Scalar::Float(z) => {
                if z.im == 0.0 && z.re < 0.0 {
                    return Err(Error::BranchAmbiguity { re: z.re, im: z.im });
                }
                Ok(Scalar::Float(principal_root_c64(*z, k)))
            }
        }
    }

    /// If the scalar is an integer (exactly, or within `tol` for floats),
    /// return it.
    pub fn as_integer(&self, tol: f64) -> Option<BigInt> {
        match self {
            Scalar::Exact { re, im } => {
                if im.is_zero() && re.is_integer() {
                    Some(re.to_integer())
                } else {
                    None
                }
            }
            Scalar::Float(z) => {
                let n = z.re.round();
                if z.im.abs() <= tol && (z.re - n).abs() <= tol && n.abs() < 9e15 {
                    Some(BigInt::from(n as i64))
                } else {
                    None
                }
            }
        }
    }

    /// If the scalar equals `k²` for an integer `k ≥ 0`, return `k`.
    /// This is the resonance test for exponent differences: for a regular
    /// singular point the discriminant constant term is `(λ₁−λ₂)²`, which is
    /// an integer square exactly when the exponents differ by an integer.
    pub fn as_square_int(&self, tol: f64) -> Option<u64> {
        let n = self.as_integer(tol)?;
        if n.is_negative() {
            return None;
        }
        let k = n.sqrt();
        if &k * &k == n {
            k.to_u64()
        } else {
            None
        }
    }
}

/// Exact square root of a Gaussian rational, principal branch, if one exists
/// within the Gaussian rationals.
fn exact_sqrt(re: &BigRational, im: &BigRational) -> Option<Scalar> {
    if im.is_zero() {
        return if re.is_negative() {
            // Principal branch on the cut: +i * sqrt(|re|).
            let s = rational_sqrt(&-re.clone())?;
            Some(Scalar::Exact {
                re: BigRational::zero(),
                im: s,
            })
        } else {
            let s = rational_sqrt(re)?;
            Some(Scalar::Exact {
                re: s,
                im: BigRational::zero(),
            })
        };
    }
    // z = a+bi with b != 0: sqrt(z) = x+yi with x = sqrt((a+|z|)/2) > 0,
    // y = b/(2x).  Exists in Q(i) iff |z| and (a+|z|)/2 are rational squares.
    let norm = re * re + im * im;
    let s = rational_sqrt(&norm)?;
    let t = (re + &s) / BigRational::from_integer(BigInt::from(2));
    let x = rational_sqrt(&t)?;
    if x.is_zero() {
        return None;
    }
    let y = im / (&x * BigRational::from_integer(BigInt::from(2)));
    debug_assert_eq!(&(&x * &x) - &(&y * &y), *re);
    Some(Scalar::Exact { re: x, im: y })
}

/// Square root of a nonnegative rational if it is again rational.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// k-th root of a positive rational if it is again rational.
fn rational_nth_root(r: &BigRational, k: u32) -> Option<BigRational> {
    let (n, d) = (r.numer(), r.denom());
    let rn = n.nth_root(k);
    let rd = d.nth_root(k);
    if &pow_bigint(&rn, k) == n && &pow_bigint(&rd, k) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

fn pow_bigint(b: &BigInt, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for _ in 0..k {
        acc *= b;
    }
    acc
}

/// Principal k-th root in f64: modulus root and argument/k, with the
/// argument taken in (−π, π].
fn principal_root_c64(z: Complex64, k: u32) -> Complex64 {
    let r = z.norm().powf(1.0 / k as f64);
    let theta = z.arg() / k as f64;
    Complex64::from_polar(r, theta)
}

/// Continued-fraction reconstruction of a float as a small-denominator
/// rational.  Returns the first convergent within `eps`, or None if the
/// denominator bound is exhausted first.
pub fn rational_reconstruct(x: f64, max_den: i64, eps: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut rem = x.abs();
    let (mut p0, mut q0, mut p1, mut q1): (i128, i128, i128, i128) = (1, 0, rem.floor() as i128, 1);
    rem -= rem.floor();
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (x.abs() - approx).abs() <= eps {
            let num = BigInt::from(sign) * BigInt::from(p1);
            return Some(BigRational::new(num, BigInt::from(q1)));
        }
        if rem.abs() < 1e-18 {
            break;
        }
        rem = 1.0 / rem;
        let a = rem.floor();
        if a >= max_den as f64 {
            break;
        }
        rem -= a;
        let (p2, q2) = (a as i128 * p1 + p0, a as i128 * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    None
}

/// Recognise a Complex64 as a Gaussian rational with modest denominators.
fn reconstruct_gaussian(z: Complex64) -> Option<Scalar> {
    let scale = z.norm().max(1.0);
    let re = rational_reconstruct(z.re, 1_000_000, 1e-9 * scale)?;
    let im = rational_reconstruct(z.im, 1_000_000, 1e-9 * scale)?;
    Some(Scalar::Exact { re, im })
}

macro_rules! binop {
    ($trait:ident, $method:ident, |$a:ident, $b:ident, $c:ident, $d:ident| $exact:expr, |$x:ident, $y:ident| $float:expr) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact { re: $a, im: $b }, Scalar::Exact { re: $c, im: $d }) => $exact,
                    _ => {
                        let $x = self.to_c64();
                        let $y = rhs.to_c64();
                        Scalar::Float($float)
                    }
                }
            }
        }
        impl std::ops::$trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b, c, d| Scalar::Exact { re: a + c, im: b + d }, |x, y| x + y);
binop!(Sub, sub, |a, b, c, d| Scalar::Exact { re: a - c, im: b - d }, |x, y| x - y);
binop!(Mul, mul, |a, b, c, d| Scalar::Exact {
    re: a * c - b * d,
    im: a * d + b * c,
}, |x, y| x * y);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact { re, im } => Scalar::Exact {
                re: -re.clone(),
                im: -im.clone(),
            },
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact { re, im } => {
                if im.is_zero() {
                    write!(f, "{}", re)
                } else if re.is_zero() {
                    write!(f, "{}i", im)
                } else if im.is_negative() {
                    write!(f, "{}-{}i", re, -im.clone())
                } else {
                    write!(f, "{}+{}i", re, im)
                }
            }
            Scalar::Float(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.re == 0.0 {
                    write!(f, "{}i", z.im)
                } else if z.im < 0.0 {
                    write!(f, "{}-{}i", z.re, -z.im)
                } else {
                    write!(f, "{}+{}i", z.re, z.im)
                }
            }
        }
    }
}
