//! Truncated Laurent series ("jets") with explicit knowledge tracking.
//!
//! A `Jet` stores the coefficients of `x^lead .. x^order` and the promise
//! that nothing below `lead` occurs; exponents above `order` are unknown,
//! not zero.  Every operation propagates `order` pessimistically, so a
//! coefficient can be read back only if it is genuinely determined by the
//! inputs.  Exactness is per coefficient: exact and float scalars may mix
//! inside one jet (e.g. after taking a log whose constant term is
//! irrational), and arithmetic promotes pointwise.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncated Laurent series: `coeffs[j]` is the coefficient of
/// `x^(lead+j)`, the series is known modulo `O(x^(order+1))`.
///
/// Invariants: `coeffs.len() == order - lead + 1` and `coeffs[0] != 0`,
/// except for the zero jet which has empty `coeffs` and `lead == order + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    lead: i64,
    coeffs: Vec<Scalar>,
    order: i64,
}

impl Jet {
    fn normalized(mut lead: i64, mut coeffs: Vec<Scalar>, order: i64) -> Jet {
        let span = (order - lead + 1).max(0) as usize;
        coeffs.truncate(span);
        while coeffs.len() < span {
            coeffs.push(Scalar::zero());
        }
        let strip = coeffs.iter().take_while(|c| c.is_zero()).count();
        if strip > 0 {
            coeffs.drain(..strip);
            lead += strip as i64;
        }
        if coeffs.is_empty() {
            lead = order + 1;
        }
        Jet { lead, coeffs, order }
    }

    /// The zero jet known to the given order.
    pub fn zero(order: i64) -> Jet {
        Jet {
            lead: order + 1,
            coeffs: Vec::new(),
            order,
        }
    }

    pub fn constant(c: Scalar, order: i64) -> Jet {
        Jet::normalized(0, vec![c], order)
    }

    pub fn one(order: i64) -> Jet {
        Jet::constant(Scalar::one(), order)
    }

    /// The monomial `c x^e`.
    pub fn monomial(c: Scalar, e: i64, order: i64) -> Jet {
        Jet::normalized(e, vec![c], order)
    }

    pub fn x(order: i64) -> Jet {
        Jet::monomial(Scalar::one(), 1, order)
    }

    /// Build a jet from (exponent, coefficient) terms.  Terms above `order`
    /// are outside the claimed knowledge and are dropped; repeated exponents
    /// accumulate.
    pub fn from_terms(terms: &[(i64, Scalar)], order: i64) -> Jet {
        let kept: Vec<_> = terms.iter().filter(|(e, _)| *e <= order).collect();
        let lead = kept.iter().map(|(e, _)| *e).min().unwrap_or(order + 1);
        let span = (order - lead + 1).max(0) as usize;
        let mut coeffs = vec![Scalar::zero(); span];
        for (e, c) in kept {
            let j = (*e - lead) as usize;
            coeffs[j] = &coeffs[j] + c;
        }
        Jet::normalized(lead, coeffs, order)
    }

    /// Exact polynomial with integer coefficients `cs[j] x^(lead+j)`.
    pub fn poly_i64(lead: i64, cs: &[i64], order: i64) -> Jet {
        let terms: Vec<_> = cs
            .iter()
            .enumerate()
            .map(|(j, &c)| (lead + j as i64, Scalar::from_int(c)))
            .collect();
        Jet::from_terms(&terms, order)
    }

    /// True if every known coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Valuation: exponent of the first nonzero coefficient.  For the zero
    /// jet this returns `order + 1` ("at least"), which is exactly the value
    /// that makes the order-propagation formulas uniform.
    pub fn val(&self) -> i64 {
        self.lead
    }

    /// Highest exponent whose coefficient is known.
    pub fn order(&self) -> i64 {
        self.order
    }

    /// Coefficient of `x^e`; `OrderExhausted` beyond the known order.
    pub fn coeff(&self, e: i64) -> Result<Scalar> {
        if e > self.order {
            return Err(Error::OrderExhausted {
                need: e,
                have: self.order,
            });
        }
        Ok(self.fetch(e))
    }

    fn fetch(&self, e: i64) -> Scalar {
        debug_assert!(e <= self.order);
        if e < self.lead {
            Scalar::zero()
        } else {
            self.coeffs[(e - self.lead) as usize].clone()
        }
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.coeffs.first()
    }

    /// Known coefficients with their exponents, lowest first.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, c)| (self.lead + j as i64, c))
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    pub fn to_float(&self) -> Jet {
        self.map_coeffs(|_, c| c.to_float())
    }

    /// Apply `f(exponent, coeff)` to every known coefficient.
    pub fn map_coeffs(&self, f: impl Fn(i64, &Scalar) -> Scalar) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| f(self.lead + j as i64, c))
            .collect();
        Jet::normalized(self.lead, coeffs, self.order)
    }

    /// Restrict knowledge to order `n` (never extends).
    pub fn truncated(&self, n: i64) -> Jet {
        if n >= self.order {
            return self.clone();
        }
        if n < self.lead {
            return Jet::zero(n);
        }
        let span = (n - self.lead + 1) as usize;
        Jet::normalized(self.lead, self.coeffs[..span].to_vec(), n)
    }

    /// Multiply by `x^k`.
    pub fn shifted(&self, k: i64) -> Jet {
        Jet {
            lead: self.lead + k,
            coeffs: self.coeffs.clone(),
            order: self.order + k,
        }
    }

    pub fn scaled(&self, s: &Scalar) -> Jet {
        self.map_coeffs(|_, c| c * s)
    }

    /// d/dx, known one order less.
    pub fn derivative(&self) -> Jet {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.mul_int(self.lead + j as i64))
            .collect();
        Jet::normalized(self.lead - 1, coeffs, self.order - 1)
    }

    /// The derivation `delta_nu = x^(nu+1) d/dx`; raises the known order by
    /// `nu`.
    pub fn delta(&self, nu: u32) -> Jet {
        self.derivative().shifted(nu as i64 + 1)
    }

    /// Termwise antiderivative without constant; fails on an `x^{-1}` term.
    pub fn integrated(&self) -> Result<Jet> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (e, c) in self.terms() {
            if e == -1 {
                return Err(Error::InvalidInput(
                    "cannot integrate an x^-1 term inside a jet".into(),
                ));
            }
            coeffs.push(c.mul_rat(&num_rational::BigRational::new(
                num_bigint::BigInt::from(1),
                num_bigint::BigInt::from(e + 1),
            )));
        }
        Ok(Jet::normalized(self.lead + 1, coeffs, self.order + 1))
    }

    /// Multiplicative inverse; the argument must not vanish identically.
    /// For `g = x^v u` with unit `u`, the result is known to `order - 2v`.
    pub fn inv(&self) -> Result<Jet> {
        if self.is_zero() {
            return Err(Error::DivisionByZeroSeries { order: self.order });
        }
        let u0_inv = self.coeffs[0].inv()?;
        let n = self.coeffs.len();
        let mut w: Vec<Scalar> = Vec::with_capacity(n);
        w.push(u0_inv.clone());
        for k in 1..n {
            let mut s = Scalar::zero();
            for j in 1..=k {
                s = &s + &(&self.coeffs[j] * &w[k - j]);
            }
            w.push(&(-&s) * &u0_inv);
        }
        let v = self.lead;
        Ok(Jet::normalized(-v, w, self.order - 2 * v))
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet> {
        Ok(self * &rhs.inv()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn powi(&self, n: i64) -> Result<Jet> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Jet::one(base.order().max(self.order()));
        for _ in 0..n.abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// `delta_nu(self) / self`, the logarithmic delta-derivative.  Defined
    /// for any nonzero valuation and never introduces log constants.
    pub fn dlog(&self, nu: u32) -> Result<Jet> {
        self.delta(nu).div(self)
    }

    /// Composition `self(g)` for `val(g) >= 1`.
    ///
    /// The result is known to
    /// `min((N_f + 1) v_g - 1, N_g + (k_min - 1) v_g)` where `k_min` is the
    /// lowest nonzero power of `g` that occurs: the first cap is the unknown
    /// tail of `self`, the second the unknown tail of `g` entering through
    /// `g^k_min`.
    pub fn compose(&self, g: &Jet) -> Result<Jet> {
        let vg = g.val();
        if g.is_zero() || vg < 1 {
            return Err(Error::InvalidInput(
                "composition needs an inner series with val >= 1".into(),
            ));
        }
        let tail_cap = (self.order + 1) * vg - 1;
        if self.is_zero() {
            return Ok(Jet::zero(tail_cap));
        }
        let vf = self.lead;
        let nf = self.order;
        let k_min = if vf != 0 { vf } else { 1 };
        let mut target = tail_cap;
        if !(vf == 0 && nf == 0) {
            target = target.min(g.order + (k_min - 1) * vg);
        }
        let mut acc = Jet::zero(target);
        let mut pow = if vf < 0 {
            // (g^-1)^m is known to N_g + (-m-1) v_g, which stays >= target
            // for every m <= |vf| by the choice of target above.
            let ginv = g.inv()?;
            let mut p = Jet::one(target - vf * vg);
            for _ in 0..(-vf) {
                p = &p * &ginv;
            }
            p.truncated(target)
        } else {
            let mut p = Jet::one(target);
            for _ in 0..vf {
                p = (&p * g).truncated(target);
            }
            p
        };
        for k in vf..=nf {
            let fk = self.fetch(k);
            if !fk.is_zero() {
                acc = &acc + &pow.scaled(&fk);
            }
            if k < nf {
                pow = (&pow * g).truncated(target);
            }
        }
        Ok(acc.truncated(target))
    }

    /// Compositional inverse of `f = c1 x + ...` with `c1 != 0`; known to the
    /// same order as the input.
    pub fn reverse(&self) -> Result<Jet> {
        if self.val() != 1 {
            return Err(Error::InvalidInput(
                "reversion needs a series of valuation exactly 1".into(),
            ));
        }
        let n = self.order;
        if n < 1 {
            return Err(Error::OrderExhausted { need: 1, have: n });
        }
        let c1 = self.fetch(1);
        let c1_inv = c1.inv()?;
        // g = (x - h(g)) / c1 with h = f - c1 x of valuation >= 2 gains one
        // correct order per pass.
        let h = self - &Jet::monomial(c1.clone(), 1, n);
        let x = Jet::x(n);
        let mut g = x.scaled(&c1_inv);
        for _ in 0..n.max(1) {
            let hg = h.compose(&g)?.truncated(n);
            g = (&x - &hg).scaled(&c1_inv).truncated(n);
        }
        Ok(g)
    }

    /// Exponential.  For a nonzero constant term the constant factor
    /// `exp(f_0)` is evaluated in floats (it is irrational for exact nonzero
    /// arguments); the series part stays exact when the input is exact.
    pub fn exp(&self) -> Result<Jet> {
        if self.val() < 0 {
            return Err(Error::InvalidInput(
                "exp of a series with a pole is not a jet".into(),
            ));
        }
        let n = self.order;
        if n < 0 {
            return Ok(Jet::zero(n));
        }
        let c0 = self.fetch(0);
        let rest = self - &Jet::constant(c0.clone(), n);
        // u' = w' u with u(0) = 1 determines u term by term.
        let mut u = vec![Scalar::one()];
        for k in 1..=n {
            let mut s = Scalar::zero();
            for j in 1..=k {
                let wj = rest.fetch(j).mul_int(j);
                s = &s + &(&wj * &u[(k - j) as usize]);
            }
            u.push(s.mul_rat(&num_rational::BigRational::new(
                num_bigint::BigInt::from(1),
                num_bigint::BigInt::from(k),
            )));
        }
        let series = Jet::normalized(0, u, n);
        if c0.is_zero() {
            Ok(series)
        } else {
            let factor = Scalar::from_c64(c0.to_c64().exp());
            Ok(series.scaled(&factor))
        }
    }

    /// Principal logarithm of a unit series (`val == 0`, nonzero constant
    /// term).  Only the constant coefficient can become irrational; all
    /// higher coefficients stay exact for exact input.  A float constant on
    /// the negative real axis is reported as `BranchAmbiguity`.
    pub fn log(&self) -> Result<Jet> {
        if self.is_zero() || self.val() != 0 {
            return Err(Error::InvalidInput(
                "log needs a unit series; use dlog for general valuations".into(),
            ));
        }
        let c0 = self.coeffs[0].clone();
        let n = self.order;
        // log(f) = log(c0) + log(f/c0); the series part via L' = u'/u.
        let unit = self.scaled(&c0.inv()?);
        let series = unit.derivative().div(&unit)?.integrated()?;
        if c0.is_one() {
            return Ok(series.truncated(n));
        }
        let log_c0 = match &c0 {
            Scalar::Float(z) if z.im == 0.0 && z.re < 0.0 => {
                return Err(Error::BranchAmbiguity { re: z.re, im: z.im })
            }
            Scalar::Exact { .. } | Scalar::Float(_) => {
                let z = c0.to_c64();
                if z.im == 0.0 && z.re < 0.0 {
                    // Exact negative reals take the principal value ln|c|+i pi
                    // deterministically.
                    num_complex::Complex64::new((-z.re).ln(), std::f64::consts::PI)
                } else {
                    z.ln()
                }
            }
        };
        Ok(&series.truncated(n) + &Jet::constant(Scalar::from_c64(log_c0), n))
    }

    /// Principal square root.  The valuation must be even; the leading
    /// coefficient root follows the scalar policy (exact when possible,
    /// `BranchAmbiguity` for floats on the cut).
    pub fn sqrt(&self) -> Result<Jet> {
        if self.is_zero() {
            return Err(Error::InvalidInput("sqrt of an identically zero jet".into()));
        }
        let v = self.lead;
        if v % 2 != 0 {
            return Err(Error::OddValuationSqrt { val: v });
        }
        let c0 = self.coeffs[0].clone();
        let root0 = c0.sqrt()?;
        // self = c0 x^v (1 + w), sqrt = root0 x^(v/2) exp(log(1+w)/2).
        let unit = self.shifted(-v).scaled(&c0.inv()?);
        let half = crate::scalar::Scalar::from_ratio(1, 2);
        let res = unit.log()?.scaled(&half).exp()?;
        Ok(res.scaled(&root0).shifted(v / 2))
    }

    /// Largest absolute coefficient difference over the common known range.
    pub fn residual_sup(&self, other: &Jet) -> f64 {
        let n = self.order.min(other.order);
        let lead = self.lead.min(other.lead);
        let mut sup: f64 = 0.0;
        let mut e = lead;
        while e <= n {
            let d = (self.fetch(e).to_c64() - other.fetch(e).to_c64()).norm();
            sup = sup.max(d);
            e += 1;
        }
        sup
    }

    /// Coefficientwise comparison over the common known range; exact pairs
    /// compare exactly, anything float within `tol`.
    pub fn eq_tol(&self, other: &Jet, tol: f64) -> bool {
        let n = self.order.min(other.order);
        let lead = self.lead.min(other.lead);
        let mut e = lead;
        while e <= n {
            if !self.fetch(e).eq_tol(&other.fetch(e), tol) {
                return false;
            }
            e += 1;
        }
        true
    }

    /// Sup of |coefficient| over the known range (coarse size gauge).
    pub fn sup_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs_f64())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let lead = self.lead.min(rhs.lead).min(order + 1);
        let span = (order - lead + 1).max(0) as usize;
        let mut coeffs = Vec::with_capacity(span);
        for j in 0..span {
            let e = lead + j as i64;
            coeffs.push(&self.fetch(e) + &rhs.fetch(e));
        }
        Jet::normalized(lead, coeffs, order)
    }
}

impl std::ops::Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map_coeffs(|_, c| -c)
    }
}

impl std::ops::Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let order = (self.order + rhs.lead).min(rhs.order + self.lead);
        if self.is_zero() || rhs.is_zero() {
            return Jet::zero(order);
        }
        let lead = self.lead + rhs.lead;
        let span = (order - lead + 1).max(0) as usize;
        let mut coeffs = vec![Scalar::zero(); span];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j < span {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                } else {
                    break;
                }
            }
        }
        Jet::normalized(lead, coeffs, order)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (e, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let composite = s[1..].contains('+') || s[1..].contains('-') || s.contains('i');
            if wrote {
                write!(f, " + ")?;
            }
            if e == 0 {
                write!(f, "{}", s)?;
            } else {
                let xpow = if e == 1 {
                    "x".to_string()
                } else {
                    format!("x^{}", e)
                };
                if s == "1" {
                    write!(f, "{}", xpow)?;
                } else if s == "-1" {
                    write!(f, "-{}", xpow)?;
                } else if composite {
                    write!(f, "({}){}", s, xpow)?;
                } else {
                    write!(f, "{}{}", s, xpow)?;
                }
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order + 1)
    }
}
