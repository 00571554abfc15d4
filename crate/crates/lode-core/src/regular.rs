//! Frobenius analysis at a regular singular point (`nu = 0`): power-series
//! solution bases with logarithmic companions, the monodromy type, reduction
//! to one of three analytic normal forms, and the analytic equivalence
//! decision.
//!
//! With characteristic roots `lambda_1, lambda_2` (ordered by decreasing
//! real part) the solution basis is
//!
//! ```text
//! y_1 = T_11(x) x^lambda_1,
//! y_2 = T_12(x) x^lambda_2 + s T_11(x) x^lambda_1 log x,
//! ```
//!
//! where the log companion appears (`epsilon = 1`) exactly when the local
//! monodromy is not diagonalizable; `s` is its realized scale.  Two regular
//! equations are analytically equivalent iff they share the root pair and
//! the (non)diagonalizability bit.

use crate::classify::{classify_tol, regular_roots};
use crate::jet::Jet;
use crate::lde::{Lde, PointTransformation};
use crate::newton::jet_newton_solve;
use crate::scalar::Scalar;
use crate::{working_tol, Error, Result, VERIFY_TOL};

/// The Frobenius data of a regular singular point, to a fixed jet order.
#[derive(Debug, Clone)]
pub struct RegularData {
    /// Characteristic roots, `Re lambda1 >= Re lambda2` (ties broken by
    /// imaginary part).
    pub lambda1: Scalar,
    pub lambda2: Scalar,
    /// `lambda1 - lambda2` when that difference is a non-negative integer
    /// (the resonant configuration), `None` otherwise.
    pub k: Option<u64>,
    /// 1 iff the basis needs a logarithm, i.e. the monodromy is a single
    /// Jordan block.
    pub epsilon: u8,
    /// The realized coefficient of `T_11 x^lambda1 log x` in `y_2` under
    /// the normalization `T_12(0) = 1` (`k > 0`) or `T_12(0) = 0` (`k = 0`,
    /// where the scale is 1 by convention).  Zero iff `epsilon == 0`.
    pub log_scale: Scalar,
    /// `T_11`, normalized to `T_11(0) = 1`.
    pub t11: Jet,
    /// `T_12`; at a resonance the coefficient of `x^k` is fixed to 0 (it
    /// only shifts `y_2` by a multiple of `y_1`).
    pub t12: Jet,
}

/// Whether the local monodromy operator is diagonalizable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonodromyType {
    Diagonalizable,
    NonDiagonalizable,
}

impl std::fmt::Display for MonodromyType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MonodromyType::Diagonalizable => write!(f, "DIAGONALIZABLE"),
            MonodromyType::NonDiagonalizable => write!(f, "NON_DIAGONALIZABLE"),
        }
    }
}

pub fn monodromy_type(d: &RegularData) -> MonodromyType {
    if d.epsilon == 1 {
        MonodromyType::NonDiagonalizable
    } else {
        MonodromyType::Diagonalizable
    }
}

/// The analytic normal form a regular equation reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularForm {
    /// `(d0 - lambda2)(d0 - lambda1) y = 0`, diagonalizable.
    B1a,
    /// `(d0 - lambda)^2 y = 0`, equal roots.
    B1b,
    /// `(d0 - lambda2 + k x^k / (1 - x^k))(d0 - lambda1) y = 0`, resonant
    /// with a log.
    B1c,
}

impl std::fmt::Display for RegularForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegularForm::B1a => write!(f, "B1a"),
            RegularForm::B1b => write!(f, "B1b"),
            RegularForm::B1c => write!(f, "B1c"),
        }
    }
}

fn ensure_regular(e: &Lde, tol: f64) -> Result<()> {
    if e.nu() != 0 {
        return Err(Error::InvalidInput(
            "Frobenius analysis needs a regular singular point (nu = 0)".into(),
        ));
    }
    let class = classify_tol(e, tol)?;
    if class.is_degenerate() {
        return Err(Error::DegenerateInput);
    }
    Ok(())
}

/// Sum `sum_{j=1..m} [p_j (lambda + m - j) + q_j] f_{m-j}` — the lower-order
/// part of the Frobenius recurrence at degree `m`.
fn recurrence_tail(e: &Lde, lambda: &Scalar, f: &[Scalar], m: i64) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    for j in 1..=m {
        let idx = (m - j) as usize;
        if idx >= f.len() {
            continue;
        }
        let pj = e.p().coeff(j)?;
        let qj = e.q().coeff(j)?;
        let weight = &(&pj * &(lambda + &Scalar::from_int(m - j))) + &qj;
        acc = &acc + &(&weight * &f[idx]);
    }
    Ok(acc)
}

/// `I(lambda + m)` written as `m (m + lambda - other)` to keep exact zeros
/// exact at resonances.
fn indicial_shift(lambda: &Scalar, other: &Scalar, m: i64) -> Scalar {
    let mm = Scalar::from_int(m);
    &mm * &(&mm + &(lambda - other))
}

/// The log-companion forcing at degree `m`: with `y_2`'s log part
/// `C x^lambda`, the plain part obeys `F_lambda(A) = -2 (lambda + d0) C + p C`.
fn log_forcing(e: &Lde, lambda: &Scalar, c: &[Scalar], m: i64) -> Result<Scalar> {
    let idx = m as usize;
    let cm = if idx < c.len() {
        c[idx].clone()
    } else {
        Scalar::zero()
    };
    let p0 = e.p().coeff(0)?;
    let mut acc = &(&p0 - &Scalar::from_int(2 * m)) * &cm;
    acc = &acc - &(&(lambda + lambda) * &cm);
    for j in 1..=m {
        let idx = (m - j) as usize;
        if idx >= c.len() {
            continue;
        }
        acc = &acc + &(&e.p().coeff(j)? * &c[idx]);
    }
    Ok(acc)
}

/// Compute the Frobenius data of `e` with all series truncated at order `n`.
pub fn frobenius(e: &Lde, n: i64) -> Result<RegularData> {
    let tol = working_tol(e.is_exact());
    ensure_regular(e, tol)?;
    if e.order() < n {
        return Err(Error::OrderExhausted {
            need: n,
            have: e.order(),
        });
    }
    let (lambda1, lambda2) = regular_roots(e)?;
    let diff = &lambda1 - &lambda2;
    let k = match diff.as_integer(tol) {
        Some(b) => Some(u64::try_from(b).map_err(|_| {
            Error::InvalidInput("resonance index does not fit in u64".into())
        })?),
        None => None,
    };

    // T_11 never meets the resonance thanks to the root ordering.
    let mut t11 = vec![Scalar::one()];
    for m in 1..=n {
        let rhs = recurrence_tail(e, &lambda1, &t11, m)?;
        let den = indicial_shift(&lambda1, &lambda2, m);
        t11.push(rhs.div(&den)?);
    }

    let mut epsilon = 0u8;
    let mut log_scale = Scalar::zero();
    let mut t12: Vec<Scalar>;
    match k {
        None => {
            t12 = vec![Scalar::one()];
            for m in 1..=n {
                let rhs = recurrence_tail(e, &lambda2, &t12, m)?;
                let den = indicial_shift(&lambda2, &lambda1, m);
                t12.push(rhs.div(&den)?);
            }
        }
        Some(0) => {
            // Equal roots: the log is always present, scale 1, companion
            // `C = T_11`, and `T_12` starts at 0.
            epsilon = 1;
            log_scale = Scalar::one();
            t12 = vec![Scalar::zero()];
            for m in 1..=n {
                let rhs = &recurrence_tail(e, &lambda2, &t12, m)?
                    + &log_forcing(e, &lambda2, &t11, m)?;
                let den = indicial_shift(&lambda2, &lambda1, m);
                t12.push(rhs.div(&den)?);
            }
        }
        Some(kk) => {
            let kk = kk as i64;
            if kk > n {
                // The obstruction deciding the log lives at degree k; below
                // that order the monodromy type is genuinely unknown.
                return Err(Error::OrderExhausted { need: kk, have: n });
            }
            t12 = vec![Scalar::one()];
            for m in 1..kk {
                let rhs = recurrence_tail(e, &lambda2, &t12, m)?;
                let den = indicial_shift(&lambda2, &lambda1, m);
                t12.push(rhs.div(&den)?);
            }
            {
                // Degree k is the resonance: the recurrence's left side
                // vanishes and the tail must be absorbed by the log
                // companion `C = s x^k T_11`, which forces `-s k` there.
                let obstruction = recurrence_tail(e, &lambda2, &t12, kk)?;
                if obstruction.is_zero_tol(tol) {
                    epsilon = 0;
                } else {
                    epsilon = 1;
                    log_scale = obstruction.div(&Scalar::from_int(kk))?;
                }
                // The x^k coefficient only shifts y_2 by a multiple of y_1.
                t12.push(Scalar::zero());
                let c: Vec<Scalar> = (0..=(n - kk) as usize)
                    .map(|i| &log_scale * &t11[i])
                    .collect();
                for m in (kk + 1)..=n {
                    let mut rhs = recurrence_tail(e, &lambda2, &t12, m)?;
                    if epsilon == 1 {
                        let shifted: Vec<Scalar> = {
                            // C as a coefficient vector in degrees 0..=n,
                            // C_i = s * t11_{i-k}.
                            let mut v = vec![Scalar::zero(); kk as usize];
                            v.extend(c.iter().cloned());
                            v
                        };
                        rhs = &rhs + &log_forcing(e, &lambda2, &shifted, m)?;
                    }
                    let den = indicial_shift(&lambda2, &lambda1, m);
                    t12.push(rhs.div(&den)?);
                }
            }
        }
    }

    let to_jet = |v: &[Scalar]| {
        let terms: Vec<(i64, Scalar)> =
            v.iter().cloned().enumerate().map(|(i, c)| (i as i64, c)).collect();
        Jet::from_terms(&terms, n)
    };
    Ok(RegularData {
        lambda1,
        lambda2,
        k,
        epsilon,
        log_scale,
        t11: to_jet(&t11),
        t12: to_jet(&t12),
    })
}

/// The normal-form equation itself.
pub fn normal_form_equation(form: RegularForm, d: &RegularData, order: i64) -> Result<Lde> {
    let a1 = Jet::constant(d.lambda1.clone(), order);
    match form {
        RegularForm::B1a => {
            let a2 = Jet::constant(d.lambda2.clone(), order);
            Lde::from_factored(0, &a1, &a2)
        }
        RegularForm::B1b => Lde::from_factored(0, &a1, &a1),
        RegularForm::B1c => {
            let k = d.k.expect("B1c requires a resonance") as i64;
            let xk = Jet::monomial(Scalar::one(), k, order);
            let denom = (&Jet::one(order) - &xk).inv()?;
            let a2 = &Jet::constant(d.lambda2.clone(), order)
                - &(&xk.scaled(&Scalar::from_int(k)) * &denom);
            Lde::from_factored(0, &a1, &a2)
        }
    }
}

/// Reduce a regular equation to its analytic normal form, returning the
/// form tag and a transformation `T` with `e = nf.apply_transformation(T)`.
///
/// The change of variable comes from matching the solution bases; for the
/// logarithmic resonant case the matching equation is solved by a jet
/// Newton iteration and its scale constants (`k^(-1/k)`, `log k`) are
/// irrational for `k >= 2`, so those witnesses are float-valued.
pub fn reduce_to_normal_form(e: &Lde, n: i64) -> Result<(RegularForm, PointTransformation)> {
    let d = frobenius(e, n)?;
    let ratio = d.t12.div(&d.t11)?;
    let (form, phi, t_gauge) = match (d.epsilon, d.k) {
        (0, _) => {
            // Diagonalizable: phi from (T12/T11) = (1+g)^(lambda2-lambda1),
            // gauge t = T11 (1+g)^(-lambda1); both sides exact exponentials.
            let diff = &d.lambda2 - &d.lambda1;
            let u = ratio.log()?;
            let g_log = u.scaled(&diff.inv()?);
            let one_plus_g = g_log.exp()?;
            let x = Jet::x(one_plus_g.order() + 1);
            let phi = &x * &one_plus_g;
            let t_gauge = &d.t11 * &g_log.scaled(&-&d.lambda1).exp()?;
            (RegularForm::B1a, phi, t_gauge)
        }
        (_, Some(0)) => {
            // Equal roots: phi = x e^(T12/T11), t = T11 e^(-lambda T12/T11).
            let one_plus_g = ratio.exp()?;
            let x = Jet::x(one_plus_g.order() + 1);
            let phi = &x * &one_plus_g;
            let t_gauge = &d.t11 * &ratio.scaled(&-&d.lambda1).exp()?;
            (RegularForm::B1b, phi, t_gauge)
        }
        (_, Some(kk)) => {
            let kk = kk as i64;
            let s = d.log_scale.clone();
            // Matching y_2 = gamma t (phi^l2 + k phi^l1 log phi) fixes
            // gamma = s/k and phi'(0) = c with c^k = s/k, and leaves the
            // implicit equation
            //   T12/T11 = (1+g)^(-k) + s x^k log c + s x^k log(1+g)
            // for phi = c x (1+g).  log c is irrational unless c = 1, so
            // general witnesses here are float-valued.
            let c = s.div(&Scalar::from_int(kk))?.nth_root(kk as u32)?;
            let log_c = if c.is_one() {
                Scalar::zero()
            } else {
                Scalar::from_c64(c.to_c64().ln())
            };
            let order = ratio.order();
            let xk = Jet::monomial(Scalar::one(), kk, order);
            let shift = xk.scaled(&(&s * &log_c));
            let residual = |g: &Jet| -> Result<Jet> {
                let opg = &Jet::one(order) + g;
                let lhs = &(&opg.powi(-kk)? + &(&xk * &opg.log()?.scaled(&s))) + &shift;
                Ok(&lhs - &ratio)
            };
            let g = jet_newton_solve(residual, &Scalar::zero(), order)?;
            let one_plus_g = &Jet::one(order) + &g;
            let x = Jet::x(order + 1);
            let phi = (&x * &one_plus_g).scaled(&c);
            // t = T11 c^(-lambda1) (1+g)^(-lambda1).
            let c_pow = if c.is_one() {
                Scalar::one()
            } else {
                Scalar::from_c64((-d.lambda1.to_c64() * c.to_c64().ln()).exp())
            };
            let t_gauge = (&d.t11 * &one_plus_g.log()?.scaled(&-&d.lambda1).exp()?).scaled(&c_pow);
            (RegularForm::B1c, phi, t_gauge)
        }
        (_, None) => unreachable!("epsilon = 1 requires an integer root difference"),
    };

    let tr = PointTransformation::analytic(phi, t_gauge.inv()?)?;
    let nf = normal_form_equation(form, &d, e.order())?;
    let check = nf.apply_transformation(&tr)?;
    let tol = if check.is_exact() { 0.0 } else { VERIFY_TOL };
    if !check.eq_tol(e, tol) {
        let res = check
            .p()
            .residual_sup(e.p())
            .max(check.q().residual_sup(e.q()));
        return Err(Error::ResidualTooLarge { residual: res, tol });
    }
    Ok((form, tr))
}

/// Analytic equivalence of two regular equations: equal root pairs and the
/// same diagonalizability bit.
pub fn regular_equivalent(e1: &Lde, e2: &Lde, n: i64) -> Result<bool> {
    let d1 = frobenius(e1, n)?;
    let d2 = frobenius(e2, n)?;
    // The roots themselves can be float (irrational square roots) even for
    // exact equations; only then is a tolerance in play.
    let exact = [&d1.lambda1, &d1.lambda2, &d2.lambda1, &d2.lambda2]
        .iter()
        .all(|l| l.is_exact());
    let tol = if exact { 0.0 } else { VERIFY_TOL };
    Ok(d1.lambda1.eq_tol(&d2.lambda1, tol)
        && d1.lambda2.eq_tol(&d2.lambda2, tol)
        && d1.epsilon == d2.epsilon)
}

/// Produce a transformation `T` with `e1 = e2.apply_transformation(T)` when
/// the two regular equations are analytically equivalent, composing the two
/// normal-form reductions.  `t_param` realizes the scaling freedom
/// `phi'(0) = 1 + t_param` of the constant-coefficient forms; the
/// logarithmic resonant form has no such first-order freedom and ignores it.
pub fn equivalence_witness(
    e1: &Lde,
    e2: &Lde,
    n: i64,
    t_param: &Scalar,
) -> Result<Option<PointTransformation>> {
    if !regular_equivalent(e1, e2, n.min(e1.order()).min(e2.order()))? {
        return Ok(None);
    }
    let (form1, u1) = reduce_to_normal_form(e1, n.min(e1.order()))?;
    let (form2, u2) = reduce_to_normal_form(e2, n.min(e2.order()))?;
    debug_assert_eq!(form1, form2);
    let mut total = u2.inverse()?.then(&u1)?;
    if !t_param.is_zero() && matches!(form1, RegularForm::B1a | RegularForm::B1b) {
        let ord = total.phi().order();
        let scale = &Scalar::one() + t_param;
        let mid = PointTransformation::analytic(Jet::x(ord).scaled(&scale), Jet::one(ord))?;
        total = u2.inverse()?.then(&mid)?.then(&u1)?;
    }
    let check = e2.apply_transformation(&total)?;
    let tol = if check.is_exact() && e1.is_exact() {
        0.0
    } else {
        VERIFY_TOL
    };
    if !check.eq_tol(e1, tol) {
        return Ok(None);
    }
    let have = total.phi().order();
    if have < n {
        return Err(Error::OrderExhausted { need: n, have });
    }
    Ok(Some(PointTransformation::new(
        total.phi().truncated(n),
        total.t().truncated(n.min(total.t().order())),
        total.shift_m(),
    )?))
}
