//! Named example equations reused across the test suite and shipped with
//! the CLI: the four regular normal forms, the irregular normal-form
//! family, the rank-one reducible normal forms, the resonant normal form,
//! and a degenerate rank-two family whose formal and analytic equivalence
//! classes genuinely differ.
//!
//! The builders are exact constructors over [`Lde::from_factored`] or the
//! normal-form coefficient formulas, so tests can assert identities with
//! zero tolerance.  The two `example1` oracles at the end are
//! computational: the companion systems of any two members of the
//! degenerate family are conjugated by a formal gauge
//! ([`example1_gauge_oracle`] always succeeds), while the scalar equations
//! with their solution bases pinned are not mutually transformable — the
//! change of variable is forced to absorb a `log(c/c~)` worth of scale,
//! and the gauge factor then picks up a nonzero `x^-1` Laurent coefficient
//! in its logarithm that no power series can unwind
//! ([`example1_formal_obstruction`] reports it).

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::lde::Lde;
use crate::newton::solve_triangular;
use crate::scalar::Scalar;
use crate::working_tol;

/// The diagonalizable regular normal form with exponents `l1`, `l2`:
/// the operator annihilating `x^l1` and `x^l2`.
pub fn b1a(lambda1: &Scalar, lambda2: &Scalar, order: i64) -> Result<Lde> {
    Lde::from_factored(
        0,
        &Jet::constant(lambda1.clone(), order),
        &Jet::constant(lambda2.clone(), order),
    )
}

/// The equal-exponent regular normal form, annihilating `x^l` and
/// `x^l log x`.
pub fn b1b(lambda: &Scalar, order: i64) -> Result<Lde> {
    b1a(lambda, lambda, order)
}

/// The resonance index `k = l1 - l2`, required to be a positive integer.
fn resonance_index(lambda1: &Scalar, lambda2: &Scalar) -> Result<i64> {
    let tol = working_tol(lambda1.is_exact() && lambda2.is_exact());
    let k = (lambda1 - lambda2)
        .as_integer(tol)
        .and_then(|b| i64::try_from(b).ok())
        .filter(|k| *k >= 1)
        .ok_or_else(|| {
            Error::InvalidInput(
                "the logarithmic normal forms need exponents differing by a positive integer"
                    .into(),
            )
        })?;
    Ok(k)
}

/// The logarithmic regular normal form for exponents with `l1 - l2 = k`
/// a positive integer, annihilating `x^l1` and `x^l2 + k x^l1 log x`.
pub fn b1c(lambda1: &Scalar, lambda2: &Scalar, order: i64) -> Result<Lde> {
    let k = resonance_index(lambda1, lambda2)?;
    let xk = Jet::monomial(Scalar::one(), k, order);
    let geom = (&Jet::one(order) - &xk).inv()?;
    let a2 = &Jet::constant(lambda2.clone(), order)
        - &(&xk.scaled(&Scalar::from_int(k)) * &geom);
    Lde::from_factored(0, &Jet::constant(lambda1.clone(), order), &a2)
}

/// The polynomial variant of the logarithmic normal form: the geometric
/// tail of [`b1c`] is truncated to the single monomial `k x^k`.
pub fn b1d(lambda1: &Scalar, lambda2: &Scalar, order: i64) -> Result<Lde> {
    let k = resonance_index(lambda1, lambda2)?;
    let a2 = &Jet::constant(lambda2.clone(), order)
        - &Jet::monomial(Scalar::from_int(k), k, order);
    Lde::from_factored(0, &Jet::constant(lambda1.clone(), order), &a2)
}

/// The irregular normal form built from a pair of exponent jets with a
/// unit difference:
///
/// ```text
/// p = l1 + l2 + d_nu log(l2 - l1),
/// q = -l1 l2 + (1/2) d_nu (l1 + l2) - ((l1 + l2) / 2) d_nu log(l2 - l1).
/// ```
///
/// Its solutions are `exp(int l_j d_nu^-1)`, and its discriminant is
/// `d^2 + L^2 - 2 d_nu L` for `d = l2 - l1`, `L = d_nu log d`.  With
/// `nu = 0` and constant exponents this degenerates to [`b1a`].
pub fn irregular_normal_form(nu: u32, lambda1: &Jet, lambda2: &Jet) -> Result<Lde> {
    let d = lambda2 - lambda1;
    if d.is_zero() || d.val() != 0 {
        return Err(Error::InvalidInput(
            "the non-resonant normal form needs a unit exponent difference".into(),
        ));
    }
    let l = d.dlog(nu)?;
    let s = lambda1 + lambda2;
    let half = Scalar::from_ratio(1, 2);
    let p = &s + &l;
    let q = &(&s.delta(nu).scaled(&half) - &(lambda1 * lambda2)) - &(&s.scaled(&half) * &l);
    Lde::new(nu, p, q)
}

/// The resonant irregular normal form attached to a trace head `P` with
/// `P(0) = 0`:
///
/// ```text
/// p = P,
/// q = (1/4) [x + x^nu P - (nu + 1/4) x^(2 nu) - P^2 + 2 d_nu P],
/// ```
///
/// whose discriminant is exactly `x + x^nu P - (nu + 1/4) x^(2 nu)`.
pub fn resonant_normal_form(nu: u32, p_head: &Jet) -> Result<Lde> {
    if nu == 0 {
        return Err(Error::InvalidInput(
            "the resonant normal form needs rank at least one".into(),
        ));
    }
    if !p_head.is_zero() && p_head.val() < 1 {
        return Err(Error::InvalidInput(
            "the trace head of the resonant normal form must vanish at the origin".into(),
        ));
    }
    let n = p_head.order();
    let weight = Scalar::from_ratio(4 * i64::from(nu) + 1, 4);
    let sum = &(&(&Jet::x(n) + &p_head.shifted(i64::from(nu)))
        - &Jet::monomial(weight, 2 * i64::from(nu), n))
        - &(&(p_head * p_head) - &p_head.delta(nu).scaled(&Scalar::from_int(2)));
    let q = sum.scaled(&Scalar::from_ratio(1, 4));
    Lde::new(nu, p_head.clone(), q)
}

/// The trace-free exponent pair `-/+ (1 + mu x) / 2` of the rank-one
/// reducible normal forms.
fn reducible_exponent(mu: &Scalar, order: i64) -> Jet {
    let half = Scalar::from_ratio(1, 2);
    Jet::from_terms(&[(0, half.clone()), (1, &half * mu)], order)
}

/// The diagonal rank-one reducible normal form: the operator with
/// exponent jets `-/+ (1 + mu x) / 2`.
pub fn reducible_nf1(mu: &Scalar, order: i64) -> Result<Lde> {
    let a2 = reducible_exponent(mu, order);
    Lde::from_factored(1, &a2.scaled(&Scalar::from_int(-1)), &a2)
}

/// The unipotent rank-one reducible normal form: as [`reducible_nf1`] but
/// with the upper exponent perturbed by `-x^2`.
pub fn reducible_nf2(mu: &Scalar, order: i64) -> Result<Lde> {
    let d_half = reducible_exponent(mu, order);
    let a2 = &d_half - &Jet::monomial(Scalar::one(), 2, order);
    Lde::from_factored(1, &d_half.scaled(&Scalar::from_int(-1)), &a2)
}

/// The degenerate rank-two family: the operator with exponent jets
/// `1` and `1 + x + x^2 + c x^3 / (1 + c x)`.
pub fn example1_equation(c: &Scalar, order: i64) -> Result<Lde> {
    let unit = &Jet::one(order) + &Jet::monomial(c.clone(), 1, order);
    let a2 = &Jet::poly_i64(0, &[1, 1, 1], order)
        + &(&Jet::monomial(c.clone(), 3, order) * &unit.inv()?);
    Lde::from_factored(2, &Jet::one(order), &a2)
}

/// The gauge component `f` conjugating the companion systems of the
/// family members with parameters `c` and `c~`: the upper-triangular
/// gauge with unit diagonal ratio data exists iff `f` solves
///
/// ```text
/// d_1 f = (c - c~) / (1 + c~ x) - (1 + x + c~ x^2 / (1 + c~ x)) f,
/// ```
///
/// which is triangular with unit slope at every degree, so the solve
/// always succeeds — the companion systems are all formally equivalent.
pub fn example1_gauge_oracle(c: &Scalar, c_tilde: &Scalar, order: i64) -> Result<Jet> {
    let tol = working_tol(c.is_exact() && c_tilde.is_exact());
    let unit_inv = (&Jet::one(order) + &Jet::monomial(c_tilde.clone(), 1, order)).inv()?;
    let forcing = unit_inv.scaled(&(c - c_tilde));
    let drag = &Jet::poly_i64(0, &[1, 1], order)
        + &(&Jet::monomial(c_tilde.clone(), 2, order) * &unit_inv);
    let solve = solve_triangular(
        |f| Ok(&(&forcing - &(&drag * f)) - &f.delta(1)),
        0,
        order,
        0,
        tol,
    )?;
    Ok(solve.solution)
}

/// The quadratic tail `g` of the change of variable `phi = x + x^2 g`
/// matching the pinned solution bases of two family members.  Taking
/// logarithms of the matching equation gives the saddle-node problem
///
/// ```text
/// g / (1 + x g) = log(1 + c x) - log(1 + c~ phi) + log(c~ / c)
///                 + 2 log(1 + x g) - log(1 + 2 x g + x^2 g'),
/// ```
///
/// whose degree-zero part forces `g(0) = log(c~ / c)`; the higher
/// degrees are triangular with unit slope.  The logarithm makes this a
/// float computation.
fn example1_transition(c: &Scalar, c_tilde: &Scalar, order: i64) -> Result<Jet> {
    if c.is_zero() || c_tilde.is_zero() {
        return Err(Error::InvalidInput(
            "the pinned solution bases need nonzero parameters".into(),
        ));
    }
    let cf = Scalar::from_c64(c.to_c64());
    let ctf = Scalar::from_c64(c_tilde.to_c64());
    let ratio = Scalar::from_c64((c_tilde.to_c64() / c.to_c64()).ln());
    let one = Jet::one(order);
    let log_cx = (&one + &Jet::monomial(cf, 1, order)).log()?;
    let two = Scalar::from_int(2);
    let solve = solve_triangular(
        |g| {
            let xg = &one + &g.shifted(1);
            let phi = xg.shifted(1);
            let drift = &(&one + &g.shifted(1).scaled(&two)) + &g.delta(1);
            Ok(&(&(&(&(&log_cx - &g.div(&xg)?) - &(&one + &phi.scaled(&ctf)).log()?)
                + &Jet::constant(ratio.clone(), order))
                + &xg.log()?.scaled(&two))
                - &drift.log()?)
        },
        0,
        order,
        0,
        working_tol(false),
    )?;
    Ok(solve.solution)
}

/// The change of variable `phi = x + x^2 g` matching the pinned solution
/// bases of the family members with parameters `c` and `c~`.  Unlike the
/// unpinned matching (whose tail starts at `(c - c~) x^3`), its quadratic
/// coefficient is the nonzero constant `log(c~ / c)`.
pub fn example1_phi(c: &Scalar, c_tilde: &Scalar, order: i64) -> Result<Jet> {
    let g = example1_transition(c, c_tilde, order)?;
    Ok(&Jet::x(order + 2) + &g.shifted(2))
}

/// The `x^-1` Laurent coefficient of `log t` for the gauge factor `t`
/// matching the pinned solution bases:
///
/// ```text
/// log t = log(c / c~) + 1 / (2 phi^2) - 1 / (2 x^2),
/// ```
///
/// with `phi` from [`example1_phi`].  The coefficient evaluates to
/// `-g(0) = log(c / c~)`, nonzero whenever `c != c~`: the family members
/// are then formally inequivalent as pinned equations even though their
/// companion systems are gauge-equivalent.
pub fn example1_formal_obstruction(c: &Scalar, c_tilde: &Scalar, order: i64) -> Result<Scalar> {
    if order < 1 {
        return Err(Error::InvalidInput(
            "the obstruction needs at least one jet coefficient".into(),
        ));
    }
    let g = example1_transition(c, c_tilde, order)?;
    let xg = &Jet::one(order) + &g.shifted(1);
    let laurent = (&xg.powi(-2)? - &Jet::one(order))
        .shifted(-2)
        .scaled(&Scalar::from_ratio(1, 2));
    laurent.coeff(-1)
}
