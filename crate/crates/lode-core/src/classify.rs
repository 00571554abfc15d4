//! Classification of the singularity at the origin and the associated formal
//! data: canonical invariants, formal normal forms, and the decision
//! procedures for formal and meromorphic equivalence.
//!
//! The classification keys off the discriminant jet `Delta = p^2 + 4q -
//! 2 delta_nu p`.  For `nu = 0` the equation is regular (Fuchsian) and the
//! invariant is the unordered pair of characteristic roots; resonance means
//! an integer root difference.  For `nu >= 1` the leading behaviour of
//! `Delta` separates the non-resonant (`Delta(0) != 0`), resonant
//! non-degenerate (`Delta(0) = 0`, `Delta'(0) != 0`, `p(0) = 0`) and
//! degenerate cases.

use crate::jet::Jet;
use crate::lde::{transform_discriminant, Lde, PointTransformation};
use crate::newton::solve_triangular;
use crate::regular;
use crate::scalar::Scalar;
use crate::{working_tol, Error, Result, VERIFY_TOL};

/// The singularity type of a minimal-rank equation at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    /// `nu = 0`, `p(0) = 1`, `q = O(x^2)`: an ordinary point in disguise.
    NonSingular,
    /// Regular with `lambda_1 - lambda_2` not an integer.
    RegularStrongNonres,
    /// Regular with `lambda_1 - lambda_2 = k` a non-negative integer.
    RegularResonant { k: u64 },
    /// `nu >= 1`, `Delta(0) != 0`.
    IrregularNonres,
    /// `nu >= 1`, `Delta(0) = 0`, `p(0) = 0`, `Delta'(0) != 0`.
    IrregularResNondeg,
    /// Everything else; outside the scope of the normal-form machinery.
    Degenerate,
}

impl SingularityClass {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, SingularityClass::Degenerate)
    }

    pub fn is_regular(&self) -> bool {
        matches!(
            self,
            SingularityClass::NonSingular
                | SingularityClass::RegularStrongNonres
                | SingularityClass::RegularResonant { .. }
        )
    }
}

impl std::fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularityClass::NonSingular => write!(f, "NON_SINGULAR"),
            SingularityClass::RegularStrongNonres => write!(f, "REGULAR_STRONG_NONRES"),
            SingularityClass::RegularResonant { k } => write!(f, "REGULAR_RESONANT({k})"),
            SingularityClass::IrregularNonres => write!(f, "IRREGULAR_NONRES"),
            SingularityClass::IrregularResNondeg => write!(f, "IRREGULAR_RES_NONDEG"),
            SingularityClass::Degenerate => write!(f, "DEGENERATE"),
        }
    }
}

/// The rotation stabilizer of a canonical invariant: a subgroup of the
/// cyclic group `Z_ambient` (ambient `2 nu` in the non-resonant case,
/// `2 nu - 1` in the resonant one), stored by its smallest positive
/// generator.  `generator == ambient` encodes the trivial subgroup `{0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryGroup {
    pub ambient: u32,
    pub generator: u32,
}

impl SymmetryGroup {
    pub fn order(&self) -> u32 {
        self.ambient / self.generator
    }

    pub fn contains(&self, g: u32) -> bool {
        (g % self.ambient) % self.generator == 0
    }

    /// All elements, in increasing order.
    pub fn elements(&self) -> Vec<u32> {
        (0..self.order()).map(|j| j * self.generator).collect()
    }
}

impl std::fmt::Display for SymmetryGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{}> in Z_{}", self.generator % self.ambient, self.ambient)
    }
}

/// The canonical formal invariant of a non-degenerate equation.
#[derive(Debug, Clone)]
pub enum FormalInvariant {
    /// `nu = 0`: the roots of `lambda^2 - p(0) lambda - q(0)`, ordered by
    /// decreasing real part (ties by imaginary part).
    Regular { lambda1: Scalar, lambda2: Scalar },
    /// `nu >= 1`, `Delta(0) != 0`: the `nu`-jets of the characteristic
    /// roots in canonical position `lambda2 - lambda1 = 1 + mu x^nu`,
    /// lex-minimized over the residual rotation orbit `Z_{2 nu}`.
    Nonres {
        lambda1: Jet,
        lambda2: Jet,
        mu: Scalar,
        group: SymmetryGroup,
    },
    /// `nu >= 1` resonant non-degenerate: the `nu`-jet of `p` once the
    /// discriminant jet is normalized to `x`, lex-minimized over
    /// `Z_{2 nu - 1}`.
    ResNondeg { p_jet: Jet, group: SymmetryGroup },
}

impl FormalInvariant {
    /// The symmetry group, when one is defined (irregular cases).
    pub fn group(&self) -> Option<SymmetryGroup> {
        match self {
            FormalInvariant::Regular { .. } => None,
            FormalInvariant::Nonres { group, .. } => Some(*group),
            FormalInvariant::ResNondeg { group, .. } => Some(*group),
        }
    }
}

/// Tolerance for degree-by-degree solves and invariant comparisons: exact
/// data is decided exactly; float data at [`VERIFY_TOL`], the honest noise
/// floor of composed float jets (inputs of moderate size).
fn solve_tol(exact: bool) -> f64 {
    if exact {
        0.0
    } else {
        VERIFY_TOL
    }
}

/// Classify an exact-mode equation.  Zero tests and the integer-square
/// resonance test are decided exactly; float inputs must go through
/// [`classify_tol`].
pub fn classify(e: &Lde) -> Result<SingularityClass> {
    if !e.is_exact() {
        return Err(Error::ExactnessRequired);
    }
    classify_with(e, 0.0)
}

/// Classify with an explicit tolerance for zero and resonance tests; works
/// in both modes.
pub fn classify_tol(e: &Lde, tol: f64) -> Result<SingularityClass> {
    classify_with(e, tol)
}

fn classify_with(e: &Lde, tol: f64) -> Result<SingularityClass> {
    let p0 = e.p().coeff(0)?;
    if e.nu() == 0 {
        // Written classically, the equation is y'' + (1-p)/x y' - q/x^2 y = 0;
        // the point is ordinary exactly when both coefficients are analytic.
        let q0 = e.q().coeff(0)?;
        let q1 = e.q().coeff(1)?;
        if (&p0 - &Scalar::one()).is_zero_tol(tol) && q0.is_zero_tol(tol) && q1.is_zero_tol(tol) {
            return Ok(SingularityClass::NonSingular);
        }
        let d0 = e.discriminant().coeff(0)?;
        return Ok(match d0.as_square_int(tol) {
            Some(k) => SingularityClass::RegularResonant { k },
            None => SingularityClass::RegularStrongNonres,
        });
    }
    let d0 = e.discriminant().coeff(0)?;
    if !d0.is_zero_tol(tol) {
        return Ok(SingularityClass::IrregularNonres);
    }
    let d1 = e.discriminant().coeff(1)?;
    if p0.is_zero_tol(tol) && !d1.is_zero_tol(tol) {
        return Ok(SingularityClass::IrregularResNondeg);
    }
    Ok(SingularityClass::Degenerate)
}

/// `e^(2 pi i k / n)`, exact for quarter turns and float otherwise.
pub fn root_of_unity(k: i64, n: i64) -> Scalar {
    let r = k.rem_euclid(n);
    if (4 * r) % n == 0 {
        match 4 * r / n {
            0 => Scalar::one(),
            1 => Scalar::i(),
            2 => -&Scalar::one(),
            _ => -&Scalar::i(),
        }
    } else {
        let angle = 2.0 * std::f64::consts::PI * (r as f64) / (n as f64);
        Scalar::from_c64(num_complex::Complex64::from_polar(1.0, angle))
    }
}

/// Rebuild a jet's known terms on a (usually larger) order window.  Only
/// meaningful for jets that are complete polynomials, like canonical
/// invariant data; the added coefficients are genuinely zero there.
fn as_polynomial(j: &Jet, order: i64) -> Jet {
    let terms: Vec<(i64, Scalar)> = j.terms().map(|(e, c)| (e, c.clone())).collect();
    Jet::from_terms(&terms, order)
}

/// Normalize the discriminant jet by a change of variable `phi`:
/// to the constant `Delta(0)` (`nu = 0`), to `(1 + mu x^nu)^2`
/// (`nu >= 1`, `Delta(0) != 0`), or to `x` (resonant non-degenerate).
/// Returns `phi` and the transformed equation, which satisfies
/// `e = normalized.apply_transformation(phi, t = 1)`.
pub fn normalize_quadratic_differential(e: &Lde) -> Result<(Jet, Lde)> {
    let class = classify_with(e, working_tol(e.is_exact()))?;
    if class.is_degenerate() {
        return Err(Error::DegenerateInput);
    }
    let nu = e.nu();
    let delta = e.discriminant().clone();
    let n = delta.order();
    let res = matches!(class, SingularityClass::IrregularResNondeg);

    // Leading coefficient of phi, fixed by the degree where the target has
    // its first nonzero coefficient; the remaining degrees are solved one by
    // one below.
    let c = if nu == 0 {
        Scalar::one()
    } else if res {
        delta.coeff(1)?.inv()?.nth_root(2 * nu - 1)?
    } else {
        delta.coeff(0)?.inv()?.nth_root(2 * nu)?
    };
    // An irrational root demotes the whole solve to float arithmetic even
    // for an exact input equation.
    let tol = solve_tol(e.is_exact() && c.is_exact());

    let d0 = delta.coeff(0)?;
    let nu_i = nu as i64;
    // The residual compares the discriminant transported into the new
    // variable against the target shape.  The `mu` of the non-resonant
    // target is read off the transported jet itself: probing degrees above
    // `nu` never disturbs it, so the solve stays triangular.
    let residual = |w: &Jet| -> Result<Jet> {
        let phi = transported_phi(&c, w, n + 1);
        let tr = PointTransformation::analytic(phi.clone(), Jet::one(n + 1))?;
        let psi = tr.psi(nu)?;
        let u = psi.dlog(nu)?;
        let pulled = &(&delta - &(&u * &u)) + &u.delta(nu).scaled(&Scalar::from_int(2));
        let a = pulled.div(&(&psi * &psi))?;
        let cur = a.compose(&phi.reverse()?)?;
        let target = if nu == 0 {
            Jet::constant(d0.clone(), cur.order())
        } else if res {
            Jet::x(cur.order())
        } else {
            let mu = cur.coeff(nu_i)?.mul_rat(&num_rational::BigRational::new(
                num_bigint::BigInt::from(1),
                num_bigint::BigInt::from(2),
            ));
            let d = &Jet::one(cur.order()) + &Jet::monomial(mu, nu_i, cur.order());
            &d * &d
        };
        Ok(&cur - &target)
    };

    let offset = if res { 1 } else { 0 };
    let solved = solve_triangular(residual, 1, n - offset, offset, tol)?;
    let phi = transported_phi(&c, &solved.solution, n + 1);
    let tr = PointTransformation::analytic(phi.clone(), Jet::one(n + 1))?;
    let normalized = e.apply_inverse(&tr)?;

    // The solve worked on the transported discriminant; make sure the
    // equation-level transform agrees before handing the result out.
    let nd = normalized.discriminant();
    let target = if nu == 0 {
        Jet::constant(d0, nd.order())
    } else if res {
        Jet::x(nd.order())
    } else {
        let mu = half(&nd.coeff(nu_i)?);
        let d = &Jet::one(nd.order()) + &Jet::monomial(mu, nu_i, nd.order());
        &d * &d
    };
    if !nd.eq_tol(&target, tol.max(VERIFY_TOL * if e.is_exact() { 0.0 } else { 1.0 })) {
        return Err(Error::ResidualTooLarge {
            residual: nd.residual_sup(&target),
            tol,
        });
    }
    Ok((phi, normalized))
}

fn transported_phi(c: &Scalar, w: &Jet, order: i64) -> Jet {
    let x = Jet::x(order);
    &x.scaled(c) + &(&x * w)
}

fn half(s: &Scalar) -> Scalar {
    s.mul_rat(&num_rational::BigRational::new(
        num_bigint::BigInt::from(1),
        num_bigint::BigInt::from(2),
    ))
}

/// The formal invariant of `e`: the representative induced by the
/// tangent-to-identity normalization of the quadratic differential.  The
/// full invariant is this data up to the finite rotation group recorded in
/// `group`; equality tests must quotient by it (as `formal_equivalence`
/// does), but keeping the raw representative makes
/// `formal_equivalence(e, formal_normal_form(..))` succeed with a
/// transformation tangent to the identity.
pub fn formal_invariants(e: &Lde) -> Result<FormalInvariant> {
    let tol = working_tol(e.is_exact());
    let class = classify_with(e, tol)?;
    match class {
        SingularityClass::Degenerate => Err(Error::DegenerateInput),
        SingularityClass::NonSingular
        | SingularityClass::RegularStrongNonres
        | SingularityClass::RegularResonant { .. } => {
            let (l1, l2) = regular_roots(e)?;
            Ok(FormalInvariant::Regular {
                lambda1: l1,
                lambda2: l2,
            })
        }
        SingularityClass::IrregularNonres => {
            let (_, en) = normalize_quadratic_differential(e)?;
            let nu = e.nu() as i64;
            let p_hat = en.p().truncated(nu);
            let mu = half(&en.discriminant().coeff(nu)?);
            Ok(canonicalize_nonres(e.nu(), &p_hat, &mu, solve_tol(en.is_exact())))
        }
        SingularityClass::IrregularResNondeg => {
            let (_, en) = normalize_quadratic_differential(e)?;
            let nu = e.nu() as i64;
            let p_hat = en.p().truncated(nu);
            Ok(canonicalize_res(e.nu(), &p_hat, solve_tol(en.is_exact())))
        }
    }
}

/// The characteristic roots at a regular singular point, ordered by
/// decreasing real part (ties by decreasing imaginary part).
pub(crate) fn regular_roots(e: &Lde) -> Result<(Scalar, Scalar)> {
    let p0 = e.p().coeff(0)?;
    let d0 = e.discriminant().coeff(0)?;
    // The pair is unordered, so either square root will do; float inputs on
    // the branch cut must not error here.
    let sd = if d0.is_exact() {
        d0.sqrt()?
    } else {
        Scalar::from_c64(d0.to_c64().sqrt())
    };
    let l1 = half(&(&p0 + &sd));
    let l2 = half(&(&p0 - &sd));
    Ok(order_root_pair(l1, l2))
}

fn order_root_pair(a: Scalar, b: Scalar) -> (Scalar, Scalar) {
    let ka = (a.re_f64(), a.im_f64());
    let kb = (b.re_f64(), b.im_f64());
    if kb > ka {
        (b, a)
    } else {
        (a, b)
    }
}

/// Apply the rotation `x -> rho x`, `rho = e^(2 pi i g / ambient)`, to
/// normalized invariant data: the coefficient at degree `k` picks up
/// `rho^(k - nu)`.
fn rotate_invariant_jet(p_hat: &Jet, nu: i64, g: i64, ambient: i64) -> Jet {
    p_hat.map_coeffs(|k, c| c * &root_of_unity(g * (k - nu), ambient))
}

fn stabilizer(
    p_hat: &Jet,
    mu: Option<&Scalar>,
    nu: i64,
    ambient: i64,
    tol: f64,
) -> SymmetryGroup {
    let preserved = |g: i64| -> bool {
        if let Some(m) = mu {
            let sign = if g % 2 == 0 {
                Scalar::one()
            } else {
                -&Scalar::one()
            };
            if !(m * &sign).eq_tol(m, tol) {
                return false;
            }
        }
        rotate_invariant_jet(p_hat, nu, g, ambient).eq_tol(p_hat, tol)
    };
    let generator = (1..ambient)
        .find(|&g| preserved(g))
        .unwrap_or(ambient) as u32;
    SymmetryGroup {
        ambient: ambient as u32,
        generator,
    }
}

fn canonicalize_nonres(nu: u32, p_hat: &Jet, mu: &Scalar, tol: f64) -> FormalInvariant {
    let nu_i = nu as i64;
    let ambient = 2 * nu_i;
    let group = stabilizer(p_hat, Some(mu), nu_i, ambient, tol);
    let d = &Jet::one(nu_i) + &Jet::monomial(mu.clone(), nu_i, nu_i);
    let lambda1 = (p_hat - &d).scaled(&half(&Scalar::one()));
    let lambda2 = (p_hat + &d).scaled(&half(&Scalar::one()));
    FormalInvariant::Nonres {
        lambda1,
        lambda2,
        mu: mu.clone(),
        group,
    }
}

fn canonicalize_res(nu: u32, p_hat: &Jet, tol: f64) -> FormalInvariant {
    let nu_i = nu as i64;
    let ambient = 2 * nu_i - 1;
    let group = stabilizer(p_hat, None, nu_i, ambient, tol);
    FormalInvariant::ResNondeg {
        p_jet: p_hat.clone(),
        group,
    }
}

/// Substitute `x = s^2`, producing a jet in the square-root variable `s`.
fn to_sqrt_variable(j: &Jet, s_order: i64) -> Result<Jet> {
    j.compose(&Jet::monomial(Scalar::one(), 2, s_order))
}

/// Halve all exponents of a jet in the square-root variable, demanding that
/// no odd (i.e. genuinely half-integer) power survived.
fn from_sqrt_variable(j: &Jet, tol: f64) -> Result<Jet> {
    let mut terms = Vec::new();
    for (e, c) in j.terms() {
        if e.rem_euclid(2) == 1 {
            if !c.is_zero_tol(tol) {
                return Err(Error::InvalidInput(
                    "half-integer exponents must cancel in emitted equation data".into(),
                ));
            }
            continue;
        }
        terms.push((e / 2, c.clone()));
    }
    Ok(Jet::from_terms(&terms, j.order().div_euclid(2)))
}

/// Build the formal normal form attached to an irregular invariant, with
/// all jets truncated at `order`.
pub fn formal_normal_form(inv: &FormalInvariant, nu: u32, order: i64) -> Result<Lde> {
    match inv {
        FormalInvariant::Regular { .. } => Err(Error::InvalidInput(
            "regular-case normal forms are produced by the regular module".into(),
        )),
        FormalInvariant::Nonres {
            lambda1, lambda2, ..
        } => {
            let l1 = as_polynomial(lambda1, order);
            let l2 = as_polynomial(lambda2, order);
            let d = &l2 - &l1;
            let s = &l1 + &l2;
            let l = d.dlog(nu)?;
            let p = &s + &l;
            let q = &(&s.delta(nu) - &(&s * &l)).scaled(&half(&Scalar::one())) - &(&l1 * &l2);
            Lde::new(nu, p, q)
        }
        FormalInvariant::ResNondeg { p_jet, .. } => {
            // Route the construction through the square-root variable
            // `s = x^(1/2)` in which the two characteristic roots separate;
            // only whole powers of `x` may survive in the emitted data.
            let tol = working_tol(p_jet.is_exact());
            let so = 2 * order + 1;
            let nu_i = nu as i64;
            let p_s = to_sqrt_variable(&as_polynomial(p_jet, order), so)?;
            let x_s = Jet::monomial(Scalar::one(), 2, so);
            let xnu_s = Jet::monomial(Scalar::one(), 2 * nu_i, so);
            let x2nu_s = Jet::monomial(Scalar::one(), 4 * nu_i, so);
            let dp_s = p_s.delta(2 * nu).scaled(&half(&Scalar::one()));
            let coeff = Scalar::from_ratio(4 * nu_i + 1, 4);
            let q_s = (&(&(&(&x_s - &(&p_s * &p_s)) + &(&xnu_s * &p_s)) - &x2nu_s.scaled(&coeff))
                + &dp_s.scaled(&Scalar::from_int(2)))
                .scaled(&Scalar::from_ratio(1, 4));
            let q = from_sqrt_variable(&q_s, tol)?;
            let p = as_polynomial(p_jet, order);
            Lde::new(nu, p, q)
        }
    }
}

/// Decide formal equivalence of two equations and produce transformation
/// jets to order `n` when they are equivalent.  The change of variable is
/// assembled as (normalize e2) -> rotate -> tangent transformation ->
/// (un-normalize e1); the tangent stage carries the one-parameter freedom
/// `phi = x + t_param x^(nu+1) + O(x^(nu+2))` of the non-resonant case.
/// Convergence of the returned series is not decided.
pub fn formal_equivalence(
    e1: &Lde,
    e2: &Lde,
    n: i64,
    t_param: &Scalar,
) -> Result<Option<PointTransformation>> {
    let exact = e1.is_exact() && e2.is_exact();
    let c1 = classify_with(e1, working_tol(e1.is_exact()))?;
    let c2 = classify_with(e2, working_tol(e2.is_exact()))?;
    if c1.is_degenerate() || c2.is_degenerate() {
        return Err(Error::DegenerateInput);
    }
    if e1.nu() != e2.nu() || c1 != c2 {
        return Ok(None);
    }
    if e1.nu() == 0 {
        return regular::equivalence_witness(e1, e2, n, t_param);
    }

    let nu = e1.nu();
    let res = matches!(c1, SingularityClass::IrregularResNondeg);
    let (phi1, en1) = normalize_quadratic_differential(e1)?;
    let (phi2, en2) = normalize_quadratic_differential(e2)?;
    let tn1 = PointTransformation::analytic(phi1, Jet::one(e1.order() + 1))?;
    let tn2 = PointTransformation::analytic(phi2, Jet::one(e2.order() + 1))?;
    let ambient = if res { 2 * nu as i64 - 1 } else { 2 * nu as i64 };
    // Normalization may have demoted exact inputs to float (irrational
    // leading root); rotations by non-quarter turns do the same.
    let exact_n = exact && en1.is_exact() && en2.is_exact();

    let mut failed_candidate: Option<Error> = None;
    for g in 0..ambient {
        let rho = root_of_unity(g, ambient);
        let ord = en2.order() + 1;
        let rot = PointTransformation::analytic(Jet::x(ord).scaled(&rho), Jet::one(ord))?;
        let en2r = en2.apply_transformation(&rot)?;
        let exact_g = exact_n && rho.is_exact();
        let tt = match tangent_solve(&en1, &en2r, nu, res, t_param, solve_tol(exact_g)) {
            Ok(Some(t)) => t,
            Ok(None) => continue,
            Err(Error::ResonantObstruction { .. }) => continue,
            Err(err @ Error::ResidualTooLarge { .. }) => {
                // A numerically failed candidate must not abort the search:
                // another rotation may solve cleanly.  Remember the failure
                // so an all-candidates-failed outcome stays distinguishable
                // from a genuine invariant mismatch.
                failed_candidate = Some(err);
                continue;
            }
            Err(err) => return Err(err),
        };
        let total = tn2.inverse()?.then(&rot)?.then(&tt)?.then(&tn1)?;
        let check = e2.apply_transformation(&total)?;
        let vtol = if exact_g {
            0.0
        } else {
            VERIFY_TOL * e1.p().sup_norm().max(e1.q().sup_norm()).max(1.0)
        };
        if check.eq_tol(e1, vtol) {
            let have = total.phi().order();
            if have < n {
                return Err(Error::OrderExhausted { need: n, have });
            }
            let trimmed = PointTransformation::new(
                total.phi().truncated(n),
                total.t().truncated(n.min(total.t().order())),
                total.shift_m(),
            )?;
            return Ok(Some(trimmed));
        }
    }
    match failed_candidate {
        Some(err) => Err(err),
        None => Ok(None),
    }
}

/// Solve for a tangent-to-identity transformation between two equations
/// whose discriminants are already in the same canonical shape: first the
/// change of variable degree by degree on the discriminant law, then the
/// gauge `t` from the trace law.  A mismatch of invariants surfaces as a
/// resonant obstruction (mapped to `None`) or as a trace defect below
/// `x^(nu+1)`.
fn tangent_solve(
    ea: &Lde,
    eb: &Lde,
    nu: u32,
    res: bool,
    t_param: &Scalar,
    tol: f64,
) -> Result<Option<PointTransformation>> {
    let nu_i = nu as i64;
    let da = ea.discriminant().clone();
    let db = eb.discriminant().clone();
    // Float-path tolerances must scale with the data: discriminant
    // coefficients of transformed equations grow combinatorially with the
    // order, so an absolute residual test at machine-noise level would
    // reject genuinely solvable instances.  Exact runs pass tol = 0 and are
    // unaffected.
    let tol = tol * da.sup_norm().max(db.sup_norm()).max(1.0);
    let n = da.order().min(db.order());
    let base = Jet::monomial(t_param.clone(), nu_i, n);

    let residual = |w: &Jet| -> Result<Jet> {
        let w_eff = if res { w.clone() } else { w + &base };
        let x = Jet::x(n + 1);
        let phi = &x + &(&x * &w_eff);
        let tr = PointTransformation::analytic(phi, Jet::one(n + 1))?;
        Ok(&transform_discriminant(&db, nu, &tr)? - &da)
    };

    let offset = if res { 1 } else { 0 };
    let solved = match solve_triangular(residual, nu_i, n - offset, offset, tol) {
        Ok(s) => s,
        Err(Error::ResonantObstruction { .. }) => return Ok(None),
        Err(err) => return Err(err),
    };
    let w = if res {
        solved.solution
    } else {
        &solved.solution + &base
    };
    let x = Jet::x(n + 1);
    let phi = &x + &(&x * &w);
    let tr_phi = PointTransformation::analytic(phi.clone(), Jet::one(n + 1))?;

    // Trace law: p_a = psi (p_b o phi) + dlog psi - 2 dlog t.  The gauge
    // exists iff the defect is divisible by x^(nu+1).
    let psi = tr_phi.psi(nu)?;
    let u = psi.dlog(nu)?;
    let s_t = (&(&(&psi * &eb.p().compose(&phi)?) + &u) - ea.p()).scaled(&half(&Scalar::one()));
    for k in s_t.val()..=(nu_i.min(s_t.order())) {
        if !s_t.coeff(k)?.is_zero_tol(tol.max(VERIFY_TOL * if s_t.is_exact() { 0.0 } else { 1.0 }))
        {
            return Ok(None);
        }
    }
    let mut theta_terms = Vec::new();
    for k in 1..=(s_t.order() - nu_i) {
        let c = if k + nu_i < s_t.val() {
            Scalar::zero()
        } else {
            s_t.coeff(k + nu_i)?.div(&Scalar::from_int(k))?
        };
        theta_terms.push((k, c));
    }
    let theta = Jet::from_terms(&theta_terms, s_t.order() - nu_i);
    let t = theta.exp()?;
    Ok(Some(PointTransformation::analytic(phi, t)?))
}

/// Decide whether two same-class equations have matching invariants up to
/// the meromorphic shift `p-jet -> p-jet - 2 m x^nu`, returning the shift.
/// The discriminant data must match outright (it is blind to the shift).
pub fn meromorphic_invariant_match(e1: &Lde, e2: &Lde) -> Result<Option<i64>> {
    let exact = e1.is_exact() && e2.is_exact();
    let tol = working_tol(exact);
    let c1 = classify_with(e1, working_tol(e1.is_exact()))?;
    let c2 = classify_with(e2, working_tol(e2.is_exact()))?;
    if c1.is_degenerate() || c2.is_degenerate() {
        return Err(Error::DegenerateInput);
    }
    // A shift by x^m turns an ordinary point into a resonant regular one
    // with k = 1; compare classes modulo that renaming.
    let key = |c: SingularityClass| match c {
        SingularityClass::NonSingular => SingularityClass::RegularResonant { k: 1 },
        other => other,
    };
    if e1.nu() != e2.nu() || key(c1) != key(c2) {
        return Ok(None);
    }

    if e1.nu() == 0 {
        let d1 = e1.discriminant().coeff(0)?;
        let d2 = e2.discriminant().coeff(0)?;
        if !d1.eq_tol(&d2, tol) {
            return Ok(None);
        }
        let m = half(&(&e1.p().coeff(0)? - &e2.p().coeff(0)?));
        return Ok(m.as_integer(tol).and_then(|b| i64::try_from(b).ok()));
    }

    let nu = e1.nu() as i64;
    let res = matches!(c1, SingularityClass::IrregularResNondeg);
    let ambient = if res { 2 * nu - 1 } else { 2 * nu };
    let (_, en1) = normalize_quadratic_differential(e1)?;
    let (_, en2) = normalize_quadratic_differential(e2)?;
    let p1 = en1.p().truncated(nu);
    let p2 = en2.p().truncated(nu);
    let mu1 = half(&en1.discriminant().coeff(nu)?);
    let mu2 = half(&en2.discriminant().coeff(nu)?);

    // Exact data rotated by an irrational root of unity still needs a hair
    // of slack; genuinely float data compares at the verification scale.
    let cmp_tol = if en1.is_exact() && en2.is_exact() {
        1e-12
    } else {
        VERIFY_TOL
    };
    for g in 0..ambient {
        if !res {
            let sign = if g % 2 == 0 {
                Scalar::one()
            } else {
                -&Scalar::one()
            };
            if !(&mu2 * &sign).eq_tol(&mu1, cmp_tol) {
                continue;
            }
        }
        let rot = rotate_invariant_jet(&p2, nu, g, ambient);
        let mut ok = true;
        for k in 0..nu {
            let a = p1.coeff(k)?;
            let b = rot.coeff(k)?;
            if !a.eq_tol(&b, cmp_tol) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let m = half(&(&p1.coeff(nu)? - &rot.coeff(nu)?));
        if let Some(b) = m.as_integer(cmp_tol) {
            if let Ok(m) = i64::try_from(b) {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}
