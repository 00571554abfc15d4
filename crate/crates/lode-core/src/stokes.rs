//! Analytic invariants beyond the formal level: projective Stokes data and
//! the closed-form invariants available at Poincare rank one.
//!
//! At an irregular non-resonant singularity the quotient of two canonical
//! sectoral solutions is rigid up to a Moebius action, and crossing a
//! singular direction acts on it by either a translation `f -> f + s_l`
//! (odd `l`, where the exponential factor explodes) or a "flat" map
//! `f -> f/(1 + s_l f)` (even `l`).  The collection of multipliers `s_l`,
//! up to a simultaneous scalar conjugation and a rotation from the residual
//! symmetry group of the formal class, is a complete analytic invariant on
//! top of the formal one.  In the resonant case the two solutions swap on a
//! square-root cover, the count of directions drops to `2 nu - 1`, and the
//! rotation action carries no scalar freedom.
//!
//! General multipliers are input data (produced by resummation outside this
//! crate, or by fixtures); what is computed here is the rank-one family:
//! for `nu = 1` the monodromy matrix `M` of the companion system determines
//! `cos pi sqrt(Delta^(2) + 1)` and the product `s_0 s_pi` through trace
//! identities, and for explicitly reducible equations the multiplier of the
//! non-trivial side is a Gamma-function expression obtained from the Borel
//! transform of the recessive solution.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::classify::{self, FormalInvariant, SymmetryGroup};
use crate::error::{Error, Result};
use crate::gamma::{gamma, recip_gamma};
use crate::jet::Jet;
use crate::lde::Lde;
use crate::monodromy::{numeric_monodromy, suggested_radius};
use crate::scalar::Scalar;
use crate::{MONODROMY_TOL, VERIFY_TOL};

/// How a Stokes operator acts on the quotient coordinate `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `f -> f + s` (the exponential between the two solutions explodes).
    Translation,
    /// `f -> f / (1 + s f)` (the exponential is flat).
    MoebiusFlat,
}

impl OperatorKind {
    /// The parity rule: odd directions translate, even directions are flat.
    pub fn of_index(l: i64) -> OperatorKind {
        if l.rem_euclid(2) == 1 {
            OperatorKind::Translation
        } else {
            OperatorKind::MoebiusFlat
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StokesVariant {
    /// `2 nu` directions `beta_l = l pi / nu`; continuation around the
    /// origin multiplies the quotient by `exp(2 pi i mu)`.
    NonResonant { mu: Scalar },
    /// `2 nu - 1` directions `beta_l = 2 l pi / (2 nu - 1)`; continuation
    /// inverts the quotient, so the extension is plain `2 nu - 1`-periodic.
    Resonant,
}

/// The multipliers `s_l` of the projective Stokes operators of an
/// irregular singularity, indexed by the singular directions in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesCollection {
    nu: u32,
    variant: StokesVariant,
    multipliers: Vec<Scalar>,
}

impl StokesCollection {
    pub fn non_resonant(nu: u32, mu: Scalar, multipliers: Vec<Scalar>) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidInput(
                "Stokes data requires an irregular singularity (nu >= 1)".into(),
            ));
        }
        if multipliers.len() != 2 * nu as usize {
            return Err(Error::InvalidInput(format!(
                "a non-resonant rank-{nu} collection has {} multipliers, got {}",
                2 * nu,
                multipliers.len()
            )));
        }
        Ok(StokesCollection {
            nu,
            variant: StokesVariant::NonResonant { mu },
            multipliers,
        })
    }

    pub fn resonant(nu: u32, multipliers: Vec<Scalar>) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidInput(
                "Stokes data requires an irregular singularity (nu >= 1)".into(),
            ));
        }
        if multipliers.len() != 2 * nu as usize - 1 {
            return Err(Error::InvalidInput(format!(
                "a resonant rank-{nu} collection has {} multipliers, got {}",
                2 * nu - 1,
                multipliers.len()
            )));
        }
        Ok(StokesCollection {
            nu,
            variant: StokesVariant::Resonant,
            multipliers,
        })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn variant(&self) -> &StokesVariant {
        &self.variant
    }

    /// The continuation constant, in the non-resonant case.
    pub fn mu(&self) -> Option<&Scalar> {
        match &self.variant {
            StokesVariant::NonResonant { mu } => Some(mu),
            StokesVariant::Resonant => None,
        }
    }

    pub fn multipliers(&self) -> &[Scalar] {
        &self.multipliers
    }

    /// Number of singular directions in one turn.
    pub fn count(&self) -> usize {
        self.multipliers.len()
    }

    /// The direction angle `beta_l` of the `l`-th operator.
    pub fn direction(&self, l: usize) -> f64 {
        match self.variant {
            StokesVariant::NonResonant { .. } => l as f64 * PI / self.nu as f64,
            StokesVariant::Resonant => 2.0 * l as f64 * PI / (2.0 * self.nu as f64 - 1.0),
        }
    }

    pub fn kind(&self, l: i64) -> OperatorKind {
        OperatorKind::of_index(l)
    }

    pub fn is_exact(&self) -> bool {
        let mu_exact = match &self.variant {
            StokesVariant::NonResonant { mu } => mu.is_exact(),
            StokesVariant::Resonant => true,
        };
        mu_exact && self.multipliers.iter().all(Scalar::is_exact)
    }

    /// The multiplier at an arbitrary integer index, using the extension
    /// rule: non-resonant wraps scale translations by `exp(2 pi i mu)` and
    /// flat operators by its inverse; resonant wraps conjugate by the
    /// inversion, which swaps the operator kind but keeps the multiplier.
    pub fn extended_multiplier(&self, l: i64) -> Scalar {
        let period = self.count() as i64;
        let l0 = l.rem_euclid(period);
        let s = self.multipliers[l0 as usize].clone();
        match &self.variant {
            StokesVariant::Resonant => s,
            StokesVariant::NonResonant { mu } => {
                let wraps = (l - l0) / period;
                if wraps == 0 {
                    return s;
                }
                let signed = match OperatorKind::of_index(l0) {
                    OperatorKind::Translation => wraps,
                    OperatorKind::MoebiusFlat => -wraps,
                };
                let factor = exp_two_pi_i(mu)
                    .powi(signed as i32)
                    .expect("exp(2 pi i mu) is nonzero");
                &factor * &s
            }
        }
    }

    fn trivial_on(&self, tol: f64, want: impl Fn(i64) -> bool) -> bool {
        self.multipliers
            .iter()
            .enumerate()
            .filter(|(l, _)| want(*l as i64))
            .all(|(_, s)| s.is_zero_tol(tol))
    }

    /// All multipliers vanish: the quotient coordinate is single-sheeted.
    pub fn is_trivial(&self, tol: f64) -> bool {
        self.trivial_on(tol, |_| true)
    }

    /// All translation (odd-index) multipliers vanish.
    pub fn odd_trivial(&self, tol: f64) -> bool {
        self.trivial_on(tol, |l| l.rem_euclid(2) == 1)
    }

    /// All flat (even-index) multipliers vanish.
    pub fn even_trivial(&self, tol: f64) -> bool {
        self.trivial_on(tol, |l| l.rem_euclid(2) == 0)
    }

    /// The collection seen after rotating by `g` directions and rescaling
    /// the quotient coordinate by `c`: the new `l`-th multiplier comes from
    /// the extended multiplier at `l + g`, divided by `c` when the source
    /// operator translates and multiplied by `c` when it is flat.  In the
    /// resonant case there is no scalar freedom and `c` must be `1`.
    pub fn transformed(&self, c: &Scalar, g: u32) -> Result<StokesCollection> {
        if c.is_zero() {
            return Err(Error::InvalidInput(
                "the conjugation scalar must be nonzero".into(),
            ));
        }
        let mult = match &self.variant {
            StokesVariant::Resonant => {
                if !(c - &Scalar::one()).is_zero_tol(1e-12) {
                    return Err(Error::InvalidInput(
                        "resonant collections admit no conjugation scalar".into(),
                    ));
                }
                (0..self.count())
                    .map(|l| self.extended_multiplier(l as i64 + g as i64))
                    .collect()
            }
            StokesVariant::NonResonant { .. } => {
                let mut v = Vec::with_capacity(self.count());
                for l in 0..self.count() {
                    let src = l as i64 + g as i64;
                    let s = self.extended_multiplier(src);
                    let s = match OperatorKind::of_index(src) {
                        OperatorKind::Translation => s.div(c)?,
                        OperatorKind::MoebiusFlat => &s * c,
                    };
                    v.push(s);
                }
                v
            }
        };
        Ok(StokesCollection {
            nu: self.nu,
            variant: self.variant.clone(),
            multipliers: mult,
        })
    }
}

/// `exp(2 pi i mu)`, kept exact (a fourth root of unity) whenever `4 mu`
/// is an exact small integer.
fn exp_two_pi_i(mu: &Scalar) -> Scalar {
    if let Scalar::Exact { re, im } = mu {
        if num_traits::Zero::is_zero(im) {
            if let (Some(n), Some(d)) = (re.numer().to_i64(), re.denom().to_i64()) {
                return classify::root_of_unity(n, d);
            }
        }
    }
    let z = mu.to_c64();
    Scalar::from_c64((Complex64::new(0.0, 2.0 * PI) * z).exp())
}

fn cmp_tol(a: &StokesCollection, b: &StokesCollection) -> f64 {
    if a.is_exact() && b.is_exact() {
        0.0
    } else {
        VERIFY_TOL
    }
}

/// Decide whether two Stokes collections describe the same analytic class
/// on top of a common formal one, searching the rotation subgroup `group`
/// (a subgroup of `Z_{2 nu}`, resonant: `Z_{2 nu - 1}`) and, in the
/// non-resonant case, solving for the conjugation scalar `c`.  Returns a
/// witness `(c, g)` such that `b` equals `a.transformed(c, g)`, or `None`.
/// Collections of different shape are never equivalent.
pub fn stokes_equivalent(
    a: &StokesCollection,
    b: &StokesCollection,
    group: &SymmetryGroup,
) -> Option<(Scalar, u32)> {
    if a.nu != b.nu || a.count() != b.count() {
        return None;
    }
    if group.ambient != a.count() as u32 {
        return None;
    }
    let tol = cmp_tol(a, b);
    match (&a.variant, &b.variant) {
        (StokesVariant::Resonant, StokesVariant::Resonant) => {
            for g in group.elements() {
                let ok = (0..a.count()).all(|l| {
                    let s = a.extended_multiplier(l as i64 + g as i64);
                    b.multipliers[l].eq_tol(&s, tol)
                });
                if ok {
                    return Some((Scalar::one(), g));
                }
            }
            None
        }
        (StokesVariant::NonResonant { mu: mu_a }, StokesVariant::NonResonant { mu: mu_b }) => {
            let mu_tol = if mu_a.is_exact() && mu_b.is_exact() {
                0.0
            } else {
                VERIFY_TOL
            };
            if !mu_a.eq_tol(mu_b, mu_tol) {
                return None;
            }
            'group: for g in group.elements() {
                // A single nonzero pair pins c; the rest must verify.
                let mut c: Option<Scalar> = None;
                for l in 0..a.count() {
                    let src = l as i64 + g as i64;
                    let s = a.extended_multiplier(src);
                    let t = &b.multipliers[l];
                    match (s.is_zero_tol(tol), t.is_zero_tol(tol)) {
                        (true, true) => continue,
                        (true, false) | (false, true) => continue 'group,
                        (false, false) => {
                            if c.is_none() {
                                let cand = match OperatorKind::of_index(src) {
                                    OperatorKind::Translation => s.div(t),
                                    OperatorKind::MoebiusFlat => t.div(&s),
                                };
                                match cand {
                                    Ok(v) => c = Some(v),
                                    Err(_) => continue 'group,
                                }
                            }
                        }
                    }
                }
                let c = c.unwrap_or_else(Scalar::one);
                let ok = (0..a.count()).all(|l| {
                    let src = l as i64 + g as i64;
                    let s = a.extended_multiplier(src);
                    let expected = match OperatorKind::of_index(src) {
                        OperatorKind::Translation => s.div(&c),
                        OperatorKind::MoebiusFlat => Ok(&s * &c),
                    };
                    match expected {
                        Ok(e) => b.multipliers[l].eq_tol(&e, tol),
                        Err(_) => false,
                    }
                });
                if ok {
                    return Some((c, g));
                }
            }
            None
        }
        _ => None,
    }
}

/// The closed-form rank-one invariants extracted from the monodromy matrix
/// `M` of the companion system.
///
/// With the square-root branch of `det M` pinned as `exp(-pi i p^(1))` by
/// the exact coefficient `p^(1)`, the normalized trace satisfies
/// `exp(-pi i p^(1)) tr M = -2 cos pi sqrt(Delta^(2) + 1)`, so
/// `cos_invariant` below is `cos pi sqrt(Delta^(2) + 1)` itself; comparing
/// it (together with `mu`, resonant: with `p^(1)`) decides analytic
/// equivalence inside the rank-one families.  In the non-resonant case the
/// product of the two Stokes multipliers follows from the same trace:
/// `s_0 s_pi = exp(-pi i mu) (exp(-pi i p^(1)) tr M - 2 cos pi mu)`,
/// which vanishes exactly when one of the sides is trivial.
#[derive(Debug, Clone)]
pub struct Nu1Invariants {
    /// Canonical continuation constant; `None` in the resonant case.
    pub mu: Option<Scalar>,
    /// `cos pi sqrt(Delta^(2) + 1)`, from the normalized trace.
    pub cos_invariant: Scalar,
    /// Product of the two Stokes multipliers; `None` in the resonant case.
    pub s0_s_pi: Option<Scalar>,
    /// Diagnostic: `det M` (should be `exp(2 pi i p^(1))`).
    pub det_m: Scalar,
    /// Diagnostic: `tr M`.
    pub tr_m: Scalar,
}

/// Compute the rank-one invariants of an irregular `nu = 1` equation by
/// numeric monodromy.  Degenerate inputs are rejected.
pub fn nu1_invariants(e: &Lde) -> Result<Nu1Invariants> {
    if e.nu() != 1 {
        return Err(Error::InvalidInput(format!(
            "rank-one invariants require nu = 1, got nu = {}",
            e.nu()
        )));
    }
    let inv = classify::formal_invariants(e)?;
    let m = numeric_monodromy(e, suggested_radius(e), 32, MONODROMY_TOL)?;
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let p1 = e.p().coeff(1)?.to_c64();
    let branch = (Complex64::new(0.0, -PI) * p1).exp();
    let btr = branch * tr;
    let cos_invariant = Scalar::from_c64(-0.5 * btr);
    let (mu, s0_s_pi) = match inv {
        FormalInvariant::Nonres { mu, .. } => {
            let mc = mu.to_c64();
            let product =
                (Complex64::new(0.0, -PI) * mc).exp() * (btr - 2.0 * (PI * mc).cos());
            (Some(mu), Some(Scalar::from_c64(product)))
        }
        FormalInvariant::ResNondeg { .. } => (None, None),
        FormalInvariant::Regular { .. } => unreachable!("nu = 1 is never regular"),
    };
    Ok(Nu1Invariants {
        mu,
        cos_invariant,
        s0_s_pi,
        det_m: Scalar::from_c64(det),
        tr_m: Scalar::from_c64(tr),
    })
}

/// Decide analytic equivalence of two irregular `nu = 1` equations from
/// their closed-form invariants: non-resonant pairs must match `mu` up to
/// sign and `cos_invariant`; resonant pairs must match `p^(1)` and
/// `cos_invariant`.  Numeric comparisons use `tol`.
pub fn nu1_equivalent(a: &Lde, b: &Lde, tol: f64) -> Result<bool> {
    let ia = nu1_invariants(a)?;
    let ib = nu1_invariants(b)?;
    match (&ia.mu, &ib.mu) {
        (Some(ma), Some(mb)) => {
            let mu_match = ma.eq_tol(mb, tol) || ma.eq_tol(&-mb, tol);
            Ok(mu_match && ia.cos_invariant.eq_tol(&ib.cos_invariant, tol))
        }
        (None, None) => {
            let pa = a.p().coeff(1)?;
            let pb = b.p().coeff(1)?;
            Ok(pa.eq_tol(&pb, tol) && ia.cos_invariant.eq_tol(&ib.cos_invariant, tol))
        }
        _ => Ok(false),
    }
}

/// The right factor of an explicitly reducible rank-one operator whose
/// non-trivial Stokes multiplier has a Gamma-function closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightFactor {
    /// `R = 1`: `s_pi = (exp(2 pi i mu) - 1) Gamma(1 - mu)`, written in the
    /// entire form `exp(pi i mu) 2 pi i / Gamma(mu)`; vanishes exactly for
    /// `mu` a nonpositive integer.
    One,
    /// `R = exp(-x)`: `s_pi = 2 pi i exp(pi i mu) sum_j 1/(j! Gamma(mu+j))`,
    /// an entire function of `mu` with no integer zeros.
    ExpMinusX,
}

/// Closed-form Stokes multiplier of the two explicit reducible families.
pub fn gamma_stokes(mu: &Scalar, family: RightFactor) -> Scalar {
    let mc = mu.to_c64();
    let phase = Complex64::new(0.0, 2.0 * PI) * (Complex64::new(0.0, PI) * mc).exp();
    match family {
        RightFactor::One => Scalar::from_c64(phase * recip_gamma(mc)),
        RightFactor::ExpMinusX => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut inv_fact = 1.0_f64;
            for j in 0..48 {
                let term = inv_fact * recip_gamma(mc + j as f64);
                sum += term;
                if j > 4 && term.norm() < 1e-18 * (1.0 + sum.norm()) {
                    break;
                }
                inv_fact /= (j + 1) as f64;
            }
            Scalar::from_c64(phase * sum)
        }
    }
}

/// Stokes multiplier by the term-wise Laplace integral: for an analytic
/// right factor `R`, `s_pi = (exp(2 pi i mu) - 1) sum_j R_j Gamma(1-mu-j)`.
/// Requires `Re mu < 1` (integrability at the origin of the Borel plane).
/// `tol` is the threshold for detecting a Gamma pole `1 - mu - j` in a
/// nonpositive integer; when the prefactor vanishes along with it the term
/// is replaced by its finite limit, otherwise `DivergentTerm` is returned.
pub fn laplace_stokes_quadrature(mu: &Scalar, r: &Jet, tol: f64) -> Result<Scalar> {
    let mc = mu.to_c64();
    if !(mc.re < 1.0) {
        return Err(Error::InvalidInput(format!(
            "the Laplace integral requires Re mu < 1, got {}",
            mc.re
        )));
    }
    if r.val() < 0 {
        return Err(Error::InvalidInput(
            "the right factor must be analytic at the origin".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pole-detection tolerance must be positive, got {tol}"
        )));
    }
    let factor = (Complex64::new(0.0, 2.0 * PI) * mc).exp() - 1.0;
    let mut regular = Complex64::new(0.0, 0.0);
    let mut limits = Complex64::new(0.0, 0.0);
    for (j, cj) in r.terms() {
        if cj.is_zero() {
            continue;
        }
        let z = 1.0 - mc - j as f64;
        let zr = z.re.round();
        let at_pole = z.im.abs() <= tol && (z.re - zr).abs() <= tol && zr <= 0.0;
        if at_pole {
            if factor.norm() <= 30.0 * tol {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                limits += cj.to_c64()
                    * Complex64::new(0.0, 2.0 * PI)
                    * (Complex64::new(0.0, PI) * mc).exp()
                    * sign
                    * recip_gamma(mc + j as f64);
            } else {
                return Err(Error::DivergentTerm { j: j as usize });
            }
        } else {
            regular += cj.to_c64() * gamma(z);
        }
    }
    Ok(Scalar::from_c64(factor * regular + limits))
}

/// The Stokes data of the degenerate rank-two example with right factor
/// `1 + c/s` in the Borel plane: one trivial direction and one translation
/// with multiplier `2 pi i c`, computed by the residue at the origin.  The
/// discriminant degenerates (its valuation exceeds `2 nu`), leaving two
/// singular directions, so the data is carried in a rank-one-shaped
/// container with trivial continuation constant.
pub fn example1_stokes(c: &Scalar) -> StokesCollection {
    let s_pi = c * &Scalar::from_c64(Complex64::new(0.0, 2.0 * PI));
    StokesCollection::non_resonant(1, Scalar::zero(), vec![Scalar::zero(), s_pi])
        .expect("two multipliers fit a rank-one container")
}
