//! Lie algebras of analytic infinitesimal linear point symmetries.
//!
//! A linear symmetry of `delta_nu^2 y = p delta_nu y + q y` is a vector
//! field `Y = h(x) delta_nu + f(x) y d/dy` whose first prolongation
//! commutes with the equation's total-derivative field `X` up to a
//! multiple `alpha X`.  Writing `g = x^{nu+1} h` (the plain `d/dx`
//! coefficient) and `f = (c + delta_nu h + p h)/2` with a free scalar `c`,
//! the bracket condition reduces to membership of `h` in the kernel of the
//! second symmetric power, and `alpha = dg/dx`.
//!
//! The algebra always contains the scaling `y d/dy` (`h = 0, c = 1`).  The
//! extra generators are exactly the kernel elements whose coefficient pair
//! `(g, f)` is analytic, with the dimension depending on the singularity
//! class and — at an irregular non-resonant point — on whether the
//! equation is *analytically* equivalent to its formal normal form, which
//! is where Stokes data enters.

use std::fmt;

use crate::classify::{self, SingularityClass};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::lde::Lde;
use crate::monodromy::{numeric_monodromy, suggested_radius};
use crate::reduce::symmetric_power_kernel;
use crate::scalar::Scalar;
use crate::stokes::{nu1_invariants, StokesCollection, StokesVariant};
use crate::{working_tol, MONODROMY_TOL, VERIFY_TOL};

/// An infinitesimal linear symmetry `Y = h delta_nu + f y d/dy` with
/// `f = (c + delta_nu h + p h)/2`.
#[derive(Debug, Clone)]
pub struct SymmetryGenerator {
    pub h: Jet,
    pub c: Scalar,
}

impl SymmetryGenerator {
    pub fn new(h: Jet, c: Scalar) -> Self {
        SymmetryGenerator { h, c }
    }

    /// The pure scaling `y d/dy`.
    pub fn scaling(order: i64) -> Self {
        SymmetryGenerator {
            h: Jet::zero(order),
            c: Scalar::one(),
        }
    }

    /// The `d/dx` coefficient `g = x^{nu+1} h`.
    pub fn g(&self, nu: u32) -> Jet {
        self.h.shifted(nu as i64 + 1)
    }

    /// The `y d/dy` coefficient `f = (c + delta_nu h + p h)/2`.
    pub fn f(&self, e: &Lde) -> Jet {
        let s = &self.h.delta(e.nu()) + &(e.p() * &self.h);
        (&Jet::constant(self.c.clone(), s.order()) + &s).scaled(&Scalar::from_ratio(1, 2))
    }

    pub fn is_exact(&self) -> bool {
        self.h.is_exact() && self.c.is_exact()
    }
}

/// Which line of the symmetry case table the equation falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryCase {
    /// Ordinary point: translations and dilations join the scaling.
    NonSingular,
    /// Regular, exponent difference not an integer.
    RegularNonResonant,
    /// Regular, integer exponent difference, diagonalizable (trivial
    /// projective monodromy).
    RegularTrivialProjective,
    /// Regular with a logarithm in the solution basis.
    RegularLogarithmic,
    /// Irregular non-resonant, analytically equivalent to its normal form.
    IrregularNormalFormEquivalent,
    /// Irregular non-resonant, not normal-form equivalent.
    IrregularGeneric,
    /// Irregular resonant.
    Resonant,
}

impl fmt::Display for SymmetryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymmetryCase::NonSingular => "NON_SINGULAR",
            SymmetryCase::RegularNonResonant => "REGULAR_NON_RESONANT",
            SymmetryCase::RegularTrivialProjective => "REGULAR_TRIVIAL_PROJECTIVE",
            SymmetryCase::RegularLogarithmic => "REGULAR_LOGARITHMIC",
            SymmetryCase::IrregularNormalFormEquivalent => "IRREGULAR_NORMAL_FORM_EQUIVALENT",
            SymmetryCase::IrregularGeneric => "IRREGULAR_GENERIC",
            SymmetryCase::Resonant => "RESONANT",
        };
        write!(f, "{s}")
    }
}

/// The computed symmetry algebra: case label, dimension, and a basis.
#[derive(Debug, Clone)]
pub struct SymmetryAlgebra {
    pub case: SymmetryCase,
    pub dimension: usize,
    pub generators: Vec<SymmetryGenerator>,
    pub notes: Vec<String>,
}

/// Check the bracket condition `[X, pr1 Y] = (dg/dx) X` for the companion
/// field `X = d/dx + y_x d/dy + (a1 y_x + a0 y) d/dy_x`, where
/// `a1 = p x^{-nu-1} - (nu+1)/x` and `a0 = q x^{-2nu-2}`.  Expanding the
/// bracket in the frame `(d/dx, y d/dy, y_x d/dy, ...)` leaves two scalar
/// conditions:
///
/// ```text
/// f'' - a1 f' - g a0' - 2 g' a0 = 0,
/// 2 f' - g'' - (g a1)'          = 0,
/// ```
///
/// whose joint sup-residual (coefficients through degree `n`, as far as
/// the jet orders reach) is returned together with the pass verdict:
/// exactly zero for exact data, below a scaled [`VERIFY_TOL`] for floats.
pub fn verify_symmetry(e: &Lde, y: &SymmetryGenerator, n: i64) -> (bool, f64) {
    let nu = e.nu() as i64;
    let a1 = &e.p().shifted(-(nu + 1))
        - &Jet::monomial(Scalar::from_int(nu + 1), -1, e.p().order());
    let a0 = e.q().shifted(-2 * (nu + 1));
    let g = y.g(e.nu());
    let f = y.f(e);
    let c1 = &(&f.derivative().derivative() - &(&a1 * &f.derivative()))
        - &(&(&g * &a0.derivative()) + &(&g.derivative() * &a0).scaled(&Scalar::from_int(2)));
    let c2 = &(&f.derivative().scaled(&Scalar::from_int(2)) - &g.derivative().derivative())
        - &(&g * &a1).derivative();
    let residual = c1.truncated(n).sup_norm().max(c2.truncated(n).sup_norm());
    let exact = e.is_exact() && y.is_exact();
    let tol = if exact {
        0.0
    } else {
        VERIFY_TOL * e.p().sup_norm().max(e.q().sup_norm()).max(1.0)
    };
    (residual <= tol, residual)
}

/// Admit a kernel element as a generator when both coefficients of the
/// vector field are analytic, choosing `c` so that `f` vanishes at the
/// origin (splitting off the scaling direction).
fn admit(e: &Lde, h: Jet) -> Result<Option<SymmetryGenerator>> {
    let g = h.shifted(e.nu() as i64 + 1);
    if !g.is_zero() && g.val() < 0 {
        return Ok(None);
    }
    let s = &h.delta(e.nu()) + &(e.p() * &h);
    if !s.is_zero() && s.val() < 0 {
        return Ok(None);
    }
    let c = if s.is_zero() || s.val() > 0 {
        Scalar::zero()
    } else {
        -s.coeff(0)?
    };
    Ok(Some(SymmetryGenerator::new(h, c)))
}

/// Whether `e` is analytically equivalent to its formal normal form:
/// recognized directly when `e` *is* the normal form, otherwise from
/// supplied Stokes data, otherwise (rank one) from the monodromy-trace
/// closed forms.  `None` means undecidable from the available data.
fn normal_form_equivalent(
    e: &Lde,
    stokes: Option<&StokesCollection>,
    notes: &mut Vec<String>,
) -> Result<Option<bool>> {
    let inv = classify::formal_invariants(e)?;
    let nf = classify::formal_normal_form(&inv, e.nu(), e.order())?;
    let cmp_tol = working_tol(e.is_exact() && nf.is_exact());
    if e.eq_tol(&nf, cmp_tol) {
        notes.push("the equation is its own formal normal form".into());
        return Ok(Some(true));
    }
    if let Some(data) = stokes {
        if data.nu() != e.nu() || !matches!(data.variant(), StokesVariant::NonResonant { .. }) {
            return Err(Error::InvalidInput(
                "Stokes data does not match the equation's rank and variant".into(),
            ));
        }
        let stol = if data.is_exact() { 0.0 } else { VERIFY_TOL };
        notes.push("normal-form equivalence decided from the supplied Stokes multipliers".into());
        return Ok(Some(data.is_trivial(stol)));
    }
    if e.nu() == 1 {
        let inv1 = nu1_invariants(e)?;
        let product = inv1.s0_s_pi.clone().expect("non-resonant rank one");
        if !product.is_zero_tol(1e-6) {
            notes.push("s0 s_pi != 0 (monodromy trace): not normal-form equivalent".into());
            return Ok(Some(false));
        }
        if inv1
            .mu
            .as_ref()
            .and_then(|m| m.as_integer(1e-9))
            .is_some()
        {
            let m = numeric_monodromy(e, suggested_radius(e), 32, MONODROMY_TOL)?;
            let scale = m
                .iter()
                .flatten()
                .map(|z| z.norm())
                .fold(1.0_f64, f64::max);
            let scalar = (m[0][1].norm() + m[1][0].norm() + (m[0][0] - m[1][1]).norm())
                <= 1e-6 * scale;
            notes.push(
                "s0 s_pi = 0 and mu is an integer: scalarity of the monodromy decides".into(),
            );
            return Ok(Some(scalar));
        }
        notes.push(
            "s0 s_pi = 0 with non-integer mu: one multiplier class is trivial but full \
             triviality needs Stokes data"
                .into(),
        );
        return Ok(None);
    }
    Ok(None)
}

/// Compute the symmetry algebra of `e` to order `n`.  For irregular
/// non-resonant equations that are not recognizably in normal form,
/// optional Stokes data (or, at rank one, the built-in monodromy closed
/// forms) decides between the two- and one-dimensional cases; when neither
/// settles it the computation refuses to guess.
pub fn symmetry_algebra(
    e: &Lde,
    n: i64,
    stokes: Option<&StokesCollection>,
) -> Result<SymmetryAlgebra> {
    let tol = working_tol(e.is_exact());
    let class = classify::classify_tol(e, tol)?;
    let mut notes = Vec::new();
    let mut generators = vec![SymmetryGenerator::scaling(n)];
    let case = match class {
        SingularityClass::Degenerate => return Err(Error::DegenerateInput),
        SingularityClass::IrregularResNondeg => {
            notes.push("resonant irregular point: only the scaling survives".into());
            SymmetryCase::Resonant
        }
        SingularityClass::IrregularNonres => {
            match normal_form_equivalent(e, stokes, &mut notes)? {
                Some(true) => {
                    for h in symmetric_power_kernel(e, n)? {
                        if let Some(gen) = admit(e, h)? {
                            generators.push(gen);
                        }
                    }
                    SymmetryCase::IrregularNormalFormEquivalent
                }
                Some(false) => {
                    notes.push(
                        "the formal kernel series diverges here, so no analytic generator \
                         joins the scaling"
                            .into(),
                    );
                    SymmetryCase::IrregularGeneric
                }
                None => return Err(Error::UndecidableWithoutStokes),
            }
        }
        SingularityClass::NonSingular
        | SingularityClass::RegularStrongNonres
        | SingularityClass::RegularResonant { .. } => {
            let kernel = symmetric_power_kernel(e, n)?;
            let mut has_unit_lead = false;
            for h in kernel {
                if h.val() == 0 {
                    has_unit_lead = true;
                }
                if let Some(gen) = admit(e, h)? {
                    generators.push(gen);
                }
            }
            match class {
                SingularityClass::NonSingular => SymmetryCase::NonSingular,
                SingularityClass::RegularStrongNonres => SymmetryCase::RegularNonResonant,
                _ => {
                    let k = match class {
                        SingularityClass::RegularResonant { k } => k,
                        _ => unreachable!(),
                    };
                    if k == 0 {
                        // Equal exponents force a logarithm; the constant
                        // kernel element survives regardless.
                        SymmetryCase::RegularLogarithmic
                    } else if has_unit_lead {
                        SymmetryCase::RegularTrivialProjective
                    } else {
                        notes.push(format!(
                            "the constant-lead kernel branch is obstructed at degree {k}: \
                             logarithmic monodromy"
                        ));
                        SymmetryCase::RegularLogarithmic
                    }
                }
            }
        }
    };
    Ok(SymmetryAlgebra {
        case,
        dimension: generators.len(),
        generators,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lde::PointTransformation;

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    fn diagonal(l1: Scalar, l2: Scalar, order: i64) -> Lde {
        Lde::from_factored(0, &Jet::constant(l1, order), &Jet::constant(l2, order)).unwrap()
    }

    #[test]
    fn the_scaling_is_a_symmetry_of_everything() {
        let examples = [
            diagonal(rat(1, 2), Scalar::zero(), 10),
            Lde::from_trace_free(1, &Jet::one(10)).unwrap(),
            Lde::new(1, Jet::zero(10), Jet::monomial(rat(1, 4), 1, 10)).unwrap(),
        ];
        for e in &examples {
            let (ok, residual) = verify_symmetry(e, &SymmetryGenerator::scaling(10), 8);
            assert!(ok);
            assert_eq!(residual, 0.0);
        }
    }

    #[test]
    fn the_diagonal_form_commutes_with_the_euler_field() {
        let e = diagonal(rat(1, 2), Scalar::zero(), 10);
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::RegularNonResonant);
        assert_eq!(alg.dimension, 2);
        // The non-scaling generator is exactly delta_0: f = 0.
        let gen = &alg.generators[1];
        assert_eq!(gen.h, Jet::one(8));
        assert!(gen.f(&e).is_zero());
        let (ok, residual) = verify_symmetry(&e, gen, 8);
        assert!(ok, "residual {residual}");
    }

    #[test]
    fn integer_exponent_difference_adds_the_weighted_translation() {
        // lambda = (3/4, -1/4): k = 1, diagonalizable, dimension 3 with
        // x (delta_0 + (3/4) y d/dy) joining.
        let e = diagonal(rat(3, 4), rat(-1, 4), 12);
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::RegularTrivialProjective);
        assert_eq!(alg.dimension, 3);
        for gen in &alg.generators {
            let (ok, residual) = verify_symmetry(&e, gen, 8);
            assert!(ok, "residual {residual}");
        }
        let weighted = alg
            .generators
            .iter()
            .find(|gen| !gen.h.is_zero() && gen.h.val() == 1)
            .expect("x-lead generator");
        assert_eq!(weighted.h, Jet::monomial(Scalar::one(), 1, 8));
        assert_eq!(weighted.f(&e).truncated(8), Jet::monomial(rat(3, 4), 1, 8));
    }

    #[test]
    fn logarithmic_resonance_rejects_the_euler_field() {
        // (delta_0 - lambda2 + x/(1-x))(delta_0 - lambda1) with
        // lambda = (1, 0): the log case.  Dimension 2; the joining
        // generator is x/(1-x) (delta_0 + y d/dy), and delta_0 itself
        // fails the bracket test with a nonzero residual.
        let order = 12;
        let u = &Jet::monomial(Scalar::one(), 1, order)
            * &Jet::poly_i64(0, &[1, -1], order).inv().unwrap();
        let a2 = &Jet::zero(order) - &u;
        let e = Lde::from_factored(0, &Jet::one(order), &a2).unwrap();
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::RegularLogarithmic);
        assert_eq!(alg.dimension, 2);
        let gen = &alg.generators[1];
        assert_eq!(gen.h, u.truncated(8));
        assert_eq!(gen.f(&e).truncated(8), u.truncated(8));
        let (ok, residual) = verify_symmetry(&e, gen, 8);
        assert!(ok, "residual {residual}");
        // delta_0 is not a symmetry here: the obstruction sits at the
        // resonance degree.
        let euler = SymmetryGenerator::new(Jet::one(order), -e.p().coeff(0).unwrap());
        let (ok, residual) = verify_symmetry(&e, &euler, 8);
        assert!(!ok);
        assert!(residual > 0.0);
    }

    #[test]
    fn ordinary_points_carry_the_four_dimensional_algebra() {
        // y'' = 0 in delta_0 form: scaling, d/dx, delta_0, x(x d/dx + y d/dy).
        let e = Lde::new(0, Jet::one(12), Jet::zero(12)).unwrap();
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::NonSingular);
        assert_eq!(alg.dimension, 4);
        for gen in &alg.generators {
            let (ok, residual) = verify_symmetry(&e, gen, 8);
            assert!(ok, "residual {residual}");
        }
        // h = 1/x gives the plain translation d/dx (f = 0).
        let translation = alg
            .generators
            .iter()
            .find(|gen| !gen.h.is_zero() && gen.h.val() == -1)
            .expect("translation generator");
        assert!(translation.f(&e).is_zero());
        // h = x gives x(x d/dx + y d/dy): f = x exactly.
        let dilation = alg
            .generators
            .iter()
            .find(|gen| !gen.h.is_zero() && gen.h.val() == 1)
            .expect("dilation generator");
        assert_eq!(
            dilation.f(&e).truncated(8),
            Jet::monomial(Scalar::one(), 1, 8)
        );
    }

    #[test]
    fn normal_form_irregular_equations_keep_their_kernel_direction() {
        // p = delta(d)/d, q = d^2/4 with d = 1 + 2x is its own normal form;
        // h = 1/d joins the scaling.
        let d = Jet::poly_i64(0, &[1, 2], 14);
        let p = &d.delta(1) * &d.inv().unwrap();
        let q = (&d * &d).scaled(&rat(1, 4));
        let e = Lde::new(1, p, q).unwrap();
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::IrregularNormalFormEquivalent);
        assert_eq!(alg.dimension, 2);
        let gen = &alg.generators[1];
        assert_eq!(gen.h, d.truncated(8).inv().unwrap());
        assert!(gen.f(&e).truncated(7).is_zero());
        let (ok, residual) = verify_symmetry(&e, gen, 7);
        assert!(ok, "residual {residual}");
    }

    #[test]
    fn divergent_kernel_leaves_only_the_scaling() {
        // from_factored(-d/2, d/2) is reducible but not normal-form
        // equivalent: its kernel series diverges, and the monodromy is a
        // Jordan block, which the rank-one closed forms detect.
        let d = Jet::poly_i64(0, &[1, 2], 12);
        let e = Lde::from_factored(1, &d.scaled(&rat(-1, 2)), &d.scaled(&rat(1, 2))).unwrap();
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::IrregularGeneric);
        assert_eq!(alg.dimension, 1);
    }

    #[test]
    fn resonant_points_have_only_the_scaling() {
        let e = Lde::new(1, Jet::zero(10), Jet::monomial(rat(1, 4), 1, 10)).unwrap();
        let alg = symmetry_algebra(&e, 8, None).unwrap();
        assert_eq!(alg.case, SymmetryCase::Resonant);
        assert_eq!(alg.dimension, 1);
    }

    #[test]
    fn higher_rank_needs_stokes_data() {
        let delta = {
            let d = Jet::poly_i64(0, &[1, 0, 2], 12);
            &d * &d
        };
        let e = Lde::from_trace_free(2, &delta).unwrap();
        assert!(matches!(
            symmetry_algebra(&e, 8, None),
            Err(Error::UndecidableWithoutStokes)
        ));
        let trivial = StokesCollection::non_resonant(
            2,
            Scalar::from_int(2),
            vec![Scalar::zero(); 4],
        )
        .unwrap();
        let alg = symmetry_algebra(&e, 8, Some(&trivial)).unwrap();
        assert_eq!(alg.case, SymmetryCase::IrregularNormalFormEquivalent);
        assert_eq!(alg.dimension, 2);
        let loaded = StokesCollection::non_resonant(
            2,
            Scalar::from_int(2),
            vec![
                Scalar::from_int(1),
                Scalar::from_int(2),
                Scalar::from_int(3),
                Scalar::from_int(4),
            ],
        )
        .unwrap();
        let alg = symmetry_algebra(&e, 8, Some(&loaded)).unwrap();
        assert_eq!(alg.case, SymmetryCase::IrregularGeneric);
        assert_eq!(alg.dimension, 1);
    }

    #[test]
    fn generators_push_forward_through_point_transformations() {
        // Transport delta_0 of the diagonal form through x = phi(xt),
        // y = t yt: g -> (g o phi)/phi', f -> f o phi - g_new * t'/t, and
        // the result must again satisfy the bracket test for the
        // transformed equation.
        let order = 12;
        let e = diagonal(rat(1, 2), Scalar::zero(), order);
        let gen = SymmetryGenerator::new(Jet::one(order), rat(-1, 2));
        assert!(verify_symmetry(&e, &gen, 10).0);
        let phi = Jet::poly_i64(1, &[1, 1], order);
        let t = Jet::poly_i64(0, &[1, 1], order);
        let tr = PointTransformation::analytic(phi.clone(), t.clone()).unwrap();
        let et = e.apply_transformation(&tr).unwrap();
        let g_new = &gen.g(0).compose(&phi).unwrap() * &phi.derivative().inv().unwrap();
        let f_new = &gen.f(&e).compose(&phi).unwrap()
            - &(&g_new * &(&t.derivative() * &t.inv().unwrap()));
        // Recover (h, c) from the pushed coefficients: h = g/x and
        // c = 2f - delta h - p h must come out constant.
        let h_new = g_new.shifted(-1);
        let c_jet = &f_new.scaled(&Scalar::from_int(2))
            - &(&h_new.delta(0) + &(et.p() * &h_new));
        assert_eq!(c_jet.truncated(9), Jet::constant(c_jet.coeff(0).unwrap(), 9));
        let pushed = SymmetryGenerator::new(h_new, c_jet.coeff(0).unwrap());
        let (ok, residual) = verify_symmetry(&et, &pushed, 8);
        assert!(ok, "residual {residual}");
    }
}
