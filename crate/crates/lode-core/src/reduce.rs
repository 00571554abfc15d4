//! Reducibility structure: formal Riccati solutions, operator
//! factorization, the second symmetric power, and the combined report.
//!
//! An equation is reducible when the operator factors through first-order
//! right factors `(delta - alpha_2)(delta - alpha_1)` with analytic
//! exponents.  Writing `r = alpha_2 - alpha_1`, the factorization exists
//! formally exactly when the Riccati equation `2 delta_nu r = r^2 - Delta`
//! has a formal power-series solution, and the sharper question — whether
//! the equation is equivalent to its formal normal form — is controlled by
//! the formal solution space of the second symmetric power
//! `delta_nu^3 h - Delta delta_nu h - (delta_nu Delta) h / 2 = 0`.
//!
//! At an irregular non-resonant point the formal level is never the
//! obstruction: both Riccati signs solve degree by degree (the
//! linearization `-2 r(0)` never vanishes) and the symmetric power has a
//! one-dimensional formal kernel.  Whether those series converge is exactly
//! the triviality of one (respectively both) parity classes of Stokes
//! multipliers, so the analytic verdict of the report consumes Stokes data,
//! or at rank one the closed-form product `s_0 s_pi`.

use std::fmt;

use crate::classify::{self, SingularityClass};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::lde::Lde;
use crate::monodromy::{numeric_monodromy, suggested_radius};
use crate::newton::solve_triangular;
use crate::scalar::Scalar;
use crate::stokes::{nu1_invariants, StokesCollection, StokesVariant};
use crate::{working_tol, MONODROMY_TOL, VERIFY_TOL};

/// A formal solution of `2 delta_nu r = r^2 - Delta` with
/// `r(0) = sign * sqrt(Delta(0))`.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub r: Jet,
    pub sign: i8,
}

/// The exponents of a first-order factorization
/// `(delta - alpha2)(delta - alpha1)`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub alpha1: Jet,
    pub alpha2: Jet,
}

/// The Riccati residual `2 delta_nu r - r^2 + Delta`.
pub fn riccati_residual(e: &Lde, r: &Jet) -> Jet {
    let two = Scalar::from_int(2);
    &(&r.delta(e.nu()).scaled(&two) - &(r * r)) + e.discriminant()
}

/// Solve the Riccati equation degree by degree for the branch with
/// `r(0) = sign * sqrt(Delta(0))`, to order `n`.
///
/// Scope: regular (`nu = 0`, where a resonant root difference may obstruct
/// the positive branch) and irregular non-resonant points.  The resonant
/// case has no formal power-series solution (the exponent difference is
/// ramified) and is rejected, as are degenerate inputs.
pub fn riccati_formal(e: &Lde, sign: i8, n: i64) -> Result<RiccatiSolution> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInput(format!(
            "the Riccati branch sign must be +1 or -1, got {sign}"
        )));
    }
    let tol = working_tol(e.is_exact());
    match classify::classify_tol(e, tol)? {
        SingularityClass::Degenerate => return Err(Error::DegenerateInput),
        SingularityClass::IrregularResNondeg => {
            return Err(Error::InvalidInput(
                "the resonant exponent difference is ramified; no power-series Riccati branch"
                    .into(),
            ))
        }
        _ => {}
    }
    let mut r0 = e.discriminant().coeff(0)?.sqrt()?;
    if sign < 0 {
        r0 = -r0;
    }
    let solve_tol = working_tol(e.is_exact() && r0.is_exact());
    let base = Jet::constant(r0, n);
    let residual = |u: &Jet| Ok(riccati_residual(e, &(&base + u)));
    let sol = solve_triangular(residual, 1, n, 0, solve_tol)?;
    Ok(RiccatiSolution {
        r: (&base + &sol.solution).truncated(n),
        sign,
    })
}

/// The second symmetric power applied to `h`:
/// `delta_nu^3 h - Delta delta_nu h - (delta_nu Delta) h / 2`.
pub fn symmetric_power_apply(e: &Lde, h: &Jet) -> Jet {
    let nu = e.nu();
    let delta = e.discriminant();
    let d3 = h.delta(nu).delta(nu).delta(nu);
    let half = Scalar::from_ratio(1, 2);
    &(&d3 - &(delta * &h.delta(nu))) - &(&delta.delta(nu) * h).scaled(&half)
}

/// A basis of the formal solutions of the second symmetric power to order
/// `n`, in integer powers of `x` (Laurent leads are admitted at a regular
/// point, where the indicial roots are `{0, +-sqrt(Delta(0))}`).
///
/// Dimension by class: up to 3 at a regular point (3 exactly when the
/// exponent difference is an integer and no logarithm appears), 1 at an
/// irregular non-resonant point, and 0 at a resonant one, whose solutions
/// all carry half-integer leading powers and fall outside this contract.
pub fn symmetric_power_kernel(e: &Lde, n: i64) -> Result<Vec<Jet>> {
    let tol = working_tol(e.is_exact());
    let class = classify::classify_tol(e, tol)?;
    let nu = e.nu() as i64;
    let roots: Vec<i64> = match class {
        SingularityClass::Degenerate => return Err(Error::DegenerateInput),
        SingularityClass::IrregularResNondeg => return Ok(Vec::new()),
        SingularityClass::IrregularNonres => vec![0],
        _ => {
            // nu = 0: integer zeros of the indicial polynomial t(t^2 - Delta(0)).
            let d0 = e.discriminant().coeff(0)?;
            let mut v = vec![0];
            if let Some(k) = d0.as_square_int(tol) {
                if k > 0 {
                    v.insert(0, -(k as i64));
                    v.push(k as i64);
                }
            }
            v
        }
    };
    let mut basis = Vec::new();
    for s in roots {
        let w_order = n - s;
        if w_order < 0 {
            continue;
        }
        let residual = |w: &Jet| {
            let h = (&Jet::one(w_order) + w).shifted(s);
            Ok(symmetric_power_apply(e, &h))
        };
        let offset = s + if nu >= 1 { nu } else { 0 };
        match solve_triangular(residual, 1, w_order, offset, tol) {
            Ok(sol) => basis.push((&Jet::one(w_order) + &sol.solution).shifted(s)),
            // A forced resonance means the would-be solution carries a
            // logarithm; this leading power contributes nothing.
            Err(Error::ResonantObstruction { .. }) => continue,
            Err(err) => return Err(err),
        }
    }
    Ok(basis)
}

/// Split `e` along a Riccati solution: `alpha_1 = (p - r)/2`,
/// `alpha_2 = (p + r)/2`.  The residual of the defining identity
/// `q = delta_nu(alpha_1) - alpha_1 alpha_2` is re-checked: exact data must
/// cancel identically, float data within [`VERIFY_TOL`].
pub fn factor(e: &Lde, r: &RiccatiSolution) -> Result<Factorization> {
    let half = Scalar::from_ratio(1, 2);
    let alpha1 = (e.p() - &r.r).scaled(&half);
    let alpha2 = (e.p() + &r.r).scaled(&half);
    let q_back = &alpha1.delta(e.nu()) - &(&alpha1 * &alpha2);
    let residual = q_back.residual_sup(e.q());
    let tol = if e.is_exact() && r.r.is_exact() {
        0.0
    } else {
        VERIFY_TOL * e.q().sup_norm().max(1.0)
    };
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    Ok(Factorization { alpha1, alpha2 })
}

/// Re-expand a factorization into an equation; exact inverse of [`factor`].
pub fn expand(f: &Factorization, nu: u32) -> Result<Lde> {
    Lde::from_factored(nu, &f.alpha1, &f.alpha2)
}

/// Analytic reducibility verdict, on top of the always-present formal layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticVerdict {
    Irreducible,
    Reducible,
    NormalFormEquivalent,
}

impl fmt::Display for AnalyticVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticVerdict::Irreducible => write!(f, "IRREDUCIBLE"),
            AnalyticVerdict::Reducible => write!(f, "REDUCIBLE"),
            AnalyticVerdict::NormalFormEquivalent => write!(f, "NORMAL_FORM_EQUIVALENT"),
        }
    }
}

/// Combined reducibility report for an irregular non-resonant equation.
#[derive(Debug, Clone)]
pub struct ReducibilityReport {
    pub riccati_plus: RiccatiSolution,
    pub riccati_minus: RiccatiSolution,
    pub kernel_dimension: usize,
    /// Both Riccati branches solve formally; always true in scope.
    pub formally_reducible: bool,
    /// Analytic verdict, when decidable from Stokes data or the rank-one
    /// closed forms; `None` otherwise.
    pub analytic: Option<AnalyticVerdict>,
    /// The rank-one Stokes product, when it was computed.
    pub s0_s_pi: Option<Scalar>,
    pub notes: Vec<String>,
}

/// Assemble the reducibility report of an irregular non-resonant equation.
///
/// The formal layer (both Riccati branches, symmetric-power kernel) is
/// always computed.  The analytic layer uses `stokes` when given: the
/// equation is reducible exactly when all odd-index or all even-index
/// multipliers vanish, and normal-form equivalent exactly when all vanish.
/// Without Stokes data, at rank one the product `s_0 s_pi` from the
/// monodromy trace decides reducibility, and scalarity of the monodromy
/// settles normal-form equivalence when `mu` is an integer.
pub fn reducibility_report(
    e: &Lde,
    stokes: Option<&StokesCollection>,
) -> Result<ReducibilityReport> {
    let tol = working_tol(e.is_exact());
    match classify::classify_tol(e, tol)? {
        SingularityClass::IrregularNonres => {}
        SingularityClass::Degenerate => return Err(Error::DegenerateInput),
        other => {
            return Err(Error::InvalidInput(format!(
                "reducibility reports cover irregular non-resonant equations, got {other}"
            )))
        }
    }
    let nu = e.nu();
    let n = e.order();
    let riccati_plus = riccati_formal(e, 1, n)?;
    let riccati_minus = riccati_formal(e, -1, n)?;
    let kernel = symmetric_power_kernel(e, (n - nu as i64).max(1))?;
    let mut notes = vec![
        "FORMAL: both Riccati branches solve; convergence is the analytic question".into(),
    ];
    let mut s0_s_pi = None;
    let analytic = if let Some(data) = stokes {
        match data.variant() {
            StokesVariant::NonResonant { .. } if data.nu() == nu => {}
            _ => {
                return Err(Error::InvalidInput(
                    "Stokes data does not match the equation's rank and variant".into(),
                ))
            }
        }
        let stol = if data.is_exact() { 0.0 } else { VERIFY_TOL };
        let verdict = if data.is_trivial(stol) {
            AnalyticVerdict::NormalFormEquivalent
        } else if data.odd_trivial(stol) || data.even_trivial(stol) {
            AnalyticVerdict::Reducible
        } else {
            AnalyticVerdict::Irreducible
        };
        notes.push(format!(
            "ANALYTIC: decided from the supplied Stokes multipliers ({verdict})"
        ));
        Some(verdict)
    } else if nu == 1 {
        let inv = nu1_invariants(e)?;
        let product = inv.s0_s_pi.clone().expect("non-resonant rank one");
        let vanishes = product.is_zero_tol(1e-6);
        s0_s_pi = Some(product);
        if !vanishes {
            notes.push("ANALYTIC: s0 s_pi != 0 within 1e-6 (monodromy trace)".into());
            Some(AnalyticVerdict::Irreducible)
        } else {
            let mu_int = inv
                .mu
                .as_ref()
                .and_then(|m| m.as_integer(1e-9))
                .is_some();
            if mu_int {
                // With integer mu the monodromy of a normal-form-equivalent
                // equation is scalar; a Jordan block means one-sided only.
                let m = numeric_monodromy(e, suggested_radius(e), 32, MONODROMY_TOL)?;
                let scale = m
                    .iter()
                    .flatten()
                    .map(|z| z.norm())
                    .fold(1.0_f64, f64::max);
                let scalar = (m[0][1].norm() + m[1][0].norm() + (m[0][0] - m[1][1]).norm())
                    <= 1e-6 * scale;
                notes.push(
                    "ANALYTIC: s0 s_pi = 0 within 1e-6; integer mu, scalarity of the monodromy \
                     decides normal-form equivalence"
                        .into(),
                );
                Some(if scalar {
                    AnalyticVerdict::NormalFormEquivalent
                } else {
                    AnalyticVerdict::Reducible
                })
            } else {
                notes.push(
                    "ANALYTIC: s0 s_pi = 0 within 1e-6, so one side is trivial (REDUCIBLE); \
                     full triviality is not determined by the trace for non-integer mu"
                        .into(),
                );
                Some(AnalyticVerdict::Reducible)
            }
        }
    } else {
        notes.push(format!(
            "ANALYTIC: undecided; Stokes multipliers are required at rank {nu}"
        ));
        None
    };
    if let (Some(data), Some(AnalyticVerdict::Irreducible)) = (stokes, analytic) {
        // Cross-check against the rank-one closed form when both are at hand.
        if nu == 1 {
            if let Ok(inv) = nu1_invariants(e) {
                if let Some(prod) = inv.s0_s_pi {
                    if prod.is_zero_tol(1e-6) && !data.is_trivial(VERIFY_TOL) {
                        notes.push(
                            "WARNING: supplied multipliers claim irreducible but the monodromy \
                             trace product vanishes"
                                .into(),
                        );
                    }
                }
            }
        }
    }
    Ok(ReducibilityReport {
        riccati_plus,
        riccati_minus,
        kernel_dimension: kernel.len(),
        formally_reducible: true,
        analytic,
        s0_s_pi,
        notes,
    })
}
