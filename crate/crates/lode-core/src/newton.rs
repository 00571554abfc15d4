//! Jet-level solvers for implicit equations.
//!
//! `jet_newton_solve` handles equations in implicit-function-theorem shape:
//! `F(x, y) = 0` with `F(0, y0) = 0` and `dF/dy(0, y0) != 0` has a unique
//! power-series solution through `y0`, found by a Newton iteration with the
//! constant slope `dF/dy(0, y0)^{-1}` (one guaranteed order per pass).
//!
//! `solve_triangular` handles the degree-triangular equations coming from
//! transformation laws, where the slope against the degree-`m` coefficient of
//! the unknown varies with `m` and may vanish at resonant degrees.  Slopes
//! are measured by probing rather than taken from closed forms, so the
//! solver stays honest even when a law is changed.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Solve `F(x, y) = 0` for a power series `y = y0 + O(x)` to the requested
/// order.  `f` evaluates `F` on a candidate jet for `y`.
///
/// Errors: `NoRootAtOrigin` if `F(0, y0) != 0`, `SingularJacobian` if
/// `dF/dy(0, y0) = 0` (measured by probing), and `OrderExhausted` if `f`
/// cannot produce residuals to the requested order.
pub fn jet_newton_solve(
    f: impl Fn(&Jet) -> Result<Jet>,
    y0: &Scalar,
    order: i64,
) -> Result<Jet> {
    let mut y = Jet::constant(y0.clone(), order);
    let r0 = f(&y)?;
    if r0.order() < order {
        return Err(Error::OrderExhausted {
            need: order,
            have: r0.order(),
        });
    }
    if !r0.coeff(0)?.is_zero_tol(newton_zero_tol(&r0)) {
        return Err(Error::NoRootAtOrigin);
    }
    // dF/dy(0, y0) by probing: the x-coefficient of F(x, y0 + x) minus the
    // x-coefficient of F(x, y0) isolates the y-derivative from the explicit
    // x-dependence.
    let probe = f(&(&y + &Jet::x(order)))?;
    let slope = &probe.coeff(1)? - &r0.coeff(1)?;
    if slope.is_zero_tol(1e-14) {
        return Err(Error::SingularJacobian);
    }
    let slope_inv = slope.inv()?;
    let mut r = r0;
    for _ in 0..=order {
        if r.is_zero() || r.val() > order {
            break;
        }
        y = (&y - &r.scaled(&slope_inv)).truncated(order);
        r = f(&y)?;
    }
    let tol = newton_zero_tol(&r);
    let rt = r.truncated(order);
    if let Some((deg, _)) = rt.terms().find(|(_, c)| !c.is_zero_tol(tol)) {
        return Err(Error::ResonantObstruction { degree: deg });
    }
    Ok(y)
}

fn newton_zero_tol(r: &Jet) -> f64 {
    if r.is_exact() {
        0.0
    } else {
        1e-9 * r.sup_norm().max(1.0)
    }
}

/// Outcome of a triangular solve: the solution and the degrees at which the
/// slope vanished with a vanishing residual (free parameters, left at zero).
#[derive(Debug, Clone)]
pub struct TriangularSolve {
    pub solution: Jet,
    pub free_degrees: Vec<i64>,
}

/// Solve `R(u) = 0` degree by degree for an unknown series
/// `u = sum_{m >= start} u_m x^m`, where the coefficient `u_m` influences the
/// residual first (and affinely) at degree `m + offset`.
///
/// At each degree the slope is measured by probing `R(u + x^m)`.  A zero
/// slope with a zero residual frees the coefficient (recorded, left at 0); a
/// zero slope with a nonzero residual is a genuine `ResonantObstruction`.
pub fn solve_triangular(
    residual: impl Fn(&Jet) -> Result<Jet>,
    start: i64,
    order: i64,
    offset: i64,
    tol: f64,
) -> Result<TriangularSolve> {
    let mut u = Jet::zero(order);
    let mut free_degrees = Vec::new();
    for m in start..=order {
        let mut r = residual(&u)?;
        let mut c = r.coeff(m + offset)?;
        if c.is_zero_tol(tol) {
            continue;
        }
        let mut fixed = false;
        // The dependence is affine in u_m with lower coefficients frozen, so
        // one correction suffices; a couple of retries guard against ops that
        // are only affine up to higher-order cross terms.
        for _ in 0..3 {
            let probe = residual(&(&u + &Jet::monomial(Scalar::one(), m, order)))?;
            let slope = &probe.coeff(m + offset)? - &c;
            if slope.is_zero_tol(tol) {
                return Err(Error::ResonantObstruction { degree: m });
            }
            u = &u - &Jet::monomial(c.div(&slope)?, m, order);
            r = residual(&u)?;
            c = r.coeff(m + offset)?;
            if c.is_zero_tol(tol) {
                fixed = true;
                break;
            }
        }
        if !fixed {
            return Err(Error::ResidualTooLarge {
                residual: c.abs_f64(),
                tol,
            });
        }
    }
    // Degrees whose slope vanishes but whose residual happened to be zero
    // are free parameters; detect them for the caller's bookkeeping.
    let r = residual(&u)?;
    for m in start..=order {
        if r.coeff(m + offset)?.is_zero_tol(tol) {
            let probe = residual(&(&u + &Jet::monomial(Scalar::one(), m, order)))?;
            let slope = &probe.coeff(m + offset)? - &r.coeff(m + offset)?;
            if slope.is_zero_tol(tol) {
                free_degrees.push(m);
            }
        }
    }
    Ok(TriangularSolve {
        solution: u,
        free_degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_solves_a_quadratic_implicit_equation() {
        // y^2 + y - x = 0, y(0) = 0: y = x - x^2 + 2x^3 - 5x^4 (Catalan).
        let f = |y: &Jet| {
            let n = y.order();
            Ok(&(&(y * y) + y) - &Jet::x(n))
        };
        let y = jet_newton_solve(f, &Scalar::zero(), 4).unwrap();
        assert_eq!(y, Jet::from_terms(
            &[
                (1, Scalar::from_int(1)),
                (2, Scalar::from_int(-1)),
                (3, Scalar::from_int(2)),
                (4, Scalar::from_int(-5)),
            ],
            4,
        ));
    }

    #[test]
    fn newton_handles_explicit_x_dependence_in_the_slope_probe() {
        // y = 1 + x*y has solution 1/(1-x); dF/dy(0,1) = 1 even though F has
        // an explicit x-term that also contributes to the x-coefficient.
        let f = |y: &Jet| {
            let n = y.order();
            Ok(&(y - &Jet::one(n)) - &(&Jet::x(n) * y))
        };
        let y = jet_newton_solve(f, &Scalar::one(), 5).unwrap();
        assert_eq!(y, Jet::poly_i64(0, &[1; 6], 5));
    }

    #[test]
    fn newton_reports_bad_base_points() {
        let f = |y: &Jet| {
            let n = y.order();
            Ok(&(&(y * y) + y) - &Jet::x(n))
        };
        assert_eq!(
            jet_newton_solve(f, &Scalar::from_int(5), 3),
            Err(Error::NoRootAtOrigin)
        );
        // y^2 - x = 0 at y0 = 0 has a vanishing Jacobian (branch point).
        let g = |y: &Jet| {
            let n = y.order();
            Ok(&(y * y) - &Jet::x(n))
        };
        assert_eq!(
            jet_newton_solve(g, &Scalar::zero(), 3),
            Err(Error::SingularJacobian)
        );
    }

    #[test]
    fn triangular_solve_passes_through_a_harmless_resonance() {
        // delta_0(u) - 3u = x + x^2: slope at degree m is m - 3; degree 3 is
        // resonant but unforced, so it stays free.
        let target = Jet::poly_i64(1, &[1, 1], 5);
        let residual = |u: &Jet| Ok(&(&u.delta(0) - &u.scaled(&Scalar::from_int(3))) - &target);
        let sol = solve_triangular(residual, 1, 5, 0, 0.0).unwrap();
        assert_eq!(sol.free_degrees, vec![3]);
        assert_eq!(
            sol.solution,
            Jet::from_terms(
                &[(1, Scalar::from_ratio(-1, 2)), (2, Scalar::from_int(-1))],
                5
            )
        );
        // Force the resonant degree: no solution.
        let bad_target = Jet::poly_i64(1, &[1, 1, 7], 5);
        let residual =
            |u: &Jet| Ok(&(&u.delta(0) - &u.scaled(&Scalar::from_int(3))) - &bad_target);
        assert_eq!(
            solve_triangular(residual, 1, 5, 0, 0.0).map(|s| s.solution),
            Err(Error::ResonantObstruction { degree: 3 })
        );
    }
}
