//! Numeric monodromy of the companion system around the origin.
//!
//! The companion system `delta_nu v = A(x) v`, `A = [[0,1],[q,p]]`, is
//! integrated counterclockwise along `|x| = radius` in the angle variable:
//! with `x = R e^{i theta}` the system reads `dV/dtheta = i x^{-nu} A(x) V`.
//! Every entry of `i x^{-nu} A` is a Laurent polynomial in `x` (the
//! coefficient jets are read as exact polynomials; inputs that truncate a
//! non-polynomial coefficient get the monodromy of the truncation), so all
//! theta-derivatives of the right-hand side are available in closed form and
//! each step advances a degree-20 Taylor expansion of `V`.  The step count
//! doubles until two consecutive results agree to the requested tolerance.
//!
//! The fundamental matrix is seeded as the identity at the basepoint
//! `x = radius`, so `M = V(2 pi)` is the monodromy matrix in that frame;
//! only its conjugation invariants (trace, determinant, eigenvalues) are
//! meaningful to compare across equations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lde::Lde;

pub type Matrix2 = [[Complex64; 2]; 2];

/// Degree of the Taylor expansion advanced at each step.
const TAYLOR_ORDER: usize = 20;

/// Hard cap on the step count of the doubling loop.
const MAX_STEPS: usize = 1 << 18;

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    m
}

fn mat_diff_norm(a: &Matrix2, b: &Matrix2) -> f64 {
    let mut n: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            n = n.max((a[r][c] - b[r][c]).norm());
        }
    }
    n
}

fn mat_is_finite(a: &Matrix2) -> bool {
    a.iter()
        .flatten()
        .all(|z| z.re.is_finite() && z.im.is_finite())
}

/// One Laurent-polynomial entry of `i x^{-nu} A(x)` restricted to the circle
/// `|x| = R`: a list of terms `w e^{i j theta}` with `w = i c R^j`.
type Terms = Vec<(f64, Complex64)>;

fn entry_terms(jet: Option<&crate::jet::Jet>, shift: i64, radius: f64) -> Terms {
    let mut v = Terms::new();
    if let Some(j) = jet {
        for (e, c) in j.terms() {
            if c.is_zero() {
                continue;
            }
            let k = e + shift;
            let w = Complex64::new(0.0, 1.0) * c.to_c64() * radius.powi(k as i32);
            v.push((k as f64, w));
        }
    } else {
        // The constant entry 1 of the companion matrix, shifted by x^{-nu}.
        let w = Complex64::new(0.0, 1.0) * radius.powi(shift as i32);
        v.push((shift as f64, w));
    }
    v
}

/// Scaled Taylor coefficients `B_r = B^{(r)}(theta)/r!` of the coefficient
/// matrix: the term `w e^{i j theta}` contributes `w e^{i j theta} (ij)^r/r!`.
fn coefficient_stack(entries: &[[Terms; 2]; 2], theta: f64) -> Vec<Matrix2> {
    let mut b = vec![[[Complex64::new(0.0, 0.0); 2]; 2]; TAYLOR_ORDER + 1];
    for r in 0..2 {
        for c in 0..2 {
            for &(j, w) in &entries[r][c] {
                let mut t = w * Complex64::from_polar(1.0, j * theta);
                let ij = Complex64::new(0.0, j);
                for (m, bm) in b.iter_mut().enumerate() {
                    bm[r][c] += t;
                    t = t * ij / (m as f64 + 1.0);
                }
            }
        }
    }
    b
}

fn integrate(entries: &[[Terms; 2]; 2], steps: usize) -> Matrix2 {
    let h = 2.0 * std::f64::consts::PI / steps as f64;
    let mut v: Matrix2 = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    for k in 0..steps {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
        let b = coefficient_stack(entries, theta);
        // V_{m+1} = (sum_{r<=m} B_r V_{m-r}) / (m+1), then Horner in h.
        let mut coeffs: Vec<Matrix2> = Vec::with_capacity(TAYLOR_ORDER + 1);
        coeffs.push(v);
        for m in 0..TAYLOR_ORDER {
            let mut next = [[Complex64::new(0.0, 0.0); 2]; 2];
            for r in 0..=m {
                let prod = mat_mul(&b[r], &coeffs[m - r]);
                for i in 0..2 {
                    for j in 0..2 {
                        next[i][j] += prod[i][j];
                    }
                }
            }
            let inv = 1.0 / (m as f64 + 1.0);
            for row in next.iter_mut() {
                for z in row.iter_mut() {
                    *z *= inv;
                }
            }
            coeffs.push(next);
        }
        let mut acc = coeffs[TAYLOR_ORDER];
        for m in (0..TAYLOR_ORDER).rev() {
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] = coeffs[m][i][j] + h * acc[i][j];
                }
            }
        }
        v = acc;
    }
    v
}

/// A numerically comfortable integration radius for `e`.
///
/// The jets are read as exact polynomials, so the monodromy is the same
/// along every circle around the origin; what the radius controls is
/// conditioning.  When the coefficients grow like `rho^k` (the tails of a
/// series with convergence radius `1/rho`), evaluating beyond `1/rho`
/// inflates the system norm exponentially, so we stay at half the
/// empirical radius `1/rho`, capped at `3/4` and floored well away from
/// zero.
pub fn suggested_radius(e: &Lde) -> f64 {
    let mut rho = 0.0_f64;
    for jet in [e.p(), e.q()] {
        for (k, c) in jet.terms() {
            if k >= 1 {
                rho = rho.max(c.abs_f64().powf(1.0 / k as f64));
            }
        }
    }
    if rho <= 2.0 / 3.0 {
        0.75
    } else {
        (0.5 / rho).max(0.05)
    }
}

/// Monodromy matrix of the companion system of `e` along `|x| = radius`,
/// counterclockwise from the basepoint `x = radius`, to accuracy `tol`
/// (measured as the difference between consecutive step-doubled runs).
///
/// `steps` seeds the doubling loop.  Errors: `InvalidInput` for a
/// non-positive radius or tolerance, `ToleranceNotMet` if the doubling cap
/// is reached first.
pub fn numeric_monodromy(e: &Lde, radius: f64, steps: usize, tol: f64) -> Result<Matrix2> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!(
            "monodromy radius must be positive and finite, got {radius}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "monodromy tolerance must be positive, got {tol}"
        )));
    }
    let shift = -(e.nu() as i64);
    let entries: [[Terms; 2]; 2] = [
        [Terms::new(), entry_terms(None, shift, radius)],
        [
            entry_terms(Some(e.q()), shift, radius),
            entry_terms(Some(e.p()), shift, radius),
        ],
    ];
    let mut n = steps.clamp(8, MAX_STEPS);
    let mut coarse = integrate(&entries, n);
    let mut best = f64::INFINITY;
    while n < MAX_STEPS {
        n *= 2;
        let fine = integrate(&entries, n);
        let err = if mat_is_finite(&fine) && mat_is_finite(&coarse) {
            mat_diff_norm(&fine, &coarse)
        } else {
            f64::INFINITY
        };
        if err <= tol {
            return Ok(fine);
        }
        best = best.min(err);
        coarse = fine;
    }
    Err(Error::ToleranceNotMet { tol, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;
    use crate::scalar::Scalar;
    use crate::MONODROMY_TOL;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn eigenvalues(m: &Matrix2) -> (Complex64, Complex64) {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d = (tr * tr - 4.0 * det).sqrt();
        ((tr + d) / 2.0, (tr - d) / 2.0)
    }

    #[test]
    fn nonsingular_equation_has_identity_monodromy() {
        // y'' = 0 in delta_0 form: p = 1, q = 0; solutions 1 and x are
        // single-valued.
        let e = Lde::new(0, Jet::one(6), Jet::zero(6)).unwrap();
        let m = numeric_monodromy(&e, 0.8, 16, MONODROMY_TOL).unwrap();
        assert!(close(m[0][0], Complex64::new(1.0, 0.0), 1e-9));
        assert!(close(m[0][1], Complex64::new(0.0, 0.0), 1e-9));
        assert!(close(m[1][0], Complex64::new(0.0, 0.0), 1e-9));
        assert!(close(m[1][1], Complex64::new(1.0, 0.0), 1e-9));
    }

    #[test]
    fn euler_operator_squared_picks_up_the_log_translation() {
        // delta_0^2 y = 0 has solutions 1, log x; in the frame seeded at the
        // basepoint the translation log x -> log x + 2 pi i shows up as an
        // off-diagonal 2 pi i.
        let e = Lde::new(0, Jet::zero(6), Jet::zero(6)).unwrap();
        let m = numeric_monodromy(&e, 1.0, 16, MONODROMY_TOL).unwrap();
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!(close(tr, Complex64::new(2.0, 0.0), 1e-9));
        assert!(close(det, Complex64::new(1.0, 0.0), 1e-9));
        // Unipotent but not the identity.
        assert!((m[0][1].norm() - 2.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn regular_exponents_appear_in_the_eigenvalues() {
        // (delta_0 - 1/2) delta_0: lambda in {0, 1/2}, eigenvalues {1, -1}.
        let e = Lde::new(
            0,
            Jet::constant(Scalar::from_ratio(1, 2), 8),
            Jet::zero(8),
        )
        .unwrap();
        let m = numeric_monodromy(&e, 0.7, 16, MONODROMY_TOL).unwrap();
        let (a, b) = eigenvalues(&m);
        let tol = 1e-8;
        assert!(
            (close(a, Complex64::new(1.0, 0.0), tol) && close(b, Complex64::new(-1.0, 0.0), tol))
                || (close(b, Complex64::new(1.0, 0.0), tol)
                    && close(a, Complex64::new(-1.0, 0.0), tol))
        );
    }

    #[test]
    fn determinant_matches_the_trace_integral() {
        // det M = exp(2 pi i p^(nu)): only the x^nu coefficient of p
        // survives the integral of the trace around the circle.
        let p = Jet::from_terms(
            &[(0, Scalar::from_int(1)), (1, Scalar::from_ratio(1, 3))],
            8,
        );
        let q = Jet::from_terms(&[(1, Scalar::from_ratio(1, 4))], 8);
        let e = Lde::new(1, p, q).unwrap();
        let m = numeric_monodromy(&e, 0.9, 32, MONODROMY_TOL).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!(close(det, expect, 1e-8));
    }

    #[test]
    fn trace_is_radius_independent() {
        let p = Jet::from_terms(&[(1, Scalar::from_ratio(1, 5))], 8);
        let q = Jet::from_terms(
            &[(0, Scalar::from_ratio(1, 4)), (2, Scalar::from_ratio(1, 7))],
            8,
        );
        let e = Lde::new(1, p, q).unwrap();
        let m1 = numeric_monodromy(&e, 0.6, 16, MONODROMY_TOL).unwrap();
        let m2 = numeric_monodromy(&e, 1.1, 16, MONODROMY_TOL).unwrap();
        let t1 = m1[0][0] + m1[1][1];
        let t2 = m2[0][0] + m2[1][1];
        assert!(close(t1, t2, 1e-7));
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let e = Lde::new(0, Jet::one(4), Jet::zero(4)).unwrap();
        assert!(matches!(
            numeric_monodromy(&e, 0.0, 16, 1e-8),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            numeric_monodromy(&e, 1.0, 16, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn the_suggested_radius_backs_away_from_coefficient_growth() {
        // Tame coefficients keep the default radius.
        let tame = Lde::new(
            1,
            Jet::zero(8),
            Jet::from_terms(&[(0, Scalar::from_ratio(1, 4)), (1, Scalar::from_ratio(1, 6))], 8),
        )
        .unwrap();
        assert_eq!(suggested_radius(&tame), 0.75);
        // A geometric tail with ratio 2 (series pole at 1/2) pulls the
        // radius inside the empirical convergence disk.
        let d = Jet::poly_i64(0, &[1, 2], 14);
        let p = &d.delta(1) * &d.inv().unwrap();
        let q = (&d * &d).scaled(&Scalar::from_ratio(1, 4));
        let e = Lde::new(1, p, q).unwrap();
        let r = suggested_radius(&e);
        assert!(r < 0.5, "radius {r}");
        assert!(r > 0.1, "radius {r}");
        assert!(numeric_monodromy(&e, r, 32, MONODROMY_TOL).is_ok());
    }
}
