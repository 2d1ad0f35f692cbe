//! Orientation and in-circle predicates with a fast f64 path and an exact
//! rational fallback for nearly degenerate configurations.
//!
//! The fast path uses static forward error bounds on the determinant; when the
//! magnitude falls below the bound the sign is recomputed exactly in
//! `BigRational` arithmetic (f64 inputs are dyadic, so the conversion and the
//! determinant are exact). The fallback triggers only for nearly collinear or
//! nearly cocircular inputs.

use num_rational::BigRational;
use std::cmp::Ordering;

use crate::geom::Point2;

const EPS: f64 = f64::EPSILON / 2.0; // 2^-53

fn orient_err_bound() -> f64 {
    (3.0 + 16.0 * EPS) * EPS
}

fn incircle_err_bound() -> f64 {
    (10.0 + 96.0 * EPS) * EPS
}

fn big(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn sign_to_ordering(s: num_bigint::Sign) -> Ordering {
    match s {
        num_bigint::Sign::Plus => Ordering::Greater,
        num_bigint::Sign::NoSign => Ordering::Equal,
        num_bigint::Sign::Minus => Ordering::Less,
    }
}

fn rational_sign(x: &BigRational) -> Ordering {
    // denominator is positive by normalization
    sign_to_ordering(x.numer().sign())
}

/// Sign of the signed area of the triangle `(a, b, c)`.
///
/// `Greater` when `c` lies strictly to the left of the directed line `a -> b`
/// (counterclockwise turn), `Equal` when collinear.
pub fn orient2d(a: &Point2, b: &Point2, c: &Point2) -> Ordering {
    let detleft = (a.0[0] - c.0[0]) * (b.0[1] - c.0[1]);
    let detright = (a.0[1] - c.0[1]) * (b.0[0] - c.0[0]);
    let det = detleft - detright;
    let detsum = detleft.abs() + detright.abs();
    if det.abs() > orient_err_bound() * detsum {
        return det.partial_cmp(&0.0).expect("finite determinant");
    }
    orient2d_exact(a, b, c)
}

fn orient2d_exact(a: &Point2, b: &Point2, c: &Point2) -> Ordering {
    let acx = big(a.0[0]) - big(c.0[0]);
    let acy = big(a.0[1]) - big(c.0[1]);
    let bcx = big(b.0[0]) - big(c.0[0]);
    let bcy = big(b.0[1]) - big(c.0[1]);
    let det = acx * bcy - acy * bcx;
    rational_sign(&det)
}

/// In-circle test for the circumcircle of the counterclockwise triangle
/// `(a, b, c)`.
///
/// `Greater` when `d` lies strictly inside the circle, `Equal` when cocircular.
pub fn incircle(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> Ordering {
    let adx = a.0[0] - d.0[0];
    let ady = a.0[1] - d.0[1];
    let bdx = b.0[0] - d.0[0];
    let bdy = b.0[1] - d.0[1];
    let cdx = c.0[0] - d.0[0];
    let cdy = c.0[1] - d.0[1];

    let ad2 = adx * adx + ady * ady;
    let bd2 = bdx * bdx + bdy * bdy;
    let cd2 = cdx * cdx + cdy * cdy;

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;

    let det = ad2 * (bdxcdy - cdxbdy) + bd2 * (cdxady - adxcdy) + cd2 * (adxbdy - bdxady);
    let permanent = ad2 * (bdxcdy.abs() + cdxbdy.abs())
        + bd2 * (cdxady.abs() + adxcdy.abs())
        + cd2 * (adxbdy.abs() + bdxady.abs());
    if det.abs() > incircle_err_bound() * permanent {
        return det.partial_cmp(&0.0).expect("finite determinant");
    }
    incircle_exact(a, b, c, d)
}

fn incircle_exact(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> Ordering {
    let adx = big(a.0[0]) - big(d.0[0]);
    let ady = big(a.0[1]) - big(d.0[1]);
    let bdx = big(b.0[0]) - big(d.0[0]);
    let bdy = big(b.0[1]) - big(d.0[1]);
    let cdx = big(c.0[0]) - big(d.0[0]);
    let cdy = big(c.0[1]) - big(d.0[1]);

    let ad2 = &adx * &adx + &ady * &ady;
    let bd2 = &bdx * &bdx + &bdy * &bdy;
    let cd2 = &cdx * &cdx + &cdy * &cdy;

    let det = ad2 * (&bdx * &cdy - &cdx * &bdy) + bd2 * (&cdx * &ady - &adx * &cdy)
        + cd2 * (&adx * &bdy - &bdx * &ady);
    rational_sign(&det)
}

/// f64 value of the in-circle determinant (for reporting/tolerance checks).
pub fn incircle_det(a: &Point2, b: &Point2, c: &Point2, d: &Point2) -> f64 {
    let adx = a.0[0] - d.0[0];
    let ady = a.0[1] - d.0[1];
    let bdx = b.0[0] - d.0[0];
    let bdy = b.0[1] - d.0[1];
    let cdx = c.0[0] - d.0[0];
    let cdy = c.0[1] - d.0[1];
    let ad2 = adx * adx + ady * ady;
    let bd2 = bdx * bdx + bdy * bdy;
    let cd2 = cdx * cdx + cdy * cdy;
    ad2 * (bdx * cdy - cdx * bdy) + bd2 * (cdx * ady - adx * cdy) + cd2 * (adx * bdy - bdx * ady)
}

/// Circumcenter of a non-degenerate triangle.
pub fn circumcenter(a: &Point2, b: &Point2, c: &Point2) -> Point2 {
    let abx = b.0[0] - a.0[0];
    let aby = b.0[1] - a.0[1];
    let acx = c.0[0] - a.0[0];
    let acy = c.0[1] - a.0[1];
    let ab2 = abx * abx + aby * aby;
    let ac2 = acx * acx + acy * acy;
    let d = 2.0 * (abx * acy - aby * acx);
    let ux = a.0[0] + (acy * ab2 - aby * ac2) / d;
    let uy = a.0[1] + (abx * ac2 - acx * ab2) / d;
    Point2::xy(ux, uy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_signs() {
        let a = Point2::xy(0.0, 0.0);
        let b = Point2::xy(1.0, 0.0);
        assert_eq!(orient2d(&a, &b, &Point2::xy(0.5, 1.0)), Ordering::Greater);
        assert_eq!(orient2d(&a, &b, &Point2::xy(0.5, -1.0)), Ordering::Less);
        assert_eq!(orient2d(&a, &b, &Point2::xy(2.0, 0.0)), Ordering::Equal);
    }

    #[test]
    fn orientation_near_degenerate_is_exact() {
        let a = Point2::xy(0.0, 0.0);
        let b = Point2::xy(1.0, 1.0);
        let t = 0.37;
        let on = Point2::xy(t, t);
        assert_eq!(orient2d(&a, &b, &on), Ordering::Equal);
        // one-ulp perturbations around the line must get the exact sign
        let above = Point2::xy(t, f64::from_bits(t.to_bits() + 1));
        let below = Point2::xy(t, f64::from_bits(t.to_bits() - 1));
        assert_eq!(orient2d(&a, &b, &above), Ordering::Greater);
        assert_eq!(orient2d(&a, &b, &below), Ordering::Less);
    }

    #[test]
    fn incircle_near_cocircular_is_exact() {
        let a = Point2::xy(1.0, 0.0);
        let b = Point2::xy(0.0, 1.0);
        let c = Point2::xy(-1.0, 0.0);
        let just_in = Point2::xy(0.0, -(f64::from_bits(1.0f64.to_bits() - 1)));
        let just_out = Point2::xy(0.0, -(f64::from_bits(1.0f64.to_bits() + 1)));
        assert_eq!(incircle(&a, &b, &c, &just_in), Ordering::Greater);
        assert_eq!(incircle(&a, &b, &c, &just_out), Ordering::Less);
    }

    #[test]
    fn incircle_signs_unit_circle() {
        let a = Point2::xy(1.0, 0.0);
        let b = Point2::xy(0.0, 1.0);
        let c = Point2::xy(-1.0, 0.0);
        // (a, b, c) is CCW
        assert_eq!(orient2d(&a, &b, &c), Ordering::Greater);
        assert_eq!(incircle(&a, &b, &c, &Point2::xy(0.0, 0.0)), Ordering::Greater);
        assert_eq!(incircle(&a, &b, &c, &Point2::xy(0.0, -1.0)), Ordering::Equal);
        assert_eq!(incircle(&a, &b, &c, &Point2::xy(2.0, 0.0)), Ordering::Less);
    }

    #[test]
    fn circumcenter_equidistant() {
        let a = Point2::xy(0.3, 1.7);
        let b = Point2::xy(-2.0, 0.4);
        let c = Point2::xy(1.1, -0.9);
        let o = circumcenter(&a, &b, &c);
        let ra = o.dist(&a);
        assert!((o.dist(&b) - ra).abs() < 1e-12);
        assert!((o.dist(&c) - ra).abs() < 1e-12);
    }
}
