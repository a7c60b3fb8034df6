//! Scalar Helmholtz kernel g(x, y) = exp(ik|x-y|) / (4 pi |x-y|), its
//! gradient, far-field form, and the kernel-difference bound used to
//! justify the neglected remainder terms.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::types::{c64, ComplexVec3, Vec3};

/// Points closer than this are treated as coincident.
pub const COINCIDENT_TOL: f64 = 1e-14;

/// Constant in [`kernel_diff_bound`], calibrated once over a reference
/// configuration sweep (see tests); covers sampled cases with margin.
pub const KERNEL_DIFF_C: f64 = 2.0;

/// g(x, y) = exp(ik|x-y|) / (4 pi |x-y|).
pub fn green(x: Vec3, y: Vec3, k: f64) -> Result<c64> {
    let r = (x - y).norm();
    if r < COINCIDENT_TOL {
        return Err(Error::CoincidentPoints(r));
    }
    Ok(c64::new(0.0, k * r).exp() / (4.0 * PI * r))
}

/// Gradient of g with respect to the first argument:
/// g * (ik - 1/r) * (x - y)/r. Antisymmetric under swapping x and y.
pub fn grad_x_green(x: Vec3, y: Vec3, k: f64) -> Result<ComplexVec3> {
    let d = x - y;
    let r = d.norm();
    if r < COINCIDENT_TOL {
        return Err(Error::CoincidentPoints(r));
    }
    let g = c64::new(0.0, k * r).exp() / (4.0 * PI * r);
    let s = g * c64::new(-1.0 / r, k) / r;
    Ok(ComplexVec3::new(s * d.x, s * d.y, s * d.z))
}

/// Far-field form of g for |x| >> a >= |y|:
/// (exp(ik|x|) / (4 pi |x|)) * exp(-ik beta.y), beta = x/|x|.
pub fn far_field_green(x: Vec3, y: Vec3, k: f64, origin_scale: f64) -> Result<c64> {
    let rx = x.norm();
    if rx <= 2.0 * origin_scale {
        return Err(Error::Precondition(format!(
            "far field requires |x| > 2a, got |x| = {rx}, a = {origin_scale}"
        )));
    }
    let beta = x * (1.0 / rx);
    Ok(c64::new(0.0, k * rx).exp() / (4.0 * PI * rx) * c64::new(0.0, -k * beta.dot(y)).exp())
}

/// Upper bound on |g(x, y) - g(x, x_m)| for |y - x_m| <= a at distance
/// d = |x - x_m|: c * a * max(k/d, 1/d^2) with c = [`KERNEL_DIFF_C`].
pub fn kernel_diff_bound(a: f64, d: f64, k: f64) -> Result<f64> {
    if d <= 2.0 * a {
        return Err(Error::Precondition(format!(
            "kernel_diff_bound requires d > 2a, got d = {d}, a = {a}"
        )));
    }
    Ok(KERNEL_DIFF_C * a * (k / d).max(1.0 / (d * d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn static_kernel_values() {
        let g = green(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, 0.0).unwrap();
        assert_relative_eq!(g.re, 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert_eq!(g.im, 0.0);
        let g2 = green(Vec3::new(0.0, 2.0, 0.0), Vec3::ZERO, 0.0).unwrap();
        assert_relative_eq!(g2.re, 1.0 / (8.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn unit_distance_k1() {
        let g = green(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, 1.0).unwrap();
        assert_relative_eq!(g.re, 1.0_f64.cos() / (4.0 * PI), epsilon = 1e-14);
        assert_relative_eq!(g.im, 1.0_f64.sin() / (4.0 * PI), epsilon = 1e-14);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(
            green(Vec3::ZERO, Vec3::ZERO, 1.0),
            Err(Error::CoincidentPoints(_))
        ));
    }

    #[test]
    fn static_gradient() {
        let gr = grad_x_green(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, 0.0).unwrap();
        assert_relative_eq!(gr.x.re, -1.0 / (4.0 * PI), epsilon = 1e-14);
        assert!(gr.y.norm() < 1e-16 && gr.z.norm() < 1e-16);
    }

    #[test]
    fn gradient_vs_finite_differences() {
        let x = Vec3::new(0.7, -0.4, 1.1);
        let y = Vec3::new(-0.2, 0.3, 0.0);
        let k = 1.7;
        let gr = grad_x_green(x, y, k).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut dp = Vec3::ZERO;
            match i {
                0 => dp.x = h,
                1 => dp.y = h,
                _ => dp.z = h,
            }
            let fd = (green(x + dp, y, k).unwrap() - green(x - dp, y, k).unwrap()) / (2.0 * h);
            assert_relative_eq!(gr.comp(i).re, fd.re, max_relative = 1e-7);
            assert_relative_eq!(gr.comp(i).im, fd.im, max_relative = 1e-7);
        }
    }

    #[test]
    fn gradient_k1_closed_form_at_unit_distance() {
        // grad = g * (i - 1) * (1, 0, 0) at x = e1, y = 0, k = 1
        let g = green(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, 1.0).unwrap();
        let gr = grad_x_green(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, 1.0).unwrap();
        let expect = g * c64::new(-1.0, 1.0);
        assert_relative_eq!(gr.x.re, expect.re, epsilon = 1e-14);
        assert_relative_eq!(gr.x.im, expect.im, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn gradient_antisymmetry(
            ax in -2.0..2.0f64, ay in -2.0..2.0f64, az in -2.0..2.0f64,
            bx in 3.0..5.0f64, by in -2.0..2.0f64, bz in -2.0..2.0f64,
            k in 0.0..4.0f64,
        ) {
            let x = Vec3::new(ax, ay, az);
            let y = Vec3::new(bx, by, bz);
            let g1 = grad_x_green(x, y, k).unwrap();
            let g2 = grad_x_green(y, x, k).unwrap();
            prop_assert!((g1 + g2).norm() < 1e-12 * (g1.norm() + 1.0));
        }
    }

    #[test]
    fn green_satisfies_helmholtz_fd() {
        let y = Vec3::ZERO;
        let k = 2.0;
        let x0 = Vec3::new(0.9, 0.3, -0.5);
        for &h in &[1e-3, 5e-4] {
            let mut lap = c64::new(0.0, 0.0);
            let g0 = green(x0, y, k).unwrap();
            for i in 0..3 {
                let mut dp = Vec3::ZERO;
                match i {
                    0 => dp.x = h,
                    1 => dp.y = h,
                    _ => dp.z = h,
                }
                lap += green(x0 + dp, y, k).unwrap() + green(x0 - dp, y, k).unwrap() - 2.0 * g0;
            }
            lap /= h * h;
            let res = (lap + g0 * (k * k)).norm();
            assert!(res < 50.0 * h * h, "residual {res} at h = {h}");
        }
    }

    #[test]
    fn radiation_condition_decay() {
        // |dg/dr - ikg| should decay faster than 1/r.
        let y = Vec3::new(0.1, 0.0, 0.0);
        let k = 1.0;
        let dir = Vec3::new(0.0, 0.6, 0.8);
        let mut prev = f64::INFINITY;
        for &r in &[1e2, 1e3, 1e4] {
            let x = dir * r;
            let h = 1e-3;
            let dgdr =
                (green(dir * (r + h), y, k).unwrap() - green(dir * (r - h), y, k).unwrap())
                    / (2.0 * h);
            let g = green(x, y, k).unwrap();
            let val = (dgdr - c64::new(0.0, k) * g).norm() * r;
            assert!(val < prev, "r * |dg/dr - ikg| not decreasing at r = {r}");
            prev = val;
        }
    }

    #[test]
    fn far_field_center_is_exact() {
        let x = Vec3::new(3.0, 4.0, 0.0);
        let ff = far_field_green(x, Vec3::ZERO, 1.3, 0.01).unwrap();
        let ex = green(x, Vec3::ZERO, 1.3).unwrap();
        assert_relative_eq!(ff.re, ex.re, epsilon = 1e-15);
        assert_relative_eq!(ff.im, ex.im, epsilon = 1e-15);
    }

    #[test]
    fn far_field_error_scales_with_a_over_x() {
        let k = 1.0;
        let dirs = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.58, 0.58, 0.58),
        ];
        let mut prev = f64::INFINITY;
        for &rx in &[10.0, 100.0, 1000.0] {
            let x = Vec3::new(0.0, 0.0, rx);
            let a = 0.01;
            let mut worst: f64 = 0.0;
            for d in dirs {
                let y = d * (a / d.norm());
                let ff = far_field_green(x, y, k, a).unwrap();
                let ex = green(x, y, k).unwrap();
                worst = worst.max(((ff - ex) / ex).norm());
            }
            // relative error about a/|x|, order-1 constant
            assert!(worst < 5.0 * a / rx, "error {worst} at |x| = {rx}");
            assert!(worst < prev);
            prev = worst;
        }
    }

    #[test]
    fn far_field_requires_distance() {
        assert!(far_field_green(Vec3::new(0.01, 0.0, 0.0), Vec3::ZERO, 1.0, 0.01).is_err());
    }

    #[test]
    fn kernel_diff_bound_covers_sampled_differences() {
        let a = 0.01;
        let k = 0.0;
        let d = 1.0;
        let xm = Vec3::ZERO;
        let x = Vec3::new(d, 0.0, 0.0);
        let bound = kernel_diff_bound(a, d, k).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..64 {
            let th = PI * (i as f64 + 0.5) / 64.0;
            for j in 0..64 {
                let ph = 2.0 * PI * j as f64 / 64.0;
                let y = xm + Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()) * a;
                let diff = (green(x, y, k).unwrap() - green(x, xm, k).unwrap()).norm();
                worst = worst.max(diff);
            }
        }
        assert!(worst <= bound, "sampled diff {worst} exceeds bound {bound}");
        // formula spot checks
        assert_relative_eq!(
            kernel_diff_bound(0.01, 1.0, 10.0).unwrap(),
            KERNEL_DIFF_C * 0.1,
            epsilon = 1e-15
        );
        assert!(kernel_diff_bound(0.01, 0.015, 1.0).is_err());
    }
}
