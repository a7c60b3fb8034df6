//! Numerical integration over balls and boxes, including weakly singular
//! 1/r integrands. This layer is the oracle behind every analytic moment
//! formula in the crate.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::types::{c64, Box3, ComplexVec3, Vec3};

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            pp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// 1-D Gauss-Legendre quadrature of a complex integrand on [a, b].
pub fn integrate_1d(f: impl Fn(f64) -> c64, a: f64, b: f64, n: usize) -> c64 {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = c64::new(0.0, 0.0);
    for (x, w) in xs.iter().zip(&ws) {
        acc += f(mid + half * x) * (w * half);
    }
    acc
}

/// Product rule on the unit ball: Gauss-Legendre in r and cos(theta),
/// trapezoid (uniform) in phi. Radial nodes are stored on [0, 1] and
/// mapped to [0, a] at call time.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// (t, w) on [0, 1]
    radial: Vec<(f64, f64)>,
    /// (unit direction, solid-angle weight); weights sum to 4 pi
    angular: Vec<(Vec3, f64)>,
}

impl BallRule {
    pub fn new(n_r: usize, n_theta: usize, n_phi: usize) -> Self {
        let (rx, rw) = gauss_legendre(n_r);
        let radial = rx
            .iter()
            .zip(&rw)
            .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        let (cx, cw) = gauss_legendre(n_theta);
        let mut angular = Vec::with_capacity(n_theta * n_phi);
        let dphi = 2.0 * PI / n_phi as f64;
        for (c, wc) in cx.iter().zip(&cw) {
            let s = (1.0 - c * c).sqrt();
            for ip in 0..n_phi {
                let phi = dphi * ip as f64;
                let dir = Vec3::new(s * phi.cos(), s * phi.sin(), *c);
                angular.push((dir, wc * dphi));
            }
        }
        BallRule { n_r, n_theta, n_phi, radial, angular }
    }

    /// Default orders, sufficient for <= 1e-10 relative error on the
    /// polynomial radial profiles used throughout.
    pub fn default_rule() -> Self {
        BallRule::new(24, 24, 48)
    }

    /// Coarse rule for pairwise coefficient assembly at scale.
    pub fn coarse() -> Self {
        BallRule::new(6, 6, 12)
    }

    pub fn angular(&self) -> &[(Vec3, f64)] {
        &self.angular
    }

    pub fn radial(&self) -> &[(f64, f64)] {
        &self.radial
    }
}

fn check_finite(v: c64, node: Vec3) -> Result<c64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { node })
    }
}

/// Integral of a scalar integrand over the ball B(center, a).
pub fn integrate_ball(
    f: impl Fn(Vec3) -> c64,
    center: Vec3,
    a: f64,
    rule: &BallRule,
) -> Result<c64> {
    let mut acc = c64::new(0.0, 0.0);
    for &(t, wt) in &rule.radial {
        let r = t * a;
        let jac = r * r * a; // r^2 dr with dr = a dt
        let mut shell = c64::new(0.0, 0.0);
        for &(dir, wo) in &rule.angular {
            let y = center + dir * r;
            shell += check_finite(f(y), y)? * wo;
        }
        acc += shell * (wt * jac);
    }
    Ok(acc)
}

/// Vector version of [`integrate_ball`].
pub fn integrate_ball_vec(
    f: impl Fn(Vec3) -> ComplexVec3,
    center: Vec3,
    a: f64,
    rule: &BallRule,
) -> Result<ComplexVec3> {
    let mut acc = ComplexVec3::ZERO;
    for &(t, wt) in &rule.radial {
        let r = t * a;
        let jac = r * r * a;
        let mut shell = ComplexVec3::ZERO;
        for &(dir, wo) in &rule.angular {
            let y = center + dir * r;
            let v = f(y);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: y });
            }
            shell = shell + v.scale(c64::new(wo, 0.0));
        }
        acc = acc + shell.scale(c64::new(wt * jac, 0.0));
    }
    Ok(acc)
}

/// Integral over B(center, a) of f_smooth(y) * g(y, x_s) where
/// g(y, x_s) = exp(ik|y - x_s|) / (4 pi |y - x_s|).
///
/// When the singular point lies inside the ball the integral is done in
/// spherical coordinates centered at x_s, so the r^2 Jacobian cancels the
/// 1/r kernel. Otherwise the kernel is smooth on the ball and the regular
/// rule applies.
pub fn integrate_ball_singular(
    f_smooth: impl Fn(Vec3) -> c64,
    singular_point: Vec3,
    center: Vec3,
    a: f64,
    k: f64,
    rule: &BallRule,
) -> Result<c64> {
    let b = singular_point - center;
    let bn = b.norm();
    if bn >= a {
        // Nonsingular on the ball; regular product rule.
        return integrate_ball(
            |y| {
                let r = (y - singular_point).norm();
                f_smooth(y) * c64::new(0.0, k * r).exp() / (4.0 * PI * r)
            },
            center,
            a,
            rule,
        );
    }
    let mut acc = c64::new(0.0, 0.0);
    for &(dir, wo) in &rule.angular {
        // Radial extent from x_s along dir to the sphere |y - center| = a.
        let bd = b.dot(dir);
        let rmax = -bd + (bd * bd + a * a - bn * bn).sqrt();
        let mut ray = c64::new(0.0, 0.0);
        for &(t, wt) in &rule.radial {
            let r = t * rmax;
            let y = singular_point + dir * r;
            // r^2 * g = r * exp(ikr) / (4 pi)
            let v = check_finite(f_smooth(y), y)? * c64::new(0.0, k * r).exp() * (r / (4.0 * PI));
            ray += v * (wt * rmax);
        }
        acc += ray * wo;
    }
    Ok(acc)
}

/// Same recentring for a vector-valued smooth factor.
pub fn integrate_ball_singular_vec(
    f_smooth: impl Fn(Vec3) -> ComplexVec3,
    singular_point: Vec3,
    center: Vec3,
    a: f64,
    k: f64,
    rule: &BallRule,
) -> Result<ComplexVec3> {
    let b = singular_point - center;
    let bn = b.norm();
    if bn >= a {
        return integrate_ball_vec(
            |y| {
                let r = (y - singular_point).norm();
                f_smooth(y).scale(c64::new(0.0, k * r).exp() / (4.0 * PI * r))
            },
            center,
            a,
            rule,
        );
    }
    let mut acc = ComplexVec3::ZERO;
    for &(dir, wo) in &rule.angular {
        let bd = b.dot(dir);
        let rmax = -bd + (bd * bd + a * a - bn * bn).sqrt();
        let mut ray = ComplexVec3::ZERO;
        for &(t, wt) in &rule.radial {
            let r = t * rmax;
            let y = singular_point + dir * r;
            let v = f_smooth(y);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: y });
            }
            let s = c64::new(0.0, k * r).exp() * (r / (4.0 * PI)) * (wt * rmax);
            ray = ray + v.scale(s);
        }
        acc = acc + ray.scale(c64::new(wo, 0.0));
    }
    Ok(acc)
}

/// Tensor Gauss rule on an axis-aligned box.
#[derive(Debug, Clone)]
pub struct BoxRule {
    pub n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl BoxRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        BoxRule { n, nodes, weights }
    }

    pub fn default_rule() -> Self {
        BoxRule::new(16)
    }
}

/// Integral of a scalar integrand over a box.
pub fn integrate_box(f: impl Fn(Vec3) -> c64, bx: &Box3, rule: &BoxRule) -> Result<c64> {
    let map = |lo: f64, hi: f64, t: f64| 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
    let jac = bx.volume() / 8.0;
    let mut acc = c64::new(0.0, 0.0);
    for (xi, wx) in rule.nodes.iter().zip(&rule.weights) {
        let x = map(bx.lo.x, bx.hi.x, *xi);
        for (yi, wy) in rule.nodes.iter().zip(&rule.weights) {
            let y = map(bx.lo.y, bx.hi.y, *yi);
            for (zi, wz) in rule.nodes.iter().zip(&rule.weights) {
                let z = map(bx.lo.z, bx.hi.z, *zi);
                let p = Vec3::new(x, y, z);
                acc += check_finite(f(p), p)? * (wx * wy * wz * jac);
            }
        }
    }
    Ok(acc)
}

/// Integral of g(0, y) = exp(ik|y|)/(4 pi |y|) over the cube of half-width
/// `half` centered at the singular point.
///
/// The solid angle splits into six face pyramids; on each, the radial
/// integral is analytic and the remaining face integral is smooth, so a
/// 2-D Gauss rule converges fast. Used for self-cell terms in collocation.
pub fn cube_self_green(half: f64, k: f64, n: usize) -> c64 {
    // G(R) = int_0^R r e^{ikr} dr / (4 pi)
    let g_of = |r_max: f64| -> c64 {
        if k == 0.0 {
            c64::new(r_max * r_max / 2.0, 0.0) / (4.0 * PI)
        } else {
            let e = c64::new(0.0, k * r_max).exp();
            (e * c64::new(1.0 / (k * k), -r_max / k) - 1.0 / (k * k)) / (4.0 * PI)
        }
    };
    let (xs, ws) = gauss_legendre(n);
    let h = half;
    let mut acc = c64::new(0.0, 0.0);
    for (u, wu) in xs.iter().zip(&ws) {
        let uu = u * h;
        for (v, wv) in xs.iter().zip(&ws) {
            let vv = v * h;
            let rho = (uu * uu + vv * vv + h * h).sqrt();
            // dOmega = h / rho^3 du dv on the face plane
            acc += g_of(rho) * (wu * wv * h * h * h / (rho * rho * rho));
        }
    }
    acc * 6.0
}
