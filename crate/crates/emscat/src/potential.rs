//! The radial scatterer potential p(r, a) = gamma/(4 pi a^kappa) (1-t)^2 h(t),
//! the derived field q = grad(K^2)/K^2, and the moment integrals j_m, I(a),
//! Z_m, Y_i with both analytic and quadrature evaluations.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_1d, integrate_ball, BallRule};
use crate::types::{c64, ComplexVec3, Particle, RadialProfileKind, Vec3};

/// Number of radial samples in the denominator-zero pre-scan.
const DENOM_SCAN: usize = 1024;

/// Radial potential profile of a single particle.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    pub gamma: c64,
    pub kappa: f64,
    pub radius: f64,
    pub h: RadialProfileKind,
}

impl RadialProfile {
    pub fn new(gamma: c64, kappa: f64, radius: f64) -> Result<Self> {
        Self::with_h(gamma, kappa, radius, RadialProfileKind::Constant)
    }

    pub fn with_h(gamma: c64, kappa: f64, radius: f64, h: RadialProfileKind) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::NonPositiveRadius(radius));
        }
        if gamma.im < 0.0 {
            return Err(Error::NegativeImGamma(gamma.im));
        }
        if !(kappa > 0.0 && kappa < 3.0) {
            return Err(Error::KappaOutOfRange(kappa));
        }
        Ok(RadialProfile { gamma, kappa, radius, h })
    }

    pub fn of_particle(p: &Particle) -> Self {
        RadialProfile { gamma: p.gamma, kappa: p.kappa, radius: p.radius, h: p.profile }
    }

    /// nu = 4 pi k^2 a^kappa, the dimensionless denominator offset.
    pub fn nu(&self, k: f64) -> f64 {
        4.0 * PI * k * k * self.radius.powf(self.kappa)
    }

    /// w(t) = gamma (1-t)^2 h(t); p(r) = w(t) / (4 pi a^kappa).
    fn w(&self, t: f64) -> c64 {
        self.gamma * ((1.0 - t) * (1.0 - t) * self.h.eval(t))
    }

    /// dw/dt = gamma [ -2(1-t) h + (1-t)^2 h' ].
    fn w_prime(&self, t: f64) -> c64 {
        let u = 1.0 - t;
        self.gamma * (-2.0 * u * self.h.eval(t) + u * u * self.h.deriv(t))
    }
}

/// p(r, a); zero for r > a, continuous (value 0) at r = a.
pub fn p_of(r: f64, profile: &RadialProfile) -> c64 {
    let t = r / profile.radius;
    if t > 1.0 {
        return c64::new(0.0, 0.0);
    }
    profile.w(t) / (4.0 * PI * profile.radius.powf(profile.kappa))
}

/// dp/dr; zero outside the ball.
pub fn p_prime(r: f64, profile: &RadialProfile) -> c64 {
    let t = r / profile.radius;
    if t > 1.0 {
        return c64::new(0.0, 0.0);
    }
    profile.w_prime(t) / (4.0 * PI * profile.radius.powf(profile.kappa + 1.0))
}

/// Radial part of q: q(y) = q_r(r) r0 with q_r = p'(r) / (k^2 + p(r)).
pub fn q_radial(r: f64, profile: &RadialProfile, k: f64) -> Result<c64> {
    let denom = c64::new(k * k, 0.0) + p_of(r, profile);
    if denom.norm() < 1e-12 {
        return Err(Error::DegeneratePotential(denom.norm()));
    }
    Ok(p_prime(r, profile) / denom)
}

/// Q(r) = ln(K^2(r) / k^2) = ln(1 + p(r)/k^2); the radial antiderivative of
/// q_r, vanishing at r = a. Well defined for Im p >= 0.
pub fn q_antiderivative(r: f64, profile: &RadialProfile, k: f64) -> c64 {
    (c64::new(1.0, 0.0) + p_of(r, profile) / (k * k)).ln()
}

/// Scan k^2 + p(r) on a radial grid; reject profiles whose denominator
/// crosses zero (the model requires K^2 != 0 everywhere).
pub fn check_denominator(profile: &RadialProfile, k: f64) -> Result<()> {
    let scale = (k * k).max(p_of(0.0, profile).norm());
    let mut prev_re = f64::NAN;
    for i in 0..=DENOM_SCAN {
        let r = profile.radius * i as f64 / DENOM_SCAN as f64;
        let denom = c64::new(k * k, 0.0) + p_of(r, profile);
        if denom.norm() < 1e-12 * scale {
            return Err(Error::SingularProfile(r));
        }
        // A real-axis sign change with negligible imaginary part means the
        // denominator crosses zero between samples.
        if denom.im.abs() < 1e-12 * scale && prev_re * denom.re < 0.0 {
            return Err(Error::SingularProfile(r));
        }
        prev_re = denom.re;
    }
    Ok(())
}

/// The potential and q fields induced by a set of (disjoint) particles.
pub struct PotentialField {
    pub particles: Vec<Particle>,
    pub k: f64,
}

impl PotentialField {
    pub fn new(particles: Vec<Particle>, k: f64) -> Result<Self> {
        for p in &particles {
            check_denominator(&RadialProfile::of_particle(p), k)?;
        }
        Ok(PotentialField { particles, k })
    }

    fn containing(&self, y: Vec3) -> Option<(&Particle, f64)> {
        self.particles.iter().find_map(|p| {
            let r = (y - p.center).norm();
            (r <= p.radius).then_some((p, r))
        })
    }

    /// p(y); zero outside all particles.
    pub fn p_at(&self, y: Vec3) -> c64 {
        match self.containing(y) {
            Some((p, r)) => p_of(r, &RadialProfile::of_particle(p)),
            None => c64::new(0.0, 0.0),
        }
    }

    /// K^2(y) = k^2 + p(y).
    pub fn k2_at(&self, y: Vec3) -> c64 {
        c64::new(self.k * self.k, 0.0) + self.p_at(y)
    }

    /// q(y) = grad K^2 / K^2 = p'(r) r0 / (k^2 + p). Zero outside all
    /// particles and, by convention, at each particle center where the
    /// radial direction is undefined (the spherical average vanishes).
    pub fn q_at(&self, y: Vec3) -> Result<ComplexVec3> {
        match self.containing(y) {
            None => Ok(ComplexVec3::ZERO),
            Some((p, r)) if r == 0.0 => {
                let _ = p;
                Ok(ComplexVec3::ZERO)
            }
            Some((p, r)) => {
                let qr = q_radial(r, &RadialProfile::of_particle(p), self.k)?;
                let r0 = (y - p.center) * (1.0 / r);
                Ok(ComplexVec3::new(qr * r0.x, qr * r0.y, qr * r0.z))
            }
        }
    }
}

/// j_m = c_1m a^(3-kappa) with c_1m = gamma * int_0^1 (1-t)^2 h t^2 dt.
/// For h = 1, c_1m = gamma / 30.
pub fn j_m_analytic(profile: &RadialProfile) -> c64 {
    let shape = integrate_1d(
        |t| c64::new((1.0 - t) * (1.0 - t) * profile.h.eval(t) * t * t, 0.0),
        0.0,
        1.0,
        32,
    );
    profile.gamma * shape.re * profile.radius.powf(3.0 - profile.kappa)
}

/// j_m = int_{B_m} p(y) dy by full ball quadrature.
pub fn j_m_quadrature(profile: &RadialProfile, rule: &BallRule) -> Result<c64> {
    integrate_ball(|y| p_of(y.norm(), profile), Vec3::ZERO, profile.radius, rule)
}

/// I(a) in its dimensionless form:
/// int_0^1 t^3 w'(t) / (nu + w(t)) dt, nu = 4 pi k^2 a^kappa.
pub fn i_a(profile: &RadialProfile, k: f64) -> Result<c64> {
    check_denominator(profile, k)?;
    let nu = profile.nu(k);
    Ok(integrate_1d(
        |t| t.powi(3) * profile.w_prime(t) / (c64::new(nu, 0.0) + profile.w(t)),
        0.0,
        1.0,
        256,
    ))
}

/// I(a) by the integrated-by-parts identity:
/// ln(nu) - 3 int_0^1 t^2 ln(nu + w(t)) dt.
pub fn i_a_by_parts(profile: &RadialProfile, k: f64) -> Result<c64> {
    check_denominator(profile, k)?;
    let nu = profile.nu(k);
    let tail = integrate_1d(
        |t| t * t * (c64::new(nu, 0.0) + profile.w(t)).ln(),
        0.0,
        1.0,
        256,
    );
    Ok(c64::new(nu.ln(), 0.0) - 3.0 * tail)
}

/// Asymptotic value of Z_m per unit divergence of E:
/// (4 pi / 3) int_0^a r^3 p'(r) / (k^2 + p(r)) dr = (4 pi / 3) a^3 I(a).
pub fn z_m_asymptotic(profile: &RadialProfile, k: f64) -> Result<c64> {
    let i = i_a(profile, k)?;
    Ok(i * (4.0 * PI / 3.0 * profile.radius.powi(3)))
}

/// Z_m = int_{B_m} grad p . E / (k^2 + p) dy by ball quadrature, for an
/// arbitrary field E given in coordinates relative to the particle center.
pub fn z_m_quadrature(
    particle: &Particle,
    field: impl Fn(Vec3) -> ComplexVec3,
    k: f64,
    rule: &BallRule,
) -> Result<c64> {
    let profile = RadialProfile::of_particle(particle);
    check_denominator(&profile, k)?;
    let c = particle.center;
    integrate_ball(
        |y| {
            let r = (y - c).norm();
            if r == 0.0 {
                return c64::new(0.0, 0.0);
            }
            let r0 = (y - c) * (1.0 / r);
            let denom = c64::new(k * k, 0.0) + p_of(r, &profile);
            p_prime(r, &profile) * field(y).dot_real(r0) / denom
        },
        c,
        particle.radius,
        rule,
    )
}

/// Y_i: radial-angular factorization of the diagonal integrals in the
/// gradient expansion of E. Identical for i = 1, 2, 3.
pub fn y_i(profile: &RadialProfile, k: f64, axis: usize, rule: &BallRule) -> Result<c64> {
    check_denominator(profile, k)?;
    let radial = integrate_1d(
        |r| {
            let denom = c64::new(k * k, 0.0) + p_of(r, profile);
            r.powi(3) * p_prime(r, profile) / denom
        },
        0.0,
        profile.radius,
        256,
    );
    Ok(radial * angular_factor(axis, rule))
}

/// The angular factor int dOmega r_i^2, equal to 4 pi / 3 for each axis.
pub fn angular_factor(axis: usize, rule: &BallRule) -> f64 {
    rule.angular()
        .iter()
        .map(|&(d, w)| d.comp(axis) * d.comp(axis) * w)
        .sum()
}

/// Helmholtz mean-value weight of p over the ball:
/// S_p = int_0^a 4 pi r^2 p(r) sinc(kr) dr, so that
/// int_B p(r) u dy = S_p u(center) for any u solving the Helmholtz
/// equation on the ball. Reduces to j_m when k = 0.
pub fn s_p(profile: &RadialProfile, k: f64) -> c64 {
    integrate_1d(
        |r| 4.0 * PI * r * r * p_of(r, profile) * sinc(k * r),
        0.0,
        profile.radius,
        64,
    )
}

/// Mean-value weight of the q-antiderivative Q(r) = ln(1 + p/k^2):
/// S_Q = int_0^a 4 pi r^2 Q(r) sinc(kr) dr.
pub fn s_q(profile: &RadialProfile, k: f64) -> Result<c64> {
    check_denominator(profile, k)?;
    Ok(integrate_1d(
        |r| 4.0 * PI * r * r * q_antiderivative(r, profile, k) * sinc(k * r),
        0.0,
        profile.radius,
        128,
    ))
}

/// Self-coefficient a_m = int_B p(r) g(x, center) dx = int_0^a p(r) r e^{ikr} dr.
pub fn radial_a_self(profile: &RadialProfile, k: f64) -> c64 {
    integrate_1d(
        |r| p_of(r, profile) * r * c64::new(0.0, k * r).exp(),
        0.0,
        profile.radius,
        64,
    )
}

/// Self-coefficient b_m = int_B q . grad_x g(x, center) dx
/// = int_0^a q_r(r) e^{ikr} (ikr - 1) dr.
pub fn radial_b_self(profile: &RadialProfile, k: f64) -> Result<c64> {
    check_denominator(profile, k)?;
    Ok(integrate_1d(
        |r| {
            let qr = p_prime(r, profile) / (c64::new(k * k, 0.0) + p_of(r, profile));
            qr * c64::new(0.0, k * r).exp() * c64::new(-1.0, k * r)
        },
        0.0,
        profile.radius,
        128,
    ))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
