//! Shared geometric and numeric types. No physics beyond the plane wave.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex64;

/// Absolute tolerance for unit-vector and transversality checks.
pub const GEOM_TOL: f64 = 1e-12;

/// Real 3-vector (positions, directions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn comp(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// Complex 3-vector (fields E, H, moments V_m, coefficient vectors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexVec3 {
    pub x: c64,
    pub y: c64,
    pub z: c64,
}

impl ComplexVec3 {
    pub const ZERO: ComplexVec3 = ComplexVec3 {
        x: c64::new(0.0, 0.0),
        y: c64::new(0.0, 0.0),
        z: c64::new(0.0, 0.0),
    };

    pub fn new(x: c64, y: c64, z: c64) -> Self {
        ComplexVec3 { x, y, z }
    }

    pub fn from_real(v: Vec3) -> Self {
        ComplexVec3::new(c64::new(v.x, 0.0), c64::new(v.y, 0.0), c64::new(v.z, 0.0))
    }

    /// Bilinear (unconjugated) dot product, as in the moment formulas.
    pub fn dot(self, o: ComplexVec3) -> c64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn dot_real(self, o: Vec3) -> c64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Euclidean length, sqrt(sum |c_i|^2).
    pub fn norm(self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn scale(self, s: c64) -> ComplexVec3 {
        ComplexVec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn comp(self, i: usize) -> c64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index {i} out of range"),
        }
    }
}

impl Add for ComplexVec3 {
    type Output = ComplexVec3;
    fn add(self, o: ComplexVec3) -> ComplexVec3 {
        ComplexVec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for ComplexVec3 {
    type Output = ComplexVec3;
    fn sub(self, o: ComplexVec3) -> ComplexVec3 {
        ComplexVec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Incident plane wave E_0(x) = E exp(ik alpha.x) with E.alpha = 0.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub amplitude: ComplexVec3,
    pub direction: Vec3,
    pub k: f64,
}

impl PlaneWave {
    pub fn eval(&self, x: Vec3) -> ComplexVec3 {
        let phase = c64::new(0.0, self.k * self.direction.dot(x)).exp();
        self.amplitude.scale(phase)
    }
}

/// Validated plane-wave constructor.
pub fn make_plane_wave(amplitude: ComplexVec3, direction: Vec3, k: f64) -> Result<PlaneWave> {
    if k <= 0.0 || !k.is_finite() {
        return Err(Error::NonPositiveWavenumber(k));
    }
    let n = direction.norm();
    if (n - 1.0).abs() > GEOM_TOL {
        return Err(Error::NonUnitDirection(n));
    }
    let t = amplitude.dot_real(direction).norm();
    if t > GEOM_TOL {
        return Err(Error::Transversality(t));
    }
    if !amplitude.is_finite() {
        return Err(Error::Precondition("non-finite amplitude".into()));
    }
    Ok(PlaneWave { amplitude, direction, k })
}

/// Radial profile factor h(t), t = r/a in [0, 1].
///
/// The closed-form moment constants are worked out for the constant
/// profile; other smooth profiles go through the quadrature paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialProfileKind {
    /// h(t) = 1.
    Constant,
}

impl RadialProfileKind {
    pub fn eval(self, _t: f64) -> f64 {
        match self {
            RadialProfileKind::Constant => 1.0,
        }
    }

    /// dh/dt.
    pub fn deriv(self, _t: f64) -> f64 {
        match self {
            RadialProfileKind::Constant => 0.0,
        }
    }
}

/// A small ball scatterer.
#[derive(Debug, Clone, Copy)]
pub struct Particle {
    pub center: Vec3,
    pub radius: f64,
    pub gamma: c64,
    pub kappa: f64,
    pub profile: RadialProfileKind,
}

impl Particle {
    pub fn new(center: Vec3, radius: f64, gamma: c64, kappa: f64) -> Result<Self> {
        Self::with_profile(center, radius, gamma, kappa, RadialProfileKind::Constant)
    }

    pub fn with_profile(
        center: Vec3,
        radius: f64,
        gamma: c64,
        kappa: f64,
        profile: RadialProfileKind,
    ) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::NonPositiveRadius(radius));
        }
        if gamma.im < 0.0 {
            return Err(Error::NegativeImGamma(gamma.im));
        }
        if !(kappa > 0.0 && kappa < 3.0) {
            return Err(Error::KappaOutOfRange(kappa));
        }
        if !center.is_finite() {
            return Err(Error::Precondition("non-finite particle center".into()));
        }
        Ok(Particle { center, radius, gamma, kappa, profile })
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy)]
pub struct Box3 {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Box3 {
    pub fn new(lo: Vec3, hi: Vec3) -> Result<Self> {
        if !(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z) {
            return Err(Error::Precondition(format!("degenerate box {lo:?}..{hi:?}")));
        }
        Ok(Box3 { lo, hi })
    }

    pub fn unit() -> Self {
        Box3 { lo: Vec3::ZERO, hi: Vec3::new(1.0, 1.0, 1.0) }
    }

    pub fn volume(&self) -> f64 {
        (self.hi.x - self.lo.x) * (self.hi.y - self.lo.y) * (self.hi.z - self.lo.z)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.lo.x
            && p.x <= self.hi.x
            && p.y >= self.lo.y
            && p.y <= self.hi.y
            && p.z >= self.lo.z
            && p.z <= self.hi.z
    }

    pub fn center(&self) -> Vec3 {
        (self.lo + self.hi) * 0.5
    }
}

/// Domain, background wavenumber and particle density for the
/// effective-medium limit.
#[derive(Clone)]
pub struct MediumSpec {
    pub domain: Box3,
    pub k: f64,
    pub kappa: f64,
    pub density: std::sync::Arc<dyn Fn(Vec3) -> f64 + Send + Sync>,
}

impl MediumSpec {
    pub fn new(
        domain: Box3,
        k: f64,
        kappa: f64,
        density: std::sync::Arc<dyn Fn(Vec3) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if k <= 0.0 {
            return Err(Error::NonPositiveWavenumber(k));
        }
        if !(kappa > 0.0 && kappa < 3.0) {
            return Err(Error::KappaOutOfRange(kappa));
        }
        Ok(MediumSpec { domain, k, kappa, density })
    }

    /// phi(a) = a^(3 - kappa), the count normalizer of the distribution law.
    pub fn phi(&self, a: f64) -> f64 {
        a.powf(3.0 - self.kappa)
    }
}

impl std::fmt::Debug for MediumSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MediumSpec")
            .field("domain", &self.domain)
            .field("k", &self.k)
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}
