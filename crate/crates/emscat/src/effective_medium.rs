//! The a -> 0 limit: particle-cloud generation under the counting law,
//! sum-to-integral verification, the effective-field integral equation,
//! refraction-coefficient synthesis, the divergence diagnostic, and the
//! negative-refraction criterion.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::green;
use crate::multi_scatter::{assemble_las_radial, eval_field_multi, solve_las_preconditioned};
use crate::quadrature::{cube_self_green, gauss_legendre, integrate_box, BoxRule};
use crate::types::{c64, Box3, ComplexVec3, Particle, PlaneWave, RadialProfileKind, Vec3};

/// Counting law for the particle cloud: a subdomain Delta receives
/// round(phi(a)^-1 int_Delta N dx) particles, phi(a) = a^(3-kappa).
#[derive(Clone)]
pub struct DistributionLaw {
    pub domain: Box3,
    pub kappa: f64,
    density: Arc<dyn Fn(Vec3) -> f64 + Send + Sync>,
}

impl DistributionLaw {
    pub fn new(
        domain: Box3,
        kappa: f64,
        density: Arc<dyn Fn(Vec3) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::KappaOutOfRange(kappa));
        }
        Ok(DistributionLaw { domain, kappa, density })
    }

    pub fn density(&self, x: Vec3) -> Result<f64> {
        let n = (self.density)(x);
        if n < 0.0 {
            return Err(Error::NegativeDensity { value: n, at: x });
        }
        Ok(n)
    }

    pub fn phi(&self, a: f64) -> f64 {
        a.powf(3.0 - self.kappa)
    }
}

impl std::fmt::Debug for DistributionLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistributionLaw")
            .field("domain", &self.domain)
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

/// 2x2x2 midpoint estimate of int_Delta N over one subcube.
fn subcube_mass(law: &DistributionLaw, lo: Vec3, hi: Vec3) -> Result<f64> {
    let h = (hi - lo) * 0.5;
    let mut s = 0.0;
    for ix in 0..2 {
        for iy in 0..2 {
            for iz in 0..2 {
                let x = Vec3::new(
                    lo.x + h.x * (ix as f64 + 0.5),
                    lo.y + h.y * (iy as f64 + 0.5),
                    lo.z + h.z * (iz as f64 + 0.5),
                );
                s += law.density(x)?;
            }
        }
    }
    Ok(s / 8.0 * (hi - lo).x * (hi - lo).y * (hi - lo).z)
}

/// Total count the law prescribes at radius a: the sum of per-subcube
/// rounds of phi(a)^-1 int_Delta N dx over the same tiling that
/// [`generate_particles`] uses.
pub fn expected_count(law: &DistributionLaw, a: f64) -> Result<usize> {
    let mut total = 0usize;
    for_each_subcube(law, a, |lo, hi| {
        let mass = subcube_mass(law, lo, hi)?;
        total += (mass / law.phi(a)).round() as usize;
        Ok(())
    })?;
    Ok(total)
}

fn for_each_subcube(
    law: &DistributionLaw,
    a: f64,
    mut visit: impl FnMut(Vec3, Vec3) -> Result<()>,
) -> Result<()> {
    let dom = &law.domain;
    let ext = dom.hi - dom.lo;
    // mean density over a coarse sample to size the subcubes
    let mut nbar = 0.0;
    let samples = 4;
    for ix in 0..samples {
        for iy in 0..samples {
            for iz in 0..samples {
                let x = Vec3::new(
                    dom.lo.x + ext.x * (ix as f64 + 0.5) / samples as f64,
                    dom.lo.y + ext.y * (iy as f64 + 0.5) / samples as f64,
                    dom.lo.z + ext.z * (iz as f64 + 0.5) / samples as f64,
                );
                nbar += law.density(x)?;
            }
        }
    }
    nbar /= (samples * samples * samples) as f64;
    if nbar == 0.0 {
        return Ok(());
    }
    let edge_want = (10.0 * law.phi(a) / nbar).cbrt();
    let nd = |e: f64| ((e / edge_want).round() as usize).max(1);
    let (nx, ny, nz) = (nd(ext.x), nd(ext.y), nd(ext.z));
    let cell = Vec3::new(ext.x / nx as f64, ext.y / ny as f64, ext.z / nz as f64);
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let lo = Vec3::new(
                    dom.lo.x + cell.x * ix as f64,
                    dom.lo.y + cell.y * iy as f64,
                    dom.lo.z + cell.z * iz as f64,
                );
                visit(lo, lo + cell)?;
            }
        }
    }
    Ok(())
}

/// Stratified jittered placement: the domain is tiled into subcubes sized
/// for roughly ten particles each, every subcube gets its count from the
/// law, and centers sit on a jittered mini-lattice inside it (rejection
/// sampling cannot reach the volume fractions the law demands at the
/// larger radii, a lattice always can). Deterministic for a fixed seed.
pub fn generate_particles(
    law: &DistributionLaw,
    a: f64,
    gamma: &(dyn Fn(Vec3) -> c64 + Sync),
    seed: u64,
) -> Result<Vec<Particle>> {
    if a <= 0.0 {
        return Err(Error::NonPositiveRadius(a));
    }
    let phi = law.phi(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for_each_subcube(law, a, |lo, hi| {
        let cell = hi - lo;
        let mass = subcube_mass(law, lo, hi)?;
        let required = (mass / phi).round() as usize;
        if required == 0 {
            return Ok(());
        }
        // mini-lattice of m^3 cells; one particle per chosen cell.
        // Jitter amplitude 0.45 (mini - 2a) keeps any two centers
        // strictly more than 2a apart, including across subcube
        // boundaries, and every center at least a from the domain
        // boundary (mini/2 > a).
        let m = (required as f64).cbrt().ceil() as usize;
        let mini = cell * (1.0 / m as f64);
        if mini.x <= 2.0 * a || mini.y <= 2.0 * a || mini.z <= 2.0 * a {
            return Err(Error::PackingInfeasible {
                at: (lo + hi) * 0.5,
                required,
                placed: 0,
            });
        }
        let total = m * m * m;
        // partial Fisher-Yates: first `required` entries of a shuffled
        // cell index list
        let mut cells: Vec<usize> = (0..total).collect();
        for i in 0..required.min(total) {
            let j = rng.gen_range(i..total);
            cells.swap(i, j);
        }
        let amp = Vec3::new(
            0.45 * (mini.x - 2.0 * a),
            0.45 * (mini.y - 2.0 * a),
            0.45 * (mini.z - 2.0 * a),
        );
        for &ci in &cells[..required] {
            let (cx, cy, cz) = (ci / (m * m), (ci / m) % m, ci % m);
            let c = Vec3::new(
                lo.x + mini.x * (cx as f64 + 0.5) + rng.gen_range(-1.0..1.0) * amp.x,
                lo.y + mini.y * (cy as f64 + 0.5) + rng.gen_range(-1.0..1.0) * amp.y,
                lo.z + mini.z * (cz as f64 + 0.5) + rng.gen_range(-1.0..1.0) * amp.z,
            );
            out.push(Particle::new(c, a, gamma(c), law.kappa)?);
        }
        Ok(())
    })?;
    Ok(out)
}

/// One row of the sum-to-integral check.
#[derive(Debug, Clone, Copy)]
pub struct Lemma3Row {
    pub a: f64,
    pub weighted_sum: f64,
    pub integral: f64,
    pub error: f64,
}

/// phi(a) sum_m f(x_m) vs int_D f N dx along a decreasing a-sequence.
pub fn lemma3_limit_check(
    f: &(dyn Fn(Vec3) -> f64 + Sync),
    law: &DistributionLaw,
    a_sequence: &[f64],
    seed: u64,
) -> Result<Vec<Lemma3Row>> {
    let rule = BoxRule::new(12);
    let integral = integrate_box(
        |x| c64::new(f(x) * (law.density)(x), 0.0),
        &law.domain,
        &rule,
    )?
    .re;
    let gamma = |_x: Vec3| c64::new(1.0, 0.0);
    let mut rows = Vec::with_capacity(a_sequence.len());
    for &a in a_sequence {
        let particles = generate_particles(law, a, &gamma, seed)?;
        let sum: f64 = particles.iter().map(|p| f(p.center)).sum::<f64>() * law.phi(a);
        rows.push(Lemma3Row {
            a,
            weighted_sum: sum,
            integral,
            error: (sum - integral).abs(),
        });
    }
    Ok(rows)
}

/// int_0^1 (1-t)^2 h(t) t^2 dt; equals 1/30 for the flat profile.
pub fn moment_constant(h: RadialProfileKind) -> f64 {
    let (nodes, weights) = gauss_legendre(64);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            let t = 0.5 * (x + 1.0);
            0.5 * w * (1.0 - t).powi(2) * h.eval(t) * t * t
        })
        .sum()
}

/// C(x) = gamma(x) N(x) int_0^1 (1-t)^2 h t^2 dt (= gamma N / 30 for flat h).
pub fn coefficient_field(
    law: &DistributionLaw,
    gamma: Arc<dyn Fn(Vec3) -> c64 + Send + Sync>,
    h: RadialProfileKind,
) -> Arc<dyn Fn(Vec3) -> c64 + Send + Sync> {
    let c1 = moment_constant(h);
    let density = law.density.clone();
    Arc::new(move |x| gamma(x) * density(x) * c1)
}

/// n^2(x) = 1 + k^-2 C(x); effective wavenumber squared k^2 + C(x).
pub struct RefractionModel {
    k: f64,
    c: Arc<dyn Fn(Vec3) -> c64 + Send + Sync>,
}

impl RefractionModel {
    pub fn n2(&self, x: Vec3) -> c64 {
        c64::new(1.0, 0.0) + self.c(x) / (self.k * self.k)
    }

    pub fn k2_eff(&self, x: Vec3) -> c64 {
        c64::new(self.k * self.k, 0.0) + self.c(x)
    }

    fn c(&self, x: Vec3) -> c64 {
        (self.c)(x)
    }
}

pub fn refraction_coefficient(
    c: Arc<dyn Fn(Vec3) -> c64 + Send + Sync>,
    k: f64,
) -> Result<RefractionModel> {
    if k <= 0.0 {
        return Err(Error::NonPositiveWavenumber(k));
    }
    Ok(RefractionModel { k, c })
}

/// Inverse of the n^2 map: C(x) = k^2 (n^2(x) - 1).
pub fn coefficient_from_n2(n2: c64, k: f64) -> c64 {
    (n2 - 1.0) * (k * k)
}

/// Collocation solution of E_e = E_0 + int_D g C E_e on a uniform grid.
/// The kernel is scalar so the three components share one system.
pub struct EffectiveField {
    pub domain: Box3,
    pub mesh: usize,
    pub nodes: Vec<Vec3>,
    pub e: Vec<ComplexVec3>,
    pub c_vals: Vec<c64>,
    pub cell: Vec3,
    pub residual: f64,
    pub k: f64,
    incident: PlaneWave,
    self_weight: c64,
}

pub enum EffectiveSolver {
    /// dense LU; cost grows as mesh^9
    Direct,
    /// matrix-free Neumann iteration; needs the integral operator norm
    /// below one (true for moderate |C| at desk scale)
    Iterative { tol: f64, max_iter: usize },
}

pub fn solve_effective_field(
    c_field: &(dyn Fn(Vec3) -> c64 + Sync),
    incident: &PlaneWave,
    domain: &Box3,
    k: f64,
    mesh: usize,
    solver: EffectiveSolver,
) -> Result<EffectiveField> {
    if mesh < 2 {
        return Err(Error::MeshDegeneracy(format!("mesh {mesh} < 2")));
    }
    let ext = domain.hi - domain.lo;
    let cell = ext * (1.0 / mesh as f64);
    let vol = cell.x * cell.y * cell.z;
    let n = mesh * mesh * mesh;
    let mut nodes = Vec::with_capacity(n);
    for ix in 0..mesh {
        for iy in 0..mesh {
            for iz in 0..mesh {
                nodes.push(Vec3::new(
                    domain.lo.x + cell.x * (ix as f64 + 0.5),
                    domain.lo.y + cell.y * (iy as f64 + 0.5),
                    domain.lo.z + cell.z * (iz as f64 + 0.5),
                ));
            }
        }
    }
    let c_vals: Vec<c64> = nodes.iter().map(|&x| c_field(x)).collect();
    // self-cell weight for an equivalent cube of the same volume
    let self_weight = cube_self_green(0.5 * vol.cbrt(), k, 16);

    let e0: Vec<ComplexVec3> = nodes.iter().map(|&x| incident.eval(x)).collect();
    let e = match solver {
        EffectiveSolver::Direct => {
            let mut mat = DMatrix::<c64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let w = if i == j {
                        self_weight
                    } else {
                        green(nodes[i], nodes[j], k)? * vol
                    };
                    mat[(i, j)] = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
                        - w * c_vals[j];
                }
            }
            let lu = mat.lu();
            let mut comps = Vec::with_capacity(3);
            for axis in 0..3 {
                let rhs = DVector::from_iterator(n, e0.iter().map(|v| v.comp(axis)));
                comps.push(lu.solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?);
            }
            (0..n)
                .map(|i| ComplexVec3::new(comps[0][i], comps[1][i], comps[2][i]))
                .collect::<Vec<_>>()
        }
        EffectiveSolver::Iterative { tol, max_iter } => {
            let apply = |e: &[ComplexVec3]| -> Vec<ComplexVec3> {
                (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let mut acc = ComplexVec3::ZERO;
                        for j in 0..n {
                            let w = if i == j {
                                self_weight
                            } else {
                                green(nodes[i], nodes[j], k).expect("distinct nodes") * vol
                            };
                            acc = acc + e[j].scale(w * c_vals[j]);
                        }
                        acc
                    })
                    .collect()
            };
            let mut e = e0.clone();
            let mut converged = false;
            let mut last = f64::INFINITY;
            for _ in 0..max_iter {
                let ke = apply(&e);
                let next: Vec<ComplexVec3> = (0..n).map(|i| e0[i] + ke[i]).collect();
                let mut diff = 0.0;
                let mut scale = 0.0;
                for i in 0..n {
                    diff += (next[i] - e[i]).norm().powi(2);
                    scale += next[i].norm().powi(2);
                }
                last = (diff / scale.max(f64::MIN_POSITIVE)).sqrt();
                e = next;
                if last < tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence { iters: max_iter, residual: last });
            }
            e
        }
    };

    // relative residual of the discrete equation
    let residual = {
        let num: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = ComplexVec3::ZERO;
                for j in 0..n {
                    let w = if i == j {
                        self_weight
                    } else {
                        green(nodes[i], nodes[j], k).expect("distinct nodes") * vol
                    };
                    acc = acc + e[j].scale(w * c_vals[j]);
                }
                (e[i] - e0[i] - acc).norm().powi(2)
            })
            .sum();
        let den: f64 = e0.iter().map(|v| v.norm().powi(2)).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    };

    Ok(EffectiveField {
        domain: *domain,
        mesh,
        nodes,
        e,
        c_vals,
        cell,
        residual,
        k,
        incident: *incident,
        self_weight,
    })
}

impl EffectiveField {
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.mesh + iy) * self.mesh + iz
    }

    /// E_e anywhere via the solved representation
    /// E_0(x) + sum_j g(x, y_j) C_j E_j vol.
    pub fn eval_field(&self, x: Vec3) -> Result<ComplexVec3> {
        let vol = self.cell.x * self.cell.y * self.cell.z;
        let mut acc = self.incident.eval(x);
        for (j, &y) in self.nodes.iter().enumerate() {
            let d = x - y;
            let inside = d.x.abs() < 0.5 * self.cell.x
                && d.y.abs() < 0.5 * self.cell.y
                && d.z.abs() < 0.5 * self.cell.z;
            let w = if inside {
                self.self_weight
            } else {
                green(x, y, self.k)? * vol
            };
            acc = acc + self.e[j].scale(w * self.c_vals[j]);
        }
        Ok(acc)
    }

    /// RMS residual of the second-order interior stencil for
    /// [laplacian + k^2 + C] E_e = 0, normalized by k^2 |E|.
    pub fn pde_residual(&self) -> f64 {
        let m = self.mesh;
        let mut num = 0.0;
        let mut den = 0.0;
        for ix in 1..m - 1 {
            for iy in 1..m - 1 {
                for iz in 1..m - 1 {
                    let i = self.idx(ix, iy, iz);
                    let mut lap = ComplexVec3::ZERO;
                    for (axis, h) in [(0usize, self.cell.x), (1, self.cell.y), (2, self.cell.z)] {
                        let (ip, im) = match axis {
                            0 => (self.idx(ix + 1, iy, iz), self.idx(ix - 1, iy, iz)),
                            1 => (self.idx(ix, iy + 1, iz), self.idx(ix, iy - 1, iz)),
                            _ => (self.idx(ix, iy, iz + 1), self.idx(ix, iy, iz - 1)),
                        };
                        let second = self.e[ip] + self.e[im]
                            - self.e[i].scale(c64::new(2.0, 0.0));
                        lap = lap + second.scale(c64::new(1.0 / (h * h), 0.0));
                    }
                    let k2 = c64::new(self.k * self.k, 0.0) + self.c_vals[i];
                    let r = lap + self.e[i].scale(k2);
                    num += r.norm().powi(2);
                    den += (self.k * self.k * self.e[i].norm()).powi(2);
                }
            }
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

/// Central-difference divergence of E_e plus the residual of the
/// transport identity laplacian(eta) + K^2 eta + grad K^2 . E_e = 0.
#[derive(Debug, Clone)]
pub struct DivergenceDiagnostic {
    pub eta_rms: f64,
    pub eta_max: f64,
    pub identity_residual_rms: f64,
    pub samples: usize,
}

pub fn divergence_diagnostic(
    field: &EffectiveField,
    c_field: &dyn Fn(Vec3) -> c64,
    k: f64,
) -> DivergenceDiagnostic {
    let m = field.mesh;
    let cell = field.cell;
    let div_at = |ix: usize, iy: usize, iz: usize| -> c64 {
        (field.e[field.idx(ix + 1, iy, iz)].x - field.e[field.idx(ix - 1, iy, iz)].x)
            / (2.0 * cell.x)
            + (field.e[field.idx(ix, iy + 1, iz)].y - field.e[field.idx(ix, iy - 1, iz)].y)
                / (2.0 * cell.y)
            + (field.e[field.idx(ix, iy, iz + 1)].z - field.e[field.idx(ix, iy, iz - 1)].z)
                / (2.0 * cell.z)
    };
    let mut eta_sq = 0.0;
    let mut eta_max: f64 = 0.0;
    let mut count = 0usize;
    for ix in 1..m - 1 {
        for iy in 1..m - 1 {
            for iz in 1..m - 1 {
                let v = div_at(ix, iy, iz).norm();
                eta_sq += v * v;
                eta_max = eta_max.max(v);
                count += 1;
            }
        }
    }
    let eta_rms = if count > 0 { (eta_sq / count as f64).sqrt() } else { 0.0 };

    // identity residual on the doubly interior nodes
    let mut res_sq = 0.0;
    let mut res_n = 0usize;
    for ix in 2..m.saturating_sub(2) {
        for iy in 2..m.saturating_sub(2) {
            for iz in 2..m.saturating_sub(2) {
                let eta0 = div_at(ix, iy, iz);
                let mut lap = c64::new(0.0, 0.0);
                for (axis, h) in [(0usize, cell.x), (1, cell.y), (2, cell.z)] {
                    let (p, q) = match axis {
                        0 => (div_at(ix + 1, iy, iz), div_at(ix - 1, iy, iz)),
                        1 => (div_at(ix, iy + 1, iz), div_at(ix, iy - 1, iz)),
                        _ => (div_at(ix, iy, iz + 1), div_at(ix, iy, iz - 1)),
                    };
                    lap += (p + q - 2.0 * eta0) / (h * h);
                }
                let i = field.idx(ix, iy, iz);
                let x = field.nodes[i];
                let k2 = c64::new(k * k, 0.0) + field.c_vals[i];
                // grad K^2 = grad C by central differences of the closure
                let gc = ComplexVec3::new(
                    (c_field(x + Vec3::new(cell.x, 0.0, 0.0))
                        - c_field(x - Vec3::new(cell.x, 0.0, 0.0)))
                        / (2.0 * cell.x),
                    (c_field(x + Vec3::new(0.0, cell.y, 0.0))
                        - c_field(x - Vec3::new(0.0, cell.y, 0.0)))
                        / (2.0 * cell.y),
                    (c_field(x + Vec3::new(0.0, 0.0, cell.z))
                        - c_field(x - Vec3::new(0.0, 0.0, cell.z)))
                        / (2.0 * cell.z),
                );
                let r = lap + k2 * eta0 + gc.dot(field.e[i]);
                res_sq += r.norm_sqr();
                res_n += 1;
            }
        }
    }
    let identity_residual_rms = if res_n > 0 { (res_sq / res_n as f64).sqrt() } else { 0.0 };

    DivergenceDiagnostic { eta_rms, eta_max, identity_residual_rms, samples: count }
}

/// One row of the many-body vs effective-field comparison.
#[derive(Debug, Clone, Copy)]
pub struct StudyRow {
    pub a: f64,
    pub count: usize,
    pub total_volume: f64,
    pub max_probe_error: f64,
}

/// For each a: generate the cloud, solve the coupled moment system, and
/// compare the many-body field against the effective field at the probes.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    law: &DistributionLaw,
    gamma: Arc<dyn Fn(Vec3) -> c64 + Send + Sync>,
    incident: &PlaneWave,
    k: f64,
    a_sequence: &[f64],
    probes: &[Vec3],
    seed: u64,
    reference: &EffectiveField,
) -> Result<Vec<StudyRow>> {
    let ref_vals: Vec<ComplexVec3> = probes
        .iter()
        .map(|&x| reference.eval_field(x))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(a_sequence.len());
    for &a in a_sequence {
        let particles = generate_particles(law, a, &|x| gamma(x), seed)?;
        let (max_err, count, volume) = if particles.is_empty() {
            let mut worst: f64 = 0.0;
            for (i, &x) in probes.iter().enumerate() {
                let e = incident.eval(x);
                worst = worst.max((e - ref_vals[i]).norm() / ref_vals[i].norm());
            }
            (worst, 0, 0.0)
        } else {
            let sys = assemble_las_radial(&particles, incident, k)?;
            let sol = solve_las_preconditioned(&sys, 1e-10, 2000)?;
            let mut worst: f64 = 0.0;
            for (i, &x) in probes.iter().enumerate() {
                let e = eval_field_multi(x, &sol, &particles, incident, k)?;
                worst = worst.max((e - ref_vals[i]).norm() / ref_vals[i].norm());
            }
            let volume = particles.len() as f64 * (4.0 * PI / 3.0) * a.powi(3);
            (worst, particles.len(), volume)
        };
        rows.push(StudyRow { a, count, total_volume: volume, max_probe_error: max_err });
    }
    Ok(rows)
}

/// Group-velocity sign test: returns (n + omega dn/domega < 0, the value).
/// Central difference with relative step 1e-6 in omega.
pub fn negative_refraction_check(
    n: &dyn Fn(f64) -> c64,
    omega: f64,
) -> Result<(bool, f64)> {
    let n0 = n(omega);
    if n0.im.abs() > 1e-12 {
        return Err(Error::ComplexRefractionIndex(n0.im));
    }
    let h = 1e-6 * omega.abs().max(1e-6);
    let dn = (n(omega + h).re - n(omega - h).re) / (2.0 * h);
    let value = n0.re + omega * dn;
    Ok((value < 0.0, value))
}
