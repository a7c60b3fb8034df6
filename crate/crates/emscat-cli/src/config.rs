//! Config file schema and validation. All physical preconditions are
//! re-validated at load time through the library constructors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use emscat::effective_medium::DistributionLaw;
use emscat::types::make_plane_wave;
use emscat::{c64, Box3, ComplexVec3, Particle, PlaneWave, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Single,
    Multi,
    Effective,
    Converge,
    Nrcheck,
    Lemma3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSpec {
    pub amplitude: [f64; 3],
    pub direction: [f64; 3],
    pub k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    pub center: [f64; 3],
    pub radius: f64,
    /// [re, im]
    pub gamma: [f64; 2],
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFieldSpec {
    Constant { value: f64 },
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: [f64; 3],
        width: f64,
    },
    /// c0 + c1 x + c2 y + c3 z
    Polynomial { coeffs: [f64; 4] },
}

impl ScalarFieldSpec {
    pub fn build(&self) -> Arc<dyn Fn(Vec3) -> f64 + Send + Sync> {
        match *self {
            ScalarFieldSpec::Constant { value } => Arc::new(move |_| value),
            ScalarFieldSpec::GaussianBump { base, amplitude, center, width } => {
                Arc::new(move |x| {
                    let d = x - Vec3::new(center[0], center[1], center[2]);
                    base + amplitude * (-d.dot(d) / (width * width)).exp()
                })
            }
            ScalarFieldSpec::Polynomial { coeffs } => {
                Arc::new(move |x| coeffs[0] + coeffs[1] * x.x + coeffs[2] * x.y + coeffs[3] * x.z)
            }
        }
    }
}

// no deny_unknown_fields here: serde cannot combine it with flatten
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaFieldSpec {
    #[serde(flatten)]
    pub field: ScalarFieldSpec,
    #[serde(default)]
    pub im: f64,
}

impl GammaFieldSpec {
    pub fn build(&self) -> Arc<dyn Fn(Vec3) -> c64 + Send + Sync> {
        let re = self.field.build();
        let im = self.im;
        Arc::new(move |x| c64::new(re(x), im))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub kappa: f64,
    pub domain_lo: [f64; 3],
    pub domain_hi: [f64; 3],
    pub density: ScalarFieldSpec,
    pub gamma: GammaFieldSpec,
}

impl LawSpec {
    pub fn build(&self) -> emscat::Result<DistributionLaw> {
        let domain = Box3::new(vec3(self.domain_lo), vec3(self.domain_hi))?;
        DistributionLaw::new(domain, self.kappa, self.density.build())
    }
}

fn default_quad_radial() -> usize {
    24
}
fn default_quad_theta() -> usize {
    24
}
fn default_quad_phi() -> usize {
    48
}
fn default_mesh() -> usize {
    8
}
fn default_solver() -> SolverChoice {
    SolverChoice::Direct
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    10_000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Direct,
    Iterative,
    Preconditioned,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    #[serde(default = "default_quad_radial")]
    pub quad_radial: usize,
    #[serde(default = "default_quad_theta")]
    pub quad_theta: usize,
    #[serde(default = "default_quad_phi")]
    pub quad_phi: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    #[serde(default = "default_solver")]
    pub solver: SolverChoice,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for NumericsSpec {
    fn default() -> Self {
        NumericsSpec {
            quad_radial: default_quad_radial(),
            quad_theta: default_quad_theta(),
            quad_phi: default_quad_phi(),
            mesh: default_mesh(),
            solver: default_solver(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub a_values: Vec<f64>,
    pub probes: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "form", rename_all = "kebab-case")]
pub enum RefractionForm {
    Constant { value: f64 },
    /// n(omega) = 1/omega^2
    InverseSquare,
    /// n(omega) = 1 + 1/omega
    OnePlusInverse,
}

impl RefractionForm {
    pub fn build(&self) -> Box<dyn Fn(f64) -> c64> {
        match *self {
            RefractionForm::Constant { value } => Box::new(move |_| c64::new(value, 0.0)),
            RefractionForm::InverseSquare => Box::new(|w| c64::new(1.0 / (w * w), 0.0)),
            RefractionForm::OnePlusInverse => Box::new(|w| c64::new(1.0 + 1.0 / w, 0.0)),
        }
    }
}

// no deny_unknown_fields here: serde cannot combine it with flatten
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NrcheckSpec {
    #[serde(flatten)]
    pub form: RefractionForm,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma3Function {
    One,
    X1Squared,
    X1X2,
}

impl Lemma3Function {
    pub fn build(&self) -> Box<dyn Fn(Vec3) -> f64 + Sync> {
        match self {
            Lemma3Function::One => Box::new(|_| 1.0),
            Lemma3Function::X1Squared => Box::new(|x| x.x * x.x),
            Lemma3Function::X1X2 => Box::new(|x| x.x * x.y),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma3Spec {
    pub f: Lemma3Function,
    pub a_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub incident: Option<IncidentSpec>,
    pub particle: Option<ParticleSpec>,
    #[serde(default)]
    pub particles: Vec<ParticleSpec>,
    pub law: Option<LawSpec>,
    #[serde(default)]
    pub numerics: NumericsSpec,
    pub study: Option<StudySpec>,
    pub nrcheck: Option<NrcheckSpec>,
    pub lemma3: Option<Lemma3Spec>,
    #[serde(default)]
    pub probes: Vec<[f64; 3]>,
}

pub fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

impl IncidentSpec {
    pub fn build(&self) -> emscat::Result<PlaneWave> {
        make_plane_wave(
            ComplexVec3::from_real(vec3(self.amplitude)),
            vec3(self.direction),
            self.k,
        )
    }
}

impl ParticleSpec {
    pub fn build(&self) -> emscat::Result<Particle> {
        Particle::new(
            vec3(self.center),
            self.radius,
            c64::new(self.gamma[0], self.gamma[1]),
            self.kappa,
        )
    }
}

impl RunConfig {
    /// Cross-field checks beyond what serde enforces; constructs every
    /// library object the scenario will need so invariant violations
    /// surface here with their library error messages.
    pub fn validate(&self) -> Result<(), String> {
        let need = |cond: bool, what: &str| -> Result<(), String> {
            if cond {
                Ok(())
            } else {
                Err(format!("scenario requires the [{what}] section"))
            }
        };
        match self.scenario {
            Scenario::Single => {
                need(self.incident.is_some(), "incident")?;
                need(self.particle.is_some(), "particle")?;
            }
            Scenario::Multi => {
                need(self.incident.is_some(), "incident")?;
                need(!self.particles.is_empty(), "particles")?;
            }
            Scenario::Effective => {
                need(self.incident.is_some(), "incident")?;
                need(self.law.is_some(), "law")?;
            }
            Scenario::Converge => {
                need(self.incident.is_some(), "incident")?;
                need(self.law.is_some(), "law")?;
                need(self.study.is_some(), "study")?;
            }
            Scenario::Nrcheck => need(self.nrcheck.is_some(), "nrcheck")?,
            Scenario::Lemma3 => {
                need(self.law.is_some(), "law")?;
                need(self.lemma3.is_some(), "lemma3")?;
            }
        }
        if let Some(inc) = &self.incident {
            inc.build().map_err(|e| e.to_string())?;
        }
        if let Some(p) = &self.particle {
            p.build().map_err(|e| e.to_string())?;
        }
        for p in &self.particles {
            p.build().map_err(|e| e.to_string())?;
        }
        if let Some(law) = &self.law {
            law.build().map_err(|e| e.to_string())?;
        }
        if let Some(study) = &self.study {
            if study.a_values.is_empty() {
                return Err("study.a_values must be non-empty".into());
            }
            if study.a_values.windows(2).any(|w| w[1] >= w[0]) {
                return Err("study.a_values must be strictly decreasing".into());
            }
        }
        if let Some(l3) = &self.lemma3 {
            if l3.a_values.is_empty() {
                return Err("lemma3.a_values must be non-empty".into());
            }
        }
        if let Some(nr) = &self.nrcheck {
            if nr.omega <= 0.0 {
                return Err(format!("nrcheck.omega must be positive, got {}", nr.omega));
            }
        }
        Ok(())
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| format!("parse error: {e}"))?;
    cfg.validate()?;
    Ok(cfg)
}
