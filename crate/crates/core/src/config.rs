//! JSON scenario files and their assembly into runnable scenarios.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decay::DecayModel;
use crate::energy::{build_trace, default_params, EnergyTrace, MonitorOverrides, MonitorParams};
use crate::error::{Error, Result};
use crate::kernels::{derive, KernelSpec, PolynomialKernel, PronyKernel, SpringDashpotSpec};
use crate::solver::{run, Backend, InitialData, MaterialField1D, Mesh1D, RunOutput, SimConfig};
use crate::tensor::VoigtTensor;

pub const SCHEMA_VERSION: u32 = 1;

/// Bundled scenarios as `(name, json)`.
pub const BUNDLED: [(&str, &str); 6] = [
    ("elastic_limit", include_str!("../scenarios/elastic_limit.cfg")),
    ("maxwell_spring", include_str!("../scenarios/maxwell_spring.cfg")),
    ("sls_unit", include_str!("../scenarios/sls_unit.cfg")),
    ("burgers_unit_plus_spring", include_str!("../scenarios/burgers_unit_plus_spring.cfg")),
    ("poly_p3", include_str!("../scenarios/poly_p3.cfg")),
    ("boundary_dissipation_only", include_str!("../scenarios/boundary_dissipation_only.cfg")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mesh: MeshSection,
    pub material: MaterialSection,
    pub sim: SimSection,
    #[serde(default)]
    pub monitor: MonitorOverrides,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub cells: usize,
}

/// A uniform value or one value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellValues {
    Uniform(f64),
    PerCell(Vec<f64>),
}

impl CellValues {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            CellValues::Uniform(v) => vec![*v],
            CellValues::PerCell(v) => v.clone(),
        }
    }
}

fn one() -> CellValues {
    CellValues::Uniform(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(default = "one")]
    pub rho: CellValues,
    /// Instantaneous modulus. Taken from the rheology when `spring_dashpot` is given.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CellValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spring_dashpot: Option<SpringDashpotSpec>,
    #[serde(default = "one")]
    pub kernel_scale: CellValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSection {
    /// `G(t) = Σ g e^{−r t}`; an empty list is the elastic limit.
    Prony(Vec<PronyEntry>),
    /// `G(t) = g_hat (1 + a t)^{−p}`.
    Polynomial { g_hat: f64, a: f64, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PronyEntry {
    pub g: f64,
    pub r: f64,
}

impl KernelSection {
    pub fn to_spec(&self) -> Result<KernelSpec> {
        Ok(match self {
            KernelSection::Prony(terms) => KernelSpec::Prony(PronyKernel::scalar(
                &terms.iter().map(|t| (t.g, t.r)).collect::<Vec<_>>(),
            )?),
            KernelSection::Polynomial { g_hat, a, p } => {
                KernelSpec::Polynomial(PolynomialKernel::new(VoigtTensor::scalar(1.0), *g_hat, *a, *p)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub s: f64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub probes: Vec<usize>,
}

fn default_stride() -> usize {
    1
}

/// Nodal profile on `[0, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    #[default]
    Zero,
    /// `amplitude · sin((2k−1)πx/(2L))`, the k-th fixed-free mode.
    QuarterSine {
        #[serde(default = "default_mode")]
        mode: u32,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// `Σ c_i x^i`.
    Poly { coefficients: Vec<f64> },
    /// Explicit values at the `N + 1` nodes.
    Nodal { values: Vec<f64> },
}

fn default_mode() -> u32 {
    1
}

fn default_amplitude() -> f64 {
    1.0
}

impl Profile {
    pub fn sample(&self, mesh: &Mesh1D) -> Result<Vec<f64>> {
        let x = mesh.coordinates();
        let l = mesh.length();
        match self {
            Profile::Zero => Ok(vec![0.0; x.len()]),
            Profile::QuarterSine { mode, amplitude } => {
                if *mode == 0 {
                    return Err(Error::Config("quarter_sine mode starts at 1".into()));
                }
                let k = (2 * mode - 1) as f64;
                Ok(x.iter().map(|&x| amplitude * (k * PI * x / (2.0 * l)).sin()).collect())
            }
            Profile::Poly { coefficients } => Ok(x
                .iter()
                .map(|&x| coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c))
                .collect()),
            Profile::Nodal { values } => {
                if values.len() != x.len() {
                    return Err(Error::Config(format!(
                        "nodal profile has {} values; the mesh has {} nodes",
                        values.len(),
                        x.len()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub u0: Profile,
    #[serde(default)]
    pub v0: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    /// Decay model fitted to `E` over `[T/2, T]` in the run summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayModel>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("no bundled scenario named '{name}'")))?;
        Self::from_json(text)
    }

    /// Structural checks that need no allocation.
    pub fn check(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {}; this build reads schema {SCHEMA_VERSION}",
                self.schema
            )));
        }
        let m = &self.material;
        match (&m.kernel, &m.spring_dashpot) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give exactly one of material.kernel and material.spring_dashpot".into()))
            }
            (None, None) => {
                return Err(Error::Config("material needs a kernel or a spring_dashpot model".into()))
            }
            (Some(_), None) if m.c.is_none() => {
                return Err(Error::Config("material.C is required with an explicit kernel".into()))
            }
            (None, Some(_)) if m.c.is_some() => {
                return Err(Error::Config(
                    "material.C is implied by spring_dashpot; use kernel_scale or rho for heterogeneity".into(),
                ))
            }
            _ => {}
        }
        if self.sim.stride == 0 {
            return Err(Error::Config("sim.stride must be at least 1".into()));
        }
        if self.outputs.snapshot_stride == Some(0) {
            return Err(Error::Config("outputs.snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Re-serialized form with defaults filled in.
    pub fn normalized(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build(&self) -> Result<Scenario> {
        self.check()?;
        let mesh = Mesh1D::new(self.mesh.length, self.mesh.cells)?;
        let m = &self.material;
        let (c, kernel) = match (&m.kernel, &m.spring_dashpot) {
            (Some(k), None) => (m.c.clone().expect("checked").to_vec(), k.to_spec()?),
            (None, Some(sd)) => {
                let d = derive(sd)?;
                let c = d
                    .instantaneous
                    .as_scalar()
                    .ok_or_else(|| Error::Config("spring_dashpot model must be one-dimensional".into()))?;
                (vec![c], d.kernel_spec())
            }
            _ => unreachable!("checked"),
        };
        let material = MaterialField1D::new(&mesh, m.rho.to_vec(), c, kernel, m.kernel_scale.to_vec())?;
        let sim = SimConfig {
            dt: self.sim.dt,
            cfl: self.sim.cfl,
            t_end: self.sim.t_end,
            s: self.sim.s,
            backend: self.sim.backend,
            stride: self.sim.stride,
            probes: self.sim.probes.clone(),
            snapshot_stride: match (&self.outputs.snapshots, self.outputs.snapshot_stride) {
                (Some(_), stride) => Some(stride.unwrap_or(self.sim.stride)),
                (None, _) => None,
            },
        };
        if sim.dt.is_none() && sim.cfl.is_none() {
            return Err(Error::Config("sim needs dt or cfl".into()));
        }
        let initial = InitialData {
            u0: self.initial.u0.sample(&mesh)?,
            v0: self.initial.v0.sample(&mesh)?,
        };
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "scenario".into()),
            mesh,
            material,
            sim,
            initial,
            monitor: self.monitor,
        })
    }
}

/// A validated, allocated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub mesh: Mesh1D,
    pub material: MaterialField1D,
    pub sim: SimConfig,
    pub initial: InitialData,
    pub monitor: MonitorOverrides,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub run: RunOutput,
    pub trace: EnergyTrace,
}

impl Scenario {
    pub fn monitor_params(&self) -> Result<MonitorParams> {
        default_params(&self.material, self.mesh.length(), &self.monitor)
    }

    pub fn run(&self) -> Result<ScenarioResult> {
        let params = self.monitor_params()?;
        let out = run(&self.mesh, &self.material, &self.sim, &self.initial)?;
        let fixed = self.monitor.n1.is_some() || self.monitor.n3.is_some();
        let mut trace = build_trace(&out.samples, params, fixed)?;
        trace.meta.warnings.extend(out.warnings.iter().cloned());
        trace.meta.probes = self.sim.probes.clone();
        Ok(ScenarioResult { run: out, trace })
    }
}
