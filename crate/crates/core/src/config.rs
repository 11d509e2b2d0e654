//! TOML run configuration: `[system]`, `[bath]`, `[run]`.
//!
//! Parsing rescales every frequency by `J`, so the resolved config always has
//! `J = 1`. [`RunConfig::to_toml`] writes the resolved form back out; parsing
//! that text again yields the same values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{QubitEnergies, SpectralDensity, SystemConfig, TabulatedDensity, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Talbot,
    Fourier,
    Volterra,
    Bath,
    ClosedForm,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Talbot => "talbot",
            Engine::Fourier => "fourier",
            Engine::Volterra => "volterra",
            Engine::Bath => "bath",
            Engine::ClosedForm => "closed-form",
        }
    }

    pub fn parse(s: &str) -> Option<Engine> {
        [Engine::Talbot, Engine::Fourier, Engine::Volterra, Engine::Bath, Engine::ClosedForm]
            .into_iter()
            .find(|e| e.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunDirectives {
    pub engine: Engine,
    pub tmax: f64,
    pub points: usize,
    /// `None` picks the default for the kernel family.
    pub tau: Option<f64>,
    pub window_fraction: f64,
    pub jump_threshold: f64,
    pub range: Option<(f64, f64)>,
    pub sweep_points: usize,
    pub strict: bool,
    pub bath_modes: usize,
    pub volterra_step: f64,
}

impl RunDirectives {
    pub fn defaults_for(density: &SpectralDensity) -> Self {
        RunDirectives {
            engine: if density.is_rational() { Engine::Talbot } else { Engine::Fourier },
            tmax: 20.0,
            points: 201,
            tau: None,
            window_fraction: 0.5,
            jump_threshold: 5.0,
            range: None,
            sweep_points: 41,
            strict: false,
            bath_modes: 2000,
            volterra_step: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |field: &str, x: f64| -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("{x} must be finite and positive")))
            }
        };
        pos("run.tmax", self.tmax)?;
        if self.points == 0 {
            return Err(Error::config("run.points", "must be at least 1"));
        }
        if let Some(t) = self.tau {
            pos("run.tau", t)?;
        }
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(Error::config(
                "run.window_fraction",
                format!("{} must lie in (0, 1)", self.window_fraction),
            ));
        }
        if !(self.jump_threshold.is_finite() && self.jump_threshold > 1.0) {
            return Err(Error::config(
                "run.jump_threshold",
                format!("{} must exceed 1", self.jump_threshold),
            ));
        }
        if let Some((lo, hi)) = self.range {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(Error::config("run.range", format!("[{lo}, {hi}] is not an increasing nonnegative range")));
            }
        }
        if self.sweep_points < 3 {
            return Err(Error::config("run.sweep_points", "need at least 3 sweep points"));
        }
        if self.bath_modes < 2 {
            return Err(Error::config("run.bath_modes", "need at least 2 modes"));
        }
        pos("run.volterra_step", self.volterra_step)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub density: SpectralDensity,
    pub run: RunDirectives,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    system: SystemDoc,
    bath: BathDoc,
    #[serde(default)]
    run: RunDoc,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1_0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c2_0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_qubits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topology: Option<Topology>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lamb_shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energies: Option<QubitEnergies>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BathDoc {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta_c: Option<f64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_eg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_eg_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    engine: Option<Engine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tmax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jump_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strict: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bath_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volterra_step: Option<f64>,
}

fn required(field: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::config(field, "missing"))
}

fn reject_extra(kind: &str, doc: &BathDoc, allowed: &[&str]) -> Result<()> {
    let present = [
        ("gamma_tilde", doc.gamma_tilde.is_some()),
        ("g", doc.g.is_some()),
        ("gamma", doc.gamma.is_some()),
        ("delta_c", doc.delta_c.is_some()),
        ("S", doc.s.is_some()),
        ("omega_c", doc.omega_c.is_some()),
        ("omega_eg", doc.omega_eg.is_some()),
        ("omega_eg_prime", doc.omega_eg_prime.is_some()),
        ("samples", doc.samples.is_some()),
        ("file", doc.file.is_some()),
    ];
    for (name, set) in present {
        if set && !allowed.contains(&name) {
            return Err(Error::config(
                format!("bath.{name}"),
                format!("not a parameter of a {kind} bath"),
            ));
        }
    }
    Ok(())
}

/// Parse a config whose tabulated densities are given inline.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &|path: &str| {
        Err(Error::config(
            "bath.file",
            format!("cannot load `{path}` here; give the samples inline"),
        ))
    })
}

/// Parse a config; `load` returns the text of a `bath.file` reference.
pub fn parse_config_with(text: &str, load: &dyn Fn(&str) -> Result<String>) -> Result<RunConfig> {
    let doc: Doc = toml::from_str(text).map_err(|e| {
        let field = e
            .message()
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "document".to_string());
        Error::config(field, e.message().trim().to_string())
    })?;

    let sys = &doc.system;
    let j = sys.j.unwrap_or(1.0);
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::config("system.J", format!("J = {j} must be positive")));
    }
    let c = |v: Option<[f64; 2]>, d: f64| v.map(|a| Complex64::new(a[0], a[1])).unwrap_or(Complex64::new(d, 0.0));
    let epsilon = match (sys.epsilon, &sys.energies) {
        (Some(e), _) => e,
        (None, Some(en)) => en.epsilon(),
        (None, None) => 0.0,
    };
    let system = SystemConfig {
        coupling_j: j,
        epsilon,
        n_qubits: sys.n_qubits.unwrap_or(1),
        topology: sys.topology.unwrap_or(Topology::SeparateBaths),
        initial_c1: c(sys.c1_0, 1.0),
        initial_c2: c(sys.c2_0, 0.0),
        energies: sys.energies,
        lamb_shift: sys.lamb_shift.unwrap_or(0.0),
    };
    system.validate()?;

    let b = &doc.bath;
    let density = match b.kind.as_str() {
        "markovian" => {
            reject_extra("markovian", b, &["gamma_tilde"])?;
            SpectralDensity::Markovian {
                gamma_tilde: required("bath.gamma_tilde", b.gamma_tilde)?,
            }
        }
        "lorentzian" => {
            reject_extra("lorentzian", b, &["g", "gamma", "delta_c"])?;
            SpectralDensity::Lorentzian {
                g: required("bath.g", b.g)?,
                gamma: required("bath.gamma", b.gamma)?,
                delta_c: b.delta_c.unwrap_or(0.0),
            }
        }
        "ohmic" => {
            reject_extra("ohmic", b, &["g", "S", "omega_c", "omega_eg"])?;
            SpectralDensity::Ohmic {
                g: required("bath.g", b.g)?,
                s: required("bath.S", b.s)?,
                omega_c: required("bath.omega_c", b.omega_c)?,
                omega_eg: required("bath.omega_eg", b.omega_eg)?,
            }
        }
        "tabulated" => {
            reject_extra("tabulated", b, &["samples", "file", "omega_eg_prime"])?;
            let samples: Vec<(f64, f64)> = match (&b.samples, &b.file) {
                (Some(s), None) => s.iter().map(|p| (p[0], p[1])).collect(),
                (None, Some(path)) => parse_tabulated_csv(&load(path)?)?,
                (Some(_), Some(_)) => {
                    return Err(Error::config("bath.file", "give either `samples` or `file`, not both"))
                }
                (None, None) => return Err(Error::config("bath.samples", "missing")),
            };
            SpectralDensity::Tabulated(TabulatedDensity::new(
                &samples,
                required("bath.omega_eg_prime", b.omega_eg_prime)?,
            )?)
        }
        other => {
            return Err(Error::config(
                "bath.type",
                format!("unknown bath type `{other}` (markovian, lorentzian, ohmic, tabulated)"),
            ))
        }
    };
    density.validate()?;

    let r = &doc.run;
    let mut run = RunDirectives::defaults_for(&density);
    if let Some(e) = r.engine {
        run.engine = e;
    }
    if let Some(v) = r.tmax {
        run.tmax = v;
    }
    if let Some(v) = r.points {
        run.points = v;
    }
    run.tau = r.tau.or(run.tau);
    if let Some(v) = r.window_fraction {
        run.window_fraction = v;
    }
    if let Some(v) = r.jump_threshold {
        run.jump_threshold = v;
    }
    if let Some([lo, hi]) = r.range {
        run.range = Some((lo, hi));
    }
    if let Some(v) = r.sweep_points {
        run.sweep_points = v;
    }
    if let Some(v) = r.strict {
        run.strict = v;
    }
    if let Some(v) = r.bath_modes {
        run.bath_modes = v;
    }
    if let Some(v) = r.volterra_step {
        run.volterra_step = v;
    }
    run.validate()?;

    // Rescale to J = 1: frequencies divide by J, times multiply.
    let system = system.normalized();
    let density = density.scaled(j);
    run.tmax *= j;
    run.tau = run.tau.map(|t| t * j);
    run.range = run.range.map(|(a, b)| (a / j, b / j));
    run.volterra_step *= j;
    Ok(RunConfig { system, density, run })
}

impl RunConfig {
    /// Resolved config with every default written out.
    pub fn to_toml(&self) -> String {
        let s = &self.system;
        let system = SystemDoc {
            j: Some(s.coupling_j),
            epsilon: Some(s.epsilon),
            c1_0: Some([s.initial_c1.re, s.initial_c1.im]),
            c2_0: Some([s.initial_c2.re, s.initial_c2.im]),
            n_qubits: Some(s.n_qubits),
            topology: Some(s.topology),
            lamb_shift: Some(s.lamb_shift),
            energies: s.energies,
        };
        let mut bath = BathDoc {
            kind: self.density.kind().to_string(),
            ..BathDoc::default()
        };
        match &self.density {
            SpectralDensity::Markovian { gamma_tilde } => bath.gamma_tilde = Some(*gamma_tilde),
            SpectralDensity::Lorentzian { g, gamma, delta_c } => {
                bath.g = Some(*g);
                bath.gamma = Some(*gamma);
                bath.delta_c = Some(*delta_c);
            }
            SpectralDensity::Ohmic { g, s, omega_c, omega_eg } => {
                bath.g = Some(*g);
                bath.s = Some(*s);
                bath.omega_c = Some(*omega_c);
                bath.omega_eg = Some(*omega_eg);
            }
            SpectralDensity::Tabulated(t) => {
                bath.samples = Some(t.samples().into_iter().map(|(w, j)| [w, j]).collect());
                bath.omega_eg_prime = Some(t.omega_eg_prime());
            }
        }
        let r = &self.run;
        let run = RunDoc {
            engine: Some(r.engine),
            tmax: Some(r.tmax),
            points: Some(r.points),
            tau: r.tau,
            window_fraction: Some(r.window_fraction),
            jump_threshold: Some(r.jump_threshold),
            range: r.range.map(|(a, b)| [a, b]),
            sweep_points: Some(r.sweep_points),
            strict: Some(r.strict),
            bath_modes: Some(r.bath_modes),
            volterra_step: Some(r.volterra_step),
        };
        toml::to_string(&Doc { system, bath, run }).expect("config document serializes")
    }
}

/// Two-column `omega,J` samples. `#` starts a comment; a non-numeric first row is a header.
pub fn parse_tabulated_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::config("bath.file", format!("row {}: {e}", k + 1)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::config(
                "bath.file",
                format!("row {}: expected 2 columns, found {}", k + 1, rec.len()),
            ));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(w), Ok(j)) => out.push((w, j)),
            _ if k == 0 && out.is_empty() => continue,
            _ => {
                return Err(Error::config(
                    "bath.file",
                    format!("row {}: `{}`, `{}` are not numbers", k + 1, &rec[0], &rec[1]),
                ))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::config("bath.file", "no samples"));
    }
    Ok(out)
}
