use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde_json::{json, Value};

use qzeno::analysis::{
    analyse, effective_decay_rate, im_eigenvalue_surface, trace_ep_locus, LocusParameter, PeakClassifierConfig,
};
use qzeno::laplace::{build_amplitude, invert, InversionEngine};
use qzeno::markovian::{c1_closed_form, EP_DETUNING_TOL};
use qzeno::model::{
    parse_config, parse_config_with, AmplitudeTrace, Engine, Method, RunConfig, SpectralDensity,
    TimeGrid,
};
use qzeno::timedomain::{discretize_bath, solve_discretized_run, solve_volterra_with, DiscretizationStrategy, VolterraOptions};
use qzeno::Error;

use crate::presets::{self, Kind, Preset};
use crate::{Cli, Command, EigenArgs, EngineArg, LocusArgs, OracleArgs, OverArg, ParamArg, SimulateArgs, Source, SweepArgs};

pub const TOL_CLOSED_FORM: f64 = 1e-8;
pub const TOL_TALBOT_FOURIER: f64 = 1e-6;
pub const TOL_LAPLACE_VOLTERRA: f64 = 1e-5;
pub const TOL_BATH: f64 = 1e-2;
pub const TOL_NORM: f64 = 1e-8;

const DEFAULT_LOCUS_POINTS: usize = 11;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, bad config, unreadable files. Exit code 1.
    Usage(String),
    /// A computation failed. Exit code 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Unsupported(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

/// What a successful invocation wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub manifest: PathBuf,
    pub outputs: Vec<PathBuf>,
    /// Failed oracle checks; nonempty means exit code 2.
    pub failed: Vec<String>,
}

struct Job {
    label: String,
    config: RunConfig,
}

struct Loaded {
    jobs: Vec<Job>,
    preset: Option<Preset>,
    /// Stem for the manifest name.
    stem: String,
}

fn load(source: &Source, kind: Kind, optional: bool) -> Result<Loaded, CliError> {
    if let Some(id) = &source.figure {
        let p = presets::get(id).ok_or_else(|| {
            CliError::Usage(format!("no figure preset `{id}`; known: {}", presets::IDS.join(", ")))
        })?;
        if p.kind != kind {
            return Err(CliError::Usage(format!(
                "figure {} is a {} preset; run `qzeno {} --figure {}`",
                p.id,
                p.kind.command(),
                p.kind.command(),
                p.id
            )));
        }
        let stem = format!("fig{}", p.id);
        let jobs = p
            .members
            .iter()
            .map(|m| {
                Ok(Job {
                    label: format!("{stem}-{}", m.label),
                    config: parse_config(&m.config)?,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        return Ok(Loaded {
            jobs,
            preset: Some(p),
            stem,
        });
    }
    let Some(path) = &source.config else {
        if optional {
            return Ok(Loaded {
                jobs: Vec::new(),
                preset: None,
                stem: "run".into(),
            });
        }
        return Err(CliError::Usage("give --config FILE or --figure ID".into()));
    };
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loader = |rel: &str| -> qzeno::Result<String> {
        let p = dir.join(rel);
        fs::read_to_string(&p).map_err(|e| Error::Config {
            field: "bath.file".into(),
            message: format!("{}: {e}", p.display()),
        })
    };
    let config = parse_config_with(&text, &loader)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("run")
        .to_string();
    Ok(Loaded {
        jobs: vec![Job {
            label: stem.clone(),
            config,
        }],
        preset: None,
        stem,
    })
}

/// Collects files and warnings, then writes the manifest.
struct Writer {
    dir: PathBuf,
    outputs: Vec<PathBuf>,
    warnings: Vec<String>,
    started: Instant,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            started: Instant::now(),
        })
    }

    fn csv(&mut self, name: String, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for r in rows {
            w.write_record(&r).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.outputs.push(path);
        Ok(())
    }

    fn json(&mut self, name: String, v: &Value) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(v).expect("json values serialize");
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        self.outputs.push(path);
        Ok(())
    }

    fn finish(self, command: &str, loaded: &Loaded, tolerances: Value, failed: Vec<String>) -> Result<Outcome, CliError> {
        let path = self.dir.join(format!("{}.{command}.manifest.json", loaded.stem));
        let names: Vec<String> = self
            .outputs
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
        let runs: Vec<Value> = loaded
            .jobs
            .iter()
            .map(|j| json!({ "label": j.label, "config": j.config.to_toml() }))
            .collect();
        let manifest = json!({
            "command": command,
            "figure": loaded.preset.as_ref().map(|p| p.id),
            "version": env!("CARGO_PKG_VERSION"),
            "runs": runs,
            "tolerances": tolerances,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "outputs": names,
            "warnings": self.warnings,
            "failed_checks": failed,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("json values serialize");
        fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
        Ok(Outcome {
            manifest: path,
            outputs: self.outputs,
            failed,
        })
    }
}

/// Shortest round-trip decimal; empty for NaN and infinities.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::EpLocus(a) => ep_locus(a),
        Command::Eigen(a) => eigen(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Figures => {
            for id in presets::IDS {
                let p = presets::get(id).expect("listed presets exist");
                println!("{:<4} {:<9} {}", p.id, p.kind.command(), p.title);
            }
            Ok(Outcome {
                manifest: PathBuf::new(),
                outputs: Vec::new(),
                failed: Vec::new(),
            })
        }
    }
}

fn engine_of(e: EngineArg) -> Engine {
    match e {
        EngineArg::Talbot => Engine::Talbot,
        EngineArg::Fourier => Engine::Fourier,
        EngineArg::Volterra => Engine::Volterra,
        EngineArg::Bath => Engine::Bath,
        EngineArg::ClosedForm => Engine::ClosedForm,
    }
}

fn closed_form_applies(cfg: &RunConfig) -> bool {
    let s = &cfg.system;
    matches!(cfg.density, SpectralDensity::Markovian { .. })
        && s.epsilon.abs() < EP_DETUNING_TOL
        && s.n_qubits == 1
        && s.initial_c1 == Complex64::new(1.0, 0.0)
        && s.initial_c2 == Complex64::new(0.0, 0.0)
        && s.lamb_shift == 0.0
}

/// Reject engine/bath combinations that cannot run, naming one that can.
pub fn check_engine(cfg: &RunConfig, engine: Engine) -> Result<(), CliError> {
    let d = &cfg.density;
    match engine {
        Engine::ClosedForm if !closed_form_applies(cfg) => Err(CliError::Usage(
            "closed-form needs a Markovian bath, ε = 0, one satellite qubit, c1(0) = 1 and no Lamb shift; \
             try --engine talbot"
                .into(),
        )),
        Engine::Talbot if matches!(d, SpectralDensity::Tabulated(_)) => Err(CliError::Usage(
            "a tabulated density has no analytic continuation for the Talbot contour; use --engine fourier or volterra"
                .into(),
        )),
        Engine::Bath if matches!(d, SpectralDensity::Markovian { .. }) => Err(CliError::Usage(
            "a Markovian bath has no modes to discretize; use --engine talbot or volterra".into(),
        )),
        _ => Ok(()),
    }
}

struct EngineRun {
    trace: AmplitudeTrace,
    norm_defect: Option<f64>,
}

fn run_engine(cfg: &RunConfig, engine: Engine, grid: &TimeGrid) -> Result<EngineRun, CliError> {
    check_engine(cfg, engine)?;
    let (sys, d) = (&cfg.system, &cfg.density);
    let plain = |trace| EngineRun { trace, norm_defect: None };
    Ok(match engine {
        Engine::ClosedForm => {
            let SpectralDensity::Markovian { gamma_tilde } = *d else {
                unreachable!("checked above")
            };
            let c: Vec<Complex64> =
                grid.points().iter().map(|&t| c1_closed_form(t, gamma_tilde, sys.coupling_j)).collect();
            plain(AmplitudeTrace::new(grid.clone(), c, Method::ClosedForm))
        }
        Engine::Talbot | Engine::Fourier => {
            let f = build_amplitude(sys, d)?;
            let how = if engine == Engine::Talbot {
                InversionEngine::Talbot
            } else {
                InversionEngine::FourierSeries
            };
            plain(invert(&f, grid, how)?)
        }
        Engine::Volterra => {
            let opts = VolterraOptions {
                step: cfg.run.volterra_step,
                richardson: true,
            };
            plain(solve_volterra_with(sys, d, grid, opts)?)
        }
        Engine::Bath => {
            let bath = discretize_bath(d, cfg.run.bath_modes, None, DiscretizationStrategy::UniformGrid)?;
            let mut r = solve_discretized_run(sys, &bath, grid)?;
            let mut w = bath.warnings.clone();
            w.append(&mut r.trace.warnings);
            r.trace.warnings = w;
            EngineRun {
                trace: r.trace,
                norm_defect: Some(r.norm_defect),
            }
        }
    })
}

fn output_grid(cfg: &RunConfig) -> Result<TimeGrid, CliError> {
    cfg.run.validate()?;
    Ok(TimeGrid::uniform(0.0, cfg.run.tmax, cfg.run.points)?)
}

fn trace_rows(trace: &AmplitudeTrace) -> Vec<Vec<String>> {
    let rates = effective_decay_rate(trace).unwrap_or_else(|_| vec![None; trace.p1.len()]);
    trace
        .times()
        .iter()
        .zip(&trace.c1_tilde)
        .zip(&trace.p1)
        .zip(rates)
        .map(|(((&t, c), &p), g)| vec![num(t), num(c.re), num(c.im), num(p), g.map(num).unwrap_or_default()])
        .collect()
}

fn simulate(a: SimulateArgs) -> Result<Outcome, CliError> {
    let mut loaded = load(&a.source, Kind::Simulate, false)?;
    for j in &mut loaded.jobs {
        if let Some(e) = a.engine {
            j.config.run.engine = engine_of(e);
        }
        if let Some(t) = a.tmax {
            j.config.run.tmax = t;
        }
        if let Some(n) = a.points {
            j.config.run.points = n;
        }
    }
    let mut out = Writer::new(&a.out)?;
    let mut tolerances = Vec::new();
    for j in &loaded.jobs {
        let grid = output_grid(&j.config)?;
        let engine = j.config.run.engine;
        let r = run_engine(&j.config, engine, &grid)?;
        out.csv(
            format!("{}.trace.csv", j.label),
            &["t", "re_c1", "im_c1", "p1", "gamma_eff"],
            trace_rows(&r.trace),
        )?;
        out.warnings.extend(r.trace.warnings.iter().map(|w| format!("{}: {w}", j.label)));
        let report = json!({
            "label": j.label,
            "engine": engine.name(),
            "method": r.trace.method,
            "max_error_estimate": r.trace.max_error_estimate(),
            "valid_until": r.trace.valid_until,
            "norm_defect": r.norm_defect,
            "final_p1": r.trace.p1.last(),
            "warnings": r.trace.warnings,
        });
        out.json(format!("{}.report.json", j.label), &report)?;
        tolerances.push(json!({
            "label": j.label,
            "engine": engine.name(),
            "max_error_estimate": r.trace.max_error_estimate(),
        }));
        println!(
            "{}: {} points with {}, P1(tmax) = {:.6e}",
            j.label,
            grid.len(),
            engine.name(),
            r.trace.p1.last().copied().unwrap_or(f64::NAN)
        );
    }
    out.finish("simulate", &loaded, Value::Array(tolerances), Vec::new())
}

/// `LO:HI` with LO < HI, or with `allow_point`, LO ≤ HI plus an optional `:N`.
pub fn parse_range(s: &str, allow_point: bool) -> Result<(f64, f64, Option<usize>), CliError> {
    let bad = || CliError::Usage(format!("bad range `{s}`; expected LO:HI{}", if allow_point { "[:N]" } else { "" }));
    let parts: Vec<&str> = s.split(':').collect();
    let n = match (parts.len(), allow_point) {
        (2, _) => None,
        (3, true) => Some(parts[2].trim().parse::<usize>().map_err(|_| bad())?),
        _ => return Err(bad()),
    };
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    if hi < lo || (hi == lo && !allow_point) {
        return Err(CliError::Usage(format!("range `{s}` is empty")));
    }
    if n == Some(0) {
        return Err(CliError::Usage(format!("range `{s}` asks for no points")));
    }
    Ok((lo, hi, n))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn classifier_tolerances(cfg: &PeakClassifierConfig, density: &SpectralDensity) -> Value {
    json!({
        "tau": cfg.tau_for(density),
        "window_fraction": cfg.window_fraction,
        "jump_threshold": cfg.jump_threshold,
        "strict": cfg.strict,
    })
}

fn sweep(a: SweepArgs) -> Result<Outcome, CliError> {
    let mut loaded = load(&a.source, Kind::Sweep, false)?;
    let range = a.range.as_deref().map(|r| parse_range(r, false)).transpose()?;
    for j in &mut loaded.jobs {
        if let Some((lo, hi, _)) = range {
            j.config.run.range = Some((lo, hi));
        }
        if a.tau.is_some() {
            j.config.run.tau = a.tau;
        }
        j.config.run.validate()?;
    }
    let mut out = Writer::new(&a.out)?;
    let mut tolerances = Vec::new();
    for j in &loaded.jobs {
        let d = &j.config.density;
        match (a.param, d) {
            (Some(ParamArg::Gtilde), SpectralDensity::Markovian { .. }) => {}
            (Some(ParamArg::G), SpectralDensity::Lorentzian { .. } | SpectralDensity::Ohmic { .. }) => {}
            (Some(p), _) => {
                let want = if p == ParamArg::Gtilde { "g" } else { "gtilde" };
                return Err(CliError::Usage(format!(
                    "a {} bath is swept over {want}, not {}",
                    d.kind(),
                    if p == ParamArg::Gtilde { "gtilde" } else { "g" }
                )));
            }
            (None, _) => {}
        }
        let cfg = PeakClassifierConfig::from_run(&j.config.run);
        let (s, report) = analyse(&j.config.system, d, &cfg)?;
        let rows = s
            .curve
            .coupling_grid
            .iter()
            .zip(&s.curve.gamma_eff_tau)
            .zip(&s.curve.derivative)
            .map(|((&g, &r), &dr)| vec![num(g), num(r), num(dr)])
            .collect();
        out.csv(format!("{}.curve.csv", j.label), &["coupling", "gamma_eff_tau", "derivative"], rows)?;
        if !s.unconverged.is_empty() {
            out.warnings.push(format!(
                "{}: {} couplings failed the tau-doubling check",
                j.label,
                s.unconverged.len()
            ));
        }
        let v = json!({
            "label": j.label,
            "report": report,
            "resolution": s.resolution,
            "unconverged": s.unconverged,
        });
        out.json(format!("{}.report.json", j.label), &v)?;
        println!(
            "{}: {:?} at {} (Γ = {:.6}, jump ratio {:.3})",
            j.label, report.classification, report.peak_coupling, report.peak_value, report.jump_ratio
        );
        tolerances.push(json!({ "label": j.label, "classifier": classifier_tolerances(&cfg, d) }));
    }
    out.finish("sweep", &loaded, Value::Array(tolerances), Vec::new())
}

fn ep_locus(a: LocusArgs) -> Result<Outcome, CliError> {
    let loaded = load(&a.source, Kind::EpLocus, false)?;
    let preset = loaded.preset.as_ref().and_then(|p| p.locus.clone());
    let parameter = match (a.over, &preset) {
        (Some(OverArg::Gamma), _) => LocusParameter::LorentzianWidth,
        (Some(OverArg::Epsilon), _) => LocusParameter::Epsilon,
        (Some(OverArg::Deltac), _) => LocusParameter::DetuningDeltaC,
        (None, Some((p, _))) => *p,
        (None, None) => return Err(CliError::Usage("give --over gamma|epsilon|deltac".into())),
    };
    let values = match (&a.range, &preset) {
        (Some(r), _) => {
            let (lo, hi, n) = parse_range(r, true)?;
            linspace(lo, hi, n.unwrap_or(DEFAULT_LOCUS_POINTS))
        }
        (None, Some((_, v))) => v.clone(),
        (None, None) => return Err(CliError::Usage("give --range LO:HI[:N]".into())),
    };
    let mut out = Writer::new(&a.out)?;
    let mut tolerances = Vec::new();
    for j in &loaded.jobs {
        let cfg = PeakClassifierConfig::from_run(&j.config.run);
        let locus = trace_ep_locus(&j.config.system, &j.config.density, parameter, &values, &cfg)?;
        let rows = locus
            .points
            .iter()
            .map(|p| vec![num(p.param), num(p.g_ep), num(p.err)])
            .collect();
        out.csv(format!("{}.locus.csv", j.label), &["param", "g_ep", "err"], rows)?;
        out.json(format!("{}.report.json", j.label), &json!({ "label": j.label, "locus": locus }))?;
        if locus.gaps > 0 {
            out.warnings.push(format!("{}: {} parameter values without a sharp peak", j.label, locus.gaps));
        }
        println!(
            "{}: {} values, {} gaps, increasing = {}",
            j.label,
            locus.points.len(),
            locus.gaps,
            locus.increasing
        );
        tolerances.push(json!({ "label": j.label, "classifier": classifier_tolerances(&cfg, &j.config.density) }));
    }
    out.finish("ep-locus", &loaded, Value::Array(tolerances), Vec::new())
}

pub fn parse_grid(s: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let bad = || CliError::Usage(format!("bad grid `{s}`; expected GT0:GT1:N,EPS0:EPS1:M"));
    let (g, e) = s.split_once(',').ok_or_else(bad)?;
    let axis = |part: &str| -> Result<Vec<f64>, CliError> {
        let (lo, hi, n) = parse_range(part, true)?;
        Ok(linspace(lo, hi, n.ok_or_else(bad)?))
    };
    Ok((axis(g)?, axis(e)?))
}

fn eigen(a: EigenArgs) -> Result<Outcome, CliError> {
    let mut loaded = load(&a.source, Kind::Eigen, true)?;
    let (gammas, epsilons) = match (&a.grid, loaded.preset.as_ref().and_then(|p| p.grid.clone())) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(g)) => g,
        (None, None) => (linspace(0.0, 8.0, 161), vec![0.0]),
    };
    if loaded.jobs.is_empty() {
        let config = parse_config("[system]\nJ = 1.0\nepsilon = 0.0\n\n[bath]\ntype = \"markovian\"\ngamma_tilde = 0.0\n")?;
        loaded.jobs.push(Job {
            label: "eigen".into(),
            config,
        });
    }
    let mut out = Writer::new(&a.out)?;
    for j in &loaded.jobs {
        let surface = im_eigenvalue_surface(&j.config.system, &gammas, &epsilons)?;
        let rows = surface
            .iter()
            .map(|p| {
                vec![
                    num(p.gamma_tilde),
                    num(p.epsilon),
                    num(p.lambda3.re),
                    num(p.lambda3.im),
                    num(p.lambda4.re),
                    num(p.lambda4.im),
                    p.coalesced.to_string(),
                ]
            })
            .collect();
        out.csv(
            format!("{}.surface.csv", j.label),
            &["gamma_tilde", "epsilon", "re_lambda3", "im_lambda3", "re_lambda4", "im_lambda4", "coalesced"],
            rows,
        )?;
        let hits: Vec<Value> = surface
            .iter()
            .filter(|p| p.coalesced)
            .map(|p| json!({ "gamma_tilde": p.gamma_tilde, "epsilon": p.epsilon }))
            .collect();
        println!("{}: {} samples, {} coalescences", j.label, surface.len(), hits.len());
        out.json(format!("{}.report.json", j.label), &json!({ "label": j.label, "coalescences": hits }))?;
    }
    let tol = json!({ "coalescence": qzeno::analysis::COALESCENCE_TOL });
    out.finish("eigen", &loaded, tol, Vec::new())
}

/// One row of the oracle table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub a: String,
    pub b: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_some_and(|v| v <= self.tolerance)
    }
}

fn sup_diff(x: &AmplitudeTrace, y: &AmplitudeTrace) -> f64 {
    x.p1.iter().zip(&y.p1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Every applicable engine on one config, compared pairwise on P1.
pub fn oracle_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let grid = output_grid(cfg)?;
    let engines: Vec<Engine> = [Engine::ClosedForm, Engine::Talbot, Engine::Fourier, Engine::Volterra, Engine::Bath]
        .into_iter()
        .filter(|&e| check_engine(cfg, e).is_ok())
        .collect();
    let runs: Vec<(Engine, Result<EngineRun, CliError>)> =
        engines.iter().map(|&e| (e, run_engine(cfg, e, &grid))).collect();
    let get = |e: Engine| runs.iter().find(|(x, _)| *x == e).map(|(_, r)| r);
    let mut checks = Vec::new();
    let mut pair = |name: &str, a: Engine, b: Engine, tolerance: f64, note: String| {
        let (Some(ra), Some(rb)) = (get(a), get(b)) else {
            return;
        };
        let (value, note) = match (ra, rb) {
            (Ok(x), Ok(y)) => (Some(sup_diff(&x.trace, &y.trace)), note),
            (Err(e), _) => (None, format!("{} failed: {e}", a.name())),
            (_, Err(e)) => (None, format!("{} failed: {e}", b.name())),
        };
        checks.push(Check {
            name: name.into(),
            a: a.name().into(),
            b: b.name().into(),
            value,
            tolerance,
            note,
        });
    };
    pair("closed-form", Engine::ClosedForm, Engine::Talbot, TOL_CLOSED_FORM, String::new());
    pair("closed-form", Engine::ClosedForm, Engine::Fourier, TOL_CLOSED_FORM, String::new());
    pair("talbot-fourier", Engine::Talbot, Engine::Fourier, TOL_TALBOT_FOURIER, String::new());
    let laplace = if get(Engine::Talbot).is_some() { Engine::Talbot } else { Engine::Fourier };
    pair("laplace-volterra", laplace, Engine::Volterra, TOL_LAPLACE_VOLTERRA, String::new());
    let recurrence = match get(Engine::Bath) {
        Some(Ok(r)) => match r.trace.valid_until {
            Some(t) if t < cfg.run.tmax => format!("tmax {} exceeds the bath recurrence time {t:.4}", cfg.run.tmax),
            _ => String::new(),
        },
        _ => String::new(),
    };
    pair("bath", laplace, Engine::Bath, TOL_BATH, recurrence);
    if let Some(r) = get(Engine::Bath) {
        checks.push(match r {
            Ok(r) => Check {
                name: "norm".into(),
                a: "bath".into(),
                b: String::new(),
                value: r.norm_defect,
                tolerance: TOL_NORM,
                note: String::new(),
            },
            Err(e) => Check {
                name: "norm".into(),
                a: "bath".into(),
                b: String::new(),
                value: None,
                tolerance: TOL_NORM,
                note: format!("bath failed: {e}"),
            },
        });
    }
    Ok(checks)
}

fn oracle_check(a: OracleArgs) -> Result<Outcome, CliError> {
    let loaded = load(&a.source, Kind::Simulate, false)?;
    let mut out = Writer::new(&a.out)?;
    let mut failed = Vec::new();
    for j in &loaded.jobs {
        let checks = oracle_checks(&j.config)?;
        let rows = checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.a.clone(),
                    c.b.clone(),
                    c.value.map(num).unwrap_or_default(),
                    num(c.tolerance),
                    c.passed().to_string(),
                    c.note.clone(),
                ]
            })
            .collect();
        out.csv(
            format!("{}.oracle.csv", j.label),
            &["check", "engine_a", "engine_b", "sup_diff_p1", "tolerance", "pass", "note"],
            rows,
        )?;
        for c in &checks {
            let v = c.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into());
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            println!("{}: {verdict} {} {} {} = {v} (tol {:.0e}) {}", j.label, c.name, c.a, c.b, c.tolerance, c.note);
            if !c.passed() {
                failed.push(format!("{}: {} {} {}", j.label, c.name, c.a, c.b));
            }
            if !c.note.is_empty() {
                out.warnings.push(format!("{}: {}", j.label, c.note));
            }
        }
    }
    let tol = json!({
        "closed_form": TOL_CLOSED_FORM,
        "talbot_fourier": TOL_TALBOT_FOURIER,
        "laplace_volterra": TOL_LAPLACE_VOLTERRA,
        "bath": TOL_BATH,
        "norm": TOL_NORM,
    });
    out.finish("oracle-check", &loaded, tol, failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.5:3", false).unwrap(), (0.5, 3.0, None));
        assert_eq!(parse_range("0:5:6", true).unwrap(), (0.0, 5.0, Some(6)));
        assert_eq!(parse_range("1:1", true).unwrap(), (1.0, 1.0, None));
        assert!(parse_range("1:1", false).is_err());
        assert!(parse_range("3:1", true).is_err());
        assert!(parse_range("0:1:0", true).is_err());
        assert!(parse_range("0:1:4", false).is_err());
        assert!(parse_range("a:b", false).is_err());
    }

    #[test]
    fn single_point_locus() {
        assert_eq!(linspace(2.0, 2.0, 11), vec![2.0]);
    }

    #[test]
    fn grid() {
        let (g, e) = parse_grid("0:8:5,-1:1:3").unwrap();
        assert_eq!(g, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!(e, vec![-1.0, 0.0, 1.0]);
        assert!(parse_grid("0:8,1:2:3").is_err());
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "");
    }
}
