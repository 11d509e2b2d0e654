//! Long-time decay rates, coupling sweeps and peak classification.
//!
//! A sharp maximum of Γ_eff(τ) against the bath coupling marks an exceptional
//! point; a smooth one marks a Zeno onset without coalescence.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laplace::build_amplitude;
use crate::markovian::eigensystem;
use crate::model::{AmplitudeTrace, DecayCurve, EpReport, PeakClass, RunDirectives, SpectralDensity, SystemConfig};
use crate::timedomain::{reduce, volterra_raw, DEFAULT_STEP};

/// P₁ below this is treated as zero when taking logarithms.
pub const P1_FLOOR: f64 = 1e-14;
/// τ for rational kernels, where the amplitude is exact at any time.
pub const TAU_RATIONAL: f64 = 20000.0;
/// τ for kernels that need a time-domain solve.
pub const TAU_NUMERICAL: f64 = 200.0;
/// Samples in the long-time window. Volterra traces are cheap to sample and
/// oscillate more, so they get a denser window.
const WINDOW_SAMPLES: usize = 401;
const WINDOW_SAMPLES_DENSE: usize = 4001;
/// Allowed relative change of the long-time rate when τ doubles.
const DOUBLING_TOL: f64 = 0.02;
/// Absolute change that counts as converged whatever the rate.
const DOUBLING_FLOOR: f64 = 1e-3;
/// Refined points each side of the maximum per refinement level.
const REFINE_HALF_WIDTH: usize = 9;
const REFINE_LEVELS: usize = 2;
/// Points needed each side of the maximum by the classifier.
pub const CLASSIFIER_REACH: usize = 7;
/// Points the sweep provides each side so the jump can also be checked at twice the step.
const STABILITY_REACH: usize = 2 * CLASSIFIER_REACH;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakClassifierConfig {
    /// `None` picks [`TAU_RATIONAL`] or [`TAU_NUMERICAL`].
    pub tau: Option<f64>,
    pub window_fraction: f64,
    pub jump_threshold: f64,
    /// Coupling range; `None` picks one from the bath.
    pub range: Option<(f64, f64)>,
    pub coarse_points: usize,
    /// Fail instead of flagging when doubling τ moves the rate too much.
    pub strict: bool,
    /// Time step of the Volterra solve for non-rational kernels.
    pub step: f64,
}

impl Default for PeakClassifierConfig {
    fn default() -> Self {
        PeakClassifierConfig {
            tau: None,
            window_fraction: 0.5,
            jump_threshold: 5.0,
            range: None,
            coarse_points: 41,
            strict: false,
            step: DEFAULT_STEP,
        }
    }
}

impl PeakClassifierConfig {
    pub fn from_run(run: &RunDirectives) -> Self {
        PeakClassifierConfig {
            tau: run.tau,
            window_fraction: run.window_fraction,
            jump_threshold: run.jump_threshold,
            range: run.range,
            coarse_points: run.sweep_points,
            strict: run.strict,
            step: run.volterra_step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tau {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config("run.tau", format!("tau = {t} must be positive")));
            }
        }
        if !(self.jump_threshold.is_finite() && self.jump_threshold > 1.0) {
            return Err(Error::config("run.jump_threshold", "must exceed 1"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(Error::config("run.window_fraction", "must lie in (0, 1)"));
        }
        if let Some((lo, hi)) = self.range {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(Error::config("run.range", format!("[{lo}, {hi}] is empty or negative")));
            }
        }
        if self.coarse_points < 3 {
            return Err(Error::config("run.sweep_points", "need at least 3"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::config("run.volterra_step", "must be positive"));
        }
        Ok(())
    }

    pub fn tau_for(&self, density: &SpectralDensity) -> f64 {
        self.tau
            .unwrap_or(if density.is_rational() { TAU_RATIONAL } else { TAU_NUMERICAL })
    }
}

/// Γ_eff(t) = −ln P₁(t)/t per trace point; `None` where P₁ is below [`P1_FLOOR`].
pub fn effective_decay_rate(trace: &AmplitudeTrace) -> Result<Vec<Option<f64>>> {
    let out: Vec<Option<f64>> = trace
        .times()
        .iter()
        .zip(&trace.p1)
        .map(|(&t, &p)| {
            if t == 0.0 {
                Some(0.0)
            } else if p >= P1_FLOOR {
                Some(-p.ln() / t)
            } else {
                None
            }
        })
        .collect();
    let live = trace.times().iter().zip(&out).any(|(&t, g)| t > 0.0 && g.is_some());
    let any_positive = trace.times().iter().any(|&t| t > 0.0);
    if any_positive && !live {
        return Err(Error::DegenerateTrace(format!(
            "P1 stays below {P1_FLOOR:e} at every t > 0"
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LongTimeRate {
    pub value: f64,
    pub tau: f64,
    /// The same median taken at 2τ.
    pub doubled: f64,
    pub converged: bool,
    /// −2 max Re p over the poles, for rational kernels.
    pub asymptote: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn window(tau: f64, fraction: f64, n: usize) -> Vec<f64> {
    let (a, b) = ((tau * fraction).ln(), tau.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Γ_eff(τ) as the median over `[τ·window_fraction, τ]`, with a doubling check.
pub fn long_time_rate(system: &SystemConfig, density: &SpectralDensity, cfg: &PeakClassifierConfig) -> Result<LongTimeRate> {
    cfg.validate()?;
    let tau = cfg.tau_for(density);
    let n = if density.is_rational() { WINDOW_SAMPLES } else { WINDOW_SAMPLES_DENSE };
    let near = window(tau, cfg.window_fraction, n);
    let far = window(2.0 * tau, cfg.window_fraction, n);
    let (value, doubled, asymptote) = if density.is_rational() {
        let f = build_amplitude(system, density)?;
        let ss = f.state_space().expect("rational kernels have a state space");
        let rate = |t: f64| -2.0 * ss.log_amplitude(t) / t;
        let a = median(near.iter().map(|&t| rate(t)).collect());
        let b = median(far.iter().map(|&t| rate(t)).collect());
        (a, b, Some(f.poles()?.gamma_infinity()))
    } else {
        let (j, memory) = reduce(system, density)?;
        let sol = volterra_raw(
            j,
            system.epsilon,
            &memory,
            (system.initial_c1, system.initial_c2),
            2.0 * tau,
            cfg.step,
        )?;
        let rate = |t: f64| -> Result<f64> {
            let p = sol.at(t)?.0.norm_sqr();
            // Underflow reads as an arbitrarily fast decay.
            Ok(if p > 0.0 { -p.ln() / t } else { f64::INFINITY })
        };
        let a = median(near.iter().map(|&t| rate(t)).collect::<Result<_>>()?);
        let b = median(far.iter().map(|&t| rate(t)).collect::<Result<_>>()?);
        (a, b, None)
    };
    if !value.is_finite() {
        return Err(Error::DegenerateTrace(format!(
            "P1 underflows over most of the window at tau = {tau}; lower tau"
        )));
    }
    let change = (doubled - value).abs();
    let converged = change <= DOUBLING_TOL * value.abs() || change <= DOUBLING_FLOOR;
    if !converged && cfg.strict {
        return Err(Error::NotConverged {
            relative_change: change / value.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok(LongTimeRate {
        value,
        tau,
        doubled,
        converged,
        asymptote,
    })
}

/// Coupling range used when none is configured.
pub fn default_range(system: &SystemConfig, density: &SpectralDensity) -> (f64, f64) {
    let eps = system.epsilon.abs();
    match density {
        SpectralDensity::Markovian { .. } => (0.1, 8.0 + 2.0 * eps),
        SpectralDensity::Lorentzian { delta_c, .. } => (0.2, 3.0 + eps + delta_c.abs()),
        _ => (0.0, 3.0 + eps),
    }
}

/// Evaluate in parallel, keeping order.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    if threads <= 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<U>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

/// Every swept point with its long-time rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub coupling: f64,
    pub rate: LongTimeRate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub curve: DecayCurve,
    pub points: Vec<SweepPoint>,
    /// Couplings whose rate failed the doubling check.
    pub unconverged: Vec<f64>,
    /// Spacing of the finest level.
    pub resolution: f64,
}

/// Γ_eff(τ) over the coupling range, refined three-fold twice around the maximum.
pub fn sweep(system: &SystemConfig, density: &SpectralDensity, cfg: &PeakClassifierConfig) -> Result<Sweep> {
    cfg.validate()?;
    density.coupling().ok_or_else(|| {
        Error::Unsupported("a tabulated density has no coupling to sweep".into())
    })?;
    let (lo, hi) = cfg.range.unwrap_or_else(|| default_range(system, density));
    let n = cfg.coarse_points;
    let mut step = (hi - lo) / (n - 1) as f64;
    let coarse: Vec<f64> = (0..n).map(|k| if k == n - 1 { hi } else { lo + k as f64 * step }).collect();
    let eval = |xs: &[f64]| -> Result<Vec<SweepPoint>> {
        par_map(xs, |&x| {
            let d = density.with_coupling(x)?;
            Ok(SweepPoint {
                coupling: x,
                rate: long_time_rate(system, &d, cfg)?,
            })
        })
        .into_iter()
        .collect()
    };
    let mut points = eval(&coarse)?;
    let argmax = |pts: &[SweepPoint]| {
        pts.iter()
            .enumerate()
            .max_by(|a, b| a.1.rate.value.total_cmp(&b.1.rate.value))
            .map(|(k, _)| k)
            .expect("sweep has points")
    };
    let refine = |pts: &mut Vec<SweepPoint>, centre: f64, h: f64, half: usize| -> Result<()> {
        let fresh: Vec<f64> = (-(half as i64)..=half as i64)
            .map(|k| centre + k as f64 * h)
            .filter(|&x| x >= lo - 1e-12 && x <= hi + 1e-12)
            .map(|x| x.clamp(lo, hi))
            .filter(|x| !pts.iter().any(|p| (p.coupling - x).abs() < 1e-9 * h))
            .collect();
        pts.extend(eval(&fresh)?);
        pts.sort_by(|a, b| a.coupling.total_cmp(&b.coupling));
        Ok(())
    };
    for _ in 0..REFINE_LEVELS {
        step /= 3.0;
        let centre = points[argmax(&points)].coupling;
        refine(&mut points, centre, step, REFINE_HALF_WIDTH)?;
    }
    // Recentre until the maximum has a full uniform neighbourhood (or hits the range edge).
    for _ in 0..6 {
        let k = argmax(&points);
        let x = points[k].coupling;
        let uniform_reach = |dir: i64| {
            let mut m = 0;
            while m < STABILITY_REACH {
                let idx = k as i64 + dir * (m as i64 + 1);
                if idx < 0 || idx >= points.len() as i64 {
                    break;
                }
                let want = x + dir as f64 * (m + 1) as f64 * step;
                if (points[idx as usize].coupling - want).abs() > 1e-6 * step {
                    break;
                }
                m += 1;
            }
            m
        };
        let edge = k == 0 || k == points.len() - 1;
        if edge || (uniform_reach(-1) >= STABILITY_REACH && uniform_reach(1) >= STABILITY_REACH) {
            break;
        }
        refine(&mut points, x, step, STABILITY_REACH)?;
    }
    let unconverged = points.iter().filter(|p| !p.rate.converged).map(|p| p.coupling).collect();
    let tau = cfg.tau_for(density);
    let curve = DecayCurve::new(
        points.iter().map(|p| p.coupling).collect(),
        points.iter().map(|p| p.rate.value).collect(),
        tau,
    );
    Ok(Sweep {
        curve,
        points,
        unconverged,
        resolution: step,
    })
}

/// Sharp, smooth, at the left edge, or absent.
pub fn classify_peak(curve: &DecayCurve, cfg: &PeakClassifierConfig) -> Result<EpReport> {
    let x = &curve.coupling_grid;
    let f = &curve.gamma_eff_tau;
    let n = x.len();
    if n < 3 || f.len() != n {
        return Err(Error::Precondition(format!("curve has {n} points")));
    }
    let k = f
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::Precondition("curve has no finite values".into()))?;
    let spacing = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let report = |class, jump, ratio, h| EpReport {
        peak_coupling: x[k],
        peak_value: f[k],
        classification: class,
        derivative_jump: jump,
        jump_ratio: ratio,
        jump_threshold: cfg.jump_threshold,
        grid_resolution: h,
        cross_check: None,
        tau: curve.tau_used,
        provenance: String::new(),
    };
    let (fmin, fmax) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if fmax - fmin <= 1e-12 * fmax.abs().max(1.0) {
        return Ok(report(PeakClass::NoPeak, 0.0, 0.0, spacing));
    }
    if k == 0 {
        return Ok(report(PeakClass::MonotoneDecreasing, 0.0, 0.0, spacing));
    }
    if k == n - 1 {
        return Ok(report(PeakClass::NoPeak, 0.0, 0.0, spacing));
    }
    let h = (x[k] - x[k - 1]).min(x[k + 1] - x[k]);
    // Evenly spaced points each side of the maximum, up to `limit`.
    let even = |dir: i64, limit: usize| {
        (1..=limit as i64)
            .take_while(|&m| {
                let idx = k as i64 + dir * m;
                idx >= 0
                    && (idx as usize) < n
                    && (x[idx as usize] - (x[k] + (dir * m) as f64 * h)).abs() <= 1e-6 * h
                    && f[idx as usize].is_finite()
            })
            .count()
    };
    let reach = even(-1, STABILITY_REACH).min(even(1, STABILITY_REACH));
    if reach < CLASSIFIER_REACH {
        return Err(Error::Precondition(format!(
            "the maximum at {} needs {CLASSIFIER_REACH} evenly spaced points each side; refine the sweep",
            x[k]
        )));
    }
    let (jump, ratio) = kink_ratio(f, k, h, 1);
    let mut sharp = ratio > cfg.jump_threshold;
    if reach >= STABILITY_REACH {
        // A true kink only grows more pronounced on the finer grid.
        sharp &= kink_ratio(f, k, h, 2).1 > cfg.jump_threshold;
    }
    let class = if sharp { PeakClass::SharpPeak } else { PeakClass::SmoothPeak };
    Ok(report(class, jump, ratio, h))
}

/// Slope jump across the maximum at index `k`, and its ratio to the neighbouring
/// curvature scale, on the sub-grid of every `stride`-th point.
fn kink_ratio(f: &[f64], k: usize, h: f64, stride: usize) -> (f64, f64) {
    let hs = h * stride as f64;
    let kink = |d: i64| {
        let i = k as i64 + d * stride as i64;
        let s = stride as i64;
        let at = |j: i64| f[j as usize];
        ((at(i + s) - 2.0 * at(i) + at(i - s)) / hs).abs()
    };
    let reach = CLASSIFIER_REACH as i64;
    let jump = (-1..=1).map(kink).fold(0.0, f64::max);
    let scale = median((2..reach).flat_map(|d| [kink(-d), kink(d)]).collect());
    let ratio = if scale > 0.0 { jump / scale } else if jump > 0.0 { f64::INFINITY } else { 0.0 };
    (jump, ratio)
}

/// Maximiser of the pole asymptote −2 max Re p over `[lo, hi]` (rational kernels).
pub fn pole_peak(system: &SystemConfig, density: &SpectralDensity, lo: f64, hi: f64) -> Result<f64> {
    if !density.is_rational() {
        return Err(Error::Unsupported("pole asymptotes need a rational kernel".into()));
    }
    let rate = |x: f64| -> Result<f64> {
        let d = density.with_coupling(x)?;
        Ok(build_amplitude(system, &d)?.poles()?.gamma_infinity())
    };
    let n = 400;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| rate(x)).collect::<Result<_>>()?;
    let k = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("nonempty scan");
    let (mut a, mut b) = (xs[k.saturating_sub(1)], xs[(k + 1).min(n)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (rate(c)?, rate(d)?);
    while b - a > 1e-10 * (1.0 + b.abs()) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rate(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rate(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sweep, classify, and cross-check against the poles when possible.
pub fn analyse(system: &SystemConfig, density: &SpectralDensity, cfg: &PeakClassifierConfig) -> Result<(Sweep, EpReport)> {
    let s = sweep(system, density, cfg)?;
    let mut report = classify_peak(&s.curve, cfg)?;
    let x = &s.curve.coupling_grid;
    let engine = if density.is_rational() {
        report.cross_check = Some(pole_peak(system, density, x[0], x[x.len() - 1])?);
        "state-space exponential"
    } else {
        "Volterra product integration"
    };
    report.provenance = format!(
        "median of Gamma_eff over [{:.4}, {:.4}] by {engine}; {} of {} points failed the doubling check",
        cfg.window_fraction * report.tau,
        report.tau,
        s.unconverged.len(),
        x.len()
    );
    Ok((s, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocusParameter {
    LorentzianWidth,
    Epsilon,
    DetuningDeltaC,
}

impl LocusParameter {
    fn apply(self, system: &SystemConfig, density: &SpectralDensity, v: f64) -> Result<(SystemConfig, SpectralDensity)> {
        let mut sys = system.clone();
        let mut d = density.clone();
        match (self, &mut d) {
            (LocusParameter::Epsilon, _) => {
                sys.epsilon = v;
                sys.energies = None;
            }
            (LocusParameter::LorentzianWidth, SpectralDensity::Lorentzian { gamma, .. }) => *gamma = v,
            (LocusParameter::DetuningDeltaC, SpectralDensity::Lorentzian { delta_c, .. }) => *delta_c = v,
            (p, other) => {
                return Err(Error::Unsupported(format!("{p:?} is not a parameter of a {} bath", other.kind())))
            }
        }
        sys.validate()?;
        d.validate()?;
        Ok((sys, d))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocusPoint {
    pub param: f64,
    /// NaN where the slice has no sharp peak.
    pub g_ep: f64,
    pub err: f64,
    pub classification: Option<PeakClass>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpLocus {
    pub parameter: LocusParameter,
    pub points: Vec<LocusPoint>,
    pub gaps: usize,
    /// g_EP strictly increasing over the non-gap points.
    pub increasing: bool,
}

/// The pole maximiser when it sits within a grid step of the sweep peak.
/// Plateaus in a locus drawn at grid resolution hide its trend otherwise.
fn refined(r: &EpReport) -> f64 {
    match r.cross_check {
        Some(x) if (x - r.peak_coupling).abs() <= r.grid_resolution => x,
        _ => r.peak_coupling,
    }
}

/// g_EP for each parameter value; slices without a sharp peak become gaps.
pub fn trace_ep_locus(
    system: &SystemConfig,
    density: &SpectralDensity,
    parameter: LocusParameter,
    values: &[f64],
    cfg: &PeakClassifierConfig,
) -> Result<EpLocus> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(values.len());
    for &v in values {
        let (sys, d) = parameter.apply(system, density, v)?;
        let mut slice_cfg = cfg.clone();
        let mut outcome = analyse(&sys, &d, &slice_cfg);
        // A maximum pinned at the right edge means the range is too short.
        for _ in 0..3 {
            match &outcome {
                Ok((_, r)) if r.classification == PeakClass::NoPeak => {
                    let (lo, hi) = slice_cfg.range.unwrap_or_else(|| default_range(&sys, &d));
                    slice_cfg.range = Some((lo, 2.0 * hi));
                    outcome = analyse(&sys, &d, &slice_cfg);
                }
                _ => break,
            }
        }
        points.push(match outcome {
            Ok((_, r)) if r.classification == PeakClass::SharpPeak => LocusPoint {
                param: v,
                g_ep: refined(&r),
                err: r.grid_resolution,
                classification: Some(r.classification),
                note: None,
            },
            Ok((_, r)) => LocusPoint {
                param: v,
                g_ep: f64::NAN,
                err: f64::NAN,
                classification: Some(r.classification),
                note: Some(format!("{:?} at {}", r.classification, r.peak_coupling)),
            },
            Err(e) => LocusPoint {
                param: v,
                g_ep: f64::NAN,
                err: f64::NAN,
                classification: None,
                note: Some(e.to_string()),
            },
        });
    }
    let found: Vec<f64> = points.iter().map(|p| p.g_ep).filter(|g| g.is_finite()).collect();
    Ok(EpLocus {
        parameter,
        gaps: points.len() - found.len(),
        increasing: found.windows(2).all(|w| w[1] > w[0]),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceSample {
    pub gamma_tilde: f64,
    pub epsilon: f64,
    pub lambda3: Complex64,
    pub lambda4: Complex64,
    /// Im λ₃ and Im λ₄ agree to [`COALESCENCE_TOL`].
    pub coalesced: bool,
}

pub const COALESCENCE_TOL: f64 = 1e-9;

/// Im λ₃,₄ over a (γ̃, ε) grid, row-major in γ̃.
pub fn im_eigenvalue_surface(system: &SystemConfig, gamma_grid: &[f64], epsilon_grid: &[f64]) -> Result<Vec<SurfaceSample>> {
    system.validate()?;
    let mut out = Vec::with_capacity(gamma_grid.len() * epsilon_grid.len());
    for &g in gamma_grid {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::config("grid.gamma_tilde", format!("{g} must be nonnegative")));
        }
        for &e in epsilon_grid {
            let mut sys = system.clone();
            sys.epsilon = e;
            sys.energies = None;
            let es = eigensystem(&sys, g);
            out.push(SurfaceSample {
                gamma_tilde: g,
                epsilon: e,
                lambda3: es.lambda3,
                lambda4: es.lambda4,
                coalesced: (es.lambda3.im - es.lambda4.im).abs() <= COALESCENCE_TOL * (1.0 + g),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Method, TimeGrid};

    #[test]
    fn rate_of_degenerate_decay() {
        let grid = TimeGrid::uniform(0.0, 10.0, 11).unwrap();
        let c1 = grid
            .points()
            .iter()
            .map(|&t| Complex64::new((-t).exp() * (1.0 + t), 0.0))
            .collect();
        let tr = AmplitudeTrace::new(grid.clone(), c1, Method::ClosedForm);
        let g = effective_decay_rate(&tr).unwrap();
        for (&t, v) in grid.points().iter().zip(&g) {
            let want = if t == 0.0 { 0.0 } else { 2.0 - 2.0 * (1.0 + t).ln() / t };
            assert!((v.unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn all_masked_is_an_error() {
        let grid = TimeGrid::uniform(1.0, 2.0, 3).unwrap();
        let tr = AmplitudeTrace::new(grid, vec![Complex64::new(0.0, 0.0); 3], Method::ClosedForm);
        assert!(matches!(effective_decay_rate(&tr), Err(Error::DegenerateTrace(_))));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn kink_is_sharp_and_parabola_is_smooth() {
        let cfg = PeakClassifierConfig::default();
        let x: Vec<f64> = (0..41).map(|k| 1.0 + 0.01 * k as f64).collect();
        let tent: Vec<f64> = x.iter().map(|&v| 1.0 - (v - 1.203).abs() - 0.1 * (v - 1.2).powi(2)).collect();
        let bump: Vec<f64> = x.iter().map(|&v| 1.0 - (v - 1.203).powi(2)).collect();
        let r = classify_peak(&DecayCurve::new(x.clone(), tent, 1.0), &cfg).unwrap();
        assert_eq!(r.classification, PeakClass::SharpPeak);
        let r = classify_peak(&DecayCurve::new(x, bump, 1.0), &cfg).unwrap();
        assert_eq!(r.classification, PeakClass::SmoothPeak);
    }

    #[test]
    fn edges() {
        let cfg = PeakClassifierConfig::default();
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let up: Vec<f64> = x.clone();
        assert_eq!(
            classify_peak(&DecayCurve::new(x.clone(), down, 1.0), &cfg).unwrap().classification,
            PeakClass::MonotoneDecreasing
        );
        assert_eq!(
            classify_peak(&DecayCurve::new(x, up, 1.0), &cfg).unwrap().classification,
            PeakClass::NoPeak
        );
    }

    #[test]
    fn sparse_peak_needs_refinement() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let f = vec![0.0, 1.0, 2.0, 1.0, 0.0];
        let e = classify_peak(&DecayCurve::new(x, f, 1.0), &PeakClassifierConfig::default());
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn no_bath_no_decay() {
        let r = long_time_rate(
            &SystemConfig::new(1.0, 0.0),
            &SpectralDensity::Markovian { gamma_tilde: 0.0 },
            &PeakClassifierConfig::default(),
        )
        .unwrap();
        assert!(r.value.abs() < 5e-3, "{}", r.value);
    }
}
