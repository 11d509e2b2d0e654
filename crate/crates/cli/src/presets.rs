//! Parameter sets of the published figures, runnable with `--figure`.

use qzeno::analysis::LocusParameter;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Simulate,
    Sweep,
    EpLocus,
    Eigen,
}

impl Kind {
    pub fn command(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Sweep => "sweep",
            Kind::EpLocus => "ep-locus",
            Kind::Eigen => "eigen",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub label: String,
    pub config: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub kind: Kind,
    pub title: &'static str,
    pub members: Vec<Member>,
    /// Locus parameter and its values.
    pub locus: Option<(LocusParameter, Vec<f64>)>,
    /// Eigenvalue grid: γ̃ values, ε values.
    pub grid: Option<(Vec<f64>, Vec<f64>)>,
}

pub const IDS: [&str; 18] = [
    "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b", "5c", "5d", "5e", "5f", "6a", "6b", "6c", "7a", "7b", "7c",
];

fn member(label: impl Into<String>, config: String) -> Member {
    Member {
        label: label.into(),
        config,
    }
}

fn markovian(eps: f64, gamma_tilde: f64, tmax: f64) -> String {
    format!(
        "[system]\nJ = 1.0\nepsilon = {eps:?}\n\n[bath]\ntype = \"markovian\"\ngamma_tilde = {gamma_tilde:?}\n\n[run]\ntmax = {tmax:?}\npoints = 401\n"
    )
}

fn lorentzian(eps: f64, g: f64, gamma: f64, delta_c: f64, tmax: f64) -> String {
    format!(
        "[system]\nJ = 1.0\nepsilon = {eps:?}\n\n[bath]\ntype = \"lorentzian\"\ng = {g:?}\ngamma = {gamma:?}\ndelta_c = {delta_c:?}\n\n[run]\ntmax = {tmax:?}\npoints = 401\n"
    )
}

fn ohmic(eps: f64, s: f64, omega_c: f64) -> String {
    format!(
        "[system]\nJ = 1.0\nepsilon = {eps:?}\n\n[bath]\ntype = \"ohmic\"\ng = 1.0\nS = {s:?}\nomega_c = {omega_c:?}\nomega_eg = 6.0\n"
    )
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn simple(id: &'static str, kind: Kind, title: &'static str, members: Vec<Member>) -> Preset {
    Preset {
        id,
        kind,
        title,
        members,
        locus: None,
        grid: None,
    }
}

/// The preset called `id` (with or without a `fig` prefix).
pub fn get(id: &str) -> Option<Preset> {
    let id = id.trim().trim_start_matches("fig").trim_start_matches('.');
    let sid: &'static str = IDS.iter().copied().find(|&x| x == id)?;
    let p = match sid {
        "2a" => Preset {
            grid: Some((linspace(0.0, 8.0, 161), vec![0.0, 0.5, -2.0])),
            ..simple(
            sid,
            Kind::Eigen, "Im λ3,4 against γ̃ for several ε", vec![member("eigen", markovian(0.0, 0.0, 20.0))])
        },
        "2b" => Preset {
            grid: Some((linspace(0.0, 8.0, 81), linspace(-3.0, 3.0, 61))),
            ..simple(
            sid,
            Kind::Eigen, "Im λ3,4 over the (ε, γ̃) plane", vec![member("eigen", markovian(0.0, 0.0, 20.0))])
        },
        "3a" | "3b" => simple(
            sid,
            Kind::Simulate,
            "Markovian P1(t) and Γ_eff(t) across the exceptional point",
            [1.0, 2.0, 4.0, 8.0]
                .iter()
                .map(|&g| member(format!("gtilde{g}"), markovian(0.0, g, 20.0)))
                .collect(),
        ),
        "4a" | "4b" => simple(
            sid,
            Kind::Sweep,
            "Markovian Γ_eff(τ) against γ̃ for ε = 0, 0.5, 2, 5",
            [0.0, 0.5, 2.0, 5.0]
                .iter()
                .map(|&e| member(format!("eps{e}"), markovian(e, 1.0, 20.0)))
                .collect(),
        ),
        "5a" | "5b" | "5c" => {
            let g = match sid {
                "5a" => 1.0,
                "5b" => 1.3,
                _ => 1.41,
            };
            simple(
                sid,
                Kind::Simulate,
                "Lorentzian Γ_eff(t), γ = 0.5, Δc = 0, ε = 0",
                vec![member(format!("g{g}"), lorentzian(0.0, g, 0.5, 0.0, 40.0))],
            )
        }
        "5d" => simple(
            sid,
            Kind::Sweep,
            "Lorentzian Γ_eff(τ) against g for several widths",
            [0.1, 0.5, 1.0, 2.0]
                .iter()
                .map(|&w| member(format!("gamma{w}"), lorentzian(0.0, 1.0, w, 0.0, 20.0)))
                .collect(),
        ),
        "5e" => Preset {
            locus: Some((LocusParameter::LorentzianWidth, linspace(0.1, 2.0, 20))),
            ..simple(
            sid,
            Kind::EpLocus, "g_EP against the Lorentzian width", vec![member("locus", lorentzian(0.0, 1.0, 0.5, 0.0, 20.0))])
        },
        "5f" => simple(
            sid,
            Kind::Sweep,
            "Lorentzian Γ_eff(τ) against g for several Δc",
            [0.0, 0.5, 2.0]
                .iter()
                .map(|&d| member(format!("deltac{d}"), lorentzian(0.0, 1.0, 0.5, d, 20.0)))
                .collect(),
        ),
        "6a" | "6b" => simple(
            sid,
            Kind::Sweep,
            "Lorentzian Γ_eff(τ) against g for ε = 0, 1, 3, 5",
            [0.0, 1.0, 3.0, 5.0]
                .iter()
                .map(|&e| member(format!("eps{e}"), lorentzian(e, 1.0, 0.5, 0.0, 20.0)))
                .collect(),
        ),
        "6c" => Preset {
            locus: Some((LocusParameter::Epsilon, linspace(0.0, 5.0, 11))),
            ..simple(
            sid,
            Kind::EpLocus, "g_EP against ε", vec![member("locus", lorentzian(0.0, 1.0, 0.5, 0.0, 20.0))])
        },
        "7a" => simple(
            sid,
            Kind::Sweep,
            "Ohmic Γ_eff(τ) against g for S = 1, 2, 3",
            [1.0, 2.0, 3.0].iter().map(|&s| member(format!("S{s}"), ohmic(0.0, s, 1.0))).collect(),
        ),
        "7b" => simple(
            sid,
            Kind::Sweep,
            "Ohmic Γ_eff(τ) against g for ωc = 1, 1.3, 1.8",
            [1.0, 1.3, 1.8]
                .iter()
                .map(|&w| member(format!("omegac{w}"), ohmic(0.0, 2.0, w)))
                .collect(),
        ),
        "7c" => simple(
            sid,
            Kind::Sweep,
            "Ohmic Γ_eff(τ) against g for ε = 0, 0.5, 1.5",
            [0.0, 0.5, 1.5].iter().map(|&e| member(format!("eps{e}"), ohmic(e, 2.0, 1.0))).collect(),
        ),
        _ => return None,
    };
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for id in IDS {
            let p = get(id).unwrap_or_else(|| panic!("{id}"));
            for m in &p.members {
                qzeno::model::parse_config(&m.config).unwrap_or_else(|e| panic!("{id}/{}: {e}", m.label));
            }
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(get("9z").is_none());
    }
}
