use num_complex::Complex64;
use proptest::prelude::*;
use qzeno::model::{parse_config, parse_config_with, parse_tabulated_csv, Engine, SpectralDensity, Topology};
use qzeno::Error;

fn field_of(e: Error) -> String {
    match e {
        Error::Config { field, .. } => field,
        other => panic!("not a config error: {other}"),
    }
}

#[test]
fn defaults_fill_in() {
    let cfg = parse_config("[system]\n[bath]\ntype = \"markovian\"\ngamma_tilde = 2.0\n").unwrap();
    assert_eq!(cfg.system.coupling_j, 1.0);
    assert_eq!(cfg.system.epsilon, 0.0);
    assert_eq!(cfg.system.initial_c1, Complex64::new(1.0, 0.0));
    assert_eq!(cfg.run.engine, Engine::Talbot);
    assert_eq!(cfg.run.tmax, 20.0);
    assert_eq!(cfg.run.bath_modes, 2000);

    let ohmic = parse_config("[system]\n[bath]\ntype = \"ohmic\"\ng = 1.0\nS = 2.0\nomega_c = 1.0\nomega_eg = 6.0\n").unwrap();
    assert_eq!(ohmic.run.engine, Engine::Fourier);
}

#[test]
fn coupling_is_scaled_out() {
    let cfg = parse_config(
        "[system]\nJ = 2.0\nepsilon = 1.0\n[bath]\ntype = \"lorentzian\"\ng = 2.0\ngamma = 1.0\ndelta_c = 0.5\n[run]\ntmax = 10.0\n",
    )
    .unwrap();
    assert_eq!(cfg.system.coupling_j, 1.0);
    assert_eq!(cfg.system.epsilon, 0.5);
    assert_eq!(cfg.density, SpectralDensity::Lorentzian { g: 1.0, gamma: 0.5, delta_c: 0.25 });
    assert_eq!(cfg.run.tmax, 20.0);
}

#[test]
fn bad_fields_are_named() {
    let cases = [
        ("[system]\nJ = -1.0\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n", "system.J"),
        ("[system]\n[bath]\ntype = \"markovian\"\n", "bath.gamma_tilde"),
        ("[system]\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\ng = 1.0\n", "bath.g"),
        ("[system]\n[bath]\ntype = \"cauchy\"\n", "bath.type"),
        ("[system]\nc1_0 = [0.5, 0.0]\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n", "system.c1_0"),
        ("[system]\n[bath]\ntype = \"lorentzian\"\ng = 1.0\ngamma = -0.5\n", "bath.gamma"),
        ("[system]\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n[run]\npoints = 0\n", "run.points"),
        ("[system]\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n[run]\nrange = [2.0, 2.0]\n", "run.range"),
        (
            "[system]\nn_qubits = 3\nc1_0 = [0.0, 0.0]\nc2_0 = [1.0, 0.0]\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n",
            "system.c2_0",
        ),
    ];
    for (text, field) in cases {
        let e = parse_config(text).expect_err(field);
        assert!(field_of(e).starts_with(field), "{field}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let e = parse_config("[system]\nJJ = 1.0\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n").unwrap_err();
    assert!(e.to_string().contains("JJ"), "{e}");
}

#[test]
fn tabulated_from_file_and_inline() {
    let csv = "omega,J\n5.0,0.0\n6.0,0.2\n7.0,0.0\n";
    let inline = parse_config(
        "[system]\n[bath]\ntype = \"tabulated\"\nomega_eg_prime = 6.0\nsamples = [[5.0, 0.0], [6.0, 0.2], [7.0, 0.0]]\n",
    )
    .unwrap();
    let text = "[system]\n[bath]\ntype = \"tabulated\"\nomega_eg_prime = 6.0\nfile = \"j.csv\"\n";
    let loaded = parse_config_with(text, &|p: &str| {
        assert_eq!(p, "j.csv");
        Ok(csv.to_string())
    })
    .unwrap();
    assert_eq!(inline.density, loaded.density);
    assert!(parse_config(text).is_err());
}

#[test]
fn tabulated_csv_rules() {
    assert_eq!(parse_tabulated_csv("1,0.5\n2,0.25\n").unwrap(), vec![(1.0, 0.5), (2.0, 0.25)]);
    assert!(parse_tabulated_csv("omega,J\n").is_err());
    assert!(parse_tabulated_csv("omega,J\n1,x\n").is_err());
    assert!(parse_tabulated_csv("omega,J\n1,0.5,3\n").is_err());
}

#[test]
fn example_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).unwrap();
            let base = path.parent().unwrap().to_path_buf();
            parse_config_with(&text, &|p: &str| {
                std::fs::read_to_string(base.join(p)).map_err(|e| Error::Precondition(e.to_string()))
            })
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

fn bath() -> impl Strategy<Value = String> {
    prop_oneof![
        (0.0..50.0f64).prop_map(|g| format!("type = \"markovian\"\ngamma_tilde = {g:?}\n")),
        (0.01..5.0f64, 0.01..5.0f64, -5.0..5.0f64).prop_map(|(g, w, d)| format!(
            "type = \"lorentzian\"\ng = {g:?}\ngamma = {w:?}\ndelta_c = {d:?}\n"
        )),
        (0.01..5.0f64, 0.2..4.0f64, 0.1..5.0f64, 0.5..10.0f64).prop_map(|(g, s, w, e)| format!(
            "type = \"ohmic\"\ng = {g:?}\nS = {s:?}\nomega_c = {w:?}\nomega_eg = {e:?}\n"
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn echo_reparses_to_the_same_run(
        j in 0.1..10.0f64,
        eps in -5.0..5.0f64,
        theta in 0.0..std::f64::consts::FRAC_PI_2,
        bath in bath(),
        tmax in 0.5..100.0f64,
        points in 1usize..2000,
        common in any::<bool>(),
        n in 1u32..6,
    ) {
        let (c1, c2) = if n > 1 { ((1.0, 0.0), (0.0, 0.0)) } else { ((theta.cos(), 0.0), (0.0, theta.sin())) };
        let topo = if common { "common" } else { "separate" };
        let text = format!(
            "[system]\nJ = {j:?}\nepsilon = {eps:?}\nc1_0 = [{:?}, {:?}]\nc2_0 = [{:?}, {:?}]\nn_qubits = {n}\ntopology = \"{topo}\"\n\n[bath]\n{bath}\n[run]\ntmax = {tmax:?}\npoints = {points}\n",
            c1.0, c1.1, c2.0, c2.1
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.system.topology, if common { Topology::CommonBath } else { Topology::SeparateBaths });
        let again = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.to_toml(), cfg.to_toml());
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        let _ = parse_config(&s);
        let _ = parse_tabulated_csv(&s);
    }
}
