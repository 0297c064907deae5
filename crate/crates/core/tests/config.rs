use haar_concentration::experiments::{ExperimentConfig, ExperimentKind};
use proptest::prelude::*;
use serde_json::{json, Value};

fn kind_name(k: ExperimentKind) -> &'static str {
    k.name()
}

fn arb_config() -> impl Strategy<Value = Value> {
    let kind = prop_oneof![
        Just(ExperimentKind::Matrix),
        Just(ExperimentKind::FiniteGroup),
        Just(ExperimentKind::IdentitySuite),
        Just(ExperimentKind::Scaling),
    ];
    (
        kind,
        any::<u64>(),
        proptest::option::of(1usize..5000),
        proptest::option::of(proptest::collection::vec(-2.0f64..2.0, 1..6)),
        proptest::option::of(0.1f64..10.0),
        any::<bool>(),
        0usize..3,
    )
        .prop_map(|(kind, seed, reps, x_grid, kappa, flag, spectrum)| {
            let mut m = serde_json::Map::new();
            m.insert("kind".into(), json!(kind_name(kind)));
            m.insert("seed".into(), json!(seed));
            let n = match kind {
                ExperimentKind::FiniteGroup => 5,
                ExperimentKind::IdentitySuite => 3,
                _ => 4,
            };
            if kind == ExperimentKind::Scaling {
                m.insert("n_grid".into(), json!([4]));
            } else {
                m.insert("n".into(), json!(n));
            }
            if let Some(r) = reps {
                m.insert("replicates".into(), json!(r));
            }
            if let Some(x) = x_grid {
                m.insert("x_grid".into(), json!(x));
            }
            if let Some(k) = kappa {
                m.insert("kappa".into(), json!(k));
            }
            if flag && kind == ExperimentKind::Matrix {
                m.insert("step_check".into(), json!(true));
            }
            if flag && kind == ExperimentKind::Scaling {
                m.insert("reduced_form".into(), json!(true));
            }
            let spec = match spectrum {
                0 => json!("uniform_grid"),
                1 => json!(vec![0.5; n]),
                _ => json!("gaussian"),
            };
            m.insert("spectrum_M".into(), spec);
            Value::Object(m)
        })
}

proptest! {
    #[test]
    fn parse_emit_round_trip(doc in arb_config()) {
        let cfg = ExperimentConfig::from_json_str(&doc.to_string()).unwrap();
        let emitted = cfg.to_json_string();
        let again = ExperimentConfig::from_json_str(&emitted).unwrap();
        prop_assert_eq!(&again, &cfg);
        // the canonical form is a fixed point
        prop_assert_eq!(again.to_json_string(), emitted);
    }
}

#[test]
fn bad_configs_name_their_key() {
    let cases = [
        (r#"{"kind":"matrix","n":4,"seed":1,"spectrum_N":[1,2]}"#, "spectrum_N"),
        (r#"{"kind":"matrix","n":4,"seed":1,"spectrum_M":"triangle"}"#, "spectrum_M"),
        (r#"{"kind":"matrix","n":4,"seed":1,"replicates":0}"#, "replicates"),
        (r#"{"kind":"finite-group","n":9,"seed":1}"#, "n"),
        (r#"{"kind":"scaling","n_grid":[],"seed":1}"#, "n_grid"),
        (r#"{"kind":"scaling","n_grid":[8,16],"seed":1,"spectrum_M":[1,1,1,1,1,1,1,1]}"#, "spectrum_M"),
        (r#"{"kind":"matrix","n":4,"seed":1,"kappa":-1}"#, "kappa"),
        (r#"{"kind":"matrix","n":4,"seed":1,"t_grid":[-0.1]}"#, "t_grid"),
        (r#"{"kind":"identity-suite","n":4,"seed":1,"step_check":true}"#, "step_check"),
        (r#"{"kind":"cube","n":4,"seed":1}"#, "kind"),
    ];
    for (text, key) in cases {
        let err = ExperimentConfig::from_json_str(text).unwrap_err().to_string();
        assert!(err.contains(key), "{text}: {err}");
    }
}

#[test]
fn parse_config_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"kind":"identity-suite","n":4,"seed":7}"#).unwrap();
    let cfg = haar_concentration::experiments::parse_config(&path).unwrap();
    assert_eq!(cfg.replicates, 50);
    assert!(haar_concentration::experiments::parse_config(&dir.path().join("missing.json")).is_err());
}
