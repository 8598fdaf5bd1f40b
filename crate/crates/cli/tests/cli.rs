use std::path::Path;
use std::process::{Command, Output};

const SCENE: &str = r#"
[scene]
seed = 3

[scene.spec]
width = 48
height = 48
boundary_softness = 1.0

[[scene.spec.regions]]
polygon = [[0, 0], [16, 0], [16, 48], [0, 48]]
texture = { kind = "ripple", level = 0.5, amplitude = 0.3, wavelength = 5, noise = 0.02 }

[[scene.spec.regions]]
polygon = [[16, 0], [32, 0], [32, 48], [16, 48]]
texture = { kind = "flat", level = 0.3, noise = 0.03 }

[[scene.spec.regions]]
polygon = [[32, 0], [48, 0], [48, 48], [32, 48]]
texture = { kind = "noise-speckle", level = 0.4, looks = 3 }

[superpixels]
target_count = 40

[[features]]
name = "mean"
params = { window = 5 }

[[features]]
name = "variance"
params = { window = 5 }

[[features]]
name = "gabor"
params = { frequency = 0.2, sigma = 1.5 }

[[features]]
name = "intensity"

[solver]
clusters = 3
max_iters = 100

[selection]
n_seeds = 2
"#;

fn pflicm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pflicm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("output = \"out\"\n{SCENE}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fit_writes_maps_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = pflicm(&["fit", "--config", &config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let outdir = dir.path().join("out");
    for c in 0..3 {
        for kind in ["membership", "typicality", "product"] {
            assert!(outdir.join(format!("{kind}_{c}.png")).is_file(), "{kind}_{c}");
        }
    }
    assert!(!outdir.join("membership_3.png").exists());
    let summary = json(outdir.join("summary.json"));
    assert_eq!(summary["algorithm"], "pflicm");
    assert_eq!(summary["centers"].as_array().unwrap().len(), 3);
    assert_eq!(summary["scores"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("fit: wrote"));
}

#[test]
fn select_scores_every_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = pflicm(&["select", "--config", &config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = json(dir.path().join("out/trace.json"));
    assert_eq!(trace["steps"].as_array().unwrap().len(), 4 + 3 + 2 + 1);
    assert_eq!(trace["chosen_path"].as_array().unwrap().len(), 4);
    let progression = std::fs::read_to_string(dir.path().join("out/progression.csv")).unwrap();
    assert_eq!(progression.lines().count(), 1 + 4);
}

#[test]
fn unknown_feature_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let text = std::fs::read_to_string(&config).unwrap() + "\n[[features]]\nname = \"wavelet\"\n";
    std::fs::write(&config, text).unwrap();
    let out = pflicm(&["fit", "--config", &config]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelet"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = pflicm(&[
        "fit",
        "--input",
        dir.path().join("nope.png").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: load stage failed"));
    assert!(!out_dir.exists());
}

#[test]
fn overrides_and_manifest_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let first = dir.path().join("first");
    let out = pflicm(&["fit", "--config", &config, "--out", first.to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("out").exists());
    let manifest = json(first.join("manifest.json"));
    assert_eq!(manifest["seeds"], serde_json::json!([7]));
    assert_eq!(manifest["config"]["solver"]["seed"], 7);

    let second = dir.path().join("second");
    let out = pflicm(&[
        "run",
        "--config",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["partition.json", "summary.json", "scores.csv", "membership_0.png", "labels.png"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn features_mode_dumps_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = pflicm(&["features", "--config", &config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/features.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for name in ["mean", "variance", "gabor", "intensity"] {
        assert!(header.contains(name), "{header}");
    }
}
