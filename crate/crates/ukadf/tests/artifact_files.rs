//! Artifact files written and read through the filesystem.

use tempfile::TempDir;
use ukadf::artifact_io::{load_artifact, save_artifact};
use ukadf::core_lib::artifact::{ArtifactMetadata, PretrainedArtifact};
use ukadf::core_lib::data::{synth_generate, SynthConfig};
use ukadf::core_lib::train::{run_pretrain, RunConfig};

fn trained() -> PretrainedArtifact {
    let data = synth_generate(&SynthConfig {
        mode_station_counts: vec![5],
        total_steps: 200,
        ..SynthConfig::default()
    })
    .unwrap()
    .remove(0);
    let cfg = RunConfig {
        tau: 4,
        epochs: 2,
        embed_dim: 3,
        hidden_dim: 4,
        batch_size: 16,
        ..RunConfig::default()
    };
    run_pretrain(&data, &cfg, ArtifactMetadata::new("bus", "2017-04-01")).unwrap().0
}

#[test]
fn save_load_save_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = trained();
    let first = dir.path().join("a.ukadf");
    let second = dir.path().join("b.ukadf");
    let sum = save_artifact(&a, &first).unwrap();
    let loaded = load_artifact(&first).unwrap();
    assert_eq!(loaded, a);
    assert_eq!(save_artifact(&loaded, &second).unwrap(), sum);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(loaded.metadata().source_mode, "bus");
}

#[test]
fn every_single_byte_change_is_detected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("a.ukadf");
    save_artifact(&trained(), &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    for i in (0..bytes.len()).step_by(7) {
        let mut bad = bytes.clone();
        bad[i] ^= 0x01;
        std::fs::write(&path, &bad).unwrap();
        let err = load_artifact(&path).unwrap_err();
        assert!(
            matches!(err.class(), "corruption" | "malformed-artifact" | "version"),
            "byte {i}: {err}"
        );
    }
}

#[test]
fn only_recurrent_weights_are_stored() {
    let a = trained();
    let text = String::from_utf8(a.to_bytes()).unwrap();
    let tensors: Vec<&str> = text.lines().filter(|l| l.starts_with("tensor ")).collect();
    assert_eq!(tensors.len(), 12);
    for t in &tensors {
        let name = t.split_whitespace().nth(1).unwrap();
        assert!(["W_", "U_", "b_"].iter().any(|p| name.starts_with(p)), "{name}");
    }
    let numbers: usize = text
        .lines()
        .filter(|l| !l.contains('=') && !l.starts_with("tensor ") && !l.starts_with("ukadf"))
        .map(|l| l.split_whitespace().count())
        .sum();
    assert_eq!(numbers, 4 * (4 * 3 + 4 * 4 + 4));
    assert!(!text.contains("encoder") && !text.contains("decoder") && !text.contains("predictor"));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let err = load_artifact(&dir.path().join("none.ukadf")).unwrap_err();
    assert_eq!(err.class(), "io");
    assert_eq!(err.exit_code(), 3);
}
