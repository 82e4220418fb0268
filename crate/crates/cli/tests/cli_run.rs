//! End-to-end checks of the `unilearn` binary: artifact layout, exit codes,
//! sweep resumption and mask emission, all through the public interface.

use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use unilearn::activation::Activation;
use unilearn::data::FieldKind;
use unilearn::diffraction::{build_operator, DiffractionGeometry};
use unilearn::linalg::{InitKind, InitScheme};
use unilearn::network::{Layer, Network};
use unilearn_cli::artifacts::Metrics;
use unilearn_cli::config::{default_config, DiffractionDataConfig, EpsPower, Experiment};
use unilearn_cli::modulations::ModulationStack;

fn unilearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unilearn"))
        .args(args)
        .output()
        .expect("binary should start")
}

fn read_metrics(dir: &Path) -> Metrics {
    let bytes = std::fs::read(dir.join("metrics.json")).expect("metrics.json");
    serde_json::from_slice(&bytes).expect("metrics schema")
}

#[test]
fn phase_xor_run_writes_the_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = unilearn(&[
        "run",
        "--experiment",
        "phase_xor",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["config.toml", "curve.csv", "checkpoint.json", "metrics.json"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let metrics = read_metrics(dir.path());
    assert_eq!(metrics.experiment, "phase_xor");
    assert_eq!(metrics.seed, 3);
    assert!(metrics.abort.is_none());
    let curve = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(curve.starts_with("epoch,loss\n"));
    assert_eq!(curve.lines().count(), metrics.epochs_run + 1);
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = unilearn(&[
            "run",
            "--experiment",
            "xor4",
            "--seed",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["curve.csv", "checkpoint.json", "metrics.json"] {
        let left = std::fs::read(a.path().join(name)).unwrap();
        let right = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between reruns");
    }
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let out = unilearn(&["run", "--experiment", "warp_drive"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn the_sweep_experiment_needs_its_own_subcommand() {
    let out = unilearn(&["run", "--experiment", "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));
}

#[test]
fn missing_idx_files_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = default_config(Experiment::Mnist);
    let idx = cfg.idx.as_mut().unwrap();
    idx.train_images = dir.path().join("nope-images");
    idx.train_labels = dir.path().join("nope-labels");
    idx.test_images = dir.path().join("nope-images");
    idx.test_labels = dir.path().join("nope-labels");
    cfg.out_dir = Some(dir.path().join("out"));
    let config_path = dir.path().join("cfg.toml");
    std::fs::write(&config_path, toml::to_string_pretty(&cfg).unwrap()).unwrap();

    let out = unilearn(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_and_invalid_configs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let garbled = dir.path().join("garbled.toml");
    std::fs::write(&garbled, "experiment = [unclosed").unwrap();
    assert_eq!(
        unilearn(&["run", "--config", garbled.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let mut cfg = default_config(Experiment::PhaseXor);
    cfg.network.widths = vec![4, 3, 4]; // unitary layer that is not square
    let invalid = dir.path().join("invalid.toml");
    std::fs::write(&invalid, toml::to_string_pretty(&cfg).unwrap()).unwrap();
    assert_eq!(
        unilearn(&["run", "--config", invalid.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn boundary_aborts_exit_4_and_keep_partial_artifacts() {
    // Amplitude-only fields meet a pure-imaginary unitary draw: every hidden
    // pre-activation argument lands exactly on ±π/2, so the first derivative
    // call raises the boundary diagnostic.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = default_config(Experiment::Diffractive);
    cfg.network.widths = vec![16, 16, 16];
    cfg.network.activations = vec![Activation::phase_relu(0.0), Activation::identity()];
    cfg.network.init = InitScheme::new(InitKind::PureImaginaryUnitary, 5);
    cfg.optimizer.epochs = 50;
    cfg.optimizer.batch_size = 5;
    cfg.diffraction = Some(DiffractionDataConfig {
        kind: FieldKind::AmplitudeOnly,
        train_count: 10,
        test_count: 0,
        seed: 99,
        n_samples: 16,
        aperture: 5e-3,
        wavelength: 632.8e-9,
        distance: None,
    });
    cfg.out_dir = Some(dir.path().join("out"));
    let config_path = dir.path().join("cfg.toml");
    std::fs::write(&config_path, toml::to_string_pretty(&cfg).unwrap()).unwrap();

    let out = unilearn(&["run", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = read_metrics(&dir.path().join("out"));
    assert!(metrics.abort.is_some());
    assert!(!metrics.converged);
    assert!(dir.path().join("out/checkpoint.json").is_file());
    assert!(dir.path().join("out/curve.csv").is_file());
}

#[test]
fn sweeps_run_end_to_end_and_resume_from_cell_markers() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = default_config(Experiment::Sweep);
    cfg.out_dir = Some(dir.path().join("out"));
    cfg.diffraction.as_mut().unwrap().train_count = 6;
    let sweep = cfg.sweep.as_mut().unwrap();
    sweep.eps_powers = vec![EpsPower::Infinite, EpsPower::Finite(2.0)];
    sweep.k_powers = vec![1.0];
    sweep.max_epochs = 30;
    let config_path = dir.path().join("sweep.toml");
    std::fs::write(&config_path, toml::to_string_pretty(&cfg).unwrap()).unwrap();

    let first = unilearn(&["sweep", "--config", config_path.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let grid_path = dir.path().join("out/grid.csv");
    let grid = std::fs::read_to_string(&grid_path).unwrap();
    assert!(grid.starts_with("eps_power,k,converged,final_loss,epochs\n"));
    assert_eq!(grid.lines().count(), 3);
    assert!(grid.lines().any(|l| l.starts_with("inf,")));

    let cells: Vec<_> = std::fs::read_dir(dir.path().join("out/cells"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(cells.len(), 2);
    let before: Vec<_> = cells.iter().map(|p| std::fs::read(p).unwrap()).collect();

    let second = unilearn(&["sweep", "--config", config_path.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));
    for (path, old) in cells.iter().zip(&before) {
        assert_eq!(&std::fs::read(path).unwrap(), old, "cell {} changed", path.display());
    }
}

#[test]
fn emitted_masks_for_a_propagation_checkpoint_are_unity() {
    let dir = tempfile::tempdir().unwrap();
    let g = DiffractionGeometry::at_sample_distance(32, 5e-3, 632.8e-9);
    let net = Network::new(vec![Layer::unitary(
        build_operator(g).dense_matrix(),
        Activation::identity(),
    )]);
    let checkpoint = dir.path().join("checkpoint.json");
    std::fs::write(&checkpoint, serde_json::to_string_pretty(&net).unwrap()).unwrap();

    let out = unilearn(&[
        "emit-modulations",
        "--checkpoint",
        checkpoint.to_str().unwrap(),
        "--geometry",
        "n=32,aperture=5e-3,wavelength=632.8e-9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stack: ModulationStack =
        serde_json::from_slice(&std::fs::read(dir.path().join("modulations.json")).unwrap())
            .unwrap();
    assert_eq!(stack.layers.len(), 1);
    assert!(stack.max_residual <= 1e-12);
    let one = Complex64::new(1.0, 0.0);
    for (re, im) in stack.layers[0].mask_re.iter().zip(&stack.layers[0].mask_im) {
        assert!((Complex64::new(*re, *im) - one).norm() <= 1e-10);
    }
}

#[test]
fn bad_geometry_strings_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let checkpoint = dir.path().join("checkpoint.json");
    std::fs::write(&checkpoint, "{}").unwrap();
    let out = unilearn(&[
        "emit-modulations",
        "--checkpoint",
        checkpoint.to_str().unwrap(),
        "--geometry",
        "n=31,aperture=5e-3,wavelength=632.8e-9",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
