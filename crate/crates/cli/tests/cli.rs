//! Black-box tests of the `voxent` binary.

mod common;

use common::*;

use voxent_core::phantom::{PhantomKind, PhantomSpec};
use voxent_core::{BitDepth, Dims};

fn noise_spec(mean: f64, std_dev: f64, seed: u64) -> PhantomSpec {
    PhantomSpec {
        kind: PhantomKind::UniformNoise { mean, std_dev },
        dims: Dims::new(40, 40, 40),
        bit_depth: BitDepth::Sixteen,
        seed,
        voxel_size_um: 25.0,
    }
}

fn layered_spec(seed: u64) -> PhantomSpec {
    PhantomSpec {
        kind: PhantomKind::Layered {
            levels: vec![24_000, 30_000, 36_000],
            noise_std: 1_500.0,
        },
        dims: Dims::new(40, 40, 40),
        bit_depth: BitDepth::Sixteen,
        seed,
        voxel_size_um: 25.0,
    }
}

#[test]
fn rank_two_phantoms_layered_wins() {
    let dir = tempfile::tempdir().unwrap();
    let manifests = vec![
        write_phantom(dir.path(), "noise", &noise_spec(30_000.0, 5_000.0, 1)),
        write_phantom(dir.path(), "layered", &layered_spec(2)),
    ];
    write_list(dir.path(), "list.txt", &manifests);

    let output = run_in(
        dir.path(),
        &[
            "rank",
            "--manifest-list",
            "list.txt",
            "-d",
            "5",
            "--attribute",
            "std_dev",
            "--out-dir",
            "out",
        ],
    );
    assert!(output.status.success(), "{output:?}");

    let csv = std::fs::read_to_string(dir.path().join("out/rank.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let layered_row = rows.iter().find(|r| r.starts_with("layered,")).unwrap();
    let fields: Vec<&str> = layered_row.split(',').collect();
    assert_eq!(fields[1], "std_dev");
    assert_eq!(fields[5], "1.0", "layered should take the top quantile");
}

#[test]
fn rank_rejects_divisions_below_two() {
    let dir = tempfile::tempdir().unwrap();
    let manifests = vec![write_phantom(dir.path(), "a", &noise_spec(30_000.0, 1_000.0, 3))];
    write_list(dir.path(), "list.txt", &manifests);
    let output = run_in(
        dir.path(),
        &["rank", "--manifest-list", "list.txt", "-d", "1"],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn rank_rejects_unknown_attribute() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(
        dir.path(),
        &["rank", "--manifest-list", "x.txt", "--attribute", "wat"],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn rank_with_zero_survivors_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = manifest_for("ghost", Dims::new(8, 8, 8), 16, dir.path().join("ghost.raw"));
    let path = dir.path().join("ghost.json");
    manifest.save(&path).unwrap();
    write_list(dir.path(), "list.txt", &[path]);
    let output = run_in(dir.path(), &["rank", "--manifest-list", "list.txt"]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
}

#[test]
fn rank_honors_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let manifests = vec![
        write_phantom(dir.path(), "a", &noise_spec(20_000.0, 2_000.0, 4)),
        write_phantom(dir.path(), "b", &layered_spec(5)),
    ];
    write_list(dir.path(), "list.txt", &manifests);
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
manifest_list = "list.txt"
divisions = 4
attributes = ["median"]
out_dir = "from_config"

[kde]
bandwidth = 1.0

[high_density_filter]
enabled = false
"#,
    )
    .unwrap();

    let output = run_in(dir.path(), &["rank", "--config", "run.toml"]);
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.path().join("from_config/rank.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",median,4,")), "{csv}");

    // A flag overrides the config value.
    let output = run_in(
        dir.path(),
        &["rank", "--config", "run.toml", "-d", "3", "--out-dir", "flags"],
    );
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.path().join("flags/rank.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",median,3,")), "{csv}");
}

#[test]
fn inspect_reports_constant_volume() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom(dir.path(), "flat", &noise_spec(12_345.0, 0.0, 0));
    let output = run_in(
        dir.path(),
        &["inspect", "--manifest", manifest.to_str().unwrap()],
    );
    assert!(output.status.success(), "{output:?}");
    let text = stdout_of(&output);
    assert!(text.contains("voi_min:         12345"), "{text}");
    assert!(text.contains("voi_max:         12345"), "{text}");
    assert!(text.contains("voi_mean:        12345"), "{text}");
    assert!(text.contains("retained"), "{text}");
}

#[test]
fn inspect_flags_high_density_volume() {
    let dir = tempfile::tempdir().unwrap();
    let hot = PhantomSpec {
        kind: PhantomKind::Blobs {
            background: 20_000,
            count: 2,
            radius: 8.0,
            intensity: 65_535,
            noise_std: 0.0,
        },
        dims: Dims::new(40, 40, 40),
        bit_depth: BitDepth::Sixteen,
        seed: 9,
        voxel_size_um: 25.0,
    };
    let manifest = write_phantom(dir.path(), "hot", &hot);
    let output = run_in(
        dir.path(),
        &["inspect", "--manifest", manifest.to_str().unwrap()],
    );
    assert!(output.status.success(), "{output:?}");
    assert!(stdout_of(&output).contains("EXCLUDED"), "{output:?}");
}

#[test]
fn inspect_corrupt_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // Manifest declares more bytes than the file has.
    std::fs::write(dir.path().join("bad.raw"), [0u8; 16]).unwrap();
    let manifest = manifest_for("bad", Dims::new(8, 8, 8), 16, dir.path().join("bad.raw"));
    let path = dir.path().join("bad.json");
    manifest.save(&path).unwrap();
    let output = run_in(dir.path(), &["inspect", "--manifest", "bad.json"]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
}

#[test]
fn stats_reports_all_four_statistics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("labels.csv"),
        "sample_id,value,label\na,1,0\nb,2,0\nc,3,0\nd,4,1\ne,5,1\nf,6,1\n",
    )
    .unwrap();
    let output = run_in(dir.path(), &["stats", "--input", "labels.csv"]);
    assert!(output.status.success(), "{output:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(report["mann_whitney"]["p_value"], 0.1);
    assert_eq!(report["mann_whitney"]["mode"], "exact");
    assert_eq!(report["rank_biserial"]["mean_rank_diff"], 3.0);
    assert_eq!(report["rank_biserial"]["normalized"], 1.0);
    assert_eq!(report["phi"]["value"], 1.0);
    assert!(report["spearman"].as_f64().unwrap() > 0.8);
}

#[test]
fn glcm_constant_volume_identity() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_phantom(dir.path(), "flat", &noise_spec(9_000.0, 0.0, 0));
    let output = run_in(
        dir.path(),
        &["glcm", "--manifest", manifest.to_str().unwrap(), "--slices", "10"],
    );
    assert!(output.status.success(), "{output:?}");
    let text = stdout_of(&output);
    assert_eq!(text.lines().nth(1).unwrap(), "flat,1,0,1");
}

#[test]
fn phantom_subcommand_is_reproducible_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["one", "two"] {
        let output = run_in(
            dir.path(),
            &[
                "phantom", "--kind", "blobs", "--dims", "24,24,24", "--seed", "7",
                "--sample-id", "p", "--out-dir", out,
            ],
        );
        assert!(output.status.success(), "{output:?}");
    }
    let a = std::fs::read(dir.path().join("one/p.raw")).unwrap();
    let b = std::fs::read(dir.path().join("two/p.raw")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the same bytes");

    let manifest = voxent_core::Manifest::load(&dir.path().join("one/p.json")).unwrap();
    let volume = voxent_core::volume::load_volume(&manifest).unwrap();
    assert_eq!(volume.dims(), Dims::new(24, 24, 24));
}

#[test]
fn phantom_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "phantom", "--kind", "layered", "--levels", "100", "--dims", "16,16,16",
            "--sample-id", "x",
        ],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}
