//! Helpers shared by the CLI and acceptance test suites.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use voxent_core::phantom::{generate, PhantomSpec};
use voxent_core::volume::{write_volume, Endianness, Manifest, Voi};
use voxent_core::{Dims, Volume};

pub fn voxent() -> Command {
    Command::new(env!("CARGO_BIN_EXE_voxent"))
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    voxent()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn voxent")
}

#[allow(dead_code)]
pub fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn manifest_for(id: &str, dims: Dims, bit_depth: u8, raw: PathBuf) -> Manifest {
    Manifest {
        sample_id: id.to_string(),
        file: raw,
        bit_depth,
        dims,
        voxel_size_um: 25.0,
        endianness: Endianness::Little,
        voi: Some(Voi::full(dims).unwrap()),
        circle: None,
    }
}

/// Writes `volume` as raw + manifest and returns the manifest path.
pub fn write_volume_pair(dir: &Path, id: &str, volume: &Volume) -> PathBuf {
    let raw = dir.join(format!("{id}.raw"));
    write_volume(volume, &raw, Endianness::Little).unwrap();
    let manifest = manifest_for(id, volume.dims(), volume.bit_depth().bits(), raw);
    let path = dir.join(format!("{id}.json"));
    manifest.save(&path).unwrap();
    path
}

/// Generates a phantom, writes raw + manifest, returns the manifest path.
pub fn write_phantom(dir: &Path, id: &str, spec: &PhantomSpec) -> PathBuf {
    write_volume_pair(dir, id, &generate(spec).unwrap())
}

/// Writes a manifest-list file naming the given manifest paths.
pub fn write_list(dir: &Path, name: &str, manifests: &[PathBuf]) -> PathBuf {
    let body: String = manifests
        .iter()
        .map(|p| format!("{}\n", p.file_name().unwrap().to_string_lossy()))
        .collect();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}
