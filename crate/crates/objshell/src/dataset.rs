//! Dataset generation: one directory per sample plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use objshell_core::datagen::{generate_sample, sample_seeds, Sample, SampleConfig};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::{binary_pgm, encode_camera, encode_dmap, encode_pgm, unit_pgm, write_bytes};

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetConfig {
    pub shapes: u64,
    pub views: u64,
    pub seed: u64,
    pub sample: SampleConfig,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifestEntry {
    pub index: u64,
    pub shape_seed: u64,
    pub view_seed: u64,
}

impl ManifestEntry {
    pub fn id(&self) -> String {
        sample_id(self.index)
    }
}

pub fn sample_id(index: u64) -> String {
    format!("{index:06}")
}

/// Files of one sample, name → bytes, in a fixed order.
pub fn sample_files(sample: &Sample, config: &SampleConfig) -> Vec<(&'static str, Vec<u8>)> {
    let (w, h) = sample.shell.entry().dims();
    let maps = &sample.maps;
    vec![
        ("input.dmap", encode_dmap(&sample.input)),
        ("entry.dmap", encode_dmap(sample.shell.entry())),
        ("exit.dmap", encode_dmap(sample.shell.exit())),
        ("feas.pgm", encode_pgm(&binary_pgm(w, h, &maps.feasible))),
        ("qual.pgm", encode_pgm(&unit_pgm(w, h, &maps.quality))),
        ("mask.pgm", encode_pgm(&binary_pgm(w, h, maps.mask.bits()))),
        ("cam.txt", encode_camera(&config.camera).into_bytes()),
    ]
}

fn write_sample(dir: &Path, entry: ManifestEntry, config: &SampleConfig) -> Result<()> {
    let sample = generate_sample(config, entry.shape_seed, entry.view_seed)?;
    let sub = dir.join(entry.id());
    fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    for (name, bytes) in sample_files(&sample, config) {
        write_bytes(&sub.join(name), &bytes)?;
    }
    Ok(())
}

pub fn manifest_entries(config: &DatasetConfig) -> Vec<ManifestEntry> {
    let mut out = Vec::new();
    for shape in 0..config.shapes {
        for view in 0..config.views {
            let (shape_seed, view_seed) = sample_seeds(config.seed, shape, view, config.views);
            out.push(ManifestEntry {
                index: shape * config.views + view,
                shape_seed,
                view_seed,
            });
        }
    }
    out
}

pub fn encode_manifest(entries: &[ManifestEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        let _ = writeln!(s, "{}\t{}\t{}", e.id(), e.shape_seed, e.view_seed);
    }
    s
}

/// Generates every sample under `out`. Samples are independent, so worker
/// count does not change any byte. On failure the manifest lists the
/// completed prefix of samples and the first error is returned.
pub fn gen_dataset(config: &DatasetConfig, out: &Path) -> Result<Vec<ManifestEntry>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let entries = manifest_entries(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let results: Vec<Result<()>> = pool.install(|| {
        entries
            .par_iter()
            .map(|&e| write_sample(out, e, &config.sample))
            .collect()
    });
    let done = results.iter().take_while(|r| r.is_ok()).count();
    let manifest_path: PathBuf = out.join(MANIFEST);
    write_bytes(&manifest_path, encode_manifest(&entries[..done]).as_bytes())?;
    match results.into_iter().find_map(|r| r.err()) {
        Some(e) => Err(e),
        None => Ok(entries),
    }
}
