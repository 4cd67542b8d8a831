//! Command-line front end. Results go to stdout as `key=value` lines or the
//! documented one-line formats; diagnostics go to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use objshell_core::datagen::{postrender_augment, PostrenderParams, PrerenderParams, RngStream, SampleConfig};
use objshell_core::eval::{
    chamfer_meshes, grasp_precision, map_metrics, ChamferVariant, DEFAULT_CHAMFER_SAMPLES, DEFAULT_CLEARANCE,
};
use objshell_core::grasp::{compute_grasp_maps, GraspMaps, GripperModel};
use objshell_core::raycast::{extract_shell, render_depth};
use objshell_core::shellmesh::{mesh_volume_centroid, stitch_shell, DEFAULT_DISCONTINUITY};
use objshell_core::{CameraModel, DepthImage, Mask, ObjectShell, TriangleMesh};

use crate::dataset::{gen_dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::formats::{
    binary_pgm, depth_pgm, pgm_bits, pgm_unit, read_camera, read_candidates, read_dmap, read_obj, read_pgm,
    unit_pgm, write_candidates, write_dmap, write_obj, write_pgm,
};

#[derive(Debug, Parser)]
#[command(name = "objshell", version, about = "Object shell extraction, stitching, grasp maps and synthetic data")]
pub struct Cli {
    /// Worker threads for parallel commands; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ray-cast the first-hit depth image of a mesh.
    Render {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write a 16-bit millimeter PGM for viewing.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Ray-cast the entry and exit layers of a mesh.
    ExtractShell {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        out_entry: PathBuf,
        #[arg(long)]
        out_exit: PathBuf,
    },
    /// Stitch an entry/exit pair into a closed mesh.
    Stitch {
        #[command(flatten)]
        shell: ShellArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DISCONTINUITY)]
        discontinuity: f64,
    },
    /// Grasp feasibility, quality and width maps of a shell.
    GraspMaps {
        #[command(flatten)]
        shell: ShellArgs,
        /// Prepended verbatim to the output file names.
        #[arg(long)]
        out_prefix: String,
        #[command(flatten)]
        grasp: GraspArgs,
    },
    /// Apply the depth-sensor corruption pipeline to a depth image.
    AugmentDepth {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the VGA geometry scaled to the image width.
        #[arg(long)]
        camera: Option<PathBuf>,
        #[command(flatten)]
        augment: AugmentArgs,
    },
    /// Generate a synthetic dataset.
    GenData {
        #[arg(long)]
        shapes: u64,
        #[arg(long)]
        views: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Image scale relative to 640×480.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        grasp: GraspArgs,
        #[command(flatten)]
        prerender: PrerenderArgs,
        #[command(flatten)]
        augment: AugmentArgs,
    },
    /// Chamfer distance between surface samples of two meshes.
    EvalChamfer {
        #[arg(long)]
        mesh_a: PathBuf,
        #[arg(long)]
        mesh_b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CHAMFER_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Variant::Mean)]
        variant: Variant,
        /// Mantissa digits of the printed values.
        #[arg(long, default_value_t = 1)]
        digits: usize,
    },
    /// Fraction of feasible candidates that stay feasible on a ground-truth mesh.
    EvalGrasps {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLEARANCE)]
        clearance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = GripperModel::default().min_contact_points)]
        min_contacts: usize,
    },
    /// Compare predicted grasp maps against ground truth.
    EvalMaps {
        #[arg(long)]
        pred_prefix: String,
        #[arg(long)]
        gt_prefix: String,
    },
    /// extract-shell, stitch and grasp-maps for one mesh.
    Pipeline {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DISCONTINUITY)]
        discontinuity: f64,
        #[command(flatten)]
        grasp: GraspArgs,
    },
}

#[derive(Debug, Args)]
pub struct ShellArgs {
    #[arg(long)]
    pub entry: PathBuf,
    #[arg(long)]
    pub exit: PathBuf,
    #[arg(long)]
    pub camera: PathBuf,
}

#[derive(Debug, Args)]
pub struct GraspArgs {
    /// Anchor spacing in pixels.
    #[arg(long, default_value_t = 4)]
    pub stride: usize,
    /// Maximum jaw opening, meters.
    #[arg(long, default_value_t = GripperModel::default().max_opening)]
    pub opening: f64,
    #[arg(long, default_value_t = GripperModel::default().min_contact_points)]
    pub min_contacts: usize,
}

impl GraspArgs {
    fn gripper(&self) -> Result<GripperModel> {
        let g = GripperModel::default();
        GripperModel::new(
            self.opening,
            g.finger_pad_width,
            g.finger_pad_height,
            g.finger_body_thickness,
            self.min_contacts,
        )
        .map_err(|e| Error::Usage(e.to_string()))
    }

    fn check(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Usage("--stride must be positive".into()));
        }
        self.gripper().map(|_| ())
    }
}

#[derive(Debug, Args)]
pub struct PrerenderArgs {
    #[arg(long, default_value_t = 0.3)]
    pub subset_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub subset_max: f64,
    /// Per-vertex jitter magnitude range, meters.
    #[arg(long, default_value_t = 0.001)]
    pub jitter_min: f64,
    #[arg(long, default_value_t = 0.010)]
    pub jitter_max: f64,
    #[arg(long, default_value_t = 3)]
    pub smoothing_rounds: usize,
}

impl PrerenderArgs {
    fn params(&self) -> Result<PrerenderParams> {
        if !(0.0 <= self.subset_min && self.subset_min <= self.subset_max && self.subset_max <= 1.0) {
            return Err(Error::Usage("need 0 <= --subset-min <= --subset-max <= 1".into()));
        }
        if !(0.0 <= self.jitter_min && self.jitter_min <= self.jitter_max) {
            return Err(Error::Usage("need 0 <= --jitter-min <= --jitter-max".into()));
        }
        Ok(PrerenderParams {
            subset: (self.subset_min, self.subset_max),
            magnitude: (self.jitter_min, self.jitter_max),
            smoothing_rounds: self.smoothing_rounds,
            ..PrerenderParams::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long, default_value_t = 0.005)]
    pub mult_sigma: f64,
    /// Meters.
    #[arg(long, default_value_t = 0.001)]
    pub add_sigma: f64,
    /// Dropout angle range, degrees.
    #[arg(long, default_value_t = 5.0)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 10)]
    pub pepper_max: usize,
    #[arg(long, default_value_t = 5)]
    pub erosion_min: usize,
    #[arg(long, default_value_t = 20)]
    pub erosion_max: usize,
    #[arg(long, default_value_t = 0.3)]
    pub erosion_prob: f64,
    #[arg(long, default_value_t = 3)]
    pub coarse_rounds: usize,
    #[arg(long, default_value_t = 10)]
    pub exempt_max: usize,
}

impl AugmentArgs {
    fn params(&self) -> Result<PostrenderParams> {
        let usage = |m: &str| Err(Error::Usage(m.into()));
        if !(self.mult_sigma >= 0.0 && self.add_sigma >= 0.0) {
            return usage("noise sigmas must be non-negative");
        }
        if !(0.0 <= self.theta_min && self.theta_min <= self.theta_max && self.theta_max <= 90.0) {
            return usage("need 0 <= --theta-min <= --theta-max <= 90");
        }
        if self.erosion_min > self.erosion_max {
            return usage("need --erosion-min <= --erosion-max");
        }
        if !(0.0..=1.0).contains(&self.erosion_prob) {
            return usage("--erosion-prob must lie in [0, 1]");
        }
        Ok(PostrenderParams {
            multiplicative_sigma: self.mult_sigma,
            additive_sigma: self.add_sigma,
            dropout_angle: (self.theta_min, self.theta_max),
            pepper_max: self.pepper_max,
            erosion_rounds: (self.erosion_min, self.erosion_max),
            erosion_probability: self.erosion_prob,
            coarse_rounds: self.coarse_rounds,
            exempt_max: self.exempt_max,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Mean,
    MeanSquared,
}

fn require_file(path: &Path) -> Result<()> {
    match fs::metadata(path) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(Error::io(path, std::io::Error::other("not a regular file"))),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Output parent directory must already exist.
fn require_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(Error::io(
            p,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        )),
        _ => Ok(()),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn prefixed(prefix: &str, name: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{name}"))
}

fn load_shell(args: &ShellArgs) -> Result<ObjectShell> {
    for p in [&args.entry, &args.exit, &args.camera] {
        require_file(p)?;
    }
    let cam = read_camera(&args.camera)?;
    let entry = read_dmap(&args.entry)?;
    let exit = read_dmap(&args.exit)?;
    Ok(ObjectShell::new(entry, exit, cam)?)
}

/// Camera with the VGA field of view for an image of this size.
fn default_camera(w: usize, h: usize) -> Result<CameraModel> {
    let f = 600.0 * w as f64 / 640.0;
    Ok(CameraModel::new(f, f, (w / 2) as f64, (h / 2) as f64, w, h)?)
}

/// Writes feas.pgm, qual.pgm, mask.pgm, width.dmap and candidates.csv.
fn write_maps(prefix: &str, maps: &GraspMaps) -> Result<()> {
    let (w, h) = maps.dims();
    write_pgm(&prefixed(prefix, "feas.pgm"), &binary_pgm(w, h, &maps.feasible))?;
    write_pgm(&prefixed(prefix, "qual.pgm"), &unit_pgm(w, h, &maps.quality))?;
    write_pgm(&prefixed(prefix, "mask.pgm"), &binary_pgm(w, h, maps.mask.bits()))?;
    let width = DepthImage::from_fn(w, h, |u, v| Some(maps.width[v * w + u]));
    write_dmap(&prefixed(prefix, "width.dmap"), &width)?;
    write_candidates(&prefixed(prefix, "candidates.csv"), &maps.candidates)
}

/// Maps saved under `prefix`. The mask comes from `mask.pgm`, or from the
/// valid pixels of `entry.dmap` when there is no mask file; without either
/// it is empty unless `need_mask`.
fn load_maps(prefix: &str, need_mask: bool) -> Result<GraspMaps> {
    let feas_path = prefixed(prefix, "feas.pgm");
    let qual_path = prefixed(prefix, "qual.pgm");
    require_file(&feas_path)?;
    require_file(&qual_path)?;
    let feas = read_pgm(&feas_path)?;
    let qual = read_pgm(&qual_path)?;
    let (w, h) = (feas.width, feas.height);
    if (qual.width, qual.height) != (w, h) {
        return Err(Error::format(&qual_path, format!("size differs from {}", feas_path.display())));
    }
    let mask_path = prefixed(prefix, "mask.pgm");
    let entry_path = prefixed(prefix, "entry.dmap");
    let mask = if mask_path.is_file() {
        let m = read_pgm(&mask_path)?;
        Mask::new(m.width, m.height, pgm_bits(&m)).map_err(|e| Error::format(&mask_path, e.to_string()))?
    } else if entry_path.is_file() {
        read_dmap(&entry_path)?.mask()
    } else if !need_mask {
        Mask::from_fn(w, h, |_, _| false)
    } else {
        return Err(Error::io(
            &mask_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no mask.pgm or entry.dmap"),
        ));
    };
    if mask.dims() != (w, h) {
        return Err(Error::format(&mask_path, format!("size differs from {}", feas_path.display())));
    }
    let mut maps = GraspMaps::empty(w, h);
    maps.mask = mask;
    maps.feasible = pgm_bits(&feas);
    maps.quality = pgm_unit(&qual);
    Ok(maps)
}

fn stitch_report(out: &mut impl Write, mesh: &TriangleMesh) -> std::io::Result<()> {
    let report = mesh.edge_report();
    writeln!(out, "vertices={}", mesh.vertices().len())?;
    writeln!(out, "triangles={}", mesh.triangles().len())?;
    writeln!(out, "closed={}", report.is_closed())?;
    match mesh_volume_centroid(mesh) {
        Ok((vol, c)) => {
            writeln!(out, "volume={vol:e}")?;
            writeln!(out, "centroid={:e},{:e},{:e}", c.x, c.y, c.z)
        }
        Err(_) => writeln!(out, "volume=n/a"),
    }
}

fn maps_report(out: &mut impl Write, maps: &GraspMaps) -> std::io::Result<()> {
    writeln!(out, "candidates={}", maps.candidates.len())?;
    writeln!(out, "feasible_candidates={}", maps.candidates.iter().filter(|c| c.feasible).count())?;
    writeln!(out, "feasible_pixels={}", maps.feasible_count())?;
    match maps.center {
        Some(c) => writeln!(out, "center={:e},{:e},{:e}", c.x, c.y, c.z),
        None => writeln!(out, "center=n/a"),
    }
}

/// Runs one parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    let stdout_err = |e: std::io::Error| Error::io("<stdout>", e);
    match cli.command {
        Command::Render { mesh, camera, out: path, pgm } => {
            require_file(&mesh)?;
            require_file(&camera)?;
            require_parent(&path)?;
            if let Some(p) = &pgm {
                require_parent(p)?;
            }
            let cam = read_camera(&camera)?;
            let depth = render_depth(&read_obj(&mesh)?, &cam);
            write_dmap(&path, &depth)?;
            if let Some(p) = &pgm {
                write_pgm(p, &depth_pgm(&depth))?;
            }
            writeln!(out, "valid={}", depth.valid_count()).map_err(stdout_err)
        }
        Command::ExtractShell {
            mesh,
            camera,
            out_entry,
            out_exit,
        } => {
            require_file(&mesh)?;
            require_file(&camera)?;
            require_parent(&out_entry)?;
            require_parent(&out_exit)?;
            let cam = read_camera(&camera)?;
            let shell = extract_shell(&read_obj(&mesh)?, &cam);
            write_dmap(&out_entry, shell.entry())?;
            write_dmap(&out_exit, shell.exit())?;
            writeln!(out, "valid={}", shell.valid_count()).map_err(stdout_err)
        }
        Command::Stitch {
            shell,
            out: path,
            discontinuity,
        } => {
            if !(discontinuity > 0.0) {
                return Err(Error::Usage("--discontinuity must be positive".into()));
            }
            require_parent(&path)?;
            let shell = load_shell(&shell)?;
            let mesh = stitch_shell(&shell, discontinuity)?;
            write_obj(&path, &mesh)?;
            stitch_report(out, &mesh).map_err(stdout_err)
        }
        Command::GraspMaps {
            shell,
            out_prefix,
            grasp,
        } => {
            grasp.check()?;
            require_parent(&prefixed(&out_prefix, "feas.pgm"))?;
            let shell = load_shell(&shell)?;
            let maps = compute_grasp_maps(&shell, &grasp.gripper()?, grasp.stride)?;
            write_maps(&out_prefix, &maps)?;
            maps_report(out, &maps).map_err(stdout_err)
        }
        Command::AugmentDepth {
            input,
            seed,
            out: path,
            camera,
            augment,
        } => {
            let params = augment.params()?;
            require_file(&input)?;
            if let Some(c) = &camera {
                require_file(c)?;
            }
            require_parent(&path)?;
            let depth = read_dmap(&input)?;
            let (w, h) = depth.dims();
            let cam = match &camera {
                Some(c) => read_camera(c)?,
                None => default_camera(w, h)?,
            };
            if (cam.width(), cam.height()) != (w, h) {
                return Err(Error::format(&input, "image size differs from the camera"));
            }
            let aug = postrender_augment(&depth, &cam, &mut RngStream::new(seed), &params);
            write_dmap(&path, &aug)?;
            writeln!(out, "valid_in={}\nvalid_out={}", depth.valid_count(), aug.valid_count()).map_err(stdout_err)
        }
        Command::GenData {
            shapes,
            views,
            seed,
            out: dir,
            scale,
            grasp,
            prerender,
            augment,
        } => {
            grasp.check()?;
            if !(scale > 0.0 && scale <= 4.0) {
                return Err(Error::Usage("--scale must lie in (0, 4]".into()));
            }
            let config = DatasetConfig {
                shapes,
                views,
                seed,
                jobs: cli.jobs,
                sample: SampleConfig {
                    camera: CameraModel::scaled_vga(scale),
                    gripper: grasp.gripper()?,
                    stride: grasp.stride,
                    prerender: prerender.params()?,
                    postrender: augment.params()?,
                },
            };
            let entries = gen_dataset(&config, &dir)?;
            writeln!(out, "samples={}", entries.len()).map_err(stdout_err)
        }
        Command::EvalChamfer {
            mesh_a,
            mesh_b,
            samples,
            seed,
            variant,
            digits,
        } => {
            if samples == 0 {
                return Err(Error::Usage("--samples must be positive".into()));
            }
            require_file(&mesh_a)?;
            require_file(&mesh_b)?;
            let a = read_obj(&mesh_a)?;
            let b = read_obj(&mesh_b)?;
            let variant = match variant {
                Variant::Mean => ChamferVariant::Mean,
                Variant::MeanSquared => ChamferVariant::MeanSquared,
            };
            let r = chamfer_meshes(&a, &b, samples, seed, variant)?;
            writeln!(out, "{:.*e} {:.*e} {:.*e}", digits, r.forward, digits, r.backward, digits, r.sum)
                .map_err(stdout_err)
        }
        Command::EvalGrasps {
            candidates,
            gt,
            clearance,
            seed,
            min_contacts,
        } => {
            if !(clearance >= 0.0) {
                return Err(Error::Usage("--clearance must be non-negative".into()));
            }
            require_file(&candidates)?;
            require_file(&gt)?;
            let cands = read_candidates(&candidates)?;
            let mesh = read_obj(&gt)?;
            let gripper = GripperModel {
                min_contact_points: min_contacts,
                ..GripperModel::default()
            };
            match grasp_precision(&cands, &mesh, &gripper, clearance, seed)? {
                Some(rate) => writeln!(out, "{rate:.6}"),
                None => writeln!(out, "n/a"),
            }
            .map_err(stdout_err)
        }
        Command::EvalMaps { pred_prefix, gt_prefix } => {
            let gt = load_maps(&gt_prefix, true)?;
            let pred = load_maps(&pred_prefix, false)?;
            let m = map_metrics(&pred, &gt)?;
            writeln!(
                out,
                "{:.6} {:.6} {:.6} {:.6}",
                m.accuracy, m.f1, m.quality_rmse, m.quality_rmse_high
            )
            .map_err(stdout_err)
        }
        Command::Pipeline {
            mesh,
            camera,
            out_dir,
            discontinuity,
            grasp,
        } => {
            grasp.check()?;
            if !(discontinuity > 0.0) {
                return Err(Error::Usage("--discontinuity must be positive".into()));
            }
            require_file(&mesh)?;
            require_file(&camera)?;
            create_dir(&out_dir)?;
            let cam = read_camera(&camera)?;
            let shell = extract_shell(&read_obj(&mesh)?, &cam);
            write_dmap(&out_dir.join("entry.dmap"), shell.entry())?;
            write_dmap(&out_dir.join("exit.dmap"), shell.exit())?;
            let stitched = stitch_shell(&shell, discontinuity)?;
            write_obj(&out_dir.join("mesh.obj"), &stitched)?;
            let maps = compute_grasp_maps(&shell, &grasp.gripper()?, grasp.stride)?;
            let prefix = format!("{}/", out_dir.display());
            write_maps(&prefix, &maps)?;
            writeln!(out, "valid={}", shell.valid_count()).map_err(stdout_err)?;
            stitch_report(out, &stitched).map_err(stdout_err)?;
            maps_report(out, &maps).map_err(stdout_err)
        }
    }
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    // A closed pipe (e.g. `| head`) is not an error here.
                    let _ = write!(std::io::stdout(), "{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    // Buffer results so a failing command leaves stdout empty.
    let mut buf = Vec::new();
    match run(cli, &mut buf) {
        Ok(()) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&buf).and_then(|_| stdout.flush()).is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
