use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use objshell::formats::{read_dmap, read_obj, read_pgm, write_camera, write_obj};
use objshell_core::primitives::box_mesh;
use objshell_core::shellmesh::mesh_volume_centroid;
use objshell_core::{CameraModel, ObjectShell, Vec3};
use tempfile::TempDir;

fn objshell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_objshell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Face-on 0.10 × 0.10 × 0.06 box at 0.75 m and a camera file.
fn fixture(dir: &Path, cam: CameraModel) -> (PathBuf, PathBuf) {
    let mesh = dir.join("box.obj");
    let camera = dir.join("cam.txt");
    write_obj(&mesh, &box_mesh(Vec3::new(0.0, 0.0, 0.75), Vec3::new(0.1, 0.1, 0.06), 1)).unwrap();
    write_camera(&camera, &cam).unwrap();
    (mesh, camera)
}

fn kv(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .to_string()
}

#[test]
fn chamfer_of_identical_meshes_prints_zeros() {
    let t = TempDir::new().unwrap();
    let (mesh, _) = fixture(t.path(), CameraModel::vga());
    let o = objshell(&["eval-chamfer", "--mesh-a", s(&mesh), "--mesh-b", s(&mesh)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.0e0 0.0e0 0.0e0\n");
}

#[test]
fn missing_input_is_an_io_error_with_empty_stdout() {
    let t = TempDir::new().unwrap();
    let missing = t.path().join("nope.obj");
    let o = objshell(&["eval-chamfer", "--mesh-a", s(&missing), "--mesh-b", s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(objshell(&["eval-chamfer", "--bogus"]).status.code(), Some(1));
    assert_eq!(objshell(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(objshell(&[]).status.code(), Some(1));
    let t = TempDir::new().unwrap();
    let (mesh, cam) = fixture(t.path(), CameraModel::scaled_vga(0.25));
    let o = objshell(&[
        "pipeline",
        "--mesh",
        s(&mesh),
        "--camera",
        s(&cam),
        "--out-dir",
        s(&t.path().join("o")),
        "--stride",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_input_exits_with_three() {
    let t = TempDir::new().unwrap();
    let (mesh, _) = fixture(t.path(), CameraModel::vga());
    let bad_cam = t.path().join("bad.txt");
    fs::write(&bad_cam, "fx=600\n").unwrap();
    let o = objshell(&[
        "render",
        "--mesh",
        s(&mesh),
        "--camera",
        s(&bad_cam),
        "--out",
        s(&t.path().join("d.dmap")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());

    // Entry layer behind its exit layer breaks the shell invariant.
    let cam = t.path().join("cam.txt");
    write_camera(&cam, &CameraModel::scaled_vga(0.25)).unwrap();
    let (e, x) = (t.path().join("e.dmap"), t.path().join("x.dmap"));
    assert_eq!(
        objshell(&["extract-shell", "--mesh", s(&mesh), "--camera", s(&cam), "--out-entry", s(&e), "--out-exit", s(&x)])
            .status
            .code(),
        Some(0)
    );
    let o = objshell(&["stitch", "--entry", s(&x), "--exit", s(&e), "--camera", s(&cam), "--out", s(&t.path().join("m.obj"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn version_flag() {
    let o = objshell(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), format!("objshell {}\n", env!("CARGO_PKG_VERSION")));
}

#[test]
fn pipeline_on_the_box_fixture() {
    let t = TempDir::new().unwrap();
    let (mesh, cam) = fixture(t.path(), CameraModel::vga());
    let out = t.path().join("run");
    let o = objshell(&["pipeline", "--mesh", s(&mesh), "--camera", s(&cam), "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = o.stdout.clone();
    let text = stdout(&o);
    assert_eq!(kv(&text, "closed"), "true");
    let vol: f64 = kv(&text, "volume").parse().unwrap();
    assert!((vol - 6e-4).abs() <= 0.02 * 6e-4, "{vol}");

    for f in ["mesh.obj", "feas.pgm", "qual.pgm", "width.dmap", "mask.pgm", "candidates.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let stitched = read_obj(&out.join("mesh.obj")).unwrap();
    assert!(stitched.edge_report().is_closed());
    let (v, c) = mesh_volume_centroid(&stitched).unwrap();
    // Printed with round-trip precision.
    assert_eq!(v, vol);
    assert!(c.distance(Vec3::new(0.0, 0.0, 0.75)) < 5e-3);

    // The 0.06 m box fits the default gripper face-on.
    let feas = read_pgm(&out.join("feas.pgm")).unwrap();
    let mask = read_pgm(&out.join("mask.pgm")).unwrap();
    assert!(feas.data.iter().filter(|&&x| x == 255).count() > 1000);
    assert!(feas.data.iter().zip(&mask.data).all(|(f, m)| *f == 0 || *m == 255));
    let width = read_dmap(&out.join("width.dmap")).unwrap();
    for &w in width.data().iter().filter(|w| **w > 0.0) {
        assert!((w as f64 - 0.06).abs() < 2e-3, "{w}");
    }

    // Self-comparison of the written maps and precision of the written candidates.
    let prefix = format!("{}/", out.display());
    let o = objshell(&["eval-maps", "--pred-prefix", &prefix, "--gt-prefix", &prefix]);
    assert_eq!(stdout(&o), "1.000000 1.000000 0.000000 0.000000\n");
    let o = objshell(&["eval-grasps", "--candidates", s(&out.join("candidates.csv")), "--gt", s(&mesh)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1.000000\n");

    // Identical reruns give identical bytes.
    let again = t.path().join("again");
    let o2 = objshell(&["pipeline", "--mesh", s(&mesh), "--camera", s(&cam), "--out-dir", s(&again)]);
    assert_eq!(o2.stdout, first);
    for f in ["mesh.obj", "feas.pgm", "qual.pgm", "width.dmap", "candidates.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn step_by_step_commands_agree_with_pipeline() {
    let t = TempDir::new().unwrap();
    let (mesh, cam) = fixture(t.path(), CameraModel::scaled_vga(0.5));
    let (e, x) = (t.path().join("e.dmap"), t.path().join("x.dmap"));
    let o = objshell(&["extract-shell", "--mesh", s(&mesh), "--camera", s(&cam), "--out-entry", s(&e), "--out-exit", s(&x)]);
    assert_eq!(o.status.code(), Some(0));
    let shell = ObjectShell::new(read_dmap(&e).unwrap(), read_dmap(&x).unwrap(), CameraModel::scaled_vga(0.5)).unwrap();
    assert_eq!(kv(&stdout(&o), "valid"), shell.valid_count().to_string());

    let m = t.path().join("m.obj");
    let o = objshell(&["stitch", "--entry", s(&e), "--exit", s(&x), "--camera", s(&cam), "--out", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    let maps_dir = t.path().join("maps");
    fs::create_dir(&maps_dir).unwrap();
    let prefix = format!("{}/", maps_dir.display());
    let o = objshell(&["grasp-maps", "--entry", s(&e), "--exit", s(&x), "--camera", s(&cam), "--out-prefix", &prefix]);
    assert_eq!(o.status.code(), Some(0));

    let p = t.path().join("p");
    let o = objshell(&["pipeline", "--mesh", s(&mesh), "--camera", s(&cam), "--out-dir", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&m).unwrap(), fs::read(p.join("mesh.obj")).unwrap());
    assert_eq!(fs::read(maps_dir.join("qual.pgm")).unwrap(), fs::read(p.join("qual.pgm")).unwrap());
    assert_eq!(fs::read(&e).unwrap(), fs::read(p.join("entry.dmap")).unwrap());

    let r = t.path().join("r.dmap");
    let viz = t.path().join("r.pgm");
    let o = objshell(&["render", "--mesh", s(&mesh), "--camera", s(&cam), "--out", s(&r), "--pgm", s(&viz)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_dmap(&r).unwrap(), *shell.entry());
    let pgm = read_pgm(&viz).unwrap();
    assert_eq!(pgm.maxval, 65535);
    assert!(pgm.data.iter().all(|&mm| mm == 0 || (719..=721).contains(&mm)));
}

#[test]
fn augment_depth_is_seeded() {
    let t = TempDir::new().unwrap();
    let (mesh, cam) = fixture(t.path(), CameraModel::scaled_vga(0.5));
    let d = t.path().join("d.dmap");
    assert_eq!(
        objshell(&["render", "--mesh", s(&mesh), "--camera", s(&cam), "--out", s(&d)]).status.code(),
        Some(0)
    );
    let run = |seed: &str, name: &str| {
        let out = t.path().join(name);
        let o = objshell(&["augment-depth", "--in", s(&d), "--seed", seed, "--out", s(&out), "--camera", s(&cam)]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out).unwrap()
    };
    let (a, b, c) = (run("4", "a.dmap"), run("4", "b.dmap"), run("5", "c.dmap"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    // Without a camera file the VGA geometry is scaled to the image size.
    let o = objshell(&["augment-depth", "--in", s(&d), "--seed", "4", "--out", s(&t.path().join("n.dmap"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(t.path().join("n.dmap")).unwrap(), a);
    let o = objshell(&["augment-depth", "--in", s(&d), "--seed", "4", "--out", s(&t.path().join("z.dmap")), "--theta-min", "30", "--theta-max", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_data_layout_and_determinism() {
    let t = TempDir::new().unwrap();
    let gen = |name: &str, jobs: &str| {
        let out = t.path().join(name);
        let o = objshell(&[
            "--jobs", jobs, "gen-data", "--shapes", "2", "--views", "3", "--seed", "17", "--out", s(&out), "--scale", "0.5",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), "samples=6\n");
        out
    };
    let a = gen("a", "1");
    let b = gen("b", "2");
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    let lines: Vec<_> = manifest.lines().collect();
    assert_eq!(lines.len(), 6);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<_> = line.split('\t').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[0], format!("{i:06}"));
        let id = fields[0];
        for f in ["input.dmap", "entry.dmap", "exit.dmap", "feas.pgm", "qual.pgm", "cam.txt"] {
            assert_eq!(fs::read(a.join(id).join(f)).unwrap(), fs::read(b.join(id).join(f)).unwrap(), "{id}/{f}");
        }
        let entry = read_dmap(&a.join(id).join("entry.dmap")).unwrap();
        let exit = read_dmap(&a.join(id).join("exit.dmap")).unwrap();
        assert!(ObjectShell::new(entry, exit, CameraModel::scaled_vga(0.5)).is_ok());
    }
    // Views of one shape share the shape seed.
    assert_eq!(lines[0].split('\t').nth(1), lines[2].split('\t').nth(1));
    assert_ne!(lines[0].split('\t').nth(1), lines[3].split('\t').nth(1));
    assert_eq!(manifest, fs::read_to_string(b.join("manifest.txt")).unwrap());
}

#[test]
fn eval_maps_reports_disagreement() {
    use objshell::formats::{binary_pgm, unit_pgm, write_pgm};
    let t = TempDir::new().unwrap();
    let (g, p) = (t.path().join("g_"), t.path().join("p_"));
    let (g, p) = (g.to_str().unwrap(), p.to_str().unwrap());
    let w = |prefix: &str, name: &str, pgm| write_pgm(Path::new(&format!("{prefix}{name}")), &pgm).unwrap();
    w(g, "mask.pgm", binary_pgm(2, 2, &[true; 4]));
    w(g, "feas.pgm", binary_pgm(2, 2, &[true, false, true, false]));
    w(g, "qual.pgm", unit_pgm(2, 2, &[1.0, 0.0, 1.0, 0.0]));
    w(p, "feas.pgm", binary_pgm(2, 2, &[true, true, false, false]));
    w(p, "qual.pgm", unit_pgm(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    let o = objshell(&["eval-maps", "--pred-prefix", p, "--gt-prefix", g]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // accuracy 0.5, f1 0.5, rmse √(1/4), high-quality rmse √(1/2)
    assert_eq!(stdout(&o), "0.500000 0.500000 0.500000 0.707107\n");

    w(p, "mask.pgm", binary_pgm(3, 1, &[true; 3]));
    w(p, "feas.pgm", binary_pgm(3, 1, &[true; 3]));
    w(p, "qual.pgm", unit_pgm(3, 1, &[0.0; 3]));
    assert_eq!(objshell(&["eval-maps", "--pred-prefix", p, "--gt-prefix", g]).status.code(), Some(3));
}
