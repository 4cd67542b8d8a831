use super::*;
use crate::primitives::{box_mesh, cylinder, icosphere};
use crate::raycast::extract_shell;
use crate::spatial::KdTree;
use alloc::vec;

fn cam() -> CameraModel {
    CameraModel::vga()
}

fn small_cam(w: usize, h: usize) -> CameraModel {
    CameraModel::new(100.0, 100.0, w as f64 / 2.0, h as f64 / 2.0, w, h).unwrap()
}

fn face_on_box() -> TriangleMesh {
    box_mesh(Vec3::new(0.0, 0.0, 0.75), Vec3::new(0.1, 0.1, 0.06), 1)
}

#[test]
fn pointcloud_has_two_points_per_valid_pixel() {
    let c = small_cam(20, 10);
    let entry = DepthImage::from_fn(20, 10, |u, v| (u < 10 && v < 10).then_some(0.5));
    let exit = DepthImage::from_fn(20, 10, |u, v| (u < 10 && v < 10).then_some(0.6));
    let s = ObjectShell::new(entry, exit, c).unwrap();
    assert_eq!(s.valid_count(), 100);
    let pc = shell_to_pointcloud(&s);
    assert_eq!(pc.len(), 200);
    assert!(pc.points()[..100].iter().all(|p| p.z == 0.5));
    assert!(pc.points()[100..].iter().all(|p| (p.z - 0.6).abs() < 1e-7));
}

#[test]
fn empty_shell_gives_empty_cloud_and_stitch_error() {
    let c = small_cam(8, 8);
    let e = DepthImage::empty(8, 8);
    let s = ObjectShell::new(e.clone(), e, c).unwrap();
    assert!(shell_to_pointcloud(&s).is_empty());
    assert_eq!(stitch_shell(&s, DEFAULT_DISCONTINUITY), Err(Error::EmptyShell));
}

#[test]
fn sphere_shell_points_lie_on_sphere() {
    let center = Vec3::new(0.0, 0.0, 0.75);
    let s = extract_shell(&icosphere(center, 0.05, 5), &cam());
    let pc = shell_to_pointcloud(&s);
    assert_eq!(pc.len(), 2 * s.valid_count());
    // The icosphere sits inside the analytic sphere by its chord sagitta.
    let worst = pc.points().iter().map(|p| (p.distance(center) - 0.05).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn full_layer_triangle_count() {
    let (w, h) = (13, 9);
    let layer = DepthImage::from_fn(w, h, |u, v| Some(0.5 + 0.001 * u as f64 + 0.0005 * v as f64));
    let m = triangulate_layer(&layer, &small_cam(w, h), DEFAULT_DISCONTINUITY);
    assert_eq!(m.triangles().len(), 2 * (w - 1) * (h - 1));
    assert_eq!(m.vertices().len(), w * h);
}

#[test]
fn single_block_gives_two_triangles_with_down_right_split() {
    let layer = DepthImage::from_fn(4, 4, |u, v| (1..3).contains(&u).then_some(()).and((1..3).contains(&v).then_some(0.5)));
    let m = triangulate_layer(&layer, &small_cam(4, 4), DEFAULT_DISCONTINUITY);
    // Vertices in raster order: TL=0, TR=1, BL=2, BR=3.
    assert_eq!(m.triangles(), &[[0, 3, 1], [0, 2, 3]]);
}

#[test]
fn layer_windings_face_the_right_way() {
    let layer = DepthImage::from_fn(6, 6, |_, _| Some(0.5));
    let c = small_cam(6, 6);
    let normal_z = |m: &TriangleMesh| {
        (0..m.triangles().len())
            .map(|t| {
                let [a, b, c] = m.corners(t);
                (b - a).cross(c - a).z
            })
            .collect::<Vec<_>>()
    };
    assert!(normal_z(&triangulate_layer_as(&layer, &c, 0.02, Layer::Entry)).iter().all(|&z| z < 0.0));
    assert!(normal_z(&triangulate_layer_as(&layer, &c, 0.02, Layer::Exit)).iter().all(|&z| z > 0.0));
}

#[test]
fn three_valid_block_gives_one_triangle() {
    let layer = DepthImage::from_fn(2, 2, |u, v| (u + v < 2).then_some(0.5));
    let m = triangulate_layer(&layer, &small_cam(2, 2), DEFAULT_DISCONTINUITY);
    assert_eq!(m.triangles().len(), 1);
}

#[test]
fn step_edge_is_not_bridged() {
    // Two plateaus split at u = 10 with a 5 cm step.
    let (w, h) = (20, 8);
    let layer = DepthImage::from_fn(w, h, |u, _| Some(if u < 10 { 0.5 } else { 0.55 }));
    let m = triangulate_layer(&layer, &small_cam(w, h), DEFAULT_DISCONTINUITY);
    let crossing = m
        .triangles()
        .iter()
        .filter(|t| {
            let zs = t.map(|i| m.vertices()[i as usize].z);
            zs.iter().any(|&z| z < 0.52) && zs.iter().any(|&z| z > 0.52)
        })
        .count();
    assert_eq!(crossing, 0);
    // Everything else is still meshed: one column of blocks is lost.
    assert_eq!(m.triangles().len(), 2 * (w - 2) * (h - 1));
    // A small step below the threshold is bridged.
    let soft = DepthImage::from_fn(w, h, |u, _| Some(if u < 10 { 0.5 } else { 0.51 }));
    assert_eq!(
        triangulate_layer(&soft, &small_cam(w, h), DEFAULT_DISCONTINUITY).triangles().len(),
        2 * (w - 1) * (h - 1)
    );
}

fn slab_shell(mask: impl Fn(usize, usize) -> bool, w: usize, h: usize) -> ObjectShell {
    let e = DepthImage::from_fn(w, h, |u, v| mask(u, v).then_some(0.5));
    let x = DepthImage::from_fn(w, h, |u, v| mask(u, v).then_some(0.52));
    ObjectShell::new(e, x, small_cam(w, h)).unwrap()
}

#[test]
fn stitched_slab_is_closed_with_analytic_volume() {
    let s = slab_shell(|u, v| (2..12).contains(&u) && (3..9).contains(&v), 16, 12);
    let m = stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap();
    assert!(m.edge_report().is_closed(), "{:?}", m.edge_report());
    // Frustum oracle: the pixel lattice spans 9×5 pixel steps at both depths.
    let area = |z: f64| (9.0 * z / 100.0) * (5.0 * z / 100.0);
    let (a0, a1) = (area(0.5), area(0.52));
    let frustum = 0.02 / 3.0 * (a0 + a1 + libm::sqrt(a0 * a1));
    let (vol, _) = mesh_volume_centroid(&m).unwrap();
    assert!((vol - frustum).abs() < 1e-12 * 1e3, "{vol} vs {frustum}");
    assert!(m.triangles().len() <= stitch_triangle_bound(&s));
}

#[test]
fn disc_and_ring_masks_stitch_closed() {
    let disc = slab_shell(
        |u, v| {
            let (x, y) = (u as f64 - 32.0, v as f64 - 30.0);
            x * x + y * y <= 400.0
        },
        64,
        60,
    );
    let m = stitch_shell(&disc, DEFAULT_DISCONTINUITY).unwrap();
    assert!(m.edge_report().is_closed(), "{:?}", m.edge_report());
    assert!(mesh_volume_centroid(&m).unwrap().0 > 0.0);

    let ring = slab_shell(
        |u, v| {
            let (x, y) = (u as f64 - 32.0, v as f64 - 30.0);
            let r2 = x * x + y * y;
            (64.0..=400.0).contains(&r2)
        },
        64,
        60,
    );
    let m = stitch_shell(&ring, DEFAULT_DISCONTINUITY).unwrap();
    assert!(m.edge_report().is_closed(), "{:?}", m.edge_report());
    let (ring_vol, _) = mesh_volume_centroid(&m).unwrap();
    let (disc_vol, _) = mesh_volume_centroid(&stitch_shell(&disc, DEFAULT_DISCONTINUITY).unwrap()).unwrap();
    assert!(ring_vol > 0.0 && ring_vol < disc_vol);
}

#[test]
fn stitched_box_volume_and_centroid() {
    let s = extract_shell(&face_on_box(), &cam());
    let m = stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap();
    assert!(m.edge_report().is_closed(), "{:?}", m.edge_report());
    let (vol, c) = mesh_volume_centroid(&m).unwrap();
    assert!((vol - 6.0e-4).abs() / 6.0e-4 < 0.02, "{vol}");
    assert!(c.distance(Vec3::new(0.0, 0.0, 0.75)) < 0.005, "{c:?}");
    assert!(m.triangles().len() <= stitch_triangle_bound(&s));
}

#[test]
fn stitched_vertices_are_backprojected_shell_pixels() {
    let s = extract_shell(&face_on_box(), &CameraModel::scaled_vga(0.25));
    let m = stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap();
    assert_eq!(m.vertices(), shell_to_pointcloud(&s).points());
    let bounds = shell_to_pointcloud(&s).bounds();
    let (vol, c) = mesh_volume_centroid(&m).unwrap();
    assert!(vol > 0.0 && bounds.contains(c));
}

#[test]
fn stitched_sphere_close_to_surface() {
    let center = Vec3::new(0.0, 0.0, 0.75);
    let s = extract_shell(&icosphere(center, 0.05, 5), &cam());
    let m = stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap();
    // Every stitched vertex is a shell sample, so distance to the analytic
    // sphere bounds one direction of the Chamfer term.
    let worst = m.vertices().iter().map(|p| (p.distance(center) - 0.05).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3);
}

#[test]
fn cylinder_centroid_on_axis() {
    let mesh = cylinder(Vec3::new(0.01, 0.0, 0.7), 0.04, 0.12, 64, 4, 4);
    let s = extract_shell(&mesh, &cam());
    let m = stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap();
    let (_, c) = mesh_volume_centroid(&m).unwrap();
    // Axis runs along camera y through (0.01, *, 0.7); the shell only sees
    // the silhouette band, which is symmetric about the axis in x.
    assert!((c.x - 0.01).abs() < 0.005, "{c:?}");
}

#[test]
fn unit_cube_volume_and_translation() {
    let cube = box_mesh(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), 3);
    let (vol, c) = mesh_volume_centroid(&cube).unwrap();
    assert!((vol - 1.0).abs() < 1e-12);
    assert!(c.norm() < 1e-12);
    let moved = box_mesh(Vec3::new(0.0, 0.0, 0.75), Vec3::new(1.0, 1.0, 1.0), 3);
    let (_, c) = mesh_volume_centroid(&moved).unwrap();
    assert!(c.distance(Vec3::new(0.0, 0.0, 0.75)) < 1e-12);
}

#[test]
fn flat_mesh_has_degenerate_volume_and_surface_fallback() {
    let m = TriangleMesh::new(
        vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 1.0), Vec3::new(1.0, 1.0, 1.0)],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap();
    assert!(matches!(mesh_volume_centroid(&m), Err(Error::DegenerateVolume { .. })));
    let c = surface_centroid(&m).unwrap();
    assert!(c.distance(Vec3::new(0.5, 0.5, 1.0)) < 1e-12);
}

#[test]
fn triangle_count_scales_linearly() {
    let mesh = face_on_box();
    let counts: Vec<(usize, usize)> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&k| {
            let s = extract_shell(&mesh, &CameraModel::scaled_vga(k));
            (s.valid_count(), stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap().triangles().len())
        })
        .collect();
    for pair in counts.windows(2) {
        let (n0, t0) = pair[0];
        let (n1, t1) = pair[1];
        let per_doubling = libm::exp2(libm::log2(t1 as f64 / t0 as f64) / libm::log2(n1 as f64 / n0 as f64));
        assert!((1.9..=2.2).contains(&per_doubling), "{counts:?}");
    }
}

#[test]
fn stitch_is_near_point_cloud_everywhere() {
    // Every triangle centroid lies close to some shell sample.
    let s = extract_shell(&face_on_box(), &CameraModel::scaled_vga(0.5));
    let m = stitch_shell(&s, DEFAULT_DISCONTINUITY).unwrap();
    let tree = KdTree::new(shell_to_pointcloud(&s).points().to_vec());
    for t in 0..m.triangles().len() {
        let [a, b, c] = m.corners(t);
        let (_, d2) = tree.nearest((a + b + c) / 3.0).unwrap();
        assert!(libm::sqrt(d2) < 0.07);
    }
}
