use std::path::Path;

use objshell::formats::*;
use objshell::Error;
use objshell_core::grasp::{GraspCandidate, GraspPose};
use objshell_core::{CameraModel, DepthImage, TriangleMesh, Vec3};

fn p() -> &'static Path {
    Path::new("mem")
}

#[test]
fn dmap_layout_and_round_trip() {
    let d = DepthImage::new(3, 2, vec![0.0, 0.5, 1.25, 0.1, 0.0, 7.0]).unwrap();
    let bytes = encode_dmap(&d);
    assert!(bytes.starts_with(b"DMAP1\n3 2\n"));
    assert_eq!(bytes.len(), 10 + 6 * 4);
    // Second value, little-endian.
    assert_eq!(&bytes[14..18], &0.5f32.to_le_bytes());
    assert_eq!(decode_dmap(p(), &bytes).unwrap(), d);
}

#[test]
fn dmap_rejects_bad_input() {
    let d = DepthImage::new(2, 2, vec![1.0; 4]).unwrap();
    let bytes = encode_dmap(&d);
    assert!(matches!(decode_dmap(p(), &bytes[..bytes.len() - 1]), Err(Error::Format { .. })));
    assert!(matches!(decode_dmap(p(), b"DMAP2\n1 1\n\0\0\0\0"), Err(Error::Format { .. })));
    assert!(matches!(decode_dmap(p(), b"DMAP1\n1\n\0\0\0\0"), Err(Error::Format { .. })));
    let mut nan = b"DMAP1\n1 1\n".to_vec();
    nan.extend_from_slice(&f32::NAN.to_le_bytes());
    assert!(matches!(decode_dmap(p(), &nan), Err(Error::Format { .. })));
}

#[test]
fn camera_round_trip_and_errors() {
    let cam = CameraModel::new(612.5, 600.25, 319.5, 240.0, 640, 480).unwrap();
    let text = encode_camera(&cam);
    assert_eq!(text, "fx=612.5\nfy=600.25\ncx=319.5\ncy=240\nwidth=640\nheight=480\n");
    assert_eq!(decode_camera(p(), &text).unwrap(), cam);
    let spaced = "# comment\n width = 4 \nheight=3\nfx=1\nfy=1\ncx=2\ncy=1.5\n";
    assert_eq!(decode_camera(p(), spaced).unwrap().width(), 4);
    assert!(decode_camera(p(), "fx=1\nfy=1\ncx=2\ncy=1\nwidth=4\n").is_err());
    assert!(decode_camera(p(), "fx=1\nfy=1\ncx=2\ncy=1\nwidth=4\nheight=3\nk1=0\n").is_err());
    assert!(decode_camera(p(), "fx=-1\nfy=1\ncx=2\ncy=1\nwidth=4\nheight=3\n").is_err());
}

#[test]
fn obj_round_trip_is_exact() {
    let m = TriangleMesh::new(
        vec![
            Vec3::new(0.1, -0.2, 0.75),
            Vec3::new(1.0 / 3.0, 0.0, 0.7500000000000001),
            Vec3::new(0.0, 1e-17, 0.8),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let text = encode_obj(&m);
    assert_eq!(decode_obj(p(), &text).unwrap(), m);
}

#[test]
fn obj_polygons_and_relative_indices() {
    let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -2 -1\n";
    let m = decode_obj(p(), text).unwrap();
    assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3], [0, 2, 3]]);
    assert!(decode_obj(p(), "v 0 0 0\nf 1 2 3\n").is_err());
    assert!(decode_obj(p(), "v 0 0\n").is_err());
    assert!(decode_obj(p(), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").is_err());
}

#[test]
fn pgm_round_trips_in_both_depths() {
    let eight = binary_pgm(3, 1, &[true, false, true]);
    let bytes = encode_pgm(&eight);
    assert_eq!(bytes, b"P5\n3 1\n255\n\xff\x00\xff");
    assert_eq!(decode_pgm(p(), &bytes).unwrap(), eight);

    let q = unit_pgm(2, 1, &[1.0, 0.5]);
    assert_eq!(q.data, vec![65535, 32768]);
    let bytes = encode_pgm(&q);
    // Big-endian samples.
    assert_eq!(&bytes[bytes.len() - 4..], &[0xff, 0xff, 0x80, 0x00]);
    assert_eq!(decode_pgm(p(), &bytes).unwrap(), q);

    let commented = b"P5\n# made by hand\n2 1\n255\n\x01\x02";
    assert_eq!(decode_pgm(p(), commented).unwrap().data, vec![1, 2]);
    assert!(decode_pgm(p(), b"P2\n1 1\n255\n1").is_err());
    assert!(decode_pgm(p(), b"P5\n2 1\n255\n\x01").is_err());
}

#[test]
fn depth_pgm_is_clamped_millimeters() {
    let d = DepthImage::new(3, 1, vec![0.75, 0.0, 70.0]).unwrap();
    assert_eq!(depth_pgm(&d).data, vec![750, 0, 65535]);
}

#[test]
fn candidates_round_trip() {
    let axis = Vec3::new(0.3, -0.4, -1.0).normalized().unwrap();
    let c = GraspCandidate {
        pose: GraspPose::new(Vec3::new(0.01, 0.02, 0.7), axis, 5).unwrap(),
        pixel: (12, 34),
        feasible: true,
        width: 0.0412,
        quality: 0.625,
        contact_points: 0,
    };
    let bytes = encode_candidates(&[c]);
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with("u,v,x,y,z,nx,ny,nz,roll,feasible,width,quality\n12,34,"));
    assert_eq!(decode_candidates(p(), &bytes).unwrap(), vec![c]);

    let empty = encode_candidates(&[]);
    assert_eq!(empty, b"u,v,x,y,z,nx,ny,nz,roll,feasible,width,quality\n");
    assert!(decode_candidates(p(), &empty).unwrap().is_empty());
    assert!(decode_candidates(p(), b"a,b\n1,2\n").is_err());
}
