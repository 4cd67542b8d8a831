//! On-disk formats.
//!
//! - `.dmap`: `DMAP1\n<width> <height>\n` then row-major little-endian f32
//!   depths in meters, 0 for invalid pixels.
//! - camera: `key=value` lines with keys fx, fy, cx, cy, width, height.
//! - OBJ: `v` and `f` records only.
//! - PGM: binary P5, 8-bit or 16-bit big-endian.
//! - candidates: CSV with header `u,v,x,y,z,nx,ny,nz,roll,feasible,width,quality`.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use objshell_core::grasp::{GraspCandidate, GraspPose};
use objshell_core::{CameraModel, DepthImage, TriangleMesh, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DMAP_MAGIC: &str = "DMAP1";

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read(path)?;
    String::from_utf8(bytes).map_err(|_| Error::format(path, "not UTF-8 text"))
}

/// Writes through a buffered file; errors carry the path.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn encode_dmap(depth: &DepthImage) -> Vec<u8> {
    let (w, h) = depth.dims();
    let mut out = format!("{DMAP_MAGIC}\n{w} {h}\n").into_bytes();
    out.reserve(4 * w * h);
    for z in depth.data() {
        out.extend_from_slice(&z.to_le_bytes());
    }
    out
}

pub fn decode_dmap(path: &Path, bytes: &[u8]) -> Result<DepthImage> {
    let bad = |m: &str| Error::format(path, m.to_string());
    let (magic, rest) = split_line(bytes).ok_or_else(|| bad("missing DMAP1 header"))?;
    if magic != DMAP_MAGIC.as_bytes() {
        return Err(bad("missing DMAP1 header"));
    }
    let (dims, data) = split_line(rest).ok_or_else(|| bad("missing dimensions line"))?;
    let dims = std::str::from_utf8(dims).map_err(|_| bad("bad dimensions line"))?;
    let mut it = dims.split_ascii_whitespace().map(str::parse::<usize>);
    let (Some(Ok(w)), Some(Ok(h)), None) = (it.next(), it.next(), it.next()) else {
        return Err(bad("bad dimensions line"));
    };
    let expected = w.checked_mul(h).and_then(|n| n.checked_mul(4)).ok_or_else(|| bad("dimensions overflow"))?;
    if data.len() != expected {
        return Err(Error::format(
            path,
            format!("expected {expected} bytes of depth data, found {}", data.len()),
        ));
    }
    let values = data
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    DepthImage::new(w, h, values).map_err(|e| Error::format(path, e.to_string()))
}

fn split_line(bytes: &[u8]) -> Option<(&[u8], &[u8])> {
    let i = bytes.iter().position(|&b| b == b'\n')?;
    Some((&bytes[..i], &bytes[i + 1..]))
}

pub fn read_dmap(path: &Path) -> Result<DepthImage> {
    decode_dmap(path, &read(path)?)
}

pub fn write_dmap(path: &Path, depth: &DepthImage) -> Result<()> {
    write_bytes(path, &encode_dmap(depth))
}

pub fn encode_camera(cam: &CameraModel) -> String {
    format!(
        "fx={}\nfy={}\ncx={}\ncy={}\nwidth={}\nheight={}\n",
        cam.fx(),
        cam.fy(),
        cam.cx(),
        cam.cy(),
        cam.width(),
        cam.height()
    )
}

pub fn decode_camera(path: &Path, text: &str) -> Result<CameraModel> {
    const KEYS: [&str; 6] = ["fx", "fy", "cx", "cy", "width", "height"];
    let mut values = [None::<&str>; 6];
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: String| Error::format(path, format!("line {}: {m}", n + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
        let slot = KEYS
            .iter()
            .position(|k| *k == key.trim())
            .ok_or_else(|| bad(format!("unknown key `{}`", key.trim())))?;
        values[slot] = Some(value.trim());
    }
    let get = |i: usize| values[i].ok_or_else(|| Error::format(path, format!("missing key `{}`", KEYS[i])));
    let float = |i: usize| -> Result<f64> {
        get(i)?
            .parse()
            .map_err(|_| Error::format(path, format!("`{}` is not a number", KEYS[i])))
    };
    let int = |i: usize| -> Result<usize> {
        get(i)?
            .parse()
            .map_err(|_| Error::format(path, format!("`{}` is not a non-negative integer", KEYS[i])))
    };
    CameraModel::new(float(0)?, float(1)?, float(2)?, float(3)?, int(4)?, int(5)?)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_camera(path: &Path) -> Result<CameraModel> {
    decode_camera(path, &read_text(path)?)
}

pub fn write_camera(path: &Path, cam: &CameraModel) -> Result<()> {
    write_bytes(path, encode_camera(cam).as_bytes())
}

pub fn encode_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::with_capacity(32 * (mesh.vertices().len() + mesh.triangles().len()));
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

/// Parses `v` and `f` records; other records are ignored. Faces may use
/// `v/vt/vn` tokens and negative indices; polygons are fan-triangulated.
pub fn decode_obj(path: &Path, text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let bad = |m: &str| Error::format(path, format!("line {}: {m}", n + 1));
        let mut it = line.split_ascii_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for x in &mut c {
                    *x = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected three coordinates"))?;
                }
                vertices.push(Vec3::from(c));
            }
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| bad("bad face index"))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(bad("face index 0"));
                    };
                    if resolved < 0 || resolved > u32::MAX as i64 {
                        return Err(bad("face index out of range"));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(bad("face with fewer than three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    decode_obj(path, &read_text(path)?)
}

pub fn write_obj(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    write_bytes(path, encode_obj(mesh).as_bytes())
}

/// Gray raster with its maxval (255 or 65535).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub data: Vec<u16>,
}

pub fn encode_pgm(p: &Pgm) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", p.width, p.height, p.maxval).into_bytes();
    if p.maxval < 256 {
        out.extend(p.data.iter().map(|&v| v as u8));
    } else {
        for v in &p.data {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}

pub fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<Pgm> {
    let bad = |m: &str| Error::format(path, m.to_string());
    if !bytes.starts_with(b"P5") {
        return Err(bad("not a binary PGM (P5)"));
    }
    // Header: three integers separated by whitespace and comments, then one
    // whitespace byte.
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad PGM header"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("bad PGM header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(bad("PGM maxval out of range"));
    }
    let n = width * height;
    let body = &bytes[pos..];
    let data: Vec<u16> = if maxval < 256 {
        if body.len() != n {
            return Err(bad("PGM data length mismatch"));
        }
        body.iter().map(|&b| b as u16).collect()
    } else {
        if body.len() != 2 * n {
            return Err(bad("PGM data length mismatch"));
        }
        body.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    };
    if data.iter().any(|&v| v as usize > maxval) {
        return Err(bad("PGM sample exceeds maxval"));
    }
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        data,
    })
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    decode_pgm(path, &read(path)?)
}

pub fn write_pgm(path: &Path, p: &Pgm) -> Result<()> {
    write_bytes(path, &encode_pgm(p))
}

/// 0/255 mask image.
pub fn binary_pgm(width: usize, height: usize, bits: &[bool]) -> Pgm {
    Pgm {
        width,
        height,
        maxval: 255,
        data: bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
    }
}

/// Values in `[0, 1]` as `round(q·65535)`.
pub fn unit_pgm(width: usize, height: usize, values: &[f64]) -> Pgm {
    Pgm {
        width,
        height,
        maxval: 65535,
        data: values
            .iter()
            .map(|&q| (q.clamp(0.0, 1.0) * 65535.0).round() as u16)
            .collect(),
    }
}

/// Depth in whole millimeters, clamped to the 16-bit range.
pub fn depth_pgm(depth: &DepthImage) -> Pgm {
    let (width, height) = depth.dims();
    Pgm {
        width,
        height,
        maxval: 65535,
        data: depth
            .data()
            .iter()
            .map(|&z| (z as f64 * 1000.0).round().clamp(0.0, 65535.0) as u16)
            .collect(),
    }
}

/// Nonzero pixels.
pub fn pgm_bits(p: &Pgm) -> Vec<bool> {
    p.data.iter().map(|&v| v != 0).collect()
}

/// Samples scaled by maxval into `[0, 1]`.
pub fn pgm_unit(p: &Pgm) -> Vec<f64> {
    p.data.iter().map(|&v| v as f64 / p.maxval as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub u: usize,
    pub v: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
    pub roll: u8,
    pub feasible: u8,
    pub width: f64,
    pub quality: f64,
}

impl From<&GraspCandidate> for CandidateRow {
    fn from(c: &GraspCandidate) -> Self {
        let (a, n) = (c.pose.anchor(), c.pose.finger_axis());
        CandidateRow {
            u: c.pixel.0,
            v: c.pixel.1,
            x: a.x,
            y: a.y,
            z: a.z,
            nx: n.x,
            ny: n.y,
            nz: n.z,
            roll: c.pose.roll_index(),
            feasible: c.feasible as u8,
            width: c.width,
            quality: c.quality,
        }
    }
}

impl CandidateRow {
    pub fn to_candidate(&self) -> objshell_core::Result<GraspCandidate> {
        Ok(GraspCandidate {
            pose: GraspPose::new(
                Vec3::new(self.x, self.y, self.z),
                Vec3::new(self.nx, self.ny, self.nz),
                self.roll,
            )?,
            pixel: (self.u, self.v),
            feasible: self.feasible != 0,
            width: self.width,
            quality: self.quality,
            contact_points: 0,
        })
    }
}

const CANDIDATE_HEADER: [&str; 12] = ["u", "v", "x", "y", "z", "nx", "ny", "nz", "roll", "feasible", "width", "quality"];

pub fn encode_candidates(candidates: &[GraspCandidate]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CANDIDATE_HEADER).expect("in-memory writer");
    for c in candidates {
        w.serialize(CandidateRow::from(c)).expect("in-memory writer");
    }
    w.into_inner().expect("in-memory writer")
}

pub fn decode_candidates(path: &Path, bytes: &[u8]) -> Result<Vec<GraspCandidate>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| Error::format(path, e.to_string()))?;
    if header != CANDIDATE_HEADER.as_slice() {
        return Err(Error::format(path, "unexpected candidate header"));
    }
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CandidateRow>().enumerate() {
        let row = row.map_err(|e| Error::format(path, e.to_string()))?;
        let c = row
            .to_candidate()
            .map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))?;
        out.push(c);
    }
    Ok(out)
}

pub fn read_candidates(path: &Path) -> Result<Vec<GraspCandidate>> {
    decode_candidates(path, &read(path)?)
}

pub fn write_candidates(path: &Path, candidates: &[GraspCandidate]) -> Result<()> {
    write_bytes(path, &encode_candidates(candidates))
}
