//! Moore-neighbor boundary tracing on binary masks.

use alloc::vec;
use alloc::vec::Vec;

use crate::raster::Mask;

/// Neighbor offsets in clockwise order on screen (v grows downward),
/// starting west.
const DIRS: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];
const WEST: usize = 0;
const SOUTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    /// Outer boundary of a connected component.
    Outer,
    /// Boundary of a hole enclosed by a component.
    Hole,
}

/// Closed chain of mask pixels along a boundary. Consecutive pixels
/// (including last to first) are 8-neighbors. The masked region always lies
/// to the right of the direction of travel (counter-clockwise with `u` as the
/// first axis and `v` as the second), so outer contours have positive
/// signed area in `(u, v)` coordinates and hole contours negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryContour {
    pub pixels: Vec<(usize, usize)>,
    pub kind: ContourKind,
}

impl BoundaryContour {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Shoelace area in pixel units with `(u, v)` taken as `(x, y)`.
    pub fn signed_area(&self) -> f64 {
        let n = self.pixels.len();
        let mut twice = 0.0;
        for i in 0..n {
            let (x0, y0) = self.pixels[i];
            let (x1, y1) = self.pixels[(i + 1) % n];
            twice += x0 as f64 * y1 as f64 - x1 as f64 * y0 as f64;
        }
        twice / 2.0
    }

    /// Sum of step lengths (1 for axis steps, √2 for diagonal steps) around the loop.
    pub fn perimeter(&self) -> f64 {
        let n = self.pixels.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let (a, b) = (self.pixels[i], self.pixels[(i + 1) % n]);
                if a.0 != b.0 && a.1 != b.1 {
                    core::f64::consts::SQRT_2
                } else {
                    1.0
                }
            })
            .sum()
    }
}

/// One outer contour per 8-connected component, in raster order of each
/// component's first pixel. Tracing starts at that pixel.
pub fn trace_boundary(mask: &Mask) -> Vec<BoundaryContour> {
    cropped(mask, boundary_in)
}

fn boundary_in(mask: &Mask) -> Vec<BoundaryContour> {
    let (w, h) = mask.dims();
    let mut label = vec![false; w * h];
    let mut contours = Vec::new();
    let mut stack = Vec::new();
    for v in 0..h {
        for u in 0..w {
            if !mask.get(u, v) || label[v * w + u] {
                continue;
            }
            flood(mask, &mut label, (u, v), true, &mut stack);
            contours.push(BoundaryContour {
                pixels: moore_trace(mask, (u, v), WEST),
                kind: ContourKind::Outer,
            });
        }
    }
    contours
}

/// One contour per hole: a 4-connected background region that does not touch
/// the raster border. Each trace starts at the mask pixel directly above the
/// hole's first pixel in raster order.
pub fn trace_holes(mask: &Mask) -> Vec<BoundaryContour> {
    cropped(mask, holes_in)
}

fn holes_in(mask: &Mask) -> Vec<BoundaryContour> {
    let (w, h) = mask.dims();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    // Background touching the border is not a hole.
    for v in 0..h {
        for u in 0..w {
            let on_border = u == 0 || v == 0 || u + 1 == w || v + 1 == h;
            if on_border && !mask.get(u, v) && !seen[v * w + u] {
                flood(mask, &mut seen, (u, v), false, &mut stack);
            }
        }
    }
    let mut contours = Vec::new();
    for v in 0..h {
        for u in 0..w {
            if mask.get(u, v) || seen[v * w + u] {
                continue;
            }
            flood(mask, &mut seen, (u, v), false, &mut stack);
            contours.push(BoundaryContour {
                pixels: moore_trace(mask, (u, v - 1), SOUTH),
                kind: ContourKind::Hole,
            });
        }
    }
    contours
}

/// Outer contours followed by hole contours.
pub fn trace_all(mask: &Mask) -> Vec<BoundaryContour> {
    cropped(mask, |m| {
        let mut all = boundary_in(m);
        all.extend(holes_in(m));
        all
    })
}

/// Runs `trace` on the mask's bounding box grown by one pixel (clamped to
/// the raster) and shifts the result back. Contours are unchanged: every
/// pixel outside the box is background that reaches the raster border, so
/// only the object's neighborhood is ever visited.
fn cropped(mask: &Mask, trace: impl Fn(&Mask) -> Vec<BoundaryContour>) -> Vec<BoundaryContour> {
    let (w, h) = mask.dims();
    let (mut u0, mut v0, mut u1, mut v1) = (usize::MAX, usize::MAX, 0, 0);
    for (i, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
        let (u, v) = (i % w, i / w);
        u0 = u0.min(u);
        v0 = v0.min(v);
        u1 = u1.max(u);
        v1 = v1.max(v);
    }
    if u0 == usize::MAX {
        return Vec::new();
    }
    let (u0, v0) = (u0.saturating_sub(1), v0.saturating_sub(1));
    let (u1, v1) = ((u1 + 1).min(w - 1), (v1 + 1).min(h - 1));
    let sub = Mask::from_fn(u1 - u0 + 1, v1 - v0 + 1, |u, v| mask.get(u + u0, v + v0));
    let mut contours = trace(&sub);
    for c in &mut contours {
        for p in &mut c.pixels {
            *p = (p.0 + u0, p.1 + v0);
        }
    }
    contours
}

/// Marks the component of `seed`: 8-connected for foreground, 4-connected for background.
fn flood(mask: &Mask, seen: &mut [bool], seed: (usize, usize), foreground: bool, stack: &mut Vec<(usize, usize)>) {
    let (w, h) = mask.dims();
    stack.clear();
    stack.push(seed);
    seen[seed.1 * w + seed.0] = true;
    while let Some((u, v)) = stack.pop() {
        for (k, &(du, dv)) in DIRS.iter().enumerate() {
            if !foreground && k % 2 == 1 {
                continue;
            }
            let (nu, nv) = (u as isize + du, v as isize + dv);
            if nu < 0 || nv < 0 || nu as usize >= w || nv as usize >= h {
                continue;
            }
            let (nu, nv) = (nu as usize, nv as usize);
            if mask.get(nu, nv) == foreground && !seen[nv * w + nu] {
                seen[nv * w + nu] = true;
                stack.push((nu, nv));
            }
        }
    }
}

/// Moore-neighbor trace from `start` whose neighbor in direction `back` is
/// background. Stops when the walk is about to repeat its first move.
fn moore_trace(mask: &Mask, start: (usize, usize), back: usize) -> Vec<(usize, usize)> {
    let step = |p: (usize, usize), back: usize| -> Option<((usize, usize), usize)> {
        for i in 1..=8 {
            let d = (back + i) % 8;
            let (du, dv) = DIRS[d];
            let (qu, qv) = (p.0 as isize + du, p.1 as isize + dv);
            if mask.get_signed(qu, qv) {
                let (pu, pv) = DIRS[(d + 7) % 8];
                let prev = (p.0 as isize + pu, p.1 as isize + pv);
                let rel = (prev.0 - qu, prev.1 - qv);
                let nb = DIRS.iter().position(|&o| o == rel).expect("ring neighbors are adjacent");
                return Some(((qu as usize, qv as usize), nb));
            }
        }
        None
    };

    let mut contour = vec![start];
    let Some(first) = step(start, back) else {
        return contour;
    };
    let mut state = first;
    loop {
        let (p, b) = state;
        if p == start {
            match step(p, b) {
                Some(next) if next.0 == first.0 => break,
                _ => {}
            }
        }
        contour.push(p);
        state = step(p, b).expect("a traced pixel has a foreground neighbor");
    }
    contour
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> Mask {
        let h = rows.len();
        let w = rows[0].len();
        Mask::from_fn(w, h, |u, v| rows[v].as_bytes()[u] == b'#')
    }

    fn assert_closed_chain(c: &BoundaryContour) {
        let n = c.len();
        for i in 0..n {
            let (a, b) = (c.pixels[i], c.pixels[(i + 1) % n]);
            let du = a.0.abs_diff(b.0);
            let dv = a.1.abs_diff(b.1);
            assert!(du <= 1 && dv <= 1 && (du, dv) != (0, 0) || n == 1, "{a:?} -> {b:?}");
        }
    }

    #[test]
    fn filled_square_traces_perimeter() {
        let m = mask_from(&[".....", ".###.", ".###.", ".###.", "....."]);
        let c = trace_boundary(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(
            c[0].pixels,
            vec![(1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2)]
        );
        assert!(c[0].signed_area() > 0.0);
        assert_closed_chain(&c[0]);
    }

    #[test]
    fn square_at_raster_corner() {
        let m = mask_from(&["###", "###", "###"]);
        assert_eq!(trace_boundary(&m)[0].len(), 8);
    }

    #[test]
    fn two_disjoint_squares() {
        let m = mask_from(&["##...", "##...", "...##", "...##"]);
        let c = trace_boundary(&m);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|c| c.len() == 4));
    }

    #[test]
    fn diagonal_touch_is_one_component() {
        let m = mask_from(&["##..", "##..", "..##", "..##"]);
        let c = trace_boundary(&m);
        assert_eq!(c.len(), 1);
        assert_closed_chain(&c[0]);
        // The pinch pixels (1,1) and (2,2) are visited twice.
        assert_eq!(c[0].len(), 10);
    }

    #[test]
    fn single_pixel_and_line() {
        assert_eq!(trace_boundary(&mask_from(&["...", ".#.", "..."]))[0].pixels, vec![(1, 1)]);
        let line = trace_boundary(&mask_from(&["####"]));
        assert_eq!(line[0].pixels, vec![(0, 0), (1, 0), (2, 0), (3, 0), (2, 0), (1, 0)]);
    }

    #[test]
    fn ring_has_one_hole_with_opposite_orientation() {
        let m = mask_from(&[".......", ".#####.", ".#...#.", ".#...#.", ".#####.", "......."]);
        let outer = trace_boundary(&m);
        let holes = trace_holes(&m);
        assert_eq!(outer.len(), 1);
        assert_eq!(holes.len(), 1);
        assert!(outer[0].signed_area() > 0.0);
        assert!(holes[0].signed_area() < 0.0);
        assert_eq!(holes[0].pixels[0], (2, 1));
        assert_closed_chain(&holes[0]);
        // The four corner pixels touch the hole only diagonally and are cut.
        assert_eq!(holes[0].len(), 10);
    }

    #[test]
    fn background_open_to_border_is_not_a_hole() {
        let m = mask_from(&["#####", "#...#", "#...."]);
        assert!(trace_holes(&m).is_empty());
    }

    #[test]
    fn disc_perimeter_close_to_circumference() {
        let r = 50.0;
        let m = Mask::from_fn(128, 128, |u, v| {
            let (x, y) = (u as f64 - 64.0, v as f64 - 64.0);
            x * x + y * y <= r * r
        });
        let c = trace_boundary(&m);
        assert_eq!(c.len(), 1);
        assert_closed_chain(&c[0]);
        // Analytic oracle: a circle of radius r walked with the contour's
        // own mean step length takes 2πr / step steps.
        let steps = c[0].len() as f64;
        let avg_step = c[0].perimeter() / steps;
        let expected = 2.0 * core::f64::consts::PI * r / avg_step;
        assert!((steps - expected).abs() / expected < 0.10, "{steps} vs {expected}");
    }

    #[test]
    fn cropping_does_not_change_contours() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for case in 0..200 {
            let (w, h) = (rng.random_range(1..24), rng.random_range(1..24));
            // Sparse blobs inside a random window, sometimes reaching the border.
            let (a, b) = (rng.random_range(0..w), rng.random_range(0..h));
            let (c, d) = (rng.random_range(a..w), rng.random_range(b..h));
            let p = rng.random_range(0.3..0.9);
            let m = Mask::from_fn(w, h, |u, v| (a..=c).contains(&u) && (b..=d).contains(&v) && rng.random_bool(p));
            let mut full = boundary_in(&m);
            full.extend(holes_in(&m));
            assert_eq!(trace_all(&m), full, "case {case}");
            assert_eq!(trace_boundary(&m), boundary_in(&m), "case {case}");
            assert_eq!(trace_holes(&m), holes_in(&m), "case {case}");
        }
    }
}
