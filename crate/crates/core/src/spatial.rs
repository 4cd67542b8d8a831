//! Exact spatial queries over 3D point sets: nearest neighbor and radius
//! search (k-d tree) and points near a segment (bounding-box tree).

use alloc::vec::Vec;

use crate::geometry::{Aabb, Vec3};

const LEAF: usize = 8;

/// Static k-d tree stored as a recursively median-partitioned index array.
/// Splitting axes cycle x, y, z by depth.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<u32>,
}

impl KdTree {
    pub fn new(points: Vec<Vec3>) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        build(&points, &mut order, 0);
        KdTree { points, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Index and squared distance of the closest point. Equidistant points
    /// resolve to the lowest index.
    pub fn nearest(&self, q: Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, u32::MAX);
        self.nearest_in(0, self.order.len(), 0, q, &mut best);
        Some((best.1 as usize, best.0))
    }

    fn nearest_in(&self, lo: usize, hi: usize, depth: usize, q: Vec3, best: &mut (f64, u32)) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                consider(best, self.points[i as usize].distance_squared(q), i);
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let i = self.order[mid];
        let p = self.points[i as usize];
        consider(best, p.distance_squared(q), i);
        let axis = depth % 3;
        let diff = q[axis] - p[axis];
        let (first, second) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.nearest_in(first.0, first.1, depth + 1, q, best);
        if diff * diff <= best.0 {
            self.nearest_in(second.0, second.1, depth + 1, q, best);
        }
    }

    /// Appends the indices of all points within `radius` of `q` (inclusive).
    pub fn within_radius(&self, q: Vec3, radius: f64, out: &mut Vec<u32>) {
        if !self.points.is_empty() {
            self.radius_in(0, self.order.len(), 0, q, radius * radius, out);
        }
    }

    fn radius_in(&self, lo: usize, hi: usize, depth: usize, q: Vec3, r2: f64, out: &mut Vec<u32>) {
        if hi - lo <= LEAF {
            out.extend(
                self.order[lo..hi]
                    .iter()
                    .filter(|&&i| self.points[i as usize].distance_squared(q) <= r2),
            );
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let i = self.order[mid];
        let p = self.points[i as usize];
        if p.distance_squared(q) <= r2 {
            out.push(i);
        }
        let axis = depth % 3;
        let diff = q[axis] - p[axis];
        if diff <= 0.0 || diff * diff <= r2 {
            self.radius_in(lo, mid, depth + 1, q, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.radius_in(mid + 1, hi, depth + 1, q, r2, out);
        }
    }
}

#[inline]
fn consider(best: &mut (f64, u32), d2: f64, i: u32) {
    if d2 < best.0 || (d2 == best.0 && i < best.1) {
        *best = (d2, i);
    }
}

fn build(points: &[Vec3], order: &mut [u32], depth: usize) {
    if order.len() <= LEAF {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut right[1..], depth + 1);
}

/// Points per leaf of a [`SegmentIndex`].
const SEGMENT_LEAF: usize = 16;

#[derive(Debug, Clone, Copy)]
struct BoxNode {
    bounds: Aabb,
    /// Leaf: first slot in `order`. Inner: left child index.
    first: u32,
    /// Leaf: point count. Inner: 0.
    count: u32,
    right: u32,
}

/// Bounding-box tree over points for "points within `r` of a segment"
/// queries.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    points: Vec<Vec3>,
    order: Vec<u32>,
    nodes: Vec<BoxNode>,
}

impl SegmentIndex {
    pub fn new(points: Vec<Vec3>) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            build_boxes(&points, &mut order, 0, &mut nodes);
        }
        SegmentIndex { points, order, nodes }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes.first().map_or(Aabb::EMPTY, |n| n.bounds)
    }

    /// Appends, in ascending order, the indices of all points whose distance
    /// to the segment `a`–`b` is at most `r`.
    pub fn near_segment(&self, a: Vec3, b: Vec3, r: f64, out: &mut Vec<u32>) {
        if self.nodes.is_empty() {
            return;
        }
        let start = out.len();
        let d = b - a;
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let pad = Vec3::new(r, r, r);
        let r2 = r * r;
        let mut stack = Vec::with_capacity(64);
        stack.push(0u32);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            // The box grown by r contains every point within r of the box.
            let grown = Aabb {
                min: node.bounds.min - pad,
                max: node.bounds.max + pad,
            };
            if !grown.contains(a) && grown.ray_entry(a, inv, 1.0).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.first as usize;
                for &k in &self.order[s..s + node.count as usize] {
                    if segment_distance_squared(self.points[k as usize], a, b) <= r2 {
                        out.push(k);
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.first);
            }
        }
        out[start..].sort_unstable();
    }
}

/// Squared distance from `p` to the segment `a`–`b`.
pub fn segment_distance_squared(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + d * t).distance_squared(p)
}

fn build_boxes(points: &[Vec3], order: &mut [u32], offset: usize, nodes: &mut Vec<BoxNode>) -> u32 {
    let bounds = Aabb::from_points(order.iter().map(|&i| points[i as usize]));
    let index = nodes.len() as u32;
    nodes.push(BoxNode {
        bounds,
        first: offset as u32,
        count: order.len() as u32,
        right: 0,
    });
    if order.len() <= SEGMENT_LEAF {
        return index;
    }
    let axis = bounds.longest_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (l, r) = order.split_at_mut(mid);
    let left = build_boxes(points, l, offset, nodes);
    let right = build_boxes(points, r, offset + mid, nodes);
    let node = &mut nodes[index as usize];
    node.first = left;
    node.count = 0;
    node.right = right;
    index
}
