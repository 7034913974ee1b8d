//! Narrow-phase contact generation between convex boxes and discs.
//!
//! Box–box pairs use the separating-axis test with reference-face /
//! incident-face clipping, which yields at most two points: the deepest
//! point and, for face contacts, a secondary point at the other end of the
//! overlapping edge segment.

use arrayvec::ArrayVec;

use super::pose::{SE2Pose, Vec2};
use super::shape::{ConvexShape, ShapeKind};

/// Separation at or below which two shapes count as touching.
pub const CONTACT_EPS: f64 = 1e-9;

/// Penetration tolerated for collision-free membership.
pub const FREE_TOLERANCE: f64 = 1e-6;

/// Tie-break margin preferring shape `a` as the reference face.
const REFERENCE_BIAS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    /// Midpoint between the two surfaces, world frame.
    pub position: Vec2,
    /// Unit normal pointing from the first shape towards the second.
    pub normal: Vec2,
    pub penetration: f64,
    /// Signed gap along the normal (negative when overlapping).
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactManifold {
    pub pair: (usize, usize),
    pub points: ArrayVec<ContactPoint, 2>,
}

impl ContactManifold {
    pub fn max_penetration(&self) -> f64 {
        self.points.iter().map(|p| p.penetration).fold(0.0, f64::max)
    }

    pub fn normal(&self) -> Vec2 {
        self.points[0].normal
    }

    pub fn with_pair(mut self, a: usize, b: usize) -> Self {
        self.pair = (a, b);
        self
    }

    /// Swaps the roles of the two shapes (normals are negated).
    pub fn flipped(mut self) -> Self {
        self.pair = (self.pair.1, self.pair.0);
        for p in self.points.iter_mut() {
            p.normal = -p.normal;
        }
        self
    }
}

/// Contact between two posed shapes, or `None` when they are separated.
pub fn contact_query(
    shape_a: &ConvexShape,
    pose_a: &SE2Pose,
    shape_b: &ConvexShape,
    pose_b: &SE2Pose,
) -> Option<ContactManifold> {
    collide(shape_a, pose_a, shape_b, pose_b, CONTACT_EPS)
}

/// Like [`contact_query`] but also reports points whose gap is at most `margin`.
pub fn collide(
    shape_a: &ConvexShape,
    pose_a: &SE2Pose,
    shape_b: &ConvexShape,
    pose_b: &SE2Pose,
    margin: f64,
) -> Option<ContactManifold> {
    match (shape_a.kind, shape_b.kind) {
        (ShapeKind::Box { .. }, ShapeKind::Box { .. }) => {
            let pa = Poly::from_shape(shape_a, pose_a);
            let pb = Poly::from_shape(shape_b, pose_b);
            collide_polygons(&pa, &pb, margin)
        }
        (ShapeKind::Box { half_w, half_h }, ShapeKind::Disc { radius }) => {
            collide_box_disc(half_w, half_h, pose_a, radius, pose_b, margin)
        }
        (ShapeKind::Disc { radius }, ShapeKind::Box { half_w, half_h }) => {
            collide_box_disc(half_w, half_h, pose_b, radius, pose_a, margin).map(|m| m.flipped())
        }
        (ShapeKind::Disc { radius: ra }, ShapeKind::Disc { radius: rb }) => {
            collide_discs(pose_a.position(), ra, pose_b.position(), rb, margin)
        }
    }
}

/// Deepest penetration between two posed shapes (0 when separated or touching).
pub fn penetration_depth(
    shape_a: &ConvexShape,
    pose_a: &SE2Pose,
    shape_b: &ConvexShape,
    pose_b: &SE2Pose,
) -> f64 {
    if !bounding_overlap(shape_a, pose_a, shape_b, pose_b, 0.0) {
        return 0.0;
    }
    contact_query(shape_a, pose_a, shape_b, pose_b).map_or(0.0, |m| m.max_penetration())
}

/// Cheap bounding-circle rejection test.
#[inline]
pub fn bounding_overlap(
    shape_a: &ConvexShape,
    pose_a: &SE2Pose,
    shape_b: &ConvexShape,
    pose_b: &SE2Pose,
    margin: f64,
) -> bool {
    let r = shape_a.bounding_radius() + shape_b.bounding_radius() + margin;
    (pose_a.position() - pose_b.position()).norm_squared() <= r * r
}

fn single_point(position: Vec2, normal: Vec2, separation: f64) -> ContactManifold {
    let mut points = ArrayVec::new();
    points.push(ContactPoint {
        position,
        normal,
        penetration: (-separation).max(0.0),
        separation,
    });
    ContactManifold {
        pair: (0, 0),
        points,
    }
}

fn collide_discs(ca: Vec2, ra: f64, cb: Vec2, rb: f64, margin: f64) -> Option<ContactManifold> {
    let d = cb - ca;
    let dist = d.norm();
    let sep = dist - ra - rb;
    if sep > margin {
        return None;
    }
    let n = if dist > 1e-12 { d / dist } else { Vec2::new(1.0, 0.0) };
    let pa = ca + n * ra;
    let pb = cb - n * rb;
    Some(single_point((pa + pb) * 0.5, n, sep))
}

/// Box is shape `a`; the returned normal points from the box to the disc.
fn collide_box_disc(
    half_w: f64,
    half_h: f64,
    box_pose: &SE2Pose,
    radius: f64,
    disc_pose: &SE2Pose,
    margin: f64,
) -> Option<ContactManifold> {
    let c = box_pose.inverse_transform_point(&disc_pose.position());
    let inside = c.x.abs() <= half_w && c.y.abs() <= half_h;
    let (local_n, surface, dist_to_surface) = if inside {
        let dx = half_w - c.x.abs();
        let dy = half_h - c.y.abs();
        if dx <= dy {
            let s = if c.x >= 0.0 { 1.0 } else { -1.0 };
            (Vec2::new(s, 0.0), Vec2::new(s * half_w, c.y), -dx)
        } else {
            let s = if c.y >= 0.0 { 1.0 } else { -1.0 };
            (Vec2::new(0.0, s), Vec2::new(c.x, s * half_h), -dy)
        }
    } else {
        let closest = Vec2::new(c.x.clamp(-half_w, half_w), c.y.clamp(-half_h, half_h));
        let d = c - closest;
        let dist = d.norm();
        (d / dist, closest, dist)
    };
    let sep = dist_to_surface - radius;
    if sep > margin {
        return None;
    }
    let n = box_pose.rotate(&local_n);
    let on_box = box_pose.transform_point(&surface);
    let on_disc = disc_pose.position() - n * radius;
    Some(single_point((on_box + on_disc) * 0.5, n, sep))
}

struct Poly {
    verts: [Vec2; 4],
    normals: [Vec2; 4],
}

impl Poly {
    fn from_shape(shape: &ConvexShape, pose: &SE2Pose) -> Poly {
        let verts = shape.corners(pose).expect("box shape");
        let mut normals = [Vec2::zeros(); 4];
        for i in 0..4 {
            let e = verts[(i + 1) % 4] - verts[i];
            normals[i] = Vec2::new(e.y, -e.x).normalize();
        }
        Poly { verts, normals }
    }
}

/// Largest separation of `b` along the face normals of `a`, with the face index.
fn max_separation(a: &Poly, b: &Poly) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for i in 0..4 {
        let n = a.normals[i];
        let v = a.verts[i];
        let s = b
            .verts
            .iter()
            .map(|w| n.dot(&(w - v)))
            .fold(f64::INFINITY, f64::min);
        if s > best {
            best = s;
            best_i = i;
        }
    }
    (best, best_i)
}

fn clip_segment(seg: &[Vec2; 2], n: &Vec2, offset: f64) -> ArrayVec<Vec2, 2> {
    let mut out = ArrayVec::new();
    let d0 = n.dot(&seg[0]) - offset;
    let d1 = n.dot(&seg[1]) - offset;
    if d0 <= 0.0 {
        out.push(seg[0]);
    }
    if d1 <= 0.0 {
        out.push(seg[1]);
    }
    if d0 * d1 < 0.0 && out.len() < 2 {
        let t = d0 / (d0 - d1);
        out.push(seg[0] + (seg[1] - seg[0]) * t);
    }
    out
}

fn collide_polygons(a: &Poly, b: &Poly, margin: f64) -> Option<ContactManifold> {
    let (sep_a, edge_a) = max_separation(a, b);
    if sep_a > margin {
        return None;
    }
    let (sep_b, edge_b) = max_separation(b, a);
    if sep_b > margin {
        return None;
    }
    let (reference, incident, edge, flip) = if sep_b > sep_a + REFERENCE_BIAS {
        (b, a, edge_b, true)
    } else {
        (a, b, edge_a, false)
    };
    let n1 = reference.normals[edge];
    let inc_edge = (0..4)
        .min_by(|&i, &j| {
            n1.dot(&incident.normals[i])
                .partial_cmp(&n1.dot(&incident.normals[j]))
                .unwrap()
        })
        .unwrap();
    let seg = [incident.verts[inc_edge], incident.verts[(inc_edge + 1) % 4]];
    let v11 = reference.verts[edge];
    let v12 = reference.verts[(edge + 1) % 4];
    let tangent = (v12 - v11).normalize();
    let clipped = clip_segment(&seg, &(-tangent), -tangent.dot(&v11));
    if clipped.len() < 2 {
        return None;
    }
    let clipped = clip_segment(&[clipped[0], clipped[1]], &tangent, tangent.dot(&v12));
    if clipped.len() < 2 {
        return None;
    }
    let front = n1.dot(&v11);
    let normal = if flip { -n1 } else { n1 };
    let mut points: ArrayVec<ContactPoint, 2> = ArrayVec::new();
    for cp in clipped.iter() {
        let sep = n1.dot(cp) - front;
        if sep <= margin {
            points.push(ContactPoint {
                position: cp - n1 * (0.5 * sep),
                normal,
                penetration: (-sep).max(0.0),
                separation: sep,
            });
        }
    }
    if points.is_empty() {
        return None;
    }
    // Deepest point first.
    if points.len() == 2 && points[1].separation < points[0].separation {
        points.swap(0, 1);
    }
    Some(ContactManifold { pair: (0, 0), points })
}
