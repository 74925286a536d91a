//! Coordinate transforms between the unfolded 4x3 cube map, the cube surface
//! in 3-D, and the sphere inscribed in that cube.
//!
//! Unfold coordinates have the top-left pixel at `(0, 0)`; integer coordinates
//! are pixel centers. Cube and sphere coordinates are in pixels with the cube
//! center at the origin, `z` pointing up (TOP) and `y` pointing forward (FRO).
//!
//! Canvas placement (column, row) in units of one face:
//!
//! ```text
//!   TOP  .    .    .
//!   FRO  RIG  REA  LEF
//!   BOT  .    .    .
//! ```

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Relative tolerance (times face width) used for surface membership and for
/// detecting edge/corner ties.
const SURFACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceId {
    Top,
    Fro,
    Bot,
    Rig,
    Rea,
    Lef,
}

impl FaceId {
    /// All faces in tie-break priority order.
    pub const ALL: [FaceId; 6] = [
        FaceId::Top,
        FaceId::Fro,
        FaceId::Bot,
        FaceId::Rig,
        FaceId::Rea,
        FaceId::Lef,
    ];

    /// Position of the face on the canvas as (column, row).
    pub fn grid_position(self) -> (usize, usize) {
        match self {
            FaceId::Top => (0, 0),
            FaceId::Fro => (0, 1),
            FaceId::Bot => (0, 2),
            FaceId::Rig => (1, 1),
            FaceId::Rea => (2, 1),
            FaceId::Lef => (3, 1),
        }
    }

    fn from_grid_position(col: usize, row: usize) -> Option<FaceId> {
        match (col, row) {
            (0, 0) => Some(FaceId::Top),
            (0, 1) => Some(FaceId::Fro),
            (0, 2) => Some(FaceId::Bot),
            (1, 1) => Some(FaceId::Rig),
            (2, 1) => Some(FaceId::Rea),
            (3, 1) => Some(FaceId::Lef),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FaceId::Top => "TOP",
            FaceId::Fro => "FRO",
            FaceId::Bot => "BOT",
            FaceId::Rig => "RIG",
            FaceId::Rea => "REA",
            FaceId::Lef => "LEF",
        }
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Half-open rectangle `[x0, x0 + width) x [y0, y0 + height)` in unfold pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceRect {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl FaceRect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 as f64
            && x < (self.x0 + self.width) as f64
            && y >= self.y0 as f64
            && y < (self.y0 + self.height) as f64
    }
}

/// Face dimensions of a 4x3 unfolded cube map. Faces are square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeLayout {
    face_width: usize,
    face_height: usize,
}

impl CubeLayout {
    pub fn new(face_width: usize, face_height: usize) -> Result<Self> {
        if face_width != face_height {
            return Err(Error::InvalidLayout(format!(
                "faces must be square, got {face_width}x{face_height}"
            )));
        }
        if face_width < 8 {
            return Err(Error::InvalidLayout(format!(
                "face size must be at least 8, got {face_width}"
            )));
        }
        Ok(CubeLayout {
            face_width,
            face_height,
        })
    }

    pub fn square(face_size: usize) -> Result<Self> {
        Self::new(face_size, face_size)
    }

    pub fn face_width(&self) -> usize {
        self.face_width
    }

    pub fn face_height(&self) -> usize {
        self.face_height
    }

    pub fn canvas_width(&self) -> usize {
        4 * self.face_width
    }

    pub fn canvas_height(&self) -> usize {
        3 * self.face_height
    }

    /// Sphere radius, `faceWidth / 2`.
    pub fn radius(&self) -> f64 {
        self.face_width as f64 / 2.0
    }

    pub fn face_rect(&self, face: FaceId) -> FaceRect {
        let (col, row) = face.grid_position();
        FaceRect {
            x0: col * self.face_width,
            y0: row * self.face_height,
            width: self.face_width,
            height: self.face_height,
        }
    }

    /// Face whose rectangle contains the integer pixel `(x, y)`.
    pub fn face_of_pixel(&self, x: usize, y: usize) -> Option<FaceId> {
        FaceId::from_grid_position(x / self.face_width, y / self.face_height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnfoldPoint {
    pub x: f64,
    pub y: f64,
}

impl UnfoldPoint {
    pub fn new(x: f64, y: f64) -> Self {
        UnfoldPoint { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CubePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CubePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        CubePoint { x, y, z }
    }

    fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

/// A point in the sphere's 3-D frame. Transported points are generally off the
/// sphere, so this type is also used for arbitrary 3-D vectors there.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        SpherePoint { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for SpherePoint {
    type Output = SpherePoint;
    fn add(self, rhs: SpherePoint) -> SpherePoint {
        SpherePoint::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for SpherePoint {
    type Output = SpherePoint;
    fn sub(self, rhs: SpherePoint) -> SpherePoint {
        SpherePoint::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for SpherePoint {
    type Output = SpherePoint;
    fn mul(self, k: f64) -> SpherePoint {
        SpherePoint::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Face containing `p`, or `None` for the corner holes and points off the canvas.
pub fn face_of(p: UnfoldPoint, layout: &CubeLayout) -> Option<FaceId> {
    if !(p.x.is_finite() && p.y.is_finite()) || p.x < 0.0 || p.y < 0.0 {
        return None;
    }
    let col = (p.x / layout.face_width as f64).floor();
    let row = (p.y / layout.face_height as f64).floor();
    if col > 3.0 || row > 2.0 {
        return None;
    }
    FaceId::from_grid_position(col as usize, row as usize)
}

fn unfold_to_cube_on(face: FaceId, p: UnfoldPoint, layout: &CubeLayout) -> CubePoint {
    let w = layout.face_width as f64;
    let h = layout.face_height as f64;
    let (x, y) = (p.x, p.y);
    match face {
        FaceId::Top => CubePoint::new(x - w / 2.0, y - h / 2.0, h / 2.0),
        FaceId::Fro => CubePoint::new(x - w / 2.0, h / 2.0, 1.5 * h - y),
        FaceId::Bot => CubePoint::new(x - w / 2.0, 2.5 * h - y, -h / 2.0),
        FaceId::Rig => CubePoint::new(h / 2.0, 1.5 * w - x, 1.5 * h - y),
        FaceId::Rea => CubePoint::new(2.5 * w - x, -h / 2.0, 1.5 * h - y),
        FaceId::Lef => CubePoint::new(-h / 2.0, x - 3.5 * w, 1.5 * h - y),
    }
}

fn cube_to_unfold_on(face: FaceId, c: CubePoint, layout: &CubeLayout) -> UnfoldPoint {
    let w = layout.face_width as f64;
    let h = layout.face_height as f64;
    match face {
        FaceId::Top => UnfoldPoint::new(c.x + w / 2.0, c.y + h / 2.0),
        FaceId::Fro => UnfoldPoint::new(c.x + w / 2.0, 1.5 * h - c.z),
        FaceId::Bot => UnfoldPoint::new(c.x + w / 2.0, 2.5 * h - c.y),
        FaceId::Rig => UnfoldPoint::new(1.5 * w - c.y, 1.5 * h - c.z),
        FaceId::Rea => UnfoldPoint::new(2.5 * w - c.x, 1.5 * h - c.z),
        FaceId::Lef => UnfoldPoint::new(c.y + 3.5 * w, 1.5 * h - c.z),
    }
}

pub fn unfold_to_cube(p: UnfoldPoint, layout: &CubeLayout) -> Result<CubePoint> {
    let face = face_of(p, layout).ok_or(Error::NotOnFace { x: p.x, y: p.y })?;
    Ok(unfold_to_cube_on(face, p, layout))
}

/// Inverse of [`unfold_to_cube`].
///
/// The face is picked by the dominant signed coordinate. On edges and corners
/// several faces qualify; they are tried in the order TOP, FRO, BOT, RIG, REA,
/// LEF and the first one whose unfold image falls inside its own half-open
/// rectangle wins. If none does (a closed far edge such as TOP's right border),
/// the first qualifying face is used.
pub fn cube_to_unfold(c: CubePoint, layout: &CubeLayout) -> Result<(FaceId, UnfoldPoint)> {
    cube_to_unfold_near(c, layout, None)
}

/// Like [`cube_to_unfold`], but on an edge or corner `preferred` wins over
/// the priority order when it qualifies and its image lies inside its
/// rectangle. Edge points have two valid unfold images (e.g. the top row of
/// REA coincides with the top row of TOP); the hint keeps a point on the face
/// it came from.
pub fn cube_to_unfold_near(
    c: CubePoint,
    layout: &CubeLayout,
    preferred: Option<FaceId>,
) -> Result<(FaceId, UnfoldPoint)> {
    let half = layout.radius();
    let tol = SURFACE_TOL * layout.face_width as f64;
    let m = c.max_abs();
    if !m.is_finite() || (m - half).abs() > tol {
        return Err(Error::NotOnSurface {
            x: c.x,
            y: c.y,
            z: c.z,
        });
    }
    let edge = half - tol;
    let mut fallback = None;
    for face in preferred.into_iter().chain(FaceId::ALL) {
        let qualifies = match face {
            FaceId::Top => c.z >= edge,
            FaceId::Fro => c.y >= edge,
            FaceId::Bot => c.z <= -edge,
            FaceId::Rig => c.x >= edge,
            FaceId::Rea => c.y <= -edge,
            FaceId::Lef => c.x <= -edge,
        };
        if !qualifies {
            continue;
        }
        let p = cube_to_unfold_on(face, c, layout);
        if layout.face_rect(face).contains(p.x, p.y) {
            return Ok((face, p));
        }
        fallback.get_or_insert((face, p));
    }
    // `m == half` guarantees at least one face qualified.
    Ok(fallback.expect("surface point qualifies for some face"))
}

/// Radial projection of a cube point onto the sphere of radius `faceWidth/2`.
pub fn cube_to_sphere(c: CubePoint, layout: &CubeLayout) -> Result<SpherePoint> {
    let n = (c.x * c.x + c.y * c.y + c.z * c.z).sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let k = layout.radius() / n;
    Ok(SpherePoint::new(c.x * k, c.y * k, c.z * k))
}

/// Radial projection of any nonzero point onto the cube surface.
pub fn sphere_to_cube(s: SpherePoint, layout: &CubeLayout) -> Result<CubePoint> {
    let m = s.max_abs();
    if !(s.is_finite() && m > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let k = layout.radius() / m;
    Ok(CubePoint::new(s.x * k, s.y * k, s.z * k))
}

pub fn unfold_to_sphere(p: UnfoldPoint, layout: &CubeLayout) -> Result<SpherePoint> {
    cube_to_sphere(unfold_to_cube(p, layout)?, layout)
}

pub fn sphere_to_unfold(s: SpherePoint, layout: &CubeLayout) -> Result<(FaceId, UnfoldPoint)> {
    cube_to_unfold(sphere_to_cube(s, layout)?, layout)
}

/// [`sphere_to_unfold`] with an edge-tie hint, see [`cube_to_unfold_near`].
pub fn sphere_to_unfold_near(
    s: SpherePoint,
    layout: &CubeLayout,
    preferred: Option<FaceId>,
) -> Result<(FaceId, UnfoldPoint)> {
    cube_to_unfold_near(sphere_to_cube(s, layout)?, layout, preferred)
}
