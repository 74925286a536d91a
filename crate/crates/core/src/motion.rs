//! Sphere-uniform motion model.
//!
//! A single MV at a block center defines a displacement on the sphere. Every
//! other pixel of the block is assumed to move by the same 3-D vector, which
//! after projecting back to the cube map gives each pixel its own reference
//! position.

use crate::error::{Error, Result};
use crate::geom::{face_of, sphere_to_unfold_near, unfold_to_sphere, CubeLayout, FaceId, SpherePoint, UnfoldPoint};

/// Transported points closer than this (times face width) to the origin have
/// no usable direction.
const DEGENERATE_NORM: f64 = 1e-6;

/// Displacement in the unfold plane, in quarter-pel units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        MotionVector { dx, dy }
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0 && self.dy == 0
    }

    /// Displacement in pixels.
    pub fn to_pixels(&self) -> (f64, f64) {
        (self.dx as f64 / 4.0, self.dy as f64 / 4.0)
    }

    pub fn l1(&self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }
}

impl std::ops::Sub for MotionVector {
    type Output = MotionVector;
    fn sub(self, rhs: MotionVector) -> MotionVector {
        MotionVector::new(self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

/// Rectangular block of pixels; `x0, y0` is the top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Block {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Block {
            x0,
            y0,
            width,
            height,
        }
    }

    /// Continuous center; for even sizes it falls between pixels.
    pub fn center(&self) -> UnfoldPoint {
        UnfoldPoint::new(
            self.x0 as f64 + (self.width as f64 - 1.0) / 2.0,
            self.y0 as f64 + (self.height as f64 - 1.0) / 2.0,
        )
    }

    /// The face holding the whole block, if there is one.
    pub fn face(&self, layout: &CubeLayout) -> Option<FaceId> {
        if self.width == 0 || self.height == 0 {
            return None;
        }
        let first = layout.face_of_pixel(self.x0, self.y0)?;
        let last = layout.face_of_pixel(self.x0 + self.width - 1, self.y0 + self.height - 1)?;
        (first == last).then_some(first)
    }
}

/// Per-pixel reference positions of one block in 1/64-pel units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceField {
    pub width: usize,
    pub height: usize,
    pub rx: Vec<i32>,
    pub ry: Vec<i32>,
    /// `false` where the transport degenerated and the translational position
    /// was used instead.
    pub valid: Vec<bool>,
}

impl CorrespondenceField {
    pub fn identity(block: &Block) -> Self {
        Self::translational(block, MotionVector::ZERO)
    }

    /// Every pixel displaced by the same MV.
    pub fn translational(block: &Block, mv: MotionVector) -> Self {
        let n = block.width * block.height;
        let mut rx = Vec::with_capacity(n);
        let mut ry = Vec::with_capacity(n);
        for j in 0..block.height {
            for i in 0..block.width {
                rx.push((block.x0 + i) as i32 * 64 + mv.dx * 16);
                ry.push((block.y0 + j) as i32 * 64 + mv.dy * 16);
            }
        }
        CorrespondenceField {
            width: block.width,
            height: block.height,
            rx,
            ry,
            valid: vec![true; n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> (i32, i32) {
        let k = j * self.width + i;
        (self.rx[k], self.ry[k])
    }

    /// Field for the co-sited 4:2:0 chroma block. Each chroma sample sits at
    /// the center of a 2x2 luma quad, so its position is the quad average
    /// shifted by half a luma pixel, then halved.
    pub fn to_chroma(&self) -> CorrespondenceField {
        let w = self.width / 2;
        let h = self.height / 2;
        let mut rx = Vec::with_capacity(w * h);
        let mut ry = Vec::with_capacity(w * h);
        let mut valid = Vec::with_capacity(w * h);
        for j in 0..h {
            for i in 0..w {
                let ks = [
                    2 * j * self.width + 2 * i,
                    2 * j * self.width + 2 * i + 1,
                    (2 * j + 1) * self.width + 2 * i,
                    (2 * j + 1) * self.width + 2 * i + 1,
                ];
                let sx: i64 = ks.iter().map(|&k| self.rx[k] as i64).sum();
                let sy: i64 = ks.iter().map(|&k| self.ry[k] as i64).sum();
                rx.push(div_round_half_away(sx - 128, 8) as i32);
                ry.push(div_round_half_away(sy - 128, 8) as i32);
                valid.push(ks.iter().all(|&k| self.valid[k]));
            }
        }
        CorrespondenceField {
            width: w,
            height: h,
            rx,
            ry,
            valid,
        }
    }
}

/// `num / den` rounded half away from zero; `den` must be nonzero.
pub(crate) fn div_round_half_away(num: i64, den: i64) -> i64 {
    let neg = (num < 0) != (den < 0);
    let (a, b) = (num.unsigned_abs(), den.unsigned_abs());
    let q = ((2 * a + b) / (2 * b)) as i64;
    if neg {
        -q
    } else {
        q
    }
}

fn to_q6(v: f64) -> i32 {
    (v * 64.0).round() as i32
}

/// `s3 = s1 - s0 + s2` projected back to the cube map. Edge ties resolve to
/// `home`, the face of `u2`, when possible.
fn transport_sphere(
    s0: SpherePoint,
    s1: SpherePoint,
    s2: SpherePoint,
    home: Option<FaceId>,
    layout: &CubeLayout,
) -> Result<UnfoldPoint> {
    let s3 = s1 - s0 + s2;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(s3.norm() >= DEGENERATE_NORM * layout.face_width() as f64) {
        return Err(Error::DegenerateTransport);
    }
    Ok(sphere_to_unfold_near(s3, layout, home)?.1)
}

/// Reference position of `u2` given that the block center `u0` moves to `u1`,
/// assuming the same 3-D displacement on the sphere for both.
pub fn transport_point(u0: UnfoldPoint, u1: UnfoldPoint, u2: UnfoldPoint, layout: &CubeLayout) -> Result<UnfoldPoint> {
    let s0 = unfold_to_sphere(u0, layout)?;
    let s1 = unfold_to_sphere(u1, layout)?;
    let s2 = unfold_to_sphere(u2, layout)?;
    transport_sphere(s0, s1, s2, face_of(u2, layout), layout)
}

/// Sphere points of a block's pixels, kept so that fields for many candidate
/// MVs can be built without re-projecting the block.
#[derive(Debug, Clone)]
pub struct BlockTransport {
    block: Block,
    layout: CubeLayout,
    face: FaceId,
    center: UnfoldPoint,
    center_sphere: SpherePoint,
    pixels: Vec<SpherePoint>,
}

impl BlockTransport {
    pub fn new(block: Block, layout: &CubeLayout) -> Result<Self> {
        let face = block.face(layout).ok_or(Error::BlockStraddlesFaces {
            x0: block.x0,
            y0: block.y0,
            width: block.width,
            height: block.height,
        })?;
        let center = block.center();
        let center_sphere = unfold_to_sphere(center, layout)?;
        let mut pixels = Vec::with_capacity(block.width * block.height);
        for j in 0..block.height {
            for i in 0..block.width {
                let p = UnfoldPoint::new((block.x0 + i) as f64, (block.y0 + j) as f64);
                pixels.push(unfold_to_sphere(p, layout)?);
            }
        }
        Ok(BlockTransport {
            block,
            layout: *layout,
            face,
            center,
            center_sphere,
            pixels,
        })
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    /// Whether the center displaced by `mv` still lies on a face.
    pub fn accepts(&self, mv: MotionVector) -> bool {
        face_of(self.target(mv), &self.layout).is_some()
    }

    fn target(&self, mv: MotionVector) -> UnfoldPoint {
        let (dx, dy) = mv.to_pixels();
        UnfoldPoint::new(self.center.x + dx, self.center.y + dy)
    }

    pub fn field(&self, mv: MotionVector) -> Result<CorrespondenceField> {
        let target = self.target(mv);
        let s1 = unfold_to_sphere(target, &self.layout).map_err(|_| Error::InvalidCenterMv { dx: mv.dx, dy: mv.dy })?;
        let (mvx, mvy) = mv.to_pixels();
        let b = &self.block;
        let n = b.width * b.height;
        let mut rx = Vec::with_capacity(n);
        let mut ry = Vec::with_capacity(n);
        let mut valid = Vec::with_capacity(n);
        for (k, &s2) in self.pixels.iter().enumerate() {
            match transport_sphere(self.center_sphere, s1, s2, Some(self.face), &self.layout) {
                Ok(u3) => {
                    rx.push(to_q6(u3.x));
                    ry.push(to_q6(u3.y));
                    valid.push(true);
                }
                Err(_) => {
                    let x = (b.x0 + k % b.width) as f64 + mvx;
                    let y = (b.y0 + k / b.width) as f64 + mvy;
                    rx.push(to_q6(x));
                    ry.push(to_q6(y));
                    valid.push(false);
                }
            }
        }
        Ok(CorrespondenceField {
            width: b.width,
            height: b.height,
            rx,
            ry,
            valid,
        })
    }
}

impl BlockTransport {
    /// Field for the co-sited 4:2:0 chroma block, in chroma 1/64-pel units.
    ///
    /// Each chroma sample site (the center of its 2x2 luma quad) is
    /// transported directly. Averaging the four luma positions instead breaks
    /// on seams, where neighboring luma pixels may land on different faces.
    pub fn chroma_field(&self, mv: MotionVector) -> Result<CorrespondenceField> {
        let target = self.target(mv);
        let s1 = unfold_to_sphere(target, &self.layout).map_err(|_| Error::InvalidCenterMv { dx: mv.dx, dy: mv.dy })?;
        let b = &self.block;
        let (w, h) = (b.width / 2, b.height / 2);
        let mut rx = Vec::with_capacity(w * h);
        let mut ry = Vec::with_capacity(w * h);
        let mut valid = Vec::with_capacity(w * h);
        for j in 0..h {
            for i in 0..w {
                let site = UnfoldPoint::new((b.x0 + 2 * i) as f64 + 0.5, (b.y0 + 2 * j) as f64 + 0.5);
                let s2 = unfold_to_sphere(site, &self.layout)?;
                match transport_sphere(self.center_sphere, s1, s2, Some(self.face), &self.layout) {
                    Ok(u3) => {
                        rx.push(to_q6((u3.x - 0.5) / 2.0));
                        ry.push(to_q6((u3.y - 0.5) / 2.0));
                        valid.push(true);
                    }
                    Err(_) => {
                        rx.push((b.x0 / 2 + i) as i32 * 64 + mv.dx * 8);
                        ry.push((b.y0 / 2 + j) as i32 * 64 + mv.dy * 8);
                        valid.push(false);
                    }
                }
            }
        }
        Ok(CorrespondenceField {
            width: w,
            height: h,
            rx,
            ry,
            valid,
        })
    }
}

pub fn build_correspondence_field(block: &Block, mv: MotionVector, layout: &CubeLayout) -> Result<CorrespondenceField> {
    BlockTransport::new(*block, layout)?.field(mv)
}

/// Carries a neighbor's center MV over to the current block center and rounds
/// it to the quarter-pel grid. Falls back to `nb_mv` when the transport is not
/// possible.
pub fn transport_mv_predictor(
    nb_center: UnfoldPoint,
    nb_mv: MotionVector,
    cur_center: UnfoldPoint,
    layout: &CubeLayout,
) -> MotionVector {
    let (dx, dy) = nb_mv.to_pixels();
    let u1 = UnfoldPoint::new(nb_center.x + dx, nb_center.y + dy);
    match transport_point(nb_center, u1, cur_center, layout) {
        Ok(u3) => MotionVector::new(
            ((u3.x - cur_center.x) * 4.0).round() as i32,
            ((u3.y - cur_center.y) * 4.0).round() as i32,
        ),
        Err(_) => nb_mv,
    }
}
