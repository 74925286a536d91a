//! Planar 4:2:0 frames, raw YUV file I/O, and synthetic cube-map sequences
//! with known sphere motion.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{face_of, sphere_to_unfold_near, unfold_to_sphere, CubeLayout, SpherePoint, UnfoldPoint};
use crate::interp::Plane;

/// Sample value of the unused corner regions of the canvas.
pub const HOLE_FILL: u8 = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
    pub poc: i32,
}

impl Frame {
    pub fn new(y: Plane, u: Plane, v: Plane, poc: i32) -> Result<Self> {
        let (w, h) = (y.width(), y.height());
        if w % 2 != 0 || h % 2 != 0 {
            return Err(Error::DimensionMismatch(format!("frame size {w}x{h} is not even")));
        }
        for c in [&u, &v] {
            if c.width() != w / 2 || c.height() != h / 2 {
                return Err(Error::DimensionMismatch(format!(
                    "chroma plane {}x{} for a {w}x{h} frame",
                    c.width(),
                    c.height()
                )));
            }
        }
        Ok(Frame { y, u, v, poc })
    }

    pub fn filled(width: usize, height: usize, value: u8, poc: i32) -> Self {
        Frame {
            y: Plane::filled(width, height, value),
            u: Plane::filled(width / 2, height / 2, value),
            v: Plane::filled(width / 2, height / 2, value),
            poc,
        }
    }

    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }

    /// Checks that the frame is a 4x3 canvas for `layout`.
    pub fn check_layout(&self, layout: &CubeLayout) -> Result<()> {
        if self.width() != layout.canvas_width() || self.height() != layout.canvas_height() {
            return Err(Error::DimensionMismatch(format!(
                "frame is {}x{}, a {}-pixel face layout needs {}x{}",
                self.width(),
                self.height(),
                layout.face_width(),
                layout.canvas_width(),
                layout.canvas_height()
            )));
        }
        Ok(())
    }
}

fn check_frame_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::Config(format!("frame size {width}x{height} must be even and nonzero")));
    }
    Ok(())
}

/// Reads a headerless 8-bit planar 4:2:0 file. The frame count follows from
/// the file size; POCs count up from zero.
pub fn read_yuv420(path: impl AsRef<Path>, width: usize, height: usize) -> Result<Vec<Frame>> {
    check_frame_size(width, height)?;
    let bytes = fs::read(path)?;
    let luma = width * height;
    let chroma = luma / 4;
    let frame_size = luma + 2 * chroma;
    if bytes.len() % frame_size != 0 {
        return Err(Error::SizeMismatch {
            size: bytes.len() as u64,
            frame_size: frame_size as u64,
        });
    }
    bytes
        .chunks_exact(frame_size)
        .enumerate()
        .map(|(poc, chunk)| {
            let (y, rest) = chunk.split_at(luma);
            let (u, v) = rest.split_at(chroma);
            Frame::new(
                Plane::from_vec(width, height, y.to_vec())?,
                Plane::from_vec(width / 2, height / 2, u.to_vec())?,
                Plane::from_vec(width / 2, height / 2, v.to_vec())?,
                poc as i32,
            )
        })
        .collect()
}

pub fn write_yuv420(path: impl AsRef<Path>, frames: &[Frame]) -> Result<()> {
    let mut out = Vec::new();
    for f in frames {
        out.extend_from_slice(f.y.data());
        out.extend_from_slice(f.u.data());
        out.extend_from_slice(f.v.data());
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum TextureSpec {
    /// Sum of `count` random plane-wave lobes over directions.
    Lobes { count: usize, seed: u64 },
    Constant(u8),
}

/// Parameters of a synthetic sequence whose content translates by a constant
/// 3-D vector on the sphere every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub face_size: usize,
    pub frames: usize,
    /// Sphere-space displacement per frame, in pixels.
    pub velocity: [f64; 3],
    pub texture: TextureSpec,
}

impl SyntheticSpec {
    pub fn new(face_size: usize, frames: usize, velocity: [f64; 3], seed: u64) -> Self {
        SyntheticSpec {
            face_size,
            frames,
            velocity,
            texture: TextureSpec::Lobes { count: 6, seed },
        }
    }

    pub fn layout(&self) -> Result<CubeLayout> {
        CubeLayout::square(self.face_size)
    }

    fn velocity(&self) -> SpherePoint {
        SpherePoint::new(self.velocity[0], self.velocity[1], self.velocity[2])
    }

    pub fn validate(&self) -> Result<()> {
        let layout = self.layout()?;
        if !self.face_size.is_multiple_of(2) {
            return Err(Error::Config(format!("face size {} must be even", self.face_size)));
        }
        let speed = self.velocity().norm();
        // Written negated so that NaN fails.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(speed < layout.face_width() as f64 / 8.0) {
            return Err(Error::Config(format!(
                "|velocity| = {speed} must stay below faceWidth/8 = {}",
                layout.face_width() as f64 / 8.0
            )));
        }
        if let TextureSpec::Lobes { count, .. } = self.texture {
            if count < 3 {
                return Err(Error::Config(format!("texture needs at least 3 lobes, got {count}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Lobe {
    axis: SpherePoint,
    freq: f64,
    phase: f64,
    amp: f64,
}

/// Procedural function on unit directions.
#[derive(Debug, Clone)]
pub struct Texture {
    base: f64,
    lobes: Vec<Lobe>,
}

impl Texture {
    fn lobes(count: usize, seed: u64, base: f64, total_amp: f64, freq: (f64, f64)) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lobes = (0..count)
            .map(|_| {
                // Uniform direction: rejection sampling in the unit ball.
                let axis = loop {
                    let a = SpherePoint::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    let n = a.norm();
                    if n > 0.1 && n <= 1.0 {
                        break a * (1.0 / n);
                    }
                };
                Lobe {
                    axis,
                    freq: rng.random_range(freq.0..freq.1),
                    phase: rng.random_range(0.0..TAU),
                    amp: total_amp / count as f64,
                }
            })
            .collect();
        Texture { base, lobes }
    }

    fn constant(v: u8) -> Self {
        Texture {
            base: v as f64,
            lobes: Vec::new(),
        }
    }

    /// Value at unit direction `d`.
    pub fn eval(&self, d: SpherePoint) -> f64 {
        self.base
            + self
                .lobes
                .iter()
                .map(|l| l.amp * (l.freq * d.dot(&l.axis) + l.phase).sin())
                .sum::<f64>()
    }
}

struct SceneTextures {
    y: Texture,
    u: Texture,
    v: Texture,
}

impl SceneTextures {
    fn new(spec: &TextureSpec) -> Self {
        match *spec {
            TextureSpec::Lobes { count, seed } => SceneTextures {
                y: Texture::lobes(count, seed, 125.0, 100.0, (6.0, 16.0)),
                u: Texture::lobes(count, seed.wrapping_add(1), 128.0, 48.0, (4.0, 12.0)),
                v: Texture::lobes(count, seed.wrapping_add(2), 128.0, 48.0, (4.0, 12.0)),
            },
            TextureSpec::Constant(c) => SceneTextures {
                y: Texture::constant(c),
                u: Texture::constant(c),
                v: Texture::constant(c),
            },
        }
    }
}

fn quantize(v: f64, lo: u8, hi: u8) -> u8 {
    v.round().clamp(lo as f64, hi as f64) as u8
}

/// Renders `spec.frames` frames. Frame `t` shows, at every face pixel with
/// sphere point `s`, the texture at direction `s - t * velocity`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<Frame>> {
    spec.validate()?;
    let layout = spec.layout()?;
    let tex = SceneTextures::new(&spec.texture);
    let (w, h) = (layout.canvas_width(), layout.canvas_height());

    // Sphere points do not depend on t.
    let mut luma_dirs = vec![None; w * h];
    for y in 0..h {
        for x in 0..w {
            if layout.face_of_pixel(x, y).is_some() {
                luma_dirs[y * w + x] = Some(unfold_to_sphere(UnfoldPoint::new(x as f64, y as f64), &layout)?);
            }
        }
    }
    let (cw, ch) = (w / 2, h / 2);
    let mut chroma_dirs = vec![None; cw * ch];
    for j in 0..ch {
        for i in 0..cw {
            if layout.face_of_pixel(2 * i, 2 * j).is_some() {
                let p = UnfoldPoint::new(2.0 * i as f64 + 0.5, 2.0 * j as f64 + 0.5);
                chroma_dirs[j * cw + i] = Some(unfold_to_sphere(p, &layout)?);
            }
        }
    }

    let vel = spec.velocity();
    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let shift = vel * t as f64;
        let dir = |s: SpherePoint| {
            let d = s - shift;
            d * (1.0 / d.norm())
        };
        let mut y = Plane::filled(w, h, HOLE_FILL);
        for (dst, s) in y.data_mut().iter_mut().zip(&luma_dirs) {
            if let Some(s) = s {
                *dst = quantize(tex.y.eval(dir(*s)), 16, 235);
            }
        }
        let mut u = Plane::filled(cw, ch, HOLE_FILL);
        let mut v = Plane::filled(cw, ch, HOLE_FILL);
        for ((du, dv), s) in u.data_mut().iter_mut().zip(v.data_mut().iter_mut()).zip(&chroma_dirs) {
            if let Some(s) = s {
                let d = dir(*s);
                *du = quantize(tex.u.eval(d), 16, 240);
                *dv = quantize(tex.v.eval(d), 16, 240);
            }
        }
        frames.push(Frame::new(y, u, v, t as i32)?);
    }
    Ok(frames)
}

/// Where the content at `p` in frame `t` sits in frame `t + t_delta`.
pub fn ground_truth_match(p: UnfoldPoint, t_delta: f64, spec: &SyntheticSpec) -> Result<UnfoldPoint> {
    let layout = spec.layout()?;
    let s = unfold_to_sphere(p, &layout)?;
    let moved = s + spec.velocity() * t_delta;
    Ok(sphere_to_unfold_near(moved, &layout, face_of(p, &layout))?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{generate_dctif_bank, sample_fractional};

    #[test]
    fn yuv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.yuv");
        let frames = generate_synthetic(&SyntheticSpec::new(16, 3, [1.0, 0.5, 0.0], 9)).unwrap();
        write_yuv420(&path, &frames).unwrap();
        assert_eq!(read_yuv420(&path, 64, 48).unwrap(), frames);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.yuv");
        fs::write(&path, vec![0u8; 256 * 192 * 3 / 2 - 1]).unwrap();
        assert!(matches!(read_yuv420(&path, 256, 192), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn zero_file_is_one_black_frame() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.yuv");
        fs::write(&path, vec![0u8; 256 * 192 * 3 / 2]).unwrap();
        let frames = read_yuv420(&path, 256, 192).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0], Frame::filled(256, 192, 0, 0));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(read_yuv420("/nonexistent/x.yuv", 16, 16), Err(Error::Io(_))));
        assert!(matches!(read_yuv420("/nonexistent/x.yuv", 15, 16), Err(Error::Config(_))));
    }

    #[test]
    fn static_and_constant_sequences() {
        let frames = generate_synthetic(&SyntheticSpec::new(32, 3, [0.0; 3], 1)).unwrap();
        assert_eq!(frames[0].y, frames[2].y);
        assert_eq!(frames[0].u, frames[1].u);
        assert_ne!(frames[0].y, Plane::filled(128, 96, frames[0].y.get(5, 5)));

        let spec = SyntheticSpec {
            texture: TextureSpec::Constant(90),
            ..SyntheticSpec::new(32, 3, [2.0, 1.0, 0.0], 1)
        };
        let frames = generate_synthetic(&spec).unwrap();
        for f in &frames {
            for y in 0..96 {
                for x in 0..128 {
                    let want = if spec.layout().unwrap().face_of_pixel(x, y).is_some() { 90 } else { HOLE_FILL };
                    assert_eq!(f.y.get(x, y), want);
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SyntheticSpec::new(64, 2, [8.0, 0.0, 0.0], 0).validate().is_err());
        assert!(SyntheticSpec::new(64, 2, [7.9, 0.0, 0.0], 0).validate().is_ok());
        let few = SyntheticSpec {
            texture: TextureSpec::Lobes { count: 2, seed: 0 },
            ..SyntheticSpec::new(64, 2, [1.0, 0.0, 0.0], 0)
        };
        assert!(few.validate().is_err());
    }

    #[test]
    fn ground_truth_zero_delta_is_identity() {
        let spec = SyntheticSpec::new(64, 2, [2.0, 0.0, 0.0], 0);
        for p in [UnfoldPoint::new(5.0, 5.0), UnfoldPoint::new(140.0, 64.0), UnfoldPoint::new(33.25, 150.5)] {
            let q = ground_truth_match(p, 0.0, &spec).unwrap();
            assert!((q.x - p.x).abs() < 1e-9 && (q.y - p.y).abs() < 1e-9);
        }
        let still = SyntheticSpec::new(64, 2, [0.0; 3], 0);
        let p = UnfoldPoint::new(100.0, 100.0);
        assert_eq!(ground_truth_match(p, 3.0, &still).unwrap(), p);
    }

    #[test]
    fn warping_with_ground_truth_reconstructs_previous_frame() {
        let spec = SyntheticSpec::new(64, 2, [2.0, 0.0, 0.0], 7);
        let layout = spec.layout().unwrap();
        let frames = generate_synthetic(&spec).unwrap();
        let bank = generate_dctif_bank();
        let mut worst = 0i32;
        for y in 0..layout.canvas_height() {
            for x in 0..layout.canvas_width() {
                let Some(face) = layout.face_of_pixel(x, y) else { continue };
                // Face interior: keep the 8-tap support off the seams.
                let r = layout.face_rect(face);
                if x < r.x0 + 6 || x >= r.x0 + r.width - 6 || y < r.y0 + 6 || y >= r.y0 + r.height - 6 {
                    continue;
                }
                let q = ground_truth_match(UnfoldPoint::new(x as f64, y as f64), 1.0, &spec).unwrap();
                if face_of(q, &layout) != Some(face) {
                    continue;
                }
                let rx = (q.x * 64.0).round() as i32;
                let ry = (q.y * 64.0).round() as i32;
                let got = sample_fractional(&frames[1].y, rx, ry, &bank) as i32;
                worst = worst.max((got - frames[0].y.get(x, y) as i32).abs());
            }
        }
        assert!(worst <= 2, "worst reconstruction error {worst}");
    }
}
