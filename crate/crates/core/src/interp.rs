//! 64-phase DCT-based interpolation and block warping.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::motion::CorrespondenceField;

pub const PHASES: usize = 64;
pub const TAPS: usize = 8;

/// Window width (in samples) of the cosine window applied to the raw DCT
/// interpolator.
const WINDOW_WIDTH: f64 = 11.0;

/// 8-bit sample plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {width}x{height} plane",
                data.len()
            )));
        }
        Ok(Plane { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with coordinates clamped to the plane.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Copy of the `width x height` region at `(x0, y0)`, edge-clamped.
    pub fn crop(&self, x0: i64, y0: i64, width: usize, height: usize) -> Plane {
        let mut out = Vec::with_capacity(width * height);
        for j in 0..height as i64 {
            for i in 0..width as i64 {
                out.push(self.get_clamped(x0 + i, y0 + j));
            }
        }
        Plane {
            width,
            height,
            data: out,
        }
    }

    /// Writes `block` with its top-left corner at `(x0, y0)`.
    pub fn paste(&mut self, block: &Plane, x0: usize, y0: usize) {
        for j in 0..block.height {
            let dst = (y0 + j) * self.width + x0;
            self.data[dst..dst + block.width].copy_from_slice(&block.data[j * block.width..(j + 1) * block.width]);
        }
    }
}

/// Fixed-point interpolation filters: 64 phases of 8 taps, taps summing to 64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterBank {
    taps: [[i16; TAPS]; PHASES],
}

impl FilterBank {
    pub fn phase(&self, p: usize) -> &[i16; TAPS] {
        &self.taps[p]
    }

    pub fn from_taps(taps: [[i16; TAPS]; PHASES]) -> Self {
        FilterBank { taps }
    }
}

/// Windowed DCT interpolator on `n` integer samples at offsets `-3..n-3`,
/// evaluated at fractional position `frac` in `[0, 1)`.
fn dct_interpolator(n: usize, frac: f64) -> Vec<f64> {
    let nf = n as f64;
    let pos = 3.0 + frac;
    let mid = (nf - 1.0) / 2.0;
    (0..n)
        .map(|m| {
            let mf = m as f64;
            let mut acc = 1.0;
            for k in 1..n {
                let kf = k as f64;
                acc += 2.0 * ((2.0 * mf + 1.0) * kf * PI / (2.0 * nf)).cos() * ((2.0 * pos + 1.0) * kf * PI / (2.0 * nf)).cos();
            }
            acc / nf * (PI * (mf - mid) / WINDOW_WIDTH).cos()
        })
        .collect()
}

fn quantize_taps(coeffs: &[f64]) -> [i16; TAPS] {
    let mut taps = [0i16; TAPS];
    for (t, c) in taps.iter_mut().zip(coeffs) {
        *t = (c * 64.0).round() as i16;
    }
    let sum: i16 = taps.iter().sum();
    if sum != 64 {
        // First largest-magnitude tap absorbs the rounding residue.
        let mut big = 0;
        for k in 1..TAPS {
            if taps[k].abs() > taps[big].abs() {
                big = k;
            }
        }
        taps[big] += 64 - sum;
    }
    taps
}

/// Builds the 64-phase DCT-IF bank.
///
/// Phases below one half use 7 taps on samples `-3..=3` (the eighth tap is
/// zero), the half-pel phase uses all 8 taps on `-3..=4`, and phases above
/// one half are mirror images of their complements. With these supports the
/// quarter-, half- and three-quarter-pel phases equal the HEVC luma filters.
pub fn generate_dctif_bank() -> FilterBank {
    let mut taps = [[0i16; TAPS]; PHASES];
    taps[0][3] = 64;
    for (p, t) in taps.iter_mut().enumerate().take(PHASES / 2 + 1).skip(1) {
        let n = if p == PHASES / 2 { 8 } else { 7 };
        *t = quantize_taps(&dct_interpolator(n, p as f64 / PHASES as f64));
    }
    for p in PHASES / 2 + 1..PHASES {
        let mut t = taps[PHASES - p];
        t.reverse();
        taps[p] = t;
    }
    FilterBank { taps }
}

/// Interpolated sample at `(x_q6 / 64, y_q6 / 64)`.
///
/// Horizontal pass first, each row rounded with `(sum + 32) >> 6`, then the
/// vertical pass rounded the same way and clamped to 8 bits. Taps outside the
/// plane read edge-clamped samples.
#[inline]
pub fn sample_fractional(plane: &Plane, x_q6: i32, y_q6: i32, bank: &FilterBank) -> u8 {
    let ix = x_q6.div_euclid(64) as i64;
    let iy = y_q6.div_euclid(64) as i64;
    let hx = bank.phase(x_q6.rem_euclid(64) as usize);
    let vy = bank.phase(y_q6.rem_euclid(64) as usize);
    let mut acc: i32 = 0;
    for (r, &cy) in vy.iter().enumerate() {
        if cy == 0 {
            continue;
        }
        let row = iy + r as i64 - 3;
        let mut h: i32 = 0;
        for (k, &cx) in hx.iter().enumerate() {
            if cx != 0 {
                h += cx as i32 * plane.get_clamped(ix + k as i64 - 3, row) as i32;
            }
        }
        acc += cy as i32 * ((h + 32) >> 6);
    }
    ((acc + 32) >> 6).clamp(0, 255) as u8
}

/// Samples `plane` at every position of `field`.
pub fn warp_block(plane: &Plane, field: &CorrespondenceField, bank: &FilterBank) -> Plane {
    let data = field
        .rx
        .iter()
        .zip(&field.ry)
        .map(|(&x, &y)| sample_fractional(plane, x, y, bank))
        .collect();
    Plane {
        width: field.width,
        height: field.height,
        data,
    }
}
