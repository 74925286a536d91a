//! Translational vs. advanced prediction over a sequence, with per-block and
//! per-frame reports.
//!
//! There is no codec here, so quality is measured as the PSNR of the
//! motion-compensated prediction against the current frame rather than as a
//! rate-distortion figure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{generate_synthetic, read_yuv420, Frame, SyntheticSpec};
use crate::geom::CubeLayout;
use crate::interp::{generate_dctif_bank, warp_block, FilterBank, Plane};
use crate::motion::{Block, MotionVector};
use crate::search::{chroma_field_for, field_for, mode_decide, BlockGrid, BlockRecord, Mode, Policy, ReferencePicture, SearchConfig};

pub const BLOCK_SIZES: [usize; 3] = [16, 32, 64];
pub const CSV_HEADER: [&str; 8] = ["frame", "bx", "by", "mode", "mv_x_q2", "mv_y_q2", "sad_trans", "sad_adv"];

/// PSNR reported for a perfect prediction.
pub const PSNR_CAP: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File { path: PathBuf, width: usize, height: usize },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub input: InputSource,
    pub face_size: usize,
    pub block_size: usize,
    /// Distance in frames between a frame and its reference.
    pub ref_distance: usize,
    pub search: SearchConfig,
    /// Run the two policies of a frame on separate threads.
    pub parallel: bool,
}

impl EvalConfig {
    pub fn synthetic(spec: SyntheticSpec, block_size: usize, ref_distance: usize) -> Self {
        EvalConfig {
            face_size: spec.face_size,
            input: InputSource::Synthetic(spec),
            block_size,
            ref_distance,
            search: SearchConfig::default(),
            parallel: true,
        }
    }

    pub fn layout(&self) -> Result<CubeLayout> {
        CubeLayout::square(self.face_size).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !BLOCK_SIZES.contains(&self.block_size) {
            return Err(Error::Config(format!("block size must be one of 16, 32, 64, got {}", self.block_size)));
        }
        if self.ref_distance == 0 {
            return Err(Error::Config("reference distance must be at least 1".into()));
        }
        self.search.validate()?;
        let layout = self.layout()?;
        match &self.input {
            InputSource::File { width, height, .. } => {
                if *width != layout.canvas_width() || *height != layout.canvas_height() {
                    return Err(Error::Config(format!(
                        "{width}x{height} input does not match a {}-pixel face layout ({}x{})",
                        self.face_size,
                        layout.canvas_width(),
                        layout.canvas_height()
                    )));
                }
            }
            InputSource::Synthetic(spec) => {
                if spec.face_size != self.face_size {
                    return Err(Error::Config(format!(
                        "synthetic face size {} differs from face size {}",
                        spec.face_size, self.face_size
                    )));
                }
                spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockReport {
    pub bx: usize,
    pub by: usize,
    /// Decision of the advanced-enabled policy.
    pub mode: Mode,
    pub mv: MotionVector,
    pub sad_trans: u64,
    pub sad_adv: u64,
    pub cost_trans: u64,
    pub cost_adv: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub frame: i32,
    pub reference: i32,
    /// Y, U, V prediction PSNR with advanced modes disabled.
    pub psnr_trans: [f64; 3],
    /// Y, U, V prediction PSNR with advanced modes enabled.
    pub psnr_adv: [f64; 3],
    pub cost_trans: u64,
    pub cost_adv: u64,
    pub blocks: Vec<BlockReport>,
}

impl FrameReport {
    pub fn psnr_delta(&self) -> [f64; 3] {
        [0, 1, 2].map(|c| self.psnr_adv[c] - self.psnr_trans[c])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub frames: Vec<FrameReport>,
}

impl EvalReport {
    /// Mean over frames of the advanced-minus-translational PSNR, per plane.
    pub fn mean_psnr_delta(&self) -> [f64; 3] {
        if self.frames.is_empty() {
            return [0.0; 3];
        }
        let n = self.frames.len() as f64;
        let mut acc = [0.0; 3];
        for f in &self.frames {
            for (a, d) in acc.iter_mut().zip(f.psnr_delta()) {
                *a += d;
            }
        }
        acc.map(|a| a / n)
    }

    fn blocks(&self) -> impl Iterator<Item = &BlockReport> {
        self.frames.iter().flat_map(|f| f.blocks.iter())
    }

    pub fn block_count(&self) -> usize {
        self.blocks().count()
    }

    pub fn mode_fraction(&self, pred: impl Fn(Mode) -> bool) -> f64 {
        let n = self.block_count();
        if n == 0 {
            return 0.0;
        }
        self.blocks().filter(|b| pred(b.mode)).count() as f64 / n as f64
    }

    /// Fraction of blocks where the advanced-enabled policy chose an advanced mode.
    pub fn advanced_fraction(&self) -> f64 {
        self.mode_fraction(Mode::is_advanced)
    }

    pub fn total_cost_trans(&self) -> u64 {
        self.frames.iter().map(|f| f.cost_trans).sum()
    }

    pub fn total_cost_adv(&self) -> u64 {
        self.frames.iter().map(|f| f.cost_adv).sum()
    }

    /// Plain `key=value` summary lines.
    pub fn summary(&self) -> String {
        let d = self.mean_psnr_delta();
        let mean = |f: &dyn Fn(&FrameReport) -> f64| {
            if self.frames.is_empty() {
                0.0
            } else {
                self.frames.iter().map(f).sum::<f64>() / self.frames.len() as f64
            }
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        kv("metric", "prediction_psnr".into());
        kv("frames", self.frames.len().to_string());
        kv("blocks", self.block_count().to_string());
        kv("mean_psnr_trans_y", format!("{:.3}", mean(&|f| f.psnr_trans[0])));
        kv("mean_psnr_adv_y", format!("{:.3}", mean(&|f| f.psnr_adv[0])));
        kv("mean_psnr_delta_y", format!("{:.3}", d[0]));
        kv("mean_psnr_delta_u", format!("{:.3}", d[1]));
        kv("mean_psnr_delta_v", format!("{:.3}", d[2]));
        kv("advanced_fraction", format!("{:.3}", self.advanced_fraction()));
        kv("merge_fraction", format!("{:.3}", self.mode_fraction(|m| m == Mode::AdvMerge)));
        kv("amvp_fraction", format!("{:.3}", self.mode_fraction(|m| m == Mode::AdvAmvp)));
        kv("total_cost_trans", self.total_cost_trans().to_string());
        kv("total_cost_adv", self.total_cost_adv().to_string());
        s
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvRow {
    pub frame: i32,
    pub bx: usize,
    pub by: usize,
    pub mode: String,
    pub mv_x_q2: i32,
    pub mv_y_q2: i32,
    pub sad_trans: u64,
    pub sad_adv: u64,
}

impl CsvRow {
    pub fn from_block(frame: i32, b: &BlockReport) -> Self {
        CsvRow {
            frame,
            bx: b.bx,
            by: b.by,
            mode: b.mode.as_str().to_string(),
            mv_x_q2: b.mv.dx,
            mv_y_q2: b.mv.dy,
            sad_trans: b.sad_trans,
            sad_adv: b.sad_adv,
        }
    }
}

pub fn csv_rows(report: &EvalReport) -> Vec<CsvRow> {
    report
        .frames
        .iter()
        .flat_map(|f| f.blocks.iter().map(move |b| CsvRow::from_block(f.frame, b)))
        .collect()
}

/// Companion summary path: `report.csv` -> `report.summary.txt`.
pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary.txt")
}

/// Writes one row per (frame, block) to `path` and the summary next to it.
pub fn emit_csv(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for row in csv_rows(report) {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut s = BufWriter::new(File::create(summary_path(path))?);
    s.write_all(report.summary().as_bytes())?;
    s.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("unexpected CSV header {headers:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Frames of the configured input.
pub fn load_frames(config: &EvalConfig) -> Result<Vec<Frame>> {
    match &config.input {
        InputSource::File { path, width, height } => read_yuv420(path, *width, *height),
        InputSource::Synthetic(spec) => generate_synthetic(spec),
    }
}

pub fn run_eval(config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let frames = load_frames(config)?;
    run_eval_on(&frames, config)
}

/// Evaluates both policies on every frame `t >= d` against frame `t - d`.
pub fn run_eval_on(frames: &[Frame], config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let layout = config.layout()?;
    for f in frames {
        f.check_layout(&layout)?;
    }
    let bank = generate_dctif_bank();
    let d = config.ref_distance;
    let mut report = EvalReport::default();
    for t in d..frames.len() {
        let (cur, reference) = (&frames[t], &frames[t - d]);
        let run = |policy| code_frame(cur, reference, &layout, config.block_size, &config.search, &bank, policy);
        let (trans, adv) = if config.parallel {
            std::thread::scope(|s| {
                let h = s.spawn(|| run(Policy::AdvancedEnabled));
                let trans = run(Policy::TranslationalOnly);
                (trans, h.join().expect("advanced policy thread panicked"))
            })
        } else {
            (run(Policy::TranslationalOnly), run(Policy::AdvancedEnabled))
        };
        let (trans, adv) = (trans?, adv?);

        let blocks = trans
            .blocks
            .iter()
            .zip(&trans.records)
            .zip(&adv.records)
            .map(|((b, rt), ra)| BlockReport {
                bx: b.x0,
                by: b.y0,
                mode: ra.mode,
                mv: ra.mv,
                sad_trans: rt.sad,
                sad_adv: ra.sad,
                cost_trans: rt.cost,
                cost_adv: ra.cost,
            })
            .collect::<Vec<_>>();
        report.frames.push(FrameReport {
            frame: cur.poc,
            reference: reference.poc,
            psnr_trans: frame_psnr(cur, &trans.prediction, &layout),
            psnr_adv: frame_psnr(cur, &adv.prediction, &layout),
            cost_trans: blocks.iter().map(|b| b.cost_trans).sum(),
            cost_adv: blocks.iter().map(|b| b.cost_adv).sum(),
            blocks,
        });
    }
    Ok(report)
}

/// Result of coding one frame under one policy.
pub struct CodedFrame {
    pub blocks: Vec<Block>,
    pub records: Vec<BlockRecord>,
    pub prediction: Frame,
}

/// Runs mode decision over the block grid in raster order and assembles the
/// predicted frame. Chroma follows the luma decision. Pixels outside the grid
/// keep the co-located reference samples.
pub fn code_frame(
    cur: &Frame,
    reference: &Frame,
    layout: &CubeLayout,
    block_size: usize,
    cfg: &SearchConfig,
    bank: &FilterBank,
    policy: Policy,
) -> Result<CodedFrame> {
    let mut grid = BlockGrid::new(layout, block_size, cur.poc)?;
    let ref_pic = ReferencePicture {
        luma: &reference.y,
        poc: reference.poc,
    };
    let mut prediction = reference.clone();
    prediction.poc = cur.poc;
    let blocks = grid.blocks().to_vec();
    let mut records = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let rec = mode_decide(b, &cur.y, &ref_pic, &mut grid, cfg, layout, bank, policy)?;
        let field = field_for(b, rec.mode, rec.mv, layout)?;
        prediction.y.paste(&warp_block(&reference.y, &field, bank), b.x0, b.y0);
        let chroma = chroma_field_for(b, rec.mode, rec.mv, layout)?;
        prediction.u.paste(&warp_block(&reference.u, &chroma, bank), b.x0 / 2, b.y0 / 2);
        prediction.v.paste(&warp_block(&reference.v, &chroma, bank), b.x0 / 2, b.y0 / 2);
        records.push(rec);
    }
    Ok(CodedFrame {
        blocks,
        records,
        prediction,
    })
}

/// PSNR of `b` against `a` over face samples only. `subsample` is 2 for
/// chroma planes.
pub fn plane_psnr(a: &Plane, b: &Plane, layout: &CubeLayout, subsample: usize) -> f64 {
    let mut sse = 0u64;
    let mut n = 0u64;
    for y in 0..a.height() {
        for x in 0..a.width() {
            if layout.face_of_pixel(x * subsample, y * subsample).is_none() {
                continue;
            }
            let d = a.get(x, y) as i64 - b.get(x, y) as i64;
            sse += (d * d) as u64;
            n += 1;
        }
    }
    if sse == 0 || n == 0 {
        return PSNR_CAP;
    }
    let mse = sse as f64 / n as f64;
    (10.0 * (255.0 * 255.0 / mse).log10()).min(PSNR_CAP)
}

pub fn frame_psnr(cur: &Frame, pred: &Frame, layout: &CubeLayout) -> [f64; 3] {
    [
        plane_psnr(&cur.y, &pred.y, layout, 1),
        plane_psnr(&cur.u, &pred.u, layout, 2),
        plane_psnr(&cur.v, &pred.v, layout, 2),
    ]
}
