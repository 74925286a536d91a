//! TZS-style motion estimation, merge/AMVP predictors and per-block mode
//! decision between the translational and sphere-uniform models.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::CubeLayout;
use crate::interp::{warp_block, FilterBank, Plane};
use crate::motion::{div_round_half_away, transport_mv_predictor, Block, BlockTransport, CorrespondenceField, MotionVector};

/// Expanding-diamond distance at or below which raster and refinement are skipped.
const EARLY_STOP_DISTANCE: i32 = 1;
/// Expanding-diamond distance above which the raster scan runs.
const RASTER_TRIGGER_DISTANCE: i32 = 5;

const MV_MIN: i64 = -(1 << 15);
const MV_MAX: i64 = (1 << 15) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Integer-pel search range in pixels around the zero MV.
    pub search_range: i32,
    pub raster_step: i32,
    /// Quarter-pel refinement window around the best integer MV.
    pub refine_window_q2: i32,
    /// Weight of the MV-difference bit estimate in the cost.
    pub lambda: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            search_range: 64,
            raster_step: 8,
            refine_window_q2: 8,
            lambda: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.search_range <= 0 || self.raster_step <= 0 || self.refine_window_q2 <= 0 {
            return Err(Error::Config(format!(
                "search_range, raster_step and refine_window_q2 must be positive: {self:?}"
            )));
        }
        if (self.search_range as i64) * 4 > MV_MAX {
            return Err(Error::Config(format!("search range {} too large", self.search_range)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Trans,
    AdvMerge,
    AdvAmvp,
}

impl Mode {
    pub fn is_advanced(self) -> bool {
        !matches!(self, Mode::Trans)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Trans => "TRANS",
            Mode::AdvMerge => "ADV_MERGE",
            Mode::AdvAmvp => "ADV_AMVP",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "TRANS" => Ok(Mode::Trans),
            "ADV_MERGE" => Ok(Mode::AdvMerge),
            "ADV_AMVP" => Ok(Mode::AdvAmvp),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionModel {
    Translational,
    Advanced,
}

/// Which modes `mode_decide` may pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    TranslationalOnly,
    AdvancedEnabled,
}

#[derive(Debug, Clone, Copy)]
pub struct ReferencePicture<'a> {
    pub luma: &'a Plane,
    pub poc: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRecord {
    pub mode: Mode,
    pub mv: MotionVector,
    pub ref_index: usize,
    /// SAD plus the weighted bit estimate of the chosen mode.
    pub cost: u64,
    pub sad: u64,
    /// Best translational MV and cost, kept whatever mode won so that the
    /// translational search sees identical predictors under every policy.
    pub trans_mv: MotionVector,
    pub trans_cost: u64,
}

/// Fixed-size blocks tiling the canvas; only tiles lying entirely inside one
/// face are part of the grid. Records are filled in raster order.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    block_size: usize,
    poc: i32,
    cols: usize,
    rows: usize,
    tiles: Vec<Option<usize>>,
    blocks: Vec<Block>,
    records: Vec<Option<BlockRecord>>,
}

impl BlockGrid {
    pub fn new(layout: &CubeLayout, block_size: usize, poc: i32) -> Result<Self> {
        if block_size < 2 || !block_size.is_multiple_of(2) {
            return Err(Error::Config(format!("block size {block_size} must be even and at least 2")));
        }
        let cols = layout.canvas_width() / block_size;
        let rows = layout.canvas_height() / block_size;
        let mut tiles = vec![None; cols * rows];
        let mut blocks = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let b = Block::new(c * block_size, r * block_size, block_size, block_size);
                if b.face(layout).is_some() {
                    tiles[r * cols + c] = Some(blocks.len());
                    blocks.push(b);
                }
            }
        }
        let n = blocks.len();
        Ok(BlockGrid {
            block_size,
            poc,
            cols,
            rows,
            tiles,
            blocks,
            records: vec![None; n],
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// POC of the picture being coded.
    pub fn poc(&self) -> i32 {
        self.poc
    }

    /// Blocks in raster order.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn records(&self) -> &[Option<BlockRecord>] {
        &self.records
    }

    pub fn index_of(&self, block: &Block) -> Option<usize> {
        let bs = self.block_size;
        if block.width != bs || block.height != bs || !block.x0.is_multiple_of(bs) || !block.y0.is_multiple_of(bs) {
            return None;
        }
        let (c, r) = (block.x0 / bs, block.y0 / bs);
        if c >= self.cols || r >= self.rows {
            return None;
        }
        self.tiles[r * self.cols + c]
    }

    pub fn record(&self, block: &Block) -> Option<&BlockRecord> {
        self.index_of(block).and_then(|i| self.records[i].as_ref())
    }

    pub fn set_record(&mut self, block: &Block, record: BlockRecord) -> Result<()> {
        let i = self.index_of(block).ok_or_else(|| Error::Config(format!("{block:?} is not in the grid")))?;
        self.records[i] = Some(record);
        Ok(())
    }

    /// Coded neighbor `dc` columns and `dr` rows away.
    pub fn neighbor(&self, block: &Block, dc: isize, dr: isize) -> Option<(Block, &BlockRecord)> {
        let bs = self.block_size as isize;
        let c = block.x0 as isize / bs + dc;
        let r = block.y0 as isize / bs + dr;
        if c < 0 || r < 0 || c >= self.cols as isize || r >= self.rows as isize {
            return None;
        }
        let i = self.tiles[r as usize * self.cols + c as usize]?;
        self.records[i].as_ref().map(|rec| (self.blocks[i], rec))
    }
}

// Neighbor offsets (column, row).
const LEFT: (isize, isize) = (-1, 0);
const ABOVE: (isize, isize) = (0, -1);
const ABOVE_RIGHT: (isize, isize) = (1, -1);
const BELOW_LEFT: (isize, isize) = (-1, 1);
const ABOVE_LEFT: (isize, isize) = (-1, -1);

/// Merge scan order A, B, C, D, E.
const MERGE_ORDER: [(isize, isize); 5] = [LEFT, ABOVE, ABOVE_RIGHT, BELOW_LEFT, ABOVE_LEFT];
/// AMVP scan order A0, A1, B0, B1, B2.
const AMVP_ORDER: [(isize, isize); 5] = [BELOW_LEFT, LEFT, ABOVE_RIGHT, ABOVE, ABOVE_LEFT];

pub fn sad(a: &Plane, b: &Plane) -> Result<u64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(format!(
            "SAD of {}x{} and {}x{} blocks",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(sad_slices(a.data(), b.data()))
}

fn sad_slices(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum()
}

/// Exp-Golomb-like bit estimate of an MV difference.
pub fn mv_bits(d: MotionVector) -> u32 {
    let comp = |v: i32| 1 + 2 * (32 - v.unsigned_abs().leading_zeros());
    comp(d.dx) + comp(d.dy)
}

/// `mv * d_target / d_neighbor`, rounded half away from zero and clipped to
/// 16-bit range.
pub fn scale_mv(mv: MotionVector, d_target: i32, d_neighbor: i32) -> Result<MotionVector> {
    if d_neighbor == 0 {
        return Err(Error::ZeroPocDistance);
    }
    let s = |c: i32| div_round_half_away(c as i64 * d_target as i64, d_neighbor as i64).clamp(MV_MIN, MV_MAX) as i32;
    Ok(MotionVector::new(s(mv.dx), s(mv.dy)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchResult {
    pub mv: MotionVector,
    pub cost: u64,
    pub sad: u64,
}

fn rank(r: &SearchResult) -> (u64, u32, i32, i32) {
    (r.cost, r.mv.l1(), r.mv.dy, r.mv.dx)
}

fn better(a: &SearchResult, b: &Option<SearchResult>) -> bool {
    match b {
        None => true,
        Some(b) => rank(a) < rank(b),
    }
}

/// Reference positions for `mode`/`mv` over `block`.
pub fn field_for(block: &Block, mode: Mode, mv: MotionVector, layout: &CubeLayout) -> Result<CorrespondenceField> {
    match mode {
        Mode::Trans => Ok(CorrespondenceField::translational(block, mv)),
        Mode::AdvMerge | Mode::AdvAmvp => BlockTransport::new(*block, layout)?.field(mv),
    }
}

/// Chroma reference positions for `mode`/`mv` over the luma `block`.
pub fn chroma_field_for(block: &Block, mode: Mode, mv: MotionVector, layout: &CubeLayout) -> Result<CorrespondenceField> {
    match mode {
        Mode::Trans => Ok(CorrespondenceField::translational(block, mv).to_chroma()),
        Mode::AdvMerge | Mode::AdvAmvp => BlockTransport::new(*block, layout)?.chroma_field(mv),
    }
}

struct Searcher<'a> {
    block: Block,
    target: Plane,
    reference: &'a Plane,
    transport: Option<BlockTransport>,
    bank: &'a FilterBank,
    cfg: &'a SearchConfig,
    bit_ref: MotionVector,
    integer_cache: HashMap<(i32, i32), Option<SearchResult>>,
    model_cache: HashMap<MotionVector, Option<SearchResult>>,
}

impl<'a> Searcher<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        model: MotionModel,
        block: &Block,
        cur: &Plane,
        reference: &'a Plane,
        bit_ref: MotionVector,
        cfg: &'a SearchConfig,
        layout: &CubeLayout,
        bank: &'a FilterBank,
    ) -> Result<Self> {
        let transport = match model {
            MotionModel::Advanced => Some(BlockTransport::new(*block, layout)?),
            MotionModel::Translational => None,
        };
        Ok(Searcher {
            block: *block,
            target: cur.crop(block.x0 as i64, block.y0 as i64, block.width, block.height),
            reference,
            transport,
            bank,
            cfg,
            bit_ref,
            integer_cache: HashMap::new(),
            model_cache: HashMap::new(),
        })
    }

    fn in_range_px(&self, (x, y): (i32, i32)) -> bool {
        x.abs() <= self.cfg.search_range && y.abs() <= self.cfg.search_range
    }

    fn in_range_q2(&self, mv: MotionVector) -> bool {
        let r = 4 * self.cfg.search_range;
        mv.dx.abs() <= r && mv.dy.abs() <= r
    }

    fn priced(&self, mv: MotionVector, sad: u64) -> SearchResult {
        let bits = mv_bits(mv - self.bit_ref) as u64;
        SearchResult {
            mv,
            cost: sad + self.cfg.lambda as u64 * bits,
            sad,
        }
    }

    /// Translational SAD at an integer-pel offset; the surrogate cost of
    /// stages 1 to 4.
    fn integer_cost(&mut self, px: (i32, i32)) -> Option<SearchResult> {
        if let Some(r) = self.integer_cache.get(&px) {
            return *r;
        }
        let mv = MotionVector::new(4 * px.0, 4 * px.1);
        let r = if !self.in_range_px(px) || self.transport.as_ref().is_some_and(|t| !t.accepts(mv)) {
            None
        } else {
            let b = &self.block;
            let cand = self.reference.crop(b.x0 as i64 + px.0 as i64, b.y0 as i64 + px.1 as i64, b.width, b.height);
            Some(self.priced(mv, sad_slices(cand.data(), self.target.data())))
        };
        self.integer_cache.insert(px, r);
        r
    }

    /// Cost of `mv` under the searcher's motion model, with fractional warping.
    fn model_cost(&mut self, mv: MotionVector) -> Option<SearchResult> {
        if let Some(r) = self.model_cache.get(&mv) {
            return *r;
        }
        let r = if self.in_range_q2(mv) { self.unbounded_cost(mv) } else { None };
        self.model_cache.insert(mv, r);
        r
    }

    /// Model cost without the search-range check; merge candidates are not
    /// bound by the search window.
    fn unbounded_cost(&self, mv: MotionVector) -> Option<SearchResult> {
        let field = match &self.transport {
            Some(t) => t.field(mv).ok(),
            None => Some(CorrespondenceField::translational(&self.block, mv)),
        };
        field.map(|f| {
            let pred = warp_block(self.reference, &f, self.bank);
            self.priced(mv, sad_slices(pred.data(), self.target.data()))
        })
    }

    fn consider(&mut self, px: (i32, i32), best: &mut Option<SearchResult>) -> bool {
        match self.integer_cost(px) {
            Some(r) if better(&r, best) => {
                *best = Some(r);
                true
            }
            _ => false,
        }
    }

    /// Expanding diamond around `center`; returns the best point and the
    /// diamond distance at which it was found (0 if the center held).
    fn expanding_diamond(&mut self, center: (i32, i32), best: &mut Option<SearchResult>) -> i32 {
        self.consider(center, best);
        let mut best_dist = 0;
        let mut d = 1;
        while d <= self.cfg.search_range {
            let (cx, cy) = center;
            let points: Vec<(i32, i32)> = if d == 1 {
                vec![(cx, cy - 1), (cx - 1, cy), (cx + 1, cy), (cx, cy + 1)]
            } else {
                let h = d / 2;
                vec![
                    (cx, cy - d),
                    (cx - h, cy - h),
                    (cx + h, cy - h),
                    (cx - d, cy),
                    (cx + d, cy),
                    (cx - h, cy + h),
                    (cx + h, cy + h),
                    (cx, cy + d),
                ]
            };
            for p in points {
                if self.consider(p, best) {
                    best_dist = d;
                }
            }
            d *= 2;
        }
        best_dist
    }

    fn px_of(mv: MotionVector) -> (i32, i32) {
        (mv.dx / 4, mv.dy / 4)
    }

    fn run(&mut self, predictors: &[MotionVector]) -> Result<SearchResult> {
        let range = self.cfg.search_range;

        // Stage 1: predictors and zero at integer pel.
        let mut best = None;
        self.consider((0, 0), &mut best);
        for p in predictors {
            let px = (
                (div_round_half_away(p.dx as i64, 4) as i32).clamp(-range, range),
                (div_round_half_away(p.dy as i64, 4) as i32).clamp(-range, range),
            );
            self.consider(px, &mut best);
        }
        let Some(start) = best else {
            return Err(Error::NoValidMotion);
        };

        // Stage 2: expanding diamond.
        let dist = self.expanding_diamond(Self::px_of(start.mv), &mut best);

        if dist > EARLY_STOP_DISTANCE {
            // Stage 3: raster scan over the whole window.
            if dist > RASTER_TRIGGER_DISTANCE {
                let step = self.cfg.raster_step as usize;
                for y in (-range..=range).step_by(step) {
                    for x in (-range..=range).step_by(step) {
                        self.consider((x, y), &mut best);
                    }
                }
            }
            // Stage 4: repeat diamonds around the best until it stops moving.
            loop {
                let before = best.expect("stage 1 found a point").mv;
                self.expanding_diamond(Self::px_of(before), &mut best);
                if best.expect("stage 1 found a point").mv == before {
                    break;
                }
            }
        }

        // Stage 5: quarter-pel refinement with the real model cost.
        let anchor = best.expect("stage 1 found a point").mv;
        let mut fine: Option<SearchResult> = None;
        let try_mv = |s: &mut Self, mv: MotionVector, fine: &mut Option<SearchResult>| {
            if let Some(r) = s.model_cost(mv) {
                if better(&r, fine) {
                    *fine = Some(r);
                }
            }
        };
        try_mv(self, anchor, &mut fine);
        for p in predictors {
            try_mv(self, *p, &mut fine);
        }
        // Start from (0, 0) too so that an always-valid point exists.
        try_mv(self, MotionVector::ZERO, &mut fine);
        let window = self.cfg.refine_window_q2;
        let mut step = 1;
        while step * 2 <= window / 2 {
            step *= 2;
        }
        while step >= 1 {
            let Some(center) = fine else { break };
            for (sx, sy) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                let mv = MotionVector::new(center.mv.dx + sx * step, center.mv.dy + sy * step);
                if (mv.dx - anchor.dx).abs() <= window && (mv.dy - anchor.dy).abs() <= window {
                    try_mv(self, mv, &mut fine);
                }
            }
            step /= 2;
        }
        fine.ok_or(Error::NoValidMotion)
    }
}

/// TZS search under `model`. Stages 1 to 4 rank integer positions by
/// translational SAD; stage 5 refines to quarter-pel with the model's own
/// warped cost. The bit estimate is taken against `predictors[0]` (or zero).
#[allow(clippy::too_many_arguments)]
pub fn tzs_search_with_model(
    model: MotionModel,
    block: &Block,
    cur: &Plane,
    reference: &ReferencePicture,
    predictors: &[MotionVector],
    cfg: &SearchConfig,
    layout: &CubeLayout,
    bank: &FilterBank,
) -> Result<SearchResult> {
    let bit_ref = predictors.first().copied().unwrap_or_default();
    Searcher::new(model, block, cur, reference.luma, bit_ref, cfg, layout, bank)?.run(predictors)
}

/// Advanced-model TZS search.
pub fn tzs_search(
    block: &Block,
    cur: &Plane,
    reference: &ReferencePicture,
    predictors: &[MotionVector],
    cfg: &SearchConfig,
    layout: &CubeLayout,
    bank: &FilterBank,
) -> Result<SearchResult> {
    tzs_search_with_model(MotionModel::Advanced, block, cur, reference, predictors, cfg, layout, bank)
}

/// Cost of one MV under `model` without searching or range limits.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_mv(
    model: MotionModel,
    block: &Block,
    mv: MotionVector,
    bit_ref: MotionVector,
    cur: &Plane,
    reference: &ReferencePicture,
    cfg: &SearchConfig,
    layout: &CubeLayout,
    bank: &FilterBank,
) -> Result<SearchResult> {
    let s = Searcher::new(model, block, cur, reference.luma, bit_ref, cfg, layout, bank)?;
    s.unbounded_cost(mv).ok_or(Error::InvalidCenterMv { dx: mv.dx, dy: mv.dy })
}

/// Single merge candidate: the first advanced-coded neighbor (A, B, C, D, E)
/// with a nonzero MV, transported to this block's center.
pub fn merge_candidate(grid: &BlockGrid, block: &Block, layout: &CubeLayout) -> Option<MotionVector> {
    let center = block.center();
    let transport = BlockTransport::new(*block, layout).ok()?;
    for (dc, dr) in MERGE_ORDER {
        let Some((nb, rec)) = grid.neighbor(block, dc, dr) else { continue };
        if !rec.mode.is_advanced() || rec.mv.is_zero() {
            continue;
        }
        let mv = transport_mv_predictor(nb.center(), rec.mv, center, layout);
        if !mv.is_zero() && transport.accepts(mv) {
            return Some(mv);
        }
    }
    None
}

/// Single AMVP predictor: the first coded neighbor among A0, A1, B0, B1, B2,
/// transported to this block's center and POC-scaled when it refers to a
/// different picture than `target_ref`. Zero when no neighbor qualifies.
pub fn amvp_predictor(
    grid: &BlockGrid,
    block: &Block,
    target_ref: &ReferencePicture,
    refs: &[ReferencePicture],
    layout: &CubeLayout,
) -> MotionVector {
    let center = block.center();
    for (dc, dr) in AMVP_ORDER {
        let Some((nb, rec)) = grid.neighbor(block, dc, dr) else { continue };
        let Some(nb_ref) = refs.get(rec.ref_index) else { continue };
        let mv = transport_mv_predictor(nb.center(), rec.mv, center, layout);
        if nb_ref.poc == target_ref.poc {
            return mv;
        }
        if let Ok(scaled) = scale_mv(mv, grid.poc() - target_ref.poc, grid.poc() - nb_ref.poc) {
            return scaled;
        }
    }
    MotionVector::ZERO
}

/// Translational predictors: neighbors' translational MVs in AMVP order,
/// deduplicated, without transport.
fn translational_predictors(grid: &BlockGrid, block: &Block) -> Vec<MotionVector> {
    let mut out: Vec<MotionVector> = Vec::new();
    for (dc, dr) in AMVP_ORDER {
        if let Some((_, rec)) = grid.neighbor(block, dc, dr) {
            if !out.contains(&rec.trans_mv) {
                out.push(rec.trans_mv);
            }
        }
    }
    if out.is_empty() {
        out.push(MotionVector::ZERO);
    }
    out
}

/// Picks the cheapest of translational, advanced merge and advanced AMVP
/// coding for `block` and stores the result in `grid`. Ties go to the earlier
/// of TRANS, ADV_MERGE, ADV_AMVP.
#[allow(clippy::too_many_arguments)]
pub fn mode_decide(
    block: &Block,
    cur: &Plane,
    reference: &ReferencePicture,
    grid: &mut BlockGrid,
    cfg: &SearchConfig,
    layout: &CubeLayout,
    bank: &FilterBank,
    policy: Policy,
) -> Result<BlockRecord> {
    if grid.index_of(block).is_none() {
        return Err(Error::Config(format!("{block:?} is not in the grid")));
    }
    let trans_preds = translational_predictors(grid, block);
    let trans = tzs_search_with_model(MotionModel::Translational, block, cur, reference, &trans_preds, cfg, layout, bank)?;
    let mut rec = BlockRecord {
        mode: Mode::Trans,
        mv: trans.mv,
        ref_index: 0,
        cost: trans.cost,
        sad: trans.sad,
        trans_mv: trans.mv,
        trans_cost: trans.cost,
    };

    if policy == Policy::AdvancedEnabled {
        let merge = merge_candidate(grid, block, layout);
        if let Some(mv) = merge {
            // No MV difference is sent in merge mode.
            let mut r = evaluate_mv(MotionModel::Advanced, block, mv, mv, cur, reference, cfg, layout, bank)?;
            r.cost = r.sad;
            if r.cost < rec.cost {
                rec.mode = Mode::AdvMerge;
                rec.mv = r.mv;
                rec.cost = r.cost;
                rec.sad = r.sad;
            }
        }
        let pred = amvp_predictor(grid, block, reference, std::slice::from_ref(reference), layout);
        let mut seeds = vec![pred, trans.mv];
        seeds.extend(merge);
        let amvp = tzs_search(block, cur, reference, &seeds, cfg, layout, bank)?;
        if amvp.cost < rec.cost {
            rec.mode = Mode::AdvAmvp;
            rec.mv = amvp.mv;
            rec.cost = amvp.cost;
            rec.sad = amvp.sad;
        }
    }
    grid.set_record(block, rec)?;
    Ok(rec)
}

/// Prediction of `block` from `plane` for a decided mode and MV.
pub fn predict_block(
    plane: &Plane,
    block: &Block,
    mode: Mode,
    mv: MotionVector,
    layout: &CubeLayout,
    bank: &FilterBank,
) -> Result<Plane> {
    Ok(warp_block(plane, &field_for(block, mode, mv, layout)?, bank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{generate_synthetic, ground_truth_match, SyntheticSpec};
    use crate::geom::UnfoldPoint;
    use crate::interp::generate_dctif_bank;
    use crate::motion::build_correspondence_field;
    use proptest::prelude::*;

    fn layout() -> CubeLayout {
        CubeLayout::square(64).unwrap()
    }

    fn textured(face: usize, seed: u64) -> Plane {
        generate_synthetic(&SyntheticSpec::new(face, 1, [0.0; 3], seed)).unwrap()[0].y.clone()
    }

    #[test]
    fn sad_examples() {
        let a = Plane::filled(16, 16, 0);
        let b = Plane::filled(16, 16, 1);
        assert_eq!(sad(&a, &a).unwrap(), 0);
        assert_eq!(sad(&a, &b).unwrap(), 256);
        assert!(sad(&a, &Plane::new(8, 16)).is_err());
    }

    proptest! {
        #[test]
        fn sad_matches_scalar_loop(data in proptest::collection::vec((any::<u8>(), any::<u8>()), 64)) {
            let a = Plane::from_vec(8, 8, data.iter().map(|p| p.0).collect()).unwrap();
            let b = Plane::from_vec(8, 8, data.iter().map(|p| p.1).collect()).unwrap();
            let mut want = 0u64;
            for y in 0..8 {
                for x in 0..8 {
                    want += (a.get(x, y) as i64 - b.get(x, y) as i64).unsigned_abs();
                }
            }
            prop_assert_eq!(sad(&a, &b).unwrap(), want);
        }

        #[test]
        fn scale_mv_identity_and_rounding(dx in -4000i32..4000, dy in -4000i32..4000, d in 1i32..8) {
            let mv = MotionVector::new(dx, dy);
            prop_assert_eq!(scale_mv(mv, d, d).unwrap(), mv);
            let half = scale_mv(mv, 1, 2).unwrap();
            let oracle = |c: i32| { let x = c as f64 / 2.0; (x.signum() * (x.abs() + 0.5).floor()) as i32 };
            prop_assert_eq!(half, MotionVector::new(oracle(dx), oracle(dy)));
        }
    }

    #[test]
    fn scale_mv_examples() {
        assert_eq!(scale_mv(MotionVector::new(8, -4), 4, 2).unwrap(), MotionVector::new(16, -8));
        assert_eq!(scale_mv(MotionVector::new(3, 0), 1, 2).unwrap(), MotionVector::new(2, 0));
        assert_eq!(scale_mv(MotionVector::new(-3, 0), 1, 2).unwrap(), MotionVector::new(-2, 0));
        assert_eq!(scale_mv(MotionVector::new(30000, 0), 4, 1).unwrap(), MotionVector::new(32767, 0));
        assert_eq!(scale_mv(MotionVector::new(-30000, 0), 4, 1).unwrap(), MotionVector::new(-32768, 0));
        assert!(matches!(scale_mv(MotionVector::new(1, 1), 1, 0), Err(Error::ZeroPocDistance)));
    }

    #[test]
    fn mv_bits_proxy() {
        assert_eq!(mv_bits(MotionVector::ZERO), 2);
        assert_eq!(mv_bits(MotionVector::new(1, 0)), 4);
        assert_eq!(mv_bits(MotionVector::new(-5, 8)), 7 + 9);
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [Mode::Trans, Mode::AdvMerge, Mode::AdvAmvp] {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("adv".parse::<Mode>().is_err());
    }

    #[test]
    fn identical_frames_give_zero_motion() {
        let l = layout();
        let bank = generate_dctif_bank();
        let cur = textured(64, 3);
        let reference = ReferencePicture { luma: &cur, poc: 0 };
        let block = Block::new(16, 80, 16, 16);
        let r = tzs_search(&block, &cur, &reference, &[], &SearchConfig::default(), &l, &bank).unwrap();
        assert_eq!((r.mv, r.cost), (MotionVector::ZERO, 0));
    }

    #[test]
    fn pure_shift_is_found() {
        // Reference content is the current picture moved right by 3 px, so
        // the current block is found 3 px to the right.
        let l = layout();
        let bank = generate_dctif_bank();
        let cur = textured(64, 4);
        let mut shifted = Plane::new(256, 192);
        for y in 0..192 {
            for x in 0..256 {
                shifted.set(x, y, cur.get_clamped(x as i64 - 3, y as i64));
            }
        }
        let reference = ReferencePicture { luma: &shifted, poc: 0 };
        for block in [Block::new(16, 80, 16, 16), Block::new(80, 96, 16, 16)] {
            let r = tzs_search(&block, &cur, &reference, &[], &SearchConfig::default(), &l, &bank).unwrap();
            // A plane shift is not a sphere motion, so only the
            // translational model is exact.
            let t = tzs_search_with_model(
                MotionModel::Translational,
                &block,
                &cur,
                &reference,
                &[],
                &SearchConfig::default(),
                &l,
                &bank,
            )
            .unwrap();
            assert_eq!((t.mv, t.cost), (MotionVector::new(12, 0), 0));
            assert!((r.mv.dx - 12).abs() <= 1 && r.mv.dy.abs() <= 1, "{:?}", r.mv);
        }
    }

    fn synthetic_pair(velocity: [f64; 3]) -> (SyntheticSpec, Vec<crate::frame::Frame>) {
        let spec = SyntheticSpec::new(64, 2, velocity, 11);
        let frames = generate_synthetic(&spec).unwrap();
        (spec, frames)
    }

    #[test]
    fn advanced_search_matches_exhaustive_optimum() {
        let l = layout();
        let bank = generate_dctif_bank();
        let (_, frames) = synthetic_pair([0.0, 0.0, 3.0]);
        let reference = ReferencePicture { luma: &frames[0].y, poc: 0 };
        let cfg = SearchConfig::default();
        for block in [Block::new(16, 80, 16, 16), Block::new(144, 96, 16, 16), Block::new(16, 16, 16, 16)] {
            let adv = tzs_search(&block, &frames[1].y, &reference, &[], &cfg, &l, &bank).unwrap();
            let cur = frames[1].y.crop(block.x0 as i64, block.y0 as i64, 16, 16);
            let mut best = u64::MAX;
            for dy in -40..=40 {
                for dx in -40..=40 {
                    let Ok(f) = build_correspondence_field(&block, MotionVector::new(dx, dy), &l) else { continue };
                    best = best.min(sad(&warp_block(&frames[0].y, &f, &bank), &cur).unwrap());
                }
            }
            assert_eq!(adv.cost, best, "block {block:?}");
        }
    }

    #[test]
    fn search_cost_is_reproducible_and_bounded_by_truth() {
        let l = layout();
        let bank = generate_dctif_bank();
        let (spec, frames) = synthetic_pair([2.0, 0.0, 0.0]);
        let reference = ReferencePicture { luma: &frames[0].y, poc: 0 };
        let cfg = SearchConfig::default();
        for block in [Block::new(16, 80, 16, 16), Block::new(16, 16, 16, 16), Block::new(144, 80, 16, 16)] {
            let c = block.center();
            let m = ground_truth_match(c, -1.0, &spec).unwrap();
            let truth = MotionVector::new(((m.x - c.x) * 4.0).round() as i32, ((m.y - c.y) * 4.0).round() as i32);
            let r = tzs_search(&block, &frames[1].y, &reference, &[truth], &cfg, &l, &bank).unwrap();
            // Independent re-evaluation: build field, warp, SAD.
            let f = build_correspondence_field(&block, r.mv, &l).unwrap();
            let p = warp_block(&frames[0].y, &f, &bank);
            let cur = frames[1].y.crop(block.x0 as i64, block.y0 as i64, 16, 16);
            assert_eq!(r.cost, sad(&p, &cur).unwrap());
            let f = build_correspondence_field(&block, truth, &l).unwrap();
            let truth_cost = sad(&warp_block(&frames[0].y, &f, &bank), &cur).unwrap();
            assert!(r.cost <= truth_cost);
        }
    }

    fn record(mode: Mode, mv: MotionVector) -> BlockRecord {
        BlockRecord {
            mode,
            mv,
            ref_index: 0,
            cost: 0,
            sad: 0,
            trans_mv: mv,
            trans_cost: 0,
        }
    }

    #[test]
    fn grid_covers_face_tiles() {
        let l = layout();
        let g = BlockGrid::new(&l, 16, 1).unwrap();
        assert_eq!(g.blocks().len(), 6 * 16);
        let g = BlockGrid::new(&l, 48, 1).unwrap();
        // 48-pixel tiles straddle face borders except where they fit.
        for b in g.blocks() {
            assert!(b.face(&l).is_some());
        }
        assert!(BlockGrid::new(&l, 15, 1).is_err());
    }

    #[test]
    fn merge_candidate_rules() {
        let l = layout();
        let mut g = BlockGrid::new(&l, 16, 1).unwrap();
        // Current block: FRO, left neighbor centered near the FRO center.
        let cur = Block::new(32, 96, 16, 16);
        let left = Block::new(16, 96, 16, 16);
        let above = Block::new(32, 80, 16, 16);
        assert_eq!(merge_candidate(&g, &cur, &l), None);

        g.set_record(&left, record(Mode::AdvAmvp, MotionVector::ZERO)).unwrap();
        g.set_record(&above, record(Mode::Trans, MotionVector::new(8, 0))).unwrap();
        assert_eq!(merge_candidate(&g, &cur, &l), None, "zero and translational neighbors are invalid");

        g.set_record(&above, record(Mode::AdvMerge, MotionVector::new(8, 0))).unwrap();
        let want = transport_mv_predictor(above.center(), MotionVector::new(8, 0), cur.center(), &l);
        assert_eq!(merge_candidate(&g, &cur, &l), Some(want));

        g.set_record(&left, record(Mode::AdvAmvp, MotionVector::new(16, 0))).unwrap();
        let want = transport_mv_predictor(left.center(), MotionVector::new(16, 0), cur.center(), &l);
        assert_eq!(merge_candidate(&g, &cur, &l), Some(want));
    }

    #[test]
    fn merge_candidate_example_geometry() {
        // Neighbor centered on the FRO center with MV (16, 0), current center
        // 8 px to the right: transported predictor (17, 0).
        let l = CubeLayout::square(64).unwrap();
        let nb_center = UnfoldPoint::new(32.0, 96.0);
        assert_eq!(
            transport_mv_predictor(nb_center, MotionVector::new(16, 0), UnfoldPoint::new(40.0, 96.0), &l),
            MotionVector::new(17, 0)
        );
    }

    #[test]
    fn amvp_predictor_rules() {
        let l = layout();
        let cur_pic = Plane::new(256, 192);
        let ref_near = ReferencePicture { luma: &cur_pic, poc: 6 };
        let ref_far = ReferencePicture { luma: &cur_pic, poc: 4 };
        let refs = [ref_near, ref_far];
        let mut g = BlockGrid::new(&l, 16, 8).unwrap();
        let cur = Block::new(32, 96, 16, 16);
        assert_eq!(amvp_predictor(&g, &cur, &ref_near, &refs, &l), MotionVector::ZERO);

        let above = Block::new(32, 80, 16, 16);
        g.set_record(&above, record(Mode::Trans, MotionVector::new(4, 4))).unwrap();
        let from_above = transport_mv_predictor(above.center(), MotionVector::new(4, 4), cur.center(), &l);
        assert_eq!(amvp_predictor(&g, &cur, &ref_near, &refs, &l), from_above);

        // A1 (left) outranks B1 (above).
        let left = Block::new(16, 96, 16, 16);
        g.set_record(&left, record(Mode::AdvAmvp, MotionVector::new(6, -2))).unwrap();
        let from_left = transport_mv_predictor(left.center(), MotionVector::new(6, -2), cur.center(), &l);
        assert_eq!(amvp_predictor(&g, &cur, &ref_near, &refs, &l), from_left);

        // Neighbor refers to POC 6 (distance 2); target POC 4 (distance 4): doubled.
        assert_eq!(
            amvp_predictor(&g, &cur, &ref_far, &refs, &l),
            scale_mv(from_left, 4, 2).unwrap()
        );
        assert_eq!(scale_mv(from_left, 4, 2).unwrap(), MotionVector::new(2 * from_left.dx, 2 * from_left.dy));
    }

    #[test]
    fn static_scene_decides_translational_zero() {
        let l = layout();
        let bank = generate_dctif_bank();
        let cur = textured(64, 5);
        let reference = ReferencePicture { luma: &cur, poc: 0 };
        let mut g = BlockGrid::new(&l, 32, 1).unwrap();
        let cfg = SearchConfig::default();
        for b in g.blocks().to_vec() {
            let r = mode_decide(&b, &cur, &reference, &mut g, &cfg, &l, &bank, Policy::AdvancedEnabled).unwrap();
            assert_eq!((r.mode, r.mv, r.cost), (Mode::Trans, MotionVector::ZERO, 0));
        }
    }

    #[test]
    fn merge_with_true_motion_costs_no_bits() {
        let l = layout();
        let bank = generate_dctif_bank();
        let (_, frames) = synthetic_pair([2.0, 0.0, 0.0]);
        let reference = ReferencePicture { luma: &frames[0].y, poc: 0 };
        let cfg = SearchConfig {
            lambda: 4,
            ..SearchConfig::default()
        };
        let mut g = BlockGrid::new(&l, 16, 1).unwrap();
        let left = Block::new(16, 96, 16, 16);
        let cur = Block::new(32, 96, 16, 16);
        let nb = mode_decide(&left, &frames[1].y, &reference, &mut g, &cfg, &l, &bank, Policy::AdvancedEnabled).unwrap();
        g.set_record(&left, BlockRecord { mode: Mode::AdvAmvp, ..nb }).unwrap();
        let Some(merge_mv) = merge_candidate(&g, &cur, &l) else {
            panic!("left neighbor should yield a merge candidate");
        };
        let r = mode_decide(&cur, &frames[1].y, &reference, &mut g, &cfg, &l, &bank, Policy::AdvancedEnabled).unwrap();
        let plain = evaluate_mv(MotionModel::Advanced, &cur, merge_mv, merge_mv, &frames[1].y, &reference, &cfg, &l, &bank).unwrap();
        if r.mode == Mode::AdvMerge {
            assert_eq!(r.cost, plain.sad);
        }
        assert!(r.cost <= plain.sad);
        assert!(r.cost <= r.trans_cost);
    }

    #[test]
    fn mode_decide_rejects_foreign_blocks() {
        let l = layout();
        let bank = generate_dctif_bank();
        let cur = Plane::new(256, 192);
        let reference = ReferencePicture { luma: &cur, poc: 0 };
        let mut g = BlockGrid::new(&l, 16, 1).unwrap();
        let stray = Block::new(8, 8, 16, 16);
        assert!(mode_decide(&stray, &cur, &reference, &mut g, &SearchConfig::default(), &l, &bank, Policy::TranslationalOnly).is_err());
    }
}
