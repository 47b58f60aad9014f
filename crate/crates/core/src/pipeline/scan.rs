//! Window scanning with SOM / neuro-fuzzy fusion.
//!
//! Each window looks at the two blocks nearest its center among those with
//! a fragment inside it. The SOM classifies their gravity centers, the TSK
//! model their full pair features. Matching answers are reported as agreed;
//! otherwise both are kept, flagged, and the TSK answer is the primary one.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, gravity_features};
use super::PipelineError;
use crate::anfis::TskModel;
use crate::geometry::{penetration_depth, Block, ContactState, Point};
use crate::som::{SomError, SomGrid};

/// Axis-aligned rectangular region of the block domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: Point,
    pub max: Point,
}

impl Domain {
    pub fn new(min: Point, max: Point) -> Result<Self, PipelineError> {
        if !(max.x > min.x && max.y > min.y)
            || !(min.x.is_finite() && max.x.is_finite() && min.y.is_finite() && max.y.is_finite())
        {
            return Err(PipelineError::InvalidWindow("domain must have positive extent".into()));
        }
        Ok(Self { min, max })
    }

    /// Bounding box of `blocks` grown by `margin` on every side.
    pub fn around(blocks: &[Block], margin: f64) -> Result<Self, PipelineError> {
        let (mut lo, mut hi) =
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for b in blocks {
            let (l, h) = b.bounds();
            lo = Point::new(lo.x.min(l.x), lo.y.min(l.y));
            hi = Point::new(hi.x.max(h.x), hi.y.max(h.y));
        }
        Self::new(lo - Point::new(margin, margin), hi + Point::new(margin, margin))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, w: &Window) -> bool {
        w.origin.x >= self.min.x
            && w.origin.y >= self.min.y
            && w.origin.x + w.width <= self.max.x
            && w.origin.y + w.height <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// Lower-left corner.
    pub origin: Point,
    pub width: f64,
    pub height: f64,
}

impl Window {
    pub fn center(&self) -> Point {
        self.origin + Point::new(0.5 * self.width, 0.5 * self.height)
    }

    fn as_block(&self) -> Block {
        Block::rectangle(-1, self.origin.x, self.origin.y, self.origin.x + self.width, self.origin.y + self.height)
            .expect("windows have positive size")
    }

    /// Whether a positive-area part of `block` lies inside the window.
    pub fn holds(&self, block: &Block) -> bool {
        penetration_depth(&self.as_block(), block) > 0.0
    }
}

/// `count` windows of the given size placed uniformly at random inside
/// `domain`.
pub fn random_windows(
    domain: &Domain,
    count: usize,
    width: f64,
    height: f64,
    seed: u64,
) -> Result<Vec<Window>, PipelineError> {
    if count == 0 {
        return Err(PipelineError::InvalidWindow("count must be at least 1".into()));
    }
    if !(width > 0.0 && height > 0.0) {
        return Err(PipelineError::InvalidWindow("window size must be positive".into()));
    }
    if width > domain.width() || height > domain.height() {
        return Err(PipelineError::SizeTooLarge {
            width,
            height,
            domain_width: domain.width(),
            domain_height: domain.height(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free_x = domain.width() - width;
    let free_y = domain.height() - height;
    Ok((0..count)
        .map(|_| {
            let ox = domain.min.x + free_x * rng.gen::<f64>();
            let oy = domain.min.y + free_y * rng.gen::<f64>();
            Window { origin: Point::new(ox, oy), width, height }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusedState {
    Agree(ContactState),
    Disagree { som: ContactState, nfis: ContactState },
}

impl FusedState {
    /// Reported state: the TSK answer when the classifiers differ.
    pub fn primary(&self) -> ContactState {
        match *self {
            FusedState::Agree(s) => s,
            FusedState::Disagree { nfis, .. } => nfis,
        }
    }

    pub fn disagrees(&self) -> bool {
        matches!(self, FusedState::Disagree { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub window: Window,
    /// Indices of the two blocks examined, if the window held at least two.
    pub pair: Option<(usize, usize)>,
    pub som: ContactState,
    pub nfis: ContactState,
    pub fused: FusedState,
}

fn scan_one(window: &Window, blocks: &[Block], som: &SomGrid, nfis: &TskModel) -> Result<WindowReport, PipelineError> {
    let center = window.center();
    let mut inside: Vec<(f64, usize)> = blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| window.holds(b))
        .map(|(i, b)| (b.distance_to_point(center), i))
        .collect();
    if inside.len() < 2 {
        let none = ContactState::None;
        return Ok(WindowReport { window: *window, pair: None, som: none, nfis: none, fused: FusedState::Agree(none) });
    }
    inside.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (a, b) = (inside[0].1.min(inside[1].1), inside[0].1.max(inside[1].1));
    let features = extract_features(&blocks[a], &blocks[b])?;
    let som_state = som.classify(&gravity_features(&features)?)?;
    let nfis_state = nfis.predict_contact_state(&features)?;
    let fused = if som_state == nfis_state {
        FusedState::Agree(nfis_state)
    } else {
        FusedState::Disagree { som: som_state, nfis: nfis_state }
    };
    Ok(WindowReport { window: *window, pair: Some((a, b)), som: som_state, nfis: nfis_state, fused })
}

/// Scan every window over a scene snapshot. Reports are in window order.
pub fn scan_windows(
    windows: &[Window],
    blocks: &[Block],
    som: &SomGrid,
    nfis: &TskModel,
) -> Result<Vec<WindowReport>, PipelineError> {
    if som.labels().is_none() {
        return Err(SomError::UnlabeledGrid.into());
    }
    windows.iter().map(|w| scan_one(w, blocks, som, nfis)).collect()
}

/// Window report CSV: `wx,wy,ww,wh,som,nfis,fused,disagree`.
pub fn window_report_csv(reports: &[WindowReport]) -> String {
    let mut out = String::from("wx,wy,ww,wh,som,nfis,fused,disagree\n");
    for r in reports {
        let w = &r.window;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            w.origin.x,
            w.origin.y,
            w.width,
            w.height,
            r.som,
            r.nfis,
            r.fused.primary(),
            r.fused.disagrees()
        );
    }
    out
}

/// Fused contact map over a regular grid of window centers, as gnuplot
/// `x y code` lines with a blank line after each row of constant `y`.
///
/// Each grid point is scanned with a window of the given size centered on
/// it, shifted as needed to stay inside the domain.
#[allow(clippy::too_many_arguments)]
pub fn contact_map(
    domain: &Domain,
    resolution: f64,
    width: f64,
    height: f64,
    blocks: &[Block],
    som: &SomGrid,
    nfis: &TskModel,
) -> Result<String, PipelineError> {
    if !(resolution > 0.0) {
        return Err(PipelineError::InvalidWindow("map resolution must be positive".into()));
    }
    if width > domain.width() || height > domain.height() {
        return Err(PipelineError::SizeTooLarge {
            width,
            height,
            domain_width: domain.width(),
            domain_height: domain.height(),
        });
    }
    if som.labels().is_none() {
        return Err(SomError::UnlabeledGrid.into());
    }
    let nx = (domain.width() / resolution).floor() as usize + 1;
    let ny = (domain.height() / resolution).floor() as usize + 1;
    let mut out = String::from("# x y code\n");
    for iy in 0..ny {
        let y = domain.min.y + iy as f64 * resolution;
        for ix in 0..nx {
            let x = domain.min.x + ix as f64 * resolution;
            let ox = (x - 0.5 * width).clamp(domain.min.x, domain.max.x - width);
            let oy = (y - 0.5 * height).clamp(domain.min.y, domain.max.y - height);
            let window = Window { origin: Point::new(ox, oy), width, height };
            let report = scan_one(&window, blocks, som, nfis)?;
            let _ = writeln!(out, "{x} {y} {}", report.fused.primary());
        }
        out.push('\n');
    }
    Ok(out)
}
