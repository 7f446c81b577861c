//! Placement geometry: axis-aligned chiplet rectangles on a square
//! interposer, plus the primitive motions (slide, jump, rotate) used by the
//! annealing stages.

/// Comparison slack for legality checks, in mm.
///
/// Two rectangles only count as overlapping when the intersection has
/// positive area beyond this tolerance, so exactly abutting chiplets are
/// legal. The same slack applies to the interposer boundary.
pub const LEGAL_EPS: f64 = 1e-9;

/// A chiplet definition. Dimensions are the unrotated footprint; `rotated`
/// swaps the effective width and height (rotation is always 90 degrees and
/// happens about the chiplet center).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chiplet {
    /// Index of this chiplet in the system; also its position in
    /// [`Placement::chiplets`].
    pub id: usize,
    /// Unrotated width in mm.
    pub width: f64,
    /// Unrotated height in mm.
    pub height: f64,
    /// Dissipated power in W.
    pub power: f64,
    /// Whether the chiplet is rotated by 90 degrees.
    pub rotated: bool,
}

impl Chiplet {
    pub fn new(id: usize, width: f64, height: f64, power: f64) -> Self {
        Chiplet { id, width, height, power, rotated: false }
    }

    /// Footprint (width, height) with the rotation flag applied.
    pub fn effective_dims(&self) -> (f64, f64) {
        if self.rotated {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        }
    }
}

/// Axis-aligned rectangle, `x_min <= x_max`, `y_min <= y_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn from_center(cx: f64, cy: f64, width: f64, height: f64) -> Self {
        Rect {
            x_min: cx - width / 2.0,
            x_max: cx + width / 2.0,
            y_min: cy - height / 2.0,
            y_max: cy + height / 2.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// True when the intersection with `other` has positive area (beyond
    /// [`LEGAL_EPS`]). Sharing an edge or a corner is not an overlap.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min < other.x_max - LEGAL_EPS
            && other.x_min < self.x_max - LEGAL_EPS
            && self.y_min < other.y_max - LEGAL_EPS
            && other.y_min < self.y_max - LEGAL_EPS
    }

    /// True when the rectangle lies inside `[0, size] x [0, size]`, with
    /// [`LEGAL_EPS`] slack on every edge.
    pub fn within(&self, size: f64) -> bool {
        self.x_min >= -LEGAL_EPS
            && self.y_min >= -LEGAL_EPS
            && self.x_max <= size + LEGAL_EPS
            && self.y_max <= size + LEGAL_EPS
    }
}

/// The four slide directions used by the annealing move operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Up, Direction::Down];

    /// Center displacement for a slide of `distance` mm.
    pub fn offset(self, distance: f64) -> (f64, f64) {
        match self {
            Direction::Left => (-distance, 0.0),
            Direction::Right => (distance, 0.0),
            Direction::Up => (0.0, distance),
            Direction::Down => (0.0, -distance),
        }
    }
}

/// An arrangement of chiplets on a square interposer.
///
/// `centers[i]` is the center of `chiplets[i]` in mm, with the interposer
/// occupying `[0, interposer_size]` in both axes. A placement is *legal*
/// when every chiplet lies on the interposer and no two footprints overlap
/// with positive area (see [`Placement::is_legal`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub chiplets: Vec<Chiplet>,
    pub centers: Vec<(f64, f64)>,
    pub interposer_size: f64,
}

impl Placement {
    pub fn new(chiplets: Vec<Chiplet>, centers: Vec<(f64, f64)>, interposer_size: f64) -> Self {
        assert_eq!(chiplets.len(), centers.len(), "one center per chiplet");
        assert!(interposer_size > 0.0, "interposer size must be positive");
        Placement { chiplets, centers, interposer_size }
    }

    pub fn len(&self) -> usize {
        self.chiplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chiplets.is_empty()
    }

    /// Footprint rectangle of chiplet `idx`, rotation applied.
    pub fn rect(&self, idx: usize) -> Rect {
        let (w, h) = self.chiplets[idx].effective_dims();
        let (cx, cy) = self.centers[idx];
        Rect::from_center(cx, cy, w, h)
    }

    /// Bounding box of all chiplet footprints. Panics on an empty placement.
    pub fn bounding_box(&self) -> Rect {
        assert!(!self.is_empty(), "bounding box of an empty placement");
        let mut bb = self.rect(0);
        for idx in 1..self.len() {
            let r = self.rect(idx);
            bb.x_min = bb.x_min.min(r.x_min);
            bb.x_max = bb.x_max.max(r.x_max);
            bb.y_min = bb.y_min.min(r.y_min);
            bb.y_max = bb.y_max.max(r.y_max);
        }
        bb
    }

    /// True when every chiplet is on the interposer and no pair overlaps.
    pub fn is_legal(&self) -> bool {
        let rects: Vec<Rect> = (0..self.len()).map(|i| self.rect(i)).collect();
        for (i, r) in rects.iter().enumerate() {
            if !r.within(self.interposer_size) {
                return false;
            }
            for other in &rects[i + 1..] {
                if r.overlaps(other) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether chiplet `idx` with candidate footprint `rect` would be legal
    /// against the interposer boundary and every *other* chiplet.
    fn rect_is_legal_for(&self, idx: usize, rect: &Rect) -> bool {
        if !rect.within(self.interposer_size) {
            return false;
        }
        (0..self.len()).all(|j| j == idx || !rect.overlaps(&self.rect(j)))
    }

    /// Slide chiplet `idx` by `distance` mm in `direction`. Returns the moved
    /// placement when the result is legal, `None` otherwise. `self` is never
    /// modified. `distance` must be positive.
    pub fn try_move(&self, idx: usize, direction: Direction, distance: f64) -> Option<Placement> {
        assert!(distance > 0.0, "move distance must be positive");
        let (dx, dy) = direction.offset(distance);
        let (cx, cy) = self.centers[idx];
        let target = (cx + dx, cy + dy);
        let (w, h) = self.chiplets[idx].effective_dims();
        let rect = Rect::from_center(target.0, target.1, w, h);
        if !self.rect_is_legal_for(idx, &rect) {
            return None;
        }
        let mut moved = self.clone();
        moved.centers[idx] = target;
        Some(moved)
    }

    /// Teleport chiplet `idx` so its center lands on `target`, toggling the
    /// rotation flag first when `rotate` is set. Returns the new placement
    /// when legal, `None` otherwise.
    pub fn try_jump(&self, idx: usize, target: (f64, f64), rotate: bool) -> Option<Placement> {
        let mut chiplet = self.chiplets[idx];
        if rotate {
            chiplet.rotated = !chiplet.rotated;
        }
        let (w, h) = chiplet.effective_dims();
        let rect = Rect::from_center(target.0, target.1, w, h);
        if !self.rect_is_legal_for(idx, &rect) {
            return None;
        }
        let mut jumped = self.clone();
        jumped.chiplets[idx] = chiplet;
        jumped.centers[idx] = target;
        Some(jumped)
    }

    /// Legal landing centers for chiplet `idx` on a corner-aligned lattice of
    /// pitch `pitch` mm (lower-left footprint corners at integer multiples of
    /// the pitch), with the rotation flag optionally toggled. The chiplet's
    /// current spot is excluded unless the toggle changes its footprint.
    ///
    /// Every returned center is accepted by [`Placement::try_jump`] with the
    /// same `rotate` flag.
    pub fn free_positions(&self, idx: usize, rotate: bool, pitch: f64) -> Vec<(f64, f64)> {
        assert!(pitch > 0.0, "lattice pitch must be positive");
        let mut chiplet = self.chiplets[idx];
        if rotate {
            chiplet.rotated = !chiplet.rotated;
        }
        let (w, h) = chiplet.effective_dims();
        let same_footprint = {
            let (cur_w, cur_h) = self.chiplets[idx].effective_dims();
            (w - cur_w).abs() <= LEGAL_EPS && (h - cur_h).abs() <= LEGAL_EPS
        };
        let size = self.interposer_size;
        let (cur_x, cur_y) = self.centers[idx];

        let mut positions = Vec::new();
        let mut corner_x = 0.0;
        let mut ix = 0u64;
        while corner_x + w <= size + LEGAL_EPS {
            let mut corner_y = 0.0;
            let mut iy = 0u64;
            while corner_y + h <= size + LEGAL_EPS {
                let center = (corner_x + w / 2.0, corner_y + h / 2.0);
                let here = (center.0 - cur_x).abs() <= LEGAL_EPS && (center.1 - cur_y).abs() <= LEGAL_EPS;
                if !(here && same_footprint) {
                    let rect = Rect::from_center(center.0, center.1, w, h);
                    if self.rect_is_legal_for(idx, &rect) {
                        positions.push(center);
                    }
                }
                iy += 1;
                corner_y = iy as f64 * pitch;
            }
            ix += 1;
            corner_x = ix as f64 * pitch;
        }
        positions
    }
}
