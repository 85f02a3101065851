use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Integer database unit.
pub type Dbu = i64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: Dbu,
    pub y: Dbu,
}

impl Point {
    pub const fn new(x: Dbu, y: Dbu) -> Self {
        Point { x, y }
    }

    pub fn translate(self, dx: Dbu, dy: Dbu) -> Self {
        Point::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Point) -> Dbu {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// Axis-aligned rectangle, always stored with `lo <= hi` on both axes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub xlo: Dbu,
    pub ylo: Dbu,
    pub xhi: Dbu,
    pub yhi: Dbu,
}

impl Rect {
    pub fn new(x0: Dbu, y0: Dbu, x1: Dbu, y1: Dbu) -> Self {
        Rect {
            xlo: x0.min(x1),
            ylo: y0.min(y1),
            xhi: x0.max(x1),
            yhi: y0.max(y1),
        }
    }

    pub fn from_origin_size(origin: Point, width: Dbu, height: Dbu) -> Self {
        Rect::new(origin.x, origin.y, origin.x + width, origin.y + height)
    }

    pub fn width(&self) -> Dbu {
        self.xhi - self.xlo
    }

    pub fn height(&self) -> Dbu {
        self.yhi - self.ylo
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.width() == 0 || self.height() == 0
    }

    pub fn lower_left(&self) -> Point {
        Point::new(self.xlo, self.ylo)
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.xlo + self.xhi).div_euclid(2),
            (self.ylo + self.yhi).div_euclid(2),
        )
    }

    /// Closed containment: `other` lies inside `self`, touching allowed.
    pub fn contains(&self, other: &Rect) -> bool {
        other.xlo >= self.xlo && other.ylo >= self.ylo && other.xhi <= self.xhi && other.yhi <= self.yhi
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.xlo && p.x <= self.xhi && p.y >= self.ylo && p.y <= self.yhi
    }

    /// True when the interiors intersect (shared edges do not count).
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.xlo < other.xhi && other.xlo < self.xhi && self.ylo < other.yhi && other.ylo < self.yhi
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            xlo: self.xlo.min(other.xlo),
            ylo: self.ylo.min(other.ylo),
            xhi: self.xhi.max(other.xhi),
            yhi: self.yhi.max(other.yhi),
        }
    }

    pub fn translate(&self, dx: Dbu, dy: Dbu) -> Rect {
        Rect {
            xlo: self.xlo + dx,
            ylo: self.ylo + dy,
            xhi: self.xhi + dx,
            yhi: self.yhi + dy,
        }
    }

    /// Bounding box of a set of rectangles, `None` when empty.
    pub fn hull<'a>(rects: impl IntoIterator<Item = &'a Rect>) -> Option<Rect> {
        rects.into_iter().fold(None, |acc, r| match acc {
            None => Some(*r),
            Some(a) => Some(a.union(r)),
        })
    }
}

/// A rectangle tagged with the layer it lives on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LayerRect {
    pub layer: String,
    pub rect: Rect,
}

impl LayerRect {
    pub fn new(layer: impl Into<String>, rect: Rect) -> Self {
        LayerRect { layer: layer.into(), rect }
    }
}

/// The eight canonical placement orientations (DEF naming).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    N,
    S,
    E,
    W,
    FN,
    FS,
    FE,
    FW,
}

impl Orientation {
    pub const ALL: [Orientation; 8] = [
        Orientation::N,
        Orientation::S,
        Orientation::E,
        Orientation::W,
        Orientation::FN,
        Orientation::FS,
        Orientation::FE,
        Orientation::FW,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::N => "N",
            Orientation::S => "S",
            Orientation::E => "E",
            Orientation::W => "W",
            Orientation::FN => "FN",
            Orientation::FS => "FS",
            Orientation::FE => "FE",
            Orientation::FW => "FW",
        }
    }

    /// Rotations by 90/270 degrees swap the footprint's width and height.
    pub fn swaps_axes(self) -> bool {
        matches!(self, Orientation::E | Orientation::W | Orientation::FE | Orientation::FW)
    }

    /// Footprint (width, height) of a `width` x `height` cell in this orientation.
    pub fn footprint(self, width: Dbu, height: Dbu) -> (Dbu, Dbu) {
        if self.swaps_axes() {
            (height, width)
        } else {
            (width, height)
        }
    }

    /// Maps a point given in the unrotated cell frame (origin at the lower-left
    /// corner of a `width` x `height` cell) into the placed frame, whose origin is
    /// the lower-left corner of the oriented footprint.
    pub fn apply(self, p: Point, width: Dbu, height: Dbu) -> Point {
        let (x, y) = (p.x, p.y);
        let (nx, ny) = match self {
            Orientation::N => (x, y),
            Orientation::S => (width - x, height - y),
            Orientation::W => (height - y, x),
            Orientation::E => (y, width - x),
            Orientation::FN => (width - x, y),
            Orientation::FS => (x, height - y),
            Orientation::FE => (y, x),
            Orientation::FW => (height - y, width - x),
        };
        Point::new(nx, ny)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown orientation `{0}`")]
pub struct UnknownOrientation(pub String);

impl FromStr for Orientation {
    type Err = UnknownOrientation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "N" => Orientation::N,
            "S" => Orientation::S,
            "E" => Orientation::E,
            "W" => Orientation::W,
            "FN" => Orientation::FN,
            "FS" => Orientation::FS,
            "FE" => Orientation::FE,
            "FW" => Orientation::FW,
            _ => return Err(UnknownOrientation(s.into())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_keeps_points_inside_footprint() {
        let (w, h) = (7, 3);
        let corners = [Point::new(0, 0), Point::new(w, 0), Point::new(0, h), Point::new(w, h), Point::new(2, 1)];
        for o in Orientation::ALL {
            let (fw, fh) = o.footprint(w, h);
            let fp = Rect::new(0, 0, fw, fh);
            for c in corners {
                assert!(fp.contains_point(o.apply(c, w, h)), "{o} {c:?}");
            }
        }
    }

    #[test]
    fn orientation_round_trips_through_text() {
        for o in Orientation::ALL {
            assert_eq!(o.as_str().parse::<Orientation>().unwrap(), o);
        }
        assert!("R90".parse::<Orientation>().is_err());
    }

    #[test]
    fn overlap_ignores_shared_edges() {
        let a = Rect::new(0, 0, 10, 10);
        assert!(!a.overlaps(&Rect::new(10, 0, 20, 10)));
        assert!(a.overlaps(&Rect::new(9, 9, 20, 20)));
        assert!(a.overlaps(&a));
    }
}
