use core::fmt;

/// A point of ℤ². Negative coordinates are as good as positive ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub x: i64,
    pub y: i64,
}

impl Coord {
    pub const fn new(x: i64, y: i64) -> Self {
        Coord { x, y }
    }

    /// The four lattice neighbors, in a fixed (E, W, N, S) order.
    pub fn neighbors(self) -> [Coord; 4] {
        [
            Coord::new(self.x + 1, self.y),
            Coord::new(self.x - 1, self.y),
            Coord::new(self.x, self.y + 1),
            Coord::new(self.x, self.y - 1),
        ]
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A closed axis-aligned rectangle `[x0..=x1] × [y0..=y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, z: Coord) -> bool {
        z.x >= self.x0 && z.x <= self.x1 && z.y >= self.y0 && z.y <= self.y1
    }

    /// Row-major index of `z` inside the rectangle.
    pub fn index_of(&self, z: Coord) -> usize {
        debug_assert!(self.contains(z));
        ((z.y - self.y0) * self.width() + (z.x - self.x0)) as usize
    }

    pub fn coord_of(&self, idx: usize) -> Coord {
        let w = self.width();
        Coord::new(self.x0 + (idx as i64) % w, self.y0 + (idx as i64) / w)
    }

    /// All cells in row-major order (y outer, x inner).
    pub fn iter(&self) -> impl Iterator<Item = Coord> {
        let r = *self;
        (r.y0..=r.y1).flat_map(move |y| (r.x0..=r.x1).map(move |x| Coord::new(x, y)))
    }

    pub fn grow(&self, by: i64) -> Rect {
        Rect::new(self.x0 - by, self.y0 - by, self.x1 + by, self.y1 + by)
    }

    pub fn shrink(&self, by: i64) -> Option<Rect> {
        if self.width() > 2 * by && self.height() > 2 * by {
            Some(Rect::new(self.x0 + by, self.y0 + by, self.x1 - by, self.y1 - by))
        } else {
            None
        }
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        if x0 <= x1 && y0 <= y1 {
            Some(Rect::new(x0, y0, x1, y1))
        } else {
            None
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x0.min(other.x0),
            self.y0.min(other.y0),
            self.x1.max(other.x1),
            self.y1.max(other.y1),
        )
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]x[{}..{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_indexing_roundtrip() {
        let r = Rect::new(-2, 3, 4, 7);
        for (i, z) in r.iter().enumerate() {
            assert_eq!(r.index_of(z), i);
            assert_eq!(r.coord_of(i), z);
        }
        assert_eq!(r.area(), 35);
    }

    #[test]
    fn rect_shrink_too_small() {
        assert!(Rect::new(0, 0, 5, 5).shrink(3).is_none());
        assert_eq!(Rect::new(0, 0, 6, 6).shrink(3), Some(Rect::new(3, 3, 3, 3)));
    }
}
