//! Sink-set descriptions and the lattice geometry derived from them:
//! membership, graph distances to the sinks, the C-net radius, the
//! superharmonic bound `h`, and the 4-neighbor Laplacian.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::coord::{Coord, Rect};
use crate::error::{Error, Result};

/// Declarative description of the sink set `S`. Cells not in `S` form the
/// working graph `Γ`; `is_sink` is total over ℤ² (for torus quotients,
/// coordinates are taken mod the periods).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinkSpec {
    /// `S = {(mi, nj)}`.
    PeriodicLattice { m: i64, n: i64 },
    /// `Γ = {(i,0) : i ≥ 1}`, everything else is a sink.
    RayComplement,
    /// `Γ = {(i,0) : 1 ≤ i ≤ len}`, everything else is a sink.
    TruncatedRay { len: i64 },
    /// `Γ = {(i,0) : i ∈ ℤ}`.
    FullLineComplement,
    /// The ray plus vertical intervals: an entry `(k, h)` keeps the cells
    /// `(k, 0), (k, 1), …, (k, h−1)` out of the sink set, so the interval
    /// hangs `h − 1` cells above the ray. With `h` a multiple of the rank
    /// of apparition `d(p)`, the interval forces ray values to vanish mod p.
    LineWithIntervals { intervals: Vec<(i64, i64)> },
    /// Periodic quotient graph on `ℤ_m × ℤ_n`; wraparound produces double
    /// edges when `m = 2` or `n = 2`.
    TorusQuotient { m: i64, n: i64, sinks: BTreeSet<(i64, i64)> },
    /// Sinks listed inside a window; every cell outside the window is a sink.
    Explicit { cells: BTreeSet<(i64, i64)>, window: Rect },
}

/// Per-side containment of the non-sink cells; `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportBounds {
    pub x_min: Option<i64>,
    pub x_max: Option<i64>,
    pub y_min: Option<i64>,
    pub y_max: Option<i64>,
}

impl SinkSpec {
    pub fn periodic(m: i64, n: i64) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidSpec("periodic lattice needs m, n >= 2".to_string()));
        }
        Ok(SinkSpec::PeriodicLattice { m, n })
    }

    pub fn truncated_ray(len: i64) -> Result<Self> {
        if len < 1 {
            return Err(Error::InvalidSpec("truncated ray needs length >= 1".to_string()));
        }
        Ok(SinkSpec::TruncatedRay { len })
    }

    pub fn line_with_intervals(intervals: Vec<(i64, i64)>) -> Result<Self> {
        let mut prev = 0;
        for &(k, h) in &intervals {
            if k <= prev {
                return Err(Error::InvalidSpec(
                    "interval positions must be strictly increasing and >= 1".to_string(),
                ));
            }
            if h < 1 {
                return Err(Error::InvalidSpec("interval heights must be >= 1".to_string()));
            }
            prev = k;
        }
        Ok(SinkSpec::LineWithIntervals { intervals })
    }

    pub fn torus(m: i64, n: i64, sinks: BTreeSet<(i64, i64)>) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidSpec("torus quotient needs m, n >= 2".to_string()));
        }
        if sinks.is_empty() {
            return Err(Error::InvalidSpec("torus quotient needs a nonempty sink set".to_string()));
        }
        let sinks: BTreeSet<(i64, i64)> =
            sinks.into_iter().map(|(x, y)| (x.rem_euclid(m), y.rem_euclid(n))).collect();
        Ok(SinkSpec::TorusQuotient { m, n, sinks })
    }

    pub fn explicit(cells: BTreeSet<(i64, i64)>, window: Rect) -> Result<Self> {
        for &(x, y) in &cells {
            if !window.contains(Coord::new(x, y)) {
                return Err(Error::InvalidSpec("explicit sink cell outside its window".to_string()));
            }
        }
        Ok(SinkSpec::Explicit { cells, window })
    }

    /// Total, deterministic membership of `z` in the sink set.
    pub fn is_sink(&self, z: Coord) -> bool {
        match self {
            SinkSpec::PeriodicLattice { m, n } => z.x.rem_euclid(*m) == 0 && z.y.rem_euclid(*n) == 0,
            SinkSpec::RayComplement => !(z.y == 0 && z.x >= 1),
            SinkSpec::TruncatedRay { len } => !(z.y == 0 && z.x >= 1 && z.x <= *len),
            SinkSpec::FullLineComplement => z.y != 0,
            SinkSpec::LineWithIntervals { intervals } => {
                if z.y == 0 {
                    return z.x < 1;
                }
                if z.y < 0 {
                    return true;
                }
                !intervals.iter().any(|&(k, h)| z.x == k && z.y < h)
            }
            SinkSpec::TorusQuotient { m, n, sinks } => {
                sinks.contains(&(z.x.rem_euclid(*m), z.y.rem_euclid(*n)))
            }
            SinkSpec::Explicit { cells, window } => {
                !window.contains(z) || cells.contains(&(z.x, z.y))
            }
        }
    }

    /// `Some((m, n))` when states live on the finite quotient graph.
    pub fn torus_dims(&self) -> Option<(i64, i64)> {
        match self {
            SinkSpec::TorusQuotient { m, n, .. } => Some((*m, *n)),
            _ => None,
        }
    }

    /// Where the non-sink cells can live. Window growth never needs to go
    /// past these bounds.
    pub fn support_bounds(&self) -> SupportBounds {
        match self {
            SinkSpec::PeriodicLattice { .. } => SupportBounds {
                x_min: None,
                x_max: None,
                y_min: None,
                y_max: None,
            },
            SinkSpec::RayComplement => SupportBounds {
                x_min: Some(1),
                x_max: None,
                y_min: Some(0),
                y_max: Some(0),
            },
            SinkSpec::TruncatedRay { len } => SupportBounds {
                x_min: Some(1),
                x_max: Some(*len),
                y_min: Some(0),
                y_max: Some(0),
            },
            SinkSpec::FullLineComplement => SupportBounds {
                x_min: None,
                x_max: None,
                y_min: Some(0),
                y_max: Some(0),
            },
            SinkSpec::LineWithIntervals { intervals } => SupportBounds {
                x_min: Some(1),
                x_max: None,
                y_min: Some(0),
                y_max: Some(intervals.iter().map(|&(_, h)| h - 1).max().unwrap_or(0)),
            },
            SinkSpec::TorusQuotient { m, n, .. } => SupportBounds {
                x_min: Some(0),
                x_max: Some(m - 1),
                y_min: Some(0),
                y_max: Some(n - 1),
            },
            SinkSpec::Explicit { window, .. } => SupportBounds {
                x_min: Some(window.x0),
                x_max: Some(window.x1),
                y_min: Some(window.y0),
                y_max: Some(window.y1),
            },
        }
    }

    /// Number of sink neighbors of `z` (with multiplicity on quotients);
    /// 0 at sinks. This is the Creutz identity `β = Δ 1_S` pointwise.
    pub fn beta_at(&self, z: Coord) -> u8 {
        if self.is_sink(z) {
            return 0;
        }
        match self.torus_dims() {
            Some((m, n)) => {
                let mut count = 0;
                for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let t = Coord::new((z.x + d.0).rem_euclid(m), (z.y + d.1).rem_euclid(n));
                    if self.is_sink(t) {
                        count += 1;
                    }
                }
                count
            }
            None => z.neighbors().iter().filter(|&&t| self.is_sink(t)).count() as u8,
        }
    }

    /// Graph distance from `z` to the nearest sink, or `None` past `cap`.
    pub fn distance_to_sink(&self, z: Coord, cap: u32) -> Option<u32> {
        if self.is_sink(z) {
            return Some(0);
        }
        // Expanding BFS from z; any shortest path to a sink is found in
        // order of length.
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.canonical(z));
        queue.push_back((self.canonical(z), 0u32));
        while let Some((cur, d)) = queue.pop_front() {
            if d >= cap {
                continue;
            }
            for nbr in self.neighbors_canonical(cur) {
                if self.is_sink(nbr) {
                    return Some(d + 1);
                }
                if seen.insert(nbr) {
                    queue.push_back((nbr, d + 1));
                }
            }
        }
        None
    }

    fn canonical(&self, z: Coord) -> Coord {
        match self.torus_dims() {
            Some((m, n)) => Coord::new(z.x.rem_euclid(m), z.y.rem_euclid(n)),
            None => z,
        }
    }

    fn neighbors_canonical(&self, z: Coord) -> Vec<Coord> {
        match self.torus_dims() {
            Some((m, n)) => [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .map(|d| Coord::new((z.x + d.0).rem_euclid(m), (z.y + d.1).rem_euclid(n)))
                .collect(),
            None => z.neighbors().to_vec(),
        }
    }

    /// Max over the probed non-sink cells of the distance to the nearest
    /// sink. Errors with the offending cell if a distance exceeds `cap`.
    pub fn cnet_radius(&self, probe: Rect, cap: u32) -> Result<u32> {
        let mut radius = 0;
        for z in probe.iter() {
            if self.is_sink(z) {
                continue;
            }
            match self.distance_to_sink(z, cap) {
                Some(d) => radius = radius.max(d),
                None => return Err(Error::DistanceCapExceeded { cell: z, cap }),
            }
        }
        Ok(radius)
    }

    /// A C-net bound derived from the variant itself (not from probing).
    /// `None` only for specs with no a-priori bound.
    pub fn cnet_bound(&self) -> Option<u32> {
        match self {
            SinkSpec::PeriodicLattice { m, n } => Some((m / 2 + n / 2) as u32),
            SinkSpec::RayComplement
            | SinkSpec::TruncatedRay { .. }
            | SinkSpec::FullLineComplement
            | SinkSpec::LineWithIntervals { .. } => Some(1),
            SinkSpec::TorusQuotient { m, n, .. } => {
                let probe = Rect::new(0, 0, m - 1, n - 1);
                self.cnet_radius(probe, (m + n) as u32).ok()
            }
            SinkSpec::Explicit { window, .. } => {
                // Everything outside the window is a sink, so distances are
                // bounded by a window traversal.
                let cap = (window.width() + window.height()) as u32;
                self.cnet_radius(*window, cap).ok()
            }
        }
    }

    /// The superharmonic bound `h(z) = Σ_{k=1..dist(z,S)} 4^{C−k}`;
    /// 0 at sinks. Rejects `C < dist(z, S)`.
    pub fn superharmonic_h(&self, z: Coord, c: u32) -> Result<BigUint> {
        let dist = self
            .distance_to_sink(z, c + 1)
            .ok_or(Error::SuperharmonicOutOfRange { cell: z, dist: c + 1, c })?;
        if dist > c {
            return Err(Error::SuperharmonicOutOfRange { cell: z, dist, c });
        }
        let mut h = BigUint::zero();
        for k in 1..=dist {
            h += BigUint::from(4u32).pow(c - k);
        }
        Ok(h)
    }

    /// 4-neighbor Laplacian `Δf(z) = Σ_{z'~z} f(z') − 4 f(z)` of an
    /// integer-valued function that vanishes on sinks. Sink neighbors
    /// contribute 0, and at sinks the value is 0 by convention.
    pub fn laplacian_at<F: Fn(Coord) -> i64>(&self, f: F, z: Coord) -> i64 {
        if self.is_sink(z) {
            return 0;
        }
        let z = self.canonical(z);
        let mut acc: i64 = -4 * f(z);
        for nbr in self.neighbors_canonical(z) {
            if !self.is_sink(nbr) {
                acc += f(nbr);
            }
        }
        acc
    }
}

/// Distances to the nearest sink for every cell of `window`, allowing paths
/// that leave the window. `None` entries exceed `cap`.
pub fn sink_distance_map(spec: &SinkSpec, window: Rect, cap: u32) -> Vec<Option<u32>> {
    if let Some((m, n)) = spec.torus_dims() {
        // BFS on the finite quotient.
        let quot = Rect::new(0, 0, m - 1, n - 1);
        let mut dist = vec![None; quot.area() as usize];
        let mut queue = VecDeque::new();
        for z in quot.iter() {
            if spec.is_sink(z) {
                dist[quot.index_of(z)] = Some(0);
                queue.push_back(z);
            }
        }
        while let Some(z) = queue.pop_front() {
            let d = dist[quot.index_of(z)].unwrap();
            if d >= cap {
                continue;
            }
            for dxy in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let t = Coord::new((z.x + dxy.0).rem_euclid(m), (z.y + dxy.1).rem_euclid(n));
                let ti = quot.index_of(t);
                if dist[ti].is_none() {
                    dist[ti] = Some(d + 1);
                    queue.push_back(t);
                }
            }
        }
        return window
            .iter()
            .map(|z| dist[quot.index_of(Coord::new(z.x.rem_euclid(m), z.y.rem_euclid(n)))])
            .collect();
    }

    // Plane case: any path of length <= cap from a window cell stays inside
    // the window grown by cap, so BFS there from every sink is exact.
    let region = window.grow(cap as i64);
    let mut dist: Vec<Option<u32>> = vec![None; region.area() as usize];
    let mut queue = VecDeque::new();
    for z in region.iter() {
        if spec.is_sink(z) {
            dist[region.index_of(z)] = Some(0);
            queue.push_back(z);
        }
    }
    while let Some(z) = queue.pop_front() {
        let d = dist[region.index_of(z)].unwrap();
        if d >= cap {
            continue;
        }
        for nbr in z.neighbors() {
            if region.contains(nbr) {
                let ni = region.index_of(nbr);
                if dist[ni].is_none() {
                    dist[ni] = Some(d + 1);
                    queue.push_back(nbr);
                }
            }
        }
    }
    window.iter().map(|z| dist[region.index_of(z)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_sink_examples() {
        let p66 = SinkSpec::periodic(6, 6).unwrap();
        assert!(p66.is_sink(Coord::new(0, 0)));
        assert!(!p66.is_sink(Coord::new(3, 3)));

        let ray = SinkSpec::RayComplement;
        assert!(!ray.is_sink(Coord::new(5, 0)));
        assert!(ray.is_sink(Coord::new(5, 1)));
        assert!(ray.is_sink(Coord::new(0, 0)));
        assert!(ray.is_sink(Coord::new(-3, 0)));
    }

    #[test]
    fn cnet_radius_examples() {
        let p22 = SinkSpec::periodic(2, 2).unwrap();
        assert_eq!(p22.cnet_radius(Rect::new(0, 0, 3, 3), 16).unwrap(), 2);

        let p66 = SinkSpec::periodic(6, 6).unwrap();
        assert_eq!(p66.cnet_radius(Rect::new(0, 0, 11, 11), 32).unwrap(), 6);

        let ray = SinkSpec::RayComplement;
        assert_eq!(ray.cnet_radius(Rect::new(-2, -2, 12, 2), 8).unwrap(), 1);
    }

    #[test]
    fn cnet_radius_matches_closed_form() {
        for m in 2..=8 {
            for n in 2..=8 {
                let spec = SinkSpec::periodic(m, n).unwrap();
                let probe = Rect::new(0, 0, 2 * m - 1, 2 * n - 1);
                let r = spec.cnet_radius(probe, 64).unwrap();
                assert_eq!(r as i64, m / 2 + n / 2, "periodic({m},{n})");
            }
        }
    }

    #[test]
    fn superharmonic_h_values() {
        let p22 = SinkSpec::periodic(2, 2).unwrap();
        // distance 1 cell
        assert_eq!(p22.superharmonic_h(Coord::new(1, 0), 2).unwrap(), BigUint::from(4u32));
        // distance 2 cell
        assert_eq!(p22.superharmonic_h(Coord::new(1, 1), 2).unwrap(), BigUint::from(5u32));
        // sink
        assert_eq!(p22.superharmonic_h(Coord::new(0, 0), 2).unwrap(), BigUint::zero());
        // C below the actual distance is rejected
        assert!(p22.superharmonic_h(Coord::new(1, 1), 1).is_err());
    }

    #[test]
    fn h_is_strictly_superharmonic() {
        // Δh <= -1 at every non-sink cell, h >= 0, h = 0 exactly on S.
        for m in 2..=8i64 {
            for n in 2..=8i64 {
                let spec = SinkSpec::periodic(m, n).unwrap();
                let c = spec.cnet_bound().unwrap();
                let probe = Rect::new(-m, -n, 2 * m, 2 * n);
                let h = |z: Coord| {
                    let v = spec.superharmonic_h(z, c).unwrap();
                    i64::try_from(&v).unwrap()
                };
                for z in probe.iter() {
                    if spec.is_sink(z) {
                        assert_eq!(h(z), 0);
                    } else {
                        assert!(h(z) > 0);
                        assert!(spec.laplacian_at(h, z) <= -1, "Δh at {z} on ({m},{n})");
                    }
                }
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let ray = SinkSpec::RayComplement;
        let one_on_ray = |z: Coord| if !ray.is_sink(z) { 1 } else { 0 };
        assert_eq!(ray.laplacian_at(one_on_ray, Coord::new(5, 0)), -2);
        assert_eq!(ray.laplacian_at(one_on_ray, Coord::new(1, 0)), -3);
        assert_eq!(ray.laplacian_at(|_| 0, Coord::new(7, 0)), 0);
        // at sinks the Laplacian is 0 by definition
        assert_eq!(ray.laplacian_at(one_on_ray, Coord::new(5, 3)), 0);
    }

    #[test]
    fn beta_examples() {
        let ray = SinkSpec::RayComplement;
        assert_eq!(ray.beta_at(Coord::new(1, 0)), 3);
        assert_eq!(ray.beta_at(Coord::new(2, 0)), 2);
        assert_eq!(ray.beta_at(Coord::new(17, 0)), 2);

        let p22 = SinkSpec::periodic(2, 2).unwrap();
        assert_eq!(p22.beta_at(Coord::new(1, 0)), 2);
        assert_eq!(p22.beta_at(Coord::new(1, 1)), 0);

        let t = SinkSpec::torus(6, 6, [(0i64, 0i64)].into_iter().collect()).unwrap();
        assert_eq!(t.beta_at(Coord::new(1, 0)), 1);
        assert_eq!(t.beta_at(Coord::new(5, 0)), 1);
        assert_eq!(t.beta_at(Coord::new(3, 3)), 0);
    }

    #[test]
    fn beta_counts_multiplicity_on_small_torus() {
        // 2x2 torus with one sink: both lattice directions wrap onto the
        // same neighbor, so (1,0) touches the sink twice horizontally.
        let t = SinkSpec::torus(2, 2, [(0i64, 0i64)].into_iter().collect()).unwrap();
        assert_eq!(t.beta_at(Coord::new(1, 0)), 2);
        assert_eq!(t.beta_at(Coord::new(0, 1)), 2);
        assert_eq!(t.beta_at(Coord::new(1, 1)), 0);
    }

    #[test]
    fn line_with_intervals_membership() {
        let spec = SinkSpec::line_with_intervals(vec![(3, 2), (10, 6)]).unwrap();
        assert!(!spec.is_sink(Coord::new(1, 0)));
        assert!(!spec.is_sink(Coord::new(3, 1)));
        assert!(spec.is_sink(Coord::new(3, 2))); // height 2 = attachment + 1 cell
        assert!(!spec.is_sink(Coord::new(10, 5)));
        assert!(spec.is_sink(Coord::new(10, 6)));
        assert!(spec.is_sink(Coord::new(4, 1)));
        assert!(spec.is_sink(Coord::new(0, 0)));
        assert_eq!(spec.cnet_bound(), Some(1));
    }

    #[test]
    fn distance_map_matches_pointwise() {
        let spec = SinkSpec::periodic(3, 5).unwrap();
        let window = Rect::new(-4, -4, 8, 8);
        let map = sink_distance_map(&spec, window, 32);
        for z in window.iter() {
            assert_eq!(map[window.index_of(z)], spec.distance_to_sink(z, 32), "{z}");
        }
    }
}
