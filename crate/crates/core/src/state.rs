//! Sandpile states: dense non-negative grain counts over a finite window,
//! a constant background outside it, and the sink set they live on.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::coord::{Coord, Rect};
use crate::error::{Error, Result};
use crate::sink::SinkSpec;

/// A sandpile state. Values at sink cells are identically 0 (grains entering
/// a sink vanish), and the background must be stable (≤ 3) so the state is
/// stable at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandState {
    spec: SinkSpec,
    window: Rect,
    background: u8,
    cells: Vec<BigUint>,
}

impl SandState {
    /// An all-background state (zeros at sinks).
    pub fn new(spec: SinkSpec, window: Rect, background: u8) -> Result<Self> {
        Self::validate_geometry(&spec, window, background)?;
        let cells = window
            .iter()
            .map(|z| {
                if spec.is_sink(z) {
                    BigUint::zero()
                } else {
                    BigUint::from(background)
                }
            })
            .collect();
        Ok(SandState { spec, window, background, cells })
    }

    /// Build from explicit cell values in row-major window order. Values at
    /// sink positions are forced to 0.
    pub fn from_cells(
        spec: SinkSpec,
        window: Rect,
        background: u8,
        mut cells: Vec<BigUint>,
    ) -> Result<Self> {
        Self::validate_geometry(&spec, window, background)?;
        if cells.len() != window.area() as usize {
            return Err(Error::InvalidState("cell array does not match the window".to_string()));
        }
        for z in window.iter() {
            if spec.is_sink(z) {
                cells[window.index_of(z)] = BigUint::zero();
            }
        }
        Ok(SandState { spec, window, background, cells })
    }

    fn validate_geometry(spec: &SinkSpec, window: Rect, background: u8) -> Result<()> {
        if background > 3 {
            return Err(Error::InvalidState(
                "background > 3 is not stable at infinity".to_string(),
            ));
        }
        if let Some((m, n)) = spec.torus_dims() {
            if window != Rect::new(0, 0, m - 1, n - 1) {
                return Err(Error::InvalidState(
                    "torus states live on the full quotient window".to_string(),
                ));
            }
            if background != 0 {
                return Err(Error::InvalidState(
                    "torus states have no outside; background must be 0".to_string(),
                ));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &SinkSpec {
        &self.spec
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn background(&self) -> u8 {
        self.background
    }

    pub fn cells(&self) -> &[BigUint] {
        &self.cells
    }

    /// Grain count at `z`: 0 at sinks, the background outside the window.
    pub fn get(&self, z: Coord) -> BigUint {
        let z = self.canonical(z);
        if self.spec.is_sink(z) {
            BigUint::zero()
        } else if self.window.contains(z) {
            self.cells[self.window.index_of(z)].clone()
        } else {
            BigUint::from(self.background)
        }
    }

    fn canonical(&self, z: Coord) -> Coord {
        match self.spec.torus_dims() {
            Some((m, n)) => Coord::new(z.x.rem_euclid(m), z.y.rem_euclid(n)),
            None => z,
        }
    }

    /// Drop `amount` grains on `z`. Grains placed on a sink vanish.
    pub fn add_grains(&mut self, z: Coord, amount: &BigUint) -> Result<()> {
        let z = self.canonical(z);
        if self.spec.is_sink(z) {
            return Ok(());
        }
        if !self.window.contains(z) {
            return Err(Error::InvalidState("cell outside the state window".to_string()));
        }
        let idx = self.window.index_of(z);
        self.cells[idx] += amount;
        Ok(())
    }

    pub fn set(&mut self, z: Coord, value: BigUint) -> Result<()> {
        let z = self.canonical(z);
        if !self.window.contains(z) {
            return Err(Error::InvalidState("cell outside the state window".to_string()));
        }
        let idx = self.window.index_of(z);
        self.cells[idx] = if self.spec.is_sink(z) { BigUint::zero() } else { value };
        Ok(())
    }

    /// True when every non-sink cell of the window holds at most 3 grains.
    pub fn is_stable(&self) -> bool {
        let four = BigUint::from(4u8);
        self.window.iter().all(|z| self.spec.is_sink(z) || self.get_ref(z) < &four)
    }

    fn get_ref(&self, z: Coord) -> &BigUint {
        &self.cells[self.window.index_of(z)]
    }

    /// Re-embed into a larger window (new non-sink cells take the background).
    pub fn embed(&self, window: Rect) -> Result<SandState> {
        if self.spec.torus_dims().is_some() {
            return Err(Error::CarrierMismatch("torus states cannot be re-windowed".to_string()));
        }
        if window.intersect(&self.window) != Some(self.window) {
            return Err(Error::InvalidState("embed window must contain the current one".to_string()));
        }
        let mut out = SandState::new(self.spec.clone(), window, self.background)?;
        for z in self.window.iter() {
            let v = self.cells[self.window.index_of(z)].clone();
            out.set(z, v)?;
        }
        Ok(out)
    }

    /// Cell values as `i64`, or `None` if any cell does not fit.
    pub fn cells_i64(&self) -> Option<Vec<i64>> {
        self.cells.iter().map(|v| v.to_i64()).collect()
    }

    /// Pointwise sum over a common window.
    pub fn pointwise_add(&self, other: &SandState) -> Result<SandState> {
        if self.spec != other.spec {
            return Err(Error::CarrierMismatch("adding states over different sink sets".to_string()));
        }
        let window = self.window.union(&other.window);
        let bg = self.background + other.background;
        if bg > 3 {
            return Err(Error::InvalidState("combined background exceeds 3".to_string()));
        }
        let mut out = SandState::new(self.spec.clone(), window, bg)?;
        for z in window.iter() {
            if !self.spec.is_sink(z) {
                let v = self.get(z) + other.get(z);
                out.set(z, v)?;
            }
        }
        Ok(out)
    }

    /// Total grains inside the window.
    pub fn window_mass(&self) -> BigUint {
        self.cells.iter().sum()
    }
}

/// Per-cell toppling counts of a relaxation; zero on sinks and outside its
/// window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odometer {
    window: Rect,
    counts: Vec<BigUint>,
}

impl Odometer {
    pub(crate) fn from_counts(window: Rect, counts: Vec<BigUint>) -> Self {
        debug_assert_eq!(counts.len(), window.area() as usize);
        Odometer { window, counts }
    }

    pub fn zero(window: Rect) -> Self {
        Odometer { window, counts: vec![BigUint::zero(); window.area() as usize] }
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, z: Coord) -> BigUint {
        if self.window.contains(z) {
            self.counts[self.window.index_of(z)].clone()
        } else {
            BigUint::zero()
        }
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = Coord> + '_ {
        self.window.iter().filter(|z| !self.counts[self.window.index_of(*z)].is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn background_guard() {
        let spec = SinkSpec::periodic(2, 2).unwrap();
        assert!(SandState::new(spec.clone(), Rect::new(0, 0, 3, 3), 4).is_err());
        assert!(SandState::new(spec, Rect::new(0, 0, 3, 3), 3).is_ok());
    }

    #[test]
    fn sink_cells_are_zero() {
        let spec = SinkSpec::periodic(2, 2).unwrap();
        let mut s = SandState::new(spec, Rect::new(0, 0, 3, 3), 2).unwrap();
        assert_eq!(s.get(Coord::new(0, 0)), BigUint::zero());
        assert_eq!(s.get(Coord::new(1, 1)), BigUint::from(2u8));
        // grains dropped on a sink vanish
        s.add_grains(Coord::new(2, 2), &BigUint::from(10u8)).unwrap();
        assert_eq!(s.get(Coord::new(2, 2)), BigUint::zero());
        // outside the window the background shows through
        assert_eq!(s.get(Coord::new(5, 1)), BigUint::from(2u8));
    }

    #[test]
    fn torus_window_must_match() {
        let spec = SinkSpec::torus(3, 3, [(0i64, 0i64)].into_iter().collect()).unwrap();
        assert!(SandState::new(spec.clone(), Rect::new(0, 0, 2, 2), 0).is_ok());
        assert!(SandState::new(spec, Rect::new(0, 0, 3, 3), 0).is_err());
    }

    #[test]
    fn embed_keeps_values() {
        let spec = SinkSpec::truncated_ray(5).unwrap();
        let mut s = SandState::new(spec, Rect::new(1, 0, 5, 0), 0).unwrap();
        s.add_grains(Coord::new(2, 0), &BigUint::from(7u8)).unwrap();
        let big = s.embed(Rect::new(0, -1, 6, 1)).unwrap();
        assert_eq!(big.get(Coord::new(2, 0)), BigUint::from(7u8));
        assert_eq!(big.get(Coord::new(4, 0)), BigUint::zero());
    }
}
