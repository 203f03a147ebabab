//! The sandpile group realized operationally: recurrent states under
//! pointwise addition followed by relaxation. The neutral element is the
//! limit of `(nβ)°`, inverses come from `(−φ + nβ)°`, and recurrence is
//! `(φ + β)° = φ` (Dhar's burning test gives the same answer on finite
//! quotients).

use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::coord::{Coord, Rect};
use crate::error::{Error, Result};
use crate::linalg::{self, LocalGraph};
use crate::relax::relax_signed;
use crate::sink::SinkSpec;
use crate::state::SandState;

/// A finite torus quotient of the lattice with a nonempty sink set. Every
/// vertex keeps total degree 4; periods of 2 produce double edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusSandpile {
    m: i64,
    n: i64,
    sinks: BTreeSet<(i64, i64)>,
}

impl TorusSandpile {
    pub fn new(m: i64, n: i64, sinks: impl IntoIterator<Item = (i64, i64)>) -> Result<Self> {
        let spec = SinkSpec::torus(m, n, sinks.into_iter().collect())?;
        match spec {
            SinkSpec::TorusQuotient { m, n, sinks } => Ok(TorusSandpile { m, n, sinks }),
            _ => unreachable!(),
        }
    }

    pub fn dims(&self) -> (i64, i64) {
        (self.m, self.n)
    }

    pub fn sinks(&self) -> &BTreeSet<(i64, i64)> {
        &self.sinks
    }

    pub fn spec(&self) -> SinkSpec {
        SinkSpec::TorusQuotient { m: self.m, n: self.n, sinks: self.sinks.clone() }
    }

    pub fn window(&self) -> Rect {
        Rect::new(0, 0, self.m - 1, self.n - 1)
    }

    pub fn local_graph(&self) -> LocalGraph {
        LocalGraph::from_torus(&self.spec()).expect("torus spec")
    }

    /// The all-3 state (maximal stable), always recurrent.
    pub fn all_threes(&self) -> SandState {
        let spec = self.spec();
        let cells = self
            .window()
            .iter()
            .map(|z| if spec.is_sink(z) { BigUint::zero() } else { BigUint::from(3u8) })
            .collect();
        SandState::from_cells(spec, self.window(), 0, cells).expect("valid state")
    }
}

/// The Creutz identity `β = Δ 1_S` over a window: the number of sink
/// neighbors at each non-sink cell, zero at sinks.
pub fn creutz_beta(spec: &SinkSpec, window: Rect) -> Result<SandState> {
    if let Some((m, n)) = spec.torus_dims() {
        if window != Rect::new(0, 0, m - 1, n - 1) {
            return Err(Error::InvalidState("torus beta lives on the quotient window".to_string()));
        }
    }
    let cells = window.iter().map(|z| BigUint::from(spec.beta_at(z))).collect();
    SandState::from_cells(spec.clone(), window, 0, cells)
}

/// Outcome of a recurrence check; plane variants are compared away from the
/// truncation cut, and the compared region is reported with the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceVerdict {
    pub recurrent: bool,
    pub compared: Rect,
    pub margin: i64,
}

/// A recurrent state, the canonical representative of its equivalence class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement(SandState);

impl GroupElement {
    pub fn state(&self) -> &SandState {
        &self.0
    }

    pub fn into_state(self) -> SandState {
        self.0
    }

    pub fn get(&self, z: Coord) -> BigUint {
        self.0.get(z)
    }
}

/// Group operations over a fixed carrier: either a torus quotient or a plane
/// variant with bounded support (a truncated ray, a line segment).
#[derive(Debug, Clone)]
pub struct SandpileGroup {
    spec: SinkSpec,
    domain: Rect,
    margin: i64,
    cnet: u32,
    beta: Vec<i64>,
    sweep_budget: u64,
}

impl SandpileGroup {
    pub fn for_torus(t: &TorusSandpile) -> Result<Self> {
        Self::build(t.spec(), t.window(), 0)
    }

    /// Plane variant over a fixed domain; `margin` controls how far from the
    /// truncation cut states are compared.
    pub fn for_plane(spec: SinkSpec, domain: Rect, margin: i64) -> Result<Self> {
        if spec.torus_dims().is_some() {
            return Err(Error::CarrierMismatch("use for_torus on quotients".to_string()));
        }
        let b = spec.support_bounds();
        let bounded = b.x_min.map_or(false, |v| v >= domain.x0)
            && b.x_max.map_or(false, |v| v <= domain.x1)
            && b.y_min.map_or(false, |v| v >= domain.y0)
            && b.y_max.map_or(false, |v| v <= domain.y1);
        if !bounded {
            return Err(Error::CarrierMismatch(
                "plane group operations need the whole (bounded) support inside the domain"
                    .to_string(),
            ));
        }
        Self::build(spec, domain, margin)
    }

    /// Group over the truncated ray `Γ = {(1..len, 0)}` with default margin.
    pub fn truncated_ray(len: i64, margin: i64) -> Result<Self> {
        let spec = SinkSpec::truncated_ray(len)?;
        Self::for_plane(spec, Rect::new(1, 0, len, 0), margin)
    }

    fn build(spec: SinkSpec, domain: Rect, margin: i64) -> Result<Self> {
        let cnet = spec
            .cnet_bound()
            .ok_or_else(|| Error::InvalidSpec("carrier is not a C-net".to_string()))?;
        let beta = domain.iter().map(|z| spec.beta_at(z) as i64).collect();
        Ok(SandpileGroup { spec, domain, margin, cnet, beta, sweep_budget: 1_000_000 })
    }

    pub fn spec(&self) -> &SinkSpec {
        &self.spec
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn margin(&self) -> i64 {
        self.margin
    }

    pub fn cnet_radius(&self) -> u32 {
        self.cnet
    }

    pub fn beta(&self) -> SandState {
        creutz_beta(&self.spec, self.domain).expect("beta is a valid state")
    }

    /// Region used to compare plane elements: the domain shrunk by the
    /// margin on sides that truncate the infinite carrier.
    pub fn comparison_region(&self) -> Rect {
        let cut = match &self.spec {
            SinkSpec::TorusQuotient { .. } => [false; 4],
            SinkSpec::TruncatedRay { .. } => [false, true, false, false],
            SinkSpec::RayComplement | SinkSpec::LineWithIntervals { .. } => {
                [false, true, false, false]
            }
            SinkSpec::FullLineComplement => [true, true, false, false],
            SinkSpec::Explicit { .. } | SinkSpec::PeriodicLattice { .. } => [true; 4],
        };
        let d = self.domain;
        let x0 = if cut[0] { (d.x0 + self.margin).min(d.x1) } else { d.x0 };
        let x1 = if cut[1] { (d.x1 - self.margin).max(x0) } else { d.x1 };
        let y0 = if cut[2] { (d.y0 + self.margin).min(d.y1) } else { d.y0 };
        let y1 = if cut[3] { (d.y1 - self.margin).max(y0) } else { d.y1 };
        Rect::new(x0, y0, x1.max(x0), y1.max(y0))
    }

    /// Equality of elements over the comparison region (exact on tori).
    pub fn elements_equal(&self, a: &GroupElement, b: &GroupElement) -> bool {
        let region = self.comparison_region();
        region.iter().all(|z| a.get(z) == b.get(z))
    }

    fn to_signed(&self, state: &SandState) -> Result<Vec<i64>> {
        if state.spec() != &self.spec {
            return Err(Error::CarrierMismatch("state belongs to a different carrier".to_string()));
        }
        self.domain
            .iter()
            .map(|z| {
                state
                    .get(z)
                    .to_i64()
                    .ok_or_else(|| Error::Overflow("group cells must fit i64".to_string()))
            })
            .collect()
    }

    fn state_from(&self, cells: Vec<i64>) -> SandState {
        let cells = cells
            .into_iter()
            .map(|v| {
                debug_assert!(v >= 0);
                BigUint::from(v.unsigned_abs())
            })
            .collect();
        SandState::from_cells(self.spec.clone(), self.domain, 0, cells).expect("valid state")
    }

    fn relax_cells(&self, cells: Vec<i64>) -> Result<Vec<i64>> {
        let (stable, _odo, _sweeps) = relax_signed(&self.spec, self.domain, cells, self.sweep_budget)?;
        Ok(stable)
    }

    fn add_beta(&self, cells: &[i64], times: i64) -> Result<Vec<i64>> {
        cells
            .iter()
            .zip(&self.beta)
            .map(|(&v, &b)| {
                b.checked_mul(times)
                    .and_then(|add| v.checked_add(add))
                    .ok_or_else(|| Error::Overflow("beta multiple".to_string()))
            })
            .collect()
    }

    fn drive_cap(&self) -> u64 {
        let shift = 2 * (self.cnet as u64 + 1);
        let pow4 = if shift >= 62 { u64::MAX / 64 } else { 1u64 << shift };
        pow4.saturating_mul(48).max(1 << 16)
    }

    /// Drive an arbitrary (possibly negative) cell vector to the recurrent
    /// representative of its class by adding β and relaxing. Doubling the
    /// batch keeps the number of relaxations logarithmic in the additive cap.
    fn drive(&self, cells: Vec<i64>) -> Result<GroupElement> {
        let cap = self.drive_cap();
        let mut s = self.relax_cells(cells)?;
        let mut added: u64 = 0;
        let mut batch: i64 = 1;
        loop {
            let step = self.relax_cells(self.add_beta(&s, 1)?)?;
            if step == s {
                debug_assert!(s.iter().all(|&v| v >= 0));
                return Ok(GroupElement(self.state_from(s)));
            }
            s = self.relax_cells(self.add_beta(&step, batch)?)?;
            added += 1 + batch as u64;
            if added > cap {
                return Err(Error::DriveCapExceeded { added, cap });
            }
            batch = batch.saturating_mul(2).min(1 << 32);
        }
    }

    /// Drive a raw (possibly negative) cell vector over the domain to its
    /// recurrent representative. Used by the harmonic constructions.
    pub fn drive_signed(&self, cells: Vec<i64>) -> Result<GroupElement> {
        if cells.len() != self.domain.area() as usize {
            return Err(Error::InvalidState("cell vector does not match the domain".to_string()));
        }
        self.drive(cells)
    }

    /// The neutral element: the fixpoint of `e ← (e + β)°` from the zero
    /// state.
    pub fn identity(&self) -> Result<GroupElement> {
        let zeros = self.domain.iter().map(|_| 0i64).collect();
        self.drive(zeros)
    }

    /// Canonicalize any stable non-negative state to the recurrent
    /// representative of its class.
    pub fn to_recurrent(&self, state: &SandState) -> Result<GroupElement> {
        self.drive(self.to_signed(state)?)
    }

    /// Recurrence per the fixpoint definition: relax `g + β` and compare.
    pub fn is_recurrent(&self, g: &SandState) -> Result<RecurrenceVerdict> {
        let cells = self.to_signed(g)?;
        if cells.iter().any(|&v| v < 0) {
            return Err(Error::InvalidState("recurrence check needs a non-negative state".to_string()));
        }
        if cells.iter().any(|&v| v > 3) {
            return Err(Error::InvalidState("recurrence check needs a stable state".to_string()));
        }
        let relaxed = self.relax_cells(self.add_beta(&cells, 1)?)?;
        let region = self.comparison_region();
        let recurrent = region.iter().all(|z| {
            let i = self.domain.index_of(z);
            relaxed[i] == cells[i]
        });
        Ok(RecurrenceVerdict { recurrent, compared: region, margin: self.margin })
    }

    /// Pointwise addition followed by relaxation, then reduction to the
    /// recurrent representative.
    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let xa = self.to_signed(a.state())?;
        let xb = self.to_signed(b.state())?;
        let sum: Result<Vec<i64>> = xa
            .iter()
            .zip(&xb)
            .map(|(&u, &v)| u.checked_add(v).ok_or_else(|| Error::Overflow("sum".to_string())))
            .collect();
        self.drive(sum?)
    }

    /// The inverse element via `(−φ + nβ)°` with a doubling search on `n`.
    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        let xa = self.to_signed(a.state())?;
        let mut n: i64 = {
            let shift = 2 * (self.cnet as u64 + 1);
            if shift >= 40 {
                1 << 40
            } else {
                6i64 << shift
            }
        };
        for _ in 0..24 {
            let seed: Result<Vec<i64>> = xa
                .iter()
                .zip(&self.beta)
                .map(|(&v, &b)| {
                    b.checked_mul(n)
                        .and_then(|nb| nb.checked_sub(v))
                        .ok_or_else(|| Error::Overflow("inverse seed".to_string()))
                })
                .collect();
            let relaxed = self.relax_cells(seed?)?;
            if relaxed.iter().all(|&v| v >= 0) {
                return self.drive(relaxed);
            }
            n = n.saturating_mul(2);
        }
        Err(Error::DriveCapExceeded { added: n as u64, cap: self.drive_cap() })
    }

    /// Smallest `k ≤ k_max` with `k·a = e`, or `None`.
    pub fn element_order(&self, a: &GroupElement, k_max: u64) -> Result<Option<u64>> {
        let e = self.identity()?;
        let mut acc = a.clone();
        for k in 1..=k_max {
            if k > 1 {
                acc = self.add(&acc, a)?;
            }
            if self.elements_equal(&acc, &e) {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// Dhar's burning test on a finite quotient: fire starting from the sinks
/// consumes every vertex exactly when the state is recurrent.
pub fn burning_test(t: &TorusSandpile, g: &SandState) -> Result<bool> {
    let spec = t.spec();
    if g.spec() != &spec {
        return Err(Error::CarrierMismatch("state is not on this torus".to_string()));
    }
    let graph = t.local_graph();
    let n = graph.len();
    let values: Vec<i64> = graph
        .vertices
        .iter()
        .map(|&z| g.get(z).to_i64().expect("stable values fit i64"))
        .collect();
    if values.iter().any(|&v| v > 3) {
        return Err(Error::InvalidState("burning test needs a stable state".to_string()));
    }
    // unburnt degree starts at 4 minus the edges into the sink set
    let mut deg: Vec<i64> = (0..n)
        .map(|i| {
            let to_vertices: i64 = graph.neighbors[i].iter().map(|&(_, m)| m as i64).sum();
            to_vertices
        })
        .collect();
    let mut burnt = alloc::vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| values[i] >= deg[i]).collect();
    let mut burned = 0usize;
    while let Some(i) = queue.pop() {
        if burnt[i] {
            continue;
        }
        if values[i] < deg[i] {
            continue;
        }
        burnt[i] = true;
        burned += 1;
        for &(j, mult) in &graph.neighbors[i] {
            if !burnt[j] {
                deg[j] -= mult as i64;
                if values[j] >= deg[j] {
                    queue.push(j);
                }
            }
        }
    }
    Ok(burned == n)
}

/// Number of spanning trees of the quotient: the Matrix-Tree determinant of
/// the reduced Laplacian, in exact integer arithmetic.
pub fn spanning_tree_count(t: &TorusSandpile) -> Result<BigUint> {
    spanning_tree_count_graph(&t.local_graph())
}

/// Matrix-Tree determinant for any finite sink-grounded piece of lattice.
pub fn spanning_tree_count_graph(graph: &LocalGraph) -> Result<BigUint> {
    let det = linalg::determinant(&graph.reduced_laplacian());
    if det.is_zero() || det.is_negative() {
        return Err(Error::SingularMatrix);
    }
    Ok(det.to_biguint().expect("positive determinant"))
}

/// Exact order of `[g]` in the quotient group `ℤ^Γ / Δℤ^Γ`, computed from
/// the rational solve `L v = g`: the order is the lcm of the denominators.
/// Serves as an independent oracle for [`SandpileGroup::element_order`].
pub fn element_order_algebraic(t: &TorusSandpile, g: &SandState) -> Result<BigUint> {
    let graph = t.local_graph();
    let l = graph.reduced_laplacian();
    let rhs: Vec<BigInt> = graph.vertices.iter().map(|&z| BigInt::from(g.get(z))).collect();
    let v = linalg::solve_exact(&l, &rhs)?;
    Ok(linalg::lcm_of_denominators(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn one_sink_torus(m: i64, n: i64) -> TorusSandpile {
        TorusSandpile::new(m, n, [(0, 0)]).unwrap()
    }

    fn torus_state(t: &TorusSandpile, f: impl Fn(Coord) -> u8) -> SandState {
        let spec = t.spec();
        let cells = t
            .window()
            .iter()
            .map(|z| if spec.is_sink(z) { BigUint::zero() } else { BigUint::from(f(z)) })
            .collect();
        SandState::from_cells(spec, t.window(), 0, cells).unwrap()
    }

    #[test]
    fn beta_on_the_ray_is_two_plus_delta() {
        let spec = SinkSpec::truncated_ray(10).unwrap();
        let beta = creutz_beta(&spec, Rect::new(1, 0, 10, 0)).unwrap();
        assert_eq!(beta.get(Coord::new(1, 0)), BigUint::from(3u8));
        for x in 2..=9 {
            assert_eq!(beta.get(Coord::new(x, 0)), BigUint::from(2u8), "x={x}");
        }
        assert_eq!(beta.get(Coord::new(10, 0)), BigUint::from(3u8));
    }

    #[test]
    fn identity_on_truncated_ray() {
        let ctx = SandpileGroup::truncated_ray(200, 20).unwrap();
        let e = ctx.identity().unwrap();
        assert_eq!(e.get(Coord::new(1, 0)), BigUint::from(3u8));
        for x in 2..=199 {
            assert_eq!(e.get(Coord::new(x, 0)), BigUint::from(2u8), "x={x}");
        }
        assert_eq!(e.get(Coord::new(200, 0)), BigUint::from(3u8));
        assert!(ctx.is_recurrent(e.state()).unwrap().recurrent);
    }

    #[test]
    fn identity_on_truncated_full_line() {
        // a segment of the full line, everything else sinks
        let window = Rect::new(-40, 0, 40, 0);
        let spec = SinkSpec::explicit(BTreeSet::new(), window).unwrap();
        let ctx = SandpileGroup::for_plane(spec, window, 10).unwrap();
        let e = ctx.identity().unwrap();
        for x in -30..=30 {
            assert_eq!(e.get(Coord::new(x, 0)), BigUint::from(2u8), "x={x}");
        }
    }

    #[test]
    fn ray_order_two_element() {
        let ctx = SandpileGroup::truncated_ray(120, 20).unwrap();
        let x = order_two_state(120);
        assert!(ctx.is_recurrent(&x).unwrap().recurrent);
        let g = GroupElement(x);
        assert_eq!(ctx.element_order(&g, 8).unwrap(), Some(2));
        // and it is its own inverse
        let inv = ctx.inverse(&g).unwrap();
        assert!(ctx.elements_equal(&inv, &g));
    }

    fn order_two_state(len: i64) -> SandState {
        let spec = SinkSpec::truncated_ray(len).unwrap();
        let cells = (1..=len)
            .map(|x| match (x, x % 2) {
                (1, _) => BigUint::one(),
                (_, 0) => BigUint::from(3u8),
                _ => BigUint::zero(),
            })
            .collect();
        SandState::from_cells(spec, Rect::new(1, 0, len, 0), 0, cells).unwrap()
    }

    #[test]
    fn torus_recurrence_examples() {
        let t = one_sink_torus(6, 6);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        assert!(ctx.is_recurrent(&t.all_threes()).unwrap().recurrent);
        let zero = torus_state(&t, |_| 0);
        assert!(!ctx.is_recurrent(&zero).unwrap().recurrent);
        assert!(burning_test(&t, &t.all_threes()).unwrap());
        assert!(!burning_test(&t, &zero).unwrap());
    }

    #[test]
    fn identity_laws_on_torus() {
        let t = one_sink_torus(6, 6);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        let e = ctx.identity().unwrap();
        assert!(ctx.is_recurrent(e.state()).unwrap().recurrent);
        // e + x = x for a recurrent x
        let x = ctx.to_recurrent(&torus_state(&t, |z| ((z.x * 5 + z.y * 3) % 4) as u8)).unwrap();
        let sum = ctx.add(&e, &x).unwrap();
        assert!(ctx.elements_equal(&sum, &x));
        // x + inverse(x) = e
        let inv = ctx.inverse(&x).unwrap();
        let back = ctx.add(&x, &inv).unwrap();
        assert!(ctx.elements_equal(&back, &e));
        // burning test agrees on driven states
        assert!(burning_test(&t, x.state()).unwrap());
        assert!(burning_test(&t, inv.state()).unwrap());
    }

    #[test]
    fn add_matches_plain_relax_when_already_recurrent() {
        let t = one_sink_torus(4, 4);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        let threes = GroupElement(t.all_threes());
        let sum = ctx.add(&threes, &threes).unwrap();
        // the relaxed sum of two recurrent states is already recurrent
        let raw = crate::relax::relax_naive(
            &t.all_threes().pointwise_add(&t.all_threes()).unwrap(),
            &crate::relax::RelaxConfig::default(),
        )
        .unwrap();
        assert_eq!(sum.state(), &raw.stable);
    }

    #[test]
    fn two_by_two_brute_force() {
        // 2x2 torus minus one vertex: 3 cells, 4^3 = 64 stable states,
        // exactly 32 recurrent, and the driven identity is the unique
        // recurrent idempotent.
        let t = one_sink_torus(2, 2);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        let e = ctx.identity().unwrap();
        assert_eq!(spanning_tree_count(&t).unwrap(), BigUint::from(32u8));

        let cells: Vec<Coord> =
            t.window().iter().filter(|z| !t.spec().is_sink(*z)).collect();
        assert_eq!(cells.len(), 3);
        let mut recurrent_count = 0;
        let mut idempotents = Vec::new();
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    let vals = [a, b, c];
                    let s = torus_state(&t, |z| {
                        vals[cells.iter().position(|&w| w == z).unwrap()]
                    });
                    let rec = ctx.is_recurrent(&s).unwrap().recurrent;
                    assert_eq!(rec, burning_test(&t, &s).unwrap(), "burning vs fixpoint at {vals:?}");
                    if rec {
                        recurrent_count += 1;
                        let g = GroupElement(s);
                        let double = ctx.add(&g, &g).unwrap();
                        if ctx.elements_equal(&double, &g) {
                            idempotents.push(g);
                        }
                    }
                }
            }
        }
        assert_eq!(recurrent_count, 32);
        assert_eq!(idempotents.len(), 1);
        assert!(ctx.elements_equal(&idempotents[0], &e));
    }

    #[test]
    fn spanning_tree_examples() {
        // a single non-sink vertex with all 4 edges to sinks
        let t = TorusSandpile::new(2, 2, [(0, 0), (1, 0), (0, 1)]).unwrap();
        assert_eq!(spanning_tree_count(&t).unwrap(), BigUint::from(4u8));
        // a path of two ray cells capped by sinks
        let spec = SinkSpec::truncated_ray(2).unwrap();
        let graph = LocalGraph::from_cells(&spec, alloc::vec![Coord::new(1, 0), Coord::new(2, 0)]);
        assert_eq!(spanning_tree_count_graph(&graph).unwrap(), BigUint::from(15u8));
    }

    #[test]
    fn double_beta_drives_to_identity() {
        let t = one_sink_torus(5, 4);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        let e = ctx.identity().unwrap();
        let two_beta = ctx.beta().pointwise_add(&ctx.beta()).unwrap();
        let driven = ctx.to_recurrent(
            &crate::relax::relax_bulk(&two_beta, &crate::relax::RelaxConfig::default())
                .unwrap()
                .stable,
        )
        .unwrap();
        assert!(ctx.elements_equal(&driven, &e));
    }

    #[test]
    fn algebraic_order_divides_tree_count() {
        let t = one_sink_torus(4, 4);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        let count = spanning_tree_count(&t).unwrap();
        let e = ctx.identity().unwrap();
        assert_eq!(element_order_algebraic(&t, e.state()).unwrap(), BigUint::one());
        for seed in 0..4u8 {
            let x = ctx
                .to_recurrent(&torus_state(&t, |z| ((z.x + 2 * z.y) as u8 + seed) % 4))
                .unwrap();
            let ord = element_order_algebraic(&t, x.state()).unwrap();
            // orders of recurrent classes divide the group order
            assert!((&count % &ord).is_zero(), "{ord} does not divide {count}");
        }
    }

    #[test]
    fn order_of_identity_is_one() {
        let t = one_sink_torus(3, 3);
        let ctx = SandpileGroup::for_torus(&t).unwrap();
        let e = ctx.identity().unwrap();
        assert_eq!(ctx.element_order(&e, 4).unwrap(), Some(1));
    }
}
