//! Monotone fixed-point solver for the lattice Poisson problem `Δφ = ψ` on
//! a C-net domain. Starting from `φ₀ = L·h` (with `h` the superharmonic
//! bound and `L = max ψ`), the Jacobi-style update
//! `φ_{n+1}(z) = (Σ_{z'~z} φ_n(z') − ψ(z)) / 4`
//! decreases pointwise, stays above `−L·h`, and converges to the unique
//! bounded solution. Arithmetic is exact: iterates are dyadic rationals
//! stored as big-integer numerators over `4^n`.
//!
//! Plane windows treat every cell outside the window as an additional sink
//! (`φ = 0` there), which keeps the problem a C-net problem; torus quotients
//! solve with exact periodic closure.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coord::{Coord, Rect};
use crate::error::{Error, Result};
use crate::sink::{sink_distance_map, SinkSpec};

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub window: Rect,
    /// Solution values over the window in row-major order; exact rationals.
    pub phi: Vec<BigRational>,
    /// Total iterations across the two monotone sub-solves.
    pub iterations: u64,
    /// Whether `φ_{n+1} ≤ φ_n` held at every step of both sub-solves.
    pub monotone: bool,
    /// Whether `φ_n ≥ −L·h` held at every step.
    pub within_bound: bool,
    /// The superharmonic bound per cell.
    pub h: Vec<BigUint>,
    /// `L = max |ψ|`.
    pub level: i64,
}

impl PoissonSolution {
    pub fn phi_at(&self, z: Coord) -> BigRational {
        if self.window.contains(z) {
            self.phi[self.window.index_of(z)].clone()
        } else {
            BigRational::zero()
        }
    }

    /// `|φ| ≤ L·h` cell by cell.
    pub fn bound_holds(&self) -> bool {
        let l = BigInt::from(self.level);
        self.phi.iter().zip(&self.h).all(|(v, h)| {
            let cap = BigRational::from(&l * BigInt::from(h.clone()));
            v.abs() <= cap
        })
    }
}

/// Tolerance `2^-40`, the default stopping threshold.
pub fn default_tolerance() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << 40)
}

/// `f64` approximation that stays finite for huge exact denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let scaled = (r * BigRational::from(BigInt::one() << 60)).to_integer();
    scaled.to_f64().map(|v| v / (1u64 << 60) as f64).unwrap_or(f64::NAN)
}

/// Solve `Δφ = ψ` for a bounded integer `ψ` given over `window`. `ψ` is
/// split into nonnegative parts, each solved by the monotone scheme, and
/// the results subtracted. Stops when successive iterates differ by less
/// than `tol` in sup norm, which pins `|Δφ − ψ| < 4·tol` at every cell.
pub fn poisson_solve(
    spec: &SinkSpec,
    window: Rect,
    psi: &[i64],
    tol: &BigRational,
    max_iterations: u64,
) -> Result<PoissonSolution> {
    if psi.len() != window.area() as usize {
        return Err(Error::InvalidState("psi does not match the window".to_string()));
    }
    if tol <= &BigRational::zero() {
        return Err(Error::InvalidState("tolerance must be positive".to_string()));
    }
    if let Some((m, n)) = spec.torus_dims() {
        if window != Rect::new(0, 0, m - 1, n - 1) {
            return Err(Error::InvalidState("torus solves live on the quotient window".to_string()));
        }
    }
    let geometry = Geometry::build(spec, window)?;

    let pos: Vec<i64> = psi.iter().map(|&v| v.max(0)).collect();
    let neg: Vec<i64> = psi.iter().map(|&v| (-v).max(0)).collect();
    let solve_pos = solve_monotone(&geometry, &pos, tol, max_iterations)?;
    let solve_neg = solve_monotone(&geometry, &neg, tol, max_iterations)?;

    let phi: Vec<BigRational> =
        solve_pos.phi.iter().zip(&solve_neg.phi).map(|(u, w)| u - w).collect();
    let level = psi.iter().map(|v| v.abs()).max().unwrap_or(0);
    Ok(PoissonSolution {
        window,
        phi,
        iterations: solve_pos.iterations + solve_neg.iterations,
        monotone: solve_pos.monotone && solve_neg.monotone,
        within_bound: solve_pos.within_bound && solve_neg.within_bound,
        h: geometry.h,
        level,
    })
}

/// Sup-norm of `Δφ − ψ` over the non-sink window cells, with the same
/// boundary convention as the solver (outside cells contribute 0).
pub fn laplacian_residual(
    spec: &SinkSpec,
    window: Rect,
    phi: &[BigRational],
    psi: &[i64],
) -> Result<BigRational> {
    let geometry = Geometry::build(spec, window)?;
    let mut worst = BigRational::zero();
    for (i, cell) in geometry.cells.iter().enumerate() {
        if cell.sink {
            continue;
        }
        let mut acc = phi[i].clone() * BigRational::from(BigInt::from(-4));
        for &(j, mult) in &cell.neighbors {
            acc += &phi[j] * BigRational::from(BigInt::from(mult));
        }
        acc -= BigRational::from(BigInt::from(psi[i]));
        let a = acc.abs();
        if a > worst {
            worst = a;
        }
    }
    Ok(worst)
}

struct CellGeom {
    sink: bool,
    neighbors: Vec<(usize, u8)>, // in-window non-sink neighbors with multiplicity
}

struct Geometry {
    cells: Vec<CellGeom>,
    h: Vec<BigUint>,
}

impl Geometry {
    fn build(spec: &SinkSpec, window: Rect) -> Result<Self> {
        let cap = spec
            .cnet_bound()
            .ok_or_else(|| Error::InvalidSpec("poisson needs a C-net".to_string()))?
            .max(2)
            * 2
            + 4;
        let dist = sink_distance_map(spec, window, cap);
        let mut c = 0u32;
        for (i, d) in dist.iter().enumerate() {
            match d {
                Some(d) => c = c.max(*d),
                None => {
                    return Err(Error::DistanceCapExceeded { cell: window.coord_of(i), cap })
                }
            }
        }
        let h: Vec<BigUint> = dist
            .iter()
            .map(|d| {
                let d = d.unwrap();
                let mut acc = BigUint::zero();
                for k in 1..=d {
                    acc += BigUint::from(4u32).pow(c - k);
                }
                acc
            })
            .collect();
        let torus = spec.torus_dims();
        let cells = window
            .iter()
            .map(|z| {
                let sink = spec.is_sink(z);
                let mut neighbors = Vec::new();
                if !sink {
                    for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                        let t = match torus {
                            Some((m, n)) => {
                                Coord::new((z.x + dx).rem_euclid(m), (z.y + dy).rem_euclid(n))
                            }
                            None => Coord::new(z.x + dx, z.y + dy),
                        };
                        if window.contains(t) && !spec.is_sink(t) {
                            let j = window.index_of(t);
                            match neighbors.iter_mut().find(|(k, _): &&mut (usize, u8)| *k == j) {
                                Some(entry) => entry.1 += 1,
                                None => neighbors.push((j, 1)),
                            }
                        }
                    }
                }
                CellGeom { sink, neighbors }
            })
            .collect();
        Ok(Geometry { cells, h })
    }
}

struct MonotoneRun {
    phi: Vec<BigRational>,
    iterations: u64,
    monotone: bool,
    within_bound: bool,
}

/// The monotone scheme for `ψ ≥ 0`. Iterates are exact dyadic rationals:
/// after `n` steps every value is `num/4^n`, and
/// `num_{n+1}(z) = Σ num_n(z') − ψ(z)·4^n`.
fn solve_monotone(
    geom: &Geometry,
    psi: &[i64],
    tol: &BigRational,
    max_iterations: u64,
) -> Result<MonotoneRun> {
    let n_cells = geom.cells.len();
    let level = psi.iter().copied().max().unwrap_or(0);
    if level == 0 {
        return Ok(MonotoneRun {
            phi: vec![BigRational::zero(); n_cells],
            iterations: 0,
            monotone: true,
            within_bound: true,
        });
    }

    // numerators over 4^iter
    let mut num: Vec<BigInt> = geom
        .h
        .iter()
        .enumerate()
        .map(|(i, h)| {
            if geom.cells[i].sink {
                BigInt::zero()
            } else {
                BigInt::from(h.clone()) * BigInt::from(level)
            }
        })
        .collect();
    // the running lower bound −L·h, scaled by the same power of 4
    let mut bound: Vec<BigInt> = num.clone();

    let mut psi_scaled: Vec<BigInt> = psi.iter().map(|&v| BigInt::from(v)).collect();
    let mut iter: u64 = 0;
    let mut monotone = true;
    let mut within_bound = true;

    loop {
        iter += 1;
        if iter > max_iterations {
            return Err(Error::PoissonNoConvergence { iterations: max_iterations });
        }
        let mut next: Vec<BigInt> = Vec::with_capacity(n_cells);
        for (i, cell) in geom.cells.iter().enumerate() {
            if cell.sink {
                next.push(BigInt::zero());
                continue;
            }
            let mut acc = -&psi_scaled[i];
            for &(j, mult) in &cell.neighbors {
                if mult == 1 {
                    acc += &num[j];
                } else {
                    acc += &num[j] * BigInt::from(mult);
                }
            }
            next.push(acc);
        }
        // next is over 4^iter; the previous iterate scales by 4 to compare
        let mut sup_diff = BigInt::zero();
        for i in 0..n_cells {
            let prev_scaled = &num[i] << 2u32;
            let diff = &next[i] - &prev_scaled;
            if diff.is_positive() {
                monotone = false;
            }
            let a = diff.abs();
            if a > sup_diff {
                sup_diff = a;
            }
        }
        for b in bound.iter_mut() {
            *b <<= 2u32;
        }
        for i in 0..n_cells {
            if next[i] < -&bound[i] {
                within_bound = false;
            }
        }
        num = next;
        for p in psi_scaled.iter_mut() {
            *p <<= 2u32;
        }
        // stop when sup|φ_{n+1} − φ_n| < tol, i.e. sup_diff/4^iter < tol
        let lhs = &sup_diff * tol.denom();
        let rhs = tol.numer() << (2 * iter as usize);
        if lhs < rhs {
            break;
        }
    }

    let denom = BigInt::one() << (2 * iter as usize);
    let phi = num.into_iter().map(|v| BigRational::new(v, denom.clone())).collect();
    Ok(MonotoneRun { phi, iterations: iter, monotone, within_bound })
}
