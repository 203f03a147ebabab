//! Exact linear algebra over finite graphs: reduced Laplacians,
//! fraction-free determinants, rational solves, and kernels of the
//! Laplacian over ℤ_{p^e}.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::coord::Coord;
use crate::error::{Error, Result};
use crate::sink::SinkSpec;

/// A finite piece of lattice graph: vertex list plus neighbor lists with
/// edge multiplicities. Edges to sinks are not stored; every vertex still
/// has valency 4 in the Laplacian.
#[derive(Debug, Clone)]
pub struct LocalGraph {
    pub vertices: Vec<Coord>,
    pub neighbors: Vec<Vec<(usize, u8)>>,
}

impl LocalGraph {
    /// Graph induced by the listed non-sink cells of a plane spec; every
    /// cell not in the list acts as a sink.
    pub fn from_cells(spec: &SinkSpec, vertices: Vec<Coord>) -> Self {
        let index: alloc::collections::BTreeMap<Coord, usize> =
            vertices.iter().enumerate().map(|(i, z)| (*z, i)).collect();
        let neighbors = vertices
            .iter()
            .map(|z| {
                let mut out: Vec<(usize, u8)> = Vec::new();
                for t in z.neighbors() {
                    if spec.is_sink(t) {
                        continue;
                    }
                    if let Some(&j) = index.get(&t) {
                        push_mult(&mut out, j);
                    }
                }
                out
            })
            .collect();
        LocalGraph { vertices, neighbors }
    }

    /// Quotient graph of a torus spec (multiplicities from wraparound).
    pub fn from_torus(spec: &SinkSpec) -> Result<Self> {
        let (m, n) = spec
            .torus_dims()
            .ok_or_else(|| Error::CarrierMismatch("expected a torus quotient".into()))?;
        let vertices: Vec<Coord> = crate::coord::Rect::new(0, 0, m - 1, n - 1)
            .iter()
            .filter(|z| !spec.is_sink(*z))
            .collect();
        let index: alloc::collections::BTreeMap<Coord, usize> =
            vertices.iter().enumerate().map(|(i, z)| (*z, i)).collect();
        let neighbors = vertices
            .iter()
            .map(|z| {
                let mut out: Vec<(usize, u8)> = Vec::new();
                for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                    let t = Coord::new((z.x + dx).rem_euclid(m), (z.y + dy).rem_euclid(n));
                    if let Some(&j) = index.get(&t) {
                        push_mult(&mut out, j);
                    }
                }
                out
            })
            .collect();
        Ok(LocalGraph { vertices, neighbors })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, z: Coord) -> Option<usize> {
        self.vertices.iter().position(|&v| v == z)
    }

    /// Reduced Laplacian `L = 4I − A` (sink rows and columns deleted).
    pub fn reduced_laplacian(&self) -> Vec<Vec<BigInt>> {
        let n = self.len();
        let mut l = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            l[i][i] = BigInt::from(4);
            for &(j, mult) in &self.neighbors[i] {
                l[i][j] -= BigInt::from(mult);
            }
        }
        l
    }

    /// The Laplacian `Δ = A − 4I` with entries reduced mod `modulus`.
    pub fn laplacian_mod(&self, modulus: u64) -> Vec<Vec<u64>> {
        let n = self.len();
        let minus4 = (modulus as i128 - 4).rem_euclid(modulus as i128) as u64;
        let mut d = vec![vec![0u64; n]; n];
        for i in 0..n {
            d[i][i] = minus4;
            for &(j, mult) in &self.neighbors[i] {
                d[i][j] = (d[i][j] + mult as u64) % modulus;
            }
        }
        d
    }
}

fn push_mult(out: &mut Vec<(usize, u8)>, j: usize) {
    if let Some(entry) = out.iter_mut().find(|(k, _)| *k == j) {
        entry.1 += 1;
    } else {
        out.push((j, 1));
    }
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn determinant(mat: &[Vec<BigInt>]) -> BigInt {
    let n = mat.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev; // exact by Bareiss
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Exact solution of `A x = b` over the rationals (error on singular `A`).
pub fn solve_exact(mat: &[Vec<BigInt>], rhs: &[BigInt]) -> Result<Vec<BigRational>> {
    let n = mat.len();
    debug_assert_eq!(rhs.len(), n);
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = mat[i].clone();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let i = (k + 1..n).find(|&i| !a[i][k].is_zero()).ok_or(Error::SingularMatrix)?;
            a.swap(k, i);
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if a[n - 1][n - 1].is_zero() {
        return Err(Error::SingularMatrix);
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from(a[i][n].clone());
        for j in i + 1..n {
            acc -= BigRational::from(a[i][j].clone()) * &x[j];
        }
        x[i] = acc / BigRational::from(a[i][i].clone());
    }
    Ok(x)
}

/// Least `k ≥ 1` with `k·x` integral for every entry.
pub fn lcm_of_denominators(x: &[BigRational]) -> BigUint {
    let mut lcm = BigInt::one();
    for v in x {
        lcm = lcm.lcm(v.denom());
    }
    lcm.abs().to_biguint().expect("lcm is positive")
}

fn valuation(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    // extended Euclid; a must be a unit mod m
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "not a unit");
    old_s.rem_euclid(m as i128) as u64
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Generators of `{x : M x ≡ 0 (mod p^e)}` via diagonalization over the
/// chain ring ℤ_{p^e}. For `e = 1` the generators form a basis.
pub fn kernel_mod_prime_power(mat: &[Vec<u64>], p: u64, e: u32) -> Vec<Vec<u64>> {
    let modulus = p.checked_pow(e).expect("modulus fits u64");
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    if cols == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<u64>> = mat.iter().map(|r| r.iter().map(|&v| v % modulus).collect()).collect();
    let mut v: Vec<Vec<u64>> = (0..cols)
        .map(|i| (0..cols).map(|j| u64::from(i == j)).collect())
        .collect(); // tracks column operations; kernel = v * ker(diagonal)

    let mut pivots: Vec<u32> = Vec::new();
    let steps = rows.min(cols);
    for t in 0..steps {
        // minimal-valuation pivot in the trailing submatrix
        let mut best: Option<(usize, usize, u32)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 {
                    let val = valuation(a[i][j], p);
                    if best.map_or(true, |(_, _, bv)| val < bv) {
                        best = Some((i, j, val));
                        if val == 0 {
                            break;
                        }
                    }
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let (pi, pj, val) = match best {
            Some(b) => b,
            None => break,
        };
        a.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
        }
        // normalize the pivot to p^val
        let unit = a[t][t] / p.pow(val);
        let inv = mod_inverse(unit % modulus, modulus);
        for j in t..cols {
            a[t][j] = mul_mod(a[t][j], inv, modulus);
        }
        let pivot = a[t][t];
        debug_assert_eq!(pivot, p.pow(val));
        // clear the column below
        for i in t + 1..rows {
            if a[i][t] != 0 {
                let factor = a[i][t] / pivot;
                for j in t..cols {
                    let sub = mul_mod(factor, a[t][j], modulus);
                    a[i][j] = (a[i][j] + modulus - sub) % modulus;
                }
            }
        }
        // clear the row to the right (column ops, mirrored into v)
        for j in t + 1..cols {
            if a[t][j] != 0 {
                let factor = a[t][j] / pivot;
                for i in 0..rows {
                    let sub = mul_mod(factor, a[i][t], modulus);
                    a[i][j] = (a[i][j] + modulus - sub) % modulus;
                }
                for row in v.iter_mut() {
                    let sub = mul_mod(factor, row[t], modulus);
                    row[j] = (row[j] + modulus - sub) % modulus;
                }
            }
        }
        pivots.push(val);
    }

    let rank = pivots.len();
    let mut gens: Vec<Vec<u64>> = Vec::new();
    for (i, &val) in pivots.iter().enumerate() {
        if val > 0 {
            let scale = p.pow(e - val);
            gens.push((0..cols).map(|r| mul_mod(v[r][i], scale, modulus)).collect());
        }
    }
    for i in rank..cols {
        gens.push((0..cols).map(|r| v[r][i]).collect());
    }
    gens.retain(|g| g.iter().any(|&x| x != 0));
    gens
}

/// Membership of `x` in the span of `gens` over ℤ_p (p prime).
pub fn in_span_mod_p(gens: &[Vec<u64>], x: &[u64], p: u64) -> bool {
    if x.iter().all(|&v| v % p == 0) {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let cols = x.len();
    // solve gens^T * c = x by elimination on the augmented matrix
    let mut a: Vec<Vec<u64>> = (0..cols)
        .map(|r| {
            let mut row: Vec<u64> = gens.iter().map(|g| g[r] % p).collect();
            row.push(x[r] % p);
            row
        })
        .collect();
    let n_rows = cols;
    let n_cols = gens.len();
    let mut pivot_row = 0;
    for col in 0..n_cols {
        let Some(r) = (pivot_row..n_rows).find(|&r| a[r][col] % p != 0) else {
            continue;
        };
        a.swap(pivot_row, r);
        let inv = mod_inverse(a[pivot_row][col] % p, p);
        for j in col..=n_cols {
            a[pivot_row][j] = mul_mod(a[pivot_row][j], inv, p);
        }
        for r in 0..n_rows {
            if r != pivot_row && a[r][col] % p != 0 {
                let f = a[r][col] % p;
                for j in col..=n_cols {
                    let sub = mul_mod(f, a[pivot_row][j], p);
                    a[r][j] = (a[r][j] + p - sub) % p;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == n_rows {
            break;
        }
    }
    // consistent iff no row reads 0 = nonzero
    for r in 0..n_rows {
        if a[r][..n_cols].iter().all(|&v| v % p == 0) && a[r][n_cols] % p != 0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::Rect;

    #[test]
    fn determinant_small_cases() {
        let m = vec![
            vec![BigInt::from(4), BigInt::from(0), BigInt::from(-2)],
            vec![BigInt::from(0), BigInt::from(4), BigInt::from(-2)],
            vec![BigInt::from(-2), BigInt::from(-2), BigInt::from(4)],
        ];
        assert_eq!(determinant(&m), BigInt::from(32));

        let m = vec![vec![BigInt::from(4), BigInt::from(-1)], vec![BigInt::from(-1), BigInt::from(4)]];
        assert_eq!(determinant(&m), BigInt::from(15));

        let m = vec![vec![BigInt::from(4)]];
        assert_eq!(determinant(&m), BigInt::from(4));
    }

    #[test]
    fn torus_2x2_reduced_laplacian() {
        let spec = SinkSpec::torus(2, 2, [(0i64, 0i64)].into_iter().collect()).unwrap();
        let g = LocalGraph::from_torus(&spec).unwrap();
        // vertices in row-major order: (1,0), (0,1), (1,1)
        let l = g.reduced_laplacian();
        let want: Vec<Vec<i64>> = vec![vec![4, 0, -2], vec![0, 4, -2], vec![-2, -2, 4]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l[i][j], BigInt::from(want[i][j]), "({i},{j})");
            }
        }
        assert_eq!(determinant(&l), BigInt::from(32));
    }

    #[test]
    fn solve_exact_roundtrip() {
        let m = vec![
            vec![BigInt::from(4), BigInt::from(-1), BigInt::from(0)],
            vec![BigInt::from(-1), BigInt::from(4), BigInt::from(-1)],
            vec![BigInt::from(0), BigInt::from(-1), BigInt::from(4)],
        ];
        let b = vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)];
        let x = solve_exact(&m, &b).unwrap();
        for i in 0..3 {
            let mut acc = BigRational::zero();
            for j in 0..3 {
                acc += BigRational::from(m[i][j].clone()) * &x[j];
            }
            assert_eq!(acc, BigRational::from(b[i].clone()));
        }
    }

    #[test]
    fn kernel_mod_p_basics() {
        // x + y ≡ 0 mod 5 has a 1-dim kernel; the full-rank matrix has none
        let gens = kernel_mod_prime_power(&[vec![1, 1]], 5, 1);
        assert_eq!(gens.len(), 1);
        let g = &gens[0];
        assert_eq!((g[0] + g[1]) % 5, 0);
        assert!(g.iter().any(|&v| v % 5 != 0));

        let gens = kernel_mod_prime_power(&[vec![1, 0], vec![0, 1]], 5, 1);
        assert!(gens.is_empty());
    }

    #[test]
    fn kernel_mod_prime_power_chain_ring() {
        // 2x ≡ 0 mod 4 → kernel generated by x = 2
        let gens = kernel_mod_prime_power(&[vec![2]], 2, 2);
        assert_eq!(gens, vec![vec![2]]);
        // 4x ≡ 0 mod 8 → x = 2 generates {0,2,4,6}
        let gens = kernel_mod_prime_power(&[vec![4]], 2, 3);
        assert_eq!(gens, vec![vec![2]]);
        // zero matrix mod 9: the free generator has full order
        let gens = kernel_mod_prime_power(&[vec![0]], 3, 2);
        assert_eq!(gens, vec![vec![1]]);
    }

    #[test]
    fn kernel_members_check_out() {
        // Laplacian of the 2x2 torus minus a vertex, mod 2: order 32 is even
        let spec = SinkSpec::torus(2, 2, [(0i64, 0i64)].into_iter().collect()).unwrap();
        let g = LocalGraph::from_torus(&spec).unwrap();
        let d = g.laplacian_mod(2);
        let gens = kernel_mod_prime_power(&d, 2, 1);
        assert!(!gens.is_empty());
        for gen in &gens {
            for i in 0..g.len() {
                let acc: u64 = (0..g.len()).map(|j| d[i][j] * gen[j] % 2).sum::<u64>() % 2;
                assert_eq!(acc, 0);
            }
        }
        // 32 is coprime to 3: empty kernel mod 3
        let gens = kernel_mod_prime_power(&g.laplacian_mod(3), 3, 1);
        assert!(gens.is_empty());
    }

    #[test]
    fn span_membership() {
        let gens = vec![vec![1, 2, 0], vec![0, 0, 1]];
        assert!(in_span_mod_p(&gens, &[2, 4, 3], 5));
        assert!(!in_span_mod_p(&gens, &[1, 0, 0], 5));
    }

    #[test]
    fn local_graph_from_cells_path() {
        let spec = SinkSpec::truncated_ray(2).unwrap();
        let cells: Vec<Coord> = Rect::new(1, 0, 2, 0).iter().collect();
        let g = LocalGraph::from_cells(&spec, cells);
        let l = g.reduced_laplacian();
        assert_eq!(determinant(&l), BigInt::from(15));
    }
}
