//! Betti numbers by dense Gaussian elimination, for cross-checking the
//! reduction on small complexes.

use std::collections::HashMap;

use crate::complex::FilteredComplex;
use crate::error::{Error, Result};

/// Largest number of simplices per dimension the oracle accepts.
pub const ORACLE_LIMIT: usize = 4096;

fn rank_gf2(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let words = rows.first().map_or(0, Vec::len);
    for bit in 0..words * 64 {
        let (w, b) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & b != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= *y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the boundary map from `dim`-chains to `(dim−1)`-chains.
fn boundary_rank(cells: &[Vec<Vec<u32>>], dim: usize) -> usize {
    if dim == 0 || dim >= cells.len() || cells[dim].is_empty() {
        return 0;
    }
    let index: HashMap<&[u32], usize> = cells[dim - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_slice(), i))
        .collect();
    let words = cells[dim - 1].len().div_ceil(64);
    let rows = cells[dim]
        .iter()
        .map(|vs| {
            let mut row = vec![0u64; words];
            for skip in 0..vs.len() {
                let face: Vec<u32> = vs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let i = index[face.as_slice()];
                row[i / 64] ^= 1 << (i % 64);
            }
            row
        })
        .collect();
    rank_gf2(rows)
}

/// `β_dim` of the sub-complex of simplices with value ≤ `epsilon`.
pub fn betti_oracle(complex: &FilteredComplex, epsilon: f64, dim: usize) -> Result<usize> {
    let mut cells: Vec<Vec<Vec<u32>>> = vec![Vec::new(); dim + 2];
    for (s, v) in complex.iter() {
        if v <= epsilon && s.dim() <= dim + 1 {
            cells[s.dim()].push(s.vertices().to_vec());
        }
    }
    if cells.iter().any(|c| c.len() > ORACLE_LIMIT) {
        return Err(Error::CapacityExceeded { budget: ORACLE_LIMIT });
    }
    let n = cells[dim].len();
    Ok(n - boundary_rank(&cells, dim) - boundary_rank(&cells, dim + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rips::{build_rips, pairwise_distances, EdgeCap, Metric, PointCloud, RipsConfig};

    fn square(max_dim: usize) -> FilteredComplex {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let d = pairwise_distances(&cloud, Metric::Euclidean).unwrap();
        build_rips(
            &d,
            &RipsConfig {
                max_dim,
                max_edge: EdgeCap::Unbounded,
                ..RipsConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn square_loop_opens_and_fills() {
        let k = square(2);
        assert_eq!(betti_oracle(&k, 1.2, 1).unwrap(), 1);
        assert_eq!(betti_oracle(&k, 1.5, 1).unwrap(), 0);
        assert_eq!(betti_oracle(&k, 0.5, 0).unwrap(), 4);
        assert_eq!(betti_oracle(&k, 1.5, 0).unwrap(), 1);
        // four triangles on four vertices bound a hollow tetrahedron
        assert_eq!(betti_oracle(&k, 1.5, 2).unwrap(), 1);
        assert_eq!(betti_oracle(&square(3), 1.5, 2).unwrap(), 0);
    }

    #[test]
    fn components_match_union_find() {
        let cloud = PointCloud::new(vec![vec![0.0], vec![0.4], vec![3.0], vec![3.2], vec![9.0]]).unwrap();
        let d = pairwise_distances(&cloud, Metric::Euclidean).unwrap();
        let k = build_rips(
            &d,
            &RipsConfig {
                max_edge: EdgeCap::Fixed(1.0),
                ..RipsConfig::default()
            },
        )
        .unwrap();
        assert_eq!(betti_oracle(&k, k.max_value().unwrap(), 0).unwrap(), 3);
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rank_gf2(vec![vec![0b011], vec![0b110], vec![0b101]]), 2);
        assert_eq!(rank_gf2(vec![vec![0b1], vec![0b1]]), 1);
        assert_eq!(rank_gf2(vec![]), 0);
    }
}
