//! Dense component arrays over the index range {0,1,2,3}.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

pub const DIM: usize = 4;

/// Number of contravariant (upper) and covariant (lower) slots.
///
/// Upper slots come first in the component layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valence {
    pub upper: usize,
    pub lower: usize,
}

impl Valence {
    pub const fn covariant(k: usize) -> Self {
        Valence { upper: 0, lower: k }
    }

    pub const fn mixed(upper: usize, lower: usize) -> Self {
        Valence { upper, lower }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }
}

/// Component array with `4^(upper+lower)` entries, row-major (first index slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    valence: Valence,
    data: Vec<f64>,
}

pub fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * DIM + i)
}

/// Inverse of [`flat_index`] for a given rank.
pub fn multi_index(mut flat: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % DIM;
        flat /= DIM;
    }
    idx
}

impl Tensor {
    pub fn zeros(valence: Valence) -> Self {
        Tensor {
            valence,
            data: vec![0.0; DIM.pow(valence.rank() as u32)],
        }
    }

    pub fn covariant(rank: usize) -> Self {
        Self::zeros(Valence::covariant(rank))
    }

    pub fn from_fn(valence: Valence, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let rank = valence.rank();
        let mut t = Self::zeros(valence);
        let mut idx = vec![0usize; rank];
        for v in t.data.iter_mut() {
            *v = f(&idx);
            for slot in (0..rank).rev() {
                idx[slot] += 1;
                if idx[slot] < DIM {
                    break;
                }
                idx[slot] = 0;
            }
        }
        t
    }

    pub fn from_data(valence: Valence, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), DIM.pow(valence.rank() as u32), "component count");
        Tensor { valence, data }
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        Self::from_fn(Valence::covariant(2), |i| m[(i[0], i[1])])
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        assert_eq!(self.rank(), 2);
        Matrix4::from_fn(|i, j| self.data[i * DIM + j])
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn rank(&self) -> usize {
        self.valence.rank()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank());
        self.data[flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        debug_assert_eq!(idx.len(), self.rank());
        self.data[flat_index(idx)] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        Tensor {
            valence: self.valence,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Tensor) -> Tensor {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        Tensor {
            valence: self.valence,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn dot(&self, other: &Tensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Entry `out[i_0..i_k] = self[i_{perm[0]}..i_{perm[k]}]`.
    pub fn permuted(&self, perm: &[usize]) -> Tensor {
        let rank = self.rank();
        assert_eq!(perm.len(), rank);
        let mut src = vec![0usize; rank];
        Tensor::from_fn(self.valence, |idx| {
            for (s, &p) in src.iter_mut().zip(perm) {
                *s = idx[p];
            }
            self.get(&src)
        })
    }

    /// Slice along the leading index: `out[...] = self[a, ...]`.
    pub fn leading_slice(&self, a: usize) -> Tensor {
        let rank = self.rank();
        assert!(rank >= 1);
        let n = DIM.pow(rank as u32 - 1);
        let valence = if self.valence.upper > 0 {
            Valence::mixed(self.valence.upper - 1, self.valence.lower)
        } else {
            Valence::covariant(rank - 1)
        };
        Tensor::from_data(valence, self.data[a * n..(a + 1) * n].to_vec())
    }

    /// Inverse of [`Tensor::leading_slice`]: stack four rank-k tensors into rank k+1.
    pub fn stack(slices: &[Tensor]) -> Tensor {
        assert_eq!(slices.len(), DIM);
        let rank = slices[0].rank();
        let mut data = Vec::with_capacity(DIM.pow(rank as u32 + 1));
        for s in slices {
            data.extend_from_slice(&s.data);
        }
        Tensor::from_data(Valence::covariant(rank + 1), data)
    }

    /// Largest deviation from symmetry under exchanging slots `i` and `j`.
    pub fn asymmetry(&self, i: usize, j: usize) -> f64 {
        let mut perm: Vec<usize> = (0..self.rank()).collect();
        perm.swap(i, j);
        (self - &self.permuted(&perm)).max_abs()
    }
}

impl Index<usize> for Tensor {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Tensor {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl Add for &Tensor {
    type Output = Tensor;
    fn add(self, rhs: &Tensor) -> Tensor {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Tensor {
    type Output = Tensor;
    fn sub(self, rhs: &Tensor) -> Tensor {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &Tensor {
    type Output = Tensor;
    fn mul(self, rhs: f64) -> Tensor {
        self.scaled(rhs)
    }
}

/// Symmetric bilinear forms as 4x4 row-major arrays.
pub type Mat4 = [[f64; DIM]; DIM];

pub fn mat_to_tensor(m: &Mat4) -> Tensor {
    Tensor::from_fn(Valence::covariant(2), |i| m[i[0]][i[1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_multi_index_agree() {
        for rank in 1..=4 {
            for flat in 0..DIM.pow(rank as u32) {
                assert_eq!(flat_index(&multi_index(flat, rank)), flat);
            }
        }
    }

    #[test]
    fn from_fn_visits_row_major() {
        let t = Tensor::from_fn(Valence::covariant(3), |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64);
        assert_eq!(t.get(&[1, 2, 3]), 123.0);
        assert_eq!(t[flat_index(&[3, 0, 1])], 301.0);
    }

    #[test]
    fn permutation_and_slices() {
        let t = Tensor::from_fn(Valence::covariant(3), |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64);
        let p = t.permuted(&[2, 0, 1]);
        assert_eq!(p.get(&[1, 2, 3]), t.get(&[3, 1, 2]));
        let s = t.leading_slice(2);
        assert_eq!(s.get(&[1, 3]), 213.0);
        let back = Tensor::stack(&(0..4).map(|a| t.leading_slice(a)).collect::<Vec<_>>());
        assert_eq!(back, t);
        assert!(t.asymmetry(0, 1) > 0.0);
    }
}
