//! Dense square weight matrix with a self-coupling policy.

use crate::error::{CoreError, Result};
use crate::num::Real;

/// N x N coupling matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T: Real> {
    n: usize,
    w: Vec<T>,
    self_coupling: bool,
}

impl<T: Real> WeightMatrix<T> {
    pub fn zeros(n: usize, self_coupling: bool) -> Self {
        Self {
            n,
            w: vec![T::zero(); n * n],
            self_coupling,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn self_coupling(&self) -> bool {
        self.self_coupling
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.w[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        if i == j && !self.self_coupling && v != T::zero() {
            return Err(CoreError::InvalidInput(
                "self-coupling disabled: diagonal must stay zero".into(),
            ));
        }
        self.w[i * self.n + j] = v;
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[T] {
        &self.w
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.w
    }

    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn diagonal_is_zero(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == T::zero())
    }

    /// Off-diagonal entries with nonzero magnitude.
    pub fn nonzero_offdiag(&self) -> usize {
        let mut c = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.get(i, j) != T::zero() {
                    c += 1;
                }
            }
        }
        c
    }
}
