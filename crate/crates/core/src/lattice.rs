//! Index arithmetic for the lattice `{1,...,n}^d` and padded boxes around it.
//!
//! Sites are stored row-major with the first coordinate most significant,
//! so flat order coincides with the lexicographic order on `Z^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on the number of stored sites (2^31), well inside `usize`.
pub const MAX_SITES: usize = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeShape {
    d: usize,
    n: usize,
}

impl LatticeShape {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("lattice dimension must be at least 1"));
        }
        if n < 2 {
            return Err(Error::validation(format!("lattice side n = {n} must be at least 2")));
        }
        checked_box_size(&vec![n; d])?;
        Ok(LatticeShape { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.n
    }

    /// Number of sites `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat position of the 1-based multi-index `i`, or `None` if `i` is
    /// outside `{1,...,n}^d`.
    pub fn flat_index(&self, i: &[i64]) -> Option<usize> {
        if i.len() != self.d {
            return None;
        }
        let n = self.n as i64;
        let mut flat = 0usize;
        for &c in i {
            if c < 1 || c > n {
                return None;
            }
            flat = flat * self.n + (c - 1) as usize;
        }
        Some(flat)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn multi_index(&self, mut flat: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.d];
        for slot in out.iter_mut().rev() {
            *slot = (flat % self.n) as i64 + 1;
            flat /= self.n;
        }
        out
    }

    /// Iterates all 1-based multi-indices in flat (lexicographic) order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |f| self.multi_index(f))
    }
}

/// Product of the extents, failing when it exceeds [`MAX_SITES`].
pub(crate) fn checked_box_size(extents: &[usize]) -> Result<usize> {
    extents.iter().try_fold(1usize, |acc, &e| {
        acc.checked_mul(e)
            .filter(|&v| v <= MAX_SITES)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "box with extents {extents:?} exceeds {MAX_SITES} sites"
                ))
            })
    })
}

/// An axis-aligned integer box `lower[k] ..= lower[k] + extent[k] - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct IntBox {
    pub lower: Vec<i64>,
    pub extent: Vec<usize>,
}

impl IntBox {
    pub fn len(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn flat(&self, p: &[i64]) -> usize {
        p.iter()
            .zip(&self.lower)
            .zip(&self.extent)
            .fold(0usize, |flat, ((pk, lo), ext)| flat * ext + (pk - lo) as usize)
    }
}

/// Odometer over all integer points of the box `[-r, r]^d`, lexicographic.
pub(crate) fn cube_points(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut f| {
            let mut p = vec![0i64; d];
            for slot in p.iter_mut().rev() {
                *slot = (f % side) as i64 - r;
                f /= side;
            }
            p
        })
        .collect()
}

/// Sup norm `max_k |v_k|` of an integer vector.
pub fn sup_norm(v: &[i64]) -> i64 {
    v.iter().map(|c| c.abs()).max().unwrap_or(0)
}
