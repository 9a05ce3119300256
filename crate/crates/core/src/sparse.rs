//! Block-structured symmetric sparse matrices in CSR form.
//!
//! Unknowns come in equal-sized element blocks, so the sparsity pattern is
//! described per block row by a sorted list of block columns; every scalar
//! row in a block row shares that list. Assembly routines are expected to
//! add bit-identical values at (i, j) and (j, i) in the same element order,
//! which keeps the stored matrix exactly symmetric; `verify_symmetry` checks
//! that property entry by entry.

use crate::dense::DenseMatrix;
use crate::error::MwgError;
use rayon::prelude::*;
use std::io::Write;

#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    block: usize,
    /// Sorted block-column lists, shared by the scalar rows of a block row.
    block_cols: Vec<Vec<u32>>,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

/// Collects the coupled block pairs of a matrix before allocation.
pub struct PatternBuilder {
    n_blocks: usize,
    block: usize,
    pairs: Vec<Vec<u32>>,
}

impl PatternBuilder {
    pub fn new(n_blocks: usize, block: usize) -> Self {
        PatternBuilder {
            n_blocks,
            block,
            pairs: vec![Vec::new(); n_blocks],
        }
    }

    /// Mark block (i, j) and its transpose as structurally nonzero.
    pub fn couple(&mut self, i: usize, j: usize) {
        self.pairs[i].push(j as u32);
        if i != j {
            self.pairs[j].push(i as u32);
        }
    }

    pub fn build(mut self) -> SparseSymMatrix {
        for cols in &mut self.pairs {
            cols.sort_unstable();
            cols.dedup();
        }
        let b = self.block;
        let n = self.n_blocks * b;
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0usize);
        let mut nnz = 0usize;
        for br in 0..self.n_blocks {
            let row_nnz = self.pairs[br].len() * b;
            for _ in 0..b {
                nnz += row_nnz;
                row_ptr.push(nnz);
            }
        }
        let mut col_idx = Vec::with_capacity(nnz);
        for br in 0..self.n_blocks {
            for _ in 0..b {
                for &bc in &self.pairs[br] {
                    for off in 0..b as u32 {
                        col_idx.push(bc * b as u32 + off);
                    }
                }
            }
        }
        SparseSymMatrix {
            n,
            block: b,
            block_cols: self.pairs,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }
}

impl SparseSymMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Index into `values` of entry (row i, first column of block bc).
    /// The block's columns are contiguous from there.
    pub fn block_start(&self, i: usize, bc: usize) -> usize {
        let br = i / self.block;
        let pos = self.block_cols[br]
            .binary_search(&(bc as u32))
            .expect("block not in pattern");
        self.row_ptr[i] + pos * self.block
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        let br = i / self.block;
        match self.block_cols[br].binary_search(&((j / self.block) as u32)) {
            Ok(pos) => self.values[self.row_ptr[i] + pos * self.block + j % self.block],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value_at(i, i)).collect()
    }

    /// y = A x. Rows are computed independently in fixed order, so the
    /// result is bit-identical for any thread count.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let chunk = 4096;
        y.par_chunks_mut(chunk).enumerate().for_each(|(ci, yc)| {
            let base = ci * chunk;
            for (r, slot) in yc.iter_mut().enumerate() {
                let i = base + r;
                let lo = self.row_ptr[i];
                let hi = self.row_ptr[i + 1];
                let mut acc = 0.0;
                for (v, &c) in self.values[lo..hi].iter().zip(&self.col_idx[lo..hi]) {
                    acc += v * x[c as usize];
                }
                *slot = acc;
            }
        });
    }

    /// Check exact (bitwise) symmetry of the stored values.
    pub fn verify_symmetry(&self) -> Result<(), MwgError> {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k] as usize;
                if j > i {
                    continue;
                }
                if self.values[k].to_bits() != self.value_at(j, i).to_bits() {
                    return Err(MwgError::AsymmetricMatrix { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Dense copy for small cross-check solves.
    pub fn to_dense(&self, limit: usize) -> Result<DenseMatrix, MwgError> {
        if self.n > limit {
            return Err(MwgError::DenseTooLarge {
                n: self.n,
                limit,
            });
        }
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                *d.at_mut(i, self.col_idx[k] as usize) = self.values[k];
            }
        }
        Ok(d)
    }

    /// Debug dump in coordinate text format: one `row col value` per line.
    pub fn write_coo<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                writeln!(w, "{} {} {}", i, self.col_idx[k], self.values[k])?;
            }
        }
        Ok(())
    }
}

/// Debug dump of a vector, one value per line.
pub fn write_vector<W: Write>(v: &[f64], w: &mut W) -> std::io::Result<()> {
    for x in v {
        writeln!(w, "{x}")?;
    }
    Ok(())
}
