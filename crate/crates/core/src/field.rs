//! Degree-of-freedom layout and discrete field storage.
//!
//! Unknowns are stored element by element in contiguous blocks of
//! 2 * dim(P_k): the x-component coefficients followed by the y-component
//! coefficients of that element's vector polynomial.

use crate::basis::PolyBasis;

/// Maps an element to its contiguous block of unknowns.
#[derive(Debug, Clone, Copy)]
pub struct DofMap {
    pub n_elements: usize,
    /// Block size: 2 * dim(P_k).
    pub block: usize,
}

impl DofMap {
    pub fn new(n_elements: usize, trial_dim: usize) -> Self {
        DofMap {
            n_elements,
            block: 2 * trial_dim,
        }
    }

    pub fn n(&self) -> usize {
        self.n_elements * self.block
    }

    pub fn offset(&self, tau: usize) -> usize {
        tau * self.block
    }
}

/// Piecewise vector polynomial as one flat coefficient vector.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub map: DofMap,
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(map: DofMap) -> Self {
        DiscreteField {
            values: vec![0.0; map.n()],
            map,
        }
    }

    pub fn from_values(map: DofMap, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), map.n());
        DiscreteField { map, values }
    }

    /// Coefficient block of one element.
    pub fn block(&self, tau: usize) -> &[f64] {
        let o = self.map.offset(tau);
        &self.values[o..o + self.map.block]
    }

    pub fn block_mut(&mut self, tau: usize) -> &mut [f64] {
        let o = self.map.offset(tau);
        &mut self.values[o..o + self.map.block]
    }

    /// Evaluate the vector field on element `tau` at reference points.
    pub fn eval_on_element(
        &self,
        basis: &PolyBasis,
        tau: usize,
        pts: &[[f64; 2]],
    ) -> Vec<[f64; 2]> {
        let dim = basis.dim();
        let vals = basis.eval(pts);
        let block = self.block(tau);
        (0..pts.len())
            .map(|q| {
                let mut v = [0.0; 2];
                for m in 0..dim {
                    v[0] += block[m] * vals[m][q];
                    v[1] += block[dim + m] * vals[m][q];
                }
                v
            })
            .collect()
    }
}
