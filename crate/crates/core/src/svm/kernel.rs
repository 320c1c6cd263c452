use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Gaussian RBF kernel `exp(-gamma * ||x - z||^2)`.
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: z.len(),
        });
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Config("gamma must be positive".into()));
    }
    Ok(rbf_unchecked(x, z, gamma))
}

#[inline]
pub(crate) fn rbf_unchecked(x: &[f64], z: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Rows above this length are computed on the rayon pool.
const PARALLEL_ROW_LEN: usize = 2048;

/// Least-recently-used cache of kernel rows, bounded by a byte budget.
/// At least two rows are always retained so an SMO step can hold both.
pub(crate) struct KernelCache<'a> {
    x: &'a [Vec<f64>],
    gamma: f64,
    rows: Vec<Option<Arc<[f64]>>>,
    last_used: Vec<u64>,
    cached: Vec<usize>,
    capacity_rows: usize,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    pub(crate) fn new(x: &'a [Vec<f64>], gamma: f64, budget_bytes: usize) -> Self {
        let n = x.len();
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1);
        let capacity_rows = (budget_bytes / row_bytes).clamp(2, n.max(2));
        KernelCache {
            x,
            gamma,
            rows: vec![None; n],
            last_used: vec![0; n],
            cached: Vec::new(),
            capacity_rows,
            clock: 0,
        }
    }

    pub(crate) fn row(&mut self, i: usize) -> Arc<[f64]> {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if let Some(r) = &self.rows[i] {
            return r.clone();
        }
        if self.cached.len() >= self.capacity_rows {
            let (pos, &victim) = self
                .cached
                .iter()
                .enumerate()
                .min_by_key(|(_, &k)| self.last_used[k])
                .expect("cache is non-empty when full");
            self.rows[victim] = None;
            self.cached.swap_remove(pos);
        }
        let row = self.compute(i);
        self.rows[i] = Some(row.clone());
        self.cached.push(i);
        row
    }

    fn compute(&self, i: usize) -> Arc<[f64]> {
        let xi = &self.x[i];
        let gamma = self.gamma;
        if self.x.len() >= PARALLEL_ROW_LEN {
            self.x
                .par_iter()
                .map(|xj| rbf_unchecked(xi, xj, gamma))
                .collect::<Vec<_>>()
                .into()
        } else {
            self.x
                .iter()
                .map(|xj| rbf_unchecked(xi, xj, gamma))
                .collect::<Vec<_>>()
                .into()
        }
    }
}
