//! Flat storage for a vector-valued chain of observations.

/// A chain of `len()` observations in `R^dim`, stored step-major in one
/// contiguous buffer. This is the common currency between walkers, the
/// estimators, and the covariance machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureChain {
    dim: usize,
    data: Vec<f64>,
}

impl FeatureChain {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "chain dimension must be >= 1");
        Self { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, steps: usize) -> Self {
        assert!(dim >= 1, "chain dimension must be >= 1");
        Self { dim, data: Vec::with_capacity(dim * steps) }
    }

    /// Wrap an existing step-major buffer. Panics if the buffer length is not
    /// a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim >= 1, "chain dimension must be >= 1");
        assert_eq!(data.len() % dim, 0, "flat buffer not a multiple of dim");
        Self { dim, data }
    }

    /// A scalar (dim-1) chain.
    pub fn from_scalar(data: Vec<f64>) -> Self {
        Self { dim: 1, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observations.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn push(&mut self, step: &[f64]) {
        debug_assert_eq!(step.len(), self.dim);
        self.data.extend_from_slice(step);
    }

    #[inline]
    pub fn step(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_steps(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}
