//! Small numeric helpers: compensated summation and integer roots.

/// Kahan-Babuska-Neumaier compensated accumulator.
///
/// Keeps the error of a 10^6-term sum near one ulp of the result, which the
/// long-chain estimators rely on.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kbn {
    sum: f64,
    comp: f64,
}

impl Kbn {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Largest integer `r` with `r*r <= x`.
pub(crate) fn isqrt(x: usize) -> usize {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).sqrt() as usize;
    while r.saturating_mul(r) > x {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= x {
        r += 1;
    }
    r
}

/// Largest integer `r` with `r*r*r <= x`.
pub(crate) fn icbrt(x: usize) -> usize {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).cbrt() as usize;
    while r.saturating_mul(r).saturating_mul(r) > x {
        r -= 1;
    }
    let cube = |v: usize| v.saturating_mul(v).saturating_mul(v);
    while cube(r + 1) <= x {
        r += 1;
    }
    r
}
