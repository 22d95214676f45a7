//! Order-independent summation helpers.
//!
//! Every reduction that feeds a symmetry or permutation invariant goes
//! through [`canonical_sum`]: the operands are sorted with `total_cmp` and
//! then accumulated with Neumaier compensation, so the result depends only
//! on the multiset of inputs.

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of `values` after sorting them; permutation invariant.
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mut acc = CompensatedSum::new();
    for &v in values.iter() {
        acc.add(v);
    }
    acc.value()
}

/// Mean; exact when all values are equal.
pub fn mean(values: &[f64]) -> f64 {
    if let Some(&first) = values.first() {
        if values.iter().all(|&v| v == first) {
            return first;
        }
    }
    let mut buf = values.to_vec();
    canonical_sum(&mut buf) / values.len() as f64
}

/// Population (divide-by-n) mean and standard deviation, two-pass.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let mu = mean(values);
    let mut dev: Vec<f64> = values.iter().map(|v| (v - mu) * (v - mu)).collect();
    let var = canonical_sum(&mut dev) / values.len() as f64;
    (mu, var.sqrt())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let mut acc = CompensatedSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn canonical_sum_ignores_order() {
        let mut a = vec![0.1, 0.7, 1e-17, 3.3, -2.2];
        let mut b = vec![3.3, 1e-17, -2.2, 0.1, 0.7];
        assert_eq!(canonical_sum(&mut a).to_bits(), canonical_sum(&mut b).to_bits());
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[3.0, 4.0]);
        assert_eq!(m, 3.5);
        assert_eq!(s, 0.5);
        assert_eq!(mean_std(&[0.1; 7]), (0.1, 0.0));
    }
}
