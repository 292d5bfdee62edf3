//! Execution policy and order-independent reductions.
//!
//! Data-parallel loops go through [`map_indexed`], which always returns
//! results in index order. Reductions are then performed sequentially with
//! compensated summation, so a parallel run is bit-identical to a sequential
//! one.

use num_complex::Complex64;

/// How data-parallel loops are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// runs sequentially.
    #[default]
    Parallel,
}

impl ExecPolicy {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(policy: ExecPolicy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match policy {
        #[cfg(feature = "parallel")]
        ExecPolicy::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated summation applied to real and imaginary parts separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

pub fn complex_sum<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    iter.into_iter().collect::<ComplexSum>().value()
}

pub fn real_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in iter {
        s.add(x);
    }
    s.value()
}

/// `max` over an index range, evaluated under `policy`.
pub fn max_indexed<F>(policy: ExecPolicy, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(policy, n, f).into_iter().fold(0.0, f64::max)
}

/// `exp(2πi·turns)`, reducing the argument to `[-1/2, 1/2)` first.
pub fn unit(turns: f64) -> Complex64 {
    let r = turns - turns.round();
    let (s, c) = (std::f64::consts::TAU * r).sin_cos();
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(real_sum(xs), 2.0);
    }

    #[test]
    fn policies_agree_bitwise() {
        let f = |i: usize| unit(i as f64 / 7.0) * (i as f64).sqrt();
        let a = complex_sum(map_indexed(ExecPolicy::Sequential, 10_000, f));
        let b = complex_sum(map_indexed(ExecPolicy::Parallel, 10_000, f));
        assert_eq!(a, b);
    }

    #[test]
    fn unit_hits_exact_quarter_turns() {
        assert_eq!(unit(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(unit(3.0).re, 1.0);
        assert!((unit(0.5).re + 1.0).abs() < 1e-15);
    }
}
