//! Work distribution. The core only needs an ordered parallel map; the std
//! companion crate supplies a thread-pool implementation.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(0..count)` and returns the results in index order.
    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        (0..count).map(f).collect()
    }
}

/// Fixed-shape pairwise reduction: the result depends only on the input order.
pub fn pairwise<T: Clone>(items: &[T], merge: &impl Fn(&T, &T) -> T) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (a, b) = items.split_at(n / 2);
            let left = pairwise(a, merge)?;
            let right = pairwise(b, merge)?;
            Some(merge(&left, &right))
        }
    }
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise(values, &|a: &f64, b: &f64| a + b).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_map_and_sum() {
        let v = Sequential.map(5, |i| i * i);
        assert_eq!(v, [0, 1, 4, 9, 16]);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
