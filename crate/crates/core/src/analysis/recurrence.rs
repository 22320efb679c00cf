use rayon::prelude::*;
use serde::Serialize;

use super::strobe::distance;
use crate::dynamics::Trajectory;
use crate::error::{EslError, Result};

/// Largest strided sample count accepted (the matrix is quadratic in it).
pub const MAX_RECURRENCE_SAMPLES: usize = 5000;

/// Symmetric binary matrix `R_ij = [|x_i - x_j| <= epsilon]`, bit-packed by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceMatrix {
    pub epsilon: f64,
    pub stride: usize,
    size: usize,
    words: usize,
    bits: Vec<u64>,
}

impl RecurrenceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set entries in row-major order.
    pub fn set_bits(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size).flat_map(move |i| (0..self.size).filter(move |&j| self.get(i, j)).map(move |j| (i, j)))
    }

    /// Fraction of set entries on each diagonal `j - i = lag`, for `lag` in `0..size`.
    pub fn rate_by_lag(&self) -> Vec<f64> {
        (0..self.size)
            .map(|lag| {
                let len = self.size - lag;
                (0..len).filter(|&i| self.get(i, i + lag)).count() as f64 / len as f64
            })
            .collect()
    }
}

/// Recurrence matrix of every `stride`-th state of `traj`.
pub fn recurrence(traj: &Trajectory, epsilon: f64, stride: usize) -> Result<RecurrenceMatrix> {
    if stride == 0 {
        return Err(EslError::InvalidInput("stride must be at least 1".into()));
    }
    let points: Vec<&[f64]> = traj.states().step_by(stride).collect();
    if points.len() > MAX_RECURRENCE_SAMPLES {
        return Err(EslError::TooManySamples { count: points.len(), max: MAX_RECURRENCE_SAMPLES });
    }
    Ok(from_points(&points, epsilon, stride))
}

pub fn from_points(points: &[&[f64]], epsilon: f64, stride: usize) -> RecurrenceMatrix {
    let size = points.len();
    let words = size.div_ceil(64).max(1);
    let mut bits = vec![0u64; size * words];
    bits.par_chunks_mut(words).enumerate().for_each(|(i, row)| {
        for (j, p) in points.iter().enumerate() {
            if i == j || distance(points[i], p) <= epsilon {
                row[j / 64] |= 1 << (j % 64);
            }
        }
    });
    RecurrenceMatrix { epsilon, stride, size, words, bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::Representation;

    #[test]
    fn symmetric_with_unit_diagonal() {
        let states: Vec<f64> = (0..200).flat_map(|k| [(k as f64 * 0.3).sin(), (k as f64 * 0.3).cos(), 0.0]).collect();
        let tr = Trajectory::from_states(Representation::Euler, None, 0.0, 0.3, states).unwrap();
        let r = recurrence(&tr, 0.1, 2).unwrap();
        assert_eq!(r.size(), 100);
        for i in 0..100 {
            assert!(r.get(i, i));
            for j in 0..100 {
                assert_eq!(r.get(i, j), r.get(j, i));
            }
        }
        let all = recurrence(&tr, 10.0, 1).unwrap();
        assert_eq!(all.count_set(), 200 * 200);
    }

    #[test]
    fn memory_guard() {
        let tr = Trajectory::from_states(Representation::Euler, None, 0.0, 1.0, vec![0.0; 3 * 5001]).unwrap();
        assert!(matches!(recurrence(&tr, 0.1, 1), Err(EslError::TooManySamples { .. })));
        assert!(recurrence(&tr, 0.1, 2).is_ok());
    }
}
