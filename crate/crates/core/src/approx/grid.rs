use serde::Serialize;

use super::RewardCoefficients;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Candidate values for the unknown loss L(pi) of a good policy.
///
/// Holds 0 and the geometric values L_i = (1 + eps)^i r_min / |S2| for
/// i = 0..=ell. When certain terminals are present a policy's loss can be
/// smaller than r_min / |S2|, so the sequence is continued downward until it
/// passes below the smallest positive coefficient at a deviation-capable
/// terminal.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct GuessGrid<F> {
    pub epsilon: F,
    pub r_min: Option<F>,
    pub r_max: Option<F>,
    pub ell: usize,
    pub values: Vec<F>,
}

impl<F: Scalar> GuessGrid<F> {
    pub fn new(coeffs: &RewardCoefficients<F>, epsilon: F) -> Result<Self> {
        if !(epsilon > F::zero()) || !epsilon.is_finite() {
            return Err(Error::OutOfRange(format!("epsilon {epsilon} must be positive")));
        }
        let positive: Vec<F> = coeffs
            .rewards
            .iter()
            .copied()
            .filter(|&r| r > F::zero())
            .collect();
        let mut values = vec![F::zero()];
        if positive.is_empty() {
            return Ok(GuessGrid {
                epsilon,
                r_min: None,
                r_max: None,
                ell: 0,
                values,
            });
        }
        let r_min = positive.iter().copied().fold(F::infinity(), F::min);
        let r_max = positive.iter().copied().fold(F::zero(), F::max);
        let n2 = F::of_usize(coeffs.terminal_count());
        let growth = F::one() + epsilon;
        let base = r_min / n2;
        let ell = (n2 * r_max / r_min).log(growth).ceil().to_usize().unwrap_or(0);

        let smallest = coeffs
            .v
            .iter()
            .flatten()
            .flat_map(|row| row.iter().enumerate())
            .filter(|&(t, &x)| coeffs.capable[t] && x > F::zero())
            .map(|(_, &x)| x)
            .fold(F::infinity(), F::min);
        let mut below = 0i32;
        while smallest.is_finite() && base * growth.powi(-below) > smallest {
            below += 1;
        }
        let mut i = -below;
        loop {
            let x = base * growth.powi(i);
            values.push(x);
            if i >= ell as i32 && x >= r_max {
                break;
            }
            i += 1;
        }
        Ok(GuessGrid {
            epsilon,
            r_min: Some(r_min),
            r_max: Some(r_max),
            ell,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn positive(&self) -> impl Iterator<Item = F> + '_ {
        self.values.iter().copied().filter(|&x| x > F::zero())
    }
}
