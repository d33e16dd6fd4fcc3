//! Adaptive choice of the Fock-space cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Doubling schedule for the truncation dimension: start at `start_dim` and
/// double until the top-four-level tail mass drops below `tail_tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Truncation {
    pub start_dim: usize,
    pub max_dim: usize,
    pub tail_tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            start_dim: 32,
            max_dim: 4096,
            tail_tolerance: 1e-10,
        }
    }
}

impl Truncation {
    pub fn validate(&self) -> Result<()> {
        if self.start_dim < 2 {
            return Err(Error::InvalidDimension {
                dim: self.start_dim,
                min: 2,
            });
        }
        if self.max_dim < self.start_dim {
            return Err(Error::InvalidParameter(format!(
                "max_dim {} below start_dim {}",
                self.max_dim, self.start_dim
            )));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance {} outside (0, 1)",
                self.tail_tolerance
            )));
        }
        Ok(())
    }

    /// Builds at increasing dimensions until `tail` of the result falls below
    /// the tolerance. Build errors of kind truncation-overflow trigger another
    /// doubling; anything else is returned as is.
    pub fn adapt<T>(
        &self,
        mut build: impl FnMut(usize) -> Result<T>,
        tail: impl Fn(&T) -> f64,
    ) -> Result<(T, usize)> {
        self.validate()?;
        let mut dim = self.start_dim;
        loop {
            let last = dim >= self.max_dim;
            match build(dim) {
                Ok(value) => {
                    let mass = tail(&value);
                    if mass < self.tail_tolerance {
                        return Ok((value, dim));
                    }
                    if last {
                        return Err(Error::TruncationOverflow {
                            tail: mass,
                            dim,
                            tolerance: self.tail_tolerance,
                        });
                    }
                }
                Err(Error::TruncationOverflow { tail, .. }) if last => {
                    return Err(Error::TruncationOverflow {
                        tail,
                        dim,
                        tolerance: self.tail_tolerance,
                    });
                }
                Err(Error::TruncationOverflow { .. }) => {}
                Err(e) => return Err(e),
            }
            dim = (dim * 2).min(self.max_dim);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_until_converged() {
        let t = Truncation::default();
        let (v, dim) = t.adapt(Ok, |&d| if d >= 128 { 0.0 } else { 1.0 }).unwrap();
        assert_eq!((v, dim), (128, 128));
    }

    #[test]
    fn overflow_at_max() {
        let t = Truncation {
            start_dim: 8,
            max_dim: 40,
            tail_tolerance: 1e-10,
        };
        let mut seen = Vec::new();
        let err = t
            .adapt(
                |d| {
                    seen.push(d);
                    Ok(d)
                },
                |_| 1.0,
            )
            .unwrap_err();
        assert_eq!(seen, vec![8, 16, 32, 40]);
        assert!(matches!(err, Error::TruncationOverflow { dim: 40, .. }));
    }
}
