//! The ambient space: flat C^m realized as R^2m with the Euclidean metric
//! and the standard complex structure pairing consecutive coordinates,
//! J e_{2i-1} = e_{2i}, J e_{2i} = -e_{2i-1} (1-indexed).

use nalgebra::DVector;

use crate::error::{GeomError, Result};

/// Flat Kahler ambient space of complex dimension `m` (real dimension `2m`).
///
/// The connection is the plain directional derivative and `J` is constant,
/// so `J` is parallel identically; no runtime check is needed for that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmbientSpace {
    complex_dim: usize,
}

impl AmbientSpace {
    pub fn new(complex_dim: usize) -> AmbientSpace {
        AmbientSpace { complex_dim }
    }

    pub fn complex_dim(&self) -> usize {
        self.complex_dim
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() == self.real_dim() {
            Ok(())
        } else {
            Err(GeomError::DimensionMismatch {
                expected: self.real_dim(),
                got: v.len(),
            })
        }
    }

    /// Apply the complex structure: (Jv)_{2i} = -v_{2i+1}, (Jv)_{2i+1} = v_{2i}
    /// in 0-indexed pairs. Applying twice negates the vector.
    pub fn apply_j(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(v)?;
        let mut out = DVector::zeros(v.len());
        for pair in 0..self.complex_dim {
            out[2 * pair] = -v[2 * pair + 1];
            out[2 * pair + 1] = v[2 * pair];
        }
        Ok(out)
    }

    /// Residual of metric compatibility: |<JX, JY> - <X, Y>|.
    pub fn kaehler_compatibility_residual(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<f64> {
        let jx = self.apply_j(x)?;
        let jy = self.apply_j(y)?;
        Ok((jx.dot(&jy) - x.dot(y)).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn pairing_convention() {
        let space = AmbientSpace::new(2);
        assert_eq!(space.apply_j(&e(4, 0)).unwrap(), e(4, 1));
        assert_eq!(space.apply_j(&e(4, 1)).unwrap(), -e(4, 0));
        assert_eq!(space.apply_j(&e(4, 2)).unwrap(), e(4, 3));
    }

    #[test]
    fn j_squared_is_minus_identity() {
        let space = AmbientSpace::new(3);
        let v = DVector::from_fn(6, |i, _| (i as f64 + 1.0) * 0.7);
        let jjv = space.apply_j(&space.apply_j(&v).unwrap()).unwrap();
        assert!((jjv + &v).amax() < 1e-15);
    }

    #[test]
    fn compatibility_residual_on_axes() {
        let space = AmbientSpace::new(2);
        assert_eq!(
            space
                .kaehler_compatibility_residual(&e(4, 0), &e(4, 2))
                .unwrap(),
            0.0
        );
        assert_eq!(
            space
                .kaehler_compatibility_residual(&e(4, 0), &e(4, 0))
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn j_is_an_isometry_and_skew() {
        let space = AmbientSpace::new(7);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..25 {
            let x = DVector::from_fn(14, |_, _| rng.gen_range(-2.0..2.0));
            let y = DVector::from_fn(14, |_, _| rng.gen_range(-2.0..2.0));
            assert!(space.kaehler_compatibility_residual(&x, &y).unwrap() <= 1e-14);
            let jx = space.apply_j(&x).unwrap();
            let jy = space.apply_j(&y).unwrap();
            assert!((jx.norm() - x.norm()).abs() <= 1e-14 * x.norm());
            // skew: <JX, Y> = -<X, JY>
            assert!((jx.dot(&y) + x.dot(&jy)).abs() <= 1e-14 * x.norm() * y.norm());
        }
    }

    #[test]
    fn dimension_mismatch() {
        let space = AmbientSpace::new(2);
        assert!(matches!(
            space.apply_j(&e(6, 0)),
            Err(GeomError::DimensionMismatch { .. })
        ));
    }
}
