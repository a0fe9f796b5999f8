use super::NumError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Rectangular grid with uniform spacing per axis. Flat indices are row-major
/// with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
    strides: Vec<usize>,
}

pub const MIN_POINTS: usize = 5;

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self, NumError> {
        if axes.is_empty() {
            return Err(NumError::Grid("grid needs at least one axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.points < MIN_POINTS {
                return Err(NumError::Grid(format!(
                    "axis {} has {} points, need at least {MIN_POINTS}",
                    i + 1,
                    a.points
                )));
            }
            if !a.min.is_finite() || !a.max.is_finite() || a.max <= a.min {
                return Err(NumError::Grid(format!("axis {} has empty range [{}, {}]", i + 1, a.min, a.max)));
            }
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len() - 1).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].points;
        }
        Ok(GridSpec { axes, strides })
    }

    /// `dim` axes over `[min, max]` with `points` points each.
    pub fn cube(dim: usize, min: f64, max: f64, points: usize) -> Result<Self, NumError> {
        GridSpec::new(vec![Axis { min, max, points }; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn points(&self, axis: usize) -> usize {
        self.axes[axis].points
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let a = &self.axes[axis];
        (a.max - a.min) / (a.points - 1) as f64
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let a = &self.axes[axis];
        if i + 1 == a.points {
            a.max
        } else {
            a.min + i as f64 * self.spacing(axis)
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (i, s) in self.strides.iter().enumerate() {
            idx[i] = flat / s;
            flat %= s;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coordinates(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.coordinate(a, i)).collect()
    }

    /// At least `margin` points away from every face.
    pub fn is_interior(&self, idx: &[usize], margin: usize) -> bool {
        idx.iter().zip(&self.axes).all(|(&i, a)| i >= margin && i + margin < a.points)
    }

    /// Flat indices of the points at least `margin` away from every face.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.len()).filter(|&f| self.is_interior(&self.unflatten(f), margin)).collect()
    }

    /// Same grid with every axis refined to `points`.
    pub fn with_points(&self, points: usize) -> Result<Self, NumError> {
        GridSpec::new(self.axes.iter().map(|a| Axis { points, ..*a }).collect())
    }

    /// Builds a grid from explicit coordinate arrays, checking uniform spacing.
    pub fn from_coordinates(coords: &[Vec<f64>]) -> Result<Self, NumError> {
        let mut axes = Vec::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if c.len() < 2 {
                return Err(NumError::Grid(format!("axis {} has fewer than two coordinates", i + 1)));
            }
            let h = (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64;
            let uniform = c.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
            if !uniform {
                return Err(NumError::NonUniform(i + 1));
            }
            axes.push(Axis { min: c[0], max: c[c.len() - 1], points: c.len() });
        }
        GridSpec::new(axes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_index_round_trip() {
        let g = GridSpec::new(vec![
            Axis { min: 0.0, max: 1.0, points: 5 },
            Axis { min: -1.0, max: 1.0, points: 6 },
            Axis { min: 0.0, max: 2.0, points: 7 },
        ])
        .unwrap();
        assert_eq!(g.len(), 210);
        for f in [0, 17, 209] {
            assert_eq!(g.flatten(&g.unflatten(f)), f);
        }
        assert_eq!(g.interior(1).len(), 3 * 4 * 5);
        assert!((g.spacing(1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_or_nonuniform_grids() {
        assert!(GridSpec::cube(2, 0.0, 1.0, 4).is_err());
        assert!(GridSpec::cube(2, 1.0, 1.0, 9).is_err());
        let ok = GridSpec::from_coordinates(&[vec![0.0, 0.25, 0.5, 0.75, 1.0]]).unwrap();
        assert_eq!(ok.points(0), 5);
        assert!(matches!(GridSpec::from_coordinates(&[vec![0.0, 0.2, 0.5, 0.75, 1.0]]), Err(NumError::NonUniform(1))));
    }
}
