use serde::{Deserialize, Serialize};

/// Constant exterior Dirichlet data: the density imposed on the whole
/// complement of the computational interval, one value per side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorDatum {
    pub left: f64,
    pub right: f64,
}

impl ExteriorDatum {
    pub const INVASION: ExteriorDatum = ExteriorDatum {
        left: 1.0,
        right: 0.0,
    };

    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn uniform(value: f64) -> Self {
        Self {
            left: value,
            right: value,
        }
    }

    pub fn is_admissible(&self) -> bool {
        (0.0..=1.0).contains(&self.left) && (0.0..=1.0).contains(&self.right)
    }
}

/// Interior values on a uniform grid `x_j = left_x + j dx`, together with
/// the exterior datum that completes them on the rest of the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub left_x: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    pub exterior: ExteriorDatum,
    pub time: f64,
}

impl GridState {
    pub fn new(left_x: f64, dx: f64, values: Vec<f64>, exterior: ExteriorDatum) -> Self {
        Self {
            left_x,
            dx,
            values,
            exterior,
            time: 0.0,
        }
    }

    /// Samples `f` on `len` nodes starting at `left_x`.
    pub fn from_fn(left_x: f64, dx: f64, len: usize, exterior: ExteriorDatum, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|j| f(left_x + j as f64 * dx)).collect();
        Self::new(left_x, dx, values, exterior)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.left_x + j as f64 * self.dx
    }

    pub fn right_x(&self) -> f64 {
        self.x(self.len().saturating_sub(1))
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.x(j))
    }

    /// Value at signed node index `j`, falling back to the exterior datum
    /// outside `0..len`.
    pub fn value_at(&self, j: isize) -> f64 {
        if j < 0 {
            self.exterior.left
        } else if (j as usize) >= self.len() {
            self.exterior.right
        } else {
            self.values[j as usize]
        }
    }
}
