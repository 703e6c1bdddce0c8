//! Named seed configurations.
//!
//! | name          | bodies | coordinates                                   |
//! |---------------|--------|-----------------------------------------------|
//! | `lagrange`    | 3      | unit circle at 90, 210 and 330 degrees        |
//! | `euler`       | 3      | `(-1, 0)`, `(0, 0)`, `(1, 0)`                 |
//! | `tetrahedron` | 4      | `(1,1,1,0)`, `(1,-1,-1,0)`, `(-1,1,-1,0)`, `(-1,-1,1,0)` |
//! | `square`      | 4      | `(1, 0)`, `(0, 1)`, `(-1, 0)`, `(0, -1)`      |
//!
//! Default masses are equal. Coordinates missing in the requested ambient
//! dimension are zero.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nbody::flatten;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Lagrange,
    Euler,
    Tetrahedron,
    Square,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Lagrange, Preset::Euler, Preset::Tetrahedron, Preset::Square];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Lagrange => "lagrange",
            Preset::Euler => "euler",
            Preset::Tetrahedron => "tetrahedron",
            Preset::Square => "square",
        }
    }

    pub fn bodies(self) -> usize {
        match self {
            Preset::Lagrange | Preset::Euler => 3,
            Preset::Tetrahedron | Preset::Square => 4,
        }
    }

    /// Smallest ambient dimension containing the seed.
    pub fn min_ambient(self) -> usize {
        match self {
            Preset::Tetrahedron => 3,
            _ => 2,
        }
    }

    pub fn equal_masses(self) -> Vec<f64> {
        vec![1.0; self.bodies()]
    }

    fn raw(self) -> Vec<Vec<f64>> {
        match self {
            Preset::Lagrange => [90.0_f64, 210.0, 330.0]
                .iter()
                .map(|deg| {
                    let t = deg.to_radians();
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            Preset::Euler => vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]],
            Preset::Tetrahedron => vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ],
            Preset::Square => vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        }
    }

    /// Seed positions in the given ambient dimension.
    pub fn seed(self, ambient: usize) -> Result<DVector<f64>> {
        if ambient < self.min_ambient() {
            return Err(Error::Input(format!(
                "preset '{}' needs ambient dimension at least {}",
                self.name(),
                self.min_ambient()
            )));
        }
        let bodies: Vec<Vec<f64>> = self
            .raw()
            .into_iter()
            .map(|mut b| {
                b.resize(ambient, 0.0);
                b
            })
            .collect();
        flatten(&bodies)
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown preset '{s}'")))
    }
}
