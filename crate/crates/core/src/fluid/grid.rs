use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Body-fitted axisymmetric grid: node (i, j) sits at z_i and r = η_j·a(z_i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymGrid {
    pub n_z: usize,
    pub n_r: usize,
    pub z_nodes: Vec<f64>,
    /// Normalized radial coordinate, 0 on the axis and 1 on the wall.
    pub eta: Vec<f64>,
    pub wall_radius: Vec<f64>,
}

/// Default geometric growth of the radial spacing toward the axis.
pub const DEFAULT_STRETCH: f64 = 1.05;

impl AxisymGrid {
    pub fn length(&self) -> f64 {
        self.z_nodes[self.n_z] - self.z_nodes[0]
    }

    pub fn node_radius(&self, i: usize, j: usize) -> f64 {
        self.eta[j] * self.wall_radius[i]
    }

    /// Cell area in the (z, r) plane.
    pub fn cell_area(&self, i: usize, j: usize) -> f64 {
        let dz = self.z_nodes[i + 1] - self.z_nodes[i];
        let a = 0.5 * (self.wall_radius[i] + self.wall_radius[i + 1]);
        dz * a * (self.eta[j + 1] - self.eta[j])
    }
}

/// Builds a grid over [0, length] with a wall profile sampled uniformly in z
/// (resampled linearly onto the n_z + 1 axial nodes).
pub fn build_grid(length: f64, wall_profile: &[f64], n_z: usize, n_r: usize, stretch: f64) -> Result<AxisymGrid> {
    if n_z < 8 || n_r < 8 {
        return Err(Error::param("n_z/n_r", format!("need at least 8 cells, got {n_z}×{n_r}")));
    }
    if !(length > 0.0) {
        return Err(Error::param("length", "must be positive"));
    }
    if !(1.0..=1.2).contains(&stretch) {
        return Err(Error::param("stretch", format!("must lie in [1, 1.2], got {stretch}")));
    }
    if wall_profile.len() < 2 {
        return Err(Error::param("wall_profile", "need at least two samples"));
    }
    if let Some(a) = wall_profile.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::DegenerateGeometry(format!("wall radius {a} is not positive")));
    }
    let z_nodes: Vec<f64> = (0..=n_z).map(|i| length * i as f64 / n_z as f64).collect();
    let m = wall_profile.len() - 1;
    let wall_radius = if m == n_z {
        wall_profile.to_vec()
    } else {
        z_nodes
            .iter()
            .map(|z| {
                let s = z / length * m as f64;
                let k = (s.floor() as usize).min(m - 1);
                let w = s - k as f64;
                wall_profile[k] + w * (wall_profile[k + 1] - wall_profile[k])
            })
            .collect()
    };
    // Spacing shrinks geometrically toward the wall.
    let steps: Vec<f64> = (0..n_r).map(|j| stretch.powi(-(j as i32))).collect();
    let total: f64 = steps.iter().sum();
    let mut eta = Vec::with_capacity(n_r + 1);
    let mut acc = 0.0;
    eta.push(0.0);
    for s in &steps[..n_r - 1] {
        acc += s / total;
        eta.push(acc);
    }
    eta.push(1.0);
    Ok(AxisymGrid {
        n_z,
        n_r,
        z_nodes,
        eta,
        wall_radius,
    })
}

/// Moves the wall by a radial displacement per axial node; interior nodes
/// follow by proportional rescaling of each radial line.
pub fn deform_grid(grid: &AxisymGrid, displacement: &[f64]) -> Result<AxisymGrid> {
    if displacement.len() != grid.n_z + 1 {
        return Err(Error::DimensionMismatch {
            expected: grid.n_z + 1,
            got: displacement.len(),
        });
    }
    let wall_radius: Vec<f64> = grid.wall_radius.iter().zip(displacement).map(|(a, d)| a + d).collect();
    if let Some((i, a)) = wall_radius.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::DegenerateGeometry(format!("lumen collapses at node {i} (radius {a})")));
    }
    Ok(AxisymGrid {
        wall_radius,
        ..grid.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tube_grid() {
        let g = build_grid(15.0, &[0.647, 0.647], 40, 16, DEFAULT_STRETCH).unwrap();
        assert_eq!(g.wall_radius, vec![0.647; 41]);
        for i in 0..g.n_z {
            for j in 0..g.n_r {
                assert!(g.cell_area(i, j) > 0.0);
            }
        }
        let h: Vec<f64> = g.eta.windows(2).map(|w| w[1] - w[0]).collect();
        for w in h.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio >= 1.0 - 1e-12 && ratio <= 1.2);
        }
    }

    #[test]
    fn bump_profile_is_monotone_per_column() {
        let prof: Vec<f64> = (0..=100)
            .map(|k| {
                let z = 15.0 * k as f64 / 100.0;
                0.647 * (1.0 + (-((z - 7.5) / 2.0).powi(2)).exp())
            })
            .collect();
        let g = build_grid(15.0, &prof, 100, 12, 1.1).unwrap();
        for i in 0..=g.n_z {
            for j in 0..g.n_r {
                assert!(g.node_radius(i, j + 1) > g.node_radius(i, j));
            }
        }
    }

    #[test]
    fn rejects_coarse_or_bad_grids() {
        assert!(build_grid(15.0, &[0.647, 0.647], 40, 4, 1.05).is_err());
        assert!(build_grid(15.0, &[0.647, -0.1], 40, 16, 1.05).is_err());
        assert!(build_grid(15.0, &[0.647, 0.647], 40, 16, 1.3).is_err());
    }

    #[test]
    fn deformation_round_trip() {
        let g = build_grid(15.0, &[0.647, 0.647], 20, 8, 1.05).unwrap();
        assert_eq!(deform_grid(&g, &[0.0; 21]).unwrap(), g);
        let d: Vec<f64> = (0..21).map(|i| 0.3 * (i as f64 * 0.4).sin()).collect();
        let up = deform_grid(&g, &d).unwrap();
        for (a, (b, di)) in up.wall_radius.iter().zip(g.wall_radius.iter().zip(&d)) {
            assert_eq!(*a, b + di);
        }
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        let back = deform_grid(&up, &neg).unwrap();
        for (a, b) in back.wall_radius.iter().zip(&g.wall_radius) {
            assert!((a - b).abs() < 1e-12);
        }
        let scaled = deform_grid(&g, &[0.0647; 21]).unwrap();
        for j in 0..=8 {
            assert!((scaled.node_radius(3, j) - 1.1 * g.node_radius(3, j)).abs() < 1e-15);
        }
        assert!(deform_grid(&g, &[-1.0; 21]).is_err());
    }
}
