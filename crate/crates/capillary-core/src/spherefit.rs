//! Least-squares sphere fitting with a flat fallback.
//!
//! An algebraic fit (linear least squares on `|x|² - 2<c,x> + |c|² - r²`)
//! seeds a geometric Gauss-Newton refinement of `Σ (|x_i - c| - r)²`. When
//! the fitted radius exceeds 1000× the point-cloud diameter the verdict is
//! "flat" and a total-least-squares plane is fitted instead.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use crate::container::solve_spd_small;
use crate::eigen::jacobi_eigen;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least {0} points for a sphere fit")]
    TooFewPoints(usize),
    #[error("point set is rank deficient (planar/collinear input for a sphere)")]
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct SphereFit {
    pub center: Vec3,
    pub radius: f64,
    /// RMS orthogonal deviation, normalized by the radius (or the diameter
    /// for flat verdicts).
    pub rms: f64,
    pub is_flat: bool,
    /// Fitted plane `(point, unit normal)` when flat.
    pub plane: Option<(Vec3, Vec3)>,
}

/// Fit a sphere (or detect a plane) through a point cloud.
pub fn fit_sphere(points: &[Vec3]) -> Result<SphereFit, FitError> {
    if points.len() < 10 {
        return Err(FitError::TooFewPoints(10));
    }
    let centroid = points.iter().sum::<Vec3>() / points.len() as f64;
    let diameter = points
        .iter()
        .map(|p| (p - centroid).norm())
        .fold(0.0f64, f64::max)
        * 2.0;
    if diameter <= 0.0 {
        return Err(FitError::Degenerate);
    }

    // Algebraic fit: |x|² = 2<c,x> + (r² - |c|²) =: 2<c,x> + t.
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for p in points {
        let d = p - centroid; // center the data for conditioning
        let row = [2.0 * d.x, 2.0 * d.y, 2.0 * d.z, 1.0];
        let b = d.norm_squared();
        for r in 0..4 {
            for c in 0..4 {
                ata[r][c] += row[r] * row[c];
            }
            atb[r] += row[r] * b;
        }
    }
    // Rank check via the smallest eigenvalue of the scatter block.
    let scatter: Vec<Vec<f64>> = (0..3)
        .map(|r| (0..3).map(|c| ata[r][c] / 4.0).collect())
        .collect();
    let (evals, evecs) = jacobi_eigen(&scatter);
    let (min_idx, min_eval) = evals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let max_eval = evals.iter().cloned().fold(f64::MIN, f64::max);
    if max_eval <= 0.0 {
        return Err(FitError::Degenerate);
    }

    let g: Vec<Vec<f64>> = ata.iter().map(|r| r.to_vec()).collect();
    let sol = solve_spd_small(&g, &atb);
    let mut center = centroid + Vec3::new(sol[0], sol[1], sol[2]);
    let mut radius = (sol[3] + Vec3::new(sol[0], sol[1], sol[2]).norm_squared()).max(0.0).sqrt();

    // Nearly planar input: the algebraic system is ill-posed along the
    // plane normal; go straight to the flat verdict.
    let planar_input = min_eval < 1e-9 * max_eval || !radius.is_finite() || radius > 1e3 * diameter;

    if !planar_input {
        // Gauss-Newton on (c, r): residual |x - c| - r.
        for _ in 0..30 {
            let mut jtj = [[0.0f64; 4]; 4];
            let mut jtr = [0.0f64; 4];
            for p in points {
                let d = p - center;
                let dist = d.norm().max(1e-300);
                let u = d / dist;
                let row = [-u.x, -u.y, -u.z, -1.0];
                let res = dist - radius;
                for r in 0..4 {
                    for c in 0..4 {
                        jtj[r][c] += row[r] * row[c];
                    }
                    jtr[r] += row[r] * res;
                }
            }
            for r in 0..4 {
                jtj[r][r] += 1e-14;
            }
            let g: Vec<Vec<f64>> = jtj.iter().map(|r| r.to_vec()).collect();
            let step = solve_spd_small(&g, &jtr);
            center -= Vec3::new(step[0], step[1], step[2]);
            radius -= step[3];
            if step.iter().map(|s| s * s).sum::<f64>().sqrt() < 1e-14 * (1.0 + radius) {
                break;
            }
        }
    }

    if planar_input || !radius.is_finite() || !center.iter().all(|c| c.is_finite()) || radius > 1e3 * diameter {
        let normal = Vec3::new(evecs[0][min_idx], evecs[1][min_idx], evecs[2][min_idx]).normalize();
        let rms = (points
            .iter()
            .map(|p| {
                let d = (p - centroid).dot(&normal);
                d * d
            })
            .sum::<f64>()
            / points.len() as f64)
            .sqrt();
        return Ok(SphereFit {
            center: centroid,
            radius: f64::INFINITY,
            rms: rms / diameter,
            is_flat: true,
            plane: Some((centroid, normal)),
        });
    }

    let rms = (points
        .iter()
        .map(|p| {
            let d = (p - center).norm() - radius;
            d * d
        })
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    Ok(SphereFit { center, radius, rms: rms / radius, is_flat: false, plane: None })
}
