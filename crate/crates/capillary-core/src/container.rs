//! Container geometry: the rigid walls the drop attaches to.
//!
//! Three container kinds are supported. Planar walls (half-space, wedge)
//! pass through the origin with unit normals pointing *out of* the fluid
//! domain; the ball is the unit ball centred at the origin. Each wall facet
//! carries a relative adhesion coefficient `β ∈ (-1, 1)`; the equilibrium
//! contact angle on that facet is `θ = arccos β`.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use crate::Vec3;

/// Geometry tolerance for unit-norm and containment checks.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContainerError {
    #[error("facet normal must be unit length (|n| = {0})")]
    NonUnitNormal(f64),
    #[error("wedge normals must be linearly independent (Gram determinant {0})")]
    DependentNormals(f64),
    #[error("adhesion coefficient must satisfy |beta| < 1 (got {0})")]
    BetaOutOfRange(f64),
    #[error("expected {expected} adhesion coefficients, got {got}")]
    BetaCountMismatch { expected: usize, got: usize },
    #[error("a wedge needs at least one plane")]
    NoFacets,
    #[error("operation requires a {required} container")]
    WrongKind { required: &'static str },
}

/// Which family of walls bounds the fluid domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainerKind {
    HalfSpace,
    Wedge,
    Ball,
}

/// A container with per-facet adhesion coefficients.
///
/// For planar containers the fluid domain is `{ x : <x, n_i> < 0 for all i }`;
/// for the ball it is `{ |x| < 1 }`. Facet `i` of the ball is the unit sphere
/// itself (there is exactly one facet).
#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    kind: ContainerKind,
    normals: Vec<Vec3>,
    betas: Vec<f64>,
}

impl Container {
    /// Half-space bounded by the plane through the origin with outward unit
    /// normal `normal` (pointing out of the fluid domain).
    pub fn half_space(normal: Vec3, beta: f64) -> Result<Self, ContainerError> {
        Self::validated(ContainerKind::HalfSpace, alloc::vec![normal], alloc::vec![beta])
    }

    /// Canonical half-space `{ z > 0 }` with the floor `z = 0`.
    pub fn floor(beta: f64) -> Result<Self, ContainerError> {
        Self::half_space(Vec3::new(0.0, 0.0, -1.0), beta)
    }

    /// Wedge bounded by planes through the origin with the given outward
    /// unit normals. The normals must be linearly independent.
    pub fn wedge(normals: Vec<Vec3>, betas: Vec<f64>) -> Result<Self, ContainerError> {
        if normals.is_empty() {
            return Err(ContainerError::NoFacets);
        }
        let kind = if normals.len() == 1 {
            ContainerKind::HalfSpace
        } else {
            ContainerKind::Wedge
        };
        Self::validated(kind, normals, betas)
    }

    /// The unit ball centred at the origin.
    pub fn unit_ball(beta: f64) -> Result<Self, ContainerError> {
        Self::validated(ContainerKind::Ball, alloc::vec![Vec3::zeros()], alloc::vec![beta])
    }

    fn validated(
        kind: ContainerKind,
        normals: Vec<Vec3>,
        betas: Vec<f64>,
    ) -> Result<Self, ContainerError> {
        if betas.len() != normals.len() {
            return Err(ContainerError::BetaCountMismatch {
                expected: normals.len(),
                got: betas.len(),
            });
        }
        for &b in &betas {
            if !(b.abs() < 1.0) {
                return Err(ContainerError::BetaOutOfRange(b));
            }
        }
        if kind != ContainerKind::Ball {
            for n in &normals {
                if (n.norm() - 1.0).abs() > GEOM_TOL {
                    return Err(ContainerError::NonUnitNormal(n.norm()));
                }
            }
            let g = gram(&normals);
            let det = det_small(&g);
            if det.abs() < 1e-12 {
                return Err(ContainerError::DependentNormals(det));
            }
        }
        Ok(Self { kind, normals, betas })
    }

    pub fn kind(&self) -> ContainerKind {
        self.kind
    }

    pub fn facet_count(&self) -> usize {
        match self.kind {
            ContainerKind::Ball => 1,
            _ => self.normals.len(),
        }
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn beta(&self, facet: usize) -> f64 {
        self.betas[facet]
    }

    /// Prescribed contact angle `arccos β` on a facet.
    pub fn contact_angle(&self, facet: usize) -> f64 {
        self.betas[facet].acos()
    }

    /// Planar facet normals (empty for the ball).
    pub fn plane_normals(&self) -> &[Vec3] {
        match self.kind {
            ContainerKind::Ball => &[],
            _ => &self.normals,
        }
    }

    /// Signed distance of `x` from facet `facet`; negative inside the fluid
    /// domain, zero on the wall.
    pub fn signed_offset(&self, facet: usize, x: &Vec3) -> f64 {
        match self.kind {
            ContainerKind::Ball => x.norm() - 1.0,
            _ => self.normals[facet].dot(x),
        }
    }

    /// Outward wall normal at a point of facet `facet` (the field N̄).
    pub fn wall_normal(&self, facet: usize, x: &Vec3) -> Vec3 {
        match self.kind {
            ContainerKind::Ball => {
                let n = x.norm();
                if n == 0.0 {
                    Vec3::zeros()
                } else {
                    x / n
                }
            }
            _ => self.normals[facet],
        }
    }

    /// Normal curvature of the wall in a tangent direction, with respect to
    /// the inward normal. Zero on planes, `+1` on the unit sphere.
    pub fn wall_normal_curvature(&self) -> f64 {
        match self.kind {
            ContainerKind::Ball => 1.0,
            _ => 0.0,
        }
    }

    /// Snap `x` onto the wall facet (orthogonal projection for planes,
    /// radial projection for the ball).
    pub fn project_to_facet(&self, facet: usize, x: &Vec3) -> Vec3 {
        match self.kind {
            ContainerKind::Ball => {
                let n = x.norm();
                if n == 0.0 {
                    *x
                } else {
                    x / n
                }
            }
            _ => x - self.normals[facet] * self.normals[facet].dot(x),
        }
    }

    /// Remove from `v` the components normal to every facet in `facets`,
    /// evaluated at the point `x`. Used to keep constrained vertices sliding
    /// on their walls.
    pub fn tangent_project(&self, facets: &[u32], x: &Vec3, v: &Vec3) -> Vec3 {
        let mut out = *v;
        for &f in facets {
            let n = self.wall_normal(f as usize, x);
            out -= n * n.dot(&out);
        }
        // A second pass makes the result orthogonal to non-orthogonal facet
        // pairs (wedge edges) to machine precision.
        if facets.len() > 1 {
            for _ in 0..2 {
                for &f in facets {
                    let n = self.wall_normal(f as usize, x);
                    out -= n * n.dot(&out);
                }
            }
        }
        out
    }

    /// Gram matrix `G_ij = <n_i, n_j>` of the planar facet normals.
    pub fn gram(&self) -> Result<Vec<Vec<f64>>, ContainerError> {
        match self.kind {
            ContainerKind::Ball => Err(ContainerError::WrongKind { required: "planar" }),
            _ => Ok(gram(&self.normals)),
        }
    }

    /// True if `x` lies inside the fluid domain within `tol`.
    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        match self.kind {
            ContainerKind::Ball => x.norm() <= 1.0 + tol,
            _ => self
                .normals
                .iter()
                .all(|n| n.dot(x) <= tol),
        }
    }
}

fn gram(normals: &[Vec3]) -> Vec<Vec<f64>> {
    let l = normals.len();
    let mut g = alloc::vec![alloc::vec![0.0; l]; l];
    for i in 0..l {
        for j in 0..l {
            g[i][j] = normals[i].dot(&normals[j]);
        }
    }
    g
}

fn det_small(g: &[Vec<f64>]) -> f64 {
    match g.len() {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
        _ => 0.0,
    }
}

/// Solve the small SPD system `G c = b` by Cholesky. Panics if `G` is not
/// positive definite; callers validate independence first.
pub(crate) fn solve_spd_small(g: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut l = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}
