//! Named tolerances, collected in one record so every threshold used by the
//! verification pipeline has a single definition and can be overridden by name.

use serde::Serialize;

use crate::{Error, Result};

/// All numerical thresholds used by the library.
///
/// Algebra-level identities are checked at `algebra` (absolute); geometric
/// identities built from analytic jets at the `1e-8`..`1e-10` scale; identities
/// that involve a finite-difference Laplacian at the `1e-4`..`1e-5` scale.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Algebraic identities of the Cayley-Dickson product.
    pub algebra: f64,
    /// Division laws x·a = y solved by a = x⁻¹·y.
    pub division: f64,
    /// Gram matrix of assembled frames vs identity.
    pub frame_gram: f64,
    /// Tangency of chart derivatives: ⟨∂F, F⟩.
    pub chart_tangency: f64,
    /// Unit-norm defect of immersion values.
    pub chart_norm: f64,
    /// Orthogonality of covariant derivatives to the position vector.
    pub covariant_orthogonality: f64,
    /// Preconditions of the Gauss map (unit normal, orthogonal to x and TM).
    pub gauss_precondition: f64,
    /// Normal-connection defect of sections flagged parallel.
    pub parallel_defect: f64,
    /// Mean-curvature norm on minimal entries.
    pub minimality: f64,
    /// Trace of shape operators of hint normals on minimal entries.
    pub traceless: f64,
    /// Symmetry defect of shape-operator matrices.
    pub shape_symmetry: f64,
    /// Commutator norm of shape operators (flat normal bundle witness).
    pub commutator: f64,
    /// Per-node spread of Gram matrices and their eigenvalues.
    pub constancy: f64,
    /// Agreement of σ_j with the directly computed ‖S_{η_j}‖².
    pub sigma_match: f64,
    /// Residual of the eigenvector equation G·c = (cᵀGc)·c.
    pub eigencheck: f64,
    /// Relative L² eigenmap residual ‖Δγ + λγ‖ with the FD Laplacian.
    pub eigenmap_l2: f64,
    /// Pointwise harmonicity defect (component of Δγ orthogonal to γ).
    pub harmonicity: f64,
    /// Pointwise Laplacian-identity residual.
    pub lemma: f64,
    /// Quadrature mean of Gauss-map components, relative to volume.
    pub mean_zero: f64,
    /// Hemisphere margin below which a scan is consistent with the obstruction.
    pub hemisphere_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebra: 1e-12,
            division: 1e-10,
            frame_gram: 1e-10,
            chart_tangency: 1e-10,
            chart_norm: 1e-12,
            covariant_orthogonality: 1e-8,
            gauss_precondition: 1e-8,
            parallel_defect: 1e-8,
            minimality: 1e-8,
            traceless: 1e-8,
            shape_symmetry: 1e-8,
            commutator: 1e-8,
            constancy: 1e-6,
            sigma_match: 1e-8,
            eigencheck: 1e-8,
            eigenmap_l2: 1e-4,
            harmonicity: 1e-4,
            lemma: 1e-4,
            mean_zero: 1e-5,
            hemisphere_margin: 1e-3,
        }
    }
}

impl Tolerances {
    /// Override one tolerance by its field name (used by `--tolerance NAME=VAL`).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "algebra" => &mut self.algebra,
            "division" => &mut self.division,
            "frame_gram" => &mut self.frame_gram,
            "chart_tangency" => &mut self.chart_tangency,
            "chart_norm" => &mut self.chart_norm,
            "covariant_orthogonality" => &mut self.covariant_orthogonality,
            "gauss_precondition" => &mut self.gauss_precondition,
            "parallel_defect" => &mut self.parallel_defect,
            "minimality" => &mut self.minimality,
            "traceless" => &mut self.traceless,
            "shape_symmetry" => &mut self.shape_symmetry,
            "commutator" => &mut self.commutator,
            "constancy" => &mut self.constancy,
            "sigma_match" => &mut self.sigma_match,
            "eigencheck" => &mut self.eigencheck,
            "eigenmap_l2" => &mut self.eigenmap_l2,
            "harmonicity" => &mut self.harmonicity,
            "lemma" => &mut self.lemma,
            "mean_zero" => &mut self.mean_zero,
            "hemisphere_margin" => &mut self.hemisphere_margin,
            _ => return Err(Error::UnknownTolerance(name.to_string())),
        };
        *slot = value;
        Ok(())
    }
}

/// Default finite-difference step in chart coordinates.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Node-count cap; grids of high-dimensional charts are coarsened to stay under it.
pub const NODE_CAP: usize = 200_000;
