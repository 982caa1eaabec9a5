//! Dense symmetric eigendecomposition and the spectral observables built on it.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hamiltonian::{build_tfim, max_abs, HamiltonianMatrix, SpinSystemParams, DEFAULT_SIZE_CAP};
use crate::krylov::{lanczos_lowest, SparseTfim};

/// Gap below which a ground level is reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Spin count from which the two lowest levels at nonzero field come from
/// Lanczos instead of a dense decomposition.
pub const SPARSE_MIN_SPINS: usize = 9;

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = self.eigenvectors.as_ref();
        let gram = v.transpose() * v;
        let dim = self.dim();
        let mut worst = 0.0f64;
        for c in 0..dim {
            for r in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - target).abs());
            }
        }
        worst
    }

    /// `max |A - V diag(lambda) V^T|`.
    pub fn reconstruction_residual(&self, a: MatRef<'_, f64>) -> f64 {
        let v = self.eigenvectors.as_ref();
        let scaled = Mat::from_fn(self.dim(), self.dim(), |r, c| v[(r, c)] * self.eigenvalues[c]);
        let rebuilt = &scaled * v.transpose();
        max_abs((a - &rebuilt).as_ref())
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|r| self.eigenvectors[(r, k)]).collect()
    }
}

fn check_symmetric(a: MatRef<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let scale = max_abs(a).max(1.0);
    for c in 0..a.ncols() {
        for r in (c + 1)..a.nrows() {
            if (a[(r, c)] - a[(c, r)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({r},{c})"
                )));
            }
        }
    }
    Ok(())
}

/// Full eigensystem of a dense real symmetric matrix.
pub fn eigensystem_dense(a: MatRef<'_, f64>) -> Result<Spectrum> {
    check_symmetric(a)?;
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver did not converge: {e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let dim = a.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = Mat::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only.
pub fn eigenvalues_dense(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let mut values = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver did not converge: {e:?}")))?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn eigensystem(h: &HamiltonianMatrix) -> Result<Spectrum> {
    eigensystem_dense(h.matrix())
}

pub fn eigenvalues(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    if h.is_diagonal() {
        let mut d = h.diagonal();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }
    eigenvalues_dense(h.matrix())
}

/// Euclidean distance between the `dn_levels` lowest levels at field `h`
/// and at zero field. Both level lists are sorted independently.
pub fn spectral_deformation_dn(g: &Graph, p: &SpinSystemParams) -> Result<f64> {
    let dim = 1usize.checked_shl(g.n() as u32).unwrap_or(usize::MAX);
    if p.dn_levels == 0 || p.dn_levels > dim {
        return Err(Error::InvalidParameter(format!(
            "dn_levels = {} outside 1..={dim}",
            p.dn_levels
        )));
    }
    let perturbed = lowest_levels(g, p, p.dn_levels)?;
    // zero field: the Hamiltonian is diagonal
    let bare = eigenvalues(&build_tfim(g, &p.with_h(0.0))?)?;
    let sum: f64 = perturbed
        .iter()
        .zip(&bare)
        .take(p.dn_levels)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(sum.sqrt())
}

fn sparse_applies(g: &Graph, p: &SpinSystemParams, k: usize) -> bool {
    g.n() >= SPARSE_MIN_SPINS && p.h != 0.0 && k <= 2
}

/// The `k` lowest eigenvalues of the TFIM on `g`, ascending.
pub fn lowest_levels(g: &Graph, p: &SpinSystemParams, k: usize) -> Result<Vec<f64>> {
    if sparse_applies(g, p, k) {
        let op = SparseTfim::new(g, p, DEFAULT_SIZE_CAP)?;
        match lanczos_lowest(&op, k) {
            Ok(low) => return Ok(low.values[..k].to_vec()),
            Err(e) if e.is_numeric() => {}
            Err(e) => return Err(e),
        }
    }
    let mut values = eigenvalues(&build_tfim(g, p)?)?;
    values.truncate(k);
    Ok(values)
}

/// Ground state of the TFIM on `g`, by Lanczos at large sizes.
pub fn ground_state_of(g: &Graph, p: &SpinSystemParams) -> Result<GroundState> {
    if g.n() > 1 && sparse_applies(g, p, 2) {
        let op = SparseTfim::new(g, p, DEFAULT_SIZE_CAP)?;
        match lanczos_lowest(&op, 2) {
            Ok(low) => {
                let gap = low.values[1] - low.values[0];
                return Ok(GroundState {
                    energy: low.values[0],
                    gap,
                    vector: low.ground_vector,
                    degenerate: gap <= DEGENERACY_TOL,
                });
            }
            Err(e) if e.is_numeric() => {}
            Err(e) => return Err(e),
        }
    }
    ground_state(&build_tfim(g, p)?)
}

/// `E_1 - E_0` of the full spectrum (zero for a degenerate ground level).
pub fn energy_gap(h: &HamiltonianMatrix) -> Result<f64> {
    if h.dim() < 2 {
        return Err(Error::InvalidSize("energy gap needs dimension >= 2".into()));
    }
    let values = eigenvalues(h)?;
    Ok((values[1] - values[0]).max(0.0))
}

/// Lowest eigenvector with its largest-magnitude amplitude made positive.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub gap: f64,
    pub vector: Vec<f64>,
    /// Set when `gap <= DEGENERACY_TOL`; the vector is then one arbitrary
    /// member of the ground eigenspace.
    pub degenerate: bool,
}

pub fn ground_state(h: &HamiltonianMatrix) -> Result<GroundState> {
    let spec = eigensystem(h)?;
    Ok(ground_state_from(&spec))
}

pub fn ground_state_from(spec: &Spectrum) -> GroundState {
    let mut vector = spec.column(0);
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut pivot = 0;
    for (i, x) in vector.iter().enumerate() {
        if x.abs() > vector[pivot].abs() + 1e-14 {
            pivot = i;
        }
    }
    let sign = if vector[pivot] < 0.0 { -1.0 } else { 1.0 };
    for x in &mut vector {
        *x *= sign / norm;
    }
    let gap = if spec.dim() > 1 {
        spec.eigenvalues[1] - spec.eigenvalues[0]
    } else {
        f64::INFINITY
    };
    GroundState {
        energy: spec.eigenvalues[0],
        gap,
        vector,
        degenerate: gap <= DEGENERACY_TOL,
    }
}
