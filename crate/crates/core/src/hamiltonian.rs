//! Dense transverse-field Ising Hamiltonians on graphs.
//!
//! `H = -J_eff * sum_{(i,j) in E} Z_i Z_j - h * sum_i X_i`, assembled in the
//! computational basis described in the crate docs.

use std::fmt;
use std::str::FromStr;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest spin count built without an explicit override (dimension 8192).
pub const DEFAULT_SIZE_CAP: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingScaling {
    /// `J_eff = J / 2`
    Bare,
    /// `J_eff = J / (2N)`
    Kac,
}

impl FromStr for CouplingScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bare" => Ok(CouplingScaling::Bare),
            "kac" => Ok(CouplingScaling::Kac),
            other => Err(Error::InvalidParameter(format!("unknown scaling `{other}`"))),
        }
    }
}

impl fmt::Display for CouplingScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingScaling::Bare => "bare",
            CouplingScaling::Kac => "kac",
        })
    }
}

/// Physical configuration of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSystemParams {
    pub j: f64,
    pub h: f64,
    pub t: f64,
    pub scaling: CouplingScaling,
    /// Number of lowest levels entering the spectral deformation.
    pub dn_levels: usize,
}

impl Default for SpinSystemParams {
    fn default() -> Self {
        SpinSystemParams {
            j: -1.0,
            h: 0.05,
            t: 0.08,
            scaling: CouplingScaling::Bare,
            dn_levels: 2,
        }
    }
}

impl SpinSystemParams {
    pub fn with_h(self, h: f64) -> Self {
        SpinSystemParams { h, ..self }
    }

    pub fn with_t(self, t: f64) -> Self {
        SpinSystemParams { t, ..self }
    }

    pub fn with_scaling(self, scaling: CouplingScaling) -> Self {
        SpinSystemParams { scaling, ..self }
    }

    pub fn beta(&self) -> Result<f64> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive and finite, got {}",
                self.t
            )));
        }
        Ok(1.0 / self.t)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.j.is_finite() || !self.h.is_finite() || self.t.is_nan() || self.t < 0.0 {
            return Err(Error::InvalidParameter(format!("non-physical parameters {self:?}")));
        }
        if self.dn_levels == 0 {
            return Err(Error::InvalidParameter("dn_levels must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn effective_coupling(j: f64, n: usize, scaling: CouplingScaling) -> f64 {
    match scaling {
        CouplingScaling::Bare => j / 2.0,
        CouplingScaling::Kac => j / (2.0 * n as f64),
    }
}

/// Dense real symmetric Hamiltonian of `n_spins` spins.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    n_spins: usize,
    entries: Mat<f64>,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary square matrix; used for tests and external operators.
    pub fn from_dense(n_spins: usize, entries: Mat<f64>) -> Result<Self> {
        let dim = 1usize << n_spins;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: entries.nrows(),
            });
        }
        Ok(HamiltonianMatrix { n_spins, entries })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.entries.as_ref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn is_diagonal(&self) -> bool {
        let dim = self.dim();
        (0..dim).all(|c| (0..dim).all(|r| r == c || self.entries[(r, c)] == 0.0))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.matrix())
    }

    pub fn symmetry_residual(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for c in 0..dim {
            for r in (c + 1)..dim {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)]).abs());
            }
        }
        worst
    }
}

pub(crate) fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            worst = worst.max(m[(r, c)].abs());
        }
    }
    worst
}

pub(crate) fn check_size(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize("need at least one spin".into()));
    }
    if n > cap {
        return Err(Error::SizeCapExceeded { n, cap });
    }
    Ok(())
}

/// `sigma_z` eigenvalue of node `node` in basis state `b`.
#[inline]
pub fn z_value(b: usize, node: usize, n: usize) -> f64 {
    if (b >> (n - 1 - node)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Classical Ising energy `-J_eff * sum z_i z_j` of every basis state.
pub fn ising_diagonal(g: &Graph, j_eff: f64) -> Vec<f64> {
    let n = g.n();
    (0..1usize << n)
        .map(|b| {
            let zz: f64 = g
                .edges()
                .iter()
                .map(|&(u, v)| z_value(b, u, n) * z_value(b, v, n))
                .sum();
            -j_eff * zz
        })
        .collect()
}

pub fn build_tfim(g: &Graph, p: &SpinSystemParams) -> Result<HamiltonianMatrix> {
    build_tfim_with_cap(g, p, DEFAULT_SIZE_CAP)
}

pub fn build_tfim_with_cap(g: &Graph, p: &SpinSystemParams, cap: usize) -> Result<HamiltonianMatrix> {
    let n = g.n();
    check_size(n, cap)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    p.validate()?;
    let dim = 1usize << n;
    let diag = ising_diagonal(g, effective_coupling(p.j, n, p.scaling));
    let mut entries = Mat::<f64>::zeros(dim, dim);
    for b in 0..dim {
        entries[(b, b)] = diag[b];
        if p.h != 0.0 {
            for bit in 0..n {
                entries[(b ^ (1 << bit), b)] = -p.h;
            }
        }
    }
    Ok(HamiltonianMatrix { n_spins: n, entries })
}

/// Dense `M_x = sum_i X_i`.
pub fn collective_mx(n: usize) -> Result<Mat<f64>> {
    collective_mx_with_cap(n, DEFAULT_SIZE_CAP)
}

pub fn collective_mx_with_cap(n: usize, cap: usize) -> Result<Mat<f64>> {
    check_size(n, cap)?;
    let dim = 1usize << n;
    let mut m = Mat::<f64>::zeros(dim, dim);
    for b in 0..dim {
        for bit in 0..n {
            m[(b ^ (1 << bit), b)] = 1.0;
        }
    }
    Ok(m)
}

/// `M_x * A` for a column block `A`, without forming `M_x`.
pub fn apply_mx(n: usize, a: MatRef<'_, f64>) -> Mat<f64> {
    let dim = a.nrows();
    debug_assert_eq!(dim, 1usize << n);
    Mat::from_fn(dim, a.ncols(), |b, c| {
        (0..n).map(|bit| a[(b ^ (1 << bit), c)]).sum()
    })
}

/// `M_x * v` for a vector.
pub fn apply_mx_vec(n: usize, v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|b| (0..n).map(|bit| v[b ^ (1 << bit)]).sum())
        .collect()
}
