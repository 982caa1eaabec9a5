//! Matrix-free TFIM action and a Lanczos solver for the lowest levels.
//!
//! Used for the ground level and first excitation at sizes where a dense
//! eigendecomposition dominates the run time. For `h != 0` the ground level
//! is non-degenerate (all off-diagonal entries are negative and the bit-flip
//! moves connect every basis state), so the two lowest Ritz values are `E_0`
//! and `E_1` even when `E_1` is degenerate.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hamiltonian::{check_size, effective_coupling, ising_diagonal, SpinSystemParams};
use crate::rng::seeded;
use crate::spectral::eigensystem_dense;

const MAX_ITERATIONS: usize = 400;
const RESIDUAL_TOL: f64 = 1e-12;
const START_SEED: u64 = 0x1a2c_705;

/// `H v` from the Ising diagonal and single bit flips.
#[derive(Debug, Clone)]
pub struct SparseTfim {
    n: usize,
    diag: Vec<f64>,
    h: f64,
}

impl SparseTfim {
    pub fn new(g: &Graph, p: &SpinSystemParams, cap: usize) -> Result<Self> {
        let n = g.n();
        check_size(n, cap)?;
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        p.validate()?;
        Ok(SparseTfim {
            n,
            diag: ising_diagonal(g, effective_coupling(p.j, n, p.scaling)),
            h: p.h,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (b, o) in out.iter_mut().enumerate() {
            let flips: f64 = (0..self.n).map(|bit| v[b ^ (1 << bit)]).sum();
            *o = self.diag[b] * v[b] - self.h * flips;
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowestLevels {
    /// Ascending Ritz values, at least the requested count.
    pub values: Vec<f64>,
    /// Unit ground vector, largest-magnitude amplitude positive.
    pub ground_vector: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lanczos with full reorthogonalization from a fixed pseudo-random start.
/// Fails with a numeric error when the `k` lowest Ritz pairs have not
/// converged within the iteration budget.
pub fn lanczos_lowest(op: &SparseTfim, k: usize) -> Result<LowestLevels> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!("cannot extract {k} levels of dimension {dim}")));
    }
    let mut rng = seeded(START_SEED);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let max_iter = dim.min(MAX_ITERATIONS);
    loop {
        let last = basis.last().expect("non-empty basis");
        op.apply(last, &mut w);
        alphas.push(dot(&w, last));
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let m = alphas.len();
        let scale = alphas.iter().fold(1.0f64, |acc, a| acc.max(a.abs()));
        let exhausted = beta <= 1e-13 * scale;
        if m >= k && (m % 5 == 0 || exhausted || m == max_iter) {
            let t = faer::Mat::from_fn(m, m, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c {
                    betas[r]
                } else if c + 1 == r {
                    betas[c]
                } else {
                    0.0
                }
            });
            let ritz = eigensystem_dense(t.as_ref())?;
            let converged = (0..k).all(|i| {
                (beta * ritz.eigenvectors[(m - 1, i)]).abs()
                    <= RESIDUAL_TOL * ritz.eigenvalues[i].abs().max(1.0)
            });
            if converged || exhausted {
                let mut ground = vec![0.0; dim];
                for (r, q) in basis.iter().enumerate() {
                    let s = ritz.eigenvectors[(r, 0)];
                    ground.iter_mut().zip(q).for_each(|(x, y)| *x += s * y);
                }
                let norm = dot(&ground, &ground).sqrt();
                let pivot = ground
                    .iter()
                    .enumerate()
                    .fold(0, |p, (i, x)| if x.abs() > ground[p].abs() + 1e-14 { i } else { p });
                let sign = if ground[pivot] < 0.0 { -1.0 } else { 1.0 };
                ground.iter_mut().for_each(|x| *x *= sign / norm);
                return Ok(LowestLevels {
                    values: ritz.eigenvalues,
                    ground_vector: ground,
                    iterations: m,
                });
            }
        }
        if m == max_iter {
            return Err(Error::Numeric(format!("Lanczos did not converge in {m} iterations")));
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_connected_init, standard_graph, GraphKind};
    use crate::hamiltonian::{build_tfim, CouplingScaling, DEFAULT_SIZE_CAP};
    use crate::spectral::{eigensystem, ground_state};

    #[test]
    fn action_matches_dense() {
        let g = random_connected_init(5, 3, &mut seeded(2)).unwrap();
        let p = SpinSystemParams::default().with_h(0.3);
        let dense = build_tfim(&g, &p).unwrap();
        let op = SparseTfim::new(&g, &p, DEFAULT_SIZE_CAP).unwrap();
        let v: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut out = vec![0.0; 32];
        op.apply(&v, &mut out);
        for r in 0..32 {
            let want: f64 = (0..32).map(|c| dense.get(r, c) * v[c]).sum();
            assert!((out[r] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn lowest_levels_match_dense() {
        let mut cases = vec![
            standard_graph(GraphKind::Complete, 8).unwrap(),
            standard_graph(GraphKind::Cycle, 8).unwrap(),
            standard_graph(GraphKind::Path, 7).unwrap(),
        ];
        cases.push(random_connected_init(8, 6, &mut seeded(5)).unwrap());
        for scaling in [CouplingScaling::Bare, CouplingScaling::Kac] {
            let p = SpinSystemParams::default().with_scaling(scaling);
            for g in &cases {
                let dense = eigensystem(&build_tfim(g, &p).unwrap()).unwrap();
                let gs = ground_state(&build_tfim(g, &p).unwrap()).unwrap();
                let op = SparseTfim::new(g, &p, DEFAULT_SIZE_CAP).unwrap();
                let low = lanczos_lowest(&op, 2).unwrap();
                for i in 0..2 {
                    assert!((low.values[i] - dense.eigenvalues[i]).abs() < 1e-11, "{g}");
                }
                let overlap: f64 = gs.vector.iter().zip(&low.ground_vector).map(|(a, b)| a * b).sum();
                assert!((overlap - 1.0).abs() < 1e-9, "{g}: overlap {overlap}");
            }
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let g = standard_graph(GraphKind::Path, 2).unwrap();
        let op = SparseTfim::new(&g, &SpinSystemParams::default(), DEFAULT_SIZE_CAP).unwrap();
        assert!(lanczos_lowest(&op, 0).is_err());
        assert!(lanczos_lowest(&op, 5).is_err());
    }
}
