//! Gibbs-state observables: partition function, Fisher information for the
//! transverse field via the symmetric logarithmic derivative, transverse
//! susceptibility and magnetization fluctuations.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hamiltonian::{apply_mx, build_tfim, SpinSystemParams};
use crate::spectral::{eigensystem, eigenvalues, Spectrum};

/// Below this `|g_j - g_k|` the kernel `tanh(x/2)/(x/2)` takes its limit 1.
pub const KERNEL_DEGENERACY_TOL: f64 = 1e-12;

pub const DEFAULT_CHI_STEP: f64 = 1e-4;
pub const DEFAULT_FIDELITY_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    pub probabilities: Vec<f64>,
    pub log_partition: f64,
    pub beta: f64,
}

impl GibbsEnsemble {
    /// `g_j = ln p_j = -beta E_j - ln Z`.
    pub fn log_weights(&self, energies: &[f64]) -> Vec<f64> {
        energies
            .iter()
            .map(|e| -self.beta * e - self.log_partition)
            .collect()
    }
}

fn beta_of(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive and finite, got {t}"
        )));
    }
    Ok(1.0 / t)
}

/// Max-shifted Boltzmann weights; `energies` need not be sorted.
pub fn gibbs_from_energies(energies: &[f64], t: f64) -> Result<GibbsEnsemble> {
    let beta = beta_of(t)?;
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let sum: f64 = weights.iter().sum();
    Ok(GibbsEnsemble {
        probabilities: weights.iter().map(|w| w / sum).collect(),
        log_partition: -beta * e_min + sum.ln(),
        beta,
    })
}

pub fn gibbs_weights(spec: &Spectrum, t: f64) -> Result<GibbsEnsemble> {
    gibbs_from_energies(&spec.eigenvalues, t)
}

pub fn log_partition(g: &Graph, p: &SpinSystemParams) -> Result<f64> {
    let beta = p.beta()?;
    let values = eigenvalues(&build_tfim(g, p)?)?;
    Ok(gibbs_from_energies(&values, 1.0 / beta)?.log_partition)
}

/// Fisher information for `h` with its population (diagonal) and
/// coherence (off-diagonal) contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiValue {
    pub value: f64,
    pub classical: f64,
    pub coherent: f64,
}

#[inline]
fn sld_kernel(delta_g: f64) -> f64 {
    if delta_g.abs() < KERNEL_DEGENERACY_TOL {
        1.0
    } else {
        let x = 0.5 * delta_g;
        x.tanh() / x
    }
}

/// `X = dH/dh = -M_x` expressed in the eigenbasis of `spec`.
pub fn field_derivative_in_eigenbasis(n: usize, spec: &Spectrum) -> Mat<f64> {
    let v = spec.eigenvectors.as_ref();
    let mx_v = apply_mx(n, v);
    let x = v.transpose() * &mx_v;
    Mat::from_fn(x.nrows(), x.ncols(), |r, c| -x[(r, c)])
}

/// SLD Fisher information of the Gibbs state built from `spec`.
pub fn thermal_qfi_from_spectrum(n: usize, spec: &Spectrum, t: f64) -> Result<QfiValue> {
    let ens = gibbs_weights(spec, t)?;
    let beta = ens.beta;
    let p = &ens.probabilities;
    let x = field_derivative_in_eigenbasis(n, spec);
    let dim = spec.dim();
    let mean_x: f64 = (0..dim).map(|m| p[m] * x[(m, m)]).sum();

    let mut classical = 0.0;
    let mut coherent = 0.0;
    for j in 0..dim {
        let gdot = -beta * (x[(j, j)] - mean_x);
        classical += p[j] * gdot * gdot;
        let mut row = 0.0;
        for k in 0..dim {
            if k == j {
                continue;
            }
            let delta_g = -beta * (spec.eigenvalues[j] - spec.eigenvalues[k]);
            let l = sld_kernel(delta_g) * (-beta * x[(j, k)]);
            row += l * l;
        }
        coherent += p[j] * row;
    }
    let value = classical + coherent;
    if !value.is_finite() {
        return Err(Error::Numeric("non-finite Fisher information".into()));
    }
    Ok(QfiValue {
        value,
        classical,
        coherent,
    })
}

pub fn thermal_qfi_sld(g: &Graph, p: &SpinSystemParams) -> Result<QfiValue> {
    beta_of(p.t)?;
    let spec = eigensystem(&build_tfim(g, p)?)?;
    thermal_qfi_from_spectrum(g.n(), &spec, p.t)
}

/// Fisher information from the curvature of the Uhlmann fidelity between
/// Gibbs states at `h - step/2` and `h + step/2`: `8 (1 - sqrt F) / step^2`.
///
/// `sqrt F` is evaluated as the nuclear norm of `sqrt(rho1) sqrt(rho2)`,
/// i.e. the singular values of `diag(sqrt p1) V1^T V2 diag(sqrt p2)`.
pub fn fidelity_qfi_oracle(g: &Graph, p: &SpinSystemParams, step: f64) -> Result<f64> {
    if step == 0.0 || !step.is_finite() {
        return Err(Error::InvalidParameter("fidelity step must be non-zero".into()));
    }
    beta_of(p.t)?;
    let lo = eigensystem(&build_tfim(g, &p.with_h(p.h - 0.5 * step))?)?;
    let hi = eigensystem(&build_tfim(g, &p.with_h(p.h + 0.5 * step))?)?;
    let root_fidelity = root_fidelity(&lo, &hi, p.t)?;
    Ok(8.0 * (1.0 - root_fidelity) / (step * step))
}

/// `sqrt F(rho1, rho2) = Tr |sqrt(rho1) sqrt(rho2)|` for two Gibbs states.
pub fn root_fidelity(a: &Spectrum, b: &Spectrum, t: f64) -> Result<f64> {
    let pa = gibbs_weights(a, t)?.probabilities;
    let pb = gibbs_weights(b, t)?.probabilities;
    let overlap = a.eigenvectors.transpose() * &b.eigenvectors;
    let m = Mat::from_fn(a.dim(), b.dim(), |r, c| {
        pa[r].sqrt() * overlap[(r, c)] * pb[c].sqrt()
    });
    let sv = m
        .singular_values()
        .map_err(|e| Error::Numeric(format!("singular values did not converge: {e:?}")))?;
    Ok(sv.iter().sum())
}

/// Zero-temperature limit of the field Fisher information for a
/// non-degenerate ground state: `4 sum_k |<k|M_x|0>|^2 / (E_k - E_0)^2`.
pub fn pure_state_field_qfi(n: usize, spec: &Spectrum) -> f64 {
    let x = field_derivative_in_eigenbasis(n, spec);
    let e0 = spec.eigenvalues[0];
    (1..spec.dim())
        .map(|k| 4.0 * x[(k, 0)].powi(2) / (spec.eigenvalues[k] - e0).powi(2))
        .sum()
}

/// `chi_x = (1 / (N beta)) d^2 ln Z / dh^2` by a central second difference.
pub fn susceptibility_chi_x(g: &Graph, p: &SpinSystemParams, step: f64) -> Result<f64> {
    let beta = p.beta()?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("susceptibility step must be positive".into()));
    }
    let up = log_partition(g, &p.with_h(p.h + step))?;
    let mid = log_partition(g, p)?;
    let down = log_partition(g, &p.with_h(p.h - step))?;
    let curvature = (up - 2.0 * mid + down) / (step * step);
    Ok(curvature / (g.n() as f64 * beta))
}

/// Direct thermal variance of `M_x` alongside the fluctuation-dissipation
/// estimate `(N / beta) chi_x`, which is exact only when `[H, M_x] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationVariance {
    pub mean_mx: f64,
    pub mean_mx2: f64,
    pub direct: f64,
    pub chi_x: f64,
    pub fdt_estimate: f64,
    pub relative_deviation: f64,
}

/// `(<M_x>, <M_x^2>)` in the Gibbs state of `spec`.
pub fn thermal_mx_moments(n: usize, spec: &Spectrum, t: f64) -> Result<(f64, f64)> {
    let ens = gibbs_weights(spec, t)?;
    let v = spec.eigenvectors.as_ref();
    let w = apply_mx(n, v);
    let dim = spec.dim();
    let mut mean = 0.0;
    let mut sq = 0.0;
    for j in 0..dim {
        let mut vw = 0.0;
        let mut ww = 0.0;
        for r in 0..dim {
            vw += v[(r, j)] * w[(r, j)];
            ww += w[(r, j)] * w[(r, j)];
        }
        mean += ens.probabilities[j] * vw;
        sq += ens.probabilities[j] * ww;
    }
    Ok((mean, sq))
}

pub fn magnetization_variance(
    g: &Graph,
    p: &SpinSystemParams,
    chi_step: f64,
) -> Result<MagnetizationVariance> {
    let beta = p.beta()?;
    let spec = eigensystem(&build_tfim(g, p)?)?;
    let (mean_mx, mean_mx2) = thermal_mx_moments(g.n(), &spec, p.t)?;
    let direct = (mean_mx2 - mean_mx * mean_mx).max(0.0);
    let chi_x = susceptibility_chi_x(g, p, chi_step)?;
    let fdt_estimate = g.n() as f64 / beta * chi_x;
    let relative_deviation = if direct > 0.0 {
        (fdt_estimate - direct).abs() / direct
    } else {
        fdt_estimate.abs()
    };
    Ok(MagnetizationVariance {
        mean_mx,
        mean_mx2,
        direct,
        chi_x,
        fdt_estimate,
        relative_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_connected_init, standard_graph, GraphKind};
    use crate::hamiltonian::CouplingScaling;
    use crate::rng::seeded;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn single_spin() -> Graph {
        Graph::new(1, []).unwrap()
    }

    fn sech2(x: f64) -> f64 {
        1.0 / x.cosh().powi(2)
    }

    #[test]
    fn gibbs_examples() {
        let e = gibbs_from_energies(&[0.3; 5], 0.5).unwrap();
        assert!(e.probabilities.iter().all(|p| (p - 0.2).abs() < 1e-15));

        let e = gibbs_from_energies(&[-0.05, 0.05], 0.08).unwrap();
        let c = 2.0 * 0.625f64.cosh();
        assert!((e.probabilities[0] - 0.625f64.exp() / c).abs() < 1e-14);
        assert!((e.probabilities[0] - 0.7773).abs() < 5e-4);
        assert!((e.probabilities[1] - 0.2227).abs() < 5e-4);
        assert!((e.log_partition - c.ln()).abs() < 1e-14);

        let e = gibbs_from_energies(&[-3.0, -1.0, 0.5, 2.0], 1e6).unwrap();
        assert!(e.probabilities.iter().all(|p| (p - 0.25).abs() < 1e-5));
        assert!(gibbs_from_energies(&[0.0], 0.0).is_err());
        assert!(gibbs_from_energies(&[0.0], -1.0).is_err());
    }

    #[test]
    fn log_partition_survives_low_temperature() {
        let g = standard_graph(GraphKind::Complete, 8).unwrap();
        let p = SpinSystemParams::default().with_t(1e-3);
        assert!(log_partition(&g, &p).unwrap().is_finite());
    }

    #[test]
    fn single_spin_qfi() {
        let p = SpinSystemParams::default();
        let beta: f64 = 12.5;
        let want = beta * beta * sech2(beta * 0.05);
        assert!((want - 108.19).abs() < 0.01);
        let q = thermal_qfi_sld(&single_spin(), &p).unwrap();
        assert!(rel(q.value, want) < 1e-12);
        assert!(q.coherent.abs() < 1e-20);
        let oracle = fidelity_qfi_oracle(&single_spin(), &p, DEFAULT_FIDELITY_STEP).unwrap();
        assert!(rel(oracle, want) < 1e-3, "oracle {oracle}");
    }

    #[test]
    fn high_temperature_suppresses_qfi() {
        let g = standard_graph(GraphKind::Complete, 4).unwrap();
        let q = thermal_qfi_sld(&g, &SpinSystemParams::default().with_t(1e4)).unwrap();
        assert!(q.value < 1e-4);
        assert!((q.value - q.classical - q.coherent).abs() <= 1e-9 * q.value.max(1e-300));
    }

    #[test]
    fn oracle_matches_population_fisher_when_eigenbasis_is_fixed() {
        // J = 0: H = -h M_x, eigenvectors independent of h, so only
        // populations move; classical Fisher of two-level populations.
        let g = standard_graph(GraphKind::Path, 3).unwrap();
        let mut p = SpinSystemParams::default().with_t(0.5);
        p.j = 0.0;
        let beta = 2.0;
        // three independent spins: 3 beta^2 sech^2(beta h)
        let want = 3.0 * beta * beta * sech2(beta * p.h);
        let oracle = fidelity_qfi_oracle(&g, &p, DEFAULT_FIDELITY_STEP).unwrap();
        assert!(rel(oracle, want) < 5e-3, "{oracle} vs {want}");
        let sld = thermal_qfi_sld(&g, &p).unwrap();
        assert!(rel(sld.value, want) < 1e-9);
    }

    #[test]
    fn oracle_vanishes_at_infinite_temperature() {
        let g = standard_graph(GraphKind::Path, 3).unwrap();
        let p = SpinSystemParams::default().with_t(1e8);
        assert!(fidelity_qfi_oracle(&g, &p, 1e-3).unwrap().abs() < 1e-6);
        assert!(fidelity_qfi_oracle(&g, &p, 0.0).is_err());
    }

    #[test]
    fn sld_matches_fidelity_oracle_on_single_edge() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let p = SpinSystemParams::default();
        let sld = thermal_qfi_sld(&g, &p).unwrap().value;
        let oracle = fidelity_qfi_oracle(&g, &p, DEFAULT_FIDELITY_STEP).unwrap();
        assert!(rel(sld, oracle) < 1e-3, "{sld} vs {oracle}");
    }

    #[test]
    fn sld_matches_oracle_on_random_graphs() {
        for seed in 0..6u64 {
            let n = 2 + (seed as usize % 4);
            let g = random_connected_init(n, n, &mut seeded(seed)).unwrap();
            for t in [0.08, 0.5, 2.0] {
                let p = SpinSystemParams::default().with_t(t);
                let sld = thermal_qfi_sld(&g, &p).unwrap().value;
                let oracle = fidelity_qfi_oracle(&g, &p, DEFAULT_FIDELITY_STEP).unwrap();
                assert!(rel(sld, oracle) < 1e-3, "{g} T={t}: {sld} vs {oracle}");
            }
        }
    }

    #[test]
    fn low_temperature_limit_is_pure_state_value() {
        for n in [2, 3, 5] {
            let g = standard_graph(GraphKind::Path, n).unwrap();
            let p = SpinSystemParams::default().with_t(0.01);
            let spec = eigensystem(&build_tfim(&g, &p).unwrap()).unwrap();
            if spec.eigenvalues[1] - spec.eigenvalues[0] < 0.1 {
                continue;
            }
            let pure = pure_state_field_qfi(n, &spec);
            let q = thermal_qfi_sld(&g, &p).unwrap().value;
            assert!(rel(q, pure) < 1e-2, "n={n}: {q} vs {pure}");
        }
    }

    #[test]
    fn qfi_relabel_invariant_and_continuous() {
        let g = random_connected_init(5, 4, &mut seeded(11)).unwrap();
        let gp = g.permuted(&[4, 2, 0, 1, 3]).unwrap();
        let p = SpinSystemParams::default().with_t(0.5);
        let a = thermal_qfi_sld(&g, &p).unwrap().value;
        let b = thermal_qfi_sld(&gp, &p).unwrap().value;
        assert!(rel(a, b) < 1e-9);
        let c = thermal_qfi_sld(&g, &p.with_t(0.5005)).unwrap().value;
        assert!(rel(c, a) < 1e-2);
    }

    #[test]
    fn susceptibility_examples() {
        let p = SpinSystemParams::default().with_t(1.5);
        let beta = 1.0 / 1.5;
        let chi = susceptibility_chi_x(&single_spin(), &p, DEFAULT_CHI_STEP).unwrap();
        let want = beta * sech2(beta * 0.05);
        assert!((want - 0.665927).abs() < 1e-6);
        assert!(rel(chi, want) < 1e-6, "{chi} vs {want}");

        let chi0 = susceptibility_chi_x(&single_spin(), &p.with_h(0.0), DEFAULT_CHI_STEP).unwrap();
        assert!(rel(chi0, beta) < 1e-6);

        let mut free = p;
        free.j = 0.0;
        let g = standard_graph(GraphKind::Cycle, 4).unwrap();
        let chi4 = susceptibility_chi_x(&g, &free, DEFAULT_CHI_STEP).unwrap();
        assert!(rel(chi4, want) < 1e-6);
    }

    #[test]
    fn variance_examples() {
        for t in [0.08, 1.5] {
            let p = SpinSystemParams::default().with_t(t);
            let mv = magnetization_variance(&single_spin(), &p, DEFAULT_CHI_STEP).unwrap();
            let want = sech2(0.05 / t);
            assert!(rel(mv.direct, want) < 1e-12);
            assert!(mv.relative_deviation <= 1e-6, "{mv:?}");
        }

        let k5 = standard_graph(GraphKind::Complete, 5).unwrap();
        let hot = magnetization_variance(&k5, &SpinSystemParams::default().with_t(1e4), DEFAULT_CHI_STEP)
            .unwrap();
        assert!((hot.direct - 5.0).abs() < 1e-3);

        let p = SpinSystemParams::default().with_h(0.0).with_t(0.3);
        let mv = magnetization_variance(&k5, &p, DEFAULT_CHI_STEP).unwrap();
        assert!(mv.mean_mx.abs() < 1e-12);
        assert!((mv.direct - mv.mean_mx2).abs() < 1e-12);
    }

    #[test]
    fn fdt_exact_for_free_spins() {
        let mut p = SpinSystemParams::default().with_t(0.4);
        p.j = 0.0;
        let g = standard_graph(GraphKind::Path, 4).unwrap();
        let mv = magnetization_variance(&g, &p, DEFAULT_CHI_STEP).unwrap();
        assert!(mv.relative_deviation <= 1e-6, "{mv:?}");
    }

    #[test]
    fn kac_scaling_runs() {
        let g = standard_graph(GraphKind::Complete, 5).unwrap();
        let p = SpinSystemParams::default().with_scaling(CouplingScaling::Kac);
        assert!(thermal_qfi_sld(&g, &p).unwrap().value > 0.0);
    }
}
