//! Spin-coherent-state phase space: Husimi Q grids, equatorial overlap
//! profiles and Husimi-integral estimates of `<S_x>`.
//!
//! Coherent states are products of `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`,
//! so the overlap with any state only depends on its Hamming-weight sums
//! `W_k = sum_{popcount(b) = k} psi_b`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{check_size, DEFAULT_SIZE_CAP};

pub const DEFAULT_THETA_SAMPLES: usize = 181;
pub const DEFAULT_PHI_SAMPLES: usize = 361;

pub fn to_complex(state: &[f64]) -> Vec<Complex64> {
    state.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn spins_of(state: &[Complex64]) -> Result<usize> {
    let len = state.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidSize(format!("state length {len} is not 2^n")));
    }
    Ok(len.trailing_zeros() as usize)
}

fn check_unit(state: &[Complex64]) -> Result<()> {
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("state norm {norm} is not 1")));
    }
    Ok(())
}

pub fn spin_coherent_state(n: usize, theta: f64, phi: f64) -> Result<Vec<Complex64>> {
    check_size(n, DEFAULT_SIZE_CAP)?;
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let phase = Complex64::from_polar(1.0, phi);
    let per_weight: Vec<Complex64> = (0..=n)
        .map(|k| phase.powu(k as u32) * c.powi((n - k) as i32) * s.powi(k as i32))
        .collect();
    Ok((0..1usize << n)
        .map(|b| per_weight[b.count_ones() as usize])
        .collect())
}

fn weight_sums(state: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(0.0, 0.0); n + 1];
    for (b, z) in state.iter().enumerate() {
        w[b.count_ones() as usize] += z;
    }
    w
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Squared norm of the projection onto the permutation-symmetric subspace.
pub fn symmetric_weight(state: &[Complex64]) -> Result<f64> {
    let n = spins_of(state)?;
    Ok(weight_sums(state, n)
        .iter()
        .enumerate()
        .map(|(k, w)| w.norm_sqr() / binomial(n, k))
        .sum())
}

/// `<theta, phi | psi>` from precomputed weight sums.
fn overlap(weights: &[Complex64], theta: f64, phi: f64) -> Complex64 {
    let n = weights.len() - 1;
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let conj_phase = Complex64::from_polar(1.0, -phi);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut ph = Complex64::new(1.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        acc += ph * c.powi((n - k) as i32) * s.powi(k as i32) * w;
        ph *= conj_phase;
    }
    acc
}

fn uniform(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

fn trapezoid_weights(samples: &[f64]) -> Vec<f64> {
    let step = samples[1] - samples[0];
    let last = samples.len() - 1;
    (0..samples.len())
        .map(|i| if i == 0 || i == last { 0.5 * step } else { step })
        .collect()
}

/// `Q(theta, phi) = |<theta, phi | psi>|^2 / pi` on a uniform product grid
/// with endpoints; `q[i][j]` belongs to `(theta[i], phi[j])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HusimiGrid {
    pub n_spins: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub q: Vec<Vec<f64>>,
}

impl HusimiGrid {
    /// Trapezoid quadrature of `f(theta, phi) * Q * sin(theta)` over the sphere.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let wt = trapezoid_weights(&self.theta);
        let wp = trapezoid_weights(&self.phi);
        let mut total = 0.0;
        for (i, &t) in self.theta.iter().enumerate() {
            let mut row = 0.0;
            for (j, &p) in self.phi.iter().enumerate() {
                row += wp[j] * f(t, p) * self.q[i][j];
            }
            total += wt[i] * t.sin() * row;
        }
        total
    }

    /// `int int Q sin(theta) dtheta dphi`; `4 / (N + 1)` for symmetric states.
    pub fn normalization(&self) -> f64 {
        self.integrate(|_, _| 1.0)
    }

    pub fn max_q(&self) -> f64 {
        self.q.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,phi,q")?;
        for (i, t) in self.theta.iter().enumerate() {
            for (j, p) in self.phi.iter().enumerate() {
                writeln!(out, "{t},{p},{}", self.q[i][j])?;
            }
        }
        Ok(())
    }
}

pub fn husimi_grid(state: &[Complex64], n_theta: usize, n_phi: usize) -> Result<HusimiGrid> {
    let n = spins_of(state)?;
    check_unit(state)?;
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::InvalidParameter("Husimi grid needs >= 2 samples per axis".into()));
    }
    let weights = weight_sums(state, n);
    let theta = uniform(0.0, PI, n_theta);
    let phi = uniform(0.0, 2.0 * PI, n_phi);
    let q = theta
        .iter()
        .map(|&t| {
            phi.iter()
                .map(|&p| overlap(&weights, t, p).norm_sqr() / PI)
                .collect()
        })
        .collect();
    Ok(HusimiGrid {
        n_spins: n,
        theta,
        phi,
        q,
    })
}

/// `|<pi/2, phi | psi>|` along the equator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquatorialProfile {
    pub points: Vec<(f64, f64)>,
    pub argmax_phi: f64,
    pub max_overlap: f64,
}

impl EquatorialProfile {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "phi,abs_overlap")?;
        for (p, a) in &self.points {
            writeln!(out, "{p},{a}")?;
        }
        Ok(())
    }
}

pub fn equatorial_overlap_profile(state: &[Complex64], n_phi: usize) -> Result<EquatorialProfile> {
    let n = spins_of(state)?;
    check_unit(state)?;
    if n_phi < 2 {
        return Err(Error::InvalidParameter("profile needs >= 2 samples".into()));
    }
    let weights = weight_sums(state, n);
    let points: Vec<(f64, f64)> = uniform(0.0, 2.0 * PI, n_phi)
        .into_iter()
        .map(|p| (p, overlap(&weights, 0.5 * PI, p).norm()))
        .collect();
    let (argmax_phi, max_overlap) = points
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |best, pt| if pt.1 > best.1 + 1e-15 { pt } else { best });
    Ok(EquatorialProfile {
        points,
        argmax_phi,
        max_overlap,
    })
}

/// Angular distance on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Three estimates of `<S_x>` for a state and its Husimi grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SxEstimate {
    /// `(2J+1)(J+1)/4 * int int Q sin(theta) cos(phi) sin(theta) dtheta dphi`, `J = N/2`;
    /// exact for permutation-symmetric states.
    pub exact_symbol: f64,
    /// `int int Q sin(theta) cos(phi) dphi dtheta` without prefactor or measure.
    pub raw_integral: f64,
    /// `<psi| M_x / 2 |psi>`.
    pub direct: f64,
    pub symmetric_weight: f64,
    /// False when the state leaks out of the symmetric subspace.
    pub reliable: bool,
}

pub fn sx_from_husimi(grid: &HusimiGrid, state: &[Complex64]) -> Result<SxEstimate> {
    let n = spins_of(state)?;
    if n != grid.n_spins {
        return Err(Error::DimensionMismatch {
            expected: grid.n_spins,
            got: n,
        });
    }
    let spin = 0.5 * n as f64;
    let prefactor = (2.0 * spin + 1.0) * (spin + 1.0) / 4.0;
    let exact_symbol = prefactor * grid.integrate(|t, p| t.sin() * p.cos());

    // literal integrand, no sin(theta) measure
    let wt = trapezoid_weights(&grid.theta);
    let wp = trapezoid_weights(&grid.phi);
    let mut raw_integral = 0.0;
    for (i, &t) in grid.theta.iter().enumerate() {
        for (j, &p) in grid.phi.iter().enumerate() {
            raw_integral += wt[i] * wp[j] * grid.q[i][j] * t.sin() * p.cos();
        }
    }

    let mut mx = Complex64::new(0.0, 0.0);
    for (b, z) in state.iter().enumerate() {
        for bit in 0..n {
            mx += z.conj() * state[b ^ (1 << bit)];
        }
    }
    let symmetric_weight = symmetric_weight(state)?;
    Ok(SxEstimate {
        exact_symbol,
        raw_integral,
        direct: 0.5 * mx.re,
        symmetric_weight,
        reliable: (symmetric_weight - 1.0).abs() < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{standard_graph, GraphKind};
    use crate::hamiltonian::{build_tfim, SpinSystemParams};
    use crate::spectral::ground_state;

    fn complete_ground(n: usize) -> Vec<Complex64> {
        let g = standard_graph(GraphKind::Complete, n).unwrap();
        let h = build_tfim(&g, &SpinSystemParams::default()).unwrap();
        to_complex(&ground_state(&h).unwrap().vector)
    }

    fn all_up(n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn coherent_state_examples() {
        let up = spin_coherent_state(3, 0.0, 1.3).unwrap();
        assert_eq!(up[0], Complex64::new(1.0, 0.0));
        assert!(up[1..].iter().all(|z| z.norm() == 0.0));

        let plus = spin_coherent_state(1, 0.5 * PI, 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus[0].re - s).abs() < 1e-15 && (plus[1].re - s).abs() < 1e-15);

        let z = spin_coherent_state(2, 0.5 * PI, PI).unwrap();
        for (a, want) in z.iter().zip([0.5, -0.5, -0.5, 0.5]) {
            assert!((a - Complex64::new(want, 0.0)).norm() < 1e-15);
        }
        let norm: f64 = spin_coherent_state(5, 1.1, 2.3).unwrap().iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overlap_matches_brute_force_inner_product() {
        let psi = complete_ground(3);
        let w = weight_sums(&psi, 3);
        for (t, p) in [(0.3, 1.0), (2.0, 4.0), (PI, 0.1)] {
            let coh = spin_coherent_state(3, t, p).unwrap();
            let brute: Complex64 = coh.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
            assert!((brute - overlap(&w, t, p)).norm() < 1e-14);
        }
    }

    #[test]
    fn husimi_pole_values() {
        let grid = husimi_grid(&all_up(3), 5, 9).unwrap();
        for q in &grid.q[0] {
            assert!((q - 1.0 / PI).abs() < 1e-15);
        }
        for q in &grid.q[4] {
            assert!(q.abs() < 1e-30);
        }
        let plus = to_complex(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        let grid = husimi_grid(&plus, 3, 3).unwrap();
        assert!((grid.q[1][0] - 1.0 / PI).abs() < 1e-15);
        assert!(grid.q[1][1].abs() < 1e-15);
        assert!(husimi_grid(&to_complex(&[1.0, 1.0]), 3, 3).is_err());
        assert!(husimi_grid(&plus, 1, 3).is_err());
    }

    #[test]
    fn symmetric_normalization() {
        let psi = complete_ground(4);
        assert!((symmetric_weight(&psi).unwrap() - 1.0).abs() < 1e-10);
        let grid = husimi_grid(&psi, DEFAULT_THETA_SAMPLES, DEFAULT_PHI_SAMPLES).unwrap();
        assert!((grid.normalization() - 0.8).abs() < 1e-3);
        assert!(grid.max_q() <= 1.0 / PI + 1e-15);
    }

    #[test]
    fn generic_state_normalization_is_bounded() {
        // |01> is not symmetric: weight 1/2 in the symmetric subspace
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        v[1] = Complex64::new(1.0, 0.0);
        let grid = husimi_grid(&v, 181, 361).unwrap();
        assert!(grid.normalization() <= 4.0 / 3.0 + 1e-3);
        assert!((symmetric_weight(&v).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quadrature_converges_at_second_order() {
        // all-up state: full weight at the pole, so the endpoint error term is O(h^2)
        let mut psi = vec![Complex64::new(0.0, 0.0); 8];
        psi[0] = Complex64::new(1.0, 0.0);
        let exact = 1.0;
        let coarse = husimi_grid(&psi, 21, 41).unwrap().normalization();
        let fine = husimi_grid(&psi, 41, 81).unwrap().normalization();
        let ratio = (coarse - exact).abs() / (fine - exact).abs();
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} coarse {coarse} fine {fine}");
    }

    #[test]
    fn equatorial_profile_of_all_up() {
        for n in 1..=5 {
            let prof = equatorial_overlap_profile(&all_up(n), 73).unwrap();
            let want = 2f64.powf(-(n as f64) / 2.0);
            assert!(prof.points.iter().all(|(_, a)| (a - want).abs() < 1e-14));
        }
    }

    #[test]
    fn sx_estimates() {
        let plus = to_complex(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        let grid = husimi_grid(&plus, 181, 361).unwrap();
        let sx = sx_from_husimi(&grid, &plus).unwrap();
        assert!((sx.direct - 0.5).abs() < 1e-14);
        assert!((sx.exact_symbol - 0.5).abs() < 1e-3);
        assert!(sx.reliable);

        let up = all_up(3);
        let grid = husimi_grid(&up, 181, 361).unwrap();
        let sx = sx_from_husimi(&grid, &up).unwrap();
        assert!(sx.direct.abs() < 1e-14);
        assert!(sx.exact_symbol.abs() < 1e-10);
        assert!(sx.raw_integral.abs() < 1e-10);

        let psi = complete_ground(4);
        let grid = husimi_grid(&psi, 181, 361).unwrap();
        let sx = sx_from_husimi(&grid, &psi).unwrap();
        assert!((sx.exact_symbol - sx.direct).abs() < 1e-3, "{sx:?}");
    }

    #[test]
    fn outputs_are_phase_invariant() {
        let psi = complete_ground(3);
        let rotated: Vec<Complex64> = psi.iter().map(|z| z * Complex64::from_polar(1.0, 0.7)).collect();
        let a = husimi_grid(&psi, 11, 13).unwrap();
        let b = husimi_grid(&rotated, 11, 13).unwrap();
        for (ra, rb) in a.q.iter().zip(&b.q) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }
}
