//! Ground-state metrology and finite-size scaling fits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::apply_mx_vec;

/// `4 (<M_x^2> - <M_x>^2)` for a pure state; the generator form of the Fisher
/// information, valid for ground states.
pub fn generator_qfi_ground(state: &[f64], n: usize) -> Result<f64> {
    let dim = 1usize << n;
    if state.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: state.len(),
        });
    }
    let norm2: f64 = state.iter().map(|x| x * x).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "state norm {} is not 1",
            norm2.sqrt()
        )));
    }
    let w = apply_mx_vec(n, state);
    let mean: f64 = state.iter().zip(&w).map(|(a, b)| a * b).sum();
    let sq: f64 = w.iter().map(|x| x * x).sum();
    Ok((4.0 * (sq - mean * mean)).max(0.0))
}

/// `xi^2 = F_Q / N`.
pub fn spin_squeezing(fq: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidSize("spin squeezing needs n >= 1".into()));
    }
    Ok(fq / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    All,
    Even,
    Odd,
}

impl Parity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Parity::All => true,
            Parity::Even => n % 2 == 0,
            Parity::Odd => n % 2 == 1,
        }
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Parity::All),
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!("unknown parity `{other}`"))),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::All => "all",
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Polynomial,
    LoglogPolynomial,
    PowerLaw,
}

impl FromStr for FitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly" | "polynomial" => Ok(FitKind::Polynomial),
            "loglog" => Ok(FitKind::LoglogPolynomial),
            "power" | "power-law" => Ok(FitKind::PowerLaw),
            other => Err(Error::InvalidParameter(format!("unknown fit kind `{other}`"))),
        }
    }
}

pub const MAX_FIT_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: FitKind,
    pub parity: Parity,
    pub degree: usize,
    /// Ascending powers; in log space these are the coefficients of `(ln x)^k`.
    pub coefficients: Vec<f64>,
    pub exponent: Option<f64>,
    /// Root-mean-square misfit in the fitted space.
    pub residual: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl ScalingFit {
    /// Evaluates the fit at `x` in the original (not log) space.
    pub fn evaluate(&self, x: f64) -> f64 {
        let (t, log) = match self.kind {
            FitKind::Polynomial => (x, false),
            _ => (x.ln(), true),
        };
        let y = self
            .coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c);
        if log {
            y.exp()
        } else {
            y
        }
    }
}

/// Householder QR least squares for a tall dense system (row-major rows).
fn least_squares(mut rows: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let m = rows.len();
    let k = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, x| a.max(x.abs()))
        .max(1.0);
    for col in 0..k {
        let norm = (col..m).map(|r| rows[r][col].powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-13 * scale {
            return Err(Error::InsufficientData("rank-deficient design matrix".into()));
        }
        let alpha = if rows[col][col] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (col..m).map(|r| rows[r][col]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for c in col..k {
                let dot: f64 = (col..m).map(|r| v[r - col] * rows[r][c]).sum();
                let f = 2.0 * dot / vnorm2;
                for r in col..m {
                    rows[r][c] -= f * v[r - col];
                }
            }
            let dot: f64 = (col..m).map(|r| v[r - col] * rhs[r]).sum();
            let f = 2.0 * dot / vnorm2;
            for r in col..m {
                rhs[r] -= f * v[r - col];
            }
        }
    }
    let mut coef = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|c| rows[i][c] * coef[c]).sum();
        coef[i] = (rhs[i] - s) / rows[i][i];
    }
    Ok(coef)
}

/// Least-squares polynomial of degree `degree`, optionally in log-log space.
pub fn polynomial_fit(xs: &[f64], ys: &[f64], degree: usize, log_space: bool) -> Result<ScalingFit> {
    fit_impl(xs, ys, degree, log_space, Parity::All)
}

fn fit_impl(xs: &[f64], ys: &[f64], degree: usize, log_space: bool, parity: Parity) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if degree > MAX_FIT_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "degree {degree} exceeds {MAX_FIT_DEGREE}"
        )));
    }
    if xs.len() <= degree {
        return Err(Error::InsufficientData(format!(
            "{} points cannot determine a degree-{degree} fit",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite data".into()));
    }
    if log_space && xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter("log-space fit needs positive data".into()));
    }
    let (tx, ty): (Vec<f64>, Vec<f64>) = if log_space {
        (xs.iter().map(|x| x.ln()).collect(), ys.iter().map(|y| y.ln()).collect())
    } else {
        (xs.to_vec(), ys.to_vec())
    };
    let design: Vec<Vec<f64>> = tx
        .iter()
        .map(|&x| (0..=degree).map(|k| x.powi(k as i32)).collect())
        .collect();
    let coefficients = least_squares(design, ty.clone())?;
    let predict = |x: f64| coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let sse: f64 = tx.iter().zip(&ty).map(|(&x, &y)| (predict(x) - y).powi(2)).sum();
    let mean = ty.iter().sum::<f64>() / ty.len() as f64;
    let sst: f64 = ty.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    Ok(ScalingFit {
        kind: if log_space {
            FitKind::LoglogPolynomial
        } else {
            FitKind::Polynomial
        },
        parity,
        degree,
        exponent: None,
        residual: (sse / tx.len() as f64).sqrt(),
        r_squared,
        n_points: xs.len(),
        x_min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        x_max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        coefficients,
    })
}

/// Polynomial fit restricted to sizes of the requested parity.
pub fn polynomial_fit_parity(
    ns: &[usize],
    ys: &[f64],
    degree: usize,
    log_space: bool,
    parity: Parity,
) -> Result<ScalingFit> {
    let (xs, ys) = filter_parity(ns, ys, parity)?;
    fit_impl(&xs, &ys, degree, log_space, parity)
}

fn filter_parity(ns: &[usize], ys: &[f64], parity: Parity) -> Result<(Vec<f64>, Vec<f64>)> {
    if ns.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            got: ys.len(),
        });
    }
    Ok(ns
        .iter()
        .zip(ys)
        .filter(|(n, _)| parity.accepts(**n))
        .map(|(&n, &y)| (n as f64, y))
        .unzip())
}

/// `F ~ N^alpha` by a straight-line fit in log-log space.
pub fn power_law_fit(ns: &[usize], fs: &[f64], parity: Parity) -> Result<ScalingFit> {
    let (xs, ys) = filter_parity(ns, fs, parity)?;
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 3 points of parity {parity}, got {}",
            xs.len()
        )));
    }
    let mut fit = fit_impl(&xs, &ys, 1, true, parity)?;
    fit.kind = FitKind::PowerLaw;
    fit.exponent = Some(fit.coefficients[1]);
    Ok(fit)
}
