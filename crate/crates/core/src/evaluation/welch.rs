//! Welch's unequal-variances t statistic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WelchError {
    #[error("need at least two samples per group (got {0} and {1})")]
    InsufficientSamples(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchT {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub dof: f64,
    /// Both groups had zero variance. `t` is then 0 for equal means and
    /// signed infinity otherwise, and `dof` falls back to `n_a + n_b - 2`.
    pub zero_variance: bool,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchT, WelchError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(WelchError::InsufficientSamples(a.len(), b.len()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    if sa + sb == 0.0 {
        let t = if ma == mb { 0.0 } else { (ma - mb).signum() * f64::INFINITY };
        return Ok(WelchT {
            t,
            dof: na + nb - 2.0,
            zero_variance: true,
        });
    }
    let t = (ma - mb) / (sa + sb).sqrt();
    let dof = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchT {
        t,
        dof,
        zero_variance: false,
    })
}
