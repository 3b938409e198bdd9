//! Least-squares fits for convergence-order certification.
//!
//! The product-formula error behaves as `c·s^{p+1}` inside an asymptotic
//! window: above the floating-point noise floor `1e-9·dim` and below the
//! saturation scale 0.1. [`order_fit`] measures the low-energy error over a
//! log-spaced step grid, keeps only windowed points, and fits
//! `ln(error) ~ slope·ln(s) + intercept`; the slope certifies the order.

use serde::Serialize;

use crate::formulas::Schedule;
use crate::lab::{measure_formula_error, ExperimentRecord, Restriction, Workbench};
use crate::{tol, Error, Result};

/// Outcome of a log-log order fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Smallest and largest step size that survived the window filter.
    pub window: (f64, f64),
    pub points: usize,
}

/// Plain least squares of `y ~ slope·x + intercept`; returns
/// `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "fit needs ≥ 2 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateSeries(
            "zero variance in the fit abscissa".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        1.0 - ss_res / syy
    } else {
        1.0
    };
    Ok((slope, intercept, r2))
}

fn check_log_spaced(s_grid: &[f64]) -> Result<()> {
    if s_grid.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "order fit needs ≥ 5 grid points, got {}",
            s_grid.len()
        )));
    }
    for w in s_grid.windows(2) {
        if !(w[0] > 0.0 && w[1] > w[0]) {
            return Err(Error::InvalidInput(
                "step grid must be positive and strictly increasing".into(),
            ));
        }
    }
    let r0 = s_grid[1] / s_grid[0];
    for w in s_grid.windows(2) {
        let r = w[1] / w[0];
        if (r / r0 - 1.0).abs() > 1e-3 {
            return Err(Error::InvalidInput(
                "step grid must be log-spaced (constant ratio)".into(),
            ));
        }
    }
    Ok(())
}

/// Convenience: `count` log-spaced points spanning `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(Error::InvalidInput(format!(
            "log grid needs 0 < lo < hi and ≥ 2 points, got [{lo}, {hi}] × {count}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Measure the low-energy formula error over a log-spaced step grid and fit
/// its convergence order; expected slope is p+1. Pass `delta ≥ ‖H‖` for the
/// full-space order. Also returns the underlying records.
pub fn order_fit(
    bench: &Workbench,
    sched: &Schedule,
    s_grid: &[f64],
    delta: f64,
    gamma_tilde: f64,
) -> Result<(FitResult, Vec<ExperimentRecord>)> {
    check_log_spaced(s_grid)?;
    let floor = tol::BOUND_SLACK_PER_DIM * bench.dim() as f64;
    let mut records = Vec::with_capacity(s_grid.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut window = (f64::INFINITY, 0.0f64);
    for &s in s_grid {
        let rec =
            measure_formula_error(bench, sched, s, delta, Restriction::LowEnergy, gamma_tilde)?;
        if (floor..=0.1).contains(&rec.measured) {
            xs.push(s.ln());
            ys.push(rec.measured.ln());
            window.0 = window.0.min(s);
            window.1 = window.1.max(s);
        }
        records.push(rec);
    }
    if xs.len() < 5 {
        return Err(Error::DegenerateSeries(format!(
            "only {} of {} points inside the asymptotic window [{floor:.1e}, 0.1]",
            xs.len(),
            s_grid.len()
        )));
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys)?;
    Ok((
        FitResult {
            slope,
            intercept,
            r2,
            window,
            points: xs.len(),
        },
        records,
    ))
}
