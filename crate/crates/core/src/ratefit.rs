//! Empirical growth rates of regret curves.
//!
//! A curve of mean regrets over increasing horizons is fitted on the log-log
//! scale; the slope and the quality of a `R ~ a + b ln T` fit decide whether
//! regret looks constant, logarithmic, polynomial or linear.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub horizon: u64,
    pub mean: f64,
    pub se: f64,
}

/// Mean regret measured at strictly increasing horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    points: Vec<RatePoint>,
    pub label: String,
    pub mode: String,
}

impl RateCurve {
    pub fn new(points: Vec<RatePoint>, label: impl Into<String>, mode: impl Into<String>) -> Result<Self> {
        if points.len() < MIN_POINTS {
            return Err(Error::TooFewPoints {
                needed: MIN_POINTS,
                got: points.len(),
            });
        }
        if let Some(i) = (1..points.len()).find(|&i| points[i].horizon <= points[i - 1].horizon) {
            return Err(Error::HorizonsNotIncreasing(i));
        }
        Ok(Self {
            points,
            label: label.into(),
            mode: mode.into(),
        })
    }

    pub fn points(&self) -> &[RatePoint] {
        &self.points
    }

    fn require_positive(&self) -> Result<()> {
        match self.points.iter().find(|p| p.mean.is_nan() || p.mean <= 0.0) {
            Some(p) => Err(Error::NonPositiveRegret {
                horizon: p.horizon,
                value: p.mean,
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Unweighted,
    /// Weights `(mean / se)^2`, the inverse delta-method variance of `ln mean`.
    InverseVariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r2: f64,
}

/// Weighted least squares of `y` on `x`.
pub fn fit_line(x: &[f64], y: &[f64], w: &[f64]) -> LineFit {
    let n = x.len();
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = (0..n)
        .map(|i| {
            let r = y[i] - intercept - slope * x[i];
            w[i] * r * r
        })
        .sum();
    let slope_se = if n > 2 {
        (ssr / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    LineFit {
        slope,
        intercept,
        slope_se,
        r2,
    }
}

/// Least-squares slope of `ln mean` on `ln horizon`, with its standard error.
pub fn loglog_slope(curve: &RateCurve, weighting: Weighting) -> Result<(f64, f64)> {
    curve.require_positive()?;
    let x: Vec<f64> = curve.points.iter().map(|p| (p.horizon as f64).ln()).collect();
    let y: Vec<f64> = curve.points.iter().map(|p| p.mean.ln()).collect();
    let w: Vec<f64> = match weighting {
        Weighting::Unweighted => vec![1.0; x.len()],
        Weighting::InverseVariance => curve
            .points
            .iter()
            .map(|p| {
                let rel = p.se / p.mean;
                if rel > 0.0 && rel.is_finite() {
                    1.0 / (rel * rel)
                } else {
                    1.0
                }
            })
            .collect(),
    };
    let fit = fit_line(&x, &y, &w);
    Ok((fit.slope, fit.slope_se))
}

/// R² of the straight-line fit of mean regret against `ln horizon`.
pub fn log_linear_r2(curve: &RateCurve) -> f64 {
    let x: Vec<f64> = curve.points.iter().map(|p| (p.horizon as f64).ln()).collect();
    let y: Vec<f64> = curve.points.iter().map(|p| p.mean).collect();
    fit_line(&x, &y, &vec![1.0; x.len()]).r2
}

/// Cut points of the growth classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Slopes below this are constant.
    pub constant_below: f64,
    /// Upper end of the logarithmic band.
    pub log_below: f64,
    /// Minimum R² of the `R ~ ln T` fit inside the logarithmic band.
    pub log_min_r2: f64,
    /// Power laws at or above this exponent are linear.
    pub linear_from: f64,
    /// Distance from a band edge that gets flagged.
    pub edge_margin: f64,
    pub weighting: Weighting,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            constant_below: 0.08,
            log_below: 0.25,
            log_min_r2: 0.98,
            linear_from: 0.9,
            edge_margin: 0.02,
            weighting: Weighting::Unweighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthLabel {
    Constant,
    Logarithmic,
    Power(f64),
    Linear,
}

impl fmt::Display for GrowthLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthLabel::Constant => write!(f, "constant"),
            GrowthLabel::Logarithmic => write!(f, "logarithmic"),
            GrowthLabel::Power(s) => write!(f, "power({s:.3})"),
            GrowthLabel::Linear => write!(f, "linear"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthClassification {
    pub slope: f64,
    pub slope_se: f64,
    pub r2_log: f64,
    pub label: GrowthLabel,
    /// Slope within `edge_margin` of the constant or logarithmic band edges.
    pub near_edge: bool,
}

pub fn classify_growth(curve: &RateCurve, th: &Thresholds) -> Result<GrowthClassification> {
    let (slope, slope_se) = loglog_slope(curve, th.weighting)?;
    let r2_log = log_linear_r2(curve);
    let label = if slope < th.constant_below {
        GrowthLabel::Constant
    } else if slope < th.log_below && r2_log >= th.log_min_r2 {
        GrowthLabel::Logarithmic
    } else if slope >= th.linear_from {
        GrowthLabel::Linear
    } else {
        GrowthLabel::Power(slope)
    };
    let near_edge = [th.constant_below, th.log_below]
        .iter()
        .any(|edge| (slope - edge).abs() < th.edge_margin);
    Ok(GrowthClassification {
        slope,
        slope_se,
        r2_log,
        label,
        near_edge,
    })
}
