//! Least-squares fitting of the path-gain models to link records.
//!
//! All fits are ordinary least squares in dB versus `10 log10(distance)`
//! space. Confidence intervals are two-sided 90% from the Gaussian
//! approximation (z = 1.645) with the standard OLS parameter covariance.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::propagation::{CornerModel, CornerVariant, SlopeInterceptModel, FRIIS_28GHZ_1M_DB};

/// z for a two-sided 90% interval.
pub const Z90: f64 = 1.6448536269514722;

/// Measurement scenario a link belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    RoofEdge,
    Offset,
    Lamppost,
    /// Before-corner leg of an around-corner route.
    SameStreetCorner,
    AroundCorner,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::RoofEdge => "roof-edge",
            Scenario::Offset => "offset",
            Scenario::Lamppost => "lamppost",
            Scenario::SameStreetCorner => "same-street-corner",
            Scenario::AroundCorner => "around-corner",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "roof-edge" => Ok(Scenario::RoofEdge),
            "offset" => Ok(Scenario::Offset),
            "lamppost" => Ok(Scenario::Lamppost),
            "same-street-corner" => Ok(Scenario::SameStreetCorner),
            "around-corner" => Ok(Scenario::AroundCorner),
            other => Err(Error::data(format!("unknown scenario '{other}'"))),
        }
    }
}

/// One measured (or synthetic) link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRecord {
    pub street_id: String,
    pub scenario: Scenario,
    pub unwrapped_distance_m: f64,
    pub path_gain_db: f64,
    /// Distance from the fixed terminal to the corner; required iff the
    /// scenario is AroundCorner.
    pub corner_distance_m: Option<f64>,
}

impl LinkRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.unwrapped_distance_m > 1.0) {
            return Err(Error::data(format!(
                "distance {} m must exceed the 1 m anchor",
                self.unwrapped_distance_m
            )));
        }
        if !self.path_gain_db.is_finite() {
            return Err(Error::data("path gain must be finite"));
        }
        match (self.scenario, self.corner_distance_m) {
            (Scenario::AroundCorner, None) => Err(Error::data(
                "around-corner record missing corner_distance_m",
            )),
            (Scenario::AroundCorner, Some(dc)) => {
                if !(dc > 1.0) {
                    Err(Error::data(format!(
                        "corner distance {dc} m must exceed 1 m"
                    )))
                } else if dc >= self.unwrapped_distance_m {
                    Err(Error::data(format!(
                        "corner distance {dc} m must be below the unwrapped distance {} m",
                        self.unwrapped_distance_m
                    )))
                } else {
                    Ok(())
                }
            }
            (_, Some(_)) => Err(Error::data(
                "corner_distance_m only applies to around-corner records",
            )),
            (_, None) => Ok(()),
        }
    }
}

/// A fitted parameter with its 90% half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub ci90_half: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    SlopeIntercept(SlopeInterceptModel),
    Corner(CornerModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FittedModel,
    pub rmse_db: f64,
    /// 90% half-width of the intercept (0 when the intercept is pinned).
    pub ci90_intercept_db: f64,
    /// 90% half-width of the (before-corner) distance exponent.
    pub ci90_exponent: f64,
    pub params: Vec<FitParam>,
    pub residuals_db: Vec<f64>,
}

/// Intercept handling for corner fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterceptMode {
    /// Pin the 1 m intercept at the tabulated Friis value.
    PinnedFriis,
    /// Pin at an arbitrary value.
    Pinned(f64),
    /// Fit the intercept as a free parameter.
    Floating,
}

impl InterceptMode {
    fn pinned_value(&self) -> Option<f64> {
        match self {
            InterceptMode::PinnedFriis => Some(FRIIS_28GHZ_1M_DB),
            InterceptMode::Pinned(v) => Some(*v),
            InterceptMode::Floating => None,
        }
    }
}

// --------------------------------------------------------------------------
// Small dense OLS solver
// --------------------------------------------------------------------------

/// Solve `A x = b` for a small symmetric positive-definite system by
/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let mut pivot = col;
        for row in (col + 1)..k {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::domain(
                "degenerate regression design (singular normal equations)",
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in (col + 1)..k {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

struct Ols {
    beta: Vec<f64>,
    /// Diagonal of (X'X)^-1.
    inv_diag: Vec<f64>,
    residuals: Vec<f64>,
    rmse: f64,
    /// Residual standard error s (sqrt of SSR / dof), 0 when dof <= 0.
    s: f64,
}

/// Ordinary least squares of `y` on the columns of `x` (row-major).
#[allow(clippy::needless_range_loop)]
fn ols(x: &[Vec<f64>], y: &[f64]) -> Result<Ols> {
    let n = y.len();
    let k = x.first().map(|r| r.len()).unwrap_or(0);
    if n < k || k == 0 {
        return Err(Error::domain(format!(
            "need at least {k} records for {k} parameters, got {n}"
        )));
    }
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..k {
            xty[i] += row[i] * yi;
            for j in i..k {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }
    let beta = solve(xtx.clone(), xty)?;
    let mut inv_diag = vec![0.0; k];
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        let col = solve(xtx.clone(), e)?;
        inv_diag[j] = col[j];
    }
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| yi - row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let rmse = (ssr / n as f64).sqrt();
    let dof = n as isize - k as isize;
    let s = if dof > 0 {
        (ssr / dof as f64).sqrt()
    } else {
        0.0
    };
    Ok(Ols {
        beta,
        inv_diag,
        residuals,
        rmse,
        s,
    })
}

fn ci(olsr: &Ols, j: usize) -> f64 {
    Z90 * olsr.s * olsr.inv_diag[j].max(0.0).sqrt()
}

// --------------------------------------------------------------------------
// Fits
// --------------------------------------------------------------------------

fn check_records(records: &[LinkRecord]) -> Result<()> {
    for r in records {
        r.validate()?;
    }
    Ok(())
}

/// Two-parameter slope-intercept fit: path gain on `10 log10(d)`.
pub fn fit_slope_intercept(records: &[LinkRecord]) -> Result<FitResult> {
    check_records(records)?;
    if records.len() < 3 {
        return Err(Error::domain(format!(
            "need at least 3 records, got {}",
            records.len()
        )));
    }
    let first = records[0].unwrapped_distance_m;
    if records
        .iter()
        .all(|r| (r.unwrapped_distance_m - first).abs() < 1e-12)
    {
        return Err(Error::domain("degenerate design: all distances equal"));
    }
    let x: Vec<Vec<f64>> = records
        .iter()
        .map(|r| vec![1.0, 10.0 * r.unwrapped_distance_m.log10()])
        .collect();
    let y: Vec<f64> = records.iter().map(|r| r.path_gain_db).collect();
    let o = ols(&x, &y)?;
    let model = SlopeInterceptModel::new(o.beta[0], o.beta[1], o.rmse)?;
    Ok(FitResult {
        model: FittedModel::SlopeIntercept(model),
        rmse_db: o.rmse,
        ci90_intercept_db: ci(&o, 0),
        ci90_exponent: ci(&o, 1),
        params: vec![
            FitParam {
                name: "intercept_db_1m".into(),
                value: o.beta[0],
                ci90_half: ci(&o, 0),
            },
            FitParam {
                name: "exponent".into(),
                value: o.beta[1],
                ci90_half: ci(&o, 1),
            },
        ],
        residuals_db: o.residuals,
    })
}

/// One-parameter fit of the distance exponent with the 1 m intercept
/// pinned. A single record determines the exponent exactly.
pub fn fit_fixed_intercept(records: &[LinkRecord], intercept_db_1m: f64) -> Result<FitResult> {
    check_records(records)?;
    if records.is_empty() {
        return Err(Error::domain("need at least 1 record"));
    }
    let x: Vec<Vec<f64>> = records
        .iter()
        .map(|r| vec![10.0 * r.unwrapped_distance_m.log10()])
        .collect();
    let y: Vec<f64> = records
        .iter()
        .map(|r| r.path_gain_db - intercept_db_1m)
        .collect();
    let o = ols(&x, &y)?;
    let model = SlopeInterceptModel::new(intercept_db_1m, o.beta[0], o.rmse)?;
    Ok(FitResult {
        model: FittedModel::SlopeIntercept(model),
        rmse_db: o.rmse,
        ci90_intercept_db: 0.0,
        ci90_exponent: ci(&o, 0),
        params: vec![FitParam {
            name: "exponent".into(),
            value: o.beta[0],
            ci90_half: ci(&o, 0),
        }],
        residuals_db: o.residuals,
    })
}

/// Joint linear fit of a corner model. Records tagged `AroundCorner` form
/// the after-corner branch and carry their own corner distances; all other
/// records form the before-corner branch. The corner loss is constrained
/// to be non-negative by clip-and-refit.
pub fn fit_corner_model(
    records: &[LinkRecord],
    variant: CornerVariant,
    mode: InterceptMode,
) -> Result<FitResult> {
    check_records(records)?;
    let n_after = records
        .iter()
        .filter(|r| r.scenario == Scenario::AroundCorner)
        .count();
    let n_before = records.len() - n_after;
    if n_before < 2 || n_after < 2 {
        return Err(Error::domain(format!(
            "corner fit needs >= 2 records on each branch (got {n_before} before, {n_after} after)"
        )));
    }

    let pinned = mode.pinned_value();
    // Column layout: [P1 (floating only)], n (or n1), [n2 (dual slope)],
    // -delta indicator.
    let float_cols = usize::from(pinned.is_none());
    let dual = variant == CornerVariant::DualSlope;
    let n_col = float_cols;
    let n2_col = n_col + 1;
    let delta_col = n_col + 1 + usize::from(dual);
    let k = delta_col + 1;

    let build = |with_delta: bool| -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut x = Vec::with_capacity(records.len());
        let mut y = Vec::with_capacity(records.len());
        for r in records {
            let mut row = vec![0.0; if with_delta { k } else { k - 1 }];
            if pinned.is_none() {
                row[0] = 1.0;
            }
            let d = r.unwrapped_distance_m;
            match r.scenario {
                Scenario::AroundCorner => {
                    let dc = r.corner_distance_m.expect("validated");
                    let leg = d - dc;
                    match variant {
                        CornerVariant::Diffraction => row[n_col] = 5.0 * (dc * leg * d).log10(),
                        CornerVariant::Scattering => row[n_col] = 10.0 * (dc * leg).log10(),
                        CornerVariant::DualSlope => {
                            row[n_col] = 10.0 * dc.log10();
                            row[n2_col] = 10.0 * (d / dc).log10();
                        }
                    }
                    if with_delta {
                        row[delta_col] = -1.0;
                    }
                }
                _ => {
                    row[n_col] = 10.0 * d.log10();
                }
            }
            x.push(row);
            y.push(r.path_gain_db - pinned.unwrap_or(0.0));
        }
        (x, y)
    };

    let (x, y) = build(true);
    let mut o = ols(&x, &y)?;
    let mut delta = o.beta[delta_col];
    let mut delta_ci = ci(&o, delta_col);
    if delta < 0.0 {
        // Negative corner loss is outside the model; refit with delta = 0.
        let (x0, y0) = build(false);
        o = ols(&x0, &y0)?;
        delta = 0.0;
        delta_ci = 0.0;
    }

    let p1 = pinned.unwrap_or_else(|| o.beta[0]);
    let n = o.beta[n_col];
    let n2 = if dual { o.beta[n2_col] } else { n };
    // Model corner distance: the median of the record corner distances
    // (corner distance is per-street; pooled fits keep per-record values).
    let mut dcs: Vec<f64> = records.iter().filter_map(|r| r.corner_distance_m).collect();
    dcs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let dc = dcs[dcs.len() / 2];

    let model = CornerModel::new(p1, n, n2, delta, dc, variant)?;
    let mut params = Vec::new();
    let ci_p1 = if pinned.is_none() { ci(&o, 0) } else { 0.0 };
    params.push(FitParam {
        name: "intercept_db_1m".into(),
        value: p1,
        ci90_half: ci_p1,
    });
    params.push(FitParam {
        name: if dual { "exponent_before" } else { "exponent" }.into(),
        value: n,
        ci90_half: ci(&o, n_col),
    });
    if dual {
        params.push(FitParam {
            name: "exponent_after".into(),
            value: n2,
            ci90_half: ci(&o, n2_col),
        });
    }
    params.push(FitParam {
        name: "corner_loss_db".into(),
        value: delta,
        ci90_half: delta_ci,
    });

    Ok(FitResult {
        model: FittedModel::Corner(model),
        rmse_db: o.rmse,
        ci90_intercept_db: ci_p1,
        ci90_exponent: ci(&o, n_col),
        params,
        residuals_db: o.residuals,
    })
}

/// Maximum horizontal (dB-axis) deviation between the residual empirical
/// CDF and a Gaussian CDF with matched mean and standard deviation,
/// evaluated over the central 99% probability range. A zero-variance input
/// falls back to unit standard deviation so the degenerate case stays
/// finite.
pub fn lognormality_deviation(residuals_db: &[f64]) -> Result<f64> {
    let n = residuals_db.len();
    if n < 100 {
        return Err(Error::domain(format!(
            "need at least 100 residuals, got {n}"
        )));
    }
    let mean = residuals_db.iter().sum::<f64>() / n as f64;
    let var = residuals_db
        .iter()
        .map(|r| (r - mean) * (r - mean))
        .sum::<f64>()
        / n as f64;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    let gauss = Normal::new(mean, sd).map_err(|e| Error::domain(e.to_string()))?;
    let mut sorted = residuals_db.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let p = (i as f64 + 0.5) / n as f64;
        if !(0.005..=0.995).contains(&p) {
            continue;
        }
        let q = gauss.inverse_cdf(p);
        worst = worst.max((x - q).abs());
    }
    Ok(worst)
}
