use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::records::{ErrorKind, Protocol, SweepRecord};

pub const DEFAULT_FLOOR: f64 = 1e-11;
pub const MIN_FIT_POINTS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub filter_floor: f64,
}

/// Least squares on `(ln x, ln y)` over the points with `y > floor` and `x > 0`.
pub fn fit_loglog_slope(points: &[(f64, f64)], floor: f64) -> Result<SlopeFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > floor && y.is_finite() && x.is_finite())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            floor,
            found: logs.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        points_used: logs.len(),
        filter_floor: floor,
    })
}

/// Independent variable of a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XAxis {
    J,
    Tau,
    TotalT,
}

impl XAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            XAxis::J => "j",
            XAxis::Tau => "tau",
            XAxis::TotalT => "total_t",
        }
    }

    pub fn value(self, r: &SweepRecord) -> f64 {
        match self {
            XAxis::J => r.j,
            XAxis::Tau => r.tau,
            XAxis::TotalT => r.total_t,
        }
    }
}

/// Records sharing protocol, randomization, order and error kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveKey {
    pub protocol: Protocol,
    pub randomized: bool,
    pub order_k: u32,
    pub error_kind: ErrorKind,
}

impl CurveKey {
    pub fn of(r: &SweepRecord) -> Self {
        Self {
            protocol: r.protocol,
            randomized: r.randomized,
            order_k: r.order_k,
            error_kind: r.error_kind,
        }
    }

    pub fn label(&self) -> String {
        super::records::curve_label(self.protocol, self.randomized, self.order_k)
    }
}

#[derive(Clone, Debug)]
pub struct Curve {
    pub key: CurveKey,
    pub axis: XAxis,
    /// `(x, mean error, trials)` sorted by `x`.
    pub points: Vec<(f64, f64, usize)>,
}

impl Curve {
    pub fn mean_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|&(x, y, _)| (x, y)).collect()
    }
}

/// Picks `j` if it varies, else `total_t` for UDD, else `tau`.
fn detect_axis(key: &CurveKey, rows: &[&SweepRecord]) -> XAxis {
    let varies = |f: fn(&SweepRecord) -> f64| rows.iter().any(|r| f(r) != f(rows[0]));
    if varies(|r| r.j) {
        XAxis::J
    } else if key.protocol == Protocol::Udd && varies(|r| r.total_t) {
        XAxis::TotalT
    } else {
        XAxis::Tau
    }
}

/// Groups records into curves and averages the error over trials at each x.
pub fn aggregate(records: &[SweepRecord]) -> Vec<Curve> {
    let mut groups: BTreeMap<CurveKey, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(CurveKey::of(r)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(key, rows)| {
            let axis = detect_axis(&key, &rows);
            let mut by_x: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
            for r in &rows {
                let x = axis.value(r);
                let e = by_x.entry(x.to_bits()).or_insert((x, 0.0, 0));
                e.1 += r.error;
                e.2 += 1;
            }
            let mut points: Vec<_> = by_x.into_values().map(|(x, s, n)| (x, s / n as f64, n)).collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Curve { key, axis, points }
        })
        .collect()
}
