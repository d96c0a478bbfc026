//! Log-log slope estimation over a geometric ladder of scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the slope is read off a finite ladder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeMode {
    LeastSquares,
    /// Largest two-point slope among the finer half of the ladder.
    #[default]
    Upper,
    /// Smallest two-point slope among the finer half of the ladder.
    Lower,
}

impl SlopeMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ls" | "least_squares" | "least-squares" => Ok(SlopeMode::LeastSquares),
            "upper" => Ok(SlopeMode::Upper),
            "lower" => Ok(SlopeMode::Lower),
            _ => Err(Error::invalid("mode", format!("unknown slope mode `{s}`"))),
        }
    }
}

/// Coordinate transform applied to the scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleAxis {
    /// `x = ln(scale)`, for ladders that refine as the scale grows.
    Log,
    /// `x = ln(1/scale)`, for ladders that refine as the scale shrinks.
    LogInverse,
}

/// Coordinate transform applied to the values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueAxis {
    Log,
    NegLog,
}

impl ScaleAxis {
    fn apply(self, v: f64) -> f64 {
        match self {
            ScaleAxis::Log => v.ln(),
            ScaleAxis::LogInverse => -v.ln(),
        }
    }
}

impl ValueAxis {
    fn apply(self, v: f64) -> f64 {
        match self {
            ValueAxis::Log => v.ln(),
            ValueAxis::NegLog => -v.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderEstimate {
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
    pub scale_axis: ScaleAxis,
    pub value_axis: ValueAxis,
    pub mode: SlopeMode,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub least_squares: f64,
    pub upper: f64,
    pub lower: f64,
}

struct Line {
    slope: f64,
    intercept: f64,
}

impl LadderEstimate {
    pub fn fit(
        scales: Vec<f64>,
        values: Vec<f64>,
        scale_axis: ScaleAxis,
        value_axis: ValueAxis,
        mode: SlopeMode,
    ) -> Result<Self> {
        if scales.len() != values.len() {
            return Err(Error::InvalidLadder(format!(
                "{} scales but {} values",
                scales.len(),
                values.len()
            )));
        }
        if scales.len() < 3 {
            return Err(Error::InvalidLadder(format!("{} points, need at least 3", scales.len())));
        }
        if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidLadder("scales must be positive and finite".into()));
        }
        let increasing = scales.windows(2).all(|w| w[1] > w[0]);
        let decreasing = scales.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidLadder("scales must be strictly monotone".into()));
        }
        let mut pts: Vec<(f64, f64)> = scales
            .iter()
            .zip(&values)
            .map(|(&s, &v)| (scale_axis.apply(s), value_axis.apply(v)))
            .collect();
        if pts.iter().any(|(_, y)| !y.is_finite()) {
            return Err(Error::InvalidLadder("values must be positive and finite".into()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ls = least_squares(&pts);
        let upper = envelope(&pts, true);
        let lower = envelope(&pts, false);
        let chosen = match mode {
            SlopeMode::LeastSquares => &ls,
            SlopeMode::Upper => &upper,
            SlopeMode::Lower => &lower,
        };
        let max_residual = pts
            .iter()
            .map(|(x, y)| (y - chosen.intercept - chosen.slope * x).abs())
            .fold(0.0, f64::max);
        Ok(LadderEstimate {
            slope: chosen.slope,
            intercept: chosen.intercept,
            max_residual,
            least_squares: ls.slope,
            upper: upper.slope,
            lower: lower.slope,
            scales,
            values,
            scale_axis,
            value_axis,
            mode,
        })
    }

    /// Refits from the stored points.
    pub fn recompute(&self) -> Result<Self> {
        Self::fit(
            self.scales.clone(),
            self.values.clone(),
            self.scale_axis,
            self.value_axis,
            self.mode,
        )
    }

    pub fn with_mode(&self, mode: SlopeMode) -> Result<Self> {
        Self::fit(self.scales.clone(), self.values.clone(), self.scale_axis, self.value_axis, mode)
    }

    /// A ladder whose values are all equal (slope zero).
    pub fn flat(scales: Vec<f64>, value: f64, scale_axis: ScaleAxis, value_axis: ValueAxis, mode: SlopeMode) -> Result<Self> {
        let values = vec![value; scales.len()];
        Self::fit(scales, values, scale_axis, value_axis, mode)
    }
}

fn least_squares(pts: &[(f64, f64)]) -> Line {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Line {
        slope,
        intercept: my - slope * mx,
    }
}

fn envelope(pts: &[(f64, f64)], upper: bool) -> Line {
    let tail = &pts[pts.len() / 2..];
    let mut best: Option<Line> = None;
    for i in 0..tail.len() {
        for j in i + 1..tail.len() {
            let (x0, y0) = tail[i];
            let (x1, y1) = tail[j];
            let slope = (y1 - y0) / (x1 - x0);
            let better = match &best {
                None => true,
                Some(b) => (upper && slope > b.slope) || (!upper && slope < b.slope),
            };
            if better {
                best = Some(Line {
                    slope,
                    intercept: y0 - slope * x0,
                });
            }
        }
    }
    best.expect("ladder has at least two fine points")
}

/// `start * ratio^k` for `k = 0..count`.
pub fn geometric(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Checks that `scales` is geometric with a common ratio in `(0, 1)` and at
/// least `min_len` entries.
pub fn check_geometric_decreasing(scales: &[f64], min_len: usize) -> Result<f64> {
    if scales.len() < min_len {
        return Err(Error::InvalidLadder(format!(
            "ladder has {} scales, need at least {min_len}",
            scales.len()
        )));
    }
    if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidLadder("scales must be positive and finite".into()));
    }
    let rho = scales[1] / scales[0];
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidLadder(format!("ratio {rho} not in (0, 1)")));
    }
    for w in scales.windows(2) {
        if ((w[1] / w[0]) / rho - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidLadder("ladder is not geometric".into()));
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let scales = geometric(1.0, 0.5, 8);
        let values: Vec<f64> = scales.iter().map(|r| 3.0 * r.powf(-0.7)).collect();
        for mode in [SlopeMode::LeastSquares, SlopeMode::Upper, SlopeMode::Lower] {
            let e = LadderEstimate::fit(
                scales.clone(),
                values.clone(),
                ScaleAxis::LogInverse,
                ValueAxis::Log,
                mode,
            )
            .unwrap();
            assert!((e.slope - 0.7).abs() < 1e-12);
            assert!((e.intercept - 3f64.ln()).abs() < 1e-12);
            assert!(e.max_residual < 1e-12);
        }
    }

    #[test]
    fn envelopes_bracket_least_squares_on_the_fine_half() {
        let scales = geometric(1.0, 2.0, 10);
        let values: Vec<f64> = scales
            .iter()
            .enumerate()
            .map(|(k, l)| l.powf(0.5) * if k % 2 == 0 { 1.3 } else { 1.0 })
            .collect();
        let e = LadderEstimate::fit(scales, values, ScaleAxis::Log, ValueAxis::Log, SlopeMode::Upper).unwrap();
        assert!(e.lower <= e.least_squares && e.least_squares <= e.upper);
        assert_eq!(e.slope, e.upper);
        assert_eq!(e.recompute().unwrap(), e);
    }

    #[test]
    fn rejects_bad_ladders() {
        let f = |s: Vec<f64>, v: Vec<f64>| {
            LadderEstimate::fit(s, v, ScaleAxis::Log, ValueAxis::Log, SlopeMode::Upper)
        };
        assert!(f(vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(f(vec![1.0, 3.0, 2.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(f(vec![1.0, 2.0, 3.0], vec![1.0, 0.0, 3.0]).is_err());
        assert!(check_geometric_decreasing(&[1.0, 0.5, 0.25, 0.1, 0.05], 5).is_err());
        assert!(check_geometric_decreasing(&geometric(1.0, 0.5, 4), 5).is_err());
        assert!(check_geometric_decreasing(&geometric(1.0, 0.5, 5), 5).is_ok());
    }
}
