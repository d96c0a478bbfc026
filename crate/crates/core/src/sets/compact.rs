use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of net points.
pub const NET_CAP: usize = 200_000;
/// Default maximum IFS expansion depth.
pub const DEFAULT_DEPTH: usize = 40;

/// Compact subsets of `[0, inf)`.
///
/// IFS maps are `x -> ratio_i * x + translation_i`. In config files a set is a
/// record `{kind, params, depth}`; see [`SetDescriptor`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetDescriptor", into = "SetDescriptor")]
pub enum CompactSet {
    Interval { a: f64, b: f64 },
    FinitePoints { points: Vec<f64> },
    IfsAttractor {
        ratios: Vec<f64>,
        translations: Vec<f64>,
        depth: usize,
    },
    Union { parts: Vec<CompactSet> },
}

/// Flat config form of a [`CompactSet`].
///
/// `kind` is one of `interval` (params `a, b`), `points` (the points),
/// `cantor` (params `[r]`, default one third: maps `r x` and `r x + 1 - r`),
/// `ifs` (params `r1, t1, r2, t2, ...`) or `union` (`parts`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDescriptor {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<SetDescriptor>,
}

/// Marks sets whose packing-type regularization over countable covers is
/// trivial, because every relatively open piece looks like the whole.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfCoverCertificate {
    pub holds: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaNet {
    pub points: Vec<f64>,
    pub mesh: f64,
    pub parent: String,
}

impl DeltaNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl CompactSet {
    pub fn unit_interval() -> Self {
        CompactSet::Interval { a: 0.0, b: 1.0 }
    }

    pub fn point(t: f64) -> Self {
        CompactSet::FinitePoints { points: vec![t] }
    }

    /// Symmetric Cantor set with maps `r x` and `r x + 1 - r`.
    pub fn cantor(r: f64) -> Self {
        CompactSet::IfsAttractor {
            ratios: vec![r, r],
            translations: vec![0.0, 1.0 - r],
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn middle_third_cantor() -> Self {
        Self::cantor(1.0 / 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CompactSet::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && a <= b) {
                    return Err(Error::invalid("set", format!("interval [{a}, {b}] must satisfy 0 <= a <= b")));
                }
            }
            CompactSet::FinitePoints { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("set", "finite point set is empty"));
                }
                if points.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::invalid("set", "points must be finite and nonnegative"));
                }
            }
            CompactSet::IfsAttractor {
                ratios,
                translations,
                ..
            } => {
                if ratios.is_empty() || ratios.len() != translations.len() {
                    return Err(Error::invalid("set", "IFS needs equally many ratios and translations"));
                }
                if ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                    return Err(Error::invalid("set", "IFS ratios must lie in (0, 1)"));
                }
                if translations.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return Err(Error::invalid("set", "IFS translations must be finite and nonnegative"));
                }
                let (lo, hi) = self.bounds();
                let mut images: Vec<(f64, f64)> = ratios
                    .iter()
                    .zip(translations)
                    .map(|(r, t)| (r * lo + t, r * hi + t))
                    .collect();
                images.sort_by(|x, y| x.0.total_cmp(&y.0));
                let slack = 1e-12 * (hi - lo).max(1.0);
                if images.windows(2).any(|w| w[1].0 < w[0].1 - slack) {
                    return Err(Error::invalid("set", "IFS first-level images overlap"));
                }
            }
            CompactSet::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::invalid("set", "empty union"));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Smallest closed interval containing the set.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            CompactSet::Interval { a, b } => (*a, *b),
            CompactSet::FinitePoints { points } => (
                points.iter().copied().fold(f64::INFINITY, f64::min),
                points.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            CompactSet::IfsAttractor {
                ratios,
                translations,
                ..
            } => {
                let fixed = ratios.iter().zip(translations).map(|(r, t)| t / (1.0 - r));
                let lo = fixed.clone().fold(f64::INFINITY, f64::min);
                let hi = fixed.fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            CompactSet::Union { parts } => parts.iter().map(|p| p.bounds()).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), (a, b)| (lo.min(a), hi.max(b)),
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        hi - lo
    }

    /// Similarity dimension of an IFS (root of `sum r_i^s = 1`).
    pub fn similarity_dimension(&self) -> Option<f64> {
        match self {
            CompactSet::IfsAttractor { ratios, .. } => {
                let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
                let (mut lo, mut hi) = (0.0, 1.0);
                if f(hi) >= 0.0 {
                    return Some(1.0);
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(0.5 * (lo + hi))
            }
            CompactSet::Interval { a, b } => Some(if a < b { 1.0 } else { 0.0 }),
            CompactSet::FinitePoints { .. } => Some(0.0),
            CompactSet::Union { .. } => None,
        }
    }

    pub fn certificate(&self) -> SelfCoverCertificate {
        let (holds, reason) = match self {
            CompactSet::Interval { .. } => (true, "interval"),
            CompactSet::FinitePoints { .. } => (true, "finite set: every profile vanishes"),
            CompactSet::IfsAttractor { .. } => (true, "self-similar with disjoint first-level images"),
            CompactSet::Union { parts } if parts.len() == 1 => return parts[0].certificate(),
            CompactSet::Union { .. } => (false, "unions are not certified"),
        };
        SelfCoverCertificate {
            holds,
            reason: reason.to_string(),
        }
    }

    fn ifs_depth_for(&self, delta: f64) -> Option<usize> {
        if let CompactSet::IfsAttractor { ratios, .. } = self {
            let rmax = ratios.iter().copied().fold(0.0, f64::max);
            let len = self.diameter();
            let mut k = 0;
            let mut l = len;
            while l > delta * (1.0 + 1e-12) {
                l *= rmax;
                k += 1;
            }
            Some(k)
        } else {
            None
        }
    }

    /// Number of points [`discretize`](Self::discretize) would produce.
    pub fn net_size(&self, delta: f64) -> f64 {
        match self {
            CompactSet::Interval { a, b } => {
                if a == b {
                    1.0
                } else {
                    ((b - a) / delta).ceil() + 1.0
                }
            }
            CompactSet::FinitePoints { points } => points.len() as f64,
            CompactSet::IfsAttractor { ratios, .. } => {
                let k = self.ifs_depth_for(delta).unwrap_or(0);
                2.0 * (ratios.len() as f64).powi(k as i32)
            }
            CompactSet::Union { parts } => parts.iter().map(|p| p.net_size(delta)).sum(),
        }
    }

    pub fn discretize(&self, delta: f64) -> Result<DeltaNet> {
        self.discretize_with_cap(delta, NET_CAP)
    }

    /// A `delta`-net made of points of the set: every point of the set lies
    /// within `delta` of the net.
    pub fn discretize_with_cap(&self, delta: f64, cap: usize) -> Result<DeltaNet> {
        if !(delta > 0.0) {
            return Err(Error::invalid("delta", format!("{delta} must be positive")));
        }
        self.validate()?;
        let estimate = self.net_size(delta);
        if estimate > cap as f64 {
            return Err(Error::MeshTooFine {
                points: estimate,
                cap,
            });
        }
        let mut points = match self {
            CompactSet::Interval { a, b } => {
                if a == b {
                    vec![*a]
                } else {
                    let n = ((b - a) / delta).ceil() as usize;
                    let h = (b - a) / n as f64;
                    (0..=n).map(|k| if k == n { *b } else { a + k as f64 * h }).collect()
                }
            }
            CompactSet::FinitePoints { points } => points.clone(),
            CompactSet::IfsAttractor {
                ratios,
                translations,
                depth,
            } => {
                let k = self.ifs_depth_for(delta).unwrap_or(0);
                if k > *depth {
                    return Err(Error::MeshTooFine {
                        points: estimate,
                        cap,
                    });
                }
                let (lo, hi) = self.bounds();
                let mut maps: Vec<(f64, f64)> = ratios.iter().copied().zip(translations.iter().copied()).collect();
                maps.sort_by(|x, y| x.1.total_cmp(&y.1));
                let mut out = Vec::with_capacity(estimate as usize);
                cylinders(&maps, lo, hi, k, &mut out);
                out
            }
            CompactSet::Union { parts } => {
                let mut all = Vec::new();
                for p in parts {
                    all.extend(p.discretize_with_cap(delta, cap)?.points);
                }
                all
            }
        };
        points.sort_by(f64::total_cmp);
        points.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1.0));
        Ok(DeltaNet {
            points,
            mesh: delta,
            parent: self.id(),
        })
    }

    /// Short descriptor string, accepted back by [`parse`](Self::parse).
    pub fn id(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            CompactSet::Interval { a, b } => format!("interval:{a},{b}"),
            CompactSet::FinitePoints { points } => format!("points:{}", join(points)),
            CompactSet::IfsAttractor {
                ratios,
                translations,
                ..
            } => {
                if ratios.len() == 2 && ratios[0] == ratios[1] && translations == &[0.0, 1.0 - ratios[0]] {
                    if (ratios[0] - 1.0 / 3.0).abs() < 1e-15 {
                        "cantor3".into()
                    } else {
                        format!("cantor:{}", ratios[0])
                    }
                } else {
                    let pairs: Vec<String> = ratios.iter().zip(translations).map(|(r, t)| format!("{r},{t}")).collect();
                    format!("ifs:{}", pairs.join(","))
                }
            }
            CompactSet::Union { parts } => {
                let ids: Vec<String> = parts.iter().map(|p| p.id()).collect();
                format!("union[{}]", ids.join("|"))
            }
        }
    }

    /// Parses `interval:a,b`, `unit`, `points:x,...`, `cantor3`, `cantor:r`,
    /// `ifs:r1,t1,r2,t2,...` and `union[a|b|...]`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let nums = |rest: &str| -> Result<Vec<f64>> {
            rest.split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid("set", format!("`{s}`: {e}")))
        };
        let set = if s == "unit" {
            Self::unit_interval()
        } else if s == "cantor3" {
            Self::middle_third_cantor()
        } else if let Some(inner) = s.strip_prefix("union[").and_then(|r| r.strip_suffix(']')) {
            CompactSet::Union {
                parts: split_top_level(inner).into_iter().map(Self::parse).collect::<Result<_>>()?,
            }
        } else if let Some((kind, rest)) = s.split_once(':') {
            SetDescriptor {
                kind: kind.to_string(),
                params: nums(rest)?,
                depth: None,
                parts: vec![],
            }
            .try_into()?
        } else {
            return Err(Error::invalid("set", format!("unrecognized set `{s}`")));
        };
        set.validate()?;
        Ok(set)
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut level = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => level += 1,
            ']' => level -= 1,
            '|' if level == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn cylinders(maps: &[(f64, f64)], lo: f64, hi: f64, depth: usize, out: &mut Vec<f64>) {
    if depth == 0 {
        out.push(lo);
        out.push(hi);
        return;
    }
    // Composition f_w(x) = f_{w1}(f_{w2}(...)): expanding the outermost map
    // first keeps the output sorted for order-preserving maps.
    for &(r, t) in maps {
        cylinders(maps, r * lo + t, r * hi + t, depth - 1, out);
    }
}

impl TryFrom<SetDescriptor> for CompactSet {
    type Error = Error;

    fn try_from(d: SetDescriptor) -> Result<Self> {
        let depth = d.depth.unwrap_or(DEFAULT_DEPTH);
        let set = match d.kind.as_str() {
            "interval" => match d.params.as_slice() {
                [] => Self::unit_interval(),
                [a, b] => CompactSet::Interval { a: *a, b: *b },
                _ => return Err(Error::invalid("set", "interval takes params [a, b]")),
            },
            "points" | "finite_points" => CompactSet::FinitePoints { points: d.params },
            "cantor" => {
                let r = match d.params.as_slice() {
                    [] => 1.0 / 3.0,
                    [r] => *r,
                    _ => return Err(Error::invalid("set", "cantor takes params [ratio]")),
                };
                if !(r > 0.0 && r < 0.5) {
                    return Err(Error::invalid("set", format!("cantor ratio {r} not in (0, 1/2)")));
                }
                CompactSet::IfsAttractor {
                    ratios: vec![r, r],
                    translations: vec![0.0, 1.0 - r],
                    depth,
                }
            }
            "ifs" => {
                if d.params.is_empty() || !d.params.len().is_multiple_of(2) {
                    return Err(Error::invalid("set", "ifs takes params [r1, t1, r2, t2, ...]"));
                }
                CompactSet::IfsAttractor {
                    ratios: d.params.iter().step_by(2).copied().collect(),
                    translations: d.params.iter().skip(1).step_by(2).copied().collect(),
                    depth,
                }
            }
            "union" => CompactSet::Union {
                parts: d.parts.into_iter().map(CompactSet::try_from).collect::<Result<_>>()?,
            },
            other => return Err(Error::invalid("set", format!("unknown set kind `{other}`"))),
        };
        set.validate()?;
        Ok(set)
    }
}

impl From<CompactSet> for SetDescriptor {
    fn from(s: CompactSet) -> Self {
        let plain = |kind: &str, params: Vec<f64>| SetDescriptor {
            kind: kind.into(),
            params,
            depth: None,
            parts: vec![],
        };
        match s {
            CompactSet::Interval { a, b } => plain("interval", vec![a, b]),
            CompactSet::FinitePoints { points } => plain("points", points),
            CompactSet::IfsAttractor {
                ratios,
                translations,
                depth,
            } => {
                let params = ratios.iter().zip(&translations).flat_map(|(r, t)| [*r, *t]).collect();
                SetDescriptor {
                    kind: "ifs".into(),
                    params,
                    depth: Some(depth),
                    parts: vec![],
                }
            }
            CompactSet::Union { parts } => SetDescriptor {
                kind: "union".into(),
                params: vec![],
                depth: None,
                parts: parts.into_iter().map(Into::into).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_grid() {
        let net = CompactSet::unit_interval().discretize(0.25).unwrap();
        assert_eq!(net.points, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(net.mesh, 0.25);
        assert_eq!(net.parent, "interval:0,1");
    }

    #[test]
    fn cantor_depth_three() {
        let net = CompactSet::middle_third_cantor().discretize(1.0 / 27.0).unwrap();
        let expect: Vec<f64> = [0, 1, 2, 3, 6, 7, 8, 9, 18, 19, 20, 21, 24, 25, 26, 27]
            .iter()
            .map(|k| *k as f64 / 27.0)
            .collect();
        assert_eq!(net.len(), 16);
        for (a, b) in net.points.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn finite_points_ignore_mesh() {
        let s = CompactSet::FinitePoints { points: vec![1.0, 0.0] };
        for d in [1e-6, 0.3, 10.0] {
            assert_eq!(s.discretize(d).unwrap().points, vec![0.0, 1.0]);
        }
    }

    #[test]
    fn mesh_too_fine() {
        assert!(matches!(
            CompactSet::unit_interval().discretize(1e-6),
            Err(Error::MeshTooFine { .. })
        ));
        let shallow = CompactSet::IfsAttractor {
            ratios: vec![1.0 / 3.0; 2],
            translations: vec![0.0, 2.0 / 3.0],
            depth: 3,
        };
        assert!(shallow.discretize(1.0 / 27.0).is_ok());
        assert!(matches!(shallow.discretize(1.0 / 81.0), Err(Error::MeshTooFine { .. })));
    }

    #[test]
    fn net_covers_the_set() {
        // Every depth-8 Cantor endpoint is within delta of the depth-4 net.
        let c = CompactSet::middle_third_cantor();
        let fine = c.discretize(3f64.powi(-8)).unwrap();
        let delta = 3f64.powi(-4);
        let coarse = c.discretize(delta).unwrap();
        for p in &fine.points {
            let d = coarse.points.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min);
            assert!(d <= delta);
        }
    }

    #[test]
    fn overlapping_ifs_rejected() {
        let s = CompactSet::IfsAttractor {
            ratios: vec![0.6, 0.6],
            translations: vec![0.0, 0.4],
            depth: 10,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn descriptors_round_trip() {
        for s in ["unit", "cantor3", "cantor:0.25", "points:0,1,2.5", "interval:0.5,2", "ifs:0.2,0,0.3,0.7", "union[unit|points:3]"] {
            let set = CompactSet::parse(s).unwrap();
            assert_eq!(CompactSet::parse(&set.id()).unwrap(), set);
            let json = serde_json::to_string(&set).unwrap();
            let back: CompactSet = serde_json::from_str(&json).unwrap();
            assert_eq!(back, set);
        }
        let c: CompactSet = serde_json::from_str(r#"{"kind":"cantor","params":[],"depth":12}"#).unwrap();
        assert_eq!(c.bounds(), (0.0, 1.0));
        assert!(CompactSet::parse("interval:2,1").is_err());
    }

    #[test]
    fn similarity_dimension_of_cantor() {
        let d = CompactSet::middle_third_cantor().similarity_dimension().unwrap();
        assert!((d - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    }
}
