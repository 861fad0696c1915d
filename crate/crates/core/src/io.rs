//! File formats at the user boundary: JSON requests and responses, CSV
//! traces. Angles are in degrees here and radians everywhere else.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SphereError};
use crate::extremal::SwitchRecord;
use crate::planner::{CandidatePath, PlannerResult};
use crate::sabban::SabbanParams;
use crate::so3::Rotation;
use crate::spherical::{from_rotation, to_rotation, SphericalConfig, SphericalParams};

/// Chart configuration in degrees with an optional turn-rate parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigJson {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub heading_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl ConfigJson {
    pub fn to_config(&self) -> Result<SphericalConfig<f64>> {
        SphericalConfig::from_degrees(self.lat_deg, self.lon_deg, self.heading_deg)
    }

    pub fn from_config(c: &SphericalConfig<f64>, eta: Option<f64>) -> Self {
        let (lat_deg, lon_deg, heading_deg) = c.to_degrees();
        Self {
            lat_deg,
            lon_deg,
            heading_deg,
            eta,
        }
    }
}

/// A configuration given either as a frame or in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Rotation(Rotation<f64>),
    Chart(ConfigJson),
}

impl Endpoint {
    pub fn to_rotation(&self) -> Result<Rotation<f64>> {
        match self {
            Endpoint::Rotation(r) => Ok(*r),
            Endpoint::Chart(c) => to_rotation(&c.to_config()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub start: Endpoint,
    pub goal: Endpoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub allow_out_of_domain: bool,
}

impl PlanRequest {
    /// Exactly one of `u_max` and `eta` must be given.
    pub fn params(&self) -> Result<SabbanParams<f64>> {
        match (self.u_max, self.eta) {
            (Some(u), None) => SabbanParams::new(u),
            (None, Some(eta)) => Ok(SphericalParams::new(eta)?.sabban()),
            _ => Err(SphereError::InvalidParameter(
                "give exactly one of u_max and eta".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub word: String,
    pub lengths: Vec<f64>,
    pub total_length: f64,
    pub residual: f64,
}

impl From<&CandidatePath<f64>> for PathJson {
    fn from(c: &CandidatePath<f64>) -> Self {
        Self {
            word: c.word.to_string(),
            lengths: c.lengths.clone(),
            total_length: c.total_length,
            residual: c.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub word: String,
    pub lengths: Vec<f64>,
    pub total_length: f64,
    pub residual: f64,
    /// Every other accepted candidate, shortest first.
    pub alternatives: Vec<PathJson>,
}

impl From<&PlannerResult<f64>> for PlanResponse {
    fn from(r: &PlannerResult<f64>) -> Self {
        let best = PathJson::from(&r.best);
        let mut alternatives: Vec<PathJson> = r
            .all_solutions
            .iter()
            .filter(|c| **c != r.best)
            .map(PathJson::from)
            .collect();
        // stable sort keeps the word order among equal lengths
        alternatives.sort_by(|a, b| a.total_length.total_cmp(&b.total_length));
        Self {
            word: best.word,
            lengths: best.lengths,
            total_length: best.total_length,
            residual: best.residual,
            alternatives,
        }
    }
}

/// Piece of a control schedule at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlPieceJson {
    pub u: f64,
    pub length: f64,
}

/// Input of the `integrate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateRequest {
    /// Start configuration; `eta` is required.
    pub config: ConfigJson,
    pub control: Vec<ControlPieceJson>,
    pub s_end: f64,
}

#[derive(Serialize)]
struct FrameRow {
    s: f64,
    #[serde(rename = "X1")]
    x1: f64,
    #[serde(rename = "X2")]
    x2: f64,
    #[serde(rename = "X3")]
    x3: f64,
    #[serde(rename = "T1")]
    t1: f64,
    #[serde(rename = "T2")]
    t2: f64,
    #[serde(rename = "T3")]
    t3: f64,
    #[serde(rename = "N1")]
    n1: f64,
    #[serde(rename = "N2")]
    n2: f64,
    #[serde(rename = "N3")]
    n3: f64,
    u: f64,
}

#[derive(Serialize)]
struct ChartRow {
    s: f64,
    lat_deg: f64,
    lon_deg: f64,
    heading_deg: f64,
    u: f64,
}

#[derive(Serialize)]
struct SwitchRow {
    s_switch: f64,
    #[serde(rename = "H12")]
    h12: f64,
    #[serde(rename = "dH12")]
    dh12: f64,
    kappa_before: f64,
    kappa_after: f64,
}

fn csv_error(e: csv::Error) -> SphereError {
    SphereError::InvalidParameter(format!("csv: {e}"))
}

/// Frame trace: `s, X1..X3, T1..T3, N1..N3, u`.
pub fn write_frame_trace<W: Write>(out: W, rows: &[(f64, Rotation<f64>, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["s", "X1", "X2", "X3", "T1", "T2", "T3", "N1", "N2", "N3", "u"])
            .map_err(csv_error)?;
    }
    for (s, g, u) in rows {
        let (x, t, n) = (g.x(), g.t(), g.n());
        w.serialize(FrameRow {
            s: *s,
            x1: x[0],
            x2: x[1],
            x3: x[2],
            t1: t[0],
            t2: t[1],
            t3: t[2],
            n1: n[0],
            n2: n[1],
            n3: n[2],
            u: *u,
        })
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| SphereError::InvalidParameter(format!("io: {e}")))
}

/// Chart trace: `s, lat_deg, lon_deg, heading_deg, u`.
pub fn write_chart_trace<W: Write>(out: W, rows: &[(f64, SphericalConfig<f64>, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["s", "lat_deg", "lon_deg", "heading_deg", "u"])
            .map_err(csv_error)?;
    }
    for (s, c, u) in rows {
        let (lat_deg, lon_deg, heading_deg) = c.to_degrees();
        w.serialize(ChartRow {
            s: *s,
            lat_deg,
            lon_deg,
            heading_deg,
            u: *u,
        })
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| SphereError::InvalidParameter(format!("io: {e}")))
}

/// Chart form of frame samples; samples inside the pole guard are written
/// as `NaN` angles.
pub fn chart_rows_from_frames(rows: &[(f64, Rotation<f64>, f64)]) -> Vec<(f64, SphericalConfig<f64>, f64)> {
    rows.iter()
        .map(|(s, g, u)| {
            let c = from_rotation(g).unwrap_or(SphericalConfig {
                lat: f64::NAN,
                lon: f64::NAN,
                heading: f64::NAN,
            });
            (*s, c, *u)
        })
        .collect()
}

/// Switching record: `s_switch, H12, dH12, kappa_before, kappa_after`.
pub fn write_switching_records<W: Write>(out: W, records: &[SwitchRecord<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(["s_switch", "H12", "dH12", "kappa_before", "kappa_after"])
            .map_err(csv_error)?;
    }
    for r in records {
        w.serialize(SwitchRow {
            s_switch: r.s_switch,
            h12: r.value,
            dh12: r.rate,
            kappa_before: r.control_before,
            kappa_after: r.control_after,
        })
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| SphereError::InvalidParameter(format!("io: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_request_accepts_both_endpoint_forms() {
        let req: PlanRequest = serde_json::from_str(
            r#"{"start": {"lat_deg": 0, "lon_deg": 0, "heading_deg": 90},
                "goal": {"rotation": [1,0,0, 0,1,0, 0,0,1]},
                "u_max": 1.7320508075688772}"#,
        )
        .unwrap();
        assert!(matches!(req.start, Endpoint::Chart(_)));
        assert!(matches!(req.goal, Endpoint::Rotation(_)));
        assert!(!req.allow_out_of_domain);
        assert!((req.params().unwrap().radius() - 0.5).abs() < 1e-15);
        let start = req.start.to_rotation().unwrap();
        assert!((start.t()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plan_request_rejects_bad_schemas() {
        let both = r#"{"start": {"rotation": [1,0,0,0,1,0,0,0,1]}, "goal": {"rotation": [1,0,0,0,1,0,0,0,1]}, "u_max": 2, "eta": 1}"#;
        let req: PlanRequest = serde_json::from_str(both).unwrap();
        assert!(req.params().is_err());
        let not_rotation = r#"{"start": {"rotation": [2,0,0,0,1,0,0,0,1]}, "goal": {"rotation": [1,0,0,0,1,0,0,0,1]}, "u_max": 2}"#;
        assert!(serde_json::from_str::<PlanRequest>(not_rotation).is_err());
        let extra = r#"{"start": {"rotation": [1,0,0,0,1,0,0,0,1]}, "goal": {"rotation": [1,0,0,0,1,0,0,0,1]}, "u_max": 2, "speed": 3}"#;
        assert!(serde_json::from_str::<PlanRequest>(extra).is_err());
    }

    #[test]
    fn trace_headers() {
        let mut buf = Vec::new();
        write_frame_trace(&mut buf, &[(0.0, Rotation::identity(), 1.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "s,X1,X2,X3,T1,T2,T3,N1,N2,N3,u");
        assert_eq!(text.lines().nth(1).unwrap(), "0.0,1.0,0.0,0.0,0.0,1.0,0.0,0.0,0.0,1.0,1.0");

        let mut buf = Vec::new();
        let c = SphericalConfig::from_degrees(10.0, 20.0, 30.0).unwrap();
        write_chart_trace(&mut buf, &[(0.5, c, -1.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "s,lat_deg,lon_deg,heading_deg,u");
        let fields: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
        assert!((fields[1] - 10.0).abs() < 1e-12 && (fields[3] - 30.0).abs() < 1e-12);

        let mut buf = Vec::new();
        write_switching_records(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), "s_switch,H12,dH12,kappa_before,kappa_after");
    }

    #[test]
    fn config_round_trip() {
        let j = ConfigJson {
            lat_deg: 12.5,
            lon_deg: -40.0,
            heading_deg: 170.0,
            eta: Some(1.0),
        };
        let back = ConfigJson::from_config(&j.to_config().unwrap(), j.eta);
        assert!((back.lat_deg - 12.5).abs() < 1e-12 && (back.heading_deg - 170.0).abs() < 1e-12);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(serde_json::from_str::<ConfigJson>(&text).unwrap(), j);
    }
}
