//! Scenario documents: a self-describing JSON format carrying the grid,
//! the drivable polygons, actor trajectory pairs, and config overrides.
//!
//! Lengths are meters, angles radians, coordinates in a scenario-local
//! frame. Every module invariant is checked on load, and validation errors
//! name the offending field and actor.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Trajectory, WaypointState};
use crate::map::{DrivableMask, Polygon, PolygonSet};

pub const SCHEMA_VERSION: u32 = 1;

/// A truncation radius or the explicit keyword `none` (no truncation).
/// Serialized as a JSON number or the string `"none"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationSetting {
    Radius(f64),
    None,
}

impl TruncationSetting {
    pub fn as_option(self) -> Option<f64> {
        match self {
            TruncationSetting::Radius(v) => Some(v),
            TruncationSetting::None => None,
        }
    }

    pub fn from_option(o: Option<f64>) -> Self {
        match o {
            Some(v) => TruncationSetting::Radius(v),
            None => TruncationSetting::None,
        }
    }
}

impl Serialize for TruncationSetting {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TruncationSetting::Radius(v) => serializer.serialize_f64(*v),
            TruncationSetting::None => serializer.serialize_str("none"),
        }
    }
}

impl<'de> Deserialize<'de> for TruncationSetting {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Radius(f64),
            Keyword(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Radius(v) => Ok(TruncationSetting::Radius(v)),
            Raw::Keyword(s) if s.eq_ignore_ascii_case("none") => Ok(TruncationSetting::None),
            Raw::Keyword(s) => Err(serde::de::Error::custom(format!(
                "truncation_md must be a number or \"none\" (got \"{s}\")"
            ))),
        }
    }
}

/// Optional per-scenario overrides of the loss configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_md: Option<TruncationSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub id: String,
    pub predicted: Trajectory,
    pub ground_truth: Trajectory,
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDoc {
    pub grid: GridSpec,
    pub drivable: PolygonSet,
    pub actors: Vec<Actor>,
    pub config: ConfigOverrides,
}

// ---- raw JSON shapes -------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    length_m: f64,
    width_m: f64,
    cell_l: f64,
    cell_w: f64,
    origin: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonDoc {
    outer: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    holes: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDoc {
    timestep: f64,
    waypoints: Vec<WaypointState>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActorDoc {
    id: String,
    predicted: TrajectoryDoc,
    ground_truth: TrajectoryDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    grid: GridDoc,
    drivable: Vec<PolygonDoc>,
    actors: Vec<ActorDoc>,
    #[serde(default, skip_serializing_if = "is_default_config")]
    config: ConfigOverrides,
}

fn is_default_config(c: &ConfigOverrides) -> bool {
    *c == ConfigOverrides::default()
}

// ---- validation ------------------------------------------------------------

fn validate_config(c: &ConfigOverrides) -> Result<()> {
    if let Some(k) = c.k {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Validation(format!(
                "config.k must be positive and finite (got {k})"
            )));
        }
    }
    if let Some(lambda) = c.lambda {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Validation(format!(
                "config.lambda must be non-negative and finite (got {lambda})"
            )));
        }
    }
    if let Some(TruncationSetting::Radius(md)) = c.truncation_md {
        if !md.is_finite() || md <= 0.0 {
            return Err(Error::Validation(format!(
                "config.truncation_md must be positive and finite (got {md})"
            )));
        }
    }
    if let Some(beta) = c.beta {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Validation(format!(
                "config.beta must be positive and finite (got {beta})"
            )));
        }
    }
    Ok(())
}

impl ScenarioDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: file.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let grid = GridSpec::new(
            file.grid.length_m,
            file.grid.width_m,
            file.grid.cell_l,
            file.grid.cell_w,
            file.grid.origin,
        )
        .map_err(|e| e.context("grid"))?;

        let mut polygons = Vec::with_capacity(file.drivable.len());
        for (idx, poly) in file.drivable.into_iter().enumerate() {
            polygons.push(
                Polygon::new(poly.outer, poly.holes)
                    .map_err(|e| e.context(&format!("drivable polygon {idx}")))?,
            );
        }
        let drivable = PolygonSet::new(polygons);

        if file.actors.is_empty() {
            return Err(Error::Validation("scenario has no actors".into()));
        }
        let mut actors = Vec::with_capacity(file.actors.len());
        let mut shared: Option<(f64, usize)> = None; // (timestep, length)
        for doc in file.actors {
            let id = doc.id;
            if actors.iter().any(|a: &Actor| a.id == id) {
                return Err(Error::Validation(format!("duplicate actor id \"{id}\"")));
            }
            let predicted = Trajectory::new(doc.predicted.waypoints, doc.predicted.timestep)
                .map_err(|e| e.context(&format!("actor \"{id}\": predicted")))?;
            let ground_truth =
                Trajectory::new(doc.ground_truth.waypoints, doc.ground_truth.timestep)
                    .map_err(|e| e.context(&format!("actor \"{id}\": ground_truth")))?;
            for traj in [&predicted, &ground_truth] {
                match shared {
                    None => shared = Some((traj.timestep(), traj.len())),
                    Some((ts, len)) => {
                        if traj.timestep() != ts {
                            return Err(Error::Alignment(format!(
                                "actor \"{id}\": timestep {} differs from the scenario's {ts}",
                                traj.timestep()
                            )));
                        }
                        if traj.len() != len {
                            return Err(Error::Alignment(format!(
                                "actor \"{id}\": trajectory length {} differs from the scenario's {len}",
                                traj.len()
                            )));
                        }
                    }
                }
            }
            actors.push(Actor {
                id,
                predicted,
                ground_truth,
            });
        }

        validate_config(&file.config)?;
        Ok(Self {
            grid,
            drivable,
            actors,
            config: file.config,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            schema_version: SCHEMA_VERSION,
            grid: GridDoc {
                length_m: self.grid.length_m(),
                width_m: self.grid.width_m(),
                cell_l: self.grid.cell_l(),
                cell_w: self.grid.cell_w(),
                origin: self.grid.origin(),
            },
            drivable: self
                .drivable
                .polygons()
                .iter()
                .map(|p| PolygonDoc {
                    outer: p.outer().to_vec(),
                    holes: p.holes().to_vec(),
                })
                .collect(),
            actors: self
                .actors
                .iter()
                .map(|a| ActorDoc {
                    id: a.id.clone(),
                    predicted: TrajectoryDoc {
                        timestep: a.predicted.timestep(),
                        waypoints: a.predicted.waypoints().to_vec(),
                    },
                    ground_truth: TrajectoryDoc {
                        timestep: a.ground_truth.timestep(),
                        waypoints: a.ground_truth.waypoints().to_vec(),
                    },
                })
                .collect(),
            config: self.config,
        };
        serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Drivable mask rasterized on this scenario's grid.
    pub fn mask(&self) -> DrivableMask {
        DrivableMask::rasterize(&self.drivable, &self.grid)
    }

    /// Predicted and ground-truth trajectories in actor order.
    pub fn trajectory_pairs(&self) -> (Vec<Trajectory>, Vec<Trajectory>) {
        (
            self.actors.iter().map(|a| a.predicted.clone()).collect(),
            self.actors.iter().map(|a| a.ground_truth.clone()).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_doc() -> ScenarioDoc {
        let grid = GridSpec::new(20.0, 20.0, 0.1, 0.1, [-10.0, -10.0]).unwrap();
        let drivable = PolygonSet::new(vec![Polygon::new(
            vec![[-10.0, -10.0], [0.0, -10.0], [0.0, 10.0], [-10.0, 10.0]],
            vec![],
        )
        .unwrap()]);
        let wp = WaypointState::new(-3.0, 0.0, 4.0, 2.0, 0.5);
        let traj = Trajectory::new(vec![wp, wp, wp], 0.1).unwrap();
        ScenarioDoc {
            grid,
            drivable,
            actors: vec![Actor {
                id: "a0".into(),
                predicted: traj.clone(),
                ground_truth: traj,
            }],
            config: ConfigOverrides::default(),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let mut doc = minimal_doc();
        doc.config.lambda = Some(0.05);
        doc.config.truncation_md = Some(TruncationSetting::None);
        let json = doc.to_json();
        let back = ScenarioDoc::from_json(&json).unwrap();
        assert_eq!(doc, back);
    }

    #[test]
    fn minimal_file_loads() {
        let json = r#"{
            "schema_version": 1,
            "grid": {"length_m": 10, "width_m": 10, "cell_l": 1, "cell_w": 1, "origin": [-5, -5]},
            "drivable": [{"outer": [[-5, -5], [5, -5], [5, 5], [-5, 5]]}],
            "actors": [{
                "id": "car",
                "predicted": {"timestep": 0.1, "waypoints": [{"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0}]},
                "ground_truth": {"timestep": 0.1, "waypoints": [{"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0}]}
            }]
        }"#;
        let doc = ScenarioDoc::from_json(json).unwrap();
        assert_eq!(doc.actors.len(), 1);
        assert_eq!(doc.grid.nx(), 10);
        assert_eq!(doc.config, ConfigOverrides::default());
    }

    #[test]
    fn zero_width_names_the_actor() {
        let json = r#"{
            "schema_version": 1,
            "grid": {"length_m": 10, "width_m": 10, "cell_l": 1, "cell_w": 1, "origin": [-5, -5]},
            "drivable": [],
            "actors": [{
                "id": "bad-car",
                "predicted": {"timestep": 0.1, "waypoints": [{"x": 0, "y": 0, "l": 4, "w": 0, "theta": 0}]},
                "ground_truth": {"timestep": 0.1, "waypoints": [{"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0}]}
            }]
        }"#;
        let err = ScenarioDoc::from_json(json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad-car") && msg.contains('w'), "{msg}");
    }

    #[test]
    fn mismatched_lengths_are_alignment_errors() {
        let json = r#"{
            "schema_version": 1,
            "grid": {"length_m": 10, "width_m": 10, "cell_l": 1, "cell_w": 1, "origin": [-5, -5]},
            "drivable": [],
            "actors": [{
                "id": "car",
                "predicted": {"timestep": 0.1, "waypoints": [
                    {"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0},
                    {"x": 1, "y": 0, "l": 4, "w": 2, "theta": 0}]},
                "ground_truth": {"timestep": 0.1, "waypoints": [{"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0}]}
            }]
        }"#;
        assert!(matches!(
            ScenarioDoc::from_json(json),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn unsupported_schema_version_is_rejected() {
        let json = r#"{"schema_version": 99, "grid": {"length_m": 10, "width_m": 10,
            "cell_l": 1, "cell_w": 1, "origin": [0, 0]}, "drivable": [], "actors": []}"#;
        assert!(matches!(
            ScenarioDoc::from_json(json),
            Err(Error::SchemaVersion { found: 99, .. })
        ));
    }

    #[test]
    fn truncation_keyword_parses() {
        let mut doc = minimal_doc();
        doc.config.truncation_md = Some(TruncationSetting::None);
        let json = doc.to_json();
        assert!(json.contains("\"none\""));
        let back = ScenarioDoc::from_json(&json).unwrap();
        assert_eq!(back.config.truncation_md, Some(TruncationSetting::None));

        let bad = json.replace("\"none\"", "\"sometimes\"");
        assert!(ScenarioDoc::from_json(&bad).is_err());
    }

    #[test]
    fn duplicate_actor_ids_are_rejected() {
        let mut doc = minimal_doc();
        doc.actors.push(doc.actors[0].clone());
        let json = doc.to_json();
        let err = ScenarioDoc::from_json(&json).unwrap_err();
        assert!(err.to_string().contains("duplicate actor id"));
    }
}
