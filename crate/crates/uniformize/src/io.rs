//! JSON file formats for maps, angle systems, solutions and summaries.
//!
//! All files are plain JSON with a fixed key order and serde's canonical
//! float formatting, so writing a value, reading it back and writing it
//! again produces byte-identical output. Angles are radians.
//!
//! Map file: `{ "darts": N, "opposite": [N ints], "next_at_vertex": [N
//! ints], "theta": [one radian per edge, edges ordered by smallest dart
//! index] }`. Dart indices are 0-based.
//!
//! Angle-system file: `{ "mode": "full" | "stereo", "face": id or null,
//! "psi": [per-dart radians] }`.
//!
//! Solution file: the angle-system file plus `{ "grad_norm": r,
//! "iterations": n }`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::{AngleSystem, Mode};
use crate::map::{MapError, SurfaceMap, WeightedMap};

/// Why reading or writing a file failed.
#[derive(Debug, Error)]
pub enum IoError {
    /// Filesystem failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Malformed JSON.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// Structurally invalid map data.
    #[error(transparent)]
    Map(#[from] MapError),
    /// Data that parses but does not fit together.
    #[error("invalid file contents: {detail}")]
    Format { detail: String },
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    darts: usize,
    opposite: Vec<usize>,
    next_at_vertex: Vec<usize>,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AngleFile {
    mode: String,
    face: Option<usize>,
    psi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SolutionFileRepr {
    mode: String,
    face: Option<usize>,
    psi: Vec<f64>,
    grad_norm: f64,
    iterations: usize,
}

/// An angle system together with the convergence data of the solve that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub system: AngleSystem,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Summary record emitted by the end-to-end pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    /// Euler characteristic of the input surface.
    pub chi: i64,
    /// Value of the functional at the maximizer.
    #[serde(rename = "L")]
    pub functional: f64,
    /// The same volume through the orthoscheme decomposition.
    pub volume_ortho: f64,
    /// Reduced gradient norm at the maximizer.
    pub grad_norm: f64,
    /// Largest angle or concurrency residual of the realized configuration.
    pub max_residual: f64,
}

/// Unit of the angle values in a file being read. Values are converted to
/// radians before any validation runs; files are always written in radians.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Radians,
    Degrees,
}

impl AngleUnit {
    fn to_radians(self, values: &mut [f64]) {
        if self == AngleUnit::Degrees {
            let scale = std::f64::consts::PI / 180.0;
            for value in values {
                *value *= scale;
            }
        }
    }
}

fn render_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable payload");
    text.push('\n');
    text
}

/// Serializes a weighted map.
pub fn map_to_json(weighted: &WeightedMap) -> String {
    let map = weighted.map();
    let file = MapFile {
        darts: map.dart_count(),
        opposite: map.darts().map(|d| map.opposite(d)).collect(),
        next_at_vertex: map.darts().map(|d| map.next_at_vertex(d)).collect(),
        theta: weighted.thetas().to_vec(),
    };
    render_json(&file)
}

/// Parses a weighted map, verifying all structural invariants.
pub fn map_from_json(text: &str) -> Result<WeightedMap, IoError> {
    map_from_json_as(text, AngleUnit::Radians)
}

/// Parses a weighted map whose weights are written in the given unit.
pub fn map_from_json_as(text: &str, unit: AngleUnit) -> Result<WeightedMap, IoError> {
    let mut file: MapFile = serde_json::from_str(text)?;
    unit.to_radians(&mut file.theta);
    let map = SurfaceMap::build(file.darts, file.opposite, file.next_at_vertex)?;
    Ok(WeightedMap::new(map, file.theta)?)
}

/// Reads a weighted map from a file.
pub fn read_map(path: &Path) -> Result<WeightedMap, IoError> {
    read_map_as(path, AngleUnit::Radians)
}

/// Reads a weighted map whose weights are written in the given unit.
pub fn read_map_as(path: &Path, unit: AngleUnit) -> Result<WeightedMap, IoError> {
    map_from_json_as(&std::fs::read_to_string(path)?, unit)
}

/// Writes a weighted map to a file.
pub fn write_map(path: &Path, weighted: &WeightedMap) -> Result<(), IoError> {
    Ok(std::fs::write(path, map_to_json(weighted))?)
}

fn mode_fields(system: &AngleSystem) -> (String, Option<usize>) {
    match system.mode {
        Mode::Full => ("full".to_string(), None),
        Mode::Stereographic(face) => ("stereo".to_string(), Some(face)),
    }
}

fn system_from_fields(
    weighted: &WeightedMap,
    mode: &str,
    face: Option<usize>,
    psi: Vec<f64>,
) -> Result<AngleSystem, IoError> {
    if psi.len() != weighted.map().dart_count() {
        return Err(IoError::Format {
            detail: format!(
                "psi has {} entries but the map has {} darts",
                psi.len(),
                weighted.map().dart_count()
            ),
        });
    }
    match (mode, face) {
        ("full", None) => Ok(AngleSystem::full(weighted, psi)),
        ("full", Some(_)) => Err(IoError::Format {
            detail: "mode \"full\" must not carry a face".to_string(),
        }),
        ("stereo", Some(face)) => {
            if face >= weighted.map().face_count() {
                return Err(IoError::Format {
                    detail: format!(
                        "face {} does not exist; the map has {} faces",
                        face,
                        weighted.map().face_count()
                    ),
                });
            }
            Ok(AngleSystem {
                psi,
                mode: Mode::Stereographic(face),
                curvature_class: 1,
            })
        }
        ("stereo", None) => Err(IoError::Format {
            detail: "mode \"stereo\" requires a face".to_string(),
        }),
        (other, _) => Err(IoError::Format {
            detail: format!("unknown mode {other:?}; expected \"full\" or \"stereo\""),
        }),
    }
}

/// Serializes an angle system.
pub fn angles_to_json(system: &AngleSystem) -> String {
    let (mode, face) = mode_fields(system);
    render_json(&AngleFile {
        mode,
        face,
        psi: system.psi.clone(),
    })
}

/// Parses an angle system against its map.
pub fn angles_from_json(text: &str, weighted: &WeightedMap) -> Result<AngleSystem, IoError> {
    angles_from_json_as(text, weighted, AngleUnit::Radians)
}

/// Parses an angle system written in the given unit against its map.
pub fn angles_from_json_as(
    text: &str,
    weighted: &WeightedMap,
    unit: AngleUnit,
) -> Result<AngleSystem, IoError> {
    let mut file: AngleFile = serde_json::from_str(text)?;
    unit.to_radians(&mut file.psi);
    system_from_fields(weighted, &file.mode, file.face, file.psi)
}

/// Reads an angle system from a file.
pub fn read_angles(path: &Path, weighted: &WeightedMap) -> Result<AngleSystem, IoError> {
    read_angles_as(path, weighted, AngleUnit::Radians)
}

/// Reads an angle system written in the given unit.
pub fn read_angles_as(
    path: &Path,
    weighted: &WeightedMap,
    unit: AngleUnit,
) -> Result<AngleSystem, IoError> {
    angles_from_json_as(&std::fs::read_to_string(path)?, weighted, unit)
}

/// Writes an angle system to a file.
pub fn write_angles(path: &Path, system: &AngleSystem) -> Result<(), IoError> {
    Ok(std::fs::write(path, angles_to_json(system))?)
}

/// Serializes a solution.
pub fn solution_to_json(solution: &Solution) -> String {
    let (mode, face) = mode_fields(&solution.system);
    render_json(&SolutionFileRepr {
        mode,
        face,
        psi: solution.system.psi.clone(),
        grad_norm: solution.grad_norm,
        iterations: solution.iterations,
    })
}

/// Parses a solution against its map.
pub fn solution_from_json(text: &str, weighted: &WeightedMap) -> Result<Solution, IoError> {
    solution_from_json_as(text, weighted, AngleUnit::Radians)
}

/// Parses a solution whose angles are written in the given unit.
pub fn solution_from_json_as(
    text: &str,
    weighted: &WeightedMap,
    unit: AngleUnit,
) -> Result<Solution, IoError> {
    let mut file: SolutionFileRepr = serde_json::from_str(text)?;
    unit.to_radians(&mut file.psi);
    let system = system_from_fields(weighted, &file.mode, file.face, file.psi)?;
    Ok(Solution {
        system,
        grad_norm: file.grad_norm,
        iterations: file.iterations,
    })
}

/// Reads a solution from a file.
pub fn read_solution(path: &Path, weighted: &WeightedMap) -> Result<Solution, IoError> {
    read_solution_as(path, weighted, AngleUnit::Radians)
}

/// Reads a solution whose angles are written in the given unit.
pub fn read_solution_as(
    path: &Path,
    weighted: &WeightedMap,
    unit: AngleUnit,
) -> Result<Solution, IoError> {
    solution_from_json_as(&std::fs::read_to_string(path)?, weighted, unit)
}

/// Writes a solution to a file.
pub fn write_solution(path: &Path, solution: &Solution) -> Result<(), IoError> {
    Ok(std::fs::write(path, solution_to_json(solution))?)
}

/// Serializes a pipeline summary.
pub fn summary_to_json(summary: &PipelineSummary) -> String {
    render_json(summary)
}

/// Parses a pipeline summary.
pub fn summary_from_json(text: &str) -> Result<PipelineSummary, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::stereographic_subspace;
    use crate::shapes::{weighted_cube, weighted_square_torus};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn map_files_round_trip_byte_identically() {
        let weighted = weighted_square_torus();
        let first = map_to_json(&weighted);
        let reread = map_from_json(&first).unwrap();
        let second = map_to_json(&reread);
        assert_eq!(first, second);
        assert_eq!(reread.map().dart_count(), weighted.map().dart_count());
        assert_eq!(reread.thetas(), weighted.thetas());
    }

    #[test]
    fn degree_valued_files_convert_before_validation() {
        let weighted = weighted_square_torus();
        let mut raw: serde_json::Value = serde_json::from_str(&map_to_json(&weighted)).unwrap();
        let theta: Vec<f64> = raw["theta"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_f64().unwrap().to_degrees())
            .collect();
        raw["theta"] = serde_json::json!(theta);
        let text = raw.to_string();
        // Right angles written as 90 exceed pi, so the radian reader rejects
        // the file while the degree reader recovers the original weights.
        assert!(map_from_json(&text).is_err());
        let converted = map_from_json_as(&text, AngleUnit::Degrees).unwrap();
        for (a, b) in converted.thetas().iter().zip(weighted.thetas()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn angle_files_round_trip_byte_identically() {
        let weighted = weighted_cube();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let system = sub.system(&vec![FRAC_PI_4 + 1e-3; sub.s_star.len()]);
        let first = angles_to_json(&system);
        let reread = angles_from_json(&first, &weighted).unwrap();
        assert_eq!(reread, system);
        assert_eq!(angles_to_json(&reread), first);

        let full = AngleSystem::full(&weighted, vec![FRAC_PI_4; 24]);
        let text = angles_to_json(&full);
        assert!(text.contains("\"face\": null"));
        assert_eq!(angles_from_json(&text, &weighted).unwrap(), full);
    }

    #[test]
    fn solution_files_round_trip_byte_identically() {
        let weighted = weighted_square_torus();
        let solution = Solution {
            system: AngleSystem::full(&weighted, vec![FRAC_PI_4; 16]),
            grad_norm: 3.25e-12,
            iterations: 7,
        };
        let first = solution_to_json(&solution);
        let reread = solution_from_json(&first, &weighted).unwrap();
        assert_eq!(reread, solution);
        assert_eq!(solution_to_json(&reread), first);
    }

    #[test]
    fn summaries_round_trip_with_the_required_keys() {
        let summary = PipelineSummary {
            chi: 0,
            functional: 7.327724805,
            volume_ortho: 7.327724805,
            grad_norm: 1e-12,
            max_residual: 4e-13,
        };
        let text = summary_to_json(&summary);
        for key in ["\"chi\"", "\"L\"", "\"volume_ortho\"", "\"grad_norm\"", "\"max_residual\""] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
        assert_eq!(summary_from_json(&text).unwrap(), summary);
        assert_eq!(summary_to_json(&summary_from_json(&text).unwrap()), text);
    }

    #[test]
    fn malformed_inputs_are_rejected_with_context() {
        let weighted = weighted_square_torus();
        assert!(matches!(
            angles_from_json("{\"mode\":\"full\",\"face\":null,\"psi\":[0.5]}", &weighted),
            Err(IoError::Format { .. })
        ));
        assert!(matches!(
            angles_from_json(
                "{\"mode\":\"stereo\",\"face\":null,\"psi\":[]}",
                &weighted
            ),
            Err(IoError::Format { .. })
        ));
        assert!(matches!(
            map_from_json("{\"darts\":2,\"opposite\":[0,1],\"next_at_vertex\":[0,1],\"theta\":[1.0]}"),
            Err(IoError::Map(_))
        ));
        assert!(matches!(
            map_from_json("not json"),
            Err(IoError::Json(_))
        ));
    }
}
