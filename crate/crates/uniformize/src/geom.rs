//! Geometric realization of critical angle systems.
//!
//! Every edge of a weighted map, together with an angle system, determines a
//! geodesic triangle: the two disk centers of its endpoints and the point
//! shared by the disks of the incident face, with angles `psi(s)`, `psi(-s)`
//! and `pi - theta`. This module computes those triangles from the half-side
//! formulas, glues them into a disk configuration in a conformal chart
//! (Poincare disk for negative Euler characteristic, Euclidean plane
//! otherwise), verifies the realized pattern against the prescribed
//! intersection angles, evaluates the volume of the associated ideal
//! polyhedron by two independent routes, and renders the configuration as a
//! deterministic SVG document.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Complex;
use thiserror::Error;

use crate::angles::{self, AngleError, AngleSystem, Mode};
use crate::lobach::{lob, omega, ortho_v};
use crate::map::WeightedMap;

/// A point of a conformal chart, stored as a complex number.
pub type ChartPoint = Complex<f64>;

/// Tolerance on the angle sum of a Euclidean triangle.
const FLAT_SUM_TOL: f64 = 1e-9;
/// Relative mismatch of glued legs beyond which a layout refuses to proceed.
const GLUE_TOL: f64 = 1e-6;
/// Largest perpendicular deviation accepted when fitting a boundary line
/// through face points in the stereographic chart.
const COLLINEAR_TOL: f64 = 1e-6;

/// Which conformal chart a configuration lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Unit disk with the hyperbolic metric.
    Poincare,
    /// Euclidean plane, realizing a flat torus quotient.
    Plane,
    /// Euclidean plane as the image of a sphere configuration under
    /// stereographic projection away from the anchor face point.
    Stereographic,
}

/// Why a geometric operation failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    /// The angle triple admits no non-degenerate triangle of the requested
    /// curvature.
    #[error(
        "no non-degenerate triangle with angles ({alpha}, {beta}, {gamma}) \
         at curvature {curvature}: {detail}"
    )]
    DegenerateTriangle {
        alpha: f64,
        beta: f64,
        gamma: f64,
        curvature: i8,
        detail: String,
    },
    /// Glued legs disagree, so the triangles do not close up into a
    /// configuration; the input angle system is not a critical point.
    #[error("angle system is not critical: {detail}")]
    NotCritical { detail: String },
    /// The face points that should lie on the boundary line of an anchor
    /// face vertex are not collinear.
    #[error("face points around vertex {vertex} deviate from a line by {residual}")]
    BoundaryFit { vertex: usize, residual: f64 },
    /// The combinatorics admit no layout under the supported constructions.
    #[error("layout unsupported: {detail}")]
    Unsupported { detail: String },
    /// An angle-system level failure.
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// A similarity or congruence class of geodesic triangles with the legs
/// produced by the half-side formulas. For zero curvature the legs are only
/// defined up to a common scale and are normalized to the sine of the
/// opposite angle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleShape {
    /// Angle opposite leg `a`.
    pub alpha: f64,
    /// Angle opposite leg `b`.
    pub beta: f64,
    /// Angle opposite leg `c`.
    pub gamma: f64,
    /// Curvature of the ambient geometry: -1, 0 or +1.
    pub curvature: i8,
    /// Leg opposite `alpha`.
    pub a: f64,
    /// Leg opposite `beta`.
    pub b: f64,
    /// Leg opposite `gamma`.
    pub c: f64,
}

/// Computes the legs of the geodesic triangle with the given angles in the
/// geometry of the given curvature, via the half-side formulas
///
/// ```text
/// tanh^2(a/2) = sin(-eta) sin(alpha_hat) / (sin(gamma_hat) sin(beta_hat))   (curvature -1)
/// tan^2(a/2)  = sin(eta) sin(alpha_hat) / (sin(gamma_hat) sin(beta_hat))    (curvature +1)
/// a = sin(alpha)                                                            (curvature 0)
/// ```
///
/// where `eta = (alpha + beta + gamma - pi) / 2` and `alpha_hat = alpha -
/// eta` and so on. Fails when the hat values leave the open box that
/// characterizes non-degenerate triangles.
pub fn triangle_legs(
    alpha: f64,
    beta: f64,
    gamma: f64,
    curvature: i8,
) -> Result<TriangleShape, GeomError> {
    let fail = |detail: &str| GeomError::DegenerateTriangle {
        alpha,
        beta,
        gamma,
        curvature,
        detail: detail.to_string(),
    };
    let eta = 0.5 * (alpha + beta + gamma - PI);
    let hats = [alpha - eta, beta - eta, gamma - eta];
    for &h in &hats {
        if !(h > 0.0 && h < PI) {
            return Err(fail("a hat angle leaves the interval (0, pi)"));
        }
    }
    let legs: [f64; 3] = match curvature {
        0 => {
            if eta.abs() > FLAT_SUM_TOL {
                return Err(fail("the angle sum of a Euclidean triangle must be pi"));
            }
            [alpha.sin(), beta.sin(), gamma.sin()]
        }
        -1 => {
            if eta >= 0.0 {
                return Err(fail(
                    "the angle sum of a hyperbolic triangle must be below pi",
                ));
            }
            let mut legs = [0.0; 3];
            for i in 0..3 {
                let ratio = ((-eta).sin() * hats[i].sin())
                    / (hats[(i + 1) % 3].sin() * hats[(i + 2) % 3].sin());
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(fail("a half-side ratio leaves the interval (0, 1)"));
                }
                legs[i] = 2.0 * ratio.sqrt().atanh();
            }
            legs
        }
        1 => {
            if eta <= 0.0 {
                return Err(fail(
                    "the angle sum of a spherical triangle must exceed pi",
                ));
            }
            if eta >= PI {
                return Err(fail("the angle excess must stay below two pi"));
            }
            let mut legs = [0.0; 3];
            for i in 0..3 {
                let ratio = (eta.sin() * hats[i].sin())
                    / (hats[(i + 1) % 3].sin() * hats[(i + 2) % 3].sin());
                if ratio <= 0.0 {
                    return Err(fail("a half-side ratio must be positive"));
                }
                legs[i] = 2.0 * ratio.sqrt().atan();
            }
            legs
        }
        other => {
            return Err(GeomError::DegenerateTriangle {
                alpha,
                beta,
                gamma,
                curvature: other,
                detail: "curvature must be -1, 0 or +1".to_string(),
            })
        }
    };
    Ok(TriangleShape {
        alpha,
        beta,
        gamma,
        curvature,
        a: legs[0],
        b: legs[1],
        c: legs[2],
    })
}

/// The realized triangle of one dart: the disk centers of its two endpoints
/// and the face point of its face, in chart coordinates, ordered so that the
/// walk vertex corner, opposite corner, face corner is counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DartPlacement {
    /// The dart whose triangle this is.
    pub dart: usize,
    /// Chart position of the disk center at the dart's vertex.
    pub vertex_corner: ChartPoint,
    /// Chart position of the disk center at the other end of the edge.
    pub opposite_corner: ChartPoint,
    /// Chart position of the face point.
    pub face_corner: ChartPoint,
    /// Chart-metric length of the leg from the vertex corner to the face
    /// corner; this is the disk radius candidate at the dart's vertex.
    pub vertex_leg: f64,
    /// Chart-metric length of the leg from the opposite corner to the face
    /// corner.
    pub opposite_leg: f64,
}

/// A disk whose boundary is a straight line in the stereographic chart: the
/// disk of an anchor face vertex, passing through the projection point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLine {
    /// The anchor face vertex whose disk this line bounds.
    pub vertex: usize,
    /// A point on the line.
    pub point: ChartPoint,
    /// Unit direction of the line.
    pub direction: ChartPoint,
    /// Unit normal pointing into the half-plane covered by the disk.
    pub normal: ChartPoint,
}

/// A realized disk configuration in a conformal chart.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskConfiguration {
    /// The chart the coordinates live in.
    pub chart: Chart,
    /// One center per vertex, from its first realized triangle; `None` for
    /// anchor face vertices of a stereographic configuration.
    pub centers: Vec<Option<ChartPoint>>,
    /// Chart-metric disk radius per vertex (hyperbolic in the Poincare
    /// chart); `None` exactly where `centers` is `None`.
    pub radii: Vec<Option<f64>>,
    /// One point per face; `None` exactly on the anchor face, whose point is
    /// the point at infinity of the stereographic chart.
    pub face_points: Vec<Option<ChartPoint>>,
    /// The realized triangles covering one fundamental domain, in traversal
    /// order; one entry per realized dart.
    pub placements: Vec<DartPlacement>,
    /// Distinct realized center positions as pairs of vertex id and chart
    /// point, in order of first realization. A vertex on the boundary of the
    /// fundamental domain appears once per lift.
    pub vertex_lifts: Vec<(usize, ChartPoint)>,
    /// Boundary lines of the anchor face vertices; empty off the sphere.
    pub lines: Vec<BoundaryLine>,
    /// Two generators of the deck translation lattice, present only for flat
    /// torus configurations that realize enough identifications to span it.
    pub periods: Option<[ChartPoint; 2]>,
    /// Global scale convention: the chart length assigned to the first
    /// realized center-to-center leg in the flat charts, `1.0` in the
    /// hyperbolic chart where lengths are absolute.
    pub scale: f64,
}

/// Residuals of a realized configuration against its prescribed data.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Largest deviation, in radians, of a realized intersection angle from
    /// the weight of its edge, over all realized edges, boundary lines
    /// included.
    pub max_angle_residual: f64,
    /// Largest chart-Euclidean distance of a face point from the boundary
    /// circle or line of an incident disk.
    pub max_concurrency_residual: f64,
    /// Number of angle comparisons made.
    pub angle_checks: usize,
    /// Number of concurrency comparisons made.
    pub concurrency_checks: usize,
}

fn rot(angle: f64) -> ChartPoint {
    Complex::new(angle.cos(), angle.sin())
}

fn mobius_to_origin(p: ChartPoint, z: ChartPoint) -> ChartPoint {
    (z - p) / (Complex::new(1.0, 0.0) - p.conj() * z)
}

fn mobius_from_origin(p: ChartPoint, z: ChartPoint) -> ChartPoint {
    (z + p) / (Complex::new(1.0, 0.0) + p.conj() * z)
}

/// Hyperbolic distance between two points of the Poincare disk.
pub fn hyperbolic_distance(p: ChartPoint, q: ChartPoint) -> f64 {
    2.0 * mobius_to_origin(p, q).norm().atanh()
}

/// Distance in the chart's own metric.
fn chart_metric(chart: Chart, p: ChartPoint, q: ChartPoint) -> f64 {
    match chart {
        Chart::Poincare => hyperbolic_distance(p, q),
        Chart::Plane | Chart::Stereographic => (p - q).norm(),
    }
}

/// Euclidean center and radius of the chart circle bounding the disk of
/// chart-metric radius `radius` around `center`. In the flat charts this is
/// the identity; in the Poincare chart it converts a hyperbolic circle into
/// the Euclidean circle that draws it.
pub fn euclidean_circle(chart: Chart, center: ChartPoint, radius: f64) -> (ChartPoint, f64) {
    match chart {
        Chart::Plane | Chart::Stereographic => (center, radius),
        Chart::Poincare => {
            let t = (radius / 2.0).tanh();
            let n2 = center.norm_sqr();
            let denom = 1.0 - t * t * n2;
            (
                center * ((1.0 - t * t) / denom),
                t * (1.0 - n2) / denom,
            )
        }
    }
}

/// The angles and legs of one dart's triangle, oriented from the dart's own
/// vertex: `angle_v` at the dart's vertex, `angle_w` at the opposite vertex,
/// `leg_v` from the dart's vertex to the face point, `leg_w` from the
/// opposite vertex to the face point, `center` between the two centers.
#[derive(Debug, Clone, PartialEq)]
struct DartShape {
    angle_v: f64,
    angle_w: f64,
    leg_v: f64,
    leg_w: f64,
    center: f64,
}

/// Builds the per-dart triangle shapes. Pinned darts of a stereographic
/// system carry no triangle and map to `None`.
fn dart_shapes(
    weighted: &WeightedMap,
    system: &AngleSystem,
) -> Result<Vec<Option<DartShape>>, GeomError> {
    let map = weighted.map();
    let curvature = match system.mode {
        Mode::Stereographic(_) => 0,
        Mode::Full => system.curvature_class,
    };
    let free: Vec<bool> = match system.mode {
        Mode::Full => vec![true; map.dart_count()],
        Mode::Stereographic(face) => {
            let sub = angles::stereographic_subspace(weighted, face)?;
            sub.star_dart
        }
    };
    let mut shapes = vec![None; map.dart_count()];
    for e in 0..map.edge_count() {
        let [s, t] = map.edge_darts(e);
        if !free[s] {
            continue;
        }
        let gamma = PI - weighted.theta(e);
        let shape = triangle_legs(system.psi[s], system.psi[t], gamma, curvature)?;
        shapes[s] = Some(DartShape {
            angle_v: shape.alpha,
            angle_w: shape.beta,
            leg_v: shape.b,
            leg_w: shape.a,
            center: shape.c,
        });
        shapes[t] = Some(DartShape {
            angle_v: shape.beta,
            angle_w: shape.alpha,
            leg_v: shape.a,
            leg_w: shape.b,
            center: shape.c,
        });
    }
    Ok(shapes)
}

/// Places the point at chart distance `dist` from `from`, in the direction
/// of `toward` rotated counterclockwise by `angle`.
fn place_at(chart: Chart, from: ChartPoint, toward: ChartPoint, angle: f64, dist: f64) -> ChartPoint {
    match chart {
        Chart::Plane | Chart::Stereographic => {
            let u = (toward - from) / (toward - from).norm();
            from + u * rot(angle) * dist
        }
        Chart::Poincare => {
            let w = mobius_to_origin(from, toward);
            let u = w / w.norm();
            mobius_from_origin(from, u * rot(angle) * (dist / 2.0).tanh())
        }
    }
}

/// Relative disagreement between two glued leg lengths.
fn relative_mismatch(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

/// Lays out the configuration of a critical angle system in its chart,
/// traversing the triangles from the lowest realizable dart.
pub fn layout(weighted: &WeightedMap, system: &AngleSystem) -> Result<DiskConfiguration, GeomError> {
    layout_rooted(weighted, system, None)
}

/// [`layout`] with an explicit root dart. Re-rooting changes all coordinates
/// by a chart isometry (and a similarity in the flat charts) but not the
/// realized pattern.
pub fn layout_rooted(
    weighted: &WeightedMap,
    system: &AngleSystem,
    root: Option<usize>,
) -> Result<DiskConfiguration, GeomError> {
    let map = weighted.map();
    let chart = match system.mode {
        Mode::Stereographic(_) => Chart::Stereographic,
        Mode::Full => match system.curvature_class {
            c if c < 0 => Chart::Poincare,
            0 => Chart::Plane,
            _ => {
                return Err(GeomError::Unsupported {
                    detail: "a sphere configuration is laid out from a stereographic system, \
                             not a full one"
                        .to_string(),
                })
            }
        },
    };
    let shapes = dart_shapes(weighted, system)?;
    let absolute = chart == Chart::Poincare;

    let root = match root {
        Some(d) => {
            if shapes.get(d).map_or(true, Option::is_none) {
                return Err(GeomError::Unsupported {
                    detail: format!("root dart {d} carries no triangle"),
                });
            }
            Some(d)
        }
        None => (0..map.dart_count()).find(|&d| shapes[d].is_some()),
    };

    let mut placements: Vec<Option<DartPlacement>> = vec![None; map.dart_count()];
    let mut order: Vec<usize> = Vec::new();
    let mut period_candidates: Vec<ChartPoint> = Vec::new();

    if let Some(root) = root {
        let shape = shapes[root].as_ref().expect("root carries a triangle");
        let scale = if absolute { 1.0 } else { 1.0 / shape.center };
        let a = Complex::new(0.0, 0.0);
        let b = if absolute {
            Complex::new((shape.center / 2.0).tanh(), 0.0)
        } else {
            Complex::new(1.0, 0.0)
        };
        let f = place_at(
            chart,
            a,
            b,
            shape.angle_v,
            if absolute { shape.leg_v } else { shape.leg_v * scale },
        );
        placements[root] = Some(DartPlacement {
            dart: root,
            vertex_corner: a,
            opposite_corner: b,
            face_corner: f,
            vertex_leg: if absolute { shape.leg_v } else { shape.leg_v * scale },
            opposite_leg: chart_metric(chart, b, f),
        });
        order.push(root);

        // Face predecessor of each dart, for the third traversal move.
        let mut phi_inv = vec![0usize; map.dart_count()];
        for d in map.darts() {
            phi_inv[map.next_in_face(d)] = d;
        }

        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(d) = queue.pop_front() {
            let here = placements[d].clone().expect("queued darts are placed");
            let moves = [map.opposite(d), map.next_in_face(d), phi_inv[d]];
            for (k, &t) in moves.iter().enumerate() {
                let Some(shape) = shapes[t].as_ref() else {
                    continue;
                };
                if let Some(existing) = placements[t].as_ref() {
                    // Already realized: compare the shared leg through this
                    // transition. Lifts may differ by a deck transformation,
                    // so only lengths are compared, and in the flat torus
                    // chart the mismatch of the two center positions is a
                    // deck translation worth recording.
                    let (shared_here, shared_there) = match k {
                        0 => (
                            chart_metric(chart, here.vertex_corner, here.opposite_corner),
                            chart_metric(
                                chart,
                                existing.vertex_corner,
                                existing.opposite_corner,
                            ),
                        ),
                        1 => (here.opposite_leg, existing.vertex_leg),
                        _ => (here.vertex_leg, existing.opposite_leg),
                    };
                    let mismatch = relative_mismatch(shared_here, shared_there);
                    if mismatch > GLUE_TOL {
                        return Err(GeomError::NotCritical {
                            detail: format!(
                                "legs shared by darts {d} and {t} disagree by a relative {mismatch:.3e}"
                            ),
                        });
                    }
                    if chart == Chart::Plane {
                        // The two lifts of the shared side must differ by a
                        // pure translation; a rotational component means the
                        // triangles do not close up around some vertex.
                        let pairs = match k {
                            0 => [
                                (here.opposite_corner, existing.vertex_corner),
                                (here.vertex_corner, existing.opposite_corner),
                            ],
                            1 => [
                                (here.opposite_corner, existing.vertex_corner),
                                (here.face_corner, existing.face_corner),
                            ],
                            _ => [
                                (here.vertex_corner, existing.opposite_corner),
                                (here.face_corner, existing.face_corner),
                            ],
                        };
                        let d1 = pairs[0].0 - pairs[0].1;
                        let d2 = pairs[1].0 - pairs[1].1;
                        if (d1 - d2).norm() > GLUE_TOL {
                            return Err(GeomError::NotCritical {
                                detail: format!(
                                    "the gluing holonomy between darts {d} and {t} is not a \
                                     translation"
                                ),
                            });
                        }
                        if d1.norm() > 1e-9 {
                            period_candidates.push(d1);
                        }
                    }
                    if chart == Chart::Stereographic {
                        // The stereographic chart is global: the two
                        // realizations must coincide outright.
                        let (p, q) = match k {
                            0 => (here.opposite_corner, existing.vertex_corner),
                            1 => (here.face_corner, existing.face_corner),
                            _ => (here.face_corner, existing.face_corner),
                        };
                        let drift = (p - q).norm();
                        if drift > GLUE_TOL {
                            return Err(GeomError::NotCritical {
                                detail: format!(
                                    "darts {d} and {t} realize a shared point {drift:.3e} apart"
                                ),
                            });
                        }
                    }
                    continue;
                }
                let placement = match k {
                    0 => {
                        // Opposite dart: same center segment, new face point
                        // on the other side.
                        let a = here.opposite_corner;
                        let b = here.vertex_corner;
                        let leg = if absolute {
                            shape.leg_v
                        } else {
                            (a - b).norm() * shape.leg_v / shape.center
                        };
                        let f = place_at(chart, a, b, shape.angle_v, leg);
                        DartPlacement {
                            dart: t,
                            vertex_corner: a,
                            opposite_corner: b,
                            face_corner: f,
                            vertex_leg: leg,
                            opposite_leg: chart_metric(chart, b, f),
                        }
                    }
                    1 => {
                        // Face successor: shares the vertex-to-face-point leg.
                        let a = here.opposite_corner;
                        let f = here.face_corner;
                        if absolute {
                            let mismatch = relative_mismatch(here.opposite_leg, shape.leg_v);
                            if mismatch > GLUE_TOL {
                                return Err(GeomError::NotCritical {
                                    detail: format!(
                                        "legs glued from dart {d} to {t} disagree by a relative {mismatch:.3e}"
                                    ),
                                });
                            }
                        }
                        let center_len = if absolute {
                            shape.center
                        } else {
                            (f - a).norm() * shape.center / shape.leg_v
                        };
                        let b = place_at(chart, a, f, -shape.angle_v, center_len);
                        DartPlacement {
                            dart: t,
                            vertex_corner: a,
                            opposite_corner: b,
                            face_corner: f,
                            vertex_leg: chart_metric(chart, a, f),
                            opposite_leg: chart_metric(chart, b, f),
                        }
                    }
                    _ => {
                        // Face predecessor: shares the face point and its leg
                        // to this dart's vertex corner.
                        let b = here.vertex_corner;
                        let f = here.face_corner;
                        if absolute {
                            let mismatch = relative_mismatch(here.vertex_leg, shape.leg_w);
                            if mismatch > GLUE_TOL {
                                return Err(GeomError::NotCritical {
                                    detail: format!(
                                        "legs glued from dart {d} to {t} disagree by a relative {mismatch:.3e}"
                                    ),
                                });
                            }
                        }
                        let center_len = if absolute {
                            shape.center
                        } else {
                            (f - b).norm() * shape.center / shape.leg_w
                        };
                        let a = place_at(chart, b, f, shape.angle_w, center_len);
                        DartPlacement {
                            dart: t,
                            vertex_corner: a,
                            opposite_corner: b,
                            face_corner: f,
                            vertex_leg: chart_metric(chart, a, f),
                            opposite_leg: chart_metric(chart, b, f),
                        }
                    }
                };
                placements[t] = Some(placement);
                order.push(t);
                queue.push_back(t);
            }
        }
    }

    if let Some(unreached) = (0..map.dart_count()).find(|&d| shapes[d].is_some() && placements[d].is_none())
    {
        return Err(GeomError::Unsupported {
            detail: format!(
                "the triangles do not form a connected region; dart {unreached} was never reached"
            ),
        });
    }

    // Collect per-vertex data from the realized triangles.
    let mut centers: Vec<Option<ChartPoint>> = vec![None; map.vertex_count()];
    let mut radii: Vec<Option<f64>> = vec![None; map.vertex_count()];
    let mut face_points: Vec<Option<ChartPoint>> = vec![None; map.face_count()];
    let mut vertex_lifts: Vec<(usize, ChartPoint)> = Vec::new();
    let record_lift = |lifts: &mut Vec<(usize, ChartPoint)>, v: usize, p: ChartPoint| {
        let seen = lifts
            .iter()
            .any(|&(u, q)| u == v && (q - p).norm() < 1e-9);
        if !seen {
            lifts.push((v, p));
        }
    };
    let ordered: Vec<&DartPlacement> = order
        .iter()
        .map(|&d| placements[d].as_ref().expect("ordered darts are placed"))
        .collect();
    for placement in &ordered {
        let v = map.vertex_of(placement.dart);
        let w = map.vertex_of(map.opposite(placement.dart));
        let f = map.face_of(placement.dart);
        if centers[v].is_none() {
            centers[v] = Some(placement.vertex_corner);
            radii[v] = Some(placement.vertex_leg);
        }
        if centers[w].is_none() {
            centers[w] = Some(placement.opposite_corner);
            radii[w] = Some(placement.opposite_leg);
        }
        if face_points[f].is_none() {
            face_points[f] = Some(placement.face_corner);
        }
        record_lift(&mut vertex_lifts, v, placement.vertex_corner);
        record_lift(&mut vertex_lifts, w, placement.opposite_corner);
    }

    let mut config = DiskConfiguration {
        chart,
        centers,
        radii,
        face_points,
        placements: ordered.into_iter().cloned().collect(),
        vertex_lifts,
        lines: Vec::new(),
        periods: None,
        scale: 1.0,
    };

    match chart {
        Chart::Plane => {
            config.periods = reduce_lattice(&period_candidates);
        }
        Chart::Stereographic => {
            let Mode::Stereographic(face) = system.mode else {
                unreachable!("stereographic charts come from stereographic systems");
            };
            complete_stereographic(weighted, system, face, &mut config)?;
        }
        Chart::Poincare => {}
    }
    Ok(config)
}

/// Fills the stereographic configuration beyond its realized triangles:
/// face points of faces without free edges, placed on the circles of the
/// free vertices by walking the pinned angles, and the boundary lines of the
/// anchor face vertices through the face points of their other faces.
fn complete_stereographic(
    weighted: &WeightedMap,
    system: &AngleSystem,
    face: usize,
    config: &mut DiskConfiguration,
) -> Result<(), GeomError> {
    let map = weighted.map();
    let sub = angles::stereographic_subspace(weighted, face)?;

    // A configuration with no free edge is a single wheel around one free
    // vertex; anchor it at the origin with unit radius.
    if config.placements.is_empty() {
        if sub.v_star.len() != 1 {
            return Err(GeomError::Unsupported {
                detail: format!(
                    "no free edges but {} free vertices; the relative position of their \
                     disks is not determined by triangles",
                    sub.v_star.len()
                ),
            });
        }
        let apex = sub.v_star[0];
        config.centers[apex] = Some(Complex::new(0.0, 0.0));
        config.radii[apex] = Some(1.0);
        config
            .vertex_lifts
            .push((apex, Complex::new(0.0, 0.0)));
    }

    // Around every free vertex, walk the corners in realized order (the
    // face of each dart sits counterclockwise after the dart's own ray) and
    // place the face points of faces that no triangle realized.
    for &u in &sub.v_star {
        let Some(m) = config.centers[u] else {
            return Err(GeomError::Unsupported {
                detail: format!("free vertex {u} was never realized"),
            });
        };
        let rho = config.radii[u].expect("realized vertices carry a radius");
        // Realized corner walk: starting from the lowest dart at u, the next
        // dart counterclockwise is the previous one in vertex order.
        let cycle_src = map.vertex_darts(u);
        let mut cycle = Vec::with_capacity(cycle_src.len());
        let mut d = cycle_src[0];
        for _ in 0..cycle_src.len() {
            cycle.push(d);
            let pos = cycle_src
                .iter()
                .position(|&x| x == d)
                .expect("dart lies in its vertex orbit");
            d = cycle_src[(pos + cycle_src.len() - 1) % cycle_src.len()];
        }
        // Propagated polar angle of the face point of face_of(cycle[i]):
        // consecutive face rays differ by the full corner of the quadrangle
        // crossed between them, twice the angle of the new dart.
        let mut prop = vec![0.0f64; cycle.len()];
        let mut acc = system.psi[cycle[0]];
        prop[0] = acc;
        for i in 1..cycle.len() {
            acc += 2.0 * system.psi[cycle[i]];
            prop[i] = acc;
        }
        // Anchor the walk on the first face point a triangle realized.
        let mut offset = None;
        for (i, &dart) in cycle.iter().enumerate() {
            if let Some(p) = config.face_points[map.face_of(dart)] {
                offset = Some((p - m).arg() - prop[i]);
                break;
            }
        }
        let offset = offset.unwrap_or(-prop[0]);
        for (i, &dart) in cycle.iter().enumerate() {
            let f = map.face_of(dart);
            if f == face {
                continue;
            }
            if config.face_points[f].is_none() {
                config.face_points[f] = Some(m + rot(prop[i] + offset) * rho);
            }
        }
    }

    // Boundary lines: through the face points of each anchor vertex's
    // non-anchor faces.
    let mut anchor_vertices: Vec<usize> = (0..map.vertex_count())
        .filter(|&v| sub.vertex_on_face[v])
        .collect();
    anchor_vertices.sort_unstable();
    for w in anchor_vertices {
        let mut points: Vec<ChartPoint> = Vec::new();
        for &d in map.vertex_darts(w) {
            let f = map.face_of(d);
            if f == face {
                continue;
            }
            if let Some(p) = config.face_points[f] {
                if points.iter().all(|&q| (q - p).norm() > 1e-12) {
                    points.push(p);
                }
            }
        }
        if points.len() < 2 {
            return Err(GeomError::Unsupported {
                detail: format!(
                    "vertex {w} on the anchor face is incident to fewer than two realized \
                     face points; its boundary line is underdetermined"
                ),
            });
        }
        let mean = points.iter().sum::<ChartPoint>() / points.len() as f64;
        // Principal direction of the centered points.
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in &points {
            let d = p - mean;
            sxx += d.re * d.re;
            sxy += d.re * d.im;
            syy += d.im * d.im;
        }
        let half = 0.5 * (sxx + syy);
        let det = ((0.5 * (sxx - syy)).powi(2) + sxy * sxy).sqrt();
        let lead = half + det;
        let dir = if sxy.abs() > 1e-300 {
            let v = Complex::new(lead - syy, sxy);
            v / v.norm()
        } else if sxx >= syy {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 1.0)
        };
        let normal = dir * rot(std::f64::consts::FRAC_PI_2);
        let residual = points
            .iter()
            .map(|p| ((p - mean).re * normal.re + (p - mean).im * normal.im).abs())
            .fold(0.0f64, f64::max);
        let span = points
            .iter()
            .map(|p| (p - mean).norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        if residual > COLLINEAR_TOL * span {
            return Err(GeomError::BoundaryFit {
                vertex: w,
                residual,
            });
        }
        // Orient the normal into the half-plane of the disk using a free
        // neighbor: the signed distance of its center must be -rho cos
        // theta.
        let mut normal = normal;
        for &d in map.vertex_darts(w) {
            let v = map.vertex_of(map.opposite(d));
            if sub.vertex_on_face[v] {
                continue;
            }
            if let (Some(c), Some(r)) = (config.centers[v], config.radii[v]) {
                let h = (c - mean).re * normal.re + (c - mean).im * normal.im;
                let want = -r * weighted.theta_of_dart(d).cos();
                if (h - want).abs() > (-h - want).abs() {
                    normal = -normal;
                }
                break;
            }
        }
        config.lines.push(BoundaryLine {
            vertex: w,
            point: mean,
            direction: dir,
            normal,
        });
    }
    Ok(())
}

/// Gauss reduction of the collected deck translation vectors to two short
/// lattice generators.
fn reduce_lattice(candidates: &[ChartPoint]) -> Option<[ChartPoint; 2]> {
    let mut vecs: Vec<ChartPoint> = Vec::new();
    for &c in candidates {
        if vecs.iter().all(|&v| (v - c).norm() > 1e-9 && (v + c).norm() > 1e-9) {
            vecs.push(c);
        }
    }
    if vecs.is_empty() {
        return None;
    }
    let norm_key = |v: &ChartPoint| (v.norm(), v.re, v.im);
    vecs.sort_by(|a, b| norm_key(a).partial_cmp(&norm_key(b)).expect("finite norms"));
    let mut u = vecs[0];
    let mut w = vecs.iter().copied().find(|&v| {
        (u.re * v.im - u.im * v.re).abs() > 1e-9 * u.norm() * v.norm()
    })?;
    loop {
        // Subtract the nearest multiple of the shorter vector.
        let mu = ((w.re * u.re + w.im * u.im) / u.norm_sqr()).round();
        w -= u * mu;
        if w.norm() < u.norm() {
            std::mem::swap(&mut u, &mut w);
        } else if mu == 0.0 {
            break;
        }
    }
    // Canonical signs: positive horizontal component, then positive vertical.
    let canon = |mut v: ChartPoint| {
        if v.re < -1e-12 || (v.re.abs() <= 1e-12 && v.im < 0.0) {
            v = -v;
        }
        v
    };
    let (u, w) = (canon(u), canon(w));
    let (u, w) = if norm_key(&u) <= norm_key(&w) { (u, w) } else { (w, u) };
    Some([u, w])
}

/// The cosine of the intersection angle of two chart circles realized by
/// Euclidean data, from the law of cosines at an intersection point.
fn circle_angle_cos(c1: ChartPoint, r1: f64, c2: ChartPoint, r2: f64) -> f64 {
    let d2 = (c1 - c2).norm_sqr();
    (d2 - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
}

/// Verifies a realized configuration against its weighted map: intersection
/// angles of the realized disks against the edge weights, and concurrency of
/// the face points with the incident disk boundaries.
pub fn check_configuration(
    config: &DiskConfiguration,
    weighted: &WeightedMap,
) -> ResidualReport {
    let map = weighted.map();
    let mut report = ResidualReport {
        max_angle_residual: 0.0,
        max_concurrency_residual: 0.0,
        angle_checks: 0,
        concurrency_checks: 0,
    };
    let angle = |report: &mut ResidualReport, realized_cos: f64, theta: f64| {
        let realized = realized_cos.clamp(-1.0, 1.0).acos();
        report.max_angle_residual = report.max_angle_residual.max((realized - theta).abs());
        report.angle_checks += 1;
    };

    // Per realized triangle: the two disks of its edge in its own lift.
    for placement in &config.placements {
        let e = map.edge_of(placement.dart);
        let theta = weighted.theta(e);
        let (cv, rv) = euclidean_circle(config.chart, placement.vertex_corner, placement.vertex_leg);
        let (cw, rw) = euclidean_circle(
            config.chart,
            placement.opposite_corner,
            placement.opposite_leg,
        );
        angle(&mut report, circle_angle_cos(cv, rv, cw, rw), theta);
        // Face point on both circles, measured in the chart plane.
        for (c, r) in [(cv, rv), (cw, rw)] {
            let residual = ((placement.face_corner - c).norm() - r).abs();
            report.max_concurrency_residual = report.max_concurrency_residual.max(residual);
            report.concurrency_checks += 1;
        }
    }

    // Face points assigned beyond the triangles (stereographic wheels):
    // check them against every incident realized disk.
    if config.chart == Chart::Stereographic {
        let realized_by_triangle: std::collections::HashSet<usize> = config
            .placements
            .iter()
            .map(|p| map.face_of(p.dart))
            .collect();
        for f in 0..map.face_count() {
            if realized_by_triangle.contains(&f) {
                continue;
            }
            let Some(p) = config.face_points[f] else {
                continue;
            };
            for &d in map.face_darts(f) {
                let v = map.vertex_of(d);
                if let (Some(c), Some(r)) = (config.centers[v], config.radii[v]) {
                    let residual = ((p - c).norm() - r).abs();
                    report.max_concurrency_residual =
                        report.max_concurrency_residual.max(residual);
                    report.concurrency_checks += 1;
                }
            }
        }
        // Boundary lines: angles against free disks and against each other,
        // and concurrency with the face points that define them.
        let line_of: std::collections::HashMap<usize, &BoundaryLine> =
            config.lines.iter().map(|l| (l.vertex, l)).collect();
        for e in 0..map.edge_count() {
            let [x, y] = map.edge_endpoints(e);
            let theta = weighted.theta(e);
            match (line_of.get(&x), line_of.get(&y)) {
                (Some(lx), Some(ly)) => {
                    let dot = lx.normal.re * ly.normal.re + lx.normal.im * ly.normal.im;
                    angle(&mut report, -dot, theta);
                }
                (Some(l), None) | (None, Some(l)) => {
                    let v = if line_of.contains_key(&x) { y } else { x };
                    if let (Some(c), Some(r)) = (config.centers[v], config.radii[v]) {
                        let h = (c - l.point).re * l.normal.re + (c - l.point).im * l.normal.im;
                        angle(&mut report, -h / r, theta);
                    }
                }
                (None, None) => {}
            }
        }
        for line in &config.lines {
            for &d in map.vertex_darts(line.vertex) {
                let f = map.face_of(d);
                if let Some(Some(p)) = config.face_points.get(f) {
                    let h = (p - line.point).re * line.normal.re
                        + (p - line.point).im * line.normal.im;
                    report.max_concurrency_residual =
                        report.max_concurrency_residual.max(h.abs());
                    report.concurrency_checks += 1;
                }
            }
        }
    }
    report
}

/// Hyperbolic areas of the realized triangles, measured from the realized
/// corner positions alone (angle defect), independent of the angle system
/// that produced them. Only meaningful in the Poincare chart.
pub fn realized_triangle_areas(config: &DiskConfiguration) -> Vec<f64> {
    assert_eq!(
        config.chart,
        Chart::Poincare,
        "angle-defect areas are computed in the hyperbolic chart"
    );
    let corner_angle = |p: ChartPoint, q: ChartPoint, r: ChartPoint| {
        let a = mobius_to_origin(p, q);
        let b = mobius_to_origin(p, r);
        let mut d = (b.arg() - a.arg()).abs();
        if d > PI {
            d = 2.0 * PI - d;
        }
        d
    };
    config
        .placements
        .iter()
        .map(|t| {
            PI - corner_angle(t.vertex_corner, t.opposite_corner, t.face_corner)
                - corner_angle(t.opposite_corner, t.vertex_corner, t.face_corner)
                - corner_angle(t.face_corner, t.vertex_corner, t.opposite_corner)
        })
        .collect()
}

/// Realized angle totals per vertex: the sum over all realized triangles of
/// the corner angle they put at any lift of the vertex, measured from the
/// placed corner positions alone. Every fully triangulated vertex must close
/// up to two pi. This rechecks the vertex constraint through the realized
/// geometry rather than the angle system.
pub fn realized_vertex_angle_sums(
    config: &DiskConfiguration,
    weighted: &WeightedMap,
) -> Vec<(usize, f64)> {
    let map = weighted.map();
    let corner_angle = |p: ChartPoint, q: ChartPoint, r: ChartPoint| match config.chart {
        Chart::Poincare => {
            let a = mobius_to_origin(p, q);
            let b = mobius_to_origin(p, r);
            let mut d = (b.arg() - a.arg()).abs();
            if d > PI {
                d = 2.0 * PI - d;
            }
            d
        }
        _ => {
            let mut d = ((r - p).arg() - (q - p).arg()).abs();
            if d > PI {
                d = 2.0 * PI - d;
            }
            d
        }
    };
    let mut sums = vec![0.0f64; map.vertex_count()];
    let mut counts = vec![0usize; map.vertex_count()];
    for t in &config.placements {
        let v = map.vertex_of(t.dart);
        sums[v] += corner_angle(t.vertex_corner, t.opposite_corner, t.face_corner);
        counts[v] += 1;
        let w = map.vertex_of(map.opposite(t.dart));
        sums[w] += corner_angle(t.opposite_corner, t.vertex_corner, t.face_corner);
        counts[w] += 1;
    }
    (0..map.vertex_count())
        .filter(|&v| counts[v] == 2 * map.vertex_darts(v).len())
        .map(|v| (v, sums[v]))
        .collect()
}

/// The volume of the ideal hyperbolic polyhedron associated with a critical
/// angle system, evaluated as the functional itself.
pub fn volume_functional(weighted: &WeightedMap, system: &AngleSystem) -> Result<f64, AngleError> {
    angles::functional_value(weighted, system)
}

/// The same volume assembled from orthoschemes: every dart contributes the
/// signed volume `2 V(psi(s), omega_gamma(psi(s), psi(-s)))` with `gamma =
/// pi - theta`, where `V` is the orthoscheme volume kernel. Defined for
/// every angle system; at the angular datum of a configuration it equals the
/// polyhedron volume.
pub fn volume_orthoschemes(weighted: &WeightedMap, system: &AngleSystem) -> f64 {
    orthoscheme_pair_sums(weighted, system).iter().sum()
}

/// Per-edge orthoscheme contributions: the pair sum of the two darts of each
/// edge. Exposed so the decomposition can be compared edge by edge against
/// the concave edge profiles of the functional.
pub fn orthoscheme_pair_sums(weighted: &WeightedMap, system: &AngleSystem) -> Vec<f64> {
    let map = weighted.map();
    (0..map.edge_count())
        .map(|e| {
            let [s, t] = map.edge_darts(e);
            let gamma = PI - weighted.theta(e);
            let (x, y) = (system.psi[s], system.psi[t]);
            2.0 * ortho_v(x, omega(gamma, x, y)) + 2.0 * ortho_v(y, omega(gamma, y, x))
        })
        .collect()
}

/// Evaluates the functional while also returning the edge profile reference
/// values that the orthoscheme pair sums must reproduce, one per edge.
pub fn edge_profile_reference(weighted: &WeightedMap, system: &AngleSystem) -> Vec<f64> {
    let map = weighted.map();
    let hats = angles::hat_data(weighted, system);
    (0..map.edge_count())
        .map(|e| {
            let [s, _] = map.edge_darts(e);
            let theta = weighted.theta(e);
            let i_plus = lob(hats.psi_hat[s]) + lob(theta - hats.psi_hat[s]) - 2.0 * lob(theta / 2.0);
            let i_minus = lob(hats.eta_hat[e]) - lob(theta + hats.eta_hat[e])
                + 2.0 * lob(std::f64::consts::FRAC_PI_2 + theta / 2.0);
            i_plus - i_minus
        })
        .collect()
}

/// Options controlling SVG output.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Pixel width and height of the square image.
    pub size: u32,
    /// Draw the realized triangle edges as an overlay.
    pub overlay_quads: bool,
    /// For flat torus configurations: how many rings of lattice translates
    /// of the disks to draw around the fundamental domain.
    pub copies: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            size: 800,
            overlay_quads: false,
            copies: 0,
        }
    }
}

fn fmt_coord(value: f64) -> String {
    // Normalize the sign of zero so byte-identical output never depends on
    // how a zero was computed.
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{v:.9}")
}

/// Renders a configuration as an SVG document string. The output is byte
/// deterministic: element order follows the stored configuration order and
/// every coordinate is printed with nine decimals.
pub fn render_svg(config: &DiskConfiguration, options: &RenderOptions) -> String {
    let mut min = Complex::new(f64::INFINITY, f64::INFINITY);
    let mut max = Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: ChartPoint, pad: f64| {
        min.re = min.re.min(p.re - pad);
        min.im = min.im.min(p.im - pad);
        max.re = max.re.max(p.re + pad);
        max.im = max.im.max(p.im + pad);
    };

    // Disk circles, one per vertex lift, plus requested lattice copies.
    let mut translations: Vec<ChartPoint> = vec![Complex::new(0.0, 0.0)];
    if options.copies > 0 {
        if let Some([u, w]) = config.periods {
            let k = options.copies as i64;
            for i in -k..=k {
                for j in -k..=k {
                    if i != 0 || j != 0 {
                        translations.push(u * i as f64 + w * j as f64);
                    }
                }
            }
        }
    }
    let mut circles: Vec<(ChartPoint, f64, bool)> = Vec::new();
    for (which, &shift) in translations.iter().enumerate() {
        for &(v, p) in &config.vertex_lifts {
            if config.radii[v].is_none() {
                continue;
            }
            let (c, r) = euclidean_circle(config.chart, p, config.radii[v].expect("checked"));
            circles.push((c + shift, r, which > 0));
            grow(c + shift, r);
        }
    }
    for p in config.face_points.iter().flatten() {
        grow(*p, 0.0);
    }
    if config.chart == Chart::Poincare {
        grow(Complex::new(-1.0, -1.0), 0.0);
        grow(Complex::new(1.0, 1.0), 0.0);
    }
    if !min.re.is_finite() {
        min = Complex::new(-1.0, -1.0);
        max = Complex::new(1.0, 1.0);
    }
    let width = (max.re - min.re).max(max.im - min.im).max(1e-9);
    let pad = 0.05 * width;
    min -= Complex::new(pad, pad);
    let side = width + 2.0 * pad;
    let marker = side / 150.0;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" \
         viewBox=\"{1} {2} {3} {3}\">\n",
        options.size,
        fmt_coord(min.re),
        fmt_coord(min.im),
        fmt_coord(side)
    );
    if config.chart == Chart::Poincare {
        let _ = write!(
            svg,
            "  <circle class=\"chart-boundary\" cx=\"0.000000000\" cy=\"0.000000000\" \
             r=\"1.000000000\" fill=\"none\" stroke=\"#888888\" stroke-width=\"{}\"/>\n",
            fmt_coord(marker * 0.4)
        );
    }
    svg.push_str("  <g class=\"disks\" fill=\"none\" stroke=\"#1f4e79\">\n");
    for &(c, r, copy) in &circles {
        let _ = write!(
            svg,
            "    <circle cx=\"{}\" cy=\"{}\" r=\"{}\" stroke-width=\"{}\"{}/>\n",
            fmt_coord(c.re),
            fmt_coord(c.im),
            fmt_coord(r),
            fmt_coord(marker * 0.5),
            if copy { " opacity=\"0.35\"" } else { "" }
        );
    }
    svg.push_str("  </g>\n");
    if options.overlay_quads {
        svg.push_str("  <g class=\"overlay\" fill=\"none\" stroke=\"#c05020\">\n");
        for t in &config.placements {
            for (p, q) in [
                (t.vertex_corner, t.opposite_corner),
                (t.vertex_corner, t.face_corner),
                (t.opposite_corner, t.face_corner),
            ] {
                let _ = write!(
                    svg,
                    "    <path d=\"{}\" stroke-width=\"{}\"/>\n",
                    segment_path(config.chart, p, q),
                    fmt_coord(marker * 0.25)
                );
            }
        }
        svg.push_str("  </g>\n");
    }
    svg.push_str("  <g class=\"face-points\" stroke=\"#101010\" fill=\"none\">\n");
    for p in config.face_points.iter().flatten() {
        let _ = write!(
            svg,
            "    <path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke-width=\"{}\"/>\n",
            fmt_coord(p.re - marker),
            fmt_coord(p.im),
            fmt_coord(p.re + marker),
            fmt_coord(p.im),
            fmt_coord(p.re),
            fmt_coord(p.im - marker),
            fmt_coord(p.re),
            fmt_coord(p.im + marker),
            fmt_coord(marker * 0.35),
        );
    }
    svg.push_str("  </g>\n");
    if !config.lines.is_empty() {
        svg.push_str("  <g class=\"boundary-lines\" stroke=\"#1f4e79\">\n");
        let reach = side * 2.0;
        for line in &config.lines {
            let p1 = line.point - line.direction * reach;
            let p2 = line.point + line.direction * reach;
            let _ = write!(
                svg,
                "    <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"{}\"/>\n",
                fmt_coord(p1.re),
                fmt_coord(p1.im),
                fmt_coord(p2.re),
                fmt_coord(p2.im),
                fmt_coord(marker * 0.5)
            );
        }
        svg.push_str("  </g>\n");
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes [`render_svg`] output to a file.
pub fn write_svg(
    config: &DiskConfiguration,
    path: &std::path::Path,
    options: &RenderOptions,
) -> std::io::Result<()> {
    std::fs::write(path, render_svg(config, options))
}

/// SVG path for the chart geodesic between two points: a straight segment in
/// the flat charts, a circular arc orthogonal to the unit circle in the
/// Poincare chart (falling back to a segment through the center).
fn segment_path(chart: Chart, p: ChartPoint, q: ChartPoint) -> String {
    if chart != Chart::Poincare {
        return format!(
            "M {} {} L {} {}",
            fmt_coord(p.re),
            fmt_coord(p.im),
            fmt_coord(q.re),
            fmt_coord(q.im)
        );
    }
    // Center c of the circle through p and q with |c|^2 = R^2 + 1.
    let det = 2.0 * (p.re * q.im - p.im * q.re);
    if det.abs() < 1e-9 {
        return format!(
            "M {} {} L {} {}",
            fmt_coord(p.re),
            fmt_coord(p.im),
            fmt_coord(q.re),
            fmt_coord(q.im)
        );
    }
    let rp = p.norm_sqr() + 1.0;
    let rq = q.norm_sqr() + 1.0;
    let cx = (rp * q.im - rq * p.im) / det;
    let cy = (rq * p.re - rp * q.re) / det;
    let c = Complex::new(cx, cy);
    let r = (c.norm_sqr() - 1.0).max(0.0).sqrt();
    // Sweep so the arc stays inside the disk: take the short way around.
    let cross = (p - c).re * (q - c).im - (p - c).im * (q - c).re;
    let sweep = if cross > 0.0 { 1 } else { 0 };
    format!(
        "M {} {} A {} {} 0 0 {} {} {}",
        fmt_coord(p.re),
        fmt_coord(p.im),
        fmt_coord(r),
        fmt_coord(r),
        sweep,
        fmt_coord(q.re),
        fmt_coord(q.im)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{constrained_basis, stereographic_subspace};
    use crate::flow::initial_angle_system;
    use crate::shapes::{
        weighted_cube, weighted_genus_two, weighted_square_torus, weighted_tetrahedron,
    };
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    /// Lobachevsky function at pi/3.
    const LOB_THIRD: f64 = 0.338_313_868_803_217_875;
    /// Lobachevsky function at pi/4, half the Catalan constant.
    const LOB_QUARTER: f64 = 0.457_982_797_088_609_507;
    /// Leg of the hyperbolic equilateral triangle with angles pi/5, from
    /// 2 atanh(sqrt(sin(pi/5) / sin(2 pi/5))) evaluated in extended precision.
    const PENTAGON_LEG: f64 = 2.122_550_123_810_071_304;

    #[test]
    fn euclidean_legs_follow_the_law_of_sines() {
        let eq = triangle_legs(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3, 0).unwrap();
        assert!((eq.a - FRAC_PI_3.sin()).abs() < 1e-15);
        assert!((eq.b - eq.a).abs() < 1e-15 && (eq.c - eq.a).abs() < 1e-15);

        let iso = triangle_legs(FRAC_PI_4, FRAC_PI_4, FRAC_PI_2, 0).unwrap();
        assert!((iso.a - FRAC_PI_4.sin()).abs() < 1e-15);
        assert!((iso.b - iso.a).abs() < 1e-15);
        assert!((iso.c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_equilateral_leg_matches_reference_value() {
        let tri = triangle_legs(PI / 5.0, PI / 5.0, PI / 5.0, -1).unwrap();
        assert!((tri.a - PENTAGON_LEG).abs() < 1e-12, "a = {}", tri.a);
        assert!((tri.b - PENTAGON_LEG).abs() < 1e-12);
        assert!((tri.c - PENTAGON_LEG).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_legs_satisfy_the_law_of_cosines() {
        // Independent reference: cosh a = (cos alpha + cos beta cos gamma) /
        // (sin beta sin gamma) for a hyperbolic triangle.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 200 {
            let alpha = rng.random_range(0.05..1.2);
            let beta = rng.random_range(0.05..1.2);
            let gamma = rng.random_range(0.05..1.2);
            if alpha + beta + gamma >= PI - 0.05 {
                continue;
            }
            let tri = triangle_legs(alpha, beta, gamma, -1).unwrap();
            for (leg, opp, adj1, adj2) in [
                (tri.a, alpha, beta, gamma),
                (tri.b, beta, gamma, alpha),
                (tri.c, gamma, alpha, beta),
            ] {
                let reference = (opp.cos() + adj1.cos() * adj2.cos()) / (adj1.sin() * adj2.sin());
                assert!(
                    (leg.cosh() - reference).abs() <= 1e-12 * reference.abs().max(1.0),
                    "cosh {} vs {} at ({alpha}, {beta}, {gamma})",
                    leg.cosh(),
                    reference
                );
            }
            tested += 1;
        }
    }

    #[test]
    fn spherical_legs_satisfy_the_law_of_cosines() {
        // Independent reference: cos a = (cos alpha + cos beta cos gamma) /
        // (sin beta sin gamma) for a spherical triangle.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut tested = 0;
        while tested < 200 {
            let alpha = rng.random_range(0.7..1.6);
            let beta = rng.random_range(0.7..1.6);
            let gamma = rng.random_range(0.7..1.6);
            let eta = 0.5 * (alpha + beta + gamma - PI);
            if eta <= 0.05 || alpha <= eta || beta <= eta || gamma <= eta {
                continue;
            }
            let tri = triangle_legs(alpha, beta, gamma, 1).unwrap();
            for (leg, opp, adj1, adj2) in [
                (tri.a, alpha, beta, gamma),
                (tri.b, beta, gamma, alpha),
                (tri.c, gamma, alpha, beta),
            ] {
                let reference = (opp.cos() + adj1.cos() * adj2.cos()) / (adj1.sin() * adj2.sin());
                assert!(
                    (leg.cos() - reference).abs() <= 1e-12,
                    "cos {} vs {} at ({alpha}, {beta}, {gamma})",
                    leg.cos(),
                    reference
                );
            }
            tested += 1;
        }
    }

    #[test]
    fn degenerate_triangles_are_rejected() {
        assert!(matches!(
            triangle_legs(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 0),
            Err(GeomError::DegenerateTriangle { .. })
        ));
        assert!(matches!(
            triangle_legs(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3, -1),
            Err(GeomError::DegenerateTriangle { .. })
        ));
        assert!(matches!(
            triangle_legs(PI / 5.0, PI / 5.0, PI / 5.0, 1),
            Err(GeomError::DegenerateTriangle { .. })
        ));
        // Positive excess but one hat angle below zero.
        assert!(matches!(
            triangle_legs(0.1, 2.0, 2.0, 1),
            Err(GeomError::DegenerateTriangle { .. })
        ));
        assert!(matches!(
            triangle_legs(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3, 2),
            Err(GeomError::DegenerateTriangle { .. })
        ));
    }

    #[test]
    fn poincare_disks_convert_to_euclidean_circles() {
        let center = Complex::new(0.3, -0.2);
        let radius = 0.9;
        let (c, r) = euclidean_circle(Chart::Poincare, center, radius);
        for k in 0..8 {
            let dir = rot(2.0 * PI * k as f64 / 8.0);
            let p = mobius_from_origin(center, dir * (radius / 2.0).tanh());
            assert!(((p - c).norm() - r).abs() < 1e-13);
            assert!((hyperbolic_distance(center, p) - radius).abs() < 1e-13);
        }
    }

    fn torus_quarter_system() -> (WeightedMap, AngleSystem) {
        let weighted = weighted_square_torus();
        let psi = vec![FRAC_PI_4; weighted.map().dart_count()];
        let system = AngleSystem::full(&weighted, psi);
        (weighted, system)
    }

    #[test]
    fn torus_layout_realizes_the_orthogonal_unit_pattern() {
        let (weighted, system) = torus_quarter_system();
        let config = layout(&weighted, &system).unwrap();
        assert_eq!(config.chart, Chart::Plane);
        assert_eq!(config.placements.len(), 16);
        for v in 0..weighted.map().vertex_count() {
            let r = config.radii[v].unwrap();
            assert!((r - FRAC_PI_4.sin()).abs() < 1e-12, "radius {r}");
        }
        let report = check_configuration(&config, &weighted);
        assert!(report.max_angle_residual < 1e-12, "{report:?}");
        assert!(report.max_concurrency_residual < 1e-12, "{report:?}");
        assert_eq!(report.angle_checks, 16);
        assert_eq!(report.concurrency_checks, 32);

        let periods = config.periods.unwrap();
        for p in periods {
            assert!((p.norm() - 2.0).abs() < 1e-12, "period {p}");
        }
        let dot = periods[0].re * periods[1].re + periods[0].im * periods[1].im;
        assert!(dot.abs() < 1e-12);

        let sums = realized_vertex_angle_sums(&config, &weighted);
        assert!(!sums.is_empty());
        for (_, sum) in sums {
            assert!((sum - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn rerooted_layout_realizes_the_same_pattern() {
        let (weighted, system) = torus_quarter_system();
        let config = layout_rooted(&weighted, &system, Some(7)).unwrap();
        assert_eq!(config.placements[0].dart, 7);
        for v in 0..weighted.map().vertex_count() {
            assert!((config.radii[v].unwrap() - FRAC_PI_4.sin()).abs() < 1e-12);
        }
        let report = check_configuration(&config, &weighted);
        assert!(report.max_angle_residual < 1e-12);
        assert!(report.max_concurrency_residual < 1e-12);
    }

    #[test]
    fn tetrahedron_wheel_matches_the_hand_construction() {
        let weighted = weighted_tetrahedron();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let system = sub.system(&[]);
        let config = layout(&weighted, &system).unwrap();
        assert_eq!(config.chart, Chart::Stereographic);
        assert!(config.placements.is_empty());

        let map = weighted.map();
        let apex = (0..map.vertex_count())
            .find(|&v| !sub.vertex_on_face[v])
            .unwrap();
        let center = config.centers[apex].unwrap();
        assert!(center.norm() < 1e-15);
        assert!((config.radii[apex].unwrap() - 1.0).abs() < 1e-15);
        for v in 0..map.vertex_count() {
            assert_eq!(config.centers[v].is_some(), v == apex);
        }

        let mut realized = 0;
        for f in 0..map.face_count() {
            match config.face_points[f] {
                None => assert_eq!(f, 0),
                Some(p) => {
                    assert!((p.norm() - 1.0).abs() < 1e-14);
                    realized += 1;
                }
            }
        }
        assert_eq!(realized, 3);

        assert_eq!(config.lines.len(), 3);
        for line in &config.lines {
            let h = -(line.point.re * line.normal.re + line.point.im * line.normal.im);
            assert!((h.abs() - 0.5).abs() < 1e-13, "origin offset {h}");
        }

        let report = check_configuration(&config, &weighted);
        assert!(report.max_angle_residual < 1e-12, "{report:?}");
        assert!(report.max_concurrency_residual < 1e-12, "{report:?}");
        assert_eq!(report.angle_checks, 6);
        assert_eq!(report.concurrency_checks, 9);
    }

    #[test]
    fn tetrahedron_volume_routes_match_the_reference_value() {
        let weighted = weighted_tetrahedron();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let system = sub.system(&[]);
        let functional = volume_functional(&weighted, &system).unwrap();
        let ortho = volume_orthoschemes(&weighted, &system);
        assert!((functional - 3.0 * LOB_THIRD).abs() < 1e-12, "{functional}");
        assert!((ortho - 3.0 * LOB_THIRD).abs() < 1e-12, "{ortho}");
    }

    #[test]
    fn cube_stereographic_layout_realizes_the_square_pattern() {
        let weighted = weighted_cube();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let system = sub.system(&vec![FRAC_PI_4; sub.s_star.len()]);
        let config = layout(&weighted, &system).unwrap();
        assert_eq!(config.placements.len(), 8);

        let map = weighted.map();
        for v in 0..map.vertex_count() {
            match config.radii[v] {
                Some(r) => assert!((r - FRAC_PI_4.sin()).abs() < 1e-12),
                None => assert!(sub.vertex_on_face[v]),
            }
        }
        for f in 0..map.face_count() {
            assert_eq!(config.face_points[f].is_some(), f != 0);
        }
        assert_eq!(config.lines.len(), 4);

        let report = check_configuration(&config, &weighted);
        assert!(report.max_angle_residual < 1e-10, "{report:?}");
        assert!(report.max_concurrency_residual < 1e-10, "{report:?}");
        assert_eq!(report.angle_checks, 16);
        assert_eq!(report.concurrency_checks, 24);

        let functional = volume_functional(&weighted, &system).unwrap();
        let ortho = volume_orthoschemes(&weighted, &system);
        assert!((functional - 8.0 * LOB_QUARTER).abs() < 1e-12);
        assert!((ortho - 8.0 * LOB_QUARTER).abs() < 1e-12);
    }

    #[test]
    fn volume_routes_agree_away_from_critical_points() {
        // The orthoscheme pair sum of an edge reproduces the edge profile of
        // the functional identically on the coherent set, not only at the
        // maximizer, so the two totals must match on perturbed members too.
        let (weighted, mut system) = torus_quarter_system();
        let basis = constrained_basis(&weighted, None);
        for (k, vector) in basis.vectors.iter().enumerate().take(3) {
            for &(dart, coeff) in vector {
                system.psi[dart] += 0.05 / (k + 1) as f64 * coeff;
            }
        }
        let pair_sums = orthoscheme_pair_sums(&weighted, &system);
        let profiles = edge_profile_reference(&weighted, &system);
        for (e, (pair, profile)) in pair_sums.iter().zip(&profiles).enumerate() {
            assert!((pair - profile).abs() < 1e-12, "edge {e}: {pair} vs {profile}");
        }
        let functional = volume_functional(&weighted, &system).unwrap();
        let ortho = volume_orthoschemes(&weighted, &system);
        assert!((functional - ortho).abs() < 1e-9, "{functional} vs {ortho}");

        let genus_two = weighted_genus_two();
        let initial = initial_angle_system(&genus_two, Mode::Full).unwrap();
        let functional = volume_functional(&genus_two, &initial).unwrap();
        let ortho = volume_orthoschemes(&genus_two, &initial);
        assert!((functional - ortho).abs() < 1e-9, "{functional} vs {ortho}");
    }

    #[test]
    fn non_critical_hyperbolic_systems_do_not_close_up() {
        let weighted = weighted_genus_two();
        let initial = initial_angle_system(&weighted, Mode::Full).unwrap();
        match layout(&weighted, &initial) {
            Err(GeomError::NotCritical { .. }) => {}
            Ok(config) => {
                let report = check_configuration(&config, &weighted);
                assert!(
                    report.max_angle_residual > 1e-4,
                    "an uncritical system closed up with residual {}",
                    report.max_angle_residual
                );
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn svg_output_is_deterministic_and_structured() {
        let weighted = weighted_cube();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let system = sub.system(&vec![FRAC_PI_4; sub.s_star.len()]);
        let config = layout(&weighted, &system).unwrap();
        let options = RenderOptions::default();
        let first = render_svg(&config, &options);
        let second = render_svg(&config, &options);
        assert_eq!(first, second);
        assert_eq!(first.matches("<circle").count(), 4);
        assert_eq!(first.matches("<line").count(), 4);
        assert_eq!(first.matches("<path").count(), 5);

        let (torus, system) = torus_quarter_system();
        let flat = layout(&torus, &system).unwrap();
        let plain = render_svg(&flat, &options);
        assert_eq!(plain.matches("<line").count(), 0);
        let tiled = render_svg(
            &flat,
            &RenderOptions {
                copies: 1,
                ..RenderOptions::default()
            },
        );
        assert_eq!(
            tiled.matches("<circle").count(),
            9 * plain.matches("<circle").count()
        );
        let overlay = render_svg(
            &flat,
            &RenderOptions {
                overlay_quads: true,
                ..RenderOptions::default()
            },
        );
        assert!(overlay.matches("<path").count() > plain.matches("<path").count());
    }
}
