//! Combinatorial maps of closed oriented surfaces and edge-weight validation.
//!
//! A surface map is a set of darts (oriented edge sides) 0..N together with
//! two permutations: `opposite`, the fixed-point-free involution s ↦ −s
//! swapping the two darts of every edge, and `next_at_vertex`, the rotation σ
//! listing the darts leaving a vertex in cyclic order. Vertices are the orbits
//! of σ, edges the orbits of `opposite`, and faces the orbits of
//! φ = σ∘opposite, so that walking d ↦ σ(opposite(d)) traces a face boundary;
//! this orientation convention is fixed once here and used everywhere. The
//! Euler characteristic is χ = #V − #E + #F.
//!
//! A weight function θ: E → (0, π) is *polyhedral* when every reduced
//! contractible loop of edges satisfies Σ(π−θ) ≥ 2π with equality exactly for
//! face boundaries. [`validate_weights`] checks the face equalities directly,
//! enumerates simple cycles on sphere maps (where every loop is contractible),
//! and otherwise defers to the flow feasibility machinery of [`crate::flow`],
//! reporting a verdict of `Valid`, `Invalid` (with a certificate) or
//! `Undecided` when the available checks cannot decide.

use std::f64::consts::PI;

use thiserror::Error;

use crate::flow::{self, CutCertificate};

/// Errors from building maps and weighted maps.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    /// A permutation array has the wrong length.
    #[error("permutation array {name} has length {got}, expected {expected}")]
    BadArrayLength {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    /// An array entry is not a dart index.
    #[error("entry {value} at position {position} of {name} is not a dart index below {dart_count}")]
    DartIndexOutOfRange {
        name: &'static str,
        position: usize,
        value: usize,
        dart_count: usize,
    },
    /// `next_at_vertex` must be a bijection on darts.
    #[error("next_at_vertex is not a permutation: dart {dart} has {preimages} preimages")]
    NotPermutation { dart: usize, preimages: usize },
    /// `opposite` applied twice must be the identity.
    #[error("opposite is not an involution: opposite(opposite({dart})) = {image}")]
    NotInvolution { dart: usize, image: usize },
    /// `opposite` may not fix any dart.
    #[error("opposite fixes dart {dart}; every edge needs two distinct darts")]
    FixedDart { dart: usize },
    /// The map must be connected.
    #[error("map is disconnected: dart {unreached_dart} is not reachable from dart 0")]
    Disconnected { unreached_dart: usize },
    /// Both endpoints of an edge must be distinct vertices.
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    LoopEdge { edge: usize, vertex: usize },
    /// Edge weights must lie strictly inside (0, π).
    #[error("θ({edge}) = {theta} lies outside the open interval (0, π)")]
    ThetaOutOfRange { edge: usize, theta: f64 },
}

/// A combinatorial map of a closed oriented surface.
///
/// Construction verifies the permutation axioms, connectivity and the absence
/// of self-loop edges, then freezes the orbit structures. All accessors are
/// cheap lookups; the value is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMap {
    dart_count: usize,
    opposite: Vec<usize>,
    next_at_vertex: Vec<usize>,
    vertex_of_dart: Vec<usize>,
    edge_of_dart: Vec<usize>,
    face_of_dart: Vec<usize>,
    /// Darts leaving each vertex, in rotation order starting from the
    /// smallest dart of the orbit.
    vertex_darts: Vec<Vec<usize>>,
    /// The two darts of each edge, smaller first; edges are indexed in
    /// increasing order of their smaller dart.
    edge_darts: Vec<[usize; 2]>,
    /// Darts along each face boundary, in φ-orbit order starting from the
    /// smallest dart of the orbit.
    face_darts: Vec<Vec<usize>>,
}

impl SurfaceMap {
    /// Builds a map from its two permutations and verifies all invariants.
    ///
    /// # Errors
    ///
    /// [`MapError::BadArrayLength`] and [`MapError::DartIndexOutOfRange`] for
    /// malformed arrays, [`MapError::NotPermutation`] if `next_at_vertex` is
    /// not bijective, [`MapError::NotInvolution`] / [`MapError::FixedDart`]
    /// if `opposite` is not a fixed-point-free involution,
    /// [`MapError::Disconnected`] if the darts do not form a single orbit
    /// under both permutations, and [`MapError::LoopEdge`] if some edge has
    /// equal endpoints.
    pub fn build(
        dart_count: usize,
        opposite: Vec<usize>,
        next_at_vertex: Vec<usize>,
    ) -> Result<Self, MapError> {
        for (name, array) in [("opposite", &opposite), ("next_at_vertex", &next_at_vertex)] {
            if array.len() != dart_count {
                return Err(MapError::BadArrayLength {
                    name,
                    got: array.len(),
                    expected: dart_count,
                });
            }
            for (position, &value) in array.iter().enumerate() {
                if value >= dart_count {
                    return Err(MapError::DartIndexOutOfRange {
                        name,
                        position,
                        value,
                        dart_count,
                    });
                }
            }
        }
        let mut preimages = vec![0usize; dart_count];
        for &image in &next_at_vertex {
            preimages[image] += 1;
        }
        for (dart, &count) in preimages.iter().enumerate() {
            if count != 1 {
                return Err(MapError::NotPermutation {
                    dart,
                    preimages: count,
                });
            }
        }
        for dart in 0..dart_count {
            if opposite[dart] == dart {
                return Err(MapError::FixedDart { dart });
            }
            if opposite[opposite[dart]] != dart {
                return Err(MapError::NotInvolution {
                    dart,
                    image: opposite[opposite[dart]],
                });
            }
        }
        if dart_count > 0 {
            let mut reached = vec![false; dart_count];
            let mut stack = vec![0usize];
            reached[0] = true;
            while let Some(dart) = stack.pop() {
                for neighbor in [opposite[dart], next_at_vertex[dart]] {
                    if !reached[neighbor] {
                        reached[neighbor] = true;
                        stack.push(neighbor);
                    }
                }
            }
            if let Some(unreached_dart) = reached.iter().position(|&r| !r) {
                return Err(MapError::Disconnected { unreached_dart });
            }
        }

        let (vertex_of_dart, vertex_darts) = orbits(dart_count, |d| next_at_vertex[d]);
        let (face_of_dart, face_darts) = orbits(dart_count, |d| next_at_vertex[opposite[d]]);

        let mut edge_of_dart = vec![usize::MAX; dart_count];
        let mut edge_darts = Vec::with_capacity(dart_count / 2);
        for dart in 0..dart_count {
            if dart < opposite[dart] {
                let edge = edge_darts.len();
                edge_of_dart[dart] = edge;
                edge_of_dart[opposite[dart]] = edge;
                edge_darts.push([dart, opposite[dart]]);
            }
        }
        for (edge, &[dart, twin]) in edge_darts.iter().enumerate() {
            if vertex_of_dart[dart] == vertex_of_dart[twin] {
                return Err(MapError::LoopEdge {
                    edge,
                    vertex: vertex_of_dart[dart],
                });
            }
        }

        Ok(Self {
            dart_count,
            opposite,
            next_at_vertex,
            vertex_of_dart,
            edge_of_dart,
            face_of_dart,
            vertex_darts,
            edge_darts,
            face_darts,
        })
    }

    /// Number of darts.
    pub fn dart_count(&self) -> usize {
        self.dart_count
    }

    /// Iterator over all darts.
    pub fn darts(&self) -> std::ops::Range<usize> {
        0..self.dart_count
    }

    /// The dart on the other side of the same edge.
    pub fn opposite(&self, dart: usize) -> usize {
        self.opposite[dart]
    }

    /// The next dart leaving the same vertex, in rotation order.
    pub fn next_at_vertex(&self, dart: usize) -> usize {
        self.next_at_vertex[dart]
    }

    /// The next dart along the same face boundary, φ = σ∘opposite.
    pub fn next_in_face(&self, dart: usize) -> usize {
        self.next_at_vertex[self.opposite[dart]]
    }

    /// Vertex the dart leaves.
    pub fn vertex_of(&self, dart: usize) -> usize {
        self.vertex_of_dart[dart]
    }

    /// Edge the dart belongs to.
    pub fn edge_of(&self, dart: usize) -> usize {
        self.edge_of_dart[dart]
    }

    /// Face whose boundary the dart lies on.
    pub fn face_of(&self, dart: usize) -> usize {
        self.face_of_dart[dart]
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertex_darts.len()
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edge_darts.len()
    }

    /// Number of faces.
    pub fn face_count(&self) -> usize {
        self.face_darts.len()
    }

    /// Darts leaving `vertex` in rotation order.
    pub fn vertex_darts(&self, vertex: usize) -> &[usize] {
        &self.vertex_darts[vertex]
    }

    /// The two darts of `edge`, smaller index first.
    pub fn edge_darts(&self, edge: usize) -> [usize; 2] {
        self.edge_darts[edge]
    }

    /// The two endpoint vertices of `edge`, in the order of its darts.
    pub fn edge_endpoints(&self, edge: usize) -> [usize; 2] {
        let [dart, twin] = self.edge_darts[edge];
        [self.vertex_of_dart[dart], self.vertex_of_dart[twin]]
    }

    /// Darts along the boundary of `face` in φ order.
    pub fn face_darts(&self, face: usize) -> &[usize] {
        &self.face_darts[face]
    }

    /// Euler characteristic χ = #V − #E + #F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }
}

/// Labels the orbits of a permutation, assigning ids in order of each orbit's
/// smallest element and listing members in orbit order from that element.
fn orbits(dart_count: usize, successor: impl Fn(usize) -> usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut orbit_of = vec![usize::MAX; dart_count];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..dart_count {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut orbit = Vec::new();
        let mut dart = start;
        loop {
            orbit_of[dart] = id;
            orbit.push(dart);
            dart = successor(dart);
            if dart == start {
                break;
            }
        }
        members.push(orbit);
    }
    (orbit_of, members)
}

/// A surface map together with an edge weight θ: E → (0, π).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMap {
    map: SurfaceMap,
    theta: Vec<f64>,
}

impl WeightedMap {
    /// Attaches weights to a map, one value per edge in edge order.
    ///
    /// # Errors
    ///
    /// [`MapError::BadArrayLength`] if the weight count differs from the edge
    /// count, [`MapError::ThetaOutOfRange`] if some θ(e) ∉ (0, π) or is not
    /// finite.
    pub fn new(map: SurfaceMap, theta: Vec<f64>) -> Result<Self, MapError> {
        if theta.len() != map.edge_count() {
            return Err(MapError::BadArrayLength {
                name: "theta",
                got: theta.len(),
                expected: map.edge_count(),
            });
        }
        for (edge, &value) in theta.iter().enumerate() {
            if !(value > 0.0 && value < PI) {
                return Err(MapError::ThetaOutOfRange { edge, theta: value });
            }
        }
        Ok(Self { map, theta })
    }

    /// The underlying surface map.
    pub fn map(&self) -> &SurfaceMap {
        &self.map
    }

    /// Weight of `edge`.
    pub fn theta(&self, edge: usize) -> f64 {
        self.theta[edge]
    }

    /// Weight of the edge containing `dart`.
    pub fn theta_of_dart(&self, dart: usize) -> f64 {
        self.theta[self.map.edge_of(dart)]
    }

    /// All weights in edge order.
    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    /// Smallest weight over all edges.
    pub fn min_theta(&self) -> f64 {
        self.theta.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of [`validate_weights`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Face equalities hold and the decisive checks found no violation.
    Valid,
    /// Some face equality, loop inequality or flow cut is violated.
    Invalid,
    /// No violation found, but the available checks cannot certify validity
    /// (the sphere cycle search was truncated).
    Undecided,
}

/// A reduced loop of edges violating the strict loop inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolatedLoop {
    /// Vertices along the loop.
    pub vertices: Vec<usize>,
    /// Edges along the loop, edge i joining vertex i to vertex i+1 (cyclic).
    pub edges: Vec<usize>,
    /// Σ(π−θ) over the loop's edges.
    pub excess_sum: f64,
}

/// Findings of [`validate_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Per-face residual Σ(π−θ(e)) − 2π over the face boundary.
    pub face_equalities: Vec<f64>,
    /// Non-face loops with Σ(π−θ) below or at the 2π threshold.
    pub violated_loops: Vec<ViolatedLoop>,
    /// Violated cut from the flow feasibility check, when one was found.
    pub flow_certificate: Option<CutCertificate>,
    /// Overall verdict.
    pub verdict: Verdict,
}

/// Absolute tolerance for face-equality residuals.
pub const FACE_EQUALITY_TOL: f64 = 1e-9;

/// Hard cap on the number of partial paths explored by the sphere cycle
/// search before the verdict degrades to `Undecided`.
const CYCLE_SEARCH_CAP: usize = 1_000_000;

/// Checks whether the weights satisfy the loop conditions: Σ(π−θ) = 2π on
/// every face boundary, and Σ(π−θ) > 2π on every other reduced contractible
/// loop of edges.
///
/// Face equalities are checked exactly on every input. On sphere maps (χ = 2,
/// where every loop is contractible) all simple edge cycles of length up to
/// `loop_search_bound` are enumerated, which decides the verdict completely
/// whenever the bound covers the vertex count. On other surfaces
/// contractibility has no cheap combinatorial test, so feasibility of the
/// flow diagram serves as the decisive certificate: an infeasible flow yields
/// a violated-cut certificate and verdict `Invalid`; a feasible flow yields
/// a coherent angle system, whose existence is what every later stage
/// actually consumes, and the verdict is `Valid`.
pub fn validate_weights(weighted: &WeightedMap, loop_search_bound: usize) -> ValidationReport {
    let map = weighted.map();
    let mut verdict = Verdict::Valid;

    let face_equalities: Vec<f64> = (0..map.face_count())
        .map(|face| {
            map.face_darts(face)
                .iter()
                .map(|&d| PI - weighted.theta_of_dart(d))
                .sum::<f64>()
                - 2.0 * PI
        })
        .collect();
    if face_equalities
        .iter()
        .any(|residual| residual.abs() > FACE_EQUALITY_TOL)
    {
        verdict = Verdict::Invalid;
    }

    let mut violated_loops = Vec::new();
    if map.euler_characteristic() == 2 {
        match enumerate_simple_cycles(weighted, loop_search_bound, &mut violated_loops) {
            CycleSearch::Complete => {}
            CycleSearch::Truncated => {
                if verdict == Verdict::Valid {
                    verdict = Verdict::Undecided;
                }
            }
        }
        if !violated_loops.is_empty() {
            verdict = Verdict::Invalid;
        }
    }

    let flow_certificate = flow::feasibility_certificate(weighted);
    if flow_certificate.is_some() {
        verdict = Verdict::Invalid;
    }

    ValidationReport {
        face_equalities,
        violated_loops,
        flow_certificate,
        verdict,
    }
}

enum CycleSearch {
    Complete,
    Truncated,
}

/// Enumerates simple edge cycles (distinct vertices) of length ≤ `bound` and
/// records those whose Σ(π−θ) is below 2π, or at 2π without being a face
/// boundary. Each cycle is visited once: the start vertex is the minimum of
/// the cycle and the first edge index is smaller than the last.
fn enumerate_simple_cycles(
    weighted: &WeightedMap,
    bound: usize,
    violated: &mut Vec<ViolatedLoop>,
) -> CycleSearch {
    let map = weighted.map();
    let mut face_edge_sets: Vec<Vec<usize>> = (0..map.face_count())
        .map(|face| {
            let mut edges: Vec<usize> = map.face_darts(face).iter().map(|&d| map.edge_of(d)).collect();
            edges.sort_unstable();
            edges
        })
        .collect();
    face_edge_sets.sort();

    let mut steps = 0usize;
    let mut on_path = vec![false; map.vertex_count()];
    let mut path_vertices: Vec<usize> = Vec::new();
    let mut path_edges: Vec<usize> = Vec::new();

    fn search(
        weighted: &WeightedMap,
        start: usize,
        bound: usize,
        steps: &mut usize,
        on_path: &mut Vec<bool>,
        path_vertices: &mut Vec<usize>,
        path_edges: &mut Vec<usize>,
        face_edge_sets: &[Vec<usize>],
        violated: &mut Vec<ViolatedLoop>,
    ) -> bool {
        let map = weighted.map();
        let current = *path_vertices.last().expect("path never empty");
        for &dart in map.vertex_darts(current) {
            *steps += 1;
            if *steps > CYCLE_SEARCH_CAP {
                return false;
            }
            let edge = map.edge_of(dart);
            let target = map.vertex_of(map.opposite(dart));
            if target == start {
                // Close only when this counts the cycle once.
                if path_edges.len() >= 1 && edge != path_edges[path_edges.len() - 1] {
                    let first = path_edges[0];
                    if first < edge {
                        let mut edges = path_edges.clone();
                        edges.push(edge);
                        record_cycle(weighted, path_vertices, &edges, face_edge_sets, violated);
                    }
                }
                continue;
            }
            if target < start || on_path[target] || path_vertices.len() >= bound {
                continue;
            }
            on_path[target] = true;
            path_vertices.push(target);
            path_edges.push(edge);
            let keep_going = search(
                weighted,
                start,
                bound,
                steps,
                on_path,
                path_vertices,
                path_edges,
                face_edge_sets,
                violated,
            );
            path_edges.pop();
            path_vertices.pop();
            on_path[target] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }

    for start in 0..map.vertex_count() {
        on_path[start] = true;
        path_vertices.push(start);
        let complete = search(
            weighted,
            start,
            bound,
            &mut steps,
            &mut on_path,
            &mut path_vertices,
            &mut path_edges,
            &face_edge_sets,
            violated,
        );
        path_vertices.pop();
        on_path[start] = false;
        if !complete {
            return CycleSearch::Truncated;
        }
    }
    CycleSearch::Complete
}

/// Evaluates one closed cycle and records it if it violates the loop
/// conditions: sum below 2π, or exactly 2π on a non-face cycle.
fn record_cycle(
    weighted: &WeightedMap,
    vertices: &[usize],
    edges: &[usize],
    face_edge_sets: &[Vec<usize>],
    violated: &mut Vec<ViolatedLoop>,
) {
    // The first dart's edge was never pushed, so the edge list arrives
    // complete while vertex i still pairs with edge i.
    let excess_sum: f64 = edges.iter().map(|&e| PI - weighted.theta(e)).sum();
    if excess_sum > 2.0 * PI + FACE_EQUALITY_TOL {
        return;
    }
    if excess_sum >= 2.0 * PI - FACE_EQUALITY_TOL {
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        if face_edge_sets.binary_search(&sorted).is_ok() {
            return;
        }
    }
    violated.push(ViolatedLoop {
        vertices: vertices.to_vec(),
        edges: edges.to_vec(),
        excess_sum,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn tetrahedron_orbit_counts() {
        let map = shapes::tetrahedron();
        assert_eq!(map.dart_count(), 12);
        assert_eq!(map.vertex_count(), 4);
        assert_eq!(map.edge_count(), 6);
        assert_eq!(map.face_count(), 4);
        assert_eq!(map.euler_characteristic(), 2);
    }

    #[test]
    fn torus_orbit_counts() {
        let map = shapes::square_torus();
        assert_eq!(map.dart_count(), 16);
        assert_eq!(map.vertex_count(), 4);
        assert_eq!(map.edge_count(), 8);
        assert_eq!(map.face_count(), 4);
        assert_eq!(map.euler_characteristic(), 0);
    }

    #[test]
    fn cube_and_truncated_tetrahedron_counts() {
        let cube = shapes::cube();
        assert_eq!(
            (cube.vertex_count(), cube.edge_count(), cube.face_count()),
            (8, 12, 6)
        );
        let truncated = shapes::truncated_tetrahedron();
        assert_eq!(
            (
                truncated.vertex_count(),
                truncated.edge_count(),
                truncated.face_count()
            ),
            (12, 18, 8)
        );
        assert_eq!(truncated.euler_characteristic(), 2);
    }

    #[test]
    fn genus_two_triangulation_counts() {
        let map = shapes::genus_two_triangulation();
        assert_eq!(map.euler_characteristic(), -2);
        assert_eq!(
            (map.vertex_count(), map.edge_count(), map.face_count()),
            (46, 144, 96)
        );
        for face in 0..map.face_count() {
            assert_eq!(map.face_darts(face).len(), 3);
        }
    }

    #[test]
    fn involution_violations_are_reported() {
        // opposite(0) = 0 is a fixed dart.
        let err = SurfaceMap::build(2, vec![0, 1], vec![1, 0]).unwrap_err();
        assert!(matches!(err, MapError::FixedDart { dart: 0 }));
        // A 3-cycle is not an involution (and fixes nothing).
        let err = SurfaceMap::build(4, vec![1, 2, 0, 3], vec![3, 2, 1, 0]).unwrap_err();
        assert!(matches!(
            err,
            MapError::FixedDart { .. } | MapError::NotInvolution { .. }
        ));
    }

    #[test]
    fn disconnected_and_loop_edges_are_reported() {
        // Two separate digons: darts {0,1} and {2,3}.
        let err = SurfaceMap::build(4, vec![1, 0, 3, 2], vec![0, 1, 2, 3]).unwrap_err();
        assert!(matches!(err, MapError::Disconnected { .. }));
        // One vertex with a single loop edge.
        let err = SurfaceMap::build(2, vec![1, 0], vec![1, 0]).unwrap_err();
        assert!(matches!(err, MapError::LoopEdge { .. }));
    }

    #[test]
    fn weights_must_lie_in_open_interval() {
        let map = shapes::tetrahedron();
        let err = WeightedMap::new(map.clone(), vec![PI; 6]).unwrap_err();
        assert!(matches!(err, MapError::ThetaOutOfRange { .. }));
        let err = WeightedMap::new(map.clone(), vec![0.5; 5]).unwrap_err();
        assert!(matches!(err, MapError::BadArrayLength { .. }));
        assert!(WeightedMap::new(map, vec![PI / 3.0; 6]).is_ok());
    }

    #[test]
    fn face_walks_are_phi_orbits() {
        let map = shapes::cube();
        for face in 0..map.face_count() {
            let darts = map.face_darts(face);
            assert_eq!(darts.len(), 4);
            for (i, &d) in darts.iter().enumerate() {
                assert_eq!(map.next_in_face(d), darts[(i + 1) % darts.len()]);
                assert_eq!(map.face_of(d), face);
            }
        }
    }

    #[test]
    fn validate_accepts_uniform_weights_on_regular_faces() {
        let tetra = shapes::weighted_tetrahedron();
        let report = validate_weights(&tetra, tetra.map().vertex_count());
        assert_eq!(report.verdict, Verdict::Valid);
        assert!(report
            .face_equalities
            .iter()
            .all(|residual| residual.abs() < 1e-12));
        assert!(report.violated_loops.is_empty());
        assert!(report.flow_certificate.is_none());

        let cube = shapes::weighted_cube();
        let report = validate_weights(&cube, cube.map().vertex_count());
        assert_eq!(report.verdict, Verdict::Valid);

        let torus = shapes::weighted_square_torus();
        let report = validate_weights(&torus, torus.map().vertex_count());
        assert_eq!(report.verdict, Verdict::Valid);
    }

    #[test]
    fn validate_accepts_genus_two_triangulation() {
        let weighted = shapes::weighted_genus_two();
        let report = validate_weights(&weighted, 8);
        assert_eq!(report.verdict, Verdict::Valid);
    }

    #[test]
    fn validate_rejects_truncated_tetrahedron() {
        let weighted = shapes::weighted_truncated_tetrahedron();
        let report = validate_weights(&weighted, weighted.map().vertex_count());
        assert_eq!(report.verdict, Verdict::Invalid);
        // Triangle faces miss the equality by π/2.
        assert!(report
            .face_equalities
            .iter()
            .any(|residual| (residual + PI / 2.0).abs() < 1e-12));
    }

    #[test]
    fn validate_flags_loop_violations_on_sphere() {
        // Tetrahedron with one oversized weight: the faces through that edge
        // fail the equality, and short loops fall below 2π.
        let map = shapes::tetrahedron();
        let mut theta = vec![PI / 3.0; 6];
        theta[0] = PI - 0.01;
        let weighted = WeightedMap::new(map, theta).unwrap();
        let report = validate_weights(&weighted, weighted.map().vertex_count());
        assert_eq!(report.verdict, Verdict::Invalid);
        assert!(!report.violated_loops.is_empty());
        for violation in &report.violated_loops {
            assert!(violation.excess_sum < 2.0 * PI + FACE_EQUALITY_TOL);
            assert_eq!(violation.vertices.len(), violation.edges.len());
        }
    }
}
