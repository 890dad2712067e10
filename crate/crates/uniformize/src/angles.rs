//! Angle systems on weighted maps: hat decomposition, membership in the
//! coherent set, the volume functional with its gradient, tangent bases, the
//! stereographic restriction, and projective quotients.
//!
//! A candidate configuration assigns an angle `psi(s)` to every dart `s`.
//! Each edge splits its weight between its two darts through the hat
//! decomposition: on an edge of weight `theta` with darts `s` and `-s`,
//!
//! ```text
//! eta_hat      = (psi(s) + psi(-s) - theta) / 2
//! psi_hat(s)   = psi(s) - eta_hat
//! gamma_hat    = pi - theta - eta_hat
//! ```
//!
//! so that `psi_hat(s) + psi_hat(-s) = theta` and `eta_hat + gamma_hat =
//! pi - theta` hold identically. A system is coherent when every vertex sum
//! of `psi` equals pi, every `psi_hat(s)` lies strictly inside `(0, theta)`,
//! and the sign of every `eta_hat` matches the sign of the Euler
//! characteristic (zero for tori). The functional
//!
//! ```text
//! L = sum_s lob(psi_hat(s))
//!   - sum_e [ lob(gamma_hat(e)) + lob(eta_hat(e)) + lob(theta(e)) ]
//! ```
//!
//! is concave on the coherent set, strictly along the tangent directions
//! used here, and its critical points are exactly the angle systems realized
//! by circle configurations.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::lobach::{i_minus, i_plus, lob};
use crate::map::{SurfaceMap, WeightedMap};

/// Tolerance for the per-vertex angle-sum equalities.
pub const VERTEX_SUM_TOL: f64 = 1e-10;
/// Tolerance for the per-edge angle-sum equalities in balanced modes.
pub const EDGE_SUM_TOL: f64 = 1e-10;
/// Strict margin required of open-interval constraints to count as interior.
pub const INTERIOR_MARGIN: f64 = 1e-12;
/// Slack allowed around the closed domain intervals of the functional.
pub const DOMAIN_TOL: f64 = 1e-9;

/// How the angle vector is to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One free angle per dart, vertex sums equal to pi.
    Full,
    /// Stereographic restriction relative to the given face of a sphere map:
    /// angles on darts touching that face are pinned to fixed boundary
    /// values and only the remaining darts are free.
    Stereographic(usize),
}

/// An angle assignment on the darts of a weighted map.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSystem {
    /// Angle per dart, indexed by dart id.
    pub psi: Vec<f64>,
    /// Interpretation of the vector.
    pub mode: Mode,
    /// Sign of the Euler characteristic of the underlying surface: +1, 0 or
    /// -1. It selects the admissible sign of the edge quantities `eta_hat`.
    pub curvature_class: i8,
}

impl AngleSystem {
    /// Wraps a per-dart angle vector in full mode, inferring the curvature
    /// class from the Euler characteristic.
    pub fn full(weighted: &WeightedMap, psi: Vec<f64>) -> Self {
        assert_eq!(
            psi.len(),
            weighted.map().dart_count(),
            "angle vector length must equal the dart count"
        );
        let chi = weighted.map().euler_characteristic();
        AngleSystem {
            psi,
            mode: Mode::Full,
            curvature_class: chi.signum() as i8,
        }
    }
}

/// Why an angle-system operation failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngleError {
    /// A hat value left the closed interval on which the functional is
    /// defined by more than the allowed slack.
    #[error("{location}: hat value {value} lies outside its closed domain interval")]
    DomainViolation { location: String, value: f64 },
    /// A logarithm inside the gradient would overflow because some hat value
    /// is numerically on the boundary of the coherent set.
    #[error("{location}: gradient undefined, angle is numerically on the domain boundary")]
    BoundaryPoint { location: String },
    /// The stereographic restriction only applies to sphere maps.
    #[error("stereographic restriction requires a sphere map, found Euler characteristic {chi}")]
    NotSphere { chi: i64 },
    /// The chosen face cannot anchor a stereographic restriction.
    #[error("face {face} unusable for stereographic restriction: {reason}")]
    InvalidFace { face: usize, reason: String },
    /// The residual angle budget at a vertex off the chosen face must be
    /// positive whenever the vertex retains free darts, and never negative.
    #[error("vertex {vertex} is left with non-positive angle budget {theta_v}")]
    NonpositiveThetaV { vertex: usize, theta_v: f64 },
    /// The deck transformation fixes a dart, edge, vertex or face.
    #[error("deck transformation is not free: {detail}")]
    InvolutionNotFree { detail: String },
    /// The deck transformation does not respect the map structure.
    #[error("deck transformation is not a map automorphism: {detail}")]
    NotAutomorphism { detail: String },
}

/// Hat decomposition of an angle system: `psi_hat` per dart, `eta_hat` and
/// `gamma_hat` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct HatData {
    pub psi_hat: Vec<f64>,
    pub eta_hat: Vec<f64>,
    pub gamma_hat: Vec<f64>,
}

/// Marks the edges whose `eta_hat` is pinned to exactly zero: all edges in
/// full mode on a torus, and the edges away from the anchor face in
/// stereographic mode.
fn balanced_edges(weighted: &WeightedMap, system: &AngleSystem) -> Vec<bool> {
    let map = weighted.map();
    match system.mode {
        Mode::Full => vec![system.curvature_class == 0; map.edge_count()],
        Mode::Stereographic(face) => {
            let on_face = vertices_on_face(map, face);
            (0..map.edge_count())
                .map(|e| {
                    let [v, w] = map.edge_endpoints(e);
                    !on_face[v] && !on_face[w]
                })
                .collect()
        }
    }
}

/// Flags the vertices lying on the given face.
fn vertices_on_face(map: &SurfaceMap, face: usize) -> Vec<bool> {
    let mut on_face = vec![false; map.vertex_count()];
    for &d in map.face_darts(face) {
        on_face[map.vertex_of(d)] = true;
    }
    on_face
}

/// Computes the hat decomposition of an angle system.
///
/// On edges that carry the balancing equality `psi(s) + psi(-s) = theta`
/// (all edges on a torus, the free edges of a stereographic system) the
/// value `eta_hat` is stored as exact zero rather than recomputed from the
/// defining formula, so downstream code can branch on it reliably.
pub fn hat_data(weighted: &WeightedMap, system: &AngleSystem) -> HatData {
    let map = weighted.map();
    let balanced = balanced_edges(weighted, system);
    let mut psi_hat = system.psi.clone();
    let mut eta_hat = vec![0.0; map.edge_count()];
    let mut gamma_hat = vec![0.0; map.edge_count()];
    for e in 0..map.edge_count() {
        let [s, t] = map.edge_darts(e);
        let theta = weighted.theta(e);
        if balanced[e] {
            eta_hat[e] = 0.0;
            gamma_hat[e] = PI - theta;
        } else {
            let eta = 0.5 * (system.psi[s] + system.psi[t] - theta);
            eta_hat[e] = eta;
            gamma_hat[e] = PI - theta - eta;
            psi_hat[s] = system.psi[s] - eta;
            psi_hat[t] = system.psi[t] - eta;
        }
    }
    HatData {
        psi_hat,
        eta_hat,
        gamma_hat,
    }
}

/// A single violated constraint, with the magnitude of the violation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub description: String,
    pub magnitude: f64,
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub is_member: bool,
    pub violations: Vec<ConstraintViolation>,
}

/// Tests whether an angle system lies in the interior of the coherent set
/// appropriate to its mode and curvature class, reporting every violated
/// constraint.
pub fn is_member(weighted: &WeightedMap, system: &AngleSystem) -> MembershipReport {
    let map = weighted.map();
    assert_eq!(system.psi.len(), map.dart_count());
    let mut violations: Vec<ConstraintViolation> = Vec::new();

    match system.mode {
        Mode::Full => {
            for v in 0..map.vertex_count() {
                let sum: f64 = map.vertex_darts(v).iter().map(|&d| system.psi[d]).sum();
                let dev = (sum - PI).abs();
                if dev > VERTEX_SUM_TOL {
                    violations.push(ConstraintViolation {
                        description: format!("vertex {v}: angle sum deviates from pi by {dev:.3e}"),
                        magnitude: dev,
                    });
                }
            }
        }
        Mode::Stereographic(face) => {
            let sub = match stereographic_subspace(weighted, face) {
                Ok(sub) => sub,
                Err(err) => {
                    violations.push(ConstraintViolation {
                        description: format!("stereographic structure invalid: {err}"),
                        magnitude: f64::NAN,
                    });
                    return MembershipReport {
                        is_member: false,
                        violations,
                    };
                }
            };
            for d in 0..map.dart_count() {
                if let Some(pinned) = sub.boundary_psi[d] {
                    let dev = (system.psi[d] - pinned).abs();
                    if dev > INTERIOR_MARGIN {
                        violations.push(ConstraintViolation {
                            description: format!(
                                "dart {d}: boundary angle deviates from its pinned value by {dev:.3e}"
                            ),
                            magnitude: dev,
                        });
                    }
                }
            }
            for &v in &sub.v_star {
                let sum: f64 = sub.star_darts_by_vertex[v]
                    .iter()
                    .map(|&d| system.psi[d])
                    .sum();
                let dev = (sum - sub.theta_v[v]).abs();
                if dev > VERTEX_SUM_TOL {
                    violations.push(ConstraintViolation {
                        description: format!(
                            "vertex {v}: free angle sum deviates from its budget by {dev:.3e}"
                        ),
                        magnitude: dev,
                    });
                }
            }
        }
    }

    let hats = hat_data(weighted, system);
    let balanced = balanced_edges(weighted, system);
    for e in 0..map.edge_count() {
        let [s, t] = map.edge_darts(e);
        let theta = weighted.theta(e);
        if balanced[e] {
            let dev = (system.psi[s] + system.psi[t] - theta).abs();
            if dev > EDGE_SUM_TOL {
                violations.push(ConstraintViolation {
                    description: format!(
                        "edge {e}: angle sum deviates from its weight by {dev:.3e}"
                    ),
                    magnitude: dev,
                });
            }
            for &d in &[s, t] {
                let x = system.psi[d];
                if !(x > INTERIOR_MARGIN && x < theta - INTERIOR_MARGIN) {
                    violations.push(ConstraintViolation {
                        description: format!("dart {d}: angle {x} is not interior to (0, weight)"),
                        magnitude: interval_escape(x, 0.0, theta),
                    });
                }
            }
        } else if system.mode == Mode::Full {
            for &d in &[s, t] {
                let x = hats.psi_hat[d];
                if !(x > INTERIOR_MARGIN && x < theta - INTERIOR_MARGIN) {
                    violations.push(ConstraintViolation {
                        description: format!(
                            "dart {d}: hat angle {x} is not interior to (0, weight)"
                        ),
                        magnitude: interval_escape(x, 0.0, theta),
                    });
                }
            }
            // Full-mode systems on a torus have every edge balanced, so the
            // curvature class is nonzero on this branch.
            let eta = hats.eta_hat[e];
            let (lo, hi) = if system.curvature_class > 0 {
                (0.0, PI - theta)
            } else {
                (-theta, 0.0)
            };
            if !(eta > lo + INTERIOR_MARGIN && eta < hi - INTERIOR_MARGIN) {
                violations.push(ConstraintViolation {
                    description: format!(
                        "edge {e}: eta hat {eta} is not interior to the sign class ({lo}, {hi})"
                    ),
                    magnitude: interval_escape(eta, lo, hi),
                });
            }
        }
        // Pinned edges of a stereographic system were checked against the
        // boundary table above; their hat values are structural.
    }

    MembershipReport {
        is_member: violations.is_empty(),
        violations,
    }
}

/// Distance by which `x` escapes the closed interval `[lo, hi]`, zero if it
/// lies inside.
fn interval_escape(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// Checks that every hat value lies in the closed interval on which the
/// functional extends continuously.
fn check_domain(weighted: &WeightedMap, system: &AngleSystem, hats: &HatData) -> Result<(), AngleError> {
    let map = weighted.map();
    for d in 0..map.dart_count() {
        let theta = weighted.theta_of_dart(d);
        let x = hats.psi_hat[d];
        if x < -DOMAIN_TOL || x > theta + DOMAIN_TOL {
            return Err(AngleError::DomainViolation {
                location: format!("dart {d}"),
                value: x,
            });
        }
    }
    let balanced = balanced_edges(weighted, system);
    for e in 0..map.edge_count() {
        if balanced[e] {
            continue;
        }
        let theta = weighted.theta(e);
        let eta = hats.eta_hat[e];
        let (lo, hi) = match (system.mode, system.curvature_class.cmp(&0)) {
            (Mode::Stereographic(_), _) => (0.0, PI - theta),
            (Mode::Full, std::cmp::Ordering::Greater) => (0.0, PI - theta),
            (Mode::Full, std::cmp::Ordering::Equal) => (0.0, 0.0),
            (Mode::Full, std::cmp::Ordering::Less) => (-theta, 0.0),
        };
        if eta < lo - DOMAIN_TOL || eta > hi + DOMAIN_TOL {
            return Err(AngleError::DomainViolation {
                location: format!("edge {e}"),
                value: eta,
            });
        }
    }
    Ok(())
}

/// Evaluates the functional in its additive normal form, one Lobachevsky
/// term per dart and three per edge.
pub fn functional_value(weighted: &WeightedMap, system: &AngleSystem) -> Result<f64, AngleError> {
    let map = weighted.map();
    let hats = hat_data(weighted, system);
    check_domain(weighted, system, &hats)?;
    let mut value = 0.0;
    for d in 0..map.dart_count() {
        value += lob(hats.psi_hat[d]);
    }
    for e in 0..map.edge_count() {
        value -= lob(hats.gamma_hat[e]) + lob(hats.eta_hat[e]) + lob(weighted.theta(e));
    }
    Ok(value)
}

/// Evaluates the functional through the concave edge profiles: half the sum
/// of `i_plus` over darts minus the sum of `i_minus` over edges. Agrees with
/// [`functional_value`] identically; kept as an independent evaluation route.
pub fn functional_value_edges(
    weighted: &WeightedMap,
    system: &AngleSystem,
) -> Result<f64, AngleError> {
    let map = weighted.map();
    let hats = hat_data(weighted, system);
    check_domain(weighted, system, &hats)?;
    let mut value = 0.0;
    for d in 0..map.dart_count() {
        let theta = weighted.theta_of_dart(d);
        value += 0.5
            * i_plus(theta, hats.psi_hat[d]).expect("edge weights of a weighted map lie in (0, pi)");
    }
    for e in 0..map.edge_count() {
        value -= i_minus(weighted.theta(e), hats.eta_hat[e])
            .expect("edge weights of a weighted map lie in (0, pi)");
    }
    Ok(value)
}

/// `ln |2 sin x|`, failing when the argument sits numerically on a zero of
/// the sine.
fn log_two_sin(x: f64, location: impl Fn() -> String) -> Result<f64, AngleError> {
    let a = (2.0 * x.sin()).abs();
    if a < 1e-300 {
        return Err(AngleError::BoundaryPoint {
            location: location(),
        });
    }
    Ok(a.ln())
}

/// Per-dart derivative of the functional with respect to `psi(s)`, using the
/// complete four-term expression. Only valid in modes whose edge terms stay
/// away from zero, which is the case for interior full-mode systems on
/// surfaces of nonzero Euler characteristic.
pub fn gradient_darts(weighted: &WeightedMap, system: &AngleSystem) -> Result<Vec<f64>, AngleError> {
    let map = weighted.map();
    let hats = hat_data(weighted, system);
    let mut log_psi = vec![0.0; map.dart_count()];
    for d in 0..map.dart_count() {
        log_psi[d] = log_two_sin(hats.psi_hat[d], || format!("dart {d}"))?;
    }
    let mut log_gamma = vec![0.0; map.edge_count()];
    let mut log_eta = vec![0.0; map.edge_count()];
    for e in 0..map.edge_count() {
        log_gamma[e] = log_two_sin(hats.gamma_hat[e], || format!("edge {e} (gamma hat)"))?;
        log_eta[e] = log_two_sin(hats.eta_hat[e], || format!("edge {e} (eta hat)"))?;
    }
    let mut g = vec![0.0; map.dart_count()];
    for d in 0..map.dart_count() {
        let e = map.edge_of(d);
        let o = map.opposite(d);
        g[d] = 0.5 * (-log_psi[d] + log_psi[o] - log_gamma[e] + log_eta[e]);
    }
    Ok(g)
}

/// A sparse tangent vector: pairs of dart id and coefficient.
pub type SparseVector = Vec<(usize, f64)>;

/// A family of tangent directions along which the functional is
/// differentiated.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis {
    /// The vectors, each sparse over darts.
    pub vectors: Vec<SparseVector>,
    /// True when every vector satisfies `U(s) + U(-s) = 0`, in which case
    /// the edge terms of the gradient cancel in pairs and are omitted from
    /// evaluation before any logarithm of a vanishing hat value is formed.
    pub antisymmetric: bool,
}

/// Directional derivatives of the functional along the basis vectors.
///
/// For antisymmetric bases only the dart terms `-ln |2 sin psi_hat(s)|`
/// enter; the per-edge terms cancel exactly and are never evaluated, so
/// balanced edges with `eta_hat = 0` cause no harm.
pub fn gradient(
    weighted: &WeightedMap,
    system: &AngleSystem,
    basis: &TangentBasis,
) -> Result<Vec<f64>, AngleError> {
    if basis.antisymmetric {
        let hats = hat_data(weighted, system);
        let mut cache: Vec<f64> = vec![f64::NAN; weighted.map().dart_count()];
        let mut coeffs = Vec::with_capacity(basis.vectors.len());
        for vector in &basis.vectors {
            let mut acc = 0.0;
            for &(d, c) in vector {
                if cache[d].is_nan() {
                    cache[d] = -log_two_sin(hats.psi_hat[d], || format!("dart {d}"))?;
                }
                acc += c * cache[d];
            }
            coeffs.push(acc);
        }
        Ok(coeffs)
    } else {
        let g = gradient_darts(weighted, system)?;
        Ok(basis
            .vectors
            .iter()
            .map(|vector| vector.iter().map(|&(d, c)| c * g[d]).sum())
            .collect())
    }
}

/// Tangent basis for full mode: for every vertex, the differences between
/// its first dart and each later dart. These span the tangent space of the
/// vertex-sum equalities; they are not antisymmetric, so the gradient keeps
/// its edge terms.
pub fn full_mode_basis(weighted: &WeightedMap) -> TangentBasis {
    let map = weighted.map();
    let mut vectors = Vec::new();
    for v in 0..map.vertex_count() {
        let darts = map.vertex_darts(v);
        for &d in &darts[1..] {
            vectors.push(vec![(darts[0], -1.0), (d, 1.0)]);
        }
    }
    TangentBasis {
        vectors,
        antisymmetric: false,
    }
}

/// Face loop vectors: for each face, +1 on its boundary darts and -1 on
/// their opposites. They preserve vertex sums and edge sums, hence are
/// antisymmetric tangent directions in every mode.
pub fn loop_basis(weighted: &WeightedMap) -> TangentBasis {
    let map = weighted.map();
    let mut vectors = Vec::new();
    for f in 0..map.face_count() {
        let mut coeff = vec![0.0; map.dart_count()];
        for &d in map.face_darts(f) {
            coeff[d] += 1.0;
            coeff[map.opposite(d)] -= 1.0;
        }
        let vector: SparseVector = coeff
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0.0)
            .collect();
        if !vector.is_empty() {
            vectors.push(vector);
        }
    }
    TangentBasis {
        vectors,
        antisymmetric: true,
    }
}

/// Row-reduces the matrix in place with partial pivoting and returns the
/// pivot positions as (row, column) pairs.
fn row_reduce(mat: &mut [Vec<f64>], ncols: usize, tol: f64) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == mat.len() {
            break;
        }
        let mut best = r;
        let mut best_val = 0.0;
        for (i, row) in mat.iter().enumerate().skip(r) {
            let v = row[col].abs();
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        if best_val <= tol {
            continue;
        }
        mat.swap(r, best);
        let p = mat[r][col];
        for x in mat[r].iter_mut() {
            *x /= p;
        }
        for i in 0..mat.len() {
            if i != r && mat[i][col] != 0.0 {
                let f = mat[i][col];
                let (head, tail) = mat.split_at_mut(r.max(i));
                let (row_i, row_r) = if i < r {
                    (&mut head[i], &tail[0])
                } else {
                    (&mut tail[0], &head[r])
                };
                for (x, y) in row_i.iter_mut().zip(row_r.iter()) {
                    *x -= f * y;
                }
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    pivots
}

/// Basis of the null space of the affine constraints in the balanced modes:
/// vertex sums and edge sums together. Columns are the free darts listed in
/// `columns`; one basis vector is produced per non-pivot column.
fn null_space_basis(mut rows: Vec<Vec<f64>>, columns: &[usize]) -> Vec<SparseVector> {
    let ncols = columns.len();
    let pivots = row_reduce(&mut rows, ncols, 1e-9);
    let pivot_cols: HashSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for col in 0..ncols {
        if pivot_cols.contains(&col) {
            continue;
        }
        let mut vector: SparseVector = vec![(columns[col], 1.0)];
        for &(pr, pc) in &pivots {
            let v = -rows[pr][col];
            if v.abs() > 1e-12 {
                vector.push((columns[pc], v));
            }
        }
        vector.sort_by_key(|&(d, _)| d);
        basis.push(vector);
    }
    basis
}

/// Tangent basis for the balanced modes, where both vertex sums and edge
/// sums are equality constraints: a basis of the common null space, computed
/// by row reduction with partial pivoting. Every vector is automatically
/// antisymmetric because it annihilates the edge-sum rows.
///
/// Pass the stereographic structure to restrict to the free darts of a
/// sphere map; pass `None` for the full mode of a torus.
pub fn constrained_basis(weighted: &WeightedMap, stereo: Option<&StereoSubspace>) -> TangentBasis {
    let map = weighted.map();
    let (columns, rows) = match stereo {
        None => {
            let columns: Vec<usize> = (0..map.dart_count()).collect();
            let mut rows = Vec::with_capacity(map.vertex_count() + map.edge_count());
            for v in 0..map.vertex_count() {
                let mut row = vec![0.0; columns.len()];
                for &d in map.vertex_darts(v) {
                    row[d] = 1.0;
                }
                rows.push(row);
            }
            for e in 0..map.edge_count() {
                let mut row = vec![0.0; columns.len()];
                let [s, t] = map.edge_darts(e);
                row[s] = 1.0;
                row[t] = 1.0;
                rows.push(row);
            }
            (columns, rows)
        }
        Some(sub) => {
            let columns = sub.s_star.clone();
            let mut col_of = vec![usize::MAX; map.dart_count()];
            for (k, &d) in columns.iter().enumerate() {
                col_of[d] = k;
            }
            let mut rows = Vec::with_capacity(sub.v_star.len() + sub.e_star.len());
            for &v in &sub.v_star {
                let mut row = vec![0.0; columns.len()];
                for &d in &sub.star_darts_by_vertex[v] {
                    row[col_of[d]] = 1.0;
                }
                rows.push(row);
            }
            for &e in &sub.e_star {
                let mut row = vec![0.0; columns.len()];
                let [s, t] = map.edge_darts(e);
                row[col_of[s]] = 1.0;
                row[col_of[t]] = 1.0;
                rows.push(row);
            }
            (columns, rows)
        }
    };
    TangentBasis {
        vectors: null_space_basis(rows, &columns),
        antisymmetric: true,
    }
}

/// Independent spanning set of the deck-symmetric tangent directions of a
/// full-mode system: the vertex-difference vectors averaged with their
/// images under the involution, then row-reduced to an independent family.
/// Used to maximize over angle systems invariant under a free deck
/// transformation.
pub fn symmetric_full_basis(weighted: &WeightedMap, involution: &[usize]) -> TangentBasis {
    let map = weighted.map();
    let base = full_mode_basis(weighted);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(base.vectors.len());
    for vector in &base.vectors {
        let mut row = vec![0.0; map.dart_count()];
        for &(d, c) in vector {
            row[d] += 0.5 * c;
            row[involution[d]] += 0.5 * c;
        }
        rows.push(row);
    }
    let pivots = row_reduce(&mut rows, map.dart_count(), 1e-9);
    let vectors = pivots
        .iter()
        .map(|&(r, _)| {
            rows[r]
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c.abs() > 1e-12)
                .map(|(d, &c)| (d, c))
                .collect()
        })
        .collect();
    TangentBasis {
        vectors,
        antisymmetric: false,
    }
}

/// The combinatorial and boundary data of a stereographic restriction: the
/// anchor face, the vertices and edges away from it, the pinned boundary
/// angles, and the residual angle budget of each free vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoSubspace {
    /// The anchor face.
    pub face: usize,
    /// Per vertex: does it lie on the anchor face.
    pub vertex_on_face: Vec<bool>,
    /// Vertices off the anchor face, ascending.
    pub v_star: Vec<usize>,
    /// Edges with both endpoints off the anchor face, ascending.
    pub e_star: Vec<usize>,
    /// Darts of those edges, ascending; these carry the free angles.
    pub s_star: Vec<usize>,
    /// Per edge: membership in `e_star`.
    pub star_edge: Vec<bool>,
    /// Per dart: membership in `s_star`.
    pub star_dart: Vec<bool>,
    /// Per dart: the pinned boundary angle, `None` exactly on free darts.
    pub boundary_psi: Vec<Option<f64>>,
    /// Per vertex: the angle budget remaining after the pinned darts,
    /// `pi` minus the weights of incident edges reaching the anchor face.
    /// Zero for vertices on the face itself.
    pub theta_v: Vec<f64>,
    /// Per vertex: its free darts in ascending order.
    pub star_darts_by_vertex: Vec<Vec<usize>>,
}

/// Builds the stereographic restriction of a weighted sphere map relative to
/// a face.
///
/// Fails with [`AngleError::NotSphere`] off the sphere, with
/// [`AngleError::InvalidFace`] when the face id is out of range or two of
/// its vertices are joined by an edge not on its boundary, and with
/// [`AngleError::NonpositiveThetaV`] when some free vertex is left with a
/// negative angle budget, or a zero budget while still carrying free darts.
pub fn stereographic_subspace(
    weighted: &WeightedMap,
    face: usize,
) -> Result<StereoSubspace, AngleError> {
    let map = weighted.map();
    let chi = map.euler_characteristic();
    if chi != 2 {
        return Err(AngleError::NotSphere { chi });
    }
    if face >= map.face_count() {
        return Err(AngleError::InvalidFace {
            face,
            reason: format!("face id out of range (face count {})", map.face_count()),
        });
    }
    let on_face = vertices_on_face(map, face);
    let face_edges: HashSet<usize> = map.face_darts(face).iter().map(|&d| map.edge_of(d)).collect();
    for e in 0..map.edge_count() {
        let [v, w] = map.edge_endpoints(e);
        if on_face[v] && on_face[w] && !face_edges.contains(&e) {
            return Err(AngleError::InvalidFace {
                face,
                reason: format!(
                    "edge {e} joins two of its vertices but does not lie on its boundary"
                ),
            });
        }
    }

    let v_star: Vec<usize> = (0..map.vertex_count()).filter(|&v| !on_face[v]).collect();
    let mut star_edge = vec![false; map.edge_count()];
    let mut e_star = Vec::new();
    for e in 0..map.edge_count() {
        let [v, w] = map.edge_endpoints(e);
        if !on_face[v] && !on_face[w] {
            star_edge[e] = true;
            e_star.push(e);
        }
    }
    let mut star_dart = vec![false; map.dart_count()];
    let mut s_star = Vec::new();
    for d in 0..map.dart_count() {
        if star_edge[map.edge_of(d)] {
            star_dart[d] = true;
            s_star.push(d);
        }
    }
    let mut star_darts_by_vertex = vec![Vec::new(); map.vertex_count()];
    for &d in &s_star {
        star_darts_by_vertex[map.vertex_of(d)].push(d);
    }

    let mut theta_v = vec![0.0; map.vertex_count()];
    for &v in &v_star {
        let mut budget = PI;
        for &d in map.vertex_darts(v) {
            if !star_dart[d] {
                budget -= weighted.theta_of_dart(d);
            }
        }
        theta_v[v] = budget;
        let has_free_darts = !star_darts_by_vertex[v].is_empty();
        if budget < 0.0 || (budget <= 0.0 && has_free_darts) {
            return Err(AngleError::NonpositiveThetaV {
                vertex: v,
                theta_v: budget,
            });
        }
    }

    let mut boundary_psi = vec![None; map.dart_count()];
    for d in 0..map.dart_count() {
        if star_dart[d] {
            continue;
        }
        let v = map.vertex_of(d);
        let w = map.vertex_of(map.opposite(d));
        boundary_psi[d] = Some(if on_face[v] && on_face[w] {
            FRAC_PI_2
        } else if on_face[v] {
            0.0
        } else {
            weighted.theta_of_dart(d)
        });
    }

    Ok(StereoSubspace {
        face,
        vertex_on_face: on_face,
        v_star,
        e_star,
        s_star,
        star_edge,
        star_dart,
        boundary_psi,
        theta_v,
        star_darts_by_vertex,
    })
}

impl StereoSubspace {
    /// Assembles a stereographic angle system from values on the free darts,
    /// given in the order of `s_star`, filling the pinned boundary angles.
    pub fn system(&self, interior: &[f64]) -> AngleSystem {
        assert_eq!(
            interior.len(),
            self.s_star.len(),
            "one interior angle per free dart"
        );
        let mut psi: Vec<f64> = self
            .boundary_psi
            .iter()
            .map(|value| value.unwrap_or(0.0))
            .collect();
        for (k, &d) in self.s_star.iter().enumerate() {
            psi[d] = interior[k];
        }
        AngleSystem {
            psi,
            mode: Mode::Stereographic(self.face),
            curvature_class: 1,
        }
    }

    /// Extracts the free angles of a system in the order of `s_star`.
    pub fn interior_values(&self, system: &AngleSystem) -> Vec<f64> {
        self.s_star.iter().map(|&d| system.psi[d]).collect()
    }
}

/// The symmetrization of a sphere angle system under a free involutive deck
/// transformation, together with the dart orbits of the quotient surface.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSystem {
    /// The averaged, deck-invariant system on the covering sphere map.
    pub system: AngleSystem,
    /// Per dart of the cover: the id of its quotient dart.
    pub dart_orbit: Vec<usize>,
    /// Number of quotient darts.
    pub orbit_count: usize,
}

/// Averages a sphere angle system over a free involutive deck transformation
/// and returns the deck-invariant result with its dart orbits. The quotient
/// surface is non-orientable of Euler characteristic one, so it is
/// represented by the symmetric data on its orientable double cover.
///
/// The transformation must commute with the edge involution and either
/// preserve or reverse the vertex rotation, and must move every dart, edge,
/// vertex and face.
pub fn reduce_projective(
    weighted: &WeightedMap,
    involution: &[usize],
    psi: &[f64],
) -> Result<QuotientSystem, AngleError> {
    let map = weighted.map();
    let n = map.dart_count();
    assert_eq!(involution.len(), n, "one image per dart");
    assert_eq!(psi.len(), n, "one angle per dart");
    let chi = map.euler_characteristic();
    if chi != 2 {
        return Err(AngleError::NotSphere { chi });
    }
    for d in 0..n {
        let i = involution[d];
        if i >= n {
            return Err(AngleError::NotAutomorphism {
                detail: format!("image {i} of dart {d} is out of range"),
            });
        }
        if involution[i] != d {
            return Err(AngleError::NotAutomorphism {
                detail: format!("not an involution at dart {d}"),
            });
        }
    }
    for d in 0..n {
        if involution[map.opposite(d)] != map.opposite(involution[d]) {
            return Err(AngleError::NotAutomorphism {
                detail: format!("does not commute with the edge involution at dart {d}"),
            });
        }
    }
    let mut sigma_inv = vec![0; n];
    for d in 0..n {
        sigma_inv[map.next_at_vertex(d)] = d;
    }
    let preserves = (0..n).all(|d| involution[map.next_at_vertex(d)] == map.next_at_vertex(involution[d]));
    let reverses = (0..n).all(|d| involution[map.next_at_vertex(d)] == sigma_inv[involution[d]]);
    if !preserves && !reverses {
        return Err(AngleError::NotAutomorphism {
            detail: "neither preserves nor reverses the vertex rotation".to_string(),
        });
    }
    for d in 0..n {
        let i = involution[d];
        if i == d {
            return Err(AngleError::InvolutionNotFree {
                detail: format!("dart {d} is fixed"),
            });
        }
        if i == map.opposite(d) {
            return Err(AngleError::InvolutionNotFree {
                detail: format!("edge {} is fixed", map.edge_of(d)),
            });
        }
        if map.vertex_of(i) == map.vertex_of(d) {
            return Err(AngleError::InvolutionNotFree {
                detail: format!("vertex {} is fixed", map.vertex_of(d)),
            });
        }
        if map.face_of(i) == map.face_of(d) {
            return Err(AngleError::InvolutionNotFree {
                detail: format!("face {} is fixed", map.face_of(d)),
            });
        }
    }

    let averaged: Vec<f64> = (0..n).map(|d| 0.5 * (psi[d] + psi[involution[d]])).collect();
    let mut dart_orbit = vec![usize::MAX; n];
    let mut orbit_count = 0;
    for d in 0..n {
        if dart_orbit[d] == usize::MAX {
            dart_orbit[d] = orbit_count;
            dart_orbit[involution[d]] = orbit_count;
            orbit_count += 1;
        }
    }
    Ok(QuotientSystem {
        system: AngleSystem {
            psi: averaged,
            mode: Mode::Full,
            curvature_class: 1,
        },
        dart_orbit,
        orbit_count,
    })
}
