//! Maximization of the volume functional over coherent angle systems.
//!
//! The functional is strictly concave along every tangent direction of the
//! coherent polytope for surfaces of nonpositive Euler characteristic and on
//! the stereographic subspaces of the sphere, so the maximizer is found by a
//! damped Newton ascent: at each step the reduced Hessian is assembled from
//! the second derivative of the Lobachevsky function, the Newton system is
//! solved through a Cholesky factorization of its negation, and the step is
//! backtracked until it lands on a member of the polytope that achieves the
//! expected increase. On the sphere the unrestricted functional has only
//! saddle points and the solver refuses to run; the maximum lives on the
//! stereographic subspace of any chosen face.
//!
//! A separate certificate recomputes, from the optimizer's output alone, how
//! far the realized triangle legs are from assembling into disks of a single
//! radius per vertex, which is the geometric meaning of criticality.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::angles::{self, AngleError, AngleSystem, Mode, TangentBasis};
use crate::geom::{self, GeomError};
use crate::map::WeightedMap;

/// Armijo sufficient-increase fraction for the backtracking line search.
const ARMIJO_SLOPE: f64 = 1e-4;
/// Smallest step scale tried before declaring the line search stuck.
const MIN_STEP: f64 = 1e-18;
/// Relative leg spread below which a certificate counts as exact in tests.
pub const SPREAD_TOL: f64 = 1e-7;

/// Options for [`maximize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Stop when the maximum norm of the reduced gradient drops this low.
    pub grad_tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Multiplicative backtracking factor of the line search.
    pub line_search_shrink: f64,
    /// Smallest distance any moved angle may keep from 0 and pi.
    pub interior_margin: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-10,
            max_iter: 200,
            line_search_shrink: 0.5,
            interior_margin: 1e-12,
        }
    }
}

/// One accepted iteration of the ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Iteration number, starting at 1.
    pub iteration: usize,
    /// Functional value after the step.
    pub value: f64,
    /// Maximum norm of the reduced gradient before the step.
    pub grad_norm: f64,
    /// Accepted step scale.
    pub step: f64,
    /// Whether the Newton direction was used (as opposed to the gradient
    /// fallback).
    pub newton: bool,
}

/// Result of a successful maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// The maximizer.
    pub system: AngleSystem,
    /// Functional value at the maximizer.
    pub value: f64,
    /// Maximum norm of the reduced gradient at the maximizer.
    pub grad_norm: f64,
    /// Number of accepted iterations.
    pub iterations: usize,
    /// Per-iteration records, in order.
    pub trace: Vec<IterationRecord>,
}

/// Why a maximization failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    /// The starting system is not an interior member of the coherent
    /// polytope.
    #[error("the start is not an interior coherent angle system: {detail}")]
    NotInterior { detail: String },
    /// Full-mode maximization was requested on a sphere, where every
    /// critical point of the unrestricted functional is a saddle.
    #[error(
        "the unrestricted functional on a sphere has only saddle points; \
         maximize over a stereographic subspace instead"
    )]
    SphereFullMode,
    /// The gradient tolerance was not reached within the iteration budget.
    #[error("no convergence within {max_iter} iterations; best gradient norm {grad_norm:.3e}")]
    MaxIterExceeded {
        max_iter: usize,
        grad_norm: f64,
        /// State after the last accepted iteration.
        best: Box<SolveReport>,
    },
    /// An angle-system evaluation failed.
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Chooses the tangent basis the maximization runs over, from the mode and
/// curvature class of the starting system.
fn reduction_basis(
    weighted: &WeightedMap,
    system: &AngleSystem,
) -> Result<TangentBasis, SolveError> {
    match system.mode {
        Mode::Stereographic(face) => {
            let sub = angles::stereographic_subspace(weighted, face)?;
            Ok(angles::constrained_basis(weighted, Some(&sub)))
        }
        Mode::Full => match weighted.map().euler_characteristic() {
            chi if chi > 0 => Err(SolveError::SphereFullMode),
            0 => Ok(angles::constrained_basis(weighted, None)),
            _ => Ok(angles::full_mode_basis(weighted)),
        },
    }
}

/// Assembles the negated reduced Hessian of the functional at `system` over
/// `basis`. The functional is concave there, so the result is positive
/// semidefinite and generically positive definite.
fn negated_reduced_hessian(
    weighted: &WeightedMap,
    system: &AngleSystem,
    basis: &TangentBasis,
) -> DMatrix<f64> {
    let map = weighted.map();
    let dim = basis.vectors.len();
    let hats = angles::hat_data(weighted, system);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    if basis.antisymmetric {
        // Along antisymmetric directions the edge terms of the Hessian
        // cancel and each dart contributes -cot(psi_hat) times the product
        // of the direction coefficients. Only darts in the support of some
        // basis vector are touched, so pinned angles never reach the
        // cotangent.
        let mut support: Vec<Vec<(usize, f64)>> = vec![Vec::new(); map.dart_count()];
        for (i, vector) in basis.vectors.iter().enumerate() {
            for &(d, c) in vector {
                support[d].push((i, c));
            }
        }
        for d in map.darts() {
            if support[d].is_empty() {
                continue;
            }
            let weight = 1.0 / hats.psi_hat[d].tan();
            for &(i, ci) in &support[d] {
                for &(j, cj) in &support[d] {
                    h[(i, j)] += weight * ci * cj;
                }
            }
        }
    } else {
        // Full-mode Hessian over dart coordinates is block diagonal per
        // edge: with the second derivative -cot evaluated at the four hat
        // values of the edge, the diagonal entry is p and the off-diagonal
        // entry is q below. Project onto the basis.
        let mut p_edge = vec![0.0f64; map.edge_count()];
        let mut q_edge = vec![0.0f64; map.edge_count()];
        for e in 0..map.edge_count() {
            let [s, t] = map.edge_darts(e);
            let a = -1.0 / hats.psi_hat[s].tan();
            let a2 = -1.0 / hats.psi_hat[t].tan();
            let c = -1.0 / hats.gamma_hat[e].tan();
            let d = -1.0 / hats.eta_hat[e].tan();
            p_edge[e] = 0.25 * (a + a2 - c - d);
            q_edge[e] = 0.25 * (-a - a2 - c - d);
        }
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for vector in &basis.vectors {
            let mut dense = vec![0.0f64; map.dart_count()];
            for &(d, c) in vector {
                dense[d] += c;
            }
            let mut image = vec![0.0f64; map.dart_count()];
            for e in 0..map.edge_count() {
                let [s, t] = map.edge_darts(e);
                image[s] = p_edge[e] * dense[s] + q_edge[e] * dense[t];
                image[t] = q_edge[e] * dense[s] + p_edge[e] * dense[t];
            }
            images.push(image);
        }
        for (j, image) in images.iter().enumerate() {
            for (i, vector) in basis.vectors.iter().enumerate() {
                let mut acc = 0.0;
                for &(d, c) in vector {
                    acc += c * image[d];
                }
                h[(i, j)] -= acc;
            }
        }
    }
    h
}

fn infinity_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Applies a reduced step to the angle vector.
fn apply_step(psi: &mut [f64], basis: &TangentBasis, direction: &[f64], scale: f64) {
    for (vector, &coeff) in basis.vectors.iter().zip(direction) {
        for &(d, c) in vector {
            psi[d] += scale * coeff * c;
        }
    }
}

/// Whether every angle moved by the basis stays inside the margin.
fn within_margin(psi: &[f64], basis: &TangentBasis, margin: f64) -> bool {
    basis.vectors.iter().flatten().all(|&(d, _)| {
        psi[d] > margin && psi[d] < PI - margin
    })
}

/// Maximizes the functional over the coherent members reachable from
/// `start` in its own mode. The start must be an interior member. Returns
/// the maximizer together with the full iteration trace; the run is
/// deterministic, so identical inputs produce identical traces.
pub fn maximize(
    weighted: &WeightedMap,
    start: &AngleSystem,
    options: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let basis = reduction_basis(weighted, start)?;
    let membership = angles::is_member(weighted, start);
    if !membership.is_member {
        let detail = membership
            .violations
            .first()
            .map(|v| v.description.clone())
            .unwrap_or_else(|| "unknown violation".to_string());
        return Err(SolveError::NotInterior { detail });
    }

    let mut system = start.clone();
    let mut value = angles::functional_value(weighted, &system)?;
    let mut trace: Vec<IterationRecord> = Vec::new();

    if basis.vectors.is_empty() {
        return Ok(SolveReport {
            system,
            value,
            grad_norm: 0.0,
            iterations: 0,
            trace,
        });
    }

    let mut grad = angles::gradient(weighted, &system, &basis)?;
    let mut grad_norm = infinity_norm(&grad);
    for iteration in 1..=options.max_iter {
        if grad_norm <= options.grad_tol {
            break;
        }
        // Newton direction from the factored negated Hessian; gradient
        // ascent with a bounded step as the fallback.
        let neg_hessian = negated_reduced_hessian(weighted, &system, &basis);
        let newton_direction = neg_hessian
            .cholesky()
            .map(|ch| ch.solve(&nalgebra::DVector::from_column_slice(&grad)));
        let (direction, newton) = match newton_direction {
            Some(d) => (d.as_slice().to_vec(), true),
            None => {
                let cap = 0.25 / grad_norm.max(1.0);
                (grad.iter().map(|g| g * cap).collect(), false)
            }
        };
        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        if slope <= 0.0 {
            // The direction is not an ascent direction; the Hessian must be
            // numerically singular. Fall back to the raw gradient.
            let cap = 0.25 / grad_norm.max(1.0);
            let direction: Vec<f64> = grad.iter().map(|g| g * cap).collect();
            let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
            match line_search(
                weighted, &system, &basis, &direction, slope, value, options,
            )? {
                Some((candidate, new_value, step)) => {
                    system = candidate;
                    value = new_value;
                    trace.push(IterationRecord {
                        iteration,
                        value,
                        grad_norm,
                        step,
                        newton: false,
                    });
                }
                None => break,
            }
        } else {
            match line_search(
                weighted, &system, &basis, &direction, slope, value, options,
            )? {
                Some((candidate, new_value, step)) => {
                    system = candidate;
                    value = new_value;
                    trace.push(IterationRecord {
                        iteration,
                        value,
                        grad_norm,
                        step,
                        newton,
                    });
                }
                None => break,
            }
        }
        grad = angles::gradient(weighted, &system, &basis)?;
        grad_norm = infinity_norm(&grad);
    }

    let iterations = trace.len();
    let report = SolveReport {
        system,
        value,
        grad_norm,
        iterations,
        trace,
    };
    if grad_norm <= options.grad_tol {
        Ok(report)
    } else {
        Err(SolveError::MaxIterExceeded {
            max_iter: options.max_iter,
            grad_norm,
            best: Box::new(report),
        })
    }
}

/// Backtracks along `direction` until the candidate is an interior member
/// with sufficient increase. Returns the accepted candidate, its value and
/// the step scale, or `None` when no acceptable step exists above the
/// minimum scale.
#[allow(clippy::too_many_arguments)]
fn line_search(
    weighted: &WeightedMap,
    system: &AngleSystem,
    basis: &TangentBasis,
    direction: &[f64],
    slope: f64,
    value: f64,
    options: &SolveOptions,
) -> Result<Option<(AngleSystem, f64, f64)>, SolveError> {
    let mut step = 1.0;
    while step >= MIN_STEP {
        let mut candidate = system.clone();
        apply_step(&mut candidate.psi, basis, direction, step);
        if within_margin(&candidate.psi, basis, options.interior_margin)
            && angles::is_member(weighted, &candidate).is_member
        {
            if let Ok(new_value) = angles::functional_value(weighted, &candidate) {
                if new_value >= value + ARMIJO_SLOPE * step * slope {
                    return Ok(Some((candidate, new_value, step)));
                }
            }
        }
        step *= options.line_search_shrink;
    }
    Ok(None)
}

/// Geometric criticality certificate of an angle system.
///
/// At a critical point the two triangles of every edge and the triangles of
/// neighboring edges assign one common leg length to each vertex, the disk
/// radius. The certificate reports, per vertex, the relative spread of all
/// realized leg lengths at that vertex, together with the reduced gradient
/// norm. For flat classes the legs are defined up to one global scale,
/// which is propagated across triangles by the law of sines and normalized
/// on the lowest realizable dart.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityCertificate {
    /// Maximum norm of the reduced gradient.
    pub reduced_grad_norm: f64,
    /// Per-vertex relative spread (max minus min over max) of the realized
    /// legs, for vertices carrying at least one leg.
    pub leg_spread: Vec<(usize, f64)>,
    /// Largest entry of `leg_spread`, also folded with the relative
    /// mismatch of scale transports along non-tree gluings in flat classes.
    pub max_spread: f64,
}

/// Computes the [`CriticalityCertificate`] of a system. The legs are
/// produced by the half-side formulas edge by edge, independently of the
/// layout code.
pub fn certify_critical(
    weighted: &WeightedMap,
    system: &AngleSystem,
) -> Result<CriticalityCertificate, SolveError> {
    let basis = reduction_basis(weighted, system)?;
    let grad = angles::gradient(weighted, system, &basis)?;
    let reduced_grad_norm = infinity_norm(&grad);

    let map = weighted.map();
    let (curvature, free): (i8, Vec<bool>) = match system.mode {
        Mode::Stereographic(face) => {
            let sub = angles::stereographic_subspace(weighted, face)?;
            (0, sub.star_dart)
        }
        Mode::Full => (system.curvature_class, vec![true; map.dart_count()]),
    };

    // Raw legs per dart: from the dart's vertex to the face point, from the
    // opposite vertex to the face point, and between the centers.
    let mut leg_v = vec![f64::NAN; map.dart_count()];
    let mut leg_w = vec![f64::NAN; map.dart_count()];
    let mut center = vec![f64::NAN; map.dart_count()];
    for e in 0..map.edge_count() {
        let [s, t] = map.edge_darts(e);
        if !free[s] {
            continue;
        }
        let gamma = PI - weighted.theta(e);
        let shape = geom::triangle_legs(system.psi[s], system.psi[t], gamma, curvature)
            .map_err(|err| match err {
                GeomError::Angle(inner) => SolveError::Angle(inner),
                other => SolveError::NotInterior {
                    detail: other.to_string(),
                },
            })?;
        leg_v[s] = shape.b;
        leg_w[s] = shape.a;
        center[s] = shape.c;
        leg_v[t] = shape.a;
        leg_w[t] = shape.b;
        center[t] = shape.c;
    }

    // Scale per dart: 1 in curved classes, transported by shared sides in
    // flat classes, normalized so the first dart of each connected component
    // has leg one at its vertex.
    let mut lambda = vec![f64::NAN; map.dart_count()];
    let mut transport_mismatch = 0.0f64;
    if curvature == 0 {
        let mut phi_inv = vec![0usize; map.dart_count()];
        for d in map.darts() {
            phi_inv[map.next_in_face(d)] = d;
        }
        for root in map.darts() {
            if !free[root] || !lambda[root].is_nan() {
                continue;
            }
            lambda[root] = 1.0 / leg_v[root];
            let mut queue = VecDeque::new();
            queue.push_back(root);
            while let Some(d) = queue.pop_front() {
                // Shared sides: the center segment with the opposite dart,
                // the vertex-to-face leg with the face successor (whose own
                // vertex leg spans the same segment seen from the other
                // side), and symmetrically with the face predecessor.
                let transports = [
                    (map.opposite(d), lambda[d] * center[d] / center[map.opposite(d)]),
                    (
                        map.next_in_face(d),
                        lambda[d] * leg_w[d] / leg_v[map.next_in_face(d)],
                    ),
                    (phi_inv[d], lambda[d] * leg_v[d] / leg_w[phi_inv[d]]),
                ];
                for (t, value) in transports {
                    if !free[t] {
                        continue;
                    }
                    if lambda[t].is_nan() {
                        lambda[t] = value;
                        queue.push_back(t);
                    } else {
                        let mismatch = (lambda[t] - value).abs()
                            / lambda[t].abs().max(value.abs()).max(f64::MIN_POSITIVE);
                        transport_mismatch = transport_mismatch.max(mismatch);
                    }
                }
            }
        }
    } else {
        for d in map.darts() {
            if free[d] {
                lambda[d] = 1.0;
            }
        }
    }

    // Collect the realized legs per vertex and measure their spread.
    let mut legs_by_vertex: Vec<Vec<f64>> = vec![Vec::new(); map.vertex_count()];
    for d in map.darts() {
        if !free[d] {
            continue;
        }
        legs_by_vertex[map.vertex_of(d)].push(lambda[d] * leg_v[d]);
        legs_by_vertex[map.vertex_of(map.opposite(d))].push(lambda[d] * leg_w[d]);
    }
    let mut leg_spread = Vec::new();
    let mut max_spread = transport_mismatch;
    for (v, legs) in legs_by_vertex.iter().enumerate() {
        if legs.is_empty() {
            continue;
        }
        let largest = legs.iter().fold(f64::NEG_INFINITY, |m, &l| m.max(l));
        let smallest = legs.iter().fold(f64::INFINITY, |m, &l| m.min(l));
        let spread = (largest - smallest) / largest;
        leg_spread.push((v, spread));
        max_spread = max_spread.max(spread);
    }

    Ok(CriticalityCertificate {
        reduced_grad_norm,
        leg_spread,
        max_spread,
    })
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
    use std::f64::consts::FRAC_PI_4;

    /// Lobachevsky function at pi/4.
    const LOB_QUARTER: f64 = 0.457_982_797_088_609_507;
    /// Lobachevsky function at pi/3.
    const LOB_THIRD: f64 = 0.338_313_868_803_217_875;

    /// Perturbs a member along random combinations of the given tangent
    /// basis, halving the amplitude until the result is again a member.
    fn perturb_member(
        weighted: &WeightedMap,
        base: &AngleSystem,
        basis: &TangentBasis,
        seed: u64,
        scale: f64,
    ) -> AngleSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<f64> = (0..basis.vectors.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut amplitude = scale;
        loop {
            let mut candidate = base.clone();
            for (vector, &coeff) in basis.vectors.iter().zip(&coeffs) {
                for &(d, c) in vector {
                    candidate.psi[d] += amplitude * coeff * c;
                }
            }
            if angles::is_member(weighted, &candidate).is_member {
                return candidate;
            }
            amplitude *= 0.5;
            assert!(amplitude > 1e-12, "no member found along the perturbation");
        }
    }

    fn quarter_torus() -> (WeightedMap, AngleSystem) {
        let weighted = weighted_square_torus();
        let psi = vec![FRAC_PI_4; weighted.map().dart_count()];
        let system = AngleSystem::full(&weighted, psi);
        (weighted, system)
    }

    #[test]
    fn perturbed_torus_returns_to_the_uniform_maximizer() {
        let (weighted, uniform) = quarter_torus();
        let basis = constrained_basis(&weighted, None);
        let start = perturb_member(&weighted, &uniform, &basis, 31, 0.35);
        let report = maximize(&weighted, &start, &SolveOptions::default()).unwrap();
        assert!(report.grad_norm <= 1e-10);
        for &psi in &report.system.psi {
            assert!((psi - FRAC_PI_4).abs() < 1e-10, "psi = {psi}");
        }
        assert!((report.value - 16.0 * LOB_QUARTER).abs() < 1e-10);
    }

    #[test]
    fn cube_stereographic_maximizer_is_the_quarter_system() {
        let weighted = weighted_cube();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let uniform = sub.system(&vec![FRAC_PI_4; sub.s_star.len()]);
        let basis = constrained_basis(&weighted, Some(&sub));
        let start = perturb_member(&weighted, &uniform, &basis, 32, 0.3);
        let report = maximize(&weighted, &start, &SolveOptions::default()).unwrap();
        assert!(report.grad_norm <= 1e-10);
        for &d in &sub.s_star {
            assert!((report.system.psi[d] - FRAC_PI_4).abs() < 1e-9);
        }
        assert!((report.value - 8.0 * LOB_QUARTER).abs() < 1e-10);
    }

    #[test]
    fn genus_two_runs_from_different_starts_agree() {
        let weighted = weighted_genus_two();
        let initial = initial_angle_system(&weighted, Mode::Full).unwrap();
        let basis = angles::full_mode_basis(&weighted);
        let start_a = perturb_member(&weighted, &initial, &basis, 41, 0.05);
        let start_b = perturb_member(&weighted, &initial, &basis, 42, 0.05);
        let report_a = maximize(&weighted, &start_a, &SolveOptions::default()).unwrap();
        let report_b = maximize(&weighted, &start_b, &SolveOptions::default()).unwrap();
        assert!(report_a.grad_norm <= 1e-10);
        assert!(report_b.grad_norm <= 1e-10);
        let worst = report_a
            .system
            .psi
            .iter()
            .zip(&report_b.system.psi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "maximizers differ by {worst}");
        assert!((report_a.value - report_b.value).abs() < 1e-10);
    }

    #[test]
    fn full_mode_on_a_sphere_is_refused() {
        let weighted = weighted_tetrahedron();
        let psi = vec![std::f64::consts::FRAC_PI_3; weighted.map().dart_count()];
        let start = AngleSystem::full(&weighted, psi);
        assert!(matches!(
            maximize(&weighted, &start, &SolveOptions::default()),
            Err(SolveError::SphereFullMode)
        ));
    }

    #[test]
    fn fully_pinned_stereographic_system_solves_in_zero_iterations() {
        let weighted = weighted_tetrahedron();
        let sub = stereographic_subspace(&weighted, 0).unwrap();
        let system = sub.system(&[]);
        let report = maximize(&weighted, &system, &SolveOptions::default()).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(report.grad_norm, 0.0);
        assert!((report.value - 3.0 * LOB_THIRD).abs() < 1e-12);
    }

    #[test]
    fn ascent_is_monotone_and_bit_deterministic() {
        let (weighted, uniform) = quarter_torus();
        let basis = constrained_basis(&weighted, None);
        let start = perturb_member(&weighted, &uniform, &basis, 33, 0.3);
        let first = maximize(&weighted, &start, &SolveOptions::default()).unwrap();
        let second = maximize(&weighted, &start, &SolveOptions::default()).unwrap();
        assert_eq!(first, second);
        let mut last = f64::NEG_INFINITY;
        for record in &first.trace {
            assert!(record.value >= last, "value decreased at {record:?}");
            last = record.value;
        }
        assert!(first.trace.iter().any(|r| r.newton));
    }

    #[test]
    fn interior_and_budget_violations_are_reported() {
        let (weighted, uniform) = quarter_torus();
        let mut broken = uniform.clone();
        broken.psi[0] += 0.2;
        assert!(matches!(
            maximize(&weighted, &broken, &SolveOptions::default()),
            Err(SolveError::NotInterior { .. })
        ));

        let basis = constrained_basis(&weighted, None);
        let start = perturb_member(&weighted, &uniform, &basis, 34, 0.35);
        let tight = SolveOptions {
            max_iter: 1,
            ..SolveOptions::default()
        };
        match maximize(&weighted, &start, &tight) {
            Err(SolveError::MaxIterExceeded { max_iter, best, .. }) => {
                assert_eq!(max_iter, 1);
                assert_eq!(best.iterations, 1);
            }
            other => panic!("expected an exceeded budget, got {other:?}"),
        }
    }

    #[test]
    fn certificate_is_exact_at_the_torus_maximizer() {
        let (weighted, uniform) = quarter_torus();
        let certificate = certify_critical(&weighted, &uniform).unwrap();
        assert_eq!(certificate.reduced_grad_norm, 0.0);
        assert_eq!(certificate.max_spread, 0.0);
        assert_eq!(certificate.leg_spread.len(), weighted.map().vertex_count());
    }

    #[test]
    fn certificate_detects_a_small_perturbation() {
        let (weighted, uniform) = quarter_torus();
        let basis = constrained_basis(&weighted, None);
        let mut nudged = uniform.clone();
        for &(d, c) in &basis.vectors[0] {
            nudged.psi[d] += 1e-3 * c;
        }
        assert!(angles::is_member(&weighted, &nudged).is_member);
        let certificate = certify_critical(&weighted, &nudged).unwrap();
        assert!(
            certificate.max_spread > 1e-5,
            "spread {} too small",
            certificate.max_spread
        );
    }

    #[test]
    fn certificate_spreads_match_hyperbolic_disk_radii() {
        let weighted = weighted_genus_two();
        let initial = initial_angle_system(&weighted, Mode::Full).unwrap();
        let report = maximize(&weighted, &initial, &SolveOptions::default()).unwrap();
        let certificate = certify_critical(&weighted, &report.system).unwrap();
        assert!(certificate.reduced_grad_norm <= 1e-10);
        assert!(
            certificate.max_spread < SPREAD_TOL,
            "spread {}",
            certificate.max_spread
        );
    }
}
