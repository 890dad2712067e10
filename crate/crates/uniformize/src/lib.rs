//! Weighted circle patterns on compact surfaces.
//!
//! Given a combinatorial map of a closed oriented surface together with an edge
//! weight θ: E → (0, π), this crate computes the essentially unique circle
//! pattern whose disks intersect at the prescribed angles. The pattern is found
//! variationally: a concave functional built from the Lobachevsky function is
//! maximized over the convex polytope of coherent angle systems, and the unique
//! critical point encodes all disk radii and mutual positions. The same
//! critical value is the hyperbolic volume of an associated ideal polyhedron,
//! which is recomputed independently through an orthoscheme decomposition as a
//! cross-check.
//!
//! The pipeline is: [`map`] (surface maps and weight validation), [`flow`]
//! (feasibility by circulations with lower bounds, producing an initial angle
//! system or an infeasibility certificate), [`solver`] (damped Newton ascent in
//! reduced coordinates), [`geom`] (triangle reconstruction, chart layout,
//! residual checks, volumes, SVG output). [`lobach`] holds the special
//! functions, [`angles`] the angle-system machinery, [`shapes`] ready-made
//! example maps, and [`io`] the JSON file formats.

pub mod angles;
pub mod flow;
pub mod geom;
pub mod io;
pub mod lobach;
pub mod map;
pub mod shapes;
pub mod solver;
