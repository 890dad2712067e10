//! Ready-made surface maps for tests, examples and benchmarks.
//!
//! All maps are produced through [`map_from_face_lists`], which assembles the
//! two permutations of a [`SurfaceMap`] from labeled face boundary walks: a
//! face is a cyclic list of signed edge labels, +k traversing edge k forward
//! and −k backward. On a closed oriented surface every edge label appears
//! exactly once with each sign; the builder checks this and derives the
//! vertex rotation from the face walks.
//!
//! The weighted variants attach the uniform weights under which each map is
//! known to carry a circle pattern: π/3 on triangulated spheres with
//! triangular faces, π/2 on quadrangulations, π/3 on the genus-2
//! triangulation. The truncated tetrahedron is the classical counterexample
//! that admits no polyhedral weight at all.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::map::{SurfaceMap, WeightedMap};

/// A signed edge label inside a face boundary walk: `(edge, forward)`.
pub type SignedLabel = (usize, bool);

/// Builds a surface map from face boundary walks over edge labels 0..n.
///
/// Entry `(k, true)` stands for dart 2k, `(k, false)` for dart 2k+1, so the
/// edge-order of the result follows the label order. Faces come out exactly
/// as the given walks (orbits of `next_at_vertex ∘ opposite`).
///
/// # Panics
///
/// Panics if some label does not appear exactly once forward and exactly once
/// backward, or if the resulting map violates a [`SurfaceMap`] invariant
/// (disconnected, self-loop edge). Intended for statically known shapes.
pub fn map_from_face_lists(label_count: usize, faces: &[Vec<SignedLabel>]) -> SurfaceMap {
    let dart_count = 2 * label_count;
    let dart_of = |(label, forward): SignedLabel| -> usize {
        assert!(label < label_count, "label {label} out of range");
        2 * label + usize::from(!forward)
    };
    let mut next_in_face = vec![usize::MAX; dart_count];
    for face in faces {
        for (i, &entry) in face.iter().enumerate() {
            let dart = dart_of(entry);
            assert!(
                next_in_face[dart] == usize::MAX,
                "label {} used twice with the same sign",
                entry.0
            );
            next_in_face[dart] = dart_of(face[(i + 1) % face.len()]);
        }
    }
    if let Some(missing) = next_in_face.iter().position(|&d| d == usize::MAX) {
        panic!("label {} never used with sign {}", missing / 2, missing % 2 == 0);
    }
    let opposite: Vec<usize> = (0..dart_count).map(|d| d ^ 1).collect();
    // φ = σ∘opposite, hence σ = φ∘opposite.
    let next_at_vertex: Vec<usize> = (0..dart_count).map(|d| next_in_face[d ^ 1]).collect();
    SurfaceMap::build(dart_count, opposite, next_at_vertex)
        .expect("face lists describe a valid closed surface map")
}

/// Interns string labels in first-use order, for readable shape definitions.
struct Labels {
    ids: HashMap<String, usize>,
    count: usize,
}

impl Labels {
    fn new() -> Self {
        Self {
            ids: HashMap::new(),
            count: 0,
        }
    }

    fn forward(&mut self, name: impl Into<String>) -> SignedLabel {
        let name = name.into();
        let next = self.count;
        let id = *self.ids.entry(name).or_insert_with(|| next);
        if id == next {
            self.count += 1;
        }
        (id, true)
    }

    fn backward(&mut self, name: impl Into<String>) -> SignedLabel {
        let (id, _) = self.forward(name);
        (id, false)
    }
}

/// The tetrahedron map: 4 vertices, 6 edges, 4 triangles, χ = 2.
pub fn tetrahedron() -> SurfaceMap {
    let mut l = Labels::new();
    let faces = vec![
        vec![l.forward("AB"), l.forward("BC"), l.backward("AC")],
        vec![l.forward("AC"), l.forward("CD"), l.backward("AD")],
        vec![l.forward("AD"), l.backward("BD"), l.backward("AB")],
        vec![l.forward("BD"), l.backward("CD"), l.backward("BC")],
    ];
    map_from_face_lists(l.count, &faces)
}

/// Tetrahedron with the uniform weight θ ≡ π/3 (regular ideal tetrahedron).
pub fn weighted_tetrahedron() -> WeightedMap {
    let map = tetrahedron();
    let edges = map.edge_count();
    WeightedMap::new(map, vec![PI / 3.0; edges]).expect("π/3 lies in (0, π)")
}

/// The cube map: 8 vertices, 12 edges, 6 squares, χ = 2.
pub fn cube() -> SurfaceMap {
    let mut l = Labels::new();
    let faces = vec![
        // bottom 0→3→2→1, seen so that every edge is used once per sign
        vec![
            l.backward("e30"),
            l.backward("e23"),
            l.backward("e12"),
            l.backward("e01"),
        ],
        // top 4→5→6→7
        vec![
            l.forward("e45"),
            l.forward("e56"),
            l.forward("e67"),
            l.forward("e74"),
        ],
        // front 0→1→5→4
        vec![
            l.forward("e01"),
            l.forward("v15"),
            l.backward("e45"),
            l.backward("v04"),
        ],
        // right 1→2→6→5
        vec![
            l.forward("e12"),
            l.forward("v26"),
            l.backward("e56"),
            l.backward("v15"),
        ],
        // back 2→3→7→6
        vec![
            l.forward("e23"),
            l.forward("v37"),
            l.backward("e67"),
            l.backward("v26"),
        ],
        // left 3→0→4→7
        vec![
            l.forward("e30"),
            l.forward("v04"),
            l.backward("e74"),
            l.backward("v37"),
        ],
    ];
    map_from_face_lists(l.count, &faces)
}

/// Cube with the uniform weight θ ≡ π/2 (regular ideal octahedron pattern).
pub fn weighted_cube() -> WeightedMap {
    let map = cube();
    let edges = map.edge_count();
    WeightedMap::new(map, vec![PI / 2.0; edges]).expect("π/2 lies in (0, π)")
}

/// The cube map together with its antipodal dart involution, the free
/// orientation-reversing symmetry used to fold the sphere to the projective
/// plane. Returned as (map, involution on darts).
pub fn antipodal_cube() -> (SurfaceMap, Vec<usize>) {
    let map = cube();
    // Edge labels in cube() order; the antipodal point map swaps vertex i
    // with vertex i+4 mod 8 up to the ring relabeling, pairing edges as
    // below. Ring edges keep their direction, vertical edges reverse.
    // cube() label order: e30,e23,e12,e01,e45,e56,e67,e74,v15,v04,v26,v37.
    let pairs: [(usize, usize, bool); 6] = [
        (0, 5, true),  // e30 ↔ e56
        (1, 4, true),  // e23 ↔ e45
        (2, 7, true),  // e12 ↔ e74
        (3, 6, true),  // e01 ↔ e67
        (8, 11, false), // v15 ↔ v37 reversed
        (9, 10, false), // v04 ↔ v26 reversed
    ];
    let mut involution = vec![usize::MAX; map.dart_count()];
    for &(a, b, same_direction) in &pairs {
        let flip = usize::from(!same_direction);
        for sign in 0..2 {
            involution[2 * a + sign] = 2 * b + (sign ^ flip);
            involution[2 * b + sign] = 2 * a + (sign ^ flip);
        }
    }
    (map, involution)
}

/// The 2×2 square grid on the torus: 4 vertices, 8 edges (a multigraph),
/// 4 squares, χ = 0.
pub fn square_torus() -> SurfaceMap {
    let mut l = Labels::new();
    let h = |r: usize, c: usize| format!("h{r}{c}");
    let v = |r: usize, c: usize| format!("v{r}{c}");
    let mut faces = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            faces.push(vec![
                l.forward(h(r, c)),
                l.forward(v(r, (c + 1) % 2)),
                l.backward(h((r + 1) % 2, c)),
                l.backward(v(r, c)),
            ]);
        }
    }
    map_from_face_lists(l.count, &faces)
}

/// 2×2 torus grid with the uniform weight θ ≡ π/2 (orthogonal circles).
pub fn weighted_square_torus() -> WeightedMap {
    let map = square_torus();
    let edges = map.edge_count();
    WeightedMap::new(map, vec![PI / 2.0; edges]).expect("π/2 lies in (0, π)")
}

/// The truncated tetrahedron map: 12 vertices, 18 edges, 4 triangles and
/// 4 hexagons, χ = 2. No weight function on it is polyhedral.
pub fn truncated_tetrahedron() -> SurfaceMap {
    let mut l = Labels::new();
    // Tetra faces as oriented vertex cycles.
    let cycles = [
        ['A', 'B', 'C'],
        ['A', 'C', 'D'],
        ['A', 'D', 'B'],
        ['B', 'D', 'C'],
    ];
    let bridge = |x: char, y: char| {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        format!("br{a}{b}")
    };
    // Corner edge of the cut triangle at x, between its corners toward y and z.
    let corner = |x: char, y: char, z: char| {
        let (a, b) = if y < z { (y, z) } else { (z, y) };
        format!("tri{x}{a}{b}")
    };
    let mut faces = Vec::new();
    // Hexagons: walk bridge x→y, then around y's corner from x to z, etc.
    for cycle in &cycles {
        let mut walk = Vec::new();
        for i in 0..3 {
            let x = cycle[i];
            let y = cycle[(i + 1) % 3];
            let z = cycle[(i + 2) % 3];
            walk.push(if x < y {
                l.forward(bridge(x, y))
            } else {
                l.backward(bridge(x, y))
            });
            // Corner step at y, from its corner toward x to its corner toward z.
            walk.push(if x < z {
                l.forward(corner(y, x, z))
            } else {
                l.backward(corner(y, x, z))
            });
        }
        faces.push(walk);
    }
    // Cut triangles: at x, step toward-y → toward-z exactly when x→y→z is a
    // face cycle; this reverses every hexagon corner step once.
    for &x in &['A', 'B', 'C', 'D'] {
        let mut steps = Vec::new();
        for cycle in &cycles {
            if let Some(i) = cycle.iter().position(|&c| c == x) {
                let y = cycle[(i + 1) % 3];
                let z = cycle[(i + 2) % 3];
                steps.push((y, z));
            }
        }
        // Order the three steps into a closed walk y→z, z→w, w→y.
        let mut walk = Vec::new();
        let mut current = steps[0].0;
        for _ in 0..3 {
            let &(y, z) = steps
                .iter()
                .find(|&&(y, _)| y == current)
                .expect("corner steps at a vertex form one 3-cycle");
            walk.push(if y < z {
                l.forward(corner(x, y, z))
            } else {
                l.backward(corner(x, y, z))
            });
            current = z;
        }
        faces.push(walk);
    }
    map_from_face_lists(l.count, &faces)
}

/// Truncated tetrahedron with θ ≡ π/2, the standard non-polyhedral input.
pub fn weighted_truncated_tetrahedron() -> WeightedMap {
    let map = truncated_tetrahedron();
    let edges = map.edge_count();
    WeightedMap::new(map, vec![PI / 2.0; edges]).expect("π/2 lies in (0, π)")
}

/// The genus-2 surface as a fanned octagon: the octagon with boundary word
/// aba⁻¹b⁻¹cdc⁻¹d⁻¹, each side split at its midpoint, triangulated by spokes
/// from a center vertex. 6 vertices, 24 edges, 16 triangles, χ = −2. Not
/// simplicial (it has double edges); see [`genus_two_triangulation`] for the
/// flag refinement.
pub fn octagon_fan() -> SurfaceMap {
    let mut l = Labels::new();
    // Halves of the octagon boundary, side i as corner_i → corner_{i+1}.
    let side_halves: [[SignedLabel; 2]; 8] = [
        [l.forward("a1"), l.forward("a2")],
        [l.forward("b1"), l.forward("b2")],
        [l.backward("a2"), l.backward("a1")],
        [l.backward("b2"), l.backward("b1")],
        [l.forward("c1"), l.forward("c2")],
        [l.forward("d1"), l.forward("d2")],
        [l.backward("c2"), l.backward("c1")],
        [l.backward("d2"), l.backward("d1")],
    ];
    let mut faces = Vec::new();
    for (i, halves) in side_halves.iter().enumerate() {
        let spoke_corner = format!("p{i}");
        let spoke_corner_next = format!("p{}", (i + 1) % 8);
        let spoke_mid = format!("q{i}");
        faces.push(vec![
            l.forward(&spoke_corner),
            halves[0],
            l.backward(&spoke_mid),
        ]);
        faces.push(vec![
            l.forward(&spoke_mid),
            halves[1],
            l.backward(&spoke_corner_next),
        ]);
    }
    map_from_face_lists(l.count, &faces)
}

/// Generic barycentric subdivision: every face of the input becomes, per
/// boundary dart, two triangles joining the dart's start vertex, the edge
/// midpoint and the face barycenter. The result of subdividing any valid map
/// once is a simplicial complex; subdividing a map without self-glued faces
/// yields a flag triangulation (every triangle of edges bounds a face).
pub fn barycentric_subdivision(map: &SurfaceMap) -> SurfaceMap {
    let darts = map.dart_count();
    // Labels: for each dart d, h_d joins v(d) to the midpoint of |d|,
    // r_d the midpoint of |d| to the barycenter of face(d), and s_d the
    // barycenter of face(d) back to v(d).
    let h = |d: usize| d;
    let r = |d: usize| darts + d;
    let s = |d: usize| 2 * darts + d;
    let mut faces = Vec::with_capacity(2 * darts);
    for d in map.darts() {
        faces.push(vec![(h(d), true), (r(d), true), (s(d), true)]);
        faces.push(vec![
            (h(map.opposite(d)), false),
            (s(map.next_in_face(d)), false),
            (r(d), false),
        ]);
    }
    map_from_face_lists(3 * darts, &faces)
}

/// A flag triangulation of the genus-2 surface: the barycentric subdivision
/// of [`octagon_fan`]. 46 vertices, 144 edges, 96 triangles, χ = −2. Its
/// uniform weight θ ≡ π/3 is polyhedral: triangles of edges are exactly the
/// face boundaries, and longer loops exceed the 2π threshold strictly.
pub fn genus_two_triangulation() -> SurfaceMap {
    barycentric_subdivision(&octagon_fan())
}

/// Genus-2 triangulation with the uniform weight θ ≡ π/3.
pub fn weighted_genus_two() -> WeightedMap {
    let map = genus_two_triangulation();
    let edges = map.edge_count();
    WeightedMap::new(map, vec![PI / 3.0; edges]).expect("π/3 lies in (0, π)")
}
