//! Face tracing on embedded planar graphs.
//!
//! Half-edges around each vertex are sorted counter-clockwise by direction.
//! A face walk arriving at `v` along `u -> v` continues with the half-edge
//! immediately clockwise from `v -> u`; bounded faces then come out
//! counter-clockwise with positive signed area.
//!
//! For a periodic lattice the walk runs on the quotient graph (unit-cell sites
//! plus cell offsets), so every face class up to translation is traced once.
//! Walks whose offsets do not sum to zero wrap around the torus and do not
//! bound a face of the plane.

use std::collections::BTreeSet;

use super::period::{period_of_area, FluxQuantum};
use super::PlaquetteError;
use crate::geometry::{shoelace_area, Vec2};
use crate::structure::{Flake, Lattice};

const ANGLE_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
struct HalfEdge {
    from: usize,
    to: usize,
    offset: [i32; 2],
    vector: Vec2,
}

struct EmbeddedGraph {
    half_edges: Vec<HalfEdge>,
    twin: Vec<usize>,
    /// Half-edges leaving each vertex, counter-clockwise.
    rotation: Vec<Vec<usize>>,
    /// Position of each half-edge in its origin's rotation.
    slot: Vec<usize>,
}

impl EmbeddedGraph {
    /// `edges` lists undirected edges `(a, b, offset of b, vector a -> b)`.
    fn new(
        vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, [i32; 2], Vec2)>,
    ) -> Result<Self, PlaquetteError> {
        let mut half_edges = Vec::new();
        let mut twin = Vec::new();
        for (a, b, off, v) in edges {
            let h = half_edges.len();
            half_edges.push(HalfEdge {
                from: a,
                to: b,
                offset: off,
                vector: v,
            });
            half_edges.push(HalfEdge {
                from: b,
                to: a,
                offset: [-off[0], -off[1]],
                vector: -v,
            });
            twin.push(h + 1);
            twin.push(h);
        }
        let mut rotation = vec![Vec::new(); vertices];
        for (h, e) in half_edges.iter().enumerate() {
            rotation[e.from].push(h);
        }
        for (v, list) in rotation.iter_mut().enumerate() {
            let key = |h: usize| {
                let vec = half_edges[h].vector;
                (vec.angle(), vec.norm())
            };
            list.sort_by(|&x, &y| {
                let (ax, lx) = key(x);
                let (ay, ly) = key(y);
                ax.total_cmp(&ay).then(lx.total_cmp(&ly))
            });
            for w in list.windows(2) {
                let (a0, l0) = key(w[0]);
                let (a1, l1) = key(w[1]);
                if (a1 - a0).abs() <= ANGLE_TIE && (l1 - l0).abs() <= ANGLE_TIE * l0.max(1.0) {
                    return Err(PlaquetteError::Embedding(format!(
                        "two bonds leave vertex {v} with identical direction and length"
                    )));
                }
            }
        }
        let mut slot = vec![0; half_edges.len()];
        for list in &rotation {
            for (i, &h) in list.iter().enumerate() {
                slot[h] = i;
            }
        }
        Ok(EmbeddedGraph {
            half_edges,
            twin,
            rotation,
            slot,
        })
    }

    fn next(&self, h: usize) -> usize {
        let back = self.twin[h];
        let v = self.half_edges[back].from;
        let list = &self.rotation[v];
        let i = self.slot[back];
        list[(i + list.len() - 1) % list.len()]
    }

    /// Every face walk; each half-edge appears in exactly one walk.
    fn walks(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.half_edges.len()];
        let mut out = Vec::new();
        for start in 0..self.half_edges.len() {
            if seen[start] {
                continue;
            }
            let mut walk = Vec::new();
            let mut h = start;
            loop {
                seen[h] = true;
                walk.push(h);
                h = self.next(h);
                if h == start {
                    break;
                }
            }
            out.push(walk);
        }
        out
    }
}

/// One vertex of a face: unit-cell site `site` in cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceVertex {
    pub site: usize,
    pub cell: [i32; 2],
}

/// A directed half-edge visited by a face walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedBond {
    pub from: usize,
    pub to: usize,
    pub offset: [i32; 2],
}

/// Raw output of face tracing on the periodic lattice graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceWalk {
    pub steps: Vec<DirectedBond>,
    /// Sum of the step offsets; non-zero for walks that do not close in the plane.
    pub winding: [i32; 2],
    /// Signed area (Å²) of the unwrapped walk, counter-clockwise positive.
    pub signed_area: f64,
}

/// A minimal face of the lattice graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Plaquette {
    /// Vertices counter-clockwise, canonicalised up to translation and rotation.
    pub vertex_cycle: Vec<FaceVertex>,
    /// Area in Å².
    pub area: f64,
    /// Field period Φ₀ / area in Tesla.
    pub period: f64,
}

impl Plaquette {
    /// Cartesian polygon of the face.
    pub fn polygon(&self, lattice: &Lattice) -> Vec<Vec2> {
        self.vertex_cycle
            .iter()
            .map(|v| lattice.image_position(v.site, v.cell))
            .collect()
    }
}

fn lattice_graph(lattice: &Lattice) -> Result<EmbeddedGraph, PlaquetteError> {
    EmbeddedGraph::new(
        lattice.sites().len(),
        lattice.bonds().iter().map(|b| {
            let v = lattice.image_position(b.to, b.offset) - lattice.image_position(b.from, [0, 0]);
            (b.from, b.to, b.offset, v)
        }),
    )
}

/// Traces every face walk of the periodic lattice graph, including walks that
/// do not bound a face.
pub fn face_walks(lattice: &Lattice) -> Result<Vec<FaceWalk>, PlaquetteError> {
    let graph = lattice_graph(lattice)?;
    Ok(graph
        .walks()
        .into_iter()
        .map(|walk| {
            let mut winding = [0, 0];
            let mut pos = Vec2::ZERO;
            let mut poly = Vec::with_capacity(walk.len());
            let steps = walk
                .iter()
                .map(|&h| {
                    let e = graph.half_edges[h];
                    poly.push(pos);
                    pos += e.vector;
                    winding[0] += e.offset[0];
                    winding[1] += e.offset[1];
                    DirectedBond {
                        from: e.from,
                        to: e.to,
                        offset: e.offset,
                    }
                })
                .collect();
            FaceWalk {
                steps,
                winding,
                signed_area: shoelace_area(&poly),
            }
        })
        .collect())
}

/// Drops back-and-forth excursions (`a -> b -> a`) left by dangling bonds.
fn strip_spikes(mut cycle: Vec<FaceVertex>) -> Vec<FaceVertex> {
    loop {
        let n = cycle.len();
        if n < 3 {
            return cycle;
        }
        let spike = (0..n).find(|&i| cycle[i] == cycle[(i + 2) % n]);
        match spike {
            None => return cycle,
            Some(i) => {
                let drop = [(i + 1) % n, (i + 2) % n];
                let mut k = 0;
                cycle.retain(|_| {
                    let keep = !drop.contains(&k);
                    k += 1;
                    keep
                });
            }
        }
    }
}

fn canonicalize(lattice: &Lattice, cycle: Vec<FaceVertex>) -> Vec<FaceVertex> {
    let frac = |v: &FaceVertex| lattice.fractional(lattice.image_position(v.site, v.cell));
    let start = (0..cycle.len())
        .min_by(|&i, &j| {
            let (fi, fj) = (frac(&cycle[i]), frac(&cycle[j]));
            fi[0]
                .total_cmp(&fj[0])
                .then(fi[1].total_cmp(&fj[1]))
                .then(cycle[i].cmp(&cycle[j]))
        })
        .unwrap_or(0);
    let shift = cycle[start].cell;
    let n = cycle.len();
    (0..n)
        .map(|k| {
            let v = cycle[(start + k) % n];
            FaceVertex {
                site: v.site,
                cell: [v.cell[0] - shift[0], v.cell[1] - shift[1]],
            }
        })
        .collect()
}

/// Enumerates the distinct faces (up to lattice translation) of a planar
/// periodic lattice graph, largest area first.
///
/// Walks that wrap around the torus or enclose no positive area (the outer
/// boundary of disconnected fragments) are discarded.
pub fn enumerate_faces(lattice: &Lattice, flux_quantum: FluxQuantum) -> Result<Vec<Plaquette>, PlaquetteError> {
    check_planar(lattice)?;
    let mut seen = BTreeSet::new();
    let mut faces = Vec::new();
    for walk in face_walks(lattice)? {
        if walk.winding != [0, 0] || walk.signed_area <= 1e-9 {
            continue;
        }
        let mut cell = [0, 0];
        let mut cycle = Vec::with_capacity(walk.steps.len());
        for s in &walk.steps {
            cycle.push(FaceVertex { site: s.from, cell });
            cell = [cell[0] + s.offset[0], cell[1] + s.offset[1]];
        }
        let cycle = canonicalize(lattice, strip_spikes(cycle));
        if cycle.len() < 3 || !seen.insert(cycle.clone()) {
            continue;
        }
        let area = walk.signed_area;
        faces.push(Plaquette {
            vertex_cycle: cycle,
            area,
            period: period_of_area(area, flux_quantum)?,
        });
    }
    faces.sort_by(|a, b| {
        b.area
            .total_cmp(&a.area)
            .then_with(|| a.vertex_cycle.cmp(&b.vertex_cycle))
    });
    Ok(faces)
}

/// Groups faces whose areas agree to `rel_tol`; returns (area, count) per
/// class, largest first.
pub fn area_classes(faces: &[Plaquette], rel_tol: f64) -> Vec<(f64, usize)> {
    let mut classes: Vec<(f64, usize)> = Vec::new();
    for f in faces {
        match classes
            .iter_mut()
            .find(|(a, _)| (f.area - *a).abs() <= rel_tol * a.abs())
        {
            Some(c) => c.1 += 1,
            None => classes.push((f.area, 1)),
        }
    }
    classes.sort_by(|a, b| b.0.total_cmp(&a.0));
    classes
}

/// An interior face of a finite flake.
#[derive(Debug, Clone, PartialEq)]
pub struct FlakeFace {
    /// Flake site indices, counter-clockwise.
    pub sites: Vec<usize>,
    pub area: f64,
}

/// Interior faces of a flake (the unbounded outer walk of each connected
/// component is discarded).
pub fn flake_faces(flake: &Flake) -> Result<Vec<FlakeFace>, PlaquetteError> {
    let pos: Vec<Vec2> = flake.sites().iter().map(|s| s.position).collect();
    let graph = EmbeddedGraph::new(
        pos.len(),
        flake.edges().iter().map(|e| (e.n, e.m, [0, 0], pos[e.m] - pos[e.n])),
    )?;
    let mut out = Vec::new();
    for walk in graph.walks() {
        let sites: Vec<usize> = walk.iter().map(|&h| graph.half_edges[h].from).collect();
        let poly: Vec<Vec2> = sites.iter().map(|&s| pos[s]).collect();
        let area = shoelace_area(&poly);
        if area > 1e-9 {
            let cycle = strip_spikes(sites.iter().map(|&s| FaceVertex { site: s, cell: [0, 0] }).collect());
            out.push(FlakeFace {
                sites: cycle.into_iter().map(|v| v.site).collect(),
                area,
            });
        }
    }
    Ok(out)
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Vec2, a: Vec2, b: Vec2, eps: f64) -> bool {
    orient(a, b, p).abs() <= eps
        && p.x >= a.x.min(b.x) - eps
        && p.x <= a.x.max(b.x) + eps
        && p.y >= a.y.min(b.y) - eps
        && p.y <= a.y.max(b.y) + eps
}

/// Whether two segments meet anywhere other than at `shared` endpoints.
fn segments_conflict(p1: Vec2, q1: Vec2, p2: Vec2, q2: Vec2, shared: usize) -> bool {
    let scale = (q1 - p1).norm().max((q2 - p2).norm()).max(1.0);
    let eps = 1e-9 * scale * scale;
    match shared {
        0 => {
            let d1 = orient(p2, q2, p1);
            let d2 = orient(p2, q2, q1);
            let d3 = orient(p1, q1, p2);
            let d4 = orient(p1, q1, q2);
            if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
                && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
            {
                return true;
            }
            on_segment(p1, p2, q2, eps)
                || on_segment(q1, p2, q2, eps)
                || on_segment(p2, p1, q1, eps)
                || on_segment(q2, p1, q1, eps)
        }
        // Segments p1-q1 and p2-q2 with p1 == p2: they only conflict when
        // they overlap along a common direction.
        1 => {
            let u = q1 - p1;
            let v = q2 - p2;
            u.cross(v).abs() <= eps && u.dot(v) > 0.0
        }
        _ => true,
    }
}

/// Rejects embeddings in which two bonds cross or overlap.
pub fn check_planar(lattice: &Lattice) -> Result<(), PlaquetteError> {
    let bonds = lattice.bonds();
    if bonds.is_empty() {
        return Ok(());
    }
    let longest = bonds
        .iter()
        .map(|b| (lattice.image_position(b.to, b.offset) - lattice.image_position(b.from, [0, 0])).norm())
        .fold(0.0, f64::max);
    let range = lattice.image_range(2.0 * longest);
    let endpoints = |b: &crate::structure::Bond, shift: [i32; 2]| {
        let a = FaceVertex {
            site: b.from,
            cell: shift,
        };
        let c = FaceVertex {
            site: b.to,
            cell: [shift[0] + b.offset[0], shift[1] + b.offset[1]],
        };
        (a, c)
    };
    for (i, b1) in bonds.iter().enumerate() {
        let (a1, c1) = endpoints(b1, [0, 0]);
        let (p1, q1) = (
            lattice.image_position(a1.site, a1.cell),
            lattice.image_position(c1.site, c1.cell),
        );
        for o1 in -range[0]..=range[0] {
            for o2 in -range[1]..=range[1] {
                for (j, b2) in bonds.iter().enumerate() {
                    if j == i && o1 == 0 && o2 == 0 {
                        continue;
                    }
                    let (a2, c2) = endpoints(b2, [o1, o2]);
                    let (mut p2, mut q2) = (
                        lattice.image_position(a2.site, a2.cell),
                        lattice.image_position(c2.site, c2.cell),
                    );
                    let (mut pp1, mut qq1) = (p1, q1);
                    let shared = [a2, c2].iter().filter(|v| **v == a1 || **v == c1).count();
                    if shared == 1 {
                        // Put the common endpoint first in both segments.
                        if a1 == c2 || c1 == c2 {
                            std::mem::swap(&mut p2, &mut q2);
                        }
                        if c1 == a2 || c1 == c2 {
                            std::mem::swap(&mut pp1, &mut qq1);
                        }
                    }
                    if segments_conflict(pp1, qq1, p2, q2, shared) {
                        return Err(PlaquetteError::Embedding(format!(
                            "bond {i} intersects bond {j} in cell ({o1}, {o2})"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{build_flake, honeycomb, kagome, porous_honeycomb, square, Lattice, Site};
    use std::collections::HashSet;

    #[test]
    fn square_single_face() {
        let faces = enumerate_faces(&square(1.0).lattice, FluxQuantum::HOverE).unwrap();
        assert_eq!(faces.len(), 1);
        assert!((faces[0].area - 1.0).abs() < 1e-12);
        assert_eq!(faces[0].vertex_cycle.len(), 4);
    }

    #[test]
    fn graphene_hexagon() {
        let faces = enumerate_faces(&honeycomb(1.42).lattice, FluxQuantum::HOverE).unwrap();
        assert_eq!(faces.len(), 1);
        let expected = 1.5 * 3f64.sqrt() * 1.42 * 1.42;
        assert!((faces[0].area - expected).abs() < 1e-9);
        assert_eq!(faces[0].vertex_cycle.len(), 6);
        let distinct: HashSet<_> = faces[0].vertex_cycle.iter().collect();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn kagome_triangle_and_hexagon() {
        let lat = kagome(1.42).lattice;
        let faces = enumerate_faces(&lat, FluxQuantum::HOverE).unwrap();
        let classes = area_classes(&faces, 1e-9);
        assert_eq!(classes.len(), 2);
        // Hexagon of side b: 3√3/2 b²; triangle: √3/4 b². Ratio 6.
        assert!((classes[0].0 / classes[1].0 - 6.0).abs() < 1e-9);
        assert_eq!(classes[0].1, 1);
        assert_eq!(classes[1].1, 2);
        let total: f64 = faces.iter().map(|f| f.area).sum();
        assert!((total - lat.cell_area()).abs() < 1e-9);
    }

    #[test]
    fn porous_pore_to_ring_ratio() {
        let lat = porous_honeycomb(1.42, crate::structure::PORE_SCALE_THREE_HALVES)
            .unwrap()
            .lattice;
        let faces = enumerate_faces(&lat, FluxQuantum::HOverE).unwrap();
        let classes = area_classes(&faces, 1e-9);
        assert_eq!(classes.len(), 2);
        assert!((classes[0].0 / classes[1].0 - 1.5).abs() < 1e-9);
        assert!((faces[1].period / faces[0].period - 1.5).abs() < 1e-9);
    }

    #[test]
    fn walks_cover_every_half_edge_once() {
        for lat in [square(1.0).lattice, honeycomb(1.42).lattice, kagome(1.42).lattice] {
            let walks = face_walks(&lat).unwrap();
            let mut seen = HashSet::new();
            for w in &walks {
                for s in &w.steps {
                    assert!(seen.insert(*s), "half-edge visited twice");
                }
            }
            assert_eq!(seen.len(), 2 * lat.bonds().len());
        }
    }

    #[test]
    fn crossing_bonds_rejected() {
        // Square lattice with both diagonals: the diagonals cross.
        let lat = Lattice::new(
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            vec![Site::new("C", Vec2::ZERO).unwrap()],
        )
        .unwrap();
        let rule = crate::structure::HoppingRule::new("C", "C", 0.9, 1.5, -1.0).unwrap();
        let lat = lat.with_hoppings(&[rule]).unwrap();
        assert!(matches!(
            enumerate_faces(&lat, FluxQuantum::HOverE),
            Err(PlaquetteError::Embedding(_))
        ));
    }

    #[test]
    fn one_diagonal_triangulates() {
        // Sheared cell: a1, a2 and a2 - a1 are bonds, a1 + a2 is not.
        let lat = Lattice::new(
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 1.0),
            vec![Site::new("C", Vec2::ZERO).unwrap()],
        )
        .unwrap();
        let rule = crate::structure::HoppingRule::new("C", "C", 0.9, 1.2, -1.0).unwrap();
        let lat = lat.with_hoppings(&[rule]).unwrap();
        let faces = enumerate_faces(&lat, FluxQuantum::HOverE).unwrap();
        assert_eq!(faces.len(), 2);
        assert!(faces.iter().all(|f| (f.area - 0.5).abs() < 1e-12));
    }

    #[test]
    fn chains_have_no_faces() {
        let lat = Lattice::new(
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 3.0),
            vec![Site::new("C", Vec2::ZERO).unwrap()],
        )
        .unwrap();
        let rule = crate::structure::HoppingRule::new("C", "C", 0.9, 1.1, -1.0).unwrap();
        let lat = lat.with_hoppings(&[rule]).unwrap();
        assert!(enumerate_faces(&lat, FluxQuantum::HOverE).unwrap().is_empty());
    }

    #[test]
    fn dangling_bond_is_stripped() {
        // Square lattice plus a pendant atom bonded to each corner site.
        let lat = Lattice::new(
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 2.0),
            vec![
                Site::new("C", Vec2::ZERO).unwrap(),
                Site::new("H", Vec2::new(0.7, 0.7)).unwrap(),
            ],
        )
        .unwrap();
        let rules = [
            crate::structure::HoppingRule::new("C", "C", 1.9, 2.1, -1.0).unwrap(),
            crate::structure::HoppingRule::new("C", "H", 0.9, 1.1, -1.0).unwrap(),
        ];
        let lat = lat.with_hoppings(&rules).unwrap();
        let faces = enumerate_faces(&lat, FluxQuantum::HOverE).unwrap();
        assert_eq!(faces.len(), 1);
        assert!((faces[0].area - 4.0).abs() < 1e-12);
        assert_eq!(faces[0].vertex_cycle.len(), 4);
    }

    #[test]
    fn flake_faces_of_square_grid() {
        let f = build_flake(&square(1.0).lattice, 4, 3).unwrap();
        let faces = flake_faces(&f).unwrap();
        assert_eq!(faces.len(), 3 * 2);
        assert!(faces.iter().all(|p| (p.area - 1.0).abs() < 1e-12 && p.sites.len() == 4));
    }
}
