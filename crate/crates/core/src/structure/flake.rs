use super::{Lattice, Site, StructureError};

/// Default cap on the number of flake sites.
pub const DEFAULT_MAX_SITES: usize = 1_000_000;

/// An undirected bond between flake sites `n < m` with hopping `t` (eV).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub n: usize,
    pub m: usize,
    pub t: f64,
}

/// A finite open-boundary sample: `nx x ny` copies of a unit cell.
///
/// Site `s` of cell `(ix, iy)` has index `(iy * nx + ix) * cell_sites + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Flake {
    sites: Vec<Site>,
    edges: Vec<Edge>,
    lattice: Lattice,
    nx: usize,
    ny: usize,
}

impl Flake {
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Cell coordinates and unit-cell site index of a flake site.
    pub fn cell_of(&self, site: usize) -> (usize, usize, usize) {
        let per = self.lattice.sites().len();
        let cell = site / per;
        (cell % self.nx, cell / self.nx, site % per)
    }

    /// Adjacency lists (neighbour, hopping), each sorted by neighbour index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.sites.len()];
        for e in &self.edges {
            adj[e.n].push((e.m, e.t));
            adj[e.m].push((e.n, e.t));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        adj
    }
}

/// [`build_flake_with_limit`] with the default size cap of 10⁶ sites.
pub fn build_flake(lattice: &Lattice, nx: usize, ny: usize) -> Result<Flake, StructureError> {
    build_flake_with_limit(lattice, nx, ny, DEFAULT_MAX_SITES)
}

/// Tiles the unit cell `nx x ny` times along (a1, a2) with open boundaries.
/// Bonds that would leave the tiled region are dropped.
pub fn build_flake_with_limit(
    lattice: &Lattice,
    nx: usize,
    ny: usize,
    max_sites: usize,
) -> Result<Flake, StructureError> {
    if nx == 0 || ny == 0 {
        return Err(StructureError::Precondition(format!(
            "flake dimensions must be at least 1x1, got {nx}x{ny}"
        )));
    }
    let per = lattice.sites().len();
    let requested = nx
        .checked_mul(ny)
        .and_then(|c| c.checked_mul(per))
        .unwrap_or(usize::MAX);
    if requested > max_sites {
        return Err(StructureError::TooLarge {
            requested,
            max: max_sites,
        });
    }

    let mut sites = Vec::with_capacity(requested);
    for iy in 0..ny {
        for ix in 0..nx {
            let shift = lattice.cell_vector([ix as i32, iy as i32]);
            for s in lattice.sites() {
                sites.push(Site {
                    species: s.species.clone(),
                    position: s.position + shift,
                });
            }
        }
    }

    let index = |ix: usize, iy: usize, s: usize| (iy * nx + ix) * per + s;
    let mut edges = Vec::with_capacity(nx * ny * lattice.bonds().len());
    for iy in 0..ny as i64 {
        for ix in 0..nx as i64 {
            for b in lattice.bonds() {
                let jx = ix + b.offset[0] as i64;
                let jy = iy + b.offset[1] as i64;
                if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                    continue;
                }
                let a = index(ix as usize, iy as usize, b.from);
                let c = index(jx as usize, jy as usize, b.to);
                let (n, m) = if a < c { (a, c) } else { (c, a) };
                edges.push(Edge { n, m, t: b.t });
            }
        }
    }
    edges.sort_by_key(|e| (e.n, e.m));

    Ok(Flake {
        sites,
        edges,
        lattice: lattice.clone(),
        nx,
        ny,
    })
}
