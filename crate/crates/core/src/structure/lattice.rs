use super::neighbors::CellList;
use super::StructureError;
use crate::geometry::Vec2;

/// Absolute tolerance (Å) applied at hopping rule boundaries.
pub const DISTANCE_TOLERANCE: f64 = 1e-6;

/// Minimum separation of two sites inside one unit cell.
const MIN_SITE_SEPARATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub species: String,
    pub position: Vec2,
}

impl Site {
    pub fn new(species: impl Into<String>, position: Vec2) -> Result<Self, StructureError> {
        let species = species.into();
        if species.is_empty() {
            return Err(StructureError::InvalidLattice("empty species".into()));
        }
        if !position.is_finite() {
            return Err(StructureError::InvalidLattice(format!(
                "non-finite position for {species}"
            )));
        }
        Ok(Site { species, position })
    }
}

/// Piecewise-constant hopping: any `species_a`–`species_b` pair whose
/// distance lies in the closed interval `[d_min, d_max]` gets amplitude `t` (eV).
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingRule {
    pub species_a: String,
    pub species_b: String,
    pub d_min: f64,
    pub d_max: f64,
    pub t: f64,
}

impl HoppingRule {
    pub fn new(
        species_a: impl Into<String>,
        species_b: impl Into<String>,
        d_min: f64,
        d_max: f64,
        t: f64,
    ) -> Result<Self, StructureError> {
        let rule = HoppingRule {
            species_a: species_a.into(),
            species_b: species_b.into(),
            d_min,
            d_max,
            t,
        };
        rule.validate()?;
        Ok(rule)
    }

    /// The (C, C, 1.2 Å, 1.6 Å, −2.7 eV) nearest-neighbour rule for sp² carbon.
    pub fn carbon_default() -> Self {
        HoppingRule {
            species_a: "C".into(),
            species_b: "C".into(),
            d_min: 1.2,
            d_max: 1.6,
            t: -2.7,
        }
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        if self.species_a.is_empty() || self.species_b.is_empty() {
            return Err(StructureError::InvalidRule("empty species".into()));
        }
        if !(self.d_min > 0.0 && self.d_min < self.d_max && self.d_max.is_finite()) {
            return Err(StructureError::InvalidRule(format!(
                "need 0 < d_min < d_max, got [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        if !self.t.is_finite() || self.t == 0.0 {
            return Err(StructureError::InvalidRule(format!(
                "hopping must be finite and non-zero, got {}",
                self.t
            )));
        }
        Ok(())
    }

    pub fn matches_species(&self, a: &str, b: &str) -> bool {
        (self.species_a == a && self.species_b == b) || (self.species_a == b && self.species_b == a)
    }

    pub fn matches(&self, a: &str, b: &str, distance: f64) -> bool {
        self.matches_species(a, b)
            && distance >= self.d_min - DISTANCE_TOLERANCE
            && distance <= self.d_max + DISTANCE_TOLERANCE
    }
}

/// A bond from site `from` in cell (0, 0) to site `to` in cell `offset`.
///
/// Each undirected bond is stored once: either `from < to`, or `from == to`
/// with `offset` lexicographically positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub offset: [i32; 2],
    pub t: f64,
}

impl Bond {
    fn canonical(from: usize, to: usize, offset: [i32; 2]) -> bool {
        from < to || (from == to && (offset[0] > 0 || (offset[0] == 0 && offset[1] > 0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    a1: Vec2,
    a2: Vec2,
    sites: Vec<Site>,
    rules: Vec<HoppingRule>,
    bonds: Vec<Bond>,
}

impl Lattice {
    pub fn new(a1: Vec2, a2: Vec2, sites: Vec<Site>) -> Result<Self, StructureError> {
        if !a1.is_finite() || !a2.is_finite() {
            return Err(StructureError::InvalidLattice("non-finite lattice vector".into()));
        }
        let area = a1.cross(a2).abs();
        if area <= 1e-12 {
            return Err(StructureError::InvalidLattice(
                "lattice vectors are degenerate (|a1 x a2| = 0)".into(),
            ));
        }
        for (i, a) in sites.iter().enumerate() {
            if a.species.is_empty() || !a.position.is_finite() {
                return Err(StructureError::InvalidLattice(format!("site {i} is invalid")));
            }
            for (j, b) in sites.iter().enumerate().skip(i + 1) {
                let d = (a.position - b.position).norm();
                if d < MIN_SITE_SEPARATION {
                    return Err(StructureError::InvalidLattice(format!(
                        "sites {i} and {j} are only {d:.3} Å apart"
                    )));
                }
            }
        }
        Ok(Lattice {
            a1,
            a2,
            sites,
            rules: Vec::new(),
            bonds: Vec::new(),
        })
    }

    pub fn a1(&self) -> Vec2 {
        self.a1
    }

    pub fn a2(&self) -> Vec2 {
        self.a2
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn hopping_rules(&self) -> &[HoppingRule] {
        &self.rules
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn cell_area(&self) -> f64 {
        self.a1.cross(self.a2).abs()
    }

    /// Cartesian position of `site` translated into cell `offset`.
    pub fn image_position(&self, site: usize, offset: [i32; 2]) -> Vec2 {
        self.sites[site].position + self.cell_vector(offset)
    }

    pub fn cell_vector(&self, offset: [i32; 2]) -> Vec2 {
        self.a1 * offset[0] as f64 + self.a2 * offset[1] as f64
    }

    /// Fractional coordinates of a Cartesian point with respect to (a1, a2).
    pub fn fractional(&self, p: Vec2) -> [f64; 2] {
        let det = self.a1.cross(self.a2);
        [p.cross(self.a2) / det, self.a1.cross(p) / det]
    }

    /// Sorted list of distinct species.
    pub fn species(&self) -> Vec<String> {
        let mut s: Vec<String> = self.sites.iter().map(|s| s.species.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Copy with every site shifted by `shift`; bonds are kept.
    pub fn translated(&self, shift: Vec2) -> Lattice {
        let mut out = self.clone();
        for s in &mut out.sites {
            s.position += shift;
        }
        out
    }

    /// Copy rigidly rotated by `theta` (radians) about the origin; bonds are kept.
    pub fn rotated(&self, theta: f64) -> Lattice {
        let mut out = self.clone();
        out.a1 = self.a1.rotated(theta);
        out.a2 = self.a2.rotated(theta);
        for s in &mut out.sites {
            s.position = s.position.rotated(theta);
        }
        out
    }

    /// Shorthand for [`assign_hoppings`].
    pub fn with_hoppings(&self, rules: &[HoppingRule]) -> Result<Lattice, StructureError> {
        assign_hoppings(self, rules)
    }

    /// Range of cell offsets `[-r1, r1] x [-r2, r2]` guaranteed to contain every
    /// image within `cutoff` of any site of the home cell.
    pub(crate) fn image_range(&self, cutoff: f64) -> [i32; 2] {
        let area = self.cell_area();
        let h1 = area / self.a2.norm();
        let h2 = area / self.a1.norm();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in &self.sites {
            let f = self.fractional(s.position);
            for k in 0..2 {
                lo[k] = lo[k].min(f[k]);
                hi[k] = hi[k].max(f[k]);
            }
        }
        let span = |k: usize| if self.sites.is_empty() { 0.0 } else { hi[k] - lo[k] };
        [
            (cutoff / h1 + span(0)).ceil() as i32 + 1,
            (cutoff / h2 + span(1)).ceil() as i32 + 1,
        ]
    }
}

fn sort_bonds(bonds: &mut [Bond]) {
    bonds.sort_by(|a, b| (a.from, a.to, a.offset[0], a.offset[1]).cmp(&(b.from, b.to, b.offset[0], b.offset[1])));
}

/// Assigns a hopping to every site pair (including periodic images) whose
/// separation falls inside exactly one rule's closed distance window.
///
/// The result records the bond list of the unit cell with cell offsets. The
/// outcome does not depend on the order of `rules`.
pub fn assign_hoppings(lattice: &Lattice, rules: &[HoppingRule]) -> Result<Lattice, StructureError> {
    for r in rules {
        r.validate()?;
    }
    let mut out = lattice.clone();
    out.rules = rules.to_vec();
    out.bonds.clear();
    if rules.is_empty() || lattice.sites.is_empty() {
        return Ok(out);
    }
    let cutoff = rules.iter().map(|r| r.d_max).fold(0.0, f64::max) + DISTANCE_TOLERANCE;
    let range = lattice.image_range(cutoff);

    // Periodic images of every site, binned on a grid of pitch `cutoff`.
    let mut images = Vec::new();
    let mut tags = Vec::new();
    for o1 in -range[0]..=range[0] {
        for o2 in -range[1]..=range[1] {
            for j in 0..lattice.sites.len() {
                images.push(lattice.image_position(j, [o1, o2]));
                tags.push((j, [o1, o2]));
            }
        }
    }
    let grid = CellList::new(&images, cutoff);

    let mut bonds = Vec::new();
    for (i, site) in lattice.sites.iter().enumerate() {
        for idx in grid.within(site.position, cutoff) {
            let (j, offset) = tags[idx];
            if j == i && offset == [0, 0] {
                continue;
            }
            if !Bond::canonical(i, j, offset) {
                continue;
            }
            let d = (images[idx] - site.position).norm();
            let other = &lattice.sites[j].species;
            let mut hit: Option<usize> = None;
            for (k, rule) in rules.iter().enumerate() {
                if rule.matches(&site.species, other, d) {
                    if let Some(prev) = hit {
                        let (rule_a, rule_b) = (prev.min(k), prev.max(k));
                        return Err(StructureError::AmbiguousHopping {
                            site_a: i,
                            site_b: j,
                            distance: d,
                            rule_a,
                            rule_b,
                        });
                    }
                    hit = Some(k);
                }
            }
            if let Some(k) = hit {
                bonds.push(Bond {
                    from: i,
                    to: j,
                    offset,
                    t: rules[k].t,
                });
            }
        }
    }
    sort_bonds(&mut bonds);
    out.bonds = bonds;
    Ok(out)
}
