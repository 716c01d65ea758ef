//! Generators for the reference lattices used by the CLI and the test suites.

use std::fmt;
use std::str::FromStr;

use super::{assign_hoppings, HoppingRule, Lattice, Site, StructureError};
use crate::geometry::Vec2;

/// A generated lattice together with the rules used to bond it.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinLattice {
    pub spec: BuiltinSpec,
    pub lattice: Lattice,
    pub rules: Vec<HoppingRule>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinSpec {
    /// Square lattice, a = 1 Å, t = −1 eV.
    Square,
    /// Graphene: bond 1.42 Å, t = −2.7 eV.
    Honeycomb,
    /// Kagome: bond 1.42 Å, t = −2.7 eV.
    Kagome,
    /// Honeycomb network whose Kekulé-pattern hexagons ("pores") are
    /// expanded radially by `pore_scale` while the remaining rings shrink.
    PorousHoneycomb { ring_bond: f64, pore_scale: f64 },
}

/// Pore expansion at which pore and ring areas stand in the ratio 3:2.
pub const PORE_SCALE_THREE_HALVES: f64 = 1.133_893_419_027_682; // sqrt(9/7)

impl BuiltinSpec {
    pub fn build(&self) -> Result<BuiltinLattice, StructureError> {
        match *self {
            BuiltinSpec::Square => Ok(square(1.0)),
            BuiltinSpec::Honeycomb => Ok(honeycomb(1.42)),
            BuiltinSpec::Kagome => Ok(kagome(1.42)),
            BuiltinSpec::PorousHoneycomb { ring_bond, pore_scale } => porous_honeycomb(ring_bond, pore_scale),
        }
    }
}

impl fmt::Display for BuiltinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinSpec::Square => write!(f, "square"),
            BuiltinSpec::Honeycomb => write!(f, "honeycomb"),
            BuiltinSpec::Kagome => write!(f, "kagome"),
            BuiltinSpec::PorousHoneycomb { ring_bond, pore_scale } => {
                write!(f, "porous-honeycomb({ring_bond},{pore_scale})")
            }
        }
    }
}

impl FromStr for BuiltinSpec {
    type Err = StructureError;

    /// Accepts `square`, `honeycomb` (alias `graphene`), `kagome`,
    /// `porous-honeycomb` and `porous-honeycomb(<ring bond Å>,<pore scale>)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let unknown = || StructureError::UnknownBuiltin(s.to_string());
        match s {
            "square" => return Ok(BuiltinSpec::Square),
            "honeycomb" | "graphene" => return Ok(BuiltinSpec::Honeycomb),
            "kagome" => return Ok(BuiltinSpec::Kagome),
            "porous-honeycomb" => {
                return Ok(BuiltinSpec::PorousHoneycomb {
                    ring_bond: 1.42,
                    pore_scale: PORE_SCALE_THREE_HALVES,
                })
            }
            _ => {}
        }
        let args = s
            .strip_prefix("porous-honeycomb(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(unknown)?;
        let vals: Vec<f64> = args
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| unknown())?;
        match vals.as_slice() {
            [ring_bond, pore_scale] => Ok(BuiltinSpec::PorousHoneycomb {
                ring_bond: *ring_bond,
                pore_scale: *pore_scale,
            }),
            _ => Err(unknown()),
        }
    }
}

fn carbon(p: Vec2) -> Site {
    Site {
        species: "C".into(),
        position: p,
    }
}

/// Nearest-neighbour window of the carbon default rule scaled to `bond`.
fn scaled_rule(bond: f64, t: f64) -> HoppingRule {
    HoppingRule {
        species_a: "C".into(),
        species_b: "C".into(),
        d_min: bond * (1.2 / 1.42),
        d_max: bond * (1.6 / 1.42),
        t,
    }
}

fn finish(spec: BuiltinSpec, lattice: Lattice, rules: Vec<HoppingRule>) -> BuiltinLattice {
    let lattice = assign_hoppings(&lattice, &rules).expect("generator rules are unambiguous");
    BuiltinLattice { spec, lattice, rules }
}

/// Square lattice with spacing `a` (Å) and t = −1 eV.
pub fn square(a: f64) -> BuiltinLattice {
    let lattice =
        Lattice::new(Vec2::new(a, 0.0), Vec2::new(0.0, a), vec![carbon(Vec2::ZERO)]).expect("valid square cell");
    let rule = HoppingRule {
        species_a: "C".into(),
        species_b: "C".into(),
        d_min: 0.9 * a,
        d_max: 1.1 * a,
        t: -1.0,
    };
    finish(BuiltinSpec::Square, lattice, vec![rule])
}

/// Honeycomb lattice with carbon–carbon bond length `bond` (Å), t = −2.7 eV.
pub fn honeycomb(bond: f64) -> BuiltinLattice {
    let a = bond * 3f64.sqrt();
    let lattice = Lattice::new(
        Vec2::new(a, 0.0),
        Vec2::new(0.5 * a, 0.5 * 3f64.sqrt() * a),
        vec![carbon(Vec2::ZERO), carbon(Vec2::new(0.0, bond))],
    )
    .expect("valid honeycomb cell");
    finish(BuiltinSpec::Honeycomb, lattice, vec![scaled_rule(bond, -2.7)])
}

/// Kagome lattice with nearest-neighbour distance `bond` (Å), t = −2.7 eV.
pub fn kagome(bond: f64) -> BuiltinLattice {
    let a1 = Vec2::new(2.0 * bond, 0.0);
    let a2 = Vec2::new(bond, 3f64.sqrt() * bond);
    let lattice =
        Lattice::new(a1, a2, vec![carbon(Vec2::ZERO), carbon(a1 * 0.5), carbon(a2 * 0.5)]).expect("valid kagome cell");
    finish(BuiltinSpec::Kagome, lattice, vec![scaled_rule(bond, -2.7)])
}

/// Porous honeycomb: a √3x√3 honeycomb supercell (6 sites) in which one of
/// the three hexagons per cell is scaled radially by `pore_scale`.
///
/// Pore hexagons keep edge `pore_scale * ring_bond`; the links between them
/// shrink to `(3 - 2 * pore_scale) * ring_bond`. The two remaining hexagons
/// per cell are the rings. Areas: pore `s² h`, ring `(3 - s²) h / 2` with `h`
/// the undistorted hexagon area, so `pore_scale = sqrt(9/7)` gives pore:ring
/// areas of 3:2.
pub fn porous_honeycomb(ring_bond: f64, pore_scale: f64) -> Result<BuiltinLattice, StructureError> {
    let spec = BuiltinSpec::PorousHoneycomb { ring_bond, pore_scale };
    if !(ring_bond > 0.0 && ring_bond.is_finite()) || !(0.6..=1.3).contains(&pore_scale) {
        return Err(StructureError::Precondition(format!(
            "porous-honeycomb needs ring_bond > 0 and 0.6 <= pore_scale <= 1.3, got ({ring_bond}, {pore_scale})"
        )));
    }
    let edge = pore_scale * ring_bond;
    let link = (3.0 - 2.0 * pore_scale) * ring_bond;
    let big = 3.0 * ring_bond;
    let a1 = Vec2::new(big, 0.0);
    let a2 = Vec2::new(0.5 * big, 0.5 * 3f64.sqrt() * big);
    let sites = (0..6)
        .map(|k| {
            let phi = std::f64::consts::FRAC_PI_3 * k as f64;
            carbon(Vec2::new(edge * phi.cos(), edge * phi.sin()))
        })
        .collect();
    let lattice = Lattice::new(a1, a2, sites)?;
    let window = |d: f64| HoppingRule {
        species_a: "C".into(),
        species_b: "C".into(),
        d_min: 0.95 * d,
        d_max: 1.05 * d,
        t: -2.7,
    };
    let (lo, hi) = if edge < link { (edge, link) } else { (link, edge) };
    let rules = if 0.95 * hi > 1.05 * lo {
        vec![window(edge), window(link)]
    } else {
        vec![HoppingRule {
            d_min: 0.95 * lo,
            d_max: 1.05 * hi,
            ..window(edge)
        }]
    };
    let lattice = assign_hoppings(&lattice, &rules)?;
    let mut degree = [0usize; 6];
    for b in lattice.bonds() {
        degree[b.from] += 1;
        degree[b.to] += 1;
    }
    if degree.iter().any(|&d| d != 3) {
        return Err(StructureError::Precondition(format!(
            "pore_scale {pore_scale} does not yield a three-coordinated network"
        )));
    }
    Ok(BuiltinLattice { spec, lattice, rules })
}
