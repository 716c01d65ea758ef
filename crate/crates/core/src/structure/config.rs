use std::collections::BTreeMap;

use super::{HoppingRule, StructureError};
use crate::plaquette::FluxQuantum;

/// Per-species on-site energies (eV).
///
/// With a `fallback`, species without an explicit entry use it; without one,
/// looking up an unlisted species is a configuration error.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsiteEnergies {
    energies: BTreeMap<String, f64>,
    fallback: Option<f64>,
}

impl Default for OnsiteEnergies {
    fn default() -> Self {
        OnsiteEnergies::uniform(0.0)
    }
}

impl OnsiteEnergies {
    pub fn uniform(energy: f64) -> Self {
        OnsiteEnergies {
            energies: BTreeMap::new(),
            fallback: Some(energy),
        }
    }

    /// Only the listed species are known.
    pub fn strict(energies: BTreeMap<String, f64>) -> Self {
        OnsiteEnergies {
            energies,
            fallback: None,
        }
    }

    pub fn set(&mut self, species: impl Into<String>, energy: f64) {
        self.energies.insert(species.into(), energy);
    }

    pub fn get(&self, species: &str) -> Result<f64, StructureError> {
        self.energies
            .get(species)
            .copied()
            .or(self.fallback)
            .ok_or_else(|| StructureError::UnknownSpecies(species.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.energies.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Contents of a hopping configuration file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HoppingConfig {
    pub rules: Vec<HoppingRule>,
    pub onsite: OnsiteEnergies,
    pub flux_quantum: Option<FluxQuantum>,
}

/// Parses the plain-text hopping configuration.
///
/// ```text
/// # comment
/// hop C C 1.2 1.6 -2.7
/// onsite C 0.0
/// flux_quantum = h_over_e
/// ```
///
/// When at least one `onsite` line is present the on-site table is strict
/// (unlisted species are an error); otherwise every species sits at 0 eV.
pub fn parse_hopping_config(text: &str) -> Result<HoppingConfig, StructureError> {
    let mut rules = Vec::new();
    let mut onsite = BTreeMap::new();
    let mut flux_quantum = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| StructureError::Config { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let normalized = line.replacen('=', " ", 1);
        let tok: Vec<&str> = normalized.split_whitespace().collect();
        let num = |s: &str| -> Result<f64, StructureError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("expected a number, found {s:?}")))
        };
        match tok[0] {
            "hop" => {
                if tok.len() != 6 {
                    return Err(err("expected `hop <A> <B> <dmin> <dmax> <t_eV>`".into()));
                }
                let rule = HoppingRule::new(tok[1], tok[2], num(tok[3])?, num(tok[4])?, num(tok[5])?)
                    .map_err(|e| err(e.to_string()))?;
                rules.push(rule);
            }
            "onsite" => {
                if tok.len() != 3 {
                    return Err(err("expected `onsite <A> <e_eV>`".into()));
                }
                if onsite.insert(tok[1].to_string(), num(tok[2])?).is_some() {
                    return Err(err(format!("duplicate on-site entry for {}", tok[1])));
                }
            }
            "flux_quantum" => {
                if tok.len() != 2 {
                    return Err(err("expected `flux_quantum = h_over_e|h_over_2e`".into()));
                }
                flux_quantum = Some(tok[1].parse::<FluxQuantum>().map_err(err)?);
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    let onsite = if onsite.is_empty() {
        OnsiteEnergies::default()
    } else {
        OnsiteEnergies::strict(onsite)
    };
    Ok(HoppingConfig {
        rules,
        onsite,
        flux_quantum,
    })
}
