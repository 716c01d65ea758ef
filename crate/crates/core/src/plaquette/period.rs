use std::fmt;
use std::str::FromStr;

use super::PlaquetteError;

/// Planck constant (J s), exact SI value.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge (C), exact SI value.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Å² → m².
pub const ANGSTROM2_TO_M2: f64 = 1e-20;

/// Which flux quantum sets the field scale.
///
/// `HOverE` (4.135667696e-15 Wb) reproduces the quoted graphene period of
/// roughly 78 kT and is the default; `HOver2E` is the superconducting quantum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxQuantum {
    #[default]
    HOverE,
    HOver2E,
}

impl FluxQuantum {
    /// Value in Weber.
    pub fn value(self) -> f64 {
        match self {
            FluxQuantum::HOverE => PLANCK / ELEMENTARY_CHARGE,
            FluxQuantum::HOver2E => PLANCK / (2.0 * ELEMENTARY_CHARGE),
        }
    }

    /// Field (T) threading one flux quantum through `area` Å².
    pub fn field_for_area(self, area: f64) -> f64 {
        self.value() / (area * ANGSTROM2_TO_M2)
    }
}

impl fmt::Display for FluxQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluxQuantum::HOverE => "h_over_e",
            FluxQuantum::HOver2E => "h_over_2e",
        })
    }
}

impl FromStr for FluxQuantum {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "h_over_e" => Ok(FluxQuantum::HOverE),
            "h_over_2e" => Ok(FluxQuantum::HOver2E),
            other => Err(format!("flux quantum must be h_over_e or h_over_2e, got {other:?}")),
        }
    }
}

/// Field period `Φ₀ / A` (Tesla) of a plaquette with area `area` (Å²).
pub fn period_of_area(area: f64, flux_quantum: FluxQuantum) -> Result<f64, PlaquetteError> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(PlaquetteError::Domain(format!(
            "plaquette area must be positive and finite, got {area}"
        )));
    }
    Ok(flux_quantum.field_for_area(area))
}

/// A common near-multiple of several periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Beat {
    /// Indices into the input period list.
    pub members: Vec<usize>,
    /// Integer multiples `k_i` with `k_i * p_i ≈ period`.
    pub multiples: Vec<u32>,
    /// Mean of the `k_i * p_i` (Tesla).
    pub period: f64,
}

/// Largest multiple considered in the near-multiple search.
pub const MAX_MULTIPLE: u32 = 100;

// Absorbs round-off so that exact harmonics are found with tolerance 0.
const TOLERANCE_SLACK: f64 = 1e-12;

/// Smallest common near-multiple of `periods`.
///
/// Finds the least `L` for which every period has an integer `k_i ≤ 100`
/// with `|k_i p_i − L| / L ≤ tolerance`, and reports the chosen `k_i` along
/// with the mean of the `k_i p_i`. Returns `Ok(None)` if nothing qualifies.
pub fn beat_period(periods: &[f64], tolerance: f64) -> Result<Option<Beat>, PlaquetteError> {
    validate(periods, tolerance)?;
    let tol = tolerance + TOLERANCE_SLACK;
    // The least feasible L is the lower end of some window [k p / (1 + tol), k p / (1 - tol)].
    let mut candidates: Vec<f64> = periods
        .iter()
        .flat_map(|&p| (1..=MAX_MULTIPLE).map(move |k| k as f64 * p / (1.0 + tol)))
        .collect();
    candidates.sort_by(f64::total_cmp);
    for l in candidates {
        let ks: Option<Vec<u32>> = periods.iter().map(|&p| best_multiple(p, l, tol)).collect();
        if let Some(multiples) = ks {
            let period =
                periods.iter().zip(&multiples).map(|(&p, &k)| k as f64 * p).sum::<f64>() / periods.len() as f64;
            return Ok(Some(Beat {
                members: (0..periods.len()).collect(),
                multiples,
                period,
            }));
        }
    }
    Ok(None)
}

/// Beat periods of every pair of `periods`; pairs without a common
/// near-multiple are omitted.
pub fn beat_periods(periods: &[f64], tolerance: f64) -> Result<Vec<Beat>, PlaquetteError> {
    validate(periods, tolerance)?;
    let mut out = Vec::new();
    for i in 0..periods.len() {
        for j in i + 1..periods.len() {
            if let Some(mut beat) = beat_period(&[periods[i], periods[j]], tolerance)? {
                beat.members = vec![i, j];
                out.push(beat);
            }
        }
    }
    Ok(out)
}

fn best_multiple(p: f64, l: f64, tol: f64) -> Option<u32> {
    let k = (l / p).round().max(1.0);
    if k > MAX_MULTIPLE as f64 {
        return None;
    }
    // Window edges are candidates themselves, so allow a few ulps past tol.
    ((k * p - l).abs() / l <= tol * (1.0 + 1e-9) + TOLERANCE_SLACK).then_some(k as u32)
}

fn validate(periods: &[f64], tolerance: f64) -> Result<(), PlaquetteError> {
    if periods.is_empty() {
        return Err(PlaquetteError::Domain("period list is empty".into()));
    }
    if let Some(p) = periods.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(PlaquetteError::Domain(format!("periods must be positive, got {p}")));
    }
    if !(0.0..0.2).contains(&tolerance) {
        return Err(PlaquetteError::Domain(format!(
            "tolerance must lie in [0, 0.2), got {tolerance}"
        )));
    }
    Ok(())
}
