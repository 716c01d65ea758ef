use super::{Spectrum, SweepError};

pub const MIN_PERIOD_POINTS: usize = 16;
pub const STRENGTH_THRESHOLD: f64 = 0.5;

/// A recurrence period of the spectrum along B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodCandidate {
    /// Tesla.
    pub period: f64,
    /// Normalised autocorrelation at that lag, in [−1, 1].
    pub strength: f64,
}

/// Centred, normalised autocorrelation of the rows of `spectrum` at every
/// lag up to half the sweep; index = lag in B steps.
pub fn autocorrelation(spectrum: &Spectrum) -> Vec<f64> {
    let nb = spectrum.b_points();
    let ne = spectrum.energy_points();
    let mut mean = vec![0.0; ne];
    for i in 0..nb {
        for (m, v) in mean.iter_mut().zip(spectrum.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nb as f64;
    }
    let x: Vec<Vec<f64>> = (0..nb)
        .map(|i| spectrum.row(i).iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let norms: Vec<f64> = x.iter().map(|r| dot(r, r)).collect();
    (0..=nb / 2)
        .map(|lag| {
            let mut num = 0.0;
            let mut na = 0.0;
            let mut nb2 = 0.0;
            for i in 0..nb - lag {
                num += dot(&x[i], &x[i + lag]);
                na += norms[i];
                nb2 += norms[i + lag];
            }
            let den = (na * nb2).sqrt();
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect()
}

/// Candidate periods: local maxima of the autocorrelation beyond its first
/// minimum with strength above 0.5, refined by parabolic interpolation and
/// sorted by decreasing strength.
pub fn measure_period(spectrum: &Spectrum) -> Result<Vec<PeriodCandidate>, SweepError> {
    let nb = spectrum.b_points();
    if nb < MIN_PERIOD_POINTS {
        return Err(SweepError::InsufficientRange(format!(
            "{nb} B points, need at least {MIN_PERIOD_POINTS}"
        )));
    }
    let b = &spectrum.b_values;
    let step = (b[nb - 1] - b[0]) / (nb - 1) as f64;
    if !(step > 0.0)
        || b.windows(2)
            .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0))
    {
        return Err(SweepError::InvalidPlan(
            "measure_period needs a uniform ascending B grid".into(),
        ));
    }
    let c = autocorrelation(spectrum);
    let first_min = (1..c.len().saturating_sub(1))
        .find(|&l| c[l] <= c[l - 1] && c[l] <= c[l + 1])
        .unwrap_or(c.len());
    let mut out: Vec<PeriodCandidate> = (first_min.max(1)..c.len().saturating_sub(1))
        .filter(|&l| c[l] > STRENGTH_THRESHOLD && c[l] >= c[l - 1] && c[l] > c[l + 1])
        .map(|l| {
            let (y0, y1, y2) = (c[l - 1], c[l], c[l + 1]);
            let den = y0 - 2.0 * y1 + y2;
            let (dx, peak) = if den < 0.0 {
                let dx = 0.5 * (y0 - y2) / den;
                (dx, y1 - 0.25 * (y0 - y2) * dx)
            } else {
                (0.0, y1)
            };
            PeriodCandidate {
                period: (l as f64 + dx) * step,
                strength: peak.min(1.0),
            }
        })
        .collect();
    if out.is_empty() {
        return Err(SweepError::InsufficientRange(
            "no recurrence above strength 0.5 within half the sweep; it must span at least two periods".into(),
        ));
    }
    out.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    Ok(out)
}
