use std::io::{Read, Write};

use super::{Spectrum, SweepError};

pub const BINARY_MAGIC: &[u8; 8] = b"HBSPEC2\0";

/// Long-format CSV: `B_tesla,E_ev,dos`, B-major.
pub fn write_csv<W: Write>(spectrum: &Spectrum, mut w: W) -> Result<(), SweepError> {
    writeln!(w, "B_tesla,E_ev,dos")?;
    for (i, b) in spectrum.b_values.iter().enumerate() {
        for (e, d) in spectrum.energies.iter().zip(spectrum.row(i)) {
            writeln!(w, "{b:e},{e:e},{d:e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Binary matrix: magic, u64 counts, u64 flags (bit 0: centred), then f64
/// B grid, energy grid and row-major DOS, all little-endian.
pub fn write_binary<W: Write>(spectrum: &Spectrum, mut w: W) -> Result<(), SweepError> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(spectrum.b_points() as u64).to_le_bytes())?;
    w.write_all(&(spectrum.energy_points() as u64).to_le_bytes())?;
    w.write_all(&u64::from(spectrum.centered).to_le_bytes())?;
    for v in spectrum.b_values.iter().chain(&spectrum.energies).chain(&spectrum.dos) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Spectrum, SweepError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(SweepError::Format("bad magic".into()));
    }
    let mut word = [0u8; 8];
    let mut read_u64 = |r: &mut R| -> Result<u64, SweepError> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let nb = read_u64(&mut r)? as usize;
    let ne = read_u64(&mut r)? as usize;
    let flags = read_u64(&mut r)?;
    if flags > 1 {
        return Err(SweepError::Format(format!("unknown flags {flags:#x}")));
    }
    let total = nb
        .checked_mul(ne)
        .and_then(|x| x.checked_add(nb + ne))
        .ok_or_else(|| SweepError::Format("dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != total * 8 {
        return Err(SweepError::Format(format!(
            "expected {} payload bytes, found {}",
            total * 8,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Spectrum::new(
        values[..nb].to_vec(),
        values[nb..nb + ne].to_vec(),
        values[nb + ne..].to_vec(),
        flags == 1,
    )
}

/// 8-bit P5 heatmap: columns are B ascending, rows energy descending,
/// intensity `log10(1 + dos/floor)` scaled to 0..255 with floor = 10⁻⁶·max.
pub fn write_pgm<W: Write>(spectrum: &Spectrum, mut w: W) -> Result<(), SweepError> {
    let nb = spectrum.b_points();
    let ne = spectrum.energy_points();
    let max = spectrum.dos.iter().copied().fold(0.0, f64::max);
    let floor = if max > 0.0 { 1e-6 * max } else { 1.0 };
    let level = |d: f64| (1.0 + d.max(0.0) / floor).log10();
    let top = level(max);
    write!(w, "P5\n{nb} {ne}\n255\n")?;
    let mut pixels = Vec::with_capacity(nb * ne);
    for j in (0..ne).rev() {
        for i in 0..nb {
            let v = if top > 0.0 {
                level(spectrum.dos[i * ne + j]) / top
            } else {
                0.0
            };
            pixels.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    w.write_all(&pixels)?;
    w.flush()?;
    Ok(())
}
