use super::{Lattice, Site, StructureError};
use crate::geometry::Vec2;

fn parse_err(line: usize, message: impl Into<String>) -> StructureError {
    StructureError::Parse {
        line,
        message: message.into(),
    }
}

/// Extracts the nine numbers of the `Lattice="..."` key from an extended-XYZ
/// comment line.
fn lattice_key(comment: &str) -> Option<Result<[f64; 9], String>> {
    let start = comment.find("Lattice=")? + "Lattice=".len();
    let rest = &comment[start..];
    let body = if let Some(stripped) = rest.strip_prefix('"') {
        match stripped.find('"') {
            Some(end) => &stripped[..end],
            None => return Some(Err("unterminated Lattice value".into())),
        }
    } else {
        rest.split_whitespace().next().unwrap_or("")
    };
    let values: Result<Vec<f64>, _> = body.split_whitespace().map(str::parse::<f64>).collect();
    Some(match values {
        Ok(v) if v.len() == 9 => {
            let mut out = [0.0; 9];
            out.copy_from_slice(&v);
            Ok(out)
        }
        Ok(v) => Err(format!("Lattice needs 9 numbers, found {}", v.len())),
        Err(e) => Err(format!("non-numeric Lattice entry: {e}")),
    })
}

/// Parses an extended-XYZ document into a 2D [`Lattice`].
///
/// z coordinates and the third lattice vector are discarded; site order is
/// preserved. Hoppings are not assigned.
pub fn parse_structure(text: &str) -> Result<Lattice, StructureError> {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.first().ok_or_else(|| parse_err(1, "empty document"))?;
    let count: usize = first
        .trim()
        .parse()
        .map_err(|_| parse_err(1, format!("expected site count, found {:?}", first.trim())))?;
    let comment = lines.get(1).ok_or_else(|| parse_err(2, "missing comment line"))?;
    let cell = match lattice_key(comment) {
        None => return Err(parse_err(2, "missing Lattice=\"...\" key")),
        Some(Err(msg)) => return Err(parse_err(2, msg)),
        Some(Ok(cell)) => cell,
    };
    let a1 = Vec2::new(cell[0], cell[1]);
    let a2 = Vec2::new(cell[3], cell[4]);

    let mut sites = Vec::with_capacity(count);
    for k in 0..count {
        let line_no = k + 3;
        let line = lines
            .get(k + 2)
            .ok_or_else(|| parse_err(line_no, format!("expected {count} sites, found {k}")))?;
        let mut tok = line.split_whitespace();
        let species = tok.next().ok_or_else(|| parse_err(line_no, "empty site line"))?;
        let mut coord = [0.0f64; 3];
        for (axis, c) in coord.iter_mut().enumerate() {
            let raw = tok
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing coordinate {axis}")))?;
            *c = raw
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric coordinate {raw:?}")))?;
            if !c.is_finite() {
                return Err(parse_err(line_no, format!("non-finite coordinate {raw:?}")));
            }
        }
        sites.push(Site::new(species, Vec2::new(coord[0], coord[1])).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    if let Some((extra, _)) = lines
        .iter()
        .enumerate()
        .skip(count + 2)
        .find(|(_, l)| !l.trim().is_empty())
    {
        return Err(parse_err(
            extra + 1,
            format!("more site lines than the declared count {count}"),
        ));
    }
    Lattice::new(a1, a2, sites).map_err(|e| parse_err(2, e.to_string()))
}
