//! CSV, JSON and OBJ output for fields and loci.

use std::io::Write;

use super::field::ConjugateField;
use super::locus::{ConjugateSample, SingularityLabel};
use crate::error::{Error, Result};

/// One row per grid sample; holes keep their `u` with empty values.
pub fn write_field_csv<W: Write>(field: &ConjugateField, i: usize, w: W) -> Result<()> {
    let d = field.n - 1;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=d).map(|k| format!("u{k}")).collect();
    header.push("r".into());
    header.extend((1..=d).map(|k| format!("dr_du{k}")));
    header.extend((1..=field.n).map(|k| format!("x{k}")));
    header.extend((1..=field.n).map(|k| format!("v{k}")));
    header.extend(["cell".into(), "source".into(), "error".into()]);
    out.write_record(&header)?;
    for (idx, s) in field.samples.iter().enumerate() {
        let u = super::field::grid_u(idx, d, field.per_axis);
        let mut row: Vec<String> = u.iter().map(|v| format!("{v:.17e}")).collect();
        match s {
            Some(s) => {
                row.push(format!("{:.17e}", s.r[i - 1]));
                for k in 1..=d {
                    row.push(field.gradient(i, k, idx).map_or(String::new(), |g| format!("{g:.10e}")));
                }
                row.extend(s.x[i - 1].iter().map(|v| format!("{v:.17e}")));
                row.extend(s.tangential(i).iter().map(|v| format!("{v:.17e}")));
                row.push(super::locus::expected_label(&s.label, i).name().into());
                row.push(format!("{:?}", s.source));
                row.push(String::new());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 1 + d + 2 * field.n + 2));
                row.push(field.failures[idx].clone().unwrap_or_default());
            }
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_samples_json<W: Write>(samples: &[ConjugateSample], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, samples)?;
    Ok(())
}

pub fn read_samples_json(s: &str) -> Result<Vec<ConjugateSample>> {
    Ok(serde_json::from_str(s)?)
}

fn color(label: &SingularityLabel) -> [f64; 3] {
    match label {
        SingularityLabel::Regular => [0.7, 0.7, 0.7],
        SingularityLabel::CuspidalEdge { .. } => [0.9, 0.2, 0.1],
        SingularityLabel::D4PlusCandidate { .. } => [0.1, 0.3, 0.9],
        SingularityLabel::Excluded { .. } => [0.0, 0.0, 0.0],
    }
}

/// OBJ geometry: a closed polyline for `n = 2` (ambient when available), a grid
/// surface in `T_{p_0}M` for `n = 3`. Vertices carry label colors.
pub fn write_locus_obj<W: Write>(field: &ConjugateField, samples: &[ConjugateSample], mut w: W) -> Result<()> {
    let total = field.samples.len();
    // Map grid index to vertex number (1-based), skipping holes.
    let mut vid = vec![0usize; total];
    let mut next = 1;
    let mut it = samples.iter();
    for (idx, s) in field.samples.iter().enumerate() {
        if s.is_none() {
            continue;
        }
        let cs = it.next().ok_or_else(|| Error::InvalidConfig("samples do not match the field".into()))?;
        let p = match field.n {
            2 => cs.ambient.clone().unwrap_or_else(|| vec![cs.tangential[0], cs.tangential[1], 0.0]),
            3 => cs.tangential.clone(),
            n => return Err(Error::UnsupportedDimension(n)),
        };
        if p.len() != 3 {
            return Err(Error::UnsupportedDimension(p.len()));
        }
        let c = color(&cs.label);
        writeln!(w, "v {:.12} {:.12} {:.12} {:.3} {:.3} {:.3}", p[0], p[1], p[2], c[0], c[1], c[2])?;
        vid[idx] = next;
        next += 1;
    }
    match field.n {
        2 => {
            let line: Vec<String> = (0..=total).map(|k| vid[k % total]).filter(|&v| v > 0).map(|v| v.to_string()).collect();
            writeln!(w, "l {}", line.join(" "))?;
        }
        _ => {
            for idx in 0..total {
                let a = idx;
                let b = field.shift(idx, 0, 1);
                let c = field.shift(b, 1, 1);
                let d = field.shift(idx, 1, 1);
                for tri in [[a, b, c], [a, c, d]] {
                    if tri.iter().all(|&k| vid[k] > 0) {
                        writeln!(w, "f {} {} {}", vid[tri[0]], vid[tri[1]], vid[tri[2]])?;
                    }
                }
            }
        }
    }
    Ok(())
}
