//! File outputs: snapshot, rates, and region CSVs, all carrying a header
//! comment with the configuration hash and code version.

use std::io::Write;
use std::path::Path;

use crate::mesh::SlabMesh;

/// FNV-1a of the canonical configuration text.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn header_comment(hash: u64) -> String {
    format!("config_hash={hash:016x} version={}", env!("CARGO_PKG_VERSION"))
}

/// Snapshot CSV: `x_cm,T_eV,Er_erg_cc,Fr` per cell.
pub fn write_snapshot(
    path: &Path,
    header: &str,
    mesh: &SlabMesh,
    t: &[f64],
    e: &[f64],
    f: &[f64],
) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# {header}")?;
    writeln!(w, "x_cm,T_eV,Er_erg_cc,Fr")?;
    for cell in 0..mesh.cells() {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e}",
            mesh.center(cell),
            t[cell],
            e[cell],
            f[cell]
        )?;
    }
    Ok(())
}

/// One row of a convergence-rate table.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub dt: f64,
    /// (L1, L2, Linf) for temperature then radiation energy.
    pub errors_t: [f64; 3],
    pub errors_er: [f64; 3],
    /// Rates vs the previous row; None on the first row.
    pub rates_t: [Option<f64>; 3],
    pub rates_er: [Option<f64>; 3],
}

/// Rates CSV with columns
/// `dt,L1_T,rate,L2_T,rate,Linf_T,rate,L1_Er,rate,L2_Er,rate,Linf_Er,rate`.
pub fn write_rates(path: &Path, header: &str, rows: &[RateRow]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# {header}")?;
    writeln!(w, "dt,L1_T,rate,L2_T,rate,Linf_T,rate,L1_Er,rate,L2_Er,rate,Linf_Er,rate")?;
    let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_default();
    for row in rows {
        write!(w, "{:.6e}", row.dt)?;
        for k in 0..3 {
            write!(w, ",{:.6e},{}", row.errors_t[k], fmt_rate(row.rates_t[k]))?;
        }
        for k in 0..3 {
            write!(w, ",{:.6e},{}", row.errors_er[k], fmt_rate(row.rates_er[k]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Region CSV: `re,im,stable`.
pub fn write_region(path: &Path, header: &str, region: &imexrk::Region) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# {header}")?;
    writeln!(w, "re,im,stable")?;
    for (ii, &im) in region.im.iter().enumerate() {
        for (ir, &re) in region.re.iter().enumerate() {
            let s = u8::from(region.stable[ii * region.re.len() + ir]);
            writeln!(w, "{re:.12e},{im:.12e},{s}")?;
        }
    }
    Ok(())
}

/// Relative L1/L2/Linf distances between a field and its reference.
pub fn relative_norms(u: &[f64], reference: &[f64]) -> [f64; 3] {
    let mut diff1 = 0.0;
    let mut diff2 = 0.0;
    let mut diff_inf = 0.0_f64;
    let mut ref1 = 0.0;
    let mut ref2 = 0.0;
    let mut ref_inf = 0.0_f64;
    for (a, b) in u.iter().zip(reference) {
        let d = (a - b).abs();
        diff1 += d;
        diff2 += d * d;
        diff_inf = diff_inf.max(d);
        ref1 += b.abs();
        ref2 += b * b;
        ref_inf = ref_inf.max(b.abs());
    }
    [
        diff1 / ref1.max(f64::MIN_POSITIVE),
        (diff2 / ref2.max(f64::MIN_POSITIVE)).sqrt(),
        diff_inf / ref_inf.max(f64::MIN_POSITIVE),
    ]
}
