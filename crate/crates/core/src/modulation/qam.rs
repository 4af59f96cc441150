use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One row of a 16-QAM harmonic mapping table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamMapEntry {
    pub symbol_index: u8,
    /// Source bits `b3 b2 b1 b0` in the low nibble.
    pub bits: u8,
    pub amp: f64,
    pub phase: f64,
    pub t0_frac: f64,
    pub delta_phi: f64,
}

impl QamMapEntry {
    /// Ideal harmonic value `|a1|·e^{j∠a1}`.
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(self.amp, self.phase)
    }

    /// Source bits as text, most significant first.
    pub fn bit_string(&self) -> String {
        format!("{:04b}", self.bits)
    }
}

const OUTER: f64 = 1.0;
const MIDDLE: f64 = 0.745_355_992_499_929_9; // sqrt(5)/3
const INNER: f64 = 1.0 / 3.0;
const ATAN_THIRD: f64 = 0.321_750_554_396_642_2;
const SWEEP_OUTER: f64 = 2.0 * PI;
const SWEEP_MIDDLE: f64 = 1.180 * PI;
const SWEEP_INNER: f64 = 0.549 * PI;

const fn row(
    symbol_index: u8,
    amp: f64,
    phase: f64,
    t0_frac: f64,
    delta_phi: f64,
) -> QamMapEntry {
    QamMapEntry {
        symbol_index,
        bits: symbol_index,
        amp,
        phase,
        t0_frac,
        delta_phi,
    }
}

/// Gray-coded 16-QAM on the first harmonic, indexed by source bits.
pub const TABLE_16QAM: [QamMapEntry; 16] = [
    row(0, OUTER, 1.25 * PI, 0.375, SWEEP_OUTER),
    row(1, MIDDLE, 1.5 * PI - ATAN_THIRD, 0.0962, SWEEP_MIDDLE),
    row(2, OUTER, 1.75 * PI, 0.125, SWEEP_OUTER),
    row(3, MIDDLE, 1.5 * PI + ATAN_THIRD, 0.994, SWEEP_MIDDLE),
    row(4, MIDDLE, PI + ATAN_THIRD, 0.244, SWEEP_MIDDLE),
    row(5, INNER, 1.25 * PI, 0.0123, SWEEP_INNER),
    row(6, MIDDLE, 2.0 * PI - ATAN_THIRD, 0.846, SWEEP_MIDDLE),
    row(7, INNER, 1.75 * PI, 0.762, SWEEP_INNER),
    row(8, OUTER, 0.75 * PI, 0.625, SWEEP_OUTER),
    row(9, MIDDLE, 0.5 * PI + ATAN_THIRD, 0.494, SWEEP_MIDDLE),
    row(10, OUTER, 0.25 * PI, 0.875, SWEEP_OUTER),
    row(11, MIDDLE, 0.5 * PI - ATAN_THIRD, 0.596, SWEEP_MIDDLE),
    row(12, MIDDLE, PI - ATAN_THIRD, 0.346, SWEEP_MIDDLE),
    row(13, INNER, 0.75 * PI, 0.262, SWEEP_INNER),
    row(14, MIDDLE, ATAN_THIRD, 0.744, SWEEP_MIDDLE),
    row(15, INNER, 0.25 * PI, 0.512, SWEEP_INNER),
];

/// Table row for the low four bits of `bits`.
pub fn map_bits_16qam(bits: u8) -> Result<QamMapEntry> {
    if bits > 0x0f {
        return Err(Error::Domain(format!("{bits:#x} does not fit in 4 bits")));
    }
    Ok(TABLE_16QAM[usize::from(bits)])
}

/// Bits of the entry nearest to `raw`; ties go to the lowest symbol index.
///
/// Distances within a relative `1e-12` count as ties, so points that are
/// equidistant in exact arithmetic are not split by rounding.
pub fn demap_symbol(raw: Complex64, constellation: &[QamMapEntry]) -> u8 {
    let mut best = (f64::INFINITY, u8::MAX, 0u8);
    for entry in constellation {
        let d = (raw - entry.point()).norm_sqr();
        let tie = (d - best.0).abs() <= 1e-12 * d.max(best.0);
        if (d < best.0 && !tie) || (tie && entry.symbol_index < best.1) {
            best = (d, entry.symbol_index, entry.bits);
        }
    }
    best.2
}

const CSV_HEADER: [&str; 6] = [
    "symbol_index",
    "bits",
    "amp",
    "phase_rad",
    "t0_frac",
    "delta_phi_rad",
];

/// A harmonic mapping table with its receiver-side normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    entries: Vec<QamMapEntry>,
}

impl Constellation {
    pub fn new(entries: Vec<QamMapEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("constellation is empty".into()));
        }
        Ok(Constellation { entries })
    }

    pub fn table_16qam() -> Self {
        Constellation {
            entries: TABLE_16QAM.to_vec(),
        }
    }

    pub fn entries(&self) -> &[QamMapEntry] {
        &self.entries
    }

    /// Root-mean-square magnitude of the ideal points.
    pub fn rms(&self) -> f64 {
        let e: f64 = self.entries.iter().map(|e| e.amp * e.amp).sum();
        (e / self.entries.len() as f64).sqrt()
    }

    /// Ideal points scaled to unit mean energy.
    pub fn normalized_points(&self) -> Vec<Complex64> {
        let rms = self.rms();
        self.entries.iter().map(|e| e.point() / rms).collect()
    }

    pub fn demap(&self, raw: Complex64) -> u8 {
        demap_symbol(raw, &self.entries)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for e in &self.entries {
            w.write_record([
                e.symbol_index.to_string(),
                e.bit_string(),
                format!("{:.12}", e.amp),
                format!("{:.12}", e.phase),
                format!("{:.12}", e.t0_frac),
                format!("{:.12}", e.delta_phi),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.len() < CSV_HEADER.len()
            || headers.iter().zip(CSV_HEADER).any(|(h, want)| h != want)
        {
            return Err(Error::Parse(format!(
                "constellation header must start with `{}`",
                CSV_HEADER.join(",")
            )));
        }
        let mut entries = Vec::new();
        for record in rdr.records() {
            let r = record.map_err(csv_err)?;
            let field = |i: usize| -> Result<&str> {
                r.get(i)
                    .ok_or_else(|| Error::Parse(format!("missing column {}", CSV_HEADER[i])))
            };
            let float = |i: usize| -> Result<f64> {
                field(i)?
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad {} `{}`", CSV_HEADER[i], field(i).unwrap_or(""))))
            };
            let symbol_index: u8 = field(0)?
                .parse()
                .map_err(|_| Error::Parse("bad symbol_index".into()))?;
            let bits = u8::from_str_radix(field(1)?, 2)
                .ok()
                .filter(|b| *b <= 0x0f)
                .ok_or_else(|| Error::Parse(format!("bad bits `{}`", field(1).unwrap_or(""))))?;
            entries.push(QamMapEntry {
                symbol_index,
                bits,
                amp: float(2)?,
                phase: float(3)?,
                t0_frac: float(4)?,
                delta_phi: float(5)?,
            });
        }
        Constellation::new(entries).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::circular_distance;

    /// Gray level for a bit pair: 00 → −3, 01 → −1, 11 → +1, 10 → +3.
    fn gray_level(pair: u8) -> f64 {
        match pair {
            0b00 => -3.0,
            0b01 => -1.0,
            0b11 => 1.0,
            _ => 3.0,
        }
    }

    #[test]
    fn rows_follow_square_gray_grid() {
        let c = 1.0 / (3.0 * 2f64.sqrt());
        for e in TABLE_16QAM {
            let x = gray_level(e.bits & 0b11) * c;
            let y = gray_level(e.bits >> 2) * c;
            assert!((e.point() - Complex64::new(x, y)).norm() < 1e-12, "row {}", e.symbol_index);
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        for a in TABLE_16QAM {
            for b in TABLE_16QAM {
                let d = (a.point() - b.point()).norm();
                if d > 1e-9 && d < 2.0 / (3.0 * 2f64.sqrt()) + 1e-9 {
                    assert_eq!((a.bits ^ b.bits).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn listed_rows() {
        let e = map_bits_16qam(0b0010).unwrap();
        assert_eq!((e.amp, e.t0_frac, e.delta_phi), (1.0, 0.125, 2.0 * PI));
        assert!(circular_distance(e.phase, 1.75 * PI) < 1e-15);
        let e = map_bits_16qam(0b1111).unwrap();
        assert!((e.amp - 1.0 / 3.0).abs() < 1e-15);
        assert!(circular_distance(e.phase, 0.25 * PI) < 1e-15);
        assert_eq!((e.t0_frac, e.delta_phi), (0.512, 0.549 * PI));
        let e = map_bits_16qam(0b1000).unwrap();
        assert_eq!((e.amp, e.t0_frac), (1.0, 0.625));
        assert!(map_bits_16qam(16).is_err());
    }

    #[test]
    fn ring_constants() {
        assert!((MIDDLE - 5f64.sqrt() / 3.0).abs() < 1e-15);
        assert!((ATAN_THIRD - (1.0f64 / 3.0).atan()).abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        let c = Constellation::table_16qam();
        assert!((c.rms().powi(2) - 5.0 / 9.0).abs() < 1e-12);
        let e: f64 = c.normalized_points().iter().map(|z| z.norm_sqr()).sum::<f64>() / 16.0;
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn demap_examples() {
        let table = &TABLE_16QAM;
        assert_eq!(demap_symbol(Complex64::from_polar(1.0, 1.25 * PI), table), 0b0000);
        assert_eq!(demap_symbol(Complex64::new(0.0, 0.0), table), 0b0101);
        let p = TABLE_16QAM[10].point() + Complex64::new(0.05, 0.05);
        let nearest = TABLE_16QAM
            .iter()
            .min_by(|a, b| {
                (p - a.point()).norm().partial_cmp(&(p - b.point()).norm()).unwrap()
            })
            .unwrap();
        assert_eq!(nearest.bits, 0b1010);
        assert_eq!(demap_symbol(p, table), 0b1010);
    }

    #[test]
    fn csv_roundtrip() {
        let c = Constellation::table_16qam();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("symbol_index,bits,amp,phase_rad,t0_frac,delta_phi_rad\n"));
        assert!(text.contains("\n2,0010,"));
        let back = Constellation::read_csv(buf.as_slice()).unwrap();
        for (a, b) in c.entries().iter().zip(back.entries()) {
            assert_eq!(a.bits, b.bits);
            assert!((a.point() - b.point()).norm() < 1e-11);
            assert!((a.t0_frac - b.t0_frac).abs() < 1e-12);
        }
        assert!(Constellation::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
