use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{free_space_channel, link_table, RxAntennaConfig};
use crate::error::{Error, Result};
use crate::math::Mat2;
use crate::ris::RisGeometry;

/// Flat-fading gains, `rows` receive antennas by `cols` transmit elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
    cell_power: f64,
}

impl ChannelMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>, cell_power: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape {
                expected: "non-empty matrix".into(),
                got: format!("{rows}×{cols}"),
            });
        }
        if entries.len() != rows * cols {
            return Err(Error::Length {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("channel entries must be finite".into()));
        }
        if !(cell_power > 0.0) {
            return Err(Error::Domain("cell power must be positive".into()));
        }
        Ok(ChannelMatrix {
            rows,
            cols,
            entries,
            cell_power,
        })
    }

    /// Per-cell channel from every cell to every antenna, cells in row-major
    /// order, with `p = S·d_x·d_y`.
    pub fn from_geometry(geom: &RisGeometry, rxs: &[RxAntennaConfig], flux: f64) -> Result<Self> {
        let links = link_table(geom, rxs)?;
        let entries = rxs
            .iter()
            .zip(&links)
            .flat_map(|(rx, row)| row.iter().map(move |l| free_space_channel(geom, rx, l)))
            .collect();
        ChannelMatrix::new(rxs.len(), geom.cell_count(), entries, geom.cell_power(flux))
    }

    pub fn from_mat2(h: &Mat2, cell_power: f64) -> Result<Self> {
        ChannelMatrix::new(2, 2, h.0.iter().flatten().copied().collect(), cell_power)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_power(&self) -> f64 {
        self.cell_power
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn to_mat2(&self) -> Result<Mat2> {
        if self.rows != 2 || self.cols != 2 {
            return Err(Error::Shape {
                expected: "2×2".into(),
                got: format!("{}×{}", self.rows, self.cols),
            });
        }
        Ok(Mat2::new(self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1)))
    }

    /// Sums the columns of each group into one aggregated column, as when a
    /// set of cells is driven by the same stream.
    pub fn aggregate(&self, groups: &[Vec<usize>]) -> Result<ChannelMatrix> {
        if let Some(&bad) = groups.iter().flatten().find(|&&c| c >= self.cols) {
            return Err(Error::Shape {
                expected: format!("column < {}", self.cols),
                got: bad.to_string(),
            });
        }
        let mut entries = Vec::with_capacity(self.rows * groups.len());
        for r in 0..self.rows {
            for g in groups {
                entries.push(g.iter().map(|&c| self.get(r, c)).sum());
            }
        }
        ChannelMatrix::new(self.rows, groups.len(), entries, self.cell_power)
    }

    /// `y = H·x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::Length {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(self
            .entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(h, v)| h * v).sum())
            .collect())
    }

    /// CSV `row,col,re,im`, zero-based indices.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["row", "col", "re", "im"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let z = self.get(r, c);
                w.write_record([r.to_string(), c.to_string(), format!("{:e}", z.re), format!("{:e}", z.im)])
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`ChannelMatrix::write_csv`]; every entry of
    /// the implied matrix must be present exactly once.
    pub fn read_csv<R: Read>(reader: R, cell_power: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["row", "col", "re", "im"] {
            return Err(Error::Parse("channel header must be `row,col,re,im`".into()));
        }
        let mut cells = Vec::new();
        for record in rdr.records() {
            let r = record.map_err(|e| Error::Parse(e.to_string()))?;
            let get = |i: usize| r.get(i).ok_or_else(|| Error::Parse("short channel row".into()));
            let row: usize = get(0)?.parse().map_err(|_| Error::Parse("bad row index".into()))?;
            let col: usize = get(1)?.parse().map_err(|_| Error::Parse("bad col index".into()))?;
            let re: f64 = get(2)?.parse().map_err(|_| Error::Parse("bad re".into()))?;
            let im: f64 = get(3)?.parse().map_err(|_| Error::Parse("bad im".into()))?;
            cells.push((row, col, Complex64::new(re, im)));
        }
        let rows = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
        let cols = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
        if rows * cols != cells.len() {
            return Err(Error::Parse(format!(
                "{} entries do not fill a {rows}×{cols} matrix",
                cells.len()
            )));
        }
        let mut entries = vec![None; rows * cols];
        for (r, c, z) in cells {
            if entries[r * cols + c].replace(z).is_some() {
                return Err(Error::Parse(format!("duplicate entry ({r}, {c})")));
            }
        }
        let entries = entries.into_iter().map(|z| z.expect("all entries filled")).collect();
        ChannelMatrix::new(rows, cols, entries, cell_power).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One circularly-symmetric complex Gaussian draw with `E|n|² = sigma2`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma2: f64) -> Complex64 {
    let s = (sigma2 / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// `y = √p·H·x + n` with i.i.d. noise of variance `noise_sigma2` per antenna.
pub fn flat_fading_transmit<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    x: &[Complex64],
    p: f64,
    noise_sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(p >= 0.0) || !(noise_sigma2 >= 0.0) {
        return Err(Error::Domain("power and noise variance must be non-negative".into()));
    }
    let sp = p.sqrt();
    let clean = h.apply(x)?;
    Ok(clean
        .into_iter()
        .map(|y| y * sp + complex_gaussian(rng, noise_sigma2))
        .collect())
}

/// 2×2 channel with i.i.d. unit-variance complex Gaussian entries, fixed by
/// `seed`.
pub fn random_channel(seed: u64) -> Mat2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || complex_gaussian(&mut rng, 1.0);
    Mat2::new(draw(), draw(), draw(), draw())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ris::RadiationPattern;

    fn sample_h() -> ChannelMatrix {
        ChannelMatrix::new(
            2,
            2,
            vec![
                Complex64::new(0.8, -0.3),
                Complex64::new(0.2, 0.5),
                Complex64::new(-0.4, 0.1),
                Complex64::new(1.1, 0.6),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn identity_noiseless() {
        let h = ChannelMatrix::from_mat2(&Mat2::identity(), 1.0).unwrap();
        let x = [Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.7)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = flat_fading_transmit(&h, &x, 4.0, 0.0, &mut rng).unwrap();
        assert_eq!(y, vec![x[0] * 2.0, x[1] * 2.0]);
    }

    #[test]
    fn noise_only_variance() {
        let h = sample_h();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zero = [Complex64::new(0.0, 0.0); 2];
        let sigma2 = 0.37;
        let n = 100_000;
        let mut acc = [0.0; 2];
        for _ in 0..n {
            let y = flat_fading_transmit(&h, &zero, 1.0, sigma2, &mut rng).unwrap();
            acc[0] += y[0].norm_sqr();
            acc[1] += y[1].norm_sqr();
        }
        for a in acc {
            assert!((a / n as f64 / sigma2 - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn seeded_regression_against_same_stream() {
        let h = sample_h();
        let x = [Complex64::new(0.5, -0.5), Complex64::new(-0.25, 1.0)];
        let (p, sigma2) = (2.0, 0.1);
        let y = flat_fading_transmit(&h, &x, p, sigma2, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s = (sigma2 / 2.0f64).sqrt();
        for (k, yk) in y.iter().enumerate() {
            let clean = (h.get(k, 0) * x[0] + h.get(k, 1) * x[1]) * p.sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            assert_eq!(*yk, clean + Complex64::new(re * s, im * s));
        }
        let again = flat_fading_transmit(&h, &x, p, sigma2, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(y, again);
    }

    #[test]
    fn dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            flat_fading_transmit(&sample_h(), &[Complex64::new(1.0, 0.0)], 1.0, 0.0, &mut rng),
            Err(Error::Length { expected: 2, got: 1 })
        ));
        assert!(ChannelMatrix::new(2, 2, vec![Complex64::new(0.0, 0.0); 3], 1.0).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let h = sample_h();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("row,col,re,im\n0,0,"));
        let back = ChannelMatrix::read_csv(buf.as_slice(), 1.0).unwrap();
        assert_eq!(back, h);
        assert!(ChannelMatrix::read_csv("row,col,re,im\n0,0,1,0\n1,1,1,0\n".as_bytes(), 1.0).is_err());
    }

    #[test]
    fn geometry_matrix_and_aggregation() {
        let g = RisGeometry::new(2, 4, 0.035, 0.035, 8.0, RadiationPattern::Cosine, 4.25e9).unwrap();
        let rxs = [
            RxAntennaConfig::new(5.0, RadiationPattern::Cosine, [0.1, 0.0, 1.5]).unwrap(),
            RxAntennaConfig::new(5.0, RadiationPattern::Cosine, [-0.1, 0.0, 1.5]).unwrap(),
        ];
        let h = ChannelMatrix::from_geometry(&g, &rxs, 3.0).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 8));
        assert!((h.cell_power() - 3.0 * 0.035 * 0.035).abs() < 1e-15);
        let left: Vec<usize> = (0..8).filter(|c| c % 4 < 2).collect();
        let right: Vec<usize> = (0..8).filter(|c| c % 4 >= 2).collect();
        let agg = h.aggregate(&[left.clone(), right]).unwrap();
        let direct: Complex64 = left.iter().map(|&c| h.get(1, c)).sum();
        assert!((agg.get(1, 0) - direct).norm() < 1e-15);
        assert!(agg.to_mat2().is_ok());
        assert!(h.to_mat2().is_err());
    }

    #[test]
    fn random_channel_is_seeded() {
        assert_eq!(random_channel(5), random_channel(5));
        assert_ne!(random_channel(5), random_channel(6));
    }
}
