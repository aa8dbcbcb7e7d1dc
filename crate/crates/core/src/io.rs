//! JSON and CSV formats shared by the CLI and tests.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of
//! rows. CSV files carry a `t` column followed by the real and imaginary
//! part of every matrix entry, slot by slot in row-major order, printed with
//! 17 significant digits so that values round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kempf_ness::{CommutingTriplePoint, DecoupledPath, HermitianPath};
use crate::lie::Flavor;
use crate::linalg::{CMat, CVec};
use crate::nahm::NahmPath;
use crate::poles::{NahmQuadruple, QuadrupleReport, ResidueReport};

/// A matrix as a list of rows of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<Complex64>>;

/// A vector as a list of `[re, im]` pairs.
pub type JsonVector = Vec<Complex64>;

pub fn mat_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

/// Parse a nonempty square matrix with finite entries.
pub fn mat_from_json(m: &JsonMatrix, name: &str) -> Result<CMat> {
    let k = m.len();
    if k == 0 {
        return Err(Error::domain(format!("\"{name}\" is empty; expected a square list of rows")));
    }
    if let Some((r, row)) = m.iter().enumerate().find(|(_, row)| row.len() != k) {
        return Err(Error::dim(format!(
            "\"{name}\" row {r} has {} entries; a {k}-row matrix needs {k} per row",
            row.len()
        )));
    }
    let flat: Vec<Complex64> = m.iter().flatten().copied().collect();
    if flat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain(format!("\"{name}\" has a non-finite entry")));
    }
    Ok(CMat::from_row_slice(k, k, &flat))
}

pub fn vec_to_json(v: &CVec) -> Vec<Complex64> {
    v.iter().copied().collect()
}

pub fn vec_from_json(v: &[Complex64], name: &str) -> Result<CVec> {
    if v.is_empty() {
        return Err(Error::domain(format!("\"{name}\" is empty")));
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain(format!("\"{name}\" has a non-finite entry")));
    }
    Ok(CVec::from_column_slice(v))
}

fn same_size(ms: &[(&str, &CMat)]) -> Result<usize> {
    let k = ms[0].1.nrows();
    for (name, m) in ms {
        if m.nrows() != k {
            return Err(Error::dim(format!(
                "\"{name}\" is {0}x{0} but \"{1}\" is {k}x{k}",
                m.nrows(),
                ms[0].0
            )));
        }
    }
    Ok(k)
}

/// `{"g", "t1", "t2", "t3"}`: a point of the commuting triple set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleJson {
    pub g: JsonMatrix,
    pub t1: JsonMatrix,
    pub t2: JsonMatrix,
    pub t3: JsonMatrix,
}

impl TripleJson {
    pub fn from_point(p: &CommutingTriplePoint) -> Self {
        TripleJson {
            g: mat_to_json(&p.g),
            t1: mat_to_json(&p.t[0]),
            t2: mat_to_json(&p.t[1]),
            t3: mat_to_json(&p.t[2]),
        }
    }

    /// Validates shapes, invertibility and commutation (relative `tol`).
    pub fn to_point(&self, tol: f64) -> Result<CommutingTriplePoint> {
        let g = mat_from_json(&self.g, "g")?;
        let t1 = mat_from_json(&self.t1, "t1")?;
        let t2 = mat_from_json(&self.t2, "t2")?;
        let t3 = mat_from_json(&self.t3, "t3")?;
        same_size(&[("g", &g), ("t1", &t1), ("t2", &t2), ("t3", &t3)])?;
        CommutingTriplePoint::new(g, [t1, t2, t3], tol)
    }
}

/// `{"B1", "B2", "B3", "w"}`: a Nahm quadruple candidate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupleJson {
    #[serde(rename = "B1")]
    pub b1: JsonMatrix,
    #[serde(rename = "B2")]
    pub b2: JsonMatrix,
    #[serde(rename = "B3")]
    pub b3: JsonMatrix,
    pub w: Vec<Complex64>,
}

impl QuadrupleJson {
    pub fn from_quadruple(q: &NahmQuadruple) -> Self {
        QuadrupleJson {
            b1: mat_to_json(&q.b[0]),
            b2: mat_to_json(&q.b[1]),
            b3: mat_to_json(&q.b[2]),
            w: vec_to_json(&q.w),
        }
    }

    /// Shape checks only; see [`crate::poles::validate_quadruple`].
    pub fn to_quadruple(&self) -> Result<NahmQuadruple> {
        let b1 = mat_from_json(&self.b1, "B1")?;
        let b2 = mat_from_json(&self.b2, "B2")?;
        let b3 = mat_from_json(&self.b3, "B3")?;
        same_size(&[("B1", &b1), ("B2", &b2), ("B3", &b3)])?;
        NahmQuadruple::new([b1, b2, b3], vec_from_json(&self.w, "w")?)
    }
}

/// `{"xi": [X₁(0), …, X₇(0)]}`: initial data of the reduced flow.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitJson {
    pub xi: Vec<JsonMatrix>,
}

impl InitJson {
    pub fn from_init(xi: &[CMat; 7]) -> Self {
        InitJson { xi: xi.iter().map(mat_to_json).collect() }
    }

    pub fn to_init(&self) -> Result<[CMat; 7]> {
        if self.xi.len() != 7 {
            return Err(Error::dim(format!("\"xi\" must list 7 matrices (got {})", self.xi.len())));
        }
        let names: Vec<String> = (1..=7).map(|i| format!("xi[{i}]")).collect();
        let ms: Vec<CMat> =
            self.xi.iter().zip(&names).map(|(m, n)| mat_from_json(m, n)).collect::<Result<_>>()?;
        let named: Vec<(&str, &CMat)> = names.iter().map(String::as_str).zip(&ms).collect();
        same_size(&named)?;
        Ok(std::array::from_fn(|i| ms[i].clone()))
    }
}

/// Serializable view of [`QuadrupleReport`] plus its verdict.
#[derive(Clone, Debug, Serialize)]
pub struct QuadrupleReportJson<'a> {
    pub valid: bool,
    #[serde(flatten)]
    pub report: &'a QuadrupleReport,
}

/// Serializable view of [`ResidueReport`].
#[derive(Clone, Debug, Serialize)]
pub struct ResidueJson {
    pub a: JsonMatrix,
    pub b: [JsonMatrix; 3],
    pub s_raw: [Complex64; 3],
    pub s: [Complex64; 3],
    pub weight_sum: f64,
    pub fit_residual: f64,
    pub pole_identity_b: f64,
    pub pole_identity_a: f64,
}

impl From<&ResidueReport> for ResidueJson {
    fn from(r: &ResidueReport) -> Self {
        ResidueJson {
            a: mat_to_json(&r.a),
            b: std::array::from_fn(|i| mat_to_json(&r.b[i])),
            s_raw: r.s_raw,
            s: r.s,
            weight_sum: r.weight_sum,
            fit_residual: r.fit_residual,
            pole_identity_b: r.pole_identity_b,
            pole_identity_a: r.pole_identity_a,
        }
    }
}

// ---------------------------------------------------------------------------
// JSON files

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

/// Parse `text`, naming `origin` in the error message.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::domain(format!("{origin}: malformed or off-schema JSON: {e}")))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)
        .map_err(|e| Error::domain(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// CSV

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn slot_header(name: &str, k: usize) -> Vec<String> {
    let mut h = Vec::with_capacity(2 * k * k);
    for r in 0..k {
        for c in 0..k {
            h.push(format!("{name}_{r}{c}_re"));
            h.push(format!("{name}_{r}{c}_im"));
        }
    }
    h
}

/// Write `t` plus the given slots for every sample.
pub fn write_slots_csv<'a, W: Write>(
    out: W,
    grid: &Grid,
    names: &[String],
    k: usize,
    sample: impl Fn(usize) -> Vec<&'a CMat>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for n in names {
        header.extend(slot_header(n, k));
    }
    w.write_record(&header)?;
    for j in 0..grid.len() {
        let mut rec = vec![fmt_f64(grid.t(j))];
        let ms = sample(j);
        debug_assert_eq!(ms.len(), names.len());
        for m in ms {
            for r in 0..k {
                for c in 0..k {
                    rec.push(fmt_f64(m[(r, c)].re));
                    rec.push(fmt_f64(m[(r, c)].im));
                }
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a slot CSV: the times and, per sample, `slots` matrices.
pub fn read_slots_csv<R: Read>(input: R, slots: usize) -> Result<(Grid, usize, Vec<Vec<CMat>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let cols = rdr.headers()?.len();
    let per = (cols.saturating_sub(1)) / (2 * slots);
    let k = (per as f64).sqrt().round() as usize;
    if cols < 1 + 2 * slots || k == 0 || 1 + 2 * slots * k * k != cols {
        return Err(Error::dim(format!(
            "CSV has {cols} columns; {slots} slots of k x k complex matrices need 1 + {}k^2",
            2 * slots
        )));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::domain(format!("CSV data row {}: {e}", line + 1)))?;
        times.push(vals[0]);
        let ms = (0..slots)
            .map(|s| {
                let base = 1 + 2 * k * k * s;
                let entries: Vec<Complex64> =
                    (0..k * k).map(|e| Complex64::new(vals[base + 2 * e], vals[base + 2 * e + 1])).collect();
                CMat::from_row_slice(k, k, &entries)
            })
            .collect();
        samples.push(ms);
    }
    if times.len() < 2 {
        return Err(Error::domain("CSV needs at least two samples"));
    }
    let n = times.len() - 1;
    let grid = Grid::new(times[0], times[n], n)?;
    let scale = times[0].abs().max(times[n].abs()).max(1.0);
    for (j, &t) in times.iter().enumerate() {
        if (t - grid.t(j)).abs() > 1e-9 * scale {
            return Err(Error::domain(format!("CSV times are not uniform (row {})", j + 1)));
        }
    }
    Ok((grid, k, samples))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::domain(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::domain(format!("cannot open {}: {e}", path.display())))
}

fn names(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

/// Columns `t, X0_00_re, X0_00_im, …, X7_{k-1}{k-1}_im`.
pub fn write_nahm_csv<W: Write>(out: W, p: &NahmPath) -> Result<()> {
    write_slots_csv(out, &p.grid, &names("X", 0..8), p.k, |j| p.values[j].iter().collect())
}

/// Inverse of [`write_nahm_csv`]; `k` is inferred from the column count.
pub fn read_nahm_csv<R: Read>(input: R, flavor: Flavor) -> Result<NahmPath> {
    let (grid, _, samples) = read_slots_csv(input, 8)?;
    let values = samples.into_iter().map(|s| std::array::from_fn(|i| s[i].clone())).collect();
    NahmPath::new(grid, flavor, values)
}

pub fn save_nahm_csv(path: &Path, p: &NahmPath) -> Result<()> {
    write_nahm_csv(create(path)?, p)
}

pub fn load_nahm_csv(path: &Path, flavor: Flavor) -> Result<NahmPath> {
    read_nahm_csv(open(path)?, flavor).map_err(|e| match e {
        Error::Csv(c) => Error::domain(format!("{}: malformed CSV: {c}", path.display())),
        other => other,
    })
}

/// Columns `t, alpha_…, beta1_…, beta2_…, beta3_…`.
pub fn write_decoupled_csv<W: Write>(out: W, p: &DecoupledPath) -> Result<()> {
    let mut n = vec!["alpha".to_string()];
    n.extend(names("beta", 1..4));
    write_slots_csv(out, &p.grid, &n, p.k, |j| {
        let mut v = vec![&p.alpha[j]];
        v.extend(p.beta[j].iter());
        v
    })
}

pub fn read_decoupled_csv<R: Read>(input: R) -> Result<DecoupledPath> {
    let (grid, _, samples) = read_slots_csv(input, 4)?;
    let alpha = samples.iter().map(|s| s[0].clone()).collect();
    let beta = samples.iter().map(|s| std::array::from_fn(|i| s[i + 1].clone())).collect();
    DecoupledPath::new(grid, alpha, beta)
}

pub fn save_decoupled_csv(path: &Path, p: &DecoupledPath) -> Result<()> {
    write_decoupled_csv(create(path)?, p)
}

/// Columns `t, h_…`.
pub fn write_hermitian_csv<W: Write>(out: W, h: &HermitianPath) -> Result<()> {
    let k = h.values[0].nrows();
    write_slots_csv(out, &h.grid, &["h".to_string()], k, |j| vec![&h.values[j]])
}

pub fn save_hermitian_csv(path: &Path, h: &HermitianPath) -> Result<()> {
    write_hermitian_csv(create(path)?, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, frob, random_complex, seeded_rng};

    #[test]
    fn matrix_json_is_row_major_pairs() {
        let m = CMat::from_row_slice(2, 2, &[c64(1.0, 2.0), c64(3.0, 0.0), c64(0.0, -1.0), c64(0.5, 0.0)]);
        let s = serde_json::to_string(&mat_to_json(&m)).unwrap();
        assert_eq!(s, "[[[1.0,2.0],[3.0,0.0]],[[0.0,-1.0],[0.5,0.0]]]");
        let back: JsonMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(mat_from_json(&back, "m").unwrap(), m);
    }

    #[test]
    fn ragged_and_unknown_fields_are_rejected() {
        let ragged: JsonMatrix = serde_json::from_str("[[[1,0],[0,0]],[[0,0]]]").unwrap();
        assert!(matches!(mat_from_json(&ragged, "m"), Err(Error::Dimension(_))));
        let bad = r#"{"g": [[[1,0]]], "t1": [[[0,0]]], "t2": [[[0,0]]], "t3": [[[0,0]]], "t4": []}"#;
        assert!(parse_json::<TripleJson>(bad, "x").is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = seeded_rng(5);
        let grid = Grid::new(0.0, 0.3, 4).unwrap();
        let values: Vec<[CMat; 8]> =
            (0..5).map(|_| std::array::from_fn(|_| random_complex(2, 1.0, &mut rng))).collect();
        let p = NahmPath::new(grid, Flavor::Complexified, values).unwrap();
        let mut buf = Vec::new();
        write_nahm_csv(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 1 + 8 * 2 * 4);
        let q = read_nahm_csv(buf.as_slice(), Flavor::Complexified).unwrap();
        assert_eq!(q.k, 2);
        for (a, b) in p.values.iter().zip(&q.values) {
            for i in 0..8 {
                assert_eq!(frob(&(&a[i] - &b[i])), 0.0);
            }
        }
    }

    #[test]
    fn csv_with_wrong_width_is_rejected() {
        let text = "t,a,b\n0,1,2\n1,1,2\n";
        assert!(matches!(read_nahm_csv(text.as_bytes(), Flavor::Complexified), Err(Error::Dimension(_))));
    }
}
