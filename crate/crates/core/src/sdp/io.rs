//! Files: dense matrices as CSV, factor heatmaps (CSV + PGM) and the sparse
//! SDPA text format.
//!
//! SDPA solves `max ⟨F₀,Y⟩ s.t. ⟨F_t,Y⟩ = c_t, Y ⪰ 0` in its dual form, so a
//! problem `min ⟨C,X⟩ s.t. ⟨A_t,X⟩ = b_t` is written with `F_t = A_t`,
//! `c_t = b_t` and `F₀ = −C`. Entries are printed as decimals; rationals
//! with non-terminating expansions lose exactness.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::{SdpError, SdpProblem, SpectralFactor};

/// Writes a matrix with full float precision. `header` names the columns.
pub fn write_matrix_csv(
    path: &Path,
    m: &DMatrix<f64>,
    header: Option<&[String]>,
) -> Result<(), SdpError> {
    let mut w = csv::Writer::from_path(path)?;
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for r in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV matrix, skipping the first row when `header` is set.
pub fn read_matrix_csv(path: &Path, header: bool) -> Result<DMatrix<f64>, SdpError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(e) => return Err(SdpError::Format(format!("row {}: {e}", k + 1))),
        }
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(SdpError::Format("ragged matrix".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

/// Writes `PREFIX.csv` (rows `s_i`, columns named by monomials) and
/// `PREFIX.pgm`, a grayscale image scaled to the entry range.
pub fn export_heatmap(
    factor: &SpectralFactor,
    names: &[String],
    prefix: &Path,
) -> Result<(PathBuf, PathBuf), SdpError> {
    let s = &factor.s;
    if names.len() != s.ncols() {
        return Err(SdpError::Dimension(format!(
            "{} names for {} columns",
            names.len(),
            s.ncols()
        )));
    }
    let csv_path = prefix.with_extension("csv");
    let pgm_path = prefix.with_extension("pgm");
    write_matrix_csv(&csv_path, s, Some(names))?;

    let (lo, hi) = s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mut pgm = format!(
        "P2\n# rows are summands, columns are monomials\n{} {}\n255\n",
        s.ncols(),
        s.nrows()
    );
    for r in 0..s.nrows() {
        let line: Vec<String> = (0..s.ncols())
            .map(|c| {
                let level = if hi > lo {
                    ((s[(r, c)] - lo) / (hi - lo) * 255.0).round()
                } else {
                    128.0
                };
                (level as u8).to_string()
            })
            .collect();
        pgm.push_str(&line.join(" "));
        pgm.push('\n');
    }
    fs::write(&pgm_path, pgm)?;
    Ok((csv_path, pgm_path))
}

/// Parsed SDPA data: one block, entries `(matrix, i, j, value)` with
/// 1-based `i ≤ j` as in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpaData {
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

impl SdpaData {
    pub fn num_constraints(&self) -> usize {
        self.c.len()
    }

    /// Dense symmetric `F_k` of block 1.
    pub fn matrix(&self, k: usize) -> DMatrix<f64> {
        let n = self
            .block_sizes
            .first()
            .map_or(0, |b| b.unsigned_abs() as usize);
        let mut m = DMatrix::zeros(n, n);
        for &(_, _, i, j, v) in self.entries.iter().filter(|e| e.0 == k && e.1 == 1) {
            m[(i - 1, j - 1)] = v;
            m[(j - 1, i - 1)] = v;
        }
        m
    }
}

pub fn export_sdpa(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\"Gram problem p={} constraints={} ell={}",
        problem.p(),
        problem.num_constraints(),
        problem.ell()
    );
    let _ = writeln!(out, "{}", problem.num_constraints());
    let _ = writeln!(out, "1");
    let _ = writeln!(out, "{}", problem.p());
    let c: Vec<String> = problem
        .constraints()
        .iter()
        .map(|c| format!("{}", c.rhs.to_f64()))
        .collect();
    let _ = writeln!(out, "{}", c.join(" "));
    for (i, j, v) in problem.objective() {
        let _ = writeln!(out, "0 1 {} {} {}", i + 1, j + 1, -v.to_f64());
    }
    for (t, con) in problem.constraints().iter().enumerate() {
        for (i, j, v) in &con.entries {
            let _ = writeln!(out, "{} 1 {} {} {}", t + 1, i + 1, j + 1, v.to_f64());
        }
    }
    out
}

pub fn import_sdpa(text: &str) -> Result<SdpaData, SdpError> {
    let bad = |what: &str| SdpError::Format(format!("sdpa: {what}"));
    // comments start with `"` or `*`; punctuation around numbers is allowed
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let numbers = |l: &str| -> Vec<String> {
        l.split(|ch: char| ch.is_whitespace() || "{}(),".contains(ch))
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    };
    let m: usize = lines
        .next()
        .and_then(|l| numbers(l).first()?.parse().ok())
        .ok_or_else(|| bad("constraint count"))?;
    let nblocks: usize = lines
        .next()
        .and_then(|l| numbers(l).first()?.parse().ok())
        .ok_or_else(|| bad("block count"))?;
    let block_sizes: Vec<i64> = numbers(lines.next().ok_or_else(|| bad("block sizes"))?)
        .iter()
        .take(nblocks)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("block sizes"))?;
    let mut c: Vec<f64> = Vec::with_capacity(m);
    while c.len() < m {
        let line = lines.next().ok_or_else(|| bad("objective vector"))?;
        for s in numbers(line) {
            c.push(s.parse().map_err(|_| bad("objective vector"))?);
        }
    }
    let mut entries = Vec::new();
    for line in lines {
        let f = numbers(line);
        if f.len() != 5 {
            return Err(bad(&format!("entry line `{line}`")));
        }
        let idx = |k: usize| {
            f[k].parse::<usize>()
                .map_err(|_| bad(&format!("entry line `{line}`")))
        };
        let v: f64 = f[4]
            .parse()
            .map_err(|_| bad(&format!("entry line `{line}`")))?;
        entries.push((idx(0)?, idx(1)?, idx(2)?, idx(3)?, v));
    }
    Ok(SdpaData {
        block_sizes,
        c,
        entries,
    })
}
