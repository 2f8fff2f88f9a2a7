//! Text forms of certificates.
//!
//! ```text
//! # sos certificate params=3,2,3,2 ell=2 summands=4 d=2
//! <one summand per line>
//!
//! # gram certificate params=3,2,3,2 dim=2
//! basis 1
//! basis x[0,0]
//! row 1 -1/2
//! row -1/2 1
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use super::{CertifyError, GramCertificate, PolyCertificate};
use crate::algebra::{Polynomial, QuadExt, Rat, VarTable};
use crate::model::GraphClassParams;

fn header_fields<'a>(
    line: &'a str,
    prefix: &str,
) -> Result<BTreeMap<&'a str, &'a str>, CertifyError> {
    let rest = line
        .strip_prefix(prefix)
        .ok_or_else(|| CertifyError::Format(format!("expected `{prefix}`, got `{line}`")))?;
    Ok(rest
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect())
}

fn field<'a>(fields: &BTreeMap<&str, &'a str>, key: &str) -> Result<&'a str, CertifyError> {
    fields
        .get(key)
        .copied()
        .ok_or_else(|| CertifyError::Format(format!("header lacks `{key}`")))
}

fn number<T: std::str::FromStr>(
    fields: &BTreeMap<&str, &str>,
    key: &str,
) -> Result<T, CertifyError> {
    field(fields, key)?
        .parse()
        .map_err(|_| CertifyError::Format(format!("bad `{key}`")))
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty())
}

pub fn poly_certificate_text(cert: &PolyCertificate, params: GraphClassParams) -> String {
    let ds: Vec<String> = cert.discriminants().iter().map(u64::to_string).collect();
    let ds = if ds.is_empty() {
        "1".to_string()
    } else {
        ds.join(",")
    };
    let mut out = format!(
        "# sos certificate params={params} ell={} summands={} d={ds}\n",
        cert.ell(),
        cert.len()
    );
    for s in cert.summands() {
        out.push_str(&s.to_text());
        out.push('\n');
    }
    out
}

pub fn parse_poly_certificate(
    text: &str,
) -> Result<(GraphClassParams, PolyCertificate), CertifyError> {
    let mut lines = content_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| CertifyError::Format("empty file".into()))?;
    let fields = header_fields(header, "# sos certificate")?;
    let params: GraphClassParams = field(&fields, "params")?
        .parse()
        .map_err(|e| CertifyError::Format(format!("{e}")))?;
    let ell: u32 = number(&fields, "ell")?;
    let count: usize = number(&fields, "summands")?;
    let vars = Arc::new(VarTable::new(params));
    let summands: Vec<Polynomial<QuadExt>> = lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| Polynomial::parse(vars.clone(), l))
        .collect::<Result<_, _>>()?;
    if summands.len() != count {
        return Err(CertifyError::Format(format!(
            "header says {count} summands, found {}",
            summands.len()
        )));
    }
    Ok((params, PolyCertificate::new(summands, ell)?))
}

pub fn write_poly_certificate(
    path: &Path,
    cert: &PolyCertificate,
    params: GraphClassParams,
) -> Result<(), CertifyError> {
    std::fs::write(path, poly_certificate_text(cert, params))?;
    Ok(())
}

pub fn gram_certificate_text(cert: &GramCertificate, params: GraphClassParams) -> String {
    let mut out = format!("# gram certificate params={params} dim={}\n", cert.dim());
    for b in cert.basis() {
        out.push_str(&format!("basis {}\n", b.to_text()));
    }
    for row in cert.q() {
        let row: Vec<String> = row.iter().map(Rat::to_string).collect();
        out.push_str(&format!("row {}\n", row.join(" ")));
    }
    out
}

pub fn parse_gram_certificate(
    text: &str,
) -> Result<(GraphClassParams, GramCertificate), CertifyError> {
    let mut lines = content_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| CertifyError::Format("empty file".into()))?;
    let fields = header_fields(header, "# gram certificate")?;
    let params: GraphClassParams = field(&fields, "params")?
        .parse()
        .map_err(|e| CertifyError::Format(format!("{e}")))?;
    let dim: usize = number(&fields, "dim")?;
    let vars = Arc::new(VarTable::new(params));
    let mut basis = Vec::new();
    let mut q = Vec::new();
    for line in lines.filter(|l| !l.starts_with('#')) {
        if let Some(rest) = line.strip_prefix("basis ") {
            basis.push(Polynomial::parse(vars.clone(), rest)?);
        } else if let Some(rest) = line.strip_prefix("row") {
            q.push(
                rest.split_whitespace()
                    .map(str::parse)
                    .collect::<Result<Vec<Rat>, _>>()?,
            );
        } else {
            return Err(CertifyError::Format(format!("unexpected line `{line}`")));
        }
    }
    if basis.len() != dim || q.len() != dim {
        return Err(CertifyError::Format(format!(
            "dim={dim} but {} basis entries and {} rows",
            basis.len(),
            q.len()
        )));
    }
    Ok((params, GramCertificate::new(basis, q)?))
}

pub fn write_gram_certificate(
    path: &Path,
    cert: &GramCertificate,
    params: GraphClassParams,
) -> Result<(), CertifyError> {
    std::fs::write(path, gram_certificate_text(cert, params))?;
    Ok(())
}
