//! Datum file format: a single JSON document listing source dimensions,
//! targets with exponents, and arrows with rational matrices. Rationals are
//! written as strings ("3/4", "2", "0.75", or "inf" for exponents) and
//! converted exactly; vertex indices are 1-based in files and 0-based in
//! memory. Serialization is canonical: fixed key order, reduced fractions,
//! newline-terminated, so equal data produce byte-identical files.

use num::{One, Zero};
use serde_json::Value;

use crate::conditions::SubspaceFamily;
use crate::datum::{exponent_to_string, QuiverDatum};
use crate::error::{Error, Result};
use crate::numerics::exact::{parse_rational, rational_to_string, Rat, RatMatrix, Subspace};

/// Parses a datum document. Syntax errors carry line/column from the JSON
/// parser; semantic errors carry the offending field path.
pub fn parse_datum(text: &str) -> Result<QuiverDatum> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::parse("$", "top level must be an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "sources" | "targets" | "arrows") {
            return Err(Error::parse(key.clone(), "unknown field"));
        }
    }

    let sources_val = obj
        .get("sources")
        .ok_or_else(|| Error::parse("sources", "missing field"))?;
    let sources = sources_val
        .as_array()
        .ok_or_else(|| Error::parse("sources", "must be an array of integers"))?;
    let mut source_dims = Vec::with_capacity(sources.len());
    for (i, v) in sources.iter().enumerate() {
        let d = v
            .as_u64()
            .ok_or_else(|| Error::parse(format!("sources[{}]", i + 1), "must be a nonnegative integer"))?;
        source_dims.push(d as usize);
    }

    let targets_val = obj
        .get("targets")
        .ok_or_else(|| Error::parse("targets", "missing field"))?;
    let targets = targets_val
        .as_array()
        .ok_or_else(|| Error::parse("targets", "must be an array of objects"))?;
    let mut target_dims = Vec::with_capacity(targets.len());
    let mut inv_exponents = Vec::with_capacity(targets.len());
    for (j, t) in targets.iter().enumerate() {
        let loc = format!("targets[{}]", j + 1);
        let tobj = t
            .as_object()
            .ok_or_else(|| Error::parse(loc.clone(), "must be an object with fields dim, p"))?;
        for key in tobj.keys() {
            if !matches!(key.as_str(), "dim" | "p") {
                return Err(Error::parse(format!("{loc}.{key}"), "unknown field"));
            }
        }
        let dim = tobj
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(format!("{loc}.dim"), "must be a nonnegative integer"))?;
        let p_val = tobj
            .get("p")
            .ok_or_else(|| Error::parse(format!("{loc}.p"), "missing field"))?;
        let p_str = p_val
            .as_str()
            .ok_or_else(|| Error::parse(format!("{loc}.p"), "must be a string (\"a/b\", decimal, or \"inf\")"))?;
        let w = parse_exponent(p_str)
            .map_err(|e| Error::parse(format!("{loc}.p"), e.to_string()))?;
        target_dims.push(dim as usize);
        inv_exponents.push(w);
    }

    let arrows_val = obj
        .get("arrows")
        .ok_or_else(|| Error::parse("arrows", "missing field"))?;
    let arrows_arr = arrows_val
        .as_array()
        .ok_or_else(|| Error::parse("arrows", "must be an array of objects"))?;
    let mut arrows = Vec::with_capacity(arrows_arr.len());
    for (k, a) in arrows_arr.iter().enumerate() {
        let loc = format!("arrows[{}]", k + 1);
        let aobj = a
            .as_object()
            .ok_or_else(|| Error::parse(loc.clone(), "must be an object with fields source, target, matrix"))?;
        for key in aobj.keys() {
            if !matches!(key.as_str(), "source" | "target" | "matrix") {
                return Err(Error::parse(format!("{loc}.{key}"), "unknown field"));
            }
        }
        let source = aobj
            .get("source")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(format!("{loc}.source"), "must be a positive integer (1-based)"))?;
        let target = aobj
            .get("target")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(format!("{loc}.target"), "must be a positive integer (1-based)"))?;
        if source == 0 {
            return Err(Error::parse(format!("{loc}.source"), "vertex indices are 1-based"));
        }
        if target == 0 {
            return Err(Error::parse(format!("{loc}.target"), "vertex indices are 1-based"));
        }
        let matrix_val = aobj
            .get("matrix")
            .ok_or_else(|| Error::parse(format!("{loc}.matrix"), "missing field"))?;
        let matrix = parse_matrix(matrix_val, &format!("{loc}.matrix"))?;
        arrows.push((source as usize - 1, target as usize - 1, matrix));
    }

    Ok(QuiverDatum::new(source_dims, target_dims, arrows, inv_exponents))
}

fn parse_exponent(s: &str) -> Result<Rat> {
    let trimmed = s.trim();
    if trimmed.eq_ignore_ascii_case("inf") || trimmed.eq_ignore_ascii_case("infinity") {
        return Ok(Rat::zero());
    }
    let p = parse_rational(trimmed)?;
    if p.is_zero() {
        return Err(Error::param("exponent p must be nonzero".to_string()));
    }
    Ok(Rat::one() / p)
}

fn parse_matrix(v: &Value, loc: &str) -> Result<RatMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::parse(loc.to_string(), "must be an array of rows"))?;
    let mut parsed_rows: Vec<Vec<Rat>> = Vec::with_capacity(rows.len());
    let mut width: Option<usize> = None;
    for (r, row_val) in rows.iter().enumerate() {
        let row = row_val
            .as_array()
            .ok_or_else(|| Error::parse(format!("{loc}[{}]", r + 1), "must be an array of rational strings"))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::parse(
                    format!("{loc}[{}]", r + 1),
                    format!("row has {} entries, expected {}", row.len(), w),
                ));
            }
            _ => {}
        }
        let mut parsed = Vec::with_capacity(row.len());
        for (c, entry) in row.iter().enumerate() {
            let s = entry.as_str().ok_or_else(|| {
                Error::parse(
                    format!("{loc}[{}][{}]", r + 1, c + 1),
                    "non-numeric entry: matrix entries are rational strings",
                )
            })?;
            let value = parse_rational(s)
                .map_err(|e| Error::parse(format!("{loc}[{}][{}]", r + 1, c + 1), e.to_string()))?;
            parsed.push(value);
        }
        parsed_rows.push(parsed);
    }
    if parsed_rows.is_empty() {
        return Err(Error::parse(loc.to_string(), "matrix must have at least one row"));
    }
    Ok(RatMatrix::from_rows(&parsed_rows))
}

/// Canonical serialization; `parse_datum(serialize_datum(d)) == d`.
pub fn serialize_datum(d: &QuiverDatum) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let dims: Vec<String> = d.source_dims().iter().map(usize::to_string).collect();
    out.push_str(&format!("  \"sources\": [{}],\n", dims.join(", ")));
    out.push_str("  \"targets\": [\n");
    for j in 0..d.num_targets() {
        out.push_str(&format!(
            "    {{\"dim\": {}, \"p\": \"{}\"}}{}\n",
            d.target_dim(j),
            exponent_to_string(d.inv_exponent(j)),
            if j + 1 < d.num_targets() { "," } else { "" }
        ));
    }
    out.push_str("  ],\n");
    out.push_str("  \"arrows\": [\n");
    let arrows = d.arrows();
    for (k, a) in arrows.iter().enumerate() {
        let rows: Vec<String> = (0..a.matrix.rows())
            .map(|r| {
                let entries: Vec<String> = a
                    .matrix
                    .row_vec(r)
                    .iter()
                    .map(|x| format!("\"{}\"", rational_to_string(x)))
                    .collect();
                format!("[{}]", entries.join(", "))
            })
            .collect();
        out.push_str(&format!(
            "    {{\"source\": {}, \"target\": {}, \"matrix\": [{}]}}{}\n",
            a.source + 1,
            a.target + 1,
            rows.join(", "),
            if k + 1 < arrows.len() { "," } else { "" }
        ));
    }
    out.push_str("  ]\n");
    out.push_str("}\n");
    out
}

pub fn read_datum_file(path: &std::path::Path) -> Result<QuiverDatum> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    parse_datum(&text)
}

/// Parses a subspace-family file: one subspace per source, each given by its
/// ambient dimension and a basis matrix whose columns are the basis vectors
/// (same matrix syntax as arrow matrices; `[]` is the zero subspace).
pub fn parse_witness(text: &str) -> Result<SubspaceFamily> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::parse("$", "top level must be an object"))?;
    for key in obj.keys() {
        if key != "subspaces" {
            return Err(Error::parse(key.clone(), "unknown field"));
        }
    }
    let list = obj
        .get("subspaces")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("subspaces", "must be an array of objects"))?;
    let mut subspaces = Vec::with_capacity(list.len());
    for (i, s) in list.iter().enumerate() {
        let loc = format!("subspaces[{}]", i + 1);
        let sobj = s
            .as_object()
            .ok_or_else(|| Error::parse(loc.clone(), "must be an object with fields ambient, basis"))?;
        for key in sobj.keys() {
            if !matches!(key.as_str(), "ambient" | "basis") {
                return Err(Error::parse(format!("{loc}.{key}"), "unknown field"));
            }
        }
        let ambient = sobj
            .get("ambient")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(format!("{loc}.ambient"), "must be a nonnegative integer"))?
            as usize;
        let basis_val = sobj
            .get("basis")
            .ok_or_else(|| Error::parse(format!("{loc}.basis"), "missing field"))?;
        let empty = basis_val.as_array().is_some_and(Vec::is_empty);
        if empty {
            subspaces.push(Subspace::zero(ambient));
            continue;
        }
        let m = parse_matrix(basis_val, &format!("{loc}.basis"))?;
        if m.rows() != ambient {
            return Err(Error::parse(
                format!("{loc}.basis"),
                format!("has {} rows, ambient dimension is {ambient}", m.rows()),
            ));
        }
        subspaces.push(Subspace::from_matrix_columns(&m));
    }
    Ok(SubspaceFamily { subspaces })
}

/// Canonical serialization; round-trips through `parse_witness` up to basis
/// choice (the parsed family carries the reduced canonical basis).
pub fn serialize_witness(family: &SubspaceFamily) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str("  \"subspaces\": [\n");
    for (i, v) in family.subspaces.iter().enumerate() {
        let basis = v.basis();
        let rows: Vec<String> = (0..basis.rows())
            .map(|r| {
                let entries: Vec<String> = basis
                    .row_vec(r)
                    .iter()
                    .map(|x| format!("\"{}\"", rational_to_string(x)))
                    .collect();
                format!("[{}]", entries.join(", "))
            })
            .collect();
        let rendered = if v.dim() == 0 { String::new() } else { rows.join(", ") };
        out.push_str(&format!(
            "    {{\"ambient\": {}, \"basis\": [{}]}}{}\n",
            v.ambient(),
            rendered,
            if i + 1 < family.subspaces.len() { "," } else { "" }
        ));
    }
    out.push_str("  ]\n");
    out.push_str("}\n");
    out
}

pub fn read_witness_file(path: &std::path::Path) -> Result<SubspaceFamily> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    parse_witness(&text)
}
