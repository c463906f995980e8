//! Text formats: probability vectors as JSON arrays or one-column CSV,
//! ensembles as JSON, `(x, f(x))` tables as two-column CSV.
//!
//! CSV readers skip blank lines and lines starting with `#`.

use crate::conversion::Ensemble;
use crate::majorization::{Normalization, ProbVec};
use crate::{Error, Result};

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn parse_num(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: `{}` is not a number", field.trim())))
}

/// Non-comment, non-blank lines with their 1-based line numbers.
pub fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Splits every data line on commas.
pub fn parse_csv_records(text: &str) -> Vec<Vec<String>> {
    data_lines(text)
        .map(|(_, l)| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect()
}

/// Reads a JSON array or a one-column CSV.
pub fn parse_probvec(text: &str, policy: Normalization) -> Result<ProbVec> {
    let trimmed = text.trim_start();
    let raw: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed)
            .map_err(|e| Error::Parse(format!("invalid JSON vector: {e}")))?
    } else {
        let mut out = Vec::new();
        for (line, l) in data_lines(text) {
            if l.contains(',') {
                return Err(Error::Parse(format!(
                    "line {line}: expected a single column"
                )));
            }
            out.push(parse_num(l, line)?);
        }
        out
    };
    ProbVec::new(&raw, policy)
}

pub fn probvec_to_json(p: &ProbVec) -> String {
    serde_json::to_string(p.entries()).expect("finite floats serialize")
}

pub fn probvec_to_csv(p: &ProbVec) -> String {
    p.entries().iter().map(|&v| fmt_num(v) + "\n").collect()
}

pub fn parse_ensemble_json(text: &str) -> Result<Ensemble> {
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("invalid ensemble: {e}")))
}

/// Two-column `(x, f(x))` CSV; a non-numeric first row is taken as a header.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (idx, (line, l)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Parse(format!(
                "line {line}: expected two columns, found {}",
                fields.len()
            )));
        }
        let parsed = (parse_num(fields[0], line), parse_num(fields[1], line));
        match parsed {
            (Ok(x), Ok(f)) => points.push((x, f)),
            _ if idx == 0 => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(Error::Parse("table has no data rows".into()));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            1e-300,
            123456789.125,
            0.0,
            -2.5e-8,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert!(fmt_num(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn probvec_formats() {
        let p = parse_probvec("[0.2, 0.5, 0.3]", Normalization::Strict).unwrap();
        assert_eq!(p.entries(), &[0.5, 0.3, 0.2]);
        let q = parse_probvec("# weights\n0.2\n\n0.5\n0.3\n", Normalization::Strict).unwrap();
        assert_eq!(p, q);
        assert_eq!(
            parse_probvec(&probvec_to_json(&p), Normalization::Strict).unwrap(),
            p
        );
        assert_eq!(
            parse_probvec(&probvec_to_csv(&p), Normalization::Strict).unwrap(),
            p
        );
    }

    #[test]
    fn probvec_errors_name_the_entry() {
        let e = parse_probvec("0.5\nabc\n", Normalization::Strict).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_probvec("[1.2, -0.2]", Normalization::Strict).unwrap_err();
        assert!(e.to_string().contains("entry 2"), "{e}");
        assert!(parse_probvec("0.5,0.5", Normalization::Strict).is_err());
        assert!(parse_probvec("[0.5, ", Normalization::Strict).is_err());
    }

    #[test]
    fn tables() {
        let t = parse_table_csv("x,f\n1,1\n2,0.5\n# note\n3, 0.25\n").unwrap();
        assert_eq!(t, vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.25)]);
        assert!(parse_table_csv("1,1\n2,x\n").is_err());
        assert!(parse_table_csv("1,1,1\n").is_err());
        assert!(parse_table_csv("x,f\n").is_err());
    }

    #[test]
    fn ensembles() {
        let e = parse_ensemble_json(r#"{"members":[{"weight":1.0,"state":[0.5,0.5]}]}"#).unwrap();
        assert_eq!(e.members().len(), 1);
        assert!(parse_ensemble_json(r#"{"members":[{"weight":0.5,"state":[1.0]}]}"#).is_err());
    }

    #[test]
    fn csv_records_skip_comments() {
        let r = parse_csv_records("# manifest {}\nn,d\n10,0.5\n");
        assert_eq!(r, vec![vec!["n", "d"], vec!["10", "0.5"]]);
    }
}
