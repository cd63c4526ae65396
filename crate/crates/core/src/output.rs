//! Text emitters shared by the CSV writers and the CLI.

use serde::Serializer;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// CSV with a header row; every value printed with [`format_float`].
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().map(format_float).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `serialize_with` helper writing an `f64` as a JSON number with 17 significant
/// digits (non-finite values become `null`).
pub fn json_float<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    if !x.is_finite() {
        return serializer.serialize_none();
    }
    let n: serde_json::Number = format_float(*x)
        .parse()
        .map_err(serde::ser::Error::custom)?;
    n.serialize(serializer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits: String = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn json_number_keeps_format() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "json_float")]
            v: f64,
        }
        let s = serde_json::to_string(&T { v: 0.5 }).unwrap();
        assert_eq!(s, r#"{"v":5.0000000000000000e-1}"#);
        let s = serde_json::to_string(&T { v: f64::NAN }).unwrap();
        assert_eq!(s, r#"{"v":null}"#);
    }
}
