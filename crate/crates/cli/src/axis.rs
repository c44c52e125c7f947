//! Numeric sweep-axis parsing: a single value, a comma list, or an
//! inclusive `start:step:end` range.

/// Parses an axis expression. `"16"` is one point, `"0,4,8"` an explicit
/// list, and `"0:2:20"` the inclusive arithmetic progression 0, 2, ..., 20
/// (end is included up to a small floating-point tolerance).
pub fn parse_axis(expr: &str) -> Result<Vec<f64>, String> {
    let expr = expr.trim();
    if expr.is_empty() {
        return Err("empty axis expression".into());
    }
    let values = if expr.contains(':') {
        let parts: Vec<&str> = expr.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{expr}` must be start:step:end"));
        }
        let start = parse_value(parts[0])?;
        let step = parse_value(parts[1])?;
        let end = parse_value(parts[2])?;
        if step <= 0.0 {
            return Err(format!("range step must be positive, got {step}"));
        }
        if end < start {
            return Err(format!("range end {end} is below start {start}"));
        }
        let count = ((end - start) / step + 1.0 + 1e-9).floor() as usize;
        (0..count).map(|i| start + step * i as f64).collect()
    } else {
        expr.split(',')
            .map(parse_value)
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(format!("axis `{expr}` produced no points"));
    }
    Ok(values)
}

fn parse_value(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("axis value {v} is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_list() {
        assert_eq!(parse_axis("16").unwrap(), vec![16.0]);
        assert_eq!(parse_axis("0, 4,8").unwrap(), vec![0.0, 4.0, 8.0]);
        assert_eq!(parse_axis("-3").unwrap(), vec![-3.0]);
    }

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(
            parse_axis("0:4:20").unwrap(),
            vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0]
        );
        // fractional steps still land on the end point
        let p = parse_axis("0.1:0.1:0.9").unwrap();
        assert_eq!(p.len(), 9);
        assert!((p[8] - 0.9).abs() < 1e-12);
        assert_eq!(parse_axis("5:1:5").unwrap(), vec![5.0]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_axis("").is_err());
        assert!(parse_axis("a,b").is_err());
        assert!(parse_axis("0:0:10").is_err());
        assert!(parse_axis("0:-1:10").is_err());
        assert!(parse_axis("10:1:0").is_err());
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("1:2:3:4").is_err());
    }
}
