//! Fixed-precision number formatting and CSV assembly.

/// Significant digits in every CSV number.
pub const SIG_DIGITS: usize = 12;

/// `%.12g`: shortest of fixed or exponent notation, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.18000000000000022, "0.18"),
            (1.0000000000000002, "1"),
            (0.620437956204379, "0.620437956204"),
            (1.0 / 3.0, "0.333333333333"),
            (123456.0, "123456"),
            (1.5e-7, "1.5e-07"),
            (2.5e13, "2.5e+13"),
            (-0.25, "-0.25"),
            (0.0001, "0.0001"),
            (0.0000679571980365, "6.79571980365e-05"),
            (999999999999.5, "1e+12"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g(x), s, "{x}");
        }
        assert_eq!(fmt_g(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_and_terminates() {
        let mut t = Table::new(vec!["a", "error"]);
        t.rows.push(vec!["1".into(), "bad, really".into()]);
        assert_eq!(t.to_csv(), "a,error\n1,\"bad, really\"\n");
        assert_eq!(Table::new(vec!["n"]).to_csv(), "n\n");
    }
}
