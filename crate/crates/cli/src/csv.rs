//! Dense path export as `t,x,y,theta,u` rows.

use mdi_core::SampledPath;

pub const HEADER: &str = "t,x,y,theta,u";

/// Shortest decimal form of `v` rounded to `digits` significant digits.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, v);
        let trimmed = if fixed.contains('.') { fixed.trim_end_matches('0').trim_end_matches('.') } else { &fixed };
        if trimmed == "-0" {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    } else {
        let m = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{m}e{exp}")
    }
}

/// CSV text with LF line endings and 15 significant digits.
pub fn samples_to_csv(path: &SampledPath<f64>) -> String {
    let mut out = String::with_capacity(64 * (path.samples.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for s in &path.samples {
        let fields = [s.t, s.x, s.y, s.theta, s.u].map(|v| format_significant(v, 15));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
