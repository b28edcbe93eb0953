//! Exact decimal formatting of count ratios.
//!
//! Averages and percentages are rounded half-up (away from zero) on the exact
//! rational value, never on a binary float, so `814 / 14` prints `58.14` and
//! `81 / 125 · 100` prints `64.80` on every platform.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatioError {
    #[error("ratio with zero denominator")]
    ZeroDenominator,
    #[error("part {part} exceeds whole {whole}")]
    PartExceedsWhole { part: u64, whole: u64 },
}

/// Formats `num / den` with `decimals` fractional digits.
pub fn format_ratio(num: i128, den: i128, decimals: u32) -> Result<String, RatioError> {
    if den == 0 {
        return Err(RatioError::ZeroDenominator);
    }
    let negative = (num < 0) != (den < 0) && num != 0;
    let (num, den) = (num.unsigned_abs(), den.unsigned_abs());
    let scale = 10u128.pow(decimals);
    let scaled = num * scale;
    let mut q = scaled / den;
    if 2 * (scaled % den) >= den {
        q += 1;
    }
    let int = q / scale;
    let frac = q % scale;
    let sign = if negative && q != 0 { "-" } else { "" };
    Ok(if decimals == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac:0width$}", width = decimals as usize)
    })
}

/// `part / whole` as a percentage with two decimals, e.g. `"92.06%"`.
pub fn format_percentage(part: u64, whole: u64) -> Result<String, RatioError> {
    if whole == 0 {
        return Err(RatioError::ZeroDenominator);
    }
    if part > whole {
        return Err(RatioError::PartExceedsWhole { part, whole });
    }
    Ok(format!("{}%", format_ratio(part as i128 * 100, whole as i128, 2)?))
}

/// Relative change from `from` to `to` as a signed percentage.
pub fn format_growth(from: u64, to: u64) -> Result<String, RatioError> {
    let delta = to as i128 - from as i128;
    Ok(format!("{}%", format_ratio(delta * 100, from as i128, 2)?))
}

/// `total / years` with two decimals, e.g. `"58.14"`.
pub fn format_average(total: u64, years: u64) -> Result<String, RatioError> {
    format_ratio(total as i128, years as i128, 2)
}
