//! Unit-suffixed scalar parsing.
//!
//! Every quantity read from a text file carries an explicit unit and is
//! converted to SI on the way in. Angular frequencies are written either as
//! `rad/s` or as an ordinary frequency with the `_x2pi` marker, e.g.
//! `60 kHz_x2pi` is 2π × 60 kHz expressed in rad/s. A bare `kHz` on an
//! angular quantity is rejected.

use std::f64::consts::PI;

/// Physical dimension expected for a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Time,
    /// Ordinary frequency in Hz.
    Frequency,
    /// Angular frequency in rad/s.
    AngularFrequency,
    /// Speed in m/s.
    Speed,
    /// Angle in radians.
    Angle,
}

/// A unit-parsing failure, reported with the byte offset of the offending
/// token inside the value string.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitError {
    pub offset: usize,
    pub message: String,
}

fn err(offset: usize, message: impl Into<String>) -> UnitError {
    UnitError {
        offset,
        message: message.into(),
    }
}

fn frequency_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        "THz" => 1e12,
        _ => return None,
    })
}

/// Scale factor that converts `unit` into SI for the given dimension.
pub fn unit_scale(unit: &str, dim: Dimension) -> Option<f64> {
    match dim {
        Dimension::Dimensionless => (unit.is_empty()).then_some(1.0),
        Dimension::Length => Some(match unit {
            "m" => 1.0,
            "cm" => 1e-2,
            "mm" => 1e-3,
            "um" | "µm" => 1e-6,
            "nm" => 1e-9,
            _ => return None,
        }),
        Dimension::Time => time_scale(unit),
        Dimension::Frequency => frequency_scale(unit),
        Dimension::AngularFrequency => {
            if unit == "rad/s" {
                Some(1.0)
            } else {
                let base = unit.strip_suffix("_x2pi")?;
                frequency_scale(base).map(|s| 2.0 * PI * s)
            }
        }
        Dimension::Speed => (unit == "m/s").then_some(1.0),
        Dimension::Angle => Some(match unit {
            "rad" => 1.0,
            "mrad" => 1e-3,
            "deg" => PI / 180.0,
            _ => return None,
        }),
    }
}

pub(crate) fn time_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        _ => return None,
    })
}

/// Splits `"1.5us"` or `"1.5 us"` into the numeric and unit parts.
pub(crate) fn split_number(text: &str) -> (&str, &str) {
    let end = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E') && exponent_follows(&text[i..])))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    (&text[..end], text[end..].trim_start())
}

fn exponent_follows(rest: &str) -> bool {
    let mut chars = rest.chars().skip(1);
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Parses a unit-suffixed scalar into SI units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let trimmed = text.trim();
    let lead = text.len() - text.trim_start().len();
    let (num, unit) = split_number(trimmed);
    if num.is_empty() {
        return Err(err(lead, format!("expected a number, found `{trimmed}`")));
    }
    let value: f64 = num
        .parse()
        .map_err(|_| err(lead, format!("invalid number `{num}`")))?;
    let unit_offset = lead + trimmed.len() - unit.len();
    let scale = unit_scale(unit, dim).ok_or_else(|| {
        if unit.is_empty() {
            err(unit_offset, format!("missing unit for {dim:?} value"))
        } else if dim == Dimension::AngularFrequency && frequency_scale(unit).is_some() {
            err(
                unit_offset,
                format!(
                    "ambiguous angular frequency unit `{unit}`; write `{unit}_x2pi` or `rad/s`"
                ),
            )
        } else {
            err(
                unit_offset,
                format!("unknown unit `{unit}` for {dim:?} value"),
            )
        }
    })?;
    let si = value * scale;
    if !si.is_finite() {
        return Err(err(lead, "value is not finite"));
    }
    Ok(si)
}
