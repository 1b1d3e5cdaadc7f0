//! Physical values with SI base-unit normalization.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Length,
    Time,
    Angle,
    Dimensionless,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Angle => "angle",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(name)
    }
}

/// A number plus its dimension, stored in SI base units (m, s, rad;
/// `percent` is normalized to a dimensionless fraction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalValue {
    pub magnitude: f64,
    pub dimension: Dimension,
}

impl PhysicalValue {
    pub fn new(magnitude: f64, dimension: Dimension) -> Self {
        debug_assert!(magnitude.is_finite());
        Self {
            magnitude,
            dimension,
        }
    }

    pub fn dimensionless(magnitude: f64) -> Self {
        Self::new(magnitude, Dimension::Dimensionless)
    }

    /// Construct from a raw magnitude and a unit suffix, converting to the
    /// SI base unit.
    pub fn from_unit(magnitude: f64, unit: &str) -> Option<Self> {
        let (factor, dimension) = match unit {
            "m" => (1.0, Dimension::Length),
            "cm" => (0.01, Dimension::Length),
            "s" => (1.0, Dimension::Time),
            "ms" => (0.001, Dimension::Time),
            "rad" => (1.0, Dimension::Angle),
            "deg" => (std::f64::consts::PI / 180.0, Dimension::Angle),
            "percent" => (0.01, Dimension::Dimensionless),
            _ => return None,
        };
        let value = magnitude * factor;
        if !value.is_finite() {
            return None;
        }
        Some(Self::new(value, dimension))
    }

    /// Magnitude expressed back in the given unit.
    pub fn in_unit(&self, unit: &str) -> Option<f64> {
        let probe = PhysicalValue::from_unit(1.0, unit)?;
        if probe.dimension != self.dimension {
            return None;
        }
        Some(self.magnitude / probe.magnitude)
    }

    /// Canonical unit suffix for pretty-printing.
    pub fn base_unit(&self) -> &'static str {
        match self.dimension {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Angle => "rad",
            Dimension::Dimensionless => "",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_to_base_units() {
        assert_eq!(PhysicalValue::from_unit(150.0, "cm").unwrap().magnitude, 1.5);
        assert_eq!(PhysicalValue::from_unit(250.0, "ms").unwrap().magnitude, 0.25);
        let deg = PhysicalValue::from_unit(180.0, "deg").unwrap();
        assert!((deg.magnitude - std::f64::consts::PI).abs() < 1e-12);
        let pct = PhysicalValue::from_unit(70.0, "percent").unwrap();
        assert_eq!(pct.dimension, Dimension::Dimensionless);
        assert!((pct.magnitude - 0.7).abs() < 1e-15);
    }

    #[test]
    fn unknown_unit_rejected() {
        assert!(PhysicalValue::from_unit(1.0, "furlong").is_none());
    }

    #[test]
    fn round_trip_within_tolerance() {
        for v in [0.001, 0.7, 42.0, 123456.789] {
            let back = PhysicalValue::from_unit(v, "deg").unwrap().in_unit("deg").unwrap();
            assert!((back - v).abs() / v < 1e-12);
            let back = PhysicalValue::from_unit(v, "cm").unwrap().in_unit("cm").unwrap();
            assert!((back - v).abs() / v < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_on_read_back() {
        let t = PhysicalValue::from_unit(60.0, "s").unwrap();
        assert!(t.in_unit("m").is_none());
    }
}
