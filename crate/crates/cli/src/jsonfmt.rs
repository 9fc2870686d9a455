//! JSON serialization with full-precision floats.
//!
//! Every float in every artifact is written with 17 significant decimal
//! digits (`1.2345678901234567e0`), which is always enough to reproduce the
//! exact 64-bit value on reload. Verification re-reads its own artifacts,
//! so the stored numbers must *be* the computed numbers, not a pretty
//! approximation of them; the residuals it recomputes would otherwise drift
//! by the rounding of the serializer rather than of the mathematics.
//!
//! The parse side matters just as much: the `float_roundtrip` feature of
//! the JSON library is enabled because its default float parser can land
//! one ULP off for extreme exponents, which would break the bit-exactness
//! promise on reload.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::Result;

/// Formats `value` with 17 significant digits, the round-trip-exact decimal
/// width for 64-bit floats. Also used for CSV cells.
pub fn sig17(value: f64) -> String {
    format!("{value:.16e}")
}

/// Compact JSON formatter whose floats round-trip exactly.
struct SigFigs;

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Pretty (indented) JSON formatter whose floats round-trip exactly.
/// Layout is delegated to the standard pretty-printer; only float
/// rendering differs.
struct SigFigsPretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SigFigsPretty<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }
}

/// Serializes to compact JSON with exact floats.
pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SigFigs);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

/// Serializes to indented JSON with exact floats.
pub fn to_string_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(
        &mut out,
        SigFigsPretty {
            inner: PrettyFormatter::new(),
        },
    );
    value.serialize(&mut ser)?;
    let mut text = String::from_utf8(out).expect("serializer emits UTF-8");
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trips(value: f64) {
        let json = to_string(&vec![value]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0].to_bits(), value.to_bits(), "{value} via {json}");
    }

    #[test]
    fn floats_survive_serialization_bit_for_bit() {
        for value in [
            0.0,
            -0.0,
            0.1,
            1.0 / 3.0,
            -std::f64::consts::E,
            1e-300,
            f64::MAX,
            f64::MIN_POSITIVE,
            5e-324, // smallest subnormal
            1.0 + f64::EPSILON,
        ] {
            round_trips(value);
        }
    }

    #[test]
    fn pretty_and_compact_agree_on_content() {
        #[derive(Serialize)]
        struct Sample {
            name: &'static str,
            values: Vec<f64>,
            count: u32,
        }
        let sample = Sample {
            name: "probe",
            values: vec![0.1, -3.25, 1e-12],
            count: 7,
        };
        let compact: serde_json::Value =
            serde_json::from_str(&to_string(&sample).unwrap()).unwrap();
        let pretty: serde_json::Value =
            serde_json::from_str(&to_string_pretty(&sample).unwrap()).unwrap();
        assert_eq!(compact, pretty);
    }

    #[test]
    fn serialized_floats_use_scientific_notation() {
        let json = to_string(&vec![0.5]).unwrap();
        assert_eq!(json, "[5.0000000000000000e-1]");
    }
}
