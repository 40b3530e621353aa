use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// 8-bit RGBA color, written as `#rrggbbaa` (or `#rrggbb`, opaque).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgba(pub [u8; 4]);

#[derive(Debug, Error, PartialEq)]
#[error("invalid color `{0}`: expected #rrggbb or #rrggbbaa")]
pub struct ColorParseError(pub String);

impl Rgba {
    pub const BLACK: Rgba = Rgba([0, 0, 0, 255]);
    pub const WHITE: Rgba = Rgba([255, 255, 255, 255]);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Rgba([r, g, b, 255])
    }

    pub const fn rgba(r: u8, g: u8, b: u8, a: u8) -> Self {
        Rgba([r, g, b, a])
    }

    pub fn alpha(self) -> u8 {
        self.0[3]
    }

    pub fn rgb_bytes(self) -> [u8; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    /// Source-over blend onto an opaque pixel, in integer arithmetic.
    pub fn blend_over(self, dst: [u8; 3]) -> [u8; 3] {
        let a = self.0[3] as u32;
        std::array::from_fn(|k| ((self.0[k] as u32 * a + dst[k] as u32 * (255 - a) + 127) / 255) as u8)
    }
}

impl fmt::Display for Rgba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b, a] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}{a:02x}")
    }
}

impl FromStr for Rgba {
    type Err = ColorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ColorParseError(s.to_string());
        let hex = s.strip_prefix('#').ok_or_else(err)?;
        if !(hex.len() == 6 || hex.len() == 8) || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        let byte = |k: usize| u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|_| err());
        let a = if hex.len() == 8 { byte(3)? } else { 255 };
        Ok(Rgba([byte(0)?, byte(1)?, byte(2)?, a]))
    }
}

impl Serialize for Rgba {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgba {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
