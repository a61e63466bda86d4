//! Sensor identifiers of the form `<space>-<zone>-<CODE><index>`, e.g. `1-15-TMP1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// First component of a sensor id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Space {
    Outside = 0,
    House = 1,
}

/// Sensor function code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorCode {
    Tmp,
    Amb,
    Ltc,
    Fan,
    Htc,
    Htv,
    Pir,
    Epir,
    Opc,
    Rain,
    Hygr,
}

/// What a sensor reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Numeric,
    Boolean,
}

impl SensorCode {
    pub const ALL: [SensorCode; 11] = [
        SensorCode::Tmp,
        SensorCode::Amb,
        SensorCode::Ltc,
        SensorCode::Fan,
        SensorCode::Htc,
        SensorCode::Htv,
        SensorCode::Pir,
        SensorCode::Epir,
        SensorCode::Opc,
        SensorCode::Rain,
        SensorCode::Hygr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorCode::Tmp => "TMP",
            SensorCode::Amb => "AMB",
            SensorCode::Ltc => "LTC",
            SensorCode::Fan => "FAN",
            SensorCode::Htc => "HTC",
            SensorCode::Htv => "HTV",
            SensorCode::Pir => "PIR",
            SensorCode::Epir => "EPIR",
            SensorCode::Opc => "OPC",
            SensorCode::Rain => "RAIN",
            SensorCode::Hygr => "HYGR",
        }
    }

    /// Temperature and humidity are numeric; every other code is an on/off signal.
    pub fn value_kind(self) -> ValueKind {
        match self {
            SensorCode::Tmp | SensorCode::Hygr => ValueKind::Numeric,
            _ => ValueKind::Boolean,
        }
    }

    fn from_token(token: &str) -> Option<Self> {
        let upper = token.to_ascii_uppercase();
        Self::ALL.into_iter().find(|c| c.as_str() == upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SensorId {
    pub space: Space,
    pub zone: u32,
    pub code: SensorCode,
    pub index: u32,
}

impl SensorId {
    pub fn new(space: Space, zone: u32, code: SensorCode, index: u32) -> Self {
        Self {
            space,
            zone,
            code,
            index,
        }
    }

    pub fn value_kind(&self) -> ValueKind {
        self.code.value_kind()
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}{}",
            self.space as u8,
            self.zone,
            self.code.as_str(),
            self.index
        )
    }
}

/// Parse a sensor identifier. Surrounding whitespace is ignored and the code is
/// case-insensitive; the canonical rendering uses upper-case codes and no
/// leading zeros.
pub fn parse_sensor_id(text: &str) -> Result<SensorId, Error> {
    let err = |token: &str, reason: &'static str| Error::SensorId {
        text: text.to_string(),
        token: token.to_string(),
        reason,
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(err("", "empty identifier"));
    }
    let mut parts = trimmed.split('-');
    let (Some(space_tok), Some(zone_tok), Some(tail), None) =
        (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(err(trimmed, "expected <space>-<zone>-<CODE><index>"));
    };

    let space = match space_tok {
        "0" => Space::Outside,
        "1" => Space::House,
        _ => return Err(err(space_tok, "space digit must be 0 or 1")),
    };

    if zone_tok.is_empty() || !zone_tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(zone_tok, "zone must be a non-negative integer"));
    }
    let zone: u32 = zone_tok
        .parse()
        .map_err(|_| err(zone_tok, "zone out of range"))?;

    let split_at = tail
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| err(tail, "missing sensor index"))?;
    let (code_tok, index_tok) = tail.split_at(split_at);
    if code_tok.is_empty() || !code_tok.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(err(code_tok, "malformed sensor code"));
    }
    let code = SensorCode::from_token(code_tok).ok_or_else(|| err(code_tok, "unknown sensor code"))?;
    if !index_tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(index_tok, "sensor index must be a positive integer"));
    }
    let index: u32 = index_tok
        .parse()
        .map_err(|_| err(index_tok, "sensor index out of range"))?;
    if index == 0 {
        return Err(err(index_tok, "sensor index must be a positive integer"));
    }

    Ok(SensorId::new(space, zone, code, index))
}

impl FromStr for SensorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sensor_id(s)
    }
}

/// The 54-sensor layout of the reference house, zone by zone.
pub const REFERENCE_LAYOUT: [&str; 54] = [
    "0-1-AMB1", "0-1-EPIR1", "0-1-HYGR1", "0-1-LTC1", "0-1-RAIN2", "0-1-TMP1",
    "0-2-AMB1", "0-2-HYGR1", "0-2-TMP1",
    "1-1-HTV1", "1-1-HTV3",
    "1-3-AMB1", "1-3-HTC1", "1-3-HYGR1", "1-3-LTC1", "1-3-OPC1", "1-3-PIR1",
    "1-7-AMB1", "1-7-OPC1", "1-7-PIR1", "1-7-TMP1",
    "1-8-AMB1", "1-8-HTC1", "1-8-OPC1", "1-8-PIR1", "1-8-TMP1",
    "1-9-AMB1", "1-9-HTC1", "1-9-HYGR1", "1-9-LTC1", "1-9-OPC1", "1-9-PIR1",
    "1-12-AMB1", "1-12-HTC1", "1-12-HYGR1", "1-12-LTC1",
    "1-13-AMB1", "1-13-HTV1", "1-13-HTV4", "1-13-LTC1", "1-13-OPC1", "1-13-PIR1",
    "1-14-AMB1", "1-14-FAN1", "1-14-HTC1", "1-14-HYGR1", "1-14-OPC1", "1-14-PIR1", "1-14-TMP1",
    "1-15-AMB1", "1-15-LTC1", "1-15-OPC1", "1-15-PIR1", "1-15-TMP1",
];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_bedroom_temperature() {
        let id = parse_sensor_id("1-15-TMP1").unwrap();
        assert_eq!(id, SensorId::new(Space::House, 15, SensorCode::Tmp, 1));
        assert_eq!(id.value_kind(), ValueKind::Numeric);
    }

    #[test]
    fn parses_outside_rain() {
        let id = parse_sensor_id("0-1-RAIN2").unwrap();
        assert_eq!(id, SensorId::new(Space::Outside, 1, SensorCode::Rain, 2));
        assert_eq!(id.value_kind(), ValueKind::Boolean);
    }

    #[test]
    fn rejects_unknown_space() {
        let err = parse_sensor_id("2-1-TMP1").unwrap_err();
        assert!(err.to_string().contains("\"2\""), "{err}");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "1-15", "1-15-TMP", "1-15-TMP0", "1-x-TMP1", "1-15-XYZ1", "1-15-TMP1-2", "1-15-TMP1a"] {
            assert!(parse_sensor_id(bad).is_err(), "{bad} should fail");
        }
        let err = parse_sensor_id("1-15-XYZ1").unwrap_err();
        assert!(err.to_string().contains("XYZ"));
    }

    #[test]
    fn normalizes_case_and_zeros() {
        let id = parse_sensor_id(" 1-015-tmp01 ").unwrap();
        assert_eq!(id.to_string(), "1-15-TMP1");
    }

    #[test]
    fn reference_layout_is_valid_and_unique() {
        let mut seen = std::collections::HashSet::new();
        for s in REFERENCE_LAYOUT {
            let id = parse_sensor_id(s).unwrap();
            assert_eq!(id.to_string(), s);
            assert!(seen.insert(id));
        }
    }

    fn any_code() -> impl Strategy<Value = SensorCode> {
        prop::sample::select(SensorCode::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(space in 0u8..2, zone in 0u32..10_000, code in any_code(), index in 1u32..10_000) {
            let space = if space == 0 { Space::Outside } else { Space::House };
            let id = SensorId::new(space, zone, code, index);
            let text = id.to_string();
            prop_assert_eq!(parse_sensor_id(&text).unwrap(), id);
        }
    }
}
