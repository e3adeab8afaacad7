//! Line-oriented protocol files.
//!
//! ```text
//! # comment
//! family=cascade
//! sign=plus
//! cutoff=4
//! tolerance=1e-10
//!
//! prepare_cavity sign=+
//! ramsey atom=A1 named=R1
//! dispersive atom=A1 phi=pi
//! ramsey atom=A2 theta=pi/2 chi=-pi/4
//! resonant atom=A3 gt=pi/2
//! detect atom=A1
//! ```
//!
//! Header lines are bare `key=value` pairs and must precede every step.
//! `family` and `sign` are required. Angles accept `pi`, `-pi`, `pi/N`,
//! `-pi/N` and plain decimals.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use cavity_ghz::dynamics::RamseyParams;
use cavity_ghz::protocol::{PROBE, SOURCE};
use cavity_ghz::{AtomFamily, NamedRotation, ProtocolStep64, Rotation, Sign};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

const ATOMS: [&str; 4] = [SOURCE, "A1", "A2", PROBE];

/// A parsed protocol: header plus steps, each tagged with its source line.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolFile {
    pub family: AtomFamily,
    pub sign: Sign,
    pub cutoff: Option<usize>,
    pub tolerance: Option<f64>,
    pub steps: Vec<(usize, ProtocolStep64)>,
}

impl ProtocolFile {
    pub fn step_list(&self) -> Vec<ProtocolStep64> {
        self.steps.iter().map(|(_, s)| s.clone()).collect()
    }

    /// Source line of step `index`.
    pub fn line_of(&self, index: usize) -> usize {
        self.steps.get(index).or(self.steps.last()).map_or(1, |(l, _)| *l)
    }
}

pub fn parse_angle(text: &str) -> Option<f64> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = if body == "pi" {
        PI
    } else if let Some(denominator) = body.strip_prefix("pi/") {
        let n: u32 = denominator.parse().ok().filter(|&n| n > 0)?;
        PI / n as f64
    } else {
        let v: f64 = text.parse().ok()?;
        return v.is_finite().then_some(v);
    };
    Some(if negative { -value } else { value })
}

/// Writes exact `±π/N` values as literals and everything else as the
/// shortest decimal that parses back to the same `f64`.
pub fn format_angle(value: f64) -> String {
    for n in 1..=64u32 {
        let candidate = PI / n as f64;
        let sign = if value == candidate {
            ""
        } else if value == -candidate {
            "-"
        } else {
            continue;
        };
        return if n == 1 { format!("{sign}pi") } else { format!("{sign}pi/{n}") };
    }
    format!("{value:?}")
}

fn parse_sign_symbol(text: &str) -> Option<Sign> {
    match text {
        "+" => Some(Sign::Plus),
        "-" => Some(Sign::Minus),
        _ => None,
    }
}

fn sign_word(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn split_pair(token: &str) -> Option<(&str, &str)> {
    let (k, v) = token.split_once('=')?;
    (!k.is_empty() && !v.is_empty()).then_some((k, v))
}

struct Fields<'a> {
    line: usize,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Fields<'a> {
    fn new(line: usize, tokens: &[&'a str]) -> Result<Self, ParseError> {
        let mut map = BTreeMap::new();
        for t in tokens {
            let (k, v) = split_pair(t).ok_or_else(|| err(line, format!("expected key=value, found `{t}`")))?;
            if map.insert(k, v).is_some() {
                return Err(err(line, format!("duplicate key `{k}`")));
            }
        }
        Ok(Self { line, map })
    }

    fn take(&mut self, key: &str) -> Result<&'a str, ParseError> {
        self.map.remove(key).ok_or_else(|| err(self.line, format!("missing `{key}=`")))
    }

    fn angle(&mut self, key: &str) -> Result<f64, ParseError> {
        let text = self.take(key)?;
        parse_angle(text).ok_or_else(|| err(self.line, format!("`{text}` is not a number or pi literal")))
    }

    fn atom(&mut self) -> Result<String, ParseError> {
        let name = self.take("atom")?;
        if !ATOMS.contains(&name) {
            return Err(err(self.line, format!("unknown atom `{name}`")));
        }
        Ok(name.to_string())
    }

    fn finish(self) -> Result<(), ParseError> {
        match self.map.keys().next() {
            Some(k) => Err(err(self.line, format!("unexpected key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn parse_step(line: usize, keyword: &str, tokens: &[&str]) -> Result<ProtocolStep64, ParseError> {
    let mut f = Fields::new(line, tokens)?;
    let step = match keyword {
        "prepare_cavity" => {
            let text = f.take("sign")?;
            let sign = parse_sign_symbol(text).ok_or_else(|| err(line, format!("sign must be + or -, found `{text}`")))?;
            ProtocolStep64::PrepareCavity { sign }
        }
        "ramsey" => {
            let atom = f.atom()?;
            let rotation = if f.map.contains_key("named") {
                let name = f.take("named")?;
                let named: NamedRotation =
                    name.parse().map_err(|_| err(line, format!("unknown named matrix `{name}`")))?;
                Rotation::Named(named)
            } else {
                Rotation::Params(RamseyParams { theta: f.angle("theta")?, chi: f.angle("chi")? })
            };
            ProtocolStep64::RamseyRotate { atom, rotation }
        }
        "dispersive" => ProtocolStep64::DispersiveInteract { atom: f.atom()?, phi: f.angle("phi")? },
        "resonant" => ProtocolStep64::ResonantInteract { atom: f.atom()?, gt: f.angle("gt")? },
        "detect" => ProtocolStep64::Detect { atom: f.atom()? },
        other => return Err(err(line, format!("unknown step `{other}`"))),
    };
    f.finish()?;
    Ok(step)
}

pub fn parse_protocol(text: &str) -> Result<ProtocolFile, ParseError> {
    let mut header: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0].contains('=') {
            if tokens.len() > 1 {
                return Err(err(line, "header lines hold a single key=value pair"));
            }
            if !steps.is_empty() {
                return Err(err(line, "header line after the first step"));
            }
            let (k, v) = split_pair(tokens[0]).ok_or_else(|| err(line, format!("malformed header `{}`", tokens[0])))?;
            if !["family", "sign", "cutoff", "tolerance"].contains(&k) {
                return Err(err(line, format!("unknown header key `{k}`")));
            }
            if header.insert(k, (line, v)).is_some() {
                return Err(err(line, format!("duplicate header key `{k}`")));
            }
        } else {
            steps.push((line, parse_step(line, tokens[0], &tokens[1..])?));
        }
    }

    let required = |key: &str| header.get(key).copied().ok_or_else(|| err(1, format!("missing header key `{key}`")));
    let (fl, fv) = required("family")?;
    let family: AtomFamily = fv.parse().map_err(|_| err(fl, format!("unknown family `{fv}`")))?;
    let (sl, sv) = required("sign")?;
    let sign = match sv {
        "plus" => Sign::Plus,
        "minus" => Sign::Minus,
        _ => return Err(err(sl, format!("sign must be plus or minus, found `{sv}`"))),
    };
    let cutoff = match header.get("cutoff") {
        Some(&(l, v)) => Some(v.parse::<usize>().ok().filter(|&c| c >= 2).ok_or_else(|| err(l, format!("invalid cutoff `{v}`")))?),
        None => None,
    };
    let tolerance = match header.get("tolerance") {
        Some(&(l, v)) => Some(
            v.parse::<f64>()
                .ok()
                .filter(|t| t.is_finite() && *t > 0.0)
                .ok_or_else(|| err(l, format!("invalid tolerance `{v}`")))?,
        ),
        None => None,
    };
    for (line, step) in &steps {
        if let ProtocolStep64::PrepareCavity { sign: s } = step {
            if *s != sign {
                return Err(err(*line, format!("prepare_cavity sign {s} contradicts header sign={}", sign_word(sign))));
            }
        }
    }
    Ok(ProtocolFile { family, sign, cutoff, tolerance, steps })
}

pub struct StepDisplay<'a>(pub &'a ProtocolStep64);

impl fmt::Display for StepDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ProtocolStep64::PrepareCavity { sign } => write!(f, "prepare_cavity sign={sign}"),
            ProtocolStep64::RamseyRotate { atom, rotation: Rotation::Named(n) } => write!(f, "ramsey atom={atom} named={n}"),
            ProtocolStep64::RamseyRotate { atom, rotation: Rotation::Params(p) } => {
                write!(f, "ramsey atom={atom} theta={} chi={}", format_angle(p.theta), format_angle(p.chi))
            }
            ProtocolStep64::DispersiveInteract { atom, phi } => write!(f, "dispersive atom={atom} phi={}", format_angle(*phi)),
            ProtocolStep64::ResonantInteract { atom, gt } => write!(f, "resonant atom={atom} gt={}", format_angle(*gt)),
            ProtocolStep64::Detect { atom } => write!(f, "detect atom={atom}"),
        }
    }
}

impl fmt::Display for ProtocolFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family={}", self.family)?;
        writeln!(f, "sign={}", sign_word(self.sign))?;
        if let Some(c) = self.cutoff {
            writeln!(f, "cutoff={c}")?;
        }
        if let Some(t) = self.tolerance {
            writeln!(f, "tolerance={t:e}")?;
        }
        writeln!(f)?;
        for (_, step) in &self.steps {
            writeln!(f, "{}", StepDisplay(step))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "family=cascade\nsign=plus\n";

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_angle("-pi/4"), Some(-PI / 4.0));
        assert_eq!(parse_angle("0.25"), Some(0.25));
        assert_eq!(parse_angle("-1e-3"), Some(-1e-3));
        assert_eq!(parse_angle("pi/0"), None);
        assert_eq!(parse_angle("2pi"), None);
        assert_eq!(parse_angle("inf"), None);
        assert_eq!(format_angle(PI / 4.0), "pi/4");
        assert_eq!(format_angle(-PI), "-pi");
        assert_eq!(format_angle(0.1), "0.1");
        assert_eq!(format_angle(0.0), "0.0");
    }

    #[test]
    fn named_ramsey_step() {
        let file = parse_protocol(&format!("{HEADER}ramsey atom=A1 named=K1\n")).unwrap();
        assert_eq!(
            file.steps,
            vec![(3, ProtocolStep64::RamseyRotate { atom: "A1".into(), rotation: Rotation::Named(NamedRotation::K1) })]
        );
    }

    #[test]
    fn empty_step_list() {
        let file = parse_protocol(HEADER).unwrap();
        assert!(file.steps.is_empty());
        assert_eq!(file.cutoff, None);
    }

    #[test]
    fn dispersive_step() {
        let file = parse_protocol(&format!("{HEADER}# a comment\n\ndispersive atom=A1 phi=pi  # trailing\n")).unwrap();
        assert_eq!(file.steps, vec![(5, ProtocolStep64::DispersiveInteract { atom: "A1".into(), phi: PI })]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            (format!("{HEADER}ramsey atom=A1 named=K9\n"), 3),
            (format!("{HEADER}dispersive atom=A7 phi=pi\n"), 3),
            (format!("{HEADER}detect atom=A1\nfamily=lambda\n"), 4),
            (format!("{HEADER}\n\nwobble atom=A1\n"), 5),
            (format!("{HEADER}dispersive atom=A1 phi=pi phi=pi\n"), 3),
            (format!("{HEADER}dispersive atom=A1\n"), 3),
            (format!("{HEADER}dispersive atom=A1 phi=pi extra=1\n"), 3),
            (format!("{HEADER}resonant atom=A3 gt=half\n"), 3),
            (format!("{HEADER}prepare_cavity sign=-\n"), 3),
            ("family=cascade\nsign=plus\ncolour=red\n".to_string(), 3),
            ("family=cascade\nfamily=lambda\nsign=plus\n".to_string(), 2),
            ("family=cascade\nsign=up\n".to_string(), 2),
            ("family=cascade\nsign=plus\ncutoff=1\n".to_string(), 3),
        ];
        for (text, line) in cases {
            let e = parse_protocol(&text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
        }
        assert!(parse_protocol("sign=plus\n").is_err());
    }

    #[test]
    fn header_values() {
        let file = parse_protocol("family=lambda\nsign=minus\ncutoff=6\ntolerance=1e-9\n").unwrap();
        assert_eq!(file.family, AtomFamily::Lambda);
        assert_eq!(file.sign, Sign::Minus);
        assert_eq!(file.cutoff, Some(6));
        assert_eq!(file.tolerance, Some(1e-9));
    }

    #[test]
    fn display_round_trip() {
        let text = format!(
            "{HEADER}tolerance=1e-10\nprepare_cavity sign=+\nramsey atom=A2 theta=0.3 chi=-pi/4\nresonant atom=A3 gt=pi/2\n"
        );
        let file = parse_protocol(&text).unwrap();
        let again = parse_protocol(&file.to_string()).unwrap();
        assert_eq!(file.step_list(), again.step_list());
        assert_eq!(file.tolerance, again.tolerance);
    }
}
