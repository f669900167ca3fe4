//! Plain-text `key = value` schedule files.
//!
//! Two forms are accepted. The parameter form uses the keys `p0, pR, pB,
//! pRB, K1, K2`. The explicit form lists segments:
//!
//! ```text
//! K = 10
//! segment.0.from = 1
//! segment.0.to = 10
//! segment.0.rule.0,1 = 3/4, 1/4, 0
//! ```
//!
//! Rule values are `pW, pR, pB`; categories without a rule line are inert.
//! Probabilities accept decimals (`0.25`, `1e-3`), powers (`2^-18`) and
//! fractions (`1/3`). `#` starts a comment.

use std::collections::{BTreeMap, HashSet};

use rug::{Integer, Rational};

use super::{Category, PaperParams, Prob, RoundRule, RuleTable, Schedule, ScheduleError, Segment};

const PARAM_KEYS: [&str; 6] = ["p0", "pR", "pB", "pRB", "K1", "K2"];

/// Parses an exact probability literal.
pub fn parse_prob(text: &str) -> Result<Prob, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty value".into());
    }
    if let Some((base, exp)) = t.split_once('^') {
        let base: i64 = base
            .trim()
            .parse()
            .map_err(|_| format!("bad power base in `{t}`"))?;
        let exp: i32 = exp
            .trim()
            .parse()
            .map_err(|_| format!("bad exponent in `{t}`"))?;
        if base == 0 || exp.unsigned_abs() > 100_000 {
            return Err(format!("power `{t}` out of range"));
        }
        let b = Integer::from(base);
        let mag = Integer::from(rug::ops::Pow::pow(&b, exp.unsigned_abs()));
        return Ok(if exp >= 0 {
            Rational::from(mag)
        } else {
            Rational::from((Integer::from(1), mag))
        });
    }
    if let Some((num, den)) = t.split_once('/') {
        let num: Integer = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{t}`"))?;
        let den: Integer = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in `{t}`"))?;
        if den == 0 {
            return Err(format!("zero denominator in `{t}`"));
        }
        return Ok(Rational::from((num, den)));
    }
    parse_decimal(t).ok_or_else(|| format!("`{t}` is not a number"))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: Integer = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    if scale.unsigned_abs() > 100_000 {
        return None;
    }
    let ten = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    let mut q = if scale >= 0 {
        Rational::from(digits * ten)
    } else {
        Rational::from((digits, ten))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Renders an exact probability so that [`parse_prob`] reads it back unchanged.
pub fn format_prob(p: &Prob) -> String {
    if p.denom() == &1 {
        return p.numer().to_string();
    }
    let den = p.denom();
    if p.numer() == &1 && den.is_power_of_two() {
        return format!("2^-{}", den.significant_bits() - 1);
    }
    // Terminating decimal when the denominator is 2^a 5^b.
    let mut rest = den.clone();
    let twos = rest.find_one(0).unwrap_or(0);
    rest >>= twos;
    let mut fives = 0u32;
    while rest.is_divisible_u(5) {
        rest /= 5u32;
        fives += 1;
    }
    if rest == 1 {
        let places = twos.max(fives);
        let scaled = Integer::from(Integer::u_pow_u(10, places)) * p.numer() / den;
        let neg = scaled < 0;
        let mut s = Integer::from(scaled.abs_ref()).to_string();
        let places = places as usize;
        if s.len() <= places {
            s = format!("{}{}", "0".repeat(places - s.len() + 1), s);
        }
        let (i, f) = s.split_at(s.len() - places);
        return format!("{}{i}.{f}", if neg { "-" } else { "" });
    }
    format!("{}/{}", p.numer(), den)
}

fn parse_err(line: usize, msg: impl Into<String>) -> ScheduleError {
    ScheduleError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_u32(line: usize, v: &str) -> Result<u32, ScheduleError> {
    v.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("`{}` is not a round count", v.trim())))
}

#[derive(Default)]
struct SegmentDraft {
    from: Option<u32>,
    to: Option<u32>,
    rules: RuleTable,
    line: usize,
}

pub(super) fn parse_schedule(text: &str) -> Result<Schedule, ScheduleError> {
    Ok(match parse_file(text)? {
        ScheduleFile::Params(p) => p.build(),
        ScheduleFile::Explicit(s) => s,
    })
}

/// A parsed schedule file, keeping the parameters when the file used them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleFile {
    Params(PaperParams),
    Explicit(Schedule),
}

impl ScheduleFile {
    pub fn schedule(&self) -> Schedule {
        match self {
            ScheduleFile::Params(p) => p.build(),
            ScheduleFile::Explicit(s) => s.clone(),
        }
    }
}

pub fn parse_file(text: &str) -> Result<ScheduleFile, ScheduleError> {
    let mut param_lines: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    let mut drafts: BTreeMap<u32, SegmentDraft> = BTreeMap::new();
    let mut rounds: Option<u32> = None;
    let mut seen = HashSet::new();
    let mut first_explicit_line = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(ScheduleError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }

        if let Some(k) = PARAM_KEYS.iter().find(|k| **k == key) {
            param_lines.insert(k, (line, value.to_string()));
            continue;
        }
        if key == "K" {
            rounds = Some(parse_u32(line, value)?);
            first_explicit_line.get_or_insert(line);
            continue;
        }
        let Some(rest) = key.strip_prefix("segment.") else {
            return Err(ScheduleError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        first_explicit_line.get_or_insert(line);
        let (index, field) = rest
            .split_once('.')
            .ok_or_else(|| ScheduleError::UnknownKey {
                line,
                key: key.to_string(),
            })?;
        let index: u32 = index.parse().map_err(|_| ScheduleError::UnknownKey {
            line,
            key: key.to_string(),
        })?;
        let draft = drafts.entry(index).or_default();
        if draft.line == 0 {
            draft.line = line;
        }
        match field {
            "from" => draft.from = Some(parse_u32(line, value)?),
            "to" => draft.to = Some(parse_u32(line, value)?),
            _ => {
                let cat = field
                    .strip_prefix("rule.")
                    .and_then(|c| c.split_once(','))
                    .and_then(|(r, b)| {
                        Some((r.trim().parse::<u8>().ok()?, b.trim().parse::<u8>().ok()?))
                    })
                    .and_then(|(r, b)| Category::checked(r, b))
                    .ok_or_else(|| ScheduleError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })?;
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 3 {
                    return Err(parse_err(line, "a rule needs three values `pW, pR, pB`"));
                }
                let probs = parts
                    .iter()
                    .map(|p| parse_prob(p).map_err(|m| parse_err(line, m)))
                    .collect::<Result<Vec<_>, _>>()?;
                let rule = RoundRule::new(probs[1].clone(), probs[2].clone());
                if rule.white() != probs[0] {
                    return Err(parse_err(
                        line,
                        format!("pW for {cat} must equal 1 - pR - pB"),
                    ));
                }
                draft.rules.set(cat, rule);
            }
        }
    }

    if let Some(line) = first_explicit_line {
        if let Some((_, (pline, _))) = param_lines.iter().next() {
            return Err(parse_err(
                (*pline).max(line),
                "parameter keys and explicit segments cannot be mixed",
            ));
        }
        let mut segments = Vec::new();
        for (index, d) in drafts {
            let from = d
                .from
                .ok_or_else(|| parse_err(d.line, format!("segment {index} has no `from`")))?;
            let to =
                d.to.ok_or_else(|| parse_err(d.line, format!("segment {index} has no `to`")))?;
            segments.push(Segment::new(from, to, d.rules));
        }
        let rounds = rounds.unwrap_or_else(|| segments.iter().map(|s| s.to).max().unwrap_or(0));
        return Ok(ScheduleFile::Explicit(Schedule::new(rounds, segments)));
    }

    if param_lines.is_empty() {
        return Err(ScheduleError::MissingKey("K".into()));
    }
    let get = |k: &str| {
        param_lines
            .get(k)
            .ok_or_else(|| ScheduleError::MissingKey(k.to_string()))
    };
    let prob = |k: &str| -> Result<Prob, ScheduleError> {
        let (line, v) = get(k)?;
        parse_prob(v).map_err(|m| parse_err(*line, m))
    };
    let count = |k: &str| -> Result<u32, ScheduleError> {
        let (line, v) = get(k)?;
        parse_u32(*line, v)
    };
    let params = PaperParams {
        p0: prob("p0")?,
        p_red: prob("pR")?,
        p_blue: prob("pB")?,
        p_mixed: prob("pRB")?,
        phase1_rounds: count("K1")?,
        phase2_rounds: count("K2")?,
    };
    params.validate()?;
    Ok(ScheduleFile::Params(params))
}

/// Writes the parameter form.
pub fn write_params(params: &PaperParams) -> String {
    format!(
        "p0 = {}\npR = {}\npB = {}\npRB = {}\nK1 = {}\nK2 = {}\n",
        format_prob(&params.p0),
        format_prob(&params.p_red),
        format_prob(&params.p_blue),
        format_prob(&params.p_mixed),
        params.phase1_rounds,
        params.phase2_rounds
    )
}

pub(super) fn write_schedule(s: &Schedule) -> String {
    let mut out = format!("K = {}\n", s.rounds());
    for (i, seg) in s.segments().iter().enumerate() {
        out.push_str(&format!(
            "segment.{i}.from = {}\nsegment.{i}.to = {}\n",
            seg.from, seg.to
        ));
        for (c, rule) in seg.rules.iter() {
            if rule.is_inert() {
                continue;
            }
            out.push_str(&format!(
                "segment.{i}.rule.{},{} = {}, {}, {}\n",
                c.r,
                c.b,
                format_prob(&rule.white()),
                format_prob(&rule.red),
                format_prob(&rule.blue)
            ));
        }
    }
    out
}
