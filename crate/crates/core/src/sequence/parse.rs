use super::{ControlField, Event, ProbePulse, SetControl, Sweep, Time, Timeline, DEFAULT_RAMP};
use crate::error::{Error, Result};
use crate::units::{split_number, time_scale};

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    col: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: s + 1,
        });
    }
    out
}

struct Cursor<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.line, col, msg)
    }

    fn next(&mut self, what: &str) -> Result<&Token<'a>> {
        let col = self.end_col;
        let line = self.line;
        let t = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| Error::parse(line, col, format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn finish(&self) -> Result<()> {
        match self.tokens.get(self.pos) {
            Some(t) => Err(self.err(t.col, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }

    fn time(&mut self, what: &str) -> Result<Time> {
        let t = self.next(what)?;
        let (text, col) = (t.text, t.col);
        parse_time(text, col, self.line)
    }

    fn field(&mut self) -> Result<ControlField> {
        let line = self.line;
        let t = self.next("FWC or BWC")?;
        match t.text {
            "FWC" => Ok(ControlField::Fwc),
            "BWC" => Ok(ControlField::Bwc),
            other => Err(Error::parse(
                line,
                t.col,
                format!("expected FWC or BWC, found `{other}`"),
            )),
        }
    }

    fn level(&mut self) -> Result<f64> {
        let line = self.line;
        let t = self.next("level")?;
        let v: f64 = t
            .text
            .parse()
            .map_err(|_| Error::parse(line, t.col, format!("invalid level `{}`", t.text)))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::parse(
                line,
                t.col,
                format!("level {v} outside [0, 1]"),
            ));
        }
        Ok(v)
    }

    /// `key=value`; returns the value and the column where it starts.
    fn keyed(&mut self, key: &str) -> Result<(&'a str, usize)> {
        let line = self.line;
        let t = self.next(&format!("{key}=..."))?;
        match t.text.split_once('=') {
            Some((k, v)) if k == key => Ok((v, t.col + k.len() + 1)),
            _ => Err(Error::parse(
                line,
                t.col,
                format!("expected `{key}=...`, found `{}`", t.text),
            )),
        }
    }

    fn keyed_time(&mut self, key: &str) -> Result<Time> {
        let (v, col) = self.keyed(key)?;
        parse_time(v, col, self.line)
    }
}

fn parse_time(text: &str, col: usize, line: usize) -> Result<Time> {
    let (num, unit) = split_number(text);
    let value: f64 = num
        .parse()
        .map_err(|_| Error::parse(line, col, format!("invalid time `{text}`")))?;
    if unit.is_empty() {
        return Err(Error::parse(
            line,
            col + num.len(),
            format!("time `{text}` needs a unit"),
        ));
    }
    let scale = time_scale(unit)
        .ok_or_else(|| Error::parse(line, col + num.len(), format!("unknown unit `{unit}`")))?;
    let secs = value * scale;
    if !secs.is_finite() || secs < 0.0 {
        return Err(Error::parse(
            line,
            col,
            format!("time `{text}` must be finite and >= 0"),
        ));
    }
    Ok(Time::from_secs(secs))
}

/// Parses a timeline with the default 100 ns ramp.
pub fn parse_timeline(text: &str) -> Result<Timeline> {
    parse_timeline_with_ramp(text, DEFAULT_RAMP)
}

/// Parses a timeline; `set` lines without `ramp=` get `default_ramp`.
pub fn parse_timeline_with_ramp(text: &str, default_ramp: Time) -> Result<Timeline> {
    let mut events: Vec<(usize, usize, Event)> = Vec::new();
    let mut duration: Option<(Time, usize)> = None;
    let mut init = [None::<f64>; 2];
    let mut sweep: Option<(Sweep, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let end_col = content.trim_end().len() + 1;
        let mut cur = Cursor {
            line: lineno,
            tokens,
            pos: 0,
            end_col,
        };
        let head = cur.next("statement")?;
        let (head_text, head_col) = (head.text, head.col);
        match head_text {
            "duration" => {
                if duration.is_some() {
                    return Err(cur.err(head_col, "duplicate `duration`"));
                }
                duration = Some((cur.time("duration")?, head_col));
            }
            "init" => {
                let field = cur.field()?;
                let level = cur.level()?;
                if init[field as usize].replace(level).is_some() {
                    return Err(cur.err(head_col, format!("duplicate `init {field}`")));
                }
            }
            "at" => {
                let t = cur.time("event time")?;
                let kind = cur.next("`probe` or `set`")?;
                let (kind_text, kind_col) = (kind.text, kind.col);
                let event = match kind_text {
                    "probe" => {
                        let (ch, ch_col) = cur.keyed("ch")?;
                        let channel: usize =
                            ch.parse().ok().filter(|&c| c >= 1).ok_or_else(|| {
                                cur.err(ch_col, format!("invalid channel `{ch}`"))
                            })?;
                        let fwhm = cur.keyed_time("fwhm")?;
                        if fwhm == Time::ZERO {
                            return Err(cur.err(head_col, "fwhm must be positive"));
                        }
                        let (amp, amp_col) = cur.keyed("amp")?;
                        let amplitude: f64 = amp
                            .parse()
                            .ok()
                            .filter(|a: &f64| a.is_finite() && *a >= 0.0)
                            .ok_or_else(|| {
                                cur.err(amp_col, format!("invalid amplitude `{amp}`"))
                            })?;
                        Event::Probe(ProbePulse {
                            channel,
                            at: t,
                            fwhm,
                            amplitude,
                        })
                    }
                    "set" => {
                        let field = cur.field()?;
                        let level = cur.level()?;
                        let ramp = if cur.pos < cur.tokens.len() {
                            cur.keyed_time("ramp")?
                        } else {
                            default_ramp
                        };
                        if ramp == Time::ZERO {
                            return Err(cur.err(head_col, "ramp must be positive"));
                        }
                        Event::Set(SetControl {
                            field,
                            level,
                            t_start: t,
                            ramp,
                        })
                    }
                    other => {
                        return Err(cur.err(
                            kind_col,
                            format!("expected `probe` or `set`, found `{other}`"),
                        ))
                    }
                };
                events.push((lineno, head_col, event));
            }
            "sweep" => {
                if sweep.is_some() {
                    return Err(cur.err(head_col, "only one `sweep` is allowed"));
                }
                let field = cur.field()?;
                let at = cur.keyed_time("at")?;
                let from = cur.keyed_time("from")?;
                let to = cur.keyed_time("to")?;
                let step = cur.keyed_time("step")?;
                if step == Time::ZERO || from > to {
                    return Err(cur.err(head_col, "sweep needs step > 0 and from <= to"));
                }
                sweep = Some((
                    Sweep {
                        field,
                        at,
                        from,
                        to,
                        step,
                    },
                    lineno,
                ));
            }
            other => return Err(cur.err(head_col, format!("unknown statement `{other}`"))),
        }
        cur.finish()?;
    }

    events.sort_by_key(|(_, _, e)| e.time());
    let latest = events
        .last()
        .map(|(_, _, e)| e.time())
        .unwrap_or(Time::ZERO);
    let latest = match &sweep {
        Some((sw, _)) => latest.max(sw.to),
        None => latest,
    };
    let duration = match duration {
        Some((d, _)) => d,
        None => latest,
    };
    for (line, col, e) in &events {
        if e.time() > duration {
            return Err(Error::parse(
                *line,
                *col,
                format!("event at {} is beyond duration {duration}", e.time()),
            ));
        }
    }
    for field in [ControlField::Fwc, ControlField::Bwc] {
        let sets: Vec<_> = events
            .iter()
            .filter_map(|(l, c, e)| match e {
                Event::Set(s) if s.field == field => Some((*l, *c, s)),
                _ => None,
            })
            .collect();
        for w in sets.windows(2) {
            let (_, _, a) = w[0];
            let (line, col, b) = w[1];
            if a.t_start + a.ramp > b.t_start {
                return Err(Error::parse(
                    line,
                    col,
                    format!(
                        "{field} ramp at {} overlaps the ramp starting at {}",
                        b.t_start, a.t_start
                    ),
                ));
            }
        }
    }
    let timeline = Timeline {
        events: events.into_iter().map(|(_, _, e)| e).collect(),
        duration,
        initial_levels: [init[0].unwrap_or(0.0), init[1].unwrap_or(0.0)],
        sweep: sweep.as_ref().map(|(s, _)| *s),
    };
    if let Some((sw, line)) = sweep {
        if sw.to > duration {
            return Err(Error::parse(
                line,
                1,
                format!("sweep end {} is beyond duration {duration}", sw.to),
            ));
        }
        // Every swept copy must itself be valid, e.g. no ramp collisions.
        timeline
            .sweep_family()
            .map_err(|e| Error::parse(line, 1, format!("invalid sweep: {e}")))?;
    }
    timeline
        .validate()
        .map_err(|e| Error::parse(0, 0, e.to_string()))?;
    Ok(timeline)
}
