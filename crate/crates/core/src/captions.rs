//! Timed caption ingestion.
//!
//! Parses WebVTT, SRT and YouTube JSON3 caption files into a [`Transcript`]:
//! an ordered list of normalized [`CaptionCue`]s for one video. Each cue is a
//! text sequence exactly as the platform punctuated it; merging cues into
//! sentences happens later in [`crate::punctuation`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CaptionError {
    /// `line` is 1-based; 0 means the error is not tied to a line.
    #[error("malformed input at line {line}: {reason}")]
    MalformedInput { line: usize, reason: String },
    #[error("no cues survived normalization")]
    EmptyTranscript,
}

fn malformed(line: usize, reason: impl Into<String>) -> CaptionError {
    CaptionError::MalformedInput {
        line,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptionFormat {
    Webvtt,
    Srt,
    Json3,
}

impl CaptionFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaptionFormat::Webvtt => "webvtt",
            CaptionFormat::Srt => "srt",
            CaptionFormat::Json3 => "json3",
        }
    }
}

impl fmt::Display for CaptionFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaptionFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "webvtt" | "vtt" => Ok(CaptionFormat::Webvtt),
            "srt" => Ok(CaptionFormat::Srt),
            "json3" => Ok(CaptionFormat::Json3),
            other => Err(format!(
                "unknown caption format `{other}` (expected webvtt, srt or json3)"
            )),
        }
    }
}

/// One timed caption text sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionCue {
    pub index: usize,
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

/// All cues of one video, sorted by start time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub video_id: String,
    pub cues: Vec<CaptionCue>,
}

impl Transcript {
    /// Canonical JSON form: `{"video_id":..,"cues":[{"index","start_ms","end_ms","text"}]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serialization is infallible")
    }

    pub fn from_json(data: &str) -> Result<Self, CaptionError> {
        let transcript: Transcript =
            serde_json::from_str(data).map_err(|e| malformed(e.line(), e.to_string()))?;
        if transcript.video_id.is_empty() {
            return Err(malformed(0, "empty video_id"));
        }
        Ok(transcript)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Drop a cue whose text equals the immediately preceding cue's text.
    pub dedup_consecutive: bool,
}

/// Parses a caption file with default options.
pub fn parse_captions(
    data: &[u8],
    format: CaptionFormat,
    video_id: &str,
) -> Result<Transcript, CaptionError> {
    parse_captions_with(data, format, video_id, ParseOptions::default())
}

pub fn parse_captions_with(
    data: &[u8],
    format: CaptionFormat,
    video_id: &str,
    options: ParseOptions,
) -> Result<Transcript, CaptionError> {
    if video_id.is_empty() {
        return Err(malformed(0, "empty video_id"));
    }
    let text = decode_utf8(data)?;
    let raw = match format {
        CaptionFormat::Webvtt => parse_webvtt(text)?,
        CaptionFormat::Srt => parse_srt(text)?,
        CaptionFormat::Json3 => parse_json3(text)?,
    };
    assemble(raw, video_id, options)
}

struct RawCue {
    start_ms: u64,
    end_ms: u64,
    text: String,
}

fn assemble(
    mut raw: Vec<RawCue>,
    video_id: &str,
    options: ParseOptions,
) -> Result<Transcript, CaptionError> {
    raw.retain(|c| !c.text.is_empty());
    // stable: equal start times keep file order
    raw.sort_by_key(|c| c.start_ms);
    if options.dedup_consecutive {
        raw.dedup_by(|next, prev| next.text == prev.text);
    }
    if raw.is_empty() {
        return Err(CaptionError::EmptyTranscript);
    }
    let cues = raw
        .into_iter()
        .enumerate()
        .map(|(index, c)| CaptionCue {
            index,
            start_ms: c.start_ms,
            end_ms: c.end_ms,
            text: c.text,
        })
        .collect();
    Ok(Transcript {
        video_id: video_id.to_string(),
        cues,
    })
}

fn decode_utf8(data: &[u8]) -> Result<&str, CaptionError> {
    let data = data.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(data);
    std::str::from_utf8(data).map_err(|e| {
        let line = data[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        malformed(line, "invalid UTF-8")
    })
}

/// Collapses internal whitespace runs to one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes `<...>` tags (voice, class, timestamp, italics, font) and SSA
/// override blocks such as `{\an8}`. A `<` without a closing `>` is kept.
fn strip_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find(['<', '{']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let (close, is_tag) = if tail.starts_with('<') {
            (tail.find('>'), true)
        } else if tail.starts_with("{\\") {
            (tail.find('}'), true)
        } else {
            (None, false)
        };
        match close {
            Some(end) if is_tag => rest = &tail[end + 1..],
            _ => {
                out.push_str(&tail[..1]);
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let decoded = [
            ("&amp;", '&'),
            ("&lt;", '<'),
            ("&gt;", '>'),
            ("&nbsp;", ' '),
            ("&quot;", '"'),
            ("&#39;", '\''),
            ("&apos;", '\''),
        ]
        .iter()
        .find(|(entity, _)| tail.starts_with(entity));
        match decoded {
            Some((entity, ch)) => {
                out.push(*ch);
                rest = &tail[entity.len()..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn clean_payload(lines: &[&str]) -> String {
    let joined = lines.join(" ");
    normalize_whitespace(&decode_entities(&strip_markup(&joined)))
}

/// Parses `[HH:]MM:SS<sep>fff...`; fraction digits beyond milliseconds are truncated.
fn parse_timestamp(s: &str, separators: &[char]) -> Option<u64> {
    let (clock, frac) = s.split_once(|c| separators.contains(&c))?;
    let parts: Vec<&str> = clock.split(':').collect();
    let (h, m, sec) = match parts.as_slice() {
        [h, m, s] => (*h, *m, *s),
        [m, s] => ("0", *m, *s),
        _ => return None,
    };
    let digits = |v: &str| !v.is_empty() && v.bytes().all(|b| b.is_ascii_digit());
    if !digits(h) || !digits(m) || !digits(sec) || !digits(frac) {
        return None;
    }
    if m.len() != 2 || sec.len() != 2 {
        return None;
    }
    let h: u64 = h.parse().ok()?;
    let m: u64 = m.parse().ok()?;
    let sec: u64 = sec.parse().ok()?;
    if m > 59 || sec > 59 {
        return None;
    }
    let mut ms = 0u64;
    for (i, b) in frac.bytes().take(3).enumerate() {
        ms += u64::from(b - b'0') * [100, 10, 1][i];
    }
    Some(((h * 60 + m) * 60 + sec) * 1000 + ms)
}

/// Parses `start --> end [settings]`.
fn parse_timing(
    line: &str,
    line_no: usize,
    separators: &[char],
) -> Result<(u64, u64), CaptionError> {
    let (start, rest) = line
        .split_once("-->")
        .ok_or_else(|| malformed(line_no, "expected `-->` timing line"))?;
    let start = start.trim();
    let end = rest.split_whitespace().next().unwrap_or("");
    let start_ms = parse_timestamp(start, separators)
        .ok_or_else(|| malformed(line_no, format!("unparsable timestamp `{start}`")))?;
    let end_ms = parse_timestamp(end, separators)
        .ok_or_else(|| malformed(line_no, format!("unparsable timestamp `{end}`")))?;
    if end_ms < start_ms {
        return Err(malformed(line_no, "cue ends before it starts"));
    }
    Ok((start_ms, end_ms))
}

/// Splits text into blank-line separated blocks of (1-based first line number, lines).
fn blocks(text: &str) -> Vec<(usize, Vec<&str>)> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut first = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push((first, std::mem::take(&mut current)));
            }
        } else {
            if current.is_empty() {
                first = i + 1;
            }
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push((first, current));
    }
    out
}

fn parse_webvtt(text: &str) -> Result<Vec<RawCue>, CaptionError> {
    let mut blocks = blocks(text).into_iter();
    let header_ok = text.starts_with("WEBVTT")
        && matches!(
            text[6..].chars().next(),
            None | Some(' ' | '\t' | '\n' | '\r')
        );
    if !header_ok {
        return Err(malformed(1, "missing WEBVTT header"));
    }
    // header block (may carry metadata lines such as `Kind:` / `Language:`)
    blocks.next();

    let mut cues = Vec::new();
    for (line_no, lines) in blocks {
        let first = lines[0];
        if first.starts_with("NOTE") || first == "STYLE" || first == "REGION" {
            continue;
        }
        let timing_at = if first.contains("-->") {
            0
        } else if lines.len() > 1 && lines[1].contains("-->") {
            1
        } else {
            return Err(malformed(line_no, "block is neither a cue nor a comment"));
        };
        let (start_ms, end_ms) = parse_timing(lines[timing_at], line_no + timing_at, &['.'])?;
        cues.push(RawCue {
            start_ms,
            end_ms,
            text: clean_payload(&lines[timing_at + 1..]),
        });
    }
    Ok(cues)
}

fn parse_srt(text: &str) -> Result<Vec<RawCue>, CaptionError> {
    let blocks = blocks(text);
    if blocks.is_empty() {
        return Err(malformed(0, "no SRT cues"));
    }
    let mut cues = Vec::new();
    for (line_no, lines) in blocks {
        let timing_at = if lines[0].contains("-->") {
            0
        } else if lines[0].trim().bytes().all(|b| b.is_ascii_digit()) {
            if lines.len() < 2 {
                return Err(malformed(line_no + 1, "counter without timing line"));
            }
            1
        } else {
            return Err(malformed(
                line_no,
                format!("expected cue counter, found `{}`", lines[0]),
            ));
        };
        let (start_ms, end_ms) = parse_timing(lines[timing_at], line_no + timing_at, &[',', '.'])?;
        cues.push(RawCue {
            start_ms,
            end_ms,
            text: clean_payload(&lines[timing_at + 1..]),
        });
    }
    Ok(cues)
}

#[derive(Deserialize)]
struct Json3Doc {
    events: Vec<Json3Event>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Json3Event {
    t_start_ms: Option<u64>,
    d_duration_ms: Option<u64>,
    segs: Option<Vec<Json3Seg>>,
}

#[derive(Deserialize)]
struct Json3Seg {
    utf8: Option<String>,
}

fn parse_json3(text: &str) -> Result<Vec<RawCue>, CaptionError> {
    let doc: Json3Doc =
        serde_json::from_str(text).map_err(|e| malformed(e.line(), e.to_string()))?;
    let mut cues = Vec::new();
    for (i, event) in doc.events.into_iter().enumerate() {
        let Some(segs) = event.segs else { continue };
        let pieces: Vec<&str> = segs.iter().filter_map(|s| s.utf8.as_deref()).collect();
        if pieces.is_empty() {
            continue;
        }
        let start_ms = event
            .t_start_ms
            .ok_or_else(|| malformed(0, format!("event {i} has text but no tStartMs")))?;
        cues.push(RawCue {
            start_ms,
            end_ms: start_ms + event.d_duration_ms.unwrap_or(0),
            text: clean_payload(&pieces),
        });
    }
    Ok(cues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cue(index: usize, start_ms: u64, end_ms: u64, text: &str) -> CaptionCue {
        CaptionCue {
            index,
            start_ms,
            end_ms,
            text: text.to_string(),
        }
    }

    #[test]
    fn minimal_webvtt() {
        let data = b"WEBVTT\n\n00:00:01.000 --> 00:00:02.000\nhello\n\n00:00:02.000 --> 00:00:03.500\nworld\n";
        let t = parse_captions(data, CaptionFormat::Webvtt, "v1").unwrap();
        assert_eq!(
            t.cues,
            vec![cue(0, 1000, 2000, "hello"), cue(1, 2000, 3500, "world")]
        );
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            parse_captions(b"", CaptionFormat::Webvtt, "v"),
            Err(CaptionError::MalformedInput { .. })
        ));
        assert!(matches!(
            parse_captions(b"", CaptionFormat::Srt, "v"),
            Err(CaptionError::MalformedInput { .. })
        ));
        assert!(matches!(
            parse_captions(b"", CaptionFormat::Json3, "v"),
            Err(CaptionError::MalformedInput { .. })
        ));
        assert_eq!(
            parse_captions(br#"{"events":[]}"#, CaptionFormat::Json3, "v"),
            Err(CaptionError::EmptyTranscript)
        );
    }

    #[test]
    fn srt_markup_only_cues_dropped() {
        let data = "1\n00:00:01,000 --> 00:00:02,000\n<i></i>\n\n2\n00:00:03,000 --> 00:00:04,000\n<b>really</b> frightens me\n";
        let t = parse_captions(data.as_bytes(), CaptionFormat::Srt, "v").unwrap();
        assert_eq!(t.cues, vec![cue(0, 3000, 4000, "really frightens me")]);

        let only = "1\n00:00:01,000 --> 00:00:02,000\n<i></i>\n";
        assert_eq!(
            parse_captions(only.as_bytes(), CaptionFormat::Srt, "v"),
            Err(CaptionError::EmptyTranscript)
        );
    }

    #[test]
    fn webvtt_header_required() {
        let err = parse_captions(
            b"00:00:01.000 --> 00:00:02.000\nhi\n",
            CaptionFormat::Webvtt,
            "v",
        );
        assert_eq!(
            err,
            Err(CaptionError::MalformedInput {
                line: 1,
                reason: "missing WEBVTT header".into()
            })
        );
        assert!(parse_captions(b"WEBVTTX\n", CaptionFormat::Webvtt, "v").is_err());
    }

    #[test]
    fn webvtt_bad_timestamp_reports_line() {
        let data = b"WEBVTT\n\n00:00:01.000 --> 00:0x:02.000\nhi\n";
        match parse_captions(data, CaptionFormat::Webvtt, "v") {
            Err(CaptionError::MalformedInput { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn webvtt_youtube_style() {
        let data = "\u{feff}WEBVTT\nKind: captions\nLanguage: en\n\nNOTE some comment\n\nintro\n00:01.500 --> 00:03.250 align:start position:0%\n<v Caster>I respect <c.yellow>that</c></v>\n<00:00:02.100><c> you have</c> just   faker\n\n00:00:02.000 --> 00:00:02.5009\n&lt;3 &amp; more\n";
        let t = parse_captions(data.as_bytes(), CaptionFormat::Webvtt, "v").unwrap();
        assert_eq!(
            t.cues,
            vec![
                cue(0, 1500, 3250, "I respect that you have just faker"),
                cue(1, 2000, 2500, "<3 & more"),
            ]
        );
    }

    #[test]
    fn sorting_is_stable_and_overlaps_kept() {
        let data = "WEBVTT\n\n00:00:05.000 --> 00:00:06.000\nc\n\n00:00:01.000 --> 00:00:09.000\na\n\n00:00:01.000 --> 00:00:02.000\nb\n\n00:00:01.000 --> 00:00:02.000\nb\n";
        let t = parse_captions(data.as_bytes(), CaptionFormat::Webvtt, "v").unwrap();
        let texts: Vec<_> = t.cues.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["a", "b", "b", "c"]);
        assert_eq!(
            t.cues.iter().map(|c| c.index).collect::<Vec<_>>(),
            [0, 1, 2, 3]
        );

        let deduped = parse_captions_with(
            data.as_bytes(),
            CaptionFormat::Webvtt,
            "v",
            ParseOptions {
                dedup_consecutive: true,
            },
        )
        .unwrap();
        let texts: Vec<_> = deduped.cues.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["a", "b", "c"]);
    }

    #[test]
    fn end_before_start_rejected() {
        let data = b"1\n00:00:02,000 --> 00:00:01,000\nx\n";
        assert!(matches!(
            parse_captions(data, CaptionFormat::Srt, "v"),
            Err(CaptionError::MalformedInput { line: 2, .. })
        ));
    }

    #[test]
    fn srt_crlf_and_multiline() {
        let data = "1\r\n00:00:01,000 --> 00:00:02,500\r\nnightmares you wake\r\nup in a cold sweat\r\n\r\n2\r\n00:00:02,500 --> 00:00:04,000\r\n{\\an8}you're like fakers\r\n";
        let t = parse_captions(data.as_bytes(), CaptionFormat::Srt, "v").unwrap();
        assert_eq!(
            t.cues,
            vec![
                cue(0, 1000, 2500, "nightmares you wake up in a cold sweat"),
                cue(1, 2500, 4000, "you're like fakers"),
            ]
        );
    }

    #[test]
    fn srt_garbage_counter() {
        let data = b"one\n00:00:01,000 --> 00:00:02,000\nx\n";
        assert!(parse_captions(data, CaptionFormat::Srt, "v").is_err());
    }

    #[test]
    fn json3_events() {
        let data = r#"{"wireMagic":"pb3","events":[
            {"tStartMs":0,"dDurationMs":4000,"id":1,"wpWinPosId":1},
            {"tStartMs":120,"dDurationMs":2000,"segs":[{"utf8":"right"},{"utf8":" like","tOffsetMs":300},{"utf8":"even"}]},
            {"tStartMs":2000,"segs":[{"utf8":"\n"}]},
            {"tStartMs":2500,"dDurationMs":10,"segs":[{"utf8":"on the  floor"}]}
        ]}"#;
        let t = parse_captions(data.as_bytes(), CaptionFormat::Json3, "v").unwrap();
        assert_eq!(
            t.cues,
            vec![
                cue(0, 120, 2120, "right like even"),
                cue(1, 2500, 2510, "on the floor")
            ]
        );
    }

    #[test]
    fn json3_errors() {
        assert!(matches!(
            parse_captions(b"{\"events\": [", CaptionFormat::Json3, "v"),
            Err(CaptionError::MalformedInput { .. })
        ));
        assert!(matches!(
            parse_captions(b"{\"other\": []}", CaptionFormat::Json3, "v"),
            Err(CaptionError::MalformedInput { .. })
        ));
        assert!(matches!(
            parse_captions(
                br#"{"events":[{"segs":[{"utf8":"x"}]}]}"#,
                CaptionFormat::Json3,
                "v"
            ),
            Err(CaptionError::MalformedInput { .. })
        ));
    }

    #[test]
    fn invalid_utf8() {
        assert!(matches!(
            parse_captions(b"WEBVTT\n\n\xff", CaptionFormat::Webvtt, "v"),
            Err(CaptionError::MalformedInput { line: 3, .. })
        ));
    }

    #[test]
    fn timestamp_truncation() {
        assert_eq!(parse_timestamp("00:00:01.2349", &['.']), Some(1234));
        assert_eq!(parse_timestamp("01:02:03.5", &['.']), Some(3_723_500));
        assert_eq!(parse_timestamp("02:03.004", &['.']), Some(123_004));
        assert_eq!(parse_timestamp("00:60:00.000", &['.']), None);
        assert_eq!(parse_timestamp("00:00:01", &['.']), None);
    }

    #[test]
    fn format_names() {
        assert_eq!("VTT".parse::<CaptionFormat>(), Ok(CaptionFormat::Webvtt));
        assert_eq!("json3".parse::<CaptionFormat>(), Ok(CaptionFormat::Json3));
        assert!("ass".parse::<CaptionFormat>().is_err());
    }

    #[test]
    fn transcript_json_shape() {
        let t = Transcript {
            video_id: "v".into(),
            cues: vec![cue(0, 1, 2, "hi")],
        };
        assert_eq!(
            t.to_json(),
            r#"{"video_id":"v","cues":[{"index":0,"start_ms":1,"end_ms":2,"text":"hi"}]}"#
        );
        assert_eq!(Transcript::from_json(&t.to_json()).unwrap(), t);
    }
}
