use std::collections::BTreeSet;
use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::Document;
use crate::error::{Error, Result};

/// Which elements become documents and where their date lives.
#[derive(Clone, Debug)]
pub struct TeiOptions {
    pub container_tags: BTreeSet<String>,
    /// `@name`: attribute on the container, falling back to the nearest
    /// ancestor carrying it.
    pub date_attribute: String,
    /// Prefix for generated ids when a container has no `xml:id`/`id`.
    pub id_prefix: String,
}

impl TeiOptions {
    pub fn new(tags: &[&str], date_attribute: &str) -> Self {
        TeiOptions {
            container_tags: tags.iter().map(|t| t.to_string()).collect(),
            date_attribute: date_attribute.to_owned(),
            id_prefix: "doc".to_owned(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TeiExtraction {
    pub documents: Vec<Document>,
    /// Containers dropped because the date was missing or unparseable.
    pub skipped: usize,
    pub skipped_ids: Vec<String>,
}

struct Open {
    date: Option<String>,
}

struct Capture {
    depth: usize,
    id: String,
    date: Option<String>,
    parts: Vec<String>,
}

/// Streams a TEI-XML document and emits one [`Document`] per outermost
/// container element. Text is the concatenation of the descendant text nodes,
/// each trimmed, joined by single spaces.
pub fn extract_tei_text<R: BufRead>(input: R, opts: &TeiOptions) -> Result<TeiExtraction> {
    let attr = opts
        .date_attribute
        .strip_prefix('@')
        .filter(|a| !a.is_empty())
        .ok_or_else(|| Error::invalid(format!("date path {:?} must look like @name", opts.date_attribute)))?
        .as_bytes()
        .to_vec();

    let mut reader = Reader::from_reader(input);
    reader.config_mut().check_end_names = true;
    let mut buf = Vec::new();
    let mut stack: Vec<Open> = Vec::new();
    let mut capture: Option<Capture> = None;
    let mut out = TeiExtraction::default();
    let mut counter = 0usize;

    let xml_err = |reader: &Reader<R>, message: String| Error::Xml {
        offset: reader.error_position(),
        message,
    };

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(&reader, e.to_string()))?;
        match event {
            Event::Start(e) => {
                let date = attribute(&e, &attr);
                if capture.is_none() && is_container(&e, opts) {
                    counter += 1;
                    capture = Some(Capture {
                        depth: stack.len(),
                        id: element_id(&e).unwrap_or_else(|| format!("{}{counter}", opts.id_prefix)),
                        date: date.clone().or_else(|| inherited(&stack)),
                        parts: Vec::new(),
                    });
                }
                stack.push(Open { date });
            }
            Event::Empty(e) => {
                if capture.is_none() && is_container(&e, opts) {
                    counter += 1;
                    let cap = Capture {
                        depth: stack.len(),
                        id: element_id(&e).unwrap_or_else(|| format!("{}{counter}", opts.id_prefix)),
                        date: attribute(&e, &attr).or_else(|| inherited(&stack)),
                        parts: Vec::new(),
                    };
                    finish(cap, &mut out);
                }
            }
            Event::End(_) => {
                if stack.pop().is_none() {
                    return Err(xml_err(&reader, "unbalanced end tag".into()));
                }
                if capture.as_ref().is_some_and(|c| c.depth == stack.len()) {
                    finish(capture.take().expect("checked"), &mut out);
                }
            }
            Event::Text(t) => {
                if let Some(cap) = capture.as_mut() {
                    let text = t.unescape().map_err(|e| xml_err(&reader, e.to_string()))?;
                    push_part(&mut cap.parts, &text);
                }
            }
            Event::CData(c) => {
                if let Some(cap) = capture.as_mut() {
                    push_part(&mut cap.parts, &String::from_utf8_lossy(&c));
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(Error::Xml {
            offset: reader.buffer_position(),
            message: format!("{} unclosed element(s) at end of input", stack.len()),
        });
    }
    Ok(out)
}

fn push_part(parts: &mut Vec<String>, text: &str) {
    let t = text.trim();
    if !t.is_empty() {
        parts.push(t.to_owned());
    }
}

fn finish(cap: Capture, out: &mut TeiExtraction) {
    match cap.date.as_deref().and_then(parse_year) {
        Some(year) => out.documents.push(Document {
            id: cap.id,
            year,
            text: cap.parts.join(" "),
        }),
        None => {
            out.skipped += 1;
            out.skipped_ids.push(cap.id);
        }
    }
}

fn inherited(stack: &[Open]) -> Option<String> {
    stack.iter().rev().find_map(|o| o.date.clone())
}

fn is_container(e: &BytesStart<'_>, opts: &TeiOptions) -> bool {
    let name = e.local_name();
    std::str::from_utf8(name.as_ref()).is_ok_and(|n| opts.container_tags.contains(n))
}

fn attribute(e: &BytesStart<'_>, key: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.as_ref() == key || a.key.local_name().as_ref() == key)
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

fn element_id(e: &BytesStart<'_>) -> Option<String> {
    attribute(e, b"xml:id").or_else(|| attribute(e, b"id"))
}

/// Accepts `YYYY` or a longer date starting with `YYYY` followed by a non-digit.
fn parse_year(raw: &str) -> Option<i32> {
    let raw = raw.trim();
    let head = raw.get(..4)?;
    if !head.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if raw[4..].chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return None;
    }
    head.parse().ok()
}
