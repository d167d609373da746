//! Standalone HTML rendering of a sketch: one column per role section,
//! headed by the role name and its total, fillers listed with counts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{io_err, Result};
use crate::sketch::Sketch;

const STYLE: &str = "body{font-family:sans-serif}\
table{border-collapse:collapse}\
th,td{border:1px solid #999;padding:2px 8px;vertical-align:top}\
th{background:#eee}\
td span.count{color:#666;padding-left:6px}";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Title line: the sense for named sketches, `(anonymous)` otherwise.
pub fn title(sketch: &Sketch) -> String {
    match &sketch.sense {
        Some(sense) => sense.to_string(),
        None => "(anonymous)".to_owned(),
    }
}

pub fn render_html(sketch: &Sketch) -> String {
    let title = escape(&title(sketch));
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(html, "<title>{title}</title>");
    let _ = writeln!(html, "<style>{STYLE}</style>");
    html.push_str("</head>\n<body>\n");
    let _ = writeln!(html, "<h1>{title}</h1>");
    html.push_str("<table class=\"sketch\">\n<tr>");
    for sec in &sketch.sections {
        let _ = write!(
            html,
            "<th>{} <span class=\"total\">{}</span></th>",
            escape(sec.role.as_str()),
            sec.total_count
        );
    }
    html.push_str("</tr>\n");
    let rows = sketch
        .sections
        .iter()
        .map(|s| s.fillers.len())
        .max()
        .unwrap_or(0);
    for row in 0..rows {
        html.push_str("<tr>");
        for sec in &sketch.sections {
            match sec.fillers.get(row) {
                Some(f) => {
                    let _ = write!(
                        html,
                        "<td>{}<span class=\"count\">{}</span></td>",
                        escape(&f.lemma),
                        f.count
                    );
                }
                None => html.push_str("<td></td>"),
            }
        }
        html.push_str("</tr>\n");
    }
    html.push_str("</table>\n</body>\n</html>\n");
    html
}

pub fn render_sketch(sketch: &Sketch, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    fs::write(out, render_html(sketch)).map_err(io_err(out))
}

/// File name for a sketch id. Path separators, `:` and control characters
/// become `_`; a leading dot gets a `_` prefix.
pub fn file_name(sketch_id: &str) -> String {
    let stem: String = sketch_id
        .chars()
        .map(|c| match c {
            '/' | '\\' | ':' | '\0' => '_',
            c if c.is_control() => '_',
            c => c,
        })
        .collect();
    let stem = if stem.starts_with('.') {
        format!("_{stem}")
    } else {
        stem
    };
    format!("{stem}.html")
}
