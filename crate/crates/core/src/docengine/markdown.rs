//! A deliberately small markdown-to-HTML renderer.
//!
//! Block constructs: `#`/`##`/`###` headings, `- ` bullet lists, and
//! paragraphs separated by blank lines. Inline constructs: `**bold**`,
//! `` `code` `` and `[text](url)`. Every character of input text is
//! escaped before any tag is produced; anything unrecognised comes out as
//! escaped literal text.

fn escape_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            other => out.push(other),
        }
    }
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    escape_into(&mut out, text);
    out
}

enum Block<'a> {
    Heading(usize, &'a str),
    List(Vec<&'a str>),
    Paragraph(Vec<&'a str>),
}

fn heading(line: &str) -> Option<(usize, &str)> {
    let level = line.chars().take_while(|&c| c == '#').count();
    if (1..=3).contains(&level) {
        if let Some(rest) = line[level..].strip_prefix(' ') {
            return Some((level, rest.trim()));
        }
    }
    None
}

fn blocks(markdown: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut para: Vec<&str> = Vec::new();
    let mut list: Vec<&str> = Vec::new();

    fn flush<'a>(out: &mut Vec<Block<'a>>, para: &mut Vec<&'a str>, list: &mut Vec<&'a str>) {
        if !para.is_empty() {
            out.push(Block::Paragraph(std::mem::take(para)));
        }
        if !list.is_empty() {
            out.push(Block::List(std::mem::take(list)));
        }
    }

    for raw in markdown.lines() {
        let line = raw.trim_end();
        if line.trim().is_empty() {
            flush(&mut out, &mut para, &mut list);
        } else if let Some((level, text)) = heading(line) {
            flush(&mut out, &mut para, &mut list);
            out.push(Block::Heading(level, text));
        } else if let Some(item) = line.strip_prefix("- ") {
            if !para.is_empty() {
                out.push(Block::Paragraph(std::mem::take(&mut para)));
            }
            list.push(item.trim());
        } else {
            if !list.is_empty() {
                out.push(Block::List(std::mem::take(&mut list)));
            }
            para.push(line.trim());
        }
    }
    flush(&mut out, &mut para, &mut list);
    out
}

/// Renders inline markup in `text` into `out`.
fn inline(out: &mut String, text: &str) {
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix("**") {
            if let Some(end) = after.find("**") {
                if end > 0 {
                    out.push_str("<strong>");
                    inline(out, &after[..end]);
                    out.push_str("</strong>");
                    rest = &after[end + 2..];
                    continue;
                }
            }
        }
        if let Some(after) = rest.strip_prefix('`') {
            if let Some(end) = after.find('`') {
                out.push_str("<code>");
                escape_into(out, &after[..end]);
                out.push_str("</code>");
                rest = &after[end + 1..];
                continue;
            }
        }
        if let Some(after) = rest.strip_prefix('[') {
            if let Some(close) = after.find("](") {
                let label = &after[..close];
                let target = &after[close + 2..];
                if let Some(end) = target.find(')') {
                    if !label.contains('[') {
                        out.push_str("<a href=\"");
                        escape_into(out, &target[..end]);
                        out.push_str("\">");
                        inline(out, label);
                        out.push_str("</a>");
                        rest = &target[end + 1..];
                        continue;
                    }
                }
            }
        }
        let c = rest.chars().next().expect("non-empty");
        let mut buf = [0u8; 4];
        escape_into(out, c.encode_utf8(&mut buf));
        rest = &rest[c.len_utf8()..];
    }
}

pub fn render_html(markdown: &str) -> String {
    let rendered: Vec<String> = blocks(markdown)
        .into_iter()
        .map(|block| {
            let mut out = String::new();
            match block {
                Block::Heading(level, text) => {
                    out.push_str(&format!("<h{level}>"));
                    inline(&mut out, text);
                    out.push_str(&format!("</h{level}>"));
                }
                Block::List(items) => {
                    out.push_str("<ul>");
                    for item in items {
                        out.push_str("<li>");
                        inline(&mut out, item);
                        out.push_str("</li>");
                    }
                    out.push_str("</ul>");
                }
                Block::Paragraph(lines) => {
                    out.push_str("<p>");
                    inline(&mut out, &lines.join("\n"));
                    out.push_str("</p>");
                }
            }
            out
        })
        .collect();
    rendered.join("\n")
}

/// Text up to the first blank line, trimmed.
pub fn first_paragraph(markdown: &str) -> String {
    let mut lines = Vec::new();
    for line in markdown.lines() {
        if line.trim().is_empty() {
            if lines.is_empty() {
                continue;
            }
            break;
        }
        lines.push(line.trim_end());
    }
    lines.join("\n")
}
