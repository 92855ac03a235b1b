//! Number formatting and report rendering.

use std::fmt::Write as _;

/// `%.9g`-style rendering: nine significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-4, 1e9)`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub value: String,
    pub unit: &'static str,
    /// Reference value for this quantity, when there is one.
    pub reference: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub title: String,
    pub rows: Vec<Row>,
}

impl Section {
    pub fn new(title: impl Into<String>) -> Self {
        Section {
            title: title.into(),
            rows: Vec::new(),
        }
    }

    pub fn num(
        &mut self,
        quantity: impl Into<String>,
        value: f64,
        unit: &'static str,
    ) -> &mut Self {
        self.push(quantity, sig9(value), unit, None)
    }

    pub fn num_ref(
        &mut self,
        quantity: impl Into<String>,
        value: f64,
        unit: &'static str,
        reference: &'static str,
    ) -> &mut Self {
        self.push(quantity, sig9(value), unit, Some(reference))
    }

    pub fn text(&mut self, quantity: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.push(quantity, value.into(), "", None)
    }

    pub fn push(
        &mut self,
        quantity: impl Into<String>,
        value: String,
        unit: &'static str,
        reference: Option<&'static str>,
    ) -> &mut Self {
        self.rows.push(Row {
            quantity: quantity.into(),
            value,
            unit,
            reference,
        });
        self
    }
}

/// Either key/value sections or a table; rendered as text or CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Sections(Vec<Section>),
    Table {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub blocks: Vec<Block>,
}

impl Document {
    pub fn sections(sections: Vec<Section>) -> Self {
        Document {
            blocks: vec![Block::Sections(sections)],
        }
    }

    pub fn append(&mut self, other: Document) {
        self.blocks.extend(other.blocks);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            match (block, format) {
                (Block::Sections(s), OutputFormat::Text) => render_sections_text(s, &mut out),
                (Block::Sections(s), OutputFormat::Csv) => render_sections_csv(s, &mut out),
                (Block::Table { header, rows }, OutputFormat::Csv) => {
                    render_table_csv(header, rows, &mut out)
                }
                (Block::Table { header, rows }, OutputFormat::Text) => {
                    render_table_text(header, rows, &mut out)
                }
            }
        }
        out
    }
}

fn render_sections_text(sections: &[Section], out: &mut String) {
    let width = sections
        .iter()
        .flat_map(|s| s.rows.iter().map(|r| r.quantity.chars().count()))
        .max()
        .unwrap_or(0);
    for (i, section) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "== {} ==", section.title);
        for r in &section.rows {
            let pad = width - r.quantity.chars().count();
            let mut line = format!("{}{}  {}", r.quantity, " ".repeat(pad), r.value);
            if !r.unit.is_empty() {
                line.push(' ');
                line.push_str(r.unit);
            }
            if let Some(reference) = r.reference {
                let _ = write!(line, "    (reference: {reference})");
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_sections_csv(sections: &[Section], out: &mut String) {
    out.push_str("section,quantity,value,unit,reference\n");
    for s in sections {
        for r in &s.rows {
            let fields = [
                s.title.as_str(),
                r.quantity.as_str(),
                r.value.as_str(),
                r.unit,
                r.reference.unwrap_or(""),
            ];
            let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
    }
}

fn render_table_csv(header: &[String], rows: &[Vec<String>], out: &mut String) {
    for line in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let fields: Vec<String> = line.iter().map(|f| csv_field(f)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
}

fn render_table_text(header: &[String], rows: &[Vec<String>], out: &mut String) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    for line in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
}
