//! Table rendering. Every command produces one [`Table`]; the renderers
//! guarantee byte-stable output for fixed inputs, so runs can be diffed and
//! golden-tested. Floats are printed with 17 significant digits, enough to
//! round-trip an IEEE double exactly.

use std::fmt::Write as _;

use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One table cell. `Empty` marks a value that does not exist for the row
/// (CSV: empty field; JSON: null), as opposed to a value of zero.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Str(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn str(s: impl Into<String>) -> Self {
        Cell::Str(s.into())
    }
}

/// A command's full output: reproducibility metadata plus named columns of
/// rows.
pub struct Table {
    metadata: Vec<(&'static str, Cell)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            metadata: vec![
                ("command", Cell::str(command)),
                ("version", Cell::str(env!("CARGO_PKG_VERSION"))),
            ],
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &'static str, value: Cell) {
        self.metadata.push((key, value));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    /// RFC-4180-style CSV: a `# key = value` metadata prelude, a header
    /// row, then one line per row. No cell we emit needs quoting.
    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.metadata {
            let _ = writeln!(out, "# {key} = {}", csv_cell(value));
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_cell).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    /// A single JSON object: `{"metadata": {...}, "columns": [...],
    /// "rows": [[...]]}`.
    fn render_json(&self) -> String {
        let mut metadata = serde_json::Map::new();
        for (key, value) in &self.metadata {
            metadata.insert((*key).to_owned(), json_cell(value));
        }
        let columns: Vec<Value> = self.columns.iter().map(|c| Value::from(*c)).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::from(row.iter().map(json_cell).collect::<Vec<_>>()))
            .collect();
        let mut doc = serde_json::Map::new();
        doc.insert("metadata".to_owned(), Value::Object(metadata));
        doc.insert("columns".to_owned(), Value::from(columns));
        doc.insert("rows".to_owned(), Value::from(rows));

        let mut buf = Vec::new();
        let mut ser =
            serde_json::Serializer::with_formatter(&mut buf, SignificantDigits(CompactFormatter));
        serde::Serialize::serialize(&Value::Object(doc), &mut ser)
            .expect("serializing to an in-memory buffer cannot fail");
        let mut out = String::from_utf8(buf).expect("serializer emits UTF-8");
        out.push('\n');
        out
    }
}

fn float_repr(x: f64) -> String {
    debug_assert!(x.is_finite(), "tables never carry non-finite values");
    format!("{x:.16e}")
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => float_repr(*v),
        Cell::Str(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(cell: &Cell) -> Value {
    match cell {
        Cell::Int(v) => Value::from(*v),
        Cell::Float(v) => Value::from(*v),
        Cell::Str(s) => Value::from(s.as_str()),
        Cell::Bool(b) => Value::from(*b),
        Cell::Empty => Value::Null,
    }
}

/// JSON formatter that prints every float with 17 significant digits so the
/// exact double round-trips through the text form.
struct SignificantDigits<F>(F);

impl<F: Formatter> Formatter for SignificantDigits<F> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: std::io::Write + ?Sized,
    {
        write!(writer, "{value:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec!["n", "value", "label"]);
        t.meta("mean", Cell::Float(1.0));
        t.meta("trials", Cell::Int(42));
        t.row(vec![Cell::Int(0), Cell::Float(0.5), Cell::str("first")]);
        t.row(vec![Cell::Int(1), Cell::Empty, Cell::Bool(true)]);
        t
    }

    #[test]
    fn csv_layout_is_prelude_header_rows() {
        let text = sample().render(Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command = demo");
        assert!(lines[2].starts_with("# mean = 1.0000000000000000e0"));
        assert_eq!(lines[3], "# trials = 42");
        assert_eq!(lines[4], "n,value,label");
        assert_eq!(lines[5], "0,5.0000000000000000e-1,first");
        assert_eq!(lines[6], "1,,true");
    }

    #[test]
    fn json_is_one_object_with_exact_floats() {
        let text = sample().render(Format::Json);
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["metadata"]["command"], "demo");
        assert_eq!(doc["metadata"]["trials"], 42);
        assert_eq!(doc["columns"][1], "value");
        assert_eq!(doc["rows"][0][1], 0.5);
        assert_eq!(doc["rows"][1][1], Value::Null);
        // 17 significant digits appear literally in the text.
        assert!(text.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn float_text_round_trips_the_double() {
        for &x in &[1.0 / 3.0, 5.0 / 3.0, 2.546077525859215e0, 1e-300] {
            let repr = float_repr(x);
            assert_eq!(repr.parse::<f64>().unwrap(), x);
        }
    }
}
