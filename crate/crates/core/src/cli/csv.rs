//! CSV output: a `#` version line, the column header, rows, then optional
//! `# key=value` footer lines.

pub const HEADER: &str = "# rotodec-csv v1";

/// Fixed-width scientific notation; infinities print as `inf`, NaN as `nan`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_owned() } else { "-inf".to_owned() }
    } else {
        format!("{x:.16e}")
    }
}

pub struct CsvBuilder {
    writer: csv::Writer<Vec<u8>>,
    footer: Vec<String>,
}

impl CsvBuilder {
    pub fn new(columns: &[&str]) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(HEADER.as_bytes());
        buf.push(b'\n');
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        writer.write_record(columns).expect("in-memory write");
        Self { writer, footer: Vec::new() }
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, cells: &[S]) {
        self.writer.write_record(cells).expect("in-memory write");
    }

    pub fn comment(&mut self, key: &str, value: &str) {
        self.footer.push(format!("# {key}={value}\n"));
    }

    pub fn finish(self) -> String {
        let mut buf = self.writer.into_inner().expect("in-memory flush");
        for line in self.footer {
            buf.extend_from_slice(line.as_bytes());
        }
        String::from_utf8(buf).expect("utf-8 output")
    }
}
