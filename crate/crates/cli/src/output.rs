use std::io::{self, Write};

use serde_json::{Map, Value};

use crate::config::Format;

/// One output line: a text rendering and the same data as a keyed record.
pub struct Record {
    kind: &'static str,
    fields: Map<String, Value>,
    text: String,
}

impl Record {
    pub fn new(kind: &'static str, text: impl Into<String>) -> Record {
        Record { kind, fields: Map::new(), text: text.into() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Record {
        self.fields.insert(key.to_string(), value.into());
        self
    }
}

/// Writes records to stdout. Keys come out sorted, so records mode is
/// byte-stable for identical inputs.
pub struct Out {
    format: Format,
    sink: io::StdoutLock<'static>,
}

impl Out {
    pub fn new(format: Format) -> Out {
        Out { format, sink: io::stdout().lock() }
    }

    pub fn emit(&mut self, rec: Record) {
        let line = match self.format {
            Format::Text => rec.text,
            Format::Records => {
                let mut m = rec.fields;
                m.insert("kind".into(), Value::from(rec.kind));
                Value::Object(m).to_string()
            }
        };
        // A closed pipe is not worth a panic.
        let _ = writeln!(self.sink, "{line}");
    }
}

pub fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Value {
    Value::Array(items.into_iter().map(|x| Value::from(x.to_string())).collect())
}
