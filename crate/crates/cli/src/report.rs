//! JSON reports. Floats are written with 17 significant digits so every value
//! parses back to the same bits.

use std::io::{self, Write};

use mcorder::Tolerances;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

pub const VERSION: &str = concat!("mcorder ", env!("CARGO_PKG_VERSION"));

pub struct Report {
    fields: Map<String, Value>,
}

impl Report {
    pub fn new<A: Serialize>(command: &str, args: &A, inputs: Vec<Value>) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), json!({ "name": command, "args": args }));
        fields.insert("inputs".into(), Value::Array(inputs));
        Self { fields }
    }

    pub fn finish(mut self, result: Value, tolerances: Value) -> Value {
        self.fields.insert("result".into(), result);
        self.fields.insert("tolerances".into(), tolerances);
        self.fields.insert("version".into(), json!(VERSION));
        Value::Object(self.fields)
    }
}

pub fn default_tolerances() -> Value {
    json!(Tolerances::default())
}

/// Pretty printing with `{:.16e}` floats.
struct Exact<'a>(PrettyFormatter<'a>);

impl Formatter for Exact<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // normalizes −0
        let value = if value == 0.0 { 0.0 } else { value };
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_text(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Exact(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}
