//! Report headers and atomic output.

use std::io::Write;
use std::path::Path;

use algotherm::{Error, Machine, Result};
use serde_json::{json, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun a command: tool version, machine identity and
/// spec, precision, seed, schedule and the parsed arguments.
pub struct Header {
    pub command: &'static str,
    pub machine: Option<Value>,
    pub precision: Option<u32>,
    pub seed: Option<u64>,
    pub schedule: Option<String>,
    pub args: Value,
}

impl Header {
    pub fn new(command: &'static str, args: Value) -> Self {
        Header { command, machine: None, precision: None, seed: None, schedule: None, args }
    }

    pub fn machine(mut self, m: &Machine) -> Self {
        let spec: Value = serde_json::from_str(&m.spec().to_json()).expect("spec serializes");
        self.machine = Some(json!({ "name": m.name(), "hash": m.id(), "spec": spec }));
        self
    }

    pub fn precision(mut self, p: u32) -> Self {
        self.precision = Some(p);
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seed = Some(s);
        self
    }

    pub fn schedule(mut self, s: String) -> Self {
        self.schedule = Some(s);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": "algotherm",
            "version": TOOL_VERSION,
            "command": self.command,
            "machine": self.machine,
            "precision": self.precision,
            "seed": self.seed,
            "schedule": self.schedule,
            "args": self.args,
        })
    }

    /// `# key=value` lines for CSV output.
    pub fn csv_lines(&self) -> String {
        let mut out = format!("# algotherm {} {}\n", TOOL_VERSION, self.command);
        if let Some(m) = &self.machine {
            out.push_str(&format!("# machine={} hash={}\n", m["name"].as_str().unwrap_or(""), m["hash"].as_str().unwrap_or("")));
            out.push_str(&format!("# spec={}\n", m["spec"]));
        }
        let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "# precision={} seed={} schedule={}\n",
            opt(self.precision.map(|p| p.to_string())),
            opt(self.seed.map(|s| s.to_string())),
            opt(self.schedule.clone())
        ));
        out.push_str(&format!("# args={}\n", self.args));
        out
    }
}

pub fn json_report(header: &Header, body: Value) -> String {
    let mut v = json!({ "header": header.to_json() });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
    s.push('\n');
    s
}

/// Write to `path` through a temporary file in the same directory and a
/// rename; `None` writes to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}
