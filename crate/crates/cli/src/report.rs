//! Append-only, line-oriented `key=value` reports.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

pub struct Report {
    sinks: Vec<Box<dyn Write>>,
}

impl Report {
    pub fn new(sinks: Vec<Box<dyn Write>>) -> Self {
        Report { sinks }
    }

    /// Stdout, plus `path` opened for appending.
    pub fn stdout_and(path: Option<&Path>) -> io::Result<Self> {
        let mut sinks: Vec<Box<dyn Write>> = vec![Box::new(io::stdout())];
        if let Some(p) = path {
            sinks.push(Box::new(OpenOptions::new().create(true).append(true).open(p)?));
        }
        Ok(Report { sinks })
    }

    pub fn line(&mut self, s: impl AsRef<str>) -> io::Result<()> {
        for w in &mut self.sinks {
            writeln!(w, "{}", s.as_ref())?;
        }
        Ok(())
    }

    pub fn lines<I: IntoIterator<Item = String>>(&mut self, it: I) -> io::Result<()> {
        for l in it {
            self.line(l)?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        for w in &mut self.sinks {
            w.flush()?;
        }
        Ok(())
    }
}

/// `[a,b,c]` with no spaces.
pub fn list<T: std::fmt::Display>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}
