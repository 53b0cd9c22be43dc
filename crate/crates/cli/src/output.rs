use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the effective configuration.
pub fn config_hash(config_json: &str) -> String {
    format!("{:x}", Sha256::digest(config_json.as_bytes()))
}

/// Rows of numbers under a named header. Floats are written in their
/// shortest round-trip form.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, hash: &str) -> String {
        let mut s = format!("# polyharm {VERSION} config-sha256 {hash}\n");
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

pub struct Plot<'a> {
    pub title: &'a str,
    /// Column numbers (1-based) of the abscissa and each plotted series.
    pub x: usize,
    pub ys: Vec<usize>,
    pub logx: bool,
    pub logy: bool,
}

fn gnuplot_script(csv: &str, table: &Table, plot: &Plot) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{}'", plot.title);
    let _ = writeln!(s, "set xlabel '{}'", table.columns[plot.x - 1]);
    if plot.logx {
        let _ = writeln!(s, "set logscale x");
    }
    if plot.logy {
        let _ = writeln!(s, "set logscale y");
    }
    let series: Vec<String> = plot
        .ys
        .iter()
        .map(|y| format!("'{csv}' using {}:{y} with linespoints", plot.x))
        .collect();
    let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    s
}

/// Heat map of column `z` over the first two columns.
pub fn heat_script(csv: &str, title: &str, z: usize) -> String {
    format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset title '{title}'\n\
         set xlabel 'theta1'\nset ylabel 'theta2'\nset view map\n\
         splot '{csv}' using 1:2:{z} with points palette pointtype 5 notitle\n"
    )
}

pub struct OutDir {
    pub dir: PathBuf,
    pub hash: String,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path, hash: String) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            written: vec![],
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_table(&mut self, stem: &str, table: &Table, plot: Option<Plot>) -> io::Result<PathBuf> {
        let csv = format!("{stem}.csv");
        let path = self.write_text(&csv, &table.render(&self.hash))?;
        if let Some(p) = plot {
            self.write_text(&format!("{stem}.gp"), &gnuplot_script(&csv, table, &p))?;
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![3.0, 0.1 + 0.2]);
        let s = t.render("abc");
        let last = s.lines().last().unwrap();
        assert_eq!(last, "3.0,0.30000000000000004");
        let back: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(back, vec![3.0, 0.1 + 0.2]);
        assert!(s.starts_with("# polyharm "));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
