//! Output directories: config echo, data files and plot scripts.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

pub struct Output {
    dir: PathBuf,
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a T,
}

impl Output {
    pub fn new(dir: PathBuf) -> Self {
        Output { dir }
    }

    pub fn write(&self, name: &str, content: &str) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    /// Echo the resolved configuration with a version stamp.
    pub fn config<T: Serialize>(&self, command: &str, cfg: &T) -> Result<()> {
        self.json("config.json", &Echo { command, version: env!("CARGO_PKG_VERSION"), config: cfg })
    }

    pub fn plot(&self, body: &str) -> Result<()> {
        let script = format!(
            "# Render the CSV files of this directory: python3 plot.py\n\
             import csv, os\n\
             import matplotlib\n\
             matplotlib.use(\"Agg\")\n\
             import matplotlib.pyplot as plt\n\
             here = os.path.dirname(os.path.abspath(__file__))\n\n\
             def load(name):\n    \
                 with open(os.path.join(here, name)) as f:\n        \
                     rows = list(csv.DictReader(f))\n    \
                 return {{k: [float(r[k]) for r in rows] for k in rows[0]}}\n\n\
             {body}"
        );
        self.write("plot.py", &script)
    }
}

/// Script plotting `y` columns against `x` from each CSV; `log` picks the log axes.
pub fn curves_script(files: &[String], x: &str, ys: &[&str], log: (bool, bool), out: &str) -> String {
    let mut s = String::from("fig, ax = plt.subplots()\n");
    for f in files {
        s.push_str(&format!("d = load({f:?})\n"));
        for y in ys {
            s.push_str(&format!("ax.plot(d[{x:?}], d[{y:?}], label={:?})\n", format!("{f} {y}")));
        }
    }
    if log.0 {
        s.push_str("ax.set_xscale(\"log\")\n");
    }
    if log.1 {
        s.push_str("ax.set_yscale(\"log\")\n");
    }
    s.push_str(&format!(
        "ax.set_xlabel({x:?})\nax.legend(fontsize=7)\nfig.savefig(os.path.join(here, {out:?}), dpi=150)\n"
    ));
    s
}
