//! Gnuplot scripts for the CSV artifacts. Scripts are only written, never run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Every CSV layout the tool writes, keyed by its column line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Dispersion,
    Evolve,
    Dispersive,
    Zitter,
    Scatter,
    Maxwell,
    Boost,
}

impl PlotKind {
    pub const ALL: [PlotKind; 7] = [
        PlotKind::Dispersion,
        PlotKind::Evolve,
        PlotKind::Dispersive,
        PlotKind::Zitter,
        PlotKind::Scatter,
        PlotKind::Maxwell,
        PlotKind::Boost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Dispersion => "dispersion",
            PlotKind::Evolve => "evolve",
            PlotKind::Dispersive => "dispersive",
            PlotKind::Zitter => "zitter",
            PlotKind::Scatter => "scatter",
            PlotKind::Maxwell => "maxwell",
            PlotKind::Boost => "boost",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::Dispersion => &["k", "omega", "v", "D"],
            PlotKind::Evolve => &["t", "norm", "mean_x", "variance"],
            PlotKind::Dispersive => &["t", "l2_error", "overlap"],
            PlotKind::Zitter => &["t", "x_total", "x_plus", "x_minus", "x_int"],
            PlotKind::Scatter => &["phi", "R", "T", "k_prime", "v_transmitted", "regime"],
            PlotKind::Maxwell => &["kx", "ky", "kz", "omega", "c", "tilt"],
            PlotKind::Boost => &["k_in", "beta", "omega", "k", "Omega", "K", "onshell_residual"],
        }
    }

    /// Layout whose column line is exactly `line`.
    pub fn detect(line: &str) -> Option<Self> {
        let cols: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        PlotKind::ALL.into_iter().find(|k| k.columns() == cols.as_slice())
    }

    fn body(self) -> &'static str {
        match self {
            PlotKind::Dispersion => {
                "set xlabel 'k'\nset ylabel 'omega(k)'\nset y2label 'v(k)'\nset y2tics\nset key top left\n\
                 plot DATA using 1:2 with lines lw 2 title 'omega', \\\n     \
                 DATA using 1:(-$2) with lines lw 2 dt 2 title '-omega', \\\n     \
                 DATA using 1:3 axes x1y2 with lines title 'v'\n"
            }
            PlotKind::Evolve => {
                "set multiplot layout 2,1\nset xlabel 't'\nset ylabel '<x>'\n\
                 plot DATA using 1:3 with lines lw 2 notitle\nset ylabel 'variance'\n\
                 plot DATA using 1:4 with lines lw 2 notitle\nunset multiplot\n"
            }
            PlotKind::Dispersive => {
                "set xlabel 't'\nset ylabel 'error'\nset logscale y\nset format y '10^{%L}'\n\
                 plot DATA using 1:2 with linespoints title '||psi - psi_disp||', \\\n     \
                 DATA using 1:(1-$3+1e-300) with linespoints title '1 - overlap'\n"
            }
            PlotKind::Zitter => {
                "set xlabel 't'\nset ylabel 'x(t)'\nset key top left\n\
                 plot DATA using 1:2 with lines lw 2 title 'x', \\\n     \
                 DATA using 1:($3+$4) with lines dt 2 title 'x_+ + x_-', \\\n     \
                 DATA using 1:5 with lines title 'x_{int}'\n"
            }
            PlotKind::Scatter => {
                "set xlabel 'phi'\nset ylabel 'probability'\nset yrange [-0.05:1.05]\nset key center right\n\
                 plot DATA using 1:2 with linespoints pt 7 title 'R', \\\n     \
                 DATA using 1:3 with linespoints pt 5 title 'T'\n"
            }
            PlotKind::Maxwell => {
                "set xlabel '|k|'\nset ylabel 'c(k)'\nset y2label 'tilt (rad)'\nset y2tics\n\
                 plot DATA using (sqrt($1**2+$2**2+$3**2)):5 with points pt 7 ps 0.4 title 'c', \\\n     \
                 DATA using (sqrt($1**2+$2**2+$3**2)):6 axes x1y2 with points pt 6 ps 0.4 title 'tilt'\n"
            }
            PlotKind::Boost => {
                "set xlabel 'k'\nset ylabel 'omega'\nset key top left\n\
                 plot DATA using 4:3 with points pt 7 title 'boosted points'\n"
            }
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "klein-scan" {
            return Ok(PlotKind::Scatter);
        }
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown plot kind `{s}`"))
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum PlotError {
    UnknownSchema(String),
    /// The requested kind does not match the file's columns.
    KindMismatch { requested: PlotKind, found: String },
}

impl fmt::Display for PlotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlotError::UnknownSchema(cols) => write!(f, "unknown CSV schema `{cols}`"),
            PlotError::KindMismatch { requested, found } => {
                write!(f, "plot kind `{requested}` does not match columns `{found}`")
            }
        }
    }
}

impl std::error::Error for PlotError {}

/// First line that is not a `#` comment.
pub fn column_line(csv: &str) -> Option<&str> {
    csv.lines().find(|l| !l.starts_with('#'))
}

/// Gnuplot script for `csv`, whose path is embedded so the script runs
/// from anywhere.
pub fn plot_script(csv: &str, csv_path: &Path, kind: Option<PlotKind>) -> Result<(PlotKind, String), PlotError> {
    let cols = column_line(csv).unwrap_or("");
    let found = PlotKind::detect(cols).ok_or_else(|| PlotError::UnknownSchema(cols.to_string()))?;
    if let Some(requested) = kind {
        if requested != found {
            return Err(PlotError::KindMismatch {
                requested,
                found: cols.to_string(),
            });
        }
    }
    let png = csv_path.with_extension("png");
    let quote = |p: &Path| p.display().to_string().replace('\\', "\\\\").replace('"', "\\\"");
    let script = format!(
        "# gnuplot script for a `{kind}` table\n\
         DATA = \"{data}\"\n\
         set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,600\n\
         set output \"{png}\"\n\
         set grid\n{body}",
        kind = found,
        data = quote(csv_path),
        png = quote(&png),
        body = found.body(),
    );
    Ok((found, script))
}

/// Path of the script written next to `csv_path`.
pub fn script_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("gp")
}
