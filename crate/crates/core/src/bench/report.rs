//! Result rows, their CSV form, and a matplotlib script for plotting them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};

/// Column order of the results CSV.
pub const RESULT_HEADER: [&str; 14] = [
    "algorithm",
    "eps",
    "delta",
    "n",
    "n_pub_ratio",
    "seed",
    "step_size",
    "epochs",
    "alpha",
    "clip_c",
    "train_loss",
    "val_loss",
    "test_loss",
    "wall_time_ms",
];

/// One reported `(algorithm, eps, ratio, seed)` result. Hyperparameters an
/// algorithm does not have are `None` and written as empty fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    pub n_pub_ratio: f64,
    pub seed: u64,
    pub step_size: Option<f64>,
    pub epochs: Option<usize>,
    pub alpha: Option<f64>,
    pub clip_c: Option<f64>,
    pub train_loss: f64,
    pub val_loss: f64,
    pub test_loss: f64,
    pub wall_time_ms: f64,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return invalid("no result rows to write");
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.eps.to_string(),
            r.delta.to_string(),
            r.n.to_string(),
            r.n_pub_ratio.to_string(),
            r.seed.to_string(),
            opt(r.step_size),
            opt(r.epochs),
            opt(r.alpha),
            opt(r.clip_c),
            r.train_loss.to_string(),
            r.val_loss.to_string(),
            r.test_loss.to_string(),
            r.wall_time_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn results_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_results_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes the results CSV to `path`.
pub fn emit_csv(rows: &[ResultRow], path: &std::path::Path) -> Result<()> {
    let s = results_csv_string(rows)?;
    std::fs::write(path, s)?;
    Ok(())
}

pub fn parse_results_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if !header.iter().eq(RESULT_HEADER.iter().copied()) {
        return Err(Error::Parse("results header does not match".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| rec.get(j).unwrap_or("").trim();
        let bad = |j: usize| Error::Parse(format!("row {}: bad {} '{}'", i + 1, RESULT_HEADER[j], field(j)));
        let f = |j: usize| field(j).parse::<f64>().map_err(|_| bad(j));
        let of = |j: usize| if field(j).is_empty() { Ok(None) } else { f(j).map(Some) };
        rows.push(ResultRow {
            algorithm: field(0).to_string(),
            eps: f(1)?,
            delta: f(2)?,
            n: field(3).parse().map_err(|_| bad(3))?,
            n_pub_ratio: f(4)?,
            seed: field(5).parse().map_err(|_| bad(5))?,
            step_size: of(6)?,
            epochs: if field(7).is_empty() { None } else { Some(field(7).parse().map_err(|_| bad(7))?) },
            alpha: of(8)?,
            clip_c: of(9)?,
            train_loss: f(10)?,
            val_loss: f(11)?,
            test_loss: f(12)?,
            wall_time_ms: f(13)?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XAxis {
    Ratio,
    Eps,
}

impl std::str::FromStr for XAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(Self::Ratio),
            "eps" => Ok(Self::Eps),
            other => Err(Error::Parse(format!("x axis must be ratio or eps, got '{other}'"))),
        }
    }
}

/// Mean and standard error of the finite values, or `None` when there are none.
pub fn mean_stderr(values: &[f64]) -> Option<(f64, f64)> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

/// Mean test loss and standard error per algorithm and x value.
///
/// With `XAxis::Ratio` the rows are additionally split by epsilon, and vice
/// versa, so each returned series has a single fixed value of the other axis.
pub fn summarize(rows: &[ResultRow], x_axis: XAxis) -> BTreeMap<(String, String), Vec<(f64, f64, f64)>> {
    let mut groups: BTreeMap<(String, String), BTreeMap<u64, (f64, Vec<f64>)>> = BTreeMap::new();
    for r in rows {
        let (x, other) = match x_axis {
            XAxis::Ratio => (r.n_pub_ratio, format!("eps={}", r.eps)),
            XAxis::Eps => (r.eps, format!("ratio={}", r.n_pub_ratio)),
        };
        groups
            .entry((r.algorithm.clone(), other))
            .or_default()
            .entry(x.to_bits())
            .or_insert_with(|| (x, Vec::new()))
            .1
            .push(r.test_loss);
    }
    groups
        .into_iter()
        .map(|(k, pts)| {
            let mut series: Vec<(f64, f64, f64)> = pts
                .into_values()
                .filter_map(|(x, v)| mean_stderr(&v).map(|(m, s)| (x, m, s)))
                .collect();
            series.sort_by(|a, b| a.0.total_cmp(&b.0));
            (k, series)
        })
        .collect()
}

/// A standalone Python script drawing test loss against `x_axis`, one series
/// per algorithm, with standard-error bars over seeds. The data is embedded.
pub fn plot_script(rows: &[ResultRow], x_axis: XAxis) -> Result<String> {
    if rows.is_empty() {
        return invalid("no result rows to plot");
    }
    let summary = summarize(rows, x_axis);
    let panels: Vec<String> = {
        let mut p: Vec<String> = summary.keys().map(|(_, o)| o.clone()).collect();
        p.sort();
        p.dedup();
        p
    };
    let mut s = String::new();
    s.push_str("import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("# panel -> algorithm -> (x, mean test loss, standard error)\nSERIES = {\n");
    for panel in &panels {
        let _ = writeln!(s, "    {panel:?}: {{");
        for ((alg, _), pts) in summary.iter().filter(|((_, o), _)| o == panel) {
            let xs: Vec<String> = pts.iter().map(|p| format!("{:?}", p.0)).collect();
            let ms: Vec<String> = pts.iter().map(|p| format!("{:?}", p.1)).collect();
            let es: Vec<String> = pts.iter().map(|p| format!("{:?}", p.2)).collect();
            let _ = writeln!(s, "        {alg:?}: ([{}], [{}], [{}]),", xs.join(", "), ms.join(", "), es.join(", "));
        }
        s.push_str("    },\n");
    }
    s.push_str("}\n\n");
    let (xlabel, logx) = match x_axis {
        XAxis::Ratio => ("n_pub / n", "False"),
        XAxis::Eps => ("epsilon", "True"),
    };
    let _ = write!(
        s,
        r#"fig, axes = plt.subplots(1, len(SERIES), figsize=(5 * len(SERIES), 4), squeeze=False)
for ax, (panel, algs) in zip(axes[0], SERIES.items()):
    for alg, (x, m, se) in algs.items():
        ax.errorbar(x, m, yerr=se, marker="o", capsize=3, label=alg)
    ax.set_title(panel)
    ax.set_xlabel("{xlabel}")
    ax.set_ylabel("test loss")
    if {logx}:
        ax.set_xscale("log")
    ax.legend()
fig.tight_layout()
fig.savefig("test_loss_vs_{axis}.png", dpi=150)
"#,
        axis = match x_axis {
            XAxis::Ratio => "ratio",
            XAxis::Eps => "eps",
        }
    );
    Ok(s)
}

pub fn emit_plot_script(rows: &[ResultRow], x_axis: XAxis, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, plot_script(rows, x_axis)?)?;
    Ok(())
}
