//! Synthetic linear regression data and the dataset CSV format.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::SplitDataset;
use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;

/// Train/validation/test splits sharing one ground-truth parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct LinRegData {
    pub train: SplitDataset,
    pub val: SplitDataset,
    pub test: SplitDataset,
    pub w_star: Vec<f64>,
}

/// Gaussian linear regression: `x ~ N(0, I_d)`, `w* ~ N(0, I_d)`,
/// `y = <w*, x> + noise_std * N(0, 1)`, so the Bayes squared error is `noise_std^2`.
///
/// `max(1, round(ratio_pub * n_train))` training samples, chosen uniformly,
/// are flagged public; validation and test samples are all flagged public.
/// Features, targets and the flag draw use separate streams, so changing the
/// ratio leaves the samples themselves unchanged.
pub fn gen_linreg(d: usize, n_train: usize, n_val: usize, n_test: usize, noise_std: f64, ratio_pub: f64, stream: &RngStream) -> Result<LinRegData> {
    if !(ratio_pub > 0.0 && ratio_pub <= 1.0) {
        return invalid(format!("public ratio must lie in (0, 1], got {ratio_pub}"));
    }
    if d == 0 || n_train == 0 || n_val == 0 || n_test == 0 {
        return invalid("dimension and split sizes must be at least 1");
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return invalid(format!("noise std must be finite and nonnegative, got {noise_std}"));
    }
    let mut rng = stream.child(0).rng();
    let w_star: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut split = |n: usize| -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y = x
            .chunks_exact(d)
            .map(|row| {
                let z: f64 = StandardNormal.sample(&mut rng);
                row.iter().zip(&w_star).map(|(a, b)| a * b).sum::<f64>() + noise_std * z
            })
            .collect();
        (x, y)
    };
    let (xt, yt) = split(n_train);
    let (xv, yv) = split(n_val);
    let (xs, ys) = split(n_test);

    let n_pub = ((ratio_pub * n_train as f64).round() as usize).clamp(1, n_train);
    let mut flags = vec![true; n_train];
    let mut flag_rng = stream.child(1).rng();
    for i in index::sample(&mut flag_rng, n_train, n_pub) {
        flags[i] = false;
    }
    Ok(LinRegData {
        train: SplitDataset::from_flat(d, xt, flags, Some(yt))?,
        val: SplitDataset::from_flat(d, xv, vec![false; n_val], Some(yv))?,
        test: SplitDataset::from_flat(d, xs, vec![false; n_test], Some(ys))?,
        w_star,
    })
}

/// Writes the dataset CSV: header `public,f0,...,f{d-1}[,y]`, one row per sample.
pub fn write_dataset_csv<W: Write>(data: &SplitDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["public".to_string()];
    header.extend((0..data.dim()).map(|j| format!("f{j}")));
    if data.targets().is_some() {
        header.push("y".into());
    }
    w.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec = vec![if data.is_private(i) { "0" } else { "1" }.to_string()];
        rec.extend(data.sample(i).iter().map(|v| v.to_string()));
        if let Some(y) = data.target(i) {
            rec.push(y.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(input: R) -> Result<SplitDataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("public") {
        return Err(Error::Parse("first column must be 'public'".into()));
    }
    let has_y = header.iter().last() == Some("y");
    let d = header.len() - 1 - usize::from(has_y);
    for (j, name) in header.iter().skip(1).take(d).enumerate() {
        if name != format!("f{j}") {
            return Err(Error::Parse(format!("expected column f{j}, found '{name}'")));
        }
    }
    let (mut features, mut flags, mut targets) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: bad number '{s}': {e}", line + 1)))
        };
        match rec.get(0).map(str::trim) {
            Some("1") => flags.push(false),
            Some("0") => flags.push(true),
            other => return Err(Error::Parse(format!("row {}: public flag must be 0 or 1, got {other:?}", line + 1))),
        }
        for j in 0..d {
            features.push(num(&rec[j + 1])?);
        }
        if has_y {
            targets.push(num(&rec[d + 1])?);
        }
    }
    SplitDataset::from_flat(d, features, flags, has_y.then_some(targets))
}

pub fn load_dataset(path: &Path) -> Result<SplitDataset> {
    read_dataset_csv(std::fs::File::open(path)?)
}

pub fn save_dataset(data: &SplitDataset, path: &Path) -> Result<()> {
    write_dataset_csv(data, std::fs::File::create(path)?)
}
