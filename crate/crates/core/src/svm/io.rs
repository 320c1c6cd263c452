//! Line-oriented model files.
//!
//! ```text
//! version 1
//! gamma <real>
//! bias <real>
//! dim <int>
//! n_sv <int>
//! mode <unweighted|weighted>
//! C <real>
//! threshold <real|none>
//! n_pos <int>
//! n_neg <int>
//! <coef>\t<x_0>,<x_1>,...      (n_sv lines)
//! ```
//!
//! Reals carry 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::path::Path;

use super::{ModelMeta, SupportVector, SvmModel, TrainDiagnostics};
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_model(model: &SvmModel) -> String {
    let mut out = String::new();
    let m = &model.meta;
    writeln!(out, "version {MODEL_VERSION}").unwrap();
    writeln!(out, "gamma {}", real(model.gamma)).unwrap();
    writeln!(out, "bias {}", real(model.bias)).unwrap();
    writeln!(out, "dim {}", model.dim).unwrap();
    writeln!(out, "n_sv {}", model.support.len()).unwrap();
    writeln!(out, "mode {}", m.mode).unwrap();
    writeln!(out, "C {}", real(m.c)).unwrap();
    match m.threshold {
        Some(t) => writeln!(out, "threshold {}", real(t)).unwrap(),
        None => writeln!(out, "threshold none").unwrap(),
    }
    writeln!(out, "n_pos {}", m.n_pos).unwrap();
    writeln!(out, "n_neg {}", m.n_neg).unwrap();
    for sv in &model.support {
        out.push_str(&real(sv.coef));
        out.push('\t');
        for (k, x) in sv.x.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&real(*x));
        }
        out.push('\n');
    }
    out
}

struct Header<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Header<'a> {
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (idx, line) = self
            .lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("truncated: missing `{key}`")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((idx + 1, v.trim())),
            _ => Err(Error::ModelFormat(format!("line {}: expected `{key}`", idx + 1))),
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, v) = self.field(key)?;
        v.parse()
            .map_err(|_| Error::ModelFormat(format!("line {line}: bad value for `{key}`: {v:?}")))
    }
}

pub fn parse_model(text: &str) -> Result<SvmModel> {
    let mut h = Header {
        lines: text.lines().enumerate(),
    };
    let (_, version) = h.field("version")?;
    if version != MODEL_VERSION.to_string() {
        return Err(Error::ModelVersion {
            found: version.to_string(),
            supported: MODEL_VERSION,
        });
    }
    let gamma: f64 = h.parse("gamma")?;
    let bias: f64 = h.parse("bias")?;
    let dim: usize = h.parse("dim")?;
    let n_sv: usize = h.parse("n_sv")?;
    let mode = h.parse("mode")?;
    let c: f64 = h.parse("C")?;
    let (line, t) = h.field("threshold")?;
    let threshold = match t {
        "none" => None,
        t => Some(
            t.parse()
                .map_err(|_| Error::ModelFormat(format!("line {line}: bad threshold {t:?}")))?,
        ),
    };
    let n_pos: usize = h.parse("n_pos")?;
    let n_neg: usize = h.parse("n_neg")?;

    let mut support = Vec::with_capacity(n_sv);
    for k in 0..n_sv {
        let (idx, line) = h
            .lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("truncated: {k} of {n_sv} support vectors")))?;
        let bad = |msg: &str| Error::ModelFormat(format!("line {}: {msg}", idx + 1));
        let (coef, xs) = line.split_once('\t').ok_or_else(|| bad("expected coef<TAB>values"))?;
        let coef: f64 = coef.parse().map_err(|_| bad("bad coefficient"))?;
        let x = xs
            .split(',')
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad support vector value"))?;
        if x.len() != dim {
            return Err(bad(&format!("support vector has {} values, expected {dim}", x.len())));
        }
        support.push(SupportVector { coef, x });
    }
    if let Some((idx, extra)) = h.lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::ModelFormat(format!(
            "line {}: unexpected trailing content {:?}",
            idx + 1,
            extra.chars().take(20).collect::<String>()
        )));
    }
    Ok(SvmModel {
        gamma,
        bias,
        dim,
        support,
        dual_objective: f64::NAN,
        meta: ModelMeta {
            mode,
            c,
            threshold,
            n_pos,
            n_neg,
        },
        diagnostics: TrainDiagnostics::default(),
    })
}

pub fn save_model(model: &SvmModel, path: &Path) -> Result<()> {
    std::fs::write(path, write_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SvmModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
