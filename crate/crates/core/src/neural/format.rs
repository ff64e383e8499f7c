//! Versioned plain-text model files.
//!
//! ```text
//! riskspread-model 1
//! layers 3 3 1
//! activations tanh identity
//! input_scaling <scale> <shift>      # one line per input
//! output_scaling <scale> <shift>
//! weights <layer> <rows> <cols>
//! <row of cols values>               # rows lines, bias last
//! end
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same bits.

use std::fmt::Write as _;

use super::model::{Activation, Affine, NetworkModel};
use super::{NeuralError, Result};

pub const FORMAT_HEADER: &str = "riskspread-model 1";

pub fn write_model(model: &NetworkModel) -> String {
    let mut out = String::new();
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "{FORMAT_HEADER}").unwrap();
    let sizes: Vec<String> = model.layer_sizes.iter().map(|s| s.to_string()).collect();
    writeln!(out, "layers {}", sizes.join(" ")).unwrap();
    writeln!(out, "activations {} {}", model.hidden.name(), model.output.name()).unwrap();
    for a in &model.input_scaling {
        writeln!(out, "input_scaling {} {}", a.scale, a.shift).unwrap();
    }
    writeln!(
        out,
        "output_scaling {} {}",
        model.output_scaling.scale, model.output_scaling.shift
    )
    .unwrap();
    for (l, w) in model.weights.iter().enumerate() {
        let cols = model.layer_sizes[l] + 1;
        let rows = model.layer_sizes[l + 1];
        writeln!(out, "weights {l} {rows} {cols}").unwrap();
        for r in 0..rows {
            writeln!(out, "{}", join(&w[r * cols..(r + 1) * cols])).unwrap();
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Ok(l.split_whitespace().collect());
            }
        }
        Err(self.err("unexpected end of file"))
    }

    fn err(&self, message: &str) -> NeuralError {
        NeuralError::Parse {
            line: self.line,
            message: message.to_string(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let tokens = self.next()?;
        if tokens.first() != Some(&key) {
            return Err(self.err(&format!("expected `{key}`")));
        }
        Ok(tokens[1..].to_vec())
    }

    fn numbers<T: std::str::FromStr>(&self, tokens: &[&str]) -> Result<Vec<T>> {
        tokens
            .iter()
            .map(|t| t.parse().map_err(|_| self.err(&format!("bad number `{t}`"))))
            .collect()
    }
}

pub fn read_model(text: &str) -> Result<NetworkModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next()?.join(" ");
    if header != FORMAT_HEADER {
        return Err(lines.err(&format!("unsupported header `{header}`")));
    }
    let tokens = lines.keyed("layers")?;
    let sizes: Vec<usize> = lines.numbers(&tokens)?;
    if sizes.len() < 2 {
        return Err(lines.err("need at least two layers"));
    }
    let acts = lines.keyed("activations")?;
    if acts.len() != 2 {
        return Err(lines.err("expected two activations"));
    }
    let act = |name: &str| Activation::from_name(name).ok_or_else(|| lines.err("unknown activation"));
    let (hidden, output) = (act(acts[0])?, act(acts[1])?);

    let mut input_scaling = Vec::with_capacity(sizes[0]);
    for _ in 0..sizes[0] {
        let t = lines.keyed("input_scaling")?;
        let v: Vec<f64> = lines.numbers(&t)?;
        if v.len() != 2 {
            return Err(lines.err("scaling needs scale and shift"));
        }
        input_scaling.push(Affine { scale: v[0], shift: v[1] });
    }
    let t = lines.keyed("output_scaling")?;
    let v: Vec<f64> = lines.numbers(&t)?;
    if v.len() != 2 {
        return Err(lines.err("scaling needs scale and shift"));
    }
    let output_scaling = Affine { scale: v[0], shift: v[1] };

    let mut weights = Vec::with_capacity(sizes.len() - 1);
    for l in 0..sizes.len() - 1 {
        let t = lines.keyed("weights")?;
        let dims: Vec<usize> = lines.numbers(&t)?;
        if dims != [l, sizes[l + 1], sizes[l] + 1] {
            return Err(lines.err("weight block shape does not match layers"));
        }
        let mut w = Vec::with_capacity(dims[1] * dims[2]);
        for _ in 0..dims[1] {
            let row = lines.next()?;
            if row.len() != dims[2] {
                return Err(lines.err("weight row has wrong length"));
            }
            w.extend(lines.numbers::<f64>(&row)?);
        }
        weights.push(w);
    }
    if lines.next()? != ["end"] {
        return Err(lines.err("expected `end`"));
    }
    NetworkModel::new(sizes, weights, hidden, output, input_scaling, output_scaling)
}
