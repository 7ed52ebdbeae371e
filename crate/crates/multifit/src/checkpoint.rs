//! Plain-text network checkpoints.
//!
//! ```text
//! multifit-network 1
//! layers <L>
//! shortcut none | shortcut <from> <to> <pre|post>
//! layer <in> <out> <activation>      (then, per layer:)
//! <out lines of <in> weights>
//! <one line of <out> biases>
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so writing and reading
//! back reproduces every parameter exactly.

use std::fmt::Write as _;
use std::path::Path;

use multifit_core::network::{Activation, DenseLayer, Network, Shortcut, ShortcutPlacement};
use multifit_core::Matrix;

use crate::error::{Error, Result};
use crate::io::{read_bytes, write_bytes};

const HEADER: &str = "multifit-network 1";

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:?}").expect("writing to a String");
    }
    s
}

pub fn to_text(net: &Network) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "layers {}", net.layers().len()).unwrap();
    match net.shortcut() {
        None => writeln!(out, "shortcut none").unwrap(),
        Some(s) => writeln!(out, "shortcut {} {} {}", s.from, s.to, s.placement.name()).unwrap(),
    }
    for l in net.layers() {
        writeln!(
            out,
            "layer {} {} {}",
            l.in_dim(),
            l.out_dim(),
            l.activation().name()
        )
        .unwrap();
        for row in l.weights().row_iter() {
            writeln!(out, "{}", join(row)).unwrap();
        }
        writeln!(out, "{}", join(l.bias())).unwrap();
    }
    out
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Core(multifit_core::Error::Format(format!(
        "checkpoint line {line}: {msg}"
    )))
}

pub fn from_text(text: &str) -> Result<Network> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| bad(0, format!("missing {what}")))
    };

    let (n, header) = next("header")?;
    if header != HEADER {
        return Err(bad(n, format!("expected '{HEADER}'")));
    }
    let (n, l) = next("layer count")?;
    let count: usize = l
        .strip_prefix("layers ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(n, "expected 'layers <count>'"))?;
    let (n, l) = next("shortcut")?;
    let parts: Vec<&str> = l.split_whitespace().collect();
    let shortcut = match parts.as_slice() {
        ["shortcut", "none"] => None,
        ["shortcut", from, to, placement] => Some(Shortcut {
            from: from.parse().map_err(|e| bad(n, e))?,
            to: to.parse().map_err(|e| bad(n, e))?,
            placement: ShortcutPlacement::from_name(placement)
                .ok_or_else(|| bad(n, "unknown placement"))?,
        }),
        _ => {
            return Err(bad(
                n,
                "expected 'shortcut none' or 'shortcut <from> <to> <pre|post>'",
            ))
        }
    };
    let numbers = |n: usize, line: &str, expected: usize| -> Result<Vec<f64>> {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| bad(n, e)))
            .collect::<Result<_>>()?;
        if v.len() != expected {
            return Err(bad(
                n,
                format!("expected {expected} numbers, found {}", v.len()),
            ));
        }
        Ok(v)
    };
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = next("layer header")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let ["layer", i, o, act] = parts.as_slice() else {
            return Err(bad(n, "expected 'layer <in> <out> <activation>'"));
        };
        let (i, o): (usize, usize) = (
            i.parse().map_err(|e| bad(n, e))?,
            o.parse().map_err(|e| bad(n, e))?,
        );
        let act = Activation::from_name(act).ok_or_else(|| bad(n, "unknown activation"))?;
        let mut w = Vec::with_capacity(i * o);
        for _ in 0..o {
            let (n, l) = next("weights")?;
            w.extend(numbers(n, l, i)?);
        }
        let (n, l) = next("biases")?;
        let b = numbers(n, l, o)?;
        layers.push(DenseLayer::new(Matrix::from_vec(o, i, w)?, b, act)?);
    }
    Ok(Network::new(layers, shortcut)?)
}

pub fn save(path: &Path, net: &Network) -> Result<()> {
    write_bytes(path, to_text(net).as_bytes())
}

pub fn load(path: &Path) -> Result<Network> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|e| bad(0, e))?;
    from_text(&text).map_err(|e| match e {
        Error::Core(c) => Error::in_file(path, c),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use multifit_core::network::{init_network, Architecture};

    #[test]
    fn roundtrip_is_exact() {
        for arch in [Architecture::Mlp, Architecture::Residual] {
            let net = init_network(arch, &arch.default_dims(7), 3).unwrap();
            let back = from_text(&to_text(&net)).unwrap();
            assert_eq!(back, net);
        }
        let post = init_network(Architecture::Residual, &[3, 4, 4, 2], 1)
            .unwrap()
            .with_shortcut_placement(ShortcutPlacement::PostActivation);
        assert_eq!(from_text(&to_text(&post)).unwrap(), post);
    }

    #[test]
    fn rejects_malformed() {
        let net = init_network(Architecture::Mlp, &[2, 2, 2], 0).unwrap();
        let text = to_text(&net);
        assert!(from_text(&text.replace("multifit-network 1", "other")).is_err());
        let truncated: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(from_text(&truncated).is_err());
        assert!(from_text(&text.replacen("layer 2 2 sigmoid", "layer 2 3 sigmoid", 1)).is_err());
    }
}
