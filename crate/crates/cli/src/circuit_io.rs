//! Line-oriented circuit files.
//!
//! ```text
//! qubits 5
//! params 2
//! X 1
//! RZ 0 $0
//! RY 3 0.25
//! XY 0 1 $1
//! CZ 2 3
//! CU 0 1 ctrl=4 weight=33 matrix=1:0,0:0,...
//! ```
//!
//! One gate per line as `KIND targets params`. A parameter is `$k` (index
//! into the parameter vector) or a literal angle. `CU` carries a row-major
//! matrix of `re:im` entries; `ctrl` and `weight` are optional. Blank
//! lines and `#` comments are ignored.

use std::fmt::Write as _;

use mbl_vqe_core::circuit::{Angle, Circuit, GateKind};
use mbl_vqe_core::linalg::CMatrix;
use mbl_vqe_core::C64;

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn angle_str(a: Angle) -> String {
    match a {
        Angle::Param(k) => format!("${k}"),
        Angle::Fixed(x) => format!("{x}"),
    }
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "qubits {}", c.n_qubits).unwrap();
    writeln!(s, "params {}", c.n_params).unwrap();
    for g in &c.gates {
        let t: Vec<String> = g.targets.iter().map(|q| q.to_string()).collect();
        let t = t.join(" ");
        match g.kind {
            GateKind::PauliX => writeln!(s, "X {t}"),
            GateKind::Rz(a) => writeln!(s, "RZ {t} {}", angle_str(a)),
            GateKind::Ry(a) => writeln!(s, "RY {t} {}", angle_str(a)),
            GateKind::XYEntangler(a) => writeln!(s, "XY {t} {}", angle_str(a)),
            GateKind::CZ => writeln!(s, "CZ {t}"),
            GateKind::ControlledUnitary(k) => {
                let m: Vec<String> = c.unitaries[k]
                    .data
                    .iter()
                    .map(|z| format!("{}:{}", z.re, z.im))
                    .collect();
                write!(s, "CU {t}").unwrap();
                if let Some(ctrl) = g.control {
                    write!(s, " ctrl={ctrl}").unwrap();
                }
                writeln!(s, " weight={} matrix={}", g.noise_weight, m.join(","))
            }
        }
        .unwrap();
    }
    s
}

fn parse_angle(tok: &str, line: usize) -> Result<Angle, ParseError> {
    let err = |msg: String| ParseError { line, msg };
    if let Some(k) = tok.strip_prefix('$') {
        k.parse()
            .map(Angle::Param)
            .map_err(|_| err(format!("bad parameter reference `{tok}`")))
    } else {
        tok.parse()
            .map(Angle::Fixed)
            .map_err(|_| err(format!("bad angle `{tok}`")))
    }
}

fn parse_qubit(tok: &str, line: usize) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| ParseError {
        line,
        msg: format!("bad qubit `{tok}`"),
    })
}

fn parse_matrix(text: &str, line: usize) -> Result<CMatrix, ParseError> {
    let err = |msg: &str| ParseError {
        line,
        msg: msg.to_owned(),
    };
    let entries = text
        .split(',')
        .map(|e| {
            let (re, im) = e.split_once(':').ok_or_else(|| err("matrix entries must be re:im"))?;
            Ok(C64::new(
                re.parse().map_err(|_| err("bad matrix entry"))?,
                im.parse().map_err(|_| err("bad matrix entry"))?,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dim = (entries.len() as f64).sqrt().round() as usize;
    if dim * dim != entries.len() {
        return Err(err("matrix must be square"));
    }
    Ok(CMatrix::from_rows(dim, entries))
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    let mut declared_params = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let err = |msg: String| ParseError { line, msg };
        match toks[0] {
            "qubits" => {
                let n = toks.get(1).ok_or_else(|| err("missing qubit count".into()))?;
                circuit = Some(Circuit::new(parse_qubit(n, line)?));
                continue;
            }
            "params" => {
                let n = toks.get(1).ok_or_else(|| err("missing parameter count".into()))?;
                declared_params = Some(parse_qubit(n, line)?);
                continue;
            }
            _ => {}
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| err("gate before `qubits` header".into()))?;
        let (arity, has_angle) = match toks[0] {
            "X" => (1, false),
            "RZ" | "RY" => (1, true),
            "XY" => (2, true),
            "CZ" => (2, false),
            "CU" => (0, false),
            k => return Err(err(format!("unknown gate `{k}`"))),
        };
        if toks[0] == "CU" {
            let mut targets = Vec::new();
            let (mut ctrl, mut weight, mut matrix) = (None, 0u32, None);
            for t in &toks[1..] {
                if let Some(v) = t.strip_prefix("ctrl=") {
                    ctrl = Some(parse_qubit(v, line)?);
                } else if let Some(v) = t.strip_prefix("weight=") {
                    weight = v.parse().map_err(|_| err(format!("bad weight `{v}`")))?;
                } else if let Some(v) = t.strip_prefix("matrix=") {
                    matrix = Some(parse_matrix(v, line)?);
                } else {
                    targets.push(parse_qubit(t, line)?);
                }
            }
            let m = matrix.ok_or_else(|| err("CU needs matrix=".into()))?;
            if targets.is_empty() || m.dim != 1 << targets.len() {
                return Err(err("CU matrix size does not match its targets".into()));
            }
            c.unitary(targets, ctrl, m, weight);
            continue;
        }
        let expected = 1 + arity + usize::from(has_angle);
        if toks.len() != expected {
            return Err(err(format!("`{}` takes {} fields", toks[0], expected - 1)));
        }
        let q: Vec<usize> = toks[1..=arity]
            .iter()
            .map(|t| parse_qubit(t, line))
            .collect::<Result<_, _>>()?;
        let angle = if has_angle {
            let a = parse_angle(toks[arity + 1], line)?;
            if let Angle::Param(k) = a {
                c.n_params = c.n_params.max(k + 1);
            }
            Some(a)
        } else {
            None
        };
        match toks[0] {
            "X" => c.x(q[0]),
            "RZ" => c.rz(q[0], angle.unwrap()),
            "RY" => c.ry(q[0], angle.unwrap()),
            "XY" => c.xy(q[0], q[1], angle.unwrap()),
            _ => c.cz(q[0], q[1]),
        };
    }
    let mut c = circuit.ok_or(ParseError {
        line: 0,
        msg: "missing `qubits` header".into(),
    })?;
    if let Some(n) = declared_params {
        if n < c.n_params {
            return Err(ParseError {
                line: 0,
                msg: format!("circuit references parameter {} but declares {n}", c.n_params - 1),
            });
        }
        c.n_params = n;
    }
    c.validate().map_err(|e| ParseError {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(c)
}
