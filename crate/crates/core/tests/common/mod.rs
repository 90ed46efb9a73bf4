//! Shared helpers for the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;

use pathmark_core::{parse_netlist, propagate, Circuit, PhotonState};
use proptest::prelude::*;

const OMEGAS: [f64; 5] = [1.0, 1.6, 2.1, 2.8, 3.4];

#[derive(Clone, Debug)]
pub struct Op {
    kind: u8,
    a: usize,
    b: usize,
    x: f64,
    y: f64,
}

pub fn op() -> impl Strategy<Value = Op> {
    (0u8..4, any::<usize>(), any::<usize>(), 0.0..=1.0f64, 0.0..1.0f64).prop_map(|(kind, a, b, x, y)| Op { kind, a, b, x, y })
}

/// Netlist text for a circuit of up to eight elements grown from one source.
pub fn netlist(ops: &[Op]) -> String {
    let mut live = vec!["s".to_string()];
    let mut text = String::from("source s\n");
    for (i, o) in ops.iter().enumerate() {
        let pick = live[o.a % live.len()].clone();
        match o.kind {
            0 | 1 => {
                let mut ins = vec![pick.clone()];
                if o.kind == 1 && live.len() >= 2 {
                    let others: Vec<&String> = live.iter().filter(|w| **w != pick).collect();
                    ins.push(others[o.b % others.len()].clone());
                }
                live.retain(|w| !ins.contains(w));
                let outs = [format!("w{i}a"), format!("w{i}b")];
                writeln!(text, "bs b{i} in={} out={},{} r={}", ins.join(","), outs[0], outs[1], o.x).unwrap();
                live.extend(outs);
            }
            2 => writeln!(text, "phase p{i} wire={pick} phi={}", o.y * std::f64::consts::TAU).unwrap(),
            _ => writeln!(
                text,
                "eom e{i} wire={pick} omega_ghz={} depth={}",
                OMEGAS[o.b % OMEGAS.len()],
                0.05 * o.x
            )
            .unwrap(),
        }
    }
    for w in &live {
        writeln!(text, "detect {w}").unwrap();
    }
    text
}

pub fn circuit() -> impl Strategy<Value = Circuit> {
    prop::collection::vec(op(), 0..=8).prop_map(|ops| {
        let text = netlist(&ops);
        parse_netlist(&text).unwrap_or_else(|d| panic!("generated netlist rejected: {d:?}\n{text}"))
    })
}

pub fn output(c: &Circuit) -> PhotonState {
    let p = propagate(c, &PhotonState::on_wire(c.source())).unwrap();
    let mut out = PhotonState::empty();
    for d in c.detects() {
        if let Some(s) = p.at(d) {
            for (w, v, a) in s.iter() {
                out.accumulate(w, v.clone(), a);
            }
        }
    }
    out
}

pub fn max_difference(a: &PhotonState, b: &PhotonState) -> f64 {
    let left = a.iter().map(|(w, v, x)| (x - b.amplitude(w, v)).norm());
    let right = b.iter().map(|(w, v, x)| (x - a.amplitude(w, v)).norm());
    left.chain(right).fold(0.0, f64::max)
}
