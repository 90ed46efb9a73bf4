use std::collections::BTreeMap;

use super::circuit::{Circuit, Draft};
use super::diagnostics::{DiagCode, Diagnostic, Span};
use crate::elements::{BeamSplitterSpec, BlockSpec, Element, EomSpec, PhaseShifterSpec, DEFAULT_EOM_ORDER};

struct Token<'a> {
    text: &'a str,
    span: Span,
}

fn tokenize(line: &str, lineno: usize) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices().chain(std::iter::once((code.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                let col = code[..s].chars().count() + 1;
                out.push(Token { text: &code[s..i], span: Span::new(lineno, col) });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Key=value arguments of one line.
struct Args<'a> {
    values: BTreeMap<&'a str, (&'a str, Span)>,
    line_span: Span,
}

impl<'a> Args<'a> {
    fn collect(tokens: &[Token<'a>], allowed: &[&str], line_span: Span, diags: &mut Vec<Diagnostic>) -> Self {
        let mut values = BTreeMap::new();
        for t in tokens {
            let Some((k, v)) = t.text.split_once('=') else {
                diags.push(Diagnostic::new(DiagCode::Arity, t.span, format!("unexpected argument `{}`", t.text)));
                continue;
            };
            if !allowed.contains(&k) {
                diags.push(Diagnostic::new(DiagCode::UnknownKey, t.span, format!("unknown key `{k}`")));
                continue;
            }
            if values.insert(k, (v, t.span)).is_some() {
                diags.push(Diagnostic::new(DiagCode::Arity, t.span, format!("key `{k}` given twice")));
            }
        }
        Self { values, line_span }
    }

    fn required(&self, key: &str, diags: &mut Vec<Diagnostic>) -> Option<(&'a str, Span)> {
        let v = self.values.get(key).copied();
        if v.is_none() {
            diags.push(Diagnostic::new(DiagCode::MissingKey, self.line_span, format!("missing `{key}=`")));
        }
        v
    }

    fn float(&self, key: &str, diags: &mut Vec<Diagnostic>) -> Option<f64> {
        let (v, sp) = self.required(key, diags)?;
        parse_float(v, sp, diags)
    }

    fn wires(&self, key: &str, diags: &mut Vec<Diagnostic>) -> Option<Vec<String>> {
        let (v, sp) = self.required(key, diags)?;
        let ws: Vec<&str> = v.split(',').collect();
        if let Some(bad) = ws.iter().find(|w| !is_ident(w)) {
            diags.push(Diagnostic::new(DiagCode::BadValue, sp, format!("bad wire name `{bad}`")));
            return None;
        }
        Some(ws.into_iter().map(String::from).collect())
    }
}

fn parse_float(v: &str, sp: Span, diags: &mut Vec<Diagnostic>) -> Option<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Some(x),
        _ => {
            diags.push(Diagnostic::new(DiagCode::BadValue, sp, format!("expected a number, got `{v}`")));
            None
        }
    }
}

fn parse_bs(id: &str, args: &Args<'_>, diags: &mut Vec<Diagnostic>) -> Option<Element> {
    let inputs = args.wires("in", diags);
    let outputs = args.wires("out", diags);
    let r = match (args.values.get("r"), args.values.get("ratio")) {
        (Some(_), Some(&(_, sp))) => {
            diags.push(Diagnostic::new(DiagCode::Arity, sp, "give either `r=` or `ratio=`, not both"));
            None
        }
        (Some(&(v, sp)), None) => {
            let r = parse_float(v, sp, diags)?;
            if !(0.0..=1.0).contains(&r) {
                diags.push(Diagnostic::new(
                    DiagCode::ReflectivityRange,
                    sp,
                    format!("reflectivity {r} outside [0, 1]"),
                ));
                return None;
            }
            Some(r)
        }
        (None, Some(&(v, sp))) => {
            let parsed = v
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)));
            match parsed {
                Some((a, b)) if a + b > 0 => Some(f64::from(a) / f64::from(a + b)),
                _ => {
                    diags.push(Diagnostic::new(DiagCode::BadValue, sp, format!("expected ratio R:T, got `{v}`")));
                    None
                }
            }
        }
        (None, None) => {
            diags.push(Diagnostic::new(DiagCode::MissingKey, args.line_span, "missing `r=` or `ratio=`"));
            None
        }
    };
    let (inputs, outputs, r) = (inputs?, outputs?, r?);
    if inputs.is_empty() || inputs.len() > 2 {
        diags.push(Diagnostic::new(DiagCode::Arity, args.values["in"].1, "beam splitter takes 1 or 2 inputs"));
        return None;
    }
    let [o1, o2]: [String; 2] = match outputs.try_into() {
        Ok(o) => o,
        Err(_) => {
            diags.push(Diagnostic::new(DiagCode::Arity, args.values["out"].1, "beam splitter has exactly 2 outputs"));
            return None;
        }
    };
    Some(Element::Bs(BeamSplitterSpec { id: id.into(), inputs, outputs: [o1, o2], reflectivity: r }))
}

fn single_wire(args: &Args<'_>, diags: &mut Vec<Diagnostic>) -> Option<String> {
    let ws = args.wires("wire", diags)?;
    if ws.len() != 1 {
        diags.push(Diagnostic::new(DiagCode::Arity, args.values["wire"].1, "expected one wire"));
        return None;
    }
    ws.into_iter().next()
}

fn parse_element(kw: &str, id: &str, rest: &[Token<'_>], span: Span, diags: &mut Vec<Diagnostic>) -> Option<Element> {
    match kw {
        "bs" => {
            let args = Args::collect(rest, &["in", "out", "r", "ratio"], span, diags);
            parse_bs(id, &args, diags)
        }
        "phase" => {
            let args = Args::collect(rest, &["wire", "phi"], span, diags);
            let wire = single_wire(&args, diags);
            let phi = args.float("phi", diags);
            Some(Element::Phase(PhaseShifterSpec { id: id.into(), wire: wire?, phi: phi? }))
        }
        "eom" => {
            let args = Args::collect(rest, &["wire", "omega_ghz", "depth", "order"], span, diags);
            let wire = single_wire(&args, diags);
            let omega = args.float("omega_ghz", diags);
            let depth = args.float("depth", diags);
            let order = match args.values.get("order") {
                None => Some(DEFAULT_EOM_ORDER),
                Some(&(v, sp)) => match v.parse::<u32>() {
                    Ok(n) => Some(n),
                    Err(_) => {
                        diags.push(Diagnostic::new(DiagCode::BadValue, sp, format!("expected an integer order, got `{v}`")));
                        None
                    }
                },
            };
            let mut e = EomSpec::new(id, &wire?, omega?, depth?);
            e.order = order?;
            Some(Element::Eom(e))
        }
        "block" => {
            let args = Args::collect(rest, &["wire"], span, diags);
            Some(Element::Block(BlockSpec { id: id.into(), wire: single_wire(&args, diags)? }))
        }
        _ => unreachable!("keyword checked by caller"),
    }
}

/// Parses netlist text into a validated circuit, or every problem found.
///
/// Parsing never panics on any input.
pub fn parse_netlist(src: &str) -> Result<Circuit, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut draft = Draft { sources: Vec::new(), elements: Vec::new(), detects: Vec::new() };
    for (i, line) in src.lines().enumerate() {
        let tokens = tokenize(line, i + 1);
        let Some((head, rest)) = tokens.split_first() else { continue };
        match head.text {
            "source" | "detect" => {
                if rest.len() != 1 {
                    diags.push(Diagnostic::new(DiagCode::Arity, head.span, format!("`{}` takes one wire", head.text)));
                    continue;
                }
                if !is_ident(rest[0].text) {
                    diags.push(Diagnostic::new(DiagCode::BadValue, rest[0].span, format!("bad wire name `{}`", rest[0].text)));
                    continue;
                }
                let entry = (rest[0].text.to_string(), head.span);
                if head.text == "source" {
                    draft.sources.push(entry);
                } else {
                    draft.detects.push(entry);
                }
            }
            kw @ ("bs" | "phase" | "eom" | "block") => {
                let Some((id, args)) = rest.split_first() else {
                    diags.push(Diagnostic::new(DiagCode::Arity, head.span, format!("`{kw}` needs an id")));
                    continue;
                };
                if !is_ident(id.text) || id.text.contains('=') {
                    diags.push(Diagnostic::new(DiagCode::BadValue, id.span, format!("bad element id `{}`", id.text)));
                    continue;
                }
                if let Some(e) = parse_element(kw, id.text, args, head.span, &mut diags) {
                    draft.elements.push((e, head.span));
                }
            }
            other => diags.push(Diagnostic::new(DiagCode::UnknownKeyword, head.span, format!("unknown keyword `{other}`"))),
        }
    }
    if !diags.is_empty() {
        // structural checks on a partial draft would mostly repeat the same problem
        diags.sort_by_key(|d| d.span);
        return Err(diags);
    }
    draft.into_circuit()
}
