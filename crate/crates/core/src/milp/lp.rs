//! CPLEX LP text format: writer and reader.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use super::{MilpProgram, MilpVarId, MilpVarKind, Relation, Sense, VarOrigin};

const WRAP: usize = 72;

/// Decimal rendering with at most 12 significant digits.
pub fn format_number(v: f64) -> String {
    if v == f64::INFINITY {
        return "inf".into();
    }
    if v == f64::NEG_INFINITY {
        return "-inf".into();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn push_wrapped(out: &mut String, line: &mut String, piece: &str) {
    if line.len() + piece.len() + 1 > WRAP && !line.trim().is_empty() {
        out.push_str(line);
        out.push('\n');
        line.clear();
        line.push_str("   ");
    }
    line.push(' ');
    line.push_str(piece);
}

fn push_expr(out: &mut String, line: &mut String, program: &MilpProgram, terms: &[(f64, MilpVarId)]) {
    for (i, &(c, v)) in terms.iter().enumerate() {
        let name = &program.vars[v.0].name;
        let piece = if i == 0 {
            format!("{} {}", format_number(c), name)
        } else if c < 0.0 {
            format!("- {} {}", format_number(-c), name)
        } else {
            format!("+ {} {}", format_number(c), name)
        };
        push_wrapped(out, line, &piece);
    }
}

/// Renders `program` as LP text. Output is a pure function of the program.
pub fn write_lp_string(program: &MilpProgram) -> String {
    let mut out = String::new();
    out.push_str("\\ generated by cpmilp\n");
    let (sense, terms, constant) = match &program.objective {
        Some(o) => (o.sense, o.terms.as_slice(), o.constant),
        None => (Sense::Minimize, &[][..], 0.0),
    };
    out.push_str(match sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    let mut line = String::from(" obj:");
    if terms.is_empty() {
        push_wrapped(&mut out, &mut line, &format_number(constant));
    } else {
        push_expr(&mut out, &mut line, program, terms);
        if constant != 0.0 {
            let piece = if constant < 0.0 {
                format!("- {}", format_number(-constant))
            } else {
                format!("+ {}", format_number(constant))
            };
            push_wrapped(&mut out, &mut line, &piece);
        }
    }
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &program.constraints {
        let mut line = format!(" {}:", c.name);
        if c.terms.is_empty() {
            // An empty row still needs a variable reference to be legal LP.
            let placeholder = program.vars.first().map(|v| format!("0 {}", v.name)).unwrap_or_else(|| "0".into());
            push_wrapped(&mut out, &mut line, &placeholder);
        } else {
            push_expr(&mut out, &mut line, program, &c.terms);
        }
        push_wrapped(&mut out, &mut line, &format!("{} {}", c.relation.symbol(), format_number(c.rhs)));
        out.push_str(&line);
        out.push('\n');
    }

    // Every variable gets a bound line, in index order, so that a reader can
    // restore the variable order.
    let mut bounds = String::new();
    for v in &program.vars {
        if v.lb == v.ub {
            let _ = writeln!(bounds, " {} = {}", v.name, format_number(v.lb));
        } else if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            let _ = writeln!(bounds, " {} free", v.name);
        } else {
            let _ = writeln!(bounds, " {} <= {} <= {}", format_number(v.lb), v.name, format_number(v.ub));
        }
    }
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        out.push_str(&bounds);
    }
    for (header, kind) in [("Binaries", MilpVarKind::Binary), ("Generals", MilpVarKind::Integer)] {
        let names: Vec<&str> = program.vars.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            continue;
        }
        out.push_str(header);
        out.push('\n');
        let mut line = String::new();
        for n in names {
            push_wrapped(&mut out, &mut line, n);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(program: &MilpProgram, sink: &mut impl io::Write) -> io::Result<()> {
    sink.write_all(write_lp_string(program).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {msg}")]
pub struct LpParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_header(line: &str) -> Option<(Section, Option<Sense>)> {
    let l = line.trim().to_ascii_lowercase();
    let l = l.as_str();
    Some(match l {
        "maximize" | "maximise" | "maximum" | "max" => (Section::Objective, Some(Sense::Maximize)),
        "minimize" | "minimise" | "minimum" | "min" => (Section::Objective, Some(Sense::Minimize)),
        "subject to" | "such that" | "st" | "s.t." => (Section::Constraints, None),
        "bounds" | "bound" => (Section::Bounds, None),
        "binaries" | "binary" | "bin" => (Section::Binaries, None),
        "generals" | "general" | "gen" => (Section::Generals, None),
        "end" => (Section::End, None),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sign(f64),
    Colon,
    Rel(Relation),
}

fn tokenize(text: &str, line: usize, out: &mut Vec<(Tok, usize)>) -> Result<(), LpParseError> {
    let err = |msg: String| LpParseError { line, msg };
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' || c == '-' {
            out.push((Tok::Sign(if c == '-' { -1.0 } else { 1.0 }), line));
            i += 1;
        } else if c == ':' {
            out.push((Tok::Colon, line));
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                j += 1;
            }
            let op: String = chars[i..j].iter().collect();
            let rel = match op.as_str() {
                "<" | "<=" | "=<" => Relation::Le,
                ">" | ">=" | "=>" => Relation::Ge,
                "=" | "==" => Relation::Eq,
                _ => return Err(err(format!("bad operator {op:?}"))),
            };
            out.push((Tok::Rel(rel), line));
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let mut j = i + 1;
            while j < chars.len() {
                let d = chars[j];
                let exp_sign = (d == '+' || d == '-') && matches!(chars[j - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let s: String = chars[i..j].iter().collect();
            let v = s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}")))?;
            out.push((Tok::Num(v), line));
            i = j;
        } else {
            let mut j = i;
            while j < chars.len() && !chars[j].is_whitespace() && !matches!(chars[j], '+' | '-' | ':' | '<' | '>' | '=') {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let lower = s.to_ascii_lowercase();
            if lower == "inf" || lower == "infinity" {
                out.push((Tok::Num(f64::INFINITY), line));
            } else {
                out.push((Tok::Name(s), line));
            }
            i = j;
        }
    }
    Ok(())
}

struct VarTable {
    order: Vec<String>,
    index: HashMap<String, usize>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    kind: Vec<MilpVarKind>,
    bounded: Vec<bool>,
    bound_order: Vec<usize>,
}

impl VarTable {
    fn mark_bounded(&mut self, i: usize) {
        if !self.bounded[i] {
            self.bounded[i] = true;
            self.bound_order.push(i);
        }
    }

    fn get(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.order.push(name.to_string());
        self.index.insert(name.to_string(), self.order.len() - 1);
        self.lb.push(0.0);
        self.ub.push(f64::INFINITY);
        self.kind.push(MilpVarKind::Continuous);
        self.bounded.push(false);
        self.order.len() - 1
    }
}

type Terms = Vec<(f64, usize)>;

/// Parses `[sign] [coef] name` terms until a relation or the end of input.
fn parse_terms(toks: &[(Tok, usize)], pos: &mut usize, vars: &mut VarTable) -> Result<(Terms, f64), LpParseError> {
    let mut terms: Vec<(f64, usize)> = Vec::new();
    let mut constant = 0.0;
    while *pos < toks.len() && !matches!(toks[*pos].0, Tok::Rel(_)) {
        let line = toks[*pos].1;
        let mut sign = 1.0;
        while let Some((Tok::Sign(s), _)) = toks.get(*pos) {
            sign *= s;
            *pos += 1;
        }
        let mut coef = None;
        if let Some((Tok::Num(v), _)) = toks.get(*pos) {
            coef = Some(*v);
            *pos += 1;
        }
        match toks.get(*pos) {
            Some((Tok::Name(n), _)) => {
                let i = vars.get(n);
                *pos += 1;
                let c = sign * coef.unwrap_or(1.0);
                match terms.iter_mut().find(|t| t.1 == i) {
                    Some(t) => t.0 += c,
                    None => terms.push((c, i)),
                }
            }
            _ => match coef {
                Some(v) => constant += sign * v,
                None => return Err(LpParseError { line, msg: "expected a term".into() }),
            },
        }
    }
    Ok((terms, constant))
}

/// Reads LP text back into a program. Variables are created in order of
/// first appearance; origins are [`VarOrigin::Free`].
pub fn parse_lp(text: &str) -> Result<MilpProgram, LpParseError> {
    let mut section = Section::None;
    let mut sense = Sense::Minimize;
    let mut obj_toks = Vec::new();
    let mut row_toks = Vec::new();
    let mut bound_lines = Vec::new();
    let mut bin_names = Vec::new();
    let mut gen_names = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some((s, sn)) = section_header(line) {
            section = s;
            if let Some(sn) = sn {
                sense = sn;
            }
            continue;
        }
        match section {
            Section::None => return Err(LpParseError { line: line_no, msg: "content before first section".into() }),
            Section::Objective => tokenize(line, line_no, &mut obj_toks)?,
            Section::Constraints => tokenize(line, line_no, &mut row_toks)?,
            Section::Bounds => bound_lines.push((line.to_string(), line_no)),
            Section::Binaries => bin_names.extend(line.split_whitespace().map(str::to_string)),
            Section::Generals => gen_names.extend(line.split_whitespace().map(str::to_string)),
            Section::End => return Err(LpParseError { line: line_no, msg: "content after End".into() }),
        }
    }

    let mut vars = VarTable {
        order: Vec::new(),
        index: HashMap::new(),
        lb: Vec::new(),
        ub: Vec::new(),
        kind: Vec::new(),
        bounded: Vec::new(),
        bound_order: Vec::new(),
    };

    let mut pos = 0;
    if matches!(obj_toks.get(1), Some((Tok::Colon, _))) {
        pos = 2;
    }
    let (obj_terms, obj_const) = parse_terms(&obj_toks, &mut pos, &mut vars)?;
    if pos != obj_toks.len() {
        return Err(LpParseError { line: obj_toks[pos].1, msg: "unexpected relation in objective".into() });
    }

    let mut rows = Vec::new();
    let mut pos = 0;
    while pos < row_toks.len() {
        let line = row_toks[pos].1;
        let name = match (&row_toks[pos].0, row_toks.get(pos + 1).map(|t| &t.0)) {
            (Tok::Name(n), Some(Tok::Colon)) => {
                pos += 2;
                n.clone()
            }
            _ => format!("R{}", rows.len() + 1),
        };
        let (terms, constant) = parse_terms(&row_toks, &mut pos, &mut vars)?;
        let rel = match row_toks.get(pos) {
            Some((Tok::Rel(r), _)) => *r,
            _ => return Err(LpParseError { line, msg: format!("row {name} has no relation") }),
        };
        pos += 1;
        let mut sign = 1.0;
        while let Some((Tok::Sign(s), _)) = row_toks.get(pos) {
            sign *= s;
            pos += 1;
        }
        let rhs = match row_toks.get(pos) {
            Some((Tok::Num(v), _)) => sign * v,
            _ => return Err(LpParseError { line, msg: format!("row {name} has no right-hand side") }),
        };
        pos += 1;
        rows.push((name, terms, rel, rhs - constant));
    }

    for (line, line_no) in &bound_lines {
        let mut toks = Vec::new();
        tokenize(line, *line_no, &mut toks)?;
        let err = |msg: &str| LpParseError { line: *line_no, msg: msg.into() };
        let signed = |toks: &[(Tok, usize)], at: usize| -> Option<(f64, usize)> {
            match (toks.get(at).map(|t| &t.0), toks.get(at + 1).map(|t| &t.0)) {
                (Some(Tok::Sign(s)), Some(Tok::Num(v))) => Some((s * v, at + 2)),
                (Some(Tok::Num(v)), _) => Some((*v, at + 1)),
                _ => None,
            }
        };
        if let Some((lo, at)) = signed(&toks, 0) {
            // lo <= x [<= hi]
            let (Some((Tok::Rel(r1), _)), Some((Tok::Name(n), _))) = (toks.get(at), toks.get(at + 1)) else {
                return Err(err("malformed bound"));
            };
            let i = vars.get(n);
            vars.mark_bounded(i);
            match r1 {
                Relation::Le => vars.lb[i] = lo,
                Relation::Ge => vars.ub[i] = lo,
                Relation::Eq => {
                    vars.lb[i] = lo;
                    vars.ub[i] = lo;
                }
            }
            if let Some((Tok::Rel(r2), _)) = toks.get(at + 2) {
                let (hi, _) = signed(&toks, at + 3).ok_or_else(|| err("missing bound value"))?;
                match r2 {
                    Relation::Le => vars.ub[i] = hi,
                    Relation::Ge => vars.lb[i] = hi,
                    Relation::Eq => return Err(err("malformed bound")),
                }
            }
        } else if let Some((Tok::Name(n), _)) = toks.first() {
            let i = vars.get(n);
            vars.mark_bounded(i);
            match toks.get(1).map(|t| &t.0) {
                Some(Tok::Name(f)) if f.eq_ignore_ascii_case("free") => {
                    vars.lb[i] = f64::NEG_INFINITY;
                    vars.ub[i] = f64::INFINITY;
                }
                Some(Tok::Rel(r)) => {
                    let (v, _) = signed(&toks, 2).ok_or_else(|| err("missing bound value"))?;
                    match r {
                        Relation::Le => vars.ub[i] = v,
                        Relation::Ge => vars.lb[i] = v,
                        Relation::Eq => {
                            vars.lb[i] = v;
                            vars.ub[i] = v;
                        }
                    }
                }
                _ => return Err(err("malformed bound")),
            }
        } else {
            return Err(err("malformed bound"));
        }
    }
    for n in &bin_names {
        let i = vars.get(n);
        vars.kind[i] = MilpVarKind::Binary;
        if !vars.bounded[i] {
            vars.lb[i] = 0.0;
            vars.ub[i] = 1.0;
        }
    }
    for n in &gen_names {
        let i = vars.get(n);
        vars.kind[i] = MilpVarKind::Integer;
    }

    // Variables with a bound line come first, in Bounds order; the rest keep
    // their order of first appearance.
    let mut final_order: Vec<usize> = Vec::with_capacity(vars.order.len());
    let mut placed = vec![false; vars.order.len()];
    for i in vars.bound_order.iter().copied().chain(0..vars.order.len()) {
        if !placed[i] {
            placed[i] = true;
            final_order.push(i);
        }
    }
    let mut remap = vec![0; vars.order.len()];
    for (new, &old) in final_order.iter().enumerate() {
        remap[old] = new;
    }

    let mut program = MilpProgram::new();
    for &i in &final_order {
        program
            .add_var(vars.order[i].clone(), vars.kind[i], vars.lb[i], vars.ub[i], VarOrigin::Free)
            .map_err(|e| LpParseError { line: 0, msg: e.to_string() })?;
    }
    let obj_terms: Terms = obj_terms.into_iter().map(|(c, i)| (c, remap[i])).collect();
    for (name, terms, rel, rhs) in rows {
        let terms = terms.into_iter().map(|(c, i)| (c, MilpVarId(remap[i]))).collect();
        program
            .add_constraint(name, terms, rel, rhs, "lp")
            .map_err(|e| LpParseError { line: 0, msg: e.to_string() })?;
    }
    let obj_terms = obj_terms.into_iter().map(|(c, i)| (c, MilpVarId(i))).collect();
    program
        .set_objective(sense, obj_terms, obj_const)
        .map_err(|e| LpParseError { line: 0, msg: e.to_string() })?;
    program.warnings.clear();
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MilpProgram {
        let mut p = MilpProgram::new();
        let x = p.add_var("x", MilpVarKind::Integer, 0.0, 10.0, VarOrigin::Free).unwrap();
        p.add_constraint("cap", vec![(1.0, x)], Relation::Le, 3.0, "t").unwrap();
        p.set_objective(Sense::Maximize, vec![(1.0, x)], 0.0).unwrap();
        p
    }

    #[test]
    fn golden_small_program() {
        let expected = "\\ generated by cpmilp\nMaximize\n obj: 1 x\nSubject To\n cap: 1 x <= 3\nBounds\n 0 <= x <= 10\nGenerals\n x\nEnd\n";
        assert_eq!(write_lp_string(&small()), expected);
    }

    #[test]
    fn empty_objective_convention() {
        let text = write_lp_string(&MilpProgram::new());
        assert!(text.contains("Minimize\n obj: 0\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn numbers_use_twelve_significant_digits() {
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0 * 1e5), "66666.6666667");
    }

    #[test]
    fn reader_round_trips_small_program() {
        let p = parse_lp(&write_lp_string(&small())).unwrap();
        assert_eq!(p.stats(), small().stats());
        assert_eq!(p.vars[0].ub, 10.0);
        assert_eq!(p.objective.as_ref().unwrap().sense, Sense::Maximize);
    }

    #[test]
    fn reader_handles_wrapped_rows_and_fixed_binaries() {
        let text = "Minimize\n obj: - 2 a + b - 1.5\nSubject To\n r1: a + 2 b\n   - 3 c >= -4\nBounds\n b = 1\n -inf <= c <= 5\nBinaries\n a b\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.constraints[0].terms.len(), 3);
        assert_eq!(p.constraints[0].rhs, -4.0);
        let names: Vec<&str> = p.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["b", "c", "a"]);
        let b = p.var(p.find_var("b").unwrap());
        assert_eq!((b.lb, b.ub, b.kind), (1.0, 1.0, MilpVarKind::Binary));
        assert_eq!(p.var(p.find_var("c").unwrap()).lb, f64::NEG_INFINITY);
        assert_eq!(p.objective.as_ref().unwrap().constant, -1.5);
    }

    #[test]
    fn reader_reports_line_numbers() {
        let err = parse_lp("Minimize\n obj: x\nSubject To\n r: x +\nEnd\n").unwrap_err();
        assert_eq!(err.line, 4);
    }
}
