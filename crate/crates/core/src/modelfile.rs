//! JSON model files.
//!
//! ```json
//! {
//!   "vars": [
//!     {"name": "x", "domain": [1, 2, 3]},
//!     {"name": "y", "range": [1, 9]},
//!     {"name": "z", "kind": "num", "bounds": [0, 10]}
//!   ],
//!   "constraints": [
//!     {"type": "alldifferent", "vars": ["x", "y"], "mode": "tables"},
//!     {"type": "table", "vars": ["x", "y"], "tuples": [[1, 2], [2, 3]], "reify": "r"}
//!   ],
//!   "objective": {"sense": "max", "terms": [[1, "x"]], "constant": 0},
//!   "options": {"elementIndexBase": 1, "alldifferentMode": "gcc"}
//! }
//! ```
//!
//! Constraint types: `table`, `negative_table`, `logical_table`, `element`,
//! `gcc`, `alldifferent`, `abs`, `deviation`, `interdistance`, `product`,
//! `power`, `linear`, and the logical operators `or`, `and`, `implies`,
//! `not` (with `args` and `result`). Any reifiable constraint accepts
//! `"reify": name`.

use std::path::Path;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{
    truth_table, AlldifferentMode, ConstraintSpec, GccSpec, Model, ModelError, Relation, Sense, VarId, VarKind,
};

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: unknown constraint type {type_name:?}")]
    UnknownConstraintType { index: usize, path: String, type_name: String },
    #[error("{path}: unknown variable {name:?}")]
    NameResolution { path: String, name: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {error}")]
    Model { path: String, error: ModelError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, ModelFileError>;

fn schema(path: &str, message: impl Into<String>) -> ModelFileError {
    ModelFileError::Schema { path: path.to_string(), message: message.into() }
}

pub fn parse_model_file(path: impl AsRef<Path>) -> Result<Model> {
    parse_model(&std::fs::read_to_string(path)?)
}

pub fn parse_model(text: &str) -> Result<Model> {
    let root: Value = serde_json::from_str(text).map_err(|e| ModelFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Parser::new(&root)?.run()
}

struct Parser<'a> {
    root: &'a Map<String, Value>,
    model: Model,
    element_base: i64,
    alldiff_mode: AlldifferentMode,
}

fn field<'v>(obj: &'v Map<String, Value>, key: &str, path: &str) -> Result<&'v Value> {
    obj.get(key).ok_or_else(|| schema(path, format!("missing field {key:?}")))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| schema(path, "expected an integer"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn ints(v: &Value, path: &str) -> Result<Vec<i64>> {
    as_array(v, path)?.iter().enumerate().map(|(i, x)| as_i64(x, &format!("{path}[{i}]"))).collect()
}

fn counts(v: &Value, path: &str) -> Result<Vec<u32>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = format!("{path}[{i}]");
            x.as_u64().and_then(|n| u32::try_from(n).ok()).ok_or_else(|| schema(&p, "expected a count"))
        })
        .collect()
}

fn tuples(v: &Value, path: &str) -> Result<Vec<Vec<i64>>> {
    as_array(v, path)?.iter().enumerate().map(|(i, t)| ints(t, &format!("{path}[{i}]"))).collect()
}

fn parse_mode(v: &Value, path: &str) -> Result<AlldifferentMode> {
    match as_str(v, path)? {
        "gcc" => Ok(AlldifferentMode::AdHocGcc),
        "tables" => Ok(AlldifferentMode::NegativeBinaryTables),
        other => Err(schema(path, format!("unknown alldifferent mode {other:?}"))),
    }
}

fn parse_relation(v: &Value, path: &str) -> Result<Relation> {
    match as_str(v, path)? {
        "<=" => Ok(Relation::Le),
        ">=" => Ok(Relation::Ge),
        "=" | "==" => Ok(Relation::Eq),
        other => Err(schema(path, format!("unknown relation {other:?}"))),
    }
}

impl<'a> Parser<'a> {
    fn new(root: &'a Value) -> Result<Self> {
        let root = root.as_object().ok_or_else(|| schema("$", "expected an object"))?;
        let mut p = Parser { root, model: Model::new(), element_base: 0, alldiff_mode: AlldifferentMode::AdHocGcc };
        if let Some(opts) = root.get("options") {
            let opts = opts.as_object().ok_or_else(|| schema("options", "expected an object"))?;
            if let Some(b) = opts.get("elementIndexBase") {
                p.element_base = as_i64(b, "options.elementIndexBase")?;
            }
            if let Some(m) = opts.get("alldifferentMode") {
                p.alldiff_mode = parse_mode(m, "options.alldifferentMode")?;
            }
        }
        Ok(p)
    }

    fn var(&self, v: &Value, path: &str) -> Result<VarId> {
        let name = as_str(v, path)?;
        self.model
            .lookup(name)
            .ok_or_else(|| ModelFileError::NameResolution { path: path.to_string(), name: name.to_string() })
    }

    fn vars(&self, v: &Value, path: &str) -> Result<Vec<VarId>> {
        as_array(v, path)?.iter().enumerate().map(|(i, x)| self.var(x, &format!("{path}[{i}]"))).collect()
    }

    fn terms(&self, v: &Value, path: &str) -> Result<Vec<(f64, VarId)>> {
        as_array(v, path)?
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let p = format!("{path}[{i}]");
                match as_array(t, &p)?.as_slice() {
                    [c, name] => Ok((as_f64(c, &p)?, self.var(name, &p)?)),
                    _ => Err(schema(&p, "expected [coefficient, name]")),
                }
            })
            .collect()
    }

    fn run(mut self) -> Result<Model> {
        if let Some(vars) = self.root.get("vars") {
            for (i, v) in as_array(vars, "vars")?.iter().enumerate() {
                self.declare(v, &format!("vars[{i}]"))?;
            }
        }
        if let Some(cs) = self.root.get("constraints") {
            for (i, c) in as_array(cs, "constraints")?.iter().enumerate() {
                self.constraint(i, c)?;
            }
        }
        if let Some(obj) = self.root.get("objective") {
            let o = obj.as_object().ok_or_else(|| schema("objective", "expected an object"))?;
            let sense = match o.get("sense").map(|s| as_str(s, "objective.sense")).transpose()? {
                Some("max" | "maximize") => Sense::Maximize,
                Some("min" | "minimize") | None => Sense::Minimize,
                Some(other) => return Err(schema("objective.sense", format!("unknown sense {other:?}"))),
            };
            let terms = match o.get("terms") {
                Some(t) => self.terms(t, "objective.terms")?,
                None => Vec::new(),
            };
            let constant = o.get("constant").map(|c| as_f64(c, "objective.constant")).transpose()?.unwrap_or(0.0);
            self.model
                .set_objective_with_constant(sense, terms, constant)
                .map_err(|error| ModelFileError::Model { path: "objective".into(), error })?;
        }
        Ok(self.model)
    }

    fn declare(&mut self, v: &Value, path: &str) -> Result<()> {
        let o = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
        let name = as_str(field(o, "name", path)?, &format!("{path}.name"))?;
        let kind = o.get("kind").map(|k| as_str(k, &format!("{path}.kind"))).transpose()?.unwrap_or("int");
        let res = match kind {
            "int" => {
                let domain = if let Some(d) = o.get("domain") {
                    ints(d, &format!("{path}.domain"))?
                } else if let Some(r) = o.get("range") {
                    let p = format!("{path}.range");
                    match ints(r, &p)?.as_slice() {
                        [lo, hi] => (*lo..=*hi).collect(),
                        _ => return Err(schema(&p, "expected [lo, hi]")),
                    }
                } else {
                    return Err(schema(path, "integer variable needs \"domain\" or \"range\""));
                };
                self.model.add_int_var_named(name, domain)
            }
            "num" => {
                let p = format!("{path}.bounds");
                let b = as_array(field(o, "bounds", path)?, &p)?;
                let [lb, ub] = b.as_slice() else { return Err(schema(&p, "expected [lb, ub]")) };
                self.model.add_num_var_named(name, as_f64(lb, &p)?, as_f64(ub, &p)?)
            }
            other => return Err(schema(&format!("{path}.kind"), format!("unknown kind {other:?}"))),
        };
        res.map(|_| ()).map_err(|error| ModelFileError::Model { path: path.to_string(), error })
    }

    fn constraint(&mut self, index: usize, c: &Value) -> Result<()> {
        let path = format!("constraints[{index}]");
        let o = c.as_object().ok_or_else(|| schema(&path, "expected an object"))?;
        let ty = as_str(field(o, "type", &path)?, &format!("{path}.type"))?;
        let f = |key: &str| field(o, key, &path);
        let p = |key: &str| format!("{path}.{key}");
        let spec = match ty {
            "table" | "negative_table" | "logical_table" => {
                let vars = self.vars(f("vars")?, &p("vars"))?;
                let tuples = tuples(f("tuples")?, &p("tuples"))?;
                match ty {
                    "table" => ConstraintSpec::PositiveTable { vars, tuples },
                    "negative_table" => ConstraintSpec::NegativeTable { vars, tuples },
                    _ => ConstraintSpec::LogicalTable { vars, tuples },
                }
            }
            "element" => ConstraintSpec::Element {
                index: self.var(f("index")?, &p("index"))?,
                value: self.var(f("value")?, &p("value"))?,
                array: ints(f("array")?, &p("array"))?,
                base: o.get("base").map(|b| as_i64(b, &p("base"))).transpose()?.unwrap_or(self.element_base),
            },
            "gcc" => ConstraintSpec::Gcc(GccSpec {
                vars: self.vars(f("vars")?, &p("vars"))?,
                values: ints(f("values")?, &p("values"))?,
                lower: counts(f("lower")?, &p("lower"))?,
                upper: counts(f("upper")?, &p("upper"))?,
            }),
            "alldifferent" => ConstraintSpec::Alldifferent {
                vars: self.vars(f("vars")?, &p("vars"))?,
                mode: o.get("mode").map(|m| parse_mode(m, &p("mode"))).transpose()?.unwrap_or(self.alldiff_mode),
            },
            "abs" => ConstraintSpec::AbsDistance {
                x: self.var(f("x")?, &p("x"))?,
                y: self.var(f("y")?, &p("y"))?,
                abs: self.var(f("abs")?, &p("abs"))?,
            },
            "deviation" => ConstraintSpec::Deviation {
                vars: self.vars(f("vars")?, &p("vars"))?,
                mean: self.var(f("mean")?, &p("mean"))?,
                dev: self.var(f("dev")?, &p("dev"))?,
            },
            "interdistance" => ConstraintSpec::InterDistance {
                vars: self.vars(f("vars")?, &p("vars"))?,
                gap: self.var(f("gap")?, &p("gap"))?,
            },
            "product" => ConstraintSpec::Product {
                x: self.var(f("x")?, &p("x"))?,
                y: self.var(f("y")?, &p("y"))?,
                z: self.var(f("z")?, &p("z"))?,
            },
            "power" => ConstraintSpec::Power {
                x: self.var(f("x")?, &p("x"))?,
                exponent: f("k")?
                    .as_u64()
                    .and_then(|k| u32::try_from(k).ok())
                    .ok_or_else(|| schema(&p("k"), "expected a non-negative exponent"))?,
                z: self.var(f("z")?, &p("z"))?,
            },
            "linear" => ConstraintSpec::Linear {
                terms: self.terms(f("terms")?, &p("terms"))?,
                relation: parse_relation(f("rel")?, &p("rel"))?,
                rhs: as_f64(f("rhs")?, &p("rhs"))?,
            },
            "or" | "and" | "implies" | "not" => {
                let mut vars = self.vars(f("args")?, &p("args"))?;
                let arity = if ty == "not" { 1 } else { 2 };
                if vars.len() != arity {
                    return Err(schema(&p("args"), format!("expected {arity} arguments")));
                }
                vars.push(self.var(f("result")?, &p("result"))?);
                let tuples = match ty {
                    "or" => truth_table(2, |a| a[0] || a[1]),
                    "and" => truth_table(2, |a| a[0] && a[1]),
                    "implies" => truth_table(2, |a| !a[0] || a[1]),
                    _ => truth_table(1, |a| !a[0]),
                };
                ConstraintSpec::LogicalTable { vars, tuples }
            }
            other => {
                return Err(ModelFileError::UnknownConstraintType { index, path, type_name: other.to_string() })
            }
        };
        let res = match o.get("reify") {
            Some(r) => {
                let r = self.var(r, &p("reify"))?;
                self.model.reify_into(spec, r)
            }
            None => self.model.post(spec),
        };
        res.map(|_| ()).map_err(|error| ModelFileError::Model { path, error })
    }
}

fn num(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        json!(x as i64)
    } else {
        json!(x)
    }
}

/// Serializes a model so that [`parse_model`] rebuilds an equal one.
pub fn write_model(model: &Model) -> String {
    let name = |v: &VarId| Value::from(model.var(*v).name.clone());
    let names = |vs: &[VarId]| Value::from(vs.iter().map(name).collect::<Vec<_>>());
    let terms = |ts: &[(f64, VarId)]| Value::from(ts.iter().map(|(c, v)| json!([num(*c), name(v)])).collect::<Vec<_>>());

    let vars: Vec<Value> = model
        .vars()
        .iter()
        .map(|v| match &v.kind {
            VarKind::Int(d) if d.is_contiguous() && d.len() > 2 => {
                json!({"name": v.name, "range": [d.min(), d.max()]})
            }
            VarKind::Int(d) => json!({"name": v.name, "domain": d.values()}),
            VarKind::Num { lb, ub } => json!({"name": v.name, "kind": "num", "bounds": [num(*lb), num(*ub)]}),
        })
        .collect();

    let constraints: Vec<Value> = model
        .constraints()
        .iter()
        .map(|pc| {
            let mut c = match &pc.spec {
                ConstraintSpec::PositiveTable { vars, tuples } => {
                    json!({"type": "table", "vars": names(vars), "tuples": tuples})
                }
                ConstraintSpec::NegativeTable { vars, tuples } => {
                    json!({"type": "negative_table", "vars": names(vars), "tuples": tuples})
                }
                ConstraintSpec::LogicalTable { vars, tuples } => {
                    json!({"type": "logical_table", "vars": names(vars), "tuples": tuples})
                }
                ConstraintSpec::Element { index, value, array, base } => {
                    json!({"type": "element", "index": name(index), "value": name(value), "array": array, "base": base})
                }
                ConstraintSpec::Gcc(g) => json!({
                    "type": "gcc", "vars": names(&g.vars), "values": g.values, "lower": g.lower, "upper": g.upper
                }),
                ConstraintSpec::Alldifferent { vars, mode } => json!({
                    "type": "alldifferent",
                    "vars": names(vars),
                    "mode": match mode { AlldifferentMode::AdHocGcc => "gcc", AlldifferentMode::NegativeBinaryTables => "tables" },
                }),
                ConstraintSpec::AbsDistance { x, y, abs } => {
                    json!({"type": "abs", "x": name(x), "y": name(y), "abs": name(abs)})
                }
                ConstraintSpec::Deviation { vars, mean, dev } => {
                    json!({"type": "deviation", "vars": names(vars), "mean": name(mean), "dev": name(dev)})
                }
                ConstraintSpec::InterDistance { vars, gap } => {
                    json!({"type": "interdistance", "vars": names(vars), "gap": name(gap)})
                }
                ConstraintSpec::Product { x, y, z } => {
                    json!({"type": "product", "x": name(x), "y": name(y), "z": name(z)})
                }
                ConstraintSpec::Power { x, exponent, z } => {
                    json!({"type": "power", "x": name(x), "k": exponent, "z": name(z)})
                }
                ConstraintSpec::Linear { terms: ts, relation, rhs } => {
                    json!({"type": "linear", "terms": terms(ts), "rel": relation.symbol(), "rhs": num(*rhs)})
                }
            };
            if let Some(r) = pc.reif {
                c["reify"] = name(&r);
            }
            c
        })
        .collect();

    let mut root = json!({"vars": vars, "constraints": constraints});
    if let Some(o) = model.objective() {
        root["objective"] = json!({
            "sense": match o.sense { Sense::Maximize => "max", Sense::Minimize => "min" },
            "terms": terms(&o.terms),
            "constant": num(o.constant),
        });
    }
    let mut out = serde_json::to_string_pretty(&root).expect("JSON values always serialize");
    out.push('\n');
    out
}
