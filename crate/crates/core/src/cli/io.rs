//! JSON instance and plan files.
//!
//! Numbers may be JSON numbers or strings holding a decimal or a fraction
//! (`"1/3"`). The source text is kept next to the parsed double so the exact
//! path can re-read it without rounding.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::hedge::{HedgeError, HedgePlan, Instance};
use crate::models::{Model, ModelError, ModelFamily};
use crate::oracle::{self, ExactInstance, OracleError};
use crate::tree::{Claim, EventTree, NodeId, RawNode, Strategy, TreeError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{source_name}: malformed JSON at line {line}, column {column}: {message}")]
    Syntax {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{source_name}: at {location}: {message}")]
    Schema {
        source_name: String,
        location: String,
        message: String,
    },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hedge(#[from] HedgeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    /// 1 for bad input or a failed check, 2 for internal or numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Write { .. } => 2,
            CliError::Hedge(e) => hedge_exit_code(e),
            CliError::Oracle(OracleError::Hedge(e)) => hedge_exit_code(e),
            CliError::Oracle(OracleError::BadNumber(_)) => 1,
            CliError::Oracle(_) => 2,
            _ => 1,
        }
    }
}

fn hedge_exit_code(e: &HedgeError) -> i32 {
    match e {
        HedgeError::Tree(_) | HedgeError::Model(_) | HedgeError::EmptySupport => 1,
        HedgeError::Lp(_) | HedgeError::Inconsistent(_) | HedgeError::NumericalFailure(_) => 2,
    }
}

/// A number together with the text it was read from.
#[derive(Clone, Debug, PartialEq)]
pub struct Decimal {
    pub text: String,
    pub value: f64,
}

impl Decimal {
    /// Shortest text that reparses to exactly `value`.
    pub fn from_f64(value: f64) -> Self {
        Self {
            text: format_f64(value),
            value,
        }
    }

    pub fn exact(&self) -> Result<BigRational, OracleError> {
        oracle::parse_exact(&self.text)
    }

    fn to_json(&self) -> Value {
        match self.text.parse::<Number>() {
            Ok(n) => Value::Number(n),
            Err(_) => Value::String(self.text.clone()),
        }
    }
}

/// Shortest round-trip rendering; non-finite values are rendered by name.
pub fn format_f64(v: f64) -> String {
    match Number::from_f64(v) {
        Some(n) => n.to_string(),
        None => v.to_string(),
    }
}

/// JSON value for a double; non-finite values become `null`.
pub fn json_f64(v: f64) -> Value {
    Number::from_f64(v).map_or(Value::Null, Value::Number)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeEntry {
    pub id: NodeId,
    pub time: usize,
    pub parent: Option<NodeId>,
    pub price: Decimal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub name: String,
    pub weights: BTreeMap<NodeId, Decimal>,
}

/// On-disk form of an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub horizon: usize,
    pub nodes: Vec<NodeEntry>,
    pub models: Vec<ModelEntry>,
    pub claim: BTreeMap<NodeId, Decimal>,
}

/// On-disk form of a hedge plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanFile {
    pub price: Decimal,
    pub strategy: BTreeMap<NodeId, Decimal>,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

struct Reader<'a> {
    source_name: &'a str,
}

impl Reader<'_> {
    fn err(&self, location: &str, message: impl Into<String>) -> CliError {
        CliError::Schema {
            source_name: self.source_name.to_string(),
            location: if location.is_empty() { "top level".into() } else { location.into() },
            message: message.into(),
        }
    }

    fn document(&self, text: &str) -> Result<Value, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Syntax {
            source_name: self.source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })
    }

    fn object<'v>(&self, v: &'v Value, loc: &str, keys: &[&str]) -> Result<&'v Map<String, Value>, CliError> {
        let obj = v.as_object().ok_or_else(|| self.err(loc, "expected an object"))?;
        if let Some(k) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(self.err(loc, format!("unknown key {k:?}")));
        }
        if let Some(k) = keys.iter().find(|k| !obj.contains_key(**k)) {
            return Err(self.err(loc, format!("missing key {k:?}")));
        }
        Ok(obj)
    }

    fn uint(&self, v: &Value, loc: &str) -> Result<u64, CliError> {
        match v {
            Value::Number(n) => n.as_u64(),
            Value::String(s) => parse_id(s),
            _ => None,
        }
        .ok_or_else(|| self.err(loc, format!("expected a non-negative integer, found {v}")))
    }

    fn number(&self, v: &Value, loc: &str) -> Result<Decimal, CliError> {
        let text = match v {
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.trim().to_string(),
            _ => return Err(self.err(loc, format!("expected a number, found {v}"))),
        };
        let exact = oracle::parse_exact(&text).map_err(|_| self.err(loc, format!("invalid number {text:?}")))?;
        let value = if text.contains('/') {
            oracle::to_f64(&exact)
        } else {
            text.parse::<f64>().map_err(|_| self.err(loc, format!("invalid number {text:?}")))?
        };
        Ok(Decimal { text, value })
    }

    fn leaf_map(&self, v: &Value, loc: &str) -> Result<BTreeMap<NodeId, Decimal>, CliError> {
        let obj = v.as_object().ok_or_else(|| self.err(loc, "expected an object keyed by node id"))?;
        let mut out = BTreeMap::new();
        for (k, val) in obj {
            let here = format!("{loc}.{k:?}");
            let id = parse_id(k).ok_or_else(|| self.err(&here, format!("key {k:?} is not a node id")))?;
            if out.insert(NodeId(id), self.number(val, &here)?).is_some() {
                return Err(self.err(&here, format!("node {id} listed twice")));
            }
        }
        Ok(out)
    }
}

fn parse_id(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// serde_json appends " at line L column C"; the location is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

impl InstanceFile {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CliError> {
        let r = Reader { source_name };
        let doc = r.document(text)?;
        let top = r.object(&doc, "", &["horizon", "nodes", "models", "claim"])?;

        let horizon = r.uint(&top["horizon"], "horizon")? as usize;

        let nodes = top["nodes"]
            .as_array()
            .ok_or_else(|| r.err("nodes", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let loc = format!("nodes[{i}]");
                let obj = r.object(v, &loc, &["id", "time", "parent", "price"])?;
                let parent = match &obj["parent"] {
                    Value::Null => None,
                    p => Some(NodeId(r.uint(p, &format!("{loc}.parent"))?)),
                };
                Ok(NodeEntry {
                    id: NodeId(r.uint(&obj["id"], &format!("{loc}.id"))?),
                    time: r.uint(&obj["time"], &format!("{loc}.time"))? as usize,
                    parent,
                    price: r.number(&obj["price"], &format!("{loc}.price"))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;

        let models = top["models"]
            .as_array()
            .ok_or_else(|| r.err("models", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let loc = format!("models[{i}]");
                let obj = r.object(v, &loc, &["name", "weights"])?;
                let name = obj["name"]
                    .as_str()
                    .ok_or_else(|| r.err(&format!("{loc}.name"), "expected a string"))?
                    .to_string();
                Ok(ModelEntry {
                    name,
                    weights: r.leaf_map(&obj["weights"], &format!("{loc}.weights"))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;

        let claim = r.leaf_map(&top["claim"], "claim")?;
        Ok(Self {
            horizon,
            nodes,
            models,
            claim,
        })
    }

    pub fn tree(&self) -> Result<EventTree, TreeError> {
        let raw = self
            .nodes
            .iter()
            .map(|n| RawNode {
                id: n.id,
                time: n.time,
                parent: n.parent,
                price: n.price.value,
            })
            .collect();
        EventTree::new(self.horizon, raw)
    }

    /// Builds each model; normalisation is checked, the martingale property is not.
    pub fn models(&self, tree: &EventTree) -> Result<Vec<Model>, ModelError> {
        self.models
            .iter()
            .map(|m| Model::new(tree, m.name.clone(), m.weights.iter().map(|(&k, v)| (k, v.value)).collect()))
            .collect()
    }

    pub fn claim(&self, tree: &EventTree) -> Result<Claim, TreeError> {
        Claim::new(tree, self.claim.iter().map(|(&k, v)| (k, v.value)).collect())
    }

    /// Fully validated instance, martingale check included.
    pub fn instance(&self) -> Result<Instance, CliError> {
        let tree = self.tree()?;
        let family = ModelFamily::new(&tree, self.models(&tree)?)?;
        let claim = self.claim(&tree)?;
        Ok(Instance::new(tree, family, claim)?)
    }

    /// Exact image built from the source text of every number.
    pub fn exact(&self, tree: &EventTree) -> Result<ExactInstance, CliError> {
        let exact_map = |m: &BTreeMap<NodeId, Decimal>| -> Result<BTreeMap<NodeId, BigRational>, OracleError> {
            m.iter().map(|(&k, v)| Ok((k, v.exact()?))).collect()
        };
        let prices = self
            .nodes
            .iter()
            .map(|n| Ok((n.id, n.price.exact()?)))
            .collect::<Result<BTreeMap<_, _>, OracleError>>()?;
        let models = self
            .models
            .iter()
            .map(|m| Ok((m.name.clone(), exact_map(&m.weights)?)))
            .collect::<Result<Vec<_>, OracleError>>()?;
        let claim = exact_map(&self.claim)?;
        Ok(ExactInstance::from_parts(tree.clone(), &prices, models, claim)?)
    }

    /// File form of an in-memory instance; every leaf weight is written out.
    pub fn from_instance(instance: &Instance) -> Self {
        let tree = instance.tree();
        let nodes = tree
            .raw_nodes()
            .into_iter()
            .map(|n| NodeEntry {
                id: n.id,
                time: n.time,
                parent: n.parent,
                price: Decimal::from_f64(n.price),
            })
            .collect();
        let models = instance
            .family()
            .models()
            .iter()
            .map(|m| ModelEntry {
                name: m.name().to_string(),
                weights: m.weights().iter().map(|(&k, &v)| (k, Decimal::from_f64(v))).collect(),
            })
            .collect();
        let claim = instance
            .claim()
            .payoffs()
            .iter()
            .map(|(&k, &v)| (k, Decimal::from_f64(v)))
            .collect();
        Self {
            horizon: tree.horizon(),
            nodes,
            models,
            claim,
        }
    }

    pub fn to_json(&self) -> Value {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mut o = Map::new();
                o.insert("id".into(), Value::from(n.id.0));
                o.insert("time".into(), Value::from(n.time));
                o.insert("parent".into(), n.parent.map_or(Value::Null, |p| Value::from(p.0)));
                o.insert("price".into(), n.price.to_json());
                Value::Object(o)
            })
            .collect();
        let models = self
            .models
            .iter()
            .map(|m| {
                let mut o = Map::new();
                o.insert("name".into(), Value::from(m.name.clone()));
                o.insert("weights".into(), id_map_json(&m.weights));
                Value::Object(o)
            })
            .collect();
        let mut top = Map::new();
        top.insert("horizon".into(), Value::from(self.horizon));
        top.insert("nodes".into(), Value::Array(nodes));
        top.insert("models".into(), Value::Array(models));
        top.insert("claim".into(), id_map_json(&self.claim));
        Value::Object(top)
    }
}

fn id_map_json(m: &BTreeMap<NodeId, Decimal>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect())
}

impl PlanFile {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CliError> {
        let r = Reader { source_name };
        let doc = r.document(text)?;
        let top = r.object(&doc, "", &["price", "strategy"])?;
        Ok(Self {
            price: r.number(&top["price"], "price")?,
            strategy: r.leaf_map(&top["strategy"], "strategy")?,
        })
    }

    pub fn plan(&self, tree: &EventTree) -> Result<HedgePlan, TreeError> {
        let values = self.strategy.iter().map(|(&k, v)| (k, v.value)).collect();
        Ok(HedgePlan {
            price: self.price.value,
            strategy: Strategy::new(tree, values)?,
        })
    }

    pub fn from_plan(plan: &HedgePlan) -> Self {
        Self {
            price: Decimal::from_f64(plan.price),
            strategy: plan
                .strategy
                .values()
                .iter()
                .map(|(&k, &v)| (k, Decimal::from_f64(v)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        top.insert("price".into(), self.price.to_json());
        top.insert("strategy".into(), id_map_json(&self.strategy));
        Value::Object(top)
    }
}
