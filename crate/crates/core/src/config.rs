//! Engine configuration, read from JSON or assembled from flags.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::fedosov::{default_dmax, FedosovData, FedosovProduct};
use crate::formal::{rat, Rational};
use crate::torus::{rat_from_json, rat_to_json};
use crate::weyl::SymplecticConnection;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            _ => Err(Error::Config(format!("unknown output format {s}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub dim: usize,
    pub order: usize,
    /// `None` means `2K + 2`.
    pub dmax: Option<usize>,
    /// `Ω = Σ_r ν^r C_r dθ₁∧dθ₂ + …`.
    pub omega: Vec<Rational>,
    /// Totally symmetric `S_{lij}`, keyed by sorted index triples.
    pub christoffel: BTreeMap<[usize; 3], Rational>,
    pub probe_bound: i64,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            dim: 2,
            order: 4,
            dmax: None,
            omega: vec![],
            christoffel: BTreeMap::new(),
            probe_bound: 2,
            format: OutputFormat::Text,
            seed: 0x5eed,
        }
    }
}

fn sorted(mut idx: [usize; 3]) -> [usize; 3] {
    idx.sort_unstable();
    idx
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || !self.dim.is_multiple_of(2) {
            return Err(Error::Config(format!("dimension must be even and positive, got {}", self.dim)));
        }
        if self.order < 1 {
            return Err(Error::Config("truncation order K must be at least 1".into()));
        }
        if self.omega.len() > self.order {
            return Err(Error::Config(format!("{} Ω coefficients exceed K = {}", self.omega.len(), self.order)));
        }
        if let Some(d) = self.dmax {
            if d < 3 {
                return Err(Error::Config("D_max must be at least 3".into()));
            }
        }
        if self.christoffel.keys().flatten().any(|i| *i >= self.dim) {
            return Err(Error::Config("Christoffel index out of range".into()));
        }
        if self.probe_bound < 0 {
            return Err(Error::Config("probe bound must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn dmax(&self) -> usize {
        self.dmax.unwrap_or_else(|| default_dmax(self.order))
    }

    pub fn connection(&self) -> Result<SymplecticConnection> {
        if self.christoffel.is_empty() {
            return Ok(SymplecticConnection::flat(self.dim, self.order));
        }
        SymplecticConnection::from_symmetric(self.dim, self.order, |l, i, j| {
            self.christoffel.get(&sorted([l, i, j])).cloned().unwrap_or_else(|| rat(0, 1))
        })
    }

    pub fn fedosov_data(&self) -> Result<FedosovData> {
        self.validate()?;
        FedosovData::with_connection(self.connection()?, &self.omega, self.dmax())
    }

    pub fn fedosov_product(&self) -> Result<FedosovProduct> {
        Ok(FedosovProduct::new(Arc::new(self.fedosov_data()?), self.probe_bound))
    }

    pub fn to_json(&self) -> Value {
        let christoffel: Vec<Value> =
            self.christoffel.iter().map(|(k, v)| json!({"index": k, "value": rat_to_json(v)})).collect();
        json!({
            "dim": self.dim,
            "truncation": self.order,
            "dmax": self.dmax,
            "omega": self.omega.iter().map(rat_to_json).collect::<Vec<_>>(),
            "christoffel": christoffel,
            "probe_bound": self.probe_bound,
            "format": self.format.as_str(),
            "seed": self.seed,
        })
    }

    /// Missing keys keep their defaults.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let mut c = EngineConfig::default();
        let nat = |key: &str| -> Result<Option<u64>> {
            match obj.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(x) => x.as_u64().map(Some).ok_or_else(|| Error::Config(format!("{key} must be a natural number"))),
            }
        };
        if let Some(d) = nat("dim")? {
            c.dim = d as usize;
        }
        if let Some(k) = nat("truncation")?.or(nat("K")?) {
            c.order = k as usize;
        }
        c.dmax = nat("dmax")?.map(|d| d as usize);
        if let Some(p) = nat("probe_bound")? {
            c.probe_bound = p as i64;
        }
        if let Some(s) = nat("seed")? {
            c.seed = s;
        }
        if let Some(f) = obj.get("format") {
            c.format = OutputFormat::parse(f.as_str().ok_or_else(|| Error::Config("format must be a string".into()))?)?;
        }
        if let Some(o) = obj.get("omega") {
            let list = o.as_array().ok_or_else(|| Error::Config("omega must be a list".into()))?;
            c.omega = list.iter().map(rat_from_json).collect::<Result<_>>()?;
        }
        if let Some(ch) = obj.get("christoffel") {
            let list = ch.as_array().ok_or_else(|| Error::Config("christoffel must be a list".into()))?;
            for e in list {
                let idx: Vec<usize> = e
                    .get("index")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 3)
                    .ok_or_else(|| Error::Config("christoffel entries need a three-element index".into()))?
                    .iter()
                    .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| Error::Config("index entries are naturals".into())))
                    .collect::<Result<_>>()?;
                let val = rat_from_json(e.get("value").ok_or_else(|| Error::Config("christoffel entry without value".into()))?)?;
                c.christoffel.insert(sorted([idx[0], idx[1], idx[2]]), val);
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `"2,5"`, `"1/2,-3"` or `""` into rationals.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Rational>().map_err(|_| Error::Config(format!("not a rational number: {t}"))))
        .collect()
}

pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Error::Config(format!("not an integer: {t}"))))
        .collect()
}
