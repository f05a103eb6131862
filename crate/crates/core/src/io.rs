//! JSON market documents: parsing with path-aware errors and conversion into
//! validated markets, orders and relevance classes.

use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbitrage::market_relevance;
use crate::market::{
    validate_market, ConeMode, ConeSpec, MarketError, MarketSpec, Payoff, ValidatedMarket,
};
use crate::order::{
    build_order, custom_relevance, OrderError, OrderKind, OrderStructure, RelevancePreset,
    RelevanceSpec,
};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema error at {path} (line {line}, column {column}): {message}")]
    SchemaError {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("rational parse error at {path} (line {line}, column {column}): {message}")]
    RationalParseError {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown asset {0:?}")]
    UnknownAsset(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetDocument {
    pub name: String,
    /// `[time][state]`.
    pub prices: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDocument {
    #[serde(default = "linear_mode")]
    pub mode: ConeMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<Rational>>>,
    /// Asset names that cannot be sold short (cone mode, derived generators).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub long_only: Vec<String>,
}

fn linear_mode() -> ConeMode {
    ConeMode::Linear
}

impl Default for ConeDocument {
    fn default() -> Self {
        Self {
            mode: ConeMode::Linear,
            generators: None,
            long_only: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrderKindName {
    #[default]
    Pointwise,
    AlmostSure,
    QuasiSure,
    Expectation,
    SmoothAmbiguity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OrderDocument {
    #[serde(default)]
    pub kind: OrderKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture_weights: Option<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomRelevance {
    pub custom: Vec<Vec<Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelevanceDocument {
    Preset(RelevancePreset),
    Custom(CustomRelevance),
}

impl Default for RelevanceDocument {
    fn default() -> Self {
        RelevanceDocument::Preset(RelevancePreset::Rop)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpecDocument {
    pub states: Vec<String>,
    /// `[time][cell]` of state names.
    pub filtration: Vec<Vec<Vec<String>>>,
    pub assets: Vec<AssetDocument>,
    #[serde(default)]
    pub cone: ConeDocument,
    #[serde(default)]
    pub order: OrderDocument,
    #[serde(default)]
    pub relevance: RelevanceDocument,
}

/// A document converted into the objects every analysis needs.
#[derive(Debug, Clone)]
pub struct LoadedMarket {
    pub market: ValidatedMarket,
    pub order: OrderStructure,
    pub relevance: RelevanceSpec,
}

fn schema_error(err: serde_path_to_error::Error<serde_json::Error>) -> IoError {
    let path = err.path().to_string();
    let inner = err.into_inner();
    let (line, column) = (inner.line(), inner.column());
    let message = inner.to_string();
    if message.contains("as an exact rational") {
        IoError::RationalParseError {
            path,
            line,
            column,
            message,
        }
    } else {
        IoError::SchemaError {
            path,
            line,
            column,
            message,
        }
    }
}

/// Parses a market document from UTF-8 JSON.
pub fn parse_spec(bytes: &[u8]) -> Result<MarketSpecDocument, IoError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: MarketSpecDocument =
        serde_path_to_error::deserialize(&mut de).map_err(schema_error)?;
    de.end().map_err(|e| IoError::SchemaError {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(doc)
}

pub fn read_spec(path: &Path) -> Result<MarketSpecDocument, IoError> {
    let bytes = std::fs::read(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&bytes)
}

/// Serializes a document with two-space indentation and a trailing newline.
pub fn write_spec(doc: &MarketSpecDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

impl MarketSpecDocument {
    pub fn state_index(&self, name: &str) -> Result<usize, IoError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| IoError::UnknownState(name.to_string()))
    }

    pub fn asset_index(&self, name: &str) -> Result<usize, IoError> {
        self.assets
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| IoError::UnknownAsset(name.to_string()))
    }

    pub fn to_market_spec(&self) -> Result<MarketSpec, IoError> {
        let filtration = self
            .filtration
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|cell| cell.iter().map(|s| self.state_index(s)).collect())
                    .collect()
            })
            .collect::<Result<Vec<Vec<Vec<usize>>>, IoError>>()?;
        let times = self.filtration.len();
        let mut prices = vec![Vec::with_capacity(self.assets.len()); times];
        for a in &self.assets {
            if a.prices.len() != times {
                return Err(MarketError::PriceShape(format!(
                    "asset {:?} lists {} dates, the filtration has {}",
                    a.name,
                    a.prices.len(),
                    times
                ))
                .into());
            }
            for (t, row) in a.prices.iter().enumerate() {
                prices[t].push(row.clone());
            }
        }
        let long_only = self
            .cone
            .long_only
            .iter()
            .map(|n| self.asset_index(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MarketSpec {
            states: self.states.clone(),
            filtration,
            assets: self.assets.iter().map(|a| a.name.clone()).collect(),
            prices,
            cone: ConeSpec {
                mode: self.cone.mode,
                generators: self.cone.generators.clone(),
                long_only,
            },
        })
    }

    pub fn to_market(&self) -> Result<ValidatedMarket, IoError> {
        Ok(validate_market(self.to_market_spec()?)?)
    }

    pub fn order_kind(&self) -> Result<OrderKind, IoError> {
        let priors = || {
            self.order.priors.clone().ok_or_else(|| {
                IoError::Invalid(format!("order kind {:?} needs priors", self.order.kind))
            })
        };
        Ok(match self.order.kind {
            OrderKindName::Pointwise => OrderKind::Pointwise,
            OrderKindName::AlmostSure => {
                let mut p = priors()?;
                if p.len() != 1 {
                    return Err(IoError::Invalid(
                        "almost_sure order takes exactly one prior".into(),
                    ));
                }
                OrderKind::AlmostSure(p.remove(0))
            }
            OrderKindName::QuasiSure => OrderKind::QuasiSure(priors()?),
            OrderKindName::Expectation => OrderKind::Expectation(priors()?),
            OrderKindName::SmoothAmbiguity => OrderKind::SmoothAmbiguity {
                weights: self.order.mixture_weights.clone().ok_or_else(|| {
                    IoError::Invalid("smooth_ambiguity order needs mixture_weights".into())
                })?,
                priors: priors()?,
            },
        })
    }

    pub fn to_order(&self) -> Result<OrderStructure, IoError> {
        Ok(build_order(self.states.len(), self.order_kind()?)?)
    }

    pub fn to_relevance(
        &self,
        market: &ValidatedMarket,
        ord: &OrderStructure,
    ) -> Result<RelevanceSpec, IoError> {
        match &self.relevance {
            RelevanceDocument::Preset(p) => Ok(market_relevance(market, *p, ord)),
            RelevanceDocument::Custom(c) => {
                let generators: Vec<Payoff> = c.custom.iter().cloned().map(Payoff).collect();
                for g in &generators {
                    market.check_payoff(g, "relevance generator")?;
                }
                Ok(custom_relevance(generators, ord)?)
            }
        }
    }

    pub fn load(&self) -> Result<LoadedMarket, IoError> {
        let market = self.to_market()?;
        let order = self.to_order()?;
        let relevance = self.to_relevance(&market, &order)?;
        Ok(LoadedMarket {
            market,
            order,
            relevance,
        })
    }

    /// Re-expresses all prices in units of `asset`, whose price must be
    /// strictly positive everywhere. Explicit generators are left untouched.
    pub fn with_numeraire(&self, asset: &str) -> Result<MarketSpecDocument, IoError> {
        let k = self.asset_index(asset)?;
        let numeraire = &self.assets[k].prices;
        for (t, row) in numeraire.iter().enumerate() {
            if let Some(s) = row.iter().position(|v| !v.is_positive()) {
                return Err(IoError::Invalid(format!(
                    "numeraire {asset:?} is not strictly positive at time {t}, state {:?}",
                    self.states.get(s).map_or("?", |x| x.as_str())
                )));
            }
        }
        let mut out = self.clone();
        for a in out.assets.iter_mut() {
            for (row, base) in a.prices.iter_mut().zip(numeraire) {
                for (v, b) in row.iter_mut().zip(base) {
                    *v = &*v / b;
                }
            }
        }
        Ok(out)
    }
}

/// Reads a payoff given inline (JSON array, or object keyed by state name
/// with missing states at zero) or as a path to a file holding such JSON.
pub fn parse_payoff(arg: &str, states: &[String]) -> Result<Payoff, IoError> {
    let text = inline_or_file(arg)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| IoError::SchemaError {
            path: "payoff".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let rational = |v: &serde_json::Value, at: String| {
        crate::rational::rational_from_json(v).map_err(|e| IoError::RationalParseError {
            path: at,
            line: 0,
            column: 0,
            message: e.to_string(),
        })
    };
    match &value {
        serde_json::Value::Array(items) => {
            if items.len() != states.len() {
                return Err(MarketError::LengthMismatch {
                    what: "payoff".into(),
                    found: items.len(),
                    expected: states.len(),
                }
                .into());
            }
            items
                .iter()
                .enumerate()
                .map(|(i, v)| rational(v, format!("payoff[{i}]")))
                .collect::<Result<Vec<_>, _>>()
                .map(Payoff)
        }
        serde_json::Value::Object(map) => {
            let mut out = vec![Rational::zero(); states.len()];
            for (k, v) in map {
                let i = states
                    .iter()
                    .position(|s| s == k)
                    .ok_or_else(|| IoError::UnknownState(k.clone()))?;
                out[i] = rational(v, format!("payoff.{k}"))?;
            }
            Ok(Payoff(out))
        }
        _ => Err(IoError::Invalid(
            "payoff must be a JSON array or an object keyed by state".into(),
        )),
    }
}

/// Reads a state set: comma-separated names, a JSON array of names, or a
/// path to a file holding such an array.
pub fn parse_state_set(arg: &str, states: &[String]) -> Result<Vec<usize>, IoError> {
    let trimmed = arg.trim();
    let names: Vec<String> = if trimmed.starts_with('[') || Path::new(trimmed).is_file() {
        let text = inline_or_file(trimmed)?;
        serde_json::from_str(&text).map_err(|e| IoError::SchemaError {
            path: "set".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    } else if trimmed.is_empty() {
        Vec::new()
    } else {
        trimmed.split(',').map(|s| s.trim().to_string()).collect()
    };
    let mut out = names
        .iter()
        .map(|n| {
            states
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| IoError::UnknownState(n.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn inline_or_file(arg: &str) -> Result<String, IoError> {
    let trimmed = arg.trim();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return Ok(trimmed.to_string());
    }
    std::fs::read_to_string(trimmed).map_err(|source| IoError::Read {
        path: trimmed.to_string(),
        source,
    })
}
