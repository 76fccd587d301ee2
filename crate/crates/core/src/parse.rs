//! Text formats accepted on the command line.

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lattice::{CyclicOrder, Subgroup};
use crate::realizer::BezoutChoice;

/// `p,n,q,m` or a bare modulus `N`.
pub fn parse_order(text: &str) -> Result<CyclicOrder> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| Error::Parse(format!("{s:?} is not a non-negative integer")))
    };
    let exp = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| Error::Parse(format!("{s:?} is not an exponent")))
    };
    match parts.as_slice() {
        [n] => CyclicOrder::from_modulus(num(n)?),
        [p, n, q, m] => CyclicOrder::new(num(p)?, exp(n)?, num(q)?, exp(m)?),
        _ => Err(Error::Parse(format!("order {text:?} must be p,n,q,m or N"))),
    }
}

/// `u,v` with `u q + v p = 1` checked later.
pub fn parse_bezout(text: &str) -> Result<BezoutChoice> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let int = |s: &str| {
        s.parse::<i64>()
            .map_err(|_| Error::Parse(format!("{s:?} is not an integer")))
    };
    match parts.as_slice() {
        [u, v] => Ok(BezoutChoice {
            u: int(u)?,
            v: int(v)?,
        }),
        _ => Err(Error::Parse(format!("bezout {text:?} must be u,v"))),
    }
}

pub type Edge = (Subgroup, Subgroup);

#[derive(Deserialize)]
struct EdgesObject {
    #[serde(default)]
    order: Option<CyclicOrder>,
    edges: Vec<Edge>,
}

/// Edge lists in JSON: either `[[[a,b],[c,d]], ...]` or an object with an
/// `edges` field and an optional `order`.
pub fn parse_edges(text: &str) -> Result<(Option<CyclicOrder>, Vec<Edge>)> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("edges: {e}")))?;
    match value {
        Value::Array(_) => {
            let edges: Vec<Edge> =
                serde_json::from_value(value).map_err(|e| Error::Parse(format!("edges: {e}")))?;
            Ok((None, edges))
        }
        Value::Object(_) => {
            let obj: EdgesObject =
                serde_json::from_value(value).map_err(|e| Error::Parse(format!("edges: {e}")))?;
            Ok((obj.order, obj.edges))
        }
        _ => Err(Error::Parse("edges must be a JSON array or object".into())),
    }
}
