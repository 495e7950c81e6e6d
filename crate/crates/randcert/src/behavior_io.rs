use std::collections::BTreeMap;

use randcert_core::behavior::idx;
use randcert_core::Behavior;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::SCHEMA;

/// On-disk behavior: probabilities keyed `p[x][y][a][b]` with settings 0/1
/// and outcomes `+`/`-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorFile {
    pub schema: String,
    pub p: BTreeMap<String, f64>,
}

fn outcome(o: usize) -> char {
    if o == 0 { '+' } else { '-' }
}

pub fn key(x: usize, y: usize, a: usize, b: usize) -> String {
    format!("p[{x}][{y}][{}][{}]", outcome(a), outcome(b))
}

impl BehaviorFile {
    pub fn from_behavior(b: &Behavior) -> Self {
        let mut p = BTreeMap::new();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for bb in 0..2 {
                        p.insert(key(x, y, a, bb), b.p(x, y, a, bb));
                    }
                }
            }
        }
        BehaviorFile {
            schema: SCHEMA.into(),
            p,
        }
    }

    pub fn to_behavior(&self) -> CliResult<Behavior> {
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!("unsupported behavior schema {:?}", self.schema)));
        }
        if self.p.len() != 16 {
            return Err(CliError::Config(format!("expected 16 probabilities, got {}", self.p.len())));
        }
        let mut arr = [0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let k = key(x, y, a, b);
                        arr[idx(x, y, a, b)] =
                            *self.p.get(&k).ok_or_else(|| CliError::Config(format!("missing {k}")))?;
                    }
                }
            }
        }
        Ok(Behavior::new(arr)?)
    }

    pub fn parse(s: &str) -> CliResult<Behavior> {
        let f: BehaviorFile = serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        f.to_behavior()
    }
}
