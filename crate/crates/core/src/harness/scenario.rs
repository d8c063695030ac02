//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! VALUES a b c d e
//! ADD X1 a b
//! DEL X1 a
//! POP
//! CHECK
//! ```
//!
//! `POP` retracts the most recent live `ADD` together with everything that
//! happened after it.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::ValueId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Add { var: String, domain: Vec<ValueId> },
    Del { var: String, value: ValueId },
    Pop,
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub value_names: Vec<String>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: POP without a live ADD")]
    LifoViolation { line: usize },
    #[error("line {line}: unknown symbol `{symbol}`")]
    UnknownSymbol { line: usize, symbol: String },
}

impl Scenario {
    pub fn value_name(&self, v: ValueId) -> &str {
        &self.value_names[v.index()]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.value_names.is_empty() {
            writeln!(out, "VALUES {}", self.value_names.join(" ")).unwrap();
        }
        for step in &self.steps {
            match step {
                Step::Add { var, domain } => {
                    let names: Vec<&str> = domain.iter().map(|&v| self.value_name(v)).collect();
                    writeln!(out, "ADD {var} {}", names.join(" ")).unwrap();
                }
                Step::Del { var, value } => writeln!(out, "DEL {var} {}", self.value_name(*value)).unwrap(),
                Step::Pop => out.push_str("POP\n"),
                Step::Check => out.push_str("CHECK\n"),
            }
        }
        out
    }

    pub fn num_adds(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Add { .. })).count()
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut scenario = Scenario::default();
    let mut values: HashMap<String, ValueId> = HashMap::new();
    let mut live: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        let args: Vec<&str> = tokens.collect();
        let lookup = |name: &str| {
            values.get(name).copied().ok_or_else(|| ScenarioError::UnknownSymbol {
                line,
                symbol: name.to_string(),
            })
        };
        match keyword {
            "VALUES" => {
                for &name in &args {
                    if values.contains_key(name) {
                        return Err(parse_error(line, format!("value `{name}` declared twice")));
                    }
                    values.insert(name.to_string(), ValueId(scenario.value_names.len() as u32));
                    scenario.value_names.push(name.to_string());
                }
            }
            "ADD" => {
                let Some((&var, vals)) = args.split_first() else {
                    return Err(parse_error(line, "ADD needs a variable"));
                };
                if vals.is_empty() {
                    return Err(parse_error(line, format!("ADD {var} has an empty domain")));
                }
                if live.iter().any(|v| v == var) {
                    return Err(parse_error(line, format!("variable `{var}` is already live")));
                }
                let mut domain = Vec::with_capacity(vals.len());
                for &name in vals {
                    let v = lookup(name)?;
                    if !domain.contains(&v) {
                        domain.push(v);
                    }
                }
                live.push(var.to_string());
                scenario.steps.push(Step::Add {
                    var: var.to_string(),
                    domain,
                });
            }
            "DEL" => {
                let [var, value] = args[..] else {
                    return Err(parse_error(line, "DEL takes a variable and a value"));
                };
                if !live.iter().any(|v| v == var) {
                    return Err(ScenarioError::UnknownSymbol {
                        line,
                        symbol: var.to_string(),
                    });
                }
                let value = lookup(value)?;
                scenario.steps.push(Step::Del {
                    var: var.to_string(),
                    value,
                });
            }
            "POP" | "CHECK" => {
                if !args.is_empty() {
                    return Err(parse_error(line, format!("{keyword} takes no arguments")));
                }
                if keyword == "POP" {
                    if live.pop().is_none() {
                        return Err(ScenarioError::LifoViolation { line });
                    }
                    scenario.steps.push(Step::Pop);
                } else {
                    scenario.steps.push(Step::Check);
                }
            }
            other => return Err(parse_error(line, format!("unknown statement `{other}`"))),
        }
    }
    Ok(scenario)
}

fn value_names(d: usize) -> Vec<String> {
    if d <= 26 {
        (0..d).map(|i| char::from(b'a' + i as u8).to_string()).collect()
    } else {
        (0..d).map(|i| format!("v{i}")).collect()
    }
}

/// A random LIFO-valid scenario; a deterministic function of its arguments.
pub fn generate_random_scenario(seed: u64, p_max: usize, d_max: usize, del_rate: f64) -> Scenario {
    let p_max = p_max.max(1);
    let d_max = d_max.max(1);
    let del_rate = del_rate.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let all_values: Vec<ValueId> = (0..d_max as u32).map(ValueId).collect();
    let mut steps = Vec::new();
    let mut live: Vec<(String, Vec<ValueId>)> = Vec::new();
    let mut next_var = 1;

    for _ in 0..4 * p_max + 4 {
        if !live.is_empty() && del_rate > 0.0 && rng.gen_bool(del_rate) {
            let (var, domain) = live.choose(&mut rng).expect("non-empty");
            let value = *domain.choose(&mut rng).expect("non-empty domain");
            steps.push(Step::Del {
                var: var.clone(),
                value,
            });
        } else if live.len() < p_max && (live.is_empty() || rng.gen_bool(0.6)) {
            let size = rng.gen_range(1..=d_max);
            let mut domain: Vec<ValueId> = all_values.choose_multiple(&mut rng, size).copied().collect();
            domain.sort_unstable();
            let var = format!("X{next_var}");
            next_var += 1;
            live.push((var.clone(), domain.clone()));
            steps.push(Step::Add { var, domain });
        } else {
            live.pop();
            steps.push(Step::Pop);
        }
        if rng.gen_bool(0.5) {
            steps.push(Step::Check);
        }
    }
    steps.push(Step::Check);
    Scenario {
        value_names: value_names(d_max),
        steps,
    }
}

/// `p` variables, each with the full domain of `d` values, added one by one.
pub fn adoption_sweep(p: usize, d: usize) -> Scenario {
    let domain: Vec<ValueId> = (0..d as u32).map(ValueId).collect();
    let mut steps: Vec<Step> = (1..=p)
        .map(|i| Step::Add {
            var: format!("X{i}"),
            domain: domain.clone(),
        })
        .collect();
    steps.push(Step::Check);
    Scenario {
        value_names: value_names(d),
        steps,
    }
}
