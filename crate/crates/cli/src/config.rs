//! Experiment configuration: a flat `key = value` text file with one
//! documented schema. Unknown keys are errors so typos cannot silently
//! change an experiment. A previously written manifest JSON is accepted in
//! place of a config file and reproduces the run exactly.

use crate::CliError;
use consensus_core::gossip::{Algorithm, McInit};
use consensus_core::quantum;
use consensus_core::Graph;
use nalgebra::DVector;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Fully resolved experiment parameters.
#[derive(Debug)]
pub enum Experiment {
    ClassicalFlow {
        graph: Graph,
        sigma2: f64,
        grid: Vec<f64>,
    },
    QuantumFlow {
        graph: Graph,
        ket: String,
        grid: Vec<f64>,
        step: f64,
    },
    BernoulliReport {
        n: usize,
        p: f64,
    },
    GossipMc {
        graph: Graph,
        algorithm: Algorithm,
        beta: f64,
        seed: u64,
        horizon: usize,
        trials: usize,
        init: McInit,
    },
    GossipExact {
        graph: Graph,
        x0: Vec<f64>,
        beta: f64,
        horizon: usize,
    },
    Ergodicity {
        graph: Graph,
        beta: f64,
        k_max: usize,
    },
}

/// Parsed configuration plus the resolved key/value echo that goes into the
/// manifest (defaults filled in, paths made absolute).
#[derive(Debug)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub kind: String,
    pub prefix: String,
    pub echo: BTreeMap<String, String>,
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn line_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    if line > 0 {
        CliError::Input(format!("line {line}: {msg}"))
    } else {
        CliError::Input(msg.to_string())
    }
}

/// Key/value pairs with the line each was defined on.
struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
    base_dir: PathBuf,
}

impl RawConfig {
    fn from_key_value_text(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(line_err(line_no, "expected 'key = value'"));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(line_err(line_no, "empty key or value"));
            }
            if entries.insert(key.clone(), (line_no, value)).is_some() {
                return Err(line_err(line_no, format!("duplicate key '{key}'")));
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.to_path_buf(),
        })
    }

    fn from_manifest_json(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| input_err(format!("invalid manifest JSON: {e}")))?;
        let config = value
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| input_err("manifest has no 'config' object"))?;
        let mut entries = BTreeMap::new();
        for (k, v) in config {
            let s = v
                .as_str()
                .ok_or_else(|| input_err(format!("manifest config key '{k}' is not a string")))?;
            entries.insert(k.clone(), (0usize, s.to_string()));
        }
        Ok(Self {
            entries,
            base_dir: base_dir.to_path_buf(),
        })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn reject_leftovers(&self, kind: &str) -> Result<(), CliError> {
        if let Some((key, (line, _))) = self.entries.iter().next() {
            return Err(line_err(
                *line,
                format!("key '{key}' is not used by experiment '{kind}'"),
            ));
        }
        Ok(())
    }
}

/// Typed accessors that record the resolved value into the manifest echo.
struct Resolver {
    raw: RawConfig,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    fn required(&mut self, key: &str) -> Result<(usize, String), CliError> {
        let pair = self
            .raw
            .take(key)
            .ok_or_else(|| input_err(format!("missing required key '{key}'")))?;
        self.echo.insert(key.to_string(), pair.1.clone());
        Ok(pair)
    }

    fn optional(&mut self, key: &str, default: &str) -> (usize, String) {
        let (line, value) = self
            .raw
            .take(key)
            .unwrap_or_else(|| (0, default.to_string()));
        self.echo.insert(key.to_string(), value.clone());
        (line, value)
    }

    fn parse<T: std::str::FromStr>(
        &mut self,
        key: &str,
        pair: (usize, String),
        what: &str,
    ) -> Result<T, CliError> {
        pair.1
            .parse::<T>()
            .map_err(|_| line_err(pair.0, format!("key '{key}': expected {what}, got '{}'", pair.1)))
    }

    fn required_parse<T: std::str::FromStr>(
        &mut self,
        key: &str,
        what: &str,
    ) -> Result<T, CliError> {
        let pair = self.required(key)?;
        self.parse(key, pair, what)
    }

    fn optional_parse<T: std::str::FromStr>(
        &mut self,
        key: &str,
        default: &str,
        what: &str,
    ) -> Result<T, CliError> {
        let pair = self.optional(key, default);
        self.parse(key, pair, what)
    }

    fn graph(&mut self) -> Result<Graph, CliError> {
        let (line, value) = self.required("graph")?;
        let path = {
            let p = PathBuf::from(&value);
            if p.is_absolute() {
                p
            } else {
                self.raw.base_dir.join(p)
            }
        };
        let canonical = path
            .canonicalize()
            .map_err(|e| line_err(line, format!("graph file '{}': {e}", path.display())))?;
        self.echo
            .insert("graph".to_string(), canonical.display().to_string());
        Graph::from_edge_list_path(&canonical)
            .map_err(|e| input_err(format!("{}: {e}", canonical.display())))
    }

    fn grid(&mut self, default: &str) -> Result<Vec<f64>, CliError> {
        let (line, value) = self.optional("grid", default);
        parse_grid(&value).map_err(|msg| line_err(line, msg))
    }

    fn x0(&mut self) -> Result<Vec<f64>, CliError> {
        let (line, value) = self.required("x0")?;
        value
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| line_err(line, format!("x0 entry '{}' is not a number", tok.trim())))
            })
            .collect()
    }
}

/// `start:step:stop` inclusive sample grid.
fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{text}' must be start:step:stop"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("grid component '{p}' is not a number")))
        .collect::<Result<_, _>>()?;
    let (start, step, stop) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start || start < 0.0 {
        return Err(format!("grid '{text}' must satisfy 0 <= start <= stop, step > 0"));
    }
    Ok(consensus_core::classical::uniform_grid(start, step, stop))
}

/// Loads and resolves a config file. A `.json` file is treated as a
/// manifest written by a previous run.
pub fn load(path: &Path) -> Result<ResolvedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    let base_dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let raw = if path.extension().is_some_and(|e| e == "json") {
        RawConfig::from_manifest_json(&text, &base_dir)?
    } else {
        RawConfig::from_key_value_text(&text, &base_dir)?
    };
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ResolvedConfig, CliError> {
    let mut r = Resolver {
        raw,
        echo: BTreeMap::new(),
    };
    let kind = r.required("experiment")?.1;
    let prefix = r.optional("out", &kind).1;

    let experiment = match kind.as_str() {
        "classical-flow" => {
            let graph = r.graph()?;
            let sigma2: f64 = r.optional_parse("sigma2", "1.0", "a positive number")?;
            if sigma2 <= 0.0 {
                return Err(input_err(format!("sigma2 = {sigma2} must be positive")));
            }
            let grid = r.grid("0:0.1:5")?;
            Experiment::ClassicalFlow {
                graph,
                sigma2,
                grid,
            }
        }
        "quantum-flow" => {
            let graph = r.graph()?;
            let ket = r.required("ket")?.1;
            let grid = r.grid("0:0.1:20")?;
            let step: f64 = r.optional_parse("step", "0.01", "a positive number")?;
            if step <= 0.0 {
                return Err(input_err(format!("step = {step} must be positive")));
            }
            if ket.chars().count() != graph.node_count() {
                return Err(input_err(format!(
                    "ket '{ket}' has {} qubits but the graph has {} nodes",
                    ket.chars().count(),
                    graph.node_count()
                )));
            }
            Experiment::QuantumFlow {
                graph,
                ket,
                grid,
                step,
            }
        }
        "bernoulli-report" => {
            let n: usize = r.required_parse("n", "a positive integer")?;
            let p: f64 = r.required_parse("p", "a probability in (0,1)")?;
            Experiment::BernoulliReport { n, p }
        }
        "gossip-mc" => {
            let graph = r.graph()?;
            let algorithm: Algorithm = r.required_parse("algorithm", "A1, A1', A2, AQ1 or AQ2")?;
            let beta: f64 = r.optional_parse("beta", "0.5", "a number in (0,1)")?;
            let seed: u64 = r.optional_parse("seed", "0", "an unsigned integer")?;
            let horizon: usize = r.optional_parse("horizon", "50", "a step count")?;
            let trials: usize = r.optional_parse("trials", "10000", "a trial count")?;
            let init = match algorithm {
                Algorithm::A1 | Algorithm::A1Prime | Algorithm::A2 => {
                    let x0 = r.x0()?;
                    McInit::Classical(DVector::from_vec(x0))
                }
                Algorithm::Aq1 | Algorithm::Aq2 => {
                    let ket = r.required("ket")?.1;
                    McInit::Quantum(
                        quantum::qstate_from_kets(&ket)
                            .map_err(|e| input_err(e.to_string()))?,
                    )
                }
            };
            Experiment::GossipMc {
                graph,
                algorithm,
                beta,
                seed,
                horizon,
                trials,
                init,
            }
        }
        "gossip-exact" => {
            let graph = r.graph()?;
            let x0 = r.x0()?;
            let beta: f64 = r.optional_parse("beta", "0.5", "a number in (0,1)")?;
            let horizon: usize = r.optional_parse("horizon", "50", "a step count")?;
            Experiment::GossipExact {
                graph,
                x0,
                beta,
                horizon,
            }
        }
        "ergodicity" => {
            let graph = r.graph()?;
            let beta: f64 = r.optional_parse("beta", "0.5", "a number in (0,1)")?;
            let k_max: usize = r.optional_parse("k_max", "50", "a step count")?;
            Experiment::Ergodicity { graph, beta, k_max }
        }
        other => {
            return Err(input_err(format!(
                "unknown experiment '{other}' (expected classical-flow, quantum-flow, \
                 bernoulli-report, gossip-mc, gossip-exact or ergodicity)"
            )));
        }
    };

    r.raw.reject_leftovers(&kind)?;
    r.echo.insert("experiment".to_string(), kind.clone());
    r.echo.insert("out".to_string(), prefix.clone());
    Ok(ResolvedConfig {
        experiment,
        kind,
        prefix,
        echo: r.echo,
    })
}
