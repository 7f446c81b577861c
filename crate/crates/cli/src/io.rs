//! System descriptions and placement files.
//!
//! A system is described by a JSON document (schema: [`SystemSpec`]) or by
//! the whitespace-separated legacy layout accepted for convenience:
//!
//! ```text
//! # comment lines start with '#'
//! 45            <- interposer edge length, mm
//! 3             <- chiplet count n
//! cpu 12 12 95  <- n lines: name, width mm, height mm, power W
//! gpu 10 10 150
//! io  6  4  20
//! 0 4 0         <- n matrix rows: wire counts between chiplet pairs
//! 4 0 2
//! 0 2 0
//! ```
//!
//! Both forms validate to the same structure: the connection matrix must be
//! square, zero-diagonal, symmetric and nonnegative, and every chiplet must
//! fit the interposer.

use std::path::Path;

use chiplace_core::{AnnealConfig, Chiplet, Net, Placement, ThermalConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One chiplet in a system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChipletSpec {
    pub name: String,
    /// Width, mm.
    pub width: f64,
    /// Height, mm.
    pub height: f64,
    /// Dissipated power, W.
    pub power: f64,
}

/// Optional overrides of the thermal defaults, all fields independent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalOverrides {
    pub grid_resolution: Option<usize>,
    pub interposer_conductance: Option<f64>,
    pub sink_conductance: Option<f64>,
    pub ambient: Option<f64>,
}

impl ThermalOverrides {
    pub fn apply(&self, mut config: ThermalConfig) -> ThermalConfig {
        if let Some(v) = self.grid_resolution {
            config.grid_resolution = v;
        }
        if let Some(v) = self.interposer_conductance {
            config.interposer_conductance = v;
        }
        if let Some(v) = self.sink_conductance {
            config.sink_conductance = v;
        }
        if let Some(v) = self.ambient {
            config.ambient = v;
        }
        config
    }

    fn is_empty(&self) -> bool {
        *self == ThermalOverrides::default()
    }
}

/// Optional overrides of the annealing defaults, all fields independent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealOverrides {
    pub decay: Option<f64>,
    pub min_temperature: Option<f64>,
    pub granularity: Option<f64>,
    pub inner_iterations: Option<usize>,
    pub oracle_budget: Option<u64>,
    pub oracle_interleave: Option<u64>,
    pub global_retrain_period: Option<u32>,
    pub hot_threshold: Option<f64>,
    pub weight_a_hot: Option<f64>,
    pub seed_samples: Option<usize>,
}

impl AnnealOverrides {
    pub fn apply(&self, mut config: AnnealConfig) -> AnnealConfig {
        if let Some(v) = self.decay {
            config.decay = v;
        }
        if let Some(v) = self.min_temperature {
            config.min_temperature = v;
        }
        if let Some(v) = self.granularity {
            config.granularity = v;
        }
        if let Some(v) = self.inner_iterations {
            config.inner_iterations = v;
        }
        if let Some(v) = self.oracle_budget {
            config.oracle_budget = v;
        }
        if let Some(v) = self.oracle_interleave {
            config.oracle_interleave = v;
        }
        if let Some(v) = self.global_retrain_period {
            config.global_retrain_period = v;
        }
        if let Some(v) = self.hot_threshold {
            config.hot_threshold = v;
        }
        if let Some(v) = self.weight_a_hot {
            config.weight_a_hot = v;
        }
        if let Some(v) = self.seed_samples {
            config.seed_samples = v;
        }
        config
    }

    fn is_empty(&self) -> bool {
        *self == AnnealOverrides::default()
    }
}

/// A validated system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub chiplets: Vec<ChipletSpec>,
    /// Wire counts between chiplet pairs; square, zero-diagonal, symmetric,
    /// nonnegative.
    pub connections: Vec<Vec<i64>>,
    /// Interposer edge length, mm.
    pub interposer_size: f64,
    #[serde(default, skip_serializing_if = "ThermalOverrides::is_empty")]
    pub thermal: ThermalOverrides,
    #[serde(default, skip_serializing_if = "AnnealOverrides::is_empty")]
    pub anneal: AnnealOverrides,
}

impl SystemSpec {
    /// Check every structural invariant; errors name the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.chiplets.len();
        if n == 0 {
            return Err(CliError::Validation("chiplets: at least one chiplet is required".into()));
        }
        if !self.interposer_size.is_finite() || self.interposer_size <= 0.0 {
            return Err(CliError::Validation(format!(
                "interposer_size: must be positive and finite, got {}",
                self.interposer_size
            )));
        }
        for (i, c) in self.chiplets.iter().enumerate() {
            if c.name.is_empty() {
                return Err(CliError::Validation(format!("chiplets[{i}].name: must not be empty")));
            }
            if !(c.width.is_finite() && c.width > 0.0 && c.height.is_finite() && c.height > 0.0) {
                return Err(CliError::Validation(format!(
                    "chiplets[{i}] ({}): dimensions must be positive and finite, got {}x{}",
                    c.name, c.width, c.height
                )));
            }
            if !(c.power.is_finite() && c.power >= 0.0) {
                return Err(CliError::Validation(format!(
                    "chiplets[{i}] ({}): power must be nonnegative and finite, got {}",
                    c.name, c.power
                )));
            }
            if c.width > self.interposer_size || c.height > self.interposer_size {
                return Err(CliError::Validation(format!(
                    "chiplets[{i}] ({}): {}x{} mm cannot fit a {} mm interposer",
                    c.name, c.width, c.height, self.interposer_size
                )));
            }
            if self.chiplets[..i].iter().any(|other| other.name == c.name) {
                return Err(CliError::Validation(format!(
                    "chiplets[{i}].name: duplicate name '{}'",
                    c.name
                )));
            }
        }
        if self.connections.len() != n {
            return Err(CliError::Validation(format!(
                "connections: {} rows for {} chiplets",
                self.connections.len(),
                n
            )));
        }
        for (i, row) in self.connections.iter().enumerate() {
            if row.len() != n {
                return Err(CliError::Validation(format!(
                    "connections[{i}]: {} columns in a {n}-chiplet matrix",
                    row.len()
                )));
            }
            for (j, &entry) in row.iter().enumerate() {
                if entry < 0 {
                    return Err(CliError::Validation(format!(
                        "connections[{i}][{j}]: negative wire count {entry}"
                    )));
                }
                if i == j && entry != 0 {
                    return Err(CliError::Validation(format!(
                        "connections[{i}][{j}]: diagonal must be zero, got {entry}"
                    )));
                }
                if self.connections[j][i] != entry {
                    return Err(CliError::Validation(format!(
                        "connections[{i}][{j}]: asymmetric ({entry} vs {} at [{j}][{i}])",
                        self.connections[j][i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Core-model chiplets, indexed in declaration order.
    pub fn chiplets(&self) -> Vec<Chiplet> {
        self.chiplets
            .iter()
            .enumerate()
            .map(|(i, c)| Chiplet::new(i, c.width, c.height, c.power))
            .collect()
    }

    /// Two-pin nets from the upper triangle of the connection matrix, in
    /// row-major order.
    pub fn nets(&self) -> Vec<Net> {
        let mut nets = Vec::new();
        for i in 0..self.chiplets.len() {
            for j in (i + 1)..self.chiplets.len() {
                let wires = self.connections[i][j];
                if wires > 0 {
                    nets.push(Net::new(nets.len(), i, j, wires as u32));
                }
            }
        }
        nets
    }
}

/// Parse and validate a system description, accepting both the JSON schema
/// and the legacy whitespace layout (sniffed by the leading '{').
pub fn parse_spec(path: &Path) -> Result<SystemSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_spec_str(&text)
}

/// [`parse_spec`] on in-memory text.
pub fn parse_spec_str(text: &str) -> Result<SystemSpec, CliError> {
    let spec = if text.trim_start().starts_with('{') {
        serde_json::from_str::<SystemSpec>(text)
            .map_err(|e| CliError::Parse(format!("system spec: {e}")))?
    } else {
        parse_legacy(text)?
    };
    spec.validate()?;
    Ok(spec)
}

/// Serialize a spec to the canonical JSON form; `parse_spec_str` inverts
/// this exactly.
pub fn write_spec(spec: &SystemSpec) -> String {
    let mut out = serde_json::to_string_pretty(spec).expect("spec serialization cannot fail");
    out.push('\n');
    out
}

fn parse_legacy(text: &str) -> Result<SystemSpec, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| CliError::Parse(format!("legacy spec: missing {what} line")))
    };

    let (line_no, size_line) = next("interposer size")?;
    let interposer_size: f64 = size_line
        .parse()
        .map_err(|_| CliError::Parse(format!("line {line_no}: interposer size '{size_line}' is not a number")))?;

    let (line_no, count_line) = next("chiplet count")?;
    let n: usize = count_line
        .parse()
        .map_err(|_| CliError::Parse(format!("line {line_no}: chiplet count '{count_line}' is not an integer")))?;

    let mut chiplets = Vec::with_capacity(n);
    for _ in 0..n {
        let (line_no, line) = next("chiplet")?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(CliError::Parse(format!(
                "line {line_no}: expected 'name width height power', got '{line}'"
            )));
        }
        let number = |what: &str, token: &str| -> Result<f64, CliError> {
            token.parse().map_err(|_| {
                CliError::Parse(format!("line {line_no}: {what} '{token}' is not a number"))
            })
        };
        chiplets.push(ChipletSpec {
            name: fields[0].to_string(),
            width: number("width", fields[1])?,
            height: number("height", fields[2])?,
            power: number("power", fields[3])?,
        });
    }

    let mut connections = Vec::with_capacity(n);
    for _ in 0..n {
        let (line_no, line) = next("connection matrix row")?;
        let row: Result<Vec<i64>, CliError> = line
            .split_whitespace()
            .map(|token| {
                token.parse().map_err(|_| {
                    CliError::Parse(format!(
                        "line {line_no}: wire count '{token}' is not an integer"
                    ))
                })
            })
            .collect();
        connections.push(row?);
    }

    if let Some((line_no, line)) = lines.next() {
        return Err(CliError::Parse(format!("line {line_no}: unexpected trailing content '{line}'")));
    }

    Ok(SystemSpec {
        chiplets,
        connections,
        interposer_size,
        thermal: ThermalOverrides::default(),
        anneal: AnnealOverrides::default(),
    })
}

/// One chiplet of a solved placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedChiplet {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub power: f64,
    pub rotated: bool,
    /// Center coordinates (x, y), mm.
    pub center: (f64, f64),
}

/// A net echoed into a placement file, endpoints by chiplet index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedNet {
    pub a: usize,
    pub b: usize,
    pub wires: u32,
}

/// A placement on disk: geometry plus the netlist needed to re-evaluate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementFile {
    pub interposer_size: f64,
    pub chiplets: Vec<PlacedChiplet>,
    pub nets: Vec<PlacedNet>,
}

impl PlacementFile {
    pub fn from_parts(placement: &Placement, names: &[String], nets: &[Net]) -> Self {
        assert_eq!(placement.len(), names.len(), "one name per chiplet");
        let chiplets = placement
            .chiplets
            .iter()
            .zip(&placement.centers)
            .zip(names)
            .map(|((c, &center), name)| PlacedChiplet {
                name: name.clone(),
                width: c.width,
                height: c.height,
                power: c.power,
                rotated: c.rotated,
                center,
            })
            .collect();
        let nets = nets
            .iter()
            .map(|n| PlacedNet { a: n.endpoints.0, b: n.endpoints.1, wires: n.wire_count })
            .collect();
        PlacementFile { interposer_size: placement.interposer_size, chiplets, nets }
    }

    /// Rebuild the core model. Validates geometry and net indices.
    pub fn to_parts(&self) -> Result<(Placement, Vec<Net>), CliError> {
        if self.chiplets.is_empty() {
            return Err(CliError::Validation("chiplets: placement file is empty".into()));
        }
        let mut chiplets = Vec::with_capacity(self.chiplets.len());
        let mut centers = Vec::with_capacity(self.chiplets.len());
        for (i, c) in self.chiplets.iter().enumerate() {
            if !(c.width.is_finite() && c.width > 0.0 && c.height.is_finite() && c.height > 0.0) {
                return Err(CliError::Validation(format!(
                    "chiplets[{i}] ({}): dimensions must be positive and finite, got {}x{}",
                    c.name, c.width, c.height
                )));
            }
            let mut chiplet = Chiplet::new(i, c.width, c.height, c.power);
            chiplet.rotated = c.rotated;
            chiplets.push(chiplet);
            centers.push(c.center);
        }
        let placement = Placement::new(chiplets, centers, self.interposer_size);
        if !placement.is_legal() {
            return Err(CliError::Validation(
                "placement file describes an overlapping or out-of-bounds layout".into(),
            ));
        }
        let mut nets = Vec::with_capacity(self.nets.len());
        for (i, n) in self.nets.iter().enumerate() {
            if n.a >= self.chiplets.len() || n.b >= self.chiplets.len() || n.a == n.b {
                return Err(CliError::Validation(format!(
                    "nets[{i}]: invalid endpoints ({}, {})",
                    n.a, n.b
                )));
            }
            nets.push(Net::new(i, n.a, n.b, n.wires));
        }
        Ok((placement, nets))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("placement serialization cannot fail");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("placement file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
