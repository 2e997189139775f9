//! Model documents (TOML) and tabular CSV output.
//!
//! A model document either spells out `u` and `B` or names a builtin:
//!
//! ```toml
//! schema_version = 1
//! label = "serial two-pool"
//! dimension = 2
//! u = [1.0, 0.0]
//! B = [[-1.0, 0.0],
//!      [ 1.0, -1.0]]
//!
//! [units]
//! flux = "gC/yr"
//! ```
//!
//! ```toml
//! schema_version = 1
//! [builtin]
//! name = "emanuel"
//! params = { xi = 2.0 }
//! ```

use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxent::IdentificationResult;
use crate::sampler::PathRecord;
use crate::system::CompartmentalSystem;
use crate::zoo::{emanuel, table1_system, wang, SweepRow, WangParameters};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats `x` with `digits` significant digits, switching to scientific
/// notation below 1e-4 and at or above `10^max(digits, 6)`. Plain integers
/// may show more than `digits` digits (12650.6 -> "12651" at 4 digits).
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= digits.max(6) as i32 {
        format!("{:.*e}", digits - 1, x)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new leading digit (9.99 -> 10.0)
        let carried = s
            .trim_start_matches('-')
            .split('.')
            .next()
            .map_or(0, |i| i.trim_start_matches('0').len());
        if carried as i32 > (exp + 1).max(0) && decimals > 0 {
            format!("{x:.0$}", decimals - 1)
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stock: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinName {
    Emanuel,
    Wang,
    Table1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Builtin {
    pub name: BuiltinName,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl Builtin {
    fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Document(format!(
                "unknown parameter {k:?} for builtin {:?}",
                self.name
            ))),
            None => Ok(()),
        }
    }

    /// Parses `emanuel`, `emanuel:2`, `wang:0.5`, `table1:4` or `table1:1:0.5`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Document(format!("bad number {p:?} in {spec:?}")))
            })
            .collect::<Result<_>>()?;
        let (name, keys): (BuiltinName, &[&str]) = match name {
            "emanuel" => (BuiltinName::Emanuel, &["xi"]),
            "wang" => (BuiltinName::Wang, &["epsilon"]),
            "table1" => (BuiltinName::Table1, &["row", "lambda"]),
            other => return Err(Error::Document(format!("unknown builtin {other:?}"))),
        };
        if nums.len() > keys.len() {
            return Err(Error::Document(format!("too many parameters in {spec:?}")));
        }
        let params = keys.iter().zip(nums).map(|(k, v)| (k.to_string(), v)).collect();
        Ok(Builtin { name, params })
    }

    pub fn build(&self) -> Result<CompartmentalSystem> {
        match self.name {
            BuiltinName::Emanuel => {
                self.check_keys(&["xi"])?;
                emanuel(self.param("xi").unwrap_or(1.0))
            }
            BuiltinName::Wang => {
                self.check_keys(&["epsilon", "mu_b", "f_npp", "k_s", "v_s"])?;
                let d = WangParameters::default();
                wang(&WangParameters {
                    mu_b: self.param("mu_b").unwrap_or(d.mu_b),
                    f_npp: self.param("f_npp").unwrap_or(d.f_npp),
                    k_s: self.param("k_s").unwrap_or(d.k_s),
                    v_s: self.param("v_s").unwrap_or(d.v_s),
                    epsilon: self.param("epsilon").unwrap_or(d.epsilon),
                })
            }
            BuiltinName::Table1 => {
                self.check_keys(&["row", "lambda"])?;
                let row = self
                    .param("row")
                    .ok_or_else(|| Error::Document("table1 needs a row parameter".into()))?;
                if row.fract() != 0.0 || !(1.0..=7.0).contains(&row) {
                    return Err(Error::Document(format!("table1 row must be 1..=7, got {row}")));
                }
                table1_system(row as usize, self.param("lambda").unwrap_or(1.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
}

impl ModelDocument {
    pub fn from_system(sys: &CompartmentalSystem) -> Self {
        let d = sys.dimension();
        let b = sys.matrix();
        ModelDocument {
            schema_version: SCHEMA_VERSION,
            label: sys.label().map(str::to_string),
            dimension: Some(d),
            u: Some(sys.input().iter().cloned().collect()),
            b: Some((0..d).map(|i| (0..d).map(|j| b[(i, j)]).collect()).collect()),
            units: None,
            builtin: None,
        }
    }

    pub fn from_builtin(builtin: Builtin) -> Self {
        ModelDocument {
            schema_version: SCHEMA_VERSION,
            label: None,
            dimension: None,
            u: None,
            b: None,
            units: None,
            builtin: Some(builtin),
        }
    }

    /// Parses and checks the document's shape (not the model's validity).
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ModelDocument = toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        doc.check_shape()?;
        Ok(doc)
    }

    fn check_shape(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Document(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        match (&self.u, &self.b, &self.builtin) {
            (Some(u), Some(b), None) => {
                let d = u.len();
                if d == 0 {
                    return Err(Error::Document("u is empty".into()));
                }
                if let Some(dim) = self.dimension {
                    if dim != d {
                        return Err(Error::Document(format!("dimension = {dim} but u has {d} entries")));
                    }
                }
                if b.len() != d || b.iter().any(|row| row.len() != d) {
                    return Err(Error::Document(format!("B must be {d}x{d}")));
                }
                Ok(())
            }
            (None, None, Some(_)) => Ok(()),
            _ => Err(Error::Document("need either both u and B, or a builtin section".into())),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model documents always serialise")
    }

    /// Builds and validates the described system.
    pub fn to_system(&self) -> Result<CompartmentalSystem> {
        self.check_shape()?;
        let sys = match (&self.u, &self.b, &self.builtin) {
            (Some(u), Some(b), None) => {
                let d = u.len();
                CompartmentalSystem::new(DVector::from_vec(u.clone()), DMatrix::from_fn(d, d, |i, j| b[i][j]))?
            }
            (_, _, Some(builtin)) => builtin.build()?,
            _ => unreachable!("shape checked"),
        };
        Ok(match &self.label {
            Some(l) => sys.labeled(l.clone()),
            None => sys,
        })
    }

    /// Raw `(u, B)` without validation, for reporting violations.
    pub fn raw_parts(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_shape()?;
        match (&self.u, &self.b, &self.builtin) {
            (Some(u), Some(b), None) => {
                let d = u.len();
                Ok((DVector::from_vec(u.clone()), DMatrix::from_fn(d, d, |i, j| b[i][j])))
            }
            (_, _, Some(builtin)) => {
                let sys = builtin.build()?;
                Ok((sys.input().clone(), sys.matrix().clone()))
            }
            _ => unreachable!("shape checked"),
        }
    }
}

const CSV_DIGITS: usize = 12;

fn csv_line(out: &mut impl Write, fields: impl IntoIterator<Item = String>) -> io::Result<()> {
    let fields: Vec<String> = fields.into_iter().collect();
    writeln!(out, "{}", fields.join(","))
}

fn num(x: f64) -> String {
    fmt_sig(x, CSV_DIGITS)
}

/// Sweep table: `param, x1..xd, ET, EN, H, H_beta, H_jump, H_sojourn, theta,
/// thetaJ, op_H, op_theta, op_thetaJ`.
pub fn write_sweep_csv<'a>(
    out: &mut impl Write,
    dimension: usize,
    rows: impl IntoIterator<Item = &'a SweepRow>,
) -> io::Result<()> {
    let mut header = vec!["param".to_string()];
    header.extend((1..=dimension).map(|i| format!("x{i}")));
    header.extend(
        [
            "ET",
            "EN",
            "H",
            "H_beta",
            "H_jump",
            "H_sojourn",
            "theta",
            "thetaJ",
            "op_H",
            "op_theta",
            "op_thetaJ",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    csv_line(out, header)?;
    for row in rows {
        let r = &row.report;
        let mut fields = vec![num(row.param)];
        fields.extend(row.stocks.iter().map(|&x| num(x)));
        fields.extend(
            [
                row.mean_transit,
                row.expected_jumps,
                r.path_entropy,
                r.decomposition.entry,
                r.decomposition.jump,
                r.decomposition.sojourn,
                r.rate_per_time,
                r.rate_per_jump,
                r.one_pool.path_entropy,
                r.one_pool.rate_per_time,
                r.one_pool.rate_per_jump,
            ]
            .into_iter()
            .map(num),
        );
        csv_line(out, fields)?;
    }
    Ok(())
}

/// Per-path table: `path_index, n_jumps, transit_time, exit_pool, log_density`
/// with one-based pools.
pub fn write_path_csv<'a>(out: &mut impl Write, records: impl IntoIterator<Item = &'a PathRecord>) -> io::Result<()> {
    writeln!(out, "path_index,n_jumps,transit_time,exit_pool,log_density")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.index,
            r.jumps,
            num(r.transit_time),
            r.exit_from + 1,
            num(r.log_density)
        )?;
    }
    Ok(())
}

/// Local maxima table (or every grid start when they were recorded).
pub fn write_identification_csv(out: &mut impl Write, result: &IdentificationResult) -> io::Result<()> {
    writeln!(
        out,
        "start_B12,start_B21,start_z1,start_z2,B12,B21,z1,z2,theta,H,mean_transit,n_starts"
    )?;
    let row = |start: &[f64; 4], m: &crate::maxent::LocalMaximum, n: usize| {
        let mut f: Vec<String> = start.iter().map(|&x| num(x)).collect();
        f.extend(m.parameters.as_array().iter().map(|&x| num(x)));
        f.extend([m.theta, m.path_entropy, m.mean_transit].into_iter().map(num));
        f.push(n.to_string());
        f
    };
    if result.start_outcomes.is_empty() {
        for m in &result.local_maxima {
            csv_line(out, row(&m.start, m, m.n_starts))?;
        }
    } else {
        for s in &result.start_outcomes {
            csv_line(out, row(&s.start, &result.local_maxima[s.maximum], 1))?;
        }
    }
    Ok(())
}
