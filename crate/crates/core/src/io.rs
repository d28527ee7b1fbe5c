//! Serialized forms of grids, profiles and branches.
//!
//! JSON records carry a `schema` string; CSV numbers use 12 significant
//! digits in scientific notation so reruns compare byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::constants::ProblemParams;
use crate::error::{Error, Result};
use crate::fraclap::{RadialFunction, RadialGrid, TailSpec};
use crate::gelfand::Branch;

pub const GRID_SCHEMA: &str = "frac-gelfand/grid/v1";
pub const FUNCTION_SCHEMA: &str = "frac-gelfand/radial-function/v1";
pub const BRANCH_SCHEMA: &str = "frac-gelfand/branch/v1";
pub const BRANCH_CSV_HEADER: &str = "peak,lambda,stability_eig,residual_norm,newton_iters";
pub const CSV_DIGITS: usize = 12;
pub const TABLE_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub schema: String,
    pub nodes: Vec<f64>,
}

impl From<&RadialGrid> for GridRecord {
    fn from(g: &RadialGrid) -> Self {
        Self {
            schema: GRID_SCHEMA.into(),
            nodes: g.nodes().to_vec(),
        }
    }
}

impl GridRecord {
    pub fn to_grid(&self) -> Result<RadialGrid> {
        check_schema(&self.schema, GRID_SCHEMA)?;
        RadialGrid::from_nodes(self.nodes.clone())
    }
}

/// A profile with its grid; `values[0]` is `null` when singular at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunctionRecord {
    pub schema: String,
    pub nodes: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub tail: TailSpec,
    pub singular_at_origin: bool,
}

impl From<&RadialFunction> for RadialFunctionRecord {
    fn from(f: &RadialFunction) -> Self {
        let singular = f.is_singular_at_origin();
        Self {
            schema: FUNCTION_SCHEMA.into(),
            nodes: f.grid().nodes().to_vec(),
            values: f
                .values()
                .iter()
                .enumerate()
                .map(|(j, &v)| (!(singular && j == 0)).then_some(v))
                .collect(),
            tail: f.tail(),
            singular_at_origin: singular,
        }
    }
}

impl RadialFunctionRecord {
    pub fn to_function(&self) -> Result<RadialFunction> {
        check_schema(&self.schema, FUNCTION_SCHEMA)?;
        let grid = Arc::new(RadialGrid::from_nodes(self.nodes.clone())?);
        let values: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| match v {
                Some(x) => Ok(*x),
                None if j == 0 && self.singular_at_origin => Ok(f64::NAN),
                None => Err(Error::Domain(format!("missing value at node {j}"))),
            })
            .collect::<Result<_>>()?;
        if self.singular_at_origin {
            RadialFunction::singular(grid, values, self.tail)
        } else {
            RadialFunction::new(grid, values, self.tail)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchPointRecord {
    pub peak: f64,
    pub lambda: f64,
    pub stability_eig: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub profile: Option<RadialFunctionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchRecord {
    pub schema: String,
    pub params: ProblemParams<f64>,
    pub lambda_star_estimate: f64,
    pub lambda_star_fit: Option<f64>,
    pub fold_detected: bool,
    pub fold_index: Option<usize>,
    pub points: Vec<BranchPointRecord>,
}

impl BranchRecord {
    pub fn new(branch: &Branch, with_profiles: bool) -> Self {
        Self {
            schema: BRANCH_SCHEMA.into(),
            params: *branch.params(),
            lambda_star_estimate: branch.lambda_star_estimate(),
            lambda_star_fit: branch.lambda_star_fit(),
            fold_detected: branch.fold_detected(),
            fold_index: branch.fold_index(),
            points: branch
                .points()
                .iter()
                .map(|p| BranchPointRecord {
                    peak: p.peak,
                    lambda: p.lambda,
                    stability_eig: p.stability_eig,
                    residual_norm: p.residual_norm,
                    newton_iters: p.newton_iters,
                    profile: with_profiles.then(|| RadialFunctionRecord::from(&p.profile)),
                })
                .collect(),
        }
    }
}

fn check_schema(got: &str, want: &str) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Config(format!("expected schema {want}, found {got}")))
    }
}

/// `x` with `digits` significant digits in scientific notation.
pub fn sci(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// `x` with `digits` significant digits, fixed-point for moderate
/// magnitudes and scientific otherwise.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci(x, digits)
    }
}

/// One row per point under [`BRANCH_CSV_HEADER`].
pub fn branch_csv(branch: &Branch) -> String {
    let mut out = String::from(BRANCH_CSV_HEADER);
    out.push('\n');
    for p in branch.points() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sci(p.peak, CSV_DIGITS),
            sci(p.lambda, CSV_DIGITS),
            sci(p.stability_eig, CSV_DIGITS),
            sci(p.residual_norm, CSV_DIGITS),
            p.newton_iters
        );
    }
    out
}

/// Whitespace-separated `(λ, u(0))` columns for plotting.
pub fn bifurcation_data(branch: &Branch) -> String {
    let mut out = String::from("# lambda peak\n");
    for p in branch.points() {
        let _ = writeln!(out, "{} {}", sci(p.lambda, CSV_DIGITS), sci(p.peak, CSV_DIGITS));
    }
    out
}

/// Gnuplot script drawing `data_file` into `png_file`.
pub fn bifurcation_script(data_file: &str, png_file: &str, title: &str) -> String {
    format!(
        "set terminal pngcairo size 800,600\n\
         set output '{png_file}'\n\
         set title '{title}'\n\
         set xlabel 'lambda'\n\
         set ylabel 'u(0)'\n\
         set grid\n\
         plot '{data_file}' using 1:2 with linespoints pt 7 ps 0.5 title 'branch'\n"
    )
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
