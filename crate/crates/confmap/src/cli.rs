//! Configuration-driven runner: parses experiment configs, runs convergence
//! sweeps to CSV, and emits mapped-grid geometry as JSON polylines with an
//! optional direct SVG rendering.
//!
//! Experiment definitions are JSON bundles (region, base point, point counts,
//! offsets) rather than command-line flags; flags only select the config
//! file, output directory, and emitted formats. CSV numbers are written with
//! 17 significant digits so a rewritten file is bit-identical across runs.

use crate::analysis::{convergence_sweep, ConvergenceRecord, SweepProblem};
use crate::arrangement::{ArrangementError, PointConfig};
use crate::backward_map::{build_backward, BackwardError, BackwardMap, Canonical};
use crate::forward_map::{
    boundary_correspondence, build_forward_multiply, build_forward_simply, ForwardError,
    ForwardMap, SideConditions,
};
use crate::geometry::{Cx, GeometryError, Region};
use crate::reference::{self, ExactMapCase, ReferenceError};
use serde::Deserialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("invalid grid JSON: {0}")]
    GridSchema(String),
    #[error("map evaluation failed while emitting a grid: {0}")]
    Eval(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Backward(#[from] BackwardError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// Region selector of the config file. Exactly the parameters of the chosen
/// `kind` may be present.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub kind: String,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub a1: Option<f64>,
    #[serde(default)]
    pub b1: Option<f64>,
    #[serde(default)]
    pub a2: Option<f64>,
    #[serde(default)]
    pub b2: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
}

impl RegionSpec {
    fn require(v: Option<f64>, field: &str, kind: &str) -> Result<f64, CliError> {
        v.ok_or_else(|| CliError::Invalid(format!("region.{field} is required for kind {kind}")))
    }

    fn reject_extraneous(&self, allowed: &[&str]) -> Result<(), CliError> {
        let fields = [
            ("a", self.a),
            ("a1", self.a1),
            ("b1", self.b1),
            ("a2", self.a2),
            ("b2", self.b2),
            ("rho", self.rho),
        ];
        for (name, value) in fields {
            if value.is_some() && !allowed.contains(&name) {
                return Err(CliError::Invalid(format!(
                    "region.{name} does not apply to kind {}",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    /// Builds the region together with its exact-map oracle when one exists
    /// for the given base point.
    pub fn build(&self, z0: Cx) -> Result<(Region, Option<ExactMapCase>), CliError> {
        let origin = z0.norm() == 0.0;
        match self.kind.as_str() {
            "disk" => {
                self.reject_extraneous(&[])?;
                let exact = (z0.norm() < 1.0)
                    .then(|| reference::mobius_case(z0))
                    .transpose()?;
                Ok((Region::disk(1.0)?, exact))
            }
            "cassini_oval" => {
                self.reject_extraneous(&["a"])?;
                let a = Self::require(self.a, "a", "cassini_oval")?;
                let exact = origin.then(|| reference::cassini_case(a)).transpose()?;
                Ok((Region::cassini_oval(a)?, exact))
            }
            "cassini_frame" => {
                self.reject_extraneous(&["a1", "b1", "a2", "b2"])?;
                let a1 = Self::require(self.a1, "a1", "cassini_frame")?;
                let b1 = Self::require(self.b1, "b1", "cassini_frame")?;
                let a2 = Self::require(self.a2, "a2", "cassini_frame")?;
                let b2 = Self::require(self.b2, "b2", "cassini_frame")?;
                let exact = origin
                    .then(|| reference::frame_case(a1, b1, a2, b2))
                    .transpose()?;
                Ok((Region::cassini_frame(a1, b1, a2, b2)?, exact))
            }
            "annulus" => {
                self.reject_extraneous(&["rho"])?;
                let rho = Self::require(self.rho, "rho", "annulus")?;
                Ok((Region::annulus(rho)?, None))
            }
            other => Err(CliError::Invalid(format!("unknown region kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Csv,
    GridJson,
    Svg,
}

fn default_s() -> f64 {
    1.0
}

fn default_m_factor() -> usize {
    16
}

/// A full experiment definition.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub region: RegionSpec,
    /// Base point as `[re, im]`.
    pub z0: [f64; 2],
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub rtilde_f: f64,
    pub rtilde_b: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_m_factor")]
    pub m_factor: usize,
    #[serde(default)]
    pub outputs: Option<Vec<OutputKind>>,
}

impl RunConfig {
    pub fn z0(&self) -> Cx {
        Cx::new(self.z0[0], self.z0[1])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_list.is_empty() {
            return Err(CliError::Invalid("N_list must not be empty".into()));
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(CliError::Invalid("N_list must be strictly ascending".into()));
        }
        for (name, v) in [("rtilde_f", self.rtilde_f), ("rtilde_b", self.rtilde_b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.s.is_finite() {
            return Err(CliError::Invalid("s must be finite".into()));
        }
        if self.m_factor == 0 {
            return Err(CliError::Invalid("m_factor must be at least 1".into()));
        }
        if !(self.z0[0].is_finite() && self.z0[1].is_finite()) {
            return Err(CliError::Invalid("z0 must be finite".into()));
        }
        Ok(())
    }

    pub fn outputs(&self) -> Vec<OutputKind> {
        self.outputs
            .clone()
            .unwrap_or_else(|| vec![OutputKind::Csv, OutputKind::GridJson])
    }
}

/// Reads and validates a JSON config file; unknown keys are rejected.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Serializes with 17 significant digits (exact round trip for f64); absent
/// values become empty CSV fields.
fn csv_field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Renders sweep records to the CSV format
/// `N,err_f,err_b,err_rho,res_f,res_b,cond_f,cond_b`.
pub fn sweep_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("N,err_f,err_b,err_rho,res_f,res_b,cond_f,cond_b\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            csv_field(r.err_forward),
            csv_field(r.err_backward),
            csv_field(r.err_modulus),
            csv_field(r.residual_f),
            csv_field(r.residual_b),
            csv_field(r.cond_f),
            csv_field(r.cond_b),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridRole {
    Preimage,
    Image,
}

impl GridRole {
    fn as_str(&self) -> &'static str {
        match self {
            GridRole::Preimage => "preimage",
            GridRole::Image => "image",
        }
    }
}

/// Polyline geometry of a mapped grid. JSON schema:
/// `{"role": "preimage"|"image", "polylines": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone)]
pub struct GridImage {
    pub role: GridRole,
    pub polylines: Vec<Vec<Cx>>,
}

impl GridImage {
    pub fn to_json(&self) -> Value {
        json!({
            "role": self.role.as_str(),
            "polylines": self
                .polylines
                .iter()
                .map(|line| line.iter().map(|p| json!([p.re, p.im])).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CliError> {
        let role = match v.get("role").and_then(Value::as_str) {
            Some("preimage") => GridRole::Preimage,
            Some("image") => GridRole::Image,
            other => return Err(CliError::GridSchema(format!("bad role {other:?}"))),
        };
        let lines = v
            .get("polylines")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::GridSchema("missing polylines".into()))?;
        let mut polylines = Vec::with_capacity(lines.len());
        for line in lines {
            let pts = line
                .as_array()
                .ok_or_else(|| CliError::GridSchema("polyline is not an array".into()))?;
            let mut poly = Vec::with_capacity(pts.len());
            for p in pts {
                let pair = p
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| CliError::GridSchema("point is not [re, im]".into()))?;
                let re = pair[0]
                    .as_f64()
                    .ok_or_else(|| CliError::GridSchema("non-numeric coordinate".into()))?;
                let im = pair[1]
                    .as_f64()
                    .ok_or_else(|| CliError::GridSchema("non-numeric coordinate".into()))?;
                poly.push(Cx::new(re, im));
            }
            polylines.push(poly);
        }
        let img = GridImage { role, polylines };
        img.validate()?;
        Ok(img)
    }

    /// Every polyline must have at least two finite points.
    pub fn validate(&self) -> Result<(), CliError> {
        for line in &self.polylines {
            if line.len() < 2 {
                return Err(CliError::GridSchema(
                    "polyline with fewer than 2 points".into(),
                ));
            }
            for p in line {
                if !(p.re.is_finite() && p.im.is_finite()) {
                    return Err(CliError::GridSchema("non-finite polyline point".into()));
                }
            }
        }
        Ok(())
    }
}

const GRID_LINES: usize = 15;
const LINE_SAMPLES: usize = 512;
const RAY_COUNT: usize = 16;
const CIRCLE_COUNT: usize = 8;

/// Cartesian grid lines clipped to the region (preimage) and their images
/// under the forward map.
pub fn forward_grid(map: &ForwardMap) -> Result<(GridImage, GridImage), CliError> {
    let region = map.region();
    let (lo, hi) = region.bounding_box();
    let mut preimage: Vec<Vec<Cx>> = Vec::new();

    let mut clip_line = |points: Vec<Cx>| {
        let mut run: Vec<Cx> = Vec::new();
        for z in points {
            let inside = matches!(region.contains(z), Ok(true));
            if inside {
                run.push(z);
            } else if run.len() >= 2 {
                preimage.push(std::mem::take(&mut run));
            } else {
                run.clear();
            }
        }
        if run.len() >= 2 {
            preimage.push(run);
        }
    };

    for i in 1..=GRID_LINES {
        let x = lo.re + (hi.re - lo.re) * i as f64 / (GRID_LINES + 1) as f64;
        clip_line(
            (0..LINE_SAMPLES)
                .map(|j| {
                    Cx::new(
                        x,
                        lo.im + (hi.im - lo.im) * j as f64 / (LINE_SAMPLES - 1) as f64,
                    )
                })
                .collect(),
        );
        let y = lo.im + (hi.im - lo.im) * i as f64 / (GRID_LINES + 1) as f64;
        clip_line(
            (0..LINE_SAMPLES)
                .map(|j| {
                    Cx::new(
                        lo.re + (hi.re - lo.re) * j as f64 / (LINE_SAMPLES - 1) as f64,
                        y,
                    )
                })
                .collect(),
        );
    }

    let mut image = Vec::with_capacity(preimage.len());
    for line in &preimage {
        let mut mapped = Vec::with_capacity(line.len());
        for &z in line {
            mapped.push(map.eval(z).map_err(|e| CliError::Eval(e.to_string()))?);
        }
        image.push(mapped);
    }
    let pre = GridImage {
        role: GridRole::Preimage,
        polylines: preimage,
    };
    let img = GridImage {
        role: GridRole::Image,
        polylines: image,
    };
    pre.validate()?;
    img.validate()?;
    Ok((pre, img))
}

/// Polar grid (concentric circles and radial rays) of the canonical region
/// and its image under the backward map.
pub fn backward_grid(map: &BackwardMap) -> Result<(GridImage, GridImage), CliError> {
    use std::f64::consts::TAU;
    let r_inner = match map.canonical() {
        Canonical::Disk => 0.0,
        Canonical::Annulus { modulus } => modulus,
    };
    let mut preimage: Vec<Vec<Cx>> = Vec::new();
    let k_start = if r_inner > 0.0 { 0 } else { 1 };
    for k in k_start..=CIRCLE_COUNT {
        let r = r_inner + (1.0 - r_inner) * k as f64 / CIRCLE_COUNT as f64;
        let mut circle: Vec<Cx> = (0..LINE_SAMPLES)
            .map(|j| r * (Cx::i() * TAU * j as f64 / LINE_SAMPLES as f64).exp())
            .collect();
        circle.push(circle[0]); // close the loop
        preimage.push(circle);
    }
    for j in 0..RAY_COUNT {
        let dir = (Cx::i() * TAU * j as f64 / RAY_COUNT as f64).exp();
        let samples = LINE_SAMPLES / 2;
        preimage.push(
            (0..=samples)
                .map(|i| dir * (r_inner + (1.0 - r_inner) * i as f64 / samples as f64))
                .collect(),
        );
    }

    let mut image = Vec::with_capacity(preimage.len());
    for line in &preimage {
        let mut mapped = Vec::with_capacity(line.len());
        for &w in line {
            mapped.push(map.eval(w).map_err(|e| CliError::Eval(e.to_string()))?);
        }
        image.push(mapped);
    }
    let pre = GridImage {
        role: GridRole::Preimage,
        polylines: preimage,
    };
    let img = GridImage {
        role: GridRole::Image,
        polylines: image,
    };
    pre.validate()?;
    img.validate()?;
    Ok((pre, img))
}

/// Direct polyline rendering scaled into the unit view box.
pub fn svg_of(img: &GridImage) -> String {
    let mut lo = Cx::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Cx::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for line in &img.polylines {
        for p in line {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
    }
    let mut svg = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"512\" height=\"512\">\n",
    );
    if !img.polylines.is_empty() {
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(f64::MIN_POSITIVE);
        let pad = 0.02;
        let scale = (1.0 - 2.0 * pad) / span;
        for line in &img.polylines {
            let pts: Vec<String> = line
                .iter()
                .map(|p| {
                    let x = pad + (p.re - lo.re) * scale;
                    let y = pad + (hi.im - p.im) * scale; // flip y for SVG
                    format!("{x:.6},{y:.6}")
                })
                .collect();
            let _ = writeln!(
                svg,
                "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.0015\" points=\"{}\"/>",
                pts.join(" ")
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Everything one `run` invocation produced.
pub struct RunOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub written: Vec<PathBuf>,
    pub notes: Vec<String>,
}

fn write_file(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    std::fs::write(&path, contents).map_err(|source| CliError::WriteFile {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Runs the configured sweep, writes the CSV (plus a `.log` for per-N
/// failures) and, for the largest successful N, the grid files.
pub fn run_sweep(
    config: &RunConfig,
    out_dir: &Path,
    outputs: &[OutputKind],
) -> Result<RunOutcome, CliError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::WriteFile {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let z0 = config.z0();
    let (region, exact) = config.region.build(z0)?;
    let problem = SweepProblem {
        region,
        z0,
        exact,
        rtilde_f: config.rtilde_f,
        rtilde_b: config.rtilde_b,
        m_factor: config.m_factor,
    };
    let records = convergence_sweep(&problem, &config.n_list);

    let mut written = Vec::new();
    let mut notes = Vec::new();

    if outputs.contains(&OutputKind::Csv) {
        write_file(out_dir.join("sweep.csv"), &sweep_csv(&records), &mut written)?;
        let failures: Vec<String> = records
            .iter()
            .filter_map(|r| r.failure.as_ref().map(|m| format!("N={}: {m}", r.n)))
            .collect();
        if !failures.is_empty() {
            write_file(
                out_dir.join("sweep.log"),
                &(failures.join("\n") + "\n"),
                &mut written,
            )?;
        }
    }

    let want_json = outputs.contains(&OutputKind::GridJson);
    let want_svg = outputs.contains(&OutputKind::Svg);
    if want_json || want_svg {
        match records.iter().rev().find(|r| r.failure.is_none()) {
            None => notes.push("no successful build; grid emission skipped".into()),
            Some(best) => {
                let config_n = PointConfig::new(best.n, config.rtilde_f, config.rtilde_b)?;
                let connectivity = problem.region.connectivity();
                let (fwd, _) = if connectivity == 1 {
                    build_forward_simply(&problem.region, z0, &config_n)?
                } else {
                    build_forward_multiply(
                        &problem.region,
                        z0,
                        &config_n,
                        SideConditions::AmanoCompatible,
                    )?
                };
                let mut grids: Vec<(&str, GridImage)> = Vec::new();
                let (pre, img) = forward_grid(&fwd)?;
                grids.push(("forward_preimage", pre));
                grids.push(("forward_image", img));
                match connectivity {
                    1 | 2 => {
                        let canonical = if connectivity == 1 {
                            Canonical::Disk
                        } else {
                            Canonical::Annulus {
                                modulus: fwd.moduli()[0],
                            }
                        };
                        let corr = boundary_correspondence(&fwd, &config_n)?;
                        let (bwd, _) = build_backward(&corr, &config_n, canonical)?;
                        let (pre, img) = backward_grid(&bwd)?;
                        grids.push(("backward_preimage", pre));
                        grids.push(("backward_image", img));
                    }
                    _ => notes.push(format!(
                        "connectivity {connectivity}: backward map not built, forward grids only"
                    )),
                }
                for (stem, grid) in &grids {
                    if grid.polylines.is_empty() {
                        notes.push(format!("{stem}: clipping produced an empty grid"));
                    }
                    if want_json {
                        write_file(
                            out_dir.join(format!("{stem}.json")),
                            &serde_json::to_string(&grid.to_json()).expect("grid json"),
                            &mut written,
                        )?;
                    }
                    if want_svg {
                        write_file(out_dir.join(format!("{stem}.svg")), &svg_of(grid), &mut written)?;
                    }
                }
            }
        }
    }

    Ok(RunOutcome {
        records,
        written,
        notes,
    })
}

/// Maps `--emit` flag values onto output kinds (`json` selects the grid
/// JSON files).
pub fn parse_emit(values: &[String]) -> Result<Vec<OutputKind>, CliError> {
    values
        .iter()
        .map(|v| match v.as_str() {
            "csv" => Ok(OutputKind::Csv),
            "json" | "grid_json" => Ok(OutputKind::GridJson),
            "svg" => Ok(OutputKind::Svg),
            other => Err(CliError::Invalid(format!(
                "unknown emit target {other:?} (expected csv, json, svg)"
            ))),
        })
        .collect()
}
