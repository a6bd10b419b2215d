//! Scenario runner behind the command-line tool: configuration, CSV tables
//! and JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::{iterate, IterationStack, MAX_ORDER, MIN_ITERATE_SAMPLES};
use crate::error::Error;
use crate::pauli::{CartesianTriple, Spinor};
use crate::propagator::{populations, propagate, NORM_DRIFT_WARNING};
use crate::protocol::ControlProtocol;
use crate::protocols::{
    adiabaticity_margin, invariance_check, invariant_to_controls, landau_zener, lz_feasibility,
    region_onset, region_scan, shortcut_bc_check, InvariantAnsatz, LZParams, DEFAULT_RATIO_THRESHOLD,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SUPERADIABATIC_OUT";

pub const DEFAULT_SAMPLES: usize = 20001;

/// Largest tolerated invariance residual and endpoint commutator.
pub const INVARIANCE_TOLERANCE: f64 = 1e-6;
pub const ENDPOINT_COMMUTATOR_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    LandauZener,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub durations: Vec<f64>,
    pub rabi_min: f64,
    pub rabi_max: f64,
    pub rabi_points: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self { durations: vec![2.0, 0.2], rabi_min: 0.5, rabi_max: 1000.0, rabi_points: 2000 }
    }
}

impl RegionConfig {
    pub fn rabi_grid(&self) -> Vec<f64> {
        if self.rabi_points == 1 {
            return vec![self.rabi_min];
        }
        let step = (self.rabi_max - self.rabi_min) / (self.rabi_points - 1) as f64;
        (0..self.rabi_points).map(|k| self.rabi_min + step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub protocol: ProtocolKind,
    #[serde(alias = "alpha")]
    pub chirp: f64,
    #[serde(alias = "omega0")]
    pub rabi: f64,
    #[serde(alias = "tf")]
    pub duration: f64,
    pub j_max: usize,
    pub samples: usize,
    pub ratio_threshold: f64,
    pub output_dir: Option<PathBuf>,
    pub region: RegionConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolKind::LandauZener,
            chirp: -20.0,
            rabi: 0.2,
            duration: 0.2,
            j_max: 5,
            samples: DEFAULT_SAMPLES,
            ratio_threshold: DEFAULT_RATIO_THRESHOLD,
            output_dir: None,
            region: RegionConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical quality failure: {0}")]
    Numerical(String),
    #[error("computation failed: {0}")]
    Compute(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 2,
            ScenarioError::Numerical(_) => 3,
            ScenarioError::Compute(Error::InvalidParameter(_) | Error::OrderOutOfRange { .. }) => 2,
            ScenarioError::Compute(_) => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

pub type ScenarioResult<T> = std::result::Result<T, ScenarioError>;

impl ScenarioConfig {
    pub fn from_json(text: &str) -> ScenarioResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> ScenarioResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> ScenarioResult<()> {
        let bad = |m: String| Err(ScenarioError::Config(m));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.samples < MIN_ITERATE_SAMPLES || self.samples.is_multiple_of(2) {
            return bad(format!("samples must be odd and at least {MIN_ITERATE_SAMPLES}, got {}", self.samples));
        }
        if self.j_max > MAX_ORDER {
            return bad(format!("j_max must be at most {MAX_ORDER}, got {}", self.j_max));
        }
        if !(self.ratio_threshold.is_finite() && self.ratio_threshold > 0.0) {
            return bad(format!("ratio_threshold must be positive, got {}", self.ratio_threshold));
        }
        if self.protocol == ProtocolKind::LandauZener {
            self.lz_params().validate().map_err(|e| ScenarioError::Config(e.to_string()))?;
        }
        let r = &self.region;
        if r.durations.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return bad("region durations must be positive".into());
        }
        if !(r.rabi_min > 0.0 && r.rabi_max >= r.rabi_min && r.rabi_max.is_finite()) || r.rabi_points == 0 {
            return bad("region Rabi scan must satisfy 0 < rabi_min <= rabi_max with at least one point".into());
        }
        Ok(())
    }

    pub fn lz_params(&self) -> LZParams {
        LZParams { chirp: self.chirp, rabi: self.rabi, duration: self.duration }
    }

    pub fn protocol(&self) -> ScenarioResult<ControlProtocol> {
        Ok(match self.protocol {
            ProtocolKind::LandauZener => landau_zener(self.lz_params(), self.samples)?,
            ProtocolKind::Invariant => invariant_to_controls(&InvariantAnsatz::new(self.duration)?, self.samples)?,
        })
    }

    fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Files written by a scenario together with its JSON report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub report: serde_json::Value,
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[String]) -> Self {
        Self { text: header.join(",") + "\n" }
    }

    fn row(&mut self, values: impl IntoIterator<Item = f64>) {
        let mut first = true;
        for v in values {
            if !first {
                self.text.push(',');
            }
            first = false;
            write!(self.text, "{v}").unwrap();
        }
        self.text.push('\n');
    }
}

fn emit(dir: &Path, name: &str, csv: Csv, report: &serde_json::Value, files: &mut Vec<PathBuf>) -> ScenarioResult<()> {
    let csv_path = dir.join(format!("{name}.csv"));
    write_atomic(&csv_path, csv.text.as_bytes())?;
    let json_path = dir.join(format!("{name}.json"));
    let mut body = serde_json::to_string_pretty(report).expect("report serializes");
    body.push('\n');
    write_atomic(&json_path, body.as_bytes())?;
    files.push(csv_path);
    files.push(json_path);
    Ok(())
}

fn max_abs(h: &[CartesianTriple], f: impl Fn(&CartesianTriple) -> f64) -> f64 {
    h.iter().map(|c| f(c).abs()).fold(0.0, f64::max)
}

fn drift_check(drift: f64, what: &str) -> ScenarioResult<()> {
    if drift > NORM_DRIFT_WARNING {
        Err(ScenarioError::Numerical(format!("{what}: norm drift {drift:e} exceeds {NORM_DRIFT_WARNING:e}")))
    } else {
        Ok(())
    }
}

fn protocol_summary(cfg: &ScenarioConfig) -> serde_json::Value {
    match cfg.protocol {
        ProtocolKind::LandauZener => json!({
            "kind": "landau_zener",
            "chirp": cfg.chirp,
            "rabi": cfg.rabi,
            "duration": cfg.duration,
            "feasibility": lz_feasibility(&cfg.lz_params()),
        }),
        ProtocolKind::Invariant => json!({ "kind": "invariant", "duration": cfg.duration }),
    }
}

fn stack_for(cfg: &ScenarioConfig, depth: usize) -> ScenarioResult<(ControlProtocol, IterationStack)> {
    let protocol = cfg.protocol()?;
    let stack = iterate(&protocol, depth)?;
    Ok((protocol, stack))
}

/// Maxima of `|X|` and `|Y|` of `H₀^(j)` for `j = 0..=j_max`.
pub fn cmd_table1(cfg: &ScenarioConfig) -> ScenarioResult<Outcome> {
    cfg.validate()?;
    let (protocol, stack) = stack_for(cfg, cfg.j_max)?;
    let mut csv = Csv::new(&["order".into(), "max_abs_x".into(), "max_abs_y".into()]);
    let mut rows = Vec::new();
    for j in 0..=cfg.j_max {
        let h = stack.modified_hamiltonian(j)?;
        let (x, y) = (max_abs(&h, |c| c.x), max_abs(&h, |c| c.y));
        csv.row([j as f64, x, y]);
        rows.push(json!({ "order": j, "max_abs_x": x, "max_abs_y": y }));
    }
    let report = json!({
        "scenario": "table1",
        "protocol": protocol_summary(cfg),
        "samples": cfg.samples,
        "derivatives": format!("{:?}", stack.mode),
        "adiabaticity_margin": adiabaticity_margin(&protocol).ok(),
        "rows": rows,
    });
    let mut files = Vec::new();
    emit(&cfg.output_dir(), "table1", csv, &report, &mut files)?;
    Ok(Outcome { files, report })
}

/// Bare population `P1(t)` under `H₀` and each `H₀^(j)`, starting in `|1⟩`.
pub fn cmd_populations(cfg: &ScenarioConfig) -> ScenarioResult<Outcome> {
    cfg.validate()?;
    let (protocol, stack) = stack_for(cfg, cfg.j_max)?;
    let hamiltonians: Vec<Vec<CartesianTriple>> =
        (0..=cfg.j_max).map(|j| stack.modified_hamiltonian(j)).collect::<Result<_, _>>()?;
    let traces: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = hamiltonians
            .iter()
            .map(|h| scope.spawn(|| propagate(&protocol.grid, h, &Spinor::ground())))
            .collect();
        handles.into_iter().map(|h| h.join().expect("propagation thread panicked")).collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut header = vec!["t".to_string(), "p1_h0".to_string()];
    header.extend((1..=cfg.j_max).map(|j| format!("p1_h0_{j}")));
    let mut csv = Csv::new(&header);
    let pops: Vec<_> = traces.iter().map(populations).collect();
    for (i, t) in protocol.grid.times().enumerate() {
        csv.row(std::iter::once(t).chain(pops.iter().map(|p| p.p1.values[i])));
    }
    let mut finals = Vec::new();
    let mut worst_drift: f64 = 0.0;
    for (j, (p, tr)) in pops.iter().zip(&traces).enumerate() {
        let drift = tr.max_norm_drift();
        worst_drift = worst_drift.max(drift);
        let bc = if j == 0 { None } else { Some(shortcut_bc_check(&stack, j, cfg.ratio_threshold)?) };
        finals.push(json!({ "order": j, "final_p1": p.final_p1(), "norm_drift": drift, "boundary_check": bc }));
    }
    let report = json!({
        "scenario": "populations",
        "protocol": protocol_summary(cfg),
        "samples": cfg.samples,
        "hamiltonians": finals,
    });
    let mut files = Vec::new();
    emit(&cfg.output_dir(), "populations", csv, &report, &mut files)?;
    drift_check(worst_drift, "populations")?;
    Ok(Outcome { files, report })
}

/// Feasible chirp band `20Ω₀/tf < |α| < 0.2Ω₀²` over a Rabi-frequency scan.
pub fn cmd_region(cfg: &ScenarioConfig) -> ScenarioResult<Outcome> {
    cfg.validate()?;
    let grid = cfg.region.rabi_grid();
    let mut csv = Csv::new(&["duration", "rabi", "min_chirp", "max_chirp", "nonempty"].map(String::from));
    let mut onsets = Vec::new();
    for &d in &cfg.region.durations {
        let pts = region_scan(d, &grid);
        for p in &pts {
            csv.row([d, p.rabi, p.min_chirp, p.max_chirp, f64::from(u8::from(p.nonempty))]);
        }
        onsets.push(json!({
            "duration": d,
            "onset": region_onset(&pts),
            "crossing": 100.0 / d,
        }));
    }
    let report = json!({ "scenario": "region", "onsets": onsets });
    let mut files = Vec::new();
    emit(&cfg.output_dir(), "region", csv, &report, &mut files)?;
    Ok(Outcome { files, report })
}

/// Inverse-engineered pulse from the polynomial invariant ansatz.
pub fn cmd_invariant(cfg: &ScenarioConfig) -> ScenarioResult<Outcome> {
    cfg.validate()?;
    let ansatz = InvariantAnsatz::new(cfg.duration)?;
    let protocol = invariant_to_controls(&ansatz, cfg.samples)?;
    let traj = propagate(&protocol.grid, &protocol.hamiltonian(), &Spinor::ground())?;
    let pops = populations(&traj);
    let inv = invariance_check(&ansatz, &protocol);

    let header = ["t", "polar", "azimuth", "rabi", "detuning", "p1"].map(String::from);
    let mut csv = Csv::new(&header);
    for (i, t) in protocol.grid.times().enumerate() {
        csv.row([
            t,
            ansatz.polar_angle(t),
            ansatz.azimuth_angle(t),
            protocol.omega_r[i],
            protocol.delta[i],
            pops.p1.values[i],
        ]);
    }
    let drift = traj.max_norm_drift();
    let report = json!({
        "scenario": "invariant",
        "duration": cfg.duration,
        "samples": cfg.samples,
        "ansatz": ansatz,
        "final_p1": pops.final_p1(),
        "norm_drift": drift,
        "invariance": inv,
    });
    let mut files = Vec::new();
    emit(&cfg.output_dir(), "invariant", csv, &report, &mut files)?;
    drift_check(drift, "invariant")?;
    if inv.residual > INVARIANCE_TOLERANCE {
        return Err(ScenarioError::Numerical(format!("invariance residual {:e}", inv.residual)));
    }
    if inv.start_commutator.max(inv.end_commutator) > ENDPOINT_COMMUTATOR_TOLERANCE {
        return Err(ScenarioError::Numerical("invariant does not commute with H at the ends".into()));
    }
    Ok(Outcome { files, report })
}

/// Full frame data: spherical coordinates and parallel phases of every
/// frame, plus the counterdiabatic terms of every order.
pub fn cmd_iterate(cfg: &ScenarioConfig) -> ScenarioResult<Outcome> {
    cfg.validate()?;
    let (_, stack) = stack_for(cfg, cfg.j_max)?;
    let mut header = vec!["t".to_string()];
    for f in &stack.frames {
        let j = f.order;
        header.extend(["theta", "phi", "r", "eps"].iter().map(|n| format!("{n}_{j}")));
    }
    for j in 0..stack.counterdiabatic.len() {
        header.extend(["x", "y", "z"].iter().map(|n| format!("hcd_{j}_{n}")));
    }
    let mut csv = Csv::new(&header);
    for (i, t) in stack.grid.times().enumerate() {
        let mut row = vec![t];
        for f in &stack.frames {
            let s = f.spherical[i];
            row.extend([s.theta, s.phi, s.r, f.eps[i]]);
        }
        for h in &stack.counterdiabatic {
            row.extend([h[i].x, h[i].y, h[i].z]);
        }
        csv.row(row);
    }
    let frames: Vec<_> = stack
        .frames
        .iter()
        .map(|f| {
            json!({
                "order": f.order,
                "pole_passages": f.pole_passages.iter().map(|&i| stack.grid.t(i)).collect::<Vec<_>>(),
                "degenerate_samples": f.spherical.iter().filter(|s| s.gauge_degenerate).count(),
            })
        })
        .collect();
    let checks = (1..=stack.j_max() + 1)
        .map(|j| shortcut_bc_check(&stack, j, cfg.ratio_threshold))
        .collect::<Result<Vec<_>, _>>()?;
    let report = json!({
        "scenario": "iterate",
        "protocol": protocol_summary(cfg),
        "samples": cfg.samples,
        "derivatives": format!("{:?}", stack.mode),
        "frames": frames,
        "boundary_checks": checks,
    });
    let mut files = Vec::new();
    emit(&cfg.output_dir(), "iterate", csv, &report, &mut files)?;
    Ok(Outcome { files, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let base = ScenarioConfig::default();
        for cfg in [
            ScenarioConfig { duration: 0.0, ..base.clone() },
            ScenarioConfig { samples: 20000, ..base.clone() },
            ScenarioConfig { samples: 999, ..base.clone() },
            ScenarioConfig { j_max: 9, ..base.clone() },
            ScenarioConfig { rabi: -1.0, ..base.clone() },
        ] {
            let err = cfg.validate().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{err}");
        }
    }

    #[test]
    fn json_accepts_flag_style_aliases() {
        let cfg = ScenarioConfig::from_json(r#"{"alpha": -2800, "omega0": 30, "tf": 0.2, "j_max": 2}"#).unwrap();
        assert_eq!(cfg.chirp, -2800.0);
        assert_eq!(cfg.rabi, 30.0);
        assert_eq!(cfg.j_max, 2);
        assert_eq!(cfg.samples, DEFAULT_SAMPLES);
        let err = ScenarioConfig::from_json(r#"{"unknown": 1}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn csv_uses_round_trip_formatting() {
        let mut csv = Csv::new(&["a".into(), "b".into()]);
        csv.row([0.1, 1.0 / 3.0]);
        assert_eq!(csv.text, "a,b\n0.1,0.3333333333333333\n");
        let back: f64 = "0.3333333333333333".parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
