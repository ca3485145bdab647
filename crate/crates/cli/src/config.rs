//! Flat `key = value` run configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pbamr::adapt::{AmrConfig, MarkingStrategy};
use pbamr::estimator::{FluxAverage, IndicatorKind};
use pbamr::mlsolve::PreconditionerVariant;
use pbamr::problem::{coulomb_constant, BcKind, Nonlinearity};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Born { half_width: f64, radius: f64, subdivisions: usize, fitted: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChargeSource {
    Pqr(PathBuf),
    /// A single ion at the origin with the Born sphere radius.
    BornIon { charge: f64 },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub charges: ChargeSource,
    pub out: PathBuf,
    pub amr: AmrConfig,
    pub bench_variants: Vec<PreconditionerVariant>,
    /// Write wall times into the study CSV instead of zeros.
    pub timing: bool,
}

const KEYS: &[&str] = &[
    "mesh",
    "born_half_width",
    "born_radius",
    "born_subdivisions",
    "born_fitted",
    "born_charge",
    "pqr",
    "eps_m",
    "eps_s",
    "kappa_s",
    "coulomb",
    "temperature",
    "bc",
    "nonlinear",
    "marking",
    "gamma",
    "indicator",
    "flux",
    "sigma",
    "preconditioner",
    "pre_sweeps",
    "post_sweeps",
    "coarse_direct",
    "smoothed_additive",
    "pcg_tol",
    "pcg_max_iter",
    "newton_tol",
    "newton_max_iter",
    "max_levels",
    "max_dof",
    "estimate_tol",
    "out",
    "bench_variants",
    "timing",
];

struct Entries {
    pairs: Vec<(String, String, usize)>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.pairs.iter().rev().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| ConfigError(format!("line {line}: bad value '{v}' for {key}: {e}"))),
        }
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(Some(true)),
                "false" | "no" | "0" | "off" => Ok(Some(false)),
                _ => err(format!("line {line}: {key} expects true or false, got '{v}'")),
            },
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut pairs = Vec::new();
    let known: BTreeSet<&str> = KEYS.iter().copied().collect();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected key = value", i + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if !known.contains(k) {
            return err(format!("line {}: unknown key '{k}'", i + 1));
        }
        if v.is_empty() {
            return err(format!("line {}: empty value for {k}", i + 1));
        }
        pairs.push((k.to_string(), v.to_string(), i + 1));
    }
    Ok(Entries { pairs })
}

fn parse_bc(s: &str) -> Result<BcKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "zero" => Ok(BcKind::Zero),
        "screened" => Ok(BcKind::Screened),
        _ => Err("expected zero or screened".into()),
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = PathBuf::from(p);
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

impl RunConfig {
    /// Parses a configuration; relative paths are taken relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let e = tokenize(text)?;
        let mut amr = AmrConfig::default();

        let born_keys = ["born_half_width", "born_radius", "born_subdivisions", "born_fitted"];
        let mesh = match e.get("mesh") {
            Some((p, _)) => {
                if let Some(k) = born_keys.iter().find(|k| e.get(k).is_some()) {
                    return err(format!("{k} conflicts with mesh"));
                }
                MeshSource::File(resolve(base, p))
            }
            None => MeshSource::Born {
                half_width: e.parse("born_half_width")?.unwrap_or(12.0),
                radius: e.parse("born_radius")?.unwrap_or(3.0),
                subdivisions: e.parse("born_subdivisions")?.unwrap_or(8),
                fitted: e.flag("born_fitted")?.unwrap_or(false),
            },
        };
        let charges = match (e.get("pqr"), &mesh) {
            (Some((p, _)), _) => {
                if e.get("born_charge").is_some() {
                    return err("born_charge conflicts with pqr");
                }
                ChargeSource::Pqr(resolve(base, p))
            }
            (None, MeshSource::Born { .. }) => ChargeSource::BornIon { charge: e.parse("born_charge")?.unwrap_or(1.0) },
            (None, MeshSource::File(_)) => return err("a mesh file needs a pqr file"),
        };

        let p = &mut amr.params;
        if let Some(v) = e.parse("eps_m")? {
            p.eps_m = v;
        }
        if let Some(v) = e.parse("eps_s")? {
            p.eps_s = v;
        }
        if let Some(v) = e.parse("kappa_s")? {
            p.kappa_s = v;
        }
        if let Some(v) = e.parse("temperature")? {
            p.temperature = v;
            p.coulomb = coulomb_constant(v);
        }
        if let Some(v) = e.parse("coulomb")? {
            p.coulomb = v;
        }
        if let Some((v, line)) = e.get("bc") {
            p.bc = parse_bc(v).map_err(|m| ConfigError(format!("line {line}: bc: {m}")))?;
        }
        if let Some(v) = e.flag("nonlinear")? {
            amr.mode = if v { Nonlinearity::Sinh } else { Nonlinearity::Linear };
        }

        if let Some(v) = e.parse::<MarkingStrategy>("marking")? {
            amr.marking.strategy = v;
        }
        if let Some(v) = e.parse("gamma")? {
            amr.marking.gamma = v;
        }
        if let Some(v) = e.parse::<IndicatorKind>("indicator")? {
            amr.marking.indicator = v;
        }
        if let Some(v) = e.parse::<FluxAverage>("flux")? {
            amr.flux = v;
        }
        amr.sigma = e.parse("sigma")?;

        let pc = &mut amr.solver.preconditioner;
        if let Some(v) = e.parse::<PreconditionerVariant>("preconditioner")? {
            pc.variant = v;
        }
        if let Some(v) = e.parse("pre_sweeps")? {
            pc.pre_sweeps = v;
        }
        if let Some(v) = e.parse("post_sweeps")? {
            pc.post_sweeps = v;
        }
        if let Some(v) = e.flag("coarse_direct")? {
            pc.coarse_direct = v;
        }
        if let Some(v) = e.flag("smoothed_additive")? {
            pc.smoothed_additive = v;
        }
        if let Some(v) = e.parse("pcg_tol")? {
            amr.solver.tol = v;
        }
        if let Some(v) = e.parse("pcg_max_iter")? {
            amr.solver.max_iter = v;
        }
        if let Some(v) = e.parse("newton_tol")? {
            amr.newton.tol = v;
        }
        if let Some(v) = e.parse("newton_max_iter")? {
            amr.newton.max_iter = v;
        }
        if let Some(v) = e.parse("max_levels")? {
            amr.max_levels = v;
        }
        if let Some(v) = e.parse("max_dof")? {
            amr.max_dof = v;
        }
        amr.tol = e.parse("estimate_tol")?;

        let out = e.get("out").map(|(p, _)| resolve(base, p)).unwrap_or_else(|| base.join("out"));
        let bench_variants = match e.get("bench_variants") {
            None => PreconditionerVariant::ALL.to_vec(),
            Some((list, line)) => list
                .split(',')
                .map(|s| s.parse::<PreconditionerVariant>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|x| ConfigError(format!("line {line}: {x}")))?,
        };
        let timing = e.flag("timing")?.unwrap_or(false);

        Ok(Self { mesh, charges, out, amr, bench_variants, timing })
    }

    /// Checks value ranges and that input files exist.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |r: pbamr::Result<()>| r.map_err(|e| ConfigError(e.to_string()));
        wrap(self.amr.params.validate())?;
        wrap(self.amr.marking.validate())?;
        wrap(self.amr.solver.preconditioner.validate())?;
        if let MeshSource::Born { half_width, radius, subdivisions, .. } = self.mesh {
            if !(radius > 0.0 && radius < half_width) {
                return err(format!("need 0 < born_radius < born_half_width, got {radius} and {half_width}"));
            }
            if subdivisions < 2 {
                return err("born_subdivisions must be at least 2");
            }
        }
        if !(self.amr.solver.tol > 0.0 && self.amr.solver.tol < 1.0) {
            return err("pcg_tol must lie in (0, 1)");
        }
        if !(self.amr.newton.tol > 0.0 && self.amr.newton.tol < 1.0) {
            return err("newton_tol must lie in (0, 1)");
        }
        if self.amr.solver.max_iter == 0 || self.amr.newton.max_iter == 0 {
            return err("iteration limits must be positive");
        }
        if let Some(s) = self.amr.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return err("sigma must be positive");
            }
        }
        if self.bench_variants.is_empty() {
            return err("bench_variants is empty");
        }
        for path in [self.mesh_path(), self.pqr_path()].into_iter().flatten() {
            if !path.is_file() {
                return err(format!("no such file: {}", path.display()));
            }
        }
        Ok(())
    }

    fn mesh_path(&self) -> Option<&Path> {
        match &self.mesh {
            MeshSource::File(p) => Some(p),
            MeshSource::Born { .. } => None,
        }
    }

    fn pqr_path(&self) -> Option<&Path> {
        match &self.charges {
            ChargeSource::Pqr(p) => Some(p),
            ChargeSource::BornIon { .. } => None,
        }
    }
}
