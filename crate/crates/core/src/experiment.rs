//! Experiment runner behind the `eitchain` command.
//!
//! Each mode turns a [`Settings`] table into CSV rows plus a JSON summary.
//! Numbers are written in shortest round-trip form; infinities as `inf`;
//! a NaN anywhere in the output is treated as a numerical failure.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::bands::{scan_bands, uniform_grid, BandModel};
use crate::bidirectional::chain_scatter;
use crate::chiral::{avg_chain_transmission, avg_tau_sq, chain_transmission, xi_inverse_chiral};
use crate::config::{ConfigError, Settings};
use crate::ensemble::{linear_fit, run_ensemble, DisorderKind, DisorderSpec, FLAT_SLOPE};
use crate::error::Error;
use crate::model::{AtomParams, ChainConfig, WaveguideParams, WidthConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Spectrum,
    Bands,
    Ensemble,
    Analytic,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "spectrum" => Ok(Self::Spectrum),
            "bands" => Ok(Self::Bands),
            "ensemble" => Ok(Self::Ensemble),
            "analytic" => Ok(Self::Analytic),
            other => Err(format!(
                "unknown mode '{other}' (expected spectrum, bands, ensemble or analytic)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Spectrum => "spectrum",
            Self::Bands => "bands",
            Self::Ensemble => "ensemble",
            Self::Analytic => "analytic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    Config(ConfigError),
    Numerical(String),
}

impl ExperimentError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "configuration error: {e}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<ConfigError> for ExperimentError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

type Outcome<T> = std::result::Result<T, ExperimentError>;

/// Figure presets shipped with the crate.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.conf")),
    ("fig2b", include_str!("../presets/fig2b.conf")),
    ("fig3a", include_str!("../presets/fig3a.conf")),
    ("fig3b", include_str!("../presets/fig3b.conf")),
    ("fig4a", include_str!("../presets/fig4a.conf")),
    ("fig4b", include_str!("../presets/fig4b.conf")),
    ("fig4c", include_str!("../presets/fig4c.conf")),
    ("fig4d", include_str!("../presets/fig4d.conf")),
    ("fig5a", include_str!("../presets/fig5a.conf")),
    ("fig5b", include_str!("../presets/fig5b.conf")),
    ("fig5c", include_str!("../presets/fig5c.conf")),
    ("fig5d", include_str!("../presets/fig5d.conf")),
    ("fig6a", include_str!("../presets/fig6a.conf")),
    ("fig6b", include_str!("../presets/fig6b.conf")),
    ("fig6c", include_str!("../presets/fig6c.conf")),
    ("fig7a", include_str!("../presets/fig7a.conf")),
    ("fig7b", include_str!("../presets/fig7b.conf")),
    ("fig7c", include_str!("../presets/fig7c.conf")),
    ("fig7d", include_str!("../presets/fig7d.conf")),
    ("fig8a", include_str!("../presets/fig8a.conf")),
    ("fig8b", include_str!("../presets/fig8b.conf")),
    ("fig8c", include_str!("../presets/fig8c.conf")),
    ("fig8d", include_str!("../presets/fig8d.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    /// Mode-specific summary; the caller adds timing.
    pub summary: Value,
}

/// Physical parameters resolved from one settings table.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    /// Template atom with widths in the coupling convention.
    pub atom: AtomParams,
    pub waveguide: WaveguideParams,
    pub n: usize,
    pub lattice_constant: f64,
}

impl Physics {
    pub fn from_settings(s: &Settings) -> Result<Self, ConfigError> {
        let convention: WidthConvention = s.get_parsed("atom.width_convention")?;
        let omega2 = s.get_f64("atom.omega2")?;
        let omega3 = if s.is_auto("atom.omega3") {
            omega2
        } else {
            s.get_f64("atom.omega3")?
        };
        let atom = convention.to_coupling(AtomParams {
            omega2,
            omega3,
            rabi: s.get_f64("atom.rabi")?,
            gamma2: s.get_f64("atom.gamma2")?,
            gamma_r: s.get_f64("atom.gamma_r")?,
            gamma_l: s.get_f64("atom.gamma_l")?,
            position: 0.0,
        });
        atom.validate()
            .map_err(|e| ConfigError::new(None, Some("atom"), e.to_string()))?;
        let v_r = s.get_f64("waveguide.v_r")?;
        let wavelength = if s.is_auto("waveguide.wavelength") {
            std::f64::consts::TAU * v_r / omega2
        } else {
            s.get_f64("waveguide.wavelength")?
        };
        let waveguide = WaveguideParams {
            v_r,
            v_l: s.get_f64("waveguide.v_l")?,
            omega0: s.get_f64("waveguide.omega0")?,
            wavelength,
        };
        waveguide
            .validate()
            .map_err(|e| ConfigError::new(None, Some("waveguide"), e.to_string()))?;
        if waveguide.is_chiral() && atom.gamma_l != 0.0 {
            return Err(s.invalid(
                "atom.gamma_l",
                "must be 0 when waveguide.v_l = 0 (chiral waveguide)",
            ));
        }
        let lattice_constant = s.get_f64("chain.lattice_constant")?;
        if lattice_constant <= 0.0 {
            return Err(s.invalid("chain.lattice_constant", "must be positive"));
        }
        Ok(Self {
            atom,
            waveguide,
            n: s.get_usize("chain.n")?,
            lattice_constant,
        })
    }

    pub fn chain(&self, n: usize) -> ChainConfig {
        ChainConfig::periodic(self.atom, n, self.lattice_constant)
    }

    fn to_json(&self) -> Value {
        json!({
            "atom": serde_json::to_value(self.atom).unwrap_or(Value::Null),
            "waveguide": serde_json::to_value(self.waveguide).unwrap_or(Value::Null),
            "n": self.n,
            "lattice_constant": self.lattice_constant,
        })
    }
}

/// Shortest round-trip decimal; `inf`/`-inf` for infinities; NaN is an error.
pub fn format_number(x: f64) -> Outcome<String> {
    if x.is_nan() {
        return Err(ExperimentError::Numerical("result is not a number".into()));
    }
    if x.is_infinite() {
        return Ok(if x > 0.0 { "inf" } else { "-inf" }.into());
    }
    Ok(ryu::Buffer::new().format_finite(x).to_string())
}

fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else {
        json!(if x > 0.0 { "inf" } else { "-inf" })
    }
}

enum Cell<'a> {
    Text(&'a str),
    Num(f64),
    Int(usize),
    Bool(bool),
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(columns: &[&str]) -> Self {
        Self {
            text: columns.join(",") + "\n",
        }
    }

    fn row(&mut self, cells: &[Cell]) -> Outcome<()> {
        let mut parts = Vec::with_capacity(cells.len());
        for c in cells {
            parts.push(match c {
                Cell::Text(t) => t.to_string(),
                Cell::Num(x) => format_number(*x)?,
                Cell::Int(n) => n.to_string(),
                Cell::Bool(b) => b.to_string(),
            });
        }
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
        Ok(())
    }
}

fn numerical(context: impl fmt::Display, e: Error) -> ExperimentError {
    ExperimentError::Numerical(format!("{context}: {e}"))
}

/// Configuration-shaped solver errors count as configuration errors.
fn classify(context: impl fmt::Display, e: Error) -> ExperimentError {
    match e {
        Error::InvalidRegime(m) | Error::InvalidParameter(m) => {
            ExperimentError::Config(ConfigError::new(None, None, format!("{context}: {m}")))
        }
        other => numerical(context, other),
    }
}

fn grid(s: &Settings) -> Result<Vec<f64>, ConfigError> {
    let start = s.get_f64("sweep.start")?;
    let stop = s.get_f64("sweep.stop")?;
    let points = s.get_usize("sweep.points")?;
    if points == 0 {
        return Err(s.invalid("sweep.points", "must be at least 1"));
    }
    if points > 1 && stop <= start {
        return Err(s.invalid(
            "sweep.stop",
            "must exceed sweep.start when sweep.points > 1",
        ));
    }
    Ok(uniform_grid(start, stop, points))
}

fn label(name: &str) -> String {
    if name.is_empty() {
        "base".into()
    } else {
        name.into()
    }
}

/// Frequencies that sit on a lossless atomic pole are dropped from sweeps
/// instead of aborting the run; they are listed in the summary.
fn is_pole(e: &Error) -> bool {
    matches!(
        e,
        Error::DegeneratePole { .. } | Error::PoleAtDressedState { .. }
    )
}

/// Runs `mode` over every variant of `settings`.
pub fn run(settings: &Settings, mode: Mode) -> Outcome<Report> {
    let variants = settings.variants();
    let labelled = settings.has_variants();
    let mut physics = Vec::with_capacity(variants.len());
    for (_, s) in &variants {
        physics.push(Physics::from_settings(s)?);
    }
    let (csv, details) = match mode {
        Mode::Spectrum => spectrum(&variants, &physics, labelled)?,
        Mode::Bands => bands(&variants, &mut physics, labelled)?,
        Mode::Ensemble => ensemble(&variants, &physics, labelled)?,
        Mode::Analytic => analytic(&variants, &physics, labelled)?,
    };

    let mut summary = Map::new();
    summary.insert("mode".into(), json!(mode.to_string()));
    summary.insert("params".into(), json!(settings.resolved()));
    if labelled {
        let overlays: Map<String, Value> = variants
            .iter()
            .map(|(name, s)| (name.clone(), json!(s.resolved())))
            .collect();
        summary.insert("variant_params".into(), Value::Object(overlays));
    }
    let resolved: Vec<Value> = variants
        .iter()
        .zip(&physics)
        .map(|((name, _), p)| {
            let mut v = p.to_json();
            v["variant"] = json!(label(name));
            v
        })
        .collect();
    summary.insert("resolved".into(), json!(resolved));
    summary.insert("seed".into(), json!(settings.get_u64("ensemble.seed")?));
    for (k, v) in details {
        summary.insert(k, v);
    }
    Ok(Report {
        csv: csv.text,
        summary: Value::Object(summary),
    })
}

fn spectrum(
    variants: &[(String, Settings)],
    physics: &[Physics],
    labelled: bool,
) -> Outcome<(Csv, Map<String, Value>)> {
    let with_r = physics.iter().any(|p| !p.waveguide.is_chiral());
    let mut columns = vec![];
    if labelled {
        columns.push("variant");
    }
    columns.extend(["omega", "T"]);
    if with_r {
        columns.push("R");
    }
    let mut csv = Csv::new(&columns);
    let mut curves = Vec::new();
    for ((name, s), p) in variants.iter().zip(physics) {
        let chain = p.chain(p.n);
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut worst = (f64::INFINITY, 0.0);
        let mut skipped = Vec::new();
        for omega in grid(s)? {
            let context = format!("variant {} at omega = {omega}", label(name));
            let outcome = if p.waveguide.is_chiral() {
                chain_transmission(omega, &chain).map(|t| (t, 0.0))
            } else {
                chain_scatter(omega, &chain, &p.waveguide)
                    .map(|res| (res.transmission, res.reflection))
            };
            let (t, r) = match outcome {
                Ok(v) => v,
                Err(e) if is_pole(&e) => {
                    skipped.push(omega);
                    continue;
                }
                Err(e) => return Err(classify(&context, e)),
            };
            if t > best.0 {
                best = (t, omega);
            }
            if t < worst.0 {
                worst = (t, omega);
            }
            let mut cells = vec![];
            if labelled {
                cells.push(Cell::Text(name));
            }
            cells.extend([Cell::Num(omega), Cell::Num(t)]);
            if with_r {
                cells.push(Cell::Num(r));
            }
            csv.row(&cells)?;
        }
        curves.push(json!({
            "variant": label(name),
            "n": p.n,
            "t_max": json_number(best.0),
            "omega_at_t_max": best.1,
            "t_min": json_number(worst.0),
            "omega_at_t_min": worst.1,
            "skipped_poles": skipped,
        }));
    }
    let mut details = Map::new();
    details.insert("curves".into(), json!(curves));
    Ok((csv, details))
}

fn bands(
    variants: &[(String, Settings)],
    physics: &mut [Physics],
    labelled: bool,
) -> Outcome<(Csv, Map<String, Value>)> {
    let mut lattice = Vec::with_capacity(variants.len());
    for ((_, s), p) in variants.iter().zip(physics.iter()) {
        lattice.push(if s.is_auto("bands.lattice_constants") {
            vec![p.lattice_constant]
        } else {
            s.get_f64_list("bands.lattice_constants")?
        });
    }
    let multi_l = lattice.iter().any(|l| l.len() > 1);
    let mut columns = vec![];
    if labelled {
        columns.push("variant");
    }
    if multi_l {
        columns.push("lattice_constant");
    }
    columns.extend(["omega", "cos_KL", "K_real", "K_imag", "allowed"]);
    let mut csv = Csv::new(&columns);
    let mut warnings = Vec::new();
    let mut scans = Vec::new();
    for (((name, s), p), ls) in variants.iter().zip(physics.iter_mut()).zip(&lattice) {
        if p.atom.gamma2 != 0.0 {
            let msg = format!(
                "variant {}: gamma2 = {} forced to 0 for the dispersion relation",
                label(name),
                p.atom.gamma2
            );
            eprintln!("warning: {msg}");
            warnings.push(msg);
            p.atom.gamma2 = 0.0;
        }
        let model: BandModel = s.get_parsed("bands.model")?;
        let omegas = grid(s)?;
        for &l in ls {
            if l <= 0.0 {
                return Err(s
                    .invalid("bands.lattice_constants", "entries must be positive")
                    .into());
            }
            let context = format!("variant {} with L = {l}", label(name));
            let scan = scan_bands(&omegas, &p.atom, &p.waveguide, l, model)
                .map_err(|e| classify(&context, e))?;
            for pt in &scan.points {
                let mut cells = vec![];
                if labelled {
                    cells.push(Cell::Text(name));
                }
                if multi_l {
                    cells.push(Cell::Num(l));
                }
                cells.extend([
                    Cell::Num(pt.omega),
                    Cell::Num(pt.cos_kl),
                    Cell::Num(pt.k_real),
                    Cell::Num(pt.k_imag),
                    Cell::Bool(pt.allowed),
                ]);
                csv.row(&cells)?;
            }
            scans.push(json!({
                "variant": label(name),
                "lattice_constant": l,
                "model": model.to_string(),
                "gaps": scan.gaps,
                "bands": scan.bands,
                "poles": scan.poles,
                "skipped": scan.skipped,
            }));
        }
    }
    let mut details = Map::new();
    details.insert("scans".into(), json!(scans));
    details.insert("warnings".into(), json!(warnings));
    Ok((csv, details))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Sigma,
    Omega,
    Atoms,
}

fn axis(s: &Settings) -> Result<Axis, ConfigError> {
    match s.get_str("sweep.axis") {
        "sigma" => Ok(Axis::Sigma),
        "omega" => Ok(Axis::Omega),
        "n" => Ok(Axis::Atoms),
        other => Err(s.invalid(
            "sweep.axis",
            format!("expected sigma, omega or n, got '{other}'"),
        )),
    }
}

fn ensemble(
    variants: &[(String, Settings)],
    physics: &[Physics],
    labelled: bool,
) -> Outcome<(Csv, Map<String, Value>)> {
    let mut columns = vec![];
    if labelled {
        columns.push("variant");
    }
    columns.extend([
        "x_value",
        "mean_T",
        "stderr_T",
        "mean_lnT",
        "stderr_lnT",
        "xi",
    ]);
    let mut csv = Csv::new(&columns);
    let mut excluded = 0;
    let mut underflows = 0;
    let mut realizations = 0;
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for ((name, s), p) in variants.iter().zip(physics) {
        let axis = axis(s)?;
        let kind: DisorderKind = s.get_parsed("disorder.kind")?;
        let base = DisorderSpec {
            kind,
            // position draws are centred on the lattice sites
            mean: match kind {
                DisorderKind::Position => p.lattice_constant,
                DisorderKind::Frequency => s.get_f64("disorder.mean")?,
            },
            sigma: s.get_f64("disorder.sigma")?,
        };
        let omega = if s.is_auto("ensemble.omega") {
            p.atom.omega2
        } else {
            s.get_f64("ensemble.omega")?
        };
        realizations = s.get_usize("ensemble.realizations")?;
        if realizations < 2 {
            return Err(s
                .invalid("ensemble.realizations", "must be at least 2")
                .into());
        }
        let seed = s.get_u64("ensemble.seed")?;
        let xs: Vec<f64> = match axis {
            Axis::Atoms => {
                let list = s.get_usize_list("ensemble.n_list")?;
                if list.is_empty() || list.contains(&0) || list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(s
                        .invalid(
                            "ensemble.n_list",
                            "must be positive and strictly increasing",
                        )
                        .into());
                }
                list.into_iter().map(|n| n as f64).collect()
            }
            _ => grid(s)?,
        };
        let mut lnt = Vec::with_capacity(xs.len());
        for &x in &xs {
            let mut spec = base;
            let mut w = omega;
            let mut n = p.n;
            match axis {
                Axis::Sigma => spec.sigma = x,
                Axis::Omega => w = x,
                Axis::Atoms => n = x as usize,
            }
            let context = format!(
                "variant {} at {} = {x}",
                label(name),
                s.get_str("sweep.axis")
            );
            let stats = match run_ensemble(&p.chain(n), &spec, w, &p.waveguide, realizations, seed)
            {
                Ok(stats) => stats,
                Err(e) if axis == Axis::Omega && is_pole(&e) => {
                    skipped.push(json!({ "variant": label(name), "omega": x }));
                    continue;
                }
                Err(e) => return Err(classify(&context, e)),
            };
            excluded += stats.excluded;
            underflows += stats.underflows;
            lnt.push(stats.mean_ln_t);
            let mut cells = vec![];
            if labelled {
                cells.push(Cell::Text(name));
            }
            cells.push(match axis {
                Axis::Atoms => Cell::Int(n),
                _ => Cell::Num(x),
            });
            cells.extend([
                Cell::Num(stats.mean_t),
                Cell::Num(stats.stderr_t),
                Cell::Num(stats.mean_ln_t),
                Cell::Num(stats.stderr_ln_t),
                Cell::Num(stats.xi_fixed_n),
            ]);
            csv.row(&cells)?;
        }
        if axis == Axis::Atoms && xs.len() >= 2 {
            let (a, b, r2) = linear_fit(&xs, &lnt);
            fits.push(if b >= FLAT_SLOPE {
                json!({
                    "variant": label(name),
                    "error": Error::DegenerateFit { slope: b }.to_string(),
                })
            } else {
                json!({
                    "variant": label(name),
                    "intercept": a,
                    "slope": b,
                    "r_squared": r2,
                    "xi": -1.0 / b,
                })
            });
        }
    }
    let mut details = Map::new();
    details.insert("realizations".into(), json!(realizations));
    details.insert("excluded".into(), json!(excluded));
    details.insert("underflows".into(), json!(underflows));
    if !fits.is_empty() {
        details.insert("fits".into(), json!(fits));
    }
    if !skipped.is_empty() {
        details.insert("skipped_poles".into(), json!(skipped));
    }
    Ok((csv, details))
}

fn analytic(
    variants: &[(String, Settings)],
    physics: &[Physics],
    labelled: bool,
) -> Outcome<(Csv, Map<String, Value>)> {
    let mut columns = vec![];
    if labelled {
        columns.push("variant");
    }
    columns.extend(["sigma", "avg_tau_sq", "avg_T_N", "xi_analytic"]);
    let mut csv = Csv::new(&columns);
    for ((name, s), p) in variants.iter().zip(physics) {
        if axis(s)? != Axis::Sigma {
            return Err(s.invalid("sweep.axis", "analytic mode sweeps sigma").into());
        }
        let a = &p.atom;
        if (a.gamma2 - a.gamma_r).abs() > 1e-12 * a.gamma_r.max(a.gamma2) {
            return Err(s
                .invalid(
                    "atom.gamma2",
                    "analytic mode needs critical coupling, atom.gamma2 = atom.gamma_r",
                )
                .into());
        }
        let mean = s.get_f64("disorder.mean")?;
        for sigma in grid(s)? {
            if sigma < 0.0 {
                return Err(s.invalid("sweep.start", "sigma must be nonnegative").into());
            }
            let context = format!("variant {} at sigma = {sigma}", label(name));
            let avg = avg_tau_sq(mean, sigma, a.rabi, a.gamma2, a.gamma_r)
                .map_err(|e| classify(&context, e))?;
            let xi_inv = xi_inverse_chiral(mean, sigma, a.rabi, a.gamma2, a.gamma_r)
                .map_err(|e| classify(&context, e))?;
            let mut cells = vec![];
            if labelled {
                cells.push(Cell::Text(name));
            }
            cells.extend([
                Cell::Num(sigma),
                Cell::Num(avg),
                Cell::Num(avg_chain_transmission(p.n as u64, avg)),
                Cell::Num(1.0 / xi_inv),
            ]);
            csv.row(&cells)?;
        }
    }
    Ok((csv, Map::new()))
}
